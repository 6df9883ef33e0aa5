use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use symnet_core::{ClassifierKind, ClassifierSpec, SymmetryKind};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "symnet",
    version,
    about = "Word adjacency networks and concentric symmetry"
)]
struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build one network per manifest row (edge-list TSV and JSON).
    Build {
        manifest: PathBuf,
        #[command(flatten)]
        text: TextArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-node symmetry of a saved network, as CSV sorted by lemma.
    Symmetry {
        network: PathBuf,
        #[arg(long, default_value_t = 2)]
        h: usize,
        #[arg(long, default_value_t = SymmetryKind::Merged)]
        kind: SymmetryKind,
        /// Directory for the CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Histograms, logistic fits and measurement correlations.
    Analyze {
        network: PathBuf,
        #[arg(long, default_value_t = 2)]
        h: usize,
        /// Comma-separated levels; overrides --h.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
        #[arg(long, default_value_t = symnet_core::netstats::DEFAULT_BINS)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leave-one-out authorship attribution over a corpus.
    Classify {
        manifest: PathBuf,
        #[command(flatten)]
        text: TextArgs,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
        /// Directory for report.json; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the symmetry feature matrix of a corpus as CSV.
    Features {
        manifest: PathBuf,
        #[command(flatten)]
        text: TextArgs,
        #[command(flatten)]
        features: FeatureArgs,
        /// Directory for the CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct TextArgs {
    /// Replace the built-in English stopword list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Tab-separated `surface<TAB>lemma` dictionary.
    #[arg(long)]
    lemmas: Option<PathBuf>,
    /// Link words across sentence boundaries.
    #[arg(long)]
    cross_sentence: bool,
    /// Keep Project Gutenberg header and footer.
    #[arg(long)]
    keep_boilerplate: bool,
}

#[derive(Args, Debug, Clone)]
struct FeatureArgs {
    #[arg(long, default_value_t = 2)]
    h: usize,
    /// Comma-separated levels whose features are concatenated; overrides --h.
    #[arg(long, value_delimiter = ',')]
    levels: Vec<usize>,
    #[arg(long, default_value_t = SymmetryKind::Merged)]
    kind: SymmetryKind,
}

impl FeatureArgs {
    fn levels(&self) -> anyhow::Result<Vec<usize>> {
        let levels = if self.levels.is_empty() {
            vec![self.h]
        } else {
            self.levels.clone()
        };
        check_levels(&levels)?;
        Ok(levels)
    }
}

#[derive(Args, Debug, Clone)]
struct ClassifierArgs {
    #[arg(long, default_value_t = ClassifierKind::Svm)]
    classifier: ClassifierKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    knn_k: usize,
    #[arg(long, default_value_t = 1.0)]
    svm_c: f64,
    #[arg(long, default_value_t = 200)]
    svm_epochs: usize,
    #[arg(long, default_value_t = 20)]
    mlp_hidden: usize,
    #[arg(long, default_value_t = 0.01)]
    mlp_learning_rate: f64,
    #[arg(long, default_value_t = 500)]
    mlp_epochs: usize,
}

impl ClassifierArgs {
    fn spec(&self) -> anyhow::Result<ClassifierSpec> {
        if self.knn_k == 0 {
            bail!("--knn-k must be at least 1");
        }
        if self.mlp_hidden == 0 {
            bail!("--mlp-hidden must be at least 1");
        }
        // Written this way so NaN is rejected too.
        if self.svm_c.is_nan()
            || self.svm_c <= 0.0
            || self.mlp_learning_rate.is_nan()
            || self.mlp_learning_rate <= 0.0
        {
            bail!("--svm-c and --mlp-learning-rate must be positive");
        }
        Ok(ClassifierSpec {
            kind: self.classifier,
            knn_k: self.knn_k,
            svm_c: self.svm_c,
            svm_epochs: self.svm_epochs,
            mlp_hidden: self.mlp_hidden,
            mlp_learning_rate: self.mlp_learning_rate,
            mlp_epochs: self.mlp_epochs,
            seed: self.seed,
        })
    }
}

fn check_levels(levels: &[usize]) -> anyhow::Result<()> {
    if levels.contains(&0) {
        bail!("--h / --levels must be at least 1");
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Build {
            manifest,
            text,
            out,
        } => commands::build(&manifest, &text, &out),
        Command::Symmetry {
            network,
            h,
            kind,
            out,
        } => {
            check_levels(&[h])?;
            commands::symmetry(&network, h, kind, out.as_deref()).map(|()| true)
        }
        Command::Analyze {
            network,
            h,
            levels,
            bins,
            out,
        } => {
            let levels = if levels.is_empty() { vec![h] } else { levels };
            check_levels(&levels)?;
            if bins == 0 {
                bail!("--bins must be at least 1");
            }
            commands::analyze(&network, &levels, bins, &out).map(|()| true)
        }
        Command::Classify {
            manifest,
            text,
            features,
            classifier,
            out,
        } => {
            let levels = features.levels()?;
            let spec = classifier.spec()?;
            commands::classify(
                &manifest,
                &text,
                features.kind,
                &levels,
                &spec,
                out.as_deref(),
            )
            .map(|()| true)
        }
        Command::Features {
            manifest,
            text,
            features,
            out,
        } => {
            let levels = features.levels()?;
            commands::features(&manifest, &text, features.kind, &levels, out.as_deref())
                .map(|()| true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SYMNET_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
