use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;
use serde_json::json;
use symnet_core::corpus::{
    load_document, load_lemma_map, load_manifest, load_stopwords, ManifestEntry,
};
use symnet_core::fsutil::{write_atomic, write_string_atomic};
use symnet_core::netstats::{compute_measurement, Measurement};
use symnet_core::stylometry::build_features_levels;
use symnet_core::wan::{export_json, export_network, load_network};
use symnet_core::{
    build_wan, fit_logistic, histogram, loocv, pearson, symmetry_all, BookLabel, ClassifierSpec,
    Document, Error, FeatureMatrix, PreprocessConfig, SymmetryKind, WordNetwork,
};

use crate::TextArgs;

fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        bail!(
            "{what} `{}` does not exist or is not a file",
            path.display()
        );
    }
    Ok(())
}

fn preprocess_config(args: &TextArgs) -> Result<PreprocessConfig> {
    if let Some(p) = &args.stopwords {
        require_file(p, "stopword list")?;
    }
    if let Some(p) = &args.lemmas {
        require_file(p, "lemma map")?;
    }
    let mut config = PreprocessConfig::english();
    if let Some(p) = &args.stopwords {
        config = config.with_stopwords(load_stopwords(p)?);
    }
    if let Some(p) = &args.lemmas {
        config = config.with_lemma_map(load_lemma_map(p)?);
    }
    config.strip_boilerplate = !args.keep_boilerplate;
    config.cross_sentence_edges = args.cross_sentence;
    Ok(config)
}

/// Writes to `dir/name`, or to stdout when no directory was given.
fn emit(dir: Option<&Path>, name: &str, body: &[u8]) -> Result<()> {
    match dir {
        Some(dir) => {
            let path = dir.join(name);
            write_atomic(&path, |w| {
                w.write_all(body).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })
            })?;
            info!("wrote {}", path.display());
        }
        None => std::io::stdout().lock().write_all(body)?,
    }
    Ok(())
}

fn load_corpus(manifest: &Path, text: &TextArgs) -> Result<(Vec<ManifestEntry>, PreprocessConfig)> {
    require_file(manifest, "manifest")?;
    let config = preprocess_config(text)?;
    let entries = load_manifest(manifest)?;
    Ok((entries, config))
}

/// Manifest rows are numbered from 1, the header excluded.
fn load_books(
    entries: &[ManifestEntry],
    config: &PreprocessConfig,
) -> Vec<Result<(Document, WordNetwork), Error>> {
    entries
        .par_iter()
        .enumerate()
        .map(|(i, entry)| {
            let doc = load_document(entry, i + 1, config)?;
            let net = build_wan(&doc.tokens, config.cross_sentence_edges);
            info!(
                "{}: {} tokens, {} nodes, {} edges",
                doc.id,
                doc.tokens.len(),
                net.node_count(),
                net.edge_count()
            );
            Ok((doc, net))
        })
        .collect()
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn build(manifest: &Path, text: &TextArgs, out: &Path) -> Result<bool> {
    let (entries, config) = load_corpus(manifest, text)?;
    let mut ok = true;
    for result in load_books(&entries, &config) {
        let written = result.and_then(|(doc, net)| {
            let stem = file_stem(&doc.id);
            export_network(&net, out.join(format!("{stem}.tsv")))?;
            export_json(&net, out.join(format!("{stem}.json")))?;
            Ok((doc, net))
        });
        match written {
            Ok((doc, net)) => println!(
                "{} {} {} {}",
                doc.id,
                net.node_count(),
                net.edge_count(),
                doc.tokens.len()
            ),
            Err(e) => {
                eprintln!("error: {e}");
                ok = false;
            }
        }
    }
    Ok(ok)
}

fn open_network(path: &Path) -> Result<WordNetwork> {
    require_file(path, "network")?;
    let net = load_network(path).with_context(|| format!("loading {}", path.display()))?;
    info!(
        "{}: {} nodes, {} edges",
        path.display(),
        net.node_count(),
        net.edge_count()
    );
    Ok(net)
}

fn fmt_value(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn symmetry_csv(net: &WordNetwork, h: usize, kind: SymmetryKind) -> Result<Vec<u8>> {
    let values = symmetry_all(net, h, kind)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lemma", "degree", "frequency", "kind", "h", "symmetry"])?;
    // Node ids follow lemma order, so this is sorted by lemma.
    for v in values {
        w.write_record([
            net.lemma(v.node).to_owned(),
            net.degree(v.node).to_string(),
            net.frequency(v.node).to_string(),
            kind.to_string(),
            h.to_string(),
            fmt_value(v.value),
        ])?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn symmetry(network: &Path, h: usize, kind: SymmetryKind, out: Option<&Path>) -> Result<()> {
    let net = open_network(network)?;
    let body = symmetry_csv(&net, h, kind)?;
    emit(out, &format!("symmetry_{kind}_h{h}.csv"), &body)
}

pub fn analyze(network: &Path, levels: &[usize], bins: usize, out: &Path) -> Result<()> {
    let net = open_network(network)?;
    let measurements: Vec<_> = Measurement::ALL
        .par_iter()
        .map(|&m| compute_measurement(&net, m))
        .collect();

    let mut corr = csv::Writer::from_writer(Vec::new());
    corr.write_record(["measurement", "kind", "h", "pearson"])?;
    for &h in levels {
        for kind in SymmetryKind::ALL {
            let sym: Vec<f64> = symmetry_all(&net, h, kind)?
                .iter()
                .map(|v| v.value.unwrap_or(f64::NAN))
                .collect();

            let defined: Vec<f64> = sym.iter().copied().filter(|v| v.is_finite()).collect();
            let mut hist_csv = csv::Writer::from_writer(Vec::new());
            hist_csv.write_record(["bin_center", "density", "count"])?;
            let fit_json = match histogram(&defined, bins) {
                Ok(hist) => {
                    for ((c, d), n) in hist
                        .bin_centers()
                        .iter()
                        .zip(&hist.densities)
                        .zip(&hist.counts)
                    {
                        hist_csv.write_record([c.to_string(), d.to_string(), n.to_string()])?;
                    }
                    match fit_logistic(&hist, true) {
                        Ok(fit) => {
                            println!("{kind} h={h}: R^2 = {:.4}", fit.r_squared);
                            json!({ "kind": kind, "h": h, "bins": bins, "fit": fit })
                        }
                        Err(Error::NonConvergence { iterations, best }) => {
                            warn!("{kind} h={h}: fit stopped after {iterations} iterations");
                            json!({
                                "kind": kind, "h": h, "bins": bins, "fit": best,
                                "error": format!("no convergence after {iterations} iterations"),
                            })
                        }
                        Err(e) => {
                            warn!("{kind} h={h}: {e}");
                            json!({ "kind": kind, "h": h, "bins": bins, "error": e.to_string() })
                        }
                    }
                }
                Err(e) => {
                    warn!("{kind} h={h}: no histogram: {e}");
                    json!({ "kind": kind, "h": h, "bins": bins, "error": e.to_string() })
                }
            };
            let hist_body = hist_csv.into_inner().map_err(|e| e.into_error())?;
            emit(Some(out), &format!("histogram_{kind}_h{h}.csv"), &hist_body)?;
            let path = out.join(format!("fit_{kind}_h{h}.json"));
            write_string_atomic(
                &path,
                &format!("{}\n", serde_json::to_string_pretty(&fit_json)?),
            )?;

            for m in &measurements {
                let r = pearson(&sym, &m.values).ok();
                corr.write_record([
                    m.measurement.name().to_owned(),
                    kind.to_string(),
                    h.to_string(),
                    fmt_value(r),
                ])?;
            }
        }
    }
    let body = corr.into_inner().map_err(|e| e.into_error())?;
    emit(Some(out), "correlation.csv", &body)
}

fn corpus_features(
    manifest: &Path,
    text: &TextArgs,
    kind: SymmetryKind,
    levels: &[usize],
) -> Result<FeatureMatrix> {
    let (entries, config) = load_corpus(manifest, text)?;
    let mut labels = Vec::with_capacity(entries.len());
    let mut networks = Vec::with_capacity(entries.len());
    let mut failures = Vec::new();
    for result in load_books(&entries, &config) {
        match result {
            Ok((doc, net)) => {
                labels.push(BookLabel::new(doc.id, doc.author));
                networks.push(net);
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("error: {f}");
        }
        bail!(
            "{} of {} books failed to load",
            failures.len(),
            entries.len()
        );
    }
    let features = build_features_levels(&networks, &labels, kind, levels)?;
    info!(
        "{} books x {} features ({} shared words)",
        features.n_rows(),
        features.n_cols(),
        features.n_cols() / levels.len()
    );
    Ok(features)
}

pub fn features(
    manifest: &Path,
    text: &TextArgs,
    kind: SymmetryKind,
    levels: &[usize],
    out: Option<&Path>,
) -> Result<()> {
    let features = corpus_features(manifest, text, kind, levels)?;
    let mut body = Vec::new();
    features.write_csv(&mut body)?;
    let tag = levels
        .iter()
        .map(|h| h.to_string())
        .collect::<Vec<_>>()
        .join("-");
    emit(out, &format!("features_{kind}_h{tag}.csv"), &body)
}

pub fn classify(
    manifest: &Path,
    text: &TextArgs,
    kind: SymmetryKind,
    levels: &[usize],
    spec: &ClassifierSpec,
    out: Option<&Path>,
) -> Result<()> {
    let features = corpus_features(manifest, text, kind, levels)?;
    let report = loocv(spec, &features)?;
    eprintln!(
        "{}: accuracy {:.3} ({}/{}), p = {:.3e}",
        spec.kind, report.accuracy, report.correct, report.total, report.p_value
    );
    let doc = json!({
        "kind": kind,
        "levels": levels,
        "features": features.n_cols(),
        "report": report,
    });
    let body = format!("{}\n", serde_json::to_string_pretty(&doc)?);
    emit(out, "report.json", body.as_bytes())
}
