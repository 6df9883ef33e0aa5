//! Text ingestion: reading book files, stripping distribution boilerplate,
//! tokenizing, dictionary lemmatization and stopword removal.
//!
//! The pipeline is deliberately rule-based. Sentence boundaries come from
//! terminal punctuation (`.`, `!`, `?`), tokens are whitespace-delimited with
//! leading and trailing punctuation stripped, and lemmas come from a
//! `surface -> lemma` dictionary with identity fallback.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A token that survived preprocessing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub sentence_index: usize,
    /// Index within the document after filtering.
    pub position: usize,
}

/// One book as a lemma sequence with its author label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub author: String,
    pub title: String,
    pub tokens: Vec<Token>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        author: impl Into<String>,
        title: impl Into<String>,
        tokens: Vec<Token>,
    ) -> Self {
        Self {
            id: id.into(),
            author: author.into(),
            title: title.into(),
            tokens,
        }
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.lemma.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct PreprocessConfig {
    stopwords: HashSet<String>,
    lemma_map: HashMap<String, String>,
    pub strip_boilerplate: bool,
    pub cross_sentence_edges: bool,
    pub keep_punctuation_as_boundary: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            stopwords: HashSet::new(),
            lemma_map: HashMap::new(),
            strip_boilerplate: true,
            cross_sentence_edges: false,
            keep_punctuation_as_boundary: true,
        }
    }
}

impl PreprocessConfig {
    /// Default configuration with the built-in English stopword list.
    pub fn english() -> Self {
        Self::default().with_stopwords(ENGLISH_STOPWORDS.iter().copied())
    }

    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stopwords = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        self
    }

    pub fn with_lemma_map<I, K, V>(mut self, entries: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        self.lemma_map = entries
            .into_iter()
            .map(|(k, v)| (k.as_ref().to_lowercase(), v.as_ref().to_lowercase()))
            .filter(|(k, v)| !k.is_empty() && !v.is_empty())
            .collect();
        self
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    pub fn lemma_map(&self) -> &HashMap<String, String> {
        &self.lemma_map
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        if self.stopwords.contains(word) {
            return true;
        }
        // Callers normally pass lowercase already.
        word.chars().any(char::is_uppercase) && self.stopwords.contains(&word.to_lowercase())
    }

    pub fn lemmatize<'a>(&'a self, surface: &'a str) -> &'a str {
        self.lemma_map
            .get(surface)
            .map(String::as_str)
            .unwrap_or(surface)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Encoding {
    #[default]
    Utf8,
    /// ISO-8859-1; every byte sequence decodes.
    Latin1,
}

impl Encoding {
    fn name(self) -> &'static str {
        match self {
            Encoding::Utf8 => "UTF-8",
            Encoding::Latin1 => "ISO-8859-1",
        }
    }
}

/// Reads a text file and normalizes CRLF / lone CR line endings to LF.
pub fn load_text(path: impl AsRef<Path>, encoding: Encoding) -> Result<String> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = match encoding {
        Encoding::Utf8 => String::from_utf8(bytes).map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            encoding: encoding.name(),
            offset: e.utf8_error().valid_up_to(),
        })?,
        Encoding::Latin1 => bytes.iter().map(|&b| b as char).collect(),
    };
    Ok(normalize_line_endings(&text))
}

pub fn normalize_line_endings(text: &str) -> String {
    if !text.contains('\r') {
        return text.to_owned();
    }
    text.replace("\r\n", "\n").replace('\r', "\n")
}

fn boilerplate_markers() -> &'static (Regex, Regex) {
    static MARKERS: OnceLock<(Regex, Regex)> = OnceLock::new();
    MARKERS.get_or_init(|| {
        (
            Regex::new(r"(?m)\*\*\*[ \t]*START OF[^\n]*?(?:\*\*\*|$)").unwrap(),
            Regex::new(r"(?m)\*\*\*[ \t]*END OF[^\n]*?(?:\*\*\*|$)").unwrap(),
        )
    })
}

/// Returns the text strictly between a `*** START OF …` marker and the
/// following `*** END OF …` marker. Input without both markers is returned
/// unchanged.
pub fn strip_boilerplate(text: &str) -> &str {
    let (start, end) = boilerplate_markers();
    let Some(start_match) = start.find(text) else {
        return text;
    };
    let body_start = start_match.end();
    match end.find_at(text, body_start) {
        Some(end_match) => &text[body_start..end_match.start()],
        None => text,
    }
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Whitespace tokenization into `(lowercased surface, sentence index)`.
///
/// Leading/trailing non-alphanumeric characters are stripped, so internal
/// apostrophes and hyphens survive. A chunk whose stripped tail contains
/// `.`, `!` or `?` closes the current sentence.
pub fn tokenize(text: &str) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut sentence = 0usize;
    let mut boundary_pending = false;
    for chunk in text.split_whitespace() {
        let core_end = chunk.trim_end_matches(|c: char| !c.is_alphanumeric()).len();
        let word = chunk[..core_end].trim_start_matches(|c: char| !c.is_alphanumeric());
        let closes = chunk[core_end..].contains(is_terminal);
        if !word.is_empty() {
            if boundary_pending && !out.is_empty() {
                sentence += 1;
            }
            boundary_pending = false;
            out.push((word.to_lowercase(), sentence));
        }
        if closes {
            boundary_pending = true;
        }
    }
    out
}

fn finish_tokens<I>(raw: I, config: &PreprocessConfig) -> Vec<Token>
where
    I: IntoIterator<Item = (String, String, usize)>,
{
    raw.into_iter()
        .filter(|(surface, lemma, _)| !config.is_stopword(surface) && !config.is_stopword(lemma))
        .enumerate()
        .map(|(position, (surface, lemma, sentence_index))| Token {
            surface,
            lemma,
            sentence_index: if config.keep_punctuation_as_boundary {
                sentence_index
            } else {
                0
            },
            position,
        })
        .collect()
}

/// Tokenize, lemmatize, then drop stopwords (matched on surface and lemma).
pub fn preprocess(text: &str, config: &PreprocessConfig) -> Vec<Token> {
    let text = if config.strip_boilerplate {
        strip_boilerplate(text)
    } else {
        text
    };
    let raw = tokenize(text).into_iter().map(|(surface, sentence)| {
        let lemma = config.lemmatize(&surface).to_owned();
        (surface, lemma, sentence)
    });
    finish_tokens(raw, config)
}

/// Preprocesses externally tagged input, one `surface<TAB>lemma` per line.
///
/// A line without a tab is treated as a bare surface form and lemmatized with
/// the dictionary. Blank lines and punctuation-only lines containing `.`, `!`
/// or `?` end the current sentence.
pub fn preprocess_tagged(text: &str, config: &PreprocessConfig) -> Vec<Token> {
    let mut raw = Vec::new();
    let mut sentence = 0usize;
    let mut boundary_pending = false;
    for line in text.lines() {
        let (surface_field, lemma_field) = match line.split_once('\t') {
            Some((s, l)) => (s.trim(), Some(l.trim())),
            None => (line.trim(), None),
        };
        let surface = surface_field
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        if surface.is_empty() {
            if surface_field.is_empty() || surface_field.contains(is_terminal) {
                boundary_pending = true;
            }
            continue;
        }
        if boundary_pending && !raw.is_empty() {
            sentence += 1;
        }
        boundary_pending = false;
        let lemma = match lemma_field.map(str::to_lowercase) {
            Some(l) if !l.is_empty() => l,
            _ => config.lemmatize(&surface).to_owned(),
        };
        raw.push((surface, lemma, sentence));
    }
    finish_tokens(raw, config)
}

/// One word per line; `#` starts a comment.
pub fn parse_stopwords(text: &str) -> Vec<String> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or("").trim())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn load_stopwords(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let text = load_text(path, Encoding::Utf8)?;
    Ok(parse_stopwords(&text))
}

/// Parses a `surface<TAB>lemma` table. Blank lines and `#` comments are skipped.
pub fn parse_lemma_map(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (surface, lemma) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: "expected `surface<TAB>lemma`".into(),
        })?;
        entries.push((surface.trim().to_lowercase(), lemma.trim().to_lowercase()));
    }
    Ok(entries)
}

pub fn load_lemma_map(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let text = load_text(path, Encoding::Utf8)?;
    parse_lemma_map(&text, path)
}

/// A row of a corpus manifest (`id,author,title,path`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub author: String,
    pub title: String,
    pub path: PathBuf,
}

/// Reads a manifest CSV. Relative book paths resolve against the manifest's
/// directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut entries = Vec::new();
    for row in reader.deserialize() {
        let mut entry: ManifestEntry = row?;
        if entry.path.is_relative() {
            entry.path = base.join(&entry.path);
        }
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: manifest has no rows",
            path.display()
        )));
    }
    Ok(entries)
}

/// Loads and preprocesses one manifest row. Files ending in `.tsv` are read
/// as pre-tagged `surface<TAB>lemma` input.
pub fn load_document(
    entry: &ManifestEntry,
    row: usize,
    config: &PreprocessConfig,
) -> Result<Document> {
    let wrap = |e: Error| Error::Manifest {
        row,
        id: entry.id.clone(),
        message: e.to_string(),
    };
    let text = load_text(&entry.path, Encoding::Utf8).map_err(wrap)?;
    let tagged = entry
        .path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("tsv"));
    let tokens = if tagged {
        preprocess_tagged(&text, config)
    } else {
        preprocess(&text, config)
    };
    Ok(Document::new(
        &entry.id,
        &entry.author,
        &entry.title,
        tokens,
    ))
}

/// A general-purpose English function-word list.
pub const ENGLISH_STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "am",
    "an",
    "and",
    "any",
    "are",
    "aren't",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "cannot",
    "could",
    "couldn't",
    "did",
    "didn't",
    "do",
    "does",
    "doesn't",
    "doing",
    "don't",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "hadn't",
    "has",
    "hasn't",
    "have",
    "haven't",
    "having",
    "he",
    "he'd",
    "he'll",
    "he's",
    "her",
    "here",
    "here's",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "how's",
    "i",
    "i'd",
    "i'll",
    "i'm",
    "i've",
    "if",
    "in",
    "into",
    "is",
    "isn't",
    "it",
    "it's",
    "its",
    "itself",
    "let's",
    "me",
    "more",
    "most",
    "mustn't",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "ought",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "shan't",
    "she",
    "she'd",
    "she'll",
    "she's",
    "should",
    "shouldn't",
    "so",
    "some",
    "such",
    "than",
    "that",
    "that's",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "there's",
    "these",
    "they",
    "they'd",
    "they'll",
    "they're",
    "they've",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "upon",
    "very",
    "was",
    "wasn't",
    "we",
    "we'd",
    "we'll",
    "we're",
    "we've",
    "were",
    "weren't",
    "what",
    "what's",
    "when",
    "when's",
    "where",
    "where's",
    "which",
    "while",
    "who",
    "who's",
    "whom",
    "why",
    "why's",
    "will",
    "with",
    "won't",
    "would",
    "wouldn't",
    "you",
    "you'd",
    "you'll",
    "you're",
    "you've",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "shall",
    "may",
    "might",
    "must",
    "said",
    "one",
];
