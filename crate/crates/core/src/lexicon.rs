//! Term strength lexicon and removal patches.
//!
//! Lexicon files are UTF-8 TSV (`term<TAB>strength`); patch files list one
//! term per line. Both accept `#` comment lines and blank lines.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::normalizer::tokenize;

/// Strengths run from -5 to +5; magnitudes 0 and 1 are the implicit baseline.
pub const MAX_STRENGTH: i8 = 5;
pub const MIN_STORED_MAGNITUDE: i8 = 2;

/// Validated lexicon strength in `-5..=-2` or `2..=5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Strength(i8);

impl Strength {
    pub fn new(value: i64) -> Option<Self> {
        let mag = value.unsigned_abs();
        if (MIN_STORED_MAGNITUDE as u64..=MAX_STRENGTH as u64).contains(&mag) {
            Some(Strength(value as i8))
        } else {
            None
        }
    }

    pub fn get(self) -> i8 {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, Strength>,
}

fn check_term(term: &str) -> std::result::Result<(), String> {
    let tokens = tokenize(term);
    if tokens.len() != 1 || tokens[0] != term {
        return Err(format!("term {term:?} is not a single lowercase word token"));
    }
    Ok(())
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

impl Lexicon {
    /// Builds a lexicon from `(term, strength)` pairs.
    pub fn from_entries<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        let mut lex = Lexicon::default();
        for (line, (term, value)) in entries.into_iter().enumerate() {
            lex.insert_checked(term.into(), value, Path::new("<memory>"), line + 1)?;
        }
        Ok(lex)
    }

    fn insert_checked(&mut self, term: String, value: i64, origin: &Path, line: usize) -> Result<()> {
        check_term(&term).map_err(|m| Error::parse(origin, line, m))?;
        let strength = Strength::new(value)
            .ok_or_else(|| Error::parse(origin, line, format!("strength out of range: {value}")))?;
        if self.entries.contains_key(&term) {
            return Err(Error::DuplicateTerm { term, line });
        }
        self.entries.insert(term, strength);
        Ok(())
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lex = Lexicon::default();
        for (lineno, line) in content_lines(text) {
            let (term, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, lineno, "expected term<TAB>strength"))?;
            let value: i64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(origin, lineno, format!("invalid strength {value:?}")))?;
            lex.insert_checked(term.to_string(), value, origin, lineno)?;
        }
        Ok(lex)
    }

    /// Canonical TSV rendering, terms sorted.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (term, s) in &self.entries {
            let _ = writeln!(out, "{term}\t{}", s.get());
        }
        out
    }

    pub fn get(&self, term: &str) -> Option<i8> {
        self.entries.get(term).map(|s| s.get())
    }

    pub fn contains(&self, term: &str) -> bool {
        self.entries.contains_key(term)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i8)> {
        self.entries.iter().map(|(t, s)| (t.as_str(), s.get()))
    }

    /// Returns a new lexicon without the patch's terms. `self` is untouched.
    pub fn apply_patch(&self, patch: &LexiconPatch) -> Result<Lexicon> {
        if let Some(unknown) = patch.terms().find(|t| !self.entries.contains_key(*t)) {
            return Err(Error::UnknownPatchTerm(unknown.to_string()));
        }
        let mut entries = self.entries.clone();
        for term in patch.terms() {
            entries.remove(term);
        }
        Ok(Lexicon { entries })
    }

    /// Adds or replaces entries; used for fixture construction and tests.
    pub fn extended<I, S>(&self, extra: I) -> Result<Lexicon>
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        let mut lex = self.clone();
        for (i, (term, value)) in extra.into_iter().enumerate() {
            let term = term.into();
            lex.entries.remove(&term);
            lex.insert_checked(term, value, Path::new("<memory>"), i + 1)?;
        }
        Ok(lex)
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Lexicon::parse(&text, path)
}

pub fn save_lexicon(lexicon: &Lexicon, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, lexicon.to_tsv()).map_err(|e| Error::io(path, e))
}

/// A reviewed list of terms to drop from a lexicon.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexiconPatch {
    removed: BTreeSet<String>,
    /// Free-text provenance, written as leading comment lines.
    pub provenance: String,
}

impl LexiconPatch {
    pub fn new<I, S>(terms: I, provenance: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        LexiconPatch {
            removed: terms.into_iter().map(Into::into).collect(),
            provenance: provenance.into(),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.removed.iter().map(String::as_str)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.removed.contains(term)
    }

    pub fn len(&self) -> usize {
        self.removed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut provenance = Vec::new();
        for line in text.lines() {
            match line.trim_start().strip_prefix('#') {
                Some(c) => provenance.push(c.trim().to_string()),
                None if line.trim().is_empty() => {}
                None => break,
            }
        }
        let mut removed = BTreeSet::new();
        for (lineno, line) in content_lines(text) {
            let term = line.trim();
            check_term(term).map_err(|m| Error::parse(origin, lineno, m))?;
            removed.insert(term.to_string());
        }
        Ok(LexiconPatch {
            removed,
            provenance: provenance.join("\n"),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in self.provenance.lines() {
            let _ = writeln!(out, "# {line}");
        }
        for term in &self.removed {
            let _ = writeln!(out, "{term}");
        }
        out
    }
}

pub fn load_patch(path: impl AsRef<Path>) -> Result<LexiconPatch> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    LexiconPatch::parse(&text, path)
}

pub fn save_patch(patch: &LexiconPatch, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, patch.to_text()).map_err(|e| Error::io(path, e))
}
