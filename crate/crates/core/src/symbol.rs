//! Symbols, words and finite ordered alphabets.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// An alphabet letter. Letters are arbitrary identifier strings, so `A1`,
/// `Ω′3` and `x` are all single symbols.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type Word = Vec<Symbol>;

/// Builds a word from whitespace-separated letters; `eps` and the empty
/// string denote the empty word.
pub fn word(text: &str) -> Word {
    text.split_whitespace()
        .filter(|t| *t != "eps" && *t != "ε")
        .map(Symbol::new)
        .collect()
}

/// Builds a word from single-character letters.
pub fn chars(text: &str) -> Word {
    text.chars().map(|c| Symbol::from(c.to_string())).collect()
}

/// Renders a word space-free when every letter is one character wide and
/// space-separated otherwise; the empty word renders as `eps`.
pub fn display_word(w: &[Symbol]) -> String {
    if w.is_empty() {
        return "eps".to_string();
    }
    if w.iter().all(|s| s.as_str().chars().count() == 1) {
        w.iter().map(Symbol::as_str).collect()
    } else {
        w.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
    }
}

/// Builds `letter^n`.
pub fn power(letter: &Symbol, n: usize) -> Word {
    vec![letter.clone(); n]
}

/// A finite alphabet with a fixed letter order. The order fixes indices for
/// Parikh vectors and matrices, and the lexicographic order of words.
#[derive(Clone, Default)]
pub struct Alphabet {
    letters: Vec<Symbol>,
    index: HashMap<Symbol, usize>,
}

impl Alphabet {
    pub fn new<I, S>(letters: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<Symbol>,
    {
        let mut alphabet = Alphabet::default();
        for letter in letters {
            let letter = letter.into();
            if alphabet.index.contains_key(&letter) {
                return Err(Error::Domain(format!("duplicate letter `{letter}`")));
            }
            alphabet
                .index
                .insert(letter.clone(), alphabet.letters.len());
            alphabet.letters.push(letter);
        }
        Ok(alphabet)
    }

    /// Whitespace-separated letters.
    pub fn parse(text: &str) -> Result<Self> {
        Alphabet::new(text.split_whitespace())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Symbol] {
        &self.letters
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Symbol> {
        self.letters.iter()
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.index.contains_key(s)
    }

    pub fn index_of(&self, s: &Symbol) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn get(&self, i: usize) -> &Symbol {
        &self.letters[i]
    }

    /// Index of `s`, or an `UnknownLetter` error.
    pub fn position(&self, s: &Symbol) -> Result<usize> {
        self.index_of(s)
            .ok_or_else(|| Error::UnknownLetter(s.clone()))
    }

    /// Maps a word to letter indices, rejecting foreign letters.
    pub fn encode(&self, w: &[Symbol]) -> Result<Vec<usize>> {
        w.iter().map(|s| self.position(s)).collect()
    }

    pub fn contains_word(&self, w: &[Symbol]) -> bool {
        w.iter().all(|s| self.contains(s))
    }

    /// True when both alphabets hold the same letters, in any order.
    pub fn same_letters(&self, other: &Alphabet) -> bool {
        self.len() == other.len() && self.letters.iter().all(|s| other.contains(s))
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters
    }
}

impl Eq for Alphabet {}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.letters.iter()).finish()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.letters.iter().map(Symbol::as_str).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Enumerates all words over `alphabet` of length at most `max_len`, by
/// length and then lexicographically with respect to the letter order.
pub fn words_up_to(alphabet: &Alphabet, max_len: usize) -> Vec<Word> {
    let mut all = vec![Vec::new()];
    let mut layer: Vec<Word> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for a in alphabet.iter() {
            for w in &layer {
                let mut v = Vec::with_capacity(w.len() + 1);
                v.push(a.clone());
                v.extend_from_slice(w);
                next.push(v);
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}
