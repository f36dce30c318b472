//! Iterated pushdown stores.
//!
//! A level-`k` store is a sequence of entries `γ[d]`, each pairing a symbol
//! with a level-`k−1` store; the level-0 store is empty. Level 1 is the
//! outermost sequence, so `pop(1)` drops the first bracketed block and
//! `pop(k)` drops the leftmost innermost symbol.
//!
//! Stores are immutable values: every operation returns a fresh store.

use crate::error::{Error, Result};
use crate::symbol::{Symbol, Word};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// An alphabet split into `k` disjoint levels `Γ_1..Γ_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedAlphabet {
    levels: Vec<BTreeSet<Symbol>>,
}

impl GradedAlphabet {
    pub fn new(levels: Vec<Vec<Symbol>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Domain("graded alphabet needs height ≥ 1".into()));
        }
        let mut seen = BTreeSet::new();
        let mut sets = Vec::with_capacity(levels.len());
        for level in levels {
            let mut set = BTreeSet::new();
            for s in level {
                if !seen.insert(s.clone()) {
                    return Err(Error::Domain(format!(
                        "symbol `{s}` occurs in more than one level"
                    )));
                }
                set.insert(s);
            }
            sets.push(set);
        }
        Ok(GradedAlphabet { levels: sets })
    }

    /// Levels given as whitespace-separated symbol lists, level 1 first.
    pub fn parse_levels(levels: &[&str]) -> Result<Self> {
        GradedAlphabet::new(
            levels
                .iter()
                .map(|l| l.split_whitespace().map(Symbol::new).collect())
                .collect(),
        )
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    /// The level (1-based) of `s`, if any.
    pub fn level_of(&self, s: &Symbol) -> Option<usize> {
        self.levels
            .iter()
            .position(|l| l.contains(s))
            .map(|i| i + 1)
    }

    pub fn level(&self, i: usize) -> &BTreeSet<Symbol> {
        &self.levels[i - 1]
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.level_of(s).is_some()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.levels.iter().flatten()
    }
}

/// One `γ[d]` block of a store.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entry {
    pub symbol: Symbol,
    pub body: Pushdown,
}

/// A `k`-iterated pushdown store. Also used for terms, where some symbols
/// are undeterminates occurring only at leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pushdown {
    level: usize,
    entries: Vec<Entry>,
}

pub type Term = Pushdown;

impl Pushdown {
    pub fn empty(level: usize) -> Self {
        Pushdown {
            level,
            entries: Vec::new(),
        }
    }

    pub fn new(level: usize, entries: Vec<Entry>) -> Result<Self> {
        if level == 0 && !entries.is_empty() {
            return Err(Error::Domain("a level-0 store has no entries".into()));
        }
        if let Some(bad) = entries.iter().find(|e| e.body.level + 1 != level) {
            return Err(Error::Domain(format!(
                "entry `{}` has a level-{} body inside a level-{} store",
                bad.symbol, bad.body.level, level
            )));
        }
        Ok(Pushdown { level, entries })
    }

    /// A level-`level` store whose entries all have empty bodies.
    pub fn flat(level: usize, symbols: &[Symbol]) -> Result<Self> {
        if level == 0 && !symbols.is_empty() {
            return Err(Error::Domain("a level-0 store has no entries".into()));
        }
        let entries = symbols
            .iter()
            .map(|s| Entry {
                symbol: s.clone(),
                body: Pushdown::empty(level - 1),
            })
            .collect();
        Ok(Pushdown { level, entries })
    }

    /// Parses the bracket text format at the given level.
    pub fn parse(text: &str, level: usize) -> Result<Self> {
        parse_text(text, level)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of level-1 blocks.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Leftmost symbol of each level, outermost first; stops at the first
    /// empty store.
    pub fn topsyms(&self) -> Word {
        let mut out = Vec::with_capacity(self.level);
        let mut cur = self;
        while let Some(first) = cur.entries.first() {
            out.push(first.symbol.clone());
            cur = &first.body;
        }
        out
    }

    fn check_level(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.level {
            return Err(Error::LevelOutOfRange {
                level: j,
                max: self.level,
            });
        }
        Ok(())
    }

    /// Removes the leftmost symbol of level `j` together with its bracket.
    pub fn pop(&self, j: usize) -> Result<Self> {
        self.check_level(j)?;
        let mut out = self.clone();
        out.pop_in_place(j);
        Ok(out)
    }

    fn pop_in_place(&mut self, j: usize) {
        if self.entries.is_empty() {
            return;
        }
        if j == 1 {
            self.entries.remove(0);
        } else {
            self.entries[0].body.pop_in_place(j - 1);
        }
    }

    /// Replaces the leftmost level-`j` head by the symbols of `h`, copying
    /// the store under the old head beneath each new one.
    pub fn push(&self, j: usize, h: &[Symbol]) -> Result<Self> {
        self.check_level(j)?;
        if h.is_empty() {
            return Err(Error::Domain("push needs a non-empty word".into()));
        }
        let mut out = self.clone();
        out.push_in_place(j, h);
        Ok(out)
    }

    fn push_in_place(&mut self, j: usize, h: &[Symbol]) {
        if self.entries.is_empty() {
            return;
        }
        if j == 1 {
            let body = self.entries[0].body.clone();
            let heads = h.iter().map(|s| Entry {
                symbol: s.clone(),
                body: body.clone(),
            });
            self.entries.splice(0..1, heads);
        } else {
            self.entries[0].body.push_in_place(j - 1, h);
        }
    }

    /// Concatenation of two stores of the same level.
    pub fn concat(&self, other: &Pushdown) -> Result<Self> {
        if self.level != other.level {
            return Err(Error::Domain(format!(
                "cannot concatenate level-{} and level-{} stores",
                self.level, other.level
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(Pushdown {
            level: self.level,
            entries,
        })
    }

    /// Splits after the first `n` level-1 blocks.
    pub fn split_at(&self, n: usize) -> (Pushdown, Pushdown) {
        let (l, r) = self.entries.split_at(n);
        (
            Pushdown {
                level: self.level,
                entries: l.to_vec(),
            },
            Pushdown {
                level: self.level,
                entries: r.to_vec(),
            },
        )
    }

    /// Every symbol occurrence with its depth (1 = outermost).
    pub fn occurrences(&self) -> Vec<(usize, &Symbol)> {
        let mut out = Vec::new();
        self.collect_occurrences(1, &mut out);
        out
    }

    fn collect_occurrences<'a>(&'a self, depth: usize, out: &mut Vec<(usize, &'a Symbol)>) {
        for e in &self.entries {
            out.push((depth, &e.symbol));
            e.body.collect_occurrences(depth + 1, out);
        }
    }

    /// Γ̂-word of the store.
    pub fn serialize(&self, style: Style) -> Vec<Bracket> {
        let mut out = Vec::new();
        self.write_hat(style, &mut out);
        out
    }

    fn write_hat(&self, style: Style, out: &mut Vec<Bracket>) {
        for e in &self.entries {
            out.push(Bracket::Symbol(e.symbol.clone()));
            let elide = match style {
                Style::Canonical => e.body.level == 0,
                Style::Full => false,
                Style::Short => e.body.is_empty(),
            };
            if !elide {
                out.push(Bracket::Open);
                e.body.write_hat(style, out);
                out.push(Bracket::Close);
            }
        }
    }

    /// Bracket text in the given style; adjacent symbols are separated by a
    /// space.
    pub fn to_text(&self, style: Style) -> String {
        hat_to_text(&self.serialize(style))
    }

    /// Replaces every bound undeterminate leaf by the entries of its binding.
    /// Bindings are applied simultaneously: symbols inside an inserted
    /// binding are not substituted again.
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Term>) -> Result<Term> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            match bindings.get(&e.symbol) {
                Some(h) => {
                    if !e.body.is_empty() {
                        return Err(Error::Graded(format!(
                            "undeterminate `{}` occurs at a non-leaf position",
                            e.symbol
                        )));
                    }
                    if h.level != self.level {
                        return Err(Error::Graded(format!(
                            "`{}` sits in a level-{} store but is bound to a level-{} term",
                            e.symbol, self.level, h.level
                        )));
                    }
                    entries.extend(h.entries.iter().cloned());
                }
                None => entries.push(Entry {
                    symbol: e.symbol.clone(),
                    body: e.body.substitute(bindings)?,
                }),
            }
        }
        Ok(Pushdown {
            level: self.level,
            entries,
        })
    }
}

impl fmt::Display for Pushdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(Style::Canonical))
    }
}

/// Which empty brackets are written out on serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Style {
    /// Omit only the empty bodies of innermost (level-0) stores.
    #[default]
    Canonical,
    /// Write every bracket, including innermost `[]`.
    Full,
    /// Omit every empty body.
    Short,
}

/// A letter of Γ̂ = Γ ∪ {x, x̄}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Bracket {
    Symbol(Symbol),
    Open,
    Close,
}

/// Renders a Γ̂-word with `x` and `x̄` for the brackets and no separators.
pub fn hat_word_string(word: &[Bracket]) -> String {
    word.iter()
        .map(|b| match b {
            Bracket::Symbol(s) => s.as_str(),
            Bracket::Open => "x",
            Bracket::Close => "x̄",
        })
        .collect()
}

fn hat_to_text(word: &[Bracket]) -> String {
    let mut out = String::new();
    let mut prev_symbol = false;
    for b in word {
        match b {
            Bracket::Symbol(s) => {
                if prev_symbol {
                    out.push(' ');
                }
                out.push_str(s.as_str());
                prev_symbol = true;
            }
            Bracket::Open => {
                out.push('[');
                prev_symbol = false;
            }
            Bracket::Close => {
                out.push(']');
                prev_symbol = false;
            }
        }
    }
    out
}

/// Rebuilds a level-`level` store from its Γ̂-word. A symbol not followed by
/// an opening bracket has an empty body, at any level.
pub fn parse_hat(word: &[Bracket], level: usize) -> Result<Pushdown> {
    let mut pos = 0;
    let store = parse_seq(word, &mut pos, level)?;
    if pos != word.len() {
        return Err(Error::parse(pos, "unbalanced closing bracket"));
    }
    Ok(store)
}

fn parse_seq(word: &[Bracket], pos: &mut usize, level: usize) -> Result<Pushdown> {
    let mut entries = Vec::new();
    while *pos < word.len() {
        match &word[*pos] {
            Bracket::Close => break,
            Bracket::Open => {
                return Err(Error::parse(*pos, "opening bracket without a head symbol"))
            }
            Bracket::Symbol(s) => {
                if level == 0 {
                    return Err(Error::parse(
                        *pos,
                        format!("symbol `{s}` nested deeper than the store level"),
                    ));
                }
                *pos += 1;
                let body = if matches!(word.get(*pos), Some(Bracket::Open)) {
                    let open = *pos;
                    *pos += 1;
                    let body = parse_seq(word, pos, level - 1)?;
                    if !matches!(word.get(*pos), Some(Bracket::Close)) {
                        return Err(Error::parse(open, "unclosed bracket"));
                    }
                    *pos += 1;
                    body
                } else {
                    Pushdown::empty(level - 1)
                };
                entries.push(Entry {
                    symbol: s.clone(),
                    body,
                });
            }
        }
    }
    Ok(Pushdown { level, entries })
}

/// Splits bracket text into Γ̂ letters; returns each letter with its byte
/// offset. Identifiers are maximal runs of alphanumerics, `_`, `'` and `′`.
pub fn tokenize(text: &str) -> Result<Vec<(usize, Bracket)>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '[' {
            out.push((i, Bracket::Open));
            chars.next();
        } else if c == ']' {
            out.push((i, Bracket::Close));
            chars.next();
        } else if is_ident_char(c) {
            let start = i;
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if !is_ident_char(d) {
                    break;
                }
                end = j + d.len_utf8();
                chars.next();
            }
            out.push((start, Bracket::Symbol(Symbol::new(&text[start..end]))));
        } else {
            return Err(Error::parse(i, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '′'
}

fn parse_text(text: &str, level: usize) -> Result<Pushdown> {
    let tokens = tokenize(text)?;
    let word: Vec<Bracket> = tokens.iter().map(|(_, b)| b.clone()).collect();
    parse_hat(&word, level).map_err(|e| match e {
        Error::Parse { position, message } => Error::Parse {
            position: tokens.get(position).map_or(text.len(), |(p, _)| *p),
            message,
        },
        other => other,
    })
}

/// A variable `(p, ω, q)` of the grammar associated with an automaton.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    pub from: Symbol,
    pub store: Pushdown,
    pub to: Symbol,
}

impl Variable {
    pub fn new(from: impl Into<Symbol>, store: Pushdown, to: impl Into<Symbol>) -> Result<Self> {
        if store.is_empty() {
            return Err(Error::Domain("a variable needs a non-empty store".into()));
        }
        Ok(Variable {
            from: from.into(),
            store,
            to: to.into(),
        })
    }

    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Term>) -> Result<Variable> {
        Variable::new(
            self.from.clone(),
            self.store.substitute(bindings)?,
            self.to.clone(),
        )
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.from, self.store, self.to)
    }
}

pub type VariableWord = Vec<Variable>;

/// Letterwise extension of [`Pushdown::substitute`].
pub fn substitute_word(w: &[Variable], bindings: &BTreeMap<Symbol, Term>) -> Result<VariableWord> {
    w.iter().map(|v| v.substitute(bindings)).collect()
}

pub fn display_variable_word(w: &[Variable]) -> String {
    w.iter().map(|v| v.to_string()).collect()
}

/// Checks the grading discipline of a store or term: a symbol at depth `d`
/// of a level-`j` store must belong to level `k−j+d` of `gamma` or of
/// `undeterminates`, and undeterminates occur only at leaves. Returns the
/// first violation found, in left-to-right order.
pub fn grading_violation(
    t: &Pushdown,
    gamma: &GradedAlphabet,
    undeterminates: &GradedAlphabet,
) -> Option<String> {
    let k = gamma.height();
    if t.level() > k {
        return Some(format!(
            "level-{} store exceeds the alphabet height {k}",
            t.level()
        ));
    }
    let offset = k - t.level();
    check_grading(t, 1, offset, gamma, undeterminates)
}

fn check_grading(
    t: &Pushdown,
    depth: usize,
    offset: usize,
    gamma: &GradedAlphabet,
    undeterminates: &GradedAlphabet,
) -> Option<String> {
    let expected = offset + depth;
    for e in &t.entries {
        if let Some(l) = undeterminates.level_of(&e.symbol) {
            if !e.body.is_empty() {
                return Some(format!(
                    "undeterminate `{}` occurs at a non-leaf position",
                    e.symbol
                ));
            }
            if l != expected {
                return Some(format!(
                    "undeterminate `{}` of level {l} occurs at level {expected}",
                    e.symbol
                ));
            }
            continue;
        }
        match gamma.level_of(&e.symbol) {
            None => return Some(format!("`{}` is not in the alphabet", e.symbol)),
            Some(l) if l != expected => {
                return Some(format!(
                    "`{}` of level {l} occurs at level {expected}",
                    e.symbol
                ))
            }
            Some(_) => {}
        }
        if let Some(v) = check_grading(&e.body, depth + 1, offset, gamma, undeterminates) {
            return Some(v);
        }
    }
    None
}

pub fn is_graded(t: &Pushdown, gamma: &GradedAlphabet, undeterminates: &GradedAlphabet) -> bool {
    grading_violation(t, gamma, undeterminates).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(text: &str, level: usize) -> Pushdown {
        Pushdown::parse(text, level).unwrap()
    }

    fn sym(s: &str) -> Symbol {
        Symbol::new(s)
    }

    fn omega() -> Pushdown {
        p("A1[A2[A3 C3]B2[D3 C3]]B1[B2[B3 D3]]", 3)
    }

    #[test]
    fn topsyms_examples() {
        assert_eq!(omega().topsyms(), crate::symbol::word("A1 A2 A3"));
        assert!(Pushdown::empty(3).topsyms().is_empty());
        assert_eq!(p("A1[]", 3).topsyms(), vec![sym("A1")]);
    }

    #[test]
    fn pop_and_push_examples() {
        let w = omega();
        assert_eq!(w.pop(1).unwrap().to_string(), "B1[B2[B3 D3]]");
        assert_eq!(w.pop(2).unwrap().to_string(), "A1[B2[D3 C3]]B1[B2[B3 D3]]");
        assert_eq!(
            w.pop(3).unwrap().to_string(),
            "A1[A2[C3]B2[D3 C3]]B1[B2[B3 D3]]"
        );
        let ab = crate::symbol::word("A B");
        assert_eq!(
            w.push(1, &ab).unwrap().to_string(),
            "A[A2[A3 C3]B2[D3 C3]]B[A2[A3 C3]B2[D3 C3]]B1[B2[B3 D3]]"
        );
        assert_eq!(
            w.push(2, &ab).unwrap().to_string(),
            "A1[A[A3 C3]B[A3 C3]B2[D3 C3]]B1[B2[B3 D3]]"
        );
        assert_eq!(
            w.push(3, &ab).unwrap().to_string(),
            "A1[A2[A B C3]B2[D3 C3]]B1[B2[B3 D3]]"
        );
    }

    #[test]
    fn level_range_is_checked() {
        assert!(matches!(
            omega().pop(0),
            Err(Error::LevelOutOfRange { level: 0, max: 3 })
        ));
        assert!(omega().pop(4).is_err());
        assert!(omega().push(4, &[sym("A")]).is_err());
        assert!(omega().push(1, &[]).is_err());
    }

    #[test]
    fn operations_on_empty_leftmost_store_are_identity() {
        let s = p("A1[]B1[B2[B3]]", 3);
        assert_eq!(s.pop(2).unwrap(), s);
        assert_eq!(s.pop(3).unwrap(), s);
        assert_eq!(s.push(3, &[sym("X")]).unwrap(), s);
        let e = Pushdown::empty(2);
        assert_eq!(e.pop(1).unwrap(), e);
        assert_eq!(e.push(1, &[sym("X")]).unwrap(), e);
    }

    #[test]
    fn serialization_examples() {
        assert_eq!(
            hat_word_string(&omega().serialize(Style::Canonical)),
            "A1xA2xA3C3x̄B2xD3C3x̄x̄B1xB2xB3D3x̄x̄"
        );
        assert!(Pushdown::empty(3).serialize(Style::Canonical).is_empty());
        assert_eq!(p("A1[]", 3).to_text(Style::Canonical), "A1[]");
        assert_eq!(p("A1[]", 3).to_text(Style::Short), "A1");
        assert_eq!(p("A[B]", 2).to_text(Style::Full), "A[B[]]");
    }

    #[test]
    fn parse_errors_carry_positions() {
        match Pushdown::parse("A1[A2[A3]", 3) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Pushdown::parse("A]", 1),
            Err(Error::Parse { position: 1, .. })
        ));
        assert!(Pushdown::parse("A[B[C[D]]]", 2).is_err());
        assert!(Pushdown::parse("[A]", 2).is_err());
        assert!(Pushdown::parse("A $", 1).is_err());
    }

    #[test]
    fn innermost_brackets_accepted_on_parse() {
        assert_eq!(p("A[B[] C[]]", 2), p("A[B C]", 2));
        assert!(Pushdown::parse("A[B[x]]", 2).is_err());
    }

    fn graded() -> (GradedAlphabet, GradedAlphabet) {
        let gamma =
            GradedAlphabet::parse_levels(&["A1 B1 C1 D1", "A2 B2 C2 D2", "A3 B3 C3 D3"]).unwrap();
        let u = GradedAlphabet::parse_levels(&["Ω1 Ω′1", "Ω2 Ω′2", "Ω3 Ω′3"]).unwrap();
        (gamma, u)
    }

    #[test]
    fn gradedness_verdicts() {
        let (g, u) = graded();
        let cases = [
            ("A1[A2[A3 Ω3]B2[D3 C3]]Ω1", 3, true),
            ("A1[A1[A3]]", 3, false),
            ("A2[A3 B3 Ω3]Ω2", 2, true),
            ("A3 B3 Ω3", 1, true),
            ("A1[Ω2[A3 Ω3]]", 3, false),
            ("A1[A2[A3 Ω2]]", 3, false),
            ("A1[A2[]B2[]]", 3, true),
        ];
        for (text, level, expected) in cases {
            assert_eq!(is_graded(&p(text, level), &g, &u), expected, "{text}");
        }
        let v = grading_violation(&p("A1[Ω2[A3 Ω3]]", 3), &g, &u).unwrap();
        assert!(v.contains("non-leaf"), "{v}");
        let v = grading_violation(&p("A1[A1[A3]]", 3), &g, &u).unwrap();
        assert!(v.contains("occurs at level 2"), "{v}");
    }

    fn bindings() -> BTreeMap<Symbol, Term> {
        let mut b = BTreeMap::new();
        b.insert(sym("Ω1"), p("B1[B2[Ω3]]", 3));
        b.insert(sym("Ω2"), p("C2[A3 B3 Ω′3]", 2));
        b.insert(sym("Ω3"), p("C3 C3 C3 Ω3", 1));
        b
    }

    #[test]
    fn substitution_example() {
        let t = p("A1[A2[A3 Ω3]B2[D3 C3]]Ω1", 3);
        let r = t.substitute(&bindings()).unwrap();
        assert_eq!(r.to_string(), "A1[A2[A3 C3 C3 C3 Ω3]B2[D3 C3]]B1[B2[Ω3]]");
        assert_eq!(t.substitute(&BTreeMap::new()).unwrap(), t);

        let w = vec![
            Variable::new("p", t, "q").unwrap(),
            Variable::new("q", p("A1[Ω2]", 3), "p").unwrap(),
        ];
        let r = substitute_word(&w, &bindings()).unwrap();
        assert_eq!(
            display_variable_word(&r),
            "(p,A1[A2[A3 C3 C3 C3 Ω3]B2[D3 C3]]B1[B2[Ω3]],q)(q,A1[C2[A3 B3 Ω′3]],p)"
        );
    }

    #[test]
    fn substitution_rejects_level_mismatch_and_inner_undeterminates() {
        let mut b = BTreeMap::new();
        b.insert(sym("Ω1"), p("C3", 1));
        assert!(matches!(
            p("A1 Ω1", 3).substitute(&b),
            Err(Error::Graded(_))
        ));
        let mut b = BTreeMap::new();
        b.insert(sym("Ω2"), p("C2", 2));
        assert!(p("A1[Ω2[A3]]", 3).substitute(&b).is_err());
    }

    #[test]
    fn variables_need_nonempty_stores() {
        assert!(Variable::new("p", Pushdown::empty(2), "q").is_err());
    }

    // Random stores over a small alphabet, levels 1..=3.
    fn arb_store(level: usize) -> BoxedStrategy<Pushdown> {
        let syms = prop::sample::select(vec!["A", "B", "C", "Z9"]);
        if level == 0 {
            return Just(Pushdown::empty(0)).boxed();
        }
        prop::collection::vec((syms, arb_store(level - 1)), 0..3)
            .prop_map(move |es| {
                Pushdown::new(
                    level,
                    es.into_iter()
                        .map(|(s, body)| Entry {
                            symbol: Symbol::new(s),
                            body,
                        })
                        .collect(),
                )
                .unwrap()
            })
            .boxed()
    }

    fn arb_leveled() -> impl Strategy<Value = Pushdown> {
        (1usize..=3).prop_flat_map(arb_store)
    }

    proptest! {
        #[test]
        fn parse_serialize_round_trip(s in arb_leveled()) {
            for style in [Style::Canonical, Style::Full, Style::Short] {
                prop_assert_eq!(&parse_hat(&s.serialize(style), s.level()).unwrap(), &s);
                prop_assert_eq!(&Pushdown::parse(&s.to_text(style), s.level()).unwrap(), &s);
            }
        }

        #[test]
        fn push_single_then_pop_is_identity(s in arb_leveled(), g in prop::sample::select(vec!["A", "Q"])) {
            prop_assume!(!s.is_empty());
            let pushed = s.push(1, &[Symbol::new(g)]).unwrap();
            prop_assert_eq!(pushed.len(), s.len());
            // The head symbol changes, so compare bodies and tails.
            prop_assert_eq!(&pushed.entries()[0].body, &s.entries()[0].body);
            prop_assert_eq!(&pushed.pop(1).unwrap(), &s.pop(1).unwrap());
            let repushed = s.push(1, &[s.entries()[0].symbol.clone()]).unwrap();
            prop_assert_eq!(repushed, s);
        }

        #[test]
        fn operations_keep_levels(s in arb_leveled(), j in 1usize..=3) {
            prop_assume!(j <= s.level());
            let popped = s.pop(j).unwrap();
            let pushed = s.push(j, &[Symbol::new("A"), Symbol::new("B")]).unwrap();
            for out in [popped, pushed] {
                prop_assert_eq!(out.level(), s.level());
                prop_assert!(Pushdown::new(out.level(), out.entries().to_vec()).is_ok());
            }
        }

        #[test]
        fn substitution_distributes_over_variable_words(a in arb_store(2), b in arb_store(2)) {
            prop_assume!(!a.is_empty() && !b.is_empty());
            let mut bind = BTreeMap::new();
            bind.insert(Symbol::new("C"), Pushdown::parse("Z9 Z9", 1).unwrap());
            let va = Variable::new("p", a, "q").unwrap();
            let vb = Variable::new("q", b, "p").unwrap();
            let whole = substitute_word(&[va.clone(), vb.clone()], &bind);
            let parts: Result<Vec<_>> = [va, vb].iter().map(|v| v.substitute(&bind)).collect();
            prop_assert_eq!(whole.ok(), parts.ok());
        }
    }

    #[test]
    fn graded_store_stays_graded_under_operations() {
        let (g, u) = graded();
        let w = p("A1[A2[A3 C3]B2[D3 C3]]B1[B2[B3 D3]]", 3);
        assert!(is_graded(&w, &g, &u));
        for j in 1..=3 {
            assert!(is_graded(&w.pop(j).unwrap(), &g, &u));
        }
        assert!(is_graded(
            &w.push(1, &crate::symbol::word("C1 D1")).unwrap(),
            &g,
            &u
        ));
        assert!(is_graded(
            &w.push(2, &crate::symbol::word("C2 D2")).unwrap(),
            &g,
            &u
        ));
        assert!(is_graded(
            &w.push(3, &crate::symbol::word("B3")).unwrap(),
            &g,
            &u
        ));
    }
}
