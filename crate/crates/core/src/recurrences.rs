//! Evaluators for systems of recurrent relations.
//!
//! Every system is a family `f_i : A* → M` indexed by a finite set `I`,
//! given by its values on the empty word and one rule per `(i, a)` that
//! expresses `f_i(aw)` in terms of the family on `w`:
//!
//! * catenative: `f_i(aw) = f_{α₁}(w) ⋯ f_{αℓ}(w)` in a free monoid;
//! * compositional: the same shape in the monoid of endomorphisms of `C*`,
//!   the product being composition with the leftmost factor applied first;
//! * regular: the rule also depends on the class of `w` under a finite
//!   congruence and may prepend shift words, `f_{α_j}(u_j w)`;
//! * polynomial: `f_i(aw) = P_{i,a}(f_1(w), …, f_n(w))` over ℕ or ℤ.

use crate::error::{Error, Result};
use crate::morphisms::Homomorphism;
use crate::poly::Polynomial;
use crate::symbol::{Alphabet, Symbol, Word};
use num_bigint::BigInt;
use num_traits::Signed;
use std::collections::BTreeMap;
use std::fmt;

/// The `(i, a) ↦ α(i,a,1) ⋯ α(i,a,ℓ)` part shared by catenative and
/// compositional systems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTable {
    indices: Alphabet,
    input: Alphabet,
    rules: Vec<Vec<Vec<usize>>>,
}

impl RuleTable {
    /// `rules` must be total on `indices × input`.
    pub fn new(
        indices: Alphabet,
        input: Alphabet,
        rules: &BTreeMap<(Symbol, Symbol), Word>,
    ) -> Result<Self> {
        let mut table = vec![vec![None; input.len()]; indices.len()];
        for ((i, a), rhs) in rules {
            let ii = indices
                .index_of(i)
                .ok_or_else(|| Error::UnknownIndex(i.clone()))?;
            let ai = input.position(a)?;
            let rhs = rhs
                .iter()
                .map(|s| {
                    indices
                        .index_of(s)
                        .ok_or_else(|| Error::UnknownIndex(s.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            table[ii][ai] = Some(rhs);
        }
        let mut rules = Vec::with_capacity(indices.len());
        for (ii, row) in table.into_iter().enumerate() {
            let mut out = Vec::with_capacity(input.len());
            for (ai, rhs) in row.into_iter().enumerate() {
                out.push(rhs.ok_or_else(|| {
                    Error::InvalidSystem(format!(
                        "no rule for {}({} w)",
                        indices.get(ii),
                        input.get(ai)
                    ))
                })?);
            }
            rules.push(out);
        }
        Ok(RuleTable {
            indices,
            input,
            rules,
        })
    }

    pub fn indices(&self) -> &Alphabet {
        &self.indices
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn rhs(&self, i: usize, a: usize) -> &[usize] {
        &self.rules[i][a]
    }

    /// The right-hand side of `f_i(a w)` as a word of indices.
    pub fn rule(&self, i: &Symbol, a: &Symbol) -> Result<Word> {
        let ii = self.index(i)?;
        let ai = self.input.position(a)?;
        Ok(self.rules[ii][ai]
            .iter()
            .map(|&j| self.indices.get(j).clone())
            .collect())
    }

    pub fn index(&self, i: &Symbol) -> Result<usize> {
        self.indices
            .index_of(i)
            .ok_or_else(|| Error::UnknownIndex(i.clone()))
    }

    pub fn max_rule_len(&self) -> usize {
        self.rules.iter().flatten().map(Vec::len).max().unwrap_or(0)
    }

    /// All rules as a map, for printing and rebuilding.
    pub fn to_map(&self) -> BTreeMap<(Symbol, Symbol), Word> {
        let mut out = BTreeMap::new();
        for (i, row) in self.rules.iter().enumerate() {
            for (a, rhs) in row.iter().enumerate() {
                out.insert(
                    (self.indices.get(i).clone(), self.input.get(a).clone()),
                    rhs.iter().map(|&j| self.indices.get(j).clone()).collect(),
                );
            }
        }
        out
    }
}

/// Word-valued catenative recurrences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatenativeSystem {
    table: RuleTable,
    output: Alphabet,
    base: Vec<Word>,
}

impl CatenativeSystem {
    pub fn new(table: RuleTable, output: Alphabet, base: BTreeMap<Symbol, Word>) -> Result<Self> {
        let base = base_vector(table.indices(), base, |w: &Word| {
            match w.iter().find(|s| !output.contains(s)) {
                Some(bad) => Err(Error::UnknownLetter(bad.clone())),
                None => Ok(()),
            }
        })?;
        Ok(CatenativeSystem {
            table,
            output,
            base,
        })
    }

    pub fn table(&self) -> &RuleTable {
        &self.table
    }

    pub fn indices(&self) -> &Alphabet {
        self.table.indices()
    }

    pub fn input(&self) -> &Alphabet {
        self.table.input()
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn base(&self, i: &Symbol) -> Result<&Word> {
        Ok(&self.base[self.table.index(i)?])
    }

    pub fn base_values(&self) -> &[Word] {
        &self.base
    }

    /// Values of every index on `w`, evaluated suffix by suffix.
    pub fn eval_all(&self, w: &[Symbol]) -> Result<Vec<Word>> {
        let letters = self.input().encode(w)?;
        let mut values = self.base.clone();
        for &a in letters.iter().rev() {
            values = (0..values.len())
                .map(|i| {
                    self.table
                        .rhs(i, a)
                        .iter()
                        .flat_map(|&j| values[j].iter().cloned())
                        .collect()
                })
                .collect();
        }
        Ok(values)
    }

    pub fn eval(&self, i: &Symbol, w: &[Symbol]) -> Result<Word> {
        let idx = self.table.index(i)?;
        Ok(self.eval_all(w)?.swap_remove(idx))
    }

    /// Output lengths of every index on `w`, without building the words.
    pub fn eval_lengths(&self, w: &[Symbol]) -> Result<Vec<BigInt>> {
        let letters = self.input().encode(w)?;
        let mut values: Vec<BigInt> = self.base.iter().map(|b| BigInt::from(b.len())).collect();
        for &a in letters.iter().rev() {
            values = (0..values.len())
                .map(|i| self.table.rhs(i, a).iter().map(|&j| &values[j]).sum())
                .collect();
        }
        Ok(values)
    }
}

/// Homomorphism-valued recurrences over a working alphabet `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionalSystem {
    table: RuleTable,
    working: Alphabet,
    base: Vec<Homomorphism>,
}

impl CompositionalSystem {
    pub fn new(
        table: RuleTable,
        working: Alphabet,
        base: BTreeMap<Symbol, Homomorphism>,
    ) -> Result<Self> {
        let base = base_vector(table.indices(), base, |h: &Homomorphism| {
            if h.source() != &working || h.target() != &working {
                Err(Error::AlphabetMismatch(format!(
                    "base value {h} is not an endomorphism of {working}"
                )))
            } else {
                Ok(())
            }
        })?;
        Ok(CompositionalSystem {
            table,
            working,
            base,
        })
    }

    pub fn table(&self) -> &RuleTable {
        &self.table
    }

    pub fn indices(&self) -> &Alphabet {
        self.table.indices()
    }

    pub fn input(&self) -> &Alphabet {
        self.table.input()
    }

    pub fn working(&self) -> &Alphabet {
        &self.working
    }

    pub fn base(&self, i: &Symbol) -> Result<&Homomorphism> {
        Ok(&self.base[self.table.index(i)?])
    }

    pub fn base_values(&self) -> &[Homomorphism] {
        &self.base
    }

    pub fn eval_all(&self, w: &[Symbol]) -> Result<Vec<Homomorphism>> {
        let letters = self.input().encode(w)?;
        let mut values = self.base.clone();
        for &a in letters.iter().rev() {
            values = (0..values.len())
                .map(|i| {
                    Homomorphism::compose_all(
                        &self.working,
                        self.table.rhs(i, a).iter().map(|&j| &values[j]),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
        }
        Ok(values)
    }

    pub fn eval(&self, i: &Symbol, w: &[Symbol]) -> Result<Homomorphism> {
        let idx = self.table.index(i)?;
        Ok(self.eval_all(w)?.swap_remove(idx))
    }

    /// `h(H_i(w)(c))`.
    pub fn eval_level3(
        &self,
        i: &Symbol,
        w: &[Symbol],
        final_map: &Homomorphism,
        seed: &Symbol,
    ) -> Result<Word> {
        if final_map.source() != &self.working {
            return Err(Error::AlphabetMismatch(
                "final homomorphism must start from the working alphabet".into(),
            ));
        }
        let h = self.eval(i, w)?;
        final_map.apply(&h.apply(std::slice::from_ref(seed))?)
    }
}

fn base_vector<T: Clone>(
    indices: &Alphabet,
    mut base: BTreeMap<Symbol, T>,
    check: impl Fn(&T) -> Result<()>,
) -> Result<Vec<T>> {
    if let Some(extra) = base.keys().find(|k| !indices.contains(k)) {
        return Err(Error::UnknownIndex(extra.clone()));
    }
    indices
        .iter()
        .map(|i| {
            let v = base
                .remove(i)
                .ok_or_else(|| Error::InvalidSystem(format!("no base value for {i}(eps)")))?;
            check(&v)?;
            Ok(v)
        })
        .collect()
}

/// A complete deterministic automaton over `A*` whose states are the
/// classes of a finite-index congruence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classifier {
    classes: Alphabet,
    input: Alphabet,
    start: usize,
    delta: Vec<Vec<usize>>,
}

impl Classifier {
    pub fn new(
        classes: Alphabet,
        input: Alphabet,
        start: &Symbol,
        transitions: &BTreeMap<(Symbol, Symbol), Symbol>,
    ) -> Result<Self> {
        let start = classes.position(start)?;
        let mut delta = vec![vec![None; input.len()]; classes.len()];
        for ((from, a), to) in transitions {
            delta[classes.position(from)?][input.position(a)?] = Some(classes.position(to)?);
        }
        let delta = delta
            .into_iter()
            .enumerate()
            .map(|(c, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(a, t)| {
                        t.ok_or_else(|| {
                            Error::InvalidSystem(format!(
                                "classifier has no move from {} on {}",
                                classes.get(c),
                                input.get(a)
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Classifier {
            classes,
            input,
            start,
            delta,
        })
    }

    /// The one-class congruence.
    pub fn trivial(input: &Alphabet) -> Self {
        Classifier {
            classes: Alphabet::new(["all"]).expect("one class"),
            input: input.clone(),
            start: 0,
            delta: vec![vec![0; input.len()]],
        }
    }

    pub fn classes(&self) -> &Alphabet {
        &self.classes
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn start(&self) -> &Symbol {
        self.classes.get(self.start)
    }

    pub fn next(&self, class: usize, letter: usize) -> usize {
        self.delta[class][letter]
    }

    fn classify_encoded(&self, w: &[usize]) -> usize {
        w.iter().fold(self.start, |c, &a| self.delta[c][a])
    }

    pub fn classify(&self, w: &[Symbol]) -> Result<&Symbol> {
        let enc = self.input.encode(w)?;
        Ok(self.classes.get(self.classify_encoded(&enc)))
    }
}

/// One factor `f_j(u w)` of a regular rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub index: Symbol,
    pub shift: Word,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<&str> = self.shift.iter().map(Symbol::as_str).collect();
        parts.push("w");
        write!(f, "{}({})", self.index, parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct EncodedFactor {
    index: usize,
    shift: Vec<usize>,
}

/// Word-valued regular recurrences; the rule for `f_i(aw)` is selected by
/// the class of the tail `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularSystem {
    indices: Alphabet,
    output: Alphabet,
    classifier: Classifier,
    rules: Vec<Vec<Vec<Vec<EncodedFactor>>>>,
    base: Vec<Word>,
}

/// Result of a fuel-bounded regular evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegularOutcome {
    Value(Word),
    FuelExhausted { steps: u64 },
}

impl RegularSystem {
    /// `rules` is keyed by `(index, letter, class)` and must be total.
    pub fn new(
        indices: Alphabet,
        output: Alphabet,
        classifier: Classifier,
        rules: &BTreeMap<(Symbol, Symbol, Symbol), Vec<Factor>>,
        base: BTreeMap<Symbol, Word>,
    ) -> Result<Self> {
        let input = classifier.input().clone();
        let classes = classifier.classes().clone();
        let mut table = vec![vec![vec![None; classes.len()]; input.len()]; indices.len()];
        for ((i, a, d), rhs) in rules {
            let ii = indices
                .index_of(i)
                .ok_or_else(|| Error::UnknownIndex(i.clone()))?;
            let ai = input.position(a)?;
            let di = classes.position(d)?;
            let rhs = rhs
                .iter()
                .map(|f| {
                    Ok(EncodedFactor {
                        index: indices
                            .index_of(&f.index)
                            .ok_or_else(|| Error::UnknownIndex(f.index.clone()))?,
                        shift: input.encode(&f.shift)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            table[ii][ai][di] = Some(rhs);
        }
        let mut rules_out = Vec::new();
        for (ii, by_letter) in table.into_iter().enumerate() {
            let mut row = Vec::new();
            for (ai, by_class) in by_letter.into_iter().enumerate() {
                let mut cell = Vec::new();
                for (di, rhs) in by_class.into_iter().enumerate() {
                    cell.push(rhs.ok_or_else(|| {
                        Error::InvalidSystem(format!(
                            "no rule for {}({} w) with w in class {}",
                            indices.get(ii),
                            input.get(ai),
                            classes.get(di)
                        ))
                    })?);
                }
                row.push(cell);
            }
            rules_out.push(row);
        }
        let base = base_vector(&indices, base, |w: &Word| {
            match w.iter().find(|s| !output.contains(s)) {
                Some(bad) => Err(Error::UnknownLetter(bad.clone())),
                None => Ok(()),
            }
        })?;
        Ok(RegularSystem {
            indices,
            output,
            classifier,
            rules: rules_out,
            base,
        })
    }

    /// The same recurrences seen as a one-class, shift-free regular system.
    pub fn from_catenative(sys: &CatenativeSystem) -> Self {
        let classifier = Classifier::trivial(sys.input());
        let rules = (0..sys.indices().len())
            .map(|i| {
                (0..sys.input().len())
                    .map(|a| {
                        vec![sys
                            .table()
                            .rhs(i, a)
                            .iter()
                            .map(|&j| EncodedFactor {
                                index: j,
                                shift: Vec::new(),
                            })
                            .collect()]
                    })
                    .collect()
            })
            .collect();
        RegularSystem {
            indices: sys.indices().clone(),
            output: sys.output().clone(),
            classifier,
            rules,
            base: sys.base_values().to_vec(),
        }
    }

    pub fn indices(&self) -> &Alphabet {
        &self.indices
    }

    pub fn input(&self) -> &Alphabet {
        self.classifier.input()
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }

    pub fn base(&self, i: &Symbol) -> Result<&Word> {
        let ii = self.index(i)?;
        Ok(&self.base[ii])
    }

    fn index(&self, i: &Symbol) -> Result<usize> {
        self.indices
            .index_of(i)
            .ok_or_else(|| Error::UnknownIndex(i.clone()))
    }

    /// The rule for `(i, a, class)`.
    pub fn rule(&self, i: &Symbol, a: &Symbol, class: &Symbol) -> Result<Vec<Factor>> {
        let ii = self.index(i)?;
        let ai = self.input().position(a)?;
        let di = self.classifier.classes().position(class)?;
        Ok(self.rules[ii][ai][di]
            .iter()
            .map(|f| Factor {
                index: self.indices.get(f.index).clone(),
                shift: f
                    .shift
                    .iter()
                    .map(|&s| self.input().get(s).clone())
                    .collect(),
            })
            .collect())
    }

    /// True when every shift word is empty.
    pub fn is_strict(&self) -> bool {
        self.rules
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .all(|f| f.shift.is_empty())
    }

    /// Rewrites `f_i(w)` leftmost-first until only base cases remain. Each
    /// application of a recurrence rule costs one unit of fuel.
    pub fn eval(&self, i: &Symbol, w: &[Symbol], fuel: u64) -> Result<RegularOutcome> {
        let ii = self.index(i)?;
        let word = self.input().encode(w)?;
        let mut output = Vec::new();
        let mut pending: Vec<(usize, Vec<usize>)> = vec![(ii, word)];
        let mut steps = 0u64;
        while let Some((idx, arg)) = pending.pop() {
            let Some((&a, tail)) = arg.split_first() else {
                output.extend(self.base[idx].iter().cloned());
                continue;
            };
            if steps >= fuel {
                return Ok(RegularOutcome::FuelExhausted { steps });
            }
            steps += 1;
            let class = self.classifier.classify_encoded(tail);
            for f in self.rules[idx][a][class].iter().rev() {
                let mut next = f.shift.clone();
                next.extend_from_slice(tail);
                pending.push((f.index, next));
            }
        }
        Ok(RegularOutcome::Value(output))
    }
}

/// Coefficient ring of a polynomial system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Ring {
    #[default]
    Natural,
    Integer,
}

/// `f_i(aw) = P_{i,a}(f_1(w), …, f_n(w))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialSystem {
    indices: Alphabet,
    input: Alphabet,
    ring: Ring,
    rules: Vec<Vec<Polynomial>>,
    base: Vec<BigInt>,
}

impl PolynomialSystem {
    /// Variable `k` of each polynomial stands for the `k`-th index.
    pub fn new(
        indices: Alphabet,
        input: Alphabet,
        ring: Ring,
        rules: &BTreeMap<(Symbol, Symbol), Polynomial>,
        base: BTreeMap<Symbol, BigInt>,
    ) -> Result<Self> {
        let n = indices.len();
        let mut table = vec![vec![None; input.len()]; n];
        for ((i, a), p) in rules {
            let ii = indices
                .index_of(i)
                .ok_or_else(|| Error::UnknownIndex(i.clone()))?;
            let ai = input.position(a)?;
            if p.nvars() > n {
                return Err(Error::InvalidSystem(format!(
                    "rule for {i}({a} w) uses more than {n} variables"
                )));
            }
            if !p.has_integer_coefficients() {
                return Err(Error::InvalidSystem(format!(
                    "rule for {i}({a} w) has non-integer coefficients"
                )));
            }
            if ring == Ring::Natural && !p.has_nonnegative_coefficients() {
                return Err(Error::InvalidSystem(format!(
                    "rule for {i}({a} w) has negative coefficients over ℕ"
                )));
            }
            table[ii][ai] = Some(p.extend(n));
        }
        let rules = table
            .into_iter()
            .enumerate()
            .map(|(ii, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(ai, p)| {
                        p.ok_or_else(|| {
                            Error::InvalidSystem(format!(
                                "no rule for {}({} w)",
                                indices.get(ii),
                                input.get(ai)
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let base = base_vector(&indices, base, |v: &BigInt| {
            if ring == Ring::Natural && v.is_negative() {
                Err(Error::InvalidSystem("negative base value over ℕ".into()))
            } else {
                Ok(())
            }
        })?;
        Ok(PolynomialSystem {
            indices,
            input,
            ring,
            rules,
            base,
        })
    }

    pub fn indices(&self) -> &Alphabet {
        &self.indices
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn dimension(&self) -> usize {
        self.indices.len()
    }

    pub fn base_values(&self) -> &[BigInt] {
        &self.base
    }

    pub fn index(&self, i: &Symbol) -> Result<usize> {
        self.indices
            .index_of(i)
            .ok_or_else(|| Error::UnknownIndex(i.clone()))
    }

    pub fn rule(&self, i: &Symbol, a: &Symbol) -> Result<&Polynomial> {
        Ok(&self.rules[self.index(i)?][self.input.position(a)?])
    }

    /// The update map `φ_a = (P_{1,a}, …, P_{n,a})`.
    pub fn update_map(&self, a: usize) -> Vec<Polynomial> {
        self.rules.iter().map(|row| row[a].clone()).collect()
    }

    /// Applies `φ_a` to a value vector.
    pub fn step(&self, a: usize, values: &[BigInt]) -> Vec<BigInt> {
        self.rules
            .iter()
            .map(|row| row[a].eval_int(values).expect("integer coefficients"))
            .collect()
    }

    pub fn eval_all(&self, w: &[Symbol]) -> Result<Vec<BigInt>> {
        let letters = self.input.encode(w)?;
        let mut values = self.base.clone();
        for &a in letters.iter().rev() {
            values = self.step(a, &values);
        }
        Ok(values)
    }

    pub fn eval(&self, i: &Symbol, w: &[Symbol]) -> Result<BigInt> {
        let idx = self.index(i)?;
        Ok(self.eval_all(w)?.swap_remove(idx))
    }

    /// True when every rule has total degree at most one.
    pub fn is_linear(&self) -> bool {
        self.rules.iter().flatten().all(|p| p.total_degree() <= 1)
    }

    pub fn max_degree(&self) -> u32 {
        self.rules
            .iter()
            .flatten()
            .map(Polynomial::total_degree)
            .max()
            .unwrap_or(0)
    }
}
