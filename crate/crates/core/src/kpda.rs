//! Pushdown automata of level `k` over iterated pushdown stores.
//!
//! Transitions are keyed by `(state, b̄, topsyms)` where `b̄` is a terminal
//! or ε. In generation mode a transition labelled `b` emits `b`; in
//! recognition mode it consumes `b` from the remaining input.

use crate::error::{Error, Result};
use crate::pushdown::{GradedAlphabet, Pushdown, Variable};
use crate::symbol::{display_word, word, Alphabet, Symbol, Word};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

/// Default step budget for runs.
pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operation {
    Pop(usize),
    Push(usize, Word),
}

impl Operation {
    pub fn level(&self) -> usize {
        match self {
            Operation::Pop(j) | Operation::Push(j, _) => *j,
        }
    }

    pub fn apply(&self, store: &Pushdown) -> Result<Pushdown> {
        match self {
            Operation::Pop(j) => store.pop(*j),
            Operation::Push(j, h) => store.push(*j, h),
        }
    }

    /// Parses `pop_j` or `push_j(h)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |m: &str| Error::parse(0, format!("{m} in operation `{text}`"));
        let level = |digits: &str| -> Result<usize> {
            digits.trim().parse::<usize>().map_err(|_| bad("bad level"))
        };
        if let Some(rest) = text.strip_prefix("pop_") {
            return Ok(Operation::Pop(level(rest)?));
        }
        if let Some(rest) = text.strip_prefix("push_") {
            let open = rest.find('(').ok_or_else(|| bad("missing `(`"))?;
            let body = rest[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| bad("missing `)`"))?;
            let h = word(body);
            if h.is_empty() {
                return Err(bad("empty push word"));
            }
            return Ok(Operation::Push(level(&rest[..open])?, h));
        }
        Err(bad("unknown operation"))
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Pop(j) => write!(f, "pop_{j}"),
            Operation::Push(j, h) => {
                let parts: Vec<&str> = h.iter().map(Symbol::as_str).collect();
                write!(f, "push_{j}({})", parts.join(" "))
            }
        }
    }
}

/// One entry `(to, op) ∈ δ(from, read, top)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: Symbol,
    pub read: Option<Symbol>,
    pub top: Word,
    pub to: Symbol,
    pub op: Operation,
}

impl Transition {
    /// Parses `q , b , γ -> q' , op`, with `eps` for an ε label.
    pub fn parse(line: &str) -> Result<Self> {
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| Error::parse(0, format!("missing `->` in `{line}`")))?;
        let lhs: Vec<&str> = lhs.split(',').map(str::trim).collect();
        let (to, op) = rhs.split_once(',').ok_or_else(|| {
            Error::parse(0, format!("missing `,` after target state in `{line}`"))
        })?;
        if lhs.len() != 3 || lhs.iter().any(|s| s.is_empty()) {
            return Err(Error::parse(0, format!("expected `q , b , γ` in `{line}`")));
        }
        let read = match lhs[1] {
            "eps" | "ε" => None,
            b => Some(Symbol::new(b)),
        };
        Ok(Transition {
            from: Symbol::new(lhs[0]),
            read,
            top: word(lhs[2]),
            to: Symbol::new(to.trim()),
            op: Operation::parse(op)?,
        })
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let read = self.read.as_ref().map_or("eps", Symbol::as_str);
        let top: Vec<&str> = self.top.iter().map(Symbol::as_str).collect();
        write!(
            f,
            "{} , {} , {} -> {} , {}",
            self.from,
            read,
            top.join(" "),
            self.to,
            self.op
        )
    }
}

type Key = (Symbol, Option<Symbol>, Word);

type TopCounts<'a> = BTreeMap<(&'a Symbol, &'a Word), (usize, BTreeMap<&'a Symbol, usize>)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KPda {
    level: usize,
    states: Alphabet,
    terminals: Alphabet,
    gamma: GradedAlphabet,
    initial_state: Symbol,
    bottoms: Word,
    delta: BTreeMap<Key, Vec<(Symbol, Operation)>>,
}

/// Outcome of the normal-form checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalFormReport {
    pub level_partitioned: bool,
    pub reading_pops: bool,
    pub binary_pushes: bool,
    pub violations: Vec<String>,
}

impl NormalFormReport {
    pub fn is_normal(&self) -> bool {
        self.level_partitioned && self.reading_pops && self.binary_pushes
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub state: Symbol,
    /// Emitted output in generation mode, remaining input in recognition mode.
    pub word: Word,
    pub store: Pushdown,
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.state,
            display_word(&self.word),
            self.store
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Generation,
    Recognition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Accepted(Word),
    Stuck(Configuration),
    FuelExhausted(Configuration),
}

impl KPda {
    /// `bottoms` are the designated `γ_1 … γ_{k−1}` wrapping the input.
    pub fn new(
        level: usize,
        states: Alphabet,
        terminals: Alphabet,
        gamma: GradedAlphabet,
        initial_state: Symbol,
        bottoms: Word,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidSystem("level must be at least 1".into()));
        }
        if gamma.height() != level {
            return Err(Error::InvalidSystem(format!(
                "pushdown alphabet has {} levels, machine has level {level}",
                gamma.height()
            )));
        }
        states.position(&initial_state)?;
        if bottoms.len() != level - 1 {
            return Err(Error::InvalidSystem(format!(
                "expected {} bottom symbols, got {}",
                level - 1,
                bottoms.len()
            )));
        }
        for (i, b) in bottoms.iter().enumerate() {
            if !gamma.level(i + 1).contains(b) {
                return Err(Error::InvalidSystem(format!(
                    "bottom symbol {b} is not in level {}",
                    i + 1
                )));
            }
        }
        let mut delta: BTreeMap<Key, Vec<(Symbol, Operation)>> = BTreeMap::new();
        for t in transitions {
            states.position(&t.from)?;
            states.position(&t.to)?;
            if let Some(b) = &t.read {
                terminals.position(b)?;
            }
            if t.top.is_empty() || t.top.len() > level {
                return Err(Error::InvalidSystem(format!(
                    "top word of `{t}` must have length 1..={level}"
                )));
            }
            if let Some(s) = t.top.iter().find(|s| !gamma.contains(s)) {
                return Err(Error::UnknownLetter(s.clone()));
            }
            if t.op.level() == 0 || t.op.level() > level {
                return Err(Error::LevelOutOfRange {
                    level: t.op.level(),
                    max: level,
                });
            }
            if let Operation::Push(_, h) = &t.op {
                if let Some(s) = h.iter().find(|s| !gamma.contains(s)) {
                    return Err(Error::UnknownLetter(s.clone()));
                }
            }
            let entry = delta.entry((t.from, t.read, t.top)).or_default();
            if !entry.contains(&(t.to.clone(), t.op.clone())) {
                entry.push((t.to, t.op));
            }
        }
        Ok(KPda {
            level,
            states,
            terminals,
            gamma,
            initial_state,
            bottoms,
            delta,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn states(&self) -> &Alphabet {
        &self.states
    }

    pub fn terminals(&self) -> &Alphabet {
        &self.terminals
    }

    pub fn gamma(&self) -> &GradedAlphabet {
        &self.gamma
    }

    pub fn initial_state(&self) -> &Symbol {
        &self.initial_state
    }

    pub fn bottoms(&self) -> &[Symbol] {
        &self.bottoms
    }

    pub fn transitions(&self) -> Vec<Transition> {
        self.delta
            .iter()
            .flat_map(|((from, read, top), targets)| {
                targets.iter().map(move |(to, op)| Transition {
                    from: from.clone(),
                    read: read.clone(),
                    top: top.clone(),
                    to: to.clone(),
                    op: op.clone(),
                })
            })
            .collect()
    }

    fn targets(&self, q: &Symbol, read: Option<&Symbol>, top: &[Symbol]) -> &[(Symbol, Operation)] {
        self.delta
            .get(&(q.clone(), read.cloned(), top.to_vec()))
            .map_or(&[], Vec::as_slice)
    }

    /// Groups the table by `(state, top)` into `(ε entries, per-letter entries)`.
    fn by_state_and_top(&self) -> TopCounts<'_> {
        let mut out: TopCounts<'_> = BTreeMap::new();
        for ((q, read, top), targets) in &self.delta {
            let slot = out.entry((q, top)).or_default();
            match read {
                None => slot.0 += targets.len(),
                Some(b) => *slot.1.entry(b).or_default() += targets.len(),
            }
        }
        out
    }

    /// `Card δ(q,ε,γ) ≤ 1`, `Card δ(q,b,γ) ≤ 1`, and an ε entry excludes all
    /// reading entries for the same `(q, γ)`.
    pub fn validate_deterministic(&self) -> bool {
        self.by_state_and_top().values().all(|(eps, reads)| {
            *eps <= 1 && reads.values().all(|&n| n <= 1) && (*eps == 0 || reads.is_empty())
        })
    }

    /// At most one entry for every `(q, γ)` across all labels.
    pub fn validate_strongly_deterministic(&self) -> bool {
        self.by_state_and_top()
            .values()
            .all(|(eps, reads)| eps + reads.values().sum::<usize>() <= 1)
    }

    pub fn validate_level_partitioned(&self) -> bool {
        self.normal_form().level_partitioned
    }

    pub fn normal_form(&self) -> NormalFormReport {
        let mut report = NormalFormReport {
            level_partitioned: true,
            reading_pops: true,
            binary_pushes: true,
            violations: Vec::new(),
        };
        for t in self.transitions() {
            for (i, s) in t.top.iter().enumerate() {
                if self.gamma.level_of(s) != Some(i + 1) {
                    report.level_partitioned = false;
                    report
                        .violations
                        .push(format!("LP: `{t}` reads {s} at level {}", i + 1));
                }
            }
            if let Operation::Push(j, h) = &t.op {
                if let Some(s) = h.iter().find(|s| self.gamma.level_of(s) != Some(*j)) {
                    report.level_partitioned = false;
                    report
                        .violations
                        .push(format!("LP: `{t}` pushes {s} at level {j}"));
                }
                if h.len() != 2 {
                    report.binary_pushes = false;
                    report
                        .violations
                        .push(format!("PI: `{t}` pushes a word of length {}", h.len()));
                }
            }
            if t.read.is_some() && t.op != Operation::Pop(1) {
                report.reading_pops = false;
                report
                    .violations
                    .push(format!("RL: `{t}` reads a letter without pop_1"));
            }
        }
        report
    }

    /// `γ_1[γ_2[… γ_{k−1}[w] …]]`.
    pub fn initial_store(&self, w: &[Symbol]) -> Result<Pushdown> {
        if let Some(s) = w.iter().find(|s| !self.gamma.level(self.level).contains(s)) {
            return Err(Error::UnknownLetter((*s).clone()));
        }
        let mut store = Pushdown::flat(1, w)?;
        for b in self.bottoms.iter().rev() {
            let level = store.level() + 1;
            store = Pushdown::new(
                level,
                vec![crate::pushdown::Entry {
                    symbol: b.clone(),
                    body: store,
                }],
            )?;
        }
        Ok(store)
    }

    /// All successors of `c`.
    pub fn step(&self, c: &Configuration, mode: Mode) -> Result<Vec<Configuration>> {
        if c.store.level() != self.level {
            return Err(Error::Domain(format!(
                "configuration store has level {}, machine has level {}",
                c.store.level(),
                self.level
            )));
        }
        let top = c.store.topsyms();
        let mut out = Vec::new();
        if top.is_empty() {
            return Ok(out);
        }
        let mut labels: Vec<Option<&Symbol>> = vec![None];
        match mode {
            Mode::Generation => labels.extend(self.terminals.iter().map(Some)),
            Mode::Recognition => labels.extend(c.word.first().map(Some)),
        }
        for read in labels {
            for (to, op) in self.targets(&c.state, read, &top) {
                let mut next_word = c.word.clone();
                if let Some(b) = read {
                    match mode {
                        Mode::Generation => next_word.push(b.clone()),
                        Mode::Recognition => {
                            next_word.remove(0);
                        }
                    }
                }
                out.push(Configuration {
                    state: to.clone(),
                    word: next_word,
                    store: op.apply(&c.store)?,
                });
            }
        }
        Ok(out)
    }

    pub fn run(&self, w: &[Symbol], fuel: u64) -> Result<RunOutcome> {
        self.run_observed(w, fuel, |_, _| {})
    }

    /// Runs in generation mode; `observe` sees every configuration together
    /// with its number of successors.
    pub fn run_observed(
        &self,
        w: &[Symbol],
        fuel: u64,
        mut observe: impl FnMut(&Configuration, usize),
    ) -> Result<RunOutcome> {
        if !self.validate_strongly_deterministic() {
            return Err(Error::InvalidSystem(
                "run needs a strongly deterministic machine".into(),
            ));
        }
        let mut c = Configuration {
            state: self.initial_state.clone(),
            word: Vec::new(),
            store: self.initial_store(w)?,
        };
        let mut steps = 0u64;
        loop {
            if c.store.is_empty() {
                observe(&c, 0);
                return Ok(if c.state == self.initial_state {
                    RunOutcome::Accepted(c.word)
                } else {
                    RunOutcome::Stuck(c)
                });
            }
            let mut next = self.step(&c, Mode::Generation)?;
            observe(&c, next.len());
            match next.len() {
                0 => return Ok(RunOutcome::Stuck(c)),
                1 if steps >= fuel => return Ok(RunOutcome::FuelExhausted(c)),
                1 => {
                    steps += 1;
                    c = next.pop().expect("one successor");
                }
                n => {
                    return Err(Error::InvalidSystem(format!(
                        "{n} successors from {c} in a strongly deterministic machine"
                    )))
                }
            }
        }
    }

    /// Bounded search for `(p, u, ω) ⊢* (q, ε, ε)`.
    pub fn computes(
        &self,
        p: &Symbol,
        u: &[Symbol],
        store: &Pushdown,
        q: &Symbol,
        bound: usize,
    ) -> Verdict {
        let start = Configuration {
            state: p.clone(),
            word: u.to_vec(),
            store: store.clone(),
        };
        let mut seen = BTreeSet::from([start.clone()]);
        let mut frontier = VecDeque::from([(start, 0usize)]);
        let mut truncated = false;
        while let Some((c, depth)) = frontier.pop_front() {
            if c.word.is_empty() && c.store.is_empty() && &c.state == q {
                return Verdict::Holds;
            }
            if depth == bound {
                truncated |= !c.store.is_empty();
                continue;
            }
            let Ok(next) = self.step(&c, Mode::Recognition) else {
                continue;
            };
            for n in next {
                if seen.insert(n.clone()) {
                    frontier.push_back((n, depth + 1));
                }
            }
        }
        if truncated {
            Verdict::Unknown
        } else {
            Verdict::Fails
        }
    }

    /// One-step rewrites of a single variable under the transition and
    /// decomposition rules.
    pub fn productions(&self, v: &Variable) -> Result<Vec<SententialForm>> {
        let mut out = Vec::new();
        let top = v.store.topsyms();
        let mut labels: Vec<Option<&Symbol>> = vec![None];
        labels.extend(self.terminals.iter().map(Some));
        for read in labels {
            for (p2, op) in self.targets(&v.from, read, &top) {
                let next = op.apply(&v.store)?;
                let mut form: SententialForm = read
                    .map(|b| FormSymbol::Terminal(b.clone()))
                    .into_iter()
                    .collect();
                if next.is_empty() {
                    if p2 != &v.to {
                        continue;
                    }
                } else {
                    form.push(FormSymbol::Var(Variable::new(
                        p2.clone(),
                        next,
                        v.to.clone(),
                    )?));
                }
                out.push(form);
            }
        }
        for n in 1..v.store.len() {
            let (left, right) = v.store.split_at(n);
            for r in self.states.iter() {
                out.push(vec![
                    FormSymbol::Var(Variable::new(v.from.clone(), left.clone(), r.clone())?),
                    FormSymbol::Var(Variable::new(r.clone(), right.clone(), v.to.clone())?),
                ]);
            }
        }
        Ok(out)
    }

    /// All forms reachable from `form` by rewriting one variable once.
    pub fn derive_step(&self, form: &[FormSymbol]) -> Result<BTreeSet<SententialForm>> {
        let mut out = BTreeSet::new();
        for (i, s) in form.iter().enumerate() {
            if let FormSymbol::Var(v) = s {
                for rhs in self.productions(v)? {
                    let mut next = form[..i].to_vec();
                    next.extend(rhs);
                    next.extend_from_slice(&form[i + 1..]);
                    out.insert(next);
                }
            }
        }
        Ok(out)
    }

    /// Every sentential form derivable from `start` in at most `depth` steps.
    pub fn derive(&self, start: &[Variable], depth: usize) -> Result<BTreeSet<SententialForm>> {
        let start: SententialForm = start.iter().cloned().map(FormSymbol::Var).collect();
        let mut all = BTreeSet::from([start.clone()]);
        let mut layer = vec![start];
        for _ in 0..depth {
            let mut next = Vec::new();
            for form in &layer {
                for f in self.derive_step(form)? {
                    if all.insert(f.clone()) {
                        next.push(f);
                    }
                }
            }
            layer = next;
        }
        Ok(all)
    }

    /// Bounded search for `(p, ω, q) →* u` over leftmost derivations,
    /// pruning forms whose terminal prefix leaves `u`.
    pub fn derives(&self, v: &Variable, u: &[Symbol], bound: usize) -> Result<Verdict> {
        let start: SententialForm = vec![FormSymbol::Var(v.clone())];
        let mut seen = BTreeSet::from([start.clone()]);
        let mut frontier = VecDeque::from([(start, 0usize)]);
        let mut truncated = false;
        while let Some((form, depth)) = frontier.pop_front() {
            let prefix = form
                .iter()
                .take_while(|s| matches!(s, FormSymbol::Terminal(_)))
                .count();
            if prefix == form.len() {
                if form_terminals(&form) == u {
                    return Ok(Verdict::Holds);
                }
                continue;
            }
            if depth == bound {
                truncated = true;
                continue;
            }
            let FormSymbol::Var(var) = &form[prefix] else {
                unreachable!("prefix stops at a variable")
            };
            for rhs in self.productions(var)? {
                let mut next = form[..prefix].to_vec();
                next.extend(rhs);
                next.extend_from_slice(&form[prefix + 1..]);
                if !consistent_with(&next, u) {
                    continue;
                }
                if seen.insert(next.clone()) {
                    frontier.push_back((next, depth + 1));
                }
            }
        }
        Ok(if truncated {
            Verdict::Unknown
        } else {
            Verdict::Fails
        })
    }

    /// Compares `(p,ω,q) →* u` with `(p,u,ω) ⊢* (q,ε,ε)` under a common
    /// search bound.
    pub fn check_derivation_computation_agreement(
        &self,
        p: &Symbol,
        omega: &Pushdown,
        q: &Symbol,
        u: &[Symbol],
        bound: usize,
    ) -> Result<Agreement> {
        if omega.is_empty() {
            return Ok(Agreement::Vacuous);
        }
        let v = Variable::new(p.clone(), omega.clone(), q.clone())?;
        let derivation = self.derives(&v, u, bound)?;
        let computation = self.computes(p, u, omega, q, bound);
        Ok(match (derivation, computation) {
            (Verdict::Unknown, _) | (_, Verdict::Unknown) => Agreement::Inconclusive {
                derivation,
                computation,
            },
            (d, c) if d == c => Agreement::Agree(d == Verdict::Holds),
            _ => Agreement::Disagree {
                derivation,
                computation,
            },
        })
    }
}

fn form_terminals(form: &[FormSymbol]) -> Word {
    form.iter()
        .filter_map(|s| match s {
            FormSymbol::Terminal(b) => Some(b.clone()),
            FormSymbol::Var(_) => None,
        })
        .collect()
}

fn consistent_with(form: &[FormSymbol], u: &[Symbol]) -> bool {
    let mut prefix = Vec::new();
    for s in form {
        match s {
            FormSymbol::Terminal(b) => prefix.push(b.clone()),
            FormSymbol::Var(_) => break,
        }
    }
    u.starts_with(&prefix) && form_terminals(form).len() <= u.len()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FormSymbol {
    Var(Variable),
    Terminal(Symbol),
}

impl fmt::Display for FormSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormSymbol::Var(v) => write!(f, "{v}"),
            FormSymbol::Terminal(b) => write!(f, "{b}"),
        }
    }
}

pub type SententialForm = Vec<FormSymbol>;

pub fn display_form(form: &[FormSymbol]) -> String {
    if form.is_empty() {
        return "eps".into();
    }
    form.iter().map(ToString::to_string).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Agreement {
    Agree(bool),
    Disagree {
        derivation: Verdict,
        computation: Verdict,
    },
    Inconclusive {
        derivation: Verdict,
        computation: Verdict,
    },
    /// ω = ε is not a variable.
    Vacuous,
}

impl Agreement {
    pub fn is_consistent(&self) -> bool {
        !matches!(self, Agreement::Disagree { .. })
    }
}

/// The 1-pda with `δ(q0, a, a) = (q0, pop_1)` for every letter, computing
/// the identity.
pub fn identity_machine(alphabet: &Alphabet) -> KPda {
    let transitions = alphabet.iter().map(|a| Transition {
        from: "q0".into(),
        read: Some(a.clone()),
        top: vec![a.clone()],
        to: "q0".into(),
        op: Operation::Pop(1),
    });
    KPda::new(
        1,
        Alphabet::parse("q0").expect("one state"),
        alphabet.clone(),
        GradedAlphabet::new(vec![alphabet.letters().to_vec()]).expect("one level"),
        "q0".into(),
        Vec::new(),
        transitions,
    )
    .expect("well-formed identity machine")
}

/// A level-2 machine mapping `a^n` to `b^{2^n}`.
pub fn doubling_machine() -> KPda {
    let lines = [
        "q0 , eps , Z a -> q1 , pop_2",
        "q1 , eps , Z a -> q0 , push_1(Z Z)",
        "q1 , eps , Z -> q0 , push_1(Z Z)",
        "q0 , b , Z -> q0 , pop_1",
    ];
    KPda::new(
        2,
        Alphabet::parse("q0 q1").expect("states"),
        Alphabet::parse("b").expect("terminals"),
        GradedAlphabet::parse_levels(&["Z", "a"]).expect("levels"),
        "q0".into(),
        vec!["Z".into()],
        lines
            .iter()
            .map(|l| Transition::parse(l).expect("valid line")),
    )
    .expect("well-formed doubling machine")
}
