//! The system-definition file format.
//!
//! A file is a sequence of blocks `kind name { ... }`. Inside a block, lines
//! are either `key: value` settings or rules. `#` starts a comment.

use crate::error::{CliError, CliResult};
use level3::equivalence::FractionPresentation;
use level3::groebner::Ideal;
use level3::kpda::{KPda, Transition};
use level3::lowering::skolem_product_system;
use level3::matrix::Matrix;
use level3::morphisms::{Hdt0lSystem, Homomorphism, LinearRepresentation};
use level3::poly::{MonomialOrder, Polynomial};
use level3::pushdown::GradedAlphabet;
use level3::recurrences::{
    CatenativeSystem, Classifier, CompositionalSystem, Factor, PolynomialSystem, RegularSystem,
    Ring, RuleTable,
};
use level3::symbol::{word, Alphabet, Symbol, Word};
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

#[derive(Clone, Debug)]
pub struct Declaration {
    pub name: String,
    pub line: usize,
    pub decl: Decl,
}

#[derive(Clone, Debug)]
pub enum Decl {
    Cat(CatenativeSystem),
    Comp {
        system: CompositionalSystem,
        final_map: Homomorphism,
        seed: Symbol,
    },
    Reg(RegularSystem),
    Poly(PolynomialSystem),
    LinRep(LinearRepresentation),
    Hdt0l(Hdt0lSystem),
    Pda(KPda),
    Hom(Homomorphism),
    Frac {
        system: String,
        fraction: FractionPresentation,
    },
    Chain {
        first: String,
        then: String,
    },
    Skolem {
        u: String,
        v: String,
        product: PolynomialSystem,
    },
    Ideal {
        names: Vec<String>,
        ideal: Ideal,
    },
}

impl Decl {
    pub fn kind(&self) -> &'static str {
        match self {
            Decl::Cat(_) => "cat",
            Decl::Comp { .. } => "comp",
            Decl::Reg(_) => "reg",
            Decl::Poly(_) => "poly",
            Decl::LinRep(_) => "linrep",
            Decl::Hdt0l(_) => "hdt0l",
            Decl::Pda(_) => "pda",
            Decl::Hom(_) => "hom",
            Decl::Frac { .. } => "frac",
            Decl::Chain { .. } => "chain",
            Decl::Skolem { .. } => "skolem",
            Decl::Ideal { .. } => "ideal",
        }
    }

    pub fn indices(&self) -> Option<&Alphabet> {
        match self {
            Decl::Cat(s) => Some(s.indices()),
            Decl::Comp { system, .. } => Some(system.indices()),
            Decl::Reg(s) => Some(s.indices()),
            Decl::Poly(s) => Some(s.indices()),
            _ => None,
        }
    }
}

/// A declaration together with the index selected by a target.
#[derive(Clone, Copy, Debug)]
pub struct Target<'a> {
    pub decl: &'a Declaration,
    pub index: Option<&'a Symbol>,
}

impl Target<'_> {
    pub fn index(&self) -> CliResult<&Symbol> {
        self.index.ok_or_else(|| {
            CliError::Usage(format!(
                "`{}` has several indices; name one as `{}.index`",
                self.decl.name, self.decl.name
            ))
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct SystemFile {
    pub decls: Vec<Declaration>,
}

impl SystemFile {
    pub fn get(&self, name: &str) -> Option<&Declaration> {
        self.decls.iter().find(|d| d.name == name)
    }

    pub fn resolve(&self, target: &str) -> CliResult<Target<'_>> {
        resolve_in(&self.decls, target)
    }
}

/// Resolves `decl.index`, `decl`, or a bare index name that is unique in
/// the file.
fn resolve_in<'a>(decls: &'a [Declaration], target: &str) -> CliResult<Target<'a>> {
    let find = |name: &str| decls.iter().find(|d| d.name == name);
    if let Some((d, i)) = target.split_once('.') {
        let decl = find(d).ok_or_else(|| CliError::Usage(format!("unknown declaration `{d}`")))?;
        let indices = decl
            .decl
            .indices()
            .ok_or_else(|| CliError::Usage(format!("`{d}` has no indices")))?;
        let index = indices
            .iter()
            .find(|s| s.as_str() == i)
            .ok_or_else(|| CliError::Usage(format!("unknown index `{i}` in `{d}`")))?;
        return Ok(Target {
            decl,
            index: Some(index),
        });
    }
    if let Some(decl) = find(target) {
        let index = decl.decl.indices().and_then(|ix| {
            ix.iter()
                .find(|s| s.as_str() == target)
                .or_else(|| (ix.len() == 1).then(|| ix.get(0)))
        });
        return Ok(Target { decl, index });
    }
    let hits: Vec<Target<'a>> = decls
        .iter()
        .filter_map(|decl| {
            let index = decl.decl.indices()?.iter().find(|s| s.as_str() == target)?;
            Some(Target {
                decl,
                index: Some(index),
            })
        })
        .collect();
    match hits.len() {
        1 => Ok(hits[0]),
        0 => Err(CliError::Usage(format!("unknown target `{target}`"))),
        _ => Err(CliError::Usage(format!(
            "index `{target}` occurs in several declarations; qualify it as `decl.{target}`"
        ))),
    }
}

/// The alphabet a target reads.
pub fn input_alphabet(file: &SystemFile, t: Target<'_>) -> CliResult<Alphabet> {
    Ok(match &t.decl.decl {
        Decl::Cat(s) => s.input().clone(),
        Decl::Comp { system, .. } => system.input().clone(),
        Decl::Reg(s) => s.input().clone(),
        Decl::Poly(s) => s.input().clone(),
        Decl::LinRep(r) => r.alphabet().clone(),
        Decl::Hdt0l(s) => s.input().clone(),
        Decl::Pda(m) => Alphabet::new(m.gamma().level(m.level()).iter().cloned())?,
        Decl::Hom(h) => h.source().clone(),
        Decl::Frac { fraction, .. } => fraction.system.input().clone(),
        Decl::Chain { first, .. } => input_alphabet(file, file.resolve(first)?)?,
        Decl::Skolem { product, .. } => product.input().clone(),
        Decl::Ideal { .. } => {
            return Err(CliError::Usage(format!(
                "`{}` is an ideal, not a mapping",
                t.decl.name
            )))
        }
    })
}

fn decl_input(decls: &[Declaration], t: Target<'_>) -> Option<Alphabet> {
    let file = SystemFile {
        decls: decls.to_vec(),
    };
    input_alphabet(&file, t).ok()
}

struct Line {
    no: usize,
    text: String,
}

/// Settings and rule lines of one block.
struct Body {
    header: usize,
    keys: Vec<(usize, String, String)>,
    used: BTreeSet<usize>,
    rules: Vec<Line>,
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '\'' || c == '′')
}

fn syntax(line: usize, message: impl Into<String>) -> CliError {
    CliError::Syntax {
        line,
        message: message.into(),
    }
}

fn at(line: usize) -> impl Fn(level3::Error) -> CliError {
    move |e| syntax(line, e.to_string())
}

impl Body {
    fn new(header: usize, lines: Vec<Line>) -> Body {
        let mut keys = Vec::new();
        let mut rules = Vec::new();
        for l in lines {
            match l.text.split_once(':') {
                Some((k, v)) if is_ident(k.trim()) && !k.contains(char::is_whitespace) => {
                    keys.push((l.no, k.trim().to_string(), v.trim().to_string()))
                }
                _ => rules.push(l),
            }
        }
        Body {
            header,
            keys,
            used: BTreeSet::new(),
            rules,
        }
    }

    fn all(&mut self, key: &str) -> Vec<(usize, String)> {
        let mut out = Vec::new();
        for (pos, (no, k, v)) in self.keys.iter().enumerate() {
            if k == key {
                self.used.insert(pos);
                out.push((*no, v.clone()));
            }
        }
        out
    }

    fn opt(&mut self, key: &str) -> CliResult<Option<(usize, String)>> {
        let mut all = self.all(key);
        if all.len() > 1 {
            return Err(syntax(all[1].0, format!("`{key}` given twice")));
        }
        Ok(all.pop())
    }

    fn req(&mut self, key: &str) -> CliResult<(usize, String)> {
        self.opt(key)?
            .ok_or_else(|| syntax(self.header, format!("missing `{key}:`")))
    }

    fn alphabet(&mut self, key: &str) -> CliResult<Alphabet> {
        let (no, v) = self.req(key)?;
        Alphabet::parse(&v).map_err(at(no))
    }

    fn finish(&self) -> CliResult<()> {
        for (pos, (no, k, _)) in self.keys.iter().enumerate() {
            if !self.used.contains(&pos) {
                return Err(syntax(*no, format!("unknown setting `{k}`")));
            }
        }
        Ok(())
    }

    fn no_rules(&self, kind: &str) -> CliResult<()> {
        match self.rules.first() {
            Some(l) => Err(syntax(l.no, format!("unexpected line in a `{kind}` block"))),
            None => Ok(()),
        }
    }
}

/// Left-hand side `name(args) [@class]`.
struct Lhs {
    name: String,
    args: Vec<String>,
    class: Option<String>,
}

fn parse_lhs(no: usize, text: &str) -> CliResult<Lhs> {
    let text = text.trim();
    let (call, class) = match text.split_once('@') {
        Some((c, k)) => (c.trim(), Some(k.trim().to_string())),
        None => (text, None),
    };
    let mut calls = parse_calls(no, call)?;
    if calls.len() != 1 {
        return Err(syntax(
            no,
            format!("expected `name(...)` on the left of `=`, got `{call}`"),
        ));
    }
    let (name, args) = calls.remove(0);
    Ok(Lhs { name, args, class })
}

/// A sequence `f(x y) g(w) ...`.
fn parse_calls(no: usize, text: &str) -> CliResult<Vec<(String, Vec<String>)>> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let open = rest
            .find('(')
            .ok_or_else(|| syntax(no, format!("expected `(` in `{rest}`")))?;
        let name = rest[..open].trim();
        if !is_ident(name) {
            return Err(syntax(no, format!("bad name `{name}`")));
        }
        let close = rest[open..]
            .find(')')
            .map(|c| open + c)
            .ok_or_else(|| syntax(no, format!("missing `)` in `{rest}`")))?;
        let args = rest[open + 1..close]
            .split_whitespace()
            .map(str::to_string)
            .collect();
        out.push((name.to_string(), args));
        rest = rest[close + 1..].trim_start();
    }
    Ok(out)
}

fn is_eps(args: &[String]) -> bool {
    args.is_empty() || (args.len() == 1 && (args[0] == "eps" || args[0] == "ε"))
}

/// `(letter, tail)` for an argument list `a w`, with `*` for any letter.
fn rule_head(no: usize, args: &[String]) -> CliResult<String> {
    match args {
        [a, w] if w == "w" => Ok(a.clone()),
        _ => Err(syntax(
            no,
            format!("expected `(a w)` or `(eps)`, got `({})`", args.join(" ")),
        )),
    }
}

struct RuleLine {
    no: usize,
    index: Symbol,
    letter: String,
    class: Option<String>,
    rhs: String,
}

type BaseLine = (usize, Symbol, String);
type Ranked = (u8, usize, Vec<Factor>);

/// Splits rule lines into base lines `i(eps) = v` and recursive rules.
fn split_rules(rules: &[Line], allow_class: bool) -> CliResult<(Vec<BaseLine>, Vec<RuleLine>)> {
    let mut bases = Vec::new();
    let mut recs = Vec::new();
    for l in rules {
        let (lhs, rhs) = l.text.split_once('=').ok_or_else(|| {
            syntax(
                l.no,
                format!("expected a rule `lhs = rhs`, got `{}`", l.text),
            )
        })?;
        let lhs = parse_lhs(l.no, lhs)?;
        if lhs.class.is_some() && !allow_class {
            return Err(syntax(
                l.no,
                "class annotations are only allowed in `reg` blocks",
            ));
        }
        let index = Symbol::new(&lhs.name);
        if is_eps(&lhs.args) {
            if lhs.class.is_some() {
                return Err(syntax(l.no, "base values take no class"));
            }
            if bases.iter().any(|(_, i, _)| *i == index) {
                return Err(syntax(l.no, format!("second base value for `{index}`")));
            }
            bases.push((l.no, index, rhs.trim().to_string()));
        } else {
            recs.push(RuleLine {
                no: l.no,
                index,
                letter: rule_head(l.no, &lhs.args)?,
                class: lhs.class,
                rhs: rhs.trim().to_string(),
            });
        }
    }
    Ok((bases, recs))
}

fn indices_of(bases: &[(usize, Symbol, String)], header: usize) -> CliResult<Alphabet> {
    if bases.is_empty() {
        return Err(syntax(header, "no base values `i(eps) = ...`"));
    }
    Alphabet::new(bases.iter().map(|(_, i, _)| i.clone())).map_err(at(header))
}

/// Expands `*` rules and checks for duplicates; keys are `(index, letter)`.
fn expand<T: Clone>(
    input: &Alphabet,
    indices: &Alphabet,
    rules: Vec<(usize, Symbol, String, T)>,
) -> CliResult<BTreeMap<(Symbol, Symbol), (usize, T)>> {
    let mut explicit = BTreeMap::new();
    let mut star = Vec::new();
    for (no, i, letter, v) in rules {
        if !indices.contains(&i) {
            return Err(syntax(no, format!("unknown index `{i}`")));
        }
        if letter == "*" {
            star.push((no, i, v));
            continue;
        }
        let a = Symbol::new(&letter);
        if !input.contains(&a) {
            return Err(syntax(
                no,
                format!("letter `{a}` is not in the input alphabet"),
            ));
        }
        if explicit.insert((i.clone(), a.clone()), (no, v)).is_some() {
            return Err(syntax(no, format!("second rule for `{i}({a} w)`")));
        }
    }
    let mut seen = BTreeSet::new();
    for (no, i, v) in star {
        if !seen.insert(i.clone()) {
            return Err(syntax(no, format!("second `*` rule for `{i}`")));
        }
        for a in input.iter() {
            explicit
                .entry((i.clone(), a.clone()))
                .or_insert_with(|| (no, v.clone()));
        }
    }
    for i in indices.iter() {
        for a in input.iter() {
            if !explicit.contains_key(&(i.clone(), a.clone())) {
                return Err(CliError::Syntax {
                    line: 0,
                    message: format!("no rule for `{i}({a} w)`"),
                });
            }
        }
    }
    Ok(explicit)
}

fn index_word(no: usize, rhs: &str, indices: &Alphabet) -> CliResult<Word> {
    if rhs == "eps" || rhs == "ε" {
        return Ok(Vec::new());
    }
    parse_calls(no, rhs)?
        .into_iter()
        .map(|(name, args)| {
            if args != ["w"] {
                return Err(syntax(no, format!("expected `{name}(w)`")));
            }
            let s = Symbol::new(&name);
            if !indices.contains(&s) {
                return Err(syntax(no, format!("unknown index `{name}`")));
            }
            Ok(s)
        })
        .collect()
}

fn output_word(no: usize, text: &str, alphabet: &Alphabet) -> CliResult<Word> {
    let w = word(text);
    if let Some(bad) = w.iter().find(|s| !alphabet.contains(s)) {
        return Err(syntax(no, format!("letter `{bad}` is not in {alphabet}")));
    }
    Ok(w)
}

fn rule_table(
    header: usize,
    input: &Alphabet,
    indices: &Alphabet,
    recs: Vec<RuleLine>,
) -> CliResult<RuleTable> {
    let raw = recs
        .into_iter()
        .map(|r| Ok((r.no, r.index, r.letter, index_word(r.no, &r.rhs, indices)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let rules = expand(input, indices, raw).map_err(|e| relocate(e, header))?;
    let plain = rules.into_iter().map(|(k, (_, w))| (k, w)).collect();
    RuleTable::new(indices.clone(), input.clone(), &plain).map_err(at(header))
}

fn relocate(e: CliError, header: usize) -> CliError {
    match e {
        CliError::Syntax { line: 0, message } => syntax(header, message),
        other => other,
    }
}

/// `id`, `[w1, w2, ...]` in source-letter order, or `{x -> w, ...}`.
pub fn parse_hom(
    no: usize,
    text: &str,
    source: &Alphabet,
    target: &Alphabet,
) -> CliResult<Homomorphism> {
    let text = text.trim();
    if text == "id" {
        if !source.same_letters(target) {
            return Err(syntax(no, "`id` needs equal source and target alphabets"));
        }
        return Ok(Homomorphism::identity(source));
    }
    if let Some(inner) = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        let images = inner
            .split(',')
            .map(|w| output_word(no, w, target))
            .collect::<CliResult<Vec<_>>>()?;
        if images.len() != source.len() {
            return Err(syntax(
                no,
                format!("{} images for {} letters", images.len(), source.len()),
            ));
        }
        return Homomorphism::new(source.clone(), target.clone(), images).map_err(at(no));
    }
    if let Some(inner) = text.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
        let pairs = inner
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let (x, w) = p
                    .split_once("->")
                    .ok_or_else(|| syntax(no, format!("expected `x -> w`, got `{}`", p.trim())))?;
                Ok((Symbol::new(x.trim()), output_word(no, w, target)?))
            })
            .collect::<CliResult<Vec<_>>>()?;
        return Homomorphism::from_pairs(source, target, pairs).map_err(at(no));
    }
    Err(syntax(
        no,
        format!("expected `id`, `[...]` or `{{...}}`, got `{text}`"),
    ))
}

fn parse_int(no: usize, text: &str) -> CliResult<BigInt> {
    text.trim()
        .parse()
        .map_err(|_| syntax(no, format!("expected an integer, got `{}`", text.trim())))
}

fn parse_ints(no: usize, text: &str) -> CliResult<Vec<BigInt>> {
    text.split_whitespace().map(|t| parse_int(no, t)).collect()
}

fn build_cat(mut b: Body) -> CliResult<Decl> {
    let input = b.alphabet("input")?;
    let output = b.alphabet("output")?;
    b.finish()?;
    let (bases, recs) = split_rules(&b.rules, false)?;
    let indices = indices_of(&bases, b.header)?;
    let base = bases
        .iter()
        .map(|(no, i, v)| Ok((i.clone(), output_word(*no, v, &output)?)))
        .collect::<CliResult<BTreeMap<_, _>>>()?;
    let table = rule_table(b.header, &input, &indices, recs)?;
    Ok(Decl::Cat(
        CatenativeSystem::new(table, output, base).map_err(at(b.header))?,
    ))
}

fn build_comp(mut b: Body) -> CliResult<Decl> {
    let input = b.alphabet("input")?;
    let working = b.alphabet("working")?;
    let output = match b.opt("output")? {
        Some((no, v)) => Alphabet::parse(&v).map_err(at(no))?,
        None => working.clone(),
    };
    let final_map = match b.opt("final")? {
        Some((no, v)) => parse_hom(no, &v, &working, &output)?,
        None => parse_hom(b.header, "id", &working, &output)?,
    };
    let (sno, seed) = b.req("seed")?;
    let seed = Symbol::new(&seed);
    if !working.contains(&seed) {
        return Err(syntax(
            sno,
            format!("seed `{seed}` is not in the working alphabet"),
        ));
    }
    b.finish()?;
    let (bases, recs) = split_rules(&b.rules, false)?;
    let indices = indices_of(&bases, b.header)?;
    let base = bases
        .iter()
        .map(|(no, i, v)| Ok((i.clone(), parse_hom(*no, v, &working, &working)?)))
        .collect::<CliResult<BTreeMap<_, _>>>()?;
    let table = rule_table(b.header, &input, &indices, recs)?;
    let system = CompositionalSystem::new(table, working, base).map_err(at(b.header))?;
    Ok(Decl::Comp {
        system,
        final_map,
        seed,
    })
}

fn build_reg(mut b: Body) -> CliResult<Decl> {
    let input = b.alphabet("input")?;
    let output = b.alphabet("output")?;
    let classifier = match b.opt("classes")? {
        None => {
            if let Some((no, _)) = b.all("move").first() {
                return Err(syntax(*no, "`move:` without `classes:`"));
            }
            Classifier::trivial(&input)
        }
        Some((cno, c)) => {
            let classes = Alphabet::parse(&c).map_err(at(cno))?;
            let (sno, start) = b.req("start")?;
            let mut moves = BTreeMap::new();
            for (no, m) in b.all("move") {
                let (lhs, to) = m
                    .split_once("->")
                    .ok_or_else(|| syntax(no, "expected `move: class letter -> class`"))?;
                let lhs: Vec<&str> = lhs.split_whitespace().collect();
                if lhs.len() != 2 {
                    return Err(syntax(no, "expected `move: class letter -> class`"));
                }
                let key = (Symbol::new(lhs[0]), Symbol::new(lhs[1]));
                if moves.insert(key, Symbol::new(to.trim())).is_some() {
                    return Err(syntax(no, "second move for the same class and letter"));
                }
            }
            Classifier::new(classes, input.clone(), &Symbol::new(&start), &moves)
                .map_err(at(sno))?
        }
    };
    b.finish()?;
    let (bases, recs) = split_rules(&b.rules, true)?;
    let indices = indices_of(&bases, b.header)?;
    let base = bases
        .iter()
        .map(|(no, i, v)| Ok((i.clone(), output_word(*no, v, &output)?)))
        .collect::<CliResult<BTreeMap<_, _>>>()?;
    let classes = classifier.classes().clone();
    // Priority: letter and class, then `*` with class, then letter, then `*`.
    let mut ranked: BTreeMap<(Symbol, Symbol, Symbol), Ranked> = BTreeMap::new();
    for r in recs {
        if !indices.contains(&r.index) {
            return Err(syntax(r.no, format!("unknown index `{}`", r.index)));
        }
        let factors = factors(r.no, &r.rhs, &indices)?;
        let letters: Vec<Symbol> = if r.letter == "*" {
            input.letters().to_vec()
        } else {
            let a = Symbol::new(&r.letter);
            if !input.contains(&a) {
                return Err(syntax(
                    r.no,
                    format!("letter `{a}` is not in the input alphabet"),
                ));
            }
            vec![a]
        };
        let targets: Vec<Symbol> = match &r.class {
            Some(c) => {
                let c = Symbol::new(c);
                if !classes.contains(&c) {
                    return Err(syntax(r.no, format!("unknown class `{c}`")));
                }
                vec![c]
            }
            None => classes.letters().to_vec(),
        };
        let rank = match (r.class.is_some(), r.letter == "*") {
            (true, false) => 3,
            (true, true) => 2,
            (false, false) => 1,
            (false, true) => 0,
        };
        for a in &letters {
            for c in &targets {
                let key = (r.index.clone(), a.clone(), c.clone());
                match ranked.get(&key) {
                    Some((k, no, _)) if *k == rank && *no != r.no => {
                        return Err(syntax(
                            r.no,
                            format!("second rule for `{}({a} w) @{c}`", r.index),
                        ))
                    }
                    Some((k, _, _)) if *k > rank => {}
                    _ => {
                        ranked.insert(key, (rank, r.no, factors.clone()));
                    }
                }
            }
        }
    }
    let rules: BTreeMap<(Symbol, Symbol, Symbol), Vec<Factor>> =
        ranked.into_iter().map(|(k, (_, _, f))| (k, f)).collect();
    let sys =
        RegularSystem::new(indices, output, classifier, &rules, base).map_err(at(b.header))?;
    Ok(Decl::Reg(sys))
}

fn factors(no: usize, rhs: &str, indices: &Alphabet) -> CliResult<Vec<Factor>> {
    if rhs == "eps" || rhs == "ε" {
        return Ok(Vec::new());
    }
    parse_calls(no, rhs)?
        .into_iter()
        .map(|(name, mut args)| {
            if args.last().map(String::as_str) != Some("w") {
                return Err(syntax(no, format!("factor `{name}(...)` must end in `w`")));
            }
            args.pop();
            let index = Symbol::new(&name);
            if !indices.contains(&index) {
                return Err(syntax(no, format!("unknown index `{name}`")));
            }
            Ok(Factor {
                index,
                shift: args.iter().map(|a| Symbol::new(a)).collect(),
            })
        })
        .collect()
}

fn resolver<'a>(names: &'a [String]) -> impl Fn(&str) -> Option<usize> + 'a {
    move |n: &str| {
        names.iter().position(|x| x == n).or_else(|| {
            let k: usize = n.strip_prefix('X')?.parse().ok()?;
            (1..=names.len()).contains(&k).then(|| k - 1)
        })
    }
}

fn parse_poly(no: usize, text: &str, names: &[String]) -> CliResult<Polynomial> {
    Polynomial::parse_with(text, names.len(), resolver(names)).map_err(|e| match e {
        level3::Error::Parse { position, message } => {
            syntax(no, format!("column {}: {message}", position + 1))
        }
        other => syntax(no, other.to_string()),
    })
}

fn build_poly(mut b: Body) -> CliResult<Decl> {
    let input = b.alphabet("input")?;
    let ring = match b.opt("ring")? {
        None => Ring::Natural,
        Some((_, r)) if r == "N" || r == "ℕ" => Ring::Natural,
        Some((_, r)) if r == "Z" || r == "ℤ" => Ring::Integer,
        Some((no, r)) => return Err(syntax(no, format!("unknown ring `{r}`; use N or Z"))),
    };
    b.finish()?;
    let (bases, recs) = split_rules(&b.rules, false)?;
    let indices = indices_of(&bases, b.header)?;
    let names: Vec<String> = indices.iter().map(|s| s.to_string()).collect();
    let base = bases
        .iter()
        .map(|(no, i, v)| Ok((i.clone(), parse_int(*no, v)?)))
        .collect::<CliResult<BTreeMap<_, _>>>()?;
    let raw = recs
        .into_iter()
        .map(|r| Ok((r.no, r.index, r.letter, parse_poly(r.no, &r.rhs, &names)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let rules = expand(&input, &indices, raw).map_err(|e| relocate(e, b.header))?;
    let plain = rules.into_iter().map(|(k, (_, p))| (k, p)).collect();
    let sys = PolynomialSystem::new(indices, input, ring, &plain, base).map_err(at(b.header))?;
    Ok(Decl::Poly(sys))
}

fn build_linrep(mut b: Body) -> CliResult<Decl> {
    let alphabet = b.alphabet("alphabet")?;
    let (ino, init) = b.req("init")?;
    let init = parse_ints(ino, &init)?;
    let (fno, fin) = b.req("final")?;
    let fin = parse_ints(fno, &fin)?;
    let mut matrices = Vec::new();
    for a in alphabet.iter() {
        let (no, text) = b.req(a.as_str())?;
        let rows = text
            .split(';')
            .map(|r| parse_ints(no, r))
            .collect::<CliResult<Vec<_>>>()?;
        matrices.push(Matrix::from_rows(rows).map_err(at(no))?);
    }
    b.finish()?;
    b.no_rules("linrep")?;
    let rep = LinearRepresentation::new(alphabet, init, matrices, fin).map_err(at(b.header))?;
    Ok(Decl::LinRep(rep))
}

fn build_hdt0l(mut b: Body) -> CliResult<Decl> {
    let input = b.alphabet("input")?;
    let working = b.alphabet("working")?;
    let output = match b.opt("output")? {
        Some((no, v)) => Alphabet::parse(&v).map_err(at(no))?,
        None => working.clone(),
    };
    let final_map = match b.opt("final")? {
        Some((no, v)) => parse_hom(no, &v, &working, &output)?,
        None => parse_hom(b.header, "id", &working, &output)?,
    };
    let (sno, seed) = b.req("seed")?;
    let mut tables = Vec::new();
    for a in input.iter() {
        let (no, text) = b.req(a.as_str())?;
        tables.push(parse_hom(no, &text, &working, &working)?);
    }
    b.finish()?;
    b.no_rules("hdt0l")?;
    let sys =
        Hdt0lSystem::new(input, working, tables, final_map, Symbol::new(&seed)).map_err(at(sno))?;
    Ok(Decl::Hdt0l(sys))
}

fn build_hom(mut b: Body) -> CliResult<Decl> {
    let source = b.alphabet("from")?;
    let target = match b.opt("to")? {
        Some((no, v)) => Alphabet::parse(&v).map_err(at(no))?,
        None => source.clone(),
    };
    b.finish()?;
    let mut pairs = Vec::new();
    for l in &b.rules {
        let (x, w) = l
            .text
            .split_once("->")
            .ok_or_else(|| syntax(l.no, "expected `x -> w`"))?;
        pairs.push((Symbol::new(x.trim()), output_word(l.no, w, &target)?));
    }
    let h = Homomorphism::from_pairs(&source, &target, pairs).map_err(at(b.header))?;
    Ok(Decl::Hom(h))
}

fn build_pda(mut b: Body) -> CliResult<Decl> {
    let (lno, level) = b.req("level")?;
    let level: usize = level
        .parse()
        .map_err(|_| syntax(lno, format!("bad level `{level}`")))?;
    let states = b.alphabet("states")?;
    let terminals = b.alphabet("terminals")?;
    let mut levels = Vec::new();
    for j in 1..=level {
        let (no, v) = b.req(&format!("gamma{j}"))?;
        levels.push(Alphabet::parse(&v).map_err(at(no))?.letters().to_vec());
    }
    let gamma = GradedAlphabet::new(levels).map_err(at(lno))?;
    let (_, start) = b.req("start")?;
    let bottoms = b.opt("bottoms")?.map(|(_, v)| word(&v)).unwrap_or_default();
    b.finish()?;
    let transitions = b
        .rules
        .iter()
        .map(|l| Transition::parse(&l.text).map_err(at(l.no)))
        .collect::<CliResult<Vec<_>>>()?;
    let m = KPda::new(
        level,
        states,
        terminals,
        gamma,
        Symbol::new(&start),
        bottoms,
        transitions,
    )
    .map_err(at(b.header))?;
    Ok(Decl::Pda(m))
}

fn difference(no: usize, text: &str) -> CliResult<(Symbol, Symbol)> {
    let (a, c) = text
        .split_once(" - ")
        .ok_or_else(|| syntax(no, format!("expected `i - j`, got `{text}`")))?;
    Ok((Symbol::new(a.trim()), Symbol::new(c.trim())))
}

fn build_frac(mut b: Body, decls: &[Declaration]) -> CliResult<Decl> {
    let (sno, system) = b.req("system")?;
    let (nno, num) = b.req("num")?;
    let (dno, den) = b.req("den")?;
    b.finish()?;
    b.no_rules("frac")?;
    let sys = match decls.iter().find(|d| d.name == system).map(|d| &d.decl) {
        Some(Decl::Poly(s)) => s.clone(),
        Some(_) => return Err(syntax(sno, format!("`{system}` is not a `poly` block"))),
        None => return Err(syntax(sno, format!("unknown declaration `{system}`"))),
    };
    let (g, h) = difference(nno, &num)?;
    let (fp, gp) = difference(dno, &den)?;
    let fraction = FractionPresentation::new(sys, g, h, fp, gp).map_err(at(nno))?;
    Ok(Decl::Frac { system, fraction })
}

fn build_chain(mut b: Body, decls: &[Declaration]) -> CliResult<Decl> {
    let (fno, first) = b.req("first")?;
    let (tno, then) = b.req("then")?;
    b.finish()?;
    b.no_rules("chain")?;
    let f = resolve_in(decls, &first).map_err(|e| syntax(fno, e.to_string()))?;
    let Decl::Cat(inner) = &f.decl.decl else {
        return Err(syntax(fno, format!("`{first}` must name a `cat` index")));
    };
    f.index().map_err(|e| syntax(fno, e.to_string()))?;
    let t = resolve_in(decls, &then).map_err(|e| syntax(tno, e.to_string()))?;
    let reads =
        decl_input(decls, t).ok_or_else(|| syntax(tno, format!("`{then}` is not a mapping")))?;
    if !reads.same_letters(inner.output()) {
        return Err(syntax(
            tno,
            format!(
                "`{then}` reads {reads} but `{first}` produces words over {}",
                inner.output()
            ),
        ));
    }
    Ok(Decl::Chain { first, then })
}

fn poly_target(
    decls: &[Declaration],
    no: usize,
    text: &str,
) -> CliResult<(PolynomialSystem, Symbol)> {
    let t = resolve_in(decls, text).map_err(|e| syntax(no, e.to_string()))?;
    match &t.decl.decl {
        Decl::Poly(s) => Ok((
            s.clone(),
            t.index().map_err(|e| syntax(no, e.to_string()))?.clone(),
        )),
        _ => Err(syntax(no, format!("`{text}` must name a `poly` index"))),
    }
}

fn build_skolem(mut b: Body, decls: &[Declaration]) -> CliResult<Decl> {
    let (uno, u) = b.req("u")?;
    let (vno, v) = b.req("v")?;
    b.finish()?;
    b.no_rules("skolem")?;
    let (us, ui) = poly_target(decls, uno, &u)?;
    let (vs, vi) = poly_target(decls, vno, &v)?;
    let product = skolem_product_system(&us, &ui, &vs, &vi).map_err(at(b.header))?;
    Ok(Decl::Skolem { u, v, product })
}

pub fn parse_order(no: usize, text: &str) -> CliResult<MonomialOrder> {
    if let Some(k) = text.strip_prefix("elim") {
        let k = k.trim_start_matches(':').trim();
        let block = k
            .parse()
            .map_err(|_| syntax(no, format!("bad elimination block `{k}`")))?;
        return Ok(MonomialOrder::Elimination { block });
    }
    text.parse().map_err(at(no))
}

pub fn order_name(order: MonomialOrder) -> String {
    match order {
        MonomialOrder::Lex => "lex".into(),
        MonomialOrder::GrevLex => "grevlex".into(),
        MonomialOrder::Elimination { block } => format!("elim:{block}"),
    }
}

fn build_ideal(mut b: Body) -> CliResult<Decl> {
    let (vno, vars) = b.req("vars")?;
    let names: Vec<String> = vars.split_whitespace().map(str::to_string).collect();
    if names.is_empty() || names.iter().any(|n| !is_ident(n)) {
        return Err(syntax(vno, "expected variable names"));
    }
    if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
        return Err(syntax(vno, "repeated variable name"));
    }
    let order = match b.opt("order")? {
        Some((no, o)) => parse_order(no, &o)?,
        None => MonomialOrder::default(),
    };
    b.finish()?;
    let gens = b
        .rules
        .iter()
        .map(|l| parse_poly(l.no, &l.text, &names))
        .collect::<CliResult<Vec<_>>>()?;
    let ideal = Ideal::new(names.len(), gens, order).map_err(at(b.header))?;
    Ok(Decl::Ideal { names, ideal })
}

/// Parses and validates a whole file.
pub fn parse_file(text: &str) -> CliResult<SystemFile> {
    let mut decls: Vec<Declaration> = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| {
        let l = l.split_once('#').map_or(l, |(a, _)| a);
        Line {
            no: i + 1,
            text: l.trim().to_string(),
        }
    });
    while let Some(head) = lines.next() {
        if head.text.is_empty() {
            continue;
        }
        let words: Vec<&str> = head.text.split_whitespace().collect();
        if words.len() != 3 || words[2] != "{" {
            return Err(syntax(
                head.no,
                format!("expected `kind name {{`, got `{}`", head.text),
            ));
        }
        let (kind, name) = (words[0], words[1].to_string());
        if !is_ident(&name) {
            return Err(syntax(head.no, format!("bad declaration name `{name}`")));
        }
        if decls.iter().any(|d| d.name == name) {
            return Err(syntax(head.no, format!("`{name}` is declared twice")));
        }
        let mut body = Vec::new();
        let mut closed = false;
        for l in lines.by_ref() {
            if l.text == "}" {
                closed = true;
                break;
            }
            if !l.text.is_empty() {
                body.push(l);
            }
        }
        if !closed {
            return Err(syntax(head.no, format!("block `{name}` is not closed")));
        }
        let body = Body::new(head.no, body);
        let decl = match kind {
            "cat" => build_cat(body)?,
            "comp" => build_comp(body)?,
            "reg" => build_reg(body)?,
            "poly" => build_poly(body)?,
            "linrep" => build_linrep(body)?,
            "hdt0l" => build_hdt0l(body)?,
            "hom" => build_hom(body)?,
            "pda" => build_pda(body)?,
            "frac" => build_frac(body, &decls)?,
            "chain" => build_chain(body, &decls)?,
            "skolem" => build_skolem(body, &decls)?,
            "ideal" => build_ideal(body)?,
            other => return Err(syntax(head.no, format!("unknown block kind `{other}`"))),
        };
        decls.push(Declaration {
            name,
            line: head.no,
            decl,
        });
    }
    Ok(SystemFile { decls })
}

fn spaced(w: &[Symbol]) -> String {
    if w.is_empty() {
        return "eps".into();
    }
    w.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
}

fn letters(a: &Alphabet) -> String {
    a.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
}

fn is_identity(h: &Homomorphism) -> bool {
    h.source() == h.target()
        && h.source()
            .iter()
            .zip(h.images())
            .all(|(x, w)| w.len() == 1 && &w[0] == x)
}

/// Inverse of [`parse_hom`].
pub fn show_hom(h: &Homomorphism) -> String {
    if is_identity(h) {
        return "id".into();
    }
    if h.source() == h.target() {
        let parts: Vec<String> = h.images().iter().map(|w| spaced(w)).collect();
        return format!("[{}]", parts.join(", "));
    }
    let parts: Vec<String> = h
        .source()
        .iter()
        .zip(h.images())
        .map(|(x, w)| format!("{x} -> {}", spaced(w)))
        .collect();
    format!("{{{}}}", parts.join(", "))
}

fn calls(w: &[Symbol]) -> String {
    if w.is_empty() {
        return "eps".into();
    }
    w.iter()
        .map(|i| format!("{i}(w)"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_rules(out: &mut String, table: &RuleTable) {
    for i in table.indices().iter() {
        for a in table.input().iter() {
            let rhs = table.rule(i, a).expect("total table");
            let _ = writeln!(out, "  {i}({a} w) = {}", calls(&rhs));
        }
    }
}

/// Text of one block; [`parse_file`] reads it back to an equal declaration.
pub fn print_decl(name: &str, decl: &Decl) -> String {
    let mut out = format!("{} {name} {{\n", decl.kind());
    let o = &mut out;
    match decl {
        Decl::Cat(s) => {
            let _ = writeln!(o, "  input: {}", letters(s.input()));
            let _ = writeln!(o, "  output: {}", letters(s.output()));
            for (i, v) in s.indices().iter().zip(s.base_values()) {
                let _ = writeln!(o, "  {i}(eps) = {}", spaced(v));
            }
            write_rules(o, s.table());
        }
        Decl::Comp {
            system,
            final_map,
            seed,
        } => {
            let _ = writeln!(o, "  input: {}", letters(system.input()));
            let _ = writeln!(o, "  working: {}", letters(system.working()));
            if final_map.target() != system.working() {
                let _ = writeln!(o, "  output: {}", letters(final_map.target()));
            }
            if !is_identity(final_map) {
                let _ = writeln!(o, "  final: {}", show_hom(final_map));
            }
            let _ = writeln!(o, "  seed: {seed}");
            for (i, h) in system.indices().iter().zip(system.base_values()) {
                let _ = writeln!(o, "  {i}(eps) = {}", show_hom(h));
            }
            write_rules(o, system.table());
        }
        Decl::Reg(s) => {
            let c = s.classifier();
            let _ = writeln!(o, "  input: {}", letters(s.input()));
            let _ = writeln!(o, "  output: {}", letters(s.output()));
            let _ = writeln!(o, "  classes: {}", letters(c.classes()));
            let _ = writeln!(o, "  start: {}", c.start());
            for (k, class) in c.classes().iter().enumerate() {
                for (l, a) in c.input().iter().enumerate() {
                    let _ = writeln!(
                        o,
                        "  move: {class} {a} -> {}",
                        c.classes().get(c.next(k, l))
                    );
                }
            }
            for i in s.indices().iter() {
                let _ = writeln!(o, "  {i}(eps) = {}", spaced(s.base(i).expect("index")));
            }
            for i in s.indices().iter() {
                for a in s.input().iter() {
                    for class in c.classes().iter() {
                        let f = s.rule(i, a, class).expect("total rules");
                        let rhs = if f.is_empty() {
                            "eps".to_string()
                        } else {
                            f.iter()
                                .map(Factor::to_string)
                                .collect::<Vec<_>>()
                                .join(" ")
                        };
                        let _ = writeln!(o, "  {i}({a} w) @{class} = {rhs}");
                    }
                }
            }
        }
        Decl::Poly(s) => {
            let names: Vec<String> = s.indices().iter().map(|x| x.to_string()).collect();
            let _ = writeln!(o, "  input: {}", letters(s.input()));
            let _ = writeln!(
                o,
                "  ring: {}",
                if s.ring() == Ring::Integer { "Z" } else { "N" }
            );
            for (i, v) in s.indices().iter().zip(s.base_values()) {
                let _ = writeln!(o, "  {i}(eps) = {v}");
            }
            for i in s.indices().iter() {
                for a in s.input().iter() {
                    let p = s.rule(i, a).expect("total rules");
                    let _ = writeln!(o, "  {i}({a} w) = {}", p.display_with(&names));
                }
            }
        }
        Decl::LinRep(r) => {
            let ints = |v: &[BigInt]| {
                v.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let _ = writeln!(o, "  alphabet: {}", letters(r.alphabet()));
            let _ = writeln!(o, "  init: {}", ints(r.initial()));
            let _ = writeln!(o, "  final: {}", ints(r.terminal()));
            for (a, m) in r.alphabet().iter().zip(r.matrices()) {
                let rows: Vec<String> = (0..m.rows()).map(|k| ints(m.row(k))).collect();
                let _ = writeln!(o, "  {a}: {}", rows.join(" ; "));
            }
        }
        Decl::Hdt0l(s) => {
            let _ = writeln!(o, "  input: {}", letters(s.input()));
            let _ = writeln!(o, "  working: {}", letters(s.working()));
            if s.output() != s.working() {
                let _ = writeln!(o, "  output: {}", letters(s.output()));
            }
            if !is_identity(s.final_map()) {
                let _ = writeln!(o, "  final: {}", show_hom(s.final_map()));
            }
            let _ = writeln!(o, "  seed: {}", s.seed());
            for (a, h) in s.input().iter().zip(s.tables()) {
                let _ = writeln!(o, "  {a}: {}", show_hom(h));
            }
        }
        Decl::Hom(h) => {
            let _ = writeln!(o, "  from: {}", letters(h.source()));
            if h.target() != h.source() {
                let _ = writeln!(o, "  to: {}", letters(h.target()));
            }
            for (x, w) in h.source().iter().zip(h.images()) {
                let _ = writeln!(o, "  {x} -> {}", spaced(w));
            }
        }
        Decl::Pda(m) => {
            let _ = writeln!(o, "  level: {}", m.level());
            let _ = writeln!(o, "  states: {}", letters(m.states()));
            let _ = writeln!(o, "  terminals: {}", letters(m.terminals()));
            for j in 1..=m.level() {
                let syms: Vec<&str> = m.gamma().level(j).iter().map(Symbol::as_str).collect();
                let _ = writeln!(o, "  gamma{j}: {}", syms.join(" "));
            }
            let _ = writeln!(o, "  start: {}", m.initial_state());
            if !m.bottoms().is_empty() {
                let _ = writeln!(o, "  bottoms: {}", spaced(m.bottoms()));
            }
            for t in m.transitions() {
                let _ = writeln!(o, "  {t}");
            }
        }
        Decl::Frac { system, fraction } => {
            let _ = writeln!(o, "  system: {system}");
            let _ = writeln!(o, "  num: {} - {}", fraction.g, fraction.h);
            let _ = writeln!(o, "  den: {} - {}", fraction.f_prime, fraction.g_prime);
        }
        Decl::Chain { first, then } => {
            let _ = writeln!(o, "  first: {first}");
            let _ = writeln!(o, "  then: {then}");
        }
        Decl::Skolem { u, v, .. } => {
            let _ = writeln!(o, "  u: {u}");
            let _ = writeln!(o, "  v: {v}");
        }
        Decl::Ideal { names, ideal } => {
            let _ = writeln!(o, "  vars: {}", names.join(" "));
            let _ = writeln!(o, "  order: {}", order_name(ideal.order()));
            for g in ideal.generators() {
                let _ = writeln!(o, "  {}", g.display_with(names));
            }
        }
    }
    out.push_str("}\n");
    out
}

impl fmt::Display for SystemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.decls.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            f.write_str(&print_decl(&d.name, &d.decl))?;
        }
        Ok(())
    }
}
