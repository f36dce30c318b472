use crate::bundled;
use crate::error::{CliError, CliResult};
use crate::syntax::{input_alphabet, parse_file, print_decl, show_hom, Decl, SystemFile, Target};
use level3::equivalence::{decide_equal, decide_equal_fractions, Decision};
use level3::groebner::{Budget, Ideal};
use level3::kpda::{RunOutcome, DEFAULT_FUEL};
use level3::lowering::{
    catenative_to_hdt0l, compositional_to_level3, hdt0l_to_catenative, series_to_polynomial_system,
    unary_lowering, Level3Mapping,
};
use level3::morphisms::{Hdt0lSystem, Homomorphism, LinearRepresentation};
use level3::poly::MonomialOrder;
use level3::recurrences::{PolynomialSystem, RegularOutcome};
use level3::symbol::{chars, power, word, Alphabet, Symbol, Word};
use num_bigint::BigInt;
use std::fmt::Write as _;
use std::path::Path;

/// Flags shared by all subcommands.
#[derive(Clone, Debug)]
pub struct Options {
    pub fuel: u64,
    /// Scales the Gröbner budget; `1000` is the default budget.
    pub budget: Option<usize>,
    pub order: Option<MonomialOrder>,
    pub paper_literal: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            fuel: DEFAULT_FUEL,
            budget: None,
            order: None,
            paper_literal: false,
        }
    }
}

impl Options {
    fn budget(&self) -> Budget {
        self.budget.map(Budget::scaled).unwrap_or_default()
    }

    fn order(&self) -> MonomialOrder {
        self.order.unwrap_or_default()
    }
}

/// Printed result; `negative` maps to exit code 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub negative: bool,
}

impl Output {
    fn ok(text: impl Into<String>) -> Self {
        Output {
            text: text.into(),
            negative: false,
        }
    }

    fn negative(text: impl Into<String>) -> Self {
        Output {
            text: text.into(),
            negative: true,
        }
    }
}

/// Reads a file, falling back to the bundled examples by name.
pub fn load(name: &str, opts: &Options) -> CliResult<SystemFile> {
    let path = Path::new(name);
    let text = if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: name.into(),
            message: e.to_string(),
        })?
    } else {
        bundled::lookup(name, opts.paper_literal)
            .ok_or_else(|| CliError::Usage(format!("no file or bundled example named `{name}`")))?
            .to_string()
    };
    parse_file(&text).map_err(|e| match e {
        CliError::Syntax { line, message } => CliError::Usage(format!("{name}:{line}: {message}")),
        other => other,
    })
}

/// Reads a word argument: `eps`, a count `n` for one-letter alphabets,
/// space-separated letters, or one character per letter.
pub fn parse_input(arg: &str, alphabet: &Alphabet) -> CliResult<Word> {
    let arg = arg.trim();
    let w = if arg.is_empty() || arg == "eps" || arg == "ε" {
        Vec::new()
    } else if alphabet.len() == 1 && arg.chars().all(|c| c.is_ascii_digit()) {
        let n: usize = arg
            .parse()
            .map_err(|_| CliError::Usage(format!("count `{arg}` is too large")))?;
        power(alphabet.get(0), n)
    } else if arg.contains(char::is_whitespace) || alphabet.contains(&Symbol::new(arg)) {
        word(arg)
    } else {
        chars(arg)
    };
    if let Some(bad) = w.iter().find(|s| !alphabet.contains(s)) {
        return Err(CliError::Usage(format!(
            "letter `{bad}` is not in {alphabet}"
        )));
    }
    Ok(w)
}

/// Letters written without separators; the empty word is `eps`.
pub fn show_word(w: &[Symbol]) -> String {
    if w.is_empty() {
        return "eps".into();
    }
    w.iter().map(Symbol::as_str).collect()
}

fn spaced(w: &[Symbol]) -> String {
    if w.is_empty() {
        return "eps".into();
    }
    w.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
}

/// A computed value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Word(Word),
    Number(BigInt),
    Text(String),
    Failed(String),
}

impl Value {
    fn render(self, as_length: bool) -> Output {
        match self {
            Value::Word(w) if as_length => Output::ok(w.len().to_string()),
            Value::Word(w) => Output::ok(show_word(&w)),
            Value::Number(n) => Output::ok(n.to_string()),
            Value::Text(t) => Output::ok(t),
            Value::Failed(t) => Output::negative(t),
        }
    }
}

/// Linear representation of `w ↦ |h(H^w(c))|`.
fn length_rep(sys: &Hdt0lSystem) -> CliResult<LinearRepresentation> {
    let unit = Alphabet::new(["#"])?;
    let images = sys
        .final_map()
        .images()
        .iter()
        .map(|w| power(unit.get(0), w.len()))
        .collect();
    let coded = Homomorphism::new(sys.working().clone(), unit, images)?;
    let counted = Hdt0lSystem::new(
        sys.input().clone(),
        sys.working().clone(),
        sys.tables().to_vec(),
        coded,
        sys.seed().clone(),
    )?;
    Ok(unary_lowering(&counted)?)
}

fn level3_of(t: Target<'_>) -> CliResult<Level3Mapping> {
    let Decl::Comp {
        system,
        final_map,
        seed,
    } = &t.decl.decl
    else {
        return Err(CliError::Usage(format!(
            "`{}` is not a `comp` block",
            t.decl.name
        )));
    };
    Ok(compositional_to_level3(
        system,
        t.index()?,
        final_map,
        seed,
    )?)
}

/// Evaluates a target on a word. With `as_length`, word-valued targets
/// report lengths, computed without building the word where possible.
pub fn evaluate(
    file: &SystemFile,
    t: Target<'_>,
    w: &[Symbol],
    as_length: bool,
    opts: &Options,
) -> CliResult<Value> {
    Ok(match &t.decl.decl {
        Decl::Cat(s) if as_length => {
            let i = s.table().index(t.index()?)?;
            Value::Number(s.eval_lengths(w)?.swap_remove(i))
        }
        Decl::Cat(s) => Value::Word(s.eval(t.index()?, w)?),
        Decl::Comp { .. } if as_length => {
            let m = level3_of(t)?;
            let rep = length_rep(m.outer())?;
            Value::Number(rep.eval(&m.stage(w)?)?)
        }
        Decl::Comp {
            system,
            final_map,
            seed,
        } => Value::Word(system.eval_level3(t.index()?, w, final_map, seed)?),
        Decl::Reg(s) => match s.eval(t.index()?, w, opts.fuel)? {
            RegularOutcome::Value(v) => Value::Word(v),
            RegularOutcome::FuelExhausted { steps } => {
                Value::Failed(format!("FuelExhausted after {steps} steps"))
            }
        },
        Decl::Poly(s) => Value::Number(s.eval(t.index()?, w)?),
        Decl::LinRep(r) => Value::Number(r.eval(w)?),
        Decl::Hdt0l(s) if as_length => Value::Number(length_rep(s)?.eval(w)?),
        Decl::Hdt0l(s) => Value::Word(s.eval(w)?),
        Decl::Pda(m) => match m.run(w, opts.fuel)? {
            RunOutcome::Accepted(out) => Value::Word(out),
            RunOutcome::Stuck(c) => Value::Failed(format!("Stuck at {c}")),
            RunOutcome::FuelExhausted(c) => Value::Failed(format!("FuelExhausted at {c}")),
        },
        Decl::Hom(h) => Value::Word(h.apply(w)?),
        Decl::Frac { fraction, .. } => Value::Text(fraction.eval(w)?.to_string()),
        Decl::Chain { first, then } => {
            let f = file.resolve(first)?;
            let inner = evaluate(file, f, w, false, opts)?;
            let Value::Word(mid) = inner else {
                return Err(CliError::Usage(format!(
                    "`{first}` does not produce a word"
                )));
            };
            evaluate(file, file.resolve(then)?, &mid, as_length, opts)?
        }
        Decl::Skolem { product, .. } => Value::Number(product.eval(&Symbol::new("w"), w)?),
        Decl::Ideal { .. } => {
            return Err(CliError::Usage(format!(
                "`{}` is an ideal; use `groebner`",
                t.decl.name
            )))
        }
    })
}

pub fn cmd_eval(
    file: &str,
    target: &str,
    input: &str,
    as_length: bool,
    as_hom: bool,
    opts: &Options,
) -> CliResult<Output> {
    let f = load(file, opts)?;
    let t = f.resolve(target)?;
    let w = parse_input(input, &input_alphabet(&f, t)?)?;
    if as_hom {
        let Decl::Comp { system, .. } = &t.decl.decl else {
            return Err(CliError::Usage("--hom applies to `comp` targets".into()));
        };
        return Ok(Output::ok(show_hom(&system.eval(t.index()?, &w)?)));
    }
    Ok(evaluate(&f, t, &w, as_length, opts)?.render(as_length))
}

/// A polynomial system and index computing the target's values.
fn as_polynomial(file: &SystemFile, t: Target<'_>) -> CliResult<(PolynomialSystem, Symbol)> {
    match &t.decl.decl {
        Decl::Poly(s) => Ok((s.clone(), t.index()?.clone())),
        Decl::Skolem { product, .. } => Ok((product.clone(), Symbol::new("w"))),
        Decl::Chain { first, then } => {
            let f = file.resolve(first)?;
            let Decl::Cat(g) = &f.decl.decl else {
                return Err(CliError::Usage(format!("`{first}` is not a `cat` index")));
            };
            let Decl::LinRep(rep) = &file.resolve(then)?.decl.decl else {
                return Err(CliError::Usage(format!(
                    "equality of `{}` needs a linear representation after the word map",
                    t.decl.name
                )));
            };
            let lowered = series_to_polynomial_system(g, f.index()?, rep)?;
            Ok((lowered.system, lowered.output))
        }
        other => Err(CliError::Usage(format!(
            "cannot decide equality for a `{}` block",
            other.kind()
        ))),
    }
}

fn verdict(d: Decision) -> Output {
    match d {
        Decision::Equal => Output::ok("Equal"),
        Decision::NotEqual(w) => Output::negative(format!("NotEqual {}", show_word(&w))),
    }
}

pub fn cmd_equiv(
    file_a: &str,
    target_a: &str,
    file_b: &str,
    target_b: &str,
    opts: &Options,
) -> CliResult<Output> {
    let fa = load(file_a, opts)?;
    let fb = load(file_b, opts)?;
    let ta = fa.resolve(target_a)?;
    let tb = fb.resolve(target_b)?;
    if let (Decl::Frac { fraction: p, .. }, Decl::Frac { fraction: q, .. }) =
        (&ta.decl.decl, &tb.decl.decl)
    {
        return Ok(verdict(decide_equal_fractions(
            p,
            q,
            opts.order(),
            &opts.budget(),
        )?));
    }
    let (sa, ia) = as_polynomial(&fa, ta)?;
    let (sb, ib) = as_polynomial(&fb, tb)?;
    Ok(verdict(decide_equal(
        &sa,
        &ia,
        &sb,
        &ib,
        opts.order(),
        &opts.budget(),
    )?))
}

/// Emits system-file text for a lowered form of the target.
pub fn cmd_lower(file: &str, target: &str, to: Option<&str>, opts: &Options) -> CliResult<Output> {
    let f = load(file, opts)?;
    let t = f.resolve(target)?;
    let name = &t.decl.name;
    let text = match (&t.decl.decl, to) {
        (Decl::Hdt0l(s), None | Some("linrep")) => {
            print_decl(&format!("{name}_linrep"), &Decl::LinRep(unary_lowering(s)?))
        }
        (Decl::Hdt0l(s), Some("cat")) => {
            let (g, seed) = hdt0l_to_catenative(s)?;
            format!(
                "# index: {seed}\n{}",
                print_decl(&format!("{name}_cat"), &Decl::Cat(g))
            )
        }
        (Decl::Cat(s), None | Some("hdt0l")) => {
            let h = catenative_to_hdt0l(s, t.index()?)?;
            print_decl(&format!("{name}_hdt0l"), &Decl::Hdt0l(h))
        }
        (Decl::Comp { .. }, None | Some("chain")) => {
            let m = level3_of(t)?;
            let inner = format!("{name}_inner");
            let outer = format!("{name}_outer");
            let chain = Decl::Chain {
                first: format!("{inner}.{}", m.index()),
                then: outer.clone(),
            };
            format!(
                "{}\n{}\n{}",
                print_decl(&inner, &Decl::Cat(m.inner().clone())),
                print_decl(&outer, &Decl::Hdt0l(m.outer().clone())),
                print_decl(&format!("{name}_level3"), &chain)
            )
        }
        (Decl::Chain { .. } | Decl::Skolem { .. }, None | Some("poly")) => {
            let (sys, out) = as_polynomial(&f, t)?;
            format!(
                "# index: {out}\n{}",
                print_decl(&format!("{name}_poly"), &Decl::Poly(sys))
            )
        }
        (d, to) => {
            return Err(CliError::Usage(format!(
                "no lowering of a `{}` block{}",
                d.kind(),
                to.map(|k| format!(" to `{k}`")).unwrap_or_default()
            )))
        }
    };
    Ok(Output::ok(text.trim_end().to_string()))
}

/// Staged evaluation of a level-3 mapping or chain.
pub fn cmd_compose(
    file: &str,
    target: &str,
    input: &str,
    as_length: bool,
    opts: &Options,
) -> CliResult<Output> {
    let f = load(file, opts)?;
    let t = f.resolve(target)?;
    let w = parse_input(input, &input_alphabet(&f, t)?)?;
    let (stage, value) = match &t.decl.decl {
        Decl::Comp { .. } => {
            let m = level3_of(t)?;
            let stage = m.stage(&w)?;
            let value = if as_length {
                Value::Number(length_rep(m.outer())?.eval(&stage)?)
            } else {
                Value::Word(m.outer().eval(&stage)?)
            };
            (stage, value)
        }
        Decl::Chain { first, then } => {
            let Value::Word(stage) = evaluate(&f, f.resolve(first)?, &w, false, opts)? else {
                return Err(CliError::Usage(format!(
                    "`{first}` does not produce a word"
                )));
            };
            let value = evaluate(&f, f.resolve(then)?, &stage, as_length, opts)?;
            (stage, value)
        }
        other => {
            return Err(CliError::Usage(format!(
                "`compose` needs a `comp` or `chain` target, not `{}`",
                other.kind()
            )))
        }
    };
    let out = value.render(as_length);
    Ok(Output {
        text: format!("stage: {}\nvalue: {}", spaced(&stage), out.text),
        negative: out.negative,
    })
}

pub fn cmd_run_pda(
    file: &str,
    target: &str,
    input: &str,
    trace: bool,
    opts: &Options,
) -> CliResult<Output> {
    let f = load(file, opts)?;
    let t = f.resolve(target)?;
    let Decl::Pda(m) = &t.decl.decl else {
        return Err(CliError::Usage(format!("`{target}` is not a `pda` block")));
    };
    let w = parse_input(input, &input_alphabet(&f, t)?)?;
    let mut text = String::new();
    let outcome = m.run_observed(&w, opts.fuel, |c, _| {
        if trace {
            let _ = writeln!(text, "{c}");
        }
    })?;
    Ok(match outcome {
        RunOutcome::Accepted(out) => Output::ok(format!("{text}Accepted {}", show_word(&out))),
        RunOutcome::Stuck(c) => Output::negative(format!("{text}Stuck at {c}")),
        RunOutcome::FuelExhausted(c) => Output::negative(format!("{text}FuelExhausted at {c}")),
    })
}

pub fn cmd_groebner(
    file: &str,
    target: &str,
    member: Option<&str>,
    opts: &Options,
) -> CliResult<Output> {
    let f = load(file, opts)?;
    let t = f.resolve(target)?;
    let Decl::Ideal { names, ideal } = &t.decl.decl else {
        return Err(CliError::Usage(format!(
            "`{target}` is not an `ideal` block"
        )));
    };
    let order = opts.order.unwrap_or(ideal.order());
    let ideal = Ideal::with_budget(
        ideal.nvars(),
        ideal.generators().to_vec(),
        order,
        &opts.budget(),
    )?;
    if let Some(p) = member {
        let p = level3::poly::Polynomial::parse(
            p,
            &names.iter().map(String::as_str).collect::<Vec<_>>(),
        )?;
        return Ok(if ideal.contains(&p) {
            Output::ok("member")
        } else {
            let r = ideal.normal_form(&p);
            Output::negative(format!(
                "not a member; remainder {}",
                r.display_ordered(names, order)
            ))
        });
    }
    if ideal.basis().is_empty() {
        return Ok(Output::ok("0"));
    }
    let lines: Vec<String> = ideal
        .basis()
        .iter()
        .map(|g| g.display_ordered(names, order))
        .collect();
    Ok(Output::ok(lines.join("\n")))
}

/// Used by tests: evaluates `target` of a bundled example as a number.
pub fn number(file: &SystemFile, target: &str, w: &[Symbol]) -> CliResult<BigInt> {
    match evaluate(file, file.resolve(target)?, w, true, &Options::default())? {
        Value::Number(n) => Ok(n),
        Value::Word(w) => Ok(BigInt::from(w.len())),
        other => Err(CliError::Usage(format!("not a number: {other:?}"))),
    }
}
