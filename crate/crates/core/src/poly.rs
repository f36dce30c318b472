//! Exact multivariate polynomials over ℚ.
//!
//! Variables are positional (`0..nvars`); arithmetic between polynomials
//! over different numbers of variables works in the larger ring. The text
//! form names variables `X1..Xn` unless names are supplied.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exponent vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(i: usize, nvars: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming divisibility.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    fn padded(&self, nvars: usize) -> Monomial {
        let mut e = self.0.clone();
        e.resize(nvars, 0);
        Monomial(e)
    }
}

/// Monomial orders. `Elimination { block }` compares the first `block`
/// variables by grevlex and breaks ties by grevlex on the rest; it
/// eliminates the first block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MonomialOrder {
    Lex,
    #[default]
    GrevLex,
    Elimination {
        block: usize,
    },
}

fn grevlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| {
        for (x, y) in a.iter().zip(b).rev() {
            if x != y {
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

impl MonomialOrder {
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match *self {
            MonomialOrder::Lex => a.0.cmp(&b.0),
            MonomialOrder::GrevLex => grevlex(&a.0, &b.0),
            MonomialOrder::Elimination { block } => {
                let k = block.min(a.0.len());
                grevlex(&a.0[..k], &b.0[..k]).then_with(|| grevlex(&a.0[k..], &b.0[k..]))
            }
        }
    }
}

impl std::str::FromStr for MonomialOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lex" => Ok(MonomialOrder::Lex),
            "grevlex" => Ok(MonomialOrder::GrevLex),
            other => Err(Error::Domain(format!("unknown monomial order `{other}`"))),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        Polynomial::from_terms(nvars, [(Monomial::one(nvars), c)])
    }

    pub fn one(nvars: usize) -> Self {
        Polynomial::constant(nvars, BigRational::one())
    }

    pub fn var(i: usize, nvars: usize) -> Self {
        assert!(i < nvars, "variable {i} out of range for {nvars} variables");
        Polynomial::from_terms(nvars, [(Monomial::var(i, nvars), BigRational::one())])
    }

    /// Sums duplicate monomials and drops zero coefficients.
    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Monomial, BigRational)>,
    ) -> Self {
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in terms {
            let m = m.padded(nvars);
            let entry = map.entry(m).or_insert_with(BigRational::zero);
            *entry += c;
        }
        map.retain(|_, c| !c.is_zero());
        Polynomial { nvars, terms: map }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms
            .get(&m.padded(self.nvars))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Same polynomial in a ring with `nvars ≥ self.nvars()` variables.
    pub fn extend(&self, nvars: usize) -> Polynomial {
        assert!(nvars >= self.nvars);
        if nvars == self.nvars {
            return self.clone();
        }
        Polynomial {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.padded(nvars), c.clone()))
                .collect(),
        }
    }

    /// Renames variable `i` to `map[i]` in a ring with `nvars` variables.
    pub fn remap(&self, map: &[usize], nvars: usize) -> Polynomial {
        Polynomial::from_terms(
            nvars,
            self.terms.iter().map(|(m, c)| {
                let mut e = vec![0; nvars];
                for (i, &x) in m.0.iter().enumerate() {
                    e[map[i]] += x;
                }
                (Monomial(e), c.clone())
            }),
        )
    }

    /// Drops trailing variables that do not occur; panics if one does.
    pub fn truncate(&self, nvars: usize) -> Polynomial {
        Polynomial {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    assert!(
                        m.0[nvars..].iter().all(|&e| e == 0),
                        "truncating a used variable"
                    );
                    (Monomial(m.0[..nvars].to_vec()), c.clone())
                })
                .collect(),
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms
            .keys()
            .any(|m| m.0.get(i).is_some_and(|&e| e > 0))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn leading(&self, order: MonomialOrder) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    pub fn leading_monomial(&self, order: MonomialOrder) -> Option<&Monomial> {
        self.leading(order).map(|(m, _)| m)
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self, order: MonomialOrder) -> Polynomial {
        match self.leading(order) {
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &BigRational) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, x)| (k.mul(m), x * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut result = Polynomial::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        assert!(point.len() >= self.nvars, "point has too few coordinates");
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            total += t;
        }
        total
    }

    /// Evaluation at an integer point; `None` when a coefficient is not an
    /// integer.
    pub fn eval_int(&self, point: &[BigInt]) -> Option<BigInt> {
        assert!(point.len() >= self.nvars, "point has too few coordinates");
        let mut total = BigInt::zero();
        for (m, c) in &self.terms {
            if !c.is_integer() {
                return None;
            }
            let mut t = c.to_integer();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            total += t;
        }
        Some(total)
    }

    pub fn has_integer_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Composition `p(q_1, …, q_n)`; the result lives in the ring of the
    /// `q_i`.
    pub fn substitute(&self, images: &[Polynomial]) -> Polynomial {
        assert!(
            images.len() >= self.nvars,
            "too few images for substitution"
        );
        let target = images.iter().map(Polynomial::nvars).max().unwrap_or(0);
        let mut powers: Vec<Vec<Polynomial>> = vec![vec![Polynomial::one(target)]; self.nvars];
        let mut acc: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap() * &images[i].extend(target);
                    powers[i].push(next);
                }
                t = &t * &powers[i][e as usize];
            }
            for (k, x) in t.terms {
                *acc.entry(k).or_insert_with(BigRational::zero) += x;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Polynomial {
            nvars: target,
            terms: acc,
        }
    }

    /// Text form with the given variable names, terms by decreasing grevlex.
    pub fn display_with(&self, names: &[String]) -> String {
        self.display_ordered(names, MonomialOrder::GrevLex)
    }

    /// Text form with terms listed by decreasing `order`.
    pub fn display_ordered(&self, names: &[String], order: MonomialOrder) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut terms: Vec<(&Monomial, &BigRational)> = self.terms.iter().collect();
        terms.sort_by(|a, b| order.cmp(b.0, a.0));
        let mut out = String::new();
        for (idx, (m, c)) in terms.into_iter().enumerate() {
            let negative = c.is_negative();
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let a = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !a.is_one() || m.is_one() {
                factors.push(a.to_string());
            }
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(names[i].clone()),
                    _ => factors.push(format!("{}^{}", names[i], e)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    pub fn default_names(nvars: usize) -> Vec<String> {
        (1..=nvars).map(|i| format!("X{i}")).collect()
    }

    /// Parses `+ - * ^ ( )` expressions over integer or `p/q` literals and
    /// the given variable names.
    pub fn parse(text: &str, names: &[&str]) -> Result<Polynomial> {
        let nvars = names.len();
        Polynomial::parse_with(text, nvars, |n| names.iter().position(|x| *x == n))
    }

    pub fn parse_with(
        text: &str,
        nvars: usize,
        resolve: impl Fn(&str) -> Option<usize>,
    ) -> Result<Polynomial> {
        let mut p = PolyParser {
            text,
            pos: 0,
            nvars,
            resolve: &resolve,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(Error::parse(p.pos, "unexpected trailing input"));
        }
        Ok(e)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&Polynomial::default_names(self.nvars)))
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.nvars.max(rhs.nvars);
        let mut out = self.extend(n);
        for (m, c) in &rhs.terms {
            let m = m.padded(n);
            let entry = out.terms.entry(m.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                out.terms.remove(&m);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let n = self.nvars.max(rhs.nvars);
        let mut acc: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (a, x) in &self.terms {
            let a = a.padded(n);
            for (b, y) in &rhs.terms {
                let m = a.mul(&b.padded(n));
                *acc.entry(m).or_insert_with(BigRational::zero) += x * y;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Polynomial {
            nvars: n,
            terms: acc,
        }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial {
                (&self).$f(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

struct PolyParser<'a, F> {
    text: &'a str,
    pos: usize,
    nvars: usize,
    resolve: &'a F,
}

impl<F: Fn(&str) -> Option<usize>> PolyParser<'_, F> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.power()?;
        while self.eat('*') {
            acc = &acc * &self.power()?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.unary()?;
        if self.eat('^') {
            self.skip_ws();
            let start = self.pos;
            let n = self.integer()?;
            let e = n
                .to_u32()
                .ok_or_else(|| Error::parse(start, "exponent out of range"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if self.eat('-') {
            return Ok(-&self.unary()?);
        }
        self.atom()
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(start, "expected a number"));
        }
        Ok(self.text[start..self.pos].parse().expect("digits"))
    }

    fn atom(&mut self) -> Result<Polynomial> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::parse(self.pos, "expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.integer()?;
                let mut value = BigRational::from_integer(num);
                let save = self.pos;
                if self.eat('/') {
                    self.skip_ws();
                    if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        let den = self.integer()?;
                        if den.is_zero() {
                            return Err(Error::parse(start, "zero denominator"));
                        }
                        value /= BigRational::from_integer(den);
                    } else {
                        self.pos = save;
                    }
                }
                Ok(Polynomial::constant(self.nvars, value))
            }
            Some(c) if crate::pushdown::is_ident_char(c) => {
                while self.peek().is_some_and(crate::pushdown::is_ident_char) {
                    self.pos += self.peek().unwrap().len_utf8();
                }
                let name = &self.text[start..self.pos];
                match (self.resolve)(name) {
                    Some(i) if i < self.nvars => Ok(Polynomial::var(i, self.nvars)),
                    _ => Err(Error::parse(start, format!("unknown variable `{name}`"))),
                }
            }
            Some(c) => Err(Error::parse(start, format!("unexpected `{c}`"))),
            None => Err(Error::parse(start, "unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xy(text: &str) -> Polynomial {
        Polynomial::parse(text, &["x", "y"]).unwrap()
    }

    #[test]
    fn ring_arithmetic() {
        assert_eq!(&xy("x + y") + &xy("x - y"), xy("2*x"));
        assert_eq!(xy("(x + 1)^2"), xy("x^2 + 2*x + 1"));
        assert_eq!(&xy("x") - &xy("x"), Polynomial::zero(2));
        let v = xy("x^2*y").eval(&[rat(3), rat(2)]);
        assert_eq!(v, rat(18));
        assert_eq!(
            xy("x^2*y").eval_int(&[BigInt::from(3), BigInt::from(2)]),
            Some(BigInt::from(18))
        );
        assert_eq!(
            xy("1/2*x").eval_int(&[BigInt::from(3), BigInt::from(2)]),
            None
        );
    }

    #[test]
    fn variable_sets_are_unioned() {
        let x = Polynomial::var(0, 1);
        let y = Polynomial::var(1, 2);
        let s = &x + &y;
        assert_eq!(s.nvars(), 2);
        assert_eq!(s, xy("x + y"));
    }

    #[test]
    fn display_round_trip() {
        let p = xy("-3/2*x^2*y + x - 7");
        let names = vec!["x".to_string(), "y".to_string()];
        let text = p.display_with(&names);
        assert_eq!(text, "-3/2*x^2*y + x - 7");
        assert_eq!(xy(&text), p);
        assert_eq!(Polynomial::zero(2).to_string(), "0");
        assert_eq!(Polynomial::var(1, 2).to_string(), "X2");
    }

    #[test]
    fn parse_errors() {
        assert!(Polynomial::parse("x + z", &["x"]).is_err());
        assert!(Polynomial::parse("x +", &["x"]).is_err());
        assert!(Polynomial::parse("(x", &["x"]).is_err());
        assert!(Polynomial::parse("1/0", &["x"]).is_err());
    }

    #[test]
    fn orders() {
        let a = Monomial(vec![1, 0, 2]);
        let b = Monomial(vec![0, 3, 0]);
        assert_eq!(MonomialOrder::Lex.cmp(&a, &b), Ordering::Greater);
        // equal degree: grevlex favours the smaller exponent in the last variable
        assert_eq!(MonomialOrder::GrevLex.cmp(&a, &b), Ordering::Less);
        let c = Monomial(vec![0, 5, 5]);
        assert_eq!(
            MonomialOrder::Elimination { block: 1 }.cmp(&a, &c),
            Ordering::Greater
        );
    }

    #[test]
    fn substitution_composes() {
        let p = xy("x*y + 1");
        let images = [xy("x + y"), xy("x - y")];
        assert_eq!(p.substitute(&images), xy("x^2 - y^2 + 1"));
    }

    proptest! {
        #[test]
        fn eval_is_a_ring_homomorphism(
            a in prop::collection::vec((0u32..3, 0u32..3, -5i64..5), 0..4),
            b in prop::collection::vec((0u32..3, 0u32..3, -5i64..5), 0..4),
            x in -4i64..4, y in -4i64..4,
        ) {
            let mk = |t: &Vec<(u32, u32, i64)>| Polynomial::from_terms(2, t.iter().map(|&(i, j, c)| (Monomial(vec![i, j]), rat(c))));
            let (p, q) = (mk(&a), mk(&b));
            let pt = [rat(x), rat(y)];
            prop_assert_eq!((&p * &q).eval(&pt), p.eval(&pt) * q.eval(&pt));
            prop_assert_eq!((&p + &q).eval(&pt), p.eval(&pt) + q.eval(&pt));
            prop_assert_eq!(p.substitute(&[xy("y"), xy("x")]).eval(&pt), p.eval(&[rat(y), rat(x)]));
        }
    }
}
