//! Equality of polynomially recurrent sequences.
//!
//! For a system with update maps `φ_a` and base point `β`, the value on `w`
//! is `f(w) = φ_{w₁}(⋯φ_{wₙ}(β))`. A polynomial `t` vanishes on every
//! `f(w)` iff every polynomial of the smallest ideal containing `t` and
//! closed under `q ↦ q∘φ_a` vanishes at `β`. That ideal is built as an
//! ascending chain, which stabilizes by Noetherianity.

use crate::error::{Error, Result};
use crate::groebner::{groebner, normal_form, Budget, Ideal};
use crate::poly::{Monomial, MonomialOrder, Polynomial};
use crate::recurrences::{PolynomialSystem, Ring};
use crate::symbol::{Symbol, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Equal,
    /// The shortest, then lexicographically least, word separating the sides.
    NotEqual(Word),
}

fn base_point(sys: &PolynomialSystem) -> Vec<BigRational> {
    sys.base_values()
        .iter()
        .map(|v| BigRational::from_integer(v.clone()))
        .collect()
}

fn update_maps(sys: &PolynomialSystem) -> Vec<Vec<Polynomial>> {
    (0..sys.input().len()).map(|a| sys.update_map(a)).collect()
}

/// True iff `t(f(w)) = 0` for every word `w`.
pub fn vanishes_everywhere(
    sys: &PolynomialSystem,
    t: &Polynomial,
    order: MonomialOrder,
    budget: &Budget,
) -> Result<bool> {
    let n = sys.dimension();
    if t.nvars() > n {
        return Err(Error::Dimension(format!(
            "polynomial in {} variables over a system of dimension {n}",
            t.nvars()
        )));
    }
    let base = base_point(sys);
    let maps = update_maps(sys);
    let mut basis: Vec<Polynomial> = Vec::new();
    let mut queue = VecDeque::from([t.extend(n)]);
    let mut rounds = 0usize;
    while let Some(q) = queue.pop_front() {
        rounds += 1;
        if rounds > budget.max_rounds {
            return Err(Error::Budget(format!(
                "invariant ideal not stable after {} polynomials",
                budget.max_rounds
            )));
        }
        if !q.eval(&base).is_zero() {
            return Ok(false);
        }
        let r = normal_form(&q, &basis, order);
        if r.is_zero() {
            continue;
        }
        let mut gens = basis;
        gens.push(r);
        basis = groebner(&gens, order, budget)?;
        for phi in &maps {
            queue.push_back(q.substitute(phi));
        }
    }
    Ok(true)
}

/// Breadth-first search for the least `w` with `t(f(w)) ≠ 0`.
pub fn minimal_witness(sys: &PolynomialSystem, t: &Polynomial, budget: &Budget) -> Result<Word> {
    let n = sys.dimension();
    let t = t.extend(n);
    let letters = sys.input().len();
    let mut layer: Vec<(Vec<usize>, Vec<BigInt>)> = vec![(Vec::new(), sys.base_values().to_vec())];
    let mut visited = 0usize;
    loop {
        for (w, v) in &layer {
            visited += 1;
            if visited > budget.max_words {
                return Err(Error::Budget(format!(
                    "no witness among the first {} words",
                    budget.max_words
                )));
            }
            let point: Vec<BigRational> = v
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect();
            if !t.eval(&point).is_zero() {
                return Ok(w.iter().map(|&a| sys.input().get(a).clone()).collect());
            }
        }
        let mut next = Vec::with_capacity(layer.len() * letters);
        for a in 0..letters {
            for (w, v) in &layer {
                let mut aw = Vec::with_capacity(w.len() + 1);
                aw.push(a);
                aw.extend_from_slice(w);
                next.push((aw, sys.step(a, v)));
            }
        }
        layer = next;
    }
}

/// Decides whether `t(f(w)) = 0` for all `w`, with a minimal witness otherwise.
pub fn decide_zero(
    sys: &PolynomialSystem,
    t: &Polynomial,
    order: MonomialOrder,
    budget: &Budget,
) -> Result<Decision> {
    if vanishes_everywhere(sys, t, order, budget)? {
        Ok(Decision::Equal)
    } else {
        Ok(Decision::NotEqual(minimal_witness(sys, t, budget)?))
    }
}

/// The two systems side by side over their common input alphabet; indices
/// are renamed `L_i` and `R_i`, left ones first.
pub fn product_system(a: &PolynomialSystem, b: &PolynomialSystem) -> Result<PolynomialSystem> {
    if !a.input().same_letters(b.input()) {
        return Err(Error::AlphabetMismatch(format!(
            "input alphabets {} and {} differ",
            a.input(),
            b.input()
        )));
    }
    let na = a.dimension();
    let n = na + b.dimension();
    let ring = if a.ring() == Ring::Integer || b.ring() == Ring::Integer {
        Ring::Integer
    } else {
        Ring::Natural
    };
    let mut names = Vec::with_capacity(n);
    let mut rules = BTreeMap::new();
    let mut base = BTreeMap::new();
    for (side, sys, offset) in [("L", a, 0usize), ("R", b, na)] {
        let map: Vec<usize> = (offset..offset + sys.dimension()).collect();
        for (k, i) in sys.indices().iter().enumerate() {
            let name = Symbol::new(&format!("{side}_{i}"));
            names.push(name.clone());
            base.insert(name.clone(), sys.base_values()[k].clone());
            for letter in a.input().iter() {
                rules.insert(
                    (name.clone(), letter.clone()),
                    sys.rule(i, letter)?.remap(&map, n),
                );
            }
        }
    }
    PolynomialSystem::new(
        crate::symbol::Alphabet::new(names)?,
        a.input().clone(),
        ring,
        &rules,
        base,
    )
}

/// Decides `a_{ia}(w) = b_{ib}(w)` for every word `w`.
pub fn decide_equal(
    a: &PolynomialSystem,
    ia: &Symbol,
    b: &PolynomialSystem,
    ib: &Symbol,
    order: MonomialOrder,
    budget: &Budget,
) -> Result<Decision> {
    let prod = product_system(a, b)?;
    let n = prod.dimension();
    let t = &Polynomial::var(a.index(ia)?, n) - &Polynomial::var(a.dimension() + b.index(ib)?, n);
    decide_zero(&prod, &t, order, budget)
}

/// `w ↦ (g(w) − h(w)) / (f′(w) − g′(w))` over one polynomial system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionPresentation {
    pub system: PolynomialSystem,
    pub g: Symbol,
    pub h: Symbol,
    pub f_prime: Symbol,
    pub g_prime: Symbol,
}

impl FractionPresentation {
    pub fn new(
        system: PolynomialSystem,
        g: Symbol,
        h: Symbol,
        f_prime: Symbol,
        g_prime: Symbol,
    ) -> Result<Self> {
        for i in [&g, &h, &f_prime, &g_prime] {
            system.index(i)?;
        }
        Ok(FractionPresentation {
            system,
            g,
            h,
            f_prime,
            g_prime,
        })
    }

    /// Numerator and denominator polynomials in the system's variables,
    /// placed at `offset` in a ring with `nvars` variables.
    fn parts(&self, offset: usize, nvars: usize) -> Result<(Polynomial, Polynomial)> {
        let var = |i: &Symbol| -> Result<Polynomial> {
            Ok(Polynomial::var(offset + self.system.index(i)?, nvars))
        };
        Ok((
            &var(&self.g)? - &var(&self.h)?,
            &var(&self.f_prime)? - &var(&self.g_prime)?,
        ))
    }

    pub fn eval(&self, w: &[Symbol]) -> Result<BigRational> {
        let v = self.system.eval_all(w)?;
        let at = |i: &Symbol| -> Result<BigInt> { Ok(v[self.system.index(i)?].clone()) };
        let num = at(&self.g)? - at(&self.h)?;
        let den = at(&self.f_prime)? - at(&self.g_prime)?;
        if den.is_zero() {
            return Err(Error::Domain("denominator vanishes".into()));
        }
        Ok(BigRational::new(num, den))
    }
}

/// Decides equality of two fractions by the zeroness of
/// `(g₁−h₁)(f₂′−g₂′) − (g₂−h₂)(f₁′−g₁′)`. Denominators are assumed nonzero.
pub fn decide_equal_fractions(
    p: &FractionPresentation,
    q: &FractionPresentation,
    order: MonomialOrder,
    budget: &Budget,
) -> Result<Decision> {
    let prod = product_system(&p.system, &q.system)?;
    let n = prod.dimension();
    let (num1, den1) = p.parts(0, n)?;
    let (num2, den2) = q.parts(p.system.dimension(), n)?;
    let t = &(&num1 * &den2) - &(&num2 * &den1);
    decide_zero(&prod, &t, order, budget)
}

/// All monomials of total degree at most `d` in `n` variables, by
/// increasing degree.
pub fn monomials_up_to(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial::one(n)];
    let mut frontier = vec![Monomial::one(n)];
    for _ in 0..d {
        let mut next = BTreeSet::new();
        for m in &frontier {
            for i in 0..n {
                next.insert(m.mul(&Monomial::var(i, n)));
            }
        }
        frontier = next.into_iter().collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Basis of `{v : M v = 0}` for the matrix with the given rows.
pub fn null_space(rows: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigRational>> {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][f].clone();
            }
            v
        })
        .collect()
}

/// Up to `limit` distinct reachable value vectors, in breadth-first order
/// from the base point.
pub fn reachable_points(
    sys: &PolynomialSystem,
    limit: usize,
    budget: &Budget,
) -> Result<Vec<Vec<BigInt>>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([sys.base_values().to_vec()]);
    let mut visited = 0usize;
    while let Some(v) = queue.pop_front() {
        if out.len() >= limit {
            break;
        }
        if !seen.insert(v.clone()) {
            continue;
        }
        visited += 1;
        if visited > budget.max_words {
            return Err(Error::Budget("reachable-point sampling exhausted".into()));
        }
        for a in 0..sys.input().len() {
            queue.push_back(sys.step(a, &v));
        }
        out.push(v);
    }
    Ok(out)
}

/// Vanishing ideal of the reachable set, restricted to generators of total
/// degree at most `max_degree`.
///
/// Candidates are the kernel of the evaluation matrix at sampled reachable
/// points; each is then proved to vanish on the whole reachable set, and a
/// failed proof contributes its witness as a new sample point. The result
/// is the exact degree-bounded part of the vanishing ideal, so it is the
/// full vanishing ideal whenever that is generated in degree `≤ max_degree`.
pub fn zariski_closure(
    sys: &PolynomialSystem,
    max_degree: u32,
    order: MonomialOrder,
    budget: &Budget,
) -> Result<Ideal> {
    let n = sys.dimension();
    let monomials = monomials_up_to(n, max_degree);
    let mut points = reachable_points(sys, 2 * monomials.len() + 4, budget)?;
    let mut rounds = 0usize;
    'refine: loop {
        rounds += 1;
        if rounds > budget.max_rounds {
            return Err(Error::Budget("closure refinement did not converge".into()));
        }
        let rows: Vec<Vec<BigRational>> = points
            .iter()
            .map(|p| {
                let q: Vec<BigRational> = p
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect();
                monomials
                    .iter()
                    .map(|m| Polynomial::from_terms(n, [(m.clone(), BigRational::one())]).eval(&q))
                    .collect()
            })
            .collect();
        let kernel: Vec<Polynomial> = null_space(&rows, monomials.len())
            .into_iter()
            .map(|v| Polynomial::from_terms(n, monomials.iter().cloned().zip(v)))
            .collect();
        for p in &kernel {
            if let Decision::NotEqual(w) = decide_zero(sys, p, order, budget)? {
                let point = sys.eval_all(&w)?;
                debug_assert!(!points.contains(&point));
                points.push(point);
                continue 'refine;
            }
        }
        return Ideal::with_budget(n, kernel, order, budget);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{power, Alphabet};

    pub(crate) fn system(
        vars: &[&str],
        ring: Ring,
        rules: &[(&str, &str)],
        base: &[i64],
    ) -> PolynomialSystem {
        let mut map = BTreeMap::new();
        for (v, r) in vars.iter().zip(rules) {
            for (letter, rhs) in [("a", r.0), ("b", r.1)] {
                if !rhs.is_empty() {
                    map.insert(
                        (Symbol::new(v), Symbol::new(letter)),
                        Polynomial::parse(rhs, vars).unwrap(),
                    );
                }
            }
        }
        let letters = if rules.iter().any(|r| !r.1.is_empty()) {
            "a b"
        } else {
            "a"
        };
        let base = vars
            .iter()
            .zip(base)
            .map(|(v, b)| (Symbol::new(v), BigInt::from(*b)))
            .collect();
        PolynomialSystem::new(
            Alphabet::new(vars.iter().copied()).unwrap(),
            Alphabet::parse(letters).unwrap(),
            ring,
            &map,
            base,
        )
        .unwrap()
    }

    fn fib_pair(f1: i64) -> PolynomialSystem {
        system(
            &["F", "G"],
            Ring::Natural,
            &[("G", ""), ("F + G", "")],
            &[1, f1],
        )
    }

    fn fib_triple() -> PolynomialSystem {
        system(
            &["F", "G", "H"],
            Ring::Natural,
            &[("G", ""), ("H", ""), ("2*G + F", "")],
            &[1, 1, 2],
        )
    }

    fn d() -> Budget {
        Budget::default()
    }

    const G: MonomialOrder = MonomialOrder::GrevLex;

    #[test]
    fn fibonacci_presentations() {
        let f = Symbol::new("F");
        assert_eq!(
            decide_equal(&fib_pair(1), &f, &fib_triple(), &f, G, &d()).unwrap(),
            Decision::Equal
        );
        assert_eq!(
            decide_equal(&fib_pair(1), &f, &fib_pair(2), &f, G, &d()).unwrap(),
            Decision::NotEqual(vec!["a".into()])
        );
        assert_eq!(
            decide_equal(
                &fib_triple(),
                &"H".into(),
                &fib_triple(),
                &"H".into(),
                G,
                &d()
            )
            .unwrap(),
            Decision::Equal
        );
    }

    #[test]
    fn fraction_examples() {
        // (2^(n+1) − 2^n) / (2 − 1) against 2^n / 1.
        let p = system(
            &["P", "Q", "T", "O"],
            Ring::Natural,
            &[("2*P", ""), ("2*Q", ""), ("T", ""), ("O", "")],
            &[2, 1, 2, 1],
        );
        let p =
            FractionPresentation::new(p, "P".into(), "Q".into(), "T".into(), "O".into()).unwrap();
        let q = system(
            &["P", "Z", "T", "O"],
            Ring::Natural,
            &[("2*P", ""), ("Z", ""), ("T", ""), ("O", "")],
            &[1, 0, 1, 0],
        );
        let q =
            FractionPresentation::new(q, "P".into(), "Z".into(), "T".into(), "O".into()).unwrap();
        let a = Symbol::new("a");
        for n in 0..=20 {
            assert_eq!(
                p.eval(&power(&a, n)).unwrap(),
                BigRational::from_integer(BigInt::from(2).pow(n as u32))
            );
        }
        assert_eq!(
            decide_equal_fractions(&p, &q, G, &d()).unwrap(),
            Decision::Equal
        );
        assert_eq!(
            decide_equal_fractions(&p, &p, G, &d()).unwrap(),
            Decision::Equal
        );

        // n^2 + 1 against n + 1 differ first at n = 2.
        let sq = system(
            &["N", "S", "U", "O"],
            Ring::Natural,
            &[("N + 1", ""), ("S + 2*N + 1", ""), ("U", ""), ("O", "")],
            &[0, 1, 1, 0],
        );
        let sq =
            FractionPresentation::new(sq, "S".into(), "O".into(), "U".into(), "O".into()).unwrap();
        let lin = system(
            &["N", "S", "U", "O"],
            Ring::Natural,
            &[("N + 1", ""), ("S + 1", ""), ("U", ""), ("O", "")],
            &[0, 1, 1, 0],
        );
        let lin =
            FractionPresentation::new(lin, "S".into(), "O".into(), "U".into(), "O".into()).unwrap();
        assert_eq!(
            decide_equal_fractions(&sq, &lin, G, &d()).unwrap(),
            Decision::NotEqual(power(&a, 2))
        );
    }

    #[test]
    fn closures() {
        let constant = system(&["X"], Ring::Natural, &[("X", "")], &[3]);
        let j = zariski_closure(&constant, 2, G, &d()).unwrap();
        assert!(j.same_as(
            &Ideal::new(1, vec![Polynomial::parse("X - 3", &["X"]).unwrap()], G).unwrap()
        ));

        let doubling = system(&["X"], Ring::Natural, &[("2*X", "")], &[1]);
        assert!(zariski_closure(&doubling, 3, G, &d()).unwrap().is_zero());

        let square = system(&["X"], Ring::Natural, &[("X^2", "")], &[1]);
        let j = zariski_closure(&square, 2, G, &d()).unwrap();
        assert!(j.same_as(
            &Ideal::new(1, vec![Polynomial::parse("X - 1", &["X"]).unwrap()], G).unwrap()
        ));

        let fib = fib_triple();
        let j = zariski_closure(&fib, 1, G, &d()).unwrap();
        assert!(j.contains(&Polynomial::parse("H - G - F", &["F", "G", "H"]).unwrap()));
        // F_{n+1}^2 − F_n F_{n+1} − F_n^2 = ±1 is a degree-2 invariant of the pair.
        let j = zariski_closure(&fib_pair(1), 4, G, &d()).unwrap();
        assert!(j.contains(&Polynomial::parse("(G^2 - F*G - F^2)^2 - 1", &["F", "G"]).unwrap()));
    }

    #[test]
    fn null_spaces() {
        let r = |xs: &[i64]| {
            xs.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect::<Vec<_>>()
        };
        let k = null_space(&[r(&[1, 2, 3]), r(&[2, 4, 6])], 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let dot: BigRational = v.iter().zip(r(&[1, 2, 3])).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
        assert!(null_space(&[r(&[1, 0]), r(&[0, 1])], 2).is_empty());
        assert_eq!(null_space(&[], 2).len(), 2);
    }

    #[test]
    fn budget_errors_are_explicit() {
        let tiny = Budget {
            max_rounds: 1,
            ..Budget::default()
        };
        let f = Symbol::new("F");
        assert!(matches!(
            decide_equal(&fib_pair(1), &f, &fib_triple(), &f, G, &tiny),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let two = system(&["X"], Ring::Natural, &[("X", "X")], &[1]);
        assert!(matches!(
            decide_equal(&two, &"X".into(), &fib_pair(1), &"F".into(), G, &d()),
            Err(Error::AlphabetMismatch(_))
        ));
    }
}
