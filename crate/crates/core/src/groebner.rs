//! Buchberger's algorithm over ℚ, normal forms, elimination and ideal
//! intersection.

use crate::error::{Error, Result};
use crate::poly::{Monomial, MonomialOrder, Polynomial};
use num_rational::BigRational;
use num_traits::One;
use std::collections::BTreeSet;

/// Resource limits. Exceeding one yields [`Error::Budget`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest intermediate basis.
    pub max_basis: usize,
    /// Most S-pairs reduced in one basis computation.
    pub max_pairs: usize,
    /// Most polynomials processed by a fixpoint or zeroness loop.
    pub max_rounds: usize,
    /// Most words visited by a witness search or point sampler.
    pub max_words: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_basis: 1_000,
            max_pairs: 200_000,
            max_rounds: 10_000,
            max_words: 2_000_000,
        }
    }
}

impl Budget {
    /// Scales every limit by `n / 1000` of the default, at least 1.
    pub fn scaled(n: usize) -> Self {
        let d = Budget::default();
        let s = |x: usize| (x.saturating_mul(n) / 1000).max(1);
        Budget {
            max_basis: s(d.max_basis),
            max_pairs: s(d.max_pairs),
            max_rounds: s(d.max_rounds),
            max_words: s(d.max_words),
        }
    }
}

fn leading_term(p: &Polynomial, order: MonomialOrder) -> (Monomial, BigRational) {
    let (m, c) = p.leading(order).expect("nonzero polynomial");
    (m.clone(), c.clone())
}

/// Remainder of full multivariate division of `p` by `basis`.
pub fn normal_form(p: &Polynomial, basis: &[Polynomial], order: MonomialOrder) -> Polynomial {
    let n = basis
        .iter()
        .map(Polynomial::nvars)
        .fold(p.nvars(), usize::max);
    let leads: Vec<(Monomial, BigRational, Polynomial)> = basis
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| {
            let g = g.extend(n);
            let (m, c) = leading_term(&g, order);
            (m, c, g)
        })
        .collect();
    let mut rest = p.extend(n);
    let mut remainder = Vec::new();
    while !rest.is_zero() {
        let (m, c) = leading_term(&rest, order);
        match leads.iter().find(|(lm, _, _)| lm.divides(&m)) {
            Some((lm, lc, g)) => {
                let q = lm.quotient_of(&m);
                rest = &rest - &g.mul_monomial(&q, &(&c / lc));
            }
            None => {
                rest = &rest - &Polynomial::from_terms(n, [(m.clone(), c.clone())]);
                remainder.push((m, c));
            }
        }
    }
    Polynomial::from_terms(n, remainder)
}

pub fn s_polynomial(f: &Polynomial, g: &Polynomial, order: MonomialOrder) -> Polynomial {
    let (mf, cf) = leading_term(f, order);
    let (mg, cg) = leading_term(g, order);
    let l = mf.lcm(&mg);
    &f.mul_monomial(&mf.quotient_of(&l), &cf.recip())
        - &g.mul_monomial(&mg.quotient_of(&l), &cg.recip())
}

/// True when every S-polynomial of `basis` reduces to zero over it.
pub fn is_groebner(basis: &[Polynomial], order: MonomialOrder) -> bool {
    let nonzero: Vec<&Polynomial> = basis.iter().filter(|p| !p.is_zero()).collect();
    let owned: Vec<Polynomial> = nonzero.iter().map(|p| (*p).clone()).collect();
    for i in 0..nonzero.len() {
        for j in i + 1..nonzero.len() {
            if !normal_form(&s_polynomial(nonzero[i], nonzero[j], order), &owned, order).is_zero() {
                return false;
            }
        }
    }
    true
}

/// Reduced Gröbner basis of the ideal generated by `gens`, sorted by
/// decreasing leading monomial. The zero ideal has the empty basis.
pub fn groebner(
    gens: &[Polynomial],
    order: MonomialOrder,
    budget: &Budget,
) -> Result<Vec<Polynomial>> {
    let n = gens.iter().map(Polynomial::nvars).max().unwrap_or(0);
    let mut basis: Vec<Polynomial> = Vec::new();
    let mut leads: Vec<Monomial> = Vec::new();
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut processed = 0usize;

    let add = |p: Polynomial,
               basis: &mut Vec<Polynomial>,
               leads: &mut Vec<Monomial>,
               pairs: &mut BTreeSet<(usize, usize)>|
     -> Result<()> {
        let p = p.monic(order);
        let idx = basis.len();
        for i in 0..idx {
            pairs.insert((i, idx));
        }
        leads.push(p.leading_monomial(order).expect("nonzero").clone());
        basis.push(p);
        if basis.len() > budget.max_basis {
            return Err(Error::Budget(format!(
                "Gröbner basis exceeded {} elements",
                budget.max_basis
            )));
        }
        Ok(())
    };

    for g in gens {
        let r = normal_form(&g.extend(n), &basis, order);
        if !r.is_zero() {
            if r.is_constant() {
                return Ok(vec![Polynomial::one(n)]);
            }
            add(r, &mut basis, &mut leads, &mut pairs)?;
        }
    }

    while let Some(&(i, j)) = pairs.iter().min_by(|a, b| {
        let la = leads[a.0].lcm(&leads[a.1]);
        let lb = leads[b.0].lcm(&leads[b.1]);
        order.cmp(&la, &lb).then_with(|| a.cmp(b))
    }) {
        pairs.remove(&(i, j));
        if leads[i].coprime(&leads[j]) {
            continue;
        }
        let l = leads[i].lcm(&leads[j]);
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && leads[k].divides(&l)
                && !pairs.contains(&(i.min(k), i.max(k)))
                && !pairs.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }
        processed += 1;
        if processed > budget.max_pairs {
            return Err(Error::Budget(format!(
                "Gröbner computation exceeded {} S-pair reductions",
                budget.max_pairs
            )));
        }
        let r = normal_form(&s_polynomial(&basis[i], &basis[j], order), &basis, order);
        if !r.is_zero() {
            if r.is_constant() {
                return Ok(vec![Polynomial::one(n)]);
            }
            add(r, &mut basis, &mut leads, &mut pairs)?;
        }
    }
    Ok(reduce_basis(basis, order))
}

fn reduce_basis(basis: Vec<Polynomial>, order: MonomialOrder) -> Vec<Polynomial> {
    let mut minimal: Vec<Polynomial> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let lg = g.leading_monomial(order).expect("nonzero");
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            let lh = h.leading_monomial(order).expect("nonzero");
            j != i && lh.divides(lg) && (lh != lg || j < i)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut reduced: Vec<Polynomial> = (0..minimal.len())
        .map(|i| {
            let others: Vec<Polynomial> = minimal
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, h)| h.clone())
                .collect();
            let (m, c) = leading_term(&minimal[i], order);
            let tail = &minimal[i] - &Polynomial::from_terms(minimal[i].nvars(), [(m.clone(), c)]);
            let tail = normal_form(&tail, &others, order);
            (&Polynomial::from_terms(minimal[i].nvars(), [(m, BigRational::one())])
                + &tail.scale(&minimal[i].leading(order).expect("nonzero").1.recip()))
                .monic(order)
        })
        .collect();
    reduced.sort_by(|a, b| {
        order.cmp(
            b.leading_monomial(order).expect("nonzero"),
            a.leading_monomial(order).expect("nonzero"),
        )
    });
    reduced
}

/// A polynomial ideal with its reduced Gröbner basis for a fixed order.
#[derive(Clone, Debug)]
pub struct Ideal {
    nvars: usize,
    generators: Vec<Polynomial>,
    order: MonomialOrder,
    basis: Vec<Polynomial>,
}

impl Ideal {
    pub fn new(nvars: usize, generators: Vec<Polynomial>, order: MonomialOrder) -> Result<Self> {
        Ideal::with_budget(nvars, generators, order, &Budget::default())
    }

    pub fn with_budget(
        nvars: usize,
        generators: Vec<Polynomial>,
        order: MonomialOrder,
        budget: &Budget,
    ) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.nvars() > nvars) {
            return Err(Error::Dimension(format!(
                "generator {g} has {} variables, ideal has {nvars}",
                g.nvars()
            )));
        }
        let generators: Vec<Polynomial> = generators.iter().map(|g| g.extend(nvars)).collect();
        let basis = groebner(&generators, order, budget)?
            .into_iter()
            .map(|g| g.extend(nvars))
            .collect();
        Ok(Ideal {
            nvars,
            generators,
            order,
            basis,
        })
    }

    pub fn zero(nvars: usize) -> Self {
        Ideal {
            nvars,
            generators: Vec::new(),
            order: MonomialOrder::default(),
            basis: Vec::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn basis(&self) -> &[Polynomial] {
        &self.basis
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn normal_form(&self, p: &Polynomial) -> Polynomial {
        normal_form(p, &self.basis, self.order)
    }

    pub fn contains(&self, p: &Polynomial) -> bool {
        self.normal_form(p).is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.basis.iter().any(|g| g.is_constant() && !g.is_zero())
    }

    /// Mutual containment of generators.
    pub fn same_as(&self, other: &Ideal) -> bool {
        self.nvars == other.nvars
            && other.generators.iter().all(|g| self.contains(g))
            && self.generators.iter().all(|g| other.contains(g))
    }

    pub fn with_order(&self, order: MonomialOrder, budget: &Budget) -> Result<Ideal> {
        Ideal::with_budget(self.nvars, self.generators.clone(), order, budget)
    }
}

/// `I ∩ K[remaining variables]`, the result living in the ring of the
/// remaining variables in their original relative order.
pub fn eliminate(ideal: &Ideal, drop: &[usize], budget: &Budget) -> Result<Ideal> {
    let n = ideal.nvars;
    let drop: BTreeSet<usize> = drop.iter().copied().collect();
    if let Some(&bad) = drop.iter().find(|&&i| i >= n) {
        return Err(Error::Dimension(format!("no variable {bad} among {n}")));
    }
    let keep: Vec<usize> = (0..n).filter(|i| !drop.contains(i)).collect();
    if drop.is_empty() {
        return Ok(ideal.clone());
    }
    let mut to_front = vec![0; n];
    for (pos, &i) in drop.iter().chain(&keep).enumerate() {
        to_front[i] = pos;
    }
    let block = drop.len();
    let order = MonomialOrder::Elimination { block };
    let permuted: Vec<Polynomial> = ideal
        .generators
        .iter()
        .map(|g| g.remap(&to_front, n))
        .collect();
    let basis = groebner(&permuted, order, budget)?;
    let back: Vec<usize> = (0..n).map(|pos| pos.saturating_sub(block)).collect();
    let kept: Vec<Polynomial> = basis
        .into_iter()
        .filter(|g| (0..block).all(|i| !g.uses_var(i)))
        .map(|g| g.extend(n).remap(&back, n).truncate(keep.len()))
        .collect();
    Ideal::with_budget(keep.len(), kept, ideal.order, budget)
}

/// `I ∩ J` via `t·I + (1−t)·J` and elimination of `t`.
pub fn intersect(a: &Ideal, b: &Ideal, budget: &Budget) -> Result<Ideal> {
    if a.nvars != b.nvars {
        return Err(Error::Dimension(format!(
            "intersecting ideals in {} and {} variables",
            a.nvars, b.nvars
        )));
    }
    let n = a.nvars;
    let shift: Vec<usize> = (1..=n).collect();
    let t = Polynomial::var(0, n + 1);
    let one_minus_t = &Polynomial::one(n + 1) - &t;
    let mut gens: Vec<Polynomial> = a
        .generators
        .iter()
        .map(|g| &t * &g.remap(&shift, n + 1))
        .collect();
    gens.extend(
        b.generators
            .iter()
            .map(|g| &one_minus_t * &g.remap(&shift, n + 1)),
    );
    let lifted = Ideal::with_budget(n + 1, gens, a.order, budget)?;
    let mut out = eliminate(&lifted, &[0], budget)?;
    out.order = a.order;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Polynomial {
        Polynomial::parse(text, &["x", "y", "z"]).unwrap()
    }

    fn ideal(gens: &[&str]) -> Ideal {
        Ideal::new(
            3,
            gens.iter().map(|g| p(g)).collect(),
            MonomialOrder::GrevLex,
        )
        .unwrap()
    }

    #[test]
    fn trivial_bases() {
        let b = Budget::default();
        assert_eq!(
            groebner(&[p("x")], MonomialOrder::GrevLex, &b).unwrap(),
            vec![p("x")]
        );
        assert_eq!(
            groebner(&[p("1")], MonomialOrder::GrevLex, &b).unwrap(),
            vec![p("1")]
        );
        assert!(groebner(&[p("0")], MonomialOrder::GrevLex, &b)
            .unwrap()
            .is_empty());
        assert!(groebner(&[p("2*x + 4")], MonomialOrder::Lex, &b).unwrap() == vec![p("x + 2")]);
    }

    #[test]
    fn textbook_basis() {
        for order in [MonomialOrder::GrevLex, MonomialOrder::Lex] {
            let g = groebner(&[p("x^2 - y"), p("x^3 - x")], order, &Budget::default()).unwrap();
            assert!(is_groebner(&g, order));
            for member in ["x^2 - y", "x^3 - x", "x*y - x", "y^2 - y"] {
                assert!(
                    normal_form(&p(member), &g, order).is_zero(),
                    "{member} under {order:?}"
                );
            }
            assert!(!normal_form(&p("y"), &g, order).is_zero());
        }
    }

    #[test]
    fn memberships() {
        assert!(ideal(&["x"]).contains(&p("x^2")));
        assert!(!ideal(&["x", "y"]).contains(&p("1")));
        let i = ideal(&["x^2 - y"]);
        assert_eq!(i.normal_form(&p("y")), p("y"));
        assert!(!i.contains(&p("y")));
        assert!(ideal(&["x", "1 - x"]).is_unit());
    }

    #[test]
    fn elimination() {
        let b = Budget::default();
        let i = ideal(&["y - x^2", "z - x^3"]);
        let e = eliminate(&i, &[0], &b).unwrap();
        assert_eq!(e.nvars(), 2);
        assert!(e.contains(&Polynomial::parse("z^2 - y^3", &["y", "z"]).unwrap()));
        assert!(!e.contains(&Polynomial::parse("z - y", &["y", "z"]).unwrap()));
        assert!(eliminate(&i, &[], &b).unwrap().same_as(&i));
        let x = Ideal::new(1, vec![Polynomial::var(0, 1)], MonomialOrder::GrevLex).unwrap();
        assert!(eliminate(&x, &[0], &b).unwrap().is_zero());
    }

    #[test]
    fn intersection() {
        let b = Budget::default();
        let xi = ideal(&["x"]);
        let yi = ideal(&["y"]);
        let both = intersect(&xi, &yi, &b).unwrap();
        assert!(both.same_as(&ideal(&["x*y"])));
        let i = ideal(&["x^2 - y", "z"]);
        assert!(intersect(&i, &i, &b).unwrap().same_as(&i));
        assert!(intersect(&i, &ideal(&["1"]), &b).unwrap().same_as(&i));
    }

    #[test]
    fn budget_is_enforced() {
        let tiny = Budget {
            max_basis: 1,
            ..Budget::default()
        };
        assert!(matches!(
            groebner(&[p("x^2 - y"), p("x^3 - x")], MonomialOrder::GrevLex, &tiny),
            Err(Error::Budget(_))
        ));
    }
}
