//! Conversions between representations.
//!
//! Catenative systems and HDT0L systems are interchangeable; a
//! compositional system is a DT0L system over its index set followed by an
//! HDT0L system; a unary-output HDT0L system has a linear representation;
//! and a DT0L system followed by a linear representation is a polynomial
//! system in the entries of the matrix images.

use crate::error::{Error, Result};
use crate::morphisms::{Hdt0lSystem, Homomorphism, LinearRepresentation};
use crate::poly::{Monomial, Polynomial};
use crate::recurrences::{
    CatenativeSystem, CompositionalSystem, PolynomialSystem, Ring, RuleTable,
};
use crate::symbol::{Alphabet, Symbol, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// `C := I`, `H^a(i) := α(i,a,·)`, `h(i) := f_i(ε)`, seed `i0`.
pub fn catenative_to_hdt0l(sys: &CatenativeSystem, i0: &Symbol) -> Result<Hdt0lSystem> {
    sys.table().index(i0)?;
    let working = sys.indices().clone();
    let tables = sys
        .input()
        .iter()
        .map(|a| {
            let images = working
                .iter()
                .map(|i| sys.table().rule(i, a))
                .collect::<Result<Vec<_>>>()?;
            Homomorphism::new(working.clone(), working.clone(), images)
        })
        .collect::<Result<Vec<_>>>()?;
    let final_map = Homomorphism::new(
        working.clone(),
        sys.output().clone(),
        sys.base_values().to_vec(),
    )?;
    Hdt0lSystem::new(sys.input().clone(), working, tables, final_map, i0.clone())
}

/// `f_V(ε) := h(V)`, rule `(V, a) ↦ H^a(V)`. The sequence of the original
/// system is `f_c` for the returned seed `c`.
pub fn hdt0l_to_catenative(sys: &Hdt0lSystem) -> Result<(CatenativeSystem, Symbol)> {
    let mut rules = BTreeMap::new();
    for (a, table) in sys.input().iter().zip(sys.tables()) {
        for (v, image) in sys.working().iter().zip(table.images()) {
            rules.insert((v.clone(), a.clone()), image.clone());
        }
    }
    let table = RuleTable::new(sys.working().clone(), sys.input().clone(), &rules)?;
    let base = sys
        .working()
        .iter()
        .zip(sys.final_map().images())
        .map(|(v, w)| (v.clone(), w.clone()))
        .collect();
    Ok((
        CatenativeSystem::new(table, sys.output().clone(), base)?,
        sys.seed().clone(),
    ))
}

/// `w ↦ h(g_{i0}(w))` for a DT0L sequence `g` and an HDT0L sequence `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level3Mapping {
    inner: CatenativeSystem,
    index: Symbol,
    outer: Hdt0lSystem,
}

impl Level3Mapping {
    pub fn inner(&self) -> &CatenativeSystem {
        &self.inner
    }

    pub fn index(&self) -> &Symbol {
        &self.index
    }

    pub fn outer(&self) -> &Hdt0lSystem {
        &self.outer
    }

    pub fn input(&self) -> &Alphabet {
        self.inner.input()
    }

    /// The intermediate word `g_{i0}(w)`.
    pub fn stage(&self, w: &[Symbol]) -> Result<Word> {
        self.inner.eval(&self.index, w)
    }

    pub fn eval(&self, w: &[Symbol]) -> Result<Word> {
        self.outer.eval(&self.stage(w)?)
    }
}

pub fn compose_level3(g: &CatenativeSystem, i0: &Symbol, h: &Hdt0lSystem) -> Result<Level3Mapping> {
    g.table().index(i0)?;
    if !g.output().same_letters(h.input()) {
        return Err(Error::AlphabetMismatch(format!(
            "inner output {} differs from outer input {}",
            g.output(),
            h.input()
        )));
    }
    Ok(Level3Mapping {
        inner: g.clone(),
        index: i0.clone(),
        outer: h.clone(),
    })
}

/// Splits `w ↦ h(H_i(w)(c))` into the DT0L sequence `g_i` over `I`, with
/// `g_j(ε) = j` and the rules of `sys`, and the HDT0L system with tables
/// `H^j = H_j(ε)`.
pub fn compositional_to_level3(
    sys: &CompositionalSystem,
    i: &Symbol,
    final_map: &Homomorphism,
    seed: &Symbol,
) -> Result<Level3Mapping> {
    let indices = sys.indices().clone();
    let base = indices
        .iter()
        .map(|j| (j.clone(), vec![j.clone()]))
        .collect();
    let g = CatenativeSystem::new(sys.table().clone(), indices.clone(), base)?;
    let h = Hdt0lSystem::new(
        indices,
        sys.working().clone(),
        sys.base_values().to_vec(),
        final_map.clone(),
        seed.clone(),
    )?;
    compose_level3(&g, i, &h)
}

/// `M_a := incidence(H^a)`, `L0 := e_c`, `C0[V] := |h(V)|`, so that the
/// series value is the length of the HDT0L output.
pub fn unary_lowering(sys: &Hdt0lSystem) -> Result<LinearRepresentation> {
    if sys.output().len() != 1 {
        return Err(Error::Domain(format!(
            "unary lowering needs a one-letter output alphabet, got {}",
            sys.output()
        )));
    }
    let d = sys.working().len();
    let mut initial = vec![BigInt::zero(); d];
    initial[sys.working().position(sys.seed())?] = BigInt::one();
    let terminal = sys
        .final_map()
        .images()
        .iter()
        .map(|w| BigInt::from(w.len()))
        .collect();
    let matrices = sys.tables().iter().map(Homomorphism::incidence).collect();
    LinearRepresentation::new(sys.input().clone(), initial, matrices, terminal)
}

/// Output of [`series_to_polynomial_system`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoweredSeries {
    /// Variables `u_{i,k,l}` in the order `(i, k, l)`, then `out`.
    pub system: PolynomialSystem,
    /// `K(u) = L0 · U_{i0} · C0`, a linear form in the matrix variables.
    pub output_form: Polynomial,
    /// The index whose value equals `K(u(w))`.
    pub output: Symbol,
    pub dimension: usize,
}

fn matrix_variable(i: usize, k: usize, l: usize, d: usize) -> usize {
    i * d * d + k * d + l
}

/// Polynomial system for `w ↦ rep(g_{i0}(w))`, with variables the entries
/// `u_{i,k,l}(w)` of the matrix images `M(g_i(w))` plus an output index.
pub fn series_to_polynomial_system(
    g: &CatenativeSystem,
    i0: &Symbol,
    rep: &LinearRepresentation,
) -> Result<LoweredSeries> {
    if !g.output().same_letters(rep.alphabet()) {
        return Err(Error::Dimension(format!(
            "inner output {} differs from the representation alphabet {}",
            g.output(),
            rep.alphabet()
        )));
    }
    let ni = g.indices().len();
    let d = rep.dimension();
    let nvars = ni * d * d + 1;
    let mut names: Vec<Symbol> = Vec::with_capacity(nvars);
    for i in g.indices().iter() {
        for k in 1..=d {
            for l in 1..=d {
                names.push(Symbol::new(&format!("u_{i}_{k}_{l}")));
            }
        }
    }
    let out = Symbol::new("out");
    if names.contains(&out) {
        return Err(Error::InvalidSystem("index name clash on `out`".into()));
    }
    names.push(out.clone());

    let symbolic = |i: usize| -> Vec<Vec<Polynomial>> {
        (0..d)
            .map(|k| {
                (0..d)
                    .map(|l| Polynomial::var(matrix_variable(i, k, l, d), nvars))
                    .collect()
            })
            .collect()
    };
    let i0_pos = g.table().index(i0)?;
    let weights: Vec<(usize, BigRational)> = (0..d)
        .flat_map(|k| (0..d).map(move |l| (k, l)))
        .filter_map(|(k, l)| {
            let c = &rep.initial()[k] * &rep.terminal()[l];
            (!c.is_zero()).then(|| {
                (
                    matrix_variable(i0_pos, k, l, d),
                    BigRational::from_integer(c),
                )
            })
        })
        .collect();
    let output_form = Polynomial::from_terms(
        nvars,
        weights
            .iter()
            .map(|(v, c)| (Monomial::var(*v, nvars), c.clone())),
    );

    let mut rules = BTreeMap::new();
    for (ai, a) in g.input().iter().enumerate() {
        let mut products = Vec::with_capacity(ni);
        for i in 0..ni {
            let mut acc = identity_matrix(d, nvars);
            for &j in g.table().rhs(i, ai) {
                acc = matrix_product(&acc, &symbolic(j), nvars);
            }
            for k in 0..d {
                for l in 0..d {
                    rules.insert(
                        (names[matrix_variable(i, k, l, d)].clone(), a.clone()),
                        acc[k][l].clone(),
                    );
                }
            }
            products.push(acc);
        }
        let images: Vec<Polynomial> = (0..nvars - 1)
            .map(|v| products[v / (d * d)][(v % (d * d)) / d][v % d].clone())
            .chain(std::iter::once(Polynomial::var(nvars - 1, nvars)))
            .collect();
        rules.insert((out.clone(), a.clone()), output_form.substitute(&images));
    }

    let mut base = BTreeMap::new();
    let mut out_base = BigInt::zero();
    for (i, gi) in g.indices().iter().zip(g.base_values()) {
        let m = rep.word_matrix(gi)?;
        for k in 0..d {
            for l in 0..d {
                base.insert(
                    Symbol::new(&format!("u_{i}_{k1}_{l1}", k1 = k + 1, l1 = l + 1)),
                    m[(k, l)].clone(),
                );
            }
        }
        if i == i0 {
            out_base = crate::matrix::dot(&m.left_apply(rep.initial())?, rep.terminal());
        }
    }
    base.insert(out.clone(), out_base);
    let system = PolynomialSystem::new(
        Alphabet::new(names)?,
        g.input().clone(),
        Ring::Natural,
        &rules,
        base,
    )?;
    Ok(LoweredSeries {
        system,
        output_form,
        output: out,
        dimension: d,
    })
}

fn identity_matrix(d: usize, nvars: usize) -> Vec<Vec<Polynomial>> {
    (0..d)
        .map(|k| {
            (0..d)
                .map(|l| {
                    if k == l {
                        Polynomial::one(nvars)
                    } else {
                        Polynomial::zero(nvars)
                    }
                })
                .collect()
        })
        .collect()
}

fn matrix_product(
    a: &[Vec<Polynomial>],
    b: &[Vec<Polynomial>],
    nvars: usize,
) -> Vec<Vec<Polynomial>> {
    let d = a.len();
    (0..d)
        .map(|k| {
            (0..d)
                .map(|l| {
                    (0..d).fold(Polynomial::zero(nvars), |acc, m| {
                        &acc + &(&a[k][m] * &b[m][l])
                    })
                })
                .collect()
        })
        .collect()
}

/// Product construction `W(n) = ∏_{i=0}^{n} (u(i) − v(i))` for unary linear
/// systems, returned over ℤ with indices `u_*`, `v_*` and `w`.
pub fn skolem_product_system(
    u: &PolynomialSystem,
    iu: &Symbol,
    v: &PolynomialSystem,
    iv: &Symbol,
) -> Result<PolynomialSystem> {
    for (name, sys) in [("u", u), ("v", v)] {
        if sys.input().len() != 1 {
            return Err(Error::Domain(format!(
                "{name} must be over a one-letter alphabet"
            )));
        }
        if !sys.is_linear() {
            return Err(Error::Domain(format!("{name} must be linear")));
        }
    }
    if !u.input().same_letters(v.input()) {
        return Err(Error::AlphabetMismatch(
            "u and v read different letters".into(),
        ));
    }
    let a = u.input().get(0).clone();
    let nu = u.dimension();
    let nv = v.dimension();
    let n = nu + nv + 1;
    let mut names = Vec::with_capacity(n);
    let mut rules = BTreeMap::new();
    let mut base = BTreeMap::new();
    let mut next = Vec::with_capacity(2);
    for (side, sys, offset, idx) in [("u", u, 0usize, iu), ("v", v, nu, iv)] {
        let map: Vec<usize> = (offset..offset + sys.dimension()).collect();
        for (k, i) in sys.indices().iter().enumerate() {
            let name = Symbol::new(&format!("{side}_{i}"));
            names.push(name.clone());
            base.insert(name.clone(), sys.base_values()[k].clone());
            rules.insert((name, a.clone()), sys.rule(i, &a)?.remap(&map, n));
        }
        next.push(sys.rule(idx, &a)?.remap(&map, n));
    }
    let w = Symbol::new("w");
    names.push(w.clone());
    let wvar = Polynomial::var(n - 1, n);
    rules.insert((w.clone(), a), &wvar * &(&next[0] - &next[1]));
    let w0 = u.base_values()[u.index(iu)?].clone() - v.base_values()[v.index(iv)?].clone();
    base.insert(w, w0);
    PolynomialSystem::new(
        Alphabet::new(names)?,
        u.input().clone(),
        Ring::Integer,
        &rules,
        base,
    )
}

/// Smallest `n ≤ bound` with `W(n) = 0` in a product system, if any.
pub fn first_zero(product: &PolynomialSystem, bound: usize) -> Result<Option<usize>> {
    let w = product.index(&Symbol::new("w"))?;
    let mut values = product.base_values().to_vec();
    for n in 0..=bound {
        if values[w].is_zero() {
            return Ok(Some(n));
        }
        values = product.step(0, &values);
    }
    Ok(None)
}
