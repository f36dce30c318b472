//! Word homomorphisms, HDT0L systems and linear representations.
//!
//! Composition follows the left-to-right convention: `compose(f, g)` applies
//! `f` first, so `compose(f, g)(z) = g(f(z))`. HDT0L images use the same
//! order, `H^{uv} = compose(H^u, H^v)`.

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::symbol::{Alphabet, Symbol, Word};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::fmt;

/// A total map from the letters of `source` to words over `target`.
#[derive(Clone, PartialEq, Eq)]
pub struct Homomorphism {
    source: Alphabet,
    target: Alphabet,
    images: Vec<Word>,
}

impl Homomorphism {
    /// `images` must list one word per source letter, in alphabet order.
    pub fn new(source: Alphabet, target: Alphabet, images: Vec<Word>) -> Result<Self> {
        if images.len() != source.len() {
            return Err(Error::Domain(format!(
                "homomorphism needs {} images, got {}",
                source.len(),
                images.len()
            )));
        }
        for w in &images {
            if let Some(bad) = w.iter().find(|s| !target.contains(s)) {
                return Err(Error::AlphabetMismatch(format!(
                    "image letter `{bad}` is outside the target alphabet {target}"
                )));
            }
        }
        Ok(Homomorphism {
            source,
            target,
            images,
        })
    }

    /// Builds from `(letter, image)` pairs; every source letter must be
    /// covered exactly once.
    pub fn from_pairs(
        source: &Alphabet,
        target: &Alphabet,
        pairs: impl IntoIterator<Item = (Symbol, Word)>,
    ) -> Result<Self> {
        let mut images: Vec<Option<Word>> = vec![None; source.len()];
        for (letter, image) in pairs {
            let i = source.position(&letter)?;
            if images[i].replace(image).is_some() {
                return Err(Error::Domain(format!("letter `{letter}` mapped twice")));
            }
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                w.ok_or_else(|| Error::Domain(format!("letter `{}` has no image", source.get(i))))
            })
            .collect::<Result<Vec<_>>>()?;
        Homomorphism::new(source.clone(), target.clone(), images)
    }

    /// The endomorphism written `[w, w′]`: first letter to `w`, second to
    /// `w′`, and so on.
    pub fn bracket(alphabet: &Alphabet, images: &[&str]) -> Result<Self> {
        Homomorphism::new(
            alphabet.clone(),
            alphabet.clone(),
            images.iter().map(|t| crate::symbol::word(t)).collect(),
        )
    }

    pub fn identity(alphabet: &Alphabet) -> Self {
        Homomorphism {
            source: alphabet.clone(),
            target: alphabet.clone(),
            images: alphabet.iter().map(|s| vec![s.clone()]).collect(),
        }
    }

    pub fn source(&self) -> &Alphabet {
        &self.source
    }

    pub fn target(&self) -> &Alphabet {
        &self.target
    }

    pub fn image(&self, letter: &Symbol) -> Result<&Word> {
        Ok(&self.images[self.source.position(letter)?])
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn is_endomorphism(&self) -> bool {
        self.source == self.target
    }

    pub fn apply(&self, w: &[Symbol]) -> Result<Word> {
        let mut out = Vec::new();
        for s in w {
            out.extend_from_slice(&self.images[self.source.position(s)?]);
        }
        Ok(out)
    }

    /// Applies `f` first, then `g`.
    pub fn compose(f: &Homomorphism, g: &Homomorphism) -> Result<Homomorphism> {
        if f.target != g.source {
            return Err(Error::AlphabetMismatch(format!(
                "cannot compose: target {} of the first map differs from source {} of the second",
                f.target, g.source
            )));
        }
        let images = f
            .images
            .iter()
            .map(|w| g.apply(w))
            .collect::<Result<Vec<_>>>()?;
        Ok(Homomorphism {
            source: f.source.clone(),
            target: g.target.clone(),
            images,
        })
    }

    /// Composition of a sequence, leftmost applied first; `Id` when empty.
    pub fn compose_all<'a>(
        alphabet: &Alphabet,
        maps: impl IntoIterator<Item = &'a Homomorphism>,
    ) -> Result<Homomorphism> {
        let mut acc = Homomorphism::identity(alphabet);
        for m in maps {
            acc = Homomorphism::compose(&acc, m)?;
        }
        Ok(acc)
    }

    /// Row `V` counts the letters of the image of `V`.
    pub fn incidence(&self) -> Matrix {
        let mut m = Matrix::zeros(self.source.len(), self.target.len());
        for (i, w) in self.images.iter().enumerate() {
            for (j, c) in parikh(&self.target, w).into_iter().enumerate() {
                m[(i, j)] = BigInt::from(c);
            }
        }
        m
    }
}

impl fmt::Display for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .source
            .iter()
            .zip(&self.images)
            .map(|(s, w)| {
                let img = if w.is_empty() {
                    "eps".to_string()
                } else {
                    w.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
                };
                format!("{s} -> {img}")
            })
            .collect();
        write!(f, "{{{}}}", parts.join("; "))
    }
}

impl fmt::Debug for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Letter counts of `w`, indexed by `alphabet`. Letters outside the
/// alphabet are ignored.
pub fn parikh(alphabet: &Alphabet, w: &[Symbol]) -> Vec<usize> {
    let mut counts = vec![0; alphabet.len()];
    for s in w {
        if let Some(i) = alphabet.index_of(s) {
            counts[i] += 1;
        }
    }
    counts
}

/// `f(w) = h(H^w(c))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hdt0lSystem {
    input: Alphabet,
    working: Alphabet,
    tables: Vec<Homomorphism>,
    final_map: Homomorphism,
    seed: Symbol,
}

impl Hdt0lSystem {
    /// `tables` holds one endomorphism of `working` per input letter.
    pub fn new(
        input: Alphabet,
        working: Alphabet,
        tables: Vec<Homomorphism>,
        final_map: Homomorphism,
        seed: Symbol,
    ) -> Result<Self> {
        if tables.len() != input.len() {
            return Err(Error::InvalidSystem(format!(
                "{} tables for {} input letters",
                tables.len(),
                input.len()
            )));
        }
        if let Some(t) = tables
            .iter()
            .find(|t| t.source != working || t.target != working)
        {
            return Err(Error::AlphabetMismatch(format!(
                "table {t} is not an endomorphism of {working}"
            )));
        }
        if final_map.source != working {
            return Err(Error::AlphabetMismatch(
                "final homomorphism must start from the working alphabet".into(),
            ));
        }
        if !working.contains(&seed) {
            return Err(Error::UnknownLetter(seed));
        }
        Ok(Hdt0lSystem {
            input,
            working,
            tables,
            final_map,
            seed,
        })
    }

    /// A DT0L system: the final map is the identity.
    pub fn dt0l(
        input: Alphabet,
        working: Alphabet,
        tables: Vec<Homomorphism>,
        seed: Symbol,
    ) -> Result<Self> {
        let id = Homomorphism::identity(&working);
        Hdt0lSystem::new(input, working, tables, id, seed)
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn working(&self) -> &Alphabet {
        &self.working
    }

    pub fn output(&self) -> &Alphabet {
        self.final_map.target()
    }

    pub fn tables(&self) -> &[Homomorphism] {
        &self.tables
    }

    pub fn table(&self, letter: &Symbol) -> Result<&Homomorphism> {
        Ok(&self.tables[self.input.position(letter)?])
    }

    pub fn final_map(&self) -> &Homomorphism {
        &self.final_map
    }

    pub fn seed(&self) -> &Symbol {
        &self.seed
    }

    /// `H^w(c)`, applying the table of `w₁` first.
    pub fn image_of_word(&self, w: &[Symbol]) -> Result<Word> {
        let letters = self.input.encode(w)?;
        let mut cur = vec![self.seed.clone()];
        for i in letters {
            cur = self.tables[i].apply(&cur)?;
        }
        Ok(cur)
    }

    pub fn eval(&self, w: &[Symbol]) -> Result<Word> {
        self.final_map.apply(&self.image_of_word(w)?)
    }
}

/// `w ↦ L0 · M_{w₁} ⋯ M_{wₙ} · C0` over ℕ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearRepresentation {
    alphabet: Alphabet,
    initial: Vec<BigInt>,
    matrices: Vec<Matrix>,
    terminal: Vec<BigInt>,
}

impl LinearRepresentation {
    pub fn new(
        alphabet: Alphabet,
        initial: Vec<BigInt>,
        matrices: Vec<Matrix>,
        terminal: Vec<BigInt>,
    ) -> Result<Self> {
        let d = initial.len();
        if terminal.len() != d {
            return Err(Error::Dimension(format!(
                "row of length {d} but column of length {}",
                terminal.len()
            )));
        }
        if matrices.len() != alphabet.len() {
            return Err(Error::Dimension(format!(
                "{} matrices for {} letters",
                matrices.len(),
                alphabet.len()
            )));
        }
        if let Some(m) = matrices.iter().find(|m| m.rows() != d || m.cols() != d) {
            return Err(Error::Dimension(format!(
                "{}x{} matrix in a dimension-{d} representation",
                m.rows(),
                m.cols()
            )));
        }
        let negative = initial
            .iter()
            .chain(&terminal)
            .any(|x| x.sign() == num_bigint::Sign::Minus)
            || matrices.iter().any(|m| !m.is_nonnegative());
        if negative {
            return Err(Error::Domain(
                "linear representations have entries in ℕ".into(),
            ));
        }
        Ok(LinearRepresentation {
            alphabet,
            initial,
            matrices,
            terminal,
        })
    }

    pub fn dimension(&self) -> usize {
        self.initial.len()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> &[BigInt] {
        &self.initial
    }

    pub fn terminal(&self) -> &[BigInt] {
        &self.terminal
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn matrix(&self, letter: &Symbol) -> Result<&Matrix> {
        Ok(&self.matrices[self.alphabet.position(letter)?])
    }

    /// The matrix image `M_{w₁} ⋯ M_{wₙ}` of a word.
    pub fn word_matrix(&self, w: &[Symbol]) -> Result<Matrix> {
        let mut acc = Matrix::identity(self.dimension());
        for s in w {
            acc = acc.mul(self.matrix(s)?)?;
        }
        Ok(acc)
    }

    pub fn eval(&self, w: &[Symbol]) -> Result<BigInt> {
        let mut row = self.initial.clone();
        for s in w {
            row = self.matrix(s)?.left_apply(&row)?;
        }
        Ok(dot(&row, &self.terminal))
    }

    /// The Fibonacci representation over a one-letter alphabet:
    /// `t^n ↦ F_n` with `F₀ = F₁ = 1`.
    pub fn fibonacci(letter: Symbol) -> Self {
        LinearRepresentation::new(
            Alphabet::new([letter]).expect("one letter"),
            vec![BigInt::one(), BigInt::zero()],
            vec![Matrix::from_i64(&[&[1, 1], &[1, 0]]).expect("2x2")],
            vec![BigInt::one(), BigInt::zero()],
        )
        .expect("valid representation")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{chars, display_word, word};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn xy() -> Alphabet {
        Alphabet::parse("x y").unwrap()
    }

    #[test]
    fn apply_examples() {
        let k = Homomorphism::bracket(&xy(), &["x", "x y"]).unwrap();
        assert_eq!(k.apply(&word("y")).unwrap(), word("x y"));
        let id = Homomorphism::identity(&xy());
        assert_eq!(id.apply(&word("x y y x")).unwrap(), word("x y y x"));
        let kp = Homomorphism::bracket(&xy(), &["x", "eps"]).unwrap();
        assert_eq!(kp.apply(&word("x x x y")).unwrap(), word("x x x"));
        assert!(kp.apply(&word("z")).is_err());
        assert!(kp.apply(&[]).unwrap().is_empty());
    }

    #[test]
    fn compose_applies_left_first() {
        let p = Homomorphism::bracket(&xy(), &["y", "x"]).unwrap();
        let h = Homomorphism::bracket(&xy(), &["x", "x x y"]).unwrap();
        let ph = Homomorphism::compose(&p, &h).unwrap();
        assert_eq!(ph.image(&"x".into()).unwrap(), &word("x x y"));
        assert_eq!(ph.image(&"y".into()).unwrap(), &word("x"));
        let id = Homomorphism::identity(&xy());
        assert_eq!(Homomorphism::compose(&id, &h).unwrap(), h);
        assert_eq!(Homomorphism::compose(&h, &id).unwrap(), h);
        let other = Homomorphism::identity(&Alphabet::parse("a").unwrap());
        assert!(matches!(
            Homomorphism::compose(&h, &other),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn construction_errors() {
        assert!(Homomorphism::bracket(&xy(), &["x"]).is_err());
        assert!(Homomorphism::bracket(&xy(), &["x", "z"]).is_err());
        assert!(Homomorphism::from_pairs(&xy(), &xy(), [("x".into(), word("y"))]).is_err());
    }

    #[test]
    fn parikh_and_incidence() {
        assert_eq!(parikh(&xy(), &word("x x y")), vec![2, 1]);
        assert_eq!(
            Homomorphism::identity(&xy()).incidence(),
            Matrix::identity(2)
        );
    }

    #[test]
    fn hdt0l_eval_basics() {
        let a = Alphabet::parse("a b").unwrap();
        let ta = Homomorphism::bracket(&xy(), &["x y", "x"]).unwrap();
        let tb = Homomorphism::bracket(&xy(), &["y", "y y"]).unwrap();
        let t = Alphabet::parse("t").unwrap();
        let h = Homomorphism::new(xy(), t.clone(), vec![word("t"), word("t t")]).unwrap();
        let sys = Hdt0lSystem::new(a, xy(), vec![ta.clone(), tb], h.clone(), "x".into()).unwrap();
        assert_eq!(sys.eval(&[]).unwrap(), word("t"));
        assert_eq!(
            sys.eval(&word("a")).unwrap(),
            h.apply(&ta.apply(&word("x")).unwrap()).unwrap()
        );
        // ab: apply table a first, then table b
        assert_eq!(
            display_word(&sys.image_of_word(&word("a b")).unwrap()),
            "yyy"
        );
    }

    #[test]
    fn linear_eval_examples() {
        let t = Alphabet::parse("t").unwrap();
        let rep = LinearRepresentation::new(
            t.clone(),
            vec![BigInt::from(1), BigInt::from(0)],
            vec![Matrix::from_i64(&[&[1, 1], &[1, 0]]).unwrap()],
            vec![BigInt::from(1), BigInt::from(1)],
        )
        .unwrap();
        assert_eq!(rep.eval(&[]).unwrap(), BigInt::from(1));

        let fib = LinearRepresentation::fibonacci("t".into());
        let (mut a, mut b) = (BigInt::from(1), BigInt::from(1));
        for n in 0..=20 {
            assert_eq!(fib.eval(&vec![Symbol::new("t"); n]).unwrap(), a, "F_{n}");
            let next = &a + &b;
            a = std::mem::replace(&mut b, next);
        }

        let zero = LinearRepresentation::new(
            t,
            vec![BigInt::from(1), BigInt::from(0)],
            vec![Matrix::from_i64(&[&[1, 1], &[1, 0]]).unwrap()],
            vec![BigInt::from(0), BigInt::from(0)],
        )
        .unwrap();
        assert_eq!(zero.eval(&chars("ttt")).unwrap(), BigInt::from(0));
    }

    #[test]
    fn linear_representation_validation() {
        let t = Alphabet::parse("t").unwrap();
        let bad = LinearRepresentation::new(
            t,
            vec![BigInt::from(1)],
            vec![Matrix::identity(2)],
            vec![BigInt::from(1)],
        );
        assert!(matches!(bad, Err(Error::Dimension(_))));
    }

    fn random_endo(rng: &mut ChaCha8Rng, alphabet: &Alphabet) -> Homomorphism {
        let images = (0..alphabet.len())
            .map(|_| {
                let len = rng.gen_range(0..4);
                (0..len)
                    .map(|_| alphabet.get(rng.gen_range(0..alphabet.len())).clone())
                    .collect()
            })
            .collect();
        Homomorphism::new(alphabet.clone(), alphabet.clone(), images).unwrap()
    }

    fn random_word(rng: &mut ChaCha8Rng, alphabet: &Alphabet, max: usize) -> Word {
        let len = rng.gen_range(0..=max);
        (0..len)
            .map(|_| alphabet.get(rng.gen_range(0..alphabet.len())).clone())
            .collect()
    }

    proptest! {
        #[test]
        fn composition_is_coherent_and_associative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = Alphabet::parse("x y z").unwrap();
            let (f, g, h) = (random_endo(&mut rng, &c), random_endo(&mut rng, &c), random_endo(&mut rng, &c));
            let w = random_word(&mut rng, &c, 5);
            let fg = Homomorphism::compose(&f, &g).unwrap();
            prop_assert_eq!(fg.apply(&w).unwrap(), g.apply(&f.apply(&w).unwrap()).unwrap());
            let left = Homomorphism::compose(&fg, &h).unwrap();
            let right = Homomorphism::compose(&f, &Homomorphism::compose(&g, &h).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn parikh_is_linear_under_incidence(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = Alphabet::parse("x y z").unwrap();
            let h = random_endo(&mut rng, &c);
            let w = random_word(&mut rng, &c, 6);
            let lhs: Vec<BigInt> = parikh(&c, &h.apply(&w).unwrap()).into_iter().map(BigInt::from).collect();
            let row: Vec<BigInt> = parikh(&c, &w).into_iter().map(BigInt::from).collect();
            let m = h.incidence();
            prop_assert_eq!(lhs, m.left_apply(&row).unwrap());
            for (i, v) in c.iter().enumerate() {
                let counts: Vec<BigInt> = parikh(&c, h.image(v).unwrap()).into_iter().map(BigInt::from).collect();
                prop_assert_eq!(counts.as_slice(), m.row(i));
            }
        }

        #[test]
        fn hdt0l_images_split_prefix_first(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = Alphabet::parse("x y").unwrap();
            let a = Alphabet::parse("a b").unwrap();
            let tables = vec![random_endo(&mut rng, &c), random_endo(&mut rng, &c)];
            let sys = Hdt0lSystem::dt0l(a.clone(), c.clone(), tables, "x".into()).unwrap();
            let u = random_word(&mut rng, &a, 3);
            let v = random_word(&mut rng, &a, 3);
            let uv: Word = u.iter().chain(&v).cloned().collect();
            let hv = Homomorphism::compose_all(&c, v.iter().map(|s| sys.table(s).unwrap())).unwrap();
            prop_assert_eq!(sys.image_of_word(&uv).unwrap(), hv.apply(&sys.image_of_word(&u).unwrap()).unwrap());
        }
    }
}
