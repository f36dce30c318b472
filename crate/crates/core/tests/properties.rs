use level3::equivalence::{decide_equal, reachable_points, zariski_closure, Decision};
use level3::groebner::{is_groebner, Budget, Ideal};
use level3::kpda::{doubling_machine, Configuration, FormSymbol, Mode};
use level3::poly::{rat, Monomial, MonomialOrder, Polynomial};
use level3::pushdown::{is_graded, Entry, GradedAlphabet, Pushdown, Term, Variable};
use level3::recurrences::{
    Classifier, Factor, PolynomialSystem, RegularOutcome, RegularSystem, Ring,
};
use level3::symbol::{words_up_to, Alphabet, Symbol, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn sym(s: &str) -> Symbol {
    Symbol::new(s)
}

fn leaf(s: &str) -> Entry {
    Entry {
        symbol: sym(s),
        body: Pushdown::empty(0),
    }
}

/// Level-1 stores over `a`, optionally with the undeterminate `Ω2`.
fn inner(with_vars: bool) -> BoxedStrategy<Pushdown> {
    let letters = if with_vars {
        vec!["a", "Ω2"]
    } else {
        vec!["a"]
    };
    prop::collection::vec(prop::sample::select(letters), 0..4)
        .prop_map(|ls| Pushdown::new(1, ls.into_iter().map(leaf).collect()).unwrap())
        .boxed()
}

/// Graded level-2 stores for the doubling machine: `Z[...]` entries and,
/// optionally, `Ω1` leaves.
fn outer(with_vars: bool, min: usize) -> BoxedStrategy<Pushdown> {
    let entry = (any::<bool>(), inner(with_vars)).prop_map(move |(var, body)| {
        if var && with_vars {
            Entry {
                symbol: sym("Ω1"),
                body: Pushdown::empty(1),
            }
        } else {
            Entry {
                symbol: sym("Z"),
                body,
            }
        }
    });
    prop::collection::vec(entry, min..4)
        .prop_map(|es| Pushdown::new(2, es).unwrap())
        .boxed()
}

fn gamma() -> GradedAlphabet {
    GradedAlphabet::parse_levels(&["Z", "a"]).unwrap()
}

fn omegas() -> GradedAlphabet {
    GradedAlphabet::parse_levels(&["Ω1", "Ω2"]).unwrap()
}

fn bindings() -> impl Strategy<Value = BTreeMap<Symbol, Term>> {
    let nonempty_inner = (1usize..4).prop_map(|n| Pushdown::new(1, vec![leaf("a"); n]).unwrap());
    (outer(false, 1), nonempty_inner)
        .prop_map(|(o, i)| BTreeMap::from([(sym("Ω1"), o), (sym("Ω2"), i)]))
}

fn state() -> impl Strategy<Value = Symbol> {
    prop::sample::select(vec!["q0", "q1"]).prop_map(sym)
}

fn substitute_form(form: &[FormSymbol], b: &BTreeMap<Symbol, Term>) -> Vec<FormSymbol> {
    form.iter()
        .map(|s| match s {
            FormSymbol::Var(v) => FormSymbol::Var(v.substitute(b).unwrap()),
            t => t.clone(),
        })
        .collect()
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_deg: u32, max_terms: usize) -> Polynomial {
    let terms = (0..rng.gen_range(1..=max_terms)).map(|_| {
        let mut e = vec![0u32; n];
        for _ in 0..rng.gen_range(0..=max_deg) {
            e[rng.gen_range(0..n)] += 1;
        }
        let c = [-2i64, -1, 1, 2, 3][rng.gen_range(0..5)];
        (Monomial(e), rat(c))
    });
    Polynomial::from_terms(n, terms)
}

fn random_system(rng: &mut ChaCha8Rng, input: &Alphabet, degree: u32) -> PolynomialSystem {
    let d = rng.gen_range(1..=2);
    let indices = Alphabet::new((0..d).map(|k| format!("X{}", k + 1))).unwrap();
    let mut map = BTreeMap::new();
    for i in indices.iter() {
        for a in input.iter() {
            map.insert((i.clone(), a.clone()), random_poly(rng, d, degree, 2));
        }
    }
    let base = indices
        .iter()
        .map(|i| (i.clone(), BigInt::from(rng.gen_range(-2..=2))))
        .collect();
    PolynomialSystem::new(indices, input.clone(), Ring::Integer, &map, base).unwrap()
}

fn random_regular(rng: &mut ChaCha8Rng) -> RegularSystem {
    let indices = Alphabet::parse("f g").unwrap();
    let input = Alphabet::parse("a b").unwrap();
    let classes = Alphabet::parse("even odd").unwrap();
    let mut moves = BTreeMap::new();
    for c in classes.iter() {
        for a in input.iter() {
            moves.insert(
                (c.clone(), a.clone()),
                classes.get(rng.gen_range(0..2)).clone(),
            );
        }
    }
    let classifier =
        Classifier::new(classes.clone(), input.clone(), classes.get(0), &moves).unwrap();
    let mut rules = BTreeMap::new();
    for i in indices.iter() {
        for a in input.iter() {
            for c in classes.iter() {
                let rhs = (0..rng.gen_range(0..=2))
                    .map(|_| Factor {
                        index: indices.get(rng.gen_range(0..2)).clone(),
                        shift: (0..rng.gen_range(0..=1))
                            .map(|_| input.get(rng.gen_range(0..2)).clone())
                            .collect(),
                    })
                    .collect();
                rules.insert((i.clone(), a.clone(), c.clone()), rhs);
            }
        }
    }
    let base = indices
        .iter()
        .map(|i| (i.clone(), vec![sym("t")]))
        .collect();
    RegularSystem::new(
        indices,
        Alphabet::parse("t").unwrap(),
        classifier,
        &rules,
        base,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivation_steps_survive_substitution(p in state(), q in state(), t in outer(true, 1), b in bindings()) {
        let m = doubling_machine();
        let v = Variable::new(p, t, q).unwrap();
        let substituted = m.derive_step(&[FormSymbol::Var(v.substitute(&b).unwrap())]).unwrap();
        for next in m.derive_step(&[FormSymbol::Var(v.clone())]).unwrap() {
            let image = substitute_form(&next, &b);
            prop_assert!(substituted.contains(&image), "{:?} lost under substitution", next);
        }
    }

    #[test]
    fn substitutions_on_disjoint_undeterminates_commute(t in outer(true, 0), b in bindings()) {
        let first = BTreeMap::from([(sym("Ω1"), b[&sym("Ω1")].clone())]);
        let second = BTreeMap::from([(sym("Ω2"), b[&sym("Ω2")].clone())]);
        let one = t.substitute(&first).unwrap().substitute(&second).unwrap();
        let two = t.substitute(&second).unwrap().substitute(&first).unwrap();
        prop_assert_eq!(&one, &two);
        prop_assert_eq!(one, t.substitute(&b).unwrap());
    }

    #[test]
    fn steps_keep_stores_graded_and_deterministic(s in state(), store in outer(false, 0), emitted in 0usize..3) {
        let m = doubling_machine();
        prop_assert!(is_graded(&store, &gamma(), &omegas()));
        let c = Configuration { state: s, word: vec![sym("b"); emitted], store };
        let next = m.step(&c, Mode::Generation).unwrap();
        prop_assert!(next.len() <= 1);
        for n in next {
            prop_assert!(is_graded(&n.store, &gamma(), &omegas()), "{}", n.store);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn membership_ignores_order_and_generator_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=3);
        let gens: Vec<Polynomial> = (0..rng.gen_range(1..=3)).map(|_| random_poly(&mut rng, n, 2, 3)).collect();
        let mut shuffled = gens.clone();
        shuffled.shuffle(&mut rng);
        let ideals: Vec<Ideal> = [
            (gens.clone(), MonomialOrder::GrevLex),
            (shuffled.clone(), MonomialOrder::GrevLex),
            (gens.clone(), MonomialOrder::Lex),
            (shuffled, MonomialOrder::Lex),
        ]
        .into_iter()
        .map(|(g, o)| Ideal::new(n, g, o).unwrap())
        .collect();
        for i in &ideals {
            prop_assert!(is_groebner(i.basis(), i.order()));
        }
        let combo = gens.iter().fold(Polynomial::zero(n), |acc, g| &acc + &(&random_poly(&mut rng, n, 1, 2) * g));
        for t in [combo.clone(), random_poly(&mut rng, n, 2, 3)] {
            let answer = ideals[0].contains(&t);
            for i in &ideals {
                prop_assert_eq!(i.contains(&t), answer);
                prop_assert_eq!(i.normal_form(&t).is_zero(), answer);
            }
        }
        prop_assert!(ideals[0].contains(&combo));
    }

    #[test]
    fn closure_generators_vanish_on_reachable_points(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input = Alphabet::parse("a b").unwrap();
        let sys = random_system(&mut rng, &input, 1);
        let budget = Budget::default();
        let closure = zariski_closure(&sys, 2, MonomialOrder::GrevLex, &budget).unwrap();
        for point in reachable_points(&sys, 200, &budget).unwrap() {
            for g in closure.generators() {
                let point: Vec<BigRational> = point.iter().cloned().map(BigRational::from_integer).collect();
                prop_assert!(g.eval(&point).is_zero());
            }
        }
    }

    #[test]
    fn equality_verdicts_are_sound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input = Alphabet::parse("a b").unwrap();
        let a = random_system(&mut rng, &input, 1);
        let b = if rng.gen_bool(0.5) { a.clone() } else { random_system(&mut rng, &input, 1) };
        let (ia, ib) = (a.indices().get(0).clone(), b.indices().get(0).clone());
        let d = decide_equal(&a, &ia, &b, &ib, MonomialOrder::GrevLex, &Budget::default()).unwrap();
        let differs = |w: &Word| a.eval(&ia, w).unwrap() != b.eval(&ib, w).unwrap();
        match d {
            Decision::Equal => {
                for w in words_up_to(&input, 8) {
                    prop_assert!(!differs(&w));
                }
            }
            Decision::NotEqual(witness) => {
                prop_assert!(differs(&witness));
                for w in words_up_to(&input, witness.len()) {
                    if w.len() < witness.len() {
                        prop_assert!(!differs(&w));
                    }
                }
            }
        }
    }

    #[test]
    fn regular_values_are_stable_under_more_fuel(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_regular(&mut rng);
        for w in words_up_to(sys.input(), 3) {
            for i in sys.indices().iter() {
                if let RegularOutcome::Value(v) = sys.eval(i, &w, 200).unwrap() {
                    prop_assert_eq!(sys.eval(i, &w, 20_000).unwrap(), RegularOutcome::Value(v));
                }
            }
        }
    }
}
