use proptest::prelude::*;

use foldrun::automata::{
    addition, encode_tuple, equality, equivalent, floor_div, less_equal, less_than, multiple,
    parse_text, product, regex_to_dfa, subtraction, to_text, Automaton, BoolOp, Dfa,
};
use foldrun::logic::{compile, eval_sentence, parse_formula, Environment, Formula};
use foldrun::sequences::{self, run_decompose};

fn builtins() -> Vec<Dfa> {
    vec![
        equality(),
        less_than(),
        less_equal(),
        addition(),
        subtraction(),
        multiple(3),
        multiple(7),
        floor_div(3),
        regex_to_dfa("1(0|1)*").unwrap().dfa,
        regex_to_dfa("1").unwrap().dfa,
    ]
}

fn arb_dfa() -> impl Strategy<Value = Dfa> {
    (1usize..=2, 1usize..=8).prop_flat_map(|(k, n)| {
        (
            proptest::collection::vec(0..n as u32, n << k),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(delta, acc)| Dfa::new(k, 0, acc, delta).unwrap())
    })
}

/// Random padding-closed binary relations built from a few atoms.
fn arb_relation() -> impl Strategy<Value = (String, Dfa)> {
    let atoms = prop_oneof![
        Just("x<y"),
        Just("x=y+1"),
        Just("x=2*y"),
        Just("Ek x=y+3*k"),
        Just("x/2=y"),
        Just("y>=5"),
    ];
    (atoms.clone(), atoms, 0usize..3).prop_map(|(a, b, op)| {
        let con = ["&", "|", "=>"][op];
        let text = format!("?lsd_2 ({a}) {con} ~({b})");
        let rel = compile(&parse_formula(&text).unwrap(), &Environment::new()).unwrap();
        let dfa = match rel.vars() {
            [_, _] => rel.into_dfa(),
            [_] => rel.dfa().expand(&[1], 2).unwrap(),
            _ => unreachable!(),
        };
        (text, dfa)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn padding_closure_of_builtins(seed in proptest::collection::vec(0u64..1 << 20, 3), pad in 0usize..=8) {
        for m in builtins() {
            let tuple = &seed[..m.arity()];
            let base = encode_tuple(tuple, 0);
            let padded = encode_tuple(tuple, base.len() + pad);
            prop_assert_eq!(m.accepts_word(&base), m.accepts_word(&padded));
        }
    }

    #[test]
    fn boolean_ops_match_sets((_, a) in arb_relation(), (_, b) in arb_relation(), x in 0u64..256, y in 0u64..256) {
        let (pa, pb) = (a.accepts(&[x, y]).unwrap(), b.accepts(&[x, y]).unwrap());
        for op in [BoolOp::And, BoolOp::Or, BoolOp::Implies, BoolOp::Iff, BoolOp::Xor] {
            prop_assert_eq!(product(&a, &b, op).unwrap().accepts(&[x, y]).unwrap(), op.apply(pa, pb));
        }
        prop_assert_eq!(a.complement().accepts(&[x, y]).unwrap(), !pa);
        prop_assert!(product(&a, &a.complement(), BoolOp::And).unwrap().is_empty());
    }

    #[test]
    fn projection_is_existential((text, a) in arb_relation()) {
        let p = a.project(1).unwrap();
        for x in 0..64u64 {
            let brute = (0..512u64).any(|y| a.accepts(&[x, y]).unwrap());
            // every atom bounds y by a multiple of x or a constant, so 512 covers witnesses
            prop_assert_eq!(p.accepts(&[x]).unwrap(), brute, "{} at x={}", text, x);
        }
        prop_assert!(p.is_padding_closed());
    }

    #[test]
    fn minimization_is_idempotent_and_sound(m in arb_dfa()) {
        let once = m.minimize();
        prop_assert_eq!(once.minimize(), once.clone());
        prop_assert!(once.num_states() <= m.num_states());
        prop_assert_eq!(equivalent(&m, &once).unwrap(), None);
    }

    #[test]
    fn text_format_round_trips(m in arb_dfa()) {
        let a = Automaton::Dfa(m.minimize());
        prop_assert_eq!(parse_text(&to_text(&a)).unwrap(), a);
    }

    #[test]
    fn de_morgan_and_duality((ta, _) in arb_relation(), (tb, _) in arb_relation()) {
        let env = Environment::new();
        let strip = |t: &str| t.trim_start_matches("?lsd_2 ").to_string();
        let (a, b) = (strip(&ta), strip(&tb));
        let c = |t: String| compile(&parse_formula(&t).unwrap(), &env).unwrap();
        let lhs = c(format!("?lsd_2 ~(({a}) & ({b}))"));
        let rhs = c(format!("?lsd_2 ~({a}) | ~({b})"));
        prop_assert_eq!(lhs.vars(), rhs.vars());
        prop_assert_eq!(equivalent(lhs.dfa(), rhs.dfa()).unwrap(), None);
        let all = c(format!("?lsd_2 Ax (({a}) | ({b}))"));
        let dual = c(format!("?lsd_2 ~Ex ~(({a}) | ({b}))"));
        prop_assert_eq!(all.vars(), dual.vars());
        prop_assert_eq!(equivalent(all.dfa(), dual.dfa()).unwrap(), None);
    }

    #[test]
    fn run_decomposition_is_well_formed(seq in proptest::collection::vec(0u8..3, 1..200)) {
        let count = seq.windows(2).filter(|w| w[0] != w[1]).count() + 1;
        let runs = run_decompose(&seq, count, true).unwrap();
        prop_assert!(runs.is_well_formed());
        prop_assert!(run_decompose(&seq, count + 1, true).is_err());
        prop_assert!(run_decompose(&seq, count, false).is_err());
        prop_assert_eq!(runs.lengths().sum::<u64>(), seq.len() as u64);
    }
}

#[test]
fn compiled_addition_equals_builtin() {
    let r = compile(&parse_formula("?lsd_2 z=x+y").unwrap(), &Environment::new()).unwrap();
    assert_eq!(equivalent(r.dfa(), &addition()).unwrap(), None);
}

#[test]
fn addition_exhaustive() {
    let add = addition();
    for x in 0..1024u64 {
        for y in 0..1024u64 {
            assert!(add.accepts(&[x, y, x + y]).unwrap());
            assert!(!add.accepts(&[x, y, x + y + 1]).unwrap());
        }
    }
}

/// For sentences evaluated TRUE, the quantifier-free matrix has no
/// counterexample below 2^8.
#[test]
fn true_sentences_survive_brute_force() {
    let cases: [(&str, fn(u64, u64) -> bool); 4] = [
        ("?lsd_2 Ax,y (x<y) => (x+1<=y)", |x, y| x >= y || x + 1 <= y),
        ("?lsd_2 Ax,y x/2+y/2<=(x+y)/2", |x, y| {
            x / 2 + y / 2 <= (x + y) / 2
        }),
        ("?lsd_2 Ax,y (y=2*x) => (y/2=x)", |x, y| {
            y != 2 * x || y / 2 == x
        }),
        ("?lsd_2 Ax,y (x-y=3) => (x=y+3)", |x, y| {
            x < y || x - y != 3 || x == y + 3
        }),
    ];
    let env = Environment::new();
    for (text, matrix) in cases {
        let f = parse_formula(text).unwrap();
        assert!(matches!(f, Formula::Forall(..)));
        assert!(eval_sentence(&f, &env).unwrap().value, "{text}");
        for x in 0..256 {
            for y in 0..256 {
                assert!(matrix(x, y), "{text} fails at x={x} y={y}");
            }
        }
    }
}

#[test]
fn sequence_identities() {
    let n = 100_000;
    let b = sequences::b_terms(n).unwrap();
    let r = sequences::r_terms(n).unwrap();
    let ep = sequences::eprime_terms(n).unwrap();
    let e = sequences::e_terms(n).unwrap();
    let sigma = sequences::sigma_terms(n).unwrap();
    let mut acc = 0u64;
    for i in 0..n {
        acc += u64::from(b.as_slice()[i]);
        assert_eq!(u64::from(ep.as_slice()[i]), acc);
        assert!(matches!(b.as_slice()[i], 1 | 2));
    }
    let prefix: Vec<u64> = std::iter::once(0)
        .chain(b.as_slice().iter().scan(0u64, |t, &v| {
            *t += u64::from(v);
            Some(*t)
        }))
        .collect();
    let (mut acc, mut mass) = (0u64, 0u64);
    for i in 0..n {
        acc += u64::from(r.as_slice()[i]);
        mass += u64::from(sigma.as_slice()[i]);
        let end = e.as_slice()[i] as usize;
        assert_eq!(end as u64, acc);
        if end <= n {
            assert_eq!(mass, prefix[end]);
        }
    }
    let p = sequences::p_terms(1023).unwrap();
    let q = sequences::q_terms(1023).unwrap();
    for (pv, qv) in p.as_slice().iter().zip(q.as_slice()) {
        assert_eq!(*pv, 1 - 2 * *qv as i8);
    }
}
