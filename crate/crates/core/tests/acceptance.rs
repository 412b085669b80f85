//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use foldrun::automata::{
    addition, encode_tuple, equivalent, less_than, multiple, product, BoolOp, Dfa,
};
use foldrun::guesser::{guess_dfao, guess_synchronized, DEFAULT_CHECK_LEN, DEFAULT_DEPTH};
use foldrun::logic::{compile, parse_formula, Environment};
use foldrun::sequences::{self, table, table_columns};
use foldrun::verify::{
    eprime_samples, mutation_checks, paperfolding_env, state_count_checks, verify_run_ends,
    Candidates, Pipeline, GUESS_BOUND, GUESS_CUTOFF, GUESS_SAMPLES,
};

type Outcome = Result<String, String>;

const TABLE: [(&str, [i64; 15]); 14] = [
    ("a", [1, 1, 2, 1, 1, 1, 1, 2, 1, 1, 2, 1, 1, 2, 2]),
    ("p", [1, 1, -1, 1, 1, -1, -1, 1, 1, 1, -1, -1, 1, -1, -1]),
    ("q", [0, 0, 1, 0, 0, 1, 1, 0, 0, 0, 1, 1, 0, 1, 1]),
    ("d", [1, 0, 1, -1, 0, 1, 0, -1, 0, 0, 1, 0, -1, 1, 0]),
    ("dprime", [1, 0, 1, 1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 1, 0]),
    (
        "eprime",
        [1, 2, 4, 5, 6, 7, 8, 10, 11, 12, 14, 15, 16, 18, 20],
    ),
    (
        "sprime",
        [1, 2, 3, 5, 6, 7, 8, 9, 11, 12, 13, 15, 16, 17, 19],
    ),
    ("b", [1, 1, 2, 1, 1, 1, 1, 2, 1, 1, 2, 1, 1, 2, 2]),
    (
        "e",
        [2, 3, 7, 8, 10, 11, 13, 15, 17, 18, 22, 23, 25, 27, 31],
    ),
    ("s", [1, 3, 4, 8, 9, 11, 12, 14, 16, 18, 19, 23, 24, 26, 28]),
    ("r", [2, 1, 4, 1, 2, 1, 2, 2, 2, 1, 4, 1, 2, 2, 4]),
    ("sigma", [2, 2, 4, 2, 2, 2, 2, 4, 2, 2, 4, 2, 2, 4, 4]),
    ("g", [1, 2, 2, 3, 4, 5, 6, 6, 7, 8, 8, 9, 10, 10, 10]),
    ("h", [1, 2, 0, 1, 2, 3, 4, 2, 3, 4, 2, 3, 4, 2, 0]),
];

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(t)
    } else {
        Err(format!("took {t:.2?}, limit {limit:?}"))
    }
}

fn table_rows() -> Outcome {
    let start = Instant::now();
    let rows = table(1, 15).map_err(|e| e.to_string())?;
    let columns = table_columns();
    for (name, expected) in TABLE {
        let col = columns
            .iter()
            .position(|c| c.as_str() == name)
            .ok_or(format!("no column {name}"))?;
        let got: Vec<i64> = rows.iter().map(|r| r.values[col]).collect();
        if got != expected {
            return Err(format!("row {name}: got {got:?}"));
        }
    }
    let t = within(Duration::from_secs(1), start)?;
    Ok(format!("14 rows x 15 columns exact in {t:.2?}"))
}

fn central_identity() -> Outcome {
    let start = Instant::now();
    let n = 2_000_000;
    let a = sequences::cloitre(n).map_err(|e| e.to_string())?;
    let b = sequences::b_terms(n).map_err(|e| e.to_string())?;
    if a.len() != n || b.len() != n {
        return Err("short prefix".into());
    }
    if let Some(i) = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .position(|(x, y)| x != y)
    {
        return Err(format!("a and b differ at n={}", i + 1));
    }
    let t = within(Duration::from_secs(30), start)?;
    Ok(format!("a_n = b_n for n <= {n} in {t:.2?}"))
}

fn density() -> Outcome {
    let n = 10_000_000;
    let states = sequences::counting_states(n).map_err(|e| e.to_string())?;
    if states.len() != n {
        return Err("short prefix".into());
    }
    for s in &states {
        let (g, k) = (s.g as i64, s.n as i64);
        if s.h != 3 * g - 2 * k || !(0..=4).contains(&s.h) {
            return Err(format!("h={} at n={}", s.h, s.n));
        }
        // |g/n - 2/3| <= 4/(3n), cleared of denominators
        if (3 * g - 2 * k).abs() > 4 {
            return Err(format!("density bound fails at n={}", s.n));
        }
    }
    let (env, _) = base_pipeline()?;
    let f = parse_formula("?lsd_2 An,x $g(n,x) => (3*x>=2*n & 3*x<=2*n+4)")
        .map_err(|e| e.to_string())?;
    let v = foldrun::logic::eval_sentence(&f, &env).map_err(|e| e.to_string())?;
    if !v.value {
        return Err("inequality_check FALSE".into());
    }
    Ok(format!(
        "0 <= 3g-2n <= 4 for n <= {n}; inequality_check TRUE"
    ))
}

fn base_pipeline() -> Result<(Environment, Candidates), String> {
    let c =
        Candidates::guess(GUESS_SAMPLES, GUESS_CUTOFF, GUESS_BOUND).map_err(|e| e.to_string())?;
    let p = Pipeline::run(&c).map_err(|e| e.to_string())?;
    Ok((p.env, c))
}

fn replay() -> Outcome {
    let start = Instant::now();
    let c =
        Candidates::guess(GUESS_SAMPLES, GUESS_CUTOFF, GUESS_BOUND).map_err(|e| e.to_string())?;
    let p = Pipeline::run(&c).map_err(|e| e.to_string())?;
    let required = [
        "q_test",
        "ep1",
        "ep2",
        "ep3",
        "ep4",
        "ep5",
        "ep6",
        "e1",
        "e2",
        "e3",
        "e4",
        "e5",
        "e6",
        "b12",
        "r_check",
        "b_property",
        "g_correctness",
        "g_step",
        "inequality_check",
        "w_check",
    ];
    for name in required {
        match p.report.get(name) {
            Some(r) if r.passed => {}
            Some(_) => return Err(format!("{name} FALSE")),
            None => return Err(format!("{name} not run")),
        }
    }
    if !p.report.passed() {
        let bad: Vec<&str> = p
            .report
            .records
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.name.as_str())
            .collect();
        return Err(format!("FALSE: {}", bad.join(", ")));
    }
    let t = within(Duration::from_secs(300), start)?;
    Ok(format!(
        "{} evaluations TRUE in {t:.2?}",
        p.report.records.len()
    ))
}

fn state_counts() -> Outcome {
    let (env, _) = base_pipeline()?;
    let report = state_count_checks(&env);
    let mut parts = Vec::new();
    for r in &report.records {
        let s = r.states.ok_or(format!("{} not built", r.name))?;
        if !r.passed {
            return Err(format!(
                "{}: {}/{} ({})",
                r.name,
                s.total,
                s.live,
                r.detail.clone().unwrap_or_default()
            ));
        }
        parts.push(format!("{}={}/{}", r.name, s.total, s.live));
    }
    Ok(parts.join(" "))
}

fn guess_and_verify() -> Outcome {
    let ep = guess_synchronized(
        &eprime_samples(2000).map_err(|e| e.to_string())?,
        GUESS_CUTOFF,
        GUESS_BOUND,
    )
    .map_err(|e| e.to_string())?;
    let (env, _) = paperfolding_env().map_err(|e| e.to_string())?;
    let dp = env.dfao("DP").ok_or("no DP")?;
    let report = verify_run_ends(&ep, dp, 1, false).map_err(|e| e.to_string())?;
    if report.records.len() != 6 || !report.passed() {
        return Err(format!("ep checks:\n{}", report.human()));
    }
    let samples = 256 << 12;
    let q: Vec<i64> = (0..samples as u64)
        .map(|n| sequences::q_at(n) as i64)
        .collect();
    let gq = guess_dfao(&q, 4, 64, 64).map_err(|e| e.to_string())?;
    if let Some(n) = gq.difference(env.dfao("Q").ok_or("no Q")?) {
        return Err(format!("guessed Q differs at {n}"));
    }
    let dprime =
        sequences::dprime_terms(DEFAULT_CHECK_LEN << DEFAULT_DEPTH).map_err(|e| e.to_string())?;
    let d: Vec<i64> = dprime.with_zero(0).iter().map(|&v| v as i64).collect();
    let gd = guess_dfao(&d, DEFAULT_DEPTH, DEFAULT_CHECK_LEN, 64).map_err(|e| e.to_string())?;
    if let Some(n) = gd.difference(dp) {
        return Err(format!("guessed DP differs at {n}"));
    }
    Ok(format!(
        "ep candidate {} live states passes ep1-ep6; guessed Q ({}) and DP ({}) equivalent",
        ep.state_counts().live,
        gq.num_states(),
        gd.num_states()
    ))
}

fn w_recurrence() -> Outcome {
    let n = 100_000;
    let w = sequences::w_terms(2 * n + 1).map_err(|e| e.to_string())?;
    let at = |i: usize| u64::from(w.as_slice()[i - 1]);
    if at(1) != 1 {
        return Err("w_1 != 1".into());
    }
    for k in 1..=n {
        if at(2 * k) != at(2 * k - 1) + at(k) % 2 {
            return Err(format!("even clause fails at n={k}"));
        }
        if at(2 * k + 1) != at(2 * k) + 1 {
            return Err(format!("odd clause fails at n={k}"));
        }
    }
    Ok(format!("w_1 = 1 and both clauses hold for n <= {n}"))
}

fn engine_properties() -> Outcome {
    let (env, _) = base_pipeline()?;
    let mut automata: Vec<(String, Dfa)> = env
        .relation_names()
        .map(|n| (n.to_string(), env.relation(n).unwrap().clone()))
        .collect();
    automata.push(("addition".into(), addition()));
    automata.push(("less_than".into(), less_than()));
    let mut checked = 0usize;

    // padding closure on random tuples
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 200,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ),
    );
    for (name, m) in &automata {
        let k = m.arity();
        let strategy = (proptest::collection::vec(0u64..1 << 16, k), 0usize..=8);
        runner
            .run(&strategy, |(tuple, pad)| {
                let base = encode_tuple(&tuple, 0);
                let padded = encode_tuple(&tuple, base.len() + pad);
                prop_assert_eq!(m.accepts_word(&base), m.accepts_word(&padded));
                Ok(())
            })
            .map_err(|e| format!("{name}: {e}"))?;
        checked += 1;
    }
    for name in env.dfao_names() {
        let m = env.dfao(name).unwrap();
        if !m.is_padding_consistent() {
            return Err(format!("{name} not padding-consistent"));
        }
        checked += 1;
    }

    // boolean algebra over x, y < 2^10
    let lt = less_than();
    let same_parity = compile(
        &parse_formula("?lsd_2 Ek x=y+2*k | y=x+2*k").map_err(|e| e.to_string())?,
        &Environment::new(),
    )
    .map_err(|e| e.to_string())?
    .into_dfa();
    let ops = [
        BoolOp::And,
        BoolOp::Or,
        BoolOp::Implies,
        BoolOp::Iff,
        BoolOp::Xor,
    ];
    let products: Vec<Dfa> = ops
        .iter()
        .map(|&op| product(&lt, &same_parity, op).unwrap())
        .collect();
    let not_lt = lt.complement();
    for x in 0..1024u64 {
        for y in 0..1024u64 {
            let a = x < y;
            let b = x % 2 == y % 2;
            for (op, m) in ops.iter().zip(&products) {
                if m.accepts(&[x, y]).unwrap() != op.apply(a, b) {
                    return Err(format!("{op:?} wrong at ({x},{y})"));
                }
            }
            if not_lt.accepts(&[x, y]).unwrap() == a {
                return Err(format!("complement wrong at ({x},{y})"));
            }
        }
    }

    // projection: Ey x+y=z iff x<=z; Ex z=3x iff 3 | z
    let proj = addition().project(1).map_err(|e| e.to_string())?;
    for x in 0..1024u64 {
        for z in 0..1024u64 {
            if proj.accepts(&[x, z]).unwrap() != (x <= z) {
                return Err(format!("projection wrong at ({x},{z})"));
            }
        }
    }
    let threes = multiple(3).project(0).map_err(|e| e.to_string())?;
    if let Some(z) = (0..1024u64).find(|&z| threes.accepts(&[z]).unwrap() != (z % 3 == 0)) {
        return Err(format!("projection of z=3x wrong at {z}"));
    }

    // minimization on random complete automata
    let strategy = (1usize..=3, 1usize..=12).prop_flat_map(|(k, n)| {
        (
            Just(k),
            Just(n),
            proptest::collection::vec(0..n as u32, n << k),
            proptest::collection::vec(any::<bool>(), n),
        )
    });
    runner
        .run(&strategy, |(k, _, delta, accepting)| {
            let m = Dfa::new(k, 0, accepting, delta).unwrap();
            let once = m.minimize();
            prop_assert_eq!(&once.minimize(), &once);
            prop_assert!(once.num_states() <= m.num_states());
            prop_assert_eq!(equivalent(&m, &once).unwrap(), None);
            Ok(())
        })
        .map_err(|e| format!("minimization: {e}"))?;
    for (name, m) in &automata {
        if m.minimize() != *m {
            return Err(format!("{name} changes under minimization"));
        }
    }
    Ok(format!(
        "padding closure on {checked} automata, 5 boolean ops + complement + 2 projections exhaustive below 2^10, minimization on 200 random automata"
    ))
}

fn mutation() -> Outcome {
    let (env, _) = base_pipeline()?;
    let report = mutation_checks(&env).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for r in &report.records {
        if !r.passed || r.counterexample.is_none() {
            return Err(format!(
                "{}: {}",
                r.name,
                r.detail.clone().unwrap_or_default()
            ));
        }
        parts.push(format!(
            "{} {}",
            r.name,
            r.detail.clone().unwrap_or_default()
        ));
    }
    Ok(parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("sequence table reproduction", table_rows),
        ("central identity a = b", central_identity),
        ("density bound", density),
        ("decision-procedure replay", replay),
        ("minimal state counts", state_counts),
        ("guess and verify", guess_and_verify),
        ("w recurrence", w_recurrence),
        ("automata engine properties", engine_properties),
        ("mutation soundness", mutation),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
