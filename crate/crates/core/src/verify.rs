//! Verification suites for the paperfolding run pipeline.
//!
//! Each suite runs script commands through the decision procedure and turns
//! every result into a [`CheckRecord`]. Guessed automata enter through
//! [`Candidates`] and are never trusted: the run-end suites show that a
//! candidate computes a strictly increasing function whose values are
//! exactly the ends of the runs of the subject sequence, and induction on `n`
//! then identifies it with the true run ends.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::automata::{equivalent, Dfa, Dfao, StateCounts};
use crate::guesser::{guess_synchronized, GuessError};
use crate::logic::{run_script, CommandReport, Environment, LogicError};
use crate::sequences::{self, SequenceError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Guess(#[from] GuessError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error("{0} is not defined")]
    Missing(String),
}

pub type Result<T> = std::result::Result<T, VerifyError>;

/// Builds `Q`'s consequences: `D`, `DP` and the check `q_test`.
pub const PAPERFOLDING_SCRIPT: &str = r#"
eval q_test "?lsd_2 An (Q[2*n]=Q[n] & Q[4*n+1]=@0 & Q[4*n+3]=@1)":
def synchd "?lsd_2 (n=0 & z=0) | (n=1 & z=1) |
   (z=1 & Q[n]=@1 & Q[n-1]=@0) | (n>=2 & z=0 & Q[n]=Q[n-1]) |
   (z=2 & Q[n]=@0 & Q[n-1]=@1)":
def d0 "?lsd_2 $synchd(n,0)":
def d1 "?lsd_2 $synchd(n,1)":
def d2 "?lsd_2 $synchd(n,2)":
combine D d0=0 d1=1 d2=-1:
def dp0 "?lsd_2 $synchd(n,0)":
def dp12 "?lsd_2 $synchd(n,1) | $synchd(n,2)":
combine DPP dp0=0 dp12=1:
minimize DP DPP:
"#;

/// Needs `ep`. Builds `sp`, `b` and `B`.
pub const RUN_LENGTH_SCRIPT: &str = r#"
def sp "?lsd_2 (n=0 & z=0) | $ep(n-1,z-1)":
def b "?lsd_2 Ex,y $sp(n,x) & $ep(n,y) & z=(y-x)+1":
eval b12 "?lsd_2 An (n>=1) => ($b(n,1) | $b(n,2))":
def b1 "?lsd_2 $b(n,1)":
def b2 "?lsd_2 $b(n,2)":
combine B b1=1 b2=2:
"#;

/// Needs `b` and `e`. Builds `s`, `r` and `sigma`.
pub const RUN_SUM_SCRIPT: &str = r#"
def s "?lsd_2 (n=0 & z=0) | $e(n-1,z-1)":
def r "?lsd_2 Ex,y $s(n,x) & $e(n,y) & z=(y-x)+1":
def r_check "?lsd_2 An,x $r(n,x) => (x=1 | x=2 | x=4)":
reg even lsd_2 "()|0(0|1)*":
reg odd lsd_2 "1(0|1)*":
def sigma "?lsd_2 Ex,y ($odd(n) & $s(n,x) & $e(n,y) & z=(y-x)+1) |
   ($even(n) & $s(n,x) & $e(n,y) & z=2*((y-x)+1))":
eval b_property "?lsd_2 An,x,y ($b(n,x) & $sigma(n,y)) => y=2*x":
"#;

/// Needs `b` and `g`.
///
/// The existential in `g_correctness` absorbs the `<=>`, so
/// it only constrains the steps with `b(n) = 2`; `g_total`, `g_functional`,
/// `g_step` and `g_increment` together pin `g` down completely.
pub const DENSITY_SCRIPT: &str = r#"
eval g_total "?lsd_2 An Ex $g(n,x)":
eval g_functional "?lsd_2 ~En,x,y x!=y & $g(n,x) & $g(n,y)":
eval g_correctness "?lsd_2 $g(0,0) &
   An (n>=1) => (Ex ($g(n,x) & $g(n-1,x)) <=> $b(n,2))":
eval g_step "?lsd_2 $g(0,0) &
   An (n>=1) => ((Ex $g(n,x) & $g(n-1,x)) <=> $b(n,2))":
eval g_increment "?lsd_2 An,x,y (n>=1 & $g(n,x) & $g(n-1,y)) => (x=y | x=y+1)":
eval inequality_check "?lsd_2 An,x $g(n,x) => (3*x>=2*n & 3*x<=2*n+4)":
"#;

/// Needs `ep`. Builds `w` and `mod2`.
pub const W_SCRIPT: &str = r#"
def w "?lsd_2 Ex $ep(t,x) & x>=n & Au,y ($ep(u,y) & y>=n) => u>=t":
def mod2 "?lsd_2 n=z+2*(n/2)":
eval w_check "?lsd_2 $w(1,1) &
   (An,x,y,z,t (n>=1 & $w(2*n,x) & $w(2*n-1,y) & $w(n,z)
   & $mod2(z,t)) => x=y+t) &
   (An,x,y (n>=1 & $w(2*n+1,x) & $w(2*n,y)) => x=y+1)":
"#;

/// The six run-end checks for relation `rel` against DFAO `seq`.
///
/// With `guard`, the boundary check is restricted to `n >= 1`; this is
/// needed when the sequence has no run boundary at position 0.
pub fn run_end_script(prefix: &str, rel: &str, seq: &str, first_end: u64, guard: bool) -> String {
    let boundary = if guard {
        format!("An,x (n>=1 & ${rel}(n,x)) => {seq}[x]!={seq}[x+1]")
    } else {
        format!("An,x ${rel}(n,x) => {seq}[x]!={seq}[x+1]")
    };
    format!(
        "eval {prefix}1 \"?lsd_2 An Ex ${rel}(n,x)\":\n\
         eval {prefix}2 \"?lsd_2 ~En,x,y x!=y & ${rel}(n,x) & ${rel}(n,y)\":\n\
         eval {prefix}3 \"?lsd_2 An,x,y (${rel}(n,x) & ${rel}(n+1,y)) => x<y\":\n\
         eval {prefix}4 \"?lsd_2 {boundary}\":\n\
         eval {prefix}5 \"?lsd_2 An,x,y,t (${rel}(n-1,x) & ${rel}(n,y) & t>=x+2 & t<y) =>\n  {seq}[t]={seq}[x+1]\":\n\
         eval {prefix}6 \"?lsd_2 ${rel}(1,{first_end})\":\n"
    )
}

/// Every script in pipeline order, for use with `ep`, `e` and `g` preloaded.
pub fn pipeline_script() -> String {
    [
        PAPERFOLDING_SCRIPT,
        &run_end_script("ep", "ep", "DP", 1, false),
        RUN_LENGTH_SCRIPT,
        &run_end_script("e", "e", "B", 2, true),
        RUN_SUM_SCRIPT,
        DENSITY_SCRIPT,
        W_SCRIPT,
    ]
    .concat()
    .trim_start()
    .to_string()
}

/// Minimal state counts of the named automata.
pub const EXPECTED_STATES: [(&str, usize); 12] = [
    ("Q", 4),
    ("D", 12),
    ("DP", 9),
    ("ep", 19),
    ("sp", 20),
    ("b", 32),
    ("B", 22),
    ("e", 30),
    ("s", 32),
    ("r", 32),
    ("sigma", 31),
    ("g", 16),
];

/// One line of a verification report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states: Option<StateCounts>,
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<(String, u64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckRecord {
    fn new(suite: &str, name: &str, passed: bool, elapsed: Duration) -> Self {
        CheckRecord {
            suite: suite.to_string(),
            name: name.to_string(),
            passed,
            states: None,
            runtime_ms: elapsed.as_secs_f64() * 1e3,
            counterexample: None,
            detail: None,
        }
    }

    fn from_command(suite: &str, c: &CommandReport) -> Option<Self> {
        let value = c.result?;
        Some(CheckRecord {
            states: Some(c.states),
            counterexample: c.witness.clone().filter(|_| !value),
            ..CheckRecord::new(suite, &c.name, value, c.elapsed)
        })
    }

    /// `PASS name [states] (runtime)` with any counterexample.
    pub fn human(&self) -> String {
        let mut line = format!(
            "{} {}/{} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            if self.passed { "TRUE" } else { "FALSE" }
        );
        if let Some(s) = self.states {
            line.push_str(&format!(" states={}/{}", s.total, s.live));
        }
        line.push_str(&format!(" {:.1}ms", self.runtime_ms));
        if let Some(w) = &self.counterexample {
            let w: Vec<String> = w.iter().map(|(v, x)| format!("{v}={x}")).collect();
            line.push_str(&format!(" counterexample {}", w.join(",")));
        }
        if let Some(d) = &self.detail {
            line.push_str(&format!(" ({d})"));
        }
        line
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn human(&self) -> String {
        let mut out: String = self.records.iter().map(|r| r.human() + "\n").collect();
        let failed = self.records.iter().filter(|r| !r.passed).count();
        out.push_str(&format!(
            "{} checks, {} failed\n",
            self.records.len(),
            failed
        ));
        out
    }

    pub fn json_lines(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("serializable") + "\n")
            .collect()
    }
}

/// Runs a script, recording each truth-valued command.
fn run_suite(suite: &str, script: &str, env: &mut Environment) -> Result<Report> {
    let script_report = run_script(script, env)?;
    Ok(Report {
        records: script_report
            .commands
            .iter()
            .filter_map(|c| CheckRecord::from_command(suite, c))
            .collect(),
    })
}

/// Guessed synchronized automata for `e'`, `e` and `g`.
#[derive(Clone, Debug)]
pub struct Candidates {
    pub ep: Dfa,
    pub e: Dfa,
    pub g: Dfa,
}

/// Sample count used for guessing.
pub const GUESS_SAMPLES: usize = 2000;
/// Pair-word length bound used for guessing.
pub const GUESS_CUTOFF: usize = 14;
/// State bound used for guessing.
pub const GUESS_BOUND: usize = 64;

fn widen(v: Vec<u32>) -> Vec<u64> {
    v.into_iter().map(u64::from).collect()
}

/// `(n, e'_n)` for `n = 0..=count`.
pub fn eprime_samples(count: usize) -> Result<Vec<u64>> {
    Ok(widen(sequences::eprime_terms(count)?.with_zero(0)))
}

/// `(n, e_n)` for `n = 0..=count`, with `e_0 = 0`.
pub fn e_samples(count: usize) -> Result<Vec<u64>> {
    Ok(widen(sequences::e_terms(count)?.with_zero(0)))
}

/// `(n, g_n)` for `n = 0..=count`, with `g_0 = 0`.
pub fn g_samples(count: usize) -> Result<Vec<u64>> {
    Ok(widen(sequences::g_terms(count)?.with_zero(0)))
}

impl Candidates {
    pub fn guess(samples: usize, cutoff: usize, bound: usize) -> Result<Self> {
        Ok(Candidates {
            ep: guess_synchronized(&eprime_samples(samples)?, cutoff, bound)?,
            e: guess_synchronized(&e_samples(samples)?, cutoff, bound)?,
            g: guess_synchronized(&g_samples(samples)?, cutoff, bound)?,
        })
    }
}

/// Runs the Q script into a fresh environment.
pub fn paperfolding_env() -> Result<(Environment, Report)> {
    let mut env = Environment::with_paperfolding();
    let report = run_suite("paperfolding", PAPERFOLDING_SCRIPT, &mut env)?;
    Ok((env, report))
}

/// Checks a run-end candidate `cand` for the DFAO `subject`.
pub fn verify_run_ends(cand: &Dfa, subject: &Dfao, first_end: u64, guard: bool) -> Result<Report> {
    let mut env = Environment::new();
    env.insert_relation("cand", cand.clone())?;
    env.insert_dfao("S", subject.clone())?;
    run_suite(
        "run_ends",
        &run_end_script("c", "cand", "S", first_end, guard),
        &mut env,
    )
}

fn dfao<'a>(env: &'a Environment, name: &str) -> Result<&'a Dfao> {
    env.dfao(name)
        .ok_or_else(|| VerifyError::Missing(name.to_string()))
}

fn relation<'a>(env: &'a Environment, name: &str) -> Result<&'a Dfa> {
    env.relation(name)
        .ok_or_else(|| VerifyError::Missing(name.to_string()))
}

/// Compares `m(n)` with `values[n]` for `n = 1..values.len()`.
pub fn cross_check(suite: &str, name: &str, m: &Dfao, values: &[i64]) -> CheckRecord {
    let start = Instant::now();
    let bad = (1..values.len()).find(|&n| m.eval(n as u64) != values[n]);
    let mut rec = CheckRecord::new(suite, name, bad.is_none(), start.elapsed());
    rec.detail = Some(match bad {
        None => format!("n<={}", values.len().saturating_sub(1)),
        Some(n) => format!(
            "first mismatch at n={n}: automaton {}, sequence {}",
            m.eval(n as u64),
            values[n]
        ),
    });
    rec
}

/// Checks that `rel(n, values[n])` holds for `n = 1..values.len()`.
pub fn cross_check_relation(suite: &str, name: &str, rel: &Dfa, values: &[u64]) -> CheckRecord {
    let start = Instant::now();
    let bad = (1..values.len()).find(|&n| !rel.accepts(&[n as u64, values[n]]).unwrap_or(false));
    let mut rec = CheckRecord::new(suite, name, bad.is_none(), start.elapsed());
    rec.detail = Some(match bad {
        None => format!("n<={}", values.len().saturating_sub(1)),
        Some(n) => format!("relation rejects n={n}, z={}", values[n]),
    });
    rec
}

/// Records whether the minimal automata have the expected sizes.
pub fn state_count_checks(env: &Environment) -> Report {
    let mut report = Report::default();
    for (name, expected) in EXPECTED_STATES {
        let counts = if let Some(m) = env.dfao(name) {
            Some(StateCounts {
                total: m.num_states(),
                live: m.num_states(),
            })
        } else {
            env.relation(name).map(|m| m.state_counts())
        };
        let mut rec = CheckRecord::new("states", name, false, Duration::ZERO);
        match counts {
            Some(c) => {
                rec.passed = c.matches(expected);
                rec.states = Some(c);
                rec.detail = Some(format!("expected {expected}"));
            }
            None => rec.detail = Some("not built".into()),
        }
        report.records.push(rec);
    }
    report
}

/// First single-transition change to `m` that keeps it padding-closed and
/// changes its language, scanning states, symbols and targets in order.
pub fn first_mutation(m: &Dfa) -> Option<Dfa> {
    for q in 0..m.num_states() {
        for s in 0..m.alphabet_size() {
            for t in 0..m.num_states() {
                if t == m.next(q, s) {
                    continue;
                }
                let mutant = m.with_transition(q, s, t);
                if mutant.is_padding_closed() && equivalent(&mutant, m).ok().flatten().is_some() {
                    return Some(mutant.minimize());
                }
            }
        }
    }
    None
}

/// The full chain: paperfolding automata, the run-end and run-length
/// automata, the density bound and the `w` recurrence.
pub struct Pipeline {
    pub env: Environment,
    pub report: Report,
}

impl Pipeline {
    pub fn run(c: &Candidates) -> Result<Self> {
        let (mut env, mut report) = paperfolding_env()?;
        env.insert_relation("ep", c.ep.clone())?;
        report.extend(run_suite(
            "ep",
            &run_end_script("ep", "ep", "DP", 1, false),
            &mut env,
        )?);
        report.extend(run_suite("runs", RUN_LENGTH_SCRIPT, &mut env)?);
        env.insert_relation("e", c.e.clone())?;
        report.extend(run_suite(
            "e",
            &run_end_script("e", "e", "B", 2, true),
            &mut env,
        )?);
        report.extend(run_suite("sums", RUN_SUM_SCRIPT, &mut env)?);
        env.insert_relation("g", c.g.clone())?;
        report.extend(run_suite("density", DENSITY_SCRIPT, &mut env)?);
        report.extend(run_suite("w", W_SCRIPT, &mut env)?);
        Ok(Pipeline { env, report })
    }
}

/// Brute-force bounds for the oracle checks.
#[derive(Clone, Copy, Debug)]
pub struct Bounds {
    /// Automaton against sequence.
    pub automata: usize,
    /// Pure sequence identities.
    pub sequences: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            automata: 1_000_000,
            sequences: 10_000_000,
        }
    }
}

fn widen_i64<T: Copy + Into<i64>>(v: Vec<T>) -> Vec<i64> {
    v.into_iter().map(Into::into).collect()
}

/// Automata against independently generated sequences.
pub fn oracle_checks(env: &Environment, n: usize) -> Result<Report> {
    let mut report = Report::default();
    let q = widen_i64(sequences::q_terms(n)?.with_zero(0));
    report
        .records
        .push(cross_check("oracle", "Q_vs_q", dfao(env, "Q")?, &q));
    let d = widen_i64(sequences::diff_terms(n)?.with_zero(0));
    report
        .records
        .push(cross_check("oracle", "D_vs_d", dfao(env, "D")?, &d));
    let dp = widen_i64(sequences::dprime_terms(n)?.with_zero(0));
    report
        .records
        .push(cross_check("oracle", "DP_vs_dprime", dfao(env, "DP")?, &dp));
    let a = widen_i64(sequences::cloitre(n)?.with_zero(0));
    report
        .records
        .push(cross_check("oracle", "B_vs_a", dfao(env, "B")?, &a));
    report.records.push(cross_check_relation(
        "oracle",
        "ep_vs_eprime",
        relation(env, "ep")?,
        &eprime_samples(n)?,
    ));
    report.records.push(cross_check_relation(
        "oracle",
        "e_vs_e",
        relation(env, "e")?,
        &e_samples(n)?,
    ));
    report.records.push(cross_check_relation(
        "oracle",
        "g_vs_g",
        relation(env, "g")?,
        &g_samples(n)?,
    ));
    let w = widen(sequences::w_terms(n.min(100_000))?.with_zero(0));
    report.records.push(cross_check_relation(
        "oracle",
        "w_vs_w",
        relation(env, "w")?,
        &w,
    ));
    Ok(report)
}

/// Identities between sequences, checked term by term.
pub fn sequence_checks(n: usize) -> Result<Report> {
    let mut report = Report::default();
    let start = Instant::now();
    let a = sequences::cloitre(n)?;
    let b = sequences::b_terms(n)?;
    let bad = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .position(|(x, y)| x != y);
    let mut rec = CheckRecord::new("sequences", "a_equals_b", bad.is_none(), start.elapsed());
    rec.detail = Some(match bad {
        None => format!("n<={n}"),
        Some(i) => format!("first mismatch at n={}", i + 1),
    });
    report.records.push(rec);

    let start = Instant::now();
    let states = sequences::counting_states(n)?;
    let bad = states.iter().find(|s| !(0..=4).contains(&s.h));
    let mut rec = CheckRecord::new("sequences", "h_bounds", bad.is_none(), start.elapsed());
    rec.detail = Some(match bad {
        None => format!("0<=3g-2n<=4 for n<={n}"),
        Some(s) => format!("h={} at n={}", s.h, s.n),
    });
    report.records.push(rec);

    let start = Instant::now();
    let m = n.min(100_000);
    let w = sequences::w_terms(2 * m + 1)?;
    let at = |i: usize| u64::from(w.as_slice()[i - 1]);
    let bad =
        (1..=m).find(|&k| at(2 * k) != at(2 * k - 1) + at(k) % 2 || at(2 * k + 1) != at(2 * k) + 1);
    let mut rec = CheckRecord::new(
        "sequences",
        "w_recurrence",
        at(1) == 1 && bad.is_none(),
        start.elapsed(),
    );
    rec.detail = Some(match bad {
        None => format!("n<={m}"),
        Some(k) => format!("fails at n={k}"),
    });
    report.records.push(rec);
    Ok(report)
}

/// Mutates `name` in a copy of `env` and re-runs `script`; passes when some
/// check comes back FALSE.
fn mutation_check(
    env: &Environment,
    name: &str,
    rebuild: impl Fn(&Dfa) -> Result<Report>,
) -> Result<CheckRecord> {
    let start = Instant::now();
    let original = relation(env, name)?;
    let suite = "mutation";
    let Some(mutant) = first_mutation(original) else {
        let mut rec = CheckRecord::new(suite, name, false, start.elapsed());
        rec.detail = Some("no language-changing mutation found".into());
        return Ok(rec);
    };
    let report = rebuild(&mutant)?;
    let failed = report.records.iter().find(|r| !r.passed);
    let mut rec = CheckRecord::new(suite, name, failed.is_some(), start.elapsed());
    match failed {
        Some(f) => {
            rec.counterexample = f.counterexample.clone();
            rec.detail = Some(format!("rejected by {}", f.name));
        }
        None => rec.detail = Some("mutant passed every check".into()),
    }
    Ok(rec)
}

/// Mutation soundness of the `ep`, `e` and `g` suites.
pub fn mutation_checks(env: &Environment) -> Result<Report> {
    let mut report = Report::default();
    let dp = dfao(env, "DP")?.clone();
    report.records.push(mutation_check(env, "ep", |m| {
        verify_run_ends(m, &dp, 1, false)
    })?);
    let b = dfao(env, "B")?.clone();
    report.records.push(mutation_check(env, "e", |m| {
        verify_run_ends(m, &b, 2, true)
    })?);
    let b_rel = relation(env, "b")?.clone();
    report.records.push(mutation_check(env, "g", |m| {
        let mut scratch = Environment::new();
        scratch.insert_relation("b", b_rel.clone())?;
        scratch.insert_relation("g", m.clone())?;
        run_suite("density", DENSITY_SCRIPT, &mut scratch)
    })?);
    Ok(report)
}

/// Everything: decision-procedure replay, state counts, oracles, sequence
/// identities and mutation soundness.
pub fn verify_all(c: &Candidates, bounds: Bounds) -> Result<Report> {
    let Pipeline { env, mut report } = Pipeline::run(c)?;
    report.extend(state_count_checks(&env));
    report.extend(oracle_checks(&env, bounds.automata)?);
    report.extend(sequence_checks(bounds.sequences)?);
    report.extend(mutation_checks(&env)?);
    Ok(report)
}
