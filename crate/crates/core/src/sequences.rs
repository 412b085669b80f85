//! Exact generators for the regular paperfolding sequence, Cloitre's
//! self-generating sequence and every sequence derived from them by run
//! decomposition.
//!
//! All sequences are indexed from 1. Only `q` and `e'` carry a defined value
//! at index 0 (both are 0); every other sequence rejects index 0.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SequenceError {
    #[error("limit must be at least 1")]
    ZeroLimit,
    #[error("sequence {name} is not defined at index 0")]
    IndexZero { name: &'static str },
    #[error("index {index} is beyond the generated prefix of {name} (length {len})")]
    OutOfRange {
        name: &'static str,
        index: usize,
        len: usize,
    },
    #[error("unfolding instruction {0} is not -1 or +1")]
    BadInstruction(i64),
    #[error("only {available} complete runs are determined by the prefix, {requested} requested")]
    Indeterminate { requested: usize, available: usize },
    #[error("unknown sequence name {0:?}")]
    UnknownName(String),
    #[error("b-file line {line}: {msg}")]
    BFile { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, SequenceError>;

/// Unfolding instructions `f_0 f_1 ...`, each a sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldInstructions(Vec<i8>);

impl FoldInstructions {
    pub fn new(signs: &[i64]) -> Result<Self> {
        signs
            .iter()
            .map(|&s| match s {
                1 => Ok(1),
                -1 => Ok(-1),
                other => Err(SequenceError::BadInstruction(other)),
            })
            .collect::<Result<Vec<_>>>()
            .map(FoldInstructions)
    }

    /// The all-ones instructions of the given length (regular folding).
    pub fn regular(len: usize) -> Self {
        FoldInstructions(vec![1; len])
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }
}

/// Unfolds `f` into the paperfolding word `P_f`: `P_ε = ε` and
/// `P_{f a} = P_f a (-P_f reversed)`. The result has `2^|f| - 1` terms.
pub fn unfold(f: &FoldInstructions) -> Vec<i8> {
    let mut word: Vec<i8> = Vec::with_capacity((1usize << f.0.len().min(40)) - 1);
    for &a in &f.0 {
        let mirrored: Vec<i8> = word.iter().rev().map(|&x| -x).collect();
        word.push(a);
        word.extend(mirrored);
    }
    word
}

/// A 1-indexed prefix of a sequence, with an optional value at index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Terms<T> {
    name: &'static str,
    zero: Option<T>,
    terms: Vec<T>,
}

impl<T: Copy> Terms<T> {
    pub fn new(name: &'static str, zero: Option<T>, terms: Vec<T>) -> Self {
        Terms { name, zero, terms }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn get(&self, n: usize) -> Result<T> {
        if n == 0 {
            return self
                .zero
                .ok_or(SequenceError::IndexZero { name: self.name });
        }
        self.terms
            .get(n - 1)
            .copied()
            .ok_or(SequenceError::OutOfRange {
                name: self.name,
                index: n,
                len: self.terms.len(),
            })
    }

    pub fn zero(&self) -> Option<T> {
        self.zero
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms 1..=len as a slice (slice index i holds term i+1).
    pub fn as_slice(&self) -> &[T] {
        &self.terms
    }

    /// Terms 0..=len, using `fill` at index 0 when no value is defined there.
    pub fn with_zero(&self, fill: T) -> Vec<T> {
        let mut v = Vec::with_capacity(self.terms.len() + 1);
        v.push(self.zero.unwrap_or(fill));
        v.extend_from_slice(&self.terms);
        v
    }

    pub fn truncate(mut self, len: usize) -> Self {
        self.terms.truncate(len);
        self
    }

    pub fn into_vec(self) -> Vec<T> {
        self.terms
    }
}

fn check_limit(limit: usize) -> Result<()> {
    if limit == 0 {
        Err(SequenceError::ZeroLimit)
    } else {
        Ok(())
    }
}

/// Cloitre's sequence, produced by reading it while it is written: run `n`
/// has value 1 for odd `n` and 2 for even `n`, and sums to `2 a_n`.
pub fn cloitre(limit: usize) -> Result<Terms<u8>> {
    check_limit(limit)?;
    let mut a: Vec<u8> = Vec::with_capacity(limit + 4);
    a.push(1);
    let mut run = 0usize;
    while a.len() < limit {
        let value: u8 = if run % 2 == 0 { 1 } else { 2 };
        // a[run] always exists: every run has length >= 1 and run 0 has length 2.
        let len = 2 * a[run] as usize / value as usize;
        if run == 0 {
            // a_1 = 1 is already in place; run 1 is "1,1".
            a.push(1);
        } else {
            a.extend(std::iter::repeat(value).take(len));
        }
        run += 1;
    }
    a.truncate(limit);
    Ok(Terms::new("a", None, a))
}

/// `q_n` from the recurrence `q_{2n} = q_n`, `q_{4n+1} = 0`, `q_{4n+3} = 1`;
/// `q_0 = 0`.
pub fn q_at(n: u64) -> u8 {
    if n == 0 {
        return 0;
    }
    let odd = n >> n.trailing_zeros();
    ((odd >> 1) & 1) as u8
}

pub fn q_terms(limit: usize) -> Result<Terms<u8>> {
    check_limit(limit)?;
    Ok(Terms::new(
        "q",
        Some(0),
        (1..=limit as u64).map(q_at).collect(),
    ))
}

/// The regular paperfolding sequence over {-1, +1}.
pub fn p_terms(limit: usize) -> Result<Terms<i8>> {
    check_limit(limit)?;
    Ok(Terms::new(
        "p",
        None,
        (1..=limit as u64).map(|n| 1 - 2 * q_at(n) as i8).collect(),
    ))
}

/// First difference of `q`, with `d_1 = 1` as a special case.
pub fn diff_terms(limit: usize) -> Result<Terms<i8>> {
    check_limit(limit)?;
    let mut d = Vec::with_capacity(limit);
    d.push(1i8);
    let mut prev = q_at(1) as i8;
    for n in 2..=limit as u64 {
        let cur = q_at(n) as i8;
        d.push(cur - prev);
        prev = cur;
    }
    Ok(Terms::new("d", None, d))
}

pub fn dprime_terms(limit: usize) -> Result<Terms<u8>> {
    let d = diff_terms(limit)?;
    Ok(Terms::new(
        "dprime",
        None,
        d.as_slice().iter().map(|x| x.unsigned_abs()).collect(),
    ))
}

/// One maximal run; positions are 1-based and inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Run {
    pub value: i64,
    pub length: u64,
    pub start: u64,
    pub end: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunDecomposition {
    runs: Vec<Run>,
}

impl RunDecomposition {
    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn lengths(&self) -> impl Iterator<Item = u64> + '_ {
        self.runs.iter().map(|r| r.length)
    }

    pub fn ends(&self) -> impl Iterator<Item = u64> + '_ {
        self.runs.iter().map(|r| r.end)
    }

    pub fn starts(&self) -> impl Iterator<Item = u64> + '_ {
        self.runs.iter().map(|r| r.start)
    }

    /// Checks contiguity, maximality and the start-at-1 condition.
    pub fn is_well_formed(&self) -> bool {
        let mut expected_start = 1;
        let mut prev: Option<i64> = None;
        for r in &self.runs {
            if r.length == 0 || r.start != expected_start || r.end != r.start + r.length - 1 {
                return false;
            }
            if prev == Some(r.value) {
                return false;
            }
            prev = Some(r.value);
            expected_start = r.end + 1;
        }
        true
    }
}

/// Splits the prefix `seq` (term 1 at slice index 0) into its first `count`
/// runs. A run counts as complete only when a differing symbol follows it,
/// or when `end_of_data` declares the prefix to be the whole sequence.
pub fn run_decompose<T>(seq: &[T], count: usize, end_of_data: bool) -> Result<RunDecomposition>
where
    T: Copy + PartialEq + Into<i64>,
{
    let mut runs = Vec::with_capacity(count);
    let mut start = 0usize;
    while runs.len() < count && start < seq.len() {
        let value = seq[start];
        let mut end = start;
        while end + 1 < seq.len() && seq[end + 1] == value {
            end += 1;
        }
        if end + 1 == seq.len() && !end_of_data {
            break;
        }
        runs.push(Run {
            value: value.into(),
            length: (end - start + 1) as u64,
            start: start as u64 + 1,
            end: end as u64 + 1,
        });
        start = end + 1;
    }
    if runs.len() < count {
        return Err(SequenceError::Indeterminate {
            requested: count,
            available: runs.len(),
        });
    }
    Ok(RunDecomposition { runs })
}

/// Decomposes a lazily produced sequence, regenerating with twice as many
/// terms until `count` runs are witnessed.
fn runs_with_slack<T, F>(count: usize, mut initial: usize, produce: F) -> Result<RunDecomposition>
where
    T: Copy + PartialEq + Into<i64>,
    F: Fn(usize) -> Result<Vec<T>>,
{
    loop {
        let prefix = produce(initial)?;
        match run_decompose(&prefix, count, false) {
            Ok(d) => return Ok(d),
            Err(SequenceError::Indeterminate { .. }) => initial *= 2,
            Err(e) => return Err(e),
        }
    }
}

/// Runs of `d'` (yielding `s'`, `e'`, `b`).
pub fn dprime_runs(count: usize) -> Result<RunDecomposition> {
    check_limit(count)?;
    runs_with_slack(count, 2 * count + 2, |len| {
        dprime_terms(len).map(Terms::into_vec)
    })
}

/// Runs of `b` (yielding `s`, `e`, `r`, and the values for `σ`).
pub fn b_runs(count: usize) -> Result<RunDecomposition> {
    check_limit(count)?;
    runs_with_slack(count, 2 * count + 2, |len| {
        b_terms(len).map(Terms::into_vec)
    })
}

/// Run lengths of `d'`; equal to Cloitre's sequence.
pub fn b_terms(limit: usize) -> Result<Terms<u8>> {
    let runs = dprime_runs(limit)?;
    Ok(Terms::new(
        "b",
        None,
        runs.lengths().map(|l| l as u8).collect(),
    ))
}

/// End positions of the runs of `d'`, with `e'_0 = 0`.
pub fn eprime_terms(limit: usize) -> Result<Terms<u32>> {
    let runs = dprime_runs(limit)?;
    Ok(Terms::new(
        "eprime",
        Some(0),
        runs.ends().map(|e| e as u32).collect(),
    ))
}

pub fn sprime_terms(limit: usize) -> Result<Terms<u32>> {
    let runs = dprime_runs(limit)?;
    Ok(Terms::new(
        "sprime",
        None,
        runs.starts().map(|s| s as u32).collect(),
    ))
}

pub fn e_terms(limit: usize) -> Result<Terms<u32>> {
    let runs = b_runs(limit)?;
    Ok(Terms::new(
        "e",
        None,
        runs.ends().map(|e| e as u32).collect(),
    ))
}

pub fn s_terms(limit: usize) -> Result<Terms<u32>> {
    let runs = b_runs(limit)?;
    Ok(Terms::new(
        "s",
        None,
        runs.starts().map(|s| s as u32).collect(),
    ))
}

pub fn r_terms(limit: usize) -> Result<Terms<u8>> {
    let runs = b_runs(limit)?;
    Ok(Terms::new(
        "r",
        None,
        runs.lengths().map(|l| l as u8).collect(),
    ))
}

/// Sum of the values in run `n` of `b`: run length times run value.
pub fn sigma_terms(limit: usize) -> Result<Terms<u8>> {
    let runs = b_runs(limit)?;
    Ok(Terms::new(
        "sigma",
        None,
        runs.runs()
            .iter()
            .map(|r| (r.length as i64 * r.value) as u8)
            .collect(),
    ))
}

/// Prefix count of ones in `b` together with `h = 3g - 2n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountingState {
    pub n: u64,
    pub g: u64,
    pub h: i64,
}

pub fn counting_states(limit: usize) -> Result<Vec<CountingState>> {
    let b = b_terms(limit)?;
    let mut g = 0u64;
    Ok(b.as_slice()
        .iter()
        .enumerate()
        .map(|(i, &bn)| {
            let n = i as u64 + 1;
            g += u64::from(bn == 1);
            CountingState {
                n,
                g,
                h: 3 * g as i64 - 2 * n as i64,
            }
        })
        .collect())
}

pub fn g_terms(limit: usize) -> Result<Terms<u32>> {
    let states = counting_states(limit)?;
    Ok(Terms::new(
        "g",
        Some(0),
        states.iter().map(|s| s.g as u32).collect(),
    ))
}

pub fn h_terms(limit: usize) -> Result<Terms<i32>> {
    let states = counting_states(limit)?;
    Ok(Terms::new(
        "h",
        Some(0),
        states.iter().map(|s| s.h as i32).collect(),
    ))
}

/// `w_n = min { t >= 1 : e'_t >= n }`, defined for n >= 1 only.
pub fn w_terms(limit: usize) -> Result<Terms<u32>> {
    check_limit(limit)?;
    // e'_t >= t, so t <= limit suffices.
    let ep = eprime_terms(limit)?;
    let ends = ep.as_slice();
    let mut w = Vec::with_capacity(limit);
    let mut t = 0usize;
    for n in 1..=limit as u32 {
        while ends[t] < n {
            t += 1;
        }
        w.push(t as u32 + 1);
    }
    Ok(Terms::new("w", None, w))
}

/// Every sequence that can be generated by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SequenceName {
    A,
    P,
    Q,
    D,
    Dprime,
    Eprime,
    Sprime,
    B,
    E,
    S,
    R,
    Sigma,
    G,
    H,
    W,
}

impl SequenceName {
    pub const ALL: [SequenceName; 15] = [
        SequenceName::A,
        SequenceName::P,
        SequenceName::Q,
        SequenceName::D,
        SequenceName::Dprime,
        SequenceName::Eprime,
        SequenceName::Sprime,
        SequenceName::B,
        SequenceName::E,
        SequenceName::S,
        SequenceName::R,
        SequenceName::Sigma,
        SequenceName::G,
        SequenceName::H,
        SequenceName::W,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SequenceName::A => "a",
            SequenceName::P => "p",
            SequenceName::Q => "q",
            SequenceName::D => "d",
            SequenceName::Dprime => "dprime",
            SequenceName::Eprime => "eprime",
            SequenceName::Sprime => "sprime",
            SequenceName::B => "b",
            SequenceName::E => "e",
            SequenceName::S => "s",
            SequenceName::R => "r",
            SequenceName::Sigma => "sigma",
            SequenceName::G => "g",
            SequenceName::H => "h",
            SequenceName::W => "w",
        }
    }

    /// Terms 1..=limit widened to `i64`.
    pub fn generate(self, limit: usize) -> Result<Vec<i64>> {
        fn widen<T: Copy + Into<i64>>(t: Terms<T>) -> Vec<i64> {
            t.as_slice().iter().map(|&x| x.into()).collect()
        }
        Ok(match self {
            SequenceName::A => widen(cloitre(limit)?),
            SequenceName::P => widen(p_terms(limit)?),
            SequenceName::Q => widen(q_terms(limit)?),
            SequenceName::D => widen(diff_terms(limit)?),
            SequenceName::Dprime => widen(dprime_terms(limit)?),
            SequenceName::Eprime => widen(eprime_terms(limit)?),
            SequenceName::Sprime => widen(sprime_terms(limit)?),
            SequenceName::B => widen(b_terms(limit)?),
            SequenceName::E => widen(e_terms(limit)?),
            SequenceName::S => widen(s_terms(limit)?),
            SequenceName::R => widen(r_terms(limit)?),
            SequenceName::Sigma => widen(sigma_terms(limit)?),
            SequenceName::G => widen(g_terms(limit)?),
            SequenceName::H => widen(h_terms(limit)?),
            SequenceName::W => widen(w_terms(limit)?),
        })
    }
}

impl fmt::Display for SequenceName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SequenceName {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self> {
        SequenceName::ALL
            .iter()
            .copied()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| SequenceError::UnknownName(s.to_string()))
    }
}

/// Memoizing wrapper: keeps the longest prefix generated so far and
/// regenerates at double length when a later index is requested.
#[derive(Clone, Debug)]
pub struct SequenceStream {
    name: SequenceName,
    terms: Vec<i64>,
}

impl SequenceStream {
    pub fn new(name: SequenceName) -> Self {
        SequenceStream {
            name,
            terms: Vec::new(),
        }
    }

    pub fn get(&mut self, n: usize) -> Result<i64> {
        if n == 0 {
            return match self.name {
                SequenceName::Q | SequenceName::Eprime | SequenceName::G | SequenceName::H => Ok(0),
                _ => Err(SequenceError::IndexZero {
                    name: self.name.as_str(),
                }),
            };
        }
        if n > self.terms.len() {
            let len = n.max(2 * self.terms.len()).max(64);
            self.terms = self.name.generate(len)?;
        }
        Ok(self.terms[n - 1])
    }

    pub fn prefix(&mut self, len: usize) -> Result<&[i64]> {
        if len > 0 {
            self.get(len)?;
        }
        Ok(&self.terms[..len])
    }
}

/// One row of the reproduced sequence table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub n: usize,
    pub values: Vec<i64>,
}

/// The table of all derived sequences for `start..=end`.
pub fn table(start: usize, end: usize) -> Result<Vec<TableRow>> {
    if start == 0 || end < start {
        return Err(SequenceError::ZeroLimit);
    }
    let table_columns = table_columns();
    let columns = table_columns
        .iter()
        .map(|name| name.generate(end))
        .collect::<Result<Vec<_>>>()?;
    Ok((start..=end)
        .map(|n| TableRow {
            n,
            values: columns.iter().map(|c| c[n - 1]).collect(),
        })
        .collect())
}

/// Column order of [`table`].
pub fn table_columns() -> Vec<SequenceName> {
    SequenceName::ALL
        .iter()
        .copied()
        .filter(|n| *n != SequenceName::W)
        .collect()
}

pub fn write_table_csv<W: Write>(out: &mut W, rows: &[TableRow]) -> io::Result<()> {
    let header: Vec<&str> = std::iter::once("n")
        .chain(table_columns().iter().map(|c| c.as_str()))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = std::iter::once(row.n.to_string())
            .chain(row.values.iter().map(|v| v.to_string()))
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Writes `index value` lines, one per term, newline-terminated.
pub fn write_bfile<W: Write>(
    out: &mut W,
    first_index: u64,
    values: impl IntoIterator<Item = i64>,
) -> io::Result<()> {
    for (i, v) in values.into_iter().enumerate() {
        writeln!(out, "{} {}", first_index + i as u64, v)?;
    }
    Ok(())
}

pub fn write_csv<W: Write>(
    out: &mut W,
    name: &str,
    first_index: u64,
    values: impl IntoIterator<Item = i64>,
) -> io::Result<()> {
    writeln!(out, "n,{name}")?;
    for (i, v) in values.into_iter().enumerate() {
        writeln!(out, "{},{}", first_index + i as u64, v)?;
    }
    Ok(())
}

/// Reads a b-file. Blank lines and `#` comments are skipped; indices must be
/// consecutive.
pub fn read_bfile<R: BufRead>(input: R) -> Result<Vec<(u64, i64)>> {
    let mut out: Vec<(u64, i64)> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| SequenceError::BFile {
            line: line_no,
            msg: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| SequenceError::BFile {
            line: line_no,
            msg: msg.to_string(),
        };
        let mut parts = trimmed.split_whitespace();
        let index: u64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("expected an index"))?;
        let value: i64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("expected a value"))?;
        if parts.next().is_some() {
            return Err(bad("trailing fields"));
        }
        if let Some(&(prev, _)) = out.last() {
            if index != prev + 1 {
                return Err(bad("indices are not consecutive"));
            }
        }
        out.push((index, value));
    }
    Ok(out)
}
