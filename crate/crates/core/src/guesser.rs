//! Inference of candidate automata from sample data.
//!
//! Candidates are not proofs. They reproduce the samples they were built
//! from, and must be checked with the decision procedure before use.

use std::collections::HashMap;

use thiserror::Error;

use crate::automata::{bit_len, Dfa, Dfao};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GuessError {
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("more than {bound} states")]
    StateBound { bound: usize },
    #[error("kernel not closed at depth {depth}; increase the depth")]
    NotClosed { depth: usize },
    #[error("prefix of length {length} matches no state; increase the cutoff")]
    Cutoff { length: usize },
    #[error("candidate disagrees with the samples at n={n}")]
    Replay { n: u64 },
}

/// Default kernel depth.
pub const DEFAULT_DEPTH: usize = 12;
/// Default fingerprint length.
pub const DEFAULT_CHECK_LEN: usize = 256;

/// Guesses a DFAO for `x_0, x_1, ...` from its 2-kernel.
///
/// Kernel node `(e, r)` stands for `n -> x(2^e n + r)` and is fingerprinted
/// by its first `check_len` values. Nodes with equal fingerprints become one
/// state. Every node at exponent `depth` must match a state found earlier.
pub fn guess_dfao(
    samples: &[i64],
    depth: usize,
    check_len: usize,
    bound: usize,
) -> Result<Dfao, GuessError> {
    let needed = check_len.max(1) << depth;
    if samples.len() < needed {
        return Err(GuessError::InsufficientData {
            needed,
            got: samples.len(),
        });
    }
    let fingerprint = |e: usize, r: usize| -> Vec<i64> {
        (0..check_len.max(1))
            .map(|n| samples[(n << e) + r])
            .collect()
    };
    let mut index: HashMap<Vec<i64>, u32> = HashMap::new();
    // representative node of each state
    let mut nodes: Vec<(usize, usize)> = vec![(0, 0)];
    index.insert(fingerprint(0, 0), 0);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let (e, r) = nodes[i];
        for b in 0..2 {
            let child = (e + 1, r + (b << e));
            let fp = fingerprint(child.0, child.1);
            let id = match index.get(&fp) {
                Some(&id) => id,
                None => {
                    if child.0 >= depth {
                        return Err(GuessError::NotClosed { depth });
                    }
                    if nodes.len() >= bound {
                        return Err(GuessError::StateBound { bound });
                    }
                    nodes.push(child);
                    index.insert(fp, nodes.len() as u32 - 1);
                    nodes.len() as u32 - 1
                }
            };
            delta.push(id);
        }
        i += 1;
    }
    let output = nodes.iter().map(|&(_, r)| samples[r]).collect();
    let m = Dfao::new(0, delta, output)
        .expect("kernel automaton is well formed")
        .minimize();
    if let Some(n) = (0..samples.len()).find(|&n| m.eval(n as u64) != samples[n]) {
        return Err(GuessError::Replay { n: n as u64 });
    }
    Ok(m)
}

/// Residual of the pair prefix `(a, b)` of length `m`: for each `c` with
/// `a + 2^m c` sampled, the `d` with `z(a + 2^m c) = b + 2^m d`, if any.
fn residual(values: &[u64], a: u64, b: u64, m: usize) -> Vec<Option<u64>> {
    let step = 1u64 << m;
    (0..)
        .map(|c| a + step * c)
        .take_while(|&n| n < values.len() as u64)
        .map(|n| {
            let z = values[n as usize];
            (z >= b && (z - b) % step == 0).then(|| (z - b) / step)
        })
        .collect()
}

/// Guesses a synchronized automaton accepting `(n, z)` iff `z = values[n]`.
///
/// Prefixes of padded pair words are explored breadth first. A prefix joins
/// the first state whose residual agrees with its own on every extension that
/// keeps the total length within `cutoff` and is labeled by the samples.
pub fn guess_synchronized(values: &[u64], cutoff: usize, bound: usize) -> Result<Dfa, GuessError> {
    if values.is_empty() {
        return Err(GuessError::InsufficientData { needed: 1, got: 0 });
    }
    let consistent = |x: &[Option<u64>], mx: usize, y: &[Option<u64>], my: usize| -> bool {
        let j = cutoff.saturating_sub(mx.max(my)).min(63);
        let cap = 1u64 << j;
        let clip = |d: Option<u64>| d.filter(|&d| d < cap);
        x.iter()
            .zip(y)
            .take(cap.min(usize::MAX as u64) as usize)
            .all(|(&p, &q)| clip(p) == clip(q))
    };
    // (a, b, m, residual)
    let mut states: Vec<(u64, u64, usize, Vec<Option<u64>>)> =
        vec![(0, 0, 0, residual(values, 0, 0, 0))];
    let mut delta = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let (a, b, m) = (states[i].0, states[i].1, states[i].2);
        for sym in 0..4u64 {
            let (x, y) = (sym >> 1, sym & 1);
            let (ca, cb, cm) = (a + (x << m), b + (y << m), m + 1);
            let res = residual(values, ca, cb, cm);
            let found = states
                .iter()
                .position(|(_, _, sm, sr)| consistent(&res, cm, sr, *sm));
            let id = match found {
                Some(id) => id,
                None => {
                    if cm >= cutoff {
                        return Err(GuessError::Cutoff { length: cm });
                    }
                    if states.len() >= bound {
                        return Err(GuessError::StateBound { bound });
                    }
                    states.push((ca, cb, cm, res));
                    states.len() - 1
                }
            };
            delta.push(id as u32);
        }
        i += 1;
    }
    let accepting = states
        .iter()
        .map(|(_, _, _, r)| r.first() == Some(&Some(0)))
        .collect();
    let m = Dfa::new(2, 0, accepting, delta)
        .expect("residual automaton is well formed")
        .minimize();
    replay_function(&m, values)?;
    Ok(m)
}

/// Checks that `m` accepts exactly `(n, values[n])` for each sampled `n`,
/// among all `z` below a power of two covering the data.
pub fn replay_function(m: &Dfa, values: &[u64]) -> Result<(), GuessError> {
    let top = values
        .iter()
        .copied()
        .max()
        .unwrap_or(0)
        .max(values.len() as u64);
    let len = bit_len(top) + 1;
    let states = m.num_states();
    let mut counts = vec![0u64; states];
    let mut next = vec![0u64; states];
    for (n, &z) in values.iter().enumerate() {
        if !m.accepts(&[n as u64, z]).unwrap_or(false) {
            return Err(GuessError::Replay { n: n as u64 });
        }
        counts.iter_mut().for_each(|c| *c = 0);
        counts[m.initial()] = 1;
        for i in 0..len {
            next.iter_mut().for_each(|c| *c = 0);
            let x = ((n as u64) >> i) & 1;
            for q in 0..states {
                if counts[q] == 0 {
                    continue;
                }
                for y in 0..2u64 {
                    let t = m.next(q, ((x << 1) | y) as usize);
                    next[t] = next[t].saturating_add(counts[q]);
                }
            }
            std::mem::swap(&mut counts, &mut next);
        }
        let accepted: u64 = (0..states)
            .filter(|&q| m.is_accepting(q))
            .map(|q| counts[q])
            .sum();
        if accepted != 1 {
            return Err(GuessError::Replay { n: n as u64 });
        }
    }
    Ok(())
}
