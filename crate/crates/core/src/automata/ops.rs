use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use super::{AutomatonError, Dfa, Dfao, NumberWord, Result, SUBSET_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
    Implies,
    Iff,
    Xor,
}

impl BoolOp {
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BoolOp::And => a && b,
            BoolOp::Or => a || b,
            BoolOp::Implies => !a || b,
            BoolOp::Iff => a == b,
            BoolOp::Xor => a != b,
        }
    }
}

fn check_arity(a: &Dfa, b: &Dfa) -> Result<()> {
    if a.arity() != b.arity() {
        return Err(AutomatonError::Arity {
            expected: a.arity(),
            got: b.arity(),
        });
    }
    Ok(())
}

/// Synchronous product over aligned tracks, minimized.
pub fn product(a: &Dfa, b: &Dfa, op: BoolOp) -> Result<Dfa> {
    check_arity(a, b)?;
    let alpha = a.alphabet_size();
    let mut index: HashMap<(u32, u32), u32> = HashMap::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let start = (a.initial() as u32, b.initial() as u32);
    index.insert(start, 0);
    pairs.push(start);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (p, q) = pairs[i];
        i += 1;
        for s in 0..alpha {
            let t = (a.next(p as usize, s) as u32, b.next(q as usize, s) as u32);
            let id = match index.entry(t) {
                Entry::Occupied(e) => *e.get(),
                Entry::Vacant(e) => {
                    let id = pairs.len() as u32;
                    e.insert(id);
                    pairs.push(t);
                    id
                }
            };
            delta.push(id);
        }
    }
    let accepting = pairs
        .iter()
        .map(|&(p, q)| op.apply(a.is_accepting(p as usize), b.is_accepting(q as usize)))
        .collect();
    Ok(Dfa::from_parts(a.arity(), 0, accepting, delta).minimize())
}

/// Symbol of arity `k` obtained by inserting `bit` at `track` into a symbol
/// of arity `k - 1`.
#[inline]
fn insert_bit(symbol: usize, track: usize, arity: usize, bit: usize) -> usize {
    let pos = arity - 1 - track;
    let low = symbol & ((1 << pos) - 1);
    let high = symbol >> pos;
    (high << (pos + 1)) | (bit << pos) | low
}

pub(crate) fn project(m: &Dfa, track: usize) -> Result<Dfa> {
    let k = m.arity();
    if track >= k {
        return Err(AutomatonError::Arity {
            expected: k,
            got: track + 1,
        });
    }
    let alpha = 1usize << (k - 1);
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut subsets: Vec<Vec<u32>> = Vec::new();
    let start = vec![m.initial() as u32];
    index.insert(start.clone(), 0);
    subsets.push(start);
    let mut delta = Vec::new();
    let mut i = 0;
    let mut buf: Vec<u32> = Vec::new();
    while i < subsets.len() {
        for s in 0..alpha {
            buf.clear();
            let s0 = insert_bit(s, track, k, 0);
            let s1 = insert_bit(s, track, k, 1);
            for &q in &subsets[i] {
                buf.push(m.next(q as usize, s0) as u32);
                buf.push(m.next(q as usize, s1) as u32);
            }
            buf.sort_unstable();
            buf.dedup();
            let id = match index.get(&buf) {
                Some(&id) => id,
                None => {
                    let id = subsets.len() as u32;
                    if subsets.len() >= SUBSET_LIMIT {
                        return Err(AutomatonError::SubsetLimit {
                            track,
                            limit: SUBSET_LIMIT,
                        });
                    }
                    index.insert(buf.clone(), id);
                    subsets.push(buf.clone());
                    id
                }
            };
            delta.push(id);
        }
        i += 1;
    }
    let accepting: Vec<bool> = subsets
        .iter()
        .map(|set| set.iter().any(|&q| m.is_accepting(q as usize)))
        .collect();
    let det = Dfa::from_parts(k - 1, 0, accepting, delta);
    Ok(saturate_zero(&det).minimize())
}

/// Marks a state accepting when an accepting state is reachable from it by
/// reading all-zero symbols.
pub(crate) fn saturate_zero(m: &Dfa) -> Dfa {
    let n = m.num_states();
    let mut zero_preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    for q in 0..n {
        zero_preds[m.next(q, 0)].push(q as u32);
    }
    let mut acc = m.accepting().to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&q| acc[q]).collect();
    while let Some(q) = stack.pop() {
        for &p in &zero_preds[q] {
            if !acc[p as usize] {
                acc[p as usize] = true;
                stack.push(p as usize);
            }
        }
    }
    Dfa::from_parts(m.arity(), m.initial(), acc, m.delta().to_vec())
}

/// `None` if both automata define the same relation, otherwise a witness
/// tuple from a shortest word on which they disagree.
pub fn equivalent(a: &Dfa, b: &Dfa) -> Result<Option<Vec<u64>>> {
    check_arity(a, b)?;
    let diff = product(a, b, BoolOp::Xor)?;
    Ok(diff.shortest_accepted())
}

/// Builds a DFAO from disjoint unary relations that jointly cover every
/// natural; the output at `n` is the value of the part accepting `n`.
pub fn combine(parts: &[(&Dfa, i64)]) -> Result<Dfao> {
    for (m, _) in parts {
        if m.arity() != 1 {
            return Err(AutomatonError::Arity {
                expected: 1,
                got: m.arity(),
            });
        }
    }
    let start: Vec<u32> = parts.iter().map(|(m, _)| m.initial() as u32).collect();
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut states: Vec<Vec<u32>> = vec![start.clone()];
    let mut parent: Vec<Option<(u32, u8)>> = vec![None];
    index.insert(start, 0);
    let mut delta = Vec::new();
    let mut output = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let witness = |parent: &[Option<(u32, u8)>], mut q: usize| {
        let mut digits = Vec::new();
        while let Some((p, d)) = parent[q] {
            digits.push(d);
            q = p as usize;
        }
        digits.reverse();
        NumberWord::from_digits(digits).value()
    };
    while let Some(i) = queue.pop_front() {
        let accepting: Vec<usize> = states[i]
            .iter()
            .enumerate()
            .filter(|(j, &q)| parts[*j].0.is_accepting(q as usize))
            .map(|(j, _)| j)
            .collect();
        match accepting.as_slice() {
            [] => {
                return Err(AutomatonError::Gap {
                    n: witness(&parent, i),
                })
            }
            [j] => {
                output.resize(states.len(), 0);
                output[i] = parts[*j].1;
            }
            [first, second, ..] => {
                return Err(AutomatonError::Overlap {
                    n: witness(&parent, i),
                    first: *first,
                    second: *second,
                })
            }
        }
        for d in 0..2 {
            let t: Vec<u32> = states[i]
                .iter()
                .enumerate()
                .map(|(j, &q)| parts[j].0.next(q as usize, d) as u32)
                .collect();
            let id = match index.get(&t) {
                Some(&id) => id,
                None => {
                    let id = states.len() as u32;
                    index.insert(t.clone(), id);
                    states.push(t);
                    parent.push(Some((i as u32, d as u8)));
                    queue.push_back(id as usize);
                    id
                }
            };
            // states are dequeued in id order
            delta.push(id);
        }
    }
    output.resize(states.len(), 0);
    Ok(Dfao::new(0, delta, output)?.minimize())
}
