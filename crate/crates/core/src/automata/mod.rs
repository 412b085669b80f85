//! Deterministic automata over tuple digits `{0,1}^k`, reading numbers in
//! base 2 with the least significant digit first.
//!
//! A symbol of arity `k` is stored as an integer in `0..2^k`; track 0 is the
//! most significant bit, so symbol order is the lexicographic tuple order.
//! All automata are complete: a dead state is materialized when needed.

mod builtin;
mod format;
mod minimize;
mod ops;
mod regex;

pub use builtin::*;
pub use format::{parse_text, to_dot, to_text, Automaton};
pub use ops::{combine, equivalent, product, BoolOp};
pub use regex::{regex_to_dfa, RegexRelation};

use std::collections::VecDeque;

use thiserror::Error;

/// Hard cap on the number of subsets explored by a single determinization.
pub const SUBSET_LIMIT: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("malformed automaton: {0}")]
    Malformed(String),
    #[error("projection of track {track} exceeded {limit} subsets")]
    SubsetLimit { track: usize, limit: usize },
    #[error("combine: {n} is accepted by both {first} and {second}")]
    Overlap { n: u64, first: usize, second: usize },
    #[error("combine: {n} is accepted by no part")]
    Gap { n: u64 },
    #[error("regex error at offset {offset}: {msg}")]
    Regex { offset: usize, msg: String },
    #[error("automaton text line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, AutomatonError>;

/// A natural number as its lsd-first binary digits; the empty word is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberWord(Vec<u8>);

impl NumberWord {
    pub fn from_value(mut n: u64) -> Self {
        let mut digits = Vec::new();
        while n > 0 {
            digits.push((n & 1) as u8);
            n >>= 1;
        }
        NumberWord(digits)
    }

    pub fn from_digits(digits: Vec<u8>) -> Self {
        NumberWord(digits)
    }

    pub fn value(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &d)| u64::from(d) << i)
            .sum()
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn padded(&self, len: usize) -> Vec<u8> {
        let mut d = self.0.clone();
        d.resize(len.max(d.len()), 0);
        d
    }
}

pub fn bit_len(n: u64) -> usize {
    (64 - n.leading_zeros()) as usize
}

/// Digit of `track` inside `symbol` for the given arity.
#[inline]
pub fn digit(symbol: usize, track: usize, arity: usize) -> usize {
    (symbol >> (arity - 1 - track)) & 1
}

/// Parallel lsd-first encoding of a tuple, padded to `len` digits at least.
pub fn encode_tuple(tuple: &[u64], min_len: usize) -> Vec<usize> {
    let k = tuple.len();
    let len = tuple
        .iter()
        .map(|&t| bit_len(t))
        .max()
        .unwrap_or(0)
        .max(min_len);
    (0..len)
        .map(|j| {
            tuple.iter().enumerate().fold(0usize, |s, (i, &t)| {
                s | ((((t >> j) & 1) as usize) << (k - 1 - i))
            })
        })
        .collect()
}

pub fn decode_word(word: &[usize], arity: usize) -> Vec<u64> {
    let mut tuple = vec![0u64; arity];
    for (j, &sym) in word.iter().enumerate() {
        for (i, t) in tuple.iter_mut().enumerate() {
            *t |= (digit(sym, i, arity) as u64) << j;
        }
    }
    tuple
}

/// Deterministic complete automaton over `{0,1}^arity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    arity: usize,
    initial: u32,
    accepting: Vec<bool>,
    delta: Vec<u32>,
}

/// State counts under both dead-state conventions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct StateCounts {
    pub total: usize,
    pub live: usize,
}

impl StateCounts {
    /// True if `expected` matches either convention.
    pub fn matches(&self, expected: usize) -> bool {
        self.total == expected || self.live == expected
    }
}

impl Dfa {
    /// `delta[q * 2^arity + symbol]` is the successor of `q` on `symbol`.
    pub fn new(
        arity: usize,
        initial: usize,
        accepting: Vec<bool>,
        delta: Vec<u32>,
    ) -> Result<Self> {
        let n = accepting.len();
        let alpha = 1usize << arity;
        if n == 0 || initial >= n {
            return Err(AutomatonError::Malformed("bad initial state".into()));
        }
        if delta.len() != n * alpha {
            return Err(AutomatonError::Malformed(format!(
                "expected {} transitions, got {}",
                n * alpha,
                delta.len()
            )));
        }
        if delta.iter().any(|&t| t as usize >= n) {
            return Err(AutomatonError::Malformed(
                "transition target out of range".into(),
            ));
        }
        Ok(Dfa {
            arity,
            initial: initial as u32,
            accepting,
            delta,
        })
    }

    pub(crate) fn from_parts(
        arity: usize,
        initial: usize,
        accepting: Vec<bool>,
        delta: Vec<u32>,
    ) -> Self {
        debug_assert_eq!(delta.len(), accepting.len() << arity);
        Dfa {
            arity,
            initial: initial as u32,
            accepting,
            delta,
        }
    }

    /// The relation containing every tuple.
    pub fn full(arity: usize) -> Self {
        Dfa::from_parts(arity, 0, vec![true], vec![0; 1 << arity])
    }

    pub fn empty(arity: usize) -> Self {
        Dfa::from_parts(arity, 0, vec![false], vec![0; 1 << arity])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn alphabet_size(&self) -> usize {
        1 << self.arity
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        self.initial as usize
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    #[inline]
    pub fn next(&self, q: usize, symbol: usize) -> usize {
        self.delta[(q << self.arity) | symbol] as usize
    }

    pub(crate) fn delta(&self) -> &[u32] {
        &self.delta
    }

    pub fn run(&self, word: &[usize]) -> usize {
        word.iter().fold(self.initial(), |q, &s| self.next(q, s))
    }

    pub fn accepts_word(&self, word: &[usize]) -> bool {
        self.accepting[self.run(word)]
    }

    /// Membership of a tuple of naturals.
    pub fn accepts(&self, tuple: &[u64]) -> Result<bool> {
        if tuple.len() != self.arity {
            return Err(AutomatonError::Arity {
                expected: self.arity,
                got: tuple.len(),
            });
        }
        Ok(self.accepts_word(&encode_tuple(tuple, 0)))
    }

    /// States from which some accepting state is reachable.
    pub fn live_states(&self) -> Vec<bool> {
        let n = self.num_states();
        let alpha = self.alphabet_size();
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
        for q in 0..n {
            for s in 0..alpha {
                preds[self.next(q, s)].push(q as u32);
            }
        }
        let mut live = self.accepting.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&q| live[q]).collect();
        while let Some(q) = stack.pop() {
            for &p in &preds[q] {
                if !live[p as usize] {
                    live[p as usize] = true;
                    stack.push(p as usize);
                }
            }
        }
        live
    }

    pub fn state_counts(&self) -> StateCounts {
        StateCounts {
            total: self.num_states(),
            live: self.live_states().iter().filter(|&&l| l).count(),
        }
    }

    /// Every reachable state agrees in acceptance with its zero-successor.
    pub fn is_padding_closed(&self) -> bool {
        self.reachable()
            .iter()
            .all(|&q| self.accepting[q] == self.accepting[self.next(q, 0)])
    }

    /// Reachable states in breadth-first order from the initial state.
    pub fn reachable(&self) -> Vec<usize> {
        bfs_order(
            self.num_states(),
            self.alphabet_size(),
            self.initial(),
            &self.delta,
        )
    }

    /// Shortest accepted word decoded as a tuple, if the relation is nonempty.
    pub fn shortest_accepted(&self) -> Option<Vec<u64>> {
        let n = self.num_states();
        let alpha = self.alphabet_size();
        let mut parent: Vec<Option<(u32, u32)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        seen[self.initial()] = true;
        queue.push_back(self.initial());
        while let Some(q) = queue.pop_front() {
            if self.accepting[q] {
                let mut word = Vec::new();
                let mut cur = q;
                while let Some((p, s)) = parent[cur] {
                    word.push(s as usize);
                    cur = p as usize;
                }
                word.reverse();
                return Some(decode_word(&word, self.arity));
            }
            for s in 0..alpha {
                let t = self.next(q, s);
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q as u32, s as u32));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    pub fn is_empty(&self) -> bool {
        self.shortest_accepted().is_none()
    }

    pub fn complement(&self) -> Dfa {
        Dfa {
            accepting: self.accepting.iter().map(|a| !a).collect(),
            ..self.clone()
        }
    }

    /// Minimal equivalent automaton with canonical breadth-first numbering.
    pub fn minimize(&self) -> Dfa {
        let colors: Vec<u64> = self.accepting.iter().map(|&a| u64::from(a)).collect();
        let m =
            minimize::minimize_colored(self.alphabet_size(), self.initial(), &self.delta, &colors);
        Dfa::from_parts(
            self.arity,
            0,
            m.colors.iter().map(|&c| c == 1).collect(),
            m.delta,
        )
    }

    /// Reinterprets the automaton over `new_arity` tracks: old track `i`
    /// becomes track `positions[i]`; the remaining tracks are ignored.
    pub fn expand(&self, positions: &[usize], new_arity: usize) -> Result<Dfa> {
        if positions.len() != self.arity {
            return Err(AutomatonError::Arity {
                expected: self.arity,
                got: positions.len(),
            });
        }
        let alpha = 1usize << new_arity;
        let old_symbol: Vec<usize> = (0..alpha)
            .map(|s| {
                positions.iter().enumerate().fold(0, |acc, (i, &p)| {
                    acc | (digit(s, p, new_arity) << (self.arity - 1 - i))
                })
            })
            .collect();
        let n = self.num_states();
        let mut delta = Vec::with_capacity(n * alpha);
        for q in 0..n {
            for &os in &old_symbol {
                delta.push(self.delta[(q << self.arity) | os]);
            }
        }
        Ok(Dfa::from_parts(
            new_arity,
            self.initial(),
            self.accepting.clone(),
            delta,
        ))
    }

    /// Existential projection of one track, followed by zero-suffix
    /// saturation and minimization.
    pub fn project(&self, track: usize) -> Result<Dfa> {
        ops::project(self, track)
    }

    /// Redirects one transition; used to build mutants.
    pub fn with_transition(&self, q: usize, symbol: usize, target: usize) -> Dfa {
        let mut m = self.clone();
        m.delta[(q << self.arity) | symbol] = target as u32;
        m
    }
}

pub(crate) fn bfs_order(n: usize, alpha: usize, initial: usize, delta: &[u32]) -> Vec<usize> {
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    seen[initial] = true;
    order.push(initial);
    let mut i = 0;
    while i < order.len() {
        let q = order[i];
        i += 1;
        for s in 0..alpha {
            let t = delta[q * alpha + s] as usize;
            if !seen[t] {
                seen[t] = true;
                order.push(t);
            }
        }
    }
    order
}

/// Deterministic automaton with output, reading one number lsd-first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfao {
    initial: u32,
    delta: Vec<u32>,
    output: Vec<i64>,
}

impl Dfao {
    /// `delta[2q + digit]` is the successor of `q`.
    pub fn new(initial: usize, delta: Vec<u32>, output: Vec<i64>) -> Result<Self> {
        let n = output.len();
        if n == 0 || initial >= n || delta.len() != 2 * n || delta.iter().any(|&t| t as usize >= n)
        {
            return Err(AutomatonError::Malformed("inconsistent DFAO tables".into()));
        }
        Ok(Dfao {
            initial: initial as u32,
            delta,
            output,
        })
    }

    pub fn num_states(&self) -> usize {
        self.output.len()
    }

    pub fn initial(&self) -> usize {
        self.initial as usize
    }

    pub fn next(&self, q: usize, d: usize) -> usize {
        self.delta[2 * q + d] as usize
    }

    pub fn output(&self, q: usize) -> i64 {
        self.output[q]
    }

    pub fn outputs(&self) -> &[i64] {
        &self.output
    }

    /// Distinct output values in ascending order.
    pub fn output_values(&self) -> Vec<i64> {
        let mut v = self.output.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn eval_word(&self, digits: &[u8]) -> i64 {
        let q = digits
            .iter()
            .fold(self.initial(), |q, &d| self.next(q, d as usize));
        self.output[q]
    }

    pub fn eval(&self, n: u64) -> i64 {
        let mut q = self.initial();
        let mut m = n;
        while m > 0 {
            q = self.next(q, (m & 1) as usize);
            m >>= 1;
        }
        self.output[q]
    }

    pub fn is_padding_consistent(&self) -> bool {
        bfs_order(self.num_states(), 2, self.initial(), &self.delta)
            .into_iter()
            .all(|q| self.output[q] == self.output[self.next(q, 0)])
    }

    pub fn minimize(&self) -> Dfao {
        let mut values = self.output_values();
        values.dedup();
        let colors: Vec<u64> = self
            .output
            .iter()
            .map(|o| values.binary_search(o).unwrap() as u64)
            .collect();
        let m = minimize::minimize_colored(2, self.initial(), &self.delta, &colors);
        Dfao {
            initial: 0,
            delta: m.delta,
            output: m.colors.iter().map(|&c| values[c as usize]).collect(),
        }
    }

    /// The unary relation `{ n : pred(self(n)) }`.
    pub fn predicate(&self, pred: impl Fn(i64) -> bool) -> Dfa {
        Dfa::from_parts(
            1,
            self.initial(),
            self.output.iter().map(|&o| pred(o)).collect(),
            self.delta.clone(),
        )
        .minimize()
    }

    /// Shortest `n` on which the two automata differ, if any.
    pub fn difference(&self, other: &Dfao) -> Option<u64> {
        let mut seen = std::collections::HashMap::new();
        let mut queue = VecDeque::new();
        let start = (self.initial(), other.initial());
        seen.insert(start, None::<((usize, usize), usize)>);
        queue.push_back(start);
        while let Some((a, b)) = queue.pop_front() {
            if self.output[a] != other.output[b] {
                let mut digits = Vec::new();
                let mut cur = (a, b);
                while let Some(Some((p, d))) = seen.get(&cur) {
                    digits.push(*d as u8);
                    cur = *p;
                }
                digits.reverse();
                return Some(NumberWord::from_digits(digits).value());
            }
            for d in 0..2 {
                let t = (self.next(a, d), other.next(b, d));
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(t) {
                    e.insert(Some(((a, b), d)));
                    queue.push_back(t);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_encoding() {
        let w = encode_tuple(&[2, 3, 5], 0);
        // lsd first: (0,1,1) (1,1,0) (0,0,1)
        assert_eq!(w, vec![0b011, 0b110, 0b001]);
        assert_eq!(decode_word(&w, 3), vec![2, 3, 5]);
        assert_eq!(encode_tuple(&[0, 0], 0), Vec::<usize>::new());
        assert_eq!(encode_tuple(&[1], 3), vec![1, 0, 0]);
        assert_eq!(NumberWord::from_value(6).digits(), &[0, 1, 1]);
        assert_eq!(NumberWord::from_digits(vec![0, 1, 1, 0, 0]).value(), 6);
        assert_eq!(NumberWord::from_value(0).value(), 0);
    }

    #[test]
    fn arity_checked() {
        let full = Dfa::full(2);
        assert_eq!(
            full.accepts(&[1]),
            Err(AutomatonError::Arity {
                expected: 2,
                got: 1
            })
        );
        assert!(full.accepts(&[1, 9]).unwrap());
        assert!(!Dfa::empty(0).accepts(&[]).unwrap());
    }

    #[test]
    fn dead_state_counts() {
        let eq = equality();
        assert_eq!(eq.state_counts(), StateCounts { total: 2, live: 1 });
        assert!(eq.state_counts().matches(1));
        assert!(eq.state_counts().matches(2));
    }
}
