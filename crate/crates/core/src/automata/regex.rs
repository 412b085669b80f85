//! Regular expressions over `{0,1}` read as lsd-first numbers.
//!
//! Grammar: alternation `|`, concatenation, postfix `*`, parentheses, and
//! `()` for the empty word.

use std::collections::{BTreeSet, HashMap};

use super::{AutomatonError, Dfa, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Regex {
    Epsilon,
    Digit(u8),
    Concat(Box<Regex>, Box<Regex>),
    Alt(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> AutomatonError {
        AutomatonError::Regex {
            offset: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn alt(&mut self) -> Result<Regex> {
        let mut left = self.concat()?;
        while self.peek() == Some(b'|') {
            self.pos += 1;
            let right = self.concat()?;
            left = Regex::Alt(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn concat(&mut self) -> Result<Regex> {
        let mut parts = Vec::new();
        while let Some(c) = self.peek() {
            if c == b'|' || c == b')' {
                break;
            }
            parts.push(self.starred()?);
        }
        Ok(parts
            .into_iter()
            .reduce(|a, b| Regex::Concat(Box::new(a), Box::new(b)))
            .unwrap_or(Regex::Epsilon))
    }

    fn starred(&mut self) -> Result<Regex> {
        let mut atom = self.atom()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            atom = Regex::Star(Box::new(atom));
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<Regex> {
        match self.peek() {
            Some(b'0') => {
                self.pos += 1;
                Ok(Regex::Digit(0))
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(Regex::Digit(1))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.alt()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of pattern")),
        }
    }
}

fn parse(pattern: &str) -> Result<Regex> {
    let mut p = Parser {
        src: pattern.as_bytes(),
        pos: 0,
    };
    let r = p.alt()?;
    if p.peek().is_some() {
        return Err(p.err("unbalanced ')'"));
    }
    Ok(r)
}

/// Thompson NFA: transitions on digits plus epsilon moves.
#[derive(Default)]
struct Nfa {
    digit_moves: Vec<Vec<(u8, usize)>>,
    eps: Vec<Vec<usize>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.digit_moves.push(Vec::new());
        self.eps.push(Vec::new());
        self.eps.len() - 1
    }

    /// Returns (entry, exit).
    fn build(&mut self, r: &Regex) -> (usize, usize) {
        match r {
            Regex::Epsilon => {
                let s = self.state();
                (s, s)
            }
            Regex::Digit(d) => {
                let (a, b) = (self.state(), self.state());
                self.digit_moves[a].push((*d, b));
                (a, b)
            }
            Regex::Concat(x, y) => {
                let (xa, xb) = self.build(x);
                let (ya, yb) = self.build(y);
                self.eps[xb].push(ya);
                (xa, yb)
            }
            Regex::Alt(x, y) => {
                let (a, b) = (self.state(), self.state());
                let (xa, xb) = self.build(x);
                let (ya, yb) = self.build(y);
                self.eps[a].extend([xa, ya]);
                self.eps[xb].push(b);
                self.eps[yb].push(b);
                (a, b)
            }
            Regex::Star(x) => {
                let (a, b) = (self.state(), self.state());
                let (xa, xb) = self.build(x);
                self.eps[a].extend([xa, b]);
                self.eps[xb].extend([xa, b]);
                (a, b)
            }
        }
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(q) = stack.pop() {
            for &t in &self.eps[q] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
    }
}

/// The raw language of the pattern as a unary DFA (not padding-closed in
/// general).
fn raw_dfa(r: &Regex) -> Dfa {
    let mut nfa = Nfa::default();
    let (entry, exit) = nfa.build(r);
    let mut start = BTreeSet::from([entry]);
    nfa.closure(&mut start);
    let mut index: HashMap<BTreeSet<usize>, u32> = HashMap::from([(start.clone(), 0)]);
    let mut sets = vec![start];
    let mut delta = Vec::new();
    let mut i = 0;
    while i < sets.len() {
        for d in 0..2u8 {
            let mut next: BTreeSet<usize> = sets[i]
                .iter()
                .flat_map(|&q| nfa.digit_moves[q].iter())
                .filter(|(dd, _)| *dd == d)
                .map(|&(_, t)| t)
                .collect();
            nfa.closure(&mut next);
            let id = *index.entry(next.clone()).or_insert_with(|| {
                sets.push(next);
                sets.len() as u32 - 1
            });
            delta.push(id);
        }
        i += 1;
    }
    let accepting = sets.iter().map(|s| s.contains(&exit)).collect();
    Dfa::from_parts(1, 0, accepting, delta).minimize()
}

/// The unary relation of a pattern, plus whether the raw word language was
/// already padding-closed.
#[derive(Clone, Debug)]
pub struct RegexRelation {
    pub dfa: Dfa,
    pub padding_closed: bool,
}

/// `n` is in the relation iff some lsd representation of `n` (canonical
/// digits followed by any number of zeros) matches the pattern.
pub fn regex_to_dfa(pattern: &str) -> Result<RegexRelation> {
    let raw = raw_dfa(&parse(pattern)?);
    let padding_closed = raw.is_padding_closed();
    let sat = super::ops::saturate_zero(&raw);
    // Track (state after the last 1, current state); acceptance depends on
    // the first component only, so trailing zeros are irrelevant.
    let n = raw.num_states();
    let start = raw.initial();
    let mut index: HashMap<(usize, usize), u32> = HashMap::from([((start, start), 0)]);
    let mut pairs = vec![(start, start)];
    let mut delta = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (strip, cur) = pairs[i];
        for d in 0..2 {
            let c = raw.next(cur, d);
            let t = if d == 1 { (c, c) } else { (strip, c) };
            let id = *index.entry(t).or_insert_with(|| {
                pairs.push(t);
                pairs.len() as u32 - 1
            });
            delta.push(id);
        }
        i += 1;
    }
    debug_assert!(pairs.len() <= n * n);
    let accepting = pairs.iter().map(|&(s, _)| sat.is_accepting(s)).collect();
    Ok(RegexRelation {
        dfa: Dfa::from_parts(1, 0, accepting, delta).minimize(),
        padding_closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn members(p: &str) -> Vec<u64> {
        let r = regex_to_dfa(p).unwrap().dfa;
        (0..16).filter(|&n| r.accepts(&[n]).unwrap()).collect()
    }

    #[test]
    fn parity_patterns() {
        assert_eq!(members("()|0(0|1)*"), [0, 2, 4, 6, 8, 10, 12, 14]);
        assert_eq!(members("1(0|1)*"), [1, 3, 5, 7, 9, 11, 13, 15]);
        assert_eq!(members("0*"), [0]);
        assert!(regex_to_dfa("0*").unwrap().padding_closed);
    }

    #[test]
    fn non_closed_language_is_normalized() {
        // "1" alone matches n = 1; "10" does not, but it still represents 1
        let r = regex_to_dfa("1").unwrap();
        assert!(!r.padding_closed);
        assert!(r.dfa.accepts_word(&[1, 0, 0]));
        assert!(r.dfa.is_padding_closed());
        // "10" matches 1 with one padding zero; 1 is in the relation
        assert_eq!(members("10"), [1]);
    }

    #[test]
    fn malformed() {
        assert!(regex_to_dfa("(0").is_err());
        assert!(regex_to_dfa("0)").is_err());
        assert!(regex_to_dfa("2").is_err());
    }
}
