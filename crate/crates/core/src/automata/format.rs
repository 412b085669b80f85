//! Plain-text and DOT serialization.
//!
//! Text format:
//!
//! ```text
//! lsd_2 arity=k
//! <id> [output=v] [accepting] [initial]     one line per state
//! <src> (d1,...,dk) <dst>                     one line per transition
//! ```
//!
//! States appear in canonical order and transitions in lexicographic symbol
//! order. A DFAO is written with arity 1 and an `output=` field on every
//! state.

use std::fmt::Write as _;

use super::{digit, AutomatonError, Dfa, Dfao, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Automaton {
    Dfa(Dfa),
    Dfao(Dfao),
}

impl Automaton {
    pub fn num_states(&self) -> usize {
        match self {
            Automaton::Dfa(d) => d.num_states(),
            Automaton::Dfao(d) => d.num_states(),
        }
    }
}

fn symbol_text(s: usize, arity: usize) -> String {
    let digits: Vec<String> = (0..arity).map(|i| digit(s, i, arity).to_string()).collect();
    format!("({})", digits.join(","))
}

pub fn to_text(a: &Automaton) -> String {
    let mut out = String::new();
    match a {
        Automaton::Dfa(m) => {
            let _ = writeln!(out, "lsd_2 arity={}", m.arity());
            for q in 0..m.num_states() {
                out.push_str(&q.to_string());
                if m.is_accepting(q) {
                    out.push_str(" accepting");
                }
                if q == m.initial() {
                    out.push_str(" initial");
                }
                out.push('\n');
            }
            for q in 0..m.num_states() {
                for s in 0..m.alphabet_size() {
                    let _ = writeln!(out, "{} {} {}", q, symbol_text(s, m.arity()), m.next(q, s));
                }
            }
        }
        Automaton::Dfao(m) => {
            out.push_str("lsd_2 arity=1\n");
            for q in 0..m.num_states() {
                let _ = write!(out, "{} output={}", q, m.output(q));
                if q == m.initial() {
                    out.push_str(" initial");
                }
                out.push('\n');
            }
            for q in 0..m.num_states() {
                for d in 0..2 {
                    let _ = writeln!(out, "{} ({}) {}", q, d, m.next(q, d));
                }
            }
        }
    }
    out
}

pub fn parse_text(text: &str) -> Result<Automaton> {
    let err = |line: usize, msg: &str| AutomatonError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let arity: usize = header
        .strip_prefix("lsd_2 arity=")
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| err(hline, "expected 'lsd_2 arity=k'"))?;
    if arity > 16 {
        return Err(err(hline, "arity too large"));
    }
    let mut accepting: Vec<bool> = Vec::new();
    let mut outputs: Vec<Option<i64>> = Vec::new();
    let mut initial = None;
    let mut transitions: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let src: usize = fields[0]
            .parse()
            .map_err(|_| err(ln, "expected a state id"))?;
        if fields.len() == 3 && fields[1].starts_with('(') {
            let inner = fields[1]
                .strip_prefix('(')
                .and_then(|f| f.strip_suffix(')'))
                .ok_or_else(|| err(ln, "malformed digit tuple"))?;
            let digits: Vec<&str> = if inner.is_empty() {
                Vec::new()
            } else {
                inner.split(',').collect()
            };
            if digits.len() != arity {
                return Err(err(ln, "digit tuple has wrong arity"));
            }
            let mut sym = 0usize;
            for d in digits {
                sym = (sym << 1)
                    | match d {
                        "0" => 0,
                        "1" => 1,
                        _ => return Err(err(ln, "digits must be 0 or 1")),
                    };
            }
            let dst: usize = fields[2]
                .parse()
                .map_err(|_| err(ln, "expected a target"))?;
            transitions.push((ln, src, sym, dst));
            continue;
        }
        if !transitions.is_empty() {
            return Err(err(ln, "state line after transitions"));
        }
        if src != accepting.len() {
            return Err(err(ln, "states must be listed in order"));
        }
        let mut acc = false;
        let mut out = None;
        for f in &fields[1..] {
            match *f {
                "accepting" => acc = true,
                "initial" => {
                    if initial.replace(src).is_some() {
                        return Err(err(ln, "second initial state"));
                    }
                }
                other => {
                    let v = other
                        .strip_prefix("output=")
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| err(ln, "unknown state attribute"))?;
                    out = Some(v);
                }
            }
        }
        accepting.push(acc);
        outputs.push(out);
    }
    let n = accepting.len();
    let initial = initial.ok_or_else(|| err(hline, "no initial state"))?;
    let alpha = 1usize << arity;
    let mut delta = vec![u32::MAX; n * alpha];
    for (ln, src, sym, dst) in transitions {
        if src >= n || dst >= n {
            return Err(err(ln, "state out of range"));
        }
        if delta[src * alpha + sym] != u32::MAX {
            return Err(err(ln, "duplicate transition"));
        }
        delta[src * alpha + sym] = dst as u32;
    }
    if delta.contains(&u32::MAX) {
        return Err(err(hline, "transition function is not total"));
    }
    let with_output = outputs.iter().filter(|o| o.is_some()).count();
    if with_output == n {
        if arity != 1 {
            return Err(err(hline, "automata with output must have arity 1"));
        }
        let out = outputs.into_iter().map(|o| o.unwrap()).collect();
        Ok(Automaton::Dfao(Dfao::new(initial, delta, out)?))
    } else if with_output == 0 {
        Ok(Automaton::Dfa(Dfa::new(arity, initial, accepting, delta)?))
    } else {
        Err(err(
            hline,
            "either every state or no state carries an output",
        ))
    }
}

/// Graphviz rendering. The dead state is omitted unless `show_dead`.
pub fn to_dot(a: &Automaton, name: &str, show_dead: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{name}\" {{");
    out.push_str("  rankdir=LR;\n  node [shape=circle];\n  start [shape=point];\n");
    match a {
        Automaton::Dfa(m) => {
            let live = m.live_states();
            let keep = |q: usize| show_dead || live[q];
            for q in (0..m.num_states()).filter(|&q| keep(q)) {
                let shape = if m.is_accepting(q) {
                    "doublecircle"
                } else {
                    "circle"
                };
                let _ = writeln!(out, "  {q} [shape={shape}];");
            }
            let _ = writeln!(out, "  start -> {};", m.initial());
            for q in (0..m.num_states()).filter(|&q| keep(q)) {
                let mut labels: Vec<(usize, Vec<String>)> = Vec::new();
                for s in 0..m.alphabet_size() {
                    let t = m.next(q, s);
                    if !keep(t) {
                        continue;
                    }
                    let label = (0..m.arity())
                        .map(|i| digit(s, i, m.arity()).to_string())
                        .collect::<Vec<_>>()
                        .join("");
                    match labels.iter_mut().find(|(d, _)| *d == t) {
                        Some((_, l)) => l.push(label),
                        None => labels.push((t, vec![label])),
                    }
                }
                for (t, l) in labels {
                    let _ = writeln!(out, "  {q} -> {t} [label=\"{}\"];", l.join(","));
                }
            }
        }
        Automaton::Dfao(m) => {
            for q in 0..m.num_states() {
                let _ = writeln!(out, "  {q} [label=\"{q}/{}\"];", m.output(q));
            }
            let _ = writeln!(out, "  start -> {};", m.initial());
            for q in 0..m.num_states() {
                if m.next(q, 0) == m.next(q, 1) {
                    let _ = writeln!(out, "  {q} -> {} [label=\"0,1\"];", m.next(q, 0));
                } else {
                    for d in 0..2 {
                        let _ = writeln!(out, "  {q} -> {} [label=\"{d}\"];", m.next(q, d));
                    }
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{addition, less_than};

    #[test]
    fn text_layout() {
        let text = to_text(&Automaton::Dfa(less_than()));
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("lsd_2 arity=2"));
        assert_eq!(lines.next(), Some("0 initial"));
        assert!(text.contains("0 (0,1) 1\n"));
        assert_eq!(parse_text(&text).unwrap(), Automaton::Dfa(less_than()));
    }

    #[test]
    fn dfao_round_trip() {
        let m = Dfao::new(0, vec![0, 1, 1, 0], vec![0, 1]).unwrap();
        let text = to_text(&Automaton::Dfao(m.clone()));
        assert_eq!(
            text,
            "lsd_2 arity=1\n0 output=0 initial\n1 output=1\n0 (0) 0\n0 (1) 1\n1 (0) 1\n1 (1) 0\n"
        );
        assert_eq!(parse_text(&text).unwrap(), Automaton::Dfao(m));
    }

    #[test]
    fn rejects_partial() {
        assert!(parse_text("lsd_2 arity=1\n0 initial\n0 (0) 0\n").is_err());
        assert!(parse_text("lsd_2 arity=1\n0\n0 (0) 0\n0 (1) 0\n").is_err());
    }

    #[test]
    fn dot_hides_dead_state() {
        let dot = to_dot(&Automaton::Dfa(addition()), "add", false);
        let nodes = |d: &str| {
            d.lines()
                .filter(|l| {
                    l.trim_start().starts_with(|c: char| c.is_ascii_digit())
                        && l.contains("[shape=")
                })
                .count()
        };
        assert!(dot.contains("doublecircle"));
        assert_eq!(nodes(&dot), 2);
        let full = to_dot(&Automaton::Dfa(addition()), "add", true);
        assert_eq!(nodes(&full), 3);
    }
}
