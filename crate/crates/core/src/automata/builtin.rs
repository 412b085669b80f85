//! Arithmetic relations used as atoms by the formula compiler.
//!
//! Track order is given in each constructor's doc comment.

use super::{digit, product, BoolOp, Dfa, Dfao};

fn build(arity: usize, accepting: Vec<bool>, step: impl Fn(usize, usize) -> usize) -> Dfa {
    let alpha = 1usize << arity;
    let n = accepting.len();
    let delta = (0..n)
        .flat_map(|q| (0..alpha).map(move |s| (q, s)))
        .map(|(q, s)| step(q, s) as u32)
        .collect();
    Dfa::from_parts(arity, 0, accepting, delta).minimize()
}

/// `(x, y)` with `x = y`.
pub fn equality() -> Dfa {
    diagonal(2, 0, 1)
}

/// Tracks `i` and `j` carry the same number; other tracks are free.
pub fn diagonal(arity: usize, i: usize, j: usize) -> Dfa {
    build(arity, vec![true, false], |q, s| {
        if q == 0 && digit(s, i, arity) == digit(s, j, arity) {
            0
        } else {
            1
        }
    })
}

/// `(x, y)` with `x < y`. The most recent differing digit is the most
/// significant one seen so far.
pub fn less_than() -> Dfa {
    // 0: equal so far, 1: x < y, 2: x > y
    build(2, vec![false, true, false], |q, s| {
        match (digit(s, 0, 2), digit(s, 1, 2)) {
            (0, 1) => 1,
            (1, 0) => 2,
            _ => q,
        }
    })
}

/// `(x, y)` with `x <= y`.
pub fn less_equal() -> Dfa {
    less_than()
        .complement()
        .expand(&[1, 0], 2)
        .expect("arity 2")
}

/// `(x, y, z)` with `x + y = z`.
pub fn addition() -> Dfa {
    // state = carry, 2 = dead
    build(3, vec![true, false, false], |q, s| {
        if q == 2 {
            return 2;
        }
        let sum = q + digit(s, 0, 3) + digit(s, 1, 3);
        if sum & 1 == digit(s, 2, 3) {
            sum >> 1
        } else {
            2
        }
    })
}

/// `(x, y, z)` with `z = x - y`, i.e. `z + y = x`; empty where `x < y`.
pub fn subtraction() -> Dfa {
    // addition tracks (z, y, x) -> positions of x, y, z
    addition().expand(&[2, 1, 0], 3).expect("arity 3")
}

/// `(x)` with `x = c`.
pub fn constant(c: u64) -> Dfa {
    let bits = super::NumberWord::from_value(c);
    let digits = bits.digits().to_vec();
    let len = digits.len();
    // states 0..len read the digits of c, len is the accepting zero loop,
    // len + 1 is dead
    let mut accepting = vec![false; len + 2];
    accepting[len] = true;
    build(1, accepting, |q, s| {
        if q < len {
            if s == digits[q] as usize {
                q + 1
            } else {
                len + 1
            }
        } else if q == len && s == 0 {
            len
        } else {
            len + 1
        }
    })
}

/// `(x, z)` with `z = c * x`, via an lsd carry automaton.
pub fn multiple(c: u64) -> Dfa {
    if c == 0 {
        return product(
            &Dfa::full(1).expand(&[0], 2).unwrap(),
            &constant(0).expand(&[1], 2).unwrap(),
            BoolOp::And,
        )
        .expect("same arity");
    }
    let c = c as usize;
    let dead = c;
    let mut accepting = vec![false; c + 1];
    accepting[0] = true;
    build(2, accepting, |q, s| {
        if q == dead {
            return dead;
        }
        let t = q + c * digit(s, 0, 2);
        if t & 1 == digit(s, 1, 2) {
            t >> 1
        } else {
            dead
        }
    })
}

/// `(n, q)` with `q = floor(n / c)`, i.e. `n = c q + r` and `r < c`.
///
/// Panics if `c == 0`.
pub fn floor_div(c: u64) -> Dfa {
    assert!(c > 0, "division by zero");
    // tracks (n, q, m, r): m = c q, n = m + r, r < c
    let mul = multiple(c).expand(&[1, 2], 4).unwrap();
    let add = addition().expand(&[2, 3, 0], 4).unwrap();
    let rc = less_than_constant(c).expand(&[3], 4).unwrap();
    let all = product(&product(&mul, &add, BoolOp::And).unwrap(), &rc, BoolOp::And).unwrap();
    all.project(3).unwrap().project(2).unwrap()
}

/// `(x)` with `x < c`.
pub fn less_than_constant(c: u64) -> Dfa {
    // E k: k = c and x < k
    let lt = less_than();
    let k = constant(c).expand(&[1], 2).unwrap();
    product(&lt, &k, BoolOp::And).unwrap().project(1).unwrap()
}

/// The 4-state DFAO for the regular paperfolding sequence in its 0/1 form:
/// `q(2n) = q(n)`, `q(4n+1) = 0`, `q(4n+3) = 1`, `q(0) = 0`.
pub fn paperfolding_q() -> Dfao {
    // 0: only zeros read; 1: lowest 1 seen; 2: 4n+1 form; 3: 4n+3 form
    Dfao::new(0, vec![0, 1, 2, 3, 2, 2, 3, 3], vec![0, 0, 0, 1]).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_small() {
        let add = addition();
        assert!(add.accepts(&[0, 0, 0]).unwrap());
        assert!(add.accepts_word(&[]));
        assert!(add.accepts(&[2, 3, 5]).unwrap());
        assert!(!add.accepts(&[1, 1, 3]).unwrap());
        assert_eq!(add.state_counts().live, 2);
    }

    #[test]
    fn comparisons() {
        let lt = less_than();
        let le = less_equal();
        for x in 0..64 {
            for y in 0..64 {
                assert_eq!(lt.accepts(&[x, y]).unwrap(), x < y);
                assert_eq!(le.accepts(&[x, y]).unwrap(), x <= y);
            }
        }
    }

    #[test]
    fn constants_and_multiples() {
        for c in 0..20 {
            let k = constant(c);
            for x in 0..64 {
                assert_eq!(k.accepts(&[x]).unwrap(), x == c);
            }
            let m = multiple(c);
            for x in 0..40 {
                for z in 0..200 {
                    assert_eq!(m.accepts(&[x, z]).unwrap(), z == c * x, "c={c} x={x} z={z}");
                }
            }
        }
    }

    #[test]
    fn division() {
        for c in 1..6 {
            let d = floor_div(c);
            for n in 0..100 {
                for q in 0..100 {
                    assert_eq!(d.accepts(&[n, q]).unwrap(), q == n / c);
                }
            }
        }
    }

    #[test]
    fn subtraction_is_truncated() {
        let sub = subtraction();
        assert!(sub.accepts(&[5, 3, 2]).unwrap());
        assert!(!sub.accepts(&[3, 5, 0]).unwrap());
        assert!(sub.accepts(&[3, 3, 0]).unwrap());
    }
}
