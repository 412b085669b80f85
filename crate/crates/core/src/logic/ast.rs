use std::collections::BTreeSet;
use std::fmt;

/// Linear term over naturals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(u64),
    Add(Box<Term>, Box<Term>),
    /// Natural subtraction; undefined (the enclosing atom is false) when the
    /// result would be negative.
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    /// Floor division by a positive constant.
    Div(Box<Term>, Box<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn holds<T: Ord>(self, a: T, b: T) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    /// The operator with its operands exchanged.
    pub fn flipped(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            other => other,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// One side of a comparison between automaton outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    /// `@c`
    Output(i64),
    /// `NAME[term]`
    Index { name: String, arg: Term },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
    Forall(Vec<String>, Box<Formula>),
    Compare(Term, CmpOp, Term),
    /// `$name(args)`
    Call(String, Vec<Term>),
    Output(Operand, CmpOp, Operand),
}

impl Term {
    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) | Term::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Value of a variable-free term; `None` if it has variables or a
    /// subtraction underflows.
    pub fn constant_value(&self) -> Option<u64> {
        match self {
            Term::Var(_) => None,
            Term::Const(c) => Some(*c),
            Term::Add(a, b) => a.constant_value()?.checked_add(b.constant_value()?),
            Term::Sub(a, b) => a.constant_value()?.checked_sub(b.constant_value()?),
            Term::Mul(a, b) => a.constant_value()?.checked_mul(b.constant_value()?),
            Term::Div(a, b) => a.constant_value()?.checked_div(b.constant_value()?),
        }
    }
}

impl Operand {
    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let Operand::Index { arg, .. } = self {
            arg.collect_vars(out);
        }
    }
}

impl Formula {
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Not(f) => f.collect_free(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Exists(vars, body) | Formula::Forall(vars, body) => {
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                for v in vars {
                    inner.remove(v);
                }
                out.extend(inner);
            }
            Formula::Compare(a, _, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Formula::Output(a, _, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Add(a, b) => write!(f, "({a}+{b})"),
            Term::Sub(a, b) => write!(f, "({a}-{b})"),
            Term::Mul(a, b) => write!(f, "({a}*{b})"),
            Term::Div(a, b) => write!(f, "({a}/{b})"),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Output(c) => write!(f, "@{c}"),
            Operand::Index { name, arg } => write!(f, "{name}[{arg}]"),
        }
    }
}

/// Fully parenthesized rendering, used to inspect parse trees.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Not(a) => write!(f, "~{a}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} => {b})"),
            Formula::Iff(a, b) => write!(f, "({a} <=> {b})"),
            Formula::Exists(v, b) => write!(f, "(E{} {b})", v.join(",")),
            Formula::Forall(v, b) => write!(f, "(A{} {b})", v.join(",")),
            Formula::Compare(a, op, b) => write!(f, "{a}{}{b}", op.symbol()),
            Formula::Call(name, args) => {
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                write!(f, "${name}({})", args.join(","))
            }
            Formula::Output(a, op, b) => write!(f, "{a}{}{b}", op.symbol()),
        }
    }
}
