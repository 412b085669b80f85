//! Compilation of formulas to relation automata.
//!
//! A compiled formula is a [`Relation`]: an automaton whose tracks are the
//! formula's free variables in sorted order. Compound terms introduce fresh
//! variables (named `#k`, which sort before every user variable) that are
//! constrained by arithmetic relations and projected away once the atom is
//! built.

use std::collections::{BTreeMap, HashMap};

use super::ast::{CmpOp, Formula, Operand, Term};
use super::{Environment, LogicError};
use crate::automata::{self, product, BoolOp, Dfa};

/// An automaton together with the variable carried by each track.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    vars: Vec<String>,
    dfa: Dfa,
}

impl Relation {
    /// `vars` must be sorted and distinct and match the automaton's arity.
    pub fn new(vars: Vec<String>, dfa: Dfa) -> Result<Self, LogicError> {
        if vars.len() != dfa.arity() || vars.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LogicError::Internal(format!(
                "relation tracks {vars:?} do not match arity {}",
                dfa.arity()
            )));
        }
        Ok(Relation { vars, dfa })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn into_dfa(self) -> Dfa {
        self.dfa
    }

    /// Builds a relation from an automaton whose track `i` is `names[i]`.
    /// Repeated names are identified (the tracks are forced equal and merged).
    pub fn from_tracks(dfa: &Dfa, names: &[String]) -> Result<Self, LogicError> {
        if names.len() != dfa.arity() {
            return Err(LogicError::Internal(
                "track names do not match arity".into(),
            ));
        }
        let mut dfa = dfa.clone();
        let mut names: Vec<String> = names.to_vec();
        // merge duplicates, last occurrence first so indices stay valid
        let mut j = names.len();
        while j > 0 {
            j -= 1;
            if let Some(i) = names[..j].iter().position(|n| *n == names[j]) {
                let diag = automata::diagonal(names.len(), i, j);
                dfa = product(&dfa, &diag, BoolOp::And)?.project(j)?;
                names.remove(j);
            }
        }
        let mut order: Vec<usize> = (0..names.len()).collect();
        order.sort_by(|&a, &b| names[a].cmp(&names[b]));
        // old track order[k] goes to new position k
        let mut positions = vec![0; names.len()];
        for (k, &old) in order.iter().enumerate() {
            positions[old] = k;
        }
        let sorted: Vec<String> = order.iter().map(|&i| names[i].clone()).collect();
        let dfa = dfa.expand(&positions, names.len())?;
        Relation::new(sorted, dfa)
    }

    /// The same relation read over a superset of variables.
    fn widen(&self, vars: &[String]) -> Result<Dfa, LogicError> {
        let positions: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.binary_search(v).expect("superset"))
            .collect();
        Ok(self.dfa.expand(&positions, vars.len())?)
    }

    pub fn combine(&self, other: &Relation, op: BoolOp) -> Result<Relation, LogicError> {
        let mut vars: Vec<String> = self.vars.iter().chain(&other.vars).cloned().collect();
        vars.sort();
        vars.dedup();
        let a = self.widen(&vars)?;
        let b = other.widen(&vars)?;
        Relation::new(vars, product(&a, &b, op)?)
    }

    pub fn complement(&self) -> Relation {
        Relation {
            vars: self.vars.clone(),
            dfa: self.dfa.complement(),
        }
    }

    /// Existential quantification of `var`; a no-op when `var` is absent.
    pub fn exists(&self, var: &str) -> Result<Relation, LogicError> {
        match self.vars.iter().position(|v| v == var) {
            None => Ok(self.clone()),
            Some(i) => {
                let mut vars = self.vars.clone();
                vars.remove(i);
                Relation::new(vars, self.dfa.project(i)?)
            }
        }
    }

    pub fn accepts(&self, assignment: &BTreeMap<String, u64>) -> Result<bool, LogicError> {
        let tuple: Vec<u64> = self
            .vars
            .iter()
            .map(|v| {
                assignment
                    .get(v)
                    .copied()
                    .ok_or_else(|| LogicError::UnknownName(v.clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(self.dfa.accepts(&tuple)?)
    }
}

/// Builtin arithmetic automata, built once per constant.
#[derive(Default)]
pub struct Builtins {
    constants: HashMap<u64, Dfa>,
    multiples: HashMap<u64, Dfa>,
    divisions: HashMap<u64, Dfa>,
    cache: HashMap<&'static str, Dfa>,
}

impl Builtins {
    fn constant(&mut self, c: u64) -> Dfa {
        self.constants
            .entry(c)
            .or_insert_with(|| automata::constant(c))
            .clone()
    }

    fn multiple(&mut self, c: u64) -> Dfa {
        self.multiples
            .entry(c)
            .or_insert_with(|| automata::multiple(c))
            .clone()
    }

    fn division(&mut self, c: u64) -> Dfa {
        self.divisions
            .entry(c)
            .or_insert_with(|| automata::floor_div(c))
            .clone()
    }

    fn named(&mut self, name: &'static str) -> Dfa {
        self.cache
            .entry(name)
            .or_insert_with(|| match name {
                "add" => automata::addition(),
                "sub" => automata::subtraction(),
                "eq" => automata::equality(),
                "lt" => automata::less_than(),
                "le" => automata::less_equal(),
                _ => unreachable!("unknown builtin {name}"),
            })
            .clone()
    }
}

pub struct Compiler<'a> {
    env: &'a Environment,
    builtins: &'a mut Builtins,
    fresh: usize,
}

impl<'a> Compiler<'a> {
    pub fn new(env: &'a Environment, builtins: &'a mut Builtins) -> Self {
        Compiler {
            env,
            builtins,
            fresh: 0,
        }
    }

    fn fresh_var(&mut self) -> String {
        self.fresh += 1;
        format!("#{}", self.fresh)
    }

    pub fn compile(&mut self, f: &Formula) -> Result<Relation, LogicError> {
        match f {
            Formula::Not(a) => Ok(self.compile(a)?.complement()),
            Formula::And(a, b) => self.binary(a, b, BoolOp::And),
            Formula::Or(a, b) => self.binary(a, b, BoolOp::Or),
            Formula::Implies(a, b) => self.binary(a, b, BoolOp::Implies),
            Formula::Iff(a, b) => self.binary(a, b, BoolOp::Iff),
            Formula::Exists(vars, body) => {
                let mut rel = self.compile(body)?;
                for v in vars.iter().rev() {
                    rel = rel.exists(v)?;
                }
                Ok(rel)
            }
            Formula::Forall(vars, body) => {
                let mut rel = self.compile(body)?.complement();
                for v in vars.iter().rev() {
                    rel = rel.exists(v)?;
                }
                Ok(rel.complement())
            }
            Formula::Compare(a, op, b) => self.compare(a, *op, b),
            Formula::Call(name, args) => self.call(name, args),
            Formula::Output(a, op, b) => self.outputs(a, *op, b),
        }
    }

    fn binary(&mut self, a: &Formula, b: &Formula, op: BoolOp) -> Result<Relation, LogicError> {
        let ra = self.compile(a)?;
        let rb = self.compile(b)?;
        ra.combine(&rb, op)
    }

    /// Introduces a variable equal to `t`, pushing its defining constraints.
    fn term(&mut self, t: &Term, cons: &mut Vec<(Relation, String)>) -> Result<String, LogicError> {
        if let Term::Var(v) = t {
            return Ok(v.clone());
        }
        if let Some(c) = t.constant_value() {
            let f = self.fresh_var();
            let dfa = self.builtins.constant(c);
            cons.push((Relation::from_tracks(&dfa, &[f.clone()])?, f.clone()));
            return Ok(f);
        }
        let (dfa, args): (Dfa, Vec<String>) = match t {
            Term::Var(_) | Term::Const(_) => unreachable!(),
            Term::Add(a, b) => {
                let va = self.term(a, cons)?;
                let vb = self.term(b, cons)?;
                (self.builtins.named("add"), vec![va, vb])
            }
            Term::Sub(a, b) => {
                let va = self.term(a, cons)?;
                let vb = self.term(b, cons)?;
                (self.builtins.named("sub"), vec![va, vb])
            }
            Term::Mul(a, b) => {
                let (c, other) = match (a.constant_value(), b.constant_value()) {
                    (Some(c), _) => (c, b),
                    (_, Some(c)) => (c, a),
                    _ => return Err(LogicError::NonLinear(t.to_string())),
                };
                let v = self.term(other, cons)?;
                (self.builtins.multiple(c), vec![v])
            }
            Term::Div(a, b) => {
                let c = match b.constant_value() {
                    Some(c) if c > 0 => c,
                    _ => return Err(LogicError::NonLinear(t.to_string())),
                };
                let v = self.term(a, cons)?;
                (self.builtins.division(c), vec![v])
            }
        };
        let f = self.fresh_var();
        let mut names = args;
        names.push(f.clone());
        cons.push((Relation::from_tracks(&dfa, &names)?, f.clone()));
        Ok(f)
    }

    /// Conjoins an atom with its term constraints and hides fresh variables.
    /// Constraints are attached outermost first, so each fresh variable can
    /// be projected as soon as its defining constraint is in.
    fn close(
        &mut self,
        atom: Relation,
        cons: Vec<(Relation, String)>,
    ) -> Result<Relation, LogicError> {
        let mut rel = atom;
        for (c, f) in cons.iter().rev() {
            rel = rel.combine(c, BoolOp::And)?.exists(f)?;
        }
        Ok(rel)
    }

    fn compare(&mut self, a: &Term, op: CmpOp, b: &Term) -> Result<Relation, LogicError> {
        let mut cons = Vec::new();
        let va = self.term(a, &mut cons)?;
        let vb = self.term(b, &mut cons)?;
        let atom = if va == vb {
            let dfa = if op.holds(0, 0) {
                Dfa::full(1)
            } else {
                Dfa::empty(1)
            };
            Relation::from_tracks(&dfa, &[va])?
        } else {
            let (dfa, names) = match op {
                CmpOp::Eq => (self.builtins.named("eq"), [va, vb]),
                CmpOp::Ne => (self.builtins.named("eq").complement(), [va, vb]),
                CmpOp::Lt => (self.builtins.named("lt"), [va, vb]),
                CmpOp::Le => (self.builtins.named("le"), [va, vb]),
                CmpOp::Gt => (self.builtins.named("lt"), [vb, va]),
                CmpOp::Ge => (self.builtins.named("le"), [vb, va]),
            };
            Relation::from_tracks(&dfa, &names)?
        };
        self.close(atom, cons)
    }

    fn call(&mut self, name: &str, args: &[Term]) -> Result<Relation, LogicError> {
        let dfa = self
            .env
            .relation(name)
            .ok_or_else(|| LogicError::UnknownName(format!("${name}")))?;
        if dfa.arity() != args.len() {
            return Err(LogicError::Arity {
                name: name.to_string(),
                expected: dfa.arity(),
                got: args.len(),
            });
        }
        let mut cons = Vec::new();
        let names = args
            .iter()
            .map(|a| self.term(a, &mut cons))
            .collect::<Result<Vec<_>, _>>()?;
        let atom = Relation::from_tracks(dfa, &names)?;
        self.close(atom, cons)
    }

    fn outputs(&mut self, a: &Operand, op: CmpOp, b: &Operand) -> Result<Relation, LogicError> {
        let mut cons = Vec::new();
        let atom = match (a, b) {
            (Operand::Index { name, arg }, Operand::Output(c))
            | (Operand::Output(c), Operand::Index { name, arg }) => {
                let op = if matches!(a, Operand::Output(_)) {
                    op.flipped()
                } else {
                    op
                };
                let m = self.dfao(name)?;
                let v = self.term(arg, &mut cons)?;
                let c = *c;
                Relation::from_tracks(&m.predicate(|o| op.holds(o, c)), &[v])?
            }
            (Operand::Index { name: n1, arg: a1 }, Operand::Index { name: n2, arg: a2 }) => {
                let m1 = self.dfao(n1)?;
                let m2 = self.dfao(n2)?;
                let v1 = self.term(a1, &mut cons)?;
                let v2 = self.term(a2, &mut cons)?;
                let mut dfa = Dfa::empty(2);
                for o1 in m1.output_values() {
                    let left = m1.predicate(|o| o == o1).expand(&[0], 2)?;
                    let matching: Vec<i64> = m2
                        .output_values()
                        .into_iter()
                        .filter(|&o2| op.holds(o1, o2))
                        .collect();
                    if matching.is_empty() {
                        continue;
                    }
                    let right = m2.predicate(|o| matching.contains(&o)).expand(&[1], 2)?;
                    dfa = product(&dfa, &product(&left, &right, BoolOp::And)?, BoolOp::Or)?;
                }
                Relation::from_tracks(&dfa, &[v1, v2])?
            }
            (Operand::Output(x), Operand::Output(y)) => {
                let dfa = if op.holds(x, y) {
                    Dfa::full(0)
                } else {
                    Dfa::empty(0)
                };
                Relation::new(Vec::new(), dfa)?
            }
        };
        self.close(atom, cons)
    }

    fn dfao(&self, name: &str) -> Result<&'a automata::Dfao, LogicError> {
        self.env
            .dfao(name)
            .ok_or_else(|| LogicError::UnknownName(format!("{name}[]")))
    }
}
