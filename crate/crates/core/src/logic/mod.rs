//! First-order script language over lsd base-2 automata.
//!
//! Scripts are sequences of `eval`, `def`, `reg`, `combine` and `minimize`
//! commands, each terminated by `:`. Formulas carry the `?lsd_2` prefix.

mod ast;
mod compile;
mod parser;

pub use ast::{CmpOp, Formula, Operand, Term};
pub use compile::{Builtins, Compiler, Relation};
pub use parser::{parse_formula, parse_script, Command, Located};

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::automata::{self, AutomatonError, Dfa, Dfao, StateCounts};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("unknown command '{name}' at {line}:{col}")]
    UnknownCommand {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("unknown name {0}")]
    UnknownName(String),
    #[error("${name} takes {expected} arguments, got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("non-linear term {0}")]
    NonLinear(String),
    #[error("sentence has free variables: {}", .0.join(", "))]
    FreeVariables(Vec<String>),
    #[error("{0} is already defined")]
    Redefinition(String),
    #[error("{name}: {msg}")]
    KindMismatch { name: String, msg: String },
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("line {line}, {keyword} {name}: {source}")]
    Command {
        line: usize,
        keyword: &'static str,
        name: String,
        source: Box<LogicError>,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

/// Named automata visible to formulas.
///
/// `$name(...)` resolves to a relation or a regex-derived set, which share one
/// namespace; `NAME[...]` resolves to a DFAO.
#[derive(Clone, Debug, Default)]
pub struct Environment {
    dfaos: BTreeMap<String, Dfao>,
    relations: BTreeMap<String, Dfa>,
    regexes: BTreeMap<String, Dfa>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    /// An environment holding the paperfolding DFAO `Q`.
    pub fn with_paperfolding() -> Self {
        let mut env = Self::new();
        env.dfaos.insert("Q".into(), automata::paperfolding_q());
        env
    }

    pub fn dfao(&self, name: &str) -> Option<&Dfao> {
        self.dfaos.get(name)
    }

    pub fn relation(&self, name: &str) -> Option<&Dfa> {
        self.relations.get(name).or_else(|| self.regexes.get(name))
    }

    pub fn insert_dfao(&mut self, name: &str, m: Dfao) -> Result<(), LogicError> {
        if self.dfaos.contains_key(name) {
            return Err(LogicError::Redefinition(format!("{name}[]")));
        }
        self.dfaos.insert(name.to_string(), m);
        Ok(())
    }

    pub fn insert_relation(&mut self, name: &str, m: Dfa) -> Result<(), LogicError> {
        if self.relation(name).is_some() {
            return Err(LogicError::Redefinition(format!("${name}")));
        }
        self.relations.insert(name.to_string(), m);
        Ok(())
    }

    pub fn insert_regex(&mut self, name: &str, m: Dfa) -> Result<(), LogicError> {
        if self.relation(name).is_some() {
            return Err(LogicError::Redefinition(format!("${name}")));
        }
        self.regexes.insert(name.to_string(), m);
        Ok(())
    }

    /// Inserts a loaded automaton under its kind.
    pub fn insert(&mut self, name: &str, a: automata::Automaton) -> Result<(), LogicError> {
        match a {
            automata::Automaton::Dfa(m) => self.insert_relation(name, m),
            automata::Automaton::Dfao(m) => self.insert_dfao(name, m),
        }
    }

    pub fn dfao_names(&self) -> impl Iterator<Item = &str> {
        self.dfaos.keys().map(String::as_str)
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations
            .keys()
            .chain(self.regexes.keys())
            .map(String::as_str)
    }
}

/// Compiles `f` to a minimal automaton over its free variables in sorted
/// order.
pub fn compile(f: &Formula, env: &Environment) -> Result<Relation, LogicError> {
    let mut builtins = Builtins::default();
    Compiler::new(env, &mut builtins).compile(f)
}

/// Outcome of evaluating a sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub value: bool,
    /// Assignment for the outermost quantifier block that explains the
    /// result: a counterexample of a false universal or a witness of a true
    /// existential.
    pub witness: Option<Vec<(String, u64)>>,
}

pub fn eval_sentence(f: &Formula, env: &Environment) -> Result<Evaluation, LogicError> {
    let mut builtins = Builtins::default();
    eval_with(f, env, &mut builtins)
}

fn eval_with(
    f: &Formula,
    env: &Environment,
    builtins: &mut Builtins,
) -> Result<Evaluation, LogicError> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(LogicError::FreeVariables(free.into_iter().collect()));
    }
    let rel = Compiler::new(env, builtins).compile(f)?;
    let value = truth(&rel);
    let witness = explain(f, value, env, builtins)?;
    Ok(Evaluation { value, witness })
}

fn truth(rel: &Relation) -> bool {
    rel.dfa().is_accepting(rel.dfa().initial())
}

/// Descends through negations and boolean structure to the quantifier
/// block responsible for `value`, and extracts an assignment for it.
fn explain(
    f: &Formula,
    value: bool,
    env: &Environment,
    builtins: &mut Builtins,
) -> Result<Option<Vec<(String, u64)>>, LogicError> {
    let sub = |g: &Formula, builtins: &mut Builtins| -> Result<bool, LogicError> {
        Ok(truth(&Compiler::new(env, builtins).compile(g)?))
    };
    match (f, value) {
        (Formula::Not(g), v) => explain(g, !v, env, builtins),
        (Formula::Forall(vars, body), false) => {
            let neg = Formula::Not(body.clone());
            assignment(&neg, vars, env, builtins)
        }
        (Formula::Exists(vars, body), true) => assignment(body, vars, env, builtins),
        (Formula::And(a, b), false) | (Formula::Or(a, b), true) => {
            if sub(a, builtins)? == value {
                explain(a, value, env, builtins)
            } else {
                explain(b, value, env, builtins)
            }
        }
        (Formula::Implies(_, b), false) => explain(b, false, env, builtins),
        _ => Ok(None),
    }
}

fn assignment(
    body: &Formula,
    vars: &[String],
    env: &Environment,
    builtins: &mut Builtins,
) -> Result<Option<Vec<(String, u64)>>, LogicError> {
    let mut rel = Compiler::new(env, builtins).compile(body)?;
    // variables bound outside the block are already fixed by the sentence
    let extra: Vec<String> = rel
        .vars()
        .iter()
        .filter(|v| !vars.contains(v))
        .cloned()
        .collect();
    for v in extra {
        rel = rel.exists(&v)?;
    }
    let Some(tuple) = rel.dfa().shortest_accepted() else {
        return Ok(None);
    };
    Ok(Some(
        vars.iter()
            .map(|v| {
                let value = rel
                    .vars()
                    .iter()
                    .position(|w| w == v)
                    .map_or(0, |i| tuple[i]);
                (v.clone(), value)
            })
            .collect(),
    ))
}

/// Result of one script command.
#[derive(Clone, Debug)]
pub struct CommandReport {
    pub line: usize,
    pub keyword: &'static str,
    pub name: String,
    /// Truth value for `eval`, and for `def` of a sentence.
    pub result: Option<bool>,
    /// Arity of the automaton produced, with its tracks' variable names.
    pub vars: Vec<String>,
    pub states: StateCounts,
    pub witness: Option<Vec<(String, u64)>>,
    pub warning: Option<String>,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Default)]
pub struct ScriptReport {
    pub commands: Vec<CommandReport>,
}

impl ScriptReport {
    /// True if every command with a truth value is TRUE.
    pub fn all_true(&self) -> bool {
        self.commands.iter().all(|c| c.result != Some(false))
    }

    pub fn get(&self, name: &str) -> Option<&CommandReport> {
        self.commands.iter().find(|c| c.name == name)
    }
}

/// Parses and runs a script, stopping at the first failing command.
pub fn run_script(text: &str, env: &mut Environment) -> Result<ScriptReport, LogicError> {
    let commands = parse_script(text)?;
    let mut builtins = Builtins::default();
    let mut report = ScriptReport::default();
    for located in &commands {
        let c = &located.command;
        let r = run_command(c, env, &mut builtins).map_err(|e| LogicError::Command {
            line: located.line,
            keyword: c.keyword(),
            name: c.name().to_string(),
            source: Box::new(e),
        })?;
        report.commands.push(CommandReport {
            line: located.line,
            keyword: c.keyword(),
            name: c.name().to_string(),
            ..r
        });
    }
    Ok(report)
}

fn run_command(
    c: &Command,
    env: &mut Environment,
    builtins: &mut Builtins,
) -> Result<CommandReport, LogicError> {
    let start = Instant::now();
    let mut report = CommandReport {
        line: 0,
        keyword: c.keyword(),
        name: c.name().to_string(),
        result: None,
        vars: Vec::new(),
        states: StateCounts { total: 1, live: 1 },
        witness: None,
        warning: None,
        elapsed: Duration::ZERO,
    };
    match c {
        Command::Eval { formula, .. } => {
            let e = eval_with(formula, env, builtins)?;
            report.result = Some(e.value);
            report.witness = e.witness;
        }
        Command::Def { name, formula } => {
            let rel = Compiler::new(env, builtins).compile(formula)?;
            if rel.vars().is_empty() {
                report.result = Some(truth(&rel));
            }
            report.states = rel.dfa().state_counts();
            report.vars = rel.vars().to_vec();
            env.insert_relation(name, rel.into_dfa())?;
        }
        Command::Reg { name, pattern } => {
            let r = automata::regex_to_dfa(pattern)?;
            if !r.padding_closed {
                report.warning = Some(format!(
                    "pattern \"{pattern}\" is not closed under trailing zeros; using its padding closure"
                ));
            }
            report.states = r.dfa.state_counts();
            report.vars = vec!["n".into()];
            env.insert_regex(name, r.dfa)?;
        }
        Command::Combine { name, parts } => {
            let dfas = parts
                .iter()
                .map(|(p, v)| {
                    let m = env
                        .relation(p)
                        .ok_or_else(|| LogicError::UnknownName(format!("${p}")))?;
                    if m.arity() != 1 {
                        return Err(LogicError::KindMismatch {
                            name: p.clone(),
                            msg: format!(
                                "combine needs a unary relation, found arity {}",
                                m.arity()
                            ),
                        });
                    }
                    Ok((m, *v))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let m = automata::combine(&dfas)?.minimize();
            report.states = StateCounts {
                total: m.num_states(),
                live: m.num_states(),
            };
            env.insert_dfao(name, m)?;
        }
        Command::Minimize { name, source } => {
            if let Some(m) = env.dfao(source) {
                let m = m.minimize();
                report.states = StateCounts {
                    total: m.num_states(),
                    live: m.num_states(),
                };
                env.insert_dfao(name, m)?;
            } else if let Some(m) = env.relation(source) {
                let m = m.minimize();
                report.states = m.state_counts();
                env.insert_relation(name, m)?;
            } else {
                return Err(LogicError::UnknownName(source.clone()));
            }
        }
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(text: &str) -> bool {
        let env = Environment::with_paperfolding();
        eval_sentence(&parse_formula(text).unwrap(), &env)
            .unwrap()
            .value
    }

    fn rel(text: &str) -> Relation {
        compile(&parse_formula(text).unwrap(), &Environment::new()).unwrap()
    }

    #[test]
    fn q_recurrence_holds() {
        assert!(sentence(
            "?lsd_2 An (Q[2*n]=Q[n] & Q[4*n+1]=@0 & Q[4*n+3]=@1)"
        ));
        assert!(!sentence("?lsd_2 An Q[2*n+1]=@0"));
    }

    #[test]
    fn simple_sentences() {
        assert!(!sentence("?lsd_2 En 3*n=2"));
        assert!(sentence("?lsd_2 En 3*n=6"));
        assert!(sentence("?lsd_2 Ax,y x+y=y+x"));
        assert!(sentence("?lsd_2 Ax x/2 <= x"));
        assert!(!sentence("?lsd_2 Ax Ey y<x"));
        assert!(sentence("?lsd_2 Ax Ey y>x"));
    }

    #[test]
    fn free_variables_are_rejected() {
        let f = parse_formula("?lsd_2 x=1").unwrap();
        assert_eq!(
            eval_sentence(&f, &Environment::new()),
            Err(LogicError::FreeVariables(vec!["x".into()]))
        );
    }

    #[test]
    fn mod2_relation() {
        let r = rel("?lsd_2 n=z+2*(n/2)");
        assert_eq!(r.vars(), ["n", "z"]);
        for n in 0..4096u64 {
            for z in 0..3 {
                assert_eq!(r.dfa().accepts(&[n, z]).unwrap(), z == n % 2, "n={n} z={z}");
            }
        }
    }

    #[test]
    fn compiled_addition_matches_builtin() {
        let r = rel("?lsd_2 z=x+y");
        assert_eq!(r.vars(), ["x", "y", "z"]);
        assert_eq!(
            automata::equivalent(r.dfa(), &automata::addition()).unwrap(),
            None
        );
    }

    #[test]
    fn subtraction_is_relational() {
        let r = rel("?lsd_2 z=x-3");
        for x in 0..64u64 {
            for z in 0..64u64 {
                assert_eq!(r.dfa().accepts(&[x, z]).unwrap(), x >= 3 && z == x - 3);
            }
        }
    }

    #[test]
    fn repeated_argument_is_diagonal() {
        let mut env = Environment::new();
        env.insert_relation("lt", automata::less_than()).unwrap();
        let r = compile(&parse_formula("?lsd_2 $lt(x,x)").unwrap(), &env).unwrap();
        assert!(r.dfa().is_empty());
        let r = compile(&parse_formula("?lsd_2 $lt(y,x)").unwrap(), &env).unwrap();
        assert!(r.dfa().accepts(&[2, 1]).unwrap());
        assert!(!r.dfa().accepts(&[1, 2]).unwrap());
    }

    #[test]
    fn x_equals_x_is_full() {
        let r = rel("?lsd_2 x=x");
        assert_eq!(r.vars(), ["x"]);
        assert_eq!(automata::equivalent(r.dfa(), &Dfa::full(1)).unwrap(), None);
    }

    #[test]
    fn counterexample_for_false_universal() {
        let env = Environment::new();
        let f = parse_formula("?lsd_2 An n<5").unwrap();
        let e = eval_sentence(&f, &env).unwrap();
        assert!(!e.value);
        let w = e.witness.unwrap();
        assert_eq!(w[0].0, "n");
        assert!((5..8).contains(&w[0].1));
        let f = parse_formula("?lsd_2 Ex,y x+y=7 & x>y").unwrap();
        let e = eval_sentence(&f, &env).unwrap();
        let w = e.witness.unwrap();
        assert!(w[0].1 + w[1].1 == 7 && w[0].1 > w[1].1);
    }

    #[test]
    fn nonlinear_terms_fail() {
        let f = parse_formula("?lsd_2 Ex,y x*y=4").unwrap();
        assert!(matches!(
            eval_sentence(&f, &Environment::new()),
            Err(LogicError::NonLinear(_))
        ));
    }

    #[test]
    fn script_defines_and_reports() {
        let mut env = Environment::with_paperfolding();
        let report = run_script(
            "reg even lsd_2 \"()|0(0|1)*\":\n\
             reg odd lsd_2 \"1(0|1)*\":\n\
             combine PAR even=0 odd=1:\n\
             eval par \"?lsd_2 An PAR[2*n]=@0 & PAR[2*n+1]=@1\":\n\
             def half \"?lsd_2 z=n/2\":\n\
             eval h \"?lsd_2 $half(5,2)\":",
            &mut env,
        )
        .unwrap();
        assert!(report.all_true());
        assert_eq!(report.get("PAR").unwrap().states.total, 3);
        assert!(env.dfao("PAR").is_some());
        assert_eq!(report.get("half").unwrap().vars, ["n", "z"]);
    }

    #[test]
    fn empty_script() {
        let mut env = Environment::new();
        assert!(run_script("", &mut env).unwrap().commands.is_empty());
    }

    #[test]
    fn redefinition_and_unknown_names() {
        let mut env = Environment::new();
        let err = run_script("def a \"?lsd_2 x=1\":\ndef a \"?lsd_2 x=2\":", &mut env).unwrap_err();
        assert!(matches!(err, LogicError::Command { line: 2, .. }));
        let err = run_script("eval t \"?lsd_2 $nope(1)\":", &mut env).unwrap_err();
        match err {
            LogicError::Command { source, .. } => {
                assert!(matches!(*source, LogicError::UnknownName(_)))
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn combine_overlap_is_reported() {
        let mut env = Environment::new();
        let err = run_script(
            "def a \"?lsd_2 n<=3\":\ndef b \"?lsd_2 n>=3\":\ncombine C a=0 b=1:",
            &mut env,
        )
        .unwrap_err();
        match err {
            LogicError::Command { source, .. } => {
                assert!(matches!(
                    *source,
                    LogicError::Automaton(AutomatonError::Overlap { n: 3, .. })
                ))
            }
            e => panic!("{e}"),
        }
    }
}
