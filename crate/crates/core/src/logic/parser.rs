//! Script and formula parsing.
//!
//! Formula precedence, tightest first: `~`, `&`, `|`, `=>`, `<=>`; binary
//! operators associate to the left. A quantifier `A`/`E` takes a
//! comma-separated variable list and scopes over the rest of the enclosing
//! formula or parenthesized group. The letters `A` and `E` are reserved: an
//! identifier starting with either is read as a quantifier.

use super::ast::{CmpOp, Formula, Operand, Term};
use super::LogicError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Quant(char),
    Call(String),
    Num(u64),
    Out(i64),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    offset: usize,
}

const SYMBOLS: [&str; 19] = [
    "<=>", "=>", "<=", ">=", "!=", "=", "<", ">", "~", "&", "|", "+", "-", "*", "/", "(", ")", "[",
    "]",
];

/// Error position as a byte offset into the formula text.
#[derive(Debug)]
pub(crate) struct FormulaError {
    pub offset: usize,
    pub msg: String,
}

fn ferr(offset: usize, msg: impl Into<String>) -> FormulaError {
    FormulaError {
        offset,
        msg: msg.into(),
    }
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

fn lex(src: &str, base: usize) -> Result<Vec<Token>, FormulaError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c == b',' {
            out.push(Token {
                tok: Tok::Sym(","),
                offset: base + i,
            });
            i += 1;
        } else if c == b'$' {
            i += 1;
            while i < b.len() && is_ident_char(b[i]) {
                i += 1;
            }
            if i == start + 1 {
                return Err(ferr(base + start, "expected a name after '$'"));
            }
            out.push(Token {
                tok: Tok::Call(src[start + 1..i].to_string()),
                offset: base + start,
            });
        } else if c == b'@' {
            i += 1;
            if i < b.len() && b[i] == b'-' {
                i += 1;
            }
            let digits = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            if i == digits {
                return Err(ferr(base + start, "expected a number after '@'"));
            }
            let v: i64 = src[start + 1..i]
                .parse()
                .map_err(|_| ferr(base + start, "output constant out of range"))?;
            out.push(Token {
                tok: Tok::Out(v),
                offset: base + start,
            });
        } else if c.is_ascii_digit() {
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let v: u64 = src[start..i]
                .parse()
                .map_err(|_| ferr(base + start, "number out of range"))?;
            out.push(Token {
                tok: Tok::Num(v),
                offset: base + start,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            if c == b'A' || c == b'E' {
                out.push(Token {
                    tok: Tok::Quant(c as char),
                    offset: base + i,
                });
                i += 1;
                continue;
            }
            while i < b.len() && is_ident_char(b[i]) {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                offset: base + start,
            });
        } else {
            let sym = SYMBOLS
                .iter()
                .find(|s| src[i..].starts_with(**s))
                .ok_or_else(|| ferr(base + i, format!("unexpected character {:?}", c as char)))?;
            out.push(Token {
                tok: Tok::Sym(sym),
                offset: base + i,
            });
            i += sym.len();
        }
    }
    Ok(out)
}

struct FormulaParser {
    toks: Vec<Token>,
    pos: usize,
    end: usize,
}

impl FormulaParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), FormulaError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(ferr(self.offset(), format!("expected '{sym}'")))
        }
    }

    fn iff(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.implies()?;
        while self.eat("<=>") {
            let right = self.implies()?;
            left = Formula::Iff(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn implies(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.or()?;
        while self.eat("=>") {
            let right = self.or()?;
            left = Formula::Implies(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.and()?;
        while self.eat("|") {
            let right = self.and()?;
            left = Formula::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.unary()?;
        while self.eat("&") {
            let right = self.unary()?;
            left = Formula::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        if self.eat("~") {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if let Some(Tok::Quant(q)) = self.peek() {
            let q = *q;
            self.pos += 1;
            let mut vars = Vec::new();
            loop {
                match self.peek() {
                    Some(Tok::Ident(v)) => {
                        vars.push(v.clone());
                        self.pos += 1;
                    }
                    _ => return Err(ferr(self.offset(), "expected a variable after quantifier")),
                }
                if !self.eat(",") {
                    break;
                }
            }
            let body = Box::new(self.iff()?);
            return Ok(if q == 'A' {
                Formula::Forall(vars, body)
            } else {
                Formula::Exists(vars, body)
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::Call(name)) => {
                self.pos += 1;
                let mut args = Vec::new();
                if self.eat("(") {
                    if !self.eat(")") {
                        loop {
                            args.push(self.term()?);
                            if self.eat(")") {
                                break;
                            }
                            self.expect(",")?;
                        }
                    }
                }
                Ok(Formula::Call(name, args))
            }
            Some(Tok::Sym("(")) => {
                let save = self.pos;
                let term_attempt = self.comparison();
                match term_attempt {
                    Ok(f) => Ok(f),
                    Err(term_err) => {
                        self.pos = save;
                        self.expect("(")?;
                        let inner = self.iff();
                        match inner {
                            Ok(f) => {
                                self.expect(")")?;
                                Ok(f)
                            }
                            Err(e) if e.offset >= term_err.offset => Err(e),
                            Err(_) => Err(term_err),
                        }
                    }
                }
            }
            Some(_) => self.comparison(),
            None => Err(ferr(self.end, "unexpected end of formula")),
        }
    }

    fn operand(&mut self) -> Result<Option<Operand>, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::Out(v)) => {
                self.pos += 1;
                Ok(Some(Operand::Output(v)))
            }
            Some(Tok::Ident(name))
                if matches!(
                    self.toks.get(self.pos + 1),
                    Some(Token {
                        tok: Tok::Sym("["),
                        ..
                    })
                ) =>
            {
                self.pos += 2;
                let arg = self.term()?;
                self.expect("]")?;
                Ok(Some(Operand::Index { name, arg }))
            }
            _ => Ok(None),
        }
    }

    fn cmp_op(&mut self) -> Result<CmpOp, FormulaError> {
        let op = match self.peek() {
            Some(Tok::Sym("=")) => CmpOp::Eq,
            Some(Tok::Sym("!=")) => CmpOp::Ne,
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            _ => return Err(ferr(self.offset(), "expected a comparison operator")),
        };
        self.pos += 1;
        Ok(op)
    }

    fn comparison(&mut self) -> Result<Formula, FormulaError> {
        if let Some(left) = self.operand()? {
            let op = self.cmp_op()?;
            let at = self.offset();
            let right = self
                .operand()?
                .ok_or_else(|| ferr(at, "expected '@constant' or NAME[term]"))?;
            if matches!((&left, &right), (Operand::Output(_), Operand::Output(_))) {
                return Err(ferr(at, "comparison of two output constants"));
            }
            return Ok(Formula::Output(left, op, right));
        }
        let left = self.term()?;
        let op = self.cmp_op()?;
        let right = self.term()?;
        Ok(Formula::Compare(left, op, right))
    }

    fn term(&mut self) -> Result<Term, FormulaError> {
        let mut left = self.product()?;
        loop {
            if self.eat("+") {
                left = Term::Add(Box::new(left), Box::new(self.product()?));
            } else if self.eat("-") {
                left = Term::Sub(Box::new(left), Box::new(self.product()?));
            } else {
                return Ok(left);
            }
        }
    }

    fn product(&mut self) -> Result<Term, FormulaError> {
        let mut left = self.term_atom()?;
        loop {
            if self.eat("*") {
                left = Term::Mul(Box::new(left), Box::new(self.term_atom()?));
            } else if self.eat("/") {
                left = Term::Div(Box::new(left), Box::new(self.term_atom()?));
            } else {
                return Ok(left);
            }
        }
    }

    fn term_atom(&mut self) -> Result<Term, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Term::Const(n))
            }
            Some(Tok::Ident(v)) => {
                self.pos += 1;
                Ok(Term::Var(v))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(")")?;
                Ok(t)
            }
            _ => Err(ferr(self.offset(), "expected a term")),
        }
    }
}

/// Parses formula text including its `?lsd_2` prefix. `base` is added to
/// every reported offset.
pub(crate) fn parse_formula_at(text: &str, base: usize) -> Result<Formula, FormulaError> {
    let lead = text.len() - text.trim_start().len();
    let body = text.trim_start();
    let Some(rest) = body.strip_prefix("?lsd_2") else {
        return Err(ferr(base + lead, "formulas must start with ?lsd_2"));
    };
    let offset = base + lead + "?lsd_2".len();
    let toks = lex(rest, offset)?;
    let mut p = FormulaParser {
        toks,
        pos: 0,
        end: base + text.len(),
    };
    let f = p.iff()?;
    if p.pos != p.toks.len() {
        return Err(ferr(p.offset(), "unexpected token"));
    }
    Ok(f)
}

/// Parses a standalone formula such as `?lsd_2 An n=n`.
pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    parse_formula_at(text, 0).map_err(|e| {
        let (line, col) = line_col(text, e.offset);
        LogicError::Syntax {
            line,
            col,
            msg: e.msg,
        }
    })
}

pub(crate) fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// A parsed script command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Eval {
        name: String,
        formula: Formula,
    },
    Def {
        name: String,
        formula: Formula,
    },
    Reg {
        name: String,
        pattern: String,
    },
    Combine {
        name: String,
        parts: Vec<(String, i64)>,
    },
    Minimize {
        name: String,
        source: String,
    },
}

impl Command {
    pub fn keyword(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Def { .. } => "def",
            Command::Reg { .. } => "reg",
            Command::Combine { .. } => "combine",
            Command::Minimize { .. } => "minimize",
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Command::Eval { name, .. }
            | Command::Def { name, .. }
            | Command::Reg { name, .. }
            | Command::Combine { name, .. }
            | Command::Minimize { name, .. } => name,
        }
    }
}

/// A command with the position of its keyword.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Located {
    pub command: Command,
    pub line: usize,
    pub col: usize,
}

struct ScriptParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> ScriptParser<'a> {
    fn error(&self, offset: usize, msg: impl Into<String>) -> LogicError {
        let (line, col) = line_col(self.src, offset);
        LogicError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn skip_trivia(&mut self) {
        let b = self.src.as_bytes();
        while self.pos < b.len() {
            if b[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            } else if b[self.pos] == b'#' {
                while self.pos < b.len() && b[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn word(&mut self) -> Option<&'a str> {
        self.skip_trivia();
        let b = self.src.as_bytes();
        let start = self.pos;
        while self.pos < b.len() && is_ident_char(b[self.pos]) {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.src[start..self.pos])
    }

    fn expect_word(&mut self, what: &str) -> Result<&'a str, LogicError> {
        let at = {
            self.skip_trivia();
            self.pos
        };
        self.word()
            .ok_or_else(|| self.error(at, format!("expected {what}")))
    }

    fn expect_char(&mut self, c: u8) -> Result<(), LogicError> {
        self.skip_trivia();
        if self.src.as_bytes().get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(self.pos, format!("expected '{}'", c as char)))
        }
    }

    /// Returns the string contents and the offset of its first byte.
    fn quoted(&mut self) -> Result<(&'a str, usize), LogicError> {
        self.expect_char(b'"')?;
        let start = self.pos;
        let end = self.src[start..]
            .find('"')
            .ok_or_else(|| self.error(start, "unterminated string"))?;
        self.pos = start + end + 1;
        Ok((&self.src[start..start + end], start))
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let (text, start) = self.quoted()?;
        parse_formula_at(text, start).map_err(|e| self.error(e.offset, e.msg))
    }

    fn command(&mut self) -> Result<Option<Located>, LogicError> {
        self.skip_trivia();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let at = self.pos;
        let (line, col) = line_col(self.src, at);
        let keyword = self
            .word()
            .ok_or_else(|| self.error(at, "expected a command"))?;
        let command = match keyword {
            "eval" | "def" => {
                let name = self.expect_word("a name")?.to_string();
                let formula = self.formula()?;
                if keyword == "eval" {
                    Command::Eval { name, formula }
                } else {
                    Command::Def { name, formula }
                }
            }
            "reg" => {
                let name = self.expect_word("a name")?.to_string();
                let mode_at = self.pos;
                if self.expect_word("lsd_2")? != "lsd_2" {
                    return Err(self.error(mode_at, "only lsd_2 is supported"));
                }
                let (pattern, _) = self.quoted()?;
                Command::Reg {
                    name,
                    pattern: pattern.to_string(),
                }
            }
            "combine" => {
                let name = self.expect_word("a name")?.to_string();
                let mut parts = Vec::new();
                loop {
                    self.skip_trivia();
                    if self.src[self.pos..].starts_with(':') {
                        break;
                    }
                    let part = self.expect_word("a part name")?.to_string();
                    self.expect_char(b'=')?;
                    self.skip_trivia();
                    let vstart = self.pos;
                    let b = self.src.as_bytes();
                    if self.pos < b.len() && b[self.pos] == b'-' {
                        self.pos += 1;
                    }
                    while self.pos < b.len() && b[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let value: i64 = self.src[vstart..self.pos]
                        .parse()
                        .map_err(|_| self.error(vstart, "expected an integer output"))?;
                    parts.push((part, value));
                }
                if parts.is_empty() {
                    return Err(self.error(self.pos, "combine needs at least one part"));
                }
                Command::Combine { name, parts }
            }
            "minimize" => {
                let name = self.expect_word("a name")?.to_string();
                let source = self.expect_word("a source name")?.to_string();
                Command::Minimize { name, source }
            }
            other => {
                return Err(LogicError::UnknownCommand {
                    line,
                    col,
                    name: other.to_string(),
                })
            }
        };
        self.expect_char(b':')?;
        Ok(Some(Located { command, line, col }))
    }
}

/// Parses a whole script; commands end with ':' and `#` starts a comment.
pub fn parse_script(text: &str) -> Result<Vec<Located>, LogicError> {
    let mut p = ScriptParser { src: text, pos: 0 };
    let mut out = Vec::new();
    while let Some(c) = p.command()? {
        out.push(c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn show(text: &str) -> String {
        parse_formula(text).unwrap().to_string()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(show("?lsd_2 ~$a(x) & $b(x)"), "(~$a(x) & $b(x))");
        assert_eq!(
            show("?lsd_2 $a(x) => $b(x) => $c(x)"),
            "(($a(x) => $b(x)) => $c(x))"
        );
        assert_eq!(
            show("?lsd_2 $a(x) | $b(x) & $c(x) <=> $d(x)"),
            "(($a(x) | ($b(x) & $c(x))) <=> $d(x))"
        );
    }

    #[test]
    fn quantifier_scope() {
        assert_eq!(
            show("?lsd_2 ~En,x,y x!=y & $ep(n,x) & $ep(n,y)"),
            "~(En,x,y ((x!=y & $ep(n,x)) & $ep(n,y)))"
        );
        assert_eq!(
            show("?lsd_2 An (n>=1) => ($b(n,1) | $b(n,2))"),
            "(An (n>=1 => ($b(n,1) | $b(n,2))))"
        );
        assert_eq!(
            show("?lsd_2 $g(0,0) & (Ex $g(n,x)) & n=n"),
            "(($g(0,0) & (Ex $g(n,x))) & n=n)"
        );
    }

    #[test]
    fn terms_and_outputs() {
        assert_eq!(
            show("?lsd_2 An (Q[2*n]=Q[n] & Q[4*n+1]=@0 & Q[4*n+3]=@1)"),
            "(An ((Q[(2*n)]=Q[n] & Q[((4*n)+1)]=@0) & Q[((4*n)+3)]=@1))"
        );
        assert_eq!(show("?lsd_2 z=(y-x)+1"), "z=((y-x)+1)");
        assert_eq!(show("?lsd_2 n=z+2*(n/2)"), "n=(z+(2*(n/2)))");
        assert_eq!(show("?lsd_2 D[n]=@-1"), "D[n]=@-1");
        assert_eq!(
            show("?lsd_2 (n=0 & z=0) | $ep(n-1,z-1)"),
            "((n=0 & z=0) | $ep((n-1),(z-1)))"
        );
    }

    #[test]
    fn syntax_errors_have_positions() {
        match parse_formula("?lsd_2 x = ") {
            Err(LogicError::Syntax { line: 1, col, .. }) => assert!(col >= 11),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("x=1").is_err());
        assert!(parse_formula("?lsd_2 x=1)").is_err());
        assert!(parse_formula("?lsd_2 @1=@2").is_err());
    }

    #[test]
    fn script_commands() {
        let script = r#"
# comment
reg even lsd_2 "()|0(0|1)*":
def d0 "?lsd_2 $synchd(n,0)":
combine D d0=0 d1=1 d2=-1:
minimize DP DPP:
eval t "?lsd_2
   An n=n":
"#;
        let cmds = parse_script(script).unwrap();
        assert_eq!(cmds.len(), 5);
        assert_eq!(cmds[0].line, 3);
        assert_eq!(
            cmds[2].command,
            Command::Combine {
                name: "D".into(),
                parts: vec![("d0".into(), 0), ("d1".into(), 1), ("d2".into(), -1)]
            }
        );
        assert_eq!(cmds[4].command.keyword(), "eval");
        assert!(parse_script("").unwrap().is_empty());
    }

    #[test]
    fn script_errors() {
        assert!(matches!(
            parse_script("frobnicate x:"),
            Err(LogicError::UnknownCommand {
                line: 1,
                col: 1,
                ..
            })
        ));
        match parse_script("def x \"?lsd_2\n  n = = 1\":") {
            Err(LogicError::Syntax { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_script("def x \"?lsd_2 n=1\"").is_err());
    }
}
