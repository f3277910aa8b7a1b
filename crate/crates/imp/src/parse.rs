//! Recursive-descent parser for the concrete syntax.
//!
//! ```text
//! program ::= stmt*
//! stmt    ::= "skip" ";" | "{" stmt* "}"
//!           | x ":=" aexp ";" | x ":=" "array" "(" aexp ")" ";"
//!           | x ":=" a "[" aexp "]" ";" | a "[" aexp "]" ":=" aexp ";"
//!           | "if" "(" bexp ")" "{" stmt* "}" ["else" "{" stmt* "}"]
//!           | "while" "(" bexp ")" "{" stmt* "}"
//! aexp    ::= term (("+" | "-") term)*
//! term    ::= factor (("*" | "/") factor)*
//! factor  ::= int | x | "-" factor | "(" aexp ")"
//! bexp    ::= conj ("||" conj)*
//! conj    ::= atom ("&&" atom)*
//! atom    ::= "true" | "false" | "!" atom | aexp cmp aexp | "(" bexp ")"
//! cmp     ::= "<" | "<=" | ">" | ">=" | "==" | "!="
//! ```
//!
//! `//` starts a comment. A block is a right-nested sequence; an empty block
//! is `skip`. Labels are handed out in pre-order.

use std::sync::Arc;

use nominal_core::Name;

use crate::ast::{position_label, AExp, BExp, Cmd, CmdKind, CmpOp, Var};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(String),
    Ident(String),
    Sym(&'static str),
    End,
}

const SYMBOLS: [&str; 20] = [
    ":=", "<=", ">=", "==", "!=", "&&", "||", "<", ">", "!", "+", "-", "*", "/", "(", ")", "{", "}", "[", "]",
];

struct Lexed {
    toks: Vec<(Tok, usize, usize)>,
}

fn lex(src: &str) -> Result<Lexed, ParseError> {
    let mut toks = Vec::new();
    let (mut line, mut col) = (1, 1);
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            let n = chars[i..].iter().take_while(|&&c| c != '\n').count();
            advance(n, &mut i);
        } else if c == ';' {
            toks.push((Tok::Sym(";"), l0, c0));
            advance(1, &mut i);
        } else if c.is_ascii_digit() {
            let n = chars[i..].iter().take_while(|c| c.is_ascii_digit()).count();
            toks.push((Tok::Int(chars[i..i + n].iter().collect()), l0, c0));
            advance(n, &mut i);
        } else if c.is_ascii_alphabetic() || c == '_' {
            let n = chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').count();
            toks.push((Tok::Ident(chars[i..i + n].iter().collect()), l0, c0));
            advance(n, &mut i);
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    toks.push((Tok::Sym(s), l0, c0));
                    advance(s.len(), &mut i);
                }
                None => return Err(ParseError { line: l0, column: c0, message: format!("unexpected character `{c}`") }),
            }
        }
    }
    toks.push((Tok::End, line, col));
    Ok(Lexed { toks })
}

const KEYWORDS: [&str; 7] = ["skip", "if", "else", "while", "array", "true", "false"];

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn fail<T>(&self, message: impl Into<String>) -> PResult<T> {
        let (_, line, column) = self.toks[self.pos];
        Err(ParseError { line, column, message: message.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> PResult<Var> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Ok(Arc::from(s.as_str()))
            }
            t => self.fail(format!("expected a variable, found {}", describe(&t))),
        }
    }

    /// Statements up to `}` or end of input, as one command.
    fn block(&mut self) -> PResult<Cmd> {
        let mut stmts = Vec::new();
        while !self.is_sym("}") && *self.peek() != Tok::End {
            stmts.push(self.stmt()?);
        }
        let Some(mut acc) = stmts.pop() else { return Ok(unlabeled(CmdKind::Skip)) };
        while let Some(s) = stmts.pop() {
            acc = unlabeled(CmdKind::Seq(Arc::new(s), Arc::new(acc)));
        }
        Ok(acc)
    }

    fn braced(&mut self) -> PResult<Cmd> {
        self.expect_sym("{")?;
        let c = self.block()?;
        self.expect_sym("}")?;
        Ok(c)
    }

    fn stmt(&mut self) -> PResult<Cmd> {
        let kind = if self.is_kw("skip") {
            self.pos += 1;
            self.expect_sym(";")?;
            CmdKind::Skip
        } else if self.is_sym("{") {
            return self.braced();
        } else if self.is_kw("if") {
            self.pos += 1;
            self.expect_sym("(")?;
            let b = self.bexp()?;
            self.expect_sym(")")?;
            let then = self.braced()?;
            let other = if self.is_kw("else") {
                self.pos += 1;
                self.braced()?
            } else {
                unlabeled(CmdKind::Skip)
            };
            CmdKind::If(b, Arc::new(then), Arc::new(other))
        } else if self.is_kw("while") {
            self.pos += 1;
            self.expect_sym("(")?;
            let b = self.bexp()?;
            self.expect_sym(")")?;
            CmdKind::While(b, Arc::new(self.braced()?))
        } else {
            let x = self.ident()?;
            if self.eat_sym("[") {
                let i = self.aexp()?;
                self.expect_sym("]")?;
                self.expect_sym(":=")?;
                let e = self.aexp()?;
                self.expect_sym(";")?;
                CmdKind::ArrWrite(x, i, e)
            } else {
                self.expect_sym(":=")?;
                let kind = if self.is_kw("array") {
                    self.pos += 1;
                    self.expect_sym("(")?;
                    let e = self.aexp()?;
                    self.expect_sym(")")?;
                    CmdKind::ArrAlloc(x, e)
                } else if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Sym("[") {
                    let a = self.ident()?;
                    self.expect_sym("[")?;
                    let e = self.aexp()?;
                    self.expect_sym("]")?;
                    CmdKind::ArrRead(x, a, e)
                } else {
                    CmdKind::Assign(x, self.aexp()?)
                };
                self.expect_sym(";")?;
                kind
            }
        };
        Ok(unlabeled(kind))
    }

    fn aexp(&mut self) -> PResult<AExp> {
        let mut acc = self.term()?;
        loop {
            if self.eat_sym("+") {
                acc = AExp::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat_sym("-") {
                acc = AExp::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> PResult<AExp> {
        let mut acc = self.factor()?;
        loop {
            if self.eat_sym("*") {
                acc = AExp::Mul(Box::new(acc), Box::new(self.factor()?));
            } else if self.eat_sym("/") {
                acc = AExp::Div(Box::new(acc), Box::new(self.factor()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn int(&mut self, text: &str) -> PResult<i64> {
        match text.parse::<i64>() {
            Ok(n) => Ok(n),
            Err(_) => self.fail(format!("integer literal `{text}` out of range")),
        }
    }

    fn factor(&mut self) -> PResult<AExp> {
        match self.peek().clone() {
            Tok::Int(s) => {
                let n = self.int(&s)?;
                self.pos += 1;
                Ok(AExp::Lit(n))
            }
            Tok::Sym("-") => {
                self.pos += 1;
                if let Tok::Int(s) = self.peek().clone() {
                    let n = self.int(&format!("-{s}"))?;
                    self.pos += 1;
                    return Ok(AExp::Lit(n));
                }
                Ok(AExp::Sub(Box::new(AExp::Lit(0)), Box::new(self.factor()?)))
            }
            Tok::Sym("(") => {
                self.pos += 1;
                let e = self.aexp()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(AExp::Var(self.ident()?)),
            t => self.fail(format!("expected an expression, found {}", describe(&t))),
        }
    }

    fn bexp(&mut self) -> PResult<BExp> {
        let mut acc = self.conj()?;
        while self.eat_sym("||") {
            acc = BExp::Or(Box::new(acc), Box::new(self.conj()?));
        }
        Ok(acc)
    }

    fn conj(&mut self) -> PResult<BExp> {
        let mut acc = self.batom()?;
        while self.eat_sym("&&") {
            acc = BExp::And(Box::new(acc), Box::new(self.batom()?));
        }
        Ok(acc)
    }

    fn batom(&mut self) -> PResult<BExp> {
        if self.is_kw("true") || self.is_kw("false") {
            let b = self.is_kw("true");
            self.pos += 1;
            return Ok(BExp::Const(b));
        }
        if self.eat_sym("!") {
            return Ok(BExp::Not(Box::new(self.batom()?)));
        }
        let start = self.pos;
        match self.comparison() {
            Ok(b) => Ok(b),
            Err(e) if self.toks[start].0 == Tok::Sym("(") => {
                self.pos = start + 1;
                let b = self.bexp().map_err(|_| e)?;
                self.expect_sym(")")?;
                Ok(b)
            }
            Err(e) => Err(e),
        }
    }

    fn comparison(&mut self) -> PResult<BExp> {
        let a = self.aexp()?;
        let op = match self.peek() {
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            t => return self.fail(format!("expected a comparison, found {}", describe(t))),
        };
        self.pos += 1;
        Ok(BExp::Cmp(op, a, self.aexp()?))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(s) => format!("`{s}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::End => "end of input".into(),
    }
}

/// Parse a whole program.
pub fn parse(src: &str) -> Result<Cmd, ParseError> {
    let mut p = Parser { toks: lex(src)?.toks, pos: 0 };
    let c = p.block()?;
    if *p.peek() != Tok::End {
        return p.fail(format!("unexpected {}", describe(p.peek())));
    }
    Ok(label_tree(&c, &mut 0))
}

fn unlabeled(kind: CmdKind) -> Cmd {
    Cmd::new(Name::root(), kind)
}

/// Assign position labels in pre-order.
pub fn label_tree(c: &Cmd, next: &mut u64) -> Cmd {
    let label = position_label(*next);
    *next += 1;
    let mut sub = |c: &Arc<Cmd>| Arc::new(label_tree(c, next));
    let kind = match &c.kind {
        CmdKind::Seq(a, b) => {
            let a = sub(a);
            CmdKind::Seq(a, sub(b))
        }
        CmdKind::If(g, a, b) => {
            let a = sub(a);
            CmdKind::If(g.clone(), a, sub(b))
        }
        CmdKind::While(g, body) => CmdKind::While(g.clone(), sub(body)),
        k => k.clone(),
    };
    Cmd::new(label, kind)
}
