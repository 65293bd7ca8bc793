//! Text syntax for formulas.
//!
//! ```text
//! file    := (def ';')* formula ';'?
//! def     := 'def' IDENT ':=' (formula | expr)
//! formula := imp ('<->' imp)*
//! imp     := or ('->' imp)?
//! or      := and ('|' and)*
//! and     := item ('&' item)*
//! item    := expr ('>=' | '<=' | '=' | '>' | '<') expr | unary
//! unary   := '!' unary | '[]' unary | '<>' INT? unary
//!          | 'true' | 'false' | IDENT | '(' formula ')'
//! expr    := term (('+' | '-') term)*
//! term    := '-'? INT ('*' term)? | '-' term | '#' unary | '[' formula ']'
//!          | '(' expr ')' | IDENT
//! ```
//!
//! `def` introduces a name for a formula (which may then be shared) or for
//! an expression (which may be used only once). Comments start with `//`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use super::{ExprId, FormulaDag, NodeId};
use crate::Int;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: String },
    UndefinedExpression(String),
    FormulaUsedAsExpression(String),
    ExpressionUsedAsFormula(String),
    ExpressionReused(String),
    ForwardReference(String),
    DuplicateDefinition(String),
    Reserved(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "expected {expected}, found {found}")
            }
            ParseErrorKind::UndefinedExpression(n) => write!(f, "undefined expression name `{n}`"),
            ParseErrorKind::FormulaUsedAsExpression(n) => {
                write!(f, "`{n}` names a formula but is used as an expression")
            }
            ParseErrorKind::ExpressionUsedAsFormula(n) => {
                write!(f, "`{n}` names an expression but is used as a formula")
            }
            ParseErrorKind::ExpressionReused(n) => {
                write!(f, "expression `{n}` is used more than once (expressions cannot be shared)")
            }
            ParseErrorKind::ForwardReference(n) => {
                write!(f, "`{n}` is referenced before its definition")
            }
            ParseErrorKind::DuplicateDefinition(n) => write!(f, "`{n}` is defined twice"),
            ParseErrorKind::Reserved(n) => write!(f, "`{n}` is a reserved word"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(Int),
    Def,
    True,
    False,
    Assign,
    Semi,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Box,
    Diamond,
    Hash,
    Bang,
    And,
    Or,
    Implies,
    Iff,
    Geq,
    Leq,
    Gt,
    Lt,
    Eq,
    Plus,
    Minus,
    Star,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(i) => return write!(f, "integer {i}"),
            Tok::Def => "`def`",
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::Assign => "`:=`",
            Tok::Semi => "`;`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::Box => "`[]`",
            Tok::Diamond => "`<>`",
            Tok::Hash => "`#`",
            Tok::Bang => "`!`",
            Tok::And => "`&`",
            Tok::Or => "`|`",
            Tok::Implies => "`->`",
            Tok::Iff => "`<->`",
            Tok::Geq => "`>=`",
            Tok::Leq => "`<=`",
            Tok::Gt => "`>`",
            Tok::Lt => "`<`",
            Tok::Eq => "`=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '@'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '@' || c == '\''
}

fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        let rest = |k: usize| chars.get(i + k).copied();
        let (tok, len) = if is_ident_start(c) {
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let tok = match word.as_str() {
                "def" => Tok::Def,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(word),
            };
            (tok, j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[i..j].iter().collect();
            (Tok::Int(digits.parse().expect("digits")), j - i)
        } else {
            match (c, rest(1), rest(2)) {
                ('<', Some('-'), Some('>')) => (Tok::Iff, 3),
                ('<', Some('>'), _) => (Tok::Diamond, 2),
                ('<', Some('='), _) => (Tok::Leq, 2),
                ('<', _, _) => (Tok::Lt, 1),
                ('>', Some('='), _) => (Tok::Geq, 2),
                ('>', _, _) => (Tok::Gt, 1),
                ('-', Some('>'), _) => (Tok::Implies, 2),
                ('-', _, _) => (Tok::Minus, 1),
                (':', Some('='), _) => (Tok::Assign, 2),
                ('[', Some(']'), _) => (Tok::Box, 2),
                ('[', _, _) => (Tok::LBrack, 1),
                (']', _, _) => (Tok::RBrack, 1),
                ('(', _, _) => (Tok::LParen, 1),
                (')', _, _) => (Tok::RParen, 1),
                ('#', _, _) => (Tok::Hash, 1),
                ('!', _, _) | ('~', _, _) => (Tok::Bang, 1),
                ('&', _, _) => (Tok::And, 1),
                ('|', _, _) => (Tok::Or, 1),
                ('=', _, _) => (Tok::Eq, 1),
                ('+', _, _) => (Tok::Plus, 1),
                ('*', _, _) => (Tok::Star, 1),
                (';', _, _) => (Tok::Semi, 1),
                _ => {
                    return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(c), line, col })
                }
            }
        };
        out.push((tok, line, start_col));
        i += len;
        col += len;
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cmp {
    Geq,
    Leq,
    Gt,
    Lt,
    Eq,
}

type Pos = (usize, usize);

#[derive(Clone, Debug)]
enum F {
    Name(String, Pos),
    True,
    False,
    Not(Box<F>),
    Or(Box<F>, Box<F>),
    And(Box<F>, Box<F>),
    Implies(Box<F>, Box<F>),
    Iff(Box<F>, Box<F>),
    Box_(Box<F>),
    Diamond(Int, Box<F>),
    Cmp(E, Cmp, E),
}

#[derive(Clone, Debug)]
enum E {
    Int(Int),
    Name(String, Pos),
    One(Box<F>),
    Count(Box<F>),
    Add(Box<E>, Box<E>),
    Sub(Box<E>, Box<E>),
    Neg(Box<E>),
    Mul(Int, Box<E>),
}

enum Body {
    F(F),
    E(E),
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn here(&self) -> Pos {
        let t = &self.toks[self.pos];
        (t.1, t.2)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            kind: ParseErrorKind::UnexpectedToken {
                found: self.peek().to_string(),
                expected: expected.to_string(),
            },
            line,
            col,
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&t.to_string()))
        }
    }

    fn file(&mut self) -> Result<(Vec<(String, Pos, Body)>, F), ParseError> {
        let mut defs = Vec::new();
        while *self.peek() == Tok::Def {
            self.bump();
            let at = self.here();
            let name = match self.bump() {
                Tok::Ident(s) => s,
                _ => {
                    self.pos -= 1;
                    return Err(self.err("a name"));
                }
            };
            self.expect(Tok::Assign)?;
            let save = self.pos;
            let body = match self.formula() {
                Ok(f) if *self.peek() == Tok::Semi => Body::F(f),
                first => {
                    let fpos = self.pos;
                    self.pos = save;
                    match self.expr() {
                        Ok(e) if *self.peek() == Tok::Semi => Body::E(e),
                        _ => {
                            // Report whichever attempt got further.
                            self.pos = fpos;
                            return Err(match first {
                                Err(e) => e,
                                Ok(_) => self.err("`;`"),
                            });
                        }
                    }
                }
            };
            self.expect(Tok::Semi)?;
            defs.push((name, at, body));
        }
        let f = self.formula()?;
        if *self.peek() == Tok::Semi {
            self.bump();
        }
        if *self.peek() != Tok::Eof {
            return Err(self.err("end of input"));
        }
        Ok((defs, f))
    }

    fn formula(&mut self) -> Result<F, ParseError> {
        let mut f = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let g = self.imp()?;
            f = F::Iff(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    fn imp(&mut self) -> Result<F, ParseError> {
        let f = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let g = self.imp()?;
            return Ok(F::Implies(Box::new(f), Box::new(g)));
        }
        Ok(f)
    }

    fn or(&mut self) -> Result<F, ParseError> {
        let mut f = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let g = self.and()?;
            f = F::Or(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<F, ParseError> {
        let mut f = self.item()?;
        while *self.peek() == Tok::And {
            self.bump();
            let g = self.item()?;
            f = F::And(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    /// Whether a comparison operator occurs before the end of the current item.
    fn comparison_ahead(&self) -> bool {
        let mut depth = 0usize;
        let mut k = self.pos;
        loop {
            match &self.toks[k].0 {
                Tok::LParen | Tok::LBrack => depth += 1,
                Tok::RParen | Tok::RBrack => {
                    if depth == 0 {
                        return false;
                    }
                    depth -= 1;
                }
                Tok::Geq | Tok::Leq | Tok::Gt | Tok::Lt | Tok::Eq if depth == 0 => return true,
                Tok::And | Tok::Or | Tok::Implies | Tok::Iff | Tok::Semi | Tok::Assign
                    if depth == 0 =>
                {
                    return false
                }
                Tok::Eof => return false,
                _ => {}
            }
            k += 1;
        }
    }

    fn item(&mut self) -> Result<F, ParseError> {
        if self.comparison_ahead() {
            let save = self.pos;
            match self.atom() {
                Ok(f) => return Ok(f),
                Err(e) => {
                    let far = self.pos;
                    self.pos = save;
                    return match self.unary() {
                        Ok(f) => Ok(f),
                        Err(e2) => Err(if far >= self.pos { e } else { e2 }),
                    };
                }
            }
        }
        self.unary()
    }

    fn atom(&mut self) -> Result<F, ParseError> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Geq => Cmp::Geq,
            Tok::Leq => Cmp::Leq,
            Tok::Gt => Cmp::Gt,
            Tok::Lt => Cmp::Lt,
            Tok::Eq => Cmp::Eq,
            _ => return Err(self.err("a comparison")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(F::Cmp(lhs, op, rhs))
    }

    fn unary(&mut self) -> Result<F, ParseError> {
        let at = self.here();
        match self.bump() {
            Tok::Bang => Ok(F::Not(Box::new(self.unary()?))),
            Tok::Box => Ok(F::Box_(Box::new(self.unary()?))),
            Tok::Diamond => {
                let k = if let Tok::Int(k) = self.peek().clone() {
                    self.bump();
                    k
                } else {
                    Int::from(1)
                };
                Ok(F::Diamond(k, Box::new(self.unary()?)))
            }
            Tok::True => Ok(F::True),
            Tok::False => Ok(F::False),
            Tok::Ident(s) => Ok(F::Name(s, at)),
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            _ => {
                self.pos -= 1;
                Err(self.err("a formula"))
            }
        }
    }

    fn expr(&mut self) -> Result<E, ParseError> {
        let mut e = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let t = self.term()?;
                    e = E::Add(Box::new(e), Box::new(t));
                }
                Tok::Minus => {
                    self.bump();
                    let t = self.term()?;
                    e = E::Sub(Box::new(e), Box::new(t));
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<E, ParseError> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Minus => {
                if let Tok::Int(k) = self.peek_at(1).clone() {
                    self.bump();
                    self.bump();
                    return self.literal_tail(-k);
                }
                self.bump();
                Ok(E::Neg(Box::new(self.term()?)))
            }
            Tok::Int(k) => {
                self.bump();
                self.literal_tail(k)
            }
            Tok::Hash => {
                self.bump();
                Ok(E::Count(Box::new(self.unary()?)))
            }
            Tok::LBrack => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RBrack)?;
                Ok(E::One(Box::new(f)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(E::Name(s, at))
            }
            _ => Err(self.err("an expression")),
        }
    }

    fn literal_tail(&mut self, k: Int) -> Result<E, ParseError> {
        if *self.peek() == Tok::Star {
            self.bump();
            let t = self.term()?;
            return Ok(E::Mul(k, Box::new(t)));
        }
        Ok(E::Int(k))
    }
}

enum Def {
    Formula(NodeId),
    Expr(Option<ExprId>),
}

struct Lower<'a> {
    dag: &'a mut FormulaDag,
    defs: HashMap<String, Def>,
    later: HashSet<String>,
}

fn at(kind: ParseErrorKind, pos: Pos) -> ParseError {
    ParseError { kind, line: pos.0, col: pos.1 }
}

impl Lower<'_> {
    fn formula(&mut self, f: &F) -> Result<NodeId, ParseError> {
        Ok(match f {
            F::Name(n, pos) => match self.defs.get(n) {
                Some(Def::Formula(id)) => *id,
                Some(Def::Expr(_)) => {
                    return Err(at(ParseErrorKind::ExpressionUsedAsFormula(n.clone()), *pos))
                }
                None if self.later.contains(n) => {
                    return Err(at(ParseErrorKind::ForwardReference(n.clone()), *pos))
                }
                None => self.dag.prop(n),
            },
            F::True => self.dag.top(),
            F::False => self.dag.bottom(),
            F::Not(a) => {
                let a = self.formula(a)?;
                self.dag.not(a)
            }
            F::Or(a, b) => {
                let a = self.formula(a)?;
                let b = self.formula(b)?;
                self.dag.or(a, b)
            }
            F::And(a, b) => {
                let a = self.formula(a)?;
                let b = self.formula(b)?;
                self.dag.and(a, b)
            }
            F::Implies(a, b) => {
                let a = self.formula(a)?;
                let b = self.formula(b)?;
                self.dag.implies(a, b)
            }
            F::Iff(a, b) => {
                let a = self.formula(a)?;
                let b = self.formula(b)?;
                self.dag.iff(a, b)
            }
            F::Box_(a) => {
                let a = self.formula(a)?;
                self.dag.box_(a)
            }
            F::Diamond(k, a) => {
                let a = self.formula(a)?;
                self.dag.diamond_geq(k.clone(), a)
            }
            F::Cmp(l, op, r) => self.comparison(l, *op, r)?,
        })
    }

    fn comparison(&mut self, l: &E, op: Cmp, r: &E) -> Result<NodeId, ParseError> {
        let zero = |e: &E| matches!(e, E::Int(k) if k.is_zero());
        Ok(match op {
            Cmp::Geq if zero(r) => {
                let e = self.expr(l)?;
                self.dag.geq_zero(e)
            }
            Cmp::Leq if zero(l) => {
                let e = self.expr(r)?;
                self.dag.geq_zero(e)
            }
            Cmp::Geq => {
                let a = self.expr(l)?;
                let b = self.expr(r)?;
                self.dag.ge(a, b)
            }
            Cmp::Leq => {
                let a = self.expr(l)?;
                let b = self.expr(r)?;
                self.dag.le(a, b)
            }
            Cmp::Gt | Cmp::Lt => {
                let (a, b) = if op == Cmp::Gt { (l, r) } else { (r, l) };
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                let nb = self.dag.scale(-1, b);
                let diff = self.dag.add(a, nb);
                let m1 = self.dag.constant(-1);
                let s = self.dag.add(diff, m1);
                self.dag.geq_zero(s)
            }
            Cmp::Eq => {
                let x = self.comparison(l, Cmp::Geq, r)?;
                let y = self.comparison(l, Cmp::Leq, r)?;
                self.dag.and(x, y)
            }
        })
    }

    fn expr(&mut self, e: &E) -> Result<ExprId, ParseError> {
        Ok(match e {
            E::Int(k) => self.dag.constant(k.clone()),
            E::Name(n, pos) => match self.defs.get_mut(n) {
                Some(Def::Expr(slot)) => match slot.take() {
                    Some(id) => id,
                    None => return Err(at(ParseErrorKind::ExpressionReused(n.clone()), *pos)),
                },
                Some(Def::Formula(_)) => {
                    return Err(at(ParseErrorKind::FormulaUsedAsExpression(n.clone()), *pos))
                }
                None if self.later.contains(n) => {
                    return Err(at(ParseErrorKind::ForwardReference(n.clone()), *pos))
                }
                None => return Err(at(ParseErrorKind::UndefinedExpression(n.clone()), *pos)),
            },
            E::One(f) => {
                let f = self.formula(f)?;
                self.dag.one(f)
            }
            E::Count(f) => {
                let f = self.formula(f)?;
                self.dag.count(f)
            }
            E::Add(a, b) => {
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                self.dag.add(a, b)
            }
            E::Sub(a, b) => {
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                let nb = self.dag.scale(-1, b);
                self.dag.add(a, nb)
            }
            E::Neg(a) => {
                let a = self.expr(a)?;
                self.dag.scale(-1, a)
            }
            E::Mul(k, a) => {
                let a = self.expr(a)?;
                self.dag.scale(k.clone(), a)
            }
        })
    }
}

/// Parses formula text into a dag whose root is the final formula.
pub fn parse(src: &str) -> Result<FormulaDag, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let (defs, main) = p.file()?;
    let mut dag = FormulaDag::new();
    let mut later: HashSet<String> = HashSet::new();
    for (name, pos, _) in &defs {
        if !later.insert(name.clone()) {
            return Err(at(ParseErrorKind::DuplicateDefinition(name.clone()), *pos));
        }
    }
    let mut low = Lower { dag: &mut dag, defs: HashMap::new(), later };
    for (name, _, body) in &defs {
        low.later.remove(name);
        let d = match body {
            Body::F(f) => Def::Formula(low.formula(f)?),
            Body::E(e) => Def::Expr(Some(low.expr(e)?)),
        };
        low.defs.insert(name.clone(), d);
    }
    let root = low.formula(&main)?;
    dag.set_root(root);
    Ok(dag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::FormulaNode;

    #[test]
    fn parses_counting_atoms() {
        let d = parse("(#musician >= 1) & (#true >= 3 * #tubaplayer)").unwrap();
        assert_eq!(d.propositions(), &["musician".to_string(), "tubaplayer".to_string()]);
        assert!(matches!(d.formula(d.root()), FormulaNode::Not(_)));
    }

    #[test]
    fn geq_zero_keeps_expression() {
        let d = parse("#p - 2 >= 0").unwrap();
        assert!(matches!(d.formula(d.root()), FormulaNode::GeqZero(_)));
        assert_eq!(d.num_expr_nodes(), 4);
    }

    #[test]
    fn defs_share_formulas() {
        let d = parse("def a := p | q;\n a & !a").unwrap();
        let deg = d.formula_in_degrees(d.root());
        assert!(deg.iter().any(|x| *x >= 2));
    }

    #[test]
    fn expression_defs_are_single_use() {
        let ok = parse("def e := #p + 1; e >= 2");
        assert!(ok.is_ok());
        let err = parse("def e := #p + 1; (e >= 2) & (e <= 5)").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ExpressionReused(_)));
    }

    #[test]
    fn reports_position_of_syntax_errors() {
        let err = parse("p &\n  & q").unwrap_err();
        assert_eq!((err.line, err.col), (2, 3));
        let err = parse("p $ q").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('$'));
    }

    #[test]
    fn forward_and_duplicate_definitions_are_rejected() {
        let err = parse("def a := b; def b := p; a").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::ForwardReference(_)));
        let err = parse("def a := p; def a := q; a").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::DuplicateDefinition(_)));
        let err = parse("x >= 1").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UndefinedExpression(_)));
    }

    #[test]
    fn nested_parentheses_parse_quickly() {
        let depth = 60;
        let src = format!("{}p{}", "(".repeat(depth), ")".repeat(depth));
        assert!(parse(&src).is_ok());
        let src = format!("{}#p >= 1{}", "(".repeat(depth), ")".repeat(depth));
        assert!(parse(&src).is_ok());
    }

    #[test]
    fn modal_sugar() {
        let d = parse("[] p & <>2 q & <> r").unwrap();
        assert_eq!(d.modal_depth(d.root()), 1);
    }
}
