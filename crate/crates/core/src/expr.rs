//! Expression language for coefficient functions and impulse maps.
//!
//! Grammar, from loosest to tightest binding:
//!
//! ```text
//! expr    := expr ('+' | '-') expr
//!          | expr ('*' | '/') expr
//!          | '-' expr
//!          | expr '^' expr          (right associative)
//!          | number | variable | 'pi' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | abs | sqrt | tanh
//! ```
//!
//! Exactly one free variable is allowed; its name is fixed when parsing (`t`
//! for coefficients, `y` for impulse maps). The Unicode minus sign `−` is
//! accepted as an alias of `-`.

use std::fmt;

use crate::error::{Error, EvalError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    /// Left and right binding power. `^` binds right to left.
    fn binding_power(self) -> (u8, u8) {
        match self {
            BinOp::Add | BinOp::Sub => (1, 2),
            BinOp::Mul | BinOp::Div => (3, 4),
            BinOp::Pow => (8, 7),
        }
    }
}

const PREFIX_NEG_POWER: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Sqrt,
    Tanh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var,
    Pi,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression in one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    variable: String,
    source: String,
}

impl Expr {
    /// Parses `source` with `variable` as the only free name.
    pub fn parse(source: &str, variable: &str) -> Result<Expr> {
        if source.len() > MAX_SOURCE_LEN {
            return Err(Error::Parse {
                offset: MAX_SOURCE_LEN,
                message: format!("expression longer than {MAX_SOURCE_LEN} bytes"),
            });
        }
        let tokens = tokenize(source)?;
        if tokens.len() == 1 {
            return Err(Error::Parse { offset: 0, message: "empty expression".into() });
        }
        let mut parser = Parser { tokens, pos: 0, variable, depth: 0 };
        let root = parser.expression(0)?;
        let tok = parser.peek();
        if tok.kind != TokenKind::End {
            let message = if tok.kind == TokenKind::RParen {
                "unbalanced ')'".to_string()
            } else {
                format!("unexpected {}", tok.kind.describe())
            };
            return Err(Error::Parse { offset: tok.offset, message });
        }
        Ok(Expr { root, variable: variable.to_string(), source: source.to_string() })
    }

    /// Wraps an already-built tree.
    pub fn from_node(root: Node, variable: &str) -> Expr {
        let source = Printer { node: &root, variable }.to_string();
        Expr { root, variable: variable.to_string(), source }
    }

    /// Constant expression.
    pub fn constant(value: f64, variable: &str) -> Expr {
        Expr::from_node(Node::Num(value), variable)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    /// The text this expression was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, value: f64) -> std::result::Result<f64, EvalError> {
        if !value.is_finite() {
            return Err(EvalError::NonFinite);
        }
        eval_node(&self.root, value)
    }

    /// Largest `|e|` over `samples` evenly spaced points of `[lo, hi]`,
    /// endpoints included. This is a sampling estimate, not a rigorous bound.
    pub fn bound_on_interval(&self, lo: f64, hi: f64, samples: usize) -> Result<f64> {
        if samples < 64 {
            return Err(Error::precondition(format!("need at least 64 samples, got {samples}")));
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::precondition(format!("bad sampling interval [{lo}, {hi}]")));
        }
        let last = (samples - 1) as f64;
        let mut bound = 0.0_f64;
        for i in 0..samples {
            let x = if i == samples - 1 { hi } else { lo + (hi - lo) * (i as f64) / last };
            bound = bound.max(self.eval(x)?.abs());
        }
        Ok(bound)
    }
}

/// Default sample count for [`Expr::bound_on_interval`].
pub const DEFAULT_BOUND_SAMPLES: usize = 1025;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer { node: &self.root, variable: &self.variable }.fmt(f)
    }
}

/// Fully parenthesised rendering that reparses to the same tree values.
struct Printer<'a> {
    node: &'a Node,
    variable: &'a str,
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |node| Printer { node, variable: self.variable };
        match self.node {
            Node::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
                write!(f, "(-{:?})", -v)
            }
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Var => f.write_str(self.variable),
            Node::Pi => f.write_str("pi"),
            Node::Neg(a) => write!(f, "(-{})", sub(a)),
            Node::Binary(op, a, b) => write!(f, "({} {} {})", sub(a), op.symbol(), sub(b)),
            Node::Call(func, a) => write!(f, "{}({})", func.name(), sub(a)),
        }
    }
}

fn finite(v: f64) -> std::result::Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn eval_node(node: &Node, x: f64) -> std::result::Result<f64, EvalError> {
    match node {
        Node::Num(v) => Ok(*v),
        Node::Var => Ok(x),
        Node::Pi => Ok(std::f64::consts::PI),
        Node::Neg(a) => Ok(-eval_node(a, x)?),
        Node::Binary(op, a, b) => {
            let (a, b) = (eval_node(a, x)?, eval_node(b, x)?);
            match op {
                BinOp::Add => finite(a + b),
                BinOp::Sub => finite(a - b),
                BinOp::Mul => finite(a * b),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::DivisionByZero)
                    } else {
                        finite(a / b)
                    }
                }
                BinOp::Pow => {
                    if a == 0.0 && b < 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    let v = a.powf(b);
                    if v.is_nan() {
                        Err(EvalError::Domain("^"))
                    } else {
                        finite(v)
                    }
                }
            }
        }
        Node::Call(func, a) => {
            let a = eval_node(a, x)?;
            match func {
                Func::Sin => Ok(a.sin()),
                Func::Cos => Ok(a.cos()),
                Func::Exp => finite(a.exp()),
                Func::Abs => Ok(a.abs()),
                Func::Sqrt => {
                    if a < 0.0 {
                        Err(EvalError::Domain("sqrt"))
                    } else {
                        Ok(a.sqrt())
                    }
                }
                Func::Tanh => Ok(a.tanh()),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(BinOp),
    LParen,
    RParen,
    End,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(v) => format!("number {v}"),
            TokenKind::Ident(s) => format!("identifier '{s}'"),
            TokenKind::Op(op) => format!("operator '{}'", op.symbol()),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(source: &str) -> Result<Vec<Token>> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let kind = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => TokenKind::Op(BinOp::Add),
            b'-' => TokenKind::Op(BinOp::Sub),
            b'*' => TokenKind::Op(BinOp::Mul),
            b'/' => TokenKind::Op(BinOp::Div),
            b'^' => TokenKind::Op(BinOp::Pow),
            b'(' => TokenKind::LParen,
            b')' => TokenKind::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("malformed number '{text}'"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        offset: start,
                        message: format!("number '{text}' is out of range"),
                    });
                }
                tokens.push(Token { kind: TokenKind::Number(value), offset: start });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token { kind: TokenKind::Ident(source[start..i].to_string()), offset: start });
                continue;
            }
            _ => {
                let ch = source[start..].chars().next().unwrap();
                if ch == '\u{2212}' {
                    i += ch.len_utf8();
                    tokens.push(Token { kind: TokenKind::Op(BinOp::Sub), offset: start });
                    continue;
                }
                return Err(Error::Parse { offset: start, message: format!("unexpected character '{ch}'") });
            }
        };
        i += 1;
        tokens.push(Token { kind, offset: start });
    }
    tokens.push(Token { kind: TokenKind::End, offset: source.len() });
    Ok(tokens)
}

/// Longest accepted source text, in bytes.
pub const MAX_SOURCE_LEN: usize = 4096;
/// Deepest accepted nesting of parentheses, calls, signs and powers.
pub const MAX_NESTING: usize = 128;

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    variable: &'a str,
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::End {
            self.pos += 1;
        }
        tok
    }

    /// Precedence climbing: parse operators whose left power is at least `min_power`.
    fn expression(&mut self, min_power: u8) -> Result<Node> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(Error::Parse {
                offset: self.peek().offset,
                message: format!("nesting deeper than {MAX_NESTING}"),
            });
        }
        let node = self.climb(min_power);
        self.depth -= 1;
        node
    }

    fn climb(&mut self, min_power: u8) -> Result<Node> {
        let mut lhs = self.prefix()?;
        while let TokenKind::Op(op) = self.peek().kind {
            let (left, right) = op.binding_power();
            if left < min_power {
                break;
            }
            self.next();
            let rhs = self.expression(right)?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Node> {
        let tok = self.next();
        match tok.kind {
            TokenKind::Number(v) => Ok(Node::Num(v)),
            TokenKind::Op(BinOp::Sub) => {
                let operand = self.expression(PREFIX_NEG_POWER)?;
                Ok(Node::Neg(Box::new(operand)))
            }
            TokenKind::LParen => {
                let inner = self.expression(0)?;
                self.expect_close(tok.offset)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                if name == self.variable {
                    return Ok(Node::Var);
                }
                if name == "pi" {
                    return Ok(Node::Pi);
                }
                let func = Func::from_name(&name).ok_or_else(|| Error::Parse {
                    offset: tok.offset,
                    message: format!("unknown identifier '{name}'"),
                })?;
                let open = self.next();
                if open.kind != TokenKind::LParen {
                    return Err(Error::Parse {
                        offset: open.offset,
                        message: format!("expected '(' after function '{name}'"),
                    });
                }
                if self.peek().kind == TokenKind::RParen {
                    return Err(Error::Parse {
                        offset: self.peek().offset,
                        message: format!("empty argument list for '{name}'"),
                    });
                }
                let arg = self.expression(0)?;
                self.expect_close(open.offset)?;
                Ok(Node::Call(func, Box::new(arg)))
            }
            TokenKind::End => {
                Err(Error::Parse { offset: tok.offset, message: "unexpected end of input".into() })
            }
            TokenKind::RParen => Err(Error::Parse { offset: tok.offset, message: "unbalanced ')'".into() }),
            other => {
                Err(Error::Parse { offset: tok.offset, message: format!("unexpected {}", other.describe()) })
            }
        }
    }

    fn expect_close(&mut self, open_offset: usize) -> Result<()> {
        let tok = self.next();
        if tok.kind == TokenKind::RParen {
            Ok(())
        } else {
            Err(Error::Parse {
                offset: tok.offset,
                message: format!(
                    "unbalanced '(' opened at offset {open_offset}: expected ')', found {}",
                    tok.kind.describe()
                ),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn eval(src: &str, var: &str, x: f64) -> std::result::Result<f64, EvalError> {
        Expr::parse(src, var).unwrap().eval(x)
    }

    fn offset(src: &str, var: &str) -> usize {
        match Expr::parse(src, var) {
            Err(Error::Parse { offset, .. }) => offset,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn examples() {
        assert_eq!(eval("2*sin(t)+1", "t", 0.0), Ok(1.0));
        assert_eq!(eval("y^2/(1+abs(y))", "y", 0.0), Ok(0.0));
        assert_eq!(offset("1+", "t"), 2);
        assert_eq!(eval("pi", "t", 0.0), Ok(PI));
        assert_eq!(eval("t^2", "t", 3.0), Ok(9.0));
        assert_eq!(eval("sqrt(0-1)", "t", 5.0), Err(EvalError::Domain("sqrt")));
        assert_eq!(eval("sqrt(0\u{2212}1)", "t", 5.0), Err(EvalError::Domain("sqrt")));
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("2+3*4", "t", 0.0), Ok(14.0));
        assert_eq!(eval("2^3^2", "t", 0.0), Ok(512.0));
        assert_eq!(eval("-2^2", "t", 0.0), Ok(-4.0));
        assert_eq!(eval("2^-1", "t", 0.0), Ok(0.5));
        assert_eq!(eval("8/4/2", "t", 0.0), Ok(1.0));
        assert_eq!(eval("1-2-3", "t", 0.0), Ok(-4.0));
        assert_eq!(eval("-t*3", "t", 2.0), Ok(-6.0));
        assert_eq!(eval("2*-t", "t", 2.0), Ok(-4.0));
        assert_eq!(eval("1.5e1 + .5", "t", 0.0), Ok(15.5));
    }

    #[test]
    fn size_limits() {
        let deep = format!("{}t{}", "(".repeat(MAX_NESTING + 1), ")".repeat(MAX_NESTING + 1));
        assert!(matches!(Expr::parse(&deep, "t"), Err(Error::Parse { .. })));
        let ok = format!("{}t{}", "(".repeat(50), ")".repeat(50));
        assert!(Expr::parse(&ok, "t").is_ok());
        let chain = vec!["1"; 2048].join("+");
        assert_eq!(Expr::parse(&chain, "t").unwrap().eval(0.0).unwrap(), 2048.0);
        assert!(Expr::parse(&"1+".repeat(3000), "t").is_err());
        assert!(Expr::parse(&"-".repeat(200), "t").is_err());
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(offset("", "t"), 0);
        assert_eq!(offset("   ", "t"), 0);
        assert_eq!(offset("(1+2", "t"), 4);
        assert_eq!(offset("1+2)", "t"), 3);
        assert_eq!(offset("sin()", "t"), 4);
        assert_eq!(offset("2*y", "t"), 2);
        assert_eq!(offset("foo(t)", "t"), 0);
        assert_eq!(offset("sin t", "t"), 4);
        assert_eq!(offset("1 $ 2", "t"), 2);
        assert_eq!(offset("1e999", "t"), 0);
        assert_eq!(offset("1..2", "t"), 0);
        assert_eq!(offset("t t", "t"), 2);
    }

    #[test]
    fn evaluation_errors() {
        assert_eq!(eval("1/t", "t", 0.0), Err(EvalError::DivisionByZero));
        assert_eq!(eval("(0-8)^0.5", "t", 0.0), Err(EvalError::Domain("^")));
        assert_eq!(eval("exp(t)", "t", 1000.0), Err(EvalError::NonFinite));
        assert_eq!(eval("t", "t", f64::NAN), Err(EvalError::NonFinite));
    }

    #[test]
    fn bounds() {
        let e = Expr::parse("sin(t)", "t").unwrap();
        let b = e.bound_on_interval(0.0, PI, DEFAULT_BOUND_SAMPLES).unwrap();
        assert!((b - 1.0).abs() < 1e-6);
        let zero = Expr::parse("0", "t").unwrap();
        assert_eq!(zero.bound_on_interval(0.0, PI, 1025).unwrap(), 0.0);
        let pole = Expr::parse("1/ (t-1)", "t").unwrap();
        assert!(matches!(pole.bound_on_interval(0.0, 2.0, 1025), Err(Error::Eval(_))));
        assert!(zero.bound_on_interval(0.0, PI, 10).is_err());
    }

    #[test]
    fn display_reparses() {
        let e = Expr::parse("-2*sin(t)^2 + t/3 - pi", "t").unwrap();
        let again = Expr::parse(&e.to_string(), "t").unwrap();
        assert_eq!(e.root(), again.root());
    }

    fn arb_node() -> impl Strategy<Value = Node> {
        let leaf = prop_oneof![(-1e3f64..1e3).prop_map(Node::Num), Just(Node::Var), Just(Node::Pi),];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let op = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow),
            ];
            let func = prop_oneof![
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Exp),
                Just(Func::Abs),
                Just(Func::Sqrt),
                Just(Func::Tanh),
            ];
            prop_oneof![
                inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
                (op, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Node::Binary(
                    op,
                    Box::new(a),
                    Box::new(b)
                )),
                (func, inner).prop_map(|(f, a)| Node::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_is_evaluation_equivalent(node in arb_node(), x in -5.0f64..5.0) {
            let e = Expr::from_node(node, "t");
            let printed = e.to_string();
            let back = Expr::parse(&printed, "t").unwrap();
            prop_assert_eq!(back.to_string(), printed);
            match (e.eval(x), back.eval(x)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }

        #[test]
        fn parse_never_panics(src in "[-+*/^() .0-9a-z]{0,24}") {
            let _ = Expr::parse(&src, "t");
        }
    }
}
