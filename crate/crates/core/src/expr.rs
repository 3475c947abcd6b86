//! Infix expression language for user-supplied kernels, generating functions
//! and test functions.
//!
//! Grammar (precedence from loosest to tightest):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = atom [ "^" unary ] ;            (* right associative *)
//! atom    = number | ident | ident "(" expr { "," expr } ")" | "(" expr ")" ;
//! ```
//!
//! Functions: `exp`, `log` (natural), `abs`, and the variadic `min`/`max`
//! (at least two arguments).

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected token `{0}`")]
    UnexpectedToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
    #[error("unknown identifier {0}")]
    UnknownIdentifier(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{name}` expects {expected} argument(s), got {got}")]
    Arity { name: String, expected: String, got: usize },
}

/// Non-finite evaluation verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of a non-positive number")]
    LogOfNonPositive,
    #[error("non-finite result")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Abs,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node<T> {
    Const(T),
    Var(usize),
    Neg(Box<Node<T>>),
    Binary(BinOp, Box<Node<T>>, Box<Node<T>>),
    Call(Func, Vec<Node<T>>),
}

/// Maps identifiers to variable slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarTable {
    /// canonical name per slot
    names: Vec<String>,
    aliases: Vec<(String, usize)>,
}

impl VarTable {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Self { names: names.into_iter().map(Into::into).collect(), aliases: Vec::new() }
    }

    pub fn with_alias(mut self, alias: &str, slot: usize) -> Self {
        self.aliases.push((alias.to_string(), slot));
        self
    }

    /// `x` (alias `x0`) for the output point, then `x1..xm`.
    pub fn kernel(m: usize) -> Self {
        let names = std::iter::once("x".to_string()).chain((1..=m).map(|j| format!("x{j}")));
        Self::new(names).with_alias("x0", 0)
    }

    pub fn single(name: &str) -> Self {
        Self::new([name])
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .or_else(|| self.aliases.iter().find(|(a, _)| a == name).map(|&(_, s)| s))
    }

    fn name(&self, slot: usize) -> &str {
        &self.names[slot]
    }
}

/// A parsed expression together with the variable table it was parsed against.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression<T> {
    root: Node<T>,
    vars: VarTable,
}

impl<T: Scalar> Expression<T> {
    pub fn parse(text: &str, vars: VarTable) -> Result<Self, ParseError> {
        let tokens = lex(text)?;
        if tokens.is_empty() {
            return Err(ParseError { kind: ParseErrorKind::Empty, offset: 0 });
        }
        let mut parser = Parser { tokens: &tokens, pos: 0, vars: &vars, end: text.len() };
        let root = parser.expr()?;
        if let Some(tok) = parser.peek() {
            return Err(ParseError {
                kind: ParseErrorKind::UnexpectedToken(tok.kind.to_string()),
                offset: tok.offset,
            });
        }
        Ok(Self { root, vars })
    }

    pub fn root(&self) -> &Node<T> {
        &self.root
    }

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    /// Whether slot `slot` appears anywhere in the tree.
    pub fn uses_var(&self, slot: usize) -> bool {
        fn walk<T>(n: &Node<T>, slot: usize) -> bool {
            match n {
                Node::Const(_) => false,
                Node::Var(s) => *s == slot,
                Node::Neg(a) => walk(a, slot),
                Node::Binary(_, a, b) => walk(a, slot) || walk(b, slot),
                Node::Call(_, args) => args.iter().any(|a| walk(a, slot)),
            }
        }
        walk(&self.root, slot)
    }

    pub fn eval(&self, values: &[T]) -> Result<T, EvalError> {
        let v = eval_node(&self.root, values)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Evaluation that maps every failure to NaN, for quadrature integrands.
    pub fn eval_or_nan(&self, values: &[T]) -> T {
        self.eval(values).unwrap_or_else(|_| T::nan())
    }

    /// Converts the constants to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Expression<U> {
        fn walk<T: Scalar, U: Scalar>(n: &Node<T>) -> Node<U> {
            match n {
                Node::Const(c) => Node::Const(U::lit(c.as_f64())),
                Node::Var(s) => Node::Var(*s),
                Node::Neg(a) => Node::Neg(Box::new(walk(a))),
                Node::Binary(op, a, b) => Node::Binary(*op, Box::new(walk(a)), Box::new(walk(b))),
                Node::Call(f, args) => Node::Call(*f, args.iter().map(walk).collect()),
            }
        }
        Expression { root: walk(&self.root), vars: self.vars.clone() }
    }
}

fn eval_node<T: Scalar>(n: &Node<T>, values: &[T]) -> Result<T, EvalError> {
    Ok(match n {
        Node::Const(c) => *c,
        Node::Var(s) => values[*s],
        Node::Neg(a) => -eval_node(a, values)?,
        Node::Binary(op, a, b) => {
            let a = eval_node(a, values)?;
            let b = eval_node(b, values)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == T::zero() {
                        return Err(EvalError::DivisionByZero);
                    }
                    a / b
                }
                BinOp::Pow => {
                    if a == T::zero() && b < T::zero() {
                        return Err(EvalError::DivisionByZero);
                    }
                    a.powf(b)
                }
            }
        }
        Node::Call(f, args) => match f {
            Func::Exp => eval_node(&args[0], values)?.exp(),
            Func::Abs => eval_node(&args[0], values)?.abs(),
            Func::Log => {
                let a = eval_node(&args[0], values)?;
                if a <= T::zero() {
                    return Err(EvalError::LogOfNonPositive);
                }
                a.ln()
            }
            Func::Min | Func::Max => {
                let mut acc = eval_node(&args[0], values)?;
                for a in &args[1..] {
                    let v = eval_node(a, values)?;
                    acc = if *f == Func::Min { acc.min(v) } else { acc.max(v) };
                }
                acc
            }
        },
    })
}

impl<T: Scalar> fmt::Display for Expression<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, &self.vars)
    }
}

fn write_node<T: Scalar>(f: &mut fmt::Formatter<'_>, n: &Node<T>, vars: &VarTable) -> fmt::Result {
    match n {
        Node::Const(c) => write!(f, "{c}"),
        Node::Var(s) => write!(f, "{}", vars.name(*s)),
        Node::Neg(a) => {
            write!(f, "(-")?;
            write_node(f, a, vars)?;
            write!(f, ")")
        }
        Node::Binary(op, a, b) => {
            write!(f, "(")?;
            write_node(f, a, vars)?;
            write!(f, " {} ", op.symbol())?;
            write_node(f, b, vars)?;
            write!(f, ")")
        }
        Node::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_node(f, a, vars)?;
            }
            write!(f, ")")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(String),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Number(s) | TokenKind::Ident(s) => write!(f, "{s}"),
            TokenKind::Op(c) => write!(f, "{c}"),
            TokenKind::LParen => write!(f, "("),
            TokenKind::RParen => write!(f, ")"),
            TokenKind::Comma => write!(f, ","),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let kind = if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            TokenKind::Number(text[start..i].to_string())
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            TokenKind::Ident(text[start..i].to_string())
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => TokenKind::Op(c),
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                ',' => TokenKind::Comma,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or(c);
                    return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(ch), offset: start });
                }
            }
        };
        out.push(Token { kind, offset: start });
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    vars: &'a VarTable,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or(ParseError { kind: ParseErrorKind::UnexpectedEnd, offset: self.end })?;
        self.pos += 1;
        Ok(tok)
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token { kind: TokenKind::Op(c), .. }) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expect(&mut self, want: TokenKind) -> Result<(), ParseError> {
        let tok = self.next()?;
        if tok.kind == want {
            Ok(())
        } else {
            Err(ParseError { kind: ParseErrorKind::UnexpectedToken(tok.kind.to_string()), offset: tok.offset })
        }
    }

    fn expr<T: Scalar>(&mut self) -> Result<Node<T>, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term<T: Scalar>(&mut self) -> Result<Node<T>, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary<T: Scalar>(&mut self) -> Result<Node<T>, ParseError> {
        if self.eat_op(&['-']).is_some() {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power<T: Scalar>(&mut self) -> Result<Node<T>, ParseError> {
        let base = self.atom()?;
        if self.eat_op(&['^']).is_some() {
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom<T: Scalar>(&mut self) -> Result<Node<T>, ParseError> {
        let tok = self.next()?;
        match tok.kind {
            TokenKind::Number(s) => {
                let v: f64 = s.parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::InvalidNumber(s.clone()),
                    offset: tok.offset,
                })?;
                let v = T::lit(v);
                if !v.is_finite() {
                    return Err(ParseError { kind: ParseErrorKind::InvalidNumber(s), offset: tok.offset });
                }
                Ok(Node::Const(v))
            }
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                if matches!(self.peek(), Some(Token { kind: TokenKind::LParen, .. })) {
                    self.pos += 1;
                    let func = Func::from_name(&name).ok_or(ParseError {
                        kind: ParseErrorKind::UnknownFunction(name.clone()),
                        offset: tok.offset,
                    })?;
                    let mut args = vec![self.expr()?];
                    loop {
                        let t = self.next()?;
                        match t.kind {
                            TokenKind::Comma => args.push(self.expr()?),
                            TokenKind::RParen => break,
                            other => {
                                return Err(ParseError {
                                    kind: ParseErrorKind::UnexpectedToken(other.to_string()),
                                    offset: t.offset,
                                })
                            }
                        }
                    }
                    let ok = match func {
                        Func::Min | Func::Max => args.len() >= 2,
                        _ => args.len() == 1,
                    };
                    if !ok {
                        let expected = if matches!(func, Func::Min | Func::Max) { "at least 2" } else { "1" };
                        return Err(ParseError {
                            kind: ParseErrorKind::Arity {
                                name,
                                expected: expected.to_string(),
                                got: args.len(),
                            },
                            offset: tok.offset,
                        });
                    }
                    Ok(Node::Call(func, args))
                } else {
                    self.vars.lookup(&name).map(Node::Var).ok_or(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier(name),
                        offset: tok.offset,
                    })
                }
            }
            other => Err(ParseError { kind: ParseErrorKind::UnexpectedToken(other.to_string()), offset: tok.offset }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2(s: &str) -> Result<Expression<f64>, ParseError> {
        Expression::parse(s, VarTable::kernel(2))
    }

    #[test]
    fn precedence_and_associativity() {
        let e = k2("-x1^2").unwrap();
        assert_eq!(e.eval(&[1.0, 3.0, 0.0]).unwrap(), -9.0);
        let e = k2("2^3^2").unwrap();
        assert_eq!(e.eval(&[0.0; 3]).unwrap(), 512.0);
        let e = k2("1 - 2 - 3").unwrap();
        assert_eq!(e.eval(&[0.0; 3]).unwrap(), -4.0);
        let e = k2("8 / 2 / 2 * 3").unwrap();
        assert_eq!(e.eval(&[0.0; 3]).unwrap(), 6.0);
        let e = k2("x1^-2").unwrap();
        assert_eq!(e.eval(&[0.0, 2.0, 0.0]).unwrap(), 0.25);
        let e = k2("1 + 2 * 3 ^ 2").unwrap();
        assert_eq!(e.eval(&[0.0; 3]).unwrap(), 19.0);
    }

    #[test]
    fn hilbert_reduced_form_at_unit_point() {
        let e = k2("1/(1+x1+x2)^2").unwrap();
        assert!((e.eval(&[1.0, 1.0, 1.0]).unwrap() - 1.0 / 9.0).abs() < 1e-16);
    }

    #[test]
    fn unknown_identifier_reports_offset() {
        let err = k2("1/(1+x1+x7)^2").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("x7".into()));
        assert_eq!(err.offset, 8);
        assert!(err.to_string().contains("unknown identifier x7"));
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(k2("").unwrap_err().kind, ParseErrorKind::Empty);
        assert_eq!(k2("1 +").unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        let err = k2("1 $ 2").unwrap_err();
        assert_eq!((err.kind, err.offset), (ParseErrorKind::UnexpectedChar('$'), 2));
        assert!(matches!(k2("(1 + 2").unwrap_err().kind, ParseErrorKind::UnexpectedEnd));
        assert!(matches!(k2("max(x1)").unwrap_err().kind, ParseErrorKind::Arity { .. }));
        assert!(matches!(k2("exp(1, 2)").unwrap_err().kind, ParseErrorKind::Arity { .. }));
        assert!(matches!(k2("sin(x1)").unwrap_err().kind, ParseErrorKind::UnknownFunction(_)));
        assert!(matches!(k2("1e999").unwrap_err().kind, ParseErrorKind::InvalidNumber(_)));
    }

    #[test]
    fn eval_verdicts() {
        let e = k2("1/(x1 - 1)").unwrap();
        assert_eq!(e.eval(&[1.0, 1.0, 0.0]), Err(EvalError::DivisionByZero));
        let e = k2("log(x1)").unwrap();
        assert_eq!(e.eval(&[1.0, 0.0, 0.0]), Err(EvalError::LogOfNonPositive));
        let e = k2("exp(x1)").unwrap();
        assert_eq!(e.eval(&[1.0, 1000.0, 0.0]), Err(EvalError::NonFinite));
        assert!(e.eval_or_nan(&[1.0, 1000.0, 0.0]).is_nan());
        let e = k2("x0 * x + max(x1, x2, 3) + min(abs(-2), 5)").unwrap();
        assert_eq!(e.eval(&[2.0, 1.0, 7.0]).unwrap(), 4.0 + 7.0 + 2.0);
    }

    const CORPUS: [&str; 22] = [
        "1/(x+x1+x2)^2",
        "1/(1+x1+x2)^2",
        "max(1,x1,x2)^(-3)",
        "-x1^2",
        "x^-2 * exp(-x1 - x2)",
        "log(1 + x1) / (x + x2)^3",
        "abs(x1 - x2) + 0.5",
        "min(x, x1, x2) / max(x, x1, x2)^3",
        "2^3^2",
        "((x1))",
        "1e-3 * x1 + 2.5E+2",
        "-(-(x2))",
        "x1 * x2 / x / x",
        "exp(log(x1 + 1))",
        "(x + x1) ^ (-1) * (x + x2) ^ (-1)",
        "0.1 + 0.2",
        "x0 - x",
        "max(x1, -x2) ^ 2",
        "1 / (x^2 + x1^2 + x2^2)",
        "3 - -x1",
        "1/(x+x1)/(x+x2)",
        "123456789.125 * x2",
    ];

    #[test]
    fn print_parse_round_trip_corpus() {
        for s in CORPUS {
            let a = k2(s).unwrap();
            let printed = a.to_string();
            let b = k2(&printed).unwrap_or_else(|e| panic!("{s} -> {printed}: {e}"));
            assert_eq!(a, b, "{s} -> {printed}");
            assert_eq!(printed, b.to_string());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_node() -> impl Strategy<Value = Node<f64>> {
            let leaf = prop_oneof![
                (0.0f64..1e6).prop_map(Node::Const),
                (0usize..3).prop_map(Node::Var),
            ];
            leaf.prop_recursive(5, 48, 4, |inner| {
                prop_oneof![
                    inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
                    (
                        prop_oneof![
                            Just(BinOp::Add),
                            Just(BinOp::Sub),
                            Just(BinOp::Mul),
                            Just(BinOp::Div),
                            Just(BinOp::Pow)
                        ],
                        inner.clone(),
                        inner.clone()
                    )
                        .prop_map(|(op, a, b)| Node::Binary(op, Box::new(a), Box::new(b))),
                    (prop_oneof![Just(Func::Exp), Just(Func::Log), Just(Func::Abs)], inner.clone())
                        .prop_map(|(f, a)| Node::Call(f, vec![a])),
                    (prop_oneof![Just(Func::Min), Just(Func::Max)], prop::collection::vec(inner, 2..4))
                        .prop_map(|(f, args)| Node::Call(f, args)),
                ]
            })
        }

        proptest! {
            #[test]
            fn printed_trees_reparse_identically(root in arb_node()) {
                let e = Expression { root, vars: VarTable::kernel(2) };
                let back = k2(&e.to_string()).unwrap();
                prop_assert_eq!(back, e);
            }
        }
    }
}
