//! Small arithmetic expression language for user-supplied maps.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | var | func '(' expr (',' expr)? ')' | '(' expr ')'
//! ```
//!
//! Variables are `x0`, `x1`, ...; `x` and `t` alias `x0`, `y` is `x1`, `z` is
//! `x2`. Functions: `exp`, `log`, `sqrt`, `pow(a, b)`. Constants: `e`, `pi`.

use std::fmt;

use crate::dynamics::{DelayMap, ScalarMap1D};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Exp(Box<Node>),
    Log(Box<Node>),
    Sqrt(Box<Node>),
}

/// A parsed expression; parse once, evaluate many times.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expr { root })
    }

    /// One more than the highest variable index used (0 for constants).
    pub fn arity(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Num(_) => 0,
                Node::Var(i) => i + 1,
                Node::Neg(a) | Node::Exp(a) | Node::Log(a) | Node::Sqrt(a) => walk(a),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                    walk(a).max(walk(b))
                }
            }
        }
        walk(&self.root)
    }

    /// Evaluates with `vars[i]` bound to `x{i}`. Missing variables read as NaN.
    pub fn eval<T: Real>(&self, vars: &[T]) -> T {
        eval_node(&self.root, vars)
    }

    /// Symbolic partial derivative with respect to `x{var}`.
    pub fn derivative(&self, var: usize) -> Expr {
        Expr { root: simplify(diff(&self.root, var)) }
    }

    /// `F_0` with `k` arguments, newest first.
    pub fn into_delay_map<T: Real>(self, k: usize) -> Result<DelayMap<T>> {
        if self.arity() > k {
            return Err(Error::InvalidInput(format!(
                "expression uses x{} but the map has only {k} arguments",
                self.arity() - 1
            )));
        }
        DelayMap::new(k, move |args: &[T]| self.eval(args))
    }

    /// A function of `x0` with its symbolic derivative attached.
    pub fn into_scalar_map<T: Real>(self) -> Result<ScalarMap1D<T>> {
        if self.arity() > 1 {
            return Err(Error::InvalidInput("a one-variable function may only use x (x0, t)".into()));
        }
        let d = self.derivative(0);
        Ok(ScalarMap1D::new(move |x: T| self.eval(&[x])).with_derivative(move |x: T| d.eval(&[x])))
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

fn eval_node<T: Real>(n: &Node, v: &[T]) -> T {
    match n {
        Node::Num(c) => T::lit(*c),
        Node::Var(i) => v.get(*i).copied().unwrap_or_else(T::nan),
        Node::Neg(a) => -eval_node(a, v),
        Node::Add(a, b) => eval_node(a, v) + eval_node(b, v),
        Node::Sub(a, b) => eval_node(a, v) - eval_node(b, v),
        Node::Mul(a, b) => eval_node(a, v) * eval_node(b, v),
        Node::Div(a, b) => eval_node(a, v) / eval_node(b, v),
        Node::Pow(a, b) => match **b {
            Node::Num(c) if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 => eval_node(a, v).powi(c as i32),
            _ => eval_node(a, v).powf(eval_node(b, v)),
        },
        Node::Exp(a) => eval_node(a, v).exp(),
        Node::Log(a) => eval_node(a, v).ln(),
        Node::Sqrt(a) => eval_node(a, v).sqrt(),
    }
}

fn b(n: Node) -> Box<Node> {
    Box::new(n)
}

fn diff(n: &Node, x: usize) -> Node {
    use Node::*;
    match n {
        Num(_) => Num(0.0),
        Var(i) => Num(if *i == x { 1.0 } else { 0.0 }),
        Neg(a) => Neg(b(diff(a, x))),
        Add(p, q) => Add(b(diff(p, x)), b(diff(q, x))),
        Sub(p, q) => Sub(b(diff(p, x)), b(diff(q, x))),
        Mul(p, q) => Add(b(Mul(b(diff(p, x)), q.clone())), b(Mul(p.clone(), b(diff(q, x))))),
        Div(p, q) => Div(
            b(Sub(b(Mul(b(diff(p, x)), q.clone())), b(Mul(p.clone(), b(diff(q, x)))))),
            b(Pow(q.clone(), b(Num(2.0)))),
        ),
        Pow(p, q) => match **q {
            Num(c) => Mul(b(Mul(b(Num(c)), b(Pow(p.clone(), b(Num(c - 1.0)))))), b(diff(p, x))),
            // d(p^q) = p^q (q' ln p + q p'/p)
            _ => Mul(
                b(n.clone()),
                b(Add(b(Mul(b(diff(q, x)), b(Log(p.clone())))), b(Div(b(Mul(q.clone(), b(diff(p, x)))), p.clone())))),
            ),
        },
        Exp(a) => Mul(b(n.clone()), b(diff(a, x))),
        Log(a) => Div(b(diff(a, x)), a.clone()),
        Sqrt(a) => Div(b(diff(a, x)), b(Mul(b(Num(2.0)), b(n.clone())))),
    }
}

/// Folds the zeros and ones that differentiation leaves behind.
fn simplify(n: Node) -> Node {
    use Node::*;
    match n {
        Neg(a) => match simplify(*a) {
            Num(c) => Num(-c),
            a => Neg(b(a)),
        },
        Add(p, q) => match (simplify(*p), simplify(*q)) {
            (Num(a), Num(c)) => Num(a + c),
            (Num(z), e) | (e, Num(z)) if z == 0.0 => e,
            (p, q) => Add(b(p), b(q)),
        },
        Sub(p, q) => match (simplify(*p), simplify(*q)) {
            (Num(a), Num(c)) => Num(a - c),
            (e, Num(z)) if z == 0.0 => e,
            (Num(z), e) if z == 0.0 => Neg(b(e)),
            (p, q) => Sub(b(p), b(q)),
        },
        Mul(p, q) => match (simplify(*p), simplify(*q)) {
            (Num(a), Num(c)) => Num(a * c),
            (Num(z), _) | (_, Num(z)) if z == 0.0 => Num(0.0),
            (Num(o), e) | (e, Num(o)) if o == 1.0 => e,
            (p, q) => Mul(b(p), b(q)),
        },
        Div(p, q) => match (simplify(*p), simplify(*q)) {
            (Num(z), _) if z == 0.0 => Num(0.0),
            (e, Num(o)) if o == 1.0 => e,
            (p, q) => Div(b(p), b(q)),
        },
        Pow(p, q) => match (simplify(*p), simplify(*q)) {
            (_, Num(z)) if z == 0.0 => Num(1.0),
            (e, Num(o)) if o == 1.0 => e,
            (p, q) => Pow(b(p), b(q)),
        },
        Exp(a) => Exp(b(simplify(*a))),
        Log(a) => Log(b(simplify(*a))),
        Sqrt(a) => Sqrt(b(simplify(*a))),
        leaf => leaf,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(n: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match n {
                Node::Num(c) => write!(f, "{c}"),
                Node::Var(i) => write!(f, "x{i}"),
                Node::Neg(a) => {
                    write!(f, "(-")?;
                    go(a, f)?;
                    write!(f, ")")
                }
                Node::Add(a, c) | Node::Sub(a, c) | Node::Mul(a, c) | Node::Div(a, c) | Node::Pow(a, c) => {
                    let op = match n {
                        Node::Add(..) => "+",
                        Node::Sub(..) => "-",
                        Node::Mul(..) => "*",
                        Node::Div(..) => "/",
                        _ => "^",
                    };
                    write!(f, "(")?;
                    go(a, f)?;
                    write!(f, " {op} ")?;
                    go(c, f)?;
                    write!(f, ")")
                }
                Node::Exp(a) | Node::Log(a) | Node::Sqrt(a) => {
                    let name = match n {
                        Node::Exp(_) => "exp",
                        Node::Log(_) => "log",
                        _ => "sqrt",
                    };
                    write!(f, "{name}(")?;
                    go(a, f)?;
                    write!(f, ")")
                }
            }
        }
        go(&self.root, f)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(b(lhs), b(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(b(lhs), b(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(b(lhs), b(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(b(lhs), b(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            return Ok(Node::Neg(b(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat(b'^') {
            // Right associative, and binds tighter than a leading minus on the right.
            return Ok(Node::Pow(b(base), b(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Node::Num).map_err(|_| Error::Parse { pos: start, msg: format!("bad number '{text}'") })
    }

    fn ident(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let func = |p: &mut Self, f: fn(Box<Node>) -> Node| -> Result<Node> {
            p.expect(b'(')?;
            let a = p.expr()?;
            p.expect(b')')?;
            Ok(f(b(a)))
        };
        match name {
            "exp" => func(self, Node::Exp),
            "log" | "ln" => func(self, Node::Log),
            "sqrt" => func(self, Node::Sqrt),
            "pow" => {
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b',')?;
                let c = self.expr()?;
                self.expect(b')')?;
                Ok(Node::Pow(b(a), b(c)))
            }
            "x" | "t" => Ok(Node::Var(0)),
            "y" => Ok(Node::Var(1)),
            "z" => Ok(Node::Var(2)),
            "e" => Ok(Node::Num(std::f64::consts::E)),
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            _ => match name.strip_prefix('x').map(str::parse::<usize>) {
                Some(Ok(i)) => Ok(Node::Var(i)),
                _ => Err(Error::Parse { pos: start, msg: format!("unknown identifier '{name}'") }),
            },
        }
    }
}
