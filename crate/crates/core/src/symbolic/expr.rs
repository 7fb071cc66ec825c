//! Expression trees over the fixed operator grammar.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnaryOp {
    Pow2,
    Sqrt,
    Sin,
    Cos,
    Exp,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 6] = [
        UnaryOp::Pow2,
        UnaryOp::Sqrt,
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Exp,
        UnaryOp::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Pow2 => "pow2",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Abs => "abs",
        }
    }

    /// Applies the operator; `None` signals a domain error or overflow.
    #[inline]
    pub fn apply<T: Scalar>(self, a: T) -> Option<T> {
        let v = match self {
            UnaryOp::Pow2 => a * a,
            UnaryOp::Sqrt => {
                if a < T::zero() {
                    return None;
                }
                a.sqrt()
            }
            UnaryOp::Sin => a.sin(),
            UnaryOp::Cos => a.cos(),
            UnaryOp::Exp => a.exp(),
            UnaryOp::Abs => a.abs(),
        };
        v.is_finite().then_some(v)
    }
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 4] = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div];

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Div => "div",
        }
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, BinaryOp::Add | BinaryOp::Mul)
    }

    #[inline]
    pub fn apply<T: Scalar>(self, a: T, b: T) -> Option<T> {
        let v = match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b == T::zero() {
                    return None;
                }
                a / b
            }
        };
        v.is_finite().then_some(v)
    }
}

/// Symbolic expression. Variables are referenced by index; index 0 prints as
/// `x`, 1 as `y`, 2 as `z`, higher ones as `x3`, `x4`, ...
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum Expression<T> {
    Var(usize),
    Const(T),
    Unary(UnaryOp, Box<Expression<T>>),
    Binary(BinaryOp, Box<Expression<T>>, Box<Expression<T>>),
}

pub fn var_name(i: usize) -> String {
    match i {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        _ => format!("x{i}"),
    }
}

fn parse_var(name: &str) -> Option<usize> {
    match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        _ => name
            .strip_prefix('x')
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i >= 3),
    }
}

impl<T: Scalar> Expression<T> {
    pub fn var(i: usize) -> Self {
        Expression::Var(i)
    }

    pub fn constant(c: f64) -> Self {
        Expression::Const(T::of(c))
    }

    pub fn unary(op: UnaryOp, a: Self) -> Self {
        Expression::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Self, b: Self) -> Self {
        Expression::Binary(op, Box::new(a), Box::new(b))
    }

    /// Evaluates at `vars`; `None` on a domain error (for example the square
    /// root of a negative number) or a non-finite intermediate.
    pub fn eval(&self, vars: &[T]) -> Option<T> {
        match self {
            Expression::Var(i) => vars.get(*i).copied(),
            Expression::Const(c) => Some(*c),
            Expression::Unary(op, a) => op.apply(a.eval(vars)?),
            Expression::Binary(op, a, b) => op.apply(a.eval(vars)?, b.eval(vars)?),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expression::Var(_) | Expression::Const(_) => 1,
            Expression::Unary(_, a) => 1 + a.node_count(),
            Expression::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expression::Var(_) | Expression::Const(_) => 1,
            Expression::Unary(_, a) => 1 + a.depth(),
            Expression::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Highest variable index referenced plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expression::Var(i) => i + 1,
            Expression::Const(_) => 0,
            Expression::Unary(_, a) => a.arity(),
            Expression::Binary(_, a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn uses_var(&self, i: usize) -> bool {
        match self {
            Expression::Var(j) => *j == i,
            Expression::Const(_) => false,
            Expression::Unary(_, a) => a.uses_var(i),
            Expression::Binary(_, a, b) => a.uses_var(i) || b.uses_var(i),
        }
    }

    /// Constant values in prefix order.
    pub fn constants(&self) -> Vec<T> {
        let mut out = Vec::new();
        self.visit_constants(&mut |c| out.push(c));
        out
    }

    fn visit_constants(&self, f: &mut impl FnMut(T)) {
        match self {
            Expression::Var(_) => {}
            Expression::Const(c) => f(*c),
            Expression::Unary(_, a) => a.visit_constants(f),
            Expression::Binary(_, a, b) => {
                a.visit_constants(f);
                b.visit_constants(f);
            }
        }
    }

    /// Replaces constants in prefix order with `values`.
    pub fn with_constants(&self, values: &[T]) -> Self {
        let mut it = values.iter().copied();
        
        self.map_constants(&mut |c| it.next().unwrap_or(c))
    }

    fn map_constants(&self, f: &mut impl FnMut(T) -> T) -> Self {
        match self {
            Expression::Var(i) => Expression::Var(*i),
            Expression::Const(c) => Expression::Const(f(*c)),
            Expression::Unary(op, a) => Expression::unary(*op, a.map_constants(f)),
            Expression::Binary(op, a, b) => {
                let l = a.map_constants(f);
                let r = b.map_constants(f);
                Expression::binary(*op, l, r)
            }
        }
    }

    /// Replaces the `k`-th constant (prefix order) with `replacement`.
    pub fn replace_constant(&self, k: usize, replacement: &Self) -> Self {
        let mut seen = 0usize;
        self.replace_constant_inner(k, replacement, &mut seen)
    }

    fn replace_constant_inner(&self, k: usize, rep: &Self, seen: &mut usize) -> Self {
        match self {
            Expression::Var(i) => Expression::Var(*i),
            Expression::Const(c) => {
                let here = *seen;
                *seen += 1;
                if here == k {
                    rep.clone()
                } else {
                    Expression::Const(*c)
                }
            }
            Expression::Unary(op, a) => Expression::unary(*op, a.replace_constant_inner(k, rep, seen)),
            Expression::Binary(op, a, b) => {
                let l = a.replace_constant_inner(k, rep, seen);
                let r = b.replace_constant_inner(k, rep, seen);
                Expression::binary(*op, l, r)
            }
        }
    }

    /// Substitutes variable `i` with `replacement` everywhere.
    pub fn substitute(&self, i: usize, replacement: &Self) -> Self {
        match self {
            Expression::Var(j) if *j == i => replacement.clone(),
            Expression::Var(j) => Expression::Var(*j),
            Expression::Const(c) => Expression::Const(*c),
            Expression::Unary(op, a) => Expression::unary(*op, a.substitute(i, replacement)),
            Expression::Binary(op, a, b) => {
                Expression::binary(*op, a.substitute(i, replacement), b.substitute(i, replacement))
            }
        }
    }

    /// Folds every constant-only subtree into a single constant.
    pub fn fold_constants(&self) -> Self {
        match self {
            Expression::Var(_) | Expression::Const(_) => self.clone(),
            Expression::Unary(op, a) => {
                let a = a.fold_constants();
                if let Expression::Const(c) = a {
                    if let Some(v) = op.apply(c) {
                        return Expression::Const(v);
                    }
                }
                Expression::unary(*op, a)
            }
            Expression::Binary(op, a, b) => {
                let (a, b) = (a.fold_constants(), b.fold_constants());
                if let (Expression::Const(x), Expression::Const(y)) = (&a, &b) {
                    if let Some(v) = op.apply(*x, *y) {
                        return Expression::Const(v);
                    }
                }
                Expression::binary(*op, a, b)
            }
        }
    }

    /// Sorts the operands of commutative operators so that structurally
    /// equivalent expressions compare equal. Constants sort last.
    pub fn canonicalize(&self) -> Self {
        match self {
            Expression::Var(_) | Expression::Const(_) => self.clone(),
            Expression::Unary(op, a) => Expression::unary(*op, a.canonicalize()),
            Expression::Binary(op, a, b) => {
                let (a, b) = (a.canonicalize(), b.canonicalize());
                if op.is_commutative() && a.structural_cmp(&b) == Ordering::Greater {
                    Expression::binary(*op, b, a)
                } else {
                    Expression::binary(*op, a, b)
                }
            }
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Expression::Var(_) => 0,
            Expression::Unary(..) => 1,
            Expression::Binary(..) => 2,
            Expression::Const(_) => 3,
        }
    }

    /// Total structural order: variables, then unary, then binary nodes, then
    /// constants; ties broken by operator and children, constants by value.
    pub fn structural_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Expression::Var(a), Expression::Var(b)) => a.cmp(b),
            (Expression::Const(a), Expression::Const(b)) => a.as_f64().total_cmp(&b.as_f64()),
            (Expression::Unary(o1, a), Expression::Unary(o2, b)) => {
                o1.cmp(o2).then_with(|| a.structural_cmp(b))
            }
            (Expression::Binary(o1, a1, b1), Expression::Binary(o2, a2, b2)) => o1
                .cmp(o2)
                .then_with(|| a1.structural_cmp(a2))
                .then_with(|| b1.structural_cmp(b2)),
            _ => self.kind_rank().cmp(&other.kind_rank()),
        }
    }

    /// Canonical prefix string, for example `cos(sqrt(add(pow2(x),pow2(y))))`.
    pub fn to_prefix(&self) -> String {
        let mut s = String::new();
        self.write_prefix(&mut s);
        s
    }

    fn write_prefix(&self, s: &mut String) {
        match self {
            Expression::Var(i) => s.push_str(&var_name(*i)),
            Expression::Const(c) => s.push_str(&format_constant(c.as_f64())),
            Expression::Unary(op, a) => {
                s.push_str(op.name());
                s.push('(');
                a.write_prefix(s);
                s.push(')');
            }
            Expression::Binary(op, a, b) => {
                s.push_str(op.name());
                s.push('(');
                a.write_prefix(s);
                s.push(',');
                b.write_prefix(s);
                s.push(')');
            }
        }
    }

    /// Parses the canonical prefix form produced by [`Expression::to_prefix`].
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::Parse(format!("trailing input at byte {}", p.pos)));
        }
        Ok(e)
    }
}

/// Integers print without a fractional part; other values use the shortest
/// round-trip representation.
pub fn format_constant(c: f64) -> String {
    if c == c.trunc() && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c:?}")
    }
}

impl<T: Scalar> fmt::Display for Expression<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_prefix())
    }
}

impl<T: Scalar> From<Expression<T>> for String {
    fn from(e: Expression<T>) -> String {
        e.to_prefix()
    }
}

impl<T: Scalar> TryFrom<String> for Expression<T> {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Expression::parse(&s)
    }
}

impl<T: Scalar> std::str::FromStr for Expression<T> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Expression::parse(s)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{}' at byte {}", ch as char, self.pos)))
        }
    }

    fn expr<T: Scalar>(&mut self) -> Result<Expression<T>> {
        self.skip_ws();
        let start = self.pos;
        let first = *self
            .src
            .get(start)
            .ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
        if first.is_ascii_digit() || first == b'-' || first == b'+' || first == b'.' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || b"+-.".contains(&self.src[self.pos]))
            {
                self.pos += 1;
            }
            let tok = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad number '{tok}'")))?;
            return Ok(Expression::Const(T::of(v)));
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        if name.is_empty() {
            return Err(Error::Parse(format!("unexpected '{}' at byte {start}", first as char)));
        }
        if let Some(op) = UnaryOp::ALL.iter().find(|o| o.name() == name) {
            self.expect(b'(')?;
            let a = self.expr()?;
            self.expect(b')')?;
            return Ok(Expression::unary(*op, a));
        }
        if let Some(op) = BinaryOp::ALL.iter().find(|o| o.name() == name) {
            self.expect(b'(')?;
            let a = self.expr()?;
            self.expect(b',')?;
            let b = self.expr()?;
            self.expect(b')')?;
            return Ok(Expression::binary(*op, a, b));
        }
        parse_var(name)
            .map(Expression::Var)
            .ok_or_else(|| Error::Parse(format!("unknown symbol '{name}'")))
    }
}
