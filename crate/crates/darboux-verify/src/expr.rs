//! Scalar coordinate expressions for scenario files.
//!
//! Recursive-descent parser and evaluator for the grammar
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := atom ("^" atom)? | "-" factor
//! atom   := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Binary operators are left-associative, unary minus binds tighter
//! than the binary operators but looser than "^" (so -x^2 = -(x^2)),
//! and "^" does not chain without parentheses. Identifiers are either
//! chart coordinates (x1..xn, with x, y, z, w as aliases for the first
//! four) or one of the built-in functions sin, cos, tan, exp, log,
//! sqrt, abs, min, max. Parse failures carry the byte offset and the
//! token set that would have been accepted there.

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn apply(self, args: &[f64]) -> f64 {
        match self {
            Func::Sin => args[0].sin(),
            Func::Cos => args[0].cos(),
            Func::Tan => args[0].tan(),
            Func::Exp => args[0].exp(),
            Func::Log => args[0].ln(),
            Func::Sqrt => args[0].sqrt(),
            Func::Abs => args[0].abs(),
            Func::Min => args[0].min(args[1]),
            Func::Max => args[0].max(args[1]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Parsed expression over a fixed set of chart coordinates.
#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Evaluates at a chart point. Division follows IEEE semantics;
    /// scenario authors keep denominators bounded away from zero on
    /// the chart.
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var(i) => vars[*i],
            Expr::Neg(e) => -e.eval(vars),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(vars), b.eval(vars));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, args) => {
                let vals: Vec<f64> = args.iter().map(|a| a.eval(vars)).collect();
                f.apply(&vals)
            }
        }
    }
}

/// Parses `src` against `dim` chart coordinates named x1..x{dim}.
pub fn parse_expression(src: &str, dim: usize) -> Result<Expr, CliError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, dim };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.fail("end of input or operator"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn fail(&self, expected: &str) -> CliError {
        CliError::Parse { offset: self.pos, expected: expected.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, CliError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, CliError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, CliError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.atom()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, CliError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.fail("\")\""));
                }
                Ok(inner)
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => self.number(),
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => self.ident(),
            _ => Err(self.fail("number, identifier, \"(\", or \"-\"")),
        }
    }

    fn number(&mut self) -> Result<Expr, CliError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self.src.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                while self.src.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // "2e" was the start of an identifier tail, not an exponent.
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Expr::Num).map_err(|_| CliError::Parse {
            offset: start,
            expected: "numeric literal".to_string(),
        })
    }

    fn ident(&mut self) -> Result<Expr, CliError> {
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if let Some(f) = Func::lookup(name) {
            if !self.eat(b'(') {
                return Err(self.fail("\"(\" after function name"));
            }
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            if !self.eat(b')') {
                return Err(self.fail("\",\" or \")\""));
            }
            if args.len() != f.arity() {
                return Err(CliError::Parse {
                    offset: start,
                    expected: format!("{} argument(s) to {name}", f.arity()),
                });
            }
            return Ok(Expr::Call(f, args));
        }
        if let Some(idx) = self.var_index(name) {
            if idx >= self.dim {
                return Err(CliError::Parse {
                    offset: start,
                    expected: format!("coordinate within dimension {}", self.dim),
                });
            }
            return Ok(Expr::Var(idx));
        }
        Err(CliError::Parse {
            offset: start,
            expected: "known coordinate or function name".to_string(),
        })
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        match name {
            "x" => Some(0),
            "y" => Some(1),
            "z" => Some(2),
            "w" => Some(3),
            _ => {
                let rest = name.strip_prefix('x')?;
                let n: usize = rest.parse().ok()?;
                (n >= 1).then_some(n - 1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, vars: &[f64]) -> f64 {
        parse_expression(src, vars.len()).expect("parse").eval(vars)
    }

    #[test]
    fn linear_combination_evaluates() {
        assert_eq!(ev("x + 2*y", &[1.0, 2.0]), 5.0);
    }

    #[test]
    fn function_call_evaluates() {
        let got = ev("sin(x)*y", &[0.5, 2.0]);
        assert!((got - 0.958_851_077_208_406).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("2 + 3*4", &[]), 14.0);
        assert_eq!(ev("2 - 3 - 4", &[]), -5.0);
        assert_eq!(ev("12/3/2", &[]), 2.0);
        assert_eq!(ev("2*3^2", &[]), 18.0);
        assert_eq!(ev("-2^2", &[]), -4.0);
        assert_eq!(ev("(-2)^2", &[]), 4.0);
    }

    #[test]
    fn numeric_literals() {
        assert_eq!(ev("1.5e2", &[]), 150.0);
        assert_eq!(ev(".5 + 2.", &[]), 2.5);
        assert_eq!(ev("1e-3", &[]), 0.001);
    }

    #[test]
    fn coordinate_aliases() {
        assert_eq!(ev("x1 + 10*x2 + 100*z", &[1.0, 2.0, 3.0]), 321.0);
        assert_eq!(ev("min(x, y) + max(x, y)", &[4.0, -1.0]), 3.0);
    }

    #[test]
    fn dangling_operator_reports_offset() {
        match parse_expression("x +", 2) {
            Err(CliError::Parse { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_name_reports_offset() {
        match parse_expression("x + foo", 2) {
            Err(CliError::Parse { offset, expected }) => {
                assert_eq!(offset, 4);
                assert!(expected.contains("coordinate or function"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_dimension_coordinate_rejected() {
        assert!(parse_expression("x3", 2).is_err());
        assert!(parse_expression("x3", 3).is_ok());
    }

    #[test]
    fn arity_mismatch_rejected() {
        assert!(parse_expression("min(x)", 1).is_err());
        assert!(parse_expression("sin(x, y)", 2).is_err());
    }

    #[test]
    fn chained_power_needs_parentheses() {
        assert!(parse_expression("2^3^2", 0).is_err());
        assert_eq!(ev("2^(3^2)", &[]), 512.0);
        assert_eq!(ev("(2^3)^2", &[]), 64.0);
    }

    #[test]
    fn trailing_garbage_rejected() {
        match parse_expression("1 + 2 )", 0) {
            Err(CliError::Parse { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
