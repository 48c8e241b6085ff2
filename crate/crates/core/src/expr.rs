//! A small arithmetic expression language for kernels, delay curves, forcing
//! branches and exact solutions.
//!
//! Expressions are built from the variables `r`, `v`, `mu`, numeric literals,
//! `+ - * / ^` (with `^` right-associative and binding tighter than unary
//! minus, so `-2^2 == -4`), parentheses and the unary functions `sin`, `cos`,
//! `exp`, `log`, `abs`, `sqrt`.

use std::fmt;

use thiserror::Error;

/// Variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    R,
    V,
    Mu,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::R => "r",
            Var::V => "v",
            Var::Mu => "mu",
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "abs" => Some(Func::Abs),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

/// Parsed expression tree. Every node records the byte offset it started at
/// so evaluation errors can point back into the source text.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Num { value: f64, span: usize },
    Var { var: Var, span: usize },
    Neg { operand: Box<ExprAst>, span: usize },
    Bin { op: BinOp, lhs: Box<ExprAst>, rhs: Box<ExprAst>, span: usize },
    Call { func: Func, arg: Box<ExprAst>, span: usize },
}

/// Variable bindings for evaluation. Unbound variables referenced by the
/// expression are reported as errors.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings {
    pub r: Option<f64>,
    pub v: Option<f64>,
    pub mu: Option<f64>,
}

impl Bindings {
    pub fn rv(r: f64, v: f64) -> Self {
        Bindings { r: Some(r), v: Some(v), mu: None }
    }

    pub fn v(v: f64) -> Self {
        Bindings { r: None, v: Some(v), mu: None }
    }

    pub fn vmu(v: f64, mu: f64) -> Self {
        Bindings { r: None, v: Some(v), mu: Some(mu) }
    }

    fn get(&self, var: Var) -> Option<f64> {
        match var {
            Var::R => self.r,
            Var::V => self.v,
            Var::Mu => self.mu,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("`{name}` takes exactly one parenthesized argument (at byte {offset})")]
    WrongArity { name: String, offset: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("variable `{}` is unbound (expression byte {span})", var.name())]
    Unbound { var: Var, span: usize },
    #[error("division by zero at expression byte {span}")]
    DivByZero { span: usize },
    #[error("log of non-positive value {arg} at expression byte {span}")]
    LogNonPositive { arg: f64, span: usize },
    #[error("sqrt of negative value {arg} at expression byte {span}")]
    SqrtNegative { arg: f64, span: usize },
    #[error("{base}^{exponent} is undefined at expression byte {span}")]
    PowDomain { base: f64, exponent: f64, span: usize },
    #[error("non-finite result at expression byte {span}")]
    NonFinite { span: usize },
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let start = self.pos;
            match c {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.pos += 1;
                }
                b'+' => {
                    out.push((Tok::Plus, start));
                    self.pos += 1;
                }
                b'-' => {
                    out.push((Tok::Minus, start));
                    self.pos += 1;
                }
                b'*' => {
                    out.push((Tok::Star, start));
                    self.pos += 1;
                }
                b'/' => {
                    out.push((Tok::Slash, start));
                    self.pos += 1;
                }
                b'^' => {
                    out.push((Tok::Caret, start));
                    self.pos += 1;
                }
                b'(' => {
                    out.push((Tok::LParen, start));
                    self.pos += 1;
                }
                b')' => {
                    out.push((Tok::RParen, start));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'.' => {
                    out.push((self.number(start)?, start));
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    out.push((Tok::Ident(name.to_string()), start));
                }
                other => {
                    return Err(ExprError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", other as char),
                    });
                }
            }
        }
        Ok(out)
    }

    fn number(&mut self, start: usize) -> Result<Tok, ExprError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // `e` belonged to something else; back off
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Tok::Num).map_err(|_| ExprError::Syntax {
            offset: start,
            message: format!("invalid number literal `{text}`"),
        })
    }
}

// ---------------------------------------------------------------------------
// Parser (recursive descent)
// ---------------------------------------------------------------------------
//
// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/') unary)*
// unary  := '-' unary | power
// power  := atom ('^' unary)?            (right-associative)
// atom   := number | var | func '(' expr ')' | '(' expr ')'

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn offset(&self) -> usize {
        self.peek().map(|(_, o)| *o).unwrap_or(self.len)
    }

    fn expr(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.term()?;
        while let Some((tok, span)) = self.peek().cloned() {
            let op = match tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = ExprAst::Bin { op, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.unary()?;
        while let Some((tok, span)) = self.peek().cloned() {
            let op = match tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = ExprAst::Bin { op, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExprAst, ExprError> {
        if let Some((Tok::Minus, span)) = self.peek().cloned() {
            self.bump();
            let operand = self.unary()?;
            return Ok(ExprAst::Neg { operand: Box::new(operand), span });
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst, ExprError> {
        let base = self.atom()?;
        if let Some((Tok::Caret, span)) = self.peek().cloned() {
            self.bump();
            // right-associative; exponent may carry its own unary minus
            let exponent = self.unary()?;
            return Ok(ExprAst::Bin {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exponent),
                span,
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst, ExprError> {
        match self.bump() {
            Some((Tok::Num(value), span)) => Ok(ExprAst::Num { value, span }),
            Some((Tok::Ident(name), span)) => match name.as_str() {
                "r" => Ok(ExprAst::Var { var: Var::R, span }),
                "v" => Ok(ExprAst::Var { var: Var::V, span }),
                "mu" => Ok(ExprAst::Var { var: Var::Mu, span }),
                other => {
                    if let Some(func) = Func::from_name(other) {
                        match self.peek() {
                            Some((Tok::LParen, _)) => {
                                self.bump();
                                let arg = self.expr()?;
                                match self.bump() {
                                    Some((Tok::RParen, _)) => {
                                        Ok(ExprAst::Call { func, arg: Box::new(arg), span })
                                    }
                                    _ => Err(ExprError::Syntax {
                                        offset: self.offset(),
                                        message: "expected `)`".to_string(),
                                    }),
                                }
                            }
                            _ => Err(ExprError::WrongArity { name: name.clone(), offset: span }),
                        }
                    } else {
                        Err(ExprError::UnknownIdentifier { name: name.clone(), offset: span })
                    }
                }
            },
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    _ => Err(ExprError::Syntax {
                        offset: self.offset(),
                        message: "expected `)`".to_string(),
                    }),
                }
            }
            Some((tok, span)) => Err(ExprError::Syntax {
                offset: span,
                message: format!("unexpected token {tok:?}"),
            }),
            None => Err(ExprError::Syntax {
                offset: self.len,
                message: "unexpected end of input".to_string(),
            }),
        }
    }
}

/// Parse an expression from source text.
pub fn parse(src: &str) -> Result<ExprAst, ExprError> {
    let toks = Lexer::new(src).tokens()?;
    let mut parser = Parser { toks, pos: 0, len: src.len() };
    let ast = parser.expr()?;
    if let Some((tok, span)) = parser.peek() {
        return Err(ExprError::Syntax {
            offset: *span,
            message: format!("trailing input starting with {tok:?}"),
        });
    }
    Ok(ast)
}

impl ExprAst {
    /// Evaluate with the given bindings. IEEE double arithmetic, deterministic
    /// node order; domain violations carry the offending node's byte offset.
    pub fn eval(&self, bindings: &Bindings) -> Result<f64, EvalError> {
        match self {
            ExprAst::Num { value, .. } => Ok(*value),
            ExprAst::Var { var, span } => {
                bindings.get(*var).ok_or(EvalError::Unbound { var: *var, span: *span })
            }
            ExprAst::Neg { operand, .. } => Ok(-operand.eval(bindings)?),
            ExprAst::Bin { op, lhs, rhs, span } => {
                let a = lhs.eval(bindings)?;
                let b = rhs.eval(bindings)?;
                let out = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivByZero { span: *span });
                        }
                        a / b
                    }
                    BinOp::Pow => pow(a, b, *span)?,
                };
                if out.is_finite() {
                    Ok(out)
                } else {
                    Err(EvalError::NonFinite { span: *span })
                }
            }
            ExprAst::Call { func, arg, span } => {
                let x = arg.eval(bindings)?;
                let out = match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::LogNonPositive { arg: x, span: *span });
                        }
                        x.ln()
                    }
                    Func::Abs => x.abs(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::SqrtNegative { arg: x, span: *span });
                        }
                        x.sqrt()
                    }
                };
                if out.is_finite() {
                    Ok(out)
                } else {
                    Err(EvalError::NonFinite { span: *span })
                }
            }
        }
    }

    /// Set of variables the expression references.
    pub fn variables(&self) -> Vec<Var> {
        let mut vars = Vec::new();
        self.collect_vars(&mut vars);
        vars
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            ExprAst::Num { .. } => {}
            ExprAst::Var { var, .. } => {
                if !out.contains(var) {
                    out.push(*var);
                }
            }
            ExprAst::Neg { operand, .. } => operand.collect_vars(out),
            ExprAst::Bin { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            ExprAst::Call { arg, .. } => arg.collect_vars(out),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ExprAst::Num { .. } | ExprAst::Var { .. } | ExprAst::Call { .. } => 4,
            ExprAst::Bin { op: BinOp::Pow, .. } => 3,
            ExprAst::Neg { .. } => 2,
            ExprAst::Bin { op: BinOp::Mul | BinOp::Div, .. } => 1,
            ExprAst::Bin { op: BinOp::Add | BinOp::Sub, .. } => 0,
        }
    }
}

/// Integer exponents use `powi`; fractional exponents with a negative base
/// (or `0^negative`) are domain errors.
fn pow(base: f64, exponent: f64, span: usize) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err(EvalError::PowDomain { base, exponent, span });
        }
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return Err(EvalError::PowDomain { base, exponent, span });
    }
    Ok(base.powf(exponent))
}

impl fmt::Display for ExprAst {
    /// Minimal-parenthesis form that reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, child: &ExprAst, wrap: bool) -> fmt::Result {
            if wrap {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        }
        match self {
            ExprAst::Num { value, .. } => write!(f, "{value}"),
            ExprAst::Var { var, .. } => write!(f, "{}", var.name()),
            ExprAst::Neg { operand, .. } => {
                write!(f, "-")?;
                paren(f, operand, operand.precedence() < 2)
            }
            ExprAst::Bin { op, lhs, rhs, .. } => {
                let (sym, prec) = match op {
                    BinOp::Add => ("+", 0),
                    BinOp::Sub => ("-", 0),
                    BinOp::Mul => ("*", 1),
                    BinOp::Div => ("/", 1),
                    BinOp::Pow => ("^", 3),
                };
                if *op == BinOp::Pow {
                    // right-associative; left operand must be an atom
                    paren(f, lhs, lhs.precedence() < 4)?;
                    write!(f, "^")?;
                    paren(f, rhs, rhs.precedence() < 2)
                } else {
                    // left-associative chains print without parens on the left
                    paren(f, lhs, lhs.precedence() < prec)?;
                    write!(f, "{sym}")?;
                    paren(f, rhs, rhs.precedence() <= prec)
                }
            }
            ExprAst::Call { func, arg, .. } => write!(f, "{}({arg})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_str(src: &str, b: Bindings) -> f64 {
        parse(src).unwrap().eval(&b).unwrap()
    }

    #[test]
    fn basic_arithmetic() {
        assert_eq!(eval_str("1+v-r", Bindings { r: Some(0.5), v: Some(2.0), mu: None }), 2.5);
        assert_eq!(eval_str("v^3", Bindings::v(2.0)), 8.0);
        assert_eq!(eval_str("v-1", Bindings::v(1.0)), 0.0);
        assert_eq!(eval_str("r-v", Bindings::rv(0.2, 0.5)), -0.3);
    }

    #[test]
    fn example1_upper_branch() {
        // upper branch of the closed-form solution, evaluated by substitution
        assert_eq!(eval_str("(2-mu)*v^2", Bindings::vmu(2.0, 0.5)), 6.0);
    }

    #[test]
    fn precedence_fixtures() {
        let none = Bindings::default();
        assert_eq!(parse("2+3*4").unwrap().eval(&none).unwrap(), 14.0);
        assert_eq!(parse("2^3^2").unwrap().eval(&none).unwrap(), 512.0);
        assert_eq!(parse("-2^2").unwrap().eval(&none).unwrap(), -4.0);
        assert_eq!(parse("2^-2").unwrap().eval(&none).unwrap(), 0.25);
    }

    #[test]
    fn division_by_zero() {
        let err = parse("1/0").unwrap().eval(&Bindings::default()).unwrap_err();
        assert!(matches!(err, EvalError::DivByZero { .. }));
    }

    #[test]
    fn unbound_variable() {
        let err = parse("v-1").unwrap().eval(&Bindings::default()).unwrap_err();
        assert!(matches!(err, EvalError::Unbound { var: Var::V, .. }));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            parse("log(0-1)").unwrap().eval(&Bindings::default()),
            Err(EvalError::LogNonPositive { .. })
        ));
        assert!(matches!(
            parse("sqrt(0-4)").unwrap().eval(&Bindings::default()),
            Err(EvalError::SqrtNegative { .. })
        ));
        assert!(matches!(
            parse("(0-2)^0.5").unwrap().eval(&Bindings::default()),
            Err(EvalError::PowDomain { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse("1 + * 2") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse("1 + q") {
            Err(ExprError::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "q");
                assert_eq!(offset, 4);
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
        match parse("sin + 1") {
            Err(ExprError::WrongArity { name, .. }) => assert_eq!(name, "sin"),
            other => panic!("expected arity error, got {other:?}"),
        }
    }

    #[test]
    fn functions_evaluate() {
        assert_eq!(eval_str("abs(0-3)", Bindings::default()), 3.0);
        assert_eq!(eval_str("sqrt(9)", Bindings::default()), 3.0);
        assert!((eval_str("sin(0)", Bindings::default())).abs() < 1e-15);
        assert!((eval_str("log(exp(1))", Bindings::default()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn display_reparses() {
        for src in ["1+v-r", "(2-mu)*v^2", "-2^2", "2^3^2", "v/3", "1-(v-r)*2", "sin(v)*cos(r)"] {
            let ast = parse(src).unwrap();
            let printed = ast.to_string();
            let reparsed = parse(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
            let b = Bindings { r: Some(0.37), v: Some(1.21), mu: Some(0.5) };
            assert_eq!(ast.eval(&b).unwrap(), reparsed.eval(&b).unwrap(), "{src} vs {printed}");
        }
    }
}
