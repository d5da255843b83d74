//! Minimal arithmetic grammar for closed-form filter, potential, and
//! weight expressions in config files: `+ - * / ^`, the functions `exp`,
//! `tanh`, `sech`, `sqrt`, `theta`, `abs`, the constant `pi`, and one
//! named free variable.

use anyhow::{bail, Result};

#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy)]
pub enum Func {
    Exp,
    Tanh,
    Sech,
    Sqrt,
    Theta,
    Abs,
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Neg(a) => -a.eval(x),
            Expr::Call(f, a) => {
                let v = a.eval(x);
                match f {
                    Func::Exp => v.exp(),
                    Func::Tanh => v.tanh(),
                    Func::Sech => 1.0 / v.cosh(),
                    Func::Sqrt => v.sqrt(),
                    // Closed band edges: theta(0) = 1.
                    Func::Theta => {
                        if v >= 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    Func::Abs => v.abs(),
                }
            }
        }
    }
}

/// Parse `text` as an expression in the single variable `var`.
pub fn parse(text: &str, var: &str) -> Result<Expr> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        var,
        text,
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        bail!("unexpected trailing input in expression `{text}`");
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // Scientific notation: 1e-3, 2.5E+4.
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token::Num(s.parse().map_err(|_| {
                anyhow::anyhow!("malformed number `{s}` in expression")
            })?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            bail!("unexpected character `{c}` in expression `{text}`");
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    var: &'a str,
    text: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, ops: &str) -> Option<char> {
        if let Some(Token::Op(c)) = self.peek() {
            if ops.contains(*c) {
                let c = *c;
                self.pos += 1;
                return Some(c);
            }
        }
        None
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op("+-") {
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op("*/") {
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_op("-").is_some() {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_op("^").is_some() {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                let func = match name.as_str() {
                    "exp" => Some(Func::Exp),
                    "tanh" => Some(Func::Tanh),
                    "sech" => Some(Func::Sech),
                    "sqrt" => Some(Func::Sqrt),
                    "theta" => Some(Func::Theta),
                    "abs" => Some(Func::Abs),
                    _ => None,
                };
                if let Some(f) = func {
                    if self.eat_op("(").is_none() {
                        bail!("function `{name}` needs parentheses in `{}`", self.text);
                    }
                    let arg = self.expr()?;
                    if self.eat_op(")").is_none() {
                        bail!("missing `)` after `{name}(...` in `{}`", self.text);
                    }
                    Ok(Expr::Call(f, Box::new(arg)))
                } else if name == "pi" {
                    Ok(Expr::Num(std::f64::consts::PI))
                } else if name == self.var {
                    Ok(Expr::Var)
                } else {
                    bail!(
                        "unknown identifier `{name}` in `{}` (variable here is `{}`)",
                        self.text,
                        self.var
                    );
                }
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.eat_op(")").is_none() {
                    bail!("missing `)` in expression `{}`", self.text);
                }
                Ok(e)
            }
            _ => bail!("expected a value in expression `{}`", self.text),
        }
    }
}
