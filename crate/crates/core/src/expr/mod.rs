//! Expression language for equation strings.
//!
//! Equation strings such as `"g*v*v"` or `"T2/T3*(LG_y-LL_x)+LL_x-LL_y"` are
//! parsed into [`Expr`] trees, differentiated symbolically, simplified, and
//! compiled into vectorized [`Program`]s that evaluate one residual for every
//! device of a model in a single call.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ ("**" | "^") unary ] ;
//! primary = number | ident | ident "(" expr ")" | "(" expr ")" ;
//! ident   = [A-Za-z_][A-Za-z0-9_]* ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```

mod diff;
mod parse;
mod program;
mod render;
mod simplify;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use program::{evaluate, Binding, Program, Scratch};
pub use render::{default_tex_name, render, render_latex, RenderStyle};
pub(crate) use render::fmt_number;

/// Elementary functions accepted in equation strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    /// Sign function with `sign(0) = 0`; appears as the derivative of `abs`.
    Sign,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            _ => return None,
        })
    }

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
            Func::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Immutable expression tree.
///
/// `Add` and `Mul` are n-ary with at least two children. Subtraction is
/// represented as addition of a `Neg` term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Sym(String),
    Neg(Box<Expr>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("symbol `{name}` has length {got}, expected {expected} or 1")]
    LengthMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("division by zero at element {element}")]
    DivisionByZero { element: usize },
    #[error("non-finite result at element {element} (symbols: {})", symbols.join(", "))]
    NonFinite { element: usize, symbols: Vec<String> },
}

impl Expr {
    pub fn sym(name: impl Into<String>) -> Expr {
        Expr::Sym(name.into())
    }

    pub fn num(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Parse an equation string.
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        parse::parse(text)
    }

    /// Exact partial derivative with respect to `symbol`, simplified.
    pub fn diff(&self, symbol: &str) -> Expr {
        simplify::simplify(&diff::differentiate(self, symbol))
    }

    /// Partial derivative without simplification.
    pub fn diff_raw(&self, symbol: &str) -> Expr {
        diff::differentiate(self, symbol)
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    /// All symbol names appearing in the tree, sorted.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_symbols(&mut |s| {
            out.insert(s.to_string());
        });
        out
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        let mut found = false;
        self.visit_symbols(&mut |s| found |= s == name);
        found
    }

    fn visit_symbols(&self, f: &mut impl FnMut(&str)) {
        match self {
            Expr::Const(_) => {}
            Expr::Sym(s) => f(s),
            Expr::Neg(a) | Expr::Call(_, a) => a.visit_symbols(f),
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.visit_symbols(f)),
            Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.visit_symbols(f);
                b.visit_symbols(f);
            }
        }
    }

    /// Rename symbols; names absent from `renames` are kept.
    pub fn substitute_symbols<S: AsRef<str>>(&self, renames: &HashMap<String, S>) -> Expr {
        self.map_symbols(&mut |s| renames.get(s).map(|t| Expr::Sym(t.as_ref().to_string())))
    }

    /// Replace symbols with whole expressions (simultaneous substitution).
    pub fn substitute(&self, replacements: &BTreeMap<String, Expr>) -> Expr {
        self.map_symbols(&mut |s| replacements.get(s).cloned())
    }

    fn map_symbols(&self, f: &mut impl FnMut(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Sym(s) => f(s).unwrap_or_else(|| Expr::Sym(s.clone())),
            Expr::Neg(a) => Expr::Neg(Box::new(a.map_symbols(f))),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.map_symbols(f)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.map_symbols(f)).collect()),
            Expr::Div(a, b) => Expr::Div(Box::new(a.map_symbols(f)), Box::new(b.map_symbols(f))),
            Expr::Pow(a, b) => Expr::Pow(Box::new(a.map_symbols(f)), Box::new(b.map_symbols(f))),
            Expr::Call(func, a) => Expr::Call(*func, Box::new(a.map_symbols(f))),
        }
    }

    /// Scalar evaluation with a lookup closure; used by oracles and tests.
    pub fn eval_scalar(&self, lookup: &impl Fn(&str) -> Option<f64>) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Sym(s) => lookup(s).ok_or_else(|| ExprError::UnboundSymbol(s.clone()))?,
            Expr::Neg(a) => -a.eval_scalar(lookup)?,
            Expr::Add(xs) => {
                let mut acc = 0.0;
                for x in xs {
                    acc += x.eval_scalar(lookup)?;
                }
                acc
            }
            Expr::Mul(xs) => {
                let mut acc = 1.0;
                for x in xs {
                    acc *= x.eval_scalar(lookup)?;
                }
                acc
            }
            Expr::Div(a, b) => {
                let den = b.eval_scalar(lookup)?;
                if den == 0.0 {
                    return Err(ExprError::DivisionByZero { element: 0 });
                }
                a.eval_scalar(lookup)? / den
            }
            Expr::Pow(a, b) => program::pow(a.eval_scalar(lookup)?, b.eval_scalar(lookup)?),
            Expr::Call(f, a) => f.apply(a.eval_scalar(lookup)?),
        })
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Sym(_) => 0,
            Expr::Neg(a) | Expr::Call(_, a) => a.size(),
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().map(Expr::size).sum(),
            Expr::Div(a, b) | Expr::Pow(a, b) => a.size() + b.size(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, RenderStyle::Plain))
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

/// Returns true if `name` is a valid identifier.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn substitute_block_placeholders() {
        let e = p("(K*u - y)/T");
        let renames: HashMap<String, &str> =
            [("u".to_string(), "GA_y"), ("y".to_string(), "LG_y")].into_iter().collect();
        assert_eq!(e.substitute_symbols(&renames), p("(K*GA_y - LG_y)/T"));
    }

    #[test]
    fn substitute_empty_map_is_identity() {
        let renames: HashMap<String, String> = HashMap::new();
        assert_eq!(p("x").substitute_symbols(&renames), p("x"));
    }

    #[test]
    fn substitute_inside_calls() {
        let renames: HashMap<String, &str> = [("u".to_string(), "w")].into_iter().collect();
        assert_eq!(p("sin(u)+u").substitute_symbols(&renames), p("sin(w)+w"));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let mut map = BTreeMap::new();
        map.insert("T1".to_string(), Expr::sym("T2"));
        map.insert("T2".to_string(), Expr::sym("T3"));
        assert_eq!(p("T1/T2").substitute(&map), p("T2/T3"));
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("LG_y"));
        assert!(is_identifier("_a1"));
        assert!(!is_identifier("1a"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("a-b"));
    }

    #[test]
    fn sign_at_zero_is_zero() {
        assert_eq!(Func::Sign.apply(0.0), 0.0);
        assert_eq!(Func::Sign.apply(-3.0), -1.0);
    }
}
