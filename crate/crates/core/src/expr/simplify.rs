//! Value-preserving normalization: constant folding, flattening, neutral
//! element removal, like-term and like-factor collection, and a canonical
//! ordering of commutative operands.

use super::render::{render, RenderStyle};
use super::Expr;

pub(super) fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Sym(_) => e.clone(),
        Expr::Neg(a) => {
            let (c, rest) = to_term(simplify(a));
            from_term(-c, rest)
        }
        Expr::Add(xs) => build_sum(xs.iter().map(simplify).collect()),
        Expr::Mul(xs) => build_product(xs.iter().map(simplify).collect()),
        Expr::Div(a, b) => build_div(simplify(a), simplify(b)),
        Expr::Pow(a, b) => build_pow(simplify(a), simplify(b)),
        Expr::Call(f, a) => {
            let a = simplify(a);
            if let Expr::Const(c) = a {
                let v = f.apply(c);
                if v.is_finite() {
                    return Expr::Const(v);
                }
            }
            Expr::Call(*f, Box::new(a))
        }
    }
}

fn key(e: &Expr) -> String {
    render(e, RenderStyle::Plain)
}

/// Split into numeric coefficient and symbolic remainder.
fn to_term(e: Expr) -> (f64, Option<Expr>) {
    match e {
        Expr::Const(c) => (c, None),
        Expr::Neg(a) => {
            let (c, rest) = to_term(*a);
            (-c, rest)
        }
        Expr::Mul(mut xs) => {
            if let Some(Expr::Const(c)) = xs.first() {
                let c = *c;
                xs.remove(0);
                let rest = if xs.len() == 1 { xs.pop().unwrap() } else { Expr::Mul(xs) };
                (c, Some(rest))
            } else {
                (1.0, Some(Expr::Mul(xs)))
            }
        }
        other => (1.0, Some(other)),
    }
}

fn from_term(c: f64, rest: Option<Expr>) -> Expr {
    match rest {
        None => Expr::Const(c),
        Some(_) if c == 0.0 => Expr::Const(0.0),
        Some(r) if c == 1.0 => r,
        Some(r) if c == -1.0 => Expr::Neg(Box::new(r)),
        Some(Expr::Mul(xs)) => {
            let mut v = Vec::with_capacity(xs.len() + 1);
            v.push(Expr::Const(c));
            v.extend(xs);
            Expr::Mul(v)
        }
        Some(r) => Expr::Mul(vec![Expr::Const(c), r]),
    }
}

fn build_sum(terms: Vec<Expr>) -> Expr {
    let mut flat = Vec::new();
    for t in terms {
        match t {
            Expr::Add(xs) => flat.extend(xs),
            other => flat.push(other),
        }
    }
    let mut constant = 0.0;
    let mut collected: Vec<(String, f64, Expr)> = Vec::new();
    for t in flat {
        let (c, rest) = to_term(t);
        match rest {
            None => constant += c,
            Some(r) => {
                let k = key(&r);
                if let Some(slot) = collected.iter_mut().find(|(kk, _, _)| *kk == k) {
                    slot.1 += c;
                } else {
                    collected.push((k, c, r));
                }
            }
        }
    }
    collected.retain(|(_, c, _)| *c != 0.0);
    collected.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<Expr> = collected.into_iter().map(|(_, c, r)| from_term(c, Some(r))).collect();
    if constant != 0.0 {
        out.push(Expr::Const(constant));
    }
    match out.len() {
        0 => Expr::Const(0.0),
        1 => out.pop().unwrap(),
        _ => Expr::Add(out),
    }
}

fn push_factor(f: Expr, coef: &mut f64, out: &mut Vec<Expr>) {
    match f {
        Expr::Const(c) => *coef *= c,
        Expr::Neg(a) => {
            *coef = -*coef;
            push_factor(*a, coef, out);
        }
        Expr::Mul(xs) => xs.into_iter().for_each(|x| push_factor(x, coef, out)),
        other => out.push(other),
    }
}

fn build_product(factors: Vec<Expr>) -> Expr {
    let mut coef = 1.0;
    let mut flat = Vec::new();
    for f in factors {
        push_factor(f, &mut coef, &mut flat);
    }
    if coef == 0.0 {
        return Expr::Const(0.0);
    }
    // merge like bases with constant exponents
    let mut bases: Vec<(String, Expr, f64)> = Vec::new();
    let mut others: Vec<(String, Expr)> = Vec::new();
    for f in flat {
        let (base, exp) = match f {
            Expr::Pow(b, e) => match *e {
                Expr::Const(c) => (*b, c),
                e => {
                    let whole = Expr::Pow(b, Box::new(e));
                    others.push((key(&whole), whole));
                    continue;
                }
            },
            other => (other, 1.0),
        };
        let k = key(&base);
        if let Some(slot) = bases.iter_mut().find(|(kk, _, _)| *kk == k) {
            slot.2 += exp;
        } else {
            bases.push((k, base, exp));
        }
    }
    let mut items: Vec<(String, Expr)> = others;
    for (_, base, exp) in bases {
        let e = build_pow(base, Expr::Const(exp));
        match e {
            Expr::Const(c) => coef *= c,
            other => items.push((key(&other), other)),
        }
    }
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let mut items: Vec<Expr> = items.into_iter().map(|(_, e)| e).collect();
    match items.len() {
        0 => Expr::Const(coef),
        1 => from_term(coef, items.pop()),
        _ => from_term(coef, Some(Expr::Mul(items))),
    }
}

fn build_div(num: Expr, den: Expr) -> Expr {
    if den.is_one() {
        return num;
    }
    if let Expr::Const(d) = den {
        if d != 0.0 {
            if let Expr::Const(n) = num {
                return Expr::Const(n / d);
            }
        }
    }
    if num.is_zero() && !den.is_zero() {
        return Expr::Const(0.0);
    }
    let (c, rest) = to_term(num);
    match rest {
        Some(r) if c != 1.0 => from_term(c, Some(Expr::Div(Box::new(r), Box::new(den)))),
        Some(r) => Expr::Div(Box::new(r), Box::new(den)),
        None => Expr::Div(Box::new(Expr::Const(c)), Box::new(den)),
    }
}

fn build_pow(base: Expr, exp: Expr) -> Expr {
    if exp.is_zero() {
        return Expr::Const(1.0);
    }
    if exp.is_one() {
        return base;
    }
    if base.is_one() {
        return Expr::Const(1.0);
    }
    if let (Expr::Const(a), Expr::Const(b)) = (&base, &exp) {
        let v = super::program::pow(*a, *b);
        if v.is_finite() {
            return Expr::Const(v);
        }
    }
    if let (Expr::Const(a), Expr::Const(b)) = (&base, &exp) {
        if *a == 0.0 && *b > 0.0 {
            return Expr::Const(0.0);
        }
    }
    Expr::Pow(Box::new(base), Box::new(exp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn annihilator() {
        assert_eq!(simplify(&p("0*2*v*b + 0")), Expr::Const(0.0));
    }

    #[test]
    fn identity_factor() {
        assert_eq!(simplify(&p("1*(2*v*g)")), simplify(&p("2*v*g")));
        assert_eq!(simplify(&p("1*(2*v*g)")), p("2*g*v"));
    }

    #[test]
    fn folds_constants() {
        assert_eq!(simplify(&p("(3+4)*x")), p("7*x"));
        assert_eq!(simplify(&p("x**1")), p("x"));
        assert_eq!(simplify(&p("x**0")), p("1"));
        assert_eq!(simplify(&p("--x")), p("x"));
        assert_eq!(simplify(&p("x + 0")), p("x"));
    }

    #[test]
    fn collects_like_terms() {
        assert_eq!(simplify(&p("v*g + g*v")), p("2*g*v"));
        assert_eq!(simplify(&p("v**2*b - v*b*v")), Expr::Const(0.0));
    }
}
