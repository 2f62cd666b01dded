use super::{Expr, Func};

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

/// Raw derivative tree; callers simplify.
pub(super) fn differentiate(e: &Expr, s: &str) -> Expr {
    if !e.contains_symbol(s) {
        return Expr::Const(0.0);
    }
    match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Sym(name) => Expr::Const(if name == s { 1.0 } else { 0.0 }),
        Expr::Neg(a) => Expr::Neg(b(differentiate(a, s))),
        Expr::Add(xs) => Expr::Add(xs.iter().map(|x| differentiate(x, s)).collect()),
        Expr::Mul(xs) => {
            let terms = (0..xs.len())
                .filter(|&i| xs[i].contains_symbol(s))
                .map(|i| {
                    let factors = xs
                        .iter()
                        .enumerate()
                        .map(|(j, x)| if i == j { differentiate(x, s) } else { x.clone() })
                        .collect();
                    Expr::Mul(factors)
                })
                .collect::<Vec<_>>();
            match terms.len() {
                1 => terms.into_iter().next().unwrap(),
                _ => Expr::Add(terms),
            }
        }
        Expr::Div(num, den) => {
            if !den.contains_symbol(s) {
                return Expr::Div(b(differentiate(num, s)), den.clone());
            }
            // (u'v - uv') / v^2
            Expr::Div(
                b(Expr::Add(vec![
                    Expr::Mul(vec![differentiate(num, s), (**den).clone()]),
                    Expr::Neg(b(Expr::Mul(vec![(**num).clone(), differentiate(den, s)]))),
                ])),
                b(Expr::Pow(den.clone(), b(Expr::Const(2.0)))),
            )
        }
        Expr::Pow(base, exp) => {
            if !exp.contains_symbol(s) {
                // v * u^(v-1) * u'
                let reduced = Expr::Add(vec![(**exp).clone(), Expr::Const(-1.0)]);
                Expr::Mul(vec![
                    (**exp).clone(),
                    Expr::Pow(base.clone(), b(reduced)),
                    differentiate(base, s),
                ])
            } else {
                // u^v * (v' ln u + v u'/u)
                Expr::Mul(vec![
                    e.clone(),
                    Expr::Add(vec![
                        Expr::Mul(vec![differentiate(exp, s), Expr::Call(Func::Log, base.clone())]),
                        Expr::Div(
                            b(Expr::Mul(vec![(**exp).clone(), differentiate(base, s)])),
                            base.clone(),
                        ),
                    ]),
                ])
            }
        }
        Expr::Call(f, a) => {
            let inner = differentiate(a, s);
            let outer = match f {
                Func::Sin => Expr::Call(Func::Cos, a.clone()),
                Func::Cos => Expr::Neg(b(Expr::Call(Func::Sin, a.clone()))),
                Func::Exp => Expr::Call(Func::Exp, a.clone()),
                Func::Log => Expr::Div(b(Expr::Const(1.0)), a.clone()),
                Func::Sqrt => Expr::Div(
                    b(Expr::Const(1.0)),
                    b(Expr::Mul(vec![Expr::Const(2.0), Expr::Call(Func::Sqrt, a.clone())])),
                ),
                Func::Abs => Expr::Call(Func::Sign, a.clone()),
                // piecewise constant
                Func::Sign => return Expr::Const(0.0),
            };
            Expr::Mul(vec![outer, inner])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn shunt_derivative_is_two_v_g() {
        assert_eq!(p("v*v*g").diff("v"), p("2*v*g").simplify());
        assert_eq!(p("g*v*v").diff("v"), p("2*g*v").simplify());
        assert_eq!(p("-b*v*v").diff("v"), p("-2*v*b").simplify());
    }

    #[test]
    fn constant_rule() {
        assert_eq!(p("3.5").diff("x"), Expr::Const(0.0));
        assert_eq!(p("y*z").diff("x"), Expr::Const(0.0));
    }

    #[test]
    fn sin_two_x_against_central_difference() {
        let e = p("sin(2*x)");
        let d = e.diff("x");
        let x0 = 0.3;
        let at = |x: f64| e.eval_scalar(&|_| Some(x)).unwrap();
        let h = 1e-5;
        let fd = (at(x0 + h) - at(x0 - h)) / (2.0 * h);
        let sym = d.eval_scalar(&|_| Some(x0)).unwrap();
        assert!(((sym - fd) / sym).abs() < 1e-7, "{sym} vs {fd}");
    }

    #[test]
    fn abs_derivative_at_zero_is_zero() {
        let d = p("abs(x)").diff("x");
        assert_eq!(d.eval_scalar(&|_| Some(0.0)).unwrap(), 0.0);
        assert_eq!(d.eval_scalar(&|_| Some(-2.0)).unwrap(), -1.0);
    }

    #[test]
    fn pow_with_symbolic_exponent() {
        let e = p("x**y");
        let d = e.diff("y");
        let v = d
            .eval_scalar(&|s| Some(if s == "x" { 2.0 } else { 3.0 }))
            .unwrap();
        assert!((v - 8.0 * 2f64.ln()).abs() < 1e-12);
    }
}
