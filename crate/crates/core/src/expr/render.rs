use std::collections::HashMap;

use super::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderStyle {
    Plain,
    Latex,
}

// Binding strength of each node kind.
const SUM: u8 = 1;
const PROD: u8 = 2;
const UNARY: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if c.is_sign_negative() => UNARY,
        Expr::Const(_) | Expr::Sym(_) | Expr::Call(..) => ATOM,
        Expr::Neg(_) => UNARY,
        Expr::Add(_) => SUM,
        Expr::Mul(_) | Expr::Div(..) => PROD,
        Expr::Pow(..) => POW,
    }
}

pub(crate) fn fmt_number(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        if c == 0.0 && c.is_sign_negative() {
            return "-0".into();
        }
        format!("{}", c as i64)
    } else {
        format!("{c:?}")
    }
}

/// Render an expression. Plain output re-parses to a structurally equal tree.
pub fn render(e: &Expr, style: RenderStyle) -> String {
    match style {
        RenderStyle::Plain => {
            let mut out = String::new();
            plain(e, &mut out);
            out
        }
        RenderStyle::Latex => render_latex(e, &HashMap::new()),
    }
}

fn plain_child(e: &Expr, paren: bool, out: &mut String) {
    if paren {
        out.push('(');
        plain(e, out);
        out.push(')');
    } else {
        plain(e, out);
    }
}

fn plain(e: &Expr, out: &mut String) {
    match e {
        Expr::Const(c) => out.push_str(&fmt_number(*c)),
        Expr::Sym(s) => out.push_str(s),
        Expr::Neg(a) => {
            out.push('-');
            let paren = prec(a) < UNARY || matches!(**a, Expr::Const(c) if !c.is_sign_negative());
            plain_child(a, paren, out);
        }
        Expr::Add(terms) => {
            for (i, t) in terms.iter().enumerate() {
                if i == 0 {
                    plain_child(t, prec(t) <= SUM, out);
                    continue;
                }
                match t {
                    Expr::Neg(inner) => {
                        out.push_str(" - ");
                        plain_child(inner, prec(inner) <= SUM, out);
                    }
                    _ => {
                        out.push_str(" + ");
                        plain_child(t, prec(t) <= SUM, out);
                    }
                }
            }
        }
        Expr::Mul(factors) => {
            for (i, f) in factors.iter().enumerate() {
                if i == 0 {
                    let paren = prec(f) < PROD || matches!(f, Expr::Mul(_));
                    plain_child(f, paren, out);
                } else {
                    out.push('*');
                    plain_child(f, prec(f) <= PROD, out);
                }
            }
        }
        Expr::Div(a, b) => {
            plain_child(a, prec(a) <= SUM, out);
            out.push('/');
            plain_child(b, prec(b) <= PROD, out);
        }
        Expr::Pow(a, b) => {
            plain_child(a, prec(a) <= POW, out);
            out.push_str("**");
            plain_child(b, prec(b) < UNARY, out);
        }
        Expr::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            plain(a, out);
            out.push(')');
        }
    }
}

/// Default LaTeX name for a symbol: `LG_y` -> `LG_{y}`, `T1` -> `T_{1}`.
pub fn default_tex_name(name: &str) -> String {
    if let Some((head, tail)) = name.split_once('_') {
        if !head.is_empty() && !tail.is_empty() {
            return format!("{}_{{{}}}", head, tail.replace('_', ","));
        }
    }
    let split = name.find(|c: char| c.is_ascii_digit());
    match split {
        Some(i) if i > 0 && name[i..].chars().all(|c| c.is_ascii_digit()) => {
            format!("{}_{{{}}}", &name[..i], &name[i..])
        }
        _ => name.to_string(),
    }
}

/// LaTeX rendering with optional symbol name overrides.
///
/// Products are displayed with the numeric coefficient first, repeated
/// factors merged into powers, and higher powers ahead of plain factors.
pub fn render_latex(e: &Expr, tex_names: &HashMap<String, String>) -> String {
    let mut out = String::new();
    latex(e, tex_names, &mut out);
    out
}

fn latex_child(e: &Expr, paren: bool, names: &HashMap<String, String>, out: &mut String) {
    if paren {
        out.push_str("\\left(");
        latex(e, names, out);
        out.push_str("\\right)");
    } else {
        latex(e, names, out);
    }
}

fn flatten_add<'a>(e: &'a Expr, out: &mut Vec<(bool, &'a Expr)>, negated: bool) {
    match e {
        Expr::Add(xs) => xs.iter().for_each(|x| flatten_add(x, out, negated)),
        Expr::Neg(a) => flatten_add(a, out, !negated),
        other => out.push((negated, other)),
    }
}

fn latex(e: &Expr, names: &HashMap<String, String>, out: &mut String) {
    match e {
        Expr::Const(c) => out.push_str(&fmt_number(*c)),
        Expr::Sym(s) => match names.get(s) {
            Some(t) => out.push_str(t),
            None => out.push_str(&default_tex_name(s)),
        },
        Expr::Neg(_) | Expr::Add(_) => {
            let mut terms = Vec::new();
            flatten_add(e, &mut terms, false);
            for (i, (neg, t)) in terms.iter().enumerate() {
                let (neg, t) = match t {
                    Expr::Const(c) if *c < 0.0 => (!neg, Expr::Const(-c)),
                    Expr::Mul(xs) if matches!(xs.first(), Some(Expr::Const(c)) if *c < 0.0) => {
                        let mut ys = xs.clone();
                        ys[0] = Expr::Const(-ys[0].as_const().unwrap());
                        (!neg, Expr::Mul(ys))
                    }
                    _ => (*neg, (*t).clone()),
                };
                if i == 0 {
                    if neg {
                        out.push_str("- ");
                    }
                } else {
                    out.push_str(if neg { " - " } else { " + " });
                }
                latex_child(&t, false, names, out);
            }
        }
        Expr::Mul(factors) => latex_product(factors, names, out),
        Expr::Div(a, b) => {
            out.push_str("\\frac{");
            latex(a, names, out);
            out.push_str("}{");
            latex(b, names, out);
            out.push('}');
        }
        Expr::Pow(a, b) => {
            let paren = prec(a) <= POW;
            latex_child(a, paren, names, out);
            out.push_str("^{");
            latex(b, names, out);
            out.push('}');
        }
        Expr::Call(f, a) => {
            if *f == super::Func::Sqrt {
                out.push_str("\\sqrt{");
                latex(a, names, out);
                out.push('}');
                return;
            }
            let name = match f {
                super::Func::Abs => {
                    out.push_str("\\left|");
                    latex(a, names, out);
                    out.push_str("\\right|");
                    return;
                }
                super::Func::Sign => "\\operatorname{sign}".to_string(),
                other => format!("\\{}", other.name()),
            };
            out.push_str(&name);
            out.push_str("\\left(");
            latex(a, names, out);
            out.push_str("\\right)");
        }
    }
}

fn latex_product(factors: &[Expr], names: &HashMap<String, String>, out: &mut String) {
    let mut coef = 1.0;
    let mut negate = false;
    // (base, exponent count) in first-appearance order
    let mut merged: Vec<(&Expr, usize)> = Vec::new();
    for f in factors {
        match f {
            Expr::Const(c) => coef *= c,
            Expr::Neg(inner) => {
                negate = !negate;
                merged_push(&mut merged, inner);
            }
            other => merged_push(&mut merged, other),
        }
    }
    if negate {
        coef = -coef;
    }
    // stable sort: higher repeat counts first
    merged.sort_by(|a, b| b.1.cmp(&a.1));
    let mut parts: Vec<String> = Vec::new();
    if coef == -1.0 && !merged.is_empty() {
        out.push_str("- ");
    } else if coef != 1.0 || merged.is_empty() {
        parts.push(fmt_number(coef));
    }
    for (base, count) in merged {
        let mut s = String::new();
        if count > 1 {
            latex_child(base, prec(base) <= POW, names, &mut s);
            s.push_str(&format!("^{{{count}}}"));
        } else {
            latex_child(base, prec(base) <= SUM, names, &mut s);
        }
        parts.push(s);
    }
    out.push_str(&parts.join(" "));
}

fn merged_push<'a>(merged: &mut Vec<(&'a Expr, usize)>, e: &'a Expr) {
    if let Some(slot) = merged.iter_mut().find(|(b, _)| *b == e) {
        slot.1 += 1;
    } else {
        merged.push((e, 1));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    #[test]
    fn plain_round_trip_examples() {
        for s in [
            "T2/T3*(LG_y - LL_x) + LL_x - LL_y",
            "x",
            "-(2)",
            "--2",
            "-2**2",
            "(-2)**x",
            "a*(b*c)",
            "(a*b)*c",
            "a/(b/c)",
            "a - (b + c)",
            "(a + b) + c",
            "x**-y",
            "a*-b",
            "sin(u) + u",
            "-x + y",
            "1.5e-7*x",
            "(a**b)**c",
        ] {
            let e = p(s);
            let r = render(&e, RenderStyle::Plain);
            assert_eq!(p(&r), e, "{s} -> {r}");
        }
    }

    #[test]
    fn symbol_renders_bare() {
        assert_eq!(render(&p("x"), RenderStyle::Plain), "x");
    }

    #[test]
    fn canonical_power_operator() {
        assert_eq!(render(&p("x^2"), RenderStyle::Plain), "x**2");
    }

    #[test]
    fn latex_fraction() {
        assert_eq!(render(&p("(a)/(b)"), RenderStyle::Latex), "\\frac{a}{b}");
        assert_eq!(render(&p("g*v*v"), RenderStyle::Latex), "v^{2} g");
        assert_eq!(render(&p("-b*v*v"), RenderStyle::Latex), "- v^{2} b");
    }

    #[test]
    fn tex_names() {
        assert_eq!(default_tex_name("LG_y"), "LG_{y}");
        assert_eq!(default_tex_name("T1"), "T_{1}");
        assert_eq!(default_tex_name("omega"), "omega");
    }
}
