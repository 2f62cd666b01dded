//! Vectorized evaluation of expressions.
//!
//! A [`Program`] is a postfix instruction list compiled once per equation.
//! Each instruction operates on whole columns (one value per device), so a
//! single call evaluates an equation for every device of a model.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Expr, ExprError, Func};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Op {
    Const(f64),
    Load(u32),
    Neg,
    Add(u32),
    Mul(u32),
    Div,
    Pow,
    PowInt(i32),
    Call(Func),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    ops: Vec<Op>,
    depth: usize,
    /// Slot ids referenced by this program, for diagnostics.
    slots: Vec<usize>,
}

/// Reusable evaluation buffers.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    bufs: Vec<Vec<f64>>,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pre-size for programs of at most `depth` stack slots over `n` devices.
    pub fn reserve(&mut self, depth: usize, n: usize) {
        if self.bufs.len() < depth {
            self.bufs.resize_with(depth, Vec::new);
        }
        for b in &mut self.bufs[..depth] {
            if b.len() < n {
                b.resize(n, 0.0);
            }
        }
    }
}

#[inline]
pub(crate) fn pow(base: f64, exp: f64) -> f64 {
    if exp.fract() == 0.0 && exp.abs() <= 64.0 {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    }
}

impl Program {
    /// Compile with a resolver mapping symbol names to slot ids.
    pub fn compile(e: &Expr, resolve: &impl Fn(&str) -> Option<usize>) -> Result<Program, ExprError> {
        let mut p = Program { ops: Vec::new(), depth: 0, slots: Vec::new() };
        let mut cur = 0usize;
        p.emit(e, resolve, &mut cur)?;
        p.slots.sort_unstable();
        p.slots.dedup();
        Ok(p)
    }

    fn push_depth(&mut self, cur: &mut usize) {
        *cur += 1;
        self.depth = self.depth.max(*cur);
    }

    fn emit(&mut self, e: &Expr, resolve: &impl Fn(&str) -> Option<usize>, cur: &mut usize) -> Result<(), ExprError> {
        match e {
            Expr::Const(c) => {
                self.ops.push(Op::Const(*c));
                self.push_depth(cur);
            }
            Expr::Sym(s) => {
                let id = resolve(s).ok_or_else(|| ExprError::UnboundSymbol(s.clone()))?;
                self.ops.push(Op::Load(id as u32));
                self.slots.push(id);
                self.push_depth(cur);
            }
            Expr::Neg(a) => {
                self.emit(a, resolve, cur)?;
                self.ops.push(Op::Neg);
            }
            Expr::Add(xs) | Expr::Mul(xs) => {
                for x in xs {
                    self.emit(x, resolve, cur)?;
                }
                let k = xs.len() as u32;
                self.ops.push(if matches!(e, Expr::Add(_)) { Op::Add(k) } else { Op::Mul(k) });
                *cur -= xs.len() - 1;
            }
            Expr::Div(a, b) => {
                self.emit(a, resolve, cur)?;
                self.emit(b, resolve, cur)?;
                self.ops.push(Op::Div);
                *cur -= 1;
            }
            Expr::Pow(a, b) => {
                self.emit(a, resolve, cur)?;
                match **b {
                    Expr::Const(c) if c.fract() == 0.0 && c.abs() <= 64.0 => {
                        self.ops.push(Op::PowInt(c as i32));
                    }
                    _ => {
                        self.emit(b, resolve, cur)?;
                        self.ops.push(Op::Pow);
                        *cur -= 1;
                    }
                }
            }
            Expr::Call(f, a) => {
                self.emit(a, resolve, cur)?;
                self.ops.push(Op::Call(*f));
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    /// Evaluate over `n` devices into `out` (overwritten).
    ///
    /// `load` returns the column for a slot id; columns of length 1
    /// broadcast. Performs no heap allocation when `scratch` is pre-sized.
    pub fn eval_into<'a>(
        &self,
        n: usize,
        load: impl Fn(usize) -> &'a [f64],
        scratch: &mut Scratch,
        out: &mut [f64],
    ) -> Result<(), ExprError> {
        scratch.reserve(self.depth, n);
        let bufs = &mut scratch.bufs;
        let mut sp = 0usize;
        for op in &self.ops {
            match op {
                Op::Const(c) => {
                    bufs[sp][..n].fill(*c);
                    sp += 1;
                }
                Op::Load(id) => {
                    let col = load(*id as usize);
                    let dst = &mut bufs[sp][..n];
                    if col.len() == n {
                        dst.copy_from_slice(col);
                    } else {
                        dst.fill(col[0]);
                    }
                    sp += 1;
                }
                Op::Neg => bufs[sp - 1][..n].iter_mut().for_each(|v| *v = -*v),
                Op::Add(k) | Op::Mul(k) => {
                    let k = *k as usize;
                    let base = sp - k;
                    let (lo, hi) = bufs.split_at_mut(base + 1);
                    let acc = &mut lo[base][..n];
                    let is_add = matches!(op, Op::Add(_));
                    for other in &hi[..k - 1] {
                        if is_add {
                            acc.iter_mut().zip(&other[..n]).for_each(|(a, b)| *a += *b);
                        } else {
                            acc.iter_mut().zip(&other[..n]).for_each(|(a, b)| *a *= *b);
                        }
                    }
                    sp = base + 1;
                }
                Op::Div => {
                    let (lo, hi) = bufs.split_at_mut(sp - 1);
                    let num = &mut lo[sp - 2][..n];
                    let den = &hi[0][..n];
                    for (i, (a, b)) in num.iter_mut().zip(den).enumerate() {
                        if *b == 0.0 {
                            return Err(ExprError::DivisionByZero { element: i });
                        }
                        *a /= *b;
                    }
                    sp -= 1;
                }
                Op::Pow => {
                    let (lo, hi) = bufs.split_at_mut(sp - 1);
                    let base = &mut lo[sp - 2][..n];
                    base.iter_mut().zip(&hi[0][..n]).for_each(|(a, b)| *a = pow(*a, *b));
                    sp -= 1;
                }
                Op::PowInt(k) => bufs[sp - 1][..n].iter_mut().for_each(|v| *v = v.powi(*k)),
                Op::Call(f) => bufs[sp - 1][..n].iter_mut().for_each(|v| *v = f.apply(*v)),
            }
        }
        debug_assert_eq!(sp, 1);
        let result = &bufs[0][..n];
        if let Some(i) = result.iter().position(|v| !v.is_finite()) {
            return Err(ExprError::NonFinite { element: i, symbols: Vec::new() });
        }
        out[..n].copy_from_slice(result);
        Ok(())
    }

    /// Like [`eval_into`](Self::eval_into) but adds the result into `out`.
    pub fn eval_add<'a>(
        &self,
        n: usize,
        load: impl Fn(usize) -> &'a [f64],
        scratch: &mut Scratch,
        out: &mut [f64],
    ) -> Result<(), ExprError> {
        // the last buffer slot past `depth` holds the result
        scratch.reserve(self.depth + 1, n);
        let mut tmp = std::mem::take(&mut scratch.bufs[self.depth]);
        let r = self.eval_into(n, load, scratch, &mut tmp);
        if r.is_ok() {
            out[..n].iter_mut().zip(&tmp[..n]).for_each(|(o, v)| *o += *v);
        }
        scratch.bufs[self.depth] = tmp;
        r
    }
}

/// A named input to [`evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Binding {
    fn as_slice(&self) -> &[f64] {
        match self {
            Binding::Scalar(v) => std::slice::from_ref(v),
            Binding::Vector(v) => v,
        }
    }
}

/// Element-wise evaluation of `e` over `n` devices.
pub fn evaluate(e: &Expr, bindings: &HashMap<String, Binding>, n: usize) -> Result<Vec<f64>, ExprError> {
    let names: Vec<&String> = e.symbols().into_iter().map(|s| bindings.get_key_value(&s).map(|(k, _)| k).ok_or(ExprError::UnboundSymbol(s))).collect::<Result<_, _>>()?;
    for name in &names {
        if let Binding::Vector(v) = &bindings[*name] {
            if v.len() != n && v.len() != 1 {
                return Err(ExprError::LengthMismatch { name: (*name).clone(), expected: n, got: v.len() });
            }
        }
    }
    let program = Program::compile(e, &|s| names.iter().position(|k| k.as_str() == s))?;
    let mut scratch = Scratch::new();
    let mut out = vec![0.0; n];
    if n == 0 {
        return Ok(out);
    }
    program
        .eval_into(n, |id| bindings[names[id]].as_slice(), &mut scratch, &mut out)
        .map_err(|err| match err {
            ExprError::NonFinite { element, .. } => ExprError::NonFinite {
                element,
                symbols: names.iter().map(|s| s.to_string()).collect(),
            },
            other => other,
        })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn vecs(pairs: &[(&str, Vec<f64>)]) -> HashMap<String, Binding> {
        pairs.iter().map(|(k, v)| (k.to_string(), Binding::Vector(v.clone()))).collect()
    }

    #[test]
    fn shunt_jacobian_values() {
        let b = vecs(&[("v", vec![1.0; 3]), ("g", vec![0.001; 3])]);
        let out = evaluate(&p("2*v*g"), &b, 3).unwrap();
        assert_eq!(out, vec![0.002; 3]);
    }

    #[test]
    fn constant_broadcast() {
        assert_eq!(evaluate(&p("5"), &HashMap::new(), 3).unwrap(), vec![5.0; 3]);
        let mut b = HashMap::new();
        b.insert("k".to_string(), Binding::Scalar(2.0));
        b.insert("x".to_string(), Binding::Vector(vec![1.0, 2.0]));
        assert_eq!(evaluate(&p("k*x"), &b, 2).unwrap(), vec![2.0, 4.0]);
    }

    #[test]
    fn algebraic_identity_vanishes() {
        let b = vecs(&[("v", vec![0.3, -1.7, 2.5, 11.0]), ("b", vec![4.0, 0.1, -2.0, 3.3])]);
        let out = evaluate(&p("v**2*b - v*b*v"), &b, 4).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn error_paths() {
        assert_eq!(evaluate(&p("x"), &HashMap::new(), 1), Err(ExprError::UnboundSymbol("x".into())));
        let b = vecs(&[("x", vec![1.0, 2.0])]);
        assert!(matches!(evaluate(&p("x"), &b, 3), Err(ExprError::LengthMismatch { .. })));
        let b = vecs(&[("x", vec![1.0, 0.0])]);
        assert_eq!(evaluate(&p("1/x"), &b, 2), Err(ExprError::DivisionByZero { element: 1 }));
        let b = vecs(&[("x", vec![-1.0])]);
        match evaluate(&p("sqrt(x)"), &b, 1) {
            Err(ExprError::NonFinite { symbols, .. }) => assert_eq!(symbols, vec!["x".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eval_add_accumulates() {
        let e = p("x*2");
        let prog = Program::compile(&e, &|_| Some(0)).unwrap();
        let col = vec![1.0, 2.0];
        let mut out = vec![10.0, 10.0];
        let mut s = Scratch::new();
        prog.eval_add(2, |_| &col, &mut s, &mut out).unwrap();
        assert_eq!(out, vec![12.0, 14.0]);
    }
}
