//! Sparse Jacobian pattern, built once, and allocation-free refills.

use super::system::{Scope, System};
use super::{NumericError, Result};
use crate::expr::Scratch;
use crate::linalg::Csc;
use crate::symbolic::{JacBlock, VarKind};

const BLOCKS: [JacBlock; 4] = [JacBlock::Fx, JacBlock::Fy, JacBlock::Gx, JacBlock::Gy];

#[derive(Debug, Clone)]
struct ModelPositions {
    model: usize,
    /// Per block, per triplet: value index of every device's entry.
    slots: [Vec<Vec<usize>>; 4],
}

/// The four Jacobian blocks over a fixed pattern.
#[derive(Debug, Clone)]
pub struct JacobianStore {
    pub fx: Csc,
    pub fy: Csc,
    pub gx: Csc,
    pub gy: Csc,
    scope: Scope,
    positions: Vec<ModelPositions>,
    /// (block, value index, epsilon) added on every fill.
    diag: Vec<(usize, usize, f64)>,
    buf: Vec<f64>,
    scratch: Scratch,
}

fn global(sys: &System, m: usize, kind: VarKind, local: usize, d: usize) -> usize {
    let c = &sys.models[m].model;
    let var = match kind {
        VarKind::State => c.states[local],
        VarKind::Algeb => c.algebs[local],
    };
    sys.models[m].addr[var][d]
}

impl JacobianStore {
    /// Union of all triplet positions over the devices in scope.
    pub fn build(sys: &System, scope: Scope) -> Result<Self> {
        if !sys.is_ready() {
            return Err(NumericError::NotSetUp);
        }
        let (nx, ny) = match scope {
            Scope::Full => (sys.dae.n_x(), sys.dae.n_y()),
            Scope::PowerFlow => (0, sys.n_pf_algeb()),
        };
        let kinds = |b: JacBlock| match b {
            JacBlock::Fx => (VarKind::State, VarKind::State),
            JacBlock::Fy => (VarKind::State, VarKind::Algeb),
            JacBlock::Gx => (VarKind::Algeb, VarKind::State),
            JacBlock::Gy => (VarKind::Algeb, VarKind::Algeb),
        };
        let mut pos: [Vec<(usize, usize)>; 4] = Default::default();
        let mut diag_pos = Vec::new();
        let mut max_n = 0;
        let mut depth = 0;
        for (m, md) in sys.models.iter().enumerate() {
            if md.n() == 0 || !sys.in_scope(m, scope) {
                continue;
            }
            max_n = max_n.max(md.n());
            let c = &md.model;
            for (b, block) in BLOCKS.iter().enumerate() {
                let (rk, ck) = kinds(*block);
                for t in c.jac.block(*block) {
                    depth = depth.max(t.program.depth());
                    for d in 0..md.n() {
                        pos[b].push((global(sys, m, rk, t.row, d), global(sys, m, ck, t.col, d)));
                    }
                }
            }
            for (k, v) in c.vars.iter().enumerate() {
                if v.spec.diag_eps != 0.0 {
                    let b = if v.kind() == VarKind::State { 0 } else { 3 };
                    for &a in &md.addr[k] {
                        pos[b].push((a, a));
                        diag_pos.push((b, a, v.spec.diag_eps));
                    }
                }
            }
        }
        let shape = |b: usize| match b {
            0 => (nx, nx),
            1 => (nx, ny),
            2 => (ny, nx),
            _ => (ny, ny),
        };
        let mut mats: Vec<Csc> = Vec::with_capacity(4);
        for (b, p) in pos.iter().enumerate() {
            let (r, c) = shape(b);
            mats.push(Csc::pattern(r, c, p.iter().copied()).expect("positions lie inside the scope"));
        }

        let mut positions = Vec::new();
        for (m, md) in sys.models.iter().enumerate() {
            if md.n() == 0 || !sys.in_scope(m, scope) {
                continue;
            }
            let c = &md.model;
            let mut slots: [Vec<Vec<usize>>; 4] = Default::default();
            for (b, block) in BLOCKS.iter().enumerate() {
                let (rk, ck) = kinds(*block);
                for t in c.jac.block(*block) {
                    let s = (0..md.n())
                        .map(|d| {
                            let (r, col) = (global(sys, m, rk, t.row, d), global(sys, m, ck, t.col, d));
                            mats[b].slot(r, col).expect("position registered in pattern")
                        })
                        .collect();
                    slots[b].push(s);
                }
            }
            positions.push(ModelPositions { model: m, slots });
        }
        let diag = diag_pos.into_iter().map(|(b, a, eps)| (b, mats[b].slot(a, a).unwrap(), eps)).collect();
        let mut scratch = Scratch::new();
        scratch.reserve(depth + 1, max_n);
        let gy = mats.pop().unwrap();
        let gx = mats.pop().unwrap();
        let fy = mats.pop().unwrap();
        let fx = mats.pop().unwrap();
        Ok(JacobianStore { fx, fy, gx, gy, scope, positions, diag, buf: vec![0.0; max_n], scratch })
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    fn block_mut(&mut self, b: usize) -> &mut Csc {
        match b {
            0 => &mut self.fx,
            1 => &mut self.fy,
            2 => &mut self.gx,
            _ => &mut self.gy,
        }
    }

    /// Reset values and add every triplet at its precomputed positions.
    ///
    /// Reads the variable values and flags left by the latest
    /// [`System::eval_equations`]. Does not allocate.
    pub fn fill(&mut self, sys: &System) -> Result<()> {
        for b in 0..4 {
            self.block_mut(b).zeroize();
        }
        for k in 0..self.diag.len() {
            let (b, s, eps) = self.diag[k];
            self.block_mut(b).values_mut()[s] += eps;
        }
        let JacobianStore { fx, fy, gx, gy, positions, buf, scratch, .. } = self;
        let mats = [fx, fy, gx, gy];
        for mp in positions.iter() {
            let md = &sys.models[mp.model];
            let n = md.n();
            let c = &md.model;
            for (b, block) in BLOCKS.iter().enumerate() {
                for (t, slots) in c.jac.block(*block).iter().zip(&mp.slots[b]) {
                    t.program
                        .eval_into(n, |s| md.column(&sys.dae.x, &sys.dae.y, s), scratch, &mut buf[..n])
                        .map_err(|e| sys.eval_error(mp.model, t.value.to_string().as_str(), e))?;
                    let vals = mats[b].values_mut();
                    for (&s, &v) in slots.iter().zip(&buf[..n]) {
                        vals[s] += v;
                    }
                }
            }
        }
        Ok(())
    }
}
