use std::collections::HashMap;

use proptest::prelude::*;
use symdae::expr::{evaluate, render, Binding, Expr, RenderStyle};
use symdae::io::{self, BuildOptions, CaseFile};
use symdae::linalg::{csc_from_triplets, damping_ratio, dense_eigenvalues, sparse_lu_solve, Csc, DenseMatrix};
use symdae::models;
use symdae::numeric::{Scope, System};
use symdae::routines::*;
use symdae::symbolic::{compile_model, ModelCache, SlotKind, VarKind};

const SYMS: [&str; 3] = ["a", "b", "c"];

/// Random smooth expression text over a, b, c; denominators and logs are
/// kept away from zero so derivatives exist everywhere.
fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        prop::sample::select(SYMS.to_vec()).prop_map(str::to_string),
        (1u32..20).prop_map(|k| format!("{}", f64::from(k) / 4.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("({l} + {r})")),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("({l} - {r})")),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("({l} * {r})")),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| format!("({l} / (1.5 + {r}**2))")),
            (inner.clone(), 2u32..4).prop_map(|(l, k)| format!("({l})**{k}")),
            inner.clone().prop_map(|e| format!("-({e})")),
            inner.clone().prop_map(|e| format!("sin({e})")),
            inner.clone().prop_map(|e| format!("cos({e})")),
            inner.clone().prop_map(|e| format!("exp(sin({e}))")),
            inner.clone().prop_map(|e| format!("sqrt(2 + cos({e}))")),
            inner.prop_map(|e| format!("log(3 + sin({e}))")),
        ]
    })
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5]
}

fn eval_at(e: &Expr, p: &[f64; 3]) -> f64 {
    let b: HashMap<String, Binding> = SYMS.iter().zip(p).map(|(s, v)| (s.to_string(), Binding::Scalar(*v))).collect();
    evaluate(e, &b, 1).unwrap()[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn render_parse_round_trip(text in smooth_expr()) {
        let e = Expr::parse(&text).unwrap();
        let s = e.simplify();
        prop_assert_eq!(&Expr::parse(&render(&s, RenderStyle::Plain)).unwrap(), &s);
        prop_assert_eq!(&Expr::parse(&render(&e, RenderStyle::Plain)).unwrap().simplify(), &s);
    }

    #[test]
    fn derivative_matches_central_difference(text in smooth_expr(), p in point(), k in 0usize..3) {
        let e = Expr::parse(&text).unwrap();
        let d = e.diff(SYMS[k]);
        let sym = eval_at(&d, &p);
        let h = 1e-5;
        let (mut hi, mut lo) = (p, p);
        hi[k] += h;
        lo[k] -= h;
        let fd = (eval_at(&e, &hi) - eval_at(&e, &lo)) / (2.0 * h);
        prop_assert!((sym - fd).abs() / sym.abs().max(1.0) < 1e-6, "{} d/d{}: {} vs {}", text, SYMS[k], sym, fd);
    }

    #[test]
    fn simplify_preserves_value(text in smooth_expr(), p in point()) {
        let e = Expr::parse(&text).unwrap();
        let (a, b) = (eval_at(&e, &p), eval_at(&e.simplify(), &p));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn differentiation_is_linear_and_obeys_product_rule(f in smooth_expr(), g in smooth_expr(), p in point()) {
        let (f, g) = (Expr::parse(&f).unwrap(), Expr::parse(&g).unwrap());
        let sum = Expr::Add(vec![f.clone(), g.clone()]).diff("a");
        let parts = Expr::Add(vec![f.diff("a"), g.diff("a")]);
        prop_assert!((eval_at(&sum, &p) - eval_at(&parts, &p)).abs() <= 1e-9 * eval_at(&parts, &p).abs().max(1.0));
        let prod = Expr::Mul(vec![f.clone(), g.clone()]).diff("a");
        let rule = Expr::Add(vec![
            Expr::Mul(vec![f.diff("a"), g.clone()]),
            Expr::Mul(vec![f.clone(), g.diff("a")]),
        ])
        .simplify();
        let (x, y) = (eval_at(&prod, &p), eval_at(&rule, &p));
        prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        if f.diff("a").is_zero() && g.diff("a").is_zero() {
            prop_assert!(prod.is_zero());
        }
    }
}

// symbolic

/// Dense local Jacobian of a model's residual programs by central differences.
fn fd_local_jacobian(c: &symdae::symbolic::CompiledModel, vals: &HashMap<String, f64>, row_kind: VarKind, col_kind: VarKind) -> Vec<(usize, usize, f64)> {
    let rows: Vec<_> = c.vars.iter().filter(|v| v.kind() == row_kind).collect();
    let cols: Vec<_> = c.vars.iter().filter(|v| v.kind() == col_kind).collect();
    let eval = |e: &Expr, vals: &HashMap<String, f64>| e.eval_scalar(&|s| vals.get(s).copied()).unwrap();
    let mut out = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let Some(e) = &r.e else { continue };
        for (j, col) in cols.iter().enumerate() {
            let h = 1e-6;
            let mut hi = vals.clone();
            let mut lo = vals.clone();
            *hi.get_mut(col.name()).unwrap() += h;
            *lo.get_mut(col.name()).unwrap() -= h;
            let d = (eval(e, &hi) - eval(e, &lo)) / (2.0 * h);
            if d != 0.0 {
                out.push((i, j, d));
            }
        }
    }
    out
}

#[test]
fn compile_is_deterministic() {
    for s in models::builtin_schemas() {
        let (a, b) = (compile_model(&s).unwrap(), compile_model(&s).unwrap());
        assert_eq!(a.jac, b.jac, "{}", s.name);
        assert_eq!(a.schema_hash, b.schema_hash);
    }
}

#[test]
fn declaration_order_gives_local_index() {
    for s in models::builtin_schemas() {
        let c = compile_model(&s).unwrap();
        let declared: Vec<&str> = s.vars().map(|v| v.name.as_str()).collect();
        let compiled: Vec<&str> = c.vars.iter().map(|v| v.name()).collect();
        assert_eq!(declared, compiled);
        let (mut ns, mut na) = (0, 0);
        for v in &c.vars {
            let k = match v.kind() {
                VarKind::State => &mut ns,
                VarKind::Algeb => &mut na,
            };
            assert_eq!(v.local, *k, "{}.{}", c.name, v.name());
            *k += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn triplets_match_finite_differences(seed in prop::collection::vec(0.3f64..1.7, 64)) {
        for s in models::builtin_schemas().into_iter().chain([models::tgov1_blocks()]) {
            let c = compile_model(&s).unwrap();
            let mut vals = HashMap::new();
            for (k, slot) in c.slots.iter().enumerate() {
                let v = match slot.kind {
                    SlotKind::Flag => 1.0,
                    _ => seed[k % seed.len()],
                };
                vals.insert(slot.name.clone(), v);
            }
            let kinds = [(VarKind::State, VarKind::State, &c.jac.fx), (VarKind::State, VarKind::Algeb, &c.jac.fy),
                         (VarKind::Algeb, VarKind::State, &c.jac.gx), (VarKind::Algeb, VarKind::Algeb, &c.jac.gy)];
            for (rk, ck, block) in kinds {
                let mut sym: HashMap<(usize, usize), f64> = HashMap::new();
                for t in block.iter() {
                    *sym.entry((t.row, t.col)).or_default() += t.value.eval_scalar(&|n| vals.get(n).copied()).unwrap();
                }
                let fd = fd_local_jacobian(&c, &vals, rk, ck);
                for (r, col, d) in &fd {
                    let a = sym.get(&(*r, *col)).copied().unwrap_or(0.0);
                    prop_assert!((a - d).abs() / a.abs().max(1.0) < 1e-6, "{} ({},{}) {} vs {}", c.name, r, col, a, d);
                }
                for ((r, col), a) in &sym {
                    let d = fd.iter().find(|e| (e.0, e.1) == (*r, *col)).map_or(0.0, |e| e.2);
                    prop_assert!((a - d).abs() / a.abs().max(1.0) < 1e-6, "{} ({},{}) {} vs {}", c.name, r, col, a, d);
                }
            }
        }
    }

    #[test]
    fn lead_lag_output_identity(u in -5f64..5.0, x in -5f64..5.0, t1 in 0.1f64..5.0, t2 in 0.1f64..5.0) {
        let c = compile_model(&models::tgov1_blocks()).unwrap();
        let y = c.vars.iter().find(|v| v.name() == "LL_y").unwrap().e.clone().unwrap();
        // residual vanishes exactly when y = T1/T2 (u - x) + x
        let out = t2.recip() * t1 * (u - x) + x;
        let vals: HashMap<&str, f64> = [("LG_y", u), ("LL_x", x), ("T2", t1), ("T3", t2), ("LL_y", out)].into();
        let r = y.eval_scalar(&|n| vals.get(n).copied()).unwrap();
        prop_assert!(r.abs() <= 1e-12 * out.abs().max(1.0));
    }
}

// numeric

fn kundur() -> System {
    let case = io::load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/cases/kundur.json")).unwrap();
    io::build_system(&case, &ModelCache::disabled(), BuildOptions::default()).unwrap().0
}

#[test]
fn addresses_partition_the_dae() {
    let sys = kundur();
    let (nx, ny) = (sys.dae.n_x(), sys.dae.n_y());
    let (mut hx, mut hy) = (vec![0; nx], vec![0; ny]);
    for md in &sys.models {
        for (v, addr) in md.model.vars.iter().zip(&md.addr) {
            if v.is_external() {
                continue;
            }
            for &a in addr {
                match v.kind() {
                    VarKind::State => hx[a] += 1,
                    VarKind::Algeb => hy[a] += 1,
                }
            }
        }
    }
    assert!(hx.iter().chain(&hy).all(|&k| k == 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn evaluation_order_does_not_change_residuals(perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(), noise in prop::collection::vec(-0.05f64..0.05, 80)) {
        let mut sys = kundur();
        solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
        initialize_dynamics(&mut sys, &InitConfig::default()).unwrap();
        for (k, y) in sys.dae.y.iter_mut().enumerate() { *y += noise[k % noise.len()]; }
        sys.eval_equations(Scope::Full).unwrap();
        let (f0, g0) = (sys.dae.f.clone(), sys.dae.g.clone());
        sys.dae.f.fill(0.0);
        sys.dae.g.fill(0.0);
        for &m in &perm {
            sys.eval_model(m).unwrap();
        }
        for (a, b) in sys.dae.f.iter().zip(&f0).chain(sys.dae.g.iter().zip(&g0)) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn discrete_flags_partition(noise in prop::collection::vec(-3f64..3.0, 20)) {
        let mut sys = kundur();
        solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
        initialize_dynamics(&mut sys, &InitConfig::default()).unwrap();
        for (k, x) in sys.dae.x.iter_mut().enumerate() { *x += noise[k % noise.len()]; }
        sys.eval_equations(Scope::Full).unwrap();
        for md in &sys.models {
            for d in 0..md.model.discretes.len() {
                for i in 0..md.n() {
                    let s = md.flags[3 * d][i] + md.flags[3 * d + 1][i] + md.flags[3 * d + 2][i];
                    prop_assert_eq!(s, 1.0);
                }
            }
        }
        // a binding upper limit means the state sits on it with zero residual
        let tg = sys.model("TGOV1").unwrap();
        let k = tg.model.var_index("LG_y").unwrap();
        let vmax = tg.param("VMAX").unwrap();
        for (i, &a) in tg.addr[k].iter().enumerate() {
            if tg.flags[2][i] == 1.0 {
                prop_assert_eq!(sys.dae.x[a], vmax[i]);
                prop_assert_eq!(sys.dae.f[a], 0.0);
            }
        }
    }
}

// models

#[test]
fn line_power_balance() {
    let mut sys = kundur();
    solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
    let line = sys.model("Line").unwrap();
    let m = sys.model_index("Line").unwrap();
    let (b1, b2) = (sys.refs_of(m, "bus1"), sys.refs_of(m, "bus2"));
    let bus = sys.model("Bus").unwrap();
    let (a, v) = (sys.var_values("Bus", "a").unwrap(), sys.var_values("Bus", "v").unwrap());
    let p = |n: &str| line.param(n).unwrap();
    for d in 0..line.n() {
        let (i, j) = (bus.device(&b1[d]).unwrap(), bus.device(&b2[d]).unwrap());
        let z = num_complex::Complex64::new(p("r")[d], p("x")[d]);
        let v1 = num_complex::Complex64::from_polar(v[i], a[i]);
        let v2 = num_complex::Complex64::from_polar(v[j], a[j]);
        let tap = num_complex::Complex64::from_polar(p("tap")[d], p("phi")[d]);
        // series current from the ideal-transformer secondary to bus 2
        let is = (v1 / tap - v2) / z;
        let loss = is.norm_sqr() * z;
        let jb = num_complex::Complex64::new(0.0, p("b")[d] / 2.0);
        let s1 = v1 * (is / tap.conj() + v1 / (tap * tap.conj()) * jb).conj();
        let s2 = v2 * (-is + v2 * jb).conj();
        let charging = -(v1.norm_sqr() / tap.norm_sqr() + v2.norm_sqr()) * p("b")[d] / 2.0;
        // s1 + s2 = series loss + reactive charging (negative)
        let mismatch = s1 + s2 - loss - num_complex::Complex64::new(0.0, charging);
        assert!(mismatch.norm() < 1e-12, "{d}: {mismatch}");
    }
    assert!(sys.max_residual(Scope::PowerFlow) < 1e-8);
}

#[test]
fn pv_holds_voltage_setpoint() {
    let mut sys = kundur();
    solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
    let v = sys.var_values("PV", "v").unwrap();
    let v0 = sys.model("PV").unwrap().param("v0").unwrap();
    assert!(v.iter().zip(v0).all(|(a, b)| (a - b).abs() < 1e-10));
}

#[test]
fn governor_and_machine_steady_state() {
    let mut sys = kundur();
    solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
    initialize_dynamics(&mut sys, &InitConfig::default()).unwrap();
    sys.eval_equations(Scope::Full).unwrap();
    assert!(sys.dae.f.iter().all(|f| f.abs() < 1e-10));
    let tg = sys.model("TGOV1").unwrap();
    let tm0 = tg.service("tm0").unwrap();
    let pd = sys.var_values("TGOV1", "pd").unwrap();
    assert!(pd.iter().zip(tm0).all(|(a, b)| (a - b).abs() < 1e-10));
}

// routines

/// Kundur case with every table's rows in reverse order.
fn reversed_kundur() -> CaseFile {
    let mut case = io::load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/cases/kundur.json")).unwrap();
    for rows in case.tables.values_mut() {
        rows.reverse();
    }
    case
}

fn sorted_eigs(case: &CaseFile) -> Vec<(f64, f64)> {
    let mut sys = io::build_system(case, &ModelCache::disabled(), BuildOptions::default()).unwrap().0;
    solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
    let mut jac = initialize_dynamics(&mut sys, &InitConfig::default()).unwrap();
    let a = compute_state_matrix(&mut sys, &mut jac).unwrap();
    let mut v: Vec<(f64, f64)> = dense_eigenvalues(&a).unwrap().iter().map(|l| (l.re, l.im)).collect();
    v.sort_by(|p, q| p.1.total_cmp(&q.1).then(p.0.total_cmp(&q.0)));
    v
}

#[test]
fn eigenvalues_do_not_depend_on_row_order() {
    let a = sorted_eigs(&io::load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/cases/kundur.json")).unwrap());
    let b = sorted_eigs(&reversed_kundur());
    assert_eq!(a.len(), b.len());
    for (p, q) in a.iter().zip(&b) {
        assert!((p.0 - q.0).abs() < 1e-8 && (p.1 - q.1).abs() < 1e-8, "{p:?} {q:?}");
    }
}

#[test]
fn power_flow_does_not_depend_on_row_order() {
    let solve = |case: &CaseFile| {
        let mut sys = io::build_system(case, &ModelCache::disabled(), BuildOptions::default()).unwrap().0;
        solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
        let bus = sys.model("Bus").unwrap();
        let (a, v) = (sys.var_values("Bus", "a").unwrap(), sys.var_values("Bus", "v").unwrap());
        let mut out: Vec<(String, f64, f64)> = bus.idx.iter().cloned().zip(a).zip(v).map(|((i, a), v)| (i, a, v)).collect();
        out.sort_by(|p, q| p.0.cmp(&q.0));
        out
    };
    let a = solve(&io::load_case(concat!(env!("CARGO_MANIFEST_DIR"), "/cases/kundur.json")).unwrap());
    let b = solve(&reversed_kundur());
    for (p, q) in a.iter().zip(&b) {
        assert_eq!(p.0, q.0);
        assert!((p.1 - q.1).abs() < 1e-9 && (p.2 - q.2).abs() < 1e-9);
    }
}

#[test]
fn stiff_decay_is_monotone() {
    let s = symdae::symbolic::ModelSchema::builder("Decay")
        .tds(true)
        .var(symdae::symbolic::VarSpec::state("x").e("-1000*x"))
        .build()
        .unwrap();
    let mut sys = System::new(vec![compile_model(&s).unwrap()], Default::default());
    sys.add_device("Decay", &Default::default()).unwrap();
    sys.setup().unwrap();
    sys.dae.x[0] = 1.0;
    let r = run_tds(&mut sys, &TdsConfig { h: 0.1, t_end: 5.0, ..Default::default() }).unwrap();
    let mags: Vec<f64> = r.x.iter().map(|x| x[0].abs()).collect();
    assert!(mags.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn steady_state_residuals_stay_below_tolerance() {
    let mut sys = kundur();
    solve_power_flow(&mut sys, &PowerFlowConfig::default()).unwrap();
    initialize_dynamics(&mut sys, &InitConfig::default()).unwrap();
    let mut integ = Integrator::new(&sys).unwrap();
    for _ in 0..60 {
        integ.step(&mut sys, 1.0 / 30.0, 1e-8, 15).unwrap();
        sys.eval_equations(Scope::Full).unwrap();
        assert!(sys.dae.g.iter().all(|g| g.abs() < 1e-8));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn damping_ratio_is_bounded(re in -1e3f64..1e3, im in -1e3f64..1e3) {
        let z = damping_ratio(num_complex::Complex64::new(re, im));
        prop_assert!((-1.0..=1.0).contains(&z));
    }
}

// linalg

fn random_sparse(n: usize, entries: &[(usize, usize, f64)]) -> Csc {
    // diagonally weighted so the matrix is safely nonsingular
    let mut t: Vec<(usize, usize, f64)> = entries.iter().map(|&(r, c, v)| (r % n, c % n, v)).collect();
    t.extend((0..n).map(|i| (i, i, 4.0 + i as f64 * 0.01)));
    csc_from_triplets(n, n, &t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sparse_solve_residual(n in 1usize..40, entries in prop::collection::vec((0usize..40, 0usize..40, -1f64..1.0), 0..120), b in prop::collection::vec(-10f64..10.0, 40)) {
        let a = random_sparse(n, &entries);
        let b = &b[..n];
        let (z, _) = sparse_lu_solve(&a, b, None).unwrap();
        let r = a.mul_vec(&z).iter().zip(b).map(|(l, r)| (l - r).abs()).fold(0.0, f64::max);
        let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(r / scale < 1e-9);
    }

    #[test]
    fn triplet_assembly_matches_dense(n in 1usize..12, m in 1usize..12, entries in prop::collection::vec((0usize..12, 0usize..12, -5f64..5.0), 0..60)) {
        let t: Vec<(usize, usize, f64)> = entries.iter().map(|&(r, c, v)| (r % n, c % m, v)).collect();
        let a = csc_from_triplets(n, m, &t).unwrap().to_dense();
        let mut d = vec![vec![0.0; m]; n];
        for &(r, c, v) in &t {
            d[r][c] += v;
        }
        for (i, row) in d.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                prop_assert!((a[(i, j)] - v).abs() <= 1e-14 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn gram_matrix_eigenvalues_are_real_nonnegative(n in 1usize..8, vals in prop::collection::vec(-2f64..2.0, 64)) {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| vals[i * 8 + j]).collect()).collect();
        let a = DenseMatrix::from_rows(&rows);
        let g = a.transpose().matmul(&a);
        let scale = g.max_abs().max(1.0);
        for l in dense_eigenvalues(&g).unwrap() {
            prop_assert!(l.im.abs() < 1e-8 * scale && l.re > -1e-8 * scale, "{}", l);
        }
    }
}
