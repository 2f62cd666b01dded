use std::collections::BTreeMap;

use super::*;
use crate::models;
use crate::symbolic::{compile_model, DiscreteSpec, ModelSchema, ParamSpec, ServiceSpec, VarSpec};

fn row(fields: &[(&str, FieldValue)]) -> BTreeMap<String, FieldValue> {
    fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn system(schemas: &[ModelSchema]) -> System {
    System::new(schemas.iter().map(|s| compile_model(s).unwrap()).collect(), SystemConfig::default())
}

fn fig7() -> System {
    let mut s = system(&[models::bus(), models::shunt()]);
    for i in 0..5 {
        s.add_device("Bus", &row(&[("idx", (i as f64).into())])).unwrap();
    }
    for i in 0..3 {
        let r = row(&[("bus", (i as f64).into()), ("g", 0.001.into()), ("b", 0.002.into())]);
        s.add_device("Shunt", &r).unwrap();
    }
    s.setup().unwrap();
    s
}

#[test]
fn shunt_addresses_follow_bus_blocks() {
    let s = fig7();
    let sh = s.model("Shunt").unwrap();
    assert_eq!(sh.addr[0], [0, 1, 2]);
    assert_eq!(sh.addr[1], [5, 6, 7]);
    let bus = s.model("Bus").unwrap();
    assert_eq!(bus.addr[0], [0, 1, 2, 3, 4]);
    assert_eq!(bus.addr[1], [5, 6, 7, 8, 9]);
    assert_eq!(s.dae.y_names[6], "Bus.v[1]");
}

#[test]
fn shunt_jacobian_fill() {
    let mut s = fig7();
    s.dae.y[5..10].fill(1.0);
    s.eval_equations(Scope::Full).unwrap();
    assert_eq!(&s.dae.g[..3], &[0.001; 3]);
    assert_eq!(&s.dae.g[5..8], &[-0.002; 3]);
    assert_eq!(s.dae.g[3], 0.0);
    let mut j = JacobianStore::build(&s, Scope::Full).unwrap();
    assert_eq!(j.gy.nnz(), 6);
    j.fill(&s).unwrap();
    for i in 0..3 {
        assert_eq!(j.gy.get(i, 5 + i), 0.002);
        assert_eq!(j.gy.get(5 + i, 5 + i), -0.004);
    }
    // refill is idempotent
    j.fill(&s).unwrap();
    assert_eq!(j.gy.get(0, 5), 0.002);
}

#[test]
fn empty_system_has_empty_matrices() {
    let mut s = system(&[models::bus()]);
    s.setup().unwrap();
    s.eval_equations(Scope::Full).unwrap();
    let j = JacobianStore::build(&s, Scope::Full).unwrap();
    assert_eq!((j.gy.nrows(), j.gy.ncols(), j.gy.nnz()), (0, 0, 0));
}

#[test]
fn loads_accumulate_and_offline_devices_vanish() {
    let build = |loads: &[(f64, f64, f64)]| {
        let mut s = system(&[models::bus(), models::pq()]);
        s.add_device("Bus", &row(&[("idx", 1.0.into())])).unwrap();
        for &(p, q, u) in loads {
            let r = row(&[("bus", 1.0.into()), ("p0", p.into()), ("q0", q.into()), ("u", u.into())]);
            s.add_device("PQ", &r).unwrap();
        }
        s.setup().unwrap();
        s.eval_equations(Scope::Full).unwrap();
        s.dae.g.clone()
    };
    let (two, merged) = (build(&[(0.3, 0.1, 1.0), (0.2, -0.4, 1.0)]), build(&[(0.5, -0.3, 1.0)]));
    for (a, b) in two.iter().zip(&merged) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(build(&[(0.3, 0.1, 0.0)]), vec![0.0, 0.0]);
}

#[test]
fn load_errors() {
    let mut s = system(&[models::bus(), models::gencls(), models::tgov1()]);
    let r = row(&[("idx", 1.0.into()), ("syn", 1.0.into()), ("R", 0.0.into())]);
    let e = s.add_device("TGOV1", &r).unwrap_err();
    assert!(matches!(&e, NumericError::NonZero { model, field, .. } if model == "TGOV1" && field == "R"));
    s.add_device("Bus", &row(&[("idx", 1.0.into())])).unwrap();
    assert!(matches!(s.add_device("Bus", &row(&[("idx", 1.0.into())])), Err(NumericError::DuplicateIdx { .. })));
    assert!(matches!(s.add_device("Bus", &row(&[("Vmax", 1.0.into())])), Err(NumericError::UnknownField { .. })));
    assert!(matches!(s.add_device("Nope", &row(&[])), Err(NumericError::UnknownModel(_))));
}

#[test]
fn unknown_link_is_reported() {
    let mut s = system(&[models::bus(), models::pq()]);
    s.add_device("Bus", &row(&[("idx", 1.0.into())])).unwrap();
    s.add_device("PQ", &row(&[("idx", "L".into()), ("bus", 9.0.into())])).unwrap();
    let e = s.setup().unwrap_err();
    assert!(matches!(&e, NumericError::UnknownIdx { model, idx, indexer, value, .. }
        if model == "PQ" && idx == "L" && indexer == "bus" && value == "9"));
}

#[test]
fn per_unit_rules() {
    let mut s = system(&[models::bus(), models::gencls(), models::tgov1()]);
    let r = row(&[("idx", 1.0.into()), ("syn", 1.0.into()), ("R", 0.05.into()), ("Sn", 900.0.into())]);
    s.add_device("TGOV1", &r).unwrap();
    let r = row(&[("idx", 2.0.into()), ("syn", 1.0.into()), ("R", 0.05.into())]);
    s.add_device("TGOV1", &r).unwrap();
    let r = row(&[("idx", 1.0.into()), ("bus", 1.0.into()), ("gen", 1.0.into()), ("M", 13.0.into()), ("Sn", 900.0.into())]);
    s.add_device("GENCLS", &r).unwrap();
    s.per_unit_convert().unwrap();
    let r = s.model("TGOV1").unwrap().param("R").unwrap();
    assert!((r[0] - 0.05 * 100.0 / 900.0).abs() < 1e-15);
    assert_eq!(r[1], 0.05);
    assert!((s.model("GENCLS").unwrap().param("M").unwrap()[0] - 117.0).abs() < 1e-12);
    assert_eq!(s.per_unit_convert(), Err(NumericError::AlreadyConverted));
}

fn coi_like() -> ModelSchema {
    ModelSchema::builder("Gen")
        .param(ParamSpec::num("H"))
        .param(ParamSpec::num("R").non_zero().default(0.05))
        .param(ParamSpec::num("area"))
        .service(ServiceSpec::constant("G", "u/R"))
        .service(ServiceSpec::reduce("Ht", "H", "area"))
        .service(ServiceSpec::repeat("Hr", "Ht", "area"))
        .service(ServiceSpec::constant("share", "H/Hr"))
        .var(VarSpec::algeb("w").e("share - w"))
        .build()
        .unwrap()
}

#[test]
fn services_const_reduce_repeat() {
    let mut s = system(&[coi_like()]);
    for h in [13.0, 13.0, 12.35, 12.35] {
        s.add_device("Gen", &row(&[("H", h.into()), ("area", 1.0.into())])).unwrap();
    }
    s.add_device("Gen", &row(&[("H", 4.0.into()), ("area", 2.0.into())])).unwrap();
    s.setup().unwrap();
    s.eval_services(0, false).unwrap();
    let g = s.model("Gen").unwrap();
    assert_eq!(g.service("G").unwrap(), &[20.0; 5]);
    let hr = g.service("Hr").unwrap();
    for v in &hr[..4] {
        assert!((v - 50.7).abs() < 1e-12);
    }
    assert_eq!(hr[4], 4.0);
    assert_eq!(g.service("Ht").unwrap().len(), 2);
    assert_eq!(g.service("share").unwrap()[4], 1.0);
}

#[test]
fn single_member_reduce_is_identity() {
    let mut s = system(&[coi_like()]);
    s.add_device("Gen", &row(&[("H", 3.5.into())])).unwrap();
    s.setup().unwrap();
    s.eval_services(0, false).unwrap();
    assert_eq!(s.model("Gen").unwrap().service("Hr").unwrap(), &[3.5]);
}

fn limited() -> ModelSchema {
    ModelSchema::builder("Lim")
        .param(ParamSpec::num("lo").default(0.4))
        .param(ParamSpec::num("hi").default(33.0))
        .param(ParamSpec::num("drive"))
        .var(VarSpec::algeb("inp").e("drive - inp"))
        .discrete(DiscreteSpec::hard_limiter("HL", "inp", "lo", "hi"))
        .var(VarSpec::state("xs").e("lim_zi*drive").v("0"))
        .discrete(DiscreteSpec::anti_windup("lim", "xs", "lo", "hi"))
        .build()
        .unwrap()
}

#[test]
fn hard_limiter_flags() {
    let mut s = system(&[limited()]);
    s.add_device("Lim", &row(&[])).unwrap();
    s.setup().unwrap();
    let mut flags_at = |v: f64| {
        s.dae.y[0] = v;
        s.dae.x[0] = 1.0;
        s.eval_equations(Scope::Full).unwrap();
        let f = s.model("Lim").unwrap().discrete_flags("HL").unwrap();
        (f[1][0], f[0][0], f[2][0])
    };
    assert_eq!(flags_at(0.5), (0.0, 1.0, 0.0));
    assert_eq!(flags_at(0.4), (0.0, 1.0, 0.0));
    assert_eq!(flags_at(0.3), (1.0, 0.0, 0.0));
    assert_eq!(flags_at(33.5), (0.0, 0.0, 1.0));
}

#[test]
fn anti_windup_clamps_and_releases() {
    let mut s = system(&[limited()]);
    s.add_device("Lim", &row(&[("drive", 0.1.into())])).unwrap();
    s.setup().unwrap();
    // at the upper bound with a positive derivative: clamp
    s.dae.x[0] = 33.0;
    s.eval_equations(Scope::Full).unwrap();
    let f = s.model("Lim").unwrap().discrete_flags("lim").unwrap();
    assert_eq!((f[1][0], f[0][0], f[2][0]), (0.0, 0.0, 1.0));
    assert_eq!((s.dae.x[0], s.dae.f[0]), (33.0, 0.0));
    assert!(s.dae.clamped[0]);
    let mut j = JacobianStore::build(&s, Scope::Full).unwrap();
    j.fill(&s).unwrap();
    assert_eq!(j.fy.get(0, 0), 0.0);
    // derivative turns negative: release
    s.models[0].params[3][0] = -0.1;
    s.eval_equations(Scope::Full).unwrap();
    let f = s.model("Lim").unwrap().discrete_flags("lim").unwrap();
    assert_eq!((f[1][0], f[0][0], f[2][0]), (0.0, 1.0, 0.0));
    assert_eq!(s.dae.f[0], -0.1);
    assert!(!s.dae.clamped[0]);
}

#[test]
fn bounds_are_checked() {
    let mut s = system(&[limited()]);
    s.add_device("Lim", &row(&[("lo", 2.0.into()), ("hi", 1.0.into())])).unwrap();
    s.setup().unwrap();
    assert!(matches!(s.check_bounds(), Err(NumericError::Bounds { .. })));
}
