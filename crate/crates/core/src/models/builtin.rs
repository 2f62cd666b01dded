//! Built-in model declarations.

use crate::symbolic::{BlockSpec, DiscreteSpec, ModelSchema, ParamSpec, ServiceSpec, VarSpec};

fn build(b: crate::symbolic::SchemaBuilder) -> ModelSchema {
    b.build().expect("built-in schema is valid")
}

pub fn bus() -> ModelSchema {
    build(
        ModelSchema::builder("Bus")
            .group("ACTopology")
            .info("AC bus holding voltage angle and magnitude")
            .pflow(true)
            .param(ParamSpec::num("Vn").info("nominal voltage").unit("kV").default(110.0))
            .param(ParamSpec::num("v0").info("initial voltage magnitude").unit("pu").default(1.0).tex("V_0"))
            .param(ParamSpec::num("a0").info("initial voltage angle").unit("rad").default(0.0).tex("\\theta_0"))
            .param(ParamSpec::num("area").info("area code").default(1.0))
            .var(VarSpec::algeb("a").v("a0").info("voltage angle").unit("rad").tex("\\theta"))
            .var(VarSpec::algeb("v").v("v0").info("voltage magnitude").unit("pu").tex("V")),
    )
}

pub fn pq() -> ModelSchema {
    build(
        ModelSchema::builder("PQ")
            .group("StaticLoad")
            .info("constant power load")
            .pflow(true)
            .param(ParamSpec::idx("bus", "Bus").info("linked bus idx"))
            .param(ParamSpec::num("Vn").info("nominal voltage").unit("kV").default(110.0))
            .param(ParamSpec::num("p0").info("active power load").unit("pu"))
            .param(ParamSpec::num("q0").info("reactive power load").unit("pu"))
            .var(VarSpec::ext_algeb("a", "Bus", "a", "bus").e("u*p0").tex("\\theta"))
            .var(VarSpec::ext_algeb("v", "Bus", "v", "bus").e("u*q0").tex("V")),
    )
}

fn static_gen(name: &str, info: &str, p_eq: &str) -> crate::symbolic::SchemaBuilder {
    let mut b = ModelSchema::builder(name)
        .group("StaticGen")
        .info(info)
        .pflow(true)
        .param(ParamSpec::idx("bus", "Bus").info("linked bus idx"))
        .param(ParamSpec::num("Sn").info("power rating").unit("MVA").default(100.0))
        .param(ParamSpec::num("Vn").info("nominal voltage").unit("kV").default(110.0))
        .param(ParamSpec::num("p0").info("active power set point").unit("pu"))
        .param(ParamSpec::num("q0").info("reactive power guess").unit("pu"))
        .param(ParamSpec::num("v0").info("voltage set point").unit("pu").default(1.0).tex("V_0"))
        .param(ParamSpec::num("ra").info("armature resistance").unit("pu"))
        .param(ParamSpec::num("xs").info("synchronous reactance").unit("pu").default(0.3));
    if name == "Slack" {
        b = b.param(ParamSpec::num("a0").info("angle set point").unit("rad").tex("\\theta_0"));
    }
    b.var(VarSpec::algeb("p").e(p_eq).v("u*p0").info("active power injection").unit("pu"))
        .var(VarSpec::algeb("q").e("u*(v0 - v) - (1 - u)*q").v("u*q0").info("reactive power injection").unit("pu"))
}

pub fn pv() -> ModelSchema {
    build(
        static_gen("PV", "generator holding active power and voltage magnitude", "u*p0 - p")
            .var(VarSpec::ext_algeb("a", "Bus", "a", "bus").e("-u*p").tex("\\theta"))
            .var(VarSpec::ext_algeb("v", "Bus", "v", "bus").e("-u*q").v("v0").setter().tex("V")),
    )
}

pub fn slack() -> ModelSchema {
    build(
        static_gen("Slack", "reference generator holding voltage magnitude and angle", "u*(a0 - a) - (1 - u)*p")
            .var(VarSpec::ext_algeb("a", "Bus", "a", "bus").e("-u*p").v("a0").setter().tex("\\theta"))
            .var(VarSpec::ext_algeb("v", "Bus", "v", "bus").e("-u*q").v("v0").setter().tex("V")),
    )
}

pub fn shunt() -> ModelSchema {
    build(
        ModelSchema::builder("Shunt")
            .group("StaticShunt")
            .info("constant shunt admittance")
            .pflow(true)
            .param(ParamSpec::idx("bus", "Bus").info("bus index"))
            .param(ParamSpec::num("g").info("conductance").unit("pu"))
            .param(ParamSpec::num("b").info("susceptance").unit("pu"))
            .var(VarSpec::ext_algeb("a", "Bus", "a", "bus").e("g*v*v").tex("\\theta"))
            .var(VarSpec::ext_algeb("v", "Bus", "v", "bus").e("-b*v*v").tex("V")),
    )
}

pub fn line() -> ModelSchema {
    let d1 = "a1 - a2 - phi";
    let d2 = "a2 - a1 + phi";
    build(
        ModelSchema::builder("Line")
            .group("ACLine")
            .info("pi-model line with off-nominal tap on the bus1 side")
            .pflow(true)
            .param(ParamSpec::idx("bus1", "Bus").info("from bus idx"))
            .param(ParamSpec::idx("bus2", "Bus").info("to bus idx"))
            .param(ParamSpec::num("Sn").info("power rating").unit("MVA").default(100.0))
            .param(ParamSpec::num("Vn1").info("from-side nominal voltage").unit("kV").default(110.0))
            .param(ParamSpec::num("Vn2").info("to-side nominal voltage").unit("kV").default(110.0))
            .param(ParamSpec::num("r").info("series resistance").unit("pu").default(1e-8))
            .param(ParamSpec::num("x").info("series reactance").unit("pu").default(1e-8).non_zero())
            .param(ParamSpec::num("b").info("total shunt susceptance").unit("pu"))
            .param(ParamSpec::num("tap").info("off-nominal tap ratio").default(1.0).non_zero().tex("m"))
            .param(ParamSpec::num("phi").info("phase shift").unit("rad").tex("\\phi"))
            .service(ServiceSpec::constant("gh", "r/(r**2 + x**2)").tex("g_h"))
            .service(ServiceSpec::constant("bh", "-x/(r**2 + x**2)").tex("b_h"))
            .var(
                VarSpec::ext_algeb("a1", "Bus", "a", "bus1")
                    .e(&format!("u*(v1**2*gh/tap**2 - v1*v2/tap*(gh*cos({d1}) + bh*sin({d1})))"))
                    .tex("\\theta_1"),
            )
            .var(
                VarSpec::ext_algeb("a2", "Bus", "a", "bus2")
                    .e(&format!("u*(v2**2*gh - v1*v2/tap*(gh*cos({d2}) + bh*sin({d2})))"))
                    .tex("\\theta_2"),
            )
            .var(
                VarSpec::ext_algeb("v1", "Bus", "v", "bus1")
                    .e(&format!("u*(-v1**2*(bh + b/2)/tap**2 - v1*v2/tap*(gh*sin({d1}) - bh*cos({d1})))"))
                    .tex("V_1"),
            )
            .var(
                VarSpec::ext_algeb("v2", "Bus", "v", "bus2")
                    .e(&format!("u*(-v2**2*(bh + b/2) - v1*v2/tap*(gh*sin({d2}) - bh*cos({d2})))"))
                    .tex("V_2"),
            ),
    )
}

pub fn gencls() -> ModelSchema {
    build(
        ModelSchema::builder("GENCLS")
            .group("SynGen")
            .info("classical generator: constant voltage behind transient reactance")
            .param(ParamSpec::idx("bus", "Bus").info("interface bus idx"))
            .param(ParamSpec::idx("gen", "StaticGen").info("static generator replaced at initialization"))
            .param(ParamSpec::num("Sn").info("power rating").unit("MVA").default(100.0))
            .param(ParamSpec::num("Vn").info("nominal voltage").unit("kV").default(110.0))
            .param(ParamSpec::num("fn").info("rated frequency").unit("Hz").default(60.0).tex("f"))
            .param(ParamSpec::num("D").info("damping coefficient").unit("pu").power())
            .param(ParamSpec::num("M").info("machine start-up time (2H)").unit("s").default(6.0).non_zero().power())
            .param(ParamSpec::num("ra").info("armature resistance").unit("pu"))
            .param(ParamSpec::num("xd1").info("d-axis transient reactance").unit("pu").default(0.302).non_zero().ipower().tex("x'_d"))
            .service(ServiceSpec::external("p0s", "StaticGen", "p", "gen").tex("P_0"))
            .service(ServiceSpec::external("q0s", "StaticGen", "q", "gen").tex("Q_0"))
            .service(ServiceSpec::constant("wb", "2*3.141592653589793*fn").tex("\\Omega_b"))
            .service(ServiceSpec::constant("Ep", "sqrt((v + xd1*q0s/v)**2 + (xd1*p0s/v)**2)").tex("E'"))
            .service(ServiceSpec::constant("tm0", "p0s").tex("\\tau_{m0}"))
            .var(
                VarSpec::state("delta")
                    .e("u*wb*(omega - 1)")
                    .v("a")
                    .v_iter("Ep*v*sin(delta - a)/xd1 - p0s")
                    .info("rotor angle")
                    .unit("rad")
                    .tex("\\delta"),
            )
            .var(VarSpec::state("omega").e("u*(tm - te - D*(omega - 1))/M").v("u").info("rotor speed").unit("pu").tex("\\omega"))
            .var(VarSpec::algeb("te").e("u*Ep*v*sin(delta - a)/xd1 - te").v("p0s").info("electrical torque").tex("\\tau_e"))
            .var(VarSpec::algeb("tm").e("tm0 - tm").v("tm0").info("mechanical torque").tex("\\tau_m"))
            .var(VarSpec::ext_algeb("a", "Bus", "a", "bus").e("-u*te").tex("\\theta"))
            .var(VarSpec::ext_algeb("v", "Bus", "v", "bus").e("-u*(Ep*v*cos(delta - a) - v**2)/xd1").tex("V")),
    )
}

fn tgov1_head(name: &str) -> crate::symbolic::SchemaBuilder {
    ModelSchema::builder(name)
        .group("TurbineGov")
        .info("TGOV1 turbine governor")
        .param(ParamSpec::idx("syn", "SynGen").info("synchronous generator idx"))
        .param(ParamSpec::num("Sn").info("power rating").unit("MVA").default(100.0))
        .param(ParamSpec::num("R").info("Turbine governor droop").default(0.05).non_zero().ipower())
        .param(ParamSpec::num("VMAX").info("maximum valve position").unit("pu").default(999.0).power().tex("V_{max}"))
        .param(ParamSpec::num("VMIN").info("minimum valve position").unit("pu").power().tex("V_{min}"))
        .param(ParamSpec::num("T1").info("valve time constant").unit("s").default(0.1).non_zero())
        .param(ParamSpec::num("T2").info("lead-lag lead time constant").unit("s").default(1.0))
        .param(ParamSpec::num("T3").info("lead-lag lag time constant").unit("s").default(1.0).non_zero())
        .param(ParamSpec::num("Dt").info("turbine damping coefficient").unit("pu").power().tex("D_{t}"))
        .var(VarSpec::ext_state("omega", "SynGen", "omega", "syn").tex("\\omega"))
        .var(VarSpec::ext_algeb("tm", "SynGen", "tm", "syn").e("u*(pout-tm0)").tex("\\tau_m"))
        .service(ServiceSpec::constant("G", "u/R"))
        .service(ServiceSpec::external("tm0", "SynGen", "tm", "syn").tex("\\tau_{m0}"))
        .var(VarSpec::algeb("pref").v("tm0*R").e("tm0*R-pref").info("reference power").tex("P_{ref}"))
        .var(VarSpec::algeb("wd").e("(1-omega)-wd").info("generator under speed").tex("\\omega_{d}"))
}

/// TGOV1 written with descriptive equations.
pub fn tgov1() -> ModelSchema {
    build(
        tgov1_head("TGOV1")
            .var(VarSpec::algeb("pd").v("tm0").e("G*(wd+pref)-pd").info("droop output").tex("P_{d}"))
            .var(VarSpec::state("LG_y").v("pd").e("LG_lim_zi*(pd-LG_y)/T1").info("valve position").tex("x_{LG}"))
            .discrete(DiscreteSpec::anti_windup("LG_lim", "LG_y", "VMIN", "VMAX"))
            .var(VarSpec::state("LL_x").v("LG_y").e("(LG_y-LL_x)/T3").info("lead-lag state").tex("x_{LL}"))
            .var(VarSpec::algeb("LL_y").v("LG_y").e("T2/T3*(LG_y-LL_x)+LL_x-LL_y").info("lead-lag output").tex("y_{LL}"))
            .var(VarSpec::algeb("pout").v("tm0").e("(LL_y+Dt*wd)-pout").info("turbine output").tex("P_{OUT}")),
    )
}

/// The same governor composed from gain, anti-windup lag and lead-lag blocks.
pub fn tgov1_blocks() -> ModelSchema {
    build(
        tgov1_head("TGOV1B")
            .block(BlockSpec::gain("GA", "wd+pref", "G"))
            .block(BlockSpec::lag_anti_windup("LG", "GA_y", "1", "T1", "VMIN", "VMAX"))
            .block(BlockSpec::lead_lag("LL", "LG_y", "T2", "T3"))
            .var(VarSpec::algeb("pout").v("tm0").e("(LL_y+Dt*wd)-pout").info("turbine output").tex("P_{OUT}")),
    )
}

/// All built-in schemas in registration order: power-flow models first.
pub fn builtin_schemas() -> Vec<ModelSchema> {
    vec![bus(), pq(), pv(), slack(), shunt(), line(), gencls(), tgov1()]
}
