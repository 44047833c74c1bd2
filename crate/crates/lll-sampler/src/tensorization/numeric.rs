use super::uniform::{blocks_a, blocks_b, block_r};
use crate::marking::{binary_params, kl_divergence, UniformConstants, UNIFORM};
use serde::Serialize;
use std::f64::consts::E;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericReport {
    pub checks: Vec<NumericCheck>,
    pub pass: bool,
}

impl NumericReport {
    pub fn failures(&self) -> impl Iterator<Item = &NumericCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Slack for identities that hold with equality in exact arithmetic.
const ROUNDING: f64 = 1e-12;

pub fn tilt_t1(c: &UniformConstants) -> f64 {
    ((1.0 - c.eta) * (c.eta + c.tau1) / (c.eta * (1.0 - c.eta - c.tau1))).ln()
}

pub fn tilt_t2(c: &UniformConstants) -> f64 {
    (c.eta * (1.0 - c.eta + c.tau2) / ((1.0 - c.eta) * (c.eta - c.tau2))).ln()
}

/// The four quantities whose minimum is the uniform construction's γ.
pub fn gamma_terms(c: &UniformConstants) -> [f64; 4] {
    let kl = |a: f64| kl_divergence(a, c.eta).unwrap_or(f64::NAN);
    [1.0 - c.eta - c.tau1, (c.eta - c.tau2 - 3.0 * c.zeta) / 2.0, kl(c.eta + c.tau1), kl(c.eta - c.tau2)]
}

pub fn verify_numeric_facts() -> NumericReport {
    verify_numeric_facts_with(&UNIFORM)
}

pub fn verify_numeric_facts_with(c: &UniformConstants) -> NumericReport {
    let mut checks = Vec::new();
    let mut le = |name: String, lhs: f64, rhs: f64| {
        let pass = lhs <= rhs;
        checks.push(NumericCheck { name, lhs, rhs, pass });
    };
    let t1 = tilt_t1(c);
    let t2 = tilt_t2(c);
    le("t1 >= 1.1659".into(), 1.1659, t1);
    le("t1 <= 1.1660".into(), t1, 1.1660);
    le("t2 >= 1.0035".into(), 1.0035, t2);
    le("t2 <= 1.0036".into(), t2, 1.0036);

    let terms = gamma_terms(c);
    let min = terms.iter().cloned().fold(f64::INFINITY, f64::min);
    le("gamma identity: min of the four terms >= gamma".into(), c.gamma - ROUNDING, min);

    let log2e = E.log2();
    let kl1 = terms[2];
    let kl2 = terms[3];
    let families: [(&str, f64, &[f64]); 3] = [
        ("log2(3)", 3f64.log2(), &[8.0, 9.0, 16.0, 64.0, 1024.0]),
        ("1", 1.0, &[3.0, 4.0, 6.0, 7.0]),
        ("log2(5/2)", 2.5f64.log2(), &[5.0]),
    ];
    for (wname, w, xs) in families {
        for &x in xs {
            let lg = x.log2();
            le(
                format!("lower tail, width {wname}, x = {x}"),
                w * w * t1 * t1 / 8.0,
                (c.tau1 * t1 - kl1 / log2e) * lg,
            );
            le(
                format!("upper tail, width {wname}, x = {x}"),
                w * w * t2 * t2 / 8.0,
                (c.tau2 * t2 - kl2 / log2e) * lg,
            );
        }
    }

    for n in 8..=17usize {
        let r = block_r(n);
        for x in [r - 1, r, r + 1] {
            le(format!("N = {n}, x = {x}: 1 <= x"), 1.0, x as f64);
            le(format!("N = {n}, x = {x}: x <= N"), x as f64, n as f64);
            le(format!("N = {n}, x = {x}: A(N, x) >= 0"), 0.0, blocks_a(n, x) as f64);
            le(format!("N = {n}, x = {x}: B(N, x) >= 0"), 0.0, blocks_b(n, x) as f64);
        }
    }

    let g_binary = binary_params(1.0, 0.0).gamma;
    let g_general = binary_params(2.0, 0.0).gamma;
    le("binary gamma limit > 0.171".into(), 0.171 + f64::EPSILON, g_binary);
    le("general gamma limit > 0.145".into(), 0.145 + f64::EPSILON, g_general);

    let pass = checks.iter().all(|c| c.pass);
    NumericReport { checks, pass }
}

/// Rounds to four decimal places.
pub fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}
