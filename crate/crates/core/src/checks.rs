//! Cross-validation of the Lax side against the reconstruction.
//!
//! Every check compares polynomials exactly and produces [`CheckResult`]s;
//! failures carry the offending difference.

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::kp::{binom, BernoulliCache, KpEngine};
use crate::pdo::PdOperator;
use crate::recon::{commutativity_violations, property_violations, seed, QTable, Reconstructor};
use crate::ring::{int, invert_triangular, rat, DiffPoly, Frame, Grade, Grading, Monomial, Rational, SubstitutionRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub params: Value,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<String>,
}

impl CheckResult {
    pub fn pass(check: &str, params: Value) -> Self {
        CheckResult { check: check.into(), params, status: Status::Pass, diff: None }
    }

    pub fn fail(check: &str, params: Value, diff: impl Into<String>) -> Self {
        CheckResult { check: check.into(), params, status: Status::Fail, diff: Some(diff.into()) }
    }

    /// Passes iff `got == want`; the diff is `got - want`.
    pub fn compare(check: &str, params: Value, got: &DiffPoly, want: &DiffPoly) -> Self {
        if got == want {
            Self::pass(check, params)
        } else {
            Self::fail(check, params, format!("got - expected = {}", got - want))
        }
    }

    pub fn expect(check: &str, params: Value, ok: bool, why: impl FnOnce() -> String) -> Self {
        if ok {
            Self::pass(check, params)
        } else {
            Self::fail(check, params, why())
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Ordered collection of check results.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    results: Vec<CheckResult>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: CheckResult) {
        self.results.push(r);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = CheckResult>) {
        self.results.extend(rs);
    }

    pub fn results(&self) -> &[CheckResult] {
        &self.results
    }

    pub fn all_passed(&self) -> bool {
        self.results.iter().all(CheckResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed())
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(&self.results).expect("serializable")
    }

    /// One line per check name with its case count, then every failure.
    pub fn summary(&self) -> String {
        let mut names: Vec<&str> = Vec::new();
        for r in &self.results {
            if !names.contains(&r.check.as_str()) {
                names.push(&r.check);
            }
        }
        let mut out = String::new();
        for name in names {
            let cases: Vec<&CheckResult> = self.results.iter().filter(|r| r.check == name).collect();
            let failed = cases.iter().filter(|r| !r.passed()).count();
            let tag = if failed == 0 { "PASS" } else { "FAIL" };
            out.push_str(&format!("{} {} ({} cases, {} failed)\n", tag, name, cases.len(), failed));
        }
        for r in self.failures() {
            out.push_str(&format!("  {} {}: {}\n", r.check, r.params, r.diff.as_deref().unwrap_or("")));
        }
        out
    }
}

fn var(frame: Frame, a: u32, k: u32) -> DiffPoly {
    DiffPoly::var(frame, a, k)
}

/// Only families `<= bound` occur; vacuous for zero.
fn families_at_most(p: &DiffPoly, bound: i64) -> bool {
    p.is_zero() || p.max_family() as i64 <= bound
}

fn linear_part(p: &DiffPoly) -> DiffPoly {
    p.filter(|m| m.tdeg() == 1)
}

fn brat(n: num::BigInt) -> Rational {
    Rational::from_integer(n)
}

/// Known Hamiltonian densities `P(a, b)` of the source hierarchy, in the `u`
/// frame. These are trusted inputs, not computed quantities.
pub struct PFixtures;

impl PFixtures {
    fn u(a: u32, k: u32) -> DiffPoly {
        var(Frame::U, a, k)
    }

    fn eps2() -> DiffPoly {
        DiffPoly::eps_pow(Frame::U, 2)
    }

    /// `P(a, 1) = u_a`.
    pub fn p_first_column(a: u32) -> DiffPoly {
        Self::u(a, 0)
    }

    pub fn p12() -> DiffPoly {
        Self::u(2, 0)
    }

    /// `u3 + eps^2/8 u1''`.
    pub fn p13() -> DiffPoly {
        &Self::u(3, 0) + &(&Self::eps2() * &Self::u(1, 2)).scale(&rat(1, 8))
    }

    /// `u3 + u1^2/2 + eps^2/24 u1''`.
    pub fn p22() -> DiffPoly {
        &(&Self::u(3, 0) + &(&Self::u(1, 0) * &Self::u(1, 0)).scale(&rat(1, 2))) + &(&Self::eps2() * &Self::u(1, 2)).scale(&rat(1, 24))
    }

    /// Coefficient of `eps^2 u_{a-2}''` in `P(1, a)`: `a (a - 2) / 24`.
    pub fn p1_eps2_coefficient(a: u32) -> Rational {
        rat(a as i64 * (a as i64 - 2), 24)
    }

    /// `v_a = P(1, a)` for `a <= 3`.
    pub fn miura_images() -> Vec<DiffPoly> {
        vec![Self::p_first_column(1), Self::p12(), Self::p13()]
    }
}

/// The change of variables `v = P(1, *)` carries `P(2, 2)` to the seed.
pub fn check_miura_fixture() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let images = PFixtures::miura_images();
    let inverse = invert_triangular(&images, &[], Frame::V)?;
    let rule: SubstitutionRule = inverse.iter().enumerate().map(|(i, p)| (i as u32 + 1, p.clone())).collect();
    let p22 = PFixtures::p22().substitute(&rule, Frame::V)?;
    out.push(CheckResult::compare("miura.p22_to_seed", json!({}), &p22, &seed()));
    out.push(CheckResult::compare("miura.family1_identity", json!({}), &inverse[0], &var(Frame::V, 1, 0)));

    let p13 = PFixtures::p13();
    out.push(CheckResult::expect("miura.p13_eps2_coefficient", json!({"alpha": 3}), {
        p13.coeff(&Monomial::new(vec![(1, 2)], 2)) == PFixtures::p1_eps2_coefficient(3)
            && PFixtures::p1_eps2_coefficient(2).is_zero()
    }, || "fixture coefficient disagrees with a (a - 2) / 24".into()));

    // P(1, 3) - u3 is a second derivative: two exact antiderivatives
    let d = &p13 - &PFixtures::u(3, 0);
    let twice = d.antiderivative().and_then(|x| {
        let trivial = (1..=3).all(|i| d.variational_derivative(i).is_zero() && x.variational_derivative(i).is_zero());
        x.antiderivative().map(|y| (y, trivial))
    });
    out.push(match twice {
        Ok((y, true)) if y.total_derivative_n(2) == d => CheckResult::pass("miura.p13_second_derivative", json!({"beta": 3})),
        Ok(_) => CheckResult::fail("miura.p13_second_derivative", json!({"beta": 3}), "variational test failed"),
        Err(e) => CheckResult::fail("miura.p13_second_derivative", json!({"beta": 3}), e.to_string()),
    });
    Ok(out)
}

/// `w_g -> -g v_g`, then `eps`-homogenized and scaled by `-1/(a b)`.
pub fn lax_image(r: &DiffPoly, a: u32, b: u32) -> Result<DiffPoly> {
    let rule: SubstitutionRule = (1..=r.max_family().max(1)).map(|g| (g, var(Frame::V, g, 0).scale(&int(-(g as i64))))).collect();
    Ok(r.substitute(&rule, Frame::V)?.homogenize_eps(0)?.scale(&rat(-1, (a * b) as i64)))
}

/// `Q(a, b)` equals the Lax-side image of `R(a, b)` for all `a + b <= max_weight`.
pub fn check_theorem_main(engine: &KpEngine, table: &QTable, max_weight: u32) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for a in 1..max_weight {
        for b in 1..=max_weight - a {
            let params = json!({"alpha": a, "beta": b});
            let image = lax_image(&engine.r(a, b)?, a, b)?;
            out.push(match table.get(a, b) {
                Some(q) => CheckResult::compare("main.q_equals_lax_image", params, q, &image),
                None => CheckResult::fail("main.q_equals_lax_image", params, "entry missing from the reconstructed table"),
            });
        }
    }
    Ok(out)
}

/// `L^2` through order `-2`.
pub fn check_lax_square() -> Vec<CheckResult> {
    let f = |a, k| var(Frame::F, a, k);
    let l2 = PdOperator::lax_operator(3).power(2);
    let want = [
        (2, DiffPoly::one(Frame::F)),
        (1, DiffPoly::zero(Frame::F)),
        (0, f(1, 0).scale(&int(2))),
        (-1, &f(2, 0).scale(&int(2)) + &f(1, 1)),
        (-2, &(&f(3, 0).scale(&int(2)) + &(&f(1, 0) * &f(1, 0))) + &f(2, 1)),
    ];
    let mut out = Vec::new();
    for (n, w) in want {
        let params = json!({"order": n});
        out.push(match l2.coefficient(n) {
            Ok(c) => CheckResult::compare("lax.square", params, &c, &w),
            Err(e) => CheckResult::fail("lax.square", params, e.to_string()),
        });
    }
    out.push(CheckResult::expect("lax.square", json!({"top": 2}), l2.top_order() == 2 && l2.valid_low() == Some(-2), || {
        format!("top {} window {:?}", l2.top_order(), l2.valid_low())
    }));
    out
}

/// `R(a, b) = R(b, a)` and `R` is even, for `a + b <= max_weight`.
pub fn check_symmetry_parity(engine: &KpEngine, max_weight: u32) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for a in 1..max_weight {
        for b in 1..=max_weight - a {
            let r = engine.r(a, b)?;
            let params = json!({"alpha": a, "beta": b});
            if a < b {
                out.push(CheckResult::compare("kp.symmetry", params.clone(), &r, &engine.r(b, a)?));
            }
            out.push(CheckResult::compare("kp.parity", params, &r.parity_flip(), &r));
        }
    }
    Ok(out)
}

/// Degree, first-row values and leading term of every `R(a, b)`.
pub fn check_r_grading(engine: &KpEngine, max_weight: u32) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for a in 1..max_weight {
        for b in 1..=max_weight - a {
            let r = engine.r(a, b)?;
            let params = json!({"alpha": a, "beta": b});
            let s = a + b - 1;
            out.push(CheckResult::expect("kp.r_degree", params.clone(), r.grade(Grading::Deg) == Grade::Homogeneous((a + b) as i64), || {
                format!("{:?}", r.grade(Grading::Deg))
            }));
            out.push(CheckResult::expect("kp.r_no_constant", params.clone(), r.min_tdeg().is_some_and(|t| t >= 1), || r.to_string()));
            if a == 1 || b == 1 {
                out.push(CheckResult::compare("kp.r_first_row", params.clone(), &r, &var(Frame::W, s, 0)));
            }
            let rest = &r - &var(Frame::W, s, 0).scale(&rat((a * b) as i64, s as i64));
            out.push(CheckResult::expect("kp.r_leading_term", params, families_at_most(&rest, (a + b) as i64 - 3), || format!("remainder {}", rest)));
        }
    }
    Ok(out)
}

/// `S(i, k)`, `w_k`, `f_k(w)`, `S(k, 2)` and `R(k, 2)` against their closed
/// structure formulas, for every index with degree `<= max_deg`.
pub fn check_structure(engine: &KpEngine, max_deg: u32) -> Result<Vec<CheckResult>> {
    let f = |a, k| var(Frame::F, a, k);
    let w = |a, k| var(Frame::W, a, k);
    let bern = BernoulliCache::new(max_deg);
    let mut out = Vec::new();

    for i in 1..max_deg {
        for k in 1..max_deg {
            if i + k + 1 > max_deg {
                continue;
            }
            let s = engine.kp_flow(i, k);
            let mut lin = DiffPoly::zero(Frame::F);
            for j in 1..=k {
                lin += &f(i + k - j, j).scale(&brat(binom(k, j)));
            }
            let params = json!({"i": i, "k": k});
            out.push(CheckResult::compare("kp.flow_linear_part", params.clone(), &linear_part(&s), &lin));
            let rest = &s - &lin;
            out.push(CheckResult::expect("kp.flow_remainder", params, rest.min_tdeg().is_none_or(|t| t >= 2) && families_at_most(&rest, (i + k) as i64 - 3), || {
                format!("remainder {}", rest)
            }));
        }
    }

    for k in 1..max_deg {
        let params = json!({"k": k});
        let wk = engine.w_of_f(k);
        let mut lin = DiffPoly::zero(Frame::F);
        for i in 0..k {
            lin += &f(k - i, i).scale(&brat(binom(k, k - 1 - i)));
        }
        out.push(CheckResult::compare("kp.w_linear_part", params.clone(), &linear_part(&wk), &lin));
        let mut rest = &wk - &lin;
        if k >= 3 {
            let m = Monomial::new(vec![(1, 0), (k - 2, 0)], 0);
            let want = rat((k * (k - 1)) as i64, if k == 3 { 2 } else { 1 });
            out.push(CheckResult::expect("kp.w_quadratic_coefficient", params.clone(), wk.coeff(&m) == want, || {
                format!("coefficient {} expected {}", wk.coeff(&m), want)
            }));
            rest = rest.filter(|x| *x != m);
        }
        out.push(CheckResult::expect("kp.w_remainder", params.clone(), rest.min_tdeg().is_none_or(|t| t >= 2) && families_at_most(&rest, k as i64 - 3), || {
            format!("remainder {}", rest)
        }));

        let fk = engine.f_of_w(k);
        let mut lin = DiffPoly::zero(Frame::W);
        for j in 0..k {
            lin += &w(k - j, j).scale(&(brat(binom(k, j)) * bern.get(j) / int(k as i64)));
        }
        out.push(CheckResult::compare("kp.f_of_w_linear_part", params.clone(), &linear_part(&fk), &lin));
        let mut rest = &fk - &lin;
        if k >= 3 {
            let m = Monomial::new(vec![(1, 0), (k - 2, 0)], 0);
            let want = -rat((k - 1) as i64, (k - 2) as i64) / int(if k == 3 { 2 } else { 1 });
            out.push(CheckResult::expect("kp.f_of_w_quadratic_coefficient", params.clone(), fk.coeff(&m) == want, || {
                format!("coefficient {} expected {}", fk.coeff(&m), want)
            }));
            rest = rest.filter(|x| *x != m);
        }
        out.push(CheckResult::expect("kp.f_of_w_remainder", params, rest.min_tdeg().is_none_or(|t| t >= 2) && families_at_most(&rest, k as i64 - 3), || {
            format!("remainder {}", rest)
        }));
    }

    for k in 1..max_deg.saturating_sub(1) {
        let params = json!({"k": k});
        let s = engine.kp_flow(k, 2);
        let mut head = &f(k + 1, 1).scale(&int(2)) + &f(k, 2);
        if k >= 2 {
            head += &(&f(k - 1, 0) * &f(1, 1)).scale(&int(2 * (k as i64 - 1)));
        }
        let rest = &s - &head;
        out.push(CheckResult::expect("kp.s_k2_structure", params.clone(), rest.min_tdeg().is_none_or(|t| t >= 2) && families_at_most(&rest, k as i64 - 2), || {
            format!("remainder {}", rest)
        }));
        if k >= 2 {
            let r = engine.r(k, 2)?;
            let kk = k as i64;
            let half = if k == 2 { 2 } else { 1 };
            let head = &(&w(k + 1, 0).scale(&rat(2 * kk, kk + 1)) - &(&w(1, 0) * &w(k - 1, 0)).scale(&rat(2 * kk, (kk - 1) * half)))
                - &w(k - 1, 2).scale(&rat(kk, 6));
            let rest = &r - &head;
            out.push(CheckResult::expect("kp.r_k2_structure", params, families_at_most(&rest, k as i64 - 2) && rest.is_even(), || format!("remainder {}", rest)));
        }
    }
    Ok(out)
}

/// `f_k(w(f)) = f_k` for `k <= kmax` and the Bernoulli identity for `a <= amax`.
pub fn check_round_trip(engine: &KpEngine, kmax: u32, amax: u32) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let to_f = engine.w_to_f_rule(kmax);
    for k in 1..=kmax {
        let back = engine.f_of_w(k).substitute(&to_f, Frame::F)?;
        out.push(CheckResult::compare("kp.round_trip", json!({"k": k}), &back, &var(Frame::F, k, 0)));
    }
    let bern = BernoulliCache::new(amax);
    for a in 0..=amax {
        let s = (0..=a).fold(Rational::zero(), |acc, j| acc + brat(binom(a + 1, j)) * bern.get(j));
        let want = if a == 0 { Rational::one() } else { Rational::zero() };
        out.push(CheckResult::expect("kp.bernoulli_identity", json!({"a": a}), s == want, || format!("sum {}", s)));
    }
    Ok(out)
}

/// Mixed flow derivatives of `f_i` agree.
pub fn check_flow_commutativity(engine: &KpEngine, imax: u32, flows: &[u32]) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for i in 1..=imax {
        for &m in flows {
            for &n in flows {
                if m >= n {
                    continue;
                }
                let fi = var(Frame::F, i, 0);
                let mn = engine.flow_derivative(&engine.flow_derivative(&fi, n), m);
                let nm = engine.flow_derivative(&engine.flow_derivative(&fi, m), n);
                out.push(CheckResult::compare("kp.flow_commutativity", json!({"i": i, "m": m, "n": n}), &mn, &nm));
            }
        }
    }
    out
}

/// `d/dT_n res L^a` is a total derivative.
pub fn check_conservation(engine: &KpEngine, amax: u32, nmax: u32) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for a in 1..=amax {
        for n in 1..=nmax {
            let d = engine.flow_derivative(&engine.w_of_f(a), n);
            let bad: Vec<u32> = (1..=a + n).filter(|&i| !d.variational_derivative(i).is_zero()).collect();
            out.push(CheckResult::expect("kp.conservation", json!({"a": a, "n": n}), bad.is_empty(), || format!("nonzero for families {:?}", bad)));
            if a + n <= 6 {
                out.push(CheckResult::compare("kp.residue_route", json!({"a": a, "n": n}), &d, &engine.w_flow_by_residue(a, n)));
            }
        }
    }
    out
}

/// Recomputes every flow and `w` held by `engine` with five more orders of
/// `L` and demands identical results.
pub fn check_window_soundness(engine: &KpEngine) -> Vec<CheckResult> {
    let deep = KpEngine::new(engine.margin() + 5);
    let mut out = Vec::new();
    for (i, n) in engine.computed_flows() {
        out.push(CheckResult::compare("pdo.window_soundness", json!({"flow": [i, n]}), &engine.kp_flow(i, n), &deep.kp_flow(i, n)));
    }
    for k in engine.computed_w() {
        out.push(CheckResult::compare("pdo.window_soundness", json!({"w": k}), &engine.w_of_f(k), &deep.w_of_f(k)));
    }
    out
}

/// `L^k` at a window versus the same power from a deeper `L`.
pub fn check_power_windows(kmax: u32, depth: u32) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for k in 1..=kmax {
        let a = PdOperator::lax_operator(depth).power(k);
        let b = PdOperator::lax_operator(depth + 5).power(k);
        let grades_ok = a.coefficients().all(|(n, c)| c.grade(Grading::Deg) == Grade::Homogeneous(k as i64 - n) || c.is_zero());
        let params = json!({"k": k, "depth": depth});
        out.push(CheckResult::expect("pdo.window_soundness", params.clone(), a.agrees_with(&b), || "coefficients differ on the shallow window".into()));
        out.push(CheckResult::expect("pdo.power_grading", params, grades_ok, || "inhomogeneous coefficient".into()));
    }
    out
}

fn random_poly(rng: &mut ChaCha8Rng, terms: usize) -> DiffPoly {
    let mut p = DiffPoly::zero(Frame::F);
    for _ in 0..terms {
        let nf = rng.gen_range(0..3);
        let factors = (0..nf).map(|_| (rng.gen_range(1..4), rng.gen_range(0..3))).collect();
        p.add_term(Monomial::new(factors, 0), rat(rng.gen_range(-5..6), rng.gen_range(1..4)));
    }
    p
}

fn random_operator(rng: &mut ChaCha8Rng) -> PdOperator {
    let top = rng.gen_range(0..3);
    let low = -rng.gen_range(1..4);
    let coeffs: Vec<(i64, DiffPoly)> = (low..=top).map(|n| (n, random_poly(rng, 2))).collect();
    PdOperator::new(coeffs, top, Some(low)).expect("valid random operator")
}

/// Associativity, adjoint identities and `int res [A, B] = 0` on seeded
/// random operators.
pub fn check_operator_algebra(seed: u64, cases: usize) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for case in 0..cases {
        let (a, b, c) = (random_operator(&mut rng), random_operator(&mut rng), random_operator(&mut rng));
        let params = json!({"seed": seed, "case": case});
        let assoc = a.compose(&b).compose(&c).agrees_with(&a.compose(&b.compose(&c)));
        out.push(CheckResult::expect("pdo.associativity", params.clone(), assoc, || "(AB)C differs from A(BC)".into()));
        let adj = a.adjoint().adjoint().agrees_with(&a) && a.compose(&b).adjoint().agrees_with(&b.adjoint().compose(&a.adjoint()));
        let res = match (a.adjoint().residue(), a.residue()) {
            (Ok(x), Ok(y)) => x == -&y,
            _ => true,
        };
        out.push(CheckResult::expect("pdo.adjoint", params.clone(), adj && res, || "adjoint identity failed".into()));
        let trivial = a.commutator(&b).residue().map_or(true, |r| r.is_variationally_trivial());
        out.push(CheckResult::expect("pdo.commutator_residue", params, trivial, || "residue of a commutator is not a total derivative".into()));
    }
    out
}

/// Structural properties and flow commutativity of a reconstructed table.
pub fn check_q_table(table: &QTable, flows: &[u32]) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let violations = property_violations(table);
    for ((a, b), _) in table.entries() {
        let bad: Vec<String> = violations.iter().filter(|(k, _)| *k == (a, b)).map(|(_, p)| format!("{:?}", p)).collect();
        out.push(CheckResult::expect("recon.properties", json!({"alpha": a, "beta": b}), bad.is_empty(), || format!("violates {}", bad.join(", "))));
    }
    let bad = commutativity_violations(table, flows);
    out.push(CheckResult::expect("recon.flow_commutativity", json!({"flows": flows}), bad.is_empty(), || format!("failing (a, m, n): {:?}", bad)));
    out
}

/// Sizes for [`run_property_suite`].
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub max_weight: u32,
    pub depth_margin: u32,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { max_weight: 6, depth_margin: 0, seed: 0 }
    }
}

/// Runs every check at sizes derived from `config`. Computation errors
/// (non-exact antiderivatives, failed solves) abort with the error.
pub fn run_property_suite(config: SuiteConfig) -> Result<Report> {
    let engine = KpEngine::new(config.depth_margin);
    let w = config.max_weight;
    let mut rec = Reconstructor::new();
    rec.run_to(w)?;
    let mut report = Report::new();
    report.extend(check_lax_square());
    report.extend(check_operator_algebra(config.seed, 8));
    report.extend(check_power_windows(4, 4));
    report.extend(check_symmetry_parity(&engine, w)?);
    report.extend(check_r_grading(&engine, w)?);
    report.extend(check_structure(&engine, w + 1)?);
    report.extend(check_round_trip(&engine, w, 16)?);
    report.extend(check_flow_commutativity(&engine, 4, &[2, 3, 4]));
    report.extend(check_conservation(&engine, 6, 4));
    report.extend(check_miura_fixture()?);
    report.extend(check_q_table(rec.table(), &[2, 3, 4]));
    for s in rec.solves() {
        report.push(CheckResult::pass("recon.unique_solve", json!({"alpha": s.alpha, "beta": s.beta, "unknowns": s.unknowns, "equations": s.equations})));
    }
    report.extend(check_theorem_main(&engine, rec.table(), w)?);
    report.extend(check_window_soundness(&engine));
    Ok(report)
}
