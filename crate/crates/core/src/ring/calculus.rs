use std::collections::BTreeMap;

use num::{One, Zero};

use super::{DiffPoly, Frame, JetVariable, Monomial, Rational};
use crate::error::{Error, Result};

/// Images of the jet-free variables `x_a` under a change of variables.
/// Derivatives follow automatically: `x_a^(k) -> Dx^k(image(a))`.
pub type SubstitutionRule = BTreeMap<u32, DiffPoly>;

impl DiffPoly {
    /// The total x-derivative `Dx = sum x_a^(k+1) d/dx_a^(k)`.
    pub fn total_derivative(&self) -> DiffPoly {
        let mut out = DiffPoly::zero(self.frame);
        for (m, c) in &self.terms {
            derive_monomial_into(&mut out, m, c);
        }
        out
    }

    pub fn total_derivative_n(&self, n: u32) -> DiffPoly {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.total_derivative();
        }
        p
    }

    /// Partial derivative with respect to one jet variable. A variable from
    /// another frame gives zero.
    pub fn partial_derivative(&self, x: JetVariable) -> DiffPoly {
        if x.frame != self.frame {
            return DiffPoly::zero(self.frame);
        }
        self.partial(x.family, x.jet)
    }

    pub(crate) fn partial(&self, family: u32, jet: u32) -> DiffPoly {
        let mut out = DiffPoly::zero(self.frame);
        for (m, c) in &self.terms {
            let r = m.multiplicity(family, jet);
            if r > 0 {
                let rest = m.without(family, jet).unwrap();
                out.add_term(rest, c * Rational::from_integer(r.into()));
            }
        }
        out
    }

    /// Euler-Lagrange operator `sum_k (-Dx)^k d/dx_family^(k)`.
    pub fn variational_derivative(&self, family: u32) -> DiffPoly {
        let top = self
            .terms
            .keys()
            .flat_map(|m| m.factors().iter())
            .filter(|&&(a, _)| a == family)
            .map(|&(_, k)| k)
            .max();
        let mut out = DiffPoly::zero(self.frame);
        let Some(top) = top else {
            return out;
        };
        for k in 0..=top {
            let d = self.partial(family, k);
            if d.is_zero() {
                continue;
            }
            let d = d.total_derivative_n(k);
            let sign = if k % 2 == 0 { Rational::one() } else { -Rational::one() };
            out.add_scaled(&d, &sign);
        }
        out
    }

    /// True when all variational derivatives vanish, i.e. the polynomial is a
    /// total derivative plus a constant.
    pub fn is_variationally_trivial(&self) -> bool {
        let families: std::collections::BTreeSet<u32> = self.variables().into_iter().map(|(a, _)| a).collect();
        families.into_iter().all(|a| self.variational_derivative(a).is_zero())
    }

    /// Returns `X` with `Dx X = self` and zero constant term.
    ///
    /// Eliminates the term whose top variable is largest under the
    /// `(jet, family)` order: if that term is `c x_a^(K+1) m` with `m` of jet
    /// order at most `K`, subtracting `Dx(c/(r+1) x_a^(K) * m)` (where `r` is
    /// the multiplicity of `x_a^(K)` in `m`) removes it without creating any
    /// term of equal or larger top variable. Inputs outside `Im Dx` are
    /// detected by the shape of the top term; the result is checked by
    /// differentiating it again.
    pub fn antiderivative(&self) -> Result<DiffPoly> {
        if !self.constant_term().is_zero() {
            return Err(Error::NotExact(format!("nonzero constant term in {}", self)));
        }
        let mut rest = self.clone();
        let mut result = DiffPoly::zero(self.frame);
        let mut last: Option<((u32, u32), usize)> = None;
        while !rest.is_zero() {
            let (key, count) = top_key(&rest);
            if let Some(prev) = last {
                if key > prev.0 || (key == prev.0 && count >= prev.1) {
                    return Err(Error::NotExact(format!("elimination stalled on {}", rest)));
                }
            }
            last = Some((key, count));
            let (jet, family) = key;
            let (m, c) = rest
                .terms
                .iter()
                .find(|(m, _)| top_var(m) == Some(key))
                .map(|(m, c)| (m.clone(), c.clone()))
                .expect("top term exists");
            if jet == 0 {
                return Err(Error::NotExact(format!("term {} has no derivative variable", term_str(rest.frame, &m, &c))));
            }
            let cofactor = m.without(family, jet).expect("top variable present");
            if cofactor.factors().iter().any(|&(a, k)| k > jet - 1 || (k == jet - 1 && a > family)) {
                return Err(Error::NotExact(format!("term {} is not the derivative image of any monomial", term_str(rest.frame, &m, &c))));
            }
            let r = cofactor.multiplicity(family, jet - 1);
            let cand_m = cofactor.times_var(family, jet - 1);
            let cand_c = c / Rational::from_integer((r as i64 + 1).into());
            let mut d = DiffPoly::zero(self.frame);
            derive_monomial_into(&mut d, &cand_m, &cand_c);
            rest.add_scaled(&d, &-Rational::one());
            result.add_term(cand_m, cand_c);
        }
        assert_eq!(&result.total_derivative(), self, "antiderivative failed re-derivation");
        Ok(result)
    }

    /// Substitutes `x_a^(k) -> Dx^k(rule[a])` and returns a polynomial in
    /// `target`. Powers of `eps` pass through unchanged.
    pub fn substitute(&self, rule: &SubstitutionRule, target: Frame) -> Result<DiffPoly> {
        for img in rule.values() {
            if img.frame != target {
                return Err(Error::FrameMismatch { left: img.frame, right: target });
            }
        }
        let mut jets: BTreeMap<(u32, u32), DiffPoly> = BTreeMap::new();
        for (a, k) in self.variables() {
            let img = rule.get(&a).ok_or(Error::MissingRule(a))?;
            jets.entry((a, k)).or_insert_with(|| img.total_derivative_n(k));
        }
        let mut out = DiffPoly::zero(target);
        for (m, c) in &self.terms {
            let mut prod = DiffPoly::term(target, Monomial::one().with_eps(m.eps_power()), c.clone());
            for (f, r) in m.powers() {
                let base = &jets[&f];
                for _ in 0..r {
                    prod = &prod * base;
                }
            }
            out.add_scaled(&prod, &Rational::one());
        }
        Ok(out)
    }
}

/// Inverts a triangular change of variables.
///
/// `images[k-1]` expresses the new coordinate `y_k` in the old frame as
/// `c_k x_k + (terms in x_1..x_{k-1} and their jets)` with `c_k != 0`.
/// `known` may carry already computed inverses `x_1(y) .. x_j(y)`, which are
/// reused. Returns `x_k(y)` in `target` for every `k <= images.len()`.
pub fn invert_triangular(images: &[DiffPoly], known: &[DiffPoly], target: Frame) -> Result<Vec<DiffPoly>> {
    let mut out: Vec<DiffPoly> = known.to_vec();
    for (idx, img) in images.iter().enumerate().skip(known.len()) {
        let k = idx as u32 + 1;
        let lead = img.coeff(&Monomial::var(k, 0));
        if lead.is_zero() {
            return Err(Error::NotTriangular(format!("image of family {} has no linear x_{} term: {}", k, k, img)));
        }
        let rest = img.filter(|m| *m != Monomial::var(k, 0));
        if rest.terms().any(|(m, _)| m.max_family() >= k) {
            return Err(Error::NotTriangular(format!("image of family {} involves families >= {}: {}", k, k, img)));
        }
        let rule: SubstitutionRule = out.iter().enumerate().map(|(i, p)| (i as u32 + 1, p.clone())).collect();
        let rest_y = rest.substitute(&rule, target)?;
        let x_k = (&DiffPoly::var(target, k, 0) - &rest_y).scale(&(Rational::one() / lead));
        out.push(x_k);
    }
    Ok(out)
}

fn derive_monomial_into(out: &mut DiffPoly, m: &Monomial, c: &Rational) {
    for ((a, k), r) in m.powers() {
        let n = m.without(a, k).unwrap().times_var(a, k + 1);
        out.add_term(n, c * Rational::from_integer((r as i64).into()));
    }
}

/// Largest variable of a monomial under the `(jet, family)` order.
fn top_var(m: &Monomial) -> Option<(u32, u32)> {
    m.factors().iter().map(|&(a, k)| (k, a)).max()
}

fn top_key(p: &DiffPoly) -> ((u32, u32), usize) {
    let mut best: Option<(u32, u32)> = None;
    let mut count = 0;
    for m in p.terms.keys() {
        let t = top_var(m).unwrap_or((0, 0));
        match best {
            Some(b) if t < b => {}
            Some(b) if t == b => count += 1,
            _ => {
                best = Some(t);
                count = 1;
            }
        }
    }
    (best.unwrap_or((0, 0)), count)
}

fn term_str(frame: Frame, m: &Monomial, c: &Rational) -> String {
    DiffPoly::term(frame, m.clone(), c.clone()).to_string()
}
