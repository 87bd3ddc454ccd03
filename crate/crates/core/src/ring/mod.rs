//! Graded differential polynomial rings over the rationals.
//!
//! A [`DiffPoly`] is a finite sum of monomials in jet variables `x_a^(k)`
//! (family `a >= 1`, derivative order `k >= 0`) and the formal parameter
//! `eps`, with exact rational coefficients. All variables of one polynomial
//! live in a single coordinate [`Frame`].
//!
//! Three gradings are carried by every monomial:
//!
//! * `degDx`: sum of jet orders, with `eps` counting `-1`;
//! * `deg`: sum of `family + 1 + jet` over the factors, `eps` counts `0`;
//! * `tdeg`: number of factors, `eps` counts `0`.

mod calculus;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num::{BigInt, One, Signed, Zero};

use crate::error::{Error, Result};

pub use calculus::{invert_triangular, SubstitutionRule};
pub use text::TermJson;

pub type Rational = num::BigRational;

/// Builds the rational `num/den`. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Frame {
    U,
    V,
    F,
    W,
}

impl Frame {
    pub fn letter(self) -> char {
        match self {
            Frame::U => 'u',
            Frame::V => 'v',
            Frame::F => 'f',
            Frame::W => 'w',
        }
    }

    pub fn from_letter(c: char) -> Option<Frame> {
        match c {
            'u' => Some(Frame::U),
            'v' => Some(Frame::V),
            'f' => Some(Frame::F),
            'w' => Some(Frame::W),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetVariable {
    pub frame: Frame,
    pub family: u32,
    pub jet: u32,
}

impl JetVariable {
    pub fn new(frame: Frame, family: u32, jet: u32) -> Self {
        assert!(family >= 1, "jet variable families start at 1");
        JetVariable { frame, family, jet }
    }
}

/// A product of jet variables and a power of `eps`.
///
/// Factors are kept sorted by `(family, jet)` with repetition; the derived
/// ordering is lexicographic on that list with the `eps` power compared last.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    factors: Vec<(u32, u32)>,
    eps: u32,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(family: u32, jet: u32) -> Self {
        assert!(family >= 1);
        Monomial { factors: vec![(family, jet)], eps: 0 }
    }

    pub fn new(mut factors: Vec<(u32, u32)>, eps: u32) -> Self {
        assert!(factors.iter().all(|&(a, _)| a >= 1));
        factors.sort_unstable();
        Monomial { factors, eps }
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.factors
    }

    pub fn eps_power(&self) -> u32 {
        self.eps
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty() && self.eps == 0
    }

    pub fn with_eps(&self, eps: u32) -> Self {
        Monomial { factors: self.factors.clone(), eps }
    }

    pub fn multiplicity(&self, family: u32, jet: u32) -> usize {
        self.factors.iter().filter(|&&f| f == (family, jet)).count()
    }

    /// Removes one copy of `(family, jet)`; `None` if absent.
    pub fn without(&self, family: u32, jet: u32) -> Option<Self> {
        let pos = self.factors.iter().position(|&f| f == (family, jet))?;
        let mut factors = self.factors.clone();
        factors.remove(pos);
        Some(Monomial { factors, eps: self.eps })
    }

    pub fn times_var(&self, family: u32, jet: u32) -> Self {
        let pos = self.factors.partition_point(|&f| f <= (family, jet));
        let mut factors = self.factors.clone();
        factors.insert(pos, (family, jet));
        Monomial { factors, eps: self.eps }
    }

    pub fn mul(&self, other: &Monomial) -> Self {
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            if self.factors[i] <= other.factors[j] {
                factors.push(self.factors[i]);
                i += 1;
            } else {
                factors.push(other.factors[j]);
                j += 1;
            }
        }
        factors.extend_from_slice(&self.factors[i..]);
        factors.extend_from_slice(&other.factors[j..]);
        Monomial { factors, eps: self.eps + other.eps }
    }

    pub fn jet_total(&self) -> u32 {
        self.factors.iter().map(|&(_, k)| k).sum()
    }

    pub fn deg_dx(&self) -> i64 {
        self.jet_total() as i64 - self.eps as i64
    }

    pub fn deg(&self) -> i64 {
        self.factors.iter().map(|&(a, k)| (a + 1 + k) as i64).sum()
    }

    pub fn tdeg(&self) -> i64 {
        self.factors.len() as i64
    }

    pub fn grade(&self, g: Grading) -> i64 {
        match g {
            Grading::DegDx => self.deg_dx(),
            Grading::Deg => self.deg(),
            Grading::TDeg => self.tdeg(),
        }
    }

    pub fn max_family(&self) -> u32 {
        self.factors.iter().map(|&(a, _)| a).max().unwrap_or(0)
    }

    pub fn max_jet(&self) -> u32 {
        self.factors.iter().map(|&(_, k)| k).max().unwrap_or(0)
    }

    /// Distinct `(family, jet)` pairs with their multiplicities.
    pub fn powers(&self) -> impl Iterator<Item = ((u32, u32), usize)> + '_ {
        let mut i = 0;
        std::iter::from_fn(move || {
            let f = *self.factors.get(i)?;
            let mut n = 0;
            while self.factors.get(i) == Some(&f) {
                i += 1;
                n += 1;
            }
            Some((f, n))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Grading {
    DegDx,
    Deg,
    TDeg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grade {
    Homogeneous(i64),
    NotHomogeneous,
    /// The zero polynomial is homogeneous of every grade.
    Zero,
}

/// A differential polynomial: a canonical sparse map from monomials to
/// nonzero rationals within one frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffPoly {
    frame: Frame,
    terms: BTreeMap<Monomial, Rational>,
}

impl DiffPoly {
    pub fn zero(frame: Frame) -> Self {
        DiffPoly { frame, terms: BTreeMap::new() }
    }

    pub fn constant(frame: Frame, c: Rational) -> Self {
        Self::term(frame, Monomial::one(), c)
    }

    pub fn one(frame: Frame) -> Self {
        Self::constant(frame, Rational::one())
    }

    /// The jet variable `x_family^(jet)`.
    pub fn var(frame: Frame, family: u32, jet: u32) -> Self {
        Self::term(frame, Monomial::var(family, jet), Rational::one())
    }

    pub fn eps_pow(frame: Frame, n: u32) -> Self {
        Self::term(frame, Monomial::one().with_eps(n), Rational::one())
    }

    pub fn term(frame: Frame, m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        DiffPoly { frame, terms }
    }

    pub fn from_terms(frame: Frame, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = DiffPoly::zero(frame);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, Rational> {
        self.terms
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one())
    }

    /// Reinterprets the same monomials in another frame.
    pub fn relabel(self, frame: Frame) -> Self {
        DiffPoly { frame, terms: self.terms }
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_frame(&self, other: &DiffPoly) -> Result<()> {
        if self.frame != other.frame {
            return Err(Error::FrameMismatch { left: self.frame, right: other.frame });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &DiffPoly) -> Result<DiffPoly> {
        self.check_frame(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &Rational::one());
        Ok(out)
    }

    pub fn try_sub(&self, other: &DiffPoly) -> Result<DiffPoly> {
        self.check_frame(other)?;
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        Ok(out)
    }

    pub fn try_mul(&self, other: &DiffPoly) -> Result<DiffPoly> {
        self.check_frame(other)?;
        let mut out = DiffPoly::zero(self.frame);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    /// `self += c * other`, ignoring frames.
    pub(crate) fn add_scaled(&mut self, other: &DiffPoly, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (m, k) in &other.terms {
            self.add_term(m.clone(), k * c);
        }
    }

    pub fn scale(&self, c: &Rational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero(self.frame);
        }
        DiffPoly {
            frame: self.frame,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero(self.frame);
        }
        DiffPoly::from_terms(self.frame, self.terms.iter().map(|(n, k)| (n.mul(m), k * c)))
    }

    pub fn pow(&self, k: u32) -> DiffPoly {
        let mut out = DiffPoly::one(self.frame);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn grade(&self, g: Grading) -> Grade {
        let mut grades = self.terms.keys().map(|m| m.grade(g));
        let Some(first) = grades.next() else {
            return Grade::Zero;
        };
        if grades.all(|d| d == first) {
            Grade::Homogeneous(first)
        } else {
            Grade::NotHomogeneous
        }
    }

    /// Largest family index present, 0 for a constant.
    pub fn max_family(&self) -> u32 {
        self.terms.keys().map(Monomial::max_family).max().unwrap_or(0)
    }

    pub fn max_jet(&self) -> u32 {
        self.terms.keys().map(Monomial::max_jet).max().unwrap_or(0)
    }

    pub fn min_tdeg(&self) -> Option<i64> {
        self.terms.keys().map(Monomial::tdeg).min()
    }

    /// All jet variables occurring, as `(family, jet)` pairs.
    pub fn variables(&self) -> BTreeSet<(u32, u32)> {
        self.terms.keys().flat_map(|m| m.factors().iter().copied()).collect()
    }

    /// Keeps the terms whose monomial satisfies `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&Monomial) -> bool) -> DiffPoly {
        DiffPoly {
            frame: self.frame,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Applies `x_a^(k) -> (-1)^k x_a^(k)`.
    pub fn parity_flip(&self) -> DiffPoly {
        DiffPoly {
            frame: self.frame,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), if m.jet_total() % 2 == 1 { -c } else { c.clone() }))
                .collect(),
        }
    }

    /// Every monomial has even total jet order.
    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.jet_total() % 2 == 0)
    }

    /// Sets `eps = 1`, merging coefficients.
    pub fn set_eps_one(&self) -> DiffPoly {
        DiffPoly::from_terms(self.frame, self.terms.iter().map(|(m, c)| (m.with_eps(0), c.clone())))
    }

    /// Multiplies each monomial by the power of `eps` that brings its
    /// `degDx` to `target`. The input must be free of `eps`.
    pub fn homogenize_eps(&self, target: i64) -> Result<DiffPoly> {
        let mut out = DiffPoly::zero(self.frame);
        for (m, c) in &self.terms {
            if m.eps_power() != 0 {
                return Err(Error::InvalidArgument(format!("homogenize_eps: input already contains eps in {}", self)));
            }
            let need = m.jet_total() as i64 - target;
            if need < 0 {
                return Err(Error::NegativeEpsPower(DiffPoly::term(self.frame, m.clone(), c.clone()).to_string()));
            }
            out.add_term(m.with_eps(need as u32), c.clone());
        }
        Ok(out)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.factors().is_empty())
    }

    pub fn max_abs_height(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.numer().abs().max(c.denom().clone()))
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

impl<'a> Add<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    /// Panics on a frame mismatch; use [`DiffPoly::try_add`] to handle it.
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        self.try_add(rhs).expect("DiffPoly addition")
    }
}

impl<'a> Sub<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        self.try_sub(rhs).expect("DiffPoly subtraction")
    }
}

impl<'a> Mul<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        self.try_mul(rhs).expect("DiffPoly multiplication")
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        self.scale(&-Rational::one())
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}

impl AddAssign<&DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: &DiffPoly) {
        self.check_frame(rhs).expect("DiffPoly addition");
        self.add_scaled(rhs, &Rational::one());
    }
}

impl SubAssign<&DiffPoly> for DiffPoly {
    fn sub_assign(&mut self, rhs: &DiffPoly) {
        self.check_frame(rhs).expect("DiffPoly subtraction");
        self.add_scaled(rhs, &-Rational::one());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(a: u32, k: u32) -> DiffPoly {
        DiffPoly::var(Frame::F, a, k)
    }

    fn v(a: u32, k: u32) -> DiffPoly {
        DiffPoly::var(Frame::V, a, k)
    }

    fn eps2(frame: Frame) -> DiffPoly {
        DiffPoly::eps_pow(frame, 2)
    }

    #[test]
    fn additive_inverse_is_zero() {
        let p = v(1, 0);
        assert!((&p + &-&p).is_zero());
    }

    #[test]
    fn square_of_variable() {
        let p = &f(1, 0) * &f(1, 0);
        assert_eq!(p.len(), 1);
        let (m, c) = p.terms().next().unwrap();
        assert_eq!(m.factors(), &[(1, 0), (1, 0)]);
        assert_eq!(c, &int(1));
    }

    #[test]
    fn product_expands() {
        let a = &f(2, 0).scale(&int(2)) + &f(1, 1);
        let got = &a * &f(1, 0);
        let want = &(&f(1, 0) * &f(2, 0)).scale(&int(2)) + &(&f(1, 0) * &f(1, 1));
        assert_eq!(got, want);
    }

    #[test]
    fn frame_mismatch_is_an_error() {
        let err = f(1, 0).try_add(&v(1, 0)).unwrap_err();
        assert!(matches!(err, Error::FrameMismatch { .. }));
        assert!(f(1, 0).try_mul(&v(1, 0)).is_err());
    }

    #[test]
    fn canonical_form_drops_zeros() {
        let p = &(&f(1, 0) + &f(2, 0)) - &f(2, 0);
        assert_eq!(p, f(1, 0));
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn gradings_of_seed() {
        // v3 + v1^2/2 - eps^2/12 v1''
        let q = &(&v(3, 0) + &(&v(1, 0) * &v(1, 0)).scale(&rat(1, 2))) - &(&eps2(Frame::V) * &v(1, 2)).scale(&rat(1, 12));
        assert_eq!(q.grade(Grading::Deg), Grade::Homogeneous(4));
        assert_eq!(q.grade(Grading::DegDx), Grade::Homogeneous(0));
        assert_eq!(q.grade(Grading::TDeg), Grade::NotHomogeneous);
        let e = &eps2(Frame::V) * &v(1, 2);
        assert_eq!(e.grade(Grading::DegDx), Grade::Homogeneous(0));
        let mixed = &(&v(1, 0) * &v(1, 0)) + &v(3, 0);
        assert_eq!(mixed.grade(Grading::TDeg), Grade::NotHomogeneous);
        assert_eq!(DiffPoly::zero(Frame::V).grade(Grading::Deg), Grade::Zero);
    }

    #[test]
    fn monomial_order_is_lexicographic_with_eps_last() {
        let a = Monomial::new(vec![(1, 0), (1, 0)], 0);
        let b = Monomial::new(vec![(1, 2)], 2);
        let c = Monomial::new(vec![(3, 0)], 0);
        assert!(a < b && b < c);
        assert!(Monomial::new(vec![(1, 2)], 0) < Monomial::new(vec![(1, 2)], 2));
    }

    #[test]
    fn homogenize_and_set_eps_one_are_inverse() {
        let p = &(&f(1, 2).scale(&rat(-1, 3)) + &f(3, 0)) + &(&f(1, 0) * &f(1, 0));
        let h = p.homogenize_eps(0).unwrap();
        assert_eq!(h.grade(Grading::DegDx), Grade::Homogeneous(0));
        assert_eq!(h.coeff(&Monomial::new(vec![(1, 2)], 2)), rat(-1, 3));
        assert_eq!(h.set_eps_one(), p);
        assert!(matches!(f(1, 0).homogenize_eps(1), Err(Error::NegativeEpsPower(_))));
    }

    #[test]
    fn parity_flip_negates_odd_terms() {
        let p = &f(1, 1) + &f(1, 2);
        assert_eq!(p.parity_flip(), &f(1, 2) - &f(1, 1));
        assert!(!p.is_even());
        assert!(f(1, 2).is_even());
    }
}
