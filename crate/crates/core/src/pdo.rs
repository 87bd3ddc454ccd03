//! Pseudo-differential operators `sum_n a_n Dx^n` over the `f`-frame ring.
//!
//! Every operator records a truncation window: all coefficients of order
//! `>= valid_low` are exactly known, coefficients below it are unknown. A
//! window of `None` means the operator is exact in every order, which is only
//! allowed for differential operators (no negative orders), so products and
//! adjoints are always finite computations.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::ring::{DiffPoly, Frame, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdOperator {
    coeffs: BTreeMap<i64, DiffPoly>,
    top: i64,
    valid_low: Option<i64>,
}

/// `n (n-1) ... (n-l+1) / l!` for any integer `n`.
pub fn binomial(n: i64, l: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..l as i64 {
        acc = acc * Rational::from_integer((n - i).into()) / Rational::from_integer((i + 1).into());
    }
    acc
}

fn max_window(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.max(y)),
    }
}

impl PdOperator {
    /// Builds an operator from `(order, coefficient)` pairs.
    ///
    /// `valid_low = None` declares every omitted coefficient exactly zero and
    /// requires all orders to be nonnegative.
    pub fn new(coeffs: impl IntoIterator<Item = (i64, DiffPoly)>, top: i64, valid_low: Option<i64>) -> Result<Self> {
        let mut map: BTreeMap<i64, DiffPoly> = BTreeMap::new();
        for (n, c) in coeffs {
            if c.frame() != Frame::F {
                return Err(Error::FrameMismatch { left: c.frame(), right: Frame::F });
            }
            if n > top {
                return Err(Error::InvalidArgument(format!("coefficient of order {} above top order {}", n, top)));
            }
            if let Some(low) = valid_low {
                if n < low {
                    return Err(Error::InvalidArgument(format!("coefficient of order {} below valid window {}", n, low)));
                }
            } else if n < 0 {
                return Err(Error::InvalidArgument("an operator exact in all orders cannot have negative orders".into()));
            }
            let slot = map.entry(n).or_insert_with(|| DiffPoly::zero(Frame::F));
            *slot += &c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(PdOperator { coeffs: map, top, valid_low })
    }

    /// `c Dx^n`; negative `n` needs an explicit window.
    pub fn monomial(c: DiffPoly, n: i64, valid_low: Option<i64>) -> Result<Self> {
        Self::new([(n, c)], n, valid_low)
    }

    pub fn identity() -> Self {
        Self::dx_power(0)
    }

    /// `Dx^n` for `n >= 0`.
    pub fn dx_power(n: u32) -> Self {
        Self::new([(n as i64, DiffPoly::one(Frame::F))], n as i64, None).expect("valid")
    }

    /// `L = Dx + f_1 Dx^-1 + ... + f_depth Dx^-depth`, exact down to order `-depth`.
    pub fn lax_operator(depth: u32) -> Self {
        assert!(depth >= 1, "Lax operator depth must be at least 1");
        let mut coeffs = vec![(1, DiffPoly::one(Frame::F))];
        coeffs.extend((1..=depth).map(|i| (-(i as i64), DiffPoly::var(Frame::F, i, 0))));
        Self::new(coeffs, 1, Some(-(depth as i64))).expect("valid")
    }

    pub fn top_order(&self) -> i64 {
        self.top
    }

    pub fn valid_low(&self) -> Option<i64> {
        self.valid_low
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (i64, &DiffPoly)> + '_ {
        self.coeffs.iter().rev().map(|(&n, c)| (n, c))
    }

    /// Coefficient of `Dx^n`, failing if order `n` lies outside the window.
    pub fn coefficient(&self, n: i64) -> Result<DiffPoly> {
        if let Some(low) = self.valid_low {
            if n < low {
                return Err(Error::WindowViolation { needed: n, valid_low: low });
            }
        }
        Ok(self.coeffs.get(&n).cloned().unwrap_or_else(|| DiffPoly::zero(Frame::F)))
    }

    pub fn residue(&self) -> Result<DiffPoly> {
        self.coefficient(-1)
    }

    pub fn plus_part(&self) -> Result<PdOperator> {
        if let Some(low) = self.valid_low {
            if low > 0 {
                return Err(Error::WindowViolation { needed: 0, valid_low: low });
            }
        }
        Ok(PdOperator {
            coeffs: self.coeffs.range(0..).map(|(&n, c)| (n, c.clone())).collect(),
            top: self.top.max(0),
            valid_low: None,
        })
    }

    /// Orders `>= low` only; the window shrinks accordingly.
    pub fn truncate(&self, low: i64) -> PdOperator {
        PdOperator {
            coeffs: self.coeffs.range(low..).map(|(&n, c)| (n, c.clone())).collect(),
            top: self.top,
            valid_low: Some(max_window(self.valid_low, Some(low)).unwrap()),
        }
    }

    pub fn scale(&self, c: &Rational) -> PdOperator {
        let coeffs: BTreeMap<i64, DiffPoly> =
            if c.is_zero() { BTreeMap::new() } else { self.coeffs.iter().map(|(&n, p)| (n, p.scale(c))).collect() };
        PdOperator { coeffs, top: self.top, valid_low: self.valid_low }
    }

    pub fn add(&self, other: &PdOperator) -> PdOperator {
        self.add_scaled(other, &Rational::one())
    }

    pub fn sub(&self, other: &PdOperator) -> PdOperator {
        self.add_scaled(other, &-Rational::one())
    }

    fn add_scaled(&self, other: &PdOperator, c: &Rational) -> PdOperator {
        let valid_low = max_window(self.valid_low, other.valid_low);
        let mut coeffs = self.coeffs.clone();
        for (&n, p) in &other.coeffs {
            let slot = coeffs.entry(n).or_insert_with(|| DiffPoly::zero(Frame::F));
            *slot += &p.scale(c);
        }
        let low = valid_low.unwrap_or(i64::MIN);
        coeffs.retain(|&n, p| n >= low && !p.is_zero());
        PdOperator { coeffs, top: self.top.max(other.top), valid_low }
    }

    /// Operator product via `Dx^k o a = sum_l binom(k, l) (Dx^l a) Dx^(k-l)`.
    ///
    /// The result is exact on orders `>= max(A.low + B.top, A.top + B.low)`
    /// and nothing below that window is computed.
    pub fn compose(&self, other: &PdOperator) -> PdOperator {
        let valid_low = max_window(self.valid_low.map(|x| x + other.top), other.valid_low.map(|y| self.top + y));
        let mut out: BTreeMap<i64, DiffPoly> = BTreeMap::new();
        for (&m, b) in &other.coeffs {
            // derivatives of b are shared across every coefficient of self
            let mut derivs: Vec<DiffPoly> = vec![b.clone()];
            for (&n, a) in &self.coeffs {
                let mut l: u32 = 0;
                loop {
                    let order = n + m - l as i64;
                    if valid_low.is_some_and(|low| order < low) {
                        break;
                    }
                    if n >= 0 && l as i64 > n {
                        break;
                    }
                    assert!(valid_low.is_some() || n >= 0, "infinite expansion of an exact operator");
                    while derivs.len() <= l as usize {
                        let next = derivs.last().unwrap().total_derivative();
                        derivs.push(next);
                    }
                    let d = &derivs[l as usize];
                    if d.is_zero() {
                        break;
                    }
                    let coef = binomial(n, l);
                    if !coef.is_zero() {
                        let slot = out.entry(order).or_insert_with(|| DiffPoly::zero(Frame::F));
                        *slot += &(a * d).scale(&coef);
                    }
                    l += 1;
                }
            }
        }
        out.retain(|_, p| !p.is_zero());
        PdOperator { coeffs: out, top: self.top + other.top, valid_low }
    }

    pub fn power(&self, k: u32) -> PdOperator {
        assert!(k >= 1, "power exponent must be at least 1");
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.compose(self);
        }
        acc
    }

    pub fn commutator(&self, other: &PdOperator) -> PdOperator {
        self.compose(other).sub(&other.compose(self))
    }

    /// The involution `sum a_n Dx^n -> sum (-Dx)^n o a_n`; keeps the window.
    pub fn adjoint(&self) -> PdOperator {
        let mut out: BTreeMap<i64, DiffPoly> = BTreeMap::new();
        for (&n, a) in &self.coeffs {
            let sign = if n.rem_euclid(2) == 0 { Rational::one() } else { -Rational::one() };
            let mut d = a.clone();
            let mut l: u32 = 0;
            loop {
                let order = n - l as i64;
                if self.valid_low.is_some_and(|low| order < low) || (n >= 0 && l as i64 > n) || d.is_zero() {
                    break;
                }
                let coef = binomial(n, l) * &sign;
                if !coef.is_zero() {
                    let slot = out.entry(order).or_insert_with(|| DiffPoly::zero(Frame::F));
                    *slot += &d.scale(&coef);
                }
                d = d.total_derivative();
                l += 1;
            }
        }
        out.retain(|_, p| !p.is_zero());
        PdOperator { coeffs: out, top: self.top, valid_low: self.valid_low }
    }

    /// Agreement on the common window of two operators.
    pub fn agrees_with(&self, other: &PdOperator) -> bool {
        let low = max_window(self.valid_low, other.valid_low).unwrap_or(i64::MIN);
        let top = self.top.max(other.top);
        let zero = DiffPoly::zero(Frame::F);
        let orders: std::collections::BTreeSet<i64> =
            self.coeffs.keys().chain(other.coeffs.keys()).copied().filter(|&n| n >= low && n <= top).collect();
        orders.into_iter().all(|n| self.coeffs.get(&n).unwrap_or(&zero) == other.coeffs.get(&n).unwrap_or(&zero))
    }
}

/// One line per stored order, descending, then the window footer.
impl fmt::Display for PdOperator {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, c) in self.coefficients() {
            writeln!(out, "order {}: {}", n, c)?;
        }
        match self.valid_low {
            Some(low) => write!(out, "validLow: {}", low),
            None => write!(out, "validLow: -inf"),
        }
    }
}
