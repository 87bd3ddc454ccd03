//! The KP hierarchy in Lax form.
//!
//! Flows `df_i/dT_n = S(i, n)` are read off `[(L^n)_+, L]`; the coordinates
//! `w_k = res L^k` turn every flow into a conservation law
//! `dw_a/dT_b = Dx R(a, b)`.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::sync::Mutex;

use num::{BigInt, One, Zero};
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::pdo::PdOperator;
use crate::ring::{invert_triangular, DiffPoly, Frame, Grade, Grading, Rational, SubstitutionRule};

/// Thread-safe write-once cache. A second write of the same key must carry
/// an identical value.
pub(crate) struct Memo<K, V> {
    map: Mutex<HashMap<K, V>>,
}

impl<K: Eq + Hash + Clone + std::fmt::Debug, V: Clone + PartialEq> Memo<K, V> {
    pub(crate) fn new() -> Self {
        Memo { map: Mutex::new(HashMap::new()) }
    }

    pub(crate) fn get(&self, k: &K) -> Option<V> {
        self.map.lock().unwrap().get(k).cloned()
    }

    pub(crate) fn keys(&self) -> Vec<K> {
        self.map.lock().unwrap().keys().cloned().collect()
    }

    pub(crate) fn insert(&self, k: K, v: V) -> V {
        let mut map = self.map.lock().unwrap();
        if let Some(old) = map.get(&k) {
            assert!(*old == v, "conflicting cache writes for {:?}", k);
        } else {
            map.insert(k, v.clone());
        }
        v
    }
}

/// Bernoulli numbers with `B_1 = -1/2`, fixed by
/// `sum_{j=0}^{a} C(a+1, j) B_j = [a == 0]`.
#[derive(Clone, Debug)]
pub struct BernoulliCache {
    values: Vec<Rational>,
}

pub fn binom(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

impl BernoulliCache {
    pub fn new(max: u32) -> Self {
        let mut values: Vec<Rational> = Vec::with_capacity(max as usize + 1);
        for a in 0..=max {
            let target = if a == 0 { Rational::one() } else { Rational::zero() };
            let partial: Rational =
                (0..a).map(|j| Rational::from_integer(binom(a + 1, j)) * &values[j as usize]).fold(Rational::zero(), |x, y| x + y);
            values.push((target - partial) / Rational::from_integer(binom(a + 1, a)));
        }
        let cache = BernoulliCache { values };
        assert!(cache.validate(), "Bernoulli recursion violated its defining identity");
        cache
    }

    pub fn get(&self, j: u32) -> &Rational {
        &self.values[j as usize]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Re-checks the defining identity for every cached index.
    pub fn validate(&self) -> bool {
        (0..self.values.len() as u32).all(|a| {
            let s = (0..=a).map(|j| Rational::from_integer(binom(a + 1, j)) * &self.values[j as usize]).fold(Rational::zero(), |x, y| x + y);
            s == if a == 0 { Rational::one() } else { Rational::zero() }
        })
    }
}

/// Computes and caches KP quantities. `margin` extra orders of `L` are kept
/// beyond the minimum each residue needs; results never depend on it.
pub struct KpEngine {
    margin: u32,
    flows: Memo<(u32, u32), DiffPoly>,
    w: Memo<u32, DiffPoly>,
    f_of_w: Mutex<Vec<DiffPoly>>,
    r: Memo<(u32, u32), DiffPoly>,
}

impl Default for KpEngine {
    fn default() -> Self {
        Self::new(0)
    }
}

impl KpEngine {
    pub fn new(margin: u32) -> Self {
        KpEngine { margin, flows: Memo::new(), w: Memo::new(), f_of_w: Mutex::new(Vec::new()), r: Memo::new() }
    }

    pub fn margin(&self) -> u32 {
        self.margin
    }

    /// Every `(i, n)` whose flow `S(i, n)` has been computed, sorted.
    pub fn computed_flows(&self) -> Vec<(u32, u32)> {
        let mut keys = self.flows.keys();
        keys.sort();
        keys
    }

    /// Every `k` whose `w_k` has been computed, sorted.
    pub fn computed_w(&self) -> Vec<u32> {
        let mut keys = self.w.keys();
        keys.sort();
        keys
    }

    /// `L^k` truncated so that orders `>= lowest` are exact.
    pub fn lax_power(&self, k: u32, lowest: i64) -> PdOperator {
        // L^k is exact down to k - 1 - depth
        let depth = (k as i64 - 1 - lowest).max(1) as u32 + self.margin;
        PdOperator::lax_operator(depth).power(k)
    }

    /// `S(i, n)`: the coefficient of `Dx^-i` in `[(L^n)_+, L]`.
    pub fn kp_flow(&self, i: u32, n: u32) -> DiffPoly {
        assert!(i >= 1 && n >= 1);
        if let Some(s) = self.flows.get(&(i, n)) {
            return s;
        }
        self.flows_upto(n, i);
        self.flows.get(&(i, n)).expect("flow computed")
    }

    /// Computes `S(j, n)` for all `j <= imax` from one commutator.
    pub fn flows_upto(&self, n: u32, imax: u32) {
        if (1..=imax).all(|j| self.flows.get(&(j, n)).is_some()) {
            return;
        }
        let depth = n + imax + self.margin;
        let l = PdOperator::lax_operator(depth);
        let plus = l.power(n).plus_part().expect("order 0 is inside the window");
        let comm = plus.commutator(&l);
        for j in 1..=imax {
            let s = comm.coefficient(-(j as i64)).expect("window covers the requested flows");
            assert_eq!(s.grade(Grading::Deg).or_zero(), Some((j + n + 1) as i64), "deg S({}, {})", j, n);
            assert!(s.max_family() < j + n + 1, "variable cutoff violated in S({}, {})", j, n);
            self.flows.insert((j, n), s);
        }
    }

    /// `w_k = res L^k` in the `f` frame.
    pub fn w_of_f(&self, k: u32) -> DiffPoly {
        assert!(k >= 1);
        if let Some(w) = self.w.get(&k) {
            return w;
        }
        let w = self.lax_power(k, -1).residue().expect("window covers the residue");
        assert_eq!(w.grade(Grading::Deg).or_zero(), Some(k as i64 + 1), "deg w_{}", k);
        assert!(w.max_family() <= k, "variable cutoff violated in w_{}", k);
        self.w.insert(k, w)
    }

    /// `f_k` expressed in the `w` frame, by triangular inversion of `w_of_f`.
    pub fn f_of_w(&self, k: u32) -> DiffPoly {
        assert!(k >= 1);
        if let Some(f) = self.f_of_w.lock().unwrap().get(k as usize - 1) {
            return f.clone();
        }
        let images: Vec<DiffPoly> = (1..=k).map(|j| self.w_of_f(j)).collect();
        let mut cache = self.f_of_w.lock().unwrap();
        if cache.len() < k as usize {
            let all = invert_triangular(&images, &cache, Frame::W).expect("w_of_f is triangular");
            *cache = all;
        }
        cache[k as usize - 1].clone()
    }

    pub fn f_to_w_rule(&self, max_family: u32) -> SubstitutionRule {
        (1..=max_family).map(|j| (j, self.f_of_w(j))).collect()
    }

    pub fn w_to_f_rule(&self, max_family: u32) -> SubstitutionRule {
        (1..=max_family).map(|j| (j, self.w_of_f(j))).collect()
    }

    /// The derivation `d/dT_n` on the `f` ring:
    /// `f_i^(k) -> Dx^k S(i, n)`.
    pub fn flow_derivative(&self, p: &DiffPoly, n: u32) -> DiffPoly {
        assert_eq!(p.frame(), Frame::F, "flow_derivative acts on the f frame");
        let vars = p.variables();
        let Some(imax) = vars.iter().map(|&(a, _)| a).max() else {
            return DiffPoly::zero(Frame::F);
        };
        self.flows_upto(n, imax);
        let mut out = DiffPoly::zero(Frame::F);
        for (a, k) in vars {
            let dp = p.partial(a, k);
            let img = self.kp_flow(a, n).total_derivative_n(k);
            out += &(&dp * &img);
        }
        out
    }

    /// `R(a, b)` in the `w` frame: `dw_a/dT_b = Dx R(a, b)`.
    pub fn r(&self, a: u32, b: u32) -> Result<DiffPoly> {
        assert!(a >= 1 && b >= 1);
        if let Some(r) = self.r.get(&(a, b)) {
            return Ok(r);
        }
        let dw = self.flow_derivative(&self.w_of_f(a), b);
        let r_f = dw.antiderivative()?;
        let max_family = r_f.max_family();
        if max_family > a + b - 1 {
            return Err(Error::InvalidArgument(format!("variable cutoff violated in R({}, {})", a, b)));
        }
        let r_w = r_f.substitute(&self.f_to_w_rule(max_family), Frame::W)?;
        if r_w.frame() != Frame::W || r_w.max_family() > a + b - 1 {
            return Err(Error::InvalidArgument(format!("R({}, {}) left the w frame window", a, b)));
        }
        Ok(self.r.insert((a, b), r_w))
    }

    /// `res [(L^b)_+, L^a]`, an independent route to `dw_a/dT_b` in the `f` frame.
    pub fn w_flow_by_residue(&self, a: u32, b: u32) -> DiffPoly {
        let depth = a + b + 2 + self.margin;
        let l = PdOperator::lax_operator(depth);
        let la = l.power(a);
        let plus = l.power(b).plus_part().expect("order 0 is inside the window");
        plus.commutator(&la).residue().expect("window covers the residue")
    }

    /// All `R(a, b)` with `a + b <= max_weight`, computed in parallel.
    pub fn flow_table(&self, max_weight: u32) -> Result<FlowTable> {
        let pairs: Vec<(u32, u32)> =
            (1..max_weight).flat_map(|a| (1..=max_weight - a).map(move |b| (a, b))).collect();
        // warm the shared caches so workers do not race on them
        for k in 1..max_weight {
            self.f_of_w(k);
        }
        let results: Vec<((u32, u32), Result<DiffPoly>)> = pairs.par_iter().map(|&(a, b)| ((a, b), self.r(a, b))).collect();
        let mut table = FlowTable::new(Frame::W);
        for (key, r) in results {
            table.insert(key.0, key.1, r?)?;
        }
        Ok(table)
    }
}

trait OrZero {
    fn or_zero(self) -> Option<i64>;
}

impl OrZero for Grade {
    fn or_zero(self) -> Option<i64> {
        match self {
            Grade::Homogeneous(d) => Some(d),
            _ => None,
        }
    }
}

/// `homogenize_eps` for Lax-side polynomials: every monomial receives the
/// power of `eps` bringing its `degDx` to `target`.
pub fn homogenize_eps(p: &DiffPoly, target: i64) -> Result<DiffPoly> {
    p.homogenize_eps(target)
}

/// `(a, b) -> polynomial` for one hierarchy, in a fixed frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowTable {
    frame: Frame,
    entries: BTreeMap<(u32, u32), DiffPoly>,
}

impl FlowTable {
    pub fn new(frame: Frame) -> Self {
        FlowTable { frame, entries: BTreeMap::new() }
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn get(&self, a: u32, b: u32) -> Option<&DiffPoly> {
        self.entries.get(&(a, b))
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), &DiffPoly)> + '_ {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Append-only insert; rewriting a key with a different value is an error.
    pub fn insert(&mut self, a: u32, b: u32, p: DiffPoly) -> Result<()> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidArgument("flow table indices start at 1".into()));
        }
        if p.frame() != self.frame {
            return Err(Error::FrameMismatch { left: p.frame(), right: self.frame });
        }
        match self.entries.get(&(a, b)) {
            Some(old) if *old != p => Err(Error::InvalidArgument(format!("conflicting entries for ({}, {})", a, b))),
            Some(_) => Ok(()),
            None => {
                self.entries.insert((a, b), p);
                Ok(())
            }
        }
    }

    /// Entries that are not `deg`-homogeneous of degree `a + b`, or whose
    /// transpose differs.
    pub fn invariant_violations(&self) -> Vec<(u32, u32)> {
        self.entries
            .iter()
            .filter(|(&(a, b), p)| {
                p.grade(Grading::Deg) != Grade::Homogeneous((a + b) as i64)
                    || self.entries.get(&(b, a)).is_some_and(|q| q != *p)
            })
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let mut entries = Map::new();
        for ((a, b), p) in &self.entries {
            entries.insert(format!("{},{}", a, b), p.to_json());
        }
        let mut root = Map::new();
        root.insert("frame".into(), Value::String(self.frame.letter().to_string()));
        root.insert("entries".into(), Value::Object(entries));
        Value::Object(root)
    }

    pub fn from_json(value: &Value) -> Result<FlowTable> {
        let bad = |msg: &str| Error::Parse { pos: 0, msg: msg.to_string() };
        let obj = value.as_object().ok_or_else(|| bad("flow table must be an object"))?;
        let frame = obj
            .get("frame")
            .and_then(Value::as_str)
            .and_then(|s| {
                let mut cs = s.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => Frame::from_letter(c),
                    _ => None,
                }
            })
            .ok_or_else(|| bad("missing or unknown frame"))?;
        let entries = obj.get("entries").and_then(Value::as_object).ok_or_else(|| bad("missing entries"))?;
        let mut table = FlowTable::new(frame);
        for (key, poly) in entries {
            let (a, b) = parse_key(key).ok_or_else(|| bad(&format!("bad entry key {:?}", key)))?;
            table.insert(a, b, DiffPoly::from_json(frame, poly)?)?;
        }
        Ok(table)
    }
}

pub(crate) fn parse_key(key: &str) -> Option<(u32, u32)> {
    let (a, b) = key.split_once(',')?;
    let canon = |s: &str| !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit()) && !(s.len() > 1 && s.starts_with('0'));
    if !canon(a) || !canon(b) {
        return None;
    }
    Some((a.parse().ok()?, b.parse().ok()?))
}
