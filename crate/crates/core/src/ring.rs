//! Coefficient rings used by the series and formal-group code.
//!
//! Every ring is a value carrying its parameters; elements are plain data and all
//! arithmetic goes through the ring. Multiplication is fallible because series
//! rings have a finite degree window.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::witt::{WittElem, WittRing};

pub trait CoeffRing: Clone + Debug + PartialEq {
    type Elem: Clone + Debug + PartialEq;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn inverse(&self, a: &Self::Elem) -> Result<Self::Elem>;
    /// The residue characteristic.
    fn prime(&self) -> u64;
    /// Image of a rational number; fails when the denominator is not invertible.
    fn from_rational(&self, r: &BigRational) -> Result<Self::Elem>;
    fn format(&self, a: &Self::Elem) -> String;
    fn elem_json(&self, a: &Self::Elem) -> Value;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
    fn equal(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.is_zero(&self.sub(a, b))
    }
    fn is_unit(&self, a: &Self::Elem) -> bool {
        self.inverse(a).is_ok()
    }
    fn scale(&self, a: &Self::Elem, k: i64) -> Result<Self::Elem> {
        self.mul(a, &self.from_i64(k))
    }
    /// `sum a_i b_i`.
    fn dot(&self, pairs: &[(&Self::Elem, &Self::Elem)]) -> Result<Self::Elem> {
        let mut acc = self.zero();
        for (a, b) in pairs {
            acc = self.add(&acc, &self.mul(a, b)?);
        }
        Ok(acc)
    }
    fn pow(&self, a: &Self::Elem, mut e: u64) -> Result<Self::Elem> {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }
}

/// A `Q`-algebra with a notion of `p`-integrality; formal group laws are built from
/// logarithms over these.
pub trait RationalAlgebra: CoeffRing {
    fn is_p_integral(&self, a: &Self::Elem) -> bool;
    fn scale_rational(&self, a: &Self::Elem, r: &BigRational) -> Self::Elem;
}

impl CoeffRing for WittRing {
    type Elem = WittElem;

    fn zero(&self) -> WittElem {
        WittRing::zero(self)
    }
    fn one(&self) -> WittElem {
        WittRing::one(self)
    }
    fn from_i64(&self, v: i64) -> WittElem {
        WittRing::from_i64(self, v)
    }
    fn add(&self, a: &WittElem, b: &WittElem) -> WittElem {
        WittRing::add(self, a, b)
    }
    fn neg(&self, a: &WittElem) -> WittElem {
        WittRing::neg(self, a)
    }
    fn sub(&self, a: &WittElem, b: &WittElem) -> WittElem {
        WittRing::sub(self, a, b)
    }
    fn mul(&self, a: &WittElem, b: &WittElem) -> Result<WittElem> {
        Ok(WittRing::mul(self, a, b))
    }
    fn is_zero(&self, a: &WittElem) -> bool {
        WittRing::is_zero(self, a)
    }
    fn equal(&self, a: &WittElem, b: &WittElem) -> bool {
        a == b
    }
    fn is_unit(&self, a: &WittElem) -> bool {
        WittRing::is_unit(self, a)
    }
    fn inverse(&self, a: &WittElem) -> Result<WittElem> {
        WittRing::inverse(self, a)
    }
    fn prime(&self) -> u64 {
        self.p()
    }
    fn from_rational(&self, r: &BigRational) -> Result<WittElem> {
        let m = BigInt::from(self.modulus());
        let p = BigInt::from(self.p());
        if (r.denom() % &p).is_zero() {
            return Err(Error::PrecisionGuardExceeded(r.to_string()));
        }
        let num = (r.numer() % &m + &m) % &m;
        let den = (r.denom() % &m + &m) % &m;
        let num = self.from_i64(num.to_i64().unwrap());
        let den = self.from_i64(den.to_i64().unwrap());
        Ok(WittRing::mul(self, &num, &WittRing::inverse(self, &den)?))
    }
    fn format(&self, a: &WittElem) -> String {
        WittRing::format(self, a)
    }
    fn elem_json(&self, a: &WittElem) -> Value {
        self.rep_json(a)
    }
}

/// `Q`, remembering the prime used for integrality checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rationals {
    pub p: u64,
}

fn p_valuation(x: &BigInt, p: u64) -> i64 {
    if x.is_zero() {
        return i64::MAX;
    }
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    while (&x % &p).is_zero() {
        x /= &p;
        v += 1;
    }
    v
}

/// `p`-adic valuation of a rational; `i64::MAX` for zero.
pub fn rational_valuation(r: &BigRational, p: u64) -> i64 {
    if r.is_zero() {
        return i64::MAX;
    }
    p_valuation(r.numer(), p) - p_valuation(r.denom(), p)
}

impl CoeffRing for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> Result<BigRational> {
        Ok(a * b)
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn inverse(&self, a: &BigRational) -> Result<BigRational> {
        if a.is_zero() {
            Err(Error::NotUnit)
        } else {
            Ok(a.recip())
        }
    }
    fn prime(&self) -> u64 {
        self.p
    }
    fn from_rational(&self, r: &BigRational) -> Result<BigRational> {
        Ok(r.clone())
    }
    fn format(&self, a: &BigRational) -> String {
        a.to_string()
    }
    fn elem_json(&self, a: &BigRational) -> Value {
        json!(a.to_string())
    }
}

impl RationalAlgebra for Rationals {
    fn is_p_integral(&self, a: &BigRational) -> bool {
        rational_valuation(a, self.p) >= 0
    }
    fn scale_rational(&self, a: &BigRational, r: &BigRational) -> BigRational {
        a * r
    }
}

/// Exponent vector of a monomial in at most four variables.
pub type Mono = [u16; 4];
pub const MAX_VARS: usize = 4;

/// `R[u_1..u_k]`, optionally truncated at a total degree cap.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncPoly<R: CoeffRing> {
    pub base: R,
    pub nvars: usize,
    pub cap: Option<u32>,
}

/// Sparse polynomial: monomial to nonzero coefficient.
pub type PolyElem<E> = BTreeMap<Mono, E>;

fn mono_degree(m: &Mono) -> u32 {
    m.iter().map(|&e| e as u32).sum()
}

impl<R: CoeffRing> TruncPoly<R> {
    pub fn new(base: R, nvars: usize, cap: Option<u32>) -> Result<Self> {
        if nvars > MAX_VARS {
            return Err(Error::InvalidParameter(format!("at most {MAX_VARS} variables")));
        }
        Ok(TruncPoly { base, nvars, cap })
    }

    /// The variable `u_{i+1}`.
    pub fn var(&self, i: usize) -> PolyElem<R::Elem> {
        let mut m = [0; 4];
        m[i] = 1;
        let mut out = BTreeMap::new();
        if self.cap.map_or(true, |c| c >= 1) {
            out.insert(m, self.base.one());
        }
        out
    }

    pub fn constant(&self, c: R::Elem) -> PolyElem<R::Elem> {
        let mut out = BTreeMap::new();
        if !self.base.is_zero(&c) {
            out.insert([0; 4], c);
        }
        out
    }

    pub fn monomial(&self, c: R::Elem, m: Mono) -> PolyElem<R::Elem> {
        let mut out = BTreeMap::new();
        if !self.base.is_zero(&c) && self.cap.map_or(true, |cap| mono_degree(&m) <= cap) {
            out.insert(m, c);
        }
        out
    }

    /// Constant coefficient.
    pub fn constant_term(&self, a: &PolyElem<R::Elem>) -> R::Elem {
        a.get(&[0; 4]).cloned().unwrap_or_else(|| self.base.zero())
    }

    /// Apply a coefficient map into another polynomial ring with the same variables.
    pub fn map_coeffs<S: CoeffRing>(
        &self,
        a: &PolyElem<R::Elem>,
        target: &TruncPoly<S>,
        f: impl Fn(&R::Elem) -> Result<S::Elem>,
    ) -> Result<PolyElem<S::Elem>> {
        let mut out = BTreeMap::new();
        for (m, c) in a {
            if target.cap.map_or(false, |cap| mono_degree(m) > cap) {
                continue;
            }
            let v = f(c)?;
            if !target.base.is_zero(&v) {
                out.insert(*m, v);
            }
        }
        Ok(out)
    }

    /// Substitute ring elements for the variables, mapping coefficients with `f`.
    pub fn eval<S: CoeffRing>(
        &self,
        a: &PolyElem<R::Elem>,
        target: &S,
        vals: &[S::Elem],
        f: impl Fn(&R::Elem) -> Result<S::Elem>,
    ) -> Result<S::Elem> {
        let mut powers: Vec<Vec<S::Elem>> = vec![vec![target.one()]; self.nvars];
        let mut acc = target.zero();
        for (m, c) in a {
            let mut term = f(c)?;
            for (v, &e) in m.iter().enumerate().take(self.nvars) {
                if e == 0 {
                    continue;
                }
                while powers[v].len() <= e as usize {
                    let next = target.mul(powers[v].last().unwrap(), &vals[v])?;
                    powers[v].push(next);
                }
                term = target.mul(&term, &powers[v][e as usize])?;
            }
            acc = target.add(&acc, &term);
        }
        Ok(acc)
    }

    /// Truncate to a smaller cap.
    pub fn truncate(&self, a: &PolyElem<R::Elem>, cap: u32) -> PolyElem<R::Elem> {
        a.iter()
            .filter(|(m, _)| mono_degree(m) <= cap)
            .map(|(m, c)| (*m, c.clone()))
            .collect()
    }

    fn add_into(&self, acc: &mut PolyElem<R::Elem>, m: Mono, c: R::Elem) {
        use std::collections::btree_map::Entry;
        match acc.entry(m) {
            Entry::Vacant(v) => {
                if !self.base.is_zero(&c) {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                let s = self.base.add(o.get(), &c);
                if self.base.is_zero(&s) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }
}

impl<R: CoeffRing> CoeffRing for TruncPoly<R> {
    type Elem = PolyElem<R::Elem>;

    fn zero(&self) -> Self::Elem {
        BTreeMap::new()
    }
    fn one(&self) -> Self::Elem {
        self.constant(self.base.one())
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        self.constant(self.base.from_i64(v))
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let mut out = a.clone();
        for (m, c) in b {
            self.add_into(&mut out, *m, c.clone());
        }
        out
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        a.iter().map(|(m, c)| (*m, self.base.neg(c))).collect()
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        let mut out = BTreeMap::new();
        for (ma, ca) in a {
            let da = mono_degree(ma);
            for (mb, cb) in b {
                if let Some(cap) = self.cap {
                    if da + mono_degree(mb) > cap {
                        continue;
                    }
                }
                let mut m = *ma;
                for k in 0..MAX_VARS {
                    m[k] += mb[k];
                }
                self.add_into(&mut out, m, self.base.mul(ca, cb)?);
            }
        }
        Ok(out)
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.values().all(|c| self.base.is_zero(c))
    }
    /// Units are `c + (nilpotent part)` with `c` a unit, which needs a cap; without one only
    /// constants invert.
    fn inverse(&self, a: &Self::Elem) -> Result<Self::Elem> {
        let c = self.constant_term(a);
        let c_inv = self.base.inverse(&c)?;
        let mut rest = a.clone();
        rest.remove(&[0; 4]);
        if rest.is_empty() {
            return Ok(self.constant(c_inv));
        }
        let cap = self.cap.ok_or(Error::NotUnit)?;
        // a = c(1 + r): a^{-1} = c^{-1} sum (-r)^k, finite because r has degree >= 1.
        let ci = self.constant(c_inv.clone());
        let r = self.mul(&rest, &ci)?;
        let neg_r = self.neg(&r);
        let mut term = self.one();
        let mut acc = self.one();
        for _ in 0..cap {
            term = self.mul(&term, &neg_r)?;
            acc = self.add(&acc, &term);
        }
        self.mul(&acc, &ci)
    }
    fn is_unit(&self, a: &Self::Elem) -> bool {
        let c = self.constant_term(a);
        if !self.base.is_unit(&c) {
            return false;
        }
        self.cap.is_some() || a.len() <= 1
    }
    fn prime(&self) -> u64 {
        self.base.prime()
    }
    fn from_rational(&self, r: &BigRational) -> Result<Self::Elem> {
        Ok(self.constant(self.base.from_rational(r)?))
    }
    fn format(&self, a: &Self::Elem) -> String {
        if a.is_empty() {
            return "0".into();
        }
        let mut terms = Vec::new();
        for (m, c) in a {
            let mut mono = String::new();
            for (v, &e) in m.iter().enumerate().take(self.nvars) {
                match e {
                    0 => {}
                    1 => mono.push_str(&format!("*u{}", v + 1)),
                    e => mono.push_str(&format!("*u{}^{}", v + 1, e)),
                }
            }
            terms.push(format!("({}){}", self.base.format(c), mono));
        }
        terms.join(" + ")
    }
    fn elem_json(&self, a: &Self::Elem) -> Value {
        Value::Array(
            a.iter()
                .map(|(m, c)| json!([m[..self.nvars].to_vec(), self.base.elem_json(c)]))
                .collect(),
        )
    }
}

impl<R: RationalAlgebra> RationalAlgebra for TruncPoly<R> {
    fn is_p_integral(&self, a: &Self::Elem) -> bool {
        a.values().all(|c| self.base.is_p_integral(c))
    }
    fn scale_rational(&self, a: &Self::Elem, r: &BigRational) -> Self::Elem {
        a.iter()
            .map(|(m, c)| (*m, self.base.scale_rational(c, r)))
            .filter(|(_, c)| !self.base.is_zero(c))
            .collect()
    }
}

/// Dual numbers `R[eps]/eps^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualRing<R: CoeffRing> {
    pub base: R,
}

/// `a + b eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<E> {
    pub re: E,
    pub eps: E,
}

impl<R: CoeffRing> DualRing<R> {
    pub fn new(base: R) -> Self {
        DualRing { base }
    }
    pub fn make(&self, re: R::Elem, eps: R::Elem) -> Dual<R::Elem> {
        Dual { re, eps }
    }
    pub fn epsilon(&self) -> Dual<R::Elem> {
        Dual { re: self.base.zero(), eps: self.base.one() }
    }
    pub fn lift(&self, re: R::Elem) -> Dual<R::Elem> {
        Dual { re, eps: self.base.zero() }
    }
}

impl<R: CoeffRing> CoeffRing for DualRing<R> {
    type Elem = Dual<R::Elem>;

    fn zero(&self) -> Self::Elem {
        self.lift(self.base.zero())
    }
    fn one(&self) -> Self::Elem {
        self.lift(self.base.one())
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        self.lift(self.base.from_i64(v))
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        Dual { re: self.base.add(&a.re, &b.re), eps: self.base.add(&a.eps, &b.eps) }
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        Dual { re: self.base.neg(&a.re), eps: self.base.neg(&a.eps) }
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        let b_ = &self.base;
        let re = b_.mul(&a.re, &b.re)?;
        let eps = match (b_.is_zero(&a.eps), b_.is_zero(&b.eps)) {
            (true, true) => b_.zero(),
            (true, false) => b_.mul(&a.re, &b.eps)?,
            (false, true) => b_.mul(&a.eps, &b.re)?,
            (false, false) => b_.add(&b_.mul(&a.re, &b.eps)?, &b_.mul(&a.eps, &b.re)?),
        };
        Ok(Dual { re, eps })
    }
    fn dot(&self, pairs: &[(&Self::Elem, &Self::Elem)]) -> Result<Self::Elem> {
        let b_ = &self.base;
        let re: Vec<_> = pairs.iter().map(|(a, b)| (&a.re, &b.re)).collect();
        let mut eps = Vec::new();
        for (a, b) in pairs {
            if !b_.is_zero(&b.eps) {
                eps.push((&a.re, &b.eps));
            }
            if !b_.is_zero(&a.eps) {
                eps.push((&a.eps, &b.re));
            }
        }
        Ok(Dual { re: b_.dot(&re)?, eps: b_.dot(&eps)? })
    }
    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.base.is_zero(&a.re) && self.base.is_zero(&a.eps)
    }
    fn inverse(&self, a: &Self::Elem) -> Result<Self::Elem> {
        let inv = self.base.inverse(&a.re)?;
        let inv2 = self.base.mul(&inv, &inv)?;
        let eps = self.base.neg(&self.base.mul(&a.eps, &inv2)?);
        Ok(Dual { re: inv, eps })
    }
    fn is_unit(&self, a: &Self::Elem) -> bool {
        self.base.is_unit(&a.re)
    }
    fn prime(&self) -> u64 {
        self.base.prime()
    }
    fn from_rational(&self, r: &BigRational) -> Result<Self::Elem> {
        Ok(self.lift(self.base.from_rational(r)?))
    }
    fn format(&self, a: &Self::Elem) -> String {
        if self.base.is_zero(&a.eps) {
            return self.base.format(&a.re);
        }
        format!("({}) + ({})*eps", self.base.format(&a.re), self.base.format(&a.eps))
    }
    fn elem_json(&self, a: &Self::Elem) -> Value {
        json!({"re": self.base.elem_json(&a.re), "eps": self.base.elem_json(&a.eps)})
    }
}

/// The rational `num/den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}
