//! Truncated Laurent series over `W_n(F_q)`: the finite stand-ins for
//! `W_n k((x))` and for `Wk((x))` completed at `p`.
//!
//! A [`SeriesRing`] fixes a degree window `[lo, hi)`. A series stores its nonzero
//! terms and a precision: either exact (a Laurent polynomial) or an absolute
//! `x`-precision below which every coefficient is known. Terms at degree `>= hi`
//! are dropped and make the result inexact; a nonzero term below `lo` is an error.

use std::fmt;
use std::sync::Arc;

use num::rational::BigRational;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::CoeffRing;
use crate::witt::{WittElem, WittRing, WIDE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prec {
    Exact,
    /// Coefficients at degrees `>=` this are unknown.
    Abs(i64),
}

impl Prec {
    fn bound(self) -> Option<i64> {
        match self {
            Prec::Exact => None,
            Prec::Abs(n) => Some(n),
        }
    }

    fn min(self, other: Prec) -> Prec {
        match (self, other) {
            (Prec::Exact, o) | (o, Prec::Exact) => o,
            (Prec::Abs(a), Prec::Abs(b)) => Prec::Abs(a.min(b)),
        }
    }
}

struct Inner {
    coeff: WittRing,
    lo: i64,
    hi: i64,
}

/// `W_n(F_q)((x))` restricted to the degree window `[lo, hi)`.
#[derive(Clone)]
pub struct SeriesRing(Arc<Inner>);

impl PartialEq for SeriesRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.coeff == other.0.coeff && self.0.lo == other.0.lo && self.0.hi == other.0.hi)
    }
}

impl fmt::Debug for SeriesRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}((x))[{}, {})", self.0.coeff, self.0.lo, self.0.hi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries {
    /// Nonzero terms in increasing degree.
    terms: Vec<(i64, WittElem)>,
    prec: Prec,
}

impl LaurentSeries {
    pub fn terms(&self) -> &[(i64, WittElem)] {
        &self.terms
    }
    pub fn prec(&self) -> Prec {
        self.prec
    }
    pub fn is_exact(&self) -> bool {
        self.prec == Prec::Exact
    }
    /// Least degree with a nonzero coefficient; `None` plays the role of infinity.
    pub fn v_x(&self) -> Option<i64> {
        self.terms.first().map(|t| t.0)
    }
    pub fn max_degree(&self) -> Option<i64> {
        self.terms.last().map(|t| t.0)
    }
}

/// `v_p(p^i C(p^r, i)) = i + r - v_p(i)`.
pub fn kummer_valuation(p: u64, r: u32, i: u64) -> Result<u64> {
    let pr = p.checked_pow(r).ok_or_else(|| Error::OutOfRange("p^r overflows".into()))?;
    if i < 1 || i > pr {
        return Err(Error::OutOfRange(format!("i = {i} outside [1, {pr}]")));
    }
    let mut vi = 0;
    let mut j = i;
    while j % p == 0 {
        j /= p;
        vi += 1;
    }
    Ok(i + r as u64 - vi)
}

impl SeriesRing {
    pub fn new(coeff: WittRing, lo: i64, hi: i64) -> Result<Self> {
        if lo > 0 || hi <= 0 {
            return Err(Error::InvalidParameter(format!("window [{lo}, {hi}) must contain 0")));
        }
        Ok(SeriesRing(Arc::new(Inner { coeff, lo, hi })))
    }

    pub fn coeff_ring(&self) -> &WittRing {
        &self.0.coeff
    }
    pub fn lo(&self) -> i64 {
        self.0.lo
    }
    pub fn hi(&self) -> i64 {
        self.0.hi
    }
    pub fn p(&self) -> u64 {
        self.0.coeff.p()
    }

    /// Same window over another coefficient ring.
    pub fn with_coeff(&self, coeff: WittRing) -> SeriesRing {
        SeriesRing(Arc::new(Inner { coeff, lo: self.lo(), hi: self.hi() }))
    }

    pub fn with_window(&self, lo: i64, hi: i64) -> Result<SeriesRing> {
        SeriesRing::new(self.0.coeff.clone(), lo, hi)
    }

    /// Exact series from (degree, coefficient) pairs in any order; repeated degrees add.
    pub fn from_terms(&self, terms: &[(i64, WittElem)]) -> Result<LaurentSeries> {
        self.build(terms.to_vec(), Prec::Exact)
    }

    /// Series with an explicit absolute precision.
    pub fn from_terms_prec(&self, terms: &[(i64, WittElem)], prec: Prec) -> Result<LaurentSeries> {
        self.build(terms.to_vec(), prec)
    }

    /// Integer-coefficient convenience constructor: `[(deg, c)]`.
    pub fn from_ints(&self, terms: &[(i64, i64)]) -> Result<LaurentSeries> {
        let r = &self.0.coeff;
        self.build(terms.iter().map(|&(d, c)| (d, r.from_i64(c))).collect(), Prec::Exact)
    }

    fn build(&self, mut terms: Vec<(i64, WittElem)>, prec: Prec) -> Result<LaurentSeries> {
        let r = &self.0.coeff;
        terms.sort_by_key(|t| t.0);
        let mut out: Vec<(i64, WittElem)> = Vec::with_capacity(terms.len());
        for (d, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == d => last.1 = r.add(&last.1, &c),
                _ => out.push((d, c)),
            }
        }
        out.retain(|t| !r.is_zero(&t.1));
        self.normalize(out, prec)
    }

    /// Enforce the window and the precision on sorted nonzero terms.
    fn normalize(&self, mut terms: Vec<(i64, WittElem)>, prec: Prec) -> Result<LaurentSeries> {
        if let Some(&(d, _)) = terms.first() {
            if d < self.lo() {
                return Err(Error::WindowOverflow(d));
            }
        }
        let mut prec = match prec {
            Prec::Abs(n) if n >= self.hi() => Prec::Abs(self.hi()),
            other => other,
        };
        let cut = prec.bound().unwrap_or(self.hi()).min(self.hi());
        if terms.last().map_or(false, |t| t.0 >= cut) {
            terms.retain(|t| t.0 < cut);
            prec = prec.min(Prec::Abs(self.hi()));
        }
        Ok(LaurentSeries { terms, prec })
    }

    pub fn monomial(&self, c: WittElem, d: i64) -> Result<LaurentSeries> {
        self.from_terms(&[(d, c)])
    }

    pub fn x(&self) -> LaurentSeries {
        self.monomial(self.0.coeff.one(), 1).expect("x lies in every window")
    }

    pub fn constant(&self, c: WittElem) -> LaurentSeries {
        self.monomial(c, 0).expect("constants lie in every window")
    }

    /// `O(x^n)`.
    pub fn big_o(&self, n: i64) -> LaurentSeries {
        LaurentSeries { terms: vec![], prec: Prec::Abs(n.min(self.hi())) }
    }

    pub fn coeff(&self, f: &LaurentSeries, d: i64) -> WittElem {
        match f.terms.binary_search_by_key(&d, |t| t.0) {
            Ok(i) => f.terms[i].1,
            Err(_) => self.0.coeff.zero(),
        }
    }

    /// Known precision as a number (`hi` for exact series).
    pub fn x_prec(&self, f: &LaurentSeries) -> i64 {
        f.prec.bound().unwrap_or(self.hi()).min(self.hi())
    }

    /// Lower bound for the valuation, `None` only for exact zero.
    fn val_bound(&self, f: &LaurentSeries) -> Option<i64> {
        f.v_x().or(f.prec.bound())
    }

    pub fn add(&self, f: &LaurentSeries, g: &LaurentSeries) -> LaurentSeries {
        let r = &self.0.coeff;
        let prec = f.prec.min(g.prec);
        let cut = prec.bound().unwrap_or(i64::MAX);
        let mut out = Vec::with_capacity(f.terms.len() + g.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < f.terms.len() || j < g.terms.len() {
            let (d, c) = match (f.terms.get(i), g.terms.get(j)) {
                (Some(a), Some(b)) if a.0 == b.0 => {
                    i += 1;
                    j += 1;
                    (a.0, r.add(&a.1, &b.1))
                }
                (Some(a), Some(b)) if a.0 < b.0 => {
                    i += 1;
                    (a.0, a.1)
                }
                (Some(a), None) => {
                    i += 1;
                    (a.0, a.1)
                }
                (_, Some(b)) => {
                    j += 1;
                    (b.0, b.1)
                }
                (None, None) => unreachable!(),
            };
            if d >= cut {
                break;
            }
            if !r.is_zero(&c) {
                out.push((d, c));
            }
        }
        LaurentSeries { terms: out, prec }
    }

    pub fn neg(&self, f: &LaurentSeries) -> LaurentSeries {
        let r = &self.0.coeff;
        LaurentSeries { terms: f.terms.iter().map(|&(d, c)| (d, r.neg(&c))).collect(), prec: f.prec }
    }

    pub fn sub(&self, f: &LaurentSeries, g: &LaurentSeries) -> LaurentSeries {
        self.add(f, &self.neg(g))
    }

    pub fn scale(&self, f: &LaurentSeries, c: &WittElem) -> LaurentSeries {
        let r = &self.0.coeff;
        let terms = f
            .terms
            .iter()
            .map(|&(d, a)| (d, r.mul(&a, c)))
            .filter(|t| !r.is_zero(&t.1))
            .collect();
        LaurentSeries { terms, prec: f.prec }
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, f: &LaurentSeries, k: i64) -> Result<LaurentSeries> {
        let terms = f.terms.iter().map(|&(d, c)| (d + k, c)).collect();
        let prec = match f.prec {
            Prec::Exact => Prec::Exact,
            Prec::Abs(n) => Prec::Abs(n + k),
        };
        self.normalize(terms, prec)
    }

    /// Product of raw term lists, keeping degrees below `cut`.
    /// Schoolbook product with one reduction per output degree.
    fn mul_terms_wide(&self, a: &[(i64, WittElem)], b: &[(i64, WittElem)], low: i64, top: i64) -> Vec<(i64, WittElem)> {
        let r = &self.0.coeff;
        let mut acc = vec![[0u64; WIDE]; (top - low) as usize];
        for &(da, ca) in a {
            if da + b[0].0 >= top {
                break;
            }
            for &(db, cb) in b {
                let d = da + db;
                if d >= top {
                    break;
                }
                r.mul_acc(&mut acc[(d - low) as usize], &ca, &cb);
            }
        }
        acc.iter()
            .enumerate()
            .map(|(i, w)| (low + i as i64, r.reduce_wide(w)))
            .filter(|(_, c)| !r.is_zero(c))
            .collect()
    }

    fn mul_terms(&self, a: &[(i64, WittElem)], b: &[(i64, WittElem)], cut: i64) -> Vec<(i64, WittElem)> {
        let r = &self.0.coeff;
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let low = a[0].0 + b[0].0;
        if low >= cut {
            return vec![];
        }
        let top = (a.last().unwrap().0 + b.last().unwrap().0 + 1).min(cut);
        if r.lazy_capacity() > a.len().min(b.len()) as u64 {
            return self.mul_terms_wide(a, b, low, top);
        }
        let mut acc = vec![r.zero(); (top - low) as usize];
        for &(da, ca) in a {
            if da + b[0].0 >= cut {
                break;
            }
            for &(db, cb) in b {
                let d = da + db;
                if d >= cut {
                    break;
                }
                let slot = &mut acc[(d - low) as usize];
                *slot = r.add(slot, &r.mul(&ca, &cb));
            }
        }
        acc.into_iter()
            .enumerate()
            .filter(|(_, c)| !r.is_zero(c))
            .map(|(i, c)| (low + i as i64, c))
            .collect()
    }

    pub fn mul(&self, f: &LaurentSeries, g: &LaurentSeries) -> Result<LaurentSeries> {
        let (vf, vg) = match (self.val_bound(f), self.val_bound(g)) {
            (Some(a), Some(b)) => (a, b),
            // An exact zero factor.
            _ => return Ok(LaurentSeries { terms: vec![], prec: Prec::Exact }),
        };
        let from_f = f.prec.bound().map(|pf| pf + vg);
        let from_g = g.prec.bound().map(|pg| pg + vf);
        let prec = match (from_f, from_g) {
            (None, None) => Prec::Exact,
            (Some(a), None) | (None, Some(a)) => Prec::Abs(a),
            (Some(a), Some(b)) => Prec::Abs(a.min(b)),
        };
        let cut = prec.bound().unwrap_or(i64::MAX).min(self.hi());
        let dropped = f.max_degree().zip(g.max_degree()).map_or(false, |(a, b)| a + b >= cut);
        let terms = self.mul_terms(&f.terms, &g.terms, cut);
        let prec = if dropped { prec.min(Prec::Abs(self.hi())) } else { prec };
        self.normalize(terms, prec)
    }

    /// `sum f_i g_i`, accumulated before reducing.
    pub fn dot(&self, pairs: &[(&LaurentSeries, &LaurentSeries)]) -> Result<LaurentSeries> {
        let r = &self.0.coeff;
        let mut prec = Prec::Exact;
        let mut live = Vec::with_capacity(pairs.len());
        let mut load = 0u64;
        for &(f, g) in pairs {
            let (vf, vg) = match (self.val_bound(f), self.val_bound(g)) {
                (Some(a), Some(b)) => (a, b),
                _ => continue,
            };
            let from_f = f.prec.bound().map(|pf| pf + vg);
            let from_g = g.prec.bound().map(|pg| pg + vf);
            let mut p = match (from_f, from_g) {
                (None, None) => Prec::Exact,
                (Some(a), None) | (None, Some(a)) => Prec::Abs(a),
                (Some(a), Some(b)) => Prec::Abs(a.min(b)),
            };
            let cut = p.bound().unwrap_or(i64::MAX).min(self.hi());
            if f.max_degree().zip(g.max_degree()).map_or(false, |(a, b)| a + b >= cut) {
                p = p.min(Prec::Abs(self.hi()));
            }
            prec = prec.min(p);
            if !f.terms.is_empty() && !g.terms.is_empty() {
                load += f.terms.len().min(g.terms.len()) as u64;
                live.push((f, g));
            }
        }
        if load >= r.lazy_capacity() {
            let mut acc = self.zero_series();
            for (f, g) in pairs {
                acc = self.add(&acc, &self.mul(f, g)?);
            }
            return Ok(acc);
        }
        let cut = prec.bound().unwrap_or(i64::MAX).min(self.hi());
        let (Some(low), Some(top)) = (
            live.iter().map(|(f, g)| f.terms[0].0 + g.terms[0].0).min(),
            live.iter().map(|(f, g)| f.terms.last().unwrap().0 + g.terms.last().unwrap().0 + 1).max(),
        ) else {
            return self.normalize(vec![], prec);
        };
        let top = top.min(cut);
        if low >= top {
            return self.normalize(vec![], prec);
        }
        let mut acc = vec![[0u64; WIDE]; (top - low) as usize];
        for (f, g) in live {
            for &(da, ca) in &f.terms {
                if da + g.terms[0].0 >= top {
                    break;
                }
                for &(db, cb) in &g.terms {
                    let d = da + db;
                    if d >= top {
                        break;
                    }
                    r.mul_acc(&mut acc[(d - low) as usize], &ca, &cb);
                }
            }
        }
        let terms = acc
            .iter()
            .enumerate()
            .map(|(i, w)| (low + i as i64, r.reduce_wide(w)))
            .filter(|(_, c)| !r.is_zero(c))
            .collect();
        self.normalize(terms, prec)
    }

    pub fn pow(&self, f: &LaurentSeries, e: u64) -> Result<LaurentSeries> {
        let mut acc = self.one_series();
        for _ in 0..e {
            acc = self.mul(&acc, f)?;
        }
        Ok(acc)
    }

    pub fn one_series(&self) -> LaurentSeries {
        self.constant(self.0.coeff.one())
    }

    pub fn zero_series(&self) -> LaurentSeries {
        LaurentSeries { terms: vec![], prec: Prec::Exact }
    }

    pub fn from_i64(&self, c: i64) -> LaurentSeries {
        self.constant(self.0.coeff.from_i64(c))
    }

    /// Degree and coefficient of the lowest term that is a `p`-unit.
    pub fn min_unit_term(&self, f: &LaurentSeries) -> Option<(i64, WittElem)> {
        let r = &self.0.coeff;
        f.terms.iter().find(|t| r.is_unit(&t.1)).copied()
    }

    /// Whether the reduction mod `p` is nonzero.
    pub fn is_unit(&self, f: &LaurentSeries) -> Result<bool> {
        if self.min_unit_term(f).is_some() {
            return Ok(true);
        }
        if f.terms.is_empty() && !f.is_exact() && self.x_prec(f) < self.hi() {
            return Err(Error::PrecisionInsufficient);
        }
        Ok(false)
    }

    /// For a unit: whether its reduction lies in `x k[[x]]`.
    pub fn is_topologically_nilpotent(&self, f: &LaurentSeries) -> Result<bool> {
        match self.min_unit_term(f) {
            Some((d, _)) => Ok(d > 0),
            None => Err(Error::NotUnit),
        }
    }

    pub fn invert(&self, f: &LaurentSeries) -> Result<LaurentSeries> {
        let r = &self.0.coeff;
        let (d, a) = self.min_unit_term(f).ok_or(Error::NotUnit)?;
        let a_inv = r.inverse(&a)?;
        let n = r.n() as i64;
        // u = f / (a x^d) = 1 + r_plus + r_minus, r_minus in p x^{-1} W[x^{-1}].
        let mut r_plus = Vec::new();
        let mut r_minus = Vec::new();
        for &(e, c) in &f.terms {
            let c = r.mul(&c, &a_inv);
            match (e - d).cmp(&0) {
                std::cmp::Ordering::Less => r_minus.push((e - d, c)),
                std::cmp::Ordering::Equal => {}
                std::cmp::Ordering::Greater => r_plus.push((e - d, c)),
            }
        }
        let pu = f.prec.bound().map(|p| p - d);
        let m = r_minus.first().map_or(0, |t| -t.0);
        let loss = (n - 1) * m;
        let mut q = self.hi() + d;
        if let Some(pu) = pu {
            q = q.min(pu - loss);
        }
        let exact = f.is_exact() && r_plus.is_empty();
        let work = q + loss;
        if let Some(pu) = pu {
            r_plus.retain(|t| t.0 < pu);
        }
        // A = (1 + r_plus)^{-1} to degree `work`.
        let one = vec![(0, r.one())];
        let mut a_ser = one.clone();
        if !r_plus.is_empty() {
            let neg_rp: Vec<_> = r_plus.iter().map(|&(e, c)| (e, r.neg(&c))).collect();
            let mut power = one.clone();
            let steps = work.max(0);
            for _ in 0..steps {
                power = self.mul_terms(&power, &neg_rp, work);
                if power.is_empty() {
                    break;
                }
                a_ser = add_terms(r, &a_ser, &power);
            }
        }
        // u^{-1} = A sum_{k<n} (-A r_minus)^k.
        let mut inv = a_ser.clone();
        if !r_minus.is_empty() {
            let neg_rm: Vec<_> = r_minus.iter().map(|&(e, c)| (e, r.neg(&c))).collect();
            let s = self.mul_terms(&a_ser, &neg_rm, work);
            let mut power = a_ser.clone();
            for _ in 1..n {
                power = self.mul_terms(&power, &s, work);
                if power.is_empty() {
                    break;
                }
                inv = add_terms(r, &inv, &power);
            }
        }
        let terms: Vec<_> = inv
            .into_iter()
            .filter(|t| exact || t.0 < q)
            .map(|(e, c)| (e - d, r.mul(&c, &a_inv)))
            .collect();
        let prec = if exact { Prec::Exact } else { Prec::Abs(q - d) };
        self.normalize(terms, prec)
    }

    /// Compute `f^{p^r}` by repeated `p`-th powers and test for positive valuation.
    pub fn nilpotence_oracle(&self, f: &LaurentSeries, r_max: u32) -> Result<bool> {
        let p = self.p();
        let mut g = f.clone();
        for _ in 0..r_max {
            g = self.pow(&g, p)?;
        }
        Ok(match g.v_x() {
            Some(v) => v > 0,
            None => self.x_prec(&g) > 0,
        })
    }

    /// `g` with `g^e = f` and `g = 1 mod x`, for `f = 1 mod x` supported in degrees `>= 0`.
    pub fn hensel_root(&self, f: &LaurentSeries, e: u64) -> Result<LaurentSeries> {
        let r = &self.0.coeff;
        let p = self.p();
        if e == 0 || e % p == 0 {
            return Err(Error::NoRoot(format!("exponent {e} is not prime to p")));
        }
        if f.v_x().map_or(true, |v| v != 0) || self.coeff(f, 0) != r.one() {
            return Err(Error::NoRoot("constant term is not 1".into()));
        }
        if f.terms[0].0 < 0 {
            return Err(Error::NoRoot("negative support".into()));
        }
        let top = self.x_prec(f);
        let e_inv = r.inverse(&r.from_i64(e as i64))?;
        let mut g = vec![(0, r.one())];
        // Coefficients of g^j truncated below `top`, refreshed as g grows.
        for m in 1..top {
            let mut power = vec![(0, r.one())];
            for _ in 0..e {
                power = self.mul_terms(&power, &g, m + 1);
            }
            let have = power.iter().find(|t| t.0 == m).map_or(r.zero(), |t| t.1);
            let want = self.coeff(f, m);
            let gm = r.mul(&r.sub(&want, &have), &e_inv);
            if !r.is_zero(&gm) {
                g.push((m, gm));
            }
        }
        let prec = if f.is_exact() && top == self.hi() {
            // Exact only when the root happens to be a polynomial.
            let check = self.pow(&LaurentSeries { terms: g.clone(), prec: Prec::Exact }, e)?;
            if check.is_exact() && self.eq(&check, f) {
                Prec::Exact
            } else {
                Prec::Abs(top)
            }
        } else {
            Prec::Abs(top)
        };
        self.normalize(g, prec)
    }

    /// Membership in the group of series with constant term 1 and no other low terms.
    pub fn s_membership(&self, f: &LaurentSeries) -> bool {
        let r = &self.0.coeff;
        f.v_x() == Some(0) && self.coeff(f, 0) == r.one()
    }

    pub fn eq(&self, f: &LaurentSeries, g: &LaurentSeries) -> bool {
        self.sub(f, g).terms.is_empty()
    }

    /// Map every coefficient through `phi`, into `target`.
    pub fn map_coeffs(
        &self,
        f: &LaurentSeries,
        target: &SeriesRing,
        phi: impl Fn(&WittElem) -> WittElem,
    ) -> Result<LaurentSeries> {
        let tr = target.coeff_ring();
        let terms: Vec<_> = f.terms.iter().map(|&(d, c)| (d, phi(&c))).filter(|t| !tr.is_zero(&t.1)).collect();
        target.normalize(terms, f.prec)
    }

    /// Reduce coefficients into the same field at lower `p`-precision.
    pub fn reduce_to(&self, f: &LaurentSeries, target: &SeriesRing) -> Result<LaurentSeries> {
        let src = self.coeff_ring().clone();
        let tr = target.coeff_ring().clone();
        if tr.field() != src.field() || tr.n() > src.n() {
            return Err(Error::RingMismatch);
        }
        self.map_coeffs(f, target, |c| src.reduce_to(c, &tr).expect("checked above"))
    }

    /// Coefficient-wise lift into a ring of higher `p`-precision (no carries).
    pub fn lift_to(&self, f: &LaurentSeries, target: &SeriesRing) -> Result<LaurentSeries> {
        let src = self.coeff_ring().clone();
        let tr = target.coeff_ring().clone();
        if tr.field() != src.field() {
            return Err(Error::RingMismatch);
        }
        self.map_coeffs(f, target, |c| tr.lift_from(c, &src).expect("checked above"))
    }

    /// Exact division by `p`, landing in `target` (the same field at precision `n - 1`).
    pub fn div_p(&self, f: &LaurentSeries, target: &SeriesRing) -> Result<LaurentSeries> {
        let src = self.coeff_ring();
        let tr = target.coeff_ring();
        if tr.field() != src.field() || tr.n() + 1 > src.n() {
            return Err(Error::RingMismatch);
        }
        let mut terms = Vec::with_capacity(f.terms.len());
        for &(d, c) in &f.terms {
            let q = tr.lift_from(&src.div_p(&c)?, src)?;
            if !tr.is_zero(&q) {
                terms.push((d, q));
            }
        }
        target.normalize(terms, f.prec)
    }

    /// Random Laurent polynomial with every degree in `[lo, hi]` filled independently.
    pub fn random_poly<R: Rng + ?Sized>(&self, rng: &mut R, lo: i64, hi: i64) -> Result<LaurentSeries> {
        let r = &self.0.coeff;
        let terms: Vec<_> = (lo..=hi).map(|d| (d, r.random(rng))).collect();
        self.from_terms(&terms)
    }

    pub fn format(&self, f: &LaurentSeries) -> String {
        let r = &self.0.coeff;
        let mut parts = Vec::new();
        for &(d, c) in &f.terms {
            let coeff = r.format(&c);
            let coeff = if coeff.contains(' ') { format!("({coeff})") } else { coeff };
            let s = match d {
                0 => coeff,
                1 if coeff == "1" => "x".into(),
                1 => format!("{coeff}*x"),
                d if coeff == "1" => format!("x^{d}"),
                d => format!("{coeff}*x^{d}"),
            };
            parts.push(s);
        }
        if let Prec::Abs(n) = f.prec {
            parts.push(format!("O(x^{n})"));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// Parse the text form produced by [`SeriesRing::format`] (also accepts `-`).
    pub fn parse(&self, s: &str) -> Result<LaurentSeries> {
        let r = &self.0.coeff;
        let bad = || Error::InvalidParameter(format!("cannot parse series `{s}`"));
        let mut terms = Vec::new();
        let mut prec = Prec::Exact;
        for (sign, tok) in split_signed(s).ok_or_else(bad)? {
            let tok = tok.trim();
            if let Some(inner) = tok.strip_prefix("O(").and_then(|t| t.strip_suffix(')')) {
                let n = parse_x_power(inner).ok_or_else(bad)?;
                prec = prec.min(Prec::Abs(n));
                continue;
            }
            let (coeff, xpart) = match tok.rfind('x') {
                Some(i) if !tok[i..].contains(')') => {
                    let c = tok[..i].trim_end_matches('*').trim();
                    (c, Some(&tok[i..]))
                }
                _ => (tok, None),
            };
            let coeff = coeff.trim();
            let c = if coeff.is_empty() {
                r.one()
            } else {
                parse_witt(r, coeff.trim_start_matches('(').trim_end_matches(')')).ok_or_else(bad)?
            };
            let c = if sign < 0 { r.neg(&c) } else { c };
            let d = match xpart {
                None => 0,
                Some(x) => parse_x_power(x).ok_or_else(bad)?,
            };
            terms.push((d, c));
        }
        self.build(terms, prec)
    }

    pub fn descriptor_json(&self) -> Value {
        let r = &self.0.coeff;
        json!({"p": r.p(), "n": r.n(), "d": r.degree(), "lo": self.lo(), "hi": self.hi()})
    }

    pub fn series_json(&self, f: &LaurentSeries) -> Value {
        let r = &self.0.coeff;
        let coeffs: Vec<Value> = f.terms.iter().map(|&(d, c)| json!([d, r.rep_json(&c)])).collect();
        json!({"x_prec": self.x_prec(f), "exact": f.is_exact(), "coeffs": coeffs})
    }

    pub fn to_json(&self, f: &LaurentSeries) -> Value {
        json!({"ring": self.descriptor_json(), "series": self.series_json(f)})
    }
}

fn add_terms(r: &WittRing, a: &[(i64, WittElem)], b: &[(i64, WittElem)]) -> Vec<(i64, WittElem)> {
    let mut out: Vec<(i64, WittElem)> = a.iter().chain(b.iter()).copied().collect();
    out.sort_by_key(|t| t.0);
    let mut merged: Vec<(i64, WittElem)> = Vec::with_capacity(out.len());
    for (d, c) in out {
        match merged.last_mut() {
            Some(last) if last.0 == d => last.1 = r.add(&last.1, &c),
            _ => merged.push((d, c)),
        }
    }
    merged.retain(|t| !r.is_zero(&t.1));
    merged
}

/// Split `a + b - c` at top-level signs (not inside parentheses or after `^`).
fn split_signed(s: &str) -> Option<Vec<(i32, String)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut sign = 1;
    let mut prev = ' ';
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && (ch == '+' || ch == '-') && prev != '^' {
            if !cur.trim().is_empty() {
                out.push((sign, cur.clone()));
            }
            cur.clear();
            sign = if ch == '-' { -1 } else { 1 };
        } else {
            cur.push(ch);
        }
        if !ch.is_whitespace() {
            prev = ch;
        }
    }
    if depth != 0 {
        return None;
    }
    if !cur.trim().is_empty() {
        out.push((sign, cur));
    }
    Some(out)
}

fn parse_x_power(s: &str) -> Option<i64> {
    let s = s.trim();
    let rest = s.strip_prefix('x')?;
    if rest.is_empty() {
        return Some(1);
    }
    rest.strip_prefix('^')?.trim().trim_start_matches('(').trim_end_matches(')').parse().ok()
}

/// Parse a Witt element in the text form `3*T^2 + T + 2`.
pub fn parse_witt(r: &WittRing, s: &str) -> Option<WittElem> {
    let mut acc = r.zero();
    for (sign, tok) in split_signed(s)? {
        let tok = tok.trim();
        let (c, k) = match tok.find('T') {
            None => (tok.parse::<i64>().ok()?, 0usize),
            Some(i) => {
                let c = tok[..i].trim_end_matches('*').trim();
                let c = if c.is_empty() { 1 } else { c.parse().ok()? };
                let k = match tok[i + 1..].trim().strip_prefix('^') {
                    None if tok[i + 1..].trim().is_empty() => 1,
                    None => return None,
                    Some(e) => e.trim().parse().ok()?,
                };
                (c, k)
            }
        };
        if k >= r.degree() {
            return None;
        }
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c * sign as i64;
        acc = r.add(&acc, &r.from_coeffs(&coeffs).ok()?);
    }
    Some(acc)
}

impl CoeffRing for SeriesRing {
    type Elem = LaurentSeries;

    fn zero(&self) -> LaurentSeries {
        LaurentSeries { terms: vec![], prec: Prec::Exact }
    }
    fn one(&self) -> LaurentSeries {
        self.one_series()
    }
    fn from_i64(&self, v: i64) -> LaurentSeries {
        self.constant(self.0.coeff.from_i64(v))
    }
    fn add(&self, a: &LaurentSeries, b: &LaurentSeries) -> LaurentSeries {
        SeriesRing::add(self, a, b)
    }
    fn neg(&self, a: &LaurentSeries) -> LaurentSeries {
        SeriesRing::neg(self, a)
    }
    fn sub(&self, a: &LaurentSeries, b: &LaurentSeries) -> LaurentSeries {
        SeriesRing::sub(self, a, b)
    }
    fn mul(&self, a: &LaurentSeries, b: &LaurentSeries) -> Result<LaurentSeries> {
        SeriesRing::mul(self, a, b)
    }
    fn dot(&self, pairs: &[(&LaurentSeries, &LaurentSeries)]) -> Result<LaurentSeries> {
        SeriesRing::dot(self, pairs)
    }
    fn is_zero(&self, a: &LaurentSeries) -> bool {
        a.terms.is_empty()
    }
    fn equal(&self, a: &LaurentSeries, b: &LaurentSeries) -> bool {
        SeriesRing::eq(self, a, b)
    }
    fn inverse(&self, a: &LaurentSeries) -> Result<LaurentSeries> {
        self.invert(a)
    }
    fn is_unit(&self, a: &LaurentSeries) -> bool {
        self.min_unit_term(a).is_some()
    }
    fn prime(&self) -> u64 {
        self.p()
    }
    fn from_rational(&self, r: &BigRational) -> Result<LaurentSeries> {
        Ok(self.constant(self.0.coeff.from_rational(r)?))
    }
    fn format(&self, a: &LaurentSeries) -> String {
        SeriesRing::format(self, a)
    }
    fn elem_json(&self, a: &LaurentSeries) -> Value {
        self.series_json(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::FiniteField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(p: u64, n: u32, lo: i64, hi: i64) -> SeriesRing {
        SeriesRing::new(WittRing::prime(p, n).unwrap(), lo, hi).unwrap()
    }

    #[test]
    fn dot_matches_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = SeriesRing::new(WittRing::new(FiniteField::extension(2, 2).unwrap(), 2).unwrap(), -10, 12).unwrap();
        for _ in 0..50 {
            let mut fs = Vec::new();
            for k in 0..8 {
                let f = s.random_poly(&mut rng, -3, 6).unwrap();
                fs.push(if k % 3 == 0 { s.add(&f, &s.big_o(4 + k)) } else { f });
            }
            let pairs: Vec<_> = fs.chunks(2).map(|c| (&c[0], &c[1])).collect();
            let mut want = s.zero_series();
            for (f, g) in &pairs {
                want = s.add(&want, &s.mul(f, g).unwrap());
            }
            let got = s.dot(&pairs).unwrap();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn basic_products() {
        let s = ring(3, 2, -8, 20);
        let x = s.x();
        assert_eq!(s.mul(&x, &x).unwrap(), s.from_ints(&[(2, 1)]).unwrap());
        let xinv = s.from_ints(&[(-1, 1)]).unwrap();
        assert_eq!(s.mul(&xinv, &x).unwrap(), s.from_i64(1));
        assert_eq!(s.from_ints(&[(2, 1), (5, 1)]).unwrap().v_x(), Some(2));
        assert_eq!(s.from_ints(&[(-3, 3), (1, 1)]).unwrap().v_x(), Some(-3));
        assert_eq!(s.zero().v_x(), None);
        let deep = s.from_ints(&[(-5, 1)]).unwrap();
        assert_eq!(s.mul(&deep, &deep), Err(Error::WindowOverflow(-10)));
        // p^2 x^{-10} vanishes in W_2 and does not overflow.
        let px = s.from_ints(&[(-5, 3)]).unwrap();
        assert!(s.mul(&px, &px).unwrap().terms().is_empty());
    }

    #[test]
    fn precision_propagation() {
        let s = ring(2, 3, -4, 12);
        // (x + O(x^5)) (x^2 + O(x^4)) = x^3 + O(x^5).
        let f = s.add(&s.x(), &s.big_o(5));
        let g = s.add(&s.from_ints(&[(2, 1)]).unwrap(), &s.big_o(4));
        let h = s.mul(&f, &g).unwrap();
        assert_eq!(h.prec(), Prec::Abs(5));
        assert_eq!(h.terms(), s.from_ints(&[(3, 1)]).unwrap().terms());
        // Exact products that spill past the window become inexact.
        let big = s.from_ints(&[(8, 1)]).unwrap();
        assert_eq!(s.mul(&big, &big).unwrap().prec(), Prec::Abs(12));
        assert!(s.mul(&s.x(), &s.x()).unwrap().is_exact());
    }

    #[test]
    fn inverses() {
        let s = ring(3, 2, -8, 16);
        let f = s.from_ints(&[(0, 1), (1, 1)]).unwrap();
        let g = s.invert(&f).unwrap();
        for k in 0..16 {
            assert_eq!(s.coeff(&g, k), s.coeff_ring().from_i64(if k % 2 == 0 { 1 } else { -1 }));
        }
        assert!(s.eq(&s.mul(&f, &g).unwrap(), &s.from_i64(1)));
        assert_eq!(s.invert(&s.x()).unwrap(), s.from_ints(&[(-1, 1)]).unwrap());
        let u = s.coeff_ring().from_i64(4);
        let mono = s.monomial(u, 3).unwrap();
        let inv = s.invert(&mono).unwrap();
        assert_eq!(inv, s.monomial(s.coeff_ring().inverse(&u).unwrap(), -3).unwrap());
        // x^3 + 3 has an exact inverse x^{-3} - 3 x^{-6} in W_2.
        let y = s.from_ints(&[(3, 1), (0, 3)]).unwrap();
        let yi = s.invert(&y).unwrap();
        assert!(yi.is_exact());
        assert_eq!(yi, s.from_ints(&[(-3, 1), (-6, -3)]).unwrap());
        assert_eq!(s.invert(&s.from_ints(&[(1, 3)]).unwrap()), Err(Error::NotUnit));
    }

    #[test]
    fn inverses_with_negative_p_tails() {
        let s = ring(2, 3, -30, 24);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = s.coeff_ring().clone();
        for _ in 0..50 {
            // unit at degree d, p-divisible terms below it, arbitrary terms above.
            let d: i64 = rng.gen_range(-2..3);
            let mut terms = vec![(d, r.random_unit(&mut rng))];
            for k in d - 3..d {
                terms.push((k, r.scale(&r.random(&mut rng), 2)));
            }
            for k in d + 1..d + 6 {
                terms.push((k, r.random(&mut rng)));
            }
            let f = s.from_terms(&terms).unwrap();
            let g = s.invert(&f).unwrap();
            let prod = s.mul(&f, &g).unwrap();
            assert!(s.eq(&prod, &s.from_i64(1)), "{}", s.format(&prod));
            assert!(s.x_prec(&prod) >= 24 - 2 * d - 2 * 3 - 3);
        }
    }

    #[test]
    fn unit_tests_and_nilpotence() {
        let s = ring(2, 2, -6, 20);
        assert!(s.is_unit(&s.from_ints(&[(-1, 1), (0, 2)]).unwrap()).unwrap());
        assert!(!s.is_unit(&s.from_ints(&[(1, 2)]).unwrap()).unwrap());
        assert!(s.is_unit(&s.from_i64(1)).unwrap());
        assert_eq!(s.is_unit(&s.big_o(4)), Err(Error::PrecisionInsufficient));
        assert!(s.is_topologically_nilpotent(&s.x()).unwrap());
        let one_x = s.from_ints(&[(0, 1), (1, 1)]).unwrap();
        assert!(!s.is_topologically_nilpotent(&one_x).unwrap());
        let tail = s.from_ints(&[(1, 1), (-5, 2)]).unwrap();
        assert!(s.is_topologically_nilpotent(&tail).unwrap());
        assert!(s.nilpotence_oracle(&s.x(), 3).unwrap());
        assert!(!s.nilpotence_oracle(&one_x, 3).unwrap());
        assert!(s.nilpotence_oracle(&tail, 3).unwrap());
    }

    #[test]
    fn kummer_examples() {
        assert_eq!(kummer_valuation(2, 3, 2).unwrap(), 4);
        assert_eq!(kummer_valuation(3, 2, 1).unwrap(), 3);
        assert_eq!(kummer_valuation(5, 2, 25).unwrap(), 25);
        assert!(kummer_valuation(2, 2, 5).is_err());
        assert!(kummer_valuation(2, 2, 0).is_err());
    }

    #[test]
    fn roots() {
        let s = ring(3, 1, 0, 12);
        let f = s.from_ints(&[(0, 1), (1, 1)]).unwrap();
        let g = s.hensel_root(&f, 2).unwrap();
        assert_eq!(s.coeff(&g, 1), s.coeff_ring().from_i64(2));
        assert!(s.eq(&s.pow(&g, 2).unwrap(), &f));
        assert_eq!(s.hensel_root(&s.from_i64(1), 4).unwrap(), s.from_i64(1));
        assert!(matches!(s.hensel_root(&s.x(), 2), Err(Error::NoRoot(_))));
        assert!(matches!(s.hensel_root(&f, 3), Err(Error::NoRoot(_))));
        assert!(s.s_membership(&f));
        assert!(!s.s_membership(&s.x()));
        assert!(!s.s_membership(&s.from_ints(&[(0, 2), (1, 1)]).unwrap()));
    }

    #[test]
    fn text_round_trip() {
        let k = FiniteField::extension(3, 2).unwrap();
        let s = SeriesRing::new(WittRing::new(k, 2).unwrap(), -4, 10).unwrap();
        let f = s.parse("(2*T + 1)*x^-2 + 3 - x + T*x^3 + O(x^8)").unwrap();
        assert_eq!(f.prec(), Prec::Abs(8));
        assert_eq!(s.parse(&s.format(&f)).unwrap(), f);
        let s1 = ring(5, 2, -8, 32);
        let g = s1.parse("x^5 + 5").unwrap();
        assert_eq!(g, s1.from_ints(&[(5, 1), (0, 5)]).unwrap());
        let j = s1.to_json(&g);
        assert_eq!(j["ring"]["lo"], -8);
        assert_eq!(j["series"]["coeffs"][0], serde_json::json!([0, [5]]));
    }
}
