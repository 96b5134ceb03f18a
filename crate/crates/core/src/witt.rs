//! Truncated Witt vectors `W_n(F_q)` of a finite field.
//!
//! `W_n(F_q)` is realised as `(Z/p^n)[T]/(m~)` where `m~` is the coefficient-wise
//! lift of an irreducible `m in F_p[T]` into `[0, p)`. Elements are small copyable
//! values; all arithmetic goes through the owning [`WittRing`].

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 4;
/// Length of an unreduced product of two field elements.
pub const WIDE: usize = 2 * MAX_DEGREE - 1;

/// `F_q = F_p[T]/(m)` with `m` monic irreducible of degree `d <= 4`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteField {
    p: u64,
    /// Low coefficients `m_0..m_{d-1}`; the leading 1 is implicit.
    modulus: Vec<u64>,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| p % k != 0)
}

/// Remainder of `a` modulo the monic `b` over `F_p`; both low-to-high.
fn poly_rem_fp(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let t = *r.last().unwrap() % p;
        let shift = r.len() - 1 - db;
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - t * bi % p) % p;
        }
        r.pop();
    }
    r
}

impl FiniteField {
    /// The prime field `F_p`.
    pub fn prime(p: u64) -> Result<Self> {
        Self::new(p, vec![0])
    }

    /// Build from the low coefficients of a monic modulus (the leading 1 is implicit).
    pub fn new(p: u64, low: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not prime")));
        }
        let d = low.len();
        if d == 0 || d > MAX_DEGREE {
            return Err(Error::InvalidParameter(format!("degree {d} outside 1..=4")));
        }
        if low.iter().any(|&c| c >= p) {
            return Err(Error::InvalidParameter("modulus coefficient not in [0,p)".into()));
        }
        let f = FiniteField { p, modulus: low };
        if d > 1 && !f.irreducible() {
            return Err(Error::Reducible(p));
        }
        Ok(f)
    }

    /// Smallest irreducible modulus of degree `d` in lexicographic order of `(m_{d-1},...,m_0)`.
    pub fn extension(p: u64, d: usize) -> Result<Self> {
        if d == 1 {
            return Self::prime(p);
        }
        if !is_prime(p) || d == 0 || d > MAX_DEGREE {
            return Err(Error::InvalidParameter(format!("F_{p}^{d} unsupported")));
        }
        let total = p.pow(d as u32);
        for code in 0..total {
            let mut low = vec![0; d];
            let mut c = code;
            for slot in low.iter_mut() {
                *slot = c % p;
                c /= p;
            }
            if let Ok(f) = Self::new(p, low) {
                return Ok(f);
            }
        }
        Err(Error::Reducible(p))
    }

    fn full_modulus(&self) -> Vec<u64> {
        let mut m = self.modulus.clone();
        m.push(1);
        m
    }

    fn irreducible(&self) -> bool {
        let m = self.full_modulus();
        let d = self.degree();
        for k in 1..=d / 2 {
            let count = self.p.pow(k as u32);
            for code in 0..count {
                let mut f = vec![0; k + 1];
                let mut c = code;
                for slot in f.iter_mut().take(k) {
                    *slot = c % self.p;
                    c /= self.p;
                }
                f[k] = 1;
                if poly_rem_fp(&m, &f, self.p).iter().all(|&x| x == 0) {
                    return false;
                }
            }
        }
        true
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.modulus.len()
    }

    /// `q = p^d`.
    pub fn order(&self) -> u64 {
        self.p.pow(self.degree() as u32)
    }

    pub fn modulus_low(&self) -> &[u64] {
        &self.modulus
    }
}

struct Inner {
    field: FiniteField,
    n: u32,
    pn: u64,
    residue: Option<WittRing>,
}

/// `W_n(F_q)`.
#[derive(Clone)]
pub struct WittRing(Arc<Inner>);

impl PartialEq for WittRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.n == other.0.n && self.0.field == other.0.field)
    }
}
impl Eq for WittRing {}

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W_{}(F_{}^{})", self.0.n, self.p(), self.degree())
    }
}

/// Element of a [`WittRing`]: coefficients of `1, T, ..., T^{d-1}` in `[0, p^n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct WittElem {
    pub rep: [u32; MAX_DEGREE],
}

impl WittRing {
    pub fn new(field: FiniteField, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let pn = (field.p as u128).pow(n);
        if pn >= 1 << 31 {
            return Err(Error::InvalidParameter("p^n must stay below 2^31".into()));
        }
        let residue = if n > 1 { Some(WittRing::new(field.clone(), 1)?) } else { None };
        Ok(WittRing(Arc::new(Inner { field, n, pn: pn as u64, residue })))
    }

    /// `W_n(F_p) = Z/p^n`.
    pub fn prime(p: u64, n: u32) -> Result<Self> {
        Self::new(FiniteField::prime(p)?, n)
    }

    pub fn field(&self) -> &FiniteField {
        &self.0.field
    }
    pub fn p(&self) -> u64 {
        self.0.field.p
    }
    pub fn n(&self) -> u32 {
        self.0.n
    }
    pub fn degree(&self) -> usize {
        self.0.field.degree()
    }
    /// `p^n`.
    pub fn modulus(&self) -> u64 {
        self.0.pn
    }
    pub fn q(&self) -> u64 {
        self.0.field.order()
    }

    /// `W_1(F_q) = F_q`.
    pub fn residue_ring(&self) -> WittRing {
        self.0.residue.clone().unwrap_or_else(|| self.clone())
    }

    /// The same field at another precision.
    pub fn with_precision(&self, n: u32) -> Result<WittRing> {
        if n == self.n() {
            return Ok(self.clone());
        }
        WittRing::new(self.field().clone(), n)
    }

    pub fn zero(&self) -> WittElem {
        WittElem::default()
    }

    pub fn one(&self) -> WittElem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> WittElem {
        let mut e = WittElem::default();
        e.rep[0] = v.rem_euclid(self.0.pn as i64) as u32;
        e
    }

    /// The class of `T`.
    pub fn generator(&self) -> WittElem {
        if self.degree() == 1 {
            // T = -m_0 in F_p.
            return self.from_i64(-(self.0.field.modulus[0] as i64));
        }
        let mut e = WittElem::default();
        e.rep[1] = 1;
        e
    }

    /// Element from low-to-high coefficients, reduced.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<WittElem> {
        if coeffs.len() > self.degree() {
            return Err(Error::InvalidParameter(format!(
                "representation has {} coefficients, degree is {}",
                coeffs.len(),
                self.degree()
            )));
        }
        let mut e = WittElem::default();
        for (slot, &c) in e.rep.iter_mut().zip(coeffs) {
            *slot = c.rem_euclid(self.0.pn as i64) as u32;
        }
        Ok(e)
    }

    pub fn coeffs(&self, a: &WittElem) -> Vec<u64> {
        a.rep[..self.degree()].iter().map(|&c| c as u64).collect()
    }

    pub fn add(&self, a: &WittElem, b: &WittElem) -> WittElem {
        let pn = self.0.pn as u32;
        let mut r = WittElem::default();
        for i in 0..self.degree() {
            let s = a.rep[i] + b.rep[i];
            r.rep[i] = if s >= pn { s - pn } else { s };
        }
        r
    }

    pub fn neg(&self, a: &WittElem) -> WittElem {
        let pn = self.0.pn as u32;
        let mut r = WittElem::default();
        for i in 0..self.degree() {
            r.rep[i] = if a.rep[i] == 0 { 0 } else { pn - a.rep[i] };
        }
        r
    }

    pub fn sub(&self, a: &WittElem, b: &WittElem) -> WittElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &WittElem, b: &WittElem) -> WittElem {
        let pn = self.0.pn;
        if self.degree() == 1 {
            let mut r = WittElem::default();
            r.rep[0] = (a.rep[0] as u64 * b.rep[0] as u64 % pn) as u32;
            return r;
        }
        let mut prod = [0u64; WIDE];
        if self.lazy_capacity() > 0 {
            self.mul_acc(&mut prod, a, b);
        } else {
            let d = self.degree();
            for i in 0..d {
                for j in 0..d {
                    prod[i + j] = (prod[i + j] + a.rep[i] as u64 * b.rep[j] as u64 % pn) % pn;
                }
            }
        }
        self.reduce_wide(&prod)
    }

    /// How many `mul_acc` calls a wide accumulator absorbs before it must be reduced.
    pub fn lazy_capacity(&self) -> u64 {
        let pn = self.0.pn;
        if pn >= 1 << 28 {
            return 0;
        }
        u64::MAX / (pn * pn * MAX_DEGREE as u64)
    }

    /// Add the unreduced product `a b` into a wide accumulator.
    pub fn mul_acc(&self, acc: &mut [u64; WIDE], a: &WittElem, b: &WittElem) {
        let d = self.degree();
        for i in 0..d {
            let x = a.rep[i] as u64;
            if x == 0 {
                continue;
            }
            for j in 0..d {
                acc[i + j] += x * b.rep[j] as u64;
            }
        }
    }

    /// Reduce a wide accumulator modulo `p^n` and the field modulus.
    pub fn reduce_wide(&self, acc: &[u64; WIDE]) -> WittElem {
        let pn = self.0.pn;
        let d = self.degree();
        let mut prod = [0u64; WIDE];
        for (p, a) in prod.iter_mut().zip(acc) {
            *p = a % pn;
        }
        let m = &self.0.field.modulus;
        for k in (d..2 * d - 1).rev() {
            let t = prod[k];
            if t == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &mi) in m.iter().enumerate() {
                prod[k - d + i] = (prod[k - d + i] + pn - t * mi % pn) % pn;
            }
        }
        let mut r = WittElem::default();
        for i in 0..d {
            r.rep[i] = prod[i] as u32;
        }
        r
    }

    /// Multiply by an integer.
    pub fn scale(&self, a: &WittElem, k: i64) -> WittElem {
        self.mul(a, &self.from_i64(k))
    }

    pub fn pow(&self, a: &WittElem, mut e: u64) -> WittElem {
        let mut base = *a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    pub fn is_zero(&self, a: &WittElem) -> bool {
        a.rep.iter().all(|&c| c == 0)
    }

    /// Units are exactly the elements with nonzero residue.
    pub fn is_unit(&self, a: &WittElem) -> bool {
        let p = self.p() as u32;
        a.rep[..self.degree()].iter().any(|&c| c % p != 0)
    }

    /// `p`-adic valuation, `None` for zero.
    pub fn valuation(&self, a: &WittElem) -> Option<u32> {
        let p = self.p() as u32;
        a.rep[..self.degree()]
            .iter()
            .filter(|&&c| c != 0)
            .map(|&c| {
                let mut c = c;
                let mut v = 0;
                while c % p == 0 {
                    c /= p;
                    v += 1;
                }
                v
            })
            .min()
    }

    pub fn inverse(&self, a: &WittElem) -> Result<WittElem> {
        if !self.is_unit(a) {
            return Err(Error::NotUnit);
        }
        // a^{q-2} inverts a mod p; Newton doubles the number of correct digits.
        let mut y = self.pow(a, self.q() - 2);
        let two = self.from_i64(2);
        let mut correct = 1;
        while correct < self.n() {
            y = self.mul(&y, &self.sub(&two, &self.mul(a, &y)));
            correct *= 2;
        }
        Ok(y)
    }

    /// Reduction to `W_1 = F_q`.
    pub fn residue(&self, a: &WittElem) -> WittElem {
        let p = self.p() as u32;
        let mut r = *a;
        for c in r.rep.iter_mut() {
            *c %= p;
        }
        r
    }

    /// Reduce into `target`, which must be the same field at precision `<= n`.
    pub fn reduce_to(&self, a: &WittElem, target: &WittRing) -> Result<WittElem> {
        if target.field() != self.field() || target.n() > self.n() {
            return Err(Error::RingMismatch);
        }
        let m = target.modulus() as u32;
        let mut r = *a;
        for c in r.rep.iter_mut() {
            *c %= m;
        }
        Ok(r)
    }

    /// Coefficient-wise lift from a ring of the same field (no carries).
    pub fn lift_from(&self, a: &WittElem, source: &WittRing) -> Result<WittElem> {
        if source.field() != self.field() {
            return Err(Error::RingMismatch);
        }
        let m = self.modulus() as u32;
        let mut r = *a;
        for c in r.rep.iter_mut() {
            *c %= m;
        }
        Ok(r)
    }

    /// Exact division by `p`; the quotient is returned in `W_{n-1}` as the coefficients `c/p`.
    pub fn div_p(&self, a: &WittElem) -> Result<WittElem> {
        let p = self.p() as u32;
        if a.rep.iter().any(|&c| c % p != 0) {
            return Err(Error::InvalidParameter("not divisible by p".into()));
        }
        let mut r = *a;
        for c in r.rep.iter_mut() {
            *c /= p;
        }
        Ok(r)
    }

    /// Teichmuller lift of a residue-field element (any representative mod `p`).
    pub fn teichmuller(&self, a: &WittElem) -> WittElem {
        let mut y = self.residue(a);
        let q = self.q();
        for _ in 0..=self.n() {
            let next = self.pow(&y, q);
            if next == y {
                return y;
            }
            y = next;
        }
        y
    }

    /// Digits `b_i in F_q` with `a = sum p^i [b_i]`.
    pub fn teich_digits(&self, a: &WittElem) -> Vec<WittElem> {
        let p = self.p();
        let mut rest = *a;
        let mut digits = Vec::with_capacity(self.n() as usize);
        let mut pi = 1u64;
        for _ in 0..self.n() {
            let mut b = WittElem::default();
            for k in 0..self.degree() {
                b.rep[k] = ((rest.rep[k] as u64 / pi) % p) as u32;
            }
            let t = self.scale(&self.teichmuller(&b), pi as i64);
            rest = self.sub(&rest, &t);
            digits.push(b);
            pi *= p;
        }
        digits
    }

    /// `sum p^i [b_i]`.
    pub fn from_digits(&self, digits: &[WittElem]) -> WittElem {
        let mut acc = self.zero();
        let mut pi = 1i64;
        for b in digits.iter().take(self.n() as usize) {
            acc = self.add(&acc, &self.scale(&self.teichmuller(b), pi));
            pi *= self.p() as i64;
        }
        acc
    }

    fn map_digits(&self, a: &WittElem, e: u64) -> WittElem {
        let k = self.residue_ring();
        let digits: Vec<_> = self.teich_digits(a).iter().map(|b| k.pow(b, e)).collect();
        self.from_digits(&digits)
    }

    /// Witt vector Frobenius `F`.
    pub fn frobenius(&self, a: &WittElem) -> WittElem {
        if self.degree() == 1 {
            return *a;
        }
        self.map_digits(a, self.p())
    }

    /// `F^k` for any integer `k` (negative powers use `F^{-1} = F^{d-1}`).
    pub fn frobenius_pow(&self, a: &WittElem, k: i64) -> WittElem {
        let d = self.degree() as i64;
        let k = k.rem_euclid(d) as u32;
        if k == 0 {
            return *a;
        }
        self.map_digits(a, self.p().pow(k))
    }

    pub fn frobenius_inv(&self, a: &WittElem) -> WittElem {
        self.frobenius_pow(a, -1)
    }

    /// Verschiebung `V = p F^{-1}`.
    pub fn verschiebung(&self, a: &WittElem) -> WittElem {
        self.scale(&self.frobenius_inv(a), self.p() as i64)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> WittElem {
        let mut e = WittElem::default();
        for k in 0..self.degree() {
            e.rep[k] = rng.gen_range(0..self.0.pn) as u32;
        }
        e
    }

    pub fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> WittElem {
        loop {
            let e = self.random(rng);
            if self.is_unit(&e) {
                return e;
            }
        }
    }

    /// All elements, in lexicographic order of the representation.
    pub fn elements(&self) -> Vec<WittElem> {
        let d = self.degree();
        let pn = self.0.pn;
        let total = pn.pow(d as u32);
        (0..total)
            .map(|mut code| {
                let mut e = WittElem::default();
                for k in 0..d {
                    e.rep[k] = (code % pn) as u32;
                    code /= pn;
                }
                e
            })
            .collect()
    }

    pub fn format(&self, a: &WittElem) -> String {
        let mut terms = Vec::new();
        for k in (0..self.degree()).rev() {
            let c = a.rep[k];
            if c == 0 {
                continue;
            }
            let t = match (k, c) {
                (0, c) => c.to_string(),
                (1, 1) => "T".to_string(),
                (1, c) => format!("{c}*T"),
                (k, 1) => format!("T^{k}"),
                (k, c) => format!("{c}*T^{k}"),
            };
            terms.push(t);
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    pub fn rep_json(&self, a: &WittElem) -> Value {
        json!(self.coeffs(a))
    }

    pub fn to_json(&self, a: &WittElem) -> Value {
        json!({"p": self.p(), "n": self.n(), "d": self.degree(), "rep": self.coeffs(a)})
    }

    pub fn descriptor_json(&self) -> Value {
        json!({"p": self.p(), "n": self.n(), "d": self.degree()})
    }
}

/// Image of a residue-field element `b = sum b_k T^k` under a field map given by the image of `T`.
fn eval_field_poly(field: &WittRing, b: &WittElem, t: &WittElem, target: &WittRing) -> WittElem {
    let mut acc = target.zero();
    for k in (0..field.degree()).rev() {
        acc = target.add(&target.mul(&acc, t), &target.from_i64(b.rep[k] as i64));
    }
    acc
}

/// The unique lift `W_n(k) -> W_m(k')` of a field embedding `k -> k'`.
#[derive(Clone, Debug)]
pub struct WittMap {
    pub source: WittRing,
    pub target: WittRing,
    /// Image of `T` in the target residue field.
    pub gen_residue: WittElem,
    /// Teichmuller lift of that image: the image of `[T]`.
    pub teich_gen: WittElem,
}

impl WittMap {
    pub fn apply(&self, a: &WittElem) -> WittElem {
        let k = self.source.residue_ring();
        let kt = self.target.residue_ring();
        let digits: Vec<_> = self
            .source
            .teich_digits(a)
            .iter()
            .map(|b| eval_field_poly(&k, b, &self.gen_residue, &kt))
            .collect();
        self.target.from_digits(&digits)
    }
}

/// Lift the field map `T -> t` (with `t` read mod `p`) to Witt vectors.
pub fn lift_witt_map(source: &WittRing, target: &WittRing, t: &WittElem) -> Result<WittMap> {
    if source.p() != target.p() {
        return Err(Error::NotEmbedding);
    }
    let kt = target.residue_ring();
    let t = target.residue(t);
    // m(t) must vanish in the target field.
    let mut m_at_t = kt.one();
    for &c in source.field().modulus_low().iter().rev() {
        m_at_t = kt.add(&kt.mul(&m_at_t, &t), &kt.from_i64(c as i64));
    }
    if !kt.is_zero(&m_at_t) {
        return Err(Error::NotEmbedding);
    }
    Ok(WittMap {
        source: source.clone(),
        target: target.clone(),
        gen_residue: t,
        teich_gen: target.teichmuller(&t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(p: u64, n: u32) -> WittRing {
        WittRing::prime(p, n).unwrap()
    }

    #[test]
    fn small_sums_and_products() {
        let r = w(5, 2);
        assert_eq!(r.add(&r.from_i64(7), &r.from_i64(18)), r.zero());
        assert_eq!(r.mul(&r.from_i64(7), &r.from_i64(7)), r.from_i64(24));
        let r = w(2, 3);
        assert_eq!(r.add(&r.from_i64(3), &r.from_i64(5)), r.zero());
        let r9 = WittRing::new(FiniteField::extension(3, 2).unwrap(), 2).unwrap();
        let t = r9.generator();
        assert_eq!(r9.format(&r9.add(&t, &t)), "2*T");
    }

    #[test]
    fn teichmuller_brute_force() {
        for (p, n) in [(5u64, 2u32), (3, 2), (7, 2), (2, 3), (3, 3)] {
            let r = w(p, n);
            let pn = r.modulus();
            for a in 0..p {
                // Unique y = a mod p with y^p = y mod p^n.
                let expect: Vec<u64> = (0..pn)
                    .filter(|&y| y % p == a && (y as u128).pow(p as u32) % pn as u128 == y as u128)
                    .collect();
                assert_eq!(expect.len(), 1);
                assert_eq!(r.teichmuller(&r.from_i64(a as i64)).rep[0] as u64, expect[0]);
            }
        }
        let r = w(5, 2);
        assert_eq!(r.teichmuller(&r.from_i64(2)), r.from_i64(7));
        assert_eq!(r.teich_digits(&r.from_i64(7)), vec![r.from_i64(2), r.zero()]);
        assert_eq!(r.verschiebung(&r.one()), r.from_i64(5));
    }

    #[test]
    fn digits_of_p() {
        let r = w(3, 3);
        let d = r.teich_digits(&r.from_i64(3));
        assert_eq!(d, vec![r.zero(), r.one(), r.zero()]);
    }

    #[test]
    fn frobenius_on_extension() {
        let k = FiniteField::extension(3, 2).unwrap();
        let r = WittRing::new(k, 2).unwrap();
        let f = r.residue_ring();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for b in f.elements() {
            let lhs = r.frobenius(&r.teichmuller(&b));
            let rhs = r.teichmuller(&f.pow(&b, 3));
            assert_eq!(lhs, rhs);
        }
        for _ in 0..200 {
            let a = r.random(&mut rng);
            let b = r.random(&mut rng);
            // F is a ring map lifting x -> x^p.
            assert_eq!(r.frobenius(&r.mul(&a, &b)), r.mul(&r.frobenius(&a), &r.frobenius(&b)));
            assert_eq!(r.frobenius(&r.add(&a, &b)), r.add(&r.frobenius(&a), &r.frobenius(&b)));
            assert_eq!(r.residue(&r.frobenius(&a)), r.residue(&r.pow(&a, 3)));
            assert_eq!(r.frobenius(&r.frobenius_inv(&a)), a);
        }
        assert_eq!(r.frobenius(&r.from_i64(5)), r.from_i64(5));
    }

    #[test]
    fn inverse_and_valuation() {
        let r = WittRing::new(FiniteField::extension(2, 3).unwrap(), 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let a = r.random_unit(&mut rng);
            assert_eq!(r.mul(&a, &r.inverse(&a).unwrap()), r.one());
        }
        assert_eq!(r.inverse(&r.from_i64(2)), Err(Error::NotUnit));
        assert_eq!(r.valuation(&r.from_i64(4)), Some(2));
        assert_eq!(r.valuation(&r.zero()), None);
    }

    #[test]
    fn reducible_modulus_rejected() {
        // T^2 + 1 = (T+1)^2 over F_2.
        assert_eq!(FiniteField::new(2, vec![1, 0]), Err(Error::Reducible(2)));
        // T^4 + T^2 + 1 = (T^2+T+1)^2 over F_2 has no roots.
        assert_eq!(FiniteField::new(2, vec![1, 0, 1, 0]), Err(Error::Reducible(2)));
        assert!(FiniteField::new(2, vec![1, 1, 0, 0]).is_ok());
        assert!(FiniteField::new(4, vec![1]).is_err());
    }

    #[test]
    fn lifted_maps() {
        let s = w(3, 2);
        // The prime field is F_p[T]/(T), so T maps to 0.
        let m = lift_witt_map(&w(3, 1), &s, &s.zero()).unwrap();
        assert_eq!(m.apply(&s.from_i64(2)), s.from_i64(8));

        let k4 = FiniteField::extension(2, 2).unwrap();
        let big = WittRing::new(k4.clone(), 3).unwrap();
        // Identity on W_3(F_4).
        let id = lift_witt_map(&big, &big, &big.generator()).unwrap();
        for a in big.elements().into_iter().step_by(7) {
            assert_eq!(id.apply(&a), a);
        }
        // T -> T + 1 is the Frobenius of F_4, and its lift is F.
        let t1 = big.add(&big.generator(), &big.one());
        let frob = lift_witt_map(&big, &big, &t1).unwrap();
        for a in big.elements().into_iter().step_by(5) {
            assert_eq!(frob.apply(&a), big.frobenius(&a));
        }
        // T -> 0 is not a root of T^2 + T + 1.
        assert!(matches!(lift_witt_map(&big, &big, &big.zero()), Err(Error::NotEmbedding)));
        // F_2 -> F_4 lands in the prime subring.
        let sub = lift_witt_map(&WittRing::prime(2, 3).unwrap(), &big, &big.zero()).unwrap();
        assert_eq!(sub.apply(&WittRing::prime(2, 3).unwrap().from_i64(5)), big.from_i64(5));
    }
}
