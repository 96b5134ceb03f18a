//! Frobenius lifts and theta-operations on `W_n k((x))`.
//!
//! A pipe-continuous ring endomorphism is fixed by the image `y` of `x`, which must be a
//! topologically nilpotent unit; coefficients move by a power of the Witt Frobenius.
//! When `y = x^p mod p` the endomorphism `psi` lifts Frobenius and
//! `theta(f) = (psi(f) - f^p) / p`. Division by `p` costs one digit, so a structure
//! computing `theta` into `W_n` works over `W_{n+1}`.

use num::BigInt;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::laurent::{LaurentSeries, SeriesRing};
use crate::witt::WittElem;

/// `x -> y` with coefficients acted on by `sigma^frob`.
#[derive(Clone, Debug)]
pub struct PipeEndo {
    pub ring: SeriesRing,
    pub y: LaurentSeries,
    pub frob: u32,
}

impl PipeEndo {
    pub fn new(ring: &SeriesRing, y: LaurentSeries) -> Result<Self> {
        Self::with_frobenius(ring, y, 1)
    }

    pub fn with_frobenius(ring: &SeriesRing, y: LaurentSeries, frob: u32) -> Result<Self> {
        if !ring.is_unit(&y)? {
            return Err(Error::NotUnit);
        }
        if !ring.is_topologically_nilpotent(&y)? {
            return Err(Error::NotTopologicallyNilpotent);
        }
        Ok(PipeEndo { ring: ring.clone(), y, frob })
    }

    /// Lower bound for `v_x(y^d)`: a nonzero product of `d` terms of `y` uses at most
    /// `n - 1` terms divisible by `p`.
    fn power_valuation_bound(&self, d: i64) -> i64 {
        let (m, _) = self.ring.min_unit_term(&self.y).expect("validated unit");
        let e_min = self.y.v_x().unwrap_or(m).min(m);
        let n = self.ring.coeff_ring().n() as i64;
        m * d - (n - 1) * (m - e_min)
    }

    /// `f(y)` with `sigma^frob` applied to the coefficients of `f`.
    pub fn apply(&self, f: &LaurentSeries) -> Result<LaurentSeries> {
        let r = &self.ring;
        let w = r.coeff_ring();
        let Some(top) = f.max_degree() else {
            return match f.prec() {
                crate::laurent::Prec::Exact => Ok(r.zero_series()),
                crate::laurent::Prec::Abs(n) => Ok(r.big_o(self.power_valuation_bound(n).min(r.hi()))),
            };
        };
        let bottom = f.v_x().expect("nonzero");
        let mut acc = r.zero_series();
        let mut pos = r.one_series();
        let mut neg = r.one_series();
        let yinv = if bottom < 0 { Some(r.invert(&self.y)?) } else { None };
        // Walk the terms upward for non-negative degrees and downward for negative ones.
        let mut d_pos = 0;
        for &(d, c) in f.terms().iter().filter(|t| t.0 >= 0) {
            while d_pos < d {
                pos = r.mul(&pos, &self.y)?;
                d_pos += 1;
            }
            let c = w.frobenius_pow(&c, self.frob as i64);
            acc = r.add(&acc, &r.scale(&pos, &c));
        }
        let mut d_neg = 0;
        for &(d, c) in f.terms().iter().rev().filter(|t| t.0 < 0) {
            let yinv = yinv.as_ref().expect("negative support");
            while d_neg > d {
                neg = r.mul(&neg, yinv)?;
                d_neg -= 1;
            }
            let c = w.frobenius_pow(&c, self.frob as i64);
            acc = r.add(&acc, &r.scale(&neg, &c));
        }
        let _ = top;
        if let crate::laurent::Prec::Abs(n) = f.prec() {
            acc = r.add(&acc, &r.big_o(self.power_valuation_bound(n)));
        }
        Ok(acc)
    }

    /// `y = x^p mod p` and the coefficient action is the Frobenius.
    pub fn is_frobenius_lift(&self) -> bool {
        let r = &self.ring;
        let w = r.coeff_ring();
        let p = r.p() as i64;
        if self.frob as usize % w.degree() != 1 % w.degree() {
            return false;
        }
        let xp = r.monomial(w.one(), p).expect("x^p in window");
        let diff = r.sub(&self.y, &xp);
        diff.terms().iter().all(|(_, c)| !w.is_unit(c))
    }
}

/// A Frobenius lift on `W_{n+1} k((x))`, producing `theta` with values in `W_n k((x))`.
#[derive(Clone, Debug)]
pub struct ThetaStructure {
    pub endo: PipeEndo,
    pub out: SeriesRing,
}

impl ThetaStructure {
    /// `ring` carries the guard digit: its precision is one more than that of the output.
    pub fn new(ring: &SeriesRing, y: LaurentSeries) -> Result<Self> {
        let n = ring.coeff_ring().n();
        if n < 2 {
            return Err(Error::GuardDigitMissing);
        }
        let endo = PipeEndo::new(ring, y)?;
        if !endo.is_frobenius_lift() {
            return Err(Error::NotFrobeniusLift);
        }
        let out = ring.with_coeff(ring.coeff_ring().with_precision(n - 1)?);
        Ok(ThetaStructure { endo, out })
    }

    /// `psi(x) = x^p + c`.
    pub fn shifted(ring: &SeriesRing, c: i64) -> Result<Self> {
        let w = ring.coeff_ring();
        let y = ring.add(&ring.monomial(w.one(), ring.p() as i64)?, &ring.constant(w.from_i64(c)));
        Self::new(ring, y)
    }

    pub fn ring(&self) -> &SeriesRing {
        &self.endo.ring
    }

    pub fn psi(&self, f: &LaurentSeries) -> Result<LaurentSeries> {
        self.endo.apply(f)
    }

    /// `(psi(f) - f^p) / p` in the output ring.
    pub fn theta(&self, f: &LaurentSeries) -> Result<LaurentSeries> {
        let r = self.ring();
        let num = r.sub(&self.psi(f)?, &r.pow(f, r.p())?);
        r.div_p(&num, &self.out).map_err(|e| match e {
            Error::InvalidParameter(_) => Error::NotFrobeniusLift,
            e => e,
        })
    }

    /// `theta` of a series given over another ring; it must carry the guard digit.
    pub fn theta_from(&self, src: &SeriesRing, f: &LaurentSeries) -> Result<LaurentSeries> {
        if src.coeff_ring().n() < self.ring().coeff_ring().n() {
            return Err(Error::GuardDigitMissing);
        }
        self.theta(&src.reduce_to(f, self.ring())?)
    }

    /// Reduce a guard-ring series into the output ring.
    pub fn down(&self, f: &LaurentSeries) -> Result<LaurentSeries> {
        self.ring().reduce_to(f, &self.out)
    }

    /// Check the sum and product formulas for `(f, g)`.
    pub fn check_axioms(&self, f: &LaurentSeries, g: &LaurentSeries) -> Result<AxiomCheck> {
        let r = self.ring();
        let o = &self.out;
        let p = r.p();
        let tf = self.theta(f)?;
        let tg = self.theta(g)?;

        let lhs = self.theta(&r.add(f, g))?;
        let mut rhs = o.add(&tf, &tg);
        for i in 1..p {
            let c = binomial_over_p(p, i);
            let t = r.mul(&r.pow(f, i)?, &r.pow(g, p - i)?)?;
            let t = o.scale(&self.down(&t)?, &o.coeff_ring().from_i64(c));
            rhs = o.sub(&rhs, &t);
        }
        let sum = first_mismatch(o, &lhs, &rhs);

        let lhs = self.theta(&r.mul(f, g)?)?;
        let gp = self.down(&r.pow(g, p)?)?;
        let fp = self.down(&r.pow(f, p)?)?;
        let pt = o.scale(&o.mul(&tf, &tg)?, &o.coeff_ring().from_i64(p as i64));
        let rhs = o.add(&o.add(&o.mul(&tf, &gp)?, &o.mul(&fp, &tg)?), &pt);
        let product = first_mismatch(o, &lhs, &rhs);

        Ok(AxiomCheck { sum, product })
    }

    /// `theta(f + p^2 g) = theta(f) mod p`.
    pub fn descent_check(&self, f: &LaurentSeries, g: &LaurentSeries) -> Result<bool> {
        let r = self.ring();
        let w = r.coeff_ring();
        let p2 = w.from_i64((r.p() * r.p()) as i64);
        let a = self.theta(&r.add(f, &r.scale(g, &p2)))?;
        let b = self.theta(f)?;
        let k = self.out.with_coeff(w.residue_ring());
        Ok(k.eq(&self.out.reduce_to(&a, &k)?, &self.out.reduce_to(&b, &k)?))
    }
}

/// `C(p, i) / p`.
fn binomial_over_p(p: u64, i: u64) -> i64 {
    let mut c: u128 = 1;
    for j in 0..i {
        c = c * (p - j) as u128 / (j + 1) as u128;
    }
    (c / p as u128) as i64
}

/// First degree where `a` and `b` differ, with both coefficients formatted.
fn first_mismatch(r: &SeriesRing, a: &LaurentSeries, b: &LaurentSeries) -> Option<(i64, String, String)> {
    let d = r.sub(a, b);
    d.terms().first().map(|&(deg, _)| {
        let w = r.coeff_ring();
        (deg, w.format(&r.coeff(a, deg)), w.format(&r.coeff(b, deg)))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub sum: Option<(i64, String, String)>,
    pub product: Option<(i64, String, String)>,
}

impl AxiomCheck {
    pub fn ok(&self) -> bool {
        self.sum.is_none() && self.product.is_none()
    }
}

/// `(m - m^p) / p`.
pub fn theta_integer(p: u64, m: i64) -> BigInt {
    let m = BigInt::from(m);
    (&m - num::pow(m.clone(), p as usize)) / BigInt::from(p)
}

/// A reduction mod `p^2` of a candidate automorphism: `x -> a x + g(x) + p h(x^{-1})`.
#[derive(Clone, Debug)]
pub struct CandidateAut {
    pub a: WittElem,
    pub g: LaurentSeries,
    pub h: LaurentSeries,
}

impl CandidateAut {
    pub fn validate(&self, ring: &SeriesRing) -> bool {
        let w = ring.coeff_ring();
        w.is_unit(&self.a)
            && self.g.v_x().map_or(true, |v| v >= 2)
            && self.h.max_degree().map_or(true, |d| d <= 0)
            && self.g.is_exact()
            && self.h.is_exact()
    }

    /// `a` a unit, `g` supported in `[2, 12]`, `h` in `[-6, 0]`.
    pub fn random<R: Rng + ?Sized>(ring: &SeriesRing, rng: &mut R) -> Result<Self> {
        let a = ring.coeff_ring().random_unit(rng);
        let g = ring.random_poly(rng, 2, 12)?;
        let h = ring.random_poly(rng, -6, 0)?;
        Ok(CandidateAut { a, g, h })
    }

    /// As [`CandidateAut::random`] with every coefficient of `h` divisible by `p`.
    pub fn random_h_divisible<R: Rng + ?Sized>(ring: &SeriesRing, rng: &mut R) -> Result<Self> {
        let mut c = Self::random(ring, rng)?;
        c.h = ring.scale(&c.h, &ring.coeff_ring().from_i64(ring.p() as i64));
        Ok(c)
    }

    pub fn image_of_x(&self, ring: &SeriesRing) -> Result<LaurentSeries> {
        let w = ring.coeff_ring();
        let ax = ring.monomial(self.a, 1)?;
        let ph = ring.scale(&self.h, &w.from_i64(ring.p() as i64));
        Ok(ring.add(&ring.add(&ax, &self.g), &ph))
    }

    pub fn to_json(&self, ring: &SeriesRing) -> Value {
        json!({
            "a": ring.coeff_ring().rep_json(&self.a),
            "g": ring.series_json(&self.g),
            "h": ring.series_json(&self.h),
        })
    }
}

/// Window wide enough for the obstruction computation at prime `p`.
pub fn obstruction_window(p: u64) -> (i64, i64) {
    let p = p as i64;
    (-8 * p, 13 * p)
}

/// The structure `psi(x) = x^p + p` on `W_2 k((x))`, with values of `theta` in `k((x))`.
pub fn obstruction_structure(k: &crate::witt::FiniteField) -> Result<ThetaStructure> {
    let (lo, hi) = obstruction_window(k.p());
    let ring = SeriesRing::new(crate::witt::WittRing::new(k.clone(), 2)?, lo, hi)?;
    ThetaStructure::shifted(&ring, k.p() as i64)
}

/// `theta(f(x)) mod p`, which must vanish if `f` intertwines `psi_0(x) = x^p` and `t`.
pub fn obstruction_value(t: &ThetaStructure, c: &CandidateAut) -> Result<LaurentSeries> {
    t.theta(&c.image_of_x(t.ring())?)
}

#[derive(Clone, Debug)]
pub struct CertTerm {
    pub name: &'static str,
    pub value: LaurentSeries,
    pub v_x: Option<i64>,
}

/// Decomposition of `theta(f(x)) mod p` into the terms of the non-isomorphism argument.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub candidate: CandidateAut,
    pub value: LaurentSeries,
    pub terms: Vec<CertTerm>,
    /// The `theta(a) x^p` term placed at `v_x = 1` as in the valuation list of the argument.
    pub theta_a_alt_v_x: Option<i64>,
    pub nonzero: bool,
    pub decomposition_matches: bool,
    pub h_zero_mod_p: bool,
    /// `h mod p` has a nonzero coefficient in negative degree.
    pub h_negative_mod_p: bool,
    pub constant_term_is_a_p: bool,
    pub theta_g_ok: bool,
    pub cross_ok: bool,
    pub negative_part_nonzero: bool,
}

impl Certificate {
    /// The checks the argument predicts for this candidate.
    pub fn consistent(&self) -> bool {
        let p_case = !self.h_zero_mod_p || (self.value.v_x() == Some(0) && self.constant_term_is_a_p);
        let neg_case = self.h_negative_mod_p == self.negative_part_nonzero;
        self.nonzero && self.decomposition_matches && self.theta_g_ok && self.cross_ok && p_case && neg_case
    }

    pub fn to_json(&self, t: &ThetaStructure) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|term| {
                let mut v = json!({"name": term.name, "v_x": term.v_x});
                if term.name == "theta(a)x^p" {
                    v["v_x_as_listed"] = json!(self.theta_a_alt_v_x);
                }
                v
            })
            .collect();
        json!({
            "candidate": self.candidate.to_json(t.ring()),
            "terms": terms,
            "nonzero": self.nonzero,
            "checks": {
                "constant_term_is_a_p": self.constant_term_is_a_p,
                "cross_terms_v_x_at_least_p_plus_1": self.cross_ok,
                "decomposition_matches": self.decomposition_matches,
                "h_negative_mod_p": self.h_negative_mod_p,
                "h_zero_mod_p": self.h_zero_mod_p,
                "negative_part_nonzero": self.negative_part_nonzero,
                "theta_g_v_x_at_least_2": self.theta_g_ok,
            },
        })
    }
}

pub fn obstruction_certificate(t: &ThetaStructure, c: &CandidateAut) -> Result<Certificate> {
    let r = t.ring();
    let w = r.coeff_ring();
    let o = &t.out;
    let k = o.coeff_ring();
    let p = r.p();
    let value = obstruction_value(t, c)?;

    // theta(a x) = theta(a) x^p + a^p theta(x) mod p.
    let a_series = r.constant(c.a);
    let theta_a = t.theta(&a_series)?;
    let theta_x = t.theta(&r.x())?;
    let ap = w.reduce_to(&w.pow(&c.a, p), k)?;
    let ap_term = o.scale(&theta_x, &ap);
    let theta_a_term = o.shift(&theta_a, p as i64)?;
    let theta_g = t.theta(&c.g)?;
    let ax = r.monomial(c.a, 1)?;
    let mut cross = o.zero_series();
    for i in 1..p {
        let term = r.mul(&r.pow(&ax, i)?, &r.pow(&c.g, p - i)?)?;
        let term = o.scale(&t.down(&term)?, &k.from_i64(binomial_over_p(p, i)));
        cross = o.sub(&cross, &term);
    }
    let ph = r.scale(&c.h, &w.from_i64(p as i64));
    let theta_ph = t.theta(&ph)?;

    let mut total = o.zero_series();
    for s in [&ap_term, &theta_a_term, &theta_g, &cross, &theta_ph] {
        total = o.add(&total, s);
    }
    let decomposition_matches = o.eq(&total, &value);

    let h_red: Vec<_> = c.h.terms().iter().filter(|(_, a)| w.is_unit(a)).map(|t| t.0).collect();
    let h_zero_mod_p = h_red.is_empty();
    let h_negative_mod_p = h_red.iter().any(|&d| d < 0);
    let constant_term_is_a_p = o.coeff(&value, 0) == ap;
    let theta_g_ok = theta_g.v_x().map_or(true, |v| v >= 2);
    let cross_ok = cross.v_x().map_or(true, |v| v >= p as i64 + 1);
    let negative_part_nonzero = value.v_x().map_or(false, |v| v < 0);
    let nonzero = !value.terms().is_empty();
    let theta_a_alt_v_x = theta_a.v_x().map(|_| 1);

    let terms = vec![
        CertTerm { name: "a^p", v_x: ap_term.v_x(), value: ap_term },
        CertTerm { name: "theta(a)x^p", v_x: theta_a_term.v_x(), value: theta_a_term },
        CertTerm { name: "theta(g)", v_x: theta_g.v_x(), value: theta_g },
        CertTerm { name: "cross", v_x: cross.v_x(), value: cross },
        CertTerm { name: "theta(p)h^p", v_x: theta_ph.v_x(), value: theta_ph },
    ];
    Ok(Certificate {
        candidate: c.clone(),
        value,
        terms,
        theta_a_alt_v_x,
        nonzero,
        decomposition_matches,
        h_zero_mod_p,
        h_negative_mod_p,
        constant_term_is_a_p,
        theta_g_ok,
        cross_ok,
        negative_part_nonzero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::{FiniteField, WittRing};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(p: u64, n: u32, lo: i64, hi: i64) -> SeriesRing {
        SeriesRing::new(WittRing::prime(p, n).unwrap(), lo, hi).unwrap()
    }

    #[test]
    fn pipe_endomorphisms() {
        let r = ring(3, 2, -8, 32);
        let x3 = r.from_ints(&[(3, 1)]).unwrap();
        assert!(PipeEndo::new(&r, x3.clone()).is_ok());
        let shifted = r.from_ints(&[(0, 3), (3, 1)]).unwrap();
        assert!(PipeEndo::new(&r, shifted.clone()).is_ok());
        let one_plus_x = r.from_ints(&[(0, 1), (1, 1)]).unwrap();
        assert_eq!(PipeEndo::new(&r, one_plus_x).unwrap_err(), Error::NotTopologicallyNilpotent);
        assert_eq!(PipeEndo::new(&r, r.from_ints(&[(1, 3)]).unwrap()).unwrap_err(), Error::NotUnit);

        let e = PipeEndo::new(&r, x3.clone()).unwrap();
        assert_eq!(e.apply(&r.from_ints(&[(2, 1)]).unwrap()).unwrap(), r.from_ints(&[(6, 1)]).unwrap());
        assert_eq!(e.apply(&r.from_ints(&[(-1, 1)]).unwrap()).unwrap(), r.from_ints(&[(-3, 1)]).unwrap());
        let e = PipeEndo::new(&r, shifted.clone()).unwrap();
        assert_eq!(e.apply(&r.x()).unwrap(), shifted);
    }

    #[test]
    fn frobenius_lift_detection() {
        let r = ring(3, 3, -8, 32);
        let lift = |terms: &[(i64, i64)]| PipeEndo::new(&r, r.from_ints(terms).unwrap()).unwrap().is_frobenius_lift();
        assert!(lift(&[(0, 3), (3, 1)]));
        assert!(lift(&[(-1, 9), (3, 1)]));
        assert!(!lift(&[(2, 1)]));
    }

    #[test]
    fn psi_is_a_ring_map_lifting_frobenius() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [2u64, 3] {
            let r = ring(p, 4, -8, 32);
            let t = ThetaStructure::shifted(&r, p as i64).unwrap();
            let k = r.with_coeff(r.coeff_ring().residue_ring());
            for _ in 0..20 {
                let f = r.random_poly(&mut rng, 0, 6).unwrap();
                let g = r.random_poly(&mut rng, 0, 6).unwrap();
                let sum = t.psi(&r.add(&f, &g)).unwrap();
                assert!(r.eq(&sum, &r.add(&t.psi(&f).unwrap(), &t.psi(&g).unwrap())));
                let prod = t.psi(&r.mul(&f, &g).unwrap()).unwrap();
                assert!(r.eq(&prod, &r.mul(&t.psi(&f).unwrap(), &t.psi(&g).unwrap()).unwrap()));
                let fp = r.pow(&f, p).unwrap();
                assert!(k.eq(&r.reduce_to(&t.psi(&f).unwrap(), &k).unwrap(), &r.reduce_to(&fp, &k).unwrap()));
            }
        }
    }

    #[test]
    fn theta_on_generators() {
        let r = ring(3, 3, -8, 32);
        let t0 = ThetaStructure::shifted(&r, 0).unwrap();
        let t = ThetaStructure::shifted(&r, 3).unwrap();
        assert!(t0.theta(&r.x()).unwrap().terms().is_empty());
        assert_eq!(t.theta(&r.x()).unwrap(), t.out.from_i64(1));
        let k = t.out.with_coeff(t.out.coeff_ring().residue_ring());
        for m in 1..=10i64 {
            let xm = r.from_ints(&[(m, 1)]).unwrap();
            let got = t.out.reduce_to(&t.theta(&xm).unwrap(), &k).unwrap();
            let want = k.from_ints(&[(3 * (m - 1), m)]).unwrap();
            assert!(k.eq(&got, &want), "m = {m}");
            assert!(t0.theta(&xm).unwrap().terms().is_empty());
        }
        let no_guard = ring(3, 1, -8, 32);
        assert_eq!(ThetaStructure::shifted(&no_guard, 0).unwrap_err(), Error::GuardDigitMissing);
        let lower = ring(3, 2, -8, 32);
        assert_eq!(t.theta_from(&lower, &lower.x()).unwrap_err(), Error::GuardDigitMissing);
    }

    #[test]
    fn theta_on_integers() {
        assert_eq!(theta_integer(2, 3), BigInt::from(-3));
        assert_eq!(theta_integer(3, 3), BigInt::from(-8));
        assert_eq!(theta_integer(5, 0), BigInt::from(0));
        assert_eq!(theta_integer(5, 1), BigInt::from(0));
        // Agrees with theta on constants of the series ring.
        let r = ring(3, 4, -8, 32);
        let t = ThetaStructure::shifted(&r, 0).unwrap();
        for m in -10..=10 {
            let got = t.theta(&r.from_i64(m)).unwrap();
            let want = t.out.from_i64(i64::try_from(theta_integer(3, m)).unwrap());
            assert!(t.out.eq(&got, &want));
        }
    }

    #[test]
    fn axioms_and_descent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [2u64, 3] {
            let r = ring(p, 5, -8, 32);
            for (c, lo) in [(0i64, -1i64), (p as i64, 0)] {
                let t = ThetaStructure::shifted(&r, c).unwrap();
                for _ in 0..10 {
                    let f = r.random_poly(&mut rng, lo, 8).unwrap();
                    let g = r.random_poly(&mut rng, lo, 8).unwrap();
                    assert!(t.check_axioms(&f, &g).unwrap().ok());
                    assert!(t.descent_check(&f, &g).unwrap());
                }
                assert!(t.check_axioms(&r.x(), &r.zero_series()).unwrap().ok());
                assert!(t.check_axioms(&r.x(), &r.one_series()).unwrap().ok());
            }
        }
    }

    #[test]
    fn obstruction_examples() {
        let k = FiniteField::prime(3).unwrap();
        let t = obstruction_structure(&k).unwrap();
        let r = t.ring().clone();
        let w = r.coeff_ring().clone();
        let plain = CandidateAut { a: w.one(), g: r.zero_series(), h: r.zero_series() };
        assert_eq!(obstruction_value(&t, &plain).unwrap(), t.out.from_i64(1));
        let with_g = CandidateAut { a: w.one(), g: r.from_ints(&[(2, 1)]).unwrap(), h: r.zero_series() };
        let v = obstruction_value(&t, &with_g).unwrap();
        assert_eq!(v.v_x(), Some(0));
        assert_eq!(t.out.coeff(&v, 0), t.out.coeff_ring().one());
        let a = w.from_i64(2);
        let scaled = CandidateAut { a, g: r.zero_series(), h: r.zero_series() };
        // a^p theta(x) + theta(a) x^p = 8 - 2 x^3.
        assert_eq!(obstruction_value(&t, &scaled).unwrap(), t.out.from_ints(&[(0, 8), (3, -2)]).unwrap());
        let cert = obstruction_certificate(&t, &with_g).unwrap();
        assert!(cert.consistent());
        let neg = CandidateAut { a: w.one(), g: r.zero_series(), h: r.from_ints(&[(-2, 1)]).unwrap() };
        let cert = obstruction_certificate(&t, &neg).unwrap();
        assert!(cert.negative_part_nonzero && cert.consistent());
    }

    #[test]
    fn constant_h_escapes_the_argument() {
        // x -> x - p intertwines psi_0 and psi mod p^2: psi(x - p) = x^p and (x - p)^p = x^p.
        for p in [2u64, 3, 5] {
            let k = FiniteField::prime(p).unwrap();
            let t = obstruction_structure(&k).unwrap();
            let r = t.ring().clone();
            let w = r.coeff_ring().clone();
            let c = CandidateAut { a: w.one(), g: r.zero_series(), h: r.from_i64(-1) };
            let f = c.image_of_x(&r).unwrap();
            let xp = r.from_ints(&[(p as i64, 1)]).unwrap();
            assert!(r.eq(&t.psi(&f).unwrap(), &xp));
            assert!(r.eq(&r.pow(&f, p).unwrap(), &xp));
            let cert = obstruction_certificate(&t, &c).unwrap();
            assert!(!cert.nonzero);
            assert!(cert.decomposition_matches);
            assert!(!cert.h_zero_mod_p && !cert.negative_part_nonzero);
        }
    }

    #[test]
    fn random_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in [2u64, 3] {
            let k = FiniteField::extension(p, 2).unwrap();
            let t = obstruction_structure(&k).unwrap();
            for _ in 0..20 {
                let c = CandidateAut::random(t.ring(), &mut rng).unwrap();
                assert!(c.validate(t.ring()));
                let cert = obstruction_certificate(&t, &c).unwrap();
                assert!(cert.consistent(), "{:?}", cert.to_json(&t));
            }
        }
    }
}
