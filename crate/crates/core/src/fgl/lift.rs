//! Lifting isomorphisms of formal group laws along nilpotent ideals.
//!
//! An isomorphism `phi: F_1 -> F_2` of laws of finite height commutes with the
//! `p`-series. Starting from a lift of the reduction, each step solves
//! `delta([p]_1(x)) = [p]_2(phi(x)) - phi([p]_1(x))` for the correction `delta`. When
//! `[p]_1` starts at degree `m`, the correction is only determined up to degree `V / m`
//! for an input known to degree `V`.

use crate::error::{Error, Result};
use crate::ring::{CoeffRing, DualRing};
use crate::series::{self, Series};
use crate::witt::WittRing;

use super::FormalGroupLaw;

pub trait Ideal<R: CoeffRing> {
    /// Canonical representative of `a` modulo the ideal.
    fn residue(&self, ring: &R, a: &R::Elem) -> R::Elem;
    /// Smallest `k` with `I^k = 0`.
    fn nilpotency(&self, ring: &R) -> u32;

    fn contains(&self, ring: &R, a: &R::Elem) -> bool {
        ring.is_zero(&self.residue(ring, a))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ZeroIdeal;

impl<R: CoeffRing> Ideal<R> for ZeroIdeal {
    fn residue(&self, _ring: &R, a: &R::Elem) -> R::Elem {
        a.clone()
    }
    fn nilpotency(&self, _ring: &R) -> u32 {
        1
    }
}

/// `(eps)` in `R[eps]/eps^2`.
#[derive(Clone, Copy, Debug)]
pub struct EpsilonIdeal;

impl<R: CoeffRing> Ideal<DualRing<R>> for EpsilonIdeal {
    fn residue(&self, ring: &DualRing<R>, a: &<DualRing<R> as CoeffRing>::Elem) -> <DualRing<R> as CoeffRing>::Elem {
        ring.lift(a.re.clone())
    }
    fn nilpotency(&self, _ring: &DualRing<R>) -> u32 {
        2
    }
}

/// `(p)` in `W_n(F_q)`.
#[derive(Clone, Copy, Debug)]
pub struct PIdeal;

impl Ideal<WittRing> for PIdeal {
    fn residue(&self, ring: &WittRing, a: &<WittRing as CoeffRing>::Elem) -> <WittRing as CoeffRing>::Elem {
        ring.residue(a)
    }
    fn nilpotency(&self, ring: &WittRing) -> u32 {
        ring.n()
    }
}

/// Output of [`lift_iso`].
#[derive(Clone, Debug)]
pub struct LiftedIso<E> {
    pub phi: Series<E>,
    /// Degree to which `phi` is determined.
    pub degree: usize,
    pub steps: u32,
}

fn residue_series<R: CoeffRing, I: Ideal<R>>(r: &R, ideal: &I, f: &[R::Elem]) -> Series<R::Elem> {
    f.iter().map(|c| ideal.residue(r, c)).collect()
}

/// Solve `delta(y(x)) = e(x)` to degree `v`; `y` has unit leading coefficient at degree `m`.
fn solve_composition<R: CoeffRing>(r: &R, y: &[R::Elem], m: usize, e: &[R::Elem], v: usize) -> Result<Series<R::Elem>> {
    let k_max = v / m;
    let y = series::truncate(r, y, v);
    let lead_inv = r.inverse(&y[m])?;
    let mut delta = series::zeros(r, k_max);
    let mut acc = series::zeros(r, v);
    let mut ypow = series::x_series(r, v);
    ypow[1] = r.zero();
    ypow[0] = r.one();
    let mut lead_pow = r.one();
    for k in 1..=k_max {
        ypow = series::mul(r, &ypow, &y, v)?;
        lead_pow = r.mul(&lead_pow, &lead_inv)?;
        let rest = r.sub(&e[k * m], &acc[k * m]);
        let d = r.mul(&rest, &lead_pow)?;
        if !r.is_zero(&d) {
            acc = series::add(r, &acc, &series::scale(r, &ypow, &d)?);
        }
        delta[k] = d;
    }
    if let Some(k) = series::first_difference(r, &acc, &series::truncate(r, e, v)) {
        return Err(Error::NoLift(format!("correction equation inconsistent at degree {k}")));
    }
    Ok(delta)
}

/// The unique isomorphism `F_1 -> F_2` reducing to `phibar` modulo `ideal`.
///
/// Requires `p` to lie in the ideal or to vanish in the ring, and `[p]_1` to have a
/// unit leading coefficient (finite height). The result is checked to be an isomorphism,
/// so a `phibar` that is not one modulo the ideal gives `NoLift`.
pub fn lift_iso<R: CoeffRing, I: Ideal<R>>(
    f1: &FormalGroupLaw<R>,
    f2: &FormalGroupLaw<R>,
    ideal: &I,
    phibar: &[R::Elem],
) -> Result<LiftedIso<R::Elem>> {
    let r = &f1.ring;
    let pe = r.from_i64(r.prime() as i64);
    if !r.is_zero(&pe) && !ideal.contains(r, &pe) {
        return Err(Error::NoLift("p is neither zero nor in the ideal".into()));
    }
    let d = f1.degree().min(f2.degree());
    let p1 = f1.truncate(d).p_series()?;
    let p2 = f2.truncate(d).p_series()?;
    let m = series::valuation(r, &p1).ok_or(Error::HeightExceedsPrecision)?;
    if !r.is_unit(&p1[m]) {
        return Err(Error::NoLift(format!("leading p-series coefficient at degree {m} is not a unit")));
    }
    let mut phi = series::truncate(r, phibar, d);
    let mut v = d;
    for steps in 0..=ideal.nilpotency(r).max(1) {
        let ph = series::truncate(r, &phi, v);
        let lhs = series::compose(r, &series::truncate(r, &p2, v), &ph, v)?;
        let rhs = series::compose(r, &ph, &series::truncate(r, &p1, v), v)?;
        let e = series::sub(r, &lhs, &rhs);
        if series::is_zero(r, &e) {
            if !f1.truncate(v).iso_check(&f2.truncate(v), &ph)? {
                return Err(Error::NoLift("the reduction is not an isomorphism".into()));
            }
            return Ok(LiftedIso { phi: ph, degree: v, steps });
        }
        let delta = solve_composition(r, &p1, m, &e, v)?;
        if let Some(k) = delta.iter().position(|c| !ideal.contains(r, c)) {
            return Err(Error::NoLift(format!("correction at degree {k} is not in the ideal")));
        }
        v /= m;
        phi = series::add(r, &series::truncate(r, &phi, v), &series::truncate(r, &delta, v));
    }
    Err(Error::NoLift("no convergence within the nilpotency bound".into()))
}

/// Reduce a series modulo the ideal.
pub fn reduce_iso<R: CoeffRing, I: Ideal<R>>(r: &R, ideal: &I, phi: &[R::Elem]) -> Series<R::Elem> {
    residue_series(r, ideal, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgl::honda_fgl;

    fn dual_f4() -> DualRing<WittRing> {
        DualRing::new(WittRing::new(crate::witt::FiniteField::extension(2, 2).unwrap(), 1).unwrap())
    }

    #[test]
    fn zero_ideal_returns_input() {
        let w = WittRing::prime(2, 1).unwrap();
        let f = honda_fgl(&w, 2, 8).unwrap();
        let x = series::x_series(&w, 8);
        let got = lift_iso(&f, &f, &ZeroIdeal, &x).unwrap();
        assert_eq!(got.phi, x);
        assert_eq!(got.steps, 0);
    }

    #[test]
    fn identity_over_dual_numbers() {
        let r = dual_f4();
        let base = honda_fgl(&r.base, 2, 16).unwrap();
        let f = base.map(&r, |c| Ok(r.lift(*c))).unwrap();
        let x = series::x_series(&r, 16);
        let got = lift_iso(&f, &f, &EpsilonIdeal, &x).unwrap();
        assert_eq!(got.phi, x);
    }

    #[test]
    fn recovers_conjugating_series() {
        let r = dual_f4();
        let base = honda_fgl(&r.base, 1, 16).unwrap();
        let f = base.map(&r, |c| Ok(r.lift(*c))).unwrap();
        let g = r.base.generator();
        let mut h = series::x_series(&r, 16);
        h[1] = r.make(g, r.base.one());
        h[2] = r.make(r.base.one(), g);
        h[3] = r.epsilon();
        let f2 = f.conjugate(&h).unwrap();
        let bar = reduce_iso(&r, &EpsilonIdeal, &h);
        let got = lift_iso(&f, &f2, &EpsilonIdeal, &bar).unwrap();
        assert_eq!(got.degree, 8);
        assert!(series::equal(&r, &got.phi, &series::truncate(&r, &h, 8)));
        assert!(f.truncate(8).iso_check(&f2.truncate(8), &got.phi).unwrap());
    }

    #[test]
    fn rejects_wrong_reduction() {
        let r = dual_f4();
        let base = honda_fgl(&r.base, 1, 8).unwrap();
        let f = base.map(&r, |c| Ok(r.lift(*c))).unwrap();
        let mut bad = series::x_series(&r, 8);
        bad[3] = r.one();
        assert!(matches!(lift_iso(&f, &f, &EpsilonIdeal, &bad), Err(Error::NoLift(_))));
    }
}
