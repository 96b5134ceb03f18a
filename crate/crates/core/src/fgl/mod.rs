//! One-dimensional formal group laws truncated at a total degree.
//!
//! Laws are built from logarithms over `Q` or `Q[u_1..u_{n-1}]` with exact rational
//! arithmetic, checked to be `p`-integral, and then mapped into the coefficient ring
//! of interest (Witt vectors, series rings, dual numbers).

pub mod lift;

use num::rational::BigRational;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ring::{ratio, CoeffRing, PolyElem, RationalAlgebra, Rationals, TruncPoly};
use crate::series::{self, Biv, Series};
use crate::witt::WittRing;

#[derive(Clone, Debug)]
pub struct FormalGroupLaw<R: CoeffRing> {
    pub ring: R,
    pub coeffs: Biv<R::Elem>,
}

/// Result of the axiom checks, with the first failing coefficient if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub unit: bool,
    pub commutative: bool,
    pub associative: bool,
    pub failure: Option<String>,
}

impl AxiomReport {
    pub fn ok(&self) -> bool {
        self.unit && self.commutative && self.associative
    }
}

/// Lubin-Tate parameters `u_1..u_{n-1}` read off a normal-form `p`-series, together with
/// the coefficient of `x^{p^n}` left at the end (1 for a deformation of height `n`).
#[derive(Clone, Debug, PartialEq)]
pub struct LtParams<E> {
    pub params: Vec<E>,
    pub top: E,
}

fn is_p_power(p: u64, m: usize) -> Option<u32> {
    let mut k = 1usize;
    let mut e = 0;
    while k < m {
        k *= p as usize;
        e += 1;
    }
    (k == m).then_some(e)
}

impl<R: CoeffRing> FormalGroupLaw<R> {
    pub fn degree(&self) -> usize {
        self.coeffs.d
    }

    /// `x + y`.
    pub fn additive(ring: R, d: usize) -> Self {
        let mut c = series::biv_zero(&ring, d);
        if d >= 1 {
            c.c[1][0] = ring.one();
            c.c[0][1] = ring.one();
        }
        FormalGroupLaw { ring, coeffs: c }
    }

    /// `x + y + xy`.
    pub fn multiplicative(ring: R, d: usize) -> Self {
        let mut f = Self::additive(ring, d);
        if d >= 2 {
            f.coeffs.c[1][1] = f.ring.one();
        }
        f
    }

    pub fn coeff(&self, i: usize, j: usize) -> &R::Elem {
        &self.coeffs.c[i][j]
    }

    pub fn truncate(&self, d: usize) -> Self {
        FormalGroupLaw { ring: self.ring.clone(), coeffs: series::biv_truncate(&self.coeffs, d) }
    }

    /// Coefficient-wise image in another ring.
    pub fn map<S: CoeffRing>(&self, target: &S, f: impl Fn(&R::Elem) -> Result<S::Elem>) -> Result<FormalGroupLaw<S>> {
        Ok(FormalGroupLaw { ring: target.clone(), coeffs: series::biv_map::<R, S>(&self.coeffs, f)? })
    }

    /// `F(f, g)` for univariate series without constant term.
    pub fn formal_sum(&self, f: &[R::Elem], g: &[R::Elem]) -> Result<Series<R::Elem>> {
        let d = self.degree();
        let f = series::truncate(&self.ring, f, d);
        let g = series::truncate(&self.ring, g, d);
        series::biv_eval(&self.ring, &self.coeffs, &f, &g)
    }

    /// The formal inverse `i(x)` with `F(x, i(x)) = 0`.
    pub fn inverse_series(&self) -> Result<Series<R::Elem>> {
        let r = &self.ring;
        let d = self.degree();
        let mut iota = series::zeros(r, d);
        if d >= 1 {
            iota[1] = r.from_i64(-1);
        }
        let x = series::x_series(r, d);
        for k in 2..=d {
            let s = series::biv_eval(r, &series::biv_truncate(&self.coeffs, k), &series::truncate(r, &x, k), &series::truncate(r, &iota, k))?;
            iota[k] = r.neg(&s[k]);
        }
        Ok(iota)
    }

    pub fn formal_neg(&self, f: &[R::Elem]) -> Result<Series<R::Elem>> {
        let d = self.degree();
        let f = series::truncate(&self.ring, f, d);
        series::compose(&self.ring, &self.inverse_series()?, &f, d)
    }

    /// `F(f, i(g))`.
    pub fn formal_diff(&self, f: &[R::Elem], g: &[R::Elem]) -> Result<Series<R::Elem>> {
        let ng = self.formal_neg(g)?;
        self.formal_sum(f, &ng)
    }

    /// `[k](x)` for `k >= 0`.
    pub fn multiple(&self, k: u64) -> Result<Series<R::Elem>> {
        let d = self.degree();
        let x = series::x_series(&self.ring, d);
        let mut acc = series::zeros(&self.ring, d);
        for _ in 0..k {
            acc = self.formal_sum(&acc, &x)?;
        }
        Ok(acc)
    }

    pub fn p_series(&self) -> Result<Series<R::Elem>> {
        self.multiple(self.ring.prime())
    }

    /// Height of a law over a ring of characteristic `p`.
    pub fn height(&self) -> Result<u32> {
        let ps = self.p_series()?;
        let m = series::valuation(&self.ring, &ps).ok_or(Error::HeightExceedsPrecision)?;
        let h = is_p_power(self.ring.prime(), m).ok_or(Error::NonPPowerLeadingTerm(m))?;
        if !self.ring.is_unit(&ps[m]) {
            return Err(Error::NotUnit);
        }
        Ok(h)
    }

    pub fn check_axioms(&self) -> Result<AxiomReport> {
        let r = &self.ring;
        let d = self.degree();
        let c = &self.coeffs.c;
        let mut failure = None;
        let mut unit = true;
        for k in 0..=d {
            let want = if k == 1 { r.one() } else { r.zero() };
            if !r.equal(&c[k][0], &want) || !r.equal(&c[0][k], &want) {
                unit = false;
                failure.get_or_insert(format!("unit axiom at degree {k}"));
            }
        }
        let mut commutative = true;
        for i in 0..=d {
            for j in 0..=d - i {
                if !r.equal(&c[i][j], &c[j][i]) {
                    commutative = false;
                    failure.get_or_insert(format!("commutativity at x^{i}y^{j}"));
                }
            }
        }
        // F(F(x,y),z) = sum_i c[i][k] F^i and F(x,F(y,z)) = sum_j c[a][j] F^j, compared
        // coefficient by coefficient at x^a y^b z^k.
        let mut pw = vec![series::biv_zero(r, d)];
        pw[0].c[0][0] = r.one();
        for i in 1..=d {
            let next = series::biv_mul(r, &pw[i - 1], &self.coeffs)?;
            pw.push(next);
        }
        let mut associative = true;
        'outer: for a in 0..=d {
            for b in 0..=d - a {
                for k in 0..=d - a - b {
                    let mut lhs = r.zero();
                    for i in 0..=d - k {
                        if !r.is_zero(&c[i][k]) && !r.is_zero(&pw[i].c[a][b]) {
                            lhs = r.add(&lhs, &r.mul(&c[i][k], &pw[i].c[a][b])?);
                        }
                    }
                    let mut rhs = r.zero();
                    for j in 0..=d - a {
                        if !r.is_zero(&c[a][j]) && !r.is_zero(&pw[j].c[b][k]) {
                            rhs = r.add(&rhs, &r.mul(&c[a][j], &pw[j].c[b][k])?);
                        }
                    }
                    if !r.equal(&lhs, &rhs) {
                        associative = false;
                        failure.get_or_insert(format!("associativity at x^{a}y^{b}z^{k}"));
                        break 'outer;
                    }
                }
            }
        }
        Ok(AxiomReport { unit, commutative, associative, failure })
    }

    /// Whether `phi(F(x,y)) = G(phi(x), phi(y))` to the common degree.
    pub fn iso_check(&self, other: &FormalGroupLaw<R>, phi: &[R::Elem]) -> Result<bool> {
        let r = &self.ring;
        let d = self.degree().min(other.degree());
        if phi.len() < 2 || !r.is_zero(&phi[0]) || !r.is_unit(&phi[1]) {
            return Ok(false);
        }
        let phi = series::truncate(r, phi, d);
        let lhs = series::biv_compose(r, &phi, &series::biv_truncate(&self.coeffs, d))?;
        let rhs = series::biv_substitute_separate(r, &series::biv_truncate(&other.coeffs, d), &phi, &phi)?;
        Ok(series::biv_equal(r, &lhs, &rhs))
    }

    /// The law `h F(h^{-1} x, h^{-1} y)`, for which `h` is an isomorphism from `F`.
    pub fn conjugate(&self, h: &[R::Elem]) -> Result<Self> {
        let r = &self.ring;
        let d = self.degree();
        let h = series::truncate(r, h, d);
        let hinv = series::reversion(r, &h, d)?;
        let inner = series::biv_substitute_separate(r, &self.coeffs, &hinv, &hinv)?;
        Ok(FormalGroupLaw { ring: r.clone(), coeffs: series::biv_compose(r, &h, &inner)? })
    }

    /// Extract `u_1..u_{n-1}` by peeling `[p](x) = px +_F u_1 x^p +_F ... +_F x^{p^n}`.
    pub fn extract_lt_params(&self, n: u32) -> Result<LtParams<R::Elem>> {
        let r = &self.ring;
        let p = r.prime();
        let d = self.degree();
        let pn = (p as usize).pow(n);
        if pn > d {
            return Err(Error::InvalidParameter(format!("degree {d} is below p^n = {pn}")));
        }
        let mut rest = self.p_series()?;
        let mut term = series::zeros(r, d);
        term[1] = r.from_i64(p as i64);
        if !r.equal(&rest[1], &term[1]) {
            return Err(Error::NotNormalForm(1));
        }
        rest = self.formal_diff(&rest, &term)?;
        let mut params = Vec::new();
        for i in 1..=n {
            let pi = (p as usize).pow(i);
            if let Some(v) = series::valuation(r, &rest) {
                if v < pi {
                    return Err(Error::NotNormalForm(v));
                }
            }
            let u = rest[pi].clone();
            let mut term = series::zeros(r, d);
            term[pi] = u.clone();
            rest = self.formal_diff(&rest, &term)?;
            if i < n {
                params.push(u);
            } else {
                if let Some(v) = series::valuation(r, &rest) {
                    return Err(Error::NotNormalForm(v));
                }
                return Ok(LtParams { params, top: u });
            }
        }
        unreachable!("loop returns at i = n")
    }

    pub fn to_json(&self) -> Value {
        let r = &self.ring;
        let mut terms = Vec::new();
        for (i, j) in self.coeffs.support(r) {
            terms.push(json!([i, j, r.elem_json(&self.coeffs.c[i][j])]));
        }
        json!({"D": self.degree(), "terms": terms})
    }
}

impl<R: RationalAlgebra> FormalGroupLaw<R> {
    /// `F = l^{-1}(l(x) + l(y))`, checked to be `p`-integral.
    pub fn from_log(ring: R, log: &[R::Elem], d: usize) -> Result<Self> {
        let r = &ring;
        let log = series::truncate(r, log, d);
        let exp = series::reversion(r, &log, d)?;
        let s = series::biv_add(r, &series::biv_from_x(r, &log, d, false), &series::biv_from_x(r, &log, d, true));
        let coeffs = series::biv_compose(r, &exp, &s)?;
        for (i, j) in coeffs.support(r) {
            if !r.is_p_integral(&coeffs.c[i][j]) {
                return Err(Error::PrecisionGuardExceeded(format!("x^{i}y^{j}")));
            }
        }
        Ok(FormalGroupLaw { ring, coeffs })
    }

    /// The logarithm, from the invariant differential `dx / F_y(x, 0)`.
    pub fn log(&self) -> Result<Series<R::Elem>> {
        let r = &self.ring;
        let d = self.degree();
        let fy: Vec<_> = (0..=d).map(|i| if i < d { self.coeffs.c[i][1].clone() } else { r.zero() }).collect();
        let dl = series::inverse(r, &fy, d)?;
        let mut l = series::zeros(r, d);
        for k in 1..=d {
            l[k] = r.scale_rational(&dl[k - 1], &ratio(1, k as i64));
        }
        Ok(l)
    }
}

/// `sum_i x^{p^{ni}} / p^i`.
pub fn honda_log(p: u64, n: u32, d: usize) -> Series<BigRational> {
    let q = Rationals { p };
    let mut l = series::zeros(&q, d);
    let mut k = 1usize;
    let mut i = 0u32;
    while k <= d {
        l[k] = BigRational::new(1.into(), num::BigInt::from(p).pow(i));
        k *= (p as usize).pow(n);
        i += 1;
    }
    l
}

pub fn honda_fgl_rational(p: u64, n: u32, d: usize) -> Result<FormalGroupLaw<Rationals>> {
    if n == 0 {
        return Err(Error::InvalidParameter("height must be positive".into()));
    }
    FormalGroupLaw::from_log(Rationals { p }, &honda_log(p, n, d), d)
}

/// The Honda law of height `n` over `ring = W_m(F_q)`: `[p](x) = x^{p^n}` mod `p`.
pub fn honda_fgl(ring: &WittRing, n: u32, d: usize) -> Result<FormalGroupLaw<WittRing>> {
    honda_fgl_rational(ring.p(), n, d)?.map(ring, |c| ring.from_rational(c))
}

/// `Q[u_1..u_{n-1}]` with an optional total-degree cap.
pub fn param_ring(p: u64, n: u32, cap: Option<u32>) -> Result<TruncPoly<Rationals>> {
    TruncPoly::new(Rationals { p }, n.saturating_sub(1) as usize, cap)
}

/// Logarithm whose law has `[p](x) = px +_F u_1 x^p +_F ... +_F u_n x^{p^n}` exactly
/// (`u_n = 1`): `p l(x) = l(px) + sum_i l(u_i x^{p^i})`. The parameters are arbitrary
/// elements of a rational algebra.
pub fn normal_form_log<R: RationalAlgebra>(
    ring: &R,
    p: u64,
    n: u32,
    params: &[R::Elem],
    d: usize,
) -> Result<Series<R::Elem>> {
    let mut u = params.to_vec();
    u.truncate(n as usize - 1);
    u.push(ring.one());
    let mut l = series::zeros(ring, d);
    if d >= 1 {
        l[1] = ring.one();
    }
    let pu = p as usize;
    let mut j = 1u32;
    while pu.pow(j) <= d {
        let mut acc = ring.zero();
        for i in 1..=j.min(n) {
            let prev = &l[pu.pow(j - i)];
            if ring.is_zero(prev) || ring.is_zero(&u[i as usize - 1]) {
                continue;
            }
            let ui = ring.pow(&u[i as usize - 1], (p).pow(j - i))?;
            acc = ring.add(&acc, &ring.mul(&ui, prev)?);
        }
        let denom = num::BigInt::from(p) - num::BigInt::from(p).pow(pu.pow(j) as u32);
        l[pu.pow(j)] = ring.scale_rational(&acc, &BigRational::new(1.into(), denom));
        j += 1;
    }
    Ok(l)
}

/// The universal deformation in normal form over `Q[u_1..u_{n-1}]`.
pub fn lubin_tate_fgl(p: u64, n: u32, d: usize, cap: Option<u32>) -> Result<FormalGroupLaw<TruncPoly<Rationals>>> {
    let ring = param_ring(p, n, cap)?;
    let params: Vec<_> = (0..n as usize - 1).map(|i| ring.var(i)).collect();
    let log = normal_form_log(&ring, p, n, &params, d)?;
    FormalGroupLaw::from_log(ring, &log, d)
}

/// Raise every variable to the `p^k`-th power.
fn frobenius_twist(ring: &TruncPoly<Rationals>, a: &PolyElem<BigRational>, pk: u16) -> PolyElem<BigRational> {
    let mut out = PolyElem::new();
    for (m, c) in a {
        let mut e = *m;
        for x in e.iter_mut() {
            *x *= pk;
        }
        if ring.cap.map_or(true, |cap| e.iter().map(|&v| v as u32).sum::<u32>() <= cap) {
            out.insert(e, c.clone());
        }
    }
    out
}

/// Which functional-equation recipe to use for a deformation logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogRecipe {
    /// `l(x) = x + sum_i (u_i / p) l^{sigma^i}(x^{p^i})` with `sigma(u) = u^p`.
    Hazewinkel,
    /// The same with the parameters left fixed by `sigma`; not `p`-integral in general.
    Untwisted,
}

pub fn functional_equation_log(
    recipe: LogRecipe,
    p: u64,
    n: u32,
    d: usize,
    cap: Option<u32>,
) -> Result<(TruncPoly<Rationals>, Series<PolyElem<BigRational>>)> {
    let ring = param_ring(p, n, cap)?;
    let mut l = series::zeros(&ring, d);
    if d >= 1 {
        l[1] = ring.one();
    }
    let pu = p as usize;
    let mut j = 1u32;
    while pu.pow(j) <= d {
        let mut acc = ring.zero();
        for i in 1..=j.min(n) {
            let prev = &l[pu.pow(j - i)];
            let prev = match recipe {
                LogRecipe::Hazewinkel => frobenius_twist(&ring, prev, pu.pow(i) as u16),
                LogRecipe::Untwisted => prev.clone(),
            };
            let ui = if i < n { ring.var(i as usize - 1) } else { ring.one() };
            acc = ring.add(&acc, &ring.mul(&ui, &prev)?);
        }
        l[pu.pow(j)] = ring.scale_rational(&acc, &ratio(1, p as i64));
        j += 1;
    }
    Ok((ring, l))
}

/// Hazewinkel's law with `sigma(u_i) = u_i^p`; a deformation of Honda's law that is not in
/// normal form in its own coordinate.
pub fn hazewinkel_fgl(p: u64, n: u32, d: usize, cap: Option<u32>) -> Result<FormalGroupLaw<TruncPoly<Rationals>>> {
    let (ring, log) = functional_equation_log(LogRecipe::Hazewinkel, p, n, d, cap)?;
    FormalGroupLaw::from_log(ring, &log, d)
}

/// Specialize a law over `Q[u]` along `u_i -> vals[i]` in `target`.
pub fn specialize<S: CoeffRing>(
    law: &FormalGroupLaw<TruncPoly<Rationals>>,
    target: &S,
    vals: &[S::Elem],
) -> Result<FormalGroupLaw<S>> {
    let src = law.ring.clone();
    law.map(target, |c| src.eval(c, target, vals, |q| target.from_rational(q)))
}

/// Coordinate change putting a deformation into normal form.
#[derive(Clone, Debug)]
pub struct Normalized<R: CoeffRing> {
    /// `h` with `h(F(x, y)) = F'(h(x), h(y))`.
    pub h: Series<R::Elem>,
    pub params: Vec<R::Elem>,
    pub law: FormalGroupLaw<R>,
    /// Whether `h` differs from `x`.
    pub nontrivial: bool,
}

/// Normalize a law over a rational algebra whose special fibre has height `n`.
///
/// `h = l_N^{-1} l_F` where `l_N` is the normal-form logarithm; the parameters are fixed by
/// requiring `h` to have no `x^{p^i}` term for `1 <= i < n` (and `h'(0) = 1`).
pub fn normalize_coordinate<R: RationalAlgebra>(law: &FormalGroupLaw<R>, n: u32) -> Result<Normalized<R>> {
    let r = &law.ring;
    let p = r.prime();
    let d = law.degree();
    let lf = law.log()?;
    let mut params = vec![r.zero(); n as usize - 1];
    let h_for = |params: &[R::Elem]| -> Result<Series<R::Elem>> {
        let ln = normal_form_log(r, p, n, params, d)?;
        series::compose(r, &series::reversion(r, &ln, d)?, &lf, d)
    };
    for i in 1..n {
        let pi = (p as usize).pow(i);
        if pi > d {
            break;
        }
        let k = h_for(&params)?[pi].clone();
        let factor = num::BigInt::from(p) - num::BigInt::from(p).pow(pi as u32);
        params[i as usize - 1] = r.scale_rational(&k, &BigRational::from_integer(factor));
    }
    let h = h_for(&params)?;
    for (i, c) in params.iter().enumerate() {
        if !r.is_p_integral(c) {
            return Err(Error::NormalizationObstructed((p as usize).pow(i as u32 + 1)));
        }
    }
    if let Some(k) = h.iter().position(|c| !r.is_p_integral(c)) {
        return Err(Error::NormalizationObstructed(k));
    }
    let ln = normal_form_log(r, p, n, &params, d)?;
    let normal = FormalGroupLaw::from_log(r.clone(), &ln, d)
        .map_err(|_| Error::NormalizationObstructed(d))?;
    let nontrivial = !series::equal(r, &h, &series::x_series(r, d));
    Ok(Normalized { h, params, law: normal, nontrivial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rational_valuation;

    fn fp(p: u64) -> WittRing {
        WittRing::prime(p, 1).unwrap()
    }

    #[test]
    fn honda_two_series() {
        let f = honda_fgl_rational(2, 1, 6).unwrap();
        let q = &f.ring;
        let ps = f.p_series().unwrap();
        assert_eq!(ps[1], q.from_i64(2));
        assert_eq!(ps[2], q.from_i64(-1));
        // Oracle: l^{-1}(2 l(x)) straight from the logarithm.
        let l = honda_log(2, 1, 6);
        let e = series::reversion(q, &l, 6).unwrap();
        let direct = series::compose(q, &e, &series::scale(q, &l, &q.from_i64(2)).unwrap(), 6).unwrap();
        assert_eq!(ps, direct);
    }

    #[test]
    fn honda_mod_p_series_and_height() {
        for (p, n, d) in [(2u64, 1u32, 16usize), (2, 2, 8), (3, 1, 9), (3, 2, 9), (5, 1, 10)] {
            let f = honda_fgl(&fp(p), n, d).unwrap();
            let ps = f.p_series().unwrap();
            for (k, c) in ps.iter().enumerate() {
                let want = if k == (p as usize).pow(n) { 1 } else { 0 };
                assert_eq!(*c, fp(p).from_i64(want), "p={p} n={n} k={k}");
            }
            assert_eq!(f.height().unwrap(), n);
            assert!(f.check_axioms().unwrap().ok());
        }
    }

    #[test]
    fn additive_and_multiplicative() {
        let a = FormalGroupLaw::additive(fp(3), 9);
        assert_eq!(a.height(), Err(Error::HeightExceedsPrecision));
        let w = WittRing::prime(3, 2).unwrap();
        let a2 = FormalGroupLaw::additive(w.clone(), 9);
        let ps = a2.p_series().unwrap();
        assert_eq!(ps[1], w.from_i64(3));
        assert!(ps[2..].iter().all(|c| w.is_zero(c)));
        let m = FormalGroupLaw::multiplicative(fp(3), 9);
        assert_eq!(m.height().unwrap(), 1);
        // x + y is not a height-1 law over F_3, and [3] is not a p-power for x+y+x^2y^2 style input.
        let mut bad = FormalGroupLaw::additive(fp(2), 8);
        bad.coeffs.c[1][1] = fp(2).one();
        bad.coeffs.c[2][1] = fp(2).one();
        assert!(!bad.check_axioms().unwrap().ok());
    }

    #[test]
    fn formal_inverse() {
        let f = honda_fgl(&WittRing::prime(3, 3).unwrap(), 2, 12).unwrap();
        let r = &f.ring;
        let x = series::x_series(r, 12);
        let s = f.formal_sum(&x, &f.formal_neg(&x).unwrap()).unwrap();
        assert!(series::is_zero(r, &s));
        let z = series::zeros(r, 12);
        assert_eq!(f.formal_sum(&x, &z).unwrap(), x);
        let c = series::zeros(r, 12);
        let mut one = c.clone();
        one[0] = r.one();
        assert_eq!(f.formal_sum(&one, &x), Err(Error::ValuationTooLow));
    }

    #[test]
    fn untwisted_recipe_is_not_integral() {
        let (ring, log) = functional_equation_log(LogRecipe::Untwisted, 2, 2, 8, None).unwrap();
        let err = FormalGroupLaw::from_log(ring, &log, 8).unwrap_err();
        assert!(matches!(err, Error::PrecisionGuardExceeded(_)));
        let (ring, log) = functional_equation_log(LogRecipe::Untwisted, 3, 2, 10, None).unwrap();
        assert!(FormalGroupLaw::from_log(ring, &log, 10).is_err());
    }

    #[test]
    fn lubin_tate_normal_form() {
        for (p, n, d) in [(2u64, 2u32, 8usize), (3, 2, 9), (2, 3, 8)] {
            let f = lubin_tate_fgl(p, n, d, Some(4)).unwrap();
            let got = f.extract_lt_params(n).unwrap();
            let ring = &f.ring;
            for (i, u) in got.params.iter().enumerate() {
                assert_eq!(*u, ring.var(i));
            }
            assert_eq!(got.top, ring.one());
            // Special fibre is Honda.
            let special = specialize(&f, &fp(p), &vec![fp(p).zero(); n as usize - 1]).unwrap();
            let honda = honda_fgl(&fp(p), n, d).unwrap();
            assert_eq!(special.p_series().unwrap(), honda.p_series().unwrap());
        }
    }

    #[test]
    fn hazewinkel_needs_a_coordinate_change() {
        let p = 2;
        let haz = hazewinkel_fgl(p, 2, 8, None).unwrap();
        assert!(haz.check_axioms().unwrap().ok());
        let norm = normalize_coordinate(&haz, 2).unwrap();
        assert!(norm.nontrivial);
        // h intertwines the two laws and has no x^2 term.
        assert!(haz.iso_check(&norm.law, &norm.h).unwrap());
        assert!(haz.ring.is_zero(&norm.h[2]));
        let params = norm.law.extract_lt_params(2).unwrap();
        assert_eq!(params.params, norm.params);
        // The new parameter is a unit multiple of u_1 modulo higher terms.
        let c = norm.params[0].get(&[1, 0, 0, 0]).unwrap();
        assert_eq!(rational_valuation(c, 2), 0);
    }

    #[test]
    fn normalization_round_trip() {
        let p = 3;
        let d = 9;
        let lt = lubin_tate_fgl(p, 2, d, Some(3)).unwrap();
        let r = &lt.ring;
        let already = normalize_coordinate(&lt, 2).unwrap();
        assert!(!already.nontrivial);
        // g has no x^3 term; conjugating by h0 = g^{-1} must give back h = g.
        let mut g = series::x_series(r, d);
        g[2] = r.add(&r.one(), &r.var(0));
        g[4] = r.from_i64(2);
        g[5] = r.var(0);
        let h0 = series::reversion(r, &g, d).unwrap();
        let conj = lt.conjugate(&h0).unwrap();
        let norm = normalize_coordinate(&conj, 2).unwrap();
        assert!(series::equal(r, &norm.h, &g));
        assert_eq!(norm.params, vec![r.var(0)]);
    }

    #[test]
    fn iso_checks() {
        let w = fp(2);
        let h1 = honda_fgl(&w, 1, 8).unwrap();
        let h2 = honda_fgl(&w, 2, 8).unwrap();
        let x = series::x_series(&w, 8);
        assert!(h1.iso_check(&h1, &x).unwrap());
        assert!(!h1.iso_check(&h2, &x).unwrap());
        let mut h = x.clone();
        h[3] = w.one();
        let c = h1.conjugate(&h).unwrap();
        assert!(h1.iso_check(&c, &h).unwrap());
        assert!(c.check_axioms().unwrap().ok());
    }

    #[test]
    fn honda_parameters_over_witt_vectors() {
        let w = WittRing::prime(3, 2).unwrap();
        let got = honda_fgl(&w, 2, 27).unwrap().extract_lt_params(2).unwrap();
        assert_eq!(got.params, vec![w.zero()]);
        assert_eq!(got.top, w.one());
        // p l(x) - l(px) - l(x^2) = -2x^2 + ..., which survives mod 4.
        let w = WittRing::prime(2, 2).unwrap();
        let got = honda_fgl(&w, 1, 8).unwrap().extract_lt_params(1).unwrap();
        assert!(got.params.is_empty());
        assert_eq!(got.top, w.from_i64(-1));
    }

    #[test]
    fn json_shape() {
        let f = FormalGroupLaw::multiplicative(WittRing::prime(5, 2).unwrap(), 3);
        let j = f.to_json();
        assert_eq!(j["D"], 3);
        assert_eq!(j["terms"][0], json!([0, 1, [1]]));
        assert_eq!(j["terms"][2], json!([1, 1, [1]]));
    }
}
