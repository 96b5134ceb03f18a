//! Truncated power series in one and two variables over any [`CoeffRing`].
//!
//! A univariate series is a dense `Vec` indexed by degree, truncated at degree `d`
//! (length `d + 1`). A bivariate series is a triangular array `c[i][j]`, `i + j <= d`.

use crate::error::{Error, Result};
use crate::ring::CoeffRing;

pub type Series<E> = Vec<E>;

pub fn zeros<R: CoeffRing>(r: &R, d: usize) -> Series<R::Elem> {
    vec![r.zero(); d + 1]
}

/// The series `x`, truncated at degree `d`.
pub fn x_series<R: CoeffRing>(r: &R, d: usize) -> Series<R::Elem> {
    let mut s = zeros(r, d);
    if d >= 1 {
        s[1] = r.one();
    }
    s
}

/// Resize to degree `d`, padding with zeros.
pub fn truncate<R: CoeffRing>(r: &R, f: &[R::Elem], d: usize) -> Series<R::Elem> {
    (0..=d).map(|k| f.get(k).cloned().unwrap_or_else(|| r.zero())).collect()
}

pub fn add<R: CoeffRing>(r: &R, f: &[R::Elem], g: &[R::Elem]) -> Series<R::Elem> {
    f.iter().zip(g).map(|(a, b)| r.add(a, b)).collect()
}

pub fn sub<R: CoeffRing>(r: &R, f: &[R::Elem], g: &[R::Elem]) -> Series<R::Elem> {
    f.iter().zip(g).map(|(a, b)| r.sub(a, b)).collect()
}

pub fn neg<R: CoeffRing>(r: &R, f: &[R::Elem]) -> Series<R::Elem> {
    f.iter().map(|a| r.neg(a)).collect()
}

pub fn scale<R: CoeffRing>(r: &R, f: &[R::Elem], c: &R::Elem) -> Result<Series<R::Elem>> {
    f.iter().map(|a| if r.is_zero(a) { Ok(r.zero()) } else { r.mul(a, c) }).collect()
}

/// Lowest degree with a nonzero coefficient.
pub fn valuation<R: CoeffRing>(r: &R, f: &[R::Elem]) -> Option<usize> {
    f.iter().position(|c| !r.is_zero(c))
}

pub fn is_zero<R: CoeffRing>(r: &R, f: &[R::Elem]) -> bool {
    f.iter().all(|c| r.is_zero(c))
}

pub fn equal<R: CoeffRing>(r: &R, f: &[R::Elem], g: &[R::Elem]) -> bool {
    f.len() == g.len() && f.iter().zip(g).all(|(a, b)| r.equal(a, b))
}

/// First degree at which `f` and `g` differ.
pub fn first_difference<R: CoeffRing>(r: &R, f: &[R::Elem], g: &[R::Elem]) -> Option<usize> {
    (0..f.len().max(g.len())).find(|&k| match (f.get(k), g.get(k)) {
        (Some(a), Some(b)) => !r.equal(a, b),
        (Some(a), None) | (None, Some(a)) => !r.is_zero(a),
        (None, None) => false,
    })
}

pub fn mul<R: CoeffRing>(r: &R, f: &[R::Elem], g: &[R::Elem], d: usize) -> Result<Series<R::Elem>> {
    let mut out = zeros(r, d);
    for (i, a) in f.iter().enumerate().take(d + 1) {
        if r.is_zero(a) {
            continue;
        }
        for (j, b) in g.iter().enumerate().take(d + 1 - i) {
            if r.is_zero(b) {
                continue;
            }
            out[i + j] = r.add(&out[i + j], &r.mul(a, b)?);
        }
    }
    Ok(out)
}

/// Powers `g^0, ..., g^d` truncated at degree `d`.
pub fn powers<R: CoeffRing>(r: &R, g: &[R::Elem], d: usize) -> Result<Vec<Series<R::Elem>>> {
    let mut out = Vec::with_capacity(d + 1);
    let mut one = zeros(r, d);
    one[0] = r.one();
    out.push(one);
    for k in 1..=d {
        let next = mul(r, &out[k - 1], g, d)?;
        out.push(next);
    }
    Ok(out)
}

/// `f(g)` for `g(0) = 0`.
pub fn compose<R: CoeffRing>(r: &R, f: &[R::Elem], g: &[R::Elem], d: usize) -> Result<Series<R::Elem>> {
    if g.first().map_or(false, |c| !r.is_zero(c)) {
        return Err(Error::ValuationTooLow);
    }
    let top = f.len().min(d + 1);
    let support: Vec<usize> = (0..top).filter(|&k| !r.is_zero(&f[k])).collect();
    if 4 * support.len() < top {
        return compose_sparse(r, f, &support, g, d);
    }
    // Horner: f_0 + g (f_1 + g (f_2 + ...)).
    let mut acc = zeros(r, d);
    for k in (0..top).rev() {
        acc = mul(r, &acc, g, d)?;
        acc[0] = r.add(&acc[0], &f[k]);
    }
    Ok(acc)
}

fn pow_series<R: CoeffRing>(r: &R, g: &[R::Elem], mut e: usize, d: usize) -> Result<Series<R::Elem>> {
    let mut out = zeros(r, d);
    out[0] = r.one();
    let mut base = truncate(r, g, d);
    while e > 0 {
        if e & 1 == 1 {
            out = mul(r, &out, &base, d)?;
        }
        e >>= 1;
        if e > 0 {
            base = mul(r, &base, &base, d)?;
        }
    }
    Ok(out)
}

/// Composition for `f` with few nonzero terms, stepping between consecutive powers.
fn compose_sparse<R: CoeffRing>(r: &R, f: &[R::Elem], support: &[usize], g: &[R::Elem], d: usize) -> Result<Series<R::Elem>> {
    let mut acc = zeros(r, d);
    let mut cur = zeros(r, d);
    cur[0] = r.one();
    let mut prev = 0;
    for &k in support {
        if k > prev {
            cur = mul(r, &cur, &pow_series(r, g, k - prev, d)?, d)?;
            prev = k;
        }
        acc = add(r, &acc, &scale(r, &cur, &f[k])?);
    }
    Ok(acc)
}

/// Formal derivative.
pub fn derivative<R: CoeffRing>(r: &R, f: &[R::Elem]) -> Result<Series<R::Elem>> {
    let mut out: Series<R::Elem> = (1..f.len()).map(|k| r.scale(&f[k], k as i64)).collect::<Result<_>>()?;
    out.push(r.zero());
    Ok(out)
}

/// Compositional inverse of `f = a x + ...` with `a` a unit, by Newton iteration
/// `g <- g - (f(g) - x) / f'(g)`, which doubles the number of correct terms.
pub fn reversion<R: CoeffRing>(r: &R, f: &[R::Elem], d: usize) -> Result<Series<R::Elem>> {
    if f.first().map_or(false, |c| !r.is_zero(c)) || f.len() < 2 {
        return Err(Error::ValuationTooLow);
    }
    let a_inv = r.inverse(&f[1])?;
    let mut g = zeros(r, d);
    if d >= 1 {
        g[1] = a_inv;
    }
    let f = truncate(r, f, d);
    let df = derivative(r, &f)?;
    let x = x_series(r, d);
    let mut good = 1;
    while good < d {
        good *= 2;
        let err = sub(r, &compose(r, &f, &g, d)?, &x);
        let slope = inverse(r, &compose(r, &df, &g, d)?, d)?;
        g = sub(r, &g, &mul(r, &err, &slope, d)?);
    }
    Ok(g)
}

/// Multiplicative inverse of a series with unit constant term.
pub fn inverse<R: CoeffRing>(r: &R, f: &[R::Elem], d: usize) -> Result<Series<R::Elem>> {
    let c = r.inverse(&f[0])?;
    let mut g = zeros(r, d);
    g[0] = c.clone();
    for k in 1..=d {
        let mut s = r.zero();
        for j in 1..=k.min(f.len() - 1) {
            if !r.is_zero(&f[j]) {
                s = r.add(&s, &r.mul(&f[j], &g[k - j])?);
            }
        }
        g[k] = r.neg(&r.mul(&s, &c)?);
    }
    Ok(g)
}

/// Dense triangular bivariate series `sum c[i][j] x^i y^j`, `i + j <= d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Biv<E> {
    pub d: usize,
    pub c: Vec<Vec<E>>,
}

impl<E: Clone> Biv<E> {
    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.c[i][j]
    }

    /// Nonzero positions.
    pub fn support<R: CoeffRing<Elem = E>>(&self, r: &R) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.c.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if !r.is_zero(e) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

pub fn biv_zero<R: CoeffRing>(r: &R, d: usize) -> Biv<R::Elem> {
    Biv { d, c: (0..=d).map(|i| vec![r.zero(); d + 1 - i]).collect() }
}

pub fn biv_add<R: CoeffRing>(r: &R, a: &Biv<R::Elem>, b: &Biv<R::Elem>) -> Biv<R::Elem> {
    let c = a.c.iter().zip(&b.c).map(|(x, y)| x.iter().zip(y).map(|(s, t)| r.add(s, t)).collect()).collect();
    Biv { d: a.d, c }
}

pub fn biv_sub<R: CoeffRing>(r: &R, a: &Biv<R::Elem>, b: &Biv<R::Elem>) -> Biv<R::Elem> {
    let c = a.c.iter().zip(&b.c).map(|(x, y)| x.iter().zip(y).map(|(s, t)| r.sub(s, t)).collect()).collect();
    Biv { d: a.d, c }
}

pub fn biv_mul<R: CoeffRing>(r: &R, a: &Biv<R::Elem>, b: &Biv<R::Elem>) -> Result<Biv<R::Elem>> {
    biv_mul_upto(r, a, b, a.d)
}

/// Product keeping only total degree `<= e`.
fn biv_mul_upto<R: CoeffRing>(r: &R, a: &Biv<R::Elem>, b: &Biv<R::Elem>, e: usize) -> Result<Biv<R::Elem>> {
    biv_mul_where(r, a, b, e, |_, _| true)
}

/// Collect the products landing in each output cell, then sum each cell at once.
fn biv_mul_where<R: CoeffRing>(
    r: &R,
    a: &Biv<R::Elem>,
    b: &Biv<R::Elem>,
    e: usize,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<Biv<R::Elem>> {
    let d = a.d;
    let mut cells: Vec<Vec<Vec<(&R::Elem, &R::Elem)>>> = vec![vec![Vec::new(); d + 1]; d + 1];
    let bs = b.support(r);
    for (i, j) in a.support(r) {
        for &(k, l) in &bs {
            if i + j + k + l > e || !keep(i + k, j + l) {
                continue;
            }
            cells[i + k][j + l].push((&a.c[i][j], &b.c[k][l]));
        }
    }
    let mut out = biv_zero(r, d);
    for (s, row) in cells.iter().enumerate() {
        for (t, pairs) in row.iter().enumerate() {
            if !pairs.is_empty() {
                out.c[s][t] = r.dot(pairs)?;
            }
        }
    }
    Ok(out)
}

/// `f(x)` or `f(y)` as a bivariate series.
pub fn biv_from_x<R: CoeffRing>(r: &R, f: &[R::Elem], d: usize, in_y: bool) -> Biv<R::Elem> {
    let mut out = biv_zero(r, d);
    for (k, c) in f.iter().enumerate().take(d + 1) {
        if in_y {
            out.c[0][k] = c.clone();
        } else {
            out.c[k][0] = c.clone();
        }
    }
    out
}

fn is_symmetric<R: CoeffRing>(r: &R, a: &Biv<R::Elem>) -> bool {
    (0..=a.d).all(|i| (i + 1..=a.d - i).all(|j| r.equal(&a.c[i][j], &a.c[j][i])))
}

/// Product of two symmetric series: only the `i <= j` half is computed.
fn biv_mul_symmetric<R: CoeffRing>(r: &R, a: &Biv<R::Elem>, b: &Biv<R::Elem>, e: usize) -> Result<Biv<R::Elem>> {
    let d = a.d;
    let mut out = biv_mul_where(r, a, b, e, |s, t| s <= t)?;
    for i in 0..=d {
        for j in 0..i.min(d + 1 - i) {
            out.c[i][j] = out.c[j][i].clone();
        }
    }
    Ok(out)
}

/// `f(g(x, y))` for `g(0, 0) = 0`.
pub fn biv_compose<R: CoeffRing>(r: &R, f: &[R::Elem], g: &Biv<R::Elem>) -> Result<Biv<R::Elem>> {
    if !r.is_zero(&g.c[0][0]) {
        return Err(Error::ValuationTooLow);
    }
    let d = g.d;
    // Horner only needs to start at the last nonzero coefficient.
    let top = f.iter().take(d + 1).rposition(|c| !r.is_zero(c)).map_or(0, |k| k + 1);
    let symmetric = is_symmetric(r, g);
    let mut acc = biv_zero(r, d);
    for k in (0..top).rev() {
        // `acc` is multiplied by `g` another `k` times, so degrees above `d - k` never matter.
        let e = d - k;
        acc = if symmetric { biv_mul_symmetric(r, &acc, g, e)? } else { biv_mul_upto(r, &acc, g, e)? };
        acc.c[0][0] = r.add(&acc.c[0][0], &f[k]);
    }
    Ok(acc)
}

/// `F(a(x), b(y))`, built from outer products of powers.
pub fn biv_substitute_separate<R: CoeffRing>(
    r: &R,
    f: &Biv<R::Elem>,
    a: &[R::Elem],
    b: &[R::Elem],
) -> Result<Biv<R::Elem>> {
    let d = f.d;
    if !r.is_zero(&a[0]) || !r.is_zero(&b[0]) {
        return Err(Error::ValuationTooLow);
    }
    let pa = powers(r, a, d)?;
    let pb = if a == b { pa.clone() } else { powers(r, b, d)? };
    let mut out = biv_zero(r, d);
    for (i, j) in f.support(r) {
        let c = &f.c[i][j];
        // a^i has valuation >= i and b^j has valuation >= j.
        for s in i..=d {
            if r.is_zero(&pa[i][s]) {
                continue;
            }
            let cs = r.mul(c, &pa[i][s])?;
            for t in j..=d - s {
                if r.is_zero(&pb[j][t]) {
                    continue;
                }
                let v = r.mul(&cs, &pb[j][t])?;
                out.c[s][t] = r.add(&out.c[s][t], &v);
            }
        }
    }
    Ok(out)
}

/// `F(f(x), g(x))` as a univariate series.
pub fn biv_eval<R: CoeffRing>(r: &R, big_f: &Biv<R::Elem>, f: &[R::Elem], g: &[R::Elem]) -> Result<Series<R::Elem>> {
    let d = big_f.d;
    if !r.is_zero(&f[0]) || !r.is_zero(&g[0]) {
        return Err(Error::ValuationTooLow);
    }
    let pf = powers(r, f, d)?;
    let pg = powers(r, g, d)?;
    let mut out = zeros(r, d);
    for (i, j) in big_f.support(r) {
        let term = mul(r, &pf[i], &pg[j], d)?;
        let term = scale(r, &term, &big_f.c[i][j])?;
        out = add(r, &out, &term);
    }
    Ok(out)
}

pub fn biv_equal<R: CoeffRing>(r: &R, a: &Biv<R::Elem>, b: &Biv<R::Elem>) -> bool {
    biv_first_difference(r, a, b).is_none()
}

/// Total degree and position of the first mismatch.
pub fn biv_first_difference<R: CoeffRing>(r: &R, a: &Biv<R::Elem>, b: &Biv<R::Elem>) -> Option<(usize, usize)> {
    for t in 0..=a.d.min(b.d) {
        for i in 0..=t {
            if !r.equal(&a.c[i][t - i], &b.c[i][t - i]) {
                return Some((i, t - i));
            }
        }
    }
    None
}

pub fn biv_map<R: CoeffRing, S: CoeffRing>(
    a: &Biv<R::Elem>,
    f: impl Fn(&R::Elem) -> Result<S::Elem>,
) -> Result<Biv<S::Elem>> {
    let c = a.c.iter().map(|row| row.iter().map(&f).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
    Ok(Biv { d: a.d, c })
}

pub fn biv_truncate<E: Clone>(a: &Biv<E>, d: usize) -> Biv<E> {
    Biv { d, c: a.c.iter().take(d + 1).enumerate().map(|(i, row)| row[..=d - i].to_vec()).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Rationals;
    use crate::witt::WittRing;

    #[test]
    fn reversion_of_geometric() {
        let q = Rationals { p: 2 };
        // f = x/(1-x) = x + x^2 + ...; inverse is x/(1+x).
        let d = 8;
        let f: Vec<_> = (0..=d).map(|k| q.from_i64(if k == 0 { 0 } else { 1 })).collect();
        let g = reversion(&q, &f, d).unwrap();
        for k in 1..=d {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            assert_eq!(g[k], q.from_i64(sign));
        }
        let back = compose(&q, &f, &g, d).unwrap();
        assert_eq!(back, x_series(&q, d));
    }

    #[test]
    fn bivariate_substitution_matches_products() {
        let r = WittRing::prime(3, 2).unwrap();
        let d = 6;
        // F = x + y + xy.
        let mut f = biv_zero(&r, d);
        f.c[1][0] = r.one();
        f.c[0][1] = r.one();
        f.c[1][1] = r.one();
        let a: Vec<_> = (0..=d).map(|k| r.from_i64(k as i64 % 2 * (k as i64))).collect();
        let b: Vec<_> = (0..=d).map(|k| r.from_i64(if k == 0 { 0 } else { 2 })).collect();
        let s = biv_substitute_separate(&r, &f, &a, &b).unwrap();
        let ax = biv_from_x(&r, &a, d, false);
        let by = biv_from_x(&r, &b, d, true);
        let expect = biv_add(&r, &biv_add(&r, &ax, &by), &biv_mul(&r, &ax, &by).unwrap());
        assert!(biv_equal(&r, &s, &expect));
        let e = biv_eval(&r, &f, &a, &b).unwrap();
        let ab = mul(&r, &a, &b, d).unwrap();
        assert_eq!(e, add(&r, &add(&r, &a, &b), &ab));
    }

    #[test]
    fn multiplicative_inverse() {
        let r = WittRing::prime(5, 3).unwrap();
        let f: Vec<_> = (0..=7).map(|k| r.from_i64(3 + k)).collect();
        let g = inverse(&r, &f, 7).unwrap();
        let mut one = zeros(&r, 7);
        one[0] = r.one();
        assert_eq!(mul(&r, &f, &g, 7).unwrap(), one);
    }
}
