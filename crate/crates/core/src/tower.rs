//! The Artin-Schreier tower presenting the degree-zero cooperations ring modulo `I_{n-1}`.
//!
//! Relations are derived by substituting the left and right unit images into the
//! right-unit congruence for `BP_*BP` and scaling to degree zero. Symbolic work uses a
//! small multigraded polynomial type with integer coefficients, compared modulo `p`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    /// `u^F / u`.
    W,
    /// `t_i u^{1 - p^i}`.
    S(u32),
    /// The periodicity generator of `E_*`.
    U,
    /// The periodicity generator of `F_*`.
    UF,
    /// Lubin-Tate generator `u_i` of `E_*`.
    UL(u32),
    /// `eta_L(v_i)`.
    V(u32),
    /// `eta_R(v_i)`.
    VBar(u32),
    T(u32),
    /// Placeholder for the unspecified `f_i(s_1, ..., s_{i-1})`.
    F(u32),
}

impl Sym {
    /// Internal degree.
    pub fn degree(self, p: u64) -> i64 {
        let p = p as i64;
        match self {
            Sym::V(i) | Sym::VBar(i) | Sym::T(i) => 2 * (p.pow(i) - 1),
            Sym::U | Sym::UF => 2,
            _ => 0,
        }
    }

    fn ascii(self) -> String {
        match self {
            Sym::W => "w".into(),
            Sym::S(i) => format!("s{i}"),
            Sym::U => "u".into(),
            Sym::UF => "uF".into(),
            Sym::UL(i) => format!("u{i}"),
            Sym::V(i) => format!("v{i}"),
            Sym::VBar(i) => format!("vbar{i}"),
            Sym::T(i) => format!("t{i}"),
            Sym::F(i) => format!("f{i}"),
        }
    }

    fn unicode(self) -> String {
        let sub = |i: u32| digits(i as i64, "₀₁₂₃₄₅₆₇₈₉", "₋");
        match self {
            Sym::W => "w".into(),
            Sym::S(i) => format!("s{}", sub(i)),
            Sym::U => "u".into(),
            Sym::UF => "uᶠ".into(),
            Sym::UL(i) => format!("u{}", sub(i)),
            Sym::V(i) => format!("v{}", sub(i)),
            Sym::VBar(i) => format!("v̄{}", sub(i)),
            Sym::T(i) => format!("t{}", sub(i)),
            Sym::F(i) => format!("f{}", sub(i)),
        }
    }
}

fn digits(n: i64, table: &str, minus: &str) -> String {
    let table: Vec<char> = table.chars().collect();
    let mut s = String::new();
    if n < 0 {
        s.push_str(minus);
    }
    for c in n.unsigned_abs().to_string().chars() {
        s.push(table[c.to_digit(10).unwrap() as usize]);
    }
    s
}

pub type Mono = BTreeMap<Sym, i64>;

/// Laurent polynomial in the symbols with integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly(pub BTreeMap<Mono, i64>);

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: i64) -> Self {
        Poly::term(c, &[])
    }

    pub fn term(c: i64, factors: &[(Sym, i64)]) -> Self {
        let mut m = Mono::new();
        for &(s, e) in factors {
            *m.entry(s).or_insert(0) += e;
        }
        m.retain(|_, e| *e != 0);
        let mut out = BTreeMap::new();
        if c != 0 {
            out.insert(m, c);
        }
        Poly(out)
    }

    pub fn sym(s: Sym) -> Self {
        Poly::term(1, &[(s, 1)])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.0.clone();
        for (m, c) in &other.0 {
            *out.entry(m.clone()).or_insert(0) += c;
        }
        out.retain(|_, c| *c != 0);
        Poly(out)
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out: BTreeMap<Mono, i64> = BTreeMap::new();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let mut m = m1.clone();
                for (s, e) in m2 {
                    *m.entry(*s).or_insert(0) += e;
                }
                m.retain(|_, e| *e != 0);
                *out.entry(m).or_insert(0) += c1 * c2;
            }
        }
        out.retain(|_, c| *c != 0);
        Poly(out)
    }

    /// Non-negative powers, or negative powers of a monomial with coefficient `±1`.
    pub fn pow(&self, e: i64) -> Result<Poly> {
        if e < 0 {
            let (m, c) = self.single().ok_or_else(|| Error::BadShape("negative power of a sum".into()))?;
            if c.abs() != 1 {
                return Err(Error::BadShape("negative power of a non-unit coefficient".into()));
            }
            let inv = Poly(BTreeMap::from([(m.iter().map(|(s, k)| (*s, -k)).collect(), c)]));
            return inv.pow(-e);
        }
        let mut acc = Poly::constant(1);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    fn single(&self) -> Option<(&Mono, i64)> {
        if self.0.len() == 1 {
            self.0.iter().next().map(|(m, c)| (m, *c))
        } else {
            None
        }
    }

    /// Replace every occurrence of `s` by `image`.
    pub fn substitute(&self, s: Sym, image: &Poly) -> Result<Poly> {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            let mut rest = m.clone();
            let e = rest.remove(&s).unwrap_or(0);
            let t = Poly(BTreeMap::from([(rest, *c)])).mul(&image.pow(e)?);
            out = out.add(&t);
        }
        Ok(out)
    }

    pub fn contains(&self, s: Sym) -> bool {
        self.0.keys().any(|m| m.contains_key(&s))
    }

    pub fn exponent_set(&self, s: Sym) -> Vec<i64> {
        let mut v: Vec<i64> = self.0.keys().map(|m| m.get(&s).copied().unwrap_or(0)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Degrees of the terms.
    pub fn degrees(&self, p: u64) -> Vec<i64> {
        let mut v: Vec<i64> =
            self.0.keys().map(|m| m.iter().map(|(s, e)| s.degree(p) * e).sum()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn is_homogeneous(&self, p: u64, degree: i64) -> bool {
        self.degrees(p).iter().all(|&d| d == degree)
    }

    /// Coefficients reduced to `[0, p)`.
    pub fn reduce_mod(&self, p: u64) -> Poly {
        let p = p as i64;
        let mut out = self.0.clone();
        for c in out.values_mut() {
            *c = c.rem_euclid(p);
        }
        out.retain(|_, c| *c != 0);
        Poly(out)
    }

    pub fn eq_mod(&self, other: &Poly, p: u64) -> bool {
        self.sub(other).reduce_mod(p).is_zero()
    }

    /// Only the symbols `w`, `s_j` for `j < i`, and placeholders appear.
    fn lies_below(&self, i: u32) -> bool {
        self.0.keys().flat_map(|m| m.keys()).all(|s| match s {
            Sym::W | Sym::F(_) => true,
            Sym::S(j) => *j < i,
            _ => false,
        })
    }

    /// A nonzero Laurent polynomial in `w` alone mod `p`: a unit of `k((w))`.
    pub fn is_unit_in_kw(&self, p: u64) -> bool {
        let r = self.reduce_mod(p);
        !r.is_zero() && r.0.keys().all(|m| m.keys().all(|s| *s == Sym::W))
    }

    fn ordered_terms(&self) -> Vec<(&Mono, i64)> {
        // Higher tower variables and higher powers first, `w`-powers ascending.
        let key = |m: &Mono| {
            let mut k: Vec<(i64, i64)> = m
                .iter()
                .filter(|(s, _)| !matches!(s, Sym::W))
                .map(|(s, e)| (-(rank(*s) as i64), -e))
                .collect();
            k.sort_unstable();
            (k.is_empty(), k, m.get(&Sym::W).copied().unwrap_or(0))
        };
        let mut v: Vec<_> = self.0.iter().map(|(m, c)| (m, *c)).collect();
        v.sort_by(|a, b| key(a.0).cmp(&key(b.0)));
        v
    }

    pub fn format_ascii(&self) -> String {
        self.format_with(|s| s.ascii(), |e| format!("^{e}"), "*", " - ", " + ", "-")
    }

    pub fn format_unicode(&self) -> String {
        self.format_with(|s| s.unicode(), |e| digits(e, "⁰¹²³⁴⁵⁶⁷⁸⁹", "⁻"), "", " − ", " + ", "−")
    }

    fn format_with(
        &self,
        name: impl Fn(Sym) -> String,
        sup: impl Fn(i64) -> String,
        times: &str,
        minus: &str,
        plus: &str,
        lead_minus: &str,
    ) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.ordered_terms().into_iter().enumerate() {
            match (i, c < 0) {
                (0, true) => out.push_str(lead_minus),
                (0, false) => {}
                (_, true) => out.push_str(minus),
                (_, false) => out.push_str(plus),
            }
            let mut factors: Vec<String> = Vec::new();
            if c.abs() != 1 || m.is_empty() {
                factors.push(c.abs().to_string());
            }
            for (s, e) in m {
                let mut f = name(*s);
                if *e != 1 {
                    f.push_str(&sup(*e));
                }
                factors.push(f);
            }
            out.push_str(&factors.join(times));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .ordered_terms()
            .into_iter()
            .map(|(m, c)| {
                let mono: serde_json::Map<String, Value> = m.iter().map(|(s, e)| (s.ascii(), json!(e))).collect();
                json!({"coeff": c, "mono": mono})
            })
            .collect();
        Value::Array(terms)
    }
}

fn rank(s: Sym) -> u32 {
    match s {
        Sym::S(i) | Sym::F(i) => 2 * i + matches!(s, Sym::S(_)) as u32,
        _ => 0,
    }
}

/// `lhs ≡ rhs` modulo `(p) + modulus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Congruence {
    pub p: u64,
    pub lhs: Poly,
    pub rhs: Poly,
    pub modulus: Vec<Sym>,
    pub degree: i64,
}

impl Congruence {
    pub fn is_homogeneous(&self) -> bool {
        self.lhs.is_homogeneous(self.p, self.degree) && self.rhs.is_homogeneous(self.p, self.degree)
    }

    pub fn format_ascii(&self) -> String {
        let m: Vec<String> = std::iter::once("p".to_string()).chain(self.modulus.iter().map(|s| s.ascii())).collect();
        format!("{} = {} mod ({})", self.lhs.format_ascii(), self.rhs.format_ascii(), m.join(", "))
    }
}

/// `vbar_{n-1+i} ≡ v_{n-1+i} + v_{n-1} t_i^{p^{n-1}} - v_{n-1}^{p^i} t_i`
/// modulo `(p, v_1, ..., v_{n-2}, t_1, ..., t_{i-1})`; `i = 0` gives `vbar_{n-1} ≡ v_{n-1}`.
pub fn right_unit_congruence(p: u64, n: u32, i: u32) -> Result<Congruence> {
    check_pn(p, n)?;
    let pi = p as i64;
    let top = n - 1 + i;
    let lhs = Poly::sym(Sym::VBar(top));
    let mut rhs = Poly::sym(Sym::V(top));
    if i >= 1 {
        rhs = rhs
            .add(&Poly::term(1, &[(Sym::V(n - 1), 1), (Sym::T(i), pi.pow(n - 1))]))
            .sub(&Poly::term(1, &[(Sym::V(n - 1), pi.pow(i)), (Sym::T(i), 1)]));
    }
    let modulus = (1..n.saturating_sub(1)).map(Sym::V).chain((1..i).map(Sym::T)).collect();
    Ok(Congruence { p, lhs, rhs, modulus, degree: 2 * (pi.pow(top) - 1) })
}

fn check_pn(p: u64, n: u32) -> Result<()> {
    if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("the tower needs height n >= 2".into()));
    }
    Ok(())
}

/// `a s^{p^m} + b s + c` in the variable `var`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsPoly {
    pub p: u64,
    pub var: Sym,
    pub m: u32,
    pub a: Poly,
    pub b: Poly,
    pub c: Poly,
}

impl AsPoly {
    /// Split `q` by powers of `var`; only `var^{p^m}`, `var` and `var^0` may occur.
    pub fn from_poly(p: u64, q: &Poly, var: Sym) -> Result<AsPoly> {
        let mut parts: BTreeMap<i64, Poly> = BTreeMap::new();
        for (m, c) in &q.0 {
            let mut rest = m.clone();
            let e = rest.remove(&var).unwrap_or(0);
            let part = parts.entry(e).or_default();
            *part = part.add(&Poly(BTreeMap::from([(rest, *c)])));
        }
        let b = parts.remove(&1).unwrap_or_default();
        let c = parts.remove(&0).unwrap_or_default();
        let (m, a) = match parts.len() {
            0 => (0, Poly::zero()),
            1 => {
                let (e, a) = parts.into_iter().next().unwrap();
                let m = p_log(p, e).ok_or_else(|| Error::BadShape(format!("{} occurs to the power {e}", var.ascii())))?;
                (m, a)
            }
            _ => return Err(Error::BadShape(format!("{} occurs to several non-linear powers", var.ascii()))),
        };
        Ok(AsPoly { p, var, m, a, b, c })
    }

    pub fn to_poly(&self) -> Poly {
        let q = (self.p as i64).pow(self.m);
        self.a
            .mul(&Poly::term(1, &[(self.var, q)]))
            .add(&self.b.mul(&Poly::sym(self.var)))
            .add(&self.c)
    }

    /// Formal `var`-derivative mod `p`: `b`, since `p^m a var^{p^m - 1}` vanishes.
    pub fn derivative(&self) -> Poly {
        self.b.reduce_mod(self.p)
    }

    /// `var` on one side and the rest moved right when `c` is a constant.
    pub fn relation_unicode(&self, exact: bool) -> String {
        let rel = if exact { "=" } else { "≡" };
        let head = AsPoly { c: Poly::zero(), ..self.clone() }.to_poly();
        if self.c.0.keys().all(|m| m.is_empty()) {
            format!("{} {rel} {}", head.format_unicode(), self.c.neg().format_unicode())
        } else {
            format!("{} {rel} 0", self.to_poly().format_unicode())
        }
    }

    pub fn relation_ascii(&self, exact: bool) -> String {
        let rel = if exact { "=" } else { "==" };
        let head = AsPoly { c: Poly::zero(), ..self.clone() }.to_poly();
        if self.c.0.keys().all(|m| m.is_empty()) {
            format!("{} {rel} {}", head.format_ascii(), self.c.neg().format_ascii())
        } else {
            format!("{} {rel} 0", self.to_poly().format_ascii())
        }
    }
}

fn p_log(p: u64, e: i64) -> Option<u32> {
    if e < 2 {
        return None;
    }
    let (mut e, mut m) = (e as u64, 0);
    while e % p == 0 {
        e /= p;
        m += 1;
    }
    (e == 1).then_some(m)
}

/// Whether `q` is étale: its derivative is a unit of `k((w))`.
pub fn etale_check(q: &AsPoly) -> Result<bool> {
    for (name, part) in [("a", &q.a), ("b", &q.b), ("c", &q.c)] {
        if part.contains(q.var) {
            return Err(Error::BadShape(format!("coefficient {name} involves {}", q.var.ascii())));
        }
    }
    if q.m == 0 && !q.a.is_zero() {
        return Err(Error::BadShape("leading power must be p^m with m >= 1".into()));
    }
    Ok(q.derivative().is_unit_in_kw(q.p))
}

/// Substitute the unit images into the congruence for level `i` and scale to degree zero.
fn scaled_relation(p: u64, n: u32, i: u32) -> Result<(Poly, Poly)> {
    let pi = p as i64;
    let cong = right_unit_congruence(p, n, i)?;
    if !cong.is_homogeneous() {
        return Err(Error::DerivationMismatch(format!("right unit congruence at level {i} is not homogeneous")));
    }
    let top = n - 1 + i;
    let subst = |q: &Poly| -> Result<Poly> {
        let mut q = q.clone();
        // Left unit into F_*, modulo I_{n-1}.
        q = q.substitute(Sym::V(top), &if top == n - 1 { Poly::term(1, &[(Sym::UF, pi.pow(n - 1) - 1)]) } else { Poly::zero() })?;
        q = q.substitute(Sym::V(n - 1), &Poly::term(1, &[(Sym::UF, pi.pow(n - 1) - 1)]))?;
        // Right unit into E_*.
        let vbar = match top.cmp(&n) {
            std::cmp::Ordering::Less => Poly::term(1, &[(Sym::U, pi.pow(top) - 1), (Sym::UL(top), 1)]),
            std::cmp::Ordering::Equal => Poly::term(1, &[(Sym::U, pi.pow(n) - 1)]),
            std::cmp::Ordering::Greater => Poly::zero(),
        };
        q = q.substitute(Sym::VBar(top), &vbar)?;
        if i >= 1 {
            q = q.substitute(Sym::T(i), &Poly::term(1, &[(Sym::S(i), 1), (Sym::U, pi.pow(i) - 1)]))?;
        }
        q.substitute(Sym::UF, &Poly::term(1, &[(Sym::W, 1), (Sym::U, 1)]))
    };
    let lhs = subst(&cong.lhs)?;
    let rhs = subst(&cong.rhs)?;
    let mut us = lhs.exponent_set(Sym::U);
    us.extend(rhs.exponent_set(Sym::U));
    let nonzero: Vec<i64> = {
        let mut v: Vec<i64> = lhs
            .0
            .keys()
            .chain(rhs.0.keys())
            .map(|m| m.get(&Sym::U).copied().unwrap_or(0))
            .collect();
        v.dedup();
        v
    };
    let e = *nonzero.first().ok_or_else(|| Error::DerivationMismatch("relation vanished".into()))?;
    if nonzero.iter().any(|&x| x != e) || e != cong.degree / 2 {
        return Err(Error::DerivationMismatch(format!("terms at level {i} have u-degrees {us:?}")));
    }
    let scale = Poly::term(1, &[(Sym::U, -e)]);
    let (lhs, rhs) = (lhs.mul(&scale), rhs.mul(&scale));
    if lhs.contains(Sym::U) || rhs.contains(Sym::U) {
        return Err(Error::DerivationMismatch("total u-degree is not zero".into()));
    }
    Ok((lhs, rhs))
}

/// `u_{n-1} = w^{p^{n-1} - 1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TameRelation {
    pub n: u32,
    pub exponent: i64,
}

impl TameRelation {
    pub fn unicode(&self) -> String {
        format!("{} = {}", Sym::UL(self.n - 1).unicode(), Poly::term(1, &[(Sym::W, self.exponent)]).format_unicode())
    }
    pub fn ascii(&self) -> String {
        format!("{} = {}", Sym::UL(self.n - 1).ascii(), Poly::term(1, &[(Sym::W, self.exponent)]).format_ascii())
    }
}

pub fn derive_tame_relation(p: u64, n: u32) -> Result<TameRelation> {
    let (lhs, rhs) = scaled_relation(p, n, 0)?;
    let want_l = Poly::sym(Sym::UL(n - 1));
    let exponent = (p as i64).pow(n - 1) - 1;
    let want_r = Poly::term(1, &[(Sym::W, exponent)]);
    if !(lhs.eq_mod(&want_l, p) && rhs.eq_mod(&want_r, p)) {
        return Err(Error::DerivationMismatch(format!("tame relation {} = {}", lhs.format_ascii(), rhs.format_ascii())));
    }
    Ok(TameRelation { n, exponent })
}

/// The displayed level-`i` equation `w^{p^{n-1}-1} s_i^{p^{n-1}} - w^{p^i(p^{n-1}-1)} s_i`.
fn displayed_head(p: u64, n: u32, i: u32) -> Poly {
    let pi = p as i64;
    let t = pi.pow(n - 1) - 1;
    Poly::term(1, &[(Sym::W, t), (Sym::S(i), pi.pow(n - 1))]).sub(&Poly::term(1, &[(Sym::W, pi.pow(i) * t), (Sym::S(i), 1)]))
}

/// `w^{p^{n-1}-1} s_1^{p^{n-1}} - w^{p(p^{n-1}-1)} s_1 = 1`, derived and compared with the display.
pub fn derive_s1_relation(p: u64, n: u32) -> Result<AsPoly> {
    let (lhs, rhs) = scaled_relation(p, n, 1)?;
    let q = AsPoly::from_poly(p, &rhs.sub(&lhs), Sym::S(1))?;
    let want = AsPoly::from_poly(p, &displayed_head(p, n, 1).sub(&Poly::constant(1)), Sym::S(1))?;
    if q != want {
        return Err(Error::DerivationMismatch(format!("derived {} against {}", q.relation_ascii(true), want.relation_ascii(true))));
    }
    Ok(q)
}

#[derive(Clone, Debug)]
pub struct Level {
    pub i: u32,
    pub poly: AsPoly,
    /// Level one is an equation; deeper levels hold modulo an unstated ideal.
    pub exact: bool,
    pub etale: bool,
}

#[derive(Clone, Debug)]
pub struct TowerPresentation {
    pub p: u64,
    pub n: u32,
    pub tame: TameRelation,
    pub levels: Vec<Level>,
}

impl TowerPresentation {
    pub fn tame_exponent(&self) -> i64 {
        self.tame.exponent
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![self.tame.unicode()];
        for l in &self.levels {
            let mut s = l.poly.relation_unicode(l.exact);
            if !l.exact {
                s.push_str("  (shape only, modulus unstated)");
            }
            out.push(s);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let levels: Vec<Value> = self
            .levels
            .iter()
            .map(|l| {
                json!({
                    "i": l.i,
                    "relation": l.poly.relation_ascii(l.exact),
                    "terms": l.poly.to_poly().to_json(),
                    "derivative": l.poly.derivative().to_json(),
                    "etale": l.etale,
                    "exact": l.exact,
                })
            })
            .collect();
        json!({
            "p": self.p,
            "n": self.n,
            "tame": {"relation": self.tame.ascii(), "exponent": self.tame.exponent},
            "levels": levels,
        })
    }
}

/// Tame relation, the derived `s_1` equation and `depth - 1` deeper levels.
///
/// `f_list[i - 2]` is `f_i`; when absent the placeholder symbol `f_i` stands in.
pub fn build_tower(p: u64, n: u32, depth: u32, f_list: Option<&[Poly]>) -> Result<TowerPresentation> {
    if depth < 1 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let tame = derive_tame_relation(p, n)?;
    let s1 = derive_s1_relation(p, n)?;
    let etale = etale_check(&s1)?;
    if !etale {
        return Err(Error::EtaleFailure(1));
    }
    let mut levels = vec![Level { i: 1, poly: s1, exact: true, etale }];
    for i in 2..=depth {
        let f = match f_list {
            Some(list) => list
                .get(i as usize - 2)
                .cloned()
                .ok_or_else(|| Error::InvalidParameter(format!("f_{i} not supplied")))?,
            None => Poly::sym(Sym::F(i)),
        };
        if !f.lies_below(i) {
            return Err(Error::EtaleFailure(i as usize));
        }
        let (lhs, rhs) = scaled_relation(p, n, i)?;
        let derived = rhs.sub(&lhs);
        if !derived.eq_mod(&displayed_head(p, n, i), p) {
            return Err(Error::DerivationMismatch(format!("level {i}: {}", derived.format_ascii())));
        }
        let poly = AsPoly::from_poly(p, &derived.add(&f), Sym::S(i)).map_err(|_| Error::EtaleFailure(i as usize))?;
        let etale = etale_check(&poly)?;
        if !etale {
            return Err(Error::EtaleFailure(i as usize));
        }
        levels.push(Level { i, poly, exact: false, etale });
    }
    Ok(TowerPresentation { p, n, tame, levels })
}

/// Human-readable congruence with its modulus, for reports.
pub fn congruence_report(p: u64, n: u32, i: u32) -> Result<String> {
    let c = right_unit_congruence(p, n, i)?;
    let mut s = c.format_ascii();
    let _ = write!(s, "  [degree {}]", c.degree);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s1_relation_examples() {
        let q = derive_s1_relation(3, 2).unwrap();
        assert_eq!(q.relation_unicode(true), "w²s₁³ − w⁶s₁ = 1");
        assert_eq!(q.relation_ascii(true), "w^2*s1^3 - w^6*s1 = 1");
        let q = derive_s1_relation(2, 2).unwrap();
        assert_eq!(q.relation_unicode(true), "ws₁² − w²s₁ = 1");
        for p in [2, 3, 5] {
            for n in [2, 3] {
                let q = derive_s1_relation(p, n).unwrap();
                assert!(etale_check(&q).unwrap());
                assert_eq!(q.m, n - 1);
            }
        }
    }

    #[test]
    fn congruence_shape() {
        let c = right_unit_congruence(3, 2, 1).unwrap();
        assert!(c.is_homogeneous());
        assert_eq!(c.degree, 16);
        assert_eq!(c.format_ascii(), "vbar2 = v1*t1^3 - v1^3*t1 + v2 mod (p)");
        let c = right_unit_congruence(3, 3, 2).unwrap();
        assert!(c.is_homogeneous());
        assert_eq!(c.modulus, vec![Sym::V(1), Sym::T(1)]);
    }

    #[test]
    fn tame_relation() {
        assert_eq!(derive_tame_relation(3, 2).unwrap().unicode(), "u₁ = w²");
        assert_eq!(derive_tame_relation(2, 3).unwrap().exponent, 3);
    }

    #[test]
    fn etale_examples() {
        let s = Sym::S(1);
        let q = Poly::term(1, &[(s, 3)]).sub(&Poly::sym(s)).add(&Poly::term(1, &[(Sym::W, -1)]));
        assert!(etale_check(&AsPoly::from_poly(3, &q, s).unwrap()).unwrap());
        let q = Poly::term(1, &[(Sym::W, 1), (s, 3)]);
        assert!(!etale_check(&AsPoly::from_poly(3, &q, s).unwrap()).unwrap());
        // p s is zero in characteristic p.
        let q = Poly::term(1, &[(s, 3)]).add(&Poly::term(3, &[(s, 1)]));
        assert!(!etale_check(&AsPoly::from_poly(3, &q, s).unwrap()).unwrap());
        let q = Poly::term(1, &[(s, 2)]);
        assert!(matches!(AsPoly::from_poly(3, &q, s), Err(Error::BadShape(_))));
        let bad = AsPoly { p: 3, var: s, m: 1, a: Poly::sym(s), b: Poly::constant(1), c: Poly::zero() };
        assert!(matches!(etale_check(&bad), Err(Error::BadShape(_))));
    }

    #[test]
    fn towers() {
        let t = build_tower(3, 2, 1, None).unwrap();
        assert_eq!(t.lines(), vec!["u₁ = w²".to_string(), "w²s₁³ − w⁶s₁ = 1".to_string()]);
        let zero = [Poly::zero()];
        let t = build_tower(3, 2, 2, Some(&zero)).unwrap();
        let d = t.levels[1].poly.derivative();
        assert!(d.eq_mod(&Poly::term(-1, &[(Sym::W, 18)]), 3));
        let t = build_tower(2, 3, 4, None).unwrap();
        assert!(t.levels.iter().all(|l| l.etale));
        assert_eq!(t.tame_exponent(), 3);
        assert_eq!(t.levels[3].poly.relation_ascii(false), "w^3*s4^4 - w^48*s4 + f4 == 0");

        let f2 = [Poly::term(1, &[(Sym::S(1), 2), (Sym::W, 1)])];
        assert!(build_tower(3, 2, 2, Some(&f2)).is_ok());
        let bad = [Poly::term(1, &[(Sym::S(2), 1)])];
        assert_eq!(build_tower(3, 2, 2, Some(&bad)).unwrap_err(), Error::EtaleFailure(2));
        let bad = [Poly::term(1, &[(Sym::S(3), 1)])];
        assert_eq!(build_tower(3, 2, 2, Some(&bad)).unwrap_err(), Error::EtaleFailure(2));
    }

    #[test]
    fn poly_arithmetic() {
        let x = Poly::sym(Sym::W);
        let y = Poly::sym(Sym::S(1));
        let s = x.add(&y);
        let sq = s.pow(2).unwrap();
        assert_eq!(sq, x.pow(2).unwrap().add(&Poly::term(2, &[(Sym::W, 1), (Sym::S(1), 1)])).add(&y.pow(2).unwrap()));
        assert_eq!(x.pow(-2).unwrap().mul(&x.pow(2).unwrap()), Poly::constant(1));
        assert!(s.pow(-1).is_err());
        assert_eq!(sq.substitute(Sym::S(1), &x.neg()).unwrap(), Poly::zero());
        assert!(Poly::constant(3).eq_mod(&Poly::zero(), 3));
    }
}
