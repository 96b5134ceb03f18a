//! Command-line front end: subcommands, verification suites and reports.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::deformations::{self, Deformation, Stabilizer};
use crate::error::{Error, Result};
use crate::fgl::{self, lift, FormalGroupLaw};
use crate::laurent::{self, SeriesRing};
use crate::ring::{CoeffRing, DualRing};
use crate::series;
use crate::theta::{self, CandidateAut, ThetaStructure};
use crate::tower;
use crate::witt::{FiniteField, WittRing};

#[derive(Parser, Debug)]
#[command(name = "ltk", version, about = "Witt vectors, formal groups, Lubin-Tate deformations and theta-algebras")]
struct Cli {
    /// Seed for all random sampling.
    #[arg(long, global = true, env = "LTK_SEED", default_value_t = 0)]
    seed: u64,
    /// Emit JSON instead of text.
    #[arg(long, global = true, env = "LTK_JSON", action = clap::ArgAction::SetTrue, value_parser = clap::builder::BoolishValueParser::new())]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// The prime.
    #[arg(long, default_value_t = 2)]
    p: u64,
    /// Witt precision (for `tower` and `defo`: the height).
    #[arg(long, default_value_t = 2)]
    n: u32,
    /// Degree of the residue field over `F_p`.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Height of the Honda law.
    #[arg(long, default_value_t = 1)]
    height: u32,
    /// Truncation degree of formal group laws, or the top of the series window.
    #[arg(long)]
    deg: Option<usize>,
    /// Number of random samples per check.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Number of tower levels past the tame one.
    #[arg(long, default_value_t = 2)]
    depth: u32,
    /// Witt vector in text form, e.g. `3*T + 2`.
    #[arg(long)]
    a: Option<String>,
    /// Image of `x` under a Frobenius lift, e.g. `x^3 + 3`.
    #[arg(long)]
    psi: Option<String>,
    /// Work over `F_q` instead of `W_n(F_q)`.
    #[arg(long)]
    reduce_mod_p: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Witt vectors over finite fields.
    #[command(subcommand)]
    Witt(WittCmd),
    /// Honda formal group laws.
    #[command(subcommand)]
    Fgl(FglCmd),
    /// Lubin-Tate deformations.
    #[command(subcommand)]
    Defo(DefoCmd),
    /// Frobenius lifts and theta on truncated Laurent series.
    #[command(subcommand)]
    Theta(ThetaCmd),
    /// The Artin-Schreier tower over the tame extension.
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Run every suite.
    All(Opts),
}

#[derive(Subcommand, Debug)]
enum WittCmd {
    /// Teichmuller lift of `--a`.
    Teich(Opts),
    /// Ring axioms against `Z/p^n`, Teichmuller and Frobenius-Verschiebung identities.
    Check(Opts),
}

#[derive(Subcommand, Debug)]
enum FglCmd {
    /// `[p](x)` of the Honda law.
    Pseries(Opts),
    /// Height of the Honda law mod `p`.
    Height(Opts),
    /// Lubin-Tate parameters of the Honda law.
    Params(Opts),
    /// Unit, commutativity and associativity to the truncation degree.
    Axioms(Opts),
    /// The full formal group suite.
    Check(Opts),
}

#[derive(Subcommand, Debug)]
enum DefoCmd {
    /// Recover parameters of conjugated base changes of the universal deformation.
    Classify(Opts),
    /// Stabilizer action on deformations.
    Act(Opts),
}

#[derive(Subcommand, Debug)]
enum ThetaCmd {
    /// Check `--psi` is a Frobenius lift and test the theta axioms on it.
    Check(Opts),
    /// Obstruction certificates for candidate automorphisms against `x^p + p`.
    Obstruct(Opts),
}

#[derive(Subcommand, Debug)]
enum TowerCmd {
    /// Print the tower relations.
    Build(Opts),
    /// Check each level is etale.
    Etale(Opts),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub witness: Value,
}

impl Check {
    pub fn new(name: &str, pass: bool, witness: Value) -> Self {
        Check { name: name.to_string(), pass, witness }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub suite: Option<String>,
    pub config: Option<Value>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(suite: &str, config: Value) -> Self {
        Report { suite: Some(suite.into()), config: Some(config), checks: Vec::new() }
    }

    pub fn push(&mut self, name: &str, pass: bool, witness: Value) {
        self.checks.push(Check::new(name, pass, witness));
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        let mut checks = self.checks.clone();
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let checks: Vec<Value> = checks
            .iter()
            .map(|c| {
                let mut v = json!({"name": c.name, "status": status(c.pass)});
                if !c.witness.is_null() {
                    v["witness"] = c.witness.clone();
                }
                v
            })
            .collect();
        let mut v = json!({"checks": checks, "status": status(self.pass())});
        if let Some(s) = &self.suite {
            v["suite"] = json!(s);
        }
        if let Some(c) = &self.config {
            v["config"] = c.clone();
        }
        v
    }

    pub fn to_text(&self) -> String {
        let mut checks: Vec<&Check> = self.checks.iter().collect();
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let suite = self.suite.as_deref().unwrap_or("");
        let mut out = String::new();
        for c in checks {
            out.push_str(&format!("{} {suite}/{}", if c.pass { "PASS" } else { "FAIL" }, c.name));
            if !c.pass && !c.witness.is_null() {
                out.push_str(&format!("  {}", c.witness));
            }
            out.push('\n');
        }
        out
    }
}

fn status(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

/// Text or JSON rendering; JSON has sorted keys and checks sorted by name.
pub fn emit_report(r: &Report, json: bool) -> String {
    if json {
        r.to_json().to_string()
    } else {
        let mut s = r.to_text();
        s.push_str(&format!("status: {}\n", status(r.pass())));
        s
    }
}

/// Run the command line; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    2
                }
            };
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    match dispatch(&cli, &mut rng) {
        Ok(Output::Value(text, json)) => {
            let _ = writeln!(out, "{}", if cli.json { json.to_string() } else { text });
            0
        }
        Ok(Output::Report(r)) => {
            let _ = write!(out, "{}", emit_report(&r, cli.json));
            if cli.json {
                let _ = writeln!(out);
            }
            if r.pass() {
                0
            } else {
                1
            }
        }
        Ok(Output::Reports(rs)) => {
            let pass = rs.iter().all(Report::pass);
            if cli.json {
                let suites: Vec<Value> = rs.iter().map(Report::to_json).collect();
                let v = json!({"seed": cli.seed, "status": status(pass), "suites": suites});
                let _ = writeln!(out, "{v}");
            } else {
                for r in &rs {
                    let _ = write!(out, "{}", r.to_text());
                }
                let _ = writeln!(out, "status: {}", status(pass));
            }
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if is_input_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

fn is_input_error(e: &Error) -> bool {
    matches!(e, Error::InvalidParameter(_) | Error::Reducible(_) | Error::OutOfRange(_) | Error::WindowOverflow(_))
}

enum Output {
    Value(String, Value),
    Report(Report),
    Reports(Vec<Report>),
}

fn dispatch(cli: &Cli, rng: &mut ChaCha8Rng) -> Result<Output> {
    match &cli.cmd {
        Cmd::Witt(WittCmd::Teich(o)) => {
            let r = WittRing::new(FiniteField::extension(o.p, o.d)?, o.n)?;
            let text = o.a.as_deref().ok_or_else(|| Error::InvalidParameter("--a is required".into()))?;
            let a = laurent::parse_witt(&r, text)
                .ok_or_else(|| Error::InvalidParameter(format!("cannot parse `{text}`")))?;
            let t = r.teichmuller(&a);
            Ok(Output::Value(r.format(&t), r.to_json(&t)))
        }
        Cmd::Witt(WittCmd::Check(o)) => Ok(Output::Report(suite_witt(o, rng)?)),
        Cmd::Fgl(c) => fgl_command(c),
        Cmd::Defo(DefoCmd::Classify(o)) => Ok(Output::Report(suite_classify(o, rng)?)),
        Cmd::Defo(DefoCmd::Act(o)) => Ok(Output::Report(suite_act(o, rng)?)),
        Cmd::Theta(ThetaCmd::Check(o)) => Ok(Output::Report(theta_check(o, rng)?)),
        Cmd::Theta(ThetaCmd::Obstruct(o)) => Ok(Output::Report(suite_obstruction(o.p, o.d.max(1), o.samples, rng)?)),
        Cmd::Tower(TowerCmd::Build(o)) => {
            let t = tower::build_tower(o.p, o.n, o.depth, None)?;
            Ok(Output::Value(t.lines().join("\n"), t.to_json()))
        }
        Cmd::Tower(TowerCmd::Etale(o)) => Ok(Output::Report(suite_tower_etale(o)?)),
        Cmd::All(o) => Ok(Output::Reports(run_all(o, rng)?)),
    }
}

fn honda_from(o: &Opts) -> Result<(WittRing, FormalGroupLaw<WittRing>)> {
    let h = o.height.max(1);
    let deg = o.deg.unwrap_or((o.p as usize).pow(h).max(8));
    let n = if o.reduce_mod_p { 1 } else { o.n };
    let r = WittRing::new(FiniteField::extension(o.p, o.d)?, n)?;
    let law = fgl::honda_fgl(&r, h, deg)?;
    Ok((r, law))
}

fn fgl_command(c: &FglCmd) -> Result<Output> {
    match c {
        FglCmd::Pseries(o) => {
            let (r, law) = honda_from(o)?;
            let ps = law.p_series()?;
            Ok(Output::Value(format_series(&r, &ps), series_json(&r, &ps)))
        }
        FglCmd::Height(o) => {
            let (_, law) = honda_from(o)?;
            let h = law.height()?;
            Ok(Output::Value(h.to_string(), json!(h)))
        }
        FglCmd::Params(o) => {
            let (r, law) = honda_from(o)?;
            let lt = law.extract_lt_params(o.height.max(1))?;
            let params: Vec<String> = lt.params.iter().map(|c| r.format(c)).collect();
            let text = format!("params: [{}]  top: {}", params.join(", "), r.format(&lt.top));
            let v = json!({"params": lt.params.iter().map(|c| r.rep_json(c)).collect::<Vec<_>>(), "top": r.rep_json(&lt.top)});
            Ok(Output::Value(text, v))
        }
        FglCmd::Axioms(o) => {
            let (r, law) = honda_from(o)?;
            let mut rep = Report::new("fgl", opts_json(o));
            let a = law.check_axioms()?;
            rep.push("unit", a.unit, Value::Null);
            rep.push("commutative", a.commutative, Value::Null);
            rep.push("associative", a.associative, json!(a.failure));
            rep.config.as_mut().unwrap()["ring"] = r.descriptor_json();
            Ok(Output::Report(rep))
        }
        FglCmd::Check(o) => Ok(Output::Report(suite_fgl(o)?)),
    }
}

fn format_series<R: CoeffRing>(r: &R, s: &[R::Elem]) -> String {
    let mut parts = Vec::new();
    for (i, c) in s.iter().enumerate() {
        if r.is_zero(c) {
            continue;
        }
        let coeff = r.format(c);
        let coeff = if coeff.contains(' ') { format!("({coeff})") } else { coeff };
        parts.push(match (i, coeff.as_str()) {
            (0, _) => coeff,
            (1, "1") => "x".into(),
            (1, _) => format!("{coeff}*x"),
            (_, "1") => format!("x^{i}"),
            _ => format!("{coeff}*x^{i}"),
        });
    }
    parts.push(format!("O(x^{})", s.len()));
    parts.join(" + ")
}

fn series_json<R: CoeffRing>(r: &R, s: &[R::Elem]) -> Value {
    let terms: Vec<Value> =
        s.iter().enumerate().filter(|(_, c)| !r.is_zero(c)).map(|(i, c)| json!([i, r.elem_json(c)])).collect();
    json!({"D": s.len() - 1, "terms": terms})
}

fn opts_json(o: &Opts) -> Value {
    json!({"p": o.p, "n": o.n, "d": o.d, "height": o.height, "deg": o.deg, "samples": o.samples})
}

/// Ring operations against integers mod `p^n`, Teichmuller and Frobenius-Verschiebung identities.
fn suite_witt(o: &Opts, rng: &mut ChaCha8Rng) -> Result<Report> {
    let mut rep = Report::new("witt", opts_json(o));
    let w = WittRing::prime(o.p, o.n)?;
    let m = w.modulus() as i64;
    let residues: Vec<i64> = if m <= 125 { (0..m).collect() } else { (0..o.samples.max(1)).map(|_| rng.gen_range(0..m)).collect() };
    let mut bad = None;
    'outer: for &a in &residues {
        for &b in &residues {
            let (x, y) = (w.from_i64(a), w.from_i64(b));
            if w.add(&x, &y) != w.from_i64((a + b) % m) || w.mul(&x, &y) != w.from_i64(a * b % m) {
                bad = Some(json!([a, b]));
                break 'outer;
            }
        }
    }
    rep.push("integers_mod_p_n", bad.is_none(), bad.unwrap_or(Value::Null));

    let k = WittRing::new(FiniteField::extension(o.p, o.d)?, o.n)?;
    let elems = k.residue_ring().elements();
    let mut bad = None;
    for a in &elems {
        for b in &elems {
            let lhs = k.teichmuller(&k.residue_ring().mul(a, b));
            let rhs = k.mul(&k.teichmuller(a), &k.teichmuller(b));
            if lhs != rhs {
                bad = Some(json!([k.rep_json(a), k.rep_json(b)]));
            }
        }
    }
    rep.push("teichmuller_multiplicative", bad.is_none(), bad.unwrap_or(Value::Null));

    // The unique lift of `a` fixed by `b -> b^q`, found by search.
    if k.q().pow(k.n()) <= 625 {
        let all = k.elements();
        let q = k.q();
        let mut bad = None;
        for a in &elems {
            let a = k.lift_from(a, &k.residue_ring())?;
            let found: Vec<_> = all.iter().filter(|b| k.residue(b) == k.residue(&a) && k.pow(b, q) == **b).collect();
            if found != vec![&k.teichmuller(&a)] {
                bad = Some(k.rep_json(&a));
            }
        }
        rep.push("teichmuller_brute_force", bad.is_none(), bad.unwrap_or(Value::Null));
    }

    let pe = k.from_i64(o.p as i64);
    let mut bad = None;
    for _ in 0..o.samples {
        let (a, b) = (k.random(rng), k.random(rng));
        let fv = k.frobenius(&k.verschiebung(&a)) == k.mul(&pe, &a);
        let vafb = k.verschiebung(&k.mul(&a, &k.frobenius(&b))) == k.mul(&k.verschiebung(&a), &b);
        if !(fv && vafb) {
            bad = Some(json!([k.rep_json(&a), k.rep_json(&b)]));
        }
    }
    rep.push("frobenius_verschiebung", bad.is_none(), bad.unwrap_or(Value::Null));
    Ok(rep)
}

/// The classifier for topological nilpotence against repeated `p`-th powers, and the
/// valuation formula for `p^i C(p^r, i)`.
fn suite_laurent(o: &Opts, rng: &mut ChaCha8Rng) -> Result<Report> {
    let mut rep = Report::new("laurent", json!({"p": o.p, "window": [-6, 20], "samples": o.samples}));
    let s = SeriesRing::new(WittRing::prime(o.p, 2)?, -6, 20)?;
    let mut bad = None;
    let mut n = 0;
    while n < o.samples {
        let f = nilpotence_sample(&s, rng)?;
        if !s.is_unit(&f)? {
            continue;
        }
        n += 1;
        if s.is_topologically_nilpotent(&f)? != nilpotence_by_powers(&s, &f)? {
            bad = Some(s.to_json(&f));
        }
    }
    rep.push("nilpotence_classifier", bad.is_none(), bad.unwrap_or(Value::Null));

    let mut bad = None;
    for r in 1..=3u32 {
        let pr = o.p.pow(r);
        for i in 1..=pr {
            let v = bigint_valuation(&(BigInt::from(o.p).pow(i as u32) * binomial(pr, i)), o.p);
            if laurent::kummer_valuation(o.p, r, i)? != v {
                bad = Some(json!([r, i]));
            }
        }
    }
    rep.push("kummer_formula", bad.is_none(), bad.unwrap_or(Value::Null));
    Ok(rep)
}

/// A random element of `W_2 k((x))` with terms in `[-6, 20]`; negative-degree coefficients
/// are unit multiples of `p` half of the time so that both classes occur.
pub fn nilpotence_sample<R: Rng + ?Sized>(s: &SeriesRing, rng: &mut R) -> Result<laurent::LaurentSeries> {
    let w = s.coeff_ring();
    let pe = w.from_i64(s.p() as i64);
    let p_only_below = rng.gen_bool(0.5);
    let lo = rng.gen_range(-6..=0);
    let terms: Vec<_> = (lo..=6)
        .map(|d| {
            let c = w.random(rng);
            (d, if d <= 0 && p_only_below { w.mul(&c, &pe) } else { c })
        })
        .collect();
    s.from_terms(&terms)
}

/// Brute force: `v_x(f^{p^r})` must turn positive; a power leaving the window from below
/// has valuation decreasing without bound.
pub fn nilpotence_by_powers(s: &SeriesRing, f: &laurent::LaurentSeries) -> Result<bool> {
    let r_max = 5;
    match s.nilpotence_oracle(f, r_max) {
        Err(Error::WindowOverflow(d)) if d < s.lo() => Ok(false),
        other => other,
    }
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    let mut c = BigInt::from(1);
    for j in 0..k {
        c = c * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    c
}

pub fn bigint_valuation(x: &BigInt, p: u64) -> u64 {
    use num::Zero;
    let p = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    while !x.is_zero() && (&x % &p).is_zero() {
        x /= &p;
        v += 1;
    }
    v
}

/// Honda laws against their log/exp construction and their `p`-series, and the
/// Lubin-Tate parameter round trip.
fn suite_fgl(o: &Opts) -> Result<Report> {
    let mut rep = Report::new("fgl", opts_json(o));
    let p = o.p;
    let h = o.height.max(1);
    let deg = o.deg.unwrap_or(16);
    let w = WittRing::prime(p, o.n.max(2))?;
    let law = fgl::honda_fgl(&w, h, deg)?;
    let a = law.check_axioms()?;
    rep.push("honda_axioms", a.ok(), json!(a.failure));

    let rational = fgl::honda_fgl_rational(p, h, deg)?;
    let via_log = rational.map(&w, |c| w.from_rational(c))?;
    rep.push("honda_matches_log", via_log.coeffs == law.coeffs, Value::Null);

    let k = WittRing::prime(p, 1)?;
    let red = fgl::honda_fgl(&k, h, deg)?;
    let ps = red.p_series()?;
    let mut want = series::zeros(&k, deg);
    let q = (p as usize).pow(h);
    if q <= deg {
        want[q] = k.one();
    }
    rep.push("mod_p_series_is_x_to_q", ps == want, json!(format_series(&k, &ps)));
    let height = red.height();
    rep.push("mod_p_height", height.as_ref().ok() == Some(&h), json!(height.map_err(|e| e.to_string()).ok()));

    let lt = deformations::lubin_tate_cached(p, 2, (p * p) as usize + 1)?;
    let extracted = lt.extract_lt_params(2)?;
    let ok = extracted.params == vec![lt.ring.var(0)] && lt.ring.equal(&extracted.top, &lt.ring.one());
    rep.push("lubin_tate_params_round_trip", ok, Value::Null);
    Ok(rep)
}

/// Reduce-then-lift round trip for isomorphisms over `F_4[eps]`.
fn suite_lift(samples: usize, rng: &mut ChaCha8Rng) -> Result<Report> {
    let d = 16;
    let mut rep = Report::new("lift", json!({"ring": "F_4[eps]", "D": d, "samples": samples}));
    let r = DualRing::new(WittRing::new(FiniteField::extension(2, 2)?, 1)?);
    let base = fgl::honda_fgl(&r.base, 1, d)?;
    let f = base.map(&r, |c| Ok(r.lift(*c)))?;
    let mut bad = None;
    let mut degree = 0;
    for _ in 0..samples {
        let mut h = series::x_series(&r, d);
        h[1] = r.make(r.base.random_unit(rng), r.base.random(rng));
        for c in h.iter_mut().skip(2) {
            *c = r.make(r.base.random(rng), r.base.random(rng));
        }
        let f2 = f.conjugate(&h)?;
        let bar = lift::reduce_iso(&r, &lift::EpsilonIdeal, &h);
        let got = lift::lift_iso(&f, &f2, &lift::EpsilonIdeal, &bar)?;
        degree = got.degree;
        if !series::equal(&r, &got.phi, &series::truncate(&r, &h, got.degree)) {
            bad = Some(series_json(&r, &h));
        }
    }
    rep.push("reduce_then_lift", bad.is_none(), bad.unwrap_or(json!({"degree": degree})));
    Ok(rep)
}

/// Classification of base changes of the universal deformation, conjugated by a
/// coordinate change compatible with the normalization.
fn suite_classify(o: &Opts, rng: &mut ChaCha8Rng) -> Result<Report> {
    let p = o.p;
    let n = o.n.max(2);
    let dd = o.deg.unwrap_or((p as usize).pow(n));
    let mut rep = Report::new("defo", json!({"p": p, "n": n, "D": dd, "samples": o.samples}));
    let u = deformations::universal_deformation(p, n, dd, Some(3))?;
    let r = u.law.ring.clone();
    let mut out = Vec::new();
    let mut ok = true;
    for _ in 0..o.samples.min(5) {
        let params: Vec<_> = (0..n as usize - 1)
            .map(|i| {
                let a = rng.gen_range(-5..=5i64);
                let b = rng.gen_range(-5..=5i64);
                let v = r.var(i);
                r.add(&r.scale(&v, a).unwrap(), &r.scale(&r.mul(&v, &v).unwrap(), b).unwrap())
            })
            .collect();
        let law = fgl::specialize(&u.law, &r, &params)?;
        let mut g = series::x_series(&r, dd);
        for (i, c) in g.iter_mut().enumerate().skip(2) {
            if is_power_of(p, i) {
                continue;
            }
            // In the maximal ideal, so that `alpha = x` still works.
            *c = r.add(&r.from_i64(p as i64 * rng.gen_range(-3..=3)), &r.scale(&r.var(0), rng.gen_range(-3..=3))?);
        }
        let conj = law.conjugate(&series::reversion(&r, &g, dd)?)?;
        let def = Deformation::new(conj.clone(), n, u.field.clone(), u.field.zero(), series::x_series(&u.field, dd))?;
        let cl = deformations::classify(&def)?;
        let good = cl.params == params && series::equal(&r, &cl.iso, &g) && conj.iso_check(&law, &cl.iso)?;
        ok &= good;
        out.push(json!({
            "params": cl.params.iter().map(|c| r.elem_json(c)).collect::<Vec<_>>(),
            "iso": series_json(&r, &cl.iso),
            "ok": good,
        }));
    }
    rep.push("classify_recovers_parameters", ok, json!(out));
    Ok(rep)
}

fn is_power_of(p: u64, i: usize) -> bool {
    let mut k = 1usize;
    while k < i {
        k *= p as usize;
    }
    k == i
}

/// The stabilizer acts on the Honda deformation over `W_2(F_{p^n})`, on the right.
fn suite_act(o: &Opts, rng: &mut ChaCha8Rng) -> Result<Report> {
    let p = o.p;
    let n = o.n.max(2);
    let dd = o.deg.unwrap_or(12);
    let mut rep = Report::new("defo", json!({"p": p, "n": n, "D": dd, "samples": o.samples}));
    let field = FiniteField::extension(p, n as usize)?;
    let k = WittRing::new(field.clone(), 1)?;
    let st = Stabilizer::new(k.clone(), n, dd)?;
    let w = WittRing::new(field, 2)?;
    let law = fgl::honda_fgl(&w, n, dd)?;
    let d = Deformation::new(law, n, k.clone(), k.generator(), series::x_series(&k, dd))?;
    let mut valid = true;
    let mut right = true;
    for _ in 0..o.samples.min(5) {
        let s = st.random(rng, n)?;
        let t = st.random(rng, n)?;
        let sd = st.act(&s, &d)?;
        valid &= sd.validate()?;
        let two = st.act(&t, &sd)?;
        let once = st.act(&st.compose(&s, &t)?, &d)?;
        right &= two.alpha == once.alpha && two.gen_image == once.gen_image;
    }
    rep.push("action_preserves_deformations", valid, Value::Null);
    rep.push("right_action", right, Value::Null);
    Ok(rep)
}

/// Sum and product formulas for a user-supplied Frobenius lift.
fn theta_check(o: &Opts, rng: &mut ChaCha8Rng) -> Result<Report> {
    let hi = o.deg.unwrap_or(32) as i64;
    let ring = SeriesRing::new(WittRing::new(FiniteField::extension(o.p, o.d)?, o.n + 1)?, -8, hi)?;
    let psi_text = o.psi.clone().unwrap_or_else(|| format!("x^{}", o.p));
    let y = ring.parse(&psi_text)?;
    let mut rep = Report::new("theta", json!({"p": o.p, "n": o.n, "window": [-8, hi], "psi": psi_text, "samples": o.samples}));
    let t = match ThetaStructure::new(&ring, y.clone()) {
        Ok(t) => t,
        Err(e @ (Error::NotFrobeniusLift | Error::NotUnit | Error::NotTopologicallyNilpotent)) => {
            rep.push("frobenius_lift", false, json!({"error": e.to_string(), "psi": ring.series_json(&y)}));
            return Ok(rep);
        }
        Err(e) => return Err(e),
    };
    rep.push("frobenius_lift", true, Value::Null);
    let lo = if y.v_x() == Some(ring.p() as i64) { -1 } else { 0 };
    let (mut sum, mut prod) = (None, None);
    for _ in 0..o.samples {
        let f = ring.random_poly(rng, lo, 8)?;
        let g = ring.random_poly(rng, lo, 8)?;
        let c = t.check_axioms(&f, &g)?;
        if let Some(m) = c.sum {
            sum = Some(json!({"f": ring.format(&f), "g": ring.format(&g), "at": m.0}));
        }
        if let Some(m) = c.product {
            prod = Some(json!({"f": ring.format(&f), "g": ring.format(&g), "at": m.0}));
        }
    }
    rep.push("sum_formula", sum.is_none(), sum.unwrap_or(Value::Null));
    rep.push("product_formula", prod.is_none(), prod.unwrap_or(Value::Null));
    Ok(rep)
}

/// Axioms, descent and closed forms for `psi_0 = x^p` and `psi = x^p + p`.
fn suite_theta(samples: usize, rng: &mut ChaCha8Rng) -> Result<Report> {
    let mut rep = Report::new("theta", json!({"p": [2, 3], "p_prec": 4, "window": [-8, 32], "samples": samples}));
    for p in [2u64, 3] {
        let ring = SeriesRing::new(WittRing::prime(p, 5)?, -8, 32)?;
        for (name, c, lo) in [("psi0", 0i64, -1i64), ("psi", p as i64, 0)] {
            let t = ThetaStructure::shifted(&ring, c)?;
            let mut ok = true;
            let mut descent = true;
            for _ in 0..samples {
                let f = ring.random_poly(rng, lo, 8)?;
                let g = ring.random_poly(rng, lo, 8)?;
                ok &= t.check_axioms(&f, &g)?.ok();
                descent &= t.descent_check(&f, &g)?;
            }
            rep.push(&format!("axioms_{name}_p{p}"), ok, Value::Null);
            rep.push(&format!("descent_{name}_p{p}"), descent, Value::Null);
        }
        let t = ThetaStructure::shifted(&ring, p as i64)?;
        let t0 = ThetaStructure::shifted(&ring, 0)?;
        let k = t.out.with_coeff(t.out.coeff_ring().residue_ring());
        let mut ok = true;
        for m in 1..=10i64 {
            let xm = ring.from_ints(&[(m, 1)])?;
            let got = t.out.reduce_to(&t.theta(&xm)?, &k)?;
            ok &= k.eq(&got, &k.from_ints(&[(p as i64 * (m - 1), m)])?);
            ok &= t0.theta(&xm)?.terms().is_empty();
        }
        rep.push(&format!("theta_of_powers_p{p}"), ok, Value::Null);
        let mut ok = true;
        for m in -50..=50i64 {
            let want = theta::theta_integer(p, m);
            let got = t0.theta(&ring.from_i64(m))?;
            let m4 = BigInt::from(p.pow(4));
            let want = ((want % &m4) + &m4) % &m4;
            ok &= t0.out.eq(&got, &t0.out.from_i64(i64::try_from(want).unwrap()));
        }
        rep.push(&format!("theta_of_integers_p{p}"), ok, Value::Null);
    }
    Ok(rep)
}

/// Certificates that `theta(f(x)) != 0 mod p` for candidate isomorphisms `x -> f(x)`.
pub fn suite_obstruction(p: u64, d: usize, samples: usize, rng: &mut ChaCha8Rng) -> Result<Report> {
    let k = FiniteField::extension(p, d)?;
    let t = theta::obstruction_structure(&k)?;
    let (lo, hi) = theta::obstruction_window(p);
    let mut rep = Report::new("obstruction", json!({"p": p, "d": d, "window": [lo, hi], "samples": samples}));
    let mut nonzero = 0;
    let mut consistent = true;
    let mut certs = Vec::new();
    let mut constant_only = 0;
    for _ in 0..samples {
        let c = CandidateAut::random(t.ring(), rng)?;
        let cert = theta::obstruction_certificate(&t, &c)?;
        nonzero += cert.nonzero as usize;
        consistent &= cert.consistent();
        constant_only += (!cert.h_zero_mod_p && !cert.h_negative_mod_p) as usize;
        certs.push(cert.to_json(&t));
    }
    rep.push("nonzero", nonzero == samples, json!({"nonzero": nonzero, "samples": samples}));
    rep.push("certificate_terms", consistent, json!({"constant_only_h": constant_only, "certificates": certs}));
    Ok(rep)
}

fn suite_tower_etale(o: &Opts) -> Result<Report> {
    let mut rep = Report::new("tower", json!({"p": o.p, "n": o.n, "depth": o.depth}));
    let t = tower::build_tower(o.p, o.n, o.depth, None)?;
    for l in &t.levels {
        rep.push(&format!("etale_s{}", l.i), l.etale, json!({"derivative": l.poly.derivative().format_ascii()}));
    }
    rep.push("tame_exponent", t.tame_exponent() == (o.p as i64).pow(o.n - 1) - 1, json!(t.tame.ascii()));
    Ok(rep)
}

fn suite_tower() -> Result<Report> {
    let mut rep = Report::new("tower", json!({"p": [2, 3, 5], "n": [2, 3], "depth": 3}));
    let s1 = tower::derive_s1_relation(3, 2)?;
    rep.push("s1_relation_3_2", s1.relation_unicode(true) == "w²s₁³ − w⁶s₁ = 1", json!(s1.relation_ascii(true)));
    let mut etale = true;
    let mut tame = true;
    for p in [2, 3, 5] {
        for n in [2, 3] {
            let t = tower::build_tower(p, n, 3, None)?;
            etale &= t.levels.iter().all(|l| l.etale);
            tame &= t.tame_exponent() == (p as i64).pow(n - 1) - 1;
        }
    }
    rep.push("etale_levels", etale, Value::Null);
    rep.push("tame_exponent", tame, Value::Null);
    Ok(rep)
}

fn run_all(o: &Opts, rng: &mut ChaCha8Rng) -> Result<Vec<Report>> {
    let s = o.samples;
    let mut reports = vec![
        suite_witt(&Opts { p: 5, n: 2, d: 1, ..o.clone() }, rng)?,
        suite_witt(&Opts { p: 2, n: 2, d: 2, ..o.clone() }, rng)?,
        suite_laurent(&Opts { p: 3, ..o.clone() }, rng)?,
        suite_fgl(&Opts { p: 2, n: 2, height: 1, deg: Some(16), ..o.clone() })?,
        suite_fgl(&Opts { p: 3, n: 2, height: 2, deg: Some(10), ..o.clone() })?,
        suite_lift(s.min(10), rng)?,
        suite_classify(&Opts { p: 3, n: 2, deg: Some(9), ..o.clone() }, rng)?,
        suite_act(&Opts { p: 2, n: 2, deg: Some(12), ..o.clone() }, rng)?,
        suite_theta(s, rng)?,
        suite_obstruction(2, 2, s, rng)?,
        suite_obstruction(3, 2, s, rng)?,
        suite_tower()?,
    ];
    let tags = ["p5", "f4", "p3", "p2_h1", "p3_h2", "f4_eps", "classify", "act", "", "p2", "p3", ""];
    for (r, tag) in reports.iter_mut().zip(tags) {
        if !tag.is_empty() {
            r.suite = r.suite.take().map(|s| format!("{s}_{tag}"));
        }
    }
    reports.sort_by(|a, b| a.suite.cmp(&b.suite));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ltk").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn empty_report() {
        assert_eq!(emit_report(&Report::default(), true), r#"{"checks":[],"status":"pass"}"#);
    }

    #[test]
    fn examples() {
        assert_eq!(run_str(&["witt", "teich", "--p", "5", "--n", "2", "--a", "2"]), (0, "7\n".into(), String::new()));
        let (code, out, _) = run_str(&["fgl", "height", "--p", "3", "--height", "2", "--deg", "9", "--reduce-mod-p"]);
        assert_eq!((code, out.as_str()), (0, "2\n"));
        let (code, out, _) = run_str(&["theta", "obstruct", "--p", "3", "--samples", "10", "--seed", "1", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["checks"][1]["witness"]["nonzero"], 10);
    }

    #[test]
    fn exit_codes() {
        let (code, _, err) = run_str(&["witt", "teich", "--p", "4", "--n", "2", "--a", "1"]);
        assert_eq!(code, 2);
        assert!(!err.is_empty());
        assert_eq!(run_str(&["frobnicate"]).0, 2);
        let (code, out, _) = run_str(&["theta", "check", "--p", "3", "--n", "2", "--psi", "x^2"]);
        assert_eq!(code, 1);
        assert!(out.contains("FAIL theta/frobenius_lift"));
        assert_eq!(run_str(&["theta", "check", "--p", "3", "--n", "2", "--psi", "x^3 + 3", "--samples", "5"]).0, 0);
    }

    #[test]
    fn tower_output() {
        let (code, out, _) = run_str(&["tower", "build", "--p", "3", "--n", "2", "--depth", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out, "u₁ = w²\nw²s₁³ − w⁶s₁ = 1\n");
        assert_eq!(run_str(&["tower", "etale", "--p", "3", "--n", "2", "--depth", "3"]).0, 0);
    }

    #[test]
    fn fgl_subcommands() {
        let (code, out, _) = run_str(&["fgl", "pseries", "--p", "2", "--height", "1", "--deg", "4", "--reduce-mod-p"]);
        assert_eq!((code, out.as_str()), (0, "x^2 + O(x^5)\n"));
        assert_eq!(run_str(&["fgl", "axioms", "--p", "3", "--height", "1", "--deg", "8"]).0, 0);
        let (code, out, _) = run_str(&["fgl", "params", "--p", "2", "--height", "1", "--n", "2", "--deg", "4"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("params: []"));
    }
}
