//! Exact arithmetic in a real algebraic number field Q(ρ), together with the
//! certified root-location tools the rest of the crate needs: Sturm sequences,
//! validated complex root enclosures, Pisot certification, and a separation
//! bound for polynomial values with restricted coefficients.
//!
//! The field is described by an integer minimal polynomial and an isolating
//! interval for the distinguished real root ρ.  Field elements are dense
//! rational coordinate vectors in the power basis 1, ρ, …, ρ^(d−1).  Sign
//! determination is exact: evaluate the coordinate polynomial over the
//! isolating interval with interval arithmetic and bisect the shared interval
//! until the sign is resolved.  Since the minimal polynomial is irreducible, a
//! nonzero element cannot vanish at ρ, so the loop terminates.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, RwLock};
use thiserror::Error;

pub type Int = BigInt;
pub type Rat = BigRational;

#[derive(Debug, Error)]
pub enum NfError {
    #[error("invalid polynomial: {0}")]
    InvalidPoly(String),
    #[error("interval [{lo}, {hi}] does not isolate a single root (sturm count {count})")]
    BadInterval { lo: String, hi: String, count: i64 },
    #[error("root enclosure failed: {0}")]
    RootEnclosure(String),
    #[error("separation bound not applicable: {0}")]
    SeparationNotApplicable(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

// ---------------------------------------------------------------------------
// small rational helpers

/// Convert a rational to f64 without overflowing on huge numerators or
/// denominators (the naive numer/denom route turns into inf/inf).
pub fn rat_to_f64(q: &Rat) -> f64 {
    let n = q.numer();
    let d = q.denom();
    if n.is_zero() {
        return 0.0;
    }
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let sn = (nb - 700).max(0) as u64;
    let sd = (db - 700).max(0) as u64;
    let nf = (n >> sn).to_f64().unwrap_or(f64::NAN);
    let df = (d >> sd).to_f64().unwrap_or(f64::NAN);
    let diff = sn as i64 - sd as i64;
    (nf / df) * 2f64.powi(diff.clamp(-1_000_000, 1_000_000) as i32)
}

pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

fn two_pow(n: u64) -> Int {
    Int::one() << n
}

/// Round to a dyadic rational carrying roughly `bits` significant bits.
fn round_dyadic(q: &Rat, bits: i64) -> Rat {
    if q.is_zero() {
        return Rat::zero();
    }
    let mag = q.numer().bits() as i64 - q.denom().bits() as i64;
    let shift = (bits - mag).clamp(0, 1 << 20) as u64;
    let scale = two_pow(shift);
    let num = q.numer() * &scale;
    Rat::new(num.div_floor(q.denom()), scale)
}

fn round_dyadic_c(z: &Complex<Rat>, bits: i64) -> Complex<Rat> {
    Complex::new(round_dyadic(&z.re, bits), round_dyadic(&z.im, bits))
}

fn rat_sign(q: &Rat) -> i8 {
    match q.numer().sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

// ---------------------------------------------------------------------------
// dense polynomial helpers (ascending coefficients)

pub(crate) mod poly {
    use super::*;

    pub fn trim(p: &mut Vec<Rat>) {
        while p.len() > 1 && p.last().map(|c| c.is_zero()).unwrap_or(false) {
            p.pop();
        }
        if p.is_empty() {
            p.push(Rat::zero());
        }
    }

    pub fn degree(p: &[Rat]) -> usize {
        p.len().saturating_sub(1)
    }

    pub fn is_zero(p: &[Rat]) -> bool {
        p.iter().all(|c| c.is_zero())
    }

    pub fn from_int(p: &[Int]) -> Vec<Rat> {
        p.iter().map(|c| Rat::from_integer(c.clone())).collect()
    }

    pub fn derivative(p: &[Rat]) -> Vec<Rat> {
        if p.len() <= 1 {
            return vec![Rat::zero()];
        }
        let mut out = Vec::with_capacity(p.len() - 1);
        for (i, c) in p.iter().enumerate().skip(1) {
            out.push(c * Rat::from_integer(Int::from(i)));
        }
        out
    }

    pub fn eval(p: &[Rat], x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in p.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_c(p: &[Rat], z: &Complex<Rat>) -> Complex<Rat> {
        let mut acc = Complex::new(Rat::zero(), Rat::zero());
        for c in p.iter().rev() {
            acc = acc * z + Complex::new(c.clone(), Rat::zero());
        }
        acc
    }

    /// Interval Horner evaluation over [xlo, xhi]; the input interval may
    /// contain negative values, so each step takes min/max over the four
    /// endpoint products.
    pub fn eval_interval(p: &[Rat], xlo: &Rat, xhi: &Rat) -> (Rat, Rat) {
        let mut lo = Rat::zero();
        let mut hi = Rat::zero();
        for c in p.iter().rev() {
            let cands = [&lo * xlo, &lo * xhi, &hi * xlo, &hi * xhi];
            let mut nlo = cands[0].clone();
            let mut nhi = cands[0].clone();
            for v in &cands[1..] {
                if *v < nlo {
                    nlo = v.clone();
                }
                if *v > nhi {
                    nhi = v.clone();
                }
            }
            lo = nlo + c;
            hi = nhi + c;
        }
        (lo, hi)
    }

    /// Quotient and remainder of a by b over Q.
    pub fn div_rem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
        assert!(!is_zero(b), "polynomial division by zero");
        let mut rem: Vec<Rat> = a.to_vec();
        trim(&mut rem);
        let db = degree(b);
        let lead = b[db].clone();
        if degree(&rem) < db || is_zero(&rem) {
            return (vec![Rat::zero()], rem);
        }
        let mut quo = vec![Rat::zero(); degree(&rem) - db + 1];
        while !is_zero(&rem) && degree(&rem) >= db {
            let dr = degree(&rem);
            let coef = &rem[dr] / &lead;
            let shift = dr - db;
            quo[shift] = coef.clone();
            for i in 0..=db {
                let t = &b[i] * &coef;
                rem[shift + i] = &rem[shift + i] - t;
            }
            trim(&mut rem);
            if dr == 0 {
                break;
            }
        }
        trim(&mut quo);
        (quo, rem)
    }

    pub fn rem(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        div_rem(a, b).1
    }

    fn make_monic(p: &mut Vec<Rat>) {
        trim(p);
        let d = degree(p);
        let lead = p[d].clone();
        if !lead.is_zero() && !lead.is_one() {
            for c in p.iter_mut() {
                *c = &*c / &lead;
            }
        }
    }

    pub fn gcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let mut r0 = a.to_vec();
        let mut r1 = b.to_vec();
        trim(&mut r0);
        trim(&mut r1);
        while !is_zero(&r1) {
            let r = rem(&r0, &r1);
            r0 = r1;
            r1 = r;
            make_monic(&mut r0);
        }
        make_monic(&mut r0);
        r0
    }

    /// Sturm chain of a squarefree polynomial.
    pub fn sturm_chain(p: &[Rat]) -> Vec<Vec<Rat>> {
        let mut chain = vec![p.to_vec(), derivative(p)];
        trim(&mut chain[0]);
        trim(&mut chain[1]);
        loop {
            let n = chain.len();
            if is_zero(&chain[n - 1]) || degree(&chain[n - 1]) == 0 {
                break;
            }
            let mut r = rem(&chain[n - 2], &chain[n - 1]);
            for c in r.iter_mut() {
                *c = -c.clone();
            }
            trim(&mut r);
            if is_zero(&r) {
                break;
            }
            chain.push(r);
        }
        chain
    }

    fn variations(chain: &[Vec<Rat>], x: &Rat) -> i64 {
        let mut count = 0;
        let mut last: i8 = 0;
        for p in chain {
            let s = super::rat_sign(&eval(p, x));
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Number of real roots of the (squarefree) polynomial in (lo, hi].
    pub fn count_roots(chain: &[Vec<Rat>], lo: &Rat, hi: &Rat) -> i64 {
        variations(chain, lo) - variations(chain, hi)
    }

    /// 1 + max |a_i| / |a_d|: strict bound on the modulus of every root.
    pub fn cauchy_bound(p: &[Rat]) -> Rat {
        let d = degree(p);
        let lead = p[d].abs();
        let mut m = Rat::zero();
        for c in &p[..d] {
            let r = c.abs() / &lead;
            if r > m {
                m = r;
            }
        }
        m + Rat::one()
    }

    /// Divide out the squarefree part: p / gcd(p, p').
    pub fn squarefree_part(p: &[Rat]) -> Vec<Rat> {
        let g = gcd(p, &derivative(p));
        if degree(&g) == 0 {
            let mut out = p.to_vec();
            trim(&mut out);
            return out;
        }
        let (q, _) = div_rem(p, &g);
        q
    }
}

fn normalize_int_poly(p: &[Int]) -> Result<Vec<Int>, NfError> {
    let mut v: Vec<Int> = p.to_vec();
    while v.len() > 1 && v.last().map(|c| c.is_zero()).unwrap_or(false) {
        v.pop();
    }
    if v.is_empty() || v.iter().all(|c| c.is_zero()) {
        return Err(NfError::InvalidPoly("zero polynomial".into()));
    }
    let mut content = Int::zero();
    for c in &v {
        content = content.gcd(c);
    }
    if v.last().unwrap().sign() == num_bigint::Sign::Minus {
        content = -content;
    }
    for c in v.iter_mut() {
        *c = &*c / &content;
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// the field

/// A real algebraic number field Q(ρ), shared immutably (behind `Arc`) by all
/// elements.  Holds the integer minimal polynomial of ρ, the reduction row for
/// ρ^d, and a refinable isolating interval used for sign determination.
pub struct FieldContext {
    min_poly: Vec<Int>,
    degree: usize,
    reduction: Vec<Rat>,
    min_poly_rat: Vec<Rat>,
    initial_interval: (Rat, Rat),
    interval: RwLock<(Rat, Rat)>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.interval();
        f.debug_struct("FieldContext")
            .field("min_poly", &self.min_poly)
            .field("interval", &(lo.to_string(), hi.to_string()))
            .finish()
    }
}

impl FieldContext {
    /// Build a field from the minimal polynomial of ρ (ascending integer
    /// coefficients) and an isolating interval.  The interval is verified by a
    /// Sturm count to contain exactly one root, with neither endpoint a root.
    ///
    /// Irreducibility of the polynomial is a caller contract; a rational-root
    /// screen is run for small inputs as a safety net, but no factorization is
    /// attempted.
    pub fn new(min_poly: &[Int], lo: Rat, hi: Rat) -> Result<Arc<FieldContext>, NfError> {
        let mp = normalize_int_poly(min_poly)?;
        let degree = mp.len() - 1;
        if degree == 0 {
            return Err(NfError::InvalidPoly("constant polynomial".into()));
        }
        if lo >= hi {
            return Err(NfError::InvalidInput(format!(
                "empty interval [{lo}, {hi}]"
            )));
        }
        let mpq = poly::from_int(&mp);
        if poly::eval(&mpq, &lo).is_zero() || poly::eval(&mpq, &hi).is_zero() {
            return Err(NfError::InvalidInput(
                "interval endpoint is a root; shrink or shift the interval".into(),
            ));
        }
        let chain = poly::sturm_chain(&mpq);
        let count = poly::count_roots(&chain, &lo, &hi);
        if count != 1 {
            return Err(NfError::BadInterval {
                lo: lo.to_string(),
                hi: hi.to_string(),
                count,
            });
        }
        if degree >= 2 {
            rational_root_screen(&mp)?;
        }
        // reduction row: rho^d = -(a_0 + a_1 rho + ... + a_{d-1} rho^{d-1}) / a_d
        let lead = Rat::from_integer(mp[degree].clone());
        let reduction: Vec<Rat> = (0..degree)
            .map(|i| -Rat::from_integer(mp[i].clone()) / &lead)
            .collect();
        Ok(Arc::new(FieldContext {
            min_poly: mp,
            degree,
            reduction,
            min_poly_rat: mpq,
            initial_interval: (lo.clone(), hi.clone()),
            interval: RwLock::new((lo, hi)),
        }))
    }

    /// Degree-1 convenience: the field Q itself, with ρ = q.
    pub fn rational(q: &Rat) -> Result<Arc<FieldContext>, NfError> {
        let lo = q - Rat::new(Int::one(), Int::from(4));
        let hi = q + Rat::new(Int::one(), Int::from(4));
        FieldContext::new(
            &[-q.numer().clone(), q.denom().clone()],
            lo,
            hi,
        )
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn min_poly(&self) -> &[Int] {
        &self.min_poly
    }

    pub fn interval(&self) -> (Rat, Rat) {
        let g = self.interval.read().unwrap();
        g.clone()
    }

    /// The isolating interval the field was created with, before any
    /// refinement.  Stable across the lifetime of the context, so suitable for
    /// serialization and content hashing.
    pub fn initial_interval(&self) -> &(Rat, Rat) {
        &self.initial_interval
    }

    /// Halve the isolating interval, preserving the invariant that it
    /// isolates ρ with endpoints that are not roots.
    pub fn refine(&self) {
        let mut g = self.interval.write().unwrap();
        let (lo, hi) = g.clone();
        let mid = (&lo + &hi) / Rat::from_integer(Int::from(2));
        let pm = poly::eval(&self.min_poly_rat, &mid);
        if pm.is_zero() {
            // only possible when rho is rational (degree 1): narrow around it
            let w = (&hi - &lo) / Rat::from_integer(Int::from(8));
            *g = (&mid - &w, mid + w);
            return;
        }
        let plo = poly::eval(&self.min_poly_rat, &lo);
        if rat_sign(&plo) * rat_sign(&pm) < 0 {
            *g = (lo, mid);
        } else {
            *g = (mid, hi);
        }
    }

    pub fn zero(self: &Arc<Self>) -> AlgebraicNumber {
        AlgebraicNumber {
            ctx: self.clone(),
            coeffs: vec![Rat::zero(); self.degree],
        }
    }

    pub fn one(self: &Arc<Self>) -> AlgebraicNumber {
        self.from_rat(&Rat::one())
    }

    pub fn from_rat(self: &Arc<Self>, q: &Rat) -> AlgebraicNumber {
        let mut coeffs = vec![Rat::zero(); self.degree];
        coeffs[0] = q.clone();
        AlgebraicNumber {
            ctx: self.clone(),
            coeffs,
        }
    }

    pub fn from_int(self: &Arc<Self>, n: i64) -> AlgebraicNumber {
        self.from_rat(&Rat::from_integer(Int::from(n)))
    }

    /// ρ itself (for degree 1 this is the rational root).
    pub fn rho(self: &Arc<Self>) -> AlgebraicNumber {
        if self.degree == 1 {
            // rho = -a_0 / a_1
            let q = -Rat::new(self.min_poly[0].clone(), self.min_poly[1].clone());
            return self.from_rat(&q);
        }
        let mut coeffs = vec![Rat::zero(); self.degree];
        coeffs[1] = Rat::one();
        AlgebraicNumber {
            ctx: self.clone(),
            coeffs,
        }
    }

    /// Element from a polynomial in ρ of arbitrary degree (reduced modulo the
    /// minimal polynomial).
    pub fn from_poly(self: &Arc<Self>, coeffs: &[Rat]) -> AlgebraicNumber {
        let mut t: Vec<Rat> = coeffs.to_vec();
        if t.len() < self.degree {
            t.resize(self.degree, Rat::zero());
        }
        self.reduce(&mut t);
        t.truncate(self.degree);
        AlgebraicNumber {
            ctx: self.clone(),
            coeffs: t,
        }
    }

    fn reduce(&self, t: &mut Vec<Rat>) {
        let d = self.degree;
        for m in (d..t.len()).rev() {
            let c = std::mem::replace(&mut t[m], Rat::zero());
            if c.is_zero() {
                continue;
            }
            for j in 0..d {
                let add = &c * &self.reduction[j];
                t[m - d + j] = &t[m - d + j] + add;
            }
        }
        t.truncate(d.max(1));
    }
}

fn rational_root_screen(mp: &[Int]) -> Result<(), NfError> {
    let big = Int::from(100_000);
    let a0 = mp[0].abs();
    let ad = mp.last().unwrap().abs();
    if a0.is_zero() {
        return Err(NfError::InvalidPoly(
            "zero constant term: polynomial divisible by x, not irreducible".into(),
        ));
    }
    if a0 > big || ad > big {
        return Ok(()); // screen skipped for large coefficients
    }
    let divisors = |n: &Int| -> Vec<Int> {
        let nn = n.to_i64().unwrap().unsigned_abs();
        let mut out = Vec::new();
        let mut k = 1u64;
        while k * k <= nn {
            if nn % k == 0 {
                out.push(Int::from(k));
                out.push(Int::from(nn / k));
            }
            k += 1;
        }
        out
    };
    let mpq = poly::from_int(mp);
    for p in divisors(&a0) {
        for q in divisors(&ad) {
            for sign in [1i64, -1] {
                let cand = Rat::new(&p * Int::from(sign), q.clone());
                if poly::eval(&mpq, &cand).is_zero() {
                    return Err(NfError::InvalidPoly(format!(
                        "rational root {cand} found: polynomial is reducible"
                    )));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// field elements

/// An element of Q(ρ), stored as dense rational coordinates in the power
/// basis.  Comparisons are exact; ordering follows the real embedding singled
/// out by the field's isolating interval.
#[derive(Clone)]
pub struct AlgebraicNumber {
    ctx: Arc<FieldContext>,
    coeffs: Vec<Rat>,
}

impl AlgebraicNumber {
    pub fn ctx(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    pub fn as_rational(&self) -> Option<Rat> {
        if self.is_rational() {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn assert_same_field(&self, other: &AlgebraicNumber) {
        if !Arc::ptr_eq(&self.ctx, &other.ctx) {
            assert_eq!(
                self.ctx.min_poly, other.ctx.min_poly,
                "mixed arithmetic between different number fields"
            );
        }
    }

    /// Exact sign: −1, 0, or 1.
    pub fn sign(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        if self.is_rational() {
            return rat_sign(&self.coeffs[0]);
        }
        for _ in 0..20_000 {
            let (lo, hi) = self.ctx.interval();
            let (elo, ehi) = poly::eval_interval(&self.coeffs, &lo, &hi);
            if rat_sign(&elo) > 0 {
                return 1;
            }
            if rat_sign(&ehi) < 0 {
                return -1;
            }
            self.ctx.refine();
        }
        // Unreachable for an irreducible minimal polynomial: a nonzero element
        // of degree < d cannot vanish at rho.
        panic!("sign determination did not converge; is the minimal polynomial irreducible?");
    }

    pub fn abs(&self) -> AlgebraicNumber {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Enclose the real value in a rational interval no wider than `width`.
    pub fn enclose(&self, width: &Rat) -> (Rat, Rat) {
        assert!(width > &Rat::zero());
        loop {
            let (lo, hi) = self.ctx.interval();
            let (elo, ehi) = poly::eval_interval(&self.coeffs, &lo, &hi);
            if &ehi - &elo <= *width {
                return (elo, ehi);
            }
            self.ctx.refine();
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_rational() {
            return rat_to_f64(&self.coeffs[0]);
        }
        let width = Rat::new(Int::one(), two_pow(90));
        let (lo, hi) = self.enclose(&width);
        rat_to_f64(&((lo + hi) / Rat::from_integer(Int::from(2))))
    }

    pub fn inverse(&self) -> AlgebraicNumber {
        assert!(!self.is_zero(), "inverse of zero");
        if self.is_rational() {
            return self.ctx.from_rat(&self.coeffs[0].recip());
        }
        // extended Euclid: u * self ≡ gcd (a constant) mod min_poly
        let f = self.ctx.min_poly_rat.clone();
        let mut r0 = f;
        let mut r1 = self.coeffs.clone();
        poly::trim(&mut r1);
        let mut u0 = vec![Rat::zero()];
        let mut u1 = vec![Rat::one()];
        while poly::degree(&r1) > 0 {
            let (q, r) = poly::div_rem(&r0, &r1);
            let qu = poly_mul(&q, &u1);
            let nu = poly_sub(&u0, &qu);
            r0 = r1;
            r1 = r;
            u0 = u1;
            u1 = nu;
            poly::trim(&mut r1);
            if poly::is_zero(&r1) {
                panic!("element shares a factor with the minimal polynomial; field is broken");
            }
        }
        let c = r1[0].clone();
        let inv: Vec<Rat> = u1.iter().map(|x| x / &c).collect();
        self.ctx.from_poly(&inv)
    }

    pub fn scale(&self, q: &Rat) -> AlgebraicNumber {
        AlgebraicNumber {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    pub fn pow(&self, mut n: u64) -> AlgebraicNumber {
        let mut base = self.clone();
        let mut acc = self.ctx.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// Structural key for ordered maps: lexicographic on coordinates.  This is
    /// a deterministic total order but not the real-number order; use `cmp`
    /// (the `Ord` impl) for that.
    pub fn lex_key(&self) -> Vec<Rat> {
        self.coeffs.clone()
    }
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            out[i + j] = &out[i + j] + x * y;
        }
    }
    out
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len().max(b.len());
    let mut out = vec![Rat::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] = x.clone();
    }
    for (i, y) in b.iter().enumerate() {
        out[i] = &out[i] - y;
    }
    out
}

impl fmt::Debug for AlgebraicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AlgebraicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = rat_sign(c) < 0;
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if i == 0 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", power_name(i))?;
            } else {
                write!(f, "{a}*{}", power_name(i))?;
            }
        }
        Ok(())
    }
}

fn power_name(i: usize) -> String {
    if i == 1 {
        "rho".into()
    } else {
        format!("rho^{i}")
    }
}

impl PartialEq for AlgebraicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.assert_same_field(other);
        self.coeffs == other.coeffs
    }
}

impl Eq for AlgebraicNumber {}

impl PartialOrd for AlgebraicNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AlgebraicNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        self.assert_same_field(other);
        if self.coeffs == other.coeffs {
            return Ordering::Equal;
        }
        match (self - other).sign() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $imp:expr) => {
        impl std::ops::$trait<&AlgebraicNumber> for &AlgebraicNumber {
            type Output = AlgebraicNumber;
            fn $method(self, rhs: &AlgebraicNumber) -> AlgebraicNumber {
                let f: fn(&AlgebraicNumber, &AlgebraicNumber) -> AlgebraicNumber = $imp;
                f(self, rhs)
            }
        }
        impl std::ops::$trait<AlgebraicNumber> for AlgebraicNumber {
            type Output = AlgebraicNumber;
            fn $method(self, rhs: AlgebraicNumber) -> AlgebraicNumber {
                std::ops::$trait::$method(&self, &rhs)
            }
        }
        impl std::ops::$trait<&AlgebraicNumber> for AlgebraicNumber {
            type Output = AlgebraicNumber;
            fn $method(self, rhs: &AlgebraicNumber) -> AlgebraicNumber {
                std::ops::$trait::$method(&self, rhs)
            }
        }
        impl std::ops::$trait<AlgebraicNumber> for &AlgebraicNumber {
            type Output = AlgebraicNumber;
            fn $method(self, rhs: AlgebraicNumber) -> AlgebraicNumber {
                std::ops::$trait::$method(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| {
    a.assert_same_field(b);
    AlgebraicNumber {
        ctx: a.ctx.clone(),
        coeffs: a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| x + y)
            .collect(),
    }
});

forward_binop!(Sub, sub, |a, b| {
    a.assert_same_field(b);
    AlgebraicNumber {
        ctx: a.ctx.clone(),
        coeffs: a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| x - y)
            .collect(),
    }
});

forward_binop!(Mul, mul, |a, b| {
    a.assert_same_field(b);
    let mut t = poly_mul(&a.coeffs, &b.coeffs);
    a.ctx.reduce(&mut t);
    t.resize(a.ctx.degree, Rat::zero());
    AlgebraicNumber {
        ctx: a.ctx.clone(),
        coeffs: t,
    }
});

forward_binop!(Div, div, |a, b| { a * &b.inverse() });

impl std::ops::Neg for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn neg(self) -> AlgebraicNumber {
        AlgebraicNumber {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

impl std::ops::Neg for AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn neg(self) -> AlgebraicNumber {
        -&self
    }
}

// ---------------------------------------------------------------------------
// validated root enclosures

/// A closed complex disk certified (together with its siblings) to cover the
/// roots of a polynomial: each connected component of the union contains
/// exactly as many roots, with multiplicity, as it has disks.
#[derive(Debug, Clone)]
pub struct RootDisk {
    pub center: Complex<Rat>,
    pub radius: Rat,
}

impl RootDisk {
    /// Exact test: modulus of every point of the disk < bound.
    fn modulus_below(&self, bound: &Rat) -> bool {
        if bound <= &self.radius {
            return false;
        }
        let t = bound - &self.radius;
        self.center.norm_sqr() < &t * &t
    }

    /// Exact test: modulus of every point of the disk ≥ bound.
    fn modulus_at_least(&self, bound: &Rat) -> bool {
        let t = bound + &self.radius;
        self.center.norm_sqr() >= &t * &t
    }

    /// Exact test: the disk cannot intersect the real segment [a, b].
    fn misses_segment(&self, a: &Rat, b: &Rat) -> bool {
        let x = &self.center.re;
        let dx = if x < a {
            a - x
        } else if x > b {
            x - b
        } else {
            Rat::zero()
        };
        let d2 = &dx * &dx + &self.center.im * &self.center.im;
        d2 > &self.radius * &self.radius
    }
}

#[derive(Debug)]
pub struct RootEnclosure {
    pub disks: Vec<RootDisk>,
    /// Indices of disks grouped into connected components of the union.
    pub components: Vec<Vec<usize>>,
}

fn aberth_f64(p: &[f64]) -> Vec<Complex<f64>> {
    let n = p.len() - 1;
    if n == 1 {
        return vec![Complex::new(-p[0] / p[1], 0.0)];
    }
    let dp: Vec<f64> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect();
    let evalc = |q: &[f64], z: Complex<f64>| -> Complex<f64> {
        let mut acc = Complex::new(0.0, 0.0);
        for c in q.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let r0 = (p[0].abs() / p[n].abs()).powf(1.0 / n as f64).max(0.25);
    let mut zs: Vec<Complex<f64>> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.42;
            Complex::new(r0 * th.cos(), r0 * th.sin())
        })
        .collect();
    for _ in 0..400 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let zi = zs[i];
            let pv = evalc(p, zi);
            let dv = evalc(&dp, zi);
            let ratio = if dv.norm_sqr() < 1e-300 {
                Complex::new(1e-8, 1e-8)
            } else {
                pv / dv
            };
            let mut s = Complex::new(0.0, 0.0);
            for (j, zj) in zs.iter().enumerate() {
                if j != i {
                    let d = zi - zj;
                    if d.norm_sqr() > 1e-300 {
                        s += d.inv();
                    }
                }
            }
            let denom = Complex::new(1.0, 0.0) - ratio * s;
            let w = if denom.norm_sqr() < 1e-300 {
                ratio
            } else {
                ratio / denom
            };
            zs[i] = zi - w;
            moved = moved.max(w.norm() / (1.0 + zs[i].norm()));
        }
        if moved < 1e-14 {
            break;
        }
    }
    zs
}

fn cnorm_upper(z: &Complex<Rat>) -> Rat {
    z.re.abs() + z.im.abs()
}

fn cnorm_lower(z: &Complex<Rat>) -> Rat {
    let a = z.re.abs();
    let b = z.im.abs();
    if a > b {
        a
    } else {
        b
    }
}

/// Validated enclosure of all complex roots of an integer polynomial.
/// Approximations come from a floating-point Aberth iteration, refined by
/// exact Newton steps rounded to `bits`-bit dyadics; the certification uses
/// exact rational arithmetic throughout, so the disks are sound even when the
/// floating-point stage is inaccurate (they merely come out large).
pub fn enclose_roots(p_int: &[Int], bits: i64) -> Result<RootEnclosure, NfError> {
    let p = normalize_int_poly(p_int)?;
    let n = p.len() - 1;
    if n == 0 {
        return Ok(RootEnclosure {
            disks: vec![],
            components: vec![],
        });
    }
    let pq = poly::from_int(&p);
    let dq = poly::derivative(&pq);
    if n == 1 {
        let root = -Rat::new(p[0].clone(), p[1].clone());
        return Ok(RootEnclosure {
            disks: vec![RootDisk {
                center: Complex::new(root, Rat::zero()),
                radius: Rat::zero(),
            }],
            components: vec![vec![0]],
        });
    }

    let pf: Vec<f64> = pq.iter().map(rat_to_f64).collect();
    if pf.iter().any(|c| !c.is_finite()) {
        return Err(NfError::RootEnclosure(
            "coefficients overflow f64 seeding".into(),
        ));
    }
    let seeds = aberth_f64(&pf);
    let mut zs: Vec<Complex<Rat>> = Vec::with_capacity(n);
    for z in seeds {
        let (re, im) = (rat_from_f64(z.re), rat_from_f64(z.im));
        match (re, im) {
            (Some(re), Some(im)) => zs.push(Complex::new(re, im)),
            _ => {
                return Err(NfError::RootEnclosure(
                    "floating-point root seeding produced non-finite values".into(),
                ))
            }
        }
    }

    // exact Newton polish, rounded to dyadics each step
    let tol = Rat::new(Int::one(), two_pow((2 * bits).max(2) as u64));
    for z in zs.iter_mut() {
        for _ in 0..80 {
            let pv = poly::eval_c(&pq, z);
            if pv.re.is_zero() && pv.im.is_zero() {
                break;
            }
            let dv = poly::eval_c(&dq, z);
            let dn = dv.norm_sqr();
            if dn.is_zero() {
                break;
            }
            let step = pv * dv.conj() / Complex::new(dn.clone(), Rat::zero());
            let stepn = step.norm_sqr();
            let new = round_dyadic_c(&(z.clone() - step), bits + 8);
            *z = new;
            let zn = z.norm_sqr() + Rat::one();
            if stepn < &tol * &zn {
                break;
            }
        }
    }

    // separate exactly coincident approximations so the product below is nonzero
    for i in 0..zs.len() {
        for j in 0..i {
            if zs[i] == zs[j] {
                let eps = Rat::new(Int::one(), two_pow(bits.max(2) as u64));
                zs[i].re = &zs[i].re + &eps;
            }
        }
    }

    // Smith-style disk radii with outward rational bounds:
    //   r_i = n |p(z_i)| / (|lead| prod_{j≠i} |z_i − z_j|)
    // modulus upper bound |re|+|im| on the numerator, lower bound
    // max(|re|,|im|) on each factor of the denominator.
    let lead = Rat::from_integer(p[n].clone()).abs();
    let mut disks = Vec::with_capacity(n);
    for (i, zi) in zs.iter().enumerate() {
        let num = cnorm_upper(&poly::eval_c(&pq, zi)) * Rat::from_integer(Int::from(n as u64));
        let mut den = lead.clone();
        for (j, zj) in zs.iter().enumerate() {
            if i != j {
                let f = cnorm_lower(&(zi.clone() - zj.clone()));
                if f.is_zero() {
                    return Err(NfError::RootEnclosure(
                        "coincident root approximations".into(),
                    ));
                }
                den = den * f;
            }
        }
        disks.push(RootDisk {
            center: zi.clone(),
            radius: num / den,
        });
    }

    // connected components of the disk union (exact overlap test)
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in 0..i {
            let d = disks[i].center.clone() - disks[j].center.clone();
            let rr = &disks[i].radius + &disks[j].radius;
            if d.norm_sqr() <= &rr * &rr {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut comp_map: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        comp_map.entry(r).or_default().push(i);
    }
    Ok(RootEnclosure {
        disks,
        components: comp_map.into_values().collect(),
    })
}

// ---------------------------------------------------------------------------
// Pisot certification

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PisotStatus {
    /// Exactly one real root exceeds 1 and every other root is certified to
    /// have modulus below 1 − margin.
    Pisot,
    NotPisot,
    /// Certification did not succeed within the working-precision budget.
    Undecided,
}

#[derive(Debug, Clone)]
pub struct PisotOutcome {
    pub status: PisotStatus,
    /// Isolating interval of the dominant real root when one exists.
    pub dominant: Option<(Rat, Rat)>,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct PisotConfig {
    /// Conjugates must have modulus below 1 − margin.
    pub margin: Rat,
    /// Cap on the dyadic working precision of root refinement.
    pub max_bits: i64,
}

impl Default for PisotConfig {
    fn default() -> Self {
        PisotConfig {
            margin: Rat::new(Int::one(), Int::from(10u64).pow(12)),
            max_bits: 256,
        }
    }
}

/// Decide whether the given integer polynomial is the minimal polynomial of a
/// Pisot number, operationally: monic up to sign, exactly one real root
/// greater than 1, and all other roots of modulus < 1 − margin.  The real-root
/// count is exact (Sturm); the modulus conditions are certified through
/// validated disks, escalating precision up to the configured cap and
/// reporting `Undecided` if still unresolved — never an unsound yes/no.
pub fn is_pisot(poly_int: &[Int], cfg: &PisotConfig) -> Result<PisotOutcome, NfError> {
    let p = normalize_int_poly(poly_int)?;
    if p.len() == 1 {
        return Err(NfError::InvalidPoly("constant polynomial has no roots".into()));
    }
    let pq_full = poly::from_int(&p);
    let pq = poly::squarefree_part(&pq_full);
    let reduced = poly::degree(&pq) < poly::degree(&pq_full);
    let deg = poly::degree(&pq);

    if !p.last().unwrap().abs().is_one() {
        return Ok(PisotOutcome {
            status: PisotStatus::NotPisot,
            dominant: None,
            note: format!(
                "leading coefficient {} is not ±1, so the roots are not algebraic integers",
                p.last().unwrap()
            ),
        });
    }
    let one = Rat::one();
    if poly::eval(&pq, &one).is_zero() || poly::eval(&pq, &-one.clone()).is_zero() {
        return Ok(PisotOutcome {
            status: PisotStatus::NotPisot,
            dominant: None,
            note: "has a root at ±1".into(),
        });
    }

    let chain = poly::sturm_chain(&pq);
    let bound = poly::cauchy_bound(&pq);
    let over_one = poly::count_roots(&chain, &one, &bound);
    if over_one != 1 {
        return Ok(PisotOutcome {
            status: PisotStatus::NotPisot,
            dominant: None,
            note: format!("{over_one} real roots exceed 1 (need exactly one)"),
        });
    }

    // isolate the dominant root by maintaining a unit Sturm count
    let mut dlo = one.clone();
    let mut dhi = bound.clone();
    let half = Rat::new(Int::one(), Int::from(2));
    for _ in 0..80 {
        let mid = (&dlo + &dhi) * &half;
        if poly::eval(&pq, &mid).is_zero() {
            // rational dominant root; nudge the bracket off it
            let w = (&dhi - &dlo) / Rat::from_integer(Int::from(16));
            dlo = &mid - &w;
            dhi = &mid + &w;
            break;
        }
        if poly::count_roots(&chain, &dlo, &mid) == 1 {
            dhi = mid;
        } else {
            dlo = mid;
        }
    }

    if deg == 1 {
        return Ok(PisotOutcome {
            status: PisotStatus::Pisot,
            dominant: Some((dlo, dhi)),
            note: if reduced {
                "degree 1 after squarefree reduction".into()
            } else {
                "degree 1".into()
            },
        });
    }

    let small = &one - &cfg.margin;
    let p_sf: Vec<Int> = {
        // clear denominators of the squarefree part
        let mut den = Int::one();
        for c in &pq {
            den = den.lcm(c.denom());
        }
        pq.iter()
            .map(|c| (c * Rat::from_integer(den.clone())).to_integer())
            .collect()
    };

    let mut last_note;
    let mut bits = 60i64;
    loop {
        let enc = enclose_roots(&p_sf, bits)?;
        // components that could contain the dominant root
        let might_hold_dominant: Vec<usize> = enc
            .components
            .iter()
            .enumerate()
            .filter(|(_, comp)| {
                comp.iter()
                    .any(|&i| !enc.disks[i].misses_segment(&dlo, &dhi))
            })
            .map(|(ci, _)| ci)
            .collect();
        let mut ok = true;
        let mut note = String::new();
        if might_hold_dominant.len() != 1
            || enc.components[might_hold_dominant[0]].len() != 1
        {
            ok = false;
            note = "dominant root not separated from the other roots".into();
        } else {
            let dom_comp = might_hold_dominant[0];
            for (ci, comp) in enc.components.iter().enumerate() {
                if ci == dom_comp {
                    continue;
                }
                let all_small = comp.iter().all(|&i| enc.disks[i].modulus_below(&small));
                if all_small {
                    continue;
                }
                let all_big = comp.iter().all(|&i| enc.disks[i].modulus_at_least(&small));
                if all_big {
                    let z = &enc.disks[comp[0]].center;
                    return Ok(PisotOutcome {
                        status: PisotStatus::NotPisot,
                        dominant: Some((dlo, dhi)),
                        note: format!(
                            "a conjugate near {:.6}{:+.6}i has modulus at least 1 - margin",
                            rat_to_f64(&z.re),
                            rat_to_f64(&z.im)
                        ),
                    });
                }
                ok = false;
                note = "conjugate moduli straddle the 1 - margin threshold".into();
                break;
            }
        }
        if ok {
            return Ok(PisotOutcome {
                status: PisotStatus::Pisot,
                dominant: Some((dlo, dhi)),
                note: if reduced {
                    "certified after squarefree reduction".into()
                } else {
                    "certified".into()
                },
            });
        }
        last_note = note;
        if bits >= cfg.max_bits {
            break;
        }
        bits = (bits * 2).min(cfg.max_bits);
    }
    Ok(PisotOutcome {
        status: PisotStatus::Undecided,
        dominant: Some((dlo, dhi)),
        note: format!(
            "undecided at {} working bits: {}",
            cfg.max_bits, last_note
        ),
    })
}

// ---------------------------------------------------------------------------
// separation bound

/// A certified positive lower bound on the distance between distinct values of
/// polynomials `Σ a_i β^i` whose coefficients range over the finite set `s`
/// (β = 1/ρ).  Applicable when β is a Pisot number; returns an error
/// otherwise.  The bound is a product over the nontrivial embeddings σ of the
/// field: geometric series in |σ(β)| < 1 weighted by the largest conjugate
/// difference of coefficients, with a denominator-clearing factor when the
/// coefficients are not algebraic integers.
pub fn separation_bound(
    ctx: &Arc<FieldContext>,
    s: &[AlgebraicNumber],
) -> Result<Rat, NfError> {
    if s.len() < 2 {
        return Err(NfError::InvalidInput(
            "separation bound needs at least two coefficient values".into(),
        ));
    }
    // minimal polynomial of beta = 1/rho: reversed coefficient list
    let mp = ctx.min_poly();
    let beta_poly: Vec<Int> = mp.iter().rev().cloned().collect();
    let outcome = is_pisot(&beta_poly, &PisotConfig::default())?;
    if outcome.status != PisotStatus::Pisot {
        return Err(NfError::SeparationNotApplicable(format!(
            "1/rho is not certified Pisot ({:?}: {})",
            outcome.status, outcome.note
        )));
    }

    let deg = ctx.degree();
    let mut dlcm = Int::one();
    for a in s {
        for c in a.coeffs() {
            dlcm = dlcm.lcm(c.denom());
        }
    }
    let dpow = Rat::from_integer(num_traits::pow(dlcm, deg as usize));

    if deg == 1 {
        return Ok(dpow.recip());
    }

    // pairwise differences, as coordinate polynomials
    let mut diffs: Vec<Vec<Rat>> = Vec::new();
    for i in 0..s.len() {
        for j in 0..i {
            let d = &s[i] - &s[j];
            if !d.is_zero() {
                diffs.push(d.coeffs().to_vec());
            }
        }
    }
    if diffs.is_empty() {
        return Err(NfError::InvalidInput(
            "all coefficient values are equal".into(),
        ));
    }

    let (rlo, rhi) = ctx.interval();
    let mut bits = 60i64;
    'outer: loop {
        let enc = enclose_roots(ctx.min_poly(), bits)?;
        let escalate = |bits: &mut i64| -> bool {
            if *bits >= 1024 {
                return false;
            }
            *bits *= 2;
            true
        };
        if enc.components.iter().any(|c| c.len() != 1) {
            if escalate(&mut bits) {
                continue;
            }
            return Err(NfError::RootEnclosure(
                "conjugates of rho could not be separated".into(),
            ));
        }
        // identify rho's own disk; refine the field interval if ambiguous
        let mut own: Vec<usize> = (0..enc.disks.len())
            .filter(|&i| !enc.disks[i].misses_segment(&rlo, &rhi))
            .collect();
        for _ in 0..200 {
            if own.len() <= 1 {
                break;
            }
            ctx.refine();
            let (a, b) = ctx.interval();
            own = (0..enc.disks.len())
                .filter(|&i| !enc.disks[i].misses_segment(&a, &b))
                .collect();
        }
        if own.len() != 1 {
            if escalate(&mut bits) {
                continue;
            }
            return Err(NfError::RootEnclosure(
                "could not match rho to one of its conjugate disks".into(),
            ));
        }

        let mut product = dpow.recip();
        for (i, disk) in enc.disks.iter().enumerate() {
            if i == own[0] {
                continue;
            }
            // |sigma(beta)| = 1/|sigma(rho)| < 1: need a rational s with
            // 1 < s ≤ |center| − radius, giving t = 1/s ≥ |sigma(beta)|
            let normsq = disk.center.norm_sqr();
            let approx = rat_to_f64(&normsq).sqrt() - rat_to_f64(&disk.radius);
            let mut s_lo = match rat_from_f64(approx * (1.0 - 1e-12)) {
                Some(v) => v,
                None => Rat::zero(),
            };
            let mut tries = 0;
            while tries < 60 {
                let t = &s_lo + &disk.radius;
                if s_lo > Rat::one() && &t * &t <= normsq {
                    break;
                }
                s_lo = &s_lo * Rat::new(Int::from(99_999), Int::from(100_000));
                tries += 1;
                if s_lo <= Rat::one() {
                    break;
                }
            }
            let t_ok = {
                let t = &s_lo + &disk.radius;
                s_lo > Rat::one() && &t * &t <= normsq
            };
            if !t_ok {
                if escalate(&mut bits) {
                    continue 'outer;
                }
                return Err(NfError::RootEnclosure(
                    "could not certify |sigma(beta)| < 1; is 1/rho really Pisot?".into(),
                ));
            }
            let t_sigma = s_lo.recip(); // ≥ |sigma(beta)|, < 1

            // c_sigma: largest |sigma(a−b)| over coefficient differences,
            // bounded by rectangular interval evaluation over the disk
            let rect_re = (&disk.center.re - &disk.radius, &disk.center.re + &disk.radius);
            let rect_im = (&disk.center.im - &disk.radius, &disk.center.im + &disk.radius);
            let mut c_sigma = Rat::zero();
            for d in &diffs {
                let ub = complex_rect_eval_modulus_ub(d, &rect_re, &rect_im);
                if ub > c_sigma {
                    c_sigma = ub;
                }
            }
            if c_sigma.is_zero() {
                return Err(NfError::InvalidInput(
                    "degenerate coefficient set".into(),
                ));
            }
            product = product * (Rat::one() - t_sigma) / c_sigma;
        }
        return Ok(product);
    }
}

/// Upper bound on |p(z)| for z in the axis-aligned rectangle re × im, via
/// interval Horner in rectangular complex intervals and the |re|+|im| bound.
fn complex_rect_eval_modulus_ub(
    p: &[Rat],
    re: &(Rat, Rat),
    im: &(Rat, Rat),
) -> Rat {
    let mut acc_re = (Rat::zero(), Rat::zero());
    let mut acc_im = (Rat::zero(), Rat::zero());
    let mul_iv = |a: &(Rat, Rat), b: &(Rat, Rat)| -> (Rat, Rat) {
        let cands = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for v in &cands[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        (lo, hi)
    };
    let add_iv = |a: &(Rat, Rat), b: &(Rat, Rat)| (&a.0 + &b.0, &a.1 + &b.1);
    let sub_iv = |a: &(Rat, Rat), b: &(Rat, Rat)| (&a.0 - &b.1, &a.1 - &b.0);
    for c in p.iter().rev() {
        // (acc_re + i acc_im)(re + i im) + c
        let rr = mul_iv(&acc_re, re);
        let ii = mul_iv(&acc_im, im);
        let ri = mul_iv(&acc_re, im);
        let ir = mul_iv(&acc_im, re);
        let new_re = sub_iv(&rr, &ii);
        let new_im = add_iv(&ri, &ir);
        acc_re = (&new_re.0 + c, &new_re.1 + c);
        acc_im = new_im;
    }
    let mre = acc_re.0.abs().max(acc_re.1.abs());
    let mim = acc_im.0.abs().max(acc_im.1.abs());
    mre + mim
}

// ---------------------------------------------------------------------------
