//! Exact rational rectangular matrices (the transition matrices of the
//! diagram), their path products and norms, and certified spectral-radius
//! brackets for nonnegative square matrices.
//!
//! Spectral radii are never reported as point estimates.  For a nonnegative
//! matrix `A` the Gelfand-style sandwich
//!
//! ```text
//! max_i (A^n)_{ii}^{1/n}  ≤  sp(A)  ≤  ‖A^n‖^{1/n}      (‖·‖ = entry sum)
//! ```
//!
//! tightens as `n → ∞`; repeated squaring reaches astronomically large `n`
//! in a few dozen steps.  Exact rational powers double in digit size at each
//! squaring, so the iteration instead carries integer lower/upper bound
//! matrices under a shared power-of-two exponent, rounded outward to a fixed
//! mantissa width — entrywise monotonicity of nonnegative products keeps the
//! bounds valid, and the shared exponent keeps magnitudes manageable at any
//! depth.

use crate::numberfield::{rat_from_f64, rat_to_f64, Int, Rat};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("dimension mismatch: ({0}×{1}) · ({2}×{3})")]
    DimMismatch(usize, usize, usize, usize),
    #[error("matrix must be square, got {0}×{1}")]
    NotSquare(usize, usize),
    #[error("empty index subset")]
    EmptySubset,
    #[error("index {0} out of range for size {1}")]
    IndexRange(usize, usize),
    #[error("invalid matrix: {0}")]
    Invalid(String),
}

/// A rectangular matrix with nonnegative rational entries, stored row-major.
/// `scale` is a display multiplier: entries are always the true values, and
/// reports may show `scale * entry` to match integer-style presentations.
#[derive(Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rat>,
    scale: Rat,
}

impl fmt::Debug for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TransitionMatrix {}×{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl TransitionMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rat>) -> Result<Self, SpectraError> {
        if rows == 0 || cols == 0 {
            return Err(SpectraError::Invalid("zero dimension".into()));
        }
        if entries.len() != rows * cols {
            return Err(SpectraError::Invalid(format!(
                "{} entries for a {rows}×{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|e| e.is_negative()) {
            return Err(SpectraError::Invalid("negative entry".into()));
        }
        Ok(TransitionMatrix {
            rows,
            cols,
            entries,
            scale: Rat::one(),
        })
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self, SpectraError> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) {
            return Err(SpectraError::Invalid("ragged rows".into()));
        }
        TransitionMatrix::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        TransitionMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rat::from_integer(Int::from(v))).collect())
                .collect(),
        )
        .expect("static matrix literal")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        TransitionMatrix {
            rows,
            cols,
            entries: vec![Rat::zero(); rows * cols],
            scale: Rat::one(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = TransitionMatrix::zeros(n, n);
        for i in 0..n {
            *m.get_mut(i, i) = Rat::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Rat {
        &mut self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    pub fn scale(&self) -> &Rat {
        &self.scale
    }

    pub fn with_scale(mut self, scale: Rat) -> Self {
        self.scale = scale;
        self
    }

    /// Entries multiplied by the display scale.
    pub fn scaled_entries(&self) -> Vec<Rat> {
        self.entries.iter().map(|e| e * &self.scale).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, rhs: &TransitionMatrix) -> Result<TransitionMatrix, SpectraError> {
        if self.cols != rhs.rows {
            return Err(SpectraError::DimMismatch(
                self.rows, self.cols, rhs.rows, rhs.cols,
            ));
        }
        let mut out = TransitionMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let t = a * b;
                    *out.get_mut(i, j) = &*out.get(i, j) + t;
                }
            }
        }
        out.scale = &self.scale * &rhs.scale;
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn apply_left(&self, v: &[Rat]) -> Result<Vec<Rat>, SpectraError> {
        if v.len() != self.rows {
            return Err(SpectraError::DimMismatch(1, v.len(), self.rows, self.cols));
        }
        let mut out = vec![Rat::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                let b = self.get(i, j);
                if !b.is_zero() {
                    out[j] = &out[j] + vi * b;
                }
            }
        }
        Ok(out)
    }

    /// Entry sum, the matrix norm used throughout.
    pub fn sum_norm(&self) -> Rat {
        let mut s = Rat::zero();
        for e in &self.entries {
            s += e;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j] = &out[j] + self.get(i, j);
            }
        }
        out
    }

    /// Minimum column sum (the ‖·‖_min norm).
    pub fn min_col_sum(&self) -> Rat {
        self.col_sums().into_iter().min().unwrap()
    }

    pub fn max_col_sum(&self) -> Rat {
        self.col_sums().into_iter().max().unwrap()
    }

    /// Minimum over columns in `j_set` of the column sum restricted to rows
    /// in `j_set` — the subset-restricted column norm.  Requires a square
    /// matrix so the subset labels rows and columns consistently, which is
    /// what makes the quantity supermultiplicative along path products.
    pub fn min_col_sum_on(&self, j_set: &[usize]) -> Result<Rat, SpectraError> {
        if j_set.is_empty() {
            return Err(SpectraError::EmptySubset);
        }
        if !self.is_square() {
            return Err(SpectraError::NotSquare(self.rows, self.cols));
        }
        for &j in j_set {
            if j >= self.cols {
                return Err(SpectraError::IndexRange(j, self.cols));
            }
        }
        let mut best: Option<Rat> = None;
        for &j in j_set {
            let mut s = Rat::zero();
            for &i in j_set {
                s += self.get(i, j);
            }
            if best.as_ref().map(|b| &s < b).unwrap_or(true) {
                best = Some(s);
            }
        }
        Ok(best.unwrap())
    }

    pub fn every_column_nonzero(&self) -> bool {
        (0..self.cols).all(|j| (0..self.rows).any(|i| !self.get(i, j).is_zero()))
    }

    pub fn every_row_nonzero(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).any(|j| !self.get(i, j).is_zero()))
    }

    /// Boolean support pattern packed into a u64 (row-major); only available
    /// for matrices up to 8×8, which covers every neighbour set that occurs.
    pub fn support_bits(&self) -> Option<u64> {
        if self.rows > 8 || self.cols > 8 {
            return None;
        }
        let mut bits = 0u64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self.get(i, j).is_zero() {
                    bits |= 1 << (i * 8 + j);
                }
            }
        }
        Some(bits)
    }

    pub fn transpose(&self) -> TransitionMatrix {
        let mut out = TransitionMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.get_mut(j, i) = self.get(i, j).clone();
            }
        }
        out.scale = self.scale.clone();
        out
    }
}

/// Exact product along an ordered path of matrices.
pub fn path_product(ms: &[&TransitionMatrix]) -> Result<TransitionMatrix, SpectraError> {
    let mut iter = ms.iter();
    let first = match iter.next() {
        Some(m) => (*m).clone(),
        None => return Err(SpectraError::Invalid("empty path".into())),
    };
    let mut acc = first;
    for m in iter {
        acc = acc.mul(m)?;
    }
    Ok(acc)
}

/// `m` raised to the `e`-th power (square matrices, `e ≥ 1`).
pub fn matrix_power(m: &TransitionMatrix, e: u32) -> Result<TransitionMatrix, SpectraError> {
    if !m.is_square() {
        return Err(SpectraError::NotSquare(m.rows, m.cols));
    }
    if e == 0 {
        return Err(SpectraError::Invalid("zero exponent".into()));
    }
    let mut acc = m.clone();
    for _ in 1..e {
        acc = acc.mul(m)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// spectral radius

/// Rational bracket lo ≤ sp ≤ hi.
#[derive(Debug, Clone)]
pub struct SpectralBracket {
    pub lo: Rat,
    pub hi: Rat,
    pub iterations: u32,
    pub converged: bool,
}

impl SpectralBracket {
    pub fn exact(v: Rat) -> Self {
        SpectralBracket {
            lo: v.clone(),
            hi: v,
            iterations: 0,
            converged: true,
        }
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn mid_f64(&self) -> f64 {
        (rat_to_f64(&self.lo) + rat_to_f64(&self.hi)) / 2.0
    }
}

/// Integer bound matrices under a shared power-of-two exponent:
/// true value of entry (i,j) lies in [lo_ij, hi_ij] · 2^exp.
struct DyadicBounds {
    n: usize,
    lo: Vec<Int>,
    hi: Vec<Int>,
    exp: i64,
}

const MANTISSA_BITS: u64 = 128;

impl DyadicBounds {
    fn from_matrix(m: &TransitionMatrix) -> Self {
        let n = m.rows();
        // pick exp so the largest entry needs about MANTISSA_BITS bits
        let mut max_mag = i64::MIN;
        for e in m.entries() {
            if !e.is_zero() {
                let mag = e.numer().bits() as i64 - e.denom().bits() as i64;
                max_mag = max_mag.max(mag);
            }
        }
        if max_mag == i64::MIN {
            max_mag = 0;
        }
        let exp = max_mag - MANTISSA_BITS as i64;
        let mut lo = Vec::with_capacity(n * n);
        let mut hi = Vec::with_capacity(n * n);
        for e in m.entries() {
            // e * 2^-exp, floor and ceil
            let (num, den) = if exp >= 0 {
                (e.numer().clone(), e.denom() << exp as u64)
            } else {
                (e.numer() << (-exp) as u64, e.denom().clone())
            };
            use num_integer::Integer;
            let (q, r) = num.div_rem(&den);
            lo.push(q.clone());
            hi.push(if r.is_zero() { q } else { q + 1 });
        }
        DyadicBounds { n, lo, hi, exp }
    }

    fn square(&mut self) {
        let n = self.n;
        let mul = |a: &[Int], round_up: bool, shift: &mut i64| -> Vec<Int> {
            let mut out = vec![Int::zero(); n * n];
            for i in 0..n {
                for k in 0..n {
                    let aik = &a[i * n + k];
                    if aik.is_zero() {
                        continue;
                    }
                    for j in 0..n {
                        let b = &a[k * n + j];
                        if !b.is_zero() {
                            out[i * n + j] += aik * b;
                        }
                    }
                }
            }
            // renormalize to MANTISSA_BITS, rounding in the sound direction
            let max_bits = out.iter().map(|v| v.bits()).max().unwrap_or(0);
            if max_bits > MANTISSA_BITS {
                let s = max_bits - MANTISSA_BITS;
                for v in out.iter_mut() {
                    if round_up {
                        let mask = (Int::one() << s) - 1;
                        let add = if (&*v & &mask).is_zero() { 0 } else { 1 };
                        *v = (&*v >> s) + add;
                    } else {
                        *v = &*v >> s;
                    }
                }
                *shift += s as i64;
            }
            out
        };
        let mut shift_lo = 0;
        let mut shift_hi = 0;
        let new_lo = mul(&self.lo, false, &mut shift_lo);
        let new_hi = mul(&self.hi, true, &mut shift_hi);
        // keep a single shared exponent: align the smaller-shift side upward
        let base = 2 * self.exp;
        let common = shift_lo.max(shift_hi);
        let align = |v: Vec<Int>, extra: u64, round_up: bool| -> Vec<Int> {
            if extra == 0 {
                return v;
            }
            v.into_iter()
                .map(|x| {
                    if round_up {
                        let mask = (Int::one() << extra) - 1;
                        let add = if (&x & &mask).is_zero() { 0 } else { 1 };
                        (x >> extra) + add
                    } else {
                        x >> extra
                    }
                })
                .collect()
        };
        self.lo = align(new_lo, (common - shift_lo) as u64, false);
        self.hi = align(new_hi, (common - shift_hi) as u64, true);
        self.exp = base + common;
    }

    fn max_diag_lo(&self) -> Int {
        let mut best = Int::zero();
        for i in 0..self.n {
            if self.lo[i * self.n + i] > best {
                best = self.lo[i * self.n + i].clone();
            }
        }
        best
    }

    fn total_hi(&self) -> Int {
        let mut s = Int::zero();
        for v in &self.hi {
            s += v;
        }
        s
    }
}

pub(crate) fn log2_bigint(x: &Int) -> f64 {
    debug_assert!(x.is_positive());
    let b = x.bits();
    if b <= 53 {
        return x.to_f64().unwrap().log2();
    }
    let top = (x >> (b - 53)).to_f64().unwrap();
    top.log2() + (b - 53) as f64
}

/// Base-2 logarithm of a positive rational, accurate to f64 precision even
/// when the numerator or denominator far exceeds the f64 range.
pub(crate) fn log2_rat(r: &Rat) -> f64 {
    debug_assert!(r.is_positive());
    log2_bigint(r.numer()) - log2_bigint(r.denom())
}

/// Certified bracket for the spectral radius of a nonnegative square matrix.
///
/// 1×1 matrices are exact.  Otherwise the repeated-squaring sandwich runs
/// until the bracket width drops below `tol` — treated as relative for values
/// below one so long products of sub-stochastic matrices keep full log-scale
/// accuracy, and absolute above one — or the iteration cap is hit; in the
/// latter case the bracket is still valid but `converged` is false.
/// Endpoint rationals include an outward safety factor of 2^-40 on top of the
/// f64 root extraction, which dwarfs its ~1e-16 relative rounding error.
pub fn spectral_radius(m: &TransitionMatrix, tol: &Rat) -> Result<SpectralBracket, SpectraError> {
    if !m.is_square() {
        return Err(SpectraError::NotSquare(m.rows, m.cols));
    }
    if m.rows == 1 {
        return Ok(SpectralBracket::exact(m.get(0, 0).clone()));
    }
    let mut b = DyadicBounds::from_matrix(m);
    let mut best_lo = 0f64; // log2 of sp lower bound
    let mut best_hi = f64::INFINITY;
    let mut have_lo = false;
    let tol_f = rat_to_f64(tol);
    let max_iter = 48u32;
    let mut iterations = 0;
    let mut converged = false;
    for t in 1..=max_iter {
        b.square();
        iterations = t;
        let n_pow = 2f64.powi(t as i32);
        let diag = b.max_diag_lo();
        if diag.is_positive() {
            let l = (log2_bigint(&diag) + b.exp as f64) / n_pow;
            if !have_lo || l > best_lo {
                best_lo = l;
                have_lo = true;
            }
        }
        let total = b.total_hi();
        if total.is_zero() {
            // nilpotent: spectral radius is exactly 0
            return Ok(SpectralBracket {
                lo: Rat::zero(),
                hi: Rat::zero(),
                iterations,
                converged: true,
            });
        }
        let h = (log2_bigint(&total) + b.exp as f64) / n_pow;
        if h < best_hi {
            best_hi = h;
        }
        if have_lo {
            let lo_v = 2f64.powf(best_lo);
            let hi_v = 2f64.powf(best_hi);
            if hi_v - lo_v <= tol_f * lo_v.min(1.0) {
                converged = true;
                break;
            }
        } else if 2f64.powf(best_hi) <= tol_f {
            // sp pinned near zero from above
            converged = true;
            break;
        }
    }
    let outward = 2f64.powi(-40);
    let lo_v = if have_lo {
        (2f64.powf(best_lo) * (1.0 - outward)).max(0.0)
    } else {
        0.0
    };
    let hi_v = 2f64.powf(best_hi) * (1.0 + outward);
    let lo = rat_from_f64(lo_v).unwrap_or_else(Rat::zero);
    let hi = rat_from_f64(hi_v)
        .ok_or_else(|| SpectraError::Invalid("spectral radius overflowed f64".into()))?;
    Ok(SpectralBracket {
        lo,
        hi,
        iterations,
        converged,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d))
    }

    #[test]
    fn one_by_one_is_exact() {
        let m = TransitionMatrix::from_i64_rows(&[&[1]]);
        let b = spectral_radius(&m, &rat(1, 1_000_000)).unwrap();
        assert_eq!(b.lo, Rat::one());
        assert_eq!(b.hi, Rat::one());
        let m = TransitionMatrix::from_rows(vec![vec![rat(3, 7)]]).unwrap();
        let b = spectral_radius(&m, &rat(1, 1_000_000)).unwrap();
        assert_eq!(b.lo, rat(3, 7));
    }

    #[test]
    fn permutation_has_radius_one() {
        let m = TransitionMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]);
        let b = spectral_radius(&m, &rat(1, 1_000_000)).unwrap();
        assert!(b.converged);
        assert!(rat_to_f64(&b.lo) <= 1.0 && 1.0 <= rat_to_f64(&b.hi));
        assert!(rat_to_f64(&b.width()) <= 1e-6);
    }

    #[test]
    fn loop_matrix_radius_matches_the_quadratic_root() {
        // characteristic polynomial (x^2 - 100x - 100)(x + 100): the dominant
        // eigenvalue is (100 + sqrt(10400))/2 ≈ 100.9901951
        let m = TransitionMatrix::from_i64_rows(&[&[0, 100, 100], &[100, 0, 100], &[0, 1, 0]]);
        let b = spectral_radius(&m, &rat(1, 100_000_000)).unwrap();
        assert!(b.converged);
        let expect = (100.0 + 10400f64.sqrt()) / 2.0;
        assert!((expect - 100.9901951).abs() < 1e-6);
        assert!(rat_to_f64(&b.lo) <= expect && expect <= rat_to_f64(&b.hi));
        assert!(rat_to_f64(&b.width()) < 1e-6);
    }

    #[test]
    fn nilpotent_collapses_to_zero() {
        let m = TransitionMatrix::from_i64_rows(&[&[0, 5], &[0, 0]]);
        let b = spectral_radius(&m, &rat(1, 1_000_000)).unwrap();
        assert!(b.lo.is_zero() && b.hi.is_zero());
    }

    #[test]
    fn square_power_consistency() {
        let m = TransitionMatrix::from_i64_rows(&[&[1, 2], &[3, 1]]);
        let m2 = m.mul(&m).unwrap();
        let tol = rat(1, 10_000_000);
        let a = spectral_radius(&m, &tol).unwrap();
        let b = spectral_radius(&m2, &tol).unwrap();
        let sp = a.mid_f64();
        assert!((b.mid_f64() - sp * sp).abs() < 1e-4);
    }

    #[test]
    fn product_order_invariance_of_radius() {
        let a = TransitionMatrix::from_i64_rows(&[&[1, 1], &[0, 2]]);
        let b = TransitionMatrix::from_i64_rows(&[&[2, 0], &[1, 1]]);
        let tol = rat(1, 10_000_000);
        let ab = spectral_radius(&a.mul(&b).unwrap(), &tol).unwrap();
        let ba = spectral_radius(&b.mul(&a).unwrap(), &tol).unwrap();
        assert!((ab.mid_f64() - ba.mid_f64()).abs() < 1e-5);
    }

    #[test]
    fn path_product_with_unit_is_identity_like() {
        let m = TransitionMatrix::from_rows(vec![vec![rat(1, 4), rat(1, 2)]]).unwrap();
        let one = TransitionMatrix::from_i64_rows(&[&[1], &[1]]);
        let p = path_product(&[&m, &one]).unwrap();
        assert_eq!(p.rows(), 1);
        assert_eq!(p.cols(), 1);
        assert_eq!(*p.get(0, 0), rat(3, 4));
        let u = TransitionMatrix::from_i64_rows(&[&[1]]);
        let q = path_product(&[&p, &u]).unwrap();
        assert_eq!(q.get(0, 0), p.get(0, 0));
    }

    #[test]
    fn min_col_sum_single_column() {
        let m = TransitionMatrix::from_i64_rows(&[&[1], &[2], &[1]]);
        assert_eq!(m.min_col_sum(), rat(4, 1));
        assert_eq!(m.max_col_sum(), rat(4, 1));
        assert_eq!(m.sum_norm(), rat(4, 1));
    }

    #[test]
    fn min_col_sum_is_supermultiplicative() {
        let a = TransitionMatrix::from_i64_rows(&[&[1, 0, 2], &[0, 3, 1], &[1, 1, 0]]);
        let b = TransitionMatrix::from_i64_rows(&[&[2, 1, 0], &[0, 1, 1], &[3, 0, 1]]);
        let ab = a.mul(&b).unwrap();
        assert!(ab.min_col_sum() >= a.min_col_sum() * b.min_col_sum());
        // subset variant on {0, 2}
        let j = [0usize, 2];
        let lhs = ab.min_col_sum_on(&j).unwrap();
        let rhs = a.min_col_sum_on(&j).unwrap() * b.min_col_sum_on(&j).unwrap();
        assert!(lhs >= rhs);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = TransitionMatrix::from_i64_rows(&[&[1, 2]]);
        let b = TransitionMatrix::from_i64_rows(&[&[1, 2]]);
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn scaled_entries_use_the_display_multiplier() {
        let m = TransitionMatrix::from_rows(vec![vec![rat(1, 4), rat(1, 2)]])
            .unwrap()
            .with_scale(rat(4, 1));
        assert_eq!(m.scaled_entries(), vec![rat(1, 1), rat(2, 1)]);
    }

    #[test]
    fn support_bits_round_trip() {
        let m = TransitionMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]);
        let bits = m.support_bits().unwrap();
        assert_eq!(bits, (1 << 1) | (1 << 8));
    }

    #[test]
    fn bracket_stays_valid_for_wide_magnitudes() {
        // entries spanning many orders of magnitude still bracket correctly
        let m = TransitionMatrix::from_rows(vec![
            vec![rat(1, 1_000_000), rat(1000, 1)],
            vec![rat(1, 1), rat(1, 1_000_000)],
        ])
        .unwrap();
        let b = spectral_radius(&m, &rat(1, 10_000_000)).unwrap();
        // sp ≈ sqrt(1000) for the off-diagonal dominant part
        let expect = ((2e-6 + ((2e-6f64).powi(2) + 4.0 * (1000.0 - 1e-12)).sqrt()) / 2.0).abs();
        assert!(rat_to_f64(&b.lo) <= expect + 1e-6);
        assert!(expect - 1e-6 <= rat_to_f64(&b.hi));
        assert!(rat_to_f64(&b.width()) < 1e-5);
    }
}
