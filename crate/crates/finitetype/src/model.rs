//! Measure specifications: an equicontractive iterated function system
//! `S_j(x) = ϱ·x + d_j` with digits `d_0 = 0 < d_1 < … < d_k` in a real
//! algebraic number field, optional probability weights, and the analysis mode
//! (on the line, or on the torus after reduction mod 1).
//!
//! A spec can be built programmatically, or loaded from a small text format:
//!
//! ```text
//! # comment
//! [field]
//! min_poly = -1 1 1          # ascending integer coefficients: -1 + x + x^2
//! root_interval = 1/2 7/10   # isolating interval for rho (optional if degree 1)
//!
//! [ifs]
//! mode = torus               # or "line"
//! digits = 0; 1 - rho; 2 - 2*rho
//! probs = 1/4; 1/2; 1/4      # optional: omit for structure-only analysis
//! ```
//!
//! Digit expressions admit rational literals `n` or `n/m`, the symbol `rho`,
//! `+`, `-`, `*`, `^` with nonnegative integer exponents, and parentheses.
//! Unknown sections or keys are rejected, with line/column positions on every
//! parse error.
//!
//! The hull of the attractor is `[0, δ]` with `δ = d_k/(1−ϱ)`.  Torus mode
//! requires δ to be a positive integer; non-integer hulls are rejected with a
//! rescaling hint rather than silently reinterpreted.

use crate::numberfield::{
    is_pisot, AlgebraicNumber, FieldContext, Int, NfError, PisotConfig, PisotStatus, Rat,
};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Line,
    Torus,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Line => write!(f, "line"),
            Mode::Torus => write!(f, "torus"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "line" => Ok(Mode::Line),
            "torus" => Ok(Mode::Torus),
            other => Err(format!("unknown mode {other:?} (expected line or torus)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] NfError),
}

/// A validated self-similar measure description.  Immutable after
/// construction; share it behind `Arc` if needed.
#[derive(Clone)]
pub struct MeasureSpec {
    field: Arc<FieldContext>,
    digits: Vec<AlgebraicNumber>,
    probs: Vec<Rat>,
    mode: Mode,
    delta: AlgebraicNumber,
    delta_int: Option<u64>,
}

/// Summary facts about a spec that downstream stages branch on.
#[derive(Debug, Clone)]
pub struct SpecReport {
    pub delta: String,
    pub delta_f64: f64,
    pub is_regular: bool,
    /// Whether the hull images S_j([0,δ]) cover [0,δ] (equivalently, every
    /// digit gap is at most ϱδ); when true the attractor is the full hull.
    pub full_support_hull: bool,
    /// Whether the hull images are pairwise disjoint (strong separation,
    /// witnessed on hulls: every digit gap exceeds ϱδ).
    pub strong_separation: bool,
    pub pisot_status: PisotStatus,
    pub pisot_note: String,
}

impl MeasureSpec {
    /// Validate and normalize an IFS description.  Digits are translated so
    /// the first is 0, must be strictly increasing, and must all lie in
    /// `field`.  Probabilities are either empty (structure-only analysis) or
    /// positive rationals summing to 1, one per digit.
    pub fn new(
        field: Arc<FieldContext>,
        digits: Vec<AlgebraicNumber>,
        probs: Vec<Rat>,
        mode: Mode,
    ) -> Result<MeasureSpec, ModelError> {
        let rho = field.rho();
        if rho.sign() <= 0 || (&field.one() - &rho).sign() <= 0 {
            return Err(ModelError::Invalid(format!(
                "contraction ratio rho = {rho} must satisfy 0 < rho < 1"
            )));
        }
        if digits.len() < 2 {
            return Err(ModelError::Invalid(
                "need at least two digits".into(),
            ));
        }
        // translate so d_0 = 0
        let base = digits[0].clone();
        let digits: Vec<AlgebraicNumber> = digits.iter().map(|d| d - &base).collect();
        for w in digits.windows(2) {
            if (&w[1] - &w[0]).sign() <= 0 {
                return Err(ModelError::Invalid(format!(
                    "digits must be strictly increasing ({} !< {})",
                    w[0], w[1]
                )));
            }
        }
        if !probs.is_empty() {
            if probs.len() != digits.len() {
                return Err(ModelError::Invalid(format!(
                    "{} probabilities for {} digits",
                    probs.len(),
                    digits.len()
                )));
            }
            let mut sum = Rat::zero();
            for p in &probs {
                if !p.is_positive() {
                    return Err(ModelError::Invalid(format!(
                        "probability {p} is not positive"
                    )));
                }
                sum += p;
            }
            if !sum.is_one() {
                return Err(ModelError::Invalid(format!(
                    "probabilities sum to {sum}, not 1"
                )));
            }
        }
        let one = field.one();
        let delta = digits.last().unwrap() / &(&one - &rho);
        let delta_int = delta.as_rational().and_then(|q| {
            if q.is_integer() && q.is_positive() {
                q.numer().to_string().parse::<u64>().ok()
            } else {
                None
            }
        });
        if mode == Mode::Torus && delta_int.is_none() {
            return Err(ModelError::Invalid(format!(
                "torus mode needs an integer hull diameter, but delta = d_k/(1-rho) = {} ≈ {:.6}; \
                 rescale the digit set (multiply every digit by a suitable rational) so that \
                 delta becomes a positive integer",
                delta,
                delta.to_f64()
            )));
        }
        Ok(MeasureSpec {
            field,
            digits,
            probs,
            mode,
            delta,
            delta_int,
        })
    }

    pub fn field(&self) -> &Arc<FieldContext> {
        &self.field
    }

    pub fn rho(&self) -> AlgebraicNumber {
        self.field.rho()
    }

    pub fn digits(&self) -> &[AlgebraicNumber] {
        &self.digits
    }

    /// Largest digit index: digits are d_0 … d_k.
    pub fn k(&self) -> usize {
        self.digits.len() - 1
    }

    pub fn probs(&self) -> &[Rat] {
        &self.probs
    }

    pub fn has_probs(&self) -> bool {
        !self.probs.is_empty()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn delta(&self) -> &AlgebraicNumber {
        &self.delta
    }

    /// δ as an integer, when it is one (always, in torus mode).
    pub fn delta_int(&self) -> Option<u64> {
        self.delta_int
    }

    /// Regular probabilities: the two extreme digits carry the (equal)
    /// minimal weight.
    pub fn is_regular(&self) -> bool {
        if self.probs.is_empty() {
            return false;
        }
        let min = self.probs.iter().min().unwrap();
        self.probs[0] == *min && self.probs.last().unwrap() == min
    }

    /// Least common multiple of the probability denominators; reports also
    /// show matrices scaled by this factor.
    pub fn prob_scale(&self) -> Int {
        let mut l = Int::one();
        for p in &self.probs {
            l = l.lcm(p.denom());
        }
        l
    }

    pub fn report(&self) -> SpecReport {
        let rho = self.rho();
        let rhodelta = &rho * &self.delta;
        let mut full = true;
        let mut sep = true;
        for w in self.digits.windows(2) {
            let gap = &w[1] - &w[0];
            match gap.cmp(&rhodelta) {
                std::cmp::Ordering::Greater => full = false,
                std::cmp::Ordering::Less => sep = false,
                std::cmp::Ordering::Equal => sep = false, // touching hulls are not disjoint
            }
        }
        let beta_poly: Vec<Int> = self.field.min_poly().iter().rev().cloned().collect();
        let pisot = is_pisot(&beta_poly, &PisotConfig::default());
        let (pisot_status, pisot_note) = match pisot {
            Ok(out) => (out.status, out.note),
            Err(e) => (PisotStatus::Undecided, format!("check failed: {e}")),
        };
        SpecReport {
            delta: self.delta.to_string(),
            delta_f64: self.delta.to_f64(),
            is_regular: self.is_regular(),
            full_support_hull: full,
            strong_separation: sep,
            pisot_status,
            pisot_note,
        }
    }

    /// m-fold convolution power of a two-map uniform Bernoulli spec with
    /// digits {0, 1−ϱ}: digits become j(1−ϱ) for j = 0..m with binomial
    /// weights.
    pub fn spec_convolve(base: &MeasureSpec, m: u32) -> Result<MeasureSpec, ModelError> {
        let one = base.field.one();
        let rho = base.rho();
        let expected = &one - &rho;
        if base.k() != 1 || base.digits[1] != expected {
            return Err(ModelError::Invalid(
                "convolution powers need a base with digits {0, 1 - rho}".into(),
            ));
        }
        let half = Rat::new(Int::one(), Int::from(2));
        if base.probs != vec![half.clone(), half] {
            return Err(ModelError::Invalid(
                "convolution powers need uniform base probabilities (1/2, 1/2)".into(),
            ));
        }
        if m == 0 {
            return Err(ModelError::Invalid("m must be positive".into()));
        }
        if m == 1 {
            return Ok(base.clone());
        }
        let mut digits = Vec::with_capacity(m as usize + 1);
        let mut probs = Vec::with_capacity(m as usize + 1);
        let denom = Int::one() << m;
        for j in 0..=m {
            digits.push(expected.scale(&Rat::from_integer(Int::from(j))));
            probs.push(Rat::new(
                num_integer::binomial(Int::from(m), Int::from(j)),
                denom.clone(),
            ));
        }
        MeasureSpec::new(base.field.clone(), digits, probs, base.mode)
    }

    /// Cantor-like family: ρ = 1/d and digits j(d−1)/d for j in `lambda`
    /// (a subset of 0..=k containing both 0 and k, so the hull is [0, k]).
    pub fn spec_cantor(
        d: u32,
        k: u32,
        lambda: &[u32],
        probs: Vec<Rat>,
        mode: Mode,
    ) -> Result<MeasureSpec, ModelError> {
        if d < 3 {
            return Err(ModelError::Invalid("need d >= 3".into()));
        }
        let mut lam: Vec<u32> = lambda.to_vec();
        lam.sort_unstable();
        lam.dedup();
        if lam.len() != lambda.len() {
            return Err(ModelError::Invalid("duplicate entries in the digit index set".into()));
        }
        if lam.first() != Some(&0) || lam.last() != Some(&k) {
            return Err(ModelError::Invalid(
                "the digit index set must contain both 0 and k (hull assumption)".into(),
            ));
        }
        let field = FieldContext::rational(&Rat::new(Int::one(), Int::from(d)))?;
        let step = Rat::new(Int::from(d - 1), Int::from(d));
        let digits: Vec<AlgebraicNumber> = lam
            .iter()
            .map(|&j| field.from_rat(&(&step * Rat::from_integer(Int::from(j)))))
            .collect();
        MeasureSpec::new(field, digits, probs, mode)
    }

    /// m-fold convolution of the uniform Cantor measure with ratio 1/d, as a
    /// spec (full digit index set, binomial weights).
    pub fn cantor_convolution(m: u32, d: u32, mode: Mode) -> Result<MeasureSpec, ModelError> {
        let lambda: Vec<u32> = (0..=m).collect();
        let denom = Int::one() << m;
        let probs: Vec<Rat> = (0..=m)
            .map(|j| {
                Rat::new(
                    num_integer::binomial(Int::from(m), Int::from(j)),
                    denom.clone(),
                )
            })
            .collect();
        MeasureSpec::spec_cantor(d, m, &lambda, probs, mode)
    }

    pub fn parse(text: &str) -> Result<MeasureSpec, ModelError> {
        parse_spec(text)
    }

    /// Canonical text form; `parse` of the output reconstructs an equal spec.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("[field]\n");
        out.push_str("min_poly =");
        for c in self.field.min_poly() {
            out.push_str(&format!(" {c}"));
        }
        out.push('\n');
        let (lo, hi) = self.field.initial_interval();
        out.push_str(&format!("root_interval = {lo} {hi}\n\n"));
        out.push_str("[ifs]\n");
        out.push_str(&format!("mode = {}\n", self.mode));
        out.push_str("digits = ");
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                out.push_str("; ");
            }
            out.push_str(&d.to_string());
        }
        out.push('\n');
        if !self.probs.is_empty() {
            out.push_str("probs = ");
            for (i, p) in self.probs.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                out.push_str(&p.to_string());
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MeasureSpec(rho≈{:.6}, digits {:?}, probs {:?}, {})",
            self.rho().to_f64(),
            self.digits.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            self.probs.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            self.mode
        )
    }
}

// ---------------------------------------------------------------------------
// text format

#[derive(Debug, Clone)]
struct Tok {
    line: usize,
    col: usize,
    text: String,
}

fn err_at(line: usize, col: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn parse_spec(text: &str) -> Result<MeasureSpec, ModelError> {
    struct RawKey {
        line: usize,
        value: String,
        vcol: usize,
    }
    let mut section = String::new();
    let mut keys: std::collections::BTreeMap<String, RawKey> = Default::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let uncommented = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let trimmed = uncommented.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col0 = uncommented.find(|c: char| !c.is_whitespace()).unwrap() + 1;
        if trimmed.starts_with('[') {
            if !trimmed.ends_with(']') {
                return Err(err_at(line_no, col0, "unterminated section header"));
            }
            section = trimmed[1..trimmed.len() - 1].trim().to_string();
            if section != "field" && section != "ifs" {
                return Err(err_at(
                    line_no,
                    col0,
                    format!("unknown section [{section}] (expected [field] or [ifs])"),
                ));
            }
            continue;
        }
        let eq = match uncommented.find('=') {
            Some(i) => i,
            None => return Err(err_at(line_no, col0, "expected key = value")),
        };
        let key = uncommented[..eq].trim();
        if section.is_empty() {
            return Err(err_at(line_no, col0, "key before any [section] header"));
        }
        let allowed: &[&str] = match section.as_str() {
            "field" => &["min_poly", "root_interval"],
            _ => &["mode", "digits", "probs"],
        };
        if !allowed.contains(&key) {
            return Err(err_at(
                line_no,
                col0,
                format!("unknown key {key:?} in section [{section}]"),
            ));
        }
        let full = format!("{section}.{key}");
        if keys.contains_key(&full) {
            return Err(err_at(line_no, col0, format!("duplicate key {full}")));
        }
        let vcol = eq + 1
            + uncommented[eq + 1..]
                .find(|c: char| !c.is_whitespace())
                .unwrap_or(0)
            + 1;
        keys.insert(
            full,
            RawKey {
                line: line_no,
                value: uncommented[eq + 1..].trim().to_string(),
                vcol,
            },
        );
    }

    let take = |name: &str| keys.get(name);
    let require = |name: &str| {
        take(name).ok_or_else(|| ModelError::Invalid(format!("missing required key {name}")))
    };

    // field
    let mp_raw = require("field.min_poly")?;
    let mut min_poly = Vec::new();
    for part in mp_raw.value.split_whitespace() {
        let c: Int = part.parse().map_err(|_| {
            err_at(
                mp_raw.line,
                mp_raw.vcol,
                format!("bad integer coefficient {part:?} in min_poly"),
            )
        })?;
        min_poly.push(c);
    }
    if min_poly.len() < 2 {
        return Err(err_at(
            mp_raw.line,
            mp_raw.vcol,
            "min_poly needs at least two coefficients (degree >= 1)",
        ));
    }

    let interval = match take("field.root_interval") {
        Some(rk) => {
            let parts: Vec<&str> = rk.value.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(err_at(
                    rk.line,
                    rk.vcol,
                    "root_interval needs exactly two rational endpoints",
                ));
            }
            let lo = parse_rat(parts[0])
                .ok_or_else(|| err_at(rk.line, rk.vcol, format!("bad rational {:?}", parts[0])))?;
            let hi = parse_rat(parts[1])
                .ok_or_else(|| err_at(rk.line, rk.vcol, format!("bad rational {:?}", parts[1])))?;
            Some((lo, hi))
        }
        None => None,
    };
    let field = match interval {
        Some((lo, hi)) => FieldContext::new(&min_poly, lo, hi)?,
        None => {
            if min_poly.len() == 2 {
                // rational rho: canonical interval around -a0/a1
                let q = -Rat::new(min_poly[0].clone(), min_poly[1].clone());
                FieldContext::rational(&q)?
            } else {
                return Err(ModelError::Invalid(
                    "root_interval is required when the minimal polynomial has degree > 1".into(),
                ));
            }
        }
    };

    // ifs
    let mode_raw = require("ifs.mode")?;
    let mode: Mode = mode_raw
        .value
        .parse()
        .map_err(|e: String| err_at(mode_raw.line, mode_raw.vcol, e))?;
    let digits_raw = require("ifs.digits")?;
    let mut digits = Vec::new();
    for piece in split_semicolon(&digits_raw.value) {
        let toks = tokenize(piece.text, digits_raw.line, piece.col)?;
        let expr = ExprParser::parse_all(&toks, &field)?;
        digits.push(expr);
    }
    let probs = match take("ifs.probs") {
        Some(pk) => {
            let mut probs = Vec::new();
            for piece in split_semicolon(&pk.value) {
                let p = parse_rat(piece.text.trim()).ok_or_else(|| {
                    err_at(pk.line, piece.col, format!("bad rational {:?}", piece.text.trim()))
                })?;
                probs.push(p);
            }
            probs
        }
        None => Vec::new(),
    };
    MeasureSpec::new(field, digits, probs, mode)
}

struct Piece<'a> {
    text: &'a str,
    col: usize,
}

fn split_semicolon(value: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in value.char_indices() {
        if c == ';' {
            out.push(Piece {
                text: &value[start..i],
                col: start + 1,
            });
            start = i + 1;
        }
    }
    out.push(Piece {
        text: &value[start..],
        col: start + 1,
    });
    out
}

fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.trim().parse().ok()?;
            let d: Int = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rat::new(n, d))
        }
        None => {
            let n: Int = s.parse().ok()?;
            Some(Rat::from_integer(n))
        }
    }
}

fn tokenize(s: &str, line: usize, col0: usize) -> Result<Vec<Tok>, ModelError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            out.push(Tok {
                line,
                col,
                text: bytes[i..j].iter().collect(),
            });
            i = j;
            continue;
        }
        if c.is_alphabetic() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_alphanumeric() {
                j += 1;
            }
            out.push(Tok {
                line,
                col,
                text: bytes[i..j].iter().collect(),
            });
            i = j;
            continue;
        }
        if "+-*/^()".contains(c) {
            out.push(Tok {
                line,
                col,
                text: c.to_string(),
            });
            i += 1;
            continue;
        }
        return Err(err_at(line, col, format!("unexpected character {c:?}")));
    }
    Ok(out)
}

/// Parses a standalone numeric expression against a field context.
///
/// The grammar matches digit expressions: integer and `n/m` rational
/// literals, the symbol `rho`, `+ - *`, integer exponents via `^`, and
/// parentheses. Useful for reading user-supplied points such as `7/8` or
/// `1 - rho^2`.
pub fn parse_number(
    field: &Arc<FieldContext>,
    text: &str,
) -> Result<AlgebraicNumber, ModelError> {
    let toks = tokenize(text, 1, 1)?;
    ExprParser::parse_all(&toks, field)
}

/// Recursive-descent evaluator for digit expressions, producing field
/// elements directly.
struct ExprParser<'a> {
    toks: &'a [Tok],
    pos: usize,
    field: &'a Arc<FieldContext>,
    line: usize,
}

impl<'a> ExprParser<'a> {
    fn parse_all(
        toks: &'a [Tok],
        field: &'a Arc<FieldContext>,
    ) -> Result<AlgebraicNumber, ModelError> {
        if toks.is_empty() {
            return Err(ModelError::Invalid("empty digit expression".into()));
        }
        let mut p = ExprParser {
            toks,
            pos: 0,
            field,
            line: toks[0].line,
        };
        let v = p.expr()?;
        if p.pos != toks.len() {
            let t = &toks[p.pos];
            return Err(err_at(
                t.line,
                t.col,
                format!("unexpected trailing token {:?}", t.text),
            ));
        }
        Ok(v)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<AlgebraicNumber, ModelError> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t.text.as_str() {
                "+" => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                "-" => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<AlgebraicNumber, ModelError> {
        let mut acc = self.factor()?;
        while let Some(t) = self.peek() {
            if t.text == "*" {
                self.pos += 1;
                acc = &acc * &self.factor()?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<AlgebraicNumber, ModelError> {
        if let Some(t) = self.peek() {
            if t.text == "-" {
                self.pos += 1;
                return Ok(-self.factor()?);
            }
        }
        let mut base = self.atom()?;
        if let Some(t) = self.peek() {
            if t.text == "^" {
                self.pos += 1;
                let e = self.bump().cloned().ok_or_else(|| {
                    err_at(self.line, 0, "missing exponent after ^".to_string())
                })?;
                let n: u64 = e.text.parse().map_err(|_| {
                    err_at(e.line, e.col, format!("bad exponent {:?}", e.text))
                })?;
                base = base.pow(n);
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<AlgebraicNumber, ModelError> {
        let t = match self.bump().cloned() {
            Some(t) => t,
            None => {
                return Err(err_at(
                    self.line,
                    0,
                    "unexpected end of expression".to_string(),
                ))
            }
        };
        match t.text.as_str() {
            "rho" => Ok(self.field.rho()),
            "(" => {
                let v = self.expr()?;
                match self.bump() {
                    Some(c) if c.text == ")" => Ok(v),
                    Some(c) => Err(err_at(c.line, c.col, format!("expected ), got {:?}", c.text))),
                    None => Err(err_at(t.line, t.col, "unclosed parenthesis".to_string())),
                }
            }
            s if s.chars().next().map(|c| c.is_ascii_digit()).unwrap_or(false) => {
                // integer literal, possibly followed by /denominator
                let num: Int = s.parse().map_err(|_| {
                    err_at(t.line, t.col, format!("bad integer {s:?}"))
                })?;
                if let Some(slash) = self.peek() {
                    if slash.text == "/" {
                        self.pos += 1;
                        let d = self.bump().cloned().ok_or_else(|| {
                            err_at(t.line, t.col, "missing denominator".to_string())
                        })?;
                        let den: Int = d.text.parse().map_err(|_| {
                            err_at(d.line, d.col, format!("bad denominator {:?}", d.text))
                        })?;
                        if den.is_zero() {
                            return Err(err_at(d.line, d.col, "zero denominator".to_string()));
                        }
                        return Ok(self.field.from_rat(&Rat::new(num, den)));
                    }
                }
                Ok(self.field.from_rat(&Rat::from_integer(num)))
            }
            other => Err(err_at(
                t.line,
                t.col,
                format!("unexpected token {other:?} in expression"),
            )),
        }
    }
}

// ---------------------------------------------------------------------------

/// Shared fixture constructors for unit tests across the crate.
#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    pub fn rat(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d))
    }

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| Int::from(x)).collect()
    }

    /// ϱ the positive root of x² + x − 1, digits {0, 1−ϱ, 2−2ϱ},
    /// probabilities (1/4, 1/2, 1/4); δ = 2.
    pub fn golden_spec(mode: Mode) -> MeasureSpec {
        let ctx = FieldContext::new(&ints(&[-1, 1, 1]), rat(1, 2), rat(7, 10)).unwrap();
        let one_minus = ctx.from_poly(&[rat(1, 1), rat(-1, 1)]);
        let two_minus2 = ctx.from_poly(&[rat(2, 1), rat(-2, 1)]);
        let digits = vec![ctx.zero(), one_minus, two_minus2];
        let probs = vec![rat(1, 4), rat(1, 2), rat(1, 4)];
        MeasureSpec::new(ctx, digits, probs, mode).unwrap()
    }

    /// ϱ = 1/4, digits {0, 3/5, 6/5, 9/5, 3}, structure only; δ = 4.
    pub fn ess_not_unique_spec() -> MeasureSpec {
        let ctx = FieldContext::rational(&rat(1, 4)).unwrap();
        let digits = [rat(0, 1), rat(3, 5), rat(6, 5), rat(9, 5), rat(3, 1)]
            .iter()
            .map(|q| ctx.from_rat(q))
            .collect();
        MeasureSpec::new(ctx, digits, Vec::new(), Mode::Torus).unwrap()
    }

    /// Middle-third Cantor measure on the line: ϱ = 1/3, digits {0, 2/3}.
    pub fn middle_third_spec() -> MeasureSpec {
        let ctx = FieldContext::rational(&rat(1, 3)).unwrap();
        let digits = vec![ctx.zero(), ctx.from_rat(&rat(2, 3))];
        MeasureSpec::new(ctx, digits, vec![rat(1, 2), rat(1, 2)], Mode::Line).unwrap()
    }

    /// ϱ = 1/4, digits {0, 3/2}, probabilities (1/4, 3/4); strong separation,
    /// δ = 2.
    pub fn strictsep_spec(mode: Mode) -> MeasureSpec {
        let ctx = FieldContext::rational(&rat(1, 4)).unwrap();
        let digits = vec![ctx.zero(), ctx.from_rat(&rat(3, 2))];
        MeasureSpec::new(ctx, digits, vec![rat(1, 4), rat(3, 4)], mode).unwrap()
    }

    /// ϱ = 1/4, digits j/8 for j ∈ {0,1,2,3,4,7,9,12}, regular probabilities
    /// with common denominator 2402; δ = 2, full support on the torus.
    pub fn isolated_point_spec() -> MeasureSpec {
        let ctx = FieldContext::rational(&rat(1, 4)).unwrap();
        let digits = [0i64, 1, 2, 3, 4, 7, 9, 12]
            .iter()
            .map(|&j| ctx.from_rat(&rat(j, 8)))
            .collect();
        let probs = vec![
            rat(1, 2402),
            rat(500, 1201),
            rat(500, 1201),
            rat(50, 1201),
            rat(50, 1201),
            rat(50, 1201),
            rat(50, 1201),
            rat(1, 2402),
        ];
        MeasureSpec::new(ctx, digits, probs, Mode::Torus).unwrap()
    }

    /// m-fold convolution of the uniform 1/d Cantor measure.
    pub fn cantor_convolution(m: u32, d: u32, mode: Mode) -> MeasureSpec {
        MeasureSpec::cantor_convolution(m, d, mode).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn golden_text() -> &'static str {
        "# convolution square of the golden-ratio Bernoulli convolution\n\
         [field]\n\
         min_poly = -1 1 1\n\
         root_interval = 1/2 7/10\n\
         \n\
         [ifs]\n\
         mode = torus\n\
         digits = 0; 1 - rho; 2 - 2*rho\n\
         probs = 1/4; 1/2; 1/4\n"
    }

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d))
    }

    #[test]
    fn golden_spec_parses_and_validates() {
        let spec = MeasureSpec::parse(golden_text()).unwrap();
        assert_eq!(spec.k(), 2);
        assert_eq!(spec.delta_int(), Some(2));
        assert!(spec.is_regular());
        assert_eq!(spec.mode(), Mode::Torus);
        assert_eq!(spec.prob_scale(), Int::from(4));
        let rho = spec.rho();
        assert!((rho.to_f64() - 0.6180339887498949).abs() < 1e-12);
    }

    #[test]
    fn standalone_expressions_parse_against_the_field() {
        let spec = MeasureSpec::parse(golden_text()).unwrap();
        let v = parse_number(spec.field(), "7/8").unwrap();
        assert_eq!(v.as_rational(), Some(rat(7, 8)));
        let w = parse_number(spec.field(), "1 - rho^2").unwrap();
        assert!((w.to_f64() - (1.0 - 0.6180339887498949f64.powi(2))).abs() < 1e-12);
        assert!(parse_number(spec.field(), "").is_err());
        assert!(parse_number(spec.field(), "1 +").is_err());
        assert!(parse_number(spec.field(), "tau").is_err());
    }

    #[test]
    fn isolated_point_spec_validates() {
        // S_j(x) = x/4 + d_j/8 with d_j = j (j=0..4), 7, 9, 12
        let text = "[field]\n\
                    min_poly = -1 4\n\
                    [ifs]\n\
                    mode = torus\n\
                    digits = 0; 1/8; 2/8; 3/8; 4/8; 7/8; 9/8; 12/8\n\
                    probs = 1/2402; 500/1201; 500/1201; 50/1201; 50/1201; 50/1201; 50/1201; 1/2402\n";
        let spec = MeasureSpec::parse(text).unwrap();
        assert_eq!(spec.k(), 7);
        assert_eq!(spec.delta_int(), Some(2));
        assert!(spec.is_regular());
        assert_eq!(spec.prob_scale(), Int::from(2402));
        let rep = spec.report();
        assert!(rep.full_support_hull);
        assert!(!rep.strong_separation);
        assert_eq!(rep.pisot_status, PisotStatus::Pisot); // beta = 4
    }

    #[test]
    fn structure_only_spec_without_probs() {
        // S_j(x) = x/4 + d_j/5, digits 3j/5 (j=0..3) and 3
        let text = "[field]\n\
                    min_poly = -1 4\n\
                    [ifs]\n\
                    mode = torus\n\
                    digits = 0; 3/5; 6/5; 9/5; 3\n";
        let spec = MeasureSpec::parse(text).unwrap();
        assert!(!spec.has_probs());
        assert_eq!(spec.delta_int(), Some(4));
        assert!(!spec.is_regular());
    }

    #[test]
    fn non_integer_delta_rejected_on_torus() {
        let text = "[field]\n\
                    min_poly = -1 4\n\
                    [ifs]\n\
                    mode = torus\n\
                    digits = 0; 3/5\n";
        let err = MeasureSpec::parse(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("rescale"), "got: {msg}");
        // same digits are fine on the line
        let text = text.replace("mode = torus", "mode = line");
        let spec = MeasureSpec::parse(&text).unwrap();
        assert_eq!(spec.delta().as_rational(), Some(rat(4, 5)));
    }

    #[test]
    fn digits_are_translated_to_start_at_zero() {
        let text = "[field]\n\
                    min_poly = -1 4\n\
                    [ifs]\n\
                    mode = line\n\
                    digits = 1; 2; 3\n";
        let spec = MeasureSpec::parse(text).unwrap();
        assert!(spec.digits()[0].is_zero());
        assert_eq!(spec.digits()[2].as_rational(), Some(rat(2, 1)));
    }

    #[test]
    fn unsorted_digits_rejected() {
        let text = "[field]\n\
                    min_poly = -1 4\n\
                    [ifs]\n\
                    mode = line\n\
                    digits = 0; 1; 1\n";
        assert!(MeasureSpec::parse(text).is_err());
    }

    #[test]
    fn bad_probability_sum_rejected() {
        let text = "[field]\n\
                    min_poly = -1 4\n\
                    [ifs]\n\
                    mode = line\n\
                    digits = 0; 1\n\
                    probs = 1/2; 1/3\n";
        let err = MeasureSpec::parse(text).unwrap_err().to_string();
        assert!(err.contains("sum"), "got: {err}");
    }

    #[test]
    fn unknown_key_reports_position() {
        let text = "[field]\nmin_poly = -1 4\nwibble = 3\n";
        match MeasureSpec::parse(text) {
            Err(ModelError::Parse { line, col, msg }) => {
                assert_eq!(line, 3);
                assert_eq!(col, 1);
                assert!(msg.contains("wibble"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn expression_error_reports_position() {
        let text = "[field]\n\
                    min_poly = -1 4\n\
                    [ifs]\n\
                    mode = line\n\
                    digits = 0; 1 $ 2\n";
        match MeasureSpec::parse(text) {
            Err(ModelError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn convolution_of_cantor_third() {
        let base_text = "[field]\n\
                         min_poly = -1 3\n\
                         [ifs]\n\
                         mode = line\n\
                         digits = 0; 2/3\n\
                         probs = 1/2; 1/2\n";
        let base = MeasureSpec::parse(base_text).unwrap();
        let conv = MeasureSpec::spec_convolve(&base, 3).unwrap();
        let dig: Vec<Rat> = conv
            .digits()
            .iter()
            .map(|d| d.as_rational().unwrap())
            .collect();
        assert_eq!(dig, vec![rat(0, 1), rat(2, 3), rat(4, 3), rat(2, 1)]);
        assert_eq!(
            conv.probs(),
            &[rat(1, 8), rat(3, 8), rat(3, 8), rat(1, 8)]
        );
        assert_eq!(conv.delta().as_rational(), Some(rat(3, 1)));
        // m = 1 returns the base unchanged
        let same = MeasureSpec::spec_convolve(&base, 1).unwrap();
        assert_eq!(same.digits()[1], base.digits()[1]);
    }

    #[test]
    fn convolution_probs_sum_to_one() {
        let base_text = "[field]\n\
                         min_poly = -1 4\n\
                         [ifs]\n\
                         mode = line\n\
                         digits = 0; 3/4\n\
                         probs = 1/2; 1/2\n";
        let base = MeasureSpec::parse(base_text).unwrap();
        let conv = MeasureSpec::spec_convolve(&base, 7).unwrap();
        assert_eq!(conv.k(), 7);
        let sum: Rat = conv.probs().iter().cloned().sum();
        assert!(sum.is_one());
        assert_eq!(conv.delta().as_rational(), Some(rat(7, 1)));
    }

    #[test]
    fn cantor_builder_matches_convolution() {
        let a = MeasureSpec::cantor_convolution(3, 3, Mode::Torus).unwrap();
        assert_eq!(a.delta_int(), Some(3));
        assert_eq!(
            a.probs(),
            &[rat(1, 8), rat(3, 8), rat(3, 8), rat(1, 8)]
        );
        // sparse digit index set with strong separation
        let b = MeasureSpec::spec_cantor(4, 2, &[0, 2], vec![rat(1, 4), rat(3, 4)], Mode::Torus)
            .unwrap();
        let rep = b.report();
        assert!(rep.strong_separation);
        assert!(!rep.full_support_hull);
        assert_eq!(b.delta_int(), Some(2));
    }

    #[test]
    fn cantor_builder_requires_hull_indices() {
        assert!(MeasureSpec::spec_cantor(4, 3, &[0, 1], vec![], Mode::Line).is_err());
        assert!(MeasureSpec::spec_cantor(4, 3, &[1, 3], vec![], Mode::Line).is_err());
    }

    #[test]
    fn strong_separation_excludes_full_support() {
        for (d, k, lam) in [(4u32, 2u32, vec![0u32, 2]), (5, 3, vec![0, 3]), (6, 2, vec![0, 2])] {
            let s = MeasureSpec::spec_cantor(d, k, &lam, vec![], Mode::Line).unwrap();
            let rep = s.report();
            assert!(!(rep.strong_separation && rep.full_support_hull));
        }
    }

    #[test]
    fn delta_is_the_fixed_point_of_the_last_map()  {
        let spec = MeasureSpec::parse(golden_text()).unwrap();
        // S_k(delta) = rho*delta + d_k should equal delta
        let img = &(&spec.rho() * spec.delta()) + spec.digits().last().unwrap();
        assert_eq!(&img, spec.delta());
    }

    #[test]
    fn text_round_trip() {
        let spec = MeasureSpec::parse(golden_text()).unwrap();
        let again = MeasureSpec::parse(&spec.to_text()).unwrap();
        assert_eq!(spec.digits(), again.digits());
        assert_eq!(spec.probs(), again.probs());
        assert_eq!(spec.mode(), again.mode());
        assert_eq!(spec.field().min_poly(), again.field().min_poly());
    }

    #[test]
    fn validation_is_idempotent() {
        let spec = MeasureSpec::parse(golden_text()).unwrap();
        let again = MeasureSpec::new(
            spec.field().clone(),
            spec.digits().to_vec(),
            spec.probs().to_vec(),
            spec.mode(),
        )
        .unwrap();
        assert_eq!(spec.digits(), again.digits());
        assert_eq!(spec.delta(), again.delta());
    }
}
