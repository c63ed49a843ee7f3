//! Local dimensions of the measure, computed from the transition diagram:
//! exact values at eventually periodic symbolic points, certified inner and
//! outer dimension intervals per loop class, pointwise symbolic estimates,
//! the closed form available under strong separation, and a report that
//! classifies candidate dimensions as isolated or not.
//!
//! Every ordering decision is made on rational spectral data via
//! cross-powering (a^(1/La) < b^(1/Lb) iff a^Lb < b^La for positives);
//! logarithms appear only when converting to displayed dimension values.

use crate::classes::{ClassKind, ClassReport, LoopClass};
use crate::model::{MeasureSpec, Mode};
use crate::netgen::{NetError, TransitionDiagram};
use crate::numberfield::{AlgebraicNumber, Int, NfError, Rat};
use crate::spectra::{
    log2_rat, matrix_power, path_product, spectral_radius, SpectraError, SpectralBracket,
    TransitionMatrix,
};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;
use thiserror::Error;

pub const DEFAULT_CYCLE_LEN: u32 = 6;
pub const DEFAULT_DEPTH_LO: u32 = 20;
pub const DEFAULT_DEPTH_HI: u32 = 10;
pub const DEFAULT_WALK_CAP: u64 = 20_000_000;
pub const DEFAULT_CYCLE_CAP: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum DimsError {
    #[error("path step {0} -> {1} has no edge in the diagram")]
    NotAdmissible(usize, usize),
    #[error("a cycle needs at least two entries with first == last")]
    BadCycle,
    #[error("too many parallel-edge combinations along the given node cycle")]
    AmbiguousCycle,
    #[error("spec carries no probabilities; dimension values need them")]
    MissingProbs,
    #[error("strong separation does not hold; use the general pipeline")]
    NotStronglySeparated,
    #[error("point lies outside the support of the measure")]
    OutsideSupport,
    #[error("diagram is truncated at a node the computation must expand")]
    Truncated,
    #[error("loop class has no internal cycle within the requested length")]
    NoCycles,
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Field(#[from] NfError),
}

fn log2_rho(d: &TransitionDiagram) -> f64 {
    d.spec().rho().to_f64().log2()
}

fn rat_pow(r: &Rat, e: u32) -> Rat {
    let mut result = Rat::one();
    let mut base = r.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    result
}

fn int_pow(base: &Int, e: u32) -> Int {
    let mut result = Int::one();
    let mut b = base.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    result
}

// ---------------------------------------------------------------------------
// per-step spectral values

/// A spectral quantity accumulated over `steps` diagram edges, with a
/// rational bracket `[lo, hi]` in the true probability scale.  The per-step
/// value is `(·)^(1/steps)` and the corresponding dimension is
/// `log(per-step value)/log ϱ` (note `log ϱ < 0`: larger spectral values give
/// smaller dimensions).
#[derive(Clone, Debug)]
pub struct StepValue {
    pub lo: Rat,
    pub hi: Rat,
    pub steps: u32,
}

impl StepValue {
    pub fn exact(v: Rat, steps: u32) -> Self {
        StepValue {
            lo: v.clone(),
            hi: v,
            steps,
        }
    }

    pub fn from_bracket(b: &SpectralBracket, steps: u32) -> Self {
        let lo = if b.lo.is_negative() {
            Rat::zero()
        } else {
            b.lo.clone()
        };
        StepValue {
            lo,
            hi: b.hi.clone(),
            steps,
        }
    }

    fn mid(&self) -> Rat {
        (&self.lo + &self.hi) / Rat::from_integer(Int::from(2))
    }

    /// Dimension from the bracket midpoint.  `log2_rho < 0`.
    pub fn dim_mid(&self, log2_rho: f64) -> f64 {
        let m = self.mid();
        if m.is_zero() {
            return f64::INFINITY;
        }
        log2_rat(&m) / (self.steps as f64 * log2_rho)
    }

    /// Outward dimension interval `(low, high)` from the bracket endpoints.
    pub fn dim_interval(&self, log2_rho: f64) -> (f64, f64) {
        let d_from_hi = if self.hi.is_zero() {
            f64::INFINITY
        } else {
            log2_rat(&self.hi) / (self.steps as f64 * log2_rho)
        };
        let d_from_lo = if self.lo.is_zero() {
            f64::INFINITY
        } else {
            log2_rat(&self.lo) / (self.steps as f64 * log2_rho)
        };
        (d_from_hi, d_from_lo)
    }

    /// Certified strict per-step comparison: true iff the whole bracket of
    /// `self` lies strictly below the whole bracket of `other`.
    pub fn lt(&self, other: &StepValue) -> bool {
        rat_pow(&self.hi, other.steps) < rat_pow(&other.lo, self.steps)
    }

    pub fn gt(&self, other: &StepValue) -> bool {
        other.lt(self)
    }

    /// Deterministic per-step total order on bracket midpoints (exact
    /// rational cross-powering); used to select extremal cycles.
    pub fn mid_cmp(&self, other: &StepValue) -> Ordering {
        let a = rat_pow(&self.mid(), other.steps);
        let b = rat_pow(&other.mid(), self.steps);
        a.cmp(&b)
    }
}

fn default_tol() -> Rat {
    Rat::new(Int::one(), Int::from(1_000_000_000u64))
}

// ---------------------------------------------------------------------------
// periodic points

/// An eventually periodic symbolic point: an optional preamble from the root
/// followed by a repeating node cycle.  The dimension of the point is
/// `log sp(T(θ)) / (L · log ϱ)` where `T(θ)` is the product of the edge
/// matrices along the cycle and `L` its edge count.
#[derive(Clone, Debug)]
pub struct PeriodicPoint {
    /// Node ids from the root up to (excluding) the start of the cycle.
    pub preamble: Vec<usize>,
    /// Node-id cycle, first == last.
    pub cycle: Vec<usize>,
    /// Bracket on sp of the cycle product (true probability scale).
    pub spectral: StepValue,
    /// False when the point is tracked as a net-interval endpoint.
    pub interior: bool,
}

impl PeriodicPoint {
    pub fn dim_mid(&self, d: &TransitionDiagram) -> f64 {
        self.spectral.dim_mid(log2_rho(d))
    }

    pub fn dim_interval(&self, d: &TransitionDiagram) -> (f64, f64) {
        self.spectral.dim_interval(log2_rho(d))
    }

    /// 1-based reduced labels along the cycle.
    pub fn cycle_labels(&self, d: &TransitionDiagram) -> Vec<usize> {
        self.cycle.iter().map(|&n| d.node(n).reduced_id + 1).collect()
    }
}

fn edge_matrices_between<'a>(
    d: &'a TransitionDiagram,
    a: usize,
    b: usize,
) -> Vec<&'a TransitionMatrix> {
    d.node(a)
        .edges
        .iter()
        .filter(|e| e.child_id == b)
        .filter_map(|e| e.matrix.as_ref())
        .collect()
}

/// Exact dimension bracket for the periodic symbolic point with the given
/// node cycle (first == last).  When consecutive nodes are joined by several
/// parallel edges, the combination with the largest spectral value is used
/// (the same tie-break that resolves two-sided boundary points).
pub fn periodic_dim(
    d: &TransitionDiagram,
    cycle: &[usize],
    tol: &Rat,
) -> Result<PeriodicPoint, DimsError> {
    if cycle.len() < 2 || cycle.first() != cycle.last() {
        return Err(DimsError::BadCycle);
    }
    if !d.has_matrices() {
        return Err(DimsError::MissingProbs);
    }
    let steps = cycle.len() - 1;
    let mut per_step: Vec<Vec<&TransitionMatrix>> = Vec::with_capacity(steps);
    let mut combos: u64 = 1;
    for w in cycle.windows(2) {
        let ms = edge_matrices_between(d, w[0], w[1]);
        if ms.is_empty() {
            return Err(DimsError::NotAdmissible(w[0], w[1]));
        }
        combos = combos.saturating_mul(ms.len() as u64);
        per_step.push(ms);
    }
    if combos > 4096 {
        return Err(DimsError::AmbiguousCycle);
    }
    let mut best: Option<(StepValue, Vec<usize>)> = None;
    let mut choice = vec![0usize; steps];
    loop {
        let ms: Vec<&TransitionMatrix> = choice
            .iter()
            .enumerate()
            .map(|(i, &c)| per_step[i][c])
            .collect();
        let prod = path_product(&ms)?;
        let b = spectral_radius(&prod, tol)?;
        let sv = StepValue::from_bracket(&b, steps as u32);
        let better = match &best {
            None => true,
            Some((cur, _)) => sv.mid_cmp(cur) == Ordering::Greater,
        };
        if better {
            best = Some((sv, choice.clone()));
        }
        // advance the mixed-radix counter over parallel-edge choices
        let mut i = 0;
        loop {
            if i == steps {
                break;
            }
            choice[i] += 1;
            if choice[i] < per_step[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == steps {
            break;
        }
    }
    let (spectral, _) = best.expect("at least one combination");
    Ok(PeriodicPoint {
        preamble: Vec::new(),
        cycle: cycle.to_vec(),
        spectral,
        interior: true,
    })
}

// ---------------------------------------------------------------------------
// class subgraphs

struct ClassGraph {
    /// Member node ids (ascending, as in the loop class).
    nodes: Vec<usize>,
    /// local index -> (local target, matrix) per internal edge, in diagram
    /// edge order.
    edges: Vec<Vec<(usize, TransitionMatrix)>>,
    /// Smallest neighbour-set size over the member nodes.
    min_dim: usize,
}

fn class_graph(d: &TransitionDiagram, c: &LoopClass) -> Result<ClassGraph, DimsError> {
    if !d.has_matrices() {
        return Err(DimsError::MissingProbs);
    }
    let index: HashMap<usize, usize> = c.nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut edges = vec![Vec::new(); c.nodes.len()];
    let mut min_dim = usize::MAX;
    for (li, &n) in c.nodes.iter().enumerate() {
        min_dim = min_dim.min(d.node(n).cv.neighbours.len());
        for e in &d.node(n).edges {
            if let Some(&lt) = index.get(&e.child_id) {
                let m = e.matrix.as_ref().ok_or(DimsError::MissingProbs)?;
                edges[li].push((lt, m.clone()));
            }
        }
    }
    Ok(ClassGraph {
        nodes: c.nodes.clone(),
        edges,
        min_dim,
    })
}

// ---------------------------------------------------------------------------
// inner intervals from simple cycles

/// A witness cycle: full node ids (first == last) and their 1-based reduced
/// labels, plus the spectral bracket of its matrix product.
#[derive(Clone, Debug)]
pub struct CycleWitness {
    pub nodes: Vec<usize>,
    pub labels: Vec<usize>,
    pub spectral: StepValue,
}

/// Dimension interval certified from simple cycles of a loop class: every
/// periodic point of the class has its dimension in `[dim_lo, dim_hi]`-dense
/// closure, and the witnesses realize the endpoints.
#[derive(Clone, Debug)]
pub struct InnerInterval {
    pub dim_lo: f64,
    pub dim_hi: f64,
    /// Cycle with the largest per-step spectral value (gives `dim_lo`).
    pub max: CycleWitness,
    /// Cycle with the smallest per-step spectral value (gives `dim_hi`).
    pub min: CycleWitness,
    pub cycles_seen: u64,
    /// False when the cycle cap stopped the enumeration early.
    pub complete: bool,
    pub(crate) max_matrix: TransitionMatrix,
    pub(crate) min_matrix: TransitionMatrix,
}

impl InnerInterval {
    pub fn spectral_max(&self) -> &StepValue {
        &self.max.spectral
    }

    pub fn spectral_min(&self) -> &StepValue {
        &self.min.spectral
    }
}

/// True when the (node, edge-slot) step sequence is the lexicographically
/// smallest among its rotations that start at an occurrence of `base`.
/// Rotations starting elsewhere begin at a larger node and are never
/// enumerated, so this keeps exactly one representative per rotation class.
fn rotation_minimal(steps: &[(usize, usize)], base: usize) -> bool {
    let l = steps.len();
    for i in 1..l {
        if steps[i].0 != base {
            continue;
        }
        for k in 0..l {
            match steps[(i + k) % l].cmp(&steps[k]) {
                Ordering::Less => return false,
                Ordering::Greater => break,
                Ordering::Equal => {}
            }
        }
    }
    true
}

/// Depth-first enumeration of closed walks (repeated nodes and edges allowed;
/// parallel edges give distinct walks) with at most `max_len` edges, one
/// representative per rotation class.  Walks that revisit a node matter here:
/// alternating two self-loops can have a strictly larger per-step growth rate
/// than either loop alone.  Returns false when the cap stopped early.
fn for_each_closed_walk<F>(g: &ClassGraph, max_len: u32, cap: u64, mut f: F) -> (u64, bool)
where
    F: FnMut(&[usize], &[&TransitionMatrix]),
{
    let n = g.nodes.len();
    let mut seen: u64 = 0;
    let mut complete = true;
    let mut path: Vec<usize> = Vec::new();
    let mut steps: Vec<(usize, usize)> = Vec::new();
    let mut mats: Vec<&TransitionMatrix> = Vec::new();

    // Recursive walker implemented with an explicit closure-free helper.
    #[allow(clippy::too_many_arguments)]
    fn dfs<'g, F>(
        g: &'g ClassGraph,
        base: usize,
        cur: usize,
        max_len: u32,
        cap: u64,
        seen: &mut u64,
        complete: &mut bool,
        path: &mut Vec<usize>,
        steps: &mut Vec<(usize, usize)>,
        mats: &mut Vec<&'g TransitionMatrix>,
        f: &mut F,
    ) where
        F: FnMut(&[usize], &[&TransitionMatrix]),
    {
        for (slot, (t, m)) in g.edges[cur].iter().enumerate() {
            if !*complete {
                return;
            }
            // Restricting to nodes >= base makes the base the smallest node of
            // every enumerated walk, so each rotation class is seen from one
            // base only.
            if *t < base {
                continue;
            }
            steps.push((cur, slot));
            mats.push(m);
            path.push(*t);
            if *t == base && rotation_minimal(steps, base) {
                if *seen >= cap {
                    *complete = false;
                } else {
                    *seen += 1;
                    f(path, mats);
                }
            }
            if *complete && (steps.len() as u32) < max_len {
                dfs(g, base, *t, max_len, cap, seen, complete, path, steps, mats, f);
            }
            path.pop();
            mats.pop();
            steps.pop();
        }
    }

    for base in 0..n {
        if !complete {
            break;
        }
        path.clear();
        path.push(base);
        steps.clear();
        mats.clear();
        dfs(
            g,
            base,
            base,
            max_len,
            cap,
            &mut seen,
            &mut complete,
            &mut path,
            &mut steps,
            &mut mats,
            &mut f,
        );
    }
    (seen, complete)
}

/// Rotate a node cycle (first == last) so the smallest 1-based reduced label
/// comes first; keeps reports stable across node numbering.
fn canonical_rotation(d: &TransitionDiagram, nodes: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let core = &nodes[..nodes.len() - 1];
    let labels: Vec<usize> = core.iter().map(|&n| d.node(n).reduced_id + 1).collect();
    let mut best = 0usize;
    for i in 1..core.len() {
        if labels[i] < labels[best] {
            best = i;
        }
    }
    let mut rn: Vec<usize> = Vec::with_capacity(nodes.len());
    let mut rl: Vec<usize> = Vec::with_capacity(nodes.len());
    for k in 0..core.len() {
        let i = (best + k) % core.len();
        rn.push(core[i]);
        rl.push(labels[i]);
    }
    rn.push(rn[0]);
    rl.push(rl[0]);
    (rn, rl)
}

/// Certified inner dimension interval of a loop class from its closed walks
/// of at most `max_cycle_len` edges.
pub fn inner_interval(
    d: &TransitionDiagram,
    c: &LoopClass,
    max_cycle_len: u32,
    tol: &Rat,
    cycle_cap: u64,
) -> Result<InnerInterval, DimsError> {
    let g = class_graph(d, c)?;
    struct Best {
        sv: StepValue,
        nodes: Vec<usize>,
        matrix: TransitionMatrix,
    }
    let mut best_max: Option<Best> = None;
    let mut best_min: Option<Best> = None;
    let mut spectra_err: Option<SpectraError> = None;
    let (cycles_seen, complete) = for_each_closed_walk(&g, max_cycle_len, cycle_cap, |path, mats| {
        if spectra_err.is_some() {
            return;
        }
        let prod = match path_product(mats) {
            Ok(p) => p,
            Err(e) => {
                spectra_err = Some(e);
                return;
            }
        };
        let bracket = match spectral_radius(&prod, tol) {
            Ok(b) => b,
            Err(e) => {
                spectra_err = Some(e);
                return;
            }
        };
        let sv = StepValue::from_bracket(&bracket, (path.len() - 1) as u32);
        let nodes: Vec<usize> = path.iter().map(|&li| g.nodes[li]).collect();
        let replace_max = match &best_max {
            None => true,
            Some(b) => match sv.mid_cmp(&b.sv) {
                Ordering::Greater => true,
                Ordering::Equal => nodes.len() < b.nodes.len(),
                Ordering::Less => false,
            },
        };
        if replace_max {
            best_max = Some(Best {
                sv: sv.clone(),
                nodes: nodes.clone(),
                matrix: prod.clone(),
            });
        }
        let replace_min = match &best_min {
            None => true,
            Some(b) => match sv.mid_cmp(&b.sv) {
                Ordering::Less => true,
                Ordering::Equal => nodes.len() < b.nodes.len(),
                Ordering::Greater => false,
            },
        };
        if replace_min {
            best_min = Some(Best {
                sv,
                nodes,
                matrix: prod,
            });
        }
    });
    if let Some(e) = spectra_err {
        return Err(e.into());
    }
    let (bmax, bmin) = match (best_max, best_min) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(DimsError::NoCycles),
    };
    let l2r = log2_rho(d);
    let (max_nodes, max_labels) = canonical_rotation(d, &bmax.nodes);
    let (min_nodes, min_labels) = canonical_rotation(d, &bmin.nodes);
    Ok(InnerInterval {
        dim_lo: bmax.sv.dim_mid(l2r),
        dim_hi: bmin.sv.dim_mid(l2r),
        max: CycleWitness {
            nodes: max_nodes,
            labels: max_labels,
            spectral: bmax.sv,
        },
        min: CycleWitness {
            nodes: min_nodes,
            labels: min_labels,
            spectral: bmin.sv,
        },
        cycles_seen,
        complete,
        max_matrix: bmax.matrix,
        min_matrix: bmin.matrix,
    })
}

// ---------------------------------------------------------------------------
// outer intervals from walk norms

/// Norm used for the upper spectral bound over fixed-length walks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpperNorm {
    /// Sum of all entries (submultiplicative); coarser but cheap.
    SumAll,
    /// Largest column sum (the operator norm induced by summing the weight
    /// vector; submultiplicative).  Default: tighter than the entry sum.
    MaxColSum,
}

#[derive(Clone, Debug)]
pub struct OuterParams {
    /// Walk length for the lower spectral bound (minimum column sums).
    pub depth_lo: u32,
    /// Walk length for the upper spectral bound (norm maxima).
    pub depth_hi: u32,
    /// Walk-count cap; depths shrink automatically beyond it.
    pub walk_cap: u64,
    /// Search shared column subsets of size ≤ 2 for the lower bound.
    pub subset_search: bool,
    /// Fixed shared column subset (0-based); overrides the search.
    pub subset: Option<Vec<usize>>,
    pub upper_norm: UpperNorm,
}

impl Default for OuterParams {
    fn default() -> Self {
        OuterParams {
            depth_lo: DEFAULT_DEPTH_LO,
            depth_hi: DEFAULT_DEPTH_HI,
            walk_cap: DEFAULT_WALK_CAP,
            subset_search: true,
            subset: None,
            upper_norm: UpperNorm::MaxColSum,
        }
    }
}

/// Outer dimension interval certified from fixed-length internal walks: the
/// per-step growth of every infinite internal path lies between the returned
/// spectral bounds, so every local dimension realized in the class lies in
/// `[dim_lo, dim_hi]`.
#[derive(Clone, Debug)]
pub struct OuterInterval {
    pub dim_lo: f64,
    pub dim_hi: f64,
    /// Upper per-step spectral bound (max of walk norms), giving `dim_lo`.
    pub spectral_hi: StepValue,
    /// Lower per-step spectral bound (min of column sums), giving `dim_hi`;
    /// absent when some internal matrix has a zero column.
    pub spectral_lo: Option<StepValue>,
    pub depth_lo_used: u32,
    pub depth_hi_used: u32,
    /// Column subset realizing the reported lower bound (None = all columns).
    pub subset_used: Option<Vec<usize>>,
    pub warnings: Vec<String>,
}

trait WalkNum: Clone + Ord {
    fn from_int(i: &Int) -> Option<Self>;
    fn zero() -> Self;
    fn is_zero_v(&self) -> bool;
    fn checked_add(&self, o: &Self) -> Option<Self>;
    fn checked_mul(&self, o: &Self) -> Option<Self>;
    fn to_int(&self) -> Int;
}

impl WalkNum for u128 {
    fn from_int(i: &Int) -> Option<Self> {
        i.to_u128()
    }
    fn zero() -> Self {
        0
    }
    fn is_zero_v(&self) -> bool {
        *self == 0
    }
    fn checked_add(&self, o: &Self) -> Option<Self> {
        u128::checked_add(*self, *o)
    }
    fn checked_mul(&self, o: &Self) -> Option<Self> {
        u128::checked_mul(*self, *o)
    }
    fn to_int(&self) -> Int {
        Int::from(*self)
    }
}

impl WalkNum for Int {
    fn from_int(i: &Int) -> Option<Self> {
        Some(i.clone())
    }
    fn zero() -> Self {
        <Int as Zero>::zero()
    }
    fn is_zero_v(&self) -> bool {
        Zero::is_zero(self)
    }
    fn checked_add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn checked_mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn to_int(&self) -> Int {
        self.clone()
    }
}

struct IntMat<T> {
    r: usize,
    c: usize,
    e: Vec<T>,
}

fn imat_identity<T: WalkNum>(n: usize) -> IntMat<T> {
    let one = T::from_int(&Int::one()).expect("1 always converts");
    let mut e = vec![T::zero(); n * n];
    for i in 0..n {
        e[i * n + i] = one.clone();
    }
    IntMat { r: n, c: n, e }
}

fn imat_mul<T: WalkNum>(a: &IntMat<T>, b: &IntMat<T>) -> Option<IntMat<T>> {
    debug_assert_eq!(a.c, b.r);
    let mut e = vec![T::zero(); a.r * b.c];
    for i in 0..a.r {
        for k in 0..a.c {
            let av = &a.e[i * a.c + k];
            if av.is_zero_v() {
                continue;
            }
            for j in 0..b.c {
                let bv = &b.e[k * b.c + j];
                if bv.is_zero_v() {
                    continue;
                }
                let p = av.checked_mul(bv)?;
                e[i * b.c + j] = e[i * b.c + j].checked_add(&p)?;
            }
        }
    }
    Some(IntMat { r: a.r, c: b.c, e })
}

/// Scaled integer copies of the internal edge matrices (entries × prob
/// denominator), indexed like `ClassGraph::edges`.
fn scaled_edges<T: WalkNum>(g: &ClassGraph, scale: &Int) -> Option<Vec<Vec<(usize, IntMat<T>)>>> {
    let mut out = Vec::with_capacity(g.edges.len());
    for es in &g.edges {
        let mut row = Vec::with_capacity(es.len());
        for (t, m) in es {
            let mut e = Vec::with_capacity(m.rows() * m.cols());
            for v in m.entries() {
                let scaled = v * Rat::from_integer(scale.clone());
                debug_assert!(scaled.is_integer());
                e.push(T::from_int(&scaled.to_integer())?);
            }
            row.push((
                *t,
                IntMat {
                    r: m.rows(),
                    c: m.cols(),
                    e,
                },
            ));
        }
        out.push(row);
    }
    Some(out)
}

/// Number of internal walks with exactly `depth` edges (saturating).
fn walk_count(g: &ClassGraph, depth: u32) -> u128 {
    let n = g.nodes.len();
    let mut mult = vec![0u128; n * n];
    for (u, es) in g.edges.iter().enumerate() {
        for (t, _) in es {
            mult[u * n + *t] += 1;
        }
    }
    let mut c = vec![1u128; n];
    for _ in 0..depth {
        let mut next = vec![0u128; n];
        for u in 0..n {
            let mut acc: u128 = 0;
            for v in 0..n {
                if mult[u * n + v] > 0 {
                    acc = acc.saturating_add(mult[u * n + v].saturating_mul(c[v]));
                }
            }
            next[u] = acc;
        }
        c = next;
    }
    c.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

fn choose_depth(g: &ClassGraph, want: u32, cap: u64, warnings: &mut Vec<String>, label: &str) -> u32 {
    let mut depth = want.max(1);
    while depth > 1 && walk_count(g, depth) > cap as u128 {
        depth -= 1;
    }
    if depth != want {
        warnings.push(format!(
            "{label} walk depth reduced from {want} to {depth} to stay under {cap} walks"
        ));
    }
    depth
}

/// Depth-first product over every internal walk with exactly `depth` edges.
/// Calls `eval(product, start_local, end_local)` at each leaf.  Returns false
/// when integer overflow was detected (caller retries with big integers).
fn walk_products<T: WalkNum, F>(mats: &[Vec<(usize, IntMat<T>)>], depth: u32, eval: &mut F) -> bool
where
    F: FnMut(&IntMat<T>, usize, usize) -> bool,
{
    fn rec<T: WalkNum, F>(
        mats: &[Vec<(usize, IntMat<T>)>],
        start: usize,
        cur: usize,
        left: u32,
        prod: &IntMat<T>,
        eval: &mut F,
    ) -> bool
    where
        F: FnMut(&IntMat<T>, usize, usize) -> bool,
    {
        if left == 0 {
            return eval(prod, start, cur);
        }
        for (t, m) in &mats[cur] {
            let np = match imat_mul(prod, m) {
                Some(p) => p,
                None => return false,
            };
            if !rec(mats, start, *t, left - 1, &np, eval) {
                return false;
            }
        }
        true
    }

    for (s, out) in mats.iter().enumerate() {
        // every member of a loop class lies on a cycle, so it has an edge
        let n = out.first().map(|(_, m)| m.r).unwrap_or(1);
        let ident = imat_identity::<T>(n);
        if !rec(mats, s, s, depth, &ident, eval) {
            return false;
        }
    }
    true
}

/// Candidate shared column subsets for the lower bound: all columns, then
/// all singles and pairs that exist in every member node.
fn subset_candidates(min_dim: usize, search: bool, fixed: &Option<Vec<usize>>) -> Vec<Option<Vec<usize>>> {
    let mut out: Vec<Option<Vec<usize>>> = vec![None];
    if let Some(j) = fixed {
        if j.iter().all(|&i| i < min_dim) && !j.is_empty() {
            out.push(Some(j.clone()));
        }
        return out;
    }
    if !search {
        return out;
    }
    let lim = min_dim.min(8);
    for i in 0..lim {
        out.push(Some(vec![i]));
    }
    for i in 0..lim {
        for j in (i + 1)..lim {
            out.push(Some(vec![i, j]));
        }
    }
    out
}

fn eval_candidate<T: WalkNum>(p: &IntMat<T>, cand: &Option<Vec<usize>>) -> Option<T> {
    match cand {
        None => {
            let mut best: Option<T> = None;
            for j in 0..p.c {
                let mut s = T::zero();
                for i in 0..p.r {
                    s = s.checked_add(&p.e[i * p.c + j])?;
                }
                best = Some(match best {
                    None => s,
                    Some(b) => {
                        if s < b {
                            s
                        } else {
                            b
                        }
                    }
                });
            }
            best
        }
        Some(js) => {
            let mut best: Option<T> = None;
            for &j in js {
                let mut s = T::zero();
                for &i in js {
                    s = s.checked_add(&p.e[i * p.c + j])?;
                }
                best = Some(match best {
                    None => s,
                    Some(b) => {
                        if s < b {
                            s
                        } else {
                            b
                        }
                    }
                });
            }
            best
        }
    }
}

struct LowerOutcome {
    best_value: Int,
    subset: Option<Vec<usize>>,
}

fn lower_run<T: WalkNum>(
    g: &ClassGraph,
    scale: &Int,
    depth: u32,
    cands: &[Option<Vec<usize>>],
) -> Option<Option<LowerOutcome>> {
    let mats = scaled_edges::<T>(g, scale)?;
    let mut mins: Vec<Option<T>> = vec![None; cands.len()];
    let ok = walk_products(&mats, depth, &mut |p: &IntMat<T>, _s, _e| {
        for (ci, cand) in cands.iter().enumerate() {
            let v = match eval_candidate(p, cand) {
                Some(v) => v,
                None => return false,
            };
            let cur = &mut mins[ci];
            let smaller = match cur {
                None => true,
                Some(b) => v < *b,
            };
            if smaller {
                *cur = Some(v);
            }
        }
        true
    });
    if !ok {
        return None;
    }
    // Pick the candidate with the largest guaranteed minimum.
    let mut best: Option<(usize, T)> = None;
    for (ci, m) in mins.into_iter().enumerate() {
        if let Some(v) = m {
            let replace = match &best {
                None => true,
                Some((_, bv)) => v > *bv,
            };
            if replace {
                best = Some((ci, v));
            }
        }
    }
    Some(best.map(|(ci, v)| LowerOutcome {
        best_value: v.to_int(),
        subset: cands[ci].clone(),
    }))
}

fn upper_run<T: WalkNum>(
    g: &ClassGraph,
    scale: &Int,
    depth: u32,
    norm: UpperNorm,
) -> Option<Option<Int>> {
    let mats = scaled_edges::<T>(g, scale)?;
    let mut max: Option<T> = None;
    let ok = walk_products(&mats, depth, &mut |p: &IntMat<T>, _s, _e| {
        let v = match norm {
            UpperNorm::SumAll => {
                let mut s = T::zero();
                for x in &p.e {
                    s = match s.checked_add(x) {
                        Some(s) => s,
                        None => return false,
                    };
                }
                s
            }
            UpperNorm::MaxColSum => {
                let mut best: Option<T> = None;
                for j in 0..p.c {
                    let mut s = T::zero();
                    for i in 0..p.r {
                        s = match s.checked_add(&p.e[i * p.c + j]) {
                            Some(s) => s,
                            None => return false,
                        };
                    }
                    best = Some(match best {
                        None => s,
                        Some(b) => {
                            if s > b {
                                s
                            } else {
                                b
                            }
                        }
                    });
                }
                match best {
                    Some(b) => b,
                    None => return false,
                }
            }
        };
        let larger = match &max {
            None => true,
            Some(b) => v > *b,
        };
        if larger {
            max = Some(v);
        }
        true
    });
    if !ok {
        return None;
    }
    Some(max.map(|v| v.to_int()))
}

/// Certified outer dimension interval of a loop class from internal walks of
/// fixed lengths: minimum (possibly subset-restricted) column sums give the
/// lower spectral bound, walk norms the upper one.
pub fn outer_interval(
    d: &TransitionDiagram,
    c: &LoopClass,
    params: &OuterParams,
) -> Result<OuterInterval, DimsError> {
    let g = class_graph(d, c)?;
    let scale = d.spec().prob_scale();
    let mut warnings = Vec::new();

    let col_ok = g
        .edges
        .iter()
        .flat_map(|es| es.iter())
        .all(|(_, m)| m.every_column_nonzero());

    let depth_hi = choose_depth(&g, params.depth_hi, params.walk_cap, &mut warnings, "upper");
    let upper_int = match upper_run::<u128>(&g, &scale, depth_hi, params.upper_norm) {
        Some(v) => v,
        None => upper_run::<Int>(&g, &scale, depth_hi, params.upper_norm)
            .expect("big-integer run cannot overflow"),
    }
    .ok_or(DimsError::NoCycles)?;
    let spectral_hi = StepValue::exact(
        Rat::new(upper_int, int_pow(&scale, depth_hi)),
        depth_hi,
    );

    let mut spectral_lo = None;
    let mut subset_used = None;
    let mut depth_lo_used = 0;
    if col_ok {
        let depth_lo = choose_depth(&g, params.depth_lo, params.walk_cap, &mut warnings, "lower");
        depth_lo_used = depth_lo;
        let cands = subset_candidates(g.min_dim, params.subset_search, &params.subset);
        if params.subset.is_some() && cands.len() == 1 {
            warnings.push("requested column subset exceeds some node; using all columns".into());
        }
        let outcome = match lower_run::<u128>(&g, &scale, depth_lo, &cands) {
            Some(v) => v,
            None => lower_run::<Int>(&g, &scale, depth_lo, &cands)
                .expect("big-integer run cannot overflow"),
        }
        .ok_or(DimsError::NoCycles)?;
        if outcome.best_value.is_zero() {
            warnings.push("all column-sum minima vanish; lower bound omitted".into());
        } else {
            spectral_lo = Some(StepValue::exact(
                Rat::new(outcome.best_value, int_pow(&scale, depth_lo)),
                depth_lo,
            ));
            subset_used = outcome.subset;
        }
    } else {
        warnings.push("an internal matrix has a zero column; only the upper bound is certified".into());
    }

    let l2r = log2_rho(d);
    let dim_lo = spectral_hi.dim_mid(l2r);
    let dim_hi = spectral_lo
        .as_ref()
        .map(|sv| sv.dim_mid(l2r))
        .unwrap_or(f64::INFINITY);
    Ok(OuterInterval {
        dim_lo,
        dim_hi,
        spectral_hi,
        spectral_lo,
        depth_lo_used,
        depth_hi_used: depth_hi,
        subset_used,
        warnings,
    })
}

/// True unless the certificates show a violation of `inner ⊆ outer` (exact
/// cross-powered comparison on the spectral brackets).
pub fn inner_within_outer(inner: &InnerInterval, outer: &OuterInterval) -> bool {
    if inner.max.spectral.gt(&outer.spectral_hi) {
        return false;
    }
    if let Some(lo) = &outer.spectral_lo {
        if inner.min.spectral.lt(lo) {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// strong separation closed form

/// Dimension interval under strong separation:
/// `[log(max p)/log ϱ, log(min p)/log ϱ]`, equal to the dimension set in
/// both line and torus modes.
#[derive(Clone, Debug)]
pub struct ClosedFormInterval {
    pub dim_lo: f64,
    pub dim_hi: f64,
    /// Largest probability (per-step spectral value giving `dim_lo`).
    pub p_max: Rat,
    /// Smallest probability (per-step spectral value giving `dim_hi`).
    pub p_min: Rat,
}

pub fn sss_interval(spec: &MeasureSpec) -> Result<ClosedFormInterval, DimsError> {
    if !spec.has_probs() {
        return Err(DimsError::MissingProbs);
    }
    if !spec.report().strong_separation {
        return Err(DimsError::NotStronglySeparated);
    }
    let p_max = spec.probs().iter().max().unwrap().clone();
    let p_min = spec.probs().iter().min().unwrap().clone();
    let l2r = spec.rho().to_f64().log2();
    Ok(ClosedFormInterval {
        dim_lo: log2_rat(&p_max) / l2r,
        dim_hi: log2_rat(&p_min) / l2r,
        p_max,
        p_min,
    })
}

// ---------------------------------------------------------------------------
// symbolic descent at a point

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrackSide {
    Interior,
    /// Following the point as the left endpoint of its net intervals.
    LeftEnd,
    /// Following the point as the right endpoint of its net intervals.
    RightEnd,
}

#[derive(Clone, Debug)]
pub struct PointPath {
    /// Diagram node ids from the root.
    pub nodes: Vec<usize>,
    /// 1-based reduced labels along the path.
    pub labels: Vec<usize>,
    pub side: TrackSide,
    /// Exact eventually periodic structure, when detected.
    pub periodic: Option<PeriodicPoint>,
    /// Norm-based dimension estimate at the reached depth.
    pub estimate: Option<f64>,
    pub depth: u32,
}

#[derive(Clone, Debug)]
pub enum PointValue {
    Exact(PeriodicPoint),
    Estimate {
        value: f64,
        /// Estimate that also counts the two adjacent net intervals;
        /// reported when regular probabilities + full support do not hold.
        mn_value: Option<f64>,
        depth: u32,
    },
}

#[derive(Clone, Debug)]
pub struct PointResult {
    pub representations: Vec<PointPath>,
    pub value: PointValue,
    /// True when the point met a net-interval endpoint during the descent.
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum PosKey {
    LeftEnd,
    RightEnd,
    Interior(Vec<Rat>),
}

#[derive(Clone)]
struct Track {
    node: usize,
    side: TrackSide,
    /// Exact normalized position inside the current net interval (only for
    /// interior tracks; endpoint tracks derive it from the side).
    pos: Option<AlgebraicNumber>,
    nodes: Vec<usize>,
    steps: Vec<(usize, usize)>,
    product: TransitionMatrix,
    seen: HashMap<(usize, PosKey), usize>,
    periodic: Option<PeriodicPoint>,
}

impl Track {
    fn key(&self) -> (usize, PosKey) {
        let pk = match self.side {
            TrackSide::LeftEnd => PosKey::LeftEnd,
            TrackSide::RightEnd => PosKey::RightEnd,
            TrackSide::Interior => {
                PosKey::Interior(self.pos.as_ref().expect("interior position").lex_key())
            }
        };
        (self.node, pk)
    }
}

enum Advance {
    One(Track),
    Two(Track, Track),
    Dead,
}

fn mod_one(x: &AlgebraicNumber) -> AlgebraicNumber {
    let ctx = x.ctx().clone();
    let mut n = x.to_f64().floor() as i64;
    loop {
        let y = x - &ctx.from_int(n);
        if y.sign() < 0 {
            n -= 1;
            continue;
        }
        if (&y - &ctx.one()).sign() >= 0 {
            n += 1;
            continue;
        }
        return y;
    }
}

struct Descender<'d> {
    d: &'d TransitionDiagram,
    rho: AlgebraicNumber,
    inv_rho: AlgebraicNumber,
    tol: Rat,
}

impl<'d> Descender<'d> {
    fn child_end(&self, offset: &AlgebraicNumber, child_id: usize) -> AlgebraicNumber {
        offset + &(&self.rho * &self.d.node(child_id).cv.length)
    }

    /// One subdivision step; the exact position to follow inside the current
    /// node's normalized frame is taken from the track's side/state.
    fn advance(&self, t: Track) -> Result<Advance, DimsError> {
        let node = self.d.node(t.node);
        if node.edges.is_empty() {
            return Err(DimsError::Truncated);
        }
        let p = match t.side {
            TrackSide::Interior => t.pos.clone().expect("interior position"),
            TrackSide::LeftEnd => node.cv.length.ctx().zero(),
            TrackSide::RightEnd => node.cv.length.clone(),
        };
        let mut inside: Option<(usize, AlgebraicNumber)> = None;
        let mut at_left: Option<usize> = None;
        let mut at_right: Option<usize> = None;
        for (i, e) in node.edges.iter().enumerate() {
            let start_diff = &p - &e.offset;
            let s = start_diff.sign();
            if s == 0 {
                at_left = Some(i);
                continue;
            }
            if s < 0 {
                continue;
            }
            let end = self.child_end(&e.offset, e.child_id);
            let end_diff = &end - &p;
            let es = end_diff.sign();
            if es == 0 {
                at_right = Some(i);
            } else if es > 0 {
                inside = Some((i, &start_diff * &self.inv_rho));
            }
        }
        let step_into = |t: &Track, i: usize, side: TrackSide, pos: Option<AlgebraicNumber>|
         -> Result<Track, DimsError> {
            let e = &self.d.node(t.node).edges[i];
            let m = e.matrix.as_ref().ok_or(DimsError::MissingProbs)?;
            let mut nt = t.clone();
            nt.steps.push((t.node, i));
            nt.node = e.child_id;
            nt.nodes.push(e.child_id);
            nt.side = side;
            nt.pos = pos;
            nt.product = nt.product.mul(m)?;
            // periodicity: identical (node, exact position) states repeat
            let key = nt.key();
            if let Some(&first) = nt.seen.get(&key) {
                if nt.periodic.is_none() {
                    let cycle: Vec<usize> = nt.nodes[first..].to_vec();
                    let mats: Vec<&TransitionMatrix> = nt.steps[first..]
                        .iter()
                        .map(|&(n, ei)| {
                            self.d.node(n).edges[ei]
                                .matrix
                                .as_ref()
                                .expect("probabilities checked")
                        })
                        .collect();
                    let prod = path_product(&mats)?;
                    let bracket = spectral_radius(&prod, &self.tol)?;
                    nt.periodic = Some(PeriodicPoint {
                        preamble: nt.nodes[..first].to_vec(),
                        cycle,
                        spectral: StepValue::from_bracket(
                            &bracket,
                            (nt.nodes.len() - 1 - first) as u32,
                        ),
                        interior: nt.side == TrackSide::Interior,
                    });
                }
            } else {
                nt.seen.insert(key, nt.nodes.len() - 1);
            }
            Ok(nt)
        };
        match t.side {
            TrackSide::Interior => {
                if let Some((i, q)) = inside {
                    return Ok(Advance::One(step_into(&t, i, TrackSide::Interior, Some(q))?));
                }
                match (at_right, at_left) {
                    (Some(j), Some(i)) => {
                        let a = step_into(&t, j, TrackSide::RightEnd, None)?;
                        let b = step_into(&t, i, TrackSide::LeftEnd, None)?;
                        Ok(Advance::Two(a, b))
                    }
                    (Some(j), None) => Ok(Advance::One(step_into(&t, j, TrackSide::RightEnd, None)?)),
                    (None, Some(i)) => Ok(Advance::One(step_into(&t, i, TrackSide::LeftEnd, None)?)),
                    (None, None) => Ok(Advance::Dead),
                }
            }
            TrackSide::LeftEnd => match at_left {
                Some(i) => Ok(Advance::One(step_into(&t, i, TrackSide::LeftEnd, None)?)),
                None => Ok(Advance::Dead),
            },
            TrackSide::RightEnd => match at_right {
                Some(j) => Ok(Advance::One(step_into(&t, j, TrackSide::RightEnd, None)?)),
                None => Ok(Advance::Dead),
            },
        }
    }
}

/// Adjacent-interval state for the windowed estimate: node id and the matrix
/// product from the root for the net interval on each side.
struct AdjState {
    left: Option<(usize, TransitionMatrix)>,
    right: Option<(usize, TransitionMatrix)>,
}

/// Symbolic descent of the net-interval tree at `x`, tracking the exact
/// position at every level.  Endpoint hits split the descent into both
/// one-sided representations; a repeated (node, position) state yields an
/// exact periodic dimension, otherwise a norm-based estimate at `depth`.
pub fn point_symbolic(
    d: &TransitionDiagram,
    x: &AlgebraicNumber,
    depth: u32,
) -> Result<PointResult, DimsError> {
    if !d.has_matrices() {
        return Err(DimsError::MissingProbs);
    }
    let spec = d.spec();
    let rho = spec.rho();
    let desc = Descender {
        d,
        inv_rho: rho.inverse(),
        rho,
        tol: default_tol(),
    };
    let root = d.root_id();
    let root_dim = d.node(root).cv.neighbours.len();
    let report = spec.report();
    let want_mn = !(report.is_regular && report.full_support_hull);

    let mut boundary = false;
    let base = Track {
        node: root,
        side: TrackSide::Interior,
        pos: None,
        nodes: vec![root],
        steps: Vec::new(),
        product: TransitionMatrix::identity(root_dim),
        seen: HashMap::new(),
        periodic: None,
    };
    let mut tracks: Vec<Track> = Vec::new();
    let mut adj: Option<AdjState> = None;
    match spec.mode() {
        Mode::Torus => {
            let xm = mod_one(x);
            if xm.is_zero() {
                boundary = true;
                let mut a = base.clone();
                a.side = TrackSide::LeftEnd;
                let mut b = base;
                b.side = TrackSide::RightEnd;
                tracks.push(a);
                tracks.push(b);
            } else {
                let mut t = base;
                t.pos = Some(xm);
                tracks.push(t);
                if want_mn {
                    // the level-0 interval wraps onto itself on the circle
                    adj = Some(AdjState {
                        left: Some((root, TransitionMatrix::identity(root_dim))),
                        right: Some((root, TransitionMatrix::identity(root_dim))),
                    });
                }
            }
        }
        Mode::Line => {
            if x.sign() < 0 || (spec.delta() - x).sign() < 0 {
                return Err(DimsError::OutsideSupport);
            }
            if x.is_zero() {
                let mut t = base;
                t.side = TrackSide::LeftEnd;
                tracks.push(t);
            } else if (spec.delta() - x).is_zero() {
                let mut t = base;
                t.side = TrackSide::RightEnd;
                tracks.push(t);
            } else {
                let mut t = base;
                t.pos = Some(x.clone());
                tracks.push(t);
                if want_mn {
                    adj = Some(AdjState {
                        left: None,
                        right: None,
                    });
                }
            }
        }
    }
    for t in &mut tracks {
        let k = t.key();
        t.seen.insert(k, 0);
    }

    for _ in 0..depth {
        if tracks.iter().all(|t| t.periodic.is_some()) {
            break;
        }
        let mut next: Vec<Track> = Vec::new();
        for t in tracks.drain(..) {
            if t.periodic.is_some() {
                next.push(t);
                continue;
            }
            // remember enough to update the adjacent-interval window
            let parent_node = t.node;
            let parent_product = t.product.clone();
            match desc.advance(t)? {
                Advance::One(nt) => {
                    if adj.is_some() {
                        if nt.side == TrackSide::Interior {
                            let ei = nt.steps.last().expect("stepped").1;
                            if let Some(a) = adj.as_mut() {
                                update_adjacent(d, a, parent_node, &parent_product, ei)?;
                            }
                        } else {
                            adj = None;
                        }
                    }
                    next.push(nt);
                }
                Advance::Two(a, b) => {
                    boundary = true;
                    adj = None;
                    next.push(a);
                    next.push(b);
                }
                Advance::Dead => {}
            }
        }
        tracks = next;
        if tracks.is_empty() {
            return Err(DimsError::OutsideSupport);
        }
    }

    let l2r = log2_rho(d);
    let mut reps: Vec<PointPath> = Vec::new();
    for t in &tracks {
        let n = (t.nodes.len() - 1) as u32;
        let estimate = if n > 0 {
            let norm = t.product.sum_norm();
            if norm.is_zero() {
                Some(f64::INFINITY)
            } else {
                Some(log2_rat(&norm) / (n as f64 * l2r))
            }
        } else {
            None
        };
        reps.push(PointPath {
            nodes: t.nodes.clone(),
            labels: t.nodes.iter().map(|&i| d.node(i).reduced_id + 1).collect(),
            side: t.side,
            periodic: t.periodic.clone(),
            estimate,
            depth: n,
        });
    }

    // the dimension at a two-representation point is the smaller of the two
    // one-sided values (equivalently, the larger spectral radius)
    let mut best: Option<(f64, Option<&PeriodicPoint>, Option<f64>, u32)> = None;
    for r in &reps {
        let (val, per) = match &r.periodic {
            Some(p) => (p.spectral.dim_mid(l2r), Some(p)),
            None => match r.estimate {
                Some(e) => (e, None),
                None => continue,
            },
        };
        let replace = match &best {
            None => true,
            Some((bv, _, _, _)) => val < *bv,
        };
        if replace {
            best = Some((val, per, r.estimate, r.depth));
        }
    }
    let (val, per, est, dep) = best.ok_or(DimsError::OutsideSupport)?;
    let value = match per {
        Some(p) => PointValue::Exact(p.clone()),
        None => {
            let mn_value = adj.as_ref().and_then(|a| {
                let t = &tracks[0];
                let n = (t.nodes.len() - 1) as u32;
                if n == 0 {
                    return None;
                }
                let mut total = t.product.sum_norm();
                if let Some((_, m)) = &a.left {
                    total += m.sum_norm();
                }
                if let Some((_, m)) = &a.right {
                    total += m.sum_norm();
                }
                if total.is_zero() {
                    None
                } else {
                    Some(log2_rat(&total) / (n as f64 * l2r))
                }
            });
            PointValue::Estimate {
                value: est.unwrap_or(val),
                mn_value,
                depth: dep,
            }
        }
    };
    Ok(PointResult {
        representations: reps,
        value,
        boundary,
    })
}

fn update_adjacent(
    d: &TransitionDiagram,
    a: &mut AdjState,
    parent: usize,
    parent_product: &TransitionMatrix,
    chosen_edge: usize,
) -> Result<(), DimsError> {
    let edges = &d.node(parent).edges;
    let new_left = if chosen_edge > 0 {
        let e = &edges[chosen_edge - 1];
        Some((
            e.child_id,
            parent_product.mul(e.matrix.as_ref().ok_or(DimsError::MissingProbs)?)?,
        ))
    } else {
        match &a.left {
            Some((ln, lp)) => {
                let le = d.node(*ln).edges.last().ok_or(DimsError::Truncated)?;
                Some((
                    le.child_id,
                    lp.mul(le.matrix.as_ref().ok_or(DimsError::MissingProbs)?)?,
                ))
            }
            None => None,
        }
    };
    let new_right = if chosen_edge + 1 < edges.len() {
        let e = &edges[chosen_edge + 1];
        Some((
            e.child_id,
            parent_product.mul(e.matrix.as_ref().ok_or(DimsError::MissingProbs)?)?,
        ))
    } else {
        match &a.right {
            Some((rn, rp)) => {
                let re = d.node(*rn).edges.first().ok_or(DimsError::Truncated)?;
                Some((
                    re.child_id,
                    rp.mul(re.matrix.as_ref().ok_or(DimsError::MissingProbs)?)?,
                ))
            }
            None => None,
        }
    };
    a.left = new_left;
    a.right = new_right;
    Ok(())
}

// ---------------------------------------------------------------------------
// exact equality of per-step spectral values (characteristic polynomials)

/// Polynomials over ℚ, ascending coefficients, no trailing zeros.
type Poly = Vec<Rat>;

fn poly_trim(p: &mut Poly) {
    while let Some(last) = p.last() {
        if last.is_zero() {
            p.pop();
        } else {
            break;
        }
    }
}

fn poly_eval(p: &Poly, x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in p.iter().rev() {
        acc = &acc * x + c;
    }
    acc
}

fn poly_deriv(p: &Poly) -> Poly {
    if p.len() <= 1 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(p.len() - 1);
    for (i, c) in p.iter().enumerate().skip(1) {
        out.push(c * Rat::from_integer(Int::from(i as u64)));
    }
    poly_trim(&mut out);
    out
}

fn poly_rem(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead = b.last().expect("nonzero divisor");
    while r.len() > db {
        let dr = r.len() - 1;
        let f = r.last().unwrap() / lead;
        let shift = dr - db;
        for i in 0..=db {
            let sub = &f * &b[i];
            r[shift + i] = &r[shift + i] - &sub;
        }
        r.pop();
        poly_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn poly_monic(mut p: Poly) -> Poly {
    poly_trim(&mut p);
    if let Some(lead) = p.last().cloned() {
        for c in &mut p {
            *c = &*c / &lead;
        }
    }
    p
}

fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    let mut r0 = poly_monic(a.clone());
    let mut r1 = poly_monic(b.clone());
    if r0.len() < r1.len() {
        std::mem::swap(&mut r0, &mut r1);
    }
    while !r1.is_empty() {
        let r2 = poly_monic(poly_rem(&r0, &r1));
        r0 = r1;
        r1 = r2;
    }
    r0
}

fn sign_of(r: &Rat) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Number of distinct real roots in `(a, b]` by Sturm's theorem.
fn count_roots_in(p: &Poly, a: &Rat, b: &Rat) -> usize {
    let mut chain: Vec<Poly> = Vec::new();
    let mut p0 = p.clone();
    poly_trim(&mut p0);
    if p0.len() <= 1 {
        return 0;
    }
    let p1 = poly_deriv(&p0);
    chain.push(p0);
    chain.push(p1);
    loop {
        let k = chain.len();
        if chain[k - 1].is_empty() {
            chain.pop();
            break;
        }
        if chain[k - 1].len() == 1 {
            break;
        }
        let mut r = poly_rem(&chain[k - 2], &chain[k - 1]);
        for c in &mut r {
            *c = -&*c;
        }
        poly_trim(&mut r);
        chain.push(r);
    }
    let variations = |x: &Rat| -> usize {
        let mut count = 0;
        let mut last: i8 = 0;
        for q in &chain {
            let s = sign_of(&poly_eval(q, x));
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    };
    let va = variations(a);
    let vb = variations(b);
    va.saturating_sub(vb)
}

/// Characteristic polynomial (monic, ascending coefficients) of a square
/// matrix, by the trace recursion on successive products.
fn char_poly(m: &TransitionMatrix) -> Result<Poly, SpectraError> {
    if !m.is_square() {
        return Err(SpectraError::NotSquare(m.rows(), m.cols()));
    }
    let n = m.rows();
    let a: Vec<Rat> = m.entries().to_vec();
    let raw_mul = |x: &Vec<Rat>, y: &Vec<Rat>| -> Vec<Rat> {
        let mut out = vec![Rat::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                if x[i * n + k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if y[k * n + j].is_zero() {
                        continue;
                    }
                    let add = &x[i * n + k] * &y[k * n + j];
                    out[i * n + j] = &out[i * n + j] + &add;
                }
            }
        }
        out
    };
    let trace = |x: &Vec<Rat>| -> Rat {
        let mut t = Rat::zero();
        for i in 0..n {
            t = &t + &x[i * n + i];
        }
        t
    };
    let mut coeffs = vec![Rat::zero(); n + 1];
    coeffs[n] = Rat::one();
    let mut mk = a.clone();
    let mut ck = -trace(&mk);
    coeffs[n - 1] = ck.clone();
    for k in 2..=n {
        let mut shifted = mk;
        for i in 0..n {
            shifted[i * n + i] = &shifted[i * n + i] + &ck;
        }
        mk = raw_mul(&a, &shifted);
        ck = -(trace(&mk) / Rat::from_integer(Int::from(k as u64)));
        coeffs[n - k] = ck.clone();
    }
    Ok(coeffs)
}

/// Decides `sp(a)^(1/a_steps) == sp(b)^(1/b_steps)` exactly, by comparing
/// the spectral radii of the cross-powered matrices through their
/// characteristic polynomials.  Returns false when equality cannot be
/// certified.
fn per_step_equal(
    a_mat: &TransitionMatrix,
    a_steps: u32,
    b_mat: &TransitionMatrix,
    b_steps: u32,
) -> Result<bool, DimsError> {
    let g = {
        let (mut x, mut y) = (a_steps.max(1), b_steps.max(1));
        while y != 0 {
            let r = x % y;
            x = y;
            y = r;
        }
        x
    };
    let p = matrix_power(a_mat, b_steps.max(1) / g)?;
    let q = matrix_power(b_mat, a_steps.max(1) / g)?;
    let tol = Rat::new(Int::one(), int_pow(&Int::from(10), 12));
    let bp = spectral_radius(&p, &tol)?;
    let bq = spectral_radius(&q, &tol)?;
    if bp.hi.is_zero() && bq.hi.is_zero() {
        return Ok(true);
    }
    if bp.hi < bq.lo || bq.hi < bp.lo {
        return Ok(false);
    }
    if bp.lo == bp.hi && bq.lo == bq.hi {
        return Ok(bp.lo == bq.lo);
    }
    if !bp.lo.is_positive() || !bq.lo.is_positive() {
        return Ok(false);
    }
    let f = char_poly(&p)?;
    let gq = char_poly(&q)?;
    let h = poly_gcd(&f, &gq);
    if h.len() <= 1 {
        return Ok(false);
    }
    let mut lo = if bp.lo < bq.lo { bp.lo.clone() } else { bq.lo.clone() };
    let hi = if bp.hi > bq.hi { bp.hi.clone() } else { bq.hi.clone() };
    // push the lower endpoint strictly below both brackets and off any root
    let mut eps = (&hi - &lo + Rat::new(Int::one(), int_pow(&Int::from(2), 60)))
        / Rat::from_integer(Int::from(1024));
    loop {
        lo = &lo - &eps;
        if !poly_eval(&f, &lo).is_zero() && !poly_eval(&gq, &lo).is_zero() {
            break;
        }
        eps = &eps / Rat::from_integer(Int::from(3));
    }
    let unique_f = count_roots_in(&f, &lo, &hi) == 1;
    let unique_g = count_roots_in(&gq, &lo, &hi) == 1;
    let shared = count_roots_in(&h, &lo, &hi) >= 1;
    Ok(unique_f && unique_g && shared)
}

// ---------------------------------------------------------------------------
// isolated-value report

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Strictly outside every essential class's certified outer interval.
    Isolated,
    /// Certified inside some essential class's inner interval.
    InsideEssential,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Isolated => write!(f, "isolated"),
            Verdict::InsideEssential => write!(f, "inside-essential-interval"),
            Verdict::Undecided => write!(f, "undecided"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EssentialDims {
    /// Index into `ClassReport::classes`.
    pub class_index: usize,
    pub labels: Vec<usize>,
    pub inner: InnerInterval,
    pub outer: OuterInterval,
}

#[derive(Clone, Debug)]
pub struct CandidateDims {
    pub class_index: usize,
    pub labels: Vec<usize>,
    /// Dimension range realized by the class's own cycles (degenerate for a
    /// simple loop).
    pub dim_lo: f64,
    pub dim_hi: f64,
    pub inner: InnerInterval,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct ReportParams {
    pub cycle_len: u32,
    pub outer: OuterParams,
    pub tol: Rat,
    pub cycle_cap: u64,
}

impl Default for ReportParams {
    fn default() -> Self {
        ReportParams {
            cycle_len: DEFAULT_CYCLE_LEN,
            outer: OuterParams::default(),
            tol: default_tol(),
            cycle_cap: DEFAULT_CYCLE_CAP,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DimensionReport {
    pub essentials: Vec<EssentialDims>,
    pub candidates: Vec<CandidateDims>,
    /// Certified isolated dimension values (deduplicated midpoints).
    pub isolated_dims: Vec<f64>,
    /// Merged essential inner intervals plus certified isolated values.
    pub component_count: usize,
    pub undecided_count: usize,
    pub warnings: Vec<String>,
}

/// Full dimension analysis: per-essential-class inner/outer intervals, and a
/// verdict for every non-essential loop class's dimension values.
pub fn isolated_report(
    d: &TransitionDiagram,
    classes: &ClassReport,
    params: &ReportParams,
) -> Result<DimensionReport, DimsError> {
    if !d.has_matrices() {
        return Err(DimsError::MissingProbs);
    }
    let mut warnings = Vec::new();
    if let Some(w) = &classes.truncated_warning {
        warnings.push(w.clone());
    }
    let mut essentials = Vec::new();
    for (ci, c) in classes.classes.iter().enumerate() {
        if c.kind != ClassKind::Essential {
            continue;
        }
        let inner = inner_interval(d, c, params.cycle_len, &params.tol, params.cycle_cap)?;
        let outer = outer_interval(d, c, &params.outer)?;
        for w in &outer.warnings {
            warnings.push(format!("essential class {:?}: {w}", c.labels_1based()));
        }
        if !inner_within_outer(&inner, &outer) {
            warnings.push(format!(
                "essential class {:?}: inner interval escapes the outer bounds",
                c.labels_1based()
            ));
        }
        essentials.push(EssentialDims {
            class_index: ci,
            labels: c.labels_1based(),
            inner,
            outer,
        });
    }
    let l2r = log2_rho(d);
    let mut candidates = Vec::new();
    for (ci, c) in classes.classes.iter().enumerate() {
        if c.kind == ClassKind::Essential {
            continue;
        }
        let max_len = params.cycle_len.max(c.nodes.len() as u32);
        let inner = inner_interval(d, c, max_len, &params.tol, params.cycle_cap)?;
        let verdict = classify_candidate(&inner, &essentials)?;
        candidates.push(CandidateDims {
            class_index: ci,
            labels: c.labels_1based(),
            dim_lo: inner.max.spectral.dim_mid(l2r),
            dim_hi: inner.min.spectral.dim_mid(l2r),
            inner,
            verdict,
        });
    }
    // Collect certified dimension intervals of the isolated candidates and
    // merge the overlapping ones: two candidates carrying the same true value
    // have overlapping brackets, so each merged group is one distinct value.
    let mut iso_ivals: Vec<(f64, f64)> = Vec::new();
    let mut undecided_count = 0usize;
    for c in &candidates {
        match c.verdict {
            Verdict::Isolated => {
                let (lo1, hi1) = c.inner.max.spectral.dim_interval(l2r);
                let (lo2, hi2) = c.inner.min.spectral.dim_interval(l2r);
                iso_ivals.push((lo1.min(lo2), hi1.max(hi2)));
            }
            Verdict::Undecided => undecided_count += 1,
            Verdict::InsideEssential => {}
        }
    }
    iso_ivals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut isolated_dims: Vec<f64> = Vec::new();
    let mut group: Option<(f64, f64)> = None;
    for (lo, hi) in iso_ivals {
        match &mut group {
            Some((_, ghi)) if lo <= *ghi => *ghi = ghi.max(hi),
            _ => {
                if let Some((glo, ghi)) = group.take() {
                    isolated_dims.push(0.5 * (glo + ghi));
                }
                group = Some((lo, hi));
            }
        }
    }
    if let Some((glo, ghi)) = group {
        isolated_dims.push(0.5 * (glo + ghi));
    }
    // merge the essential inner intervals on the dimension axis
    let mut intervals: Vec<(f64, f64)> = essentials
        .iter()
        .map(|e| (e.inner.dim_lo, e.inner.dim_hi))
        .collect();
    intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged = 0usize;
    let mut cur_hi = f64::NEG_INFINITY;
    for (lo, hi) in intervals {
        if lo > cur_hi {
            merged += 1;
            cur_hi = hi;
        } else if hi > cur_hi {
            cur_hi = hi;
        }
    }
    let component_count = merged + isolated_dims.len();
    if undecided_count > 0 {
        warnings.push(format!(
            "{undecided_count} candidate class(es) could not be classified"
        ));
    }
    Ok(DimensionReport {
        essentials,
        candidates,
        isolated_dims,
        component_count,
        undecided_count,
        warnings,
    })
}

fn classify_candidate(
    cand: &InnerInterval,
    essentials: &[EssentialDims],
) -> Result<Verdict, DimsError> {
    // Isolated: the candidate's spectral range misses every outer interval.
    let mut outside_all = true;
    for e in essentials {
        let above_spectral = match &e.outer.spectral_lo {
            Some(lo) => cand.min.spectral.gt(&e.outer.spectral_hi) || cand.max.spectral.lt(lo),
            // no lower spectral bound: the outer interval reaches dimension
            // +∞, so the candidate can only escape on the high-spectral side
            None => cand.min.spectral.gt(&e.outer.spectral_hi),
        };
        if !above_spectral {
            outside_all = false;
            break;
        }
    }
    if outside_all && !essentials.is_empty() {
        return Ok(Verdict::Isolated);
    }
    // Inside: candidate range within some inner interval (allowing exact
    // endpoint coincidences).
    for e in essentials {
        let min_ok = e.inner.min.spectral.lt(&cand.min.spectral)
            || per_step_equal(
                &e.inner.min_matrix,
                e.inner.min.spectral.steps,
                &cand.min_matrix,
                cand.min.spectral.steps,
            )?;
        if !min_ok {
            continue;
        }
        let max_ok = cand.max.spectral.lt(&e.inner.max.spectral)
            || per_step_equal(
                &cand.max_matrix,
                cand.max.spectral.steps,
                &e.inner.max_matrix,
                e.inner.max.spectral.steps,
            )?;
        if max_ok {
            return Ok(Verdict::InsideEssential);
        }
    }
    Ok(Verdict::Undecided)
}

// ---------------------------------------------------------------------------
// CSV report

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fmt_dim(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.9}")
    } else {
        "inf".to_string()
    }
}

fn labels_path(labels: &[usize]) -> String {
    labels
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// One CSV row per loop class: labels, kind, positivity, certified interval
/// data, witnesses, and the isolation verdict for non-essential classes.
pub fn dims_csv(classes: &ClassReport, report: &DimensionReport) -> String {
    let mut out = String::from(
        "class,labels,kind,positive,simple,inner_lo,inner_hi,outer_lo,outer_hi,\
         witness_low_dim,witness_high_dim,verdict\n",
    );
    for e in &report.essentials {
        let c = &classes.classes[e.class_index];
        out.push_str(&format!(
            "{},{},{},{:?},{},{},{},{},{},{},{},{}\n",
            e.class_index,
            csv_field(&labels_path(&e.labels)),
            c.kind,
            c.positivity,
            c.is_simple,
            fmt_dim(e.inner.dim_lo),
            fmt_dim(e.inner.dim_hi),
            fmt_dim(e.outer.dim_lo),
            fmt_dim(e.outer.dim_hi),
            csv_field(&labels_path(&e.inner.max.labels)),
            csv_field(&labels_path(&e.inner.min.labels)),
            ""
        ));
    }
    for cand in &report.candidates {
        let c = &classes.classes[cand.class_index];
        out.push_str(&format!(
            "{},{},{},{:?},{},{},{},{},{},{},{},{}\n",
            cand.class_index,
            csv_field(&labels_path(&cand.labels)),
            c.kind,
            c.positivity,
            c.is_simple,
            fmt_dim(cand.dim_lo),
            fmt_dim(cand.dim_hi),
            "",
            "",
            csv_field(&labels_path(&cand.inner.max.labels)),
            csv_field(&labels_path(&cand.inner.min.labels)),
            cand.verdict
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::loop_classes;
    use crate::model::tests_support::{
        cantor_convolution, golden_spec, isolated_point_spec, middle_third_spec, rat,
        strictsep_spec,
    };
    use crate::netgen::{closure, ClosureCaps};
    use crate::numberfield::FieldContext;
    use std::collections::HashSet;

    fn build(spec: MeasureSpec) -> TransitionDiagram {
        closure(&spec, &ClosureCaps::default())
    }

    fn class_by_labels<'a>(r: &'a ClassReport, labels: &[usize]) -> &'a LoopClass {
        r.classes
            .iter()
            .find(|c| c.labels_1based() == labels)
            .unwrap_or_else(|| panic!("no loop class with labels {labels:?}"))
    }

    /// The unique node cycle of a simple loop class (first == last).
    fn simple_cycle(d: &TransitionDiagram, c: &LoopClass) -> Vec<usize> {
        let set: HashSet<usize> = c.nodes.iter().copied().collect();
        let mut cur = c.nodes[0];
        let mut cyc = vec![cur];
        loop {
            let e = d
                .node(cur)
                .edges
                .iter()
                .find(|e| set.contains(&e.child_id))
                .expect("loop class node with internal edge");
            cur = e.child_id;
            cyc.push(cur);
            if cur == cyc[0] {
                return cyc;
            }
        }
    }

    #[test]
    fn isolated_point_loop_dims_are_exact() {
        let d = build(isolated_point_spec());
        let r = loop_classes(&d);
        for (labels, want) in [
            (vec![7usize], 2.293082124),
            (vec![6], 2.293082124),
            (vec![5], 2.285974508),
        ] {
            let c = class_by_labels(&r, &labels);
            let cyc = simple_cycle(&d, c);
            let p = periodic_dim(&d, &cyc, &default_tol()).unwrap();
            let got = p.dim_mid(&d);
            assert!(
                (got - want).abs() < 1e-6,
                "labels {labels:?}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn golden_line_boundary_and_interior_loop_dims() {
        let d = build(golden_spec(Mode::Line));
        let r = loop_classes(&d);
        for (labels, want) in [
            (vec![2usize], 2.880840181),
            (vec![6], 2.880840181),
            (vec![19], 0.992399434),
            (vec![25], 0.992399434),
        ] {
            let c = class_by_labels(&r, &labels);
            let cyc = simple_cycle(&d, c);
            let p = periodic_dim(&d, &cyc, &default_tol()).unwrap();
            let got = p.dim_mid(&d);
            assert!(
                (got - want).abs() < 1e-6,
                "labels {labels:?}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn periodic_dim_is_rotation_and_repetition_invariant() {
        let d = build(golden_spec(Mode::Torus));
        let r = loop_classes(&d);
        let ess = r
            .classes
            .iter()
            .find(|c| c.kind == ClassKind::Essential)
            .unwrap();
        // find any internal 2-cycle a -> b -> a with distinct nodes
        let set: HashSet<usize> = ess.nodes.iter().copied().collect();
        let mut pair = None;
        'outer: for &a in &ess.nodes {
            for e in &d.node(a).edges {
                let b = e.child_id;
                if b != a && set.contains(&b) {
                    if d.node(b).edges.iter().any(|f| f.child_id == a) {
                        pair = Some((a, b));
                        break 'outer;
                    }
                }
            }
        }
        let (a, b) = pair.expect("essential class contains a 2-cycle");
        let tol = default_tol();
        let d1 = periodic_dim(&d, &[a, b, a], &tol).unwrap().dim_mid(&d);
        let d2 = periodic_dim(&d, &[b, a, b], &tol).unwrap().dim_mid(&d);
        let d3 = periodic_dim(&d, &[a, b, a, b, a], &tol).unwrap().dim_mid(&d);
        assert!((d1 - d2).abs() < 1e-8, "rotation changed the value: {d1} vs {d2}");
        assert!((d1 - d3).abs() < 1e-8, "repetition changed the value: {d1} vs {d3}");
    }

    #[test]
    fn display_scaled_spectral_values_cancel_exactly() {
        let d = build(golden_spec(Mode::Torus));
        let r = loop_classes(&d);
        let c = class_by_labels(&r, &[16]);
        let cyc = simple_cycle(&d, c);
        let p = periodic_dim(&d, &cyc, &default_tol()).unwrap();
        let l2r = log2_rho(&d);
        let true_dim = p.spectral.dim_mid(l2r);
        // same value recomputed from the display-scaled bracket
        let scale = Rat::from_integer(d.spec().prob_scale());
        let factor = rat_pow(&scale, p.spectral.steps);
        let scaled_mid = p.spectral.mid() * &factor;
        let scaled_dim = (log2_rat(&scaled_mid) - p.spectral.steps as f64 * log2_rat(&scale))
            / (p.spectral.steps as f64 * l2r);
        assert!(
            (true_dim - scaled_dim).abs() < 1e-12,
            "{true_dim} vs {scaled_dim}"
        );
    }

    #[test]
    fn golden_torus_inner_interval_matches_published_values() {
        let d = build(golden_spec(Mode::Torus));
        let r = loop_classes(&d);
        let ess = r
            .classes
            .iter()
            .find(|c| c.kind == ClassKind::Essential)
            .unwrap();
        let inner = inner_interval(&d, ess, 4, &default_tol(), DEFAULT_CYCLE_CAP).unwrap();
        assert!(
            (inner.dim_lo - 0.992399434).abs() < 1e-6,
            "dim_lo {}",
            inner.dim_lo
        );
        assert!(
            (inner.dim_hi - 1.002504754).abs() < 1e-6,
            "dim_hi {}",
            inner.dim_hi
        );
        assert_eq!(inner.max.labels, vec![26, 31, 26], "low-dim witness");
        assert_eq!(inner.min.labels, vec![27, 33, 37, 27], "high-dim witness");
        assert!(inner.complete);
    }

    #[test]
    fn isolated_point_inner_interval_matches_published_values() {
        let d = build(isolated_point_spec());
        let r = loop_classes(&d);
        let ess = r
            .classes
            .iter()
            .find(|c| c.kind == ClassKind::Essential)
            .unwrap();
        let inner = inner_interval(&d, ess, 5, &default_tol(), DEFAULT_CYCLE_CAP).unwrap();
        assert!(
            (inner.dim_lo - 0.628346304).abs() < 1e-6,
            "dim_lo {}",
            inner.dim_lo
        );
        assert!(
            (inner.dim_hi - 1.885322743).abs() < 1e-6,
            "dim_hi {}",
            inner.dim_hi
        );
    }

    #[test]
    fn isolated_point_outer_interval_at_depth_five() {
        let d = build(isolated_point_spec());
        let r = loop_classes(&d);
        let ess = r
            .classes
            .iter()
            .find(|c| c.kind == ClassKind::Essential)
            .unwrap();
        let params = OuterParams {
            depth_lo: 5,
            depth_hi: 5,
            ..OuterParams::default()
        };
        let outer = outer_interval(&d, ess, &params).unwrap();
        assert!(
            (outer.dim_lo - 0.614294428).abs() < 1e-6,
            "dim_lo {}",
            outer.dim_lo
        );
        assert!(
            (outer.dim_hi - 2.052681190).abs() < 1e-6,
            "dim_hi {}",
            outer.dim_hi
        );
        let inner = inner_interval(&d, ess, 5, &default_tol(), DEFAULT_CYCLE_CAP).unwrap();
        assert!(inner_within_outer(&inner, &outer));
    }

    #[test]
    fn strict_separation_closed_form_values() {
        let cf = sss_interval(&strictsep_spec(Mode::Torus)).unwrap();
        assert!((cf.dim_lo - 0.20751874963942187).abs() < 1e-12, "{}", cf.dim_lo);
        assert_eq!(cf.dim_hi, 1.0);
        // equal probabilities collapse the interval
        let ctx = FieldContext::rational(&rat(1, 4)).unwrap();
        let digits = vec![ctx.zero(), ctx.from_rat(&rat(3, 2))];
        let spec =
            MeasureSpec::new(ctx, digits, vec![rat(1, 2), rat(1, 2)], Mode::Line).unwrap();
        let cf2 = sss_interval(&spec).unwrap();
        assert_eq!(cf2.dim_lo, cf2.dim_hi);
        assert_eq!(cf2.dim_lo, 0.5);
        // full-support specs must be rejected
        assert!(matches!(
            sss_interval(&golden_spec(Mode::Torus)),
            Err(DimsError::NotStronglySeparated)
        ));
    }

    #[test]
    fn strict_separation_pipeline_agrees_with_closed_form() {
        let spec = strictsep_spec(Mode::Torus);
        let cf = sss_interval(&spec).unwrap();
        let d = build(spec);
        let r = loop_classes(&d);
        let ess: Vec<&LoopClass> = r
            .classes
            .iter()
            .filter(|c| c.kind == ClassKind::Essential)
            .collect();
        assert_eq!(ess.len(), 1);
        assert_eq!(ess[0].reduced_labels.len(), 1);
        let disp = d.reduced_classes()[ess[0].reduced_labels[0]].display();
        assert_eq!(disp, "(2, (0))");
        let inner = inner_interval(&d, ess[0], 2, &default_tol(), DEFAULT_CYCLE_CAP).unwrap();
        assert!(
            (inner.dim_lo - cf.dim_lo).abs() < 1e-9,
            "{} vs {}",
            inner.dim_lo,
            cf.dim_lo
        );
        assert!(
            (inner.dim_hi - cf.dim_hi).abs() < 1e-9,
            "{} vs {}",
            inner.dim_hi,
            cf.dim_hi
        );
        // outer bounds collapse onto the same interval for 1×1 loops
        let params = OuterParams {
            depth_lo: 3,
            depth_hi: 3,
            ..OuterParams::default()
        };
        let outer = outer_interval(&d, ess[0], &params).unwrap();
        assert!((outer.dim_lo - cf.dim_lo).abs() < 1e-9);
        assert!((outer.dim_hi - cf.dim_hi).abs() < 1e-9);
    }

    #[test]
    fn point_seven_eighths_is_eventually_periodic() {
        let d = build(isolated_point_spec());
        let x = d.spec().field().from_rat(&rat(7, 8));
        let res = point_symbolic(&d, &x, 40).unwrap();
        match &res.value {
            PointValue::Exact(p) => {
                let got = p.dim_mid(&d);
                assert!((got - 2.293082124).abs() < 1e-6, "got {got}");
            }
            other => panic!("expected an exact periodic value, got {other:?}"),
        }
    }

    #[test]
    fn left_fixed_point_of_threefold_convolution() {
        let d = build(cantor_convolution(3, 3, Mode::Line));
        let x = d.spec().field().zero();
        let res = point_symbolic(&d, &x, 30).unwrap();
        match &res.value {
            PointValue::Exact(p) => {
                let want = (1f64 / 8.0).ln() / (1f64 / 3.0).ln();
                let got = p.dim_mid(&d);
                assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
                assert!(!p.interior);
            }
            other => panic!("expected an exact periodic value, got {other:?}"),
        }
    }

    #[test]
    fn middle_third_interior_point_is_periodic() {
        let d = build(middle_third_spec());
        let x = d.spec().field().from_rat(&rat(1, 4));
        let res = point_symbolic(&d, &x, 40).unwrap();
        let want = 2f64.ln() / 3f64.ln();
        let got = match &res.value {
            PointValue::Exact(p) => p.dim_mid(&d),
            PointValue::Estimate { value, .. } => *value,
        };
        assert!((got - want).abs() < 0.02, "got {got}, want {want}");
    }

    #[test]
    fn middle_third_gap_point_is_outside_support() {
        let d = build(middle_third_spec());
        let x = d.spec().field().from_rat(&rat(1, 2));
        assert!(matches!(
            point_symbolic(&d, &x, 10),
            Err(DimsError::OutsideSupport)
        ));
    }

    #[test]
    fn one_sided_endpoint_follows_the_right_representation() {
        let d = build(middle_third_spec());
        let x = d.spec().field().from_rat(&rat(1, 3));
        let res = point_symbolic(&d, &x, 30).unwrap();
        assert_eq!(res.representations.len(), 1);
        assert_eq!(res.representations[0].side, TrackSide::RightEnd);
        match &res.value {
            PointValue::Exact(p) => {
                let want = 2f64.ln() / 3f64.ln();
                let got = p.dim_mid(&d);
                assert!((got - want).abs() < 1e-9, "got {got}");
            }
            other => panic!("expected exact value, got {other:?}"),
        }
    }

    #[test]
    fn char_poly_and_root_counting() {
        let m = TransitionMatrix::from_i64_rows(&[&[2, 1], &[1, 2]]);
        let p = char_poly(&m).unwrap();
        assert_eq!(p, vec![rat(3, 1), rat(-4, 1), rat(1, 1)]);
        // roots are 1 and 3
        assert_eq!(count_roots_in(&p, &rat(0, 1), &rat(2, 1)), 1);
        assert_eq!(count_roots_in(&p, &rat(0, 1), &rat(4, 1)), 2);
        assert_eq!(count_roots_in(&p, &rat(2, 1), &rat(5, 2)), 0);
    }

    #[test]
    fn per_step_equality_detects_matching_growth() {
        let a = TransitionMatrix::from_i64_rows(&[&[4]]);
        let b = TransitionMatrix::from_i64_rows(&[&[2]]);
        assert!(per_step_equal(&a, 2, &b, 1).unwrap());
        let c = TransitionMatrix::from_i64_rows(&[&[2, 1], &[1, 2]]);
        let d3 = TransitionMatrix::from_i64_rows(&[&[3]]);
        assert!(per_step_equal(&c, 1, &d3, 1).unwrap());
        assert!(!per_step_equal(&b, 1, &d3, 1).unwrap());
    }

    #[test]
    fn isolated_point_report_finds_two_isolated_values() {
        let d = build(isolated_point_spec());
        let r = loop_classes(&d);
        let params = ReportParams {
            cycle_len: 5,
            outer: OuterParams {
                depth_lo: 5,
                depth_hi: 5,
                ..OuterParams::default()
            },
            ..ReportParams::default()
        };
        let rep = isolated_report(&d, &r, &params).unwrap();
        assert_eq!(rep.essentials.len(), 1);
        assert_eq!(rep.candidates.len(), 3);
        for c in &rep.candidates {
            assert_eq!(c.verdict, Verdict::Isolated, "labels {:?}", c.labels);
        }
        assert_eq!(rep.isolated_dims.len(), 2, "dims {:?}", rep.isolated_dims);
        assert!((rep.isolated_dims[0] - 2.285974508).abs() < 1e-6);
        assert!((rep.isolated_dims[1] - 2.293082124).abs() < 1e-6);
        assert_eq!(rep.component_count, 3);
        assert_eq!(rep.undecided_count, 0);
    }

    #[test]
    fn golden_torus_report_has_a_single_component() {
        let d = build(golden_spec(Mode::Torus));
        let r = loop_classes(&d);
        let params = ReportParams {
            cycle_len: 4,
            outer: OuterParams {
                depth_lo: 6,
                depth_hi: 4,
                ..OuterParams::default()
            },
            ..ReportParams::default()
        };
        let rep = isolated_report(&d, &r, &params).unwrap();
        for c in &rep.candidates {
            assert_eq!(
                c.verdict,
                Verdict::InsideEssential,
                "labels {:?} dim {}",
                c.labels,
                c.dim_lo
            );
        }
        assert!(rep.isolated_dims.is_empty());
        assert_eq!(rep.component_count, 1);
    }

    #[test]
    fn csv_report_has_one_row_per_loop_class() {
        let d = build(isolated_point_spec());
        let r = loop_classes(&d);
        let params = ReportParams {
            cycle_len: 5,
            outer: OuterParams {
                depth_lo: 4,
                depth_hi: 4,
                ..OuterParams::default()
            },
            ..ReportParams::default()
        };
        let rep = isolated_report(&d, &r, &params).unwrap();
        let csv = dims_csv(&r, &rep);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), r.classes.len() + 1);
        assert!(lines[0].starts_with("class,labels,kind"));
        assert!(csv.contains("isolated"));
    }
}
