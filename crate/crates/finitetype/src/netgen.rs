//! Symbolic net-interval enumeration.
//!
//! A measure's hull `[0, δ]` (or the unit circle in torus mode) subdivides at
//! every level into *net intervals*: maximal intervals whose endpoints are
//! iterated-map images of the hull endpoints and whose interior meets the
//! attractor.  Each net interval is summarised by a *characteristic vector*
//! `(length, neighbours, sibling index)`, all in exact field arithmetic:
//!
//! * `length` — the interval length divided by ϱⁿ at level n;
//! * `neighbours` — the normalized left-relative positions of the level-n
//!   cylinder hulls whose interior image of the attractor meets the interval,
//!   in increasing order;
//! * `sibling index` — the left-to-right rank among the children of the same
//!   parent sharing the same `(length, neighbours)` pair.
//!
//! Finite type means only finitely many characteristic vectors occur; the
//! closure below discovers them breadth-first and records, per parent→child
//! edge, the weight-transfer matrix used by all later dimension analysis.

use crate::model::{MeasureSpec, Mode};
use crate::numberfield::{AlgebraicNumber, NfError, Rat};
use crate::spectra::{SpectraError, TransitionMatrix};
use num_traits::Zero;
use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error(
        "attractor-intersection oracle exceeded {cap} distinct questions; \
         the input may not be of finite type"
    )]
    QuestionCap { cap: usize },
    #[error("field arithmetic: {0}")]
    Field(#[from] NfError),
    #[error("matrix construction: {0}")]
    Matrix(#[from] SpectraError),
}

// ---------------------------------------------------------------------------
// characteristic vectors

/// Symbolic description of a net interval (see module docs).  Identity —
/// equality and hashing — uses the full triple including the sibling index;
/// the `(length, neighbours)` pair alone is the *reduced* form.
#[derive(Clone)]
pub struct CharacteristicVector {
    pub length: AlgebraicNumber,
    pub neighbours: Vec<AlgebraicNumber>,
    pub sibling_index: u32,
}

pub(crate) type ReducedKey = (Vec<Rat>, Vec<Vec<Rat>>);
type FullKey = (Vec<Rat>, Vec<Vec<Rat>>, u32);

impl CharacteristicVector {
    pub fn reduced_key(&self) -> ReducedKey {
        (
            self.length.lex_key(),
            self.neighbours.iter().map(|a| a.lex_key()).collect(),
        )
    }

    fn full_key(&self) -> FullKey {
        let (l, n) = self.reduced_key();
        (l, n, self.sibling_index)
    }

    /// Human-readable reduced form, e.g. `(2, (0, 2))`.
    pub fn reduced_display(&self) -> String {
        let nbrs: Vec<String> = self.neighbours.iter().map(|a| a.to_string()).collect();
        format!("({}, ({}))", self.length, nbrs.join(", "))
    }
}

impl PartialEq for CharacteristicVector {
    fn eq(&self, other: &Self) -> bool {
        self.sibling_index == other.sibling_index
            && self.length == other.length
            && self.neighbours == other.neighbours
    }
}

impl Eq for CharacteristicVector {}

impl std::hash::Hash for CharacteristicVector {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.full_key().hash(state);
    }
}

impl fmt::Debug for CharacteristicVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.reduced_display(), self.sibling_index)
    }
}

impl fmt::Display for CharacteristicVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nbrs: Vec<String> = self.neighbours.iter().map(|a| a.to_string()).collect();
        write!(
            f,
            "({}, ({}), {})",
            self.length,
            nbrs.join(", "),
            self.sibling_index
        )
    }
}

/// One parent→child subdivision step.
#[derive(Clone, Debug)]
pub struct ChildEdge {
    /// Left endpoint of the child inside the parent's normalized frame.
    pub offset: AlgebraicNumber,
    pub child: CharacteristicVector,
    /// Weight-transfer matrix (parent neighbours × child neighbours);
    /// `None` when the spec carries no probabilities.
    pub matrix: Option<TransitionMatrix>,
}

// ---------------------------------------------------------------------------
// attractor-intersection oracle

/// Decides exactly whether the attractor K of the line IFS meets an open
/// interval `(u, v)`.
///
/// K meets `(u, v)` iff some cylinder hull is contained in `(u, v)`; since the
/// hull of a cylinder over digit `d` is the ϱ-scaled translate of the full
/// hull, the question rewrites to the scaled questions `((u−d)/ϱ, (v−d)/ϱ)`.
/// Both hull endpoints 0 and δ lie in K, so any interval straddling either
/// endpoint answers `true` immediately; intervals outside `(0, δ)` answer
/// `false`.  Remaining "live" questions satisfy `0 ≤ u < v ≤ δ` and, for
/// finite-type inputs, form a finite graph — the answer is plain reachability
/// of an immediately-true question, computed by full subgraph enumeration and
/// reverse propagation, then memoized for every question encountered.
pub struct KOracle {
    rho_inv: AlgebraicNumber,
    digits: Vec<AlgebraicNumber>,
    delta: AlgebraicNumber,
    cap: usize,
    memo: RefCell<HashMap<(Vec<Rat>, Vec<Rat>), bool>>,
}

enum QClass {
    False,
    True,
    Live,
}

impl KOracle {
    pub fn new(spec: &MeasureSpec, cap: usize) -> Self {
        KOracle {
            rho_inv: spec.rho().inverse(),
            digits: spec.digits().to_vec(),
            delta: spec.delta().clone(),
            cap,
            memo: RefCell::new(HashMap::new()),
        }
    }

    /// Number of distinct live questions decided so far.
    pub fn questions(&self) -> usize {
        self.memo.borrow().len()
    }

    fn classify(&self, u: &AlgebraicNumber, v: &AlgebraicNumber) -> QClass {
        if v.sign() <= 0 || (u - &self.delta).sign() >= 0 {
            return QClass::False;
        }
        // here v > 0 and u < δ, so the open interval contains 0 iff u < 0 and
        // contains δ iff v > δ; both hull endpoints belong to K
        if u.sign() < 0 || (v - &self.delta).sign() > 0 {
            return QClass::True;
        }
        QClass::Live
    }

    /// Does K ∩ (u, v) ≠ ∅?  Exact; `u < v` required.
    pub fn k_intersects(
        &self,
        u: &AlgebraicNumber,
        v: &AlgebraicNumber,
    ) -> Result<bool, NetError> {
        debug_assert!((v - u).sign() > 0, "empty question interval");
        match self.classify(u, v) {
            QClass::False => return Ok(false),
            QClass::True => return Ok(true),
            QClass::Live => {}
        }
        let key0 = (u.lex_key(), v.lex_key());
        if let Some(&ans) = self.memo.borrow().get(&key0) {
            return Ok(ans);
        }
        // enumerate the live subgraph reachable from (u, v)
        let mut nodes: Vec<(AlgebraicNumber, AlgebraicNumber)> = vec![(u.clone(), v.clone())];
        let mut keys: Vec<(Vec<Rat>, Vec<Rat>)> = vec![key0.clone()];
        let mut index: HashMap<(Vec<Rat>, Vec<Rat>), usize> = HashMap::new();
        index.insert(key0, 0);
        let mut edges: Vec<Vec<usize>> = vec![Vec::new()];
        let mut accepting: Vec<bool> = vec![false];
        let mut head = 0usize;
        while head < nodes.len() {
            let (qu, qv) = nodes[head].clone();
            for d in &self.digits {
                let cu = (&qu - d) * &self.rho_inv;
                let cv = (&qv - d) * &self.rho_inv;
                match self.classify(&cu, &cv) {
                    QClass::False => {}
                    QClass::True => accepting[head] = true,
                    QClass::Live => {
                        let key = (cu.lex_key(), cv.lex_key());
                        match self.memo.borrow().get(&key) {
                            Some(true) => {
                                accepting[head] = true;
                                continue;
                            }
                            Some(false) => continue,
                            None => {}
                        }
                        let j = match index.get(&key) {
                            Some(&j) => j,
                            None => {
                                let j = nodes.len();
                                if self.memo.borrow().len() + j >= self.cap {
                                    return Err(NetError::QuestionCap { cap: self.cap });
                                }
                                index.insert(key.clone(), j);
                                keys.push(key);
                                nodes.push((cu, cv));
                                edges.push(Vec::new());
                                accepting.push(false);
                                j
                            }
                        };
                        edges[head].push(j);
                    }
                }
            }
            head += 1;
        }
        // reverse reachability from accepting questions
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (i, outs) in edges.iter().enumerate() {
            for &j in outs {
                rev[j].push(i);
            }
        }
        let mut ans = accepting.clone();
        let mut queue: VecDeque<usize> =
            (0..nodes.len()).filter(|&i| accepting[i]).collect();
        while let Some(x) = queue.pop_front() {
            for &p in &rev[x] {
                if !ans[p] {
                    ans[p] = true;
                    queue.push_back(p);
                }
            }
        }
        // the whole out-neighbourhood of every enumerated question was
        // explored, so negative answers are final too
        let mut memo = self.memo.borrow_mut();
        for (i, key) in keys.into_iter().enumerate() {
            memo.insert(key, ans[i]);
        }
        Ok(ans[0])
    }
}

// ---------------------------------------------------------------------------
// children generation

/// Per-spec generation context: the oracle plus a cache of children lists.
/// Children depend only on the parent's reduced form, so the cache is keyed
/// on reduced keys.
pub struct Generator {
    spec: MeasureSpec,
    rho: AlgebraicNumber,
    inv_rho: AlgebraicNumber,
    rho_delta: AlgebraicNumber,
    zero: AlgebraicNumber,
    oracle: KOracle,
    kids: RefCell<HashMap<ReducedKey, Rc<Vec<ChildEdge>>>>,
}

impl Generator {
    pub fn new(spec: MeasureSpec, max_questions: usize) -> Self {
        let rho = spec.rho();
        let inv_rho = rho.inverse();
        let rho_delta = &rho * spec.delta();
        let zero = spec.field().zero();
        let oracle = KOracle::new(&spec, max_questions);
        Generator {
            spec,
            rho,
            inv_rho,
            rho_delta,
            zero,
            oracle,
            kids: RefCell::new(HashMap::new()),
        }
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn oracle(&self) -> &KOracle {
        &self.oracle
    }

    /// The level-0 characteristic vector: torus mode covers the circle by δ
    /// integer-translate pseudo-neighbours of length-1 frame; line mode is
    /// the whole hull with the single neighbour 0.
    pub fn root(&self) -> CharacteristicVector {
        let ctx = self.spec.field();
        match self.spec.mode() {
            Mode::Torus => {
                let delta = self
                    .spec
                    .delta_int()
                    .expect("validated torus spec has integer delta");
                CharacteristicVector {
                    length: ctx.one(),
                    neighbours: (0..delta).map(|t| ctx.from_int(t as i64)).collect(),
                    sibling_index: 1,
                }
            }
            Mode::Line => CharacteristicVector {
                length: self.spec.delta().clone(),
                neighbours: vec![ctx.zero()],
                sibling_index: 1,
            },
        }
    }

    /// Subdivide one net interval.  Returns the surviving children in
    /// left-to-right order, with sibling indices assigned per reduced form
    /// and (when probabilities are present) the weight-transfer matrices.
    pub fn children(&self, parent: &CharacteristicVector) -> Result<Vec<ChildEdge>, NetError> {
        let rk = parent.reduced_key();
        if let Some(hit) = self.kids.borrow().get(&rk) {
            return Ok(hit.as_ref().clone());
        }
        let out = self.children_uncached(parent)?;
        self.kids.borrow_mut().insert(rk, Rc::new(out.clone()));
        Ok(out)
    }

    fn children_uncached(
        &self,
        parent: &CharacteristicVector,
    ) -> Result<Vec<ChildEdge>, NetError> {
        let plen = &parent.length;
        let digits = self.spec.digits();
        // breakpoints: endpoints of child-cylinder hulls inside [0, plen]
        let mut pts: Vec<AlgebraicNumber> = vec![self.zero.clone(), plen.clone()];
        for c in &parent.neighbours {
            for d in digits {
                let start = d - c;
                let end = &start + &self.rho_delta;
                if start.sign() > 0 && (&start - plen).sign() < 0 {
                    pts.push(start);
                }
                if end.sign() > 0 && (&end - plen).sign() < 0 {
                    pts.push(end);
                }
            }
        }
        pts.sort();
        pts.dedup();

        let mut children: Vec<ChildEdge> = Vec::new();
        for w in pts.windows(2) {
            let (h, h2) = (&w[0], &w[1]);
            let clen = (h2 - h) * &self.inv_rho;
            // candidate neighbours: cylinders whose hull covers [h, h2]
            let mut cand: Vec<AlgebraicNumber> = Vec::new();
            for c in &parent.neighbours {
                for d in digits {
                    let start = d - c;
                    let end = &start + &self.rho_delta;
                    if (&start - h).sign() <= 0 && (&end - h2).sign() >= 0 {
                        cand.push((h - &start) * &self.inv_rho);
                    }
                }
            }
            cand.sort();
            cand.dedup();
            let mut kept: Vec<AlgebraicNumber> = Vec::new();
            for v in cand {
                let vend = &v + &clen;
                debug_assert!(v.sign() >= 0 && (&vend - self.spec.delta()).sign() <= 0);
                if self.oracle.k_intersects(&v, &vend)? {
                    kept.push(v);
                }
            }
            if kept.is_empty() {
                continue;
            }
            let matrix = if self.spec.has_probs() {
                Some(self.edge_matrix(parent, h, &kept)?)
            } else {
                None
            };
            children.push(ChildEdge {
                offset: h.clone(),
                child: CharacteristicVector {
                    length: clen,
                    neighbours: kept,
                    sibling_index: 0, // assigned below
                },
                matrix,
            });
        }
        // sibling indices: left-to-right rank among same-reduced-form children
        let mut seen: HashMap<ReducedKey, u32> = HashMap::new();
        for edge in children.iter_mut() {
            let counter = seen.entry(edge.child.reduced_key()).or_insert(0);
            *counter += 1;
            edge.child.sibling_index = *counter;
        }
        Ok(children)
    }

    /// Entry (j, i) carries the probability of the unique digit s with
    /// d_s = c_j + offset − ϱ·a_i, if any.
    fn edge_matrix(
        &self,
        parent: &CharacteristicVector,
        offset: &AlgebraicNumber,
        child_nbrs: &[AlgebraicNumber],
    ) -> Result<TransitionMatrix, NetError> {
        let digits = self.spec.digits();
        let probs = self.spec.probs();
        let rho_a: Vec<AlgebraicNumber> =
            child_nbrs.iter().map(|a| &self.rho * a).collect();
        let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(parent.neighbours.len());
        for c in &parent.neighbours {
            let ch = c + offset;
            let mut row = Vec::with_capacity(child_nbrs.len());
            for ra in &rho_a {
                let x = &ch - ra;
                let entry = digits
                    .iter()
                    .position(|d| *d == x)
                    .map(|s| probs[s].clone())
                    .unwrap_or_else(Rat::zero);
                row.push(entry);
            }
            rows.push(row);
        }
        let scale = Rat::from_integer(self.spec.prob_scale());
        let m = TransitionMatrix::from_rows(rows)?.with_scale(scale);
        debug_assert!(m.every_column_nonzero());
        Ok(m)
    }
}

// ---------------------------------------------------------------------------
// closure to a full transition diagram

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruncationReason {
    NodeCap,
    DepthCap,
    QuestionCap,
}

#[derive(Clone, Debug)]
pub struct TruncationInfo {
    pub reason: TruncationReason,
    pub detail: String,
}

#[derive(Clone, Copy, Debug)]
pub struct ClosureCaps {
    pub max_nodes: usize,
    pub max_depth: usize,
    pub max_questions: usize,
}

impl Default for ClosureCaps {
    fn default() -> Self {
        ClosureCaps {
            max_nodes: 20_000,
            max_depth: 400,
            max_questions: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiagramEdge {
    pub child_id: usize,
    pub offset: AlgebraicNumber,
    pub matrix: Option<TransitionMatrix>,
}

#[derive(Clone, Debug)]
pub struct DiagramNode {
    pub cv: CharacteristicVector,
    pub depth: usize,
    pub reduced_id: usize,
    pub edges: Vec<DiagramEdge>,
}

/// A reduced characteristic vector together with the diagram nodes sharing it.
#[derive(Clone, Debug)]
pub struct ReducedClass {
    pub length: AlgebraicNumber,
    pub neighbours: Vec<AlgebraicNumber>,
    pub members: Vec<usize>,
}

impl ReducedClass {
    pub fn display(&self) -> String {
        let nbrs: Vec<String> = self.neighbours.iter().map(|a| a.to_string()).collect();
        format!("({}, ({}))", self.length, nbrs.join(", "))
    }

    /// Display with length and neighbours multiplied by `factor`.  Torus
    /// tables are sometimes published with everything scaled by δ; this
    /// variant reproduces that presentation.
    pub fn display_scaled(&self, factor: &AlgebraicNumber) -> String {
        let nbrs: Vec<String> = self
            .neighbours
            .iter()
            .map(|a| (a * factor).to_string())
            .collect();
        format!("({}, ({}))", &self.length * factor, nbrs.join(", "))
    }
}

/// The finite transition diagram: every characteristic vector reachable from
/// the root, each with its ordered child edges.  Node ids are breadth-first
/// discovery order, so diagrams are deterministic for a given spec.
pub struct TransitionDiagram {
    spec: MeasureSpec,
    nodes: Vec<DiagramNode>,
    reduced: Vec<ReducedClass>,
    root: usize,
    truncation: Option<TruncationInfo>,
    questions_used: usize,
}

impl TransitionDiagram {
    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &[DiagramNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &DiagramNode {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root_id(&self) -> usize {
        self.root
    }

    pub fn reduced_classes(&self) -> &[ReducedClass] {
        &self.reduced
    }

    pub fn reduced_count(&self) -> usize {
        self.reduced.len()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncation.is_some()
    }

    pub fn truncation(&self) -> Option<&TruncationInfo> {
        self.truncation.as_ref()
    }

    pub fn questions_used(&self) -> usize {
        self.questions_used
    }

    pub fn has_matrices(&self) -> bool {
        self.spec.has_probs()
    }

    /// Boolean support pattern of the weight-transfer matrix on one edge:
    /// `(rows, cols, bits)` with bit `i*8 + j` set iff entry (i, j) can be
    /// nonzero.  Uses the stored matrix when present; for structure-only
    /// specs the support is derived from the digit rule directly (an entry is
    /// nonzero iff some digit solves d_s = c_j + offset − ϱ·a_i, regardless
    /// of its probability).  Neighbour sets larger than 8 are not expected.
    pub fn edge_support(&self, parent_id: usize, edge_idx: usize) -> (usize, usize, u64) {
        let parent = &self.nodes[parent_id];
        let edge = &parent.edges[edge_idx];
        if let Some(m) = &edge.matrix {
            let bits = m.support_bits().expect("neighbour sets stay within 8");
            return (m.rows(), m.cols(), bits);
        }
        let child = &self.nodes[edge.child_id];
        let rows = parent.cv.neighbours.len();
        let cols = child.cv.neighbours.len();
        assert!(rows <= 8 && cols <= 8, "neighbour sets stay within 8");
        let rho = self.spec.rho();
        let digits = self.spec.digits();
        let mut bits = 0u64;
        for (i, c) in parent.cv.neighbours.iter().enumerate() {
            let ch = c + &edge.offset;
            for (j, a) in child.cv.neighbours.iter().enumerate() {
                let x = &ch - &(&rho * a);
                if digits.iter().any(|d| *d == x) {
                    bits |= 1 << (i * 8 + j);
                }
            }
        }
        (rows, cols, bits)
    }

    /// Reduced class whose display equals the given string, matching the
    /// canonical normalization first and the δ-scaled presentation second.
    pub fn find_reduced(&self, display: &str) -> Option<usize> {
        if let Some(i) = self.reduced.iter().position(|r| r.display() == display) {
            return Some(i);
        }
        let delta = self.spec.delta();
        self.reduced
            .iter()
            .position(|r| r.display_scaled(delta) == display)
    }
}

/// Breadth-first closure from the root.  Caps never raise an error: hitting
/// one returns the partial diagram with a truncation record, including a
/// sample of the smallest normalized lengths seen (inputs that are not of
/// finite type show lengths shrinking without bound).
pub fn closure(spec: &MeasureSpec, caps: &ClosureCaps) -> TransitionDiagram {
    let gen = Generator::new(spec.clone(), caps.max_questions);
    closure_with(&gen, caps)
}

struct Builder {
    nodes: Vec<DiagramNode>,
    intern: HashMap<FullKey, usize>,
    reduced: Vec<ReducedClass>,
    reduced_intern: HashMap<ReducedKey, usize>,
}

impl Builder {
    fn add(&mut self, cv: CharacteristicVector, depth: usize) -> usize {
        let id = self.nodes.len();
        let rkey = cv.reduced_key();
        let rid = match self.reduced_intern.get(&rkey) {
            Some(&r) => r,
            None => {
                let r = self.reduced.len();
                self.reduced_intern.insert(rkey, r);
                self.reduced.push(ReducedClass {
                    length: cv.length.clone(),
                    neighbours: cv.neighbours.clone(),
                    members: Vec::new(),
                });
                r
            }
        };
        self.reduced[rid].members.push(id);
        self.intern.insert(cv.full_key(), id);
        self.nodes.push(DiagramNode {
            cv,
            depth,
            reduced_id: rid,
            edges: Vec::new(),
        });
        id
    }
}

pub fn closure_with(gen: &Generator, caps: &ClosureCaps) -> TransitionDiagram {
    let mut b = Builder {
        nodes: Vec::new(),
        intern: HashMap::new(),
        reduced: Vec::new(),
        reduced_intern: HashMap::new(),
    };
    let root = b.add(gen.root(), 0);
    let mut queue: VecDeque<usize> = VecDeque::new();
    queue.push_back(root);
    let mut truncation: Option<TruncationInfo> = None;

    'bfs: while let Some(id) = queue.pop_front() {
        let depth = b.nodes[id].depth;
        if depth >= caps.max_depth {
            truncation = Some(TruncationInfo {
                reason: TruncationReason::DepthCap,
                detail: truncation_detail(&b.nodes, caps),
            });
            continue;
        }
        let kids = match gen.children(&b.nodes[id].cv) {
            Ok(k) => k,
            Err(e) => {
                truncation = Some(TruncationInfo {
                    reason: TruncationReason::QuestionCap,
                    detail: format!("{}; {}", e, truncation_detail(&b.nodes, caps)),
                });
                break 'bfs;
            }
        };
        for edge in kids {
            let child_id = match b.intern.get(&edge.child.full_key()) {
                Some(&c) => c,
                None => {
                    if b.nodes.len() >= caps.max_nodes {
                        truncation = Some(TruncationInfo {
                            reason: TruncationReason::NodeCap,
                            detail: truncation_detail(&b.nodes, caps),
                        });
                        break 'bfs;
                    }
                    let c = b.add(edge.child, depth + 1);
                    queue.push_back(c);
                    c
                }
            };
            b.nodes[id].edges.push(DiagramEdge {
                child_id,
                offset: edge.offset,
                matrix: edge.matrix,
            });
        }
    }

    TransitionDiagram {
        spec: gen.spec().clone(),
        nodes: b.nodes,
        reduced: b.reduced,
        root,
        truncation,
        questions_used: gen.oracle().questions(),
    }
}

fn truncation_detail(nodes: &[DiagramNode], caps: &ClosureCaps) -> String {
    let mut lens: Vec<f64> = nodes.iter().map(|n| n.cv.length.to_f64()).collect();
    lens.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lens.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let sample: Vec<String> = lens.iter().take(6).map(|l| format!("{l:.6}")).collect();
    format!(
        "stopped at {} nodes (caps: nodes {}, depth {}, questions {}); \
         smallest normalized lengths so far: [{}]",
        nodes.len(),
        caps.max_nodes,
        caps.max_depth,
        caps.max_questions,
        sample.join(", ")
    )
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests_support::*;
    use crate::numberfield::rat_to_f64;

    fn caps() -> ClosureCaps {
        ClosureCaps::default()
    }

    #[test]
    fn golden_torus_root_has_five_children() {
        let spec = golden_spec(Mode::Torus);
        let gen = Generator::new(spec, 100_000);
        let root = gen.root();
        let kids = gen.children(&root).unwrap();
        assert_eq!(kids.len(), 5);
        // all reduced forms distinct, offsets strictly increasing
        let mut rks: Vec<ReducedKey> = kids.iter().map(|k| k.child.reduced_key()).collect();
        rks.sort();
        rks.dedup();
        assert_eq!(rks.len(), 5);
        for w in kids.windows(2) {
            assert!((&w[1].offset - &w[0].offset).sign() > 0);
        }
        for k in &kids {
            let m = k.matrix.as_ref().unwrap();
            assert_eq!(m.rows(), 2); // root pseudo-neighbours 0, 1
            assert_eq!(m.cols(), k.child.neighbours.len());
            assert!(m.every_column_nonzero());
        }
    }

    #[test]
    fn golden_torus_closure_counts() {
        let d = closure(&golden_spec(Mode::Torus), &caps());
        assert!(!d.is_truncated());
        assert_eq!(d.reduced_count(), 38);
    }

    #[test]
    fn golden_line_closure_counts() {
        let d = closure(&golden_spec(Mode::Line), &caps());
        assert!(!d.is_truncated());
        assert_eq!(d.reduced_count(), 40);
    }

    #[test]
    fn ess_not_unique_gap_is_reported_empty() {
        let spec = ess_not_unique_spec();
        let gen = Generator::new(spec.clone(), 100_000);
        let f = spec.field();
        let u = f.from_rat(&rat(14, 5));
        let v = f.from_int(3);
        assert!(!gen.oracle().k_intersects(&u, &v).unwrap());
        // left part of the first cylinder is inhabited
        let a = f.zero();
        let b = f.one();
        assert!(gen.oracle().k_intersects(&a, &b).unwrap());
    }

    #[test]
    fn ess_not_unique_closure_has_ten_reduced() {
        let d = closure(&ess_not_unique_spec(), &caps());
        assert!(!d.is_truncated());
        assert_eq!(d.reduced_count(), 10);
    }

    #[test]
    fn middle_third_gap_is_empty() {
        let spec = middle_third_spec();
        let gen = Generator::new(spec.clone(), 100_000);
        let f = spec.field();
        assert!(!gen
            .oracle()
            .k_intersects(&f.from_rat(&rat(1, 3)), &f.from_rat(&rat(2, 3)))
            .unwrap());
        assert!(gen
            .oracle()
            .k_intersects(&f.zero(), &f.from_rat(&rat(1, 3)))
            .unwrap());
    }

    #[test]
    fn complete_cantor_like_has_one_reduced_vector() {
        // ternary 3-fold convolution: full support on the 3-torus
        let spec = cantor_convolution(3, 3, Mode::Torus);
        let d = closure(&spec, &caps());
        assert!(!d.is_truncated());
        assert_eq!(d.reduced_count(), 1);
        let root = d.node(d.root_id());
        assert_eq!(root.edges.len(), 3);
        for e in &root.edges {
            let m = e.matrix.as_ref().unwrap();
            assert_eq!((m.rows(), m.cols()), (3, 3));
            assert!(m.every_column_nonzero());
            assert!(m.every_row_nonzero());
        }
    }

    #[test]
    fn strict_separation_children_repeat_the_root_form() {
        let spec = strictsep_spec(Mode::Line);
        let gen = Generator::new(spec, 100_000);
        let root = gen.root();
        let kids = gen.children(&root).unwrap();
        assert_eq!(kids.len(), 2);
        for (i, k) in kids.iter().enumerate() {
            assert_eq!(k.child.reduced_key(), root.reduced_key());
            assert_eq!(k.child.sibling_index as usize, i + 1);
            let m = k.matrix.as_ref().unwrap();
            assert_eq!((m.rows(), m.cols()), (1, 1));
        }
        assert_eq!(*kids[0].matrix.as_ref().unwrap().get(0, 0), rat(1, 4));
        assert_eq!(*kids[1].matrix.as_ref().unwrap().get(0, 0), rat(3, 4));
    }

    #[test]
    fn strict_separation_torus_root_children() {
        let spec = strictsep_spec(Mode::Torus);
        let gen = Generator::new(spec, 100_000);
        let root = gen.root();
        assert_eq!(root.neighbours.len(), 2); // (1, (0, 1))
        let kids = gen.children(&root).unwrap();
        assert_eq!(kids.len(), 2);
        for k in &kids {
            assert_eq!(k.child.reduced_display(), "(2, (0))");
        }
    }

    #[test]
    fn isolated_point_closure_counts() {
        let d = closure(&isolated_point_spec(), &caps());
        assert!(!d.is_truncated());
        assert_eq!(d.reduced_count(), 10);
        // root is canonical (1, (0, 1)), published as the δ-scaled (2, (0, 2));
        // class 4 is canonical (1/2, (0, 1/2, 1, 3/2)), published (1, (0, 1, 2, 3))
        assert_eq!(d.find_reduced("(2, (0, 2))"), Some(0));
        assert_eq!(d.find_reduced("(1, (0, 1, 2, 3))"), Some(3));
        assert_eq!(d.node(d.root_id()).reduced_id, 0);
        // display scale is the common denominator 2402
        let root = d.node(d.root_id());
        let m = root.edges[0].matrix.as_ref().unwrap();
        assert_eq!(*m.scale(), rat(2402, 1));
    }

    #[test]
    fn child_lengths_tile_full_support_parents() {
        for spec in [golden_spec(Mode::Torus), isolated_point_spec()] {
            let d = closure(&spec, &caps());
            let rho = spec.rho();
            for n in d.nodes() {
                let mut total = spec.field().zero();
                for e in &n.edges {
                    total = &total + &(&rho * &d.node(e.child_id).cv.length);
                }
                assert_eq!(total, n.cv.length, "children must tile the parent");
            }
        }
    }

    #[test]
    fn torus_full_support_keeps_rows_nonzero() {
        let d = closure(&golden_spec(Mode::Torus), &caps());
        for n in d.nodes() {
            for e in &n.edges {
                let m = e.matrix.as_ref().unwrap();
                assert!(m.every_column_nonzero());
                assert!(m.every_row_nonzero());
            }
        }
    }

    #[test]
    fn node_cap_marks_truncation() {
        let spec = golden_spec(Mode::Torus);
        let caps = ClosureCaps {
            max_nodes: 5,
            ..ClosureCaps::default()
        };
        let d = closure(&spec, &caps);
        assert!(d.is_truncated());
        assert_eq!(d.truncation().unwrap().reason, TruncationReason::NodeCap);
        assert!(d.node_count() <= 5);
    }

    #[test]
    fn reduced_members_are_disjoint_and_cover() {
        let d = closure(&ess_not_unique_spec(), &caps());
        let mut seen = vec![false; d.node_count()];
        for r in d.reduced_classes() {
            for &m in &r.members {
                assert!(!seen[m]);
                seen[m] = true;
            }
        }
        assert!(seen.into_iter().all(|b| b));
    }

    #[test]
    fn lengths_are_positive_and_bounded_by_delta() {
        let d = closure(&golden_spec(Mode::Line), &caps());
        let delta = d.spec().delta().clone();
        for n in d.nodes() {
            assert!(n.cv.length.sign() > 0);
            assert!((&n.cv.length - &delta).sign() <= 0);
            let (lo, _) = n.cv.length.enclose(&rat(1, 1 << 30));
            assert!(rat_to_f64(&lo) > 0.0);
        }
    }
}
