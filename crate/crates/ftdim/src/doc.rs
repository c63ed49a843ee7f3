//! Machine-readable result document.
//!
//! Every run of the tool produces one [`ResultDoc`].  All other artifacts
//! (text report, DOT graph, CSV files) are pure functions of this document,
//! which is what makes cached runs byte-for-byte identical to cold runs: the
//! cache stores the document, and rendering is deterministic.
//!
//! To keep the JSON round-trip exact, the document never stores raw floats:
//! numeric values appear as fixed-precision decimal strings together with the
//! bracket width they were computed to.  Field order is struct declaration
//! order, arrays are deterministically ordered, and no maps are used.

use serde::{Deserialize, Serialize};

/// Version of the JSON schema; bump on any incompatible change.
pub const SCHEMA_VERSION: u32 = 1;

/// Top-level result document, one per tool invocation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultDoc {
    pub schema_version: u32,
    /// Producing tool, `name <version>`.
    pub generator: String,
    /// Subcommand that produced the document: `analyze`, `dims`, `diagram`,
    /// `point`, `cantor-table` or `check-pisot`.
    pub kind: String,
    pub params: Params,
    pub spec: Option<SpecInfo>,
    pub structure: Option<StructureInfo>,
    pub dims: Option<DimsInfo>,
    pub point: Option<PointInfo>,
    pub table: Option<TableInfo>,
    pub pisot: Option<PisotInfo>,
    pub flags: Flags,
    pub warnings: Vec<String>,
}

/// Input parameters, echoed so a document is self-describing.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Params {
    /// SHA-256 of the spec file contents (hex), when a spec was read.
    pub spec_sha256: Option<String>,
    /// Effective mode after any command-line override.
    pub mode: Option<String>,
    pub max_nodes: Option<u64>,
    pub max_depth: Option<u64>,
    pub max_questions: Option<u64>,
    pub cycle_len: Option<u32>,
    /// Walk depth for lower spectral bounds (minimum column sums).
    pub norm_depth_lo: Option<u32>,
    /// Walk depth for upper spectral bounds (norm maxima).
    pub norm_depth_hi: Option<u32>,
    /// Descent depth for point estimates.
    pub point_depth: Option<u32>,
    /// Word-length cap for table verdict searches.
    pub depth_cap: Option<u32>,
    /// Seed recorded for randomized search strategies.  Every search the
    /// tool currently performs is exhaustive and deterministic, so this only
    /// documents the (unused) default unless overridden.
    pub seed: u64,
    /// Endpoint bracket tolerance used for spectral values, as a decimal.
    pub tolerance: Option<String>,
}

impl Params {
    pub fn empty() -> Params {
        Params {
            spec_sha256: None,
            mode: None,
            max_nodes: None,
            max_depth: None,
            max_questions: None,
            cycle_len: None,
            norm_depth_lo: None,
            norm_depth_hi: None,
            point_depth: None,
            depth_cap: None,
            seed: 0,
            tolerance: None,
        }
    }
}

/// Validated measure description.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpecInfo {
    pub mode: String,
    /// Exact contraction ratio (field element display).
    pub rho: String,
    pub rho_approx: String,
    /// Integer coefficients of rho's minimal polynomial, ascending degree.
    pub min_poly: Vec<String>,
    /// Exact translation digits, first normalized to 0.
    pub digits: Vec<String>,
    /// Probability weights (empty for structure-only specs).
    pub probs: Vec<String>,
    /// Common denominator of the weights; scaled matrices are integer.
    pub prob_scale: String,
    /// Hull endpoint delta = last digit / (1 - rho).
    pub delta: String,
    pub delta_approx: String,
    pub map_count: usize,
    pub regular: bool,
    pub full_support_hull: bool,
    pub strong_separation: bool,
    /// `pisot`, `not-pisot` or `undecided` for 1/rho.
    pub pisot_status: String,
    pub pisot_note: String,
}

/// Transition diagram and loop-class structure.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StructureInfo {
    pub node_count: usize,
    pub reduced_count: usize,
    pub max_node_depth: usize,
    pub truncated: bool,
    pub truncation: Option<String>,
    pub questions_used: usize,
    pub reduced: Vec<ReducedInfo>,
    pub classes: Vec<ClassInfo>,
    pub essential_count: usize,
    pub maximal_non_essential_count: usize,
    pub every_node_reaches_essential: bool,
    /// DOT rendering of the reduced diagram.
    pub dot: String,
    /// CSV listing of the loop classes.
    pub classes_csv: String,
    /// Internal edge matrices of each loop class, both display forms.
    pub class_matrices: Vec<ClassMatrices>,
}

/// One reduced characteristic vector.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReducedInfo {
    /// 1-based label, matching DOT node names `r<label>`.
    pub label: usize,
    pub display: String,
    /// Same data scaled by delta (the presentation some torus listings use);
    /// None when the scaling is the identity.
    pub display_scaled: Option<String>,
    /// Number of full characteristic vectors sharing this reduced form.
    pub members: usize,
}

/// One loop class (strongly connected component with internal edges).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClassInfo {
    /// Index into the class list (stable across artifacts).
    pub index: usize,
    /// `essential` or `maximal-non-essential`.
    pub kind: String,
    /// 1-based reduced labels of the member nodes.
    pub labels: Vec<usize>,
    pub node_count: usize,
    pub simple: bool,
    /// `positive`, `not-positive` or `undecided-at-cap`.
    pub positivity: String,
    /// Length of the shortest witness path certifying positivity.
    pub witness_len: Option<usize>,
    pub row_nonzero: bool,
}

/// Internal edge matrices of one loop class.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClassMatrices {
    pub class_index: usize,
    pub total_edges: usize,
    /// First few edges (deterministic order), each with both matrix forms.
    pub shown: Vec<EdgeMatrixInfo>,
}

/// One internal edge with its transition matrix.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EdgeMatrixInfo {
    pub from_label: usize,
    pub to_label: usize,
    /// Position of the edge among the parent's children (0-based).
    pub edge_pos: usize,
    /// Rows of the true-probability matrix, entries space-separated.
    pub rows: Vec<String>,
    /// Rows of the integer matrix scaled by the common denominator.
    pub rows_scaled: Vec<String>,
}

/// Dimension analysis of the loop classes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DimsInfo {
    pub essentials: Vec<EssentialInfo>,
    pub candidates: Vec<CandidateInfo>,
    /// Certified isolated dimension values, ascending, nine decimals.
    pub isolated: Vec<String>,
    /// Connected components of the dimension set (merged essential inner
    /// intervals plus isolated values).
    pub component_count: usize,
    pub undecided_count: usize,
    /// CSV listing, one row per loop class.
    pub dims_csv: String,
    /// Closed-form interval when strong separation holds.
    pub closed_form: Option<ClosedFormInfo>,
}

/// Inner and outer dimension intervals of one essential class.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EssentialInfo {
    pub class_index: usize,
    pub labels: Vec<usize>,
    pub inner_lo: String,
    pub inner_hi: String,
    /// Bracket widths the endpoints were computed to (`exact` for width 0).
    pub inner_lo_width: String,
    pub inner_hi_width: String,
    /// Cycle lengths realizing the inner endpoints (low endpoint first).
    pub witness_lo_len: usize,
    pub witness_hi_len: usize,
    pub witness_lo_labels: Vec<usize>,
    pub witness_hi_labels: Vec<usize>,
    pub cycles_seen: u64,
    pub cycles_complete: bool,
    pub outer_lo: String,
    pub outer_hi: String,
    pub outer_lo_width: String,
    pub outer_hi_width: String,
    pub outer_depth_lo: u32,
    pub outer_depth_hi: u32,
    /// Shared column subset realizing the lower spectral bound, if any.
    pub outer_subset: Option<Vec<usize>>,
    /// False when no lower spectral bound exists (zero column somewhere);
    /// the outer upper endpoint is then infinite and reported as `inf`.
    pub outer_has_lower: bool,
    pub inner_within_outer: bool,
}

/// Verdict for one non-essential loop class.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CandidateInfo {
    pub class_index: usize,
    pub labels: Vec<usize>,
    pub dim_lo: String,
    pub dim_hi: String,
    pub dim_lo_width: String,
    pub dim_hi_width: String,
    /// `isolated`, `inside-essential-interval` or `undecided`.
    pub verdict: String,
}

/// Closed-form dimension interval under strong separation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClosedFormInfo {
    pub dim_lo: String,
    pub dim_hi: String,
    /// Probabilities realizing the endpoints.
    pub p_max: String,
    pub p_min: String,
}

/// Local dimension analysis at one point.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointInfo {
    /// Exact point as parsed (field element display).
    pub x: String,
    pub x_approx: String,
    pub depth: u32,
    /// True when the point met a net-interval endpoint during descent.
    pub boundary: bool,
    pub representations: Vec<PathInfo>,
    /// True when an eventually periodic representation fixed the value.
    pub exact: bool,
    pub dim: String,
    pub dim_lo: String,
    pub dim_hi: String,
    pub dim_width: String,
    /// Estimate counting the two adjacent net intervals, when the standard
    /// comparability hypotheses fail.
    pub mn_dim: Option<String>,
    /// 1-based reduced labels of the certifying cycle, when exact.
    pub cycle_labels: Vec<usize>,
}

/// One symbolic path of the point through the diagram.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PathInfo {
    /// `interior`, `left-end` or `right-end`.
    pub side: String,
    /// 1-based reduced labels from the root (truncated for display).
    pub labels: Vec<usize>,
    pub depth: u32,
    pub periodic: bool,
    pub estimate: Option<String>,
}

/// Comparison table of line lower bounds vs torus upper bounds.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TableInfo {
    pub rows: Vec<RowInfo>,
    pub csv: String,
}

/// One comparison row for an m-fold convolution with contraction 1/d.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RowInfo {
    pub m: u32,
    pub d: u32,
    /// Closed-form supremal dimension on the line (nine decimals).
    pub line_lower: String,
    /// Column-sum upper bound for the torus (nine decimals).
    pub torus_upper: String,
    /// True when torus < line is certified in exact arithmetic.
    pub verdict: bool,
    /// Final word length searched.
    pub depth: u32,
    /// Word lengths where the two values tied exactly.
    pub tied_depths: Vec<u32>,
    /// True when the row lies outside the regime the closed form covers.
    pub flagged: bool,
    pub note: String,
}

/// Pisot certification outcome.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PisotInfo {
    /// Integer coefficients of the checked polynomial, ascending degree;
    /// empty when the check came from a spec's contraction ratio.
    pub poly: Vec<String>,
    pub status: String,
    pub note: String,
    /// Isolating interval of the dominant real root, when one exists.
    pub dominant_lo: Option<String>,
    pub dominant_hi: Option<String>,
}

/// Outcome flags; the process exit code is a function of these alone.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct Flags {
    /// The diagram closure hit a cap and the structure is incomplete.
    pub truncated: bool,
    /// Some loop class's positivity search hit its cap undecided.
    pub undecided_positivity: bool,
    /// Some non-essential class's isolation verdict is undecided.
    pub undecided_isolation: bool,
}

/// Exit code for a finished run: 0 success, 3 truncated structure,
/// 4 undecided positivity, 5 undecided isolation (first match wins).
/// Failures before a document exists use 1 (2 is reserved for usage errors).
pub fn exit_code(f: &Flags) -> i32 {
    if f.truncated {
        3
    } else if f.undecided_positivity {
        4
    } else if f.undecided_isolation {
        5
    } else {
        0
    }
}

/// Canonical serialization of a document: pretty JSON plus trailing newline.
/// Parsing this back and re-serializing reproduces the bytes exactly, which
/// the cache round-trip invariant relies on.
pub fn doc_json(doc: &ResultDoc) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}
