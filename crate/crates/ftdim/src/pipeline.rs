//! Computation pipeline: library calls in, result documents out.
//!
//! Each subcommand builds one [`ResultDoc`] here.  Everything numeric is
//! rendered to fixed-precision strings at this boundary so the document (and
//! hence every artifact derived from it) is reproducible byte-for-byte.

use crate::doc::{
    CandidateInfo, ClassInfo, ClassMatrices, ClosedFormInfo, DimsInfo, EdgeMatrixInfo,
    EssentialInfo, Flags, Params, PathInfo, PisotInfo, PointInfo, ReducedInfo, ResultDoc, RowInfo,
    SpecInfo, StructureInfo, TableInfo, SCHEMA_VERSION,
};
use finitetype::cantor::{shrink_csv, shrink_table, CantorError, ShrinkParams};
use finitetype::classes::{dot_reduced, loop_classes, ClassReport, Positivity};
use finitetype::dims::{
    dims_csv, inner_within_outer, isolated_report, point_symbolic, sss_interval, DimsError,
    OuterParams, PointValue, ReportParams, TrackSide,
};
use finitetype::model::{parse_number, MeasureSpec, Mode, ModelError};
use finitetype::netgen::{closure, ClosureCaps, TransitionDiagram, TruncationReason};
use finitetype::numberfield::{
    is_pisot, rat_to_f64, NfError, PisotConfig, PisotStatus, Rat,
};
use finitetype::spectra::TransitionMatrix;
use sha2::{Digest, Sha256};

/// Errors surfaced to the command line; all map to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: {err}")]
    Spec { path: String, err: ModelError },
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Dims(#[from] DimsError),
    #[error("{0}")]
    Cantor(#[from] CantorError),
    #[error("{0}")]
    Field(#[from] NfError),
    #[error("{0}")]
    Invalid(String),
}

/// Shared knobs for the diagram/dimension pipeline.
#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    /// Override of the spec's own mode.
    pub mode: Option<Mode>,
    pub caps: ClosureCaps,
    pub cycle_len: u32,
    /// Walk depth for lower spectral bounds (minimum column sums).
    pub depth_lo: u32,
    /// Walk depth for upper spectral bounds (norm maxima).
    pub depth_hi: u32,
    /// Recorded for randomized strategies; current searches are exhaustive,
    /// so two runs with different seeds still produce identical results.
    pub seed: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        let outer = OuterParams::default();
        AnalyzeOptions {
            mode: None,
            caps: ClosureCaps::default(),
            cycle_len: finitetype::dims::DEFAULT_CYCLE_LEN,
            depth_lo: outer.depth_lo,
            depth_hi: outer.depth_hi,
            seed: 0,
        }
    }
}

pub fn generator() -> String {
    format!("ftdim {}", env!("CARGO_PKG_VERSION"))
}

pub fn sha256_hex(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Parses a spec file's text, applying a mode override if requested.
pub fn load_spec(text: &str, mode: Option<Mode>) -> Result<MeasureSpec, ModelError> {
    let spec = MeasureSpec::parse(text)?;
    match mode {
        Some(m) if m != spec.mode() => MeasureSpec::new(
            spec.field().clone(),
            spec.digits().to_vec(),
            spec.probs().to_vec(),
            m,
        ),
        _ => Ok(spec),
    }
}

// ---------------------------------------------------------------------------
// formatting helpers

pub fn fmt9(x: f64) -> String {
    format!("{x:.9}")
}

fn fmt12(x: f64) -> String {
    format!("{x:.12}")
}

/// Width of a certified bracket: `exact` for zero, scientific otherwise.
fn width_str(lo: f64, hi: f64) -> String {
    let w = hi - lo;
    if w == 0.0 {
        "exact".into()
    } else {
        format!("{w:.1e}")
    }
}

fn pisot_str(s: PisotStatus) -> &'static str {
    match s {
        PisotStatus::Pisot => "pisot",
        PisotStatus::NotPisot => "not-pisot",
        PisotStatus::Undecided => "undecided",
    }
}

fn positivity_str(p: Positivity) -> &'static str {
    match p {
        Positivity::Positive => "positive",
        Positivity::NotPositive => "not-positive",
        Positivity::UndecidedAtCap => "undecided-at-cap",
    }
}

fn truncation_str(d: &TransitionDiagram) -> Option<String> {
    d.truncation().map(|t| {
        let reason = match t.reason {
            TruncationReason::NodeCap => "node cap",
            TruncationReason::DepthCap => "depth cap",
            TruncationReason::QuestionCap => "question cap",
        };
        format!("{reason}: {}", t.detail)
    })
}

/// RFC 4180 quoting: wrap fields containing separators or quotes.
pub fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn label_set(labels: &[usize]) -> String {
    let parts: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

// ---------------------------------------------------------------------------
// document sections

fn spec_info(spec: &MeasureSpec) -> SpecInfo {
    let rep = spec.report();
    let rho = spec.rho();
    SpecInfo {
        mode: spec.mode().to_string(),
        rho: rho.to_string(),
        rho_approx: fmt12(rho.to_f64()),
        min_poly: spec
            .field()
            .min_poly()
            .iter()
            .map(|c| c.to_string())
            .collect(),
        digits: spec.digits().iter().map(|d| d.to_string()).collect(),
        probs: spec.probs().iter().map(|p| p.to_string()).collect(),
        prob_scale: spec.prob_scale().to_string(),
        delta: rep.delta.clone(),
        delta_approx: fmt12(rep.delta_f64),
        map_count: spec.digits().len(),
        regular: rep.is_regular,
        full_support_hull: rep.full_support_hull,
        strong_separation: rep.strong_separation,
        pisot_status: pisot_str(rep.pisot_status).into(),
        pisot_note: rep.pisot_note,
    }
}

/// Aligned row strings for a matrix, entries padded per column.
fn matrix_rows(entries: &[Rat], rows: usize, cols: usize) -> Vec<String> {
    let strs: Vec<String> = entries.iter().map(|e| e.to_string()).collect();
    let mut width = vec![0usize; cols];
    for (i, s) in strs.iter().enumerate() {
        let c = i % cols;
        width[c] = width[c].max(s.len());
    }
    (0..rows)
        .map(|r| {
            let row: Vec<String> = (0..cols)
                .map(|c| format!("{:>w$}", strs[r * cols + c], w = width[c]))
                .collect();
            row.join(" ")
        })
        .collect()
}

fn edge_matrix_info(
    from_label: usize,
    to_label: usize,
    edge_pos: usize,
    m: &TransitionMatrix,
) -> EdgeMatrixInfo {
    EdgeMatrixInfo {
        from_label,
        to_label,
        edge_pos,
        rows: matrix_rows(m.entries(), m.rows(), m.cols()),
        rows_scaled: matrix_rows(&m.scaled_entries(), m.rows(), m.cols()),
    }
}

/// Internal edge matrices shown per class before eliding.
const MATRIX_CAP: usize = 12;

fn class_matrices(d: &TransitionDiagram, classes: &ClassReport) -> Vec<ClassMatrices> {
    if !d.has_matrices() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (ci, c) in classes.classes.iter().enumerate() {
        let mut shown = Vec::new();
        let mut total = 0usize;
        for &u in &c.nodes {
            for (pos, e) in d.node(u).edges.iter().enumerate() {
                if c.nodes.binary_search(&e.child_id).is_err() {
                    continue;
                }
                total += 1;
                if shown.len() >= MATRIX_CAP {
                    continue;
                }
                if let Some(m) = &e.matrix {
                    shown.push(edge_matrix_info(
                        d.node(u).reduced_id + 1,
                        d.node(e.child_id).reduced_id + 1,
                        pos,
                        m,
                    ));
                }
            }
        }
        if total > 0 {
            out.push(ClassMatrices {
                class_index: ci,
                total_edges: total,
                shown,
            });
        }
    }
    out
}

fn classes_csv(classes: &ClassReport) -> String {
    let mut out =
        String::from("class,kind,labels,nodes,simple,positivity,witness_len,row_nonzero\n");
    for (i, c) in classes.classes.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            i,
            c.kind,
            csv_field(&label_set(&c.labels_1based())),
            c.nodes.len(),
            c.is_simple,
            positivity_str(c.positivity),
            c.witness.as_ref().map(|w| w.len().to_string()).unwrap_or_default(),
            c.row_nonzero,
        ));
    }
    out
}

fn structure_info(d: &TransitionDiagram, classes: &ClassReport) -> StructureInfo {
    let delta = d.spec().delta().clone();
    let one = d.spec().field().one();
    let scale_is_identity = delta == one;
    let reduced = d
        .reduced_classes()
        .iter()
        .enumerate()
        .map(|(i, rc)| {
            let display = rc.display();
            let display_scaled = if scale_is_identity {
                None
            } else {
                let s = rc.display_scaled(&delta);
                if s == display {
                    None
                } else {
                    Some(s)
                }
            };
            ReducedInfo {
                label: i + 1,
                display,
                display_scaled,
                members: rc.members.len(),
            }
        })
        .collect();
    let class_list = classes
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| ClassInfo {
            index: i,
            kind: c.kind.to_string(),
            labels: c.labels_1based(),
            node_count: c.nodes.len(),
            simple: c.is_simple,
            positivity: positivity_str(c.positivity).into(),
            witness_len: c.witness.as_ref().map(|w| w.len()),
            row_nonzero: c.row_nonzero,
        })
        .collect();
    StructureInfo {
        node_count: d.node_count(),
        reduced_count: d.reduced_count(),
        max_node_depth: d.nodes().iter().map(|n| n.depth).max().unwrap_or(0),
        truncated: d.is_truncated(),
        truncation: truncation_str(d),
        questions_used: d.questions_used(),
        reduced,
        classes: class_list,
        essential_count: classes.essential_count,
        maximal_non_essential_count: classes.maximal_non_essential().count(),
        every_node_reaches_essential: classes.every_node_reaches_essential,
        dot: dot_reduced(d, classes),
        classes_csv: classes_csv(classes),
        class_matrices: class_matrices(d, classes),
    }
}

fn dims_info(
    d: &TransitionDiagram,
    classes: &ClassReport,
    params: &ReportParams,
) -> Result<(DimsInfo, Vec<String>, bool), DimsError> {
    let rep = isolated_report(d, classes, params)?;
    let l2r = d.spec().rho().to_f64().log2();
    let essentials = rep
        .essentials
        .iter()
        .map(|e| {
            let (ilo_lo, ilo_hi) = e.inner.spectral_max().dim_interval(l2r);
            let (ihi_lo, ihi_hi) = e.inner.spectral_min().dim_interval(l2r);
            let (olo_lo, olo_hi) = e.outer.spectral_hi.dim_interval(l2r);
            let outer_hi_width = match &e.outer.spectral_lo {
                Some(sv) => {
                    let (lo, hi) = sv.dim_interval(l2r);
                    width_str(lo, hi)
                }
                None => "unbounded".into(),
            };
            EssentialInfo {
                class_index: e.class_index,
                labels: e.labels.clone(),
                inner_lo: fmt9(e.inner.dim_lo),
                inner_hi: fmt9(e.inner.dim_hi),
                inner_lo_width: width_str(ilo_lo, ilo_hi),
                inner_hi_width: width_str(ihi_lo, ihi_hi),
                witness_lo_len: e.inner.max.labels.len(),
                witness_hi_len: e.inner.min.labels.len(),
                witness_lo_labels: e.inner.max.labels.clone(),
                witness_hi_labels: e.inner.min.labels.clone(),
                cycles_seen: e.inner.cycles_seen,
                cycles_complete: e.inner.complete,
                outer_lo: fmt9(e.outer.dim_lo),
                outer_hi: fmt9(e.outer.dim_hi),
                outer_lo_width: width_str(olo_lo, olo_hi),
                outer_hi_width,
                outer_depth_lo: e.outer.depth_lo_used,
                outer_depth_hi: e.outer.depth_hi_used,
                outer_subset: e.outer.subset_used.clone(),
                outer_has_lower: e.outer.spectral_lo.is_some(),
                inner_within_outer: inner_within_outer(&e.inner, &e.outer),
            }
        })
        .collect();
    let candidates = rep
        .candidates
        .iter()
        .map(|c| {
            let (lo_lo, lo_hi) = c.inner.spectral_max().dim_interval(l2r);
            let (hi_lo, hi_hi) = c.inner.spectral_min().dim_interval(l2r);
            CandidateInfo {
                class_index: c.class_index,
                labels: c.labels.clone(),
                dim_lo: fmt9(c.dim_lo),
                dim_hi: fmt9(c.dim_hi),
                dim_lo_width: width_str(lo_lo, lo_hi),
                dim_hi_width: width_str(hi_lo, hi_hi),
                verdict: c.verdict.to_string(),
            }
        })
        .collect();
    let spec = d.spec();
    let closed_form = if spec.has_probs() && spec.report().strong_separation {
        let cf = sss_interval(spec)?;
        Some(ClosedFormInfo {
            dim_lo: fmt9(cf.dim_lo),
            dim_hi: fmt9(cf.dim_hi),
            p_max: cf.p_max.to_string(),
            p_min: cf.p_min.to_string(),
        })
    } else {
        None
    };
    let info = DimsInfo {
        essentials,
        candidates,
        isolated: rep.isolated_dims.iter().map(|v| fmt9(*v)).collect(),
        component_count: rep.component_count,
        undecided_count: rep.undecided_count,
        dims_csv: dims_csv(classes, &rep),
        closed_form,
    };
    Ok((info, rep.warnings.clone(), rep.undecided_count > 0))
}

fn base_doc(kind: &str, params: Params) -> ResultDoc {
    ResultDoc {
        schema_version: SCHEMA_VERSION,
        generator: generator(),
        kind: kind.into(),
        params,
        spec: None,
        structure: None,
        dims: None,
        point: None,
        table: None,
        pisot: None,
        flags: Flags::default(),
        warnings: Vec::new(),
    }
}

fn tolerance_string(tol: &Rat) -> String {
    format!("{:e}", rat_to_f64(tol))
}

fn analyze_params(spec_text: &str, spec: &MeasureSpec, opts: &AnalyzeOptions) -> Params {
    let mut p = Params::empty();
    p.spec_sha256 = Some(sha256_hex(spec_text));
    p.mode = Some(spec.mode().to_string());
    p.max_nodes = Some(opts.caps.max_nodes as u64);
    p.max_depth = Some(opts.caps.max_depth as u64);
    p.max_questions = Some(opts.caps.max_questions as u64);
    p.cycle_len = Some(opts.cycle_len);
    p.norm_depth_lo = Some(opts.depth_lo);
    p.norm_depth_hi = Some(opts.depth_hi);
    p.seed = opts.seed;
    p.tolerance = Some(tolerance_string(&ReportParams::default().tol));
    p
}

/// Full pipeline: validate, close the diagram, classify loops, and (when
/// weights are present and the diagram is complete) bound all dimensions.
/// `kind` distinguishes the `analyze`, `dims` and `diagram` presentations.
pub fn analyze_doc(
    spec_text: &str,
    opts: &AnalyzeOptions,
    kind: &str,
) -> Result<ResultDoc, CliError> {
    let spec = load_spec(spec_text, opts.mode)?;
    let mut doc = base_doc(kind, analyze_params(spec_text, &spec, opts));
    doc.spec = Some(spec_info(&spec));
    let d = closure(&spec, &opts.caps);
    let classes = loop_classes(&d);
    doc.flags.truncated = d.is_truncated();
    doc.flags.undecided_positivity = classes
        .classes
        .iter()
        .any(|c| c.positivity == Positivity::UndecidedAtCap);
    if let Some(w) = &classes.truncated_warning {
        doc.warnings.push(w.clone());
    }
    doc.structure = Some(structure_info(&d, &classes));
    let want_dims = kind != "diagram";
    if want_dims {
        if !spec.has_probs() {
            doc.warnings
                .push("no probability weights: structure-only analysis".into());
        } else if d.is_truncated() {
            doc.warnings
                .push("diagram truncated: dimension analysis skipped".into());
        } else {
            let params = ReportParams {
                cycle_len: opts.cycle_len,
                outer: OuterParams {
                    depth_lo: opts.depth_lo,
                    depth_hi: opts.depth_hi,
                    ..OuterParams::default()
                },
                ..ReportParams::default()
            };
            let (info, warnings, undecided) = dims_info(&d, &classes, &params)?;
            doc.flags.undecided_isolation = undecided;
            doc.warnings.extend(warnings);
            doc.dims = Some(info);
        }
    }
    Ok(doc)
}

/// Local dimension analysis at a single point.
pub fn point_doc(
    spec_text: &str,
    x_text: &str,
    depth: u32,
    opts: &AnalyzeOptions,
) -> Result<ResultDoc, CliError> {
    let spec = load_spec(spec_text, opts.mode)?;
    let mut params = analyze_params(spec_text, &spec, opts);
    params.point_depth = Some(depth);
    params.cycle_len = None;
    params.norm_depth_lo = None;
    params.norm_depth_hi = None;
    let mut doc = base_doc("point", params);
    doc.spec = Some(spec_info(&spec));
    let x = parse_number(spec.field(), x_text)?;
    let d = closure(&spec, &opts.caps);
    doc.flags.truncated = d.is_truncated();
    if d.is_truncated() {
        doc.warnings.push(format!(
            "diagram truncated ({}): point analysis skipped",
            truncation_str(&d).unwrap_or_default()
        ));
        return Ok(doc);
    }
    let pr = point_symbolic(&d, &x, depth)?;
    let representations = pr
        .representations
        .iter()
        .map(|p| PathInfo {
            side: match p.side {
                TrackSide::Interior => "interior",
                TrackSide::LeftEnd => "left-end",
                TrackSide::RightEnd => "right-end",
            }
            .into(),
            labels: p.labels.clone(),
            depth: p.depth,
            periodic: p.periodic.is_some(),
            estimate: p.estimate.map(fmt9),
        })
        .collect();
    let info = match &pr.value {
        PointValue::Exact(pp) => {
            let (lo, hi) = pp.dim_interval(&d);
            PointInfo {
                x: x.to_string(),
                x_approx: fmt12(x.to_f64()),
                depth,
                boundary: pr.boundary,
                representations,
                exact: true,
                dim: fmt9(pp.dim_mid(&d)),
                dim_lo: fmt9(lo),
                dim_hi: fmt9(hi),
                dim_width: width_str(lo, hi),
                mn_dim: None,
                cycle_labels: pp.cycle_labels(&d),
            }
        }
        PointValue::Estimate {
            value,
            mn_value,
            depth: est_depth,
        } => PointInfo {
            x: x.to_string(),
            x_approx: fmt12(x.to_f64()),
            depth: *est_depth,
            boundary: pr.boundary,
            representations,
            exact: false,
            dim: fmt9(*value),
            dim_lo: fmt9(*value),
            dim_hi: fmt9(*value),
            dim_width: "uncertified estimate".into(),
            mn_dim: mn_value.map(fmt9),
            cycle_labels: Vec::new(),
        },
    };
    doc.point = Some(info);
    Ok(doc)
}

/// Comparison table: closed-form line suprema vs torus column-sum bounds.
pub fn table_doc(pairs: &[(u32, u32)], depth_cap: u32, seed: u64) -> Result<ResultDoc, CliError> {
    let mut params = Params::empty();
    params.depth_cap = Some(depth_cap);
    params.seed = seed;
    let mut doc = base_doc("cantor-table", params);
    let rows = shrink_table(pairs, &ShrinkParams { depth_cap })?;
    let infos = rows
        .iter()
        .map(|r| RowInfo {
            m: r.m,
            d: r.d,
            line_lower: fmt9(r.line_dim),
            torus_upper: fmt9(r.torus_dim),
            verdict: r.verdict,
            depth: r.depth,
            tied_depths: r.tied_depths.clone(),
            flagged: r.flagged,
            note: r.note.clone(),
        })
        .collect();
    doc.table = Some(TableInfo {
        rows: infos,
        csv: shrink_csv(&rows),
    });
    Ok(doc)
}

/// Pisot certification from a spec's contraction ratio.
pub fn pisot_doc_from_spec(spec_text: &str) -> Result<ResultDoc, CliError> {
    let spec = load_spec(spec_text, None)?;
    let mut params = Params::empty();
    params.spec_sha256 = Some(sha256_hex(spec_text));
    let mut doc = base_doc("check-pisot", params);
    let info = spec_info(&spec);
    doc.pisot = Some(PisotInfo {
        poly: Vec::new(),
        status: info.pisot_status.clone(),
        note: info.pisot_note.clone(),
        dominant_lo: None,
        dominant_hi: None,
    });
    doc.spec = Some(info);
    Ok(doc)
}

/// Pisot certification of an explicit integer polynomial (ascending
/// coefficients).
pub fn pisot_doc_from_poly(coeffs_text: &str) -> Result<ResultDoc, CliError> {
    let mut coeffs = Vec::new();
    for tok in coeffs_text.split_whitespace() {
        let c: finitetype::numberfield::Int = tok
            .parse()
            .map_err(|_| CliError::Invalid(format!("bad integer coefficient {tok:?}")))?;
        coeffs.push(c);
    }
    if coeffs.len() < 2 {
        return Err(CliError::Invalid(
            "need at least two coefficients (degree >= 1)".into(),
        ));
    }
    let outcome = is_pisot(&coeffs, &PisotConfig::default())?;
    let mut doc = base_doc("check-pisot", Params::empty());
    doc.pisot = Some(PisotInfo {
        poly: coeffs.iter().map(|c| c.to_string()).collect(),
        status: pisot_str(outcome.status).into(),
        note: outcome.note,
        dominant_lo: outcome.dominant.as_ref().map(|(lo, _)| fmt12(rat_to_f64(lo))),
        dominant_hi: outcome.dominant.as_ref().map(|(_, hi)| fmt12(rat_to_f64(hi))),
    });
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "[field]\n\
        min_poly = -1 1 1\n\
        root_interval = 1/2 7/10\n\
        \n\
        [ifs]\n\
        mode = torus\n\
        digits = 0; 1 - rho; 2 - 2*rho\n\
        probs = 1/4; 1/2; 1/4\n";

    #[test]
    fn csv_quoting_follows_rfc_rules() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("{5,9,10}"), "\"{5,9,10}\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn mode_override_rebuilds_the_spec() {
        let spec = load_spec(GOLDEN, Some(Mode::Line)).unwrap();
        assert_eq!(spec.mode(), Mode::Line);
        let same = load_spec(GOLDEN, Some(Mode::Torus)).unwrap();
        assert_eq!(same.mode(), Mode::Torus);
        let asis = load_spec(GOLDEN, None).unwrap();
        assert_eq!(asis.mode(), Mode::Torus);
    }

    #[test]
    fn golden_analyze_document_counts_reduced_vectors() {
        let opts = AnalyzeOptions::default();
        let torus = analyze_doc(GOLDEN, &opts, "analyze").unwrap();
        let st = torus.structure.as_ref().unwrap();
        assert_eq!(st.reduced_count, 38);
        assert!(!st.truncated);
        assert!(torus.dims.is_some());
        assert_eq!(finitetype::dims::DEFAULT_CYCLE_LEN, 6);

        let line_opts = AnalyzeOptions {
            mode: Some(Mode::Line),
            ..AnalyzeOptions::default()
        };
        let line = analyze_doc(GOLDEN, &line_opts, "analyze").unwrap();
        assert_eq!(line.structure.as_ref().unwrap().reduced_count, 40);
    }

    #[test]
    fn truncated_run_sets_the_flag_and_skips_dims() {
        let opts = AnalyzeOptions {
            caps: ClosureCaps {
                max_nodes: 25,
                ..ClosureCaps::default()
            },
            ..AnalyzeOptions::default()
        };
        let doc = analyze_doc(GOLDEN, &opts, "analyze").unwrap();
        assert!(doc.flags.truncated);
        assert!(doc.dims.is_none());
        assert_eq!(crate::doc::exit_code(&doc.flags), 3);
        assert!(doc
            .warnings
            .iter()
            .any(|w| w.contains("dimension analysis skipped")));
    }

    #[test]
    fn table_document_renders_csv_rows() {
        let doc = table_doc(&[(3, 3)], 4, 0).unwrap();
        let t = doc.table.as_ref().unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].line_lower, "1.133544891");
        assert_eq!(t.rows[0].torus_upper, "1.077324384");
        assert!(t.rows[0].verdict);
        assert!(t.csv.starts_with("m,d,line_lower,torus_upper,verdict,depth\n"));
    }

    #[test]
    fn pisot_documents_from_spec_and_poly() {
        let doc = pisot_doc_from_spec(GOLDEN).unwrap();
        assert_eq!(doc.pisot.as_ref().unwrap().status, "pisot");
        // x^2 - x - 1: golden ratio, the classic Pisot number
        let p = pisot_doc_from_poly("-1 -1 1").unwrap();
        assert_eq!(p.pisot.as_ref().unwrap().status, "pisot");
        assert!(pisot_doc_from_poly("5").is_err());
        assert!(pisot_doc_from_poly("a b").is_err());
    }
}
