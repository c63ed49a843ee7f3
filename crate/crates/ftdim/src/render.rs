//! Text report rendering.
//!
//! The report is a deterministic function of the result document alone, so
//! cached and fresh runs print identical bytes.  Every numeric line carries
//! the bracket width the value was computed to (or states that it is exact
//! or an uncertified estimate).

use crate::doc::{exit_code, DimsInfo, PointInfo, ResultDoc, StructureInfo};
use std::fmt::Write as _;

/// Renders the full human-readable report for a document.
pub fn render_report(doc: &ResultDoc) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "== {} report ({}, schema {}) ==",
        doc.kind, doc.generator, doc.schema_version
    );
    header(&mut s, doc);
    if let Some(spec) = &doc.spec {
        let _ = writeln!(s, "\n[measure]");
        let _ = writeln!(s, "mode: {}", spec.mode);
        let _ = writeln!(s, "maps: {} similarities x -> rho*x + d_j", spec.map_count);
        let _ = writeln!(s, "rho = {} (approx {})", spec.rho, spec.rho_approx);
        let _ = writeln!(
            s,
            "min poly of rho (ascending): {}",
            spec.min_poly.join(" ")
        );
        let _ = writeln!(s, "delta = {} (approx {})", spec.delta, spec.delta_approx);
        let _ = writeln!(s, "digits: {}", spec.digits.join("; "));
        if spec.probs.is_empty() {
            let _ = writeln!(s, "probs: (none; structure-only analysis)");
        } else {
            let _ = writeln!(
                s,
                "probs: {} (common denominator {})",
                spec.probs.join("; "),
                spec.prob_scale
            );
        }
        let _ = writeln!(s, "regular probabilities: {}", yesno(spec.regular));
        let _ = writeln!(s, "full-support hull: {}", yesno(spec.full_support_hull));
        let _ = writeln!(s, "strong separation: {}", yesno(spec.strong_separation));
        let _ = writeln!(s, "pisot check (1/rho): {} — {}", spec.pisot_status, spec.pisot_note);
    }
    if let Some(st) = &doc.structure {
        structure_section(&mut s, st, &doc.kind);
    }
    if let Some(d) = &doc.dims {
        dims_section(&mut s, d);
    }
    if let Some(p) = &doc.point {
        point_section(&mut s, p);
    }
    if let Some(t) = &doc.table {
        let _ = writeln!(s, "\n[table]");
        let _ = writeln!(s, "rows: {}", t.rows.len());
        for r in &t.rows {
            let mut line = format!(
                "m={} d={}: line lower {}, torus upper {}, verdict {} (depth {})",
                r.m, r.d, r.line_lower, r.torus_upper, r.verdict, r.depth
            );
            if !r.tied_depths.is_empty() {
                let tied: Vec<String> = r.tied_depths.iter().map(|x| x.to_string()).collect();
                let _ = write!(line, ", exact ties at depths {}", tied.join(","));
            }
            if r.flagged {
                let _ = write!(line, " [flagged: {}]", r.note);
            }
            let _ = writeln!(s, "{line}");
        }
        let _ = writeln!(
            s,
            "(values listed to nine decimals; verdicts certified in exact arithmetic)"
        );
    }
    if let Some(p) = &doc.pisot {
        let _ = writeln!(s, "\n[pisot]");
        if p.poly.is_empty() {
            let _ = writeln!(s, "checked: 1/rho of the given measure description");
        } else {
            let _ = writeln!(
                s,
                "checked polynomial (ascending coefficients): {}",
                p.poly.join(" ")
            );
        }
        let _ = writeln!(s, "status: {}", p.status);
        if let (Some(lo), Some(hi)) = (&p.dominant_lo, &p.dominant_hi) {
            let _ = writeln!(s, "dominant real root in [{lo}, {hi}]");
        }
        let _ = writeln!(s, "note: {}", p.note);
    }
    if !doc.warnings.is_empty() {
        let _ = writeln!(s, "\n[warnings]");
        for w in &doc.warnings {
            let _ = writeln!(s, "- {w}");
        }
    }
    let _ = writeln!(s, "\n[flags]");
    let _ = writeln!(s, "truncated: {}", yesno(doc.flags.truncated));
    let _ = writeln!(
        s,
        "undecided positivity: {}",
        yesno(doc.flags.undecided_positivity)
    );
    let _ = writeln!(
        s,
        "undecided isolation: {}",
        yesno(doc.flags.undecided_isolation)
    );
    let _ = writeln!(s, "exit code: {}", exit_code(&doc.flags));
    s
}

fn header(s: &mut String, doc: &ResultDoc) {
    let p = &doc.params;
    if let Some(h) = &p.spec_sha256 {
        let _ = writeln!(s, "spec sha256: {h}");
    }
    let mut parts: Vec<String> = Vec::new();
    if let Some(m) = &p.mode {
        parts.push(format!("mode={m}"));
    }
    if let Some(v) = p.max_nodes {
        parts.push(format!("max_nodes={v}"));
    }
    if let Some(v) = p.max_depth {
        parts.push(format!("max_depth={v}"));
    }
    if let Some(v) = p.max_questions {
        parts.push(format!("max_questions={v}"));
    }
    if let Some(v) = p.cycle_len {
        parts.push(format!("cycle_len={v}"));
    }
    if let (Some(lo), Some(hi)) = (p.norm_depth_lo, p.norm_depth_hi) {
        parts.push(format!("norm_depths={lo}/{hi}"));
    }
    if let Some(v) = p.point_depth {
        parts.push(format!("point_depth={v}"));
    }
    if let Some(v) = p.depth_cap {
        parts.push(format!("depth_cap={v}"));
    }
    parts.push(format!("seed={}", p.seed));
    if let Some(t) = &p.tolerance {
        parts.push(format!("tolerance={t}"));
    }
    let _ = writeln!(s, "parameters: {}", parts.join(" "));
}

/// Cap on reduced-vector listing lines; larger diagrams elide the tail.
const REDUCED_LIST_CAP: usize = 64;

fn structure_section(s: &mut String, st: &StructureInfo, kind: &str) {
    let _ = writeln!(s, "\n[structure]");
    let _ = writeln!(
        s,
        "nodes: {} (max depth {})",
        st.node_count, st.max_node_depth
    );
    let _ = writeln!(
        s,
        "reduced characteristic vectors: {}",
        st.reduced_count
    );
    let _ = writeln!(s, "membership questions asked: {}", st.questions_used);
    match &st.truncation {
        Some(t) => {
            let _ = writeln!(s, "complete: no — truncated ({t})");
        }
        None => {
            let _ = writeln!(s, "complete: yes");
        }
    }
    let _ = writeln!(s, "essential classes: {}", st.essential_count);
    let _ = writeln!(
        s,
        "maximal non-essential loop classes: {}",
        st.maximal_non_essential_count
    );
    let _ = writeln!(
        s,
        "every node reaches an essential class: {}",
        yesno(st.every_node_reaches_essential)
    );
    for c in &st.classes {
        let mut line = format!(
            "class {}: {}, labels {}, {} nodes",
            c.index,
            c.kind,
            label_set(&c.labels),
            c.node_count
        );
        if c.simple {
            line.push_str(", simple loop");
        }
        let _ = write!(line, ", positivity {}", c.positivity);
        if let Some(w) = c.witness_len {
            let _ = write!(line, " (witness length {w})");
        }
        let _ = writeln!(s, "{line}");
    }
    if kind != "dims" && !st.reduced.is_empty() {
        let _ = writeln!(s, "reduced vectors:");
        for r in st.reduced.iter().take(REDUCED_LIST_CAP) {
            let mut line = format!("  r{}: {} ({} members)", r.label, r.display, r.members);
            if let Some(sc) = &r.display_scaled {
                let _ = write!(line, " | x delta: {sc}");
            }
            let _ = writeln!(s, "{line}");
        }
        if st.reduced.len() > REDUCED_LIST_CAP {
            let _ = writeln!(
                s,
                "  ... {} more elided",
                st.reduced.len() - REDUCED_LIST_CAP
            );
        }
    }
    if kind == "analyze" && !st.class_matrices.is_empty() {
        let _ = writeln!(s, "\n[matrices]");
        let _ = writeln!(
            s,
            "internal edge matrices per loop class; left: true probabilities, right: scaled to integers by the common denominator"
        );
        for cm in &st.class_matrices {
            let _ = writeln!(
                s,
                "class {} ({} internal edges{}):",
                cm.class_index,
                cm.total_edges,
                if cm.shown.len() < cm.total_edges {
                    format!(", first {} shown", cm.shown.len())
                } else {
                    String::new()
                }
            );
            for e in &cm.shown {
                let _ = writeln!(
                    s,
                    "  r{} -> r{} (edge {}):",
                    e.from_label, e.to_label, e.edge_pos
                );
                for (a, b) in e.rows.iter().zip(&e.rows_scaled) {
                    let _ = writeln!(s, "    [ {a} ]   [ {b} ]");
                }
            }
        }
    }
}

fn dims_section(s: &mut String, d: &DimsInfo) {
    let _ = writeln!(s, "\n[dimensions]");
    for e in &d.essentials {
        let _ = writeln!(s, "essential class {}:", label_set(&e.labels));
        let _ = writeln!(
            s,
            "  inner interval: [{}, {}] (endpoint widths {} / {})",
            e.inner_lo, e.inner_hi, e.inner_lo_width, e.inner_hi_width
        );
        let _ = writeln!(
            s,
            "  inner witness cycle lengths: {} and {} (labels {} / {}; {} cycles enumerated, {})",
            e.witness_lo_len,
            e.witness_hi_len,
            label_path(&e.witness_lo_labels),
            label_path(&e.witness_hi_labels),
            e.cycles_seen,
            if e.cycles_complete {
                "complete"
            } else {
                "capped"
            }
        );
        let _ = writeln!(
            s,
            "  outer interval: [{}, {}] (endpoint widths {} / {}; walk depths {}/{})",
            e.outer_lo, e.outer_hi, e.outer_lo_width, e.outer_hi_width, e.outer_depth_lo, e.outer_depth_hi
        );
        if let Some(sub) = &e.outer_subset {
            let cols: Vec<String> = sub.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(s, "  outer lower bound over column subset: {{{}}}", cols.join(","));
        }
        if !e.outer_has_lower {
            let _ = writeln!(s, "  outer upper endpoint unbounded (zero column in an internal matrix)");
        }
        let _ = writeln!(s, "  inner within outer: {}", yesno(e.inner_within_outer));
    }
    for c in &d.candidates {
        if c.dim_lo == c.dim_hi {
            let _ = writeln!(
                s,
                "candidate class {}: dim {} (width {}) — verdict {}",
                label_set(&c.labels),
                c.dim_lo,
                c.dim_lo_width,
                c.verdict
            );
        } else {
            let _ = writeln!(
                s,
                "candidate class {}: dims [{}, {}] (widths {} / {}) — verdict {}",
                label_set(&c.labels),
                c.dim_lo,
                c.dim_hi,
                c.dim_lo_width,
                c.dim_hi_width,
                c.verdict
            );
        }
    }
    if d.isolated.is_empty() {
        let _ = writeln!(s, "no isolated point");
    } else {
        let _ = writeln!(
            s,
            "isolated points: {{{}}} (widths on the candidate lines above)",
            d.isolated.join(", ")
        );
    }
    let _ = writeln!(s, "dimension set has {} components", d.component_count);
    let _ = writeln!(s, "undecided candidates: {}", d.undecided_count);
    if let Some(cf) = &d.closed_form {
        let _ = writeln!(
            s,
            "closed form under strong separation: [{}, {}] from probabilities {} and {} (exact endpoints)",
            cf.dim_lo, cf.dim_hi, cf.p_max, cf.p_min
        );
    }
}

fn point_section(s: &mut String, p: &PointInfo) {
    let _ = writeln!(s, "\n[point]");
    let _ = writeln!(s, "x = {} (approx {})", p.x, p.x_approx);
    let _ = writeln!(s, "descent depth: {}", p.depth);
    let _ = writeln!(s, "net-interval boundary contact: {}", yesno(p.boundary));
    let _ = writeln!(s, "representations: {}", p.representations.len());
    for r in &p.representations {
        let mut line = format!(
            "  {} track, depth {}, periodic: {}",
            r.side,
            r.depth,
            yesno(r.periodic)
        );
        if let Some(est) = &r.estimate {
            let _ = write!(line, ", norm estimate {est}");
        }
        let _ = write!(line, "; labels {}", label_path(&r.labels));
        let _ = writeln!(s, "{line}");
    }
    if p.exact {
        let _ = writeln!(
            s,
            "value: exact (eventually periodic symbolic representation)"
        );
        let _ = writeln!(
            s,
            "local dimension: {} (width {}; interval [{}, {}]; cycle labels {})",
            p.dim,
            p.dim_width,
            p.dim_lo,
            p.dim_hi,
            label_path(&p.cycle_labels)
        );
    } else {
        let _ = writeln!(s, "value: norm estimate at depth {}", p.depth);
        let _ = writeln!(
            s,
            "local dimension: {} ({})",
            p.dim, p.dim_width
        );
        if let Some(mn) = &p.mn_dim {
            let _ = writeln!(
                s,
                "adjacent-interval estimate: {mn} (uncertified estimate)"
            );
        }
    }
}

fn yesno(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// `{5,9,10}` presentation for label sets.
fn label_set(labels: &[usize]) -> String {
    let parts: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// `r5 r9 r10` presentation for label paths; `-` when empty.
fn label_path(labels: &[usize]) -> String {
    if labels.is_empty() {
        return "-".into();
    }
    let parts: Vec<String> = labels.iter().map(|l| format!("r{l}")).collect();
    parts.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doc::{Flags, Params, SCHEMA_VERSION};

    #[test]
    fn minimal_document_renders_with_flags_and_exit_code() {
        let doc = ResultDoc {
            schema_version: SCHEMA_VERSION,
            generator: "ftdim 0.1.0".into(),
            kind: "diagram".into(),
            params: Params::empty(),
            spec: None,
            structure: None,
            dims: None,
            point: None,
            table: None,
            pisot: None,
            flags: Flags {
                truncated: true,
                ..Flags::default()
            },
            warnings: vec!["partial".into()],
        };
        let r = render_report(&doc);
        assert!(r.contains("== diagram report"));
        assert!(r.contains("truncated: yes"));
        assert!(r.contains("exit code: 3"));
        assert!(r.contains("- partial"));
    }

    #[test]
    fn label_presentations() {
        assert_eq!(label_set(&[5, 9, 10]), "{5,9,10}");
        assert_eq!(label_path(&[2, 3]), "r2 r3");
        assert_eq!(label_path(&[]), "-");
    }
}
