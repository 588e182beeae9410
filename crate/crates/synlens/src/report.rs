//! Plain-text rendering of a bundle.

use std::fmt::Write as _;

use synlens_core::compare::MetricComparison;
use synlens_core::metrics::View;
use synlens_core::SourceKind;

use crate::bundle::{Bundle, MetricAnalysis};

pub const NO_PATTERN: &str = "(no pattern \u{2265} min support)";

fn table_label(v: View) -> &'static str {
    match v {
        View::Embedding => "Emb.",
        View::Token => "Token",
        View::Pos => "POS",
        View::Dep => "Dep.",
    }
}

/// Frobenius distances with a blank diagonal.
pub fn render_comparison(c: &MetricComparison) -> String {
    const W: usize = 9;
    let mut out = String::new();
    let _ = write!(out, "{:<W$}", "");
    for m in &c.metrics {
        let _ = write!(out, "{:>W$}", table_label(*m));
    }
    out.push('\n');
    for (i, m) in c.metrics.iter().enumerate() {
        let _ = write!(out, "{:<W$}", table_label(*m));
        for (j, d) in c.table[i].iter().enumerate() {
            if i == j {
                let _ = write!(out, "{:>W$}", "");
            } else {
                let _ = write!(out, "{d:>W$.2}");
            }
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
    }
    out
}

fn render_metric(out: &mut String, bundle: &Bundle, m: &MetricAnalysis) {
    let _ = writeln!(out, "== {} ==", m.metric);
    for c in &m.clusterings {
        let sizes: Vec<String> = c.clusters.iter().map(|cl| cl.ids.len().to_string()).collect();
        let _ = writeln!(
            out,
            "k = {}: {} clusters, sizes {}",
            c.k,
            c.clusters.len(),
            sizes.join(" ")
        );
        for (i, cl) in c.clusters.iter().enumerate() {
            let summary = cl
                .summary
                .as_ref()
                .map_or_else(|| NO_PATTERN.to_string(), |p| p.to_string());
            let _ = writeln!(out, "  {:>3}  {:>4}  {summary}", i + 1, cl.ids.len());
        }
    }
    let _ = writeln!(
        out,
        "near-duplicate groups (threshold {}): {}",
        bundle.options.dup_threshold,
        m.near_duplicates.len()
    );
    for g in &m.near_duplicates {
        let ids: Vec<String> = g.ids.iter().map(|id| id.to_string()).collect();
        let first = &bundle.examples[g.ids[0]].text;
        let _ = writeln!(out, "  [{}] max {:.3}  e.g. {first:?}", ids.join(", "), g.max_distance);
    }
    out.push('\n');
}

pub fn render_text_report(bundle: &Bundle) -> String {
    let mut out = String::new();
    let source = match bundle.source_kind {
        SourceKind::Csv => "csv",
        SourceKind::Conllu => "conllu",
    };
    let seeds = bundle.examples.iter().filter(|e| e.seed).count();
    let _ = writeln!(out, "examples: {} ({source}), seeds: {seeds}", bundle.examples.len());
    if !bundle.diagnostics.is_empty() {
        let _ = writeln!(out, "ingest diagnostics: {}", bundle.diagnostics.len());
        for d in &bundle.diagnostics {
            let _ = writeln!(out, "  {d}");
        }
    }
    let names: Vec<&str> = bundle.metrics.iter().map(|m| m.metric.as_str()).collect();
    let _ = writeln!(out, "metrics: {}", names.join(", "));
    for a in bundle.availability.iter().filter(|a| !a.available) {
        let _ = writeln!(
            out,
            "unavailable: {} ({})",
            a.metric,
            a.reason.as_deref().unwrap_or("unknown")
        );
    }
    out.push('\n');
    for m in &bundle.metrics {
        render_metric(&mut out, bundle, m);
    }
    if let Some(c) = &bundle.comparison {
        out.push_str("== metric comparison (Frobenius distance) ==\n");
        out.push_str(&render_comparison(c));
    }
    out
}
