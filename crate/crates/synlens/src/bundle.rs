//! The analysis bundle: everything the report and the explorer need, in
//! one JSON document.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use synlens_core::cluster::{agglomerate, flatten_all, Dendrogram, Linkage, DEFAULT_KS};
use synlens_core::compare::{metric_table, MetricComparison};
use synlens_core::metrics::{
    distance_matrix, missing_for_view, DistanceMatrix, EmbeddingPolicy, View, DEFAULT_EMBED_DIM,
};
use synlens_core::neardup::{near_duplicates, NearDuplicateGroup, DEFAULT_DUP_THRESHOLD};
use synlens_core::patterns::{summarize_cluster, Pattern, SummaryConfig};
use synlens_core::{AnnotatedExample, RawExample, SourceKind, Tag, TokenAnnotation};

use crate::error::{Error, Result};
use crate::ingest::Diagnostic;

pub const BUNDLE_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub ks: Vec<usize>,
    pub dup_threshold: f64,
    pub linkage: Linkage,
    /// Requested metrics; unavailable ones are reported, not fatal.
    pub metrics: Vec<View>,
    /// Hashing fallback dimension for the embedding view; `None` disables it.
    pub embed_dim: Option<usize>,
    pub summary: SummaryConfig,
    /// Embed the full distance matrices.
    pub include_distances: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            ks: DEFAULT_KS.to_vec(),
            dup_threshold: DEFAULT_DUP_THRESHOLD,
            linkage: Linkage::Average,
            metrics: View::ALL.to_vec(),
            embed_dim: Some(DEFAULT_EMBED_DIM),
            summary: SummaryConfig::default(),
            include_distances: false,
        }
    }
}

/// One example as the explorer sees it. `heads[i]` is a 0-based token
/// index, `null` for the root or when unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleExample {
    pub id: usize,
    pub text: String,
    pub seed: bool,
    pub label: Option<String>,
    pub tokens: Vec<String>,
    pub pos: Vec<Tag>,
    pub heads: Vec<Option<usize>>,
    pub deprels: Vec<Option<String>>,
    pub has_dependencies: bool,
}

impl BundleExample {
    pub fn from_annotated(ex: &AnnotatedExample) -> Self {
        BundleExample {
            id: ex.id(),
            text: ex.raw.text.clone(),
            seed: ex.raw.seed,
            label: ex.raw.label.clone(),
            tokens: ex.tokens.iter().map(|t| t.surface.clone()).collect(),
            pos: ex.tokens.iter().map(|t| t.pos.clone()).collect(),
            heads: ex.tokens.iter().map(|t| t.head).collect(),
            deprels: ex.tokens.iter().map(|t| t.deprel.clone()).collect(),
            has_dependencies: ex.has_dependencies,
        }
    }

    /// Rebuilds the annotated example. Supplied embeddings are not kept
    /// in the bundle.
    pub fn to_annotated(&self) -> AnnotatedExample {
        let mut raw = RawExample::new(self.id, self.text.clone());
        raw.seed = self.seed;
        raw.label = self.label.clone();
        let tokens = (0..self.tokens.len())
            .map(|i| TokenAnnotation {
                surface: self.tokens[i].clone(),
                pos: self.pos[i].clone(),
                head: self.heads[i],
                deprel: self.deprels[i].clone(),
            })
            .collect();
        AnnotatedExample::new(raw, tokens)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Availability {
    pub metric: View,
    pub available: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    /// Members in leaf order.
    pub ids: Vec<usize>,
    pub summary: Option<Pattern>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringView {
    pub k: usize,
    pub clusters: Vec<Cluster>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAnalysis {
    pub metric: View,
    pub dendrogram: Dendrogram,
    pub clusterings: Vec<ClusteringView>,
    pub near_duplicates: Vec<NearDuplicateGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<DistanceMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub version: String,
    pub source_kind: SourceKind,
    pub options: AnalysisOptions,
    pub diagnostics: Vec<Diagnostic>,
    pub examples: Vec<BundleExample>,
    pub availability: Vec<Availability>,
    pub metrics: Vec<MetricAnalysis>,
    pub comparison: Option<MetricComparison>,
}

impl Bundle {
    pub fn metric(&self, view: View) -> Option<&MetricAnalysis> {
        self.metrics.iter().find(|m| m.metric == view)
    }

    pub fn annotated_examples(&self) -> Vec<AnnotatedExample> {
        self.examples.iter().map(BundleExample::to_annotated).collect()
    }

    /// Checks the cross-references a consumer relies on.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidBundle(msg));
        if self.version != BUNDLE_VERSION {
            return Err(Error::BundleVersion {
                found: self.version.clone(),
                expected: BUNDLE_VERSION,
            });
        }
        let n = self.examples.len();
        for (i, ex) in self.examples.iter().enumerate() {
            if ex.id != i {
                return bad(format!("example at position {i} has id {}", ex.id));
            }
            let len = ex.tokens.len();
            if ex.pos.len() != len || ex.heads.len() != len || ex.deprels.len() != len {
                return bad(format!("example {i}: token columns differ in length"));
            }
            if ex.heads.iter().flatten().any(|&h| h >= len) {
                return bad(format!("example {i}: head out of range"));
            }
        }
        for m in &self.metrics {
            if !self.availability.iter().any(|a| a.metric == m.metric && a.available) {
                return bad(format!("metric {} present but not marked available", m.metric));
            }
            if m.dendrogram.n_leaves != n || m.dendrogram.merges.len() + 1 != n {
                return bad(format!("metric {}: dendrogram does not cover {n} examples", m.metric));
            }
            for c in &m.clusterings {
                let mut seen = vec![false; n];
                for id in c.clusters.iter().flat_map(|cl| &cl.ids) {
                    if *id >= n || std::mem::replace(&mut seen[*id], true) {
                        return bad(format!(
                            "metric {} k={}: id {id} out of range or repeated",
                            m.metric, c.k
                        ));
                    }
                }
                if seen.iter().any(|s| !s) {
                    return bad(format!(
                        "metric {} k={}: clusters do not cover every example",
                        m.metric, c.k
                    ));
                }
            }
            for g in &m.near_duplicates {
                if g.ids.len() < 2 || g.ids.iter().any(|&id| id >= n) {
                    return bad(format!(
                        "metric {}: malformed near-duplicate group {:?}",
                        m.metric, g.ids
                    ));
                }
            }
            if let Some(d) = &m.distances {
                if d.n != n || d.entries.len() != n * n {
                    return bad(format!("metric {}: distance matrix is not {n}x{n}", m.metric));
                }
            }
        }
        if let Some(c) = &self.comparison {
            if c.metrics.iter().any(|v| self.metric(*v).is_none()) {
                return bad("comparison names a metric with no analysis".into());
            }
            if c.table.len() != c.metrics.len() || c.table.iter().any(|r| r.len() != c.metrics.len()) {
                return bad("comparison table is not square".into());
            }
        }
        Ok(())
    }

    /// Compact JSON. Struct fields serialize in declaration order and
    /// floats as shortest round-trip decimals, so equal bundles give equal
    /// bytes.
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec(self)?;
        out.push(b'\n');
        Ok(out)
    }

    /// Parses and validates.
    pub fn from_json(bytes: &[u8]) -> Result<Bundle> {
        #[derive(Deserialize)]
        struct Header {
            version: String,
        }
        let header: Header = serde_json::from_slice(bytes)?;
        if header.version != BUNDLE_VERSION {
            return Err(Error::BundleVersion {
                found: header.version,
                expected: BUNDLE_VERSION,
            });
        }
        let bundle: Bundle = serde_json::from_slice(bytes)?;
        bundle.validate()?;
        Ok(bundle)
    }
}

fn unavailable_reason(examples: &[AnnotatedExample], view: View, missing: &[usize], source: SourceKind) -> String {
    match view {
        View::Dep if source == SourceKind::Csv => "CSV input carries no dependency parse".into(),
        View::Dep => format!(
            "{} of {} examples lack a complete dependency parse",
            missing.len(),
            examples.len()
        ),
        View::Embedding => format!(
            "{} of {} examples have no embedding vector and the hashing fallback is disabled",
            missing.len(),
            examples.len()
        ),
        _ => format!("{} examples cannot be profiled", missing.len()),
    }
}

fn analyze_metric(
    examples: &[AnnotatedExample],
    view: View,
    options: &AnalysisOptions,
    policy: EmbeddingPolicy,
) -> Result<(MetricAnalysis, DistanceMatrix)> {
    let d = distance_matrix(examples, view, policy).map_err(Error::analysis("metrics"))?;
    let dendrogram = agglomerate(&d, options.linkage).map_err(Error::analysis("cluster"))?;
    let mut cache: HashMap<Vec<usize>, Option<Pattern>> = HashMap::new();
    let clusterings = flatten_all(&dendrogram, &options.ks)
        .into_iter()
        .map(|c| ClusteringView {
            k: c.k,
            clusters: c
                .clusters
                .into_iter()
                .map(|ids| {
                    let summary = cache
                        .entry(ids.clone())
                        .or_insert_with(|| summarize_cluster(&ids, examples, &options.summary))
                        .clone();
                    Cluster { ids, summary }
                })
                .collect(),
        })
        .collect();
    let near = near_duplicates(&dendrogram, &d, options.dup_threshold).map_err(Error::analysis("report"))?;
    let analysis = MetricAnalysis {
        metric: view,
        dendrogram,
        clusterings,
        near_duplicates: near,
        distances: options.include_distances.then(|| d.clone()),
    };
    Ok((analysis, d))
}

/// Runs metrics, clustering, summaries, near-duplicate detection and the
/// metric comparison. Metrics are analyzed on separate threads; the
/// result does not depend on scheduling.
pub fn build_analysis(
    source_kind: SourceKind,
    examples: &[AnnotatedExample],
    diagnostics: Vec<Diagnostic>,
    options: &AnalysisOptions,
) -> Result<Bundle> {
    if examples.len() < 2 {
        return Err(Error::TooFewExamples(examples.len()));
    }
    if !(options.dup_threshold > 0.0 && options.dup_threshold < 1.0) {
        return Err(Error::Analysis {
            module: "report",
            source: synlens_core::Error::InvalidThreshold(options.dup_threshold),
        });
    }
    let policy = EmbeddingPolicy {
        fallback_dim: options.embed_dim,
    };

    let mut availability = Vec::new();
    let mut runnable = Vec::new();
    for view in View::ALL {
        if !options.metrics.contains(&view) {
            availability.push(Availability {
                metric: view,
                available: false,
                reason: Some("not requested".into()),
            });
            continue;
        }
        let missing = missing_for_view(examples, view, policy);
        if missing.is_empty() {
            runnable.push(view);
            availability.push(Availability {
                metric: view,
                available: true,
                reason: None,
            });
        } else {
            availability.push(Availability {
                metric: view,
                available: false,
                reason: Some(unavailable_reason(examples, view, &missing, source_kind)),
            });
        }
    }
    if runnable.is_empty() {
        return Err(Error::NoMetrics);
    }

    let results: Vec<Result<(MetricAnalysis, DistanceMatrix)>> = std::thread::scope(|s| {
        let handles: Vec<_> = runnable
            .iter()
            .map(|&view| s.spawn(move || analyze_metric(examples, view, options, policy)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("metric worker panicked"))
            .collect()
    });
    let mut metrics = Vec::new();
    let mut matrices = Vec::new();
    for r in results {
        let (analysis, d) = r?;
        metrics.push(analysis);
        matrices.push(d);
    }
    let comparison = if matrices.len() >= 2 {
        let refs: Vec<&DistanceMatrix> = matrices.iter().collect();
        Some(metric_table(&refs).map_err(Error::analysis("compare"))?)
    } else {
        None
    };

    let bundle = Bundle {
        version: BUNDLE_VERSION.into(),
        source_kind,
        options: options.clone(),
        diagnostics,
        examples: examples.iter().map(BundleExample::from_annotated).collect(),
        availability,
        metrics,
        comparison,
    };
    debug_assert!(bundle.validate().is_ok());
    Ok(bundle)
}
