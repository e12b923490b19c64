//! The end-to-end analysis pipeline and its serializable report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::chain::{s_chain, verdict_from_chain};
use crate::lie::{c0_oracle, LieError, OracleOptions};
use crate::linalg::{convert_vec, to_f64_vec, to_numbers, Mode, Number, Rational, Scalar, Subspace};
use crate::sim::{reachable_cloud, CloudOptions, CloudStats, SimError};
use crate::stlc::{stlc_verdict_with_chain, validate_certificate};
use crate::system::{QuadraticSystem, SystemError, SystemSpec};
use crate::verdict::{Rule, Verdict, VerdictTag};

/// Version of the report layout; bumped on any incompatible change.
pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Default)]
pub struct AnalysisOptions {
    /// Forces the arithmetic mode instead of inferring it from the spec.
    pub mode: Option<Mode>,
    /// Overrides the spec's tolerance.
    pub tol: Option<f64>,
    /// Maximum word length for the bracket oracle; `None` skips it.
    pub oracle_depth: Option<usize>,
    pub record_forest: bool,
    pub simulate: Option<CloudOptions>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub dims: Vec<usize>,
    pub stationary_at: usize,
    pub degree_of_reachability: usize,
    /// Basis of each `S_λ`, `λ = 0..=k`.
    pub bases: Vec<Vec<Vec<Number>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateCheck {
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub max_len: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<Number>>>,
    /// Whether the bracket span equals `S_k`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agrees: Option<bool>,
    pub brackets_evaluated: usize,
    pub levels: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forest: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub horizon: f64,
    pub bound: f64,
    pub segments: usize,
    pub steps_per_segment: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub stats: CloudStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: &'static str,
    pub tool: ToolInfo,
    pub mode: Mode,
    pub system: SystemSpec,
    pub chain: ChainReport,
    pub accessibility: Value,
    pub stlc: Value,
    pub certificate_check: CertificateCheck,
    /// Statement of every rule the cascade evaluated, keyed by rule id.
    pub citations: BTreeMap<&'static str, &'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimReport>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub accessibility_tag: VerdictTag,
    #[serde(skip)]
    pub stlc_tag: VerdictTag,
    #[serde(skip)]
    pub stlc_rule: Option<Rule>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report is serializable")
    }

    /// Process exit status: 2 when no rule decided STLC, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.stlc_tag.is_decisive() {
            0
        } else {
            2
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let s = &self.system;
        let _ = writeln!(out, "system: n = {}, k = {}, {} control field(s), {} arithmetic", s.n, s.k, s.controls.len(), self.mode);
        let _ = writeln!(out, "chain dims: {:?} (stationary at {})", self.chain.dims, self.chain.stationary_at);
        let _ = writeln!(out, "degree of reachability: {}", self.chain.degree_of_reachability);
        let _ = writeln!(out, "accessibility: {} [{}]", self.accessibility_tag, Rule::AccessibilityRank);
        match self.stlc_rule {
            Some(rule) => {
                let _ = writeln!(out, "stlc: {} [{}]", self.stlc_tag, rule);
                let _ = writeln!(out, "  {}", rule.citation());
            }
            None => {
                let _ = writeln!(out, "stlc: {}", self.stlc_tag);
            }
        }
        if let Some(attempted) = self.stlc["attempted"].as_array() {
            let ids: Vec<&str> = attempted.iter().filter_map(Value::as_str).collect();
            let _ = writeln!(out, "rules attempted: {}", ids.join(", "));
        }
        let cert = &self.stlc["certificate"];
        let _ = writeln!(out, "certificate: {} ({})", cert["kind"].as_str().unwrap_or("none"), if self.certificate_check.valid { "validated" } else { "REJECTED" });
        if let Some(o) = &self.oracle {
            match (&o.error, o.dim, o.agrees) {
                (Some(e), _, _) => {
                    let _ = writeln!(out, "oracle (max length {}): {e}", o.max_len);
                }
                (None, Some(dim), Some(agrees)) => {
                    let _ = writeln!(
                        out,
                        "oracle (max length {}): dim {dim}, {} S_k, {} brackets",
                        o.max_len,
                        if agrees { "agrees with" } else { "DISAGREES with" },
                        o.brackets_evaluated
                    );
                }
                _ => {}
            }
        }
        if let Some(sim) = &self.simulation {
            let st = &sim.stats;
            let _ = writeln!(
                out,
                "simulation: empirical rank {} from {} samples ({} dropped), T = {}, seed {}",
                st.empirical_rank, st.samples, st.dropped, sim.horizon, sim.seed
            );
            if let Some(cov) = st.orthant_coverage {
                let _ = writeln!(out, "  orthant coverage in S_k coordinates: {cov:.3}");
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

/// Validates `spec` in the requested or inferred mode and runs the full analysis.
pub fn analyze(spec: &SystemSpec, opts: &AnalysisOptions) -> Result<AnalysisReport, AnalysisError> {
    match opts.mode.unwrap_or_else(|| spec.preferred_mode()) {
        Mode::Rational => analyze_system(&spec.build::<Rational>()?, opts),
        Mode::Float => analyze_system(&spec.build::<f64>()?, opts),
    }
}

pub fn analyze_system<T: Scalar>(sys: &QuadraticSystem<T>, opts: &AnalysisOptions) -> Result<AnalysisReport, AnalysisError> {
    let sys = match opts.tol {
        Some(t) => sys.clone().with_tolerance(Some(t)),
        None => sys.clone(),
    };
    let chain = s_chain(&sys);
    let accessibility: Verdict<T> = verdict_from_chain(&sys, &chain);
    let stlc = stlc_verdict_with_chain(&sys, &chain);
    let certificate_check = match validate_certificate(&sys, &stlc) {
        Ok(()) => CertificateCheck { valid: true, error: None },
        Err(e) => CertificateCheck { valid: false, error: Some(e.to_string()) },
    };
    let mut warnings = Vec::new();
    if !certificate_check.valid {
        warnings.push("the stlc certificate failed independent validation".to_string());
    }
    let sk = chain.last();
    let oracle = opts.oracle_depth.map(|max_len| {
        let run = c0_oracle(&sys, OracleOptions { max_len, record_forest: opts.record_forest, ..OracleOptions::default() });
        oracle_report(&sys, sk, max_len, run, &mut warnings)
    });
    let simulation = match &opts.simulate {
        Some(copts) => {
            let basis: Vec<Vec<f64>> = sk.basis().iter().map(|b| to_f64_vec(b)).collect();
            let stats = reachable_cloud(&sys.convert::<f64>(), copts, Some(&basis))?;
            if stats.empirical_rank > chain.degree_of_reachability {
                warnings.push(format!(
                    "simulated cloud rank {} exceeds the degree of reachability {}; the analytic verdict stands",
                    stats.empirical_rank, chain.degree_of_reachability
                ));
            }
            if stats.dropped > 0 {
                warnings.push(format!("{} sample(s) blew up and were dropped", stats.dropped));
            }
            Some(SimReport {
                horizon: copts.horizon,
                bound: copts.bound,
                segments: copts.segments,
                steps_per_segment: copts.steps_per_segment,
                seed: copts.seed,
                stats,
            })
        }
        None => None,
    };
    let citations = accessibility
        .attempted
        .iter()
        .chain(&stlc.attempted)
        .chain(stlc.rule.iter())
        .map(|r| (r.id(), r.citation()))
        .collect();
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") },
        mode: T::MODE,
        system: sys.to_spec(),
        chain: ChainReport {
            dims: chain.dims.clone(),
            stationary_at: chain.stationary_at,
            degree_of_reachability: chain.degree_of_reachability,
            bases: chain.subspaces.iter().map(|s| s.basis().iter().map(|b| to_numbers(b)).collect()).collect(),
        },
        accessibility: accessibility.to_json(),
        stlc: stlc.to_json(),
        certificate_check,
        citations,
        oracle,
        simulation,
        warnings,
        accessibility_tag: accessibility.tag,
        stlc_tag: stlc.tag,
        stlc_rule: stlc.rule,
    })
}

fn oracle_report<T: Scalar>(
    sys: &QuadraticSystem<T>,
    sk: &Subspace<T>,
    max_len: usize,
    run: Result<crate::lie::OracleRun, LieError>,
    warnings: &mut Vec<String>,
) -> OracleReport {
    let run = match run {
        Ok(run) => run,
        Err(e) => {
            warnings.push(format!("bracket oracle aborted: {e}"));
            return OracleReport {
                max_len,
                dim: None,
                basis: None,
                agrees: None,
                brackets_evaluated: 0,
                levels: 0,
                forest: None,
                error: Some(e.to_string()),
            };
        }
    };
    // Compare in the system's own arithmetic so float runs use its tolerance.
    let converted: Vec<Vec<T>> = run.span.basis().iter().map(|b| convert_vec(b)).collect();
    let agrees = Subspace::span(sys.n(), &converted, sys.tolerance())
        .and_then(|s| s.same_span(sk))
        .unwrap_or(false);
    if !agrees {
        warnings.push(format!("bracket span (dim {}) differs from S_k (dim {})", run.span.rank(), sk.rank()));
    }
    let forest = (!run.forest.is_empty()).then(|| {
        let skq: Vec<Vec<Rational>> = sk.basis().iter().map(|b| convert_vec(b)).collect();
        let skq = Subspace::span(sys.n(), &skq, crate::linalg::Tolerance::Default).expect("system dimension");
        run.forest_json(&skq)
    });
    OracleReport {
        max_len,
        dim: Some(run.span.rank()),
        basis: Some(run.span.basis().iter().map(|b| to_numbers(b)).collect()),
        agrees: Some(agrees),
        brackets_evaluated: run.brackets_evaluated,
        levels: run.levels,
        forest,
        error: None,
    }
}
