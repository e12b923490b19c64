//! Verdicts, the rules that produce them, and their certificates.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::linalg::{to_numbers, Definiteness, Matrix, Scalar, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictTag {
    StronglyAccessible,
    NotAccessible,
    Stlc,
    NotStlc,
    Inconclusive,
}

impl VerdictTag {
    pub fn is_decisive(self) -> bool {
        self != VerdictTag::Inconclusive
    }
}

impl fmt::Display for VerdictTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerdictTag::StronglyAccessible => "strongly accessible",
            VerdictTag::NotAccessible => "not accessible",
            VerdictTag::Stlc => "small-time locally controllable",
            VerdictTag::NotStlc => "not small-time locally controllable",
            VerdictTag::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Identifies the result a verdict rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    AccessibilityRank,
    Linearization,
    SprottClosedForm,
    LorenzClosedForm,
    ZeroLinearPart,
    HermesSussmann,
    RankOneUnderactuation,
    MonotoneFunctional,
}

impl Rule {
    pub const ALL: [Rule; 8] = [
        Rule::AccessibilityRank,
        Rule::Linearization,
        Rule::SprottClosedForm,
        Rule::LorenzClosedForm,
        Rule::ZeroLinearPart,
        Rule::HermesSussmann,
        Rule::RankOneUnderactuation,
        Rule::MonotoneFunctional,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Rule::AccessibilityRank => "accessibility-rank",
            Rule::Linearization => "linearization",
            Rule::SprottClosedForm => "sprott-closed-form",
            Rule::LorenzClosedForm => "lorenz-closed-form",
            Rule::ZeroLinearPart => "zero-linear-part",
            Rule::HermesSussmann => "hermes-sussmann",
            Rule::RankOneUnderactuation => "rank-one-underactuation",
            Rule::MonotoneFunctional => "monotone-functional",
        }
    }

    pub fn citation(self) -> &'static str {
        match self {
            Rule::AccessibilityRank => {
                "Accessibility rank condition: locally strongly accessible from the origin iff S_k = R^n; \
                 S_k != R^n also excludes the accessibility property"
            }
            Rule::Linearization => {
                "Markus linearization theorem: a controllable linearization at an equilibrium implies STLC"
            }
            Rule::SprottClosedForm => {
                "Sprott single-input criterion: STLC iff f is outside span{1} and span{1}^perp, \
                 det[f, Lf, L^2 f] = -(1/2)(f.1)(f^T H f)"
            }
            Rule::LorenzClosedForm => {
                "Lorenz single-input criterion (s != 0): STLC iff f avoids the isotropic cone of \
                 rho x^2 - sigma y^2 + (sigma - 1) x y joined with span{e3}^perp"
            }
            Rule::ZeroLinearPart => {
                "Single-input systems with L = 0 are never STLC from the origin"
            }
            Rule::HermesSussmann => {
                "Hermes-Sussmann necessary condition at u = 0: 2 Phi(f) outside span{f, Lf, ..., L^(n-1) f} excludes STLC"
            }
            Rule::RankOneUnderactuation => {
                "Rank-one underactuation: if S_0 is not L-invariant or Phi(f_i) lies in S_0 for all i, \
                 STLC iff S_1 = R^n (Sussmann sufficient condition)"
            }
            Rule::MonotoneFunctional => {
                "Monotone functional: w^T F = 0, w^T L = 0 and semidefinite w^T Phi make w^T x monotone along trajectories"
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Witness that `2Φ(f) ∉ span{f, Lf, …, L^{n−1}f}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HsCertificate<T> {
    pub control: Vector<T>,
    pub krylov_basis: Vec<Vector<T>>,
    pub phi: Vector<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RankOneBranch<T> {
    /// `L bᵢ ∉ S₀` for the control with this index.
    NotLInvariant { control: usize, image: Vector<T> },
    /// `Φ(fᵢ) ∈ S₀` for every control.
    PhiInS0 { phis: Vec<Vector<T>> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroLinearCause<T> {
    HermesSussmann(HsCertificate<T>),
    NotAccessible { phi: Vector<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCertificate<T> {
    pub control: Vector<T>,
    /// `fᵀ1` (Sprott) or `fᵀe₃` (Lorenz).
    pub linear_factor: T,
    /// `fᵀHf`.
    pub quadratic_factor: T,
    pub krylov_determinant: T,
    /// Present when the closed form concludes NotStlc and the obstruction was confirmed.
    pub hermes_sussmann: Option<HsCertificate<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate<T> {
    None,
    /// Chain dimensions and a basis of `S_k`.
    Chain { dims: Vec<usize>, basis: Vec<Vector<T>> },
    /// `n` independent vectors `L^p fᵢ` labelled `(control, power)`.
    Krylov { vectors: Vec<((usize, usize), Vector<T>)> },
    RankOne { s1_generators: Vec<Vector<T>>, branch: RankOneBranch<T> },
    HermesSussmann(HsCertificate<T>),
    ZeroLinear(ZeroLinearCause<T>),
    Monotone { w: Vector<T>, form: Matrix<T>, definiteness: Definiteness },
    ClosedForm(ClosedFormCertificate<T>),
}

fn nums<T: Scalar>(v: &[T]) -> Value {
    json!(to_numbers(v))
}

fn mat<T: Scalar>(m: &[Vector<T>]) -> Value {
    Value::Array(m.iter().map(|v| nums(v)).collect())
}

fn hs_json<T: Scalar>(hs: &HsCertificate<T>) -> Value {
    json!({"control": nums(&hs.control), "krylov_basis": mat(&hs.krylov_basis), "phi": nums(&hs.phi)})
}

impl<T: Scalar> Certificate<T> {
    pub fn to_json(&self) -> Value {
        match self {
            Certificate::None => json!({"kind": "none"}),
            Certificate::Chain { dims, basis } => json!({"kind": "chain", "dims": dims, "basis": mat(basis)}),
            Certificate::Krylov { vectors } => json!({
                "kind": "krylov",
                "vectors": vectors.iter().map(|((i, p), v)| json!({"control": i, "power": p, "vector": nums(v)})).collect::<Vec<_>>(),
            }),
            Certificate::RankOne { s1_generators, branch } => {
                let branch = match branch {
                    RankOneBranch::NotLInvariant { control, image } => {
                        json!({"hypothesis": "not-l-invariant", "control": control, "image": nums(image)})
                    }
                    RankOneBranch::PhiInS0 { phis } => json!({"hypothesis": "phi-in-s0", "phis": mat(phis)}),
                };
                json!({"kind": "rank-one", "s1_generators": mat(s1_generators), "branch": branch})
            }
            Certificate::HermesSussmann(hs) => {
                let mut v = hs_json(hs);
                v["kind"] = json!("hermes-sussmann");
                v
            }
            Certificate::ZeroLinear(cause) => match cause {
                ZeroLinearCause::HermesSussmann(hs) => {
                    json!({"kind": "zero-linear-part", "cause": "hermes-sussmann", "obstruction": hs_json(hs)})
                }
                ZeroLinearCause::NotAccessible { phi } => {
                    json!({"kind": "zero-linear-part", "cause": "not-accessible", "phi": nums(phi)})
                }
            },
            Certificate::Monotone { w, form, definiteness } => json!({
                "kind": "monotone",
                "w": nums(w),
                "form": mat(form),
                "definiteness": definiteness,
            }),
            Certificate::ClosedForm(cf) => json!({
                "kind": "closed-form",
                "control": nums(&cf.control),
                "linear_factor": cf.linear_factor.to_number(),
                "quadratic_factor": cf.quadratic_factor.to_number(),
                "krylov_determinant": cf.krylov_determinant.to_number(),
                "hermes_sussmann": cf.hermes_sussmann.as_ref().map(hs_json),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<T> {
    pub tag: VerdictTag,
    /// The deciding rule; `None` only for `Inconclusive`.
    pub rule: Option<Rule>,
    pub certificate: Certificate<T>,
    /// Rules evaluated before reaching this verdict, in order.
    pub attempted: Vec<Rule>,
    pub degree_of_reachability: Option<usize>,
}

impl<T: Scalar> Verdict<T> {
    pub fn decided(tag: VerdictTag, rule: Rule, certificate: Certificate<T>) -> Self {
        Verdict { tag, rule: Some(rule), certificate, attempted: vec![rule], degree_of_reachability: None }
    }

    pub fn inconclusive(attempted: Vec<Rule>) -> Self {
        Verdict {
            tag: VerdictTag::Inconclusive,
            rule: None,
            certificate: Certificate::None,
            attempted,
            degree_of_reachability: None,
        }
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree_of_reachability = Some(degree);
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tag": self.tag,
            "rule": self.rule.map(Rule::id),
            "citation": self.rule.map(Rule::citation),
            "certificate": self.certificate.to_json(),
            "attempted": self.attempted.iter().map(|r| r.id()).collect::<Vec<_>>(),
            "degree_of_reachability": self.degree_of_reachability,
        })
    }
}
