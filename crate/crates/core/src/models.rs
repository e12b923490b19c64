//! Named members of the class: Sprott, Lorenz and the free rigid body, with
//! their closed-form single-input criteria and the Crouch condition.

use thiserror::Error;

use crate::chain::s_chain;
use crate::linalg::{self, determinant, dot, from_columns, mat_vec, Matrix, Rational, Scalar, Subspace, Tolerance, Vector};
use crate::stlc::hermes_sussmann_obstruction;
use crate::system::{QuadraticSystem, SystemError};
use crate::verdict::{Certificate, ClosedFormCertificate, Rule, Verdict, VerdictTag};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: String },
    #[error("control vector must be nonzero")]
    ZeroControl,
    #[error("s = beta^2 - (sigma+1) beta + sigma (1 - rho) vanishes; the closed form does not apply")]
    SFree,
    #[error("expected {expected} control vectors, got {found}")]
    ControlCount { expected: &'static str, found: usize },
    #[error("control vectors must have length 3")]
    ControlLength,
    #[error(transparent)]
    System(#[from] SystemError),
}

fn require_positive<T: Scalar>(name: &'static str, v: &T) -> Result<(), ModelError> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(ModelError::NonPositive { name, value: v.to_string() })
    }
}

fn check_controls<T: Scalar>(controls: &[Vector<T>], max: usize) -> Result<(), ModelError> {
    if controls.is_empty() || controls.len() > max {
        let expected = if max == 1 { "1" } else { "1 or 2" };
        return Err(ModelError::ControlCount { expected, found: controls.len() });
    }
    if controls.iter().any(|f| f.len() != 3) {
        return Err(ModelError::ControlLength);
    }
    Ok(())
}

fn q<T: Scalar>(i: i64) -> T {
    T::int(i)
}

pub fn sprott_l<T: Scalar>(mu: &T) -> Matrix<T> {
    let m = -mu.clone();
    let z = T::zero();
    let one = -q::<T>(1);
    vec![
        vec![m.clone(), z.clone(), one.clone()],
        vec![one.clone(), m.clone(), z.clone()],
        vec![z, one, m],
    ]
}

/// `ẋ = −(μI + P₃)x + (x₂², x₃², x₁²)`.
pub fn sprott<T: Scalar>(mu: T, controls: Vec<Vector<T>>) -> Result<QuadraticSystem<T>, ModelError> {
    check_controls(&controls, 2)?;
    let ones = vec![q::<T>(1); 3];
    let zeros = vec![T::zero(); 3];
    Ok(QuadraticSystem::new(sprott_l(&mu), ones, zeros.clone(), zeros, controls)?)
}

pub fn lorenz_l<T: Scalar>(sigma: &T, rho: &T, beta: &T) -> Matrix<T> {
    let z = T::zero();
    vec![
        vec![-sigma.clone(), sigma.clone(), z.clone()],
        vec![rho.clone(), -q::<T>(1), z.clone()],
        vec![z.clone(), z, -beta.clone()],
    ]
}

pub fn lorenz<T: Scalar>(sigma: T, rho: T, beta: T, controls: Vec<Vector<T>>) -> Result<QuadraticSystem<T>, ModelError> {
    require_positive("sigma", &sigma)?;
    require_positive("rho", &rho)?;
    require_positive("beta", &beta)?;
    check_controls(&controls, 2)?;
    let zeros = vec![T::zero(); 3];
    let c = vec![T::zero(), -q::<T>(1), q::<T>(1)];
    Ok(QuadraticSystem::new(lorenz_l(&sigma, &rho, &beta), zeros.clone(), zeros, c, controls)?)
}

/// `c_ν = (ξ_{ν+1} − ξ_{ν+2}) / ξ_ν`, indices cyclic.
pub fn rigid_body_coefficients<T: Scalar>(xi: &[T]) -> Result<Vector<T>, ModelError> {
    if xi.len() != 3 {
        return Err(ModelError::System(SystemError::ShapeMismatch { field: "xi".into(), expected: 3, found: xi.len() }));
    }
    for v in xi {
        require_positive("xi", v)?;
    }
    Ok((0..3).map(|nu| (xi[(nu + 1) % 3].clone() - xi[(nu + 2) % 3].clone()) / xi[nu].clone()).collect())
}

/// `Δ_{1/ξ} b`: raw torque to control field.
pub fn scale_torque<T: Scalar>(xi: &[T], b: &[T]) -> Vector<T> {
    b.iter().zip(xi).map(|(bi, x)| bi.clone() / x.clone()).collect()
}

/// Free rigid body `ẋ = Δ_{1/ξ}S(x)Δ_ξ x`. With `raw_torques` the controls are
/// torques `bᵢ` and enter as `Δ_{1/ξ}bᵢ`; otherwise they are used as given.
pub fn rigid_body<T: Scalar>(xi: &[T], controls: Vec<Vector<T>>, raw_torques: bool) -> Result<QuadraticSystem<T>, ModelError> {
    let c = rigid_body_coefficients(xi)?;
    check_controls(&controls, 2)?;
    let controls = if raw_torques { controls.iter().map(|b| scale_torque(xi, b)).collect() } else { controls };
    let zeros = vec![T::zero(); 3];
    Ok(QuadraticSystem::new(linalg::zeros(3, 3), zeros.clone(), zeros, c, controls)?)
}

/// The hat map, `S(x)y = y × x`.
pub fn hat<T: Scalar>(x: &[T]) -> Matrix<T> {
    let z = T::zero();
    vec![
        vec![z.clone(), x[2].clone(), -x[1].clone()],
        vec![-x[2].clone(), z.clone(), x[0].clone()],
        vec![x[1].clone(), -x[0].clone(), z],
    ]
}

/// `span{b₁, b₂, S(ω)Δ_{1/ξ}ω : ω ∈ span{b₁,b₂}} = ℝ³`, probed at `ω ∈ {b₁, b₂, b₁+b₂}`.
pub fn crouch_condition<T: Scalar>(xi: &[T], b1: &[T], b2: &[T]) -> Result<bool, ModelError> {
    rigid_body_coefficients(xi)?;
    if b1.len() != 3 || b2.len() != 3 {
        return Err(ModelError::ControlLength);
    }
    let base = Subspace::span(3, &[b1.to_vec(), b2.to_vec()], Tolerance::Default).map_err(|e| SystemError::Value { field: "b".into(), source: e })?;
    if base.rank() < 2 {
        return Err(SystemError::DependentControls.into());
    }
    let gyro = |w: &[T]| mat_vec(&hat(w), &scale_torque(xi, w));
    let probes = [b1.to_vec(), b2.to_vec(), linalg::add(b1, b2)];
    let vs: Vec<Vector<T>> = [b1.to_vec(), b2.to_vec()].into_iter().chain(probes.iter().map(|w| gyro(w))).collect();
    Ok(Subspace::span(3, &vs, Tolerance::Default).expect("length 3").is_full())
}

/// Hessian of `x² + y² + z² − (yz + zx + xy)`.
pub fn sprott_h<T: Scalar>() -> Matrix<T> {
    linalg::imat(&[&[2, -1, -1], &[-1, 2, -1], &[-1, -1, 2]])
}

/// Hessian of `ρx² − σy² + (σ−1)xy`, padded with a zero third row and column.
pub fn lorenz_h<T: Scalar>(sigma: &T, rho: &T) -> Matrix<T> {
    let z = T::zero();
    let off = sigma.clone() - q::<T>(1);
    vec![
        vec![q::<T>(2) * rho.clone(), off.clone(), z.clone()],
        vec![off, -(q::<T>(2) * sigma.clone()), z.clone()],
        vec![z.clone(), z.clone(), z],
    ]
}

pub fn quadratic_form<T: Scalar>(h: &Matrix<T>, f: &[T]) -> T {
    dot(f, &mat_vec(h, f))
}

/// `det[f | Lf | L²f]`.
pub fn krylov_determinant<T: Scalar>(l: &Matrix<T>, f: &[T]) -> T {
    let lf = mat_vec(l, f);
    let llf = mat_vec(l, &lf);
    determinant(&from_columns(3, &[f.to_vec(), lf, llf]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LorenzConstants<T> {
    /// `𝔰 = β² − (σ+1)β + σ(1−ρ)`.
    pub s: T,
    /// `𝔡² = 4ρσ + (σ−1)²`, exact in rational mode.
    pub d_squared: T,
    pub d: f64,
    pub v_plus: [f64; 3],
    pub v_minus: [f64; 3],
    pub w_plus: [f64; 3],
    pub w_minus: [f64; 3],
}

impl<T: Scalar> LorenzConstants<T> {
    pub fn new(sigma: &T, rho: &T, beta: &T) -> Self {
        let one = q::<T>(1);
        let s = beta.clone() * beta.clone() - (sigma.clone() + one.clone()) * beta.clone() + sigma.clone() * (one.clone() - rho.clone());
        let sm1 = sigma.clone() - one;
        let d_squared = q::<T>(4) * rho.clone() * sigma.clone() + sm1.clone() * sm1;
        let d = d_squared.to_f64().sqrt();
        let (sf, rf) = (sigma.to_f64(), rho.to_f64());
        let v = |sign: f64| [1.0, (sf - 1.0 + sign * d) / (2.0 * sf), 0.0];
        let w = |sign: f64| [(1.0 - sf + sign * d) / (2.0 * rf), 1.0, 0.0];
        LorenzConstants { s, d_squared, d, v_plus: v(1.0), v_minus: v(-1.0), w_plus: w(1.0), w_minus: w(-1.0) }
    }
}

fn closed_form_verdict<T: Scalar>(
    sys: &QuadraticSystem<T>,
    rule: Rule,
    linear_factor: T,
    quadratic_factor: T,
    not_accessible: bool,
) -> Verdict<T> {
    let f = sys.controls()[0].clone();
    let tag = if not_accessible {
        VerdictTag::NotAccessible
    } else if !(linear_factor.clone() * quadratic_factor.clone()).is_zero() {
        VerdictTag::Stlc
    } else {
        VerdictTag::NotStlc
    };
    let hermes_sussmann = if tag == VerdictTag::NotStlc { hermes_sussmann_obstruction(sys).ok().flatten() } else { None };
    let cert = ClosedFormCertificate {
        krylov_determinant: krylov_determinant(sys.l(), &f),
        control: f,
        linear_factor,
        quadratic_factor,
        hermes_sussmann,
    };
    let degree = s_chain(sys).degree_of_reachability;
    Verdict::decided(tag, rule, Certificate::ClosedForm(cert)).with_degree(degree)
}

/// Sprott single input: STLC iff `(fᵀ1)(fᵀHf) ≠ 0`; `f ∈ span{1}` is not accessible.
pub fn sprott_single_input_stlc<T: Scalar>(mu: T, f: Vector<T>) -> Result<Verdict<T>, ModelError> {
    if f.len() == 3 && linalg::is_zero_vec(&f) {
        return Err(ModelError::ZeroControl);
    }
    let sys = sprott(mu, vec![f.clone()])?;
    let lin = f.iter().cloned().fold(T::zero(), |a, b| a + b);
    let quad = quadratic_form(&sprott_h(), &f);
    // H is positive semidefinite with kernel span{1}.
    let on_diagonal = quad.is_zero();
    Ok(closed_form_verdict(&sys, Rule::SprottClosedForm, lin, quad, on_diagonal))
}

/// Lorenz single input, `𝔰 ≠ 0`: STLC iff `fᵀe₃ ≠ 0` and `fᵀHf ≠ 0`.
///
/// Reports the criterion as stated. For `f` on the x or y axis, `Φ(f) = 0`
/// and the Hermes–Sussmann witness is absent from the certificate.
pub fn lorenz_single_input_stlc<T: Scalar>(sigma: T, rho: T, beta: T, f: Vector<T>) -> Result<Verdict<T>, ModelError> {
    if f.len() == 3 && linalg::is_zero_vec(&f) {
        return Err(ModelError::ZeroControl);
    }
    let sys = lorenz(sigma.clone(), rho.clone(), beta.clone(), vec![f.clone()])?;
    if LorenzConstants::new(&sigma, &rho, &beta).s.is_zero() {
        return Err(ModelError::SFree);
    }
    let lin = f[2].clone();
    let quad = quadratic_form(&lorenz_h(&sigma, &rho), &f);
    let not_accessible = !s_chain(&sys).last().is_full();
    Ok(closed_form_verdict(&sys, Rule::LorenzClosedForm, lin, quad, not_accessible))
}

/// Which closed-form model a system is structurally, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelMatch<T> {
    Sprott { mu: T },
    Lorenz { sigma: T, rho: T, beta: T },
}

/// Exact structural match against the Sprott and Lorenz families (any number of controls).
pub fn match_model<T: Scalar>(sys: &QuadraticSystem<T>) -> Option<ModelMatch<T>> {
    if sys.n() != 3 {
        return None;
    }
    let zeros = vec![T::zero(); 3];
    let l = sys.l();
    if sys.a() == &vec![q::<T>(1); 3] && sys.b() == &zeros && sys.c() == &zeros {
        let mu = -l[0][0].clone();
        if &sprott_l(&mu) == l {
            return Some(ModelMatch::Sprott { mu });
        }
    }
    if sys.a() == &zeros && sys.b() == &zeros && sys.c() == &vec![T::zero(), -q::<T>(1), q::<T>(1)] {
        let (sigma, rho, beta) = (l[0][1].clone(), l[1][0].clone(), -l[2][2].clone());
        if sigma.is_positive() && rho.is_positive() && beta.is_positive() && &lorenz_l(&sigma, &rho, &beta) == l {
            return Some(ModelMatch::Lorenz { sigma, rho, beta });
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct NamedSystem {
    pub name: &'static str,
    pub description: &'static str,
    pub system: QuadraticSystem<Rational>,
}

/// The worked examples: a non-accessible system in ℝ⁵, a rank-one system that
/// is accessible but not STLC, an STLC system not covered by linearization,
/// and the hypergraph system with a single input.
pub fn paper_examples() -> Vec<NamedSystem> {
    let z3 = || linalg::ivec::<Rational>(&[0, 0, 0]);
    let e = |n, i| linalg::unit::<Rational>(n, i);
    let build = |l: &[&[i64]], a: &[i64], b: &[i64], c: &[i64], controls: Vec<Vector<Rational>>| {
        QuadraticSystem::new(linalg::imat(l), linalg::ivec(a), linalg::ivec(b), linalg::ivec(c), controls).expect("valid example")
    };
    vec![
        NamedSystem {
            name: "r5-nonaccessible",
            description: "accessibility example in R^5: S_4 = span{e1, e4}, degree of reachability 2",
            system: build(
                &[&[0, 0, 0, 0, 0], &[0, 1, 0, 0, 0], &[0, 0, -1, 0, 0], &[0, 0, 0, 0, 1], &[0, 0, 0, 0, 0]],
                &[0, 0, 0, 0, 0],
                &[0, 0, 0, -1, -1],
                &[0, 0, 1, 0, 1],
                vec![e(5, 0)],
            ),
        },
        NamedSystem {
            name: "sprott-counterexample-flow",
            description: "counterexample to STLC: x' = u1, y' = u2, z' = y^2; strongly accessible, z non-decreasing",
            system: build(&[&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]], &[0, 0, 0], &[0, 0, 1], &[0, 0, 0], vec![e(3, 0), e(3, 1)]),
        },
        NamedSystem {
            name: "r3-stlc",
            description: "STLC example in R^3 (x' = 2x - yz): not linearly controllable, STLC by the rank-one theorem",
            system: build(&[&[2, 0, 0], &[0, 0, 0], &[0, 0, -1]], &[0, 0, 1], &[0, 1, 1], &[-1, -2, 0], vec![e(3, 1), e(3, 2)]),
        },
        NamedSystem {
            name: "hypergraph",
            description: "hypergraph system x' = yz, y' = xz, z' = xy with a single input f = (1,1,1)",
            system: QuadraticSystem::new(linalg::zeros(3, 3), z3(), z3(), linalg::ivec(&[1, 1, 1]), vec![linalg::ivec(&[1, 1, 1])])
                .expect("valid example"),
        },
    ]
}

pub fn paper_example(name: &str) -> Option<NamedSystem> {
    paper_examples().into_iter().find(|e| e.name == name)
}
