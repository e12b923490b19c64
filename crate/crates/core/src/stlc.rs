//! Small-time local controllability from the origin: individual rules, the
//! cascade that combines them, and an independent certificate checker.

use num_integer::Integer;
use thiserror::Error;

use crate::chain::{krylov_vectors, s_chain, step_generators, verdict_from_chain, ChainResult};
use crate::linalg::{
    self, kernel, mat_vec, semidefiniteness, symmetric_eigenvalues, to_f64_vec, transpose, unit, Definiteness, Matrix, Mode,
    Scalar, Subspace, Vector,
};
use crate::models::{krylov_determinant, lorenz_h, match_model, quadratic_form, sprott_h, LorenzConstants, ModelMatch};
use crate::system::QuadraticSystem;
use crate::verdict::{
    Certificate, ClosedFormCertificate, HsCertificate, RankOneBranch, Rule, Verdict, VerdictTag, ZeroLinearCause,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StlcError {
    #[error("rule needs underactuation rank {expected}, system has k = {found}")]
    WrongRank { expected: usize, found: usize },
}

/// Kalman rank of the linearization `(L, F)` at the origin.
pub fn linearization_stlc<T: Scalar>(sys: &QuadraticSystem<T>) -> bool {
    krylov_certificate(sys).is_some()
}

/// `n` independent vectors `L^p fᵢ` when the linearization is controllable.
fn krylov_certificate<T: Scalar>(sys: &QuadraticSystem<T>) -> Option<Vec<((usize, usize), Vector<T>)>> {
    let labelled = krylov_vectors(sys.l(), sys.controls());
    let vs: Vec<Vector<T>> = labelled.iter().map(|(_, v)| v.clone()).collect();
    let span = Subspace::span(sys.n(), &vs, sys.tolerance()).expect("system dimension");
    if !span.is_full() {
        return None;
    }
    Some(
        span.basis()
            .iter()
            .map(|b| labelled.iter().find(|(_, v)| v == b).expect("basis vectors are inputs").clone())
            .collect(),
    )
}

fn krylov_span<T: Scalar>(sys: &QuadraticSystem<T>, f: &[T]) -> Subspace<T> {
    let vs: Vec<Vector<T>> = krylov_vectors(sys.l(), &[f.to_vec()]).into_iter().map(|(_, v)| v).collect();
    Subspace::span(sys.n(), &vs, sys.tolerance()).expect("system dimension")
}

/// Single-input Hermes–Sussmann test at `ū = 0`: a certificate iff
/// `2Φ(f) ∉ W = span{f, Lf, …, L^{n−1}f}`.
pub fn hermes_sussmann_obstruction<T: Scalar>(sys: &QuadraticSystem<T>) -> Result<Option<HsCertificate<T>>, StlcError> {
    if sys.k() != sys.n() - 1 {
        return Err(StlcError::WrongRank { expected: sys.n() - 1, found: sys.k() });
    }
    let f = sys.controls()[0].clone();
    let w = krylov_span(sys, &f);
    let phi = sys.phi(&f).expect("system dimension");
    if w.contains(&phi).expect("system dimension") {
        return Ok(None);
    }
    Ok(Some(HsCertificate { control: f, krylov_basis: w.basis().to_vec(), phi }))
}

/// Single input with `L = 0` is never STLC from the origin.
pub fn zero_l_single_input<T: Scalar>(sys: &QuadraticSystem<T>) -> Option<Verdict<T>> {
    if sys.k() != sys.n() - 1 || !sys.linear_part_is_zero() {
        return None;
    }
    let cause = match hermes_sussmann_obstruction(sys).expect("single input") {
        Some(hs) => ZeroLinearCause::HermesSussmann(hs),
        None => ZeroLinearCause::NotAccessible { phi: sys.phi(&sys.controls()[0]).expect("system dimension") },
    };
    Some(Verdict::decided(VerdictTag::NotStlc, Rule::ZeroLinearPart, Certificate::ZeroLinear(cause)))
}

fn s1_generators<T: Scalar>(sys: &QuadraticSystem<T>) -> Vec<Vector<T>> {
    let mut gens = sys.controls().to_vec();
    gens.extend(step_generators(sys, sys.controls()));
    gens
}

/// Rank-one underactuation (`k = 1`). Not STLC when `S₁ ≠ ℝⁿ`; STLC when
/// `S₁ = ℝⁿ` and either `S₀` is not `L`-invariant or `Φ(fᵢ) ∈ S₀` for all `i`.
pub fn sigma1_stlc<T: Scalar>(sys: &QuadraticSystem<T>) -> Result<Verdict<T>, StlcError> {
    if sys.k() != 1 {
        return Err(StlcError::WrongRank { expected: 1, found: sys.k() });
    }
    let chain = s_chain(sys);
    sigma1_with_chain(sys, &chain)
}

fn sigma1_with_chain<T: Scalar>(sys: &QuadraticSystem<T>, chain: &ChainResult<T>) -> Result<Verdict<T>, StlcError> {
    let degree = chain.degree_of_reachability;
    if !chain.subspaces[1].is_full() {
        let mut v = verdict_from_chain(sys, chain);
        v.tag = VerdictTag::NotStlc;
        return Ok(v);
    }
    let s0 = &chain.subspaces[0];
    let not_invariant = sys.controls().iter().enumerate().find_map(|(i, b)| {
        let image = sys.apply_l(b);
        (!s0.contains(&image).expect("system dimension")).then_some(RankOneBranch::NotLInvariant { control: i, image })
    });
    let branch = not_invariant.or_else(|| {
        let phis: Vec<Vector<T>> = sys.controls().iter().map(|f| sys.phi(f).expect("system dimension")).collect();
        s0.contains_all(&phis).expect("system dimension").then_some(RankOneBranch::PhiInS0 { phis })
    });
    Ok(match branch {
        Some(branch) => Verdict::decided(
            VerdictTag::Stlc,
            Rule::RankOneUnderactuation,
            Certificate::RankOne { s1_generators: s1_generators(sys), branch },
        )
        .with_degree(degree),
        None => Verdict::inconclusive(vec![Rule::RankOneUnderactuation]).with_degree(degree),
    })
}

/// Coefficient matrix of `x ↦ wᵀΦ(x)`: `M_ij = ½ wᵀΨ(eᵢ, eⱼ)`.
pub fn monotone_form<T: Scalar>(sys: &QuadraticSystem<T>, w: &[T]) -> Matrix<T> {
    let n = sys.n();
    let half = T::ratio(1, 2);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| half.clone() * linalg::dot(w, &sys.psi(&unit(n, i), &unit(n, j)).expect("system dimension")))
                .collect()
        })
        .collect()
}

fn float_scale<T: Scalar>(rows: &[Vector<T>]) -> f64 {
    rows.iter().flat_map(|r| r.iter().map(|x| x.to_f64().abs())).fold(1.0, f64::max)
}

// A small multiple of n·ε·scale: SVD and eigenvalue noise exceeds the bare bound.
fn default_tol<T: Scalar>(sys: &QuadraticSystem<T>, scale: f64) -> f64 {
    sys.tol_override().unwrap_or(16.0 * sys.n() as f64 * f64::EPSILON * scale)
}

/// Functionals `w` with `wᵀF = 0` and `wᵀL = 0`.
pub fn monotone_candidates<T: Scalar>(sys: &QuadraticSystem<T>) -> Vec<Vector<T>> {
    let mut rows: Vec<Vector<T>> = sys.controls().to_vec();
    rows.extend(transpose(sys.l()));
    let tol = default_tol(sys, float_scale(&rows));
    kernel(&rows, sys.n(), tol).expect("system dimension")
}

fn probe_directions<T: Scalar>(basis: &[Vector<T>]) -> Vec<Vector<T>> {
    let combine = |p: i64, a: &Vector<T>, q: i64, b: &Vector<T>| linalg::add(&linalg::scale(&T::int(p), a), &linalg::scale(&T::int(q), b));
    match basis {
        [] => Vec::new(),
        [w] => vec![w.clone()],
        [a, b] => {
            // Primitive integer directions with |p|, |q| ≤ 4, one per line through 0.
            let mut out = Vec::new();
            for p in 0..=4i64 {
                for q in -4..=4i64 {
                    if (p == 0 && q <= 0) || p.gcd(&q) != 1 {
                        continue;
                    }
                    out.push(combine(p, a, q, b));
                }
            }
            out
        }
        _ => {
            let mut out = basis.to_vec();
            for (i, a) in basis.iter().enumerate() {
                for b in &basis[i + 1..] {
                    out.push(combine(1, a, 1, b));
                    out.push(combine(1, a, -1, b));
                }
            }
            out
        }
    }
}

/// Searches for `w ≠ 0` with `wᵀF = 0`, `wᵀL = 0` and `wᵀΦ` semidefinite and
/// nonzero; `wᵀx` is then monotone along every trajectory.
///
/// A one-dimensional candidate space is decided exactly. In dimension two a
/// grid of primitive integer directions is probed; above that only basis
/// vectors and their pairwise sums and differences. `None` is not a proof of
/// anything.
pub fn monotone_certificate<T: Scalar>(sys: &QuadraticSystem<T>) -> Option<(Vector<T>, Matrix<T>, Definiteness)> {
    let candidates = monotone_candidates(sys);
    probe_directions(&candidates).into_iter().find_map(|w| {
        let form = monotone_form(sys, &w);
        match semidefiniteness(&form, default_tol(sys, 1.0)) {
            d @ (Definiteness::PositiveSemidefinite | Definiteness::NegativeSemidefinite) => Some((w, form, d)),
            _ => None,
        }
    })
}

fn closed_form_rule<T: Scalar>(sys: &QuadraticSystem<T>) -> Option<(Rule, T, T)> {
    if sys.num_controls() != 1 {
        return None;
    }
    let f = &sys.controls()[0];
    match match_model(sys)? {
        ModelMatch::Sprott { .. } => {
            let lin = f.iter().cloned().fold(T::zero(), |a, b| a + b);
            Some((Rule::SprottClosedForm, lin, quadratic_form(&sprott_h(), f)))
        }
        ModelMatch::Lorenz { sigma, rho, beta } => {
            if LorenzConstants::new(&sigma, &rho, &beta).s.is_zero() {
                return None;
            }
            Some((Rule::LorenzClosedForm, f[2].clone(), quadratic_form(&lorenz_h(&sigma, &rho), f)))
        }
    }
}

/// The full cascade; returns at the first decisive rule.
///
/// 1. accessibility rank, 2. linearization, 3. Sprott/Lorenz closed forms,
/// 4. zero linear part with one input, 5. Hermes–Sussmann at `ū = 0`,
/// 6. rank-one underactuation, 7. monotone functional, 8. inconclusive.
pub fn stlc_verdict<T: Scalar>(sys: &QuadraticSystem<T>) -> Verdict<T> {
    let chain = s_chain(sys);
    stlc_verdict_with_chain(sys, &chain)
}

pub fn stlc_verdict_with_chain<T: Scalar>(sys: &QuadraticSystem<T>, chain: &ChainResult<T>) -> Verdict<T> {
    let degree = chain.degree_of_reachability;
    let mut attempted = Vec::new();
    let finish = |mut v: Verdict<T>, mut attempted: Vec<Rule>| {
        if let Some(rule) = v.rule {
            attempted.push(rule);
        }
        v.attempted = attempted;
        v.with_degree(degree)
    };

    if !chain.last().is_full() {
        let mut v = verdict_from_chain(sys, chain);
        v.tag = VerdictTag::NotStlc;
        return finish(v, attempted);
    }
    attempted.push(Rule::AccessibilityRank);

    if let Some(vectors) = krylov_certificate(sys) {
        return finish(Verdict::decided(VerdictTag::Stlc, Rule::Linearization, Certificate::Krylov { vectors }), attempted);
    }
    attempted.push(Rule::Linearization);

    if let Some((rule, lin, quad)) = closed_form_rule(sys) {
        // The linearization already covers (lin · quad ≠ 0), so this branch only
        // concludes NotStlc, and only with a confirmed obstruction.
        if let Some(hs) = hermes_sussmann_obstruction(sys).expect("single input") {
            let f = sys.controls()[0].clone();
            let cert = ClosedFormCertificate {
                krylov_determinant: krylov_determinant(sys.l(), &f),
                control: f,
                linear_factor: lin,
                quadratic_factor: quad,
                hermes_sussmann: Some(hs),
            };
            return finish(Verdict::decided(VerdictTag::NotStlc, rule, Certificate::ClosedForm(cert)), attempted);
        }
        attempted.push(rule);
    }

    if let Some(v) = zero_l_single_input(sys) {
        return finish(v, attempted);
    }
    if sys.k() == sys.n() - 1 {
        if let Some(hs) = hermes_sussmann_obstruction(sys).expect("single input") {
            return finish(Verdict::decided(VerdictTag::NotStlc, Rule::HermesSussmann, Certificate::HermesSussmann(hs)), attempted);
        }
        attempted.push(Rule::HermesSussmann);
    }

    if sys.k() == 1 {
        let v = sigma1_with_chain(sys, chain).expect("k = 1");
        if v.tag.is_decisive() {
            return finish(v, attempted);
        }
        attempted.push(Rule::RankOneUnderactuation);
    }

    if let Some((w, form, definiteness)) = monotone_certificate(sys) {
        return finish(
            Verdict::decided(VerdictTag::NotStlc, Rule::MonotoneFunctional, Certificate::Monotone { w, form, definiteness }),
            attempted,
        );
    }
    attempted.push(Rule::MonotoneFunctional);

    Verdict::inconclusive(attempted).with_degree(degree)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("certificate kind does not fit rule {0}")]
    WrongKind(&'static str),
    #[error("certificate check failed: {0}")]
    Failed(&'static str),
}

fn fail(msg: &'static str) -> CertificateError {
    CertificateError::Failed(msg)
}

/// Rank of a list of vectors via the kernel of the matrix they form as rows.
fn rank_of<T: Scalar>(n: usize, vs: &[Vector<T>], tol: f64) -> usize {
    if vs.is_empty() {
        return 0;
    }
    n - kernel(vs, n, tol).expect("vector length").len()
}

fn independent_subset<T: Scalar>(sys: &QuadraticSystem<T>, vs: Vec<Vector<T>>) -> Vec<Vector<T>> {
    let tol = check_tol(sys, &vs);
    let mut kept: Vec<Vector<T>> = Vec::new();
    for v in vs {
        let mut with = kept.clone();
        with.push(v.clone());
        if rank_of(sys.n(), &with, tol) > kept.len() {
            kept = with;
        }
    }
    kept
}

fn check_tol<T: Scalar>(sys: &QuadraticSystem<T>, vs: &[Vector<T>]) -> f64 {
    match T::MODE {
        Mode::Rational => 0.0,
        Mode::Float => sys.tol_override().unwrap_or(1e-9 * float_scale(vs)),
    }
}

fn in_span<T: Scalar>(sys: &QuadraticSystem<T>, basis: &[Vector<T>], v: &[T]) -> bool {
    let mut with = basis.to_vec();
    with.push(v.to_vec());
    let tol = check_tol(sys, &with);
    rank_of(sys.n(), &with, tol) == rank_of(sys.n(), basis, tol)
}

fn approx_eq<T: Scalar>(a: &[T], b: &[T]) -> bool {
    match T::MODE {
        Mode::Rational => a == b,
        Mode::Float => {
            let d = linalg::norm(&to_f64_vec(&linalg::sub(a, b)));
            d <= 1e-9 * linalg::norm(&to_f64_vec(a)).max(1.0)
        }
    }
}

// Every principal minor nonnegative (resp. of sign (−1)^size for NSD).
fn semidefinite_by_minors<T: Scalar>(m: &Matrix<T>, negative: bool) -> bool {
    let n = m.len();
    if T::MODE == Mode::Float {
        let ev = symmetric_eigenvalues(&m.iter().map(|r| to_f64_vec(r)).collect::<Vec<_>>());
        let scale = ev.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        return ev.iter().all(|&x| if negative { x <= 1e-9 * scale } else { x >= -1e-9 * scale });
    }
    (1u32..(1 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub: Matrix<T> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect()).collect();
        let d = linalg::determinant(&sub);
        let d = if negative && idx.len() % 2 == 1 { -d } else { d };
        !d.is_negative()
    })
}

fn check_hs<T: Scalar>(sys: &QuadraticSystem<T>, hs: &HsCertificate<T>) -> Result<(), CertificateError> {
    if sys.num_controls() != 1 || hs.control != sys.controls()[0] {
        return Err(fail("control does not match the system's single input"));
    }
    if !approx_eq(&hs.phi, &sys.phi(&hs.control).expect("system dimension")) {
        return Err(fail("phi is not Phi(f)"));
    }
    // The recorded basis must span exactly {f, Lf, …, L^{n−1}f}.
    let mut powers = vec![hs.control.clone()];
    for _ in 1..sys.n() {
        powers.push(sys.apply_l(powers.last().expect("nonempty")));
    }
    let tol = check_tol(sys, &powers);
    let r = rank_of(sys.n(), &powers, tol);
    if rank_of(sys.n(), &hs.krylov_basis, tol) != r || hs.krylov_basis.iter().any(|b| !in_span(sys, &powers, b)) {
        return Err(fail("basis does not span the Krylov space of f"));
    }
    if in_span(sys, &powers, &hs.phi) {
        return Err(fail("Phi(f) lies in the Krylov space"));
    }
    Ok(())
}

/// Re-checks a verdict's certificate from scratch, without the producing code paths.
pub fn validate_certificate<T: Scalar>(sys: &QuadraticSystem<T>, verdict: &Verdict<T>) -> Result<(), CertificateError> {
    let n = sys.n();
    let Some(rule) = verdict.rule else {
        return match verdict.certificate {
            Certificate::None if verdict.tag == VerdictTag::Inconclusive => Ok(()),
            _ => Err(CertificateError::WrongKind("none")),
        };
    };
    match (&verdict.certificate, verdict.tag) {
        (Certificate::Chain { basis, .. }, VerdictTag::NotAccessible | VerdictTag::NotStlc) => {
            // The span of `basis` contains S₀ and is closed under the step
            // generators, so it contains every S_λ; a deficient rank proves S_k ≠ ℝⁿ.
            let tol = check_tol(sys, basis);
            if rank_of(n, basis, tol) >= n {
                return Err(fail("basis is not deficient"));
            }
            if sys.controls().iter().any(|f| !in_span(sys, basis, f)) {
                return Err(fail("basis does not contain the controls"));
            }
            for (i, u) in basis.iter().enumerate() {
                let mut images = vec![sys.apply_l(u), sys.phi(u).expect("dim")];
                for v in &basis[i + 1..] {
                    // polarization instead of Ψ
                    let s = linalg::add(u, v);
                    let pol = linalg::sub(&linalg::sub(&sys.phi(&s).expect("dim"), &sys.phi(u).expect("dim")), &sys.phi(v).expect("dim"));
                    images.push(pol);
                }
                if images.iter().any(|w| !in_span(sys, basis, w)) {
                    return Err(fail("basis is not invariant under L, Phi and Psi"));
                }
            }
            Ok(())
        }
        (Certificate::Chain { basis, .. }, VerdictTag::StronglyAccessible) => {
            // Recompute S_0 ⊆ S_1 ⊆ … by plain rank counting.
            let mut gens = sys.controls().to_vec();
            for _ in 0..sys.k() {
                let current = gens.clone();
                for u in &current {
                    gens.push(sys.apply_l(u));
                    gens.push(sys.phi(u).expect("dim"));
                    for v in &current {
                        gens.push(sys.psi(u, v).expect("dim"));
                    }
                }
                gens = independent_subset(sys, gens);
            }
            let tol = check_tol(sys, &gens);
            if rank_of(n, &gens, tol) == n && rank_of(n, basis, tol) == n {
                Ok(())
            } else {
                Err(fail("S_k is not the whole space"))
            }
        }
        (Certificate::Krylov { vectors }, VerdictTag::Stlc) => {
            for ((i, p), v) in vectors {
                let Some(f) = sys.controls().get(*i) else {
                    return Err(fail("control index out of range"));
                };
                let lp = (0..*p).fold(f.clone(), |x, _| mat_vec(sys.l(), &x));
                if !approx_eq(&lp, v) {
                    return Err(fail("vector is not L^p f_i"));
                }
            }
            let vs: Vec<Vector<T>> = vectors.iter().map(|(_, v)| v.clone()).collect();
            if rank_of(n, &vs, check_tol(sys, &vs)) == n {
                Ok(())
            } else {
                Err(fail("Krylov vectors do not span"))
            }
        }
        (Certificate::RankOne { s1_generators: gens, branch }, VerdictTag::Stlc) => {
            if sys.k() != 1 {
                return Err(fail("rank-one rule needs k = 1"));
            }
            let mut expected = sys.controls().to_vec();
            for (i, u) in sys.controls().iter().enumerate() {
                expected.push(sys.apply_l(u));
                expected.push(sys.phi(u).expect("dim"));
                for v in &sys.controls()[i + 1..] {
                    expected.push(sys.psi(u, v).expect("dim"));
                }
            }
            let tol = check_tol(sys, &expected);
            if rank_of(n, &expected, tol) != n || rank_of(n, gens, tol) != n {
                return Err(fail("S_1 is not the whole space"));
            }
            let s0 = sys.controls();
            match branch {
                RankOneBranch::NotLInvariant { control, image } => {
                    let Some(b) = s0.get(*control) else {
                        return Err(fail("control index out of range"));
                    };
                    if !approx_eq(image, &sys.apply_l(b)) || in_span(sys, s0, image) {
                        return Err(fail("L b_i lies in S_0"));
                    }
                }
                RankOneBranch::PhiInS0 { phis } => {
                    if phis.len() != s0.len() {
                        return Err(fail("one Phi(f_i) per control expected"));
                    }
                    for (f, p) in s0.iter().zip(phis) {
                        if !approx_eq(p, &sys.phi(f).expect("dim")) || !in_span(sys, s0, p) {
                            return Err(fail("Phi(f_i) outside S_0"));
                        }
                    }
                }
            }
            Ok(())
        }
        (Certificate::HermesSussmann(hs), VerdictTag::NotStlc) => check_hs(sys, hs),
        (Certificate::ZeroLinear(cause), VerdictTag::NotStlc) => {
            if !linalg::is_zero_matrix(sys.l()) || sys.num_controls() != 1 {
                return Err(fail("rule needs L = 0 and a single input"));
            }
            match cause {
                ZeroLinearCause::HermesSussmann(hs) => check_hs(sys, hs),
                ZeroLinearCause::NotAccessible { phi } => {
                    let f = &sys.controls()[0];
                    if approx_eq(phi, &sys.phi(f).expect("dim")) && in_span(sys, std::slice::from_ref(f), phi) {
                        Ok(())
                    } else {
                        Err(fail("Phi(f) is not along f"))
                    }
                }
            }
        }
        (Certificate::Monotone { w, form, definiteness }, VerdictTag::NotStlc) => {
            if linalg::is_zero_vec(w) {
                return Err(fail("w is zero"));
            }
            let lt_w = mat_vec(&transpose(sys.l()), w);
            let zero = vec![T::zero(); n];
            if !approx_eq(&lt_w, &zero) || sys.controls().iter().any(|f| !approx_eq(&[linalg::dot(w, f)], &[T::zero()])) {
                return Err(fail("w does not annihilate L and F"));
            }
            // wᵀΦ(x) = xᵀMx, checked on the unit vectors and their pairwise sums.
            for i in 0..n {
                for j in i..n {
                    let x = if i == j { unit(n, i) } else { linalg::add(&unit(n, i), &unit(n, j)) };
                    let lhs = linalg::dot(w, &sys.phi(&x).expect("dim"));
                    let rhs = linalg::dot(&x, &mat_vec(form, &x));
                    if !approx_eq(&[lhs], &[rhs]) {
                        return Err(fail("form does not represent w^T Phi"));
                    }
                }
            }
            let ok = match definiteness {
                Definiteness::PositiveSemidefinite => semidefinite_by_minors(form, false),
                Definiteness::NegativeSemidefinite => semidefinite_by_minors(form, true),
                _ => false,
            };
            if ok && !linalg::is_zero_matrix(form) {
                Ok(())
            } else {
                Err(fail("form is not a nonzero semidefinite matrix"))
            }
        }
        (Certificate::ClosedForm(cf), tag) => {
            let det = krylov_determinant(sys.l(), &cf.control);
            if sys.n() != 3 || !approx_eq(&[det.clone()], &[cf.krylov_determinant.clone()]) {
                return Err(fail("Krylov determinant mismatch"));
            }
            match tag {
                VerdictTag::Stlc if !det.is_zero() => Ok(()),
                VerdictTag::NotStlc => match &cf.hermes_sussmann {
                    Some(hs) => check_hs(sys, hs),
                    None => Err(fail("no confirmed obstruction recorded")),
                },
                VerdictTag::NotAccessible => {
                    let mut gens = vec![cf.control.clone()];
                    for _ in 0..sys.k() {
                        let current = gens.clone();
                        for u in &current {
                            gens.push(sys.apply_l(u));
                            for v in &current {
                                gens.push(sys.psi(u, v).expect("dim"));
                            }
                        }
                        gens = independent_subset(sys, gens);
                    }
                    if rank_of(n, &gens, check_tol(sys, &gens)) < n {
                        Ok(())
                    } else {
                        Err(fail("system is accessible"))
                    }
                }
                _ => Err(fail("closed form does not support this verdict")),
            }
        }
        _ => Err(CertificateError::WrongKind(rule.id())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{imat, ivec, Rational};
    use crate::models::{lorenz, paper_example, sprott};

    type Q = Rational;

    fn example(name: &str) -> QuadraticSystem<Q> {
        paper_example(name).unwrap().system
    }

    fn checked(sys: &QuadraticSystem<Q>) -> Verdict<Q> {
        let v = stlc_verdict(sys);
        assert_eq!(validate_certificate(sys, &v), Ok(()), "{v:?}");
        v
    }

    #[test]
    fn linearization_examples() {
        assert!(linearization_stlc(&sprott(Q::int(0), vec![ivec(&[1, 0, 0])]).unwrap()));
        assert!(!linearization_stlc(&example("sprott-counterexample-flow")));
        assert!(!linearization_stlc(&example("r3-stlc")));
    }

    #[test]
    fn sigma1_examples() {
        let v = sigma1_stlc(&example("r3-stlc")).unwrap();
        assert_eq!(v.tag, VerdictTag::Stlc);
        assert!(matches!(v.certificate, Certificate::RankOne { branch: RankOneBranch::PhiInS0 { .. }, .. }));
        assert_eq!(sigma1_stlc(&example("sprott-counterexample-flow")).unwrap().tag, VerdictTag::Inconclusive);
        let deficient: QuadraticSystem<Q> =
            QuadraticSystem::new(imat(&[&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]]), ivec(&[0, 0, 0]), ivec(&[0, 0, 0]), ivec(&[0, 0, 0]), vec![unit(3, 0), unit(3, 1)]).unwrap();
        let v = sigma1_stlc(&deficient).unwrap();
        assert_eq!(v.tag, VerdictTag::NotStlc);
        assert_eq!(validate_certificate(&deficient, &v), Ok(()));
        assert_eq!(sigma1_stlc(&example("hypergraph")).err(), Some(StlcError::WrongRank { expected: 1, found: 2 }));
    }

    #[test]
    fn hermes_sussmann_examples() {
        let rb = crate::models::rigid_body(&ivec::<Q>(&[1, 2, 3]), vec![unit(3, 0)], false).unwrap();
        assert_eq!(hermes_sussmann_obstruction(&rb).unwrap(), None);
        let s = sprott(Q::int(1), vec![ivec(&[1, -1, 0])]).unwrap();
        let hs = hermes_sussmann_obstruction(&s).unwrap().unwrap();
        assert_eq!(hs.phi, ivec::<Q>(&[1, 0, 1]));
        assert!(hs.krylov_basis.len() <= 2);
        assert_eq!(hermes_sussmann_obstruction(&sprott(Q::int(1), vec![ivec(&[1, 0, 0])]).unwrap()).unwrap(), None);
        assert!(hermes_sussmann_obstruction(&example("r3-stlc")).is_err());
    }

    #[test]
    fn zero_l_examples() {
        let v = zero_l_single_input(&example("hypergraph")).unwrap();
        assert_eq!(v.tag, VerdictTag::NotStlc);
        let h123 = example("hypergraph").with_controls(vec![ivec(&[1, 2, 3])]).unwrap();
        let v = zero_l_single_input(&h123).unwrap();
        assert!(matches!(v.certificate, Certificate::ZeroLinear(ZeroLinearCause::HermesSussmann(_))));
        assert_eq!(validate_certificate(&h123, &v), Ok(()));
        assert!(zero_l_single_input(&example("sprott-counterexample-flow")).is_none());
    }

    #[test]
    fn monotone_examples() {
        let (w, _, d) = monotone_certificate(&example("sprott-counterexample-flow")).unwrap();
        assert_eq!(w, unit::<Q>(3, 2));
        assert_eq!(d, Definiteness::PositiveSemidefinite);
        assert!(monotone_certificate(&sprott(Q::int(0), vec![unit(3, 0), unit(3, 1)]).unwrap()).is_none());
        assert!(monotone_certificate(&sprott(Q::int(1), vec![unit(3, 0)]).unwrap()).is_none());
    }

    #[test]
    fn cascade_examples() {
        let v = checked(&sprott(Q::int(1), vec![ivec(&[1, 0, 0])]).unwrap());
        assert_eq!((v.tag, v.rule), (VerdictTag::Stlc, Some(Rule::Linearization)));
        let v = checked(&example("sprott-counterexample-flow"));
        assert_eq!((v.tag, v.rule), (VerdictTag::NotStlc, Some(Rule::MonotoneFunctional)));
        let v = checked(&lorenz(Q::int(10), Q::int(28), Q::ratio(8, 3), vec![unit(3, 2)]).unwrap());
        assert_eq!((v.tag, v.rule), (VerdictTag::NotStlc, Some(Rule::AccessibilityRank)));
        assert_eq!(v.degree_of_reachability, Some(1));
        let v = checked(&example("r3-stlc"));
        assert_eq!((v.tag, v.rule), (VerdictTag::Stlc, Some(Rule::RankOneUnderactuation)));
        let v = checked(&example("hypergraph"));
        assert_eq!((v.tag, v.rule), (VerdictTag::NotStlc, Some(Rule::AccessibilityRank)));
        let v = checked(&sprott(Q::int(1), vec![ivec(&[1, -1, 0])]).unwrap());
        assert_eq!((v.tag, v.rule), (VerdictTag::NotStlc, Some(Rule::SprottClosedForm)));
        let v = checked(&lorenz(Q::int(10), Q::int(28), Q::ratio(8, 3), vec![ivec(&[2, -3, 0])]).unwrap());
        assert_eq!((v.tag, v.rule), (VerdictTag::NotStlc, Some(Rule::LorenzClosedForm)));
        // Axis controls: the closed form has no obstruction to offer.
        let v = checked(&lorenz(Q::int(10), Q::int(28), Q::ratio(8, 3), vec![unit(3, 0)]).unwrap());
        assert_eq!(v.tag, VerdictTag::Inconclusive);
        assert!(v.attempted.contains(&Rule::LorenzClosedForm));
    }

    #[test]
    fn float_cascade_matches_exact() {
        for name in ["r5-nonaccessible", "sprott-counterexample-flow", "r3-stlc", "hypergraph"] {
            let sys = example(name);
            let (vq, vf) = (stlc_verdict(&sys), stlc_verdict(&sys.convert::<f64>()));
            assert_eq!((vq.tag, vq.rule), (vf.tag, vf.rule), "{name}");
            assert_eq!(validate_certificate(&sys.convert::<f64>(), &vf), Ok(()), "{name}");
        }
    }

    #[test]
    fn validator_rejects_tampered_certificates() {
        let sys = example("sprott-counterexample-flow");
        let mut v = stlc_verdict(&sys);
        if let Certificate::Monotone { w, .. } = &mut v.certificate {
            *w = unit(3, 0);
        }
        assert!(validate_certificate(&sys, &v).is_err());
        let sys = example("r5-nonaccessible");
        let mut v = stlc_verdict(&sys);
        if let Certificate::Chain { basis, .. } = &mut v.certificate {
            basis.pop();
        }
        assert!(validate_certificate(&sys, &v).is_err());
    }
}
