//! Coarse-graining isometries, their dilation composition, and the Löwner-order
//! entropy inequalities they imply, each returned as a machine-checkable
//! [`LoewnerReport`].
//!
//! Pair checks take `ρ` on two factors `(A, B)` and `σ` on `(B, C)`; the
//! shared factor must carry the same label and dimension. Tripartite checks
//! read the three factors of `ρ` positionally as `(A, B, C)`. All operators are
//! assembled on the common `A ⊗ B ⊗ C` ordering.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{
    hermitian_eig, kron, matrix_fn, operator_norm, ComplexMatrix, MatrixFunction, C64,
    HERMITIAN_TOL,
};
use crate::state::DensityMatrix;
use crate::tensor::{embed, partial_trace, permutation_matrix, SystemShape};

/// Default absolute tolerance of the Löwner verdict band.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Allowed relative anti-Hermitian part of the operator-SSA partial trace.
pub const SSA_HERMITIAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Inequality {
    #[serde(rename = "key-lemma")]
    KeyLemma,
    #[serde(rename = "wm-op")]
    OperatorWm,
    #[serde(rename = "wm-op-tripartite")]
    OperatorWmTripartite,
    #[serde(rename = "renyi")]
    Renyi,
    #[serde(rename = "op-ssa")]
    OperatorSsa,
    #[serde(rename = "scalar-wm")]
    ScalarWm,
    #[serde(rename = "scalar-ssa")]
    ScalarSsa,
    #[serde(rename = "single-term")]
    SingleTerm,
}

impl Inequality {
    pub const ALL: [Inequality; 8] = [
        Inequality::KeyLemma,
        Inequality::OperatorWm,
        Inequality::OperatorWmTripartite,
        Inequality::Renyi,
        Inequality::OperatorSsa,
        Inequality::ScalarWm,
        Inequality::ScalarSsa,
        Inequality::SingleTerm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Inequality::KeyLemma => "key-lemma",
            Inequality::OperatorWm => "wm-op",
            Inequality::OperatorWmTripartite => "wm-op-tripartite",
            Inequality::Renyi => "renyi",
            Inequality::OperatorSsa => "op-ssa",
            Inequality::ScalarWm => "scalar-wm",
            Inequality::ScalarSsa => "scalar-ssa",
            Inequality::SingleTerm => "single-term",
        }
    }

    /// Takes an independent pair `(ρ_AB, σ_BC)`.
    pub fn is_pair(self) -> bool {
        matches!(self, Inequality::KeyLemma | Inequality::OperatorWm | Inequality::Renyi)
    }

    /// Number of tensor factors the inequality is stated on.
    pub fn arity(self) -> usize {
        match self {
            Inequality::SingleTerm => 2,
            _ => 3,
        }
    }

    /// False only for the single-term spectrum, which is not an inequality that holds.
    pub fn is_proven(self) -> bool {
        self != Inequality::SingleTerm
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Inequality {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Inequality::ALL
            .into_iter()
            .find(|i| i.as_str() == s)
            .ok_or_else(|| LabError::InvalidArgument(format!("unknown inequality `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

impl Verdict {
    /// Holds when `slack ≥ −tol·(1+scale)`, violated below `−10·tol·(1+scale)`.
    pub fn classify(slack_min_eig: f64, scale: f64, tol_abs: f64) -> Self {
        let band = tol_abs * (1.0 + scale);
        if slack_min_eig >= -band {
            Verdict::Holds
        } else if slack_min_eig < -10.0 * band {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Verdict record for one inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoewnerReport {
    pub inequality: Inequality,
    pub dims: Vec<usize>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(with = "nan_as_null")]
    pub slack_min_eig: f64,
    #[serde(with = "nan_as_null")]
    pub scale: f64,
    pub tol_abs: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Eigenvector of the slack operator achieving `slack_min_eig`.
    #[serde(skip)]
    pub witness: Vec<C64>,
}

impl LoewnerReport {
    pub fn new(
        inequality: Inequality,
        dims: Vec<usize>,
        slack_min_eig: f64,
        scale: f64,
        tol_abs: f64,
        witness: Vec<C64>,
    ) -> Self {
        Self {
            inequality,
            dims,
            seed: 0,
            trial: None,
            alpha: None,
            epsilon: None,
            slack_min_eig,
            scale,
            tol_abs,
            verdict: Verdict::classify(slack_min_eig, scale, tol_abs),
            error: None,
            witness,
        }
    }

    /// Record for a check that could not be evaluated numerically.
    pub fn failed(inequality: Inequality, dims: Vec<usize>, tol_abs: f64, err: &LabError) -> Self {
        Self {
            inequality,
            dims,
            seed: 0,
            trial: None,
            alpha: None,
            epsilon: None,
            slack_min_eig: f64::NAN,
            scale: f64::NAN,
            tol_abs,
            verdict: Verdict::Inconclusive,
            error: Some(err.to_string()),
            witness: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64, trial: Option<u64>) -> Self {
        self.seed = seed;
        self.trial = trial;
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(LabError::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

/// Spectral norm of a Hermitian matrix.
fn hermitian_norm(h: &ComplexMatrix) -> Result<f64> {
    let eig = hermitian_eig(h)?;
    Ok(eig.min().abs().max(eig.max().abs()))
}

/// Report for `lhs ≤ rhs`; both sides must be Hermitian up to round-off.
fn loewner_report(
    inequality: Inequality,
    dims: Vec<usize>,
    lhs: &ComplexMatrix,
    rhs: &ComplexMatrix,
    tol: f64,
) -> Result<LoewnerReport> {
    let slack = (rhs - lhs).hermitize(HERMITIAN_TOL)?;
    let scale = hermitian_norm(lhs)?.max(hermitian_norm(rhs)?);
    slack_report(inequality, dims, &slack, scale, tol)
}

fn slack_report(
    inequality: Inequality,
    dims: Vec<usize>,
    slack: &ComplexMatrix,
    scale: f64,
    tol: f64,
) -> Result<LoewnerReport> {
    let eig = hermitian_eig(slack)?;
    Ok(LoewnerReport::new(
        inequality,
        dims,
        eig.min(),
        scale,
        tol,
        eig.eigenvectors.column_vec(0),
    ))
}

/// Labels and marginals of a validated `(ρ_AB, σ_BC)` pair.
struct Pair<'a> {
    rho: &'a DensityMatrix,
    sigma: &'a DensityMatrix,
    rho_a: DensityMatrix,
    sigma_c: DensityMatrix,
    shape: SystemShape,
}

impl<'a> Pair<'a> {
    fn new(rho: &'a DensityMatrix, sigma: &'a DensityMatrix) -> Result<Self> {
        let (rs, ss) = (rho.shape(), sigma.shape());
        if rs.len() != 2 || ss.len() != 2 {
            return Err(LabError::InvalidShape(format!(
                "pair inequalities need two-factor states, got {rs} and {ss}"
            )));
        }
        if rs.label(1) != ss.label(0) || rs.dim(1) != ss.dim(0) {
            return Err(LabError::DimensionMismatch(format!(
                "shared factor differs: {rs} vs {ss}"
            )));
        }
        let shape = SystemShape::new([
            (rs.label(0), rs.dim(0)),
            (rs.label(1), rs.dim(1)),
            (ss.label(1), ss.dim(1)),
        ])?;
        let rho_a = rho.marginal(&[rs.label(0)])?;
        let sigma_c = sigma.marginal(&[ss.label(1)])?;
        Ok(Self { rho, sigma, rho_a, sigma_c, shape })
    }

    fn dims(&self) -> Vec<usize> {
        self.shape.dims()
    }

    fn label(&self, i: usize) -> &str {
        self.shape.label(i)
    }
}

fn tripartite_labels(rho: &DensityMatrix) -> Result<[String; 3]> {
    let s = rho.shape();
    if s.len() != 3 {
        return Err(LabError::InvalidShape(format!(
            "tripartite inequalities need a three-factor state, got {s}"
        )));
    }
    Ok([s.label(0).to_string(), s.label(1).to_string(), s.label(2).to_string()])
}

fn log(m: &DensityMatrix) -> Result<ComplexMatrix> {
    matrix_fn(m.data(), MatrixFunction::Log)
}

/// Identity-padded `m`: `I_left ⊗ m ⊗ I_right`.
fn pad(left: usize, m: &ComplexMatrix, right: usize) -> Result<ComplexMatrix> {
    kron(&kron(&ComplexMatrix::identity(left), m)?, &ComplexMatrix::identity(right))
}

/// `ρ_A^{−1} ⊗ σ_BC ≤ ρ_AB^{−1} ⊗ σ_C`.
pub fn check_key_lemma(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: f64,
) -> Result<LoewnerReport> {
    check_tol(tol)?;
    let pair = Pair::new(rho, sigma)?;
    let inv = |m: &DensityMatrix| matrix_fn(m.data(), MatrixFunction::Inverse);
    // factors on disjoint supports commute, so each side is a single Kronecker product
    let lhs = kron(&inv(&pair.rho_a)?, pair.sigma.data())?;
    let rhs = kron(&inv(pair.rho)?, pair.sigma_c.data())?;
    loewner_report(Inequality::KeyLemma, pair.dims(), &lhs, &rhs, tol)
}

/// `ρ_A^{−α} ⊗ σ_BC^{α} ≤ ρ_AB^{−α} ⊗ σ_C^{α}` for `α ∈ [0, 1]`.
pub fn check_renyi(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: f64,
    tol: f64,
) -> Result<LoewnerReport> {
    check_tol(tol)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(LabError::InvalidArgument(format!("α = {alpha} outside [0, 1]")));
    }
    let pair = Pair::new(rho, sigma)?;
    let pow = |m: &DensityMatrix, p: f64| matrix_fn(m.data(), MatrixFunction::Power(p));
    let lhs = kron(&pow(&pair.rho_a, -alpha)?, &pow(pair.sigma, alpha)?)?;
    let rhs = kron(&pow(pair.rho, -alpha)?, &pow(&pair.sigma_c, alpha)?)?;
    let mut report = loewner_report(Inequality::Renyi, pair.dims(), &lhs, &rhs, tol)?;
    report.alpha = Some(alpha);
    Ok(report)
}

/// `log ρ_AB − log ρ_A + log σ_BC − log σ_C` on `A ⊗ B ⊗ C`.
pub fn wm_operator_sum(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ComplexMatrix> {
    let pair = Pair::new(rho, sigma)?;
    let [da, db, dc] = [pair.shape.dim(0), pair.shape.dim(1), pair.shape.dim(2)];
    let t_ab = pad(1, &log(pair.rho)?, dc)?;
    let t_a = pad(1, &log(&pair.rho_a)?, db * dc)?;
    let t_bc = pad(da, &log(pair.sigma)?, 1)?;
    let t_c = pad(da * db, &log(&pair.sigma_c)?, 1)?;
    Ok(&(&(&t_ab - &t_a) + &t_bc) - &t_c)
}

/// `log ρ_AB − log ρ_A + log σ_BC − log σ_C ≤ 0` for independent states.
pub fn check_operator_wm(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: f64,
) -> Result<LoewnerReport> {
    check_tol(tol)?;
    let sum = wm_operator_sum(rho, sigma)?.hermitize(HERMITIAN_TOL)?;
    let dims = Pair::new(rho, sigma)?.dims();
    let scale = hermitian_norm(&sum)?;
    slack_report(Inequality::OperatorWm, dims, &sum.scale(-1.0), scale, tol)
}

/// Operator weak monotonicity on the `AB` and `BC` marginals of one `ρ_ABC`.
pub fn check_operator_wm_tripartite(rho: &DensityMatrix, tol: f64) -> Result<LoewnerReport> {
    let [a, b, c] = tripartite_labels(rho)?;
    let rho_ab = rho.marginal(&[&a, &b])?;
    let rho_bc = rho.marginal(&[&b, &c])?;
    let mut report = check_operator_wm(&rho_ab, &rho_bc, tol)?;
    report.inequality = Inequality::OperatorWmTripartite;
    Ok(report)
}

/// The A-space operator `Tr_BC(ρ_ABC (log ρ_ABC + log ρ_B − log ρ_AB − log ρ_BC))`,
/// Hermitized after checking its anti-Hermitian part.
pub fn operator_ssa_matrix(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    let [a, b, c] = tripartite_labels(rho)?;
    let shape = rho.shape();
    let (da, dc) = (shape.dim(0), shape.dim(2));
    let rho_b = rho.marginal(&[&b])?;
    let rho_ab = rho.marginal(&[&a, &b])?;
    let rho_bc = rho.marginal(&[&b, &c])?;
    let l_abc = log(rho)?;
    let l_b = embed(&log(&rho_b)?, &[&b], shape)?;
    let l_ab = pad(1, &log(&rho_ab)?, dc)?;
    let l_bc = pad(da, &log(&rho_bc)?, 1)?;
    let l = &(&(&l_abc + &l_b) - &l_ab) - &l_bc;
    let m = rho.data().matmul(&l)?;
    let t = partial_trace(&m, shape, &[&b, &c])?;
    let defect = t.hermitian_defect();
    let allowed = SSA_HERMITIAN_TOL * (1.0 + l.frobenius_norm());
    if !(defect <= allowed) {
        return Err(LabError::NotHermitian { defect, allowed });
    }
    Ok(t.hermitian_part())
}

/// Operator strong subadditivity: the A-space operator is positive semi-definite.
pub fn check_operator_ssa(rho: &DensityMatrix, tol: f64) -> Result<LoewnerReport> {
    check_tol(tol)?;
    let t = operator_ssa_matrix(rho)?;
    let scale = hermitian_norm(&t)?;
    slack_report(Inequality::OperatorSsa, rho.shape().dims(), &t, scale, tol)
}

/// `S(AB) − S(A) + S(BC) − S(C)` in nats.
pub fn scalar_wm(rho: &DensityMatrix) -> Result<f64> {
    let [a, b, c] = tripartite_labels(rho)?;
    let s = |keep: &[&str]| rho.marginal(keep)?.von_neumann_entropy();
    Ok(s(&[&a, &b])? - s(&[&a])? + s(&[&b, &c])? - s(&[&c])?)
}

/// `S(AB) + S(BC) − S(ABC) − S(B)` in nats.
pub fn scalar_ssa(rho: &DensityMatrix) -> Result<f64> {
    let [a, b, c] = tripartite_labels(rho)?;
    let s = |keep: &[&str]| rho.marginal(keep)?.von_neumann_entropy();
    Ok(s(&[&a, &b])? + s(&[&b, &c])? - rho.von_neumann_entropy()? - s(&[&b])?)
}

/// Ascending spectrum of `log ρ_AB − log ρ_A ⊗ I_B`.
pub fn single_term_spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let s = rho.shape();
    if s.len() != 2 {
        return Err(LabError::InvalidShape(format!(
            "single-term spectrum needs a two-factor state, got {s}"
        )));
    }
    let rho_a = rho.marginal(&[s.label(0)])?;
    let diff = &log(rho)? - &pad(1, &log(&rho_a)?, s.dim(1))?;
    Ok(hermitian_eig(&diff)?.eigenvalues)
}

/// Rectangular map with its input/output shapes and `‖V†V − I‖`.
#[derive(Debug, Clone)]
pub struct Isometry {
    pub map: ComplexMatrix,
    pub in_shape: SystemShape,
    pub out_shape: SystemShape,
    pub defect: f64,
}

impl Isometry {
    pub fn new(map: ComplexMatrix, in_shape: SystemShape, out_shape: SystemShape) -> Result<Self> {
        if map.rows() != out_shape.total_dim() || map.cols() != in_shape.total_dim() {
            return Err(LabError::DimensionMismatch(format!(
                "{}x{} map does not go from {in_shape} to {out_shape}",
                map.rows(),
                map.cols()
            )));
        }
        let gram = map.adjoint().matmul(&map)?;
        let defect = hermitian_norm(&(&gram - &ComplexMatrix::identity(map.cols())))?;
        Ok(Self { map, in_shape, out_shape, defect })
    }
}

/// Label of the auxiliary copy of `label` paired with it by the maximally entangled vector.
pub fn star_label(label: &str) -> String {
    format!("{label}star")
}

/// Label of the isometric copy of `label` used when composing two dilations.
pub fn prime_label(label: &str) -> String {
    format!("{label}prime")
}

/// `V = ρ^{1/2} ρ_X^{−1/2} Σ_k |k⟩_B |k⟩_{B*}` from `X` (all factors of `ρ` but
/// `traced`) into `ρ`'s factors followed by `B*`.
pub fn coarse_graining_isometry(rho: &DensityMatrix, traced: &str) -> Result<Isometry> {
    let shape = rho.shape();
    let b_pos = shape.position(traced)?;
    let db = shape.dim(b_pos);
    let x_labels = shape.complement(&[traced]);
    if x_labels.is_empty() {
        return Err(LabError::InvalidArgument(
            "coarse graining needs at least one retained factor".into(),
        ));
    }
    let x_shape = shape.subshape(&x_labels)?;
    let out_shape = shape.concat(&SystemShape::new([(star_label(traced), db)])?)?;
    let rho_x = rho.marginal(&x_labels)?;
    let inv_sqrt_x = matrix_fn(rho_x.data(), MatrixFunction::Power(-0.5))?;
    let sqrt_rho = matrix_fn(rho.data(), MatrixFunction::Sqrt)?;

    // J |x⟩ = Σ_k |x with k inserted at B⟩ ⊗ |k⟩_{B*}
    let d = shape.total_dim();
    let dims = shape.dims();
    let inner: usize = dims[b_pos + 1..].iter().product();
    let mut j = ComplexMatrix::zeros(d * db, x_shape.total_dim());
    for r in 0..d {
        let k = (r / inner) % db;
        let x = (r / (inner * db)) * inner + r % inner;
        j[(r * db + k, x)] = C64::new(1.0, 0.0);
    }
    let map = kron(&sqrt_rho, &ComplexMatrix::identity(db))?.matmul(&j)?.matmul(&inv_sqrt_x)?;
    Isometry::new(map, x_shape, out_shape)
}

/// `(ρ_AB^{1/2} ⊗ σ_C^{−1/2}) (ρ_A^{−1/2} ⊗ σ_BC^{1/2})` on `A ⊗ B ⊗ C`.
pub fn contraction_closed_form(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<ComplexMatrix> {
    let pair = Pair::new(rho, sigma)?;
    let f = |m: &DensityMatrix, func| matrix_fn(m.data(), func);
    let left = kron(
        &f(pair.rho, MatrixFunction::Sqrt)?,
        &f(&pair.sigma_c, MatrixFunction::Power(-0.5))?,
    )?;
    let right = kron(
        &f(&pair.rho_a, MatrixFunction::Power(-0.5))?,
        &f(pair.sigma, MatrixFunction::Sqrt)?,
    )?;
    left.matmul(&right)
}

/// The same contraction assembled from the two coarse-graining isometries:
/// `(I_A ⊗ V_{B→B'}† ⊗ I_C)(I_A ⊗ I_{B'} ⊗ V^{σ†})(V^ρ_{A→AB'B*} ⊗ I_B ⊗ I_C)`
/// with `B' ≅ B` and `V_{B→B'}` the identity.
pub fn contraction_via_dilation(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<ComplexMatrix> {
    let pair = Pair::new(rho, sigma)?;
    let (a, b, c) = (pair.label(0), pair.label(1), pair.label(2));
    let (bstar, bprime) = (star_label(b), prime_label(b));
    let [_, db, dc] = [pair.shape.dim(0), pair.shape.dim(1), pair.shape.dim(2)];
    let da = pair.shape.dim(0);

    // V^ρ: A → (A, B, B*), with its B output renamed B'
    let v_rho = coarse_graining_isometry(rho, b)?;
    let rho_out = v_rho.out_shape.relabel(b, &bprime)?;
    debug_assert_eq!(rho_out.labels(), vec![a, bprime.as_str(), bstar.as_str()]);

    // V^σ: C → (B, C, B*), reordered to (B*, B, C)
    let v_sigma = coarse_graining_isometry(sigma, b)?;
    let align = permutation_matrix(&v_sigma.out_shape, &[&bstar, b, c])?;
    let v_sigma = align.matmul(&v_sigma.map)?;

    // (A, B, C) → (A, B', B*, B, C)
    let step_rho = kron(&v_rho.map, &ComplexMatrix::identity(db * dc))?;
    // (A, B', B*, B, C) → (A, B', C); B' is then identified with B
    let step_sigma = kron(&ComplexMatrix::identity(da * db), &v_sigma.adjoint())?;
    step_sigma.matmul(&step_rho)
}

/// Tolerance of the dilation identity and isometry checks.
pub const DILATION_TOL: f64 = 1e-10;

/// Agreement of [`contraction_via_dilation`] with [`contraction_closed_form`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub dims: Vec<usize>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<u64>,
    pub max_abs_diff: f64,
    /// Operator norm of the closed form.
    pub scale: f64,
    pub rho_isometry_defect: f64,
    pub sigma_isometry_defect: f64,
    /// Operator norm of the dilation product.
    pub operator_norm: f64,
    pub tol_abs: f64,
    pub verdict: Verdict,
}

impl DilationReport {
    pub fn with_seed(mut self, seed: u64, trial: Option<u64>) -> Self {
        self.seed = seed;
        self.trial = trial;
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

pub fn check_dilation(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DilationReport> {
    let pair = Pair::new(rho, sigma)?;
    let b = pair.label(1);
    let closed = contraction_closed_form(rho, sigma)?;
    let dilated = contraction_via_dilation(rho, sigma)?;
    let max_abs_diff = closed.max_abs_diff(&dilated);
    let scale = operator_norm(&closed)?;
    let rho_isometry_defect = coarse_graining_isometry(rho, b)?.defect;
    let sigma_isometry_defect = coarse_graining_isometry(sigma, b)?.defect;
    let norm = operator_norm(&dilated)?;
    let worst = (max_abs_diff / (1.0 + scale))
        .max(rho_isometry_defect)
        .max(sigma_isometry_defect)
        .max(norm - 1.0);
    let verdict = if worst <= DILATION_TOL {
        Verdict::Holds
    } else if worst > 10.0 * DILATION_TOL {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    Ok(DilationReport {
        dims: pair.shape.dims(),
        seed: 0,
        trial: None,
        max_abs_diff,
        scale,
        rho_isometry_defect,
        sigma_isometry_defect,
        operator_norm: norm,
        tol_abs: DILATION_TOL,
        verdict,
    })
}

/// Dimension conditions for a vector to be cyclic and separating for both
/// `I_A ⊗ B(BCD)` and `I_AB ⊗ B(CD)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub dims: [u64; 4],
    /// `d_A = d_B · d_C · d_D`
    pub cond1: bool,
    /// `d_A · d_B = d_C · d_D`
    pub cond2: bool,
    pub compatible: bool,
}

pub fn modular_dimension_obstruction(da: u64, db: u64, dc: u64, dd: u64) -> Result<ObstructionReport> {
    if [da, db, dc, dd].contains(&0) {
        return Err(LabError::InvalidArgument("dimensions must be at least 1".into()));
    }
    let (a, b, c, d) = (da as u128, db as u128, dc as u128, dd as u128);
    let cond1 = a == b * c * d;
    let cond2 = a * b == c * d;
    Ok(ObstructionReport { dims: [da, db, dc, dd], cond1, cond2, compatible: cond1 && cond2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator_norm;
    use crate::state::{random_density, trial_rng, random_density_from};
    use std::f64::consts::LN_2;

    fn shape2(l0: &str, d0: usize, l1: &str, d1: usize) -> SystemShape {
        SystemShape::new([(l0, d0), (l1, d1)]).unwrap()
    }

    fn random_pair(seed: u64, dims: [usize; 3]) -> (DensityMatrix, DensityMatrix) {
        let mut rng = trial_rng(seed, 0);
        let rho = random_density_from(&mut rng, &shape2("A", dims[0], "B", dims[1]), None).unwrap();
        let sigma =
            random_density_from(&mut rng, &shape2("B", dims[1], "C", dims[2]), None).unwrap();
        (rho, sigma)
    }

    fn mixed_pair(dims: [usize; 3]) -> (DensityMatrix, DensityMatrix) {
        (
            DensityMatrix::maximally_mixed(shape2("A", dims[0], "B", dims[1])),
            DensityMatrix::maximally_mixed(shape2("B", dims[1], "C", dims[2])),
        )
    }

    #[test]
    fn verdict_bands() {
        assert_eq!(Verdict::classify(0.0, 0.0, 1e-8), Verdict::Holds);
        assert_eq!(Verdict::classify(-1e-8, 0.0, 1e-8), Verdict::Holds);
        assert_eq!(Verdict::classify(-5e-8, 0.0, 1e-8), Verdict::Inconclusive);
        assert_eq!(Verdict::classify(-2e-7, 0.0, 1e-8), Verdict::Violated);
        assert_eq!(Verdict::classify(-2e-7, 100.0, 1e-8), Verdict::Holds);
    }

    #[test]
    fn inequality_names_round_trip() {
        for i in Inequality::ALL {
            assert_eq!(i.as_str().parse::<Inequality>().unwrap(), i);
            assert_eq!(serde_json::to_string(&i).unwrap(), format!("\"{}\"", i.as_str()));
        }
        assert!("nope".parse::<Inequality>().is_err());
    }

    #[test]
    fn key_lemma_closed_forms() {
        let (rho, sigma) = mixed_pair([2, 2, 2]);
        let r = check_key_lemma(&rho, &sigma, DEFAULT_TOL).unwrap();
        assert!((r.slack_min_eig - 1.5).abs() < 1e-12);
        assert!(r.holds());

        // d_A d_B / d_C − d_A / (d_B d_C)
        let (rho, sigma) = mixed_pair([3, 2, 4]);
        let r = check_key_lemma(&rho, &sigma, DEFAULT_TOL).unwrap();
        assert!((r.slack_min_eig - (6.0 / 4.0 - 3.0 / 8.0)).abs() < 1e-12);

        let (rho, sigma) = random_pair(3, [2, 1, 3]);
        let r = check_key_lemma(&rho, &sigma, DEFAULT_TOL).unwrap();
        assert_eq!(r.slack_min_eig, 0.0);
    }

    #[test]
    fn key_lemma_random_pairs_hold() {
        for seed in 0..50 {
            let (rho, sigma) = random_pair(seed, [2, 3, 2]);
            let r = check_key_lemma(&rho, &sigma, DEFAULT_TOL).unwrap();
            assert!(r.slack_min_eig >= -1e-8 * (1.0 + r.scale), "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn pair_validation_errors() {
        let rho = DensityMatrix::maximally_mixed(shape2("A", 2, "B", 2));
        let sigma = DensityMatrix::maximally_mixed(shape2("B", 3, "C", 2));
        assert!(matches!(
            check_key_lemma(&rho, &sigma, DEFAULT_TOL),
            Err(LabError::DimensionMismatch(_))
        ));
        let sigma = DensityMatrix::maximally_mixed(shape2("X", 2, "C", 2));
        assert!(check_key_lemma(&rho, &sigma, DEFAULT_TOL).is_err());
        let sigma = DensityMatrix::maximally_mixed(shape2("B", 2, "C", 2));
        assert!(check_key_lemma(&rho, &sigma, 0.0).is_err());
        let singular = DensityMatrix::epr("A", "B").unwrap();
        assert!(matches!(
            check_key_lemma(&singular, &sigma, DEFAULT_TOL),
            Err(LabError::Positivity { .. })
        ));
    }

    #[test]
    fn operator_wm_closed_forms() {
        let (rho, sigma) = mixed_pair([2, 2, 2]);
        let r = check_operator_wm(&rho, &sigma, DEFAULT_TOL).unwrap();
        assert!((r.slack_min_eig - 2.0 * LN_2).abs() < 1e-12);

        let (rho, sigma) = random_pair(8, [2, 1, 2]);
        let sum = wm_operator_sum(&rho, &sigma).unwrap();
        assert_eq!(sum.max_abs(), 0.0);
        let r = check_operator_wm(&rho, &sigma, DEFAULT_TOL).unwrap();
        assert_eq!(r.slack_min_eig, 0.0);
    }

    #[test]
    fn operator_wm_random_pairs_hold() {
        for dims in [[2, 2, 2], [3, 2, 2], [2, 4, 3]] {
            for seed in 0..30 {
                let (rho, sigma) = random_pair(seed, dims);
                let r = check_operator_wm(&rho, &sigma, DEFAULT_TOL).unwrap();
                assert!(r.holds(), "{dims:?} seed {seed}: {r:?}");
            }
        }
    }

    #[test]
    fn tripartite_wm() {
        let shape = SystemShape::lettered(&[2, 2, 2]).unwrap();
        let r = check_operator_wm_tripartite(&DensityMatrix::maximally_mixed(shape.clone()), 1e-8)
            .unwrap();
        assert!((r.slack_min_eig - 2.0 * LN_2).abs() < 1e-12);
        assert_eq!(r.inequality, Inequality::OperatorWmTripartite);

        let tau = random_density(&SystemShape::new([("C", 2)]).unwrap(), 4, None).unwrap();
        let probe = DensityMatrix::epr("A", "B")
            .unwrap()
            .tensor(&tau)
            .unwrap()
            .regularize(1e-4)
            .unwrap();
        assert!(check_operator_wm_tripartite(&probe, DEFAULT_TOL).unwrap().holds());

        for seed in 0..30 {
            let rho = random_density(&shape, seed, None).unwrap();
            assert!(check_operator_wm_tripartite(&rho, DEFAULT_TOL).unwrap().holds());
        }
    }

    #[test]
    fn renyi_endpoints() {
        let (rho, sigma) = random_pair(12, [2, 2, 2]);
        let zero = check_renyi(&rho, &sigma, 0.0, DEFAULT_TOL).unwrap();
        assert_eq!(zero.slack_min_eig, 0.0);
        let one = check_renyi(&rho, &sigma, 1.0, DEFAULT_TOL).unwrap();
        let key = check_key_lemma(&rho, &sigma, DEFAULT_TOL).unwrap();
        assert!((one.slack_min_eig - key.slack_min_eig).abs() <= 1e-10);
        assert!((one.scale - key.scale).abs() <= 1e-10);
        assert!(check_renyi(&rho, &sigma, 1.5, DEFAULT_TOL).is_err());
        assert!(check_renyi(&rho, &sigma, -0.1, DEFAULT_TOL).is_err());
    }

    #[test]
    fn renyi_near_zero_alpha_is_small() {
        let (rho, sigma) = random_pair(13, [2, 2, 2]);
        let r = check_renyi(&rho, &sigma, 1e-3, DEFAULT_TOL).unwrap();
        assert!(r.slack_min_eig.abs() <= 1e-2);
    }

    #[test]
    fn operator_ssa_zero_cases() {
        let shape = SystemShape::lettered(&[2, 2, 2]).unwrap();
        let t = operator_ssa_matrix(&DensityMatrix::maximally_mixed(shape)).unwrap();
        assert!(t.max_abs() <= 1e-10);

        let ra = random_density(&SystemShape::new([("A", 2)]).unwrap(), 1, None).unwrap();
        let rbc = random_density(&shape2("B", 2, "C", 2), 2, None).unwrap();
        let t = operator_ssa_matrix(&ra.tensor(&rbc).unwrap()).unwrap();
        assert!(t.max_abs() <= 1e-9);
    }

    #[test]
    fn operator_ssa_random_holds() {
        let shape = SystemShape::lettered(&[2, 2, 2]).unwrap();
        for seed in 0..30 {
            let rho = random_density(&shape, seed, None).unwrap();
            let r = check_operator_ssa(&rho, DEFAULT_TOL).unwrap();
            assert!(r.holds(), "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn scalar_equalities() {
        let tau = random_density(&SystemShape::new([("C", 3)]).unwrap(), 6, None).unwrap();
        let state = DensityMatrix::epr("A", "B").unwrap().tensor(&tau).unwrap();
        assert!(scalar_wm(&state).unwrap().abs() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(SystemShape::lettered(&[2, 3, 4]).unwrap());
        assert!((scalar_wm(&mixed).unwrap() - 2.0 * 3f64.ln()).abs() < 1e-12);
        assert!(scalar_ssa(&mixed).unwrap().abs() < 1e-12);

        // I(A:C|B) vanishes on ρ_AB ⊗ ρ_C for any ρ_AB
        let rab = random_density(&shape2("A", 2, "B", 2), 1, None).unwrap();
        let rc = random_density(&SystemShape::new([("C", 2)]).unwrap(), 2, None).unwrap();
        let prod = rab.tensor(&rc).unwrap();
        assert!(scalar_ssa(&prod).unwrap().abs() < 1e-10);
        assert!(scalar_wm(&prod).unwrap() >= -1e-10);
    }

    #[test]
    fn single_term_cases() {
        let ra = random_density(&SystemShape::new([("A", 2)]).unwrap(), 1, None).unwrap();
        let rb = random_density(&SystemShape::new([("B", 2)]).unwrap(), 2, None).unwrap();
        let eigs = single_term_spectrum(&ra.tensor(&rb).unwrap()).unwrap();
        let rb_eig = hermitian_eig(rb.data()).unwrap().eigenvalues;
        for (k, s) in eigs.iter().enumerate() {
            assert!((s - rb_eig[k / 2].ln()).abs() < 1e-10);
            assert!(*s <= 0.0);
        }

        let mixed = DensityMatrix::maximally_mixed(shape2("A", 2, "B", 2));
        for s in single_term_spectrum(&mixed).unwrap() {
            assert!((s + LN_2).abs() < 1e-12);
        }

        let eps = 1e-6;
        let epr = DensityMatrix::epr("A", "B").unwrap().regularize(eps).unwrap();
        let top = *single_term_spectrum(&epr).unwrap().last().unwrap();
        assert!((top - ((1.0 - 0.75 * eps).ln() + LN_2)).abs() < 1e-9);
        assert!((top - 0.693146).abs() < 1e-6);
    }

    #[test]
    fn isometry_trivial_ancilla_and_product() {
        let rho = random_density(&shape2("A", 3, "B", 1), 4, None).unwrap();
        let v = coarse_graining_isometry(&rho, "B").unwrap();
        assert_eq!(v.out_shape.labels(), vec!["A", "B", "Bstar"]);
        assert!(v.map.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-10);

        let rx = random_density(&SystemShape::new([("A", 2)]).unwrap(), 5, None).unwrap();
        let rb = random_density(&SystemShape::new([("B", 2)]).unwrap(), 6, None).unwrap();
        let prod = rx.tensor(&rb).unwrap();
        let v = coarse_graining_isometry(&prod, "B").unwrap();
        // appends the standard purification Σ_k (ρ_B^{1/2}|k⟩) ⊗ |k⟩
        let sqrt_b = matrix_fn(rb.data(), MatrixFunction::Sqrt).unwrap();
        let mut purif = vec![C64::new(0.0, 0.0); 4];
        for k in 0..2 {
            for i in 0..2 {
                purif[i * 2 + k] += sqrt_b[(i, k)];
            }
        }
        let expected = kron(&ComplexMatrix::identity(2), &ComplexMatrix::column(&purif)).unwrap();
        assert!(v.map.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn isometry_defect_small_and_norm_one() {
        let rho = random_density(&shape2("A", 2, "B", 3), 7, None).unwrap();
        let v = coarse_graining_isometry(&rho, "B").unwrap();
        assert!(v.defect <= 1e-10);
        assert!((operator_norm(&v.map).unwrap() - 1.0).abs() <= 1e-10);

        let sigma = random_density(&shape2("B", 3, "C", 2), 8, None).unwrap();
        let v = coarse_graining_isometry(&sigma, "B").unwrap();
        assert_eq!(v.out_shape.labels(), vec!["B", "C", "Bstar"]);
        assert_eq!(v.in_shape.labels(), vec!["C"]);
        assert!(v.defect <= 1e-10);
    }

    #[test]
    fn dilation_matches_closed_form() {
        for dims in [[2, 2, 2], [2, 3, 2], [3, 2, 2]] {
            for seed in 0..10 {
                let (rho, sigma) = random_pair(seed, dims);
                let closed = contraction_closed_form(&rho, &sigma).unwrap();
                let dilated = contraction_via_dilation(&rho, &sigma).unwrap();
                let scale = closed.max_abs();
                assert!(closed.max_abs_diff(&dilated) <= 1e-10 * (1.0 + scale));
                assert!(operator_norm(&closed).unwrap() <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn dilation_degenerate_and_mixed() {
        let (rho, sigma) = random_pair(2, [2, 1, 3]);
        let id = ComplexMatrix::identity(6);
        assert!(contraction_closed_form(&rho, &sigma).unwrap().max_abs_diff(&id) < 1e-10);
        assert!(contraction_via_dilation(&rho, &sigma).unwrap().max_abs_diff(&id) < 1e-10);

        let (rho, sigma) = mixed_pair([2, 3, 2]);
        let closed = contraction_closed_form(&rho, &sigma).unwrap();
        let dilated = contraction_via_dilation(&rho, &sigma).unwrap();
        assert!(closed.max_abs_diff(&dilated) <= 1e-10);
        // closed form is I / d_B for maximally mixed inputs
        assert!(closed.max_abs_diff(&ComplexMatrix::identity(12).scale(1.0 / 3.0)) < 1e-12);
        assert!(operator_norm(&closed).unwrap() <= 1.0);
    }

    #[test]
    fn obstruction_cases() {
        let r = modular_dimension_obstruction(8, 1, 2, 4).unwrap();
        assert!(r.cond1 && r.cond2 && r.compatible);
        let r = modular_dimension_obstruction(4, 2, 2, 2).unwrap();
        assert!(!r.cond1 && !r.compatible);
        assert!(modular_dimension_obstruction(0, 1, 1, 1).is_err());
    }

    #[test]
    fn report_json_schema() {
        let (rho, sigma) = mixed_pair([2, 2, 2]);
        let r = check_key_lemma(&rho, &sigma, DEFAULT_TOL).unwrap().with_seed(7, None);
        let v = serde_json::to_value(&r).unwrap();
        for key in ["inequality", "dims", "seed", "slack_min_eig", "scale", "tol_abs", "verdict"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["verdict"], "holds");
        assert_eq!(v["inequality"], "key-lemma");

        let failed = LoewnerReport::failed(
            Inequality::OperatorWm,
            vec![2, 2, 2],
            DEFAULT_TOL,
            &LabError::Positivity { eigenvalue: 1e-14, floor: 1e-12 },
        );
        let json = serde_json::to_string(&failed).unwrap();
        let back: LoewnerReport = serde_json::from_str(&json).unwrap();
        assert!(back.slack_min_eig.is_nan());
        assert_eq!(back.verdict, Verdict::Inconclusive);
    }
}
