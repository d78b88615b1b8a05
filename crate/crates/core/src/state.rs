//! Validated density matrices, Hilbert-Schmidt sampling, regularization,
//! purification and von Neumann entropy.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{hermitian_eig, kron, positivity_floor, ComplexMatrix, C64, HERMITIAN_TOL};
use crate::tensor::{partial_trace, SystemShape};

/// Allowed deviation of the trace from 1 before validation rejects.
pub const TRACE_TOL: f64 = 1e-10;

/// Eigenvalues down to `-NEGATIVE_TOL` are clipped to zero; below that is an error.
pub const NEGATIVE_TOL: f64 = 1e-10;

/// Deterministic generator for trial `index` of a run seeded with `seed`.
///
/// ChaCha is counter based, so `(seed, index)` fixes the stream regardless of
/// how trials are scheduled across threads.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A unit-trace Hermitian positive semi-definite operator bound to a shape.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    shape: SystemShape,
    data: ComplexMatrix,
    lambda_min: f64,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity, renormalizing a trace that
    /// is within [`TRACE_TOL`] of one.
    pub fn validate(data: ComplexMatrix, shape: SystemShape) -> Result<Self> {
        if !data.is_square() {
            return Err(LabError::NotSquare { rows: data.rows(), cols: data.cols() });
        }
        if data.rows() != shape.total_dim() {
            return Err(LabError::DimensionMismatch(format!(
                "{}x{} matrix does not match shape {shape}",
                data.rows(),
                data.cols()
            )));
        }
        let data = data.hermitize(HERMITIAN_TOL)?;
        let trace = data.trace().re;
        if !((trace - 1.0).abs() <= TRACE_TOL) {
            return Err(LabError::Trace { trace });
        }
        // rescaling an already-normalized matrix would only perturb it at round-off level
        let data =
            if (trace - 1.0).abs() <= 4.0 * f64::EPSILON { data } else { data.scale(1.0 / trace) };
        let eig = hermitian_eig(&data)?;
        let lambda_min = eig.min();
        if lambda_min < -NEGATIVE_TOL {
            return Err(LabError::Positivity { eigenvalue: lambda_min, floor: -NEGATIVE_TOL });
        }
        Ok(Self { shape, data, lambda_min: lambda_min.max(0.0) })
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(shape: SystemShape) -> Self {
        let d = shape.total_dim();
        let data = ComplexMatrix::identity(d).scale(1.0 / d as f64);
        Self { shape, data, lambda_min: 1.0 / d as f64 }
    }

    /// The Bell state `(|00⟩ + |11⟩)/√2` on two qubits.
    pub fn epr(first: &str, second: &str) -> Result<Self> {
        let shape = SystemShape::new([(first, 2), (second, 2)])?;
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![C64::new(amp, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(amp, 0.0)];
        PureState::new(v, shape)?.density()
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn data(&self) -> &ComplexMatrix {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.data.rows()
    }

    /// Smallest eigenvalue, clipped at zero.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// True when log and inverse are defined under the positivity floor.
    pub fn is_strictly_positive(&self) -> bool {
        self.lambda_min >= positivity_floor(1.0)
    }

    pub fn purity(&self) -> f64 {
        self.data.matmul(&self.data).map(|m| m.trace().re).unwrap_or(f64::NAN)
    }

    /// Reduced state on `keep` (in this state's factor order).
    pub fn marginal(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(LabError::InvalidArgument("marginal needs at least one label".into()));
        }
        let sub = self.shape.subshape(keep)?;
        let traced = self.shape.complement(keep);
        let data = partial_trace(&self.data, &self.shape, &traced)?;
        Self::validate(data, sub)
    }

    /// `(1 − ε) ρ + ε I/d`.
    pub fn regularize(&self, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(LabError::InvalidArgument(format!("ε = {eps} outside [0, 1]")));
        }
        if eps == 0.0 {
            return Ok(self.clone());
        }
        let d = self.dim() as f64;
        let mixed = ComplexMatrix::identity(self.dim()).scale(eps / d);
        let data = &self.data.scale(1.0 - eps) + &mixed;
        Ok(Self {
            shape: self.shape.clone(),
            data,
            lambda_min: (1.0 - eps) * self.lambda_min + eps / d,
        })
    }

    /// Product state `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let shape = self.shape.concat(&other.shape)?;
        let data = kron(&self.data, &other.data)?;
        Ok(Self { shape, data, lambda_min: self.lambda_min * other.lambda_min })
    }

    /// Same operator with the factors relabeled positionally.
    pub fn with_labels(&self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.shape.len() {
            return Err(LabError::InvalidArgument(format!(
                "{} labels given for shape {}",
                labels.len(),
                self.shape
            )));
        }
        let shape = SystemShape::new(labels.iter().zip(self.shape.dims()).map(|(l, d)| (*l, d)))?;
        Ok(Self { shape, data: self.data.clone(), lambda_min: self.lambda_min })
    }

    /// Purification `Σ_k √p_k |v_k⟩ ⊗ |k⟩_ref`, with eigenvalues in descending
    /// order and only those above the positivity floor kept.
    pub fn purify(&self, ref_label: &str) -> Result<PureState> {
        let eig = hermitian_eig(&self.data)?;
        let floor = positivity_floor(eig.max());
        let kept: Vec<usize> =
            (0..eig.dim()).rev().filter(|&k| eig.eigenvalues[k] > floor).collect();
        let rank = kept.len().max(1);
        let shape = self.shape.concat(&SystemShape::new([(ref_label, rank)])?)?;
        let d = self.dim();
        let mut amps = vec![C64::new(0.0, 0.0); d * rank];
        for (r, &k) in kept.iter().enumerate() {
            let weight = eig.eigenvalues[k].sqrt();
            for i in 0..d {
                amps[i * rank + r] = eig.eigenvectors[(i, k)] * weight;
            }
        }
        let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut amps {
            *z /= norm;
        }
        PureState::new(amps, shape)
    }

    /// `−Tr ρ ln ρ` in nats; eigenvalues at or below the positivity floor contribute 0.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        let eig = hermitian_eig(&self.data)?;
        let floor = positivity_floor(eig.max());
        let s: f64 = eig
            .eigenvalues
            .iter()
            .filter(|&&l| l > floor)
            .map(|&l| -l * l.ln())
            .sum();
        Ok(s.max(0.0))
    }

    pub fn to_file(&self) -> DensityMatrixFile {
        DensityMatrixFile {
            labels: self.shape.labels().iter().map(|l| l.to_string()).collect(),
            dims: self.shape.dims(),
            order: "row-major".into(),
            re: self.data.real_parts(),
            im: self.data.imag_parts(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<DensityMatrixFile>(s)?.into_density()
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// On-disk density matrix: row-major real and imaginary parts, entry
/// `[row · dim + col]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    pub order: String,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl DensityMatrixFile {
    pub fn into_density(self) -> Result<DensityMatrix> {
        if self.order != "row-major" {
            return Err(LabError::InvalidArgument(format!(
                "unsupported entry order `{}`",
                self.order
            )));
        }
        if self.labels.len() != self.dims.len() {
            return Err(LabError::InvalidShape(format!(
                "{} labels but {} dims",
                self.labels.len(),
                self.dims.len()
            )));
        }
        let shape = SystemShape::new(self.labels.into_iter().zip(self.dims))?;
        let d = shape.total_dim();
        if self.re.len() != d * d {
            return Err(LabError::DimensionMismatch(format!(
                "expected {} entries for dimension {d}, got {}",
                d * d,
                self.re.len()
            )));
        }
        let data = ComplexMatrix::from_parts(d, d, &self.re, &self.im)?;
        DensityMatrix::validate(data, shape)
    }
}

/// Unit vector bound to a shape.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    shape: SystemShape,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, shape: SystemShape) -> Result<Self> {
        if amplitudes.len() != shape.total_dim() {
            return Err(LabError::DimensionMismatch(format!(
                "{} amplitudes for shape {shape}",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= 1e-10) {
            return Err(LabError::InvalidArgument(format!("state norm {norm} is not 1")));
        }
        Ok(Self { shape, amplitudes })
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// The projector `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::validate(ComplexMatrix::outer(&self.amplitudes), self.shape.clone())
    }

    pub fn marginal(&self, keep: &[&str]) -> Result<DensityMatrix> {
        self.density()?.marginal(keep)
    }
}

/// `G G† / Tr(G G†)` for a `dim × rank` matrix `G` of i.i.d. standard complex
/// Gaussians drawn from `rng`. Full rank gives the Hilbert-Schmidt measure.
pub fn random_density_from<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &SystemShape,
    rank: Option<usize>,
) -> Result<DensityMatrix> {
    let d = shape.total_dim();
    let k = rank.unwrap_or(d);
    if k == 0 || k > d {
        return Err(LabError::InvalidArgument(format!("rank {k} outside [1, {d}]")));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = ComplexMatrix::from_fn(d, k, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let gg = g.matmul(&g.adjoint())?;
    let tr = gg.trace().re;
    DensityMatrix::validate(gg.scale(1.0 / tr), shape.clone())
}

/// Seeded Ginibre sample; equivalent to trial 0 of `seed`.
pub fn random_density(shape: &SystemShape, seed: u64, rank: Option<usize>) -> Result<DensityMatrix> {
    random_density_from(&mut trial_rng(seed, 0), shape, rank)
}
