//! Derivative-free adversarial search over density matrices, plus α sweeps and
//! strict-positivity boundary probes.
//!
//! States are charted by a complex lower-triangular factor `L` with
//! `ρ = L L† / Tr(L L†)`, which covers every full-rank state without
//! constraints, so a plain Nelder-Mead simplex can move freely.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::inequality::{
    check_key_lemma, check_operator_ssa, check_operator_wm, check_operator_wm_tripartite,
    check_renyi, scalar_ssa, scalar_wm, single_term_spectrum, Inequality, LoewnerReport, Verdict,
};
use crate::linalg::{ComplexMatrix, C64};
use crate::state::{random_density, trial_rng, DensityMatrix};
use crate::tensor::SystemShape;

/// Regularization applied by [`StateParams::decode`] to near-singular factors.
pub const DECODE_EPS: f64 = 1e-9;

/// Real parameters of a complex lower-triangular factor `L` on `shape`.
///
/// `raw` holds `d²` real parts followed by `d²` imaginary parts, row-major;
/// entries above the diagonal are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateParams {
    pub shape: SystemShape,
    pub raw: Vec<f64>,
}

impl StateParams {
    pub fn new(shape: SystemShape, raw: Vec<f64>) -> Result<Self> {
        let d = shape.total_dim();
        if raw.len() != 2 * d * d {
            return Err(LabError::DimensionMismatch(format!(
                "state parameters need {} reals for shape {shape}, got {}",
                2 * d * d,
                raw.len()
            )));
        }
        Ok(Self { shape, raw })
    }

    /// Parameters of `L` itself.
    pub fn from_factor(shape: SystemShape, l: &ComplexMatrix) -> Result<Self> {
        let d = shape.total_dim();
        if l.rows() != d || l.cols() != d {
            return Err(LabError::DimensionMismatch(format!(
                "factor is {}x{}, shape {shape} needs {d}x{d}",
                l.rows(),
                l.cols()
            )));
        }
        let mut raw = l.real_parts();
        raw.extend(l.imag_parts());
        Self::new(shape, raw)
    }

    /// Positions in `raw` that the decoded state depends on.
    pub fn active_indices(d: usize) -> Vec<usize> {
        let mut idx = Vec::with_capacity(d * (d + 1));
        for i in 0..d {
            for j in 0..=i {
                idx.push(i * d + j);
                idx.push(d * d + i * d + j);
            }
        }
        idx
    }

    pub fn factor(&self) -> ComplexMatrix {
        let d = self.shape.total_dim();
        ComplexMatrix::from_fn(d, d, |i, j| {
            if j <= i {
                C64::new(self.raw[i * d + j], self.raw[d * d + i * d + j])
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `L L† / Tr(L L†)`, regularized with `ε = 1e−9` when its smallest
    /// eigenvalue falls below `ε/d`.
    pub fn decode(&self) -> Result<DensityMatrix> {
        let l = self.factor();
        let llt = l.matmul(&l.adjoint())?;
        let tr = llt.trace().re;
        if !(tr > 1e-12) || !tr.is_finite() {
            return Err(LabError::InvalidArgument(format!("degenerate factor, Tr(LL†) = {tr:e}")));
        }
        let rho = DensityMatrix::validate(llt.scale(1.0 / tr), self.shape.clone())?;
        if rho.lambda_min() < DECODE_EPS / rho.dim() as f64 {
            rho.regularize(DECODE_EPS)
        } else {
            Ok(rho)
        }
    }
}

/// What a search maximizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchTarget {
    /// `−slack_min_eig` (or `−value` for scalar inequalities); positive means violated.
    Inequality { inequality: Inequality, alpha: Option<f64> },
    /// Largest eigenvalue of `log ρ_AB − log ρ_A ⊗ I_B`.
    SingleTermMaxEig,
}

impl SearchTarget {
    pub fn new(inequality: Inequality, alpha: Option<f64>) -> Result<Self> {
        match inequality {
            Inequality::SingleTerm => Ok(SearchTarget::SingleTermMaxEig),
            Inequality::Renyi => {
                let a = alpha.ok_or_else(|| {
                    LabError::InvalidArgument("renyi target needs an α value".into())
                })?;
                if !(0.0..=1.0).contains(&a) {
                    return Err(LabError::InvalidArgument(format!("α = {a} outside [0, 1]")));
                }
                Ok(SearchTarget::Inequality { inequality, alpha: Some(a) })
            }
            _ => Ok(SearchTarget::Inequality { inequality, alpha: None }),
        }
    }

    pub fn inequality(&self) -> Inequality {
        match self {
            SearchTarget::Inequality { inequality, .. } => *inequality,
            SearchTarget::SingleTermMaxEig => Inequality::SingleTerm,
        }
    }

    pub fn name(&self) -> String {
        match self {
            SearchTarget::Inequality { inequality, alpha: Some(a) } => format!("{inequality}({a})"),
            SearchTarget::Inequality { inequality, alpha: None } => inequality.to_string(),
            SearchTarget::SingleTermMaxEig => "single_term_max_eig".into(),
        }
    }

    /// Shapes of the states the target is evaluated on.
    pub fn shapes(&self, dims: &[usize]) -> Result<Vec<SystemShape>> {
        slot_shapes(self.inequality(), dims)
    }
}

/// Input slots of `inequality` at `dims`: `(A,B)` and `(B,C)` for pair
/// inequalities, `(A,B)` for the single term, `(A,B,C)` otherwise.
pub fn slot_shapes(inequality: Inequality, dims: &[usize]) -> Result<Vec<SystemShape>> {
    if dims.len() != inequality.arity() {
        return Err(LabError::InvalidArgument(format!(
            "{inequality} needs {} dimensions, got {dims:?}",
            inequality.arity()
        )));
    }
    if inequality.is_pair() {
        Ok(vec![
            SystemShape::new([("A", dims[0]), ("B", dims[1])])?,
            SystemShape::new([("B", dims[1]), ("C", dims[2])])?,
        ])
    } else {
        Ok(vec![SystemShape::lettered(dims)?])
    }
}

impl fmt::Display for SearchTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for SearchTarget {
    type Err = LabError;

    /// Accepts inequality names, `single_term_max_eig`, and `renyi(α)`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "single_term_max_eig" {
            return Ok(SearchTarget::SingleTermMaxEig);
        }
        if let Some(inner) = s.strip_prefix("renyi(").and_then(|r| r.strip_suffix(')')) {
            let a: f64 = inner
                .parse()
                .map_err(|_| LabError::InvalidArgument(format!("bad α in `{s}`")))?;
            return SearchTarget::new(Inequality::Renyi, Some(a));
        }
        SearchTarget::new(s.parse()?, None)
    }
}

/// One evaluation of a target on concrete states.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub objective: f64,
    pub verdict: Option<Verdict>,
    pub report: Option<LoewnerReport>,
}

/// Evaluates `target` on `states` (one state, or the `(ρ_AB, σ_BC)` pair).
pub fn evaluate_target(target: &SearchTarget, states: &[DensityMatrix], tol: f64) -> Result<Evaluation> {
    let report = |r: LoewnerReport| Evaluation {
        objective: -r.slack_min_eig,
        verdict: Some(r.verdict),
        report: Some(r),
    };
    let scalar = |value: f64| Evaluation {
        objective: -value,
        verdict: Some(Verdict::classify(value, 0.0, tol)),
        report: None,
    };
    let pair = || -> Result<(&DensityMatrix, &DensityMatrix)> {
        match states {
            [rho, sigma] => Ok((rho, sigma)),
            _ => Err(LabError::InvalidArgument("pair target needs two states".into())),
        }
    };
    let single = || -> Result<&DensityMatrix> {
        match states {
            [rho] => Ok(rho),
            _ => Err(LabError::InvalidArgument("target needs exactly one state".into())),
        }
    };
    match *target {
        SearchTarget::SingleTermMaxEig => {
            let eigs = single_term_spectrum(single()?)?;
            Ok(Evaluation { objective: *eigs.last().unwrap(), verdict: None, report: None })
        }
        SearchTarget::Inequality { inequality, alpha } => match inequality {
            Inequality::KeyLemma => {
                let (r, s) = pair()?;
                Ok(report(check_key_lemma(r, s, tol)?))
            }
            Inequality::OperatorWm => {
                let (r, s) = pair()?;
                Ok(report(check_operator_wm(r, s, tol)?))
            }
            Inequality::Renyi => {
                let (r, s) = pair()?;
                let a = alpha.ok_or_else(|| LabError::InvalidArgument("missing α".into()))?;
                Ok(report(check_renyi(r, s, a, tol)?))
            }
            Inequality::OperatorWmTripartite => {
                Ok(report(check_operator_wm_tripartite(single()?, tol)?))
            }
            Inequality::OperatorSsa => Ok(report(check_operator_ssa(single()?, tol)?)),
            Inequality::ScalarWm => Ok(scalar(scalar_wm(single()?)?)),
            Inequality::ScalarSsa => Ok(scalar(scalar_ssa(single()?)?)),
            Inequality::SingleTerm => unreachable!("mapped to SingleTermMaxEig"),
        },
    }
}

/// Nelder-Mead coefficients and initial simplex size.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub reflect: f64,
    pub expand: f64,
    pub contract: f64,
    pub shrink: f64,
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { reflect: 1.0, expand: 2.0, contract: 0.5, shrink: 0.5, initial_step: 0.1 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

impl NelderMead {
    /// Minimizes `f` from `x0` using at most `max_evals` evaluations. The
    /// returned point is the best one ever evaluated; NaN counts as +∞.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64], max_evals: usize) -> Minimum {
        let n = x0.len();
        let mut evals = 0usize;
        let mut best = Minimum { x: x0.to_vec(), value: f64::INFINITY, evaluations: 0 };
        let mut eval = |x: &[f64], evals: &mut usize, best: &mut Minimum| -> f64 {
            *evals += 1;
            let v = f(x);
            let v = if v.is_nan() { f64::INFINITY } else { v };
            if v < best.value {
                best.value = v;
                best.x = x.to_vec();
            }
            v
        };
        if max_evals == 0 {
            return best;
        }

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let v0 = eval(x0, &mut evals, &mut best);
        simplex.push((x0.to_vec(), v0));
        for i in 0..n {
            if evals >= max_evals {
                best.evaluations = evals;
                return best;
            }
            let mut x = x0.to_vec();
            x[i] += self.initial_step;
            let v = eval(&x, &mut evals, &mut best);
            simplex.push((x, v));
        }

        let lerp = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
            from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
        };
        while evals < max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (f_best, f_worst) = (simplex[0].1, simplex[n].1);
            if (f_worst - f_best).abs() <= 1e-15 * (1.0 + f_best.abs()) {
                let diameter = simplex
                    .iter()
                    .map(|(x, _)| {
                        x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
                    })
                    .fold(0.0, f64::max);
                if diameter <= 1e-12 {
                    break;
                }
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let worst = simplex[n].0.clone();
            let xr = lerp(&centroid, &worst, -self.reflect);
            let fr = eval(&xr, &mut evals, &mut best);
            if fr < f_best {
                if evals >= max_evals {
                    simplex[n] = (xr, fr);
                    break;
                }
                let xe = lerp(&centroid, &worst, -self.reflect * self.expand);
                let fe = eval(&xe, &mut evals, &mut best);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            if evals >= max_evals {
                break;
            }
            let (xc, fc, accept) = if fr < f_worst {
                let xc = lerp(&centroid, &xr, self.contract);
                let fc = eval(&xc, &mut evals, &mut best);
                (xc, fc, fc <= fr)
            } else {
                let xc = lerp(&centroid, &worst, self.contract);
                let fc = eval(&xc, &mut evals, &mut best);
                (xc, fc, fc < f_worst)
            };
            if accept {
                simplex[n] = (xc, fc);
                continue;
            }
            let anchor = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                if evals >= max_evals {
                    break;
                }
                let x = lerp(&anchor, &vertex.0, self.shrink);
                let v = eval(&x, &mut evals, &mut best);
                *vertex = (x, v);
            }
        }
        best.evaluations = evals;
        best
    }
}

/// Outcome of [`maximize_violation`].
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub target: SearchTarget,
    pub dims: Vec<usize>,
    pub best_objective: f64,
    pub best_params: Vec<StateParams>,
    pub evaluations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    /// Evaluated points whose verdict was `violated`.
    pub violations: usize,
    /// Restart index that produced the best point.
    pub best_restart: usize,
}

impl SearchResult {
    pub fn best_states(&self) -> Result<Vec<DensityMatrix>> {
        self.best_params.iter().map(StateParams::decode).collect()
    }

    /// Re-evaluates the target on the best parameters.
    pub fn reevaluate(&self) -> Result<Evaluation> {
        evaluate_target(&self.target, &self.best_states()?, self.tol)
    }

    pub fn record(&self, best_state_file: Option<String>, best_sigma_file: Option<String>) -> SearchRecord {
        SearchRecord {
            target: self.target.name(),
            dims: self.dims.clone(),
            best_objective: self.best_objective,
            evaluations: self.evaluations,
            restarts: self.restarts,
            seed: self.seed,
            violations: self.violations,
            best_state_file,
            best_sigma_file,
        }
    }
}

/// Serialized form of a [`SearchResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub target: String,
    pub dims: Vec<usize>,
    pub best_objective: f64,
    pub evaluations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub violations: usize,
    pub best_state_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_sigma_file: Option<String>,
}

struct RestartOutcome {
    x: Vec<f64>,
    objective: f64,
    evaluations: usize,
    violations: usize,
}

fn scatter(shapes: &[SystemShape], x: &[f64]) -> Result<Vec<StateParams>> {
    let mut offset = 0;
    shapes
        .iter()
        .map(|shape| {
            let d = shape.total_dim();
            let mut raw = vec![0.0; 2 * d * d];
            for idx in StateParams::active_indices(d) {
                raw[idx] = x[offset];
                offset += 1;
            }
            StateParams::new(shape.clone(), raw)
        })
        .collect()
}

/// Maximizes the target objective with Nelder-Mead from `restarts` random
/// starts, splitting `budget` evaluations between them. Restart `r` draws its
/// start from `(seed, r)`; ties between restarts go to the lower index.
pub fn maximize_violation(
    target: SearchTarget,
    dims: &[usize],
    budget: usize,
    restarts: usize,
    seed: u64,
    tol: f64,
) -> Result<SearchResult> {
    if restarts == 0 || budget < restarts {
        return Err(LabError::InvalidArgument(format!(
            "need budget ≥ restarts ≥ 1, got budget {budget}, restarts {restarts}"
        )));
    }
    let shapes = target.shapes(dims)?;
    let n_params: usize = shapes.iter().map(|s| s.total_dim() * (s.total_dim() + 1)).sum();
    let optimizer = NelderMead::default();

    let outcomes: Vec<RestartOutcome> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let share = budget / restarts + usize::from(r < budget % restarts);
            let mut rng = trial_rng(seed, r as u64);
            let x0: Vec<f64> = (0..n_params).map(|_| rng.sample(StandardNormal)).collect();
            let mut violations = 0usize;
            let objective = |x: &[f64]| -> f64 {
                let eval = scatter(&shapes, x)
                    .and_then(|ps| ps.iter().map(StateParams::decode).collect::<Result<Vec<_>>>())
                    .and_then(|states| evaluate_target(&target, &states, tol));
                match eval {
                    Ok(e) => {
                        if e.verdict == Some(Verdict::Violated) {
                            violations += 1;
                        }
                        -e.objective
                    }
                    Err(_) => f64::INFINITY,
                }
            };
            let min = optimizer.minimize(objective, &x0, share);
            RestartOutcome {
                x: min.x,
                objective: -min.value,
                evaluations: min.evaluations,
                violations,
            }
        })
        .collect();

    let mut best_restart = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.objective > outcomes[best_restart].objective {
            best_restart = i;
        }
    }
    let best = &outcomes[best_restart];
    Ok(SearchResult {
        target,
        dims: dims.to_vec(),
        best_objective: best.objective,
        best_params: scatter(&shapes, &best.x)?,
        evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
        restarts,
        seed,
        tol,
        violations: outcomes.iter().map(|o| o.violations).sum(),
        best_restart,
    })
}

/// One Rényi report per grid value, in grid order.
pub fn alpha_sweep(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    grid: &[f64],
    tol: f64,
) -> Result<Vec<LoewnerReport>> {
    if let Some(a) = grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(LabError::InvalidArgument(format!("α = {a} outside [0, 1]")));
    }
    grid.iter().map(|&a| check_renyi(rho, sigma, a, tol)).collect()
}

/// `start, start+step, …` up to `end` inclusive (with a small overshoot allowance).
pub fn alpha_grid(start: f64, step: f64, end: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || end < start {
        return Err(LabError::InvalidArgument(format!(
            "bad α grid {start}:{step}:{end}"
        )));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

/// Regularizes `base` at each ε and runs every operator check on the result.
/// Numerical failures (positivity floor, non-convergence) become
/// `inconclusive` records carrying the error text.
pub fn stress_boundary(
    base: &DensityMatrix,
    eps_list: &[f64],
    tol: f64,
) -> Result<Vec<LoewnerReport>> {
    if base.shape().len() != 3 {
        return Err(LabError::InvalidShape(format!(
            "boundary probes need a tripartite state, got {}",
            base.shape()
        )));
    }
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(LabError::InvalidArgument(format!("ε = {e} outside (0, 1]")));
    }
    let labels: Vec<String> = base.shape().labels().iter().map(|l| l.to_string()).collect();
    let (a, b, c) = (labels[0].as_str(), labels[1].as_str(), labels[2].as_str());
    let dims = base.shape().dims();
    let mut out = Vec::new();
    for &eps in eps_list {
        let rho = base.regularize(eps)?;
        let rho_ab = rho.marginal(&[a, b])?;
        let rho_bc = rho.marginal(&[b, c])?;
        let checks: [(Inequality, Option<f64>, Result<LoewnerReport>); 5] = [
            (Inequality::KeyLemma, None, check_key_lemma(&rho_ab, &rho_bc, tol)),
            (Inequality::OperatorWm, None, check_operator_wm(&rho_ab, &rho_bc, tol)),
            (Inequality::OperatorWmTripartite, None, check_operator_wm_tripartite(&rho, tol)),
            (Inequality::Renyi, Some(0.5), check_renyi(&rho_ab, &rho_bc, 0.5, tol)),
            (Inequality::OperatorSsa, None, check_operator_ssa(&rho, tol)),
        ];
        for (ineq, alpha, result) in checks {
            let mut report = match result {
                Ok(r) => r,
                Err(e) if e.is_numerical() => LoewnerReport::failed(ineq, dims.clone(), tol, &e),
                Err(e) => return Err(e),
            };
            report.alpha = alpha;
            report.epsilon = Some(eps);
            out.push(report);
        }
    }
    Ok(out)
}

/// [`stress_boundary`] on a seeded random pure state of the given dimensions.
pub fn stress_boundary_random(
    dims: &[usize],
    eps_list: &[f64],
    seed: u64,
    tol: f64,
) -> Result<Vec<LoewnerReport>> {
    let shape = SystemShape::lettered(dims)?;
    let base = random_density(&shape, seed, Some(1))?;
    let reports = stress_boundary(&base, eps_list, tol)?;
    Ok(reports.into_iter().map(|r| r.with_seed(seed, None)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::{DEFAULT_TOL, check_key_lemma};
    use crate::state::random_density_from;
    use std::f64::consts::LN_2;

    #[test]
    fn decode_identity_is_maximally_mixed() {
        let shape = SystemShape::lettered(&[2, 2]).unwrap();
        let p = StateParams::from_factor(shape.clone(), &ComplexMatrix::identity(4)).unwrap();
        let rho = p.decode().unwrap();
        assert!(rho.data().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-15);
    }

    #[test]
    fn decode_regularizes_singular_factor() {
        let shape = SystemShape::lettered(&[2]).unwrap();
        let l = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let rho = StateParams::from_factor(shape, &l).unwrap().decode().unwrap();
        assert!(rho.lambda_min() >= DECODE_EPS / 2.0 * (1.0 - 1e-6));
        assert!(rho.purity() > 1.0 - 1e-8);
    }

    #[test]
    fn decode_errors() {
        let shape = SystemShape::lettered(&[2]).unwrap();
        let zero = StateParams::new(shape.clone(), vec![0.0; 8]).unwrap();
        assert!(zero.decode().is_err());
        assert!(StateParams::new(shape, vec![0.0; 7]).is_err());
    }

    #[test]
    fn decode_random_raw_vectors_validate() {
        let shape = SystemShape::lettered(&[2, 2]).unwrap();
        for seed in 0..1000 {
            let mut rng = trial_rng(seed, 0);
            let raw: Vec<f64> = (0..32).map(|_| rng.sample(StandardNormal)).collect();
            let rho = StateParams::new(shape.clone(), raw).unwrap().decode().unwrap();
            assert!(rho.lambda_min() > 0.0);
        }
    }

    #[test]
    fn upper_triangle_is_ignored() {
        let shape = SystemShape::lettered(&[2]).unwrap();
        let mut raw = vec![1.0, 0.0, 0.5, 1.0, 0.0, 0.0, 0.2, 0.0];
        let a = StateParams::new(shape.clone(), raw.clone()).unwrap().decode().unwrap();
        raw[1] = 7.0;
        raw[5] = -3.0;
        let b = StateParams::new(shape, raw).unwrap().decode().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2) + x[2].powi(2);
        let m = NelderMead::default().minimize(f, &[0.0, 0.0, 0.0], 5000);
        assert!(m.value < 1e-10, "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] + 2.0).abs() < 1e-4);
        assert!(m.evaluations <= 5000);
    }

    #[test]
    fn nelder_mead_respects_budget_and_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = NelderMead::default().minimize(rosen, &[-1.2, 1.0], 2000);
        assert!(m.value < 1e-8);
        let m = NelderMead::default().minimize(rosen, &[-1.2, 1.0], 7);
        assert_eq!(m.evaluations, 7);
    }

    #[test]
    fn target_parsing_and_arity() {
        let t: SearchTarget = "renyi(0.5)".parse().unwrap();
        assert_eq!(t.name(), "renyi(0.5)");
        assert!("renyi".parse::<SearchTarget>().is_err());
        assert!("renyi(2)".parse::<SearchTarget>().is_err());
        assert_eq!(
            "single_term_max_eig".parse::<SearchTarget>().unwrap(),
            SearchTarget::SingleTermMaxEig
        );
        let t: SearchTarget = "key-lemma".parse().unwrap();
        assert!(t.shapes(&[2, 2]).is_err());
        assert_eq!(t.shapes(&[2, 3, 2]).unwrap().len(), 2);
    }

    #[test]
    fn search_is_deterministic() {
        let t: SearchTarget = "key-lemma".parse().unwrap();
        let a = maximize_violation(t, &[2, 2, 2], 300, 3, 5, DEFAULT_TOL).unwrap();
        let b = maximize_violation(t, &[2, 2, 2], 300, 3, 5, DEFAULT_TOL).unwrap();
        assert_eq!(a.best_objective, b.best_objective);
        assert_eq!(a.best_params, b.best_params);
        assert_eq!(a.evaluations, b.evaluations);
        assert!(a.evaluations <= 300);
        assert!((a.reevaluate().unwrap().objective - a.best_objective).abs() <= 1e-10);
    }

    #[test]
    fn search_rejects_bad_budget() {
        let t = SearchTarget::SingleTermMaxEig;
        assert!(maximize_violation(t, &[2, 2], 3, 5, 0, DEFAULT_TOL).is_err());
        assert!(maximize_violation(t, &[2, 2], 3, 0, 0, DEFAULT_TOL).is_err());
    }

    #[test]
    fn single_term_search_finds_positive_eigenvalue() {
        let r = maximize_violation(SearchTarget::SingleTermMaxEig, &[2, 2], 1000, 1, 3, DEFAULT_TOL)
            .unwrap();
        assert!(r.best_objective >= 0.5, "{}", r.best_objective);
        assert!(r.best_objective <= 2.0 * LN_2 + 1e-9);
    }

    #[test]
    fn sweep_endpoints() {
        let mut rng = trial_rng(4, 0);
        let rho = random_density_from(&mut rng, &SystemShape::lettered(&[2, 2]).unwrap(), None)
            .unwrap();
        let sigma = random_density_from(
            &mut rng,
            &SystemShape::new([("B", 2), ("C", 2)]).unwrap(),
            None,
        )
        .unwrap();
        let zero = alpha_sweep(&rho, &sigma, &[0.0], DEFAULT_TOL).unwrap();
        assert_eq!(zero[0].slack_min_eig, 0.0);
        let one = alpha_sweep(&rho, &sigma, &[1.0], DEFAULT_TOL).unwrap();
        let key = check_key_lemma(&rho, &sigma, DEFAULT_TOL).unwrap();
        assert_eq!(one[0].slack_min_eig, key.slack_min_eig);
        let grid = alpha_grid(0.0, 0.1, 1.0).unwrap();
        assert_eq!(grid.len(), 11);
        let sweep = alpha_sweep(&rho, &sigma, &grid, DEFAULT_TOL).unwrap();
        assert!(sweep.iter().all(|r| r.holds() && r.slack_min_eig.is_finite()));
        assert_eq!(sweep, alpha_sweep(&rho, &sigma, &grid, DEFAULT_TOL).unwrap());
        assert!(alpha_sweep(&rho, &sigma, &[1.2], DEFAULT_TOL).is_err());
    }

    #[test]
    fn stress_boundary_cases() {
        let reports = stress_boundary_random(&[2, 2, 2], &[1.0, 1e-4, 1e-13], 9, DEFAULT_TOL)
            .unwrap();
        assert_eq!(reports.len(), 15);
        let at_one = &reports[..5];
        assert!(at_one.iter().all(|r| r.holds()));
        assert!((at_one[0].slack_min_eig - 1.5).abs() < 1e-12);
        assert!((at_one[1].slack_min_eig - 2.0 * LN_2).abs() < 1e-12);
        let below = &reports[10..];
        assert!(below.iter().all(|r| r.verdict == Verdict::Inconclusive && r.error.is_some()));
        assert!(stress_boundary_random(&[2, 2, 2], &[0.0], 9, DEFAULT_TOL).is_err());

        let tau = random_density(&SystemShape::new([("C", 2)]).unwrap(), 1, None).unwrap();
        let probe = DensityMatrix::epr("A", "B").unwrap().tensor(&tau).unwrap();
        let reports = stress_boundary(&probe, &[1e-4], DEFAULT_TOL).unwrap();
        assert!(reports[1].holds() && reports[2].holds());
    }
}
