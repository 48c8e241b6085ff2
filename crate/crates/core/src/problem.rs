//! Problem definition: kernel pieces with their delay curves, fuzzy forcing,
//! nonlinearity and Lipschitz constant, plus the computable quantities of the
//! existence theory — the kernel maxima M_t, the contraction constant
//! c = sup_v Σ_t M_t L (θ_t(v) − θ_{t−1}(v)), and a validation report.

use thiserror::Error;

use crate::calculus::{FuzzyGridFunction, SpaceGrid};
use crate::expr::{Bindings, EvalError, ExprAst, ExprError};
use crate::fuzzy::{FuzzyError, MuGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("interval requires z1 < z2, got [{z1}, {z2}]")]
    InvalidInterval { z1: f64, z2: f64 },
    #[error("at least one kernel piece is required")]
    NoPieces,
    #[error("Lipschitz constant must be positive, got {0}")]
    NonPositiveLipschitz(f64),
    #[error("power nonlinearity requires an odd positive exponent, got {0}")]
    EvenPower(u32),
    #[error("kernel piece {piece}: {source}")]
    KernelEval { piece: usize, source: EvalError },
    #[error("curve of piece {piece}: {source}")]
    CurveEval { piece: usize, source: EvalError },
    #[error("forcing: {source}")]
    ForcingEval { source: EvalError },
    #[error("forcing invalid at node {node}: {source}")]
    ForcingInvalid { node: usize, source: FuzzyError },
    #[error("exact solution: {source}")]
    ExactEval { source: EvalError },
    #[error("exact solution invalid at node {node}: {source}")]
    ExactInvalid { node: usize, source: FuzzyError },
    #[error("curve chain ordering violated at piece {piece}, node {node} (v = {v}): adjacent curve values {prev}, {next}")]
    CurveOrdering { piece: usize, node: usize, v: f64, prev: f64, next: f64 },
    #[error("expression: {0}")]
    Expr(#[from] ExprError),
}

/// The monotone map G applied branchwise to the unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    Identity,
    /// x ↦ x^k with k odd, so the map is non-decreasing on all of R.
    Power(u32),
}

impl Nonlinearity {
    pub fn power(k: u32) -> Result<Self, ProblemError> {
        if k == 0 || k % 2 == 0 {
            return Err(ProblemError::EvenPower(k));
        }
        Ok(if k == 1 { Nonlinearity::Identity } else { Nonlinearity::Power(k) })
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Nonlinearity::Identity => x,
            Nonlinearity::Power(k) => x.powi(*k as i32),
        }
    }
}

/// One kernel piece K_t(r, v) active on θ_{t-1}(v) ≤ r ≤ θ_t(v), together
/// with its upper delay curve θ_t(v). The chain starts at θ_0 ≡ z1 and the
/// last curve must coincide with v.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPiece {
    pub kernel: ExprAst,
    pub upper_curve: ExprAst,
}

/// The full problem object: interval, kernel pieces, fuzzy forcing branches
/// in (v, mu), nonlinearity with its Lipschitz constant, and optionally the
/// closed-form solution branches for error studies.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    z1: f64,
    z2: f64,
    pieces: Vec<KernelPiece>,
    forcing_lower: ExprAst,
    forcing_upper: ExprAst,
    nonlinearity: Nonlinearity,
    lipschitz: f64,
    exact: Option<(ExprAst, ExprAst)>,
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        z1: f64,
        z2: f64,
        pieces: Vec<KernelPiece>,
        forcing_lower: ExprAst,
        forcing_upper: ExprAst,
        nonlinearity: Nonlinearity,
        lipschitz: f64,
        exact: Option<(ExprAst, ExprAst)>,
    ) -> Result<Self, ProblemError> {
        if !(z1 < z2) {
            return Err(ProblemError::InvalidInterval { z1, z2 });
        }
        if pieces.is_empty() {
            return Err(ProblemError::NoPieces);
        }
        if !(lipschitz > 0.0) {
            return Err(ProblemError::NonPositiveLipschitz(lipschitz));
        }
        Ok(ProblemSpec {
            z1,
            z2,
            pieces,
            forcing_lower,
            forcing_upper,
            nonlinearity,
            lipschitz,
            exact,
        })
    }

    pub fn z1(&self) -> f64 {
        self.z1
    }

    pub fn z2(&self) -> f64 {
        self.z2
    }

    pub fn pieces(&self) -> &[KernelPiece] {
        &self.pieces
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn exact(&self) -> Option<&(ExprAst, ExprAst)> {
        self.exact.as_ref()
    }

    pub fn kernel_at(&self, t: usize, r: f64, v: f64) -> Result<f64, ProblemError> {
        self.pieces[t]
            .kernel
            .eval(&Bindings::rv(r, v))
            .map_err(|source| ProblemError::KernelEval { piece: t + 1, source })
    }

    /// θ_t(v) for t = 0..=m': θ_0 ≡ z1, interior curves from the pieces.
    pub fn theta(&self, t: usize, v: f64) -> Result<f64, ProblemError> {
        if t == 0 {
            return Ok(self.z1);
        }
        self.pieces[t - 1]
            .upper_curve
            .eval(&Bindings::v(v))
            .map_err(|source| ProblemError::CurveEval { piece: t, source })
    }

    pub fn forcing_at(&self, v: f64, mu: f64) -> Result<(f64, f64), ProblemError> {
        let b = Bindings::vmu(v, mu);
        let lo = self
            .forcing_lower
            .eval(&b)
            .map_err(|source| ProblemError::ForcingEval { source })?;
        let hi = self
            .forcing_upper
            .eval(&b)
            .map_err(|source| ProblemError::ForcingEval { source })?;
        Ok((lo, hi))
    }

    /// Sample the forcing as a validated fuzzy grid function.
    pub fn sample_forcing(
        &self,
        grid: SpaceGrid,
        mu: &MuGrid,
    ) -> Result<FuzzyGridFunction, ProblemError> {
        let mut failure = None;
        let result = FuzzyGridFunction::from_fn(grid, mu, |v, level| {
            match self.forcing_at(v, level) {
                Ok(pair) => pair,
                Err(e) => {
                    failure.get_or_insert(e);
                    (0.0, 0.0)
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        match result {
            Ok(f) => Ok(f),
            Err(crate::calculus::CalculusError::NodeValue { node, source }) => {
                Err(ProblemError::ForcingInvalid { node, source })
            }
            Err(_) => unreachable!("grid sizes are consistent by construction"),
        }
    }

    /// Sample the exact solution, when one was supplied.
    pub fn sample_exact(
        &self,
        grid: SpaceGrid,
        mu: &MuGrid,
    ) -> Result<Option<FuzzyGridFunction>, ProblemError> {
        let Some((lo_expr, hi_expr)) = &self.exact else {
            return Ok(None);
        };
        let mut failure = None;
        let result = FuzzyGridFunction::from_fn(grid, mu, |v, level| {
            let b = Bindings::vmu(v, level);
            match (lo_expr.eval(&b), hi_expr.eval(&b)) {
                (Ok(lo), Ok(hi)) => (lo, hi),
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(ProblemError::ExactEval { source: e });
                    (0.0, 0.0)
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        match result {
            Ok(f) => Ok(Some(f)),
            Err(crate::calculus::CalculusError::NodeValue { node, source }) => {
                Err(ProblemError::ExactInvalid { node, source })
            }
            Err(_) => unreachable!("grid sizes are consistent by construction"),
        }
    }
}

/// Table of curve values θ_t(v_j) for t = 0..=m' on a grid.
pub fn curve_table(spec: &ProblemSpec, grid: &SpaceGrid) -> Result<Vec<Vec<f64>>, ProblemError> {
    let m = spec.piece_count();
    let mut table = Vec::with_capacity(m + 1);
    for t in 0..=m {
        let mut row = Vec::with_capacity(grid.node_count());
        for j in 0..grid.node_count() {
            row.push(spec.theta(t, grid.node(j))?);
        }
        table.push(row);
    }
    Ok(table)
}

/// M_t = max |K_t(r, v)| over grid points with z1 ≤ r ≤ v ≤ z2.
pub fn kernel_max(spec: &ProblemSpec, t: usize, grid: &SpaceGrid) -> Result<f64, ProblemError> {
    let mut best = 0.0f64;
    for j in 0..grid.node_count() {
        let v = grid.node(j);
        for i in 0..=j {
            best = best.max(spec.kernel_at(t, grid.node(i), v)?.abs());
        }
    }
    Ok(best)
}

/// Contraction constant c = max over grid nodes v of
/// Σ_t M_t · L · (θ_t(v) − θ_{t−1}(v)); the sup over v is the conservative
/// reading. Curve-ordering violations are hard errors here.
pub fn contraction_constant(spec: &ProblemSpec, grid: &SpaceGrid) -> Result<f64, ProblemError> {
    let thetas = curve_table(spec, grid)?;
    check_curve_ordering(spec, grid, &thetas)?;
    let m_t: Vec<f64> = (0..spec.piece_count())
        .map(|t| kernel_max(spec, t, grid))
        .collect::<Result<_, _>>()?;
    let mut c = 0.0f64;
    for j in 0..grid.node_count() {
        let mut sum = 0.0;
        for t in 0..spec.piece_count() {
            sum += m_t[t] * spec.lipschitz * (thetas[t + 1][j] - thetas[t][j]);
        }
        c = c.max(sum);
    }
    Ok(c)
}

fn check_curve_ordering(
    spec: &ProblemSpec,
    grid: &SpaceGrid,
    thetas: &[Vec<f64>],
) -> Result<(), ProblemError> {
    match curve_ordering_violations(spec, grid, thetas).into_iter().next() {
        Some(violation) => Err(violation),
        None => Ok(()),
    }
}

/// The ordering constraints z1 ≤ θ_{t−1}(v) ≤ θ_t(v) ≤ v, checked on the grid
/// with a small absolute slack.
fn curve_ordering_violations(
    spec: &ProblemSpec,
    grid: &SpaceGrid,
    thetas: &[Vec<f64>],
) -> Vec<ProblemError> {
    let slack = 1e-12 * (spec.z2 - spec.z1).abs().max(1.0);
    let mut out = Vec::new();
    for j in 0..grid.node_count() {
        let v = grid.node(j);
        for t in 1..thetas.len() {
            let prev = thetas[t - 1][j];
            let next = thetas[t][j];
            if prev > next + slack || next > v + slack || prev < spec.z1 - slack {
                out.push(ProblemError::CurveOrdering { piece: t, node: j, v, prev, next });
            }
        }
    }
    out
}

/// Per-piece sign summary for the positivity hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct SignWarning {
    /// 1-based piece index.
    pub piece: usize,
    pub min_value: f64,
    pub max_value: f64,
}

/// Outcome of validating a problem against a grid: curve-chain ordering,
/// kernel positivity (a warning, not an error), the contraction constant with
/// the per-piece Theorem-6 constants, and forcing validity at all samples.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub curve_violations: Vec<ProblemError>,
    pub sign_warnings: Vec<SignWarning>,
    pub m_t: Vec<f64>,
    /// c = sup_v Σ_t M_t L Δθ_t(v).
    pub c: f64,
    /// Per-piece C_t = M_t · L · (z2 − z1).
    pub c_t: Vec<f64>,
    pub forcing_error: Option<String>,
    pub evaluation_error: Option<String>,
}

impl ValidationReport {
    pub fn contraction_ok(&self) -> bool {
        self.c < 1.0
    }

    /// The criteria the CLI maps to a zero exit code: ordering and forcing
    /// sound, no evaluation failures, and c < 1. Sign warnings do not fail.
    pub fn passed(&self) -> bool {
        self.curve_violations.is_empty()
            && self.forcing_error.is_none()
            && self.evaluation_error.is_none()
            && self.contraction_ok()
    }
}

/// Validate a problem on a grid. Never errors; everything lands in the report.
pub fn validate(spec: &ProblemSpec, grid: &SpaceGrid, mu: &MuGrid) -> ValidationReport {
    let mut report = ValidationReport {
        curve_violations: Vec::new(),
        sign_warnings: Vec::new(),
        m_t: Vec::new(),
        c: f64::NAN,
        c_t: Vec::new(),
        forcing_error: None,
        evaluation_error: None,
    };

    let thetas = match curve_table(spec, grid) {
        Ok(t) => t,
        Err(e) => {
            report.evaluation_error = Some(e.to_string());
            return report;
        }
    };
    report.curve_violations = curve_ordering_violations(spec, grid, &thetas);

    for t in 0..spec.piece_count() {
        let mut min_value = f64::INFINITY;
        let mut max_value = f64::NEG_INFINITY;
        for j in 0..grid.node_count() {
            let v = grid.node(j);
            for i in 0..=j {
                match spec.kernel_at(t, grid.node(i), v) {
                    Ok(k) => {
                        min_value = min_value.min(k);
                        max_value = max_value.max(k);
                    }
                    Err(e) => {
                        report.evaluation_error = Some(e.to_string());
                        return report;
                    }
                }
            }
        }
        report.m_t.push(min_value.abs().max(max_value.abs()));
        report.c_t.push(report.m_t[t] * spec.lipschitz * (spec.z2 - spec.z1));
        if min_value <= 0.0 {
            report.sign_warnings.push(SignWarning { piece: t + 1, min_value, max_value });
        }
    }

    let mut c = 0.0f64;
    for j in 0..grid.node_count() {
        let mut sum = 0.0;
        for t in 0..spec.piece_count() {
            sum += report.m_t[t] * spec.lipschitz * (thetas[t + 1][j] - thetas[t][j]);
        }
        c = c.max(sum);
    }
    report.c = c;

    if let Err(e) = spec.sample_forcing(*grid, mu) {
        report.forcing_error = Some(e.to_string());
    }

    report
}
