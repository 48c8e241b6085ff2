//! Parametric fuzzy numbers sampled on a μ-level grid, with the arithmetic
//! and the supremum metric that make them a complete metric space.
//!
//! A fuzzy number is stored by its lower and upper branch values, one pair per
//! μ-level. The lower branch must be non-decreasing in μ, the upper branch
//! non-increasing, and lower ≤ upper at every level; crisp reals embed as
//! equal branches. The metric takes the max over levels of the larger branch
//! deviation, approximating the continuum supremum on the sampled grid.

use thiserror::Error;

/// Absolute slack used when validating branch monotonicity and ordering, so
/// that results of long floating-point accumulations still validate.
pub const VALIDATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("mu grid needs at least 2 levels, got {0}")]
    MuGridTooShort(usize),
    #[error("mu grid must be strictly increasing at index {0}")]
    MuGridNotIncreasing(usize),
    #[error("mu grid must start at 0 and end at 1 (got [{first}, {last}])")]
    MuGridEndpoints { first: f64, last: f64 },
    #[error("branch length {got} does not match mu grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("lower branch not non-decreasing at level {level}")]
    LowerNotNonDecreasing { level: usize },
    #[error("upper branch not non-increasing at level {level}")]
    UpperNotNonIncreasing { level: usize },
    #[error("lower branch exceeds upper branch at level {level}")]
    LowerAboveUpper { level: usize },
    #[error("mu grids differ between operands")]
    MuGridMismatch,
    #[error("non-monotone map on support")]
    NonMonotoneMap,
}

/// Grid of μ-levels in [0, 1], strictly increasing, containing both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct MuGrid(Vec<f64>);

impl MuGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self, FuzzyError> {
        if levels.len() < 2 {
            return Err(FuzzyError::MuGridTooShort(levels.len()));
        }
        for i in 1..levels.len() {
            if levels[i] <= levels[i - 1] {
                return Err(FuzzyError::MuGridNotIncreasing(i));
            }
        }
        let (first, last) = (levels[0], levels[levels.len() - 1]);
        if first != 0.0 || last != 1.0 {
            return Err(FuzzyError::MuGridEndpoints { first, last });
        }
        Ok(MuGrid(levels))
    }

    /// Uniform grid with `m` levels: 0, 1/(m-1), ..., 1.
    pub fn uniform(m: usize) -> Result<Self, FuzzyError> {
        if m < 2 {
            return Err(FuzzyError::MuGridTooShort(m));
        }
        let levels = (0..m)
            .map(|j| if j == m - 1 { 1.0 } else { j as f64 / (m - 1) as f64 })
            .collect();
        Ok(MuGrid(levels))
    }

    pub fn levels(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A fuzzy number in parametric (branch) form on a shared μ-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyNumber {
    mu: MuGrid,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl FuzzyNumber {
    /// Build a validated fuzzy number from branch samples.
    pub fn new(mu: MuGrid, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, FuzzyError> {
        let m = mu.len();
        if lower.len() != m {
            return Err(FuzzyError::LengthMismatch { expected: m, got: lower.len() });
        }
        if upper.len() != m {
            return Err(FuzzyError::LengthMismatch { expected: m, got: upper.len() });
        }
        validate_branches(&lower, &upper)?;
        Ok(FuzzyNumber { mu, lower, upper })
    }

    /// Crisp embedding: both branches constant `x`.
    pub fn crisp(mu: MuGrid, x: f64) -> Self {
        let m = mu.len();
        FuzzyNumber { mu, lower: vec![x; m], upper: vec![x; m] }
    }

    /// The zero element 0̃.
    pub fn zero(mu: MuGrid) -> Self {
        Self::crisp(mu, 0.0)
    }

    pub fn mu_grid(&self) -> &MuGrid {
        &self.mu
    }

    pub fn level_count(&self) -> usize {
        self.mu.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_crisp(&self) -> bool {
        self.lower == self.upper
    }

    /// Levelwise addition ⊕.
    pub fn add(&self, rhs: &FuzzyNumber) -> Result<FuzzyNumber, FuzzyError> {
        if self.mu != rhs.mu {
            return Err(FuzzyError::MuGridMismatch);
        }
        let lower = self.lower.iter().zip(&rhs.lower).map(|(a, b)| a + b).collect();
        let upper = self.upper.iter().zip(&rhs.upper).map(|(a, b)| a + b).collect();
        // sums of valid branches stay monotone and ordered
        Ok(FuzzyNumber { mu: self.mu.clone(), lower, upper })
    }

    /// Scalar multiplication ⊙: for γ < 0 the branches swap roles, which keeps
    /// the branch invariants intact.
    pub fn scale(&self, gamma: f64) -> FuzzyNumber {
        if gamma >= 0.0 {
            FuzzyNumber {
                mu: self.mu.clone(),
                lower: self.lower.iter().map(|x| gamma * x).collect(),
                upper: self.upper.iter().map(|x| gamma * x).collect(),
            }
        } else {
            FuzzyNumber {
                mu: self.mu.clone(),
                lower: self.upper.iter().map(|x| gamma * x).collect(),
                upper: self.lower.iter().map(|x| gamma * x).collect(),
            }
        }
    }

    /// Supremum metric on the sampled μ-grid:
    /// max over levels of max(|Δlower|, |Δupper|).
    pub fn distance(&self, rhs: &FuzzyNumber) -> Result<f64, FuzzyError> {
        if self.mu != rhs.mu {
            return Err(FuzzyError::MuGridMismatch);
        }
        let mut best = 0.0f64;
        for i in 0..self.lower.len() {
            best = best.max((self.lower[i] - rhs.lower[i]).abs());
            best = best.max((self.upper[i] - rhs.upper[i]).abs());
        }
        Ok(best)
    }

    /// ‖p‖ = D(p, 0̃) = max over levels of max(|lower|, |upper|).
    pub fn norm(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.lower.len() {
            best = best.max(self.lower[i].abs());
            best = best.max(self.upper[i].abs());
        }
        best
    }

    /// Apply a monotone non-decreasing real map branchwise. The result is
    /// re-validated; a map that is not monotone on the support surfaces as
    /// [`FuzzyError::NonMonotoneMap`].
    pub fn map_monotone(&self, g: impl Fn(f64) -> f64) -> Result<FuzzyNumber, FuzzyError> {
        let lower: Vec<f64> = self.lower.iter().map(|&x| g(x)).collect();
        let upper: Vec<f64> = self.upper.iter().map(|&x| g(x)).collect();
        validate_branches(&lower, &upper).map_err(|_| FuzzyError::NonMonotoneMap)?;
        Ok(FuzzyNumber { mu: self.mu.clone(), lower, upper })
    }

    /// Levelwise closeness within an absolute tolerance.
    pub fn approx_eq(&self, rhs: &FuzzyNumber, tol: f64) -> bool {
        self.mu == rhs.mu
            && self
                .lower
                .iter()
                .zip(&rhs.lower)
                .chain(self.upper.iter().zip(&rhs.upper))
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

pub(crate) fn validate_branches(lower: &[f64], upper: &[f64]) -> Result<(), FuzzyError> {
    for i in 0..lower.len() {
        if !lower[i].is_finite() || !upper[i].is_finite() {
            return Err(FuzzyError::LowerAboveUpper { level: i });
        }
        if i > 0 && lower[i] < lower[i - 1] - VALIDATION_TOL {
            return Err(FuzzyError::LowerNotNonDecreasing { level: i });
        }
        if i > 0 && upper[i] > upper[i - 1] + VALIDATION_TOL {
            return Err(FuzzyError::UpperNotNonIncreasing { level: i });
        }
        if lower[i] > upper[i] + VALIDATION_TOL {
            return Err(FuzzyError::LowerAboveUpper { level: i });
        }
    }
    Ok(())
}
