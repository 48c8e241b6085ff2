//! Successive approximations for the fuzzy Volterra problem, discretized with
//! the composite trapezoid rule on node-aligned panels.
//!
//! One application of the discrete operator at a node v_j is
//!
//! ```text
//! y(v_j) = Y(v_j) + Σ_t Σ_{l=l0..l1} h/2 · [ K_t(v_l, v_j)·G(y(v_l))
//!                                          + K_t(v_{l+1}, v_j)·G(y(v_{l+1})) ]
//! ```
//!
//! where `[l0, l1]` is the panel range whose endpoints are the grid nodes
//! nearest to θ_{t−1}(v_j) and θ_t(v_j). Kernel weights multiply each branch
//! directly; this is the branchwise combination the scheme's error analysis
//! assumes, and it keeps crisp input crisp bit-for-bit. Summation order is
//! fixed (pieces in order, panels ascending, fused per-panel accumulation) so
//! runs are reproducible.

use thiserror::Error;

use crate::calculus::{sup_distance, CalculusError, FuzzyGridFunction, SpaceGrid};
use crate::fuzzy::{validate_branches, FuzzyError, FuzzyNumber, MuGrid};
use crate::problem::{curve_table, kernel_max, ProblemError, ProblemSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("solver config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("iterate invalid at node {node}: {source}")]
    InvalidIterate { node: usize, source: FuzzyError },
    #[error("non-finite value at node {node} during iteration {iteration}")]
    NonFinite { node: usize, iteration: usize },
    #[error("no contraction: c = {c} >= 1")]
    NoContraction { c: f64 },
    #[error("a-priori bound inputs out of range (c = {c}, L = {l}, M0 = {m0})")]
    InvalidBoundInput { c: f64, l: f64, m0: f64 },
}

/// Knobs for [`solve`]. `tol = None` resolves to the scale-aware default
/// `1e-10 · (1 + ‖Y‖)`; pass `Some(0.0)` to force all `m_max` iterations.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub n: usize,
    pub m_max: usize,
    pub tol: Option<f64>,
    pub mu_levels: usize,
    pub keep_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { n: 128, m_max: 20, tol: None, mu_levels: 11, keep_history: false }
    }
}

/// Everything a run produces: the final iterate, per-step distances, the
/// fixed-point residual, the contraction constant with its geometric a-priori
/// bounds (absent when c ≥ 1), and the sup norms ‖G(y_i)‖ that the
/// a-posteriori machinery consumes.
#[derive(Debug, Clone)]
pub struct SolverReport {
    pub solution: FuzzyGridFunction,
    pub iterations_used: usize,
    /// step_distances[k] = D*(y_{k+1}, y_k).
    pub step_distances: Vec<f64>,
    /// D*(y_final, A y_final).
    pub residual: f64,
    pub c: f64,
    /// M_0 = sup_v ‖G(Y(v))‖.
    pub m0: f64,
    /// Per-piece M_t on the solver grid.
    pub m_t: Vec<f64>,
    /// apriori_bounds[k] = Eq.-(6) bound after k+1 iterations; `None` when
    /// c ≥ 1.
    pub apriori_bounds: Option<Vec<f64>>,
    /// Total of the a-posteriori estimate; filled by the bounds layer when
    /// its hypothesis holds.
    pub aposteriori_bound: Option<f64>,
    /// ‖G(y_i)‖ for i = 0..=iterations_used.
    pub iterate_g_norms: Vec<f64>,
    pub history: Option<Vec<FuzzyGridFunction>>,
}

/// Branch samples in structure-of-arrays form, `[node * levels + level]`.
struct BranchGrid {
    levels: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BranchGrid {
    fn from_grid_fn(f: &FuzzyGridFunction) -> Self {
        let levels = f.mu_grid().len();
        let nodes = f.grid().node_count();
        let mut lo = Vec::with_capacity(nodes * levels);
        let mut hi = Vec::with_capacity(nodes * levels);
        for value in f.values() {
            lo.extend_from_slice(value.lower());
            hi.extend_from_slice(value.upper());
        }
        BranchGrid { levels, lo, hi }
    }

    fn to_grid_fn(
        &self,
        grid: SpaceGrid,
        mu: &MuGrid,
        iteration: usize,
    ) -> Result<FuzzyGridFunction, SolverError> {
        let nodes = grid.node_count();
        let mut values = Vec::with_capacity(nodes);
        for j in 0..nodes {
            let lo = self.lo[j * self.levels..(j + 1) * self.levels].to_vec();
            let hi = self.hi[j * self.levels..(j + 1) * self.levels].to_vec();
            if lo.iter().chain(&hi).any(|x| !x.is_finite()) {
                return Err(SolverError::NonFinite { node: j, iteration });
            }
            let value = FuzzyNumber::new(mu.clone(), lo, hi)
                .map_err(|source| SolverError::InvalidIterate { node: j, source })?;
            values.push(value);
        }
        Ok(FuzzyGridFunction::new(grid, values)?)
    }

    fn node_count(&self) -> usize {
        self.lo.len() / self.levels
    }

    fn sup_diff(&self, other: &BranchGrid) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.lo.len() {
            best = best.max((self.lo[i] - other.lo[i]).abs());
            best = best.max((self.hi[i] - other.hi[i]).abs());
        }
        best
    }

    fn sup_abs(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.lo.len() {
            best = best.max(self.lo[i].abs());
            best = best.max(self.hi[i].abs());
        }
        best
    }
}

/// Precomputed discrete operator: kernel matrices, snapped panel ranges and
/// the sampled forcing.
pub(crate) struct DiscreteOperator {
    grid: SpaceGrid,
    spec_g: crate::problem::Nonlinearity,
    forcing: BranchGrid,
    /// kernels[t][j * (n+1) + l] = K_t(v_l, v_j).
    kernels: Vec<Vec<f64>>,
    /// ranges[t][j] = node-aligned panel range for θ_{t−1}(v_j)..θ_t(v_j).
    ranges: Vec<Vec<(usize, usize)>>,
}

impl DiscreteOperator {
    fn new(spec: &ProblemSpec, grid: SpaceGrid, mu: &MuGrid) -> Result<Self, SolverError> {
        let forcing_fn = spec.sample_forcing(grid, mu)?;
        let forcing = BranchGrid::from_grid_fn(&forcing_fn);
        let nodes = grid.node_count();

        let mut kernels = Vec::with_capacity(spec.piece_count());
        for t in 0..spec.piece_count() {
            let mut matrix = vec![0.0f64; nodes * nodes];
            for j in 0..nodes {
                let v = grid.node(j);
                for l in 0..nodes {
                    matrix[j * nodes + l] = spec.kernel_at(t, grid.node(l), v)?;
                }
            }
            kernels.push(matrix);
        }

        let thetas = curve_table(spec, &grid)?;
        let mut ranges = Vec::with_capacity(spec.piece_count());
        for t in 0..spec.piece_count() {
            let mut row = Vec::with_capacity(nodes);
            for j in 0..nodes {
                let l0 = grid.nearest_index(thetas[t][j]);
                let l1 = grid.nearest_index(thetas[t + 1][j]);
                row.push((l0, l1.max(l0)));
            }
            ranges.push(row);
        }

        Ok(DiscreteOperator { grid, spec_g: spec.nonlinearity(), forcing, kernels, ranges })
    }

    /// One operator application on raw branch data.
    fn apply(&self, y: &BranchGrid) -> BranchGrid {
        let nodes = y.node_count();
        let m = y.levels;
        let half_h = 0.5 * self.grid.h();

        // G applied branchwise once per node
        let mut g_lo = vec![0.0f64; nodes * m];
        let mut g_hi = vec![0.0f64; nodes * m];
        for i in 0..nodes * m {
            g_lo[i] = self.spec_g.apply(y.lo[i]);
            g_hi[i] = self.spec_g.apply(y.hi[i]);
        }

        let mut out_lo = self.forcing.lo.clone();
        let mut out_hi = self.forcing.hi.clone();
        for (kernel, ranges) in self.kernels.iter().zip(&self.ranges) {
            for j in 0..nodes {
                let (l0, l1) = ranges[j];
                let row = &kernel[j * nodes..(j + 1) * nodes];
                let out_lo_j = &mut out_lo[j * m..(j + 1) * m];
                let out_hi_j = &mut out_hi[j * m..(j + 1) * m];
                for l in l0..l1 {
                    let w0 = half_h * row[l];
                    let w1 = half_h * row[l + 1];
                    let ga = l * m;
                    let gb = (l + 1) * m;
                    for level in 0..m {
                        out_lo_j[level] += w0 * g_lo[ga + level] + w1 * g_lo[gb + level];
                        out_hi_j[level] += w0 * g_hi[ga + level] + w1 * g_hi[gb + level];
                    }
                }
            }
        }
        BranchGrid { levels: m, lo: out_lo, hi: out_hi }
    }

    /// Validate every node of an iterate against the branch invariants.
    fn check(&self, y: &BranchGrid, iteration: usize) -> Result<(), SolverError> {
        let m = y.levels;
        for j in 0..y.node_count() {
            let lo = &y.lo[j * m..(j + 1) * m];
            let hi = &y.hi[j * m..(j + 1) * m];
            if lo.iter().chain(hi).any(|x| !x.is_finite()) {
                return Err(SolverError::NonFinite { node: j, iteration });
            }
            validate_branches(lo, hi)
                .map_err(|source| SolverError::InvalidIterate { node: j, source })?;
        }
        Ok(())
    }

    fn g_norm(&self, y: &BranchGrid) -> f64 {
        let mut best = 0.0f64;
        for i in 0..y.lo.len() {
            best = best.max(self.spec_g.apply(y.lo[i]).abs());
            best = best.max(self.spec_g.apply(y.hi[i]).abs());
        }
        best
    }
}

/// Apply the discrete integral operator once to a grid function.
pub fn apply_operator(
    spec: &ProblemSpec,
    y: &FuzzyGridFunction,
) -> Result<FuzzyGridFunction, SolverError> {
    let op = DiscreteOperator::new(spec, *y.grid(), y.mu_grid())?;
    let out = op.apply(&BranchGrid::from_grid_fn(y));
    out.to_grid_fn(*y.grid(), y.mu_grid(), 1)
}

/// Fixed-point defect D*(y, A y).
pub fn residual(spec: &ProblemSpec, y: &FuzzyGridFunction) -> Result<f64, SolverError> {
    let ay = apply_operator(spec, y)?;
    Ok(sup_distance(y, &ay)?)
}

/// Eq.-(6) geometric error bound c^{m+1} / (L (1 − c)) · M_0.
pub fn apriori_bound(c: f64, lipschitz: f64, m0: f64, m: usize) -> Result<f64, SolverError> {
    if c >= 1.0 {
        return Err(SolverError::NoContraction { c });
    }
    if !(0.0..1.0).contains(&c) || !(lipschitz > 0.0) || !(m0 >= 0.0) {
        return Err(SolverError::InvalidBoundInput { c, l: lipschitz, m0 });
    }
    Ok(c.powi(m as i32 + 1) / (lipschitz * (1.0 - c)) * m0)
}

/// Run the successive-approximation scheme: y_0 = Y, y_m = A y_{m−1}, stopping
/// at `m_max` iterations or when D*(y_m, y_{m−1}) drops below the tolerance.
pub fn solve(spec: &ProblemSpec, config: &SolverConfig) -> Result<SolverReport, SolverError> {
    if config.n < 1 {
        return Err(SolverError::InvalidConfig("n must be >= 1".to_string()));
    }
    if config.m_max < 1 {
        return Err(SolverError::InvalidConfig("m_max must be >= 1".to_string()));
    }
    if config.mu_levels < 2 {
        return Err(SolverError::InvalidConfig("mu_levels must be >= 2".to_string()));
    }
    if let Some(tol) = config.tol {
        if !(tol >= 0.0) {
            return Err(SolverError::InvalidConfig("tol must be >= 0".to_string()));
        }
    }

    let grid = SpaceGrid::new(spec.z1(), spec.z2(), config.n)?;
    let mu = MuGrid::uniform(config.mu_levels)?;
    let op = DiscreteOperator::new(spec, grid, &mu)?;

    let forcing_norm = op.forcing.sup_abs();
    let tol = config.tol.unwrap_or(1e-10 * (1.0 + forcing_norm));

    let mut y = BranchGrid {
        levels: op.forcing.levels,
        lo: op.forcing.lo.clone(),
        hi: op.forcing.hi.clone(),
    };
    let mut history = if config.keep_history {
        Some(vec![y.to_grid_fn(grid, &mu, 0)?])
    } else {
        None
    };

    let mut iterate_g_norms = vec![op.g_norm(&y)];
    let mut step_distances = Vec::new();

    for m in 1..=config.m_max {
        let next = op.apply(&y);
        op.check(&next, m)?;
        let step = next.sup_diff(&y);
        step_distances.push(step);
        iterate_g_norms.push(op.g_norm(&next));
        y = next;
        if let Some(h) = history.as_mut() {
            h.push(y.to_grid_fn(grid, &mu, m)?);
        }
        if step < tol {
            break;
        }
    }

    let iterations_used = step_distances.len();
    let final_fn = y.to_grid_fn(grid, &mu, iterations_used)?;
    let residual_value = {
        let ay = op.apply(&y);
        ay.sup_diff(&y)
    };

    let c = crate::problem::contraction_constant(spec, &grid)?;
    let m_t: Vec<f64> = (0..spec.piece_count())
        .map(|t| kernel_max(spec, t, &grid))
        .collect::<Result<_, _>>()?;
    let m0 = iterate_g_norms[0];
    let apriori_bounds = if c < 1.0 {
        Some(
            (1..=iterations_used)
                .map(|m| apriori_bound(c, spec.lipschitz(), m0, m))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };

    Ok(SolverReport {
        solution: final_fn,
        iterations_used,
        step_distances,
        residual: residual_value,
        c,
        m0,
        m_t,
        apriori_bounds,
        aposteriori_bound: None,
        iterate_g_norms,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::problem::{KernelPiece, Nonlinearity};

    fn zero_kernel_spec() -> ProblemSpec {
        ProblemSpec::new(
            0.0,
            1.0,
            vec![KernelPiece { kernel: parse("0").unwrap(), upper_curve: parse("v").unwrap() }],
            parse("v+mu-1").unwrap(),
            parse("v+1-mu").unwrap(),
            Nonlinearity::Identity,
            1.0,
            None,
        )
        .unwrap()
    }

    #[test]
    fn zero_kernel_operator_returns_forcing() {
        let spec = zero_kernel_spec();
        let grid = SpaceGrid::new(0.0, 1.0, 16).unwrap();
        let mu = MuGrid::uniform(5).unwrap();
        let y = FuzzyGridFunction::from_fn(grid, &mu, |v, m_| {
            (v - 2.0 + m_, v + 2.0 - m_)
        })
        .unwrap();
        let ay = apply_operator(&spec, &y).unwrap();
        let forcing = spec.sample_forcing(grid, &mu).unwrap();
        assert_eq!(sup_distance(&ay, &forcing).unwrap(), 0.0);
    }

    #[test]
    fn zero_forcing_zero_kernel_gives_zero() {
        let spec = ProblemSpec::new(
            0.0,
            1.0,
            vec![KernelPiece { kernel: parse("0").unwrap(), upper_curve: parse("v").unwrap() }],
            parse("0").unwrap(),
            parse("0").unwrap(),
            Nonlinearity::Identity,
            1.0,
            None,
        )
        .unwrap();
        let grid = SpaceGrid::new(0.0, 1.0, 8).unwrap();
        let mu = MuGrid::uniform(3).unwrap();
        let y = FuzzyGridFunction::from_fn(grid, &mu, |v, m_| (v * (m_ - 1.0), v * (1.0 - m_)))
            .unwrap();
        let ay = apply_operator(&spec, &y).unwrap();
        for value in ay.values() {
            assert!(value.approx_eq(&FuzzyNumber::zero(mu.clone()), 0.0));
        }
    }

    #[test]
    fn zero_kernel_solve_converges_in_one_step() {
        let spec = zero_kernel_spec();
        let report = solve(&spec, &SolverConfig { n: 16, ..SolverConfig::default() }).unwrap();
        assert_eq!(report.iterations_used, 1);
        assert_eq!(report.step_distances, vec![0.0]);
        assert_eq!(report.residual, 0.0);
        let grid = SpaceGrid::new(0.0, 1.0, 16).unwrap();
        let forcing = spec.sample_forcing(grid, &MuGrid::uniform(11).unwrap()).unwrap();
        assert_eq!(sup_distance(&report.solution, &forcing).unwrap(), 0.0);
    }

    #[test]
    fn apriori_bound_values() {
        assert_eq!(apriori_bound(0.5, 1.0, 0.0, 3).unwrap(), 0.0);
        assert!((apriori_bound(0.5, 1.0, 1.0, 1).unwrap() - 0.5).abs() < 1e-15);
        // geometric ratio between consecutive m
        let b3 = apriori_bound(0.37, 2.0, 1.5, 3).unwrap();
        let b4 = apriori_bound(0.37, 2.0, 1.5, 4).unwrap();
        assert!((b4 / b3 - 0.37).abs() < 1e-12);
        assert!(matches!(
            apriori_bound(1.0, 1.0, 1.0, 1),
            Err(SolverError::NoContraction { .. })
        ));
    }

    #[test]
    fn crisp_problem_stays_crisp() {
        let spec = ProblemSpec::new(
            0.0,
            0.5,
            vec![KernelPiece { kernel: parse("1").unwrap(), upper_curve: parse("v").unwrap() }],
            parse("1+v").unwrap(),
            parse("1+v").unwrap(),
            Nonlinearity::Identity,
            1.0,
            None,
        )
        .unwrap();
        let report = solve(&spec, &SolverConfig { n: 32, ..SolverConfig::default() }).unwrap();
        for value in report.solution.values() {
            assert_eq!(value.lower(), value.upper());
        }
    }

    #[test]
    fn config_validation() {
        let spec = zero_kernel_spec();
        assert!(solve(&spec, &SolverConfig { n: 0, ..Default::default() }).is_err());
        assert!(solve(&spec, &SolverConfig { m_max: 0, ..Default::default() }).is_err());
        assert!(solve(&spec, &SolverConfig { mu_levels: 1, ..Default::default() }).is_err());
        assert!(solve(&spec, &SolverConfig { tol: Some(-1.0), ..Default::default() }).is_err());
    }

    #[test]
    fn history_is_recorded_when_requested() {
        let spec = zero_kernel_spec();
        let config = SolverConfig { n: 8, keep_history: true, ..Default::default() };
        let report = solve(&spec, &config).unwrap();
        let history = report.history.unwrap();
        // y_0 plus one iterate
        assert_eq!(history.len(), report.iterations_used + 1);
    }
}
