//! Fuzzy-valued functions on a uniform 1-D grid: the discrete sup metric,
//! modulus of continuity, and fuzzy Riemann integration by the composite
//! trapezoid rule with endpoint interpolation.
//!
//! Integration is branchwise: the lower branch of the integral at a μ-level is
//! the crisp trapezoid of the lower branch at that level, so the fuzzy rule
//! inherits everything known about the crisp one. The one-panel error bound
//! `(b-a)/2 · ω(F, (b-a)/2)` is exposed as [`trapezoid_error_bound`].

use thiserror::Error;

use crate::fuzzy::{FuzzyError, FuzzyNumber, MuGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalculusError {
    #[error("grid requires z1 < z2, got [{z1}, {z2}]")]
    InvalidInterval { z1: f64, z2: f64 },
    #[error("grid requires n >= 1, got {0}")]
    TooFewPanels(usize),
    #[error("expected {expected} node values, got {got}")]
    ValueCountMismatch { expected: usize, got: usize },
    #[error("node {node}: {source}")]
    NodeValue { node: usize, source: FuzzyError },
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("integration bounds [{a}, {b}] are reversed")]
    ReversedBounds { a: f64, b: f64 },
    #[error("integration bounds [{a}, {b}] leave the grid domain [{z1}, {z2}]")]
    OutOfDomain { a: f64, b: f64, z1: f64, z2: f64 },
    #[error("modulus of continuity over an empty node range")]
    EmptyRange,
    #[error("modulus of continuity requires delta >= 0, got {0}")]
    NegativeDelta(f64),
}

/// Uniform grid z1 = v_0 < v_1 < ... < v_n = z2 with spacing h = (z2-z1)/n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceGrid {
    z1: f64,
    z2: f64,
    n: usize,
    h: f64,
}

impl SpaceGrid {
    pub fn new(z1: f64, z2: f64, n: usize) -> Result<Self, CalculusError> {
        if !(z1 < z2) || !z1.is_finite() || !z2.is_finite() {
            return Err(CalculusError::InvalidInterval { z1, z2 });
        }
        if n < 1 {
            return Err(CalculusError::TooFewPanels(n));
        }
        Ok(SpaceGrid { z1, z2, n, h: (z2 - z1) / n as f64 })
    }

    pub fn z1(&self) -> f64 {
        self.z1
    }

    pub fn z2(&self) -> f64 {
        self.z2
    }

    /// Panel count; the grid has `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.n + 1
    }

    pub fn node(&self, i: usize) -> f64 {
        self.z1 + i as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(|i| self.node(i))
    }

    /// Index of the grid node nearest to `x`, clamped into range.
    pub fn nearest_index(&self, x: f64) -> usize {
        let r = ((x - self.z1) / self.h).round();
        if r <= 0.0 {
            0
        } else if r >= self.n as f64 {
            self.n
        } else {
            r as usize
        }
    }

    fn domain_slack(&self) -> f64 {
        1e-12 * (self.z2 - self.z1).abs().max(1.0)
    }
}

/// A fuzzy number attached to every node of a [`SpaceGrid`], all sharing one
/// μ-grid. This is the discrete representation of a fuzzy-valued function.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyGridFunction {
    grid: SpaceGrid,
    values: Vec<FuzzyNumber>,
}

impl FuzzyGridFunction {
    pub fn new(grid: SpaceGrid, values: Vec<FuzzyNumber>) -> Result<Self, CalculusError> {
        if values.len() != grid.node_count() {
            return Err(CalculusError::ValueCountMismatch {
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        for (i, value) in values.iter().enumerate().skip(1) {
            if value.mu_grid() != values[0].mu_grid() {
                return Err(CalculusError::NodeValue { node: i, source: FuzzyError::MuGridMismatch });
            }
        }
        Ok(FuzzyGridFunction { grid, values })
    }

    /// Sample branch closures `(v, mu) -> (lower, upper)` at every node/level.
    pub fn from_fn(
        grid: SpaceGrid,
        mu: &MuGrid,
        mut f: impl FnMut(f64, f64) -> (f64, f64),
    ) -> Result<Self, CalculusError> {
        let mut values = Vec::with_capacity(grid.node_count());
        for i in 0..grid.node_count() {
            let v = grid.node(i);
            let mut lower = Vec::with_capacity(mu.len());
            let mut upper = Vec::with_capacity(mu.len());
            for &level in mu.levels() {
                let (lo, hi) = f(v, level);
                lower.push(lo);
                upper.push(hi);
            }
            let value = FuzzyNumber::new(mu.clone(), lower, upper)
                .map_err(|source| CalculusError::NodeValue { node: i, source })?;
            values.push(value);
        }
        Ok(FuzzyGridFunction { grid, values })
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[FuzzyNumber] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &FuzzyNumber {
        &self.values[i]
    }

    pub fn mu_grid(&self) -> &MuGrid {
        self.values[0].mu_grid()
    }
}

/// Discrete modulus of continuity: the largest distance between node values
/// at nodes no farther than `delta` apart, over an optional inclusive node
/// range (defaults to the whole grid).
pub fn modulus_of_continuity(
    f: &FuzzyGridFunction,
    delta: f64,
    range: Option<(usize, usize)>,
) -> Result<f64, CalculusError> {
    if delta < 0.0 {
        return Err(CalculusError::NegativeDelta(delta));
    }
    let (lo, hi) = range.unwrap_or((0, f.grid.n));
    if lo > hi || hi > f.grid.n {
        return Err(CalculusError::EmptyRange);
    }
    // |v_i - v_j| <= delta on a uniform grid means |i - j| <= delta/h;
    // the relative slack keeps delta = k*h pairs from being dropped to
    // rounding.
    let window = ((delta / f.grid.h) * (1.0 + 1e-9) + 1e-9).floor() as usize;
    let mut best = 0.0f64;
    for i in lo..=hi {
        for j in (i + 1)..=(i + window).min(hi) {
            let d = f.values[i].distance(&f.values[j]).map_err(|source| {
                CalculusError::NodeValue { node: i, source }
            })?;
            best = best.max(d);
        }
    }
    Ok(best)
}

/// Crisp composite trapezoid over `[a, b]` of one branch of a grid function.
///
/// Panel order is fixed: the partial panel `[a, v_{ia+1}]`, then full panels
/// in ascending index order, then the partial panel `[v_ib, b]`. Values at
/// `a` and `b` are linear interpolations of the bracketing node values. Each
/// panel contributes `0.5 * width * (left + right)`.
fn trapezoid_branch(grid: &SpaceGrid, value: impl Fn(usize) -> f64, a: f64, b: f64) -> f64 {
    let clamp_panel = |x: f64| -> usize {
        let r = ((x - grid.z1) / grid.h).floor();
        if r <= 0.0 {
            0
        } else if r >= grid.n as f64 {
            grid.n - 1
        } else {
            r as usize
        }
    };
    let interp = |panel: usize, x: f64| -> f64 {
        let t = (x - grid.node(panel)) / grid.h;
        value(panel) + t * (value(panel + 1) - value(panel))
    };
    let ia = clamp_panel(a);
    let ib = clamp_panel(b);
    if ia == ib {
        return 0.5 * (b - a) * (interp(ia, a) + interp(ia, b));
    }
    let mut acc = 0.5 * (grid.node(ia + 1) - a) * (interp(ia, a) + value(ia + 1));
    for l in (ia + 1)..ib {
        acc += 0.5 * grid.h * (value(l) + value(l + 1));
    }
    acc += 0.5 * (b - grid.node(ib)) * (value(ib) + interp(ib, b));
    acc
}

/// Fuzzy Riemann integral over `[a, b]` by the composite trapezoid rule,
/// computed branchwise per μ-level (see [`trapezoid_branch`] for the exact
/// panel handling).
pub fn fuzzy_trapezoid(
    f: &FuzzyGridFunction,
    a: f64,
    b: f64,
) -> Result<FuzzyNumber, CalculusError> {
    let grid = &f.grid;
    if a > b {
        return Err(CalculusError::ReversedBounds { a, b });
    }
    let slack = grid.domain_slack();
    if a < grid.z1 - slack || b > grid.z2 + slack {
        return Err(CalculusError::OutOfDomain { a, b, z1: grid.z1, z2: grid.z2 });
    }
    let mu = f.mu_grid().clone();
    if a == b {
        return Ok(FuzzyNumber::zero(mu));
    }
    let m = mu.len();
    let mut lower = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m);
    for level in 0..m {
        lower.push(trapezoid_branch(grid, |i| f.values[i].lower()[level], a, b));
        upper.push(trapezoid_branch(grid, |i| f.values[i].upper()[level], a, b));
    }
    FuzzyNumber::new(mu, lower, upper)
        .map_err(|source| CalculusError::NodeValue { node: 0, source })
}

/// One-panel trapezoid error bound `(b-a)/2 · ω_{[a,b]}(F, (b-a)/2)`, with the
/// modulus taken over the grid nodes falling inside `[a, b]`.
pub fn trapezoid_error_bound(
    f: &FuzzyGridFunction,
    a: f64,
    b: f64,
) -> Result<f64, CalculusError> {
    let grid = &f.grid;
    if a >= b {
        return Err(CalculusError::ReversedBounds { a, b });
    }
    let slack = grid.domain_slack();
    if a < grid.z1 - slack || b > grid.z2 + slack {
        return Err(CalculusError::OutOfDomain { a, b, z1: grid.z1, z2: grid.z2 });
    }
    let lo = (((a - grid.z1) / grid.h) - 1e-9).ceil().max(0.0) as usize;
    let hi_f = (((b - grid.z1) / grid.h) + 1e-9).floor();
    let hi = (hi_f.max(0.0) as usize).min(grid.n);
    if lo >= hi {
        return Err(CalculusError::EmptyRange);
    }
    let half = 0.5 * (b - a);
    Ok(half * modulus_of_continuity(f, half, Some((lo, hi)))?)
}

/// Discrete sup distance D*: the max over nodes of the fuzzy distance.
pub fn sup_distance(f: &FuzzyGridFunction, g: &FuzzyGridFunction) -> Result<f64, CalculusError> {
    if f.grid != g.grid {
        return Err(CalculusError::GridMismatch);
    }
    let mut best = 0.0f64;
    for (i, (a, b)) in f.values.iter().zip(&g.values).enumerate() {
        let d = a.distance(b).map_err(|source| CalculusError::NodeValue { node: i, source })?;
        best = best.max(d);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu2() -> MuGrid {
        MuGrid::new(vec![0.0, 1.0]).unwrap()
    }

    fn crisp_fn(grid: SpaceGrid, f: impl Fn(f64) -> f64) -> FuzzyGridFunction {
        FuzzyGridFunction::from_fn(grid, &mu2(), |v, _| (f(v), f(v))).unwrap()
    }

    #[test]
    fn grid_nodes_are_uniform() {
        let g = SpaceGrid::new(0.0, 2.0, 4).unwrap();
        assert_eq!(g.h(), 0.5);
        let nodes: Vec<f64> = g.nodes().collect();
        assert_eq!(nodes, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(SpaceGrid::new(1.0, 1.0, 4).is_err());
        assert!(SpaceGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn nearest_index_clamps() {
        let g = SpaceGrid::new(0.0, 1.0, 10).unwrap();
        assert_eq!(g.nearest_index(-0.3), 0);
        assert_eq!(g.nearest_index(0.31), 3);
        assert_eq!(g.nearest_index(2.0), 10);
    }

    #[test]
    fn constant_function_has_zero_modulus() {
        let g = SpaceGrid::new(0.0, 1.0, 8).unwrap();
        let f = crisp_fn(g, |_| 3.25);
        assert_eq!(modulus_of_continuity(&f, 0.7, None).unwrap(), 0.0);
    }

    #[test]
    fn zero_delta_gives_zero_modulus() {
        let g = SpaceGrid::new(0.0, 1.0, 8).unwrap();
        let f = crisp_fn(g, |v| v * v);
        assert_eq!(modulus_of_continuity(&f, 0.0, None).unwrap(), 0.0);
    }

    #[test]
    fn modulus_is_monotone_in_delta() {
        let g = SpaceGrid::new(0.0, 1.0, 16).unwrap();
        let f = crisp_fn(g, |v| (5.0 * v).sin());
        let w1 = modulus_of_continuity(&f, 0.2, None).unwrap();
        let w2 = modulus_of_continuity(&f, 0.5, None).unwrap();
        assert!(w1 <= w2);
    }

    #[test]
    fn modulus_empty_range_errors() {
        let g = SpaceGrid::new(0.0, 1.0, 4).unwrap();
        let f = crisp_fn(g, |v| v);
        assert!(matches!(
            modulus_of_continuity(&f, 0.5, Some((3, 2))),
            Err(CalculusError::EmptyRange)
        ));
        assert!(matches!(
            modulus_of_continuity(&f, -0.1, None),
            Err(CalculusError::NegativeDelta(_))
        ));
    }

    #[test]
    fn degenerate_interval_integrates_to_zero() {
        let g = SpaceGrid::new(0.0, 2.0, 8).unwrap();
        let f = crisp_fn(g, |v| v + 1.0);
        let z = fuzzy_trapezoid(&f, 0.75, 0.75).unwrap();
        assert_eq!(z, FuzzyNumber::zero(mu2()));
    }

    #[test]
    fn constant_one_integrates_to_length() {
        let g = SpaceGrid::new(0.0, 2.0, 10).unwrap();
        let f = crisp_fn(g, |_| 1.0);
        let result = fuzzy_trapezoid(&f, 0.0, 2.0).unwrap();
        assert!((result.lower()[0] - 2.0).abs() < 1e-14);
        assert!(result.is_crisp());
    }

    #[test]
    fn linear_integrand_is_exact() {
        // dyadic spacing keeps the panel sums exact in floating point
        let g = SpaceGrid::new(0.0, 1.0, 8).unwrap();
        let f = crisp_fn(g, |v| v);
        let result = fuzzy_trapezoid(&f, 0.0, 1.0).unwrap();
        assert_eq!(result.lower()[0], 0.5);
        // and with the n = 10 grid the defect is pure rounding noise
        let g10 = SpaceGrid::new(0.0, 1.0, 10).unwrap();
        let f10 = crisp_fn(g10, |v| v);
        assert!((fuzzy_trapezoid(&f10, 0.0, 1.0).unwrap().lower()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cut_points_between_nodes_interpolate() {
        // integrand v on [0.25, 0.35] with h = 0.2: single panel, both ends
        // interpolated; exact value 0.03
        let g = SpaceGrid::new(0.0, 1.0, 5).unwrap();
        let f = crisp_fn(g, |v| v);
        let result = fuzzy_trapezoid(&f, 0.25, 0.35).unwrap();
        assert!((result.lower()[0] - 0.03).abs() < 1e-15);
    }

    #[test]
    fn reversed_and_out_of_domain_bounds_error() {
        let g = SpaceGrid::new(0.0, 1.0, 4).unwrap();
        let f = crisp_fn(g, |v| v);
        assert!(matches!(fuzzy_trapezoid(&f, 0.5, 0.25), Err(CalculusError::ReversedBounds { .. })));
        assert!(matches!(fuzzy_trapezoid(&f, -0.5, 0.5), Err(CalculusError::OutOfDomain { .. })));
    }

    #[test]
    fn one_panel_bound_for_identity() {
        // F(v) = v sampled finely; one-panel rule over [0, 1] is exact for
        // linear F, and the bound evaluates to 0.5 * omega(F, 0.5) = 0.25
        let g = SpaceGrid::new(0.0, 1.0, 10).unwrap();
        let f = crisp_fn(g, |v| v);
        let bound = trapezoid_error_bound(&f, 0.0, 1.0).unwrap();
        assert!((bound - 0.25).abs() < 1e-15);
        let one_panel = 0.5 * (f.value(0).lower()[0] + f.value(10).lower()[0]);
        let exact = 0.5;
        assert!((one_panel - exact).abs() <= bound);
    }

    #[test]
    fn constant_function_has_zero_bound() {
        let g = SpaceGrid::new(0.0, 1.0, 6).unwrap();
        let f = crisp_fn(g, |_| 7.0);
        assert_eq!(trapezoid_error_bound(&f, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn sup_distance_basics() {
        let g = SpaceGrid::new(0.0, 1.0, 4).unwrap();
        let f = crisp_fn(g, |v| v);
        assert_eq!(sup_distance(&f, &f).unwrap(), 0.0);
        let shifted = FuzzyGridFunction::from_fn(g, &mu2(), |v, _| (v + 1.0, v + 1.0)).unwrap();
        assert_eq!(sup_distance(&f, &shifted).unwrap(), 1.0);
        assert_eq!(sup_distance(&shifted, &f).unwrap(), 1.0);
        let other = crisp_fn(SpaceGrid::new(0.0, 1.0, 5).unwrap(), |v| v);
        assert!(matches!(sup_distance(&f, &other), Err(CalculusError::GridMismatch)));
    }

    #[test]
    fn from_fn_rejects_invalid_branches() {
        let g = SpaceGrid::new(0.0, 1.0, 2).unwrap();
        let err = FuzzyGridFunction::from_fn(g, &mu2(), |v, mu| (v + mu, v - mu)).unwrap_err();
        assert!(matches!(err, CalculusError::NodeValue { .. }));
    }
}
