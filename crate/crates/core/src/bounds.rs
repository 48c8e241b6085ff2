//! A-posteriori error estimation: partial moduli of continuity of the kernel
//! pieces and the three-term bound
//!
//! ```text
//! D*(F, y_m) ≤ Σ_t C_t/(2(1−C_t)) · ω_{[θ_{t−1},θ_t]}(Y, h)
//!            + Σ_t C_t^{m+1} L₁ / (L (1−C_t))
//!            + Σ_t (C_t² + 2C_t)/(2 L M_t (1−C_t)) · (L₁ ω_s(K_t,h) + L₂ ω_t(K_t,h))
//! ```
//!
//! valid when every C_t = M_t · L · (z2 − z1) < 1. L₁ and L₂ are taken over
//! the computed discrete iterates (the continuum iterates are not available
//! at runtime), and the ω(Y, ·) interval for piece t is the conservative hull
//! [min_v θ_{t−1}(v), max_v θ_t(v)].

use thiserror::Error;

use crate::calculus::{modulus_of_continuity, CalculusError, SpaceGrid};
use crate::problem::{curve_table, KernelPiece, ProblemError, ProblemSpec};
use crate::solver::SolverReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("hypothesis violated: C_{piece} = {c_t} >= 1 (all C_t: {all:?})")]
    HypothesisViolated { piece: usize, c_t: f64, all: Vec<f64> },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("negative step size {0}")]
    NegativeStep(f64),
}

/// Partial modulus of continuity in the first kernel argument:
/// sup over grid v and grid pairs x, y with |x − y| ≤ h of |K(x,v) − K(y,v)|.
pub fn partial_modulus_s(
    piece: &KernelPiece,
    h: f64,
    grid: &SpaceGrid,
) -> Result<f64, BoundsError> {
    if h < 0.0 {
        return Err(BoundsError::NegativeStep(h));
    }
    kernel_modulus(piece, h, grid, false)
}

/// Partial modulus of continuity in the second kernel argument:
/// sup over grid r and grid pairs v1, v2 with |v1 − v2| ≤ h of
/// |K(r,v1) − K(r,v2)|.
pub fn partial_modulus_t(
    piece: &KernelPiece,
    h: f64,
    grid: &SpaceGrid,
) -> Result<f64, BoundsError> {
    if h < 0.0 {
        return Err(BoundsError::NegativeStep(h));
    }
    kernel_modulus(piece, h, grid, true)
}

fn kernel_modulus(
    piece: &KernelPiece,
    h: f64,
    grid: &SpaceGrid,
    vary_second: bool,
) -> Result<f64, BoundsError> {
    use crate::expr::Bindings;
    let nodes = grid.node_count();
    let window = ((h / grid.h()) * (1.0 + 1e-9) + 1e-9).floor() as usize;
    let mut best = 0.0f64;
    let mut row = vec![0.0f64; nodes];
    for fixed in 0..nodes {
        let f = grid.node(fixed);
        for (i, slot) in row.iter_mut().enumerate() {
            let x = grid.node(i);
            let bindings = if vary_second { Bindings::rv(f, x) } else { Bindings::rv(x, f) };
            *slot = piece
                .kernel
                .eval(&bindings)
                .map_err(|source| ProblemError::KernelEval { piece: 0, source })?;
        }
        for i in 0..nodes {
            for j in (i + 1)..=(i + window).min(nodes - 1) {
                best = best.max((row[i] - row[j]).abs());
            }
        }
    }
    Ok(best)
}

/// Per-piece components of the a-posteriori estimate.
#[derive(Debug, Clone)]
pub struct PieceBound {
    /// 1-based piece index.
    pub piece: usize,
    pub m_t: f64,
    pub c_t: f64,
    /// ω over the piece's curve hull of the forcing at step h.
    pub omega_y: f64,
    pub omega_s: f64,
    pub omega_t: f64,
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
}

/// Assembled bound with its inputs, per piece and in total.
#[derive(Debug, Clone)]
pub struct BoundBreakdown {
    pub pieces: Vec<PieceBound>,
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub total: f64,
    pub l1: f64,
    pub l2: f64,
    pub m: usize,
    pub h: f64,
}

/// Evaluate the three-term estimate for the run described by `report`.
/// Fails with [`BoundsError::HypothesisViolated`] when some C_t ≥ 1.
pub fn theorem6_bound(
    spec: &ProblemSpec,
    report: &SolverReport,
    grid: &SpaceGrid,
) -> Result<BoundBreakdown, BoundsError> {
    let h = grid.h();
    let lipschitz = spec.lipschitz();
    let width = spec.z2() - spec.z1();
    let m = report.iterations_used;

    let mut m_t = Vec::with_capacity(spec.piece_count());
    let mut c_t = Vec::with_capacity(spec.piece_count());
    for t in 0..spec.piece_count() {
        let mt = crate::problem::kernel_max(spec, t, grid)?;
        m_t.push(mt);
        c_t.push(mt * lipschitz * width);
    }
    if let Some((t, &ct)) = c_t.iter().enumerate().find(|(_, &ct)| ct >= 1.0) {
        return Err(BoundsError::HypothesisViolated { piece: t + 1, c_t: ct, all: c_t.clone() });
    }

    // L1 over iterates i <= m-1, L2 over i <= m-2 (empty max is 0)
    let l1 = report.iterate_g_norms[..m]
        .iter()
        .fold(0.0f64, |acc, &x| acc.max(x));
    let l2 = if m >= 2 {
        report.iterate_g_norms[..m - 1]
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(x))
    } else {
        0.0
    };

    let forcing = spec.sample_forcing(*grid, report.solution.mu_grid())?;
    let thetas = curve_table(spec, grid)?;

    let mut pieces = Vec::with_capacity(spec.piece_count());
    let (mut term1, mut term2, mut term3) = (0.0f64, 0.0f64, 0.0f64);
    for t in 0..spec.piece_count() {
        let lo_val = thetas[t].iter().cloned().fold(f64::INFINITY, f64::min);
        let hi_val = thetas[t + 1].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo_idx = (((lo_val - spec.z1()) / h) - 1e-9).ceil().max(0.0) as usize;
        let hi_idx = ((((hi_val - spec.z1()) / h) + 1e-9).floor().max(0.0) as usize).min(grid.n());
        let omega_y = if lo_idx < hi_idx {
            modulus_of_continuity(&forcing, h, Some((lo_idx, hi_idx)))?
        } else {
            0.0
        };
        let omega_s = partial_modulus_s(&spec.pieces()[t], h, grid)?;
        let omega_t = partial_modulus_t(&spec.pieces()[t], h, grid)?;

        let ct = c_t[t];
        let t1 = ct / (2.0 * (1.0 - ct)) * omega_y;
        let t2 = ct.powi(m as i32 + 1) * l1 / (lipschitz * (1.0 - ct));
        // (C_t² + 2C_t) / (2 L M_t (1−C_t)) with C_t = M_t L (z2−z1)
        // substituted, so vanishing kernels do not divide by zero
        let t3 = (ct + 2.0) * width / (2.0 * (1.0 - ct)) * (l1 * omega_s + l2 * omega_t);
        term1 += t1;
        term2 += t2;
        term3 += t3;
        pieces.push(PieceBound {
            piece: t + 1,
            m_t: m_t[t],
            c_t: ct,
            omega_y,
            omega_s,
            omega_t,
            term1: t1,
            term2: t2,
            term3: t3,
        });
    }

    Ok(BoundBreakdown {
        pieces,
        term1,
        term2,
        term3,
        total: term1 + term2 + term3,
        l1,
        l2,
        m,
        h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::problem::{KernelPiece, Nonlinearity};
    use crate::solver::{solve, SolverConfig};

    fn piece(kernel: &str) -> KernelPiece {
        KernelPiece { kernel: parse(kernel).unwrap(), upper_curve: parse("v").unwrap() }
    }

    #[test]
    fn partial_moduli_of_linear_kernels() {
        let grid = SpaceGrid::new(0.0, 1.0, 50).unwrap();
        let h = grid.h();
        // no r dependence
        assert_eq!(partial_modulus_s(&piece("v-1"), h, &grid).unwrap(), 0.0);
        // Lipschitz-1 in r, attained on adjacent nodes
        let w = partial_modulus_s(&piece("1+v-r"), h, &grid).unwrap();
        assert!((w - h).abs() < 1e-14);
        let w = partial_modulus_s(&piece("r-v"), h, &grid).unwrap();
        assert!((w - h).abs() < 1e-14);
        // and with the roles of the arguments swapped
        assert_eq!(partial_modulus_t(&piece("r"), h, &grid).unwrap(), 0.0);
        let w = partial_modulus_t(&piece("v-1"), h, &grid).unwrap();
        assert!((w - h).abs() < 1e-14);
        let w = partial_modulus_t(&piece("1+v-r"), h, &grid).unwrap();
        assert!((w - h).abs() < 1e-14);
    }

    #[test]
    fn zero_kernels_give_zero_bound() {
        let spec = ProblemSpec::new(
            0.0,
            1.0,
            vec![piece("0")],
            parse("v+mu-1").unwrap(),
            parse("v+1-mu").unwrap(),
            Nonlinearity::Identity,
            1.0,
            None,
        )
        .unwrap();
        let report = solve(&spec, &SolverConfig { n: 16, ..Default::default() }).unwrap();
        let grid = SpaceGrid::new(0.0, 1.0, 16).unwrap();
        let breakdown = theorem6_bound(&spec, &report, &grid).unwrap();
        assert_eq!(breakdown.total, 0.0);
        assert_eq!(breakdown.term1, 0.0);
        assert_eq!(breakdown.term2, 0.0);
        assert_eq!(breakdown.term3, 0.0);
    }

    #[test]
    fn hypothesis_violation_is_reported() {
        let spec = ProblemSpec::new(
            0.0,
            1.0,
            vec![piece("2")],
            parse("v+mu-1").unwrap(),
            parse("v+1-mu").unwrap(),
            Nonlinearity::Identity,
            1.0,
            None,
        )
        .unwrap();
        let report = solve(&spec, &SolverConfig { n: 16, m_max: 3, ..Default::default() });
        // c = 2 >= 1: solve still runs, bounds are absent
        let report = report.unwrap();
        assert!(report.apriori_bounds.is_none());
        let grid = SpaceGrid::new(0.0, 1.0, 16).unwrap();
        match theorem6_bound(&spec, &report, &grid) {
            Err(BoundsError::HypothesisViolated { piece, c_t, .. }) => {
                assert_eq!(piece, 1);
                assert!(c_t >= 1.0);
            }
            other => panic!("expected hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn breakdown_components_are_nonnegative_and_sum() {
        let spec = ProblemSpec::new(
            0.0,
            0.5,
            vec![piece("1+v-r")],
            parse("v+mu-1").unwrap(),
            parse("v+1-mu").unwrap(),
            Nonlinearity::Identity,
            1.0,
            None,
        )
        .unwrap();
        let report = solve(&spec, &SolverConfig { n: 64, ..Default::default() }).unwrap();
        let grid = SpaceGrid::new(0.0, 0.5, 64).unwrap();
        let b = theorem6_bound(&spec, &report, &grid).unwrap();
        assert!(b.term1 >= 0.0 && b.term2 >= 0.0 && b.term3 >= 0.0);
        assert!((b.total - (b.term1 + b.term2 + b.term3)).abs() < 1e-15);
        for p in &b.pieces {
            assert!(p.term1 >= 0.0 && p.term2 >= 0.0 && p.term3 >= 0.0);
            assert!(p.omega_y >= 0.0 && p.omega_s >= 0.0 && p.omega_t >= 0.0);
        }
    }
}
