//! Built-in benchmark problems with closed-form solutions.
//!
//! Both have two/three smooth kernel pieces along proportional delay curves
//! and a forcing constructed so that the stated solution solves the equation
//! exactly; they are the workhorses of the test suite and ship as problem
//! files under `problems/`.

use crate::expr::parse;
use crate::problem::{KernelPiece, Nonlinearity, ProblemSpec};

/// Right endpoint used for the bundled linear problem. Chosen so the
/// contraction constant c = z2 (3 + z2) / 3 = 0.9375 stays below 1 while the
/// per-piece Theorem-6 constant C_1 exceeds 1, which exercises the
/// a-priori-only reporting path.
pub const LINEAR_DEFAULT_Z2: f64 = 0.75;

/// Right endpoint for the bundled cubic problem; with the bundled Lipschitz
/// constant the contraction constant is ≈ 0.77.
pub const CUBIC_DEFAULT_Z2: f64 = 0.7;

/// Lipschitz constant shipped with the cubic problem: G(x) = x³ on solution
/// values bounded by B = 2 · 0.7³ = 0.686 has 3B² ≈ 1.412 ≤ 1.5.
pub const CUBIC_LIPSCHITZ: f64 = 1.5;

pub const LINEAR_FORCING_LOWER: &str =
    "(-2+mu)*v^2 - 26/81*(-2+mu)*(-1+v)*v^3 - 1/324*(-2+mu)*v^3*(4+3*v)";
pub const LINEAR_FORCING_UPPER: &str =
    "(2-mu)*v^2 + 26/81*(-2+mu)*(-1+v)*v^3 + 1/324*(-2+mu)*v^3*(4+3*v)";
pub const LINEAR_EXACT_LOWER: &str = "(mu-2)*v^2";
pub const LINEAR_EXACT_UPPER: &str = "(2-mu)*v^2";

pub const CUBIC_FORCING_LOWER: &str =
    "mu*v^3 - 1023*mu^3*(v-1)*v^10/10737418240 + 1073733109*mu^3*v^11/118111600640";
pub const CUBIC_FORCING_UPPER: &str =
    "(2-mu)*v^3 - 1023*(2-mu)^3*(v-1)*v^10/10737418240 + 1073733109*(2-mu)^3*v^11/118111600640";
pub const CUBIC_EXACT_LOWER: &str = "mu*v^3";
pub const CUBIC_EXACT_UPPER: &str = "(2-mu)*v^3";

/// Linear problem: kernels 1+v−r and v−1 split along θ₁(v) = v/3 on [0, z2],
/// G = identity, exact solution ((μ−2)v², (2−μ)v²).
pub fn linear_example(z2: f64) -> ProblemSpec {
    ProblemSpec::new(
        0.0,
        z2,
        vec![
            KernelPiece {
                kernel: parse("1+v-r").unwrap(),
                upper_curve: parse("v/3").unwrap(),
            },
            KernelPiece { kernel: parse("v-1").unwrap(), upper_curve: parse("v").unwrap() },
        ],
        parse(LINEAR_FORCING_LOWER).unwrap(),
        parse(LINEAR_FORCING_UPPER).unwrap(),
        Nonlinearity::Identity,
        1.0,
        Some((parse(LINEAR_EXACT_LOWER).unwrap(), parse(LINEAR_EXACT_UPPER).unwrap())),
    )
    .expect("built-in linear problem is well-formed")
}

/// Cubic problem: kernels v, v−1 and r−v split along θ₁(v) = v/8,
/// θ₂(v) = 2v/8 on [0, z2], G(x) = x³, exact solution (μv³, (2−μ)v³).
pub fn cubic_example(z2: f64) -> ProblemSpec {
    ProblemSpec::new(
        0.0,
        z2,
        vec![
            KernelPiece { kernel: parse("v").unwrap(), upper_curve: parse("v/8").unwrap() },
            KernelPiece { kernel: parse("v-1").unwrap(), upper_curve: parse("2*v/8").unwrap() },
            KernelPiece { kernel: parse("r-v").unwrap(), upper_curve: parse("v").unwrap() },
        ],
        parse(CUBIC_FORCING_LOWER).unwrap(),
        parse(CUBIC_FORCING_UPPER).unwrap(),
        Nonlinearity::Power(3),
        CUBIC_LIPSCHITZ,
        Some((parse(CUBIC_EXACT_LOWER).unwrap(), parse(CUBIC_EXACT_UPPER).unwrap())),
    )
    .expect("built-in cubic problem is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::SpaceGrid;
    use crate::fuzzy::MuGrid;
    use crate::problem::{contraction_constant, validate};

    #[test]
    fn linear_example_contracts_on_default_interval() {
        let spec = linear_example(LINEAR_DEFAULT_Z2);
        let grid = SpaceGrid::new(0.0, LINEAR_DEFAULT_Z2, 128).unwrap();
        let c = contraction_constant(&spec, &grid).unwrap();
        // closed form: max over v of (1 + z2) v / 3 + 2 v / 3 = z2 (3 + z2) / 3
        assert!((c - 0.9375).abs() < 1e-12);
    }

    #[test]
    fn linear_example_contraction_matches_brute_force() {
        // independent maximization on a dense grid, closures instead of the
        // expression machinery
        let spec = linear_example(LINEAR_DEFAULT_Z2);
        let grid = SpaceGrid::new(0.0, LINEAR_DEFAULT_Z2, 10_000).unwrap();
        let c = contraction_constant(&spec, &grid).unwrap();

        let k1 = |r: f64, v: f64| 1.0 + v - r;
        let k2 = |_r: f64, v: f64| v - 1.0;
        let n = 10_000usize;
        let h = LINEAR_DEFAULT_Z2 / n as f64;
        let mut m1 = 0.0f64;
        let mut m2 = 0.0f64;
        for j in 0..=n {
            let v = j as f64 * h;
            for i in 0..=j {
                let r = i as f64 * h;
                m1 = m1.max(k1(r, v).abs());
                m2 = m2.max(k2(r, v).abs());
            }
        }
        let mut expected = 0.0f64;
        for j in 0..=n {
            let v = j as f64 * h;
            expected = expected.max(m1 * (v / 3.0) + m2 * (v - v / 3.0));
        }
        assert!((c - expected).abs() < 1e-12, "c = {c}, brute force = {expected}");
    }

    #[test]
    fn linear_example_validates_cleanly() {
        let spec = linear_example(LINEAR_DEFAULT_Z2);
        let grid = SpaceGrid::new(0.0, LINEAR_DEFAULT_Z2, 128).unwrap();
        let report = validate(&spec, &grid, &MuGrid::uniform(11).unwrap());
        assert!(report.passed(), "{report:?}");
        // the v−1 piece changes sign on the wedge
        assert!(report.sign_warnings.iter().any(|w| w.piece == 2));
        // C_1 = 1.75 * 0.75 exceeds 1 even though c < 1
        assert!(report.c_t[0] >= 1.0);
    }

    #[test]
    fn cubic_example_validates_cleanly() {
        let spec = cubic_example(CUBIC_DEFAULT_Z2);
        let grid = SpaceGrid::new(0.0, CUBIC_DEFAULT_Z2, 128).unwrap();
        let report = validate(&spec, &grid, &MuGrid::uniform(11).unwrap());
        assert!(report.passed(), "{report:?}");
        assert!(report.c < 1.0);
        // the r−v piece is non-positive on the wedge
        assert!(report.sign_warnings.iter().any(|w| w.piece == 3));
    }

    #[test]
    fn kernel_maxima_match_inspection() {
        let spec = linear_example(1.0);
        let grid = SpaceGrid::new(0.0, 1.0, 200).unwrap();
        // K1 = 1+v−r maximized at (r, v) = (0, 1); K2 = v−1 at v = 0
        assert!((crate::problem::kernel_max(&spec, 0, &grid).unwrap() - 2.0).abs() < 1e-12);
        assert!((crate::problem::kernel_max(&spec, 1, &grid).unwrap() - 1.0).abs() < 1e-12);
    }
}
