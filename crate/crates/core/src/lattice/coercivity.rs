use super::grid::RegionIndex;
use super::operator::FracLapOp;

/// Outcome of the discrete sufficient condition for unique solvability:
/// positive diagonal `A_jj + q_j > 0` and `q_min + min_i Σ_{j∈Ω} A_ij > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityReport {
    pub diag_ok: bool,
    /// `q_min + min_i Σ_{j∈Ω} A_ij`; positive when the row-sum condition holds.
    pub rowsum_margin: f64,
    /// Lower bound on `q_min` implied by the row-sum condition.
    pub q_threshold: f64,
    pub min_row_sum: f64,
    pub q_min: f64,
}

impl CoercivityReport {
    pub fn passed(&self) -> bool {
        self.diag_ok && self.rowsum_margin > 0.0
    }
}

/// Minimum over interior rows of the interior-restricted row sums of `A`.
pub fn min_interior_row_sum(op: &FracLapOp, regions: &RegionIndex) -> f64 {
    let interior = &regions.interior;
    interior
        .iter()
        .map(|&i| interior.iter().map(|&j| op.entry(i, j)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

pub fn check_coercivity(op: &FracLapOp, regions: &RegionIndex, q: &[f64]) -> CoercivityReport {
    let diagonal = op.scale * op.weights[0];
    let diag_ok = q.iter().all(|&qj| diagonal + qj > 0.0);
    let q_min = q.iter().copied().fold(f64::INFINITY, f64::min);
    let min_row_sum = min_interior_row_sum(op, regions);
    CoercivityReport {
        diag_ok,
        rowsum_margin: q_min + min_row_sum,
        q_threshold: -min_row_sum,
        min_row_sum,
        q_min,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{assemble_operator, build_grid};
    use nalgebra::SymmetricEigen;

    #[test]
    fn zero_potential_passes() {
        let (grid, regions) = build_grid(-3.0, 3.0, (-1.0, 1.0), 32, 1).unwrap();
        let op = assemble_operator(&grid, 0.4).unwrap();
        let q = vec![0.0; regions.interior.len()];
        let report = check_coercivity(&op, &regions, &q);
        assert!(report.passed());
        assert!(report.min_row_sum > 0.0);
        assert!(report.q_threshold < 0.0);
    }

    #[test]
    fn potential_below_threshold_fails() {
        let (grid, regions) = build_grid(-3.0, 3.0, (-1.0, 1.0), 32, 1).unwrap();
        let op = assemble_operator(&grid, 0.4).unwrap();
        let base = check_coercivity(&op, &regions, &vec![0.0; regions.interior.len()]);
        let q = vec![base.q_threshold - 1.0; regions.interior.len()];
        let report = check_coercivity(&op, &regions, &q);
        assert!(!report.passed());
        assert!(report.rowsum_margin < 0.0);
    }

    #[test]
    fn passing_condition_implies_positive_definite_system() {
        for (n, s) in [(16, 0.2), (64, 0.4), (128, 0.8)] {
            let (grid, regions) = build_grid(-3.0, 3.0, (-1.0, 1.0), n, 1).unwrap();
            let op = assemble_operator(&grid, s).unwrap();
            let m = regions.interior.len();
            let thr = check_coercivity(&op, &regions, &vec![0.0; m]).q_threshold;
            // a non-constant potential just above the threshold
            let q: Vec<f64> = (0..m)
                .map(|j| thr + 1e-3 + 0.5 * (j as f64 / m as f64))
                .collect();
            let report = check_coercivity(&op, &regions, &q);
            assert!(report.passed());
            let mut a = op.submatrix(&regions.interior, &regions.interior);
            for (j, &qj) in q.iter().enumerate() {
                a[(j, j)] += qj;
            }
            let eig = SymmetricEigen::new(a);
            let lambda_min = eig.eigenvalues.min();
            assert!(lambda_min > 0.0, "n={n} s={s}: {lambda_min}");
        }
    }
}
