use crate::error::{Error, Result};

/// Uniform 1D lattice on the truncated domain `[x_min, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_nodes: usize,
    pub h: f64,
    /// Ω = (a, b); both endpoints are grid nodes.
    pub omega: (f64, f64),
    /// Width ε of the gap between Ω and W₂.
    pub eps_gap: f64,
}

impl GridSpec {
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.x(i)).collect()
    }

    /// Number of cells spanning Ω.
    pub fn n_omega(&self) -> usize {
        ((self.omega.1 - self.omega.0) / self.h).round() as usize
    }
}

/// Index sets of the lattice regions. `interior`, `boundary`, `gap`, `w2` and
/// `far` partition the nodes; `w1` is a subset of the exterior.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionIndex {
    /// Nodes strictly inside Ω.
    pub interior: Vec<usize>,
    /// The two nodes at ∂Ω.
    pub boundary: Vec<usize>,
    /// Exterior nodes within distance ε of Ω (excluding ∂Ω itself).
    pub gap: Vec<usize>,
    /// Measurement nodes.
    pub w2: Vec<usize>,
    /// Source-support nodes.
    pub w1: Vec<usize>,
    /// The truncation endpoints `x_min`, `x_max`.
    pub far: Vec<usize>,
    /// Open coordinate intervals making up W₁.
    pub w1_intervals: Vec<(f64, f64)>,
    /// Open coordinate intervals making up W₂.
    pub w2_intervals: Vec<(f64, f64)>,
}

impl RegionIndex {
    /// Every node that is not in `interior`.
    pub fn exterior(&self, n_nodes: usize) -> Vec<usize> {
        let mut mask = vec![true; n_nodes];
        for &i in &self.interior {
            mask[i] = false;
        }
        (0..n_nodes).filter(|&i| mask[i]).collect()
    }
}

const ALIGN_TOL: f64 = 1e-9;

fn as_whole_cells(length: f64, h: f64, what: &str) -> Result<usize> {
    let cells = length / h;
    let rounded = cells.round();
    if (cells - rounded).abs() > ALIGN_TOL * cells.max(1.0) || rounded < 0.0 {
        return Err(Error::Grid(format!(
            "{what} of length {length} is not a whole number of cells of width {h} \
             ({cells} cells); choose a resolution that puts the endpoints of Ω on nodes"
        )));
    }
    Ok(rounded as usize)
}

/// Builds the lattice with `n_omega` cells across Ω = `omega` and a gap of
/// `eps_cells` cells between Ω and W₂ (W₁ = W₂).
pub fn build_grid(
    x_min: f64,
    x_max: f64,
    omega: (f64, f64),
    n_omega: usize,
    eps_cells: usize,
) -> Result<(GridSpec, RegionIndex)> {
    let (a, b) = omega;
    if !(x_min < a && a < b && b < x_max) {
        return Err(Error::Grid(format!(
            "need x_min < a < b < x_max, got {x_min} < {a} < {b} < {x_max}"
        )));
    }
    if n_omega < 2 {
        return Err(Error::Grid(format!(
            "Ω needs at least 2 cells, got {n_omega}"
        )));
    }
    if eps_cells == 0 {
        return Err(Error::Grid(
            "the gap between Ω and W₂ must be at least one cell".into(),
        ));
    }
    let h_omega = (b - a) / n_omega as f64;
    let left = as_whole_cells(a - x_min, h_omega, "left exterior")?;
    let right = as_whole_cells(x_max - b, h_omega, "right exterior")?;
    let n_nodes = left + n_omega + right + 1;
    let h = (x_max - x_min) / (n_nodes - 1) as f64;
    let ia = left;
    let ib = left + n_omega;
    if left < eps_cells + 2 || right < eps_cells + 2 {
        return Err(Error::Grid(format!(
            "exterior too short for a {eps_cells}-cell gap plus a non-empty W₂"
        )));
    }
    let last = n_nodes - 1;

    let interior: Vec<usize> = (ia + 1..ib).collect();
    let boundary = vec![ia, ib];
    let gap: Vec<usize> = (ia - eps_cells..ia).chain(ib + 1..=ib + eps_cells).collect();
    let w2: Vec<usize> = (1..ia - eps_cells).chain(ib + eps_cells + 1..last).collect();
    let far = vec![0, last];
    let eps_gap = eps_cells as f64 * h;
    let grid = GridSpec {
        x_min,
        x_max,
        n_nodes,
        h,
        omega,
        eps_gap,
    };
    let w2_intervals = vec![(x_min, grid.x(ia - eps_cells)), (grid.x(ib + eps_cells), x_max)];
    let regions = RegionIndex {
        interior,
        boundary,
        gap,
        w1: w2.clone(),
        w2,
        far,
        w1_intervals: w2_intervals.clone(),
        w2_intervals,
    };
    Ok((grid, regions))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_grid_spacing_and_alignment() {
        let (grid, regions) = build_grid(-3.0, 3.0, (-1.0, 1.0), 128, 1).unwrap();
        assert!((grid.h - 2.0 / 128.0).abs() < 1e-15);
        assert_eq!(grid.n_nodes, 385);
        assert_eq!(grid.n_omega(), 128);
        assert_eq!(grid.x(regions.boundary[0]), -1.0);
        assert_eq!(grid.x(regions.boundary[1]), 1.0);
        assert_eq!(regions.interior.len(), 127);
        // 64 nodes per unit length
        assert!((1.0 / grid.h - 64.0).abs() < 1e-12);
    }

    #[test]
    fn one_cell_gap_holds_the_neighbours_of_the_boundary() {
        let (grid, regions) = build_grid(-3.0, 3.0, (-1.0, 1.0), 32, 1).unwrap();
        let xs: Vec<f64> = regions.gap.iter().map(|&i| grid.x(i)).collect();
        assert_eq!(xs.len(), 2);
        assert!((xs[0] + 1.0 + grid.h).abs() < 1e-12);
        assert!((xs[1] - 1.0 - grid.h).abs() < 1e-12);
        assert!((grid.eps_gap - grid.h).abs() < 1e-15);
        assert_eq!(regions.w1, regions.w2);
        for &i in &regions.w2 {
            let x = grid.x(i).abs();
            assert!(x > 1.0 + grid.eps_gap - 1e-12 && x < 3.0);
        }
    }

    #[test]
    fn regions_partition_all_nodes() {
        let (grid, r) = build_grid(-3.0, 3.0, (-1.0, 1.0), 16, 1).unwrap();
        let mut count = vec![0u32; grid.n_nodes];
        for set in [&r.interior, &r.boundary, &r.gap, &r.w2, &r.far] {
            for &i in set {
                count[i] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 1), "{count:?}");
        let ext = r.exterior(grid.n_nodes);
        assert!(r.interior.iter().all(|i| !ext.contains(i)));
        assert!(r.w1.iter().all(|i| ext.contains(i)));
    }

    #[test]
    fn misaligned_resolution_is_rejected() {
        let err = build_grid(-3.0, 3.0, (-1.0, 0.5), 4, 1).unwrap_err();
        assert!(err.to_string().contains("on nodes"), "{err}");
    }

    #[test]
    fn zero_gap_is_rejected() {
        assert!(build_grid(-3.0, 3.0, (-1.0, 1.0), 16, 0).is_err());
    }
}
