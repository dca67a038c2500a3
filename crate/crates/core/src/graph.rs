//! Distance-dependent communication graph and its spectral connectivity.
//!
//! Agents within range `R` of each other share a link weighted by
//! `exp(-sigma * r / R)`. The Laplacian `D - A` of that graph drives both the
//! consensus controller and the connectivity monitor, whose measure is the
//! second-smallest Laplacian eigenvalue (the algebraic connectivity).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::Vec2;

pub const DEFAULT_CONNECTIVITY_TOL: f64 = 1e-6;

/// Exponential communication model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommModel {
    /// Communication range `R` in meters.
    pub range: f64,
    /// Dimensionless decay rate `sigma`.
    pub sigma: f64,
}

impl CommModel {
    pub fn new(range: f64, sigma: f64) -> Result<Self> {
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::domain(format!("communication range must be > 0, got {range}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("decay rate sigma must be > 0, got {sigma}")));
        }
        Ok(Self { range, sigma })
    }

    /// Link weight at distance `r`. A pair exactly at range is disconnected.
    pub fn weight(&self, r: f64) -> Result<f64> {
        adjacency_weight(r, self)
    }
}

pub fn adjacency_weight(distance: f64, comm: &CommModel) -> Result<f64> {
    if distance.is_nan() || distance < 0.0 {
        return Err(Error::domain(format!("distance must be >= 0, got {distance}")));
    }
    if distance < comm.range {
        Ok((-comm.sigma * distance / comm.range).exp())
    } else {
        Ok(0.0)
    }
}

/// Indices `j != i` with `|p_i - p_j| < R`, in ascending order.
pub fn neighbors(i: usize, positions: &[Vec2], comm: &CommModel) -> Result<Vec<usize>> {
    if i >= positions.len() {
        return Err(Error::domain(format!(
            "node index {i} out of range for {} positions",
            positions.len()
        )));
    }
    let pi = positions[i];
    Ok(positions
        .iter()
        .enumerate()
        .filter(|&(j, pj)| j != i && (pi - pj).norm() < comm.range)
        .map(|(j, _)| j)
        .collect())
}

/// Symmetric, zero-diagonal matrix of link weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAdjacency {
    weights: DMatrix<f64>,
}

impl WeightedAdjacency {
    /// Wraps a weight matrix after checking symmetry, zero diagonal and range.
    pub fn from_matrix(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if n != weights.ncols() {
            return Err(Error::domain("adjacency must be square"));
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::domain(format!("adjacency diagonal ({i},{i}) must be zero")));
            }
            for j in 0..n {
                let w = weights[(i, j)];
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::domain(format!("adjacency weight ({i},{j}) = {w} outside [0,1]")));
                }
                if w != weights[(j, i)] {
                    return Err(Error::NotSymmetric {
                        asymmetry: (w - weights[(j, i)]).abs(),
                    });
                }
            }
        }
        Ok(Self { weights })
    }

    pub fn order(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Weighted degree of node `i`.
    pub fn degree(&self, i: usize) -> f64 {
        self.weights.row(i).sum()
    }
}

pub fn build_adjacency(positions: &[Vec2], comm: &CommModel) -> Result<WeightedAdjacency> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::domain(format!("need at least 2 positions, got {n}")));
    }
    let mut weights = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = adjacency_weight((positions[i] - positions[j]).norm(), comm)?;
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
    }
    Ok(WeightedAdjacency { weights })
}

/// Graph Laplacian `L = D - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    entries: DMatrix<f64>,
}

impl LaplacianMatrix {
    /// Wraps raw entries without checking Laplacian structure; the spectral
    /// routines still reject asymmetric input.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::domain("Laplacian must be square"));
        }
        Ok(Self { entries })
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Largest absolute row sum, which is zero for a true Laplacian.
    pub fn max_row_sum(&self) -> f64 {
        self.entries.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max)
    }
}

pub fn laplacian(adj: &WeightedAdjacency) -> LaplacianMatrix {
    let n = adj.order();
    let mut entries = -adj.matrix().clone();
    for i in 0..n {
        entries[(i, i)] = adj.degree(i);
    }
    LaplacianMatrix { entries }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Algebraic connectivity, `eigenvalues[1]`.
    pub fiedler_value: f64,
    /// Unit eigenvector of the algebraic connectivity, sign fixed so the first
    /// non-negligible component is positive.
    pub fiedler_vector: Vec<f64>,
}

pub fn spectral_summary(lap: &LaplacianMatrix) -> Result<SpectralSummary> {
    if lap.order() < 2 {
        return Err(Error::domain("spectral summary needs at least 2 nodes"));
    }
    let eig = symmetric_eigen(lap.matrix())?;
    let eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut fiedler_vector: Vec<f64> = eig.eigenvectors.column(1).iter().copied().collect();
    if let Some(first) = fiedler_vector.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            fiedler_vector.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(SpectralSummary {
        fiedler_value: eigenvalues[1],
        eigenvalues,
        fiedler_vector,
    })
}

/// Algebraic connectivity of the graph.
pub fn algebraic_connectivity(lap: &LaplacianMatrix) -> Result<f64> {
    spectral_summary(lap).map(|s| s.fiedler_value)
}

pub fn is_connected(lap: &LaplacianMatrix, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("connectivity tolerance must be > 0, got {tol}")));
    }
    Ok(algebraic_connectivity(lap)? > tol)
}
