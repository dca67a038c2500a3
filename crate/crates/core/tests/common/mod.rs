#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

pub fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "[{}] criterion {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    match n {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => (0..n)
            .map(|j| {
                let minor = m.clone().remove_row(0).remove_column(j);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[(0, j)] * cofactor_det(&minor)
            })
            .sum(),
    }
}

/// Characteristic polynomial `det(m - x I)`.
pub fn char_poly(m: &DMatrix<f64>, x: f64) -> f64 {
    let n = m.nrows();
    cofactor_det(&(m - DMatrix::identity(n, n) * x))
}

/// Real roots of the characteristic polynomial of a symmetric matrix with
/// simple eigenvalues, found by scanning for sign changes inside the
/// Gershgorin interval and bisecting. The scan is refined until all roots
/// are separated.
pub fn brute_force_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut roots = Vec::new();
    for cells in [2_000, 20_000, 200_000] {
        roots = scan_roots(m, cells);
        if roots.len() == m.nrows() {
            break;
        }
    }
    roots
}

fn scan_roots(m: &DMatrix<f64>, cells: usize) -> Vec<f64> {
    let n = m.nrows();
    let radius = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let (lo, hi) = (-radius - 1e-3, radius + 1e-3);
    let h = (hi - lo) / cells as f64;
    let mut roots = Vec::new();
    let mut a = lo;
    let mut fa = char_poly(m, a);
    for k in 1..=cells {
        let b = lo + k as f64 * h;
        let fb = char_poly(m, b);
        if fb == 0.0 {
            roots.push(b);
        } else if fa != 0.0 && fa.signum() != fb.signum() {
            let (mut l, mut r, mut fl) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (l + r);
                let fm = char_poly(m, mid);
                if fm == 0.0 {
                    l = mid;
                    r = mid;
                    break;
                }
                if fm.signum() == fl.signum() {
                    l = mid;
                    fl = fm;
                } else {
                    r = mid;
                }
            }
            roots.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    roots
}
