//! Numerically checkable companions of the controller's convergence argument:
//! the closed-form special solution of the scalar fractional double
//! integrator, the residual functions and their bounds, the odd-power
//! inequalities, the split Laplacian, formation errors and the Lyapunov
//! function of the pairwise system.

use nalgebra::{DMatrix, DVector};

use crate::controller::{spow, ControllerParams, FormationSpec};
use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;
use crate::ode::{integrate, spow_scalar};
use crate::vehicle::AgentState;
use crate::Vec2;

/// Parameters of the closed-form solution `x1 = (x1(0)^-tau + tau t)^(-1/tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialSolutionParams {
    x1_0: f64,
    tau: f64,
    k1: f64,
    k2: f64,
}

impl SpecialSolutionParams {
    /// Validates `tau` in `(-1/2, 0)`, `x1_0 > 0`, and the gain relation `1 + tau = -k1 + k2`.
    pub fn new(x1_0: f64, tau: f64, k1: f64, k2: f64) -> Result<Self> {
        if !(tau > -0.5 && tau < 0.0) {
            return Err(Error::domain(format!(
                "special solution needs tau in (-1/2, 0), got {tau}"
            )));
        }
        if !(x1_0 > 0.0 && x1_0.is_finite()) {
            return Err(Error::domain(format!("special solution needs x1(0) > 0, got {x1_0}")));
        }
        let mismatch = (1.0 + tau) - (-k1 + k2);
        if mismatch.abs() > 1e-9 {
            return Err(Error::domain(format!(
                "gains violate 1 + tau = -k1 + k2 (off by {mismatch:.3e})"
            )));
        }
        Ok(Self { x1_0, tau, k1, k2 })
    }

    /// Picks `k2` from the gain relation for the given `k1`.
    pub fn with_k1(x1_0: f64, tau: f64, k1: f64) -> Result<Self> {
        Self::new(x1_0, tau, k1, gain_relation_k2(tau, k1))
    }

    pub fn x1_0(&self) -> f64 {
        self.x1_0
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn k1(&self) -> f64 {
        self.k1
    }
    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn x2_0(&self) -> f64 {
        -self.x1_0.powf(1.0 + self.tau)
    }

    pub fn touchdown(&self) -> f64 {
        -1.0 / (self.tau * self.x1_0.powf(self.tau))
    }
}

/// Closed-form `(x1, x2)` at time `t`, defined on `[0, touchdown]`.
pub fn special_solution(p: &SpecialSolutionParams, t: f64) -> Result<(f64, f64)> {
    let touchdown = p.touchdown();
    if !(t >= 0.0) || t > touchdown * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "special solution defined on [0, {touchdown}], got t = {t}"
        )));
    }
    let tau = p.tau;
    let base = (p.x1_0.powf(-tau) + tau * t).max(0.0);
    Ok((base.powf(-1.0 / tau), -base.powf(-(1.0 + tau) / tau)))
}

pub fn special_initial_velocity(x1_0: f64, tau: f64) -> Result<f64> {
    if !(x1_0 > 0.0) {
        return Err(Error::domain(format!("x1(0) must be > 0, got {x1_0}")));
    }
    Ok(-x1_0.powf(1.0 + tau))
}

/// `k2 = 1 + tau + k1`, evaluating `(-1)^(-(1+2tau)/(1+tau))` as `-1`.
pub fn gain_relation_k2(tau: f64, k1: f64) -> f64 {
    1.0 + tau + k1
}

/// Whether `(1 + 2 tau) / (1 + tau)` is a ratio of odd integers (denominators up to 999),
/// i.e. whether reading `(-1)^exponent` as `-1` is exact rather than a convention.
pub fn is_odd_ratio_exponent(tau: f64) -> bool {
    let exponent = (1.0 + 2.0 * tau) / (1.0 + tau);
    OddRatio::approximate(exponent, 999).is_some()
}

pub fn touchdown_time(x1_0: f64, tau: f64) -> Result<f64> {
    if !(tau < 0.0) {
        return Err(Error::domain(format!("finite touchdown needs tau < 0, got {tau}")));
    }
    if !(x1_0 > 0.0) {
        return Err(Error::domain(format!("x1(0) must be > 0, got {x1_0}")));
    }
    Ok(-1.0 / (tau * x1_0.powf(tau)))
}

/// Right-hand side of `x1' = x2, x2' = -k1 spow(x1, 1+2tau) - k2 spow(x2, (1+2tau)/(1+tau))`.
pub fn fractional_double_integrator(k1: f64, k2: f64, tau: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    let a1 = 1.0 + 2.0 * tau;
    let a2 = a1 / (1.0 + tau);
    move |_, x| [x[1], -k1 * spow_scalar(x[0], a1) - k2 * spow_scalar(x[1], a2)]
}

/// RK4 integration of the scalar system against its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialComparison {
    pub dt: f64,
    pub t_end: f64,
    /// Largest `max(|dx1|, |dx2|)` over samples in `[0, t_end]`.
    pub max_deviation: f64,
    pub touchdown: f64,
    /// Integrated state at the touchdown time.
    pub state_at_touchdown: (f64, f64),
    pub samples: Vec<(f64, [f64; 2], (f64, f64))>,
}

pub fn compare_special_solution(p: &SpecialSolutionParams, dt: f64, t_end: f64) -> Result<SpecialComparison> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("time step must be > 0, got {dt}")));
    }
    let touchdown = p.touchdown();
    let t_end = t_end.min(touchdown);
    let steps = (touchdown / dt + 1e-9).floor() as usize;
    let traj = integrate(
        0.0,
        [p.x1_0, p.x2_0()],
        dt,
        steps,
        fractional_double_integrator(p.k1, p.k2, p.tau),
    );
    let mut max_deviation = 0.0f64;
    let mut samples = Vec::new();
    for &(t, x) in traj.iter().filter(|(t, _)| *t <= t_end + 1e-12) {
        let exact = special_solution(p, t.min(touchdown))?;
        max_deviation = max_deviation.max((x[0] - exact.0).abs()).max((x[1] - exact.1).abs());
        samples.push((t, x, exact));
    }
    let last = traj.last().map(|(_, x)| (x[0], x[1])).unwrap_or((p.x1_0, p.x2_0()));
    Ok(SpecialComparison {
        dt,
        t_end,
        max_deviation,
        touchdown,
        state_at_touchdown: last,
        samples,
    })
}

/// Residual between the signed power of a difference and the difference of signed powers,
/// normalized by the target-relative terms.
pub fn residual_f(pi: Vec2, pj: Vec2, pt: Vec2, alpha: f64) -> Result<f64> {
    let a = spow(pi - pt, alpha);
    let b = spow(pj - pt, alpha);
    let denom = (a + b).norm();
    if !(denom > 0.0) {
        return Err(Error::Degenerate(
            "target-relative signed powers cancel (zero denominator)".into(),
        ));
    }
    Ok((spow(pi - pj, alpha) - a + b).norm() / denom)
}

/// One-dimensional reduction of [`residual_f`] in terms of the distance ratio `r`.
pub fn residual_fbar(r: f64, alpha: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("ratio r must be > 0, got {r}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let ra = r.powf(alpha);
    Ok(if r < 1.0 {
        ((1.0 - r).powf(alpha) - (1.0 - ra)) / (1.0 + ra)
    } else if r == 1.0 {
        0.0
    } else {
        ((r - 1.0).powf(alpha) - (ra - 1.0)) / (1.0 + ra)
    })
}

/// Upper bound `2^(1-alpha) - 1` on [`residual_fbar`].
pub fn residual_fbar_bound(alpha: f64) -> f64 {
    2f64.powf(1.0 - alpha) - 1.0
}

/// Power `alpha = 1 - log2(1 + epsilon)` at which the residual bound equals `epsilon`.
pub fn alpha_for_epsilon(epsilon: f64) -> f64 {
    1.0 - (epsilon + 1.0).log2()
}

/// A positive ratio `num/den` of odd integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OddRatio {
    num: u64,
    den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl OddRatio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::domain("odd ratio needs nonzero terms"));
        }
        let g = gcd(num, den);
        let (num, den) = (num / g, den / g);
        if num % 2 == 0 || den % 2 == 0 {
            return Err(Error::domain(format!("{num}/{den} is not a ratio of odd integers")));
        }
        Ok(Self { num, den })
    }

    /// Finds an odd ratio equal to `x` within `1e-12` with denominator at most `max_den`.
    pub fn approximate(x: f64, max_den: u64) -> Option<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return None;
        }
        (1..=max_den).step_by(2).find_map(|den| {
            let num = (x * den as f64).round();
            if num >= 1.0 && (num / den as f64 - x).abs() <= 1e-12 {
                OddRatio::new(num as u64, den).ok()
            } else {
                None
            }
        })
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Checks `|a+b|^m <= 2^(m-1) |a^m + b^m|` and `|a-b|^m <= 2^(m-1) |a^m - b^m|`,
/// with `x^m` the signed power. Requires `m > 1`.
pub fn lemma1_holds(a: f64, b: f64, m: OddRatio) -> Result<bool> {
    let m = m.value();
    if !(m > 1.0) {
        return Err(Error::domain(format!("exponent must exceed 1, got {m}")));
    }
    let scale = 2f64.powf(m - 1.0);
    let holds = |lhs: f64, rhs: f64| lhs <= rhs * (1.0 + 1e-12) + 1e-300;
    let sum = holds(
        (a + b).abs().powf(m),
        scale * (spow_scalar(a, m) + spow_scalar(b, m)).abs(),
    );
    let diff = holds(
        (a - b).abs().powf(m),
        scale * (spow_scalar(a, m) - spow_scalar(b, m)).abs(),
    );
    Ok(sum && diff)
}

/// The `(n+1)`-node Laplacian partitioned into the UAV block and the target column.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitLaplacian {
    /// Leading `n x n` block `L_n + B_n`.
    pub ln_plus_bn: DMatrix<f64>,
    /// UAV-to-target weights (the negated last column without its diagonal).
    pub b_n: DVector<f64>,
    pub target_degree: f64,
}

impl SplitLaplacian {
    pub fn reassemble(&self) -> DMatrix<f64> {
        let n = self.b_n.len();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&self.ln_plus_bn);
        for i in 0..n {
            m[(i, n)] = -self.b_n[i];
            m[(n, i)] = -self.b_n[i];
        }
        m[(n, n)] = self.target_degree;
        m
    }
}

/// Splits off the last node (the target). Requires order >= 2.
pub fn split_laplacian(lap: &LaplacianMatrix) -> Result<SplitLaplacian> {
    let order = lap.order();
    if order < 2 {
        return Err(Error::domain("split needs at least one UAV and the target"));
    }
    let n = order - 1;
    let l = lap.matrix();
    let ln_plus_bn = l.view((0, 0), (n, n)).into_owned();
    let b_n = -l.view((0, n), (n, 1)).column(0).into_owned();
    let split = SplitLaplacian {
        ln_plus_bn,
        b_n,
        target_degree: l[(n, n)],
    };
    let tol = 1e-12 * l.amax().max(1.0) * order as f64;
    let row_sums = &split.ln_plus_bn * DVector::from_element(n, 1.0);
    let mismatch = (row_sums - &split.b_n).amax();
    if mismatch > tol {
        return Err(Error::Internal(format!(
            "(L_n + B_n) 1 differs from b_n by {mismatch:.3e}"
        )));
    }
    let reassembly = (split.reassemble() - l).amax();
    if reassembly > tol {
        return Err(Error::Internal(format!(
            "split does not reassemble (off by {reassembly:.3e})"
        )));
    }
    Ok(split)
}

/// Spectral norm of `(L_n + B_n)^-1` and whether it meets the unit bound that holds
/// for the complete unit-weight graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseNormReport {
    pub inverse_norm: f64,
    pub smallest_eigenvalue: f64,
    pub complete_unit_graph: bool,
    /// `inverse_norm <= 1 + 1e-9`.
    pub within_unit_bound: bool,
}

impl InverseNormReport {
    /// The asserted check: the unit bound must hold on the complete unit-weight graph;
    /// other graphs are only reported.
    pub fn passes(&self) -> bool {
        !self.complete_unit_graph || self.within_unit_bound
    }
}

pub fn residual_norm_bound_check(lap: &LaplacianMatrix) -> Result<InverseNormReport> {
    let split = split_laplacian(lap)?;
    let eig = symmetric_eigen(&split.ln_plus_bn)?;
    let smallest = eig.eigenvalues[0];
    if !(smallest > 1e-12) {
        return Err(Error::Disconnected(format!(
            "L_n + B_n is singular (smallest eigenvalue {smallest:.3e})"
        )));
    }
    // Symmetric positive definite: the 2-norm of the inverse is 1 / lambda_min.
    let inverse_norm = 1.0 / smallest;
    let order = lap.order();
    let l = lap.matrix();
    let complete_unit_graph = (0..order).all(|i| (0..order).all(|j| i == j || l[(i, j)] == -1.0));
    Ok(InverseNormReport {
        inverse_norm,
        smallest_eigenvalue: smallest,
        complete_unit_graph,
        within_unit_bound: inverse_norm <= 1.0 + 1e-9,
    })
}

/// Stacked relative errors of all UAVs with respect to their slots around the target.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorVector {
    /// `(p_i - P_i) - p_t`, two entries per UAV.
    pub e_p: Vec<f64>,
    /// `v_i - v_t`, two entries per UAV.
    pub e_v: Vec<f64>,
}

impl ErrorVector {
    pub fn position_norm(&self) -> f64 {
        self.e_p.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn velocity_norm(&self) -> f64 {
        self.e_v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Position error norm of UAV `i`.
    pub fn agent_position_norm(&self, i: usize) -> f64 {
        self.e_p[2 * i].hypot(self.e_p[2 * i + 1])
    }

    pub fn agent_count(&self) -> usize {
        self.e_p.len() / 2
    }
}

pub fn formation_error(states: &[AgentState], target: &AgentState, formation: &FormationSpec) -> Result<ErrorVector> {
    if states.len() != formation.len() {
        return Err(Error::domain(format!(
            "{} UAV states but {} formation slots",
            states.len(),
            formation.len()
        )));
    }
    let vt = target.velocity();
    let mut e_p = Vec::with_capacity(2 * states.len());
    let mut e_v = Vec::with_capacity(2 * states.len());
    for (i, s) in states.iter().enumerate() {
        let ep = s.position - formation.offset(i) - target.position;
        let ev = s.velocity() - vt;
        e_p.extend([ep.x, ep.y]);
        e_v.extend([ev.x, ev.y]);
    }
    Ok(ErrorVector { e_p, e_v })
}

/// Lyapunov candidate `V = Q.Q / 2` with `Q_k = x2_k^2 / 2 + k1 |x1_k|^(alpha1+1) / (alpha1+1)`.
pub fn lyapunov_v(x1: Vec2, x2: Vec2, params: &ControllerParams) -> f64 {
    let a = params.alpha1();
    let q = |p: f64, v: f64| 0.5 * v * v + params.k1() / (a + 1.0) * p.abs().powf(a + 1.0);
    let q = Vec2::new(q(x1.x, x2.x), q(x1.y, x2.y));
    0.5 * q.dot(&q)
}

/// Right-hand side of the planar pairwise system `X1' = X2, X2' = -k1 spow(X1) - k2 spow(X2)`,
/// packed as `[x1x, x1y, x2x, x2y]`.
pub fn pairwise_error_dynamics(params: ControllerParams) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] {
    move |_, s| {
        let x1 = Vec2::new(s[0], s[1]);
        let x2 = Vec2::new(s[2], s[3]);
        let acc = -spow(x1, params.alpha1()) * params.k1() - spow(x2, params.alpha2()) * params.k2();
        [x2.x, x2.y, acc.x, acc.y]
    }
}
