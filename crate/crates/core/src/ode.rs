//! Fixed-step classical Runge–Kutta integration over small fixed-size states.

/// One classical RK4 step of `y' = f(t, y)`.
pub fn rk4_step<const N: usize, F>(t: f64, y: &[f64; N], dt: f64, f: F) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, &axpy(y, 0.5 * dt, &k1));
    let k3 = f(t + 0.5 * dt, &axpy(y, 0.5 * dt, &k2));
    let k4 = f(t + dt, &axpy(y, dt, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}

/// Integrates from `t0` over `steps` steps and returns every sample, including the initial one.
pub fn integrate<const N: usize, F>(t0: f64, y0: [f64; N], dt: f64, steps: usize, f: F) -> Vec<(f64, [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push((t0, y));
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        y = rk4_step(t, &y, dt, &f);
        out.push((t0 + (k + 1) as f64 * dt, y));
    }
    out
}

/// Elementwise signed power `sign(x)·|x|^alpha`, with `spow(0, alpha) = 0`.
#[inline]
pub fn spow_scalar(x: f64, alpha: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(alpha)
    }
}
