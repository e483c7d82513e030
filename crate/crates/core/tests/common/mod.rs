//! Reference numerics shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;

type State = [Complex64; 2];

/// i d/dt (c_k, c†_{-k}) = [[a, b], [-b, -a]] (c_k, c†_{-k}).
fn rhs(a: f64, b: f64, y: &State) -> State {
    let mi = Complex64::new(0.0, -1.0);
    [mi * (a * y[0] + b * y[1]), mi * (-b * y[0] - a * y[1])]
}

/// Adaptive Dormand-Prince 5(4).
pub fn dopri5(a: f64, b: f64, y0: State, t_end: f64, rtol: f64) -> State {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let rate = a.abs() + b.abs();
    let mut h = if rate > 0.0 { 0.01 / rate } else { t_end };
    let mut t = 0.0;
    let mut y = y0;
    while t < t_end {
        h = h.min(t_end - t);
        let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..2 {
                    ys[i] += kj[i] * (h * A[s][j]);
                }
            }
            k[s] = rhs(a, b, &ys);
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let mut e = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                y5[i] += k[s][i] * (h * B5[s]);
                e += k[s][i] * (h * (B5[s] - B4[s]));
            }
            let sc = rtol * (1e-30 + y[i].norm().max(y5[i].norm()));
            err = err.max(e.norm() / sc);
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        h *= (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
    y
}


/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Fits y ≈ e^{-x/ξ}(a cos qx + b sin qx) + c by scanning q and ξ, solving the linear part exactly.
/// Returns (q, ξ, rms residual).
pub fn fit_damped_cosine(x: &[f64], y: &[f64], q_range: (f64, f64), xi_range: (f64, f64)) -> (f64, f64, f64) {
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    let nq = 2000;
    let nxi = 60;
    for i in 0..=nq {
        let q = q_range.0 + (q_range.1 - q_range.0) * i as f64 / nq as f64;
        for j in 0..=nxi {
            let xi = xi_range.0 * (xi_range.1 / xi_range.0).powf(j as f64 / nxi as f64);
            let cols: Vec<[f64; 3]> = x
                .iter()
                .map(|&t| {
                    let e = (-t / xi).exp();
                    [e * (q * t).cos(), e * (q * t).sin(), 1.0]
                })
                .collect();
            let Some(coef) = least_squares3(&cols, y) else { continue };
            let rms = (cols
                .iter()
                .zip(y)
                .map(|(c, &v)| {
                    let f = c[0] * coef[0] + c[1] * coef[1] + c[2] * coef[2];
                    (f - v) * (f - v)
                })
                .sum::<f64>()
                / y.len() as f64)
                .sqrt();
            if rms < best.2 {
                best = (q, xi, rms);
            }
        }
    }
    best
}

fn least_squares3(cols: &[[f64; 3]], y: &[f64]) -> Option<[f64; 3]> {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (c, &v) in cols.iter().zip(y) {
        for i in 0..3 {
            b[i] += c[i] * v;
            for j in 0..3 {
                a[i][j] += c[i] * c[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}
