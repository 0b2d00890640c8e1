//! Observable assembly, trajectory norms and short-time quadratic fits.
//!
//! Error bars propagate at leading order throughout, treating per-quantity
//! errors as independent.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::hamiltonian::Observable;
use crate::pauli::PauliString;

/// A time series with error bars on a fixed grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub label: String,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        errors: Vec<f64>,
        label: &str,
    ) -> Result<Trajectory> {
        if times.len() != values.len() || times.len() != errors.len() {
            return Err(Error::config("trajectory columns must have equal length"));
        }
        if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::config(
                "trajectory errors must be finite and nonnegative",
            ));
        }
        Ok(Trajectory {
            times,
            values,
            errors,
            label: label.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV body `s,t,value,error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,t,value,error\n");
        for s in 0..self.len() {
            out.push_str(&format!(
                "{s},{},{},{}\n",
                self.times[s], self.values[s], self.errors[s]
            ));
        }
        out
    }

    pub fn from_csv(csv: &str, label: &str) -> Result<Trajectory> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut errors = Vec::new();
        for (i, line) in csv.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::parse(i + 1, 1, "expected s,t,value,error"));
            }
            times.push(
                fields[1]
                    .parse()
                    .map_err(|_| Error::parse(i + 1, 1, "bad t"))?,
            );
            values.push(
                fields[2]
                    .parse()
                    .map_err(|_| Error::parse(i + 1, 1, "bad value"))?,
            );
            errors.push(
                fields[3]
                    .parse()
                    .map_err(|_| Error::parse(i + 1, 1, "bad error"))?,
            );
        }
        Trajectory::new(times, values, errors, label)
    }
}

/// Assembles `sum_q J_q v_q(s)` over the observable's strings, looking each
/// one up in the quantity list; errors combine as
/// `sqrt(sum_q J_q^2 e_q(s)^2)`.
pub fn assemble_observable(
    obs: &Observable,
    strings: &[PauliString],
    values: &[Vec<f64>],
    errors: &[Vec<f64>],
    times: &[f64],
    label: &str,
) -> Result<Trajectory> {
    let npoints = times.len();
    let mut out_values = vec![0.0; npoints];
    let mut out_var = vec![0.0; npoints];
    for (coeff, string) in obs.terms() {
        let q = strings
            .iter()
            .position(|s| s == string)
            .ok_or_else(|| Error::config(format!("quantity {string} missing from the table")))?;
        if values[q].len() != npoints || errors[q].len() != npoints {
            return Err(Error::config("value rows must match the time grid"));
        }
        for s in 0..npoints {
            out_values[s] += coeff * values[q][s];
            out_var[s] += coeff * coeff * errors[q][s] * errors[q][s];
        }
    }
    Trajectory::new(
        times.to_vec(),
        out_values,
        out_var.into_iter().map(f64::sqrt).collect(),
        label,
    )
}

/// Discrete 2-norm distance `sqrt(dt sum_s (a_s - b_s)^2)` over a shared
/// grid, with its propagated error.
pub fn l_norm(a: &Trajectory, b: &Trajectory) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::config("trajectories live on different grids"));
    }
    for (ta, tb) in a.times.iter().zip(&b.times) {
        if (ta - tb).abs() > 1e-9 {
            return Err(Error::config("trajectory time points differ"));
        }
    }
    if a.len() < 2 {
        return Err(Error::config("need at least two points"));
    }
    let dt = a.times[1] - a.times[0];
    let mut sum = 0.0;
    let mut grad = 0.0;
    for s in 0..a.len() {
        let d = a.values[s] - b.values[s];
        sum += d * d;
        grad += d * d * (a.errors[s] * a.errors[s] + b.errors[s] * b.errors[s]);
    }
    let l = (dt * sum).sqrt();
    let err = if l > 0.0 { dt * grad.sqrt() / l } else { 0.0 };
    Ok((l, err))
}

/// Coefficients of a `p1 t + p2 t^2` fit with their covariance.
#[derive(Debug, Clone, Copy)]
pub struct FitResult {
    pub p: [f64; 2],
    pub covariance: [[f64; 2]; 2],
}

impl FitResult {
    pub fn norm(&self) -> f64 {
        (self.p[0] * self.p[0] + self.p[1] * self.p[1]).sqrt()
    }
}

/// Weighted least squares on the basis `{t, t^2}` over the points with
/// `0 < t <= tmax` (the zero-time point carries no information for this
/// basis). Weights are `1/error^2` when every included error is positive,
/// unit otherwise; the covariance is the inverse normal matrix.
pub fn fit_quadratic(traj: &Trajectory, tmax: f64) -> Result<FitResult> {
    fit_quadratic_impl(traj, tmax, true)
}

/// Unit-weight variant: all points count equally and the covariance
/// propagates the per-point errors through the unweighted projector
/// (`(A^T A)^{-1} A^T diag(e^2) A (A^T A)^{-1}`). Preferable when the error
/// bars are strongly uneven across points, which would otherwise let a single
/// tight point steer the fit.
pub fn fit_quadratic_unweighted(traj: &Trajectory, tmax: f64) -> Result<FitResult> {
    fit_quadratic_impl(traj, tmax, false)
}

fn fit_quadratic_impl(traj: &Trajectory, tmax: f64, weighted: bool) -> Result<FitResult> {
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    for s in 0..traj.len() {
        let t = traj.times[s];
        if t > 0.0 && t <= tmax + 1e-12 {
            pts.push((t, traj.values[s], traj.errors[s]));
        }
    }
    if pts.len() < 3 {
        return Err(Error::numerical(format!(
            "quadratic fit needs at least 3 points with 0 < t <= {tmax}, found {}",
            pts.len()
        )));
    }
    let weighted = weighted && pts.iter().all(|&(_, _, e)| e > 0.0);
    let mut a = Matrix2::zeros();
    let mut b = Vector2::zeros();
    for &(t, v, e) in &pts {
        let w = if weighted { 1.0 / (e * e) } else { 1.0 };
        let t2 = t * t;
        a[(0, 0)] += w * t2;
        a[(0, 1)] += w * t * t2;
        a[(1, 0)] += w * t * t2;
        a[(1, 1)] += w * t2 * t2;
        b[0] += w * t * v;
        b[1] += w * t2 * v;
    }
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::numerical("singular design matrix in quadratic fit".to_string()))?;
    let p = inv * b;
    let covariance = if weighted {
        [[inv[(0, 0)], inv[(0, 1)]], [inv[(1, 0)], inv[(1, 1)]]]
    } else {
        // Sandwich estimate from the per-point errors.
        let mut mid = Matrix2::zeros();
        for &(t, _, e) in &pts {
            let t2 = t * t;
            mid[(0, 0)] += e * e * t2;
            mid[(0, 1)] += e * e * t * t2;
            mid[(1, 0)] += e * e * t * t2;
            mid[(1, 1)] += e * e * t2 * t2;
        }
        let cov: Matrix2<f64> = inv * mid * inv;
        [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]]
    };
    Ok(FitResult {
        p: [p[0], p[1]],
        covariance,
    })
}

/// Relative fit distance `|p - p_ref| / |p_ref|` with leading-order error
/// from both covariances.
pub fn p_metric(fit: &FitResult, reference: &FitResult) -> Result<(f64, f64)> {
    let nref = reference.norm();
    if nref == 0.0 {
        return Err(Error::numerical("reference fit has zero norm".to_string()));
    }
    let d = [fit.p[0] - reference.p[0], fit.p[1] - reference.p[1]];
    let nd = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let value = nd / nref;
    if nd == 0.0 {
        return Ok((0.0, 0.0));
    }
    // Gradients: dP/dp = d / (nd nref); dP/dpref = -d/(nd nref) - nd pref / nref^3.
    let gp = [d[0] / (nd * nref), d[1] / (nd * nref)];
    let gr = [
        -d[0] / (nd * nref) - nd * reference.p[0] / nref.powi(3),
        -d[1] / (nd * nref) - nd * reference.p[1] / nref.powi(3),
    ];
    let quad = |g: [f64; 2], c: &[[f64; 2]; 2]| -> f64 {
        g[0] * g[0] * c[0][0] + 2.0 * g[0] * g[1] * c[0][1] + g[1] * g[1] * c[1][1]
    };
    let var = quad(gp, &fit.covariance) + quad(gr, &reference.covariance);
    Ok((value, var.max(0.0).sqrt()))
}
