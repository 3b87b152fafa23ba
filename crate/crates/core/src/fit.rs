//! Least-squares fits of exponential rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Straight-line fit `y ≈ slope·x + intercept` together with its window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Usage(format!(
            "linear fit needs two equal-length series of at least 2 points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Usage("linear fit over a degenerate abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(LinearFit {
        slope,
        intercept,
        residual,
        window: (lo, hi),
        samples: xs.len(),
    })
}

/// Slope of `log y` against `t` on `t ∈ [lo, hi]`.
pub fn log_slope(ts: &[f64], ys: &[f64], lo: f64, hi: f64) -> Result<LinearFit> {
    let (xs, ls): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .zip(ys)
        .filter(|(t, y)| **t >= lo && **t <= hi && **y > 0.0)
        .map(|(t, y)| (*t, y.ln()))
        .unzip();
    linear_fit(&xs, &ls)
}

/// Slope of `log y` after discarding the first and last `trim` fraction of samples.
pub fn trimmed_log_slope(ts: &[f64], ys: &[f64], trim: f64) -> Result<LinearFit> {
    let n = ts.len();
    let skip = (trim * n as f64).floor() as usize;
    if n < 2 * skip + 2 {
        return Err(Error::Usage("too few samples for a trimmed fit".into()));
    }
    log_slope(ts, ys, ts[skip], ts[n - 1 - skip])
}

/// Fourth-order centered derivative of uniformly sampled data; `None` at the
/// two samples nearest each end.
pub fn centered_derivative(ts: &[f64], ys: &[f64]) -> Result<Vec<Option<f64>>> {
    let n = ts.len();
    if n != ys.len() || n < 5 {
        return Err(Error::Usage(format!("centered derivative needs at least 5 paired samples, got {n}")));
    }
    let h = (ts[n - 1] - ts[0]) / (n - 1) as f64;
    if ts.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300)) {
        return Err(Error::Usage("centered derivative needs uniform sample spacing".into()));
    }
    Ok((0..n)
        .map(|i| {
            (i >= 2 && i + 2 < n).then(|| (ys[i - 2] - 8.0 * ys[i - 1] + 8.0 * ys[i + 1] - ys[i + 2]) / (12.0 * h))
        })
        .collect())
}

/// Decay rates of the envelope `max_{|y| ≥ |x|} |f(y)|` on `x_min ≤ |x| ≤ x_max`,
/// returned as `(left, right)`; positive means decaying.
pub fn tail_decay_rates(f: &GridFunction, x_min: f64, x_max: f64) -> Result<(f64, f64)> {
    let xs = f.grid().points();
    let v = f.values();
    let side = |sign: f64| -> Result<f64> {
        let mut idx: Vec<usize> = (0..xs.len()).filter(|&j| sign * xs[j] >= 0.0).collect();
        idx.sort_by(|&a, &b| (sign * xs[b]).total_cmp(&(sign * xs[a])));
        let mut env = 0.0f64;
        let mut pts = Vec::new();
        for j in idx {
            env = env.max(v[j].abs());
            let r = sign * xs[j];
            if r >= x_min && r <= x_max && env > 0.0 {
                pts.push((r, env.ln()));
            }
        }
        let (a, b): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        Ok(-linear_fit(&a, &b)?.slope)
    };
    Ok((side(-1.0)?, side(1.0)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn recovers_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-13);
        assert!(linear_fit(&xs[..1], &ys[..1]).is_err());
    }

    #[test]
    fn centered_derivative_of_cubic_is_exact() {
        let ts: Vec<f64> = (0..20).map(|i| 0.1 * f64::from(i)).collect();
        let ys: Vec<f64> = ts.iter().map(|t| t * t * t - t).collect();
        let d = centered_derivative(&ts, &ys).unwrap();
        assert!(d[0].is_none() && d[19].is_none());
        for (t, v) in ts.iter().zip(&d) {
            if let Some(v) = v {
                assert!((v - (3.0 * t * t - 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tail_rates_of_two_sided_exponential() {
        let g = Grid::new(40.0, 1024).unwrap();
        let f = g.sample(|x| if x < 0.0 { (0.7 * x).exp() } else { (-0.3 * x).exp() * (2.0 * x).cos().abs().max(0.5) });
        let (l, r) = tail_decay_rates(&f, 5.0, 20.0).unwrap();
        assert!((l - 0.7).abs() < 1e-10);
        assert!((r - 0.3).abs() < 0.02);
    }
}
