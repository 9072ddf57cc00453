//! Least-squares fits used to summarise sweeps.

use serde::Serialize;

use crate::{Result, SimError};

/// Fitted value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Ordinary least-squares line `y = a x + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub a: f64,
    pub b: f64,
    pub a_stderr: f64,
    pub b_stderr: f64,
}

/// Scale `s` minimising `Σ (m_i − s t(θ_i))²`.
pub fn fit_scale<F: Fn(f64) -> f64>(measured: &[(f64, f64)], theory: F) -> Result<Estimate> {
    if measured.len() < 2 {
        return Err(SimError::DegenerateFit("scale fit needs at least two points"));
    }
    let t: Vec<f64> = measured.iter().map(|&(x, _)| theory(x)).collect();
    let stt: f64 = t.iter().map(|v| v * v).sum();
    if stt <= f64::MIN_POSITIVE {
        return Err(SimError::DegenerateFit("theory curve vanishes on the grid"));
    }
    let smt: f64 = measured.iter().zip(&t).map(|(&(_, m), tv)| m * tv).sum();
    let scale = smt / stt;
    let ssr: f64 = measured
        .iter()
        .zip(&t)
        .map(|(&(_, m), tv)| (m - scale * tv).powi(2))
        .sum();
    let var = ssr / (measured.len() - 1) as f64;
    Ok(Estimate {
        value: scale,
        stderr: (var / stt).sqrt(),
    })
}

/// Mean and standard error of the mean.
pub fn fit_constant(values: &[f64]) -> Result<Estimate> {
    if values.is_empty() {
        return Err(SimError::DegenerateFit("constant fit of an empty series"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(Estimate { value: mean, stderr })
}

pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(SimError::DegenerateFit("line fit needs at least two points"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= f64::MIN_POSITIVE {
        return Err(SimError::DegenerateFit("all abscissae identical"));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let (a_stderr, b_stderr) = if points.len() > 2 {
        let ssr: f64 = points.iter().map(|p| (p.1 - a * p.0 - b).powi(2)).sum();
        let s2 = ssr / (n - 2.0);
        ((s2 / sxx).sqrt(), (s2 * (1.0 / n + mx * mx / sxx)).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(LineFit {
        a,
        b,
        a_stderr,
        b_stderr,
    })
}
