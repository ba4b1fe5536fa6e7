//! Evaluation metrics: SI-SNR and least-squares source scaling.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::interp::SignalBuffer;

/// Cap for a vanishing residual, so downstream CSV output stays finite.
pub const SI_SNR_CAP_DB: f64 = 300.0;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scale-invariant source-to-noise ratio in dB.
///
/// Projects the estimate onto the reference (`alpha = <est,ref>/<ref,ref>`)
/// and returns `10 log10(|alpha ref|^2 / |est - alpha ref|^2)`, capped at
/// [`SI_SNR_CAP_DB`] when the residual underflows.
pub fn si_snr(est: &SignalBuffer, reference: &SignalBuffer) -> Result<f64> {
    if est.len() != reference.len() {
        return Err(Error::ShapeMismatch(format!(
            "si_snr length mismatch: {} vs {}",
            est.len(),
            reference.len()
        )));
    }
    let r = reference.samples();
    let e = est.samples();
    let ref_energy = dot(r, r);
    if ref_energy == 0.0 {
        return Err(Error::ZeroReference);
    }
    let alpha = dot(e, r) / ref_energy;
    let target_energy = alpha * alpha * ref_energy;
    let residual_energy: f64 = e.iter().zip(r).map(|(x, y)| (x - alpha * y) * (x - alpha * y)).sum();
    if residual_energy == 0.0 {
        return Ok(SI_SNR_CAP_DB);
    }
    Ok((10.0 * (target_energy / residual_energy).log10()).min(SI_SNR_CAP_DB))
}

/// Result of the least-squares scaling fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFit {
    pub scales: Vec<f64>,
    /// True when the Gram matrix was singular and the minimum-norm solution
    /// was taken instead.
    pub degenerate: bool,
}

/// Scales `{alpha_j}` minimizing `sum_n (x[n] - sum_j alpha_j s_j[n])^2`,
/// via the J x J normal equations. A singular Gram matrix falls back to the
/// minimum-norm solution (SVD pseudo-inverse) and is flagged.
pub fn least_squares_scales(x: &SignalBuffer, sources: &[SignalBuffer]) -> Result<ScaleFit> {
    if sources.is_empty() {
        return Ok(ScaleFit { scales: vec![], degenerate: false });
    }
    let n = x.len();
    if sources.iter().any(|s| s.len() != n) {
        return Err(Error::ShapeMismatch("source length differs from mixture".into()));
    }
    let j = sources.len();
    let gram = DMatrix::from_fn(j, j, |a, b| dot(sources[a].samples(), sources[b].samples()));
    let rhs = DVector::from_fn(j, |a, _| dot(sources[a].samples(), x.samples()));
    let chol = gram.clone().cholesky();
    if let Some(ch) = chol {
        let sol = ch.solve(&rhs);
        return Ok(ScaleFit { scales: sol.iter().copied().collect(), degenerate: false });
    }
    let svd = gram.svd(true, true);
    let sol = svd.solve(&rhs, 1e-12).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(ScaleFit { scales: sol.iter().copied().collect(), degenerate: true })
}
