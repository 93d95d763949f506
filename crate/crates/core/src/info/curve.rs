//! Growth of compressed trajectory length with time.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{Compressor, InfoError};
use crate::agent::CoupledTrace;
use crate::canonical::Canonical;

/// Slope floor (bits/step) for the reference curve in
/// [`irreducibility_score`].
pub const SLOPE_FLOOR: f64 = 1e-3;

/// Largest drop of `khat` from one prefix to a longer one that the built-in
/// coder is allowed. Greedy parsing can change at the end of the input, so
/// the estimate is only monotone up to this slack. The largest drop seen
/// over a sweep of ECA traces at widths 16 and 64 was 96 bits.
pub const C_SLACK_BITS: u64 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KhatPoint {
    pub t: u64,
    /// `C(s_0 ⧺ X_t) − C(s_0)` in bits, saturating at zero.
    pub khat_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityCurve {
    pub compressor: String,
    pub points: Vec<KhatPoint>,
    /// Least-squares slope in bits/step.
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals.
    pub residual: f64,
}

/// Ordinary least squares over `(x, y)`. Returns (slope, intercept, rms
/// residual). Needs two distinct x values.
pub fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64, f64), InfoError> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 2 || sxx == 0.0 {
        return Err(InfoError::InvalidInput("a slope needs at least two distinct prefix lengths".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok((slope, intercept, (sse / n).sqrt()))
}

/// Conditional complexity estimate of each trajectory prefix given `s_0`.
/// Record `t` of the trace is `s_t`; prefix `t` is `s_1 … s_t`, each state
/// serialized as agent bytes then environment bytes.
pub fn complexity_curve<SA, SE, I, O>(
    trace: &CoupledTrace<SA, SE, I, O>,
    prefix_steps: &[u64],
    compressor: &dyn Compressor,
) -> Result<ComplexityCurve, InfoError>
where
    SA: Canonical + Sync,
    SE: Canonical + Sync,
    I: Sync,
    O: Sync,
{
    if prefix_steps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(InfoError::InvalidInput("prefix steps must be strictly ascending".into()));
    }
    let last = trace.len() as u64;
    if let Some(&t) = prefix_steps.iter().find(|&&t| t >= last) {
        return Err(InfoError::InvalidInput(format!("prefix {t} is beyond a trace of {last} records")));
    }
    let mut payload = Vec::new();
    let mut ends = Vec::with_capacity(trace.len());
    for r in &trace.records {
        r.agent.encode(&mut payload);
        r.env.encode(&mut payload);
        ends.push(payload.len());
    }
    let Some(&s0_end) = ends.first() else {
        return Err(InfoError::InvalidInput("empty trace".into()));
    };
    let base = compressor.compress(&payload[..s0_end]).bits;
    let points: Vec<KhatPoint> = prefix_steps
        .par_iter()
        .map(|&t| KhatPoint {
            t,
            khat_bits: compressor.compress(&payload[..ends[t as usize]]).bits.saturating_sub(base),
        })
        .collect();
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.t as f64, p.khat_bits as f64)).collect();
    let (slope, intercept, residual) = least_squares(&xy)?;
    Ok(ComplexityCurve { compressor: compressor.id(), points, slope, intercept, residual })
}

/// `max(slope, 0) / max(reference slope, SLOPE_FLOOR)`.
pub fn irreducibility_score(curve: &ComplexityCurve, reference: &ComplexityCurve) -> f64 {
    curve.slope.max(0.0) / reference.slope.max(SLOPE_FLOOR)
}

/// Columns `t, khat_bits, slope`; the slope repeats on every row.
pub fn write_curve_csv<W: Write>(out: W, curve: &ComplexityCurve) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "khat_bits", "slope"])?;
    for p in &curve.points {
        w.write_record([p.t.to_string(), p.khat_bits.to_string(), format!("{:.6}", curve.slope)])?;
    }
    w.flush()?;
    Ok(())
}
