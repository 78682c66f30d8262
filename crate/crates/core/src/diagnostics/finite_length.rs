use serde::Serialize;

use crate::engine::TraceRecord;

/// Fewer records than this give no report.
pub const MIN_RECORDS: usize = 10;

/// Summability of the step norms `s_k = Σ‖Δx_i^k‖ + ‖Δy^k‖ + ‖Δz^k‖`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteLengthReport {
    /// `Σ_{j ≤ k} s_j`.
    pub partial_sums: Vec<f64>,
    pub total: f64,
    /// Geometric mean ratio `(s_end/s_start)^{1/(n−1)}` over the last quartile.
    pub tail_ratio: f64,
    /// Share of the total contributed by the final 10% of records.
    pub final_fraction: f64,
}

/// Summary of a step-norm sequence; `None` below [`MIN_RECORDS`] entries.
pub fn finite_length_from_steps(steps: &[f64]) -> Option<FiniteLengthReport> {
    if steps.len() < MIN_RECORDS {
        return None;
    }
    let partial_sums: Vec<f64> = steps
        .iter()
        .scan(0.0, |acc, &s| {
            *acc += s;
            Some(*acc)
        })
        .collect();
    let n = steps.len();
    let total = partial_sums[n - 1];

    let quarter = &steps[n - n / 4..];
    let (first, last) = (quarter[0], quarter[quarter.len() - 1]);
    let tail_ratio = if first > 0.0 { (last / first).powf(1.0 / (quarter.len() - 1) as f64) } else { 0.0 };

    let head = n - n / 10;
    let final_fraction = if total > 0.0 { (total - partial_sums[head - 1]) / total } else { 0.0 };
    Some(FiniteLengthReport { partial_sums, total, tail_ratio, final_fraction })
}

pub fn finite_length_monitor(trace: &[TraceRecord]) -> Option<FiniteLengthReport> {
    let steps: Vec<f64> = trace.iter().map(|r| r.steps.sum()).collect();
    finite_length_from_steps(&steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_steps() {
        let rep = finite_length_from_steps(&[0.0; 12]).unwrap();
        assert!(rep.partial_sums.iter().all(|&s| s == 0.0));
        assert_eq!(rep.final_fraction, 0.0);
    }

    #[test]
    fn geometric_steps() {
        let steps: Vec<f64> = (1..=40).map(|k| 0.5f64.powi(k)).collect();
        let rep = finite_length_from_steps(&steps).unwrap();
        assert!((rep.total - 1.0).abs() < 1e-11);
        assert!((rep.tail_ratio - 0.5).abs() < 1e-12);
    }

    #[test]
    fn too_short() {
        assert!(finite_length_from_steps(&[1.0; 9]).is_none());
    }
}
