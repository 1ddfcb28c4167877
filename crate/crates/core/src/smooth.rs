//! Smooth cut-off building blocks shared by the resolution of unity and the
//! Littlewood–Paley profiles.

/// `e^{-1/s}` for `s > 0`, zero otherwise.
fn flat_exp(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// C^∞ step: 0 for `s <= 0`, 1 for `s >= 1`, monotone in between.
pub fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = flat_exp(s);
        a / (a + flat_exp(1.0 - s))
    }
}

/// Equal to 1 for `r <= inner`, 0 for `r >= outer`, smooth and
/// non-increasing in between.
pub fn plateau(r: f64, inner: f64, outer: f64) -> f64 {
    smoothstep((outer - r) / (outer - inner))
}

/// 0 for `r <= start`, 1 for `r >= end`.
pub fn ramp(r: f64, start: f64, end: f64) -> f64 {
    smoothstep((r - start) / (end - start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_is_symmetric_and_clamped() {
        assert_eq!(smoothstep(-0.1), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert!((smoothstep(0.5) - 0.5).abs() < 1e-15);
        for i in 1..100 {
            let s = i as f64 / 100.0;
            assert!((smoothstep(s) + smoothstep(1.0 - s) - 1.0).abs() < 1e-15);
            assert!(smoothstep(s) >= smoothstep(s - 0.01));
        }
    }

    #[test]
    fn plateau_endpoints() {
        assert_eq!(plateau(1.0, 1.0, 1.5), 1.0);
        assert_eq!(plateau(1.5, 1.0, 1.5), 0.0);
        assert_eq!(ramp(0.2, 0.2, 0.4), 0.0);
        assert_eq!(ramp(0.4, 0.2, 0.4), 1.0);
    }
}
