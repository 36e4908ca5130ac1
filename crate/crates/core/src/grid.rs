//! Grid helpers shared by the sweeps.

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// True when the difference sequence changes sign at most once, from `+`
/// to `-`. Differences with magnitude `<= tol` are treated as flat.
pub fn is_single_peaked(values: &[f64], tol: f64) -> bool {
    let mut descending = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d > tol {
            if descending {
                return false;
            }
        } else if d < -tol {
            descending = true;
        }
    }
    true
}

/// Number of strict sign changes in `values`, ignoring exact zeros.
pub fn sign_changes(values: &[f64]) -> usize {
    let signs: Vec<bool> = values
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| *v > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 1.0, 5);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn single_peak_detection() {
        assert!(is_single_peaked(&[0.0, 1.0, 2.0, 1.0, 0.0], 1e-9));
        assert!(is_single_peaked(&[3.0, 2.0, 1.0], 1e-9));
        assert!(!is_single_peaked(&[0.0, 1.0, 0.5, 1.5], 1e-9));
        assert!(is_single_peaked(&[0.0, 1.0, 1.0 + 1e-12, 1.0], 1e-9));
    }

    #[test]
    fn counts_sign_changes() {
        assert_eq!(sign_changes(&[-1.0, -0.5, 0.0, 0.3, 0.2]), 1);
        assert_eq!(sign_changes(&[-1.0, 1.0, -1.0]), 2);
    }
}
