use serde::{Deserialize, Serialize};

use super::special::normal_sf;
use super::{normal_quantile, shifted_mean, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityResult {
    /// Shapiro-Francia `W'`, in `(0, 1]`.
    pub w_stat: f64,
    pub p_value: f64,
    pub n: usize,
}

pub const MIN_SAMPLE: usize = 8;
pub const MAX_SAMPLE: usize = 5000;

/// Shapiro-Francia test of normality.
///
/// `W'` is the squared correlation between the sorted sample and the Blom
/// scores `Phi^-1((i - 3/8) / (n + 1/4))`. The p-value uses Royston's normal
/// approximation of `ln(1 - W')`.
pub fn shapiro_francia(xs: &[f64]) -> Result<NormalityResult, StatsError> {
    let n = xs.len();
    if n < MIN_SAMPLE {
        return Err(StatsError::SampleTooSmall(n));
    }
    if n > MAX_SAMPLE {
        return Err(StatsError::SampleTooLarge(n));
    }
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }

    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = shifted_mean(&sorted);
    let ss: f64 = sorted.iter().map(|&x| (x - mean) * (x - mean)).sum();
    if ss == 0.0 {
        return Err(StatsError::ZeroVariance);
    }

    let nf = n as f64;
    let scores = (1..=n)
        .map(|i| normal_quantile((i as f64 - 0.375) / (nf + 0.25)))
        .collect::<Result<Vec<_>, _>>()?;
    let norm = scores.iter().map(|m| m * m).sum::<f64>().sqrt();
    let dot: f64 = scores.iter().zip(&sorted).map(|(m, &x)| m / norm * (x - mean)).sum();
    let w_stat = (dot * dot / ss).min(1.0);

    let u = nf.ln();
    let v = u.ln();
    let mu = -1.2725 + 1.0521 * (v - u);
    let sigma = 1.0308 - 0.26758 * (v + 2.0 / u);
    let z = ((1.0 - w_stat).ln() - mu) / sigma;
    Ok(NormalityResult {
        w_stat,
        p_value: normal_sf(z),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert_eq!(shapiro_francia(&[1.0; 7]), Err(StatsError::SampleTooSmall(7)));
        assert_eq!(shapiro_francia(&vec![0.0; 5001]), Err(StatsError::SampleTooLarge(5001)));
        assert_eq!(shapiro_francia(&[3.0; 10]), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn affine_invariance() {
        let xs = [2.1, -0.3, 4.4, 1.0, 0.2, 7.9, -2.2, 3.3, 0.8, 1.7, -1.1];
        let base = shapiro_francia(&xs).unwrap();
        let moved: Vec<f64> = xs.iter().map(|x| 2.0 * x + 5.0).collect();
        let other = shapiro_francia(&moved).unwrap();
        assert!((base.w_stat - other.w_stat).abs() < 1e-12);
        assert!(base.w_stat > 0.0 && base.w_stat <= 1.0);
    }

    #[test]
    fn reference_value() {
        // scipy: squared correlation with norm.ppf Blom scores, Royston transform
        let xs = [
            148.0, 154.0, 158.0, 160.0, 161.0, 162.0, 166.0, 170.0, 182.0, 195.0, 236.0,
        ];
        let r = shapiro_francia(&xs).unwrap();
        assert!((r.w_stat - 0.771_381_939_646_386).abs() < 1e-12, "{r:?}");
        assert!((r.p_value - 0.007_347_640_014_560_59).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn uniform_grid_is_nearly_normal_in_w() {
        // Blom scores themselves give W' = 1.
        let n = 50;
        let xs: Vec<f64> = (1..=n)
            .map(|i| normal_quantile((i as f64 - 0.375) / (n as f64 + 0.25)).unwrap())
            .collect();
        let r = shapiro_francia(&xs).unwrap();
        assert!((r.w_stat - 1.0).abs() < 1e-12);
        assert!(r.p_value > 0.99);
    }
}
