use serde::{Deserialize, Serialize};

use super::{shifted_mean, student_t_sf_two_sided, StatsError};

/// Simple linear regression `y = intercept + slope * x` with slope inference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    /// `sqrt(SSR / (n - 2) / Sxx)`; zero for a degenerate fit.
    pub slope_se: f64,
    pub t_stat: f64,
    /// Two-sided, Student-t with `n - 2` degrees of freedom.
    pub p_value: f64,
    /// Share of response variance explained. A perfect fit, including a
    /// constant response, reports 1.
    pub r_squared: f64,
    pub ssr: f64,
    pub n: usize,
    /// Residuals vanish to double precision. The slope standard error is
    /// then 0, `t_stat` is infinite with the sign of the slope (`+inf` for a
    /// zero slope) and `p_value` is 0.
    pub degenerate: bool,
}

// Residual sum of squares at or below this share of the response variation
// is rounding noise of an exact fit.
const DEGENERATE_REL: f64 = (64.0 * f64::EPSILON) * (64.0 * f64::EPSILON);

/// Ordinary least squares of `ys` on `xs`.
pub fn ols_fit(xs: &[f64], ys: &[f64]) -> Result<OlsFit, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooFewPoints { needed: 3, got: n });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteInput);
    }

    let x_mean = shifted_mean(xs);
    let y_mean = shifted_mean(ys);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVarianceX);
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = (y - y_mean) - slope * (x - x_mean);
            r * r
        })
        .sum();

    let degenerate = ssr == 0.0 || ssr <= syy * DEGENERATE_REL;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    };

    if degenerate {
        return Ok(OlsFit {
            slope,
            intercept,
            slope_se: 0.0,
            t_stat: f64::INFINITY.copysign(slope),
            p_value: 0.0,
            r_squared,
            ssr,
            n,
            degenerate,
        });
    }

    let df = (n - 2) as u64;
    let slope_se = (ssr / df as f64 / sxx).sqrt();
    let t_stat = slope / slope_se;
    let p_value = student_t_sf_two_sided(t_stat, df)?;
    Ok(OlsFit {
        slope,
        intercept,
        slope_se,
        t_stat,
        p_value,
        r_squared,
        ssr,
        n,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_response_is_degenerate() {
        let fit = ols_fit(&[0.0, 1.0, 2.0], &[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.intercept, 5.0);
        assert_eq!(fit.ssr, 0.0);
        assert!(fit.degenerate);
        assert_eq!(fit.slope_se, 0.0);
        assert_eq!(fit.p_value, 0.0);
        assert_eq!(fit.t_stat, f64::INFINITY);
    }

    #[test]
    fn four_point_example() {
        // Sxx = 5, Sxy = 3, SSR = 0.2; slope_se = sqrt(0.1 / 5)
        let fit = ols_fit(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((fit.slope - 0.6).abs() < 1e-15);
        assert!((fit.intercept - 0.1).abs() < 1e-15);
        assert!((fit.slope_se - 0.02f64.sqrt()).abs() < 1e-15);
        assert!((fit.t_stat - 18f64.sqrt()).abs() < 1e-12);
        // df = 2 closed form: p = 1 - t / sqrt(2 + t^2) = 1 - sqrt(18/20)
        let p = 1.0 - (18.0f64 / 20.0).sqrt();
        assert!((fit.p_value - p).abs() < 1e-12);
        assert!((fit.p_value - 0.0513).abs() < 1e-4);
        assert!(!fit.degenerate);
        assert!((fit.r_squared - 0.9).abs() < 1e-12);
    }

    #[test]
    fn exact_line_flags_degenerate() {
        let xs: Vec<f64> = (1950..=2011).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 300.0 * x - 581_000.0).collect();
        let fit = ols_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 300.0).abs() < 1e-9 * 300.0);
        assert!(fit.degenerate);
    }

    #[test]
    fn negative_slope_degenerate_sign() {
        let fit = ols_fit(&[0.0, 1.0, 2.0], &[4.0, 2.0, 0.0]).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.t_stat, f64::NEG_INFINITY);
    }

    #[test]
    fn errors() {
        assert_eq!(
            ols_fit(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::LengthMismatch { xs: 2, ys: 3 })
        );
        assert_eq!(
            ols_fit(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFewPoints { needed: 3, got: 2 })
        );
        assert_eq!(
            ols_fit(&[1.0; 4], &[1.0, 2.0, 3.0, 4.0]),
            Err(StatsError::ZeroVarianceX)
        );
        assert_eq!(
            ols_fit(&[1.0, 2.0, f64::NAN], &[1.0, 2.0, 3.0]),
            Err(StatsError::NonFiniteInput)
        );
    }
}
