//! Small statistics toolkit for the estimators and the validation suite.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use crate::error::{RatchetError, Result};

/// Mean, shifted by the first value so that constant input is reproduced exactly.
pub fn mean(xs: &[f64]) -> f64 {
    let x0 = xs[0];
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 || xs.iter().all(|&x| x == xs[0]) {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_err(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Two-sided quantile `q` with `P(|T| <= q) = level` for `df` degrees of
/// freedom; the normal quantile when `df` is infinite.
pub fn two_sided_quantile(level: f64, df: f64) -> f64 {
    let p = 0.5 + 0.5 * level;
    if df.is_finite() {
        StudentsT::new(0.0, 1.0, df).expect("df > 0").inverse_cdf(p)
    } else {
        Normal::standard().inverse_cdf(p)
    }
}

/// Lag-1 sample autocorrelation.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let num: f64 = xs.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    let den: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Sums over `k` consecutive equal-size batches (a trailing remainder is dropped).
pub fn batch_sums(xs: &[f64], k: usize) -> Vec<f64> {
    let size = xs.len() / k;
    (0..k)
        .map(|i| xs[i * size..(i + 1) * size].iter().sum())
        .collect()
}

/// Kolmogorov survival function `P(K > lambda)`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_p(d: f64, n_eff: f64) -> f64 {
    let sn = n_eff.sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

/// One-sample KS statistic and asymptotic p-value against `cdf`.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    (d, ks_p(d, n))
}

/// Two-sample KS statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let n_eff = (na * nb) as f64 / (na + nb) as f64;
    (d, ks_p(d, n_eff))
}

/// Pearson chi-square goodness of fit. `expected` holds probabilities
/// summing to 1; `ddof` extra degrees of freedom are subtracted.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], ddof: usize) -> Result<(f64, f64)> {
    if observed.len() != expected.len() || observed.len() < 2 + ddof {
        return Err(RatchetError::InvalidParameter(
            "chi-square needs matching bins and positive degrees of freedom".into(),
        ));
    }
    let n: u64 = observed.iter().sum();
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(expected) {
        let e = p * n as f64;
        if e <= 0.0 {
            return Err(RatchetError::InvalidParameter(
                "chi-square bin with zero expected count".into(),
            ));
        }
        stat += (o as f64 - e).powi(2) / e;
    }
    let df = (observed.len() - 1 - ddof) as f64;
    let p = 1.0 - ChiSquared::new(df).expect("df > 0").cdf(stat);
    Ok((stat, p))
}

/// Chi-square test of homogeneity for a contingency table (rows are groups).
/// Columns with no counts are dropped.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> Result<(f64, f64)> {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    let ncol = rows.first().map_or(0, |r| r.len());
    let col: Vec<u64> = (0..ncol).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
    let keep: Vec<usize> = (0..ncol).filter(|&j| col[j] > 0).collect();
    if rows.len() < 2 || keep.len() < 2 {
        return Err(RatchetError::InvalidParameter(
            "homogeneity test needs at least a 2x2 table".into(),
        ));
    }
    let total: u64 = col.iter().sum();
    let mut stat = 0.0;
    for r in &rows {
        let rs: u64 = r.iter().sum();
        for &j in &keep {
            let e = rs as f64 * col[j] as f64 / total as f64;
            stat += (r[j] as f64 - e).powi(2) / e;
        }
    }
    let df = ((rows.len() - 1) * (keep.len() - 1)) as f64;
    Ok((stat, 1.0 - ChiSquared::new(df).expect("df > 0").cdf(stat)))
}

/// Normal-approximation p-value for a two-sided z statistic.
pub fn two_sided_normal_p(z: f64) -> f64 {
    2.0 * (1.0 - Normal::standard().cdf(z.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;

    #[test]
    fn moments() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(median(&xs), 2.5);
    }

    #[test]
    fn quantiles() {
        assert!((two_sided_quantile(0.95, f64::INFINITY) - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((two_sided_quantile(0.95, 10.0) - 2.228_138_851_986_273).abs() < 1e-9);
    }

    #[test]
    fn ks_uniform_accepts_and_rejects() {
        let mut s = rng_stream(3, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| s.uniform()).collect();
        assert!(ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).1 > 0.01);
        assert!(ks_one_sample(&xs, |x| x.clamp(0.0, 1.0).powf(1.1)).1 < 0.01);
        let ys: Vec<f64> = (0..10_000).map(|_| s.uniform()).collect();
        assert!(ks_two_sample(&xs, &ys).1 > 0.01);
        let zs: Vec<f64> = ys.iter().map(|y| y * 1.05).collect();
        assert!(ks_two_sample(&xs, &zs).1 < 0.01);
    }

    #[test]
    fn kolmogorov_reference() {
        // P(K > 1.36) ~ 0.0494
        assert!((kolmogorov_sf(1.36) - 0.049_465).abs() < 1e-4);
    }

    #[test]
    fn chi_square_reference() {
        let (stat, p) = chi_square_gof(&[50, 50], &[0.5, 0.5], 0).unwrap();
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        let (_, p) = chi_square_gof(&[60, 40], &[0.5, 0.5], 0).unwrap();
        // stat = 4 with one degree of freedom
        assert!((p - 0.045_500_263_896_358).abs() < 1e-9);
        let (_, p) = chi_square_homogeneity(&[vec![10, 20], vec![20, 40]]).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn autocorrelation_of_ar1() {
        let mut s = rng_stream(4, 0);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..100_000)
            .map(|_| {
                x = 0.5 * x + s.standard_normal();
                x
            })
            .collect();
        assert!((lag1_autocorrelation(&xs) - 0.5).abs() < 0.02);
        assert_eq!(batch_sums(&[1.0, 2.0, 3.0, 4.0, 5.0], 2), vec![3.0, 7.0]);
    }
}
