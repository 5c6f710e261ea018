//! Rank correlation, histograms and the discrete Poisson fit.

use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mean;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman correlation: Pearson correlation of the average ranks.
pub fn spearman(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() || u.len() < 2 {
        return Err(QrcError::invalid(format!(
            "spearman needs two equal-length samples of at least 2, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(QrcError::invalid("spearman input contains non-finite values"));
    }
    let (ru, rv) = (average_ranks(u), average_ranks(v));
    let n = u.len() as f64;
    let (mu, mv) = (ru.iter().sum::<f64>() / n, rv.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut su = 0.0;
    let mut sv = 0.0;
    for (a, b) in ru.iter().zip(&rv) {
        cov += (a - mu) * (b - mv);
        su += (a - mu).powi(2);
        sv += (b - mv).powi(2);
    }
    if su == 0.0 || sv == 0.0 {
        return Err(QrcError::DegenerateRanks);
    }
    Ok((cov / (su * sv).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins spanning `[min, max]` of the sample; the maximum
    /// falls in the last bin. A constant sample fills bin 0.
    pub fn equal_width(values: &[f64], n_bins: usize) -> Result<Self> {
        if n_bins == 0 || values.is_empty() {
            return Err(QrcError::invalid("histogram needs at least one bin and one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(QrcError::invalid("histogram input contains non-finite values"));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0; n_bins];
        for &v in values {
            counts[Histogram::bin_of(v, min, max, n_bins)] += 1;
        }
        Ok(Histogram { min, max, counts })
    }

    fn bin_of(v: f64, min: f64, max: f64, n_bins: usize) -> usize {
        if max == min {
            return 0;
        }
        (((v - min) / (max - min) * n_bins as f64) as usize).min(n_bins - 1)
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn bin_width(&self) -> f64 {
        (self.max - self.min) / self.n_bins() as f64
    }

    /// `(lower, upper)` edges of bin `i`.
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let w = self.bin_width();
        (self.min + w * i as f64, self.min + w * (i + 1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonFit {
    /// Maximum-likelihood rate over bin indices.
    pub rate: f64,
    pub log_likelihood: f64,
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Poisson maximum-likelihood fit to counts indexed by bin number; the
/// rate is the count-weighted mean bin index.
pub fn fit_poisson(hist: &Histogram) -> Result<PoissonFit> {
    let total = hist.total();
    if total == 0 {
        return Err(QrcError::invalid("cannot fit an empty histogram"));
    }
    let rate = hist.counts.iter().enumerate().map(|(i, &c)| (i * c) as f64).sum::<f64>() / total as f64;
    let log_likelihood = hist
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| {
            let log_pmf = if rate == 0.0 {
                if k == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                k as f64 * rate.ln() - rate - ln_factorial(k)
            };
            c as f64 * log_pmf
        })
        .sum();
    Ok(PoissonFit { rate, log_likelihood })
}

/// Median with the midpoint convention for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Number of clusters in a sorted sample, splitting where neighbours are
/// more than `tol` apart.
pub fn count_clusters(values: &[f64], tol: f64) -> usize {
    if values.is_empty() {
        return 0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    1 + v.windows(2).filter(|w| w[1] - w[0] > tol).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        // 1 - 6 sum d^2 / (n (n^2 - 1)) with d = (0, 1, 1, 0).
        let want = 1.0 - 6.0 * 2.0 / (4.0 * 15.0);
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - want).abs() < 1e-15);
        assert!(matches!(spearman(&[1.0, 1.0], &[1.0, 2.0]), Err(QrcError::DegenerateRanks)));
        assert!(spearman(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn tied_ranks_are_averaged() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn constant_sample_fills_one_bin() {
        let h = Histogram::equal_width(&[0.2; 7], 40).unwrap();
        assert_eq!(h.counts[0], 7);
        assert_eq!(h.total(), 7);
        assert_eq!(fit_poisson(&h).unwrap().rate, 0.0);
    }

    #[test]
    fn maximum_lands_in_last_bin() {
        let h = Histogram::equal_width(&[0.0, 0.5, 1.0], 4).unwrap();
        assert_eq!(h.counts, vec![1, 0, 1, 1]);
        assert_eq!(h.edges(1), (0.25, 0.5));
        let fit = fit_poisson(&h).unwrap();
        assert!((fit.rate - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn poisson_rate_is_likelihood_maximum() {
        let h = Histogram {
            min: 0.0,
            max: 1.0,
            counts: vec![3, 8, 5, 2, 1, 0, 1],
        };
        let fit = fit_poisson(&h).unwrap();
        let ll = |rate: f64| {
            h.counts
                .iter()
                .enumerate()
                .map(|(k, &c)| c as f64 * (k as f64 * rate.ln() - rate - ln_factorial(k)))
                .sum::<f64>()
        };
        assert!((ll(fit.rate) - fit.log_likelihood).abs() < 1e-9);
        assert!(ll(fit.rate) >= ll(fit.rate * 1.01) && ll(fit.rate) >= ll(fit.rate * 0.99));
    }

    #[test]
    fn medians_and_clusters() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
        assert_eq!(count_clusters(&[0.5, 0.8, 0.501, 0.805], 1e-2), 2);
        assert_eq!(count_clusters(&[0.3; 5], 1e-2), 1);
    }

    proptest! {
        #[test]
        fn spearman_is_bounded_and_rank_invariant(
            pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..40)
        ) {
            let (u, v): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(rho) = spearman(&u, &v) {
                prop_assert!((-1.0..=1.0).contains(&rho));
                let warped: Vec<f64> = u.iter().map(|x| x * x * x + x).collect();
                prop_assert!((rho - spearman(&warped, &v).unwrap()).abs() < 1e-12);
            }
        }

        #[test]
        fn histogram_conserves_samples(values in proptest::collection::vec(0.0f64..1.0, 1..200), bins in 1usize..60) {
            let h = Histogram::equal_width(&values, bins).unwrap();
            prop_assert_eq!(h.total(), values.len());
            prop_assert!(fit_poisson(&h).unwrap().rate >= 0.0);
        }
    }
}
