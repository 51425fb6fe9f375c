//! Posterior mode by Gaussian kernel density estimation on a fixed grid.

use super::SimError;

pub const GRID_POINTS: usize = 512;
pub const MIN_SAMPLES: usize = 100;

/// Kernel contributions beyond this many bandwidths are below e^-32 and are
/// skipped.
const CUTOFF: f64 = 8.0;

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Silverman's rule: `0.9 · min(σ, IQR/1.34) · n^(-1/5)`, falling back to σ
/// when the IQR is zero. Returns `None` for zero-variance data.
pub fn silverman_bandwidth(samples: &[f64]) -> Option<f64> {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Some(0.9 * spread * n.powf(-0.2))
}

/// Unnormalized Gaussian KDE evaluated at `j / 511` for `j = 0..512`.
pub fn density_on_grid(samples: &[f64], bandwidth: f64) -> Vec<f64> {
    let last = (GRID_POINTS - 1) as f64;
    let mut density = vec![0.0; GRID_POINTS];
    let reach = CUTOFF * bandwidth;
    for &x in samples {
        let lo = ((x - reach) * last).ceil().max(0.0) as usize;
        let hi = ((x + reach) * last).floor().min(last);
        if hi < 0.0 {
            continue;
        }
        for (j, d) in density.iter_mut().enumerate().take(hi as usize + 1).skip(lo) {
            let u = (j as f64 / last - x) / bandwidth;
            *d += (-0.5 * u * u).exp();
        }
    }
    density
}

/// Grid point of maximum estimated density on [0, 1]; ties go to the
/// smallest grid value. Zero-variance input returns its common value.
pub fn estimate_mode(samples: &[f64]) -> Result<f64, SimError> {
    if samples.len() < MIN_SAMPLES {
        return Err(SimError::TooFewSamples(samples.len()));
    }
    if let Some(bad) = samples.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(SimError::OutOfRange(format!("sample {bad}")));
    }
    if samples.iter().all(|&x| x == samples[0]) {
        return Ok(samples[0]);
    }
    let Some(h) = silverman_bandwidth(samples) else {
        return Ok(samples[0]);
    };
    let density = density_on_grid(samples, h);
    let mut best = 0;
    for (j, &d) in density.iter().enumerate() {
        if d > density[best] {
            best = j;
        }
    }
    Ok(best as f64 / (GRID_POINTS - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::beta_posterior;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::Distribution;

    fn draws(a: u64, b: u64, n: usize, seed: u64) -> Vec<f64> {
        let d = beta_posterior(a, b).sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn degenerate_returns_common_value() {
        assert_eq!(estimate_mode(&vec![0.7; 150]).unwrap(), 0.7);
    }

    #[test]
    fn too_few_or_out_of_range() {
        assert_eq!(estimate_mode(&[0.5; 99]), Err(SimError::TooFewSamples(99)));
        let mut v = vec![0.5; 200];
        v[3] = 1.5;
        assert!(matches!(estimate_mode(&v), Err(SimError::OutOfRange(_))));
    }

    #[test]
    fn recovers_beta_modes() {
        // Beta(51, 11): mode 50/60
        let m = estimate_mode(&draws(50, 10, 100_000, 1)).unwrap();
        assert!((m - 50.0 / 60.0).abs() <= 0.01, "{m}");
        // Beta(2, 2): mode 1/2, flat top so a single run is noisy; use the median
        let mut ms: Vec<f64> = (0..9)
            .map(|seed| estimate_mode(&draws(1, 1, 100_000, 10 + seed)).unwrap())
            .collect();
        ms.sort_by(f64::total_cmp);
        assert!((ms[4] - 0.5).abs() <= 0.02, "{ms:?}");
    }

    #[test]
    fn ties_pick_smallest_grid_point() {
        // two identical well-separated clusters
        let mut v = vec![0.25; 100];
        v.extend(vec![0.75; 100]);
        let m = estimate_mode(&v).unwrap();
        assert!(m < 0.5);
    }

    #[test]
    fn truncated_kernel_matches_full_sum() {
        let s = draws(3, 5, 500, 3);
        let h = silverman_bandwidth(&s).unwrap();
        let fast = density_on_grid(&s, h);
        for (j, f) in fast.iter().enumerate() {
            let g = j as f64 / 511.0;
            let full: f64 = s.iter().map(|x| (-0.5 * ((g - x) / h).powi(2)).exp()).sum();
            assert!((f - full).abs() <= 1e-9 * full.max(1.0));
        }
    }

    #[test]
    fn quantile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile(&v, 0.5), 1.5);
        assert_eq!(quantile(&v, 0.25), 0.75);
    }
}
