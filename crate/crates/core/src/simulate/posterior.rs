use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use super::SimError;
use crate::records::{DatabaseWeights, SubgroupKey};

/// Beta distribution parameters; both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, SimError> {
        if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
            Ok(Self { alpha, beta })
        } else {
            Err(SimError::InvalidParameter(format!("Beta({alpha}, {beta})")))
        }
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Interior mode; only meaningful for alpha, beta > 1.
    pub fn mode(&self) -> f64 {
        (self.alpha - 1.0) / (self.alpha + self.beta - 2.0)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    pub fn sampler(&self) -> Beta<f64> {
        Beta::new(self.alpha, self.beta).expect("validated parameters")
    }
}

/// Conjugate posterior under a uniform prior: `Beta(successes + 1, errors + 1)`.
/// Precision uses false positives as errors, recall false negatives.
pub fn beta_posterior(tp: u64, errs: u64) -> BetaParams {
    BetaParams {
        alpha: tp as f64 + 1.0,
        beta: errs as f64 + 1.0,
    }
}

/// Dirichlet concentration per subgroup.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    alphas: BTreeMap<SubgroupKey, f64>,
}

impl DirichletParams {
    /// `α_k = n_k + 1`, no validation of the counts beyond the key set being
    /// non-empty.
    pub fn from_counts(counts: impl IntoIterator<Item = (SubgroupKey, u64)>) -> Result<Self, SimError> {
        let alphas: BTreeMap<_, _> = counts.into_iter().map(|(k, n)| (k, n as f64 + 1.0)).collect();
        if alphas.is_empty() {
            return Err(SimError::InvalidParameter("Dirichlet over no subgroups".into()));
        }
        Ok(Self { alphas })
    }

    /// Restricts the database weights to `keys`; absent keys get α = 1.
    pub fn over_keys(weights: &DatabaseWeights, keys: impl IntoIterator<Item = SubgroupKey>) -> Result<Self, SimError> {
        Self::from_counts(keys.into_iter().map(|k| (k, weights.get(&k).unwrap_or(0))))
    }

    pub fn alphas(&self) -> &BTreeMap<SubgroupKey, f64> {
        &self.alphas
    }

    pub fn keys(&self) -> impl Iterator<Item = SubgroupKey> + '_ {
        self.alphas.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Expected proportion of each subgroup, `α_k / Σα`.
    pub fn mean(&self) -> BTreeMap<SubgroupKey, f64> {
        let total: f64 = self.alphas.values().sum();
        self.alphas.iter().map(|(k, a)| (*k, a / total)).collect()
    }

    pub fn sampler(&self) -> DirichletSampler {
        DirichletSampler {
            gammas: self
                .alphas
                .values()
                .map(|&a| Gamma::new(a, 1.0).expect("alpha >= 1"))
                .collect(),
        }
    }
}

/// `α_k = n_k + 1` over all 48 subgroups.
pub fn dirichlet_params(weights: &DatabaseWeights) -> DirichletParams {
    DirichletParams::over_keys(weights, SubgroupKey::all()).expect("48 keys")
}

/// Draws probability vectors by normalizing independent Gamma(α_k, 1)
/// variates. Output order follows the parameter key order.
pub struct DirichletSampler {
    gammas: Vec<Gamma<f64>>,
}

impl DirichletSampler {
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let mut total = 0.0;
        for (slot, g) in out.iter_mut().zip(&self.gammas) {
            *slot = g.sample(rng);
            total += *slot;
        }
        out.iter_mut().for_each(|w| *w /= total);
    }

    pub fn dim(&self) -> usize {
        self.gammas.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::{LanguageCategory, MetadataConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn posterior_examples() {
        assert_eq!(beta_posterior(0, 0), BetaParams { alpha: 1.0, beta: 1.0 });
        assert_eq!(beta_posterior(9, 1), BetaParams { alpha: 10.0, beta: 2.0 });
        let b = beta_posterior(50, 10);
        assert_eq!((b.alpha, b.beta), (51.0, 11.0));
        assert!((b.mean() - 0.822_580_6).abs() < 1e-6);
        assert!((b.mode() - 0.833_333_3).abs() < 1e-6);
    }

    #[test]
    fn dirichlet_examples() {
        let a = SubgroupKey::new(LanguageCategory::De, MetadataConfig::TitleOnly);
        let b = SubgroupKey::new(LanguageCategory::En, MetadataConfig::TitleOnly);
        let d = DirichletParams::from_counts([(a, 0), (b, 0)]).unwrap();
        assert_eq!(d.alphas().values().copied().collect::<Vec<_>>(), vec![1.0, 1.0]);
        assert_eq!(d.mean()[&a], 0.5);

        let w = DatabaseWeights::new([(b, 17_915_165)].into_iter().collect()).unwrap();
        let d = dirichlet_params(&w);
        assert_eq!(d.len(), 48);
        assert_eq!(d.alphas()[&b], 17_915_166.0);
        assert_eq!(d.alphas()[&a], 1.0);
    }

    #[test]
    fn dirichlet_draws_are_probability_vectors() {
        let keys: Vec<_> = SubgroupKey::all().collect();
        let d = DirichletParams::from_counts(keys.iter().enumerate().map(|(i, k)| (*k, (i as u64) * 1_000_003))).unwrap();
        let s = d.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut w = vec![0.0; s.dim()];
        for _ in 0..1000 {
            s.sample_into(&mut rng, &mut w);
            assert!(w.iter().all(|&x| x >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn beta_params_validation() {
        assert!(BetaParams::new(0.0, 1.0).is_err());
        assert!(BetaParams::new(1.0, f64::NAN).is_err());
        assert!(BetaParams::new(0.5, 2.0).is_ok());
    }
}
