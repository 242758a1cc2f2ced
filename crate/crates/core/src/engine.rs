//! One realization of the coupled opinion / network / price dynamics.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::market::{
    blend, clearing_price, draw_dividend, optimal_demand, update_matrix, wealth_step, DividendLaw,
    MarketError, MarketParams, TargetSetReading, UpdateRule,
};
use crate::matrix::ConfidenceMatrix;
use crate::opinion::{EpsilonProfile, OpinionVector};

/// Prices beyond this magnitude abort the run.
pub const PRICE_LIMIT: f64 = 1e12;

/// How dividend randomness reaches opinions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum NoiseMode {
    /// `x_i += eta_i`, `eta_i ~ N(0, sigma^2)` independently per agent.
    #[default]
    Idiosyncratic,
    /// `x_i += y - y_bar` with the step's realized dividend, same for all.
    Common,
}

impl NoiseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseMode::Idiosyncratic => "idiosyncratic",
            NoiseMode::Common => "common",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("price {price} left the finite range at t = {t}")]
    NumericalOverflow { t: usize, price: f64 },
}

/// Everything about a run that does not change over time.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineSetup {
    pub rule: UpdateRule,
    pub reading: TargetSetReading,
    pub params: MarketParams,
    pub alpha: Vec<f64>,
    pub eps: EpsilonProfile,
    pub noise: NoiseMode,
    pub dividend: DividendLaw,
    /// Track per-agent wealth and holdings (needs `sigma > 0`).
    pub track_wealth: bool,
}

/// What one step produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub t: usize,
    pub price: f64,
    pub dividend: f64,
}

/// Engine state `(x(t), A(t), p(t))` plus the random stream driving it.
#[derive(Debug, Clone)]
pub struct MarketEngine {
    setup: EngineSetup,
    x: OpinionVector,
    a: ConfidenceMatrix,
    p: f64,
    t: usize,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    wealth: Option<(Vec<f64>, Vec<f64>)>,
}

impl MarketEngine {
    /// Starts from `x(0)`. `A(0)` is the rule applied to `x(0)` with full
    /// propensity and `p(0)` clears `x(0)`.
    pub fn new(setup: EngineSetup, x0: OpinionVector, rng: ChaCha8Rng) -> Result<Self, EngineError> {
        let n = x0.len();
        setup.params.validate()?;
        for found in [setup.alpha.len(), setup.eps.len()] {
            if found != n {
                return Err(MarketError::DimensionMismatch { expected: n, found }.into());
            }
        }
        if let Some(index) = setup.alpha.iter().position(|a| !(0.0..=1.0).contains(a)) {
            return Err(MarketError::InvalidAlpha { index }.into());
        }
        let p = clearing_price(&x0, &setup.params)?;
        check_price(0, p)?;
        let a = update_matrix(&setup.rule, setup.reading, &x0, p, &setup.eps)?;
        let sigma = setup.params.sigma;
        let noise = (sigma > 0.0 && setup.noise == NoiseMode::Idiosyncratic)
            .then(|| Normal::new(0.0, sigma).expect("sigma validated finite"));
        let wealth = if setup.track_wealth && sigma > 0.0 {
            let z = x0.iter().map(|&xi| optimal_demand(xi, p, &setup.params)).collect::<Result<_, _>>()?;
            Some((alloc::vec![0.0; n], z))
        } else {
            None
        };
        Ok(Self { setup, x: x0, a, p, t: 0, rng, noise, wealth })
    }

    pub fn setup(&self) -> &EngineSetup {
        &self.setup
    }

    pub fn opinions(&self) -> &OpinionVector {
        &self.x
    }

    pub fn confidence(&self) -> &ConfidenceMatrix {
        &self.a
    }

    pub fn price(&self) -> f64 {
        self.p
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Wealth `w_i(t)`, when tracked. Starts at zero.
    pub fn wealth(&self) -> Option<&[f64]> {
        self.wealth.as_ref().map(|(w, _)| w.as_slice())
    }

    /// Holdings `z_i(t)`, when tracked.
    pub fn holdings(&self) -> Option<&[f64]> {
        self.wealth.as_ref().map(|(_, z)| z.as_slice())
    }

    /// Multiplies the opinions of `agents` by `factor`. Out-of-range indices
    /// are ignored; returns how many agents were changed.
    pub fn scale_opinions(&mut self, agents: &[usize], factor: f64) -> usize {
        let x = self.x.as_mut_slice();
        let mut count = 0;
        for &i in agents {
            if let Some(v) = x.get_mut(i) {
                *v *= factor;
                count += 1;
            }
        }
        count
    }

    /// Advances from `t` to `t + 1`.
    pub fn step(&mut self) -> Result<StepOutcome, EngineError> {
        let s = &self.setup;
        let c = update_matrix(&s.rule, s.reading, &self.x, self.p, &s.eps)?;
        self.a = blend(&self.a, &c, &s.alpha)?;

        let y = draw_dividend(&s.params, s.dividend, &mut self.rng)?;
        let mut x = self.a.as_matrix().mul_vec(&self.x).expect("square of matching size");
        match (s.noise, self.noise.as_ref()) {
            (NoiseMode::Idiosyncratic, Some(eta)) => {
                for v in &mut x {
                    *v += eta.sample(&mut self.rng);
                }
            }
            (NoiseMode::Common, _) => {
                let shock = y - s.params.y_bar;
                for v in &mut x {
                    *v += shock;
                }
            }
            _ => {}
        }
        let p = clearing_price(&x, &s.params)?;
        let t = self.t + 1;
        check_price(t, p)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(EngineError::NumericalOverflow { t, price: p });
        }

        if let Some((w, z)) = self.wealth.as_mut() {
            let r = s.params.r;
            for ((wi, zi), &xi) in w.iter_mut().zip(z.iter_mut()).zip(&x) {
                *wi = wealth_step(*wi, *zi, p, y, self.p, r);
                *zi = optimal_demand(xi, p, &s.params)?;
            }
        }

        self.x = OpinionVector::from_vec_unchecked(x);
        self.p = p;
        self.t = t;
        Ok(StepOutcome { t, price: p, dividend: y })
    }
}

fn check_price(t: usize, price: f64) -> Result<(), EngineError> {
    if price.is_finite() && price.abs() <= PRICE_LIMIT {
        Ok(())
    } else {
        Err(EngineError::NumericalOverflow { t, price })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;

    fn setup(rule: UpdateRule, sigma: f64, alpha: f64, eps: f64, n: usize) -> EngineSetup {
        EngineSetup {
            rule,
            reading: TargetSetReading::Trustee,
            params: MarketParams { r: 0.05, a: 1.0, sigma, z_s: 0.01, y_bar: 0.15 },
            alpha: vec![alpha; n],
            eps: EpsilonProfile::uniform(n, eps).unwrap(),
            noise: NoiseMode::Idiosyncratic,
            dividend: DividendLaw::Normal,
            track_wealth: false,
        }
    }

    fn x(v: &[f64]) -> OpinionVector {
        OpinionVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn wide_bounded_confidence_pools_to_mean_in_one_step() {
        let s = setup(UpdateRule::BoundedConfidence, 0.0, 0.5, 10.0, 4);
        let mut e = MarketEngine::new(s, x(&[1.0, 2.0, 3.0, 6.0]), ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(e.confidence(), &ConfidenceMatrix::uniform(4));
        let expected = 3.0 / 1.05;
        for _ in 0..5 {
            let out = e.step().unwrap();
            assert!((out.price - expected).abs() < 1e-12);
            assert_eq!(out.dividend, 0.15);
        }
    }

    #[test]
    fn same_seed_same_path() {
        let path = |seed| {
            let s = setup(UpdateRule::BoundedConfidence, 0.3, 0.5, 0.4, 5);
            let mut e = MarketEngine::new(s, x(&[2.0, 2.5, 3.0, 3.5, 4.0]), ChaCha8Rng::seed_from_u64(seed)).unwrap();
            (0..50).map(|_| e.step().unwrap().price.to_bits()).collect::<Vec<_>>()
        };
        assert_eq!(path(3), path(3));
        assert_ne!(path(3), path(4));
    }

    #[test]
    fn overflow_is_reported() {
        let s = setup(UpdateRule::BoundedConfidence, 0.0, 0.5, 1.0, 2);
        let e = MarketEngine::new(s, x(&[1e13, 3e13]), ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(e, Err(EngineError::NumericalOverflow { t: 0, .. })));
    }

    #[test]
    fn common_noise_shifts_everyone_equally() {
        let mut s = setup(UpdateRule::BoundedConfidence, 0.2, 1.0, 0.0, 3);
        s.noise = NoiseMode::Common;
        let mut e = MarketEngine::new(s, x(&[1.0, 2.0, 3.0]), ChaCha8Rng::seed_from_u64(8)).unwrap();
        let before: Vec<f64> = e.opinions().to_vec();
        let out = e.step().unwrap();
        let shock = out.dividend - 0.15;
        for (a, b) in e.opinions().iter().zip(before) {
            assert!((a - b - shock).abs() < 1e-12);
        }
    }

    #[test]
    fn wealth_tracking() {
        let mut s = setup(UpdateRule::BoundedConfidence, 0.5, 0.5, 1.0, 3);
        s.track_wealth = true;
        let mut e = MarketEngine::new(s, x(&[2.0, 3.0, 4.0]), ChaCha8Rng::seed_from_u64(1)).unwrap();
        let z0 = e.holdings().unwrap().to_vec();
        let p0 = e.price();
        let out = e.step().unwrap();
        for (w, z) in e.wealth().unwrap().iter().zip(z0) {
            assert!((w - (out.price + out.dividend - 1.05 * p0) * z).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_scales_selected_agents() {
        let s = setup(UpdateRule::BoundedConfidence, 0.0, 0.5, 1.0, 3);
        let mut e = MarketEngine::new(s, x(&[2.0, 2.0, 2.0]), ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(e.scale_opinions(&[0, 1, 7], 0.5), 2);
        assert_eq!(e.opinions().to_vec(), vec![1.0, 1.0, 2.0]);
    }
}
