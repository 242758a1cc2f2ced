//! Mean-variance demand, market clearing, wealth accounting and the three
//! confidence-update rules.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::matrix::{ConfidenceMatrix, Matrix};
use crate::opinion::EpsilonProfile;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MarketError {
    #[error("invalid market parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: &'static str },
    #[error("demand is undefined when sigma = 0")]
    DegenerateVariance,
    #[error("market has no agents")]
    EmptyMarket,
    #[error("reference price {price} must be positive for relative confidence rules")]
    NonPositiveReference { price: f64 },
    #[error("fundamental price needs r > 0, got {r}")]
    NonPositiveRate { r: f64 },
    #[error("update propensity {index} is outside [0, 1]")]
    InvalidAlpha { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Scalar constants of the market.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct MarketParams {
    /// Risk-free rate per period.
    pub r: f64,
    /// CARA risk aversion.
    pub a: f64,
    /// Dividend standard deviation.
    pub sigma: f64,
    /// Outside supply per agent.
    pub z_s: f64,
    /// Mean dividend.
    pub y_bar: f64,
}

impl Default for MarketParams {
    fn default() -> Self {
        Self { r: 0.01, a: 1.0, sigma: 0.1, z_s: 0.001, y_bar: 0.03 }
    }
}

impl MarketParams {
    pub fn validate(&self) -> Result<(), MarketError> {
        let bad = |name, reason| Err(MarketError::InvalidParam { name, reason });
        if !self.r.is_finite() || self.r <= -1.0 {
            return bad("r", "must be finite and greater than -1");
        }
        if !self.a.is_finite() || self.a <= 0.0 {
            return bad("a", "must be finite and positive");
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return bad("sigma", "must be finite and nonnegative");
        }
        if !self.z_s.is_finite() || self.z_s < 0.0 {
            return bad("z_s", "must be finite and nonnegative");
        }
        if !self.y_bar.is_finite() {
            return bad("y_bar", "must be finite");
        }
        Ok(())
    }

    /// `a sigma^2 z_s`, the risk premium charged for the outside supply.
    pub fn risk_premium(&self) -> f64 {
        self.a * self.sigma * self.sigma * self.z_s
    }
}

/// `z = (x_next - (1+r) p) / (a sigma^2)`.
pub fn optimal_demand(x_next: f64, p: f64, params: &MarketParams) -> Result<f64, MarketError> {
    let var = params.a * params.sigma * params.sigma;
    if var == 0.0 {
        return Err(MarketError::DegenerateVariance);
    }
    Ok((x_next - (1.0 + params.r) * p) / var)
}

/// The price at which mean demand equals the outside supply:
/// `(1+r) p = mean(x_next) - a sigma^2 z_s`.
pub fn clearing_price(x_next: &[f64], params: &MarketParams) -> Result<f64, MarketError> {
    if x_next.is_empty() {
        return Err(MarketError::EmptyMarket);
    }
    if params.r == -1.0 {
        return Err(MarketError::InvalidParam { name: "r", reason: "must differ from -1" });
    }
    let mean = x_next.iter().sum::<f64>() / x_next.len() as f64;
    Ok((mean - params.risk_premium()) / (1.0 + params.r))
}

/// `p* = (y_bar - a sigma^2 z_s) / r` for i.i.d. dividends.
pub fn fundamental_price(params: &MarketParams) -> Result<f64, MarketError> {
    if !(params.r > 0.0) {
        return Err(MarketError::NonPositiveRate { r: params.r });
    }
    Ok((params.y_bar - params.risk_premium()) / params.r)
}

/// `w(t+1) = (1+r) w(t) + (p(t+1) + y(t+1) - (1+r) p(t)) z(t)`.
pub fn wealth_step(w: f64, z: f64, p_next: f64, y_next: f64, p: f64, r: f64) -> f64 {
    (1.0 + r) * w + (p_next + y_next - (1.0 + r) * p) * z
}

/// How agents choose whom to trust.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateRule {
    /// Trust agents whose opinion is within `eps_i` of one's own.
    BoundedConfidence,
    /// Trust agents whose opinion is within a fraction `eps_i` of the last price.
    PriceAdaptive,
    /// Trust agents whose opinion is within a fraction `eps_i` of `p*`.
    Fundamental { fundamental_price: f64 },
}

/// Whose opinion enters the relative-deviation test of the PA and FB rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TargetSetReading {
    /// Test each candidate `j` on its own opinion `x_j`.
    #[default]
    Trustee,
    /// Test the truster's opinion `x_i`: the set is either everyone or `{i}`.
    Truster,
}

impl UpdateRule {
    fn reference(&self, p_prev: f64) -> Result<Option<f64>, MarketError> {
        let r = match *self {
            UpdateRule::BoundedConfidence => return Ok(None),
            UpdateRule::PriceAdaptive => p_prev,
            UpdateRule::Fundamental { fundamental_price } => fundamental_price,
        };
        if r > 0.0 && r.is_finite() {
            Ok(Some(r))
        } else {
            Err(MarketError::NonPositiveReference { price: r })
        }
    }
}

/// Agents `i` trusts under `rule`, ascending; always contains `i`.
pub fn target_set(
    rule: &UpdateRule,
    reading: TargetSetReading,
    i: usize,
    x_prev: &[f64],
    p_prev: f64,
    eps_i: f64,
) -> Result<Vec<usize>, MarketError> {
    let reference = rule.reference(p_prev)?;
    let mut set = Vec::new();
    fill_target_row(reference, reading, i, x_prev, eps_i, |j| set.push(j));
    Ok(set)
}

fn fill_target_row(
    reference: Option<f64>,
    reading: TargetSetReading,
    i: usize,
    x: &[f64],
    eps_i: f64,
    mut emit: impl FnMut(usize),
) {
    match reference {
        None => {
            let xi = x[i];
            for (j, &xj) in x.iter().enumerate() {
                if (xi - xj).abs() <= eps_i {
                    emit(j);
                }
            }
        }
        Some(r) => {
            let close = |v: f64| ((r - v) / r).abs() <= eps_i;
            match reading {
                TargetSetReading::Trustee => {
                    for (j, &xj) in x.iter().enumerate() {
                        if j == i || close(xj) {
                            emit(j);
                        }
                    }
                }
                TargetSetReading::Truster => {
                    if close(x[i]) {
                        (0..x.len()).for_each(&mut emit);
                    } else {
                        emit(i);
                    }
                }
            }
        }
    }
}

/// `c_ij = 1/#I(i)` on the target set of each agent.
pub fn update_matrix(
    rule: &UpdateRule,
    reading: TargetSetReading,
    x_prev: &[f64],
    p_prev: f64,
    eps: &EpsilonProfile,
) -> Result<ConfidenceMatrix, MarketError> {
    let n = x_prev.len();
    if eps.len() != n {
        return Err(MarketError::DimensionMismatch { expected: n, found: eps.len() });
    }
    let reference = rule.reference(p_prev)?;
    let mut m = Matrix::zeros(n);
    let mut members = Vec::with_capacity(n);
    for i in 0..n {
        members.clear();
        fill_target_row(reference, reading, i, x_prev, eps[i], |j| members.push(j));
        let share = 1.0 / members.len() as f64;
        let row = m.row_mut(i);
        for &j in &members {
            row[j] = share;
        }
    }
    Ok(ConfidenceMatrix::from_matrix_unchecked(m))
}

/// Row-wise `alpha_i c + (1 - alpha_i) a_prev`.
pub fn blend(
    a_prev: &ConfidenceMatrix,
    c: &ConfidenceMatrix,
    alpha: &[f64],
) -> Result<ConfidenceMatrix, MarketError> {
    let n = a_prev.n();
    for found in [c.n(), alpha.len()] {
        if found != n {
            return Err(MarketError::DimensionMismatch { expected: n, found });
        }
    }
    if let Some(index) = alpha.iter().position(|a| !(0.0..=1.0).contains(a)) {
        return Err(MarketError::InvalidAlpha { index });
    }
    let mut m = a_prev.as_matrix().clone();
    for (i, &al) in alpha.iter().enumerate() {
        if al == 0.0 {
            continue;
        }
        let keep = 1.0 - al;
        for (w, &cw) in m.row_mut(i).iter_mut().zip(c.row(i)) {
            *w = al * cw + keep * *w;
        }
    }
    Ok(ConfidenceMatrix::from_matrix_unchecked(m))
}

/// Distribution family of the i.i.d. dividend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DividendLaw {
    #[default]
    Normal,
    /// Lognormal with mean `y_bar` and variance `sigma^2`; needs `y_bar > 0`.
    LogNormal,
}

/// One dividend `y ~ law(y_bar, sigma^2)`. With `sigma = 0` this is `y_bar`
/// and consumes no randomness.
pub fn draw_dividend<R: Rng + ?Sized>(
    params: &MarketParams,
    law: DividendLaw,
    rng: &mut R,
) -> Result<f64, MarketError> {
    if params.sigma == 0.0 {
        return Ok(params.y_bar);
    }
    match law {
        DividendLaw::Normal => {
            let d = Normal::new(params.y_bar, params.sigma)
                .map_err(|_| MarketError::InvalidParam { name: "sigma", reason: "must be finite" })?;
            Ok(d.sample(rng))
        }
        DividendLaw::LogNormal => {
            if !(params.y_bar > 0.0) {
                return Err(MarketError::InvalidParam {
                    name: "y_bar",
                    reason: "must be positive for lognormal dividends",
                });
            }
            let ratio = params.sigma / params.y_bar;
            let s2 = libm::log1p(ratio * ratio);
            let mu = libm::log(params.y_bar) - 0.5 * s2;
            let d = LogNormal::new(mu, libm::sqrt(s2))
                .map_err(|_| MarketError::InvalidParam { name: "sigma", reason: "must be finite" })?;
            Ok(d.sample(rng))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(r: f64, a: f64, sigma: f64, z_s: f64, y_bar: f64) -> MarketParams {
        MarketParams { r, a, sigma, z_s, y_bar }
    }

    #[test]
    fn demand() {
        assert_eq!(optimal_demand(11.0, 10.0, &params(0.0, 1.0, 1.0, 0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(optimal_demand(10.0, 8.0, &params(0.25, 1.0, 1.0, 0.0, 0.0)).unwrap(), 0.0);
        let z = optimal_demand(10.0, 10.0, &params(0.1, 2.0, 0.5, 0.0, 0.0)).unwrap();
        assert!((z + 2.0).abs() < 1e-12);
        assert_eq!(optimal_demand(1.0, 1.0, &params(0.0, 1.0, 0.0, 0.0, 0.0)), Err(MarketError::DegenerateVariance));
    }

    #[test]
    fn clearing() {
        // a sigma^2 z_s = 0.1
        let p = clearing_price(&[3.0; 4], &params(0.1, 1.0, 1.0, 0.1, 0.0)).unwrap();
        assert!((p - 2.9 / 1.1).abs() < 1e-12);
        let p = clearing_price(&[1.0, 2.0, 5.0], &params(0.0, 1.0, 1.0, 0.0, 0.0)).unwrap();
        assert!((p - 8.0 / 3.0).abs() < 1e-12);
        let p = clearing_price(&[1.0, 2.0, 3.0, 4.0], &params(0.0, 2.0, 0.5, 1.0, 0.0)).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
        assert_eq!(clearing_price(&[], &MarketParams::default()), Err(MarketError::EmptyMarket));
        assert!(clearing_price(&[1.0], &params(-1.0, 1.0, 1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn clearing_price_clears() {
        let pr = params(0.03, 1.7, 0.4, 0.2, 0.0);
        let x = [2.5, 3.1, 2.9, 4.0, 1.2];
        let p = clearing_price(&x, &pr).unwrap();
        let mean_z: f64 = x.iter().map(|&xi| optimal_demand(xi, p, &pr).unwrap()).sum::<f64>() / 5.0;
        assert!((mean_z - pr.z_s).abs() < 1e-10);
    }

    #[test]
    fn fundamental() {
        // a sigma^2 z_s = 0.1
        let p = fundamental_price(&params(0.05, 1.0, 1.0, 0.1, 0.6)).unwrap();
        assert!((p - 10.0).abs() < 1e-12);
        let p = fundamental_price(&params(0.05, 1.0, 1.0, 0.0, 0.6)).unwrap();
        assert!((p - 12.0).abs() < 1e-12);
        let p = fundamental_price(&params(0.1, 2.0, 0.5, 1.0, 1.0)).unwrap();
        assert!((p - 5.0).abs() < 1e-12);
        assert!(fundamental_price(&params(0.0, 1.0, 1.0, 0.0, 1.0)).is_err());
        assert!(fundamental_price(&params(-0.1, 1.0, 1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn wealth() {
        assert_eq!(wealth_step(100.0, 0.0, 11.0, 0.5, 10.0, 0.05), 105.0);
        assert!((wealth_step(100.0, 7.0, 10.0, 0.5, 10.0, 0.05) - 105.0).abs() < 1e-12);
        assert_eq!(wealth_step(100.0, 2.0, 11.0, 0.5, 10.0, 0.0), 103.0);
    }

    #[test]
    fn target_sets() {
        let x = [0.0, 0.5, 1.0];
        let bc = target_set(&UpdateRule::BoundedConfidence, TargetSetReading::Trustee, 0, &x, 1.0, 0.5).unwrap();
        assert_eq!(bc, vec![0, 1]);
        let x = [9.5, 12.0, 10.4];
        let pa = target_set(&UpdateRule::PriceAdaptive, TargetSetReading::Trustee, 1, &x, 10.0, 0.05).unwrap();
        assert_eq!(pa, vec![0, 1, 2]);
        let fb = UpdateRule::Fundamental { fundamental_price: 10.0 };
        let x = [12.0, 13.0, 15.0];
        for i in 0..3 {
            assert_eq!(target_set(&fb, TargetSetReading::Trustee, i, &x, 0.0, 0.05).unwrap(), vec![i]);
        }
    }

    #[test]
    fn literal_reading_depends_on_truster_only() {
        let x = [9.5, 12.0, 10.4];
        let r = UpdateRule::PriceAdaptive;
        assert_eq!(target_set(&r, TargetSetReading::Truster, 0, &x, 10.0, 0.05).unwrap(), vec![0, 1, 2]);
        assert_eq!(target_set(&r, TargetSetReading::Truster, 1, &x, 10.0, 0.05).unwrap(), vec![1]);
    }

    #[test]
    fn relative_rules_need_positive_reference() {
        let x = [1.0, 2.0];
        assert!(matches!(
            target_set(&UpdateRule::PriceAdaptive, TargetSetReading::Trustee, 0, &x, 0.0, 0.1),
            Err(MarketError::NonPositiveReference { .. })
        ));
        let fb = UpdateRule::Fundamental { fundamental_price: -3.0 };
        let eps = EpsilonProfile::uniform(2, 0.1).unwrap();
        assert!(update_matrix(&fb, TargetSetReading::Trustee, &x, 1.0, &eps).is_err());
    }

    #[test]
    fn update_matrix_cases() {
        let x = crate::opinion::OpinionVector::new(vec![0.0, 0.5, 1.0]).unwrap();
        let eps = EpsilonProfile::uniform(3, 0.5).unwrap();
        let c = update_matrix(&UpdateRule::BoundedConfidence, TargetSetReading::Trustee, &x, 1.0, &eps).unwrap();
        assert_eq!(c, crate::opinion::bc_matrix(&x, &eps).unwrap());

        let x = [10.1, 9.9, 10.0, 10.3];
        let eps = EpsilonProfile::uniform(4, 0.05).unwrap();
        let c = update_matrix(&UpdateRule::PriceAdaptive, TargetSetReading::Trustee, &x, 10.0, &eps).unwrap();
        assert_eq!(c, ConfidenceMatrix::uniform(4));

        let fb = UpdateRule::Fundamental { fundamental_price: 1.0 };
        let c = update_matrix(&fb, TargetSetReading::Trustee, &x, 10.0, &eps).unwrap();
        assert_eq!(c, ConfidenceMatrix::identity(4));
    }

    #[test]
    fn blending() {
        let i2 = ConfidenceMatrix::identity(2);
        let u2 = ConfidenceMatrix::uniform(2);
        assert_eq!(blend(&i2, &u2, &[0.0, 0.0]).unwrap(), i2);
        assert_eq!(blend(&i2, &u2, &[1.0, 1.0]).unwrap(), u2);
        let b = blend(&i2, &u2, &[0.5, 0.5]).unwrap();
        assert_eq!(b.as_matrix().to_rows(), vec![vec![0.75, 0.25], vec![0.25, 0.75]]);
        assert_eq!(blend(&i2, &u2, &[0.5, 1.5]), Err(MarketError::InvalidAlpha { index: 1 }));
        assert!(blend(&i2, &ConfidenceMatrix::identity(3), &[0.5, 0.5]).is_err());
    }

    #[test]
    fn dividends() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p0 = params(0.05, 1.0, 0.0, 0.0, 0.7);
        for _ in 0..10 {
            assert_eq!(draw_dividend(&p0, DividendLaw::Normal, &mut rng).unwrap(), 0.7);
        }
        let p = params(0.05, 1.0, 0.3, 0.0, 0.7);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| draw_dividend(&p, DividendLaw::Normal, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn dividend_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let p = params(0.05, 1.0, 0.5, 0.0, 1.5);
        let n = 1_000_000;
        for law in [DividendLaw::Normal, DividendLaw::LogNormal] {
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for _ in 0..n {
                let y = draw_dividend(&p, law, &mut rng).unwrap();
                sum += y;
                sum2 += y * y;
            }
            let mean = sum / n as f64;
            let var = sum2 / n as f64 - mean * mean;
            assert!((mean - 1.5).abs() < 5.0 * 0.5 / 1000.0, "{law:?} mean {mean}");
            assert!((var - 0.25).abs() < 0.01, "{law:?} var {var}");
        }
    }

    #[test]
    fn param_validation() {
        assert!(MarketParams::default().validate().is_ok());
        let bad = MarketParams { a: 0.0, ..MarketParams::default() };
        assert!(matches!(bad.validate(), Err(MarketError::InvalidParam { name: "a", .. })));
        let bad = MarketParams { r: -1.0, ..MarketParams::default() };
        assert!(matches!(bad.validate(), Err(MarketError::InvalidParam { name: "r", .. })));
        let bad = MarketParams { sigma: -0.1, ..MarketParams::default() };
        assert!(matches!(bad.validate(), Err(MarketError::InvalidParam { name: "sigma", .. })));
    }
}
