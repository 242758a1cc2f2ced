use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {needed} prices, got {found}")]
    TooShort { needed: usize, found: usize },
    #[error("price at index {index} is zero, return undefined")]
    ZeroPrice { index: usize },
    #[error("returns have zero variance")]
    DegenerateSeries,
}

/// Moments of the simple returns of a price path.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnStats {
    pub returns: Vec<f64>,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// `r(t) = p(t) / p(t-1) - 1`.
pub fn returns(prices: &[f64]) -> Result<Vec<f64>, StatsError> {
    if let Some(index) = prices[..prices.len().saturating_sub(1)].iter().position(|&p| p == 0.0) {
        return Err(StatsError::ZeroPrice { index });
    }
    Ok(prices.windows(2).map(|w| w[1] / w[0] - 1.0).collect())
}

/// Biased moment estimators `m3 / m2^1.5` and `m4 / m2^2 - 3`.
pub fn moments(sample: &[f64]) -> Result<(f64, f64), StatsError> {
    if sample.len() < 2 {
        return Err(StatsError::TooShort { needed: 2, found: sample.len() });
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in sample {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    // relative to the scale of the data, not an absolute epsilon
    let scale = sample.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = scale * 1e-14;
    if m2 <= floor * floor {
        return Err(StatsError::DegenerateSeries);
    }
    Ok((m3 / libm::pow(m2, 1.5), m4 / (m2 * m2) - 3.0))
}

pub fn return_stats(prices: &[f64]) -> Result<ReturnStats, StatsError> {
    if prices.len() < 3 {
        return Err(StatsError::TooShort { needed: 3, found: prices.len() });
    }
    let returns = returns(prices)?;
    let (skewness, excess_kurtosis) = moments(&returns)?;
    Ok(ReturnStats { returns, skewness, excess_kurtosis })
}

/// Same as [`return_stats`] with the returns in `[from, to)` removed; the
/// window is in return indices (return `k` compares prices `k` and `k+1`).
pub fn return_stats_trimmed(prices: &[f64], from: usize, to: usize) -> Result<ReturnStats, StatsError> {
    if prices.len() < 3 {
        return Err(StatsError::TooShort { needed: 3, found: prices.len() });
    }
    let all = returns(prices)?;
    let kept: Vec<f64> =
        all.iter().enumerate().filter(|(k, _)| !(from..to).contains(k)).map(|(_, &r)| r).collect();
    let (skewness, excess_kurtosis) = moments(&kept)?;
    Ok(ReturnStats { returns: kept, skewness, excess_kurtosis })
}
