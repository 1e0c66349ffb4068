//! Descriptive statistics over weighted value lists (histogram form), so
//! large cardinality distributions never need expanding.
//!
//! Estimator choices are part of the feature-vector contract:
//! variance/standard deviation use the n-1 denominator, skewness is the
//! adjusted Fisher-Pearson coefficient, kurtosis is bias-adjusted sample
//! excess kurtosis, the quadratic mean uses the population form, and
//! percentiles use nearest-rank selection. Skewness and kurtosis fall back
//! to 0 when the variance is zero or the mass is too small to adjust.

/// (value, weight) pairs. Callers keep values sorted ascending where order
/// matters (percentiles, mode tie-breaks).
pub type Weighted<'a> = &'a [(f64, u64)];

pub fn total_mass(data: Weighted) -> u64 {
    data.iter().map(|(_, w)| *w).sum()
}

pub fn min(data: Weighted) -> f64 {
    data.iter().map(|(v, _)| *v).fold(f64::INFINITY, f64::min)
}

pub fn max(data: Weighted) -> f64 {
    data.iter().map(|(v, _)| *v).fold(f64::NEG_INFINITY, f64::max)
}

pub fn mean(data: Weighted) -> f64 {
    let n = total_mass(data) as f64;
    data.iter().map(|(v, w)| v * *w as f64).sum::<f64>() / n
}

/// Most frequent value; ties break toward the smallest value.
pub fn mode(data: Weighted) -> f64 {
    let mut best: Option<(f64, u64)> = None;
    for &(v, w) in data {
        match best {
            Some((bv, bw)) if w > bw || (w == bw && v < bv) => best = Some((v, w)),
            None => best = Some((v, w)),
            _ => {}
        }
    }
    best.map(|(v, _)| v).unwrap_or(f64::NAN)
}

fn central_moment(data: Weighted, mean: f64, order: i32) -> f64 {
    data.iter().map(|(v, w)| (v - mean).powi(order) * *w as f64).sum()
}

/// Sample variance (n-1 denominator); 0 for a single observation.
pub fn sample_variance(data: Weighted) -> f64 {
    let n = total_mass(data);
    if n < 2 {
        return 0.0;
    }
    central_moment(data, mean(data), 2) / (n - 1) as f64
}

pub fn sample_std(data: Weighted) -> f64 {
    sample_variance(data).sqrt()
}

/// sqrt(sum(x^2) / n), the population root mean square.
pub fn quadratic_mean(data: Weighted) -> f64 {
    let n = total_mass(data) as f64;
    (data.iter().map(|(v, w)| v * v * *w as f64).sum::<f64>() / n).sqrt()
}

/// Adjusted Fisher-Pearson skewness: g1 * sqrt(n(n-1)) / (n-2).
pub fn skewness(data: Weighted) -> f64 {
    let n = total_mass(data);
    if n < 3 {
        return 0.0;
    }
    let m = mean(data);
    let nf = n as f64;
    let m2 = central_moment(data, m, 2) / nf;
    if m2 == 0.0 {
        return 0.0;
    }
    let m3 = central_moment(data, m, 3) / nf;
    let g1 = m3 / m2.powf(1.5);
    g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0)
}

/// Bias-adjusted sample excess kurtosis.
pub fn kurtosis(data: Weighted) -> f64 {
    let n = total_mass(data);
    if n < 4 {
        return 0.0;
    }
    let s2 = sample_variance(data);
    if s2 == 0.0 {
        return 0.0;
    }
    let m = mean(data);
    let nf = n as f64;
    let m4 = central_moment(data, m, 4);
    (nf + 1.0) * nf / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0)) * m4 / (s2 * s2)
        - 3.0 * (nf - 1.0) * (nf - 1.0) / ((nf - 2.0) * (nf - 3.0))
}

/// Nearest-rank percentile: the value at 1-based rank ceil(q * n) of the
/// sorted expansion. `data` must be sorted ascending by value.
pub fn nearest_rank(data: Weighted, q: f64) -> f64 {
    let n = total_mass(data);
    debug_assert!(n > 0);
    let rank = ((q * n as f64).ceil() as u64).max(1).min(n);
    let mut seen = 0u64;
    for &(v, w) in data {
        seen += w;
        if seen >= rank {
            return v;
        }
    }
    data.last().map(|(v, _)| *v).unwrap_or(f64::NAN)
}
