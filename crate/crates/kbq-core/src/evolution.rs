//! Release-over-release completeness measures and the growth regression.
//!
//! Property completeness compares one property's frequency between two
//! consecutive releases, either raw or normalized by the class entity count.
//! Growth fits an ordinary least-squares line through all but the latest
//! release (time measured in whole days since the first) and scores the
//! latest release by its residual relative to the mean absolute residual of
//! the fitted points.

use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::profile::ClassProfile;

#[derive(Debug, thiserror::Error)]
pub enum EvolutionError {
    #[error("entity count is zero; normalized frequency is undefined")]
    ZeroEntityCount,
    #[error("completeness over an empty row set is undefined")]
    EmptyRowSet,
    #[error("growth analysis needs at least 3 releases, got {0}")]
    InsufficientPoints(usize),
    #[error("all fitted releases share one date; regression is degenerate")]
    DegenerateFit,
    #[error("release dates must be strictly ascending")]
    UnorderedDates,
    #[error("writing report: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompletenessMode {
    Raw,
    Normalized,
}

impl std::fmt::Display for CompletenessMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CompletenessMode::Raw => write!(f, "raw"),
            CompletenessMode::Normalized => write!(f, "normalized"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    /// Complete when the current measure is >= the previous one.
    Weak,
    /// Complete only when the current measure strictly exceeds the previous.
    Strict,
}

/// NF(p, C) = freq(p, C) / count(C). May exceed 1 for multi-valued properties.
pub fn normalized_frequency(freq: u64, entity_count: u64) -> Result<f64, EvolutionError> {
    if entity_count == 0 {
        return Err(EvolutionError::ZeroEntityCount);
    }
    Ok(freq as f64 / entity_count as f64)
}

/// Compare one property between two releases: 1 when the chosen measure did
/// not drop (weak) or grew (strict), else 0.
pub fn property_completeness(
    prev: (u64, u64),
    cur: (u64, u64),
    mode: CompletenessMode,
    strictness: Strictness,
) -> Result<u8, EvolutionError> {
    let (measure_prev, measure_cur) = match mode {
        CompletenessMode::Raw => (prev.0 as f64, cur.0 as f64),
        CompletenessMode::Normalized => {
            (normalized_frequency(prev.0, prev.1)?, normalized_frequency(cur.0, cur.1)?)
        }
    };
    let holds = match strictness {
        Strictness::Weak => measure_cur >= measure_prev,
        Strictness::Strict => measure_cur > measure_prev,
    };
    Ok(holds as u8)
}

/// One property's completeness comparison between two releases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessRow {
    pub property: String,
    pub freq_prev: u64,
    pub freq_cur: u64,
    pub nf_prev: f64,
    pub nf_cur: f64,
    pub complete: u8,
    pub mode: CompletenessMode,
    pub strictness: Strictness,
}

/// Per-class completeness report over one release pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCompletenessReport {
    pub class: String,
    pub release_prev: String,
    pub release_cur: String,
    pub rows: Vec<CompletenessRow>,
    pub class_completeness: f64,
}

/// Proportion of complete properties.
pub fn class_completeness(rows: &[CompletenessRow]) -> Result<f64, EvolutionError> {
    if rows.is_empty() {
        return Err(EvolutionError::EmptyRowSet);
    }
    let ones: u64 = rows.iter().map(|r| r.complete as u64).sum();
    Ok(ones as f64 / rows.len() as f64)
}

/// Build the completeness report for the given properties over two profiles
/// of the same class.
pub fn compare_releases(
    prev: &ClassProfile,
    cur: &ClassProfile,
    properties: &[String],
    mode: CompletenessMode,
    strictness: Strictness,
) -> Result<ClassCompletenessReport, EvolutionError> {
    let mut rows = Vec::with_capacity(properties.len());
    for property in properties {
        let freq_prev = prev.properties.get(property).map_or(0, |s| s.freq);
        let freq_cur = cur.properties.get(property).map_or(0, |s| s.freq);
        let complete = property_completeness(
            (freq_prev, prev.entity_count),
            (freq_cur, cur.entity_count),
            mode,
            strictness,
        )?;
        // informational NF columns; 0 when a count is zero in raw mode
        let nf = |freq: u64, count: u64| if count == 0 { 0.0 } else { freq as f64 / count as f64 };
        rows.push(CompletenessRow {
            property: property.clone(),
            freq_prev,
            freq_cur,
            nf_prev: nf(freq_prev, prev.entity_count),
            nf_cur: nf(freq_cur, cur.entity_count),
            complete,
            mode,
            strictness,
        });
    }
    let class_completeness = class_completeness(&rows)?;
    Ok(ClassCompletenessReport {
        class: prev.class.clone(),
        release_prev: prev.release.clone(),
        release_cur: cur.release.clone(),
        rows,
        class_completeness,
    })
}

/// Entity counts of one class over the release series, ascending by date.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSeries {
    pub class: String,
    pub points: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub release_id: String,
    pub date: NaiveDate,
    pub count: u64,
}

/// Regression outcome for the newest release of a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthResult {
    /// Fitted slope, entities per day.
    pub slope: f64,
    pub intercept: f64,
    pub predicted_last: f64,
    pub residual_last: f64,
    pub mean_abs_residual: f64,
    /// residual_last / mean_abs_residual; +inf when the fit is exact but the
    /// last point deviates.
    pub nd: f64,
    /// 1 iff nd >= 1.
    pub growth: u8,
}

/// Fit entity counts against elapsed days and score the newest release.
///
/// The line is fitted on releases 1..n-1; the mean absolute residual is taken
/// over those fitted releases, and the newest release contributes only its
/// own residual against the prediction.
pub fn growth_analysis(series: &CountSeries) -> Result<GrowthResult, EvolutionError> {
    let n = series.points.len();
    if n < 3 {
        return Err(EvolutionError::InsufficientPoints(n));
    }
    if series.points.windows(2).any(|w| w[0].date >= w[1].date) {
        return Err(EvolutionError::UnorderedDates);
    }
    let origin = series.points[0].date;
    let days: Vec<f64> =
        series.points.iter().map(|p| (p.date - origin).num_days() as f64).collect();
    let counts: Vec<f64> = series.points.iter().map(|p| p.count as f64).collect();

    let fit_t = &days[..n - 1];
    let fit_y = &counts[..n - 1];
    let m = fit_t.len() as f64;
    let mean_t = fit_t.iter().sum::<f64>() / m;
    let mean_y = fit_y.iter().sum::<f64>() / m;
    let sxx: f64 = fit_t.iter().map(|t| (t - mean_t).powi(2)).sum();
    if sxx == 0.0 {
        return Err(EvolutionError::DegenerateFit);
    }
    let sxy: f64 = fit_t.iter().zip(fit_y).map(|(t, y)| (t - mean_t) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;

    let predicted_last = slope * days[n - 1] + intercept;
    let residual_last = (counts[n - 1] - predicted_last).abs();
    let mean_abs_residual = fit_t
        .iter()
        .zip(fit_y)
        .map(|(t, y)| (slope * t + intercept - y).abs())
        .sum::<f64>()
        / m;

    let nd = if mean_abs_residual == 0.0 {
        if residual_last == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        residual_last / mean_abs_residual
    };
    Ok(GrowthResult {
        slope,
        intercept,
        predicted_last,
        residual_last,
        mean_abs_residual,
        nd,
        growth: (nd >= 1.0) as u8,
    })
}

/// Write the completeness report CSV. `provenance` becomes a leading comment
/// line when given.
pub fn write_completeness_csv<W: Write>(
    mut out: W,
    report: &ClassCompletenessReport,
    provenance: Option<&str>,
) -> Result<(), EvolutionError> {
    if let Some(line) = provenance {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "class",
        "property",
        "release_prev",
        "release_cur",
        "freq_prev",
        "freq_cur",
        "nf_prev",
        "nf_cur",
        "complete",
    ])?;
    for row in &report.rows {
        w.write_record([
            report.class.as_str(),
            row.property.as_str(),
            report.release_prev.as_str(),
            report.release_cur.as_str(),
            &row.freq_prev.to_string(),
            &row.freq_cur.to_string(),
            &row.nf_prev.to_string(),
            &row.nf_cur.to_string(),
            &row.complete.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write one growth CSV row per class result.
pub fn write_growth_csv<W: Write>(
    mut out: W,
    results: &[(String, GrowthResult)],
    provenance: Option<&str>,
) -> Result<(), EvolutionError> {
    if let Some(line) = provenance {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "class",
        "slope",
        "intercept",
        "predicted",
        "residual",
        "mean_residual",
        "nd",
        "growth",
    ])?;
    for (class, g) in results {
        w.write_record([
            class.as_str(),
            &g.slope.to_string(),
            &g.intercept.to_string(),
            &g.predicted_last.to_string(),
            &g.residual_last.to_string(),
            &g.mean_abs_residual.to_string(),
            &g.nd.to_string(),
            &g.growth.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

impl From<csv::Error> for EvolutionError {
    fn from(e: csv::Error) -> Self {
        EvolutionError::Io(std::io::Error::other(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series(class: &str, points: &[(&str, u64)]) -> CountSeries {
        CountSeries {
            class: class.to_string(),
            points: points
                .iter()
                .map(|(date, count)| SeriesPoint {
                    release_id: date.to_string(),
                    date: NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap(),
                    count: *count,
                })
                .collect(),
        }
    }

    const TABLE1_DATES: [&str; 8] = [
        "2016-03-11",
        "2016-03-22",
        "2016-04-09",
        "2016-05-03",
        "2016-05-13",
        "2016-05-27",
        "2016-06-15",
        "2016-09-09",
    ];
    const EVENT_COUNTS: [u64; 8] = [605, 605, 1301, 1301, 1409, 1883, 2182, 689];
    const PLACE_COUNTS: [u64; 8] = [20692, 20692, 27858, 26066, 26827, 25828, 41018, 44968];

    fn table1(counts: &[u64; 8]) -> CountSeries {
        let points: Vec<(&str, u64)> =
            TABLE1_DATES.iter().copied().zip(counts.iter().copied()).collect();
        series("c", &points)
    }

    #[test]
    fn normalized_frequency_examples() {
        assert_abs_diff_eq!(
            normalized_frequency(1632, 2182).unwrap(),
            0.7479376718606783,
            epsilon = 1e-12
        );
        assert_eq!(normalized_frequency(0, 10).unwrap(), 0.0);
        assert_eq!(normalized_frequency(20, 10).unwrap(), 2.0);
        assert!(matches!(normalized_frequency(5, 0), Err(EvolutionError::ZeroEntityCount)));
    }

    #[test]
    fn completeness_modes() {
        use CompletenessMode::*;
        use Strictness::*;
        // foaf:Person dbo:height grows in raw numbers
        assert_eq!(property_completeness((139445, 1840598), (148192, 2703493), Raw, Weak).unwrap(), 1);
        // but its normalized frequency drops
        assert_eq!(
            property_completeness((139445, 1840598), (148192, 2703493), Normalized, Weak).unwrap(),
            0
        );
        // lode:atPlace drops in both measures
        assert_eq!(property_completeness((1632, 2182), (424, 689), Raw, Weak).unwrap(), 0);
        assert_eq!(property_completeness((1632, 2182), (424, 689), Normalized, Weak).unwrap(), 0);
        // equal frequencies and counts: weak holds, strict does not
        assert_eq!(property_completeness((10, 5), (10, 5), Normalized, Weak).unwrap(), 1);
        assert_eq!(property_completeness((10, 5), (10, 5), Normalized, Strict).unwrap(), 0);
    }

    #[test]
    fn class_completeness_ratios() {
        let mk = |complete: u8| CompletenessRow {
            property: "p".into(),
            freq_prev: 0,
            freq_cur: 0,
            nf_prev: 0.0,
            nf_cur: 0.0,
            complete,
            mode: CompletenessMode::Raw,
            strictness: Strictness::Weak,
        };
        let rows: Vec<_> = (0..396).map(|i| mk((i < 265) as u8)).collect();
        assert_abs_diff_eq!(class_completeness(&rows).unwrap(), 0.66919191919, epsilon = 1e-9);
        let rows: Vec<_> = (0..170).map(|i| mk((i < 120) as u8)).collect();
        assert_abs_diff_eq!(class_completeness(&rows).unwrap(), 0.70588235294, epsilon = 1e-9);
        let all_ones: Vec<_> = (0..7).map(|_| mk(1)).collect();
        assert_eq!(class_completeness(&all_ones).unwrap(), 1.0);
        assert!(matches!(class_completeness(&[]), Err(EvolutionError::EmptyRowSet)));
    }

    #[test]
    fn growth_reproduces_event_series() {
        let g = growth_analysis(&table1(&EVENT_COUNTS)).unwrap();
        assert_abs_diff_eq!(g.predicted_last, 3511.545, epsilon = 0.01);
        assert_abs_diff_eq!(g.residual_last, 2822.545, epsilon = 0.01);
        assert_abs_diff_eq!(g.mean_abs_residual, 125.1784, epsilon = 0.001);
        assert_abs_diff_eq!(g.nd, 22.54818, epsilon = 0.0001);
        assert_eq!(g.growth, 1);
    }

    #[test]
    fn growth_reproduces_place_series() {
        let g = growth_analysis(&table1(&PLACE_COUNTS)).unwrap();
        assert_abs_diff_eq!(g.predicted_last, 47941.57, epsilon = 0.01);
        assert_abs_diff_eq!(g.mean_abs_residual, 3159.551, epsilon = 0.01);
        assert_abs_diff_eq!(g.nd, 0.9411357, epsilon = 1e-6);
        assert_eq!(g.growth, 0);
    }

    #[test]
    fn perfectly_linear_series_has_zero_nd() {
        let pts: Vec<(String, u64)> = (0..6)
            .map(|i| (format!("2020-01-{:02}", 1 + 2 * i), 10 + 4 * i as u64))
            .collect();
        let pts: Vec<(&str, u64)> = pts.iter().map(|(d, c)| (d.as_str(), *c)).collect();
        let g = growth_analysis(&series("c", &pts)).unwrap();
        assert_abs_diff_eq!(g.residual_last, 0.0, epsilon = 1e-9);
        assert_eq!(g.nd, 0.0);
        assert_eq!(g.growth, 0);
    }

    #[test]
    fn exact_fit_with_deviating_last_point_is_maximal_anomaly() {
        let g = growth_analysis(&series(
            "c",
            &[("2020-01-01", 10), ("2020-01-02", 12), ("2020-01-03", 100)],
        ))
        .unwrap();
        assert!(g.nd.is_infinite());
        assert_eq!(g.growth, 1);
    }

    #[test]
    fn growth_preconditions() {
        assert!(matches!(
            growth_analysis(&series("c", &[("2020-01-01", 1), ("2020-01-02", 2)])),
            Err(EvolutionError::InsufficientPoints(2))
        ));
        let mut s = series("c", &[("2020-01-01", 1), ("2020-01-02", 2), ("2020-01-03", 3)]);
        s.points[1].date = s.points[0].date;
        assert!(matches!(growth_analysis(&s), Err(EvolutionError::UnorderedDates)));
    }

    #[test]
    fn scale_and_translation_invariance() {
        let base = table1(&EVENT_COUNTS);
        let g0 = growth_analysis(&base).unwrap();

        let mut scaled = base.clone();
        for p in &mut scaled.points {
            p.count *= 7;
        }
        let g1 = growth_analysis(&scaled).unwrap();
        assert_abs_diff_eq!(g0.nd, g1.nd, epsilon = 1e-9);
        assert_eq!(g0.growth, g1.growth);

        let mut shifted = base.clone();
        for p in &mut shifted.points {
            p.date = p.date.checked_add_days(chrono::Days::new(365)).unwrap();
        }
        let g2 = growth_analysis(&shifted).unwrap();
        assert_abs_diff_eq!(g0.nd, g2.nd, epsilon = 1e-9);
    }
}
