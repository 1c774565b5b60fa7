//! Corpus statistics: Welch's t-test, Pearson correlation, the regularized
//! incomplete beta function behind both p-values, fiction/nonfiction
//! comparisons and per-decade trends.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::alignment::VolumeMetadata;
use crate::metrics::NetworkMetrics;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("sample too small: need at least {needed}, got {got}")]
    SampleTooSmall { needed: usize, got: usize },
    #[error("zero variance: no statistic computable")]
    ZeroVariance,
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("argument outside the function's domain: {0}")]
    DomainError(String),
    #[error("no row carries fiction/nonfiction metadata")]
    MissingMetadata,
    #[error("need at least 3 decades with data, got {0}")]
    TooFewDecades(usize),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
}

/// Lanczos approximation (g = 7, 9 terms) of `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 10_000;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `I_x(a, b)`, the regularized incomplete beta function.
///
/// Uses the continued fraction directly for `x < (a+1)/(a+b+2)` and the
/// symmetry `I_x(a,b) = 1 − I_{1−x}(b,a)` otherwise.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64, StatsError> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(StatsError::DomainError(format!("a = {a}, b = {b}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(StatsError::DomainError(format!("x = {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    let value = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Two-sided p-value of a Student-t statistic, `I_{ν/(ν+t²)}(ν/2, 1/2)`.
pub fn student_t_two_sided_p(t: f64, df: f64) -> Result<f64, StatsError> {
    if t.is_infinite() {
        return Ok(0.0);
    }
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the `n − 1` denominator.
fn variance(xs: &[f64], mean: f64) -> f64 {
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub degrees_of_freedom: f64,
    /// Two-sided.
    pub p_value: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub n_x: usize,
    pub n_y: usize,
}

/// Welch's unequal-variance t-test of `mean(xs) − mean(ys)`.
pub fn welch_t_test(xs: &[f64], ys: &[f64]) -> Result<TTestResult, StatsError> {
    for s in [xs, ys] {
        if s.len() < 2 {
            return Err(StatsError::SampleTooSmall {
                needed: 2,
                got: s.len(),
            });
        }
    }
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let (mx, my) = (mean(xs), mean(ys));
    let vx = variance(xs, mx) / nx;
    let vy = variance(ys, my) / ny;
    let se2 = vx + vy;
    if se2 == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let t = (mx - my) / se2.sqrt();
    let df = se2 * se2 / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: student_t_two_sided_p(t, df)?,
        mean_x: mx,
        mean_y: my,
        n_x: xs.len(),
        n_y: ys.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    /// Two-sided, from `t = r √((n−2)/(1−r²))` with `n − 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::SampleTooSmall { needed: 3, got: n });
    }
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    // ν/(ν+t²) simplifies to 1 − r²
    let p_value = regularized_incomplete_beta(df / 2.0, 0.5, 1.0 - r * r)?;
    Ok(CorrelationResult { r, p_value, n })
}

/// Fiction / nonfiction split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Genre {
    Fiction,
    Nonfiction,
}

impl Genre {
    pub const ALL: [Genre; 2] = [Genre::Fiction, Genre::Nonfiction];

    pub fn as_str(self) -> &'static str {
        match self {
            Genre::Fiction => "fiction",
            Genre::Nonfiction => "nonfiction",
        }
    }

    fn of(meta: &VolumeMetadata) -> Option<Genre> {
        meta.is_fiction
            .map(|f| if f { Genre::Fiction } else { Genre::Nonfiction })
    }
}

/// A metrics row joined with its (optional) catalog metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub metrics: NetworkMetrics,
    pub metadata: Option<VolumeMetadata>,
}

fn check_metric(metric: &str) -> Result<(), StatsError> {
    if NetworkMetrics::is_known_metric(metric) {
        Ok(())
    } else {
        Err(StatsError::UnknownMetric(metric.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupComparison {
    pub metric: String,
    /// `x` = fiction, `y` = nonfiction.
    pub test: TTestResult,
    /// Rows with fiction metadata whose metric is absent.
    pub excluded_absent: usize,
}

impl GroupComparison {
    pub fn fiction_mean(&self) -> f64 {
        self.test.mean_x
    }

    pub fn nonfiction_mean(&self) -> f64 {
        self.test.mean_y
    }

    /// e.g. `node_count: 22.14 v. 42.69 (fiction v. nonfiction; t = -3.10, df = 51.2, p = 3.1e-3)`
    pub fn summary(&self) -> String {
        format!(
            "{}: {:.2} v. {:.2} (fiction v. nonfiction; t = {:.2}, df = {:.1}, p = {:.1e})",
            self.metric,
            self.fiction_mean(),
            self.nonfiction_mean(),
            self.test.t_statistic,
            self.test.degrees_of_freedom,
            self.test.p_value
        )
    }
}

/// Welch test of one metric between fiction (x) and nonfiction (y) rows.
pub fn group_compare(rows: &[AnalysisRow], metric: &str) -> Result<GroupComparison, StatsError> {
    check_metric(metric)?;
    let mut fiction = Vec::new();
    let mut nonfiction = Vec::new();
    let mut with_metadata = 0;
    let mut excluded_absent = 0;
    for row in rows {
        let Some(genre) = row.metadata.as_ref().and_then(Genre::of) else {
            continue;
        };
        with_metadata += 1;
        match (row.metrics.metric(metric), genre) {
            (Some(v), Genre::Fiction) => fiction.push(v),
            (Some(v), Genre::Nonfiction) => nonfiction.push(v),
            (None, _) => excluded_absent += 1,
        }
    }
    if with_metadata == 0 {
        return Err(StatsError::MissingMetadata);
    }
    Ok(GroupComparison {
        metric: metric.to_string(),
        test: welch_t_test(&fiction, &nonfiction)?,
        excluded_absent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendResult {
    pub metric: String,
    pub group: Genre,
    pub correlation: CorrelationResult,
    /// (decade, mean of the metric over the group's rows in that decade)
    pub decade_means: Vec<(i32, f64)>,
}

/// Pearson correlation between decade and the per-decade mean of a metric
/// within one group.
pub fn decade_trend(
    rows: &[AnalysisRow],
    metric: &str,
    group: Genre,
) -> Result<TrendResult, StatsError> {
    check_metric(metric)?;
    let mut by_decade: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for row in rows {
        let Some(meta) = &row.metadata else { continue };
        if Genre::of(meta) != Some(group) {
            continue;
        }
        if let (Some(decade), Some(v)) = (meta.decade(), row.metrics.metric(metric)) {
            by_decade.entry(decade).or_default().push(v);
        }
    }
    if by_decade.len() < 3 {
        return Err(StatsError::TooFewDecades(by_decade.len()));
    }
    let decade_means: Vec<(i32, f64)> = by_decade
        .into_iter()
        .map(|(d, vs)| (d, mean(&vs)))
        .collect();
    let xs: Vec<f64> = decade_means.iter().map(|(d, _)| *d as f64).collect();
    let ys: Vec<f64> = decade_means.iter().map(|(_, m)| *m).collect();
    Ok(TrendResult {
        metric: metric.to_string(),
        group,
        correlation: pearson(&xs, &ys)?,
        decade_means,
    })
}
