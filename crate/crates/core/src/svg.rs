//! Grouped histograms as standalone SVG.
//!
//! Each group is binned over the pooled range and drawn as a step outline
//! of per-group proportions, so groups of different sizes share one scale.
//! A dashed vertical line marks each group mean.

use std::fmt::Write;

pub const DEFAULT_BINS: usize = 30;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 48.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// One group's sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
}

/// Bin proportions for one group.
#[derive(Debug, Clone, PartialEq)]
pub struct Binned {
    pub proportions: Vec<f64>,
    pub mean: Option<f64>,
}

/// Pooled `(lo, hi)` over all finite values; widened by 0.5 each side when
/// degenerate.
pub fn pooled_range(series: &[Series<'_>]) -> Option<(f64, f64)> {
    let mut it = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .filter(|v| v.is_finite());
    let first = it.next()?;
    let (lo, hi) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Some(if lo == hi { (lo - 0.5, hi + 0.5) } else { (lo, hi) })
}

fn bin_index(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let i = ((v - lo) / (hi - lo) * bins as f64).floor() as usize;
    i.min(bins - 1)
}

/// Bins each series over `[lo, hi]`; the top edge falls in the last bin.
pub fn bin_series(series: &[Series<'_>], lo: f64, hi: f64, bins: usize) -> Vec<Binned> {
    series
        .iter()
        .map(|s| {
            let finite: Vec<f64> = s.values.iter().copied().filter(|v| v.is_finite()).collect();
            let mut counts = vec![0usize; bins];
            for &v in &finite {
                counts[bin_index(v, lo, hi, bins)] += 1;
            }
            let n = finite.len();
            Binned {
                proportions: counts
                    .iter()
                    .map(|&c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
                    .collect(),
                mean: (n > 0).then(|| finite.iter().sum::<f64>() / n as f64),
            }
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders the grouped histogram. Returns `None` when no series has a
/// finite value.
pub fn histogram_svg(title: &str, series: &[Series<'_>], bins: usize) -> Option<String> {
    let bins = bins.max(1);
    let (lo, hi) = pooled_range(series)?;
    let binned = bin_series(series, lo, hi, bins);
    let peak = binned
        .iter()
        .flat_map(|b| b.proportions.iter().copied())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |v: f64| MARGIN_LEFT + (v - lo) / (hi - lo) * plot_w;
    let y = |p: f64| MARGIN_TOP + plot_h - p / peak * plot_h;
    let base = MARGIN_TOP + plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#,
        WIDTH - MARGIN_RIGHT
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{base}" stroke="black"/>"#
    );
    for (v, anchor) in [(lo, "start"), (hi, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{}</text>"#,
            x(v),
            base + 16.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
        MARGIN_LEFT - 4.0,
        MARGIN_TOP + 4.0,
        fmt_tick(peak)
    );

    let width = (hi - lo) / bins as f64;
    for (gi, (group, b)) in series.iter().zip(&binned).enumerate() {
        let color = COLORS[gi % COLORS.len()];
        let mut d = format!("M{:.2},{:.2}", x(lo), base);
        for (i, p) in b.proportions.iter().enumerate() {
            let left = lo + width * i as f64;
            let _ = write!(d, " L{:.2},{:.2} L{:.2},{:.2}", x(left), y(*p), x(left + width), y(*p));
        }
        let _ = write!(d, " L{:.2},{:.2}", x(hi), base);
        let _ = writeln!(
            s,
            r#"<path class="outline" data-group="{}" d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            escape(group.label)
        );
        if let Some(m) = b.mean {
            let _ = writeln!(
                s,
                r#"<line class="mean" data-group="{}" data-mean="{m}" x1="{:.2}" y1="{MARGIN_TOP}" x2="{:.2}" y2="{base}" stroke="{color}" stroke-dasharray="4 3"/>"#,
                escape(group.label),
                x(m),
                x(m)
            );
        }
        let ly = MARGIN_TOP + 4.0 + 16.0 * gi as f64;
        let lx = WIDTH - MARGIN_RIGHT - 140.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{} (n = {})</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(group.label),
            group.values.iter().filter(|v| v.is_finite()).count()
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning_is_pooled_and_normalized() {
        let a = [0.0, 1.0, 2.0, 3.0];
        let b = [3.0, 3.0];
        let series = [
            Series { label: "fiction", values: &a },
            Series { label: "nonfiction", values: &b },
        ];
        assert_eq!(pooled_range(&series), Some((0.0, 3.0)));
        let binned = bin_series(&series, 0.0, 3.0, 3);
        assert_eq!(binned[0].proportions, vec![0.25, 0.25, 0.5]);
        assert_eq!(binned[1].proportions, vec![0.0, 0.0, 1.0]);
        assert_eq!(binned[0].mean, Some(1.5));
        for b in &binned {
            assert!((b.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_and_empty() {
        let one = [2.0, 2.0];
        assert_eq!(pooled_range(&[Series { label: "x", values: &one }]), Some((1.5, 2.5)));
        assert_eq!(pooled_range(&[Series { label: "x", values: &[] }]), None);
        assert!(histogram_svg("t", &[Series { label: "x", values: &[f64::NAN] }], 30).is_none());
    }

    #[test]
    fn svg_has_outline_and_mean_per_group() {
        let a = [1.0, 2.0, 3.0];
        let b = [4.0, 5.0];
        let svg = histogram_svg(
            "node_count <fiction & nonfiction>",
            &[Series { label: "fiction", values: &a }, Series { label: "nonfiction", values: &b }],
            DEFAULT_BINS,
        )
        .unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches(r#"class="outline""#).count(), 2);
        assert!(svg.contains(r#"data-group="fiction" data-mean="2""#));
        assert!(svg.contains(r#"data-group="nonfiction" data-mean="4.5""#));
        assert!(svg.contains("&lt;fiction &amp; nonfiction&gt;"));
        // 30 bins: two points per bin plus start and end
        let path = svg.lines().find(|l| l.contains(r#"class="outline""#)).unwrap();
        assert_eq!(path.matches('L').count(), 2 * DEFAULT_BINS + 1);
    }
}
