//! Static SVG chart of sweep curves: per mode, the median of one metric
//! versus k with an interquartile band, plus a marker on the extremal
//! median (minimum for nc, maximum for q and msc).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::Mode;
use crate::sweep::{quantile, SweepRecord};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 56.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Nc,
    Q,
    Msc,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Nc => "nc",
            Metric::Q => "q",
            Metric::Msc => "msc",
        }
    }

    fn of(self, r: &SweepRecord) -> f64 {
        match self {
            Metric::Nc => r.nc as f64,
            Metric::Q => r.q,
            Metric::Msc => r.msc,
        }
    }

    /// nc dips at the transition; q and msc peak.
    fn prefers_max(self) -> bool {
        !matches!(self, Metric::Nc)
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nc" => Ok(Metric::Nc),
            "q" => Ok(Metric::Q),
            "msc" => Ok(Metric::Msc),
            other => Err(Error::Parameter(format!(
                "unknown metric '{other}' (expected nc, q, or msc)"
            ))),
        }
    }
}

fn mode_color(mode: Mode) -> &'static str {
    match mode {
        Mode::Adjacent => "#1f77b4",
        Mode::Random => "#d62728",
    }
}

struct Series {
    mode: Mode,
    points: Vec<(usize, f64, f64, f64)>, // (k, q25, median, q75)
}

fn fmt_tick(v: f64, span: f64) -> String {
    if span != 0.0 && span.abs() < 0.01 {
        format!("{v:.2e}")
    } else if span.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// Renders the chart; fails with "no records" on empty input.
pub fn svg_plot(records: &[SweepRecord], metric: Metric) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Parameter("no records in sweep input".into()));
    }
    let mut series = Vec::new();
    for mode in [Mode::Adjacent, Mode::Random] {
        let mut by_k: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for r in records.iter().filter(|r| r.mode == mode) {
            by_k.entry(r.k).or_default().push(metric.of(r));
        }
        if by_k.is_empty() {
            continue;
        }
        let points = by_k
            .into_iter()
            .map(|(k, mut vals)| {
                vals.sort_by(|a, b| a.partial_cmp(b).expect("metric values are finite"));
                (
                    k,
                    quantile(&vals, 0.25),
                    quantile(&vals, 0.5),
                    quantile(&vals, 0.75),
                )
            })
            .collect();
        series.push(Series { mode, points });
    }

    let ks: Vec<usize> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .collect();
    let (k_min, k_max) = (
        *ks.iter().min().expect("nonempty"),
        *ks.iter().max().expect("nonempty"),
    );
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &series {
        for &(_, lo, _, hi) in &s.points {
            y_min = y_min.min(lo);
            y_max = y_max.max(hi);
        }
    }
    if y_min == y_max {
        let pad = y_min.abs().max(1.0) * 0.1;
        y_min -= pad;
        y_max += pad;
    } else {
        let pad = (y_max - y_min) * 0.06;
        y_min -= pad;
        y_max += pad;
    }
    let x_span = (k_max - k_min).max(1) as f64;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x = |k: usize| MARGIN_LEFT + (k - k_min) as f64 / x_span * plot_w;
    let y = |v: f64| MARGIN_TOP + (y_max - v) / (y_max - y_min) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );

    // axes
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        out,
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"black\"/>"
    );

    let k_stride = 1 + (k_max - k_min) / 20;
    let mut k_tick = k_min;
    while k_tick <= k_max {
        let tx = x(k_tick);
        let _ = writeln!(
            out,
            "<line x1=\"{tx:.2}\" y1=\"{y0:.2}\" x2=\"{tx:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            y0 + 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{tx:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{k_tick}</text>",
            y0 + 20.0
        );
        k_tick += k_stride;
    }
    let y_span = y_max - y_min;
    for t in 0..=4 {
        let v = y_min + y_span * t as f64 / 4.0;
        let ty = y(v);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{ty:.2}\" x2=\"{x0:.2}\" y2=\"{ty:.2}\" stroke=\"black\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            x0 - 9.0,
            ty + 4.0,
            fmt_tick(v, y_span)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">k</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        metric.as_str()
    );

    for s in &series {
        let color = mode_color(s.mode);
        let name = s.mode.as_str();
        if s.points.len() > 1 {
            let mut band = String::new();
            for &(k, _, _, hi) in &s.points {
                let _ = write!(band, "{:.2},{:.2} ", x(k), y(hi));
            }
            for &(k, lo, _, _) in s.points.iter().rev() {
                let _ = write!(band, "{:.2},{:.2} ", x(k), y(lo));
            }
            let _ = writeln!(
                out,
                "<polygon class=\"band-{name}\" points=\"{}\" fill=\"{color}\" \
                 fill-opacity=\"0.18\" stroke=\"none\"/>",
                band.trim_end()
            );
        }
        let line: Vec<String> = s
            .points
            .iter()
            .map(|&(k, _, med, _)| format!("{:.2},{:.2}", x(k), y(med)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline class=\"series-{name}\" points=\"{}\" fill=\"none\" \
             stroke=\"{color}\" stroke-width=\"2\"/>",
            line.join(" ")
        );
    }

    // extremal-median markers, one per mode; ties keep the lowest k
    for s in &series {
        let mut best = s.points[0];
        for &p in &s.points[1..] {
            let better = if metric.prefers_max() {
                p.2 > best.2
            } else {
                p.2 < best.2
            };
            if better {
                best = p;
            }
        }
        let _ = writeln!(
            out,
            "<circle class=\"peak\" data-mode=\"{}\" data-k=\"{}\" cx=\"{:.2}\" cy=\"{:.2}\" \
             r=\"5\" fill=\"{}\" stroke=\"white\" stroke-width=\"1.5\"/>",
            s.mode.as_str(),
            best.0,
            x(best.0),
            y(best.2),
            mode_color(s.mode)
        );
    }

    for (i, s) in series.iter().enumerate() {
        let ly = MARGIN_TOP + 16.0 + 20.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT - 130.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" \
             stroke=\"{}\" stroke-width=\"2\"/>",
            lx + 26.0,
            mode_color(s.mode)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            lx + 34.0,
            ly + 4.0,
            s.mode.as_str()
        );
    }

    out.push_str("</svg>\n");
    Ok(out)
}
