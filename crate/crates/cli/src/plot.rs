//! Static SVG line plots with the plotted data embedded as a CSV comment block.

use std::fmt::Write as _;
use std::io::BufRead;

use ssd_core::io::{self, format_f64, FormatResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    SVsRho,
    DeltaVsRho,
    Trace,
    Cue,
}

/// Marker that opens the embedded data block.
pub const DATA_MARKER: &str = "plot-data";

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
/// Floor applied to non-positive values on log axes.
const LOG_FLOOR: f64 = 1e-17;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn push_point(series: &mut Vec<Series>, label: &str, p: (f64, f64)) {
    match series.iter_mut().find(|s| s.label == label) {
        Some(s) => s.points.push(p),
        None => series.push(Series {
            label: label.to_string(),
            points: vec![p],
        }),
    }
}

pub fn load<R: BufRead>(kind: PlotKind, reader: R) -> FormatResult<Figure> {
    let mut series = Vec::new();
    let figure = |title: &str, x: &str, y: &str, log_y: bool, series| Figure {
        title: title.into(),
        x_label: x.into(),
        y_label: y.into(),
        log_y,
        series,
    };
    Ok(match kind {
        PlotKind::SVsRho | PlotKind::DeltaVsRho => {
            let (rows, _) = io::read_sweep_csv(reader)?;
            for r in &rows {
                let y = if kind == PlotKind::SVsRho {
                    r.s
                } else {
                    r.delta_mean
                };
                push_point(&mut series, r.solver.as_str(), (r.rho, y));
            }
            if kind == PlotKind::SVsRho {
                figure("success rate", "rho", "s", false, series)
            } else {
                figure("mean relative distance", "rho", "delta", true, series)
            }
        }
        PlotKind::Trace => {
            let (trace, comments) = io::read_trace_csv(reader)?;
            let label = io::comment_value(&comments, "solver").unwrap_or("residual");
            let m = trace.rows.max(1) as f64;
            for (k, s) in trace.steps.iter().enumerate() {
                push_point(&mut series, label, ((k + 1) as f64, s.z_l1 / m));
            }
            figure("residual trace", "step", "|z|_1 / M", true, series)
        }
        PlotKind::Cue => {
            let (stats, _) = io::read_cue_csv(reader)?;
            for s in &stats {
                let n = s.rank_curve.len() as f64;
                let label = format!("rho={}", s.rho);
                for (k, f) in s.rank_curve.iter().enumerate() {
                    push_point(&mut series, &label, ((k + 1) as f64 / n, *f));
                }
            }
            figure(
                "support fraction among top-n |g|",
                "n / N",
                "f(n)",
                false,
                series,
            )
        }
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Roughly five evenly spaced ticks covering `[lo, hi]`.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

impl Figure {
    fn y_value(&self, y: f64) -> f64 {
        if self.log_y {
            y.max(LOG_FLOOR).log10()
        } else {
            y
        }
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let pts = self.series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in pts {
            let y = self.y_value(y);
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return if self.log_y {
                (0.0, 1.0, -16.0, 0.0)
            } else {
                (0.0, 1.0, 0.0, 1.0)
            };
        }
        if !self.log_y {
            y0 = y0.min(0.0);
            y1 = y1.max(1.0);
        } else {
            y0 = y0.floor();
            y1 = y1.ceil();
        }
        if x1 - x0 <= 0.0 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 <= 0.0 {
            y0 -= 1.0;
            y1 += 1.0;
        }
        (x0, x1, y0, y1)
    }

    pub fn to_svg(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, "<!-- {DATA_MARKER}\nseries,x,y");
        for series in &self.series {
            for &(x, y) in &series.points {
                let _ = writeln!(s, "{},{},{}", series.label, format_f64(x), format_f64(y));
            }
        }
        let _ = writeln!(s, "-->");
        let _ = writeln!(
            s,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );

        for t in linear_ticks(x0, x1) {
            let x = px(t);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{b:.2}" x2="{x:.2}" y2="{b2:.2}" stroke="black"/><text x="{x:.2}" y="{ty:.2}" text-anchor="middle">{t}</text>"#,
                b = TOP + ph,
                b2 = TOP + ph + 5.0,
                ty = TOP + ph + 18.0,
                t = format!("{t:.3}")
                    .trim_end_matches('0')
                    .trim_end_matches('.')
            );
        }
        let y_ticks: Vec<f64> = if self.log_y {
            let span = (y1 - y0).max(1.0);
            let step = (span / 6.0).ceil();
            let mut v = Vec::new();
            let mut t = y0;
            while t <= y1 + 1e-9 {
                v.push(t);
                t += step;
            }
            v
        } else {
            linear_ticks(y0, y1)
        };
        for t in y_ticks {
            let y = py(t);
            let label = if self.log_y {
                format!("1e{}", t.round() as i64)
            } else {
                format!("{t:.3}")
                    .trim_end_matches('0')
                    .trim_end_matches('.')
                    .to_string()
            };
            let _ = writeln!(
                s,
                r##"<line x1="{l2:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><line x1="{LEFT}" y1="{y:.2}" x2="{r:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{tx:.2}" y="{ty:.2}" text-anchor="end">{label}</text>"##,
                l2 = LEFT - 5.0,
                r = LEFT + pw,
                tx = LEFT - 8.0,
                ty = y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{c}" text-anchor="middle" transform="rotate(-90 18 {c})">{}</text>"#,
            escape(&self.y_label),
            c = TOP + ph / 2.0
        );

        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let path: Vec<String> = series
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(self.y_value(y))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
            if series.points.len() <= 60 {
                for &(x, y) in &series.points {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                        px(x),
                        py(self.y_value(y))
                    );
                }
            }
            let ly = TOP + 10.0 + 18.0 * i as f64;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(
                s,
                r#"<g class="legend-entry"><line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
                lx + 20.0,
                lx + 25.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
