//! Dependency-free SVG line plots of sweep summaries: one mean line and a
//! one-standard-deviation band per arm.

use std::fmt::Write;

use hybrid_esn::evaluation::ModelKind;
use hybrid_esn::experiments::SummaryRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    MeanNmse,
    ValidTime,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::MeanNmse, Metric::ValidTime];

    pub fn file_suffix(self) -> &'static str {
        match self {
            Metric::MeanNmse => "mean_nmse",
            Metric::ValidTime => "valid_time",
        }
    }

    pub fn axis_label(self) -> &'static str {
        match self {
            Metric::MeanNmse => "mean NMSE",
            Metric::ValidTime => "valid time (s)",
        }
    }

    fn stats(self, r: &SummaryRow) -> (f64, f64) {
        match self {
            Metric::MeanNmse => (r.mean_nmse_mean, r.mean_nmse_std),
            Metric::ValidTime => (r.valid_time_mean, r.valid_time_std),
        }
    }
}

fn colour(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Standard => "#1f4fd1",
        ModelKind::Hybrid => "#d62020",
        ModelKind::Ode => "#202020",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Short tick label without trailing noise.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
            let v = if log { v.log10() } else { v };
            (l.min(v), h.max(v))
        });
        if !lo.is_finite() || !hi.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                if self.log {
                    10f64.powf(t)
                } else {
                    t
                }
            })
            .collect()
    }
}

/// Renders `rows` (one sweep of one regime) against their parameter value.
pub fn render(title: &str, x_label: &str, rows: &[&SummaryRow], metric: Metric) -> String {
    let log_x = x_label == "regularization" && rows.iter().all(|r| r.key.param_value > 0.0);
    let x = Axis::new(rows.iter().map(|r| r.key.param_value), log_x);
    let y = Axis::new(
        rows.iter().flat_map(|r| {
            let (m, s) = metric.stats(r);
            [m - s, m + s]
        }),
        false,
    );
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + x.frac(v) * pw;
    let py = |v: f64| TOP + (1.0 - y.frac(v)) * ph;

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
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in x.ticks() {
        let xp = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="black"/><text x="{xp:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            tick_label(t)
        );
    }
    for t in y.ticks() {
        let yp = py(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{yp:.2}" x2="{LEFT}" y2="{yp:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            yp + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text class="y-label" x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        metric.axis_label()
    );

    let mut legend = 0;
    for kind in ModelKind::ALL {
        let mut pts: Vec<(f64, f64, f64)> = rows
            .iter()
            .filter(|r| r.key.model == kind)
            .map(|r| {
                let (m, sd) = metric.stats(r);
                (r.key.param_value, m, sd)
            })
            .collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let c = colour(kind);
        let upper = pts.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1 + p.2)));
        let lower = pts.iter().rev().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1 - p.2)));
        let band: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            s,
            r#"<polygon class="band band-{kind}" points="{}" fill="{c}" fill-opacity="0.2" stroke="none"/>"#,
            band.join(" ")
        );
        let line: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="mean mean-{kind}" points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            line.join(" ")
        );
        let ly = TOP + 14.0 + 16.0 * legend as f64;
        let lx = LEFT + pw - 110.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{kind}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
        legend += 1;
    }
    s.push_str("</svg>\n");
    s
}
