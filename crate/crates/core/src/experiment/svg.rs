//! Minimal SVG line plots and heatmaps. Output depends only on the input
//! data, so identical data renders to identical bytes.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Optional markers drawn without a connecting line (e.g. simulated values).
    pub markers: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `z[j][i]` is the value at `(xs[i], ys[j])`; `None` or non-finite cells are left blank.
    pub z: Vec<Vec<Option<f64>>>,
    pub z_label: String,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Four significant digits, trailing zeros trimmed.
pub fn label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-3..6).contains(&mag) {
        return format!("{v:.2e}");
    }
    let decimals = (3 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Round tick positions covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Vec::new();
    }
    if hi <= lo {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let pow = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * pow)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * pow);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let mut r: Option<(f64, f64)> = None;
    for v in values.filter(|v| v.is_finite()) {
        r = Some(match r {
            None => (v, v),
            Some((a, b)) => (a.min(v), b.max(v)),
        });
    }
    r.map(|(a, b)| if a == b { (a - 0.5, b + 0.5) } else { (a, b) })
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        esc(title)
    )
    .unwrap();
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str, x_ticks: &[f64], y_ticks: &[f64]) {
    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t).unwrap();
    for &x in x_ticks {
        let px = f.px(x);
        writeln!(out, r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{}" stroke="black"/>"#, b + 5.0).unwrap();
        writeln!(out, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, b + 18.0, label(x)).unwrap();
    }
    for &y in y_ticks {
        let py = f.py(y);
        writeln!(out, r#"<line x1="{}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/>"#, l - 5.0).unwrap();
        writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, l - 8.0, py + 4.0, label(y)).unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 15.0,
        esc(x_label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (t + b) / 2.0,
        esc(y_label)
    )
    .unwrap();
}

impl LinePlot {
    pub fn render(&self) -> String {
        let all = || {
            self.series
                .iter()
                .flat_map(|s| s.points.iter().chain(&s.markers))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
        };
        let (x0, x1) = range(all().map(|p| p.0)).unwrap_or((0.0, 1.0));
        let (y0, y1) = range(all().map(|p| p.1)).unwrap_or((0.0, 1.0));
        let pad = (y1 - y0) * 0.05;
        let f = Frame {
            x0,
            x1,
            y0: y0 - pad,
            y1: y1 + pad,
        };
        let mut out = String::new();
        open(&mut out, &self.title);
        axes(
            &mut out,
            &f,
            &self.x_label,
            &self.y_label,
            &nice_ticks(f.x0, f.x1, 6),
            &nice_ticks(f.y0, f.y1, 6),
        );
        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            // Non-finite values break the curve.
            let mut segment: Vec<String> = Vec::new();
            let flush = |seg: &mut Vec<String>, out: &mut String| {
                if seg.len() > 1 {
                    writeln!(
                        out,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                        seg.join(" ")
                    )
                    .unwrap();
                }
                seg.clear();
            };
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    segment.push(format!("{:.2},{:.2}", f.px(x), f.py(y)));
                } else {
                    flush(&mut segment, &mut out);
                }
            }
            flush(&mut segment, &mut out);
            if s.points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).count() == 1 {
                let (x, y) = s.points.iter().find(|(x, y)| x.is_finite() && y.is_finite()).unwrap();
                writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, f.px(*x), f.py(*y)).unwrap();
            }
            for &(x, y) in s.markers.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="none" stroke="{color}"/>"#,
                    f.px(x),
                    f.py(y)
                )
                .unwrap();
            }
            let ly = TOP + 10.0 + 20.0 * k as f64;
            let lx = WIDTH - RIGHT + 15.0;
            writeln!(
                out,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                lx + 20.0
            )
            .unwrap();
            writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, esc(&s.label)).unwrap();
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Perceptually ordered blue-to-yellow ramp.
fn color(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let u = t - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * u).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Cell edges halfway between neighbouring grid values.
fn edges(v: &[f64]) -> Vec<f64> {
    match v.len() {
        0 => Vec::new(),
        1 => vec![v[0] - 0.5, v[0] + 0.5],
        n => {
            let mut e = vec![v[0] - (v[1] - v[0]) / 2.0];
            e.extend(v.windows(2).map(|w| (w[0] + w[1]) / 2.0));
            e.push(v[n - 1] + (v[n - 1] - v[n - 2]) / 2.0);
            e
        }
    }
}

impl Heatmap {
    pub fn render(&self) -> String {
        let xe = edges(&self.xs);
        let ye = edges(&self.ys);
        let f = Frame {
            x0: *xe.first().unwrap_or(&0.0),
            x1: *xe.last().unwrap_or(&1.0),
            y0: *ye.first().unwrap_or(&0.0),
            y1: *ye.last().unwrap_or(&1.0),
        };
        let (z0, z1) = range(self.z.iter().flatten().flatten().copied()).unwrap_or((0.0, 1.0));
        let mut out = String::new();
        open(&mut out, &self.title);
        for (j, row) in self.z.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                let Some(v) = v.filter(|v| v.is_finite()) else {
                    continue;
                };
                let (x, w) = (f.px(xe[i]), f.px(xe[i + 1]) - f.px(xe[i]));
                let (y, h) = (f.py(ye[j + 1]), f.py(ye[j]) - f.py(ye[j + 1]));
                writeln!(
                    out,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{}"><title>{}</title></rect>"#,
                    color((v - z0) / (z1 - z0)),
                    label(v)
                )
                .unwrap();
            }
        }
        axes(
            &mut out,
            &f,
            &self.x_label,
            &self.y_label,
            &nice_ticks(f.x0, f.x1, 6),
            &nice_ticks(f.y0, f.y1, 6),
        );
        // Color bar.
        let (bx, bw, top, bottom) = (WIDTH - RIGHT + 30.0, 18.0, TOP, HEIGHT - BOTTOM);
        let steps = 50;
        let h = (bottom - top) / steps as f64;
        for s in 0..steps {
            let t = (s as f64 + 0.5) / steps as f64;
            let y = bottom - (s + 1) as f64 * h;
            writeln!(
                out,
                r#"<rect x="{bx}" y="{y:.2}" width="{bw}" height="{:.2}" fill="{}"/>"#,
                h + 0.5,
                color(t)
            )
            .unwrap();
        }
        for v in nice_ticks(z0, z1, 5) {
            let y = bottom - (v - z0) / (z1 - z0) * (bottom - top);
            writeln!(out, r#"<text x="{}" y="{:.2}">{}</text>"#, bx + bw + 6.0, y + 4.0, label(v)).unwrap();
        }
        writeln!(out, r#"<text x="{bx}" y="{}">{}</text>"#, top - 8.0, esc(&self.z_label)).unwrap();
        out.push_str("</svg>\n");
        out
    }
}
