//! Roofline plots as CSV samples or a standalone SVG.
//!
//! CSV layout (version 1):
//!
//! ```text
//! # bops-roofline-csv v1
//! series,oi,rate
//! roof,6.25e-2,8.625e8
//! ceiling:ILP,6.25e-2,8.625e8
//! point:sort,3e0,2.8288770053475935e10
//! ```
//!
//! `roof` is `min(oi * bandwidth, peak)`. A compute ceiling `C` is sampled as
//! `min(oi * bandwidth, C)`, a memory ceiling `B` as `min(oi * B, peak)`.
//! Each polyline is sampled on a log grid and includes its own ridge vertex,
//! so consecutive samples are joined by straight segments in log-log space.
//! Numbers use the shortest exponent form that reads back to the same value.

use std::fmt::Write as _;

use super::{Ceiling, CeilingKind, RooflineError, RooflineModel};

pub const CSV_HEADER: &str = "# bops-roofline-csv v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotFormat {
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotOptions {
    pub points_per_decade: u32,
    pub oi_min: f64,
    pub oi_max: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            points_per_decade: 64,
            oi_min: 2f64.powi(-4),
            oi_max: 2f64.powi(6),
        }
    }
}

struct Series {
    name: String,
    vertices: Vec<(f64, f64)>,
}

fn sample(grid: &[f64], compute: f64, bandwidth: f64) -> Vec<(f64, f64)> {
    let ridge = compute / bandwidth;
    let mut xs: Vec<f64> = grid.to_vec();
    if ridge > xs[0] && ridge < xs[xs.len() - 1] && !xs.contains(&ridge) {
        xs.push(ridge);
        xs.sort_by(f64::total_cmp);
    }
    xs.into_iter()
        .map(|x| (x, (x * bandwidth).min(compute)))
        .collect()
}

fn oi_range(model: &RooflineModel, opts: &PlotOptions) -> (f64, f64) {
    let mut lo = opts.oi_min;
    let mut hi = opts.oi_max.max(model.ridge_oi());
    for p in &model.points {
        lo = lo.min(p.oi);
        hi = hi.max(p.oi);
    }
    (lo, hi)
}

fn build_series(model: &RooflineModel, opts: &PlotOptions) -> Result<Vec<Series>, RooflineError> {
    if opts.points_per_decade == 0
        || !(opts.oi_min > 0.0 && opts.oi_max > opts.oi_min && opts.oi_max.is_finite())
    {
        return Err(RooflineError::EmptyModel(format!(
            "bad sampling options {opts:?}"
        )));
    }
    let (lo, hi) = oi_range(model, opts);
    let (l0, l1) = (lo.log10(), hi.log10());
    let ppd = f64::from(opts.points_per_decade);
    let steps = ((l1 - l0) * ppd).ceil() as usize;
    let mut grid: Vec<f64> = (0..=steps)
        .map(|k| 10f64.powf(l0 + k as f64 / ppd))
        .filter(|&x| x < hi)
        .collect();
    grid[0] = lo;
    grid.push(hi);

    let peak = model.peak();
    let bw = model.bandwidth();
    let mut out = vec![Series {
        name: "roof".into(),
        vertices: sample(&grid, peak, bw),
    }];
    for Ceiling { name, kind } in &model.ceilings {
        let vertices = match *kind {
            CeilingKind::Compute { level } => sample(&grid, level, bw),
            CeilingKind::Memory { bandwidth } => sample(&grid, peak, bandwidth),
        };
        out.push(Series {
            name: format!("ceiling:{name}"),
            vertices,
        });
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn emit_csv(model: &RooflineModel, series: &[Series]) -> String {
    let mut s = format!("{CSV_HEADER}\nseries,oi,rate\n");
    for ser in series {
        let name = csv_field(&ser.name);
        for (x, y) in &ser.vertices {
            let _ = writeln!(s, "{name},{x:e},{y:e}");
        }
    }
    for p in &model.points {
        let _ = writeln!(
            s,
            "{},{:e},{:e}",
            csv_field(&format!("point:{}", p.name)),
            p.oi,
            p.rate
        );
    }
    s
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, oi: f64) -> f64 {
        let w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        MARGIN_LEFT + (oi.log10() - self.x0) / (self.x1 - self.x0) * w
    }

    fn py(&self, rate: f64) -> f64 {
        let h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        MARGIN_TOP + h - (rate.log10() - self.y0) / (self.y1 - self.y0) * h
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn decade_label(k: i32) -> String {
    if k >= 0 {
        format!("{}", 10f64.powi(k))
    } else {
        format!("{:.*}", (-k) as usize, 10f64.powi(k))
    }
}

fn rate_label(k: i32) -> String {
    const PREFIXES: [(i32, &str); 5] = [(12, "T"), (9, "G"), (6, "M"), (3, "K"), (0, "")];
    for (e, p) in PREFIXES {
        if k >= e {
            return format!("{}{p}", 10i64.pow((k - e) as u32));
        }
    }
    decade_label(k)
}

/// Compact number for labels, e.g. `86.4G`.
pub(crate) fn si(v: f64) -> String {
    for (scale, p) in [(1e12, "T"), (1e9, "G"), (1e6, "M"), (1e3, "K")] {
        if v.abs() >= scale {
            return format!("{}{p}", trim_float(v / scale));
        }
    }
    trim_float(v)
}

fn trim_float(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn emit_svg(model: &RooflineModel, series: &[Series]) -> String {
    let mut ymin = f64::INFINITY;
    let mut xmin = f64::INFINITY;
    let mut xmax: f64 = 0.0;
    for s in series {
        for &(x, y) in &s.vertices {
            ymin = ymin.min(y);
            xmin = xmin.min(x);
            xmax = xmax.max(x);
        }
    }
    for p in &model.points {
        ymin = ymin.min(p.rate);
    }
    let axes = Axes {
        x0: xmin.log10().floor(),
        x1: xmax.log10().ceil(),
        y0: ymin.log10().floor(),
        y1: (model.peak().log10() + 1e-9)
            .ceil()
            .max(ymin.log10().floor() + 1.0),
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="24" font-size="16" text-anchor="middle">DC-Roofline: {}</text>"#,
        (WIDTH - MARGIN_RIGHT + MARGIN_LEFT) / 2.0,
        xml_escape(&model.spec.name)
    );

    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(s, r##"<g id="grid" stroke="#dddddd" stroke-width="1">"##);
    for k in axes.x0 as i32..=axes.x1 as i32 {
        let x = axes.px(10f64.powi(k));
        let _ = writeln!(
            s,
            r#"<line x1="{x:.3}" y1="{top:.3}" x2="{x:.3}" y2="{bottom:.3}"/>"#
        );
    }
    for k in axes.y0 as i32..=axes.y1 as i32 {
        let y = axes.py(10f64.powi(k));
        let _ = writeln!(
            s,
            r#"<line x1="{left:.3}" y1="{y:.3}" x2="{right:.3}" y2="{y:.3}"/>"#
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="axes" stroke="black" stroke-width="1.5">"#);
    let _ = writeln!(
        s,
        r#"<line x1="{left:.3}" y1="{bottom:.3}" x2="{right:.3}" y2="{bottom:.3}"/>"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{left:.3}" y1="{top:.3}" x2="{left:.3}" y2="{bottom:.3}"/>"#
    );
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="tick-labels">"#);
    for k in axes.x0 as i32..=axes.x1 as i32 {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            axes.px(10f64.powi(k)),
            bottom + 18.0,
            decade_label(k)
        );
    }
    for k in axes.y0 as i32..=axes.y1 as i32 {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            left - 6.0,
            axes.py(10f64.powi(k)) + 4.0,
            rate_label(k)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">Operation intensity (BOPs/byte)</text>"#,
        (left + right) / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.3}" text-anchor="middle" transform="rotate(-90 18 {:.3})">BOPS</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0
    );
    let _ = writeln!(s, "</g>");

    for (i, ser) in series.iter().enumerate() {
        let (color, width, dash) = if i == 0 {
            ("#1f77b4", 2.5, "")
        } else {
            (
                COLORS[(i - 1) % COLORS.len()],
                1.5,
                r#" stroke-dasharray="6 4""#,
            )
        };
        let pts: Vec<String> = ser
            .vertices
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", axes.px(x), axes.py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline id="{}" data-series="{}" fill="none" stroke="{color}" stroke-width="{width}"{dash} points="{}"/>"#,
            if i == 0 {
                "roof".to_string()
            } else {
                format!("ceiling-{i}")
            },
            xml_escape(&ser.name),
            pts.join(" ")
        );
        let &(lx, ly) = ser.vertices.last().expect("series has vertices");
        let label = ser.name.strip_prefix("ceiling:").unwrap_or(&ser.name);
        let text = match model.ceilings.get(i.wrapping_sub(1)) {
            Some(Ceiling {
                kind: CeilingKind::Compute { level },
                ..
            }) if i > 0 => format!("{label} {}", si(*level)),
            Some(Ceiling {
                kind: CeilingKind::Memory { bandwidth },
                ..
            }) if i > 0 => format!("{label} {}B/s", si(*bandwidth)),
            _ => format!("peak {}", si(model.peak())),
        };
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" fill="{color}">{}</text>"#,
            axes.px(lx) + 6.0,
            axes.py(ly) + 4.0,
            xml_escape(&text)
        );
    }

    let ridge = model.ridge_oi();
    let (rx, ry) = (axes.px(ridge), axes.py(model.peak()));
    let _ = writeln!(
        s,
        r##"<g id="ridge"><circle cx="{rx:.3}" cy="{ry:.3}" r="4" fill="#1f77b4"/><text x="{:.3}" y="{:.3}" text-anchor="middle">ridge oi={}</text></g>"##,
        rx,
        ry - 10.0,
        trim_float(ridge)
    );

    let checks = model.check_points();
    for (p, c) in model.points.iter().zip(&checks) {
        let (cx, cy) = (axes.px(p.oi), axes.py(p.rate));
        let (fill, suffix) = if c.above_roof {
            ("#ff0000", " (above roof)")
        } else {
            ("#000000", "")
        };
        let _ = writeln!(
            s,
            r#"<g class="point" data-name="{}"><circle cx="{cx:.3}" cy="{cy:.3}" r="4" fill="{fill}"/><text x="{:.3}" y="{:.3}">{}{suffix}</text></g>"#,
            xml_escape(&p.name),
            cx + 6.0,
            cy - 6.0,
            xml_escape(&p.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_plot(
    model: &RooflineModel,
    format: PlotFormat,
    opts: &PlotOptions,
) -> Result<String, RooflineError> {
    let series = build_series(model, opts)?;
    Ok(match format {
        PlotFormat::Csv => emit_csv(model, &series),
        PlotFormat::Svg => emit_svg(model, &series),
    })
}
