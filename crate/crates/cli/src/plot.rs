//! Self-contained SVG line charts rendered from CSV report rows.

use std::fmt::Write;

use eulerci::diagnostics::RateFit;

use crate::report::Row;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLOURS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
    pub notes: Vec<String>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let vals: Vec<f64> = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .map(|v| if log { v.log10() } else { v })
            .collect();
        let (mut lo, mut hi) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        Self { lo, hi, log }
    }

    fn map(&self, v: f64, a: f64, b: f64) -> Option<f64> {
        let v = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        v.is_finite().then(|| a + (v - self.lo) / (self.hi - self.lo) * (b - a))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            (self.lo as i64..=self.hi as i64)
                .map(|e| (10f64.powi(e as i32), format!("1e{e}")))
                .collect()
        } else {
            (0..=4)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                    (v, format!("{v:.3}"))
                })
                .collect()
        }
    }
}

impl Chart {
    pub fn render(&self) -> String {
        let xs = Axis::fit(
            self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)),
            self.log_x,
        );
        let ys = Axis::fit(
            self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)),
            self.log_y,
        );
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r##"<rect width="{W}" height="{H}" fill="#ffffff"/>"##);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" font-size="14" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            esc(&self.title)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#000000"/>"##,
            x1 - x0,
            y0 - y1
        );
        for (v, label) in xs.ticks() {
            if let Some(px) = xs.map(v, x0, x1) {
                let _ = writeln!(
                    s,
                    r##"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="#000000"/>"##,
                    y0 + 5.0
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{px:.2}" y="{}" text-anchor="middle">{label}</text>"#,
                    y0 + 18.0
                );
            }
        }
        for (v, label) in ys.ticks() {
            if let Some(py) = ys.map(v, y0, y1) {
                let _ = writeln!(
                    s,
                    r##"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="#000000"/>"##,
                    x0 - 5.0
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#,
                    x0 - 8.0,
                    py + 4.0
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            H - 10.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            (y0 + y1) / 2.0,
            esc(&self.y_label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let colour = COLOURS[i % COLOURS.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .filter_map(|(x, y)| Some(format!("{:.2},{:.2}", xs.map(*x, x0, x1)?, ys.map(*y, y0, y1)?)))
                .collect();
            if !pts.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
                    pts.join(" ")
                );
                for p in &pts {
                    let (px, py) = p.split_once(',').unwrap();
                    let _ = writeln!(s, r#"<circle cx="{px}" cy="{py}" r="2.5" fill="{colour}"/>"#);
                }
            }
            let ly = TOP + 14.0 * i as f64 + 6.0;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#,
                x1 + 10.0,
                x1 + 26.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{}</text>"#,
                x1 + 30.0,
                ly + 4.0,
                esc(&series.name)
            );
        }
        for (i, note) in self.notes.iter().enumerate() {
            let ny = TOP + 14.0 * (self.series.len() + 1 + i) as f64 + 6.0;
            let _ = writeln!(s, r#"<text x="{}" y="{ny}">{}</text>"#, x1 + 10.0, esc(note));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn push(series: &mut Vec<Series>, name: String, p: (f64, f64)) {
    match series.iter_mut().find(|s| s.name == name) {
        Some(s) => s.points.push(p),
        None => series.push(Series { name, points: vec![p] }),
    }
}

/// Kinetic energy and profile against time, one pair of lines per stage.
pub fn energy_chart(rows: &[Row]) -> Chart {
    let mut series = Vec::new();
    for r in rows {
        if let (Some(t), "kinetic" | "e") = (r.t, r.quantity.as_str()) {
            let name = match r.stage {
                Some(s) => format!("{} (stage {s})", r.quantity),
                None => r.quantity.clone(),
            };
            push(&mut series, name, (t, r.value));
        }
    }
    Chart {
        title: "Energy".into(),
        x_label: "t".into(),
        y_label: "energy".into(),
        log_x: false,
        log_y: false,
        series,
        notes: Vec::new(),
    }
}

/// Per-stage quantities against λ on log-log axes, with fitted slopes.
pub fn rate_chart(rows: &[Row]) -> Chart {
    let mut series = Vec::new();
    for r in rows {
        if let (None, Some(l)) = (r.t, r.lambda) {
            push(&mut series, r.quantity.clone(), (l as f64, r.value));
        }
    }
    let notes = series
        .iter()
        .filter_map(|s| {
            let (x, y): (Vec<f64>, Vec<f64>) = s.points.iter().filter(|p| p.1 > 0.0).copied().unzip();
            let fit = RateFit::fit(&x, &y).ok()?;
            Some(format!("{}: slope {:.4}", s.name, fit.slope))
        })
        .collect();
    Chart {
        title: "Norms against frequency".into(),
        x_label: "lambda".into(),
        y_label: "value".into(),
        log_x: true,
        log_y: true,
        series,
        notes,
    }
}

/// Reynolds stress and its target by stage.
pub fn contraction_chart(rows: &[Row]) -> Chart {
    let mut series = Vec::new();
    for r in rows {
        if let (None, Some(st), "reynolds_sup" | "reynolds_target") = (r.t, r.stage, r.quantity.as_str()) {
            push(&mut series, r.quantity.clone(), (st as f64, r.value));
        }
    }
    Chart {
        title: "Reynolds stress by stage".into(),
        x_label: "stage".into(),
        y_label: "sup |R|".into(),
        log_x: false,
        log_y: true,
        series,
        notes: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_chart_has_axes() {
        let svg = rate_chart(&[]).render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("<rect x="));
        assert!(!svg.contains("polyline"));
    }

    #[test]
    fn slope_annotation_matches_the_fit() {
        let rows: Vec<Row> = [16u64, 32, 64, 128]
            .iter()
            .map(|l| Row {
                lambda: Some(*l),
                ..Row::new("w_c_sup", (*l as f64).powf(-0.5))
            })
            .collect();
        let c = rate_chart(&rows);
        assert_eq!(c.notes, vec!["w_c_sup: slope -0.5000".to_string()]);
        assert_eq!(c.render(), rate_chart(&rows).render());
    }
}
