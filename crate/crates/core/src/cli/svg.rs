//! Standalone SVG chart of mean error against samples, one series per config
//! with a shaded band of plus/minus one standard error.

use std::fmt::Write;

use super::output::SummaryRow;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

struct Series<'a> {
    id: &'a str,
    points: Vec<(f64, f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders the chart. Errors if no row carries a mean.
///
/// The y axis is logarithmic when every mean is positive, linear otherwise;
/// either way larger errors sit higher on the page.
pub fn render(rows: &[SummaryRow], title: &str) -> Result<String, String> {
    let mut series: Vec<Series> = Vec::new();
    for r in rows {
        let Some(mean) = r.mean else { continue };
        let se = r.stderr.unwrap_or(0.0);
        match series.iter_mut().find(|s| s.id == r.config_id) {
            Some(s) => s.points.push((r.checkpoint as f64, mean, se)),
            None => series.push(Series {
                id: &r.config_id,
                points: vec![(r.checkpoint as f64, mean, se)],
            }),
        }
    }
    if series.is_empty() {
        return Err("summary has no rows with a mean error".into());
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let all = || series.iter().flat_map(|s| s.points.iter());
    let x_min = all().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut x_max = all().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    let log = all().all(|p| p.1 > 0.0);
    let min_mean = all().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let transform = |v: f64| if log { v.max(min_mean / 10.0).log10() } else { v };
    let (mut y_lo, mut y_hi) = if log {
        (
            all().map(|p| transform(p.1 - p.2)).fold(f64::INFINITY, f64::min).floor(),
            all().map(|p| transform(p.1 + p.2)).fold(f64::NEG_INFINITY, f64::max).ceil(),
        )
    } else {
        (0.0, all().map(|p| p.1 + p.2).fold(0.0, f64::max).max(1e-12))
    };
    if y_hi <= y_lo {
        y_hi = y_lo + 1.0;
    }
    if !log {
        y_lo = 0.0;
    }

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| TOP + (y_hi - transform(y)) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="25" text-anchor="middle" font-size="15">{}</text>"#,
        fmt(LEFT + plot_w / 2.0),
        escape(title)
    );

    // axes and ticks
    let (x0, y0, x1, y1) = (LEFT, TOP + plot_h, LEFT + plot_w, TOP);
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        fmt(x0),
        fmt(y0),
        fmt(x1),
        fmt(y0)
    );
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        fmt(x0),
        fmt(y0),
        fmt(x0),
        fmt(y1)
    );
    for i in 0..=5 {
        let x = x_min + (x_max - x_min) * i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt(sx(x)),
            fmt(y0 + 18.0),
            x.round()
        );
    }
    let y_ticks: Vec<(f64, String)> = if log {
        (y_lo as i32..=y_hi as i32)
            .map(|e| (10f64.powi(e), format!("1e{e}")))
            .collect()
    } else {
        (0..=5)
            .map(|i| {
                let v = y_hi * i as f64 / 5.0;
                (v, format!("{v:.3}"))
            })
            .collect()
    };
    for (v, label) in y_ticks {
        let y = TOP + (y_hi - if log { v.log10() } else { v }) / (y_hi - y_lo) * plot_h;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{label}</text>"#,
            fmt(x0 - 6.0),
            fmt(y + 4.0)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">samples</text>"#,
        fmt(LEFT + plot_w / 2.0),
        fmt(HEIGHT - 15.0)
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">mean spectral error</text>"#,
        fmt(TOP + plot_h / 2.0),
        fmt(TOP + plot_h / 2.0)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let upper = s.points.iter().map(|p| format!("{},{}", fmt(sx(p.0)), fmt(sy(p.1 + p.2))));
        let lower = s.points.iter().rev().map(|p| format!("{},{}", fmt(sx(p.0)), fmt(sy(p.1 - p.2))));
        let band: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            svg,
            r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            band.join(" ")
        );
        let line: Vec<String> = s.points.iter().map(|p| format!("{},{}", fmt(sx(p.0)), fmt(sy(p.1)))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-config="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            escape(s.id),
            line.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="14" height="4" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            fmt(lx),
            fmt(ly - 4.0),
            fmt(lx + 20.0),
            fmt(ly + 1.0),
            escape(s.id)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, checkpoint: u64, mean: f64, stderr: f64) -> SummaryRow {
        SummaryRow {
            config_id: id.into(),
            checkpoint,
            mean: Some(mean),
            stderr: Some(stderr),
            count: 3,
        }
    }

    fn polylines(svg: &str) -> Vec<Vec<(f64, f64)>> {
        svg.lines()
            .filter(|l| l.starts_with("<polyline"))
            .map(|l| {
                let pts = l.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
                pts.split(' ')
                    .map(|p| {
                        let (x, y) = p.split_once(',').unwrap();
                        (x.parse().unwrap(), y.parse().unwrap())
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn one_config_three_checkpoints() {
        let rows = [row("a", 10, 0.5, 0.01), row("a", 20, 0.2, 0.01), row("a", 30, 0.1, 0.0)];
        let svg = render(&rows, "t").unwrap();
        let lines = polylines(&svg);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 3);
        assert_eq!(svg.matches("<polygon").count(), 1);
    }

    #[test]
    fn decreasing_series_goes_down_the_page() {
        for stderr in [0.0, 0.05] {
            let rows = [row("a", 0, 0.9, stderr), row("a", 5, 0.4, stderr), row("a", 9, 0.0, 0.0)];
            let ys: Vec<f64> = polylines(&render(&rows, "t").unwrap())[0].iter().map(|p| p.1).collect();
            assert!(ys.windows(2).all(|w| w[0] < w[1]), "{ys:?}");
        }
        let rows = [row("a", 0, 0.9, 0.1), row("a", 5, 0.01, 0.001), row("a", 9, 0.0001, 0.0)];
        let ys: Vec<f64> = polylines(&render(&rows, "t").unwrap())[0].iter().map(|p| p.1).collect();
        assert!(ys.windows(2).all(|w| w[0] < w[1]), "{ys:?}");
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(render(&[], "t").is_err());
    }

    #[test]
    fn ids_are_escaped() {
        let svg = render(&[row("a<b", 1, 0.5, 0.0)], "x & y").unwrap();
        assert!(svg.contains("a&lt;b") && svg.contains("x &amp; y"));
    }
}
