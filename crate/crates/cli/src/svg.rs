//! Self-contained SVG line plots of aggregated cluster shapes.

use std::fmt::Write;

use lyricarc::clustering::AggregateShape;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 40.0;

const CI_COLORS: [&str; 6] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn polyline(
    out: &mut String,
    xs: &[f64],
    ys: &[f64],
    stroke: &str,
    dash: Option<&str>,
    width: f64,
) {
    let pts: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    let dash = dash
        .map(|d| format!(" stroke-dasharray=\"{d}\""))
        .unwrap_or_default();
    let _ = writeln!(
        out,
        "  <polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"{dash} points=\"{}\"/>",
        pts.join(" ")
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// One panel with every cluster: solid centre line, coloured dashed 99%
/// CI lines and black dashed ±1 SD lines.
pub fn render_shapes(shapes: &[AggregateShape], title: &str, caption: &str) -> String {
    let bins = shapes.first().map_or(0, |s| s.center.len());
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    for s in shapes {
        for v in s.sd_low.iter().chain(&s.sd_high).chain(&s.center) {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        if let Some((l, h)) = &s.ci99 {
            for v in l.iter().chain(h) {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
    }
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = (hi - lo) * 0.05;
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |b: usize| {
        LEFT + if bins > 1 {
            b as f64 / (bins - 1) as f64 * plot_w
        } else {
            0.0
        }
    };
    let sy = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;
    let xs: Vec<f64> = (0..bins).map(sx).collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" width=\"{WIDTH}\" height=\"{HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "  <title>{}</title>", escape(title));
    let _ = writeln!(
        out,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        out,
        "  <rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#444444\"/>"
    );
    let zero = sy(0.0);
    let _ = writeln!(
        out,
        "  <line x1=\"{LEFT}\" y1=\"{zero:.2}\" x2=\"{:.2}\" y2=\"{zero:.2}\" stroke=\"#999999\" stroke-width=\"0.5\"/>",
        LEFT + plot_w
    );
    for tick in [1usize, 25, 50, 75, 100] {
        if tick > bins {
            continue;
        }
        let x = sx(tick - 1);
        let _ = writeln!(
            out,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{tick}</text>",
            HEIGHT - BOTTOM + 16.0
        );
    }
    for v in [lo + pad, 0.0, hi - pad] {
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.3}</text>",
            LEFT - 6.0,
            sy(v) + 4.0
        );
    }
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">narrative time (%)</text>",
        LEFT + plot_w / 2.0,
        HEIGHT - 6.0
    );
    let _ = writeln!(
        out,
        "  <text x=\"{LEFT}\" y=\"16\" font-size=\"14\">{}</text>",
        escape(title)
    );
    let _ = writeln!(
        out,
        "  <text x=\"{LEFT}\" y=\"32\" fill=\"#555555\">{}</text>",
        escape(caption)
    );

    for s in shapes {
        let color = CI_COLORS[s.cluster % CI_COLORS.len()];
        let ys = |v: &[f64]| v.iter().map(|x| sy(*x)).collect::<Vec<_>>();
        polyline(&mut out, &xs, &ys(&s.sd_low), "#000000", Some("2,3"), 1.0);
        polyline(&mut out, &xs, &ys(&s.sd_high), "#000000", Some("2,3"), 1.0);
        if let Some((l, h)) = &s.ci99 {
            polyline(&mut out, &xs, &ys(l), color, Some("6,4"), 1.0);
            polyline(&mut out, &xs, &ys(h), color, Some("6,4"), 1.0);
        }
        polyline(&mut out, &xs, &ys(&s.center), color, None, 2.0);
        let label_y = TOP + 14.0 + 14.0 * s.cluster as f64;
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{label_y:.2}\" fill=\"{color}\" text-anchor=\"end\">cluster {} (n = {}, {:.1}%)</text>",
            LEFT + plot_w - 6.0,
            s.cluster,
            s.n,
            s.share * 100.0
        );
    }
    out.push_str("</svg>\n");
    out
}
