//! Minimal static SVG log-log chart: one point series plus the fitted line.
//! No timestamps or other run-varying content — byte-identical on rerun.

use selfnorm::metrics::RateReport;

const W: f64 = 640.0;
const H: f64 = 440.0;
const MARGIN: f64 = 60.0;

fn fmt(v: f64) -> String {
    // Fixed short decimal keeps the file stable and readable.
    format!("{v:.2}")
}

/// Render a log10(error)-vs-log10(n) scatter with the fitted slope line.
pub fn rate_plot(report: &RateReport, title: &str) -> String {
    let pts: Vec<(f64, f64)> =
        report.pairs.iter().map(|&(n, e)| ((n as f64).log10(), e.log10())).collect();
    let (x_lo, x_hi) = pad(bounds(pts.iter().map(|p| p.0)));
    let (y_lo, y_hi) = pad(bounds(pts.iter().map(|p| p.1)));
    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y_lo) / (y_hi - y_lo) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"14\">{}</text>\n",
        W / 2.0,
        title
    ));
    // axes
    s.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN
    ));
    // ticks: data x positions, 5 even y positions
    for &(x, _) in &pts {
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n\
             <text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\" font-family=\"monospace\" \
             font-size=\"11\">{4}</text>\n",
            sx(x),
            H - MARGIN,
            H - MARGIN + 5.0,
            H - MARGIN + 18.0,
            fmt(x)
        ));
    }
    for i in 0..=4 {
        let y = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n\
             <text x=\"{3}\" y=\"{4}\" text-anchor=\"end\" font-family=\"monospace\" \
             font-size=\"11\">{5}</text>\n",
            MARGIN - 5.0,
            sy(y),
            MARGIN,
            MARGIN - 8.0,
            sy(y) + 4.0,
            fmt(y)
        ));
    }
    // axis labels
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"12\">log10 n</text>\n",
        W / 2.0,
        H - 14.0
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"12\" transform=\"rotate(-90 16 {0})\">log10 error</text>\n",
        H / 2.0
    ));
    // fitted line y = slope*x + intercept, converted to base-10 logs
    let ln10 = std::f64::consts::LN_10;
    let line_y = |x: f64| report.slope * x + report.intercept / ln10;
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888\" \
         stroke-dasharray=\"6 3\"/>\n",
        sx(x_lo),
        sy(line_y(x_lo)),
        sx(x_hi),
        sy(line_y(x_hi))
    ));
    // points
    for &(x, y) in &pts {
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#1f6fb2\"/>\n",
            sx(x),
            sy(y)
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"monospace\" \
         font-size=\"12\">slope {}</text>\n",
        W - MARGIN,
        MARGIN + 16.0,
        fmt(report.slope)
    ));
    s.push_str("</svg>\n");
    s
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn pad((lo, hi): (f64, f64)) -> (f64, f64) {
    let span = (hi - lo).max(1e-3);
    (lo - 0.08 * span, hi + 0.08 * span)
}
