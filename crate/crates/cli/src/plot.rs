//! Two-panel SVG of training curves: loss on the left, accuracy on the right. Training
//! series are dashed, validation series solid.

use std::fmt::Write;

use lie_eqgnn::train::EpochMetrics;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 50.0;
const TRAIN_COLOR: &str = "#1f77b4";
const VAL_COLOR: &str = "#d62728";

struct Panel<'a> {
    title: &'a str,
    train: Vec<(f64, f64)>,
    val: Vec<(f64, f64)>,
}

impl Panel<'_> {
    fn y_range(&self) -> (f64, f64) {
        let ys = self.train.iter().chain(&self.val).map(|p| p.1).filter(|y| y.is_finite());
        let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        if !lo.is_finite() {
            return (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    }
}

fn polyline(out: &mut String, pts: &[(f64, f64)], map: impl Fn(f64, f64) -> (f64, f64), color: &str, dashed: bool) {
    let coords: Vec<String> = pts
        .iter()
        .filter(|p| p.1.is_finite())
        .map(|&(x, y)| {
            let (sx, sy) = map(x, y);
            format!("{sx:.2},{sy:.2}")
        })
        .collect();
    if coords.is_empty() {
        return;
    }
    let dash = if dashed { r#" stroke-dasharray="6,4""# } else { "" };
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#,
        coords.join(" ")
    );
}

fn draw_panel(out: &mut String, p: &Panel<'_>, x0: f64, epochs: (f64, f64)) {
    let (ylo, yhi) = p.y_range();
    let (left, top) = (x0 + MARGIN, MARGIN);
    let (w, h) = (PANEL_W - 1.5 * MARGIN, PANEL_H - 2.0 * MARGIN);
    let xspan = (epochs.1 - epochs.0).max(1.0);
    let map = |x: f64, y: f64| (left + (x - epochs.0) / xspan * w, top + (yhi - y) / (yhi - ylo) * h);

    let _ = writeln!(out, r##"<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="#333"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
        left + w / 2.0,
        top - 15.0,
        p.title
    );
    for k in 0..=4 {
        let y = ylo + (yhi - ylo) * k as f64 / 4.0;
        let (_, sy) = map(epochs.0, y);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{y:.3}</text>"#,
            left - 4.0,
            sy + 3.0
        );
    }
    for (x, anchor) in [(epochs.0, "start"), (epochs.1, "end")] {
        let (sx, _) = map(x, ylo);
        let _ = writeln!(
            out,
            r#"<text x="{sx:.1}" y="{:.1}" text-anchor="{anchor}" font-size="10">{x}</text>"#,
            top + h + 14.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">epoch</text>"#,
        left + w / 2.0,
        top + h + 30.0
    );
    polyline(out, &p.train, map, TRAIN_COLOR, true);
    polyline(out, &p.val, map, VAL_COLOR, false);

    let (lx, ly) = (left + w - 110.0, top + 12.0);
    let _ = writeln!(
        out,
        r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{TRAIN_COLOR}" stroke-width="2" stroke-dasharray="6,4"/>"#,
        lx + 24.0
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="10">train</text>"#, lx + 30.0, ly + 3.0);
    let _ = writeln!(
        out,
        r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="{VAL_COLOR}" stroke-width="2"/>"#,
        ly + 14.0,
        lx + 24.0,
        ly + 14.0
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="10">validation</text>"#, lx + 30.0, ly + 17.0);
}

pub fn render_svg(rows: &[EpochMetrics]) -> String {
    let series = |f: fn(&EpochMetrics) -> f64| rows.iter().map(|r| (r.epoch as f64, f(r))).collect::<Vec<_>>();
    let loss = Panel { title: "loss", train: series(|r| r.train_loss), val: series(|r| r.val_loss) };
    let acc = Panel { title: "accuracy", train: series(|r| r.train_acc), val: series(|r| r.val_acc) };
    let first = rows.first().map_or(0.0, |r| r.epoch as f64);
    let last = rows.last().map_or(1.0, |r| r.epoch as f64);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{PANEL_H}" viewBox="0 0 {} {PANEL_H}">"#,
        2.0 * PANEL_W,
        2.0 * PANEL_W
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    draw_panel(&mut out, &loss, 0.0, (first, last));
    draw_panel(&mut out, &acc, PANEL_W, (first, last));
    out.push_str("</svg>\n");
    out
}
