use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use super::{Experiment, HarnessError, LearningCurve};

/// Writes `iteration,mean_rho,var_rho` rows. Values are printed as the
/// shortest decimals that parse back to the same numbers.
pub fn write_curve_csv<W: Write>(curve: &LearningCurve, writer: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["iteration", "mean_rho", "var_rho"])?;
    for (i, (m, v)) in curve.mean.iter().zip(&curve.var).enumerate() {
        w.write_record([i.to_string(), m.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back the mean and variance columns written by [`write_curve_csv`].
pub fn read_curve_csv<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>), HarnessError> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != ["iteration", "mean_rho", "var_rho"] {
        return Err(HarnessError::Config(format!("unexpected curve header {header:?}")));
    }
    let (mut mean, mut var) = (Vec::new(), Vec::new());
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let field = |k: usize| -> Result<f64, HarnessError> {
            record[k]
                .parse()
                .map_err(|_| HarnessError::Config(format!("row {}: bad number `{}`", row + 1, &record[k])))
        };
        mean.push(field(1)?);
        var.push(field(2)?);
    }
    Ok((mean, var))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Static SVG of the mean curve with a one-standard-deviation band.
pub fn render_svg(curve: &LearningCurve) -> String {
    let n = curve.len();
    let std: Vec<f64> = curve.var.iter().map(|v| v.max(0.0).sqrt()).collect();
    let lower: Vec<f64> = curve.mean.iter().zip(&std).map(|(m, s)| m - s).collect();
    let upper: Vec<f64> = curve.mean.iter().zip(&std).map(|(m, s)| m + s).collect();
    let (mut lo, mut hi) = lower
        .iter()
        .chain(&upper)
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(lo.is_finite() && hi.is_finite()) {
        (lo, hi) = (-1.0, 1.0);
    }
    if hi - lo < 1e-9 {
        lo -= 0.5;
        hi += 0.5;
    }
    let px = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (n.max(2) - 1) as f64;
    let py = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v.clamp(lo, hi) - lo) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    if lo < 0.0 && hi > 0.0 {
        let z = py(0.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{x0}" y1="{z:.2}" x2="{x1}" y2="{z:.2}" stroke="#999" stroke-dasharray="4 4"/>"##
        );
    }
    if n > 0 {
        let mut band = String::new();
        for (i, v) in upper.iter().enumerate() {
            let _ = write!(band, "{:.2},{:.2} ", px(i), py(*v));
        }
        for (i, v) in lower.iter().enumerate().rev() {
            let _ = write!(band, "{:.2},{:.2} ", px(i), py(*v));
        }
        let _ = writeln!(
            svg,
            r##"<polygon points="{}" fill="#4c72b0" fill-opacity="0.25" stroke="none"/>"##,
            band.trim_end()
        );
        let line: Vec<String> = curve
            .mean
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.2},{:.2}", px(i), py(*v)))
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="#4c72b0" stroke-width="2"/>"##,
            line.join(" ")
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{x0}" y="{}" font-family="sans-serif" font-size="12">{hi:.3}</text>"#,
        y1 - 8.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{x0}" y="{}" font-family="sans-serif" font-size="12">{lo:.3}</text>"#,
        y0 + 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">iteration (0 to {})</text>"#,
        x1,
        y0 + 16.0,
        n.saturating_sub(1)
    );
    svg.push_str("</svg>\n");
    svg
}

/// Writes `curve.csv`, `config.json` and `curve.svg` into `dir`, creating it
/// if needed.
pub fn emit_outputs(curve: &LearningCurve, exp: &Experiment, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    write_curve_csv(curve, std::fs::File::create(dir.join("curve.csv"))?)?;
    let config = serde_json::json!({
        "config_hash": curve.config_hash,
        "seeds": curve.seeds,
        "experiment": exp,
    });
    std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&config)? + "\n")?;
    std::fs::write(dir.join("curve.svg"), render_svg(curve))?;
    Ok(())
}
