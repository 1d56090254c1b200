//! CSV and SVG emission for trajectories and expectation series.

use std::io::Write;
use std::path::Path;

use crate::dynamics::ReducedState;
use crate::egorov::ExpectationSeries;
use crate::error::Result;
use crate::integrators::{ClassicalState, Trajectory};
use crate::packet::PacketParams;

/// Full-precision float formatting: 17 significant digits, `.` decimal.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn upper_labels(prefix: &str, d: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in i..d {
            if d == 1 {
                out.push(prefix.to_string());
            } else {
                out.push(format!("{prefix}{}{}", i + 1, j + 1));
            }
        }
    }
    out
}

fn vec_labels(prefix: &str, d: usize) -> Vec<String> {
    if d == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=d).map(|i| format!("{prefix}{i}")).collect()
    }
}

/// `t,q...,p...,energy` rows of a classical run.
pub fn write_classical_csv<W: Write>(mut w: W, traj: &Trajectory<ClassicalState>) -> Result<()> {
    let d = traj.states[0].q.len();
    let mut header = vec!["t".to_string()];
    header.extend(vec_labels("q", d));
    header.extend(vec_labels("p", d));
    header.push("energy".to_string());
    writeln!(w, "{}", header.join(","))?;
    for (k, s) in traj.states.iter().enumerate() {
        let mut row = vec![fmt_f64(traj.times[k])];
        row.extend(s.q.iter().map(|v| fmt_f64(*v)));
        row.extend(s.p.iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(traj.energies[k]));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// `t,q...,p...,A...,Bn...,energy,norm` rows of a reduced packet run. The
/// reduced system lives on the unit-norm level set, so `norm` is 1.
pub fn write_reduced_csv<W: Write>(mut w: W, traj: &Trajectory<ReducedState>) -> Result<()> {
    let d = traj.states[0].dim();
    let mut header = vec!["t".to_string()];
    header.extend(vec_labels("q", d));
    header.extend(vec_labels("p", d));
    header.extend(upper_labels("A", d));
    header.extend(upper_labels("Bn", d));
    header.push("energy".to_string());
    header.push("norm".to_string());
    writeln!(w, "{}", header.join(","))?;
    for (k, s) in traj.states.iter().enumerate() {
        let mut row = vec![fmt_f64(traj.times[k])];
        for v in s.to_flat() {
            row.push(fmt_f64(v));
        }
        row.push(fmt_f64(traj.energies[k]));
        row.push(fmt_f64(1.0));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// `t,q...,p...,A...,B...,phi,delta,energy,norm` rows of a full-system run.
pub fn write_full_csv<W: Write>(mut w: W, traj: &Trajectory<PacketParams>) -> Result<()> {
    let d = traj.states[0].dim();
    let mut header = vec!["t".to_string()];
    header.extend(vec_labels("q", d));
    header.extend(vec_labels("p", d));
    header.extend(upper_labels("A", d));
    header.extend(upper_labels("B", d));
    header.push("phi".to_string());
    header.push("delta".to_string());
    header.push("energy".to_string());
    header.push("norm".to_string());
    writeln!(w, "{}", header.join(","))?;
    for (k, s) in traj.states.iter().enumerate() {
        let mut row = vec![fmt_f64(traj.times[k])];
        for v in s.to_flat() {
            row.push(fmt_f64(v));
        }
        row.push(fmt_f64(traj.energies[k]));
        row.push(fmt_f64(traj.norms[k]));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// `t,mean_x...,mean_p...,mean_energy,ess` rows of an expectation series.
pub fn write_expectations_csv<W: Write>(mut w: W, series: &ExpectationSeries) -> Result<()> {
    let d = series.mean_q[0].len();
    let mut header = vec!["t".to_string()];
    header.extend(vec_labels("mean_x", d));
    header.extend(vec_labels("mean_p", d));
    header.push("mean_energy".to_string());
    header.push("ess".to_string());
    writeln!(w, "{}", header.join(","))?;
    for k in 0..series.times.len() {
        let mut row = vec![fmt_f64(series.times[k])];
        row.extend(series.mean_q[k].iter().map(|v| fmt_f64(*v)));
        row.extend(series.mean_p[k].iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(series.mean_energy[k]));
        row.push(fmt_f64(series.effective_samples[k]));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// `t,classical_energy,semiclassical_energy,egorov_energy` comparison rows.
pub fn write_energies_csv<W: Write>(
    mut w: W,
    classical: &Trajectory<ClassicalState>,
    reduced: &Trajectory<ReducedState>,
    egorov: Option<&ExpectationSeries>,
) -> Result<()> {
    writeln!(w, "t,classical_energy,semiclassical_energy,egorov_energy")?;
    for k in 0..classical.times.len() {
        let eg = egorov
            .and_then(|s| s.mean_energy.get(k))
            .map(|v| fmt_f64(*v))
            .unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(classical.times[k]),
            fmt_f64(classical.energies[k]),
            fmt_f64(reduced.energies[k]),
            eg
        )?;
    }
    Ok(())
}

/// One curve of an SVG line plot.
pub struct Curve<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub dash: Option<&'a str>,
    pub points: Vec<(f64, f64)>,
}

/// Minimal SVG polyline plot: axes, ticks, labeled curves. No dependencies.
pub fn write_svg_plot<W: Write>(
    mut w: W,
    title: &str,
    x_label: &str,
    y_label: &str,
    curves: &[Curve<'_>],
) -> Result<()> {
    const WIDTH: f64 = 800.0;
    const HEIGHT: f64 = 600.0;
    const MARGIN: f64 = 60.0;

    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for c in curves {
        for &(x, y) in &c.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !xmin.is_finite() || xmin == xmax {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if !ymin.is_finite() || ymin == ymax {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let pad_x = 0.04 * (xmax - xmin);
    let pad_y = 0.06 * (ymax - ymin);
    xmin -= pad_x;
    xmax += pad_x;
    ymin -= pad_y;
    ymax += pad_y;

    let sx = (WIDTH - 2.0 * MARGIN) / (xmax - xmin);
    let sy = (HEIGHT - 2.0 * MARGIN) / (ymax - ymin);
    let px = |x: f64| MARGIN + (x - xmin) * sx;
    let py = |y: f64| HEIGHT - MARGIN - (y - ymin) * sy;

    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(
        w,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )?;
    writeln!(
        w,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#,
        WIDTH / 2.0
    )?;
    // axes
    writeln!(
        w,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )?;
    writeln!(
        w,
        r#"<line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN
    )?;
    // ticks
    for k in 0..=5 {
        let fx = xmin + (xmax - xmin) * k as f64 / 5.0;
        let fy = ymin + (ymax - ymin) * k as f64 / 5.0;
        writeln!(
            w,
            r#"<line x1="{x}" y1="{b}" x2="{x}" y2="{b2}" stroke="black"/><text x="{x}" y="{ty}" font-family="sans-serif" font-size="11" text-anchor="middle">{fx:.3}</text>"#,
            x = px(fx),
            b = HEIGHT - MARGIN,
            b2 = HEIGHT - MARGIN + 6.0,
            ty = HEIGHT - MARGIN + 20.0
        )?;
        writeln!(
            w,
            r#"<line x1="{m2}" y1="{y}" x2="{m}" y2="{y}" stroke="black"/><text x="{tx}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="end">{fy:.3}</text>"#,
            m = MARGIN,
            m2 = MARGIN - 6.0,
            y = py(fy),
            tx = MARGIN - 10.0
        )?;
    }
    writeln!(
        w,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0
    )?;
    writeln!(
        w,
        r#"<text x="18" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">{y_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    )?;
    for (idx, c) in curves.iter().enumerate() {
        let pts: Vec<String> = c
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let dash = c
            .dash
            .map(|d| format!(r#" stroke-dasharray="{d}""#))
            .unwrap_or_default();
        writeln!(
            w,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
            pts.join(" "),
            c.color
        )?;
        let ly = MARGIN + 18.0 * idx as f64;
        writeln!(
            w,
            r#"<line x1="{x1}" y1="{ly}" x2="{x2}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{tx}" y="{ty}" font-family="sans-serif" font-size="12">{label}</text>"#,
            x1 = WIDTH - MARGIN - 150.0,
            x2 = WIDTH - MARGIN - 120.0,
            color = c.color,
            tx = WIDTH - MARGIN - 112.0,
            ty = ly + 4.0,
            label = c.label
        )?;
    }
    writeln!(w, "</svg>")?;
    Ok(())
}

/// Create (or truncate) a file in `dir` and hand it to a writer closure.
pub fn to_file(dir: &Path, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut file = std::io::BufWriter::new(std::fs::File::create(dir.join(name))?);
    f(&mut file)?;
    file.flush()?;
    Ok(())
}
