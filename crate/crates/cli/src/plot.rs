use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use plotters::prelude::*;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
pub struct SummaryRow {
    pub decoder: String,
    pub family: String,
    pub d: usize,
    pub p: f64,
    pub f_hat: Option<f64>,
    pub f_se: Option<f64>,
    pub timesteps_mean: Option<f64>,
    pub timesteps_se: Option<f64>,
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows = reader.deserialize().collect::<Result<Vec<SummaryRow>, _>>().context("malformed summary CSV")?;
    if rows.is_empty() {
        bail!("summary CSV has no data rows");
    }
    Ok(rows)
}

const COLORS: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

type Series = BTreeMap<String, Vec<(f64, f64, f64)>>;

fn bounds(series: &Series, log: bool) -> Option<((f64, f64), (f64, f64))> {
    let pts: Vec<&(f64, f64, f64)> = series.values().flatten().collect();
    if pts.is_empty() {
        return None;
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &&(x, y, e) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        let lo = if log { (y - e).max(y * 0.1) } else { y - e };
        y0 = y0.min(lo);
        y1 = y1.max(y + e);
    }
    if log {
        Some(((x0 / 1.2, x1 * 1.2), (y0 / 1.5, y1 * 1.5)))
    } else {
        let pad = 0.05 * (y1 - y0).max(1.0);
        Some(((x0 - 1.0, x1 + 1.0), ((y0 - pad).min(0.0), y1 + pad)))
    }
}

fn err<E: std::fmt::Display>(e: E) -> anyhow::Error {
    anyhow::anyhow!("{e}")
}

/// Mesh, one line plus error bars per series, and a legend. A macro because
/// linear and logarithmic charts have unrelated coordinate types.
macro_rules! draw_series {
    ($chart:expr, $series:expr, $x_desc:expr, $y_desc:expr) => {{
        let mut chart = $chart;
        chart.configure_mesh().x_desc($x_desc).y_desc($y_desc).draw().map_err(err)?;
        for (i, (label, pts)) in $series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            chart
                .draw_series(LineSeries::new(pts.iter().map(|&(x, y, _)| (x, y)), color.stroke_width(2)))
                .map_err(err)?
                .label(label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
            chart
                .draw_series(pts.iter().map(|&(x, y, e): &(f64, f64, f64)| {
                    ErrorBar::new_vertical(x, (y - e).max(y * 0.1).min(y), y, y + e, color.filled(), 6)
                }))
                .map_err(err)?;
        }
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .background_style(WHITE.mix(0.8))
            .draw()
            .map_err(err)?;
    }};
}

/// Logical error rate against `p`, one curve per `d`, both axes logarithmic.
/// Points with a zero rate cannot be shown on a log scale and are skipped.
pub fn threshold(rows: &[SummaryRow], out: &Path) -> Result<()> {
    let mut series = Series::new();
    for r in rows {
        if let (Some(f), Some(se)) = (r.f_hat, r.f_se) {
            if f > 0.0 && r.p > 0.0 {
                series.entry(format!("d = {:>2}", r.d)).or_default().push((r.p, f, se));
            }
        }
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let Some(((x0, x1), (y0, y1))) = bounds(&series, true) else {
        bail!("no positive logical error rates to plot");
    };
    let root = SVGBackend::new(out, (800, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let title = format!("{} / {}", rows[0].decoder, rows[0].family);
    let chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(48)
        .y_label_area_size(72)
        .build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())
        .map_err(err)?;
    draw_series!(chart, series, "physical error rate p", "logical bitflips per d rounds");
    root.present().map_err(err)?;
    Ok(())
}

/// Timesteps per block of `d` rounds against `d`, one curve per `p`.
pub fn runtime(rows: &[SummaryRow], out: &Path, log: bool) -> Result<()> {
    let mut series = Series::new();
    for r in rows {
        if let (Some(t), Some(se)) = (r.timesteps_mean, r.timesteps_se) {
            series.entry(format!("p = {}", r.p)).or_default().push((r.d as f64, t, se));
        }
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let Some(((x0, x1), (y0, y1))) = bounds(&series, log) else {
        bail!("no timestep columns to plot");
    };
    let root = SVGBackend::new(out, (800, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let title = format!("{} / {}", rows[0].decoder, rows[0].family);
    let mut builder = ChartBuilder::on(&root);
    builder.caption(title, ("sans-serif", 22)).margin(12).x_label_area_size(48).y_label_area_size(72);
    let (xd, yd) = ("code distance d", "timesteps per d rounds");
    if log {
        let chart = builder
            .build_cartesian_2d((x0.max(1.0)..x1).log_scale(), (y0.max(1.0)..y1).log_scale())
            .map_err(err)?;
        draw_series!(chart, series, xd, yd);
    } else {
        let chart = builder.build_cartesian_2d(x0..x1, y0..y1).map_err(err)?;
        draw_series!(chart, series, xd, yd);
    }
    root.present().map_err(err)?;
    Ok(())
}
