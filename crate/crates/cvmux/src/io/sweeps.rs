use cvmux_core::analysis::{FitResult, SweepAxis, SweepResult};
use serde::Serialize;

/// Tidy row: one per (variant, x).
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub variant: String,
    pub axis: &'static str,
    pub x: f64,
    pub key_rate: f64,
    pub raw_key: f64,
    pub total_mi: f64,
    pub holevo: f64,
}

fn axis_name(a: SweepAxis) -> &'static str {
    match a {
        SweepAxis::Pairs => "pairs",
        SweepAxis::LossDb => "loss_db",
    }
}

pub fn sweep_rows(curves: &[(String, &SweepResult)]) -> Vec<SweepRow> {
    curves
        .iter()
        .flat_map(|(label, s)| {
            (0..s.axis.len()).map(move |i| SweepRow {
                variant: label.clone(),
                axis: axis_name(s.axis_kind),
                x: s.axis[i],
                key_rate: s.key_rates[i],
                raw_key: s.raw_keys[i],
                total_mi: s.total_mi[i],
                holevo: s.holevo[i],
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRow {
    pub variant: String,
    pub x: f64,
    pub predicted: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn fit_rows(fits: &[(String, &FitResult)], xs: &[f64]) -> Vec<FitRow> {
    fits.iter()
        .flat_map(|(label, f)| {
            xs.iter().map(move |&x| {
                let (lower, upper) = f.band(x);
                FitRow {
                    variant: label.clone(),
                    x,
                    predicted: f.predict(x),
                    lower,
                    upper,
                }
            })
        })
        .collect()
}

/// Row of a per-figure plot-data file.
#[derive(Debug, Clone, Serialize)]
pub struct PlotRow {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl PlotRow {
    fn point(series: &str, x: f64, y: f64) -> Self {
        Self {
            series: series.into(),
            x,
            y,
            lower: None,
            upper: None,
        }
    }
}

/// Key against number of pairs, plus each fit's band over `fit_xs`.
pub fn fig2_left_rows(
    curves: &[(String, &SweepResult)],
    fits: &[(String, &FitResult)],
    fit_xs: &[f64],
) -> Vec<PlotRow> {
    let mut rows: Vec<PlotRow> = curves
        .iter()
        .flat_map(|(label, s)| {
            s.axis
                .iter()
                .zip(&s.key_rates)
                .map(move |(&x, &y)| PlotRow::point(label, x, y))
        })
        .collect();
    rows.extend(fit_rows(fits, fit_xs).into_iter().map(|r| PlotRow {
        series: format!("{}_fit", r.variant),
        x: r.x,
        y: r.predicted,
        lower: Some(r.lower),
        upper: Some(r.upper),
    }));
    rows
}

#[derive(Debug, Clone, Copy)]
pub enum Fig2Right {
    MutualInformation,
    Holevo,
}

pub fn fig2_right_rows(curves: &[(String, &SweepResult)], which: Fig2Right) -> Vec<PlotRow> {
    curves
        .iter()
        .flat_map(|(label, s)| {
            let ys = match which {
                Fig2Right::MutualInformation => &s.total_mi,
                Fig2Right::Holevo => &s.holevo,
            };
            s.axis
                .iter()
                .zip(ys)
                .map(move |(&x, &y)| PlotRow::point(label, x, y))
        })
        .collect()
}

/// `(db, predicted, lower, upper)`.
pub type BandPoint = (f64, f64, f64, f64);

/// Key against loss for each curve, plus extrapolated bands.
pub fn fig3_rows(
    curves: &[(String, &SweepResult)],
    extrapolated: &[(String, Vec<BandPoint>)],
) -> Vec<PlotRow> {
    let mut rows: Vec<PlotRow> = curves
        .iter()
        .flat_map(|(label, s)| {
            s.axis
                .iter()
                .zip(&s.key_rates)
                .map(move |(&x, &y)| PlotRow::point(label, x, y))
        })
        .collect();
    for (label, pts) in extrapolated {
        rows.extend(pts.iter().map(|&(x, y, lo, hi)| PlotRow {
            series: label.clone(),
            x,
            y,
            lower: Some(lo),
            upper: Some(hi),
        }));
    }
    rows
}
