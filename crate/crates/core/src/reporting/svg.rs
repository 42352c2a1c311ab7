//! SVG 1.1 figures.
//!
//! Every panel is a `<g class="panel">` carrying its axis ranges
//! (`data-x-min`, `data-x-max`, `data-y-min`, `data-y-max`) and its plot
//! rectangle (`data-plot-x`, `data-plot-y`, `data-plot-width`,
//! `data-plot-height`). A data value `(x, y)` is drawn at
//!
//! ```text
//! px = plot_x + (x - x_min) / (x_max - x_min) * plot_width
//! py = plot_y + (y_max - y) / (y_max - y_min) * plot_height
//! ```
//!
//! Series are `<polyline class="series">` elements tagged with `data-model`
//! and `data-lambda2`; reference lines are `<line class="reference">` with
//! `data-value`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::distinct;
use crate::error::{Error, Result};
use crate::sim::ScenarioSummary;

const PANEL_WIDTH: f64 = 320.0;
const PANEL_HEIGHT: f64 = 250.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 14.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 42.0;
const TITLE_HEIGHT: f64 = 36.0;
const LEGEND_HEIGHT: f64 = 30.0;
const COLUMNS: usize = 3;

const COX_COLOR: &str = "#c0392b";
const FG_COLOR: &str = "#2471a3";
const LAMBDA_PALETTE: [&str; 8] =
    ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];
const BAND_RANGE: (f64, f64) = (0.7, 0.9);

/// Which model's bias a bias figure shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasModel {
    Cox,
    FineGray,
}

impl BiasModel {
    fn bias(self, s: &ScenarioSummary) -> f64 {
        match self {
            BiasModel::Cox => s.bias_cox,
            BiasModel::FineGray => s.bias_fg,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            BiasModel::Cox => "cox",
            BiasModel::FineGray => "fine-gray",
        }
    }
}

/// Whether a bias figure insists on one panel per default alpha level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelPolicy {
    /// Exactly four alpha levels.
    Strict,
    /// Whatever alpha levels are present, at least one.
    AllowPartial,
}

pub const STRICT_BIAS_PANELS: usize = 4;

#[derive(Clone, Copy)]
struct Axis {
    min: f64,
    max: f64,
}

impl Axis {
    fn padded(values: impl IntoIterator<Item = f64>, step: f64) -> Axis {
        let (lo, hi) = values
            .into_iter()
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if !lo.is_finite() {
            return Axis { min: -step, max: step };
        }
        let pad = ((hi - lo) * 0.05).max(step * 0.25);
        Axis { min: ((lo - pad) / step).floor() * step, max: ((hi + pad) / step).ceil() * step }
    }

    fn exact(values: &[f64]) -> Axis {
        let lo = values.first().copied().unwrap_or(0.0);
        let hi = values.last().copied().unwrap_or(1.0);
        if hi > lo {
            Axis { min: lo, max: hi }
        } else {
            Axis { min: lo - 0.1, max: hi + 0.1 }
        }
    }

    fn ticks(&self, step: f64) -> Vec<f64> {
        let first = (self.min / step).ceil() as i64;
        let last = (self.max / step).floor() as i64;
        (first..=last).map(|k| k as f64 * step).collect()
    }
}

struct Panel {
    x: f64,
    y: f64,
    width: f64,
    height: f64,
    x_axis: Axis,
    y_axis: Axis,
}

impl Panel {
    fn at(index: usize, columns: usize, x_axis: Axis, y_axis: Axis) -> Panel {
        let col = (index % columns) as f64;
        let row = (index / columns) as f64;
        Panel {
            x: col * PANEL_WIDTH + MARGIN_LEFT,
            y: TITLE_HEIGHT + LEGEND_HEIGHT + row * PANEL_HEIGHT + MARGIN_TOP,
            width: PANEL_WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
            height: PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM,
            x_axis,
            y_axis,
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.x + (x - self.x_axis.min) / (self.x_axis.max - self.x_axis.min) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.y + (self.y_axis.max - y) / (self.y_axis.max - self.y_axis.min) * self.height
    }

    fn open(&self, out: &mut String, label: &str, extra: &str) {
        let _ = writeln!(
            out,
            r#"<g class="panel"{extra} data-x-min="{}" data-x-max="{}" data-y-min="{}" data-y-max="{}" data-plot-x="{:.2}" data-plot-y="{:.2}" data-plot-width="{:.2}" data-plot-height="{:.2}">"#,
            self.x_axis.min, self.x_axis.max, self.y_axis.min, self.y_axis.max, self.x, self.y, self.width, self.height
        );
        let _ = writeln!(
            out,
            r#"<text class="panel-title" x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{label}</text>"#,
            self.x + self.width / 2.0,
            self.y - 10.0
        );
    }

    fn frame_and_axes(&self, out: &mut String, x_label: &str, y_label: &str, y_step: f64) {
        let _ = writeln!(
            out,
            r##"<rect class="frame" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333" stroke-width="1"/>"##,
            self.x, self.y, self.width, self.height
        );
        let bottom = self.y + self.height;
        for t in self.x_axis.ticks(0.1) {
            let px = self.px(t);
            let _ = writeln!(
                out,
                r##"<line x1="{px:.2}" y1="{bottom:.2}" x2="{px:.2}" y2="{:.2}" stroke="#333333"/><text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="10">{t:.1}</text>"##,
                bottom + 4.0,
                bottom + 15.0
            );
        }
        for t in self.y_axis.ticks(y_step) {
            let py = self.py(t);
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#333333"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{t:.2}</text>"##,
                self.x - 4.0,
                self.x,
                self.x - 6.0,
                py + 3.5
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{x_label}</text>"#,
            self.x + self.width / 2.0,
            bottom + 32.0
        );
        let (lx, ly) = (self.x - 42.0, self.y + self.height / 2.0);
        let _ = writeln!(
            out,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" font-size="11" transform="rotate(-90 {lx:.2} {ly:.2})">{y_label}</text>"#
        );
    }

    fn reference(&self, out: &mut String, value: f64) {
        let py = self.py(value);
        let _ = writeln!(
            out,
            r##"<line class="reference" data-value="{value}" x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#555555" stroke-width="1" stroke-dasharray="6,4"/>"##,
            self.x,
            self.x + self.width
        );
    }

    fn band(&self, out: &mut String, lo: f64, hi: f64) {
        let lo = lo.max(self.x_axis.min);
        let hi = hi.min(self.x_axis.max);
        if hi <= lo {
            return;
        }
        let _ = writeln!(
            out,
            r##"<rect class="band" data-x-lo="{lo}" data-x-hi="{hi}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#bbbbbb" fill-opacity="0.35"/>"##,
            self.px(lo),
            self.y,
            self.px(hi) - self.px(lo),
            self.height
        );
    }

    fn series(&self, out: &mut String, model: &str, lambda2: f64, style: &str, points: &[(f64, f64)]) {
        let coords: Vec<String> = points
            .iter()
            .filter(|(_, y)| y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-model="{model}" data-lambda2="{lambda2}" fill="none" {style} points="{}"/>"#,
            coords.join(" ")
        );
    }
}

fn document(width: f64, height: f64, title: &str, body: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="Helvetica, Arial, sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text class="title" x="{:.2}" y="24" text-anchor="middle" font-size="16">{title}</text>"#,
        width / 2.0
    );
    out.push_str(body);
    out.push_str("</svg>\n");
    out
}

fn legend(out: &mut String, entries: &[(String, &str, &str)]) {
    let _ = writeln!(out, r#"<g class="legend">"#);
    let mut x = MARGIN_LEFT;
    let y = TITLE_HEIGHT + 12.0;
    for (label, color, dash) in entries {
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}" font-size="11">{label}</text>"#,
            x + 24.0,
            x + 30.0,
            y + 4.0
        );
        x += 40.0 + 7.0 * label.chars().count() as f64;
    }
    let _ = writeln!(out, "</g>");
}

fn write_file(path: &Path, doc: &str) -> Result<()> {
    fs::write(path, doc).map_err(|e| Error::io(path, e))
}

fn find<'a>(cells: &[&'a ScenarioSummary], lambda2: f64, theta2: f64) -> Option<&'a ScenarioSummary> {
    cells.iter().copied().find(|s| s.lambda2 == lambda2 && s.theta2 == theta2)
}

fn missing_pairs(cells: &[&ScenarioSummary], lambda2s: &[f64], theta2s: &[f64]) -> Vec<String> {
    let mut missing = Vec::new();
    for &l in lambda2s {
        for &t in theta2s {
            if find(cells, l, t).is_none() {
                missing.push(format!("(lambda2 = {l}, theta2 = {t})"));
            }
        }
    }
    missing
}

fn grid_rows(panels: usize, columns: usize) -> usize {
    panels.div_ceil(columns)
}

/// Estimated hazard ratio by `theta2` for one alpha level: one panel per
/// `lambda2`, a solid Cox line and a dashed Fine-Gray line in each, and a
/// dashed reference at `theta1`.
///
/// The `(lambda2, theta2)` pairs expected are those present anywhere in
/// `summaries`; any missing for `alpha` is an error.
pub fn render_estimate_plot(summaries: &[ScenarioSummary], alpha: f64, path: impl AsRef<Path>) -> Result<()> {
    let doc = estimate_plot_svg(summaries, alpha)?;
    write_file(path.as_ref(), &doc)
}

pub(crate) fn estimate_plot_svg(summaries: &[ScenarioSummary], alpha: f64) -> Result<String> {
    let cells: Vec<&ScenarioSummary> = summaries.iter().filter(|s| s.alpha == alpha).collect();
    if cells.is_empty() {
        return Err(Error::MissingCells { alpha, missing: "no cells at this alpha".into() });
    }
    let lambda2s = distinct(summaries.iter().map(|s| s.lambda2));
    let theta2s = distinct(summaries.iter().map(|s| s.theta2));
    let missing = missing_pairs(&cells, &lambda2s, &theta2s);
    if !missing.is_empty() {
        return Err(Error::MissingCells { alpha, missing: missing.join(", ") });
    }
    let theta1 = cells[0].theta1;

    let y_step = 0.05;
    let y_axis = Axis::padded(cells.iter().flat_map(|s| [s.mean_hr_cox, s.mean_hr_fg]).chain([theta1]), y_step);
    let x_axis = Axis::exact(&theta2s);
    let columns = COLUMNS.min(lambda2s.len());
    let rows = grid_rows(lambda2s.len(), columns);

    let mut body = String::new();
    legend(
        &mut body,
        &[
            ("Cox HR".to_string(), COX_COLOR, ""),
            ("Fine-Gray sHR".to_string(), FG_COLOR, r#" stroke-dasharray="7,4""#),
            (format!("true HR = {theta1}"), "#555555", r#" stroke-dasharray="6,4""#),
        ],
    );
    for (i, &lambda2) in lambda2s.iter().enumerate() {
        let panel = Panel::at(i, columns, x_axis, y_axis);
        panel.open(&mut body, &format!("λ₂ = {lambda2}"), &format!(r#" data-lambda2="{lambda2}""#));
        panel.frame_and_axes(&mut body, "θ₂", "mean hazard ratio", y_step * 2.0);
        panel.reference(&mut body, theta1);
        let pick = |f: fn(&ScenarioSummary) -> f64| -> Vec<(f64, f64)> {
            theta2s.iter().map(|&t| (t, f(find(&cells, lambda2, t).expect("checked above")))).collect()
        };
        panel.series(
            &mut body,
            "cox",
            lambda2,
            &format!(r#"stroke="{COX_COLOR}" stroke-width="2""#),
            &pick(|s| s.mean_hr_cox),
        );
        panel.series(
            &mut body,
            "fine-gray",
            lambda2,
            &format!(r#"stroke="{FG_COLOR}" stroke-width="2" stroke-dasharray="7,4""#),
            &pick(|s| s.mean_hr_fg),
        );
        body.push_str("</g>\n");
    }

    let width = columns as f64 * PANEL_WIDTH;
    let height = TITLE_HEIGHT + LEGEND_HEIGHT + rows as f64 * PANEL_HEIGHT;
    Ok(document(width, height, &format!("Estimated (subdistribution) hazard ratio by θ₂ (α = {alpha})"), &body))
}

/// Bias of one model's mean hazard ratio by `theta2`: one panel per alpha,
/// one line per `lambda2`, a shaded band over `theta2` in `[0.7, 0.9]` and a
/// dashed zero line.
pub fn render_bias_plot(
    summaries: &[ScenarioSummary],
    model: BiasModel,
    policy: PanelPolicy,
    path: impl AsRef<Path>,
) -> Result<()> {
    let doc = bias_plot_svg(summaries, model, policy)?;
    write_file(path.as_ref(), &doc)
}

pub(crate) fn bias_plot_svg(summaries: &[ScenarioSummary], model: BiasModel, policy: PanelPolicy) -> Result<String> {
    let alphas = distinct(summaries.iter().map(|s| s.alpha));
    match policy {
        PanelPolicy::Strict if alphas.len() != STRICT_BIAS_PANELS => {
            return Err(Error::InvalidArgument(format!(
                "bias figure needs {STRICT_BIAS_PANELS} alpha levels, found {}",
                alphas.len()
            )));
        }
        _ if alphas.is_empty() => return Err(Error::InvalidArgument("no summaries to plot".into())),
        _ => {}
    }
    let lambda2s = distinct(summaries.iter().map(|s| s.lambda2));
    let theta2s = distinct(summaries.iter().map(|s| s.theta2));
    for &alpha in &alphas {
        let cells: Vec<&ScenarioSummary> = summaries.iter().filter(|s| s.alpha == alpha).collect();
        let missing = missing_pairs(&cells, &lambda2s, &theta2s);
        if !missing.is_empty() {
            return Err(Error::MissingCells { alpha, missing: missing.join(", ") });
        }
    }

    let y_step = 0.05;
    let y_axis = Axis::padded(summaries.iter().map(|s| model.bias(s)).chain([0.0]), y_step);
    let x_axis = Axis::exact(&theta2s);
    let columns = 2.min(alphas.len());
    let rows = grid_rows(alphas.len(), columns);
    let color = |i: usize| LAMBDA_PALETTE[i % LAMBDA_PALETTE.len()];

    let mut body = String::new();
    let entries: Vec<(String, &str, &str)> =
        lambda2s.iter().enumerate().map(|(i, l)| (format!("λ₂ = {l}"), color(i), "")).collect();
    legend(&mut body, &entries);
    for (i, &alpha) in alphas.iter().enumerate() {
        let cells: Vec<&ScenarioSummary> = summaries.iter().filter(|s| s.alpha == alpha).collect();
        let panel = Panel::at(i, columns, x_axis, y_axis);
        let tau = 1.0 - 1.0 / alpha;
        panel.open(&mut body, &format!("α = {alpha} (τ = {tau:.3})"), &format!(r#" data-alpha="{alpha}""#));
        panel.band(&mut body, BAND_RANGE.0, BAND_RANGE.1);
        panel.frame_and_axes(&mut body, "θ₂", "bias (mean HR − true HR)", y_step * 2.0);
        panel.reference(&mut body, 0.0);
        for (k, &lambda2) in lambda2s.iter().enumerate() {
            let points: Vec<(f64, f64)> =
                theta2s.iter().map(|&t| (t, model.bias(find(&cells, lambda2, t).expect("checked above")))).collect();
            panel.series(
                &mut body,
                model.tag(),
                lambda2,
                &format!(r#"stroke="{}" stroke-width="2""#, color(k)),
                &points,
            );
        }
        body.push_str("</g>\n");
    }

    let title = match model {
        BiasModel::Cox => "Cox HR bias by θ₂ across correlation levels",
        BiasModel::FineGray => "Fine-Gray sHR bias by θ₂ across correlation levels",
    };
    let width = columns as f64 * PANEL_WIDTH;
    let height = TITLE_HEIGHT + LEGEND_HEIGHT + rows as f64 * PANEL_HEIGHT;
    Ok(document(width, height, title, &body))
}
