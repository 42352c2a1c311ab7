//! Results serialization and figures.
//!
//! [`write_results_csv`] / [`read_results_csv`] store one row per scenario
//! cell under the fixed [`CSV_HEADER`]. The SVG renderers draw the
//! estimate-by-`theta2` and bias-by-`theta2` figure families.

mod svg;
mod table;

pub use svg::{render_bias_plot, render_estimate_plot, BiasModel, PanelPolicy, STRICT_BIAS_PANELS};
pub use table::{format_sig6, read_results_csv, render_results_csv, write_results_csv, CSV_HEADER};

/// Distinct values in increasing order.
pub(crate) fn distinct(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}
