//! Evaluation results in a shape shared by the closed forms and the simulator.

use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "lowercase")
)]
pub enum Method {
    Analytic,
    Simulated,
}

/// Per-source freshness metrics. Confidence-interval half-widths (95%,
/// batch means) are present only for simulated reports.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SourceMetrics {
    pub aoi: f64,
    pub paoi: f64,
    /// Sleep probability after serving this source (analytic), or observed
    /// sleep frequency (simulated).
    pub theta: f64,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub aoi_ci: Option<f64>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub paoi_ci: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub per_source: Vec<SourceMetrics>,
    pub energy_rate: f64,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub energy_ci: Option<f64>,
    pub method: Method,
}
