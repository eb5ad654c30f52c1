//! Case studies built on the channel, surface and optimisation layers.
//!
//! * [`solve_secure`]: secure multi-user downlink with artificial noise and
//!   bounded eavesdropper CSI error;
//! * [`solve_swipt`]: transmit-power minimisation for simultaneous information
//!   and power transfer with a tile/mode surface;
//! * [`solve_single_link`]: single-user link under hardware impairments.

mod diagnostics;
mod metrics;
mod robust;
mod secure;
mod single_link;
mod swipt;

use crate::codebook::ModeSelection;
use crate::irs_models::InwConfig;
use crate::linalg::CMat;

pub use diagnostics::{gradient_probes, GradientProbe};
pub use metrics::{harvested_power, impaired_snr, leakage_sinr, link_metrics, LinkMetrics};
pub use robust::{sample_boundary_errors, worst_case_leakage, WorstCaseOptions};
pub use secure::{solve_secure, verify_leakage, CsiError, IrsModel, SecureOptions, SecureScenario, Wiring};
pub use single_link::{single_link_snr_bound, solve_single_link, SingleLinkOptions, SingleLinkSolution};
pub use swipt::{
    solve_swipt, BoundKind, SwiptMethod, SwiptOptions, SwiptPrecoder, SwiptScenario, SwiptSelection,
    DEFAULT_EH_EFFICIENCY,
};

/// Surface configuration returned by a solver.
#[derive(Debug, Clone, PartialEq)]
pub enum IrsConfiguration {
    None,
    Phases(Vec<f64>),
    Reactance(InwConfig),
    Tiles(ModeSelection),
}

/// Precoder, artificial-noise factor and surface configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    /// `Nt × K`, in physical units (`‖W‖² + ‖V‖²` is the transmit power).
    pub w: CMat,
    /// `Nt × Nt`, possibly with zero columns.
    pub v: CMat,
    pub irs: IrsConfiguration,
    /// Sum rate in bit/s/Hz, or transmit power in watts for power minimisation.
    pub objective: f64,
    pub feasible: bool,
    pub max_violation: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
    /// Worst-case leakage SINR found by the post-hoc check, when eavesdroppers exist.
    pub worst_case_leakage: Option<f64>,
}
