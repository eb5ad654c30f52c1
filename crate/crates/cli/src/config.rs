//! Experiment specification: strict JSON schema, defaults, sweep and variant
//! resolution.
//!
//! Every key is either consumed or rejected. Sweep values and variant patches
//! are applied to the fully defaulted specification and re-validated, so a
//! patch can target any field, including ones the file left at its default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use irs_core::irs_models::DEFAULT_REFERENCE_IMPEDANCE;
use irs_core::scenarios::DEFAULT_EH_EFFICIENCY;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Secure,
    Swipt,
    SingleLink,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Secure => "secure",
            ScenarioKind::Swipt => "swipt",
            ScenarioKind::SingleLink => "single-link",
        }
    }
}

/// Positions are in metres, spacings in wavelengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
    pub tx: TxSpec,
    #[serde(default)]
    pub irs_sites: Vec<SiteSpec>,
    pub receivers: Vec<ReceiverGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxSpec {
    pub position: [f64; 3],
    pub antennas: usize,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

/// One surface site. Its element count comes from `irs.elements`; with
/// `rows > 1` the surface is planar with `elements / rows` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteSpec {
    pub position: [f64; 3],
    #[serde(default = "one")]
    pub rows: usize,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Eavesdropper,
    Info,
    Energy,
}

/// `count` receivers dropped independently in `region`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverGroup {
    pub role: Role,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default = "one")]
    pub antennas: usize,
    pub region: Region,
    #[serde(default)]
    pub direct_blocked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Region {
    Point {
        position: [f64; 3],
    },
    /// Uniform over a horizontal disc.
    Disc {
        center: [f64; 2],
        radius: f64,
        height: f64,
    },
    /// Uniform distance and bearing around `origin`.
    Sector {
        origin: [f64; 2],
        height: f64,
        min_distance: f64,
        max_distance: f64,
        min_angle_deg: f64,
        max_angle_deg: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingKind {
    PureLos,
    Rayleigh,
    Rician,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub model: FadingKind,
    /// Required for, and only accepted with, Rician fading.
    #[serde(default)]
    pub k_factor: Option<f64>,
    #[serde(default = "default_reference_loss")]
    pub reference_loss_db: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingConfig {
    pub direct: LinkSpec,
    pub tx_irs: LinkSpec,
    pub irs_rx: LinkSpec,
}

impl Default for FadingConfig {
    fn default() -> Self {
        let link = |model, k_factor, exponent| LinkSpec {
            model,
            k_factor,
            reference_loss_db: default_reference_loss(),
            exponent,
        };
        FadingConfig {
            direct: link(FadingKind::Rayleigh, None, 3.5),
            tx_irs: link(FadingKind::PureLos, None, 2.2),
            irs_rx: link(FadingKind::Rician, Some(3.0), 2.2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ids,
    Inw,
    Random,
    None,
    /// Tile/codebook surface (SWIPT only).
    Phy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectivityKind {
    #[default]
    Single,
    Full,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum PhaseErrorSpec {
    None,
    Uniform { half_width: f64 },
    VonMises { kappa: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpairmentConfig {
    #[serde(default)]
    pub quantization_bits: u32,
    #[serde(default = "no_phase_error")]
    pub phase_error: PhaseErrorSpec,
    #[serde(default)]
    pub kappa_tx: f64,
    #[serde(default)]
    pub kappa_rx: f64,
}

impl Default for ImpairmentConfig {
    fn default() -> Self {
        ImpairmentConfig {
            quantization_bits: 0,
            phase_error: PhaseErrorSpec::None,
            kappa_tx: 0.0,
            kappa_rx: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrsSpec {
    /// Defaults to `phy` for SWIPT and `ids` otherwise.
    #[serde(default)]
    pub model: Option<ModelKind>,
    #[serde(default)]
    pub connectivity: ConnectivityKind,
    /// Group size of partially connected wiring.
    #[serde(default)]
    pub group_size: Option<usize>,
    /// Elements per site, in `geometry.irs_sites` order; 0 removes the site.
    #[serde(default)]
    pub elements: Vec<usize>,
    #[serde(default)]
    pub impairments: ImpairmentConfig,
    /// Ohms.
    #[serde(default = "default_impedance")]
    pub reference_impedance: f64,
}

impl Default for IrsSpec {
    fn default() -> Self {
        IrsSpec {
            model: None,
            connectivity: ConnectivityKind::Single,
            group_size: None,
            elements: Vec::new(),
            impairments: ImpairmentConfig::default(),
            reference_impedance: DEFAULT_REFERENCE_IMPEDANCE,
        }
    }
}

/// Tile/codebook design: `tiles` tiles sharing `modes` modes whose design
/// angles form a nested grid of width `span` (in sine space) centred on the
/// direction from the surface to `aim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSpec {
    #[serde(default = "one")]
    pub tiles: usize,
    #[serde(default = "two")]
    pub modes: usize,
    #[serde(default = "default_span")]
    pub span: f64,
    /// Defaults to the centroid of the receiver regions.
    #[serde(default)]
    pub aim: Option<[f64; 3]>,
}

impl Default for CodebookSpec {
    fn default() -> Self {
        CodebookSpec {
            tiles: 1,
            modes: 2,
            span: default_span(),
            aim: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    /// Alternating optimisation (secure and single-link).
    Ao,
    Bnb,
    Exhaustive,
    Penalty,
    Random,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundChoice {
    #[default]
    ChannelGain,
    Relaxation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    /// Defaults to `bnb` for SWIPT and `ao` otherwise.
    #[serde(default)]
    pub method: Option<MethodKind>,
    /// Iteration cap of each inner ascent.
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Gradient-norm tolerance of each inner ascent.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_ao_sweeps")]
    pub ao_sweeps: usize,
    /// Relative improvement per sweep below which alternation stops.
    #[serde(default = "default_ao_tolerance")]
    pub ao_tolerance: f64,
    #[serde(default)]
    pub bound: BoundChoice,
}

impl Default for AlgorithmSpec {
    fn default() -> Self {
        AlgorithmSpec {
            method: None,
            max_iter: default_max_iter(),
            tolerance: default_tolerance(),
            ao_sweeps: default_ao_sweeps(),
            ao_tolerance: default_ao_tolerance(),
            bound: BoundChoice::ChannelGain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecureSpec {
    #[serde(default = "default_power_dbm")]
    pub power_dbm: f64,
    /// Linear cap on every eavesdropper SINR; `null` removes the constraint.
    #[serde(default = "default_leakage_cap")]
    pub leakage_cap: Option<f64>,
    /// Frobenius radius of the eavesdropper channel error, in noise-normalised
    /// units (channels scaled by `sqrt(P/σ²)`).
    #[serde(default)]
    pub csi_radius: f64,
    #[serde(default = "default_csi_samples")]
    pub csi_samples: usize,
    /// Share of the budget given to artificial noise at the start.
    #[serde(default = "default_an_fraction")]
    pub an_fraction: f64,
}

impl Default for SecureSpec {
    fn default() -> Self {
        SecureSpec {
            power_dbm: default_power_dbm(),
            leakage_cap: default_leakage_cap(),
            csi_radius: 0.0,
            csi_samples: default_csi_samples(),
            an_fraction: default_an_fraction(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwiptSpec {
    /// SINR target of every information receiver, dB.
    #[serde(default = "default_gamma_db")]
    pub gamma_db: f64,
    /// Harvested-power floor of every energy receiver, dBm.
    #[serde(default = "default_min_harvested_dbm")]
    pub min_harvested_dbm: f64,
    #[serde(default = "default_efficiency")]
    pub efficiency: f64,
}

impl Default for SwiptSpec {
    fn default() -> Self {
        SwiptSpec {
            gamma_db: default_gamma_db(),
            min_harvested_dbm: default_min_harvested_dbm(),
            efficiency: default_efficiency(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleLinkSpec {
    #[serde(default = "default_power_dbm")]
    pub power_dbm: f64,
    /// Index into the flattened receiver list.
    #[serde(default)]
    pub receiver: usize,
}

impl Default for SingleLinkSpec {
    fn default() -> Self {
        SingleLinkSpec {
            power_dbm: default_power_dbm(),
            receiver: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted path into the specification, e.g. `swipt.gamma_db`.
    pub parameter: String,
    pub values: Vec<Value>,
}

/// Named patch applied on top of every sweep point. All variants of one
/// (sweep point, trial) share its seed, so they see the same drop and fading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub name: String,
    #[serde(default)]
    pub set: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec {
            trials: 1,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: ScenarioKind,
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub fading: FadingConfig,
    #[serde(default = "default_noise_dbm")]
    pub noise_dbm: f64,
    #[serde(default)]
    pub irs: IrsSpec,
    #[serde(default)]
    pub codebook: CodebookSpec,
    #[serde(default)]
    pub algorithm: AlgorithmSpec,
    #[serde(default)]
    pub secure: SecureSpec,
    #[serde(default)]
    pub swipt: SwiptSpec,
    #[serde(default)]
    pub single_link: SingleLinkSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub mc: McSpec,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Fills `runtime_ms`; off by default so that output is byte-reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_wavelength() -> f64 {
    0.1
}
fn default_spacing() -> f64 {
    0.5
}
fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn default_reference_loss() -> f64 {
    30.0
}
fn no_phase_error() -> PhaseErrorSpec {
    PhaseErrorSpec::None
}
fn default_impedance() -> f64 {
    DEFAULT_REFERENCE_IMPEDANCE
}
fn default_span() -> f64 {
    0.6
}
fn default_max_iter() -> usize {
    200
}
fn default_tolerance() -> f64 {
    1e-7
}
fn default_ao_sweeps() -> usize {
    30
}
fn default_ao_tolerance() -> f64 {
    1e-5
}
fn default_power_dbm() -> f64 {
    30.0
}
fn default_leakage_cap() -> Option<f64> {
    Some(1.0)
}
fn default_csi_samples() -> usize {
    32
}
fn default_an_fraction() -> f64 {
    0.1
}
fn default_gamma_db() -> f64 {
    10.0
}
fn default_min_harvested_dbm() -> f64 {
    -50.0
}
fn default_efficiency() -> f64 {
    DEFAULT_EH_EFFICIENCY
}
fn default_noise_dbm() -> f64 {
    -90.0
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One fully resolved specification for a (sweep point, variant) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub spec: ExperimentSpec,
    pub sweep_index: usize,
    /// Rendered sweep value, empty without a sweep.
    pub sweep_value: String,
    pub variant: Option<String>,
}

impl ExperimentSpec {
    pub fn model(&self) -> ModelKind {
        self.irs.model.unwrap_or(match self.scenario {
            ScenarioKind::Swipt => ModelKind::Phy,
            _ => ModelKind::Ids,
        })
    }

    pub fn method(&self) -> MethodKind {
        self.algorithm.method.unwrap_or(match self.scenario {
            ScenarioKind::Swipt => MethodKind::Bnb,
            _ => MethodKind::Ao,
        })
    }

    /// Label of the surface model, e.g. `inw-fc` or `phy-n4-m2`.
    pub fn model_label(&self) -> String {
        match self.model() {
            ModelKind::Ids => "ids".into(),
            ModelKind::Inw => match self.irs.connectivity {
                ConnectivityKind::Single => "inw-sc".into(),
                ConnectivityKind::Full => "inw-fc".into(),
                ConnectivityKind::Partial => "inw-pc".into(),
            },
            ModelKind::Random => "random".into(),
            ModelKind::None => "none".into(),
            ModelKind::Phy => format!("phy-n{}-m{}", self.codebook.tiles, self.codebook.modes),
        }
    }

    pub fn method_label(&self) -> &'static str {
        match self.method() {
            MethodKind::Ao => "ao",
            MethodKind::Bnb => "bnb",
            MethodKind::Exhaustive => "exhaustive",
            MethodKind::Penalty => "penalty",
            MethodKind::Random => "random",
            MethodKind::None => "none",
        }
    }

    pub fn sweep_len(&self) -> usize {
        self.sweep.as_ref().map_or(1, |s| s.values.len())
    }

    /// Checks everything that does not depend on a random draw.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let g = &self.geometry;
        if !(g.wavelength > 0.0) {
            return bad("geometry.wavelength must be positive".into());
        }
        if g.tx.antennas == 0 {
            return bad("geometry.tx.antennas must be at least 1".into());
        }
        if g.receivers.is_empty() {
            return bad("geometry.receivers must not be empty".into());
        }
        for (i, r) in g.receivers.iter().enumerate() {
            if r.count == 0 || r.antennas == 0 {
                return bad(format!("geometry.receivers.{i}: count and antennas must be at least 1"));
            }
            let ok = match &r.region {
                Region::Point { .. } => true,
                Region::Disc { radius, .. } => *radius >= 0.0,
                Region::Sector {
                    min_distance,
                    max_distance,
                    min_angle_deg,
                    max_angle_deg,
                    ..
                } => 0.0 <= *min_distance && min_distance <= max_distance && min_angle_deg <= max_angle_deg,
            };
            if !ok {
                return bad(format!("geometry.receivers.{i}.region has an empty or inverted range"));
            }
        }
        if self.irs.elements.len() != g.irs_sites.len() {
            return bad(format!(
                "irs.elements has {} entries for {} geometry.irs_sites",
                self.irs.elements.len(),
                g.irs_sites.len()
            ));
        }
        for (i, (s, &n)) in g.irs_sites.iter().zip(&self.irs.elements).enumerate() {
            if s.rows == 0 || n % s.rows != 0 {
                return bad(format!(
                    "irs.elements.{i} = {n} is not a multiple of geometry.irs_sites.{i}.rows"
                ));
            }
        }
        for (name, l) in [
            ("direct", &self.fading.direct),
            ("tx_irs", &self.fading.tx_irs),
            ("irs_rx", &self.fading.irs_rx),
        ] {
            match (l.model, l.k_factor) {
                (FadingKind::Rician, Some(k)) if k >= 0.0 => {}
                (FadingKind::Rician, _) => {
                    return bad(format!("fading.{name}.k_factor must be given and non-negative"))
                }
                (_, Some(_)) => return bad(format!("fading.{name}.k_factor only applies to rician fading")),
                _ => {}
            }
        }
        match (self.irs.connectivity, self.irs.group_size) {
            (ConnectivityKind::Partial, Some(g)) if g > 0 => {}
            (ConnectivityKind::Partial, _) => return bad("irs.group_size must be positive for partial wiring".into()),
            (_, Some(_)) => return bad("irs.group_size only applies to partial wiring".into()),
            _ => {}
        }
        if self.scenario != ScenarioKind::SingleLink && self.irs.impairments != ImpairmentConfig::default() {
            return bad("irs.impairments only apply to single-link scenarios".into());
        }
        if self.mc.trials == 0 {
            return bad("mc.trials must be at least 1".into());
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return bad("sweep.values must not be empty".into());
            }
        }
        let count = |role| {
            g.receivers
                .iter()
                .filter(|r| r.role == role)
                .map(|r| r.count)
                .sum::<usize>()
        };
        let (model, method) = (self.model(), self.method());
        match self.scenario {
            ScenarioKind::Secure => {
                if count(Role::User) == 0 {
                    return bad("a secure scenario needs at least one user".into());
                }
                if count(Role::Info) + count(Role::Energy) > 0 {
                    return bad("secure scenarios take user and eavesdropper receivers only".into());
                }
                if model == ModelKind::Phy || method != MethodKind::Ao {
                    return bad("secure scenarios take irs.model ids|inw|random|none and algorithm.method ao".into());
                }
                if let Some(c) = self.secure.leakage_cap {
                    if !(c > 0.0) {
                        return bad("secure.leakage_cap must be positive or null".into());
                    }
                }
                if !(self.secure.csi_radius >= 0.0) {
                    return bad("secure.csi_radius must be non-negative".into());
                }
            }
            ScenarioKind::Swipt => {
                if count(Role::Info) == 0 {
                    return bad("a swipt scenario needs at least one info receiver".into());
                }
                if count(Role::User) + count(Role::Eavesdropper) > 0 {
                    return bad("swipt scenarios take info and energy receivers only".into());
                }
                if model != ModelKind::Phy || method == MethodKind::Ao {
                    return bad(
                        "swipt scenarios take irs.model phy and algorithm.method bnb|exhaustive|penalty|random|none"
                            .into(),
                    );
                }
                if self.irs.elements.iter().filter(|&&n| n > 0).count() != 1 {
                    return bad("swipt scenarios need exactly one surface with elements".into());
                }
                let total: usize = self.irs.elements.iter().sum();
                if self.codebook.tiles == 0 || self.codebook.tiles > total || self.codebook.modes == 0 {
                    return bad("codebook.tiles must be in 1..=elements and codebook.modes at least 1".into());
                }
                if !(self.swipt.efficiency > 0.0 && self.swipt.efficiency <= 1.0) {
                    return bad("swipt.efficiency must lie in (0, 1]".into());
                }
            }
            ScenarioKind::SingleLink => {
                if !matches!(model, ModelKind::Ids | ModelKind::None) || method != MethodKind::Ao {
                    return bad("single-link scenarios take irs.model ids|none and algorithm.method ao".into());
                }
                let total: usize = g.receivers.iter().map(|r| r.count).sum();
                if self.single_link.receiver >= total {
                    return bad(format!(
                        "single_link.receiver {} is out of range",
                        self.single_link.receiver
                    ));
                }
            }
        }
        Ok(())
    }

    /// Every (sweep point, variant) specification, sweep-major.
    pub fn resolve(&self) -> Result<Vec<Resolved>, CliError> {
        self.validate()?;
        let base = to_value(self)?;
        let points: Vec<(Option<&str>, Option<&Value>)> = match &self.sweep {
            Some(s) => s.values.iter().map(|v| (Some(s.parameter.as_str()), Some(v))).collect(),
            None => vec![(None, None)],
        };
        let mut names = std::collections::BTreeSet::new();
        for v in &self.variants {
            if v.name.is_empty() || !names.insert(v.name.as_str()) {
                return Err(CliError::Config(format!(
                    "variant name {:?} is empty or repeated",
                    v.name
                )));
            }
        }
        let mut out = Vec::new();
        for (i, (param, value)) in points.into_iter().enumerate() {
            let mut point = base.clone();
            if let (Some(p), Some(v)) = (param, value) {
                set_path(&mut point, p, v.clone(), "sweep.parameter")?;
            }
            let variants: Vec<Option<&Variant>> = if self.variants.is_empty() {
                vec![None]
            } else {
                self.variants.iter().map(Some).collect()
            };
            for variant in variants {
                let mut doc = point.clone();
                if let Some(v) = variant {
                    for (p, val) in &v.set {
                        set_path(&mut doc, p, val.clone(), &format!("variants.{}", v.name))?;
                    }
                }
                let spec = from_value(doc)?;
                spec.validate()?;
                out.push(Resolved {
                    spec,
                    sweep_index: i,
                    sweep_value: value.map(render_value).unwrap_or_default(),
                    variant: variant.map(|v| v.name.clone()),
                });
            }
        }
        Ok(out)
    }
}

/// Numbers with 17 significant digits, anything else as compact JSON.
pub fn render_value(v: &Value) -> String {
    match v.as_f64() {
        Some(x) if v.is_number() => crate::table::format_float(x),
        _ => v.to_string(),
    }
}

fn to_value(spec: &ExperimentSpec) -> Result<Value, CliError> {
    serde_json::to_value(spec).map_err(|e| CliError::Config(e.to_string()))
}

fn from_value(v: Value) -> Result<ExperimentSpec, CliError> {
    serde_path_to_error::deserialize(v).map_err(path_error)
}

const FROZEN: [&str; 4] = ["sweep", "variants", "mc", "output"];

/// Replaces the existing field at dotted `path`; array entries are addressed
/// by index. Unknown paths are errors.
fn set_path(doc: &mut Value, path: &str, value: Value, origin: &str) -> Result<(), CliError> {
    let unknown = || CliError::Config(format!("{origin}: unknown parameter path {path:?}"));
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) || FROZEN.contains(&parts[0]) {
        return Err(unknown());
    }
    let mut cur = doc;
    for part in parts {
        cur = match cur {
            Value::Object(m) => m.get_mut(part).ok_or_else(unknown)?,
            Value::Array(a) => part
                .parse::<usize>()
                .ok()
                .and_then(|i| a.get_mut(i))
                .ok_or_else(unknown)?,
            _ => return Err(unknown()),
        };
    }
    *cur = value;
    Ok(())
}

/// Formats a deserialisation error as `path: message`, naming the offending
/// key itself for unknown fields.
fn path_error(e: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let mut path = e.path().to_string();
    let msg = e.inner().to_string();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        if let Some(key) = rest.split('`').next() {
            path = if path == "." {
                key.to_string()
            } else {
                format!("{path}.{key}")
            };
        }
    }
    CliError::Config(format!("{path}: {msg}"))
}

pub fn parse_str(text: &str) -> Result<ExperimentSpec, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(path_error)?;
    spec.validate()?;
    Ok(spec)
}

pub fn parse_config(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_SWIPT: &str = r#"{
        "scenario": "swipt",
        "geometry": {
            "tx": {"position": [0, 0, 10], "antennas": 4},
            "irs_sites": [{"position": [20, 5, 5], "rows": 4}],
            "receivers": [
                {"role": "info", "region": {"kind": "point", "position": [40, 0, 1.5]}},
                {"role": "energy", "region": {"kind": "point", "position": [24, 2, 1.5]}}
            ]
        },
        "irs": {"elements": [16]}
    }"#;

    #[test]
    fn minimal_swipt_fills_defaults() {
        let s = parse_str(MINIMAL_SWIPT).unwrap();
        assert_eq!(s.swipt.efficiency, 0.8);
        assert_eq!(s.irs.reference_impedance, 50.0);
        assert_eq!(s.model(), ModelKind::Phy);
        assert_eq!(s.method(), MethodKind::Bnb);
        assert_eq!(s.mc.trials, 1);
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let text = MINIMAL_SWIPT.replace(r#""irs": {"elements": [16]}"#, r#""irs": {"elements": [16], "foo": 1}"#);
        let e = parse_str(&text).unwrap_err().to_string();
        assert!(e.contains("irs.foo"), "{e}");
        let text = MINIMAL_SWIPT.replace(r#""kind": "point","#, r#""kind": "point", "radius": 3,"#);
        assert!(parse_str(&text).is_err());
    }

    #[test]
    fn sweep_points_and_variants_resolve() {
        let mut s = parse_str(MINIMAL_SWIPT).unwrap();
        s.sweep = Some(SweepSpec {
            parameter: "swipt.gamma_db".into(),
            values: vec![2.into(), 4.into(), 6.into()],
        });
        let r = s.resolve().unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r[2].spec.swipt.gamma_db, 6.0);
        s.variants = vec![
            Variant {
                name: "a".into(),
                set: BTreeMap::from([("codebook.modes".into(), 4.into())]),
            },
            Variant {
                name: "b".into(),
                set: BTreeMap::from([("algorithm.method".into(), "exhaustive".into())]),
            },
        ];
        let r = s.resolve().unwrap();
        assert_eq!(r.len(), 6);
        assert_eq!(r[1].spec.method(), MethodKind::Exhaustive);
        assert_eq!(r[0].spec.codebook.modes, 4);
        assert_eq!(r[0].sweep_index, r[1].sweep_index);
    }

    #[test]
    fn bad_paths_and_values_are_rejected() {
        let mut s = parse_str(MINIMAL_SWIPT).unwrap();
        for p in ["swipt.gama_db", "mc.trials", "irs.elements.3", ""] {
            s.sweep = Some(SweepSpec {
                parameter: p.into(),
                values: vec![1.into()],
            });
            assert!(s.resolve().is_err(), "{p}");
        }
        s.sweep = Some(SweepSpec {
            parameter: "swipt.gamma_db".into(),
            values: vec!["loud".into()],
        });
        assert!(s.resolve().is_err());
        s.sweep = Some(SweepSpec {
            parameter: "irs.model".into(),
            values: vec!["ids".into()],
        });
        assert!(s.resolve().is_err());
    }
}
