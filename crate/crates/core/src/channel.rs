//! Geometry-driven fading channels and effective-channel composition.
//!
//! Arrays are described by a [`Layout`] of element index offsets in the local
//! (y, z) plane and an element spacing in wavelengths. Plane-wave directions
//! are parameterised by direction cosines ([`Direction`]), so array responses
//! never touch trigonometric singularities at endfire.
//!
//! A [`ChannelSet`] holds one realisation of every link: the direct links
//! Tx→Rx, the Tx→IRS links and the IRS→Rx links. [`effective_channel`]
//! composes them for given reflection operators; multiple surfaces add up
//! without any inter-surface paths, which is the same as treating them as a
//! single stacked surface with a block-diagonal operator
//! ([`ChannelSet::stacked`]).

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{dimension, domain, Result};
use crate::linalg::{cis, CMat, CVec};

/// Direction cosines of a plane wave with respect to an array's local y and z axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub sin_az: f64,
    pub sin_el: f64,
}

impl Direction {
    pub fn new(sin_az: f64, sin_el: f64) -> Result<Self> {
        let d = Direction { sin_az, sin_el };
        d.validate()?;
        Ok(d)
    }

    pub const fn broadside() -> Self {
        Direction {
            sin_az: 0.0,
            sin_el: 0.0,
        }
    }

    /// Direction of the (not necessarily normalised) vector `v`.
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(domain("direction of a zero or non-finite vector"));
        }
        Ok(Direction {
            sin_az: v[1] / n,
            sin_el: v[2] / n,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [("sin_az", self.sin_az), ("sin_el", self.sin_el)] {
            if !s.is_finite() || s.abs() > 1.0 {
                return Err(domain(format!("{name} = {s} is not a valid direction cosine")));
            }
        }
        Ok(())
    }

    /// Component-wise sum, used for the combined incidence/reflection phase.
    pub fn combined(&self, other: &Direction) -> [f64; 2] {
        [self.sin_az + other.sin_az, self.sin_el + other.sin_el]
    }
}

/// Element arrangement of an array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Elements along the local y axis.
    Linear(usize),
    /// `rows × cols` elements in row-major order; columns run along y, rows along z.
    Planar { rows: usize, cols: usize },
}

impl Layout {
    pub fn element_count(&self) -> usize {
        match *self {
            Layout::Linear(n) => n,
            Layout::Planar { rows, cols } => rows * cols,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.element_count() == 0 {
            return Err(domain("array layout has no elements"));
        }
        Ok(())
    }

    /// Index offsets `(y, z)` of each element relative to element 0.
    pub fn offsets(&self) -> Vec<[f64; 2]> {
        match *self {
            Layout::Linear(n) => (0..n).map(|l| [l as f64, 0.0]).collect(),
            Layout::Planar { rows, cols } => (0..rows)
                .flat_map(|r| (0..cols).map(move |c| [c as f64, r as f64]))
                .collect(),
        }
    }
}

/// Array response at the given element offsets.
pub fn steering_at(offsets: &[[f64; 2]], spacing: f64, dir: Direction) -> Result<CVec> {
    dir.validate()?;
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(domain(format!("element spacing {spacing} must be positive")));
    }
    Ok(CVec::from_iterator(
        offsets.len(),
        offsets
            .iter()
            .map(|p| cis(2.0 * PI * spacing * (dir.sin_az * p[0] + dir.sin_el * p[1]))),
    ))
}

/// Unit-modulus array response `a_l = exp(j·2π·spacing·⟨dir, p_l⟩)`.
pub fn steering_vector(layout: &Layout, spacing: f64, dir: Direction) -> Result<CVec> {
    layout.validate()?;
    steering_at(&layout.offsets(), spacing, dir)
}

/// Position and shape of an antenna array or reflecting surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySite {
    /// Centroid position in metres.
    pub position: [f64; 3],
    pub layout: Layout,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl ArraySite {
    pub fn new(position: [f64; 3], layout: Layout, spacing: f64) -> Self {
        ArraySite {
            position,
            layout,
            spacing,
        }
    }

    pub fn element_count(&self) -> usize {
        self.layout.element_count()
    }

    fn validate(&self, what: &str) -> Result<()> {
        self.layout.validate()?;
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(domain(format!("{what}: spacing must be positive")));
        }
        if self.position.iter().any(|x| !x.is_finite()) {
            return Err(domain(format!("{what}: position is not finite")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receiver {
    pub site: ArraySite,
    pub direct_blocked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub tx: ArraySite,
    pub receivers: Vec<Receiver>,
    pub irs: Vec<ArraySite>,
    /// Carrier wavelength in metres.
    pub wavelength: f64,
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        self.tx.validate("tx")?;
        for (i, r) in self.receivers.iter().enumerate() {
            r.site.validate(&format!("receiver {i}"))?;
        }
        for (i, s) in self.irs.iter().enumerate() {
            s.validate(&format!("irs {i}"))?;
        }
        if !(self.wavelength > 0.0) || !self.wavelength.is_finite() {
            return Err(domain("wavelength must be positive"));
        }
        Ok(())
    }
}

/// Distance-dependent power loss `10^(-L0/10) · d^(-α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLoss {
    /// Loss at 1 m, in dB.
    pub reference_loss_db: f64,
    pub exponent: f64,
}

impl PathLoss {
    pub fn gain(&self, distance: f64) -> Result<f64> {
        if !(distance > 0.0) || !distance.is_finite() {
            return Err(domain(format!("link distance {distance} must be positive")));
        }
        if self.exponent < 0.0 {
            return Err(domain("path-loss exponent must be non-negative"));
        }
        Ok(10f64.powf(-self.reference_loss_db / 10.0) * distance.powf(-self.exponent))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FadingModel {
    PureLos,
    Rayleigh,
    /// Linear K-factor (LoS to diffuse power ratio).
    Rician {
        k_factor: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingSpec {
    pub model: FadingModel,
    pub pathloss: PathLoss,
}

impl FadingSpec {
    fn validate(&self) -> Result<()> {
        if let FadingModel::Rician { k_factor } = self.model {
            if !(k_factor >= 0.0) {
                return Err(domain("rician K-factor must be non-negative"));
            }
        }
        if !(self.pathloss.exponent >= 0.0) || !self.pathloss.reference_loss_db.is_finite() {
            return Err(domain("invalid path-loss parameters"));
        }
        Ok(())
    }
}

/// Fading per link class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkFading {
    pub direct: FadingSpec,
    pub tx_irs: FadingSpec,
    pub irs_rx: FadingSpec,
}

impl LinkFading {
    pub fn uniform(spec: FadingSpec) -> Self {
        LinkFading {
            direct: spec,
            tx_irs: spec,
            irs_rx: spec,
        }
    }
}

/// One channel realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Per receiver, `Nr × Nt`.
    pub direct: Vec<CMat>,
    /// Per surface, `L_i × Nt`.
    pub tx_to_irs: Vec<CMat>,
    /// Indexed `[irs][rx]`, each `Nr × L_i`.
    pub irs_to_rx: Vec<Vec<CMat>>,
    pub wavelength: f64,
    /// Receiver noise power in watts.
    pub noise_power: f64,
}

impl ChannelSet {
    pub fn rx_count(&self) -> usize {
        self.direct.len()
    }

    pub fn tx_antennas(&self) -> usize {
        self.direct.first().map_or(0, |d| d.ncols())
    }

    pub fn irs_count(&self) -> usize {
        self.tx_to_irs.len()
    }

    pub fn element_counts(&self) -> Vec<usize> {
        self.tx_to_irs.iter().map(|m| m.nrows()).collect()
    }

    pub fn total_elements(&self) -> usize {
        self.element_counts().iter().sum()
    }

    /// Checks that all link matrices have consistent shapes.
    pub fn validate(&self) -> Result<()> {
        let nt = self.tx_antennas();
        if self.irs_to_rx.len() != self.tx_to_irs.len() {
            return Err(dimension("irs_to_rx and tx_to_irs disagree on surface count"));
        }
        for (i, t) in self.tx_to_irs.iter().enumerate() {
            if t.ncols() != nt {
                return Err(dimension(format!(
                    "tx_to_irs[{i}] has {} columns, expected {nt}",
                    t.ncols()
                )));
            }
            if self.irs_to_rx[i].len() != self.rx_count() {
                return Err(dimension(format!("irs_to_rx[{i}] has wrong receiver count")));
            }
            for (r, b) in self.irs_to_rx[i].iter().enumerate() {
                if b.ncols() != t.nrows() || b.nrows() != self.direct[r].nrows() {
                    return Err(dimension(format!("irs_to_rx[{i}][{r}] has shape {:?}", b.shape())));
                }
            }
        }
        if self.direct.iter().any(|d| d.ncols() != nt) {
            return Err(dimension("direct channels disagree on transmit antenna count"));
        }
        if !(self.noise_power > 0.0) {
            return Err(domain("noise power must be positive"));
        }
        Ok(())
    }

    /// All surfaces merged into one virtual surface: Tx→IRS links stacked
    /// vertically and IRS→Rx links side by side.
    pub fn stacked(&self) -> ChannelSet {
        let nt = self.tx_antennas();
        let total = self.total_elements();
        let mut tx = CMat::zeros(total, nt);
        let mut off = 0;
        for t in &self.tx_to_irs {
            tx.view_mut((off, 0), (t.nrows(), nt)).copy_from(t);
            off += t.nrows();
        }
        let rx = (0..self.rx_count())
            .map(|r| {
                let nr = self.direct[r].nrows();
                let mut b = CMat::zeros(nr, total);
                let mut off = 0;
                for per_irs in &self.irs_to_rx {
                    let m = &per_irs[r];
                    b.view_mut((0, off), (nr, m.ncols())).copy_from(m);
                    off += m.ncols();
                }
                b
            })
            .collect();
        ChannelSet {
            direct: self.direct.clone(),
            tx_to_irs: vec![tx],
            irs_to_rx: vec![rx],
            wavelength: self.wavelength,
            noise_power: self.noise_power,
        }
    }

    /// Scales every end-to-end channel by `factor` (the receive-side links are
    /// scaled, the Tx→IRS links are left as they are).
    pub fn scaled(&self, factor: f64) -> ChannelSet {
        let s = |m: &CMat| m.map(|z| z * factor);
        ChannelSet {
            direct: self.direct.iter().map(s).collect(),
            tx_to_irs: self.tx_to_irs.clone(),
            irs_to_rx: self.irs_to_rx.iter().map(|v| v.iter().map(s).collect()).collect(),
            wavelength: self.wavelength,
            noise_power: self.noise_power,
        }
    }

    /// Restriction to a subset of receivers, in the given order.
    pub fn select_receivers(&self, rx: &[usize]) -> ChannelSet {
        ChannelSet {
            direct: rx.iter().map(|&r| self.direct[r].clone()).collect(),
            tx_to_irs: self.tx_to_irs.clone(),
            irs_to_rx: self
                .irs_to_rx
                .iter()
                .map(|v| rx.iter().map(|&r| v[r].clone()).collect())
                .collect(),
            wavelength: self.wavelength,
            noise_power: self.noise_power,
        }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Standard complex Gaussian sample, `CN(0, 1)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    num_complex::Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws the `to.count × from.count` channel of one link.
pub fn draw_link<R: Rng + ?Sized>(
    from: &ArraySite,
    to: &ArraySite,
    spec: &FadingSpec,
    wavelength: f64,
    rng: &mut R,
) -> Result<CMat> {
    let delta = sub(to.position, from.position);
    let d = norm(delta);
    if !(d > 0.0) {
        return Err(domain("coincident array positions"));
    }
    let amp = spec.pathloss.gain(d)?.sqrt();
    let (nr, nt) = (to.element_count(), from.element_count());

    let los = || -> Result<CMat> {
        let back = [-delta[0], -delta[1], -delta[2]];
        let a_to = steering_vector(&to.layout, to.spacing, Direction::from_vector(back)?)?;
        let a_from = steering_vector(&from.layout, from.spacing, Direction::from_vector(delta)?)?;
        Ok(a_to * a_from.transpose() * cis(-2.0 * PI * d / wavelength))
    };
    let mut diffuse = || CMat::from_fn(nr, nt, |_, _| complex_gaussian(rng));

    let h = match spec.model {
        FadingModel::PureLos => los()?,
        FadingModel::Rayleigh => diffuse(),
        FadingModel::Rician { k_factor } => {
            let l = los()?;
            let w = diffuse();
            let c = |x: f64| num_complex::Complex64::from(x.sqrt());
            l * c(k_factor / (k_factor + 1.0)) + w * c(1.0 / (k_factor + 1.0))
        }
    };
    Ok(h * num_complex::Complex64::from(amp))
}

/// Draws every link of `geometry`. Links are drawn in a fixed order (direct,
/// then per surface Tx→IRS followed by IRS→Rx per receiver) so a given stream
/// always yields the same set.
pub fn draw_channels<R: Rng + ?Sized>(
    geometry: &Geometry,
    fading: &LinkFading,
    noise_power: f64,
    rng: &mut R,
) -> Result<ChannelSet> {
    geometry.validate()?;
    fading.direct.validate()?;
    fading.tx_irs.validate()?;
    fading.irs_rx.validate()?;
    if !(noise_power > 0.0) {
        return Err(domain("noise power must be positive"));
    }
    let wl = geometry.wavelength;
    let nt = geometry.tx.element_count();

    let mut direct = Vec::with_capacity(geometry.receivers.len());
    for rx in &geometry.receivers {
        if rx.direct_blocked {
            direct.push(CMat::zeros(rx.site.element_count(), nt));
        } else {
            direct.push(draw_link(&geometry.tx, &rx.site, &fading.direct, wl, rng)?);
        }
    }
    let mut tx_to_irs = Vec::with_capacity(geometry.irs.len());
    let mut irs_to_rx = Vec::with_capacity(geometry.irs.len());
    for s in &geometry.irs {
        tx_to_irs.push(draw_link(&geometry.tx, s, &fading.tx_irs, wl, rng)?);
        let mut per_rx = Vec::with_capacity(geometry.receivers.len());
        for rx in &geometry.receivers {
            per_rx.push(draw_link(s, &rx.site, &fading.irs_rx, wl, rng)?);
        }
        irs_to_rx.push(per_rx);
    }
    Ok(ChannelSet {
        direct,
        tx_to_irs,
        irs_to_rx,
        wavelength: wl,
        noise_power,
    })
}

/// `H_eff(rx) = direct(rx) + Σ_i irs_to_rx(i, rx) · Θ_i · tx_to_irs(i)`.
pub fn effective_channel(cs: &ChannelSet, operators: &[CMat]) -> Result<Vec<CMat>> {
    if operators.len() != cs.irs_count() {
        return Err(dimension(format!(
            "{} reflection operators for {} surfaces",
            operators.len(),
            cs.irs_count()
        )));
    }
    for (i, (op, t)) in operators.iter().zip(&cs.tx_to_irs).enumerate() {
        let l = t.nrows();
        if op.shape() != (l, l) {
            return Err(dimension(format!("operator {i} is {:?}, expected {l}x{l}", op.shape())));
        }
    }
    let reflected: Vec<CMat> = operators.iter().zip(&cs.tx_to_irs).map(|(op, t)| op * t).collect();
    Ok((0..cs.rx_count())
        .map(|r| {
            let mut h = cs.direct[r].clone();
            for (i, rt) in reflected.iter().enumerate() {
                h += &cs.irs_to_rx[i][r] * rt;
            }
            h
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{block_diag, max_abs_diff};
    use crate::rng::stream;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C;

    fn close(a: &CVec, b: &[C]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).norm() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn steering_examples() {
        let a = steering_vector(&Layout::Linear(4), 0.5, Direction::broadside()).unwrap();
        close(&a, &[C::new(1.0, 0.0); 4]);
        let a = steering_vector(&Layout::Linear(2), 0.5, Direction::new(1.0, 0.0).unwrap()).unwrap();
        close(&a, &[C::new(1.0, 0.0), C::new(-1.0, 0.0)]);
        let a = steering_vector(&Layout::Linear(4), 0.5, Direction::new(0.5, 0.0).unwrap()).unwrap();
        close(
            &a,
            &[C::new(1.0, 0.0), C::new(0.0, 1.0), C::new(-1.0, 0.0), C::new(0.0, -1.0)],
        );
    }

    #[test]
    fn steering_rejects_bad_angles() {
        assert!(Direction::new(1.2, 0.0).is_err());
        let bad = Direction {
            sin_az: 0.0,
            sin_el: f64::NAN,
        };
        assert!(steering_vector(&Layout::Linear(3), 0.5, bad).is_err());
    }

    #[test]
    fn planar_steering_has_norm_l() {
        let lay = Layout::Planar { rows: 3, cols: 5 };
        let a = steering_vector(&lay, 0.37, Direction::new(0.3, -0.8).unwrap()).unwrap();
        assert_abs_diff_eq!(a.norm_squared(), 15.0, epsilon = 1e-12);
        assert!(a.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn pathloss_example_and_monotonicity() {
        let pl = PathLoss {
            reference_loss_db: 0.0,
            exponent: 2.0,
        };
        assert_abs_diff_eq!(pl.gain(2.0).unwrap().sqrt(), 0.5, epsilon = 1e-15);
        assert!(pl.gain(0.0).is_err());
        assert!(pl.gain(3.0).unwrap() > pl.gain(4.0).unwrap());
    }

    fn single(pos: [f64; 3], n: usize) -> ArraySite {
        ArraySite::new(pos, Layout::Linear(n), 0.5)
    }

    #[test]
    fn pure_los_amplitude_and_rank() {
        let spec = FadingSpec {
            model: FadingModel::PureLos,
            pathloss: PathLoss {
                reference_loss_db: 0.0,
                exponent: 2.0,
            },
        };
        let mut rng = stream(1);
        let h = draw_link(&single([0.0; 3], 1), &single([2.0, 0.0, 0.0], 1), &spec, 0.1, &mut rng).unwrap();
        assert_abs_diff_eq!(h[(0, 0)].norm(), 0.5, epsilon = 1e-15);

        let h = draw_link(
            &single([0.0; 3], 4),
            &single([30.0, 12.0, 5.0], 4),
            &spec,
            0.1,
            &mut rng,
        )
        .unwrap();
        let sv = h.svd(false, false).singular_values;
        assert!(sv[0] > 0.0);
        assert!(sv.iter().skip(1).all(|s| *s < 1e-12 * sv[0]), "{sv:?}");
    }

    #[test]
    fn coincident_positions_rejected() {
        let spec = FadingSpec {
            model: FadingModel::Rayleigh,
            pathloss: PathLoss {
                reference_loss_db: 0.0,
                exponent: 2.0,
            },
        };
        let mut rng = stream(1);
        assert!(draw_link(&single([1.0; 3], 1), &single([1.0; 3], 1), &spec, 0.1, &mut rng).is_err());
    }

    #[test]
    fn rayleigh_mean_power_matches_pathloss() {
        let pl = PathLoss {
            reference_loss_db: 10.0,
            exponent: 3.0,
        };
        let spec = FadingSpec {
            model: FadingModel::Rayleigh,
            pathloss: pl,
        };
        let (a, b) = (single([0.0; 3], 1), single([5.0, 0.0, 0.0], 1));
        let mut rng = stream(42);
        let n = 10_000;
        let p: Vec<f64> = (0..n)
            .map(|_| draw_link(&a, &b, &spec, 0.1, &mut rng).unwrap()[(0, 0)].norm_sqr())
            .collect();
        let mean = p.iter().sum::<f64>() / n as f64;
        let var = p.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let expect = pl.gain(5.0).unwrap();
        assert!(
            (mean - expect).abs() < 3.0 * se,
            "mean {mean} expected {expect} se {se}"
        );
    }

    #[test]
    fn rician_mean_power_matches_pathloss() {
        let pl = PathLoss {
            reference_loss_db: 0.0,
            exponent: 2.0,
        };
        let spec = FadingSpec {
            model: FadingModel::Rician { k_factor: 4.0 },
            pathloss: pl,
        };
        let (a, b) = (single([0.0; 3], 1), single([3.0, 1.0, 0.0], 1));
        let mut rng = stream(3);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| draw_link(&a, &b, &spec, 0.1, &mut rng).unwrap()[(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        let expect = pl.gain(10f64.sqrt()).unwrap();
        assert!((mean / expect - 1.0).abs() < 0.02);
    }

    fn toy_set(l: usize, h_t: C, h_r: C) -> ChannelSet {
        ChannelSet {
            direct: vec![CMat::zeros(1, 1)],
            tx_to_irs: vec![CMat::from_element(l, 1, h_t)],
            irs_to_rx: vec![vec![CMat::from_element(1, l, h_r)]],
            wavelength: 0.1,
            noise_power: 1.0,
        }
    }

    #[test]
    fn effective_channel_examples() {
        let one = C::new(1.0, 0.0);
        let cs = toy_set(1, one, one);
        let op = CMat::from_element(1, 1, cis(PI));
        let h = effective_channel(&cs, &[op]).unwrap();
        assert!((h[0][(0, 0)] - C::new(-1.0, 0.0)).norm() < 1e-15);

        let cs = toy_set(2, one, one);
        let h = effective_channel(&cs, &[CMat::identity(2, 2)]).unwrap();
        assert_eq!(h[0][(0, 0)], C::new(2.0, 0.0));

        assert!(effective_channel(&cs, &[CMat::identity(3, 3)]).is_err());
        assert!(effective_channel(&cs, &[]).is_err());
    }

    fn geometry() -> Geometry {
        Geometry {
            tx: ArraySite::new([0.0, 0.0, 10.0], Layout::Linear(4), 0.5),
            receivers: vec![
                Receiver {
                    site: ArraySite::new([60.0, 20.0, 1.5], Layout::Linear(1), 0.5),
                    direct_blocked: false,
                },
                Receiver {
                    site: ArraySite::new([40.0, -30.0, 1.5], Layout::Linear(2), 0.5),
                    direct_blocked: true,
                },
            ],
            irs: vec![
                ArraySite::new([50.0, 40.0, 5.0], Layout::Linear(3), 0.5),
                ArraySite::new([50.0, -40.0, 5.0], Layout::Planar { rows: 2, cols: 2 }, 0.5),
            ],
            wavelength: 0.1,
        }
    }

    fn fading() -> LinkFading {
        LinkFading::uniform(FadingSpec {
            model: FadingModel::Rician { k_factor: 2.0 },
            pathloss: PathLoss {
                reference_loss_db: 30.0,
                exponent: 2.2,
            },
        })
    }

    #[test]
    fn draw_is_deterministic_and_consistent() {
        let g = geometry();
        let a = draw_channels(&g, &fading(), 1e-12, &mut stream(9)).unwrap();
        let b = draw_channels(&g, &fading(), 1e-12, &mut stream(9)).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        assert_eq!(a.element_counts(), vec![3, 4]);
        assert!(a.direct[1].iter().all(|z| *z == C::new(0.0, 0.0)));
        assert_eq!(a.irs_to_rx[1][1].shape(), (2, 4));
    }

    #[test]
    fn zero_operators_give_direct_exactly() {
        let cs = draw_channels(&geometry(), &fading(), 1e-12, &mut stream(5)).unwrap();
        let ops: Vec<CMat> = cs.element_counts().iter().map(|&l| CMat::zeros(l, l)).collect();
        let h = effective_channel(&cs, &ops).unwrap();
        assert_eq!(h, cs.direct);
    }

    #[test]
    fn stacked_surface_equals_per_surface_sum() {
        let g = geometry();
        for seed in 0..100 {
            let mut rng = stream(seed);
            let cs = draw_channels(&g, &fading(), 1e-12, &mut rng).unwrap();
            let ops: Vec<CMat> = cs
                .element_counts()
                .iter()
                .map(|&l| CMat::from_fn(l, l, |_, _| complex_gaussian(&mut rng)))
                .collect();
            let per = effective_channel(&cs, &ops).unwrap();
            let stacked = effective_channel(&cs.stacked(), &[block_diag(&ops)]).unwrap();
            let single: Vec<Vec<CMat>> = (0..2)
                .map(|i| {
                    let only = ChannelSet {
                        direct: cs.direct.clone(),
                        tx_to_irs: vec![cs.tx_to_irs[i].clone()],
                        irs_to_rx: vec![cs.irs_to_rx[i].clone()],
                        ..cs.clone()
                    };
                    effective_channel(&only, &[ops[i].clone()]).unwrap()
                })
                .collect();
            for r in 0..cs.rx_count() {
                let scale = per[r].norm().max(1e-300);
                assert!(max_abs_diff(&per[r], &stacked[r]) / scale < 1e-12);
                let sum = &single[0][r] + &single[1][r] - &cs.direct[r];
                assert!(max_abs_diff(&per[r], &sum) / scale < 1e-12);
            }
        }
    }
}
