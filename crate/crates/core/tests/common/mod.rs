#![allow(dead_code)]

use irs_core::channel::{
    draw_channels, ArraySite, ChannelSet, FadingModel, FadingSpec, Geometry, Layout, LinkFading, PathLoss, Receiver,
};
use irs_core::rng::{derive, purpose, stream};
use rand::Rng;

pub const NOISE: f64 = 1e-12;

pub fn site(x: f64, y: f64, z: f64, n: usize) -> ArraySite {
    ArraySite::new([x, y, z], Layout::Linear(n), 0.5)
}

/// Transmitter at the origin, receivers uniform in a disc of radius 100 m,
/// two surface sites; `counts` gives the elements per site (0 drops a site).
pub fn secure_geometry(seed: u64, receivers: &[usize], counts: &[usize], nt: usize) -> Geometry {
    let mut rng = stream(derive(seed, purpose::PLACEMENT));
    let rx = receivers
        .iter()
        .map(|&n| {
            let r = 100.0 * rng.random::<f64>().sqrt();
            let a = rng.random::<f64>() * std::f64::consts::TAU;
            Receiver {
                site: site(r * a.cos(), r * a.sin(), 1.5, n),
                direct_blocked: true,
            }
        })
        .collect();
    let sites = [[30.0, 40.0, 10.0], [30.0, -40.0, 10.0]];
    Geometry {
        tx: site(0.0, 0.0, 10.0, nt),
        receivers: rx,
        irs: counts
            .iter()
            .zip(sites)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, p)| site(p[0], p[1], p[2], c))
            .collect(),
        wavelength: 0.1,
    }
}

pub fn secure_fading() -> LinkFading {
    let pl = PathLoss {
        reference_loss_db: 30.0,
        exponent: 2.2,
    };
    LinkFading {
        direct: FadingSpec {
            model: FadingModel::Rayleigh,
            pathloss: PathLoss {
                reference_loss_db: 30.0,
                exponent: 3.5,
            },
        },
        tx_irs: FadingSpec {
            model: FadingModel::PureLos,
            pathloss: pl,
        },
        irs_rx: FadingSpec {
            model: FadingModel::Rician { k_factor: 3.0 },
            pathloss: pl,
        },
    }
}

pub fn secure_channels(seed: u64, receivers: &[usize], counts: &[usize], nt: usize) -> ChannelSet {
    let g = secure_geometry(seed, receivers, counts, nt);
    draw_channels(
        &g,
        &secure_fading(),
        NOISE,
        &mut stream(derive(seed, purpose::CHANNELS)),
    )
    .unwrap()
}

pub struct SwiptInstance {
    pub cs: ChannelSet,
    pub geometry: Geometry,
}

/// Transmitter at the origin, one planar surface, two information receivers
/// around 25 m and two energy receivers around 6 m from the surface.
pub fn swipt_instance(seed: u64, nt: usize) -> SwiptInstance {
    let mut rng = stream(derive(seed, purpose::PLACEMENT));
    let irs = [20.0, 5.0, 5.0];
    let mut place = |dist: f64| {
        let r = dist * (0.8 + 0.4 * rng.random::<f64>());
        let a = -1.2 + 1.4 * rng.random::<f64>();
        Receiver {
            site: site(irs[0] + r * a.cos(), irs[1] + r * a.sin(), 1.5, 1),
            direct_blocked: false,
        }
    };
    let receivers = vec![place(25.0), place(25.0), place(6.0), place(6.0)];
    let geometry = Geometry {
        tx: site(0.0, 0.0, 10.0, nt),
        receivers,
        irs: vec![ArraySite::new(irs, Layout::Planar { rows: 10, cols: 20 }, 0.5)],
        wavelength: 0.1,
    };
    let mut fading = secure_fading();
    fading.irs_rx.model = FadingModel::Rician { k_factor: 10.0 };
    let cs = draw_channels(&geometry, &fading, NOISE, &mut stream(derive(seed, purpose::CHANNELS))).unwrap();
    SwiptInstance { cs, geometry }
}
