use irs_core::channel::{complex_gaussian, effective_channel, ChannelSet, Direction, Layout};
use irs_core::codebook::{
    generate_codebook, partition_tiles, precompute_tile_channels, select_effective_channel, ModeSelection,
};
use irs_core::irs_models::{ids_to_reflection, reactance_to_scattering, Connectivity, InwConfig};
use irs_core::linalg::{max_abs_diff, CMat, CVec};
use irs_core::optim::retract_circle;
use irs_core::parallel::Execution;
use irs_core::rng::stream;
use irs_core::scenarios::impaired_snr;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn reactance(l: usize, conn: &Connectivity, entries: &[f64]) -> DMatrix<f64> {
    let mask = conn.mask(l).unwrap();
    let mut x = DMatrix::from_fn(l, l, |i, j| {
        if mask[(i, j)] {
            entries[i.min(j) * l + i.max(j)]
        } else {
            0.0
        }
    });
    x = (&x + x.transpose()) * 0.5;
    x
}

fn connectivity(kind: u8, l: usize, group: usize) -> Connectivity {
    match kind {
        0 => Connectivity::Single,
        1 => Connectivity::Full,
        _ => Connectivity::partial_uniform(l, group),
    }
}

proptest! {
    #[test]
    fn network_scattering_is_symmetric_unitary_and_blocked(
        l in 1usize..9,
        kind in 0u8..3,
        group in 1usize..4,
        entries in proptest::collection::vec(-200.0f64..200.0, 64),
    ) {
        let conn = connectivity(kind, l, group);
        let cfg = InwConfig::new(conn.clone(), reactance(l, &conn, &entries), 50.0).unwrap();
        let theta = reactance_to_scattering(&cfg).unwrap();
        prop_assert!(theta.unitarity_error() < 1e-10);
        prop_assert!(theta.symmetry_error() < 1e-10);
        prop_assert!(theta.off_block_magnitude(&conn.groups(l).unwrap()) < 1e-10);
    }

    #[test]
    fn single_connection_reduces_to_phase_shifts(phases in proptest::collection::vec(-3.1f64..3.1, 1..12)) {
        let cfg = InwConfig::from_phases(&phases, 50.0).unwrap();
        let theta = reactance_to_scattering(&cfg).unwrap();
        prop_assert!(max_abs_diff(theta.matrix(), ids_to_reflection(&phases).matrix()) < 1e-12);
    }

    #[test]
    fn circle_retraction_stays_on_the_circle(
        args in proptest::collection::vec((0.0f64..6.3, -5.0f64..5.0, -5.0f64..5.0), 1..16),
    ) {
        let x = CVec::from_iterator(args.len(), args.iter().map(|a| Complex64::from_polar(1.0, a.0)));
        let v = CVec::from_iterator(args.len(), args.iter().map(|a| Complex64::new(a.1, a.2)));
        if let Some(y) = retract_circle(&x, &v) {
            prop_assert!(y.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn impaired_snr_is_increasing_and_saturates(s in 1e-3f64..1e6, k in 1e-4f64..0.1) {
        let a = impaired_snr(s, 1.0, k / 2.0, k / 2.0).unwrap();
        let b = impaired_snr(2.0 * s, 1.0, k / 2.0, k / 2.0).unwrap();
        prop_assert!(b > a);
        prop_assert!(b < 1.0 / k);
    }

    #[test]
    fn one_tile_change_moves_the_channel_by_that_tile(
        seed in 0u64..1000,
        n in 1usize..5,
        m in 1usize..4,
        tile in 0usize..4,
    ) {
        let tile = tile % n;
        let l = 8;
        let mut rng = stream(seed);
        let cs = ChannelSet {
            direct: vec![CMat::from_fn(1, 2, |_, _| complex_gaussian(&mut rng))],
            tx_to_irs: vec![CMat::from_fn(l, 2, |_, _| complex_gaussian(&mut rng))],
            irs_to_rx: vec![vec![CMat::from_fn(1, l, |_, _| complex_gaussian(&mut rng))]],
            wavelength: 0.1,
            noise_power: 1.0,
        };
        let part = partition_tiles(l, n).unwrap();
        let grid: Vec<Direction> = (0..m).map(|i| Direction::new(0.2 * i as f64 - 0.3, 0.0).unwrap()).collect();
        let cb = generate_codebook(&part, &Layout::Linear(l).offsets(), m, 0.5, Direction::new(0.1, 0.0).unwrap(), &grid).unwrap();
        let tc = precompute_tile_channels(&cs, &part, &cb, Execution::Sequential).unwrap();
        let a = ModeSelection(vec![0; n]);
        let mut b = a.clone();
        b.0[tile] = m - 1;
        let ha = &select_effective_channel(&tc, &a).unwrap()[0];
        let hb = &select_effective_channel(&tc, &b).unwrap()[0];
        let delta = &tc.contributions[tile][m - 1][0] - &tc.contributions[tile][0][0];
        prop_assert!(max_abs_diff(&(hb - ha), &delta) < 1e-12);
        let stitched = cb.stitch(&part, &b).unwrap();
        let via_profile = &effective_channel(&cs, &[ids_to_reflection(&stitched).into_inner()]).unwrap()[0];
        prop_assert!(max_abs_diff(hb, via_profile) < 1e-12);
    }
}
