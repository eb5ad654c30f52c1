//! Link-level performance metrics and their gradients.
//!
//! Legitimate and energy receivers are single-antenna, so their channels are
//! `1 × Nt` rows; eavesdroppers may carry several antennas and are assumed to
//! combine optimally.

use num_complex::Complex64;

use crate::error::{dimension, domain, Error, Result};
use crate::linalg::{fro2, CMat};

const LN2: f64 = std::f64::consts::LN_2;

/// Per-user SINR and rate (bits/s/Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetrics {
    pub sinr: Vec<f64>,
    pub rate: Vec<f64>,
    pub sum_rate: f64,
}

fn check_rows(h: &[CMat], nt: usize, what: &str) -> Result<()> {
    for (k, hk) in h.iter().enumerate() {
        if hk.nrows() != 1 || hk.ncols() != nt {
            return Err(dimension(format!(
                "{what} {k} channel is {:?}, expected 1x{nt}",
                hk.shape()
            )));
        }
    }
    Ok(())
}

fn check_precoders(w: &CMat, v: &CMat, users: usize) -> Result<()> {
    if w.ncols() != users {
        return Err(dimension(format!("{} beams for {users} users", w.ncols())));
    }
    if v.nrows() != w.nrows() {
        return Err(dimension("precoder and noise factor disagree on antenna count"));
    }
    Ok(())
}

/// `SINR_k = |h_k w_k|² / (Σ_{j≠k} |h_k w_j|² + ‖h_k V‖² + σ²)`.
pub fn link_metrics(h: &[CMat], w: &CMat, v: &CMat, noise: f64) -> Result<LinkMetrics> {
    if !(noise > 0.0) {
        return Err(domain("noise power must be positive"));
    }
    check_precoders(w, v, h.len())?;
    check_rows(h, w.nrows(), "user")?;
    let sinr: Vec<f64> = h
        .iter()
        .enumerate()
        .map(|(k, hk)| {
            let hw = hk * w;
            let sig = hw[k].norm_sqr();
            let total = hw.iter().map(|z| z.norm_sqr()).sum::<f64>() + fro2(&(hk * v)) + noise;
            sig / (total - sig)
        })
        .collect();
    let rate: Vec<f64> = sinr.iter().map(|s| s.ln_1p() / LN2).collect();
    Ok(LinkMetrics {
        sum_rate: rate.iter().sum(),
        sinr,
        rate,
    })
}

/// Sum-rate gradients (`2·∂/∂z*`) with respect to `W`, `V` and each user's channel row.
pub(crate) struct SumRateGradient {
    pub w: CMat,
    pub v: CMat,
    pub h: Vec<CMat>,
}

pub(crate) fn sum_rate_gradient(h: &[CMat], w: &CMat, v: &CMat, noise: f64) -> SumRateGradient {
    let (nt, k_users) = (w.nrows(), w.ncols());
    let mut gw = CMat::zeros(nt, k_users);
    let mut gv = CMat::zeros(nt, v.ncols());
    let mut gh = Vec::with_capacity(h.len());
    for (k, hk) in h.iter().enumerate() {
        let hw = hk * w;
        let hv = hk * v;
        let sig = hw[k].norm_sqr();
        let s = hw.iter().map(|z| z.norm_sqr()).sum::<f64>() + hv.iter().map(|z| z.norm_sqr()).sum::<f64>() + noise;
        let i = s - sig;
        let (a, b) = (2.0 / (LN2 * s), 2.0 / (LN2 * i));
        let hk_adj = hk.adjoint();
        // row gradient: (2/ln2)[h C / S − h C₋ₖ / I]
        let mut g_row = CMat::zeros(1, nt);
        for j in 0..k_users {
            let coef = if j == k { a } else { a - b };
            let col = &hk_adj * (hw[j] * coef);
            gw.column_mut(j)
                .axpy(Complex64::new(1.0, 0.0), &col.column(0), Complex64::new(1.0, 0.0));
            g_row += w.column(j).adjoint() * (hw[j] * coef);
        }
        for j in 0..v.ncols() {
            let col = &hk_adj * (hv[j] * (a - b));
            gv.column_mut(j)
                .axpy(Complex64::new(1.0, 0.0), &col.column(0), Complex64::new(1.0, 0.0));
            g_row += v.column(j).adjoint() * (hv[j] * (a - b));
        }
        gh.push(g_row);
    }
    SumRateGradient { w: gw, v: gv, h: gh }
}

/// Leakage of user `k` to one eavesdropper together with the vector
/// `z = Q_k^{-1} E w_k`, where `Q_k` is the eavesdropper's interference-plus-noise covariance.
pub(crate) struct Leakage {
    pub value: f64,
    pub z: CMat,
}

/// `E·(WWᴴ + VVᴴ)·Eᴴ` minus user `k`'s own term, plus `σ²I`.
fn interference_covariance(e: &CMat, ew: &CMat, ev: &CMat, k: usize, noise: f64) -> CMat {
    let nr = e.nrows();
    let mut q = CMat::identity(nr, nr) * Complex64::new(noise, 0.0);
    for j in 0..ew.ncols() {
        if j != k {
            let c = ew.column(j);
            q += &c * c.adjoint();
        }
    }
    q += ev * ev.adjoint();
    q
}

pub(crate) fn leakage_terms(e: &CMat, w: &CMat, v: &CMat, noise: f64) -> Result<Vec<Leakage>> {
    let ew = e * w;
    let ev = e * v;
    (0..w.ncols())
        .map(|k| {
            let q = interference_covariance(e, &ew, &ev, k, noise);
            let chol = q
                .cholesky()
                .ok_or_else(|| Error::Conditioning("eavesdropper covariance is not positive definite".into()))?;
            let a = ew.columns(k, 1).into_owned();
            let z = chol.solve(&a);
            let value = (a.adjoint() * &z)[(0, 0)].re.max(0.0);
            Ok(Leakage { value, z })
        })
        .collect()
}

/// `SINR_{e,k} = w_kᴴEᴴ(σ²I + E(Σ_{j≠k} w_j w_jᴴ + VVᴴ)Eᴴ)^{-1}E w_k`, indexed `[e][k]`.
pub fn leakage_sinr(h_e: &[CMat], w: &CMat, v: &CMat, noise: f64) -> Result<Vec<Vec<f64>>> {
    if !(noise > 0.0) {
        return Err(domain("noise power must be positive"));
    }
    check_precoders(w, v, w.ncols())?;
    h_e.iter()
        .map(|e| {
            if e.ncols() != w.nrows() {
                return Err(dimension("eavesdropper channel does not match the antenna count"));
            }
            Ok(leakage_terms(e, w, v, noise)?.into_iter().map(|l| l.value).collect())
        })
        .collect()
}

/// Gradient of `Σ_k weights_k · SINR_{e,k}` with respect to `W`, `V` and `E`.
pub(crate) fn leakage_gradient(e: &CMat, w: &CMat, v: &CMat, terms: &[Leakage], weights: &[f64]) -> (CMat, CMat, CMat) {
    let mut gw = CMat::zeros(w.nrows(), w.ncols());
    let mut gv = CMat::zeros(v.nrows(), v.ncols());
    let mut ge = CMat::zeros(e.nrows(), e.ncols());
    let ew = e * w;
    let ev = e * v;
    for (k, (t, &wt)) in terms.iter().zip(weights).enumerate() {
        if wt == 0.0 {
            continue;
        }
        let two = Complex64::new(2.0 * wt, 0.0);
        let ez = e.adjoint() * &t.z; // Nt × 1
        let zh = t.z.adjoint();
        let zew = &zh * &ew; // 1 × K
        let zev = &zh * &ev; // 1 × r
        for j in 0..w.ncols() {
            let c = if j == k { two } else { -two * zew[j] };
            gw.column_mut(j).axpy(c, &ez.column(0), Complex64::new(1.0, 0.0));
        }
        for j in 0..v.ncols() {
            gv.column_mut(j)
                .axpy(-two * zev[j], &ez.column(0), Complex64::new(1.0, 0.0));
        }
        // ∇_E = 2 z (w_kᴴ − zᴴ E C₋ₖ)
        let mut row = w.column(k).adjoint();
        for j in 0..w.ncols() {
            if j != k {
                row -= w.column(j).adjoint() * zew[j];
            }
        }
        for j in 0..v.ncols() {
            row -= v.column(j).adjoint() * zev[j];
        }
        ge += &t.z * row * two;
    }
    (gw, gv, ge)
}

/// `η·(‖h W‖² + ‖h V‖²)`: linear energy harvesting, artificial noise included.
pub fn harvested_power(h: &CMat, w: &CMat, v: &CMat, efficiency: f64) -> Result<f64> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(domain(format!("harvesting efficiency {efficiency} outside (0, 1]")));
    }
    if h.ncols() != w.nrows() || (v.ncols() > 0 && h.ncols() != v.nrows()) {
        return Err(dimension("energy receiver channel does not match the precoder"));
    }
    let mut p = fro2(&(h * w));
    if v.ncols() > 0 {
        p += fro2(&(h * v));
    }
    Ok(efficiency * p)
}

/// `S / (σ² + (κ_tx + κ_rx)·S)`: SNR under transceiver distortion.
pub fn impaired_snr(signal_power: f64, noise: f64, kappa_tx: f64, kappa_rx: f64) -> Result<f64> {
    if !(signal_power >= 0.0 && kappa_tx >= 0.0 && kappa_rx >= 0.0) {
        return Err(domain("signal power and distortion ratios must be non-negative"));
    }
    if !(noise > 0.0) {
        return Err(domain("noise power must be positive"));
    }
    if signal_power.is_infinite() {
        let k = kappa_tx + kappa_rx;
        return Ok(if k > 0.0 { 1.0 / k } else { f64::INFINITY });
    }
    Ok(signal_power / (noise + (kappa_tx + kappa_rx) * signal_power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::linalg::CVec;
    use crate::optim::gradcheck::{complex_gradient_error, DEFAULT_FD_STEP};
    use crate::rng::stream;
    use num_complex::Complex64 as C;

    fn row(v: &[C]) -> CMat {
        CMat::from_row_slice(1, v.len(), v)
    }

    fn r(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn single_user_snr() {
        let p: f64 = 3.0;
        let h = vec![row(&[r(1.0), r(0.0)])];
        let w = CMat::from_column_slice(2, 1, &[r(p.sqrt()), r(0.0)]);
        let m = link_metrics(&h, &w, &CMat::zeros(2, 0), 1.0).unwrap();
        assert!((m.sinr[0] - p).abs() < 1e-12);
        assert!((m.sum_rate - (1.0 + p).log2()).abs() < 1e-12);
        // noise in the null space of h leaves the SINR unchanged
        let v = CMat::from_column_slice(2, 1, &[r(0.0), r(5.0)]);
        let m2 = link_metrics(&h, &w, &v, 1.0).unwrap();
        assert_eq!(m.sinr, m2.sinr);
    }

    #[test]
    fn orthogonal_users_do_not_interfere() {
        let h = vec![row(&[r(1.0), r(0.0)]), row(&[r(0.0), r(2.0)])];
        let w = CMat::from_row_slice(2, 2, &[r(1.0), r(0.0), r(0.0), r(1.0)]);
        let m = link_metrics(&h, &w, &CMat::zeros(2, 0), 0.5).unwrap();
        assert!((m.sinr[0] - 2.0).abs() < 1e-12);
        assert!((m.sinr[1] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn leakage_examples() {
        let mut rng = stream(4);
        let e = CMat::from_fn(2, 3, |_, _| complex_gaussian(&mut rng));
        let w = CMat::from_fn(3, 2, |_, _| complex_gaussian(&mut rng));
        let none = leakage_sinr(&[e.clone()], &w, &CMat::zeros(3, 0), 1.0).unwrap();
        // noise aligned with the eavesdropper's channel
        let v = e.adjoint() * r(3.0);
        let with = leakage_sinr(&[e.clone()], &w, &v, 1.0).unwrap();
        for k in 0..2 {
            assert!(with[0][k] < none[0][k]);
        }
        let zero = leakage_sinr(&[e.clone()], &CMat::zeros(3, 2), &v, 1.0).unwrap();
        assert!(zero[0].iter().all(|&x| x == 0.0));
        // single antenna, single user, no noise factor
        let he = row(&[r(0.5), C::new(0.0, 1.0)]);
        let w1 = CMat::from_column_slice(2, 1, &[r(1.0), r(2.0)]);
        let l = leakage_sinr(&[he.clone()], &w1, &CMat::zeros(2, 0), 2.0).unwrap();
        assert!((l[0][0] - (&he * &w1)[0].norm_sqr() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn leakage_matches_direct_inverse() {
        let mut rng = stream(8);
        let e = CMat::from_fn(2, 4, |_, _| complex_gaussian(&mut rng));
        let w = CMat::from_fn(4, 3, |_, _| complex_gaussian(&mut rng));
        let v = CMat::from_fn(4, 4, |_, _| complex_gaussian(&mut rng) * 0.3);
        let l = leakage_sinr(&[e.clone()], &w, &v, 0.7).unwrap();
        for k in 0..3 {
            let mut c = &v * v.adjoint();
            for j in 0..3 {
                if j != k {
                    c += w.column(j) * w.column(j).adjoint();
                }
            }
            let q = CMat::identity(2, 2) * r(0.7) + &e * c * e.adjoint();
            let a = &e * w.column(k);
            let val = (a.adjoint() * q.try_inverse().unwrap() * a)[(0, 0)].re;
            assert!((val - l[0][k]).abs() < 1e-10 * val);
        }
    }

    #[test]
    fn harvested_and_impaired() {
        let h = row(&[r(1.0)]);
        let w = CMat::from_element(1, 1, r(2.0));
        assert!((harvested_power(&h, &w, &CMat::zeros(1, 0), 1.0).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(
            harvested_power(&h, &CMat::zeros(1, 1), &CMat::zeros(1, 1), 0.8).unwrap(),
            0.0
        );
        let w2 = &w * r(2.0);
        assert!((harvested_power(&h, &w2, &CMat::zeros(1, 0), 0.8).unwrap() - 4.0 * 0.8 * 4.0).abs() < 1e-12);
        assert!(harvested_power(&h, &w, &CMat::zeros(1, 0), 1.5).is_err());

        assert_eq!(impaired_snr(5.0, 2.0, 0.0, 0.0).unwrap(), 2.5);
        assert_eq!(impaired_snr(1.0, 1.0, 0.0, 0.0).unwrap(), 1.0);
        assert!((impaired_snr(f64::INFINITY, 1.0, 0.01, 0.01).unwrap() - 50.0).abs() < 1e-12);
        assert!((impaired_snr(1e12, 1.0, 0.01, 0.01).unwrap() - 50.0).abs() < 1e-6);
        assert!(impaired_snr(-1.0, 1.0, 0.0, 0.0).is_err());
        assert!(impaired_snr(1.0, 0.0, 0.0, 0.0).is_err());
    }

    fn pack(w: &CMat, v: &CMat) -> CVec {
        CVec::from_iterator(w.len() + v.len(), w.iter().chain(v.iter()).copied())
    }

    fn unpack(x: &CVec, nt: usize, k: usize) -> (CMat, CMat) {
        let w = CMat::from_column_slice(nt, k, &x.as_slice()[..nt * k]);
        let v = CMat::from_column_slice(nt, nt, &x.as_slice()[nt * k..]);
        (w, v)
    }

    #[test]
    fn sum_rate_gradients_match_finite_differences() {
        let mut rng = stream(21);
        let (nt, k) = (3, 2);
        let h: Vec<CMat> = (0..k)
            .map(|_| CMat::from_fn(1, nt, |_, _| complex_gaussian(&mut rng)))
            .collect();
        let w = CMat::from_fn(nt, k, |_, _| complex_gaussian(&mut rng));
        let v = CMat::from_fn(nt, nt, |_, _| complex_gaussian(&mut rng) * 0.5);
        let g = sum_rate_gradient(&h, &w, &v, 0.8);
        let x = pack(&w, &v);
        let f = |x: &CVec| {
            let (w, v) = unpack(x, nt, k);
            link_metrics(&h, &w, &v, 0.8).unwrap().sum_rate
        };
        assert!(complex_gradient_error(f, &pack(&g.w, &g.v), &x, DEFAULT_FD_STEP) < 1e-6);
        for u in 0..k {
            let fh = |hr: &CVec| {
                let mut hh = h.clone();
                hh[u] = CMat::from_row_slice(1, nt, hr.as_slice());
                link_metrics(&hh, &w, &v, 0.8).unwrap().sum_rate
            };
            let hr = CVec::from_row_slice(h[u].as_slice());
            let gr = CVec::from_row_slice(g.h[u].as_slice());
            assert!(complex_gradient_error(fh, &gr, &hr, DEFAULT_FD_STEP) < 1e-6);
        }
    }

    #[test]
    fn leakage_gradients_match_finite_differences() {
        let mut rng = stream(22);
        let (nt, k, nr) = (3, 2, 2);
        let e = CMat::from_fn(nr, nt, |_, _| complex_gaussian(&mut rng));
        let w = CMat::from_fn(nt, k, |_, _| complex_gaussian(&mut rng));
        let v = CMat::from_fn(nt, nt, |_, _| complex_gaussian(&mut rng) * 0.5);
        let weights = [0.7, 1.3];
        let terms = leakage_terms(&e, &w, &v, 0.9).unwrap();
        let (gw, gv, ge) = leakage_gradient(&e, &w, &v, &terms, &weights);
        let f = |x: &CVec| {
            let (w, v) = unpack(x, nt, k);
            let l = leakage_sinr(&[e.clone()], &w, &v, 0.9).unwrap();
            weights[0] * l[0][0] + weights[1] * l[0][1]
        };
        assert!(complex_gradient_error(f, &pack(&gw, &gv), &pack(&w, &v), DEFAULT_FD_STEP) < 1e-6);
        let fe = |x: &CVec| {
            let e = CMat::from_column_slice(nr, nt, x.as_slice());
            let l = leakage_sinr(&[e], &w, &v, 0.9).unwrap();
            weights[0] * l[0][0] + weights[1] * l[0][1]
        };
        let ex = CVec::from_column_slice(e.as_slice());
        let gex = CVec::from_column_slice(ge.as_slice());
        assert!(complex_gradient_error(fe, &gex, &ex, DEFAULT_FD_STEP) < 1e-6);
    }
}
