//! Array geometry, single-path mmWave links and scenario synthesis.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, C64};

/// Uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaConfig {
    pub n_elements: usize,
    /// Element spacing over wavelength, D/λ.
    pub spacing_over_wavelength: f64,
}

impl UlaConfig {
    pub fn new(n_elements: usize) -> Self {
        UlaConfig {
            n_elements,
            spacing_over_wavelength: 0.5,
        }
    }

    /// Normalized angle 2·(D/λ)·sin(angle) for a physical angle in degrees.
    pub fn normalized_angle(&self, deg: f64) -> Result<f64> {
        let phi = 2.0 * self.spacing_over_wavelength * deg.to_radians().sin();
        check_normalized(phi)?;
        Ok(phi)
    }
}

fn check_normalized(phi: f64) -> Result<()> {
    // Tolerate rounding at the endfire edge.
    if phi.abs() > 1.0 + 1e-12 || !phi.is_finite() {
        return Err(Error::OutOfRange(phi));
    }
    Ok(())
}

/// One user's single-path link to the base station.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLink {
    pub cluster: usize,
    pub user: usize,
    /// Complex large-scale gain β.
    pub beta: C64,
    pub aod_deg: f64,
    pub aoa_deg: f64,
    pub phi_norm: f64,
    pub theta_norm: f64,
}

/// One synthesized downlink instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub ula_bs: UlaConfig,
    pub ula_ue: UlaConfig,
    /// `clusters[n][m]` is user m of cluster n in configured order.
    pub clusters: Vec<Vec<UserLink>>,
    pub n_rf: usize,
    pub total_power: f64,
    pub noise_var: f64,
}

impl Scenario {
    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn users(&self) -> impl Iterator<Item = &UserLink> {
        self.clusters.iter().flatten()
    }

    pub fn total_users(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// N_BS·N_U, the array gain of a perfectly steered link.
    pub fn array_gain(&self) -> f64 {
        (self.ula_bs.n_elements * self.ula_ue.n_elements) as f64
    }
}

/// ULA steering vector `(1/√N)[1, e^{-jπφ}, …, e^{-jπ(N-1)φ}]`.
pub fn steering_vector(phi_norm: f64, ula: &UlaConfig) -> Result<Vec<C64>> {
    check_normalized(phi_norm)?;
    Ok(steering_unchecked(phi_norm, ula.n_elements))
}

pub(crate) fn steering_unchecked(phi_norm: f64, n: usize) -> Vec<C64> {
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| C64::from_polar(scale, -PI * k as f64 * phi_norm))
        .collect()
}

/// Fejér kernel of order `n` at normalized offset `delta`, i.e.
/// `|a†(φ) a(φ + delta)|²`.
pub fn fejer(delta: f64, n: usize) -> f64 {
    let s = (PI * delta / 2.0).sin();
    if s.abs() < 1e-9 {
        // Near the collinear limit evaluate the inner product directly.
        let sum: C64 = (0..n)
            .map(|k| C64::from_polar(1.0, -PI * k as f64 * delta))
            .sum();
        return (sum.norm_sqr() / (n * n) as f64).min(1.0);
    }
    let num = (n as f64 * PI * delta / 2.0).sin();
    ((num * num) / ((n * n) as f64 * s * s)).clamp(0.0, 1.0)
}

/// Beam collinearity `|a†(φ_a) a(φ_b)|²` via the Fejér kernel.
pub fn beam_collinearity(phi_a: f64, phi_b: f64, ula: &UlaConfig) -> Result<f64> {
    check_normalized(phi_a)?;
    check_normalized(phi_b)?;
    // Symmetric by construction: the kernel is even in its argument.
    Ok(fejer((phi_b - phi_a).abs(), ula.n_elements))
}

/// `H = √(N_BS N_U) β a_U(θ) a_BS†(φ)`, an N_U × N_BS rank-one matrix.
pub fn single_path_channel(link: &UserLink, ula_bs: &UlaConfig, ula_ue: &UlaConfig) -> Result<CMatrix> {
    let a_bs = steering_vector(link.phi_norm, ula_bs)?;
    let a_ue = steering_vector(link.theta_norm, ula_ue)?;
    let scale = link.beta * ((ula_bs.n_elements * ula_ue.n_elements) as f64).sqrt();
    Ok(CMatrix::from_fn(ula_ue.n_elements, ula_bs.n_elements, |r, c| {
        scale * a_ue[r] * a_bs[c].conj()
    }))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines two keys into a new seed with SplitMix64 finalization.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

/// Independent ChaCha8 stream for one (seed, cluster, user) triple.
pub fn user_stream(seed: u64, cluster: usize, user: usize) -> ChaCha8Rng {
    let key = mix_seed(mix_seed(seed, cluster as u64 + 1), user as u64 + 1);
    ChaCha8Rng::seed_from_u64(key)
}

/// Index of the largest-|β| user in each cluster, lowest index on ties.
pub(crate) fn strongest(magnitudes: &[f64]) -> usize {
    let mut best = 0;
    for (m, &g) in magnitudes.iter().enumerate() {
        if g > magnitudes[best] {
            best = m;
        }
    }
    best
}

/// Draws one scenario. The strongest user of each cluster sits exactly at the
/// cluster AoD; every other user is offset by `u ~ U[-b, b]` degrees. Each
/// user's draws come from its own substream, in the order: misalignment,
/// AoA, gain phase.
pub fn synthesize_scenario(cfg: &ScenarioConfig, total_power: f64, seed: u64) -> Result<Scenario> {
    cfg.validate()?;
    if !(total_power > 0.0 && total_power.is_finite()) {
        return Err(Error::Config("total power must be positive".into()));
    }
    let ula_bs = UlaConfig {
        n_elements: cfg.n_bs,
        spacing_over_wavelength: cfg.spacing_over_wavelength,
    };
    let ula_ue = UlaConfig {
        n_elements: cfg.n_u,
        spacing_over_wavelength: cfg.spacing_over_wavelength,
    };
    let b = cfg.misalignment_deg;
    let mut clusters = Vec::with_capacity(cfg.clusters.len());
    for (n, cc) in cfg.clusters.iter().enumerate() {
        let mags = cc.gains.magnitudes();
        let first = strongest(&mags);
        let mut links = Vec::with_capacity(mags.len());
        for (m, &mag) in mags.iter().enumerate() {
            let mut rng = user_stream(seed, n, m);
            let u = b * (2.0 * rng.gen::<f64>() - 1.0);
            let aoa_deg = 180.0 * rng.gen::<f64>() - 90.0;
            let phase = if cc.gains.has_random_phase() {
                2.0 * PI * rng.gen::<f64>()
            } else {
                0.0
            };
            let aod_deg = if m == first { cc.aod_deg } else { cc.aod_deg + u };
            links.push(UserLink {
                cluster: n,
                user: m,
                beta: C64::from_polar(mag, phase),
                aod_deg,
                aoa_deg,
                phi_norm: ula_bs.normalized_angle(aod_deg)?,
                theta_norm: ula_ue.normalized_angle(aoa_deg)?,
            });
        }
        clusters.push(links);
    }
    Ok(Scenario {
        ula_bs,
        ula_ue,
        clusters,
        n_rf: cfg.n_rf(),
        total_power,
        noise_var: cfg.noise_var,
    })
}
