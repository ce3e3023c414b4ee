//! Closed-form rate bounds for perfect and imperfect beam alignment and the
//! misalignment model they rest on.

use crate::channel::{fejer, steering_unchecked, UserLink};
use crate::error::{Error, Result};
use crate::noma::UserSlot;
use crate::numerics::{gram_max_eigen, hermitian_eig, inner, norm_sq, normalized, CMatrix, EigenPair, C64};

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Aligned lower bound `log2(1 + P_m g / (P_ahead g + σ²/κ_min(F)))` where
/// `g = N_BS N_U |β|²`.
pub fn theorem1_lower_bound(slot: &UserSlot, gain: f64, kappa_min_f: f64, noise_var: f64) -> f64 {
    log2_1p(slot.own_power * gain / (slot.ahead_power * gain + noise_var / kappa_min_f))
}

/// `ρ = |ĥ_first† ĥ_user|`.
pub fn misalignment_factor(h_user: &[C64], h_first: &[C64]) -> Result<f64> {
    let nu = norm_sq(h_user).sqrt();
    let nf = norm_sq(h_first).sqrt();
    if !(nu > 0.0 && nf > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok((inner(h_first, h_user).norm() / (nu * nf)).min(1.0))
}

/// `Σ_ℓ K(φ_{ℓ,1} − φ)` over all first-user beams.
pub fn fejer_sum(phi: f64, first_phis: &[f64], n_bs: usize) -> f64 {
    first_phis.iter().map(|&p| fejer(p - phi, n_bs)).sum()
}

/// Nonzero eigenpairs of `F_RF F_RF†` obtained from the small Gram:
/// `V₁ = F_RF W Λ^{-1/2}`.
pub fn rf_outer_modes(f_rf: &CMatrix) -> Result<EigenPair> {
    let gram = f_rf.adjoint().matmul(f_rf)?;
    let eig = hermitian_eig(&gram)?;
    let n = gram.rows();
    let mut vectors = f_rf.matmul(&eig.vectors)?;
    for i in 0..n {
        let l = eig.values[i];
        if !(l > 0.0) {
            return Err(Error::DegenerateSubspace(i));
        }
        let s = 1.0 / l.sqrt();
        for r in 0..vectors.rows() {
            vectors[(r, i)] *= s;
        }
    }
    Ok(EigenPair {
        values: eig.values,
        vectors,
    })
}

/// Eigen-expansion form `Σ_i κ_i |a_m† v_i v_i† a_1| / (√K_m √K_1)`. Never
/// smaller than the direct form.
pub fn misalignment_factor_eigen(
    phi_user: f64,
    phi_first: f64,
    modes: &EigenPair,
    k_user: f64,
    k_first: f64,
) -> f64 {
    let n_bs = modes.vectors.rows();
    let am = steering_unchecked(phi_user, n_bs);
    let a1 = steering_unchecked(phi_first, n_bs);
    let mut total = 0.0;
    for (i, &kappa) in modes.values.iter().enumerate() {
        let v = modes.vectors.column(i);
        total += kappa * (inner(&am, &v) * inner(&v, &a1)).norm();
    }
    total / (k_user.sqrt() * k_first.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeakageWeighting {
    /// Weights √P_ℓ on the other clusters' beams.
    #[default]
    PowerWeighted,
    Unweighted,
}

/// Unit direction `normalize(√(N_BS N_U) F_RF† Σ_{ℓ≠n} w_ℓ β_{ℓ,1} a(φ_{ℓ,1}))`.
pub fn leakage_direction(
    f_rf: &CMatrix,
    first_links: &[&UserLink],
    cluster_powers: &[f64],
    exclude: usize,
    weighting: LeakageWeighting,
    array_gain: f64,
) -> Result<Vec<C64>> {
    let n_bs = f_rf.rows();
    let mut acc = vec![C64::new(0.0, 0.0); n_bs];
    for (l, link) in first_links.iter().enumerate() {
        if l == exclude {
            continue;
        }
        let w = match weighting {
            LeakageWeighting::PowerWeighted => cluster_powers[l].sqrt(),
            LeakageWeighting::Unweighted => 1.0,
        };
        let a = steering_unchecked(link.phi_norm, n_bs);
        let coef = link.beta * w;
        for (x, y) in acc.iter_mut().zip(&a) {
            *x += coef * y;
        }
    }
    let g: Vec<C64> = f_rf
        .adjoint_mul_vec(&acc)?
        .into_iter()
        .map(|z| z * array_gain.sqrt())
        .collect();
    if !(norm_sq(&g).sqrt() >= 1e-12) {
        return Err(Error::DegenerateSubspace(exclude));
    }
    normalized(&g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisalignmentModel {
    pub rho: f64,
    pub leak_dir: Vec<C64>,
    /// K sum at the first user's angle.
    pub k_sum_first: f64,
    /// K sum at this user's angle.
    pub k_sum_user: f64,
}

/// `ρ ĥ_1 + √(1−ρ²) ĝ`. Not renormalized; unit norm when ĥ_1 ⊥ ĝ.
pub fn model_effective_channel(rho: f64, h_first_hat: &[C64], leak_dir: &[C64]) -> Vec<C64> {
    let rho = rho.clamp(0.0, 1.0);
    let s = (1.0 - rho * rho).sqrt();
    h_first_hat
        .iter()
        .zip(leak_dir)
        .map(|(a, b)| a * rho + b * s)
        .collect()
}

/// Largest eigenvalue of `S = F_w F_w†`, where `F_w` is F_BB without column
/// n and with column ℓ scaled by √P_ℓ. Zero for a single cluster.
pub fn kappa_max_s(f_bb: &CMatrix, cluster_powers: &[f64], exclude: usize) -> Result<f64> {
    let n = f_bb.cols();
    if n < 2 {
        return Ok(0.0);
    }
    let cols: Vec<usize> = (0..n).filter(|&l| l != exclude).collect();
    let fw = CMatrix::from_fn(f_bb.rows(), cols.len(), |r, c| {
        f_bb[(r, cols[c])] * cluster_powers[cols[c]].sqrt()
    });
    gram_max_eigen(&fw)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem2Bound {
    pub lb: f64,
    pub zeta_intra: f64,
    pub zeta_inter: f64,
    pub zeta_noise: f64,
}

/// Misaligned lower bound with its three denominator terms.
pub fn theorem2_lower_bound(
    slot: &UserSlot,
    gain: f64,
    model: &MisalignmentModel,
    kappa_max_s: f64,
    kappa_min_f: f64,
    noise_var: f64,
) -> Theorem2Bound {
    let r2 = model.rho * model.rho;
    let zeta_intra = slot.ahead_power * r2 * gain;
    let zeta_inter = (1.0 - r2).max(0.0) * gain * kappa_max_s / kappa_min_f * model.k_sum_first;
    let zeta_noise = noise_var * model.k_sum_first / (kappa_min_f * model.k_sum_user);
    let lb = log2_1p(slot.own_power * r2 * gain / (zeta_intra + zeta_inter + zeta_noise));
    Theorem2Bound {
        lb,
        zeta_intra,
        zeta_inter,
        zeta_noise,
    }
}

/// Upper bound on the aligned-minus-misaligned rate gap. `None` for the
/// strongest decoding position, where the bound is undefined.
#[allow(clippy::too_many_arguments)]
pub fn theorem3_gap_bound(
    slot: &UserSlot,
    gain: f64,
    rho: f64,
    kappa_max_s: f64,
    kappa_min_f: f64,
    k_sum_first: f64,
    k_sum_user: f64,
    noise_var: f64,
) -> Option<f64> {
    if slot.position == 0 || slot.ahead_power <= 0.0 {
        return None;
    }
    let r2 = rho * rho;
    let num = (1.0 - r2).max(0.0) * kappa_max_s + noise_var / (k_sum_user * gain);
    let den = r2 * kappa_min_f * slot.ahead_power / k_sum_first;
    Some(log2_1p(num / den))
}

/// Everything the analysis reports for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub lb_thm1: f64,
    pub lb_thm2: f64,
    pub gap_ub_thm3: Option<f64>,
    pub zeta_intra: f64,
    pub zeta_inter: f64,
    pub zeta_noise: f64,
    pub kappa_max_s: f64,
    pub kappa_min_f: f64,
    pub rho: f64,
}
