//! User ordering, power allocation, SIC rates and the OMA / fully-digital
//! baselines.

use crate::beamforming::{EffectiveChannel, HybridPrecoder};
use crate::channel::{Scenario, UserLink};
use crate::config::DecodingOrder;
use crate::error::{Error, Result};
use crate::numerics::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// P_n per cluster.
    pub cluster_power: Vec<f64>,
    /// P_{n,m} per cluster and user.
    pub user_power: Vec<Vec<f64>>,
}

/// Where one user sits in its cluster's SIC chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserSlot {
    pub cluster: usize,
    pub user: usize,
    /// Zero-based decoding position; 0 is the strongest user.
    pub position: usize,
    pub own_power: f64,
    /// Total power of the users decoded before this one (still interfering).
    pub ahead_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTerms {
    pub signal: f64,
    pub intra: f64,
    pub inter: f64,
    pub noise: f64,
    pub rate: f64,
    pub position: usize,
}

fn descending_order(keys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    // Stable sort keeps the original index order on ties.
    idx.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]));
    idx
}

/// Decoding permutation by descending effective-channel norm: `order[p]` is
/// the user decoded at position p.
pub fn order_users_by_effective(norms: &[f64]) -> Vec<usize> {
    descending_order(norms)
}

/// Decoding permutation by descending |β|.
pub fn order_users_by_gain(links: &[UserLink]) -> Vec<usize> {
    let mags: Vec<f64> = links.iter().map(|l| l.beta.norm()).collect();
    descending_order(&mags)
}

/// Inverse of a decoding permutation: position of every user.
pub fn positions(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; order.len()];
    for (p, &m) in order.iter().enumerate() {
        pos[m] = p;
    }
    pos
}

/// Decoding positions for every cluster under the chosen policy.
pub fn decoding_positions(scenario: &Scenario, norms: &[Vec<f64>], policy: DecodingOrder) -> Vec<Vec<usize>> {
    scenario
        .clusters
        .iter()
        .zip(norms)
        .map(|(cl, nm)| {
            let order = match policy {
                DecodingOrder::EffectiveNorm => order_users_by_effective(nm),
                DecodingOrder::Gain => order_users_by_gain(cl),
            };
            positions(&order)
        })
        .collect()
}

/// Cluster power proportional to the cluster's summed squared effective
/// norms, split equally inside the cluster.
pub fn allocate_power(norms: &[Vec<f64>], total_power: f64) -> Result<PowerAllocation> {
    if !(total_power > 0.0 && total_power.is_finite()) {
        return Err(Error::Config("total power must be positive".into()));
    }
    let sums: Vec<f64> = norms.iter().map(|n| n.iter().sum()).collect();
    let total: f64 = sums.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateScenario("all effective channels vanish".into()));
    }
    let cluster_power: Vec<f64> = sums.iter().map(|s| total_power * s / total).collect();
    let user_power = norms
        .iter()
        .zip(&cluster_power)
        .map(|(n, &p)| vec![p / n.len() as f64; n.len()])
        .collect();
    Ok(PowerAllocation {
        cluster_power,
        user_power,
    })
}

/// Builds the SIC slots for every user from powers and positions.
pub fn user_slots(alloc: &PowerAllocation, positions: &[Vec<usize>]) -> Vec<Vec<UserSlot>> {
    positions
        .iter()
        .enumerate()
        .map(|(n, pos)| {
            let powers = &alloc.user_power[n];
            (0..pos.len())
                .map(|m| {
                    let ahead_power = (0..pos.len())
                        .filter(|&k| pos[k] < pos[m])
                        .map(|k| powers[k])
                        .sum();
                    UserSlot {
                        cluster: n,
                        user: m,
                        position: pos[m],
                        own_power: powers[m],
                        ahead_power,
                    }
                })
                .collect()
        })
        .collect()
}

/// Exact SIC rate of one user whose effective channel is `h`.
pub fn exact_rate(h: &EffectiveChannel, slot: &UserSlot, precoder: &HybridPrecoder, alloc: &PowerAllocation, noise_var: f64) -> RateTerms {
    let n = slot.cluster;
    let mut own = 0.0;
    let mut inter = 0.0;
    for l in 0..precoder.n_clusters() {
        let g: f64 = (0..precoder.f_bb.rows())
            .map(|k| h.h[k].conj() * precoder.f_bb[(k, l)])
            .sum::<C64>()
            .norm_sqr();
        if l == n {
            own = g;
        } else {
            inter += alloc.cluster_power[l] * g;
        }
    }
    let signal = slot.own_power * own;
    let intra = slot.ahead_power * own;
    let rate = (signal / (intra + inter + noise_var)).log2_1p();
    RateTerms {
        signal,
        intra,
        inter,
        noise: noise_var,
        rate,
        position: slot.position,
    }
}

/// Single-user full-power rate `log2(1 + P N_BS N_U |β|² / σ²)`.
pub fn oma_rate(link: &UserLink, array_gain: f64, total_power: f64, noise_var: f64) -> f64 {
    (total_power * array_gain * link.beta.norm_sqr() / noise_var).log2_1p()
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}

/// Fully-digital NOMA rate with the same powers and positions: the aligned
/// closed form with no RF-induced noise amplification.
pub fn fully_digital_rate(link: &UserLink, slot: &UserSlot, array_gain: f64, noise_var: f64) -> f64 {
    let g = array_gain * link.beta.norm_sqr();
    (slot.own_power * g / (slot.ahead_power * g + noise_var)).log2_1p()
}

/// Fully-digital rates for every user of a scenario.
pub fn fully_digital_rates(scenario: &Scenario, slots: &[Vec<UserSlot>]) -> Vec<Vec<f64>> {
    let c2 = scenario.array_gain();
    scenario
        .clusters
        .iter()
        .zip(slots)
        .map(|(cl, sl)| {
            cl.iter()
                .zip(sl)
                .map(|(l, s)| fully_digital_rate(l, s, c2, scenario.noise_var))
                .collect()
        })
        .collect()
}
