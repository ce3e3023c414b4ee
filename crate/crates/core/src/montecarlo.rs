//! Monte Carlo experiment runner and the figure presets.
//!
//! Every trial draws a fresh scenario from `mix_seed(seed, trial)`; the same
//! trial seeds are reused across sweep cells and misalignment variants so
//! that cell-to-cell differences are not swamped by sampling noise. Trials
//! run in fixed-size blocks on the rayon pool and block sums are combined in
//! trial order, so results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::{build_hybrid_precoder, effective_channel, EffectiveChannel};
use crate::bounds::{
    fejer_sum, kappa_max_s, leakage_direction, misalignment_factor, model_effective_channel,
    theorem1_lower_bound, theorem2_lower_bound, theorem3_gap_bound, BoundReport, LeakageWeighting,
    MisalignmentModel,
};
use crate::channel::{mix_seed, synthesize_scenario, UserLink};
use crate::config::{ClusterConfig, DecodingOrder, GainProfile, ScenarioConfig};
use crate::error::{Error, Result};
use crate::noma::{
    allocate_power, decoding_positions, exact_rate, fully_digital_rate, oma_rate, user_slots,
    RateTerms, UserSlot,
};
use crate::numerics::{normalized, C64};

const BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    SnrDb(Vec<f64>),
    NBs(Vec<usize>),
    /// Resizes one cluster; its gain profile must be `step` or `span`.
    ClusterSize { cluster: usize, sizes: Vec<usize> },
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::SnrDb(_) => "snr_db",
            Sweep::NBs(_) => "n_bs",
            Sweep::ClusterSize { .. } => "cluster_size",
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::SnrDb(v) => v.clone(),
            Sweep::NBs(v) => v.iter().map(|&x| x as f64).collect(),
            Sweep::ClusterSize { sizes, .. } => sizes.iter().map(|&x| x as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::SnrDb(v) => v.len(),
            Sweep::NBs(v) => v.len(),
            Sweep::ClusterSize { sizes, .. } => sizes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baselines {
    #[serde(default = "yes")]
    pub hb_exact: bool,
    #[serde(default = "yes")]
    pub hb_lb: bool,
    #[serde(default)]
    pub fd: bool,
    #[serde(default)]
    pub oma: bool,
    /// Also evaluate each user on its model-generated effective channel.
    #[serde(default)]
    pub model_channels: bool,
}

impl Default for Baselines {
    fn default() -> Self {
        Baselines {
            hb_exact: true,
            hb_lb: true,
            fd: false,
            oma: false,
            model_channels: false,
        }
    }
}

fn default_trials() -> usize {
    10_000
}
fn default_snr() -> f64 {
    15.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub scenario: ScenarioConfig,
    pub sweep: Sweep,
    /// SNR used when the sweep axis is not SNR.
    #[serde(default = "default_snr")]
    pub snr_db: f64,
    /// Misalignment half-widths to run; empty means the scenario's own value.
    #[serde(default)]
    pub misalignment_variants: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub baselines: Baselines,
    /// Cluster the figure reports on (zero-based). All clusters are emitted.
    #[serde(default)]
    pub observe_cluster: Option<usize>,
}

/// One (misalignment, sweep value) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub scenario_id: String,
    pub misalignment_deg: f64,
    pub sweep_value: f64,
    pub scenario: ScenarioConfig,
    pub total_power: f64,
}

impl ExperimentSpec {
    pub fn variants(&self) -> Vec<f64> {
        if self.misalignment_variants.is_empty() {
            vec![self.scenario.misalignment_deg]
        } else {
            self.misalignment_variants.clone()
        }
    }

    pub fn cells(&self) -> Result<Vec<Cell>> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(Error::Config("sweep must not be empty".into()));
        }
        if let Some(c) = self.observe_cluster {
            if c >= self.scenario.clusters.len() {
                return Err(Error::Config(format!("observe_cluster {c} out of range")));
            }
        }
        let mut out = Vec::new();
        for b in self.variants() {
            for (i, v) in self.sweep.values().into_iter().enumerate() {
                let mut cfg = self.scenario.clone();
                cfg.misalignment_deg = b;
                let mut snr = self.snr_db;
                match &self.sweep {
                    Sweep::SnrDb(_) => snr = v,
                    Sweep::NBs(n) => cfg.n_bs = n[i],
                    Sweep::ClusterSize { cluster, sizes } => {
                        let cl = cfg
                            .clusters
                            .get_mut(*cluster)
                            .ok_or_else(|| Error::Config(format!("sweep cluster {cluster} out of range")))?;
                        cl.gains = cl.gains.with_users(sizes[i])?;
                    }
                }
                if !snr.is_finite() {
                    return Err(Error::Config("snr_db must be finite".into()));
                }
                cfg.validate()?;
                out.push(Cell {
                    scenario_id: format!("{}/b={}", self.name, b),
                    misalignment_deg: b,
                    sweep_value: v,
                    total_power: cfg.noise_var * 10f64.powf(snr / 10.0),
                    scenario: cfg,
                });
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.cells().map(|_| ())
    }
}

/// Per-user outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct UserOutcome {
    pub link: UserLink,
    pub slot: UserSlot,
    pub terms: RateTerms,
    pub bounds: BoundReport,
    /// Exact rate of the same user placed at its cluster AoD, same slot.
    pub rate_aligned: f64,
    pub rate_fd: f64,
    pub rate_oma: f64,
    /// Exact rate on the model-generated channel, if requested.
    pub rate_model: Option<f64>,
}

impl UserOutcome {
    pub fn rate_gap(&self) -> f64 {
        self.rate_aligned - self.terms.rate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub users: Vec<Vec<UserOutcome>>,
    pub cluster_power: Vec<f64>,
}

/// Full pipeline for one draw: synthesize, precode, allocate, rates, bounds.
pub fn evaluate_trial(cfg: &ScenarioConfig, total_power: f64, seed: u64, baselines: &Baselines) -> Result<TrialOutcome> {
    let s = synthesize_scenario(cfg, total_power, seed)?;
    let p = build_hybrid_precoder(&s)?;
    let eff: Vec<Vec<EffectiveChannel>> = s
        .clusters
        .iter()
        .map(|cl| cl.iter().map(|l| effective_channel(l, &p.f_rf, &s.ula_bs, &s.ula_ue)).collect())
        .collect();
    let norms: Vec<Vec<f64>> = eff.iter().map(|c| c.iter().map(|h| h.norm_sq).collect()).collect();
    let alloc = allocate_power(&norms, total_power)?;
    let pos = decoding_positions(&s, &norms, cfg.decoding_order);
    let slots = user_slots(&alloc, &pos);

    let n_bs = s.ula_bs.n_elements;
    let c2 = s.array_gain();
    let sigma2 = s.noise_var;
    let kappa_min = p.kappa_min();
    if !(kappa_min > 0.0) {
        return Err(Error::DegenerateScenario("RF Gram is not positive definite".into()));
    }
    let first_links: Vec<&UserLink> = s
        .clusters
        .iter()
        .zip(&p.first_users)
        .map(|(cl, &f)| &cl[f])
        .collect();
    let first_phis: Vec<f64> = first_links.iter().map(|l| l.phi_norm).collect();

    let mut users = Vec::with_capacity(s.n_clusters());
    for n in 0..s.n_clusters() {
        let f = p.first_users[n];
        let h_first = &eff[n][f];
        let beta_first = s.clusters[n][f].beta;
        let k_first = fejer_sum(first_phis[n], &first_phis, n_bs);
        let kappa_s = kappa_max_s(&p.f_bb, &alloc.cluster_power, n)?;
        let model_basis = if baselines.model_channels {
            let h_hat = normalized(&h_first.h)?;
            let g = if s.n_clusters() > 1 {
                leakage_direction(
                    &p.f_rf,
                    &first_links,
                    &alloc.cluster_power,
                    n,
                    LeakageWeighting::PowerWeighted,
                    c2,
                )?
            } else {
                vec![C64::new(0.0, 0.0); h_hat.len()]
            };
            Some((h_hat, g))
        } else {
            None
        };
        let mut row = Vec::with_capacity(s.clusters[n].len());
        for (m, link) in s.clusters[n].iter().enumerate() {
            let h = &eff[n][m];
            let slot = slots[n][m];
            let gain = c2 * link.beta.norm_sqr();
            let terms = exact_rate(h, &slot, &p, &alloc, sigma2);
            let rho = misalignment_factor(&h.h, &h_first.h)?;
            let k_user = fejer_sum(link.phi_norm, &first_phis, n_bs);
            let model = MisalignmentModel {
                rho,
                leak_dir: model_basis.as_ref().map(|b| b.1.clone()).unwrap_or_default(),
                k_sum_first: k_first,
                k_sum_user: k_user,
            };
            let t2 = theorem2_lower_bound(&slot, gain, &model, kappa_s, kappa_min, sigma2);
            let bounds = BoundReport {
                lb_thm1: theorem1_lower_bound(&slot, gain, kappa_min, sigma2),
                lb_thm2: t2.lb,
                gap_ub_thm3: theorem3_gap_bound(&slot, gain, rho, kappa_s, kappa_min, k_first, k_user, sigma2),
                zeta_intra: t2.zeta_intra,
                zeta_inter: t2.zeta_inter,
                zeta_noise: t2.zeta_noise,
                kappa_max_s: kappa_s,
                kappa_min_f: kappa_min,
                rho,
            };
            let ratio = link.beta.conj() / beta_first.conj();
            let aligned = EffectiveChannel::new(h_first.h.iter().map(|z| z * ratio).collect());
            let rate_aligned = exact_rate(&aligned, &slot, &p, &alloc, sigma2).rate;
            let rate_model = model_basis.as_ref().map(|(h_hat, g)| {
                let dir = model_effective_channel(rho, h_hat, g);
                let scale = h.norm_sq.sqrt();
                let hm = EffectiveChannel::new(dir.into_iter().map(|z| z * scale).collect());
                exact_rate(&hm, &slot, &p, &alloc, sigma2).rate
            });
            row.push(UserOutcome {
                link: link.clone(),
                slot,
                terms,
                bounds,
                rate_aligned,
                rate_fd: fully_digital_rate(link, &slot, c2, sigma2),
                rate_oma: oma_rate(link, c2, total_power, sigma2),
                rate_model,
            });
        }
        users.push(row);
    }
    Ok(TrialOutcome {
        users,
        cluster_power: alloc.cluster_power,
    })
}

/// Seed of trial `t` in an experiment seeded with `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    mix_seed(seed, trial as u64)
}

#[derive(Debug, Clone, Default, PartialEq)]
struct UserStats {
    n: usize,
    exact: f64,
    exact_sq: f64,
    lb1: f64,
    lb2: f64,
    gap: f64,
    gap_ub: f64,
    n_gap_ub: usize,
    rho: f64,
    aligned: f64,
    fd: f64,
    oma: f64,
    model: f64,
    model_gap: f64,
    n_model: usize,
}

impl UserStats {
    fn push(&mut self, u: &UserOutcome) {
        self.n += 1;
        self.exact += u.terms.rate;
        self.exact_sq += u.terms.rate * u.terms.rate;
        self.lb1 += u.bounds.lb_thm1;
        self.lb2 += u.bounds.lb_thm2;
        self.gap += u.rate_gap();
        if let Some(g) = u.bounds.gap_ub_thm3 {
            self.gap_ub += g;
            self.n_gap_ub += 1;
        }
        self.rho += u.bounds.rho;
        self.aligned += u.rate_aligned;
        self.fd += u.rate_fd;
        self.oma += u.rate_oma;
        if let Some(r) = u.rate_model {
            self.model += r;
            self.model_gap += u.rate_aligned - r;
            self.n_model += 1;
        }
    }

    fn merge(&mut self, o: &UserStats) {
        self.n += o.n;
        self.exact += o.exact;
        self.exact_sq += o.exact_sq;
        self.lb1 += o.lb1;
        self.lb2 += o.lb2;
        self.gap += o.gap;
        self.gap_ub += o.gap_ub;
        self.n_gap_ub += o.n_gap_ub;
        self.rho += o.rho;
        self.aligned += o.aligned;
        self.fd += o.fd;
        self.oma += o.oma;
        self.model += o.model;
        self.model_gap += o.model_gap;
        self.n_model += o.n_model;
    }
}

#[derive(Debug, Clone, Default)]
struct BlockStats {
    users: Vec<Vec<UserStats>>,
    used: usize,
    excluded: usize,
    first_error: Option<(usize, Error)>,
}

impl BlockStats {
    fn new(shape: &[usize]) -> Self {
        BlockStats {
            users: shape.iter().map(|&m| vec![UserStats::default(); m]).collect(),
            ..Default::default()
        }
    }

    fn merge(&mut self, o: BlockStats) {
        for (a, b) in self.users.iter_mut().flatten().zip(o.users.iter().flatten()) {
            a.merge(b);
        }
        self.used += o.used;
        self.excluded += o.excluded;
        if self.first_error.is_none() {
            self.first_error = o.first_error;
        }
    }
}

/// One averaged (cell, user) entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario_id: String,
    pub sweep_name: String,
    pub sweep_value: f64,
    /// Zero-based cluster index.
    pub cluster: usize,
    /// Zero-based user index within the cluster, in configured order.
    pub user: usize,
    pub rate_exact: f64,
    pub rate_lb_thm1: f64,
    pub rate_lb_thm2: f64,
    pub rate_gap: f64,
    /// NaN when the bound is not applicable (strongest decoding position).
    pub gap_ub_thm3: f64,
    pub rho_mean: f64,
    /// Standard error of `rate_exact`.
    pub stderr: f64,
    pub trials: usize,
    pub rate_aligned: f64,
    pub rate_fd: f64,
    pub rate_oma: f64,
    /// NaN unless model channels were requested.
    pub rate_model: f64,
    pub gap_model: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub scenario_id: String,
    pub misalignment_deg: f64,
    pub sweep_value: f64,
    pub trials_requested: usize,
    pub trials_used: usize,
    pub excluded: usize,
}

impl CellSummary {
    pub fn exclusion_rate(&self) -> f64 {
        let total = self.trials_used + self.excluded;
        if total == 0 {
            0.0
        } else {
            self.excluded as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRateRow {
    pub sweep_value: f64,
    pub system: String,
    pub sum_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub sweep_name: String,
    pub rows: Vec<ResultRow>,
    pub cells: Vec<CellSummary>,
    /// Filled when the FD or OMA baselines are requested.
    pub sum_rates: Vec<SumRateRow>,
}

impl ResultTable {
    pub fn row(&self, scenario_id: &str, sweep_value: f64, cluster: usize, user: usize) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.scenario_id == scenario_id && r.sweep_value == sweep_value && r.cluster == cluster && r.user == user
        })
    }

    pub fn sum_rate(&self, system: &str, sweep_value: f64) -> Option<f64> {
        self.sum_rates
            .iter()
            .find(|r| r.system == system && r.sweep_value == sweep_value)
            .map(|r| r.sum_rate)
    }
}

fn needs_sampling(cfg: &ScenarioConfig) -> bool {
    // With b = 0 and deterministic gains the only random draw is the AoA,
    // which never reaches a rate.
    cfg.misalignment_deg > 0.0 || cfg.clusters.iter().any(|c| c.gains.has_random_phase())
}

fn effective_trials(spec: &ExperimentSpec, cell: &Cell) -> usize {
    if needs_sampling(&cell.scenario) {
        spec.trials
    } else {
        1
    }
}

fn run_cell(spec: &ExperimentSpec, cell: &Cell) -> Result<BlockStats> {
    let trials = effective_trials(spec, cell);
    let shape: Vec<usize> = cell.scenario.clusters.iter().map(|c| c.gains.users()).collect();
    let blocks = trials.div_ceil(BLOCK);
    let parts: Vec<Result<BlockStats>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = BlockStats::new(&shape);
            for t in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                match evaluate_trial(&cell.scenario, cell.total_power, trial_seed(spec.seed, t), &spec.baselines) {
                    Ok(out) => {
                        for (a, u) in acc.users.iter_mut().flatten().zip(out.users.iter().flatten()) {
                            a.push(u);
                        }
                        acc.used += 1;
                    }
                    Err(e) if e.is_config() => {
                        return Err(Error::Trial {
                            trial: t,
                            source: Box::new(e),
                        })
                    }
                    Err(e) => {
                        acc.excluded += 1;
                        if acc.first_error.is_none() {
                            acc.first_error = Some((t, e));
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = BlockStats::new(&shape);
    for part in parts {
        total.merge(part?);
    }
    if total.used == 0 {
        let (trial, e) = total
            .first_error
            .clone()
            .unwrap_or((0, Error::DegenerateScenario("no trials".into())));
        return Err(Error::Trial {
            trial,
            source: Box::new(e),
        });
    }
    Ok(total)
}

/// Runs every cell of the experiment on the current rayon pool.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    let cells = spec.cells()?;
    let sweep_name = spec.sweep.name().to_string();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut per_cell = Vec::new();
    for cell in &cells {
        let stats = run_cell(spec, cell)?;
        summaries.push(CellSummary {
            scenario_id: cell.scenario_id.clone(),
            misalignment_deg: cell.misalignment_deg,
            sweep_value: cell.sweep_value,
            trials_requested: spec.trials,
            trials_used: stats.used,
            excluded: stats.excluded,
        });
        let mut cell_rows = Vec::new();
        for (n, cl) in stats.users.iter().enumerate() {
            for (m, u) in cl.iter().enumerate() {
                let k = u.n as f64;
                let mean = u.exact / k;
                let var = if u.n > 1 {
                    ((u.exact_sq - k * mean * mean) / (k - 1.0)).max(0.0)
                } else {
                    0.0
                };
                let nan_unless = |count: usize, sum: f64| if count > 0 { sum / count as f64 } else { f64::NAN };
                cell_rows.push(ResultRow {
                    scenario_id: cell.scenario_id.clone(),
                    sweep_name: sweep_name.clone(),
                    sweep_value: cell.sweep_value,
                    cluster: n,
                    user: m,
                    rate_exact: mean,
                    rate_lb_thm1: u.lb1 / k,
                    rate_lb_thm2: u.lb2 / k,
                    rate_gap: u.gap / k,
                    gap_ub_thm3: nan_unless(u.n_gap_ub, u.gap_ub),
                    rho_mean: u.rho / k,
                    stderr: (var / k).sqrt(),
                    trials: u.n,
                    rate_aligned: u.aligned / k,
                    rate_fd: u.fd / k,
                    rate_oma: u.oma / k,
                    rate_model: nan_unless(u.n_model, u.model),
                    gap_model: nan_unless(u.n_model, u.model_gap),
                });
            }
        }
        per_cell.push(cell_rows.clone());
        rows.extend(cell_rows);
    }
    let sum_rates = if spec.baselines.fd || spec.baselines.oma {
        sum_rate_rows(spec, &cells, &per_cell)
    } else {
        Vec::new()
    };
    Ok(ResultTable {
        sweep_name,
        rows,
        cells: summaries,
        sum_rates,
    })
}

fn sum_rate_rows(spec: &ExperimentSpec, cells: &[Cell], per_cell: &[Vec<ResultRow>]) -> Vec<SumRateRow> {
    let values = spec.sweep.values();
    let variants = spec.variants();
    let mut out = Vec::new();
    for &v in &values {
        let in_cell = |b: f64| {
            cells
                .iter()
                .position(|c| c.sweep_value == v && c.misalignment_deg == b)
                .map(|i| &per_cell[i])
        };
        let Some(first) = in_cell(variants[0]) else {
            continue;
        };
        if spec.baselines.fd {
            out.push(SumRateRow {
                sweep_value: v,
                system: "FD-NOMA".into(),
                sum_rate: first.iter().map(|r| r.rate_fd).sum(),
            });
        }
        for &b in &variants {
            if let Some(rows) = in_cell(b) {
                out.push(SumRateRow {
                    sweep_value: v,
                    system: format!("HB-NOMA(b={b})"),
                    sum_rate: rows.iter().map(|r| r.rate_exact).sum(),
                });
            }
        }
        if spec.baselines.oma {
            out.push(SumRateRow {
                sweep_value: v,
                system: "OMA".into(),
                sum_rate: first.iter().map(|r| r.rate_oma).sum::<f64>() / first.len() as f64,
            });
        }
    }
    out
}

/// Runs the experiment on a dedicated pool with `threads` workers.
pub fn run_experiment_with_threads(spec: &ExperimentSpec, threads: usize) -> Result<ResultTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(spec))
}

/// Applies `f` to every successful trial of one cell, in trial order.
/// Trials with numerical errors are skipped.
pub fn map_trials<T, F>(spec: &ExperimentSpec, cell: &Cell, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, TrialOutcome) -> T + Sync,
{
    let trials = effective_trials(spec, cell);
    let out: Vec<Result<Option<T>>> = (0..trials)
        .into_par_iter()
        .map(
            |t| match evaluate_trial(&cell.scenario, cell.total_power, trial_seed(spec.seed, t), &spec.baselines) {
                Ok(o) => Ok(Some(f(t, o))),
                Err(e) if e.is_config() => Err(Error::Trial {
                    trial: t,
                    source: Box::new(e),
                }),
                Err(_) => Ok(None),
            },
        )
        .collect();
    out.into_iter().filter_map(|r| r.transpose()).collect()
}

/// Per-trial outcomes of one user in one cell, excluded trials omitted.
pub fn user_samples(spec: &ExperimentSpec, cell: &Cell, cluster: usize, user: usize) -> Result<Vec<UserOutcome>> {
    map_trials(spec, cell, |_, mut o| o.users[cluster].swap_remove(user))
}

pub const PRESETS: [&str; 7] = ["fig3a", "fig3b", "fig4a", "fig4b", "fig4c", "fig4d", "fig5"];

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|i| from + step * i as f64).collect()
}

fn fig3_scenario() -> ScenarioConfig {
    ScenarioConfig {
        n_bs: 32,
        n_u: 8,
        n_rf: None,
        spacing_over_wavelength: 0.5,
        clusters: [30.0, 60.0]
            .iter()
            .map(|&aod_deg| ClusterConfig {
                aod_deg,
                gains: GainProfile::Db(vec![0.0, -2.0]),
            })
            .collect(),
        misalignment_deg: 0.0,
        decoding_order: DecodingOrder::Gain,
        noise_var: 1.0,
    }
}

fn fig4_scenario(observed: usize, others: usize) -> ScenarioConfig {
    ScenarioConfig {
        n_bs: 32,
        n_u: 8,
        n_rf: Some(5),
        spacing_over_wavelength: 0.5,
        clusters: [10.0, 30.0, 50.0, 65.0, 80.0]
            .iter()
            .enumerate()
            .map(|(n, &aod_deg)| ClusterConfig {
                aod_deg,
                gains: GainProfile::Step {
                    users: if n == 2 { observed } else { others },
                    first_db: 0.0,
                    step_db: -1.0,
                },
            })
            .collect(),
        misalignment_deg: 3.0,
        decoding_order: DecodingOrder::Gain,
        noise_var: 1.0,
    }
}

fn fig5_scenario() -> ScenarioConfig {
    ScenarioConfig {
        n_bs: 32,
        n_u: 8,
        n_rf: Some(8),
        spacing_over_wavelength: 0.5,
        clusters: (0..8)
            .map(|n| ClusterConfig {
                aod_deg: 10.0 * (n + 1) as f64,
                gains: GainProfile::Span {
                    users: 4 + 2 * n,
                    first_db: 0.0,
                    span_db: 18.0,
                },
            })
            .collect(),
        misalignment_deg: 0.0,
        decoding_order: DecodingOrder::Gain,
        noise_var: 1.0,
    }
}

/// Built-in experiment for one of the figure setups.
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let fd_only = Baselines {
        fd: true,
        ..Baselines::default()
    };
    let spec = match name {
        "fig3a" => ExperimentSpec {
            name: name.into(),
            scenario: fig3_scenario(),
            sweep: Sweep::SnrDb(grid(0.0, 30.0, 5.0)),
            snr_db: 15.0,
            misalignment_variants: vec![],
            trials: 1,
            seed: 1,
            baselines: fd_only,
            observe_cluster: Some(0),
        },
        "fig3b" => ExperimentSpec {
            name: name.into(),
            scenario: fig3_scenario(),
            sweep: Sweep::NBs((1..=8).map(|k| 16 * k).collect()),
            snr_db: 10.0,
            misalignment_variants: vec![],
            trials: 1,
            seed: 1,
            baselines: fd_only,
            observe_cluster: Some(0),
        },
        "fig4a" => ExperimentSpec {
            name: name.into(),
            scenario: fig4_scenario(10, 5),
            sweep: Sweep::SnrDb(grid(0.0, 30.0, 5.0)),
            snr_db: 15.0,
            misalignment_variants: vec![3.0],
            trials: 10_000,
            seed: 1,
            baselines: Baselines::default(),
            observe_cluster: Some(2),
        },
        "fig4b" => ExperimentSpec {
            name: name.into(),
            scenario: fig4_scenario(10, 15),
            sweep: Sweep::SnrDb(vec![15.0]),
            snr_db: 15.0,
            misalignment_variants: vec![3.0],
            trials: 10_000,
            seed: 1,
            baselines: Baselines::default(),
            observe_cluster: Some(2),
        },
        "fig4c" => ExperimentSpec {
            name: name.into(),
            scenario: fig4_scenario(10, 15),
            sweep: Sweep::ClusterSize {
                cluster: 2,
                sizes: (1..=7).map(|k| 5 * k).collect(),
            },
            snr_db: 15.0,
            misalignment_variants: vec![3.0, 6.0],
            trials: 10_000,
            seed: 1,
            baselines: Baselines::default(),
            observe_cluster: Some(2),
        },
        "fig4d" => ExperimentSpec {
            name: name.into(),
            scenario: fig4_scenario(10, 15),
            sweep: Sweep::SnrDb(vec![30.0]),
            snr_db: 30.0,
            misalignment_variants: vec![3.0, 6.0],
            trials: 10_000,
            seed: 1,
            baselines: Baselines::default(),
            observe_cluster: Some(2),
        },
        "fig5" => ExperimentSpec {
            name: name.into(),
            scenario: fig5_scenario(),
            sweep: Sweep::SnrDb(grid(0.0, 30.0, 5.0)),
            snr_db: 15.0,
            misalignment_variants: vec![0.0, 2.0, 6.0],
            trials: 10_000,
            seed: 1,
            baselines: Baselines {
                fd: true,
                oma: true,
                ..Baselines::default()
            },
            observe_cluster: None,
        },
        other => return Err(Error::UnknownPreset(other.into())),
    };
    Ok(spec)
}
