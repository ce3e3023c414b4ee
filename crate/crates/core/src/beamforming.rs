//! Three-step hybrid precoder: RF steering toward first users, per-user
//! combiners and a zero-forcing baseband stage with per-column power scaling.

use crate::channel::{single_path_channel, steering_unchecked, steering_vector, strongest, Scenario, UlaConfig, UserLink};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, hermitian_solve, inner, norm_sq, CMatrix, C64};

/// Condition estimate above which the ZF Gram is treated as singular.
pub const ZF_CONDITION_LIMIT: f64 = 1e10;

#[derive(Debug, Clone, PartialEq)]
pub struct HybridPrecoder {
    /// N_BS × N analog precoder, column n steers toward cluster n's first user.
    pub f_rf: CMatrix,
    /// N × N zero-forcing baseband precoder.
    pub f_bb: CMatrix,
    /// Diagonal of Γ.
    pub gamma: Vec<f64>,
    /// F = F_RF† F_RF.
    pub gram: CMatrix,
    /// Eigenvalues of F, ascending.
    pub gram_eigs: Vec<f64>,
    pub first_users: Vec<usize>,
}

impl HybridPrecoder {
    pub fn n_clusters(&self) -> usize {
        self.f_bb.cols()
    }

    pub fn kappa_min(&self) -> f64 {
        self.gram_eigs[0]
    }

    /// Baseband column f^ℓ.
    pub fn bb_column(&self, l: usize) -> Vec<C64> {
        self.f_bb.column(l)
    }
}

/// Effective channel of one user. `h` is stored as a column vector so that
/// the scalar seen through baseband column f is `h† f`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub h: Vec<C64>,
    pub norm_sq: f64,
}

impl EffectiveChannel {
    pub fn new(h: Vec<C64>) -> Self {
        let norm_sq = norm_sq(&h);
        EffectiveChannel { h, norm_sq }
    }

    /// `h† f`.
    pub fn project(&self, f: &[C64]) -> C64 {
        inner(&self.h, f)
    }
}

/// Index of the largest |β| in every cluster, lowest index on ties.
pub fn select_first_users(scenario: &Scenario) -> Vec<usize> {
    scenario
        .clusters
        .iter()
        .map(|cl| {
            let mags: Vec<f64> = cl.iter().map(|l| l.beta.norm()).collect();
            strongest(&mags)
        })
        .collect()
}

pub fn build_rf_precoder(scenario: &Scenario, first_users: &[usize]) -> Result<CMatrix> {
    if scenario.n_clusters() > scenario.n_rf {
        return Err(Error::Config(format!(
            "{} clusters exceed {} RF chains",
            scenario.n_clusters(),
            scenario.n_rf
        )));
    }
    let columns = scenario
        .clusters
        .iter()
        .zip(first_users)
        .map(|(cl, &f)| steering_vector(cl[f].phi_norm, &scenario.ula_bs))
        .collect::<Result<Vec<_>>>()?;
    CMatrix::from_columns(&columns)
}

/// `w = a_U(θ)`.
pub fn build_combiner(link: &UserLink, ula_ue: &UlaConfig) -> Result<Vec<C64>> {
    steering_vector(link.theta_norm, ula_ue)
}

/// `h† = √(N_BS N_U) β a_BS†(φ) F_RF`, using `|w† a_U| = 1`.
pub fn effective_channel(link: &UserLink, f_rf: &CMatrix, ula_bs: &UlaConfig, ula_ue: &UlaConfig) -> EffectiveChannel {
    let c = ((ula_bs.n_elements * ula_ue.n_elements) as f64).sqrt();
    let a = steering_unchecked(link.phi_norm, ula_bs.n_elements);
    let scale = link.beta.conj() * c;
    let h = (0..f_rf.cols())
        .map(|l| {
            let s: C64 = (0..f_rf.rows()).map(|k| f_rf[(k, l)].conj() * a[k]).sum();
            scale * s
        })
        .collect();
    EffectiveChannel::new(h)
}

/// Reference path: forms `w† H F_RF` explicitly.
pub fn effective_channel_full(link: &UserLink, f_rf: &CMatrix, ula_bs: &UlaConfig, ula_ue: &UlaConfig) -> Result<EffectiveChannel> {
    let w = build_combiner(link, ula_ue)?;
    let h = single_path_channel(link, ula_bs, ula_ue)?;
    // Row vector w† H F_RF; its conjugate is the column form.
    let row = h.adjoint_mul_vec(&w)?;
    let row: Vec<C64> = row.iter().map(|z| z.conj()).collect();
    let out = (0..f_rf.cols())
        .map(|l| {
            let s: C64 = (0..f_rf.rows()).map(|k| row[k] * f_rf[(k, l)]).sum();
            s.conj()
        })
        .collect();
    Ok(EffectiveChannel::new(out))
}

/// ZF baseband `F_BB = H̄†(H̄H̄†)⁻¹Γ` with `Γ_nn = √(N_BS N_U)|β_{n,1}| / √((F⁻¹)_nn)`.
pub fn build_zf_baseband(
    eff_first: &[EffectiveChannel],
    gram: &CMatrix,
    betas_first: &[C64],
    array_gain: f64,
) -> Result<(CMatrix, Vec<f64>)> {
    let n = eff_first.len();
    if gram.rows() != n || betas_first.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} first users, {}x{} Gram, {} gains",
            gram.rows(),
            gram.cols(),
            betas_first.len()
        )));
    }
    // H̄ has rows h̄†; with column-stored h this is H̄[r][c] = conj(h_r[c]).
    let hbar = CMatrix::from_fn(n, n, |r, c| eff_first[r].h[c].conj());
    let g = hbar.matmul(&hbar.adjoint())?;
    let eig = hermitian_eig(&g)?;
    let condition = eig.max() / eig.min().max(f64::MIN_POSITIVE);
    if !(condition <= ZF_CONDITION_LIMIT) {
        let (a, b) = most_collinear_pair(gram);
        return Err(Error::IllConditioned { a, b, condition });
    }
    let f_inv = hermitian_solve(gram, &CMatrix::identity(n))?;
    let c = array_gain.sqrt();
    let gamma: Vec<f64> = (0..n)
        .map(|i| c * betas_first[i].norm() / f_inv[(i, i)].re.sqrt())
        .collect();
    let x = hermitian_solve(&g, &CMatrix::diagonal(&gamma))?;
    let f_bb = hbar.adjoint().matmul(&x)?;
    Ok((f_bb, gamma))
}

fn most_collinear_pair(gram: &CMatrix) -> (usize, usize) {
    let mut best = (0, 0, -1.0);
    for r in 0..gram.rows() {
        for c in r + 1..gram.cols() {
            let v = gram[(r, c)].norm();
            if v > best.2 {
                best = (r, c, v);
            }
        }
    }
    (best.0, best.1)
}

/// Runs the full precoder design for a scenario.
pub fn build_hybrid_precoder(scenario: &Scenario) -> Result<HybridPrecoder> {
    let first_users = select_first_users(scenario);
    let f_rf = build_rf_precoder(scenario, &first_users)?;
    let gram = f_rf.adjoint().matmul(&f_rf)?;
    let gram_eigs = hermitian_eig(&gram)?.values;
    let firsts: Vec<&UserLink> = scenario
        .clusters
        .iter()
        .zip(&first_users)
        .map(|(cl, &f)| &cl[f])
        .collect();
    let eff_first: Vec<EffectiveChannel> = firsts
        .iter()
        .map(|l| effective_channel(l, &f_rf, &scenario.ula_bs, &scenario.ula_ue))
        .collect();
    let betas: Vec<C64> = firsts.iter().map(|l| l.beta).collect();
    let (f_bb, gamma) = build_zf_baseband(&eff_first, &gram, &betas, scenario.array_gain())?;
    Ok(HybridPrecoder {
        f_rf,
        f_bb,
        gamma,
        gram,
        gram_eigs,
        first_users,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{beam_collinearity, fejer};

    fn link(n: usize, m: usize, beta_db: f64, aod_deg: f64) -> UserLink {
        UserLink {
            cluster: n,
            user: m,
            beta: C64::new(10f64.powf(beta_db / 20.0), 0.0),
            aod_deg,
            aoa_deg: 17.0,
            phi_norm: aod_deg.to_radians().sin(),
            theta_norm: 17f64.to_radians().sin(),
        }
    }

    fn scenario(clusters: Vec<Vec<UserLink>>, n_bs: usize) -> Scenario {
        Scenario {
            ula_bs: UlaConfig::new(n_bs),
            ula_ue: UlaConfig::new(8),
            n_rf: clusters.len(),
            clusters,
            total_power: 10.0,
            noise_var: 1.0,
        }
    }

    fn fig4() -> Scenario {
        let aods = [10.0, 30.0, 50.0, 65.0, 80.0];
        scenario(
            aods.iter()
                .enumerate()
                .map(|(n, &a)| (0..5).map(|m| link(n, m, -(m as f64), a)).collect())
                .collect(),
            32,
        )
    }

    #[test]
    fn first_user_selection() {
        let s = fig4();
        assert_eq!(select_first_users(&s), vec![0; 5]);
        let eq = scenario(vec![vec![link(0, 0, -1.0, 10.0), link(0, 1, -1.0, 10.0)]], 32);
        assert_eq!(select_first_users(&eq), vec![0]);
        let gains = [-4.0, -0.5, -7.0, -0.2, -3.0, -0.2];
        let sh = scenario(
            vec![gains.iter().enumerate().map(|(m, &g)| link(0, m, g, 20.0)).collect()],
            32,
        );
        let scan = (0..gains.len()).fold(0, |b, m| if gains[m] > gains[b] { m } else { b });
        assert_eq!(select_first_users(&sh), vec![scan]);
    }

    #[test]
    fn rf_precoder_examples() {
        let s = scenario(vec![vec![link(0, 0, 0.0, 20.0)]], 32);
        let f = build_rf_precoder(&s, &[0]).unwrap();
        let g = f.adjoint().matmul(&f).unwrap();
        assert!((g[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-12);

        // Normalized angles 0 and 2/N_BS are orthogonal.
        let mut a = link(0, 0, 0.0, 0.0);
        let mut b = link(1, 0, 0.0, 0.0);
        a.phi_norm = 0.0;
        b.phi_norm = 2.0 / 16.0;
        let s = scenario(vec![vec![a], vec![b]], 16);
        let f = build_rf_precoder(&s, &[0, 0]).unwrap();
        let g = f.adjoint().matmul(&f).unwrap();
        assert!(g[(0, 1)].norm() < 1e-12);

        let s = fig4();
        let f = build_rf_precoder(&s, &[0; 5]).unwrap();
        assert_eq!((f.rows(), f.cols()), (32, 5));
        assert!(f.as_slice().iter().all(|z| (z.norm_sqr() - 1.0 / 32.0).abs() < 1e-12));
        let g = f.adjoint().matmul(&f).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                let k = beam_collinearity(s.clusters[r][0].phi_norm, s.clusters[c][0].phi_norm, &s.ula_bs)
                    .unwrap();
                assert!((g[(r, c)].norm_sqr() - k).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn combiner_examples() {
        let l = link(0, 0, 0.0, 0.0);
        let w = build_combiner(&l, &UlaConfig::new(1)).unwrap();
        assert!((w[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let mut l0 = l.clone();
        l0.theta_norm = 0.0;
        let w = build_combiner(&l0, &UlaConfig::new(8)).unwrap();
        assert!(w.iter().all(|z| (z - C64::new(8f64.powf(-0.5), 0.0)).norm() < 1e-15));
        let ula = UlaConfig::new(8);
        let w = build_combiner(&l, &ula).unwrap();
        let a = steering_vector(l.theta_norm, &ula).unwrap();
        assert!((inner(&w, &a).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn effective_channel_examples() {
        let s = scenario(vec![vec![link(0, 0, 0.0, 25.0)]], 32);
        let f = build_rf_precoder(&s, &[0]).unwrap();
        let h = effective_channel(&s.clusters[0][0], &f, &s.ula_bs, &s.ula_ue);
        assert!((h.h[0].norm() - 16.0).abs() < 1e-12);

        let s = fig4();
        let f = build_rf_precoder(&s, &[0; 5]).unwrap();
        let h1 = effective_channel(&s.clusters[2][0], &f, &s.ula_bs, &s.ula_ue);
        let h3 = effective_channel(&s.clusters[2][3], &f, &s.ula_bs, &s.ula_ue);
        let ratio = s.clusters[2][3].beta / s.clusters[2][0].beta;
        for (a, b) in h3.h.iter().zip(&h1.h) {
            assert!((a - ratio.conj() * b).norm() < 1e-12);
        }

        let mut mis = s.clusters[2][3].clone();
        mis.aod_deg = 52.3;
        mis.phi_norm = 52.3f64.to_radians().sin();
        let h = effective_channel(&mis, &f, &s.ula_bs, &s.ula_ue);
        let k: f64 = s
            .clusters
            .iter()
            .map(|cl| fejer(cl[0].phi_norm - mis.phi_norm, 32))
            .sum();
        let want = 256.0 * mis.beta.norm_sqr() * k;
        assert!((h.norm_sq - want).abs() < 1e-9 * want);

        let full = effective_channel_full(&mis, &f, &s.ula_bs, &s.ula_ue).unwrap();
        for (a, b) in full.h.iter().zip(&h.h) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn zf_single_cluster() {
        let s = scenario(vec![vec![link(0, 0, -3.0, 40.0)]], 32);
        let p = build_hybrid_precoder(&s).unwrap();
        assert!((p.f_bb[(0, 0)].norm() - 1.0).abs() < 1e-12);
        let want = 16.0 * s.clusters[0][0].beta.norm();
        assert!((p.gamma[0] - want).abs() < 1e-12);
    }

    #[test]
    fn zf_contracts_fig4() {
        let s = fig4();
        let p = build_hybrid_precoder(&s).unwrap();
        let eff: Vec<_> = s
            .clusters
            .iter()
            .map(|cl| effective_channel(&cl[0], &p.f_rf, &s.ula_bs, &s.ula_ue))
            .collect();
        for n in 0..5 {
            for l in 0..5 {
                let v = eff[n].project(&p.bb_column(l));
                if l == n {
                    assert!((v - C64::new(p.gamma[n], 0.0)).norm() < 1e-9 * p.gamma[n]);
                } else {
                    assert!(v.norm() < 1e-9 * p.gamma[n]);
                }
            }
        }
        let hyb = p.f_rf.matmul(&p.f_bb).unwrap();
        for l in 0..5 {
            assert!((norm_sq(&hyb.column(l)) - 1.0).abs() < 1e-10);
        }
        assert!((hyb.frobenius_sq() - 5.0).abs() < 1e-8);
        assert!(p.kappa_min() > 0.0);
    }

    #[test]
    fn coincident_clusters_are_rejected() {
        let s = scenario(vec![vec![link(0, 0, 0.0, 30.0)], vec![link(1, 0, 0.0, 30.0)]], 32);
        match build_hybrid_precoder(&s) {
            Err(Error::IllConditioned { a, b, .. }) => assert_eq!((a, b), (0, 1)),
            Err(Error::SingularMatrix { .. }) => {}
            other => panic!("expected singular report, got {other:?}"),
        }
    }
}
