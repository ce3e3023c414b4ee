use proptest::prelude::*;

use hbnoma::beamforming::{build_hybrid_precoder, effective_channel, effective_channel_full};
use hbnoma::bounds::{
    fejer_sum, kappa_max_s, misalignment_factor, misalignment_factor_eigen, rf_outer_modes,
    theorem1_lower_bound, theorem2_lower_bound, MisalignmentModel,
};
use hbnoma::channel::{beam_collinearity, steering_vector, synthesize_scenario, Scenario, UlaConfig};
use hbnoma::config::{ClusterConfig, DecodingOrder, GainProfile, ScenarioConfig};
use hbnoma::noma::{allocate_power, decoding_positions, exact_rate, user_slots, RateTerms};
use hbnoma::numerics::{hermitian_eig, hermitian_solve, inner, norm_sq, CMatrix, C64};

fn unit() -> impl Strategy<Value = f64> {
    -1.0f64..=1.0
}

/// Cluster AoDs spread over (-70°, 70°) with one cluster per 140/N band so
/// beams never coincide.
fn config() -> impl Strategy<Value = ScenarioConfig> {
    (1usize..=5, prop::sample::select(vec![16usize, 32, 64]), 0.0f64..4.0).prop_flat_map(|(n, n_bs, b)| {
        let clusters = prop::collection::vec(
            (0.2f64..0.8, prop::collection::vec(-10.0f64..0.0, 1..5)),
            n,
        );
        (Just(n_bs), Just(b), clusters).prop_map(move |(n_bs, b, cl)| {
            let width = 140.0 / cl.len() as f64;
            ScenarioConfig {
                n_bs,
                n_u: 8,
                n_rf: None,
                spacing_over_wavelength: 0.5,
                clusters: cl
                    .into_iter()
                    .enumerate()
                    .map(|(i, (frac, gains))| ClusterConfig {
                        aod_deg: -70.0 + width * (i as f64 + frac),
                        gains: GainProfile::Db(gains),
                    })
                    .collect(),
                misalignment_deg: b,
                decoding_order: DecodingOrder::Gain,
                noise_var: 1.0,
            }
        })
    })
}

fn rates(s: &Scenario, full: bool) -> Vec<Vec<RateTerms>> {
    let p = build_hybrid_precoder(s).unwrap();
    let eff: Vec<Vec<_>> = s
        .clusters
        .iter()
        .map(|cl| {
            cl.iter()
                .map(|l| {
                    if full {
                        effective_channel_full(l, &p.f_rf, &s.ula_bs, &s.ula_ue).unwrap()
                    } else {
                        effective_channel(l, &p.f_rf, &s.ula_bs, &s.ula_ue)
                    }
                })
                .collect()
        })
        .collect();
    let norms: Vec<Vec<f64>> = eff.iter().map(|c| c.iter().map(|h| h.norm_sq).collect()).collect();
    let alloc = allocate_power(&norms, s.total_power).unwrap();
    let slots = user_slots(&alloc, &decoding_positions(s, &norms, DecodingOrder::Gain));
    eff.iter()
        .zip(&slots)
        .map(|(c, sl)| c.iter().zip(sl).map(|(h, x)| exact_rate(h, x, &p, &alloc, s.noise_var)).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_has_unit_norm(phi in unit(), n in 1usize..80) {
        let a = steering_vector(phi, &UlaConfig::new(n)).unwrap();
        prop_assert!((norm_sq(&a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinearity_is_symmetric_and_bounded(a in unit(), b in unit(), n in 1usize..80) {
        let ula = UlaConfig::new(n);
        let k = beam_collinearity(a, b, &ula).unwrap();
        prop_assert_eq!(k, beam_collinearity(b, a, &ula).unwrap());
        prop_assert!((0.0..=1.0).contains(&k));
        let direct = inner(&steering_vector(a, &ula).unwrap(), &steering_vector(b, &ula).unwrap()).norm_sqr();
        prop_assert!((k - direct).abs() < 1e-12);
    }

    #[test]
    fn effective_norm_matches_fejer_sum(cfg in config(), seed in any::<u64>()) {
        let s = synthesize_scenario(&cfg, 10.0, seed).unwrap();
        let p = build_hybrid_precoder(&s).unwrap();
        let firsts: Vec<f64> = s.clusters.iter().zip(&p.first_users).map(|(c, &f)| c[f].phi_norm).collect();
        for l in s.users() {
            let h = effective_channel(l, &p.f_rf, &s.ula_bs, &s.ula_ue);
            let want = s.array_gain() * l.beta.norm_sqr() * fejer_sum(l.phi_norm, &firsts, cfg.n_bs);
            prop_assert!((h.norm_sq - want).abs() <= 1e-9 * want);
        }
    }

    #[test]
    fn rates_ignore_arrival_angles(cfg in config(), seed in any::<u64>(), shift in -1.0f64..1.0) {
        let s = synthesize_scenario(&cfg, 20.0, seed).unwrap();
        let mut t = s.clone();
        for l in t.clusters.iter_mut().flatten() {
            l.theta_norm = (l.theta_norm + shift).clamp(-1.0, 1.0);
        }
        let a = rates(&s, true);
        let b = rates(&t, true);
        let c = rates(&s, false);
        for ((x, y), z) in a.iter().flatten().zip(b.iter().flatten()).zip(c.iter().flatten()) {
            prop_assert!((x.rate - y.rate).abs() < 1e-10);
            prop_assert!((x.rate - z.rate).abs() < 1e-10);
        }
    }

    #[test]
    fn power_is_conserved(cfg in config(), seed in any::<u64>(), p in 0.1f64..1000.0) {
        let s = synthesize_scenario(&cfg, p, seed).unwrap();
        let pre = build_hybrid_precoder(&s).unwrap();
        let norms: Vec<Vec<f64>> = s.clusters.iter()
            .map(|c| c.iter().map(|l| effective_channel(l, &pre.f_rf, &s.ula_bs, &s.ula_ue).norm_sq).collect())
            .collect();
        let a = allocate_power(&norms, p).unwrap();
        prop_assert!((a.cluster_power.iter().sum::<f64>() - p).abs() < 1e-10 * p.max(1.0));
        for (pn, users) in a.cluster_power.iter().zip(&a.user_power) {
            prop_assert!((users.iter().sum::<f64>() - pn).abs() < 1e-10 * p.max(1.0));
            prop_assert!(users.iter().all(|&u| u > 0.0));
        }
    }

    #[test]
    fn aligned_users_see_no_inter_cluster_interference(mut cfg in config(), seed in any::<u64>()) {
        cfg.misalignment_deg = 0.0;
        let s = synthesize_scenario(&cfg, 30.0, seed).unwrap();
        for cl in rates(&s, false) {
            for r in &cl {
                prop_assert!(r.inter <= 1e-9 * r.signal);
            }
            let mut by_pos = cl.clone();
            by_pos.sort_by_key(|r| r.position);
            for w in by_pos.windows(2) {
                prop_assert!(w[1].rate <= w[0].rate + 1e-12);
            }
        }
    }

    #[test]
    fn rho_bounds_and_eigen_form(cfg in config(), seed in any::<u64>()) {
        let s = synthesize_scenario(&cfg, 10.0, seed).unwrap();
        let p = build_hybrid_precoder(&s).unwrap();
        let modes = rf_outer_modes(&p.f_rf).unwrap();
        let firsts: Vec<f64> = s.clusters.iter().zip(&p.first_users).map(|(c, &f)| c[f].phi_norm).collect();
        for (n, cl) in s.clusters.iter().enumerate() {
            let h1 = effective_channel(&cl[p.first_users[n]], &p.f_rf, &s.ula_bs, &s.ula_ue);
            let k1 = fejer_sum(firsts[n], &firsts, cfg.n_bs);
            for l in cl {
                let h = effective_channel(l, &p.f_rf, &s.ula_bs, &s.ula_ue);
                let rho = misalignment_factor(&h.h, &h1.h).unwrap();
                prop_assert!((0.0..=1.0).contains(&rho));
                let km = fejer_sum(l.phi_norm, &firsts, cfg.n_bs);
                let eig = misalignment_factor_eigen(l.phi_norm, firsts[n], &modes, km, k1);
                prop_assert!(eig >= rho - 1e-9);
            }
        }
    }

    #[test]
    fn theorem1_never_exceeds_exact(mut cfg in config(), seed in any::<u64>(), snr in 0.0f64..30.0) {
        cfg.misalignment_deg = 0.0;
        let s = synthesize_scenario(&cfg, 10f64.powf(snr / 10.0), seed).unwrap();
        let p = build_hybrid_precoder(&s).unwrap();
        let f_inv = hermitian_solve(&p.gram, &CMatrix::identity(p.n_clusters())).unwrap();
        for i in 0..p.n_clusters() {
            prop_assert!(f_inv[(i, i)].re <= 1.0 / p.kappa_min() * (1.0 + 1e-9));
        }
        let eff: Vec<Vec<f64>> = s.clusters.iter()
            .map(|c| c.iter().map(|l| effective_channel(l, &p.f_rf, &s.ula_bs, &s.ula_ue).norm_sq).collect())
            .collect();
        let alloc = allocate_power(&eff, s.total_power).unwrap();
        let slots = user_slots(&alloc, &decoding_positions(&s, &eff, DecodingOrder::Gain));
        for (cl, (r, sl)) in s.clusters.iter().zip(rates(&s, false).iter().zip(&slots)) {
            for ((l, r), x) in cl.iter().zip(r).zip(sl) {
                let lb = theorem1_lower_bound(x, s.array_gain() * l.beta.norm_sqr(), p.kappa_min(), 1.0);
                prop_assert!(lb <= r.rate + 1e-12);
            }
        }
    }

    #[test]
    fn zeta_terms(rho in 0.0f64..=1.0, k1 in 0.5f64..3.0, gain in 1.0f64..500.0) {
        let slot = hbnoma::noma::UserSlot { cluster: 0, user: 1, position: 1, own_power: 2.0, ahead_power: 2.0 };
        let model = MisalignmentModel { rho: 1.0, leak_dir: vec![], k_sum_first: k1, k_sum_user: k1 };
        let t = theorem2_lower_bound(&slot, gain, &model, 3.0, 0.6, 1.0);
        prop_assert_eq!(t.zeta_inter, 0.0);
        prop_assert!((t.zeta_noise - 1.0 / 0.6).abs() < 1e-12);
        let model = MisalignmentModel { rho, ..model };
        let t = theorem2_lower_bound(&slot, gain, &model, 3.0, 0.6, 1.0);
        prop_assert!(t.zeta_intra >= 0.0 && t.zeta_inter >= 0.0 && t.zeta_noise >= 0.0 && t.lb >= 0.0);
    }

    #[test]
    fn kappa_s_scales_linearly(cfg in config(), seed in any::<u64>(), scale in 0.1f64..10.0) {
        let s = synthesize_scenario(&cfg, 10.0, seed).unwrap();
        let p = build_hybrid_precoder(&s).unwrap();
        let powers: Vec<f64> = (0..p.n_clusters()).map(|i| 1.0 + i as f64).collect();
        let scaled: Vec<f64> = powers.iter().map(|x| x * scale).collect();
        for n in 0..p.n_clusters() {
            let a = kappa_max_s(&p.f_bb, &powers, n).unwrap();
            let b = kappa_max_s(&p.f_bb, &scaled, n).unwrap();
            prop_assert!((b - scale * a).abs() <= 1e-9 * b.max(1e-300));
        }
    }

    #[test]
    fn eig_reconstructs(entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36), n in 1usize..=6) {
        let mut a = CMatrix::zeros(n, n);
        for r in 0..n {
            a[(r, r)] = C64::new(entries[r * 6 + r].0, 0.0);
            for c in r + 1..n {
                let (re, im) = entries[r * 6 + c];
                a[(r, c)] = C64::new(re, im);
                a[(c, r)] = C64::new(re, -im);
            }
        }
        let e = hermitian_eig(&a).unwrap();
        prop_assert!(e.reconstruct().sub(&a).unwrap().max_abs() < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
