//! Scenario configuration: the user-facing description of one downlink
//! setup. Angles are physical degrees, gains are dB, powers follow from an
//! SNR in dB with unit noise variance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-user gain description for one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GainProfile {
    /// Explicit |β|² values in dB, one per user.
    Db(Vec<f64>),
    /// `users` users with gains `first_db + m·step_db`, m = 0..users.
    Step {
        users: usize,
        first_db: f64,
        step_db: f64,
    },
    /// `users` users linearly spaced from `first_db` down by `span_db`.
    Span {
        users: usize,
        first_db: f64,
        span_db: f64,
    },
    /// Path-loss form β = g·d^(-ν/2), with g drawn with unit modulus and
    /// uniform phase.
    PathLoss { distances_m: Vec<f64>, exponent: f64 },
}

impl GainProfile {
    pub fn users(&self) -> usize {
        match self {
            GainProfile::Db(g) => g.len(),
            GainProfile::Step { users, .. } | GainProfile::Span { users, .. } => *users,
            GainProfile::PathLoss { distances_m, .. } => distances_m.len(),
        }
    }

    /// |β| per user.
    pub fn magnitudes(&self) -> Vec<f64> {
        let from_db = |db: f64| 10f64.powf(db / 20.0);
        match self {
            GainProfile::Db(g) => g.iter().copied().map(from_db).collect(),
            GainProfile::Step {
                users,
                first_db,
                step_db,
            } => (0..*users)
                .map(|m| from_db(first_db + step_db * m as f64))
                .collect(),
            GainProfile::Span {
                users,
                first_db,
                span_db,
            } => (0..*users)
                .map(|m| {
                    let frac = if *users > 1 {
                        m as f64 / (*users - 1) as f64
                    } else {
                        0.0
                    };
                    from_db(first_db - span_db * frac)
                })
                .collect(),
            GainProfile::PathLoss {
                distances_m,
                exponent,
            } => distances_m.iter().map(|d| d.powf(-exponent / 2.0)).collect(),
        }
    }

    pub fn has_random_phase(&self) -> bool {
        matches!(self, GainProfile::PathLoss { .. })
    }

    /// Returns the same profile with a different user count. Only the
    /// rule-based profiles can be resized.
    pub fn with_users(&self, users: usize) -> Result<GainProfile> {
        match self {
            GainProfile::Step {
                first_db, step_db, ..
            } => Ok(GainProfile::Step {
                users,
                first_db: *first_db,
                step_db: *step_db,
            }),
            GainProfile::Span {
                first_db, span_db, ..
            } => Ok(GainProfile::Span {
                users,
                first_db: *first_db,
                span_db: *span_db,
            }),
            _ => Err(Error::Config(
                "cluster-size sweeps need a `step` or `span` gain profile".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    /// Departure angle of the cluster beam (its first user), degrees.
    pub aod_deg: f64,
    pub gains: GainProfile,
}

/// SIC decoding order within a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodingOrder {
    /// Descending misaligned effective-channel norm, recomputed per draw.
    #[default]
    EffectiveNorm,
    /// Descending large-scale gain |β| (user location).
    Gain,
}

fn default_n_bs() -> usize {
    32
}
fn default_n_u() -> usize {
    8
}
fn default_spacing() -> f64 {
    0.5
}
fn default_noise() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_n_bs")]
    pub n_bs: usize,
    #[serde(default = "default_n_u")]
    pub n_u: usize,
    /// Number of BS RF chains; defaults to the number of clusters.
    #[serde(default)]
    pub n_rf: Option<usize>,
    #[serde(default = "default_spacing")]
    pub spacing_over_wavelength: f64,
    pub clusters: Vec<ClusterConfig>,
    /// Half-width `b` of the uniform AoD misalignment, degrees.
    #[serde(default)]
    pub misalignment_deg: f64,
    #[serde(default)]
    pub decoding_order: DecodingOrder,
    #[serde(default = "default_noise")]
    pub noise_var: f64,
}

impl ScenarioConfig {
    pub fn n_rf(&self) -> usize {
        self.n_rf.unwrap_or(self.clusters.len())
    }

    pub fn total_users(&self) -> usize {
        self.clusters.iter().map(|c| c.gains.users()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_bs == 0 {
            return fail("n_bs must be at least 1".into());
        }
        if self.n_u == 0 {
            return fail("n_u must be at least 1".into());
        }
        if !(self.spacing_over_wavelength > 0.0 && self.spacing_over_wavelength.is_finite()) {
            return fail("spacing_over_wavelength must be positive".into());
        }
        if self.clusters.is_empty() {
            return fail("at least one cluster is required".into());
        }
        if self.clusters.len() > self.n_rf() {
            return fail(format!(
                "{} clusters exceed {} RF chains",
                self.clusters.len(),
                self.n_rf()
            ));
        }
        if self.n_rf() > self.n_bs {
            return fail(format!("n_rf {} exceeds n_bs {}", self.n_rf(), self.n_bs));
        }
        if !(self.misalignment_deg >= 0.0 && self.misalignment_deg.is_finite()) {
            return fail("misalignment_deg must be finite and non-negative".into());
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return fail("noise_var must be positive".into());
        }
        for (n, cluster) in self.clusters.iter().enumerate() {
            if !(cluster.aod_deg.abs() < 90.0) {
                return fail(format!("clusters[{n}].aod_deg must lie in (-90, 90)"));
            }
            let users = cluster.gains.users();
            if users == 0 {
                return fail(format!("clusters[{n}] has no users"));
            }
            if let GainProfile::PathLoss {
                distances_m,
                exponent,
            } = &cluster.gains
            {
                if distances_m.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
                    return fail(format!("clusters[{n}] distances must be positive"));
                }
                if !exponent.is_finite() {
                    return fail(format!("clusters[{n}] path-loss exponent must be finite"));
                }
            }
            if cluster.gains.magnitudes().iter().any(|g| !(g.is_finite() && *g > 0.0)) {
                return fail(format!("clusters[{n}] gains must be finite"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ScenarioConfig {
        ScenarioConfig {
            n_bs: 32,
            n_u: 8,
            n_rf: None,
            spacing_over_wavelength: 0.5,
            clusters: vec![ClusterConfig {
                aod_deg: 10.0,
                gains: GainProfile::Db(vec![0.0, -2.0]),
            }],
            misalignment_deg: 0.0,
            decoding_order: DecodingOrder::EffectiveNorm,
            noise_var: 1.0,
        }
    }

    #[test]
    fn step_and_span_profiles() {
        let step = GainProfile::Step {
            users: 3,
            first_db: 0.0,
            step_db: -1.0,
        };
        let m = step.magnitudes();
        assert!((20.0 * m[2].log10() + 2.0).abs() < 1e-12);
        let span = GainProfile::Span {
            users: 4,
            first_db: 0.0,
            span_db: 18.0,
        };
        let m = span.magnitudes();
        assert!((20.0 * m[3].log10() + 18.0).abs() < 1e-12);
        assert!((20.0 * m[1].log10() + 6.0).abs() < 1e-12);
    }

    #[test]
    fn validation_errors() {
        assert!(base().validate().is_ok());
        let mut c = base();
        c.n_rf = Some(0);
        assert!(c.validate().is_err());
        let mut c = base();
        c.clusters[0].aod_deg = 90.0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.clusters[0].gains = GainProfile::Db(vec![]);
        assert!(c.validate().is_err());
        let mut c = base();
        c.misalignment_deg = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn resize_requires_rule_profile() {
        assert!(GainProfile::Db(vec![0.0]).with_users(3).is_err());
        let p = GainProfile::Step {
            users: 2,
            first_db: 0.0,
            step_db: -1.0,
        };
        assert_eq!(p.with_users(7).unwrap().users(), 7);
    }
}
