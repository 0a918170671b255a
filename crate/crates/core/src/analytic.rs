//! Closed-form means and variances at the splitter outputs.
//!
//! Every output variance splits into a *traveling* part, the fraction of the
//! free-beam noise level carried through the splitter, and a *standing* part,
//! the mirror-side vacuum whose mode function vanishes at `k z = nπ`.

use serde::{Deserialize, Serialize};

use crate::config::{sql_baseline, OpenPortWeights, OpticalConfig};

/// Output port of the splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    A1,
    A2,
}

impl Port {
    pub fn as_str(self) -> &'static str {
        match self {
            Port::A1 => "a1",
            Port::A2 => "a2",
        }
    }

    /// Probe distance from the mirror-side reference for this port.
    pub fn probe(self, cfg: &OpticalConfig) -> f64 {
        match self {
            Port::A1 => cfg.z1,
            Port::A2 => cfg.z2,
        }
    }

    /// Returns `cfg` with this port's probe moved to `z`.
    pub fn at(self, cfg: &OpticalConfig, z: f64) -> OpticalConfig {
        let mut out = *cfg;
        match self {
            Port::A1 => out.z1 = z,
            Port::A2 => out.z2 = z,
        }
        out
    }
}

impl std::str::FromStr for Port {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a1" => Ok(Port::A1),
            "a2" => Ok(Port::A2),
            other => Err(format!("unknown port `{other}` (expected a1 or a2)")),
        }
    }
}

/// Output-port field variance with its source attribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub total: f64,
    pub traveling: f64,
    pub standing: f64,
    pub sql: f64,
    pub sub_sql: bool,
}

impl NoiseReport {
    pub fn new(traveling: f64, standing: f64, sql: f64) -> Self {
        let total = traveling + standing;
        Self {
            total,
            traveling,
            standing,
            sql,
            sub_sql: total < sql,
        }
    }
}

/// Variance at `port` with the probe at `z`, ignoring the probe distance
/// stored in `cfg`.
pub fn variance_at(cfg: &OpticalConfig, port: Port, z: f64) -> NoiseReport {
    variance_with_common_mode(cfg, port, z, 1.0)
}

/// As [`variance_at`] with the traveling (input-beam) contribution scaled by
/// `common_mode`. The feedback model reuses this so its open-loop limit is the
/// same arithmetic.
pub(crate) fn variance_with_common_mode(
    cfg: &OpticalConfig,
    port: Port,
    z: f64,
    common_mode: f64,
) -> NoiseReport {
    let sql = sql_baseline(cfg);
    let e2 = cfg.field_unit * cfg.field_unit;
    let t = cfg.transmittance;
    let r = cfg.reflectance();
    let s = (cfg.k * z).sin();
    let (split, mirror_coupling, weight) = match port {
        Port::A1 => (t, r, cfg.weights.v_1sq),
        Port::A2 => (r, t, cfg.weights.v_2sq),
    };
    let traveling = split * sql * common_mode;
    let standing = 2.0 * e2 * mirror_coupling * weight * s * s;
    NoiseReport::new(traveling, standing, sql)
}

/// `<ΔÊ₁²> = ℰ²[(T/2)(v_b² + R v₂² + T v₁²) + 2 R v₁² sin²(k z₁)]`.
pub fn variance_e1(cfg: &OpticalConfig) -> NoiseReport {
    variance_at(cfg, Port::A1, cfg.z1)
}

/// `<ΔÊ₂²> = ℰ²[(R/2)(v_b² + R v₂² + T v₁²) + 2 T v₂² sin²(k z₂)]`.
pub fn variance_e2(cfg: &OpticalConfig) -> NoiseReport {
    variance_at(cfg, Port::A2, cfg.z2)
}

/// Port-`a1` variance in the form produced directly by the operator
/// expansion, before the `R + T = 1` rewrite:
/// `(ℰ²/2)[(1 + R²) v₁² + T(R v₂² + v_b²) − 2 R v₁² cos(2 k z₁)]`.
pub fn variance_e1_raw(cfg: &OpticalConfig) -> f64 {
    let w = &cfg.weights;
    let t = cfg.transmittance;
    let r = cfg.reflectance();
    let e2 = cfg.field_unit * cfg.field_unit;
    0.5 * e2
        * ((1.0 + r * r) * w.v_1sq + t * (r * w.v_2sq + w.v_b2)
            - 2.0 * r * w.v_1sq * (2.0 * cfg.k * cfg.z1).cos())
}

/// Port-`a2` twin of [`variance_e1_raw`].
pub fn variance_e2_raw(cfg: &OpticalConfig) -> f64 {
    let w = &cfg.weights;
    let t = cfg.transmittance;
    let r = cfg.reflectance();
    let e2 = cfg.field_unit * cfg.field_unit;
    0.5 * e2
        * ((1.0 + t * t) * w.v_2sq + r * (t * w.v_1sq + w.v_b2)
            - 2.0 * t * w.v_2sq * (2.0 * cfg.k * cfg.z2).cos())
}

/// Phase-ensemble (semiclassical) variance at port `a1`, written in the
/// ensemble-average ordering
/// `½[T(a₂ₙ² R + b_F²) − 2 a₁ₙ² R cos(2kz₁) + a₁ₙ²(R² + 1)]`
/// with `a_{in}² = ℰ² v_i²`, `b_F² = ℰ² v_b²`.
pub fn semiclassical_variance_e1(cfg: &OpticalConfig) -> f64 {
    let e2 = cfg.field_unit * cfg.field_unit;
    let b_f = e2 * cfg.weights.v_b2;
    let a1n = e2 * cfg.weights.v_1sq;
    let a2n = e2 * cfg.weights.v_2sq;
    let t = cfg.transmittance;
    let r = cfg.reflectance();
    0.5 * (t * (a2n * r + b_f) - 2.0 * a1n * r * (2.0 * cfg.k * cfg.z1).cos()
        + a1n * (r * r + 1.0))
}

/// Port-`a2` twin of [`semiclassical_variance_e1`].
pub fn semiclassical_variance_e2(cfg: &OpticalConfig) -> f64 {
    let e2 = cfg.field_unit * cfg.field_unit;
    let b_f = e2 * cfg.weights.v_b2;
    let a1n = e2 * cfg.weights.v_1sq;
    let a2n = e2 * cfg.weights.v_2sq;
    let t = cfg.transmittance;
    let r = cfg.reflectance();
    0.5 * (r * (a1n * t + b_f) - 2.0 * a2n * t * (2.0 * cfg.k * cfg.z2).cos()
        + a2n * (t * t + 1.0))
}

/// Semiclassical variance at either port.
pub fn semiclassical_variance(cfg: &OpticalConfig, port: Port) -> f64 {
    match port {
        Port::A1 => semiclassical_variance_e1(cfg),
        Port::A2 => semiclassical_variance_e2(cfg),
    }
}

/// Coherent-state mean of `Ê₁` at time `t`:
/// `√(2T) ℰ |α| sin(ωt − kZ₁ − θ)`.
///
/// The amplitude is the one carried by the `Ê₁` operator (and fixed by the
/// `|α|²` terms of `<Ê₁²>`), i.e. `√T` times the free-field amplitude `√2 ℰ|α|`.
pub fn mean_field_e1(cfg: &OpticalConfig, t: f64) -> f64 {
    let amp = (2.0 * cfg.transmittance).sqrt() * cfg.field_unit * cfg.alpha.norm();
    amp * (cfg.omega * t - cfg.k * cfg.big_z1 - cfg.alpha.arg()).sin()
}

/// Coherent-state mean of `Ê₂` at time `t`:
/// `√(2R) ℰ |α| sin(ωt − kZ₂ − θ)`.
///
/// The `Ê₂` operator carries `+i/√2 · (−√R)` on `b†`, the same overall sign as
/// the `b†` term of `Ê₁`, so the two means share a sign.
pub fn mean_field_e2(cfg: &OpticalConfig, t: f64) -> f64 {
    let amp = (2.0 * cfg.reflectance()).sqrt() * cfg.field_unit * cfg.alpha.norm();
    amp * (cfg.omega * t - cfg.k * cfg.big_z2 - cfg.alpha.arg()).sin()
}

/// Linearized photocurrent variance at port `a1` with the second input port
/// open: `|α|² T [R(v_cB² + v_cF²) + T(v_bB² + v_bF²)]`.
///
/// No position enters: the unused port contributes a traveling vacuum.
pub fn photocurrent_variance_open(alpha_sq: f64, transmittance: f64, w: &OpenPortWeights) -> f64 {
    let r = 1.0 - transmittance;
    alpha_sq * transmittance * (r * (w.v_cb2 + w.v_cf2) + transmittance * (w.v_bb2 + w.v_bf2))
}

/// Photocurrent variance with its carrier-borne and mirror-borne parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotocurrentReport {
    pub total: f64,
    pub carrier_term: f64,
    pub standing_term: f64,
}

/// Linearized photocurrent variance at port `a1` with the mirror in place:
/// `T|α|²[T(v_b² + R v₂² + T v₁²) + 2 R v₁² sin²(k z₁)]`.
///
/// Photocurrents are in photon-flux units, so `ℰ` does not enter.
pub fn photocurrent_variance_mirror(cfg: &OpticalConfig) -> PhotocurrentReport {
    photocurrent_at(cfg, cfg.z1)
}

/// [`photocurrent_variance_mirror`] with the probe at `z1`.
pub fn photocurrent_at(cfg: &OpticalConfig, z1: f64) -> PhotocurrentReport {
    photocurrent_with_common_mode(cfg, z1, 1.0)
}

pub(crate) fn photocurrent_with_common_mode(
    cfg: &OpticalConfig,
    z1: f64,
    common_mode: f64,
) -> PhotocurrentReport {
    let w = &cfg.weights;
    let t = cfg.transmittance;
    let r = cfg.reflectance();
    let detected = t * cfg.photon_number();
    let s = (cfg.k * z1).sin();
    let carrier_term = detected * t * common_mode_weight(cfg) * common_mode;
    let standing_term = detected * 2.0 * r * w.v_1sq * s * s;
    PhotocurrentReport {
        total: carrier_term + standing_term,
        carrier_term,
        standing_term,
    }
}

/// `v_b² + R v₂² + T v₁²`: the forward and backward vacuum of the input beam.
pub fn common_mode_weight(cfg: &OpticalConfig) -> f64 {
    let w = &cfg.weights;
    w.v_b2 + cfg.reflectance() * w.v_2sq + cfg.transmittance * w.v_1sq
}
