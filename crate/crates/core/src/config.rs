//! Physical parameters of the beam-splitter + mirror arrangement.
//!
//! A coherent beam enters port `b`; a mirror terminates the other input port
//! so that the vacuum entering from the output ports `a1`/`a2` is reflected
//! back and forms a standing wave. Everything downstream is a pure function
//! of an [`OpticalConfig`].

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-mode vacuum weights `v²` (the value of `<a a†>` on the empty mode).
///
/// The physical value is 1 for every mode. Other values are a bookkeeping
/// device: zeroing a weight removes that source from every variance, which is
/// how contributions get attributed to individual ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumWeights {
    /// Weight of the forward vacuum riding on the coherent input `b`.
    pub v_b2: f64,
    /// Weight of the vacuum entering from output port `a1`.
    pub v_1sq: f64,
    /// Weight of the vacuum entering from output port `a2`.
    pub v_2sq: f64,
}

impl Default for VacuumWeights {
    fn default() -> Self {
        Self::uniform(1.0)
    }
}

impl VacuumWeights {
    pub fn uniform(w: f64) -> Self {
        Self {
            v_b2: w,
            v_1sq: w,
            v_2sq: w,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("v_b2", self.v_b2),
            ("v_1sq", self.v_1sq),
            ("v_2sq", self.v_2sq),
        ] {
            if !value.is_finite() {
                return Err(Error::NotFinite { name });
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { name, value });
            }
        }
        Ok(())
    }
}

/// Vacuum weights of the four bidirectional modes used by the open-port
/// (no mirror) photocurrent expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenPortWeights {
    pub v_bf2: f64,
    pub v_bb2: f64,
    pub v_cf2: f64,
    pub v_cb2: f64,
}

impl Default for OpenPortWeights {
    fn default() -> Self {
        Self {
            v_bf2: 1.0,
            v_bb2: 1.0,
            v_cf2: 1.0,
            v_cb2: 1.0,
        }
    }
}

impl OpenPortWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("v_bF2", self.v_bf2),
            ("v_bB2", self.v_bb2),
            ("v_cF2", self.v_cf2),
            ("v_cB2", self.v_cb2),
        ] {
            if !value.is_finite() {
                return Err(Error::NotFinite { name });
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { name, value });
            }
        }
        Ok(())
    }
}

/// All parameters of the setup. Reflectance is derived (`1 - T`) and never
/// stored, so `R + T = 1` holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalConfig {
    pub transmittance: f64,
    /// Wavenumber `k` (rad per length unit).
    pub k: f64,
    /// Angular frequency; enters phases only.
    pub omega: f64,
    /// Probe distance from the mirror-side reference at port `a1`.
    pub z1: f64,
    /// Probe distance from the mirror-side reference at port `a2`.
    pub z2: f64,
    /// Propagation distance of the coherent field to port `a1`.
    pub big_z1: f64,
    /// Propagation distance of the coherent field to port `a2`.
    pub big_z2: f64,
    /// Coherent amplitude of mode `b`.
    pub alpha: Complex64,
    /// Single-photon field scale.
    pub field_unit: f64,
    pub weights: VacuumWeights,
}

impl Default for OpticalConfig {
    fn default() -> Self {
        Self {
            transmittance: 0.5,
            k: TAU,
            omega: 1.0,
            z1: 0.0,
            z2: 0.0,
            big_z1: 0.0,
            big_z2: 0.0,
            alpha: Complex64::new(1.0, 0.0),
            field_unit: 1.0,
            weights: VacuumWeights::default(),
        }
    }
}

impl OpticalConfig {
    #[inline]
    pub fn reflectance(&self) -> f64 {
        1.0 - self.transmittance
    }

    /// `|alpha|²`, the mean photon number of the coherent input.
    #[inline]
    pub fn photon_number(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    pub fn with_transmittance(mut self, t: f64) -> Self {
        self.transmittance = t;
        self
    }

    pub fn with_weights(mut self, weights: VacuumWeights) -> Self {
        self.weights = weights;
        self
    }

    /// Sets `z1` so that `k z1` equals the given phase.
    pub fn with_phase_z1(mut self, kz: f64) -> Self {
        self.z1 = kz / self.k;
        self
    }

    /// Sets `z2` so that `k z2` equals the given phase.
    pub fn with_phase_z2(mut self, kz: f64) -> Self {
        self.z2 = kz / self.k;
        self
    }

    pub fn validate(self) -> Result<Self> {
        validate(self)
    }
}

/// Checks every invariant of `cfg` and hands it back unchanged.
pub fn validate(cfg: OpticalConfig) -> Result<OpticalConfig> {
    let t = cfg.transmittance;
    if !t.is_finite() {
        return Err(Error::NotFinite { name: "T" });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange(t));
    }
    for (name, value) in [
        ("k", cfg.k),
        ("omega", cfg.omega),
        ("E_unit", cfg.field_unit),
    ] {
        if !value.is_finite() {
            return Err(Error::NotFinite { name });
        }
        if value <= 0.0 {
            return Err(Error::NonPositive { name, value });
        }
    }
    for (name, value) in [
        ("z1", cfg.z1),
        ("z2", cfg.z2),
        ("Z1", cfg.big_z1),
        ("Z2", cfg.big_z2),
    ] {
        if !value.is_finite() {
            return Err(Error::NotFinite { name });
        }
        if value < 0.0 {
            return Err(Error::NegativeLength { name, value });
        }
    }
    if !cfg.alpha.re.is_finite() || !cfg.alpha.im.is_finite() {
        return Err(Error::NotFinite { name: "alpha" });
    }
    cfg.weights.validate()?;
    Ok(cfg)
}

/// Field variance of the free coherent beam before the splitter, the
/// reference level against which sub-SQL claims are made:
/// `½ ℰ² (v_b² + R v₂² + T v₁²)`.
///
/// The backward vacuum of the input beam is exactly what leaves the splitter
/// toward the source, i.e. `T v₁² + R v₂²`.
pub fn sql_baseline(cfg: &OpticalConfig) -> f64 {
    let w = &cfg.weights;
    let r = cfg.reflectance();
    0.5 * cfg.field_unit * cfg.field_unit * (w.v_b2 + r * w.v_2sq + cfg.transmittance * w.v_1sq)
}

/// Flat key/value document accepted by `--config`. Every key is optional;
/// present keys override the base configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z2: Option<f64>,
    #[serde(rename = "Z1", default, skip_serializing_if = "Option::is_none")]
    pub big_z1: Option<f64>,
    #[serde(rename = "Z2", default, skip_serializing_if = "Option::is_none")]
    pub big_z2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_im: Option<f64>,
    #[serde(rename = "E_unit", default, skip_serializing_if = "Option::is_none")]
    pub e_unit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_b2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_1sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_2sq: Option<f64>,
}

impl ConfigDocument {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json_slice(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Layers `other` on top of `self`: keys set in `other` win.
    pub fn merged_with(mut self, other: &ConfigDocument) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(t, k, omega, z1, z2, big_z1, big_z2, alpha_re, alpha_im, e_unit, v_b2, v_1sq, v_2sq);
        self
    }

    /// Applies the document to `base` without validating.
    pub fn apply(&self, mut base: OpticalConfig) -> OpticalConfig {
        if let Some(v) = self.t {
            base.transmittance = v;
        }
        if let Some(v) = self.k {
            base.k = v;
        }
        if let Some(v) = self.omega {
            base.omega = v;
        }
        if let Some(v) = self.z1 {
            base.z1 = v;
        }
        if let Some(v) = self.z2 {
            base.z2 = v;
        }
        if let Some(v) = self.big_z1 {
            base.big_z1 = v;
        }
        if let Some(v) = self.big_z2 {
            base.big_z2 = v;
        }
        if let Some(v) = self.alpha_re {
            base.alpha.re = v;
        }
        if let Some(v) = self.alpha_im {
            base.alpha.im = v;
        }
        if let Some(v) = self.e_unit {
            base.field_unit = v;
        }
        if let Some(v) = self.v_b2 {
            base.weights.v_b2 = v;
        }
        if let Some(v) = self.v_1sq {
            base.weights.v_1sq = v;
        }
        if let Some(v) = self.v_2sq {
            base.weights.v_2sq = v;
        }
        base
    }

    /// Full document describing `cfg`.
    pub fn from_config(cfg: &OpticalConfig) -> Self {
        Self {
            t: Some(cfg.transmittance),
            k: Some(cfg.k),
            omega: Some(cfg.omega),
            z1: Some(cfg.z1),
            z2: Some(cfg.z2),
            big_z1: Some(cfg.big_z1),
            big_z2: Some(cfg.big_z2),
            alpha_re: Some(cfg.alpha.re),
            alpha_im: Some(cfg.alpha.im),
            e_unit: Some(cfg.field_unit),
            v_b2: Some(cfg.weights.v_b2),
            v_1sq: Some(cfg.weights.v_1sq),
            v_2sq: Some(cfg.weights.v_2sq),
        }
    }
}

/// Parses a config document and validates the result against the defaults.
pub fn parse_config(bytes: &[u8]) -> Result<OpticalConfig> {
    let doc = ConfigDocument::from_json_slice(bytes)?;
    validate(doc.apply(OpticalConfig::default()))
}
