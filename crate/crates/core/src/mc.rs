//! Phase-ensemble Monte Carlo of the semiclassical field.
//!
//! Each vacuum source is one sinusoid at the carrier frequency with a uniform
//! random phase, drawn independently per ensemble member; the coherent carrier
//! is deterministic. The sample mean and variance at fixed `(t, z)` converge
//! to the closed forms in [`crate::analytic`].
//!
//! Sampling is split into fixed-size chunks, each with its own ChaCha stream,
//! so the output is bitwise identical regardless of thread count.

use std::f64::consts::{SQRT_2, TAU};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{semiclassical_variance, Port};
use crate::config::OpticalConfig;
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::scan::check_grid;

const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeModel {
    /// Every sinusoid has amplitude `ℰ v`.
    #[default]
    Fixed,
    /// Amplitude `ℰ v |g|` with `g ~ N(0, 1)`; same second moment.
    Gaussian,
}

/// Whether the forward and mirror-reflected copies of the `a1` (resp. `a2`)
/// vacuum share one phase draw. `Independent` is a negative control: it
/// removes the interference that produces the `sin²(kz)` modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseCoupling {
    #[default]
    Shared,
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_samples: usize,
    pub seed: u64,
    pub amplitude_model: AmplitudeModel,
    pub phase_coupling: PhaseCoupling,
}

impl EnsembleSpec {
    pub fn new(n_samples: usize, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::NonPositive {
                name: "n_samples",
                value: 0.0,
            });
        }
        Ok(Self {
            n_samples,
            seed,
            amplitude_model: AmplitudeModel::Fixed,
            phase_coupling: PhaseCoupling::Shared,
        })
    }

    pub fn with_amplitude_model(mut self, m: AmplitudeModel) -> Self {
        self.amplitude_model = m;
        self
    }

    pub fn with_phase_coupling(mut self, c: PhaseCoupling) -> Self {
        self.phase_coupling = c;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n: usize,
    pub mean: f64,
    /// Unbiased (`n − 1`) sample variance.
    pub variance: f64,
    /// Standard error of `variance`, from the fourth central moment.
    pub standard_error: f64,
}

impl EnsembleStats {
    /// Standard error of the mean.
    pub fn mean_error(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }

    /// `|variance − expected|` in units of the standard error.
    pub fn z_score(&self, expected: f64) -> f64 {
        (self.variance - expected).abs() / self.standard_error
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let (mut m2, mut m4) = (0.0, 0.0);
        for x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m4 += d2 * d2;
        }
        if n < 2 {
            return Self {
                n,
                mean,
                variance: 0.0,
                standard_error: f64::INFINITY,
            };
        }
        let variance = m2 / (nf - 1.0);
        let mu4 = m4 / nf;
        let var_of_var = (mu4 - variance * variance * (nf - 3.0) / (nf - 1.0)) / nf;
        Self {
            n,
            mean,
            variance,
            standard_error: var_of_var.max(0.0).sqrt(),
        }
    }
}

/// Draws one vacuum sinusoid's amplitude and phase.
struct Vacuum {
    model: AmplitudeModel,
    unit: f64,
}

impl Vacuum {
    fn amplitude<R: Rng>(&self, rng: &mut R, weight: f64) -> f64 {
        let a = self.unit * weight.sqrt();
        match self.model {
            AmplitudeModel::Fixed => a,
            AmplitudeModel::Gaussian => {
                let g: f64 = rng.sample(StandardNormal);
                a * g.abs()
            }
        }
    }

    fn phase<R: Rng>(&self, rng: &mut R) -> f64 {
        rng.random::<f64>() * TAU
    }
}

fn run<F>(spec: &EnsembleSpec, stream: u64, draw: F) -> EnsembleStats
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = spec.n_samples.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            rng.set_stream(c as u64);
            let len = CHUNK.min(spec.n_samples - c * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    let xs: Vec<f64> = parts.concat();
    EnsembleStats::from_samples(&xs)
}

/// Semiclassical carrier amplitude `E₀ = √2 ℰ |α|`, the amplitude of the free
/// field mean in the forward/backward two-mode description.
pub fn carrier_amplitude(cfg: &OpticalConfig) -> f64 {
    SQRT_2 * cfg.field_unit * cfg.alpha.norm()
}

/// Free input beam at `(t, z)`:
/// `E₀ sin(ωt − kz − θ) + b_F sin(ωt − kz + φ₁) + b_B sin(ωt + kz + φ₂)`.
/// The backward vacuum carries weight `T v₁² + R v₂²`, so the variance
/// converges to the reference level `½ℰ²(v_b² + R v₂² + T v₁²)`.
pub fn sample_free_field(cfg: &OpticalConfig, spec: &EnsembleSpec, t: f64, z: f64) -> EnsembleStats {
    sample_free_field_stream(cfg, spec, t, z, spec.seed)
}

fn sample_free_field_stream(cfg: &OpticalConfig, spec: &EnsembleSpec, t: f64, z: f64, stream: u64) -> EnsembleStats {
    let vac = Vacuum {
        model: spec.amplitude_model,
        unit: cfg.field_unit,
    };
    let fwd = cfg.omega * t - cfg.k * z;
    let bwd = cfg.omega * t + cfg.k * z;
    let carrier = carrier_amplitude(cfg) * (fwd - cfg.alpha.arg()).sin();
    let w_f = cfg.weights.v_b2;
    let w_b = cfg.transmittance * cfg.weights.v_1sq + cfg.reflectance() * cfg.weights.v_2sq;
    run(spec, stream, |rng| {
        let af = vac.amplitude(rng, w_f);
        let pf = vac.phase(rng);
        let ab = vac.amplitude(rng, w_b);
        let pb = vac.phase(rng);
        carrier + af * (fwd + pf).sin() + ab * (bwd + pb).sin()
    })
}

/// Field at port `a1`:
///
/// ```text
/// √T(E₀ sin(ωt − kZ₁ − θ) + b_F sin(ωt − kZ₁ + φ_b))
///   + a₁ₙ[sin(ωt + kz₁ + φ₁) − R sin(ωt − kz₁ + φ₁)]
///   − √(RT) a₂ₙ sin(ωt − kz₁ + φ₂)
/// ```
pub fn sample_field_e1(cfg: &OpticalConfig, spec: &EnsembleSpec, t: f64) -> EnsembleStats {
    sample_port(cfg, spec, Port::A1, t, cfg.z1, spec.seed)
}

/// Port-`a2` twin of [`sample_field_e1`] with `T ↔ R`, `a₁ₙ ↔ a₂ₙ`, `z₁ → z₂`.
pub fn sample_field_e2(cfg: &OpticalConfig, spec: &EnsembleSpec, t: f64) -> EnsembleStats {
    sample_port(cfg, spec, Port::A2, t, cfg.z2, spec.seed)
}

fn sample_port(cfg: &OpticalConfig, spec: &EnsembleSpec, port: Port, t: f64, z: f64, stream: u64) -> EnsembleStats {
    let vac = Vacuum {
        model: spec.amplitude_model,
        unit: cfg.field_unit,
    };
    let w = cfg.weights;
    let (split, mirror, big_z, w_self, w_other) = match port {
        Port::A1 => (cfg.transmittance, cfg.reflectance(), cfg.big_z1, w.v_1sq, w.v_2sq),
        Port::A2 => (cfg.reflectance(), cfg.transmittance, cfg.big_z2, w.v_2sq, w.v_1sq),
    };
    let cross = (split * mirror).sqrt();
    let wt = cfg.omega * t;
    let path = wt - cfg.k * big_z;
    let carrier = split.sqrt() * carrier_amplitude(cfg) * (path - cfg.alpha.arg()).sin();
    let toward = wt + cfg.k * z;
    let away = wt - cfg.k * z;
    let shared = spec.phase_coupling == PhaseCoupling::Shared;
    run(spec, stream, |rng| {
        let ab = vac.amplitude(rng, w.v_b2);
        let pb = vac.phase(rng);
        let a_self = vac.amplitude(rng, w_self);
        let p_self = vac.phase(rng);
        let p_reflected = if shared { p_self } else { vac.phase(rng) };
        let a_other = vac.amplitude(rng, w_other);
        let p_other = vac.phase(rng);
        carrier
            + split.sqrt() * ab * (path + pb).sin()
            + a_self * ((toward + p_self).sin() - mirror * (away + p_reflected).sin())
            - cross * a_other * (away + p_other).sin()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPoint {
    pub z: f64,
    pub stats: EnsembleStats,
    pub analytic: f64,
}

/// Samples the port field at `t = 0` over a grid. Point `i` uses the stream
/// seeded by `seed ⊕ i`.
pub fn scan_mc(cfg: &OpticalConfig, spec: &EnsembleSpec, grid: &[f64], port: Port) -> Result<Vec<McPoint>> {
    check_grid(grid)?;
    Ok(grid
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let at = port.at(cfg, z);
            McPoint {
                z,
                stats: sample_port(&at, spec, port, 0.0, z, spec.seed ^ i as u64),
                analytic: semiclassical_variance(&at, port),
            }
        })
        .collect())
}

/// CSV `z,mc_variance,stderr,analytic`.
pub fn write_scan_csv<W: Write>(points: &[McPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["z", "mc_variance", "stderr", "analytic"])?;
    for p in points {
        w.write_record([
            fmt_f64(p.z),
            fmt_f64(p.stats.variance),
            fmt_f64(p.stats.standard_error),
            fmt_f64(p.analytic),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reproducibility record written next to an MC scan.
pub fn sidecar(spec: &EnsembleSpec, port: Port) -> serde_json::Value {
    serde_json::json!({
        "seed": spec.seed,
        "n_samples": spec.n_samples,
        "amplitude_model": spec.amplitude_model,
        "phase_coupling": spec.phase_coupling,
        "port": port,
    })
}
