//! Steady-state model of intensity feedback driven by the photocurrent at
//! port `a1`.
//!
//! The loop senses the common-mode noise of the input beam, whose weight is
//! `σ² = v_b² + R v₂² + T v₁²`, and a proportional controller with loop gain
//! `g` divides its variance by `(1 + g)²`. The mirror-side standing terms are
//! not part of the sensed common mode and pass through unchanged, which is
//! what limits the out-of-loop benefit to standing-wave nodes.
//!
//! Finite detection efficiency `η` is a splitter of transmittance `η` in
//! front of the detector. Referred back to unit efficiency it adds
//! `(1 − η)/η` of unit vacuum to the error signal; the controller is
//! calibrated on the referred signal, so that noise is impressed on the beam
//! with weight `g²` and the in-loop record shows it suppressed (squashing).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytic::{
    common_mode_weight, photocurrent_with_common_mode, variance_at, variance_with_common_mode, Port,
};
use crate::config::{sql_baseline, OpticalConfig};
use crate::error::{Error, Result};
use crate::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSpec {
    pub gain: f64,
    pub probe_z1: f64,
    pub out_probe_z2: f64,
    pub efficiency: f64,
}

impl FeedbackSpec {
    pub fn new(gain: f64, probe_z1: f64, out_probe_z2: f64) -> Self {
        Self {
            gain,
            probe_z1,
            out_probe_z2,
            efficiency: 1.0,
        }
    }

    pub fn with_efficiency(mut self, eta: f64) -> Self {
        self.efficiency = eta;
        self
    }

    pub fn with_gain(mut self, g: f64) -> Self {
        self.gain = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gain.is_finite() {
            return Err(Error::NotFinite { name: "gain" });
        }
        if self.gain < 0.0 {
            return Err(Error::NegativeGain(self.gain));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::Efficiency(self.efficiency));
        }
        for (name, z) in [("probe_z1", self.probe_z1), ("out_probe_z2", self.out_probe_z2)] {
            if !z.is_finite() {
                return Err(Error::NotFinite { name });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopReport {
    pub gain: f64,
    /// Photocurrent variance recorded by the in-loop detector.
    pub inloop_variance: f64,
    /// Part of the in-loop variance the loop cannot touch.
    pub inloop_floor: f64,
    /// Field variance at port `a2`, probe at `out_probe_z2`.
    pub out_a2_variance: f64,
    pub open_loop_a2_variance: f64,
    pub sql: f64,
    pub sub_sql_out: bool,
}

/// Unit-efficiency-referred detection vacuum, `(1 − η)/η`.
pub fn detection_penalty(efficiency: f64) -> f64 {
    (1.0 - efficiency) / efficiency
}

/// Closed-loop scale of the common-mode variance seen outside the loop:
/// `(1 + g² p / (T σ²)) / (1 + g)²` with `p` the detection penalty. A beam
/// that sends no common mode to the detector leaves the loop open.
fn out_of_loop_factor(cfg: &OpticalConfig, spec: &FeedbackSpec) -> f64 {
    let g = spec.gain;
    let penalty = detection_penalty(spec.efficiency);
    let sensed = cfg.transmittance * common_mode_weight(cfg);
    let closed = (1.0 + g) * (1.0 + g);
    if penalty == 0.0 {
        1.0 / closed
    } else if sensed > 0.0 {
        (1.0 + g * g * penalty / sensed) / closed
    } else {
        1.0
    }
}

pub fn run_loop(cfg: &OpticalConfig, spec: &FeedbackSpec) -> Result<LoopReport> {
    spec.validate()?;
    let closed = 1.0 / ((1.0 + spec.gain) * (1.0 + spec.gain));
    let detected = cfg.transmittance * cfg.photon_number();
    let measured = photocurrent_with_common_mode(cfg, spec.probe_z1, closed);
    let inloop_variance = measured.total + detected * detection_penalty(spec.efficiency) * closed;

    let out = variance_with_common_mode(cfg, Port::A2, spec.out_probe_z2, out_of_loop_factor(cfg, spec));
    let open = variance_at(cfg, Port::A2, spec.out_probe_z2);
    let sql = sql_baseline(cfg);
    Ok(LoopReport {
        gain: spec.gain,
        inloop_variance,
        inloop_floor: measured.standing_term,
        out_a2_variance: out.total,
        open_loop_a2_variance: open.total,
        sql,
        sub_sql_out: out.total < sql,
    })
}

pub fn gain_sweep(cfg: &OpticalConfig, spec: &FeedbackSpec, gains: &[f64]) -> Result<Vec<LoopReport>> {
    if gains.is_empty() {
        return Err(Error::EmptyRange);
    }
    gains.iter().map(|&g| run_loop(cfg, &spec.with_gain(g))).collect()
}

/// CSV `g,inloop,out_a2,open_loop_a2,sql,sub_sql_out`.
pub fn write_sweep_csv<W: Write>(reports: &[LoopReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["g", "inloop", "out_a2", "open_loop_a2", "sql", "sub_sql_out"])?;
    for r in reports {
        w.write_record([
            fmt_f64(r.gain),
            fmt_f64(r.inloop_variance),
            fmt_f64(r.out_a2_variance),
            fmt_f64(r.open_loop_a2_variance),
            fmt_f64(r.sql),
            r.sub_sql_out.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
