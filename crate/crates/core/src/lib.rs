//! Vacuum noise at the outputs of a beam splitter whose unused input is
//! terminated by a mirror.
//!
//! The closed-form moments in [`analytic`] are cross-checked against a
//! truncated Fock-space simulation ([`fock`]) and a random-phase ensemble
//! ([`mc`]). [`feedback`] adds a steady-state intensity-stabilization model.

pub mod analytic;
pub mod config;
pub mod error;
pub mod feedback;
pub mod fock;
pub mod mc;
pub mod modes;
pub mod scan;
pub mod suite;

pub use analytic::{NoiseReport, Port};
pub use config::{parse_config, sql_baseline, OpenPortWeights, OpticalConfig, VacuumWeights};
pub use error::{Error, Result};

/// Round-trippable float formatting used in every CSV writer.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses a comma-separated list of finite floats such as `"0,1,10,1e6"`.
pub fn parse_float_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let v: f64 = part
            .parse()
            .map_err(|_| Error::Parse(format!("not a number: {part:?}")))?;
        if !v.is_finite() {
            return Err(Error::Parse(format!("not finite: {part:?}")));
        }
        out.push(v);
    }
    Ok(out)
}
