//! Field operators as complex coefficient maps over labeled bosonic modes,
//! evaluated on coherent product states by closed moment rules.
//!
//! A [`LinearFieldForm`] stores the positive-frequency coefficients `c_i` of
//! `Ê⁽⁺⁾ = Σ c_i â_i`. The Hermitian field is `Ê = Ê⁽⁺⁾ + Ê⁽⁻⁾`, so the
//! conjugate half is implied and never stored. On a coherent product state
//! with amplitudes `α_i` and vacuum weights `v_i² = <δâ δâ†>`:
//!
//! * `<Ê>       = Σ 2 Re(c_i α_i)`
//! * `Var(Ê)    = Σ |c_i|² v_i²`
//! * `Var(Ê⁽⁻⁾Ê⁽⁺⁾) ≈ |Σ c_i α_i|² · Σ |c_j|² v_j²` (leading order in `|α|²`)

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{OpenPortWeights, OpticalConfig};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Label of a bosonic mode. Ordering is lexicographic so maps keyed by it
/// serialize deterministically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeId(String);

impl ModeId {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ModeId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Canonical mode labels used by the builders.
pub mod labels {
    pub const B: &str = "b";
    pub const C: &str = "c";
    pub const A1: &str = "a1";
    pub const A2: &str = "a2";
    pub const B_FWD: &str = "bF";
    pub const B_BWD: &str = "bB";
    pub const C_FWD: &str = "cF";
    pub const C_BWD: &str = "cB";
    pub const A1_FWD: &str = "a1F";
    pub const A1_BWD: &str = "a1B";
}

/// `Ê = Σ_i (c_i â_i + c̄_i â_i†)`, stored as the map `mode → c_i`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormDocument", into = "FormDocument")]
pub struct LinearFieldForm {
    terms: BTreeMap<ModeId, Complex64>,
}

impl LinearFieldForm {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `c â_mode` to the positive-frequency part. Entries that sum to
    /// exactly zero are removed.
    pub fn add(&mut self, mode: impl Into<ModeId>, c: Complex64) -> &mut Self {
        let mode = mode.into();
        let sum = self.terms.get(&mode).copied().unwrap_or_default() + c;
        if sum == Complex64::new(0.0, 0.0) {
            self.terms.remove(&mode);
        } else {
            self.terms.insert(mode, sum);
        }
        self
    }

    pub fn with(mut self, mode: impl Into<ModeId>, c: Complex64) -> Self {
        self.add(mode, c);
        self
    }

    /// Builds a form from the coefficients `d_i` of the creation operators,
    /// i.e. `Ê = Σ d_i â_i† + H.c.`, which is how the output-port fields are
    /// usually written down.
    pub fn from_creation_terms<M: Into<ModeId>>(terms: impl IntoIterator<Item = (M, Complex64)>) -> Self {
        let mut form = Self::new();
        for (m, d) in terms {
            form.add(m, d.conj());
        }
        form
    }

    pub fn coefficient(&self, mode: &ModeId) -> Complex64 {
        self.terms.get(mode).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ModeId, &Complex64)> {
        self.terms.iter()
    }

    pub fn modes(&self) -> impl Iterator<Item = &ModeId> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ |c_i|²`
    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = Self::new();
        for (m, c) in &self.terms {
            out.add(m.clone(), c * s);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("form serializes")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormDocument {
    terms: Vec<TermDocument>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDocument {
    mode: ModeId,
    re: f64,
    im: f64,
}

impl From<LinearFieldForm> for FormDocument {
    fn from(form: LinearFieldForm) -> Self {
        FormDocument {
            terms: form
                .terms
                .into_iter()
                .map(|(mode, c)| TermDocument { mode, re: c.re, im: c.im })
                .collect(),
        }
    }
}

impl TryFrom<FormDocument> for LinearFieldForm {
    type Error = Error;

    fn try_from(doc: FormDocument) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for t in doc.terms {
            if !(t.re.is_finite() && t.im.is_finite()) {
                return Err(Error::NotFinite { name: "coefficient" });
            }
            if terms.contains_key(&t.mode) {
                return Err(Error::DuplicateMode(t.mode));
            }
            let c = Complex64::new(t.re, t.im);
            if c != Complex64::new(0.0, 0.0) {
                terms.insert(t.mode, c);
            }
        }
        Ok(LinearFieldForm { terms })
    }
}

/// Amplitude and vacuum weight of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeState {
    pub amplitude: Complex64,
    pub weight: f64,
}

impl ModeState {
    pub fn vacuum() -> Self {
        Self {
            amplitude: Complex64::new(0.0, 0.0),
            weight: 1.0,
        }
    }
}

/// Product of coherent states. Modes not listed are vacuum with weight 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoherentProductState {
    modes: BTreeMap<ModeId, ModeState>,
}

impl CoherentProductState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, mode: impl Into<ModeId>, amplitude: Complex64, weight: f64) -> Result<Self> {
        self.set(mode, amplitude, weight)?;
        Ok(self)
    }

    pub fn set(&mut self, mode: impl Into<ModeId>, amplitude: Complex64, weight: f64) -> Result<()> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::NegativeWeight {
                name: "mode weight",
                value: weight,
            });
        }
        self.modes.insert(mode.into(), ModeState { amplitude, weight });
        Ok(())
    }

    pub fn get(&self, mode: &ModeId) -> ModeState {
        self.modes.get(mode).copied().unwrap_or_else(ModeState::vacuum)
    }

    pub fn amplitude(&self, mode: &ModeId) -> Complex64 {
        self.get(mode).amplitude
    }

    pub fn weight(&self, mode: &ModeId) -> f64 {
        self.get(mode).weight
    }

    pub fn contains(&self, mode: &ModeId) -> bool {
        self.modes.contains_key(mode)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModeId, &ModeState)> {
        self.modes.iter()
    }

    /// `Σ |α_i|²`
    pub fn photon_number(&self) -> f64 {
        self.modes.values().map(|m| m.amplitude.norm_sqr()).sum()
    }

    /// Same amplitudes, every weight multiplied by `s`.
    pub fn with_weights_scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for m in out.modes.values_mut() {
            m.weight *= s;
        }
        out
    }

    /// Same weights, every amplitude multiplied by `s`.
    pub fn with_amplitudes_scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for m in out.modes.values_mut() {
            m.amplitude *= s;
        }
        out
    }
}

/// `<Ê⁽⁺⁾> = Σ c_i α_i`
pub fn positive_mean(form: &LinearFieldForm, state: &CoherentProductState) -> Complex64 {
    form.terms().map(|(m, c)| c * state.amplitude(m)).sum()
}

/// `<Ê> = Σ 2 Re(c_i α_i)`
pub fn mean(form: &LinearFieldForm, state: &CoherentProductState) -> f64 {
    2.0 * positive_mean(form, state).re
}

/// `Var(Ê) = Σ |c_i|² v_i²`. Independent of every amplitude.
pub fn variance(form: &LinearFieldForm, state: &CoherentProductState) -> f64 {
    form.terms().map(|(m, c)| c.norm_sqr() * state.weight(m)).sum()
}

/// Mean photocurrent `<Ê⁽⁻⁾Ê⁽⁺⁾> = |Σ c_i α_i|²` (normally ordered).
pub fn photocurrent_mean(form: &LinearFieldForm, state: &CoherentProductState) -> f64 {
    positive_mean(form, state).norm_sqr()
}

/// Linearized variance of `Î = Ê⁽⁻⁾Ê⁽⁺⁾`: the beat of the mean field
/// `Σ c_i α_i` against the vacuum, `|Σ c_i α_i|² · Σ_j |c_j|² v_j²`.
pub fn photocurrent_variance(form: &LinearFieldForm, state: &CoherentProductState) -> f64 {
    photocurrent_mean(form, state) * variance(form, state)
}

/// `Ê₀(t, z) = iℰ(b̂ e^{−i(ωt−kz)} − b̂† e^{i(ωt−kz)})`, the free traveling
/// field of the input beam as a single mode `b`.
pub fn build_field_free(cfg: &OpticalConfig, t: f64, z: f64) -> LinearFieldForm {
    let phase = cfg.omega * t - cfg.k * z;
    LinearFieldForm::new().with(labels::B, I * cfg.field_unit * Complex64::cis(-phase))
}

/// Free field of the input beam as forward and backward modes `bF`, `bB`,
/// each with coefficient `iℰ/√2`. With [`free_field_state`] its variance is
/// `½ℰ²(v_F² + v_B²)`, the reference noise level.
pub fn build_free_field_bidirectional(cfg: &OpticalConfig, t: f64, z: f64) -> LinearFieldForm {
    let c = I * cfg.field_unit * FRAC_1_SQRT_2;
    LinearFieldForm::new()
        .with(labels::B_FWD, c * Complex64::cis(-(cfg.omega * t - cfg.k * z)))
        .with(labels::B_BWD, c * Complex64::cis(-(cfg.omega * t + cfg.k * z)))
}

/// Coherent amplitude on `bF`; the backward vacuum `bB` is what leaves the
/// splitter toward the source, weight `T v₁² + R v₂²`.
pub fn free_field_state(cfg: &OpticalConfig) -> CoherentProductState {
    let w = &cfg.weights;
    let backward = cfg.transmittance * w.v_1sq + cfg.reflectance() * w.v_2sq;
    let mut s = CoherentProductState::new();
    s.set(labels::B_FWD, cfg.alpha, w.v_b2).expect("validated weight");
    s.set(labels::B_BWD, Complex64::new(0.0, 0.0), backward)
        .expect("validated weight");
    s
}

/// Field at port `a1`:
/// `Ê₁ = −(i/√2)ℰ{√T b̂† e^{i(ωt−kZ₁)} + â₁†(e^{i(ωt+kz₁)} − R e^{i(ωt−kz₁)}) − √(RT) â₂† e^{i(ωt−kz₁)}} + H.c.`
pub fn build_field_e1(cfg: &OpticalConfig, t: f64) -> LinearFieldForm {
    let t_ = cfg.transmittance;
    let r = cfg.reflectance();
    let pre = -I * FRAC_1_SQRT_2 * cfg.field_unit;
    let wt = cfg.omega * t;
    let fwd = Complex64::cis(wt - cfg.k * cfg.z1);
    let bwd = Complex64::cis(wt + cfg.k * cfg.z1);
    LinearFieldForm::from_creation_terms([
        (labels::B, pre * t_.sqrt() * Complex64::cis(wt - cfg.k * cfg.big_z1)),
        (labels::A1, pre * (bwd - r * fwd)),
        (labels::A2, pre * -(r * t_).sqrt() * fwd),
    ])
}

/// Field at port `a2`:
/// `Ê₂ = (i/√2)ℰ{−√R b̂† e^{i(ωt−kZ₂)} + â₂†(e^{i(ωt+kz₂)} − T e^{i(ωt−kz₂)}) − √(RT) â₁† e^{i(ωt−kz₂)}} + H.c.`
pub fn build_field_e2(cfg: &OpticalConfig, t: f64) -> LinearFieldForm {
    let t_ = cfg.transmittance;
    let r = cfg.reflectance();
    let pre = I * FRAC_1_SQRT_2 * cfg.field_unit;
    let wt = cfg.omega * t;
    let fwd = Complex64::cis(wt - cfg.k * cfg.z2);
    let bwd = Complex64::cis(wt + cfg.k * cfg.z2);
    LinearFieldForm::from_creation_terms([
        (labels::B, pre * -r.sqrt() * Complex64::cis(wt - cfg.k * cfg.big_z2)),
        (labels::A2, pre * (bwd - t_ * fwd)),
        (labels::A1, pre * -(r * t_).sqrt() * fwd),
    ])
}

/// Coherent input on `b`, vacuum on `a1`/`a2`, weights from the config.
pub fn config_state(cfg: &OpticalConfig) -> CoherentProductState {
    let w = &cfg.weights;
    let mut s = CoherentProductState::new();
    s.set(labels::B, cfg.alpha, w.v_b2).expect("validated weight");
    s.set(labels::A1, Complex64::new(0.0, 0.0), w.v_1sq)
        .expect("validated weight");
    s.set(labels::A2, Complex64::new(0.0, 0.0), w.v_2sq)
        .expect("validated weight");
    s
}

/// Lossless two-port splitter in the convention
/// `â_out1 = √T â_in1 + √R â_in2`, `â_out2 = −√R â_in1 + √T â_in2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSplitter {
    pub transmittance: f64,
    pub inputs: (ModeId, ModeId),
    pub outputs: (ModeId, ModeId),
}

impl BeamSplitter {
    pub fn new(
        transmittance: f64,
        inputs: (impl Into<ModeId>, impl Into<ModeId>),
        outputs: (impl Into<ModeId>, impl Into<ModeId>),
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(Error::OutOfRange(transmittance));
        }
        let bs = Self {
            transmittance,
            inputs: (inputs.0.into(), inputs.1.into()),
            outputs: (outputs.0.into(), outputs.1.into()),
        };
        if bs.inputs.0 == bs.inputs.1 {
            return Err(Error::DuplicateMode(bs.inputs.0));
        }
        if bs.outputs.0 == bs.outputs.1 {
            return Err(Error::DuplicateMode(bs.outputs.0));
        }
        Ok(bs)
    }

    /// `b → a1, c → a2` with the splitter's transmittance.
    pub fn standard(transmittance: f64) -> Result<Self> {
        Self::new(transmittance, (labels::B, labels::C), (labels::A1, labels::A2))
    }

    fn amplitudes(&self) -> (f64, f64) {
        (self.transmittance.sqrt(), (1.0 - self.transmittance).sqrt())
    }

    /// Pushes a product state through the splitter. Missing inputs are vacuum.
    /// Output weights are `T v_in1² + R v_in2²` and `R v_in1² + T v_in2²`.
    pub fn transform_state(&self, state: &CoherentProductState) -> Result<CoherentProductState> {
        let (st, sr) = self.amplitudes();
        let (t, r) = (self.transmittance, 1.0 - self.transmittance);
        let a = state.get(&self.inputs.0);
        let b = state.get(&self.inputs.1);
        let mut out = CoherentProductState::new();
        for (m, s) in state.iter() {
            if *m == self.inputs.0 || *m == self.inputs.1 {
                continue;
            }
            if *m == self.outputs.0 || *m == self.outputs.1 {
                return Err(Error::DuplicateMode(m.clone()));
            }
            out.modes.insert(m.clone(), *s);
        }
        out.set(
            self.outputs.0.clone(),
            st * a.amplitude + sr * b.amplitude,
            t * a.weight + r * b.weight,
        )?;
        out.set(
            self.outputs.1.clone(),
            -sr * a.amplitude + st * b.amplitude,
            r * a.weight + t * b.weight,
        )?;
        Ok(out)
    }

    /// Rewrites a form over the output modes in terms of the input modes
    /// (Heisenberg picture). Fails with `UnknownMode` if the form has no term
    /// on either output, or `DuplicateMode` if it already mentions an input.
    pub fn pull_back(&self, form: &LinearFieldForm) -> Result<LinearFieldForm> {
        let c1 = form.terms.get(&self.outputs.0).copied();
        let c2 = form.terms.get(&self.outputs.1).copied();
        if c1.is_none() && c2.is_none() {
            return Err(Error::UnknownMode(self.outputs.0.clone()));
        }
        for m in [&self.inputs.0, &self.inputs.1] {
            if form.terms.contains_key(m) && *m != self.outputs.0 && *m != self.outputs.1 {
                return Err(Error::DuplicateMode(m.clone()));
            }
        }
        let (c1, c2) = (c1.unwrap_or_default(), c2.unwrap_or_default());
        let (st, sr) = self.amplitudes();
        let mut out = LinearFieldForm::new();
        for (m, c) in form.terms() {
            if *m != self.outputs.0 && *m != self.outputs.1 {
                out.add(m.clone(), *c);
            }
        }
        out.add(self.inputs.0.clone(), st * c1 - sr * c2);
        out.add(self.inputs.1.clone(), sr * c1 + st * c2);
        Ok(out)
    }
}

/// Photocurrent field at port `a1` with the second input open:
/// `Ê⁽⁺⁾ = ℰ(â₁F e^{−i(ωt−kz)} + â₁B e^{−i(ωt+kz)})`, pulled back through the
/// splitter onto the forward and backward modes of `b` and `c`.
/// Photocurrents are in photon-flux units (`ℰ = 1`).
pub fn photocurrent_form_open(transmittance: f64, t: f64, omega: f64, k: f64, z: f64) -> Result<LinearFieldForm> {
    let at_port = LinearFieldForm::new()
        .with(labels::A1_FWD, Complex64::cis(-(omega * t - k * z)))
        .with(labels::A1_BWD, Complex64::cis(-(omega * t + k * z)));
    let fwd = BeamSplitter::new(transmittance, (labels::B_FWD, labels::C_FWD), (labels::A1_FWD, "a2F"))?;
    let bwd = BeamSplitter::new(transmittance, (labels::B_BWD, labels::C_BWD), (labels::A1_BWD, "a2B"))?;
    bwd.pull_back(&fwd.pull_back(&at_port)?)
}

/// Coherent carrier on `bF`, vacuum elsewhere with the given weights.
pub fn open_port_state(alpha: Complex64, w: &OpenPortWeights) -> Result<CoherentProductState> {
    w.validate()?;
    let zero = Complex64::new(0.0, 0.0);
    CoherentProductState::new()
        .with(labels::B_FWD, alpha, w.v_bf2)?
        .with(labels::B_BWD, zero, w.v_bb2)?
        .with(labels::C_FWD, zero, w.v_cf2)?
        .with(labels::C_BWD, zero, w.v_cb2)
}

/// Photocurrent field at port `a1` with the mirror in place, in photon-flux
/// units. Coefficients over `b`, `a1`, `a2`:
///
/// * `b`: `√T e^{−i(ωt−kZ₁)}`, the carrier path and its forward vacuum;
/// * `a2`: `−√(RT)`, its share of the backward vacuum of `b`
///   (`√T · (√T â₁ − √R â₂)`);
/// * `a1`: `T + i√(2R) sin(kz₁)`, the backward share `T` in quadrature with
///   the mirror-side standing mode, whose mode function vanishes at nodes.
///
/// Hence `Σ|c|²v² = T(v_b² + R v₂² + T v₁²) + 2R v₁² sin²(kz₁)`.
pub fn photocurrent_form_mirror(cfg: &OpticalConfig, t: f64) -> LinearFieldForm {
    let t_ = cfg.transmittance;
    let r = cfg.reflectance();
    let carrier = Complex64::cis(-(cfg.omega * t - cfg.k * cfg.big_z1));
    let clock = Complex64::cis(-cfg.omega * t);
    let standing = Complex64::new(t_, (2.0 * r).sqrt() * (cfg.k * cfg.z1).sin());
    LinearFieldForm::new()
        .with(labels::B, t_.sqrt() * carrier)
        .with(labels::A1, standing * clock)
        .with(labels::A2, -(r * t_).sqrt() * clock)
}
