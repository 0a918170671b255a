//! Brute-force number-basis simulator.
//!
//! Coherent product states are expanded in a truncated Fock basis and field
//! operators act on them through per-mode ladder matrices. Nothing here uses
//! the closed moment rules of [`crate::modes`]; it exists to check them.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{CoherentProductState, LinearFieldForm, ModeId};

/// Default bound on the number of amplitudes in the product basis.
pub const DEFAULT_CAP: usize = 1_000_000;

/// Largest coherent-state tail weight above the cutoff that
/// [`build_coherent`] accepts.
pub const MAX_DEFICIT: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationSpec {
    dim: usize,
    modes: Vec<ModeId>,
    len: usize,
}

impl TruncationSpec {
    pub fn new(dim: usize, modes: impl IntoIterator<Item = impl Into<ModeId>>) -> Result<Self> {
        Self::with_cap(dim, modes, DEFAULT_CAP)
    }

    pub fn with_cap(
        dim: usize,
        modes: impl IntoIterator<Item = impl Into<ModeId>>,
        cap: usize,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        let modes: Vec<ModeId> = modes.into_iter().map(Into::into).collect();
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::DuplicateMode(m.clone()));
            }
        }
        let requested = (dim as u128).checked_pow(modes.len() as u32).unwrap_or(u128::MAX);
        if requested > cap as u128 {
            return Err(Error::DimensionCap { requested, cap });
        }
        Ok(Self {
            dim,
            modes,
            len: requested as usize,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    /// Number of amplitudes in the product basis.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index_of(&self, mode: &ModeId) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m == mode)
            .ok_or_else(|| Error::UnknownMode(mode.clone()))
    }

    /// Stride of mode `j` in the flattened basis; the last mode varies fastest.
    fn stride(&self, j: usize) -> usize {
        self.dim.pow((self.modes.len() - 1 - j) as u32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    spec: TruncationSpec,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn spec(&self) -> &TruncationSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// Reduced photon-number distribution of one mode.
    pub fn photon_distribution(&self, mode: &ModeId) -> Result<Vec<f64>> {
        let j = self.spec.index_of(mode)?;
        let stride = self.spec.stride(j);
        let dim = self.spec.dim;
        let mut p = vec![0.0; dim];
        for (idx, a) in self.amps.iter().enumerate() {
            p[(idx / stride) % dim] += a.norm_sqr();
        }
        Ok(p)
    }

    /// CSV `n,probability` of one mode's photon-number distribution.
    pub fn write_histogram_csv<W: Write>(&self, mode: &ModeId, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "probability"])?;
        for (n, p) in self.photon_distribution(mode)?.into_iter().enumerate() {
            w.write_record([n.to_string(), crate::fmt_f64(p)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Poisson weight above the cutoff: `e^{−|α|²} Σ_{n ≥ dim} |α|^{2n}/n!`.
pub fn truncation_deficit(alpha: f64, dim: usize) -> f64 {
    let lambda = alpha * alpha;
    if lambda == 0.0 {
        return 0.0;
    }
    // log p_dim, then walk the tail until terms stop mattering
    let mut log_p = -lambda;
    for n in 1..=dim {
        log_p += lambda.ln() - (n as f64).ln();
    }
    let mut term = log_p.exp();
    let mut sum = 0.0;
    let mut n = dim;
    loop {
        sum += term;
        n += 1;
        term *= lambda / n as f64;
        if (n as f64 > lambda && term < sum * 1e-17) || n > dim + 100_000 {
            break;
        }
    }
    sum.min(1.0)
}

/// Truncated coherent product state. Modes of `spec` absent from `state`
/// are vacuum; vacuum weights in `state` are ignored (the Fock basis only
/// represents `v² = 1`).
pub fn build_coherent(state: &CoherentProductState, spec: &TruncationSpec) -> Result<StateVector> {
    for (m, _) in state.iter() {
        spec.index_of(m)?;
    }
    let dim = spec.dim;
    let mut factors = Vec::with_capacity(spec.modes.len());
    for m in &spec.modes {
        let alpha = state.amplitude(m);
        let deficit = truncation_deficit(alpha.norm(), dim);
        if deficit >= MAX_DEFICIT {
            return Err(Error::TruncationInsufficient {
                mode: m.clone(),
                alpha: alpha.norm(),
                dim,
                deficit,
            });
        }
        let mut c = Vec::with_capacity(dim);
        let mut term = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..dim {
            c.push(term);
            term *= alpha / ((n + 1) as f64).sqrt();
        }
        factors.push(c);
    }
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for f in &factors {
        amps = amps
            .iter()
            .flat_map(|a| f.iter().map(move |b| a * b))
            .collect();
    }
    Ok(StateVector {
        spec: spec.clone(),
        amps,
    })
}

/// Anything that maps state vectors to state vectors on a fixed truncation.
pub trait FockOperator {
    fn spec(&self) -> &TruncationSpec;
    fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]);

    fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; psi.len()];
        self.apply_into(psi, &mut out);
        out
    }
}

/// `out += c · â_j ψ`
fn lower_into(spec: &TruncationSpec, j: usize, c: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
    let stride = spec.stride(j);
    let dim = spec.dim;
    let sqrt: Vec<f64> = (0..dim).map(|n| (n as f64).sqrt()).collect();
    for (idx, a) in psi.iter().enumerate() {
        let n = (idx / stride) % dim;
        if n > 0 {
            out[idx - stride] += c * sqrt[n] * a;
        }
    }
}

/// `out += c · â_j† ψ`, dropping what would leave the truncated space.
fn raise_into(spec: &TruncationSpec, j: usize, c: Complex64, psi: &[Complex64], out: &mut [Complex64]) {
    let stride = spec.stride(j);
    let dim = spec.dim;
    let sqrt: Vec<f64> = (0..=dim).map(|n| (n as f64).sqrt()).collect();
    for (idx, a) in psi.iter().enumerate() {
        let n = (idx / stride) % dim;
        if n + 1 < dim {
            out[idx + stride] += c * sqrt[n + 1] * a;
        }
    }
}

/// `â_j`
#[derive(Debug, Clone)]
pub struct Lowering {
    spec: TruncationSpec,
    mode: usize,
}

impl Lowering {
    pub fn new(spec: &TruncationSpec, mode: &ModeId) -> Result<Self> {
        Ok(Self {
            mode: spec.index_of(mode)?,
            spec: spec.clone(),
        })
    }
}

impl FockOperator for Lowering {
    fn spec(&self) -> &TruncationSpec {
        &self.spec
    }

    fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        lower_into(&self.spec, self.mode, Complex64::new(1.0, 0.0), psi, out);
    }
}

/// `â_j†`
#[derive(Debug, Clone)]
pub struct Raising {
    spec: TruncationSpec,
    mode: usize,
}

impl Raising {
    pub fn new(spec: &TruncationSpec, mode: &ModeId) -> Result<Self> {
        Ok(Self {
            mode: spec.index_of(mode)?,
            spec: spec.clone(),
        })
    }
}

impl FockOperator for Raising {
    fn spec(&self) -> &TruncationSpec {
        &self.spec
    }

    fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        raise_into(&self.spec, self.mode, Complex64::new(1.0, 0.0), psi, out);
    }
}

/// `A B` (apply `B` first).
pub struct Product<'a> {
    pub left: &'a dyn FockOperator,
    pub right: &'a dyn FockOperator,
}

impl FockOperator for Product<'_> {
    fn spec(&self) -> &TruncationSpec {
        self.right.spec()
    }

    fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let mid = self.right.apply(psi);
        self.left.apply_into(&mid, out);
    }
}

/// Which part of a [`LinearFieldForm`] an operator represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// `Ê⁽⁺⁾ = Σ c_i â_i`
    Positive,
    /// `Ê⁽⁻⁾ = Σ c̄_i â_i†`
    Negative,
    /// `Ê⁽⁺⁾ + Ê⁽⁻⁾`
    Hermitian,
}

/// A [`LinearFieldForm`] materialized on a truncation.
#[derive(Debug, Clone)]
pub struct FieldOperator {
    spec: TruncationSpec,
    terms: Vec<(usize, Complex64)>,
    part: Part,
}

impl FieldOperator {
    pub fn new(form: &LinearFieldForm, spec: &TruncationSpec, part: Part) -> Result<Self> {
        let terms = form
            .terms()
            .map(|(m, c)| Ok((spec.index_of(m)?, *c)))
            .collect::<Result<_>>()?;
        Ok(Self {
            spec: spec.clone(),
            terms,
            part,
        })
    }

    pub fn hermitian(form: &LinearFieldForm, spec: &TruncationSpec) -> Result<Self> {
        Self::new(form, spec, Part::Hermitian)
    }

    pub fn with_part(&self, part: Part) -> Self {
        Self {
            part,
            ..self.clone()
        }
    }
}

impl FockOperator for FieldOperator {
    fn spec(&self) -> &TruncationSpec {
        &self.spec
    }

    fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        for &(j, c) in &self.terms {
            if self.part != Part::Negative {
                lower_into(&self.spec, j, c, psi, out);
            }
            if self.part != Part::Positive {
                raise_into(&self.spec, j, c.conj(), psi, out);
            }
        }
    }
}

fn check(op: &dyn FockOperator, state: &StateVector) -> Result<()> {
    if op.spec() != &state.spec {
        return Err(Error::DimensionMismatch);
    }
    Ok(())
}

/// `<ψ|Ô|ψ> / <ψ|ψ>` by direct contraction.
pub fn expectation(op: &dyn FockOperator, state: &StateVector) -> Result<Complex64> {
    check(op, state)?;
    let applied = op.apply(&state.amps);
    Ok(inner(&state.amps, &applied) / state.norm_sqr())
}

/// Mean and variance of a Hermitian field operator.
pub fn field_moments(op: &FieldOperator, state: &StateVector) -> Result<(f64, f64)> {
    check(op, state)?;
    let norm = state.norm_sqr();
    let applied = op.apply(&state.amps);
    let m = inner(&state.amps, &applied).re / norm;
    let second = norm_sqr(&applied) / norm;
    Ok((m, second - m * m))
}

/// Exact `<Î²> − <Î>²` for `Î = Ê⁽⁻⁾Ê⁽⁺⁾` built from the positive part of
/// `form`, including every order in `|α|`.
pub fn photocurrent_variance_exact(form: &LinearFieldForm, state: &StateVector) -> Result<f64> {
    let plus = FieldOperator::new(form, &state.spec, Part::Positive)?;
    let minus = plus.with_part(Part::Negative);
    let norm = state.norm_sqr();
    let e_plus_psi = plus.apply(&state.amps);
    let mean_i = norm_sqr(&e_plus_psi) / norm;
    let i_psi = minus.apply(&e_plus_psi);
    let second = norm_sqr(&i_psi) / norm;
    Ok(second - mean_i * mean_i)
}

/// Dense matrix of an operator, column `j` = `Ô|j>`. Only for small bases.
pub fn to_dense(op: &dyn FockOperator, max_len: usize) -> Result<Vec<Vec<Complex64>>> {
    let n = op.spec().len();
    if n > max_len {
        return Err(Error::DimensionCap {
            requested: n as u128,
            cap: max_len,
        });
    }
    let mut cols = Vec::with_capacity(n);
    let mut e = vec![ZERO; n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        cols.push(op.apply(&e));
        e[j] = ZERO;
    }
    // transpose to row-major
    Ok((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::EmptyRange);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::EmptyRange);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(dim: usize) -> TruncationSpec {
        TruncationSpec::new(dim, ["b"]).unwrap()
    }

    fn coherent(alpha: Complex64, dim: usize) -> StateVector {
        let st = CoherentProductState::new().with("b", alpha, 1.0).unwrap();
        build_coherent(&st, &single(dim)).unwrap()
    }

    #[test]
    fn spec_bounds() {
        assert_eq!(TruncationSpec::new(1, ["b"]), Err(Error::DimensionTooSmall(1)));
        assert!(matches!(
            TruncationSpec::new(40, ["a", "b", "c", "d"]),
            Err(Error::DimensionCap { .. })
        ));
        assert!(matches!(
            TruncationSpec::new(4, ["a", "a"]),
            Err(Error::DuplicateMode(_))
        ));
        assert_eq!(TruncationSpec::new(40, ["a", "b", "c"]).unwrap().len(), 64_000);
    }

    #[test]
    fn vacuum_is_ground_basis_vector() {
        let s = coherent(c(0.0, 0.0), 5);
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| *a == ZERO));
    }

    #[test]
    fn number_and_ladder_expectations() {
        let spec = single(30);
        let s = coherent(c(1.0, 0.0), 30);
        let a = Lowering::new(&spec, &"b".into()).unwrap();
        let ad = Raising::new(&spec, &"b".into()).unwrap();
        let n = expectation(&Product { left: &ad, right: &a }, &s).unwrap();
        assert!((n.re - 1.0).abs() < 1e-10);
        assert!(n.im.abs() < 1e-14);

        let spec40 = single(40);
        for alpha in [c(0.3, -0.2), c(1.5, 1.0), c(-2.0, 0.0)] {
            let s = coherent(alpha, 40);
            let a = Lowering::new(&spec40, &"b".into()).unwrap();
            assert!((expectation(&a, &s).unwrap() - alpha).norm() < 1e-9);
        }

        let s = coherent(c(0.5, 0.5), 30);
        let aad = expectation(&Product { left: &a, right: &ad }, &s).unwrap();
        let ada = expectation(&Product { left: &ad, right: &a }, &s).unwrap();
        assert!(((aad - ada).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_guard() {
        assert!(truncation_deficit(1.0, 3) > 0.05);
        assert!(truncation_deficit(2.0, 40) < 1e-20);
        let st = CoherentProductState::new().with("b", c(1.0, 0.0), 1.0).unwrap();
        assert!(matches!(
            build_coherent(&st, &single(3)),
            Err(Error::TruncationInsufficient { .. })
        ));
        let st = CoherentProductState::new().with("b", c(5.0, 0.0), 1.0).unwrap();
        assert!(matches!(
            build_coherent(&st, &single(40)),
            Err(Error::TruncationInsufficient { .. })
        ));
        let st = CoherentProductState::new().with("zz", c(1.0, 0.0), 1.0).unwrap();
        assert!(matches!(build_coherent(&st, &single(10)), Err(Error::UnknownMode(_))));
    }

    #[test]
    fn norm_reflects_deficit() {
        let s = coherent(c(0.6, 0.0), 10);
        let deficit = truncation_deficit(0.6, 10);
        assert!(deficit > 1e-12);
        assert!((1.0 - s.norm_sqr() - deficit).abs() < 1e-15);

        let st = CoherentProductState::new().with("b", c(1.2, 0.0), 1.0).unwrap();
        assert!(matches!(
            build_coherent(&st, &single(12)),
            Err(Error::TruncationInsufficient { dim: 12, .. })
        ));
    }

    #[test]
    fn dimension_mismatch_detected() {
        let s = coherent(c(0.5, 0.0), 10);
        let other = single(11);
        let a = Lowering::new(&other, &"b".into()).unwrap();
        assert_eq!(expectation(&a, &s), Err(Error::DimensionMismatch));
    }

    #[test]
    fn field_matrix_is_hermitian() {
        let spec = TruncationSpec::new(4, ["a1", "a2", "b"]).unwrap();
        let form = LinearFieldForm::new()
            .with("a1", c(0.3, -0.7))
            .with("a2", c(-1.1, 0.2))
            .with("b", c(0.0, 0.9));
        let op = FieldOperator::hermitian(&form, &spec).unwrap();
        let m = to_dense(&op, 4096).unwrap();
        for i in 0..m.len() {
            for j in 0..m.len() {
                assert!((m[i][j] - m[j][i].conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn line_fit() {
        let (s, b) = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn histogram_is_poisson() {
        let s = coherent(c(1.0, 0.0), 20);
        let p = s.photon_distribution(&"b".into()).unwrap();
        let e = (-1.0f64).exp();
        assert!((p[0] - e).abs() < 1e-15);
        assert!((p[2] - e / 2.0).abs() < 1e-15);
        let mut buf = Vec::new();
        s.write_histogram_csv(&"b".into(), &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,probability\n0,"));
    }
}
