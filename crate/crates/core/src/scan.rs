//! Spatial noise profiles along the probe axis and standing-wave extrema.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{variance_at, NoiseReport, Port};
use crate::config::OpticalConfig;
use crate::error::{Error, Result};
use crate::fmt_f64;

/// `|sin(kz)|` below this counts as a node, `|cos(kz)|` below it as an antinode.
pub const NODE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub z: f64,
    #[serde(flatten)]
    pub report: NoiseReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub port: Port,
    pub grid: Vec<ScanPoint>,
    pub nodes: Vec<f64>,
    pub antinodes: Vec<f64>,
}

impl ScanResult {
    pub fn min_total(&self) -> Option<&ScanPoint> {
        self.grid.iter().min_by(|a, b| a.report.total.total_cmp(&b.report.total))
    }

    pub fn max_total(&self) -> Option<&ScanPoint> {
        self.grid.iter().max_by(|a, b| a.report.total.total_cmp(&b.report.total))
    }

    pub fn any_sub_sql(&self) -> bool {
        self.grid.iter().any(|p| p.report.sub_sql)
    }

    /// CSV with header `z,total,traveling,standing,sql,sub_sql`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["z", "total", "traveling", "standing", "sql", "sub_sql"])?;
        for p in &self.grid {
            let r = &p.report;
            w.write_record([
                fmt_f64(p.z),
                fmt_f64(r.total),
                fmt_f64(r.traveling),
                fmt_f64(r.standing),
                fmt_f64(r.sql),
                r.sub_sql.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON document `{"port", "rows": [...], "nodes": [...], "antinodes": [...]}`;
    /// rows carry the CSV keys.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "port": self.port,
            "rows": self.grid,
            "nodes": self.nodes,
            "antinodes": self.antinodes,
        })
    }
}

/// `steps` evenly spaced points from `z_min` to `z_max` inclusive.
pub fn linspace(z_min: f64, z_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !(z_min.is_finite() && z_max.is_finite()) || z_max < z_min {
        return Err(Error::EmptyRange);
    }
    if steps == 1 {
        return Ok(vec![z_min]);
    }
    let span = z_max - z_min;
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                z_max
            } else {
                z_min + span * i as f64 / last
            }
        })
        .collect())
}

/// Node (`offset = 0`) or antinode (`offset = ½`) positions `(n + offset)π/k`
/// inside `[z_min, z_max]`.
fn lattice(k: f64, z_min: f64, z_max: f64, offset: f64) -> Vec<f64> {
    let lo = (k * z_min / PI - offset - NODE_TOLERANCE).ceil() as i64;
    let hi = (k * z_max / PI - offset + NODE_TOLERANCE).floor() as i64;
    (lo..=hi).map(|n| (n as f64 + offset) * PI / k).collect()
}

pub fn node_positions(k: f64, z_min: f64, z_max: f64) -> Vec<f64> {
    lattice(k, z_min, z_max, 0.0)
}

pub fn antinode_positions(k: f64, z_min: f64, z_max: f64) -> Vec<f64> {
    lattice(k, z_min, z_max, 0.5)
}

pub fn is_node(k: f64, z: f64) -> bool {
    (k * z).sin().abs() < NODE_TOLERANCE
}

pub fn is_antinode(k: f64, z: f64) -> bool {
    (k * z).cos().abs() < NODE_TOLERANCE
}

/// Locates every node and antinode in `[z_min, z_max]` and evaluates the
/// port variance there. The grid holds exactly those extrema, ascending.
pub fn find_extrema(cfg: &OpticalConfig, port: Port, z_min: f64, z_max: f64) -> Result<ScanResult> {
    if !(z_min < z_max) || cfg.k <= 0.0 {
        return Err(Error::EmptyRange);
    }
    let nodes = node_positions(cfg.k, z_min, z_max);
    let antinodes = antinode_positions(cfg.k, z_min, z_max);
    let mut zs: Vec<f64> = nodes.iter().chain(&antinodes).copied().collect();
    zs.sort_by(f64::total_cmp);
    let grid = zs
        .into_iter()
        .map(|z| ScanPoint {
            z,
            report: variance_at(cfg, port, z),
        })
        .collect();
    Ok(ScanResult {
        port,
        grid,
        nodes,
        antinodes,
    })
}

/// Evaluates the port variance over an ascending grid. `nodes`/`antinodes`
/// list the exact extremum positions spanned by the grid.
pub fn scan_variance(cfg: &OpticalConfig, port: Port, grid: &[f64]) -> Result<ScanResult> {
    check_grid(grid)?;
    let points = grid
        .par_iter()
        .map(|&z| ScanPoint {
            z,
            report: variance_at(cfg, port, z),
        })
        .collect();
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    Ok(ScanResult {
        port,
        grid: points,
        nodes: node_positions(cfg.k, lo, hi),
        antinodes: antinode_positions(cfg.k, lo, hi),
    })
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyRange);
    }
    for (i, z) in grid.iter().enumerate() {
        if !z.is_finite() {
            return Err(Error::NotFinite { name: "z" });
        }
        if i > 0 && *z <= grid[i - 1] {
            return Err(Error::NotAscending(i));
        }
    }
    Ok(())
}

/// Least-squares fit of `y ≈ offset + amplitude · sin²(k z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sin2Fit {
    pub offset: f64,
    pub amplitude: f64,
    /// Standard errors from the supplied per-point sigmas; `NaN` when the
    /// fit is unweighted.
    pub offset_err: f64,
    pub amplitude_err: f64,
}

/// Fits `offset + amplitude · sin²(k z)` to `(z, y)` samples, weighting by
/// `1/σ²` when `sigma` is given. Needs two distinct values of `sin²(kz)`.
pub fn fit_sin2(k: f64, z: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<Sin2Fit> {
    if z.len() != y.len() || z.len() < 2 || sigma.is_some_and(|s| s.len() != z.len()) {
        return Err(Error::EmptyRange);
    }
    let (mut sw, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..z.len() {
        let x = (k * z[i]).sin().powi(2);
        let w = sigma.map_or(1.0, |s| 1.0 / (s[i] * s[i]));
        sw += w;
        sx += w * x;
        sxx += w * x * x;
        sy += w * y[i];
        sxy += w * x * y[i];
    }
    let det = sw * sxx - sx * sx;
    if !(det.abs() > f64::EPSILON * sw * sxx.max(1.0)) {
        return Err(Error::EmptyRange);
    }
    let amplitude = (sw * sxy - sx * sy) / det;
    let offset = (sxx * sy - sx * sxy) / det;
    let (offset_err, amplitude_err) = if sigma.is_some() {
        ((sxx / det).sqrt(), (sw / det).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(Sin2Fit {
        offset,
        amplitude,
        offset_err,
        amplitude_err,
    })
}

/// Mean of the standing term over one spatial period `π/k`, by the midpoint
/// rule on `n` cells.
pub fn period_average(cfg: &OpticalConfig, port: Port, n: usize) -> f64 {
    let period = PI / cfg.k;
    (0..n)
        .map(|i| {
            let z = (i as f64 + 0.5) * period / n as f64;
            variance_at(cfg, port, z).standing
        })
        .sum::<f64>()
        / n as f64
}

/// Phase `k z` reduced to `[0, π)`.
pub fn reduced_phase(k: f64, z: f64) -> f64 {
    (k * z).rem_euclid(PI)
}

/// `true` when `k z` sits within `tol` of an antinode phase `(n + ½)π`.
pub fn near_antinode(k: f64, z: f64, tol: f64) -> bool {
    (reduced_phase(k, z) - FRAC_PI_2).abs() < tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn cfg(k: f64) -> OpticalConfig {
        OpticalConfig {
            k,
            ..OpticalConfig::default()
        }
    }

    #[test]
    fn extrema_unit_wavenumber() {
        let s = find_extrema(&cfg(1.0), Port::A1, 0.0, 7.0).unwrap();
        assert_eq!(s.nodes, vec![0.0, PI, 2.0 * PI]);
        assert_eq!(s.antinodes, vec![FRAC_PI_2, 3.0 * FRAC_PI_2]);
        assert_eq!(s.grid.len(), 5);
        for p in &s.grid {
            if is_node(1.0, p.z) {
                assert!((p.report.total - 0.5 * p.report.sql).abs() < 1e-15);
                assert!(p.report.sub_sql);
            } else {
                assert!(is_antinode(1.0, p.z));
                assert!((p.report.total - 1.5 * p.report.sql).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn extrema_half_wavelength_spacing() {
        let s = find_extrema(&cfg(TAU), Port::A1, 0.0, 1.0).unwrap();
        assert_eq!(s.nodes.len(), 3);
        for (got, want) in s.nodes.iter().zip([0.0, 0.5, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(s.antinodes.len(), 2);
    }

    #[test]
    fn empty_ranges_rejected() {
        assert_eq!(find_extrema(&cfg(1.0), Port::A1, 1.0, 1.0), Err(Error::EmptyRange));
        assert_eq!(scan_variance(&cfg(1.0), Port::A1, &[]), Err(Error::EmptyRange));
        assert_eq!(
            scan_variance(&cfg(1.0), Port::A1, &[0.0, 0.2, 0.1]),
            Err(Error::NotAscending(2))
        );
        assert_eq!(linspace(1.0, 0.0, 5), Err(Error::EmptyRange));
    }

    #[test]
    fn linspace_hits_both_ends() {
        let g = linspace(0.0, 1.0, 101).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[50], 0.5);
        assert_eq!(g[100], 1.0);
    }

    #[test]
    fn scan_modulation_fits_exactly() {
        let mut c = cfg(3.0).with_transmittance(0.3);
        c.weights.v_1sq = 1.7;
        let grid = linspace(0.0, 2.0, 41).unwrap();
        let s = scan_variance(&c, Port::A1, &grid).unwrap();
        let ys: Vec<f64> = s.grid.iter().map(|p| p.report.total).collect();
        let fit = fit_sin2(c.k, &grid, &ys, None).unwrap();
        assert!((fit.offset - s.grid[0].report.traveling).abs() < 1e-12);
        assert!((fit.amplitude - 2.0 * 0.7 * 1.7).abs() < 1e-12);
    }

    #[test]
    fn standing_term_averages_to_half_its_peak() {
        let mut c = cfg(2.5).with_transmittance(0.35);
        c.weights.v_1sq = 0.6;
        c.field_unit = 1.3;
        let avg = period_average(&c, Port::A1, 1000);
        assert!((avg - 1.3 * 1.3 * 0.65 * 0.6).abs() < 1e-12);
    }

    #[test]
    fn csv_header_and_rows() {
        let s = scan_variance(&cfg(TAU), Port::A1, &[0.0, 0.25]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("z,total,traveling,standing,sql,sub_sql"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 6);
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.5);
        assert_eq!(row[5], "true");
        let json = s.to_json();
        assert_eq!(json["rows"][1]["sub_sql"], false);
        assert_eq!(json["nodes"].as_array().unwrap().len(), 1);
    }
}
