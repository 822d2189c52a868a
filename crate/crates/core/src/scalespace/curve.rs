use std::io::Write;

use super::grid::GridDensity;
use super::measures::{entropy, fisher_divergence, fisher_information, kl_divergence};
use super::smoothing::smooth;
use crate::error::{Error, Result};
use crate::numeric::format_real;

pub const CURVE_HEADER: [&str; 4] = ["t", "kl", "fisher", "dkl_dt"];

/// Guard for relative residuals when the reference quantity vanishes.
const DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub kl: f64,
    pub fisher: f64,
    /// Absent at the first and last `t`.
    pub dkl_dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceCurve {
    pub points: Vec<CurvePoint>,
}

impl DivergenceCurve {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CURVE_HEADER)?;
        for p in &self.points {
            w.write_record([
                format_real(p.t),
                format_real(p.kl),
                format_real(p.fisher),
                p.dkl_dt.map(format_real).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Largest increase of `kl` between consecutive points (0 if monotone).
    pub fn max_kl_increase(&self) -> f64 {
        self.points.windows(2).map(|w| w[1].kl - w[0].kl).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyPoint {
    pub t: f64,
    pub entropy: f64,
    pub information: f64,
    pub entropy_dt: Option<f64>,
}

/// `lo, lo + step, …` up to `hi` (inclusive when it lands on the lattice).
pub fn t_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo >= 0.0 && hi > lo && step > 0.0 && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t grid {lo}:{hi}:{step} must satisfy 0 <= lo < hi and step > 0"
        )));
    }
    let span = (hi - lo) / step;
    let count = (span + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

fn check_increasing(ts: &[f64]) -> Result<()> {
    if ts.windows(2).any(|w| w[1] <= w[0]) || ts.iter().any(|t| t.is_nan() || *t < 0.0) {
        return Err(Error::InvalidArgument(
            "t grid must be nonnegative and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Three-point derivative on a possibly nonuniform lattice; `None` at the
/// ends.
fn central_derivative(ts: &[f64], ys: &[f64]) -> Vec<Option<f64>> {
    (0..ts.len())
        .map(|k| {
            if k == 0 || k + 1 == ts.len() {
                return None;
            }
            let (h1, h2) = (ts[k] - ts[k - 1], ts[k + 1] - ts[k]);
            Some(-h2 / (h1 * (h1 + h2)) * ys[k - 1] + (h2 - h1) / (h1 * h2) * ys[k] + h1 / (h2 * (h1 + h2)) * ys[k + 1])
        })
        .collect()
}

pub fn divergence_curve(p: &GridDensity, q: &GridDensity, ts: &[f64]) -> Result<DivergenceCurve> {
    p.same_geometry(q)?;
    check_increasing(ts)?;
    let mut kl = Vec::with_capacity(ts.len());
    let mut fisher = Vec::with_capacity(ts.len());
    for &t in ts {
        let (pt, qt) = (smooth(p, t)?, smooth(q, t)?);
        kl.push(kl_divergence(&pt, &qt)?);
        fisher.push(fisher_divergence(&pt, &qt)?);
    }
    let slope = central_derivative(ts, &kl);
    let points = (0..ts.len())
        .map(|k| CurvePoint {
            t: ts[k],
            kl: kl[k],
            fisher: fisher[k],
            dkl_dt: slope[k],
        })
        .collect();
    Ok(DivergenceCurve { points })
}

/// `max |dKL/dt + ½ F| / max(F, 1e−12)` over points carrying a derivative.
pub fn kl_decay_residual(curve: &DivergenceCurve) -> Result<f64> {
    let interior: Vec<&CurvePoint> = curve.points.iter().filter(|p| p.dkl_dt.is_some()).collect();
    if interior.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: interior.len(),
        });
    }
    Ok(interior
        .iter()
        .map(|p| (p.dkl_dt.unwrap_or(0.0) + 0.5 * p.fisher).abs() / p.fisher.max(DENOMINATOR_FLOOR))
        .fold(0.0, f64::max))
}

pub fn entropy_curve(p: &GridDensity, ts: &[f64]) -> Result<Vec<EntropyPoint>> {
    check_increasing(ts)?;
    let mut h = Vec::with_capacity(ts.len());
    let mut j = Vec::with_capacity(ts.len());
    for &t in ts {
        let pt = smooth(p, t)?;
        h.push(entropy(&pt)?);
        j.push(fisher_information(&pt)?);
    }
    let slope = central_derivative(ts, &h);
    Ok((0..ts.len())
        .map(|k| EntropyPoint {
            t: ts[k],
            entropy: h[k],
            information: j[k],
            entropy_dt: slope[k],
        })
        .collect())
}

/// `max |dH/dt − ½ J| / J` over interior points of the smoothing path.
pub fn debruijn_residual(p: &GridDensity, ts: &[f64]) -> Result<f64> {
    let curve = entropy_curve(p, ts)?;
    let interior: Vec<&EntropyPoint> = curve.iter().filter(|e| e.entropy_dt.is_some()).collect();
    if interior.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: interior.len(),
        });
    }
    Ok(interior
        .iter()
        .map(|e| (e.entropy_dt.unwrap_or(0.0) - 0.5 * e.information).abs() / e.information.max(DENOMINATOR_FLOOR))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::super::closed_form::{gaussian_fisher, gaussian_kl, gaussian_kl_dt};
    use super::super::GridGeometry;
    use super::*;

    fn geometry() -> GridGeometry {
        GridGeometry::line(-12.0, 12.0, 4096).unwrap()
    }

    #[test]
    fn t_grid_includes_the_endpoint() {
        let ts = t_grid(0.02, 1.0, 0.02).unwrap();
        assert_eq!(ts.len(), 50);
        assert!((ts[49] - 1.0).abs() < 1e-12);
        assert!(t_grid(1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn nonuniform_derivative_is_exact_for_quadratics() {
        let ts = [0.0, 0.1, 0.35, 0.4];
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 * t * t - t).collect();
        let d = central_derivative(&ts, &ys);
        assert!(d[0].is_none() && d[3].is_none());
        assert!((d[1].unwrap() - (0.6 - 1.0)).abs() < 1e-12);
        assert!((d[2].unwrap() - (2.1 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn identical_pair_has_flat_curve() {
        let p = GridDensity::gaussian_1d(geometry(), 0.0, 1.0).unwrap();
        let c = divergence_curve(&p, &p, &[0.0, 0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(c.points.iter().all(|r| r.kl == 0.0 && r.fisher == 0.0));
        assert_eq!(kl_decay_residual(&c).unwrap(), 0.0);
    }

    #[test]
    fn variance_pair_follows_the_closed_form() {
        let p = GridDensity::gaussian_1d(geometry(), 0.0, 1.0).unwrap();
        let q = GridDensity::gaussian_1d(geometry(), 0.0, 2.0).unwrap();
        let c = divergence_curve(&p, &q, &[0.0, 0.02, 0.04]).unwrap();
        assert!((c.points[0].fisher - 0.25).abs() < 1e-4);
        let exact = gaussian_kl_dt(0.0, 1.0, 0.0, 2.0, 0.02);
        let numeric = c.points[1].dkl_dt.unwrap();
        assert!((numeric - exact).abs() < 0.02 * exact.abs());
        for r in &c.points {
            assert!((r.kl - gaussian_kl(0.0, 1.0 + r.t, 0.0, 2.0 + r.t)).abs() < 1e-8);
        }
    }

    #[test]
    fn shifted_pair_fisher_decays() {
        let p = GridDensity::gaussian_1d(geometry(), 0.0, 1.0).unwrap();
        let q = GridDensity::gaussian_1d(geometry(), 1.0, 1.0).unwrap();
        let c = divergence_curve(&p, &q, &[0.0, 1.0]).unwrap();
        assert!((c.points[1].fisher - 0.25).abs() < 1e-3);
        assert!((c.points[1].fisher - gaussian_fisher(0.0, 2.0, 1.0, 2.0)).abs() < 1e-6);
    }

    #[test]
    fn residual_needs_interior_points() {
        let p = GridDensity::gaussian_1d(geometry(), 0.0, 1.0).unwrap();
        let c = divergence_curve(&p, &p, &[0.0, 0.1, 0.2]).unwrap();
        assert!(matches!(kl_decay_residual(&c), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn entropy_grows_under_smoothing() {
        let p = GridDensity::mixture_1d(geometry(), &[(0.5, -2.0, 1.0), (0.5, 2.0, 1.0)]).unwrap();
        let c = entropy_curve(&p, &[0.0, 0.25, 0.5, 0.75]).unwrap();
        assert!(c.windows(2).all(|w| w[1].entropy > w[0].entropy));
    }

    #[test]
    fn csv_leaves_missing_derivatives_empty() {
        let curve = DivergenceCurve {
            points: vec![CurvePoint {
                t: 0.5,
                kl: 0.25,
                fisher: 1.0,
                dkl_dt: None,
            }],
        };
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,kl,fisher,dkl_dt\n"));
        assert!(text.trim_end().ends_with(','));
    }
}
