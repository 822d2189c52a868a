//! Exact samplers. Each call seeds its own ChaCha20 stream, so output
//! depends only on `(model, n, seed)`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::dataset::Dataset;
use super::family::{Model, ModelKind, NormalizedDensity};
use crate::error::{Error, Result};

/// Index of the first cumulative value exceeding `u`.
fn invert(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

impl Model {
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample size must be >= 1".into()));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let d = self.dim();
        match self.kind() {
            ModelKind::Gaussian => {
                let (mean, _, _) = self.gaussian_parts().expect("Gaussian kind");
                let l = self.gaussian_cholesky().expect("Gaussian kind");
                let mut values = Vec::with_capacity(n * d);
                for _ in 0..n {
                    let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                    values.extend((mean + &l * z).iter());
                }
                Dataset::continuous(d, values, seed)
            }
            ModelKind::Ising | ModelKind::Potts => {
                let joint = self.joint()?;
                let mut acc = 0.0;
                let cdf: Vec<f64> = joint
                    .probs()
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
                let total = acc;
                let space = *joint.space();
                let mut symbols = Vec::with_capacity(n * d);
                for _ in 0..n {
                    let u: f64 = rng.random::<f64>() * total;
                    symbols.extend(space.decode(invert(&cdf, u)));
                }
                Dataset::discrete(d, space.alphabet_size(), symbols, seed)
            }
            ModelKind::GenGauss1D => {
                let NormalizedDensity::Grid(p) = self.exact_normalize()? else {
                    unreachable!("continuous kinds normalize on a grid")
                };
                let axis = p.geometry().axes()[0];
                let h = axis.spacing();
                let v = p.values();
                let mut cdf = vec![0.0; v.len()];
                for k in 1..v.len() {
                    cdf[k] = cdf[k - 1] + 0.5 * h * (v[k - 1] + v[k]);
                }
                let total = cdf[v.len() - 1];
                let mut values = Vec::with_capacity(n);
                for _ in 0..n {
                    let u = rng.random::<f64>() * total;
                    let k = invert(&cdf, u).max(1);
                    let span = cdf[k] - cdf[k - 1];
                    let frac = if span > 0.0 { (u - cdf[k - 1]) / span } else { 0.5 };
                    values.push(axis.coord(k - 1) + frac * h);
                }
                Dataset::continuous(1, values, seed)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::family::Graph;
    use super::*;
    use crate::scalespace::GridGeometry;

    #[test]
    fn uniform_ising_frequencies() {
        let m = Model::ising(Graph::chain(2), vec![0.0; 3]).unwrap();
        let n = 400_000;
        let data = m.sample(n, 7).unwrap();
        let t = data.tally().unwrap();
        assert_eq!(t.len(), 4);
        for (_, w) in t {
            assert!((w - 0.25).abs() < 0.005, "{w}");
        }
    }

    #[test]
    fn ising_sample_passes_chi_square() {
        let m = Model::ising_chain(3, 0.5, 0.2).unwrap();
        let joint = m.joint().unwrap();
        let n = 50_000;
        let data = m.sample(n, 11).unwrap();
        let t = data.tally().unwrap();
        let mut chi2 = 0.0;
        for (x, w) in t {
            let e = joint.prob(x).unwrap();
            chi2 += n as f64 * (w - e).powi(2) / e;
        }
        // 7 degrees of freedom; the 0.999 quantile is 24.3
        assert!(chi2 < 24.3, "chi2 = {chi2}");
    }

    #[test]
    fn gaussian_moments() {
        let data = Model::standard_gaussian(1).unwrap().sample(100_000, 3).unwrap();
        let v = data.real_values().unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.02 && (var - 1.0).abs() < 0.02);
    }

    #[test]
    fn correlated_gaussian_covariance() {
        let m = Model::gaussian(&[1.0, -1.0], &[2.0, 0.8, 1.0]).unwrap();
        let data = m.sample(200_000, 5).unwrap();
        let v = data.real_values().unwrap();
        let n = data.n() as f64;
        let (mut sx, mut sy, mut sxy) = (0.0, 0.0, 0.0);
        for r in v.chunks(2) {
            sx += r[0];
            sy += r[1];
            sxy += r[0] * r[1];
        }
        let cov = sxy / n - (sx / n) * (sy / n);
        assert!((cov - 0.8).abs() < 0.03, "{cov}");
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let m = Model::ising_chain(4, 0.5, 0.0).unwrap();
        assert_eq!(m.sample(1, 42).unwrap(), m.sample(1, 42).unwrap());
        assert_eq!(m.sample(1, 42).unwrap().n(), 1);
        assert_ne!(m.sample(100, 1).unwrap(), m.sample(100, 2).unwrap());
    }

    #[test]
    fn gen_gauss_inverse_cdf() {
        let m = Model::gen_gauss_1d(2.0, 0.5, 0.5)
            .unwrap()
            .with_quadrature(GridGeometry::line(-10.0, 10.0, 4096).unwrap())
            .unwrap();
        // alpha = 2, beta = 1/2 is N(0.5, 1) up to the tiny eps offset
        let v = m.sample(100_000, 9).unwrap();
        let xs = v.real_values().unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.5).abs() < 0.02);
        assert!(matches!(
            Model::gen_gauss_1d(2.0, 0.0, 1.0).unwrap().sample(10, 1),
            Err(Error::QuadratureBoxMissing)
        ));
    }

    #[test]
    fn large_lattices_are_refused() {
        let m = Model::ising_chain(30, 0.1, 0.0).unwrap();
        assert!(matches!(m.sample(5, 1), Err(Error::StateSpaceTooLarge { .. })));
    }
}
