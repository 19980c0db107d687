//! Mixture law of the blockwise Hájek vector under independent Ising blocks.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ising::{solve_fixed_points, IsingParams};

use super::wc::WcLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockRegime {
    High,
    Critical,
    Low,
}

/// One block's contribution to the mixture.
#[derive(Debug, Clone)]
pub struct BlockComponent {
    pub params: IsingParams,
    pub share: f64,
    pub regime: BlockRegime,
    /// `|π|`, the magnitude of the relevant fixed point.
    pub pi: f64,
    /// `√(β(1−π²)² / (1 − β(1−π²)))`; zero in the critical regime.
    pub sigma: f64,
    pub mean: DVector<f64>,
    pub second_moment: DMatrix<f64>,
}

impl BlockComponent {
    pub fn new(params: IsingParams, share: f64, mean: Vec<f64>, second_moment: Vec<Vec<f64>>) -> Result<Self> {
        let k = mean.len();
        if second_moment.len() != k || second_moment.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: second_moment.len(),
            });
        }
        let (beta, h) = (params.beta(), params.h());
        let regime = if h != 0.0 || beta < 1.0 {
            BlockRegime::High
        } else if beta == 1.0 {
            BlockRegime::Critical
        } else {
            BlockRegime::Low
        };
        let pi = solve_fixed_points(&params).select(true).abs();
        let s = 1.0 - pi * pi;
        let sigma = match regime {
            BlockRegime::Critical => 0.0,
            _ => {
                let denom = 1.0 - beta * s;
                if denom <= 0.0 {
                    return Err(Error::Numerical(format!("block with beta={beta} has unstable fixed point")));
                }
                (beta * s * s / denom).sqrt()
            }
        };
        let m = DMatrix::from_fn(k, k, |i, j| second_moment[i][j]);
        Ok(BlockComponent {
            params,
            share,
            regime,
            pi,
            sigma,
            mean: DVector::from_vec(mean),
            second_moment: m,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BlockLawSpec {
    components: Vec<BlockComponent>,
    /// Symmetric square root of `Σ_k E[SSᵀ](1−π_k²) p_k²`.
    root: DMatrix<f64>,
}

impl BlockLawSpec {
    pub fn new(components: Vec<BlockComponent>) -> Result<Self> {
        let k = components.first().map(|c| c.mean.len()).ok_or_else(|| Error::param("components", "empty"))?;
        if components.iter().any(|c| c.mean.len() != k) {
            return Err(Error::param("components", "all blocks need vectors of the same dimension"));
        }
        let total: f64 = components.iter().map(|c| c.share).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("share", format!("block shares sum to {total}, not 1")));
        }
        let mut cov = DMatrix::zeros(k, k);
        for c in &components {
            if (&c.second_moment - c.second_moment.transpose()).abs().max() > 1e-12 {
                return Err(Error::NotPositiveSemidefinite("second-moment matrix is not symmetric".into()));
            }
            cov += &c.second_moment * ((1.0 - c.pi * c.pi) * c.share * c.share);
        }
        let eig = SymmetricEigen::new(cov.clone());
        let scale = cov.abs().max().max(1e-300);
        if eig.eigenvalues.iter().any(|&l| l < -1e-10 * scale) {
            return Err(Error::NotPositiveSemidefinite(format!(
                "covariance eigenvalues {:?}",
                eig.eigenvalues.as_slice()
            )));
        }
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
        let root = &eig.eigenvectors * d * eig.eigenvectors.transpose();
        Ok(BlockLawSpec { components, root })
    }

    pub fn dim(&self) -> usize {
        self.root.nrows()
    }

    pub fn components(&self) -> &[BlockComponent] {
        &self.components
    }
}

/// One draw of
/// `n^{-1/2} Σ^{1/2} Z_K + n^{-1/2} Σ_{H∪L} p_k σ_k E[S_k] Z_k + n^{-1/4} Σ_C p_k E[S_k] R_k`.
pub fn block_law_sample<R: Rng + ?Sized>(spec: &BlockLawSpec, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let nf = n as f64;
    let k = spec.dim();
    let z = DVector::from_fn(k, |_, _| StandardNormal.sample(rng));
    let mut out = &spec.root * z / nf.sqrt();
    for c in &spec.components {
        match c.regime {
            BlockRegime::Critical => {
                let r = WcLaw::shared(0.0)?.sample(rng);
                out += &c.mean * (c.share * r * nf.powf(-0.25));
            }
            _ => {
                let zk: f64 = StandardNormal.sample(rng);
                out += &c.mean * (c.share * c.sigma * zk / nf.sqrt());
            }
        }
    }
    Ok(out.iter().cloned().collect())
}
