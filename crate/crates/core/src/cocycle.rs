//! Quasi-periodic cocycles `(x, S) -> (x + alpha, A(x) S)` with fiber map
//! `A(x) = A e^{F(x)}`, fibered conjugation and iteration.

use serde::{Deserialize, Serialize};

use crate::arithmetic::Frequency;
use crate::error::{Error, Result};
use crate::fourier::{default_band, AlgebraMap, ConjugationChain, Grid};
use crate::su2::{exp_map, group_distance, log_map, GroupElement};

/// Largest allowed distance between a fiber sample and the projected mean.
pub const NORMALIZE_MARGIN: f64 = 0.5;
/// Largest allowed sup-norm gap between the logarithms and the band-limited fit.
pub const NORMALIZE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cocycle {
    pub alpha: Frequency,
    pub constant: GroupElement,
    pub perturbation: AlgebraMap,
}

/// Raw values of a fiber map on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberSamples {
    pub grid: Grid,
    pub values: Vec<GroupElement>,
}

/// Side information from [`normalize_with_report`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizeReport {
    /// Largest distance of a sample from the projected mean.
    pub max_deviation: f64,
    /// Sup over the grid of `|log(A^{-1} fiber) - F|`.
    pub truncation_error: f64,
}

impl Cocycle {
    pub fn new(alpha: Frequency, constant: GroupElement, perturbation: AlgebraMap) -> Result<Self> {
        if alpha.dim() != perturbation.dim() {
            return Err(Error::DimensionMismatch {
                expected: alpha.dim(),
                got: perturbation.dim(),
            });
        }
        Ok(Self {
            alpha,
            constant,
            perturbation,
        })
    }

    /// `(alpha, A)` with zero perturbation.
    pub fn constant(alpha: Frequency, a: GroupElement) -> Self {
        let dim = alpha.dim();
        Self {
            alpha,
            constant: a,
            perturbation: AlgebraMap::zeros(dim, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.dim()
    }

    pub fn fiber_at(&self, x: &[f64]) -> GroupElement {
        self.constant * exp_map(&self.perturbation.evaluate(x))
    }

    pub fn sample(&self, grid: &Grid) -> Result<FiberSamples> {
        let f = self.perturbation.synthesize(grid)?;
        Ok(FiberSamples {
            grid: *grid,
            values: f.iter().map(|v| self.constant * exp_map(v)).collect(),
        })
    }

    /// `Phi^n(x) = A(x + (n-1) alpha) ... A(x)`.
    pub fn iterate(&self, n: usize, x: &[f64]) -> GroupElement {
        let mut acc = GroupElement::IDENTITY;
        let mut y = x.to_vec();
        for _ in 0..n {
            acc = self.fiber_at(&y) * acc;
            for (yi, ai) in y.iter_mut().zip(self.alpha.components()) {
                *yi += ai;
            }
        }
        acc
    }

    /// Max over the default grid of `d(A^{-1} A(x), Id)`, i.e. of the rotation
    /// angle of `exp(F(x))`.
    pub fn c0_distance_to_constant(&self) -> Result<f64> {
        let grid = Grid::for_band(self.dim(), self.perturbation.band());
        Ok(self
            .perturbation
            .synthesize(&grid)?
            .iter()
            .map(|v| exp_map(v).angle())
            .fold(0.0, f64::max))
    }

    /// Max over a common grid of the pointwise distance between fibers.
    pub fn c0_distance(&self, other: &Self) -> Result<f64> {
        if self.alpha != other.alpha {
            return Err(Error::FrequencyMismatch);
        }
        let band = self.perturbation.band().max(other.perturbation.band());
        let grid = Grid::for_band(self.dim(), band);
        let a = self.sample(&grid)?;
        let b = other.sample(&grid)?;
        Ok(a.values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| group_distance(x, y))
            .fold(0.0, f64::max))
    }
}

/// Extracts `(A, F)` from raw fiber samples: `A` is the quaternion mean
/// projected back to the group and `F` the band-limited analysis of
/// `log(A^{-1} fiber)`. Fails when the reconstruction error exceeds
/// [`NORMALIZE_TOLERANCE`].
pub fn normalize(samples: &FiberSamples, alpha: &Frequency, band: usize) -> Result<Cocycle> {
    let (c, report) = normalize_with_report(samples, alpha, band)?;
    if report.truncation_error > NORMALIZE_TOLERANCE {
        return Err(Error::NotNormalizable(format!(
            "band-{band} reconstruction error {:e} exceeds {NORMALIZE_TOLERANCE:e}",
            report.truncation_error
        )));
    }
    Ok(c)
}

/// As [`normalize`], but returns the truncation error instead of failing on it.
pub fn normalize_with_report(
    samples: &FiberSamples,
    alpha: &Frequency,
    band: usize,
) -> Result<(Cocycle, NormalizeReport)> {
    let grid = samples.grid;
    if grid.dim != alpha.dim() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            got: grid.dim,
        });
    }
    if samples.values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: samples.values.len(),
        });
    }
    let mut mean = [0.0f64; 4];
    for v in &samples.values {
        if !v.quaternion().iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("fiber sample"));
        }
        for (m, c) in mean.iter_mut().zip(v.quaternion()) {
            *m += c;
        }
    }
    let len = mean.iter().map(|c| c * c).sum::<f64>().sqrt();
    if len < 1e-6 * samples.values.len() as f64 {
        return Err(Error::NotNormalizable("fiber mean vanishes".into()));
    }
    let a = GroupElement::from_quaternion(mean[0], mean[1], mean[2], mean[3]);
    let a_inv = a.inverse();
    let mut logs = Vec::with_capacity(samples.values.len());
    let mut max_deviation: f64 = 0.0;
    for v in &samples.values {
        let d = a_inv * *v;
        let dev = d.angle();
        max_deviation = max_deviation.max(dev);
        if dev >= NORMALIZE_MARGIN {
            return Err(Error::NotNormalizable(format!(
                "sample at distance {dev:.3} from the mean (margin {NORMALIZE_MARGIN})"
            )));
        }
        logs.push(log_map(&d)?);
    }
    let f = AlgebraMap::analyze(&logs, &grid, band)?;
    let fit = f.synthesize(&grid)?;
    let truncation_error = logs
        .iter()
        .zip(&fit)
        .map(|(l, s)| (*l - *s).norm())
        .fold(0.0, f64::max);
    Ok((
        Cocycle {
            alpha: alpha.clone(),
            constant: a,
            perturbation: f,
        },
        NormalizeReport {
            max_deviation,
            truncation_error,
        },
    ))
}

/// Raw samples of `H(x + alpha) A(x) H(x)^{-1}` on `grid`.
pub fn conjugate_raw(h: &ConjugationChain, phi: &Cocycle, grid: &Grid) -> Result<FiberSamples> {
    let hs = h.evaluate_grid(grid, Some(&phi.alpha))?;
    let h0 = h.evaluate_grid(grid, None)?;
    let fiber = phi.sample(grid)?;
    let values = hs
        .iter()
        .zip(&fiber.values)
        .zip(&h0)
        .map(|((a, f), b)| *a * *f * b.inverse())
        .collect();
    Ok(FiberSamples {
        grid: *grid,
        values,
    })
}

/// Fibered conjugation followed by [`normalize`] at the default band (or
/// wider if the input or the chain's windings need it). A chain of identity
/// factors returns `phi` unchanged.
pub fn conjugate(h: &ConjugationChain, phi: &Cocycle) -> Result<Cocycle> {
    let band = default_band(phi.dim())
        .max(phi.perturbation.band() + h.total_winding() as usize)
        .max(h.max_exp_band());
    conjugate_at_band(h, phi, band)
}

pub fn conjugate_at_band(h: &ConjugationChain, phi: &Cocycle, band: usize) -> Result<Cocycle> {
    if h.is_identity() {
        return Ok(phi.clone());
    }
    let grid = Grid::for_band(phi.dim(), band);
    normalize(&conjugate_raw(h, phi, &grid)?, &phi.alpha, band)
}

/// Max distance between two sample sets on the same grid.
pub fn samples_distance(a: &FiberSamples, b: &FiberSamples) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::InvalidParameter("samples live on different grids".into()));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| group_distance(x, y))
        .fold(0.0, f64::max))
}
