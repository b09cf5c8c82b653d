//! Band-limited maps `T^d -> su(2)`, structured maps `T^d -> SU(2)` and their
//! Sobolev norms.
//!
//! An [`AlgebraMap`] stores complex coefficients `c(k)` in the three real basis
//! directions for every `k` in the max-norm box `|k| <= N`. Each real
//! component is real-valued on the torus, so `c(-k) = conj c(k)` holds
//! componentwise. Group-valued maps are never stored as coefficient tables;
//! a [`ConjugationChain`] keeps them as products of exactly known factors.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::arithmetic::{max_norm, Frequency};
use crate::error::{Error, Result};
use crate::su2::{adjoint, exp_map, AlgebraVector, GroupElement, TorusElement};

const ZERO3: [Complex64; 3] = [Complex64::new(0.0, 0.0); 3];

/// Default storage band for perturbations: 48 on the circle, 12 in higher
/// dimension (the grid grows as `(4N + 4)^d`).
pub fn default_band(dim: usize) -> usize {
    if dim <= 1 {
        48
    } else {
        12
    }
}

/// Uniform grid of `size^dim` points on `(R / period Z)^dim`.
///
/// `period = 2` is the double cover used for products containing torus
/// morphisms of odd winding, which are anti-periodic on the unit torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub size: usize,
    pub period: u32,
}

impl Grid {
    pub fn new(dim: usize, size: usize) -> Self {
        Self {
            dim,
            size,
            period: 1,
        }
    }

    pub fn double_cover(dim: usize, size: usize) -> Self {
        Self {
            dim,
            size,
            period: 2,
        }
    }

    /// The default oversampled grid `4N + 4` for a band `N`.
    pub fn for_band(dim: usize, band: usize) -> Self {
        Self::new(dim, 4 * band + 4)
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let h = self.period as f64 / self.size as f64;
        let mut x = vec![0.0; self.dim];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            x[axis] = (rest % self.size) as f64 * h;
            rest /= self.size;
        }
        x
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Flat position of frequency index `k` (negative indices wrap).
    fn slot(&self, k: &[i64]) -> usize {
        let m = self.size as i64;
        k.iter()
            .fold(0usize, |acc, &ki| acc * self.size + ki.rem_euclid(m) as usize)
    }

    /// Signed frequency index for each flat slot.
    fn index_of_slot(&self, flat: usize) -> Vec<i64> {
        let m = self.size as i64;
        let mut k = vec![0i64; self.dim];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            let j = (rest % self.size) as i64;
            k[axis] = if j > m / 2 { j - m } else { j };
            rest /= self.size;
        }
        k
    }

    fn check_band(&self, band: usize) -> Result<()> {
        let required = 2 * self.period as usize * band + 2;
        if self.size < required {
            return Err(Error::Undersampled {
                band,
                required,
                got: self.size,
            });
        }
        Ok(())
    }
}

/// In-place `d`-dimensional DFT over a row-major `size^dim` array
/// (unnormalised in both directions).
pub(crate) fn fft_nd(data: &mut [Complex64], dim: usize, size: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(size)
    } else {
        planner.plan_fft_forward(size)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); size];
    let total = data.len();
    for axis in 0..dim {
        let stride = size.pow((dim - 1 - axis) as u32);
        let block = stride * size;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
}

/// A trigonometric polynomial `T^d -> su(2)` with modes in `|k|_max <= band`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraMap {
    dim: usize,
    band: usize,
    coeffs: Vec<[Complex64; 3]>,
}

impl AlgebraMap {
    pub fn zeros(dim: usize, band: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            dim,
            band,
            coeffs: vec![ZERO3; (2 * band + 1).pow(dim as u32)],
        }
    }

    pub fn constant(dim: usize, band: usize, v: AlgebraVector) -> Self {
        let mut m = Self::zeros(dim, band);
        let zero = vec![0; dim];
        let i = m.index(&zero).expect("origin is always in the box");
        m.coeffs[i] = v.coords.map(|c| Complex64::new(c, 0.0));
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band(&self) -> usize {
        self.band
    }

    fn side(&self) -> usize {
        2 * self.band + 1
    }

    pub(crate) fn index(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim || max_norm(k) > self.band as u64 {
            return None;
        }
        let n = self.band as i64;
        Some(
            k.iter()
                .fold(0usize, |acc, &ki| acc * self.side() + (ki + n) as usize),
        )
    }

    fn mode_of(&self, idx: usize) -> Vec<i64> {
        let n = self.band as i64;
        let mut k = vec![0i64; self.dim];
        let mut rest = idx;
        for axis in (0..self.dim).rev() {
            k[axis] = (rest % self.side()) as i64 - n;
            rest /= self.side();
        }
        k
    }

    /// Coefficient at `k`; zero outside the band.
    pub fn coeff(&self, k: &[i64]) -> [Complex64; 3] {
        self.index(k).map_or(ZERO3, |i| self.coeffs[i])
    }

    /// Sets `c(k)` and `c(-k) = conj c(k)`. At `k = 0` only the real part is kept.
    pub fn set_mode(&mut self, k: &[i64], c: [Complex64; 3]) -> Result<()> {
        let i = self.index(k).ok_or_else(|| {
            Error::InvalidParameter(format!("mode {k:?} outside band {}", self.band))
        })?;
        let neg: Vec<i64> = k.iter().map(|v| -v).collect();
        let j = self.index(&neg).expect("box is symmetric");
        if i == j {
            self.coeffs[i] = c.map(|v| Complex64::new(v.re, 0.0));
        } else {
            self.coeffs[i] = c;
            self.coeffs[j] = c.map(|v| v.conj());
        }
        Ok(())
    }

    /// All `(k, c(k))` in the box, including zero coefficients.
    pub fn modes(&self) -> impl Iterator<Item = (Vec<i64>, [Complex64; 3])> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.mode_of(i), *c))
    }

    /// The `j` part `c_x(k) + i c_y(k)` of the mode `k`: the Fourier
    /// coefficient of the complex function `F_x + i F_y`.
    pub fn j_coeff(&self, k: &[i64]) -> Complex64 {
        let c = self.coeff(k);
        c[1] + Complex64::i() * c[2]
    }

    /// Builds a map from the torus coefficients `e(k)` (Hermitian) and the
    /// coefficients `z(k)` of the complex function `F_x + i F_y` (arbitrary).
    pub(crate) fn from_torus_and_j(
        dim: usize,
        band: usize,
        e: impl Fn(&[i64]) -> Complex64,
        z: impl Fn(&[i64]) -> Complex64,
    ) -> Self {
        let mut m = Self::zeros(dim, band);
        for idx in 0..m.coeffs.len() {
            let k = m.mode_of(idx);
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            let zk = z(&k);
            let zn = z(&neg).conj();
            let ek = e(&k);
            let en = e(&neg).conj();
            m.coeffs[idx] = [
                0.5 * (ek + en),
                0.5 * (zk + zn),
                (zk - zn) * Complex64::new(0.0, -0.5),
            ];
        }
        m
    }

    /// Pointwise value by direct summation.
    pub fn evaluate(&self, x: &[f64]) -> AlgebraVector {
        let mut acc = [0.0f64; 3];
        for (k, c) in self.modes() {
            if c.iter().all(|v| v.re == 0.0 && v.im == 0.0) {
                continue;
            }
            let phase: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
            let w = Complex64::from_polar(1.0, 2.0 * PI * phase);
            for (a, ci) in acc.iter_mut().zip(c.iter()) {
                *a += (ci * w).re;
            }
        }
        AlgebraVector { coords: acc }
    }

    /// Values on a uniform grid; requires `size >= 2 * period * band + 2`.
    pub fn synthesize(&self, grid: &Grid) -> Result<Vec<AlgebraVector>> {
        if grid.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: grid.dim,
            });
        }
        grid.check_band(self.band)?;
        let p = grid.period as i64;
        let mut out = vec![AlgebraVector::ZERO; grid.len()];
        for comp in 0..3 {
            let mut buf = vec![Complex64::new(0.0, 0.0); grid.len()];
            for (i, c) in self.coeffs.iter().enumerate() {
                let k: Vec<i64> = self.mode_of(i).iter().map(|v| v * p).collect();
                buf[grid.slot(&k)] = c[comp];
            }
            fft_nd(&mut buf, grid.dim, grid.size, true);
            for (o, b) in out.iter_mut().zip(&buf) {
                o.coords[comp] = b.re;
            }
        }
        Ok(out)
    }

    /// Discrete Fourier coefficients of grid samples restricted to `|k| <= band`,
    /// symmetrised so that the result is exactly real.
    pub fn analyze(samples: &[AlgebraVector], grid: &Grid, band: usize) -> Result<Self> {
        if grid.period != 1 {
            return Err(Error::InvalidParameter(
                "analysis of su(2)-valued maps needs a unit-period grid".into(),
            ));
        }
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        grid.check_band(band)?;
        let mut m = Self::zeros(grid.dim, band);
        let scale = 1.0 / grid.len() as f64;
        for comp in 0..3 {
            let mut buf: Vec<Complex64> = samples
                .iter()
                .map(|s| Complex64::new(s.coords[comp], 0.0))
                .collect();
            fft_nd(&mut buf, grid.dim, grid.size, false);
            for idx in 0..m.coeffs.len() {
                let k = m.mode_of(idx);
                m.coeffs[idx][comp] = buf[grid.slot(&k)] * scale;
            }
        }
        m.symmetrize();
        Ok(m)
    }

    fn symmetrize(&mut self) {
        let n = self.coeffs.len();
        // The box is symmetric, so -k sits at the mirrored flat index.
        for i in 0..n {
            let j = n - 1 - i;
            if j < i {
                break;
            }
            for comp in 0..3 {
                let a = self.coeffs[i][comp];
                let b = self.coeffs[j][comp].conj();
                let avg = 0.5 * (a + b);
                self.coeffs[i][comp] = avg;
                self.coeffs[j][comp] = avg.conj();
            }
        }
    }

    /// `x -> F(x + alpha)`.
    pub fn translate(&self, alpha: &Frequency) -> Result<Self> {
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: alpha.dim(),
            });
        }
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let k = self.mode_of(i);
            let w = Complex64::from_polar(1.0, 2.0 * PI * alpha.dot(&k));
            *c = c.map(|v| v * w);
        }
        Ok(out)
    }

    /// `(sum_k (1 + |k|^2)^s |c(k)|^2)^{1/2}` with the Euclidean `|k|`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.mode_of(i);
                let k2: f64 = k.iter().map(|&v| (v * v) as f64).sum();
                let mag: f64 = c.iter().map(|v| v.norm_sqr()).sum();
                if mag == 0.0 {
                    0.0
                } else {
                    (1.0 + k2).powf(s) * mag
                }
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Splits into modes `|k| <= cutoff` and the rest; both keep the band.
    pub fn truncate(&self, cutoff: usize) -> Result<(Self, Self)> {
        if cutoff > self.band {
            return Err(Error::InvalidParameter(format!(
                "cutoff {cutoff} exceeds band {}",
                self.band
            )));
        }
        let mut low = Self::zeros(self.dim, self.band);
        let mut high = Self::zeros(self.dim, self.band);
        for (i, c) in self.coeffs.iter().enumerate() {
            if max_norm(&self.mode_of(i)) <= cutoff as u64 {
                low.coeffs[i] = *c;
            } else {
                high.coeffs[i] = *c;
            }
        }
        Ok((low, high))
    }

    /// Re-expresses the map in another band. Returns the `H^0` norm of the
    /// modes that did not fit.
    pub fn with_band(&self, band: usize) -> (Self, f64) {
        let mut out = Self::zeros(self.dim, band);
        let mut dropped = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.mode_of(i);
            match out.index(&k) {
                Some(j) => out.coeffs[j] = *c,
                None => dropped += c.iter().map(|v| v.norm_sqr()).sum::<f64>(),
            }
        }
        (out, dropped.sqrt())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let band = self.band.max(other.band);
        let a = self.with_band(band).0;
        let b = other.with_band(band).0;
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| [f(x[0], y[0]), f(x[1], y[1]), f(x[2], y[2])])
            .collect();
        Self {
            dim: self.dim,
            band,
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.map(|v| v * s);
        }
        out
    }

    /// `x -> Ad(P).F(x)` for a constant `P`.
    pub fn adjoint_by(&self, p: &GroupElement) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            let re = adjoint(p, &AlgebraVector::new(c[0].re, c[1].re, c[2].re));
            let im = adjoint(p, &AlgebraVector::new(c[0].im, c[1].im, c[2].im));
            *c = [0, 1, 2].map(|i| Complex64::new(re.coords[i], im.coords[i]));
        }
        out
    }

    /// The constant (`k = 0`) term.
    pub fn mean(&self) -> AlgebraVector {
        let c = self.coeff(&vec![0; self.dim]);
        AlgebraVector::new(c[0].re, c[1].re, c[2].re)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.iter().all(|v| v.re == 0.0 && v.im == 0.0))
    }
}

/// JSON layout of an [`AlgebraMap`]: one row `[k_1, ..., k_d, re, im]` per
/// nonzero coefficient and basis direction.
#[derive(Serialize, Deserialize)]
struct AlgebraMapRepr {
    dim: usize,
    band: usize,
    e: Vec<Vec<f64>>,
    re_j: Vec<Vec<f64>>,
    im_j: Vec<Vec<f64>>,
}

impl Serialize for AlgebraMap {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut rows: [Vec<Vec<f64>>; 3] = Default::default();
        for (k, c) in self.modes() {
            for comp in 0..3 {
                if c[comp].re != 0.0 || c[comp].im != 0.0 {
                    let mut row: Vec<f64> = k.iter().map(|&v| v as f64).collect();
                    row.push(c[comp].re);
                    row.push(c[comp].im);
                    rows[comp].push(row);
                }
            }
        }
        let [e, re_j, im_j] = rows;
        AlgebraMapRepr {
            dim: self.dim,
            band: self.band,
            e,
            re_j,
            im_j,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for AlgebraMap {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = AlgebraMapRepr::deserialize(de)?;
        if repr.dim == 0 {
            return Err(D::Error::custom("dimension must be positive"));
        }
        let mut m = AlgebraMap::zeros(repr.dim, repr.band);
        for (comp, rows) in [repr.e, repr.re_j, repr.im_j].into_iter().enumerate() {
            for row in rows {
                if row.len() != repr.dim + 2 {
                    return Err(D::Error::custom("coefficient row has the wrong length"));
                }
                let k: Vec<i64> = row[..repr.dim].iter().map(|&v| v as i64).collect();
                let i = m
                    .index(&k)
                    .ok_or_else(|| D::Error::custom(format!("mode {k:?} outside band")))?;
                m.coeffs[i][comp] = Complex64::new(row[repr.dim], row[repr.dim + 1]);
            }
        }
        let before = m.clone();
        m.symmetrize();
        let defect = m.sub(&before).sobolev_norm(0.0);
        if defect > 1e-12 * (1.0 + before.sobolev_norm(0.0)) {
            return Err(D::Error::custom("coefficients violate the reality condition"));
        }
        Ok(m)
    }
}

/// `x -> P exp((k . x) e) P^{-1}`.
///
/// Lattice points are sent to `+-Id`; for odd `k . m` the map is
/// anti-periodic, which cancels in any fibered conjugation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusMorphism {
    pub winding: Vec<i64>,
    pub frame: GroupElement,
}

impl TorusMorphism {
    pub fn new(winding: Vec<i64>) -> Self {
        Self {
            winding,
            frame: GroupElement::IDENTITY,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> GroupElement {
        let phase: f64 = self
            .winding
            .iter()
            .zip(x)
            .map(|(&k, &xi)| k as f64 * xi)
            .sum();
        let t = TorusElement::new(phase).exp();
        self.frame * t * self.frame.inverse()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainFactor {
    Constant { value: GroupElement },
    Exp { map: AlgebraMap },
    Torus { morphism: TorusMorphism },
}

impl ChainFactor {
    pub fn evaluate(&self, x: &[f64]) -> GroupElement {
        match self {
            ChainFactor::Constant { value } => *value,
            ChainFactor::Exp { map } => exp_map(&map.evaluate(x)),
            ChainFactor::Torus { morphism } => morphism.evaluate(x),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            ChainFactor::Constant { value } => ChainFactor::Constant {
                value: value.inverse(),
            },
            ChainFactor::Exp { map } => ChainFactor::Exp {
                map: map.scale(-1.0),
            },
            ChainFactor::Torus { morphism } => ChainFactor::Torus {
                morphism: TorusMorphism {
                    winding: morphism.winding.iter().map(|v| -v).collect(),
                    frame: morphism.frame,
                },
            },
        }
    }

    /// Values on `grid`, optionally at the shifted points `x + shift`.
    fn evaluate_grid(&self, grid: &Grid, shift: Option<&Frequency>) -> Result<Vec<GroupElement>> {
        match self {
            ChainFactor::Constant { value } => Ok(vec![*value; grid.len()]),
            ChainFactor::Exp { map } => {
                let m = match shift {
                    Some(a) => map.translate(a)?,
                    None => map.clone(),
                };
                Ok(m.synthesize(grid)?.iter().map(exp_map).collect())
            }
            ChainFactor::Torus { morphism } => Ok(grid
                .points()
                .map(|mut x| {
                    if let Some(a) = shift {
                        for (xi, ai) in x.iter_mut().zip(a.components()) {
                            *xi += ai;
                        }
                    }
                    morphism.evaluate(&x)
                })
                .collect()),
        }
    }
}

/// Ordered product `H = f_m ... f_1`: `factors[0]` is applied first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConjugationChain {
    pub factors: Vec<ChainFactor>,
}

impl ConjugationChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_factors(factors: Vec<ChainFactor>) -> Self {
        Self { factors }
    }

    pub fn push(&mut self, f: ChainFactor) {
        self.factors.push(f);
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// True when every factor is exactly the identity map.
    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|f| match f {
            ChainFactor::Constant { value } => *value == GroupElement::IDENTITY,
            ChainFactor::Exp { map } => map.is_zero(),
            ChainFactor::Torus { morphism } => morphism.winding.iter().all(|&k| k == 0),
        })
    }

    /// `self` followed by `other`, i.e. the map `x -> other(x) self(x)`.
    pub fn then(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self { factors }
    }

    /// The reversed chain of inverses, `H^{-1} = f_1^{-1} ... f_m^{-1}`.
    pub fn inverse(&self) -> Self {
        Self {
            factors: self.factors.iter().rev().map(|f| f.inverse()).collect(),
        }
    }

    /// Sum over torus factors of `|k|_max`.
    pub fn total_winding(&self) -> u64 {
        self.factors
            .iter()
            .map(|f| match f {
                ChainFactor::Torus { morphism } => max_norm(&morphism.winding),
                _ => 0,
            })
            .sum()
    }

    /// Largest band among the exponential factors.
    pub fn max_exp_band(&self) -> usize {
        self.factors
            .iter()
            .map(|f| match f {
                ChainFactor::Exp { map } => map.band(),
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }

    /// `H(x)`; the empty chain is the identity.
    pub fn evaluate(&self, x: &[f64]) -> GroupElement {
        self.factors
            .iter()
            .fold(GroupElement::IDENTITY, |acc, f| f.evaluate(x) * acc)
    }

    /// `H` on every grid point, optionally at `x + shift`.
    pub fn evaluate_grid(&self, grid: &Grid, shift: Option<&Frequency>) -> Result<Vec<GroupElement>> {
        let mut acc = vec![GroupElement::IDENTITY; grid.len()];
        for f in &self.factors {
            let vals = f.evaluate_grid(grid, shift)?;
            for (a, v) in acc.iter_mut().zip(vals) {
                *a = v * *a;
            }
        }
        Ok(acc)
    }

    /// `H^s` norms of the prefixes `f_1`, `f_2 f_1`, ..., `f_m ... f_1`.
    ///
    /// Each prefix is sampled on `grid` and measured through the entries of
    /// its `2 x 2` matrix (see [`group_map_sobolev_norm`]). Torus factors of
    /// odd winding need the double-cover grid.
    pub fn sobolev_partial(&self, s: f64, grid: &Grid) -> Result<Vec<f64>> {
        let period = grid.period as u64;
        let required = 2 * self.total_winding() * 2 / period + 2;
        if (grid.size as u64) < required {
            return Err(Error::Undersampled {
                band: self.total_winding() as usize,
                required: required as usize,
                got: grid.size,
            });
        }
        if period == 1 {
            let odd = self.factors.iter().any(|f| match f {
                ChainFactor::Torus { morphism } => morphism.winding.iter().any(|k| k % 2 != 0),
                _ => false,
            });
            if odd {
                return Err(Error::InvalidParameter(
                    "odd windings are anti-periodic; use Grid::double_cover".into(),
                ));
            }
        }
        let mut acc = vec![GroupElement::IDENTITY; grid.len()];
        let mut norms = Vec::with_capacity(self.len());
        for f in &self.factors {
            let vals = f.evaluate_grid(grid, None)?;
            for (a, v) in acc.iter_mut().zip(vals) {
                *a = v * *a;
            }
            norms.push(group_map_sobolev_norm(&acc, grid, s)?);
        }
        Ok(norms)
    }
}

/// `H^s` norm of a sampled map `T^d -> SU(2)` through its matrix entries:
/// `(sum over the four entries of sum_k (1 + |k|^2)^s |m_hat(k)|^2)^{1/2}`,
/// with physical frequencies `k = index / period`.
pub fn group_map_sobolev_norm(values: &[GroupElement], grid: &Grid, s: f64) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let scale = 1.0 / grid.len() as f64;
    let mut m11: Vec<Complex64> = values.iter().map(|g| g.matrix_row().0).collect();
    let mut m12: Vec<Complex64> = values.iter().map(|g| g.matrix_row().1).collect();
    fft_nd(&mut m11, grid.dim, grid.size, false);
    fft_nd(&mut m12, grid.dim, grid.size, false);
    let p = grid.period as f64;
    let mut total = 0.0;
    for slot in 0..grid.len() {
        let k = grid.index_of_slot(slot);
        let k2: f64 = k.iter().map(|&v| (v as f64 / p).powi(2)).sum();
        let w = (1.0 + k2).powf(s);
        let mag = (m11[slot] * scale).norm_sqr() + (m12[slot] * scale).norm_sqr();
        // The second matrix row has entries of the same modulus.
        total += 2.0 * w * mag;
    }
    Ok(total.sqrt())
}

/// Difference `H^s` norm between two sampled group-valued maps, entrywise.
pub fn group_map_sobolev_distance(
    a: &[GroupElement],
    b: &[GroupElement],
    grid: &Grid,
    s: f64,
) -> Result<f64> {
    if a.len() != b.len() || a.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: a.len().min(b.len()),
        });
    }
    let scale = 1.0 / grid.len() as f64;
    let mut d11: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.matrix_row().0 - y.matrix_row().0)
        .collect();
    let mut d12: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.matrix_row().1 - y.matrix_row().1)
        .collect();
    fft_nd(&mut d11, grid.dim, grid.size, false);
    fft_nd(&mut d12, grid.dim, grid.size, false);
    let p = grid.period as f64;
    let mut total = 0.0;
    for slot in 0..grid.len() {
        let k = grid.index_of_slot(slot);
        let k2: f64 = k.iter().map(|&v| (v as f64 / p).powi(2)).sum();
        total += 2.0 * (1.0 + k2).powf(s) * ((d11[slot] * scale).norm_sqr() + (d12[slot] * scale).norm_sqr());
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::group_distance;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_map(dim: usize, band: usize, seed: u64) -> AlgebraMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = AlgebraMap::zeros(dim, band);
        let modes: Vec<Vec<i64>> = m.modes().map(|(k, _)| k).collect();
        for k in modes {
            let v = [0; 3].map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            m.set_mode(&k, v).unwrap();
        }
        m
    }

    #[test]
    fn zero_map_synthesizes_to_zero() {
        let m = AlgebraMap::zeros(1, 4);
        let v = m.synthesize(&Grid::new(1, 10)).unwrap();
        assert!(v.iter().all(|x| *x == AlgebraVector::ZERO));
    }

    #[test]
    fn single_mode_synthesis() {
        let mut m = AlgebraMap::zeros(1, 3);
        m.set_mode(&[2], [c(0.5, 0.25), c(0.0, 0.0), c(0.0, -0.5)]).unwrap();
        let grid = Grid::new(1, 8);
        let vals = m.synthesize(&grid).unwrap();
        for (x, v) in grid.points().zip(&vals) {
            let w = Complex64::from_polar(1.0, 2.0 * PI * 2.0 * x[0]);
            // The real map is c e^{2 i pi k x} + conj.
            let e = 2.0 * (c(0.5, 0.25) * w).re;
            let y = 2.0 * (c(0.0, -0.5) * w).re;
            assert!((v.coords[0] - e).abs() < 1e-14);
            assert!((v.coords[2] - y).abs() < 1e-14);
            assert!(v.coords[1].abs() < 1e-14);
        }
    }

    #[test]
    fn undersampled_grid_rejected() {
        let m = AlgebraMap::zeros(1, 4);
        assert!(matches!(
            m.synthesize(&Grid::new(1, 9)),
            Err(Error::Undersampled { required: 10, .. })
        ));
        assert!(AlgebraMap::analyze(&[AlgebraVector::ZERO; 9], &Grid::new(1, 9), 4).is_err());
    }

    #[test]
    fn analyze_inverts_synthesize_2d() {
        let m = random_map(2, 3, 7);
        let grid = Grid::new(2, 8);
        let back = AlgebraMap::analyze(&m.synthesize(&grid).unwrap(), &grid, 3).unwrap();
        assert!(back.sub(&m).sobolev_norm(0.0) < 1e-13);
    }

    #[test]
    fn translate_examples() {
        let alpha = Frequency::golden();
        let k = AlgebraMap::constant(1, 2, AlgebraVector::new(0.1, 0.2, 0.3));
        assert_eq!(k.translate(&alpha).unwrap(), k);

        let mut m = AlgebraMap::zeros(1, 3);
        m.set_mode(&[3], [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let t = m.translate(&alpha).unwrap();
        let expect = Complex64::from_polar(1.0, 2.0 * PI * 3.0 * alpha.components()[0]);
        assert!((t.coeff(&[3])[0] - expect).norm() < 1e-15);

        let twice = Frequency::from_reals(&[2.0 * alpha.components()[0]]).unwrap();
        let r = random_map(1, 5, 3);
        let lhs = r.translate(&alpha).unwrap().translate(&alpha).unwrap();
        let rhs = r.translate(&twice).unwrap();
        assert!(lhs.sub(&rhs).sobolev_norm(0.0) < 1e-13);
    }

    #[test]
    fn sobolev_examples() {
        let v = AlgebraVector::new(0.3, -0.4, 1.2);
        let k = AlgebraMap::constant(2, 3, v);
        for s in [-4.0, 0.0, 2.5] {
            assert!((k.sobolev_norm(s) - v.norm()).abs() < 1e-15);
        }
        let mut m = AlgebraMap::zeros(2, 3);
        let mut coeffs = [c(0.0, 0.0); 3];
        coeffs[1] = c(1.0, 0.0);
        let i = m.index(&[2, -1]).unwrap();
        m.coeffs[i] = coeffs;
        for s in [-3.0, 1.0, 1.5] {
            let expected = (1.0 + 5.0f64).powf(s / 2.0);
            assert!((m.sobolev_norm(s) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn parseval_against_grid_quadrature() {
        let m = random_map(1, 6, 11);
        let grid = Grid::new(1, 64);
        let vals = m.synthesize(&grid).unwrap();
        let l2 = (vals.iter().map(|v| v.norm().powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
        assert!((l2 - m.sobolev_norm(0.0)).abs() < 1e-10);
    }

    #[test]
    fn truncate_examples() {
        let m = random_map(1, 5, 5);
        let (low, high) = m.truncate(5).unwrap();
        assert_eq!(low, m);
        assert!(high.is_zero());
        let (low, high) = m.truncate(0).unwrap();
        assert_eq!(low.mean(), m.mean());
        assert_eq!(high.mean(), AlgebraVector::ZERO);
        assert!(m.truncate(6).is_err());
    }

    #[test]
    fn chain_examples() {
        assert_eq!(ConjugationChain::new().evaluate(&[0.3]), GroupElement::IDENTITY);
        let p = GroupElement::from_quaternion(0.3, 0.1, -0.5, 0.2);
        let single = ConjugationChain::from_factors(vec![ChainFactor::Constant { value: p }]);
        assert_eq!(single.evaluate(&[0.7]), p);
    }

    #[test]
    fn chain_times_inverse_is_identity() {
        let chain = ConjugationChain::from_factors(vec![
            ChainFactor::Torus {
                morphism: TorusMorphism::new(vec![3]),
            },
            ChainFactor::Exp {
                map: random_map(1, 3, 9).scale(0.1),
            },
            ChainFactor::Constant {
                value: GroupElement::from_quaternion(0.1, 0.9, 0.3, -0.2),
            },
            ChainFactor::Torus {
                morphism: TorusMorphism {
                    winding: vec![-2],
                    frame: GroupElement::from_quaternion(0.5, 0.5, 0.5, 0.5),
                },
            },
        ]);
        let round = chain.then(&chain.inverse());
        for i in 0..20 {
            let x = [i as f64 / 20.0 + 0.013];
            assert!(group_distance(&round.evaluate(&x), &GroupElement::IDENTITY) < 1e-12);
        }
    }

    #[test]
    fn torus_morphism_conjugates_constants() {
        let alpha = Frequency::golden();
        let b = TorusMorphism::new(vec![3]);
        let theta = 0.17;
        for i in 0..16 {
            let x = [i as f64 / 16.0];
            let xa = [x[0] + alpha.components()[0]];
            let lhs = b.evaluate(&xa) * TorusElement::new(theta).exp() * b.evaluate(&x).inverse();
            let rhs = TorusElement::new(theta + alpha.dot(&[3])).exp();
            assert!(group_distance(&lhs, &rhs) < 1e-12);
        }
        // anti-periodic for odd winding
        let g0 = b.evaluate(&[0.2]);
        let g1 = b.evaluate(&[1.2]);
        assert!(group_distance(&g1, &(-g0)) < 1e-12);
    }

    #[test]
    fn chain_of_constants_has_constant_norms() {
        let p = GroupElement::from_quaternion(0.3, 0.1, -0.5, 0.2);
        let chain = ConjugationChain::from_factors(vec![ChainFactor::Constant { value: p }; 3]);
        let norms = chain.sobolev_partial(-2.0, &Grid::double_cover(1, 16)).unwrap();
        for n in norms {
            assert!((n - 2f64.sqrt()).abs() < 1e-13);
        }
    }

    #[test]
    fn single_morphism_negative_norm_decreases_with_winding() {
        let grid = Grid::double_cover(1, 256);
        let mut prev = f64::INFINITY;
        for k in [1i64, 2, 5, 16, 40] {
            let chain = ConjugationChain::from_factors(vec![ChainFactor::Torus {
                morphism: TorusMorphism::new(vec![k]),
            }]);
            let n = chain.sobolev_partial(-2.0, &grid).unwrap()[0];
            let kf = k as f64 / 2.0;
            let expected = 2f64.sqrt() * (1.0 + kf * kf).powf(-1.0);
            assert!((n - expected).abs() < 1e-12, "k = {k}: {n} vs {expected}");
            assert!(n < prev);
            prev = n;
        }
    }

    #[test]
    fn odd_winding_needs_double_cover() {
        let chain = ConjugationChain::from_factors(vec![ChainFactor::Torus {
            morphism: TorusMorphism::new(vec![3]),
        }]);
        assert!(chain.sobolev_partial(0.0, &Grid::new(1, 64)).is_err());
        assert!(matches!(
            chain.sobolev_partial(0.0, &Grid::double_cover(1, 4)),
            Err(Error::Undersampled { .. })
        ));
    }

    #[test]
    fn json_layout() {
        let mut m = AlgebraMap::zeros(1, 2);
        m.set_mode(&[1], [c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["e"], serde_json::json!([[-1.0, 0.5, -0.0], [1.0, 0.5, 0.0]]));
        let back: AlgebraMap = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);

        let bad = serde_json::json!({"dim": 1, "band": 1, "e": [[1.0, 0.5, 0.0]], "re_j": [], "im_j": []});
        assert!(serde_json::from_value::<AlgebraMap>(bad).is_err());
    }

    proptest! {
        #[test]
        fn synthesis_round_trip(seed in 0u64..1000, band in 0usize..6) {
            let m = random_map(1, band, seed);
            let grid = Grid::for_band(1, band);
            let back = AlgebraMap::analyze(&m.synthesize(&grid).unwrap(), &grid, band).unwrap();
            prop_assert!(back.sub(&m).sobolev_norm(0.0) < 1e-12);
        }

        #[test]
        fn translation_is_isometry(seed in 0u64..1000, a in 0.0f64..1.0, s in -5.0f64..5.0) {
            let m = random_map(1, 4, seed);
            let alpha = Frequency::new(vec![a]).unwrap();
            let t = m.translate(&alpha).unwrap();
            prop_assert!((t.sobolev_norm(s) - m.sobolev_norm(s)).abs() < 1e-12 * (1.0 + m.sobolev_norm(s)));
        }

        #[test]
        fn truncation_is_exact_split(seed in 0u64..1000, cut in 0usize..5) {
            let m = random_map(2, 4, seed);
            let (low, high) = m.truncate(cut).unwrap();
            let sum = low.add(&high);
            prop_assert_eq!(sum, m);
        }

        #[test]
        fn tail_bound(seed in 0u64..1000, cut in 0usize..5, s in 0.1f64..3.0) {
            let m = random_map(1, 5, seed);
            let (_, high) = m.truncate(cut).unwrap();
            let c2 = (cut * cut) as f64;
            prop_assert!(high.sobolev_norm(0.0) <= (1.0 + c2).powf(-s / 2.0) * m.sobolev_norm(s) + 1e-14);
        }

        #[test]
        fn synthesis_is_real(seed in 0u64..1000) {
            // Rebuild each component through the complex j-combination and
            // check the reconstructed values carry no imaginary residue.
            let m = random_map(1, 4, seed);
            let grid = Grid::for_band(1, 4);
            let vals = m.synthesize(&grid).unwrap();
            for (x, v) in grid.points().zip(&vals) {
                let mut z = Complex64::new(0.0, 0.0);
                for (k, _) in m.modes() {
                    z += m.j_coeff(&k) * Complex64::from_polar(1.0, 2.0 * PI * k[0] as f64 * x[0]);
                }
                prop_assert!((z.re - v.coords[1]).abs() < 1e-12);
                prop_assert!((z.im - v.coords[2]).abs() < 1e-12);
            }
        }
    }
}
