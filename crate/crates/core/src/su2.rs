//! The group `SU(2)` as unit quaternions and its Lie algebra `su(2)`.
//!
//! Algebra coordinates `(c_e, c_x, c_y)` refer to the ordered basis
//! `(e, Re j, Im j)` and map to the pure quaternion `pi (c_e i + c_x j + c_y k)`.
//! Hence `exp(e) = -Id`, the maximal torus is `{exp(theta e)}` and
//! `Ad(exp(theta e))` rotates the `(Re j, Im j)` plane by `2 pi theta`, i.e.
//! multiplies `j` by `e^{2 i pi theta}`. The root `rho` evaluates to `1` on `e`
//! and the other root is `-rho`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance to `-Id` under which [`log_map`] refuses to answer.
pub const CUT_LOCUS_MARGIN: f64 = 1e-9;

/// A unit quaternion `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct GroupElement {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl From<[f64; 4]> for GroupElement {
    fn from(q: [f64; 4]) -> Self {
        // Stored unit quaternions are kept bit for bit.
        let n2: f64 = q.iter().map(|v| v * v).sum();
        if (n2 - 1.0).abs() <= 8.0 * f64::EPSILON {
            Self::raw(q[0], q[1], q[2], q[3])
        } else {
            Self::from_quaternion(q[0], q[1], q[2], q[3])
        }
    }
}

impl From<GroupElement> for [f64; 4] {
    fn from(g: GroupElement) -> Self {
        [g.w, g.x, g.y, g.z]
    }
}

impl GroupElement {
    pub const IDENTITY: Self = Self {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const NEG_IDENTITY: Self = Self {
        w: -1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalises `(w, x, y, z)` onto the unit sphere. A zero quaternion maps
    /// to the identity.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Self::IDENTITY;
        }
        Self {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        }
    }

    /// Stores the components as given. Callers guarantee unit norm.
    pub(crate) fn raw(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn quaternion(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn scalar(&self) -> f64 {
        self.w
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.w
    }

    pub fn inverse(&self) -> Self {
        Self {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// First row `(m11, m12)` of the `2 x 2` unitary matrix; the second row is
    /// `(-conj m12, conj m11)`.
    pub fn matrix_row(&self) -> (Complex64, Complex64) {
        (Complex64::new(self.w, self.x), Complex64::new(self.y, self.z))
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Rotation angle in units where `-Id` sits at distance `1` from `Id`.
    pub fn angle(&self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        v.atan2(self.w) / PI
    }

    fn mul_raw(&self, o: &Self) -> Self {
        Self {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, o: Self) -> Self {
        let p = self.mul_raw(&o);
        Self::from_quaternion(p.w, p.x, p.y, p.z)
    }
}

impl Neg for GroupElement {
    type Output = GroupElement;
    fn neg(self) -> Self {
        Self {
            w: -self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// An element of `su(2)` in the basis `(e, Re j, Im j)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct AlgebraVector {
    pub coords: [f64; 3],
}

impl From<[f64; 3]> for AlgebraVector {
    fn from(coords: [f64; 3]) -> Self {
        Self { coords }
    }
}

impl From<AlgebraVector> for [f64; 3] {
    fn from(v: AlgebraVector) -> Self {
        v.coords
    }
}

impl AlgebraVector {
    pub const ZERO: Self = Self { coords: [0.0; 3] };
    pub const E: Self = Self {
        coords: [1.0, 0.0, 0.0],
    };
    pub const RE_J: Self = Self {
        coords: [0.0, 1.0, 0.0],
    };
    pub const IM_J: Self = Self {
        coords: [0.0, 0.0, 1.0],
    };

    pub fn new(c_e: f64, c_x: f64, c_y: f64) -> Self {
        Self {
            coords: [c_e, c_x, c_y],
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// The `j`-component as the complex number `c_x + i c_y`.
    pub fn j_part(&self) -> Complex64 {
        Complex64::new(self.coords[1], self.coords[2])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coords: self.coords.map(|c| c * s),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }
}

impl Add for AlgebraVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            coords: [
                self.coords[0] + o.coords[0],
                self.coords[1] + o.coords[1],
                self.coords[2] + o.coords[2],
            ],
        }
    }
}

impl Sub for AlgebraVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            coords: [
                self.coords[0] - o.coords[0],
                self.coords[1] - o.coords[1],
                self.coords[2] - o.coords[2],
            ],
        }
    }
}

impl Neg for AlgebraVector {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

/// `exp(theta e)` in the fixed maximal torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusElement {
    pub theta: f64,
}

impl TorusElement {
    pub fn new(theta: f64) -> Self {
        Self { theta }
    }

    pub fn exp(&self) -> GroupElement {
        let (s, c) = (PI * self.theta).sin_cos();
        GroupElement::raw(c, s, 0.0, 0.0)
    }

    /// `(rho(a), -rho(a))`.
    pub fn roots(&self) -> [f64; 2] {
        [self.theta, -self.theta]
    }
}

/// `sin(pi a) / a`, stable at `a = 0`.
fn sinc_pi(a: f64) -> f64 {
    if a.abs() < 1e-5 {
        let pa2 = (PI * a) * (PI * a);
        PI * (1.0 - pa2 / 6.0 + pa2 * pa2 / 120.0)
    } else {
        (PI * a).sin() / a
    }
}

pub fn exp_map(v: &AlgebraVector) -> GroupElement {
    let a = v.norm();
    let s = sinc_pi(a);
    GroupElement::from_quaternion(
        (PI * a).cos(),
        s * v.coords[0],
        s * v.coords[1],
        s * v.coords[2],
    )
}

/// Principal logarithm; the result has norm `< 1`.
pub fn log_map(a: &GroupElement) -> Result<AlgebraVector> {
    let [x, y, z] = a.vector();
    let n = (x * x + y * y + z * z).sqrt();
    let t = n.atan2(a.w);
    let dist_to_cut = 1.0 - t / PI;
    if dist_to_cut < CUT_LOCUS_MARGIN {
        return Err(Error::CutLocus {
            distance: dist_to_cut,
        });
    }
    if n == 0.0 {
        return Ok(AlgebraVector::ZERO);
    }
    let f = t / (PI * n);
    Ok(AlgebraVector::new(f * x, f * y, f * z))
}

/// `Ad(A).v = A v A^{-1}`.
pub fn adjoint(a: &GroupElement, v: &AlgebraVector) -> AlgebraVector {
    let u = a.vector();
    let w = a.w;
    let v3 = v.coords;
    let t = cross(&u, &v3).map(|c| 2.0 * c);
    let ut = cross(&u, &t);
    AlgebraVector::new(
        v3[0] + w * t[0] + ut[0],
        v3[1] + w * t[1] + ut[1],
        v3[2] + w * t[2] + ut[2],
    )
}

/// Bi-invariant distance: the rotation angle of `A B^{-1}`, scaled so that
/// `d(Id, -Id) = 1`.
pub fn group_distance(a: &GroupElement, b: &GroupElement) -> f64 {
    if a == b {
        return 0.0;
    }
    a.mul_raw(&b.inverse()).angle()
}

/// Returns `(P, theta)` with `P A P^{-1} = exp(theta e)` and `theta in [0, 1]`.
///
/// `theta` is the conjugacy invariant `trace A = 2 cos(pi theta)`; `A = +-Id`
/// gives `P = Id`.
pub fn diagonalize(a: &GroupElement) -> (GroupElement, f64) {
    let [x, y, z] = a.vector();
    let n = (x * x + y * y + z * z).sqrt();
    if n == 0.0 {
        return (GroupElement::IDENTITY, if a.w > 0.0 { 0.0 } else { 1.0 });
    }
    let axis = [x / n, y / n, z / n];
    let theta = n.atan2(a.w) / PI;
    (rotation_onto_e(&axis, 1.0), theta)
}

/// Like [`diagonalize`], but picks the frame closest to the current one:
/// the axis of `A` is sent to `+e` or `-e`, whichever needs the smaller
/// rotation, and `theta` is the representative (mod 2) nearest `hint`.
pub fn diagonalize_near(a: &GroupElement, hint: f64) -> (GroupElement, f64) {
    let [x, y, z] = a.vector();
    let n = (x * x + y * y + z * z).sqrt();
    let (p, base) = if n == 0.0 {
        (GroupElement::IDENTITY, if a.w > 0.0 { 0.0 } else { 1.0 })
    } else {
        let axis = [x / n, y / n, z / n];
        let sign = if axis[0] >= 0.0 { 1.0 } else { -1.0 };
        (rotation_onto_e(&axis, sign), sign * n.atan2(a.w) / PI)
    };
    let shift = 2.0 * ((hint - base) / 2.0).round();
    (p, base + shift)
}

/// Rotation carrying the unit `axis` onto `sign * e`.
fn rotation_onto_e(axis: &[f64; 3], sign: f64) -> GroupElement {
    let target = [sign, 0.0, 0.0];
    let dot = axis[0] * sign;
    if dot < 0.0 {
        // Near-antipodal axes: half turn about Re j first, then the short
        // rotation of the remaining (now acute) angle.
        let half = GroupElement::raw(0.0, 0.0, 1.0, 0.0);
        let flipped = adjoint(&half, &AlgebraVector { coords: *axis }).coords;
        let c = cross(&flipped, &target);
        return GroupElement::from_quaternion(1.0 + flipped[0] * sign, c[0], c[1], c[2]) * half;
    }
    let c = cross(axis, &target);
    GroupElement::from_quaternion(1.0 + dot, c[0], c[1], c[2])
}

/// `rho(theta e) = theta`.
pub fn root_value(t: &TorusElement) -> f64 {
    t.theta
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
