//! Heisenberg group arithmetic and gauge geometry.
//!
//! A point of `H^n` is stored as `2n + 1` reals `x ‖ y ‖ t`, with
//! `z = x + i y`. The group law is
//! `(z, t)·(z', t') = (z + z', t + t' + 2 Im(z · conj z'))`.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};

type Coords = SmallVec<[f64; 7]>;

/// A group element of `H^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct HPoint {
    coords: Coords,
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    x: Vec<f64>,
    y: Vec<f64>,
    t: f64,
}

impl TryFrom<PointRepr> for HPoint {
    type Error = Error;
    fn try_from(r: PointRepr) -> Result<Self> {
        HPoint::new(&r.x, &r.y, r.t)
    }
}

impl From<HPoint> for PointRepr {
    fn from(p: HPoint) -> Self {
        PointRepr { x: p.x().to_vec(), y: p.y().to_vec(), t: p.t() }
    }
}

impl HPoint {
    /// Builds `(x + i y, t)`; `x` and `y` must have the same positive length.
    pub fn new(x: &[f64], y: &[f64], t: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { left: x.len(), right: y.len() });
        }
        if x.is_empty() {
            return Err(invalid("n", "complex dimension must be positive"));
        }
        let mut coords = Coords::with_capacity(2 * x.len() + 1);
        coords.extend_from_slice(x);
        coords.extend_from_slice(y);
        coords.push(t);
        Self::from_coords(coords)
    }

    /// Builds a point from the packed `x ‖ y ‖ t` layout.
    pub fn from_coords(coords: impl Into<SmallVec<[f64; 7]>>) -> Result<Self> {
        let coords = coords.into();
        if coords.len() < 3 || coords.len() % 2 == 0 {
            return Err(invalid("coords", format!("length {} is not 2n+1", coords.len())));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { coords })
    }

    /// Shorthand for `n = 1` points `(x + i y, t)`.
    pub fn h1(x: f64, y: f64, t: f64) -> Self {
        Self::from_coords(SmallVec::from_slice(&[x, y, t])).expect("finite H^1 point")
    }

    pub fn origin(n: usize) -> Self {
        assert!(n >= 1, "complex dimension must be positive");
        Self { coords: SmallVec::from_elem(0.0, 2 * n + 1) }
    }

    /// Complex dimension `n`.
    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    /// Homogeneous dimension `Q = 2n + 2`.
    pub fn q(&self) -> usize {
        homogeneous_dimension(self.n())
    }

    pub fn x(&self) -> &[f64] {
        &self.coords[..self.n()]
    }

    pub fn y(&self) -> &[f64] {
        let n = self.n();
        &self.coords[n..2 * n]
    }

    pub fn t(&self) -> f64 {
        self.coords[2 * self.n()]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `|z|²`.
    pub fn z_norm_sq(&self) -> f64 {
        self.coords[..2 * self.n()].iter().map(|c| c * c).sum()
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    /// Group product; panics on a dimension mismatch.
    pub fn mul(&self, rhs: &HPoint) -> HPoint {
        self.try_mul(rhs).expect("group elements of equal dimension")
    }

    pub fn try_mul(&self, rhs: &HPoint) -> Result<HPoint> {
        let n = self.n();
        if n != rhs.n() {
            return Err(Error::DimensionMismatch { left: n, right: rhs.n() });
        }
        let mut out = Coords::with_capacity(self.coords.len());
        for i in 0..2 * n {
            out.push(self.coords[i] + rhs.coords[i]);
        }
        out.push(self.t() + rhs.t() + 2.0 * symplectic(self, rhs));
        Ok(HPoint { coords: out })
    }

    /// `u⁻¹ = (-z, -t)`.
    pub fn inv(&self) -> HPoint {
        HPoint { coords: self.coords.iter().map(|c| -c).collect() }
    }

    /// `u⁻¹·v`, computed without materialising the inverse.
    pub fn inv_mul(&self, v: &HPoint) -> HPoint {
        let n = self.n();
        debug_assert_eq!(n, v.n());
        let mut out = Coords::with_capacity(self.coords.len());
        for i in 0..2 * n {
            out.push(v.coords[i] - self.coords[i]);
        }
        out.push(v.t() - self.t() - 2.0 * symplectic(self, v));
        HPoint { coords: out }
    }

    /// `δ_a u = (a z, a² t)`; panics unless `a > 0`.
    pub fn dilate(&self, a: f64) -> HPoint {
        assert!(a > 0.0 && a.is_finite(), "dilation factor must be positive");
        let n = self.n();
        let mut out = self.coords.clone();
        for c in out.iter_mut().take(2 * n) {
            *c *= a;
        }
        out[2 * n] *= a * a;
        HPoint { coords: out }
    }

    /// Korányi gauge `(|z|⁴ + t²)^{1/4}`.
    pub fn norm(&self) -> f64 {
        gauge(self.z_norm_sq(), self.t())
    }

    /// `d(u, v) = |u⁻¹ v|`; panics on a dimension mismatch.
    pub fn distance(&self, v: &HPoint) -> f64 {
        assert_eq!(self.n(), v.n(), "group elements of equal dimension");
        let n = self.n();
        let mut z2 = 0.0;
        for i in 0..2 * n {
            let d = v.coords[i] - self.coords[i];
            z2 += d * d;
        }
        gauge(z2, v.t() - self.t() - 2.0 * symplectic(self, v))
    }
}

/// `Im(z · conj z') = Σ_j (y_j x'_j − x_j y'_j)`.
fn symplectic(u: &HPoint, v: &HPoint) -> f64 {
    let n = u.n();
    (0..n).map(|j| u.coords[n + j] * v.coords[j] - u.coords[j] * v.coords[n + j]).sum()
}

/// Gauge from `|z|²` and `t`, scaled to avoid overflow in `|z|⁴`.
pub fn gauge(z2: f64, t: f64) -> f64 {
    let a = z2;
    let b = t.abs();
    let m = a.max(b);
    if m == 0.0 {
        return 0.0;
    }
    let (ra, rb) = (a / m, b / m);
    m.sqrt() * (ra * ra + rb * rb).sqrt().sqrt()
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x={:?}, y={:?}, t={})", self.x(), self.y(), self.t())
    }
}

pub fn homogeneous_dimension(n: usize) -> usize {
    2 * n + 2
}

pub fn group_mul(u: &HPoint, v: &HPoint) -> Result<HPoint> {
    u.try_mul(v)
}

pub fn group_inv(u: &HPoint) -> HPoint {
    u.inv()
}

pub fn dilate(a: f64, u: &HPoint) -> Result<HPoint> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("a", format!("dilation factor {a} must be positive")));
    }
    Ok(u.dilate(a))
}

pub fn homogeneous_norm(u: &HPoint) -> f64 {
    u.norm()
}

pub fn distance(u: &HPoint, v: &HPoint) -> Result<f64> {
    if u.n() != v.n() {
        return Err(Error::DimensionMismatch { left: u.n(), right: v.n() });
    }
    Ok(u.distance(v))
}

/// Lebesgue measure of the unit gauge ball `{|z|⁴ + t² < 1}` in `H^n`:
/// `π^{n+1/2} Γ(n/2) / ((n+1) Γ(n) Γ((n+1)/2))`, which is `π²/2` for `n = 1`.
pub fn unit_ball_volume(n: usize) -> f64 {
    assert!(n >= 1, "complex dimension must be positive");
    let nf = n as f64;
    std::f64::consts::PI.powf(nf + 0.5) * gamma(nf / 2.0) / ((nf + 1.0) * gamma(nf) * gamma((nf + 1.0) / 2.0))
}

/// The quotient `2π^{n+1/2} Γ(n/2) / ((n+1) Γ(n) Γ((n+1)/2))`.
///
/// This is exactly twice [`unit_ball_volume`]; it is kept for comparison
/// with references that quote it as the ball measure.
pub fn gamma_quotient_ball_volume(n: usize) -> f64 {
    2.0 * unit_ball_volume(n)
}

/// An open gauge ball `B(center, radius)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HBall {
    pub center: HPoint,
    pub radius: f64,
}

impl HBall {
    pub fn new(center: HPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", format!("{radius} is not a positive finite radius")));
        }
        Ok(Self { center, radius })
    }

    pub fn centered(n: usize, radius: f64) -> Result<Self> {
        Self::new(HPoint::origin(n), radius)
    }

    pub fn n(&self) -> usize {
        self.center.n()
    }

    pub fn volume(&self) -> f64 {
        ball_volume(self.n(), self.radius)
    }

    pub fn contains(&self, p: &HPoint) -> bool {
        self.center.distance(p) < self.radius
    }

    /// Image of `w` in the unit ball under `w ↦ center · δ_radius w`.
    pub fn map_from_unit(&self, w: &HPoint) -> HPoint {
        self.center.mul(&w.dilate(self.radius))
    }

    /// `δ_a B(u, r) = B(δ_a u, a r)`.
    pub fn dilate(&self, a: f64) -> HBall {
        HBall { center: self.center.dilate(a), radius: self.radius * a }
    }

    pub fn scaled(&self, lambda: f64) -> Result<HBall> {
        HBall::new(self.center.clone(), self.radius * lambda)
    }
}

/// `r^Q |B(0,1)|`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    r.powi(homogeneous_dimension(n) as i32) * unit_ball_volume(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_product() {
        let u = HPoint::h1(1.0, 0.0, 0.0);
        let v = HPoint::h1(0.0, 1.0, 0.0);
        assert_eq!(u.mul(&v), HPoint::h1(1.0, 1.0, -2.0));
    }

    #[test]
    fn inverse_and_dilation_examples() {
        let u = HPoint::h1(1.0, 2.0, 3.0);
        assert_eq!(u.inv(), HPoint::h1(-1.0, -2.0, -3.0));
        assert_eq!(HPoint::h1(1.0, 1.0, 1.0).dilate(2.0), HPoint::h1(2.0, 2.0, 4.0));
        assert!(dilate(0.0, &u).is_err());
        assert!(u.mul(&u.inv()).is_origin());
    }

    #[test]
    fn gauge_examples() {
        assert_eq!(HPoint::h1(0.0, 0.0, 4.0).norm(), 2.0);
        assert_eq!(HPoint::h1(1.0, 0.0, 0.0).norm(), 1.0);
        assert_eq!(HPoint::h1(1.0, 0.0, 0.0).distance(&HPoint::origin(1)), 1.0);
        assert!(gauge(1e200, 1e300).is_finite());
    }

    #[test]
    fn dimension_checks() {
        let u = HPoint::origin(1);
        let v = HPoint::origin(2);
        assert!(matches!(group_mul(&u, &v), Err(Error::DimensionMismatch { .. })));
        assert!(distance(&u, &v).is_err());
        assert!(HPoint::new(&[1.0], &[1.0, 2.0], 0.0).is_err());
        assert!(HPoint::new(&[f64::NAN], &[0.0], 0.0).is_err());
    }

    #[test]
    fn volumes() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((unit_ball_volume(1) - pi2 / 2.0).abs() < 1e-12);
        assert!((gamma_quotient_ball_volume(1) - pi2).abs() < 1e-12);
        // n = 2: ω_4 ∫(1-t²) dt = (π²/2)(4/3).
        assert!((unit_ball_volume(2) - 2.0 * pi2 / 3.0).abs() < 1e-12);
        let b = HBall::new(HPoint::h1(3.0, -1.0, 2.0), 2.0).unwrap();
        assert!((b.volume() - 16.0 * unit_ball_volume(1)).abs() < 1e-12);
        assert!(HBall::centered(1, 0.0).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let u = HPoint::h1(0.5, -1.0, 2.0);
        let s = serde_json::to_string(&u).unwrap();
        assert_eq!(s, r#"{"x":[0.5],"y":[-1.0],"t":2.0}"#);
        assert_eq!(serde_json::from_str::<HPoint>(&s).unwrap(), u);
    }
}
