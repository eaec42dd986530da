//! Reference frames and spherical-Earth geometry.
//!
//! Everything here assumes a spherical Earth so that the slant-range relation
//! stays exact. ECI is modeled as ECEF rotated about the z-axis by the Earth
//! rotation angle `theta0 + omega_e * t` (no precession or nutation).

use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub trait Frame: Copy + Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    const NAME: &'static str;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ecef;
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eci;
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enu;

impl Frame for Ecef {
    const NAME: &'static str = "ECEF";
}
impl Frame for Eci {
    const NAME: &'static str = "ECI";
}
impl Frame for Enu {
    const NAME: &'static str = "ENU";
}

/// A 3-vector in meters, tagged with its reference frame. Arithmetic only
/// type-checks between vectors of the same frame.
#[derive(Clone, Copy, PartialEq)]
pub struct Vec3<F: Frame> {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    frame: PhantomData<F>,
}

pub type EcefVector = Vec3<Ecef>;
pub type EciVector = Vec3<Eci>;
pub type EnuVector = Vec3<Enu>;

impl<F: Frame> fmt::Debug for Vec3<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}, {}, {}]", F::NAME, self.x, self.y, self.z)
    }
}

impl<F: Frame> Vec3<F> {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z, frame: PhantomData }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn unit(&self) -> Self {
        *self * (1.0 / self.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Rotation about +z by `angle` (counter-clockwise seen from +z), into frame `G`.
    fn rotate_z<G: Frame>(&self, angle: f64) -> Vec3<G> {
        let (s, c) = angle.sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

impl<F: Frame> Add for Vec3<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<F: Frame> AddAssign for Vec3<F> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<F: Frame> Sub for Vec3<F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<F: Frame> Neg for Vec3<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<F: Frame> Mul<f64> for Vec3<F> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl<F: Frame> Mul<Vec3<F>> for f64 {
    type Output = Vec3<F>;
    fn mul(self, rhs: Vec3<F>) -> Vec3<F> {
        rhs * self
    }
}

/// Physical constants of the (spherical) Earth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthModel {
    /// Mean radius, m.
    pub radius: f64,
    /// Gravitational parameter GM, m^3/s^2.
    pub gm: f64,
    /// Rotation rate, rad/s.
    pub rotation_rate: f64,
    /// Earth rotation angle at t = 0, rad.
    pub theta0: f64,
}

impl Default for EarthModel {
    fn default() -> Self {
        Self { radius: 6_371_000.0, gm: 3.986_004_418e14, rotation_rate: 7.292_115_9e-5, theta0: 0.0 }
    }
}

impl EarthModel {
    pub fn new(radius: f64, gm: f64, rotation_rate: f64) -> Result<Self> {
        if !(radius > 0.0 && gm > 0.0 && rotation_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "earth model constants must be positive (radius {radius}, gm {gm}, rate {rotation_rate})"
            )));
        }
        Ok(Self { radius, gm, rotation_rate, theta0: 0.0 })
    }

    pub fn with_theta0(mut self, theta0: f64) -> Self {
        self.theta0 = theta0;
        self
    }

    /// Earth rotation angle at time `t`.
    pub fn rotation_angle(&self, t: f64) -> f64 {
        self.theta0 + self.rotation_rate * t
    }

    /// Circular orbital speed at radius `r`.
    pub fn circular_speed(&self, r: f64) -> f64 {
        (self.gm / r).sqrt()
    }
}

/// Geodetic position on the spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodeticPosition {
    lat: f64,
    lon: f64,
    alt: f64,
}

impl GeodeticPosition {
    /// `lat` and `lon` in radians; `lon` is normalized into (-pi, pi].
    pub fn new(lat: f64, lon: f64, alt: f64) -> Result<Self> {
        use std::f64::consts::FRAC_PI_2;
        if !lat.is_finite() || !lon.is_finite() || !alt.is_finite() {
            return Err(Error::InvalidInput("geodetic position must be finite".into()));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&lat) {
            return Err(Error::InvalidInput(format!("latitude {lat} rad outside [-pi/2, pi/2]")));
        }
        if alt < 0.0 {
            return Err(Error::InvalidInput(format!("altitude {alt} m is negative")));
        }
        Ok(Self { lat, lon: wrap_pi(lon), alt })
    }

    pub fn from_degrees(lat_deg: f64, lon_deg: f64, alt: f64) -> Result<Self> {
        Self::new(lat_deg.to_radians(), lon_deg.to_radians(), alt)
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }
    pub fn lon(&self) -> f64 {
        self.lon
    }
    pub fn alt(&self) -> f64 {
        self.alt
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_pi(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    // identity on the target interval keeps in-range values bit-exact
    if a > -PI && a <= PI {
        return a;
    }
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Wraps an angle into [0, 2pi).
pub fn wrap_two_pi(a: f64) -> f64 {
    let w = a.rem_euclid(std::f64::consts::TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= std::f64::consts::TAU {
        0.0
    } else {
        w
    }
}

pub fn geodetic_to_ecef(p: &GeodeticPosition, earth: &EarthModel) -> EcefVector {
    let r = earth.radius + p.alt;
    let (slat, clat) = p.lat.sin_cos();
    let (slon, clon) = p.lon.sin_cos();
    EcefVector::new(r * clat * clon, r * clat * slon, r * slat)
}

pub fn ecef_to_geodetic(v: &EcefVector, earth: &EarthModel) -> Result<GeodeticPosition> {
    let r = v.norm();
    if !(r > 0.0) {
        return Err(Error::InvalidInput("cannot convert the origin to geodetic".into()));
    }
    let lat = (v.z / r).clamp(-1.0, 1.0).asin();
    let lon = v.y.atan2(v.x);
    GeodeticPosition::new(lat, lon, (r - earth.radius).max(0.0))
}

/// Local tangent basis at `p` as (east, north, up) unit vectors in ECEF.
pub fn enu_basis(p: &GeodeticPosition) -> (EcefVector, EcefVector, EcefVector) {
    let (slat, clat) = p.lat.sin_cos();
    let (slon, clon) = p.lon.sin_cos();
    let east = EcefVector::new(-slon, clon, 0.0);
    let north = EcefVector::new(-slat * clon, -slat * slon, clat);
    let up = EcefVector::new(clat * clon, clat * slon, slat);
    (east, north, up)
}

/// Expresses an ECEF offset in the local ENU frame at `p`.
pub fn ecef_offset_to_enu(d: &EcefVector, p: &GeodeticPosition) -> EnuVector {
    let (e, n, u) = enu_basis(p);
    EnuVector::new(d.dot(&e), d.dot(&n), d.dot(&u))
}

/// Maps a local ENU vector at `p` back to an ECEF offset.
pub fn enu_to_ecef_offset(v: &EnuVector, p: &GeodeticPosition) -> EcefVector {
    let (e, n, u) = enu_basis(p);
    e * v.x + n * v.y + u * v.z
}

/// Unit line-of-sight vector in ENU for azimuth `az` (from north towards east)
/// and elevation `el`.
pub fn los_enu(az: f64, el: f64) -> EnuVector {
    let (saz, caz) = az.sin_cos();
    let (sel, cel) = el.sin_cos();
    EnuVector::new(cel * saz, cel * caz, sel)
}

/// Azimuth in [0, 2pi) and elevation of an ENU direction.
pub fn az_el(v: &EnuVector) -> (f64, f64) {
    let horiz = v.x.hypot(v.y);
    (wrap_two_pi(v.x.atan2(v.y)), v.z.atan2(horiz))
}

pub fn ecef_to_eci(v: &EcefVector, t: f64, earth: &EarthModel) -> EciVector {
    v.rotate_z(earth.rotation_angle(t))
}

pub fn eci_to_ecef(v: &EciVector, t: f64, earth: &EarthModel) -> EcefVector {
    v.rotate_z(-earth.rotation_angle(t))
}

/// Slant range from an observer on the sphere of radius `earth.radius` to a
/// satellite at height `h` above that sphere, seen at elevation `el`. Positive
/// root of `r^2 + 2 Re sin(el) r - 2 Re h - h^2 = 0`.
pub fn slant_range_from_height(el: f64, h: f64, earth: &EarthModel) -> f64 {
    let re = earth.radius;
    let b = re * el.sin();
    // -b + sqrt(b^2 + c) rewritten as c / (b + sqrt(b^2 + c)) to avoid cancellation
    let c = h * (2.0 * re + h);
    c / (b + (b * b + c).sqrt())
}

/// Earth model whose sphere passes through the observer, so slant-range
/// geometry stays exact for an elevated station: heights measured from the
/// true sphere become `h - alt`.
pub fn observer_sphere(earth: &EarthModel, observer_alt: f64) -> EarthModel {
    EarthModel { radius: earth.radius + observer_alt, ..*earth }
}
