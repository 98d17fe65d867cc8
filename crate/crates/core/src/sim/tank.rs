//! Rectangular tank, ray-cast sonar and the wall/corner ground truth.
//!
//! Frame: `x` east, `y` north, depth positive down, headings in degrees
//! counterclockwise from `+x`. Walls are numbered counterclockwise starting
//! with the south wall.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{FelmError, Result};
use crate::tsk::ContourClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Wall {
    South = 1,
    East = 2,
    North = 3,
    West = 4,
}

impl Wall {
    pub const ALL: [Wall; 4] = [Wall::South, Wall::East, Wall::North, Wall::West];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(usize::from(id).wrapping_sub(1)).copied()
    }

    /// Direction from the tank interior towards the wall.
    pub fn normal_heading(self) -> f64 {
        match self {
            Wall::South => 270.0,
            Wall::East => 0.0,
            Wall::North => 90.0,
            Wall::West => 180.0,
        }
    }

    pub fn counterclockwise_next(self) -> Self {
        Self::ALL[usize::from(self.id()) % 4]
    }

    pub fn clockwise_next(self) -> Self {
        Self::ALL[(usize::from(self.id()) + 2) % 4]
    }
}

/// Side of the hull the sonar fan looks out of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamSide {
    Port,
    Starboard,
}

impl BeamSide {
    /// +1 when the side is counterclockwise of the heading.
    pub fn sign(self) -> f64 {
        match self {
            BeamSide::Port => 1.0,
            BeamSide::Starboard => -1.0,
        }
    }

    /// Heading that keeps `wall` abeam on this side.
    pub fn following_heading(self, wall: Wall) -> f64 {
        crate::control::wrap_degrees(wall.normal_heading() - 90.0 * self.sign())
    }

    /// Wall whose following heading is closest to `heading`.
    pub fn wall_for_heading(self, heading: f64) -> Wall {
        let mut best = Wall::South;
        let mut err = f64::INFINITY;
        for w in Wall::ALL {
            let e = crate::control::angle_error(self.following_heading(w), heading).abs();
            if e < err {
                err = e;
                best = w;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TankGeometry {
    /// Extent along `x`.
    pub width: f64,
    /// Extent along `y`.
    pub length: f64,
    pub depth: f64,
    /// Corner labelling radius around the beam footprint.
    pub corner_radius: f64,
}

impl Default for TankGeometry {
    fn default() -> Self {
        Self { width: 2.5, length: 2.5, depth: 3.5, corner_radius: 0.45 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub wall: Wall,
    pub point: (f64, f64),
}

impl TankGeometry {
    pub fn validate(&self) -> Result<()> {
        let dims = [self.width, self.length, self.depth, self.corner_radius];
        if dims.iter().any(|d| !d.is_finite()) {
            return Err(FelmError::NonFinite("tank geometry"));
        }
        if dims.iter().any(|&d| d <= 0.0) {
            return Err(FelmError::InvalidConfig("tank dimensions and corner radius must be positive".into()));
        }
        Ok(())
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.length)
    }

    /// Corners counterclockwise from the origin.
    pub fn corners(&self) -> [(f64, f64); 4] {
        [(0.0, 0.0), (self.width, 0.0), (self.width, self.length), (0.0, self.length)]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.length).contains(&y)
    }

    /// Perpendicular distance from `(x, y)` to a wall's plane.
    pub fn wall_distance(&self, wall: Wall, x: f64, y: f64) -> f64 {
        match wall {
            Wall::South => y,
            Wall::East => self.width - x,
            Wall::North => self.length - y,
            Wall::West => x,
        }
    }

    /// First wall hit by a ray from `(x, y)` at `angle` degrees.
    pub fn ray_cast(&self, x: f64, y: f64, angle: f64) -> Result<RayHit> {
        if !x.is_finite() || !y.is_finite() || !angle.is_finite() {
            return Err(FelmError::NonFinite("ray origin"));
        }
        if !self.contains(x, y) {
            return Err(FelmError::OutsideTank);
        }
        let (s, c) = angle.to_radians().sin_cos();
        let mut best = (f64::INFINITY, Wall::South);
        let mut consider = |t: f64, wall: Wall| {
            if t >= 0.0 && t < best.0 {
                best = (t, wall);
            }
        };
        if c > 0.0 {
            consider((self.width - x) / c, Wall::East);
        } else if c < 0.0 {
            consider(-x / c, Wall::West);
        }
        if s > 0.0 {
            consider((self.length - y) / s, Wall::North);
        } else if s < 0.0 {
            consider(-y / s, Wall::South);
        }
        let (t, wall) = best;
        Ok(RayHit { distance: t, wall, point: (x + t * c, y + t * s) })
    }
}

/// Beam offsets from the scan datum, in feature order.
pub const BEAM_OFFSETS: [f64; 5] = [180.0, 172.0, 164.0, 156.0, 148.0];

/// World angle of a beam. The 180 degree beam looks straight out of `side`.
pub fn beam_angle(heading: f64, offset: f64, side: BeamSide) -> f64 {
    crate::control::wrap_degrees(heading + side.sign() * (offset - 90.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SonarScan {
    pub ranges: [f64; 5],
    pub t: f64,
    pub label: ContourClass,
}

impl SonarScan {
    /// Bearing of the shortest beam relative to the 180 degree beam.
    pub fn min_range_bearing(&self, offsets: &[f64; 5]) -> f64 {
        let (i, _) = self
            .ranges
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, &r)| if r < best.1 { (i, r) } else { best });
        offsets[i] - offsets[0]
    }
}

/// Distance ahead to the wall the fan's forward beams land on.
///
/// `misalignment` is how far (deg) the hull is turned towards the followed
/// wall. Beams are resolved along and across the wall; those whose reach
/// across falls `margin` short of the abeam beam have landed on the wall
/// ahead. With none of them, the corner is taken to sit on the last beam.
pub fn front_distance(ranges: &[f64; 5], offsets: &[f64; 5], misalignment: f64, margin: f64) -> f64 {
    let resolve = |r: f64, o: f64| {
        let (across, along) = (o - 90.0 + misalignment).to_radians().sin_cos();
        (r * along, r * across)
    };
    let (_, abeam) = resolve(ranges[0], offsets[0]);
    let mut sum = 0.0;
    let mut n = 0;
    for (&r, &o) in ranges.iter().zip(offsets).skip(1) {
        let (along, across) = resolve(r, o);
        if across < abeam - margin {
            sum += along;
            n += 1;
        }
    }
    if n > 0 {
        sum / n as f64
    } else {
        let (along, across) = resolve(ranges[4], offsets[4]);
        abeam * along / across
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Noise-free beam hits for a pose.
pub fn cast_beams(tank: &TankGeometry, x: f64, y: f64, heading: f64, side: BeamSide, offsets: &[f64; 5]) -> Result<[RayHit; 5]> {
    let mut hits = [RayHit { distance: 0.0, wall: Wall::South, point: (0.0, 0.0) }; 5];
    for (hit, &offset) in hits.iter_mut().zip(offsets) {
        *hit = tank.ray_cast(x, y, beam_angle(heading, offset, side))?;
    }
    Ok(hits)
}

/// Ground truth: a corner lies inside the fan's angular sector and within
/// `corner_radius` of the polyline through the beam hit points.
pub fn contour_label(tank: &TankGeometry, x: f64, y: f64, heading: f64, side: BeamSide, offsets: &[f64; 5]) -> Result<ContourClass> {
    let hits = cast_beams(tank, x, y, heading, side, offsets)?;
    let angles = offsets.map(|o| beam_angle(heading, o, side));
    let rel: Vec<f64> = angles.iter().map(|&a| crate::control::angle_error(a, angles[0])).collect();
    let lo = rel.iter().copied().fold(0.0, f64::min);
    let hi = rel.iter().copied().fold(0.0, f64::max);

    for corner in tank.corners() {
        let bearing = (corner.1 - y).atan2(corner.0 - x).to_degrees();
        let r = crate::control::angle_error(bearing, angles[0]);
        if r < lo || r > hi {
            continue;
        }
        let near = hits
            .windows(2)
            .map(|w| segment_distance(corner, w[0].point, w[1].point))
            .fold(f64::INFINITY, f64::min);
        if near <= tank.corner_radius {
            return Ok(ContourClass::Corner);
        }
    }
    Ok(ContourClass::Wall)
}

/// Beam ranges with additive Gaussian noise, clamped to `(0, diagonal]`.
pub fn simulate_sonar<R: Rng>(
    tank: &TankGeometry,
    x: f64,
    y: f64,
    heading: f64,
    side: BeamSide,
    offsets: &[f64; 5],
    noise: f64,
    t: f64,
    rng: &mut R,
) -> Result<SonarScan> {
    let hits = cast_beams(tank, x, y, heading, side, offsets)?;
    let label = contour_label(tank, x, y, heading, side, offsets)?;
    let mut ranges = hits.map(|h| h.distance);
    if noise > 0.0 {
        let normal = Normal::new(0.0, noise).map_err(|e| FelmError::InvalidConfig(e.to_string()))?;
        for r in &mut ranges {
            *r += normal.sample(rng);
        }
    }
    let cap = tank.diagonal();
    for r in &mut ranges {
        *r = r.clamp(1e-3, cap);
    }
    Ok(SonarScan { ranges, t, label })
}
