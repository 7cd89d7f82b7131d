//! Segment predicates against pedestrian cylinders and vehicle boxes.
//!
//! Frame: `x` along the street with the serving AP at 0, `y` across it from
//! the AP line towards the UE sidewalk, `z` up from the ground.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

/// Upright cylinder standing on the ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub height: f64,
}

/// Axis-aligned box standing on the ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundBox {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub height: f64,
}

const EPS: f64 = 1e-9;

impl GroundBox {
    pub fn contains(&self, p: Point3) -> bool {
        p.x >= self.x_lo - EPS
            && p.x <= self.x_hi + EPS
            && p.y >= self.y_lo - EPS
            && p.y <= self.y_hi + EPS
            && p.z >= -EPS
            && p.z <= self.height + EPS
    }
}

/// Exact test: does segment `a`-`b` pass through the solid cylinder?
pub fn segment_hits_cylinder(a: Point3, b: Point3, c: &Cylinder) -> bool {
    let (dx, dy, dz) = (b.x - a.x, b.y - a.y, b.z - a.z);
    let (ox, oy) = (a.x - c.x, a.y - c.y);
    let qa = dx * dx + dy * dy;
    let qb = 2.0 * (ox * dx + oy * dy);
    let qc = ox * ox + oy * oy - c.radius * c.radius;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if qa < 1e-18 {
        if qc > 0.0 {
            return false;
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return false;
        }
        let root = disc.sqrt();
        lo = lo.max((-qb - root) / (2.0 * qa));
        hi = hi.min((-qb + root) / (2.0 * qa));
        if lo > hi {
            return false;
        }
    }
    let (z0, z1) = (a.z + lo * dz, a.z + hi * dz);
    z0.min(z1) <= c.height && z0.max(z1) >= 0.0
}

/// Exact slab test: does segment `a`-`b` pass through the box?
pub fn segment_hits_box(a: Point3, b: Point3, bx: &GroundBox) -> bool {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for (start, delta, min, max) in
        [(a.x, b.x - a.x, bx.x_lo, bx.x_hi), (a.y, b.y - a.y, bx.y_lo, bx.y_hi), (a.z, b.z - a.z, 0.0, bx.height)]
    {
        if delta.abs() < 1e-15 {
            if start < min || start > max {
                return false;
            }
        } else {
            let t0 = (min - start) / delta;
            let t1 = (max - start) / delta;
            lo = lo.max(t0.min(t1));
            hi = hi.min(t0.max(t1));
            if lo > hi {
                return false;
            }
        }
    }
    true
}

/// Footprint test of the analytic model: only the face of the box turned
/// towards `a` is checked. If `a` lies within the box's lateral span that is
/// the front or rear face, otherwise the near side face.
pub fn facing_face_hits_box(a: Point3, b: Point3, bx: &GroundBox) -> bool {
    let (dx, dy, dz) = (b.x - a.x, b.y - a.y, b.z - a.z);
    if a.y >= bx.y_lo && a.y <= bx.y_hi {
        if dx.abs() < 1e-15 {
            return false;
        }
        let face = if dx > 0.0 { bx.x_lo } else { bx.x_hi };
        let t = (face - a.x) / dx;
        if !(t > 0.0 && t <= 1.0) {
            return false;
        }
        let y = a.y + t * dy;
        let z = a.z + t * dz;
        y >= bx.y_lo && y <= bx.y_hi && z < bx.height
    } else {
        if dy.abs() < 1e-15 {
            return false;
        }
        let face = if a.y > bx.y_hi { bx.y_hi } else { bx.y_lo };
        let t = (face - a.y) / dy;
        if !(t > 0.0 && t <= 1.0) {
            return false;
        }
        let x = a.x + t * dx;
        let z = a.z + t * dz;
        x >= bx.x_lo && x <= bx.x_hi && z < bx.height
    }
}

/// Ground-plane blockage-zone test of the analytic model.
///
/// The zone is the strip of half-width `radius` around the link's ground
/// projection, running from `a` to `radius` past the point where the ray
/// climbs above the cylinder top (or to `b`, whichever comes first).
pub fn zone_hits_cylinder(a: Point3, b: Point3, c: &Cylinder) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let d = dx.hypot(dy);
    if d < 1e-12 {
        return false;
    }
    let (ux, uy) = (dx / d, dy / d);
    let (px, py) = (c.x - a.x, c.y - a.y);
    let along = px * ux + py * uy;
    let across = (px * uy - py * ux).abs();
    if across > c.radius || along < 0.0 {
        return false;
    }
    let below = if a.z >= c.height {
        0.0
    } else if b.z > c.height {
        d * (c.height - a.z) / (b.z - a.z)
    } else {
        d
    };
    if below <= 0.0 {
        return false;
    }
    along <= (below + c.radius).min(d)
}
