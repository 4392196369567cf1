use serde::{Deserialize, Serialize};

/// Planar point or direction in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    pub fn len(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        self.sub(o).len()
    }

    pub fn from_angle(theta: f64) -> Vec2 {
        Vec2::new(theta.cos(), theta.sin())
    }
}

/// Axis-aligned rectangle, `min` strictly below `max` on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        debug_assert!(min.x < max.x && min.y < max.y);
        Self { min, max }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Distance along the unit ray `origin + t*dir` to first entry into `rect`,
/// slab method. Zero when the origin already sits inside.
pub fn ray_rect_entry(origin: Vec2, dir: Vec2, rect: &Rect) -> Option<f64> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for (o, d, lo, hi) in [
        (origin.x, dir.x, rect.min.x, rect.max.x),
        (origin.y, dir.y, rect.min.y, rect.max.y),
    ] {
        if d == 0.0 {
            if o < lo || o > hi {
                return None;
            }
        } else {
            let (t0, t1) = ((lo - o) / d, (hi - o) / d);
            let (t0, t1) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            t_near = t_near.max(t0);
            t_far = t_far.min(t1);
        }
    }
    if t_near > t_far || t_far < 0.0 {
        return None;
    }
    Some(t_near.max(0.0))
}

/// Distance along the unit ray to the first exit from `rect`; the origin must
/// be inside.
pub fn ray_rect_exit(origin: Vec2, dir: Vec2, rect: &Rect) -> f64 {
    debug_assert!(rect.contains(origin));
    let mut t_exit = f64::INFINITY;
    for (o, d, lo, hi) in [
        (origin.x, dir.x, rect.min.x, rect.max.x),
        (origin.y, dir.y, rect.min.y, rect.max.y),
    ] {
        if d > 0.0 {
            t_exit = t_exit.min((hi - o) / d);
        } else if d < 0.0 {
            t_exit = t_exit.min((lo - o) / d);
        }
    }
    t_exit.max(0.0)
}

/// Fraction `t` in [0,1] where the segment `a -> b` first enters `rect`.
pub fn segment_rect_entry(a: Vec2, b: Vec2, rect: &Rect) -> Option<f64> {
    let d = b.sub(a);
    let len = d.len();
    if len == 0.0 {
        return rect.contains(a).then_some(0.0);
    }
    let t = ray_rect_entry(a, d.scale(1.0 / len), rect)?;
    (t <= len).then_some(t / len)
}

/// Fraction `t` in [0,1] where the segment `a -> b` first leaves `rect`;
/// `a` must be inside. None when the whole segment stays inside.
pub fn segment_rect_exit(a: Vec2, b: Vec2, rect: &Rect) -> Option<f64> {
    let d = b.sub(a);
    let len = d.len();
    if len == 0.0 {
        return None;
    }
    let t = ray_rect_exit(a, d.scale(1.0 / len), rect);
    (t < len).then_some(t / len)
}

/// Shortest distance from point `p` to the segment `a -> b`.
pub fn point_segment_dist(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b.sub(a);
    let len_sq = d.x * d.x + d.y * d.y;
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p.x - a.x) * d.x + (p.y - a.y) * d.y) / len_sq;
    p.dist(a.add(d.scale(t.clamp(0.0, 1.0))))
}
