use serde::Serialize;

use super::geometry::Point;

/// Oriented rectangle in pixel coordinates. `theta_deg` is the direction of
/// the `w` side measured from +x towards +y, in `[0, 180)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotatedBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub theta_deg: f64,
    /// Input had fewer than three non-collinear points; `h` is 0.
    pub degenerate: bool,
}

impl RotatedBox {
    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; counter-clockwise in a y-up frame, collinear points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

const SNAP: f64 = 1e-9;

fn canonical(cx: f64, cy: f64, mut w: f64, mut h: f64, mut theta: f64, degenerate: bool) -> RotatedBox {
    if h > w {
        std::mem::swap(&mut w, &mut h);
        theta += 90.0;
    }
    let period = if (w - h).abs() <= SNAP * w.max(1.0) { 90.0 } else { 180.0 };
    theta = theta.rem_euclid(period);
    if theta < SNAP || period - theta < SNAP {
        theta = 0.0;
    }
    RotatedBox {
        cx,
        cy,
        w,
        h,
        theta_deg: theta,
        degenerate,
    }
}

fn extent(points: &[Point], angle: f64) -> (f64, f64, f64, f64, f64) {
    let (s, c) = angle.sin_cos();
    let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        let u = x * c + y * s;
        let v = -x * s + y * c;
        u0 = u0.min(u);
        u1 = u1.max(u);
        v0 = v0.min(v);
        v1 = v1.max(v);
    }
    let (um, vm) = ((u0 + u1) / 2.0, (v0 + v1) / 2.0);
    (um * c - vm * s, um * s + vm * c, u1 - u0, v1 - v0, angle)
}

/// Minimum-area enclosing rectangle by rotating calipers over the hull edges.
/// Canonical form: `w >= h`, `theta` in `[0, 180)`, and for squares the
/// smaller of the two equivalent angles.
pub fn rotated_bbox(polygon: &[Point]) -> RotatedBox {
    let hull = convex_hull(polygon);
    match hull.len() {
        0 => canonical(0.0, 0.0, 0.0, 0.0, 0.0, true),
        1 => canonical(hull[0].0, hull[0].1, 0.0, 0.0, 0.0, true),
        2 => {
            let (a, b) = (hull[0], hull[1]);
            let angle = (b.1 - a.1).atan2(b.0 - a.0);
            let (cx, cy, w, _, _) = extent(&hull, angle);
            canonical(cx, cy, w, 0.0, angle.to_degrees(), true)
        }
        n => {
            let mut best: Option<(f64, f64, f64, f64, f64)> = None;
            for i in 0..n {
                let (a, b) = (hull[i], hull[(i + 1) % n]);
                let e = extent(&hull, (b.1 - a.1).atan2(b.0 - a.0));
                if best.is_none_or(|bb| e.2 * e.3 < bb.2 * bb.3) {
                    best = Some(e);
                }
            }
            let (cx, cy, w, h, angle) = best.expect("hull has edges");
            canonical(cx, cy, w, h, angle.to_degrees(), false)
        }
    }
}
