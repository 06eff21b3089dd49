use super::geometry::{is_self_intersecting, signed_area, Point, Ring};
use super::{LabelError, Result};

#[derive(Clone, Copy)]
enum Edge {
    Left,
    Right(f64),
    Top,
    Bottom(f64),
}

impl Edge {
    fn inside(self, p: Point) -> bool {
        match self {
            Edge::Left => p.0 >= 0.0,
            Edge::Right(w) => p.0 <= w,
            Edge::Top => p.1 >= 0.0,
            Edge::Bottom(h) => p.1 <= h,
        }
    }

    // the clipped coordinate is set exactly on the boundary line
    fn intersect(self, a: Point, b: Point) -> Point {
        match self {
            Edge::Left | Edge::Right(_) => {
                let x = if let Edge::Right(w) = self { w } else { 0.0 };
                let t = (x - a.0) / (b.0 - a.0);
                (x, a.1 + t * (b.1 - a.1))
            }
            Edge::Top | Edge::Bottom(_) => {
                let y = if let Edge::Bottom(h) = self { h } else { 0.0 };
                let t = (y - a.1) / (b.1 - a.1);
                (a.0 + t * (b.0 - a.0), y)
            }
        }
    }
}

fn clip_edge(input: &[Point], edge: Edge) -> Ring {
    let mut out = Vec::with_capacity(input.len() + 4);
    let n = input.len();
    for i in 0..n {
        let cur = input[i];
        let prev = input[(i + n - 1) % n];
        match (edge.inside(prev), edge.inside(cur)) {
            (true, true) => out.push(cur),
            (true, false) => out.push(edge.intersect(prev, cur)),
            (false, true) => {
                out.push(edge.intersect(prev, cur));
                out.push(cur);
            }
            (false, false) => {}
        }
    }
    out
}

/// Intersection of a simple polygon with `[0, width] x [0, height]` by
/// successive half-plane clipping. An empty ring means no overlap with
/// positive area. Concave input can leave zero-width slivers along the
/// chip border, which contribute nothing under the even-odd rule.
pub fn clip_to_chip(polygon: &[Point], width: f64, height: f64) -> Result<Ring> {
    if polygon.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(LabelError::InvalidGeometry("non-finite vertex".into()));
    }
    if is_self_intersecting(polygon) {
        return Err(LabelError::InvalidGeometry("self-intersecting polygon".into()));
    }
    if polygon.len() < 3 {
        return Ok(Vec::new());
    }
    let mut ring = polygon.to_vec();
    for edge in [Edge::Left, Edge::Right(width), Edge::Top, Edge::Bottom(height)] {
        ring = clip_edge(&ring, edge);
        if ring.is_empty() {
            return Ok(ring);
        }
    }
    ring.dedup();
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    if ring.len() < 3 || signed_area(&ring) == 0.0 {
        return Ok(Vec::new());
    }
    Ok(ring)
}
