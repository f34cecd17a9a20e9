//! Path geometries for the shipped scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Point = [f64; 2];
pub type Road = (Point, Point);

/// Rectangle corners, clockwise from the lower-left one, centred at the
/// origin.
pub fn rectangle_waypoints(width: f64, height: f64) -> Vec<Point> {
    let (w, h) = (0.5 * width, 0.5 * height);
    vec![[-w, -h], [-w, h], [w, h], [w, -h]]
}

/// A lead-in road from `start` to the first corner, then `loops` turns
/// around the rectangle.
pub fn rectangle_roads(width: f64, height: f64, start: Point, loops: usize) -> Vec<Road> {
    let w = rectangle_waypoints(width, height);
    let mut roads = vec![(start, w[0])];
    for _ in 0..loops {
        for i in 0..4 {
            roads.push((w[i], w[(i + 1) % 4]));
        }
    }
    roads
}

/// Zig-zag climbing path: `+x`, `+y`, `−x`, `+y`, ... with the horizontal
/// legs `long` and the vertical ones `short`.
pub fn s_shaped_roads(start: Point, long: f64, short: f64, count: usize) -> Vec<Road> {
    let mut roads = Vec::with_capacity(count);
    let mut p = start;
    for i in 0..count {
        let q = match i % 4 {
            0 => [p[0] + long, p[1]],
            1 | 3 => [p[0], p[1] + short],
            _ => [p[0] - long, p[1]],
        };
        roads.push((p, q));
        p = q;
    }
    roads
}

/// Turn angles (degrees) of the Koch curve after `depth` refinements.
fn koch_headings(depth: u32) -> Vec<f64> {
    let mut h = vec![0.0];
    for _ in 0..depth {
        h = h
            .iter()
            .flat_map(|&a| [a, a + 60.0, a - 60.0, a])
            .collect();
    }
    h
}

/// Lead-in road along `+x` of length `lead_in` ending at the origin, then
/// the depth-2 Koch curve with `edge`-long segments.
pub fn koch_roads(lead_in: f64, edge: f64) -> Vec<Road> {
    let mut roads = vec![([-lead_in, 0.0], [0.0, 0.0])];
    let mut p = [0.0, 0.0];
    for a in koch_headings(2) {
        let r = a.to_radians();
        let q = [p[0] + edge * r.cos(), p[1] + edge * r.sin()];
        roads.push((p, q));
        p = q;
    }
    roads
}

/// `count` roads with integer lengths drawn uniformly from
/// `[min_len, max_len]`, each turning left or right by a right angle.
pub fn random_roads(start: Point, count: usize, min_len: u32, max_len: u32, seed: u64) -> Vec<Road> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
    let mut d = 0usize;
    let mut p = start;
    let mut roads = Vec::with_capacity(count);
    for i in 0..count {
        if i > 0 {
            d = if rng.random_bool(0.5) { (d + 1) % 4 } else { (d + 3) % 4 };
        }
        let len = rng.random_range(min_len..=max_len) as f64;
        let q = [p[0] + len * dirs[d][0], p[1] + len * dirs[d][1]];
        roads.push((p, q));
        p = q;
    }
    roads
}

/// Consecutive waypoints as roads.
pub fn roads_from_waypoints(w: &[Point]) -> Vec<Road> {
    w.windows(2).map(|p| (p[0], p[1])).collect()
}

pub fn road_length(r: &Road) -> f64 {
    (r.1[0] - r.0[0]).hypot(r.1[1] - r.0[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn koch_has_five_directions() {
        let mut h: Vec<i64> = koch_headings(2).iter().map(|a| *a as i64).collect();
        assert_eq!(h.len(), 16);
        h.sort();
        h.dedup();
        assert_eq!(h, vec![-120, -60, 0, 60, 120]);
    }

    #[test]
    fn s_shape_climbs() {
        let r = s_shaped_roads([0.0, 0.0], 5.0, 3.0, 16);
        assert_eq!(r[3].1, [0.0, 6.0]);
        assert_eq!(r[15].1, [0.0, 24.0]);
    }
}
