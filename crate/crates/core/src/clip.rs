//! Low-level polygon clipping (Sutherland–Hodgman against convex windows),
//! signed areas, and ear-clipping triangulation.

use alloc::vec::Vec;

use crate::vec2::Vec2;

pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * acc
}

pub fn bounds(poly: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in poly {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

/// Keeps the part of `subject` on the left of the directed line `p → q`.
fn clip_halfplane(subject: &[Vec2], p: Vec2, q: Vec2) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(subject.len() + 2);
    let n = subject.len();
    if n == 0 {
        return out;
    }
    let dir = q - p;
    let side = |x: Vec2| dir.cross(x - p);
    let mut prev = subject[n - 1];
    let mut sprev = side(prev);
    for &cur in subject {
        let scur = side(cur);
        if scur >= 0.0 {
            if sprev < 0.0 {
                out.push(prev.lerp(cur, sprev / (sprev - scur)));
            }
            out.push(cur);
        } else if sprev >= 0.0 {
            out.push(prev.lerp(cur, sprev / (sprev - scur)));
        }
        prev = cur;
        sprev = scur;
    }
    out
}

/// Clips any simple polygon against a convex counterclockwise window. The
/// output may contain zero-width bridges along the window boundary when the
/// intersection is disconnected; signed-area integration handles those.
pub fn clip_convex(subject: &[Vec2], window: &[Vec2]) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = subject.to_vec();
    let m = window.len();
    for i in 0..m {
        if out.is_empty() {
            break;
        }
        out = clip_halfplane(&out, window[i], window[(i + 1) % m]);
    }
    out
}

/// Clips against the axis-aligned box `[lo, hi]`.
pub fn clip_box(subject: &[Vec2], lo: Vec2, hi: Vec2) -> Vec<Vec2> {
    let window = [lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)];
    clip_convex(subject, &window)
}

/// Parameter range `[s0, s1] ⊂ [0, 1]` of the segment `a → b` lying inside
/// every convex window and the optional box.
pub fn segment_window(
    a: Vec2,
    b: Vec2,
    windows: &[&[Vec2]],
    bbox: Option<(Vec2, Vec2)>,
) -> Option<(f64, f64)> {
    let mut s0: f64 = 0.0;
    let mut s1: f64 = 1.0;
    let d = b - a;
    let mut cut = |p: Vec2, q: Vec2| {
        let e = q - p;
        let fa = e.cross(a - p);
        let slope = e.cross(d);
        if slope == 0.0 {
            if fa < 0.0 {
                s1 = -1.0;
            }
        } else {
            let s = -fa / slope;
            if slope > 0.0 {
                s0 = s0.max(s);
            } else {
                s1 = s1.min(s);
            }
        }
    };
    for w in windows {
        let m = w.len();
        for i in 0..m {
            cut(w[i], w[(i + 1) % m]);
        }
    }
    if let Some((lo, hi)) = bbox {
        let bx = [lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)];
        for i in 0..4 {
            cut(bx[i], bx[(i + 1) % 4]);
        }
    }
    if s1 > s0 {
        Some((s0, s1))
    } else {
        None
    }
}

/// Winding-number containment test (strict interior plus some boundary points;
/// callers handle boundary classification separately).
pub fn winding_contains(poly: &[Vec2], x: Vec2) -> bool {
    let n = poly.len();
    let mut wn = 0i32;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a.y <= x.y {
            if b.y > x.y && (b - a).cross(x - a) > 0.0 {
                wn += 1;
            }
        } else if b.y <= x.y && (b - a).cross(x - a) < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

/// Distance from `x` to the segment `a → b`, and the projection parameter.
pub fn point_segment_distance(x: Vec2, a: Vec2, b: Vec2) -> (f64, f64) {
    let d = b - a;
    let len2 = d.norm_sq();
    if len2 == 0.0 {
        return (x.dist(a), 0.0);
    }
    let s = ((x - a).dot(d) / len2).clamp(0.0, 1.0);
    (x.dist(a + d.scale(s)), s)
}

/// Ear-clipping triangulation of a simple counterclockwise polygon.
pub fn triangulate(poly: &[Vec2]) -> Vec<[Vec2; 3]> {
    let mut idx: Vec<usize> = (0..poly.len()).collect();
    let mut tris = Vec::new();
    let mut guard = 0usize;
    while idx.len() > 3 && guard < 10 * poly.len() * poly.len() + 10 {
        guard += 1;
        let n = idx.len();
        let mut clipped = false;
        for i in 0..n {
            let (ia, ib, ic) = (idx[(i + n - 1) % n], idx[i], idx[(i + 1) % n]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            if (b - a).cross(c - b) <= 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&k| {
                if k == ia || k == ib || k == ic {
                    return false;
                }
                let p = poly[k];
                (b - a).cross(p - a) >= 0.0 && (c - b).cross(p - b) >= 0.0 && (a - c).cross(p - c) >= 0.0
            });
            if blocked {
                continue;
            }
            tris.push([a, b, c]);
            idx.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            // Collinear leftovers: drop a flat vertex.
            let n = idx.len();
            let flat = (0..n).find(|&i| {
                let (a, b, c) = (poly[idx[(i + n - 1) % n]], poly[idx[i]], poly[idx[(i + 1) % n]]);
                (b - a).cross(c - b).abs() <= 1e-14 * (1.0 + a.norm_sq() + c.norm_sq())
            });
            match flat {
                Some(i) => {
                    idx.remove(i);
                }
                None => break,
            }
        }
    }
    if idx.len() == 3 {
        let (a, b, c) = (poly[idx[0]], poly[idx[1]], poly[idx[2]]);
        if (b - a).cross(c - b) > 0.0 {
            tris.push([a, b, c]);
        }
    }
    tris
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec2> {
        alloc::vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0)
        ]
    }

    #[test]
    fn clip_square_by_box() {
        let c = clip_box(&square(), Vec2::new(0.5, -1.0), Vec2::new(2.0, 0.25));
        assert!((signed_area(&c) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn triangulation_preserves_area() {
        let l = [
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(0.0, 2.0),
        ];
        let tris = triangulate(&l);
        assert_eq!(tris.len(), 4);
        let total: f64 = tris.iter().map(|t| signed_area(t)).sum();
        assert!((total - 3.0).abs() < 1e-14);
    }

    #[test]
    fn segment_window_range() {
        let sq = square();
        let r = segment_window(Vec2::new(-1.0, 0.5), Vec2::new(3.0, 0.5), &[&sq], None).unwrap();
        assert!((r.0 - 0.25).abs() < 1e-15 && (r.1 - 0.5).abs() < 1e-15);
        assert!(segment_window(Vec2::new(-1.0, 2.0), Vec2::new(3.0, 2.0), &[&sq], None).is_none());
    }
}
