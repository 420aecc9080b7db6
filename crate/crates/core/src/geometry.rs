//! Planar polygon geometry: areas, bounding boxes, Sutherland–Hodgman clipping
//! and exact intersection areas of simple polygons.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect<T> {
    pub x0: T,
    pub y0: T,
    pub x1: T,
    pub y1: T,
}

impl<T: Real> Rect<T> {
    pub fn width(&self) -> T {
        self.x1 - self.x0
    }

    pub fn height(&self) -> T {
        self.y1 - self.y0
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn corners(&self) -> [Point<T>; 4] {
        [
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x1, self.y1),
            Point::new(self.x0, self.y1),
        ]
    }
}

fn cross<T: Real>(o: Point<T>, a: Point<T>, b: Point<T>) -> T {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Shoelace signed area; positive for counter-clockwise vertex order (y up).
pub fn signed_area<T: Real>(pts: &[Point<T>]) -> T {
    if pts.len() < 3 {
        return T::zero();
    }
    let mut acc = T::zero();
    for i in 0..pts.len() {
        let a = pts[i];
        let b = pts[(i + 1) % pts.len()];
        acc = acc + (a.x * b.y - b.x * a.y);
    }
    acc / T::lit(2.0)
}

pub fn area<T: Real>(pts: &[Point<T>]) -> T {
    signed_area(pts).abs()
}

pub fn bbox<T: Real>(pts: &[Point<T>]) -> Option<Rect<T>> {
    let first = pts.first()?;
    let mut r = Rect {
        x0: first.x,
        y0: first.y,
        x1: first.x,
        y1: first.y,
    };
    for p in &pts[1..] {
        r.x0 = r.x0.min(p.x);
        r.y0 = r.y0.min(p.y);
        r.x1 = r.x1.max(p.x);
        r.y1 = r.y1.max(p.y);
    }
    Some(r)
}

fn segments_intersect<T: Real>(p1: Point<T>, p2: Point<T>, q1: Point<T>, q2: Point<T>) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    let zero = T::zero();
    if ((d1 > zero && d2 < zero) || (d1 < zero && d2 > zero))
        && ((d3 > zero && d4 < zero) || (d3 < zero && d4 > zero))
    {
        return true;
    }
    let on_seg = |a: Point<T>, b: Point<T>, p: Point<T>| {
        p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
    };
    (d1 == zero && on_seg(q1, q2, p1))
        || (d2 == zero && on_seg(q1, q2, p2))
        || (d3 == zero && on_seg(p1, p2, q1))
        || (d4 == zero && on_seg(p1, p2, q2))
}

/// True when no two non-adjacent edges of the closed ring touch.
pub fn is_simple<T: Real>(pts: &[Point<T>]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a1, a2) = (pts[i], pts[(i + 1) % n]);
        if a1 == a2 {
            return false;
        }
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (b1, b2) = (pts[j], pts[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

/// Convex (possibly with collinear vertices) and simple.
pub fn is_convex<T: Real>(pts: &[Point<T>]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0i8;
    for i in 0..n {
        let c = cross(pts[i], pts[(i + 1) % n], pts[(i + 2) % n]);
        let s = if c > T::zero() {
            1
        } else if c < T::zero() {
            -1
        } else {
            0
        };
        if s != 0 {
            if sign != 0 && s != sign {
                return false;
            }
            sign = s;
        }
    }
    sign != 0 && is_simple(pts)
}

fn ccw<T: Real>(pts: &[Point<T>]) -> Vec<Point<T>> {
    let mut v = pts.to_vec();
    if signed_area(&v) < T::zero() {
        v.reverse();
    }
    v
}

fn line_hit<T: Real>(s: Point<T>, e: Point<T>, a: Point<T>, b: Point<T>) -> Point<T> {
    // intersection of segment s→e with the infinite line a→b
    let ds = cross(a, b, s);
    let de = cross(a, b, e);
    let t = ds / (ds - de);
    Point::new(s.x + (e.x - s.x) * t, s.y + (e.y - s.y) * t)
}

/// Sutherland–Hodgman clipping of an arbitrary polygon against a convex one.
/// The output may contain degenerate edges along the clip boundary; its area
/// is the exact intersection area.
pub fn clip_convex<T: Real>(subject: &[Point<T>], clip: &[Point<T>]) -> Vec<Point<T>> {
    let clip = ccw(clip);
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = std::mem::take(&mut out);
        let mut prev = *input.last().unwrap();
        for &cur in &input {
            let cur_in = cross(a, b, cur) >= T::zero();
            let prev_in = cross(a, b, prev) >= T::zero();
            if cur_in {
                if !prev_in {
                    out.push(line_hit(prev, cur, a, b));
                }
                out.push(cur);
            } else if prev_in {
                out.push(line_hit(prev, cur, a, b));
            }
            prev = cur;
        }
    }
    out
}

pub fn clip_to_rect<T: Real>(subject: &[Point<T>], rect: &Rect<T>) -> Vec<Point<T>> {
    clip_convex(subject, &rect.corners())
}

/// Exact area of `a ∩ b` for simple polygons.
///
/// When either operand is convex a single clipping pass suffices. Otherwise
/// both rings are decomposed into signed fan triangles around a common apex and
/// the pairwise triangle intersections are summed with their orientation signs.
pub fn intersection_area<T: Real>(a: &[Point<T>], b: &[Point<T>]) -> T {
    if a.len() < 3 || b.len() < 3 {
        return T::zero();
    }
    if let (Some(ra), Some(rb)) = (bbox(a), bbox(b)) {
        if ra.x1 <= rb.x0 || rb.x1 <= ra.x0 || ra.y1 <= rb.y0 || rb.y1 <= ra.y0 {
            return T::zero();
        }
    }
    if is_convex(b) {
        return area(&clip_convex(a, b));
    }
    if is_convex(a) {
        return area(&clip_convex(b, a));
    }
    let apex = a[0];
    let fan = |poly: &[Point<T>]| -> Vec<(T, [Point<T>; 3])> {
        (0..poly.len())
            .filter_map(|i| {
                let tri = [apex, poly[i], poly[(i + 1) % poly.len()]];
                let s = signed_area(&tri);
                if s == T::zero() {
                    None
                } else if s > T::zero() {
                    Some((T::one(), tri))
                } else {
                    Some((-T::one(), [tri[0], tri[2], tri[1]]))
                }
            })
            .collect()
    };
    let fa = fan(a);
    let fb = fan(b);
    let mut total = T::zero();
    for (sa, ta) in &fa {
        for (sb, tb) in &fb {
            let piece = area(&clip_convex(ta, tb));
            total = total + *sa * *sb * piece;
        }
    }
    let orient = signed_area(a).signum() * signed_area(b).signum();
    (total * orient).max(T::zero())
}

/// Intersection over union; 0 when the union is empty.
pub fn iou<T: Real>(a: &[Point<T>], b: &[Point<T>]) -> T {
    let inter = intersection_area(a, b);
    let union = area(a) + area(b) - inter;
    if union <= T::zero() {
        T::zero()
    } else {
        (inter / union).min(T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point<f64>> {
        vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ]
    }

    #[test]
    fn shoelace() {
        assert_eq!(area(&rect(0.0, 0.0, 100.0, 12.0)), 1200.0);
        let tri = [Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(5.0, 7.0)];
        assert_eq!(area(&tri), 35.0);
    }

    #[test]
    fn self_intersection_detected() {
        let bowtie = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(2.0, 0.0),
            Point::new(0.0, 2.0),
        ];
        assert!(!is_simple(&bowtie));
        assert!(is_simple(&rect(0.0, 0.0, 1.0, 1.0)));
    }

    #[test]
    fn concave_intersection_matches_decomposition() {
        // L shape: 2x2 square minus top-right unit square, area 3
        let l = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        assert_eq!(area(&l), 3.0);
        // mirrored L overlapping on the bottom row and left column pieces
        let u = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(1.0, 2.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let got: f64 = intersection_area(&l, &u);
        assert!((got - 2.0).abs() < 1e-12, "{got}");
        let clipped: f64 = intersection_area(&l, &rect(0.5, 0.5, 1.5, 1.5));
        assert!((clipped - 0.75).abs() < 1e-12);
    }

    #[test]
    fn iou_cases() {
        let a = rect(0.0, 0.0, 1.0, 1.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &rect(2.0, 0.0, 3.0, 1.0)), 0.0);
        assert_eq!(iou(&a, &rect(0.5, 0.0, 1.5, 1.0)), 1.0 / 3.0);
    }
}
