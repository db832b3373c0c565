//! Clamped uniform B-splines on `[0, 1]`: knots, basis functions, evaluation, and
//! per-span Bezier extraction for adaptive flattening.

use crate::geometry::{point_segment_distance, Point3};

/// Clamped uniform knot vector for `n` control points of degree `p` (length `n + p + 1`).
pub fn clamped_uniform_knots(n: usize, p: usize) -> Vec<f64> {
    assert!(n > p, "need more control points than the degree");
    let spans = n - p;
    let mut k = vec![0.0; p + 1];
    k.extend((1..spans).map(|i| i as f64 / spans as f64));
    k.extend(std::iter::repeat_n(1.0, p + 1));
    k
}

/// Index `s` of the knot span containing `u`, with `knots[s] <= u < knots[s + 1]`
/// (the last span is closed at `u = 1`).
pub fn find_span(knots: &[f64], n: usize, p: usize, u: f64) -> usize {
    if u >= knots[n] {
        return n - 1;
    }
    if u <= knots[p] {
        return p;
    }
    let (mut lo, mut hi) = (p, n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if u < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// The `p + 1` basis functions that may be non-zero at `u`: `N[s-p+i](u)` for span `s`.
pub fn basis_functions(knots: &[f64], span: usize, p: usize, u: f64) -> Vec<f64> {
    let mut n = vec![0.0; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    n[0] = 1.0;
    for j in 1..=p {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

/// Full basis row `[B_0(u), ..., B_{n-1}(u)]`.
pub fn basis_row(knots: &[f64], n: usize, p: usize, u: f64) -> Vec<f64> {
    let s = find_span(knots, n, p, u);
    let mut row = vec![0.0; n];
    for (i, v) in basis_functions(knots, s, p, u).into_iter().enumerate() {
        row[s - p + i] = v;
    }
    row
}

/// Blossom of the span-`s` polynomial piece at arguments `args` (length `p`);
/// with all arguments equal this is de Boor evaluation.
fn blossom(control: &[Point3], knots: &[f64], s: usize, p: usize, args: &[f64]) -> Point3 {
    let mut d: Vec<Point3> = (0..=p).map(|i| control[s - p + i]).collect();
    for r in 1..=p {
        let t = args[r - 1];
        for i in (r..=p).rev() {
            let lo = knots[s - p + i];
            let hi = knots[s + 1 + i - r];
            let a = if hi > lo { (t - lo) / (hi - lo) } else { 0.0 };
            d[i] = Point3::from(d[i - 1].coords * (1.0 - a) + d[i].coords * a);
        }
    }
    d[p]
}

pub fn evaluate(control: &[Point3], knots: &[f64], p: usize, u: f64) -> Point3 {
    let n = control.len();
    let s = find_span(knots, n, p, u);
    blossom(control, knots, s, p, &vec![u; p])
}

/// Bezier control points of every non-empty knot span, in parameter order.
pub fn bezier_segments(control: &[Point3], knots: &[f64], p: usize) -> Vec<Vec<Point3>> {
    let n = control.len();
    (p..n)
        .filter(|&s| knots[s + 1] > knots[s])
        .map(|s| {
            let (a, b) = (knots[s], knots[s + 1]);
            (0..=p)
                .map(|j| {
                    let mut args = vec![a; p - j];
                    args.extend(std::iter::repeat_n(b, j));
                    blossom(control, knots, s, p, &args)
                })
                .collect()
        })
        .collect()
}

/// Splits a Bezier control polygon at `t = 1/2`.
fn split_half(q: &[Point3]) -> (Vec<Point3>, Vec<Point3>) {
    let mut levels = q.to_vec();
    let mut left = vec![levels[0]];
    let mut right = vec![*levels.last().expect("non-empty")];
    while levels.len() > 1 {
        levels = levels.windows(2).map(|w| nalgebra::center(&w[0], &w[1])).collect();
        left.push(levels[0]);
        right.push(*levels.last().expect("non-empty"));
    }
    right.reverse();
    (left, right)
}

/// Largest distance from a control point to the chord; bounds the distance of every
/// curve point to the chord (convex hull property).
pub fn chord_deviation(q: &[Point3]) -> f64 {
    let (a, b) = (q[0], q[q.len() - 1]);
    q.iter().map(|c| point_segment_distance(&a, &b, c)).fold(0.0, f64::max)
}

const MAX_DEPTH: u32 = 24;

/// Polyline whose segments are each within `tolerance` of their piece of the Bezier curve.
pub fn flatten_bezier(q: &[Point3], tolerance: f64, out: &mut Vec<Point3>) {
    fn rec(q: &[Point3], tol: f64, depth: u32, out: &mut Vec<Point3>) {
        if depth >= MAX_DEPTH || chord_deviation(q) <= tol {
            out.push(q[q.len() - 1]);
            return;
        }
        let (l, r) = split_half(q);
        rec(&l, tol, depth + 1, out);
        rec(&r, tol, depth + 1, out);
    }
    if out.is_empty() {
        out.push(q[0]);
    }
    rec(q, tolerance, 0, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knots_and_partition_of_unity() {
        let k = clamped_uniform_knots(5, 2);
        assert_eq!(k, vec![0.0, 0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0, 1.0]);
        for i in 0..=50 {
            let u = i as f64 / 50.0;
            let row = basis_row(&k, 5, 2, u);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(row.iter().all(|&v| v >= -1e-15));
        }
        assert_eq!(basis_row(&k, 5, 2, 0.0), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(basis_row(&k, 5, 2, 1.0), vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn bezier_pieces_reproduce_the_curve() {
        let ctrl: Vec<Point3> = (0..6).map(|i| Point3::new(i as f64, (i * i % 5) as f64, (i % 2) as f64)).collect();
        for p in [1, 2, 3] {
            let k = clamped_uniform_knots(ctrl.len(), p);
            let segs = bezier_segments(&ctrl, &k, p);
            assert_eq!(segs.len(), ctrl.len() - p);
            let spans = segs.len() as f64;
            for (si, seg) in segs.iter().enumerate() {
                for j in 0..=10 {
                    let t = j as f64 / 10.0;
                    let u = (si as f64 + t) / spans;
                    // de Casteljau on the extracted piece
                    let mut lv = seg.clone();
                    while lv.len() > 1 {
                        lv = lv.windows(2).map(|w| Point3::from(w[0].coords * (1.0 - t) + w[1].coords * t)).collect();
                    }
                    assert!((lv[0] - evaluate(&ctrl, &k, p, u)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn flattening_respects_tolerance() {
        let q = [Point3::new(0.0, 0.0, 0.0), Point3::new(0.5, 1.0, 0.0), Point3::new(1.0, 0.0, 0.0)];
        let mut poly = Vec::new();
        flatten_bezier(&q, 1e-4, &mut poly);
        assert!(poly.len() > 10);
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let p = Point3::new(t, 2.0 * t * (1.0 - t), 0.0);
            let d = poly.windows(2).map(|w| point_segment_distance(&w[0], &w[1], &p)).fold(f64::INFINITY, f64::min);
            assert!(d <= 1e-4 + 1e-12, "{d}");
        }
    }
}
