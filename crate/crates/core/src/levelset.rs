//! Level-set mean curvature flow, front extraction and signed distance.
//!
//! The front is the zero set of `w` evolving by
//!
//! ```text
//! w_t = (delta_ij - w_i w_j / |grad w|^2) w_ij
//! ```
//!
//! discretised with central differences and forward Euler, the degenerate
//! denominator regularised as `|grad w|^2 + sigma^2`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::{for_each_local, GridSpec, ScalarField};
use crate::scalar::Real;

/// Initial height `h(x) = R - |x|`: positive inside the ball of radius `R`.
///
/// Requires `0 < R < 0.8 L` so the front stays clear of the box faces.
pub fn build_initial_height<T: Real>(grid: GridSpec<T>, radius: T) -> Result<ScalarField<T>> {
    let cap = T::lit(0.8) * grid.half_width();
    if !(radius > T::zero() && radius < cap) {
        return Err(Error::Config(format!(
            "initial radius must lie in (0, {cap}), got {radius}"
        )));
    }
    ScalarField::from_fn(grid, T::zero(), |x| {
        radius - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    })
}

/// Regularisation `1e-6 * range(w) / h`.
pub fn default_sigma<T: Real>(w: &ScalarField<T>) -> T {
    T::lit(1e-6) * w.range() / w.grid().spacing()
}

/// Largest admitted explicit step, `0.2 h^2 / (2 dim)`.
pub fn stable_dt<T: Real>(grid: &GridSpec<T>) -> T {
    let h = grid.spacing();
    T::lit(0.2) * h * h / T::from_count(2 * grid.dim())
}

pub(crate) fn check_dt<T: Real>(dt: T, limit: T) -> Result<()> {
    if !(dt > T::zero()) || dt > limit * (T::one() + T::lit(1e-12)) {
        return Err(Error::Stability {
            dt: dt.as_f64(),
            limit: limit.as_f64(),
        });
    }
    Ok(())
}

/// One forward-Euler step of the regularised level-set equation.
pub fn mcf_step<T: Real>(w: &ScalarField<T>, dt: T, sigma: T) -> Result<ScalarField<T>> {
    check_dt(dt, stable_dt(w.grid()))?;
    let mut out = vec![T::zero(); w.values().len()];
    step_into(w, dt, sigma, &mut out);
    finish(w, out, dt, 0)
}

fn step_into<T: Real>(w: &ScalarField<T>, dt: T, sigma: T, out: &mut [T]) {
    let s2 = sigma * sigma;
    for_each_local(w.grid(), w.values(), |i, l| {
        let rate = l.laplacian() - l.grad_hess_grad() / (l.grad_sq() + s2);
        out[i] = l.value + dt * rate;
    });
}

fn finish<T: Real>(w: &ScalarField<T>, out: Vec<T>, dt: T, step: usize) -> Result<ScalarField<T>> {
    let time = w.time() + dt;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            step,
            time: time.as_f64(),
        });
    }
    Ok(ScalarField::from_parts_unchecked(*w.grid(), out, time))
}

/// Evolves `w0` and returns snapshots at each of the ascending `times`.
///
/// Steps have size `dt` except the last one before each snapshot, which is
/// shortened to land on it exactly.
pub fn evolve<T: Real>(
    w0: &ScalarField<T>,
    sigma: T,
    dt: T,
    times: &[T],
) -> Result<Vec<ScalarField<T>>> {
    evolve_with(w0, sigma, dt, times, |_| {})
}

/// [`evolve`] with a callback on every intermediate field.
pub fn evolve_with<T: Real>(
    w0: &ScalarField<T>,
    sigma: T,
    dt: T,
    times: &[T],
    mut observe: impl FnMut(&ScalarField<T>),
) -> Result<Vec<ScalarField<T>>> {
    check_dt(dt, stable_dt(w0.grid()))?;
    if times.windows(2).any(|p| p[1] < p[0]) || times.first().is_some_and(|&t| t < w0.time()) {
        return Err(Error::Config(
            "snapshot times must be ascending and not before t0".into(),
        ));
    }
    let mut w = w0.clone();
    let mut scratch = vec![T::zero(); w.values().len()];
    let mut snaps = Vec::with_capacity(times.len());
    let mut step = 0;
    let slack = dt * T::lit(1e-9);
    for &target in times {
        while w.time() < target - slack {
            let tau = dt.min(target - w.time());
            step_into(&w, tau, sigma, &mut scratch);
            step += 1;
            let next = finish(&w, std::mem::take(&mut scratch), tau, step)?;
            scratch = std::mem::replace(&mut w, next).into_values();
            observe(&w);
        }
        snaps.push(w.clone().with_time(target));
    }
    Ok(snaps)
}

/// Discrete zero level set.
///
/// * dim 1: crossing coordinates;
/// * dim 2: marching-squares segments sharing their vertices;
/// * dim 3: point cloud of edge crossings.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontPolyline<T> {
    dim: usize,
    points: Vec<[T; 3]>,
    segments: Vec<[usize; 2]>,
}

impl<T: Real> FrontPolyline<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[[T; 3]] {
        &self.points
    }

    pub fn segments(&self) -> &[[usize; 2]] {
        &self.segments
    }

    /// True when the front has vanished.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `x` to the front (segments in 2D, points otherwise).
    pub fn distance_to(&self, x: [T; 3]) -> T {
        if self.dim == 2 && !self.segments.is_empty() {
            self.segments
                .iter()
                .map(|s| segment_distance(x, self.points[s[0]], self.points[s[1]]))
                .fold(T::infinity(), T::min)
        } else {
            self.points
                .iter()
                .map(|&p| dist(x, p))
                .fold(T::infinity(), T::min)
        }
    }

    /// Mean distance of the vertices from the origin.
    pub fn mean_radius(&self) -> Option<T> {
        if self.points.is_empty() {
            return None;
        }
        let sum = self.points.iter().fold(T::zero(), |acc, &p| acc + norm(p));
        Some(sum / T::from_count(self.points.len()))
    }

    /// Smallest and largest vertex distance from the origin.
    pub fn radius_range(&self) -> Option<(T, T)> {
        if self.points.is_empty() {
            return None;
        }
        Some(
            self.points
                .iter()
                .fold((T::infinity(), T::zero()), |(lo, hi), &p| {
                    let r = norm(p);
                    (lo.min(r), hi.max(r))
                }),
        )
    }

    /// Symmetric Hausdorff distance between the vertex sets, each measured
    /// against the other front's elements.
    pub fn hausdorff(&self, other: &Self) -> T {
        let one_way = |a: &Self, b: &Self| {
            a.points
                .iter()
                .map(|&p| b.distance_to(p))
                .fold(T::zero(), T::max)
        };
        one_way(self, other).max(one_way(other, self))
    }
}

fn norm<T: Real>(p: [T; 3]) -> T {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

fn dist<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

fn segment_distance<T: Real>(x: [T; 3], a: [T; 3], b: [T; 3]) -> T {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let ax = [x[0] - a[0], x[1] - a[1], x[2] - a[2]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    if len2 == T::zero() {
        return norm(ax);
    }
    let t = ((ax[0] * ab[0] + ax[1] * ab[1] + ax[2] * ab[2]) / len2)
        .max(T::zero())
        .min(T::one());
    dist(x, [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]])
}

/// Linear-interpolation zero crossings of `w`. Nodes with `w >= 0` count as
/// inside, so a node where `w` vanishes exactly becomes a front vertex.
pub fn extract_front<T: Real>(w: &ScalarField<T>) -> FrontPolyline<T> {
    let grid = *w.grid();
    let mut builder = FrontBuilder {
        grid,
        values: w.values(),
        points: Vec::new(),
        edge_point: HashMap::new(),
    };
    let mut segments = Vec::new();
    match grid.dim() {
        2 => {
            let n = grid.points_per_axis();
            for i in 0..n - 1 {
                for j in 0..n - 1 {
                    builder.square(i, j, &mut segments);
                }
            }
        }
        _ => {
            for idx in 0..grid.len() {
                let m = grid.multi_index(idx);
                for a in 0..grid.dim() {
                    if m[a] + 1 < grid.points_per_axis() {
                        builder.crossing(idx, a);
                    }
                }
            }
        }
    }
    FrontPolyline {
        dim: grid.dim(),
        points: builder.points,
        segments,
    }
}

struct FrontBuilder<'a, T> {
    grid: GridSpec<T>,
    values: &'a [T],
    points: Vec<[T; 3]>,
    edge_point: HashMap<(usize, usize), usize>,
}

impl<T: Real> FrontBuilder<'_, T> {
    /// Vertex on the edge from node `idx` along `axis`, if the sign changes.
    fn crossing(&mut self, idx: usize, axis: usize) -> Option<usize> {
        if let Some(&p) = self.edge_point.get(&(idx, axis)) {
            return Some(p);
        }
        let mut m = self.grid.multi_index(idx);
        m[axis] += 1;
        let jdx = self.grid.flat_index(m);
        let (wa, wb) = (self.values[idx], self.values[jdx]);
        if (wa >= T::zero()) == (wb >= T::zero()) {
            return None;
        }
        let t = wa / (wa - wb);
        let mut x = self.grid.coords(idx);
        x[axis] = x[axis] + t * self.grid.spacing();
        self.points.push(x);
        let p = self.points.len() - 1;
        self.edge_point.insert((idx, axis), p);
        Some(p)
    }

    fn square(&mut self, i: usize, j: usize, segments: &mut Vec<[usize; 2]>) {
        let g = self.grid;
        let c0 = g.flat_index([i, j, 0]);
        let c1 = g.flat_index([i + 1, j, 0]);
        let c3 = g.flat_index([i, j + 1, 0]);
        let c2 = g.flat_index([i + 1, j + 1, 0]);
        // edges: 0 = c0-c1, 1 = c1-c2, 2 = c3-c2, 3 = c0-c3
        let e = [
            self.crossing(c0, 0),
            self.crossing(c1, 1),
            self.crossing(c3, 0),
            self.crossing(c0, 1),
        ];
        let found: Vec<usize> = e.iter().flatten().copied().collect();
        match found.len() {
            2 => segments.push([found[0], found[1]]),
            4 => {
                let v = self.values;
                let centre = (v[c0] + v[c1] + v[c2] + v[c3]) * T::lit(0.25);
                let p = |k: usize| e[k].unwrap_or(0);
                if (centre >= T::zero()) == (v[c0] >= T::zero()) {
                    segments.push([p(0), p(1)]);
                    segments.push([p(2), p(3)]);
                } else {
                    segments.push([p(3), p(0)]);
                    segments.push([p(1), p(2)]);
                }
            }
            _ => {}
        }
    }
}

/// Brute-force signed distance to `front`, positive where `w > 0`.
pub fn signed_distance<T: Real>(
    front: &FrontPolyline<T>,
    w: &ScalarField<T>,
) -> Result<ScalarField<T>> {
    if front.is_empty() {
        return Err(Error::ExtinctFront(format!(
            "no zero crossing at t = {}",
            w.time()
        )));
    }
    let grid = *w.grid();
    let values = (0..grid.len())
        .map(|i| {
            let d = front.distance_to(grid.coords(i));
            if w.values()[i] >= T::zero() {
                d
            } else {
                -d
            }
        })
        .collect();
    Ok(ScalarField::from_parts_unchecked(grid, values, w.time()))
}

/// Extinction time `R0^2 / (2 (dim - 1))` of a sphere; `None` in one dimension.
pub fn sphere_extinction_time<T: Real>(radius: T, dim: usize) -> Option<T> {
    (dim >= 2).then(|| radius * radius / T::from_count(2 * (dim - 1)))
}

/// Radius `sqrt(R0^2 - 2 (dim - 1) t)` of a sphere moving by mean curvature.
pub fn analytic_sphere<T: Real>(radius: T, dim: usize, t: T) -> Result<T> {
    if dim == 0 {
        return Err(Error::Config("dim must be at least 1".into()));
    }
    let sq = radius * radius - T::from_count(2 * (dim - 1)) * t;
    if sq < T::zero() {
        return Err(Error::ExtinctFront(format!(
            "sphere of radius {radius} in {dim}D vanished before t = {t}"
        )));
    }
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(n: usize) -> GridSpec<f64> {
        GridSpec::<f64>::new(2, 1.6, n).unwrap()
    }

    #[test]
    fn initial_height_values() {
        let g = grid2(81);
        let w = build_initial_height(g, 1.0).unwrap();
        let origin = g.flat_index([40, 40, 0]);
        assert_eq!(w.values()[origin], 1.0);
        // x = (1, 0) is node 40 + 25
        assert!(w.values()[g.flat_index([65, 40, 0])].abs() < 1e-14);
        assert!(build_initial_height(g, 1.3).is_err());
        assert!(build_initial_height(g, 0.0).is_err());
        let w = build_initial_height(GridSpec::<f64>::new(1, 2.5, 11).unwrap(), 1.0).unwrap();
        assert_eq!(w.values()[9], -1.0);
    }

    #[test]
    fn constants_are_stationary() {
        let g = grid2(21);
        let w = ScalarField::from_fn(g, 0.0, |_| 0.7).unwrap();
        let next = mcf_step(&w, stable_dt(&g), 1e-3).unwrap();
        assert_eq!(next.values(), w.values());
    }

    #[test]
    fn one_dimensional_profiles_barely_move() {
        let g = GridSpec::<f64>::new(1, 1.0, 101).unwrap();
        let w = ScalarField::from_fn(g, 0.0, |x| x[0].tanh()).unwrap();
        let sigma = default_sigma(&w);
        let next = mcf_step(&w, stable_dt(&g), sigma).unwrap();
        let heat = w.laplacian();
        for i in 1..100 {
            let moved = (next.values()[i] - w.values()[i]).abs();
            let heat_move = stable_dt(&g) * heat[i].abs();
            assert!(moved <= 1e-6 * heat_move.max(1e-300) + 1e-18, "node {i}");
        }
    }

    #[test]
    fn rejects_unstable_steps() {
        let g = grid2(21);
        let w = build_initial_height(g, 1.0).unwrap();
        let err = mcf_step(&w, 2.0 * stable_dt(&g), 1e-3).unwrap_err();
        assert!(matches!(err, Error::Stability { .. }));
    }

    #[test]
    fn circle_is_extracted_accurately() {
        let g = grid2(101);
        let h = g.spacing();
        let w = build_initial_height(g, 1.0).unwrap();
        let front = extract_front(&w);
        assert!(!front.is_empty());
        for p in front.points() {
            assert!((norm(*p) - 1.0).abs() <= h * h, "{p:?}");
        }
        // every vertex is used by exactly two segments on a closed curve
        let mut uses = vec![0; front.points().len()];
        for s in front.segments() {
            uses[s[0]] += 1;
            uses[s[1]] += 1;
        }
        assert!(uses.iter().all(|&u| u == 2));
    }

    #[test]
    fn vertices_interpolate_to_zero() {
        let g = grid2(41);
        let w = ScalarField::from_fn(g, 0.0, |x| x[0] * x[0] - 0.3 * x[1] - 0.2).unwrap();
        let front = extract_front(&w);
        let range = w.range();
        let h = g.spacing();
        for p in front.points() {
            // linear interpolation of w along the edge through p
            let cell = |c: f64| (c + 1.6) / h;
            let (jr, ir) = (cell(p[1]).round() as usize, cell(p[0]).round() as usize);
            let (a, b, t) = if (p[1] - g.axis_coord(jr)).abs() < 1e-12 {
                let i = (cell(p[0]).floor() as usize).min(39);
                let t = (p[0] - g.axis_coord(i)) / h;
                (g.flat_index([i, jr, 0]), g.flat_index([i + 1, jr, 0]), t)
            } else {
                let j = (cell(p[1]).floor() as usize).min(39);
                let t = (p[1] - g.axis_coord(j)) / h;
                (g.flat_index([ir, j, 0]), g.flat_index([ir, j + 1, 0]), t)
            };
            let interp = w.values()[a] * (1.0 - t) + w.values()[b] * t;
            assert!(interp.abs() <= 1e-10 * range);
        }
    }

    #[test]
    fn empty_and_one_dimensional_fronts() {
        let g = grid2(11);
        let w = ScalarField::from_fn(g, 0.0, |_| 1.0).unwrap();
        assert!(extract_front(&w).is_empty());
        assert!(matches!(
            signed_distance(&extract_front(&w), &w),
            Err(Error::ExtinctFront(_))
        ));
        let g1 = GridSpec::<f64>::new(1, 1.0, 10 + 1).unwrap();
        let line = ScalarField::from_fn(g1, 0.0, |x| x[0] + 0.05).unwrap();
        let front = extract_front(&line);
        assert_eq!(front.points().len(), 1);
        assert!((front.points()[0][0] + 0.05).abs() < 1e-12);
        let origin = ScalarField::from_fn(g1, 0.0, |x| x[0]).unwrap();
        assert!(extract_front(&origin).points()[0][0].abs() < 1e-12);
    }

    #[test]
    fn signed_distance_of_circle() {
        let g = grid2(101);
        let h = g.spacing();
        let w = build_initial_height(g, 1.0).unwrap();
        let d = signed_distance(&extract_front(&w), &w).unwrap();
        for i in 0..g.len() {
            assert!((d.values()[i] - w.values()[i]).abs() <= h, "node {i}");
        }
        let grads = d.grad_sq();
        for i in 0..g.len() {
            if g.is_boundary(i) || d.values()[i].abs() <= 2.0 * h || g.radius(i) <= 2.0 * h {
                continue;
            }
            assert!((grads[i].sqrt() - 1.0).abs() <= 5.0 * h, "node {i}");
        }
    }

    #[test]
    fn sphere_law() {
        assert_eq!(sphere_extinction_time(1.0, 2), Some(0.5));
        assert_eq!(sphere_extinction_time(1.0, 1), None);
        assert!((analytic_sphere(1.0, 2, 0.2).unwrap() - 0.6f64.sqrt()).abs() < 1e-15);
        assert_eq!(analytic_sphere(1.0, 1, 10.0).unwrap(), 1.0);
        assert!(matches!(
            analytic_sphere(1.0, 3, 0.3),
            Err(Error::ExtinctFront(_))
        ));
    }

    #[test]
    fn three_dimensional_point_cloud() {
        let g = GridSpec::<f64>::new(3, 1.6, 21).unwrap();
        let w = build_initial_height(g, 1.0).unwrap();
        let front = extract_front(&w);
        let (lo, hi) = front.radius_range().unwrap();
        assert!(lo > 0.95 && hi < 1.05);
        let d = signed_distance(&front, &w).unwrap();
        assert!(d
            .values()
            .iter()
            .zip(w.values())
            .all(|(a, b)| (a - b).abs() < 2.0 * g.spacing()));
    }

    #[test]
    fn small_shrinking_circle() {
        let g = grid2(81);
        let w0 = build_initial_height(g, 1.0).unwrap();
        let snaps = evolve(&w0, default_sigma(&w0), stable_dt(&g), &[0.05, 0.1]).unwrap();
        let mut prev = 1.0;
        for s in &snaps {
            let r = extract_front(s).mean_radius().unwrap();
            let exact = analytic_sphere(1.0, 2, s.time()).unwrap();
            assert!((r - exact).abs() / exact < 0.02, "t={} r={r}", s.time());
            assert!(r < prev);
            prev = r;
        }
    }
}
