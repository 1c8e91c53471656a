//! The reduced scalar equation behind map II and the checks run on its
//! solutions.
//!
//! With `u = v(r)` and map II, the spin system collapses to
//!
//! ```text
//! r_t - Laplacian r = G(r, |grad r|^2)
//! G = mu (1 - |grad r|^2) (Q / P) (P^2 - 2 alpha) / (P^2 + 2 alpha)
//! P = exp(mu r) + (beta/2) exp(-mu r),  Q = exp(mu r) - (beta/2) exp(-mu r)
//! ```
//!
//! which is solved by forward Euler. Lifted solutions are checked against
//! both forms of the Landau–Lifshitz residual.

use crate::error::{Error, Result};
use crate::grid::{for_each_local_with, GridSpec, ScalarField, SpinField};
use crate::levelset::check_dt;
use crate::scalar::Real;
use crate::spin_maps::{self, MapKind, PhysParams, Spin};

/// Treatment of the outermost nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Boundary nodes keep their initial values.
    DirichletFarField,
    /// Zero normal derivative via mirrored ghost nodes.
    Reflective,
}

impl Boundary {
    pub fn label(&self) -> &'static str {
        match self {
            Boundary::DirichletFarField => "dirichlet-far-field",
            Boundary::Reflective => "reflective",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub boundary: Boundary,
    /// Sup norm beyond which the run is declared to blow up.
    pub blowup_threshold: T,
}

impl<T: Real> SolverConfig<T> {
    /// `min(0.2 h^2 / (2 dim), 0.1 eps^2 / (alpha + beta))`.
    pub fn stable_dt(p: &PhysParams<T>, grid: &GridSpec<T>) -> T {
        let h = grid.spacing();
        let diffusion = T::lit(0.2) * h * h / T::from_count(2 * grid.dim());
        let reaction = T::lit(0.1) * p.epsilon() * p.epsilon() / p.stiffness();
        diffusion.min(reaction)
    }

    /// The largest stable step, ending at `t_end`.
    pub fn stable(p: &PhysParams<T>, grid: &GridSpec<T>, t_end: T, boundary: Boundary) -> Self {
        Self {
            dt: Self::stable_dt(p, grid),
            t_end,
            boundary,
            blowup_threshold: T::lit(1e6),
        }
    }

    pub fn validate(&self, p: &PhysParams<T>, grid: &GridSpec<T>) -> Result<()> {
        if !(self.t_end > T::zero() && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.blowup_threshold > T::zero()) {
            return Err(Error::Config("blow-up threshold must be positive".into()));
        }
        check_dt(self.dt, Self::stable_dt(p, grid))
    }
}

/// `(Q / P, 1 / P)` without overflow.
fn p_q<T: Real>(p: &PhysParams<T>, r: T) -> (T, T) {
    let x = p.mu() * r;
    let m = p.beta() * T::lit(0.5);
    let two = T::lit(2.0);
    if x >= T::zero() {
        let e = (-two * x).exp();
        (
            (T::one() - m * e) / (T::one() + m * e),
            (-x).exp() / (T::one() + m * e),
        )
    } else {
        let e = (two * x).exp();
        ((e - m) / (e + m), x.exp() / (e + m))
    }
}

#[inline]
fn reaction<T: Real>(p: &PhysParams<T>, r: T, grad_sq: T) -> T {
    let (q_over_p, inv_p) = p_q(p, r);
    let a = T::lit(2.0) * p.alpha() * inv_p * inv_p;
    p.mu() * (T::one() - grad_sq) * q_over_p * (T::one() - a) / (T::one() + a)
}

/// Reaction term `G(r, |grad r|^2)` in its simplified form.
pub fn reduced_rhs<T: Real>(p: &PhysParams<T>, r: T, grad_sq: T) -> Result<T> {
    let g = reaction(p, r, grad_sq);
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::EvaluationOverflow {
            r: r.as_f64(),
            mu: p.mu().as_f64(),
        })
    }
}

/// Reaction term solved directly out of the spin equation,
/// `-(1 - |grad r|^2) v3 (1 - v3^2) (alpha + beta - 2 alpha v3^2) / (eps^2 v3')`,
/// using the map II closed forms. Zero where `v3' = 0`.
pub fn reaction_from_equation<T: Real>(p: &PhysParams<T>, r: T, grad_sq: T) -> Result<T> {
    let jet = spin_maps::map_jet(p, MapKind::MapII { k: T::zero() }, r)?;
    let dv3 = jet.d1[2];
    if dv3 == T::zero() {
        return Ok(T::zero());
    }
    let force = p.anisotropy_force(jet.value.v3, jet.one_minus_v3sq);
    Ok(-(T::one() - grad_sq) * force / dv3)
}

/// The variant with coefficient `2 mu (alpha + beta)` in place of `mu`.
pub fn reaction_printed<T: Real>(p: &PhysParams<T>, r: T, grad_sq: T) -> Result<T> {
    Ok(T::lit(2.0) * p.stiffness() * reduced_rhs(p, r, grad_sq)?)
}

/// Agreement of the three reaction forms on a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport<T> {
    pub samples: Vec<T>,
    /// Largest `|a - b| / |a|` between the equation and simplified forms.
    pub max_rel_ab: T,
    /// `c / b` at samples where `b != 0`.
    pub ratios: Vec<T>,
    pub ratio_mean: T,
    /// `max |ratio - mean| / |mean|`.
    pub ratio_spread: T,
}

/// Tolerance between the equation and simplified forms.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-10;

/// `count` points with `mu r` evenly spread over cell midpoints of `[-30, 30]`.
pub fn consistency_samples<T: Real>(p: &PhysParams<T>, count: usize) -> Vec<T> {
    (0..count)
        .map(|i| {
            let s = -30.0 + 60.0 * (i as f64 + 0.5) / count as f64;
            T::lit(s) / p.mu()
        })
        .collect()
}

/// Compares the three reaction forms at `|grad r| = 0`.
pub fn rhs_consistency<T: Real>(p: &PhysParams<T>, samples: &[T]) -> Result<ConsistencyReport<T>> {
    let mut max_rel_ab = T::zero();
    let mut ratios = Vec::new();
    for &r in samples {
        let a = reaction_from_equation(p, r, T::zero())?;
        let b = reduced_rhs(p, r, T::zero())?;
        let c = reaction_printed(p, r, T::zero())?;
        let rel = if a == b {
            T::zero()
        } else {
            (a - b).abs() / a.abs().max(b.abs())
        };
        if rel > T::lit(CONSISTENCY_TOLERANCE) {
            return Err(Error::Derivation {
                r: r.as_f64(),
                from_equation: a.as_f64(),
                simplified: b.as_f64(),
            });
        }
        max_rel_ab = max_rel_ab.max(rel);
        if b != T::zero() {
            ratios.push(c / b);
        }
    }
    let ratio_mean = if ratios.is_empty() {
        T::nan()
    } else {
        ratios.iter().fold(T::zero(), |s, &x| s + x) / T::from_count(ratios.len())
    };
    let ratio_spread = ratios.iter().fold(T::zero(), |m, &x| {
        m.max((x - ratio_mean).abs() / ratio_mean.abs())
    });
    Ok(ConsistencyReport {
        samples: samples.to_vec(),
        max_rel_ab,
        ratios,
        ratio_mean,
        ratio_spread,
    })
}

/// Integrates `r_t = Laplacian r + G(r, |grad r|^2)` from `r0` to `cfg.t_end`,
/// returning snapshots at the ascending `times` followed by the final field
/// (unless `t_end` is already the last requested time).
pub fn solve<T: Real>(
    p: &PhysParams<T>,
    r0: &ScalarField<T>,
    cfg: &SolverConfig<T>,
    times: &[T],
) -> Result<Vec<ScalarField<T>>> {
    solve_with(p, r0, cfg, times, |_, _| {})
}

/// [`solve`] with a callback receiving the step index and each new field.
pub fn solve_with<T: Real>(
    p: &PhysParams<T>,
    r0: &ScalarField<T>,
    cfg: &SolverConfig<T>,
    times: &[T],
    mut observe: impl FnMut(usize, &ScalarField<T>),
) -> Result<Vec<ScalarField<T>>> {
    let grid = *r0.grid();
    cfg.validate(p, &grid)?;
    let t0 = r0.time();
    let t_final = t0 + cfg.t_end;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|&t| t < t0 || t > t_final) {
        return Err(Error::Config(format!(
            "snapshot times must be ascending within [{t0}, {t_final}]"
        )));
    }
    let mut targets = times.to_vec();
    if targets.last() != Some(&t_final) {
        targets.push(t_final);
    }
    let pinned: Vec<usize> = match cfg.boundary {
        Boundary::DirichletFarField => (0..grid.len()).filter(|&i| grid.is_boundary(i)).collect(),
        Boundary::Reflective => Vec::new(),
    };

    let mut r = r0.clone();
    let mut next = vec![T::zero(); grid.len()];
    let mut snaps = Vec::with_capacity(targets.len());
    let mut step = 0;
    let slack = cfg.dt * T::lit(1e-9);
    for &target in &targets {
        while r.time() < target - slack {
            let tau = cfg.dt.min(target - r.time());
            for_each_local_with(&grid, r.values(), false, |i, l| {
                next[i] = l.value + tau * (l.laplacian() + reaction(p, l.value, l.grad_sq()));
            });
            for &i in &pinned {
                next[i] = r0.values()[i];
            }
            step += 1;
            let time = r.time() + tau;
            let mut sup = T::zero();
            for v in &next {
                if !v.is_finite() {
                    return Err(Error::Divergence {
                        step,
                        time: time.as_f64(),
                    });
                }
                sup = sup.max(v.abs());
            }
            if sup > cfg.blowup_threshold {
                return Err(Error::BlowUp {
                    step,
                    norm: sup.as_f64(),
                    threshold: cfg.blowup_threshold.as_f64(),
                });
            }
            let produced = ScalarField::from_parts_unchecked(grid, std::mem::take(&mut next), time);
            next = std::mem::replace(&mut r, produced).into_values();
            observe(step, &r);
        }
        snaps.push(r.clone().with_time(target));
    }
    Ok(snaps)
}

/// `u = v(r)` nodewise.
pub fn lift_spin<T: Real>(
    p: &PhysParams<T>,
    kind: MapKind<T>,
    r: &ScalarField<T>,
) -> Result<SpinField<T>> {
    SpinField::compose(p, kind, r)
}

/// Nodes where `|u3|` must stay below this for the residual comparison.
pub const POLE_MASK: f64 = 1.0 - 1e-6;

/// Discrete residuals of both formulations of the spin equation.
///
/// Time derivatives are `(u_next - u_prev) / dt`; spatial terms use the
/// average of the two states. Only interior nodes with `|u3| < 1 - 1e-6` are
/// evaluated; other entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LlResidual<T> {
    /// `u2 u1_t - u1 u2_t - (u2 Lap u1 - u1 Lap u2)`.
    pub res1: ScalarField<T>,
    /// `u3_t - Lap u3 - |grad u|^2 u3 + u3 (1 - u3^2)(alpha + beta - 2 alpha u3^2) / eps^2`.
    pub res2: ScalarField<T>,
    /// `|u_t + u x (u x (Lap u - H(u) / eps^2))|`.
    pub cross: ScalarField<T>,
    /// Distance between `(res1, res2)` and the same combinations of the
    /// cross-product residual.
    pub difference: ScalarField<T>,
    pub mask: Vec<bool>,
    /// Max of `sqrt(res1^2 + res2^2)` over the mask.
    pub norm_split: T,
    /// Max of `cross` over the mask.
    pub norm_cross: T,
    /// Max of `difference` over the mask.
    pub max_difference: T,
}

pub fn ll_residual<T: Real>(
    p: &PhysParams<T>,
    u_prev: &SpinField<T>,
    u_next: &SpinField<T>,
    dt: T,
) -> Result<LlResidual<T>> {
    let grid = *u_next.grid();
    if !grid.same_as(u_prev.grid()) {
        return Err(Error::GridMismatch);
    }
    if !(dt > T::zero()) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let half = T::lit(0.5);
    let n = grid.len();
    let mean: Vec<[T; 3]> = u_prev
        .spins()
        .iter()
        .zip(u_next.spins())
        .map(|(a, b)| {
            let (a, b) = (a.to_array(), b.to_array());
            [
                half * (a[0] + b[0]),
                half * (a[1] + b[1]),
                half * (a[2] + b[2]),
            ]
        })
        .collect();
    let rate: Vec<[T; 3]> = u_prev
        .spins()
        .iter()
        .zip(u_next.spins())
        .map(|(a, b)| {
            let (a, b) = (a.to_array(), b.to_array());
            [(b[0] - a[0]) / dt, (b[1] - a[1]) / dt, (b[2] - a[2]) / dt]
        })
        .collect();
    let mut lap = vec![[T::zero(); 3]; n];
    let mut grad_sq = vec![T::zero(); n];
    for c in 0..3 {
        let comp: Vec<T> = mean.iter().map(|u| u[c]).collect();
        for_each_local_with(&grid, &comp, false, |i, l| {
            lap[i][c] = l.laplacian();
            grad_sq[i] = grad_sq[i] + l.grad_sq();
        });
    }

    let inv_eps2 = T::one() / (p.epsilon() * p.epsilon());
    let (alpha, beta) = (p.alpha(), p.beta());
    let mut res1 = vec![T::zero(); n];
    let mut res2 = vec![T::zero(); n];
    let mut cross = vec![T::zero(); n];
    let mut difference = vec![T::zero(); n];
    let mut mask = vec![false; n];
    let (mut norm_split, mut norm_cross, mut max_difference) = (T::zero(), T::zero(), T::zero());
    for i in 0..n {
        let u = mean[i];
        if grid.is_boundary(i) || u[2].abs() >= T::lit(POLE_MASK) {
            continue;
        }
        mask[i] = true;
        let (ut, l) = (rate[i], lap[i]);
        let r1 = u[1] * ut[0] - u[0] * ut[1] - (u[1] * l[0] - u[0] * l[1]);
        let r2 =
            ut[2] - l[2] - grad_sq[i] * u[2] + p.anisotropy_force(u[2], T::one() - u[2] * u[2]);

        let u3sq = u[2] * u[2];
        let field = [
            alpha * u[0] * u3sq,
            alpha * u[1] * u3sq,
            alpha * (u[0] * u[0] + u[1] * u[1]) * u[2] + beta * u[2],
        ];
        let f: [T; 3] = std::array::from_fn(|c| l[c] - field[c] * inv_eps2);
        let u_dot_f = u[0] * f[0] + u[1] * f[1] + u[2] * f[2];
        let u_sq = u[0] * u[0] + u[1] * u[1] + u3sq;
        // u x (u x F) = u (u . F) - F |u|^2
        let big_r: [T; 3] = std::array::from_fn(|c| ut[c] + u[c] * u_dot_f - f[c] * u_sq);
        let e1 = u[1] * big_r[0] - u[0] * big_r[1];
        let e2 = big_r[2];

        res1[i] = r1;
        res2[i] = r2;
        cross[i] = (big_r[0] * big_r[0] + big_r[1] * big_r[1] + big_r[2] * big_r[2]).sqrt();
        difference[i] = ((r1 - e1) * (r1 - e1) + (r2 - e2) * (r2 - e2)).sqrt();
        norm_split = norm_split.max((r1 * r1 + r2 * r2).sqrt());
        norm_cross = norm_cross.max(cross[i]);
        max_difference = max_difference.max(difference[i]);
    }
    let time = u_next.time();
    let field = |v| ScalarField::from_parts_unchecked(grid, v, time);
    Ok(LlResidual {
        res1: field(res1),
        res2: field(res2),
        cross: field(cross),
        difference: field(difference),
        mask,
        norm_split,
        norm_cross,
        max_difference,
    })
}

/// Residual of the bistable equation for `omega = arcsin(v3(r))` under map II,
/// `omega_t - Lap omega + sin(omega) cos(omega) (alpha + beta - 2 alpha sin^2 omega) / eps^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllenCahnResidual<T> {
    pub omega: ScalarField<T>,
    pub residual: ScalarField<T>,
    pub mask: Vec<bool>,
    pub max_abs: T,
}

pub fn allen_cahn_residual<T: Real>(
    p: &PhysParams<T>,
    r_prev: &ScalarField<T>,
    r_next: &ScalarField<T>,
    dt: T,
) -> Result<AllenCahnResidual<T>> {
    let grid = *r_next.grid();
    if !grid.same_as(r_prev.grid()) {
        return Err(Error::GridMismatch);
    }
    let kind = MapKind::MapII { k: T::zero() };
    let limit = T::one() - T::lit(1e-12);
    let omega_of = |r: &ScalarField<T>| -> Result<(Vec<T>, Vec<bool>)> {
        let mut om = Vec::with_capacity(grid.len());
        let mut ok = Vec::with_capacity(grid.len());
        for &x in r.values() {
            let v3 = spin_maps::eval_map(p, kind, x)?.v3;
            ok.push(v3.abs() < limit);
            om.push(v3.max(-T::one()).min(T::one()).asin());
        }
        Ok((om, ok))
    };
    let (w0, ok0) = omega_of(r_prev)?;
    let (w1, ok1) = omega_of(r_next)?;
    let half = T::lit(0.5);
    let mid: Vec<T> = w0.iter().zip(&w1).map(|(a, b)| half * (*a + *b)).collect();
    let mut lap = vec![T::zero(); grid.len()];
    for_each_local_with(&grid, &mid, false, |i, l| lap[i] = l.laplacian());
    let inv_eps2 = T::one() / (p.epsilon() * p.epsilon());
    let mut residual = vec![T::zero(); grid.len()];
    let mut mask = vec![false; grid.len()];
    let mut max_abs = T::zero();
    for i in 0..grid.len() {
        if !(ok0[i] && ok1[i]) || grid.is_boundary(i) {
            continue;
        }
        mask[i] = true;
        let (s, c) = mid[i].sin_cos();
        let rate = if dt > T::zero() {
            (w1[i] - w0[i]) / dt
        } else {
            T::zero()
        };
        let v =
            rate - lap[i] + inv_eps2 * s * c * (p.stiffness() - T::lit(2.0) * p.alpha() * s * s);
        residual[i] = v;
        max_abs = max_abs.max(v.abs());
    }
    Ok(AllenCahnResidual {
        omega: ScalarField::from_parts_unchecked(grid, w1, r_next.time()),
        residual: ScalarField::from_parts_unchecked(grid, residual, r_next.time()),
        mask,
        max_abs,
    })
}

/// Compact subsets of the inner and outer regions of a level-set field, and
/// the node closest to its front.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeMasks<T> {
    /// `w > margin`.
    pub inner: Vec<bool>,
    /// `w < -margin`.
    pub outer: Vec<bool>,
    /// `argmin |w|` (lowest index on ties).
    pub near_front: usize,
    pub margin: T,
}

impl<T: Real> ProbeMasks<T> {
    pub fn from_level_set(w: &ScalarField<T>, margin: T) -> Result<Self> {
        let inner: Vec<bool> = w.values().iter().map(|&x| x > margin).collect();
        let outer: Vec<bool> = w.values().iter().map(|&x| x < -margin).collect();
        if !inner.contains(&true) || !outer.contains(&true) {
            return Err(Error::EmptyMask {
                margin: margin.as_f64(),
            });
        }
        let mut near_front = 0;
        for (i, x) in w.values().iter().enumerate() {
            if x.abs() < w.values()[near_front].abs() {
                near_front = i;
            }
        }
        Ok(Self {
            inner,
            outer,
            near_front,
            margin,
        })
    }
}

/// Deviation of a spin field from its predicted sharp-interface limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow<T> {
    pub epsilon: T,
    pub inner_target: Spin<T>,
    pub outer_target: Spin<T>,
    /// Max `|u - inner_target|` on the inner mask.
    pub inner_error: T,
    /// Max `|u - outer_target|` on the outer mask.
    pub outer_error: T,
    pub near_front: Spin<T>,
    /// Small-`eps` value of the map at the front.
    pub front_target: Spin<T>,
}

pub fn asymptotic_probe<T: Real>(
    p: &PhysParams<T>,
    kind: MapKind<T>,
    u: &SpinField<T>,
    masks: &ProbeMasks<T>,
) -> Result<ProbeRow<T>> {
    if masks.inner.len() != u.spins().len() {
        return Err(Error::GridMismatch);
    }
    let inner_target = spin_maps::limit_value(p, kind, T::one());
    let outer_target = spin_maps::limit_value(p, kind, -T::one());
    let worst = |mask: &[bool], target: Spin<T>| {
        u.spins()
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .fold(T::zero(), |acc, (s, _)| acc.max(s.distance(target)))
    };
    Ok(ProbeRow {
        epsilon: p.epsilon(),
        inner_target,
        outer_target,
        inner_error: worst(&masks.inner, inner_target),
        outer_error: worst(&masks.outer, outer_target),
        near_front: u.spins()[masks.near_front],
        front_target: spin_maps::limit_value(p, kind, T::zero()),
    })
}
