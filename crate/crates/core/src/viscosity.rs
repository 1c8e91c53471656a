//! Super- and sub-solution profiles built from the signed distance, their
//! heat defect, and a band-resolved comparison against a computed solution.
//!
//! ```text
//! r+ =  eta( d) + delta t / (4 t_star)
//! r- = -eta(-d) - delta t / (4 t_star)
//! ```

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::grid::{for_each_local, GridSpec, ScalarField, SpinField};
use crate::scalar::Real;
use crate::spin_maps::{MapKind, PhysParams};
use crate::transition::{eta, ProfileParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Super,
    Sub,
}

/// A profile `r+` or `r-` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileField<T> {
    pub r: ScalarField<T>,
    pub kind: ProfileKind,
    pub pp: ProfileParams<T>,
    pub t: T,
}

fn check_time<T: Real>(pp: &ProfileParams<T>, t: T) -> Result<()> {
    if !(t >= T::zero() && t <= pp.t_star()) {
        return Err(Error::Config(format!(
            "profile time {t} outside [0, {}]",
            pp.t_star()
        )));
    }
    Ok(())
}

/// `r+ = eta(d) + delta t / (4 t_star)` nodewise.
pub fn super_profile<T: Real>(
    d: &ScalarField<T>,
    pp: &ProfileParams<T>,
    t: T,
) -> Result<ProfileField<T>> {
    check_time(pp, t)?;
    let drift = pp.drift(t);
    Ok(ProfileField {
        r: d.map(|x| eta(pp, x) + drift).with_time(t),
        kind: ProfileKind::Super,
        pp: *pp,
        t,
    })
}

/// `r- = -eta(-d) - delta t / (4 t_star)` nodewise.
pub fn sub_profile<T: Real>(
    d: &ScalarField<T>,
    pp: &ProfileParams<T>,
    t: T,
) -> Result<ProfileField<T>> {
    check_time(pp, t)?;
    let drift = pp.drift(t);
    Ok(ProfileField {
        r: d.map(|x| -eta(pp, -x) - drift).with_time(t),
        kind: ProfileKind::Sub,
        pp: *pp,
        t,
    })
}

/// `u = v(r)` on every node of the profile.
pub fn compose_spin<T: Real>(
    p: &PhysParams<T>,
    kind: MapKind<T>,
    rf: &ProfileField<T>,
) -> Result<SpinField<T>> {
    SpinField::compose(p, kind, &rf.r)
}

/// Discrete `eta(d)_t - Laplacian eta(d)` between two snapshots, with the
/// mask of nodes where `d` is smooth enough for the difference to mean
/// anything.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport<T> {
    /// Defect at the mid time; masked nodes hold zero.
    pub defect: ScalarField<T>,
    pub mask: Vec<bool>,
    /// `-6 / delta`.
    pub bound: T,
    /// `10 h / delta^2`.
    pub tol: T,
    pub min: T,
    pub argmin: Option<usize>,
    /// Masked nodes below `bound - tol`.
    pub flagged: Vec<usize>,
}

impl<T: Real> DefectReport<T> {
    pub fn passes(&self) -> bool {
        self.flagged.is_empty()
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Nodes away from the faces and the distance skeleton: the central
/// `|grad d|` lies in `[0.9, 1.1]` at the node and all axis neighbours,
/// `|Laplacian d| <= 1 / (2h)`, and the node is more than `2h` from the origin.
pub fn smooth_mask<T: Real>(d: &ScalarField<T>) -> Vec<bool> {
    let grid = *d.grid();
    let h = grid.spacing();
    let grads = d.grad_sq();
    let lap = d.laplacian();
    let (lo, hi) = (T::lit(0.81), T::lit(1.21));
    let good: Vec<bool> = grads.iter().map(|&g| g >= lo && g <= hi).collect();
    let n = grid.points_per_axis();
    (0..grid.len())
        .map(|i| {
            let m = grid.multi_index(i);
            if (0..grid.dim()).any(|a| m[a] < 2 || m[a] + 2 >= n) {
                return false;
            }
            if grid.radius(i) <= T::lit(2.0) * h || lap[i].abs() > T::lit(0.5) / h || !good[i] {
                return false;
            }
            (0..grid.dim()).all(|a| {
                let mut lo_m = m;
                let mut hi_m = m;
                lo_m[a] -= 1;
                hi_m[a] += 1;
                good[grid.flat_index(lo_m)] && good[grid.flat_index(hi_m)]
            })
        })
        .collect()
}

/// Central estimate of `eta(d)_t - Laplacian eta(d)` at the mid time of two
/// signed-distance snapshots `dt` apart; the Laplacian acts on the average of
/// `eta(d)` at both ends.
pub fn heat_defect<T: Real>(
    d_prev: &ScalarField<T>,
    d_next: &ScalarField<T>,
    dt: T,
    pp: &ProfileParams<T>,
) -> Result<DefectReport<T>> {
    let grid = *d_prev.grid();
    if !grid.same_as(d_next.grid()) {
        return Err(Error::GridMismatch);
    }
    if !(dt > T::zero()) {
        return Err(Error::Config(format!(
            "snapshot spacing must be positive, got {dt}"
        )));
    }
    let e0 = d_prev.map(|x| eta(pp, x));
    let e1 = d_next.map(|x| eta(pp, x));
    let half = T::lit(0.5);
    let avg: Vec<T> = e0
        .values()
        .iter()
        .zip(e1.values())
        .map(|(a, b)| half * (*a + *b))
        .collect();
    let mut lap = vec![T::zero(); avg.len()];
    for_each_local(&grid, &avg, |i, l| lap[i] = l.laplacian());

    let mid = half * (d_prev.time() + d_next.time());
    let d_mid = ScalarField::from_parts_unchecked(
        grid,
        d_prev
            .values()
            .iter()
            .zip(d_next.values())
            .map(|(a, b)| half * (*a + *b))
            .collect(),
        mid,
    );
    let mask = smooth_mask(&d_mid);
    let h = grid.spacing();
    let delta = pp.delta();
    let bound = -T::lit(6.0) / delta;
    let tol = T::lit(10.0) * h / (delta * delta);

    let mut values = vec![T::zero(); grid.len()];
    let mut min = T::infinity();
    let mut argmin = None;
    let mut flagged = Vec::new();
    for i in 0..grid.len() {
        if !mask[i] {
            continue;
        }
        let v = (e1.values()[i] - e0.values()[i]) / dt - lap[i];
        values[i] = v;
        if v < min {
            min = v;
            argmin = Some(i);
        }
        if v < bound - tol {
            flagged.push(i);
        }
    }
    Ok(DefectReport {
        defect: ScalarField::from_parts_unchecked(grid, values, mid),
        mask,
        bound,
        tol,
        min,
        argmin,
        flagged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `r < r-`.
    Lower,
    /// `r > r+`.
    Upper,
}

impl ViolationKind {
    pub fn label(&self) -> &'static str {
        match self {
            ViolationKind::Lower => "lower",
            ViolationKind::Upper => "upper",
        }
    }
}

/// One node where the ordering `r- <= r <= r+` fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation<T> {
    pub t: T,
    pub node_index: usize,
    pub kind: ViolationKind,
    pub value: T,
    pub bound: T,
    /// True when the node lies in one of the excluded bands.
    pub banded: bool,
}

/// Ordering statistics, split between nodes outside the excluded bands
/// (`r+` in `[delta/4, delta/2]` or `r-` in `[-delta/2, -delta/4]`) and nodes
/// inside them.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport<T> {
    pub t: T,
    pub nodes: usize,
    pub masked_nodes: usize,
    pub masked_lower: usize,
    pub masked_upper: usize,
    pub banded_lower: usize,
    pub banded_upper: usize,
    /// Nodes where `r- > r+`, so that no value can satisfy the ordering.
    pub inverted: usize,
    pub violations: Vec<Violation<T>>,
}

impl<T: Real> SandwichReport<T> {
    /// Nodes outside the bands violating either side, as a fraction of the
    /// nodes outside the bands.
    pub fn masked_fraction(&self) -> f64 {
        if self.masked_nodes == 0 {
            return 0.0;
        }
        let bad = self
            .violations
            .iter()
            .filter(|v| !v.banded)
            .map(|v| v.node_index)
            .collect::<std::collections::BTreeSet<_>>()
            .len();
        bad as f64 / self.masked_nodes as f64
    }

    /// Rows `t,node_index,kind,value,bound`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,node_index,kind,value,bound")?;
        for v in &self.violations {
            writeln!(
                w,
                "{},{},{},{},{}",
                v.t.as_f64(),
                v.node_index,
                v.kind.label(),
                v.value.as_f64(),
                v.bound.as_f64()
            )?;
        }
        Ok(())
    }
}

/// Counts nodes violating `r- <= r` and `r <= r+`.
pub fn sandwich_check<T: Real>(
    rminus: &ScalarField<T>,
    r: &ScalarField<T>,
    rplus: &ScalarField<T>,
    pp: &ProfileParams<T>,
) -> Result<SandwichReport<T>> {
    let grid: GridSpec<T> = *r.grid();
    if !grid.same_as(rminus.grid()) || !grid.same_as(rplus.grid()) {
        return Err(Error::GridMismatch);
    }
    let (q, h) = (T::lit(0.25) * pp.delta(), T::lit(0.5) * pp.delta());
    let t = r.time();
    let mut report = SandwichReport {
        t,
        nodes: grid.len(),
        masked_nodes: 0,
        masked_lower: 0,
        masked_upper: 0,
        banded_lower: 0,
        banded_upper: 0,
        inverted: 0,
        violations: Vec::new(),
    };
    for i in 0..grid.len() {
        let (lo, x, hi) = (rminus.values()[i], r.values()[i], rplus.values()[i]);
        let banded = (hi >= q && hi <= h) || (lo >= -h && lo <= -q);
        if !banded {
            report.masked_nodes += 1;
        }
        if lo > hi {
            report.inverted += 1;
        }
        for (kind, violated, bound) in [
            (ViolationKind::Lower, x < lo, lo),
            (ViolationKind::Upper, x > hi, hi),
        ] {
            if !violated {
                continue;
            }
            let counter = match (kind, banded) {
                (ViolationKind::Lower, false) => &mut report.masked_lower,
                (ViolationKind::Upper, false) => &mut report.masked_upper,
                (ViolationKind::Lower, true) => &mut report.banded_lower,
                (ViolationKind::Upper, true) => &mut report.banded_upper,
            };
            *counter += 1;
            report.violations.push(Violation {
                t,
                node_index: i,
                kind,
                value: x,
                bound,
                banded,
            });
        }
    }
    Ok(report)
}
