//! One pipeline per scenario name. Each fills the run's summary rows and
//! writes its own field and table artifacts.

use std::f64::consts::FRAC_PI_4;
use std::io::{self, Write};

use spinfront::grid::{GridSpec, ScalarField};
use spinfront::levelset::{
    analytic_sphere, build_initial_height, default_sigma, evolve, extract_front, signed_distance,
    stable_dt,
};
use spinfront::reaction::{
    allen_cahn_residual, asymptotic_probe, consistency_samples, lift_spin, ll_residual,
    rhs_consistency, solve, ProbeMasks, CONSISTENCY_TOLERANCE,
};
use spinfront::spin_maps::{
    critical_point_v3, eval_map, eval_map_derivatives, front_value, limit_value, map_jet,
    ode_residuals, verify_derivatives, TRANSCRIPTION_TOLERANCE,
};
use spinfront::transition::{eta, eta_d1, eta_d2, eta_quartic};
use spinfront::viscosity::{heat_defect, sandwich_check, sub_profile, super_profile};
use spinfront::{Error, MapKind, PhysParams};

use crate::artifacts::Run;
use crate::config::{Scenario, ScenarioName};

/// Why a pipeline stopped before finishing its rows.
#[derive(Debug)]
pub enum Abort {
    Io(io::Error),
    Numeric(Error),
}

impl From<io::Error> for Abort {
    fn from(e: io::Error) -> Self {
        Abort::Io(e)
    }
}

impl From<Error> for Abort {
    fn from(e: Error) -> Self {
        Abort::Numeric(e)
    }
}

type Outcome = Result<(), Abort>;

/// Inner and outer compact masks stay this far from the front.
const PROBE_MARGIN: f64 = 0.15;

pub fn run(s: &Scenario, out: &mut Run) -> Outcome {
    match s.name {
        ScenarioName::Identities => identities(s, out),
        ScenarioName::ProfileChecks => profile_checks(s, out),
        ScenarioName::McfSphere => mcf_sphere(s, out),
        ScenarioName::DefectCheck => defect_check(s, out),
        ScenarioName::LimitSweep => limit_sweep(s, out),
        ScenarioName::PlanarSteady => planar_steady(s, out),
        ScenarioName::FrontCapture => front_capture(s, out),
        ScenarioName::Map2Asymptotics => map2_asymptotics(s, out),
    }
}

fn tag(t: f64) -> String {
    format!("{t:.3}")
}

fn write_field(out: &mut Run, name: &str, f: &ScalarField<f64>) -> io::Result<()> {
    out.write(name, |w| f.write_csv(w))
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2)
        .all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
}

fn verdict_row(out: &mut Run, name: String, measured: f64, holds: bool, invariant: &'static str) {
    out.check(name, measured, "holds".to_string(), holds, invariant);
}

/// `n` points with `|mu r|` log-spaced over `[1e-3, 50]`, both signs.
fn log_sweep(p: &PhysParams<f64>, n: usize) -> Vec<f64> {
    let half = n / 2;
    let (lo, hi) = (1e-3f64.ln(), 50f64.ln());
    (0..half)
        .flat_map(|i| {
            let x = (lo + (hi - lo) * i as f64 / (half - 1) as f64).exp() / p.mu();
            [x, -x]
        })
        .collect()
}

fn bisect_dv3(p: &PhysParams<f64>, mut lo: f64, mut hi: f64) -> Option<f64> {
    let g = |r: f64| eval_map_derivatives(p, MapKind::MapI, r).map(|d| d.dv[2]);
    let g_lo = g(lo).ok()?;
    if g_lo * g(hi).ok()? >= 0.0 {
        return None;
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid).ok()? * g_lo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn identities(s: &Scenario, out: &mut Run) -> Outcome {
    let p = &s.params;
    let kinds = [MapKind::MapI, MapKind::map_ii(s.k)?];
    let expected = -p.mu() * (p.epsilon() * p.epsilon()).sin();
    let (mut norm, mut wr1, mut wr2, mut res1, mut res2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut below_pole = true;
    for r in log_sweep(p, 1000) {
        for kind in kinds {
            let jet = map_jet(p, kind, r)?;
            norm = norm.max((jet.value.norm() - 1.0).abs());
            below_pole &= jet.value.v3.abs() < 1.0 || matches!(kind, MapKind::MapII { .. });
            let w = jet.wronskian();
            match kind {
                MapKind::MapI => wr1 = wr1.max(((w - expected) / expected).abs()),
                MapKind::MapII { .. } => wr2 = wr2.max(w.abs()),
            }
            let o = ode_residuals(p, kind, r)?;
            res1 = res1.max(o.relative1());
            res2 = res2.max(o.relative2());
        }
    }
    out.at_most("unit_norm_defect", norm, 1e-12, "spin_maps.unit_norm");
    out.at_most(
        "wronskian_map_i_rel_error",
        wr1,
        1e-8,
        "spin_maps.wronskian_map_i",
    );
    out.at_most("wronskian_map_ii", wr2, 0.0, "spin_maps.wronskian_map_ii");
    out.at_most(
        "ode_residual_azimuthal_rel",
        res1,
        1e-6,
        "spin_maps.profile_ode",
    );
    out.at_most(
        "ode_residual_polar_rel",
        res2,
        1e-6,
        "spin_maps.profile_ode",
    );
    verdict_row(
        out,
        "map_i_below_pole".into(),
        norm,
        below_pole,
        "spin_maps.map_i_pole_free",
    );

    let mut deriv = 0.0f64;
    for i in 0..=40 {
        let r = (-10.0 + 0.5 * i as f64) / p.mu();
        for kind in kinds {
            let c = verify_derivatives(p, kind, r)?;
            deriv = deriv.max(c.rel_first).max(c.rel_second);
        }
    }
    out.at_most(
        "derivative_fd_rel",
        deriv,
        TRANSCRIPTION_TOLERANCE,
        "spin_maps.closed_form_derivatives",
    );

    let r_star = critical_point_v3(p);
    let span = 10.0 / p.mu();
    match bisect_dv3(p, -span, span) {
        Some(root) => out.at_most(
            "critical_point_vs_bisection_over_eps",
            (r_star - root).abs() / p.epsilon(),
            1e-10,
            "spin_maps.critical_point",
        ),
        None => verdict_row(
            out,
            "critical_point_bracketed".into(),
            r_star,
            false,
            "spin_maps.critical_point",
        ),
    }
    let lead = p.epsilon() * (0.25 * p.beta() * p.beta()).ln().abs() / (4.0 * p.stiffness().sqrt());
    out.at_most(
        "critical_point_abs",
        r_star.abs(),
        lead + p.epsilon() * p.epsilon(),
        "spin_maps.critical_point_asymptotics",
    );
    let fv = front_value(p);
    out.at_most(
        "front_value_norm_defect",
        (fv.norm() - 1.0).abs(),
        1e-12,
        "spin_maps.front_value",
    );
    out.record("front_value_v2", fv.v2, "spin_maps.front_value");
    out.record("front_value_v3", fv.v3, "spin_maps.front_value");

    out.write("map_sweep.csv", |w| {
        writeln!(
            w,
            "r,map_i_v1,map_i_v2,map_i_v3,map_ii_v1,map_ii_v2,map_ii_v3"
        )?;
        for i in 0..=400 {
            let r = (-10.0 + 0.05 * i as f64) / p.mu();
            let a = eval_map(p, kinds[0], r).map_err(io::Error::other)?;
            let b = eval_map(p, kinds[1], r).map_err(io::Error::other)?;
            writeln!(
                w,
                "{r},{},{},{},{},{},{}",
                a.v1, a.v2, a.v3, b.v1, b.v2, b.v3
            )?;
        }
        Ok(())
    })?;
    Ok(())
}

fn profile_checks(s: &Scenario, out: &mut Run) -> Outcome {
    let pp = &s.profile;
    let d = pp.delta();
    let q = |z: f64| [eta_quartic(d, z), eta_d1(pp, z), eta_d2(pp, z)];
    let left = [-5.0 * d / 8.0, 0.0, 0.0];
    let right = [-d / 2.0, 1.0, 0.0];
    let (at_quarter, at_half) = (q(d / 4.0), q(d / 2.0));
    let junction = (0..3)
        .map(|k| {
            (at_quarter[k] - left[k])
                .abs()
                .max((at_half[k] - right[k]).abs())
        })
        .fold(0.0, f64::max);
    out.at_most(
        "junction_mismatch",
        junction,
        1e-12 / (d * d),
        "transition.c2_junctions",
    );

    let peak = eta_d2(pp, pp.inflection());
    out.at_most(
        "peak_eta_d2_error",
        (peak - 6.0 / d).abs(),
        1e-10,
        "transition.peak_curvature",
    );

    let n = 10_000;
    let (mut sweep_max, mut outside) = (f64::MIN, 0usize);
    for i in 0..=n {
        let z = -d + 2.0 * d * i as f64 / n as f64;
        if !(0.0..=1.0).contains(&eta_d1(pp, z)) {
            outside += 1;
        }
        sweep_max = sweep_max.max(eta_d2(pp, z));
    }
    out.at_most(
        "eta_d2_excess",
        sweep_max - 6.0 / d,
        1e-10,
        "transition.peak_curvature",
    );
    out.at_most(
        "eta_d1_outside_unit_interval",
        outside as f64,
        0.0,
        "transition.monotone",
    );

    let a = pp.band_bound();
    let end = pp.band_end();
    let band_bad = (1..=n)
        .filter(|&i| {
            let z = d / 4.0 + (end - d / 4.0) * i as f64 / n as f64;
            let e1 = eta_d1(pp, z);
            !(e1 > 0.0 && e1 <= a)
        })
        .count();
    out.check(
        "band_bound",
        a,
        "0 < x < 1".into(),
        a > 0.0 && a < 1.0,
        "transition.band_bound",
    );
    out.at_most(
        "band_slope_violations",
        band_bad as f64,
        0.0,
        "transition.band_bound",
    );
    out.record("band_end", end, "transition.band_bound");

    out.write("eta_profile.csv", |w| {
        writeln!(w, "z,eta,eta_d1,eta_d2")?;
        for i in 0..=1000 {
            let z = -d + 2.0 * d * i as f64 / 1000.0;
            writeln!(w, "{z},{},{},{}", eta(pp, z), eta_d1(pp, z), eta_d2(pp, z))?;
        }
        Ok(())
    })?;
    Ok(())
}

/// Initial height function for the configured sphere and its level-set flow
/// sampled at `times`.
fn sphere_flow(
    s: &Scenario,
    times: &[f64],
) -> Result<(ScalarField<f64>, Vec<ScalarField<f64>>), Error> {
    let w0 = build_initial_height(s.grid, s.radius)?;
    let snaps = evolve(&w0, default_sigma(&w0), stable_dt(&s.grid), times)?;
    Ok((w0, snaps))
}

fn distance(w: &ScalarField<f64>) -> Result<ScalarField<f64>, Error> {
    signed_distance(&extract_front(w), w)
}

fn mcf_sphere(s: &Scenario, out: &mut Run) -> Outcome {
    let times: Vec<f64> = (1..=4)
        .map(|i| 0.2 * i as f64 * s.profile.t_star())
        .collect();
    let (w0, snaps) = sphere_flow(s, &times)?;
    let dim = s.grid.dim();
    let mut rows = Vec::new();
    let mut prev = f64::INFINITY;
    let mut shrinking = true;
    for (t, w) in times.iter().zip(&snaps) {
        let front = extract_front(w);
        let measured = front
            .mean_radius()
            .ok_or_else(|| Error::ExtinctFront(format!("no front at t = {t}")))?;
        let exact = analytic_sphere(s.radius, dim, *t)?;
        let rel = (measured - exact).abs() / exact;
        out.at_most(
            format!("radius_rel_error_t{}", tag(*t)),
            rel,
            0.02,
            "levelset.sphere_law",
        );
        shrinking &= measured < prev;
        prev = measured;
        rows.push((*t, measured, exact, rel));
    }
    if dim > 1 {
        verdict_row(
            out,
            "radius_strictly_decreasing".into(),
            prev,
            shrinking,
            "levelset.monotone_shrinkage",
        );
    }
    out.write("radius.csv", |w| {
        writeln!(w, "t,radius,exact,rel_error")?;
        for (t, m, e, r) in &rows {
            writeln!(w, "{t},{m},{e},{r}")?;
        }
        Ok(())
    })?;
    write_field(out, "w_t0.000.csv", &w0)?;
    for (t, w) in times.iter().zip(&snaps) {
        write_field(out, &format!("w_t{}.csv", tag(*t)), w)?;
    }
    Ok(())
}

fn defect_check(s: &Scenario, out: &mut Run) -> Outcome {
    let t_star = s.profile.t_star();
    let half = 0.01 * t_star;
    let centres = [0.2 * t_star, 0.4 * t_star];
    let times: Vec<f64> = centres.iter().flat_map(|&c| [c - half, c + half]).collect();
    let (_, snaps) = sphere_flow(s, &times)?;
    for (i, c) in centres.iter().enumerate() {
        let (a, b) = (&snaps[2 * i], &snaps[2 * i + 1]);
        let rep = heat_defect(
            &distance(a)?,
            &distance(b)?,
            b.time() - a.time(),
            &s.profile,
        )?;
        out.at_least(
            format!("heat_defect_min_t{}", tag(*c)),
            rep.min,
            rep.bound - rep.tol,
            "viscosity.heat_defect_bound",
        );
        out.at_least(
            format!("heat_defect_masked_nodes_t{}", tag(*c)),
            rep.masked_count() as f64,
            1.0,
            "viscosity.smooth_mask_nonempty",
        );
        out.record(
            format!("heat_defect_flagged_t{}", tag(*c)),
            rep.flagged.len() as f64,
            "viscosity.heat_defect_bound",
        );
        write_field(out, &format!("defect_t{}.csv", tag(*c)), &rep.defect)?;
    }
    Ok(())
}

fn limit_sweep(s: &Scenario, out: &mut Run) -> Outcome {
    let ladder = s.name.epsilon_ladder(s.params.epsilon());
    let params: Vec<PhysParams<f64>> = ladder
        .iter()
        .map(|&e| s.params.with_epsilon(e))
        .collect::<Result<_, _>>()?;
    let mut table = Vec::new();
    for k in [0.0, FRAC_PI_4] {
        let kind = MapKind::map_ii(k)?;
        for r in [0.1, -0.1] {
            let mut errs = [vec![], vec![], vec![]];
            for p in &params {
                let v = eval_map(p, kind, r)?;
                let target = limit_value(p, kind, r);
                let (va, ta) = (v.to_array(), target.to_array());
                for c in 0..3 {
                    errs[c].push((va[c] - ta[c]).abs());
                }
                table.push(("map-II", k, r, p.epsilon(), v, target));
            }
            for (c, e) in errs.iter().enumerate() {
                verdict_row(
                    out,
                    format!("map_ii_k{k:.4}_r{r:+}_error_v{}_decreasing", c + 1),
                    *e.last().unwrap(),
                    strictly_decreasing(e),
                    "spin_maps.map_ii_limit",
                );
            }
        }
    }
    for r in [0.1, -0.1] {
        let mut off = [vec![], vec![], vec![]];
        for p in &params {
            let v = eval_map(p, MapKind::MapI, r)?;
            off[0].push(v.v1.abs());
            off[1].push(1.0 - v.v2.abs());
            off[2].push(v.v3.abs());
            table.push((
                "map-I",
                0.0,
                r,
                p.epsilon(),
                v,
                limit_value(p, MapKind::MapI, r),
            ));
        }
        for (label, e) in ["abs_v1", "one_minus_abs_v2", "abs_v3"].iter().zip(&off) {
            verdict_row(
                out,
                format!("map_i_r{r:+}_{label}_decreasing"),
                *e.last().unwrap(),
                strictly_decreasing(e),
                "spin_maps.map_i_limit",
            );
        }
        let finest = eval_map(params.last().unwrap(), MapKind::MapI, r)?;
        out.record(
            format!("map_i_r{r:+}_v2_sign"),
            finest.v2.signum(),
            "spin_maps.map_i_limit_sign",
        );
    }
    out.write("limit_sweep.csv", |w| {
        writeln!(w, "map,k,r,epsilon,v1,v2,v3,limit_v1,limit_v2,limit_v3")?;
        for (m, k, r, e, v, l) in &table {
            writeln!(
                w,
                "{m},{k},{r},{e},{},{},{},{},{},{}",
                v.v1, v.v2, v.v3, l.v1, l.v2, l.v3
            )?;
        }
        Ok(())
    })?;
    Ok(())
}

fn planar_steady(s: &Scenario, out: &mut Run) -> Outcome {
    let p = &s.params;
    let grid = s.grid;
    let r0 = ScalarField::from_fn(grid, 0.0, |x| x[0])?;
    let mut cfg = s.solver_for(p);
    cfg.t_end = 100.0 * cfg.dt;
    let last = solve(p, &r0, &cfg, &[])?.pop().expect("final snapshot");
    let drift = (0..grid.len())
        .filter(|&i| !grid.is_boundary(i))
        .map(|i| (last.values()[i] - r0.values()[i]).abs())
        .fold(0.0, f64::max);
    out.at_most(
        "interior_drift_100_steps",
        drift,
        1e-6,
        "reaction.planar_steady",
    );
    write_field(out, "r_final.csv", &last)?;

    let rep = rhs_consistency(p, &consistency_samples(p, 100))?;
    out.at_most(
        "reaction_routes_rel",
        rep.max_rel_ab,
        CONSISTENCY_TOLERANCE,
        "reaction.route_agreement",
    );
    out.at_most(
        "printed_ratio_spread",
        rep.ratio_spread,
        1e-8,
        "reaction.printed_ratio",
    );
    out.record("printed_ratio", rep.ratio_mean, "reaction.printed_ratio");

    let mut norms = Vec::new();
    for (level, g) in [grid, grid.refined()].into_iter().enumerate() {
        let (split, cross, diff) = residual_norms(s, p, g, out, level == 0)?;
        out.record(
            format!("ll_split_norm_n{}", g.points_per_axis()),
            split,
            "reaction.ll_residual",
        );
        out.record(
            format!("ll_cross_norm_n{}", g.points_per_axis()),
            cross,
            "reaction.ll_residual",
        );
        out.at_most(
            format!("ll_form_difference_n{}", g.points_per_axis()),
            diff,
            split.min(cross),
            "reaction.ll_form_equivalence",
        );
        norms.push((split, cross));
    }
    let band = |x: f64| (3.5..=4.5).contains(&x);
    let ratio_split = norms[0].0 / norms[1].0;
    let ratio_cross = norms[0].1 / norms[1].1;
    out.check(
        "ll_split_refinement_ratio",
        ratio_split,
        "3.5 <= x <= 4.5".into(),
        band(ratio_split),
        "reaction.ll_convergence",
    );
    out.check(
        "ll_cross_refinement_ratio",
        ratio_cross,
        "3.5 <= x <= 4.5".into(),
        band(ratio_cross),
        "reaction.ll_convergence",
    );
    Ok(())
}

/// Landau–Lifshitz residual norms of the lifted planar solution after ten
/// steps on `grid`, plus the Allen–Cahn residual on the coarse level.
fn residual_norms(
    s: &Scenario,
    p: &PhysParams<f64>,
    grid: GridSpec<f64>,
    out: &mut Run,
    coarse: bool,
) -> Result<(f64, f64, f64), Abort> {
    let r0 = ScalarField::from_fn(grid, 0.0, |x| x[0])?;
    let mut cfg = s.solver_for(p);
    if !coarse {
        // halving h quarters the step, configured or not
        cfg.dt *= 0.25;
    }
    cfg.t_end = 10.0 * cfg.dt;
    let snaps = solve(p, &r0, &cfg, &[9.0 * cfg.dt])?;
    let dt = snaps[1].time() - snaps[0].time();
    let u0 = lift_spin(p, MapKind::MapI, &snaps[0])?;
    let u1 = lift_spin(p, MapKind::MapI, &snaps[1])?;
    let res = ll_residual(p, &u0, &u1, dt)?;
    if coarse {
        let ac = allen_cahn_residual(p, &snaps[0], &snaps[1], dt)?;
        out.record("allen_cahn_max_residual", ac.max_abs, "reaction.allen_cahn");
        write_field(out, "ll_form_difference.csv", &res.difference)?;
    }
    Ok((res.norm_split, res.norm_cross, res.max_difference))
}

fn front_capture(s: &Scenario, out: &mut Run) -> Outcome {
    let p = &s.params;
    let pp = &s.profile;
    let t = s.solver.t_end;
    let (w0, snaps) = sphere_flow(s, &[t])?;
    let w = &snaps[0];
    let d0 = distance(&w0)?;
    let r0 = super_profile(&d0, pp, 0.0)?.r;
    let r = solve(p, &r0, &s.solver_for(p), &[])?
        .pop()
        .expect("final snapshot");
    let d = distance(w)?;
    let rplus = super_profile(&d, pp, t)?.r;
    let rminus = sub_profile(&d, pp, t)?.r;
    let rep = sandwich_check(&rminus, &r, &rplus, pp)?;
    out.at_most(
        "sandwich_violation_fraction",
        rep.masked_fraction(),
        0.01,
        "viscosity.sandwich",
    );
    out.record(
        "sandwich_masked_nodes",
        rep.masked_nodes as f64,
        "viscosity.sandwich",
    );
    out.record(
        "sandwich_masked_lower",
        rep.masked_lower as f64,
        "viscosity.sandwich",
    );
    out.record(
        "sandwich_masked_upper",
        rep.masked_upper as f64,
        "viscosity.sandwich",
    );
    out.record(
        "sandwich_banded_lower",
        rep.banded_lower as f64,
        "viscosity.sandwich_bands",
    );
    out.record(
        "sandwich_banded_upper",
        rep.banded_upper as f64,
        "viscosity.sandwich_bands",
    );
    out.record(
        "sandwich_inverted_nodes",
        rep.inverted as f64,
        "viscosity.sandwich_order",
    );
    out.write("violations.csv", |f| rep.write_csv(f))?;

    let masks = ProbeMasks::from_level_set(w, PROBE_MARGIN)?;
    let u = lift_spin(p, MapKind::MapI, &r)?;
    let row = asymptotic_probe(p, MapKind::MapI, &u, &masks)?;
    out.record("map_i_inner_error", row.inner_error, "reaction.probe_map_i");
    out.record("map_i_outer_error", row.outer_error, "reaction.probe_map_i");
    out.record(
        "map_i_near_front_u3",
        row.near_front.v3,
        "reaction.probe_map_i",
    );

    write_field(out, &format!("r_t{}.csv", tag(t)), &r)?;
    write_field(out, &format!("rplus_t{}.csv", tag(t)), &rplus)?;
    write_field(out, &format!("rminus_t{}.csv", tag(t)), &rminus)?;
    write_field(out, &format!("d_t{}.csv", tag(t)), &d)?;
    out.write(&format!("u_t{}.csv", tag(t)), |f| u.write_csv(f))?;
    Ok(())
}

fn map2_asymptotics(s: &Scenario, out: &mut Run) -> Outcome {
    let t = s.solver.t_end;
    let (w0, snaps) = sphere_flow(s, &[t])?;
    let r0 = super_profile(&distance(&w0)?, &s.profile, 0.0)?.r;
    let masks = ProbeMasks::from_level_set(&snaps[0], PROBE_MARGIN)?;
    let kind = MapKind::map_ii(s.k)?;
    let mut rows = Vec::new();
    let mut finest_u = None;
    for eps in s.name.epsilon_ladder(s.params.epsilon()) {
        let p = s.params.with_epsilon(eps)?;
        let r = solve(&p, &r0, &s.solver_for(&p), &[])?
            .pop()
            .expect("final snapshot");
        let u = lift_spin(&p, kind, &r)?;
        rows.push(asymptotic_probe(&p, kind, &u, &masks)?);
        finest_u = Some(u);
    }
    let inner: Vec<f64> = rows.iter().map(|r| r.inner_error).collect();
    let outer: Vec<f64> = rows.iter().map(|r| r.outer_error).collect();
    let finest = rows.last().expect("non-empty ladder");
    out.at_most(
        "inner_error_finest",
        finest.inner_error,
        0.05,
        "reaction.inner_limit",
    );
    out.at_most(
        "outer_error_finest",
        finest.outer_error,
        0.05,
        "reaction.outer_limit",
    );
    verdict_row(
        out,
        "inner_error_decreasing".into(),
        finest.inner_error,
        strictly_decreasing(&inner),
        "reaction.inner_limit",
    );
    verdict_row(
        out,
        "outer_error_decreasing".into(),
        finest.outer_error,
        strictly_decreasing(&outer),
        "reaction.outer_limit",
    );
    out.at_most(
        "near_front_u3_error",
        (finest.near_front.v3 - finest.front_target.v3).abs(),
        0.1,
        "reaction.front_value",
    );
    out.write("probe.csv", |f| {
        writeln!(
            f,
            "epsilon,inner_error,outer_error,near_u1,near_u2,near_u3,front_u1,front_u2,front_u3"
        )?;
        for r in &rows {
            let (n, a) = (r.near_front, r.front_target);
            writeln!(
                f,
                "{},{},{},{},{},{},{},{},{}",
                r.epsilon, r.inner_error, r.outer_error, n.v1, n.v2, n.v3, a.v1, a.v2, a.v3
            )?;
        }
        Ok(())
    })?;
    if let Some(u) = finest_u {
        out.write(&format!("u_t{}.csv", tag(t)), |f| u.write_csv(f))?;
    }
    Ok(())
}
