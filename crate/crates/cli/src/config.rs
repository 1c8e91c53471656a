//! Scenario configuration: a JSON object whose sections are all optional,
//! resolved against per-scenario defaults and command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinfront::grid::GridSpec;
use spinfront::levelset::sphere_extinction_time;
use spinfront::reaction::{Boundary, SolverConfig};
use spinfront::transition::ProfileParams;
use spinfront::{Error, PhysParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    Identities,
    ProfileChecks,
    McfSphere,
    DefectCheck,
    LimitSweep,
    PlanarSteady,
    FrontCapture,
    Map2Asymptotics,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 8] = [
        ScenarioName::Identities,
        ScenarioName::ProfileChecks,
        ScenarioName::McfSphere,
        ScenarioName::DefectCheck,
        ScenarioName::LimitSweep,
        ScenarioName::PlanarSteady,
        ScenarioName::FrontCapture,
        ScenarioName::Map2Asymptotics,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::Identities => "identities",
            ScenarioName::ProfileChecks => "profile-checks",
            ScenarioName::McfSphere => "mcf-sphere",
            ScenarioName::DefectCheck => "defect-check",
            ScenarioName::LimitSweep => "limit-sweep",
            ScenarioName::PlanarSteady => "planar-steady",
            ScenarioName::FrontCapture => "front-capture",
            ScenarioName::Map2Asymptotics => "map2-asymptotics",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            ScenarioName::Identities => {
                "control-map norm, Wronskian, profile residuals, critical point"
            }
            ScenarioName::ProfileChecks => "transition profile continuity, bounds and band",
            ScenarioName::McfSphere => "level-set flow of a sphere against the analytic radius",
            ScenarioName::DefectCheck => "heat defect of eta(d) along the sphere flow",
            ScenarioName::LimitSweep => "pointwise eps -> 0 limits of both control maps",
            ScenarioName::PlanarSteady => {
                "planar steady state, reaction forms, residual equivalence"
            }
            ScenarioName::FrontCapture => "profiles from the flow, probe table and ordering report",
            ScenarioName::Map2Asymptotics => {
                "reduced equation from eta(d0) under map II, eps ladder"
            }
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|n| n.as_str() == s)
    }

    fn default_delta(&self) -> f64 {
        match self {
            ScenarioName::Map2Asymptotics => 0.02,
            _ => 0.2,
        }
    }

    fn default_epsilon(&self) -> f64 {
        match self {
            ScenarioName::Map2Asymptotics => 0.05,
            _ => 0.1,
        }
    }

    fn default_boundary(&self) -> Boundary {
        match self {
            ScenarioName::Map2Asymptotics => Boundary::Reflective,
            _ => Boundary::DirichletFarField,
        }
    }

    /// Epsilon values a scenario sweeps, coarsest first.
    pub fn epsilon_ladder(&self, eps: f64) -> Vec<f64> {
        match self {
            ScenarioName::LimitSweep => vec![2.0 * eps, eps, 0.5 * eps, 0.2 * eps],
            ScenarioName::Map2Asymptotics => vec![4.0 * eps, 2.0 * eps, eps],
            _ => vec![eps],
        }
    }

    /// Whether the scenario builds profiles from the flow up to `t_end`.
    fn follows_front(&self) -> bool {
        matches!(
            self,
            ScenarioName::FrontCapture | ScenarioName::Map2Asymptotics
        )
    }

    fn default_t_end(&self) -> f64 {
        match self {
            ScenarioName::FrontCapture => 0.1,
            _ => 0.2,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub name: String,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub profile: ProfileSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    /// Azimuth of map II.
    pub k: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub delta: Option<f64>,
    pub t_star: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: Option<usize>,
    pub half_width: Option<f64>,
    pub points: Option<usize>,
    /// Radius of the initial sphere.
    pub radius: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub boundary: Option<String>,
    pub blowup_threshold: Option<f64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub grid_n: Option<usize>,
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: ScenarioName,
    pub params: PhysParams<f64>,
    pub k: f64,
    pub profile: ProfileParams<f64>,
    pub grid: GridSpec<f64>,
    pub radius: f64,
    pub solver: SolverConfig<f64>,
    /// Whether `solver.dt` came from the file rather than the stability limit.
    pub dt_explicit: bool,
    pub output_dir: PathBuf,
}

impl Scenario {
    /// Solver settings for `p`: the configured step if one was given,
    /// otherwise the stability limit for `p`.
    pub fn solver_for(&self, p: &PhysParams<f64>) -> SolverConfig<f64> {
        let mut cfg = self.solver;
        if !self.dt_explicit {
            cfg.dt = SolverConfig::stable_dt(p, &self.grid);
        }
        cfg
    }
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Scenario, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: ConfigFile = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    resolve(file, overrides)
}

pub fn resolve(file: ConfigFile, overrides: &Overrides) -> Result<Scenario, Error> {
    let name = ScenarioName::parse(&file.name)
        .ok_or_else(|| Error::Config(format!("unknown scenario '{}'", file.name)))?;

    let epsilon = overrides
        .epsilon
        .or(file.params.epsilon)
        .unwrap_or(name.default_epsilon());
    let params = PhysParams::new(
        file.params.alpha.unwrap_or(0.0),
        file.params.beta.unwrap_or(2.0),
        epsilon,
    )?;
    for eps in name.epsilon_ladder(epsilon) {
        params.with_epsilon(eps)?;
    }
    let k = file.params.k.unwrap_or(0.0);
    if !k.is_finite() {
        return Err(Error::Config("k must be finite".into()));
    }

    let dim = file.grid.dim.unwrap_or(2);
    let grid = GridSpec::new(
        dim,
        file.grid.half_width.unwrap_or(1.6),
        overrides.grid_n.or(file.grid.points).unwrap_or(201),
    )?;
    let radius = file.grid.radius.unwrap_or(1.0);
    if !(radius > 0.0 && radius < 0.8 * grid.half_width()) {
        return Err(Error::Config(format!(
            "radius must lie in (0, {}), got {radius}",
            0.8 * grid.half_width()
        )));
    }

    let t_star = match file.profile.t_star {
        Some(t) => t,
        // a 1D front never vanishes; any horizon works for the drift
        None => sphere_extinction_time(radius, dim).unwrap_or(1.0),
    };
    let delta = overrides
        .delta
        .or(file.profile.delta)
        .unwrap_or(name.default_delta());
    let profile = ProfileParams::new(delta, t_star)?;

    let boundary = match file.solver.boundary.as_deref() {
        None => name.default_boundary(),
        Some("dirichlet-far-field") => Boundary::DirichletFarField,
        Some("reflective") => Boundary::Reflective,
        Some(other) => return Err(Error::Config(format!("unknown boundary '{other}'"))),
    };
    let mut solver = SolverConfig::stable(
        &params,
        &grid,
        file.solver.t_end.unwrap_or(name.default_t_end()),
        boundary,
    );
    if let Some(dt) = file.solver.dt {
        solver.dt = dt;
    }
    if let Some(b) = file.solver.blowup_threshold {
        solver.blowup_threshold = b;
    }
    solver.validate(&params, &grid)?;
    if name.follows_front() && solver.t_end >= t_star {
        return Err(Error::Config(format!(
            "t_end {} must precede the extinction time {t_star}",
            solver.t_end
        )));
    }

    let output_dir = overrides
        .out
        .clone()
        .or(file.output_dir)
        .unwrap_or_else(|| PathBuf::from("spinfront-out").join(name.as_str()));

    Ok(Scenario {
        name,
        params,
        k,
        profile,
        grid,
        radius,
        solver,
        dt_explicit: file.solver.dt.is_some(),
        output_dir,
    })
}
