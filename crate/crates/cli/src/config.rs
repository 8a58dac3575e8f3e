use normcircle::algebra::spec_file::{describe_element, parse_element, ElementText, ExtensionDocument, FieldDocument};
use normcircle::algebra::{FieldElement, IdealSpec, Shifts};
use normcircle::fixtures;
use normcircle::hl::IntegralMethod;
use normcircle::lattice::{doubling_schedule, EquationInstance, InstanceSpec, DEFAULT_SCHEDULE_STEPS};
use normcircle::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Count,
    Predict,
    Arcs,
    Local,
    Wapprox,
    VerifyCert,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Count => "count",
            Command::Predict => "predict",
            Command::Arcs => "arcs",
            Command::Local => "local",
            Command::Wapprox => "wapprox",
            Command::VerifyCert => "verify-cert",
            Command::Selftest => "selftest",
        }
    }

    fn default_schedule(self) -> Vec<f64> {
        match self {
            Command::Count => vec![12.0],
            Command::Predict => vec![200.0, 400.0],
            Command::Arcs => vec![64.0, 128.0, 256.0, 512.0],
            Command::Wapprox => doubling_schedule(8.0, DEFAULT_SCHEDULE_STEPS),
            Command::Local | Command::VerifyCert | Command::Selftest => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidueText {
    pub x: Vec<ElementText>,
    pub y: Vec<ElementText>,
    pub z: ElementText,
}

/// Experiment description. Every field is optional on input; the resolved
/// form written next to each run has all of them filled in.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in instance name; excludes the explicit instance fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<ElementText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<ElementText>,
    /// Generators of the congruence ideal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<ElementText>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residues: Option<ResidueText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime_cutoff: Option<i128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_cutoff: Option<i128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_tol: Option<f64>,
    /// Work cap for each local density level, the direct series and each
    /// residue search at a finite place.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_budget: Option<u128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hensel_depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral_method: Option<IntegralMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integral_steps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selftest_trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_points: Option<u128>,
}

/// A config with every default materialized, plus the instance it describes.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub instance: EquationInstance,
}

macro_rules! get {
    ($c:expr, $f:ident) => {
        $c.$f.clone().expect(concat!(stringify!($f), " is resolved"))
    };
}

impl Resolved {
    pub fn schedule(&self) -> Vec<f64> {
        get!(self.config, p_schedule)
    }
    pub fn theta(&self) -> f64 {
        get!(self.config, theta)
    }
    pub fn arc_constant(&self) -> f64 {
        get!(self.config, arc_constant)
    }
    pub fn samples(&self) -> usize {
        get!(self.config, samples)
    }
    pub fn prime_cutoff(&self) -> i128 {
        get!(self.config, prime_cutoff)
    }
    pub fn gamma_cutoff(&self) -> i128 {
        get!(self.config, gamma_cutoff)
    }
    pub fn j_max(&self) -> u32 {
        get!(self.config, j_max)
    }
    pub fn density_tol(&self) -> f64 {
        get!(self.config, density_tol)
    }
    pub fn density_budget(&self) -> u128 {
        get!(self.config, density_budget)
    }
    pub fn hensel_depth(&self) -> u32 {
        get!(self.config, hensel_depth)
    }
    pub fn integral_method(&self) -> IntegralMethod {
        get!(self.config, integral_method)
    }
    pub fn integral_samples(&self) -> usize {
        get!(self.config, integral_samples)
    }
    pub fn integral_steps(&self) -> u32 {
        get!(self.config, integral_steps)
    }
    pub fn witness_cap(&self) -> usize {
        get!(self.config, witness_cap)
    }
    pub fn selftest_trials(&self) -> u64 {
        get!(self.config, selftest_trials)
    }
    pub fn seed(&self) -> u64 {
        get!(self.config, seed)
    }
    pub fn jobs(&self) -> usize {
        get!(self.config, jobs)
    }
    pub fn budget(&self) -> u128 {
        get!(self.config, budget_points)
    }

    /// Canonical JSON of the resolved config; its digest identifies the run.
    pub fn canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.config).expect("config serializes");
        s.push('\n');
        s
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidSpec(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(format!("config {}: {e}", path.display())))
}

fn elements(field: &normcircle::algebra::FieldSpec, v: &[ElementText]) -> Result<Vec<FieldElement>> {
    v.iter().map(|e| parse_element(field, e)).collect()
}

fn explicit_instance(c: &mut ExperimentConfig, base: &Path) -> Result<EquationInstance> {
    let missing = |what: &str| Error::InvalidSpec(format!("config needs `{what}` when no built-in instance is named"));
    let field_path = c.field.clone().ok_or_else(|| missing("field"))?;
    let ext_path = c.extension.clone().ok_or_else(|| missing("extension"))?;
    let absolute = |p: &Path| {
        base.join(p)
            .canonicalize()
            .map_err(|e| Error::InvalidSpec(format!("cannot read {}: {e}", p.display())))
    };
    let (field_path, ext_path) = (absolute(&field_path)?, absolute(&ext_path)?);
    let field = FieldDocument::load(&field_path)?;
    let ext = ExtensionDocument::load(&ext_path, &field)?;
    c.field = Some(field_path);
    c.extension = Some(ext_path);
    let m = field.degree();
    let n = ext.degree();
    let a = parse_element(&field, c.a.as_ref().ok_or_else(|| missing("a"))?)?;
    let b = parse_element(&field, c.b.as_ref().ok_or_else(|| missing("b"))?)?;
    let targets = c.targets.clone().ok_or_else(|| missing("targets"))?;
    let eta = c.eta.ok_or_else(|| missing("eta"))?;
    let modulus = match &c.modulus {
        Some(gens) => IdealSpec::from_generators(&field, &elements(&field, gens)?)?,
        None => IdealSpec::unit(m),
    };
    let residues = match &c.residues {
        Some(r) => Shifts {
            x: elements(&field, &r.x)?,
            y: elements(&field, &r.y)?,
            z: parse_element(&field, &r.z)?,
        },
        None => Shifts::zero(n, m),
    };
    let inst = EquationInstance::new(InstanceSpec {
        field,
        ext,
        a,
        b,
        modulus,
        residues,
        targets,
        eta,
        rho: c.rho,
    })?;
    c.modulus = Some(
        inst.modulus
            .basis()
            .iter()
            .map(|row| describe_element(&FieldElement::from_i128(row.clone())))
            .collect(),
    );
    c.residues = Some(ResidueText {
        x: inst.residues.x.iter().map(describe_element).collect(),
        y: inst.residues.y.iter().map(describe_element).collect(),
        z: describe_element(&inst.residues.z),
    });
    Ok(inst)
}

fn builtin_instance(c: &ExperimentConfig, name: &str) -> Result<EquationInstance> {
    let explicit = c.field.is_some()
        || c.extension.is_some()
        || c.a.is_some()
        || c.b.is_some()
        || c.modulus.is_some()
        || c.residues.is_some()
        || c.targets.is_some()
        || c.eta.is_some();
    if explicit {
        return Err(Error::InvalidSpec(format!(
            "built-in instance {name:?} cannot be combined with explicit instance fields"
        )));
    }
    let inst = fixtures::instance_by_name(name).ok_or_else(|| {
        Error::InvalidSpec(format!(
            "unknown instance {name:?}; expected one of {}",
            fixtures::INSTANCE_NAMES.join(", ")
        ))
    })?;
    match c.rho {
        Some(rho) => EquationInstance::new(InstanceSpec {
            rho: Some(rho),
            ..inst.spec()
        }),
        None => Ok(inst),
    }
}

/// Fills every default for `cmd`. Relative field and extension paths are
/// taken relative to `base`.
pub fn resolve(mut c: ExperimentConfig, cmd: Command, base: &Path) -> Result<Resolved> {
    if c.instance.is_none() && c.field.is_none() {
        c.instance = Some("gaussian".into());
    }
    let inst = match c.instance.clone() {
        Some(name) => builtin_instance(&c, &name)?,
        None => explicit_instance(&mut c, base)?,
    };
    c.rho = Some(inst.rho);
    let defaults = normcircle::hl::SeriesOptions::default();
    let integral = normcircle::hl::IntegralOptions::default();
    c.p_schedule.get_or_insert_with(|| cmd.default_schedule());
    c.theta.get_or_insert(0.3);
    c.arc_constant.get_or_insert(1.0);
    c.samples.get_or_insert(1000);
    c.prime_cutoff.get_or_insert(defaults.prime_cutoff);
    c.gamma_cutoff.get_or_insert(defaults.gamma_cutoff);
    c.j_max.get_or_insert(defaults.j_max);
    c.density_tol.get_or_insert(defaults.tol);
    c.density_budget.get_or_insert(defaults.budget);
    c.hensel_depth.get_or_insert(3);
    c.integral_method.get_or_insert(integral.method);
    c.integral_samples.get_or_insert(integral.samples);
    c.integral_steps.get_or_insert(integral.steps);
    c.witness_cap.get_or_insert(0);
    c.selftest_trials.get_or_insert(200);
    c.seed.get_or_insert(42);
    c.jobs
        .get_or_insert_with(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    c.budget_points.get_or_insert(2_000_000_000);
    validate(&c)?;
    Ok(Resolved {
        config: c,
        instance: inst,
    })
}

fn validate(c: &ExperimentConfig) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidSpec(msg));
    let schedule = c.p_schedule.as_deref().unwrap_or_default();
    if let Some(p) = schedule.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
        return bad(format!("P = {p} must be a finite value at least 1"));
    }
    if c.jobs == Some(0) {
        return bad("jobs must be at least 1".into());
    }
    if !matches!(c.theta, Some(t) if t > 0.0) {
        return bad("theta must be positive".into());
    }
    if !matches!(c.arc_constant, Some(t) if t > 0.0) {
        return bad("arc_constant must be positive".into());
    }
    if c.samples == Some(0) || c.integral_samples == Some(0) {
        return bad("sample counts must be positive".into());
    }
    if !matches!(c.density_tol, Some(t) if t > 0.0) {
        return bad("density_tol must be positive".into());
    }
    Ok(())
}
