use crate::artifact::{Bundle, Table};
use crate::config::Resolved;
use normcircle::algebra::spec_file::format_rational;
use normcircle::algebra::FieldElement;
use normcircle::circle::{minor_arc_scan, ArcLabel, ScanOptions};
use normcircle::hl::{
    prediction, singular_integral, singular_series, IntegralOptions, LocalDensity, SeriesOptions,
    SingularIntegralEstimate, SingularSeriesEstimate,
};
use normcircle::lattice::{count_solutions, verify_witness, weak_approx_search, CountOptions, SearchOutcome};
use normcircle::local::{certify_places, HenselOutcome, LocalCertificate, LocalSurvey};
use normcircle::numeric::fmt17;
use normcircle::selftest::{self, SelftestOptions};
use normcircle::{Error, Result};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// How a command finished when it did not fail outright.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Done,
    /// The run produced a report showing no solution or certificate exists
    /// within the searched range.
    Infeasible,
    /// A built-in invariant check failed; the report is still written.
    InvariantFailed,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn element_text(e: &FieldElement) -> String {
    e.coords().iter().map(format_rational).collect::<Vec<_>>().join(";")
}

fn ints_text(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn floats_text(v: &[f64]) -> String {
    v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(";")
}

fn count_options(res: &Resolved) -> CountOptions {
    CountOptions {
        budget_points: res.budget(),
        witness_cap: res.witness_cap(),
    }
}

pub fn count(res: &Resolved, out: &mut Bundle) -> Result<Status> {
    let inst = &res.instance;
    let mut table = Table::new(&["P", "count", "budget_hit", "points", "probes"]);
    let mut witnesses = Table::new(&["P", "x", "y", "z"]);
    for p in res.schedule() {
        let t = Instant::now();
        let row = count_solutions(inst, p, &count_options(res))?;
        out.time(format!("count P={p}"), ms(t));
        out.count_points(row.points + row.probes);
        table.push(vec![
            fmt17(p),
            row.count.to_string(),
            row.budget_hit.to_string(),
            row.points.to_string(),
            row.probes.to_string(),
        ]);
        for w in &row.witnesses {
            witnesses.push(vec![fmt17(p), ints_text(&w.x), ints_text(&w.y), ints_text(&w.z)]);
        }
    }
    out.add_table("count.csv", table);
    if res.witness_cap() > 0 {
        out.add_table("witnesses.csv", witnesses);
    }
    Ok(Status::Done)
}

fn series_options(res: &Resolved, gamma_cutoff: i128) -> SeriesOptions {
    SeriesOptions {
        prime_cutoff: res.prime_cutoff(),
        j_max: res.j_max(),
        tol: res.density_tol(),
        gamma_cutoff,
        budget: res.density_budget(),
    }
}

fn integral_options(res: &Resolved) -> IntegralOptions {
    IntegralOptions {
        method: res.integral_method(),
        samples: res.integral_samples(),
        steps: res.integral_steps(),
        seed: res.seed(),
        ..IntegralOptions::default()
    }
}

fn density_table(per_prime: &[LocalDensity]) -> Table {
    let mut t = Table::new(&["p", "prime_basis", "bad", "depth", "mu", "last_step", "converged"]);
    for d in per_prime {
        let basis = d
            .prime
            .basis()
            .iter()
            .map(|r| ints_text128(r))
            .collect::<Vec<_>>()
            .join("|");
        t.push(vec![
            d.p.to_string(),
            basis,
            d.bad.to_string(),
            d.depth.to_string(),
            fmt17(d.value),
            fmt17(d.last_step()),
            d.converged.to_string(),
        ]);
    }
    t
}

fn ints_text128(v: &[i128]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// count / prediction, with 0/0 read as 0.
pub fn ratio(count: u128, predicted: f64) -> f64 {
    if predicted > 0.0 {
        count as f64 / predicted
    } else if count == 0 {
        0.0
    } else {
        f64::INFINITY
    }
}

#[derive(Serialize)]
struct PredictReport<'a> {
    series: &'a SingularSeriesEstimate,
    integral: &'a SingularIntegralEstimate,
    predictions: Vec<normcircle::hl::Prediction>,
}

pub fn predict(res: &Resolved, out: &mut Bundle) -> Result<Status> {
    let inst = &res.instance;
    let t = Instant::now();
    let series = singular_series(inst, &series_options(res, res.gamma_cutoff()))?;
    out.time("singular series", ms(t));
    let t = Instant::now();
    let integral = singular_integral(inst, &integral_options(res))?;
    out.time("singular integral", ms(t));
    out.count_points(integral.samples as u128);
    let mut table = Table::new(&["P", "count", "prediction", "stderr", "ratio"]);
    table.note(format!("series: {}", fmt17(series.value())));
    table.note(format!(
        "integral: {} +- {}",
        fmt17(integral.value),
        fmt17(integral.stderr)
    ));
    let mut predictions = Vec::new();
    for p in res.schedule() {
        let t = Instant::now();
        let row = count_solutions(inst, p, &count_options(res))?;
        out.time(format!("count P={p}"), ms(t));
        out.count_points(row.points + row.probes);
        let pred = prediction(inst, Some(&series), Some(&integral), p)?;
        table.push(vec![
            fmt17(p),
            row.count.to_string(),
            fmt17(pred.value),
            fmt17(pred.stderr),
            fmt17(ratio(row.count, pred.value)),
        ]);
        predictions.push(pred);
    }
    out.add_table("predict.csv", table);
    out.add_table("series.csv", density_table(&series.per_prime));
    out.add_json(
        "predict.json",
        &PredictReport {
            series: &series,
            integral: &integral,
            predictions,
        },
    );
    Ok(Status::Done)
}

pub fn arcs(res: &Resolved, out: &mut Bundle) -> Result<Status> {
    let inst = &res.instance;
    let t = Instant::now();
    let scan = minor_arc_scan(
        inst,
        &ScanOptions {
            ps: res.schedule(),
            theta: res.theta(),
            samples: res.samples(),
            seed: res.seed(),
            constant: res.arc_constant(),
            budget: res.budget(),
        },
    )?;
    out.time("minor arc scan", ms(t));
    let mut table = Table::new(&["P", "theta", "alpha_coords", "label", "gamma", "denom_norm", "abs_S3"]);
    for s in &scan.samples {
        let (gamma, norm) = match &s.arc.approximant {
            Some(a) => (element_text(&a.gamma), a.denom_norm.to_string()),
            None => (String::new(), String::new()),
        };
        let label = match s.arc.label {
            ArcLabel::Major => "major",
            ArcLabel::Minor => "minor",
        };
        table.push(vec![
            fmt17(s.p),
            fmt17(s.arc.theta),
            floats_text(&s.arc.alpha),
            label.into(),
            gamma,
            norm,
            fmt17(s.abs_s3),
        ]);
    }
    let mut maxima = Table::new(&["P", "max_abs_S3", "minor", "major", "summands"]);
    for m in &scan.maxima {
        out.count_points(m.summands * (m.minor + m.major) as u128);
        maxima.push(vec![
            fmt17(m.p),
            fmt17(m.max_abs_s3),
            m.minor.to_string(),
            m.major.to_string(),
            m.summands.to_string(),
        ]);
    }
    match scan.exponent {
        Some(e) => maxima.note(format!("fitted exponent: {}", fmt17(e))),
        None => maxima.note("fitted exponent: unavailable"),
    }
    out.add_table("arcs.csv", table);
    out.add_table("arcs_maxima.csv", maxima);
    Ok(Status::Done)
}

/// The `local` report: certificates, and when every place is certified,
/// the local densities and singular integral they should make positive.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalReport {
    pub survey: LocalSurvey,
    pub all_certified: bool,
    #[serde(default)]
    pub densities: Vec<LocalDensity>,
    #[serde(default)]
    pub integral: Option<f64>,
    /// mu(p) > 0 for every p and J > 0; absent unless all places certify.
    #[serde(default)]
    pub positive: Option<bool>,
}

pub fn local(res: &Resolved, out: &mut Bundle) -> Result<Status> {
    let inst = &res.instance;
    let t = Instant::now();
    let survey = certify_places(inst, res.prime_cutoff(), res.hensel_depth(), res.density_budget())?;
    out.time("certify places", ms(t));
    let all = survey.all_certified();
    let mut report = LocalReport {
        all_certified: all,
        survey,
        densities: Vec::new(),
        integral: None,
        positive: None,
    };
    if all {
        let t = Instant::now();
        let series = singular_series(inst, &series_options(res, 1))?;
        let integral = singular_integral(inst, &integral_options(res))?;
        out.time("densities and integral", ms(t));
        out.count_points(integral.samples as u128);
        report.positive = Some(series.per_prime.iter().all(|d| d.value > 0.0) && integral.value > 0.0);
        report.densities = series.per_prime;
        report.integral = Some(integral.value);
    }
    let mut table = Table::new(&[
        "place",
        "p",
        "status",
        "depth",
        "variable",
        "valuation",
        "definitive",
        "mu",
    ]);
    for o in &report.survey.finite {
        let (p, row) = match o {
            HenselOutcome::Certified(c) => {
                let (var, val) = match c.evidence {
                    normcircle::local::Evidence::Partial {
                        variable, valuation, ..
                    } => (variable.to_string(), valuation.to_string()),
                    _ => (String::new(), String::new()),
                };
                let p = match &c.place {
                    normcircle::local::Place::Finite { p, .. } => *p,
                    _ => 0,
                };
                (
                    p,
                    vec!["certified".into(), c.depth.to_string(), var, val, String::new()],
                )
            }
            HenselOutcome::NotFound(r) => (
                r.p,
                vec![
                    "not_found".into(),
                    r.search_depth.to_string(),
                    String::new(),
                    String::new(),
                    r.definitive.to_string(),
                ],
            ),
        };
        let mu = report
            .densities
            .iter()
            .find(|d| d.p == p && Some(&d.prime) == prime_of(o))
            .map(|d| fmt17(d.value))
            .unwrap_or_default();
        let mut cells = vec!["finite".to_string(), p.to_string()];
        cells.extend(row);
        cells.push(mu);
        table.push(cells);
    }
    for c in &report.survey.archimedean {
        if let normcircle::local::Place::Archimedean { index, complex } = c.place {
            let kind = if complex { "complex" } else { "real" };
            table.push(vec![
                format!("{kind}:{index}"),
                String::new(),
                "certified".into(),
                "0".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
    }
    if let Some(j) = report.integral {
        table.note(format!("integral: {}", fmt17(j)));
    }
    out.add_table("local.csv", table);
    out.add_json("local.json", &report);
    Ok(match report.positive {
        None => Status::Infeasible,
        Some(true) => Status::Done,
        Some(false) => Status::InvariantFailed,
    })
}

fn prime_of(o: &HenselOutcome) -> Option<&normcircle::algebra::IdealSpec> {
    match o {
        HenselOutcome::Certified(c) => match &c.place {
            normcircle::local::Place::Finite { prime, .. } => Some(prime),
            _ => None,
        },
        HenselOutcome::NotFound(r) => Some(&r.prime),
    }
}

pub fn wapprox(res: &Resolved, out: &mut Bundle) -> Result<Status> {
    let inst = &res.instance;
    let t = Instant::now();
    let outcome = weak_approx_search(inst, &res.schedule(), res.budget())?;
    out.time("weak approximation search", ms(t));
    let tried = match &outcome {
        SearchOutcome::Found { tried, .. } => tried,
        SearchOutcome::Exhausted(r) => &r.tried,
    };
    out.count_points(tried.iter().map(|s| s.points).sum());
    if let SearchOutcome::Found { certificate, .. } = &outcome {
        verify_witness(inst, certificate)?;
    }
    out.add_json("witness.json", &outcome);
    Ok(match outcome {
        SearchOutcome::Found { .. } => Status::Done,
        SearchOutcome::Exhausted(_) => Status::Infeasible,
    })
}

#[derive(Serialize)]
struct VerifyReport {
    kind: &'static str,
    checked: usize,
    source_sha256: String,
}

#[derive(Deserialize)]
struct AnyDocument {
    report: serde_json::Value,
}

/// Replays a `wapprox` or `local` document, or a bare local certificate.
pub fn verify_cert(res: &Resolved, cert: &std::path::Path, out: &mut Bundle) -> Result<Status> {
    let inst = &res.instance;
    let bytes = std::fs::read(cert).map_err(|e| Error::InvalidSpec(format!("cannot read {}: {e}", cert.display())))?;
    let doc: AnyDocument = serde_json::from_slice(&bytes)
        .map_err(|e| Error::InvalidSpec(format!("{} is not an artifact document: {e}", cert.display())))?;
    let (kind, checked) = if let Ok(outcome) = serde_json::from_value::<SearchOutcome>(doc.report.clone()) {
        match outcome {
            SearchOutcome::Found { certificate, .. } => {
                verify_witness(inst, &certificate)?;
                ("witness", 1)
            }
            SearchOutcome::Exhausted(_) => {
                return Err(Error::InvalidSpec(
                    "an exhaustion report has no certificate to verify".into(),
                ))
            }
        }
    } else if let Ok(report) = serde_json::from_value::<LocalReport>(doc.report.clone()) {
        let certs: Vec<&LocalCertificate> = report
            .survey
            .finite
            .iter()
            .filter_map(HenselOutcome::certificate)
            .chain(&report.survey.archimedean)
            .collect();
        for c in &certs {
            c.replay(inst)
                .map_err(|e| Error::Invariant(format!("certificate does not replay: {e}")))?;
        }
        ("local", certs.len())
    } else if let Ok(c) = serde_json::from_value::<LocalCertificate>(doc.report) {
        c.replay(inst)
            .map_err(|e| Error::Invariant(format!("certificate does not replay: {e}")))?;
        ("local_certificate", 1)
    } else {
        return Err(Error::InvalidSpec(format!("{} holds no certificate", cert.display())));
    };
    out.add_json(
        "verify.json",
        &VerifyReport {
            kind,
            checked,
            source_sha256: crate::artifact::sha256_hex(&bytes),
        },
    );
    Ok(Status::Done)
}

pub fn selftest(res: &Resolved, out: &mut Bundle) -> Result<Status> {
    let t = Instant::now();
    let checks = selftest::run(&SelftestOptions {
        seed: res.seed(),
        trials: res.selftest_trials(),
        budget: res.budget(),
    });
    out.time("selftest", ms(t));
    let mut table = Table::new(&["check", "passed", "trials", "detail"]);
    for c in &checks {
        out.count_points(c.trials as u128);
        table.push(vec![
            c.name.clone(),
            c.passed.to_string(),
            c.trials.to_string(),
            c.detail.clone(),
        ]);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    table.note(format!("failed: {failed} of {}", checks.len()));
    out.add_table("selftest.csv", table);
    Ok(if failed == 0 {
        Status::Done
    } else {
        Status::InvariantFailed
    })
}
