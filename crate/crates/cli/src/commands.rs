use std::path::Path;

use nalgebra::DVector;
use qlike::axioms::audit;
use qlike::gallery::{
    counterexample_carrier, ks_build, ks_color, peres33, pure_state_theorem_check, uniform_characterization_check,
    CounterexampleOrder, Example31Order,
};
use qlike::measures::{pure_state, uniform};
use qlike::orders::{continuity_witness, lexicographic_order, order_from_measure};
use qlike::representation::{
    classical_represent, partial_representation, synthesize, verify_certificate, verify_classical_certificate,
    ClassicalProblem, ClassicalResult, RepresentationProblem, RepresentationResult,
};
use qlike::sphere::{piron_path, verify_piron_path, SphereFrame};
use qlike::{AnyOrder, Error, LikelihoodOrder, Subspace};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::report::{sha256_hex, InputFile, Outcome, Status};

/// Usage or validation failure; exits with code 1.
#[derive(Debug)]
pub struct CliError(pub String);

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError(e.to_string())
    }
}

pub struct Loaded<T> {
    pub value: T,
    pub input: InputFile,
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<Loaded<T>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    let value = serde_json::from_slice(&bytes)
        .map_err(|e| match e.line() {
            // validation errors raised after parsing carry no position
            0 => CliError(format!("{}: {e}", path.display())),
            line => CliError(format!("{}:{line}:{}: {e}", path.display(), e.column())),
        })?;
    Ok(Loaded { value, input: InputFile { path: path.display().to_string(), sha256: sha256_hex(&bytes) } })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn run_audit(order: &AnyOrder, seed: u64, samples: u64) -> Result<Outcome, CliError> {
    let report = audit(order, order.ambient_dim(), seed, samples)?;
    let mut summary = vec![("order".to_string(), json!(report.order)), ("dim".to_string(), json!(report.dim))];
    for a in &report.axioms {
        summary.push((format!("{}.checked", a.axiom), json!(a.checked)));
        summary.push((format!("{}.violations", a.axiom), json!(a.violations)));
        summary.push((format!("{}.not_applicable", a.axiom), json!(a.not_applicable)));
    }
    let status = if report.total_violations() == 0 { Status::Ok } else { Status::Negative };
    Ok(Outcome { status, result: to_value(&report), summary })
}

fn indeterminate(e: Error) -> Result<Outcome, CliError> {
    match e {
        Error::Indeterminate { iterations, lower, upper } => Ok(Outcome {
            status: Status::Indeterminate,
            result: json!({"status": "indeterminate", "iterations": iterations, "lower_bound": lower, "upper_bound": upper}),
            summary: vec![
                ("result".into(), json!("indeterminate")),
                ("lower_bound".into(), json!(lower)),
                ("upper_bound".into(), json!(upper)),
            ],
        }),
        other => Err(other.into()),
    }
}

pub fn run_represent(prob: &RepresentationProblem, tol: f64, partial: bool) -> Result<Outcome, CliError> {
    let solved = if partial { partial_representation(prob, tol) } else { synthesize(prob, tol) };
    let r = match solved {
        Ok(r) => r,
        Err(e) => return indeterminate(e),
    };
    let d = r.diagnostics();
    let mut summary = vec![
        ("mode".to_string(), json!(if partial { "partial" } else { "full" })),
        ("rounds".to_string(), json!(d.rounds)),
        ("pivots".to_string(), json!(d.pivots)),
        ("upper_bound".to_string(), json!(d.upper_bound)),
    ];
    let mut result = to_value(&r);
    let status = match &r {
        RepresentationResult::Feasible { margin, equivalence_residual, .. } => {
            summary.push(("result".into(), json!("feasible")));
            summary.push(("margin".into(), json!(margin)));
            summary.push(("equivalence_residual".into(), json!(equivalence_residual)));
            Status::Ok
        }
        RepresentationResult::Infeasible { certificate, .. } => {
            let verified = verify_certificate(certificate, prob, 1e-8)?;
            result["certificate_verified"] = json!(verified);
            summary.push(("result".into(), json!("infeasible")));
            summary.push(("max_eigenvalue".into(), json!(certificate.max_eigenvalue)));
            summary.push(("certificate_verified".into(), json!(verified)));
            Status::Negative
        }
    };
    Ok(Outcome { status, result, summary })
}

pub fn run_classical(prob: &ClassicalProblem, tol: f64) -> Result<Outcome, CliError> {
    let r = match classical_represent(prob, tol) {
        Ok(r) => r,
        Err(e) => return indeterminate(e),
    };
    let mut result = to_value(&r);
    let (status, summary) = match &r {
        ClassicalResult::Feasible { margin, .. } => {
            (Status::Ok, vec![("result".to_string(), json!("feasible")), ("margin".to_string(), json!(margin))])
        }
        ClassicalResult::Infeasible { certificate } => {
            let verified = verify_classical_certificate(certificate, prob, 1e-9)?;
            result["certificate_verified"] = json!(verified);
            (
                Status::Negative,
                vec![("result".to_string(), json!("infeasible")), ("certificate_verified".to_string(), json!(verified))],
            )
        }
    };
    Ok(Outcome { status, result, summary })
}

#[derive(Deserialize)]
pub struct PironInput {
    pole: Vec<f64>,
    q: Vec<f64>,
    r: Vec<f64>,
}

pub fn run_piron(input: &PironInput, tol: f64) -> Result<Outcome, CliError> {
    let frame = SphereFrame::new(&DVector::from_vec(input.pole.clone()))?;
    let (q, r) = (DVector::from_vec(input.q.clone()), DVector::from_vec(input.r.clone()));
    let path = piron_path(&frame, &q, &r, tol)?;
    let verified = verify_piron_path(&path, &q, &r, tol);
    let status = if verified { Status::Ok } else { Status::Negative };
    Ok(Outcome {
        status,
        result: json!({"hops": path.hops(), "verified": verified, "path": path.to_json()}),
        summary: vec![("hops".into(), json!(path.hops())), ("verified".into(), json!(verified))],
    })
}

pub fn run_ks(rays: Option<&[[f64; 3]]>, tol: f64) -> Result<Outcome, CliError> {
    let inst = match rays {
        Some(r) => ks_build(r, tol)?,
        None => peres33()?,
    };
    let col = ks_color(&inst);
    let colorable = col.colors.is_some();
    Ok(Outcome {
        status: if colorable { Status::Ok } else { Status::Negative },
        result: json!({
            "rays": inst.rays.len(),
            "pairs": inst.pairs.len(),
            "triples": inst.triples.len(),
            "nodes": col.nodes,
            "coloring": col.as_map(),
        }),
        summary: vec![
            ("rays".into(), json!(inst.rays.len())),
            ("triples".into(), json!(inst.triples.len())),
            ("nodes".into(), json!(col.nodes)),
            ("colorable".into(), json!(colorable)),
        ],
    })
}

fn e3(i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(3);
    v[i] = 1.0;
    v
}

/// Runs the named orders through their characteristic checks. Each entry
/// records the expected finding; the run is negative if any expectation fails.
pub fn run_gallery(seed: u64, samples: u64) -> Result<Outcome, CliError> {
    let mut entries = Vec::new();
    let mut summary = Vec::new();
    let mut record = |name: &str, expected: &str, holds: bool, detail: Value| {
        summary.push((format!("{name}.holds"), json!(holds)));
        entries.push(json!({"name": name, "expected": expected, "holds": holds, "detail": detail}));
    };

    let ex31 = Example31Order::with_pole(&e3(2))?;
    let a = audit(&ex31, 3, seed, samples)?;
    let neg = a.stats("negation").map_or(0, |s| s.violations);
    let fin = a.stats("definetti").map_or(0, |s| s.violations);
    record("example31", "negation fails, de Finetti holds", neg > 0 && fin == 0, to_value(&a));

    let lex = lexicographic_order(pure_state(&e3(2))?, pure_state(&e3(0))?, qlike::tol::EQ_TOL)?;
    let w = continuity_witness(&lex, &Subspace::line(&e3(0))?, &Subspace::line(&e3(1))?, 0.5, 14)?;
    let lex_audit = audit(&lex, 3, seed, samples)?;
    record(
        "lexicographic",
        "standard axioms hold, lower semi-continuity fails",
        w.is_some() && lex_audit.standard_violations() == 0,
        json!({"witness": w, "audit": lex_audit}),
    );

    let counter = CounterexampleOrder::with_pole(&e3(2))?;
    let c_audit = audit(&counter, 3, seed, samples)?;
    let prob = RepresentationProblem::from_order(&counter, &counterexample_carrier(&counter, 16)?, true)?;
    let full = synthesize(&prob, 1e-6)?;
    let verified = match full.certificate() {
        Some(c) => verify_certificate(c, &prob, 1e-8)?,
        None => false,
    };
    let partial = partial_representation(&prob, 1e-6)?;
    record(
        "counterexample",
        "standard axioms hold, equator instance certified infeasible, partially representable",
        c_audit.standard_violations() == 0 && verified && partial.is_feasible(),
        json!({"audit": c_audit, "certificate_verified": verified, "partial_feasible": partial.is_feasible()}),
    );

    let pure = order_from_measure(pure_state(&e3(2))?, qlike::tol::EQ_TOL)?;
    let ps = pure_state_theorem_check(&pure, &e3(2), 3, samples, seed)?;
    record("pure_state", "premises and conclusion hold", ps.premises_hold && ps.conclusion_holds, to_value(&ps));

    let uni = order_from_measure(uniform(3)?, qlike::tol::EQ_TOL)?;
    let u = uniform_characterization_check(&uni, 3, samples, seed)?;
    let triple_ok = u.triple.as_ref().is_some_and(|t| t.holds);
    record("uniform", "orders by dimension, equal-minimal triple forces I/3", u.is_uniform() && triple_ok, to_value(&u));

    let all = entries.iter().all(|e| e["holds"] == json!(true));
    Ok(Outcome { status: if all { Status::Ok } else { Status::Negative }, result: json!({"entries": entries}), summary })
}

pub fn run_distance(a: &Subspace, b: &Subspace) -> Result<Outcome, CliError> {
    let d = a.hausdorff(b)?;
    Ok(Outcome {
        status: Status::Ok,
        result: json!({"distance": d, "rank_a": a.rank(), "rank_b": b.rank()}),
        summary: vec![("distance".into(), json!(d))],
    })
}
