//! End-to-end behaviour of the experiment harness, through the library and
//! through the `kamrot` binary.

use std::path::Path;
use std::process::Command;

use kamrot::experiment::{analyse, write_diagnostics_csv};
use kamrot::{
    evaluate_experiment, merge_reports, run_experiment, synthesize_cocycle, ErrorClass,
    ExperimentConfig, FactorSpec, FrequencySpec, GroundTruth, PerturbationSpec, Preset, Verdict,
    CSV_COLUMNS,
};
use kamrot_core::{Frequency, SchemeParams};

fn recovery_config() -> ExperimentConfig {
    ExperimentConfig {
        theta: 0.17,
        chain: vec![
            FactorSpec::Exp {
                band: 4,
                amplitude: 1e-3,
                seed: 101,
            },
            FactorSpec::Winding { k: vec![3] },
        ],
        perturbation: Some(PerturbationSpec {
            band: 4,
            amplitude: 1e-4,
            seed: 202,
        }),
        ..ExperimentConfig::default()
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kamrot"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn constant_config_recovers_exactly() {
    let cfg = ExperimentConfig::default();
    let (phi, truth) = synthesize_cocycle(&cfg).unwrap();
    assert_eq!(truth.representative, 0.17);
    assert!(phi.perturbation.is_zero());
    let report = evaluate_experiment(&cfg).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    let outcome = report.outcome.unwrap();
    assert!(outcome.ledger.is_empty());
    assert_eq!(outcome.steps, 0);
    let r = outcome.rotation.unwrap();
    assert!((r.representative - 0.17).abs() <= 4.0 * f64::EPSILON);
}

#[test]
fn single_winding_truth_is_shifted_by_alpha() {
    let cfg = ExperimentConfig {
        chain: vec![FactorSpec::Winding { k: vec![3] }],
        ..ExperimentConfig::default()
    };
    let (_, truth) = synthesize_cocycle(&cfg).unwrap();
    let alpha = Frequency::golden();
    assert_eq!(truth.winding_sum, vec![3]);
    assert_eq!(truth.representative, 0.17 + alpha.dot(&[3]));
    assert_eq!(evaluate_experiment(&cfg).unwrap().verdict, Verdict::Pass);
}

#[test]
fn perturbation_leaves_truth_unchanged() {
    let plain = ExperimentConfig {
        chain: vec![FactorSpec::Winding { k: vec![3] }],
        ..ExperimentConfig::default()
    };
    let perturbed = ExperimentConfig {
        perturbation: Some(PerturbationSpec {
            band: 4,
            amplitude: 1e-4,
            seed: 5,
        }),
        ..plain.clone()
    };
    let (_, t1) = synthesize_cocycle(&plain).unwrap();
    let (_, t2) = synthesize_cocycle(&perturbed).unwrap();
    assert_eq!(t1, t2);
    let report = evaluate_experiment(&perturbed).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.error);
}

#[test]
fn recovery_config_passes() {
    let report = evaluate_experiment(&recovery_config()).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.error);
    assert_eq!(report.exit_code, 0);
    let outcome = report.outcome.unwrap();
    assert!(outcome.converged);
    assert!(outcome.witness.is_some());
    assert!(outcome.replay_defect.unwrap() < report.thresholds.replay_tolerance);
}

#[test]
fn wrong_ground_truth_fails() {
    let cfg = recovery_config();
    let (phi, _) = synthesize_cocycle(&cfg).unwrap();
    let wrong = GroundTruth {
        representative: 0.2,
        winding_sum: vec![0],
    };
    let report = analyse(&cfg, &phi, Some(wrong));
    assert_eq!(report.verdict, Verdict::Fail);
    assert_eq!(report.exit_code, 1);
}

#[test]
fn liouville_preset_is_flagged_but_runs() {
    let cfg = ExperimentConfig {
        frequency: FrequencySpec::Preset {
            name: Preset::Liouville,
        },
        theta: 0.3,
        ..ExperimentConfig::default()
    };
    let report = evaluate_experiment(&cfg).unwrap();
    let outcome = report.outcome.unwrap();
    assert!(!outcome.within_hypotheses);
    assert!(outcome.converged);
}

#[test]
fn error_classes_reach_the_report() {
    let big = ExperimentConfig {
        perturbation: Some(PerturbationSpec {
            band: 3,
            amplitude: 5e-2,
            seed: 1,
        }),
        ..ExperimentConfig::default()
    };
    let report = evaluate_experiment(&big).unwrap();
    assert_eq!(report.verdict, Verdict::Error);
    assert_eq!(report.error.as_ref().unwrap().class, ErrorClass::Divergence);
    assert_eq!(report.exit_code, 5);

    let short = ExperimentConfig {
        perturbation: Some(PerturbationSpec {
            band: 3,
            amplitude: 1e-4,
            seed: 1,
        }),
        params: SchemeParams {
            max_steps: 1,
            ..SchemeParams::default()
        },
        ..ExperimentConfig::default()
    };
    let report = evaluate_experiment(&short).unwrap();
    assert_eq!(report.error.as_ref().unwrap().class, ErrorClass::NotConverged);
    assert_eq!(report.exit_code, 6);
    assert_eq!(report.diagnostics().len(), 1);
}

#[test]
fn reports_are_deterministic_and_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = recovery_config();
    cfg.output.report = Some(dir.path().join("a.json"));
    cfg.output.diagnostics = Some(dir.path().join("a.csv"));
    let first = run_experiment(&cfg).unwrap();
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let a_csv = std::fs::read(dir.path().join("a.csv")).unwrap();
    run_experiment(&cfg).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("a.json")).unwrap());
    assert_eq!(a_csv, std::fs::read(dir.path().join("a.csv")).unwrap());

    let text = String::from_utf8(a).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["config_hash"], cfg.hash());
    assert_eq!(value["thresholds"]["nu"], cfg.params.nu);
    assert_eq!(value["thresholds"]["equivalence_horizon"], cfg.horizon);
    assert_eq!(value["thresholds"]["dioph"]["horizon"], cfg.params.dioph.horizon);

    let csv_text = String::from_utf8(a_csv).unwrap();
    let mut lines = csv_text.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(lines.count(), first.diagnostics().len());
}

#[test]
fn csv_marks_resonant_steps() {
    let cfg = ExperimentConfig {
        theta: 2e-5,
        chain: vec![
            FactorSpec::Exp {
                band: 3,
                amplitude: 1e-4,
                seed: 7,
            },
            FactorSpec::Winding { k: vec![4] },
        ],
        ..ExperimentConfig::default()
    };
    let report = evaluate_experiment(&cfg).unwrap();
    assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.error);
    assert_eq!(report.outcome.as_ref().unwrap().ledger.len(), 1);
    let mut buf = Vec::new();
    write_diagnostics_csv(&mut buf, report.diagnostics()).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let first = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = first.split(',').collect();
    assert_eq!(fields[2], "true");
    assert!(fields[3] == "4" || fields[3] == "-4", "{first}");
}

#[test]
fn merge_counts_verdicts() {
    let pass = evaluate_experiment(&ExperimentConfig::default()).unwrap();
    let cfg = recovery_config();
    let (phi, _) = synthesize_cocycle(&cfg).unwrap();
    let fail = analyse(
        &cfg,
        &phi,
        Some(GroundTruth {
            representative: 0.2,
            winding_sum: vec![0],
        }),
    );
    let merged = merge_reports(&[pass, fail]);
    assert_eq!((merged.passed, merged.failed, merged.errored), (1, 1, 0));
    assert!(!merged.all_passed());
    assert!((merged.entries[0].representative.unwrap() - 0.17).abs() <= 4.0 * f64::EPSILON);
}

#[test]
fn binary_run_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let status = bin()
        .args(["run", "--theta", "0.17", "--factor", "exp:4:1e-3:101", "--factor", "winding:3"])
        .args(["--pert-amplitude", "1e-4", "--pert-seed", "202"])
        .args(["--report", path_str(&report), "--diagnostics", path_str(&csv)])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let from_bin: kamrot::ExperimentReport =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(from_bin.verdict, Verdict::Pass);

    let status = bin().args(["run", "--factor", "spin:1"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin()
        .args(["run", "--config", path_str(&dir.path().join("missing.json"))])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(7));
    let status = bin()
        .args(["run", "--pert-amplitude", "5e-2", "--pert-band", "3"])
        .args(["--report", path_str(&dir.path().join("big.json"))])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(5));

    let merged = dir.path().join("m.json");
    let status = bin()
        .args(["report-merge", path_str(&report), path_str(&dir.path().join("big.json"))])
        .args(["--out", path_str(&merged)])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let m: kamrot::MergedReport = serde_json::from_str(&std::fs::read_to_string(&merged).unwrap()).unwrap();
    assert_eq!((m.passed, m.errored), (1, 1));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, r#"{"theta": 0.25, "chain": [{"kind": "winding", "k": [2]}]}"#).unwrap();
    let out = dir.path().join("s.json");
    let status = bin()
        .args(["synthesize", "--theta", "0.4", "--factor", "winding:5"])
        .args(["--config", path_str(&cfg_path), "--out", path_str(&out)])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let s: kamrot::Synthesis = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(s.ground_truth.winding_sum, vec![2]);
    assert_eq!(s.ground_truth.representative, 0.25 + Frequency::golden().dot(&[2]));

    // The synthesized file feeds `rho`.
    let rho_out = dir.path().join("rho.json");
    let status = bin()
        .args(["rho", "--cocycle", path_str(&out), "--report", path_str(&rho_out)])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let rho: kamrot_core::RotationVector =
        serde_json::from_str(&std::fs::read_to_string(&rho_out).unwrap()).unwrap();
    let truth = kamrot_core::RotationVector::from_representative(
        Frequency::golden(),
        s.ground_truth.representative,
    );
    assert!(kamrot_core::rotation::equivalence_check(&rho, &truth, 5).unwrap());
}

#[test]
fn check_dioph_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let status = bin()
        .args(["check-dioph", "--preset", "golden", "--report", path_str(&out)])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let status = bin()
        .args(["check-dioph", "--preset", "liouville", "--dioph-horizon", "100"])
        .args(["--report", path_str(&out)])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let check: kamrot::DiophCheck = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!check.holds);
    assert!(check.witness.is_some());
}
