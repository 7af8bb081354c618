//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

use std::sync::OnceLock;

use qbatt::validation::{self, Artifacts, Check};

const SEED: u64 = 7;

fn artifacts() -> &'static Artifacts {
    static ARTS: OnceLock<Artifacts> = OnceLock::new();
    ARTS.get_or_init(|| Artifacts::compute(SEED).expect("sweeps run"))
}

fn report(n: u32, check: &Check) {
    println!(
        "criterion {n}: {} {}",
        if check.passed { "PASS" } else { "FAIL" },
        check.detail
    );
    assert!(check.passed, "criterion {n} failed: {}", check.detail);
}

#[test]
fn criterion_1_eigenvalue_vs_sampling() {
    report(1, &validation::criterion_1(SEED, 100_000).unwrap());
}

#[test]
fn criterion_2_noise_independence() {
    report(2, &validation::criterion_2().unwrap());
}

#[test]
fn criterion_3_fig1_ordering() {
    report(3, &validation::criterion_3(&artifacts().fig1));
}

#[test]
fn criterion_4_fig2_ordering() {
    report(4, &validation::criterion_4(&artifacts().fig2));
}

#[test]
fn criterion_5_time_sweep() {
    report(5, &validation::criterion_5(&artifacts().fig3));
}

#[test]
fn criterion_6_accessible_energy() {
    report(6, &validation::criterion_6(&artifacts().accessible));
}

#[test]
fn criterion_7_spectra() {
    report(7, &validation::criterion_7(&artifacts().appendix_d));
}

#[test]
fn criterion_8_channels() {
    report(8, &validation::criterion_8(SEED).unwrap());
}

/// Two complete `validate` runs write byte-identical CSV files.
#[test]
fn criterion_9_determinism() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let args = ["qbatt", "validate", "--seed", "7", "--out", d.path().to_str().unwrap()];
        let code = qbatt::cli::run_with(args, None, &mut Vec::new(), &mut Vec::new());
        assert!(code == 0 || code == 1, "validate errored with {code}");
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    names.sort();
    let differing: Vec<String> = names
        .iter()
        .filter(|n| std::fs::read(dirs[0].path().join(n)).unwrap() != std::fs::read(dirs[1].path().join(n)).unwrap())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    let check = Check {
        id: "C9".into(),
        passed: names.len() == 5 && differing.is_empty(),
        informational: false,
        detail: format!("{} CSV files compared, differing: {:?}", names.len(), differing),
    };
    report(9, &check);
}
