//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (visible with `cargo test -- --nocapture`). Criteria with a stated
//! runtime budget assert it; the heavy criteria serialize on a mutex so the
//! budgets are not distorted by concurrent tests.

use kobound::config::ExperimentConfig;
use kobound::verify::{self, Effort};
use std::sync::Mutex;
use std::time::Instant;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|p| p.into_inner())
}

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} - {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion}: {detail}");
}

#[test]
fn criterion_01_lemma_bound_suite() {
    let _guard = serial();
    let cfg = ExperimentConfig::default_config();
    let started = Instant::now();
    let check = verify::lemma_bound_suite(&cfg, Effort::Full).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let within_budget = elapsed <= 300.0;
    report(
        "1 (lemma bound suite)",
        check.passed && within_budget,
        &format!("{} in {:.1}s (budget 300s)", check.detail, elapsed),
    );
}

#[test]
fn criterion_02_divergence_fit() {
    let _guard = serial();
    let cfg = ExperimentConfig::default_config();
    let check = verify::divergence_fit(&cfg).unwrap();
    report("2 (divergence fit)", check.passed, &check.detail);
}

#[test]
fn criterion_03_selection_soundness() {
    let _guard = serial();
    let cfg = ExperimentConfig::default_config();
    let (sound, _) = verify::selection_runs(&cfg, 500).unwrap();
    report(
        "3 (selection soundness)",
        sound == 500,
        &format!("{sound}/500 runs sound"),
    );
}

#[test]
fn criterion_04_holder_chain() {
    let _guard = serial();
    let cfg = ExperimentConfig::default_config();
    let (_, holder_ok) = verify::selection_runs(&cfg, 500).unwrap();
    report(
        "4 (Hoelder chain)",
        holder_ok == 500,
        &format!("{holder_ok}/500 runs dominated"),
    );
}

#[test]
fn criterion_05_growth_exponent() {
    let _guard = serial();
    let cfg = ExperimentConfig::default_config();
    let started = Instant::now();
    let records = verify::growth_records(&cfg).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let exponent = verify::growth_exponent_from(&records);
    let band = verify::growth_chain_and_band_from(&records);
    let within_budget = elapsed <= 600.0;
    report(
        "5 (growth exponent and band)",
        exponent.passed && band.passed && within_budget,
        &format!(
            "{}; {}; {:.1}s (budget 600s)",
            exponent.detail, band.detail, elapsed
        ),
    );
}

#[test]
fn criterion_06_density_oracle() {
    let _guard = serial();
    let check = verify::density_oracle(Effort::Full).unwrap();
    report("6 (density oracle)", check.passed, &check.detail);
}

#[test]
fn criterion_07_layer_cake_oracle() {
    let _guard = serial();
    let check = verify::layer_cake_suite(Effort::Full).unwrap();
    report("7 (layer-cake oracle)", check.passed, &check.detail);
}

#[test]
fn criterion_08_common_base() {
    let _guard = serial();
    let cfg = ExperimentConfig::default_config();
    let check = verify::common_base(&cfg, Effort::Full).unwrap();
    report("8 (common base)", check.passed, &check.detail);
}

#[test]
fn criterion_09_lattice_halving() {
    let _guard = serial();
    let cfg = ExperimentConfig::default_config();
    assert!(cfg.lattice.h_budget <= 250.0);
    let started = Instant::now();
    let check = verify::lattice_halving(&cfg).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let within_budget = elapsed <= 120.0;
    report(
        "9 (lattice exponent halving)",
        check.passed && within_budget,
        &format!("{} in {:.1}s (budget 120s)", check.detail, elapsed),
    );
}

#[test]
fn criterion_10_lattice_bound_property() {
    let _guard = serial();
    let cfg = ExperimentConfig::default_config();
    let checks = verify::run_all_named(&cfg, &["lattice/volume-bound", "lattice/monodromy-invariance"]);
    let passed = checks.iter().all(|c| c.passed);
    let detail = checks
        .iter()
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect::<Vec<_>>()
        .join("; ");
    report("10 (lattice bound and monodromy)", passed, &detail);
}

#[test]
fn criterion_11_csv_determinism() {
    let _guard = serial();
    let bin = env!("CARGO_BIN_EXE_kobound");
    let dir = std::env::temp_dir().join("kobound-determinism");
    std::fs::create_dir_all(&dir).unwrap();
    let run = |sub: &str, threads: usize| -> Vec<u8> {
        let out = dir.join(format!("{sub}-{threads}.csv"));
        let status = std::process::Command::new(bin)
            .args([
                sub,
                "--threads",
                &threads.to_string(),
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .expect("run binary");
        assert!(status.success(), "{sub} with {threads} threads failed");
        std::fs::read(&out).unwrap()
    };
    let mut all_equal = true;
    for sub in ["verify", "growth"] {
        let reference = run(sub, 1);
        for threads in [4usize, 8] {
            all_equal &= run(sub, threads) == reference;
        }
    }
    report(
        "11 (byte-identical CSV across 1/4/8 threads)",
        all_equal,
        "verify and growth outputs compared",
    );
}
