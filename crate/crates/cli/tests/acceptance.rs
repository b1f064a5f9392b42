//! Acceptance suite: runs every experiment with its default configuration and
//! prints one PASS/FAIL line per acceptance criterion.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use magframe_cli::{parse_config_str, run, Check, Experiment};

/// Experiment runs as `(experiment, dimension)`.
const RUNS: &[(Experiment, usize)] = &[
    (Experiment::VerifyFrame, 1),
    (Experiment::VerifyFrame, 2),
    (Experiment::QuantizeRoundtrip, 1),
    (Experiment::GaugeCovariance, 1),
    (Experiment::GaugeCovariance, 2),
    (Experiment::HsIsometry, 1),
    (Experiment::ProductFormulas, 1),
    (Experiment::Liouville, 1),
    (Experiment::Liouville, 2),
    (Experiment::SuperDecay, 1),
    (Experiment::Boundedness, 1),
];

const TITLES: [&str; 12] = [
    "Parseval frame",
    "quantization round trip",
    "Hilbert-Schmidt ratio constant",
    "gauge covariance",
    "matrix element isometry",
    "product formulas",
    "super factorization",
    "Liouville identity",
    "decay saturation",
    "boundedness via Schur constant",
    "direct vs Schmidt route",
    "determinism",
];

fn run_default(exp: Experiment, d: usize, out: &Path) -> Vec<Check> {
    let mut cfg = parse_config_str(&format!("dimension = {d}\n"), exp).expect("default config is valid");
    cfg.out = out.join(format!("{}-{d}d", exp.name()));
    let start = Instant::now();
    let report = run(&cfg).unwrap_or_else(|e| panic!("{} (d={d}) failed to run: {e}", exp.name()));
    eprintln!("  ran {} (d={d}) in {:.1?}", exp.name(), start.elapsed());
    report.checks
}

/// Runs the binary twice into the same directory with a fixed seed and
/// different worker counts and compares every output file byte for byte.
fn determinism(out: &Path) -> (bool, String) {
    let cfg = out.join("empty.toml");
    std::fs::write(&cfg, "").unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for exp in ["quantize-roundtrip", "schur-demo", "verify-frame", "super-decay"] {
        let dir = out.join(format!("det-{exp}"));
        let mut snapshots = Vec::new();
        for threads in ["1", "3"] {
            let status = Command::new(env!("CARGO_BIN_EXE_magframe"))
                .args([exp, "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&dir)
                .args(["--seed", "1234"])
                .env("MAGFRAME_THREADS", threads)
                .env("RUST_LOG", "error")
                .output()
                .expect("binary runs");
            ok &= status.status.success();
            let mut files: BTreeMap<_, _> = BTreeMap::new();
            for e in std::fs::read_dir(&dir).unwrap() {
                let e = e.unwrap();
                files.insert(e.file_name(), std::fs::read(e.path()).unwrap());
            }
            std::fs::remove_dir_all(&dir).unwrap();
            snapshots.push(files);
        }
        let same = snapshots[0].iter().filter(|(k, v)| snapshots[1].get(*k) == Some(v)).count();
        let total = snapshots[0].len().max(snapshots[1].len());
        ok &= same == total && total > 0;
        detail.push(format!("{exp} {same}/{total} files identical"));
    }
    (ok, detail.join(", "))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let start = Instant::now();
    let mut by_criterion: BTreeMap<u32, Vec<Check>> = BTreeMap::new();
    for &(exp, d) in RUNS {
        for c in run_default(exp, d, tmp.path()) {
            if let Some(n) = c.criterion {
                by_criterion.entry(n).or_default().push(c);
            }
        }
    }
    let mut all = true;
    for n in 1..=11u32 {
        let checks = by_criterion.get(&n).map(Vec::as_slice).unwrap_or(&[]);
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        all &= pass;
        // Report the check closest to (or furthest past) its tolerance.
        let worst = checks
            .iter()
            .max_by(|a, b| (a.value - a.tolerance).total_cmp(&(b.value - b.tolerance)))
            .map(|c| format!("{} checks, worst {} = {:e} vs {:e}", checks.len(), c.name, c.value, c.tolerance))
            .unwrap_or_else(|| "no checks ran".into());
        println!("{} criterion {n}: {}: {worst}", if pass { "PASS" } else { "FAIL" }, TITLES[n as usize - 1]);
    }
    let (pass, detail) = determinism(tmp.path());
    all &= pass;
    println!("{} criterion 12: {}: {detail}", if pass { "PASS" } else { "FAIL" }, TITLES[11]);
    eprintln!("acceptance finished in {:.1?}", start.elapsed());
    if !all {
        std::process::exit(1);
    }
}
