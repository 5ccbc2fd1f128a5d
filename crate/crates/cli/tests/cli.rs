//! End-to-end tests of the `pwhile` binary: file outputs, exit codes, and
//! byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../programs")).join(name)
}

fn pwhile(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwhile"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pwhile-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn compile_reports_dimensions_and_writes_sidecar() {
    let dir = tempdir("compile");
    let out = pwhile(
        &[
            "compile",
            corpus("monty_ht.pw").to_str().unwrap(),
            "-o",
            ".",
        ],
        &dir,
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("dim=162"), "{text}");
    assert!(text.contains("nnz=324"), "{text}");

    let matrix = pwhile_core::linalg::matrix_from_matrix_market(
        &std::fs::read_to_string(dir.join("monty_ht.mm")).unwrap(),
    )
    .unwrap();
    assert_eq!((matrix.rows(), matrix.cols()), (162, 162));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("monty_ht.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["dim"], 162);
    assert_eq!(meta["stop_label"], 6);

    let out = pwhile(
        &[
            "compile",
            corpus("monty_hw.pw").to_str().unwrap(),
            "-o",
            ".",
            "--format",
            "json",
        ],
        &dir,
    );
    assert!(stdout(&out).contains("dim=243"));
    let matrix = pwhile_core::linalg::matrix_from_json(
        &std::fs::read_to_string(dir.join("monty_hw.json")).unwrap(),
    )
    .unwrap();
    assert!(matrix.is_row_stochastic(1e-12));
}

#[test]
fn compile_rejects_malformed_input_without_outputs() {
    let dir = tempdir("badcompile");
    std::fs::write(dir.join("broken.pw"), "var x:{0,1}; x := ").unwrap();
    let out = pwhile(&["compile", "broken.pw", "-o", "out"], &dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.join("out").join("broken.mm").exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));
}

#[test]
fn analyze_writes_terminal_and_abstracted_tables() {
    let dir = tempdir("analyze");
    let out = pwhile(
        &[
            "analyze",
            corpus("monty_ht.pw").to_str().unwrap(),
            "-o",
            ".",
            "--abstraction",
            corpus("abstractions/winning.json").to_str().unwrap(),
            "--label",
            "6",
        ],
        &dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let terminal = std::fs::read_to_string(dir.join("monty_ht.terminal.csv")).unwrap();
    let data_rows = terminal.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(data_rows, 12);
    assert!(terminal.lines().any(|l| l.starts_with("12,")));

    let abstracted = std::fs::read_to_string(dir.join("monty_ht.abstract.csv")).unwrap();
    assert!(abstracted.contains("0.3333333333333"), "{abstracted}");
    assert!(abstracted.contains("0.6666666666666"), "{abstracted}");

    let at_stop = std::fs::read_to_string(dir.join("monty_ht.label6.csv")).unwrap();
    let mass: f64 = at_stop
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("index"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn analyze_reports_non_convergence_as_exit_2() {
    let dir = tempdir("diverge");
    std::fs::write(
        dir.join("diverge.pw"),
        "var x:{0,1};\nwhile true do skip od\n",
    )
    .unwrap();
    let out = pwhile(&["analyze", "diverge.pw", "--max-steps", "500"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_byte_deterministic_per_seed() {
    let dir = tempdir("simulate");
    let input = corpus("coin_flips.pw");
    let args = [
        "simulate",
        input.to_str().unwrap(),
        "-o",
        ".",
        "--runs",
        "5000",
        "--seed",
        "11",
    ];
    assert!(pwhile(&args, &dir).status.success());
    let first = std::fs::read(dir.join("coin_flips.sim.csv")).unwrap();
    assert!(pwhile(&args, &dir).status.success());
    let second = std::fs::read(dir.join("coin_flips.sim.csv")).unwrap();
    assert_eq!(first, second);

    let mut other_seed = args;
    other_seed[7] = "12";
    assert!(pwhile(&other_seed, &dir).status.success());
    let third = std::fs::read(dir.join("coin_flips.sim.csv")).unwrap();
    assert_ne!(first, third);
}

#[test]
fn sweep_covers_the_grid_with_known_endpoints() {
    let dir = tempdir("sweep");
    let out = pwhile(
        &[
            "sweep",
            corpus("monty_hp.pw").to_str().unwrap(),
            "-o",
            ".",
            "--param",
            "p",
            "--grid",
            "0:0.1:1",
            "--abstraction",
            corpus("abstractions/winning.json").to_str().unwrap(),
        ],
        &dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("monty_hp.sweep.csv")).unwrap();
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("p,"))
        .map(|l| {
            let (p, phi) = l.split_once(',').unwrap();
            (p.parse().unwrap(), phi.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 11);
    assert!((rows[0].1 - 1.0 / 3.0).abs() < 1e-9);
    assert!((rows[10].1 - 2.0 / 3.0).abs() < 1e-9);
}

#[test]
fn synthesize_flow_free_recovers_the_xor_swap() {
    let dir = tempdir("synth");
    let out = pwhile(
        &[
            "synthesize",
            corpus("sketches/swap.json").to_str().unwrap(),
            "-o",
            ".",
            "--objective",
            "penalized",
            "--rho",
            "1",
            "--omega",
            "1",
            "--lambda0",
            corpus("sketches/lambda0_zswap.csv").to_str().unwrap(),
            "--tol",
            "1e-6",
            "--seed",
            "0",
        ],
        &dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let program = std::fs::read_to_string(dir.join("swap.program.pw")).unwrap();
    let parsed = pwhile_core::lang::parse(&program).unwrap();
    let expected = pwhile_core::lang::parse(
        "var x:{0,1}; var y:{0,1}; var z:{0,1}; \
         y := (y + x) % 2; x := (x + y) % 2; y := (y + x) % 2",
    )
    .unwrap();
    assert_eq!(parsed, expected);
    assert!(dir.join("swap.lambda.csv").exists());
    assert!(dir.join("swap.trace.csv").exists());

    // Identical invocation, identical bytes.
    let lambda_first = std::fs::read(dir.join("swap.lambda.csv")).unwrap();
    let trace_first = std::fs::read(dir.join("swap.trace.csv")).unwrap();
    let again = pwhile(
        &[
            "synthesize",
            corpus("sketches/swap.json").to_str().unwrap(),
            "-o",
            ".",
            "--objective",
            "penalized",
            "--rho",
            "1",
            "--omega",
            "1",
            "--lambda0",
            corpus("sketches/lambda0_zswap.csv").to_str().unwrap(),
            "--tol",
            "1e-6",
            "--seed",
            "0",
        ],
        &dir,
    );
    assert!(again.status.success());
    assert_eq!(
        lambda_first,
        std::fs::read(dir.join("swap.lambda.csv")).unwrap()
    );
    assert_eq!(
        trace_first,
        std::fs::read(dir.join("swap.trace.csv")).unwrap()
    );
}

#[test]
fn synthesize_exhausted_budget_exits_3() {
    let dir = tempdir("budget");
    let out = pwhile(
        &[
            "synthesize",
            corpus("sketches/swap.json").to_str().unwrap(),
            "-o",
            ".",
            "--max-iters",
            "1",
            "--restarts",
            "0",
            "--lambda0",
            corpus("sketches/lambda0_random.csv").to_str().unwrap(),
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn synthesize_program_sketch_maximizes_the_winning_chance() {
    let dir = tempdir("maximize");
    let out = pwhile(
        &[
            "synthesize",
            corpus("monty_hp.pw").to_str().unwrap(),
            "-o",
            ".",
            "--abstraction",
            corpus("abstractions/winning.json").to_str().unwrap(),
            "--maximize-coord",
            "1",
            "--tol",
            "0.6666",
            "--restarts",
            "3",
        ],
        &dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("best value 0.66666"), "{text}");
    let lambda = std::fs::read_to_string(dir.join("monty_hp.lambda.csv")).unwrap();
    let p: f64 = lambda
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(p > 0.999, "p* = {p}");
}
