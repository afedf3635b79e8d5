use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwl-orbits"))
        .args(args)
        .env_remove("PWL_ORBIT_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn power_prints_rows() {
    let o = run(&["power", "--dim", "2", "--rho", "2,1", "--n", "4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "5,4\n-4,-3\n");
}

#[test]
fn first_power_echoes_matrix() {
    let o = run(&["power", "--dim", "3", "--rho", "1,1.4,0.7", "--n", "1"]);
    assert_eq!(stdout(&o), "1,1,0\n-1.3999999999999999,0,1\n0.69999999999999996,0,0\n");
}

#[test]
fn methods_agree_on_integer_input() {
    let args = |m| vec!["power", "--dim", "3", "--rho", "2,-1,3", "--n", "7", "--method", m];
    let gamma = run(&args("gamma"));
    let brute = run(&args("brute"));
    assert_eq!(code(&gamma), 0);
    assert_eq!(gamma.stdout, brute.stdout);
}

#[test]
fn power_errors() {
    assert_eq!(code(&run(&["power", "--dim", "2", "--rho", "1", "--n", "2"])), 2);
    assert_eq!(code(&run(&["power", "--dim", "2", "--rho", "1,1", "--n", "0"])), 2);
    assert_eq!(code(&run(&["power", "--dim", "2", "--rho", "1,x", "--n", "2"])), 2);
    assert_eq!(code(&run(&["power", "--dim", "2", "--rho", "1e200,0", "--n", "3"])), 1);
}

#[test]
fn help_everywhere() {
    for sub in ["power", "orbit", "scan", "bench"] {
        let o = run(&[sub, "--help"]);
        assert_eq!(code(&o), 0, "{sub}");
        assert!(stdout(&o).contains("Usage"), "{sub}");
    }
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

fn orbit(left: &str, right: &str, word: &str) -> Output {
    run(&[
        "orbit", "--dim", "2", "--left", left, "--right", right, "--mu", "1", "--word", word,
    ])
}

#[test]
fn orbit_lr_example_is_stable() {
    let o = orbit("0.2,0", "-3,0", "L1R1");
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("exists=true\n"));
    let x0: Vec<f64> = text
        .lines()
        .find_map(|l| l.strip_prefix("x0="))
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((x0[0] - 0.75).abs() < 1e-12 && x0[1] == 0.0, "{text}");
    assert!(text.contains("stable=true\n"));
    assert!(text.contains("jury_stable=true\n"));
    assert!(text.contains("reason=none\n"));
}

#[test]
fn orbit_exit_codes() {
    let o = orbit("0,0", "0,0", "L1R1");
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("reason=wrong_partition(1)\n"));

    let o = orbit("1,0", "1,0", "L1R1");
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("reason=singular_existence_matrix\n"));

    // Same geometry as the stable example but |T| = 1.2.
    let o = orbit("0.2,0", "-6,0", "L1R1");
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("exists=true\n"));

    for bad in ["R1L1", "L1L1", "LR", "L0R1", "X1"] {
        assert_eq!(code(&orbit("0.2,0", "-3,0", bad)), 2, "{bad}");
    }
}

fn scan_args<'a>(out: &'a str, range: &'a str) -> Vec<&'a str> {
    vec![
        "scan",
        "--dim",
        "2",
        "--x-param",
        "tau_L",
        "--x-range",
        range,
        "--y-param",
        "tau_R",
        "--y-range",
        "-3:1:5",
        "--fix",
        "delta_L=0",
        "--fix",
        "delta_R=0",
        "--family",
        "L1R1,L2R1",
        "--out",
        out,
    ]
}

#[test]
fn minimal_scan_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let out_s = out.to_str().unwrap();
    let mut args = scan_args(out_s, "0:1:2");
    args[10] = "0:1:2";
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(
        lines[0],
        "x_param,y_param,x_value,y_value,L1R1_exists,L1R1_stable,L2R1_exists,L2R1_stable"
    );
}

#[test]
fn scan_output_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str, threads: Option<&str>, env: Option<&str>| {
        let out = dir.path().join(name);
        let mut args = scan_args(out.to_str().unwrap(), "-1:1:9");
        if let Some(t) = threads {
            args.extend(["--threads", t]);
        }
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_pwl-orbits"));
        cmd.args(&args).env_remove("PWL_ORBIT_THREADS");
        if let Some(e) = env {
            cmd.env("PWL_ORBIT_THREADS", e);
        }
        assert!(cmd.status().unwrap().success());
        fs::read(out).unwrap()
    };
    let one = read("a.csv", Some("1"), None);
    assert_eq!(one, read("b.csv", Some("3"), None));
    assert_eq!(one, read("c.csv", None, Some("2")));
    assert_eq!(one, read("d.csv", None, None));
}

#[test]
fn scan_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let out_s = out.to_str().unwrap();
    assert_eq!(code(&run(&scan_args(out_s, "0:1"))), 2);
    assert_eq!(code(&run(&scan_args(out_s, "0:1:1"))), 2);
    let mut bad_word = scan_args(out_s, "0:1:2");
    bad_word[16] = "R1L1";
    assert_eq!(code(&run(&bad_word)), 2);
    let mut bad_param = scan_args(out_s, "0:1:2");
    bad_param[4] = "sigma_L";
    assert_eq!(code(&run(&bad_param)), 2);
    let missing_dir = dir.path().join("no/such/dir/s.csv");
    assert_eq!(code(&run(&scan_args(missing_dir.to_str().unwrap(), "0:1:2"))), 1);
}

fn bench_csv(dir: &Path, name: &str) -> Vec<Vec<String>> {
    let out = dir.join(name);
    let o = run(&[
        "bench",
        "--mode",
        "dim",
        "--values",
        "3,6",
        "--fixed",
        "5",
        "--batch",
        "4",
        "--repeats",
        "2",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    fs::read_to_string(out)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn bench_rows_and_checksums() {
    let dir = tempfile::tempdir().unwrap();
    let a = bench_csv(dir.path(), "a.csv");
    let b = bench_csv(dir.path(), "b.csv");
    assert_eq!(
        a[0].join(","),
        "variable,algorithm,mean_seconds,std_seconds,checksum,flags"
    );
    let keys: Vec<(String, String)> = a[1..].iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    assert_eq!(
        keys,
        [
            ("3", "brute"),
            ("3", "diag"),
            ("3", "gamma"),
            ("6", "brute"),
            ("6", "diag"),
            ("6", "gamma")
        ]
        .map(|(v, k)| (v.to_owned(), k.to_owned()))
    );
    // Timings vary between runs; everything else is fixed by the seed.
    for (ra, rb) in a[1..].iter().zip(&b[1..]) {
        assert_eq!((&ra[0], &ra[1], &ra[4], &ra[5]), (&rb[0], &rb[1], &rb[4], &rb[5]));
        assert_eq!(ra[5], "ok");
    }
}

#[test]
fn config_file_fills_in_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("power.cfg");
    fs::write(&cfg, "# 2D example\ndim = 2\nrho = 9,9\nn=4\nmethod=brute\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();

    let o = run(&["power", "--config", cfg_s, "--rho", "2,1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "5,4\n-4,-3\n");
    // Config given before the subcommand works too.
    let o = run(&["--config", cfg_s, "power", "--rho", "2,1", "--n", "2"]);
    assert_eq!(stdout(&o), "3,2\n-2,-1\n");
}

#[test]
fn config_merges_fixed_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.cfg");
    let out = dir.path().join("s.csv");
    fs::write(
        &cfg,
        "dim=2\nx-param=tau_L\nx-range=0.2:0.2:2\ny-param=tau_R\ny-range=-3:-3:2\nfix=delta_L=0\nfix=delta_R=5\nfamily=L1R1\n",
    )
    .unwrap();
    let o = run(&[
        "scan",
        "--config",
        cfg.to_str().unwrap(),
        "--fix",
        "delta_R=0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    // With δ_R overridden to 0 every cell is the stable LR desk example.
    let text = fs::read_to_string(out).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",1,1")), "{text}");
}

#[test]
fn config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "dim=2\ncolour=blue\n").unwrap();
    let o = run(&["power", "--config", cfg.to_str().unwrap(), "--rho", "1,1", "--n", "2"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    fs::write(&cfg, "dim 2\n").unwrap();
    assert_eq!(code(&run(&["power", "--config", cfg.to_str().unwrap()])), 2);

    let missing = dir.path().join("missing.cfg");
    assert_eq!(code(&run(&["power", "--config", missing.to_str().unwrap()])), 1);
}
