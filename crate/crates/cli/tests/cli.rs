use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "experiment,dim,n,p,reps,seed,value,stderr,extra_json,elapsed_ms";

fn treerange(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treerange")).args(args).env_remove("TREERANGE_SEED").output().expect("spawn treerange")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}\nstderr: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Rows with the trailing elapsed_ms column removed.
fn without_elapsed(csv: &str) -> Vec<String> {
    csv.lines().map(|l| l.rsplit_once(',').map(|(a, _)| a.to_string()).unwrap_or_default()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn header_is_fixed_and_lines_end_in_lf() {
    let out = stdout(&treerange(&["snake-free", "--n", "1000", "--reps", "3", "--seed", "4"]));
    assert_eq!(out.lines().next(), Some(HEADER));
    assert!(!out.contains('\r'));
    assert!(out.ends_with('\n'));
}

#[test]
fn worker_count_does_not_change_results() {
    for args in [
        vec!["snake-free", "--checkpoints", "100,1000,5000", "--reps", "16"],
        vec!["infinite-range", "--n", "2000", "--checkpoints", "10,100", "--reps", "16"],
        vec!["no-return", "--horizon", "500", "--reps", "32"],
        vec!["conditioned-range", "--n", "300", "--reps", "16"],
        vec!["brw", "--p", "5", "--reps", "16"],
    ] {
        let run = |w: &str| {
            let mut a = args.clone();
            a.extend(["--seed", "11", "--workers", w]);
            without_elapsed(&stdout(&treerange(&a)))
        };
        assert_eq!(run("1"), run("8"), "{args:?}");
    }
}

#[test]
fn brw_replica_file_is_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<String> = ["1", "8"]
        .iter()
        .map(|w| {
            let path = dir.path().join(format!("brw{w}.csv"));
            let p = path.to_str().unwrap();
            stdout(&treerange(&["brw", "--dim", "5", "--p", "10", "--reps", "12", "--seed", "7", "--workers", w, "--out", p]));
            std::fs::read_to_string(&path).unwrap()
        })
        .collect();
    assert_eq!(files[0], files[1]);
    let mut lines = files[0].lines();
    assert_eq!(lines.next(), Some("replica,p,dim,R,N,generations,truncated"));
    for (i, l) in lines.enumerate() {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 7);
        assert_eq!(f[0], i.to_string());
        assert_eq!((f[1], f[2]), ("10", "5"));
        let (r, n): (u64, u64) = (f[3].parse().unwrap(), f[4].parse().unwrap());
        assert!(1 <= r && r <= n && n >= 10);
    }
}

#[test]
fn seed_env_overrides_flag() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_treerange"))
        .args(["snake-free", "--n", "2000", "--reps", "4", "--seed", "1"])
        .env("TREERANGE_SEED", "99")
        .output()
        .unwrap();
    let env_rows = without_elapsed(&stdout(&with_env));
    let direct = without_elapsed(&stdout(&treerange(&["snake-free", "--n", "2000", "--reps", "4", "--seed", "99"])));
    assert_eq!(env_rows, direct);
    assert!(env_rows[1].contains(",4,99,"), "{}", env_rows[1]);
}

#[test]
fn bad_seed_env_is_a_config_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_treerange")).args(["snake-free", "--n", "100"]).env("TREERANGE_SEED", "abc").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write(dir.path(), "typo.json", r#"{"experiment":"snake-free","n":100,"repz":3}"#);
    let unknown = write(dir.path(), "unknown.json", r#"{"experiment":"snake-frees"}"#);
    let nested = write(dir.path(), "nested.json", r#"{"distributions":{"offspring":{"kind":"geometric","pfm":[]}}}"#);
    let mismatch = write(dir.path(), "mismatch.json", r#"{"experiment":"brw"}"#);
    for args in [
        vec!["run", "--config", &typo],
        vec!["run", "--config", &unknown],
        vec!["snake-free", "--config", &nested],
        vec!["snake-free", "--config", &mismatch],
        vec!["run", "--config", "/nonexistent/cfg.json"],
        vec!["run"],
    ] {
        let o = treerange(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn validation_errors_exit_two() {
    for args in [
        vec!["snake-free", "--n", "100", "--reps", "0"],
        vec!["green", "--dim", "4", "--x", "1,0,0"],
        vec!["green", "--dim", "2"],
        vec!["snake-free", "--checkpoints", "100,10"],
        vec!["conditioned-range", "--n", "0"],
        vec!["brw", "--p", "0"],
        vec!["infinite-range", "--dim", "9"],
    ] {
        let o = treerange(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    // a non-critical offspring table fails validation
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sub.json", r#"{"distributions":{"offspring":{"kind":"table","pmf":[[0,0.6],[2,0.4]]}}}"#);
    assert_eq!(treerange(&["infinite-range", "--config", &cfg, "--n", "10"]).status.code(), Some(2));
}

#[test]
fn inline_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"experiment":"snake-free","n":500,"reps":3,"seed":5}"#);
    let a = without_elapsed(&stdout(&treerange(&["run", "--config", &cfg, "--n", "700"])));
    let b = without_elapsed(&stdout(&treerange(&["snake-free", "--n", "700", "--reps", "3", "--seed", "5"])));
    assert_eq!(a, b);
}

#[test]
fn config_with_table_laws_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"experiment":"infinite-range","n":200,"reps":5,"seed":3,
           "distributions":{"offspring":{"kind":"table","pmf":[[0,0.5],[2,0.5]]},
                            "jump":{"kind":"table","dim":3,"support":[[[1,0,0],0.2],[[-1,0,0],0.2],[[0,1,0],0.15],[[0,-1,0],0.15],[[0,0,1],0.15],[[0,0,-1],0.15]]}}}"#,
    );
    let out = stdout(&treerange(&["run", "--config", &cfg]));
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("infinite-range,3,200,,5,3,"), "{row}");
}

#[test]
fn single_replica_has_zero_stderr_and_a_warning() {
    let out = stdout(&treerange(&["snake-free", "--n", "100", "--reps", "1"]));
    let row = out.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[7], "0");
    assert!(row.contains("single_replica"), "{row}");
}

#[test]
fn green_point_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("g.csv");
    let out = stdout(&treerange(&["green", "--dim", "4", "--x", "1,0,0,0", "--eps", "1e-6", "--green-radius", "3", "--dump", dump.to_str().unwrap()]));
    let row = out.lines().nth(1).unwrap();
    let g: f64 = row.split(',').nth(6).unwrap().parse().unwrap();
    // G(e1) = G(0) − 1 for SRW, G(0) ≈ 1.2394671218
    assert!((g - 0.2394671218).abs() < 1e-8, "{g}");
    let text = std::fs::read_to_string(&dump).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 5));
    let origin = rows.iter().find(|r| r[..4].iter().all(|&c| c == 0.0)).unwrap();
    assert!((origin[4] - 1.2394671218).abs() < 1e-8);
}

#[test]
fn head_return_rows_per_k() {
    let out = stdout(&treerange(&["head-return-exact", "--ks", "2,4,6"]));
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("head-return-exact,4,2,,"));
    let p2: f64 = rows[0].split(',').nth(6).unwrap().parse().unwrap();
    assert!((p2 - 11.0 / 32.0).abs() < 1e-14);
}

#[test]
fn verify_reports_the_corrupted_table_by_name() {
    let clean = stdout(&treerange(&["verify", "--level", "fast"]));
    assert!(clean.lines().skip(1).all(|l| l.contains(r#"""pass"":true"#)), "{clean}");
    let damaged = stdout(&treerange(&["verify", "--corrupt-green"]));
    let row = damaged.lines().find(|l| l.contains(r#"""check"":""green_harmonic"""#)).unwrap();
    assert!(row.contains(r#"""pass"":false"#), "{row}");
}

#[test]
fn out_flag_redirects_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let o = stdout(&treerange(&["no-return", "--dim", "5", "--horizon", "10", "--reps", "4", "--out", path.to_str().unwrap()]));
    assert!(o.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with(HEADER));
}

#[test]
fn every_subcommand_runs_small() {
    for args in [
        vec!["infinite-range", "--n", "100", "--reps", "2"],
        vec!["no-return", "--horizon", "50", "--reps", "2"],
        vec!["constant-formula", "--radius", "3", "--h-trees", "64", "--size-cap", "2000", "--j-max", "50", "--reps", "2", "--green-radius", "4"],
        vec!["conditioned-range", "--n", "50", "--reps", "2"],
        vec!["snake-free", "--n", "100", "--reps", "2"],
        vec!["snake-excursion", "--n", "100", "--reps", "2"],
        vec!["head-return-exact", "--n", "10"],
        vec!["no-return-head", "--n", "100", "--reps", "2"],
        vec!["no-return-head", "--p", "3", "--step-cap", "1000", "--reps", "2"],
        vec!["green", "--dim", "5", "--x", "0,1,0,0,2"],
        vec!["green-sum", "--m", "100", "--reps", "2", "--green-radius", "4"],
        vec!["suffcond", "--dim", "5", "--checkpoints", "10,100", "--reps", "2", "--green-radius", "4"],
        vec!["bessel", "--r", "1", "--t", "2", "--dt", "0.001", "--reps", "2"],
        vec!["brw", "--p", "2", "--reps", "2"],
    ] {
        let out = stdout(&treerange(&args));
        assert_eq!(out.lines().next(), Some(HEADER), "{args:?}");
        assert!(out.lines().count() >= 2, "{args:?}");
        assert!(out.lines().nth(1).unwrap().starts_with(args[0]), "{args:?}");
    }
}
