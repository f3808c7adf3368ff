use std::path::Path;
use std::process::{Command, Output};

fn incomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_incomp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn encode_and_decode() {
    let o = incomp(&["codes", "encode", "--level", "2", "--input", "0110"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "110010110\n");

    let o = incomp(&["codes", "decode", "--level", "2", "--input", "110010110111"]);
    assert_eq!(stdout(&o), "0110\n111\n");

    // 5 is the string "10", so E_1 gives 1^2 0 10.
    let o = incomp(&["codes", "encode", "--level", "1", "--int", "--input", "5"]);
    assert_eq!(stdout(&o), "11010\n");
    let o = incomp(&["codes", "decode", "--level", "1", "--int", "--input", "11010"]);
    assert_eq!(stdout(&o), "5\n");
}

#[test]
fn encode_reads_stdin() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_incomp"))
        .args(["codes", "encode", "--level", "0"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"01\n").unwrap();
    let o = child.wait_with_output().unwrap();
    // "01" is the number 4.
    assert_eq!(stdout(&o), "11110\n");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(incomp(&["codes", "encode", "--level", "4", "--input", "1"]).status.code(), Some(2));
    assert_eq!(incomp(&["codes", "decode", "--level", "1", "--input", "111"]).status.code(), Some(2));
    assert_eq!(incomp(&["codes", "encode", "--level", "1", "--input", "12"]).status.code(), Some(2));
    assert_eq!(incomp(&["nonsense"]).status.code(), Some(2));
    assert_eq!(incomp(&["bench"]).status.code(), Some(2));
    assert_eq!(incomp(&["majority", "worstcase", "--max-n", "19"]).status.code(), Some(2));
}

#[test]
fn check_prefix_passes() {
    let o = incomp(&["codes", "check-prefix", "--max-len", "10"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with("prefix-free")).count(), 4);
}

#[test]
fn lemma_csv_and_verdict() {
    let o = incomp(&["--seed", "3", "descsys", "check-lemma", "--systems", "5", "--c", "1..3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "universe_len,system,c,m,threshold,count_incompressible,proof_bound,stated_bound,holds");
    assert_eq!(lines.len(), 1 + 15 + 1);
    assert_eq!(*lines.last().unwrap(), "verdict: PASS (15 of 15 cases hold)");
}

#[test]
fn census_json() {
    let o = incomp(&["--seed", "1", "descsys", "census", "--L", "10", "--n", "8", "--c", "2"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["bound"], 64);
    assert_eq!(v["bound_holds"], true);
}

#[test]
fn commsim_verify_n5() {
    let o = incomp(&["commsim", "verify", "--n", "5"]);
    assert!(o.status.success());
    let v = json(&o);
    // Pairs with inner product 0: (4^5 + 2^5) / 2.
    assert_eq!(v["checks_run"], 528);
    assert_eq!(v["failures"], 0);
    assert_eq!(v["mean_cost"], 5.0);
}

#[test]
fn commsim_avgcost_and_coins() {
    let v = json(&incomp(&["commsim", "avgcost", "--n", "8", "--protocol", "trivial"]));
    assert_eq!(v["mean_cost"], 8.0);
    assert_eq!(v["min_coin_error"], serde_json::Value::Null);

    let v = json(&incomp(&["commsim", "coins", "--family", "xor-corrupt", "--n", "2"]));
    assert_eq!(v["min_coin_error"], 0.0);
    assert_eq!(v["failures"], 0);

    let o = incomp(&["commsim", "avgcost", "--n", "3", "--protocol", "zero"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn witness_below_bound() {
    let v = json(&incomp(&["matmul", "witness", "--n", "64", "--plant", "--seed", "4"]));
    assert_eq!(v["round_trip"], true);
    assert_eq!(v["below_bound"], true);
    assert!(v["description_len"].as_f64().unwrap() < 2.0 * 4096.0 - 6.0);
}

#[test]
fn worstcase_table() {
    let o = incomp(&["majority", "worstcase", "--max-n", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row8 = text.lines().find(|l| l.starts_with("8,")).unwrap();
    assert!(row8.starts_with("8,7,7,true,"));
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn majority_bench_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for (workers, name) in [("1", "a.csv"), ("4", "b.csv")] {
        let o = incomp(&[
            "--seed",
            "7",
            "--workers",
            workers,
            "--out-dir",
            out,
            "majority",
            "bench",
            "--n",
            "256,1024",
            "--trials",
            "20",
            "--out",
            name,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(read(&dir.path().join("a.csv")), read(&dir.path().join("b.csv")));
    let csv = String::from_utf8(read(&dir.path().join("a.csv"))).unwrap();
    assert!(csv.starts_with("n,trial,comparisons,verdict,oracle_agrees\n"));
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn bench_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "experiment = \"matmul_bench\"\nsizes = [16, 32]\ntrials = 4\nmaster_seed = 9\noutput = \"mm.csv\"\n",
    )
    .unwrap();
    let o = incomp(&["--config", cfg.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap(), "bench"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["master_seed"], 9);
    assert_eq!(v["rows"], 8);
    assert!(dir.path().join("mm.csv").exists());
    assert!(dir.path().join("mm.summary.json").exists());

    std::fs::write(&cfg, "experiment = \"matmul_bench\"\nsizes = [16]\noutput = \"mm.csv\"\nunknown_key = 1\n")
        .unwrap();
    assert_eq!(incomp(&["--config", cfg.to_str().unwrap(), "bench"]).status.code(), Some(2));
}
