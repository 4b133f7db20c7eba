use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

fn dagspin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dagspin")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_prints_bounds_for_a_given_assignment() {
    let ts = data("blocking_example.json");
    let o = dagspin(&["analyze", "--order", "fifo", "--m", "3,2", path(&ts)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("0,3,38/3 (~13),20,true"), "{out}");
    assert!(out.contains("verdict: schedulable"));
}

#[test]
fn unschedulable_verdict_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let tight = dir.path().join("tight.json");
    let text = fs::read_to_string(data("blocking_example.json")).unwrap();
    fs::write(&tight, text.replacen("\"deadline\": 20", "\"deadline\": 13", 1)).unwrap();
    let o = dagspin(&["analyze", "--order", "unordered", "--m", "1,1", path(&tight)]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("0,1,14,13,false"));
}

#[test]
fn partition_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    let o =
        dagspin(&["partition", "--order", "fifo", path(&data("time_accounting_example.json")), "--out", path(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("m = [1, 1]"));
    assert_eq!(fs::read_to_string(&csv).unwrap(), "task,processors,bound,deadline\n0,1,12,20\n1,1,5,20\n");
}

#[test]
fn priority_partition_searches_when_no_order_is_given() {
    let o = dagspin(&["partition", "--order", "priority", path(&data("blocking_example.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("priority order: [0, 1]"));
    let o = dagspin(&["search-priorities", path(&data("blocking_example.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("priority order: 0,1"));
}

#[test]
fn usage_and_input_errors_exit_with_two() {
    let o = dagspin(&["analyze", "--order", "bogus", "--m", "1", "x.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = dagspin(&["analyze", "--order", "fifo", "--m", "1", "/nonexistent/ts.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("reading /nonexistent/ts.json"));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\n  \"processors\": 4,\n  \"tasks\": [\n}\n").unwrap();
    let o = dagspin(&["partition", "--order", "fifo", path(&broken)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    let o = dagspin(&["analyze", "--order", "fifo", "--m", "1", path(&data("blocking_example.json"))]);
    assert_eq!(o.status.code(), Some(2), "wrong m length is an input error");
}

#[test]
fn fixture_traces_check_and_replay() {
    let o = dagspin(&[
        "check-trace",
        "--m",
        "3,2",
        path(&data("blocking_example.json")),
        path(&data("blocking_example.trace")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("ok: 2 jobs checked"));
    let o = dagspin(&[
        "replay",
        "--m",
        "3,2",
        path(&data("time_accounting_example.json")),
        path(&data("time_accounting_example.trace")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("0:0,0,8,5,10,9,")), "{}", stdout(&o));
}

#[test]
fn simulated_traces_pass_the_checker_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("run.trace");
    let ts = data("blocking_example.json");
    for order in ["unordered", "fifo", "priority"] {
        let mut args =
            vec!["simulate", "--order", order, "--m", "3,2", "--seed", "7", "--out", path(&trace), path(&ts)];
        if order == "priority" {
            args.extend(["--priority-order", "1,0"]);
        }
        let o = dagspin(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let o = dagspin(&["check-trace", "--m", "3,2", path(&ts), path(&trace)]);
        assert_eq!(o.status.code(), Some(0), "{order}: {}", stdout(&o));
    }

    let text = fs::read_to_string(&trace).unwrap();
    let exec = text.lines().find(|l| l.contains(",exec,")).unwrap().to_string();
    let mut fields: Vec<String> = exec.split(',').map(str::to_string).collect();
    let end: u64 = fields[3].parse().unwrap();
    fields[3] = (end + 1).to_string();
    fs::write(&trace, text.replacen(&exec, &fields.join(","), 1)).unwrap();
    let o = dagspin(&["check-trace", "--m", "3,2", path(&ts), path(&trace)]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("invalid trace"));
}

#[test]
fn adversarial_mode_needs_unordered_locks() {
    let o = dagspin(&[
        "simulate",
        "--order",
        "fifo",
        "--m",
        "3,2",
        "--adversarial",
        "0",
        path(&data("blocking_example.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generation_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("gen.cfg");
    fs::write(&config, "# small sets\ntasks = 3\nvertices = 10..20\nu_norm = 0.4\n").unwrap();
    let a = dagspin(&["generate", "--config", path(&config), "--seed", "3"]);
    let b = dagspin(&["generate", "--config", path(&config), "--seed", "3"]);
    let c = dagspin(&["generate", "--config", path(&config), "--seed", "4"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert!(stdout(&a).contains("\"processors\""));

    let placed = dir.path().join("placed.json");
    let o = dagspin(&["generate", "--config", path(&config), "--seed", "3", "--place", "--out", path(&placed)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(fs::read_to_string(&placed).unwrap().contains("request_placement"));

    fs::write(&config, "tasks = 3\ntasks = 4\n").unwrap();
    let o = dagspin(&["generate", "--config", path(&config)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn openmp_generation() {
    let o = dagspin(&["generate", "--openmp", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn sweep_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("sweep.cfg");
    fs::write(
        &spec,
        "axis = u_norm\nvalues = 0.2, 0.6\nsets_per_point = 3\nvertices = 20..40\nanalyzers = XU-U, XU-F\n",
    )
    .unwrap();
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    for out in [&out1, &out2] {
        let o = dagspin(&["sweep", "--spec", path(&spec), "--seed", "2", "--out", path(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let csv = fs::read_to_string(&out1).unwrap();
    assert_eq!(csv, fs::read_to_string(&out2).unwrap());
    assert!(csv.starts_with("axis,value,analyzer,accepted,total,ratio\n"));
    assert_eq!(csv.lines().count(), 5);
}
