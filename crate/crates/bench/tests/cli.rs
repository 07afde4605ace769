use std::path::Path;
use std::process::Command;

use wl2gnn::encoding::Wl2Encoding;
use wl2gnn::graphs::load_tu_dataset;
use wl2gnn_bench::cv::read_results;

fn run(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_wl2gnn")).args(args).env("RUST_LOG", "warn").output().unwrap();
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn commands_chain_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("TRIANGLE");
    run(&["gen-triangle", "--seed", "4", "--out-dir", path(&data), "--max-vertices", "9", "--samples-per-cell", "2"]);
    let ds = load_tu_dataset(&data).unwrap();
    assert_eq!(ds.name, "TRIANGLE");
    assert!(ds.len() > 20);

    let enc = dir.path().join("tri.enc");
    let msg = run(&["encode", "--dataset", path(&data), "--out", path(&enc)]);
    assert!(msg.contains("r=2"), "{msg}");
    assert_eq!(Wl2Encoding::read(&enc).unwrap(), Wl2Encoding::encode_batch(&ds.graphs, 2).unwrap());

    let grid = dir.path().join("grid.txt");
    std::fs::write(&grid, "# two cells\nlayer=gin T=2 d=4 act=relu pool=sum\n\nlayer=baseline T=1 d=4\n").unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let args = ["cv", "--dataset", path(&data), "--grid-file", path(&grid), "--out", path(out)];
        run(&[&args[..], &["--epochs", "3", "--folds", "3", "--repeats", "1", "--seed", "2"]].concat());
    }
    let rows = read_results(std::fs::File::open(&a).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.dataset == "TRIANGLE" && (0.0..=1.0).contains(&r.test_acc)));

    let msg = run(&["deltas", "--a", path(&a), "--b", path(&b)]);
    assert!(msg.contains("folds 3") && msg.contains("significant false"), "{msg}");

    let timing = dir.path().join("timing.csv");
    run(&["timing", "--n", "8,16", "--d", "2", "--graphs", "2", "--epochs", "1", "--out", path(&timing)]);
    let text = std::fs::read_to_string(&timing).unwrap();
    assert_eq!(text.lines().count(), 3, "{text}");
    assert!(text.starts_with("n,d,r,m,gamma,epoch_seconds"));
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing");
    let out = Command::new(env!("CARGO_BIN_EXE_wl2gnn"))
        .args(["cv", "--dataset", path(&missing), "--out", path(&dir.path().join("x.csv"))])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_wl2gnn"))
        .args(["gen-triangle", "--out-dir", path(dir.path()), "--min-vertices", "9", "--max-vertices", "6"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
