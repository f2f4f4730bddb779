use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fluidc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluidc"))
        .args(args)
        .output()
        .expect("run fluidc")
}

fn ok(args: &[&str]) -> String {
    let out = fluidc(args);
    assert!(
        out.status.success(),
        "fluidc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_writes_graph_and_truth_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("g");
    ok(&[
        "gen",
        "--n",
        "500",
        "--mu",
        "0.3",
        "--seed",
        "4",
        "--out",
        p(&prefix),
    ]);
    let edges = fs::read_to_string(dir.path().join("g.edges")).unwrap();
    let cmty = fs::read_to_string(dir.path().join("g.cmty")).unwrap();
    assert!(edges.starts_with("# vertices 500\n"));
    assert!(edges.lines().any(|l| l.starts_with("# realized_mu ")));
    assert!(edges.lines().any(|l| l.starts_with("# communities ")));
    assert!(cmty.lines().any(|l| l.starts_with("# communities ")));
    assert_eq!(cmty.lines().filter(|l| !l.starts_with('#')).count(), 500);

    // same seed, same files
    let again = dir.path().join("h");
    ok(&[
        "gen",
        "--n",
        "500",
        "--mu",
        "0.3",
        "--seed",
        "4",
        "--out",
        p(&again),
    ]);
    assert_eq!(
        edges,
        fs::read_to_string(dir.path().join("h.edges")).unwrap()
    );
}

#[test]
fn detect_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("g");
    ok(&[
        "gen",
        "--n",
        "400",
        "--mu",
        "0.1",
        "--seed",
        "1",
        "--out",
        p(&prefix),
    ]);
    let graph = dir.path().join("g.edges");
    let truth = dir.path().join("g.cmty");
    let cmty = fs::read_to_string(&truth).unwrap();
    let k = cmty
        .lines()
        .find_map(|l| l.strip_prefix("# communities "))
        .unwrap()
        .to_string();

    let pred = dir.path().join("pred.cmty");
    ok(&[
        "detect",
        "--graph",
        p(&graph),
        "--algo",
        "fluidc",
        "--k",
        &k,
        "--out",
        p(&pred),
    ]);
    let nmi: f64 = ok(&[
        "eval",
        "--metric",
        "nmi",
        "--pred",
        p(&pred),
        "--truth",
        p(&truth),
    ])
    .trim()
    .parse()
    .unwrap();
    assert!(nmi > 0.8, "nmi {nmi}");

    let lpa = dir.path().join("lpa.cmty");
    ok(&[
        "detect",
        "--graph",
        p(&graph),
        "--algo",
        "lpa",
        "--out",
        p(&lpa),
    ]);
    let q = ok(&[
        "eval",
        "--metric",
        "modularity",
        "--pred",
        p(&lpa),
        "--graph",
        p(&graph),
    ]);
    let q = q.trim();
    assert_eq!(q.split('.').nth(1).map(str::len), Some(6), "{q}");
    assert!(q.parse::<f64>().unwrap() > 0.5);

    // self-comparison is exactly one
    assert_eq!(
        ok(&[
            "eval",
            "--metric",
            "nmi",
            "--pred",
            p(&truth),
            "--truth",
            p(&truth)
        ])
        .trim(),
        "1.000000"
    );
}

#[test]
fn best_k_writes_a_partition() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("cliques.edges");
    let mut text = String::new();
    for base in [0, 5] {
        for u in base..base + 5 {
            for v in u + 1..base + 5 {
                text.push_str(&format!("{u} {v}\n"));
            }
        }
    }
    text.push_str("4 5\n");
    fs::write(&graph, text).unwrap();
    let out = ok(&[
        "best-k",
        "--graph",
        p(&graph),
        "--k-min",
        "2",
        "--k-max",
        "2",
    ]);
    assert_eq!(out.lines().count(), 10);
}

#[test]
fn gen_multi_and_diversity() {
    let dir = tempfile::tempdir().unwrap();
    let graphs = dir.path().join("graphs");
    fs::create_dir(&graphs).unwrap();
    for seed in ["1", "2"] {
        let prefix = graphs.join(format!("m{seed}"));
        ok(&[
            "gen-multi",
            "--n",
            "400",
            "--seed",
            seed,
            "--out",
            p(&prefix),
        ]);
    }
    for suffix in ["m1.edges", "m1.t1.cmty", "m1.t2.cmty"] {
        assert!(graphs.join(suffix).exists(), "{suffix}");
    }
    let matrix = dir.path().join("matrix.csv");
    ok(&[
        "diversity",
        "--graphs",
        p(&graphs),
        "--algos",
        "fluidc,fluidc@b,lpa",
        "--runs",
        "20",
        "--alpha",
        "0.5",
        "--out",
        p(&matrix),
    ]);
    let text = fs::read_to_string(&matrix).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["fluidc", "fluidc@b", "lpa"]);
    assert_eq!(rows.len(), 4);
    for (i, row) in rows[1..].iter().enumerate() {
        assert_eq!(row.len(), 3);
        let v: f64 = row[i].parse().unwrap();
        assert_eq!(v, 1.0);
        for cell in row {
            let x: f64 = cell.parse().unwrap();
            assert!((0.0..=1.0).contains(&x));
        }
    }
}

#[test]
fn bench_from_flags_and_from_file_agree() {
    let dir = tempfile::tempdir().unwrap();
    let from_flags = dir.path().join("flags.csv");
    let summary = dir.path().join("summary.csv");
    ok(&[
        "bench",
        "--sizes",
        "233",
        "--mus",
        "0.1:0.3:0.1",
        "--reps",
        "2",
        "--algos",
        "fluidc,lpa",
        "--k-policy",
        "truth",
        "--seed",
        "8",
        "--out",
        p(&from_flags),
        "--summary",
        p(&summary),
    ]);
    let config = dir.path().join("bench.toml");
    fs::write(
        &config,
        "sizes = [233]\nmus = \"0.1:0.3:0.1\"\nreps = 2\nalgos = [\"fluidc\", \"lpa\"]\nk_policy = \"truth\"\nseed = 8\n",
    )
    .unwrap();
    let from_file = dir.path().join("file.csv");
    ok(&["bench", "--config", p(&config), "--out", p(&from_file)]);

    let strip = |path: &Path| -> Vec<String> {
        fs::read_to_string(path)
            .unwrap()
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                // timing columns
                f.drain(12..14);
                f.join(",")
            })
            .collect()
    };
    let a = strip(&from_flags);
    assert_eq!(a.len(), 1 + 3 * 2 * 2);
    assert!(a[0].starts_with("algorithm,n,m,mu_requested,mu_realized,replicate,seed,k_used,nmi,modularity,supersteps,converged"));
    assert_eq!(a, strip(&from_file));
    let s = fs::read_to_string(&summary).unwrap();
    assert_eq!(s.lines().count(), 1 + 2 * 3);
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.edges");
    let out = fluidc(&["detect", "--graph", p(&missing), "--k", "2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let bad = dir.path().join("bad.edges");
    fs::write(&bad, "0 1\n1 x\n").unwrap();
    assert!(!fluidc(&["detect", "--graph", p(&bad), "--algo", "lpa"])
        .status
        .success());

    let graph = dir.path().join("pair.edges");
    fs::write(&graph, "0 1\n2 3\n").unwrap();
    // more components than communities
    assert!(!fluidc(&["detect", "--graph", p(&graph), "--k", "1"])
        .status
        .success());
    assert!(!fluidc(&["detect", "--graph", p(&graph)]).status.success());
    assert!(
        !fluidc(&["bench", "--sizes", "100", "--mus", "0.5:0.1:0.1"])
            .status
            .success()
    );
    assert!(!fluidc(&["frobnicate"]).status.success());
}
