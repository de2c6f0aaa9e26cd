use std::path::Path;
use std::process::{Command, Output};

fn seqlsh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqlsh"))
        .args(args)
        .output()
        .unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn synth_corpus(dir: &Path, measure: &str) -> String {
    let path = dir.join(format!("{measure}.tsv"));
    let p = path.to_str().unwrap().to_string();
    let out = seqlsh(&[
        "synth",
        "--measure",
        measure,
        "--vectors",
        "300",
        "--planted",
        "0.3:0.95:14:5",
        "--seed",
        "3",
        "-o",
        &p,
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    p
}

fn metric(lines: &str, name: &str) -> Option<String> {
    lines.lines().find_map(|l| {
        let mut f = l.split('\t');
        (f.next() == Some("#METRIC") && f.next() == Some(name))
            .then(|| f.next().unwrap().to_string())
    })
}

#[test]
fn run_emits_sorted_results_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_corpus(dir.path(), "jaccard");
    let out = seqlsh(&["run", "-i", &input, "--threshold", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    let rows: Vec<(u64, u64, f64)> = stdout
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
            )
        })
        .collect();
    assert!(!rows.is_empty());
    assert!(rows.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
    assert!(rows.iter().all(|r| r.0 < r.1 && r.2 >= 0.5));
    let stderr = text(&out.stderr);
    assert_eq!(
        metric(&stderr, "emitted")
            .unwrap()
            .parse::<usize>()
            .unwrap(),
        rows.len()
    );
    assert!(metric(&stderr, "hash_comparisons").is_some());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_corpus(dir.path(), "cosine");
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "measure = cosine\nthreshold = 0.9\nstrategy = sprt\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = seqlsh(&["run", "-i", &input, "--config", c]);
    let overridden = seqlsh(&["run", "-i", &input, "--config", c, "--threshold", "0.6"]);
    assert!(from_file.status.success() && overridden.status.success());
    let (a, b) = (text(&from_file.stderr), text(&overridden.stderr));
    assert_eq!(metric(&a, "via_ci").as_deref(), Some("0"));
    let (na, nb): (usize, usize) = (
        metric(&a, "emitted").unwrap().parse().unwrap(),
        metric(&b, "emitted").unwrap().parse().unwrap(),
    );
    assert!(nb > na, "{na} vs {nb}");
}

#[test]
fn eval_prints_per_strategy_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_corpus(dir.path(), "jaccard");
    let out = seqlsh(&[
        "eval",
        "-i",
        &input,
        "-t",
        "0.6",
        "--strategies",
        "sprt,hybrid",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let s = text(&out.stdout);
    assert!(metric(&s, "sprt.recall").is_some());
    assert!(metric(&s, "hybrid.hash_comparisons").is_some());
    assert!(metric(&s, "ci.recall").is_none());
    assert_eq!(metric(&s, "hybrid.precision").as_deref(), Some("1.000000"));
}

#[test]
fn synth_output_is_deterministic() {
    let a = seqlsh(&["synth", "--vectors", "400", "--seed", "9"]);
    let b = seqlsh(&["synth", "--vectors", "400", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(text(&a.stdout).lines().count(), 400);
}

#[test]
fn writes_side_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_corpus(dir.path(), "cosine");
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let out = seqlsh(&[
        "run",
        "-i",
        &input,
        "--measure",
        "cosine",
        "--mode",
        "sketch",
        "-o",
        &p("r.tsv"),
        "--pair-log",
        &p("log.tsv"),
        "--dump-candidates",
        &p("cand.tsv"),
        "--plan-cache",
        &p("plans.bin"),
        "--report",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stderr = text(&out.stderr);
    let cands = std::fs::read_to_string(p("cand.tsv"))
        .unwrap()
        .lines()
        .count();
    let log = std::fs::read_to_string(p("log.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count();
    assert_eq!(
        metric(&stderr, "candidates")
            .unwrap()
            .parse::<usize>()
            .unwrap(),
        cands
    );
    assert_eq!(cands, log);
    assert!(Path::new(&p("plans.bin")).exists());
    assert!(stderr.contains("hash comparisons"));
    let sk = seqlsh(&[
        "sketch",
        "-i",
        &input,
        "--measure",
        "cosine",
        "-o",
        &p("s.bin"),
    ]);
    assert!(sk.status.success());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth_corpus(dir.path(), "jaccard");
    assert_eq!(
        seqlsh(&["run", "-i", &input, "--alpha", "0.7"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        seqlsh(&["run", "-i", &input, "--no-such-flag"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        seqlsh(&["run", "-i", "/nonexistent/corpus.tsv"])
            .status
            .code(),
        Some(1)
    );
    let bad = dir.path().join("bad.tsv");
    std::fs::write(&bad, "1\t1 2\n2\t4 4\n").unwrap();
    let out = seqlsh(&["run", "-i", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("line 2"));
}
