mod common;

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};

use common::{count, docspan, docspan_ok, manifest_counts, nonempty_lines, write_corpus, Gen};

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut gen = Gen::new(1);
    let docs = gen.corpus(4, 3, 10);
    let src = dir.path().join("src.txt");
    write_corpus(&src, &docs);
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "seed = 5\n[augment]\nbudget = 100\nupsample = 3\n[paths]\nsrc = \"{0}\"\ntgt = \"{0}\"\nout_dir = \"{1}\"\n",
            s(&src),
            s(&dir.path().join("out"))
        ),
    )
    .unwrap();
    docspan_ok(&["augment", "--config", s(&config), "--budget", "250"]);
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["config"]["augment"]["budget"], 250);
    assert_eq!(manifest["config"]["augment"]["upsample"], 3);
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn manifest_counts_match_output_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut gen = Gen::new(2);
    let docs = gen.corpus(8, 5, 30);
    let src = d.join("src.txt");
    write_corpus(&src, &docs);

    docspan_ok(&[
        "augment",
        "--src",
        s(&src),
        "--tgt",
        s(&src),
        "--upsample",
        "2",
        "--out-dir",
        s(&d.join("aug")),
    ]);
    let counts = manifest_counts(&d.join("aug/manifest.json"));
    assert_eq!(
        count(&counts, "sequences.authentic.emitted") as usize,
        nonempty_lines(&d.join("aug/authentic.src"))
    );
    assert_eq!(
        count(&counts, "sequences.authentic.emitted") as usize,
        nonempty_lines(&d.join("aug/authentic.tgt"))
    );
    assert_eq!(count(&counts, "sequences.synthetic.emitted"), 0);

    docspan_ok(&[
        "plan",
        "--input",
        s(&src),
        "--output",
        s(&d.join("plan.jsonl")),
    ]);
    let counts = manifest_counts(&d.join("plan.jsonl.manifest.json"));
    assert_eq!(
        count(&counts, "windows") as usize,
        nonempty_lines(&d.join("plan.jsonl"))
    );

    docspan_ok(&[
        "translate-doc",
        "--backend",
        "mock:identity?fault=empty&every=3",
        "--input",
        s(&src),
        "--output",
        s(&d.join("doc.txt")),
        "--backup-log",
        s(&d.join("backups.jsonl")),
    ]);
    let counts = manifest_counts(&d.join("doc.txt.manifest.json"));
    assert!(count(&counts, "backups") > 0);
    assert_eq!(
        count(&counts, "backups") as usize,
        nonempty_lines(&d.join("backups.jsonl"))
    );

    docspan_ok(&[
        "translate-pos",
        "--backend",
        "mock:identity?fault=long-word&min-segments=3",
        "--input",
        s(&src),
        "--output",
        s(&d.join("pos.txt")),
        "--stats",
        s(&d.join("stats.jsonl")),
        "--choices",
        s(&d.join("choices.jsonl")),
    ]);
    let counts = manifest_counts(&d.join("pos.txt.manifest.json"));
    let stats: Vec<serde_json::Value> = std::fs::read_to_string(d.join("stats.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let validated: u64 = stats.iter().map(|r| r["validated"].as_u64().unwrap()).sum();
    assert_eq!(count(&counts, "candidates.validated"), validated);
    assert_eq!(
        count(&counts, "sentences") as usize,
        nonempty_lines(&d.join("choices.jsonl"))
    );
    // every three-sentence context was broken, so none may be chosen
    let choices = std::fs::read_to_string(d.join("choices.jsonl")).unwrap();
    assert!(!choices.contains("/3\""));
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let src = d.join("src.txt");
    std::fs::write(&src, "One.\nTwo.\n").unwrap();
    let out = d.join("out.txt");

    let bad_backend = docspan(&[
        "translate-doc",
        "--backend",
        "carrier-pigeon:x",
        "--input",
        s(&src),
        "--output",
        s(&out),
    ]);
    assert_eq!(
        bad_backend.status.code(),
        Some(2),
        "{}",
        stderr(&bad_backend)
    );

    let bad_limits = docspan(&[
        "translate-doc",
        "--main",
        "0",
        "--input",
        s(&src),
        "--output",
        s(&out),
    ]);
    assert_eq!(bad_limits.status.code(), Some(2), "{}", stderr(&bad_limits));

    let bad_config = d.join("bad.toml");
    std::fs::write(&bad_config, "budgett = 3\n").unwrap();
    let r = docspan(&[
        "plan",
        "--config",
        s(&bad_config),
        "--input",
        s(&src),
        "--output",
        s(&out),
    ]);
    assert_eq!(r.status.code(), Some(2));

    let missing = d.join("no-such-file.txt");
    let r = docspan(&["plan", "--input", s(&missing), "--output", s(&out)]);
    assert_eq!(r.status.code(), Some(3));
    assert!(stderr(&r).contains("no-such-file.txt"));

    let collide = d.join("collide.txt");
    std::fs::write(&collide, "a <SEP> b\n").unwrap();
    let r = docspan(&["plan", "--input", s(&collide), "--output", s(&out)]);
    assert_eq!(r.status.code(), Some(3), "{}", stderr(&r));

    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let r = docspan(&[
        "translate-doc",
        "--backend",
        &format!("tcp:127.0.0.1:{port}"),
        "--input",
        s(&src),
        "--output",
        s(&out),
    ]);
    assert_eq!(r.status.code(), Some(4), "{}", stderr(&r));
    assert!(!out.exists());
}

#[test]
fn failed_run_leaves_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let src = d.join("src.txt");
    // a single 60-character word makes every candidate invalid
    std::fs::write(&src, format!("{}\n", "w".repeat(60))).unwrap();
    let out = d.join("out").join("pos.txt");
    let r = docspan(&[
        "translate-pos",
        "--input",
        s(&src),
        "--output",
        s(&out),
        "--stats",
        s(&d.join("out/stats.jsonl")),
    ]);
    assert_eq!(r.status.code(), Some(4), "{}", stderr(&r));
    let leftovers: Vec<_> = std::fs::read_dir(d)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n != "src.txt")
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn cmd_and_tcp_backends_match_in_process_mock() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut gen = Gen::new(3);
    let src = d.join("src.txt");
    write_corpus(&src, &gen.corpus(6, 5, 40));
    let mock = "uppercase?fault=drop-separator&every=4";
    let run = |backend: &str, name: &str| {
        let out = d.join(name);
        docspan_ok(&[
            "translate-doc",
            "--backend",
            backend,
            "--input",
            s(&src),
            "--output",
            s(&out),
        ]);
        std::fs::read(out).unwrap()
    };
    let local = run(&format!("mock:{mock}"), "local.txt");

    let bin = env!("CARGO_BIN_EXE_docspan");
    assert!(!bin.contains(' '));
    let via_cmd = run(
        &format!("cmd:{bin} serve-mock --stdio --mock {mock}"),
        "cmd.txt",
    );
    assert_eq!(via_cmd, local);

    let mut server = Command::new(bin)
        .args(["serve-mock", "--listen", "127.0.0.1:0", "--mock", mock])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(server.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line
        .trim()
        .strip_prefix("listening on ")
        .expect("address line")
        .to_string();
    let via_tcp = run(&format!("tcp:{addr}"), "tcp.txt");
    server.kill().unwrap();
    server.wait().unwrap();
    assert_eq!(via_tcp, local);
}

#[test]
fn postprocess_streams_stdin_to_stdout() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_docspan"))
        .args(["postprocess", "--repetitions", "--quotes"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all("so so so good\nsaid \"hi\"\n".as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "so good\nsaid „hi“\n"
    );
}

#[test]
fn docid_tsv_corpus_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src.tsv");
    std::fs::write(
        &src,
        "talk1\tHello there.\ntalk1\tSecond one.\nnews7\tOnly sentence.\n",
    )
    .unwrap();
    let out = dir.path().join("out.tsv");
    docspan_ok(&[
        "translate-doc",
        "--format",
        "docid-tsv",
        "--input",
        s(&src),
        "--output",
        s(&out),
    ]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&src).unwrap());
    docspan_ok(&[
        "translate-pos",
        "--format",
        "tsv",
        "--backend",
        "mock:uppercase",
        "--input",
        s(&src),
        "--output",
        s(&out),
    ]);
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        "talk1\tHELLO THERE.\ntalk1\tSECOND ONE.\nnews7\tONLY SENTENCE.\n"
    );
}
