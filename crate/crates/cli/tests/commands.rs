mod common;

use std::fs;

use partmech::generators::gen_random;
use partmech::rational::parse_rational;
use partmech::srev;
use partmech_cli::formats::{read_instance, GadgetMetaFile, InstanceFile};

use common::*;

fn stdout_json(out: &std::process::Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn gen_random_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let o = run_cli(
            &["gen", "random", "--n", "6", "--seed", "7", "--out", name],
            dir.path(),
        );
        assert!(o.status.success());
    }
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    let o = run_cli(&["gen", "random", "--n", "6", "--seed", "8"], dir.path());
    assert_ne!(a, o.stdout);
}

#[test]
fn gen_3dm_writes_instance_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_cli(
        &["gen", "3dm", "--edges", "0,0,0;1,1,1", "--out", "g.json"],
        dir.path(),
    );
    assert!(o.status.success());
    assert_eq!(read_instance(&dir.path().join("g.json")).unwrap().n(), 6);
    let meta: GadgetMetaFile =
        serde_json::from_str(&fs::read_to_string(dir.path().join("g.meta.json")).unwrap()).unwrap();
    assert_eq!((meta.x, meta.y, meta.z), (2, 2, 2));
    assert_eq!(meta.pi, vec!["72", "80"]);
}

#[test]
fn solve_and_eval_examples() {
    let dir = tempfile::tempdir().unwrap();
    run_cli(&["gen", "two-bundles", "--out", "tb.json"], dir.path());
    let o = run_cli(&["solve", "tb.json", "--out", "m.json"], dir.path());
    assert!(o.status.success());
    let r = stdout_json(&o);
    assert_eq!(r["revenue"], "217/50");
    assert_eq!(r["revenue_decimal"], "4.340000");
    assert_eq!(r["partitions_examined"], 15);
    assert_eq!(r["truncated"], false);
    let o = run_cli(&["eval", "tb.json", "m.json"], dir.path());
    assert_eq!(stdout_json(&o)["revenue"], "217/50");

    run_cli(&["gen", "hart-nisan", "--out", "hn.json"], dir.path());
    assert_eq!(
        stdout_json(&run_cli(&["solve", "hn.json"], dir.path()))["revenue"],
        "4/3"
    );
    fs::write(
        dir.path().join("menu.json"),
        r#"{"options":[{"items":[0],"price":"2"},{"items":[1],"price":"2"},{"items":[0,1],"price":"3"}]}"#,
    )
    .unwrap();
    let o = run_cli(&["eval", "hn.json", "menu.json", "--menu"], dir.path());
    assert_eq!(stdout_json(&o)["revenue"], "13/9");
}

#[test]
fn point_masses_and_singletons() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("pm.json"),
        r#"{"items":[{"values":["3/2"],"probs":["1"]},{"values":["4"],"probs":["1"]},{"values":["0"],"probs":["1"]}]}"#,
    )
    .unwrap();
    let o = run_cli(&["solve", "pm.json", "--method", "ptas"], dir.path());
    assert_eq!(stdout_json(&o)["revenue"], "11/2");

    let inst = gen_random(5, 3, 9, 4).unwrap();
    fs::write(
        dir.path().join("r.json"),
        serde_json::to_string(&InstanceFile::from_instance(&inst)).unwrap(),
    )
    .unwrap();
    let quotes = srev(&inst).1;
    let bundles: Vec<String> = quotes
        .iter()
        .enumerate()
        .map(|(i, q)| {
            format!(
                r#"{{"items":[{i}],"price":"{}"}}"#,
                partmech::rational::format_rational(&q.price)
            )
        })
        .collect();
    fs::write(
        dir.path().join("s.json"),
        format!(r#"{{"bundles":[{}]}}"#, bundles.join(",")),
    )
    .unwrap();
    let o = run_cli(&["eval", "r.json", "s.json"], dir.path());
    let got = parse_rational(stdout_json(&o)["revenue"].as_str().unwrap()).unwrap();
    assert_eq!(got, srev(&inst).0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_cli(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(
        run_cli(&["gen", "two-gap", "--n", "5"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run_cli(&["solve", "missing.json"], dir.path())
            .status
            .code(),
        Some(4)
    );

    fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    assert_eq!(
        run_cli(&["solve", "bad.json"], dir.path()).status.code(),
        Some(4)
    );
    fs::write(
        dir.path().join("mass.json"),
        r#"{"items":[{"values":["1"],"probs":["1/2"]}]}"#,
    )
    .unwrap();
    assert_eq!(
        run_cli(&["solve", "mass.json"], dir.path()).status.code(),
        Some(4)
    );

    run_cli(
        &["gen", "random", "--n", "13", "--out", "big.json"],
        dir.path(),
    );
    assert_eq!(
        run_cli(&["solve", "big.json"], dir.path()).status.code(),
        Some(3)
    );

    run_cli(&["gen", "two-bundles", "--out", "tb.json"], dir.path());
    fs::write(
        dir.path().join("overlap.json"),
        r#"{"bundles":[{"items":[0,1],"price":"1"},{"items":[1,2,3],"price":"1"}]}"#,
    )
    .unwrap();
    assert_eq!(
        run_cli(&["eval", "tb.json", "overlap.json"], dir.path())
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        run_cli(
            &["solve", "tb.json", "--method", "ptas", "--eps", "3/2"],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );

    let truncated = std::process::Command::new(bin())
        .args(["solve", "tb.json", "--method", "ptas"])
        .env("PARTMECH_CANDIDATE_CAP", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(truncated.status.code(), Some(3));
    assert_eq!(stdout_json(&truncated)["truncated"], true);
}

#[test]
fn threads_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    run_cli(
        &[
            "gen",
            "random",
            "--n",
            "8",
            "--max-support",
            "3",
            "--seed",
            "21",
            "--out",
            "r.json",
        ],
        dir.path(),
    );
    for method in ["exact", "ptas"] {
        let mut seen = Vec::new();
        for t in ["1", "4"] {
            let out = format!("{method}-{t}.json");
            let o = run_cli(
                &[
                    "--threads",
                    t,
                    "solve",
                    "r.json",
                    "--method",
                    method,
                    "--out",
                    &out,
                ],
                dir.path(),
            );
            assert!(o.status.success());
            seen.push((
                stdout_json(&o)["revenue"].clone(),
                fs::read(dir.path().join(&out)).unwrap(),
            ));
        }
        assert_eq!(seen[0], seen[1], "{method}");
    }
}

#[test]
fn compare_rows_and_markers() {
    let dir = tempfile::tempdir().unwrap();
    run_cli(
        &["gen", "random", "--n", "13", "--out", "big.json"],
        dir.path(),
    );
    fs::write(
        dir.path().join("pm.json"),
        r#"{"items":[{"values":["2"],"probs":["1"]},{"values":["5"],"probs":["1"]}]}"#,
    )
    .unwrap();
    let o = run_cli(
        &[
            "compare",
            "pm.json",
            "big.json",
            "--family",
            "two-bundles",
            "--methods",
            "exact",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[0], "instance_id");
    assert!(header.contains(&"ratio_prev_over_maxsb".to_string()));
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[0][0], "pm");
    assert_eq!(&rows[0][7], "1.000000");
    assert_eq!(&rows[1][4], "ERR:size");
    assert_eq!(&rows[2][0], "two-bundles");
    // 217/50 over max(srev, brev) = 4.
    assert_eq!(&rows[2][7], "1.085000");
}
