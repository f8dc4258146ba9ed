use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn dea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dea")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p: PathBuf = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// The one-input, one-output A/B/C instance.
fn abc(dir: &Path) -> (String, String) {
    (
        write(dir, "abc.csv", "dmu_id,x,y\nA,1,1\nB,3,4\nC,2,2\n"),
        write(dir, "abc.schema", "x,input,x,\ny,output,y,\n"),
    )
}

fn csv_row<'a>(text: &'a str, id: &str) -> Vec<&'a str> {
    text.lines().find(|l| l.starts_with(&format!("{id},"))).unwrap().split(',').collect()
}

#[test]
fn solve_three_point_instance() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = abc(dir.path());
    let o = dea(&["solve", "--dataset", &data, "--schema", &schema, "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("dmu_id,theta,efficient,peers"));
    assert_eq!(csv_row(&text, "C"), ["C", "1.25", "false", "A:0.5;B:0.5"]);

    let o = dea(&["solve", "--dataset", &data, "--schema", &schema, "--format", "csv", "--frontier", "crs"]);
    assert_eq!(csv_row(&stdout(&o), "C")[1], "1.3333333333");
}

#[test]
fn solve_json_and_single_dmu() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = abc(dir.path());
    let o = dea(&["solve", "--dataset", &data, "--schema", &schema]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert!((v[2]["theta"].as_f64().unwrap() - 1.25).abs() < 1e-9);

    let one = write(dir.path(), "one.csv", "dmu_id,x,y\nSOLO,4,9\n");
    let o = dea(&["solve", "--dataset", &one, "--schema", &schema, "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), ["dmu_id,theta,efficient,peers", "SOLO,1,true,SOLO:1"]);
}

#[test]
fn validate_generated_market_fixture() {
    let o = dea(&["validate", "--seed", "42", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("dmus,233\n"));
    assert!(text.contains("adequacy,60 pass / 200 pass\n"));
    assert!(stderr(&o).contains("60 pass / 200 pass"));
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = abc(dir.path());

    let bad = write(dir.path(), "bad.csv", "dmu_id,x,y\nA,1,1\nB,3,oops\n");
    let o = dea(&["validate", "--dataset", &bad, "--schema", &schema]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("row 3, column 3"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());

    let missing = dir.path().join("nope.schema");
    let o = dea(&["validate", "--dataset", &data, "--schema", missing.to_str().unwrap()]);
    assert_eq!(code(&o), 1);

    assert_eq!(code(&dea(&["solve", "--no-such-flag"])), 1);
    assert_eq!(code(&dea(&["solve"])), 1);
    assert_eq!(code(&dea(&["solve", "--dataset", &data])), 1);
    assert_eq!(code(&dea(&["solve", "--seed", "1", "--order", "asc"])), 1);
    assert_eq!(code(&dea(&["--help"])), 0);

    let negative = write(dir.path(), "neg.csv", "dmu_id,x,y\nA,1,1\nB,-3,4\n");
    assert_eq!(code(&dea(&["solve", "--dataset", &negative, "--schema", &schema])), 2);
}

fn five_markets(dir: &Path) -> (String, String) {
    (
        write(
            dir,
            "five.csv",
            "dmu_id,x,q,y\nA,1,40,5\nB,1,10,20\nC,2,20,4\nD,2,15,10\nE,3,15,8\n",
        ),
        write(dir, "five.schema", "x,input,cost,\nq,output,quantity,t\ny,output,other,\n"),
    )
}

#[test]
fn rank_five_market_fixture() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = five_markets(dir.path());
    let base = ["rank", "--dataset", &data, "--schema", &schema, "--quantity-var", "q", "--no-screening", "--format", "csv"];
    let selected = |extra: &[&str]| -> Vec<String> {
        let o = dea(&[&base[..], extra].concat());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        stdout(&o).lines().skip(1).map(|l| l.split(',').nth(2).unwrap().to_string()).collect()
    };
    assert_eq!(selected(&[]), ["A", "B"]);
    assert_eq!(selected(&["--order", "asc"]), ["B", "A"]);
    assert_eq!(selected(&["--k", "1"]), ["A"]);

    let o = dea(&[&base[..], &["--strict"]].concat());
    assert_eq!(code(&o), 2, "five DMUs miss the adequacy rules");
}

#[test]
fn screen_reports_and_writes_reduced_dataset() {
    let dir = TempDir::new().unwrap();
    let data = write(
        dir.path(),
        "dup.csv",
        "dmu_id,a,a2,z,y\nD1,1,1,3,2\nD2,4,4,1,7\nD3,2,2,4,1\nD4,8,8,1,8\nD5,3,3,5,2\n",
    );
    let schema = write(dir.path(), "dup.schema", "a,input,a,\na2,input,a copy,\nz,input,z,\ny,output,y,\n");
    let reduced = dir.path().join("reduced.csv");
    let reduced_schema = dir.path().join("reduced.schema");
    let o = dea(&[
        "screen",
        "--dataset",
        &data,
        "--schema",
        &schema,
        "--format",
        "csv",
        "--reduced-dataset",
        reduced.to_str().unwrap(),
        "--reduced-schema",
        reduced_schema.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dropped: Vec<String> = stdout(&o).lines().filter(|l| l.contains(",dropped,")).map(String::from).collect();
    assert_eq!(dropped.len(), 1);
    assert!(dropped[0].starts_with("a2,input,dropped,"));
    assert!(fs::read_to_string(&reduced).unwrap().starts_with("dmu_id,a,z,y\n"));

    let o = dea(&["validate", "--dataset", reduced.to_str().unwrap(), "--schema", reduced_schema.to_str().unwrap()]);
    assert_eq!(code(&o), 0);

    let o = dea(&["screen", "--seed", "5", "--countries", "60", "--threshold", "1.0", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(!stdout(&o).contains(",dropped,"));
}

#[test]
fn batch_summary_has_a_row_per_product_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| -> (String, String) {
        let out = dir.path().join(format!("{name}.json"));
        let summary = dir.path().join(format!("{name}.csv"));
        let o = dea(&[
            "rank",
            "--batch",
            "--seed",
            "11",
            "--countries",
            "30",
            "--out",
            out.to_str().unwrap(),
            "--summary",
            summary.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        (fs::read_to_string(out).unwrap(), fs::read_to_string(summary).unwrap())
    };
    let (json_a, summary_a) = run("a");
    let (json_b, summary_b) = run("b");
    assert_eq!(summary_a.lines().count(), 618);
    assert!(summary_a.lines().skip(1).all(|l| l.contains(",ok,")));
    assert_eq!(json_a, json_b);
    assert_eq!(summary_a, summary_b);
}

#[test]
fn batch_over_a_directory_isolates_failures() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = five_markets(dir.path());
    let products = dir.path().join("products");
    fs::create_dir(&products).unwrap();
    fs::copy(&data, products.join("010121.csv")).unwrap();
    fs::write(products.join("020110.csv"), "dmu_id,x,q,y\nA,1,0,5\nB,1,0,20\nC,2,0,4\n").unwrap();
    let catalog = write(dir.path(), "catalog.csv", "code,section,name\n010121,1,horses\n020110,1,beef\n030111,1,missing file\n");
    let o = dea(&[
        "rank",
        "--batch",
        "--catalog",
        &catalog,
        "--dataset-dir",
        products.to_str().unwrap(),
        "--schema",
        &schema,
        "--quantity-var",
        "q",
        "--no-screening",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "product_code,rank,country,theta,share\n010121,1,A,1,0.4\n010121,2,B,1,0.1\n");
    assert!(stderr(&o).contains("1 products ranked, 2 failed"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let a = dea(&["rank", "--seed", "9", "--countries", "80"]);
    let b = dea(&["rank", "--seed", "9", "--countries", "80", "--workers", "1"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
