use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_toric-wkstab"));
    c.env_remove("TORIC_WKSTAB_WORKERS");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("sq.json", r#"{"dim":2,"vertices":[["-1","-1"],["1","-1"],["1","1"],["-1","1"]]}"#),
        ("cuts.json", r#"{"cuts":[{"normal":["-1","-1"],"base_offset":"2","rate":"1"}]}"#),
        ("f.json", r#"{"max_of_affine":[{"constant":"0","gradient":["0","0"]},{"constant":"0","gradient":["1","0"]}]}"#),
        ("edge.json", r#"{"dim":2,"terms":[{"exponents":[0,0],"coeff":"1/1000"},{"exponents":[4,0],"coeff":"1"}]}"#),
        ("neg.json", r#"{"dim":2,"terms":[{"exponents":[0,0],"coeff":"1"},{"exponents":[1,1],"coeff":"-2"}]}"#),
    ];
    for (name, body) in files {
        std::fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

#[test]
fn check_exit_codes() {
    let d = fixtures();
    let ok = run(d.path(), &["check", "--polytope", "sq.json"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let j = stdout_json(&ok);
    assert_eq!(j["delta"], "2/3");
    assert_eq!(j["destabilized"], false);

    let bad = run(d.path(), &["check", "--polytope", "sq.json", "--w", "edge.json"]);
    assert_eq!(code(&bad), 10);
    assert_eq!(stdout_json(&bad)["delta"], "-394/1809");
}

#[test]
fn input_errors_exit_with_two() {
    let d = fixtures();
    assert_eq!(code(&run(d.path(), &["check", "--polytope", "missing.json"])), 2);
    assert_eq!(code(&run(d.path(), &["check", "--polytope", "sq.json", "--refine", "9"])), 2);
    assert_eq!(code(&run(d.path(), &["check", "--polytope", "sq.json", "--y0", "1,1"])), 2);
    assert_eq!(code(&run(d.path(), &["check", "--bogus"])), 2);
    let v = run(d.path(), &["validate", "--polytope", "sq.json", "--w", "neg.json"]);
    assert_eq!(code(&v), 2);
    assert_eq!(stdout_json(&v)[0]["code"], "weight-positivity");
}

#[test]
fn worked_values_through_the_binary() {
    let d = fixtures();
    let l = run(d.path(), &["eval-L", "--polytope", "sq.json", "--f", "f.json"]);
    assert_eq!(stdout_json(&l)["L"], "2");
    let l = run(d.path(), &["eval-L", "--polytope", "sq.json", "--f", "f.json", "--c", "auto"]);
    // With w = 1 and c = 4 the value is 2·3 − 4·1.
    assert_eq!(stdout_json(&l)["L"], "2");
    let e = run(d.path(), &["lext", "--polytope", "sq.json"]);
    assert_eq!(stdout_json(&e)["ell"], serde_json::json!(["4", "0", "0"]));
    let fu = run(d.path(), &["futaki", "--polytope", "sq.json", "--xi", "1,0,0", "--c", "1"]);
    // 2·8 − 1·4
    assert_eq!(stdout_json(&fu)["futaki"], "12");
    let csv = run(d.path(), &["lext-sweep", "--polytope", "sq.json", "--extra", "cuts.json", "--eps", "0,5"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), ["eps,b0,b1,b2,residual", "0,4,0,0,0", "5,,,,"]);
}

#[test]
fn sweep_writes_named_outputs_deterministically() {
    let d = fixtures();
    let args = ["sweep", "--polytope", "sq.json", "--extra", "cuts.json", "--eps", "0,1/16", "--output", "out"];
    assert_eq!(code(&run(d.path(), &args)), 0);
    let mut first: Vec<_> = std::fs::read_dir(d.path().join("out")).unwrap().map(|e| e.unwrap().file_name()).collect();
    first.sort();
    assert_eq!(first.len(), 3);
    assert_eq!(code(&run(d.path(), &args)), 0);
    assert_eq!(std::fs::read_dir(d.path().join("out")).unwrap().count(), 3);

    let unstable = run(d.path(), &["sweep", "--polytope", "sq.json", "--w", "edge.json", "--eps", "0"]);
    assert_eq!(code(&unstable), 2);
    let forced = run(d.path(), &["sweep", "--polytope", "sq.json", "--w", "edge.json", "--eps", "0", "--force"]);
    assert_eq!(code(&forced), 10);
}
