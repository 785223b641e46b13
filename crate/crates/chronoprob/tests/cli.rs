use chronoprob::cli::run;
use chronoprob::fixtures;
use serde_json::Value;

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("chronoprob").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn shipped_files_match_fixtures() {
    for fx in fixtures::all() {
        assert_eq!(std::fs::read_to_string(fixture_path(fx.name)).unwrap(), fx.source);
    }
}

#[test]
fn prob_prints_exact_and_decimal() {
    let coin = fixture_path("coin");
    let (code, out, _) = cli(&["prob", &coin, "--time", "t0", "--world", "fair-tails", "--formula", "OCC(t1, t2, heads)"]);
    assert_eq!((code, out.trim()), (0, "3/5 (0.6)"));
    let (code, out, _) =
        cli(&["--json", "prob", &coin, "--time", "t1", "--world", "biased-tails", "--formula", "OCC(t1, t2, heads)"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(code, 0);
    assert_eq!(v["probability"]["exact"], "7/10");
    assert_eq!(v["probability"]["decimal"], "0.7");
}

#[test]
fn eval_and_expect() {
    let carry = fixture_path("carry");
    let co = "OCC(t1, t2, carry-b1) & OCC(t1, t2, carry-b2)";
    assert_eq!(cli(&["eval", &carry, "--world", "w6", "--formula", co]).1.trim(), "true");
    let poss = format!("POSS[t1]({co})");
    assert_eq!(cli(&["eval", &carry, "--world", "w3", "--formula", &poss]).1.trim(), "false");
    let (code, out, _) =
        cli(&["--json", "expect", &carry, "--time", "now", "--future", "t1", "--world", "w2", "--formula", co]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(code, 0);
    assert_eq!(v["expected"]["exact"], "1/4");
    assert_eq!(v["equal"], true);
}

#[test]
fn cause_report() {
    let car = fixture_path("car");
    let args = |w| ["--json", "cause", &car, "--world", w, "--cause", "turn-key@ts,ts'", "--effect", "start@ts,ts'"];
    let (code, out, _) = cli(&args("wks"));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(code, 0);
    assert_eq!((v["prima_facie"].clone(), v["actual"].clone()), (Value::Bool(true), Value::Bool(true)));
    let v: Value = serde_json::from_str(&cli(&args("wnn")).1).unwrap();
    assert_eq!((v["prima_facie"].clone(), v["actual"].clone()), (Value::Bool(true), Value::Bool(false)));
    let v: Value = serde_json::from_str(&cli(&args("cks")).1).unwrap();
    assert_eq!(v["cond3"], false);
}

#[test]
fn usage_and_parse_errors_exit_2() {
    let coin = fixture_path("coin");
    let (code, _, err) = cli(&["prob", &coin, "--time", "t0", "--world", "fair-tails", "--formula", "P[t0](OCC(t1,t2,heads)"]);
    assert_eq!(code, 2);
    assert!(err.contains("formula:1:"), "{err}");
    assert_eq!(cli(&["eval", &coin, "--world", "nowhere", "--formula", "t0 < t1"]).0, 2);
    assert_eq!(cli(&["cause", &coin, "--world", "fair-tails", "--cause", "heads", "--effect", "heads@t1,t2"]).0, 2);
    assert_eq!(cli(&["schema", "nonsense", "--random"]).0, 2);
    assert_eq!(cli(&["schema", "miller"]).0, 2);
    assert_eq!(cli(&["example", "boat"]).0, 2);
    assert_eq!(cli(&["check", "/no/such/file.json"]).0, 2);
    assert_eq!(cli(&[]).0, 2);
    assert_eq!(cli(&["--help"]).0, 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"times\": {\"t0\": 0},\n \"prob\": {}}").unwrap();
    let (code, _, err) = cli(&["check", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.json:2:") && err.contains("worlds"), "{err}");
}

#[test]
fn violations_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let mutant = fixtures::mutants().into_iter().next().unwrap();
    std::fs::write(&path, chronoprob::model_file::write_model(&mutant.description)).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(cli(&["check", p]).0, 1);
    let (code, out, _) = cli(&["prob", p, "--time", "t0", "--world", "fair-tails", "--formula", "t0 < t1"]);
    assert_eq!(code, 1);
    assert!(out.contains("C1"));
    let (code, _, _) = cli(&["check", "--strict", &fixture_path("carry")]);
    assert_eq!(code, 1);
}

#[test]
fn schema_on_model_and_random() {
    let (code, out, _) = cli(&["--json", "schema", "all", "--model", &fixture_path("coin")]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!((code, v["valid"].clone()), (0, Value::Bool(true)));
    assert_eq!(v["results"].as_array().unwrap().len(), 5);
    let (code, out, _) = cli(&["schema", "inevitability-persists", "--random", "--trials", "5", "--seed", "7"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn sat_finds_or_gives_up() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("found.json");
    let (code, _, _) = cli(&["sat", "--formula", "P[a](OCC(a, b, e)) = 1/2 & a < b", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(cli(&["check", path.to_str().unwrap()]).0, 0);
    let (code, out, _) = cli(&["--json", "sat", "--formula", "t0 < t1 & t1 < t0", "--timeout", "0.2"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!((code, v["found"].clone()), (1, Value::Bool(false)));
}

#[test]
fn examples_exit_0_with_json() {
    for name in fixtures::NAMES {
        let (code, out, _) = cli(&["--json", "example", name]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!((code, v["ok"].clone()), (0, Value::Bool(true)), "{name}");
    }
}
