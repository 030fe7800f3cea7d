mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use common::*;
use hseg::mask_io::{load_image, load_manifest, ExplanationDocument};
use serde_json::Value;

fn fixture(name: &str) -> String {
    fixtures().join(name).display().to_string()
}

fn path(p: &Path) -> String {
    p.display().to_string()
}

/// θ 100 keeps every toy segment; σ 1 keeps the kernel weights usable on
/// a handful of features.
fn write_config(dir: &Path, extra: &str) -> String {
    let p = dir.join("run.json");
    fs::write(
        &p,
        format!(r#"{{"theta": 100, "sigma": 1.0, "seed": 7, "depth": 1{extra}}}"#),
    )
    .unwrap();
    path(&p)
}

#[test]
fn committed_fixtures_match_generator() {
    let img_path = fixtures().join("toy.png");
    let masks = fixtures().join("toy_masks.json");
    let flat = fixtures().join("toy_masks_flat.json");
    if std::env::var_os("HSEG_UPDATE_FIXTURES").is_some() {
        hseg::mask_io::save_png(&toy_image(), &img_path).unwrap();
        hseg::mask_io::save_manifest(&toy_manifest(true), &masks).unwrap();
        hseg::mask_io::save_manifest(&toy_manifest(false), &flat).unwrap();
    }
    assert_eq!(load_image(&img_path).unwrap(), toy_image());
    assert_eq!(load_manifest(&masks).unwrap(), toy_manifest(true));
    assert_eq!(load_manifest(&flat).unwrap(), toy_manifest(false));
}

fn assert_close_json(actual: &Value, expected: &Value, at: &str) {
    match (actual, expected) {
        (Value::Number(a), Value::Number(e)) if a.is_f64() || e.is_f64() => {
            let (a, e) = (a.as_f64().unwrap(), e.as_f64().unwrap());
            assert!((a - e).abs() <= 1e-9 * e.abs().max(1.0), "{at}: {a} vs {e}");
        }
        (Value::Array(a), Value::Array(e)) => {
            assert_eq!(a.len(), e.len(), "{at}: length");
            for (i, (x, y)) in a.iter().zip(e).enumerate() {
                assert_close_json(x, y, &format!("{at}[{i}]"));
            }
        }
        (Value::Object(a), Value::Object(e)) => {
            let ka: Vec<_> = a.keys().collect();
            let ke: Vec<_> = e.keys().collect();
            assert_eq!(ka, ke, "{at}: keys");
            for (k, v) in a {
                assert_close_json(v, &e[k], &format!("{at}.{k}"));
            }
        }
        _ => assert_eq!(actual, expected, "{at}"),
    }
}

#[test]
fn explain_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), "");
    let endpoint = region_endpoint();
    // Run from the crate root so the image path echoed in the output is stable.
    let res = std::process::Command::new(bin())
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .args(["explain", "--config", &config, "--depth", "2"])
        .args(["--image", "tests/fixtures/toy.png", "--masks", "tests/fixtures/toy_masks.json"])
        .args(["--endpoint", &endpoint, "--out", &path(&out)])
        .output()
        .unwrap();
    assert_eq!(code(&res), 0, "{}", stderr(&res));

    let text = fs::read_to_string(out.join("explanation.json")).unwrap();
    let golden_path = golden().join("toy_explanation.json");
    if std::env::var_os("HSEG_UPDATE_GOLDEN").is_some() {
        fs::write(&golden_path, &text).unwrap();
    }
    let actual: Value = serde_json::from_str(&text).unwrap();
    let expected: Value = serde_json::from_str(&fs::read_to_string(&golden_path).unwrap()).unwrap();
    assert_close_json(&actual, &expected, "$");

    // Independent of the golden file: the flag beat the file's depth 1,
    // depth 1 picks the keyed region and depth 2 its brighter half.
    let doc = ExplanationDocument::from_json(&text).unwrap();
    assert_eq!(doc.depths.len(), 2);
    assert_eq!(doc.depths[0].selected, vec![1]);
    assert_eq!(doc.depths[1].selected, vec![10]);
    assert_eq!(doc.target_class, 1);
    assert_eq!(doc.config["sigma"], 1.0);
    assert_eq!(doc.config["depth"], 2);

    let png = load_image(out.join("attribution.png")).unwrap();
    assert_eq!((png.width(), png.height(), png.channels()), (TOY, TOY, 3));
}

#[test]
fn explain_is_reproducible_and_render_redraws_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let endpoint = region_endpoint();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let res = hseg(&[
            "explain", "--config", &config, "--image", &fixture("toy.png"),
            "--masks", &fixture("toy_masks.json"), "--endpoint", &endpoint,
            "--out", &path(&out),
        ]);
        assert_eq!(code(&res), 0, "{}", stderr(&res));
        out
    };
    let a = run("a");
    let b = run("b");
    for f in ["explanation.json", "attribution.png"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }

    let redraw = dir.path().join("redraw");
    let res = hseg(&[
        "render", "--explanation", &path(&a.join("explanation.json")),
        "--image", &fixture("toy.png"), "--masks", &fixture("toy_masks.json"),
        "--out", &path(&redraw),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert_eq!(
        load_image(redraw.join("attribution.png")).unwrap(),
        load_image(a.join("attribution.png")).unwrap()
    );
}

#[test]
fn explain_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), "");
    let endpoint = region_endpoint();
    let base = |masks: &str, endpoint: &str| {
        vec![
            "explain".to_string(), "--config".into(), config.clone(),
            "--image".into(), fixture("toy.png"), "--masks".into(), masks.to_string(),
            "--endpoint".into(), endpoint.to_string(), "--out".into(), path(&out),
        ]
    };
    let run = |args: Vec<String>| hseg(&args.iter().map(String::as_str).collect::<Vec<_>>());

    let missing = path(&dir.path().join("nope.json"));
    let res = run(base(&missing, &endpoint));
    assert_eq!(code(&res), 2, "{}", stderr(&res));

    let mut args = base(&fixture("toy_masks.json"), "http://127.0.0.1:9");
    args.extend(["--retries".into(), "0".into(), "--timeout-secs".into(), "2".into()]);
    let res = run(args);
    assert_eq!(code(&res), 4, "{}", stderr(&res));

    // every segment is below θ
    let mut args = base(&fixture("toy_masks.json"), &endpoint);
    args.extend(["--theta".into(), "100000".into()]);
    let res = run(args);
    assert_eq!(code(&res), 3, "{}", stderr(&res));

    // invalid hyperparameter: rejected before anything is written
    let mut args = base(&fixture("toy_masks.json"), &endpoint);
    args.extend(["--sigma".into(), "-1".into()]);
    let res = run(args);
    assert_eq!(code(&res), 2, "{}", stderr(&res));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"theta": 100, "sigmaa": 1.0}"#).unwrap();
    let mut args = base(&fixture("toy_masks.json"), &endpoint);
    args[2] = path(&bad);
    let res = run(args);
    assert_eq!(code(&res), 2, "{}", stderr(&res));
    assert!(stderr(&res).contains("sigmaa"));

    let res = hseg(&[
        "explain", "--image", &fixture("toy.png"), "--masks", &fixture("toy_masks.json"),
        "--out", &path(&out), "--theta", "100",
    ]);
    assert_eq!(code(&res), 2, "no endpoint: {}", stderr(&res));

    assert!(!out.exists(), "failed runs must not create the output directory");
}

#[test]
fn endpoint_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = write_config(dir.path(), "");
    let res = std::process::Command::new(bin())
        .args(["explain", "--config", &config, "--image", &fixture("toy.png")])
        .args(["--masks", &fixture("toy_masks.json"), "--out", &path(&out)])
        .env("HSEG_ENDPOINT", region_endpoint())
        .output()
        .unwrap();
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert!(out.join("explanation.json").exists());
}

fn write_dataset(dir: &Path) -> String {
    let list = dir.join("data.txt");
    fs::write(
        &list,
        format!(
            "# image masks label\n{img} {masks} 1\n\n{img} {flat} 1\n{img} {masks} 0\n",
            img = fixture("toy.png"),
            masks = fixture("toy_masks.json"),
            flat = fixture("toy_masks_flat.json"),
        ),
    )
    .unwrap();
    path(&list)
}

fn evaluate(dir: &Path, list: &str, out: &Path, jobs: &str) -> std::process::Output {
    let config = write_config(dir, r#", "stability_runs": 3"#);
    let endpoint = region_endpoint();
    let second = format!("exec:{} mock-model --kind constant --probs 0.9,0.1", bin());
    let random = format!("exec:{} mock-model --kind random --seed 3", bin());
    hseg(&[
        "evaluate", "--config", &config, "--dataset", list, "--endpoint", &endpoint,
        "--endpoint2", &second, "--random-endpoint", &random, "--out", &path(out),
        "--jobs", jobs,
    ])
}

type Rows = Vec<BTreeMap<String, String>>;

fn read_csv(path: &Path) -> Rows {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()
        })
        .collect()
}

#[test]
fn evaluate_writes_consistent_reports() {
    let dir = tempfile::tempdir().unwrap();
    let list = write_dataset(dir.path());
    let out = dir.path().join("eval");
    let res = evaluate(dir.path(), &list, &out, "1");
    assert_eq!(code(&res), 0, "{}", stderr(&res));

    let rows = read_csv(&out.join("metrics.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r["label"].as_str()).collect::<Vec<_>>(), ["1", "1", "0"]);
    assert!(rows.iter().all(|r| r["predicted"] == "1"));
    // At depth 1 the region is selected: keeping it keeps class 1, and
    // flattening it drops the brightness score to 0.
    assert!(rows.iter().all(|r| r["preservation"] == "true" && r["deletion"] == "true"));
    // no randomized-weights model was given
    assert!(rows.iter().all(|r| r["random_model_differs"].is_empty()));

    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["instances"], 3);
    assert_eq!(summary["failures"], Value::Array(vec![]));
    for (name, pct) in summary["percentages"].as_object().unwrap() {
        let ran: Vec<&str> = rows.iter().map(|r| r[name].as_str()).filter(|v| !v.is_empty()).collect();
        let expected = if ran.is_empty() {
            Value::Null
        } else {
            let t = ran.iter().filter(|v| **v == "true").count();
            serde_json::json!(100.0 * t as f64 / ran.len() as f64)
        };
        assert_eq!(pct, &expected, "{name}");
    }
    for (name, mean) in summary["means"].as_object().unwrap() {
        let vals: Vec<f64> = rows.iter().filter(|r| !r[name].is_empty()).map(|r| r[name].parse().unwrap()).collect();
        assert_eq!(vals.len(), 3, "{name}");
        let m = vals.iter().sum::<f64>() / 3.0;
        assert!((mean.as_f64().unwrap() - m).abs() < 1e-12, "{name}");
    }
    assert_eq!(summary["percentages"]["preservation"], 100.0);
    assert_eq!(summary["percentages"]["deletion"], 100.0);
    assert_eq!(summary["percentages"]["random_model_differs"], Value::Null);
}

#[test]
fn evaluate_is_deterministic_across_reruns_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let list = write_dataset(dir.path());
    let outs: Vec<_> = ["1", "1", "3"]
        .iter()
        .enumerate()
        .map(|(i, jobs)| {
            let out = dir.path().join(format!("eval{i}"));
            let res = evaluate(dir.path(), &list, &out, jobs);
            assert_eq!(code(&res), 0, "{}", stderr(&res));
            fs::read(out.join("metrics.csv")).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);
}

#[test]
fn evaluate_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "# nothing here\n\n").unwrap();
    let out = dir.path().join("eval");
    let res = evaluate(dir.path(), &path(&empty), &out, "1");
    assert_eq!(code(&res), 2, "{}", stderr(&res));

    // seed is mandatory
    let list = write_dataset(dir.path());
    let endpoint = region_endpoint();
    let res = hseg(&[
        "evaluate", "--dataset", &list, "--endpoint", &endpoint, "--out", &path(&out), "--theta", "100",
    ]);
    assert_eq!(code(&res), 2, "{}", stderr(&res));
    assert!(stderr(&res).contains("seed"));

    let res = evaluate(dir.path(), &list, &out, "0");
    assert_eq!(code(&res), 2, "{}", stderr(&res));
    assert!(!out.exists());
}

#[test]
fn sweep_theta_counts_shrink_with_theta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let res = hseg(&[
        "sweep-theta", "--masks", &fixture("toy_masks.json"), "--image", &fixture("toy.png"),
        "--values", "100,300,500,1000,2000", "--out", &path(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let rows: Vec<Value> = serde_json::from_str(&fs::read_to_string(out.join("theta_sweep.json")).unwrap()).unwrap();
    let theta: Vec<u64> = rows.iter().map(|r| r["theta"].as_u64().unwrap()).collect();
    assert_eq!(theta, [100, 300, 500, 1000, 2000]);
    let kept: Vec<u64> = rows.iter().map(|r| r["after_filter"].as_u64().unwrap()).collect();
    assert!(kept.windows(2).all(|w| w[0] >= w[1]), "{kept:?}");

    // Sizes: region 576, halves 288, blocks 512, 2048, 192, 768.
    let count = |theta: u64| [576u64, 288, 288, 512, 2048, 192, 768].iter().filter(|&&s| s >= theta).count() as u64;
    assert_eq!(kept, theta.iter().map(|&t| count(t)).collect::<Vec<_>>());
    // θ = 2000 keeps only block 3, so all other pixels are uncovered.
    let last = &rows[4];
    assert_eq!(last["top_level"], 1);
    assert!((last["empty_fraction"].as_f64().unwrap() - 2048.0 / 4096.0).abs() < 1e-12);
    assert_eq!(rows[0]["empty_fraction"], 0.0);

    let csv_rows = read_csv(&out.join("theta_sweep.csv"));
    assert_eq!(csv_rows.len(), 5);
    assert_eq!(csv_rows[2]["theta"], "500");

    let res = hseg(&[
        "sweep-theta", "--masks", &fixture("toy_masks.json"), "--values", "5000", "--out", &path(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let rows: Vec<Value> = serde_json::from_str(&fs::read_to_string(out.join("theta_sweep.json")).unwrap()).unwrap();
    assert_eq!(rows[0]["after_filter"], 0);
    assert_eq!(rows[0]["empty_fraction"], 1.0);
}

#[test]
fn sweep_theta_rejects_empty_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"values": []}"#).unwrap();
    let res = hseg(&[
        "sweep-theta", "--config", &path(&cfg), "--masks", &fixture("toy_masks.json"), "--out", &path(&out),
    ]);
    assert_eq!(code(&res), 2, "{}", stderr(&res));
    let res = hseg(&["sweep-theta", "--masks", &fixture("toy_masks.json"), "--out", &path(&out)]);
    assert_eq!(code(&res), 2, "{}", stderr(&res));
    assert!(!out.exists());
}
