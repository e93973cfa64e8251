use levy_ito::harness::{self, ExperimentConfig, Format};
use levy_ito::{Error, Execution};

const CONFIG: &str = r#"{
    "measure": {"atoms": [[1.0, 1.0], [-1.0, 0.5]]},
    "samples": 5000,
    "seed": 99,
    "processes": {"step": {"breakpoints": [0.0, 1.0], "coefficients": [{"clamp_noise": {"set": [[-1.0, 0.0]], "bound": 2.0}}]}},
    "checks": [
        {"kind": "moment", "phi": [[0.0, 1.0, 1.0]], "p": 4},
        {"name": "iso", "kind": "isometry", "process": "step", "k": 1.0},
        {"kind": "integral_bound", "process": "step", "p": 4},
        {"kind": "linear_bound", "phi": [[0.0, 2.0, 0.5]], "p": 6}
    ]
}"#;

fn report() -> harness::ExperimentReport {
    harness::run(&ExperimentConfig::from_json(CONFIG).unwrap(), None, Execution::Parallel).unwrap()
}

#[test]
fn json_round_trip_is_exact() {
    let r = report();
    let mut buf = Vec::new();
    harness::emit(&r, Format::Json, &mut buf).unwrap();
    let back = harness::parse(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.checks[1].name, "iso");
    assert_eq!(back.checks[0].name, "moment#0");
}

#[test]
fn csv_preserves_z_scores() {
    let r = report();
    let mut buf = Vec::new();
    harness::emit(&r, Format::Csv, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let headers = reader.headers().unwrap().clone();
    let z_col = headers.iter().position(|h| h == "z").unwrap();
    for (row, check) in reader.records().zip(&r.checks) {
        let field = row.unwrap()[z_col].to_string();
        match check.z {
            Some(z) => assert_eq!(field.parse::<f64>().unwrap().to_bits(), z.to_bits()),
            None => assert!(field.is_empty()),
        }
    }
}

#[test]
fn global_pass_is_a_conjunction() {
    let r = report();
    assert_eq!(r.pass, r.checks.iter().all(|c| c.pass));
    assert_eq!(r.environment.seed, 99);
}

#[test]
fn sample_dump_covers_monte_carlo_checks() {
    let config = ExperimentConfig::from_json(CONFIG).unwrap();
    let (_, dumps) = harness::run_with_samples(&config, None, Execution::Parallel, true).unwrap();
    let names: Vec<&str> = dumps.iter().map(|d| d.check.as_str()).collect();
    assert_eq!(names, ["moment#0", "iso", "integral_bound#2"]);
    assert!(dumps.iter().all(|d| d.rows.len() == 5000));
    let mut buf = Vec::new();
    harness::emit_samples(&dumps, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 3 * 5000);
}

#[test]
fn config_errors_are_typed() {
    let unknown = CONFIG.replace("\"linear_bound\"", "\"lemma99\"");
    assert_eq!(ExperimentConfig::from_json(&unknown).unwrap_err(), Error::UnknownCheck("lemma99".into()));
    let few = CONFIG.replace("\"samples\": 5000", "\"samples\": 10");
    assert!(matches!(ExperimentConfig::from_json(&few), Err(Error::TooFewSamples { .. })));
    let dangling = CONFIG.replace("\"process\": \"step\", \"k\"", "\"process\": \"nope\", \"k\"");
    assert!(matches!(ExperimentConfig::from_json(&dangling), Err(Error::UnknownCatalogEntry(..))));
}
