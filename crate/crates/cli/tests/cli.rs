use std::fs;
use std::path::Path;

use proptest::prelude::*;
use switchdiff::engine::read_binary;
use switchdiff_cli::config::{FunctionSpec, ModelSection, OutputSection, SimSection, TaskSection};
use switchdiff_cli::{emit_plot_data, run, run_config, CliError, Overrides, ScenarioConfig};

fn write_scenario(dir: &Path, body: &str) -> std::path::PathBuf {
    let out = dir.join("out");
    let text = format!("{body}\n[output]\ndir = {:?}\nplot_csv = \"plot.csv\"\n", out.display().to_string());
    let path = dir.join("scenario.toml");
    fs::write(&path, text).unwrap();
    path
}

fn read_lines(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn simulate_constant_model_gives_constant_rows() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[model]
name = "switching_ou"
params = { beta = [0.0], s = [0.0], rates = [[0.0]] }
[sim]
horizon = 0.5
dt = 0.1
[task]
x = [1.5]
"#;
    let path = write_scenario(dir.path(), body);
    let text = fs::read_to_string(&path).unwrap().replace("plot_csv = \"plot.csv\"", "trajectory_csv = \"path.csv\"\ntrajectory_bin = \"path.bin\"");
    fs::write(&path, text).unwrap();
    let out = run("simulate", &path, Overrides::default()).unwrap();
    assert_eq!(out.exit_code, 0);
    let csv = fs::read_to_string(dir.path().join("out/path.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "time,regime,x1,event");
    assert_eq!(rows.len(), 7);
    for r in &rows[1..] {
        let cells: Vec<&str> = r.split(',').collect();
        assert_eq!(&cells[1..3], &["1", "1.5"]);
    }
    let log = read_binary(fs::File::open(dir.path().join("out/path.bin")).unwrap()).unwrap();
    let hex: String = log.config_hash.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(hex, out.config_hash);
    assert_eq!(log.samples.len(), 6);
}

#[test]
fn lemma21_sweep_writes_one_line_per_case() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), "[task]\ncases = 1000\n");
    let out = run("lemma21", &path, Overrides::default()).unwrap();
    assert_eq!(out.exit_code, 0);
    let lines = read_lines(&dir.path().join("out/reports.jsonl"));
    assert_eq!(lines.len(), 1000);
    assert!(lines.iter().all(|l| l["margin"].as_f64().unwrap() >= 0.0 && l["config_hash"] == out.config_hash.as_str()));
    let plot = fs::read_to_string(dir.path().join("out/plot.csv")).unwrap();
    assert!(plot.starts_with("case,lhs,rhs,margin\n"));
}

#[test]
fn feller_on_degenerate_model_shows_the_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[model]
name = "degenerate_regime"
[sim]
horizon = 1.0
dt = 0.01
scheme = "event_driven_exact"
replicas = 4000
[task]
x = [0.0]
radii = [0.1, 0.001]
anchor = "straddle"
f = { kind = "indicator_x1_pos" }
"#;
    let path = write_scenario(dir.path(), body);
    let out = run("feller", &path, Overrides::default()).unwrap();
    assert_eq!(out.exit_code, 0);
    let lines = read_lines(&dir.path().join("out/reports.jsonl"));
    let gap = lines[1]["lhs"].as_f64().unwrap();
    let se = lines[1]["stderr"].as_f64().unwrap();
    assert!((gap - (-1.0f64).exp()).abs() <= 3.0 * se + 0.01);
    assert_eq!(lines[1]["discontinuous"], true);
    let plot = fs::read_to_string(dir.path().join("out/plot.csv")).unwrap();
    assert!(plot.starts_with("radius,gap\n0.1,"));
}

#[test]
fn holding_and_moments_pass_on_birth_death() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[model]\nname = \"birth_death_switch\"\n[sim]\nhorizon = 0.5\ndt = 0.01\nreplicas = 2000\n[task]\nx = [0.5]\n";
    let path = write_scenario(dir.path(), body);
    assert_eq!(run("moments", &path, Overrides::default()).unwrap().exit_code, 0);
    let out = run("holding", &path, Overrides::default()).unwrap();
    assert_eq!(out.exit_code, 0);
    let plot = fs::read_to_string(dir.path().join("out/plot.csv")).unwrap();
    assert!(plot.starts_with("k,K,t,empirical,bound,pass\n"));
}

#[test]
fn chain_marginal_and_truncation_check() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
[model]
name = "switching_ou"
params = { beta = [1.0, 0.5, 2.0], a = [0.0, 0.0, 0.0], s = [1.0, 1.0, 1.0] }
[sim]
horizon = 1.0
dt = 0.01
k = 4
replicas = 5000
[task]
times = [0.5, 1.0]
"#;
    let path = write_scenario(dir.path(), body);
    let out = run("chain-marginal", &path, Overrides::default()).unwrap();
    assert_eq!(out.exit_code, 0, "{}", out.summary);
    assert_eq!(read_lines(&dir.path().join("out/reports.jsonl")).len(), 3 * 2 * 3);
    let out = run("truncation-check", &path, Overrides { replicas: Some(1000), ..Overrides::default() }).unwrap();
    assert_eq!(out.exit_code, 0, "{}", out.summary);
}

#[test]
fn harnack_case_passes() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[model]\nname = \"switching_ou\"\n[sim]\ndt = 0.01\nreplicas = 2000\n[task]\nx = [0.0]\ny = [0.5]\n";
    let path = write_scenario(dir.path(), body);
    assert_eq!(run("harnack", &path, Overrides::default()).unwrap().exit_code, 0);
}

#[test]
fn degenerate_noise_is_an_assumption_failure() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[model]\nname = \"degenerate_regime\"\n[sim]\ndt = 0.01\nreplicas = 100\n[task]\nx = [0.0]\ny = [0.5]\n";
    let path = write_scenario(dir.path(), body);
    let err = run("harnack", &path, Overrides::default()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("ellipticity"), "{err}");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("simulate", "[model]\nname = \"switching_ou\"\nbogus = 1\n"),
        ("simulate", "[model]\nname = \"no_such_model\"\n"),
        ("simulate", "[model]\nname = \"switching_ou\"\nparams = { wrong = 1 }\n"),
        ("simulate", "[model]\nname = \"switching_ou\"\n[task]\nradii = [0.1]\n"),
        ("simulate", "[model]\nname = \"switching_ou\"\n[sim]\ndt = -1.0\n"),
        ("explode", "[model]\nname = \"switching_ou\"\n"),
        ("moments", "[task]\nx = [0.0]\n"),
    ];
    for (sub, body) in cases {
        let path = write_scenario(dir.path(), body);
        let err = run(sub, &path, Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{sub}: {body}: {err}");
    }
    let path = write_scenario(dir.path(), "[task]\ncases = 2\n");
    let err = run("lemma21", &path, Overrides { seed: Some(u64::MAX), ..Overrides::default() }).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn blowup_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[model]\nname = \"switching_ou\"\nparams = { beta = [-2000.0], rates = [[0.0]] }\n[sim]\nhorizon = 1.0\ndt = 0.01\n[task]\nx = [1.0]\n";
    let path = write_scenario(dir.path(), body);
    let text = fs::read_to_string(&path).unwrap().replace("plot_csv = \"plot.csv\"", "");
    fs::write(&path, text).unwrap();
    let err = run("simulate", &path, Overrides::default()).unwrap_err();
    assert!(matches!(err, CliError::Blowup(_)));
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn coefficient_table_feeds_the_linear_model() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("coeffs.csv"), "regime,beta,a,s\n1,1.0,0.0,0.0\n2,0.0,0.0,0.0\n").unwrap();
    let body = "[model]\nname = \"switching_ou\"\ntable = \"coeffs.csv\"\nparams = { rates = [[0.0, 0.0], [0.0, 0.0]] }\n[sim]\nhorizon = 1.0\ndt = 0.5\n[task]\nx = [1.0]\n";
    let path = write_scenario(dir.path(), body);
    let text = fs::read_to_string(&path).unwrap().replace("plot_csv = \"plot.csv\"", "");
    fs::write(&path, text).unwrap();
    run("simulate", &path, Overrides::default()).unwrap();
    let line = &read_lines(&dir.path().join("out/reports.jsonl"))[0];
    // Two Euler steps of dx = -x dt with dt = 0.5.
    assert_eq!(line["final_x"][0].as_f64().unwrap(), 0.25);
}

#[test]
fn reports_do_not_depend_on_thread_count_and_overrides_change_them() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[model]\nname = \"switching_ou\"\n[sim]\nhorizon = 0.5\ndt = 0.01\nreplicas = 3000\n[task]\nx = [0.5]\n";
    let path = write_scenario(dir.path(), body);
    let report = dir.path().join("out/reports.jsonl");
    let run_with = |threads: usize, o: Overrides| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run("moments", &path, o).unwrap());
        fs::read(&report).unwrap()
    };
    let a = run_with(1, Overrides::default());
    let b = run_with(3, Overrides::default());
    assert_eq!(a, b);
    let c = run_with(2, Overrides { seed: Some(5), ..Overrides::default() });
    assert_ne!(a, c);
}

#[test]
fn mixed_families_are_rejected() {
    let recs = vec![serde_json::json!({"checker": "harnack"}), serde_json::json!({"checker": "moments"})];
    assert!(emit_plot_data(&recs).is_err());
    assert!(emit_plot_data(&[]).is_err());
}

#[test]
fn run_config_applies_defaults() {
    let cfg = ScenarioConfig::parse("[task]\ncases = 3\n").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig { output: OutputSection { dir: dir.path().to_path_buf(), ..OutputSection::default() }, ..cfg };
    let out = run_config("lemma21", cfg).unwrap();
    assert_eq!(out.exit_code, 0);
}

fn function_spec() -> impl Strategy<Value = FunctionSpec> {
    prop_oneof![
        (-5.0..5.0f64).prop_map(|value| FunctionSpec::Constant { value }),
        Just(FunctionSpec::IndicatorX1Pos),
        (0.1..3.0f64, prop::collection::vec(-1.0..1.0f64, 1..3), prop::collection::vec(0.1..1.0f64, 1..3))
            .prop_map(|(a, centre, weights)| FunctionSpec::Gaussian { a, centre, weights }),
    ]
}

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    (
        prop::option::of(("[a-z_]{3,12}", prop::option::of(-3.0..3.0f64))),
        (1e-3..5.0f64, 1e-5..1e-1f64, prop::option::of(1usize..50), 0..=i64::MAX as u64, any::<bool>(), 1usize..100_000),
        (prop::option::of(prop::collection::vec(-2.0..2.0f64, 1..4)), prop::option::of(1usize..5), prop::option::of(function_spec())),
        prop::option::of("[a-z]{1,8}\\.csv"),
    )
        .prop_map(|(model, (horizon, dt, k, seed, event, replicas), (x, i, f), plot)| ScenarioConfig {
            model: model.map(|(name, beta)| ModelSection {
                name,
                params: beta.map(|b| [("beta".to_string(), serde_json::json!([b]))].into_iter().collect()).unwrap_or_default(),
                table: None,
            }),
            sim: SimSection {
                horizon,
                dt,
                k,
                seed,
                scheme: if event {
                    switchdiff::engine::SchemeKind::EventDrivenExact
                } else {
                    switchdiff::engine::SchemeKind::FrozenRate
                },
                replicas,
            },
            task: TaskSection { x, i, f, ..TaskSection::default() },
            output: OutputSection { plot_csv: plot, ..OutputSection::default() },
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn config_round_trips_through_text(cfg in scenario()) {
        let text = cfg.render().unwrap();
        let back = ScenarioConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
    }
}
