//! Config parsing, sweep execution and table output.

use polariton_core::sweep::{self, emit, presets, Axis, Format, RunOptions, SweepConfig};
use polariton_core::{Error, PolaritonSpec};

fn tiny_sweep() -> SweepConfig {
    let base = PolaritonSpec { m_o: 4, t_final: 400.0, ..PolaritonSpec::default() };
    SweepConfig::new(base, Axis::V, vec![1.5, 2.0, 2.5]).labelled("tiny")
}

#[test]
fn config_overrides_apply_to_every_preset_series() {
    let plan = sweep::parse_config("preset = fig1a\nA_X = 0.05\nvalues = linspace(1.5, 2.5, 5)\n").unwrap();
    assert_eq!(plan.series.len(), 3);
    for s in &plan.series {
        assert_eq!(s.base.a_x, 0.05);
        assert_eq!(s.values.len(), 5);
        assert_eq!(s.values[4], 2.5);
    }
}

#[test]
fn config_units() {
    let plan = sweep::parse_config("axis = chi\nvalues = 0, 1e-4\nhorizon_ps = 8.27\nT_env_K = 77\n").unwrap();
    let s = &plan.series[0];
    assert_eq!(s.axis, Axis::Chi);
    assert!((s.base.t_final - 12_564.34).abs() < 0.01);
    assert_eq!(s.base.t_env, 77.0);
}

#[test]
fn config_errors_and_exit_codes() {
    let dup = sweep::parse_config("V = 1\n\nV = 2\n").unwrap_err();
    assert!(matches!(dup, Error::Parse { line: 3, .. }), "{dup}");
    assert_eq!(dup.exit_code(), 2);

    let syntax = sweep::parse_config("values = 1, 2\nno equals sign\n").unwrap_err();
    assert!(matches!(syntax, Error::Parse { line: 2, .. }), "{syntax}");

    let unknown = sweep::parse_config("Gamma = 0.1\nvalues = 1\n").unwrap_err();
    assert!(matches!(unknown, Error::Validation { .. }), "{unknown}");
    assert_eq!(unknown.exit_code(), 3);

    let bad_axis = sweep::parse_config("axis = temperature\nvalues = 1\n").unwrap_err();
    assert_eq!(bad_axis.exit_code(), 3);

    let negative = sweep::parse_config("Gamma_X = -0.1\nvalues = 1\n").unwrap_err();
    assert_eq!(negative.exit_code(), 3);

    let preset = sweep::parse_config("preset = fig99\n").unwrap_err();
    assert!(matches!(preset, Error::UnknownPreset(_)));
    assert_eq!(preset.exit_code(), 3);

    let missing = sweep::load_config("/nonexistent/run.cfg").unwrap_err();
    assert_eq!(missing.exit_code(), 4);
}

#[test]
fn every_preset_is_valid() {
    for name in presets::PRESET_NAMES {
        presets::preset(name).unwrap().validate().unwrap();
    }
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let cfg = tiny_sweep();
    let one = sweep::run_sweep(&cfg, RunOptions { workers: 1, oracle: false }).unwrap();
    let two = sweep::run_sweep(&cfg, RunOptions { workers: 2, oracle: false }).unwrap();
    assert_eq!(one.failures(), 0);
    assert_eq!(emit::to_csv(&one), emit::to_csv(&two));
    let values: Vec<f64> = one.rows.iter().map(|r| r.axis_value).collect();
    assert_eq!(values, cfg.values);
}

#[test]
fn csv_and_json_shapes() {
    let mut cfg = tiny_sweep();
    cfg.outputs = vec!["E_total".into(), "Qdot_X".into()];
    let table = sweep::run_sweep(&cfg, RunOptions { workers: 1, oracle: false }).unwrap();

    let csv = emit::to_csv(&table);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], emit::CSV_COLUMNS.join(","));
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), emit::CSV_COLUMNS.len());
    }

    let json: serde_json::Value = serde_json::from_str(&emit::to_json(&table)).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let row = rows[1].as_object().unwrap();
    assert!(row.contains_key("E_total") && row.contains_key("Qdot_X_eV_per_fs"));
    assert!(!row.contains_key("E_TLS"));
    // round trip keeps every digit
    let e = row["E_total"].as_f64().unwrap();
    assert_eq!(e, table.rows[1].record.as_ref().unwrap().e_total);
}

#[test]
fn oracle_columns_are_written() {
    let mut cfg = tiny_sweep();
    cfg.values = vec![2.0];
    let table = sweep::run_sweep(&cfg, RunOptions { workers: 1, oracle: true }).unwrap();
    let csv = emit::to_csv(&table);
    assert!(csv.lines().next().unwrap().ends_with("E_total_direct,rel_diff_direct"));
    let o = table.rows[0].oracle.unwrap();
    assert!(o.rel_diff < 0.05, "{o:?}");
}

#[test]
fn plan_results_and_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = presets::preset("fig4").unwrap();
    for s in &mut plan.series {
        s.base.m_o = 4;
        s.base.t_final = 300.0;
        s.values = vec![2.0];
    }
    let tables = sweep::run_plan(&plan, RunOptions { workers: 1, oracle: false }).unwrap();
    let out = dir.path().join("fig4.csv");
    let written = sweep::write_plan_results(&plan, &tables, Format::Csv, &out).unwrap();
    assert_eq!(written, vec![dir.path().join("fig4_exciton.csv"), dir.path().join("fig4_phonon.csv")]);
    for p in &written {
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(emit::meta_path(p)).unwrap()).unwrap();
        assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
        assert_eq!(meta["preset"], "fig4");
    }
    // identical configs hash identically, different ones do not
    assert_eq!(emit::config_hash(&plan.series[0]), emit::config_hash(&plan.series[0].clone()));
    assert_ne!(emit::config_hash(&plan.series[0]), emit::config_hash(&plan.series[1]));
}
