use abrsim::harness::{emit_report, parse_matrix, run_experiment, run_sweep, Scenario, ScenarioConfig, REPORT_HEADER};
use abrsim::sim::SimTime;

fn short(seed: u64) -> ScenarioConfig {
    ScenarioConfig::new(Scenario::Wan, 512, 5.0, 5.0, seed).with_duration(SimTime::from_millis(200))
}

#[test]
fn append_mode_writes_header_once() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let a = run_experiment(&short(4)).unwrap();
    let b = run_experiment(&short(4)).unwrap();
    emit_report([&a], &path).unwrap();
    emit_report([&b], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], REPORT_HEADER.join(","));
    // same seed, same row
    assert_eq!(lines[1], lines[2]);
    assert!(lines[1].starts_with("wan,512,5,5,0.8,4,0.2,"));
}

#[test]
fn unwritable_destination_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&short(1)).unwrap();
    assert!(emit_report([&r], &dir.path().join("missing/r.csv")).is_err());
}

#[test]
fn queue_in_fb_delays_matches_definition() {
    let r = run_experiment(&short(2)).unwrap();
    assert!((r.queue_in_fb_delays - r.max_queue_cells as f64 / 3670.0).abs() < 1e-12);
}

#[test]
fn sweep_preserves_grid_order() {
    let m = parse_matrix("scenario = wan\nmss = 512, 9140\nvideo = 5:5\nseed = 9\nduration = 0.15\n").unwrap();
    let reports = run_sweep(&m).unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0].config.mss, 512);
    assert_eq!(reports[1].config.mss, 9140);
    assert_eq!(reports[0].vbr_mean_mbps, reports[1].vbr_mean_mbps);
}
