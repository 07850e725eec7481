use memlab::harness::{load_config, render_csv, run_experiment, write_table, CSV_HEADER};

#[test]
fn config_file_drives_a_reproducible_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.ini");
    std::fs::write(
        &cfg_path,
        "[experiment]\nn = 500\nreplications = 6\nseed = 5\ntransforms = id; pow:2; sin\noutput = out.csv\n\n\
         [model farima(0,d,0)]\nd = 0.3, -0.2\ninnovation = t:10\n",
    )
    .unwrap();
    let cfg = load_config(&cfg_path).unwrap();
    assert_eq!(cfg.output.as_deref(), Some(dir.path().join("out.csv").as_path()));
    let rows = run_experiment(&cfg).unwrap();
    assert_eq!(rows.len(), 6);
    write_table(cfg.output.as_ref().unwrap(), &rows).unwrap();
    let first = std::fs::read_to_string(cfg.output.as_ref().unwrap()).unwrap();
    assert!(first.starts_with(CSV_HEADER));
    assert_eq!(first, render_csv(&run_experiment(&load_config(&cfg_path).unwrap()).unwrap()));
    let theory: Vec<String> = rows.iter().map(|r| r.theory_text()).collect();
    assert_eq!(theory, ["0.3", "0.1", "0.3", "-0.2", "0", ""]);
}
