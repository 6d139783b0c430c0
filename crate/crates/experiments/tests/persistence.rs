use dualq_core::{BlochVector, FieldSpec, OptimizationConfig};
use dualq_experiments::*;

fn setup() -> SweepSetup {
    SweepSetup {
        rho1: BlochVector::new(0.249, 0.183, 0.494),
        rho2: BlochVector::new(-0.044, -0.640, 0.508),
        p1: 0.5,
        h0: FieldSpec::default(),
        kt: 1.0,
    }
}

#[test]
fn sweep_round_trips_and_replays() {
    let cfg = OptimizationConfig { n_steps: 5, max_evals: 5_000, ..Default::default() };
    let r = gamma_sweep(&setup(), &[0.0, 0.5, 0.9, 1.0], &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = Manifest::new("gamma", cfg.seed, serde_json::to_value(cfg).unwrap());
    let mpath = save_sweep(&r, dir.path(), "gamma", manifest).unwrap();

    let back = load_sweep(&dir.path().join("gamma.json")).unwrap();
    assert_eq!(back, r);
    assert!(replay_error(&back).unwrap() < 1e-9);

    let m: Manifest = serde_json::from_str(&std::fs::read_to_string(mpath).unwrap()).unwrap();
    assert_eq!(m.files, vec!["gamma.csv", "gamma.json"]);
    assert_eq!(m.config["n_steps"], 5);

    let mut rdr = csv::Reader::from_path(dir.path().join("gamma.csv")).unwrap();
    let header = rdr.headers().unwrap().clone();
    assert_eq!(header.iter().collect::<Vec<_>>(), persist::sweep_header(&r));
    let rows: Vec<csv::StringRecord> = rdr.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for (row, p) in rows.iter().zip(&r.points) {
        assert_eq!(row[col("gamma")].parse::<f64>().unwrap(), p.coords[0]);
        if let Some(w) = p.optimized_work {
            assert_eq!(row[col("optimized_work")].parse::<f64>().unwrap(), w);
        }
        assert_eq!(&row[col("feasibility")], p.feasibility.as_str());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = OptimizationConfig { n_steps: 3, max_evals: 3_000, ..Default::default() };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let r = gamma_sweep(&setup(), &[0.3, 0.95], &cfg).unwrap();
        save_sweep(&r, dir.path(), "g", Manifest::new("gamma", 0, serde_json::Value::Null)).unwrap();
    }
    for f in ["g.csv", "g.json", "g.manifest.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn census_result_serializes() {
    let cfg = CensusConfig { n_samples: 300, work_samples: Some(5), optimize_n: 3, max_evals: 2_000, ..Default::default() };
    let r = feasibility_census(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_json(&r, dir.path(), "census", Manifest::new("census", cfg.seed, serde_json::to_value(cfg).unwrap())).unwrap();
    let back: CensusResult = serde_json::from_str(&std::fs::read_to_string(dir.path().join("census.json")).unwrap()).unwrap();
    assert_eq!(back, r);
}
