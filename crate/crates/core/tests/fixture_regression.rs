use std::path::PathBuf;

use snn_landing::env::{run_landing, EnvConfig};
use snn_landing::{BackendKind, ControllerGenome};

fn fixture_genome() -> ControllerGenome {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/evolved_genome.json");
    ControllerGenome::load(path).unwrap()
}

#[test]
fn evolved_genome_decelerates_before_touchdown() {
    let genome = fixture_genome();
    for kind in BackendKind::ALL {
        let trace = run_landing(&genome, kind, &EnvConfig::default(), 4.0).unwrap();
        assert!(trace.landed(), "{kind} timed out");
        let at_one_metre = trace.rows.iter().find(|r| r.h <= 1.0).unwrap().v;
        let touchdown = trace.touchdown_velocity().unwrap();
        assert!(
            touchdown.abs() <= 0.3 * at_one_metre.abs(),
            "{kind}: touchdown {touchdown} vs {at_one_metre} at 1 m"
        );
    }
}

#[test]
fn fixture_round_trips_through_json() {
    let genome = fixture_genome();
    assert!(genome.validate().is_ok());
    assert_eq!(ControllerGenome::from_json(&genome.to_json()).unwrap(), genome);
}
