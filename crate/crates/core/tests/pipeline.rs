//! Dataset -> CSV -> training -> saved model -> mission, end to end.

use felm::data::Dataset;
use felm::io::{load_model, save_model};
use felm::sim::{generate_dataset, run_mission, DatasetConfig, MissionConfig};
use felm::train::{TrainConfig, Trainer};

fn small_data() -> Dataset {
    generate_dataset(&DatasetConfig { wall: 150, corner: 150, ..DatasetConfig::default() }).unwrap()
}

#[test]
fn csv_round_trip_keeps_every_value() {
    let data = small_data();
    let back = Dataset::from_csv(&data.to_csv()).unwrap();
    assert_eq!(back.labels(), data.labels());
    for (a, b) in back.features().iter().zip(data.features()) {
        for (x, y) in a.iter().zip(b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn every_trainer_survives_save_and_load() {
    let data = Dataset::from_csv(&small_data().to_csv()).unwrap();
    let cfg = TrainConfig::default();
    for trainer in Trainer::ALL {
        let model = trainer.fit(&data, &cfg).unwrap().model;
        let loaded = load_model(&save_model(&model, Some(trainer)).unwrap()).unwrap();
        for x in data.features().iter().take(50) {
            assert_eq!(model.score(x).unwrap().to_bits(), loaded.score(x).unwrap().to_bits(), "{trainer:?}");
        }
    }
}

#[test]
fn loaded_model_flies_the_same_mission() {
    let data = small_data();
    let model = Trainer::Fit2Felm.fit(&data, &TrainConfig::default()).unwrap().model;
    let loaded = load_model(&save_model(&model, None).unwrap()).unwrap();
    let cfg = MissionConfig { circuits: 1, ..MissionConfig::default() };
    let a = run_mission(&cfg, &model).unwrap();
    let b = run_mission(&cfg, &loaded).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a.summary.completed);
    assert_eq!(a.summary.collisions, 0);
}

#[test]
fn training_is_deterministic_for_a_seed() {
    let data = small_data();
    let cfg = TrainConfig::default();
    let a = save_model(&Trainer::Fit2Felm.fit(&data, &cfg).unwrap().model, None).unwrap();
    let b = save_model(&Trainer::Fit2Felm.fit(&data, &cfg).unwrap().model, None).unwrap();
    assert_eq!(a, b);
}
