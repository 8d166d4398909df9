use molekom_core::stats::{gaussian_validity, link_moments, moments_h0, moments_h1, slot_moments};
use molekom_core::{ArrivalTable, NoiseParams, TxSchedule};

fn table() -> ArrivalTable {
    ArrivalTable::from_rows(vec![vec![0.45, 0.12, 0.05, 0.03], vec![0.35, 0.10, 0.04], vec![0.30, 0.09], vec![0.27]])
        .unwrap()
}

#[test]
fn first_slot_has_no_interference() {
    let sched = TxSchedule::new(vec![20, 30, 40, 50], 0.4).unwrap();
    let noise = NoiseParams::new(3.0, 7.0).unwrap();
    assert_eq!(moments_h0(1, &sched, &noise, &table()).unwrap(), (3.0, 10.0));
    let (mu1, v1) = moments_h1(1, &sched, &noise, &table()).unwrap();
    let s = 20.0 * 0.45;
    assert!((mu1 - (s + 3.0)).abs() < 1e-12);
    assert!((v1 - (s * 0.55 + 7.0 + mu1)).abs() < 1e-12);
}

#[test]
fn near_certain_transmission_removes_mixture_variance() {
    let beta = 1.0 - 1e-12;
    let sched = TxSchedule::new(vec![20, 30, 40, 50], beta).unwrap();
    let noise = NoiseParams::new(3.0, 7.0).unwrap();
    let (mu0, v0) = moments_h0(2, &sched, &noise, &table()).unwrap();
    let isi = 20.0 * 0.12;
    assert!((mu0 - (isi + 3.0)).abs() < 1e-9);
    assert!((v0 - (isi * 0.88 + 7.0 + mu0)).abs() < 1e-9);
}

#[test]
fn interference_uses_the_transmit_slot_row() {
    // slot 3 hears slot 2 at offset 1 (row 2) and slot 1 at offset 2 (row 1)
    let sched = TxSchedule::new(vec![10, 20, 30, 40], 0.5).unwrap();
    let noise = NoiseParams::new(0.0, 1.0).unwrap();
    let (mu0, _) = moments_h0(3, &sched, &noise, &table()).unwrap();
    assert!((mu0 - 0.5 * (20.0 * 0.10 + 10.0 * 0.05)).abs() < 1e-12);
}

#[test]
fn silent_slot_has_identical_hypotheses() {
    let sched = TxSchedule::new(vec![20, 0, 40, 50], 0.5).unwrap();
    let noise = NoiseParams::new(3.0, 7.0).unwrap();
    let m = slot_moments(2, &sched, &noise, &table()).unwrap();
    assert_eq!((m.mu0, m.sigma2_0), (m.mu1, m.sigma2_1));
}

#[test]
fn future_slots_do_not_matter() {
    let noise = NoiseParams::new(2.0, 4.0).unwrap();
    let a = TxSchedule::new(vec![20, 30, 40, 50], 0.3).unwrap();
    let b = TxSchedule::new(vec![20, 30, 50, 40], 0.3).unwrap();
    for j in 1..=2 {
        assert_eq!(slot_moments(j, &a, &noise, &table()).unwrap(), slot_moments(j, &b, &noise, &table()).unwrap());
    }
    assert_eq!(link_moments(&a, &noise, &table()).unwrap().len(), 4);
}

#[test]
fn validity_rule_of_thumb() {
    let t = ArrivalTable::from_rows(vec![vec![0.4505]]).unwrap();
    let v = gaussian_validity(1, &TxSchedule::new(vec![30], 0.5).unwrap(), &t);
    assert!(v.valid);
    assert!((v.signal - 13.515).abs() < 1e-9 && (v.complement - 16.485).abs() < 1e-9);
    assert!(!gaussian_validity(1, &TxSchedule::new(vec![0], 0.5).unwrap(), &t).valid);
    let half = ArrivalTable::from_rows(vec![vec![0.5]]).unwrap();
    assert!(gaussian_validity(1, &TxSchedule::new(vec![11], 0.5).unwrap(), &half).valid);
    assert!(!gaussian_validity(1, &TxSchedule::new(vec![10], 0.5).unwrap(), &half).valid);
}

#[test]
fn rejects_out_of_range_inputs() {
    let noise = NoiseParams::new(0.0, 1.0).unwrap();
    let sched = TxSchedule::uniform(10, 4, 0.5).unwrap();
    assert!(moments_h0(0, &sched, &noise, &table()).is_err());
    assert!(moments_h1(5, &sched, &noise, &table()).is_err());
    let long = TxSchedule::uniform(10, 5, 0.5).unwrap();
    assert!(link_moments(&long, &noise, &table()).is_err());
    assert!(TxSchedule::uniform(10, 4, 0.0).is_err());
    assert!(TxSchedule::uniform(10, 4, 1.0).is_err());
    assert!(NoiseParams::new(-1.0, 1.0).is_err());
    assert!(NoiseParams::new(1.0, -1.0).is_err());
}
