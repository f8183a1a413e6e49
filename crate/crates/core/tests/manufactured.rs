mod common;

use common::manufactured::{errors, rates};

fn check(k: usize, sizes: &[usize]) {
    let (eu, ep): (Vec<f64>, Vec<f64>) = sizes.iter().map(|&n| errors(k, n)).unzip();
    let (ru, rp) = (rates(&eu), rates(&ep));
    eprintln!("k={k} velocity errors {eu:?} rates {ru:?}; pressure errors {ep:?} rates {rp:?}");
    assert!(ru.iter().all(|&r| r >= k as f64 + 0.8), "velocity rates {ru:?}");
    assert!(rp.iter().all(|&r| r >= k as f64 - 0.2), "pressure rates {rp:?}");
}

#[test]
fn quadratic_velocity_rates() {
    check(2, &[8, 16, 32, 64]);
}

#[test]
fn cubic_velocity_rates() {
    check(3, &[4, 8, 16, 32]);
}

#[test]
fn quartic_velocity_rates() {
    check(4, &[4, 8, 16]);
}
