//! Oracles and generators shared by the integration tests. Nothing here calls
//! into the library, so it can check the library independently.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Days since 1970-01-01 of a proleptic Gregorian date.
pub fn days_from_civil(y: i64, m: i64, d: i64) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let mp = (m + 9) % 12;
    let doy = (153 * mp + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Inverse of [`days_from_civil`].
pub fn civil_from_days(z: i64) -> (i64, i64, i64) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    (yoe + era * 400 + i64::from(m <= 2), m, d)
}

/// ISO (year, week) of a day: the week belongs to the year of its Thursday.
pub fn iso_week_of(days: i64) -> (i64, i64) {
    // 1970-01-01 was a Thursday; Monday = 0.
    let weekday = (days + 3).rem_euclid(7);
    let thursday = days - weekday + 3;
    let (year, _, _) = civil_from_days(thursday);
    let jan1 = days_from_civil(year, 1, 1);
    (year, (thursday - jan1) / 7 + 1)
}

/// Distinct ISO weeks touched by the inclusive day range, in order.
pub fn iso_weeks_between(first: i64, last: i64) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = Vec::new();
    for day in first..=last {
        let w = iso_week_of(day);
        if out.last() != Some(&w) {
            out.push(w);
        }
    }
    out
}

pub fn last_day_of_month(y: i64, m: i64) -> i64 {
    let (ny, nm) = if m == 12 { (y + 1, 1) } else { (y, m + 1) };
    days_from_civil(ny, nm, 1) - 1
}

/// Noisy tanh-NAR(3) series with a sustained quasi-periodic cycle.
///
/// `y(t) = tanh(1.9 y(t-1) - 1.2 y(t-2) - 0.3 y(t-3)) + e(t)`, with `e` drawn
/// at 1% of the noiseless range (about 1.9).
pub fn tanh_nar3(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.01 * 1.9).expect("valid sigma");
    let burn_in = 100;
    let mut y: Vec<f64> = vec![0.1, -0.2, 0.3];
    for _ in 0..len + burn_in {
        let n = y.len();
        let next =
            (1.9 * y[n - 1] - 1.2 * y[n - 2] - 0.3 * y[n - 3]).tanh() + noise.sample(&mut rng);
        y.push(next);
    }
    y.split_off(y.len() - len)
}

/// Stationary AR(1) `y(t) = phi y(t-1) + e(t)`, `e ~ N(0, sigma²)`.
pub fn ar1(len: usize, phi: f64, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("valid sigma");
    let mut y = noise.sample(&mut rng) / (1.0 - phi * phi).sqrt();
    let mut out = Vec::with_capacity(len);
    for _ in 0..len + 200 {
        y = phi * y + noise.sample(&mut rng);
        out.push(y);
    }
    out.split_off(200)
}

/// Central finite-difference gradient of `f` at `x`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// ‖a − b‖ / max(‖a‖, ‖b‖), zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut a.iter().zip(b).map(|(x, y)| x - y));
    let scale = norm(&mut a.iter().copied()).max(norm(&mut b.iter().copied()));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Reference R² computed from scratch.
pub fn r_squared(predicted: &[f64], actual: &[f64]) -> f64 {
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_res: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (a - p).powi(2))
        .sum();
    let ss_tot: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    1.0 - ss_res / ss_tot
}
