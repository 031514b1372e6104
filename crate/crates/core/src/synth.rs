//! Seeded synthetic velocity traces for tests and experiments.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::trajectory::{Trajectory, FRAME_PERIOD};

/// `offset + amplitude * sin(2π t / period)` sampled at `rate_hz`.
///
/// The offset keeps the trace non-negative like a real velocity.
pub fn sine(amplitude: f64, period_s: f64, rate_hz: f64, n: usize, offset: f64) -> Trajectory {
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / rate_hz;
            offset + amplitude * (2.0 * std::f64::consts::PI * t / period_s).sin()
        })
        .collect();
    Trajectory::new(0, 1.0 / rate_hz, samples).expect("offset keeps samples non-negative")
}

/// The reference sine: amplitude 5, period 10 s, 10 Hz, 600 samples, centred at 10 m/s.
pub fn reference_sine() -> Trajectory {
    sine(5.0, 10.0, 10.0, 600, 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Free-flowing traffic around 27 m/s with mild fluctuations.
    Highway,
    /// Stop-and-go driving between standstill and 8-15 m/s.
    Urban,
}

/// Seeded 10 Hz velocity trace from the given driving regime.
pub fn regime_trace(regime: Regime, seed: u64, n: usize) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = FRAME_PERIOD;
    let mut samples = Vec::with_capacity(n);
    match regime {
        Regime::Highway => {
            let mut v: f64 = rng.gen_range(25.0..29.0);
            let mut a: f64 = 0.0;
            let mut target: f64 = 27.0;
            for _ in 0..n {
                target += 0.02 * rng.gen_range(-1.0..1.0);
                target = target.clamp(24.0, 30.0);
                a = 0.9 * a + 0.1 * (0.5 * (target - v)) + 0.3 * rng.gen_range(-1.0..1.0);
                v = (v + dt * a).max(0.0);
                samples.push(v);
            }
        }
        Regime::Urban => {
            let mut v: f64 = 0.0;
            while samples.len() < n {
                let cruise: f64 = rng.gen_range(8.0..15.0);
                let accel: f64 = rng.gen_range(1.2..2.0);
                while v < cruise && samples.len() < n {
                    v = (v + dt * accel).min(cruise);
                    samples.push(v);
                }
                let hold = (rng.gen_range(5.0..12.0) / dt) as usize;
                for _ in 0..hold {
                    if samples.len() >= n {
                        break;
                    }
                    v = (v + 0.05 * rng.gen_range(-1.0..1.0)).max(0.0);
                    samples.push(v);
                }
                let decel: f64 = rng.gen_range(1.5..2.5);
                while v > 0.0 && samples.len() < n {
                    v = (v - dt * decel).max(0.0);
                    samples.push(v);
                }
                let stop = (rng.gen_range(2.0..5.0) / dt) as usize;
                for _ in 0..stop {
                    if samples.len() >= n {
                        break;
                    }
                    samples.push(0.0);
                }
            }
        }
    }
    Trajectory::new(0, dt, samples).expect("regime traces are non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sine_shape() {
        let t = reference_sine();
        assert_eq!(t.len(), 600);
        assert!((t.sample_period - 0.1).abs() < 1e-15);
        assert!((t.samples[25] - 15.0).abs() < 1e-12);
        assert!(t.samples.iter().all(|&v| (5.0 - 1e-12..=15.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn regimes_are_seeded_and_distinct() {
        let a = regime_trace(Regime::Highway, 1, 500);
        assert_eq!(a, regime_trace(Regime::Highway, 1, 500));
        assert_ne!(a, regime_trace(Regime::Highway, 2, 500));
        let u = regime_trace(Regime::Urban, 1, 500);
        assert_eq!(u.len(), 500);
        let mean = |t: &Trajectory| t.samples.iter().sum::<f64>() / t.len() as f64;
        assert!(mean(&a) > 20.0);
        assert!(mean(&u) < 15.0);
    }
}
