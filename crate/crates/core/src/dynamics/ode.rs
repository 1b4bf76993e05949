//! Explicit Runge–Kutta integration of `dy/dt = f(t, y)` for complex state
//! vectors, sampled on a fixed output grid.
//!
//! The production path is the Dormand–Prince 5(4) pair with per-component
//! error control in the max norm. If the adaptive step collapses below
//! `min_step`, the current output interval is finished with classical
//! fixed-step RK4.

use log::warn;

use crate::error::{Error, Result};
use crate::C64;

// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
// Fifth- minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

#[derive(Clone, Debug)]
pub struct Integrator {
    pub tol: Tolerances,
    pub min_step: f64,
    /// Step used by the RK4 fallback; the interval is split evenly so that no
    /// step exceeds this.
    pub fallback_step: f64,
    pub max_steps: usize,
}

impl Integrator {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Integrator {
            tol: Tolerances { abs: abs_tol, rel: rel_tol },
            min_step: 1e-12,
            fallback_step: 1e-3,
            max_steps: 50_000_000,
        }
    }

    /// Integrates from `times[0]` through every entry of `times`, calling
    /// `sample(k, t, y)` at each output time (including the first).
    /// `post_step` runs after every accepted step and may adjust `y`.
    pub fn run<F, P, S>(
        &self,
        mut f: F,
        y0: Vec<C64>,
        times: &[f64],
        mut post_step: P,
        mut sample: S,
    ) -> Result<Stats>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
        P: FnMut(f64, &mut [C64]) -> Result<()>,
        S: FnMut(usize, f64, &[C64]) -> Result<()>,
    {
        let n = y0.len();
        let mut y = y0;
        let mut work = Work::new(n);
        let mut stats = Stats::default();
        let Some(&t0) = times.first() else { return Ok(stats) };
        sample(0, t0, &y)?;

        let mut t = t0;
        let mut h = 0.0;
        for (k, &target) in times.iter().enumerate().skip(1) {
            if h == 0.0 {
                h = self.initial_step(&mut f, t, &y, target - t, &mut work);
            }
            while t < target {
                let remaining = target - t;
                let last = h >= remaining;
                let step = if last { remaining } else { h };
                let err = self.try_step(&mut f, t, &y, step, &mut work);
                stats.evaluations += 7;
                if err <= 1.0 {
                    if last {
                        t = target;
                    } else {
                        t += step;
                    }
                    std::mem::swap(&mut y, &mut work.y_new);
                    post_step(t, &mut y)?;
                    stats.accepted += 1;
                    if stats.accepted > self.max_steps {
                        return Err(Error::StepUnderflow(t));
                    }
                    // Clipped final steps do not shrink the running step size.
                    let factor = step_factor(err);
                    h = if last { h.max(step * factor) } else { step * factor };
                } else {
                    stats.rejected += 1;
                    h = step * step_factor(err).min(1.0);
                    if h < self.min_step {
                        warn!("step size collapsed at t = {t}; finishing interval with fixed-step RK4");
                        self.rk4_interval(&mut f, &mut t, &mut y, target, &mut post_step, &mut work, &mut stats)?;
                        h = self.fallback_step;
                    }
                }
            }
            sample(k, t, &y)?;
        }
        Ok(stats)
    }

    fn try_step<F>(&self, f: &mut F, t: f64, y: &[C64], h: f64, w: &mut Work) -> f64
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        f(t, y, &mut w.k[0]);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += h * a * w.k[j][i];
                    }
                }
                w.stage[i] = acc;
            }
            let (done, rest) = w.k.split_at_mut(s);
            let _ = done;
            f(t + C[s] * h, &w.stage, &mut rest[0]);
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut y_new = y[i];
            let mut err = C64::new(0.0, 0.0);
            for s in 0..7 {
                if B[s] != 0.0 {
                    y_new += h * B[s] * w.k[s][i];
                }
                if E[s] != 0.0 {
                    err += h * E[s] * w.k[s][i];
                }
            }
            w.y_new[i] = y_new;
            let scale = self.tol.abs + self.tol.rel * y[i].norm().max(y_new.norm());
            worst = worst.max(err.norm() / scale);
        }
        worst
    }

    fn initial_step<F>(&self, f: &mut F, t: f64, y: &[C64], span: f64, w: &mut Work) -> f64
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        f(t, y, &mut w.k[0]);
        let scaled = |v: &[C64]| -> f64 {
            let s: f64 = v
                .iter()
                .zip(y)
                .map(|(a, b)| (a.norm() / (self.tol.abs + self.tol.rel * b.norm())).powi(2))
                .sum();
            (s / y.len().max(1) as f64).sqrt()
        };
        let d0 = scaled(y);
        let d1 = scaled(&w.k[0]);
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span).max(self.min_step)
    }

    #[allow(clippy::too_many_arguments)]
    fn rk4_interval<F, P>(
        &self,
        f: &mut F,
        t: &mut f64,
        y: &mut [C64],
        target: f64,
        post_step: &mut P,
        w: &mut Work,
        stats: &mut Stats,
    ) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
        P: FnMut(f64, &mut [C64]) -> Result<()>,
    {
        let span = target - *t;
        let steps = (span / self.fallback_step).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        let start = *t;
        for k in 0..steps {
            let tk = start + h * k as f64;
            rk4_step(f, tk, y, h, w);
            *t = if k + 1 == steps { target } else { tk + h };
            post_step(*t, y)?;
            stats.fallback += 1;
            stats.evaluations += 4;
        }
        Ok(())
    }
}

fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        MAX_FACTOR
    } else {
        (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
    }
}

/// One classical fourth-order Runge–Kutta step in place.
fn rk4_step<F>(f: &mut F, t: f64, y: &mut [C64], h: f64, w: &mut Work)
where
    F: FnMut(f64, &[C64], &mut [C64]) + ?Sized,
{
    let n = y.len();
    let (k, rest) = w.k.split_at_mut(4);
    f(t, y, &mut k[0]);
    for i in 0..n {
        w.stage[i] = y[i] + 0.5 * h * k[0][i];
    }
    f(t + 0.5 * h, &w.stage, &mut k[1]);
    for i in 0..n {
        w.stage[i] = y[i] + 0.5 * h * k[1][i];
    }
    f(t + 0.5 * h, &w.stage, &mut k[2]);
    for i in 0..n {
        w.stage[i] = y[i] + h * k[2][i];
    }
    f(t + h, &w.stage, &mut k[3]);
    let _ = rest;
    for i in 0..n {
        y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
}

struct Work {
    k: Vec<Vec<C64>>,
    stage: Vec<C64>,
    y_new: Vec<C64>,
}

impl Work {
    fn new(n: usize) -> Self {
        let zero = vec![C64::new(0.0, 0.0); n];
        Work { k: vec![zero.clone(); 7], stage: zero.clone(), y_new: zero }
    }
}

/// Step counters for a finished run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub fallback: usize,
    pub evaluations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(omega: f64) -> impl FnMut(f64, &[C64], &mut [C64]) {
        move |_, y, dy| dy[0] = -C64::i() * omega * y[0]
    }

    #[test]
    fn phase_rotation_is_accurate() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let mut out = Vec::new();
        Integrator::new(1e-12, 1e-12)
            .run(oscillator(1.3), vec![C64::new(1.0, 0.0)], &times, |_, _| Ok(()), |_, t, y| {
                out.push((t, y[0]));
                Ok(())
            })
            .unwrap();
        assert_eq!(out.len(), 11);
        for (t, y) in out {
            let exact = (-C64::i() * 1.3 * t).exp();
            assert!((y - exact).norm() < 1e-9, "t = {t}: {y} vs {exact}");
        }
    }

    #[test]
    fn samples_land_exactly_on_grid() {
        let times = [0.0, 0.1, 0.35, 2.0];
        let mut seen = Vec::new();
        Integrator::new(1e-9, 1e-9)
            .run(oscillator(2.0), vec![C64::new(1.0, 0.0)], &times, |_, _| Ok(()), |_, t, _| {
                seen.push(t);
                Ok(())
            })
            .unwrap();
        assert_eq!(seen, times);
    }

    #[test]
    fn error_shrinks_with_tolerance() {
        let err_at = |tol: f64| {
            let mut last = C64::new(0.0, 0.0);
            Integrator::new(tol, tol)
                .run(oscillator(1.0), vec![C64::new(1.0, 0.0)], &[0.0, 50.0], |_, _| Ok(()), |_, _, y| {
                    last = y[0];
                    Ok(())
                })
                .unwrap();
            (last - (-C64::i() * 50.0).exp()).norm()
        };
        assert!(err_at(1e-10) < err_at(1e-6));
    }

    #[test]
    fn rk4_fallback_converges_at_fourth_order() {
        let mut f = oscillator(1.0);
        let mut w = Work::new(1);
        let err_for = |steps: usize, f: &mut dyn FnMut(f64, &[C64], &mut [C64]), w: &mut Work| {
            let mut y = vec![C64::new(1.0, 0.0)];
            let h = 1.0 / steps as f64;
            for k in 0..steps {
                rk4_step(f, k as f64 * h, &mut y, h, w);
            }
            (y[0] - (-C64::i()).exp()).norm()
        };
        let coarse = err_for(10, &mut f, &mut w);
        let fine = err_for(20, &mut f, &mut w);
        let ratio = coarse / fine;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn collapsed_steps_fall_back_to_rk4() {
        let mut integ = Integrator::new(1e-9, 1e-9);
        // Any rejection drops below this floor.
        integ.min_step = 1e3;
        integ.fallback_step = 1e-3;
        let mut last = C64::new(0.0, 0.0);
        let stats = integ
            .run(oscillator(1.0), vec![C64::new(1.0, 0.0)], &[0.0, 1.0], |_, _| Ok(()), |_, _, y| {
                last = y[0];
                Ok(())
            })
            .unwrap();
        assert!(stats.fallback > 0);
        assert!((last - (-C64::i()).exp()).norm() < 1e-10);
    }

    #[test]
    fn post_step_errors_abort() {
        let res = Integrator::new(1e-9, 1e-9).run(
            oscillator(1.0),
            vec![C64::new(1.0, 0.0)],
            &[0.0, 1.0],
            |t, _| Err(Error::Invariant { time: t, detail: "boom".into() }),
            |_, _, _| Ok(()),
        );
        assert!(matches!(res, Err(Error::Invariant { .. })));
    }
}
