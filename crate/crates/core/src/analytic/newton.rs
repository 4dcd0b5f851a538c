use crate::delay::{delay_from_lumps, lump_stages, StageLump};
use crate::error::{Error, Result};
use crate::net::{Net, TechParams};
use crate::scalar::Scalar;

use super::linalg::solve_dense;
use super::{check_positions, LagrangeState};

/// Newton–Raphson controls for [`solve_widths_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonParams<T> {
    /// Convergence threshold on the scaled residual max-norm.
    pub tol: T,
    pub max_iters: usize,
    /// Smallest damping factor tried before giving up on a step.
    pub min_damping: T,
    /// Width floor as a multiple of `u`; iterates are clamped to it.
    pub width_floor: T,
}

impl<T: Scalar> Default for NewtonParams<T> {
    fn default() -> Self {
        Self {
            tol: T::c(1e-9),
            max_iters: 100,
            min_damping: T::c(1e-4),
            width_floor: T::c(0.01),
        }
    }
}

struct System<'a, T> {
    tech: &'a TechParams<T>,
    lumps: Vec<StageLump<T>>,
    w_d: T,
    w_r: T,
    tau_t: T,
}

impl<T: Scalar> System<'_, T> {
    fn n(&self) -> usize {
        self.lumps.len() - 1
    }

    fn padded(&self, w: &[T]) -> Vec<T> {
        let mut p = Vec::with_capacity(w.len() + 2);
        p.push(self.w_d);
        p.extend_from_slice(w);
        p.push(self.w_r);
        p
    }

    fn gradient(&self, pw: &[T]) -> Vec<T> {
        crate::delay::width_gradient_lumped(self.tech, &self.lumps, pw)
    }

    fn delay(&self, pw: &[T]) -> T {
        delay_from_lumps(self.tech, &self.lumps, pw)
    }

    /// Scaled residual: `1 + λ g_i` for each repeater, then `(τ − τ_t)/τ_t`.
    fn residual(&self, w: &[T], lambda: T) -> Vec<T> {
        let pw = self.padded(w);
        let mut f: Vec<T> = self.gradient(&pw).into_iter().map(|g| T::one() + lambda * g).collect();
        f.push((self.delay(&pw) - self.tau_t) / self.tau_t);
        f
    }

    /// Width minimizing `Σw + λ·τ` at fixed positions. The update map is
    /// monotone in both neighbours, so sweeping up from tiny widths
    /// converges to the unique stationary point.
    fn widths_for_lambda(&self, lambda: T) -> Vec<T> {
        let t = self.tech;
        let n = self.n();
        let mut pw = vec![T::c(1e-6); n + 2];
        pw[0] = self.w_d;
        pw[n + 1] = self.w_r;
        for _ in 0..10_000 {
            let mut change = T::zero();
            for i in 1..=n {
                let num = lambda * t.r_s * (self.lumps[i].c + t.c_o * pw[i + 1]);
                let den = T::one() + lambda * t.c_o * (self.lumps[i - 1].r + t.r_s / pw[i - 1]);
                let next = (num / den).sqrt();
                change = change.max(((next - pw[i]) / next).abs());
                pw[i] = next;
            }
            if change <= T::c(1e-14) {
                break;
            }
        }
        pw[1..=n].to_vec()
    }
}

fn max_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn l2<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|x| *x * *x).sum::<T>().sqrt()
}

/// Solve the width/multiplier system at fixed `positions` for target `tau_t`.
///
/// `init.widths` seeds the iteration; a non-positive or non-finite
/// `init.lambda` is replaced by `−1/∂τ_total/∂w_1` at the seed widths.
pub fn solve_widths<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    positions: &[T],
    tau_t: T,
    init: &LagrangeState<T>,
) -> Result<LagrangeState<T>> {
    solve_widths_with(tech, net, positions, tau_t, init, &NewtonParams::default())
}

pub fn solve_widths_with<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    positions: &[T],
    tau_t: T,
    init: &LagrangeState<T>,
    params: &NewtonParams<T>,
) -> Result<LagrangeState<T>> {
    let n = positions.len();
    if n == 0 {
        return Err(Error::Precondition("width solve needs at least one repeater".into()));
    }
    if init.widths.len() != n {
        return Err(Error::Precondition("initial widths do not match positions".into()));
    }
    if !(tau_t > T::zero()) {
        return Err(Error::Precondition("delay target must be > 0".into()));
    }
    check_positions(net, positions)?;
    for (i, &w) in init.widths.iter().enumerate() {
        if !(w > T::zero()) {
            return Err(Error::NonPositiveWidth {
                index: i,
                width: w.f64(),
            });
        }
    }
    let sys = System {
        tech,
        lumps: lump_stages(net, positions),
        w_d: net.driver_width(),
        w_r: net.receiver_width(),
        tau_t,
    };
    let floor = params.width_floor * tech.u;

    let lambda0 = if init.lambda.is_finite() && init.lambda > T::zero() {
        init.lambda
    } else {
        let g1 = sys.gradient(&sys.padded(&init.widths))[0];
        -T::one() / g1
    };
    let first = if lambda0.is_finite() && lambda0 > T::zero() {
        newton(&sys, init.widths.clone(), lambda0, floor, params)
    } else {
        Err(Error::NoConverge("initial multiplier is not positive".into()))
    };
    match first {
        Ok(s) if s.lambda > T::zero() => return Ok(s),
        _ => {}
    }

    // Fallback: bracket λ on the monotone curve τ(w(λ)), then polish.
    let (w, lambda, spent) = continuation(&sys, init.total_width() / tau_t)?;
    let mut out = newton(&sys, w, lambda, floor, params)?;
    out.iterations += spent;
    if out.lambda > T::zero() {
        Ok(out)
    } else {
        Err(Error::NoConverge("multiplier converged to a non-positive value".into()))
    }
}

fn newton<T: Scalar>(
    sys: &System<'_, T>,
    mut w: Vec<T>,
    mut lambda: T,
    floor: T,
    params: &NewtonParams<T>,
) -> Result<LagrangeState<T>> {
    let n = w.len();
    let m = n + 1;
    let lam_scale = lambda.abs();
    for v in w.iter_mut() {
        *v = v.max(floor);
    }
    let mut f = sys.residual(&w, lambda);
    for it in 0..=params.max_iters {
        let norm = max_norm(&f);
        if norm <= params.tol {
            return Ok(LagrangeState {
                widths: w,
                lambda,
                residual_norm: norm,
                iterations: it,
            });
        }
        if it == params.max_iters {
            break;
        }
        let t = sys.tech;
        let pw = sys.padded(&w);
        let g = sys.gradient(&pw);
        let mut jac = vec![T::zero(); m * m];
        for i in 0..n {
            let (wp, wi, wn) = (pw[i], pw[i + 1], pw[i + 2]);
            if i > 0 {
                jac[i * m + i - 1] = lambda * (-t.c_o * t.r_s / (wp * wp));
            }
            jac[i * m + i] =
                lambda * (T::c(2.0) * t.r_s * (sys.lumps[i + 1].c + t.c_o * wn) / (wi * wi * wi));
            if i + 1 < n {
                jac[i * m + i + 1] = lambda * (-t.r_s * t.c_o / (wi * wi));
            }
            jac[i * m + n] = lam_scale * g[i];
            jac[n * m + i] = g[i] / sys.tau_t;
        }
        let mut step: Vec<T> = f.iter().map(|v| -*v).collect();
        if !solve_dense(&mut jac, &mut step) {
            return Err(Error::NoConverge("singular Jacobian".into()));
        }
        let cur = l2(&f);
        let mut alpha = T::one();
        loop {
            let trial_w: Vec<T> = w
                .iter()
                .zip(&step)
                .map(|(&wi, &d)| (wi + alpha * d).max(floor))
                .collect();
            let trial_l = lambda + alpha * step[n] * lam_scale;
            let trial_f = sys.residual(&trial_w, trial_l);
            let tn = l2(&trial_f);
            if tn.is_finite() && tn < cur {
                w = trial_w;
                lambda = trial_l;
                f = trial_f;
                break;
            }
            alpha *= T::c(0.5);
            if alpha < params.min_damping {
                return Err(Error::NoConverge(format!(
                    "line search stalled at iteration {it} (residual {})",
                    max_norm(&f)
                )));
            }
        }
    }
    Err(Error::NoConverge(format!(
        "iteration cap reached (residual {})",
        max_norm(&f)
    )))
}

/// Find `λ` with `τ(w(λ)) ≈ τ_t` by geometric bracketing and bisection.
fn continuation<T: Scalar>(sys: &System<'_, T>, guess: T) -> Result<(Vec<T>, T, usize)> {
    let tau = |lam: T| {
        let w = sys.widths_for_lambda(lam);
        sys.delay(&sys.padded(&w))
    };
    let mut lam = if guess.is_finite() && guess > T::zero() {
        guess
    } else {
        T::one() / sys.tau_t
    };
    let four = T::c(4.0);
    let mut evals = 0usize;
    let (mut lo, mut hi);
    if tau(lam) > sys.tau_t {
        lo = lam;
        loop {
            lam *= four;
            evals += 1;
            if tau(lam) <= sys.tau_t {
                hi = lam;
                break;
            }
            if evals > 120 {
                return Err(Error::NoConverge(
                    "delay target below the minimum delay at these positions".into(),
                ));
            }
            lo = lam;
        }
    } else {
        hi = lam;
        loop {
            lam /= four;
            evals += 1;
            if tau(lam) > sys.tau_t {
                lo = lam;
                break;
            }
            if evals > 120 {
                return Err(Error::NoConverge("could not bracket the multiplier".into()));
            }
            hi = lam;
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        evals += 1;
        if tau(mid) > sys.tau_t {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= T::c(1e-12) * hi {
            break;
        }
    }
    Ok((sys.widths_for_lambda(hi), hi, evals))
}
