//! Continuous-width Lagrangian machinery.
//!
//! For fixed repeater positions the minimum-width sizing satisfies
//! `τ_total = τ_t` and, for every repeater,
//! `1 + λ·∂τ_total/∂w_i = 0`. [`solve_widths`] solves that `n + 1` system by
//! damped Newton–Raphson. [`dtau_dx`] gives the one-sided location
//! derivatives that [`refine`] uses to move repeaters.

mod linalg;
mod newton;
mod refine;

pub use newton::{solve_widths, solve_widths_with, NewtonParams};
pub use refine::{refine, RefineOutcome};

use crate::delay::{delay_from_lumps, lump_stages, padded_widths, width_gradient_lumped};
use crate::error::{Error, Result};
use crate::net::{Net, Side, TechParams};
use crate::scalar::Scalar;

/// Widths, multiplier and residual of a (possibly partial) width solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeState<T> {
    pub widths: Vec<T>,
    /// Multiplier on the delay constraint in `p + λ(τ_total − τ_t)`.
    pub lambda: T,
    /// Max-norm of the scaled residual.
    pub residual_norm: T,
    pub iterations: usize,
}

impl<T: Scalar> LagrangeState<T> {
    /// Starting point with the multiplier left for the solver to initialize.
    pub fn from_widths(widths: Vec<T>) -> Self {
        Self {
            widths,
            lambda: T::nan(),
            residual_norm: T::infinity(),
            iterations: 0,
        }
    }

    pub fn total_width(&self) -> T {
        self.widths.iter().copied().sum()
    }
}

/// Knobs of the location refinement loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineParams<T> {
    /// Distance a repeater moves per accepted step (µm).
    pub step: T,
    /// Stop when the relative width improvement of an iteration is `≤ eps0`.
    pub eps0: T,
    pub max_iters: usize,
    /// Finite-difference probe (µm) for derivative self-checks.
    pub fd_probe: T,
}

impl<T: Scalar> Default for RefineParams<T> {
    fn default() -> Self {
        Self {
            step: T::c(25.0),
            eps0: T::c(1e-3),
            max_iters: 200,
            fd_probe: T::c(0.01),
        }
    }
}

impl<T: Scalar> RefineParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > T::zero()) || !(self.eps0 > T::zero()) || self.max_iters == 0 {
            return Err(Error::InvalidConfig(
                "refine step and eps0 must be > 0, max_iters >= 1".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn check_positions<T: Scalar>(net: &Net<T>, positions: &[T]) -> Result<()> {
    let mut prev = T::zero();
    for (i, &x) in positions.iter().enumerate() {
        if !(x > prev) || x >= net.total_length() {
            return Err(Error::Precondition(format!(
                "positions must be strictly increasing inside (0, L); index {i} at {x}"
            )));
        }
        if net.in_forbidden(x) {
            return Err(Error::Precondition(format!("position {x} is inside a forbidden zone")));
        }
        prev = x;
    }
    Ok(())
}

fn check_widths<T: Scalar>(widths: &[T]) -> Result<()> {
    for (i, &w) in widths.iter().enumerate() {
        if !(w > T::zero()) {
            return Err(Error::NonPositiveWidth {
                index: i,
                width: w.f64(),
            });
        }
    }
    Ok(())
}

/// The `n + 1` stationarity residuals: for each repeater
/// `1 + λ[C_o(R_{i−1} + R_s/w_{i−1}) − R_s(C_i + C_o·w_{i+1})/w_i²]`, then
/// `τ_total − τ_t` (seconds, unscaled).
pub fn width_residuals<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    positions: &[T],
    widths: &[T],
    lambda: T,
    tau_t: T,
) -> Result<Vec<T>> {
    if positions.len() != widths.len() {
        return Err(Error::Precondition("positions and widths differ in length".into()));
    }
    check_positions(net, positions)?;
    check_widths(widths)?;
    let lumps = lump_stages(net, positions);
    let w = padded_widths(net, widths);
    let mut out: Vec<T> = width_gradient_lumped(tech, &lumps, &w)
        .into_iter()
        .map(|g| T::one() + lambda * g)
        .collect();
    out.push(delay_from_lumps(tech, &lumps, &w) - tau_t);
    Ok(out)
}

/// One-sided derivative of `τ_total` with respect to the position of
/// repeater `i` (0-based).
///
/// `C_o·r·(w_i − w_{i+1}) + R_s·c·(1/w_{i−1} − 1/w_i) + c·R_{i−1} − r·C_i`
/// where `(r, c)` is the unit RC of the wire on the requested side of `x_i`.
pub fn dtau_dx<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    positions: &[T],
    widths: &[T],
    i: usize,
    side: Side,
) -> Result<T> {
    if i >= positions.len() || positions.len() != widths.len() {
        return Err(Error::Precondition(format!("repeater index {i} out of range")));
    }
    check_widths(widths)?;
    let (r, c) = net.unit_rc_at(positions[i], side)?;
    let (r_up, _) = net.rc_between(if i == 0 { T::zero() } else { positions[i - 1] }, positions[i])?;
    let next = if i + 1 < positions.len() {
        positions[i + 1]
    } else {
        net.total_length()
    };
    let (_, c_down) = net.rc_between(positions[i], next)?;
    let w = padded_widths(net, widths);
    let (w_prev, w_i, w_next) = (w[i], w[i + 1], w[i + 2]);
    Ok(tech.c_o * r * (w_i - w_next)
        + tech.r_s * c * (T::one() / w_prev - T::one() / w_i)
        + c * r_up
        - r * c_down)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::total_delay;
    use crate::net::{Repeater, Segment};

    fn tech() -> TechParams<f64> {
        TechParams::new(7000.0, 2e-15, 1.5e-15, 1.0).unwrap()
    }

    #[test]
    fn symmetric_uniform_derivatives_vanish() {
        let net = Net::uniform(6000.0, 0.075, 0.2e-15, 60.0, 60.0).unwrap();
        let pos = [2000.0, 4000.0];
        let w = [60.0, 60.0];
        for i in 0..2 {
            for side in [Side::Left, Side::Right] {
                let d = dtau_dx(&tech(), &net, &pos, &w, i, side).unwrap();
                assert!(d.abs() < 1e-25, "{d}");
            }
        }
    }

    #[test]
    fn interior_sides_agree_boundary_sides_differ() {
        let net = Net::new(
            vec![Segment::new(2000.0, 0.075, 0.2e-15), Segment::new(2000.0, 0.045, 0.25e-15)],
            vec![],
            40.0,
            30.0,
        )
        .unwrap();
        let w = [70.0, 90.0];
        let pos = [1500.0, 3000.0];
        let l = dtau_dx(&tech(), &net, &pos, &w, 0, Side::Left).unwrap();
        let r = dtau_dx(&tech(), &net, &pos, &w, 0, Side::Right).unwrap();
        assert_eq!(l, r);
        let pos = [2000.0, 3000.0];
        let l = dtau_dx(&tech(), &net, &pos, &w, 0, Side::Left).unwrap();
        let r = dtau_dx(&tech(), &net, &pos, &w, 0, Side::Right).unwrap();
        assert!((l - r).abs() > 1e-3 * l.abs().max(r.abs()));
    }

    #[test]
    fn derivative_matches_one_sided_difference() {
        let net = Net::new(
            vec![Segment::new(1800.0, 0.075, 0.2e-15), Segment::new(2200.0, 0.045, 0.25e-15)],
            vec![],
            40.0,
            30.0,
        )
        .unwrap();
        let pos = vec![1800.0, 2900.0];
        let w = vec![55.0, 95.0];
        let h = 0.01;
        for i in 0..2 {
            let eval = |x: f64| {
                let mut p = pos.clone();
                p[i] = x;
                let reps: Vec<_> = p.iter().zip(&w).map(|(&x, &w)| Repeater::new(x, w)).collect();
                total_delay(&tech(), &net, &reps).unwrap()
            };
            let base = eval(pos[i]);
            let fd_r = (eval(pos[i] + h) - base) / h;
            let fd_l = (base - eval(pos[i] - h)) / h;
            let an_r = dtau_dx(&tech(), &net, &pos, &w, i, Side::Right).unwrap();
            let an_l = dtau_dx(&tech(), &net, &pos, &w, i, Side::Left).unwrap();
            assert!((fd_r - an_r).abs() <= 1e-4 * an_r.abs(), "{fd_r} vs {an_r}");
            assert!((fd_l - an_l).abs() <= 1e-4 * an_l.abs(), "{fd_l} vs {an_l}");
        }
    }

    #[test]
    fn residual_linear_in_lambda() {
        let net = Net::uniform(5000.0, 0.075, 0.2e-15, 40.0, 40.0).unwrap();
        let pos = [1700.0, 3400.0];
        let w = [45.0, 70.0];
        let a = width_residuals(&tech(), &net, &pos, &w, 1e12, 1e-9).unwrap();
        let b = width_residuals(&tech(), &net, &pos, &w, 2e12, 1e-9).unwrap();
        for i in 0..2 {
            assert!(((b[i] - 1.0) - 2.0 * (a[i] - 1.0)).abs() < 1e-12 * (a[i] - 1.0).abs().max(1.0));
        }
        assert_eq!(a[2], b[2]);
        assert!(width_residuals(&tech(), &net, &pos, &[45.0, 0.0], 1.0, 1e-9).is_err());
    }

    #[test]
    fn residual_sign_flips_at_stationary_width() {
        // n = 1: the bracket vanishes at w* = sqrt(R_s(C_1 + C_o w_2) / (C_o(R_0 + R_s/w_0)))
        let t = tech();
        let net = Net::uniform(4000.0, 0.075, 0.2e-15, 50.0, 30.0).unwrap();
        let pos = [2000.0];
        let (r0, _) = net.rc_between(0.0, 2000.0).unwrap();
        let (_, c1) = net.rc_between(2000.0, 4000.0).unwrap();
        let w_star = (t.r_s * (c1 + t.c_o * 30.0) / (t.c_o * (r0 + t.r_s / 50.0))).sqrt();
        let lambda = 1e12;
        let below = width_residuals(&t, &net, &pos, &[0.9 * w_star], lambda, 1e-9).unwrap()[0] - 1.0;
        let above = width_residuals(&t, &net, &pos, &[1.1 * w_star], lambda, 1e-9).unwrap()[0] - 1.0;
        assert!(below < 0.0 && above > 0.0);
    }
}
