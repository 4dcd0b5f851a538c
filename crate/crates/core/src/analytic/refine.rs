use crate::error::Result;
use crate::net::{Net, Repeater, RepeaterSolution, Side, TechParams};
use crate::scalar::Scalar;

use super::{dtau_dx, solve_widths, LagrangeState, RefineParams};

/// Result of [`refine`].
#[derive(Debug, Clone, PartialEq)]
pub struct RefineOutcome<T> {
    /// Continuous widths, delay at the target.
    pub solution: RepeaterSolution<T>,
    pub lambda: T,
    /// Total width after the initial width solve, before any move.
    pub initial_width: T,
    /// Total width after each accepted iteration, starting with `initial_width`.
    pub history: Vec<T>,
    pub iterations: usize,
    pub moves: usize,
    /// Positions at the start and after every iteration.
    pub path: Vec<Vec<T>>,
    /// Set when the loop stopped for a reason other than the ε test, e.g. a
    /// vanishing multiplier or a failed width solve.
    pub flag: Option<String>,
}

/// Largest predicted width reduction of a single repeater move.
#[derive(Debug, Clone, Copy)]
struct Proposal<T> {
    index: usize,
    to: T,
    gain: T,
}

/// Distance kept from a neighbour's midpoint and from the net ends (µm).
const MARGIN: f64 = 1.0;

/// Solve widths at the seed positions, then iteratively move repeaters
/// against the one-sided location derivatives while the relative
/// improvement of total width stays above `eps0`.
///
/// An empty seed is returned unchanged. A failed initial width solve is an
/// error; later failures roll the offending move back.
pub fn refine<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    init: &RepeaterSolution<T>,
    tau_t: T,
    params: &RefineParams<T>,
) -> Result<RefineOutcome<T>> {
    params.validate()?;
    if init.is_empty() {
        return Ok(RefineOutcome {
            solution: init.clone(),
            lambda: T::zero(),
            initial_width: T::zero(),
            history: vec![T::zero()],
            iterations: 0,
            moves: 0,
            path: vec![init.positions()],
            flag: None,
        });
    }
    let n = init.len();
    let mut pos = init.positions();
    let mut state = solve_widths(tech, net, &pos, tau_t, &LagrangeState::from_widths(init.widths()))?;
    let mut total = state.total_width();
    let initial_width = total;
    let mut history = vec![total];
    let mut path = vec![pos.clone()];
    let mut frozen = vec![false; n];
    let mut flag = None;
    let mut moves = 0usize;
    let mut iterations = 0usize;
    let lambda_floor = T::c(1e-12);

    while iterations < params.max_iters {
        iterations += 1;
        if state.lambda.abs() <= lambda_floor {
            flag = Some("multiplier vanished; positions frozen".to_string());
            break;
        }
        let mut props = proposals(tech, net, &pos, &state, params.step, &frozen)?;
        frozen.iter_mut().for_each(|f| *f = false);
        if props.is_empty() {
            break;
        }
        props.sort_by(|a, b| b.gain.partial_cmp(&a.gain).unwrap_or(std::cmp::Ordering::Equal));

        let before = total;
        let mut batch = pos.clone();
        for p in &props {
            batch[p.index] = p.to;
        }
        match try_solve(tech, net, &batch, tau_t, &state, total) {
            Some(s) => {
                pos = batch;
                total = s.total_width();
                state = s;
                moves += props.len();
            }
            None => {
                // fall back to single moves, best predicted gain first
                for p in &props {
                    let mut trial = pos.clone();
                    trial[p.index] = p.to;
                    if !ordered_and_legal(net, &trial) {
                        frozen[p.index] = true;
                        continue;
                    }
                    match try_solve(tech, net, &trial, tau_t, &state, total) {
                        Some(s) => {
                            pos = trial;
                            total = s.total_width();
                            state = s;
                            moves += 1;
                        }
                        None => frozen[p.index] = true,
                    }
                }
            }
        }
        if total < before {
            history.push(total);
        }
        path.push(pos.clone());
        let eps = (before - total) / before;
        if eps <= params.eps0 {
            break;
        }
    }
    if iterations >= params.max_iters && flag.is_none() {
        flag = Some("iteration cap reached".to_string());
    }

    let repeaters: Vec<Repeater<T>> = pos
        .iter()
        .zip(&state.widths)
        .map(|(&x, &w)| Repeater::new(x, w))
        .collect();
    let solution = RepeaterSolution::evaluate(tech, net, repeaters)?;
    Ok(RefineOutcome {
        solution,
        lambda: state.lambda,
        initial_width,
        history,
        iterations,
        moves,
        path,
        flag,
    })
}

fn try_solve<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    pos: &[T],
    tau_t: T,
    from: &LagrangeState<T>,
    total: T,
) -> Option<LagrangeState<T>> {
    let s = solve_widths(tech, net, pos, tau_t, from).ok()?;
    (s.total_width() <= total).then_some(s)
}

fn ordered_and_legal<T: Scalar>(net: &Net<T>, pos: &[T]) -> bool {
    pos.windows(2).all(|p| p[1] > p[0]) && pos.iter().all(|&x| net.is_legal_position(x))
}

/// Per-repeater move proposals from the sign of `λ·∂τ/∂x` on each side.
fn proposals<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    pos: &[T],
    state: &LagrangeState<T>,
    step: T,
    frozen: &[bool],
) -> Result<Vec<Proposal<T>>> {
    let n = pos.len();
    let len = net.total_length();
    let margin = T::c(MARGIN);
    let half = T::c(0.5);
    let lam = state.lambda;
    let mut out = Vec::new();
    for i in 0..n {
        if frozen[i] {
            continue;
        }
        let x = pos[i];
        let right = dtau_dx(tech, net, pos, &state.widths, i, Side::Right)?;
        let left = dtau_dx(tech, net, pos, &state.widths, i, Side::Left)?;
        // Σ Δw ≈ λ·(∂τ/∂x)·Δx
        let down_gain = if lam * right < T::zero() { -lam * right * step } else { T::zero() };
        let up_gain = if lam * left > T::zero() { lam * left * step } else { T::zero() };
        if !(down_gain > T::zero()) && !(up_gain > T::zero()) {
            continue;
        }
        let (to, gain) = if down_gain >= up_gain {
            let limit = if i + 1 < n { half * (x + pos[i + 1]) - margin } else { len - margin };
            ((x + step).min(limit), down_gain)
        } else {
            let limit = if i > 0 { half * (pos[i - 1] + x) + margin } else { margin };
            ((x - step).max(limit), up_gain)
        };
        let moved = if down_gain >= up_gain { to > x } else { to < x };
        if !moved || net.in_forbidden(to) || !net.is_legal_position(to) {
            continue;
        }
        out.push(Proposal { index: i, to, gain });
    }
    Ok(out)
}

impl<T: Scalar> RefineOutcome<T> {
    pub fn failed(&self) -> bool {
        self.flag.is_some()
    }
}
