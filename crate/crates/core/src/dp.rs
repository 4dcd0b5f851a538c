//! Dynamic-programming repeater insertion over a discrete width library and
//! candidate position set.
//!
//! The sweep runs from the receiver toward the driver. Each partial solution
//! is a [`DpLabel`] carrying the load seen looking downstream, the Elmore
//! delay from that point to the receiver, and the width spent so far.
//! Labels are pruned by exact (ε = 0) Pareto dominance, so the result is
//! optimal over the discrete search space.

use std::cmp::Ordering;

use crate::delay::StageLump;
use crate::error::{Error, Result};
use crate::net::{Net, Repeater, RepeaterSolution, TechParams};
use crate::scalar::Scalar;

/// Discrete search space: library widths and candidate positions.
#[derive(Debug, Clone, PartialEq)]
pub struct DpConfig<T> {
    widths: Vec<T>,
    candidates: Vec<T>,
}

impl<T: Scalar> DpConfig<T> {
    /// Validate against `net`: widths nonempty, strictly increasing and
    /// positive; candidates strictly increasing, interior and not forbidden.
    pub fn new(widths: Vec<T>, candidates: Vec<T>, net: &Net<T>) -> Result<Self> {
        if widths.is_empty() {
            return Err(Error::InvalidConfig("width library is empty".into()));
        }
        if !widths.iter().all(|&w| w > T::zero()) {
            return Err(Error::InvalidConfig("library widths must be > 0".into()));
        }
        if widths.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidConfig("library widths must be strictly increasing".into()));
        }
        if candidates.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidConfig("candidates must be strictly increasing".into()));
        }
        if let Some(&x) = candidates.iter().find(|&&x| !net.is_legal_position(x)) {
            return Err(Error::InvalidConfig(format!(
                "candidate {x} is not a legal interior position"
            )));
        }
        Ok(Self { widths, candidates })
    }

    /// Library widths `min, min+step, …, ≤ max` and the net's uniform grid.
    pub fn uniform(net: &Net<T>, widths: Vec<T>, loc_step: T) -> Result<Self> {
        Self::new(widths, net.candidate_grid(loc_step), net)
    }

    pub fn widths(&self) -> &[T] {
        &self.widths
    }

    pub fn candidates(&self) -> &[T] {
        &self.candidates
    }

    /// Short human-readable description recorded in reports.
    pub fn fingerprint(&self) -> String {
        let w = &self.widths;
        format!(
            "widths[{}]={}..{} candidates[{}]",
            w.len(),
            w[0],
            w[w.len() - 1],
            self.candidates.len()
        )
    }
}

/// `min, min+step, …` up to and including `max` (within rounding).
pub fn width_range<T: Scalar>(min: T, max: T, step: T) -> Vec<T> {
    let mut out = Vec::new();
    if !(step > T::zero()) || min > max {
        return out;
    }
    let slack = step * T::c(1e-9);
    let mut k = 0usize;
    loop {
        let w = min + step * T::from_usize(k).unwrap();
        if w > max + slack {
            break;
        }
        out.push(w);
        k += 1;
    }
    out
}

/// `size` widths `min, min+gran, …`.
pub fn width_library<T: Scalar>(min: T, size: usize, gran: T) -> Vec<T> {
    (0..size).map(|k| min + gran * T::from_usize(k).unwrap()).collect()
}

/// A partial solution at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpLabel<T> {
    /// Capacitance seen looking downstream.
    pub c_load: T,
    /// Elmore delay from this point to the receiver.
    pub d_down: T,
    /// Width placed so far.
    pub w_total: T,
    /// Repeaters placed so far.
    pub count: u32,
    trace: u32,
    pending: Option<(u32, u32)>,
}

const NO_TRACE: u32 = u32::MAX;

impl<T: Scalar> DpLabel<T> {
    /// A bare label with no placement history.
    pub fn new(c_load: T, d_down: T, w_total: T) -> Self {
        Self {
            c_load,
            d_down,
            w_total,
            count: 0,
            trace: NO_TRACE,
            pending: None,
        }
    }

    fn dominates_or_equals(&self, other: &Self) -> bool {
        self.c_load <= other.c_load && self.d_down <= other.d_down && self.w_total <= other.w_total
    }
}

fn cmp<T: Scalar>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Remove every label weakly dominated in `(c_load, d_down, w_total)`.
/// Of exact duplicates the one with fewer repeaters is kept. Survivors are
/// returned sorted by `(w_total, c_load, d_down)`.
pub fn prune_dominated<T: Scalar>(mut labels: Vec<DpLabel<T>>) -> Vec<DpLabel<T>> {
    labels.sort_by(|a, b| {
        cmp(a.w_total, b.w_total)
            .then(cmp(a.c_load, b.c_load))
            .then(cmp(a.d_down, b.d_down))
            .then(a.count.cmp(&b.count))
    });
    // Only an earlier label in this order can dominate a later one, so a
    // staircase of kept (c_load, d_down) pairs answers the query:
    // c strictly increasing, d strictly decreasing.
    let mut stair: Vec<(T, T)> = Vec::new();
    let mut kept = Vec::with_capacity(labels.len());
    for l in labels {
        let pos = stair.partition_point(|&(c, _)| c <= l.c_load);
        if pos > 0 && stair[pos - 1].1 <= l.d_down {
            continue;
        }
        // drop staircase points now dominated in (c, d) by l
        let start = if pos > 0 && stair[pos - 1].0 == l.c_load { pos - 1 } else { pos };
        let mut end = pos;
        while end < stair.len() && stair[end].1 >= l.d_down {
            end += 1;
        }
        stair.splice(start..end, std::iter::once((l.c_load, l.d_down)));
        kept.push(l);
    }
    kept
}

/// Prune for the min-delay objective: keep labels that are not worse in
/// `(c_load, d_down)`, with `w_total` then `count` breaking exact ties.
fn prune_delay<T: Scalar>(mut labels: Vec<DpLabel<T>>) -> Vec<DpLabel<T>> {
    labels.sort_by(|a, b| {
        cmp(a.c_load, b.c_load)
            .then(cmp(a.d_down, b.d_down))
            .then(cmp(a.w_total, b.w_total))
            .then(a.count.cmp(&b.count))
    });
    let mut best = T::infinity();
    let mut kept = Vec::with_capacity(labels.len());
    for l in labels {
        if l.d_down < best {
            best = l.d_down;
            kept.push(l);
        }
    }
    kept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Objective {
    MinPower,
    MinDelay,
}

/// Knobs shared by both DP objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpOptions {
    /// Disable to run the unpruned search (for soundness checks only).
    pub prune: bool,
    /// Abort with [`Error::LabelCap`] if more labels are alive at one point.
    pub label_cap: Option<usize>,
}

impl Default for DpOptions {
    fn default() -> Self {
        Self {
            prune: true,
            label_cap: None,
        }
    }
}

/// Result of a DP run.
#[derive(Debug, Clone, PartialEq)]
pub struct DpOutcome<T> {
    /// Solution re-evaluated through the stage-delay evaluator.
    pub solution: RepeaterSolution<T>,
    /// Final delay as propagated through the labels.
    pub label_delay: T,
    /// Largest live label set seen at any sweep point.
    pub peak_labels: usize,
}

#[derive(Clone, Copy)]
struct TraceNode {
    parent: u32,
    cand: u32,
    width: u32,
}

fn span_lump<T: Scalar>(net: &Net<T>, a: T, b: T) -> StageLump<T> {
    let half = T::c(0.5);
    let (mut r, mut c, mut sd) = (T::zero(), T::zero(), T::zero());
    for p in net.pieces_between(a, b).iter().rev() {
        let pc = p.length * p.c;
        let pr = p.length * p.r;
        sd += (half * pc + c) * pr;
        c += pc;
        r += pr;
    }
    StageLump { r, c, self_delay: sd }
}

fn cross<T: Scalar>(labels: &mut [DpLabel<T>], span: &StageLump<T>) {
    for l in labels.iter_mut() {
        l.d_down += span.self_delay + span.r * l.c_load;
        l.c_load += span.c;
    }
}

fn run<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    cfg: &DpConfig<T>,
    objective: Objective,
    tau_t: Option<T>,
    opts: &DpOptions,
) -> Result<DpOutcome<T>> {
    let w_lib = &cfg.widths;
    let cands = &cfg.candidates;
    let mut arena: Vec<TraceNode> = Vec::new();
    let mut labels = vec![DpLabel::new(tech.c_o * net.receiver_width(), T::zero(), T::zero())];
    // any completion pays at least the driver intrinsic plus R_s/w_max on the current load
    let w_strongest = w_lib[w_lib.len() - 1].max(net.driver_width());
    let drive_floor = tech.r_s / w_strongest;
    let mut peak = 1usize;
    let mut prev = net.total_length();
    // Label sums round differently from the evaluator; keep knife-edge labels
    // and let the evaluator decide at the end.
    let label_tau = tau_t.map(|t| t * (T::one() + T::c(1e-12)));

    for (ci, &x) in cands.iter().enumerate().rev() {
        cross(&mut labels, &span_lump(net, x, prev));
        prev = x;

        let mut next: Vec<DpLabel<T>> = labels.iter().map(|l| DpLabel { pending: None, ..*l }).collect();
        for (wi, &w) in w_lib.iter().enumerate() {
            let fork = |l: &DpLabel<T>| DpLabel {
                c_load: tech.c_o * w,
                d_down: l.d_down + tech.intrinsic() + tech.r_s / w * l.c_load,
                w_total: l.w_total + w,
                count: l.count + 1,
                trace: l.trace,
                pending: Some((ci as u32, wi as u32)),
            };
            if opts.prune && objective == Objective::MinPower {
                // Forks of one width share c_load, so only their (w_total, d)
                // front can survive; labels arrive sorted by w_total.
                let mut best = T::infinity();
                for l in &labels {
                    let f = fork(l);
                    if f.d_down < best {
                        best = f.d_down;
                        next.push(f);
                    }
                }
            } else {
                next.extend(labels.iter().map(fork));
            }
        }
        if let Some(tau) = label_tau {
            next.retain(|l| l.d_down + tech.intrinsic() + drive_floor * l.c_load <= tau);
        }
        labels = if opts.prune {
            match objective {
                Objective::MinPower => prune_dominated(next),
                Objective::MinDelay => prune_delay(next),
            }
        } else {
            next
        };
        for l in labels.iter_mut() {
            if let Some((cand, width)) = l.pending.take() {
                arena.push(TraceNode {
                    parent: l.trace,
                    cand,
                    width,
                });
                l.trace = (arena.len() - 1) as u32;
            }
        }
        peak = peak.max(labels.len());
        if let Some(cap) = opts.label_cap {
            if labels.len() > cap {
                return Err(Error::LabelCap {
                    live: labels.len(),
                    cap,
                });
            }
        }
    }
    cross(&mut labels, &span_lump(net, T::zero(), prev));

    let mut finals: Vec<(T, &DpLabel<T>)> = labels
        .iter()
        .map(|l| (l.d_down + tech.intrinsic() + tech.r_s / net.driver_width() * l.c_load, l))
        .collect();
    match objective {
        Objective::MinPower => {
            let tau = label_tau.expect("min-power needs a target");
            finals.retain(|(d, _)| *d <= tau);
            finals.sort_by(|(da, a), (db, b)| {
                cmp(a.w_total, b.w_total)
                    .then(cmp(*da, *db))
                    .then(a.count.cmp(&b.count))
            });
        }
        Objective::MinDelay => finals.sort_by(|(da, a), (db, b)| {
            cmp(*da, *db)
                .then(cmp(a.w_total, b.w_total))
                .then(a.count.cmp(&b.count))
        }),
    }

    let rebuild = |label: &DpLabel<T>| {
        // parents run driver-to-receiver
        let mut repeaters = Vec::with_capacity(label.count as usize);
        let mut t = label.trace;
        while t != NO_TRACE {
            let node = arena[t as usize];
            repeaters.push(Repeater::new(cands[node.cand as usize], w_lib[node.width as usize]));
            t = node.parent;
        }
        RepeaterSolution::evaluate(tech, net, repeaters)
    };
    for (label_delay, label) in finals {
        let solution = rebuild(label)?;
        // the evaluator has the last word on feasibility at knife-edge targets
        if let Some(tau) = tau_t {
            if solution.delay > tau {
                continue;
            }
        }
        return Ok(DpOutcome {
            solution,
            label_delay,
            peak_labels: peak,
        });
    }
    Err(Error::Infeasible)
}

/// Minimum total width subject to `total_delay ≤ tau_t`.
pub fn dp_min_power<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    cfg: &DpConfig<T>,
    tau_t: T,
) -> Result<RepeaterSolution<T>> {
    dp_min_power_with(tech, net, cfg, tau_t, &DpOptions::default()).map(|o| o.solution)
}

pub fn dp_min_power_with<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    cfg: &DpConfig<T>,
    tau_t: T,
    opts: &DpOptions,
) -> Result<DpOutcome<T>> {
    if !(tau_t > T::zero()) {
        return Err(Error::Precondition("delay target must be > 0".into()));
    }
    run(tech, net, cfg, Objective::MinPower, Some(tau_t), opts)
}

/// Minimum delay over the search space; returns the solution and `τ_min`.
pub fn dp_min_delay<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    cfg: &DpConfig<T>,
) -> Result<(RepeaterSolution<T>, T)> {
    let out = dp_min_delay_with(tech, net, cfg, &DpOptions::default())?;
    let tau = out.solution.delay;
    Ok((out.solution, tau))
}

pub fn dp_min_delay_with<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    cfg: &DpConfig<T>,
    opts: &DpOptions,
) -> Result<DpOutcome<T>> {
    run(tech, net, cfg, Objective::MinDelay, None, opts)
}

/// Quadratic-scan Pareto filter, the reference for [`prune_dominated`].
#[doc(hidden)]
pub fn pareto_filter_naive<T: Scalar>(labels: &[DpLabel<T>]) -> Vec<DpLabel<T>> {
    let mut out: Vec<DpLabel<T>> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        let beaten = labels.iter().enumerate().any(|(j, o)| {
            if i == j || !o.dominates_or_equals(l) {
                return false;
            }
            let strict = o.c_load < l.c_load || o.d_down < l.d_down || o.w_total < l.w_total;
            // duplicates: keep the one with fewer repeaters, then the earliest
            strict || o.count < l.count || (o.count == l.count && j < i)
        });
        if !beaten {
            out.push(*l);
        }
    }
    out
}
