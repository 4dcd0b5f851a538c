//! The hybrid insertion pipeline: coarse DP, analytic refinement, a
//! synthesized library and candidate set, then a fine DP.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analytic::{refine, RefineOutcome, RefineParams};
use crate::dp::{dp_min_delay, dp_min_power_with, DpConfig, DpOptions};
use crate::error::{Error, Result};
use crate::net::{Net, RepeaterSolution, TechParams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct RipParams<T> {
    /// Coarse DP library (multiples of `u`).
    pub coarse_widths: Vec<T>,
    /// Coarse DP candidate spacing (µm).
    pub coarse_loc_step: T,
    /// Granularity of the synthesized library.
    pub round_quantum: T,
    /// Extra candidates on each side of a refined position.
    pub neighbor_count: usize,
    /// Spacing of those extra candidates (µm).
    pub neighbor_step: T,
    pub refine: RefineParams<T>,
    /// Also put each rounded width's ±1 quantum neighbours in the library.
    pub neighbor_widths: bool,
    pub dp: DpOptions,
}

impl<T: Scalar> Default for RipParams<T> {
    fn default() -> Self {
        Self {
            coarse_widths: [80.0, 160.0, 240.0, 320.0, 400.0].iter().map(|&w| T::c(w)).collect(),
            coarse_loc_step: T::c(200.0),
            round_quantum: T::c(10.0),
            neighbor_count: 10,
            neighbor_step: T::c(50.0),
            refine: RefineParams::default(),
            neighbor_widths: false,
            dp: DpOptions::default(),
        }
    }
}

impl<T: Scalar> RipParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_widths.is_empty()
            || self.coarse_widths.iter().any(|&w| !(w > T::zero()))
            || self.coarse_widths.windows(2).any(|p| !(p[1] > p[0]))
        {
            return Err(Error::InvalidConfig(
                "coarse widths must be positive and strictly increasing".into(),
            ));
        }
        if !(self.coarse_loc_step > T::zero())
            || !(self.round_quantum > T::zero())
            || !(self.neighbor_step > T::zero())
        {
            return Err(Error::InvalidConfig("RIP steps and quantum must be > 0".into()));
        }
        self.refine.validate()
    }
}

fn round_to<T: Scalar>(w: T, q: T) -> T {
    ((w / q).round() * q).max(q)
}

fn sorted_dedup<T: Scalar>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v.dedup();
    v
}

/// Library from the refined widths rounded to the nearest quantum, and
/// candidates within `neighbor_count` steps of each refined position.
pub fn synthesize_config<T: Scalar>(
    net: &Net<T>,
    refined: &RepeaterSolution<T>,
    params: &RipParams<T>,
) -> Result<DpConfig<T>> {
    if refined.is_empty() {
        return Err(Error::Precondition("cannot synthesize a library from zero repeaters".into()));
    }
    let q = params.round_quantum;
    let mut widths: Vec<T> = refined.repeaters.iter().map(|r| round_to(r.w, q)).collect();
    if params.neighbor_widths {
        let extra: Vec<T> = widths.iter().flat_map(|&w| [w - q, w + q]).filter(|&w| w >= q).collect();
        widths.extend(extra);
    }
    let widths = sorted_dedup(widths);

    let k = params.neighbor_count as i64;
    let mut cands = Vec::new();
    for r in &refined.repeaters {
        for j in -k..=k {
            let x = r.x + params.neighbor_step * T::from_i64(j).unwrap();
            if net.is_legal_position(x) {
                cands.push(x);
            }
        }
    }
    let cands = sorted_dedup(cands);
    if cands.is_empty() {
        return Err(Error::InvalidConfig("synthesized candidate set is empty".into()));
    }
    DpConfig::new(widths, cands, net)
}

/// Per-stage record for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: String,
    pub feasible: bool,
    pub total_width_u: Option<f64>,
    pub delay_s: Option<f64>,
    pub repeaters: usize,
    pub runtime_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl StageTrace {
    fn of<T: Scalar>(stage: &str, sol: Option<&RepeaterSolution<T>>, started: Instant) -> Self {
        Self {
            stage: stage.to_string(),
            feasible: sol.is_some(),
            total_width_u: sol.map(|s| s.total_width.f64()),
            delay_s: sol.map(|s| s.delay.f64()),
            repeaters: sol.map_or(0, |s| s.len()),
            runtime_s: started.elapsed().as_secs_f64(),
            note: None,
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Which stage produced the returned solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalSource {
    Coarse,
    Fine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RipOutcome<T> {
    pub solution: RepeaterSolution<T>,
    pub source: FinalSource,
    pub stage_trace: Vec<StageTrace>,
    /// Coarse DP result, when that stage met the target.
    pub coarse: Option<RepeaterSolution<T>>,
    pub refined: Option<RefineOutcome<T>>,
}

/// Run the full pipeline for target `tau_t`.
pub fn rip<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    tau_t: T,
    params: &RipParams<T>,
) -> Result<RipOutcome<T>> {
    params.validate()?;
    if !(tau_t > T::zero()) {
        return Err(Error::Precondition("delay target must be > 0".into()));
    }
    let mut trace = Vec::new();

    // 1: coarse DP
    let t0 = Instant::now();
    let coarse_cfg = DpConfig::uniform(net, params.coarse_widths.clone(), params.coarse_loc_step)?;
    let coarse = match dp_min_power_with(tech, net, &coarse_cfg, tau_t, &params.dp) {
        Ok(o) => Some(o.solution),
        Err(Error::Infeasible) => None,
        Err(e) => return Err(e),
    };
    let seed = match &coarse {
        Some(s) => {
            trace.push(StageTrace::of("coarse_dp", Some(s), t0));
            s.clone()
        }
        None => {
            // continuous widths may still reach the target from the min-delay placement
            let (s, _) = dp_min_delay(tech, net, &coarse_cfg)?;
            trace.push(StageTrace::of::<T>("coarse_dp", None, t0).note("infeasible; seeding with min-delay placement"));
            s
        }
    };

    if seed.is_empty() {
        let sol = coarse.clone().ok_or(Error::Infeasible)?;
        return Ok(RipOutcome {
            solution: sol,
            source: FinalSource::Coarse,
            stage_trace: trace,
            coarse,
            refined: None,
        });
    }

    // 2: refine
    let t1 = Instant::now();
    let refined = match refine(tech, net, &seed, tau_t, &params.refine) {
        Ok(r) => {
            let mut st = StageTrace::of("refine", Some(&r.solution), t1);
            if let Some(f) = &r.flag {
                st = st.note(f.clone());
            }
            trace.push(st);
            Some(r)
        }
        Err(e) => {
            trace.push(StageTrace::of::<T>("refine", None, t1).note(e.to_string()));
            None
        }
    };
    let around = refined.as_ref().map_or(&seed, |r| &r.solution);

    // 3 + 4: synthesize and run the fine DP, widening the library once on failure
    let t2 = Instant::now();
    let mut fine = None;
    match synthesize_config(net, around, params) {
        Ok(cfg) => {
            fine = match dp_min_power_with(tech, net, &cfg, tau_t, &params.dp) {
                Ok(o) => Some(o.solution),
                Err(Error::Infeasible) => None,
                Err(e) => return Err(e),
            };
            // Rounding every refined width up would cost about this much; a
            // wider fine answer means rounding down hurt, so retry as well.
            let q = params.round_quantum;
            let ceil_total: T = around.repeaters.iter().map(|r| (r.w / q).ceil() * q).sum();
            if fine.as_ref().is_none_or(|f| f.total_width > ceil_total) {
                let mut widths = cfg.widths().to_vec();
                widths.extend(around.repeaters.iter().map(|r| {
                    let up = (r.w / q).ceil() * q;
                    if up > round_to(r.w, q) { up } else { up + q }
                }));
                let widths = sorted_dedup(widths);
                let wide = DpConfig::new(widths, cfg.candidates().to_vec(), net)?;
                match dp_min_power_with(tech, net, &wide, tau_t, &params.dp) {
                    // the widened library is a superset, so this is never wider
                    Ok(o) => fine = Some(o.solution),
                    Err(Error::Infeasible) => {}
                    Err(e) => return Err(e),
                }
            }
            trace.push(StageTrace::of("fine_dp", fine.as_ref(), t2));
        }
        Err(e) => trace.push(StageTrace::of::<T>("fine_dp", None, t2).note(e.to_string())),
    }

    // return the narrower feasible answer of coarse and fine
    let (solution, source) = match (fine, coarse.clone()) {
        (Some(f), Some(c)) => {
            if c.total_width < f.total_width || (c.total_width == f.total_width && c.delay < f.delay) {
                (c, FinalSource::Coarse)
            } else {
                (f, FinalSource::Fine)
            }
        }
        (Some(f), None) => (f, FinalSource::Fine),
        (None, Some(c)) => (c, FinalSource::Coarse),
        (None, None) => return Err(Error::Infeasible),
    };
    if solution.delay > tau_t {
        return Err(Error::Infeasible);
    }
    Ok(RipOutcome {
        solution,
        source,
        stage_trace: trace,
        coarse,
        refined,
    })
}

/// Coarse DP followed by REFINE only; widths stay continuous and the
/// delay sits on the target up to solver tolerance.
pub fn refine_only<T: Scalar>(
    tech: &TechParams<T>,
    net: &Net<T>,
    tau_t: T,
    params: &RipParams<T>,
) -> Result<RepeaterSolution<T>> {
    params.validate()?;
    let cfg = DpConfig::uniform(net, params.coarse_widths.clone(), params.coarse_loc_step)?;
    let seed = match dp_min_power_with(tech, net, &cfg, tau_t, &params.dp) {
        Ok(o) => o.solution,
        Err(Error::Infeasible) => dp_min_delay(tech, net, &cfg)?.0,
        Err(e) => return Err(e),
    };
    if seed.is_empty() {
        return if seed.delay <= tau_t { Ok(seed) } else { Err(Error::Infeasible) };
    }
    Ok(refine(tech, net, &seed, tau_t, &params.refine)?.solution)
}
