//! Randomized net generation, timing sweeps and strategy comparison.
//!
//! # Generator
//!
//! [`gen_net`] draws from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha
//! 0.3) through rand 0.8 `gen_range`/`gen_bool`, in this exact order:
//!
//! 1. segment count, `gen_range(n_min..=n_max)`;
//! 2. first layer, `gen_bool(0.5)` (true → metal4); layers then alternate;
//! 3. each segment length in driver-to-receiver order, `gen_range(l_min..=l_max)`;
//! 4. zone fraction, `gen_range(f_min..=f_max)`;
//! 5. zone start, `gen_range(0.0..=L − zone_len)`.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::{dp_min_delay, dp_min_power_with, width_library, width_range, DpConfig, DpOptions};
use crate::error::{Error, Result};
use crate::io::{LayerFile, TechConfig};
use crate::net::{ForbiddenZone, Net, RepeaterSolution, Segment, TechParams};
use crate::rip::{refine_only, rip, RipParams};

/// Parameters of the random net generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub n_segments: (usize, usize),
    /// Segment length range (µm).
    pub seg_length: (f64, f64),
    /// Zone length as a fraction of the net length.
    pub zone_fraction: (f64, f64),
    pub metal4: LayerFile,
    pub metal5: LayerFile,
    pub driver_width: f64,
    pub receiver_width: f64,
}

impl GenParams {
    pub fn new(seed: u64, cfg: &TechConfig) -> Self {
        Self {
            seed,
            n_segments: (4, 10),
            seg_length: (1000.0, 2500.0),
            zone_fraction: (0.20, 0.40),
            metal4: cfg.metal4,
            metal5: cfg.metal5,
            driver_width: 100.0,
            receiver_width: 100.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = self.n_segments.0 >= 1
            && self.n_segments.0 <= self.n_segments.1
            && self.seg_length.0 > 0.0
            && self.seg_length.0 <= self.seg_length.1
            && self.zone_fraction.0 >= 0.0
            && self.zone_fraction.0 <= self.zone_fraction.1
            && self.zone_fraction.1 < 1.0;
        if !ordered {
            return Err(Error::InvalidConfig("generator ranges must be ordered and positive".into()));
        }
        for l in [self.metal4, self.metal5] {
            if !(l.r_ohm_per_um > 0.0 && l.c_f_per_um > 0.0) {
                return Err(Error::InvalidConfig("layer RC must be > 0".into()));
            }
        }
        if !(self.driver_width > 0.0 && self.receiver_width > 0.0) {
            return Err(Error::InvalidConfig("terminal widths must be > 0".into()));
        }
        Ok(())
    }
}

/// Deterministic random net; see the module docs for the draw order.
pub fn gen_net(params: &GenParams) -> Result<Net<f64>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let m = rng.gen_range(params.n_segments.0..=params.n_segments.1);
    let metal4_first = rng.gen_bool(0.5);
    let mut segments = Vec::with_capacity(m);
    for k in 0..m {
        let layer = if (k % 2 == 0) == metal4_first { params.metal4 } else { params.metal5 };
        let len = rng.gen_range(params.seg_length.0..=params.seg_length.1);
        segments.push(Segment::new(len, layer.r_ohm_per_um, layer.c_f_per_um));
    }
    let total: f64 = segments.iter().map(|s| s.length).sum();
    let frac = rng.gen_range(params.zone_fraction.0..=params.zone_fraction.1);
    let zone_len = frac * total;
    let start = rng.gen_range(0.0..=total - zone_len);
    // keep the zone strictly inside the net even after rounding
    let end = (start + zone_len).min(total);
    Net::new(
        segments,
        vec![ForbiddenZone::new(start, end)],
        params.driver_width,
        params.receiver_width,
    )
}

/// Reference search space for τ_min: widths 10u..400u step 10u, candidates
/// every 50 µm.
pub fn reference_config(net: &Net<f64>) -> Result<DpConfig<f64>> {
    DpConfig::uniform(net, width_range(10.0, 400.0, 10.0), 50.0)
}

/// Minimum achievable delay under `reference`.
pub fn compute_tau_min(tech: &TechParams<f64>, net: &Net<f64>, reference: &DpConfig<f64>) -> Result<f64> {
    Ok(dp_min_delay(tech, net, reference)?.1)
}

/// `n` evenly spaced ratios over `[1.05, 2.05]`, both ends included.
pub fn target_ratios(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|k| 1.05 + (k as f64) / ((n - 1) as f64))
        .collect()
}

/// How a sweep row was produced.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyKind {
    Rip(RipParams<f64>),
    /// Coarse DP followed by REFINE only; continuous widths.
    Refine(RipParams<f64>),
    Dp { widths: Vec<f64>, loc_step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub id: String,
    pub kind: StrategyKind,
}

/// Candidate spacing of the DP baselines (µm).
pub const DP_LOC_STEP: f64 = 200.0;

impl Strategy {
    pub fn rip() -> Self {
        Self {
            id: "rip".into(),
            kind: StrategyKind::Rip(RipParams::default()),
        }
    }

    /// Size-`size` library starting at 10u with granularity `g`.
    pub fn dp_library(size: usize, g: f64) -> Self {
        Self {
            id: format!("dp-lib{size}-g{g}"),
            kind: StrategyKind::Dp {
                widths: width_library(10.0, size, g),
                loc_step: DP_LOC_STEP,
            },
        }
    }

    /// Fixed range 10u..400u with granularity `g`.
    pub fn dp_range(g: f64) -> Self {
        Self {
            id: format!("dp-range-g{g}"),
            kind: StrategyKind::Dp {
                widths: width_range(10.0, 400.0, g),
                loc_step: DP_LOC_STEP,
            },
        }
    }

    /// Parse a strategy id: `rip`, `refine`, `dp` (size-10 library, g = 10u),
    /// `dp-lib<N>-g<G>` or `dp-range-g<G>`.
    pub fn parse(id: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unknown strategy '{id}'"));
        let num = |s: &str| s.parse::<f64>().ok().filter(|v| *v > 0.0).ok_or_else(bad);
        match id {
            "rip" => Ok(Self::rip()),
            "refine" => Ok(Self {
                id: "refine".into(),
                kind: StrategyKind::Refine(RipParams::default()),
            }),
            "dp" => Ok(Self {
                id: "dp".into(),
                ..Self::dp_library(10, 10.0)
            }),
            _ => {
                if let Some(g) = id.strip_prefix("dp-range-g") {
                    let mut s = Self::dp_range(num(g)?);
                    s.id = id.to_string();
                    Ok(s)
                } else if let Some(rest) = id.strip_prefix("dp-lib") {
                    let (n, g) = rest.split_once("-g").ok_or_else(bad)?;
                    let n: usize = n.parse().ok().filter(|&n| n > 0).ok_or_else(bad)?;
                    let mut s = Self::dp_library(n, num(g)?);
                    s.id = id.to_string();
                    Ok(s)
                } else {
                    Err(bad())
                }
            }
        }
    }

    /// Run on one target; `Ok(None)` when no feasible solution was found.
    pub fn solve(
        &self,
        tech: &TechParams<f64>,
        net: &Net<f64>,
        tau_t: f64,
    ) -> Result<Option<RepeaterSolution<f64>>> {
        let res = match &self.kind {
            StrategyKind::Rip(p) => rip(tech, net, tau_t, p).map(|o| o.solution),
            StrategyKind::Refine(p) => refine_only(tech, net, tau_t, p),
            StrategyKind::Dp { widths, loc_step } => {
                let cfg = DpConfig::uniform(net, widths.clone(), *loc_step)?;
                dp_min_power_with(tech, net, &cfg, tau_t, &DpOptions::default()).map(|o| o.solution)
            }
        };
        match res {
            Ok(s) => Ok(Some(s)),
            Err(Error::Infeasible) | Err(Error::NoConverge(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// One (net, target, strategy) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub net_id: String,
    pub ratio: f64,
    pub strategy: String,
    pub feasible: bool,
    pub total_width_u: Option<f64>,
    pub delay_s: Option<f64>,
    pub runtime_s: f64,
}

/// Sweep rows of one or more nets plus the τ_min anchoring of each.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// `(net_id, τ_min, reference fingerprint)` per net.
    pub anchors: Vec<(String, f64, String)>,
}

/// Run every strategy on `n_targets` targets of one net.
///
/// Cells run in parallel; rows come back ordered by (ratio, strategy id).
/// A claimed solution counts as feasible only if its re-evaluated delay is
/// within `τ_t`.
pub fn sweep(
    tech: &TechParams<f64>,
    net: &Net<f64>,
    net_id: &str,
    strategies: &[Strategy],
    n_targets: usize,
) -> Result<SweepReport> {
    if n_targets < 2 {
        return Err(Error::InvalidConfig("n_targets must be >= 2".into()));
    }
    if strategies.is_empty() {
        return Err(Error::InvalidConfig("no strategies given".into()));
    }
    let reference = reference_config(net)?;
    let tau_min = compute_tau_min(tech, net, &reference)?;
    let ratios = target_ratios(n_targets);
    let cells: Vec<(f64, &Strategy)> = ratios
        .iter()
        .flat_map(|&r| strategies.iter().map(move |s| (r, s)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(ratio, s)| run_cell(tech, net, net_id, tau_min, ratio, s))
        .collect::<Result<Vec<_>>>()?;
    let mut report = SweepReport {
        rows,
        anchors: vec![(net_id.to_string(), tau_min, reference.fingerprint())],
    };
    report.sort_rows();
    Ok(report)
}

fn run_cell(
    tech: &TechParams<f64>,
    net: &Net<f64>,
    net_id: &str,
    tau_min: f64,
    ratio: f64,
    s: &Strategy,
) -> Result<SweepRow> {
    let tau_t = ratio * tau_min;
    let t0 = Instant::now();
    let sol = s.solve(tech, net, tau_t)?;
    let runtime_s = t0.elapsed().as_secs_f64();
    // re-validate through the evaluator rather than trusting bookkeeping
    let checked = match sol {
        Some(sol) => Some(RepeaterSolution::evaluate(tech, net, sol.repeaters)?),
        None => None,
    };
    let feasible = checked.as_ref().is_some_and(|c| c.delay <= tau_t);
    Ok(SweepRow {
        net_id: net_id.to_string(),
        ratio,
        strategy: s.id.clone(),
        feasible,
        total_width_u: checked.as_ref().map(|c| c.total_width),
        delay_s: checked.as_ref().map(|c| c.delay),
        runtime_s,
    })
}

/// τ_min anchoring of one net, written next to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub net_id: String,
    pub tau_min_s: f64,
    pub reference: String,
}

impl SweepReport {
    /// Append and restore the (net_id, ratio, strategy) order.
    pub fn extend(&mut self, other: SweepReport) {
        self.rows.extend(other.rows);
        self.anchors.extend(other.anchors);
        self.sort_rows();
    }

    pub fn sort_rows(&mut self) {
        self.rows.sort_by(|a, b| {
            a.net_id
                .cmp(&b.net_id)
                .then(a.ratio.total_cmp(&b.ratio))
                .then(a.strategy.cmp(&b.strategy))
        });
        self.anchors.sort_by(|a, b| a.0.cmp(&b.0));
    }

    pub fn anchors_json(&self) -> String {
        let v: Vec<Anchor> = self
            .anchors
            .iter()
            .map(|(id, t, f)| Anchor {
                net_id: id.clone(),
                tau_min_s: *t,
                reference: f.clone(),
            })
            .collect();
        serde_json::to_string_pretty(&v).expect("anchors serialize") + "\n"
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let rows = r.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?;
        Ok(Self { rows, anchors: vec![] })
    }
}

/// Per-net comparison of two strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetComparison {
    pub net_id: String,
    /// Targets where both strategies are feasible.
    pub both_feasible: usize,
    pub delta_max_pct: Option<f64>,
    pub delta_mean_pct: Option<f64>,
    /// Baseline rows that were infeasible or violated the target.
    pub v_baseline: usize,
    /// Candidate rows that were infeasible or violated the target.
    pub v_candidate: usize,
}

/// Savings of `candidate` over `baseline`:
/// `Δ = (W_baseline − W_candidate) / W_baseline · 100`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub candidate: String,
    pub nets: Vec<NetComparison>,
    /// Largest Δ over all rows where both are feasible.
    pub delta_max_pct: Option<f64>,
    /// Mean Δ over all rows where both are feasible.
    pub delta_mean_pct: Option<f64>,
    /// Average per-net violation count of the baseline.
    pub v_baseline_mean: f64,
    pub v_candidate_total: usize,
    /// `mean(T_baseline) / mean(T_candidate)`.
    pub speedup: f64,
    /// Mean Δ per target ratio, in ratio order.
    pub delta_by_ratio: Vec<(f64, Option<f64>)>,
}

fn delta(w_base: f64, w_cand: f64) -> f64 {
    if w_base == 0.0 {
        0.0
    } else {
        (w_base - w_cand) / w_base * 100.0
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Baseline and candidate rows of one (net, ratio) cell.
type Pair<'a> = (Option<&'a SweepRow>, Option<&'a SweepRow>);

fn ratio_key(r: f64) -> u64 {
    r.to_bits()
}

/// Pair rows of `baseline` and `candidate` by (net_id, ratio) and aggregate.
pub fn compare(rows: &[SweepRow], baseline: &str, candidate: &str) -> Result<Comparison> {
    use std::collections::BTreeMap;
    let mut by_net: BTreeMap<&str, BTreeMap<u64, Pair>> = BTreeMap::new();
    for r in rows {
        let slot = by_net
            .entry(r.net_id.as_str())
            .or_default()
            .entry(ratio_key(r.ratio))
            .or_default();
        if r.strategy == baseline {
            slot.0 = Some(r);
        } else if r.strategy == candidate {
            slot.1 = Some(r);
        }
    }
    let mut nets = Vec::new();
    let mut all = Vec::new();
    let mut per_ratio: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    let (mut t_base, mut t_cand) = (Vec::new(), Vec::new());
    let mut v_cand_total = 0;
    for (net_id, cells) in &by_net {
        let mut ds = Vec::new();
        let (mut vb, mut vc) = (0, 0);
        for (&key, (b, c)) in cells {
            let (Some(b), Some(c)) = (b, c) else { continue };
            t_base.push(b.runtime_s);
            t_cand.push(c.runtime_s);
            vb += usize::from(!b.feasible);
            vc += usize::from(!c.feasible);
            let entry = per_ratio.entry(key).or_insert((b.ratio, Vec::new()));
            if b.feasible && c.feasible {
                let d = delta(b.total_width_u.unwrap_or(0.0), c.total_width_u.unwrap_or(0.0));
                ds.push(d);
                entry.1.push(d);
            }
        }
        if vb == 0 && vc == 0 && ds.is_empty() && t_base.is_empty() {
            continue;
        }
        all.extend_from_slice(&ds);
        v_cand_total += vc;
        nets.push(NetComparison {
            net_id: net_id.to_string(),
            both_feasible: ds.len(),
            delta_max_pct: ds.iter().copied().reduce(f64::max),
            delta_mean_pct: mean(&ds),
            v_baseline: vb,
            v_candidate: vc,
        });
    }
    if nets.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no paired rows for strategies '{baseline}' and '{candidate}'"
        )));
    }
    let mut delta_by_ratio: Vec<(f64, Option<f64>)> =
        per_ratio.into_values().map(|(r, v)| (r, mean(&v))).collect();
    delta_by_ratio.sort_by(|a, b| a.0.total_cmp(&b.0));
    let speedup = match (mean(&t_base), mean(&t_cand)) {
        (Some(b), Some(c)) if c > 0.0 => b / c,
        _ => f64::NAN,
    };
    Ok(Comparison {
        baseline: baseline.to_string(),
        candidate: candidate.to_string(),
        delta_max_pct: all.iter().copied().reduce(f64::max),
        delta_mean_pct: mean(&all),
        v_baseline_mean: nets.iter().map(|n| n.v_baseline as f64).sum::<f64>() / nets.len() as f64,
        v_candidate_total: v_cand_total,
        speedup,
        delta_by_ratio,
        nets,
    })
}
