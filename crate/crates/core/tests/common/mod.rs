//! Test-side oracles, written without the crate's own evaluators.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rip_core::{ForbiddenZone, Net, Net64, Repeater, Segment, Tech64, TechParams};

pub const M4: (f64, f64) = (0.075, 0.2e-15);
pub const M5: (f64, f64) = (0.045, 0.25e-15);

pub fn tech() -> Tech64 {
    TechParams::new(21000.0, 2e-15 / 3.0, 0.5e-15, 1.0).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Elmore delay of the whole net expanded into one flat RC ladder per stage.
///
/// A stage is a driver resistance `R_s/w` charging its own `C_p·w`, then each
/// wire piece cut into `splits` equal π-sections, then the next input
/// `C_o·w`. The delay to the last node is `Σ_k R_k · Σ_{m≥k} C_m`.
pub fn ladder_delay(tech: &Tech64, net: &Net64, reps: &[Repeater<f64>], splits: usize) -> f64 {
    let len: f64 = net.segments().iter().map(|s| s.length).sum();
    let mut bounds = vec![0.0];
    bounds.extend(reps.iter().map(|r| r.x));
    bounds.push(len);
    let mut widths = vec![net.driver_width()];
    widths.extend(reps.iter().map(|r| r.w));
    widths.push(net.receiver_width());

    let mut total = 0.0;
    for k in 0..bounds.len() - 1 {
        let (a, b) = (bounds[k], bounds[k + 1]);
        let mut res = vec![tech.r_s / widths[k]];
        let mut caps = vec![tech.c_p * widths[k]];
        let mut start = 0.0;
        for s in net.segments() {
            let end = start + s.length;
            let lo = a.max(start);
            let hi = b.min(end);
            if hi > lo {
                let l = (hi - lo) / splits as f64;
                for _ in 0..splits {
                    *caps.last_mut().unwrap() += 0.5 * s.c * l;
                    res.push(s.r * l);
                    caps.push(0.5 * s.c * l);
                }
            }
            start = end;
        }
        *caps.last_mut().unwrap() += tech.c_o * widths[k + 1];
        let mut downstream = 0.0;
        let mut d = 0.0;
        for i in (0..res.len()).rev() {
            downstream += caps[i];
            d += res[i] * downstream;
        }
        total += d;
    }
    total
}

/// Random multi-layer net with zero or one forbidden zone.
pub fn random_net(r: &mut ChaCha8Rng, max_segments: usize) -> Net64 {
    let m = r.gen_range(1..=max_segments);
    let segs: Vec<Segment<f64>> = (0..m)
        .map(|_| {
            let (rr, cc) = if r.gen_bool(0.5) { M4 } else { M5 };
            Segment::new(r.gen_range(300.0..3000.0), rr, cc)
        })
        .collect();
    let len: f64 = segs.iter().map(|s| s.length).sum();
    let zones = if r.gen_bool(0.5) {
        let zl = r.gen_range(0.05..0.3) * len;
        let zs = r.gen_range(0.0..len - zl);
        vec![ForbiddenZone::new(zs, zs + zl)]
    } else {
        vec![]
    };
    Net::new(segs, zones, r.gen_range(10.0..300.0), r.gen_range(10.0..300.0)).unwrap()
}

/// `k` distinct legal positions, sorted.
pub fn random_positions(r: &mut ChaCha8Rng, net: &Net64, k: usize) -> Vec<f64> {
    let len = net.total_length();
    let mut out: Vec<f64> = Vec::new();
    let mut guard = 0;
    while out.len() < k && guard < 10_000 {
        guard += 1;
        let x = r.gen_range(1.0..len - 1.0).round();
        if net.is_legal_position(x) && out.iter().all(|&y| (y - x).abs() >= 1.0) {
            out.push(x);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Exhaustive search over every assignment of (nothing | one width) per
/// candidate, evaluated with [`ladder_delay`]. Returns the minimum delay and,
/// when `tau_t` is given, the minimum total width among assignments within it.
pub fn brute_force(
    tech: &Tech64,
    net: &Net64,
    widths: &[f64],
    cands: &[f64],
    tau_t: Option<f64>,
) -> (f64, Option<f64>) {
    let base = widths.len() + 1;
    let total = base.pow(cands.len() as u32);
    let mut best_delay = f64::INFINITY;
    let mut best_power: Option<f64> = None;
    for code in 0..total {
        let mut c = code;
        let mut reps = Vec::new();
        for &x in cands {
            let pick = c % base;
            c /= base;
            if pick > 0 {
                reps.push(Repeater::new(x, widths[pick - 1]));
            }
        }
        let d = ladder_delay(tech, net, &reps, 1);
        best_delay = best_delay.min(d);
        if let Some(t) = tau_t {
            if d <= t {
                let w: f64 = reps.iter().map(|r| r.w).sum();
                best_power = Some(best_power.map_or(w, |b: f64| b.min(w)));
            }
        }
    }
    (best_delay, best_power)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
