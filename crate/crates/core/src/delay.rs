//! Elmore delay of buffered stages and whole placements, and the
//! total-width power proxy.
//!
//! A stage is a driving repeater (switch-level resistor `R_s/w` plus output
//! parasitic `w·C_p`), a chain of π-lumped wire pieces, and the input
//! capacitance `C_o·w'` of the next repeater or the receiver.

use crate::error::{Error, Result};
use crate::net::{validate_placement, Net, Repeater, TechParams, WirePiece};
use crate::scalar::Scalar;

/// One repeater stage: driver width, receiver width and the wire between them.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSpec<T> {
    pub w_drive: T,
    /// `0` models a capacitance-free probe.
    pub w_recv: T,
    pub pieces: Vec<WirePiece<T>>,
}

/// Elmore delay of a single stage.
///
/// `R_s·C_p + (R_s/w_i)(Σlc + C_o·w_{i+1}) + (Σlr)·C_o·w_{i+1}
///  + Σ_j (½ l_j c_j + Σ_{h>j} l_h c_h)·r_j l_j`
pub fn stage_delay<T: Scalar>(tech: &TechParams<T>, stage: &StageSpec<T>) -> Result<T> {
    if !(stage.w_drive > T::zero()) {
        return Err(Error::Precondition(format!(
            "stage driver width must be > 0 (got {})",
            stage.w_drive
        )));
    }
    if stage.w_recv < T::zero() {
        return Err(Error::Precondition("stage receiver width must be >= 0".into()));
    }
    let load = tech.c_o * stage.w_recv;
    let half = T::c(0.5);
    let mut wire_c = T::zero();
    let mut wire_r = T::zero();
    let mut self_delay = T::zero();
    // receiver-to-driver so the downstream wire cap is a running sum
    for p in stage.pieces.iter().rev() {
        let pc = p.length * p.c;
        let pr = p.length * p.r;
        self_delay += (half * pc + wire_c) * pr;
        wire_c += pc;
        wire_r += pr;
    }
    Ok(tech.intrinsic() + tech.r_s / stage.w_drive * (wire_c + load) + wire_r * load + self_delay)
}

/// Split a net at the repeater positions into `n + 1` stages.
pub fn stages<T: Scalar>(net: &Net<T>, repeaters: &[Repeater<T>]) -> Vec<StageSpec<T>> {
    let n = repeaters.len();
    let mut out = Vec::with_capacity(n + 1);
    let mut from = T::zero();
    let mut w_drive = net.driver_width();
    for i in 0..=n {
        let (to, w_recv) = if i < n {
            (repeaters[i].x, repeaters[i].w)
        } else {
            (net.total_length(), net.receiver_width())
        };
        out.push(StageSpec {
            w_drive,
            w_recv,
            pieces: net.pieces_between(from, to),
        });
        from = to;
        w_drive = w_recv;
    }
    out
}

/// Total Elmore delay of a buffered net: the sum of all stage delays, with
/// the driver as stage 0's source and the receiver as the last load.
pub fn total_delay<T: Scalar>(tech: &TechParams<T>, net: &Net<T>, repeaters: &[Repeater<T>]) -> Result<T> {
    validate_placement(net, repeaters)?;
    let mut total = T::zero();
    for s in stages(net, repeaters) {
        total += stage_delay(tech, &s)?;
    }
    Ok(total)
}

/// Total repeater width; the power objective.
pub fn power_proxy<T: Scalar>(repeaters: &[Repeater<T>]) -> T {
    repeaters.iter().map(|r| r.w).sum()
}

/// Width-independent summary of one stage's wire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageLump<T> {
    /// Total wire resistance.
    pub r: T,
    /// Total wire capacitance.
    pub c: T,
    /// Distributed wire self-delay `Σ (½ l c + downstream) r l`.
    pub self_delay: T,
}

/// Lump each stage of a placement at fixed positions. Index `i` covers the
/// wire from repeater `i` (driver when `i = 0`) to repeater `i + 1`.
pub fn lump_stages<T: Scalar>(net: &Net<T>, positions: &[T]) -> Vec<StageLump<T>> {
    let n = positions.len();
    let half = T::c(0.5);
    let mut out = Vec::with_capacity(n + 1);
    let mut from = T::zero();
    for i in 0..=n {
        let to = if i < n { positions[i] } else { net.total_length() };
        let pieces = net.pieces_between(from, to);
        let (mut r, mut c, mut sd) = (T::zero(), T::zero(), T::zero());
        for p in pieces.iter().rev() {
            let pc = p.length * p.c;
            let pr = p.length * p.r;
            sd += (half * pc + c) * pr;
            c += pc;
            r += pr;
        }
        out.push(StageLump { r, c, self_delay: sd });
        from = to;
    }
    out
}

/// Widths extended with the driver at index 0 and receiver at index `n + 1`.
pub fn padded_widths<T: Scalar>(net: &Net<T>, widths: &[T]) -> Vec<T> {
    let mut w = Vec::with_capacity(widths.len() + 2);
    w.push(net.driver_width());
    w.extend_from_slice(widths);
    w.push(net.receiver_width());
    w
}

/// Total delay from stage lumps and padded widths (`w[0] = w_d`, `w[n+1] = w_r`).
pub fn delay_from_lumps<T: Scalar>(tech: &TechParams<T>, lumps: &[StageLump<T>], w: &[T]) -> T {
    debug_assert_eq!(w.len(), lumps.len() + 1);
    let mut total = T::zero();
    for (i, s) in lumps.iter().enumerate() {
        let load = tech.c_o * w[i + 1];
        total += tech.intrinsic() + tech.r_s / w[i] * (s.c + load) + s.r * load + s.self_delay;
    }
    total
}

/// `∂τ_total/∂w_i` for every repeater, given lumps and padded widths:
/// `C_o(R_{i−1} + R_s/w_{i−1}) − R_s(C_i + C_o·w_{i+1})/w_i²`.
pub fn width_gradient_lumped<T: Scalar>(tech: &TechParams<T>, lumps: &[StageLump<T>], w: &[T]) -> Vec<T> {
    let n = lumps.len() - 1;
    (1..=n)
        .map(|i| {
            tech.c_o * (lumps[i - 1].r + tech.r_s / w[i - 1])
                - tech.r_s * (lumps[i].c + tech.c_o * w[i + 1]) / (w[i] * w[i])
        })
        .collect()
}

/// `∂τ_total/∂w_i` for a placement.
pub fn width_gradient<T: Scalar>(tech: &TechParams<T>, net: &Net<T>, repeaters: &[Repeater<T>]) -> Result<Vec<T>> {
    validate_placement(net, repeaters)?;
    let pos: Vec<T> = repeaters.iter().map(|r| r.x).collect();
    let widths: Vec<T> = repeaters.iter().map(|r| r.w).collect();
    let lumps = lump_stages(net, &pos);
    Ok(width_gradient_lumped(tech, &lumps, &padded_widths(net, &widths)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Segment;

    fn unit_tech() -> TechParams<f64> {
        TechParams::new(1.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn gate_only_stage() {
        let s = StageSpec {
            w_drive: 1.0,
            w_recv: 1.0,
            pieces: vec![],
        };
        assert_eq!(stage_delay(&unit_tech(), &s).unwrap(), 1.0);
        let zero_wire = StageSpec {
            pieces: vec![WirePiece { length: 5.0, r: 0.0, c: 0.0 }],
            ..s.clone()
        };
        assert_eq!(stage_delay(&unit_tech(), &zero_wire).unwrap(), 1.0);
    }

    #[test]
    fn one_piece_stage() {
        // 1·(1 + 1) + 1·1 + ½·1·1 = 3.5
        let s = StageSpec {
            w_drive: 1.0,
            w_recv: 1.0,
            pieces: vec![WirePiece { length: 1.0, r: 1.0, c: 1.0 }],
        };
        assert_eq!(stage_delay(&unit_tech(), &s).unwrap(), 3.5);
    }

    #[test]
    fn rejects_bad_driver() {
        let s = StageSpec {
            w_drive: 0.0,
            w_recv: 1.0,
            pieces: vec![],
        };
        assert!(stage_delay(&unit_tech(), &s).is_err());
    }

    #[test]
    fn unbuffered_is_single_stage() {
        let tech = TechParams::new(7000.0, 2e-15, 1.5e-15, 1.0).unwrap();
        let net = Net::new(
            vec![Segment::new(1000.0, 0.075, 0.2e-15), Segment::new(2000.0, 0.045, 0.25e-15)],
            vec![],
            40.0,
            20.0,
        )
        .unwrap();
        let d = total_delay(&tech, &net, &[]).unwrap();
        let s = StageSpec {
            w_drive: 40.0,
            w_recv: 20.0,
            pieces: net.pieces_between(0.0, 3000.0),
        };
        assert_eq!(d, stage_delay(&tech, &s).unwrap());
    }

    #[test]
    fn split_equals_two_stages() {
        let tech = TechParams::new(7000.0, 2e-15, 1.5e-15, 1.0).unwrap();
        let net = Net::new(
            vec![Segment::new(1000.0, 0.075, 0.2e-15), Segment::new(1000.0, 0.075, 0.2e-15)],
            vec![],
            50.0,
            50.0,
        )
        .unwrap();
        let reps = [Repeater::new(1000.0, 80.0)];
        let left = StageSpec {
            w_drive: 50.0,
            w_recv: 80.0,
            pieces: net.pieces_between(0.0, 1000.0),
        };
        let right = StageSpec {
            w_drive: 80.0,
            w_recv: 50.0,
            pieces: net.pieces_between(1000.0, 2000.0),
        };
        let expect = stage_delay(&tech, &left).unwrap() + stage_delay(&tech, &right).unwrap();
        assert_eq!(total_delay(&tech, &net, &reps).unwrap(), expect);
    }

    #[test]
    fn lumped_route_matches_stage_route() {
        let tech = TechParams::new(7000.0, 2e-15, 1.5e-15, 1.0).unwrap();
        let net = Net::new(
            vec![
                Segment::new(1300.0, 0.075, 0.2e-15),
                Segment::new(2100.0, 0.045, 0.25e-15),
                Segment::new(1700.0, 0.075, 0.2e-15),
            ],
            vec![],
            30.0,
            60.0,
        )
        .unwrap();
        let reps = vec![Repeater::new(900.0, 70.0), Repeater::new(2600.0, 110.0), Repeater::new(4000.0, 45.0)];
        let a = total_delay(&tech, &net, &reps).unwrap();
        let pos: Vec<f64> = reps.iter().map(|r| r.x).collect();
        let w: Vec<f64> = reps.iter().map(|r| r.w).collect();
        let b = delay_from_lumps(&tech, &lump_stages(&net, &pos), &padded_widths(&net, &w));
        assert!((a - b).abs() <= 1e-13 * a);
    }

    #[test]
    fn power_sums() {
        assert_eq!(power_proxy::<f64>(&[]), 0.0);
        let r = [Repeater::new(1.0, 80.0), Repeater::new(2.0, 160.0)];
        assert_eq!(power_proxy(&r), 240.0);
    }

    #[test]
    fn works_in_single_precision() {
        let tech = TechParams::<f32>::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let s = StageSpec {
            w_drive: 1.0f32,
            w_recv: 1.0,
            pieces: vec![WirePiece { length: 1.0, r: 1.0, c: 1.0 }],
        };
        assert_eq!(stage_delay(&tech, &s).unwrap(), 3.5f32);
    }
}
