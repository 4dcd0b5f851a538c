//! Multi-layer two-pin nets: per-segment RC, forbidden zones and the
//! position arithmetic shared by the evaluators and solvers.
//!
//! Units are fixed throughout the crate: lengths in µm, resistance in ohm,
//! capacitance in farad, delay in seconds, and repeater widths as real
//! multiples of the minimal width `u`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Unit-width repeater device constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechParams<T> {
    /// Output resistance of a unit-width repeater (ohm · u).
    pub r_s: T,
    /// Input capacitance per unit width (F/u).
    pub c_o: T,
    /// Output parasitic capacitance per unit width (F/u).
    pub c_p: T,
    /// Minimal repeater width.
    pub u: T,
}

impl<T: Scalar> TechParams<T> {
    pub fn new(r_s: T, c_o: T, c_p: T, u: T) -> Result<Self> {
        let tech = Self { r_s, c_o, c_p, u };
        tech.validate()?;
        Ok(tech)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_s > T::zero()) {
            return Err(Error::InvalidTech("R_s must be > 0".into()));
        }
        if !(self.c_o > T::zero()) {
            return Err(Error::InvalidTech("C_o must be > 0".into()));
        }
        if !(self.c_p >= T::zero()) {
            return Err(Error::InvalidTech("C_p must be >= 0".into()));
        }
        if !(self.u > T::zero()) {
            return Err(Error::InvalidTech("u must be > 0".into()));
        }
        Ok(())
    }

    /// Width-independent intrinsic delay `R_s·C_p` of any repeater or driver.
    #[inline]
    pub fn intrinsic(&self) -> T {
        self.r_s * self.c_p
    }
}

/// A routed wire segment with uniform per-unit-length RC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment<T> {
    pub length: T,
    /// ohm/µm
    pub r: T,
    /// F/µm
    pub c: T,
}

impl<T: Scalar> Segment<T> {
    pub fn new(length: T, r: T, c: T) -> Self {
        Self { length, r, c }
    }
}

/// Open interval `(start, end)` in which no repeater may be placed. The
/// endpoints themselves are legal placements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForbiddenZone<T> {
    pub start: T,
    pub end: T,
}

impl<T: Scalar> ForbiddenZone<T> {
    pub fn new(start: T, end: T) -> Self {
        Self { start, end }
    }

    #[inline]
    pub fn contains(&self, x: T) -> bool {
        x > self.start && x < self.end
    }

    pub fn len(&self) -> T {
        self.end - self.start
    }
}

/// A uniform wire piece: the `(r, c, l)` triple of a stage between two
/// consecutive repeaters, driver side first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WirePiece<T> {
    pub length: T,
    pub r: T,
    pub c: T,
}

/// Which side of a point to look at. `Left` is toward the driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Ordered heterogeneous two-pin net.
///
/// Always valid once constructed: segment RC positive, zones sorted,
/// disjoint and inside `[0, L]`, driver and receiver widths positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Net<T> {
    segments: Vec<Segment<T>>,
    zones: Vec<ForbiddenZone<T>>,
    w_d: T,
    w_r: T,
    /// `starts[k]` is the position of segment `k`'s driver-side end;
    /// `starts[m]` is the total length.
    starts: Vec<T>,
}

impl<T: Scalar> Net<T> {
    pub fn new(
        segments: Vec<Segment<T>>,
        mut zones: Vec<ForbiddenZone<T>>,
        w_d: T,
        w_r: T,
    ) -> Result<Self> {
        zones.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap_or(std::cmp::Ordering::Equal));
        validate_net(&segments, &zones, w_d, w_r)?;
        let mut starts = Vec::with_capacity(segments.len() + 1);
        let mut acc = T::zero();
        starts.push(acc);
        for s in &segments {
            acc += s.length;
            starts.push(acc);
        }
        Ok(Self {
            segments,
            zones,
            w_d,
            w_r,
            starts,
        })
    }

    /// Single-segment net without zones.
    pub fn uniform(length: T, r: T, c: T, w_d: T, w_r: T) -> Result<Self> {
        Self::new(vec![Segment::new(length, r, c)], vec![], w_d, w_r)
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn zones(&self) -> &[ForbiddenZone<T>] {
        &self.zones
    }

    pub fn driver_width(&self) -> T {
        self.w_d
    }

    pub fn receiver_width(&self) -> T {
        self.w_r
    }

    /// Interior segment boundaries (excluding 0 and L).
    pub fn boundaries(&self) -> &[T] {
        &self.starts[1..self.segments.len()]
    }

    pub fn total_length(&self) -> T {
        self.starts[self.segments.len()]
    }

    /// Re-check every invariant. Always `Ok` for a net built through [`Net::new`].
    pub fn validate(&self) -> Result<()> {
        validate_net(&self.segments, &self.zones, self.w_d, self.w_r)
    }

    /// Index of the segment containing `x` on the given side.
    fn segment_index(&self, x: T, side: Side) -> usize {
        let m = self.segments.len();
        // first k with starts[k+1] > x (right) / >= x (left)
        let ends = &self.starts[1..];
        let k = match side {
            Side::Right => ends.partition_point(|&e| e <= x),
            Side::Left => ends.partition_point(|&e| e < x),
        };
        k.min(m - 1)
    }

    /// Visit each uniform piece of wire strictly between `a` and `b`,
    /// driver side first. Zero-length overlaps are skipped.
    pub fn for_each_piece(&self, a: T, b: T, mut f: impl FnMut(WirePiece<T>)) {
        if !(b > a) {
            return;
        }
        let mut k = self.segment_index(a, Side::Right);
        while k < self.segments.len() {
            let lo = self.starts[k].max(a);
            let hi = self.starts[k + 1].min(b);
            if hi > lo {
                let s = &self.segments[k];
                f(WirePiece {
                    length: hi - lo,
                    r: s.r,
                    c: s.c,
                });
            }
            if self.starts[k + 1] >= b {
                break;
            }
            k += 1;
        }
    }

    pub fn pieces_between(&self, a: T, b: T) -> Vec<WirePiece<T>> {
        let mut out = Vec::new();
        self.for_each_piece(a, b, |p| out.push(p));
        out
    }

    /// Lumped `(R, C)` of the wire between `a` and `b`.
    pub fn rc_between(&self, a: T, b: T) -> Result<(T, T)> {
        if a > b {
            return Err(Error::Precondition(format!(
                "rc_between requires a <= b (got a={a}, b={b})"
            )));
        }
        let (mut r, mut c) = (T::zero(), T::zero());
        self.for_each_piece(a, b, |p| {
            r += p.r * p.length;
            c += p.c * p.length;
        });
        Ok((r, c))
    }

    /// Per-unit-length `(r, c)` of the segment touching `x` on `side`.
    pub fn unit_rc_at(&self, x: T, side: Side) -> Result<(T, T)> {
        let len = self.total_length();
        if x < T::zero() || x > len {
            return Err(Error::Precondition(format!("position {x} outside [0, {len}]")));
        }
        match side {
            Side::Left if x <= T::zero() => {
                return Err(Error::Precondition("no wire to the left of the driver".into()))
            }
            Side::Right if x >= len => {
                return Err(Error::Precondition("no wire to the right of the receiver".into()))
            }
            _ => {}
        }
        let s = &self.segments[self.segment_index(x, side)];
        Ok((s.r, s.c))
    }

    /// True iff `x` lies strictly inside some forbidden zone.
    pub fn in_forbidden(&self, x: T) -> bool {
        self.zones.iter().any(|z| z.contains(x))
    }

    /// Positions `step, 2·step, …` strictly inside `(0, L)` that are not
    /// forbidden.
    pub fn candidate_grid(&self, step: T) -> Vec<T> {
        let len = self.total_length();
        let mut out = Vec::new();
        if !(step > T::zero()) {
            return out;
        }
        let mut k = 1usize;
        loop {
            let x = step * T::from_usize(k).unwrap();
            if x >= len {
                break;
            }
            if !self.in_forbidden(x) {
                out.push(x);
            }
            k += 1;
        }
        out
    }

    /// Strictly inside `(0, L)` and not forbidden.
    pub fn is_legal_position(&self, x: T) -> bool {
        x > T::zero() && x < self.total_length() && !self.in_forbidden(x)
    }
}

/// Check every net invariant, naming the first violation.
pub fn validate_net<T: Scalar>(
    segments: &[Segment<T>],
    zones: &[ForbiddenZone<T>],
    w_d: T,
    w_r: T,
) -> Result<()> {
    if segments.is_empty() {
        return Err(Error::InvalidNet("net needs at least one segment".into()));
    }
    for (i, s) in segments.iter().enumerate() {
        if !(s.length > T::zero()) {
            return Err(Error::InvalidNet(format!("segment {i}: length must be > 0")));
        }
        if !(s.r > T::zero()) {
            return Err(Error::InvalidNet(format!("segment {i}: r must be > 0")));
        }
        if !(s.c > T::zero()) {
            return Err(Error::InvalidNet(format!("segment {i}: c must be > 0")));
        }
    }
    if !(w_d > T::zero()) {
        return Err(Error::InvalidNet("driver width must be > 0".into()));
    }
    if !(w_r > T::zero()) {
        return Err(Error::InvalidNet("receiver width must be > 0".into()));
    }
    let total: T = segments.iter().map(|s| s.length).sum();
    for (i, z) in zones.iter().enumerate() {
        if !(z.start < z.end) {
            return Err(Error::InvalidNet(format!(
                "zone {i}: zone start >= end ({}, {})",
                z.start, z.end
            )));
        }
        if z.start < T::zero() || z.end > total {
            return Err(Error::InvalidNet(format!(
                "zone {i}: ({}, {}) outside net [0, {total}]",
                z.start, z.end
            )));
        }
    }
    let mut order: Vec<&ForbiddenZone<T>> = zones.iter().collect();
    order.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap_or(std::cmp::Ordering::Equal));
    for w in order.windows(2) {
        if w[1].start < w[0].end {
            return Err(Error::InvalidNet(format!(
                "overlapping zones ({}, {}) and ({}, {})",
                w[0].start, w[0].end, w[1].start, w[1].end
            )));
        }
    }
    Ok(())
}

/// A placed repeater.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Repeater<T> {
    /// µm from the driver output.
    pub x: T,
    /// Width in multiples of `u`.
    pub w: T,
}

impl<T> Repeater<T> {
    pub fn new(x: T, w: T) -> Self {
        Self { x, w }
    }
}

/// Ordered repeater placement with its evaluated delay and total width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeaterSolution<T> {
    pub repeaters: Vec<Repeater<T>>,
    pub delay: T,
    pub total_width: T,
}

impl<T: Scalar> RepeaterSolution<T> {
    /// Build a solution and fill `delay`/`total_width` by evaluation.
    pub fn evaluate(tech: &TechParams<T>, net: &Net<T>, repeaters: Vec<Repeater<T>>) -> Result<Self> {
        let delay = crate::delay::total_delay(tech, net, &repeaters)?;
        let total_width = crate::delay::power_proxy(&repeaters);
        Ok(Self {
            repeaters,
            delay,
            total_width,
        })
    }

    pub fn unbuffered(tech: &TechParams<T>, net: &Net<T>) -> Result<Self> {
        Self::evaluate(tech, net, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.repeaters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.repeaters.is_empty()
    }

    pub fn positions(&self) -> Vec<T> {
        self.repeaters.iter().map(|r| r.x).collect()
    }

    pub fn widths(&self) -> Vec<T> {
        self.repeaters.iter().map(|r| r.w).collect()
    }
}

/// Check ordering, legality and positivity of a placement against a net.
pub fn validate_placement<T: Scalar>(net: &Net<T>, repeaters: &[Repeater<T>]) -> Result<()> {
    let len = net.total_length();
    let mut prev = T::zero();
    for (i, r) in repeaters.iter().enumerate() {
        if !(r.w > T::zero()) {
            return Err(Error::NonPositiveWidth {
                index: i,
                width: r.w.f64(),
            });
        }
        if !(r.x > T::zero() && r.x < len) {
            return Err(Error::InvalidSolution(format!(
                "repeater {i} at {} is not strictly inside (0, {len})",
                r.x
            )));
        }
        if i > 0 && !(r.x > prev) {
            return Err(Error::InvalidSolution(format!(
                "repeater positions not strictly increasing at index {i}"
            )));
        }
        if net.in_forbidden(r.x) {
            return Err(Error::InvalidSolution(format!(
                "repeater {i} at {} lies inside a forbidden zone",
                r.x
            )));
        }
        prev = r.x;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_seg() -> Net<f64> {
        Net::new(
            vec![Segment::new(1000.0, 0.1, 2e-16), Segment::new(2500.0, 0.05, 3e-16)],
            vec![],
            10.0,
            10.0,
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(Net::uniform(1000.0, 0.1, 1e-16, 1.0, 1.0).is_ok());
        let seg = vec![Segment::new(1000.0, 0.1, 1e-16)];
        let e = Net::new(seg.clone(), vec![ForbiddenZone::new(500.0, 400.0)], 1.0, 1.0).unwrap_err();
        assert!(e.to_string().contains("zone start >= end"), "{e}");
        let e = Net::new(
            seg.clone(),
            vec![ForbiddenZone::new(100.0, 300.0), ForbiddenZone::new(200.0, 400.0)],
            1.0,
            1.0,
        )
        .unwrap_err();
        assert!(e.to_string().contains("overlapping zones"), "{e}");
        assert!(Net::new(seg.clone(), vec![ForbiddenZone::new(900.0, 1100.0)], 1.0, 1.0).is_err());
        assert!(Net::new(seg.clone(), vec![], 0.0, 1.0).is_err());
        assert!(Net::<f64>::new(vec![], vec![], 1.0, 1.0).is_err());
        assert!(Net::new(vec![Segment::new(10.0, 0.0, 1e-16)], vec![], 1.0, 1.0).is_err());
        // abutting zones are disjoint open intervals
        assert!(Net::new(
            seg,
            vec![ForbiddenZone::new(300.0, 400.0), ForbiddenZone::new(100.0, 300.0)],
            1.0,
            1.0
        )
        .is_ok());
    }

    #[test]
    fn lengths() {
        assert_eq!(Net::uniform(1000.0, 0.1, 1e-16, 1.0, 1.0).unwrap().total_length(), 1000.0);
        assert_eq!(two_seg().total_length(), 3500.0);
        assert_eq!(two_seg().boundaries(), &[1000.0]);
    }

    #[test]
    fn rc_spans() {
        let net = Net::<f64>::uniform(1000.0, 0.1, 0.2e-15, 1.0, 1.0).unwrap();
        assert_eq!(net.rc_between(300.0, 300.0).unwrap(), (0.0, 0.0));
        let (r, c) = net.rc_between(0.0, 100.0).unwrap();
        assert!((r - 10.0).abs() < 1e-12);
        assert!((c - 20e-15).abs() < 1e-27);
        assert!(net.rc_between(200.0, 100.0).is_err());

        let net = two_seg();
        let (r, c) = net.rc_between(900.0, 1200.0).unwrap();
        // 100 µm of seg 1 plus 200 µm of seg 2
        assert!((r - (100.0 * 0.1 + 200.0 * 0.05)).abs() < 1e-12);
        assert!((c - (100.0 * 2e-16 + 200.0 * 3e-16)).abs() < 1e-28);
    }

    #[test]
    fn unit_rc_sides() {
        let net = two_seg();
        assert_eq!(net.unit_rc_at(500.0, Side::Left).unwrap(), (0.1, 2e-16));
        assert_eq!(net.unit_rc_at(500.0, Side::Right).unwrap(), (0.1, 2e-16));
        assert_eq!(net.unit_rc_at(1000.0, Side::Left).unwrap(), (0.1, 2e-16));
        assert_eq!(net.unit_rc_at(1000.0, Side::Right).unwrap(), (0.05, 3e-16));
        assert_eq!(net.unit_rc_at(0.0, Side::Right).unwrap(), (0.1, 2e-16));
        assert_eq!(net.unit_rc_at(3500.0, Side::Left).unwrap(), (0.05, 3e-16));
        assert!(net.unit_rc_at(0.0, Side::Left).is_err());
        assert!(net.unit_rc_at(3500.0, Side::Right).is_err());
    }

    #[test]
    fn forbidden_membership() {
        let net = Net::new(
            vec![Segment::new(1000.0, 0.1, 1e-16)],
            vec![ForbiddenZone::new(100.0, 200.0)],
            1.0,
            1.0,
        )
        .unwrap();
        assert!(net.in_forbidden(150.0));
        assert!(!net.in_forbidden(100.0));
        assert!(!net.in_forbidden(200.0));
        assert!(!Net::uniform(1000.0, 0.1, 1e-16, 1.0, 1.0).unwrap().in_forbidden(150.0));
    }

    #[test]
    fn grids() {
        let net = Net::uniform(1000.0, 0.1, 1e-16, 1.0, 1.0).unwrap();
        assert_eq!(net.candidate_grid(200.0), vec![200.0, 400.0, 600.0, 800.0]);
        assert!(net.candidate_grid(1200.0).is_empty());
        let zoned = Net::new(
            vec![Segment::new(1000.0, 0.1, 1e-16)],
            vec![ForbiddenZone::new(300.0, 700.0)],
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(zoned.candidate_grid(200.0), vec![200.0, 800.0]);
    }

    #[test]
    fn placement_checks() {
        let net = Net::new(
            vec![Segment::new(1000.0, 0.1, 1e-16)],
            vec![ForbiddenZone::new(300.0, 700.0)],
            1.0,
            1.0,
        )
        .unwrap();
        assert!(validate_placement(&net, &[Repeater::new(300.0, 5.0), Repeater::new(800.0, 5.0)]).is_ok());
        assert!(validate_placement(&net, &[Repeater::new(500.0, 5.0)]).is_err());
        assert!(validate_placement(&net, &[Repeater::new(800.0, 5.0), Repeater::new(200.0, 5.0)]).is_err());
        assert!(validate_placement(&net, &[Repeater::new(200.0, 0.0)]).is_err());
        assert!(validate_placement(&net, &[Repeater::new(0.0, 1.0)]).is_err());
    }
}
