mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use rip_core::delay::stages;
use rip_core::{power_proxy, stage_delay, total_delay, Net, Repeater, Segment};

#[test]
fn total_delay_matches_flat_ladder() {
    let t = tech();
    let mut r = rng(11);
    for _ in 0..200 {
        let net = random_net(&mut r, 6);
        let k = r.gen_range(0..6);
        let pos = random_positions(&mut r, &net, k);
        let reps: Vec<_> = pos.iter().map(|&x| Repeater::new(x, r.gen_range(10.0..400.0))).collect();
        let ours = total_delay(&t, &net, &reps).unwrap();
        let oracle = ladder_delay(&t, &net, &reps, r.gen_range(1..5));
        assert!(rel(ours, oracle) <= 1e-12, "{ours} vs {oracle}");
    }
}

#[test]
fn stage_sum_equals_total_and_power_sums_widths() {
    let t = tech();
    let mut r = rng(12);
    for _ in 0..50 {
        let net = random_net(&mut r, 5);
        let pos = random_positions(&mut r, &net, 3);
        let reps: Vec<_> = pos.iter().map(|&x| Repeater::new(x, r.gen_range(10.0..400.0))).collect();
        let by_stage: f64 = stages(&net, &reps).iter().map(|s| stage_delay(&t, s).unwrap()).sum();
        assert!(rel(by_stage, total_delay(&t, &net, &reps).unwrap()) <= 1e-12);
        let w: f64 = reps.iter().map(|r| r.w).sum();
        assert_eq!(power_proxy(&reps), w);
    }
}

#[test]
fn illegal_placements_are_rejected() {
    let t = tech();
    let net = Net::new(
        vec![Segment::new(2000.0, M4.0, M4.1)],
        vec![rip_core::ForbiddenZone::new(500.0, 900.0)],
        50.0,
        50.0,
    )
    .unwrap();
    assert!(total_delay(&t, &net, &[Repeater::new(700.0, 50.0)]).is_err());
    assert!(total_delay(&t, &net, &[Repeater::new(900.0, 50.0)]).is_ok());
    assert!(total_delay(&t, &net, &[Repeater::new(1200.0, 50.0), Repeater::new(1000.0, 50.0)]).is_err());
    assert!(total_delay(&t, &net, &[Repeater::new(1200.0, 0.0)]).is_err());
    assert!(total_delay(&t, &net, &[Repeater::new(2000.0, 10.0)]).is_err());
}

fn net_strategy() -> impl Strategy<Value = Net<f64>> {
    prop::collection::vec((100.0f64..3000.0, any::<bool>()), 1..6).prop_map(|segs| {
        let segs = segs
            .into_iter()
            .map(|(l, m4)| {
                let (r, c) = if m4 { M4 } else { M5 };
                Segment::new(l, r, c)
            })
            .collect();
        Net::new(segs, vec![], 40.0, 40.0).unwrap()
    })
}

proptest! {
    #[test]
    fn rc_between_is_additive(net in net_strategy(), a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let len = net.total_length();
        let mut p = [a * len, b * len, c * len];
        p.sort_by(f64::total_cmp);
        let (r1, c1) = net.rc_between(p[0], p[1]).unwrap();
        let (r2, c2) = net.rc_between(p[1], p[2]).unwrap();
        let (r, cc) = net.rc_between(p[0], p[2]).unwrap();
        prop_assert!(rel(r1 + r2, r) <= 1e-12 || r == 0.0);
        prop_assert!(rel(c1 + c2, cc) <= 1e-12 || cc == 0.0);
    }

    #[test]
    fn candidate_grid_is_legal(net in net_strategy(), step in 50.0f64..700.0, zs in 0.0f64..0.8, zl in 0.01f64..0.2) {
        let len = net.total_length();
        let zoned = Net::new(
            net.segments().to_vec(),
            vec![rip_core::ForbiddenZone::new(zs * len, (zs + zl).min(0.99) * len)],
            40.0,
            40.0,
        ).unwrap();
        let g = zoned.candidate_grid(step);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
        for &x in &g {
            prop_assert!(x > 0.0 && x < len && !zoned.in_forbidden(x));
        }
    }

    #[test]
    fn splitting_an_unbuffered_stage_never_changes_the_oracle(net in net_strategy(), k in 1usize..6) {
        let t = tech();
        let a = ladder_delay(&t, &net, &[], 1);
        let b = ladder_delay(&t, &net, &[], k);
        prop_assert!(rel(a, b) <= 1e-12);
        prop_assert!(rel(total_delay(&t, &net, &[]).unwrap(), a) <= 1e-12);
    }
}
