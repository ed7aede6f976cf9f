use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vfpe::force::{
    friction_force, integrate_step, total_force, ChainFrame, Force, ForceParams, Neighbor,
};
use vfpe::geometry::{distance, Vec2, Zone};
use vfpe::mobility::{rwp_step, RwpParams};
use vfpe::model::{NodeId, NodeRole, NodeState};
use vfpe::protocol::{build_beacon, BeaconEntry, NeighborDatabase, Selection};
use vfpe::radio::{airtime, Frame, FrameKind, PhyParams};
use vfpe::time::SimTime;

fn settle_pair(a0: Vec2, b0: Vec2, dt: f64, seconds: f64) -> (NodeState, NodeState) {
    let params = ForceParams::default();
    let zone = Zone::default();
    let mut a = NodeState::new(NodeId(2), NodeRole::Relay, a0);
    let mut b = NodeState::new(NodeId(3), NodeRole::Prospection, b0);
    let steps = (seconds / dt).round() as usize;
    for _ in 0..steps {
        let fa = total_force(
            &a,
            &ChainFrame {
                successor: Some(Neighbor {
                    id: b.id,
                    pos: b.pos,
                }),
                ..Default::default()
            },
            &params,
        );
        let fb = total_force(
            &b,
            &ChainFrame {
                predecessor: Some(Neighbor {
                    id: a.id,
                    pos: a.pos,
                }),
                ..Default::default()
            },
            &params,
        );
        a = integrate_step(&a, fa, dt, 10.0, &zone);
        b = integrate_step(&b, fb, dt, 10.0, &zone);
    }
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_controlled_nodes_come_to_rest_in_the_friction_annulus(
        sep in prop_oneof![0.5f64..49.9, 75.01f64..100.0],
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let a0 = Vec2::new(500.0, 500.0);
        let b0 = a0 + Vec2::new(angle.cos(), angle.sin()) * sep;
        let (a, b) = settle_pair(a0, b0, 0.1, 120.0);
        let d = distance(a.pos, b.pos);
        prop_assert!((50.0..=75.0).contains(&d), "separation {d}");
        prop_assert!(a.speed() < 0.01 && b.speed() < 0.01);
    }

    #[test]
    fn friction_alone_always_slows_a_node(vx in -10.0f64..10.0, vy in -10.0f64..10.0) {
        let params = ForceParams::default();
        let zone = Zone::default();
        let mut n = NodeState::new(NodeId(2), NodeRole::Relay, Vec2::new(500.0, 500.0));
        n.vel = Vec2::new(vx, vy);
        let mut last = n.speed();
        for _ in 0..200 {
            if last < 1e-6 {
                break;
            }
            let f = friction_force(n.vel, true, &params);
            n = integrate_step(&n, f, 0.1, 10.0, &zone);
            prop_assert!(n.speed() < last);
            last = n.speed();
        }
    }

    #[test]
    fn beacon_airtime_is_linear_in_entries(cs in 1usize..=40) {
        let phy = PhyParams::default();
        let frame = |k: usize| Frame::broadcast(FrameKind::BeaconBroadcast, NodeId(0), 36 * k, SimTime::ZERO, ());
        let one = airtime(&frame(1), &phy).0 - phy.overhead_ns;
        prop_assert_eq!(airtime(&frame(cs), &phy).0, cs as u64 * one + phy.overhead_ns);
        prop_assert_eq!(one, 288_000);
    }

    #[test]
    fn only_lifecycle_transitions_are_accepted(from in 0u8..4, to in 0u8..4) {
        let from = NodeRole::from_code(from).unwrap();
        let to = NodeRole::from_code(to).unwrap();
        let mut n = NodeState::new(NodeId(5), from, Vec2::new(1.0, 1.0));
        use NodeRole::*;
        let legal = matches!(
            (from, to),
            (Surveillance, Relay) | (Surveillance, Prospection) | (Prospection, Relay)
                | (Prospection, Surveillance) | (Relay, Surveillance)
        );
        prop_assert_eq!(n.set_role(to).is_ok(), legal);
        prop_assert_eq!(n.role, if legal { to } else { from });
    }

    #[test]
    fn beacons_hold_at_most_cs_distinct_entries_led_by_the_emitter(
        cs in 1usize..25,
        known in 0usize..40,
        fresh in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut db = NeighborDatabase::new(Some(NodeId(0)));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 1..=known as u32 {
            let n = NodeState::new(NodeId(i), NodeRole::Surveillance, Vec2::new(i as f64, 0.0));
            db.insert_if_newer(BeaconEntry::describe(&n, f64::from(i % 7)));
        }
        let own = BeaconEntry::describe(&NodeState::new(NodeId(0), NodeRole::Traffic, Vec2::ZERO), 9.0);
        let sel = if fresh { Selection::Fresh } else { Selection::Random };
        let b = build_beacon(own, &db, sel, cs, &mut rng);
        prop_assert_eq!(b.len(), cs.min(known + 1));
        prop_assert_eq!(b.emitter().node, NodeId(0));
        prop_assert!(b.validate().is_ok());
    }

    #[test]
    fn random_waypoint_stays_in_zone_and_under_speed(seed in any::<u64>(), x in 0.0f64..=1000.0, y in 0.0f64..=1000.0) {
        let zone = Zone::default();
        let params = RwpParams::new(5.0, 10.0, zone);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut n = NodeState::new(NodeId(2), NodeRole::Surveillance, Vec2::new(x, y));
        for _ in 0..3000 {
            let next = rwp_step(&n, 0.1, &mut rng, &params);
            prop_assert!(zone.contains(next.pos));
            prop_assert!(distance(n.pos, next.pos) <= 10.0 * 0.1 + 1e-9);
            prop_assert!(next.speed() <= 10.0 + 1e-9);
            n = next;
        }
    }

    #[test]
    fn integration_never_leaves_the_zone(
        x in 0.0f64..=1000.0, y in 0.0f64..=1000.0,
        fx in -50.0f64..50.0, fy in -50.0f64..50.0,
    ) {
        let zone = Zone::default();
        let mut n = NodeState::new(NodeId(2), NodeRole::Relay, Vec2::new(x, y));
        for _ in 0..100 {
            n = integrate_step(&n, Force(Vec2::new(fx, fy)), 0.1, 10.0, &zone);
            prop_assert!(zone.contains(n.pos));
            prop_assert!(n.speed() <= 10.0 + 1e-9);
        }
    }
}
