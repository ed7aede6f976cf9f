//! Virtual forces acting on chain members and the kinematic integration step.
//!
//! Three forces shape a chain: a piecewise-constant attraction/repulsion
//! keeping neighbours at a working distance, a viscous friction that lets a
//! node come to rest inside the friction annulus, and an alignment pull that
//! straightens the chain along the source/destination line and keeps its
//! members ordered by distance to the destination.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, GeometryError};
use crate::geometry::{distance, project_onto_segment_line, Vec2, Zone};
use crate::model::{NodeId, NodeRole, NodeState};

/// Force constants of the virtual force system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForceParams {
    /// Radius of the repulsive disc, m.
    pub d_r: f64,
    /// Outer radius of the friction annulus, m.
    pub d_f: f64,
    /// Outer radius of the attractive annulus, m.
    pub d_a: f64,
    /// Attraction/repulsion magnitude, N.
    pub interaction: f64,
    /// Viscous friction coefficient, N·s/m.
    pub friction: f64,
    /// Alignment magnitude while closing on the target, N.
    pub align_near: f64,
    /// Alignment magnitude otherwise, N.
    pub align_far: f64,
    /// Neighbour spacing below which a relay is redundant, m.
    pub th_dmin: f64,
    /// Spacing at or above which a chain link asks for another relay, m.
    pub th_dmax: f64,
    /// No alignment force closer than this to the target, m.
    pub align_deadband: f64,
}

impl Default for ForceParams {
    fn default() -> Self {
        Self {
            d_r: 50.0,
            d_f: 75.0,
            d_a: 100.0,
            interaction: 1.0,
            friction: 2.0,
            align_near: 2.0,
            align_far: 4.0,
            th_dmin: 40.0,
            th_dmax: 75.0,
            align_deadband: 1.0,
        }
    }
}

impl ForceParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError::Invalid(format!("force parameters: {m}")));
        if !(0.0 < self.d_r && self.d_r < self.d_f && self.d_f < self.d_a) {
            return fail("zones must nest as 0 < d_r < d_f < d_a");
        }
        if !(self.interaction > 0.0 && self.friction > 0.0) {
            return fail("interaction and friction must be positive");
        }
        if !(0.0 < self.align_near && self.align_near <= self.align_far) {
            return fail("alignment magnitudes must satisfy 0 < near <= far");
        }
        if !(self.th_dmin < self.th_dmax && self.th_dmax <= self.d_a) {
            return fail("thresholds must satisfy th_dmin < th_dmax <= d_a");
        }
        if self.align_deadband.is_nan() || self.align_deadband < 0.0 {
            return fail("alignment dead-band must be non-negative");
        }
        Ok(())
    }

    /// True when `d` lies in the friction annulus `[d_r, d_f]`.
    pub fn in_friction_zone(&self, d: f64) -> bool {
        (self.d_r..=self.d_f).contains(&d)
    }
}

/// A force vector in newtons.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Force(pub Vec2);

impl Force {
    pub const ZERO: Force = Force(Vec2::ZERO);

    pub fn vector(self) -> Vec2 {
        self.0
    }
}

impl std::ops::Add for Force {
    type Output = Force;
    fn add(self, rhs: Force) -> Force {
        Force(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for Force {
    fn add_assign(&mut self, rhs: Force) {
        self.0 += rhs.0;
    }
}

impl std::ops::Neg for Force {
    type Output = Force;
    fn neg(self) -> Force {
        Force(-self.0)
    }
}

/// Force exerted on node `n` by node `p`.
///
/// Coincident nodes are pushed apart along the x axis, the higher id towards +x.
pub fn interaction_force(
    n_id: NodeId,
    n_pos: Vec2,
    p_id: NodeId,
    p_pos: Vec2,
    params: &ForceParams,
) -> Force {
    let away = n_pos - p_pos;
    let d = away.norm();
    let Some(dir) = away.normalized() else {
        let sign = if n_id > p_id { 1.0 } else { -1.0 };
        return Force(Vec2::new(sign * params.interaction, 0.0));
    };
    if d < params.d_r {
        Force(dir * params.interaction)
    } else if d >= params.d_f && d <= params.d_a {
        Force(dir * -params.interaction)
    } else {
        Force::ZERO
    }
}

/// Viscous friction, `-Cx * v` inside the friction annulus.
pub fn friction_force(n_vel: Vec2, in_friction_zone: bool, params: &ForceParams) -> Force {
    if !in_friction_zone {
        return Force::ZERO;
    }
    Force(n_vel * -params.friction)
}

/// Where the alignment force steers node `n`.
///
/// Normally the projection of `n` on the source/destination line. When that
/// projection is not closer to the destination than the predecessor's, the
/// target is the reflection of the projection about the predecessor's
/// projection; if even the reflection is not strictly closer (it would
/// overshoot past the destination) the target falls back to the midpoint
/// between the predecessor's projection and the destination.
pub fn alignment_target(
    n_pos: Vec2,
    pred_pos: Vec2,
    s_pos: Vec2,
    d_pos: Vec2,
) -> Result<Vec2, GeometryError> {
    Ok(alignment_target_classified(n_pos, pred_pos, s_pos, d_pos)?.0)
}

/// Which rule produced an alignment target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentBranch {
    Projection,
    Reflection,
    Midpoint,
}

pub fn alignment_target_classified(
    n_pos: Vec2,
    pred_pos: Vec2,
    s_pos: Vec2,
    d_pos: Vec2,
) -> Result<(Vec2, AlignmentBranch), GeometryError> {
    let np = project_onto_segment_line(n_pos, s_pos, d_pos)?;
    let pp = project_onto_segment_line(pred_pos, s_pos, d_pos)?;
    let pred_to_d = distance(pp, d_pos);
    if distance(np, d_pos) < pred_to_d {
        return Ok((np, AlignmentBranch::Projection));
    }
    let mirrored = pp * 2.0 - np;
    if distance(mirrored, d_pos) < pred_to_d {
        Ok((mirrored, AlignmentBranch::Reflection))
    } else {
        Ok(((pp + d_pos) * 0.5, AlignmentBranch::Midpoint))
    }
}

/// Constant-magnitude pull towards `target`: weaker while already closing in.
pub fn alignment_force(n_pos: Vec2, n_vel: Vec2, target: Vec2, params: &ForceParams) -> Force {
    let to_target = target - n_pos;
    if to_target.norm() < params.align_deadband {
        return Force::ZERO;
    }
    let Some(dir) = to_target.normalized() else {
        return Force::ZERO;
    };
    let magnitude = if n_vel.dot(dir) > 0.0 {
        params.align_near
    } else {
        params.align_far
    };
    Force(dir * magnitude)
}

/// A chain neighbour as the node currently believes it to be.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: NodeId,
    pub pos: Vec2,
}

/// Everything a chain member needs to evaluate its forces.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChainFrame {
    pub predecessor: Option<Neighbor>,
    pub successor: Option<Neighbor>,
    pub source: Option<Vec2>,
    pub destination: Option<Vec2>,
}

/// Resultant of interaction, friction and alignment on a chain member.
///
/// Interaction comes from the chain predecessor and successor only. Friction
/// applies when the nearest of them puts the node in its friction annulus.
/// Alignment is skipped when the endpoints are unknown or coincide.
pub fn total_force(node: &NodeState, frame: &ChainFrame, params: &ForceParams) -> Force {
    let mut f = Force::ZERO;
    let mut nearest: Option<f64> = None;
    for nb in [frame.predecessor, frame.successor].into_iter().flatten() {
        f += interaction_force(node.id, node.pos, nb.id, nb.pos, params);
        let d = distance(node.pos, nb.pos);
        nearest = Some(nearest.map_or(d, |m: f64| m.min(d)));
    }
    if let Some(d) = nearest {
        f += friction_force(node.vel, params.in_friction_zone(d), params);
    }
    if let (Some(pred), Some(s), Some(d)) = (frame.predecessor, frame.source, frame.destination) {
        if let Ok(target) = alignment_target(node.pos, pred.pos, s, d) {
            f += alignment_force(node.pos, node.vel, target, params);
        }
    }
    f
}

/// Forward pull of a chain apex towards the believed destination, active only
/// while it is closer than `th_dmax` to its predecessor.
pub fn prospection_drive(node: &NodeState, frame: &ChainFrame, params: &ForceParams) -> Force {
    if node.role != NodeRole::Prospection {
        return Force::ZERO;
    }
    let (Some(pred), Some(dest)) = (frame.predecessor, frame.destination) else {
        return Force::ZERO;
    };
    if distance(node.pos, pred.pos) >= params.th_dmax {
        return Force::ZERO;
    }
    match (dest - node.pos).normalized() {
        Some(dir) => Force(dir * params.interaction),
        None => Force::ZERO,
    }
}

/// Explicit Euler step with speed limit and zone confinement.
pub fn integrate_step(
    node: &NodeState,
    force: Force,
    dt: f64,
    v_max: f64,
    zone: &Zone,
) -> NodeState {
    debug_assert!(dt > 0.0);
    let mut next = node.clone();
    let vel = (node.vel + force.0 * (dt / node.mass)).clamp_norm(v_max);
    let (pos, vel) = zone.confine(node.pos + vel * dt, vel);
    next.pos = pos;
    next.vel = vel;
    debug_assert!(next.pos.is_finite() && next.vel.is_finite());
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const A: NodeId = NodeId(1);
    const B: NodeId = NodeId(2);

    fn p() -> ForceParams {
        ForceParams::default()
    }

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    #[test]
    fn default_params_are_valid() {
        p().validate().unwrap();
        let bad = ForceParams { d_f: 40.0, ..p() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn interaction_zones() {
        let o = Vec2::ZERO;
        assert_eq!(
            interaction_force(A, v(30.0, 0.0), B, o, &p()),
            Force(v(1.0, 0.0))
        );
        assert_eq!(
            interaction_force(A, v(90.0, 0.0), B, o, &p()),
            Force(v(-1.0, 0.0))
        );
        assert_eq!(interaction_force(A, v(60.0, 0.0), B, o, &p()), Force::ZERO);
        assert_eq!(interaction_force(A, v(150.0, 0.0), B, o, &p()), Force::ZERO);
        // closed attractive annulus
        assert_eq!(
            interaction_force(A, v(75.0, 0.0), B, o, &p()),
            Force(v(-1.0, 0.0))
        );
        assert_eq!(
            interaction_force(A, v(100.0, 0.0), B, o, &p()),
            Force(v(-1.0, 0.0))
        );
        assert_eq!(interaction_force(A, v(50.0, 0.0), B, o, &p()), Force::ZERO);
    }

    #[test]
    fn coincident_nodes_split_by_id() {
        let q = v(5.0, 5.0);
        let fa = interaction_force(A, q, B, q, &p());
        let fb = interaction_force(B, q, A, q, &p());
        assert_eq!(fa, Force(v(-1.0, 0.0)));
        assert_eq!(fb, -fa);
    }

    #[test]
    fn friction_examples() {
        assert_eq!(friction_force(v(3.0, 0.0), true, &p()), Force(v(-6.0, 0.0)));
        assert_eq!(friction_force(v(3.0, 0.0), false, &p()), Force::ZERO);
        assert_eq!(friction_force(Vec2::ZERO, true, &p()), Force::ZERO);
    }

    #[test]
    fn friction_brings_lone_node_to_rest() {
        let zone = Zone::default();
        let mut n = NodeState::new(A, NodeRole::Relay, v(500.0, 500.0));
        n.vel = v(3.0, 0.0);
        let mut last = n.speed();
        for _ in 0..1000 {
            let f = friction_force(n.vel, true, &p());
            n = integrate_step(&n, f, 0.1, 10.0, &zone);
            assert!(n.speed() < last);
            last = n.speed();
            if last < 1e-9 {
                return;
            }
        }
        panic!("node never came to rest, speed {last}");
    }

    #[test]
    fn alignment_target_examples() {
        let s = Vec2::ZERO;
        let d = v(100.0, 0.0);
        let pred = v(30.0, 0.0);
        let (t, b) = alignment_target_classified(v(50.0, 10.0), pred, s, d).unwrap();
        assert_eq!((t, b), (v(50.0, 0.0), AlignmentBranch::Projection));
        let (t, b) = alignment_target_classified(v(20.0, 10.0), pred, s, d).unwrap();
        assert_eq!((t, b), (v(40.0, 0.0), AlignmentBranch::Reflection));
        // on the line, ahead of the predecessor: its own position
        assert_eq!(
            alignment_target(v(60.0, 0.0), pred, s, d).unwrap(),
            v(60.0, 0.0)
        );
    }

    #[test]
    fn alignment_target_folds_overshooting_reflection() {
        // predecessor 10 m from D, node 50 m behind it: mirrored point would be 30 m past D
        let (t, b) =
            alignment_target_classified(v(50.0, 5.0), v(90.0, 0.0), Vec2::ZERO, v(100.0, 0.0))
                .unwrap();
        assert_eq!(b, AlignmentBranch::Midpoint);
        assert_eq!(t, v(95.0, 0.0));
    }

    #[test]
    fn alignment_target_degenerate_line() {
        let q = v(1.0, 1.0);
        assert_eq!(
            alignment_target(v(3.0, 3.0), v(2.0, 0.0), q, q),
            Err(GeometryError::DegenerateLine)
        );
    }

    #[test]
    fn alignment_force_examples() {
        let n = v(50.0, 10.0);
        let t = v(50.0, 0.0);
        assert_eq!(
            alignment_force(n, v(0.0, -1.0), t, &p()),
            Force(v(0.0, -2.0))
        );
        assert_eq!(
            alignment_force(n, v(0.0, 1.0), t, &p()),
            Force(v(0.0, -4.0))
        );
        assert_eq!(alignment_force(t, Vec2::ZERO, t, &p()), Force::ZERO);
        assert_eq!(
            alignment_force(v(50.0, 0.5), Vec2::ZERO, t, &p()),
            Force::ZERO
        );
    }

    fn relay_at(pos: Vec2) -> NodeState {
        NodeState::new(A, NodeRole::Relay, pos)
    }

    #[test]
    fn total_force_all_components_idle() {
        let frame = ChainFrame {
            source: Some(Vec2::ZERO),
            destination: Some(v(300.0, 0.0)),
            ..Default::default()
        };
        assert_eq!(
            total_force(&relay_at(v(50.0, 0.0)), &frame, &p()),
            Force::ZERO
        );
    }

    #[test]
    fn total_force_friction_zone_is_alignment_only() {
        // predecessor (0,40); node at (0,100) is 60 m away, stationary, off the line y=0
        let node = relay_at(v(0.0, 100.0));
        let frame = ChainFrame {
            predecessor: Some(Neighbor {
                id: B,
                pos: v(0.0, 40.0),
            }),
            successor: None,
            source: Some(v(-100.0, 0.0)),
            destination: Some(v(400.0, 0.0)),
        };
        // independent evaluation: Np = (0,0) is 400 m from D, Pp = (0,0) too -> not strictly
        // closer, mirrored point is Np again -> midpoint of Pp and D = (200, 0)
        let dir = v(200.0, -100.0) / v(200.0, -100.0).norm();
        let expect = dir * 4.0;
        let got = total_force(&node, &frame, &p()).0;
        assert!((got - expect).norm() < 1e-12, "{got:?} vs {expect:?}");
    }

    #[test]
    fn total_force_repulsion_plus_reflection() {
        // on the line behind the predecessor: reflected target ahead of it
        let node = relay_at(v(70.0, 0.0));
        let frame = ChainFrame {
            predecessor: Some(Neighbor {
                id: B,
                pos: v(100.0, 0.0),
            }),
            successor: None,
            source: Some(Vec2::ZERO),
            destination: Some(v(300.0, 0.0)),
        };
        // repulsion (-1,0) + alignment towards (130,0) with the receding magnitude (4,0)
        assert_eq!(total_force(&node, &frame, &p()), Force(v(3.0, 0.0)));
    }

    #[test]
    fn prospection_drive_gated_by_stretch() {
        let mut node = NodeState::new(A, NodeRole::Prospection, v(60.0, 0.0));
        let mut frame = ChainFrame {
            predecessor: Some(Neighbor {
                id: B,
                pos: Vec2::ZERO,
            }),
            source: Some(Vec2::ZERO),
            destination: Some(v(500.0, 0.0)),
            ..Default::default()
        };
        assert_eq!(prospection_drive(&node, &frame, &p()), Force(v(1.0, 0.0)));
        node.pos = v(80.0, 0.0);
        assert_eq!(prospection_drive(&node, &frame, &p()), Force::ZERO);
        node.role = NodeRole::Relay;
        node.pos = v(60.0, 0.0);
        assert_eq!(prospection_drive(&node, &frame, &p()), Force::ZERO);
        node.role = NodeRole::Prospection;
        frame.destination = None;
        assert_eq!(prospection_drive(&node, &frame, &p()), Force::ZERO);
    }

    #[test]
    fn integrate_examples() {
        let zone = Zone::default();
        let n = NodeState::new(A, NodeRole::Relay, v(500.0, 500.0));
        let m = integrate_step(&n, Force(v(1.0, 0.0)), 0.1, 10.0, &zone);
        assert!((m.vel - v(0.1, 0.0)).norm() < 1e-15);
        assert!((m.pos - v(500.01, 500.0)).norm() < 1e-12);

        let mut fast = n.clone();
        fast.vel = v(9.9, 0.0);
        let m = integrate_step(&fast, Force(v(10.0, 0.0)), 0.5, 10.0, &zone);
        assert!((m.speed() - 10.0).abs() < 1e-12);
        assert!(m.vel.y == 0.0 && m.vel.x > 0.0);

        let mut coast = n.clone();
        coast.vel = v(2.0, -1.0);
        let m = integrate_step(&coast, Force::ZERO, 3.0, 10.0, &zone);
        assert_eq!(m.vel, coast.vel);
        assert!((m.pos - v(506.0, 497.0)).norm() < 1e-12);
    }

    fn pt() -> impl Strategy<Value = Vec2> {
        (0.0..1000.0f64, 0.0..1000.0f64).prop_map(|(x, y)| Vec2::new(x, y))
    }

    proptest! {
        #[test]
        fn interaction_is_antisymmetric(a in pt(), b in pt()) {
            prop_assume!(a != b);
            let fab = interaction_force(A, a, B, b, &p());
            let fba = interaction_force(B, b, A, a, &p());
            prop_assert_eq!(fab, -fba);
        }

        #[test]
        fn integration_respects_limits(
            pos in pt(), vx in -10.0..10.0f64, vy in -10.0..10.0f64,
            fx in -50.0..50.0f64, fy in -50.0..50.0f64, dt in 0.01..2.0f64,
        ) {
            let zone = Zone::default();
            let mut n = relay_at(pos);
            n.vel = Vec2::new(vx, vy).clamp_norm(10.0);
            let m = integrate_step(&n, Force(Vec2::new(fx, fy)), dt, 10.0, &zone);
            prop_assert!(m.speed() <= 10.0 + 1e-9);
            prop_assert!(zone.contains(m.pos));
        }

        #[test]
        fn alignment_target_on_line_and_ahead(n in pt(), pred in pt(), s in pt(), d in pt()) {
            prop_assume!(distance(s, d) > 1.0);
            let t = alignment_target(n, pred, s, d).unwrap();
            let on_line = project_onto_segment_line(t, s, d).unwrap();
            prop_assert!(distance(t, on_line) < 1e-9);
            let pp = project_onto_segment_line(pred, s, d).unwrap();
            prop_assume!(distance(pp, d) > 1e-6);
            prop_assert!(distance(t, d) < distance(pp, d));
        }
    }
}
