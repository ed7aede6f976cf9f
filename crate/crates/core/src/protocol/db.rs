use crate::error::BeaconError;
use crate::model::{NodeId, NodeState};

use super::beacon::{Beacon, BeaconEntry};

/// What one node knows about the others: the latest record per node.
///
/// Records are indexed by id, so iteration is in ascending id order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborDatabase {
    owner: Option<NodeId>,
    records: Vec<Option<BeaconEntry>>,
    len: usize,
    /// Malformed beacons refused by [`process_beacon`].
    pub rejected: u64,
}

impl NeighborDatabase {
    /// `owner` is `None` for a global observer's view.
    pub fn new(owner: Option<NodeId>) -> Self {
        Self {
            owner,
            ..Default::default()
        }
    }

    pub fn owner(&self) -> Option<NodeId> {
        self.owner
    }

    pub fn get(&self, id: NodeId) -> Option<&BeaconEntry> {
        self.records.get(id.index()).and_then(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &BeaconEntry> {
        self.records.iter().flatten()
    }

    /// Stores `entry` unless a record at least as recent is already held.
    pub fn insert_if_newer(&mut self, entry: BeaconEntry) -> bool {
        let i = entry.node.index();
        if i >= self.records.len() {
            self.records.resize(i + 1, None);
        }
        match &mut self.records[i] {
            Some(old) if old.timestamp >= entry.timestamp => false,
            slot => {
                if slot.is_none() {
                    self.len += 1;
                }
                *slot = Some(entry);
                true
            }
        }
    }

    /// Unconditional overwrite, for ground-truth snapshots.
    fn put(&mut self, entry: BeaconEntry) {
        let i = entry.node.index();
        if i >= self.records.len() {
            self.records.resize(i + 1, None);
        }
        if self.records[i].is_none() {
            self.len += 1;
        }
        self.records[i] = Some(entry);
    }
}

/// Merges a received beacon into `db`. Returns the number of records updated.
///
/// Malformed beacons (no entries, repeated ids, entries dated in the future)
/// are refused whole and counted in `db.rejected`.
pub fn process_beacon(
    db: &mut NeighborDatabase,
    beacon: &Beacon,
    now: f64,
) -> Result<usize, BeaconError> {
    if let Err(e) = beacon.validate() {
        db.rejected += 1;
        return Err(e);
    }
    if let Some(e) = beacon.entries().iter().find(|e| e.timestamp > now + 1e-9) {
        db.rejected += 1;
        return Err(BeaconError::FutureTimestamp(e.node));
    }
    let owner = db.owner;
    let mut updated = 0;
    for e in beacon.entries() {
        if Some(e.node) != owner && db.insert_if_newer(*e) {
            updated += 1;
        }
    }
    Ok(updated)
}

/// Ground-truth knowledge of every node at `now`.
pub fn ideal_snapshot(world: &[NodeState], now: f64) -> NeighborDatabase {
    let mut db = NeighborDatabase::new(None);
    refresh_snapshot(&mut db, world, now);
    db
}

/// Rewrites an observer database in place with the current ground truth.
pub(crate) fn refresh_snapshot(db: &mut NeighborDatabase, world: &[NodeState], now: f64) {
    for n in world {
        db.put(BeaconEntry::describe(n, now));
    }
}

/// Last time each node was heard directly, i.e. its own beacon was received.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkTable {
    heard: Vec<f64>,
}

impl LinkTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, id: NodeId, at: f64) {
        let i = id.index();
        if i >= self.heard.len() {
            self.heard.resize(i + 1, f64::NEG_INFINITY);
        }
        self.heard[i] = self.heard[i].max(at);
    }

    pub fn last_heard(&self, id: NodeId) -> Option<f64> {
        self.heard
            .get(id.index())
            .copied()
            .filter(|t| t.is_finite())
    }

    /// True if `id` was heard within `lifetime` seconds before `now`.
    pub fn is_alive(&self, id: NodeId, now: f64, lifetime: f64) -> bool {
        self.last_heard(id).is_some_and(|t| now - t <= lifetime)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::model::NodeRole;

    fn entry(id: u32, t: f64, x: f64) -> BeaconEntry {
        BeaconEntry {
            node: NodeId(id),
            role: NodeRole::Surveillance,
            pos: Vec2::new(x, 0.0),
            vel: Vec2::ZERO,
            timestamp: t,
            chain: None,
            endpoints: None,
        }
    }

    fn beacon(entries: Vec<BeaconEntry>) -> Beacon {
        Beacon::new(entries).unwrap()
    }

    #[test]
    fn newer_overwrites_older_ignored() {
        let mut db = NeighborDatabase::new(Some(NodeId(0)));
        process_beacon(&mut db, &beacon(vec![entry(5, 2.0, 1.0)]), 3.0).unwrap();
        assert_eq!(db.get(NodeId(5)).unwrap().pos.x, 1.0);
        process_beacon(&mut db, &beacon(vec![entry(5, 4.0, 2.0)]), 4.0).unwrap();
        assert_eq!(db.get(NodeId(5)).unwrap().pos.x, 2.0);
        let n = process_beacon(&mut db, &beacon(vec![entry(5, 3.0, 9.0)]), 5.0).unwrap();
        assert_eq!(n, 0);
        assert_eq!(db.get(NodeId(5)).unwrap().pos.x, 2.0);
        assert_eq!(db.len(), 1);
    }

    #[test]
    fn unknown_emitter_is_discovered() {
        let mut db = NeighborDatabase::new(Some(NodeId(0)));
        assert!(db.get(NodeId(9)).is_none());
        process_beacon(
            &mut db,
            &beacon(vec![entry(9, 1.0, 0.0), entry(3, 0.5, 0.0)]),
            1.0,
        )
        .unwrap();
        assert!(db.get(NodeId(9)).is_some());
        assert_eq!(db.iter().map(|e| e.node.0).collect::<Vec<_>>(), vec![3, 9]);
    }

    #[test]
    fn own_record_not_stored() {
        let mut db = NeighborDatabase::new(Some(NodeId(0)));
        process_beacon(
            &mut db,
            &beacon(vec![entry(1, 1.0, 0.0), entry(0, 1.0, 0.0)]),
            1.0,
        )
        .unwrap();
        assert!(db.get(NodeId(0)).is_none());
    }

    #[test]
    fn malformed_rejected_and_counted() {
        let mut db = NeighborDatabase::new(Some(NodeId(0)));
        let dup = Beacon::new_unchecked(vec![entry(1, 1.0, 0.0), entry(1, 1.0, 0.0)]);
        assert!(process_beacon(&mut db, &dup, 2.0).is_err());
        assert!(process_beacon(&mut db, &Beacon::new_unchecked(vec![]), 2.0).is_err());
        let future = beacon(vec![entry(2, 1.0, 0.0), entry(3, 9.0, 0.0)]);
        assert!(process_beacon(&mut db, &future, 2.0).is_err());
        assert_eq!(db.rejected, 3);
        assert!(db.is_empty());
    }

    #[test]
    fn snapshot_is_exact() {
        let mut a = NodeState::new(NodeId(0), NodeRole::Traffic, Vec2::new(1.0, 2.0));
        a.vel = Vec2::new(0.5, 0.0);
        let b = NodeState::new(NodeId(1), NodeRole::Surveillance, Vec2::new(3.0, 4.0));
        let snap = ideal_snapshot(&[a.clone(), b.clone()], 12.0);
        for n in [&a, &b] {
            let r = snap.get(n.id).unwrap();
            assert_eq!(
                (r.pos, r.vel, r.role, r.timestamp),
                (n.pos, n.vel, n.role, 12.0)
            );
        }
    }

    #[test]
    fn link_table_ageing() {
        let mut t = LinkTable::new();
        assert!(!t.is_alive(NodeId(4), 0.0, 3.0));
        t.record(NodeId(4), 10.0);
        assert!(t.is_alive(NodeId(4), 13.0, 3.0));
        assert!(!t.is_alive(NodeId(4), 13.5, 3.0));
        t.record(NodeId(4), 5.0);
        assert_eq!(t.last_heard(NodeId(4)), Some(10.0));
    }

    proptest::proptest! {
        #[test]
        fn timestamps_never_decrease(updates in proptest::collection::vec((0u32..6, 0.0..100.0f64), 1..200)) {
            let mut db = NeighborDatabase::new(Some(NodeId(99)));
            let mut seen = std::collections::BTreeMap::new();
            for (id, t) in updates {
                let before = db.get(NodeId(id)).map(|e| e.timestamp);
                let _ = process_beacon(&mut db, &beacon(vec![entry(id, t, 0.0)]), 100.0);
                let after = db.get(NodeId(id)).unwrap().timestamp;
                if let Some(b) = before {
                    proptest::prop_assert!(after >= b);
                }
                let best = seen.entry(id).or_insert(t);
                *best = f64::max(*best, t);
                proptest::prop_assert_eq!(after, *best);
            }
        }
    }
}
