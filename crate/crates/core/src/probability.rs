//! Finite probability spaces and the partition lattice.
//!
//! States are indices `0..n`. A [`Partition`] is kept in canonical form
//! (blocks sorted internally and ordered by their smallest state), so two
//! partitions generating the same field compare equal. Events are sorted
//! state sets; an event is measurable for a partition iff it is a union of
//! whole blocks.

use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{Error, Result};

const PRIOR_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateSpaceRepr")]
pub struct StateSpace {
    labels: Vec<String>,
    prior: Vec<f64>,
}

#[derive(Deserialize)]
struct StateSpaceRepr {
    labels: Vec<String>,
    prior: Vec<f64>,
}

impl TryFrom<StateSpaceRepr> for StateSpace {
    type Error = Error;

    fn try_from(r: StateSpaceRepr) -> Result<Self> {
        StateSpace::new(r.labels, r.prior)
    }
}

impl StateSpace {
    pub fn new(labels: Vec<String>, prior: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::StateSpace("at least one state is required".into()));
        }
        if labels.len() != prior.len() {
            return Err(Error::StateSpace(format!(
                "{} labels but {} prior weights",
                labels.len(),
                prior.len()
            )));
        }
        for (k, label) in labels.iter().enumerate() {
            if labels[..k].contains(label) {
                return Err(Error::StateSpace(format!("duplicate state label '{label}'")));
            }
        }
        if let Some(k) = prior.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::StateSpace(format!(
                "state '{}' has non-positive prior weight {}",
                labels[k], prior[k]
            )));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > PRIOR_SUM_TOLERANCE {
            return Err(Error::StateSpace(format!("prior sums to {total}, not 1")));
        }
        Ok(StateSpace { labels, prior })
    }

    /// Equiprobable space with labels `s1, s2, ...`.
    pub fn uniform(n: usize) -> Result<Self> {
        let labels = (1..=n).map(|k| format!("s{k}")).collect();
        StateSpace::new(labels, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.prior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prior.is_empty()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn weight(&self, w: usize) -> f64 {
        self.prior[w]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, w: usize) -> &str {
        &self.labels[w]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn mass(&self, states: &[usize]) -> f64 {
        states.iter().map(|&w| self.prior[w]).sum()
    }

    pub fn expectation(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.prior).map(|(v, p)| v * p).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    states: usize,
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;

    fn try_from(repr: PartitionRepr) -> Result<Self> {
        Partition::new(repr.states, repr.blocks)
    }
}

impl From<Partition> for PartitionRepr {
    fn from(p: Partition) -> Self {
        PartitionRepr {
            states: p.n_states(),
            blocks: p.blocks,
        }
    }
}

impl Partition {
    pub fn new(n_states: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        // Too few entries to cover the space: name a gap without allocating
        // a table sized by an untrusted state count.
        let listed: usize = blocks.iter().map(Vec::len).sum();
        if listed < n_states {
            let mut seen: Vec<usize> = blocks.iter().flatten().copied().filter(|&w| w < n_states).collect();
            seen.sort_unstable();
            seen.dedup();
            let w = seen.iter().enumerate().find(|&(k, &w)| k != w).map_or(seen.len(), |(k, _)| k);
            return Err(Error::Partition(format!("state {w} is not covered")));
        }
        let mut block_of = vec![usize::MAX; n_states];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::Partition("empty block".into()));
            }
            for &w in block {
                if w >= n_states {
                    return Err(Error::Partition(format!(
                        "state {w} outside a space of {n_states} states"
                    )));
                }
                if block_of[w] != usize::MAX {
                    return Err(Error::Partition(format!("state {w} appears in two blocks")));
                }
                block_of[w] = 0;
            }
        }
        if let Some(w) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::Partition(format!("state {w} is not covered")));
        }
        Ok(Partition::canonical(blocks, n_states))
    }

    fn canonical(mut blocks: Vec<Vec<usize>>, n_states: usize) -> Self {
        for block in &mut blocks {
            block.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let mut block_of = vec![0; n_states];
        for (k, block) in blocks.iter().enumerate() {
            for &w in block {
                block_of[w] = k;
            }
        }
        Partition { blocks, block_of }
    }

    /// Rebuilds a partition from a per-state labelling.
    pub(crate) fn from_labels(labels: &[usize]) -> Self {
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for (w, &label) in labels.iter().enumerate() {
            match groups.iter_mut().find(|(l, _)| *l == label) {
                Some((_, g)) => g.push(w),
                None => groups.push((label, vec![w])),
            }
        }
        Partition::canonical(groups.into_iter().map(|(_, g)| g).collect(), labels.len())
    }

    /// The single-block partition `{Ω}`.
    pub fn trivial(n_states: usize) -> Self {
        Partition::canonical(vec![(0..n_states).collect()], n_states)
    }

    /// The partition into singletons.
    pub fn discrete(n_states: usize) -> Self {
        Partition::canonical((0..n_states).map(|w| vec![w]).collect(), n_states)
    }

    pub fn n_states(&self) -> usize {
        self.block_of.len()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &[usize] {
        &self.blocks[k]
    }

    pub fn block_of(&self, w: usize) -> usize {
        self.block_of[w]
    }

    /// The block containing state `w`.
    pub fn block_containing(&self, w: usize) -> &[usize] {
        &self.blocks[self.block_of[w]]
    }

    fn same_space(&self, other: &Partition) -> Result<()> {
        if self.n_states() != other.n_states() {
            return Err(Error::SpaceMismatch {
                left: self.n_states(),
                right: other.n_states(),
            });
        }
        Ok(())
    }

    /// Finest common coarsening: states are merged whenever they share a
    /// block in either operand.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        self.same_space(other)?;
        let n = self.n_states();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for p in [self, other] {
            for block in &p.blocks {
                let root = find(&mut parent, block[0]);
                for &w in &block[1..] {
                    let r = find(&mut parent, w);
                    parent[r] = root;
                }
            }
        }
        let labels: Vec<usize> = (0..n).map(|w| find(&mut parent, w)).collect();
        Ok(Partition::from_labels(&labels))
    }

    /// Coarsest common refinement: the nonempty pairwise block intersections.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        self.same_space(other)?;
        let n = self.n_states();
        let labels: Vec<usize> = (0..n)
            .map(|w| self.block_of[w] * other.len() + other.block_of[w])
            .collect();
        Ok(Partition::from_labels(&labels))
    }

    /// True when every block of `other` lies inside a block of `self`.
    pub fn is_coarser_than(&self, other: &Partition) -> bool {
        self.n_states() == other.n_states()
            && other
                .blocks
                .iter()
                .all(|b| b.iter().all(|&w| self.block_of[w] == self.block_of[b[0]]))
    }

    pub fn is_finer_than(&self, other: &Partition) -> bool {
        other.is_coarser_than(self)
    }

    pub fn measures(&self, event: &Event) -> bool {
        let members = event.members();
        members.iter().all(|&w| {
            self.blocks[self.block_of[w]]
                .iter()
                .all(|v| members.binary_search(v).is_ok())
        })
    }

    /// Blocks lying inside `event`, when the event is measurable.
    pub fn blocks_within<'a>(&'a self, event: &'a Event) -> impl Iterator<Item = usize> + 'a {
        (0..self.blocks.len()).filter(move |&k| self.blocks[k].iter().all(|&w| event.contains(w)))
    }
}

/// A set of states, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct Event {
    members: Vec<usize>,
}

impl From<Vec<usize>> for Event {
    fn from(v: Vec<usize>) -> Self {
        Event::new(v)
    }
}

impl From<Event> for Vec<usize> {
    fn from(e: Event) -> Self {
        e.members
    }
}

impl Event {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Event { members }
    }

    pub fn full(n_states: usize) -> Self {
        Event {
            members: (0..n_states).collect(),
        }
    }

    pub fn single(w: usize) -> Self {
        Event { members: vec![w] }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, w: usize) -> bool {
        self.members.binary_search(&w).is_ok()
    }

    pub fn is_subset(&self, other: &Event) -> bool {
        self.members.iter().all(|&w| other.contains(w))
    }

    pub fn union(&self, other: &Event) -> Event {
        let mut m = self.members.clone();
        m.extend_from_slice(&other.members);
        Event::new(m)
    }

    pub fn intersects(&self, states: &[usize]) -> bool {
        states.iter().any(|&w| self.contains(w))
    }
}

impl Ord for Event {
    /// Canonical order: smaller events first, then lexicographic.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.members
            .len()
            .cmp(&other.members.len())
            .then_with(|| self.members.cmp(&other.members))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// One information partition per player, all over the same states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Partition>", into = "Vec<Partition>")]
pub struct InformationStructure {
    partitions: Vec<Partition>,
    join: Partition,
}

impl TryFrom<Vec<Partition>> for InformationStructure {
    type Error = Error;

    fn try_from(partitions: Vec<Partition>) -> Result<Self> {
        InformationStructure::new(partitions)
    }
}

impl From<InformationStructure> for Vec<Partition> {
    fn from(info: InformationStructure) -> Self {
        info.partitions
    }
}

impl InformationStructure {
    pub fn new(partitions: Vec<Partition>) -> Result<Self> {
        let first = partitions
            .first()
            .ok_or_else(|| Error::Partition("at least one player is required".into()))?;
        let mut join = first.clone();
        for p in &partitions[1..] {
            join = join.join(p)?;
        }
        Ok(InformationStructure { partitions, join })
    }

    pub fn n_players(&self) -> usize {
        self.partitions.len()
    }

    pub fn n_states(&self) -> usize {
        self.join.n_states()
    }

    pub fn partition(&self, i: usize) -> &Partition {
        &self.partitions[i]
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    /// The pooled partition generating ∨ F_i.
    pub fn join(&self) -> &Partition {
        &self.join
    }

    /// Meet of the members' partitions (their common-knowledge field).
    pub fn meet_of(&self, coalition: Coalition) -> Result<Partition> {
        meet_over(&self.partitions, coalition)
    }
}

pub(crate) fn meet_over(partitions: &[Partition], coalition: Coalition) -> Result<Partition> {
    let mut members = coalition.members();
    let first = members.next().ok_or(Error::EmptyCoalition)?;
    let mut meet = partitions
        .get(first)
        .ok_or(Error::UnknownPlayer(first))?
        .clone();
    for i in members {
        meet = meet.meet(partitions.get(i).ok_or(Error::UnknownPlayer(i))?)?;
    }
    Ok(meet)
}

/// Exact check that `f` is constant on every block of `p`.
pub fn is_measurable<T: PartialEq>(f: &[T], p: &Partition) -> bool {
    f.len() == p.n_states() && p.blocks().iter().all(|b| b.iter().all(|&w| f[w] == f[b[0]]))
}

/// `E(f | P)` on a finite space: the prior-weighted block average.
pub fn conditional_expectation(f: &[f64], p: &Partition, space: &StateSpace) -> Vec<f64> {
    assert_eq!(f.len(), space.len(), "function length must match the state space");
    assert_eq!(p.n_states(), space.len(), "partition must live on the state space");
    let mut out = vec![0.0; f.len()];
    for block in p.blocks() {
        let mass = space.mass(block);
        let value = block.iter().map(|&w| space.weight(w) * f[w]).sum::<f64>() / mass;
        for &w in block {
            out[w] = value;
        }
    }
    out
}

/// All nonempty unions of blocks of `partition`, in canonical event order.
pub fn events_of(partition: &Partition) -> Vec<Event> {
    let m = partition.len();
    assert!(m < 31, "too many blocks to enumerate events");
    let mut events: Vec<Event> = (1u32..(1 << m))
        .map(|mask| {
            let states = (0..m)
                .filter(|k| mask & (1 << k) != 0)
                .flat_map(|k| partition.block(k).iter().copied())
                .collect();
            Event::new(states)
        })
        .collect();
    events.sort();
    events
}

/// Every nonempty event discernible by all members of `coalition`.
pub fn common_knowledge_events(coalition: Coalition, info: &InformationStructure) -> Result<Vec<Event>> {
    Ok(events_of(&info.meet_of(coalition)?))
}
