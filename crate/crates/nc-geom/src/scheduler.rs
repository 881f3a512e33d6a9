//! Relay-side scheduling of queued packets: which packets may share a coded
//! broadcast, minimum clique partition of the coding graph under a size cap,
//! and the end-to-end slot accounting of the two-hop exchange scenario.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::coding::{is_valid_flow, Flow};
use crate::error::{Error, Result};
use crate::geometry::{distance, Radius};
use crate::topology::{draw_disk_points, Cell, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packet {
    pub id: u64,
    pub flow: Flow,
}

/// Packets queued at the relay of a cell, with unique packet ids and all
/// flow endpoints present in the cell.
#[derive(Debug, Clone)]
pub struct CodingInstance {
    cell: Cell,
    packets: Vec<Packet>,
}

impl CodingInstance {
    pub fn new(cell: Cell, packets: Vec<Packet>) -> Result<Self> {
        let mut ids: Vec<u64> = packets.iter().map(|p| p.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePacketId(w[0]));
        }
        for p in &packets {
            cell.position(p.flow.s)?;
            cell.position(p.flow.d)?;
        }
        Ok(CodingInstance { cell, packets })
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }
}

/// Two queued packets can ride one XOR broadcast iff each packet's
/// destination overheard the other packet's uplink: source-to-foreign-
/// destination distance within R, both ways. The two directions of one
/// two-hop exchange always qualify (each destination IS the other source).
pub fn can_combine(p: &Packet, q: &Packet, cell: &Cell) -> Result<bool> {
    let sp = cell.position(p.flow.s)?;
    let dp = cell.position(p.flow.d)?;
    let sq = cell.position(q.flow.s)?;
    let dq = cell.position(q.flow.d)?;
    let r = cell.radius().get();
    Ok(distance(sp, dq) <= r && distance(sq, dp) <= r)
}

/// Packets as vertices, combinability as edges.
pub struct CodingGraph {
    ids: Vec<u64>,
    adj: Vec<BitSet>,
}

impl CodingGraph {
    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(j)
    }

    /// Packet ids in vertex order.
    pub fn packet_ids(&self) -> &[u64] {
        &self.ids
    }
}

pub fn build_coding_graph(inst: &CodingInstance) -> CodingGraph {
    let packets = inst.packets();
    let n = packets.len();
    let mut adj: Vec<BitSet> = (0..n).map(|_| BitSet::new(n)).collect();
    for i in 0..n {
        for j in i + 1..n {
            if can_combine(&packets[i], &packets[j], inst.cell()).expect("instance validated") {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    CodingGraph { ids: packets.iter().map(|p| p.id).collect(), adj }
}

/// Maximum number of packets per coded broadcast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CapRepr", into = "CapRepr")]
pub enum CombineCap {
    Bounded(usize),
    Unbounded,
}

impl CombineCap {
    pub fn bounded(m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::BadCap);
        }
        Ok(CombineCap::Bounded(m))
    }

    pub fn allows(&self, size: usize) -> bool {
        match *self {
            CombineCap::Bounded(m) => size <= m,
            CombineCap::Unbounded => true,
        }
    }

    fn limit(&self, n: usize) -> usize {
        match *self {
            CombineCap::Bounded(m) => m.min(n),
            CombineCap::Unbounded => n,
        }
    }
}

impl std::fmt::Display for CombineCap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            CombineCap::Bounded(m) => write!(f, "{m}"),
            CombineCap::Unbounded => write!(f, "inf"),
        }
    }
}

/// JSON form: a positive integer, or "inf".
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CapRepr {
    Num(u64),
    Text(String),
}

impl TryFrom<CapRepr> for CombineCap {
    type Error = String;
    fn try_from(repr: CapRepr) -> std::result::Result<Self, String> {
        match repr {
            CapRepr::Num(0) => Err("combination cap must be at least 1".into()),
            CapRepr::Num(m) => Ok(CombineCap::Bounded(m as usize)),
            CapRepr::Text(s) if s == "inf" => Ok(CombineCap::Unbounded),
            CapRepr::Text(s) => Err(format!("expected a positive integer or \"inf\", got {s:?}")),
        }
    }
}

impl From<CombineCap> for CapRepr {
    fn from(cap: CombineCap) -> CapRepr {
        match cap {
            CombineCap::Bounded(m) => CapRepr::Num(m as u64),
            CombineCap::Unbounded => CapRepr::Text("inf".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionMode {
    /// Provably minimal group count; refuses more than 40 vertices.
    Exact,
    /// Repeatedly extract the largest cap-respecting clique; any size.
    Greedy,
}

/// Partition the packets into groups that each fit one coded broadcast:
/// every group is a clique of the coding graph with at most `cap` packets.
/// Groups come back as packet-id lists, each sorted, ordered by first id.
pub fn min_clique_partition(
    graph: &CodingGraph,
    cap: CombineCap,
    mode: PartitionMode,
) -> Result<Vec<Vec<u64>>> {
    let n = graph.vertex_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    if mode == PartitionMode::Exact && n > 40 {
        return Err(Error::PartitionTooLarge { vertices: n });
    }
    let greedy = greedy_partition(graph, cap);
    let groups = match mode {
        PartitionMode::Greedy => greedy,
        PartitionMode::Exact => exact_partition(graph, cap, greedy),
    };
    let mut out: Vec<Vec<u64>> = groups
        .into_iter()
        .map(|g| {
            let mut ids: Vec<u64> = g.iter().map(|&v| graph.ids[v]).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Largest clique within `avail` with at most `cap` vertices, tie-broken to
/// the lexicographically smallest packet-id set. Depth-first over vertices
/// in packet-id order visits vertex sets in exactly that order, so the first
/// best-size clique found wins ties.
fn capped_max_clique(graph: &CodingGraph, avail: &BitSet, cap: CombineCap) -> Vec<usize> {
    let n = graph.vertex_count();
    let limit = cap.limit(n);
    let mut by_id: Vec<usize> = avail.iter().collect();
    by_id.sort_by_key(|&v| graph.ids[v]);

    struct Search<'a> {
        graph: &'a CodingGraph,
        order: &'a [usize], // vertices by packet id
        limit: usize,
        cur: Vec<usize>,
        best: Vec<usize>,
    }

    impl Search<'_> {
        fn rec(&mut self, from: usize, cand: &BitSet) {
            if self.cur.len() > self.best.len() {
                self.best = self.cur.clone();
            }
            if self.cur.len() == self.limit {
                return;
            }
            for (k, &v) in self.order.iter().enumerate().skip(from) {
                if !cand.contains(v) {
                    continue;
                }
                // not enough vertices left to beat the incumbent
                if self.cur.len() + (self.order.len() - k) <= self.best.len() {
                    return;
                }
                let mut next = cand.clone();
                next.intersect_with(&self.graph.adj[v]);
                self.cur.push(v);
                self.rec(k + 1, &next);
                self.cur.pop();
            }
        }
    }

    let mut s = Search { graph, order: &by_id, limit, cur: Vec::new(), best: Vec::new() };
    s.rec(0, avail);
    s.best
}

fn greedy_partition(graph: &CodingGraph, cap: CombineCap) -> Vec<Vec<usize>> {
    let n = graph.vertex_count();
    let mut avail = BitSet::new(n);
    for v in 0..n {
        avail.insert(v);
    }
    let mut groups = Vec::new();
    let mut left = n;
    while left > 0 {
        let clique = capped_max_clique(graph, &avail, cap);
        debug_assert!(!clique.is_empty());
        for &v in &clique {
            avail.remove(v);
        }
        left -= clique.len();
        groups.push(clique);
    }
    groups
}

/// Branch and bound: repeatedly place the unplaced vertex with the fewest
/// joinable open groups (ties to higher degree) into each compatible group
/// or a fresh one, pruning on the incumbent and on leftover group capacity.
fn exact_partition(
    graph: &CodingGraph,
    cap: CombineCap,
    incumbent: Vec<Vec<usize>>,
) -> Vec<Vec<usize>> {
    let n = graph.vertex_count();

    // any pairwise-incompatible vertex set needs one group per vertex
    let mut indep = Vec::new();
    for v in 0..n {
        if indep.iter().all(|&u| !graph.has_edge(u, v)) {
            indep.push(v);
        }
    }
    let mut floor = indep.len();
    if let CombineCap::Bounded(m) = cap {
        floor = floor.max(n.div_ceil(m));
    }
    if incumbent.len() <= floor {
        return incumbent;
    }

    let degree: Vec<usize> = (0..n).map(|v| graph.adj[v].count()).collect();

    struct Group {
        members: Vec<usize>,
        // vertices adjacent to every member
        allowed: BitSet,
    }

    struct Search<'a> {
        graph: &'a CodingGraph,
        degree: &'a [usize],
        cap: CombineCap,
        floor: usize,
        placed: Vec<bool>,
        remaining: usize,
        groups: Vec<Group>,
        best: Vec<Vec<usize>>,
        proven: bool,
    }

    impl Search<'_> {
        fn joinable(&self, g: &Group, v: usize) -> bool {
            g.allowed.contains(v) && self.cap.allows(g.members.len() + 1)
        }

        /// Groups that must still be opened even if every free seat in an
        /// open group could be filled.
        fn capacity_deficit(&self) -> usize {
            match self.cap {
                CombineCap::Unbounded => 0,
                CombineCap::Bounded(m) => {
                    let seats: usize = self.groups.iter().map(|g| m - g.members.len()).sum();
                    self.remaining.saturating_sub(seats).div_ceil(m)
                }
            }
        }

        fn rec(&mut self) {
            if self.proven || self.groups.len() + self.capacity_deficit() >= self.best.len() {
                return;
            }
            if self.remaining == 0 {
                self.best = self.groups.iter().map(|g| g.members.clone()).collect();
                self.proven = self.best.len() <= self.floor;
                return;
            }

            let mut v = usize::MAX;
            let mut v_options = usize::MAX;
            for u in 0..self.placed.len() {
                if self.placed[u] {
                    continue;
                }
                let options = self.groups.iter().filter(|g| self.joinable(g, u)).count();
                if options < v_options
                    || (options == v_options && self.degree[u] > self.degree[v])
                {
                    v = u;
                    v_options = options;
                }
            }

            self.placed[v] = true;
            self.remaining -= 1;
            for gi in 0..self.groups.len() {
                if self.proven {
                    break;
                }
                if self.joinable(&self.groups[gi], v) {
                    let saved = self.groups[gi].allowed.clone();
                    self.groups[gi].members.push(v);
                    self.groups[gi].allowed.intersect_with(&self.graph.adj[v]);
                    self.rec();
                    self.groups[gi].members.pop();
                    self.groups[gi].allowed = saved;
                }
            }
            // fresh groups are interchangeable, so one new-group branch suffices
            if !self.proven {
                self.groups.push(Group { members: vec![v], allowed: self.graph.adj[v].clone() });
                self.rec();
                self.groups.pop();
            }
            self.placed[v] = false;
            self.remaining += 1;
        }
    }

    let mut s = Search {
        graph,
        degree: &degree,
        cap,
        floor,
        placed: vec![false; n],
        remaining: n,
        groups: Vec::new(),
        best: incumbent,
        proven: false,
    };
    s.rec();
    s.best
}

/// Slot accounting for one relay round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Coded downlink groups, as sorted packet-id lists.
    pub groups: Vec<Vec<u64>>,
    pub slots_with_nc: u64,
    pub slots_without_nc: u64,
    pub gain: f64,
}

/// The two-hop exchange scenario: `n_pairs` node pairs thrown uniformly in
/// the disk. A pair within direct reach exchanges its two packets in 2
/// slots. A far pair needs the relay: 2 uplink slots, and its two packets
/// join the downlink queue — one slot each without coding, one slot per
/// partition group with coding. The schedule is exact up to 40 queued
/// packets, greedy beyond.
pub fn run_realistic(n_pairs: usize, r: Radius, cap: CombineCap, seed: u64) -> Result<Schedule> {
    assert!(n_pairs >= 1, "the scenario needs at least one pair");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = draw_disk_points(&mut rng, 2 * n_pairs, r);
    let cell = Cell::new(r, nodes)?;

    let mut packets = Vec::new();
    let mut invalid = 0u64;
    for k in 0..n_pairs {
        let (a, b) = (NodeId(2 * k as u32), NodeId(2 * k as u32 + 1));
        if is_valid_flow(Flow::new(a, b), &cell)? {
            packets.push(Packet { id: 2 * k as u64, flow: Flow::new(a, b) });
            packets.push(Packet { id: 2 * k as u64 + 1, flow: Flow::new(b, a) });
        } else {
            invalid += 1;
        }
    }
    let valid = n_pairs as u64 - invalid;

    let inst = CodingInstance::new(cell, packets)?;
    let graph = build_coding_graph(&inst);
    let mode =
        if graph.vertex_count() <= 40 { PartitionMode::Exact } else { PartitionMode::Greedy };
    let groups = min_clique_partition(&graph, cap, mode)?;

    let slots_without_nc = 2 * invalid + 4 * valid;
    let slots_with_nc = 2 * invalid + 2 * valid + groups.len() as u64;
    let gain = slots_without_nc as f64 / slots_with_nc as f64;
    Ok(Schedule { groups, slots_with_nc, slots_without_nc, gain })
}
