//! Flow and combination validity, symmetric completion, and the exact
//! maximum-coding-number searches.
//!
//! A set of flows through the relay is jointly XOR-decodable when every
//! flow's endpoints are too far apart to talk directly (so the relay carries
//! the traffic) and every destination has overheard every other flow's
//! source, giving it the keys to strip the foreign packets out of a coded
//! broadcast. The exact search uses the structure of symmetric combinations:
//! far node pairs {a,b} and {c,d} can ride in one combination iff they are
//! node-disjoint and all four cross links a-c, a-d, b-c, b-d are connected,
//! so the symmetric combinations are exactly the cliques of the
//! pair-compatibility graph and the maximum coding number is twice the
//! maximum clique size.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::geometry::{distance, is_connected, is_convex_position, Point2D};
use crate::topology::{Cell, NodeId};

/// One unicast flow relayed through the cell center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Flow {
    pub s: NodeId,
    pub d: NodeId,
}

impl Flow {
    pub fn new(s: NodeId, d: NodeId) -> Self {
        debug_assert_ne!(s, d, "a flow needs two distinct endpoints");
        Flow { s, d }
    }

    pub fn reversed(self) -> Self {
        Flow { s: self.d, d: self.s }
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.s, self.d)
    }
}

/// Outcome of a maximum-coding-number search. `nodes` are the sorted ids of
/// every endpoint in the witness; `flows` are the witness flows sorted by
/// (source, destination). For the exact searches the witness is a valid
/// combination of symmetric pairs, so `max_number` is even or zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodingResult {
    pub max_number: usize,
    pub nodes: Vec<NodeId>,
    pub flows: Vec<Flow>,
}

impl CodingResult {
    fn empty() -> Self {
        CodingResult { max_number: 0, nodes: Vec::new(), flows: Vec::new() }
    }
}

/// A flow is admissible iff its endpoints cannot reach each other directly:
/// both are nodes of the cell (hence within R of the relay) and their
/// distance strictly exceeds R.
pub fn is_valid_flow(flow: Flow, cell: &Cell) -> Result<bool> {
    let ps = cell.position(flow.s)?;
    let pd = cell.position(flow.d)?;
    Ok(distance(ps, pd) > cell.radius().get())
}

/// Joint decodability of a flow set: all sources distinct, all destinations
/// distinct, every flow valid, and for every two flows each source within R
/// of the other flow's destination (the destination overheard that source's
/// uplink and can cancel its packet).
pub fn is_valid_combination(flows: &[Flow], cell: &Cell) -> Result<bool> {
    let r = cell.radius().get();
    let mut pos = Vec::with_capacity(flows.len());
    for f in flows {
        pos.push((cell.position(f.s)?, cell.position(f.d)?));
    }

    let mut srcs: Vec<NodeId> = flows.iter().map(|f| f.s).collect();
    srcs.sort_unstable();
    if srcs.windows(2).any(|w| w[0] == w[1]) {
        return Ok(false);
    }
    let mut dsts: Vec<NodeId> = flows.iter().map(|f| f.d).collect();
    dsts.sort_unstable();
    if dsts.windows(2).any(|w| w[0] == w[1]) {
        return Ok(false);
    }

    for &(ps, pd) in &pos {
        if !(distance(ps, pd) > r) {
            return Ok(false);
        }
    }
    for i in 0..pos.len() {
        for j in 0..pos.len() {
            if i != j && distance(pos[i].0, pos[j].1) > r {
                return Ok(false);
            }
        }
    }

    // Convex position is forced only when every flow travels with its
    // reverse; a one-directional set can fold an unmatched endpoint strictly
    // inside the hull of the others and still decode.
    #[cfg(debug_assertions)]
    if flows.iter().all(|f| flows.contains(&f.reversed())) {
        debug_assert!(
            is_convex_position(&combination_points(flows, cell)),
            "a decodable exchange set must have its nodes in convex position"
        );
    }
    Ok(true)
}

#[cfg(debug_assertions)]
fn combination_points(flows: &[Flow], cell: &Cell) -> Vec<Point2D> {
    let mut ids: Vec<NodeId> = flows.iter().flat_map(|f| [f.s, f.d]).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.iter().map(|&id| cell.position(id).expect("endpoints checked")).collect()
}

/// Add the reverse of every one-directional flow. The input must be a valid
/// combination; the enlarged set is revalidated and an error is returned if
/// the added reverses break joint decodability (a reverse source must reach
/// every other destination, which the forward direction does not promise).
pub fn symmetric_completion(flows: &[Flow], cell: &Cell) -> Result<Vec<Flow>> {
    if !is_valid_combination(flows, cell)? {
        return Err(Error::InvalidCombination);
    }
    let have: HashSet<Flow> = flows.iter().copied().collect();
    let mut out = flows.to_vec();
    for f in flows {
        if !have.contains(&f.reversed()) {
            out.push(f.reversed());
        }
    }
    if !is_valid_combination(&out, cell)? {
        return Err(Error::CompletionConflict);
    }
    Ok(out)
}

/// Vertices are unordered far pairs of cell nodes (candidate symmetric flow
/// pairs); edges join pairs that can share a combination.
struct PairGraph {
    /// node indices into `Cell::nodes`, lower index first
    pairs: Vec<(u32, u32)>,
    adj: Vec<BitSet>,
}

fn build_pair_graph(cell: &Cell) -> PairGraph {
    let r = cell.radius();
    let nodes = cell.nodes();
    let n = nodes.len();

    // boolean connectivity once, so the search and the validity predicates
    // share one threshold semantics
    let mut conn: Vec<BitSet> = (0..n).map(|_| BitSet::new(n)).collect();
    for i in 0..n {
        for j in i + 1..n {
            if is_connected(nodes[i].1, nodes[j].1, r) {
                conn[i].insert(j);
                conn[j].insert(i);
            }
        }
    }

    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !conn[i].contains(j) {
                pairs.push((i as u32, j as u32));
            }
        }
    }

    let m = pairs.len();
    let mut adj: Vec<BitSet> = (0..m).map(|_| BitSet::new(m)).collect();
    for p in 0..m {
        let (a, b) = (pairs[p].0 as usize, pairs[p].1 as usize);
        for q in p + 1..m {
            let (c, d) = (pairs[q].0 as usize, pairs[q].1 as usize);
            if a != c
                && a != d
                && b != c
                && b != d
                && conn[a].contains(c)
                && conn[a].contains(d)
                && conn[b].contains(c)
                && conn[b].contains(d)
            {
                adj[p].insert(q);
                adj[q].insert(p);
            }
        }
    }
    PairGraph { pairs, adj }
}

/// Branch-and-bound maximum-clique search over the pair graph. Pruning uses
/// a greedy-coloring upper bound but only cuts branches that cannot even tie
/// the incumbent, so every maximum clique is visited and the reported witness
/// is the one with the lexicographically smallest sorted node-id set.
struct CliqueSearch<'a> {
    g: &'a PairGraph,
    ids: Vec<NodeId>,
    points: Vec<Point2D>,
    best_size: usize,
    best_nodes: Vec<NodeId>,
    best_pairs: Vec<u32>,
    expanded: u64,
    budget: Option<u64>,
    truncated: bool,
}

impl<'a> CliqueSearch<'a> {
    fn new(g: &'a PairGraph, cell: &Cell, budget: Option<u64>) -> Self {
        CliqueSearch {
            g,
            ids: cell.nodes().iter().map(|&(id, _)| id).collect(),
            points: cell.nodes().iter().map(|&(_, p)| p).collect(),
            best_size: 0,
            best_nodes: Vec::new(),
            best_pairs: Vec::new(),
            expanded: 0,
            budget,
            truncated: false,
        }
    }

    fn witness_ids(&self, clique: &[u32]) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = clique
            .iter()
            .flat_map(|&p| {
                let (a, b) = self.g.pairs[p as usize];
                [self.ids[a as usize], self.ids[b as usize]]
            })
            .collect();
        ids.sort_unstable();
        ids
    }

    fn offer(&mut self, clique: &[u32]) {
        if clique.len() < self.best_size {
            return;
        }
        let ids = self.witness_ids(clique);
        debug_assert!(
            {
                let pts: Vec<Point2D> = clique
                    .iter()
                    .flat_map(|&p| {
                        let (a, b) = self.g.pairs[p as usize];
                        [self.points[a as usize], self.points[b as usize]]
                    })
                    .collect();
                is_convex_position(&pts)
            },
            "clique witnesses must be in convex position"
        );
        if clique.len() > self.best_size || (!clique.is_empty() && ids < self.best_nodes) {
            self.best_size = clique.len();
            self.best_nodes = ids;
            self.best_pairs = clique.to_vec();
        }
    }

    /// Candidates grouped by greedy color, ascending; a clique inside the
    /// first k color classes has at most k vertices.
    fn color_order(&self, cand: &BitSet) -> Vec<(u32, u32)> {
        let m = self.g.pairs.len();
        let mut out = Vec::with_capacity(cand.count());
        let mut uncolored = cand.clone();
        let mut class = BitSet::new(m);
        let mut color = 0u32;
        while !uncolored.is_empty() {
            color += 1;
            class.copy_from(&uncolored);
            while let Some(v) = class.first() {
                class.remove(v);
                uncolored.remove(v);
                out.push((v as u32, color));
                class.subtract(&self.g.adj[v]);
            }
        }
        out
    }

    fn expand(&mut self, cur: &mut Vec<u32>, cand: &BitSet) {
        if self.truncated {
            return;
        }
        self.expanded += 1;
        if let Some(b) = self.budget {
            if self.expanded > b {
                self.truncated = true;
                return;
            }
        }
        if cand.is_empty() {
            self.offer(cur);
            return;
        }
        let order = self.color_order(cand);
        let mut cand = cand.clone();
        for i in (0..order.len()).rev() {
            let (v, c) = order[i];
            if cur.len() + (c as usize) < self.best_size {
                return;
            }
            cand.remove(v as usize);
            let mut next = BitSet::new(self.g.pairs.len());
            self.g.adj[v as usize].intersect_into(&cand, &mut next);
            cur.push(v);
            self.expand(cur, &next);
            cur.pop();
            if self.truncated {
                return;
            }
        }
    }
}

/// Largest clique a degree-greedy construction finds; used only to prime the
/// incumbent so the exact search prunes earlier.
fn greedy_clique(g: &PairGraph) -> Vec<u32> {
    let m = g.pairs.len();
    let mut cand = BitSet::new(m);
    for v in 0..m {
        cand.insert(v);
    }
    let mut clique = Vec::new();
    let mut scratch = BitSet::new(m);
    loop {
        let mut pick = None;
        let mut pick_deg = 0usize;
        for v in cand.iter() {
            g.adj[v].intersect_into(&cand, &mut scratch);
            let deg = scratch.count();
            if pick.is_none() || deg > pick_deg {
                pick = Some(v);
                pick_deg = deg;
            }
        }
        match pick {
            None => break,
            Some(v) => {
                clique.push(v as u32);
                cand.remove(v);
                cand.intersect_with(&g.adj[v]);
            }
        }
    }
    clique
}

fn run_search(cell: &Cell, budget: Option<u64>) -> (CodingResult, bool) {
    let g = build_pair_graph(cell);
    if g.pairs.is_empty() {
        return (CodingResult::empty(), false);
    }
    let mut search = CliqueSearch::new(&g, cell, budget);
    search.offer(&greedy_clique(&g));
    let m = g.pairs.len();
    let mut all = BitSet::new(m);
    for v in 0..m {
        all.insert(v);
    }
    search.expand(&mut Vec::new(), &all);

    let mut flows: Vec<Flow> = search
        .best_pairs
        .iter()
        .flat_map(|&p| {
            let (a, b) = g.pairs[p as usize];
            let (ia, ib) = (search.ids[a as usize], search.ids[b as usize]);
            [Flow::new(ia, ib), Flow::new(ib, ia)]
        })
        .collect();
    flows.sort_unstable();
    let result = CodingResult {
        max_number: flows.len(),
        nodes: search.best_nodes.clone(),
        flows,
    };
    (result, search.truncated)
}

/// Exact maximum size of a valid exchange combination (every flow paired
/// with its reverse), with a witness. Among maximum witnesses the one whose
/// sorted node-id set is lexicographically smallest is returned, making
/// results reproducible.
///
/// Exchange sets are what a relay schedules in the two-hop traffic model,
/// but they are not always the global optimum over arbitrary flow sets:
/// rarely, a cell admits a larger combination of one-directional flows
/// whose reverses do not fit (see
/// [`max_coding_number_bruteforce`] with `allow_asymmetric` and the
/// `one_directional_maximum_exceeding_exchange_maximum` test).
pub fn max_coding_number(cell: &Cell) -> CodingResult {
    run_search(cell, None).0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub result: CodingResult,
    /// True when the node budget ran out; the result is then only a lower
    /// bound on the true maximum.
    pub truncated: bool,
}

/// Like [`max_coding_number`] but giving up after `node_budget` search-tree
/// expansions. With a budget the search never touches, the outcome is exact
/// and `truncated` is false.
pub fn max_coding_number_budgeted(cell: &Cell, node_budget: u64) -> SearchOutcome {
    let (result, truncated) = run_search(cell, Some(node_budget));
    SearchOutcome { result, truncated }
}

/// Exhaustive reference search. Symmetric mode enumerates every pairing of
/// far node pairs (cap: 14 nodes); asymmetric mode enumerates every flow set
/// with distinct sources and distinct destinations (cap: 8 nodes). Both test
/// decodability directly, independent of the clique machinery.
pub fn max_coding_number_bruteforce(cell: &Cell, allow_asymmetric: bool) -> Result<CodingResult> {
    let cap = if allow_asymmetric { 8 } else { 14 };
    if cell.len() > cap {
        return Err(Error::BruteForceCap { nodes: cell.len(), cap });
    }
    if allow_asymmetric {
        Ok(brute_asymmetric(cell))
    } else {
        Ok(brute_symmetric(cell))
    }
}

fn far_pairs(cell: &Cell) -> Vec<(usize, usize)> {
    let r = cell.radius().get();
    let nodes = cell.nodes();
    let mut out = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if distance(nodes[i].1, nodes[j].1) > r {
                out.push((i, j));
            }
        }
    }
    out
}

fn brute_symmetric(cell: &Cell) -> CodingResult {
    let pairs = far_pairs(cell);
    let nodes = cell.nodes();

    struct State<'a> {
        cell: &'a Cell,
        nodes: &'a [(NodeId, Point2D)],
        pairs: &'a [(usize, usize)],
        chosen: Vec<usize>,
        used: u32,
        best_size: usize,
        best_nodes: Vec<NodeId>,
        best_flows: Vec<Flow>,
    }

    impl State<'_> {
        fn leaf(&mut self) {
            if self.chosen.len() < self.best_size {
                return;
            }
            let flows: Vec<Flow> = self
                .chosen
                .iter()
                .flat_map(|&k| {
                    let (i, j) = self.pairs[k];
                    let (a, b) = (self.nodes[i].0, self.nodes[j].0);
                    [Flow::new(a, b), Flow::new(b, a)]
                })
                .collect();
            if !is_valid_combination(&flows, self.cell).expect("ids from the cell") {
                return;
            }
            let mut ids: Vec<NodeId> = flows.iter().map(|f| f.s).collect();
            ids.sort_unstable();
            if self.chosen.len() > self.best_size
                || (!flows.is_empty() && ids < self.best_nodes)
            {
                self.best_size = self.chosen.len();
                self.best_nodes = ids;
                let mut flows = flows;
                flows.sort_unstable();
                self.best_flows = flows;
            }
        }

        fn recurse(&mut self, k: usize) {
            if k == self.pairs.len() {
                self.leaf();
                return;
            }
            // branches that cannot even tie the incumbent are hopeless
            if self.chosen.len() + (self.pairs.len() - k) < self.best_size {
                return;
            }
            let (i, j) = self.pairs[k];
            if self.used & (1 << i) == 0 && self.used & (1 << j) == 0 {
                self.used |= (1 << i) | (1 << j);
                self.chosen.push(k);
                self.recurse(k + 1);
                self.chosen.pop();
                self.used &= !((1 << i) | (1 << j));
            }
            self.recurse(k + 1);
        }
    }

    let mut st = State {
        cell,
        nodes,
        pairs: &pairs,
        chosen: Vec::new(),
        used: 0,
        best_size: 0,
        best_nodes: Vec::new(),
        best_flows: Vec::new(),
    };
    st.recurse(0);
    CodingResult {
        max_number: 2 * st.best_size,
        nodes: st.best_nodes,
        flows: st.best_flows,
    }
}

fn brute_asymmetric(cell: &Cell) -> CodingResult {
    let r = cell.radius().get();
    let nodes = cell.nodes();
    // candidate flows: both directions of every far pair, in index order
    let mut cands: Vec<(usize, usize)> = Vec::new();
    for (i, j) in far_pairs(cell) {
        cands.push((i, j));
        cands.push((j, i));
    }
    cands.sort_unstable();

    struct State<'a> {
        r: f64,
        nodes: &'a [(NodeId, Point2D)],
        cands: &'a [(usize, usize)],
        chosen: Vec<(usize, usize)>,
        used_src: u32,
        used_dst: u32,
        best: Vec<(usize, usize)>,
    }

    impl State<'_> {
        fn recurse(&mut self, k: usize) {
            if self.chosen.len() + (self.cands.len() - k) <= self.best.len() {
                return;
            }
            if k == self.cands.len() {
                self.best = self.chosen.clone();
                return;
            }
            let (s, d) = self.cands[k];
            let compatible = self.used_src & (1 << s) == 0
                && self.used_dst & (1 << d) == 0
                && self.chosen.iter().all(|&(s2, d2)| {
                    distance(self.nodes[s].1, self.nodes[d2].1) <= self.r
                        && distance(self.nodes[s2].1, self.nodes[d].1) <= self.r
                });
            if compatible {
                self.used_src |= 1 << s;
                self.used_dst |= 1 << d;
                self.chosen.push((s, d));
                self.recurse(k + 1);
                self.chosen.pop();
                self.used_src &= !(1 << s);
                self.used_dst &= !(1 << d);
            }
            self.recurse(k + 1);
        }
    }

    let mut st = State {
        r,
        nodes,
        cands: &cands,
        chosen: Vec::new(),
        used_src: 0,
        used_dst: 0,
        best: Vec::new(),
    };
    st.recurse(0);

    let mut flows: Vec<Flow> = st
        .best
        .iter()
        .map(|&(s, d)| Flow::new(nodes[s].0, nodes[d].0))
        .collect();
    flows.sort_unstable();
    let mut ids: Vec<NodeId> = flows.iter().flat_map(|f| [f.s, f.d]).collect();
    ids.sort_unstable();
    ids.dedup();
    debug_assert!(
        is_valid_combination(&flows, cell).unwrap_or(false) || flows.is_empty(),
        "asymmetric search must return a decodable set"
    );
    CodingResult { max_number: flows.len(), nodes: ids, flows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Radius;
    use crate::topology::{gen_uniform, RandomSpec};

    fn cell_of(points: &[(f64, f64)]) -> Cell {
        let nodes = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| (NodeId(i as u32), Point2D::new(x, y)))
            .collect();
        Cell::new(Radius::new(1.0).unwrap(), nodes).unwrap()
    }

    fn wheel(radius: f64) -> Cell {
        cell_of(&[(radius, 0.0), (0.0, radius), (-radius, 0.0), (0.0, -radius)])
    }

    #[test]
    fn flow_validity_hand_cases() {
        let cell = cell_of(&[(0.6, 0.0), (-0.6, 0.0), (0.3, 0.0), (-0.3, 0.0), (1.0, 0.0), (0.0, -1.0)]);
        assert!(is_valid_flow(Flow::new(NodeId(0), NodeId(1)), &cell).unwrap());
        assert!(!is_valid_flow(Flow::new(NodeId(2), NodeId(3)), &cell).unwrap());
        // both endpoints exactly on the cell boundary, sqrt(2) apart
        assert!(is_valid_flow(Flow::new(NodeId(4), NodeId(5)), &cell).unwrap());
        assert!(is_valid_flow(Flow::new(NodeId(9), NodeId(0)), &cell).is_err());
    }

    #[test]
    fn four_node_wheel_is_decodable_at_small_radius_only() {
        let tight = wheel(0.51);
        let all = vec![
            Flow::new(NodeId(0), NodeId(2)),
            Flow::new(NodeId(2), NodeId(0)),
            Flow::new(NodeId(1), NodeId(3)),
            Flow::new(NodeId(3), NodeId(1)),
        ];
        assert!(is_valid_combination(&all, &tight).unwrap());

        // at radius 0.8 the side chords stretch to 0.8*sqrt(2) > 1 and the
        // destinations can no longer overhear the foreign sources
        let wide = wheel(0.8);
        assert!(!is_valid_combination(&all, &wide).unwrap());

        // a single valid flow is always decodable on its own
        assert!(is_valid_combination(&[Flow::new(NodeId(0), NodeId(2))], &wide).unwrap());
    }

    #[test]
    fn duplicate_endpoints_invalidate() {
        let cell = cell_of(&[(0.9, 0.0), (-0.9, 0.0), (0.0, 0.9)]);
        let dup_src = [Flow::new(NodeId(0), NodeId(1)), Flow::new(NodeId(0), NodeId(2))];
        assert!(!is_valid_combination(&dup_src, &cell).unwrap());
        let dup_dst = [Flow::new(NodeId(1), NodeId(0)), Flow::new(NodeId(2), NodeId(0))];
        assert!(!is_valid_combination(&dup_dst, &cell).unwrap());
    }

    #[test]
    fn completion_adds_reverses() {
        let cell = wheel(0.51);
        let done = symmetric_completion(&[Flow::new(NodeId(0), NodeId(2))], &cell).unwrap();
        assert_eq!(done, vec![Flow::new(NodeId(0), NodeId(2)), Flow::new(NodeId(2), NodeId(0))]);

        let sym = vec![Flow::new(NodeId(1), NodeId(3)), Flow::new(NodeId(3), NodeId(1))];
        assert_eq!(symmetric_completion(&sym, &cell).unwrap(), sym);

        // invalid input is a contract violation, not a silent fixup
        let bad = [Flow::new(NodeId(0), NodeId(1))];
        assert!(matches!(symmetric_completion(&bad, &cell), Err(Error::InvalidCombination)));
    }

    #[test]
    fn completion_can_conflict_on_thin_rectangles() {
        // {a->b, c->d} is decodable, but the reverse of a->b needs b to reach
        // d (distance 1.811), so no symmetric superset exists
        let cell = cell_of(&[(-0.9, 0.1), (0.9, 0.1), (0.9, -0.1), (-0.9, -0.1)]);
        let flows = [Flow::new(NodeId(0), NodeId(1)), Flow::new(NodeId(2), NodeId(3))];
        assert!(is_valid_combination(&flows, &cell).unwrap());
        assert!(matches!(
            symmetric_completion(&flows, &cell),
            Err(Error::CompletionConflict)
        ));
    }

    #[test]
    fn search_trivial_cells() {
        assert_eq!(max_coding_number(&cell_of(&[])).max_number, 0);
        assert_eq!(max_coding_number(&cell_of(&[(0.5, 0.5)])).max_number, 0);
        // two neighboring nodes: no valid flow at all
        assert_eq!(max_coding_number(&cell_of(&[(0.3, 0.0), (-0.3, 0.0)])).max_number, 0);

        let two = max_coding_number(&cell_of(&[(0.6, 0.0), (-0.6, 0.0)]));
        assert_eq!(two.max_number, 2);
        assert_eq!(two.nodes, vec![NodeId(0), NodeId(1)]);
        assert_eq!(two.flows, vec![Flow::new(NodeId(0), NodeId(1)), Flow::new(NodeId(1), NodeId(0))]);
    }

    #[test]
    fn search_finds_the_wheel() {
        let res = max_coding_number(&wheel(0.51));
        assert_eq!(res.max_number, 4);
        assert_eq!(res.nodes, vec![NodeId(0), NodeId(1), NodeId(2), NodeId(3)]);
        assert!(is_valid_combination(&res.flows, &wheel(0.51)).unwrap());

        // at radius 0.8 the two diameters are incompatible; only one rides
        assert_eq!(max_coding_number(&wheel(0.8)).max_number, 2);
    }

    #[test]
    fn search_is_deterministic() {
        let cell = gen_uniform(&RandomSpec::UniformCount { count: 30, seed: 11 }, Radius::new(1.0).unwrap()).unwrap();
        let a = max_coding_number(&cell);
        let b = max_coding_number(&cell);
        assert_eq!(a, b);
        assert!(is_valid_combination(&a.flows, &cell).unwrap() || a.max_number == 0);
        assert_eq!(a.max_number % 2, 0);
    }

    #[test]
    fn tiny_budget_reports_truncation() {
        let cell = gen_uniform(&RandomSpec::UniformCount { count: 40, seed: 5 }, Radius::new(1.0).unwrap()).unwrap();
        let out = max_coding_number_budgeted(&cell, 1);
        assert!(out.truncated);
        let exact = max_coding_number(&cell);
        assert!(out.result.max_number <= exact.max_number);

        let generous = max_coding_number_budgeted(&cell, u64::MAX);
        assert!(!generous.truncated);
        assert_eq!(generous.result, exact);
    }

    #[test]
    fn bruteforce_agrees_on_small_cells() {
        for seed in 0..40u64 {
            let cell = gen_uniform(
                &RandomSpec::UniformCount { count: 8, seed },
                Radius::new(1.0).unwrap(),
            )
            .unwrap();
            let fast = max_coding_number(&cell);
            let slow = max_coding_number_bruteforce(&cell, false).unwrap();
            assert_eq!(fast, slow, "seed {seed}");
        }
    }

    #[test]
    fn bruteforce_rejects_large_cells() {
        let big = gen_uniform(&RandomSpec::UniformCount { count: 15, seed: 0 }, Radius::new(1.0).unwrap()).unwrap();
        assert!(matches!(
            max_coding_number_bruteforce(&big, false),
            Err(Error::BruteForceCap { nodes: 15, cap: 14 })
        ));
        let mid = gen_uniform(&RandomSpec::UniformCount { count: 9, seed: 0 }, Radius::new(1.0).unwrap()).unwrap();
        assert!(matches!(
            max_coding_number_bruteforce(&mid, true),
            Err(Error::BruteForceCap { nodes: 9, cap: 8 })
        ));
    }

    #[test]
    fn asymmetric_sets_can_beat_symmetric_on_crafted_cells() {
        // Hexagon at radius 0.9: antipodal pairs are the only far pairs, no
        // two of them are compatible, so the best symmetric combination has 2
        // flows. Yet three one-directional flows chained around the ring are
        // jointly decodable: every destination is adjacent to both foreign
        // sources. "Symmetric search suffices" is a heuristic, not a theorem,
        // and this cell is the witness.
        let rho = 0.9f64;
        let pts: Vec<(f64, f64)> = (0..6)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / 6.0;
                (rho * th.cos(), rho * th.sin())
            })
            .collect();
        let cell = cell_of(&pts);
        let sym = max_coding_number_bruteforce(&cell, false).unwrap();
        let asym = max_coding_number_bruteforce(&cell, true).unwrap();
        assert_eq!(sym.max_number, 2);
        assert_eq!(asym.max_number, 3);
        assert!(is_valid_combination(&asym.flows, &cell).unwrap());
        assert_eq!(max_coding_number(&cell).max_number, sym.max_number);
    }

    #[test]
    fn one_directional_maximum_exceeding_exchange_maximum() {
        // Not a contrived cell: six points drawn uniformly in the unit disk
        // (found by scanning seeds, pinned here verbatim). The three flows
        // 0->5, 2->1, 4->3 use six distinct nodes, every flow spans more
        // than R, and all six source-to-foreign-destination links are under
        // R, so they decode jointly. No reverse can be added — the reverses
        // would need destination-to-destination links the cell lacks — and
        // no exchange combination of size 4 exists, so allowing
        // one-directional flows raises the maximum from 2 to 3. About 1% of
        // uniform cells with up to 8 nodes look like this.
        let cell = cell_of(&[
            (0.21916780845917641, -0.06019849785833731),
            (-0.40662010097275175, -0.68442014796104500),
            (0.36980955444230629, 0.34910829908260910),
            (0.88823640978020613, 0.12065056138684517),
            (-0.12652289669913863, 0.17730610303286615),
            (0.03533280238303863, 0.99301349720376786),
        ]);
        let chain = vec![
            Flow::new(NodeId(0), NodeId(5)),
            Flow::new(NodeId(2), NodeId(1)),
            Flow::new(NodeId(4), NodeId(3)),
        ];
        assert!(is_valid_combination(&chain, &cell).unwrap());
        assert!(matches!(symmetric_completion(&chain, &cell), Err(Error::CompletionConflict)));

        let sym = max_coding_number_bruteforce(&cell, false).unwrap();
        let free = max_coding_number_bruteforce(&cell, true).unwrap();
        assert_eq!(sym.max_number, 2);
        assert_eq!(free.max_number, 3);
        assert_eq!(max_coding_number(&cell).max_number, 2);
    }

    #[test]
    fn witness_json_shape() {
        let res = max_coding_number(&wheel(0.51));
        let json = serde_json::to_value(&res).unwrap();
        assert_eq!(json["max_number"], 4);
        assert_eq!(json["nodes"], serde_json::json!([0, 1, 2, 3]));
        assert_eq!(json["flows"][0], serde_json::json!({"s": 0, "d": 2}));
    }
}
