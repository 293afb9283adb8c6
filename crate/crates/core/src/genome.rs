//! NEAT genomes: node and connection genes with historical innovation
//! markers.
//!
//! Conventions, fixed across the whole crate:
//!
//! * Node ids are canonical: inputs are `0..n_in` (id doubles as the input
//!   slot), outputs are `n_in..n_in + n_out`, hidden nodes get ids from the
//!   shared [`InnovationRegistry`]. `nodes` stays sorted by id,
//!   `connections` by innovation number.
//! * The initial topology is fully connected with no hidden nodes;
//!   `input i -> output j` carries innovation `i * n_out + j`, so all
//!   initial genomes share markers.
//! * Only the enabled subgraph must be acyclic. Structural operations check
//!   candidates against that invariant and skip when nothing legal exists.
//! * Two genes with equal innovation numbers have equal endpoints, enforced
//!   by allocating innovations exclusively through the registry. Parallel
//!   genes (same endpoints, distinct innovations) can arise from crossover
//!   of lineages that discovered a link independently; the phenotype sums
//!   them.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Input,
    Hidden,
    Output,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Input => write!(f, "input"),
            NodeKind::Hidden => write!(f, "hidden"),
            NodeKind::Output => write!(f, "output"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeGene<F> {
    pub id: u32,
    pub kind: NodeKind,
    pub bias: F,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionGene<F> {
    pub innovation: u32,
    pub in_node: u32,
    pub out_node: u32,
    pub weight: F,
    pub enabled: bool,
}

/// Per-generation source of innovation numbers and node ids.
///
/// `next_innovation` and `next_node_id` persist for the lifetime of a run;
/// the memo tables reset at every generation boundary so identical
/// structural events within one generation share markers, while the same
/// event in later generations counts as a new discovery.
#[derive(Clone, Debug)]
pub struct InnovationRegistry {
    next_innovation: u32,
    next_node_id: u32,
    connection_memo: HashMap<(u32, u32), u32>,
    split_memo: HashMap<u32, (u32, u32, u32)>,
}

impl InnovationRegistry {
    pub fn new(n_in: usize, n_out: usize) -> Self {
        InnovationRegistry {
            next_innovation: (n_in * n_out) as u32,
            next_node_id: (n_in + n_out) as u32,
            connection_memo: HashMap::new(),
            split_memo: HashMap::new(),
        }
    }

    /// Registry whose counters sit above everything a genome already uses.
    /// For resuming from a stored or transplanted genome.
    pub fn for_genome<F: Scalar>(genome: &Genome<F>) -> Self {
        let max_innov = genome
            .connections
            .iter()
            .map(|c| c.innovation + 1)
            .max()
            .unwrap_or(0);
        let max_id = genome.nodes.iter().map(|n| n.id + 1).max().unwrap_or(0);
        InnovationRegistry {
            next_innovation: max_innov.max((genome.n_in * genome.n_out) as u32),
            next_node_id: max_id.max((genome.n_in + genome.n_out) as u32),
            connection_memo: HashMap::new(),
            split_memo: HashMap::new(),
        }
    }

    /// Like [`InnovationRegistry::for_genome`], over a whole population.
    pub fn for_population<F: Scalar>(genomes: &[Genome<F>]) -> Self {
        let mut reg = InnovationRegistry::new(0, 0);
        for g in genomes {
            let r = Self::for_genome(g);
            reg.next_innovation = reg.next_innovation.max(r.next_innovation);
            reg.next_node_id = reg.next_node_id.max(r.next_node_id);
        }
        reg
    }

    /// Clear the memo tables at a generation boundary.
    pub fn begin_generation(&mut self) {
        self.connection_memo.clear();
        self.split_memo.clear();
    }

    /// Innovation number for adding `in_node -> out_node`; memoized within
    /// the current generation.
    pub fn connection_innovation(&mut self, in_node: u32, out_node: u32) -> u32 {
        if let Some(&n) = self.connection_memo.get(&(in_node, out_node)) {
            return n;
        }
        let n = self.next_innovation;
        self.next_innovation += 1;
        self.connection_memo.insert((in_node, out_node), n);
        n
    }

    /// `(node id, in->node innovation, node->out innovation)` for splitting
    /// the connection with the given innovation; memoized per generation.
    pub fn node_split(&mut self, split_innovation: u32) -> (u32, u32, u32) {
        if let Some(&t) = self.split_memo.get(&split_innovation) {
            return t;
        }
        let t = self.alloc_split();
        self.split_memo.insert(split_innovation, t);
        t
    }

    /// Unmemoized split allocation, for the rare case where the memoized
    /// node id already exists in the mutating genome.
    pub fn fresh_node_split(&mut self) -> (u32, u32, u32) {
        self.alloc_split()
    }

    fn alloc_split(&mut self) -> (u32, u32, u32) {
        let id = self.next_node_id;
        self.next_node_id += 1;
        let a = self.next_innovation;
        let b = self.next_innovation + 1;
        self.next_innovation += 2;
        (id, a, b)
    }
}

/// Mutation rates and kernels. Rates are per-gene Bernoulli probabilities
/// except the structural ones, which are per-genome events
/// (`structural_attempts` independent tries per category).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationConfig {
    /// Per-connection probability of a weight mutation.
    pub weight_mutation_rate: f64,
    /// Within a weight mutation: probability of a full redraw instead of a
    /// perturbation.
    pub weight_replace_prob: f64,
    /// Std of the additive perturbation kernel.
    pub weight_perturb_std: f64,
    /// Std of the redraw kernel (also used for brand-new connections).
    pub weight_replace_std: f64,
    /// Per non-input-node probability of a bias mutation (same kernel).
    pub bias_mutation_rate: f64,
    /// Probability of one add-or-remove-connection event.
    pub connection_structural_rate: f64,
    /// Probability of one add-or-remove-node event.
    pub node_structural_rate: f64,
    /// Per-connection probability of toggling the enabled flag.
    pub toggle_rate: f64,
    /// Independent Bernoulli tries per structural category.
    pub structural_attempts: u32,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            weight_mutation_rate: 0.5,
            weight_replace_prob: 0.1,
            weight_perturb_std: 0.5,
            weight_replace_std: 1.0,
            bias_mutation_rate: 0.1,
            connection_structural_rate: 0.1,
            node_structural_rate: 0.1,
            toggle_rate: 0.01,
            structural_attempts: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Genome<F: Scalar> {
    n_in: usize,
    n_out: usize,
    nodes: Vec<NodeGene<F>>,
    connections: Vec<ConnectionGene<F>>,
    /// Most recent training fitness; bookkeeping only, never serialized.
    pub fitness: Option<f64>,
}

impl<F: Scalar> Genome<F> {
    /// Minimal fully-connected starting genome. Output biases and all
    /// weights are drawn from N(0, 1): biases first in id order, then
    /// weights in innovation order.
    pub fn new_initial<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Self {
        let mut nodes = Vec::with_capacity(n_in + n_out);
        for id in 0..n_in {
            nodes.push(NodeGene {
                id: id as u32,
                kind: NodeKind::Input,
                bias: F::zero(),
            });
        }
        for id in n_in..n_in + n_out {
            nodes.push(NodeGene {
                id: id as u32,
                kind: NodeKind::Output,
                bias: F::standard_normal(rng),
            });
        }
        let mut connections = Vec::with_capacity(n_in * n_out);
        for i in 0..n_in {
            for j in 0..n_out {
                connections.push(ConnectionGene {
                    innovation: (i * n_out + j) as u32,
                    in_node: i as u32,
                    out_node: (n_in + j) as u32,
                    weight: F::standard_normal(rng),
                    enabled: true,
                });
            }
        }
        Genome {
            n_in,
            n_out,
            nodes,
            connections,
            fitness: None,
        }
    }

    /// Like [`Genome::new_initial`], but draws innovation numbers from a
    /// registry instead of assuming the canonical `i * n_out + j` numbering.
    ///
    /// Use this when injecting fresh genomes into a population whose markers
    /// did not start from a same-arity initial genome (e.g. after a
    /// transplant), so that a given innovation number still identifies a
    /// single pair of endpoints across the whole population.
    pub fn new_initial_with_registry<R: Rng + ?Sized>(
        n_in: usize,
        n_out: usize,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) -> Self {
        let mut g = Self::new_initial(n_in, n_out, rng);
        for conn in &mut g.connections {
            conn.innovation = registry.connection_innovation(conn.in_node, conn.out_node);
        }
        g.connections.sort_by_key(|c| c.innovation);
        debug_assert!(g.validate().is_ok());
        g
    }

    /// Assemble a genome from explicit parts, validating every invariant.
    pub fn from_parts(
        n_in: usize,
        n_out: usize,
        mut nodes: Vec<NodeGene<F>>,
        mut connections: Vec<ConnectionGene<F>>,
    ) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        connections.sort_by_key(|c| c.innovation);
        let genome = Genome {
            n_in,
            n_out,
            nodes,
            connections,
            fitness: None,
        };
        genome.validate()?;
        Ok(genome)
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn nodes(&self) -> &[NodeGene<F>] {
        &self.nodes
    }

    pub fn connections(&self) -> &[ConnectionGene<F>] {
        &self.connections
    }

    pub fn node(&self, id: u32) -> Option<&NodeGene<F>> {
        self.nodes
            .binary_search_by_key(&id, |n| n.id)
            .ok()
            .map(|i| &self.nodes[i])
    }

    /// Enabled connections plus biased (non-input) nodes: the quantities a
    /// forward pass actually multiplies and adds.
    pub fn param_count(&self) -> usize {
        let conns = self.connections.iter().filter(|c| c.enabled).count();
        let biases = self
            .nodes
            .iter()
            .filter(|n| n.kind != NodeKind::Input)
            .count();
        conns + biases
    }

    /// Check every structural invariant; see the module docs for the list.
    pub fn validate(&self) -> Result<()> {
        let io = self.n_in + self.n_out;
        let mut expected_io = 0usize;
        let mut prev_id: Option<u32> = None;
        for n in &self.nodes {
            if let Some(p) = prev_id {
                if n.id <= p {
                    return Err(Error::MalformedGenome(format!(
                        "node ids not strictly increasing at id {}",
                        n.id
                    )));
                }
            }
            prev_id = Some(n.id);
            let expected_kind = if (n.id as usize) < self.n_in {
                NodeKind::Input
            } else if (n.id as usize) < io {
                NodeKind::Output
            } else {
                NodeKind::Hidden
            };
            if n.kind != expected_kind {
                return Err(Error::MalformedGenome(format!(
                    "node {} has kind {} but its id range implies {}",
                    n.id, n.kind, expected_kind
                )));
            }
            if (n.id as usize) < io {
                expected_io += 1;
            }
        }
        if expected_io != io {
            return Err(Error::MalformedGenome(format!(
                "expected {} input/output nodes, found {}",
                io, expected_io
            )));
        }

        let mut prev_innov: Option<u32> = None;
        for c in &self.connections {
            if let Some(p) = prev_innov {
                if c.innovation <= p {
                    return Err(Error::MalformedGenome(format!(
                        "innovations not strictly increasing at {}",
                        c.innovation
                    )));
                }
            }
            prev_innov = Some(c.innovation);
            let out = self.node(c.out_node).ok_or_else(|| {
                Error::MalformedGenome(format!(
                    "connection {} references missing node {}",
                    c.innovation, c.out_node
                ))
            })?;
            self.node(c.in_node).ok_or_else(|| {
                Error::MalformedGenome(format!(
                    "connection {} references missing node {}",
                    c.innovation, c.in_node
                ))
            })?;
            if out.kind == NodeKind::Input {
                return Err(Error::MalformedGenome(format!(
                    "connection {} targets input node {}",
                    c.innovation, c.out_node
                )));
            }
        }

        self.check_acyclic()
    }

    fn check_acyclic(&self) -> Result<()> {
        // Kahn's algorithm over enabled edges; leftovers sit on a cycle.
        let index: HashMap<u32, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id, i))
            .collect();
        let mut indegree = vec![0usize; self.nodes.len()];
        let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for c in self.connections.iter().filter(|c| c.enabled) {
            let (i, o) = (index[&c.in_node], index[&c.out_node]);
            indegree[o] += 1;
            out_edges[i].push(o);
        }
        let mut ready: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| indegree[i] == 0)
            .collect();
        let mut done = 0;
        while let Some(i) = ready.pop() {
            done += 1;
            for &o in &out_edges[i] {
                indegree[o] -= 1;
                if indegree[o] == 0 {
                    ready.push(o);
                }
            }
        }
        if done == self.nodes.len() {
            return Ok(());
        }
        let stuck: HashSet<u32> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| indegree[i] > 0)
            .map(|(_, n)| n.id)
            .collect();
        let witness = self
            .connections
            .iter()
            .find(|c| c.enabled && stuck.contains(&c.in_node) && stuck.contains(&c.out_node))
            .expect("a cycle has at least one internal edge");
        Err(Error::CycleDetected {
            in_node: witness.in_node,
            out_node: witness.out_node,
        })
    }

    fn has_pair(&self, in_node: u32, out_node: u32) -> bool {
        self.connections
            .iter()
            .any(|c| c.in_node == in_node && c.out_node == out_node)
    }

    /// Is `to` reachable from `from` along enabled edges?
    fn reaches(&self, from: u32, to: u32) -> bool {
        if from == to {
            return true;
        }
        let mut seen = HashSet::new();
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            for c in self
                .connections
                .iter()
                .filter(|c| c.enabled && c.in_node == n)
            {
                if c.out_node == to {
                    return true;
                }
                if seen.insert(c.out_node) {
                    stack.push(c.out_node);
                }
            }
        }
        false
    }

    fn insert_connection(&mut self, gene: ConnectionGene<F>) {
        let pos = self
            .connections
            .partition_point(|c| c.innovation < gene.innovation);
        self.connections.insert(pos, gene);
    }

    fn insert_node(&mut self, gene: NodeGene<F>) {
        let pos = self.nodes.partition_point(|n| n.id < gene.id);
        self.nodes.insert(pos, gene);
    }

    /// Apply one round of mutations in a fixed phase order: weights, biases,
    /// connection add/remove, node add/remove, enable toggles. The order is
    /// part of the reproducibility contract since it fixes RNG consumption.
    pub fn mutate<R: Rng + ?Sized>(
        &mut self,
        cfg: &MutationConfig,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) {
        for i in 0..self.connections.len() {
            if rng.random::<f64>() < cfg.weight_mutation_rate {
                self.connections[i].weight =
                    Self::mutated_value(self.connections[i].weight, cfg, rng);
            }
        }
        for i in 0..self.nodes.len() {
            if self.nodes[i].kind == NodeKind::Input {
                continue;
            }
            if rng.random::<f64>() < cfg.bias_mutation_rate {
                self.nodes[i].bias = Self::mutated_value(self.nodes[i].bias, cfg, rng);
            }
        }
        for _ in 0..cfg.structural_attempts {
            if rng.random::<f64>() < cfg.connection_structural_rate {
                if rng.random::<f64>() < 0.5 {
                    self.add_connection(cfg, registry, rng);
                } else {
                    self.remove_connection(rng);
                }
            }
        }
        for _ in 0..cfg.structural_attempts {
            if rng.random::<f64>() < cfg.node_structural_rate {
                if rng.random::<f64>() < 0.5 {
                    self.add_node(registry, rng);
                } else {
                    self.remove_node(rng);
                }
            }
        }
        for i in 0..self.connections.len() {
            if rng.random::<f64>() < cfg.toggle_rate {
                self.toggle(i);
            }
        }
    }

    fn mutated_value<R: Rng + ?Sized>(current: F, cfg: &MutationConfig, rng: &mut R) -> F {
        if rng.random::<f64>() < cfg.weight_replace_prob {
            F::standard_normal(rng) * F::from_f64_lossy(cfg.weight_replace_std)
        } else {
            current + F::standard_normal(rng) * F::from_f64_lossy(cfg.weight_perturb_std)
        }
    }

    /// Add a uniformly chosen legal connection; returns false when no legal
    /// site exists. Legal: endpoints exist, target is non-input, the pair is
    /// absent, and the enabled subgraph stays acyclic.
    fn add_connection<R: Rng + ?Sized>(
        &mut self,
        cfg: &MutationConfig,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) -> bool {
        let mut candidates = Vec::new();
        for a in self.nodes.iter().map(|n| n.id).collect::<Vec<_>>() {
            for b in &self.nodes {
                if b.kind == NodeKind::Input || b.id == a {
                    continue;
                }
                if self.has_pair(a, b.id) || self.reaches(b.id, a) {
                    continue;
                }
                candidates.push((a, b.id));
            }
        }
        if candidates.is_empty() {
            return false;
        }
        let (a, b) = candidates[rng.random_range(0..candidates.len())];
        let innovation = registry.connection_innovation(a, b);
        let weight = F::standard_normal(rng) * F::from_f64_lossy(cfg.weight_replace_std);
        self.insert_connection(ConnectionGene {
            innovation,
            in_node: a,
            out_node: b,
            weight,
            enabled: true,
        });
        true
    }

    fn remove_connection<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        if self.connections.is_empty() {
            return false;
        }
        let i = rng.random_range(0..self.connections.len());
        self.connections.remove(i);
        true
    }

    /// Split a uniformly chosen enabled connection: the old gene is disabled
    /// and replaced by `in -> new` (weight 1) and `new -> out` (old weight);
    /// the new node starts with bias 0.
    fn add_node<R: Rng + ?Sized>(
        &mut self,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) -> bool {
        let enabled: Vec<usize> = (0..self.connections.len())
            .filter(|&i| self.connections[i].enabled)
            .collect();
        if enabled.is_empty() {
            return false;
        }
        let i = enabled[rng.random_range(0..enabled.len())];
        let old = self.connections[i];
        let (mut node_id, mut innov_in, mut innov_out) = registry.node_split(old.innovation);
        if self.node(node_id).is_some() {
            // The memoized id was minted for an earlier split this
            // generation and this genome already carries it; fresh ids keep
            // the innovation->endpoints map single-valued.
            (node_id, innov_in, innov_out) = registry.fresh_node_split();
        }
        self.connections[i].enabled = false;
        self.insert_node(NodeGene {
            id: node_id,
            kind: NodeKind::Hidden,
            bias: F::zero(),
        });
        self.insert_connection(ConnectionGene {
            innovation: innov_in,
            in_node: old.in_node,
            out_node: node_id,
            weight: F::one(),
            enabled: true,
        });
        self.insert_connection(ConnectionGene {
            innovation: innov_out,
            in_node: node_id,
            out_node: old.out_node,
            weight: old.weight,
            enabled: true,
        });
        true
    }

    /// Delete a uniformly chosen hidden node and every incident connection.
    fn remove_node<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let hidden: Vec<u32> = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Hidden)
            .map(|n| n.id)
            .collect();
        if hidden.is_empty() {
            return false;
        }
        let id = hidden[rng.random_range(0..hidden.len())];
        self.nodes.retain(|n| n.id != id);
        self.connections
            .retain(|c| c.in_node != id && c.out_node != id);
        true
    }

    /// Flip the enabled flag; enabling is skipped if it would close a cycle.
    fn toggle(&mut self, i: usize) {
        if self.connections[i].enabled {
            self.connections[i].enabled = false;
            return;
        }
        let (a, b) = (self.connections[i].in_node, self.connections[i].out_node);
        if !self.reaches(b, a) {
            self.connections[i].enabled = true;
        }
    }

    /// Recombine two parents with equal arity.
    ///
    /// Matching genes (equal innovation) are always inherited, weight and
    /// enabled flag together from a fair-coin parent; disjoint and excess
    /// genes are each kept with probability 1/2. Node biases come from a
    /// fair-coin choice among the parents carrying the node. Enabled genes
    /// that would close a cycle in the child are re-disabled in innovation
    /// order.
    pub fn crossover<R: Rng + ?Sized>(
        a: &Genome<F>,
        b: &Genome<F>,
        rng: &mut R,
    ) -> Result<Genome<F>> {
        if a.n_in != b.n_in || a.n_out != b.n_out {
            return Err(Error::ParentArityMismatch(a.n_in, a.n_out, b.n_in, b.n_out));
        }
        let mut connections = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.connections.len() || j < b.connections.len() {
            let ca = a.connections.get(i);
            let cb = b.connections.get(j);
            match (ca, cb) {
                (Some(x), Some(y)) if x.innovation == y.innovation => {
                    debug_assert_eq!((x.in_node, x.out_node), (y.in_node, y.out_node));
                    let pick = if rng.random::<f64>() < 0.5 { x } else { y };
                    connections.push(*pick);
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x.innovation < y.innovation => {
                    if rng.random::<f64>() < 0.5 {
                        connections.push(*x);
                    }
                    i += 1;
                }
                (Some(_), Some(y)) => {
                    if rng.random::<f64>() < 0.5 {
                        connections.push(*y);
                    }
                    j += 1;
                }
                (Some(x), None) => {
                    if rng.random::<f64>() < 0.5 {
                        connections.push(*x);
                    }
                    i += 1;
                }
                (None, Some(y)) => {
                    if rng.random::<f64>() < 0.5 {
                        connections.push(*y);
                    }
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }

        let io = a.n_in + a.n_out;
        let mut nodes: Vec<NodeGene<F>> = Vec::with_capacity(io);
        for id in 0..a.n_in as u32 {
            nodes.push(NodeGene {
                id,
                kind: NodeKind::Input,
                bias: F::zero(),
            });
        }
        for id in a.n_in as u32..io as u32 {
            let pick = if rng.random::<f64>() < 0.5 { a } else { b };
            nodes.push(*pick.node(id).expect("outputs exist in both parents"));
        }
        let hidden_ids: BTreeSet<u32> = connections
            .iter()
            .flat_map(|c| [c.in_node, c.out_node])
            .filter(|&id| id >= io as u32)
            .collect();
        for id in hidden_ids {
            let node = match (a.node(id), b.node(id)) {
                (Some(x), Some(y)) => {
                    if rng.random::<f64>() < 0.5 {
                        *x
                    } else {
                        *y
                    }
                }
                (Some(x), None) => *x,
                (None, Some(y)) => *y,
                (None, None) => unreachable!("endpoint nodes exist in a carrying parent"),
            };
            nodes.push(node);
        }
        nodes.sort_by_key(|n| n.id);

        let mut child = Genome {
            n_in: a.n_in,
            n_out: a.n_out,
            nodes,
            connections,
            fitness: None,
        };
        child.repair_cycles();
        debug_assert!(child.validate().is_ok());
        Ok(child)
    }

    /// Walk connections in innovation order, disabling any enabled gene
    /// that closes a cycle against the genes accepted so far.
    fn repair_cycles(&mut self) {
        let mut kept: Vec<(u32, u32)> = Vec::new();
        for i in 0..self.connections.len() {
            if !self.connections[i].enabled {
                continue;
            }
            let (a, b) = (self.connections[i].in_node, self.connections[i].out_node);
            if Self::path_exists(&kept, b, a) || a == b {
                self.connections[i].enabled = false;
            } else {
                kept.push((a, b));
            }
        }
    }

    fn path_exists(edges: &[(u32, u32)], from: u32, to: u32) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            for &(s, t) in edges.iter().filter(|&&(s, _)| s == n) {
                debug_assert_eq!(s, n);
                if t == to {
                    return true;
                }
                if seen.insert(t) {
                    stack.push(t);
                }
            }
        }
        false
    }

    /// NEAT compatibility distance
    /// `(c1 * excess + c2 * disjoint) / N + c3 * mean |dw|` with `N` the
    /// larger connection-gene count (no small-genome exemption).
    pub fn compatibility_distance(a: &Genome<F>, b: &Genome<F>, c1: f64, c2: f64, c3: f64) -> f64 {
        let n = a.connections.len().max(b.connections.len());
        if n == 0 {
            return 0.0;
        }
        let max_a = a.connections.last().map(|c| c.innovation);
        let max_b = b.connections.last().map(|c| c.innovation);
        let (mut i, mut j) = (0, 0);
        let (mut matching, mut disjoint, mut excess) = (0usize, 0usize, 0usize);
        let mut weight_diff = 0.0f64;
        while i < a.connections.len() || j < b.connections.len() {
            let ca = a.connections.get(i);
            let cb = b.connections.get(j);
            match (ca, cb) {
                (Some(x), Some(y)) if x.innovation == y.innovation => {
                    matching += 1;
                    weight_diff += (x.weight - y.weight).abs().to_f64_lossy();
                    i += 1;
                    j += 1;
                }
                (Some(x), _) if cb.is_none() || x.innovation < cb.unwrap().innovation => {
                    match max_b {
                        Some(m) if x.innovation <= m => disjoint += 1,
                        _ => excess += 1,
                    }
                    i += 1;
                }
                (_, Some(y)) => {
                    match max_a {
                        Some(m) if y.innovation <= m => disjoint += 1,
                        _ => excess += 1,
                    }
                    j += 1;
                }
                _ => unreachable!(),
            }
        }
        let mean_w = if matching > 0 {
            weight_diff / matching as f64
        } else {
            0.0
        };
        (c1 * excess as f64 + c2 * disjoint as f64) / n as f64 + c3 * mean_w
    }
}
