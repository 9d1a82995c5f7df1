//! Label evolution: memory initialization, asynchronous speaker/listener
//! sweeps, and the single-label (LPA) degenerate mode.
//!
//! All randomness in a run comes from one [`SlpaRng`] seeded from
//! [`EngineConfig::seed`] and consumed in a fixed order each sweep:
//!
//! 1. shuffle of the listener visit order;
//! 2. for each listener in that order, one speaker draw per neighbor in
//!    ascending neighbor index;
//! 3. then, only if several labels tie for the maximum, one tie-break draw.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

/// Generator behind every randomized step in the crate.
pub type SlpaRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SlpaRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const DEFAULT_ITERATIONS: usize = 100;
/// Below this many sweeps outputs are not yet stable.
pub const MIN_STABLE_ITERATIONS: usize = 20;
pub const LPA_SWEEP_CAP: usize = 1000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("iteration count must be at least 1")]
    ZeroIterations,
}

/// A community label. Labels are the node indices that originated them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub usize);

impl Label {
    pub fn origin(self) -> usize {
        self.0
    }
}

/// Multiset of the labels a node has heard.
///
/// Held as `(label, count)` pairs in descending count order: the leading
/// pair inline, the rest on the heap. A speaker draw picks a uniform
/// position in `0..total` and walks the cumulative counts, which is exactly
/// a frequency-proportional draw; most draws stop at the inline pair.
/// Labels are stored as `u32`, so graphs are limited to `u32::MAX` nodes.
#[derive(Debug, Clone)]
pub struct Memory {
    head: (u32, u32),
    tail: Vec<(u32, u32)>,
    total: u32,
}

impl PartialEq for Memory {
    /// Equal as multisets; storage order is not compared.
    fn eq(&self, other: &Self) -> bool {
        self.total == other.total && self.iter().eq(other.iter())
    }
}

impl Eq for Memory {}

#[inline]
fn narrow(label: Label) -> u32 {
    u32::try_from(label.0).expect("label exceeds u32 range")
}

impl Memory {
    pub fn new(own: Label) -> Self {
        Memory {
            head: (narrow(own), 1),
            tail: Vec::new(),
            total: 1,
        }
    }

    /// Builds a memory from label counts; zero counts are ignored.
    pub fn from_counts(counts: impl IntoIterator<Item = (Label, usize)>) -> Self {
        let mut merged: BTreeMap<u32, u32> = BTreeMap::new();
        for (label, c) in counts {
            if c > 0 {
                let c = u32::try_from(c).expect("count exceeds u32 range");
                *merged.entry(narrow(label)).or_insert(0) += c;
            }
        }
        let mut entries: Vec<(u32, u32)> = merged.into_iter().collect();
        entries.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
        let total = entries.iter().map(|&(_, c)| c).sum();
        let mut entries = entries.into_iter();
        Memory {
            head: entries.next().unwrap_or((0, 0)),
            tail: entries.collect(),
            total,
        }
    }

    #[inline]
    pub fn push(&mut self, label: Label) {
        let label = narrow(label);
        self.total += 1;
        if self.head.0 == label || self.head.1 == 0 {
            self.head = (label, self.head.1 + 1);
            return;
        }
        let Some(mut i) = self.tail.iter().position(|&(l, _)| l == label) else {
            self.tail.push((label, 1));
            return;
        };
        self.tail[i].1 += 1;
        while i > 0 && self.tail[i - 1].1 < self.tail[i].1 {
            self.tail.swap(i - 1, i);
            i -= 1;
        }
        if i == 0 && self.tail[0].1 > self.head.1 {
            std::mem::swap(&mut self.head, &mut self.tail[0]);
        }
    }

    pub fn total(&self) -> usize {
        self.total as usize
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    fn entries(&self) -> impl Iterator<Item = &(u32, u32)> {
        std::iter::once(&self.head)
            .filter(|e| e.1 > 0)
            .chain(&self.tail)
    }

    /// Distinct labels with their counts, ascending by label.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (Label, usize)> {
        let mut entries: Vec<(u32, u32)> = self.entries().copied().collect();
        entries.sort_unstable();
        entries
            .into_iter()
            .map(|(l, c)| (Label(l as usize), c as usize))
    }

    /// Label found at `position` when the counts are laid end to end in
    /// storage order.
    #[inline]
    fn at(&self, position: u32) -> Label {
        if position < self.head.1 {
            return Label(self.head.0 as usize);
        }
        let mut position = position - self.head.1;
        for &(label, count) in &self.tail {
            if position < count {
                return Label(label as usize);
            }
            position -= count;
        }
        unreachable!("position beyond memory total")
    }

    pub fn count(&self, label: Label) -> usize {
        let Ok(label) = u32::try_from(label.0) else {
            return 0;
        };
        self.entries()
            .find(|&&(l, _)| l == label)
            .map_or(0, |&(_, c)| c as usize)
    }

    /// Occurrence count per label, ordered by label.
    pub fn counts(&self) -> BTreeMap<Label, usize> {
        self.iter().collect()
    }

    /// Label with the highest count; ties go to the smallest label.
    pub fn most_frequent(&self) -> Label {
        let mut best = (0usize, Label(usize::MAX));
        for (label, count) in self.iter() {
            if count > best.0 {
                best = (count, label);
            }
        }
        best.1
    }
}

/// How a neighbor picks the single label it sends.
pub trait SpeakerRule {
    fn speak<R: Rng + ?Sized>(&self, memory: &Memory, rng: &mut R) -> Label;
}

/// How a listener picks the label it keeps from those it received.
pub trait ListenerRule {
    fn listen<R: Rng + ?Sized>(&mut self, received: &[Label], rng: &mut R) -> Label;
}

/// Sends a label drawn with probability proportional to its count.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrequencySpeaker;

impl SpeakerRule for FrequencySpeaker {
    #[inline]
    fn speak<R: Rng + ?Sized>(&self, memory: &Memory, rng: &mut R) -> Label {
        assert!(!memory.is_empty(), "speaker memory is empty");
        memory.at(rng.random_range(0..memory.total))
    }
}

/// Keeps the most frequent received label, breaking ties uniformly.
///
/// Counts by sorting a copy of the received labels, so its state is bounded
/// by the largest degree rather than the number of labels.
#[derive(Debug, Clone, Default)]
pub struct MajorityListener {
    sorted: Vec<Label>,
    tied: Vec<Label>,
}

impl MajorityListener {
    /// Fills `self.tied` with the most frequent received labels, ascending.
    fn collect_tied(&mut self, received: &[Label]) {
        assert!(!received.is_empty(), "listener received no labels");
        self.sorted.clear();
        self.sorted.extend_from_slice(received);
        self.sorted.sort_unstable();
        self.tied.clear();
        let mut best = 0;
        for run in self.sorted.chunk_by(|a, b| a == b) {
            if run.len() > best {
                best = run.len();
                self.tied.clear();
            }
            if run.len() == best {
                self.tied.push(run[0]);
            }
        }
    }

    /// Majority adoption that keeps `current` whenever it is already one of
    /// the most frequent received labels.
    pub fn adopt<R: Rng + ?Sized>(
        &mut self,
        received: &[Label],
        current: Label,
        rng: &mut R,
    ) -> Label {
        self.collect_tied(received);
        if self.tied.binary_search(&current).is_ok() {
            return current;
        }
        self.pick(rng)
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Label {
        if self.tied.len() == 1 {
            return self.tied[0];
        }
        self.tied[rng.random_range(0..self.tied.len())]
    }
}

impl ListenerRule for MajorityListener {
    fn listen<R: Rng + ?Sized>(&mut self, received: &[Label], rng: &mut R) -> Label {
        self.collect_tied(received);
        self.pick(rng)
    }
}

/// Frequency-proportional draw from one memory.
pub fn speaker_rule<R: Rng + ?Sized>(memory: &Memory, rng: &mut R) -> Label {
    FrequencySpeaker.speak(memory, rng)
}

/// Most popular label among `received`, ties broken uniformly at random.
pub fn listener_rule<R: Rng + ?Sized>(received: &[Label], rng: &mut R) -> Label {
    MajorityListener::default().listen(received, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Slpa,
    Lpa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Number of evolution sweeps. Ignored in LPA mode.
    pub iterations: usize,
    pub seed: u64,
    pub mode: Mode,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            mode: Mode::Slpa,
        }
    }
}

impl EngineConfig {
    pub fn slpa(iterations: usize, seed: u64) -> Self {
        EngineConfig {
            iterations,
            seed,
            mode: Mode::Slpa,
        }
    }

    pub fn lpa(seed: u64) -> Self {
        EngineConfig {
            iterations: 0,
            seed,
            mode: Mode::Lpa,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.mode == Mode::Slpa && self.iterations == 0 {
            return Err(EngineError::ZeroIterations);
        }
        Ok(())
    }
}

/// Per-node memories after some number of sweeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryState {
    memories: Vec<Memory>,
    sweeps_completed: usize,
}

impl MemoryState {
    pub fn from_memories(memories: Vec<Memory>, sweeps_completed: usize) -> Self {
        MemoryState {
            memories,
            sweeps_completed,
        }
    }

    pub fn memories(&self) -> &[Memory] {
        &self.memories
    }

    pub fn memory(&self, node: usize) -> &Memory {
        &self.memories[node]
    }

    pub fn node_count(&self) -> usize {
        self.memories.len()
    }

    pub fn sweeps_completed(&self) -> usize {
        self.sweeps_completed
    }

    /// Debug dump: one line per node, `id<TAB>label:count label:count ...`
    /// using external ids. Not a stable format.
    pub fn dump(&self, graph: &Graph) -> String {
        let mut out = String::new();
        for (i, memory) in self.memories.iter().enumerate() {
            out.push_str(graph.external_id(i));
            out.push('\t');
            let counts = memory.counts();
            let mut first = true;
            for (label, count) in counts {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{}:{}", graph.external_id(label.0), count);
            }
            out.push('\n');
        }
        out
    }
}

/// Every node starts out remembering only its own label.
pub fn initialize(graph: &Graph) -> MemoryState {
    MemoryState {
        memories: (0..graph.node_count())
            .map(|i| Memory::new(Label(i)))
            .collect(),
        sweeps_completed: 0,
    }
}

/// Reusable buffers for sweeps over one graph.
struct SweepScratch<L> {
    order: Vec<usize>,
    received: Vec<Label>,
    listener: L,
}

fn sweep_with<S, L, R>(
    state: &mut MemoryState,
    graph: &Graph,
    speaker: &S,
    scratch: &mut SweepScratch<L>,
    rng: &mut R,
) where
    S: SpeakerRule,
    L: ListenerRule,
    R: Rng + ?Sized,
{
    let SweepScratch {
        order,
        received,
        listener,
    } = scratch;
    order.clear();
    order.extend(0..graph.node_count());
    order.shuffle(rng);

    for &node in order.iter() {
        let neighbors = graph.neighbors(node);
        let heard = if neighbors.is_empty() {
            // no speakers; the node repeats its own dominant label
            state.memories[node].most_frequent()
        } else {
            received.clear();
            for &nb in neighbors {
                received.push(speaker.speak(&state.memories[nb], rng));
            }
            listener.listen(received, rng)
        };
        state.memories[node].push(heard);
    }
    state.sweeps_completed += 1;
}

/// One asynchronous sweep: fresh random visit order, and each listener
/// sees its neighbors' memories as already updated earlier in the sweep.
pub fn sweep<R: Rng + ?Sized>(state: &mut MemoryState, graph: &Graph, rng: &mut R) {
    let mut scratch = SweepScratch {
        order: Vec::with_capacity(graph.node_count()),
        received: Vec::new(),
        listener: MajorityListener::default(),
    };
    sweep_with(state, graph, &FrequencySpeaker, &mut scratch, rng);
}

/// Initializes and evolves memories with custom speaker and listener rules.
pub fn run_with_rules<S, L>(
    graph: &Graph,
    iterations: usize,
    seed: u64,
    speaker: &S,
    listener: L,
) -> Result<MemoryState, EngineError>
where
    S: SpeakerRule,
    L: ListenerRule,
{
    if iterations == 0 {
        return Err(EngineError::ZeroIterations);
    }
    let mut rng = rng_from_seed(seed);
    let mut state = initialize(graph);
    let mut scratch = SweepScratch {
        order: Vec::with_capacity(graph.node_count()),
        received: Vec::with_capacity(graph.summary().max_degree),
        listener,
    };
    for _ in 0..iterations {
        sweep_with(&mut state, graph, speaker, &mut scratch, &mut rng);
    }
    Ok(state)
}

/// Runs the configured dynamic.
///
/// In SLPA mode this is `initialize` followed by `iterations` sweeps, so
/// every memory ends with exactly `iterations + 1` entries. In LPA mode each
/// memory holds only the node's final converged label.
pub fn run(graph: &Graph, config: &EngineConfig) -> Result<MemoryState, EngineError> {
    config.validate()?;
    match config.mode {
        Mode::Slpa => run_with_rules(
            graph,
            config.iterations,
            config.seed,
            &FrequencySpeaker,
            MajorityListener::default(),
        ),
        Mode::Lpa => {
            let outcome = run_lpa(graph, config.seed);
            Ok(MemoryState {
                memories: outcome.labels.iter().map(|&l| Memory::new(l)).collect(),
                sweeps_completed: outcome.sweeps,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpaOutcome {
    /// Final label per node.
    pub labels: Vec<Label>,
    pub sweeps: usize,
    pub converged: bool,
}

impl LpaOutcome {
    /// Disjoint cover with one community per connected group of nodes
    /// sharing a label.
    pub fn cover(&self, graph: &Graph) -> crate::Cover {
        let sets: Vec<Vec<Label>> = self.labels.iter().map(|&l| vec![l]).collect();
        crate::postprocess::build_cover(graph, &sets)
    }
}

/// Classic single-label propagation: each listener adopts the majority
/// label of its neighbors in a fresh random order per sweep, keeping its
/// current label when that is already among the majority and otherwise
/// breaking ties uniformly, until every node already holds one of its neighborhood's majority labels
/// or [`LPA_SWEEP_CAP`] sweeps have run.
pub fn run_lpa(graph: &Graph, seed: u64) -> LpaOutcome {
    let n = graph.node_count();
    let mut rng = rng_from_seed(seed);
    let mut labels: Vec<Label> = (0..n).map(Label).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut received = Vec::new();
    let mut listener = MajorityListener::default();

    for sweep in 1..=LPA_SWEEP_CAP {
        order.shuffle(&mut rng);
        for &node in &order {
            let neighbors = graph.neighbors(node);
            if neighbors.is_empty() {
                continue;
            }
            received.clear();
            received.extend(neighbors.iter().map(|&nb| labels[nb]));
            labels[node] = listener.adopt(&received, labels[node], &mut rng);
        }
        if lpa_converged(graph, &labels) {
            return LpaOutcome {
                labels,
                sweeps: sweep,
                converged: true,
            };
        }
    }
    log::warn!("label propagation hit the {LPA_SWEEP_CAP}-sweep cap without converging");
    LpaOutcome {
        labels,
        sweeps: LPA_SWEEP_CAP,
        converged: false,
    }
}

/// True when every node's label is among the most frequent in its
/// neighborhood.
pub fn lpa_converged(graph: &Graph, labels: &[Label]) -> bool {
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    (0..graph.node_count()).all(|node| {
        let neighbors = graph.neighbors(node);
        if neighbors.is_empty() {
            return true;
        }
        counts.clear();
        for &nb in neighbors {
            *counts.entry(labels[nb]).or_insert(0) += 1;
        }
        let best = counts.values().copied().max().unwrap_or(0);
        counts.get(&labels[node]).copied() == Some(best)
    })
}
