//! Arrival-ordered rooted plane trees, the weighted recursive tree and
//! preferential-attachment growth dynamics, and elementary queries (degrees,
//! heights, most recent common ancestors, subtrees).
//!
//! Vertices are addressed by their 1-based arrival index: vertex 1 is the
//! root, vertex i arrived at step i. A child list is ordered by arrival, so
//! each newcomer is the right-most child of its parent.

use rand::Rng;

use crate::error::{Error, Result};
use crate::fenwick::Fenwick;
use crate::sequences::{FitnessSequence, WeightSequence};

/// A rooted plane tree grown by vertex arrivals. `parent[i-1]` is the arrival
/// index of vertex i's parent (0 for the root), children lists are in arrival
/// order and heights are graph distances to the root.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneTree {
    parent: Vec<u32>,
    children: Vec<Vec<u32>>,
    height: Vec<u32>,
}

impl PlaneTree {
    /// The one-vertex tree.
    pub fn root_only() -> Self {
        PlaneTree {
            parent: vec![0],
            children: vec![Vec::new()],
            height: vec![0],
        }
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.len() {
            return Err(Error::Range(format!(
                "vertex {} out of range 1..={}",
                i,
                self.len()
            )));
        }
        Ok(())
    }

    /// Append a vertex whose parent is the existing vertex `parent` (1-based).
    pub fn push_child(&mut self, parent: usize) {
        debug_assert!(parent >= 1 && parent <= self.len());
        let child = self.len() as u32 + 1;
        self.parent.push(parent as u32);
        self.children[parent - 1].push(child);
        self.children.push(Vec::new());
        let h = self.height[parent - 1] + 1;
        self.height.push(h);
    }

    /// Parent of vertex i, or None for the root.
    pub fn parent(&self, i: usize) -> Result<Option<usize>> {
        self.check_index(i)?;
        Ok(if i == 1 {
            None
        } else {
            Some(self.parent[i - 1] as usize)
        })
    }

    /// Children of vertex i in arrival order.
    pub fn children(&self, i: usize) -> Result<&[u32]> {
        self.check_index(i)?;
        Ok(&self.children[i - 1])
    }

    /// Out-degree (number of children) of vertex i.
    pub fn out_degree(&self, i: usize) -> usize {
        self.children[i - 1].len()
    }

    /// Height (graph distance to the root) of vertex i.
    pub fn height_of(&self, i: usize) -> usize {
        self.height[i - 1] as usize
    }

    /// Write rows `i,parent` (root row `1,0`).
    pub fn write_parent_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "i,parent")?;
        for i in 1..=self.len() {
            writeln!(out, "{},{}", i, self.parent[i - 1])?;
        }
        Ok(())
    }
}

/// The parent-choice record (K_2, ..., K_n): `choices[m-2]` is the parent
/// picked by vertex m.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrowthTrace {
    choices: Vec<u32>,
}

impl GrowthTrace {
    pub fn new(choices: Vec<u32>) -> Result<Self> {
        for (j, &c) in choices.iter().enumerate() {
            if c == 0 || c as usize > j + 1 {
                return Err(Error::parameter(format!(
                    "choice {} for vertex {} must lie in 1..={}",
                    c,
                    j + 2,
                    j + 1
                )));
            }
        }
        Ok(GrowthTrace { choices })
    }

    pub fn empty() -> Self {
        GrowthTrace {
            choices: Vec::new(),
        }
    }

    pub fn push(&mut self, choice: usize) {
        self.choices.push(choice as u32);
    }

    /// Number of vertices in the tree this trace encodes.
    pub fn tree_len(&self) -> usize {
        self.choices.len() + 1
    }

    /// Parent chosen at step m (the arrival of vertex m), m >= 2.
    pub fn choice(&self, m: usize) -> usize {
        self.choices[m - 2] as usize
    }

    pub fn choices(&self) -> &[u32] {
        &self.choices
    }

    /// Replay the trace into the tree it encodes.
    pub fn to_tree(&self) -> PlaneTree {
        let mut t = PlaneTree::root_only();
        for &c in &self.choices {
            t.push_child(c as usize);
        }
        t
    }

    /// Write rows `step,choice` for steps 2..=n.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "step,choice")?;
        for (j, &c) in self.choices.iter().enumerate() {
            writeln!(out, "{},{}", j + 2, c)?;
        }
        Ok(())
    }
}

/// Out-degrees by arrival index; sums to n - 1.
pub fn degrees(tree: &PlaneTree) -> Vec<u32> {
    (1..=tree.len()).map(|i| tree.out_degree(i) as u32).collect()
}

/// Heights by arrival index.
pub fn heights(tree: &PlaneTree) -> Vec<u32> {
    tree.height.clone()
}

/// Height of the tree (maximal vertex height).
pub fn height(tree: &PlaneTree) -> usize {
    tree.height.iter().copied().max().unwrap_or(0) as usize
}

/// Most recent common ancestor of vertices i and j.
pub fn mrca(tree: &PlaneTree, i: usize, j: usize) -> Result<usize> {
    tree.check_index(i)?;
    tree.check_index(j)?;
    let (mut a, mut b) = (i, j);
    while tree.height_of(a) > tree.height_of(b) {
        a = tree.parent[a - 1] as usize;
    }
    while tree.height_of(b) > tree.height_of(a) {
        b = tree.parent[b - 1] as usize;
    }
    while a != b {
        a = tree.parent[a - 1] as usize;
        b = tree.parent[b - 1] as usize;
    }
    Ok(a)
}

/// Ultrametric distance exp(-height(mrca)), zero on the diagonal.
pub fn d_exp(tree: &PlaneTree, i: usize, j: usize) -> Result<f64> {
    if i == j {
        tree.check_index(i)?;
        return Ok(0.0);
    }
    let m = mrca(tree, i, j)?;
    Ok((-(tree.height_of(m) as f64)).exp())
}

/// Arrival indices of the subtree rooted at vertex k (k included), ascending.
pub fn subtree_members(tree: &PlaneTree, k: usize) -> Result<Vec<usize>> {
    tree.check_index(k)?;
    // parent[i] < i, so one forward scan suffices
    let n = tree.len();
    let mut mark = vec![false; n + 1];
    mark[k] = true;
    let mut out = vec![k];
    for i in (k + 1)..=n {
        if mark[tree.parent[i - 1] as usize] {
            mark[i] = true;
            out.push(i);
        }
    }
    Ok(out)
}

/// Incremental weighted-recursive-tree grower: the newcomer picks its parent
/// with probability proportional to the static weights, by binary search over
/// a cumulative array. The array is rescaled when the weights grow past f64
/// range, so fast-growing sequences like w_n = 2^n are supported.
pub struct WrtGrower<'w> {
    weights: &'w WeightSequence,
    tree: PlaneTree,
    trace: GrowthTrace,
    cum: Vec<f64>,
    log_shift: f64,
}

impl<'w> WrtGrower<'w> {
    pub fn new(weights: &'w WeightSequence) -> Result<Self> {
        if !(weights.w(1) > 0.0) {
            return Err(Error::parameter("w_1 must be positive"));
        }
        let log_shift = weights.log_w(1);
        Ok(WrtGrower {
            weights,
            tree: PlaneTree::root_only(),
            trace: GrowthTrace::empty(),
            cum: vec![1.0],
            log_shift,
        })
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tree(&self) -> &PlaneTree {
        &self.tree
    }

    pub fn trace(&self) -> &GrowthTrace {
        &self.trace
    }

    fn rescale(&mut self, new_shift: f64) {
        let factor = (self.log_shift - new_shift).exp();
        for v in &mut self.cum {
            *v *= factor;
        }
        self.log_shift = new_shift;
    }

    /// Grow until the tree has n vertices, drawing one uniform per step.
    pub fn grow_to(&mut self, n: usize, rng: &mut impl Rng) -> Result<()> {
        if n > self.weights.len() {
            return Err(Error::Range(format!(
                "weights defined up to {}, requested n = {}",
                self.weights.len(),
                n
            )));
        }
        while self.tree.len() < n {
            let m = self.tree.len();
            let total = self.cum[m - 1];
            assert!(total > 0.0, "total weight vanished at step {}", m + 1);
            let target = rng.random::<f64>() * total;
            let k = self.cum.partition_point(|&c| c <= target) + 1;
            let k = k.min(m);
            self.tree.push_child(k);
            self.trace.push(k);
            // append the newcomer's weight, rescaling if it would overflow
            let lw = self.weights.log_w(m + 1);
            if lw - self.log_shift > 690.0 || total > 1e290 {
                self.rescale(lw.max(total.ln() + self.log_shift));
            }
            let scaled = if lw == f64::NEG_INFINITY {
                0.0
            } else {
                (lw - self.log_shift).exp()
            };
            self.cum.push(self.cum[m - 1] + scaled);
        }
        Ok(())
    }

    pub fn into_parts(self) -> (PlaneTree, GrowthTrace) {
        (self.tree, self.trace)
    }
}

/// Grow a weighted recursive tree with n vertices.
pub fn grow_wrt(
    weights: &WeightSequence,
    n: usize,
    rng: &mut impl Rng,
) -> Result<(PlaneTree, GrowthTrace)> {
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    let mut g = WrtGrower::new(weights)?;
    g.grow_to(n, rng)?;
    Ok(g.into_parts())
}

/// Incremental preferential-attachment grower: the newcomer picks vertex k
/// with probability proportional to a_k + out-degree(k), maintained in a
/// Fenwick tree with point updates. Vertex 2 always attaches to the root.
pub struct PatGrower<'f> {
    fitness: &'f FitnessSequence,
    tree: PlaneTree,
    trace: GrowthTrace,
    masses: Fenwick,
}

impl<'f> PatGrower<'f> {
    pub fn new(fitness: &'f FitnessSequence) -> Result<Self> {
        Ok(PatGrower {
            fitness,
            tree: PlaneTree::root_only(),
            trace: GrowthTrace::empty(),
            masses: Fenwick::with_capacity(16),
        })
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tree(&self) -> &PlaneTree {
        &self.tree
    }

    pub fn trace(&self) -> &GrowthTrace {
        &self.trace
    }

    /// Grow until the tree has n vertices; one uniform per step past the
    /// hard-coded second vertex.
    pub fn grow_to(&mut self, n: usize, rng: &mut impl Rng) -> Result<()> {
        if n > self.fitness.len() {
            return Err(Error::Range(format!(
                "fitness defined up to {}, requested n = {}",
                self.fitness.len(),
                n
            )));
        }
        while self.tree.len() < n {
            let m = self.tree.len();
            let k = if m == 1 {
                // the second vertex is a child of the root by definition,
                // which also covers -1 < a_1 <= 0
                self.masses.push(self.fitness.a(1) + 1.0);
                self.masses.push(self.fitness.a(2));
                1
            } else {
                let total = self.masses.total();
                debug_assert!(
                    (total - (self.fitness.cum_a(m) + m as f64 - 1.0)).abs()
                        <= 1e-9 * (1.0 + total.abs())
                );
                let target = rng.random::<f64>() * total;
                let k = self.masses.search(target) + 1;
                self.masses.add(k - 1, 1.0);
                self.masses.push(self.fitness.a(m + 1));
                k
            };
            self.tree.push_child(k);
            self.trace.push(k);
        }
        Ok(())
    }

    pub fn into_parts(self) -> (PlaneTree, GrowthTrace) {
        (self.tree, self.trace)
    }
}

/// Grow a preferential-attachment tree with n vertices.
pub fn grow_pat(
    fitness: &FitnessSequence,
    n: usize,
    rng: &mut impl Rng,
) -> Result<(PlaneTree, GrowthTrace)> {
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    let mut g = PatGrower::new(fitness)?;
    g.grow_to(n, rng)?;
    Ok(g.into_parts())
}

/// Vertex heights of a weighted recursive tree, without materializing the
/// tree. Consumes the same RNG stream as [`grow_wrt`], so the height vector
/// matches a full growth run seed for seed. Intended for n in the millions,
/// where child lists dominate memory.
pub fn grow_wrt_heights(
    weights: &WeightSequence,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    if n > weights.len() {
        return Err(Error::Range("weights defined on too short a range".into()));
    }
    let mut heights = Vec::with_capacity(n);
    heights.push(0u32);
    let mut cum = Vec::with_capacity(n);
    let mut log_shift = weights.log_w(1);
    cum.push(1.0f64);
    for m in 1..n {
        let total = cum[m - 1];
        let target = rng.random::<f64>() * total;
        let k = (cum.partition_point(|&c| c <= target) + 1).min(m);
        heights.push(heights[k - 1] + 1);
        let lw = weights.log_w(m + 1);
        if lw - log_shift > 690.0 || total > 1e290 {
            let new_shift = lw.max(total.ln() + log_shift);
            let factor = (log_shift - new_shift).exp();
            for v in &mut cum {
                *v *= factor;
            }
            log_shift = new_shift;
        }
        let scaled = if lw == f64::NEG_INFINITY {
            0.0
        } else {
            (lw - log_shift).exp()
        };
        cum.push(cum[m - 1] + scaled);
    }
    Ok(heights)
}

/// Out-degrees of a weighted recursive tree, stream-compatible with
/// [`grow_wrt`] but without building the tree.
pub fn grow_wrt_degrees(
    weights: &WeightSequence,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    if n > weights.len() {
        return Err(Error::Range("weights defined on too short a range".into()));
    }
    let mut degs = Vec::with_capacity(n);
    degs.push(0u32);
    let mut cum = Vec::with_capacity(n);
    let mut log_shift = weights.log_w(1);
    cum.push(1.0f64);
    for m in 1..n {
        let total = cum[m - 1];
        let target = rng.random::<f64>() * total;
        let k = (cum.partition_point(|&c| c <= target) + 1).min(m);
        degs[k - 1] += 1;
        degs.push(0);
        let lw = weights.log_w(m + 1);
        if lw - log_shift > 690.0 || total > 1e290 {
            let new_shift = lw.max(total.ln() + log_shift);
            let factor = (log_shift - new_shift).exp();
            for v in &mut cum {
                *v *= factor;
            }
            log_shift = new_shift;
        }
        let scaled = if lw == f64::NEG_INFINITY {
            0.0
        } else {
            (lw - log_shift).exp()
        };
        cum.push(cum[m - 1] + scaled);
    }
    Ok(degs)
}

/// Parent and height arrays of a weighted recursive tree, stream-compatible
/// with [`grow_wrt`] but without child lists; enough for ancestor queries on
/// large replicate sets.
pub fn grow_wrt_lineage(
    weights: &WeightSequence,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Lineage> {
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    if n > weights.len() {
        return Err(Error::Range("weights defined on too short a range".into()));
    }
    let mut parent = Vec::with_capacity(n);
    let mut height = Vec::with_capacity(n);
    parent.push(0u32);
    height.push(0u32);
    let mut cum = Vec::with_capacity(n);
    let mut log_shift = weights.log_w(1);
    cum.push(1.0f64);
    for m in 1..n {
        let total = cum[m - 1];
        let target = rng.random::<f64>() * total;
        let k = (cum.partition_point(|&c| c <= target) + 1).min(m);
        parent.push(k as u32);
        height.push(height[k - 1] + 1);
        let lw = weights.log_w(m + 1);
        if lw - log_shift > 690.0 || total > 1e290 {
            let new_shift = lw.max(total.ln() + log_shift);
            let factor = (log_shift - new_shift).exp();
            for v in &mut cum {
                *v *= factor;
            }
            log_shift = new_shift;
        }
        let scaled = if lw == f64::NEG_INFINITY {
            0.0
        } else {
            (lw - log_shift).exp()
        };
        cum.push(cum[m - 1] + scaled);
    }
    Ok(Lineage { parent, height })
}

/// Parent/height view of a tree, supporting ancestor queries only.
#[derive(Debug, Clone)]
pub struct Lineage {
    parent: Vec<u32>,
    height: Vec<u32>,
}

impl Lineage {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Most recent common ancestor of vertices i and j (1-based).
    pub fn mrca(&self, i: usize, j: usize) -> usize {
        let (mut a, mut b) = (i, j);
        while self.height[a - 1] > self.height[b - 1] {
            a = self.parent[a - 1] as usize;
        }
        while self.height[b - 1] > self.height[a - 1] {
            b = self.parent[b - 1] as usize;
        }
        while a != b {
            a = self.parent[a - 1] as usize;
            b = self.parent[b - 1] as usize;
        }
        a
    }
}

/// Vertex heights of a preferential-attachment tree, stream-compatible with
/// [`grow_pat`], keeping only the Fenwick masses and the height vector.
pub fn grow_pat_heights(
    fitness: &FitnessSequence,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<u32>> {
    grow_pat_projected(fitness, n, rng, |heights: &mut Vec<u32>, parent| {
        let h = heights[parent - 1] + 1;
        heights.push(h);
    })
}

/// Out-degrees of a preferential-attachment tree, stream-compatible with
/// [`grow_pat`].
pub fn grow_pat_degrees(
    fitness: &FitnessSequence,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<u32>> {
    grow_pat_projected(fitness, n, rng, |degs: &mut Vec<u32>, parent| {
        degs[parent - 1] += 1;
        degs.push(0);
    })
}

fn grow_pat_projected<T>(
    fitness: &FitnessSequence,
    n: usize,
    rng: &mut impl Rng,
    mut absorb: impl FnMut(&mut Vec<T>, usize),
) -> Result<Vec<T>>
where
    T: Default,
{
    if n == 0 {
        return Err(Error::parameter("n must be at least 1"));
    }
    if n > fitness.len() {
        return Err(Error::Range("fitness defined on too short a range".into()));
    }
    let mut state: Vec<T> = Vec::with_capacity(n);
    state.push(T::default());
    let mut masses = Fenwick::with_capacity(n);
    for m in 1..n {
        let parent = if m == 1 {
            masses.push(fitness.a(1) + 1.0);
            masses.push(fitness.a(2));
            1
        } else {
            let total = masses.total();
            let target = rng.random::<f64>() * total;
            let k = masses.search(target) + 1;
            masses.add(k - 1, 1.0);
            masses.push(fitness.a(m + 1));
            k
        };
        absorb(&mut state, parent);
    }
    Ok(state)
}
