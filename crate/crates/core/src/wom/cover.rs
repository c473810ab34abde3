//! Combinatorial kernels shared by the component searches.
//!
//! * [`Polychromatic`]: colour a universe of words with `M` colours so that
//!   every source neighbourhood sees all `M` colours. A second-write decoder
//!   is exactly such a colouring: from every reachable prior state, every
//!   message must be reachable.
//! * [`max_independent_set`]: the largest set of vertices with no conflicts,
//!   used for uninformed second writes whose images must stay disjoint.

/// Counts search nodes against a fixed allowance.
#[derive(Debug, Clone)]
pub struct Budget {
    left: u64,
    spent: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exhausted;

impl Budget {
    pub fn new(limit: u64) -> Self {
        Self { left: limit, spent: 0 }
    }

    pub fn tick(&mut self) -> Result<(), Exhausted> {
        if self.left == 0 {
            return Err(Exhausted);
        }
        self.left -= 1;
        self.spent += 1;
        Ok(())
    }

    pub fn spent(&self) -> u64 {
        self.spent
    }
}

const NONE: u32 = u32::MAX;

pub struct Polychromatic {
    words: usize,
    sources: Vec<Vec<usize>>,
    word_sources: Vec<Vec<usize>>,
}

impl Polychromatic {
    /// `sources[s]` lists the word indices (below `words`) reachable from
    /// source `s`.
    pub fn new(words: usize, sources: Vec<Vec<usize>>) -> Self {
        let mut word_sources = vec![Vec::new(); words];
        for (s, nbhd) in sources.iter().enumerate() {
            for &w in nbhd {
                word_sources[w].push(s);
            }
        }
        Self { words, sources, word_sources }
    }

    /// The smallest neighbourhood size, a trivial cap on the colour count.
    pub fn upper_bound(&self) -> usize {
        self.sources.iter().map(Vec::len).min().unwrap_or(self.words)
    }

    /// Finds a colouring with `m` colours, or proves there is none.
    pub fn solve(&self, m: usize, budget: &mut Budget) -> Result<Option<Vec<Option<usize>>>, Exhausted> {
        if m == 0 {
            return Ok(Some(vec![None; self.words]));
        }
        if m > self.upper_bound() {
            return Ok(None);
        }
        let mut state = State {
            color: vec![NONE; self.words],
            count: vec![vec![0; m]; self.sources.len()],
            missing: vec![m; self.sources.len()],
            free: self.sources.iter().map(Vec::len).collect(),
        };
        if self.search(&mut state, budget)? {
            Ok(Some(
                state.color.iter().map(|&c| (c != NONE).then_some(c as usize)).collect(),
            ))
        } else {
            Ok(None)
        }
    }

    /// Largest feasible colour count, scanning upwards from `floor`.
    /// Returns the count, its colouring, and whether the count was proven
    /// maximal before the budget ran out.
    pub fn maximize(
        &self,
        floor: usize,
        budget: &mut Budget,
    ) -> (usize, Option<Vec<Option<usize>>>, bool) {
        let mut best: (usize, Option<Vec<Option<usize>>>) = (0, None);
        let mut m = floor.max(1);
        if m > 1 {
            match self.solve(m, budget) {
                Ok(Some(c)) => best = (m, Some(c)),
                Ok(None) => return (0, None, true),
                Err(Exhausted) => return (0, None, false),
            }
            m += 1;
        }
        loop {
            if m > self.upper_bound() {
                return (best.0, best.1, true);
            }
            match self.solve(m, budget) {
                Ok(Some(c)) => best = (m, Some(c)),
                Ok(None) => return (best.0, best.1, true),
                Err(Exhausted) => return (best.0, best.1, false),
            }
            m += 1;
        }
    }

    fn search(&self, st: &mut State, budget: &mut Budget) -> Result<bool, Exhausted> {
        budget.tick()?;
        let mut pick: Option<(usize, usize)> = None;
        for s in 0..self.sources.len() {
            if st.missing[s] == 0 {
                continue;
            }
            if st.free[s] < st.missing[s] {
                return Ok(false);
            }
            let slack = st.free[s] - st.missing[s];
            if pick.map_or(true, |(_, best)| slack < best) {
                pick = Some((s, slack));
            }
        }
        let Some((s, _)) = pick else {
            return Ok(true);
        };
        let k = st.count[s].iter().position(|&c| c == 0).expect("a colour is missing");
        let mut candidates: Vec<(usize, usize)> = self.sources[s]
            .iter()
            .filter(|&&w| st.color[w] == NONE)
            .map(|&w| {
                let gain = self.word_sources[w]
                    .iter()
                    .filter(|&&s2| st.count[s2][k] == 0)
                    .count();
                (w, gain)
            })
            .collect();
        candidates.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (w, _) in candidates {
            self.assign(st, w, k);
            if self.search(st, budget)? {
                return Ok(true);
            }
            self.unassign(st, w, k);
        }
        Ok(false)
    }

    fn assign(&self, st: &mut State, w: usize, k: usize) {
        st.color[w] = k as u32;
        for &s in &self.word_sources[w] {
            st.free[s] -= 1;
            if st.count[s][k] == 0 {
                st.missing[s] -= 1;
            }
            st.count[s][k] += 1;
        }
    }

    fn unassign(&self, st: &mut State, w: usize, k: usize) {
        st.color[w] = NONE;
        for &s in &self.word_sources[w] {
            st.free[s] += 1;
            st.count[s][k] -= 1;
            if st.count[s][k] == 0 {
                st.missing[s] += 1;
            }
        }
    }
}

struct State {
    color: Vec<u32>,
    count: Vec<Vec<u32>>,
    missing: Vec<usize>,
    free: Vec<usize>,
}

/// Fixed-width bitset over vertex indices.
#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn and_not(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
}

/// A maximum independent set of the conflict graph given by `conflicts`
/// (symmetric, irreflexive adjacency lists), restricted to vertices with
/// `allowed[v]`. Among maximum sets, the lexicographically smallest sorted
/// vertex list is returned. The flag reports whether the search finished.
pub fn max_independent_set(
    conflicts: &[Vec<usize>],
    allowed: &[bool],
    budget: &mut Budget,
) -> (Vec<usize>, bool) {
    let n = conflicts.len();
    let mut adj = vec![Bits::empty(n); n];
    for (v, list) in conflicts.iter().enumerate() {
        for &u in list {
            adj[v].set(u);
        }
    }
    let mut cands = Bits::empty(n);
    for v in (0..n).filter(|&v| allowed[v]) {
        cands.set(v);
    }
    let mut best = Vec::new();
    let mut current = Vec::new();
    let finished = mis(&adj, cands, &mut current, &mut best, budget).is_ok();
    (best, finished)
}

fn clique_cover_bound(adj: &[Bits], cands: &Bits) -> usize {
    let mut left = cands.clone();
    let mut cliques = 0;
    while let Some(v) = left.first() {
        cliques += 1;
        left.clear(v);
        let mut pool = left.and(&adj[v]);
        while let Some(u) = pool.first() {
            left.clear(u);
            pool.clear(u);
            pool = pool.and(&adj[u]);
        }
    }
    cliques
}

fn mis(
    adj: &[Bits],
    cands: Bits,
    current: &mut Vec<usize>,
    best: &mut Vec<usize>,
    budget: &mut Budget,
) -> Result<(), Exhausted> {
    budget.tick()?;
    let Some(v) = cands.first() else {
        if current.len() > best.len() {
            *best = current.clone();
        }
        return Ok(());
    };
    if current.len() + cands.count() <= best.len()
        || current.len() + clique_cover_bound(adj, &cands) <= best.len()
    {
        return Ok(());
    }
    let mut without_v = cands.clone();
    without_v.clear(v);
    current.push(v);
    mis(adj, without_v.and_not(&adj[v]), current, best, budget)?;
    current.pop();
    debug_assert!(!without_v.get(v));
    mis(adj, without_v, current, best, budget)
}
