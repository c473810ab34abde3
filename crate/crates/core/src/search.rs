//! Exact optimal zero-error ELM codes at tiny parameters.
//!
//! Whether later writes can be decoded depends only on the set of count
//! vectors reachable after the current write, so the best product
//! `M_j·…·M_t` is a function `F_j(R)` of that set. `F_j` is antitone in `R`
//! (a code that works from a set works from every subset), which turns the
//! partially built reachable set into an upper bound during the per-write
//! backtracking over encoder assignments. Sets are canonicalized under cell
//! permutations before memoization.

use std::collections::{BTreeMap, HashMap};

use serde_json::{json, Value};

use crate::construction::{view_of, ElmCodebook, ElmWrite};
use crate::memory::{Knowledge, ModelSpec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
}

/// What "best" means when comparing message-count tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Largest `Π M_j`; the first tuple found wins ties.
    #[default]
    Product,
    /// Largest `M_1`, then largest `M_2` given that, and so on.
    Lexicographic,
}

impl Objective {
    fn better(self, a: &[usize], b: &[usize]) -> bool {
        match self {
            Objective::Product => product(a) > product(b),
            Objective::Lexicographic => a > b,
        }
    }
}

fn product(sizes: &[usize]) -> u128 {
    sizes.iter().map(|&m| m as u128).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchInstance {
    pub n: usize,
    pub t: usize,
    pub ell: u8,
    pub model: ModelSpec,
    /// Upper limit on every `M_j`.
    pub max_messages: Option<usize>,
    pub objective: Objective,
    /// Backtracking nodes before the search gives up.
    pub budget: u64,
}

impl SearchInstance {
    pub fn new(n: usize, t: usize, ell: u8, model: ModelSpec) -> Self {
        Self {
            n,
            t,
            ell,
            model,
            max_messages: None,
            objective: Objective::Product,
            budget: crate::search_budget_from_env(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub sizes: Vec<usize>,
    pub witness: ElmCodebook,
    /// `true` when the search ran to completion.
    pub optimal: bool,
    pub nodes: u64,
}

impl SearchResult {
    pub fn product(&self) -> u128 {
        product(&self.sizes)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "optimal": self.optimal,
            "product": self.product() as u64,
            "sizes": self.sizes,
            "witness": self.witness.to_json(),
        })
    }
}

/// Per-write choice on a canonical reachable set: `codewords[m][g]` for
/// message `m` and encoder group `g`.
#[derive(Debug, Clone)]
struct Choice {
    codewords: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
struct Entry {
    /// `(M_j, …, M_t)` of the best continuation.
    value: Vec<usize>,
    choice: Option<Choice>,
}

/// Encoder groups and decoder classes of one canonical set.
struct Layout {
    members: Vec<usize>,
    /// Group of each member; groups are numbered in order of first member.
    group: Vec<usize>,
    groups: usize,
    class: Vec<usize>,
    classes: usize,
    /// Codewords a group may use.
    allowed: Vec<Vec<usize>>,
    /// Groups whose decoder classes no other group touches. Messages can be
    /// relabelled inside such a group without affecting anything else.
    independent: Vec<bool>,
}

struct Searcher {
    n: usize,
    t: usize,
    ell: u8,
    model: ModelSpec,
    objective: Objective,
    max_m: usize,
    base: usize,
    states: usize,
    perms: Vec<Vec<usize>>,
    /// `vectors[x]` is the count vector with index `x`.
    vectors: Vec<Vec<u8>>,
    /// `next[x][c]`: (new count index, stored state) after writing `c`.
    next: Vec<Vec<(usize, usize)>>,
    memo: Vec<HashMap<u64, Entry>>,
    budget: u64,
    spent: u64,
    exhausted: bool,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

impl Searcher {
    fn new(inst: &SearchInstance) -> Result<Self, SearchError> {
        let (n, ell) = (inst.n, inst.ell);
        if n == 0 || inst.t == 0 || ell == 0 {
            return Err(SearchError::Invalid("n, t and ell must all be at least 1".into()));
        }
        let base = ell as usize + 1;
        let states = base.checked_pow(n as u32).filter(|&s| s <= 64).ok_or_else(|| {
            SearchError::TooLarge(format!("(ell+1)^n must not exceed 64, got n={n}, ell={ell}"))
        })?;
        let vectors: Vec<Vec<u8>> = (0..states)
            .map(|mut x| {
                let mut v = vec![0u8; n];
                for k in (0..n).rev() {
                    v[k] = (x % base) as u8;
                    x /= base;
                }
                v
            })
            .collect();
        let index = |v: &[u8]| v.iter().fold(0usize, |acc, &d| acc * base + d as usize);
        let next = vectors
            .iter()
            .map(|v| {
                (0..1usize << n)
                    .map(|c| {
                        let mut w = v.clone();
                        let mut s = 0usize;
                        for k in 0..n {
                            let bit = (c >> (n - 1 - k)) as u8 & 1;
                            if bit != v[k] % 2 && v[k] < ell {
                                w[k] += 1;
                            }
                            s = s * 2 + (w[k] % 2) as usize;
                        }
                        (index(&w), s)
                    })
                    .collect()
            })
            .collect();
        let cap = inst.max_messages.unwrap_or(usize::MAX);
        if cap == 0 {
            return Err(SearchError::Invalid("the message cap must be positive".into()));
        }
        Ok(Self {
            n,
            t: inst.t,
            ell,
            model: inst.model,
            objective: inst.objective,
            max_m: cap.min(1 << n),
            base,
            states,
            perms: permutations(n),
            vectors,
            next,
            memo: vec![HashMap::new(); inst.t + 1],
            budget: inst.budget,
            spent: 0,
            exhausted: false,
        })
    }

    fn index(&self, v: &[u8]) -> usize {
        v.iter().fold(0usize, |acc, &d| acc * self.base + d as usize)
    }

    fn permute_mask(&self, mask: u64, perm: &[usize]) -> u64 {
        let mut out = 0u64;
        for x in (0..self.states).filter(|&x| mask >> x & 1 == 1) {
            let v = &self.vectors[x];
            let w: Vec<u8> = perm.iter().map(|&p| v[p]).collect();
            out |= 1 << self.index(&w);
        }
        out
    }

    /// Smallest image of `mask` under cell permutations, with the first
    /// permutation that attains it.
    fn canonical(&self, mask: u64) -> (u64, usize) {
        let mut best = (u64::MAX, 0);
        for (i, p) in self.perms.iter().enumerate() {
            let m = self.permute_mask(mask, p);
            if m < best.0 {
                best = (m, i);
            }
        }
        best
    }

    fn layout(&self, mask: u64) -> Layout {
        let members: Vec<usize> = (0..self.states).filter(|&x| mask >> x & 1 == 1).collect();
        let mut group_of: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
        let mut class_of: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
        let mut group = Vec::new();
        let mut class = Vec::new();
        let mut allowed: Vec<Vec<usize>> = Vec::new();
        for &x in &members {
            let v = &self.vectors[x];
            let len = group_of.len();
            let g = *group_of.entry(view_of(self.model.encoder, v)).or_insert(len);
            if g == allowed.len() {
                allowed.push((0..1usize << self.n).collect());
            }
            if self.model.encoder == Knowledge::Ia {
                // informed encoders never push a cell past its budget
                allowed[g].retain(|&c| {
                    (0..self.n).all(|k| {
                        v[k] < self.ell || ((c >> (self.n - 1 - k)) as u8 & 1) == v[k] % 2
                    })
                });
            }
            let len = class_of.len();
            class.push(*class_of.entry(view_of(self.model.decoder, v)).or_insert(len));
            group.push(g);
        }
        let groups = group_of.len();
        let classes = class_of.len();
        // Codewords acting identically on every member of a group are
        // interchangeable; keep the smallest.
        for (g, list) in allowed.iter_mut().enumerate() {
            let mut seen = std::collections::HashSet::new();
            list.retain(|&c| {
                let effect: Vec<(usize, usize)> = members
                    .iter()
                    .zip(&group)
                    .filter(|&(_, &h)| h == g)
                    .map(|(&x, _)| self.next[x][c])
                    .collect();
                seen.insert(effect)
            });
        }
        let mut class_group = vec![usize::MAX; classes];
        let mut shared = vec![false; classes];
        for (&g, &d) in group.iter().zip(&class) {
            if class_group[d] == usize::MAX {
                class_group[d] = g;
            } else if class_group[d] != g {
                shared[d] = true;
            }
        }
        let mut independent = vec![true; groups];
        for (&g, &d) in group.iter().zip(&class) {
            if shared[d] {
                independent[g] = false;
            }
        }
        Layout { members, group, groups, class, classes, allowed, independent }
    }

    /// `F_j(mask)` for a canonical `mask`; `j` is 0-based.
    fn value(&mut self, j: usize, mask: u64) -> Vec<usize> {
        if j == self.t {
            return Vec::new();
        }
        if let Some(e) = self.memo[j].get(&mask) {
            return e.value.clone();
        }
        let layout = self.layout(mask);
        let mut best = Entry { value: vec![0; self.t - j], choice: None };
        // Best continuation from a single reachable vector bounds every
        // nonempty continuation.
        let mut cap: Vec<usize> = vec![0; self.t - j - 1];
        for x in 0..self.states {
            let (c, _) = self.canonical(1 << x);
            let v = self.value(j + 1, c);
            if self.objective.better(&v, &cap) {
                cap = v;
            }
        }
        for m in (1..=self.max_m).rev() {
            if self.exhausted || !self.objective.better(&prepend(m, &cap), &best.value) {
                break;
            }
            // Within a group, distinct messages need distinct codewords.
            if layout.allowed.iter().any(|a| a.len() < m) {
                continue;
            }
            let mut dfs = Dfs {
                m,
                codewords: vec![vec![0; layout.groups]; m],
                owner: vec![vec![usize::MAX; 1 << self.n]; layout.classes],
                by_group: (0..layout.groups)
                    .map(|g| (0..layout.members.len()).filter(|&i| layout.group[i] == g).collect())
                    .collect(),
            };
            self.dfs(j, &layout, &mut dfs, 0, 0, &mut best);
        }
        if best.choice.is_none() {
            // Only after running out of budget; the witness falls back to a
            // single message that leaves the memory alone.
            best.value = vec![1; self.t - j];
        }
        if !self.exhausted {
            self.memo[j].insert(mask, best.clone());
        } else {
            self.memo[j].entry(mask).or_insert_with(|| best.clone());
        }
        best.value
    }

    fn tick(&mut self) -> bool {
        if self.spent >= self.budget {
            self.exhausted = true;
            return false;
        }
        self.spent += 1;
        true
    }

    fn dfs(&mut self, j: usize, layout: &Layout, st: &mut Dfs, pos: usize, reach: u64, best: &mut Entry) {
        if !self.tick() {
            return;
        }
        let total = st.m * layout.groups;
        if pos == total {
            let (canon, _) = self.canonical(reach);
            let v = prepend(st.m, &self.value(j + 1, canon));
            if self.objective.better(&v, &best.value) {
                *best = Entry { value: v, choice: Some(Choice { codewords: st.codewords.clone() }) };
            }
            return;
        }
        let (g, msg) = (pos / st.m, pos % st.m);
        let ordered = g == 0 || layout.independent[g];
        for ci in 0..layout.allowed[g].len() {
            let c = layout.allowed[g][ci];
            if ordered && msg > 0 && c <= st.codewords[msg - 1][g] {
                continue;
            }
            let mut taken = Vec::new();
            let mut ok = true;
            let mut new_reach = reach;
            for &i in &st.by_group[g] {
                let (nx, s) = self.next[layout.members[i]][c];
                let d = layout.class[i];
                match st.owner[d][s] {
                    o if o == usize::MAX => {
                        st.owner[d][s] = msg;
                        taken.push((d, s));
                    }
                    o if o == msg => {}
                    _ => {
                        ok = false;
                        break;
                    }
                }
                new_reach |= 1 << nx;
            }
            if ok {
                let (canon, _) = self.canonical(new_reach);
                let bound = prepend(st.m, &self.value(j + 1, canon));
                if self.objective.better(&bound, &best.value) {
                    st.codewords[msg][g] = c;
                    self.dfs(j, layout, st, pos + 1, new_reach, best);
                }
            }
            for (d, s) in taken {
                st.owner[d][s] = usize::MAX;
            }
            if self.exhausted {
                return;
            }
        }
    }

    fn word(&self, c: usize) -> Vec<u8> {
        (0..self.n).map(|k| (c >> (self.n - 1 - k)) as u8 & 1).collect()
    }

    /// Walks the memoized choices from the empty memory and writes out
    /// explicit tables.
    fn witness(&mut self) -> ElmCodebook {
        let mut reach: u64 = 1;
        let mut writes = Vec::with_capacity(self.t);
        for j in 0..self.t {
            let (canon, pi) = self.canonical(reach);
            let perm = self.perms[pi].clone();
            let layout = self.layout(canon);
            let choice = self.memo[j].get(&canon).and_then(|e| e.choice.clone());
            let mut write = ElmWrite::default();
            let mut next = 0u64;
            let actual: Vec<usize> = (0..self.states).filter(|&x| reach >> x & 1 == 1).collect();
            for &x in &actual {
                let v = self.vectors[x].clone();
                let w: Vec<u8> = perm.iter().map(|&p| v[p]).collect();
                let i = layout.members.iter().position(|&y| y == self.index(&w)).expect("member");
                let codes: Vec<usize> = match &choice {
                    Some(ch) => ch.codewords.iter().map(|row| row[layout.group[i]]).collect(),
                    // One message that toggles nothing an informed encoder
                    // can see.
                    None if self.model.encoder == Knowledge::U => vec![0],
                    None => vec![v.iter().fold(0usize, |acc, &d| acc * 2 + (d % 2) as usize)],
                };
                write.messages = codes.len();
                for (m, &cc) in codes.iter().enumerate() {
                    // Undo the permutation: canonical cell k is actual cell perm[k].
                    let canon_word = self.word(cc);
                    let mut c = vec![0u8; self.n];
                    for k in 0..self.n {
                        c[perm[k]] = canon_word[k];
                    }
                    let ci = c.iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
                    let (nx, s) = self.next[x][ci];
                    write.encoder.insert((m, view_of(self.model.encoder, &v)), c);
                    write.decoder.insert((self.word(s), view_of(self.model.decoder, &v)), m);
                    next |= 1 << nx;
                }
            }
            writes.push(write);
            reach = next;
        }
        let mut metadata = BTreeMap::new();
        metadata.insert("construction".into(), "exact search".into());
        ElmCodebook {
            n: self.n,
            t: self.t,
            ell: self.ell,
            model: self.model,
            writes,
            phases: None,
            metadata,
            verified: None,
        }
    }
}

fn prepend(m: usize, rest: &[usize]) -> Vec<usize> {
    let mut v = Vec::with_capacity(rest.len() + 1);
    v.push(m);
    v.extend_from_slice(rest);
    v
}

struct Dfs {
    m: usize,
    codewords: Vec<Vec<usize>>,
    owner: Vec<Vec<usize>>,
    by_group: Vec<Vec<usize>>,
}

/// Best zero-error code of the instance's model under its objective.
pub fn search_optimal_elm(inst: &SearchInstance) -> Result<SearchResult, SearchError> {
    let mut s = Searcher::new(inst)?;
    s.value(0, 1);
    let witness = s.witness();
    Ok(SearchResult {
        sizes: witness.message_counts(),
        witness,
        optimal: !s.exhausted,
        nodes: s.spent,
    })
}

/// Optimal products of all nine models and the two monotone chains between
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub n: usize,
    pub t: usize,
    pub ell: u8,
    /// `(model, product, optimal)` in encoder-major order IA, IP, U.
    pub products: Vec<(ModelSpec, u128, bool)>,
    pub violations: Vec<String>,
}

impl OrderingReport {
    pub fn product(&self, model: ModelSpec) -> Option<u128> {
        self.products.iter().find(|(m, _, _)| *m == model).map(|&(_, p, _)| p)
    }

    pub fn chains_hold(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn all_optimal(&self) -> bool {
        self.products.iter().all(|&(_, _, o)| o)
    }
}

pub fn model_ordering_check(n: usize, t: usize, ell: u8, budget: u64) -> Result<OrderingReport, SearchError> {
    let mut products = Vec::new();
    for e in Knowledge::ALL {
        for d in Knowledge::ALL {
            let model = ModelSpec::zero_error(e, d);
            let inst = SearchInstance { budget, ..SearchInstance::new(n, t, ell, model) };
            let r = search_optimal_elm(&inst)?;
            products.push((model, r.product(), r.optimal));
        }
    }
    let mut report = OrderingReport { n, t, ell, products, violations: Vec::new() };
    let get = |e, d| report.product(ModelSpec::zero_error(e, d)).expect("all nine models");
    let mut violations = Vec::new();
    for fixed in Knowledge::ALL {
        for pair in Knowledge::ALL.windows(2) {
            // pair = [more informed, less informed]
            let (hi, lo) = (pair[0], pair[1]);
            if get(lo, fixed) > get(hi, fixed) {
                violations.push(format!(
                    "{} exceeds {}",
                    ModelSpec::zero_error(lo, fixed),
                    ModelSpec::zero_error(hi, fixed)
                ));
            }
            if get(fixed, lo) > get(fixed, hi) {
                violations.push(format!(
                    "{} exceeds {}",
                    ModelSpec::zero_error(fixed, lo),
                    ModelSpec::zero_error(fixed, hi)
                ));
            }
        }
    }
    report.violations = violations;
    Ok(report)
}
