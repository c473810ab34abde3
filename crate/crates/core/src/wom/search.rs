//! Exhaustive and backtracking search for two-write WOM codes.

use std::collections::BTreeMap;

use super::cover::{max_independent_set, Budget, Polychromatic};
use super::{
    dominates, index_word, word_index, words_with_composition, WomCodebook,
    WomEncoder, WomError, WomModel, WomWrite, Word,
};

/// Optional shape restrictions on the searched code.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompositionConstraints {
    /// Symbol counts of every first-write codeword (length `q`). The whole
    /// constant-composition class is then used as the first-write image.
    pub first_write: Option<Vec<usize>>,
    /// `q × q` transition counts for informed second writes: entry `[x][y]`
    /// is the number of cells moved from level `x` to level `y`.
    pub second_write: Option<Vec<Vec<usize>>>,
    /// Weight of every second-write codeword of an uninformed code.
    pub second_write_weight: Option<usize>,
    /// Exact number of first-write messages.
    pub first_write_messages: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub budget: u64,
    /// Fail with [`WomError::BudgetExceeded`] instead of returning the best
    /// code found when the budget runs out.
    pub require_optimal: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { budget: crate::DEFAULT_SEARCH_BUDGET, require_optimal: true }
    }
}

/// Searches for a two-write code maximizing `M₁·M₂`; ties go to the larger
/// `M₁` and then to the first candidate in enumeration order.
///
/// The returned metadata carries `optimal` (`true` when the search space was
/// exhausted) and `nodes` (search nodes spent).
pub fn search_two_write_wom(
    n: usize,
    q: usize,
    model: WomModel,
    constraints: &CompositionConstraints,
    options: &SearchOptions,
) -> Result<WomCodebook, WomError> {
    check_size(n, q, model == WomModel::EiDu && constraints.first_write.is_some())?;
    let mut budget = Budget::new(options.budget);
    let found = match model {
        WomModel::EiDu => search_ei(n, q, constraints, &mut budget)?,
        WomModel::EuDu => search_eu(n, q, constraints, &mut budget)?,
    };
    let Some(mut code) = found.code else {
        return Err(WomError::BudgetExceeded(options.budget));
    };
    if !found.complete && options.require_optimal {
        return Err(WomError::BudgetExceeded(options.budget));
    }
    code.metadata.insert("optimal".into(), found.complete.to_string());
    code.metadata.insert("nodes".into(), budget.spent().to_string());
    Ok(code)
}

/// A fixed first-write class keeps the search small, so it may run over a
/// universe of up to `2¹⁶` words.
fn check_size(n: usize, q: usize, fixed_class: bool) -> Result<(), WomError> {
    let limit = match (q, fixed_class) {
        (2, _) => 12,
        (3, true) => 10,
        (4, true) => 8,
        (3..=5, _) => 6,
        _ => return Err(WomError::OutOfRange(format!("alphabet size {q} not in 2..=5"))),
    };
    if n == 0 || n > limit {
        return Err(WomError::OutOfRange(format!("n = {n} outside 1..={limit} for q = {q}")));
    }
    Ok(())
}

struct Found {
    code: Option<WomCodebook>,
    complete: bool,
}

/// Is `(p, m1)` strictly better than `(best_p, best_m1)`?
fn improves(p: usize, m1: usize, best: Option<(usize, usize)>) -> bool {
    match best {
        None => true,
        Some((bp, bm)) => p > bp || (p == bp && m1 > bm),
    }
}

/// Smallest `M₂` that would make a candidate with `m1` first-write messages
/// beat `best`.
fn needed_m2(m1: usize, best: Option<(usize, usize)>) -> usize {
    match best {
        None => 1,
        Some((bp, bm)) => {
            let at_least = bp.div_ceil(m1);
            if m1 * at_least > bp || m1 > bm {
                at_least.max(1)
            } else {
                at_least + 1
            }
        }
    }
}

fn validate_composition(counts: &[usize], n: usize, q: usize) -> Result<(), WomError> {
    if counts.len() != q || counts.iter().sum::<usize>() != n {
        return Err(WomError::InfeasibleConstraints(format!(
            "composition {counts:?} is not a split of {n} cells over {q} symbols"
        )));
    }
    Ok(())
}

fn validate_transitions(t: &[Vec<usize>], first: &[usize], q: usize) -> Result<(), WomError> {
    if t.len() != q || t.iter().any(|row| row.len() != q) {
        return Err(WomError::InfeasibleConstraints("transition table must be q × q".into()));
    }
    for (x, row) in t.iter().enumerate() {
        if row.iter().sum::<usize>() != first[x] {
            return Err(WomError::InfeasibleConstraints(format!(
                "transitions out of level {x} sum to {} but {} cells sit there",
                row.iter().sum::<usize>(),
                first[x]
            )));
        }
        if row[..x].iter().any(|&c| c > 0) {
            return Err(WomError::InfeasibleConstraints(format!(
                "transitions out of level {x} would lower a cell"
            )));
        }
    }
    Ok(())
}

/// Every word reachable from `a` under transition counts `t`, in
/// lexicographic order.
fn constrained_neighbourhood(a: &[u8], t: &[Vec<usize>]) -> Vec<Word> {
    let q = t.len();
    let groups: Vec<Vec<usize>> =
        (0..q).map(|x| (0..a.len()).filter(|&k| a[k] as usize == x).collect()).collect();
    let patterns: Vec<Vec<Word>> = (0..q).map(|x| words_with_composition(&t[x])).collect();
    let mut out = vec![a.to_vec()];
    for x in 0..q {
        if groups[x].is_empty() {
            continue;
        }
        let mut next = Vec::with_capacity(out.len() * patterns[x].len());
        for base in &out {
            for p in &patterns[x] {
                let mut w = base.clone();
                for (&k, &y) in groups[x].iter().zip(p) {
                    w[k] = y;
                }
                next.push(w);
            }
        }
        out = next;
    }
    out.sort();
    out
}

fn up_set(a: &[u8], q: usize) -> Vec<Word> {
    let total = q.pow(a.len() as u32);
    (0..total).map(|x| index_word(x, a.len(), q)).filter(|w| dominates(w, a)).collect()
}

fn up_size(a: &[u8], q: usize) -> usize {
    a.iter().map(|&d| q - d as usize).product()
}

/// Assembles an informed two-write code from the first-write image and a
/// colouring of `[q]^n`.
fn assemble_ei(
    n: usize,
    q: usize,
    first: Vec<Word>,
    neighbourhoods: &[Vec<Word>],
    colouring: &[Option<usize>],
    m2: usize,
) -> WomCodebook {
    // Relabel colours by first appearance in lexicographic word order.
    let mut relabel = vec![usize::MAX; m2];
    let mut next = 0;
    for c in colouring.iter().flatten() {
        if relabel[*c] == usize::MAX {
            relabel[*c] = next;
            next += 1;
        }
    }
    let colour_of = |w: &Word| colouring[word_index(w, q)].map(|c| relabel[c]);
    let mut table = BTreeMap::new();
    let mut decoder2 = BTreeMap::new();
    for (a, nbhd) in first.iter().zip(neighbourhoods) {
        for w in nbhd {
            if let Some(m) = colour_of(w) {
                table.entry((m, a.clone())).or_insert_with(|| {
                    decoder2.insert(w.clone(), m);
                    w.clone()
                });
            }
        }
    }
    let decoder1 = first.iter().enumerate().map(|(m, w)| (w.clone(), m)).collect();
    WomCodebook {
        n,
        q,
        model: WomModel::EiDu,
        writes: vec![
            WomWrite { messages: first.len(), encoder: WomEncoder::Fixed(first), decoder: decoder1 },
            WomWrite { messages: m2, encoder: WomEncoder::Informed(table), decoder: decoder2 },
        ],
        metadata: BTreeMap::new(),
    }
}

fn search_ei(
    n: usize,
    q: usize,
    cons: &CompositionConstraints,
    budget: &mut Budget,
) -> Result<Found, WomError> {
    if cons.second_write_weight.is_some() {
        return Err(WomError::InfeasibleConstraints(
            "a codeword weight applies to uninformed second writes".into(),
        ));
    }
    let universe = q.pow(n as u32);
    match &cons.first_write {
        Some(counts) => {
            validate_composition(counts, n, q)?;
            let mut first = words_with_composition(counts);
            if let Some(k) = cons.first_write_messages {
                if k == 0 || k > first.len() {
                    return Err(WomError::InfeasibleConstraints(format!(
                        "{k} first-write messages requested from a class of {}",
                        first.len()
                    )));
                }
                first.truncate(k);
            }
            let neighbourhoods: Vec<Vec<Word>> = match &cons.second_write {
                Some(t) => {
                    validate_transitions(t, counts, q)?;
                    first.iter().map(|a| constrained_neighbourhood(a, t)).collect()
                }
                None => first.iter().map(|a| up_set(a, q)).collect(),
            };
            let sources: Vec<Vec<usize>> = neighbourhoods
                .iter()
                .map(|nb| nb.iter().map(|w| word_index(w, q)).collect())
                .collect();
            let poly = Polychromatic::new(universe, sources);
            let (m2, colouring, complete) = poly.maximize(1, budget);
            let code = colouring.map(|c| assemble_ei(n, q, first, &neighbourhoods, &c, m2));
            Ok(Found { code, complete })
        }
        None => {
            if cons.second_write.is_some() {
                return Err(WomError::InfeasibleConstraints(
                    "transition counts need a first-write composition".into(),
                ));
            }
            search_ei_down_sets(n, q, cons.first_write_messages, budget)
        }
    }
}

struct Candidate {
    first: Vec<usize>,
    sources: Vec<usize>,
    bound: usize,
}

/// Enumerates down-sets of `[q]^n`. A first-write image can always be
/// replaced by its down-closure without shrinking the second write, so
/// down-sets (and, for a forced `M₁`, their maximal antichains padded from
/// below) cover every optimum.
fn search_ei_down_sets(
    n: usize,
    q: usize,
    forced: Option<usize>,
    budget: &mut Budget,
) -> Result<Found, WomError> {
    let total = q.pow(n as u32);
    let words: Vec<Word> = (0..total).map(|x| index_word(x, n, q)).collect();
    let lower: Vec<Vec<usize>> = words
        .iter()
        .map(|w| {
            (0..n)
                .filter(|&k| w[k] > 0)
                .map(|k| {
                    let mut v = w.clone();
                    v[k] -= 1;
                    word_index(&v, q)
                })
                .collect()
        })
        .collect();
    let upper: Vec<Vec<usize>> = words
        .iter()
        .map(|w| {
            (0..n)
                .filter(|&k| (w[k] as usize) < q - 1)
                .map(|k| {
                    let mut v = w.clone();
                    v[k] += 1;
                    word_index(&v, q)
                })
                .collect()
        })
        .collect();

    let mut candidates = Vec::new();
    let mut included = vec![false; total];
    included[0] = true;
    let complete = enumerate_down_sets(1, &mut included, &lower, budget, &mut |inc: &[bool]| {
        let members: Vec<usize> = (0..total).filter(|&i| inc[i]).collect();
        let sources: Vec<usize> =
            members.iter().copied().filter(|&i| upper[i].iter().all(|&u| !inc[u])).collect();
        let min_up = sources.iter().map(|&s| up_size(&words[s], q)).min().unwrap_or(0);
        let first = match forced {
            None => members,
            Some(k) if sources.len() <= k && k <= members.len() => {
                let mut f = sources.clone();
                f.extend(members.iter().copied().filter(|i| !sources.contains(i)).take(k - sources.len()));
                f.sort_unstable();
                f
            }
            Some(_) => return,
        };
        let bound = first.len() * min_up;
        candidates.push(Candidate { first, sources, bound });
    });
    if forced.is_some() && candidates.is_empty() && complete {
        return Err(WomError::InfeasibleConstraints("no first write of the forced size".into()));
    }
    // Stable sort keeps enumeration order among equals.
    candidates.sort_by(|a, b| b.bound.cmp(&a.bound).then(b.first.len().cmp(&a.first.len())));

    let mut best: Option<(usize, usize)> = None;
    let mut best_code = None;
    let mut finished = complete;
    for cand in &candidates {
        let m1 = cand.first.len();
        if !improves(cand.bound, m1, best) {
            continue;
        }
        let need = needed_m2(m1, best);
        let nbhds: Vec<Vec<usize>> = cand
            .sources
            .iter()
            .map(|&s| (0..total).filter(|&w| dominates(&words[w], &words[s])).collect())
            .collect();
        let poly = Polychromatic::new(total, nbhds);
        let (m2, colouring, proven) = poly.maximize(need, budget);
        if let Some(colouring) = colouring {
            if improves(m1 * m2, m1, best) {
                best = Some((m1 * m2, m1));
                let first: Vec<Word> = cand.first.iter().map(|&i| words[i].clone()).collect();
                let neighbourhoods: Vec<Vec<Word>> = first.iter().map(|a| up_set(a, q)).collect();
                best_code = Some(assemble_ei(n, q, first, &neighbourhoods, &colouring, m2));
            }
        }
        if !proven {
            finished = false;
            break;
        }
    }
    Ok(Found { code: best_code, complete: finished })
}

/// Include/exclude every word in index order (a linear extension of the
/// product order), including a word only when all its lower covers are in.
fn enumerate_down_sets(
    i: usize,
    included: &mut Vec<bool>,
    lower: &[Vec<usize>],
    budget: &mut Budget,
    visit: &mut dyn FnMut(&[bool]),
) -> bool {
    if budget.tick().is_err() {
        return false;
    }
    if i == included.len() {
        visit(included);
        return true;
    }
    if lower[i].iter().all(|&l| included[l]) {
        included[i] = true;
        let ok = enumerate_down_sets(i + 1, included, lower, budget, visit);
        included[i] = false;
        if !ok {
            return false;
        }
    }
    enumerate_down_sets(i + 1, included, lower, budget, visit)
}

fn search_eu(
    n: usize,
    q: usize,
    cons: &CompositionConstraints,
    budget: &mut Budget,
) -> Result<Found, WomError> {
    if q != 2 {
        return Err(WomError::OutOfRange("uninformed codes are binary".into()));
    }
    if n > 6 {
        return Err(WomError::OutOfRange(format!("n = {n} exceeds 6 for uninformed codes")));
    }
    if cons.second_write.is_some() {
        return Err(WomError::InfeasibleConstraints(
            "transition counts apply to informed second writes".into(),
        ));
    }
    let total = 1usize << n;
    let words: Vec<Word> = (0..total).map(|x| index_word(x, n, 2)).collect();
    let as_mask = |w: &Word| word_index(w, 2);
    let candidates_b: Vec<usize> = (0..total)
        .filter(|&b| cons.second_write_weight.map_or(true, |w| (b as u64).count_ones() as usize == w))
        .collect();
    if candidates_b.is_empty() {
        return Err(WomError::InfeasibleConstraints("no codeword of the requested weight".into()));
    }

    let first_images: Vec<Vec<usize>> = match &cons.first_write {
        Some(counts) => {
            validate_composition(counts, n, 2)?;
            let mut a: Vec<usize> = words_with_composition(counts).iter().map(as_mask).collect();
            if let Some(k) = cons.first_write_messages {
                if k == 0 || k > a.len() {
                    return Err(WomError::InfeasibleConstraints(format!(
                        "{k} first-write messages requested from a class of {}",
                        a.len()
                    )));
                }
                a.truncate(k);
            }
            vec![a]
        }
        None if n <= 4 => {
            let subsets = 1u64 << total;
            (1..subsets)
                .map(|s| (0..total).filter(|&w| s >> w & 1 == 1).collect::<Vec<usize>>())
                .filter(|a| cons.first_write_messages.map_or(true, |k| a.len() == k))
                .collect()
        }
        None => {
            return Err(WomError::OutOfRange(
                "exhaustive uninformed search without a first-write composition needs n <= 4".into(),
            ))
        }
    };

    let mut best: Option<(usize, usize)> = None;
    let mut best_pick: Option<(Vec<usize>, Vec<usize>)> = None;
    let mut complete = true;
    for a in &first_images {
        let m1 = a.len();
        if !improves(m1 * candidates_b.len(), m1, best) {
            continue;
        }
        let images: Vec<u64> = candidates_b
            .iter()
            .map(|&b| a.iter().fold(0u64, |acc, &x| acc | 1 << (x | b)))
            .collect();
        let conflicts: Vec<Vec<usize>> = (0..images.len())
            .map(|i| (0..images.len()).filter(|&j| j != i && images[i] & images[j] != 0).collect())
            .collect();
        let (set, done) = max_independent_set(&conflicts, &vec![true; images.len()], budget);
        if improves(m1 * set.len(), m1, best) && !set.is_empty() {
            best = Some((m1 * set.len(), m1));
            best_pick = Some((a.clone(), set.iter().map(|&i| candidates_b[i]).collect()));
        }
        if !done {
            complete = false;
            break;
        }
    }
    let code = best_pick.map(|(a, b)| {
        let first: Vec<Word> = a.iter().map(|&x| words[x].clone()).collect();
        let second: Vec<Word> = b.iter().map(|&x| words[x].clone()).collect();
        let decoder1 = first.iter().enumerate().map(|(m, w)| (w.clone(), m)).collect();
        let mut decoder2 = BTreeMap::new();
        for (m, &bx) in b.iter().enumerate() {
            for &ax in &a {
                decoder2.insert(words[ax | bx].clone(), m);
            }
        }
        let mut metadata = BTreeMap::new();
        if let Some(c) = &cons.first_write {
            metadata.insert("first_write_composition".into(), format!("{c:?}"));
        }
        WomCodebook {
            n,
            q: 2,
            model: WomModel::EuDu,
            writes: vec![
                WomWrite { messages: first.len(), encoder: WomEncoder::Fixed(first), decoder: decoder1 },
                WomWrite { messages: second.len(), encoder: WomEncoder::Fixed(second), decoder: decoder2 },
            ],
            metadata,
        }
    });
    Ok(Found { code, complete })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wom::verify_wom_codebook;

    fn opts() -> SearchOptions {
        SearchOptions { budget: 5_000_000, require_optimal: true }
    }

    #[test]
    fn single_cell() {
        let c = search_two_write_wom(1, 2, WomModel::EiDu, &Default::default(), &opts()).unwrap();
        assert_eq!(c.message_counts(), vec![2, 1]);
    }

    #[test]
    fn three_cells_give_four_by_four() {
        let c = search_two_write_wom(3, 2, WomModel::EiDu, &Default::default(), &opts()).unwrap();
        assert_eq!(c.message_counts(), vec![4, 4]);
        assert_eq!(c.metadata["optimal"], "true");
        assert!(verify_wom_codebook(&c).zero_error);
    }

    #[test]
    fn forced_single_first_message_frees_the_second_write() {
        let cons = CompositionConstraints { first_write_messages: Some(1), ..Default::default() };
        let c = search_two_write_wom(2, 2, WomModel::EiDu, &cons, &opts()).unwrap();
        assert_eq!(c.message_counts(), vec![1, 4]);
    }

    #[test]
    fn ternary_with_transitions() {
        // first write: 2 cells at level 0, 1 at level 1; second write pushes
        // everything to levels 1 and 2, one 0-cell to level 1 and the 1-cell
        // to level 2.
        let cons = CompositionConstraints {
            first_write: Some(vec![2, 1, 0]),
            second_write: Some(vec![vec![0, 1, 1], vec![0, 0, 1], vec![0, 0, 0]]),
            ..Default::default()
        };
        let c = search_two_write_wom(3, 3, WomModel::EiDu, &cons, &opts()).unwrap();
        assert_eq!(c.writes[0].messages, 3);
        assert!(c.writes[1].messages >= 1);
        assert!(verify_wom_codebook(&c).zero_error);
        let WomEncoder::Fixed(first) = &c.writes[0].encoder else { panic!("fixed first write") };
        assert!(first.iter().all(|w| crate::wom::composition(w, 3) == vec![2, 1, 0]));
    }

    #[test]
    fn bad_constraints_are_rejected() {
        let cons = CompositionConstraints { first_write: Some(vec![1, 1]), ..Default::default() };
        assert!(matches!(
            search_two_write_wom(3, 2, WomModel::EiDu, &cons, &opts()),
            Err(WomError::InfeasibleConstraints(_))
        ));
        let cons = CompositionConstraints {
            first_write: Some(vec![2, 1]),
            second_write: Some(vec![vec![1, 1], vec![1, 0]]),
            ..Default::default()
        };
        assert!(matches!(
            search_two_write_wom(3, 2, WomModel::EiDu, &cons, &opts()),
            Err(WomError::InfeasibleConstraints(_))
        ));
        assert!(search_two_write_wom(13, 2, WomModel::EiDu, &Default::default(), &opts()).is_err());
    }

    #[test]
    fn uninformed_with_fixed_first_weight() {
        let cons = CompositionConstraints { first_write: Some(vec![4, 1]), ..Default::default() };
        let c = search_two_write_wom(5, 2, WomModel::EuDu, &cons, &opts()).unwrap();
        assert_eq!(c.writes[0].messages, 5);
        assert!(c.writes[1].messages >= 2);
        assert!(verify_wom_codebook(&c).zero_error);
    }

    #[test]
    fn tiny_budget_is_reported() {
        let o = SearchOptions { budget: 3, require_optimal: true };
        assert!(matches!(
            search_two_write_wom(3, 2, WomModel::EiDu, &Default::default(), &o),
            Err(WomError::BudgetExceeded(3))
        ));
    }
}
