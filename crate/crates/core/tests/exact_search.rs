use std::collections::{BTreeSet, HashMap};

use elm_core::capacity::{counting_bound, optimize_sum_rate, RegionModel};
use elm_core::construction::verify_elm_codebook;
use elm_core::memory::{Knowledge, ModelSpec};
use elm_core::search::{
    model_ordering_check, search_optimal_elm, Objective, SearchError, SearchInstance, SearchResult,
};
use elm_core::wom::{search_two_write_wom, SearchOptions, WomModel};

const BUDGET: u64 = 50_000_000;

fn models() -> Vec<ModelSpec> {
    let mut out = Vec::new();
    for e in Knowledge::ALL {
        for d in Knowledge::ALL {
            out.push(ModelSpec::zero_error(e, d));
        }
    }
    out
}

fn run(n: usize, t: usize, ell: u8, model: ModelSpec) -> SearchResult {
    let inst = SearchInstance { budget: BUDGET, ..SearchInstance::new(n, t, ell, model) };
    let r = search_optimal_elm(&inst).unwrap();
    assert!(r.optimal, "{model} at ({n},{t},{ell}) did not finish");
    r
}

/// Brute force over every encoder table, one write at a time, tracking only
/// the set of reachable count vectors.
struct Oracle {
    n: usize,
    t: usize,
    ell: u8,
    model: ModelSpec,
    memo: HashMap<(usize, BTreeSet<Vec<u8>>), u128>,
}

fn see(k: Knowledge, v: &[u8]) -> Vec<u8> {
    match k {
        Knowledge::Ia => v.to_vec(),
        Knowledge::Ip => v.iter().map(|c| c % 2).collect(),
        Knowledge::U => Vec::new(),
    }
}

impl Oracle {
    fn new(n: usize, t: usize, ell: u8, model: ModelSpec) -> Self {
        Self { n, t, ell, model, memo: HashMap::new() }
    }

    /// New counts after aiming at `word`, or `None` when an informed
    /// encoder would push a cell past its budget.
    fn write(&self, v: &[u8], word: usize) -> Option<Vec<u8>> {
        let mut out = v.to_vec();
        for k in 0..self.n {
            let bit = (word >> k) as u8 & 1;
            if bit != v[k] % 2 {
                if v[k] == self.ell {
                    if self.model.encoder == Knowledge::Ia {
                        return None;
                    }
                } else {
                    out[k] += 1;
                }
            }
        }
        Some(out)
    }

    fn best(&mut self, j: usize, reach: BTreeSet<Vec<u8>>) -> u128 {
        if j == self.t {
            return 1;
        }
        if let Some(&v) = self.memo.get(&(j, reach.clone())) {
            return v;
        }
        let views: Vec<Vec<u8>> = reach
            .iter()
            .map(|v| see(self.model.encoder, v))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let words = 1usize << self.n;
        let mut best = 0;
        for m in 1..=words {
            let slots = m * views.len();
            let tables = (words as u128).pow(slots as u32);
            'table: for code in 0..tables {
                let mut table = vec![0usize; slots];
                let mut rest = code;
                for slot in table.iter_mut() {
                    *slot = (rest % words as u128) as usize;
                    rest /= words as u128;
                }
                let mut decoder: HashMap<(Vec<u8>, Vec<u8>), usize> = HashMap::new();
                let mut next = BTreeSet::new();
                for v in &reach {
                    let vi = views.iter().position(|w| *w == see(self.model.encoder, v)).unwrap();
                    for msg in 0..m {
                        let Some(w) = self.write(v, table[msg * views.len() + vi]) else {
                            continue 'table;
                        };
                        let state: Vec<u8> = w.iter().map(|c| c % 2).collect();
                        let key = (state, see(self.model.decoder, v));
                        if *decoder.entry(key).or_insert(msg) != msg {
                            continue 'table;
                        }
                        next.insert(w);
                    }
                }
                best = best.max(m as u128 * self.best(j + 1, next));
            }
        }
        self.memo.insert((j, reach), best);
        best
    }

    fn optimum(mut self) -> u128 {
        let start = BTreeSet::from([vec![0u8; self.n]]);
        self.best(0, start)
    }
}

#[test]
fn unconstrained_toggling_on_one_cell() {
    for model in models() {
        let r = run(1, 3, 3, model);
        assert_eq!(r.sizes, vec![2, 2, 2], "{model}");
        assert_eq!(r.product(), 8);
    }
}

#[test]
fn free_when_budget_covers_every_write() {
    for model in models() {
        let r = run(2, 2, 2, model);
        assert_eq!(r.sizes, vec![4, 4], "{model}");
    }
    let report = model_ordering_check(2, 2, 3, BUDGET).unwrap();
    assert!(report.products.iter().all(|&(_, p, _)| p == 16));
    let report = model_ordering_check(1, 3, 3, BUDGET).unwrap();
    assert!(report.products.iter().all(|&(_, p, _)| p == 8));
}

#[test]
fn single_cell_single_change() {
    let r = run(1, 2, 1, ModelSpec::zero_error(Knowledge::Ia, Knowledge::Ia));
    assert_eq!(r.product(), 2);
    assert!(r.product() < counting_bound(1, 2, 1).unwrap());
}

#[test]
fn single_cell_two_changes_three_writes() {
    for model in models() {
        assert!(run(1, 3, 2, model).product() <= 7, "{model}");
    }
}

#[test]
fn two_cells_three_writes_pinned() {
    let report = model_ordering_check(2, 3, 2, BUDGET).unwrap();
    assert!(report.all_optimal());
    assert!(report.chains_hold(), "{:?}", report.violations);
    for &(model, p, _) in &report.products {
        assert_eq!(p, 24, "{model}");
    }
}

#[test]
fn uninformed_encoders_lose_on_four_writes() {
    let report = model_ordering_check(2, 4, 2, BUDGET).unwrap();
    assert!(report.all_optimal());
    assert!(report.chains_hold());
    for &(model, p, _) in &report.products {
        let expected = if model.encoder == Knowledge::U { 24 } else { 36 };
        assert_eq!(p, expected, "{model}");
    }
}

#[test]
fn three_cells_one_change_per_cell() {
    let report = model_ordering_check(3, 3, 1, BUDGET).unwrap();
    assert!(report.chains_hold());
    for &(model, p, _) in &report.products {
        let fully_blind = model.encoder == Knowledge::U && model.decoder == Knowledge::U;
        assert_eq!(p, if fully_blind { 18 } else { 24 }, "{model}");
    }
}

#[test]
fn agrees_with_two_write_wom_search() {
    let options = SearchOptions { budget: BUDGET, require_optimal: true };
    for n in [2, 3] {
        for (wom, encoder) in [(WomModel::EiDu, Knowledge::Ia), (WomModel::EuDu, Knowledge::U)] {
            let code = search_two_write_wom(n, 2, wom, &Default::default(), &options).unwrap();
            let expected: usize = code.message_counts().iter().product();
            let r = run(n, 2, 1, ModelSpec::zero_error(encoder, Knowledge::U));
            assert_eq!(r.product(), expected as u128, "{wom} at n = {n}");
        }
    }
    assert_eq!(run(3, 2, 1, ModelSpec::zero_error(Knowledge::Ia, Knowledge::U)).product(), 16);
    assert_eq!(run(3, 2, 1, ModelSpec::zero_error(Knowledge::U, Knowledge::U)).product(), 14);
}

#[test]
fn matches_brute_force_on_one_cell() {
    for model in models() {
        for (t, ell) in [(2, 1), (3, 1), (2, 2), (3, 2)] {
            let expected = Oracle::new(1, t, ell, model).optimum();
            assert_eq!(run(1, t, ell, model).product(), expected, "{model} t={t} ell={ell}");
        }
    }
}

#[test]
fn matches_brute_force_with_blind_encoders() {
    for decoder in Knowledge::ALL {
        let model = ModelSpec::zero_error(Knowledge::U, decoder);
        for (t, ell) in [(2, 1), (3, 1), (3, 2)] {
            let expected = Oracle::new(2, t, ell, model).optimum();
            assert_eq!(run(2, t, ell, model).product(), expected, "{model} t={t} ell={ell}");
        }
    }
}

#[test]
fn witnesses_verify_and_respect_bounds() {
    for (n, t, ell) in [(1, 3, 2), (2, 2, 1), (2, 3, 2), (2, 4, 2), (3, 2, 1)] {
        let bound = counting_bound(n as u32, t as u64, ell as u64).unwrap();
        for model in models() {
            let r = run(n, t, ell, model);
            let report = verify_elm_codebook(&r.witness);
            assert!(report.zero_error, "{model} at ({n},{t},{ell})");
            assert_eq!(r.witness.message_counts(), r.sizes);
            if model.encoder == Knowledge::Ia {
                assert!(report.budget_respected(ell));
            }
            assert!(r.product() <= bound);
        }
    }
}

#[test]
fn below_the_informed_decoder_regions() {
    for (n, t, ell) in [(1, 3, 2), (2, 3, 2), (2, 4, 2), (3, 3, 1)] {
        for model in models() {
            let region = match model.encoder {
                Knowledge::Ia => RegionModel::Eia,
                Knowledge::Ip => RegionModel::EipDia,
                Knowledge::U => RegionModel::EuDia,
            };
            let optimum = optimize_sum_rate(region, t, ell as usize, None).unwrap().objective;
            let rate = (run(n, t, ell, model).product() as f64).log2() / n as f64;
            assert!(rate <= optimum + 1e-6, "{model} at ({n},{t},{ell}): {rate} > {optimum}");
        }
    }
}

#[test]
fn lexicographic_objective_favours_early_writes() {
    for model in models() {
        let mut inst = SearchInstance { budget: BUDGET, ..SearchInstance::new(2, 3, 2, model) };
        inst.objective = Objective::Lexicographic;
        let r = search_optimal_elm(&inst).unwrap();
        assert!(r.optimal);
        assert_eq!(r.sizes, vec![4, 4, 1], "{model}");
        assert!(verify_elm_codebook(&r.witness).zero_error);
    }
    let mut inst = SearchInstance::new(3, 2, 1, ModelSpec::zero_error(Knowledge::U, Knowledge::U));
    inst.objective = Objective::Lexicographic;
    assert_eq!(search_optimal_elm(&inst).unwrap().sizes, vec![8, 1]);
}

#[test]
fn deterministic_across_runs() {
    let model = ModelSpec::zero_error(Knowledge::Ip, Knowledge::Ia);
    let a = run(2, 4, 2, model);
    let b = run(2, 4, 2, model);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_json()["optimal"], true);
    assert_eq!(a.to_json()["product"], 36);
}

#[test]
fn truncated_search_is_flagged_and_still_valid() {
    for model in models() {
        let inst = SearchInstance { budget: 50, ..SearchInstance::new(2, 4, 2, model) };
        let r = search_optimal_elm(&inst).unwrap();
        assert!(!r.optimal);
        assert_eq!(r.to_json()["optimal"], false);
        assert!(verify_elm_codebook(&r.witness).zero_error, "{model}");
    }
}

#[test]
fn message_cap_limits_every_write() {
    let mut inst = SearchInstance::new(2, 2, 2, ModelSpec::zero_error(Knowledge::Ia, Knowledge::Ia));
    inst.max_messages = Some(3);
    let r = search_optimal_elm(&inst).unwrap();
    assert_eq!(r.sizes, vec![3, 3]);
}

#[test]
fn rejects_oversized_and_empty_instances() {
    let model = ModelSpec::zero_error(Knowledge::U, Knowledge::U);
    assert!(matches!(
        search_optimal_elm(&SearchInstance::new(7, 2, 1, model)),
        Err(SearchError::TooLarge(_))
    ));
    assert!(matches!(
        search_optimal_elm(&SearchInstance::new(2, 0, 1, model)),
        Err(SearchError::Invalid(_))
    ));
}
