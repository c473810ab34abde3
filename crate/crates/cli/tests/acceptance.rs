//! Acceptance criteria 1–11. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use serde_json::Value;

use elm_core::capacity::{
    eia_rates, eip_dia_rates, eip_du_bounds, entropy, eu_dia_rates, optimize_sum_rate,
    policy_tree_rates, EiaProfile, EipDiaProfile, EuDiaProfile, PolicyTree, RegionModel,
};
use elm_core::construction::{
    build_construction1, build_construction2, build_construction3, build_construction4,
    construction1_components, construction4_components, optimal_partition, verify_elm_codebook,
    ConstructionError, ElmCodebook, PhasePlan, SearchProvider,
};
use elm_core::memory::{replay_trace, CellStateVector, Knowledge, ModelSpec};
use elm_core::search::{model_ordering_check, search_optimal_elm, SearchInstance};
use elm_core::wom::{cw_rank, cw_unrank, search_two_write_wom, SearchOptions, WomCodebook, WomModel};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `Σ_{i≤ℓ} C(t, i)`.
fn patterns(t: u64, ell: u64) -> u128 {
    (0..=ell.min(t)).map(|i| binom(t, i)).sum()
}

fn elm(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_elm")).args(args).output().expect("run elm");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn options() -> SearchOptions {
    SearchOptions { budget: 1_000_000, require_optimal: false }
}

fn two_write(n: usize) -> WomCodebook {
    search_two_write_wom(n, 2, WomModel::EiDu, &Default::default(), &options()).unwrap()
}

fn closed_form_vs_optimizer() -> Check {
    let mut worst = (0.0f64, 0.0f64);
    for (t, ell) in [(3u64, 2u64), (4, 2), (4, 3), (5, 2), (5, 3)] {
        let best = optimize_sum_rate(RegionModel::Eia, t as usize, ell as usize, None).map_err(|e| e.to_string())?;
        let target = (patterns(t, ell) as f64).log2();
        let p = patterns(t - 1, ell - 1) as f64 / patterns(t, ell) as f64;
        if ell == 2 {
            let tf = t as f64;
            ensure((p - 2.0 * tf / (tf * tf + tf + 2.0)).abs() < 1e-12, "achiever formula")?;
        }
        let dv = (best.objective - target).abs();
        let dp = (best.profile.first_write_p() - p).abs();
        ensure(dv <= 1e-4, format!("({t},{ell}): value off by {dv:e}"))?;
        ensure(dp <= 5e-3, format!("({t},{ell}): first-write p off by {dp:e}"))?;
        worst = (worst.0.max(dv), worst.1.max(dp));
    }
    Ok(format!("max value error {:.1e}, max p error {:.1e}", worst.0, worst.1))
}

fn wom_reduction() -> Check {
    for t in 2..=4usize {
        let best = optimize_sum_rate(RegionModel::Eia, t, 1, None).map_err(|e| e.to_string())?;
        let target = ((t + 1) as f64).log2();
        ensure((best.objective - target).abs() <= 1e-4, format!("t={t}: {} vs {target}", best.objective))?;
    }
    Ok("t = 2, 3, 4 within 1e-4 of log2(t+1)".into())
}

fn eip_dia_two_changes() -> Check {
    for t in 3..=5usize {
        let best = optimize_sum_rate(RegionModel::EipDia, t, 2, None).map_err(|e| e.to_string())?;
        let target = (patterns(t as u64, 2) as f64).log2();
        ensure((best.objective - target).abs() <= 1e-4, format!("t={t}: {} vs {target}", best.objective))?;
    }
    Ok("t = 3, 4, 5 within 1e-4 of log2 X(t,2)".into())
}

fn eu_dia_strictly_below() -> Check {
    let v = optimize_sum_rate(RegionModel::EuDia, 3, 2, None).map_err(|e| e.to_string())?.objective;
    ensure((2.780..=2.790).contains(&v), format!("value {v} outside [2.780, 2.790]"))?;
    let gap = 7f64.log2() - v;
    ensure(gap >= 0.015, format!("gap {gap} below 0.015"))?;
    Ok(format!("EU:DIA(3,2) = {v:.6}, gap to log2 7 = {gap:.6}"))
}

fn eip_dia_strictly_below() -> Check {
    let grid: Value = serde_json::from_str(include_str!("../../core/tests/data/eip_dia_4_3_grid.json"))
        .map_err(|e| e.to_string())?;
    let margin = grid["margin"].as_f64().ok_or("frozen margin missing")?;
    let v = optimize_sum_rate(RegionModel::EipDia, 4, 3, None).map_err(|e| e.to_string())?.objective;
    let gap = 15f64.log2() - v;
    ensure(gap > margin, format!("gap {gap} not above the frozen margin {margin}"))?;
    Ok(format!("EIP:DIA(4,3) = {v:.6}, gap {gap:.6} > frozen margin {margin}"))
}

fn eip_du_bounds_and_curve() -> Check {
    let (lo, hi) = eip_du_bounds(3, 2);
    ensure((lo - 6f64.log2()).abs() <= 1e-10 && (hi - 7f64.log2()).abs() <= 1e-10, "bounds at (3,2)")?;
    let mut expected = vec!["t,lower_bits,upper_bits".to_string()];
    for t in 3..=25u64 {
        let (k, r) = (t / 2, t % 2);
        let lower = 2.0 * ((k + 1) as f64).log2() + r as f64 * (1.0 + 1.0 / (k + 1) as f64).log2();
        let upper = (patterns(t, 2) as f64).log2();
        let (a, b) = eip_du_bounds(t, 2);
        ensure((a - lower).abs() <= 1e-10 && (b - upper).abs() <= 1e-10, format!("formulas at t={t}"))?;
        ensure(b - a <= 1.0 + 1e-9, format!("gap above 1 at t={t}"))?;
        expected.push(format!("{t},{lower:.6},{upper:.6}"));
    }
    let (code, out) = elm(&["curve", "--ell", "2", "--t-min", "3", "--t-max", "25"]);
    ensure(code == 0, format!("elm curve exited with {code}"))?;
    let rows: Vec<&str> = out.lines().collect();
    ensure(rows.len() == 24, format!("{} lines instead of header + 23", rows.len()))?;
    ensure(rows[1] == "3,2.584963,2.807355", format!("first row {:?}", rows[1]))?;
    ensure(rows == expected, "curve rows differ from the formulas")?;
    Ok("bounds exact, gap <= 1 for t in 3..=25, 23 curve rows match".into())
}

fn example_replay() -> Check {
    let states = ["1110000", "0111100", "0111000"];
    let intended: Vec<CellStateVector> = states.iter().map(|s| s.parse().unwrap()).collect();
    let trace = replay_trace(2, &intended).map_err(|e| e.to_string())?;
    let counts = trace.final_counts().ok_or("empty trace")?.counts().to_vec();
    ensure(counts == [2, 1, 1, 1, 2, 0, 0], format!("counts {counts:?}"))?;
    ensure(trace.saturation_events() == 0, "saturation events")?;
    ensure(trace.writes.iter().all(|w| w.counts.counts().iter().all(|&c| c <= 2)), "count above 2")?;
    let (code, out) = elm(&["simulate", "--ell", "2", "--states", &states.join(",")]);
    ensure(code == 0, format!("elm simulate exited with {code}"))?;
    ensure(out.contains("final counts [2,1,1,1,2,0,0]"), "CLI final counts")?;
    ensure(out.contains("saturation events 0"), "CLI saturation events")?;
    Ok("counts (2,1,1,1,2,0,0), no saturation".into())
}

fn construction3_phases() -> Check {
    let c = two_write(3);
    let plan = optimal_partition(4, 2).map_err(|e| e.to_string())?;
    let code = build_construction3(4, 2, &plan, &[c.clone(), c.clone()]).map_err(|e| e.to_string())?;
    let report = verify_elm_codebook(&code);
    ensure(report.sequences == 256, "not all 4^4 sequences replayed")?;
    ensure(report.zero_error && report.total_failures() == 0, "decode failures")?;
    ensure(report.max_changes == 2, format!("max changes {}", report.max_changes))?;
    ensure((code.sum_rate() - 8.0 / 3.0).abs() < 1e-12, format!("sum-rate {}", code.sum_rate()))?;
    let literal = PhasePlan::literal(vec![2, 2]).map_err(|e| e.to_string())?;
    let over = match build_construction3(4, 2, &literal, &[c.clone(), c]) {
        Err(ConstructionError::VerificationFailed { report, .. }) => {
            report.max_changes > 2 && report.first_saturation.is_some()
        }
        _ => false,
    };
    ensure(over, "the literal variant did not break the budget")?;
    Ok("256 sequences, 0 failures, max changes 2, sum-rate 8/3; literal variant exceeds ell".into())
}

fn constructed_codebooks() -> Result<Vec<ElmCodebook>, String> {
    let e = |e: ConstructionError| e.to_string();
    let mut out = Vec::new();
    let c3 = two_write(3);
    let plan = optimal_partition(4, 2).map_err(e)?;
    out.push(build_construction3(4, 2, &plan, &[c3.clone(), c3.clone()]).map_err(e)?);
    let free = WomCodebook::free_single_write(3).map_err(|e| e.to_string())?;
    let plan = optimal_partition(3, 2).map_err(e)?;
    out.push(build_construction3(3, 2, &plan, &[c3, free]).map_err(e)?);
    for (n, p10, p20, p21) in [(7, 3.0 / 7.0, 0.5, 1.0 / 3.0), (5, 0.4, 0.5, 0.5), (4, 0.0, 0.5, 0.5)] {
        let parts = construction1_components(n, p10, p20, p21, &options()).map_err(e)?;
        out.push(build_construction1(n, p10, p20, p21, &parts).map_err(e)?);
    }
    for (n, p10, p20, p21) in [(4, 0.5, 0.5, 0.5), (5, 0.4, 0.5, 0.5), (6, 0.5, 0.5, 1.0 / 3.0), (4, 0.5, 0.5, 0.0)] {
        let parts = construction4_components(n, p10, p20, p21, &options()).map_err(e)?;
        out.push(build_construction4(n, p10, p20, p21, &parts).map_err(e)?);
    }
    let mut provider = SearchProvider { options: options() };
    let profile = elm_core::capacity::optimal_eia_profile(4, 2).map_err(|e| e.to_string())?;
    out.push(build_construction2(5, 4, 2, &profile, &mut provider).map_err(e)?);
    let profile = EiaProfile::zeros(2, 3).map_err(|e| e.to_string())?;
    out.push(build_construction2(3, 2, 3, &profile, &mut provider).map_err(e)?);
    Ok(out)
}

fn counting_bound_safety() -> Check {
    let mut checked = 0;
    for (n, t, ell) in [(1, 3, 2), (1, 3, 3), (2, 2, 1), (2, 2, 2), (2, 3, 2), (2, 4, 2), (3, 2, 1), (3, 3, 1)] {
        let bound = patterns(t as u64, ell as u64).pow(n as u32);
        for e in Knowledge::ALL {
            for d in Knowledge::ALL {
                let model = ModelSpec::zero_error(e, d);
                let r = search_optimal_elm(&SearchInstance::new(n, t, ell, model)).map_err(|e| e.to_string())?;
                ensure(r.optimal, format!("{model} at ({n},{t},{ell}) did not finish"))?;
                ensure(verify_elm_codebook(&r.witness).zero_error, format!("{model} witness fails"))?;
                let product = r.witness.product().ok_or("product overflow")?;
                ensure(product <= bound, format!("{model} at ({n},{t},{ell}): {product} > {bound}"))?;
                checked += 1;
            }
        }
    }
    for code in constructed_codebooks()? {
        let bound = patterns(code.t as u64, code.ell as u64).pow(code.n as u32);
        let product = code.product().ok_or("product overflow")?;
        ensure(product <= bound, format!("{} construction: {product} > {bound}", code.model))?;
        checked += 1;
    }
    Ok(format!("{checked} codebooks within the counting bound"))
}

fn model_ordering() -> Check {
    let report = model_ordering_check(2, 3, 2, elm_core::DEFAULT_SEARCH_BUDGET).map_err(|e| e.to_string())?;
    ensure(report.all_optimal(), "some search did not finish")?;
    ensure(report.chains_hold(), format!("violations {:?}", report.violations))?;
    let get = |e, d| report.product(ModelSpec::zero_error(e, d)).unwrap();
    use Knowledge::{Ia, Ip, U};
    ensure(get(U, Ia) <= get(Ip, Ia) && get(Ip, Ia) <= get(Ia, Ia), "encoder chain at DIA")?;
    for &(model, p, _) in &report.products {
        ensure(p == 24, format!("{model}: product {p}, pinned 24"))?;
    }
    Ok("all nine products = 24 (pinned), both chains hold".into())
}

fn sample<S: Strategy>(runner: &mut TestRunner, s: &S) -> S::Value {
    s.new_tree(runner).expect("strategy").current()
}

fn property_suites() -> Check {
    let mut runner = TestRunner::deterministic();
    let shape = (1usize..=8, 1usize..=4);
    for _ in 0..100 {
        let (t, ell) = sample(&mut runner, &shape);
        let rows: Vec<Vec<f64>> =
            (1..=t).map(|j| sample(&mut runner, &prop::collection::vec(0.0..=0.5f64, ell.min(j)))).collect();
        let eia = EiaProfile::new(t, ell, rows).map_err(|e| e.to_string())?;
        let p0 = sample(&mut runner, &prop::collection::vec(0.0..=0.5f64, t));
        let p1 = sample(&mut runner, &prop::collection::vec(0.0..=0.5f64, t));
        let eip = EipDiaProfile::new(t, ell, p0.clone(), p1).map_err(|e| e.to_string())?;
        let eu = EuDiaProfile::new(t, ell, p0).map_err(|e| e.to_string())?;
        let tables = [eia_rates(&eia).0, eip_dia_rates(&eip).0, eu_dia_rates(&eu).0];
        for q in &tables {
            for j in 0..=t {
                ensure((q.row_sum(j) - 1.0).abs() <= 1e-12, format!("occupancy sum at t={t} ell={ell} j={j}"))?;
            }
        }
        let direct = eia_rates(&eia).1;
        let tree = policy_tree_rates(&PolicyTree::from_eia_profile(&eia)).map_err(|e| e.to_string())?;
        for (a, b) in direct.rates().iter().zip(tree.rates()) {
            ensure((a - b).abs() <= 1e-10, format!("policy tree differs at t={t} ell={ell}"))?;
        }
    }
    for t in 3..=12u64 {
        for ell in 2..t {
            ensure(patterns(t, ell) == patterns(t - 1, ell - 1) + patterns(t - 1, ell), "Pascal identity")?;
            let p = patterns(t - 1, ell - 1) as f64 / patterns(t, ell) as f64;
            let lhs = (patterns(t, ell) as f64).log2();
            let rhs = entropy(p).unwrap()
                + p * (patterns(t - 1, ell - 1) as f64).log2()
                + (1.0 - p) * (patterns(t - 1, ell) as f64).log2();
            ensure((lhs - rhs).abs() <= 1e-10, format!("log identity at t={t} ell={ell}"))?;
        }
    }
    let mut words = 0u64;
    for n in 1..=12usize {
        for w in 0..=n {
            for index in 0..binom(n as u64, w as u64) {
                let word = cw_unrank(n, w, index).map_err(|e| e.to_string())?;
                ensure(word.weight() == w && cw_rank(&word).map_err(|e| e.to_string())? == index, "combinadic")?;
                words += 1;
            }
        }
    }
    Ok(format!("100 random profiles, identities for 2 <= ell < t <= 12, {words} combinadic roundtrips"))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Check); 11] = [
        ("closed form vs optimizer", 30, closed_form_vs_optimizer),
        ("WOM reduction", 5, wom_reduction),
        ("EIP:DIA with two changes", 30, eip_dia_two_changes),
        ("EU:DIA strictly below", 10, eu_dia_strictly_below),
        ("EIP:DIA strictly below at (4,3)", 60, eip_dia_strictly_below),
        ("EIP:DU bounds and curve", 5, eip_du_bounds_and_curve),
        ("example replay", 1, example_replay),
        ("phase construction", 30, construction3_phases),
        ("counting-bound safety", 60, counting_bound_safety),
        ("model-ordering oracle", 600, model_ordering),
        ("property suites", 60, property_suites),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > Duration::from_secs(*limit) => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit} s"))
            }
            other => other,
        };
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
