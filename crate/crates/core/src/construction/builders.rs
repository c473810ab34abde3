use std::collections::BTreeMap;

use super::{free_code, verify_elm_codebook, ConstructionError, ElmCodebook, PhasePlan, VerifiedStamp};
use crate::capacity::EiaProfile;
use crate::memory::{Knowledge, ModelSpec};
use crate::wom::{
    build_lemma2_two_write, search_two_write_wom, words_with_composition, CompositionConstraints,
    SearchOptions, WomCodebook, WomError, WomModel,
};

/// A two-write `q`-ary EI:DU component whose first write is the whole class
/// of words with symbol counts `first_write` and whose second write moves
/// `transitions[x][y]` cells from level `x` to level `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentRequest {
    /// ELM write (1-based) the component serves.
    pub write: usize,
    pub n: usize,
    pub q: usize,
    pub first_write: Vec<usize>,
    pub transitions: Vec<Vec<usize>>,
}

pub trait ComponentProvider {
    fn provide(&mut self, request: &ComponentRequest) -> Result<WomCodebook, WomError>;
}

/// Node budget for component searches when `ELM_SEARCH_BUDGET` is unset.
/// Components need not be optimal, and the search for one colour more than
/// the best found so far is what consumes the budget.
pub const COMPONENT_SEARCH_BUDGET: u64 = 1_000_000;

/// Supplies components by search, keeping the best code found within the
/// budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchProvider {
    pub options: SearchOptions,
}

impl Default for SearchProvider {
    fn default() -> Self {
        let budget = match std::env::var("ELM_SEARCH_BUDGET") {
            Ok(_) => crate::search_budget_from_env(),
            Err(_) => COMPONENT_SEARCH_BUDGET,
        };
        Self { options: SearchOptions { budget, require_optimal: false } }
    }
}

impl ComponentProvider for SearchProvider {
    fn provide(&mut self, request: &ComponentRequest) -> Result<WomCodebook, WomError> {
        let cons = CompositionConstraints {
            first_write: Some(request.first_write.clone()),
            second_write: Some(request.transitions.clone()),
            ..Default::default()
        };
        search_two_write_wom(request.n, request.q, WomModel::EiDu, &cons, &self.options)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction1Components {
    /// Ternary code for writes 1 and 2.
    pub ternary: WomCodebook,
    /// Binary code whose second write carries write 3.
    pub binary: WomCodebook,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Construction4Components {
    pub ternary: WomCodebook,
    /// Binary EU:DU code whose first write has weight `b`.
    pub eu: WomCodebook,
}

/// Integral cell counts `(w1, a, b)` for writes 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Weights {
    w1: usize,
    a: usize,
    b: usize,
}

fn check_p(p: f64, name: &str) -> Result<(), ConstructionError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ConstructionError::Invalid(format!("{name} = {p} is outside [0, 1]")));
    }
    Ok(())
}

fn round_count(p: f64, of: usize) -> usize {
    ((p * of as f64).round() as usize).min(of)
}

fn weights(n: usize, p10: f64, p20: f64, p21: f64) -> Result<Weights, ConstructionError> {
    check_p(p10, "p10")?;
    check_p(p20, "p20")?;
    check_p(p21, "p21")?;
    let w1 = round_count(p10, n);
    Ok(Weights { w1, a: round_count(p20, n - w1), b: round_count(p21, w1) })
}

fn ternary_request(n: usize, w: Weights) -> ComponentRequest {
    ComponentRequest {
        write: 2,
        n,
        q: 3,
        first_write: vec![n - w.w1, w.w1, 0],
        transitions: vec![vec![0, w.a, n - w.w1 - w.a], vec![0, w.w1 - w.b, w.b], vec![0; 3]],
    }
}

fn provide(
    provider: &mut dyn ComponentProvider,
    request: &ComponentRequest,
) -> Result<WomCodebook, ConstructionError> {
    provider.provide(request).map_err(|source| ConstructionError::Provider {
        write: request.write,
        q: request.q,
        composition: request.first_write.clone(),
        source,
    })
}

fn check_shape(code: &WomCodebook, what: &str, n: usize, q: usize, writes: usize) -> Result<(), ConstructionError> {
    if code.n != n || code.q != q || code.writes.len() != writes {
        return Err(ConstructionError::ShapeMismatch(format!(
            "{what}: expected n={n}, q={q}, {writes} writes; got n={}, q={}, {} writes",
            code.n,
            code.q,
            code.writes.len()
        )));
    }
    Ok(())
}

/// Every first-write codeword of `code` must lie in the class `counts`.
fn check_first_class(code: &WomCodebook, what: &str, counts: &[usize]) -> Result<(), ConstructionError> {
    let class = words_with_composition(counts);
    for m in 0..code.writes[0].messages {
        let w = code.encode(0, m, &vec![0; code.n]);
        if !w.is_some_and(|w| class.binary_search(&w).is_ok()) {
            return Err(ConstructionError::ShapeMismatch(format!(
                "{what}: first-write message {m} is not a word with symbol counts {counts:?}"
            )));
        }
    }
    Ok(())
}

fn complement(w: &[u8]) -> Vec<u8> {
    w.iter().map(|&b| 1 - b).collect()
}

/// Maps a stored binary state to the top two component levels: state 1 to
/// `top − 1` and state 0 to `top`.
fn lift(state: &[u8], top: u8) -> Vec<u8> {
    state.iter().map(|&b| if b == 1 { top - 1 } else { top }).collect()
}

/// Verifies `code` and stamps it, or reports the violation.
fn gate(mut code: ElmCodebook, require_budget: bool) -> Result<ElmCodebook, ConstructionError> {
    let report = verify_elm_codebook(&code);
    let over = require_budget && !report.budget_respected(code.ell);
    if !report.zero_error || over {
        let mut summary = format!(
            "{} failed sequences, {} missing entries, max changes {} with ell = {}",
            report.total_failures(),
            report.missing_entries,
            report.max_changes,
            code.ell
        );
        if let Some(w) = report.first_saturation.as_ref().or(report.first_failure.as_ref()) {
            summary.push_str(&format!("; witness messages {:?}", w.messages));
        }
        return Err(ConstructionError::VerificationFailed { summary, report: Box::new(report) });
    }
    code.verified = Some(VerifiedStamp { max_changes: report.max_changes, failures: 0 });
    Ok(code)
}

/// Searches the components of the three-write construction over EIA:DU:
/// the ternary code for writes 1–2 and the low-weight binary code for write 3.
pub fn construction1_components(
    n: usize,
    p10: f64,
    p20: f64,
    p21: f64,
    options: &SearchOptions,
) -> Result<Construction1Components, ConstructionError> {
    let w = weights(n, p10, p20, p21)?;
    let ternary = provide(&mut SearchProvider { options: *options }, &ternary_request(n, w))?;
    let binary = build_lemma2_two_write(n, w.b)?;
    Ok(Construction1Components { ternary, binary })
}

/// The same ternary code plus a zero-error EU:DU code whose first write is
/// every weight-`b` word.
pub fn construction4_components(
    n: usize,
    p10: f64,
    p20: f64,
    p21: f64,
    options: &SearchOptions,
) -> Result<Construction4Components, ConstructionError> {
    let w = weights(n, p10, p20, p21)?;
    let ternary = provide(&mut SearchProvider { options: *options }, &ternary_request(n, w))?;
    let cons = CompositionConstraints { first_write: Some(vec![n - w.b, w.b]), ..Default::default() };
    let eu = search_two_write_wom(n, 2, WomModel::EuDu, &cons, options)?;
    Ok(Construction4Components { ternary, eu })
}

fn check_ternary(ternary: &WomCodebook, n: usize, w: Weights) -> Result<(), ConstructionError> {
    check_shape(ternary, "ternary component", n, 3, 2)?;
    check_first_class(ternary, "ternary component", &[n - w.w1, w.w1, 0])
}

fn first_two_writes<'a>(
    ternary: &'a WomCodebook,
) -> (
    impl Fn(usize, usize, &[u8]) -> Result<Option<Vec<u8>>, ConstructionError> + 'a,
    impl Fn(usize, &[u8]) -> Option<usize> + 'a,
) {
    let n = ternary.n;
    let encode = move |j: usize, m: usize, prior: &[u8]| -> Result<Option<Vec<u8>>, ConstructionError> {
        if j == 0 {
            return Ok(ternary.encode(0, m, &vec![0; n]));
        }
        Ok(ternary.encode(1, m, prior).map(|c| c.iter().map(|x| x % 2).collect()))
    };
    let decode = move |j: usize, state: &[u8]| -> Option<usize> {
        if j == 0 {
            ternary.decode(0, state)
        } else {
            ternary.decode(1, &lift(state, 2))
        }
    };
    (encode, decode)
}

/// Three writes with two changes per cell (EIA:DU). Write 1 is a weight-`w1`
/// word, write 2 the ternary component read mod 2, and write 3 the binary
/// component run through the complement on the cells still available.
pub fn build_construction1(
    n: usize,
    p10: f64,
    p20: f64,
    p21: f64,
    components: &Construction1Components,
) -> Result<ElmCodebook, ConstructionError> {
    if n == 0 || n > 8 {
        return Err(ConstructionError::Invalid(format!("n = {n} outside 1..=8")));
    }
    let w = weights(n, p10, p20, p21)?;
    let Construction1Components { ternary, binary } = components;
    check_ternary(ternary, n, w)?;
    check_shape(binary, "binary component", n, 2, 2)?;
    let (enc12, dec12) = first_two_writes(ternary);
    let messages = vec![ternary.writes[0].messages, ternary.writes[1].messages, binary.writes[1].messages];
    let mut code = ElmCodebook::tabulate(
        n,
        2,
        ModelSpec::zero_error(Knowledge::Ia, Knowledge::U),
        messages,
        |j, m, v| match j {
            0 | 1 => enc12(j, m, v),
            _ => {
                let blocked: Vec<u8> = v.iter().map(|&x| u8::from(x == 2)).collect();
                match binary.encode(1, m, &blocked) {
                    Some(c) => Ok(Some(complement(&c))),
                    None => Err(ConstructionError::ShapeMismatch(format!(
                        "binary component has no second-write codeword over {}",
                        crate::wom::word_to_string(&blocked)
                    ))),
                }
            }
        },
        |j, state, _| match j {
            0 | 1 => dec12(j, state),
            _ => binary.decode(1, &complement(state)),
        },
    )?;
    code.metadata.insert("construction".into(), "1".into());
    code.metadata.insert("weights".into(), format!("w1={}, a={}, b={}", w.w1, w.a, w.b));
    if let Some(kind) = binary.metadata.get("decoder") {
        code.metadata.insert("write3_decoder".into(), kind.clone());
    }
    gate(code, true)
}

/// Two changes over three writes with a partially informed third-write
/// encoder (EIP:DU). Writes 1–2 follow the ternary component; write 3 stores
/// the complement of the EU:DU component's second-write codeword.
pub fn build_construction4(
    n: usize,
    p10: f64,
    p20: f64,
    p21: f64,
    components: &Construction4Components,
) -> Result<ElmCodebook, ConstructionError> {
    if n == 0 || n > 8 {
        return Err(ConstructionError::Invalid(format!("n = {n} outside 1..=8")));
    }
    let w = weights(n, p10, p20, p21)?;
    let Construction4Components { ternary, eu } = components;
    check_ternary(ternary, n, w)?;
    check_shape(eu, "EU:DU component", n, 2, 2)?;
    check_first_class(eu, "EU:DU component", &[n - w.b, w.b])?;
    let (enc12, dec12) = first_two_writes(ternary);
    let messages = vec![ternary.writes[0].messages, ternary.writes[1].messages, eu.writes[1].messages];
    let zeros = vec![0u8; n];
    let mut code = ElmCodebook::tabulate(
        n,
        2,
        ModelSpec::zero_error(Knowledge::Ip, Knowledge::U),
        messages,
        |j, m, c| match j {
            // After one write the counts are the states.
            0 | 1 => enc12(j, m, c),
            _ => Ok(eu.encode(1, m, &zeros).map(|u| complement(&u))),
        },
        |j, state, _| match j {
            0 | 1 => dec12(j, state),
            _ => eu.decode(1, &complement(state)),
        },
    )?;
    code.metadata.insert("construction".into(), "4".into());
    code.metadata.insert("weights".into(), format!("w1={}, a={}, b={}", w.w1, w.a, w.b));
    code.metadata.insert("saturation".into(), "absorbed on write 3".into());
    gate(code, false)
}

/// Count compositions and per-write component requests for the generalized
/// construction.
struct Schedule {
    w1: usize,
    requests: Vec<ComponentRequest>,
    /// Top component level `2m` for writes 2..=t.
    tops: Vec<u8>,
}

fn schedule(n: usize, profile: &EiaProfile) -> Schedule {
    let (t, ell) = (profile.t(), profile.ell());
    let w1 = round_count(profile.p(1, 0), n);
    let mut comp = vec![n - w1, w1];
    let mut requests = Vec::new();
    let mut tops = Vec::new();
    for j in 2..=t {
        let max_count = (j - 1).min(ell);
        let m = max_count / 2 + 1;
        let q = 2 * m + 1;
        let (odd_level, even_level) = (2 * m - 1, 2 * m);
        let mut transitions = vec![vec![0; q]; q];
        let mut next = vec![0; (j).min(ell) + 1];
        for (i, &w) in comp.iter().enumerate() {
            let (toggle_to, stay_to) = if i % 2 == 0 { (odd_level, even_level) } else { (even_level, odd_level) };
            let x = if i < ell { round_count(profile.p(j, i), w) } else { 0 };
            transitions[i][toggle_to] += x;
            transitions[i][stay_to] += w - x;
            next[i] += w - x;
            if x > 0 {
                next[i + 1] += x;
            }
        }
        let mut first_write = comp.clone();
        first_write.resize(q, 0);
        requests.push(ComponentRequest { write: j, n, q, first_write, transitions });
        tops.push(even_level as u8);
        comp = next;
    }
    Schedule { w1, requests, tops }
}

/// `t` writes with `ℓ` changes per cell (EIA:DU). Write `j ≥ 2` pushes every
/// cell to the two highest levels of a `(2m+1)`-ary component, which the
/// decoder reads mod 2.
pub fn build_construction2(
    n: usize,
    t: usize,
    ell: u8,
    profile: &EiaProfile,
    provider: &mut dyn ComponentProvider,
) -> Result<ElmCodebook, ConstructionError> {
    if profile.t() != t || profile.ell() != ell as usize {
        return Err(ConstructionError::Invalid(format!(
            "profile is for (t, ell) = ({}, {}), not ({t}, {ell})",
            profile.t(),
            profile.ell()
        )));
    }
    if n == 0 || n > 10 || t == 0 {
        return Err(ConstructionError::Invalid(format!("need 1 <= n <= 10 and t >= 1, got n={n}, t={t}")));
    }
    let model = ModelSpec::zero_error(Knowledge::Ia, Knowledge::U);
    if ell as usize >= t {
        let mut code = free_code(n, t, ell, model)?;
        code.metadata.insert("construction".into(), "2 (free)".into());
        return gate(code, true);
    }
    let plan = schedule(n, profile);
    let mut components = Vec::with_capacity(plan.requests.len());
    for request in &plan.requests {
        let c = provide(provider, request)?;
        check_shape(&c, &format!("write {} component", request.write), n, request.q, 2)?;
        check_first_class(&c, &format!("write {} component", request.write), &request.first_write)?;
        components.push(c);
    }
    let first = words_with_composition(&[n - plan.w1, plan.w1]);
    let decode_first: BTreeMap<Vec<u8>, usize> =
        first.iter().enumerate().map(|(m, w)| (w.clone(), m)).collect();
    let mut messages = vec![first.len()];
    messages.extend(components.iter().map(|c| c.writes[1].messages));
    let mut code = ElmCodebook::tabulate(
        n,
        ell,
        model,
        messages,
        |j, m, v| {
            if j == 0 {
                return Ok(first.get(m).cloned());
            }
            Ok(components[j - 1].encode(1, m, v).map(|c| c.iter().map(|x| x % 2).collect()))
        },
        |j, state, _| {
            if j == 0 {
                decode_first.get(state).copied()
            } else {
                components[j - 1].decode(1, &lift(state, plan.tops[j - 1]))
            }
        },
    )?;
    code.metadata.insert("construction".into(), "2".into());
    code.metadata.insert("w1".into(), plan.w1.to_string());
    for r in &plan.requests {
        code.metadata.insert(
            format!("write{}_component", r.write),
            format!("q={}, first={:?}, transitions={:?}", r.q, r.first_write, r.transitions),
        );
    }
    gate(code, true)
}

/// `ℓ` consecutive binary WOM phases (EIP:DU). Phases flagged in `plan` run
/// through the complement: the stored state is the complement of the
/// component codeword.
pub fn build_construction3(
    t: usize,
    ell: u8,
    plan: &PhasePlan,
    components: &[WomCodebook],
) -> Result<ElmCodebook, ConstructionError> {
    if plan.t() != t || plan.parts.len() != ell as usize || plan.complemented.len() != plan.parts.len() {
        return Err(ConstructionError::Invalid(format!(
            "plan {:?} does not split t = {t} into ell = {ell} phases",
            plan.parts
        )));
    }
    if components.len() != plan.parts.len() {
        return Err(ConstructionError::ShapeMismatch(format!(
            "{} components for {} phases",
            components.len(),
            plan.parts.len()
        )));
    }
    let n = components[0].n;
    if n == 0 || n > 12 {
        return Err(ConstructionError::Invalid(format!("n = {n} outside 1..=12")));
    }
    for (i, (c, &k)) in components.iter().zip(&plan.parts).enumerate() {
        check_shape(c, &format!("phase {} component", i + 1), n, 2, k)?;
        if c.model != WomModel::EiDu {
            return Err(ConstructionError::ShapeMismatch(format!(
                "phase {} component is {}, expected EI:DU",
                i + 1,
                c.model
            )));
        }
    }
    let messages: Vec<usize> = components.iter().flat_map(|c| c.message_counts()).collect();
    let zeros = vec![0u8; n];
    let mut code = ElmCodebook::tabulate(
        n,
        ell,
        ModelSpec::zero_error(Knowledge::Ip, Knowledge::U),
        messages,
        |j, m, c| {
            let (i, h) = plan.locate(j).expect("write within plan");
            let flip = plan.complemented[i];
            let prior = if h == 0 {
                zeros.clone()
            } else if flip {
                complement(c)
            } else {
                c.to_vec()
            };
            Ok(components[i]
                .encode(h, m, &prior)
                .map(|w| if flip { complement(&w) } else { w }))
        },
        |j, state, _| {
            let (i, h) = plan.locate(j).expect("write within plan");
            if plan.complemented[i] {
                components[i].decode(h, &complement(state))
            } else {
                components[i].decode(h, state)
            }
        },
    )?;
    code.phases = Some(plan.clone());
    code.metadata.insert("construction".into(), "3".into());
    gate(code, true)
}
