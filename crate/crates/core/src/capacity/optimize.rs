//! Numerical maximization of weighted sum-rates over a region.
//!
//! The search runs in two phases. A stagewise grid sweep visits blocks of at
//! most four free parameters on the lattice `{0, 1/32, …, 1/2}` while the
//! others stay fixed, keeping several of the best first-block points as
//! independent starts. Each start is then refined by cyclic coordinate
//! ascent with a golden-section line search. For a single coordinate the
//! objective has the form `a·h(p) + b·p + c`, so every line search is over a
//! concave function.

use super::{
    CapacityError, EiaProfile, EipDiaProfile, EuDiaProfile, ProbabilityProfile, RateTuple,
    RegionModel, h,
};

const GRID_STEPS: usize = 16;
const BLOCK: usize = 4;
const STARTS: usize = 4;
const LINE_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 20_000;
const TIE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub profile: ProbabilityProfile,
    pub rates: RateTuple,
    /// `Σ w_j R_j` at the returned profile.
    pub objective: f64,
}

/// Maximizes `Σ w_j R_j` over the region of `model` (all weights 1 when
/// `weights` is `None`).
pub fn optimize_sum_rate(
    model: RegionModel,
    t: usize,
    ell: usize,
    weights: Option<&[f64]>,
) -> Result<Optimum, CapacityError> {
    if t == 0 || ell == 0 {
        return Err(CapacityError::InvalidProfile("t and ell must both be at least 1".into()));
    }
    let weights = match weights {
        Some(w) if w.len() != t => {
            return Err(CapacityError::InvalidProfile(format!("expected {t} weights")))
        }
        Some(w) if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) => {
            return Err(CapacityError::InvalidProfile("weights must be finite and >= 0".into()))
        }
        Some(w) => w.to_vec(),
        None => vec![1.0; t],
    };
    let layout = Layout::new(model, t, ell, weights);
    let dim = layout.dim();

    let mut starts = layout.grid_starts();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for x in starts.iter_mut() {
        let f = layout.coordinate_ascent(x);
        let better = match &best {
            None => true,
            Some((bf, bx)) => f > bf + TIE || ((f - bf).abs() <= TIE && x.as_slice() < bx.as_slice()),
        };
        if better {
            best = Some((f, x.clone()));
        }
    }
    let (_, x) = best.unwrap_or((0.0, vec![0.0; dim]));
    let profile = layout.profile(&x)?;
    let (_, rates) = profile.evaluate();
    let objective = rates.weighted(&layout.weights);
    Ok(Optimum { profile, rates, objective })
}

struct Layout {
    model: RegionModel,
    t: usize,
    ell: usize,
    weights: Vec<f64>,
    /// Index of the first free parameter of write `j` (0-based) in `x`.
    offsets: Vec<usize>,
    dim: usize,
}

impl Layout {
    fn new(model: RegionModel, t: usize, ell: usize, weights: Vec<f64>) -> Self {
        let mut offsets = Vec::with_capacity(t);
        let mut dim = 0;
        for j in 1..=t {
            offsets.push(dim);
            dim += match model {
                RegionModel::Eia => ell.min(j),
                RegionModel::EipDia => {
                    if j == 1 || ell == 1 {
                        1
                    } else {
                        2
                    }
                }
                RegionModel::EuDia => 1,
            };
        }
        Self { model, t, ell, weights, offsets, dim }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn width(&self, j0: usize) -> usize {
        let end = self.offsets.get(j0 + 1).copied().unwrap_or(self.dim);
        end - self.offsets[j0]
    }

    /// Probability of programming, on write `j0 + 1`, a cell changed `i`
    /// times so far.
    fn prob(&self, x: &[f64], j0: usize, i: usize) -> f64 {
        let base = self.offsets[j0];
        match self.model {
            RegionModel::Eia => {
                if i < self.width(j0) {
                    x[base + i]
                } else {
                    0.0
                }
            }
            RegionModel::EipDia => {
                if i >= self.ell {
                    0.0
                } else if i % 2 == 0 {
                    x[base]
                } else if self.width(j0) == 2 {
                    x[base + 1]
                } else {
                    0.0
                }
            }
            RegionModel::EuDia => {
                if i < self.ell {
                    x[base]
                } else {
                    0.0
                }
            }
        }
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let ell = self.ell;
        let mut q = vec![0.0; ell + 1];
        let mut next = vec![0.0; ell + 1];
        q[0] = 1.0;
        let mut total = 0.0;
        for j0 in 0..self.t {
            let mut rate = 0.0;
            next.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..=ell {
                let p = self.prob(x, j0, i);
                if i < ell {
                    rate += q[i] * h(p);
                    next[i] += q[i] * (1.0 - p);
                    next[i + 1] += q[i] * p;
                } else {
                    next[i] += q[i];
                }
            }
            total += self.weights[j0] * rate;
            std::mem::swap(&mut q, &mut next);
        }
        total
    }

    fn profile(&self, x: &[f64]) -> Result<ProbabilityProfile, CapacityError> {
        let (t, ell) = (self.t, self.ell);
        Ok(match self.model {
            RegionModel::Eia => {
                let rows = (0..t)
                    .map(|j0| (0..self.width(j0)).map(|i| x[self.offsets[j0] + i]).collect())
                    .collect();
                ProbabilityProfile::Eia(EiaProfile::new(t, ell, rows)?)
            }
            RegionModel::EipDia => {
                let p0 = (0..t).map(|j0| self.prob(x, j0, 0)).collect();
                let p1 = (0..t)
                    .map(|j0| if self.width(j0) == 2 { x[self.offsets[j0] + 1] } else { 0.0 })
                    .collect();
                ProbabilityProfile::EipDia(EipDiaProfile::new(t, ell, p0, p1)?)
            }
            RegionModel::EuDia => {
                let p = (0..t).map(|j0| x[self.offsets[j0]]).collect();
                ProbabilityProfile::EuDia(EuDiaProfile::new(t, ell, p)?)
            }
        })
    }

    /// Stagewise grid sweep; returns up to [`STARTS`] distinct start points.
    fn grid_starts(&self) -> Vec<Vec<f64>> {
        let base = vec![0.5; self.dim];
        let blocks: Vec<std::ops::Range<usize>> = (0..self.dim)
            .step_by(BLOCK)
            .map(|s| s..(s + BLOCK).min(self.dim))
            .collect();
        let Some(first) = blocks.first() else {
            return vec![base];
        };
        let mut scored = self.grid_block(&base, first.clone());
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.partial_cmp(&b.1).unwrap()));
        let mut starts: Vec<Vec<f64>> = scored.into_iter().take(STARTS).map(|(_, x)| x).collect();
        for x in starts.iter_mut() {
            for block in &blocks[1..] {
                let mut scored = self.grid_block(x, block.clone());
                scored.sort_by(|a, b| {
                    b.0.total_cmp(&a.0).then_with(|| a.1.partial_cmp(&b.1).unwrap())
                });
                *x = scored.swap_remove(0).1;
            }
        }
        starts
    }

    fn grid_block(&self, base: &[f64], block: std::ops::Range<usize>) -> Vec<(f64, Vec<f64>)> {
        let width = block.len();
        let points = (GRID_STEPS + 1).pow(width as u32);
        let mut out = Vec::with_capacity(points);
        let mut x = base.to_vec();
        for code in 0..points {
            let mut c = code;
            for k in block.clone().rev() {
                x[k] = (c % (GRID_STEPS + 1)) as f64 / (2 * GRID_STEPS) as f64;
                c /= GRID_STEPS + 1;
            }
            out.push((self.objective(&x), x.clone()));
        }
        out
    }

    fn coordinate_ascent(&self, x: &mut [f64]) -> f64 {
        let mut f = self.objective(x);
        for _ in 0..MAX_SWEEPS {
            let before = f;
            for k in 0..self.dim {
                let (xk, fk) = self.line_search(x, k);
                if fk > f {
                    x[k] = xk;
                    f = fk;
                }
            }
            if f - before <= 1e-15 {
                break;
            }
        }
        f
    }

    fn line_search(&self, x: &mut [f64], k: usize) -> (f64, f64) {
        let saved = x[k];
        let eval = |v: f64, x: &mut [f64]| {
            x[k] = v;
            self.objective(x)
        };
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.0f64, 0.5f64);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut fc = eval(c, x);
        let mut fd = eval(d, x);
        while b - a > LINE_TOL {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = eval(c, x);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = eval(d, x);
            }
        }
        let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
        for edge in [0.0, 0.5] {
            let fe = eval(edge, x);
            if fe >= best.1 {
                best = (edge, fe);
            }
        }
        x[k] = saved;
        best
    }
}
