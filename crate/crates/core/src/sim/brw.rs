//! Capped branching random walk with position-dependent branching mean.

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{linear_fit, mix_seed, LinearFit};

pub const MIN_CAP: usize = 1000;

/// Branching mean `m(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Branching {
    Constant { m: f64 },
    /// `max(0, base - slope |u - g a|)` at generation `g`, where `a` is the step mean.
    AffineDecay { base: f64, slope: f64 },
}

impl Branching {
    pub fn mean(&self, u: f64, center: f64) -> f64 {
        match *self {
            Branching::Constant { m } => m,
            Branching::AffineDecay { base, slope } => (base - slope * (u - center).abs()).max(0.0),
        }
    }
}

/// Step law `p(x)`; both choices are symmetric about zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepLaw {
    /// `+size` or `-size` with probability 1/2 each.
    TwoPoint { size: f64 },
    /// A centred normal with deviation `sigma`, rounded to the nearest integer.
    DiscreteGaussian { sigma: f64 },
}

impl StepLaw {
    pub fn mean(&self) -> f64 {
        0.0
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            StepLaw::TwoPoint { size } => {
                if rng.next_u32() & 1 == 0 {
                    size
                } else {
                    -size
                }
            }
            StepLaw::DiscreteGaussian { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (sigma * z).round()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrwSpec {
    pub branching: Branching,
    pub step: StepLaw,
    pub generations: u32,
    pub cap: usize,
    /// Particles at the origin in generation 0.
    pub initial_population: usize,
    pub seed: u64,
}

impl BrwSpec {
    fn validate(&self) -> Result<()> {
        if self.cap < MIN_CAP {
            return Err(Error::Invalid(format!("population cap must be >= {MIN_CAP}, got {}", self.cap)));
        }
        if self.initial_population == 0 || self.initial_population > self.cap {
            return Err(Error::Invalid(format!(
                "initial population must lie in 1..={}, got {}",
                self.cap, self.initial_population
            )));
        }
        let ok = match self.branching {
            Branching::Constant { m } => m.is_finite() && m >= 0.0,
            Branching::AffineDecay { base, slope } => base.is_finite() && base >= 0.0 && slope.is_finite() && slope >= 0.0,
        };
        let step_ok = match self.step {
            StepLaw::TwoPoint { size } => size.is_finite() && size > 0.0,
            StepLaw::DiscreteGaussian { sigma } => sigma.is_finite() && sigma > 0.0,
        };
        if !ok || !step_ok {
            return Err(Error::Invalid(format!("bad branching or step law in {self:?}")));
        }
        Ok(())
    }

    /// `n a` after `n` generations.
    pub fn center(&self, generation: u32) -> f64 {
        generation as f64 * self.step.mean()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: u32,
    /// Offspring produced before the cap was applied.
    pub offspring: u64,
    /// Particles kept, `Z^(n)` after the cap.
    pub size: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrwRun {
    pub spec: BrwSpec,
    pub summaries: Vec<GenerationSummary>,
    /// Final-generation positions, ascending.
    pub positions: Vec<f64>,
    /// First generation with no particles.
    pub extinct_at: Option<u32>,
}

impl BrwRun {
    pub fn sizes(&self) -> Vec<usize> {
        self.summaries.iter().map(|s| s.size).collect()
    }

    pub fn final_generation(&self) -> u32 {
        self.summaries.last().map_or(0, |s| s.generation)
    }

    /// Lower empirical `alpha`-quantile of the final positions.
    pub fn quantile(&self, alpha: f64) -> Option<f64> {
        let n = self.positions.len();
        if n == 0 || !(0.0..=1.0).contains(&alpha) {
            return None;
        }
        let idx = ((alpha * n as f64).ceil() as usize).clamp(1, n) - 1;
        Some(self.positions[idx])
    }
}

fn summarize(generation: u32, offspring: u64, pos: &[f64]) -> GenerationSummary {
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for &p in pos {
        lo = lo.min(p);
        hi = hi.max(p);
        sum += p;
    }
    GenerationSummary {
        generation,
        offspring,
        size: pos.len(),
        mean: if pos.is_empty() { f64::NAN } else { sum / pos.len() as f64 },
        min: lo,
        max: hi,
    }
}

fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn bernoulli<R: RngCore>(rng: &mut R, p: f64) -> bool {
    uniform(rng) < p
}

pub fn brw_simulate(spec: &BrwSpec) -> Result<BrwRun> {
    spec.validate()?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(spec.seed);
    let mut pos = vec![0.0f64; spec.initial_population];
    let mut summaries = vec![summarize(0, pos.len() as u64, &pos)];
    let mut counts: Vec<u32> = Vec::new();
    let mut next: Vec<f64> = Vec::with_capacity(spec.cap);
    let mut parents: Vec<u32> = Vec::with_capacity(spec.cap + 1);
    for g in 1..=spec.generations {
        let center = spec.center(g - 1);
        counts.clear();
        let mut total = 0u64;
        for &u in &pos {
            let m = spec.branching.mean(u, center);
            let whole = m.floor();
            let frac = m - whole;
            let c = whole as u32 + u32::from(frac > 0.0 && bernoulli(&mut rng, frac));
            counts.push(c);
            total += c as u64;
        }
        // selection sampling over all children: each survives with equal
        // probability; written branch-free since the keep rate is near 1/2
        let keep = total.min(spec.cap as u64) as usize;
        parents.clear();
        parents.resize(keep + 1, 0);
        let mut need = keep as u64;
        let mut left = total;
        let mut len = 0usize;
        for (p, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                parents[len] = p as u32;
                let take = uniform(&mut rng) * (left as f64) < need as f64;
                len += usize::from(take);
                need -= u64::from(take);
                left -= 1;
            }
        }
        debug_assert_eq!(len, keep);
        next.clear();
        next.extend(parents[..keep].iter().map(|&p| pos[p as usize] + spec.step.sample(&mut rng)));
        std::mem::swap(&mut pos, &mut next);
        summaries.push(summarize(g, total, &pos));
        if pos.is_empty() {
            return Ok(BrwRun { spec: *spec, summaries, positions: pos, extinct_at: Some(g) });
        }
    }
    pos.sort_unstable_by(f64::total_cmp);
    Ok(BrwRun { spec: *spec, summaries, positions: pos, extinct_at: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceStudy {
    pub spec: BrwSpec,
    pub alpha: f64,
    pub replicates: usize,
    pub extinct: usize,
    /// `Q_n(alpha) - n a` per surviving replicate.
    pub deviations: Vec<f64>,
    pub deviation_sd: f64,
    pub lambdas: Vec<f64>,
    /// Empirical `P(|Q_n(alpha) - n a| >= lambda)`.
    pub exceedance: Vec<f64>,
    pub std_err: Vec<f64>,
    /// `ln P` against `lambda^2` over the points with `P > 0`.
    pub fit: Option<LinearFit>,
}

/// Replicates `spec` with seeds `mix_seed(spec.seed, r)` and tabulates the
/// quantile exceedance. With `lambdas = None` the grid is eight points from
/// 0.25 to 2 deviation standard deviations.
pub fn brw_exceedance(spec: &BrwSpec, replicates: usize, alpha: f64, lambdas: Option<Vec<f64>>) -> Result<ExceedanceStudy> {
    if replicates < 2 {
        return Err(Error::Invalid("need at least 2 replicates".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    spec.validate()?;
    let center = spec.center(spec.generations);
    let runs: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let s = BrwSpec { seed: mix_seed(spec.seed, r as u64), ..*spec };
            brw_simulate(&s).map(|run| run.quantile(alpha).filter(|_| run.extinct_at.is_none()).map(|q| q - center))
        })
        .collect::<Result<_>>()?;
    let deviations: Vec<f64> = runs.iter().flatten().copied().collect();
    let extinct = replicates - deviations.len();
    if deviations.len() < 2 {
        return Err(Error::Degenerate(format!("{extinct} of {replicates} replicates went extinct")));
    }
    let k = deviations.len() as f64;
    let mean = deviations.iter().sum::<f64>() / k;
    let deviation_sd = (deviations.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
    let lambdas = lambdas.unwrap_or_else(|| (1..=8).map(|i| 0.25 * i as f64 * deviation_sd).collect());
    let exceedance: Vec<f64> = lambdas
        .iter()
        .map(|&l| deviations.iter().filter(|d| d.abs() >= l).count() as f64 / k)
        .collect();
    let std_err = exceedance.iter().map(|&p| (p * (1.0 - p) / k).sqrt()).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(&exceedance)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&l, &p)| (l * l, p.ln()))
        .unzip();
    let fit = if xs.len() >= 3 { linear_fit(&xs, &ys).ok() } else { None };
    Ok(ExceedanceStudy {
        spec: *spec,
        alpha,
        replicates,
        extinct,
        deviations,
        deviation_sd,
        lambdas,
        exceedance,
        std_err,
        fit,
    })
}
