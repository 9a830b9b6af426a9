//! Generic constrained NSGA-II over a box of real variables.
//!
//! Constraint handling follows Deb's feasibility-first rule. Survivor
//! selection caps the first front at `pareto_fraction * population`,
//! trimming by crowding distance. Runs stop at `max_generations` or once the
//! average crowding distance of the feasible first front stops moving: the
//! mean relative change over the last `stall_window` generations falls below
//! `function_tolerance`.
//!
//! All random draws happen on one sequential ChaCha stream; only objective
//! evaluation is parallel, so results do not depend on thread scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sort::{crowding_distance, fast_nondominated_sort};
use crate::game::{rng_from_seed, GameRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Both minimized.
    pub objectives: [f64; 2],
    /// Zero when feasible.
    pub violation: f64,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }
}

pub trait Problem: Sync {
    fn n_vars(&self) -> usize;
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    fn evaluate(&self, x: &[f64]) -> Evaluation;
    /// Solutions placed in the initial population before random fill.
    fn initial_guesses(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nsga2Settings {
    pub population: usize,
    pub max_generations: usize,
    pub function_tolerance: f64,
    pub crossover_rate: f64,
    pub pareto_fraction: f64,
    pub eta_crossover: f64,
    pub eta_mutation: f64,
    /// Per-gene mutation probability; `None` means `1 / n_vars`.
    pub mutation_rate: Option<f64>,
    pub stall_window: usize,
}

impl Default for Nsga2Settings {
    fn default() -> Self {
        Nsga2Settings {
            population: 800,
            max_generations: 400,
            function_tolerance: 1e-4,
            crossover_rate: 0.8,
            pareto_fraction: 0.6,
            eta_crossover: 20.0,
            eta_mutation: 20.0,
            mutation_rate: None,
            stall_window: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub x: Vec<f64>,
    pub eval: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nsga2Result {
    pub population: Vec<Individual>,
    pub generations: usize,
    /// True when the spread criterion stopped the run early.
    pub converged: bool,
}

impl Nsga2Result {
    /// Feasible, mutually non-dominated members of the final population.
    pub fn feasible_front(&self) -> Vec<&Individual> {
        let feasible: Vec<&Individual> = self.population.iter().filter(|i| i.eval.is_feasible()).collect();
        if feasible.is_empty() {
            return feasible;
        }
        let objs: Vec<[f64; 2]> = feasible.iter().map(|i| i.eval.objectives).collect();
        fast_nondominated_sort(&objs)[0].iter().map(|&k| feasible[k]).collect()
    }
}

/// Rank and crowding of every member, with infeasible members ranked after
/// all feasible fronts in order of increasing violation.
struct Ranking {
    fronts: Vec<Vec<usize>>,
    rank: Vec<usize>,
    crowding: Vec<f64>,
}

fn rank_population(pop: &[Individual]) -> Ranking {
    let n = pop.len();
    let feasible: Vec<usize> = (0..n).filter(|&i| pop[i].eval.is_feasible()).collect();
    let mut infeasible: Vec<usize> = (0..n).filter(|&i| !pop[i].eval.is_feasible()).collect();
    infeasible.sort_by(|&a, &b| pop[a].eval.violation.total_cmp(&pop[b].eval.violation).then(a.cmp(&b)));

    let mut fronts: Vec<Vec<usize>> = Vec::new();
    if !feasible.is_empty() {
        let objs: Vec<[f64; 2]> = feasible.iter().map(|&i| pop[i].eval.objectives).collect();
        for f in fast_nondominated_sort(&objs) {
            fronts.push(f.into_iter().map(|k| feasible[k]).collect());
        }
    }
    fronts.extend(infeasible.into_iter().map(|i| vec![i]));

    let mut rank = vec![0; n];
    let mut crowding = vec![0.0; n];
    for (r, front) in fronts.iter().enumerate() {
        let objs: Vec<[f64; 2]> = front.iter().map(|&i| pop[i].eval.objectives).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&objs)) {
            rank[i] = r;
            crowding[i] = d;
        }
    }
    Ranking { fronts, rank, crowding }
}

/// Indices of `front` ordered by decreasing crowding, ties by index.
fn by_crowding(front: &[usize], crowding: &[f64]) -> Vec<usize> {
    let mut v = front.to_vec();
    v.sort_by(|&a, &b| crowding[b].total_cmp(&crowding[a]).then(a.cmp(&b)));
    v
}

/// Elitist survivor selection from the merged population.
fn select_survivors(merged: &[Individual], n: usize, pareto_fraction: f64) -> Vec<usize> {
    let ranking = rank_population(merged);
    let first_is_feasible = merged[ranking.fronts[0][0]].eval.is_feasible();
    let cap = if first_is_feasible { ((pareto_fraction * n as f64).floor() as usize).max(1) } else { n };
    let mut chosen = Vec::with_capacity(n);
    let mut leftovers = Vec::new();
    for (r, front) in ranking.fronts.iter().enumerate() {
        if chosen.len() >= n {
            break;
        }
        let room = if r == 0 { cap.min(n) } else { n - chosen.len() };
        if front.len() <= room {
            chosen.extend_from_slice(front);
        } else {
            let ordered = by_crowding(front, &ranking.crowding);
            chosen.extend_from_slice(&ordered[..room]);
            if r == 0 {
                leftovers = ordered[room..].to_vec();
            }
        }
    }
    // Later fronts too small to fill up: return the capped first-front members.
    let short = n.saturating_sub(chosen.len());
    chosen.extend(leftovers.into_iter().take(short));
    chosen
}

fn tournament(rng: &mut GameRng, pop: &[Individual], ranking: &Ranking) -> usize {
    let a = rng.random_range(0..pop.len());
    let b = rng.random_range(0..pop.len());
    let (ea, eb) = (&pop[a].eval, &pop[b].eval);
    let a_wins = match (ea.is_feasible(), eb.is_feasible()) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => ea.violation <= eb.violation,
        (true, true) => {
            ranking.rank[a] < ranking.rank[b]
                || (ranking.rank[a] == ranking.rank[b] && ranking.crowding[a] >= ranking.crowding[b])
        }
    };
    if a_wins {
        a
    } else {
        b
    }
}

/// Bounded simulated-binary crossover, in place.
fn sbx(rng: &mut GameRng, x1: &mut [f64], x2: &mut [f64], lo: &[f64], hi: &[f64], eta: f64) {
    for i in 0..x1.len() {
        if rng.random::<f64>() > 0.5 {
            continue;
        }
        let (a, b) = (x1[i].min(x2[i]), x1[i].max(x2[i]));
        if b - a < 1e-14 {
            continue;
        }
        let (yl, yu) = (lo[i], hi[i]);
        let u: f64 = rng.random();
        let child = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let bq1 = child(1.0 + 2.0 * (a - yl) / (b - a));
        let bq2 = child(1.0 + 2.0 * (yu - b) / (b - a));
        let c1 = (0.5 * ((a + b) - bq1 * (b - a))).clamp(yl, yu);
        let c2 = (0.5 * ((a + b) + bq2 * (b - a))).clamp(yl, yu);
        if rng.random::<bool>() {
            x1[i] = c2;
            x2[i] = c1;
        } else {
            x1[i] = c1;
            x2[i] = c2;
        }
    }
}

/// Bounded polynomial mutation, in place.
fn polynomial_mutation(rng: &mut GameRng, x: &mut [f64], lo: &[f64], hi: &[f64], eta: f64, rate: f64) {
    for i in 0..x.len() {
        if rng.random::<f64>() >= rate {
            continue;
        }
        let (yl, yu) = (lo[i], hi[i]);
        let span = yu - yl;
        if span <= 0.0 {
            continue;
        }
        let y = x[i];
        let d1 = (y - yl) / span;
        let d2 = (yu - y) / span;
        let u: f64 = rng.random();
        let pow = 1.0 / (eta + 1.0);
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            v.powf(pow) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(pow)
        };
        x[i] = (y + dq * span).clamp(yl, yu);
    }
}

fn evaluate_all<P: Problem>(problem: &P, xs: Vec<Vec<f64>>) -> Vec<Individual> {
    xs.into_par_iter()
        .map(|x| {
            let eval = problem.evaluate(&x);
            Individual { x, eval }
        })
        .collect()
}

/// Mean of the finite crowding distances of the feasible first front.
fn front_spread(pop: &[Individual], ranking: &Ranking) -> Option<f64> {
    let front = &ranking.fronts[0];
    if !pop[front[0]].eval.is_feasible() {
        return None;
    }
    let finite: Vec<f64> = front.iter().map(|&i| ranking.crowding[i]).filter(|d| d.is_finite()).collect();
    (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64)
}

pub fn nsga2<P: Problem>(problem: &P, settings: &Nsga2Settings, seed: u64) -> Nsga2Result {
    let n = settings.population.max(2);
    let nv = problem.n_vars();
    let (lo, hi) = (problem.lower(), problem.upper());
    let mutation_rate = settings.mutation_rate.unwrap_or(1.0 / nv as f64);
    let mut rng = rng_from_seed(seed);

    let mut xs: Vec<Vec<f64>> = problem
        .initial_guesses()
        .into_iter()
        .take(n)
        .map(|g| g.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| v.clamp(*l, *h)).collect())
        .collect();
    while xs.len() < n {
        xs.push((0..nv).map(|i| lo[i] + rng.random::<f64>() * (hi[i] - lo[i])).collect());
    }
    let mut pop = evaluate_all(problem, xs);
    let mut ranking = rank_population(&pop);
    let mut spreads: Vec<Option<f64>> = vec![front_spread(&pop, &ranking)];
    let mut converged = false;
    let mut generation = 0;

    while generation < settings.max_generations {
        generation += 1;
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let mut c1 = pop[tournament(&mut rng, &pop, &ranking)].x.clone();
            let mut c2 = pop[tournament(&mut rng, &pop, &ranking)].x.clone();
            if rng.random::<f64>() < settings.crossover_rate {
                sbx(&mut rng, &mut c1, &mut c2, lo, hi, settings.eta_crossover);
            }
            polynomial_mutation(&mut rng, &mut c1, lo, hi, settings.eta_mutation, mutation_rate);
            polynomial_mutation(&mut rng, &mut c2, lo, hi, settings.eta_mutation, mutation_rate);
            children.push(c1);
            if children.len() < n {
                children.push(c2);
            }
        }
        let mut merged = pop;
        merged.extend(evaluate_all(problem, children));
        let survivors = select_survivors(&merged, n, settings.pareto_fraction);
        pop = survivors.into_iter().map(|i| merged[i].clone()).collect();
        ranking = rank_population(&pop);
        spreads.push(front_spread(&pop, &ranking));

        if stalled(&spreads, settings.stall_window, settings.function_tolerance) {
            converged = true;
            break;
        }
    }
    Nsga2Result { population: pop, generations: generation, converged }
}

fn stalled(spreads: &[Option<f64>], window: usize, tol: f64) -> bool {
    if window == 0 || spreads.len() <= window {
        return false;
    }
    let tail = &spreads[spreads.len() - window - 1..];
    let mut total = 0.0;
    for w in tail.windows(2) {
        match (w[0], w[1]) {
            (Some(a), Some(b)) if a > 0.0 => total += ((b - a) / a).abs(),
            _ => return false,
        }
    }
    total / (window as f64) < tol
}
