use std::borrow::Borrow;
use std::cmp::Ordering;

use crate::error::{invalid, Result};

/// Objective vector (minimized) and total constraint violation.
#[derive(Debug, Clone, PartialEq)]
pub struct Fitness {
    pub objectives: Vec<f64>,
    pub violation: f64,
}

impl Fitness {
    pub fn new(objectives: Vec<f64>, violation: f64) -> Self {
        Fitness { objectives, violation }
    }

    pub fn feasible(objectives: Vec<f64>) -> Self {
        Fitness { objectives, violation: 0.0 }
    }

    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }
}

fn pareto_dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

fn dominates_unchecked(a: &Fitness, b: &Fitness) -> bool {
    match (a.is_feasible(), b.is_feasible()) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation < b.violation,
        (true, true) => pareto_dominates(&a.objectives, &b.objectives),
    }
}

/// Constrained domination: feasible beats infeasible, smaller violation beats
/// larger, and among feasible solutions plain Pareto domination applies.
pub fn constrained_dominates(a: &Fitness, b: &Fitness) -> Result<bool> {
    if a.objectives.len() != b.objectives.len() {
        return invalid(format!(
            "cannot compare {} objectives with {}",
            a.objectives.len(),
            b.objectives.len()
        ));
    }
    Ok(dominates_unchecked(a, b))
}

/// Partitions `pop` into non-domination fronts, best first; each front lists
/// positions in `pop` in ascending order.
pub fn fast_non_dominated_sort<F: Borrow<Fitness>>(pop: &[F]) -> Result<Vec<Vec<usize>>> {
    let n = pop.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let arity = pop[0].borrow().objectives.len();
    if pop.iter().any(|f| f.borrow().objectives.len() != arity) {
        return invalid("population has mixed objective counts");
    }
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); n];
    for p in 0..n {
        for q in (p + 1)..n {
            let (fp, fq) = (pop[p].borrow(), pop[q].borrow());
            if dominates_unchecked(fp, fq) {
                dominates[p].push(q);
                dominated_by_count[q] += 1;
            } else if dominates_unchecked(fq, fp) {
                dominates[q].push(p);
                dominated_by_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominates[p] {
                dominated_by_count[q] -= 1;
                if dominated_by_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(fronts)
}

/// Per-objective `(min, max)` over a front.
pub fn objective_bounds<F: Borrow<Fitness>>(front: &[F]) -> Vec<(f64, f64)> {
    let Some(first) = front.first() else {
        return Vec::new();
    };
    let mut bounds: Vec<(f64, f64)> = first.borrow().objectives.iter().map(|&v| (v, v)).collect();
    for f in &front[1..] {
        for (b, &v) in bounds.iter_mut().zip(&f.borrow().objectives) {
            b.0 = b.0.min(v);
            b.1 = b.1.max(v);
        }
    }
    bounds
}

/// Crowding distance of each member of `front`.
///
/// Per objective, members are sorted by value; the two extremes get
/// `+inf`, interior members accumulate `(next - previous) / (max - min)`.
/// Objectives whose bounds have zero range contribute nothing.
pub fn crowding_distance<F: Borrow<Fitness>>(front: &[F], bounds: &[(f64, f64)]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    for (m, &(lo, hi)) in bounds.iter().enumerate() {
        let value = |i: usize| front[i].borrow().objectives[m];
        order.sort_by(|&a, &b| value(a).partial_cmp(&value(b)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..(n - 1) {
            let i = order[w];
            if dist[i].is_finite() {
                dist[i] += (value(order[w + 1]) - value(order[w - 1])) / range;
            }
        }
    }
    dist
}
