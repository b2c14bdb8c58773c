//! Fixed-start open-tour TSP by a genetic algorithm.
//!
//! The population is shuffled into groups of four each generation; the
//! best tour of a group survives unchanged and is copied three times with
//! one mutation each (segment reversal, point insertion, pair swap) at a
//! shared random cut `i < j`. Group winners always survive, so the best
//! tour length never increases from one generation to the next.

use alloc::vec::Vec;
use nalgebra::DVector;

use crate::math::PathMetric;
use crate::rng::{below, seeded, shuffle};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub seed: u64,
    pub metric: PathMetric,
}

impl GaParams {
    /// Defaults for an instance of `n_points` points.
    pub fn for_points(n_points: usize, seed: u64) -> Self {
        Self { population: 64, generations: default_generations(n_points), seed, metric: PathMetric::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 4 || self.population % 4 != 0 {
            return Err(Error::param("GA population must be a positive multiple of 4"));
        }
        if self.generations == 0 {
            return Err(Error::param("GA needs at least one generation"));
        }
        Ok(())
    }
}

/// Generation budget used when none is given.
pub fn default_generations(n_points: usize) -> usize {
    200 + 2 * n_points
}

/// Open tour beginning at the search-frame origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Itinerary {
    points: Vec<DVector<f64>>,
    total_length: f64,
}

impl Itinerary {
    pub fn new(points: Vec<DVector<f64>>, metric: &PathMetric) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("itinerary"));
        }
        let total_length = metric.path_length(&points);
        Ok(Self { points, total_length })
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }
}

/// Itinerary plus the search trace.
#[derive(Debug, Clone)]
pub struct TspSolution {
    pub itinerary: Itinerary,
    /// Visiting order as indices into the input points.
    pub order: Vec<usize>,
    /// Best tour length among the initial population.
    pub initial_best: f64,
    /// Best tour length of each generation's population.
    pub best_per_generation: Vec<f64>,
}

pub fn solve_open_tsp(points: &[DVector<f64>], start: &DVector<f64>, ga: &GaParams) -> Result<Itinerary> {
    Ok(solve_open_tsp_traced(points, start, ga)?.itinerary)
}

pub fn solve_open_tsp_traced(points: &[DVector<f64>], start: &DVector<f64>, ga: &GaParams) -> Result<TspSolution> {
    ga.validate()?;
    if points.is_empty() {
        return Err(Error::EmptyInput("no points to order"));
    }
    let n = points.len();
    let dist = DistanceTable::new(start, points, &ga.metric);
    let mut rng = seeded(ga.seed);

    let mut pop: Vec<Vec<usize>> = Vec::with_capacity(ga.population);
    pop.push(nearest_neighbour(&dist, n));
    while pop.len() < ga.population {
        let mut tour: Vec<usize> = (0..n).collect();
        shuffle(&mut rng, &mut tour);
        pop.push(tour);
    }
    let mut lengths: Vec<f64> = pop.iter().map(|t| dist.tour_length(t)).collect();
    let initial_best = lengths.iter().copied().fold(f64::INFINITY, f64::min);

    let mut best_per_generation = Vec::with_capacity(ga.generations);
    let mut groups: Vec<usize> = (0..ga.population).collect();
    let mut next: Vec<Vec<usize>> = pop.clone();
    for _ in 0..ga.generations {
        shuffle(&mut rng, &mut groups);
        for (g, quad) in groups.chunks_exact(4).enumerate() {
            let winner = *quad
                .iter()
                .min_by(|&&a, &&b| lengths[a].total_cmp(&lengths[b]).then(a.cmp(&b)))
                .unwrap();
            let (i, j) = cut_points(&mut rng, n);
            let base = 4 * g;
            for k in 0..4 {
                next[base + k].clear();
                next[base + k].extend_from_slice(&pop[winner]);
            }
            if n >= 2 {
                next[base + 1][i..=j].reverse();
                next[base + 2].swap(i, j);
                next[base + 3][i..=j].rotate_left(1);
            }
        }
        core::mem::swap(&mut pop, &mut next);
        for (l, t) in lengths.iter_mut().zip(&pop) {
            *l = dist.tour_length(t);
        }
        best_per_generation.push(lengths.iter().copied().fold(f64::INFINITY, f64::min));
    }

    let best = (0..pop.len()).min_by(|&a, &b| lengths[a].total_cmp(&lengths[b]).then(a.cmp(&b))).unwrap();
    let order = pop[best].clone();
    let mut route = Vec::with_capacity(n + 1);
    route.push(start.clone());
    route.extend(order.iter().map(|&k| points[k].clone()));
    let itinerary = Itinerary::new(route, &ga.metric)?;
    Ok(TspSolution { itinerary, order, initial_best, best_per_generation })
}

fn cut_points(rng: &mut crate::rng::SearchRng, n: usize) -> (usize, usize) {
    if n < 2 {
        return (0, 0);
    }
    let i = below(rng, n);
    let mut j = below(rng, n - 1);
    if j >= i {
        j += 1;
    }
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Greedy tour from the start node, used to seed the population.
fn nearest_neighbour(dist: &DistanceTable, n: usize) -> Vec<usize> {
    let mut visited = alloc::vec![false; n];
    let mut tour = Vec::with_capacity(n);
    let mut at = None;
    for _ in 0..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (k, seen) in visited.iter().enumerate() {
            if !seen {
                let d = match at {
                    None => dist.from_start(k),
                    Some(a) => dist.between(a, k),
                };
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
        }
        visited[best] = true;
        tour.push(best);
        at = Some(best);
    }
    tour
}

struct DistanceTable {
    n: usize,
    start: Vec<f64>,
    pairs: Vec<f64>,
}

impl DistanceTable {
    fn new(start: &DVector<f64>, points: &[DVector<f64>], metric: &PathMetric) -> Self {
        let n = points.len();
        let start_d = points.iter().map(|p| metric.dist(start, p)).collect();
        let mut pairs = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let d = metric.dist(&points[i], &points[j]);
                pairs[i * n + j] = d;
                pairs[j * n + i] = d;
            }
        }
        Self { n, start: start_d, pairs }
    }

    fn from_start(&self, k: usize) -> f64 {
        self.start[k]
    }

    fn between(&self, a: usize, b: usize) -> f64 {
        self.pairs[a * self.n + b]
    }

    fn tour_length(&self, tour: &[usize]) -> f64 {
        let mut len = self.start[tour[0]];
        for w in tour.windows(2) {
            len += self.pairs[w[0] * self.n + w[1]];
        }
        len
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn collinear_points_are_visited_in_order() {
        let pts = vec![v(&[3.0, 0.0]), v(&[1.0, 0.0]), v(&[4.0, 0.0]), v(&[2.0, 0.0])];
        let it = solve_open_tsp(&pts, &v(&[0.0, 0.0]), &GaParams::for_points(4, 1)).unwrap();
        assert!((it.total_length() - 4.0).abs() < 1e-12);
        let xs: Vec<f64> = it.points().iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn single_point() {
        let it = solve_open_tsp(&[v(&[1.0, 1.0])], &v(&[0.0, 0.0]), &GaParams::for_points(1, 1)).unwrap();
        assert_eq!(it.points(), &[v(&[0.0, 0.0]), v(&[1.0, 1.0])]);
    }

    #[test]
    fn population_must_group_by_four() {
        let ga = GaParams { population: 10, ..GaParams::for_points(3, 0) };
        assert!(solve_open_tsp(&[v(&[1.0, 0.0])], &v(&[0.0, 0.0]), &ga).is_err());
        assert!(solve_open_tsp(&[], &v(&[0.0, 0.0]), &GaParams::for_points(3, 0)).is_err());
    }

    #[test]
    fn itinerary_length_matches_sum_of_legs() {
        let pts = crate::gaussian::Gaussian::standard(2).sample(40, 3);
        let it = solve_open_tsp(&pts, &v(&[0.0, 0.0]), &GaParams::for_points(40, 9)).unwrap();
        let sum: f64 = it.points().windows(2).map(|w| (&w[1] - &w[0]).norm()).sum();
        assert!((it.total_length() - sum).abs() < 1e-9);
    }
}
