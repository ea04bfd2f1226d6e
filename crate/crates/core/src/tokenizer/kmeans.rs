//! Weighted k-means over de-duplicated feature vectors.
//!
//! Patch features repeat heavily (empty and full patches dominate), so each
//! distinct vector is stored once with its multiplicity. Assignment uses
//! Hamerly's bounds to skip distance scans that cannot change the result.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::codebook::{Codebook, CodebookKind};
use super::{sq_dist, FeatureGrid, TokenizerError};
use crate::scalar::Scalar;

/// Distinct feature vectors with multiplicities.
#[derive(Debug, Clone, Default)]
pub struct FeatureCorpus<T> {
    dim: usize,
    points: Vec<T>,
    weights: Vec<f64>,
    lookup: HashMap<Vec<u64>, usize>,
}

impl<T: Scalar> FeatureCorpus<T> {
    pub fn new(dim: usize) -> Self {
        Self { dim, points: Vec::new(), weights: Vec::new(), lookup: HashMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct vectors.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Total number of vectors pushed.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Adds one vector and returns its distinct id.
    pub fn push(&mut self, f: &[T]) -> Result<usize, TokenizerError> {
        if f.len() != self.dim {
            return Err(TokenizerError::DimensionMismatch { expected: self.dim, got: f.len() });
        }
        let key: Vec<u64> = f.iter().map(|v| v.as_f64().to_bits()).collect();
        let id = *self.lookup.entry(key).or_insert_with(|| {
            self.points.extend_from_slice(f);
            self.weights.push(0.0);
            self.weights.len() - 1
        });
        self.weights[id] += 1.0;
        Ok(id)
    }

    /// Adds every cell of `grid`, returning the distinct id of each cell.
    pub fn push_grid(&mut self, grid: &FeatureGrid<T>) -> Result<Vec<usize>, TokenizerError> {
        grid.cells().map(|c| self.push(c)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansReport<T> {
    pub codebook: Codebook<T>,
    /// Weighted sum of squared distances after each update step.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Code index of every distinct corpus vector.
    pub assignment: Vec<usize>,
}

/// Trains a `k`-code book over every cell of `grids`.
pub fn train_codebook<T: Scalar>(
    grids: &[FeatureGrid<T>],
    kind: CodebookKind,
    k: usize,
    seed: u64,
) -> Result<Codebook<T>, TokenizerError> {
    let dim = grids.first().map_or(0, |g| g.dim());
    let mut corpus = FeatureCorpus::new(dim);
    for g in grids {
        corpus.push_grid(g)?;
    }
    Ok(train_codebook_on(&corpus, kind, k, seed, &KMeansOptions::default())?.codebook)
}

struct State<'a, T> {
    corpus: &'a FeatureCorpus<T>,
    k: usize,
    centers: Vec<T>,
    assign: Vec<usize>,
    upper: Vec<T>,
    lower: Vec<T>,
}

impl<T: Scalar> State<'_, T> {
    fn center(&self, j: usize) -> &[T] {
        let d = self.corpus.dim;
        &self.centers[j * d..(j + 1) * d]
    }

    fn dist(&self, i: usize, j: usize) -> T {
        sq_dist(self.corpus.point(i), self.center(j)).sqrt()
    }

    fn assign_step(&mut self) {
        let mut half_gap = vec![T::infinity(); self.k];
        for a in 0..self.k {
            for b in a + 1..self.k {
                let g = sq_dist(self.center(a), self.center(b)).sqrt() * T::lit(0.5);
                half_gap[a] = half_gap[a].min(g);
                half_gap[b] = half_gap[b].min(g);
            }
        }
        for i in 0..self.corpus.len() {
            let m = half_gap[self.assign[i]].max(self.lower[i]);
            if self.upper[i] < m {
                continue;
            }
            self.upper[i] = self.dist(i, self.assign[i]);
            if self.upper[i] < m {
                continue;
            }
            let (mut best, mut d1, mut d2) = (0, T::infinity(), T::infinity());
            for j in 0..self.k {
                let d = sq_dist(self.corpus.point(i), self.center(j));
                if d < d1 {
                    d2 = d1;
                    d1 = d;
                    best = j;
                } else if d < d2 {
                    d2 = d;
                }
            }
            self.assign[i] = best;
            self.upper[i] = d1.sqrt();
            self.lower[i] = d2.sqrt();
        }
    }

    /// Moves every empty center onto the point farthest from its own center.
    /// Returns whether anything moved.
    fn reseed_empty(&mut self) -> bool {
        let mut counts = vec![0usize; self.k];
        for &a in &self.assign {
            counts[a] += 1;
        }
        if counts.iter().all(|&c| c > 0) {
            return false;
        }
        for i in 0..self.corpus.len() {
            self.upper[i] = self.dist(i, self.assign[i]);
        }
        let dim = self.corpus.dim;
        for j in 0..self.k {
            if counts[j] > 0 {
                continue;
            }
            let far = (0..self.corpus.len()).fold(0, |b, i| if self.upper[i] > self.upper[b] { i } else { b });
            counts[self.assign[far]] -= 1;
            counts[j] = 1;
            self.assign[far] = j;
            self.upper[far] = T::zero();
            self.lower[far] = T::zero();
            self.centers[j * dim..(j + 1) * dim].copy_from_slice(self.corpus.point(far));
        }
        // other points' bounds on their second-nearest center are now stale
        self.lower.iter_mut().for_each(|l| *l = T::zero());
        true
    }

    /// Moves centers to weighted means; returns the largest shift.
    fn update_step(&mut self) -> f64 {
        let dim = self.corpus.dim;
        let mut sums = vec![0.0f64; self.k * dim];
        let mut mass = vec![0.0f64; self.k];
        for i in 0..self.corpus.len() {
            let (a, w) = (self.assign[i], self.corpus.weight(i));
            mass[a] += w;
            for (s, v) in sums[a * dim..(a + 1) * dim].iter_mut().zip(self.corpus.point(i)) {
                *s += w * v.as_f64();
            }
        }
        let mut shifts = vec![T::zero(); self.k];
        for j in 0..self.k {
            let new: Vec<T> = sums[j * dim..(j + 1) * dim].iter().map(|s| T::lit(s / mass[j])).collect();
            shifts[j] = sq_dist(self.center(j), &new).sqrt();
            self.centers[j * dim..(j + 1) * dim].copy_from_slice(&new);
        }
        let max_shift = shifts.iter().copied().fold(T::zero(), T::max);
        for i in 0..self.corpus.len() {
            self.upper[i] = self.dist(i, self.assign[i]);
            self.lower[i] -= max_shift;
        }
        max_shift.as_f64()
    }

    fn objective(&self) -> f64 {
        (0..self.corpus.len())
            .map(|i| self.corpus.weight(i) * sq_dist(self.corpus.point(i), self.center(self.assign[i])).as_f64())
            .sum()
    }
}

fn plus_plus_seed<T: Scalar>(corpus: &FeatureCorpus<T>, k: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = corpus.len();
    let pick = |rng: &mut ChaCha8Rng, mass: &[f64]| {
        let total: f64 = mass.iter().sum();
        let r = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &m) in mass.iter().enumerate() {
            if m <= 0.0 {
                continue;
            }
            acc += m;
            last = i;
            if acc > r {
                return i;
            }
        }
        last
    };
    let mut centers = Vec::with_capacity(k * corpus.dim());
    let first = pick(&mut rng, &corpus.weights);
    centers.extend_from_slice(corpus.point(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(corpus.point(i), corpus.point(first)).as_f64()).collect();
    for _ in 1..k {
        let mass: Vec<f64> = nearest.iter().zip(&corpus.weights).map(|(d, w)| d * w).collect();
        let c = pick(&mut rng, &mass);
        centers.extend_from_slice(corpus.point(c));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(corpus.point(i), corpus.point(c)).as_f64());
        }
    }
    centers
}

/// k-means++ seeding followed by Lloyd iterations. Needs at least `k`
/// distinct vectors.
pub fn train_codebook_on<T: Scalar>(
    corpus: &FeatureCorpus<T>,
    kind: CodebookKind,
    k: usize,
    seed: u64,
    opts: &KMeansOptions,
) -> Result<KMeansReport<T>, TokenizerError> {
    if k == 0 || corpus.len() < k {
        return Err(TokenizerError::TooFewSamples { distinct: corpus.len(), k });
    }
    let n = corpus.len();
    let mut st = State {
        corpus,
        k,
        centers: plus_plus_seed(corpus, k, seed),
        assign: vec![0; n],
        upper: vec![T::infinity(); n],
        lower: vec![T::zero(); n],
    };
    let mut objective = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        st.assign_step();
        let moved = st.reseed_empty();
        if moved && (converged || iterations == opts.max_iter) {
            objective.push(st.objective());
        }
        if converged || iterations == opts.max_iter {
            break;
        }
        let shift = st.update_step();
        iterations += 1;
        objective.push(st.objective());
        converged = shift < opts.tol && !moved;
    }
    let codebook = Codebook::new(kind, corpus.dim(), st.centers)?;
    Ok(KMeansReport { codebook, objective, iterations, converged, assignment: st.assign })
}
