//! Lanczos iteration with full reorthogonalization and deflation.
//!
//! Each restart cycle builds a Krylov basis orthogonal to all locked
//! (converged) eigenvectors, extracts Ritz pairs from the tridiagonal
//! projection, and locks converged pairs from the bottom of the Ritz
//! spectrum. A single Krylov space sees at most one copy of each degenerate
//! eigenvalue, so after the requested count is locked a verification phase
//! probes the deflated operator with fresh random starts and keeps locking
//! until the smallest remaining eigenvalue provably sits above the returned
//! ones.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::{fix_sign, EigenError, EigenOptions, EigenPairs, SymmetricOp};
use crate::rng::rng_for;

const BREAKDOWN_EPS: f64 = 1e-13;

struct Solver<'a> {
    op: &'a dyn SymmetricOp,
    n: usize,
    tol: f64,
    rng: ChaCha20Rng,
    locked_values: Vec<f64>,
    locked_vectors: Vec<Vec<f64>>,
    spectral_scale: f64,
    cycles: usize,
    max_cycles: usize,
    last_residual: f64,
}

/// The bottom candidate of one restart cycle, after deflation cleanup.
struct BottomCandidate {
    value: f64,
    vector: Vec<f64>,
    converged: bool,
}

pub(super) fn lanczos_bottom(
    op: &dyn SymmetricOp,
    l: usize,
    opts: &EigenOptions,
    seed: u64,
) -> Result<EigenPairs, EigenError> {
    let n = op.dim();
    let target = (l + 1).min(n);
    let mut solver = Solver {
        op,
        n,
        tol: opts.tol,
        rng: rng_for(seed, &[0x6c61_6e63]),
        locked_values: Vec::new(),
        locked_vectors: Vec::new(),
        spectral_scale: 1.0,
        cycles: 0,
        max_cycles: opts.max_cycles_per_pair.saturating_mul(l).max(10),
        last_residual: f64::INFINITY,
    };

    // Phase 1: lock pairs from the bottom until the target count is
    // reached.
    let mut restart: Option<Vec<f64>> = None;
    while solver.locked_values.len() < target {
        let outcome = solver.cycle(restart.take(), target)?;
        restart = outcome.and_then(|c| (!c.converged).then_some(c.vector));
    }

    // Phase 2: verify no smaller eigenvalue is hiding in the deflated
    // spectrum (a fresh start reaches eigenspace copies the earlier Krylov
    // spaces could not see). Keep locking until the smallest remaining
    // converged value clears the l-th smallest locked value.
    while solver.locked_vectors.len() < n {
        let cutoff = solver.kth_smallest(l - 1);
        let tol_abs = solver.tol_abs();
        let mut probe_start: Option<Vec<f64>> = None;
        let candidate = loop {
            match solver.cycle(probe_start.take(), 0)? {
                Some(c) if c.converged => break c,
                Some(c) => probe_start = Some(c.vector),
                // Deflated space exhausted by breakdown; nothing remains.
                None => break BottomCandidate { value: f64::INFINITY, vector: Vec::new(), converged: true },
            }
        };
        if candidate.converged && candidate.value < cutoff - 10.0 * tol_abs {
            solver.locked_values.push(candidate.value);
            solver.locked_vectors.push(candidate.vector);
        } else {
            break;
        }
    }

    Ok(solver.finish(l))
}

impl Solver<'_> {
    fn tol_abs(&self) -> f64 {
        self.tol * self.spectral_scale.max(1.0)
    }

    fn kth_smallest(&self, k: usize) -> f64 {
        let mut values = self.locked_values.clone();
        values.sort_by(f64::total_cmp);
        values[k]
    }

    /// One restart cycle: build a deflated Krylov basis, extract Ritz
    /// pairs, lock converged candidates from the bottom while fewer than
    /// `lock_until` pairs are locked, and return the bottom unlocked
    /// candidate (converged or not). `None` means the cycle broke down
    /// before producing any candidate.
    fn cycle(
        &mut self,
        start: Option<Vec<f64>>,
        lock_until: usize,
    ) -> Result<Option<BottomCandidate>, EigenError> {
        if self.cycles >= self.max_cycles {
            return Err(EigenError::NoConvergence {
                cycles: self.cycles,
                worst_residual: self.last_residual,
            });
        }
        self.cycles += 1;

        let available = self.n - self.locked_vectors.len();
        let remaining = lock_until.saturating_sub(self.locked_values.len()).max(1);
        let m = available.min((3 * remaining + 24).max(48));

        let mut v = start.unwrap_or_else(|| random_vector(&mut self.rng, self.n));
        project_out(&mut v, &self.locked_vectors, &[]);
        if norm(&v) < 1e-8 {
            v = random_vector(&mut self.rng, self.n);
            project_out(&mut v, &self.locked_vectors, &[]);
        }
        let vn = norm(&v);
        if vn < 1e-12 {
            return Ok(None);
        }
        scale(&mut v, 1.0 / vn);

        let mut basis: Vec<Vec<f64>> = vec![v];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![0.0; self.n];
        for j in 0..m {
            self.op.apply(&basis[j], &mut w);
            let alpha = dot(&w, &basis[j]);
            alphas.push(alpha);
            axpy(&mut w, -alpha, &basis[j]);
            if j > 0 {
                let beta_prev = betas[j - 1];
                axpy(&mut w, -beta_prev, &basis[j - 1]);
            }
            // Full reorthogonalization, two passes.
            project_out(&mut w, &self.locked_vectors, &basis);
            project_out(&mut w, &self.locked_vectors, &basis);
            let beta = norm(&w);
            if j + 1 == m || beta <= BREAKDOWN_EPS * self.spectral_scale.max(1.0) {
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|x| x / beta).collect());
        }

        let mdim = alphas.len();
        let mut tri = DMatrix::<f64>::zeros(mdim, mdim);
        for i in 0..mdim {
            tri[(i, i)] = alphas[i];
            if i + 1 < mdim {
                tri[(i, i + 1)] = betas[i];
                tri[(i + 1, i)] = betas[i];
            }
        }
        let decomp = tri.symmetric_eigen();
        let mut order: Vec<usize> = (0..mdim).collect();
        order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));
        if let Some(&top) = order.last() {
            self.spectral_scale = self.spectral_scale.max(decomp.eigenvalues[top].abs());
        }
        let tol_abs = self.tol_abs();

        for &idx in &order {
            let coeffs = decomp.eigenvectors.column(idx);
            let mut y = vec![0.0; self.n];
            for (j, basis_vec) in basis.iter().enumerate() {
                axpy(&mut y, coeffs[j], basis_vec);
            }
            project_out(&mut y, &self.locked_vectors, &[]);
            let yn = norm(&y);
            if yn < 1e-8 {
                continue;
            }
            scale(&mut y, 1.0 / yn);
            let (theta, residual) = rayleigh_residual(self.op, &y);
            let converged = residual <= tol_abs;
            if converged && self.locked_values.len() < lock_until {
                self.locked_values.push(theta);
                self.locked_vectors.push(y);
                continue;
            }
            if !converged {
                self.last_residual = residual;
            }
            return Ok(Some(BottomCandidate { value: theta, vector: y, converged }));
        }
        Ok(None)
    }

    /// Selects the `l` smallest locked pairs and polishes them:
    /// re-orthonormalise, refresh Rayleigh quotients and residuals, fix
    /// signs, sort ascending.
    fn finish(self, l: usize) -> EigenPairs {
        let mut order: Vec<usize> = (0..self.locked_values.len()).collect();
        order.sort_by(|&a, &b| self.locked_values[a].total_cmp(&self.locked_values[b]));
        let mut values = Vec::with_capacity(l);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(l);
        let mut residuals = Vec::with_capacity(l);
        for &idx in order.iter().take(l) {
            let mut y = self.locked_vectors[idx].clone();
            project_out(&mut y, &vectors, &[]);
            let yn = norm(&y);
            scale(&mut y, 1.0 / yn);
            fix_sign(&mut y);
            let (theta, residual) = rayleigh_residual(self.op, &y);
            values.push(theta);
            vectors.push(y);
            residuals.push(residual);
        }
        // Polishing can reorder near-degenerate values at round-off scale.
        let mut final_order: Vec<usize> = (0..values.len()).collect();
        final_order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        EigenPairs {
            values: final_order.iter().map(|&i| values[i]).collect(),
            vectors: final_order.iter().map(|&i| vectors[i].clone()).collect(),
            residuals: final_order.iter().map(|&i| residuals[i]).collect(),
        }
    }
}

fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &mut [f64], s: f64) {
    for x in a.iter_mut() {
        *x *= s;
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Removes the components of `w` along every vector in both collections.
fn project_out(w: &mut [f64], set_a: &[Vec<f64>], set_b: &[Vec<f64>]) {
    for basis_vec in set_a.iter().chain(set_b) {
        let c = dot(w, basis_vec);
        axpy(w, -c, basis_vec);
    }
}

/// Rayleigh quotient and residual norm for a unit vector.
fn rayleigh_residual(op: &dyn SymmetricOp, y: &[f64]) -> (f64, f64) {
    let mut image = vec![0.0; y.len()];
    op.apply(y, &mut image);
    let theta = dot(y, &image);
    let mut res_sq = 0.0;
    for (ai, yi) in image.iter().zip(y) {
        let r = ai - theta * yi;
        res_sq += r * r;
    }
    (theta, res_sq.sqrt())
}
