//! Comparing an output clustering against ground truth: optimal cluster
//! matching, accuracy, misclassified volume and pair-counting indices.

use thiserror::Error;

use crate::clustering::Clustering;
use crate::graph::WeightedGraph;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("cluster counts differ: output k = {output}, truth k = {truth}")]
    KMismatch { output: usize, truth: usize },
    #[error("vertex counts differ: output n = {output}, truth n = {truth}")]
    LengthMismatch { output: usize, truth: usize },
    #[error("clusterings cover {labels} vertices but the graph has {n}")]
    GraphMismatch { labels: usize, n: usize },
}

/// Which correspondence between output and truth clusters to optimise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchObjective {
    /// Maximise the total matched overlap count (the accuracy matching).
    MaxOverlapCount,
    /// Minimise the total symmetric-difference volume.
    MinSymdiffVolume,
}

/// An optimal bijection between output and ground-truth clusters.
#[derive(Debug, Clone)]
pub struct MatchResult {
    /// `permutation[i]` is the truth cluster matched to output cluster `i`.
    pub permutation: Vec<usize>,
    /// Overlap counts: `confusion[i][j] = |A_i intersect S_j|`.
    pub confusion: Vec<Vec<usize>>,
    /// The optimised objective value (total overlap, or total
    /// symmetric-difference volume).
    pub objective_value: f64,
    pub objective: MatchObjective,
}

/// Exact optimal assignment between output and truth clusters.
///
/// Solved with an O(k^3) augmenting-path method; among all optimal
/// bijections the lexicographically smallest permutation is returned, which
/// pins down ties deterministically.
pub fn optimal_match(
    output: &Clustering,
    truth: &Clustering,
    graph: &WeightedGraph,
    objective: MatchObjective,
) -> Result<MatchResult, MetricsError> {
    check_pair(output, truth)?;
    if output.len() != graph.n() {
        return Err(MetricsError::GraphMismatch { labels: output.len(), n: graph.n() });
    }
    let k = output.k();
    let confusion = confusion_matrix(output, truth);
    let cost = match objective {
        MatchObjective::MaxOverlapCount => {
            // Maximisation as minimisation of the negated counts.
            (0..k)
                .map(|i| (0..k).map(|j| -(confusion[i][j] as f64)).collect())
                .collect::<Vec<Vec<f64>>>()
        }
        MatchObjective::MinSymdiffVolume => symdiff_volume_matrix(output, truth, graph),
    };
    let permutation = min_assignment_lexicographic(&cost);
    let objective_value = match objective {
        MatchObjective::MaxOverlapCount => (0..k)
            .map(|i| confusion[i][permutation[i]] as f64)
            .sum(),
        MatchObjective::MinSymdiffVolume => (0..k)
            .map(|i| cost[i][permutation[i]])
            .sum(),
    };
    Ok(MatchResult { permutation, confusion, objective_value, objective })
}

/// Fraction of correctly clustered vertices under the best overlap
/// matching.
#[derive(Debug, Clone, Copy)]
pub struct AccuracyReport {
    pub value: f64,
    /// The score's normalisation assumes equal-size ground-truth clusters;
    /// false flags inputs outside that setting.
    pub equal_size_ground_truth: bool,
}

pub fn accuracy(output: &Clustering, truth: &Clustering) -> Result<AccuracyReport, MetricsError> {
    check_pair(output, truth)?;
    let k = output.k();
    let confusion = confusion_matrix(output, truth);
    let cost: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| -(confusion[i][j] as f64)).collect())
        .collect();
    let permutation = min_assignment_lexicographic(&cost);
    let matched: usize = (0..k).map(|i| confusion[i][permutation[i]]).sum();
    let sizes = truth.cluster_sizes();
    Ok(AccuracyReport {
        value: matched as f64 / truth.len() as f64,
        equal_size_ground_truth: sizes.iter().all(|&s| s == sizes[0]),
    })
}

/// Total misclassified volume `sum_i vol(A_i symdiff S_{sigma(i)})` under
/// the volume-minimising matching.
pub fn symdiff_volume(
    output: &Clustering,
    truth: &Clustering,
    graph: &WeightedGraph,
) -> Result<f64, MetricsError> {
    let result = optimal_match(output, truth, graph, MatchObjective::MinSymdiffVolume)?;
    Ok(result.objective_value)
}

/// How the mutual information is normalised into the NMI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NmiNormalization {
    /// Arithmetic mean of the two entropies.
    #[default]
    ArithmeticMean,
    /// Maximum of the two entropies.
    Max,
}

#[derive(Debug, Clone, Copy)]
pub struct PairIndices {
    pub rand: f64,
    pub ari: f64,
    pub nmi: f64,
}

/// Rand index, adjusted Rand index (permutation-model correction) and
/// normalised mutual information. The clusterings may have different
/// cluster counts.
pub fn pair_indices(output: &Clustering, truth: &Clustering) -> Result<PairIndices, MetricsError> {
    pair_indices_with(output, truth, NmiNormalization::ArithmeticMean)
}

pub fn pair_indices_with(
    output: &Clustering,
    truth: &Clustering,
    normalization: NmiNormalization,
) -> Result<PairIndices, MetricsError> {
    if output.len() != truth.len() {
        return Err(MetricsError::LengthMismatch { output: output.len(), truth: truth.len() });
    }
    let n = output.len() as f64;
    let confusion = confusion_matrix(output, truth);
    let row_sums: Vec<usize> = confusion.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..truth.k())
        .map(|j| confusion.iter().map(|r| r[j]).sum())
        .collect();

    let comb2 = |x: usize| {
        let x = x as f64;
        x * (x - 1.0) / 2.0
    };
    let together_both: f64 = confusion.iter().flatten().map(|&c| comb2(c)).sum();
    let together_output: f64 = row_sums.iter().map(|&c| comb2(c)).sum();
    let together_truth: f64 = col_sums.iter().map(|&c| comb2(c)).sum();
    let total_pairs = comb2(output.len());

    let rand = if total_pairs == 0.0 {
        1.0
    } else {
        (total_pairs + 2.0 * together_both - together_output - together_truth) / total_pairs
    };

    let expected = if total_pairs == 0.0 {
        0.0
    } else {
        together_output * together_truth / total_pairs
    };
    let max_index = 0.5 * (together_output + together_truth);
    let ari = if (max_index - expected).abs() <= 1e-12 {
        // Degenerate normaliser (e.g. both trivial clusterings): identical
        // contingency means perfect agreement.
        if (together_both - expected).abs() <= 1e-12 {
            1.0
        } else {
            0.0
        }
    } else {
        (together_both - expected) / (max_index - expected)
    };

    let entropy = |sums: &[usize]| -> f64 {
        sums.iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let h_output = entropy(&row_sums);
    let h_truth = entropy(&col_sums);
    let mut mutual = 0.0;
    for (i, row) in confusion.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let p = c as f64 / n;
                mutual += p * (n * c as f64 / (row_sums[i] as f64 * col_sums[j] as f64)).ln();
            }
        }
    }
    let normalizer = match normalization {
        NmiNormalization::ArithmeticMean => 0.5 * (h_output + h_truth),
        NmiNormalization::Max => h_output.max(h_truth),
    };
    let nmi = if normalizer <= 1e-15 {
        // Both labellings carry no information; they agree trivially.
        1.0
    } else {
        (mutual / normalizer).clamp(0.0, 1.0)
    };

    Ok(PairIndices { rand, ari, nmi })
}

/// `confusion[i][j] = |A_i intersect S_j|` for output clusters `A` and
/// truth clusters `S`.
pub fn confusion_matrix(output: &Clustering, truth: &Clustering) -> Vec<Vec<usize>> {
    let mut confusion = vec![vec![0usize; truth.k()]; output.k()];
    for (u, &a) in output.labels().iter().enumerate() {
        confusion[a][truth.label(u)] += 1;
    }
    confusion
}

fn check_pair(output: &Clustering, truth: &Clustering) -> Result<(), MetricsError> {
    if output.len() != truth.len() {
        return Err(MetricsError::LengthMismatch { output: output.len(), truth: truth.len() });
    }
    if output.k() != truth.k() {
        return Err(MetricsError::KMismatch { output: output.k(), truth: truth.k() });
    }
    Ok(())
}

fn symdiff_volume_matrix(
    output: &Clustering,
    truth: &Clustering,
    graph: &WeightedGraph,
) -> Vec<Vec<f64>> {
    let (ko, kt) = (output.k(), truth.k());
    let mut vol_output = vec![0.0f64; ko];
    let mut vol_truth = vec![0.0f64; kt];
    let mut vol_common = vec![vec![0.0f64; kt]; ko];
    for u in 0..output.len() {
        let d = graph.degree(u);
        vol_output[output.label(u)] += d;
        vol_truth[truth.label(u)] += d;
        vol_common[output.label(u)][truth.label(u)] += d;
    }
    (0..ko)
        .map(|i| {
            (0..kt)
                .map(|j| vol_output[i] + vol_truth[j] - 2.0 * vol_common[i][j])
                .collect()
        })
        .collect()
}

/// Minimum-cost assignment on a square matrix via augmenting paths with
/// potentials (O(k^3)).
fn min_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays; row/column 0 is the virtual start.
    let mut potential_row = vec![0.0f64; n + 1];
    let mut potential_col = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - potential_row[i0] - potential_col[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    potential_row[matched_row[j]] += delta;
                    potential_col[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        // Unwind the alternating path.
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if matched_row[j] != 0 {
            assignment[matched_row[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Among all assignments within `tol` of the optimum, returns the
/// lexicographically smallest permutation by fixing rows in order.
fn min_assignment_lexicographic(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 1 {
        return vec![0];
    }
    let best = assignment_total(cost, &min_assignment(cost));
    let tol = 1e-9 * (1.0 + best.abs());
    let mut chosen = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut fixed_cost = 0.0;
    for row in 0..n {
        let free_cols: Vec<usize> = (0..n).filter(|&c| !used[c]).collect();
        for &candidate in &free_cols {
            // Cost of the optimal completion with `candidate` taken.
            let rest: Vec<usize> = free_cols.iter().copied().filter(|&c| c != candidate).collect();
            let completion = if rest.is_empty() {
                0.0
            } else {
                let sub: Vec<Vec<f64>> = (row + 1..n)
                    .map(|r| rest.iter().map(|&c| cost[r][c]).collect())
                    .collect();
                assignment_total(&sub, &min_assignment(&sub))
            };
            if fixed_cost + cost[row][candidate] + completion <= best + tol {
                chosen.push(candidate);
                used[candidate] = true;
                fixed_cost += cost[row][candidate];
                break;
            }
        }
        debug_assert_eq!(chosen.len(), row + 1, "a feasible candidate always exists");
    }
    chosen
}

fn assignment_total(cost: &[Vec<f64>], assignment: &[usize]) -> f64 {
    assignment.iter().enumerate().map(|(r, &c)| cost[r][c]).sum()
}
