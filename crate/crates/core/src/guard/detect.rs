//! Row verification and error localisation.

use serde::Serialize;

use super::bounds::Extended;
use super::Guard;
use crate::error::{Error, Result};
use crate::exactmat::IntMatrix;

/// Relative tolerance used when the coding matrix has negative entries and
/// the exact relations are unavailable.
pub const FALLBACK_TOL: f64 = 0.05;

/// Consecutive-pair check of one row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowVerification {
    pub row: usize,
    pub ok: bool,
    /// Column pairs `(j, j + 1)` whose ratio falls outside its bounds.
    pub violations: Vec<(usize, usize)>,
}

/// Evidence for one column pair of a row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairEvidence {
    pub cols: (usize, usize),
    /// `c_ij / c_ij'` as a float; infinite for a zero denominator.
    pub ratio: f64,
    /// `tau^(j' - j)`, when `tau` is known.
    pub expected: Option<f64>,
    /// `|ratio / expected - 1|`.
    pub deviation: Option<f64>,
    pub within_bounds: bool,
    pub consistent: bool,
}

/// Trusted and flagged columns of one row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowDiagnosis {
    pub row: usize,
    pub trusted: Vec<usize>,
    pub flagged: Vec<usize>,
    pub evidence: Vec<PairEvidence>,
}

impl RowDiagnosis {
    pub fn is_clean(&self) -> bool {
        self.flagged.is_empty()
    }

    /// Diagnosis with a known trusted set, for errors whose location is
    /// reported by other means.
    pub fn with_trusted(row: usize, k: usize, trusted: &[usize]) -> Self {
        let mut t: Vec<usize> = trusted.iter().copied().filter(|&c| c < k).collect();
        t.sort_unstable();
        t.dedup();
        let flagged = (0..k).filter(|c| !t.contains(c)).collect();
        Self { row, trusted: t, flagged, evidence: Vec::new() }
    }
}

impl Guard {
    fn pair_ratio(c: &IntMatrix, row: usize, j: usize, jp: usize) -> Option<Extended> {
        Extended::ratio(c.get(row, j), c.get(row, jp))
    }

    /// Checks every consecutive column pair of every row against the exact
    /// bounds.
    pub fn verify(&self, c: &IntMatrix) -> Vec<RowVerification> {
        let k = self.order();
        (0..c.dim())
            .map(|row| {
                let violations: Vec<(usize, usize)> = (0..k.saturating_sub(1))
                    .filter(|&j| match Self::pair_ratio(c, row, j, j + 1) {
                        Some(r) => !self.bounds(j, j + 1).contains(&r),
                        None => false,
                    })
                    .map(|j| (j, j + 1))
                    .collect();
                RowVerification { row, ok: violations.is_empty(), violations }
            })
            .collect()
    }

    fn evidence(&self, c: &IntMatrix, row: usize, j: usize, jp: usize, tol: Option<f64>) -> PairEvidence {
        let exact = Self::pair_ratio(c, row, j, jp);
        let ratio = exact.as_ref().map_or(1.0, Extended::to_f64);
        let expected = self.tau().map(|t| t.powi(jp as i64 - j as i64).to_f64());
        let deviation = match (&exact, expected) {
            (None, Some(_)) => Some(0.0),
            (Some(_), Some(e)) => Some((ratio / e - 1.0).abs()),
            _ => None,
        };
        let within_bounds = exact.as_ref().is_none_or(|r| self.bounds(j, jp).contains(r));
        let consistent = if self.relations_apply() {
            within_bounds && tol.is_none_or(|t| deviation.is_none_or(|d| d <= t))
        } else {
            deviation.is_some_and(|d| d <= tol.unwrap_or(FALLBACK_TOL))
        };
        PairEvidence { cols: (j, jp), ratio, expected, deviation, within_bounds, consistent }
    }

    /// Localises corrupted entries in each row of a block.
    ///
    /// Two entries are consistent when their ratio satisfies the exact
    /// checking bounds and, if `tol` is given, lies within relative distance
    /// `tol` of the `tau`-power estimate. The trusted set is a largest set of
    /// pairwise consistent columns with at least two members; ties go to the
    /// smaller total deviation and then to the leftmost set.
    pub fn detect(&self, c: &IntMatrix, tol: Option<f64>) -> Result<Vec<RowDiagnosis>> {
        let k = self.order();
        if c.dim() != k {
            return Err(Error::DimensionMismatch { expected: k, found: c.dim() });
        }
        if !self.relations_apply() && self.tau().is_none() {
            return Err(Error::NonPositiveCodingMatrix);
        }
        Ok((0..k).map(|row| self.detect_row(c, row, tol)).collect())
    }

    fn detect_row(&self, c: &IntMatrix, row: usize, tol: Option<f64>) -> RowDiagnosis {
        let k = self.order();
        let mut evidence = Vec::new();
        let mut adj = vec![vec![false; k]; k];
        let mut dev = vec![vec![0.0; k]; k];
        for j in 0..k {
            for jp in j + 1..k {
                let e = self.evidence(c, row, j, jp, tol);
                adj[j][jp] = e.consistent;
                adj[jp][j] = e.consistent;
                let d = e.deviation.unwrap_or(0.0);
                dev[j][jp] = d;
                dev[jp][j] = d;
                evidence.push(e);
            }
        }
        let mut best: Option<(Vec<usize>, f64)> = None;
        for clique in maximal_cliques(&adj) {
            if clique.len() < 2 {
                continue;
            }
            let score: f64 =
                clique.iter().enumerate().flat_map(|(a, &x)| clique[a + 1..].iter().map(move |&y| (x, y))).map(|(x, y)| dev[x][y]).sum();
            let better = match &best {
                None => true,
                Some((b, s)) => {
                    clique.len() > b.len()
                        || (clique.len() == b.len() && (score < *s || (score == *s && clique < *b)))
                }
            };
            if better {
                best = Some((clique, score));
            }
        }
        let trusted = best.map(|(c, _)| c).unwrap_or_default();
        let flagged = (0..k).filter(|c| !trusted.contains(c)).collect();
        RowDiagnosis { row, trusted, flagged, evidence }
    }

    /// Detection on every block; blocks are independent.
    pub fn detect_blocks(&self, blocks: &[IntMatrix], tol: Option<f64>) -> Result<Vec<Vec<RowDiagnosis>>> {
        blocks.iter().map(|c| self.detect(c, tol)).collect()
    }
}

/// All maximal cliques (Bron-Kerbosch with pivoting), each sorted.
fn maximal_cliques(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    fn bk(adj: &[Vec<bool>], r: &mut Vec<usize>, p: Vec<usize>, mut x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() && x.is_empty() {
            let mut c = r.clone();
            c.sort_unstable();
            out.push(c);
            return;
        }
        let pivot = *p.iter().chain(x.iter()).max_by_key(|&&u| p.iter().filter(|&&v| adj[u][v]).count()).expect("non-empty");
        let mut p = p;
        let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
        for v in candidates {
            r.push(v);
            let np = p.iter().copied().filter(|&u| adj[v][u]).collect();
            let nx = x.iter().copied().filter(|&u| adj[v][u]).collect();
            bk(adj, r, np, nx, out);
            r.pop();
            p.retain(|&u| u != v);
            x.push(v);
        }
    }
    let mut out = Vec::new();
    bk(adj, &mut Vec::new(), (0..adj.len()).collect(), Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::CodingKey;
    use crate::recurrence::Recurrence;
    use crate::spectral::Precision;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64(rows).unwrap()
    }

    #[test]
    fn cliques_of_small_graphs() {
        let t = true;
        let f = false;
        let adj = vec![vec![f, t, f, t], vec![t, f, f, t], vec![f, f, f, t], vec![t, t, t, f]];
        let mut got = maximal_cliques(&adj);
        got.sort();
        assert_eq!(got, vec![vec![0, 1, 3], vec![2, 3]]);
    }

    #[test]
    fn single_error_flagged() {
        let key = CodingKey::standard(Recurrence::p_fibonacci(2), 15);
        let g = Guard::new(&key, &Precision::default()).unwrap();
        let c = m(&[vec![60861, 41528, 28373], vec![68585, 46798, 31933], vec![68601, 46809, 31940]]);
        let v = g.verify(&c);
        assert!(!v[0].ok && v[1].ok && v[2].ok);
        let d = g.detect(&c, None).unwrap();
        assert_eq!(d[0].trusted, vec![0, 1]);
        assert_eq!(d[0].flagged, vec![2]);
        assert!(d[1].is_clean() && d[2].is_clean());
    }

    #[test]
    fn double_error_tetranacci() {
        let key = CodingKey::standard(Recurrence::tetranacci(), 5);
        let g = Guard::new(&key, &Precision::default()).unwrap();
        assert_eq!(g.matrix(), &m(&[vec![108, 56, 29, 15], vec![56, 29, 15, 8], vec![29, 15, 8, 4], vec![15, 8, 4, 2]]));
        let c = m(&[
            vec![16460, 8332, 4123, 2239],
            vec![14955, 7767, 4025, 2087],
            vec![16387, 8510, 4413, 2282],
            vec![15969, 8292, 4297, 2226],
        ]);
        let d = g.detect(&c, None).unwrap();
        assert_eq!(d[0].trusted, vec![1, 3]);
        assert_eq!(d[0].flagged, vec![0, 2]);
        assert!(d[1..].iter().all(RowDiagnosis::is_clean));
    }

    #[test]
    fn zero_rows_are_clean() {
        let key = CodingKey::standard(Recurrence::tribonacci(), 9);
        let g = Guard::new(&key, &Precision::default()).unwrap();
        let d = g.detect(&IntMatrix::zeros(3), None).unwrap();
        assert!(d.iter().all(RowDiagnosis::is_clean));
    }
}
