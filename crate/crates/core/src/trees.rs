//! Spanning trees: exact counts, the spectral estimator
//! `T = (l_tot prod l_e) / (E V ell^(beta+1)) det'(R)`, edge-length windows,
//! and the measured breakdown of `round(T) == #trees`.

use num_bigint::{BigInt, BigUint};
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{make_metric, Family, Graph, MetricGraph};
use crate::logscalar::LogScalar;
use crate::spectral;

/// Largest edge count [`enumerate_spanning_trees`] accepts.
pub const ENUMERATION_CAP: usize = 24;

/// Determinant of a square integer matrix by fraction-free (Bareiss)
/// elimination. Every intermediate division is exact.
pub fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = t / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCount {
    pub count: BigUint,
    /// False when the graph is disconnected; `count` is then 0.
    pub connected: bool,
}

/// `det L[i]`, the Laplacian with row and column `i` removed.
pub fn kirchhoff_count_deleting(g: &Graph, i: usize) -> TreeCount {
    let l = g.laplacian_matrix();
    let n = g.num_vertices();
    let keep: Vec<usize> = (0..n).filter(|&k| k != i).collect();
    let minor: Vec<Vec<BigInt>> = keep
        .iter()
        .map(|&r| keep.iter().map(|&c| BigInt::from(l[(r, c)])).collect())
        .collect();
    let det = bareiss_determinant(minor);
    let connected = g.is_connected();
    TreeCount {
        count: if connected {
            det.to_biguint().unwrap_or_default()
        } else {
            BigUint::zero()
        },
        connected,
    }
}

/// Matrix-tree count with vertex 0 deleted.
pub fn kirchhoff_count(g: &Graph) -> TreeCount {
    kirchhoff_count_deleting(g, 0)
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Returns the root that was attached, for undo.
    fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        Some(rb)
    }

    fn undo(&mut self, child: usize) {
        let root = self.parent[child];
        self.size[root] -= self.size[child];
        self.parent[child] = child;
    }
}

/// Brute-force count of acyclic `(V-1)`-edge subsets, for `E <= 24`.
pub fn enumerate_spanning_trees(g: &Graph) -> Result<BigUint> {
    let e = g.num_edges();
    if e > ENUMERATION_CAP {
        return Err(Error::TooLarge(format!(
            "{e} edges exceeds the enumeration cap of {ENUMERATION_CAP}"
        )));
    }
    let need = g.num_vertices() - 1;
    fn go(edges: &[(usize, usize)], idx: usize, need: usize, uf: &mut UnionFind) -> u64 {
        if need == 0 {
            return 1;
        }
        if edges.len() - idx < need {
            return 0;
        }
        let (u, v) = edges[idx];
        let mut total = 0;
        if let Some(child) = uf.union(u, v) {
            total += go(edges, idx + 1, need - 1, uf);
            uf.undo(child);
        }
        total + go(edges, idx + 1, need, uf)
    }
    let mut uf = UnionFind::new(g.num_vertices());
    Ok(BigUint::from(go(g.edges(), 0, need, &mut uf)))
}

/// `T` with an explicit reference length.
pub fn tree_estimate_with_reference(mg: &MetricGraph, ell: f64) -> Result<f64> {
    let g = mg.graph();
    let rep = spectral::analyze(mg)?;
    let e = g.num_edges() as f64;
    let v = g.num_vertices() as f64;
    let beta1 = (g.betti() + 1) as f64;
    if g.num_vertices() > 20 {
        let ln = mg.total_length().ln() + mg.lengths().iter().map(|l| l.ln()).sum::<f64>()
            - e.ln()
            - v.ln()
            - beta1 * ell.ln()
            + rep.det_r.ln_abs;
        Ok(ln.exp())
    } else {
        let prod: f64 = mg.lengths().iter().product();
        Ok(mg.total_length() * prod / (e * v * ell.powf(beta1)) * rep.det_r.value)
    }
}

/// `T` using the baseline `ell` when recorded, else the mean edge length.
pub fn tree_estimate(mg: &MetricGraph) -> Result<f64> {
    tree_estimate_with_reference(mg, mg.reference_length())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rounded {
    pub value: BigUint,
    /// `T` sat exactly on a half-integer; `value` is then rounded up.
    pub ambiguous: bool,
}

/// Nearest integer, half-up.
pub fn round_estimate(t: f64) -> Rounded {
    let floor = t.floor();
    let ambiguous = t - floor == 0.5;
    let r = (t + 0.5).floor().max(0.0);
    Rounded {
        value: BigUint::from_f64(r).unwrap_or_default(),
        ambiguous,
    }
}

/// `ell / (V^V 2^(E+V) sqrt(2 E V))`, the sufficient window half-width from
/// the generic theorem.
pub fn theorem2_delta(g: &Graph, ell: f64) -> LogScalar {
    let v = g.num_vertices() as f64;
    let e = g.num_edges() as f64;
    LogScalar::from_ln(ell.ln() - v * v.ln() - (e + v) * std::f64::consts::LN_2 - 0.5 * (2.0 * e * v).ln())
}

/// Family heuristic window, in units of `ell`:
/// `n^(2-n)/(2E)` for `K_n`, `m^-n n^-m / 2` for `K_{m,n}` (which is
/// `n^-2n / 2` on `K_{n,n}`), and `(2p)^-n (1 + 1/(2p))^-1` for `C_n(a)`.
pub fn heuristic_delta(g: &Graph) -> Result<LogScalar> {
    let ln = match g.family() {
        Family::Complete(n) => {
            let nf = *n as f64;
            (2.0 - nf) * nf.ln() - (nf * (nf - 1.0)).ln()
        }
        Family::CompleteBipartite(m, n) => {
            let (mf, nf) = (*m as f64, *n as f64);
            -nf * mf.ln() - mf * nf.ln() - std::f64::consts::LN_2
        }
        Family::Circulant(n, a) => {
            let two_p = 2.0 * a.len() as f64;
            -(*n as f64) * two_p.ln() - (1.0 + 1.0 / two_p).ln()
        }
        Family::Custom => return Err(Error::UnsupportedFamily("no heuristic window for custom graphs".into())),
    };
    Ok(LogScalar::from_ln(ln))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    /// `sum_e |1/E - l_e / l_tot|`.
    pub dispersion: f64,
    /// `V^-V`.
    pub threshold: LogScalar,
    pub satisfied: bool,
}

pub fn dispersion_criterion(mg: &MetricGraph) -> Dispersion {
    let e = mg.graph().num_edges() as f64;
    let total = mg.total_length();
    let dispersion = mg.lengths().iter().map(|l| (1.0 / e - l / total).abs()).sum::<f64>();
    let v = mg.graph().num_vertices() as f64;
    let threshold = LogScalar::from_ln(-v * v.ln());
    Dispersion {
        dispersion,
        threshold,
        satisfied: dispersion.ln() < threshold.ln(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown {
    /// Smallest deviating perturbation found, or `ell` when none was.
    pub epsilon: f64,
    pub found: bool,
    /// First grid point that deviated, before bisection.
    pub grid_bracket: (f64, f64),
}

const GRID_START: f64 = 1e-6;
const GRID_FACTOR: f64 = 1.5;
const BISECT_REL_WIDTH: f64 = 1e-3;

/// Smallest `eps > 0` at which `round(T)` with edge `edge` at `ell + eps`
/// stops matching the exact tree count: a geometric scan from `1e-6 ell` to
/// `ell` brackets the first deviation, then bisection narrows the bracket to
/// relative width `1e-3`.
pub fn breakdown_epsilon(g: &Graph, edge: usize, ell: f64) -> Result<Breakdown> {
    let exact = kirchhoff_count(g);
    if !exact.connected {
        return Err(Error::DisconnectedGraph("breakdown needs a connected graph".into()));
    }
    let deviates = |eps: f64| -> Result<bool> {
        let mg = make_metric(g, ell, Some((edge, eps)))?;
        Ok(round_estimate(tree_estimate(&mg)?).value != exact.count)
    };

    let mut grid = Vec::new();
    let mut eps = GRID_START * ell;
    while eps < ell {
        grid.push(eps);
        eps *= GRID_FACTOR;
    }
    grid.push(ell);
    let flags: Vec<bool> = grid.par_iter().map(|&e| deviates(e)).collect::<Result<_>>()?;

    let Some(first) = flags.iter().position(|&f| f) else {
        return Ok(Breakdown {
            epsilon: ell,
            found: false,
            grid_bracket: (ell, ell),
        });
    };
    let (mut lo, mut hi) = (if first == 0 { 0.0 } else { grid[first - 1] }, grid[first]);
    let bracket = (lo, hi);
    while hi - lo > BISECT_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if deviates(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Breakdown {
        epsilon: hi,
        found: true,
        grid_bracket: bracket,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeReport {
    pub exact_count: BigUint,
    pub estimate: f64,
    pub rounded: BigUint,
    pub ambiguous_rounding: bool,
    pub reference_length: f64,
    pub theorem2_delta: LogScalar,
    /// Absolute (already multiplied by the reference length).
    pub heuristic_delta: Option<LogScalar>,
    pub dispersion: Dispersion,
    pub breakdown: Option<Breakdown>,
}

/// Full report. `breakdown_edge` triggers the breakdown scan on that edge
/// around the reference length.
pub fn tree_report(mg: &MetricGraph, breakdown_edge: Option<usize>) -> Result<TreeReport> {
    let g = mg.graph();
    let exact = kirchhoff_count(g);
    if !exact.connected {
        return Err(Error::DisconnectedGraph("tree report needs a connected graph".into()));
    }
    let ell = mg.reference_length();
    let estimate = tree_estimate(mg)?;
    let rounded = round_estimate(estimate);
    let breakdown = breakdown_edge.map(|e| breakdown_epsilon(g, e, ell)).transpose()?;
    Ok(TreeReport {
        exact_count: exact.count,
        estimate,
        rounded: rounded.value,
        ambiguous_rounding: rounded.ambiguous,
        reference_length: ell,
        theorem2_delta: theorem2_delta(g, ell),
        heuristic_delta: heuristic_delta(g).ok().map(|d| d.scale(ell)),
        dispersion: dispersion_criterion(mg),
        breakdown,
    })
}

/// Relative error `|T - count| / count`.
pub fn relative_error(estimate: f64, count: &BigUint) -> f64 {
    let c = count.to_f64().unwrap_or(f64::INFINITY);
    (estimate - c).abs() / c
}
