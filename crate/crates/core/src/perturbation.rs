//! First-order perturbation of `R` when one edge of an equilateral graph
//! changes length from `ell` to `ell + eps`.
//!
//! To first order `R' = R - (eps / ell^2) Q`, where `Q` is the rank-one
//! Laplacian of the perturbed edge. Simple eigenvalues move by
//! `-(eps / ell^2) v.Qv`; a degenerate eigenvalue splits according to the
//! eigenvalues of `Q` compressed onto its eigenspace.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{make_metric, Graph, MetricGraph};
use crate::spectral::{self, Spectrum, EIGEN_TOL};

/// Eigenvalues closer than this fraction of `lambda_max` share an eigenspace.
pub const CLUSTER_REL_TOL: f64 = 1e-6;
const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePerturbation {
    pub edge: usize,
    pub epsilon: f64,
    pub ell: f64,
}

impl EdgePerturbation {
    pub fn new(edge: usize, epsilon: f64, ell: f64) -> Result<Self> {
        if !(ell > 0.0) || !(ell + epsilon > 0.0) {
            return Err(Error::InvalidLength(format!(
                "need ell > 0 and ell + eps > 0, got ell={ell}, eps={epsilon}"
            )));
        }
        Ok(EdgePerturbation { edge, epsilon, ell })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationResult {
    /// Ascending.
    pub first_order_eigenvalues: Vec<f64>,
    /// Product of the non-zero first-order eigenvalues, i.e. `det'(R')` to first order.
    pub first_order_det: f64,
    /// `det'(R')` from the eigensolver at the actual `ell + eps`.
    pub exact_det: f64,
    pub error: f64,
    /// `error(2 eps) / error(eps)` when `0 < |eps| <= ell / 100`.
    pub scaling_ratio: Option<f64>,
}

/// `+1` at `(a,a)`, `(b,b)`, `-1` at `(a,b)`, `(b,a)`.
pub fn q_matrix(g: &Graph, edge: (usize, usize)) -> Result<DMatrix<f64>> {
    let (a, b) = edge;
    if g.edge_index(a, b).is_none() {
        return Err(Error::InvalidEdge(format!("({a},{b}) is not an edge")));
    }
    let n = g.num_vertices();
    let mut q = DMatrix::zeros(n, n);
    q[(a, a)] = 1.0;
    q[(b, b)] = 1.0;
    q[(a, b)] = -1.0;
    q[(b, a)] = -1.0;
    Ok(q)
}

/// `lambda - (eps / ell^2) v.Qv` for a simple eigenvalue with unit eigenvector `v`.
pub fn first_order_simple(lambda: f64, v: &[f64], q: &DMatrix<f64>, eps: f64, ell: f64) -> Result<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > ORTHONORMAL_TOL {
        return Err(Error::InvalidInput(format!("eigenvector norm {norm} is not 1")));
    }
    let v = nalgebra::DVector::from_column_slice(v);
    Ok(lambda - eps / (ell * ell) * v.dot(&(q * &v)))
}

/// Eigenvalues of `B^T Q B`, ascending, for an orthonormal basis `B` (as columns).
pub fn compressed_q_eigenvalues(basis: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<Vec<f64>> {
    let k = basis.ncols();
    let gram = basis.transpose() * basis;
    let dev = (gram - DMatrix::<f64>::identity(k, k)).amax();
    if dev > ORTHONORMAL_TOL {
        return Err(Error::InvalidInput(format!(
            "basis not orthonormal (deviation {dev:.2e})"
        )));
    }
    let compressed = basis.transpose() * q * basis;
    // tiny asymmetry from the two products
    let compressed = (&compressed + compressed.transpose()) * 0.5;
    Ok(spectral::symmetric_eigen(&compressed, EIGEN_TOL)?.eigenvalues)
}

/// First-order split of an eigenvalue of multiplicity `basis.ncols()`,
/// returned ascending.
pub fn first_order_degenerate(
    lambda: f64,
    basis: &DMatrix<f64>,
    q: &DMatrix<f64>,
    eps: f64,
    ell: f64,
) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = compressed_q_eigenvalues(basis, q)?
        .into_iter()
        .map(|mu| lambda - eps / (ell * ell) * mu)
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Groups sorted eigenvalues into numerically degenerate clusters.
///
/// Gaps up to `1e-6 * lambda_max` join a cluster; a gap between that and ten
/// times that is reported as [`Error::IllConditionedDegeneracy`].
pub fn eigenspaces(s: &Spectrum) -> Result<Vec<Range<usize>>> {
    let tol = CLUSTER_REL_TOL * s.max_abs().max(f64::MIN_POSITIVE);
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..=s.len() {
        if k < s.len() {
            let gap = s.eigenvalues[k] - s.eigenvalues[k - 1];
            if gap <= tol {
                continue;
            }
            if gap <= 10.0 * tol {
                return Err(Error::IllConditionedDegeneracy(format!(
                    "eigenvalues {} and {} are {gap:.2e} apart",
                    s.eigenvalues[k - 1],
                    s.eigenvalues[k]
                )));
            }
        }
        clusters.push(start..k);
        start = k;
    }
    Ok(clusters)
}

/// One eigenspace of the unperturbed `R` and the eigenvalues of `Q`
/// compressed onto it.
#[derive(Debug, Clone)]
pub struct Sector {
    pub lambda: f64,
    pub is_kernel: bool,
    pub q_eigenvalues: Vec<f64>,
}

fn unperturbed(mg: &MetricGraph, edge: usize) -> Result<(f64, Spectrum, DMatrix<f64>)> {
    let ell = mg
        .equilateral_length()
        .ok_or_else(|| Error::InvalidInput("first-order expansion needs an equilateral graph".into()))?;
    let g = mg.graph();
    let (a, b) = g
        .edge(edge)
        .ok_or_else(|| Error::InvalidEdge(format!("edge index {edge} out of range")))?;
    let spectrum = spectral::symmetric_eigen(&spectral::r_matrix(mg)?, EIGEN_TOL)?;
    Ok((ell, spectrum, q_matrix(g, (a, b))?))
}

/// Eigenspace decomposition of `R` with each sector's response to `Q`.
pub fn sectors(mg: &MetricGraph, edge: usize) -> Result<(f64, Vec<Sector>)> {
    let (ell, spectrum, q) = unperturbed(mg, edge)?;
    let mut out = Vec::new();
    for range in eigenspaces(&spectrum)? {
        let lambda = spectrum.eigenvalues[range.clone()].iter().sum::<f64>() / range.len() as f64;
        let is_kernel = spectrum.is_zero(lambda);
        let q_eigenvalues = if range.len() == 1 {
            let v = spectrum.eigenvector(range.start);
            // unit shift: recover v.Qv from the simple-eigenvalue formula
            vec![lambda - first_order_simple(lambda, &v, &q, 1.0, 1.0)?]
        } else {
            let basis = spectrum.eigenvectors.columns(range.start, range.len()).into_owned();
            compressed_q_eigenvalues(&basis, &q)?
        };
        out.push(Sector {
            lambda,
            is_kernel,
            q_eigenvalues,
        });
    }
    Ok((ell, out))
}

fn first_order_from_sectors(sectors: &[Sector], eps: f64, ell: f64) -> (Vec<f64>, f64) {
    let mut eigs = Vec::new();
    let mut det = 1.0;
    for s in sectors {
        for &mu in &s.q_eigenvalues {
            let l = s.lambda - eps / (ell * ell) * mu;
            if !s.is_kernel {
                det *= l;
            }
            eigs.push(if s.is_kernel { 0.0 } else { l });
        }
    }
    eigs.sort_by(f64::total_cmp);
    (eigs, det)
}

fn exact_det_r(g: &Graph, ell: f64, edge: usize, eps: f64) -> Result<f64> {
    Ok(spectral::analyze(&make_metric(g, ell, Some((edge, eps)))?)?.det_r.value)
}

/// First-order spectrum of `R'` against the eigensolver at `ell + eps`.
pub fn perturbed_spectrum_first_order(mg: &MetricGraph, pert: &EdgePerturbation) -> Result<PerturbationResult> {
    let (ell, secs) = sectors(mg, pert.edge)?;
    if (ell - pert.ell).abs() > 1e-12 * ell {
        return Err(Error::InvalidInput(format!(
            "perturbation baseline {} differs from graph length {ell}",
            pert.ell
        )));
    }
    let g = mg.graph();
    let eval = |eps: f64| -> Result<(Vec<f64>, f64, f64)> {
        let (eigs, fo) = first_order_from_sectors(&secs, eps, ell);
        let exact = exact_det_r(g, ell, pert.edge, eps)?;
        Ok((eigs, fo, exact))
    };
    let (first_order_eigenvalues, first_order_det, exact_det) = eval(pert.epsilon)?;
    let error = (exact_det - first_order_det).abs();
    let scaling_ratio = if pert.epsilon != 0.0 && pert.epsilon.abs() <= ell / 100.0 {
        let det0: f64 = secs
            .iter()
            .filter(|s| !s.is_kernel)
            .map(|s| s.lambda.powi(s.q_eigenvalues.len() as i32))
            .product();
        if error < 1e-13 * det0.abs() {
            None
        } else {
            let (_, fo2, ex2) = eval(2.0 * pert.epsilon)?;
            Some((ex2 - fo2).abs() / error)
        }
    } else {
        None
    };
    Ok(PerturbationResult {
        first_order_eigenvalues,
        first_order_det,
        exact_det,
        error,
        scaling_ratio,
    })
}

/// `|err(2 eps)| / |err(eps)|` with `err = exact det'(R') - first-order det'(R')`.
/// A quadratic remainder gives a ratio near 4.
pub fn verify_quadratic_remainder(mg: &MetricGraph, edge: usize, eps_probe: f64) -> Result<f64> {
    let ell = mg
        .equilateral_length()
        .ok_or_else(|| Error::InvalidInput("remainder check needs an equilateral graph".into()))?;
    if !(eps_probe > 0.0 && eps_probe <= ell / 100.0) {
        return Err(Error::InvalidInput(format!(
            "probe {eps_probe} must lie in (0, ell/100]"
        )));
    }
    let res = perturbed_spectrum_first_order(mg, &EdgePerturbation::new(edge, eps_probe, ell)?)?;
    res.scaling_ratio
        .ok_or_else(|| Error::RemainderBelowNoise(format!("remainder {:.3e} at eps = {eps_probe}", res.error)))
}

/// `d ln det'(R') / d eps` at `eps = 0`, i.e. `-(1/ell^2) sum_k mu_k / lambda_k`
/// over all non-zero eigenvalues.
pub fn det_r_log_slope(mg: &MetricGraph, edge: usize) -> Result<f64> {
    let (ell, secs) = sectors(mg, edge)?;
    let s: f64 = secs
        .iter()
        .filter(|s| !s.is_kernel)
        .map(|s| s.q_eigenvalues.iter().sum::<f64>() / s.lambda)
        .sum();
    Ok(-s / (ell * ell))
}
