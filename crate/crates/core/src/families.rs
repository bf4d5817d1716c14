//! Closed-form spectral determinants for equilateral complete, complete
//! bipartite and prime-order circulant graphs, and their first-order
//! response to stretching one edge.
//!
//! Every first-order quantity here has the form
//! `det'(L') = det'(L) * (1 + (eps / ell) * slope) + O(eps^2)`.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::graph::{Family, Graph};

fn ln_pow(base: f64, exp: f64) -> f64 {
    exp * base.ln()
}

/// Trial division.
pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `E 2^E n^(n-2) ell^(beta+1) / (n-1)^n` for `K_n`.
pub fn det_l_complete(n: usize, ell: f64) -> f64 {
    let nf = n as f64;
    let e = nf * (nf - 1.0) / 2.0;
    let beta = e - nf + 1.0;
    let ln = e.ln() + e * LN_2 + ln_pow(nf, nf - 2.0) + ln_pow(ell, beta + 1.0) - ln_pow(nf - 1.0, nf);
    if n > 20 {
        ln.exp()
    } else {
        e * 2f64.powf(e) * nf.powf(nf - 2.0) * ell.powf(beta + 1.0) / (nf - 1.0).powf(nf)
    }
}

/// Relative first-order slope `(beta + 1) / E` shared by both edge-transitive
/// families.
fn edge_transitive_slope(e: f64, v: f64) -> f64 {
    (e - v + 2.0) / e
}

pub fn almost_det_l_complete(n: usize, ell: f64, eps: f64) -> f64 {
    let nf = n as f64;
    let e = nf * (nf - 1.0) / 2.0;
    det_l_complete(n, ell) * (1.0 + eps / ell * edge_transitive_slope(e, nf))
}

/// `2^E ell^(beta+1)` for `K_{m,n}`.
pub fn det_l_bipartite(m: usize, n: usize, ell: f64) -> f64 {
    let e = (m * n) as f64;
    let beta = e - (m + n) as f64 + 1.0;
    if m + n > 20 {
        (e * LN_2 + ln_pow(ell, beta + 1.0)).exp()
    } else {
        2f64.powf(e) * ell.powf(beta + 1.0)
    }
}

pub fn almost_det_l_bipartite(m: usize, n: usize, ell: f64, eps: f64) -> f64 {
    let e = (m * n) as f64;
    det_l_bipartite(m, n, ell) * (1.0 + eps / ell * edge_transitive_slope(e, (m + n) as f64))
}

/// Prime-order circulant `C_n(a)` with the perturbed edge `(0, a_m)`.
///
/// `m` is 0-based here; other edges of the same jump orbit reduce to
/// `(0, a_m)` by rotating the vertex labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantParams {
    n: usize,
    a: Vec<usize>,
    m: usize,
}

impl CirculantParams {
    pub fn new(n: usize, a: Vec<usize>, m: usize) -> Result<Self> {
        if !is_prime(n) {
            return Err(Error::InvalidParameter(format!("circulant order {n} is not prime")));
        }
        if a.is_empty() || a[0] == 0 || a.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "jumps {a:?} must be strictly increasing and positive"
            )));
        }
        if 2 * a[a.len() - 1] >= n {
            return Err(Error::UnsupportedParameter(format!(
                "jumps {a:?} must stay below n/2 = {}",
                n as f64 / 2.0
            )));
        }
        if m >= a.len() {
            return Err(Error::InvalidParameter(format!(
                "perturbed jump index {m} out of range"
            )));
        }
        Ok(CirculantParams { n, a, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn jumps(&self) -> &[usize] {
        &self.a
    }

    pub fn perturbed_index(&self) -> usize {
        self.m
    }

    fn p(&self) -> f64 {
        self.a.len() as f64
    }

    /// `alpha_{k,j} = 2 pi a_k j / n`.
    pub fn alpha(&self, k: usize, j: usize) -> f64 {
        2.0 * PI * ((self.a[k] * j) % self.n) as f64 / self.n as f64
    }

    /// `p - sum_k cos alpha_{k,j}`, i.e. `ell / 2` times the `j`-th eigenvalue of `R`.
    pub fn sector_value(&self, j: usize) -> f64 {
        self.p() - (0..self.a.len()).map(|k| self.alpha(k, j).cos()).sum::<f64>()
    }

    fn half(&self) -> usize {
        (self.n - 1) / 2
    }

    fn require_multiplicity(&self) -> Result<()> {
        if multiplicity_check_circulant(self.n, &self.a)? {
            Ok(())
        } else {
            Err(Error::UnsupportedGraph(format!(
                "C{}{:?} has an adjacency eigenvalue of multiplicity above two",
                self.n, self.a
            )))
        }
    }

    fn ln_sector_product(&self) -> Result<f64> {
        (1..=self.half())
            .map(|j| {
                let s = self.sector_value(j);
                if s.abs() < 1e-12 {
                    Err(Error::DegenerateSpectrum(format!(
                        "sector {j} has a vanishing eigenvalue"
                    )))
                } else {
                    Ok(2.0 * s.ln())
                }
            })
            .sum()
    }
}

/// True when the `(n-1)/2` values `p - sum_k cos(2 pi j a_k / n)` are nonzero and
/// pairwise separated by more than `1e-9`, i.e. every nonzero eigenvalue of `R`
/// is exactly doubly degenerate.
pub fn multiplicity_check_circulant(n: usize, a: &[usize]) -> Result<bool> {
    if !is_prime(n) {
        return Err(Error::InvalidParameter(format!("circulant order {n} is not prime")));
    }
    let p = a.len() as f64;
    let mut values: Vec<f64> = (1..=(n - 1) / 2)
        .map(|j| {
            p - a
                .iter()
                .map(|&ak| (2.0 * PI * ((ak * j) % n) as f64 / n as f64).cos())
                .sum::<f64>()
        })
        .collect();
    if values.iter().any(|v| v.abs() <= 1e-9) {
        return Ok(false);
    }
    values.sort_by(f64::total_cmp);
    Ok(values.windows(2).all(|w| w[1] - w[0] > 1e-9))
}

/// `(2/ell)^(n-1) prod_{j=1}^{(n-1)/2} (p - sum_k cos alpha_{k,j})^2`.
pub fn det_r_circulant(params: &CirculantParams, ell: f64) -> Result<f64> {
    params.require_multiplicity()?;
    let n = params.n as f64;
    Ok(((n - 1.0) * (2.0 / ell).ln() + params.ln_sector_product()?).exp())
}

/// Correction constant of the circulant first-order slope:
///
/// ```text
/// C = sum_{j=1}^{(n-1)/2} 2 (cos alpha_{m,j} - 1) / (n (p - sum_k cos alpha_{k,j}))
/// ```
///
/// The degenerate pair `{j, n-j}` responds to the perturbation through the
/// Hermitian compression of `Q` onto its complex Fourier eigenvectors, whose
/// nonzero eigenvalue is `4 (1 - cos alpha_{m,j}) / n`. For large graphs
/// `C` approaches `-1/p`.
pub fn circulant_c_constant(params: &CirculantParams) -> Result<f64> {
    params.require_multiplicity()?;
    let n = params.n as f64;
    (1..=params.half())
        .map(|j| {
            let denom = params.sector_value(j);
            if denom.abs() < 1e-12 {
                return Err(Error::DegenerateSpectrum(format!(
                    "sector {j} has a vanishing eigenvalue"
                )));
            }
            let c = params.alpha(params.m, j).cos();
            Ok(2.0 * (c - 1.0) / (n * denom))
        })
        .sum()
}

/// `2^(np-1) ell^(beta+1) p^-(n-1) prod_j (p - sum_k cos alpha_{k,j})^2`.
pub fn det_l_circulant(params: &CirculantParams, ell: f64) -> Result<f64> {
    params.require_multiplicity()?;
    let n = params.n as f64;
    let p = params.p();
    let beta = n * p - n + 1.0;
    let ln = (n * p - 1.0) * LN_2 + ln_pow(ell, beta + 1.0) - ln_pow(p, n - 1.0) + params.ln_sector_product()?;
    Ok(ln.exp())
}

/// `1 + 1/(np) + C`.
pub fn circulant_slope(params: &CirculantParams) -> Result<f64> {
    Ok(1.0 + 1.0 / (params.n as f64 * params.p()) + circulant_c_constant(params)?)
}

pub fn almost_det_l_circulant(params: &CirculantParams, ell: f64, eps: f64) -> Result<f64> {
    Ok(det_l_circulant(params, ell)? * (1.0 + eps / ell * circulant_slope(params)?))
}

/// Equilateral `det'(L)` and its relative first-order slope for one family
/// member.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDeterminant {
    pub equilateral_value: f64,
    /// Coefficient of `eps/ell` in `det'(L')/det'(L) - 1`.
    pub first_order_slope: f64,
    pub family: Family,
}

impl FamilyDeterminant {
    pub fn first_order(&self, ell: f64, eps: f64) -> f64 {
        self.equilateral_value * (1.0 + eps / ell * self.first_order_slope)
    }
}

/// Dispatches on the graph's family tag. For circulants, `perturbed_edge`
/// selects the jump orbit (`edge % p`).
pub fn family_determinant(g: &Graph, ell: f64, perturbed_edge: usize) -> Result<FamilyDeterminant> {
    let family = g.family().clone();
    let (equilateral_value, first_order_slope) = match &family {
        Family::Complete(n) => {
            let nf = *n as f64;
            (
                det_l_complete(*n, ell),
                edge_transitive_slope(nf * (nf - 1.0) / 2.0, nf),
            )
        }
        Family::CompleteBipartite(m, n) => (
            det_l_bipartite(*m, *n, ell),
            edge_transitive_slope((m * n) as f64, (m + n) as f64),
        ),
        Family::Circulant(n, a) => {
            let params = CirculantParams::new(*n, a.clone(), perturbed_edge % a.len())?;
            (det_l_circulant(&params, ell)?, circulant_slope(&params)?)
        }
        Family::Custom => {
            return Err(Error::UnsupportedFamily("no closed form for custom graphs".into()));
        }
    };
    Ok(FamilyDeterminant {
        equilateral_value,
        first_order_slope,
        family,
    })
}

/// First-order eigenvalues of `R'` for `K_n`, ascending:
/// `0`, `n/ell` (n-2 times) and `n/ell - 2 eps/ell^2`.
pub fn complete_perturbed_eigs(n: usize, ell: f64, eps: f64) -> Vec<f64> {
    let top = n as f64 / ell;
    let mut out = vec![0.0];
    out.extend(std::iter::repeat_n(top, n.saturating_sub(2)));
    out.push(top - 2.0 * eps / (ell * ell));
    out.sort_by(f64::total_cmp);
    out
}

/// First-order eigenvalues of `R'` for `K_{m,n}` with part sizes `m`, `n`,
/// ascending.
///
/// For `m != n` this is `0`, `(m+n)/ell - eps (m+n)/(mn ell^2)`, `n/ell`
/// (m-2 times), `m/ell` (n-2 times), `n/ell - eps (m-1)/(m ell^2)` and
/// `m/ell - eps (n-1)/(n ell^2)`; a part of size one contributes no sector.
/// For `m == n` the two sectors coincide, `Q` couples them, and the merged
/// `2(n-1)`-dimensional eigenspace splits into `n/ell` (2n-3 times) and
/// `n/ell - 2 eps (n-1)/(n ell^2)`.
pub fn bipartite_perturbed_eigs(m: usize, n: usize, ell: f64, eps: f64) -> Vec<f64> {
    let (mf, nf) = (m as f64, n as f64);
    let k = eps / (ell * ell);
    let mut out = vec![0.0, (mf + nf) / ell - k * (mf + nf) / (mf * nf)];
    if m == n {
        if n >= 2 {
            out.extend(std::iter::repeat_n(nf / ell, 2 * n - 3));
            out.push(nf / ell - 2.0 * k * (nf - 1.0) / nf);
        }
    } else {
        if m >= 2 {
            out.extend(std::iter::repeat_n(nf / ell, m - 2));
            out.push(nf / ell - k * (mf - 1.0) / mf);
        }
        if n >= 2 {
            out.extend(std::iter::repeat_n(mf / ell, n - 2));
            out.push(mf / ell - k * (nf - 1.0) / nf);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn complete_closed_forms() {
        assert_relative_eq!(det_l_complete(4, 1.0), 6.0 * 64.0 * 16.0 / 81.0, max_relative = 1e-14);
        assert_relative_eq!(det_l_complete(2, 1.0), 2.0, max_relative = 1e-14);
        assert_relative_eq!(det_l_complete(2, 3.0), 6.0, max_relative = 1e-14);
        assert_relative_eq!(
            det_l_complete(4, 2.0),
            16.0 * det_l_complete(4, 1.0),
            max_relative = 1e-14
        );
        assert_eq!(almost_det_l_complete(5, 1.0, 0.0), det_l_complete(5, 1.0));
        assert_relative_eq!(
            almost_det_l_complete(4, 1.0, 0.01),
            det_l_complete(4, 1.0) * (1.0 + 0.01 * 4.0 / 6.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn complete_log_branch_agrees() {
        // n = 21 goes through the log branch; compare with n = 20 via the ratio
        let n = 21.0_f64;
        let ratio = det_l_complete(21, 1.0) / det_l_complete(20, 1.0);
        let e = |n: f64| n * (n - 1.0) / 2.0;
        let want = (e(n) / e(n - 1.0)) * 2f64.powf(e(n) - e(n - 1.0)) * n.powf(n - 2.0) / (n - 1.0).powf(n - 3.0)
            * (n - 2.0).powf(n - 1.0)
            / (n - 1.0).powf(n);
        assert_relative_eq!(ratio, want, max_relative = 1e-12);
    }

    #[test]
    fn complete_slope_decomposes() {
        // l_tot prod l_e contributes (E+1)/E and det'(R') contributes -2/n;
        // together they equal 1 - 2(n-2)/(n(n-1)) = (beta+1)/E
        for n in 2..12usize {
            let nf = n as f64;
            let e = nf * (nf - 1.0) / 2.0;
            let combined = (e + 1.0) / e - 2.0 / nf;
            assert_relative_eq!(
                combined,
                1.0 - 2.0 * (nf - 2.0) / (nf * (nf - 1.0)),
                max_relative = 1e-14
            );
            assert_relative_eq!(combined, edge_transitive_slope(e, nf), max_relative = 1e-14);
            // first-order det'(R') = (n/ell)^(n-1) - 2 eps n^(n-2) / ell^n at ell = 1
            let fo: f64 = complete_perturbed_eigs(n, 1.0, 1e-3).iter().skip(1).product();
            let want = nf.powf(nf - 1.0) - 1e-3 * 2.0 * nf.powf(nf - 2.0);
            assert_relative_eq!(fo, want, max_relative = 1e-13);
        }
    }

    #[test]
    fn bipartite_closed_forms() {
        assert_relative_eq!(det_l_bipartite(2, 2, 1.0), 16.0, max_relative = 1e-14);
        for n in 1..8usize {
            let e = n as f64;
            assert_relative_eq!(
                almost_det_l_bipartite(n, 1, 1.3, 0.01),
                2f64.powf(e) * 1.3 * (1.0 + 0.01 / (1.3 * e)),
                max_relative = 1e-14
            );
        }
        assert_eq!(almost_det_l_bipartite(3, 4, 1.0, 0.0), det_l_bipartite(3, 4, 1.0));
    }

    #[test]
    fn primes() {
        let primes: Vec<usize> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn circulant_params_validation() {
        assert!(matches!(
            CirculantParams::new(9, vec![1, 2], 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            CirculantParams::new(7, vec![1, 4], 0),
            Err(Error::UnsupportedParameter(_))
        ));
        assert!(matches!(
            CirculantParams::new(7, vec![1, 2], 2),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            multiplicity_check_circulant(9, &[1]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn multiplicity_examples() {
        assert!(multiplicity_check_circulant(7, &[1, 2]).unwrap());
        assert!(!multiplicity_check_circulant(5, &[1, 2]).unwrap());
        assert!(multiplicity_check_circulant(5, &[1]).unwrap());
        let k5 = CirculantParams::new(5, vec![1, 2], 0).unwrap();
        assert!(matches!(det_r_circulant(&k5, 1.0), Err(Error::UnsupportedGraph(_))));
    }

    #[test]
    fn det_r_cycle_counts_trees() {
        // C5(1): det'(R) = V * #trees = 25
        let c5 = CirculantParams::new(5, vec![1], 0).unwrap();
        assert_relative_eq!(det_r_circulant(&c5, 1.0).unwrap(), 25.0, max_relative = 1e-13);
        assert_relative_eq!(det_r_circulant(&c5, 2.0).unwrap(), 25.0 / 16.0, max_relative = 1e-13);
    }

    /// Independent evaluation: accumulate the sum in the opposite order with
    /// the angles reduced differently.
    fn c_constant_reference(n: usize, a: &[usize], m: usize) -> f64 {
        let mut total = 0.0;
        for j in (1..=(n - 1) / 2).rev() {
            let theta = |ak: usize| 2.0 * PI * ak as f64 * j as f64 / n as f64;
            let denom: f64 = a.iter().map(|&ak| 1.0 - theta(ak).cos()).sum();
            total += -2.0 * (1.0 - theta(a[m]).cos()) / (n as f64 * denom);
        }
        total
    }

    #[test]
    fn c_constant_matches_reference_sum() {
        // C5(1): the two terms are each -2/5, so C = -4/5
        let c5 = CirculantParams::new(5, vec![1], 0).unwrap();
        assert_relative_eq!(circulant_c_constant(&c5).unwrap(), -0.8, max_relative = 1e-14);
        for (n, a) in [
            (7usize, vec![1usize, 2]),
            (11, vec![1, 3]),
            (13, vec![2, 5]),
            (17, vec![2, 5]),
        ] {
            for m in 0..a.len() {
                let p = CirculantParams::new(n, a.clone(), m).unwrap();
                assert_relative_eq!(
                    circulant_c_constant(&p).unwrap(),
                    c_constant_reference(n, &a, m),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn c_constant_termwise_bound() {
        // each term lies in [-2/n, 0]
        for (n, a) in [(7usize, vec![1usize, 2]), (11, vec![1, 3]), (19, vec![1, 4, 7])] {
            let p = CirculantParams::new(n, a, 0).unwrap();
            let c = circulant_c_constant(&p).unwrap();
            assert!(c <= 0.0 && c >= -((n - 1) as f64) / n as f64, "C = {c}");
        }
    }

    #[test]
    fn cycle_slope_is_two_over_n() {
        // a cycle has det'(L) proportional to l_tot^2, so the slope is 2/n
        for n in [5usize, 7, 11, 13] {
            let p = CirculantParams::new(n, vec![1], 0).unwrap();
            assert_relative_eq!(circulant_slope(&p).unwrap(), 2.0 / n as f64, max_relative = 1e-12);
        }
    }

    fn numeric_slope(n: usize, a: &[usize], m: usize) -> f64 {
        use crate::graph::{circulant_graph, make_metric};
        use crate::spectral::spectral_determinant;
        let g = circulant_graph(n, a).unwrap();
        let h = 1e-5;
        let d = |e: f64| spectral_determinant(&make_metric(&g, 1.0, Some((m, e))).unwrap()).unwrap();
        (d(h) - d(-h)) / (2.0 * h) / d(0.0)
    }

    #[test]
    fn circulant_slope_matches_numeric_and_unconjugated_form_does_not() {
        for (n, a) in [(7usize, vec![1usize, 2]), (11, vec![1, 3])] {
            for m in 0..a.len() {
                let params = CirculantParams::new(n, a.clone(), m).unwrap();
                let numeric = numeric_slope(n, &a, m);
                assert_relative_eq!(circulant_slope(&params).unwrap(), numeric, max_relative = 1e-6);
                // contracting Q with the Fourier vectors without conjugation
                // weights each sector by an extra cos(alpha_m)
                let unconjugated: f64 = (1..=(n - 1) / 2)
                    .map(|j| {
                        let c = params.alpha(m, j).cos();
                        2.0 * c * (c - 1.0) / (n as f64 * params.sector_value(j))
                    })
                    .sum();
                let wrong = 1.0 + 1.0 / (n * a.len()) as f64 + unconjugated;
                assert!((wrong - numeric).abs() > 1e-2, "n={n} m={m}: {wrong} vs {numeric}");
            }
        }
        assert_relative_eq!(numeric_slope(7, &[1, 2], 0), 0.653846, max_relative = 1e-5);
    }

    #[test]
    fn c_constant_large_n_limit() {
        for (n, a) in [
            (101usize, vec![3usize]),
            (101, vec![2, 7]),
            (211, vec![5, 17]),
            (401, vec![1, 30]),
        ] {
            let p = a.len() as f64;
            let c = circulant_c_constant(&CirculantParams::new(n, a, 0).unwrap()).unwrap();
            assert!((c + 1.0 / p).abs() <= 0.5 / p, "n={n}: C = {c}");
        }
    }

    #[test]
    fn circulant_det_l_homogeneity_and_zero_eps() {
        let p = CirculantParams::new(7, vec![1, 2], 1).unwrap();
        let d1 = det_l_circulant(&p, 1.0).unwrap();
        let d2 = det_l_circulant(&p, 2.0).unwrap();
        // beta + 1 = np - n + 2 = 9
        assert_relative_eq!(d2 / d1, 2f64.powi(9), max_relative = 1e-12);
        assert_eq!(almost_det_l_circulant(&p, 1.0, 0.0).unwrap(), d1);
    }

    #[test]
    fn complete_catalog() {
        assert_eq!(complete_perturbed_eigs(4, 1.0, 1.0), vec![0.0, 2.0, 4.0, 4.0]);
        assert_eq!(complete_perturbed_eigs(5, 1.0, 0.0), vec![0.0, 5.0, 5.0, 5.0, 5.0]);
        assert_eq!(complete_perturbed_eigs(2, 1.0, 0.1), vec![0.0, 1.8]);
    }

    #[test]
    fn bipartite_catalog_equilateral_limit() {
        for (m, n) in [(1usize, 1usize), (1, 4), (2, 3), (3, 3), (4, 2)] {
            let got = bipartite_perturbed_eigs(m, n, 2.0, 0.0);
            let mut want = vec![0.0, (m + n) as f64 / 2.0];
            want.extend(std::iter::repeat_n(n as f64 / 2.0, m - 1));
            want.extend(std::iter::repeat_n(m as f64 / 2.0, n - 1));
            want.sort_by(f64::total_cmp);
            assert_eq!(got, want, "K{m},{n}");
        }
    }

    #[test]
    fn bipartite_catalog_determinant() {
        // nonzero product reproduces det'(R) - eps n^(m-2) m^(n-2) (m+n)(m+n-1) / ell^(m+n)
        for m in 1..6usize {
            for n in 1..6usize {
                let (mf, nf) = (m as f64, n as f64);
                let (ell, eps) = (1.5, 1e-7);
                let prod: f64 = bipartite_perturbed_eigs(m, n, ell, eps).iter().skip(1).product();
                let det0 = (mf + nf) * mf.powf(nf - 1.0) * nf.powf(mf - 1.0) / ell.powf(mf + nf - 1.0);
                let lin = eps / ell.powf(mf + nf) * nf.powf(mf - 2.0) * mf.powf(nf - 2.0) * (mf + nf) * (mf + nf - 1.0);
                assert_relative_eq!(prod, det0 - lin, max_relative = 1e-11);
            }
        }
        // star K_{n,1}: V/ell^(V-1) - eps V/ell^V
        let (n, ell, eps) = (6usize, 1.0, 1e-6);
        let v = (n + 1) as f64;
        let prod: f64 = bipartite_perturbed_eigs(n, 1, ell, eps).iter().skip(1).product();
        assert_relative_eq!(
            prod,
            v / ell.powf(v - 1.0) - eps * v / ell.powf(v),
            max_relative = 1e-11
        );
    }

    #[test]
    fn family_dispatch() {
        let g = crate::graph::complete_graph(4).unwrap();
        let fd = family_determinant(&g, 1.0, 0).unwrap();
        assert_relative_eq!(fd.first_order_slope, 4.0 / 6.0, max_relative = 1e-14);
        let g = crate::graph::circulant_graph(7, &[1, 2]).unwrap();
        // edge 3 = (1, 3), orbit of a_2
        let fd = family_determinant(&g, 1.0, 3).unwrap();
        let p = CirculantParams::new(7, vec![1, 2], 1).unwrap();
        assert_eq!(fd.first_order_slope, circulant_slope(&p).unwrap());
        let g = crate::graph::Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(
            family_determinant(&g, 1.0, 0),
            Err(Error::UnsupportedFamily(_))
        ));
    }
}
