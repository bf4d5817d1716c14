//! The invariant corpus behind `qgdet verify`: each check recomputes one
//! identity numerically and reports pass or fail with a short detail line.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::families::{
    bipartite_perturbed_eigs, circulant_slope, complete_perturbed_eigs, det_l_bipartite, det_l_complete,
    det_r_circulant, family_determinant, multiplicity_check_circulant, CirculantParams,
};
use crate::graph::{circulant_graph, complete_bipartite, complete_graph, gcd, make_metric, Graph};
use crate::perturbation::verify_quadratic_remainder;
use crate::spectral::{analyze, r_matrix, spectral_determinant, symmetric_eigen, EIGEN_TOL};
use crate::trees::{
    breakdown_epsilon, enumerate_spanning_trees, kirchhoff_count, round_estimate, theorem2_delta, tree_estimate,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// A connected graph on `3..=max_v` vertices: a random spanning tree plus
/// random chords, at most `max_e` edges in total.
pub fn random_connected_graph(rng: &mut impl Rng, max_v: usize, max_e: usize) -> Graph {
    let v = rng.gen_range(3..=max_v);
    let mut edges: Vec<(usize, usize)> = (1..v).map(|i| (rng.gen_range(0..i), i)).collect();
    let mut chords: Vec<(usize, usize)> = (0..v)
        .flat_map(|i| (i + 1..v).map(move |j| (i, j)))
        .filter(|e| !edges.contains(e))
        .collect();
    chords.shuffle(rng);
    let room = max_e.saturating_sub(edges.len()).min(chords.len());
    let extra = rng.gen_range(0..=room);
    edges.extend(chords.into_iter().take(extra));
    Graph::new(v, edges).expect("generated edges are simple")
}

/// Small members of all three families.
pub fn family_corpus() -> Vec<Graph> {
    let mut gs = Vec::new();
    for n in 2..=6 {
        gs.push(complete_graph(n).unwrap());
    }
    for m in 1..=3 {
        for n in m..=4 {
            gs.push(complete_bipartite(m, n).unwrap());
        }
    }
    for (n, a) in [
        (5, vec![1]),
        (5, vec![2]),
        (7, vec![1, 2]),
        (11, vec![1, 3]),
        (8, vec![1, 3]),
    ] {
        gs.push(circulant_graph(n, &a).unwrap());
    }
    gs
}

/// Central difference of `f` at zero with step `h`.
pub fn central_difference(f: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    Ok((f(h)? - f(-h)?) / (2.0 * h))
}

pub fn run_all(seed: u64) -> Vec<Check> {
    vec![
        check("k4_golden", || {
            let k4 = complete_graph(4)?;
            let eq = make_metric(&k4, 1.0, None)?;
            let st = make_metric(&k4, 1.0, Some((0, 1.0)))?;
            let (r0, t0) = (analyze(&eq)?.det_r.value, tree_estimate(&eq)?);
            let (r1, t1) = (analyze(&st)?.det_r.value, tree_estimate(&st)?);
            let ok = (r0 - 64.0).abs() < 1e-9
                && (t0 - 16.0).abs() < 1e-9
                && (r1 - 48.0).abs() < 1e-8
                && (t1 - 28.0).abs() < 1e-8;
            Ok((ok, format!("det'R {r0} / {r1}, T {t0} / {t1}")))
        }),
        check("matrix_tree_oracle", || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut gs: Vec<Graph> = family_corpus().into_iter().filter(|g| g.num_edges() <= 16).collect();
            gs.extend((0..50).map(|_| random_connected_graph(&mut rng, 8, 16)));
            for g in &gs {
                let k = kirchhoff_count(g).count;
                let e = enumerate_spanning_trees(g)?;
                if k != e {
                    return Ok((false, format!("{}: Kirchhoff {k}, enumeration {e}", g.family().name())));
                }
            }
            Ok((true, format!("{} graphs", gs.len())))
        }),
        check("equilateral_exactness", || {
            let mut worst = 0.0f64;
            for g in family_corpus().iter().filter(|g| g.num_vertices() <= 10) {
                let count = kirchhoff_count(g).count;
                let c = num_traits::ToPrimitive::to_f64(&count).unwrap();
                for ell in [0.5, 1.0, 3.0] {
                    let t = tree_estimate(&make_metric(g, ell, None)?)?;
                    if round_estimate(t).value != count {
                        return Ok((
                            false,
                            format!("{} at ell {ell}: T {t}, count {count}", g.family().name()),
                        ));
                    }
                    worst = worst.max(rel(t, c));
                }
            }
            Ok((worst <= 1e-9, format!("worst relative error {worst:.2e}")))
        }),
        check("closed_form_vs_numeric", || {
            let mut worst = 0.0f64;
            for n in 2..=10 {
                let num = spectral_determinant(&make_metric(&complete_graph(n)?, 1.3, None)?)?;
                worst = worst.max(rel(num, det_l_complete(n, 1.3)));
            }
            for m in 1..=6 {
                for n in 1..=6 {
                    let num = spectral_determinant(&make_metric(&complete_bipartite(m, n)?, 0.7, None)?)?;
                    worst = worst.max(rel(num, det_l_bipartite(m, n, 0.7)));
                }
            }
            for (n, a) in [(7, vec![1, 2]), (11, vec![1, 3]), (13, vec![1, 5]), (17, vec![2, 5])] {
                if !multiplicity_check_circulant(n, &a)? {
                    continue;
                }
                let num = analyze(&make_metric(&circulant_graph(n, &a)?, 1.0, None)?)?.det_r.value;
                worst = worst.max(rel(num, det_r_circulant(&CirculantParams::new(n, a, 0)?, 1.0)?));
            }
            Ok((worst <= 1e-10, format!("worst relative error {worst:.2e}")))
        }),
        check("first_order_slopes", || {
            let mut worst = 0.0f64;
            let graphs = [
                complete_graph(4)?,
                complete_graph(6)?,
                complete_bipartite(3, 3)?,
                complete_bipartite(2, 5)?,
                circulant_graph(7, &[1, 2])?,
                circulant_graph(11, &[1, 3])?,
            ];
            for g in &graphs {
                let fam = family_determinant(g, 1.0, 0)?;
                let d = central_difference(|e| spectral_determinant(&make_metric(g, 1.0, Some((0, e)))?), 1e-5)?;
                worst = worst.max(rel(d, fam.equilateral_value * fam.first_order_slope));
            }
            Ok((worst <= 1e-5, format!("worst relative error {worst:.2e}")))
        }),
        check("tree_slopes", || {
            let mut worst = 0.0f64;
            let slope = |g: &Graph| central_difference(|e| tree_estimate(&make_metric(g, 1.0, Some((0, e)))?), 1e-5);
            for n in [4usize, 5, 6] {
                let nf = n as f64;
                let want = nf.powi(n as i32 - 3) * (nf * nf - 3.0 * nf + 4.0) / (nf - 1.0);
                worst = worst.max(rel(slope(&complete_graph(n)?)?, want));
            }
            for (m, n) in [(2usize, 3usize), (3, 3), (2, 5)] {
                let (mf, nf) = (m as f64, n as f64);
                let want = mf.powi(n as i32 - 2) * nf.powi(m as i32 - 2) * (mf * nf - mf - nf + 2.0);
                worst = worst.max(rel(slope(&complete_bipartite(m, n)?)?, want));
            }
            for (n, a) in [(7, vec![1, 2]), (11, vec![1, 3])] {
                let g = circulant_graph(n, &a)?;
                let count = num_traits::ToPrimitive::to_f64(&kirchhoff_count(&g).count).unwrap();
                let want = count * circulant_slope(&CirculantParams::new(n, a, 0)?)?;
                worst = worst.max(rel(slope(&g)?, want));
            }
            Ok((worst <= 1e-5, format!("worst relative error {worst:.2e}")))
        }),
        check("eigenvalue_catalogs", || {
            let eps = 1e-3;
            let mut worst = 0.0f64;
            let mut compare = |g: &Graph, want: Vec<f64>| -> Result<()> {
                let got = symmetric_eigen(&r_matrix(&make_metric(g, 1.0, Some((0, eps)))?)?, EIGEN_TOL)?.eigenvalues;
                for (x, y) in got.iter().zip(&want) {
                    worst = worst.max((x - y).abs());
                }
                Ok(())
            };
            for n in 2..=8 {
                compare(&complete_graph(n)?, complete_perturbed_eigs(n, 1.0, eps))?;
            }
            for m in 1..=8 {
                for n in 1..=9 - m {
                    compare(&complete_bipartite(m, n)?, bipartite_perturbed_eigs(m, n, 1.0, eps))?;
                }
            }
            Ok((worst <= 1e-5, format!("worst abs deviation {worst:.2e}")))
        }),
        check("quadratic_remainder", || {
            let mut ratios = Vec::new();
            for g in [
                complete_graph(4)?,
                complete_bipartite(3, 3)?,
                circulant_graph(7, &[1, 2])?,
            ] {
                ratios.push(verify_quadratic_remainder(&make_metric(&g, 1.0, None)?, 0, 1e-3)?);
            }
            let ok = ratios.iter().all(|r| (3.0..=5.0).contains(r));
            Ok((ok, format!("ratios {ratios:.4?}")))
        }),
        check("window_separation", || {
            let k4 = complete_graph(4)?;
            let b = breakdown_epsilon(&k4, 0, 1.0)?;
            let d2 = theorem2_delta(&k4, 1.0).value();
            let slope = central_difference(|e| tree_estimate(&make_metric(&k4, 1.0, Some((0, e)))?), 1e-5)?;
            let predicted = 0.5 / slope;
            let ratio = b.epsilon / predicted;
            let ok = b.found && b.epsilon >= 1e3 * d2 && (1.0 / 3.0..=3.0).contains(&ratio);
            Ok((
                ok,
                format!(
                    "eps* {:.6}, theorem window {d2:.3e}, first-order {predicted:.6}",
                    b.epsilon
                ),
            ))
        }),
        check("circulant_structure", || {
            let mut ok = multiplicity_check_circulant(7, &[1, 2])? && !multiplicity_check_circulant(5, &[1, 2])?;
            for (n, a) in [(7usize, vec![1usize, 2]), (11, vec![1, 3]), (10, vec![1, 4])] {
                let p = a.len() as f64;
                let lam = |j: usize| {
                    let s: f64 = a
                        .iter()
                        .map(|&ak| (2.0 * std::f64::consts::PI * (j * ak) as f64 / n as f64).cos())
                        .sum();
                    2.0 * (p - s)
                };
                ok &= (1..n).all(|j| (lam(j) - lam(n - j)).abs() <= 1e-10);
                let mut got = analyze(&make_metric(&circulant_graph(n, &a)?, 1.0, None)?)?
                    .spectrum
                    .eigenvalues;
                let mut want: Vec<f64> = (0..n).map(lam).collect();
                got.sort_by(f64::total_cmp);
                want.sort_by(f64::total_cmp);
                ok &= got.iter().zip(&want).all(|(x, y)| (x - y).abs() <= 1e-10);
            }
            for n in 3..=30usize {
                for a1 in 1..n.div_ceil(2) {
                    let conn = circulant_graph(n, &[a1]).is_ok_and(|g| g.is_connected());
                    ok &= conn == (gcd(n, a1) == 1);
                }
            }
            Ok((ok, "pairing, multiplicity and gcd connectivity".into()))
        }),
        check("homogeneity", || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut worst = 0.0f64;
            for _ in 0..10 {
                let g = random_connected_graph(&mut rng, 8, 16);
                let edge = rng.gen_range(0..g.num_edges());
                let eps = rng.gen_range(0.0..0.5);
                let scale = rng.gen_range(0.1..10.0);
                let t = tree_estimate(&make_metric(&g, 1.0, Some((edge, eps)))?)?;
                let ts = tree_estimate(&make_metric(&g, scale, Some((edge, eps * scale)))?)?;
                worst = worst.max(rel(ts, t));
            }
            Ok((worst <= 1e-12, format!("worst relative change {worst:.2e}")))
        }),
        check("permutation_invariance", || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbeef);
            let mut worst = 0.0f64;
            for _ in 0..10 {
                let g = random_connected_graph(&mut rng, 8, 16);
                let mut perm: Vec<usize> = (0..g.num_vertices()).collect();
                perm.shuffle(&mut rng);
                let h = g.relabel(&perm)?;
                let a = spectral_determinant(&make_metric(&g, 1.0, Some((0, 0.3)))?)?;
                let b = spectral_determinant(&make_metric(&h, 1.0, Some((0, 0.3)))?)?;
                worst = worst.max(rel(b, a));
            }
            Ok((worst <= 1e-10, format!("worst relative change {worst:.2e}")))
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_graphs_are_connected_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let g = random_connected_graph(&mut rng, 8, 16);
            assert!(g.is_connected());
            assert!(g.num_edges() <= 16.max(g.num_vertices() - 1));
        }
    }

    #[test]
    fn corpus_passes() {
        for c in run_all(0) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
