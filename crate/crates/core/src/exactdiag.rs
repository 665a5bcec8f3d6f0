//! Exact-diagonalization reference energies per particle-number sector.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_hubbard, sector_matrix, SectorBasis};
use crate::lattice::LatticeGeometry;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub sector: (usize, usize),
    /// Ascending, `min(requested, dim)` entries.
    pub energies: Vec<f64>,
    pub requested: usize,
    /// Set when `requested` exceeded the sector dimension.
    pub truncated: bool,
}

/// Eigenpairs of a real symmetric matrix, ascending by eigenvalue.
pub fn sorted_eigen(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Sorted spectrum of a complex Hermitian matrix.
pub fn hermitian_eigenvalues(h: DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Lowest `k` energies of the `(n_up, n_down)` block.
pub fn exact_spectrum(
    geometry: &LatticeGeometry,
    u_over_t: f64,
    n_up: usize,
    n_down: usize,
    k: usize,
) -> Result<SpectrumResult> {
    if k == 0 {
        return Err(Error::Config("requested zero eigenvalues".into()));
    }
    let terms = build_hubbard(geometry, u_over_t)?;
    let (basis, h) = sector_matrix(&terms, geometry, n_up, n_down)?;
    let (values, _) = sorted_eigen(h);
    let take = k.min(basis.dim());
    Ok(SpectrumResult {
        sector: (n_up, n_down),
        energies: values[..take].to_vec(),
        requested: k,
        truncated: k > basis.dim(),
    })
}

/// Lowest `k` eigenpairs, eigenvectors embedded in the full `2^n` register.
pub fn exact_eigenstates(
    geometry: &LatticeGeometry,
    u_over_t: f64,
    n_up: usize,
    n_down: usize,
    k: usize,
) -> Result<Vec<(f64, Vec<Complex64>)>> {
    let terms = build_hubbard(geometry, u_over_t)?;
    let (basis, h) = sector_matrix(&terms, geometry, n_up, n_down)?;
    let (values, vectors) = sorted_eigen(h);
    Ok((0..k.min(basis.dim()))
        .map(|c| (values[c], embed(&basis, &vectors.column(c).into_owned(), geometry.n_qubits())))
        .collect())
}

fn embed(basis: &SectorBasis, v: &DVector<f64>, n_qubits: usize) -> Vec<Complex64> {
    let mut full = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
    for (amp, &s) in v.iter().zip(basis.states.iter()) {
        full[s as usize] = Complex64::new(*amp, 0.0);
    }
    full
}

/// Single-particle hopping matrix over sites (`-1` on every bond).
pub fn hopping_matrix(geometry: &LatticeGeometry) -> DMatrix<f64> {
    let n = geometry.n_sites();
    let mut m = DMatrix::zeros(n, n);
    for b in geometry.bonds() {
        m[(b.site_a, b.site_b)] = -1.0;
        m[(b.site_b, b.site_a)] = -1.0;
    }
    m
}

/// Ground energy of the non-interacting model: each spin species fills the
/// lowest single-particle levels.
pub fn free_fermion_ground(geometry: &LatticeGeometry, n_up: usize, n_down: usize) -> Result<f64> {
    let n = geometry.n_sites();
    if n_up > n || n_down > n {
        return Err(Error::InvalidSector(format!("({n_up}, {n_down}) electrons on {n} sites")));
    }
    let (levels, _) = sorted_eigen(hopping_matrix(geometry));
    Ok(levels[..n_up].iter().sum::<f64>() + levels[..n_down].iter().sum::<f64>())
}

/// Smallest and largest eigenvalue of a sector block.
pub fn sector_extremes(geometry: &LatticeGeometry, u_over_t: f64, n_up: usize, n_down: usize) -> Result<(f64, f64)> {
    let terms = build_hubbard(geometry, u_over_t)?;
    let (_, h) = sector_matrix(&terms, geometry, n_up, n_down)?;
    let (values, _) = sorted_eigen(h);
    Ok((values[0], values[values.len() - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_site_ground(u: f64) -> f64 {
        (u - (u * u + 16.0).sqrt()) / 2.0
    }

    #[test]
    fn two_site_closed_form() {
        let g = LatticeGeometry::new(1, 2).unwrap();
        for u in [0.0, 1.0, 2.0, 4.0] {
            let s = exact_spectrum(&g, u, 1, 1, 1).unwrap();
            assert!((s.energies[0] - two_site_ground(u)).abs() < 1e-12);
        }
        let s = exact_spectrum(&g, 4.0, 1, 1, 1).unwrap();
        assert!((s.energies[0] - (2.0 - 8f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn square_u0_is_minus_four() {
        let g = LatticeGeometry::new(2, 2).unwrap();
        let s = exact_spectrum(&g, 0.0, 2, 2, 1).unwrap();
        assert!((s.energies[0] + 4.0).abs() < 1e-10);
        assert!((free_fermion_ground(&g, 2, 2).unwrap() + 4.0).abs() < 1e-12);
    }

    #[test]
    fn chain_u0_open_modes() {
        let g = LatticeGeometry::new(1, 4).unwrap();
        let modes: f64 = (1..=2).map(|k| -2.0 * (k as f64 * std::f64::consts::PI / 5.0).cos()).sum();
        let s = exact_spectrum(&g, 0.0, 2, 2, 1).unwrap();
        assert!((s.energies[0] - 2.0 * modes).abs() < 1e-10);
        assert!((free_fermion_ground(&g, 2, 2).unwrap() - 2.0 * modes).abs() < 1e-12);
        assert!((2.0 * modes + 4.4721).abs() < 1e-4);
    }

    #[test]
    fn vacuum() {
        let g = LatticeGeometry::new(2, 2).unwrap();
        assert_eq!(free_fermion_ground(&g, 0, 0).unwrap(), 0.0);
        assert_eq!(exact_spectrum(&g, 1.0, 0, 0, 1).unwrap().energies, vec![0.0]);
    }

    #[test]
    fn truncation_flag() {
        let g = LatticeGeometry::new(1, 1).unwrap();
        let s = exact_spectrum(&g, 5.0, 1, 1, 3).unwrap();
        assert_eq!(s.energies, vec![5.0]);
        assert!(s.truncated);
    }

    #[test]
    fn u0_matches_free_fermions_everywhere() {
        for (r, c) in [(1, 4), (2, 2)] {
            let g = LatticeGeometry::new(r, c).unwrap();
            for nu in 0..=4 {
                for nd in 0..=4 {
                    let e = exact_spectrum(&g, 0.0, nu, nd, 1).unwrap().energies[0];
                    let f = free_fermion_ground(&g, nu, nd).unwrap();
                    assert!((e - f).abs() < 1e-9, "{r}x{c} ({nu},{nd}): {e} vs {f}");
                }
            }
        }
    }

    #[test]
    fn spin_flip_symmetry() {
        let g = LatticeGeometry::new(2, 2).unwrap();
        for (nu, nd) in [(1, 2), (0, 3), (1, 3), (3, 4)] {
            let a = exact_spectrum(&g, 2.5, nu, nd, 100).unwrap();
            let b = exact_spectrum(&g, 2.5, nd, nu, 100).unwrap();
            for (x, y) in a.energies.iter().zip(&b.energies) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ground_rises_with_u() {
        let g = LatticeGeometry::new(1, 4).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for step in 0..=16 {
            let u = step as f64 * 0.25;
            let e = exact_spectrum(&g, u, 2, 2, 1).unwrap().energies[0];
            assert!(e >= prev - 1e-12);
            prev = e;
        }
    }

    #[test]
    fn eigenstates_are_normalized_and_in_sector() {
        let g = LatticeGeometry::new(1, 4).unwrap();
        let states = exact_eigenstates(&g, 2.0, 2, 1, 3).unwrap();
        for (_, psi) in &states {
            let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            for (b, a) in psi.iter().enumerate() {
                if a.norm() > 0.0 {
                    assert_eq!((b & 0xF).count_ones(), 2);
                    assert_eq!((b >> 4).count_ones(), 1);
                }
            }
        }
    }
}
