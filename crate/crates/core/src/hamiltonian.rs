//! Hubbard Hamiltonian in second quantization, its Jordan–Wigner image, and
//! two independent matrix routes: dense Pauli-sum materialization over the
//! full register, and a real occupation-basis block for a fixed `(N↑, N↓)`.
//!
//! Basis convention throughout the crate: bit `q` of a basis index is the
//! occupation of qubit `q`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, Spin};

/// Largest register `to_dense` will materialize.
pub const DENSE_QUBIT_CAP: usize = 14;

const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    /// `c (a†_i a_j + a†_j a_i)`
    Hopping,
    /// `c n_i n_j`
    Onsite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermionTerm {
    pub kind: TermKind,
    pub orbitals: (usize, usize),
    pub coefficient: f64,
}

impl FermionTerm {
    pub fn hopping(i: usize, j: usize, coefficient: f64) -> Self {
        Self { kind: TermKind::Hopping, orbitals: (i.min(j), i.max(j)), coefficient }
    }

    pub fn onsite(up: usize, down: usize, coefficient: f64) -> Self {
        Self { kind: TermKind::Onsite, orbitals: (up, down), coefficient }
    }
}

/// Hopping terms (`-1` per bond and spin) followed by one onsite term per site.
pub fn build_hubbard(geometry: &LatticeGeometry, u_over_t: f64) -> Result<Vec<FermionTerm>> {
    if !u_over_t.is_finite() || u_over_t < 0.0 {
        return Err(Error::UnsupportedParameter(format!(
            "U/t must be finite and non-negative, got {u_over_t}"
        )));
    }
    let mut terms = Vec::new();
    for spin in Spin::BOTH {
        for bond in geometry.bonds() {
            let a = geometry.qubit_index(bond.site_a, spin)?;
            let b = geometry.qubit_index(bond.site_b, spin)?;
            terms.push(FermionTerm::hopping(a, b, -1.0));
        }
    }
    for site in 0..geometry.n_sites() {
        let up = geometry.qubit_index(site, Spin::Up)?;
        let down = geometry.qubit_index(site, Spin::Down)?;
        terms.push(FermionTerm::onsite(up, down, u_over_t));
    }
    Ok(terms)
}

/// A Pauli string stored as X and Z bit masks; `Y` sets both bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn x(q: usize) -> Self {
        Self { x: 1 << q, z: 0 }
    }

    pub fn y(q: usize) -> Self {
        Self { x: 1 << q, z: 1 << q }
    }

    pub fn z(q: usize) -> Self {
        Self { x: 0, z: 1 << q }
    }

    /// Product of strings acting on disjoint qubits.
    pub fn disjoint_product(self, other: PauliString) -> Self {
        debug_assert_eq!((self.x | self.z) & (other.x | other.z), 0);
        Self { x: self.x | other.x, z: self.z | other.z }
    }

    pub fn letter(&self, q: usize) -> char {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    pub fn label(&self, n_qubits: usize) -> String {
        (0..n_qubits).map(|q| self.letter(q)).collect()
    }

    /// `P|b⟩ = phase(b) |b ^ x⟩`.
    #[inline]
    pub fn phase(&self, basis: u64) -> Complex64 {
        let sign = if (basis & self.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        i_pow((self.x & self.z).count_ones()) * sign
    }

    fn highest_qubit(&self) -> Option<usize> {
        let m = self.x | self.z;
        (m != 0).then(|| 63 - m.leading_zeros() as usize)
    }
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Real linear combination of Pauli strings, canonicalized: sorted by label,
/// duplicates merged, near-zero coefficients dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(n_qubits: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Self {
        let mut merged: BTreeMap<String, (f64, PauliString)> = BTreeMap::new();
        for (c, p) in terms {
            let entry = merged.entry(p.label(n_qubits)).or_insert((0.0, p));
            entry.0 += c;
        }
        let terms = merged.into_values().filter(|(c, _)| c.abs() >= DROP_TOL).collect();
        Self { n_qubits, terms }
    }

    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        PauliSum::new(
            self.n_qubits.max(other.n_qubits),
            self.terms.iter().chain(other.terms.iter()).copied(),
        )
    }

    /// One `"coeff LABEL"` line per term.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (c, p) in &self.terms {
            let _ = writeln!(out, "{c} {}", p.label(self.n_qubits));
        }
        out
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// Jordan–Wigner image of one fermionic term.
pub fn jordan_wigner(term: &FermionTerm, n_qubits: usize) -> Result<PauliSum> {
    let (i, j) = term.orbitals;
    if i >= n_qubits || j >= n_qubits {
        return Err(Error::Index(format!("orbital ({i}, {j}) outside {n_qubits} qubits")));
    }
    if n_qubits > 64 {
        return Err(Error::Index(format!("at most 64 qubits supported, got {n_qubits}")));
    }
    if i == j {
        return Err(Error::MalformedTerm(format!("{:?} term on a single orbital {i}", term.kind)));
    }
    let c = term.coefficient;
    Ok(match term.kind {
        TermKind::Hopping => {
            let (lo, hi) = (i.min(j), i.max(j));
            let string = (lo + 1..hi).fold(PauliString::IDENTITY, |acc, q| acc.disjoint_product(PauliString::z(q)));
            let xx = PauliString::x(lo).disjoint_product(PauliString::x(hi)).disjoint_product(string);
            let yy = PauliString::y(lo).disjoint_product(PauliString::y(hi)).disjoint_product(string);
            PauliSum::new(n_qubits, [(0.5 * c, xx), (0.5 * c, yy)])
        }
        TermKind::Onsite => {
            let zi = PauliString::z(i);
            let zj = PauliString::z(j);
            PauliSum::new(
                n_qubits,
                [
                    (0.25 * c, PauliString::IDENTITY),
                    (-0.25 * c, zi),
                    (-0.25 * c, zj),
                    (0.25 * c, zi.disjoint_product(zj)),
                ],
            )
        }
    })
}

/// Sum of the Jordan–Wigner images of all terms.
pub fn qubit_hamiltonian(terms: &[FermionTerm], n_qubits: usize) -> Result<PauliSum> {
    let mut all = Vec::new();
    for t in terms {
        all.extend_from_slice(jordan_wigner(t, n_qubits)?.terms());
    }
    Ok(PauliSum::new(n_qubits, all))
}

/// Dense `2^n x 2^n` matrix of a Pauli sum.
pub fn to_dense(psum: &PauliSum, n_qubits: usize) -> Result<DMatrix<Complex64>> {
    if n_qubits > DENSE_QUBIT_CAP {
        return Err(Error::TooLarge { n_qubits, cap: DENSE_QUBIT_CAP });
    }
    if let Some(q) = psum.terms.iter().filter_map(|(_, p)| p.highest_qubit()).max() {
        if q >= n_qubits {
            return Err(Error::DimensionMismatch { expected: n_qubits, got: q + 1 });
        }
    }
    let dim = 1usize << n_qubits;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for &(c, p) in &psum.terms {
        for b in 0..dim as u64 {
            let row = (b ^ p.x) as usize;
            m[(row, b as usize)] += p.phase(b) * c;
        }
    }
    Ok(m)
}

/// Pauli sum compiled for repeated matrix-free application.
///
/// Terms sharing an X mask act as one permutation `b -> b ^ x` followed by a
/// diagonal, so each group stores its diagonal once.
#[derive(Debug, Clone)]
pub struct PauliOperator {
    n_qubits: usize,
    groups: Vec<(u64, Vec<Complex64>)>,
}

impl PauliOperator {
    pub fn compile(psum: &PauliSum) -> Self {
        let n_qubits = psum.n_qubits;
        let dim = 1usize << n_qubits;
        let mut by_x: BTreeMap<u64, Vec<(f64, PauliString)>> = BTreeMap::new();
        for &(c, p) in &psum.terms {
            by_x.entry(p.x).or_default().push((c, p));
        }
        let groups = by_x
            .into_iter()
            .map(|(x, terms)| {
                let diag = (0..dim as u64)
                    .map(|b| terms.iter().map(|(c, p)| p.phase(b) * *c).sum())
                    .collect();
                (x, diag)
            })
            .collect();
        Self { n_qubits, groups }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// `out = H psi`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (x, diag) in &self.groups {
            let x = *x as usize;
            for (b, (&amp, &d)) in psi.iter().zip(diag.iter()).enumerate() {
                out[b ^ x] += d * amp;
            }
        }
    }

    /// `⟨psi|H|psi⟩` without allocating.
    pub fn expectation(&self, psi: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, diag) in &self.groups {
            let x = *x as usize;
            for (b, (&amp, &d)) in psi.iter().zip(diag.iter()).enumerate() {
                acc += psi[b ^ x].conj() * d * amp;
            }
        }
        acc
    }
}

/// Occupation-number basis of one `(N↑, N↓)` sector, ascending bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    pub n_up: usize,
    pub n_down: usize,
    pub states: Vec<u64>,
}

impl SectorBasis {
    pub fn new(geometry: &LatticeGeometry, n_up: usize, n_down: usize) -> Result<Self> {
        let n = geometry.n_sites();
        if n_up > n || n_down > n {
            return Err(Error::InvalidSector(format!(
                "({n_up}, {n_down}) electrons on {n} sites"
            )));
        }
        let ups = masks_with_popcount(n, n_up);
        let downs = masks_with_popcount(n, n_down);
        let mut states: Vec<u64> = downs
            .iter()
            .flat_map(|d| ups.iter().map(move |u| u | (d << n)))
            .collect();
        states.sort_unstable();
        Ok(Self { n_up, n_down, states })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, state: u64) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

fn masks_with_popcount(n_bits: usize, k: usize) -> Vec<u64> {
    (0u64..1 << n_bits).filter(|m| m.count_ones() as usize == k).collect()
}

/// Real symmetric block of the Hamiltonian in one sector, built directly in
/// the occupation basis with Jordan–Wigner ordering signs.
pub fn sector_matrix(
    terms: &[FermionTerm],
    geometry: &LatticeGeometry,
    n_up: usize,
    n_down: usize,
) -> Result<(SectorBasis, DMatrix<f64>)> {
    let basis = SectorBasis::new(geometry, n_up, n_down)?;
    let n_qubits = geometry.n_qubits();
    let dim = basis.dim();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for term in terms {
        let (i, j) = term.orbitals;
        if i >= n_qubits || j >= n_qubits {
            return Err(Error::Index(format!("orbital ({i}, {j}) outside {n_qubits} qubits")));
        }
        if i == j {
            return Err(Error::MalformedTerm(format!("{:?} term on a single orbital {i}", term.kind)));
        }
        let (bi, bj) = (1u64 << i, 1u64 << j);
        match term.kind {
            TermKind::Onsite => {
                for (col, &s) in basis.states.iter().enumerate() {
                    if s & bi != 0 && s & bj != 0 {
                        h[(col, col)] += term.coefficient;
                    }
                }
            }
            TermKind::Hopping => {
                let (lo, hi) = (i.min(j), i.max(j));
                let between = ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1);
                for (col, &s) in basis.states.iter().enumerate() {
                    // a†_i a_j + a†_j a_i moves one electron across the pair
                    if (s & bi != 0) == (s & bj != 0) {
                        continue;
                    }
                    let target = s ^ bi ^ bj;
                    let sign = if (s & between).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                    let row = basis.index_of(target).expect("hopping preserves the sector");
                    h[(row, col)] += term.coefficient * sign;
                }
            }
        }
    }
    Ok((basis, h))
}

/// Restriction of a full-register matrix to the rows and columns of a sector.
pub fn restrict_to_sector(full: &DMatrix<Complex64>, basis: &SectorBasis) -> DMatrix<Complex64> {
    let dim = basis.dim();
    DMatrix::from_fn(dim, dim, |r, c| full[(basis.states[r] as usize, basis.states[c] as usize)])
}
