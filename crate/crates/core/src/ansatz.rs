//! Hybrid Hamiltonian-variational circuit with one free angle per gate.
//!
//! Layout: X preparation on the reference orbitals, a brick-wall of Givens
//! rotations inside each spin block, then `layers` repetitions of
//! (same-spin hopping gates, onsite gates). Hopping between orbitals that are
//! not neighbours on the qubit line is bridged with a fermionic-swap chain
//! that is undone right after the hopping gate.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeGeometry, Spin};
use crate::simulator::{GateKind, Matrix4, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzVariant {
    #[default]
    ModifiedHopping,
    PlainHopping,
    NumberPreserving,
}

impl AnsatzVariant {
    fn hopping_kind(self) -> GateKind {
        match self {
            AnsatzVariant::ModifiedHopping => GateKind::ModHop,
            AnsatzVariant::PlainHopping => GateKind::Hop,
            AnsatzVariant::NumberPreserving => GateKind::UNp,
        }
    }
}

impl std::str::FromStr for AnsatzVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modified_hopping" | "mod_hop" => Ok(Self::ModifiedHopping),
            "plain_hopping" | "hop" => Ok(Self::PlainHopping),
            "number_preserving" | "npa" => Ok(Self::NumberPreserving),
            other => Err(Error::Config(format!("unknown ansatz variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub layers: usize,
    pub use_fswap: bool,
    pub variant: AnsatzVariant,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self { layers: 2, use_fswap: true, variant: AnsatzVariant::ModifiedHopping }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub kind: GateKind,
    pub targets: (usize, usize),
    pub params: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterizedCircuit {
    pub n_qubits: usize,
    pub n_up: usize,
    pub n_down: usize,
    /// Qubits flipped to `|1⟩` before any gate.
    pub prep: Vec<usize>,
    pub slots: Vec<Slot>,
    pub n_params: usize,
    /// Set when a 2D lattice was built without fermionic swaps, so vertical
    /// hopping gates ignore the Jordan–Wigner string.
    pub fswap_disabled_2d: bool,
}

/// Lowest snake-index orbitals of each spin block.
pub fn reference_occupation(geometry: &LatticeGeometry, n_up: usize, n_down: usize) -> Result<Vec<usize>> {
    let n = geometry.n_sites();
    if n_up > n || n_down > n {
        return Err(Error::InvalidSector(format!("({n_up}, {n_down}) electrons on {n} sites")));
    }
    Ok((0..n_up).chain(n..n + n_down).collect())
}

struct Builder {
    slots: Vec<Slot>,
    n_params: usize,
}

impl Builder {
    fn push(&mut self, kind: GateKind, a: usize, b: usize) {
        let params = (self.n_params..self.n_params + kind.n_params()).collect();
        self.n_params += kind.n_params();
        self.slots.push(Slot { kind, targets: (a, b), params });
    }

    fn givens_layer(&mut self, geometry: &LatticeGeometry) {
        let rounds = geometry.n_sites().div_ceil(2);
        for spin in Spin::BOTH {
            let block = geometry.spin_block(spin);
            for _ in 0..rounds {
                for parity in [0, 1] {
                    let mut q = block.start + parity;
                    while q + 1 < block.end {
                        self.push(GateKind::Givens, q, q + 1);
                        q += 2;
                    }
                }
            }
        }
    }

    fn hopping(&mut self, kind: GateKind, a: usize, b: usize, use_fswap: bool) {
        let (lo, hi) = (a.min(b), a.max(b));
        if hi - lo == 1 || !use_fswap {
            self.push(kind, lo, hi);
            return;
        }
        // carry orbital `lo` up to `hi - 1`, hop, then carry it back
        for q in lo..hi - 1 {
            self.push(GateKind::Fswap, q, q + 1);
        }
        self.push(kind, hi - 1, hi);
        for q in (lo..hi - 1).rev() {
            self.push(GateKind::Fswap, q, q + 1);
        }
    }
}

pub fn build_ansatz(
    geometry: &LatticeGeometry,
    n_up: usize,
    n_down: usize,
    config: &AnsatzConfig,
) -> Result<ParameterizedCircuit> {
    if config.layers == 0 {
        return Err(Error::Config("ansatz needs at least one layer".into()));
    }
    let prep = reference_occupation(geometry, n_up, n_down)?;
    let mut b = Builder { slots: Vec::new(), n_params: 0 };
    b.givens_layer(geometry);
    let hop_kind = config.variant.hopping_kind();
    for _ in 0..config.layers {
        let bonds = geometry.bonds();
        for spin in Spin::BOTH {
            for bond in &bonds {
                let qa = geometry.qubit_index(bond.site_a, spin)?;
                let qb = geometry.qubit_index(bond.site_b, spin)?;
                b.hopping(hop_kind, qa, qb, config.use_fswap);
            }
        }
        for site in 0..geometry.n_sites() {
            let up = geometry.qubit_index(site, Spin::Up)?;
            let down = geometry.qubit_index(site, Spin::Down)?;
            b.push(GateKind::Onsite, up, down);
        }
    }
    Ok(ParameterizedCircuit {
        n_qubits: geometry.n_qubits(),
        n_up,
        n_down,
        prep,
        slots: b.slots,
        n_params: b.n_params,
        fswap_disabled_2d: !config.use_fswap && !geometry.is_one_dimensional(),
    })
}

/// Reference preparation followed by the Givens brick-wall only; reaches
/// free-fermion Slater determinants.
pub fn build_givens_circuit(geometry: &LatticeGeometry, n_up: usize, n_down: usize) -> Result<ParameterizedCircuit> {
    let prep = reference_occupation(geometry, n_up, n_down)?;
    let mut b = Builder { slots: Vec::new(), n_params: 0 };
    b.givens_layer(geometry);
    Ok(ParameterizedCircuit {
        n_qubits: geometry.n_qubits(),
        n_up,
        n_down,
        prep,
        slots: b.slots,
        n_params: b.n_params,
        fswap_disabled_2d: false,
    })
}

impl ParameterizedCircuit {
    pub fn reference_state(&self) -> Statevector {
        Statevector::from_occupation(self.n_qubits, &self.prep).expect("prep validated at build time")
    }

    pub fn run(&self, params: &[f64]) -> Result<Statevector> {
        let mut state = self.reference_state();
        self.run_into(params, &mut state)?;
        Ok(state)
    }

    /// Resets `state` to the reference and applies every slot.
    pub fn run_into(&self, params: &[f64], state: &mut Statevector) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::DimensionMismatch { expected: self.n_params, got: params.len() });
        }
        *state = self.reference_state();
        let mut angles = [0.0; 2];
        for slot in &self.slots {
            for (a, &p) in angles.iter_mut().zip(&slot.params) {
                *a = params[p];
            }
            let m: Matrix4 = slot.kind.matrix(&angles);
            state.apply_matrix(&m, slot.targets.0, slot.targets.1)?;
        }
        Ok(())
    }

    /// Net qubit permutation from all fermionic swaps: entry `q` is the
    /// position where the mode that started on `q` ends up.
    pub fn fswap_permutation(&self) -> Vec<usize> {
        let mut at: Vec<usize> = (0..self.n_qubits).collect();
        for slot in self.slots.iter().filter(|s| s.kind == GateKind::Fswap) {
            let (a, b) = slot.targets;
            at.swap(a, b);
        }
        let mut out = vec![0; self.n_qubits];
        for (pos, &mode) in at.iter().enumerate() {
            out[mode] = pos;
        }
        out
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.slots.iter().filter(|s| s.kind == kind).count()
    }

    /// One line per slot: `kind a b p0,p1`.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let prep: Vec<String> = self.prep.iter().map(|q| q.to_string()).collect();
        let _ = writeln!(out, "x {}", prep.join(","));
        for s in &self.slots {
            let params: Vec<String> = s.params.iter().map(|p| p.to_string()).collect();
            let params = if params.is_empty() { "-".to_string() } else { params.join(",") };
            let _ = writeln!(out, "{} {} {} {}", s.kind, s.targets.0, s.targets.1, params);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_occupations() {
        let chain = LatticeGeometry::new(1, 4).unwrap();
        assert_eq!(reference_occupation(&chain, 2, 2).unwrap(), vec![0, 1, 4, 5]);
        assert!(reference_occupation(&chain, 0, 0).unwrap().is_empty());
        let square = LatticeGeometry::new(2, 2).unwrap();
        assert_eq!(reference_occupation(&square, 1, 0).unwrap(), vec![0]);
        assert!(reference_occupation(&square, 5, 0).is_err());
    }

    #[test]
    fn two_site_circuit_shape() {
        let g = LatticeGeometry::new(1, 2).unwrap();
        let cfg = AnsatzConfig { layers: 1, ..Default::default() };
        let c = build_ansatz(&g, 1, 1, &cfg).unwrap();
        let kinds: Vec<_> = c.slots.iter().map(|s| s.kind).collect();
        assert_eq!(
            kinds,
            vec![GateKind::Givens, GateKind::Givens, GateKind::ModHop, GateKind::ModHop, GateKind::Onsite, GateKind::Onsite]
        );
        assert_eq!(c.prep, vec![0, 2]);
    }

    #[test]
    fn chain_parameter_count_is_stable() {
        let g = LatticeGeometry::new(1, 4).unwrap();
        let c = build_ansatz(&g, 2, 2, &AnsatzConfig::default()).unwrap();
        // 12 Givens + 2 layers x (6 modified hops x 2 + 4 onsite)
        assert_eq!(c.n_params, 44);
        assert_eq!(c.count(GateKind::Givens), 12);
        assert_eq!(c.count(GateKind::ModHop), 12);
        assert_eq!(c.count(GateKind::Onsite), 8);
        assert_eq!(c.count(GateKind::Fswap), 0);
    }

    #[test]
    fn single_site_has_only_onsite() {
        let g = LatticeGeometry::new(1, 1).unwrap();
        let c = build_ansatz(&g, 1, 1, &AnsatzConfig::default()).unwrap();
        assert!(c.slots.iter().all(|s| s.kind == GateKind::Onsite));
        assert_eq!(c.n_params, 2);
    }

    #[test]
    fn square_vertical_bond_bridged() {
        let g = LatticeGeometry::new(2, 2).unwrap();
        let c = build_ansatz(&g, 2, 2, &AnsatzConfig::default()).unwrap();
        // site 0 (qubit 0) to site 2 (qubit 3) needs two swaps in, two out, per spin per layer
        assert_eq!(c.count(GateKind::Fswap), 2 * 2 * 4);
        assert!(c.slots.iter().filter(|s| s.kind == GateKind::ModHop).all(|s| s.targets.1 - s.targets.0 == 1));
        let id: Vec<usize> = (0..8).collect();
        assert_eq!(c.fswap_permutation(), id);
        assert!(!c.fswap_disabled_2d);

        let flat = build_ansatz(&g, 2, 2, &AnsatzConfig { use_fswap: false, ..Default::default() }).unwrap();
        assert_eq!(flat.count(GateKind::Fswap), 0);
        assert!(flat.fswap_disabled_2d);
        assert_eq!(flat.n_params, c.n_params);
    }

    #[test]
    fn layers_add_constant_params() {
        let g = LatticeGeometry::new(2, 2).unwrap();
        let counts: Vec<usize> = (1..=4)
            .map(|p| build_ansatz(&g, 2, 1, &AnsatzConfig { layers: p, ..Default::default() }).unwrap().n_params)
            .collect();
        let diffs: Vec<usize> = counts.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(diffs.iter().all(|&d| d == diffs[0]));
    }

    #[test]
    fn every_param_used_once() {
        let g = LatticeGeometry::new(2, 2).unwrap();
        for variant in [AnsatzVariant::ModifiedHopping, AnsatzVariant::PlainHopping, AnsatzVariant::NumberPreserving] {
            let c = build_ansatz(&g, 2, 2, &AnsatzConfig { variant, ..Default::default() }).unwrap();
            let mut used: Vec<usize> = c.slots.iter().flat_map(|s| s.params.clone()).collect();
            used.sort_unstable();
            assert_eq!(used, (0..c.n_params).collect::<Vec<_>>());
        }
    }

    #[test]
    fn zero_params_reproduce_reference() {
        let g = LatticeGeometry::new(2, 2).unwrap();
        let c = build_ansatz(&g, 2, 1, &AnsatzConfig::default()).unwrap();
        let s = c.run(&vec![0.0; c.n_params]).unwrap();
        assert_eq!(s, c.reference_state());
    }

    #[test]
    fn param_length_checked() {
        let g = LatticeGeometry::new(1, 2).unwrap();
        let c = build_ansatz(&g, 1, 1, &AnsatzConfig::default()).unwrap();
        assert!(matches!(c.run(&[0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_layers_rejected() {
        let g = LatticeGeometry::new(1, 2).unwrap();
        assert!(build_ansatz(&g, 1, 1, &AnsatzConfig { layers: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn summary_lines() {
        let g = LatticeGeometry::new(1, 2).unwrap();
        let c = build_ansatz(&g, 1, 1, &AnsatzConfig { layers: 1, ..Default::default() }).unwrap();
        let expected = "x 0,2\ngivens 0 1 0\ngivens 2 3 1\nmod_hop 0 1 2,3\nmod_hop 2 3 4,5\nonsite 0 2 6\nonsite 1 3 7\n";
        assert_eq!(c.summary(), expected);
    }
}
