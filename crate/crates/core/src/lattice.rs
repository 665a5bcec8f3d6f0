//! Rectangular lattice geometry with snake-ordered spin orbitals.
//!
//! Sites are numbered row-major (`site = row * cols + col`). Orbitals are
//! laid out on qubits boustrophedon-style: left to right on even rows,
//! right to left on odd rows, with the whole spin-up block first and the
//! spin-down block offset by `n_sites`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on `2 * rows * cols`.
pub const DEFAULT_QUBIT_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// A nearest-neighbour pair of sites, `site_a < site_b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub site_a: usize,
    pub site_b: usize,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeGeometry {
    rows: usize,
    cols: usize,
}

impl LatticeGeometry {
    /// Builds a `rows x cols` open-boundary lattice under the default qubit cap.
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        Self::with_cap(rows, cols, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap(rows: usize, cols: usize, qubit_cap: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGeometry(format!(
                "dimensions must be positive, got {rows} rows x {cols} cols"
            )));
        }
        let n_qubits = rows
            .checked_mul(cols)
            .and_then(|s| s.checked_mul(2))
            .ok_or_else(|| Error::InvalidGeometry("lattice size overflows".into()))?;
        if n_qubits > qubit_cap {
            return Err(Error::InvalidGeometry(format!(
                "{rows}x{cols} lattice needs {n_qubits} qubits, cap is {qubit_cap}"
            )));
        }
        Ok(Self { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_sites()
    }

    pub fn is_one_dimensional(&self) -> bool {
        self.rows == 1 || self.cols == 1
    }

    /// Position of `site` along the snake path, in `[0, n_sites)`.
    pub fn snake_position(&self, site: usize) -> Result<usize> {
        self.check_site(site)?;
        let (row, col) = (site / self.cols, site % self.cols);
        let offset = if row % 2 == 0 { col } else { self.cols - 1 - col };
        Ok(row * self.cols + offset)
    }

    pub fn qubit_index(&self, site: usize, spin: Spin) -> Result<usize> {
        let pos = self.snake_position(site)?;
        Ok(match spin {
            Spin::Up => pos,
            Spin::Down => pos + self.n_sites(),
        })
    }

    /// Inverse of [`qubit_index`](Self::qubit_index).
    pub fn orbital_of(&self, qubit: usize) -> Result<(usize, Spin)> {
        if qubit >= self.n_qubits() {
            return Err(Error::Index(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits()
            )));
        }
        let n = self.n_sites();
        let (pos, spin) = if qubit < n { (qubit, Spin::Up) } else { (qubit - n, Spin::Down) };
        let row = pos / self.cols;
        let offset = pos % self.cols;
        let col = if row.is_multiple_of(2) { offset } else { self.cols - 1 - offset };
        Ok((row * self.cols + col, spin))
    }

    /// All qubits of one spin block, in qubit order.
    pub fn spin_block(&self, spin: Spin) -> std::ops::Range<usize> {
        let n = self.n_sites();
        match spin {
            Spin::Up => 0..n,
            Spin::Down => n..2 * n,
        }
    }

    /// Nearest-neighbour bonds with open boundaries, each unordered pair once.
    ///
    /// Order: sites row-major, for each site its right neighbour then its
    /// lower neighbour.
    pub fn bonds(&self) -> Vec<Bond> {
        let mut out = Vec::new();
        for row in 0..self.rows {
            for col in 0..self.cols {
                let site = row * self.cols + col;
                if col + 1 < self.cols {
                    out.push(Bond { site_a: site, site_b: site + 1, orientation: Orientation::Horizontal });
                }
                if row + 1 < self.rows {
                    out.push(Bond { site_a: site, site_b: site + self.cols, orientation: Orientation::Vertical });
                }
            }
        }
        out
    }

    /// Short tag such as `"4x1"` (width x height).
    pub fn tag(&self) -> String {
        format!("{}x{}", self.cols, self.rows)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites() {
            return Err(Error::Index(format!("site {site} out of range for {} sites", self.n_sites())));
        }
        Ok(())
    }
}

impl fmt::Display for LatticeGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// Parses `"WxH"` strings: `"4x1"` is a four-site chain, `"4x2"` two rows of four.
impl FromStr for LatticeGeometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGeometry(format!("expected WIDTHxHEIGHT such as \"2x2\", got {s:?}"));
        let (w, h) = s.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        let cols: usize = w.trim().parse().map_err(|_| bad())?;
        let rows: usize = h.trim().parse().map_err(|_| bad())?;
        LatticeGeometry::new(rows, cols)
    }
}
