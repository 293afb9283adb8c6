//! Toric-code lattice simulation.
//!
//! A distance-`d` code lives on a `d x d` periodic square lattice with one
//! qubit per edge, `2d^2` in total. Indexing convention:
//!
//! * horizontal edge `h(r, c) = r*d + c` sits on the top side of cell
//!   `(r, c)`,
//! * vertical edge `v(r, c) = d^2 + r*d + c` sits on the left side of cell
//!   `(r, c)`,
//!
//! with all coordinate arithmetic mod `d`. The plaquette at `(r, c)` is the
//! Z-type stabilizer on the four edges bounding that cell,
//! `{h(r,c), h(r+1,c), v(r,c), v(r,c+1)}`; it detects X and Y components.
//! The star at `(r, c)` is the X-type stabilizer on the four edges meeting
//! the cell's top-left vertex, `{h(r,c), h(r,c-1), v(r,c), v(r-1,c)}`; it
//! detects Z and Y components.
//!
//! Logical classes are parities across homologically non-trivial cuts. The
//! X-type pair is read on `{h(0,c) : c}` and `{v(r,0) : r}`, the Z-type pair
//! on `{v(0,c) : c}` and `{h(r,0) : r}`. Each cut intersects every stabilizer
//! in an even number of edges, so the parities are gauge invariants; a
//! non-contractible loop of errors crosses exactly one cut an odd number of
//! times.
//!
//! States track the accumulated Pauli frame, not amplitudes: composition is
//! the Pauli group modulo phase.

use rand::Rng;

use crate::error::Error;
use crate::Result;

/// Single-qubit Pauli, phases dropped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// True for X and Y: the components plaquettes detect.
    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// True for Z and Y: the components stars detect.
    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    fn from_components(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    /// Group product modulo phase; every element is its own inverse.
    pub fn compose(self, other: Pauli) -> Pauli {
        Pauli::from_components(self.has_x() ^ other.has_x(), self.has_z() ^ other.has_z())
    }
}

/// Independent single-qubit noise applied to every edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    /// X with probability `p`.
    Bitflip { p: f64 },
    /// With probability `p`, one of X, Y, Z chosen uniformly.
    Depolarizing { p: f64 },
    /// X, Y, and Z each applied independently with probability `p/3`.
    /// Alternative reading of the channel; differs from `Depolarizing`
    /// at O(p^2).
    DepolarizingIndependent { p: f64 },
}

/// Parities of the four non-contractible cuts; defined only on states with
/// an empty syndrome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogicalClass {
    /// X-component parities on (`{h(0,c)}`, `{v(r,0)}`).
    pub x: (bool, bool),
    /// Z-component parities on (`{v(0,c)}`, `{h(r,0)}`).
    pub z: (bool, bool),
}

impl LogicalClass {
    pub fn any(&self) -> bool {
        self.x.0 || self.x.1 || self.z.0 || self.z.1
    }
}

/// Horizontal edge index with periodic wrap.
pub fn h_index(d: usize, r: usize, c: usize) -> usize {
    (r % d) * d + (c % d)
}

/// Vertical edge index with periodic wrap.
pub fn v_index(d: usize, r: usize, c: usize) -> usize {
    d * d + (r % d) * d + (c % d)
}

/// Edges of the plaquette (Z stabilizer) at `(r, c)`.
pub fn plaquette_edges(d: usize, r: usize, c: usize) -> [usize; 4] {
    [
        h_index(d, r, c),
        h_index(d, r + 1, c),
        v_index(d, r, c),
        v_index(d, r, c + 1),
    ]
}

/// Edges of the star (X stabilizer) at `(r, c)`.
pub fn star_edges(d: usize, r: usize, c: usize) -> [usize; 4] {
    [
        h_index(d, r, c),
        h_index(d, r, c + d - 1),
        v_index(d, r, c),
        v_index(d, r + d - 1, c),
    ]
}

/// Measured stabilizer outcomes, `true` marking a violated (defect) site.
/// Both grids are row-major `d x d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syndrome {
    d: usize,
    plaquettes: Vec<bool>,
    stars: Vec<bool>,
}

impl Syndrome {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn plaquettes(&self) -> &[bool] {
        &self.plaquettes
    }

    pub fn stars(&self) -> &[bool] {
        &self.stars
    }

    pub fn is_empty(&self) -> bool {
        !self.plaquettes.iter().chain(&self.stars).any(|&v| v)
    }

    /// Violated plaquette coordinates in row-major order.
    pub fn violated_plaquettes(&self) -> Vec<(usize, usize)> {
        Self::violated(self.d, &self.plaquettes)
    }

    /// Violated star coordinates in row-major order.
    pub fn violated_stars(&self) -> Vec<(usize, usize)> {
        Self::violated(self.d, &self.stars)
    }

    fn violated(d: usize, grid: &[bool]) -> Vec<(usize, usize)> {
        grid.iter()
            .enumerate()
            .filter(|&(_, &v)| v)
            .map(|(i, _)| (i / d, i % d))
            .collect()
    }
}

/// Pauli frame on the `2d^2` edge qubits of a distance-`d` toric code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricState {
    d: usize,
    frame: Vec<Pauli>,
}

impl ToricState {
    /// Error-free state. Distances below 2 leave stabilizers with repeated
    /// edges and are rejected.
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::BadDistance(d));
        }
        Ok(ToricState {
            d,
            frame: vec![Pauli::I; 2 * d * d],
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn qubit_count(&self) -> usize {
        self.frame.len()
    }

    pub fn frame(&self) -> &[Pauli] {
        &self.frame
    }

    pub fn pauli(&self, qubit: usize) -> Pauli {
        self.frame[qubit]
    }

    /// Compose `op` onto one qubit. Applying the same op twice restores the
    /// previous state.
    pub fn apply_pauli(&mut self, qubit: usize, op: Pauli) -> Result<()> {
        if qubit >= self.frame.len() {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                count: self.frame.len(),
            });
        }
        self.frame[qubit] = self.frame[qubit].compose(op);
        Ok(())
    }

    /// Sample one noise round over all qubits in index order; returns how
    /// many qubits were hit by a non-identity error.
    pub fn apply_noise<R: Rng + ?Sized>(&mut self, model: NoiseModel, rng: &mut R) -> usize {
        let mut hits = 0;
        for q in 0..self.frame.len() {
            let op = match model {
                NoiseModel::Bitflip { p } => {
                    if rng.random::<f64>() < p {
                        Pauli::X
                    } else {
                        Pauli::I
                    }
                }
                NoiseModel::Depolarizing { p } => {
                    if rng.random::<f64>() < p {
                        match rng.random_range(0..3u8) {
                            0 => Pauli::X,
                            1 => Pauli::Y,
                            _ => Pauli::Z,
                        }
                    } else {
                        Pauli::I
                    }
                }
                NoiseModel::DepolarizingIndependent { p } => {
                    let mut op = Pauli::I;
                    for single in [Pauli::X, Pauli::Y, Pauli::Z] {
                        if rng.random::<f64>() < p / 3.0 {
                            op = op.compose(single);
                        }
                    }
                    op
                }
            };
            if op != Pauli::I {
                self.frame[q] = self.frame[q].compose(op);
                hits += 1;
            }
        }
        hits
    }

    /// Measure all stabilizers.
    pub fn syndrome(&self) -> Syndrome {
        let d = self.d;
        let mut plaquettes = vec![false; d * d];
        let mut stars = vec![false; d * d];
        for r in 0..d {
            for c in 0..d {
                plaquettes[r * d + c] = plaquette_edges(d, r, c)
                    .iter()
                    .fold(false, |acc, &e| acc ^ self.frame[e].has_x());
                stars[r * d + c] = star_edges(d, r, c)
                    .iter()
                    .fold(false, |acc, &e| acc ^ self.frame[e].has_z());
            }
        }
        Syndrome {
            d,
            plaquettes,
            stars,
        }
    }

    /// Cut parities classifying the homology class of the frame. Only
    /// meaningful once every stabilizer is satisfied.
    pub fn logical_class(&self) -> Result<LogicalClass> {
        if !self.syndrome().is_empty() {
            return Err(Error::SyndromeNotEmpty);
        }
        let d = self.d;
        let mut class = LogicalClass {
            x: (false, false),
            z: (false, false),
        };
        for i in 0..d {
            class.x.0 ^= self.frame[h_index(d, 0, i)].has_x();
            class.x.1 ^= self.frame[v_index(d, i, 0)].has_x();
            class.z.0 ^= self.frame[v_index(d, 0, i)].has_z();
            class.z.1 ^= self.frame[h_index(d, i, 0)].has_z();
        }
        Ok(class)
    }

    /// True when the frame is a non-trivial logical operator (decoding
    /// failed despite a clean syndrome).
    pub fn has_logical_error(&self) -> Result<bool> {
        Ok(self.logical_class()?.any())
    }
}
