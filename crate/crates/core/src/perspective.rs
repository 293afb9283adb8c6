//! Syndrome perspectives: translated defect-centered views of the lattice.
//!
//! The decoder never sees raw coordinates. For every defect the syndrome is
//! translated so that defect sits at `(0, 0)`, giving one candidate "view"
//! per defect; the same network scores all views and the best output wins.
//! Exploiting the torus translation symmetry this way is what lets one small
//! network decode anywhere on the lattice.
//!
//! Ordering is normative because ties break towards low indices:
//! perspectives enumerate violated plaquettes in row-major order, then (in
//! depolarizing mode) violated stars in row-major order. Bitflip mode reads
//! plaquettes only, `d^2` inputs and 4 actions (Pauli X on one of the four
//! edges of the centered plaquette). Depolarizing mode concatenates the
//! shifted plaquette grid and the shifted star grid, `2 d^2` inputs, and has
//! 12 actions: `slot = index % 4`, `pauli = index / 4` mapping 0 to X, 1 to
//! Y, 2 to Z. Slot edges in shifted coordinates are
//! `[h(0,0), h(1,0), v(0,0), v(0,1)]` for a plaquette-centered view and
//! `[h(0,0), h(0,d-1), v(0,0), v(d-1,0)]` for a star-centered one: exactly
//! the four edges of the centered stabilizer.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::network::Phenotype;
use crate::scalar::Scalar;
use crate::toric::{h_index, v_index, Pauli, Syndrome};
use crate::Result;

/// Task family: decides input encoding and action set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Bitflip,
    Depolarizing,
}

impl NoiseKind {
    pub fn n_inputs(self, d: usize) -> usize {
        match self {
            NoiseKind::Bitflip => d * d,
            NoiseKind::Depolarizing => 2 * d * d,
        }
    }

    pub fn n_actions(self) -> usize {
        match self {
            NoiseKind::Bitflip => 4,
            NoiseKind::Depolarizing => 12,
        }
    }

    /// Lattice distance implied by an input arity, if any.
    pub fn d_for_inputs(self, n_in: usize) -> Option<usize> {
        let cells = match self {
            NoiseKind::Bitflip => n_in,
            NoiseKind::Depolarizing => {
                if !n_in.is_multiple_of(2) {
                    return None;
                }
                n_in / 2
            }
        };
        let d = (cells as f64).sqrt().round() as usize;
        (d >= 2 && d * d == cells).then_some(d)
    }

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Bitflip => "bitflip",
            NoiseKind::Depolarizing => "depolarizing",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bitflip" => Ok(NoiseKind::Bitflip),
            "depolarizing" => Ok(NoiseKind::Depolarizing),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise kind {other:?}; expected \"bitflip\" or \"depolarizing\""
            ))),
        }
    }
}

/// Which stabilizer type the view is centered on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefectKind {
    Plaquette,
    Star,
}

/// One defect-centered view.
#[derive(Clone, Debug, PartialEq)]
pub struct Perspective<F> {
    pub d: usize,
    pub mode: NoiseKind,
    pub defect_kind: DefectKind,
    /// Translation applied to the grids, stored mod `d`; the centered defect
    /// sat at `(d - shift.0, d - shift.1) mod d`.
    pub shift: (usize, usize),
    pub input: Vec<F>,
}

/// A concrete correction in lattice coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GlobalAction {
    pub qubit: usize,
    pub pauli: Pauli,
}

/// Build the perspective list for a syndrome. Empty syndrome gives an empty
/// list; star defects are ignored in bitflip mode.
pub fn generate_perspectives<F: Scalar>(
    syndrome: &Syndrome,
    mode: NoiseKind,
) -> Vec<Perspective<F>> {
    let d = syndrome.d();
    let mut out = Vec::new();
    for (r, c) in syndrome.violated_plaquettes() {
        let shift = ((d - r) % d, (d - c) % d);
        let mut input = shifted_grid::<F>(d, syndrome.plaquettes(), shift);
        if mode == NoiseKind::Depolarizing {
            input.extend(shifted_grid::<F>(d, syndrome.stars(), shift));
        }
        out.push(Perspective {
            d,
            mode,
            defect_kind: DefectKind::Plaquette,
            shift,
            input,
        });
    }
    if mode == NoiseKind::Depolarizing {
        for (r, c) in syndrome.violated_stars() {
            let shift = ((d - r) % d, (d - c) % d);
            let mut input = shifted_grid::<F>(d, syndrome.plaquettes(), shift);
            input.extend(shifted_grid::<F>(d, syndrome.stars(), shift));
            out.push(Perspective {
                d,
                mode,
                defect_kind: DefectKind::Star,
                shift,
                input,
            });
        }
    }
    out
}

fn shifted_grid<F: Scalar>(d: usize, grid: &[bool], shift: (usize, usize)) -> Vec<F> {
    let mut out = vec![F::zero(); d * d];
    for r in 0..d {
        for c in 0..d {
            if grid[r * d + c] {
                out[((r + shift.0) % d) * d + (c + shift.1) % d] = F::one();
            }
        }
    }
    out
}

/// Map one of the perspective's action indices back to lattice coordinates.
pub fn decode_action<F: Scalar>(p: &Perspective<F>, action: usize) -> Result<GlobalAction> {
    let n_actions = p.mode.n_actions();
    if action >= n_actions {
        return Err(Error::ActionOutOfRange {
            index: action,
            n_actions,
        });
    }
    let pauli = match (p.mode, action / 4) {
        (NoiseKind::Bitflip, _) => Pauli::X,
        (NoiseKind::Depolarizing, 0) => Pauli::X,
        (NoiseKind::Depolarizing, 1) => Pauli::Y,
        (NoiseKind::Depolarizing, 2) => Pauli::Z,
        _ => unreachable!(),
    };
    let d = p.d;
    // (horizontal?, row, col) of the slot edge in shifted coordinates.
    let (horizontal, r, c) = match (p.defect_kind, action % 4) {
        (DefectKind::Plaquette, 0) => (true, 0, 0),
        (DefectKind::Plaquette, 1) => (true, 1, 0),
        (DefectKind::Plaquette, 2) => (false, 0, 0),
        (DefectKind::Plaquette, 3) => (false, 0, 1),
        (DefectKind::Star, 0) => (true, 0, 0),
        (DefectKind::Star, 1) => (true, 0, d - 1),
        (DefectKind::Star, 2) => (false, 0, 0),
        (DefectKind::Star, 3) => (false, d - 1, 0),
        _ => unreachable!(),
    };
    // Undo the translation.
    let (gr, gc) = ((r + d - p.shift.0) % d, (c + d - p.shift.1) % d);
    let qubit = if horizontal {
        h_index(d, gr, gc)
    } else {
        v_index(d, gr, gc)
    };
    Ok(GlobalAction { qubit, pauli })
}

/// Evaluate the network on every perspective and return the action behind
/// the globally largest output. Ties break to the lowest perspective index,
/// then the lowest output index (strict-greater scan).
pub fn select_action<F: Scalar>(
    net: &Phenotype<F>,
    perspectives: &[Perspective<F>],
) -> Result<GlobalAction> {
    if perspectives.is_empty() {
        return Err(Error::NoPerspectives);
    }
    let mut best: Option<(usize, usize, F)> = None;
    for (pi, p) in perspectives.iter().enumerate() {
        if net.n_out() != p.mode.n_actions() {
            return Err(Error::ArityMismatch {
                what: "outputs",
                expected: p.mode.n_actions(),
                got: net.n_out(),
            });
        }
        let outputs = net.activate(&p.input)?;
        for (oi, &v) in outputs.iter().enumerate() {
            // Replace only on strictly greater: ties and NaNs keep the
            // earliest (perspective, action) pair, so argmax stays total.
            match best {
                Some((_, _, bv)) if v.partial_cmp(&bv) != Some(Ordering::Greater) => {}
                _ => best = Some((pi, oi, v)),
            }
        }
    }
    let (pi, oi, _) = best.expect("at least one perspective");
    decode_action(&perspectives[pi], oi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{ConnectionGene, Genome, NodeGene, NodeKind};
    use crate::network::compile;
    use crate::toric::{NoiseModel, ToricState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Genome with given connections from input slots to output slots,
    /// zero biases.
    fn sparse_net(n_in: usize, n_out: usize, links: &[(u32, u32, f64)]) -> Phenotype<f64> {
        let mut nodes = Vec::new();
        for id in 0..n_in as u32 {
            nodes.push(NodeGene {
                id,
                kind: NodeKind::Input,
                bias: 0.0,
            });
        }
        for id in n_in as u32..(n_in + n_out) as u32 {
            nodes.push(NodeGene {
                id,
                kind: NodeKind::Output,
                bias: 0.0,
            });
        }
        let conns = links
            .iter()
            .enumerate()
            .map(|(k, &(i, o, w))| ConnectionGene {
                innovation: k as u32,
                in_node: i,
                out_node: n_in as u32 + o,
                weight: w,
                enabled: true,
            })
            .collect();
        compile(&Genome::from_parts(n_in, n_out, nodes, conns).unwrap()).unwrap()
    }

    #[test]
    fn noise_kind_arity_helpers() {
        assert_eq!(NoiseKind::Bitflip.n_inputs(3), 9);
        assert_eq!(NoiseKind::Depolarizing.n_inputs(3), 18);
        assert_eq!(NoiseKind::Bitflip.n_actions(), 4);
        assert_eq!(NoiseKind::Depolarizing.n_actions(), 12);
        assert_eq!(NoiseKind::Bitflip.d_for_inputs(25), Some(5));
        assert_eq!(NoiseKind::Depolarizing.d_for_inputs(50), Some(5));
        assert_eq!(NoiseKind::Bitflip.d_for_inputs(10), None);
        assert_eq!("bitflip".parse::<NoiseKind>().unwrap(), NoiseKind::Bitflip);
        assert!("BITFLIP".parse::<NoiseKind>().is_err());
    }

    #[test]
    fn bitflip_worked_example() {
        // X on h(1,1): defects at plaquettes (0,1) and (1,1).
        let mut s = ToricState::new(3).unwrap();
        s.apply_pauli(h_index(3, 1, 1), Pauli::X).unwrap();
        let ps = generate_perspectives::<f64>(&s.syndrome(), NoiseKind::Bitflip);
        assert_eq!(ps.len(), 2);

        assert_eq!(ps[0].shift, (0, 2));
        assert_eq!(ps[0].defect_kind, DefectKind::Plaquette);
        assert_eq!(
            ps[0].input,
            vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(ps[1].shift, (2, 2));
        assert_eq!(
            ps[1].input,
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        );

        // Slot 1 of the first view is h(1,0) shifted, h(1,1) globally: the
        // errored qubit itself.
        let a = decode_action(&ps[0], 1).unwrap();
        assert_eq!(
            a,
            GlobalAction {
                qubit: h_index(3, 1, 1),
                pauli: Pauli::X
            }
        );
    }

    #[test]
    fn depolarizing_worked_example() {
        // Y on h(0,0): plaquette defects (0,0), (2,0); star defects (0,0), (0,1).
        let mut s = ToricState::new(3).unwrap();
        s.apply_pauli(0, Pauli::Y).unwrap();
        let ps = generate_perspectives::<f64>(&s.syndrome(), NoiseKind::Depolarizing);
        assert_eq!(ps.len(), 4);
        assert_eq!(ps[0].defect_kind, DefectKind::Plaquette);
        assert_eq!(ps[1].defect_kind, DefectKind::Plaquette);
        assert_eq!(ps[2].defect_kind, DefectKind::Star);
        assert_eq!(ps[3].defect_kind, DefectKind::Star);
        for p in &ps {
            assert_eq!(p.input.len(), 18);
        }

        // Second plaquette view: defect (2,0), shift (1,0).
        assert_eq!(ps[1].shift, (1, 0));
        assert_eq!(
            ps[1].input,
            vec![
                1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, // plaquettes
                0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, // stars
            ]
        );

        // Second star view: defect (0,1), shift (0,2).
        assert_eq!(ps[3].shift, (0, 2));
        assert_eq!(
            ps[3].input,
            vec![
                0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, // plaquettes
                1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, // stars
            ]
        );

        // Action 7 on that view: slot 3 = v(d-1,0) shifted, pauli Y.
        let a = decode_action(&ps[3], 7).unwrap();
        assert_eq!(
            a,
            GlobalAction {
                qubit: v_index(3, 2, 1),
                pauli: Pauli::Y
            }
        );
        // Action 1: slot h(0,d-1) shifted resolves to the errored qubit.
        let a = decode_action(&ps[3], 1).unwrap();
        assert_eq!(
            a,
            GlobalAction {
                qubit: 0,
                pauli: Pauli::X
            }
        );
    }

    #[test]
    fn unshifted_view_decodes_to_stabilizer_edges() {
        let mut s = ToricState::new(3).unwrap();
        // Defect at plaquette (0,0) and (1,0) via X on h(1,0).
        s.apply_pauli(h_index(3, 1, 0), Pauli::X).unwrap();
        let ps = generate_perspectives::<f64>(&s.syndrome(), NoiseKind::Bitflip);
        assert_eq!(ps[0].shift, (0, 0));
        let expect = [
            h_index(3, 0, 0),
            h_index(3, 1, 0),
            v_index(3, 0, 0),
            v_index(3, 0, 1),
        ];
        for (k, &q) in expect.iter().enumerate() {
            assert_eq!(decode_action(&ps[0], k).unwrap().qubit, q);
        }
    }

    #[test]
    fn depolarizing_pauli_blocks() {
        let mut s = ToricState::new(3).unwrap();
        s.apply_pauli(v_index(3, 1, 1), Pauli::Y).unwrap();
        let ps = generate_perspectives::<f64>(&s.syndrome(), NoiseKind::Depolarizing);
        let p = &ps[0];
        for action in 0..12 {
            let a = decode_action(p, action).unwrap();
            let want = [Pauli::X, Pauli::Y, Pauli::Z][action / 4];
            assert_eq!(a.pauli, want);
            assert_eq!(a.qubit, decode_action(p, action % 4).unwrap().qubit);
        }
        assert!(matches!(
            decode_action(p, 12),
            Err(Error::ActionOutOfRange {
                index: 12,
                n_actions: 12
            })
        ));
    }

    #[test]
    fn bitflip_action_range() {
        let mut s = ToricState::new(3).unwrap();
        s.apply_pauli(0, Pauli::X).unwrap();
        let ps = generate_perspectives::<f64>(&s.syndrome(), NoiseKind::Bitflip);
        assert!(decode_action(&ps[0], 3).is_ok());
        assert!(decode_action(&ps[0], 4).is_err());
    }

    #[test]
    fn select_action_requires_perspectives() {
        let net = sparse_net(9, 4, &[]);
        assert!(matches!(
            select_action::<f64>(&net, &[]),
            Err(Error::NoPerspectives)
        ));
    }

    #[test]
    fn select_action_checks_output_arity() {
        let net = sparse_net(9, 3, &[]);
        let mut s = ToricState::new(3).unwrap();
        s.apply_pauli(0, Pauli::X).unwrap();
        let ps = generate_perspectives::<f64>(&s.syndrome(), NoiseKind::Bitflip);
        assert!(matches!(
            select_action(&net, &ps),
            Err(Error::ArityMismatch {
                expected: 4,
                got: 3,
                ..
            })
        ));
    }

    #[test]
    fn ties_break_to_first_perspective_and_output() {
        // All-equal outputs: winner must be perspective 0, action 0.
        let net = sparse_net(9, 4, &[]);
        let mut s = ToricState::new(3).unwrap();
        s.apply_pauli(h_index(3, 1, 1), Pauli::X).unwrap();
        let ps = generate_perspectives::<f64>(&s.syndrome(), NoiseKind::Bitflip);
        let a = select_action(&net, &ps).unwrap();
        assert_eq!(a, decode_action(&ps[0], 0).unwrap());
        assert_eq!(a.qubit, h_index(3, 0, 1));
    }

    #[test]
    fn strict_maximum_wins_across_perspectives() {
        // Input cell 6 is hot only in the second view of the two-defect
        // pattern from the bitflip worked example.
        let net = sparse_net(9, 4, &[(6, 0, 10.0)]);
        let mut s = ToricState::new(3).unwrap();
        s.apply_pauli(h_index(3, 1, 1), Pauli::X).unwrap();
        let ps = generate_perspectives::<f64>(&s.syndrome(), NoiseKind::Bitflip);
        assert_eq!(ps[1].input[6], 1.0);
        let a = select_action(&net, &ps).unwrap();
        assert_eq!(a, decode_action(&ps[1], 0).unwrap());
        assert_eq!(a.qubit, h_index(3, 1, 1));
    }

    #[test]
    fn perspective_inputs_are_translation_invariant() {
        let d = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..25 {
            let mut s = ToricState::new(d).unwrap();
            s.apply_noise(NoiseModel::Bitflip { p: 0.12 }, &mut rng);
            let (tr, tc) = (rng.random_range(0..d), rng.random_range(0..d));
            let mut t = ToricState::new(d).unwrap();
            for r in 0..d {
                for c in 0..d {
                    if s.pauli(h_index(d, r, c)) == Pauli::X {
                        t.apply_pauli(h_index(d, r + tr, c + tc), Pauli::X).unwrap();
                    }
                    if s.pauli(v_index(d, r, c)) == Pauli::X {
                        t.apply_pauli(v_index(d, r + tr, c + tc), Pauli::X).unwrap();
                    }
                }
            }
            let mut a: Vec<Vec<f64>> = generate_perspectives(&s.syndrome(), NoiseKind::Bitflip)
                .into_iter()
                .map(|p| p.input)
                .collect();
            let mut b: Vec<Vec<f64>> = generate_perspectives(&t.syndrome(), NoiseKind::Bitflip)
                .into_iter()
                .map(|p| p.input)
                .collect();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            assert_eq!(a, b, "trial {trial} translation ({tr},{tc})");
        }
    }
}
