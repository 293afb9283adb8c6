//! Minimum-weight perfect matching baseline decoder.
//!
//! Defects of each stabilizer type are paired up to minimize total torus
//! (Manhattan-with-wraparound) distance, then each pair is annihilated along
//! a shortest row-first path. The matching is exact, found by dynamic
//! programming over defect subsets: O(2^n * n) time and O(2^n) memory for
//! `n` defects, which is why a configurable defect limit guards the entry
//! point. Over-limit behavior is explicit: hard error by default, or count
//! the game as a loss when campaigns prefer a small known bias over a crash.
//!
//! Reconstruction pairs the lowest-indexed unmatched defect with the
//! smallest partner achieving the optimum, so among equal-weight matchings
//! the lexicographically smallest pairing is returned and runs reproduce
//! exactly.

use crate::error::Error;
use crate::toric::{h_index, v_index, Pauli, ToricState};
use crate::Result;

/// Matching guard rails; see module docs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchingConfig {
    /// Hard cap on defects per matching; cost doubles per extra defect.
    pub max_defects: usize,
    /// Count an over-limit game as a loss instead of erroring.
    pub over_limit_is_loss: bool,
}

impl Default for MatchingConfig {
    fn default() -> Self {
        MatchingConfig {
            max_defects: 20,
            over_limit_is_loss: false,
        }
    }
}

/// Shortest path length between two cells on the periodic `d x d` grid.
pub fn torus_distance(a: (usize, usize), b: (usize, usize), d: usize) -> usize {
    let dr = a.0.abs_diff(b.0);
    let dc = a.1.abs_diff(b.1);
    dr.min(d - dr) + dc.min(d - dc)
}

/// Exact minimum-weight perfect matching on the defect list; returns index
/// pairs `(i, j)` with `i < j`, ordered by `i`.
pub fn min_weight_matching(
    defects: &[(usize, usize)],
    d: usize,
    limit: usize,
) -> Result<Vec<(usize, usize)>> {
    let n = defects.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !n.is_multiple_of(2) {
        return Err(Error::OddDefectCount { count: n });
    }
    if n > limit {
        return Err(Error::TooManyDefects { count: n, limit });
    }

    const INF: u16 = u16::MAX;
    let w: Vec<Vec<u16>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| torus_distance(defects[i], defects[j], d) as u16)
                .collect()
        })
        .collect();

    let full = (1usize << n) - 1;
    let mut dp = vec![INF; full + 1];
    dp[0] = 0;
    for mask in 1..=full {
        if mask.count_ones() % 2 != 0 {
            continue;
        }
        // The lowest set defect must pair with someone; fixing it avoids
        // counting each matching (n/2)! times.
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut best = INF;
        let mut m = rest;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            let prev = dp[rest & !(1 << j)];
            if prev != INF && prev + w[i][j] < best {
                best = prev + w[i][j];
            }
        }
        dp[mask] = best;
    }

    let mut pairs = Vec::with_capacity(n / 2);
    let mut mask = full;
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut m = rest;
        let mut chosen = None;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            let prev = dp[rest & !(1 << j)];
            if prev != INF && prev + w[i][j] == dp[mask] {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen.expect("optimal matching is reconstructible");
        pairs.push((i, j));
        mask = rest & !(1 << j);
    }
    Ok(pairs)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum GridKind {
    Plaquette,
    Star,
}

/// Signed unit steps from `from` to `to` along one axis: shorter wrap
/// direction, ties resolved to the non-wrapping side.
fn axis_steps(from: usize, to: usize, d: usize) -> (i32, usize) {
    let fwd = (to + d - from) % d;
    if fwd == 0 {
        return (1, 0);
    }
    let bwd = d - fwd;
    if fwd < bwd || (fwd == bwd && to > from) {
        (1, fwd)
    } else {
        (-1, bwd)
    }
}

/// Annihilate a defect pair along a row-first, then column, shortest path.
fn apply_defect_path(
    state: &mut ToricState,
    from: (usize, usize),
    to: (usize, usize),
    kind: GridKind,
) {
    let d = state.d();
    let pauli = match kind {
        GridKind::Plaquette => Pauli::X,
        GridKind::Star => Pauli::Z,
    };
    let (mut r, mut c) = from;
    let (dir, count) = axis_steps(from.0, to.0, d);
    for _ in 0..count {
        let next = (r + d).wrapping_add_signed(dir as isize) % d;
        let edge = match (kind, dir) {
            // Moving a plaquette defect crosses the horizontal edge between
            // the two cells; a star defect crosses the vertical edge between
            // the two vertices.
            (GridKind::Plaquette, 1) => h_index(d, next, c),
            (GridKind::Plaquette, -1) => h_index(d, r, c),
            (GridKind::Star, 1) => v_index(d, r, c),
            (GridKind::Star, -1) => v_index(d, next, c),
            _ => unreachable!(),
        };
        state.apply_pauli(edge, pauli).expect("edge in range");
        r = next;
    }
    let (dir, count) = axis_steps(from.1, to.1, d);
    for _ in 0..count {
        let next = (c + d).wrapping_add_signed(dir as isize) % d;
        let edge = match (kind, dir) {
            (GridKind::Plaquette, 1) => v_index(d, r, next),
            (GridKind::Plaquette, -1) => v_index(d, r, c),
            (GridKind::Star, 1) => h_index(d, r, c),
            (GridKind::Star, -1) => h_index(d, r, next),
            _ => unreachable!(),
        };
        state.apply_pauli(edge, pauli).expect("edge in range");
        c = next;
    }
    debug_assert_eq!((r, c), to);
}

/// Run the full matching decoder on a noisy state: X corrections from the
/// plaquette matching, Z corrections from the star matching. Returns whether
/// the game is won (clean syndrome and trivial logical class).
pub fn mwpm_decode(state: &ToricState, cfg: &MatchingConfig) -> Result<bool> {
    let mut work = state.clone();
    let syndrome = work.syndrome();
    for (kind, defects) in [
        (GridKind::Plaquette, syndrome.violated_plaquettes()),
        (GridKind::Star, syndrome.violated_stars()),
    ] {
        match min_weight_matching(&defects, work.d(), cfg.max_defects) {
            Ok(pairs) => {
                for (i, j) in pairs {
                    apply_defect_path(&mut work, defects[i], defects[j], kind);
                }
            }
            Err(Error::TooManyDefects { .. }) if cfg.over_limit_is_loss => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    debug_assert!(work.syndrome().is_empty(), "matching left defects behind");
    Ok(!work.has_logical_error()?)
}
