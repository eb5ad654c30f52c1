//! Tiles and transmission-mode codebooks.
//!
//! A surface is split into `N` contiguous tiles. Each tile can only take one
//! of `M` predesigned phase profiles (its transmission modes). Because the
//! cascaded channel is linear in the per-element reflection coefficients, the
//! contribution of every (tile, mode) pair can be computed once per channel
//! realisation; selecting modes then reduces to summing `N` precomputed
//! matrices.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSet, Direction};
use crate::error::{dimension, domain, Error, Result};
use crate::irs_models::matched_profile;
use crate::linalg::{cis, CMat};
use crate::parallel::{map_ordered, Execution};

/// Assignment of surface elements to contiguous tiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilePartition {
    assignment: Vec<usize>,
    tiles: Vec<Range<usize>>,
}

impl TilePartition {
    pub fn tile_count(&self) -> usize {
        self.tiles.len()
    }

    pub fn element_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn tile(&self, n: usize) -> Range<usize> {
        self.tiles[n].clone()
    }

    pub fn tiles(&self) -> &[Range<usize>] {
        &self.tiles
    }

    /// Tile index of every element.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }
}

/// Splits `element_count` elements into `tiles` contiguous tiles of equal size;
/// the remainder goes one element each to the leading tiles.
pub fn partition_tiles(element_count: usize, tiles: usize) -> Result<TilePartition> {
    if tiles == 0 || tiles > element_count {
        return Err(domain(format!(
            "cannot split {element_count} elements into {tiles} tiles"
        )));
    }
    let base = element_count / tiles;
    let rem = element_count % tiles;
    let mut ranges = Vec::with_capacity(tiles);
    let mut assignment = Vec::with_capacity(element_count);
    let mut off = 0;
    for n in 0..tiles {
        let size = base + usize::from(n < rem);
        ranges.push(off..off + size);
        assignment.extend(std::iter::repeat_n(n, size));
        off += size;
    }
    Ok(TilePartition {
        assignment,
        tiles: ranges,
    })
}

/// Van der Corput radical inverse in base 2.
fn radical_inverse(mut i: u64) -> f64 {
    let mut inv = 0.0;
    let mut f = 0.5;
    while i > 0 {
        if i & 1 == 1 {
            inv += f;
        }
        i >>= 1;
        f *= 0.5;
    }
    inv
}

/// Reflection directions for codebook design, in nested order.
///
/// Angle `i` is `center + span·(2·v(i+1) − 1)` with `v` the base-2 radical
/// inverse, so the first `2^k − 1` angles form the uniform grid
/// `center + span·(−1 + 2j/2^k)`, and every prefix of a longer grid is the
/// shorter grid.
pub fn nested_grid(count: usize, center: Direction, span: f64) -> Result<Vec<Direction>> {
    (0..count)
        .map(|i| {
            let s = center.sin_az + span * (2.0 * radical_inverse(i as u64 + 1) - 1.0);
            Direction::new(s, center.sin_el)
        })
        .collect()
}

/// Per-tile transmission modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionModeSet {
    /// `modes[tile][mode]` is the phase profile over that tile's elements.
    pub modes: Vec<Vec<Vec<f64>>>,
    /// Reflection directions of modes `1..M`.
    pub design_angles: Vec<Direction>,
    pub aoa_ref: Direction,
}

impl TransmissionModeSet {
    pub fn mode_count(&self) -> usize {
        self.modes.first().map_or(0, |m| m.len())
    }

    pub fn tile_count(&self) -> usize {
        self.modes.len()
    }

    /// Full-surface phase profile for one mode per tile.
    pub fn stitch(&self, partition: &TilePartition, selection: &ModeSelection) -> Result<Vec<f64>> {
        check_selection(selection, self.tile_count(), self.mode_count())?;
        let mut out = vec![0.0; partition.element_count()];
        for (n, &m) in selection.0.iter().enumerate() {
            out[partition.tile(n)].copy_from_slice(&self.modes[n][m]);
        }
        Ok(out)
    }
}

/// Builds `M` modes per tile: mode 0 is the specular (all-zero) profile, mode
/// `m ≥ 1` steers the wave arriving from `aoa_ref` toward `aod_grid[m − 1]`.
///
/// `offsets` are the element offsets of the whole surface; profiles use these
/// global offsets, so a mode restricted to a sub-tile equals the same mode of
/// that sub-tile.
pub fn generate_codebook(
    partition: &TilePartition,
    offsets: &[[f64; 2]],
    mode_count: usize,
    spacing: f64,
    aoa_ref: Direction,
    aod_grid: &[Direction],
) -> Result<TransmissionModeSet> {
    if mode_count == 0 {
        return Err(domain("a codebook needs at least one mode"));
    }
    if aod_grid.len() + 1 < mode_count {
        return Err(domain(format!(
            "{} design angles cannot define {mode_count} modes",
            aod_grid.len()
        )));
    }
    if offsets.len() != partition.element_count() {
        return Err(dimension("offsets do not match the partition"));
    }
    aoa_ref.validate()?;
    let design = aod_grid[..mode_count - 1].to_vec();
    let modes = partition
        .tiles()
        .iter()
        .map(|t| {
            let sub = &offsets[t.clone()];
            std::iter::once(vec![0.0; t.len()])
                .chain(design.iter().map(|&d| matched_profile(sub, spacing, aoa_ref, d)))
                .collect()
        })
        .collect();
    Ok(TransmissionModeSet {
        modes,
        design_angles: design,
        aoa_ref,
    })
}

/// One mode index per tile.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeSelection(pub Vec<usize>);

fn check_selection(sel: &ModeSelection, tiles: usize, modes: usize) -> Result<()> {
    if sel.0.len() != tiles {
        return Err(Error::Contract(format!(
            "selection has {} entries for {tiles} tiles",
            sel.0.len()
        )));
    }
    if let Some(bad) = sel.0.iter().find(|&&m| m >= modes) {
        return Err(Error::Contract(format!("mode index {bad} out of range (M = {modes})")));
    }
    Ok(())
}

/// Precomputed cascaded contributions of every (tile, mode) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveTileChannels {
    /// `contributions[tile][mode][rx]`, each `Nr × Nt`.
    pub contributions: Vec<Vec<Vec<CMat>>>,
    pub direct: Vec<CMat>,
}

impl EffectiveTileChannels {
    pub fn tile_count(&self) -> usize {
        self.contributions.len()
    }

    pub fn mode_count(&self) -> usize {
        self.contributions.first().map_or(0, |t| t.len())
    }

    pub fn rx_count(&self) -> usize {
        self.direct.len()
    }

    /// Keeps only the first `m` modes of every tile (a nested sub-codebook).
    pub fn truncated(&self, m: usize) -> Result<EffectiveTileChannels> {
        if m == 0 || m > self.mode_count() {
            return Err(domain(format!("cannot keep {m} of {} modes", self.mode_count())));
        }
        Ok(EffectiveTileChannels {
            contributions: self.contributions.iter().map(|t| t[..m].to_vec()).collect(),
            direct: self.direct.clone(),
        })
    }

    /// Restriction to a subset of receivers.
    pub fn receivers(&self, rx: &[usize]) -> EffectiveTileChannels {
        EffectiveTileChannels {
            contributions: self
                .contributions
                .iter()
                .map(|t| {
                    t.iter()
                        .map(|per| rx.iter().map(|&r| per[r].clone()).collect())
                        .collect()
                })
                .collect(),
            direct: rx.iter().map(|&r| self.direct[r].clone()).collect(),
        }
    }
}

/// `contributions[n, m, rx] = Σ_{l ∈ tile n} e^{jθ_{m,l}} · irs_to_rx[:, l] · tx_to_irs[l, :]`.
///
/// Several surfaces are treated as one stacked surface. Work is spread over
/// (tile, mode) pairs.
pub fn precompute_tile_channels(
    cs: &ChannelSet,
    partition: &TilePartition,
    modes: &TransmissionModeSet,
    exec: Execution,
) -> Result<EffectiveTileChannels> {
    cs.validate()?;
    let stacked;
    let cs = if cs.irs_count() == 1 {
        cs
    } else {
        stacked = cs.stacked();
        &stacked
    };
    let a = &cs.tx_to_irs[0];
    if a.nrows() != partition.element_count() {
        return Err(dimension(format!(
            "partition covers {} elements, channel has {}",
            partition.element_count(),
            a.nrows()
        )));
    }
    if modes.tile_count() != partition.tile_count() {
        return Err(dimension("mode set and partition disagree on tile count"));
    }
    for (n, t) in modes.modes.iter().enumerate() {
        if t.iter().any(|p| p.len() != partition.tile(n).len()) {
            return Err(dimension(format!("tile {n} has profiles of the wrong length")));
        }
    }
    let nt = a.ncols();
    let pairs: Vec<(usize, usize)> = (0..partition.tile_count())
        .flat_map(|n| (0..modes.mode_count()).map(move |m| (n, m)))
        .collect();
    let flat = map_ordered(&pairs, exec, |&(n, m)| {
        let tile = partition.tile(n);
        let profile = &modes.modes[n][m];
        (0..cs.rx_count())
            .map(|r| {
                let b = &cs.irs_to_rx[0][r];
                let mut c = CMat::zeros(b.nrows(), nt);
                for (k, l) in tile.clone().enumerate() {
                    let phase = cis(profile[k]);
                    for i in 0..b.nrows() {
                        let bl = b[(i, l)] * phase;
                        for j in 0..nt {
                            c[(i, j)] += bl * a[(l, j)];
                        }
                    }
                }
                c
            })
            .collect::<Vec<CMat>>()
    });
    let mut it = flat.into_iter();
    let contributions = (0..partition.tile_count())
        .map(|_| (0..modes.mode_count()).map(|_| it.next().unwrap()).collect())
        .collect();
    Ok(EffectiveTileChannels {
        contributions,
        direct: cs.direct.clone(),
    })
}

/// `direct + Σ_n contributions[n, m_n]` for every receiver.
pub fn select_effective_channel(tc: &EffectiveTileChannels, selection: &ModeSelection) -> Result<Vec<CMat>> {
    check_selection(selection, tc.tile_count(), tc.mode_count())?;
    Ok((0..tc.rx_count())
        .map(|r| {
            let mut h = tc.direct[r].clone();
            for (n, &m) in selection.0.iter().enumerate() {
                h += &tc.contributions[n][m][r];
            }
            h
        })
        .collect())
}
