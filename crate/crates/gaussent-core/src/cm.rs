//! Covariance matrices in the interleaved (phi, pi) mode basis, with the
//! region/site bookkeeping shared by every module.

use crate::error::{Error, Result};
use crate::mpnum::{Matrix, PrecisionContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Region {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ModeInfo {
    pub region: Region,
    /// Lattice site for vacuum-constructed modes; None after transformations
    /// that mix sites.
    pub site: Option<i64>,
}

/// Mode -> (region, site) map for a CM in interleaved ordering: mode i owns
/// coordinates (2i, 2i+1) = (phi_i, pi_i).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ModeLayout {
    pub modes: Vec<ModeInfo>,
}

impl ModeLayout {
    /// Two d-site regions: A at sites 0..d-1, B at sites d+sep..2d+sep-1.
    pub fn two_regions(d: usize, sep: usize) -> Self {
        let mut modes = Vec::with_capacity(2 * d);
        for s in 0..d {
            modes.push(ModeInfo {
                region: Region::A,
                site: Some(s as i64),
            });
        }
        for s in 0..d {
            modes.push(ModeInfo {
                region: Region::B,
                site: Some((d + sep + s) as i64),
            });
        }
        Self { modes }
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn a_modes(&self) -> Vec<usize> {
        (0..self.modes.len()).filter(|&i| self.modes[i].region == Region::A).collect()
    }

    pub fn b_modes(&self) -> Vec<usize> {
        (0..self.modes.len()).filter(|&i| self.modes[i].region == Region::B).collect()
    }

    pub fn subset(&self, modes: &[usize]) -> Self {
        Self {
            modes: modes.iter().map(|&i| self.modes[i]).collect(),
        }
    }
}

/// Real symmetric 2n x 2n second-moment matrix in the interleaved basis,
/// together with its mode layout.
#[derive(Debug, Clone)]
pub struct CovarianceMatrix {
    pub mat: Matrix,
    pub layout: ModeLayout,
}

impl CovarianceMatrix {
    pub fn new(mat: Matrix, layout: ModeLayout) -> Result<Self> {
        if mat.rows() != 2 * layout.n_modes() || !mat.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "CM is {}x{} but layout has {} modes",
                mat.rows(),
                mat.cols(),
                layout.n_modes()
            )));
        }
        Ok(Self { mat, layout })
    }

    pub fn n_modes(&self) -> usize {
        self.layout.n_modes()
    }

    /// Reduced CM on a mode subset, layout carried along.
    pub fn reduced(&self, modes: &[usize], _ctx: &PrecisionContext) -> Self {
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        Self {
            mat: self.mat.select(&idx, &idx),
            layout: self.layout.subset(modes),
        }
    }
}

/// Coordinate indices (interleaved) for a list of modes.
pub fn coord_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}
