use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer wavevector. Two-dimensional grids leave the third entry at zero.
pub type Wavevector = [i64; 3];

/// Periodic lattice on `[0, 2π]^d` with `n` samples (and modes) per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    n: usize,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Domain(format!("dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "modes per axis must be an even integer >= 8, got {n}"
            )));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    /// Signed wavenumber of FFT index `i` along one axis, in `-n/2+1 ..= n/2`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn wavevector(&self, idx: usize) -> Wavevector {
        let n = self.n;
        let mut k = [0i64; 3];
        let mut rem = idx;
        for axis in (0..self.dim).rev() {
            k[axis] = self.wavenumber(rem % n);
            rem /= n;
        }
        k
    }

    /// Flat index of `k`, or `None` when `k` lies outside the retained lattice.
    pub fn index_of(&self, k: Wavevector) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut idx = 0usize;
        for (axis, &kj) in k.iter().enumerate() {
            if axis >= self.dim {
                if kj != 0 {
                    return None;
                }
                continue;
            }
            if kj <= -half || kj > half {
                return None;
            }
            let i = if kj >= 0 { kj } else { kj + self.n as i64 } as usize;
            idx = idx * self.n + i;
        }
        Some(idx)
    }

    /// Largest `K` with `3K < n`; products of modes with `|k_j| <= K` alias only
    /// outside the band.
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    pub fn max_wavenumber_norm(&self) -> f64 {
        let kmax = (self.n / 2 - 1) as f64;
        kmax * (self.dim as f64).sqrt()
    }

    pub(crate) fn modes(&self) -> Rc<ModeTable> {
        thread_local! {
            static TABLES: RefCell<HashMap<GridSpec, Rc<ModeTable>>> = RefCell::new(HashMap::new());
        }
        TABLES.with(|t| {
            t.borrow_mut()
                .entry(*self)
                .or_insert_with(|| Rc::new(ModeTable::new(*self)))
                .clone()
        })
    }
}

/// Per-grid lookup tables shared by every operator on that grid.
pub(crate) struct ModeTable {
    pub k: Vec<Wavevector>,
    pub norm: Vec<f64>,
    pub neg: Vec<usize>,
    /// Retained (non-Nyquist) modes.
    pub retained: Vec<bool>,
    /// Modes kept by the 2/3 rule.
    pub in_band: Vec<bool>,
}

impl ModeTable {
    fn new(grid: GridSpec) -> Self {
        let len = grid.len();
        let half = (grid.n() / 2) as i64;
        let cut = grid.dealias_cutoff();
        let mut k = Vec::with_capacity(len);
        let mut norm = Vec::with_capacity(len);
        let mut neg = Vec::with_capacity(len);
        let mut retained = Vec::with_capacity(len);
        let mut in_band = Vec::with_capacity(len);
        for idx in 0..len {
            let kv = grid.wavevector(idx);
            let nyq = kv[..grid.dim()].contains(&half);
            let band = kv[..grid.dim()].iter().all(|&c| c.abs() <= cut);
            let n2: i64 = kv.iter().map(|c| c * c).sum();
            // -k wraps Nyquist onto itself; these modes are always zero.
            let mut nk = [0i64; 3];
            for a in 0..grid.dim() {
                nk[a] = if kv[a] == half { half } else { -kv[a] };
            }
            neg.push(grid.index_of(nk).expect("negated wavevector is on the lattice"));
            k.push(kv);
            norm.push((n2 as f64).sqrt());
            retained.push(!nyq);
            in_band.push(band && !nyq);
        }
        Self {
            k,
            norm,
            neg,
            retained,
            in_band,
        }
    }
}
