//! "ASCL1" binary checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic  b"ASCL1"
//! d      u32
//! n      u32
//! t      f64
//! step   u64
//! kappa  f64
//! gamma  f64
//! kind   u8     0 = sqg, 1 = mg, 2 = custom
//! nu     f64    0 unless kind = mg
//! count  u64
//! count × (re f64, im f64)
//! ```
//!
//! Only the independent half of the retained lattice is stored: wavevectors
//! whose first nonzero component is positive, in lexicographic order. Their
//! conjugates are rebuilt on load, so `count = ((n-1)^d - 1) / 2`.

use std::path::Path;

use serde::Serialize;

use crate::constitutive::MultiplierSpec;
use crate::error::{Error, Result};
use crate::spectral::{Complex64, GridSpec, SpectralField, Wavevector};
use crate::timestepper::{SimulationState, SolverConfig};

pub const MAGIC: &[u8; 5] = b"ASCL1";
pub const HEADER_LEN: usize = 5 + 4 + 4 + 8 + 8 + 8 + 8 + 1 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DriftKind {
    Sqg,
    Mg,
    Custom,
}

impl DriftKind {
    fn code(self) -> u8 {
        match self {
            DriftKind::Sqg => 0,
            DriftKind::Mg => 1,
            DriftKind::Custom => 2,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(DriftKind::Sqg),
            1 => Ok(DriftKind::Mg),
            2 => Ok(DriftKind::Custom),
            other => Err(Error::Checkpoint(format!("unknown drift kind code {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckpointHeader {
    pub d: u32,
    pub n: u32,
    pub t: f64,
    pub step: u64,
    pub kappa: f64,
    pub gamma: f64,
    pub kind: DriftKind,
    pub nu: f64,
    pub count: u64,
}

impl CheckpointHeader {
    pub fn new(state: &SimulationState, config: &SolverConfig) -> Self {
        let grid = state.theta.grid();
        let (kind, nu) = match &config.drift {
            MultiplierSpec::Sqg => (DriftKind::Sqg, 0.0),
            MultiplierSpec::Mg { nu } => (DriftKind::Mg, *nu),
            MultiplierSpec::Custom(_) => (DriftKind::Custom, 0.0),
        };
        Self {
            d: grid.dim() as u32,
            n: grid.n() as u32,
            t: state.t,
            step: state.step_count,
            kappa: config.kappa,
            gamma: config.gamma,
            kind,
            nu,
            count: independent_modes(grid).len() as u64,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.d as usize, self.n as usize)
            .map_err(|e| Error::Checkpoint(format!("header describes an invalid grid: {e}")))
    }
}

/// Independent retained wavevectors in lexicographic order.
pub fn independent_modes(grid: GridSpec) -> Vec<Wavevector> {
    let h = (grid.n() / 2 - 1) as i64;
    let d = grid.dim();
    let mut out = Vec::new();
    let mut k = [0i64; 3];
    let total = (2 * h + 1).pow(d as u32);
    for flat in 0..total {
        let mut rem = flat;
        for axis in (0..d).rev() {
            k[axis] = rem % (2 * h + 1) - h;
            rem /= 2 * h + 1;
        }
        let first = k[..d].iter().copied().find(|&c| c != 0);
        if matches!(first, Some(c) if c > 0) {
            out.push(k);
        }
    }
    out
}

pub fn encode_checkpoint(state: &SimulationState, config: &SolverConfig) -> Vec<u8> {
    let header = CheckpointHeader::new(state, config);
    let modes = independent_modes(state.theta.grid());
    let mut out = Vec::with_capacity(HEADER_LEN + modes.len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&header.d.to_le_bytes());
    out.extend_from_slice(&header.n.to_le_bytes());
    out.extend_from_slice(&header.t.to_le_bytes());
    out.extend_from_slice(&header.step.to_le_bytes());
    out.extend_from_slice(&header.kappa.to_le_bytes());
    out.extend_from_slice(&header.gamma.to_le_bytes());
    out.push(header.kind.code());
    out.extend_from_slice(&header.nu.to_le_bytes());
    out.extend_from_slice(&header.count.to_le_bytes());
    for k in modes {
        let c = state.theta.coeff(k);
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let mut b = [0u8; N];
        b.copy_from_slice(&self.bytes[self.pos..self.pos + N]);
        self.pos += N;
        b
    }
    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }
    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take())
    }
    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(CheckpointHeader, SimulationState)> {
    if bytes.len() < 5 || &bytes[..4] != b"ASCL" {
        return Err(Error::Checkpoint("bad magic: not an ASCL checkpoint".into()));
    }
    if &bytes[..5] != MAGIC {
        return Err(Error::Checkpoint(format!(
            "version mismatch: file is '{}', reader supports 'ASCL1'",
            String::from_utf8_lossy(&bytes[..5])
        )));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Checkpoint(format!(
            "truncated header: expected at least {HEADER_LEN} bytes, found {}",
            bytes.len()
        )));
    }
    let mut r = Reader { bytes, pos: 5 };
    let d = r.u32();
    let n = r.u32();
    let t = r.f64();
    let step = r.u64();
    let kappa = r.f64();
    let gamma = r.f64();
    let kind = DriftKind::from_code(r.take::<1>()[0])?;
    let nu = r.f64();
    let count = r.u64();
    let header = CheckpointHeader {
        d,
        n,
        t,
        step,
        kappa,
        gamma,
        kind,
        nu,
        count,
    };
    let expected = (count as u128) * 16 + HEADER_LEN as u128;
    if (bytes.len() as u128) != expected {
        return Err(Error::Checkpoint(format!(
            "length mismatch: header declares {count} coefficients ({expected} bytes), file has {} bytes",
            bytes.len()
        )));
    }
    if count == 0 {
        return Err(Error::Checkpoint(
            "degenerate checkpoint: zero coefficients declared; a mean-zero field needs at least one mode".into(),
        ));
    }
    let grid = header.grid()?;
    let modes = independent_modes(grid);
    if modes.len() as u64 != count {
        return Err(Error::Checkpoint(format!(
            "coefficient count {count} does not match the {} independent modes of a {n}^{d} grid",
            modes.len()
        )));
    }
    let mut pairs = Vec::with_capacity(modes.len());
    for k in modes {
        let c = Complex64::new(r.f64(), r.f64());
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Checkpoint(format!("non-finite coefficient at k = {k:?}")));
        }
        pairs.push((k, c));
    }
    let theta = SpectralField::from_modes(grid, &pairs)
        .map_err(|e| Error::Checkpoint(format!("invalid field: {e}")))?;
    Ok((
        header,
        SimulationState {
            t,
            theta,
            step_count: step,
        },
    ))
}

pub fn save_checkpoint(state: &SimulationState, config: &SolverConfig, path: &Path) -> Result<()> {
    super::write_atomic(path, &encode_checkpoint(state, config))
}

pub fn load_checkpoint(path: &Path) -> Result<(CheckpointHeader, SimulationState)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::generate::{random_band, ModeFilter};

    fn sample(dim: usize, n: usize) -> (SimulationState, SolverConfig) {
        let g = GridSpec::new(dim, n).unwrap();
        let f = random_band(g, 1.0, 5.0, 1.3, 17, ModeFilter::default()).unwrap();
        let state = SimulationState {
            t: 0.125 + 1e-17,
            theta: f,
            step_count: 42,
        };
        (state, SolverConfig::new(MultiplierSpec::Mg { nu: 0.3 }, 0.07, 1.5))
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for (d, n) in [(2, 16), (3, 8)] {
            let (state, cfg) = sample(d, n);
            let bytes = encode_checkpoint(&state, &cfg);
            let (h, back) = decode_checkpoint(&bytes).unwrap();
            assert_eq!(h, CheckpointHeader::new(&state, &cfg));
            assert_eq!(back.theta.coefficient_bytes(), state.theta.coefficient_bytes());
            assert_eq!(back.t.to_bits(), state.t.to_bits());
            assert_eq!(back.step_count, 42);
            assert_eq!(encode_checkpoint(&back, &cfg), bytes);
            let g = state.theta.grid();
            assert_eq!(h.count as usize, ((n - 1).pow(d as u32) - 1) / 2);
            assert_eq!(h.grid().unwrap(), g);
        }
    }

    #[test]
    fn lexicographic_order() {
        let g = GridSpec::new(2, 8).unwrap();
        let m = independent_modes(g);
        assert_eq!(m[0], [0, 1, 0]);
        assert_eq!(m[2], [0, 3, 0]);
        assert_eq!(m[3], [1, -3, 0]);
        assert!(m.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn error_cases() {
        let (state, cfg) = sample(2, 16);
        let bytes = encode_checkpoint(&state, &cfg);
        let err = decode_checkpoint(&bytes[..bytes.len() - 3]).unwrap_err().to_string();
        assert!(err.contains(&format!("{}", bytes.len())) && err.contains(&format!("{}", bytes.len() - 3)), "{err}");
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_checkpoint(&bad).unwrap_err().to_string().contains("magic"));
        let mut v2 = bytes.clone();
        v2[4] = b'2';
        assert!(decode_checkpoint(&v2).unwrap_err().to_string().contains("version"));
        let mut header_only = bytes[..HEADER_LEN].to_vec();
        header_only[HEADER_LEN - 8..].copy_from_slice(&0u64.to_le_bytes());
        assert!(decode_checkpoint(&header_only).unwrap_err().to_string().contains("degenerate"));
        assert!(decode_checkpoint(&bytes[..20]).unwrap_err().to_string().contains("truncated"));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ascl");
        let (state, cfg) = sample(2, 16);
        save_checkpoint(&state, &cfg, &path).unwrap();
        let (_, back) = load_checkpoint(&path).unwrap();
        assert_eq!(back.theta, state.theta);
    }
}
