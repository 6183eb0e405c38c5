use std::collections::HashMap;
use std::path::Path;

use rustfft::num_complex::Complex64;

use super::{CustomSymbol, MultiplierSpec, SymbolVector};
use crate::error::{Error, Result};
use crate::spectral::field::same_grid;
use crate::spectral::{GridSpec, SpectralField, VectorField, Wavevector};

/// Multiplier values on every lattice point of a grid.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    grid: GridSpec,
    values: Vec<SymbolVector>,
}

/// Structural checks of a table: divergence, mean mode, conjugate symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableAudit {
    /// `max_k |k·M̂(k)| / max(1, |M̂(k)|)`.
    pub div_max: f64,
    /// `|M̂(0)|`.
    pub mean_abs: f64,
    /// `max_k |M̂(-k) - conj(M̂(k))|` over retained modes.
    pub conj_max: f64,
    /// Largest `|M̂|` on the plane `k_3 = 0` (3D), else 0.
    pub vertical_plane_max: f64,
    pub finite: bool,
}

impl TableAudit {
    pub fn violations(&self, tol: f64) -> Vec<String> {
        let mut v = Vec::new();
        if !self.finite {
            v.push("non-finite symbol entries".to_string());
        }
        if self.div_max >= tol {
            v.push(format!("divergence {:e} >= {tol:e}", self.div_max));
        }
        if self.mean_abs != 0.0 {
            v.push(format!("mean symbol {:e} != 0", self.mean_abs));
        }
        if self.conj_max > tol {
            v.push(format!("conjugate symmetry defect {:e}", self.conj_max));
        }
        v
    }
}

impl SymbolTable {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[SymbolVector] {
        &self.values
    }

    pub fn value(&self, k: Wavevector) -> Option<SymbolVector> {
        self.grid.index_of(k).map(|i| self.values[i])
    }

    pub fn audit(&self) -> TableAudit {
        let t = self.grid.modes();
        let d = self.grid.dim();
        let mut out = TableAudit {
            div_max: 0.0,
            mean_abs: 0.0,
            conj_max: 0.0,
            vertical_plane_max: 0.0,
            finite: true,
        };
        for (idx, m) in self.values.iter().enumerate() {
            let k = t.k[idx];
            let mag = m[..d].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if !mag.is_finite() {
                out.finite = false;
                continue;
            }
            let dot: Complex64 = (0..d).map(|j| m[j] * k[j] as f64).sum();
            out.div_max = out.div_max.max(dot.norm() / mag.max(1.0));
            if idx == 0 {
                out.mean_abs = mag;
            }
            if d == 3 && k[2] == 0 {
                out.vertical_plane_max = out.vertical_plane_max.max(mag);
            }
            if t.retained[idx] {
                let neg = self.values[t.neg[idx]];
                let defect = (0..d)
                    .map(|j| (neg[j] - m[j].conj()).norm())
                    .fold(0.0, f64::max);
                out.conj_max = out.conj_max.max(defect);
            }
        }
        out
    }
}

pub fn build_symbol_table(spec: &MultiplierSpec, grid: GridSpec) -> Result<SymbolTable> {
    spec.validate()?;
    if spec.dim() != grid.dim() {
        return Err(Error::Shape(format!(
            "{} drift needs d = {}, grid has d = {}",
            spec.kind_name(),
            spec.dim(),
            grid.dim()
        )));
    }
    let t = grid.modes();
    let values = t.k.iter().map(|&k| spec.symbol(k)).collect();
    Ok(SymbolTable { grid, values })
}

/// `û_j(k) = M̂_j(k) θ̂(k)`.
pub fn apply_drift(table: &SymbolTable, theta: &SpectralField) -> Result<VectorField> {
    same_grid(table.grid, theta.grid())?;
    let grid = table.grid;
    let comps = (0..grid.dim())
        .map(|j| {
            let coeffs = theta
                .coeffs()
                .iter()
                .zip(&table.values)
                .map(|(c, m)| c * m[j])
                .collect();
            SpectralField::from_raw(grid, coeffs)
        })
        .collect();
    VectorField::new(comps)
}

/// Reads a whitespace-separated symbol table: each line holds the `d` integer
/// components of `k` followed by `d` pairs `(re, im)`. Unlisted wavevectors map
/// to zero; `#` starts a comment.
pub fn load_custom_symbol(path: &Path, dim: usize) -> Result<CustomSymbol> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let map = parse_custom_symbol(&text, dim)?;
    let name = path.display().to_string();
    Ok(CustomSymbol::new(dim, name, move |k| {
        map.get(&k).copied().unwrap_or([Complex64::new(0.0, 0.0); 3])
    }))
}

pub(crate) fn parse_custom_symbol(text: &str, dim: usize) -> Result<HashMap<Wavevector, SymbolVector>> {
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 * dim {
            return Err(Error::Config(format!(
                "symbol table line {}: expected {} fields, found {}",
                lineno + 1,
                3 * dim,
                toks.len()
            )));
        }
        let mut k = [0i64; 3];
        for j in 0..dim {
            k[j] = toks[j].parse().map_err(|_| {
                Error::Config(format!("symbol table line {}: bad integer '{}'", lineno + 1, toks[j]))
            })?;
        }
        let mut m = [Complex64::new(0.0, 0.0); 3];
        for j in 0..dim {
            let parse = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| {
                    Error::Config(format!("symbol table line {}: bad number '{s}'", lineno + 1))
                })
            };
            m[j] = Complex64::new(parse(toks[dim + 2 * j])?, parse(toks[dim + 2 * j + 1])?);
        }
        map.insert(k, m);
    }
    Ok(map)
}
