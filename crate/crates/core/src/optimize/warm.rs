//! Saving and reloading optimized factors, so a run at one parameter value
//! can seed the next.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::{FactorMode, TriangularFactors};
use crate::error::{Error, Result};
use crate::matfile::{read_mat1, write_mat1};

const META_FILE: &str = "factors.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorMeta {
    pub modes: usize,
    pub mode: String,
    /// Free-form description of where the factors came from.
    pub provenance: String,
}

/// Writes `m1.mat`, `m2.mat`, `m3.mat` and `factors.json` into `dir`.
pub fn save_factors(
    dir: impl AsRef<Path>,
    factors: &TriangularFactors,
    provenance: &str,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_mat1(dir.join("m1.mat"), &factors.m1_matrix())?;
    write_mat1(dir.join("m2.mat"), &factors.m2_matrix())?;
    write_mat1(dir.join("m3.mat"), &factors.m3_matrix())?;
    let meta = FactorMeta {
        modes: factors.modes(),
        mode: factors.mode().label(),
        provenance: provenance.to_string(),
    };
    fs::write(dir.join(META_FILE), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

pub fn load_factors(dir: impl AsRef<Path>) -> Result<(TriangularFactors, FactorMeta)> {
    let dir = dir.as_ref();
    let meta_path = dir.join(META_FILE);
    let text = fs::read_to_string(&meta_path)?;
    let meta: FactorMeta = serde_json::from_str(&text)?;
    let mode = FactorMode::parse(&meta.mode)?;
    let f = TriangularFactors::from_matrices(
        mode,
        &read_mat1(dir.join("m1.mat"))?,
        &read_mat1(dir.join("m2.mat"))?,
        &read_mat1(dir.join("m3.mat"))?,
    )?;
    if f.modes() != meta.modes {
        return Err(Error::Parse {
            path: meta_path.display().to_string(),
            msg: format!("factors.json says d = {}, matrices have d = {}", meta.modes, f.modes()),
        });
    }
    Ok((f, meta))
}

/// Loads factors for a run with `d` modes in `mode`, converting between the
/// energy and partial layouts or narrowing to a gap row when needed.
pub fn warm_start_factors(
    dir: impl AsRef<Path>,
    d: usize,
    mode: FactorMode,
) -> Result<(TriangularFactors, FactorMeta)> {
    let (f, meta) = load_factors(dir)?;
    if f.modes() != d {
        return Err(Error::Dimension(format!(
            "warm start has d = {}, problem has d = {d}",
            f.modes()
        )));
    }
    Ok((f.convert(mode)?, meta))
}
