//! Ensemble files: a raw little-endian `f64` matrix (`n_paths × n_records`,
//! row-major) in `<stem>.bin` and a JSON manifest in `<stem>.json`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::path::{PathEnsemble, SimulationSpec};
use crate::error::{Error, Result};

const SCHEMA: &str = "brox.ensemble.v1";

#[derive(Serialize, Deserialize)]
struct Manifest {
    schema: String,
    level: usize,
    n_records: usize,
    spec: SimulationSpec,
}

pub fn save_ensemble(stem: &Path, ens: &PathEnsemble) -> Result<()> {
    let mut w = BufWriter::new(File::create(stem.with_extension("bin"))?);
    for x in ens.positions() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    let manifest = Manifest {
        schema: SCHEMA.into(),
        level: ens.level,
        n_records: ens.n_records(),
        spec: ens.spec,
    };
    std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn load_ensemble(stem: &Path) -> Result<PathEnsemble> {
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
    if manifest.schema != SCHEMA {
        return Err(Error::Format(format!("unknown ensemble schema {}", manifest.schema)));
    }
    let mut bytes = Vec::new();
    BufReader::new(File::open(stem.with_extension("bin"))?).read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Format("ensemble body is not a whole number of f64".into()));
    }
    let positions: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let ens = PathEnsemble::from_positions(manifest.level, manifest.spec, positions)?;
    if ens.n_records() != manifest.n_records {
        return Err(Error::Format("record count disagrees with the manifest".into()));
    }
    Ok(ens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{simulate_em, Drift};

    #[test]
    fn round_trip() {
        let spec = SimulationSpec {
            x0: 1.0,
            t_end: 0.2,
            dt: 0.01,
            n_paths: 4,
            master_seed: 5,
            record_every: 5,
        };
        let ens = simulate_em(&Drift::zero(), &spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("ens");
        save_ensemble(&stem, &ens).unwrap();
        let back = load_ensemble(&stem).unwrap();
        assert_eq!(back.positions(), ens.positions());
        assert_eq!(back.spec, ens.spec);
    }
}
