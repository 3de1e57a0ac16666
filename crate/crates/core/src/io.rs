//! JSON file formats: states as {"kind", "dims", "vector"|"matrix"} with
//! complex entries encoded as [re, im] pairs, channels as {"kraus": ...} or
//! {"bloch": {"L", "l"}}, and campaign reports. Writers emit full double
//! precision (shortest round-trip encoding).

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{Mat3, QubitChannel, Vec3};
use crate::error::{Error, Result};
use crate::qlinalg::{ComplexMatrix, DimsVector};
use crate::states::{DensityOperator, PureState};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum StateFile {
    Pure { dims: Vec<usize>, vector: Vec<[f64; 2]> },
    Mixed { dims: Vec<usize>, matrix: Vec<Vec<[f64; 2]>> },
}

/// A state loaded from disk, preserving purity information.
#[derive(Debug, Clone)]
pub enum LoadedState {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl LoadedState {
    pub fn dims(&self) -> &DimsVector {
        match self {
            LoadedState::Pure(p) => p.dims(),
            LoadedState::Mixed(m) => m.dims(),
        }
    }

    /// View as a density operator (outer product for pure states).
    pub fn to_density(&self) -> DensityOperator {
        match self {
            LoadedState::Pure(p) => p.density(),
            LoadedState::Mixed(m) => m.clone(),
        }
    }
}

fn pack(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpack(p: &[f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn pure_to_json(psi: &PureState) -> String {
    let file = StateFile::Pure {
        dims: psi.dims().as_slice().to_vec(),
        vector: psi.amplitudes().iter().map(pack).collect(),
    };
    serde_json::to_string_pretty(&file).expect("state serialization is infallible")
}

pub fn mixed_to_json(rho: &DensityOperator) -> String {
    let m = rho.matrix();
    let matrix = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| pack(&m.get(i, j))).collect())
        .collect();
    let file = StateFile::Mixed { dims: rho.dims().as_slice().to_vec(), matrix };
    serde_json::to_string_pretty(&file).expect("state serialization is infallible")
}

pub fn state_from_json(text: &str) -> Result<LoadedState> {
    let file: StateFile = serde_json::from_str(text)?;
    match file {
        StateFile::Pure { dims, vector } => {
            let dims = DimsVector::new(&dims)?;
            let amps = vector.iter().map(unpack).collect();
            Ok(LoadedState::Pure(PureState::new(dims, amps)?))
        }
        StateFile::Mixed { dims, matrix } => {
            let dims = DimsVector::new(&dims)?;
            let n = matrix.len();
            let mut entries = Vec::with_capacity(n * n);
            for row in &matrix {
                if row.len() != n {
                    return Err(Error::WrongDims("matrix rows of unequal length".into()));
                }
                entries.extend(row.iter().map(unpack));
            }
            Ok(LoadedState::Mixed(DensityOperator::new(
                ComplexMatrix::new(n, n, entries)?,
                dims,
            )?))
        }
    }
}

pub fn write_pure(path: &Path, psi: &PureState) -> Result<()> {
    fs::write(path, pure_to_json(psi) + "\n")?;
    Ok(())
}

pub fn write_mixed(path: &Path, rho: &DensityOperator) -> Result<()> {
    fs::write(path, mixed_to_json(rho) + "\n")?;
    Ok(())
}

pub fn read_state(path: &Path) -> Result<LoadedState> {
    state_from_json(&fs::read_to_string(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct BlochForm {
    #[serde(rename = "L")]
    linear: Mat3,
    l: Vec3,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ChannelFile {
    Kraus { kraus: Vec<Vec<Vec<[f64; 2]>>> },
    Bloch { bloch: BlochForm },
}

pub fn channel_from_json(text: &str) -> Result<QubitChannel> {
    let file: ChannelFile = serde_json::from_str(text)?;
    match file {
        ChannelFile::Kraus { kraus } => {
            let mut ops = Vec::with_capacity(kraus.len());
            for rows in &kraus {
                let n = rows.len();
                let mut entries = Vec::with_capacity(n * n);
                for row in rows {
                    if row.len() != n {
                        return Err(Error::WrongDims("Kraus rows of unequal length".into()));
                    }
                    entries.extend(row.iter().map(unpack));
                }
                ops.push(ComplexMatrix::new(n, n, entries)?);
            }
            QubitChannel::from_kraus(ops)
        }
        ChannelFile::Bloch { bloch } => QubitChannel::from_bloch(bloch.linear, bloch.l),
    }
}

pub fn channel_to_json(ch: &QubitChannel) -> String {
    let file = match ch.kraus() {
        Some(ops) => ChannelFile::Kraus {
            kraus: ops
                .iter()
                .map(|k| {
                    (0..k.rows())
                        .map(|i| (0..k.cols()).map(|j| pack(&k.get(i, j))).collect())
                        .collect()
                })
                .collect(),
        },
        None => ChannelFile::Bloch {
            bloch: BlochForm { linear: *ch.bloch_linear(), l: *ch.bloch_shift() },
        },
    };
    serde_json::to_string_pretty(&file).expect("channel serialization is infallible")
}

pub fn read_channel(path: &Path) -> Result<QubitChannel> {
    channel_from_json(&fs::read_to_string(path)?)
}

pub fn write_channel(path: &Path, ch: &QubitChannel) -> Result<()> {
    fs::write(path, channel_to_json(ch) + "\n")?;
    Ok(())
}
