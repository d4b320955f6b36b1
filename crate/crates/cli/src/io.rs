//! JSON operator files. Complex entries are `[re, im]` pairs, matrices are
//! lists of rows.

use std::fs;
use std::io::Write;
use std::path::Path;

use lindbladkit::linalg::{ComplexMatrix, C64};
use lindbladkit::superop::SpectralChannel;
use lindbladkit::{DensityMatrix, KrausChannel, LindbladGenerator, LinearMap};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub rho: RawMatrix,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GeneratorMatrices {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<RawMatrix>,
    #[serde(default)]
    pub lindblad_ops: Vec<RawMatrix>,
}

/// Generator file. Unknown keys are ignored, so canonical output files can be
/// read back as generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub dim: usize,
    pub matrices: GeneratorMatrices,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelMatrices {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus_ops: Option<Vec<RawMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenops: Option<Vec<RawMatrix>>,
}

/// Channel file: either `kraus_ops`, or `eigenvalues` with `eigenops` for a
/// spectral form that need not be completely positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    pub matrices: ChannelMatrices,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalMatrices {
    pub hamiltonian: RawMatrix,
    pub canonical_ops: Vec<RawMatrix>,
    pub lindblad_ops: Vec<RawMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalFile {
    pub dim: usize,
    pub rates: Vec<f64>,
    pub matrices: CanonicalMatrices,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display())))?;
    f.write_all(text.as_bytes())
        .map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display())))
}

pub fn to_matrix(raw: &RawMatrix, dim: usize, what: &str) -> Result<ComplexMatrix, CliError> {
    if raw.len() != dim || raw.iter().any(|row| row.len() != dim) {
        return Err(CliError::Usage(format!(
            "{what}: expected a {dim}x{dim} matrix"
        )));
    }
    let data = raw
        .iter()
        .flatten()
        .map(|&[re, im]| C64::new(re, im))
        .collect();
    Ok(ComplexMatrix::from_vec(dim, dim, data).expect("checked shape"))
}

pub fn from_matrix(m: &ComplexMatrix) -> RawMatrix {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn check_dim(dim: usize) -> Result<(), CliError> {
    if dim == 0 {
        return Err(CliError::Usage("dim must be at least 1".into()));
    }
    Ok(())
}

impl StateFile {
    pub fn matrix(&self) -> Result<ComplexMatrix, CliError> {
        check_dim(self.dim)?;
        to_matrix(&self.rho, self.dim, "rho")
    }

    pub fn density(&self) -> Result<DensityMatrix, CliError> {
        Ok(DensityMatrix::new(
            self.matrix()?,
            lindbladkit::states::DEFAULT_TOLERANCE,
        )?)
    }
}

impl GeneratorFile {
    pub fn generator(&self) -> Result<LindbladGenerator, CliError> {
        check_dim(self.dim)?;
        let h = match &self.matrices.hamiltonian {
            Some(raw) => to_matrix(raw, self.dim, "hamiltonian")?,
            None => ComplexMatrix::zeros(self.dim, self.dim),
        };
        let ops = self
            .matrices
            .lindblad_ops
            .iter()
            .enumerate()
            .map(|(k, raw)| to_matrix(raw, self.dim, &format!("lindblad_ops[{k}]")))
            .collect::<Result<_, _>>()?;
        Ok(LindbladGenerator::new(h, ops)?)
    }

    #[cfg(test)]
    pub fn from_generator(g: &LindbladGenerator) -> Self {
        Self {
            dim: g.hamiltonian().rows(),
            matrices: GeneratorMatrices {
                hamiltonian: Some(from_matrix(g.hamiltonian())),
                lindblad_ops: g.lindblad_ops().iter().map(from_matrix).collect(),
            },
        }
    }
}

/// A channel read from file, in whichever form it was given.
pub enum Channel {
    Kraus(KrausChannel),
    Spectral(SpectralChannel),
}

impl Channel {
    pub fn as_map(&self) -> &dyn LinearMap {
        match self {
            Channel::Kraus(k) => k,
            Channel::Spectral(s) => s,
        }
    }
}

impl ChannelFile {
    pub fn channel(&self) -> Result<Channel, CliError> {
        check_dim(self.dim)?;
        let read_list = |list: &[RawMatrix], name: &str| {
            list.iter()
                .enumerate()
                .map(|(k, raw)| to_matrix(raw, self.dim, &format!("{name}[{k}]")))
                .collect::<Result<Vec<_>, _>>()
        };
        match (
            &self.matrices.kraus_ops,
            &self.eigenvalues,
            &self.matrices.eigenops,
        ) {
            (Some(ops), None, None) => Ok(Channel::Kraus(KrausChannel::new(read_list(
                ops,
                "kraus_ops",
            )?)?)),
            (None, Some(ev), Some(ops)) => {
                let ops = read_list(ops, "eigenops")?;
                if ops.len() != ev.len() {
                    return Err(CliError::Usage(format!(
                        "{} eigenvalues but {} eigenops",
                        ev.len(),
                        ops.len()
                    )));
                }
                Ok(Channel::Spectral(SpectralChannel::new(
                    self.dim,
                    ev.clone(),
                    ops,
                )?))
            }
            _ => Err(CliError::Usage(
                "channel needs either matrices.kraus_ops or eigenvalues with matrices.eigenops"
                    .into(),
            )),
        }
    }

    pub fn from_kraus(k: &KrausChannel) -> Self {
        Self {
            dim: k.ops()[0].rows(),
            eigenvalues: None,
            matrices: ChannelMatrices {
                kraus_ops: Some(k.ops().iter().map(from_matrix).collect()),
                eigenops: None,
            },
        }
    }

    pub fn from_spectral(s: &SpectralChannel) -> Self {
        Self {
            dim: s.dim(),
            eigenvalues: Some(s.eigenvalues().to_vec()),
            matrices: ChannelMatrices {
                kraus_ops: None,
                eigenops: Some(s.eigenops().iter().map(from_matrix).collect()),
            },
        }
    }
}
