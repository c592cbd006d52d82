//! On-disk formats.
//!
//! Tensors are JSON `{"dims": [...], "data": [...]}` (row-major) or a binary
//! file: `TTKT`, version byte `0x01`, rank as `u32` LE, each dim as `u64` LE,
//! then the data as `f64` LE. Readers detect the binary form by its magic.

use std::path::Path;

use qitn::optimize::{QudoProblem, TspVariant};
use qitn::{DenseTensor, TensorTrain, TensorTrainOperator};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const MAGIC: &[u8; 4] = b"TTKT";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TensorFormat {
    Text,
    Binary,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorDoc {
    dims: Vec<usize>,
    data: Vec<f64>,
}

fn tensor_from_doc(doc: TensorDoc) -> Result<DenseTensor, CliError> {
    DenseTensor::new(doc.dims, doc.data).map_err(|e| CliError::Input(e.to_string()))
}

fn doc_of(t: &DenseTensor) -> Result<TensorDoc, CliError> {
    if !t.is_finite() {
        return Err(CliError::Output(
            "text format cannot hold non-finite values; use the binary format".into(),
        ));
    }
    Ok(TensorDoc {
        dims: t.shape().to_vec(),
        data: t.data().to_vec(),
    })
}

pub fn encode_binary(t: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(9 + 8 * (t.rank() + t.len()));
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(t.rank() as u32).to_le_bytes());
    for &d in t.shape() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &x in t.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<DenseTensor, CliError> {
    let bad = |msg: &str| CliError::Input(format!("binary tensor: {msg}"));
    if bytes.len() < 9 || &bytes[..4] != MAGIC {
        return Err(bad("missing header"));
    }
    if bytes[4] != VERSION {
        return Err(bad(&format!("unsupported version {}", bytes[4])));
    }
    let rank = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let mut pos = 9usize;
    let dims_end = rank
        .checked_mul(8)
        .and_then(|n| n.checked_add(pos))
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| bad("truncated dimensions"))?;
    let mut dims = Vec::with_capacity(rank);
    let mut count: u128 = 1;
    while pos < dims_end {
        let d = u64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap());
        count = count.saturating_mul(d as u128);
        dims.push(usize::try_from(d).map_err(|_| bad("dimension too large"))?);
        pos += 8;
    }
    let expected = count.saturating_mul(8).saturating_add(pos as u128);
    if expected != bytes.len() as u128 {
        return Err(bad(&format!(
            "expected {expected} bytes for dims {dims:?}, found {}",
            bytes.len()
        )));
    }
    let data = bytes[pos..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseTensor::new(dims, data).map_err(|e| CliError::Input(e.to_string()))
}

pub fn encode_text(t: &DenseTensor) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_vec(&doc_of(t)?).map_err(|e| CliError::Output(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

pub fn decode_tensor(bytes: &[u8]) -> Result<DenseTensor, CliError> {
    if bytes.starts_with(MAGIC) {
        return decode_binary(bytes);
    }
    let doc: TensorDoc =
        serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("tensor file: {e}")))?;
    tensor_from_doc(doc)
}

pub fn encode_tensor(t: &DenseTensor, format: TensorFormat) -> Result<Vec<u8>, CliError> {
    match format {
        TensorFormat::Text => encode_text(t),
        TensorFormat::Binary => Ok(encode_binary(t)),
    }
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_tensor(path: &Path) -> Result<DenseTensor, CliError> {
    decode_tensor(&read_bytes(path)?)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    serde_json::from_slice(&read_bytes(path)?)
        .map_err(|e| CliError::Input(format!("{what} {}: {e}", path.display())))
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_vec_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainDoc {
    kind: String,
    phys_dims: Value,
    bond_dims: Vec<usize>,
    cores: Vec<TensorDoc>,
}

pub enum Train {
    Mps(TensorTrain),
    Mpo(TensorTrainOperator),
}

impl TrainDoc {
    pub fn from_mps(t: &TensorTrain) -> Result<Self, CliError> {
        Ok(Self {
            kind: "mps".into(),
            phys_dims: Value::from(t.phys_dims()),
            bond_dims: t.bond_dims(),
            cores: t.cores().iter().map(doc_of).collect::<Result<_, _>>()?,
        })
    }

    pub fn from_mpo(op: &TensorTrainOperator) -> Result<Self, CliError> {
        let dims: Vec<Value> = op
            .in_dims()
            .into_iter()
            .zip(op.out_dims())
            .map(|(i, o)| Value::from(vec![i, o]))
            .collect();
        Ok(Self {
            kind: "mpo".into(),
            phys_dims: Value::from(dims),
            bond_dims: op.bond_dims(),
            cores: op.cores().iter().map(doc_of).collect::<Result<_, _>>()?,
        })
    }

    pub fn into_train(self) -> Result<Train, CliError> {
        let bad = |msg: String| CliError::Input(format!("train file: {msg}"));
        let cores = self
            .cores
            .into_iter()
            .map(tensor_from_doc)
            .collect::<Result<Vec<_>, _>>()?;
        let train = match self.kind.as_str() {
            "mps" => {
                let t = TensorTrain::new(cores).map_err(|e| bad(e.to_string()))?;
                let declared: Vec<usize> = serde_json::from_value(self.phys_dims)
                    .map_err(|e| bad(format!("phys_dims: {e}")))?;
                if declared != t.phys_dims() {
                    return Err(bad(format!(
                        "phys_dims {declared:?} disagree with cores {:?}",
                        t.phys_dims()
                    )));
                }
                if self.bond_dims != t.bond_dims() {
                    return Err(bad("bond_dims disagree with cores".into()));
                }
                Train::Mps(t)
            }
            "mpo" => {
                let op = TensorTrainOperator::new(cores).map_err(|e| bad(e.to_string()))?;
                let declared: Vec<[usize; 2]> = serde_json::from_value(self.phys_dims)
                    .map_err(|e| bad(format!("phys_dims: {e}")))?;
                let actual: Vec<[usize; 2]> = op
                    .in_dims()
                    .into_iter()
                    .zip(op.out_dims())
                    .map(|(i, o)| [i, o])
                    .collect();
                if declared != actual {
                    return Err(bad(format!(
                        "phys_dims {declared:?} disagree with cores {actual:?}"
                    )));
                }
                if self.bond_dims != op.bond_dims() {
                    return Err(bad("bond_dims disagree with cores".into()));
                }
                Train::Mpo(op)
            }
            other => return Err(bad(format!("unknown kind {other:?}"))),
        };
        Ok(train)
    }
}

pub fn read_train(path: &Path) -> Result<Train, CliError> {
    read_json::<TrainDoc>(path, "train file")?.into_train()
}

pub fn read_mpo(path: &Path) -> Result<TensorTrainOperator, CliError> {
    match read_train(path)? {
        Train::Mpo(op) => Ok(op),
        Train::Mps(_) => Err(CliError::Input(format!(
            "{}: expected an mpo train file",
            path.display()
        ))),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QudoDoc {
    pub n: usize,
    pub d: usize,
    pub v: Vec<Vec<f64>>,
    pub w: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TspDoc {
    pub cost_matrix: Vec<Vec<f64>>,
    pub variant: String,
}

impl QudoDoc {
    pub fn from_problem(p: &QudoProblem) -> Self {
        Self {
            n: p.n(),
            d: p.d(),
            v: p.local_tables().to_vec(),
            w: p.coupling_tables(),
        }
    }

    pub fn into_problem(self) -> Result<QudoProblem, CliError> {
        if self.v.len() != self.n {
            return Err(CliError::Input(format!(
                "problem file: n = {} but {} local tables",
                self.n,
                self.v.len()
            )));
        }
        QudoProblem::new(self.d, self.v, self.w)
            .map_err(|e| CliError::Input(format!("problem file: {e}")))
    }
}

pub fn read_qudo(path: &Path) -> Result<QudoProblem, CliError> {
    read_json::<QudoDoc>(path, "qudo problem file")?.into_problem()
}

pub fn read_tsp(path: &Path) -> Result<(Vec<Vec<f64>>, TspVariant), CliError> {
    let doc = read_json::<TspDoc>(path, "tsp problem file")?;
    let variant = doc
        .variant
        .parse::<TspVariant>()
        .map_err(|e| CliError::Input(format!("tsp problem file: {e}")))?;
    qitn::optimize::validate_costs(&doc.cost_matrix)
        .map_err(|e| CliError::Input(format!("tsp problem file: {e}")))?;
    Ok((doc.cost_matrix, variant))
}

/// A compressed dense layer: weight operator plus bias train and the shape plan that produced them.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDoc {
    pub row_factors: Vec<usize>,
    pub col_factors: Vec<usize>,
    pub pairing: Vec<usize>,
    pub weights: TrainDoc,
    pub bias: TrainDoc,
}
