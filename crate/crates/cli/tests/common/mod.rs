#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use qitn::optimize::QudoProblem;
use qitn::{DenseTensor, TensorTrainOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn qitn<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_qitn"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Subcommand arguments that feed a malformed fixture to the matching reader.
pub fn args_for_fixture(path: &Path, out: &Path) -> Vec<String> {
    let name = path.file_name().unwrap().to_string_lossy().into_owned();
    let p = path.to_string_lossy().into_owned();
    let o = out.to_string_lossy().into_owned();
    let kind = name.split('_').next().unwrap();
    let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match kind {
        "tensor" => v(&["convert", "--input", &p, "--output", &o, "--format", "binary"]),
        "train" => v(&["reconstruct", "--input", &p, "--output", &o]),
        "qudo" => v(&["qudo-solve", "--problem", &p, "--output", &o]),
        "tsp" => v(&["tsp-solve", "--problem", &p, "--output", &o]),
        other => panic!("fixture {name} has unknown kind {other}"),
    }
}

pub fn malformed_fixtures() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(fixtures().join("malformed"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(shape: &[usize], rng: &mut impl Rng) -> DenseTensor {
    let n = shape.iter().product();
    DenseTensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub fn random_mpo(ins: &[usize], outs: &[usize], bond: usize, rng: &mut impl Rng) -> TensorTrainOperator {
    let n = ins.len();
    let cores = (0..n)
        .map(|k| {
            let l = if k == 0 { 1 } else { bond };
            let r = if k + 1 == n { 1 } else { bond };
            random_tensor(&[l, ins[k], outs[k], r], rng)
        })
        .collect();
    TensorTrainOperator::new(cores).unwrap()
}

pub fn random_qudo(n: usize, d: usize, rng: &mut impl Rng) -> QudoProblem {
    let v = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let w = (0..n.saturating_sub(1))
        .map(|_| (0..d).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect())
        .collect();
    QudoProblem::new(d, v, w).unwrap()
}

pub fn configurations(n: usize, d: usize) -> Vec<Vec<usize>> {
    (0..d.pow(n as u32))
        .map(|mut i| {
            let mut x = vec![0; n];
            for slot in x.iter_mut().rev() {
                *slot = i % d;
                i /= d;
            }
            x
        })
        .collect()
}

pub fn two_best(p: &QudoProblem) -> (f64, f64) {
    let mut best = (f64::INFINITY, f64::INFINITY);
    for x in configurations(p.n(), p.d()) {
        let c = p.cost(&x);
        if c < best.0 {
            best = (c, best.0);
        } else if c < best.1 {
            best.1 = c;
        }
    }
    best
}

pub fn random_costs(d: usize, symmetric: bool, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    if symmetric {
        let pts: Vec<(f64, f64)> = (0..d).map(|_| (rng.gen(), rng.gen())).collect();
        pts.iter()
            .map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
            .collect()
    } else {
        (0..d)
            .map(|i| (0..d).map(|j| if i == j { 0.0 } else { rng.gen_range(1.0..10.0) }).collect())
            .collect()
    }
}

pub fn qudo_json(p: &QudoProblem) -> Value {
    json!({"n": p.n(), "d": p.d(), "v": p.local_tables(), "w": p.coupling_tables()})
}

pub fn write_json(path: &Path, v: &Value) {
    std::fs::write(path, serde_json::to_vec(v).unwrap()).unwrap();
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

pub fn tensor_json(t: &DenseTensor) -> Value {
    json!({"dims": t.shape(), "data": t.data()})
}

pub fn json_tensor(v: &Value) -> DenseTensor {
    DenseTensor::new(
        serde_json::from_value(v["dims"].clone()).unwrap(),
        serde_json::from_value(v["data"].clone()).unwrap(),
    )
    .unwrap()
}

pub fn configuration_of(v: &Value) -> Vec<usize> {
    serde_json::from_value(v["configuration"].clone()).unwrap()
}
