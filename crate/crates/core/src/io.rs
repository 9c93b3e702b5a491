//! JSON wire formats and CSV trajectory output.
//!
//! Matrix JSON is `{"rows": R, "cols": C, "data": [...]}` with row-major
//! `data`; entries are `[re, im]` pairs, and readers also accept bare
//! numbers for real matrices. Rate matrices load through validation, so a
//! malformed file (column sums off zero) is rejected at the boundary.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::Superoperator;
use crate::error::{CgError, Result};
use crate::linalg::{cplx, CMat, RMat, RVec};
use crate::quantum::{BipartitionTable, TableBlock};
use crate::stochastic::RateMatrix;
use crate::symmetry::UnitaryRep;

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(untagged)]
enum EntryJson {
    Real(f64),
    Complex([f64; 2]),
}

impl EntryJson {
    fn to_complex(self) -> crate::linalg::C64 {
        match self {
            EntryJson::Real(re) => cplx(re, 0.0),
            EntryJson::Complex([re, im]) => cplx(re, im),
        }
    }
}

/// Serialized form of a dense matrix.
#[derive(Serialize, Deserialize, Clone)]
pub struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<EntryJson>,
}

impl MatrixJson {
    pub fn from_cmat(m: &CMat) -> Self {
        let all_real = m.iter().all(|z| z.im == 0.0);
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                data.push(if all_real {
                    EntryJson::Real(z.re)
                } else {
                    EntryJson::Complex([z.re, z.im])
                });
            }
        }
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn from_rmat(m: &RMat) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                data.push(EntryJson::Real(m[(r, c)]));
            }
        }
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_cmat(&self) -> Result<CMat> {
        if self.rows * self.cols != self.data.len() {
            return Err(CgError::ShapeMismatch {
                expected: format!("{} entries", self.rows * self.cols),
                got: format!("{}", self.data.len()),
            });
        }
        let mut m = CMat::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = self.data[r * self.cols + c].to_complex();
            }
        }
        if !crate::linalg::is_finite_mat(&m) {
            return Err(CgError::NonFinite);
        }
        Ok(m)
    }

    pub fn to_rmat(&self) -> Result<RMat> {
        let m = self.to_cmat()?;
        if m.iter().any(|z| z.im != 0.0) {
            return Err(CgError::ShapeMismatch {
                expected: "real matrix".into(),
                got: "complex entries".into(),
            });
        }
        Ok(crate::linalg::real_part(&m))
    }
}

pub fn cmat_to_json_string(m: &CMat) -> String {
    serde_json::to_string(&MatrixJson::from_cmat(m)).expect("matrix serializes")
}

pub fn cmat_from_json_str(s: &str) -> Result<CMat> {
    let mj: MatrixJson = serde_json::from_str(s)?;
    mj.to_cmat()
}

/// Read a probability vector: either a bare JSON array of numbers or an
/// n x 1 (or 1 x n) matrix object.
pub fn rvec_from_json_str(s: &str) -> Result<RVec> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum VecJson {
        Bare(Vec<f64>),
        Matrix(MatrixJson),
    }
    match serde_json::from_str::<VecJson>(s)? {
        VecJson::Bare(v) => Ok(RVec::from_vec(v)),
        VecJson::Matrix(mj) => {
            let m = mj.to_rmat()?;
            if m.ncols() == 1 {
                Ok(m.column(0).into())
            } else if m.nrows() == 1 {
                Ok(m.row(0).transpose())
            } else {
                Err(CgError::ShapeMismatch {
                    expected: "vector".into(),
                    got: format!("{}x{}", m.nrows(), m.ncols()),
                })
            }
        }
    }
}

pub fn rvec_to_json_string(v: &RVec) -> String {
    let values: Vec<f64> = v.iter().cloned().collect();
    serde_json::to_string(&values).expect("vector serializes")
}

impl Serialize for RateMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_rmat(self.matrix()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RateMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let mj = MatrixJson::deserialize(deserializer)?;
        let m = mj.to_rmat().map_err(D::Error::custom)?;
        RateMatrix::new(m).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct UnitaryRepJson {
    dim: usize,
    #[serde(default)]
    generators: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    perm_generators: Vec<Vec<usize>>,
}

impl Serialize for UnitaryRep {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        UnitaryRepJson {
            dim: self.dim(),
            generators: self.generators().iter().map(MatrixJson::from_cmat).collect(),
            perm_generators: Vec::new(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnitaryRep {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = UnitaryRepJson::deserialize(deserializer)?;
        let mut generators = Vec::new();
        for mj in &raw.generators {
            generators.push(mj.to_cmat().map_err(D::Error::custom)?);
        }
        if !raw.perm_generators.is_empty() {
            let perm_rep = UnitaryRep::from_permutations(raw.dim, &raw.perm_generators)
                .map_err(D::Error::custom)?;
            generators.extend(perm_rep.generators().iter().cloned());
        }
        UnitaryRep::new(raw.dim, generators).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    dim: usize,
    basis: Option<MatrixJson>,
    blocks: Vec<TableBlock>,
}

impl Serialize for BipartitionTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TableJson {
            dim: self.dim(),
            basis: self.basis().map(MatrixJson::from_cmat),
            blocks: self.blocks().to_vec(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BipartitionTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = TableJson::deserialize(deserializer)?;
        let basis = match raw.basis {
            Some(mj) => Some(mj.to_cmat().map_err(D::Error::custom)?),
            None => None,
        };
        BipartitionTable::new(raw.dim, basis, raw.blocks).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SuperopJson {
    dim: usize,
    #[serde(flatten)]
    mat: MatrixJson,
}

impl Serialize for Superoperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SuperopJson {
            dim: self.dim(),
            mat: MatrixJson::from_cmat(self.matrix()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Superoperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SuperopJson::deserialize(deserializer)?;
        let m = raw.mat.to_cmat().map_err(D::Error::custom)?;
        Superoperator::new(raw.dim, m).map_err(D::Error::custom)
    }
}

/// CSV of a stochastic trajectory: `time, p_0, ..., p_{n-1}`.
pub fn stochastic_trajectory_csv(times: &[f64], states: &[RVec]) -> String {
    let n = states.first().map(|s| s.len()).unwrap_or(0);
    let mut out = String::from("time");
    for i in 0..n {
        out.push_str(&format!(",p_{i}"));
    }
    out.push('\n');
    for (t, p) in times.iter().zip(states) {
        out.push_str(&format!("{t}"));
        for x in p.iter() {
            out.push_str(&format!(",{x}"));
        }
        out.push('\n');
    }
    out
}

/// CSV of a density-matrix trajectory: `time`, all real parts in
/// row-major order, then all imaginary parts.
pub fn quantum_trajectory_csv(times: &[f64], states: &[CMat]) -> String {
    let d = states.first().map(|s| s.nrows()).unwrap_or(0);
    let mut out = String::from("time");
    for i in 0..d {
        for j in 0..d {
            out.push_str(&format!(",re_{i}_{j}"));
        }
    }
    for i in 0..d {
        for j in 0..d {
            out.push_str(&format!(",im_{i}_{j}"));
        }
    }
    out.push('\n');
    for (t, rho) in times.iter().zip(states) {
        out.push_str(&format!("{t}"));
        for i in 0..d {
            for j in 0..d {
                out.push_str(&format!(",{}", rho[(i, j)].re));
            }
        }
        for i in 0..d {
            for j in 0..d {
                out.push_str(&format!(",{}", rho[(i, j)].im));
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_complex_matrix;
    use crate::stochastic::Partition;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matrix_roundtrip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let m = random_complex_matrix(3, 5, &mut rng);
        let s = cmat_to_json_string(&m);
        let back = cmat_from_json_str(&s).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn real_matrix_emits_bare_numbers() {
        let m = CMat::from_row_slice(1, 2, &[cplx(1.5, 0.0), cplx(-2.0, 0.0)]);
        let s = cmat_to_json_string(&m);
        assert_eq!(s, r#"{"rows":1,"cols":2,"data":[1.5,-2.0]}"#);
    }

    #[test]
    fn readers_accept_both_entry_forms() {
        let s = r#"{"rows":1,"cols":2,"data":[1.0,[0.0,2.0]]}"#;
        let m = cmat_from_json_str(s).unwrap();
        assert_eq!(m[(0, 0)], cplx(1.0, 0.0));
        assert_eq!(m[(0, 1)], cplx(0.0, 2.0));
    }

    #[test]
    fn rate_matrix_json_validates_on_load() {
        // Column sums are not zero: must be rejected.
        let s = r#"{"rows":2,"cols":2,"data":[-1.0,2.0,0.5,-2.0]}"#;
        assert!(serde_json::from_str::<RateMatrix>(s).is_err());
        let ok = r#"{"rows":2,"cols":2,"data":[-1.0,2.0,1.0,-2.0]}"#;
        let q: RateMatrix = serde_json::from_str(ok).unwrap();
        assert_eq!(q.matrix()[(1, 0)], 1.0);
    }

    #[test]
    fn partition_json_schema() {
        let p = Partition::new(3, vec![vec![0], vec![1, 2]]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"n":3,"blocks":[[0],[1,2]]}"#);
        let back: Partition = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
        assert!(serde_json::from_str::<Partition>(r#"{"n":3,"blocks":[[0],[1]]}"#).is_err());
    }

    #[test]
    fn unitary_rep_accepts_permutation_shorthand() {
        let s = r#"{"dim":3,"perm_generators":[[1,0,2]]}"#;
        let rep: UnitaryRep = serde_json::from_str(s).unwrap();
        assert_eq!(rep.generators().len(), 1);
        assert_eq!(rep.generators()[0][(1, 0)], cplx(1.0, 0.0));
    }

    #[test]
    fn table_json_roundtrip() {
        let t = BipartitionTable::from_columns(6, vec![vec![0, 3, 5], vec![1, 4], vec![2]])
            .unwrap();
        let s = serde_json::to_string(&t).unwrap();
        let back: BipartitionTable = serde_json::from_str(&s).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn superoperator_json_roundtrip() {
        let h = crate::linalg::random_hermitian(2, &mut ChaCha8Rng::seed_from_u64(1));
        let l = crate::dynamics::hamiltonian_generator(&h).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        let back: Superoperator = serde_json::from_str(&s).unwrap();
        assert_eq!(l, back);
    }

    #[test]
    fn trajectory_csv_headers() {
        let times = [0.0, 1.0];
        let states = vec![RVec::from_vec(vec![1.0, 0.0]), RVec::from_vec(vec![0.5, 0.5])];
        let csv = stochastic_trajectory_csv(&times, &states);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "time,p_0,p_1");
        assert_eq!(lines.next().unwrap(), "0,1,0");
    }
}
