//! Problem representation and synthetic instance generation.
//!
//! A [`Dictionary`] holds the unit-norm atoms (columns of an M x N matrix),
//! a [`Problem`] pairs a dictionary with an input signal `y` and the
//! threshold `lambda`, and [`generate_instance`] reproduces the canonical
//! synthetic setup: an s-sparse unit-norm coefficient vector measured
//! through the union of the canonical and a sinusoidal (DCT-II) basis, plus
//! Gaussian noise.

use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on unit column norms for dictionaries built by this module.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// How a dictionary was constructed; kept so problem files can round-trip
/// the compact named form instead of an inline matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DictionaryKind {
    /// Union of the canonical basis and the orthonormal DCT-II basis.
    CanonicalSinusoid,
    /// Arbitrary dense matrix.
    Dense,
}

/// An M x N matrix of unit-norm atoms.
#[derive(Clone, Debug)]
pub struct Dictionary {
    columns: Array2<f64>,
    kind: DictionaryKind,
}

impl Dictionary {
    /// Number of rows (signal dimension M).
    pub fn m(&self) -> usize {
        self.columns.nrows()
    }

    /// Number of atoms (N).
    pub fn n(&self) -> usize {
        self.columns.ncols()
    }

    pub fn kind(&self) -> DictionaryKind {
        self.kind
    }

    /// The full M x N matrix.
    pub fn matrix(&self) -> &Array2<f64> {
        &self.columns
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.columns.column(j)
    }

    /// Dense M x |support| submatrix of the selected atoms, in the given order.
    pub fn submatrix(&self, support: &[usize]) -> Array2<f64> {
        let m = self.m();
        let mut sub = Array2::zeros((m, support.len()));
        for (k, &j) in support.iter().enumerate() {
            sub.column_mut(k).assign(&self.columns.column(j));
        }
        sub
    }

    /// Correlations of a signal against every atom: `Phi^T v`.
    pub fn correlate(&self, v: &Array1<f64>) -> Array1<f64> {
        self.columns.t().dot(v)
    }

    /// Synthesis product `Phi a`, skipping zero coefficients.
    pub fn synthesize(&self, a: &Array1<f64>) -> Array1<f64> {
        let mut out = Array1::zeros(self.m());
        for (j, &c) in a.iter().enumerate() {
            if c != 0.0 {
                out.scaled_add(c, &self.columns.column(j));
            }
        }
        out
    }
}

/// Scales every column of `matrix` to unit Euclidean norm.
pub fn normalize_columns(matrix: Array2<f64>) -> Result<Dictionary> {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return Err(Error::invalid("matrix", "must have at least one row and one column"));
    }
    let mut columns = matrix;
    for j in 0..columns.ncols() {
        let norm = columns.column(j).dot(&columns.column(j)).sqrt();
        if norm < 1e-12 {
            return Err(Error::ZeroColumn { index: j, norm });
        }
        columns.column_mut(j).mapv_inplace(|v| v / norm);
    }
    Ok(Dictionary {
        columns,
        kind: DictionaryKind::Dense,
    })
}

/// The m x 2m union of the canonical basis and the orthonormal DCT-II basis.
///
/// The first m columns are the identity; column m+k holds the k-th DCT-II
/// basis vector, so both halves are orthonormal and `Phi Phi^T = 2 I`.
pub fn canonical_sinusoid_dictionary(m: usize) -> Result<Dictionary> {
    if m < 2 {
        return Err(Error::invalid("m", "canonical+sinusoid dictionary needs m >= 2"));
    }
    let n = 2 * m;
    let mut columns = Array2::zeros((m, n));
    for i in 0..m {
        columns[[i, i]] = 1.0;
    }
    let w0 = (1.0 / m as f64).sqrt();
    let wk = (2.0 / m as f64).sqrt();
    for k in 0..m {
        let weight = if k == 0 { w0 } else { wk };
        for i in 0..m {
            let angle = std::f64::consts::PI * (2.0 * i as f64 + 1.0) * k as f64 / (2.0 * m as f64);
            columns[[i, m + k]] = weight * angle.cos();
        }
    }
    Ok(Dictionary {
        columns,
        kind: DictionaryKind::CanonicalSinusoid,
    })
}

/// One sparse-approximation instance: dictionary, input signal, threshold.
#[derive(Clone, Debug)]
pub struct Problem {
    dictionary: Dictionary,
    y: Array1<f64>,
    lambda: f64,
}

impl Problem {
    pub fn new(dictionary: Dictionary, y: Array1<f64>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid("lambda", format!("must be positive, got {lambda}")));
        }
        if y.len() != dictionary.m() {
            return Err(Error::DimensionMismatch {
                context: "input signal y",
                expected: dictionary.m(),
                actual: y.len(),
            });
        }
        Ok(Problem { dictionary, y, lambda })
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn m(&self) -> usize {
        self.dictionary.m()
    }

    pub fn n(&self) -> usize {
        self.dictionary.n()
    }

    /// Driving synaptic inputs `b = Phi^T y`.
    pub fn driving_input(&self) -> Array1<f64> {
        self.dictionary.correlate(&self.y)
    }

    /// Interconnection matrix `G = Phi^T Phi - I`. Symmetric, and zero on the
    /// diagonal when the atoms are unit-norm.
    pub fn interconnection(&self) -> Array2<f64> {
        let phi = self.dictionary.matrix();
        let mut g = phi.t().dot(phi);
        for i in 0..self.n() {
            g[[i, i]] -= 1.0;
        }
        g
    }
}

/// The sparse vector an instance was generated from.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub a0: Array1<f64>,
    pub support: Vec<usize>,
    pub noise_std: f64,
}

/// Synthetic instance on the canonical+sinusoid dictionary (requires n = 2m).
///
/// Deterministic in `seed`; the RNG is a ChaCha8 stream consumed in a fixed
/// order: support positions first, then the s amplitudes, then the m noise
/// components.
pub fn generate_instance(
    seed: u64,
    m: usize,
    n: usize,
    s: usize,
    noise_std: f64,
    lambda: f64,
) -> Result<(Problem, GroundTruth)> {
    if n != 2 * m {
        return Err(Error::invalid(
            "n",
            format!("built-in dictionary requires n = 2m, got m={m}, n={n}"),
        ));
    }
    let dictionary = canonical_sinusoid_dictionary(m)?;
    generate_instance_with(dictionary, seed, s, noise_std, lambda)
}

/// Same as [`generate_instance`] but on a caller-supplied dictionary.
pub fn generate_instance_with(
    dictionary: Dictionary,
    seed: u64,
    s: usize,
    noise_std: f64,
    lambda: f64,
) -> Result<(Problem, GroundTruth)> {
    let n = dictionary.n();
    let m = dictionary.m();
    if s == 0 {
        return Err(Error::invalid("s", "sparsity must be at least 1"));
    }
    if s > n {
        return Err(Error::InvalidSparsity { s, n });
    }
    if !(noise_std >= 0.0) || !noise_std.is_finite() {
        return Err(Error::invalid("noise_std", format!("must be >= 0, got {noise_std}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut support = rand::seq::index::sample(&mut rng, n, s).into_vec();
    support.sort_unstable();

    let mut a0 = Array1::zeros(n);
    loop {
        let amps: Vec<f64> = (0..s).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm: f64 = amps.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm >= 1e-12 {
            for (&j, &amp) in support.iter().zip(amps.iter()) {
                a0[j] = amp / norm;
            }
            break;
        }
        // astronomically unlikely; redraw keeps the instance well defined
    }

    let mut y = dictionary.synthesize(&a0);
    for i in 0..m {
        let z: f64 = StandardNormal.sample(&mut rng);
        y[i] += noise_std * z;
    }

    let problem = Problem::new(dictionary, y, lambda)?;
    let truth = GroundTruth {
        a0,
        support,
        noise_std,
    };
    Ok((problem, truth))
}

// =========================================================================
// JSON problem files
// =========================================================================
//
// Self-describing container: dimensions, lambda, the signal, and either a
// named dictionary constructor or an inline row-major matrix.

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    m: usize,
    n: usize,
    lambda: f64,
    y: Vec<f64>,
    dictionary: DictionaryJson,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DictionaryJson {
    CanonicalSinusoid { m: usize },
    Dense { rows: Vec<Vec<f64>> },
}

#[derive(Serialize, Deserialize)]
struct GroundTruthJson {
    a0: Vec<f64>,
    support: Vec<usize>,
    noise_std: f64,
}

impl Problem {
    pub fn to_json(&self) -> String {
        let dictionary = match self.dictionary.kind {
            DictionaryKind::CanonicalSinusoid => DictionaryJson::CanonicalSinusoid { m: self.m() },
            DictionaryKind::Dense => DictionaryJson::Dense {
                rows: self
                    .dictionary
                    .matrix()
                    .rows()
                    .into_iter()
                    .map(|r| r.to_vec())
                    .collect(),
            },
        };
        let doc = ProblemJson {
            m: self.m(),
            n: self.n(),
            lambda: self.lambda,
            y: self.y.to_vec(),
            dictionary,
        };
        serde_json::to_string_pretty(&doc).expect("problem serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProblemJson =
            serde_json::from_str(text).map_err(|e| Error::ProblemFile(e.to_string()))?;
        if doc.m == 0 || doc.n == 0 {
            return Err(Error::ProblemFile("field `m`/`n`: must be positive".into()));
        }
        if doc.y.len() != doc.m {
            return Err(Error::ProblemFile(format!(
                "field `y`: expected length m={}, got {}",
                doc.m,
                doc.y.len()
            )));
        }
        if !(doc.lambda > 0.0) {
            return Err(Error::ProblemFile(format!(
                "field `lambda`: must be positive, got {}",
                doc.lambda
            )));
        }
        let dictionary = match doc.dictionary {
            DictionaryJson::CanonicalSinusoid { m } => {
                if m != doc.m || doc.n != 2 * m {
                    return Err(Error::ProblemFile(format!(
                        "field `dictionary`: canonical_sinusoid needs m={} and n=2m, file has m={}, n={}",
                        m, doc.m, doc.n
                    )));
                }
                canonical_sinusoid_dictionary(m)?
            }
            DictionaryJson::Dense { rows } => {
                if rows.len() != doc.m {
                    return Err(Error::ProblemFile(format!(
                        "field `dictionary.rows`: expected {} rows, got {}",
                        doc.m,
                        rows.len()
                    )));
                }
                let mut mat = Array2::zeros((doc.m, doc.n));
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != doc.n {
                        return Err(Error::ProblemFile(format!(
                            "field `dictionary.rows`: row {} has length {}, expected n={}",
                            i,
                            row.len(),
                            doc.n
                        )));
                    }
                    for (j, &v) in row.iter().enumerate() {
                        mat[[i, j]] = v;
                    }
                }
                for j in 0..doc.n {
                    let norm = mat.column(j).dot(&mat.column(j)).sqrt();
                    if (norm - 1.0).abs() > 1e-6 {
                        return Err(Error::ProblemFile(format!(
                            "field `dictionary.rows`: column {j} has norm {norm:.9}, expected 1"
                        )));
                    }
                }
                // Columns are near-unit by the check above; renormalize so the
                // in-memory dictionary meets the 1e-9 invariant exactly.
                normalize_columns(mat)?
            }
        };
        Problem::new(dictionary, Array1::from(doc.y), doc.lambda)
    }
}

impl GroundTruth {
    pub fn to_json(&self) -> String {
        let doc = GroundTruthJson {
            a0: self.a0.to_vec(),
            support: self.support.clone(),
            noise_std: self.noise_std,
        };
        serde_json::to_string_pretty(&doc).expect("ground-truth serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GroundTruthJson =
            serde_json::from_str(text).map_err(|e| Error::ProblemFile(e.to_string()))?;
        let n = doc.a0.len();
        for &j in &doc.support {
            if j >= n {
                return Err(Error::ProblemFile(format!(
                    "field `support`: index {j} out of range for a0 of length {n}"
                )));
            }
        }
        let nonzeros: Vec<usize> = doc
            .a0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, _)| j)
            .collect();
        let mut sorted_support = doc.support.clone();
        sorted_support.sort_unstable();
        if nonzeros != sorted_support {
            return Err(Error::ProblemFile(
                "field `support`: does not match the nonzeros of a0".into(),
            ));
        }
        Ok(GroundTruth {
            a0: Array1::from(doc.a0),
            support: doc.support,
            noise_std: doc.noise_std,
        })
    }
}
