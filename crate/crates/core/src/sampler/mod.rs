//! Exact Gaussian path sampling on the uniform grid. Two interchangeable
//! backends: a dense Cholesky factor of the grid covariance (any model) and
//! circulant embedding (fractional Brownian motion only, `O(n log n)`).
//! Both draw from counter-based streams keyed by `(seed, path index)`, so a
//! batch is bit-identical no matter how many threads produced it — and the
//! two backends can be used as independent witnesses against each other.

mod cholesky;
mod circulant;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::models::{grid_time, CovarianceModel};
use crate::real::{cast, Real};
use crate::rng::CounterRng;

use circulant::CirculantPlan;

/// Relative size of the diagonal bump tried once when a grid covariance
/// fails to factor on the first pass.
const JITTER_RELATIVE: f64 = 1e-12;

/// Which backend produced (or will produce) a batch of paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    /// Dense lower-triangular factor of the grid covariance.
    Cholesky,
    /// Circulant embedding of the increment covariance (fBm only).
    Circulant,
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SamplerKind::Cholesky => write!(f, "cholesky"),
            SamplerKind::Circulant => write!(f, "circulant"),
        }
    }
}

/// A batch of `m` sampled paths, each with `n + 1` grid values
/// `X(0), X(1/n), …, X(1)`, stored row-major in one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch<T> {
    /// Number of grid steps per path.
    pub n: usize,
    /// Number of paths.
    pub m: usize,
    /// Seed the batch was drawn with.
    pub seed: u64,
    /// Backend that produced the batch.
    pub sampler: SamplerKind,
    /// Fingerprint of the covariance model.
    pub model_id: String,
    /// `m · (n + 1)` values, path-major.
    pub values: Vec<T>,
}

impl<T: Real> PathBatch<T> {
    /// Grid values of path `i`.
    pub fn path(&self, i: usize) -> &[T] {
        let w = self.n + 1;
        &self.values[i * w..(i + 1) * w]
    }

    /// The common time grid `t_k = k/n`.
    pub fn times(&self) -> Vec<T> {
        (0..=self.n).map(|k| grid_time(k, self.n)).collect()
    }
}

enum PreparedInner<T> {
    Cholesky {
        /// Matrix dimension: `n` when the process is pinned at zero (the
        /// `t = 0` row is dropped), `n + 1` otherwise.
        dim: usize,
        drop_origin: bool,
        factor: Vec<T>,
    },
    Circulant(CirculantPlan),
}

/// Reusable per-thread buffers for path generation.
pub struct PathScratch<T> {
    normals: Vec<T>,
    gaussian: Vec<T>,
    spectrum: Vec<Complex<f64>>,
    fft_scratch: Vec<Complex<f64>>,
    increments: Vec<f64>,
}

/// A covariance model fixed to a grid and factored, ready to generate any
/// number of paths by index.
pub struct PreparedSampler<T> {
    n: usize,
    kind: SamplerKind,
    model_id: String,
    inner: PreparedInner<T>,
}

impl<T: Real> PreparedSampler<T> {
    /// Grid size the sampler was prepared for.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    /// Fingerprint of the underlying covariance model.
    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    /// Correctly sized scratch space for [`Self::write_path`].
    pub fn scratch(&self) -> PathScratch<T> {
        match &self.inner {
            PreparedInner::Cholesky { dim, .. } => PathScratch {
                normals: vec![T::zero(); *dim],
                gaussian: vec![T::zero(); *dim],
                spectrum: Vec::new(),
                fft_scratch: Vec::new(),
                increments: Vec::new(),
            },
            PreparedInner::Circulant(plan) => PathScratch {
                normals: Vec::new(),
                gaussian: Vec::new(),
                spectrum: vec![Complex::new(0.0, 0.0); plan.buffer_len()],
                fft_scratch: vec![Complex::new(0.0, 0.0); plan.scratch_len()],
                increments: vec![0.0; plan.n],
            },
        }
    }

    /// Writes path `path_index` of the stream keyed by `seed` into `out`
    /// (length `n + 1`). The same `(seed, path_index)` always produces the
    /// same path, independent of call order and threading.
    pub fn write_path(
        &self,
        seed: u64,
        path_index: u64,
        out: &mut [T],
        scratch: &mut PathScratch<T>,
    ) {
        assert_eq!(out.len(), self.n + 1, "output slice must hold n + 1 values");
        let mut rng = CounterRng::new(seed, path_index);
        match &self.inner {
            PreparedInner::Cholesky { dim, drop_origin, factor } => {
                for z in scratch.normals.iter_mut() {
                    *z = cast::<T>(rng.next_normal());
                }
                cholesky::apply_lower(factor, *dim, &scratch.normals, &mut scratch.gaussian);
                if *drop_origin {
                    out[0] = T::zero();
                    out[1..].copy_from_slice(&scratch.gaussian);
                } else {
                    out.copy_from_slice(&scratch.gaussian);
                }
            }
            PreparedInner::Circulant(plan) => {
                plan.fill_increments(
                    &mut rng,
                    &mut scratch.spectrum,
                    &mut scratch.fft_scratch,
                    &mut scratch.increments,
                );
                out[0] = T::zero();
                let mut acc = 0.0_f64;
                for (slot, inc) in out[1..].iter_mut().zip(&scratch.increments) {
                    acc += *inc;
                    *slot = cast::<T>(acc);
                }
            }
        }
    }
}

/// Grid covariance matrix for the sampling grid of `n` steps: the full
/// `(n+1) × (n+1)` matrix, or the `n × n` minor without the origin when the
/// process is pinned there (`V(0) = 0` would make the full matrix singular).
fn grid_covariance<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
) -> Result<(Vec<T>, usize, bool)> {
    let drop_origin = model.starts_at_zero();
    let offset = usize::from(drop_origin);
    let dim = n + 1 - offset;
    let mut data = vec![T::zero(); dim * dim];
    for i in 0..dim {
        let ti = grid_time::<T>(i + offset, n);
        for j in 0..=i {
            let v = model.covariance(ti, grid_time::<T>(j + offset, n))?;
            data[i * dim + j] = v;
            data[j * dim + i] = v;
        }
    }
    Ok((data, dim, drop_origin))
}

/// Fixes a model to a grid and factors it for the requested backend.
pub fn prepare<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
    kind: SamplerKind,
) -> Result<PreparedSampler<T>> {
    if n == 0 {
        return Err(Error::Parameter {
            field: "n",
            message: "grid size must be at least 1".into(),
        });
    }
    // Validates grid compatibility for table-backed models.
    model.grid_stride(n)?;
    let inner = match kind {
        SamplerKind::Cholesky => {
            let (mut data, dim, drop_origin) = grid_covariance(model, n)?;
            let factor = match cholesky::factor_lower(&data, dim) {
                Ok(l) => l,
                Err(_) => {
                    // One retry with a relative diagonal bump; grid
                    // covariances that are PSD up to rounding recover here.
                    let mut max_diag = T::zero();
                    for i in 0..dim {
                        max_diag = max_diag.max(data[i * dim + i]);
                    }
                    let jitter = cast::<T>(JITTER_RELATIVE) * max_diag;
                    for i in 0..dim {
                        data[i * dim + i] += jitter;
                    }
                    cholesky::factor_lower(&data, dim).map_err(|pivot| {
                        Error::NotPositiveDefinite { min_eigenvalue_estimate: pivot }
                    })?
                }
            };
            PreparedInner::Cholesky { dim, drop_origin, factor }
        }
        SamplerKind::Circulant => {
            let h = model.fbm_hurst().ok_or_else(|| Error::Mode {
                required: "fbm",
                message: format!(
                    "the circulant sampler applies to plain fractional Brownian \
                     motion only; {model} needs the cholesky sampler"
                ),
            })?;
            PreparedInner::Circulant(CirculantPlan::new(
                h.to_f64().expect("hurst index converts to f64"),
                n,
            )?)
        }
    };
    Ok(PreparedSampler {
        n,
        kind,
        model_id: model.to_string(),
        inner,
    })
}

fn sample_with<T: Real>(
    prep: &PreparedSampler<T>,
    m: usize,
    seed: u64,
) -> Result<PathBatch<T>> {
    if m == 0 {
        return Err(Error::Parameter {
            field: "m",
            message: "a batch needs at least one path".into(),
        });
    }
    let width = prep.n + 1;
    let mut values = vec![T::zero(); m * width];
    {
        use rayon::prelude::*;
        values
            .par_chunks_mut(width)
            .enumerate()
            .for_each_init(
                || prep.scratch(),
                |scratch, (i, chunk)| prep.write_path(seed, i as u64, chunk, scratch),
            );
    }
    Ok(PathBatch {
        n: prep.n,
        m,
        seed,
        sampler: prep.kind,
        model_id: prep.model_id.clone(),
        values,
    })
}

/// Draws `m` paths of `n` steps with the requested backend.
pub fn sample<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
    m: usize,
    seed: u64,
    kind: SamplerKind,
) -> Result<PathBatch<T>> {
    let prep = prepare(model, n, kind)?;
    sample_with(&prep, m, seed)
}

/// Dense-factor sampling; works for every covariance model.
pub fn sample_cholesky<T: Real>(
    model: &CovarianceModel<T>,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<PathBatch<T>> {
    sample(model, n, m, seed, SamplerKind::Cholesky)
}

/// Circulant-embedding sampling of fractional Brownian motion with an
/// explicit Hurst index. Unlike the model constructors this accepts the
/// whole admissible range `H ∈ (0, 1)`, so the embedding itself can be
/// exercised at and below `H = ½`.
pub fn sample_fbm_circulant<T: Real>(
    h: T,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<PathBatch<T>> {
    let plan = CirculantPlan::new(h.to_f64().ok_or_else(|| Error::Parameter {
        field: "h",
        message: "hurst index must convert to f64".into(),
    })?, n)?;
    let prep = PreparedSampler {
        n,
        kind: SamplerKind::Circulant,
        model_id: format!("fbm(h={h})"),
        inner: PreparedInner::Circulant(plan),
    };
    sample_with(&prep, m, seed)
}

/// Cache of prepared samplers keyed by `(model fingerprint, n, backend)`,
/// so repeated studies against the same model reuse the factorization.
pub struct FactorCache<T> {
    map: Mutex<HashMap<(String, usize, SamplerKind), Arc<PreparedSampler<T>>>>,
}

impl<T: Real> FactorCache<T> {
    pub fn new() -> Self {
        Self { map: Mutex::new(HashMap::new()) }
    }

    /// Returns the cached sampler for `(model, n, kind)`, preparing and
    /// inserting it on first use.
    pub fn get_or_prepare(
        &self,
        model: &CovarianceModel<T>,
        n: usize,
        kind: SamplerKind,
    ) -> Result<Arc<PreparedSampler<T>>> {
        let key = (model.to_string(), n, kind);
        let mut map = self.map.lock().expect("factor cache lock");
        if let Some(hit) = map.get(&key) {
            return Ok(Arc::clone(hit));
        }
        let prep = Arc::new(prepare(model, n, kind)?);
        map.insert(key, Arc::clone(&prep));
        Ok(prep)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("factor cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<T: Real> Default for FactorCache<T> {
    fn default() -> Self {
        Self::new()
    }
}
