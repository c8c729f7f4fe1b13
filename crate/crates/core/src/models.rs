//! Catalogue of centered Gaussian models on `[0,1]`, each described by its
//! covariance `R(t,s)`, variance `V(t) = R(t,t)`, variogram
//! `ϑ(t,s) = V(t) + V(s) − 2R(t,s)`, Hölder rate index `H ∈ (½,1)` and
//! leading variogram coefficient `σ²` (so that `ϑ(t,s) = σ²|t−s|^{2H} + g(t,s)`
//! with `g` lower order near the diagonal, or at least enveloped by
//! `σ₋²|t−s|^{2H} ≤ ϑ ≤ σ₊²|t−s|^{2H}`).
//!
//! Built-ins: fractional Brownian motion, independent mixtures of fBm,
//! sub-fractional Brownian motion, bifractional Brownian motion, and a
//! stationary process with powered-exponential covariance. A custom model
//! accepts a user-supplied covariance table on its own grid together with
//! user-declared `(H, σ²)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::real::{cast, cast_usize, Real};

/// Discriminant of the model catalogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Fbm,
    MultiMixedFbm,
    SubFbm,
    BiFbm,
    StationaryPowExp,
    Custom,
}

/// Equidistant grid point `t_k = k/n`.
#[inline]
pub fn grid_time<T: Real>(k: usize, n: usize) -> T {
    cast_usize::<T>(k) / cast_usize::<T>(n)
}

/// A centered Gaussian process on `[0,1]` with the derived rate parameters.
/// Immutable after construction; parameter validation happens once, here.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel<T> {
    inner: Inner<T>,
}

#[derive(Debug, Clone, PartialEq)]
enum Inner<T> {
    Fbm {
        h: T,
    },
    MultiMixed {
        /// Component weights `σ_k` (standard deviations), `Σ σ_k² = 1`.
        weights: Vec<T>,
        hs: Vec<T>,
        h_eff: T,
        sigma2: T,
    },
    SubFbm {
        h: T,
        /// Normalization `1/(2 − 2^{2H−1})` making `V(1) = 1`.
        norm: T,
    },
    BiFbm {
        h: T,
        k: T,
    },
    StationaryPowExp {
        h: T,
    },
    Custom(CustomModel<T>),
}

/// User-supplied covariance on the grid `t_j = j/n`, stored as the lower
/// triangle (`rows[k][j] = R(t_k, t_j)` for `j ≤ k`), with declared rate
/// parameters. Only grid times (and their divisor sub-grids) are valid
/// arguments; the declared `(H, σ²)` are taken on faith apart from the
/// structural checks at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomModel<T> {
    n: usize,
    rows: Vec<Vec<T>>,
    h_eff: T,
    sigma2: T,
}

fn check_h_range<T: Real>(h: T, field: &'static str) -> Result<()> {
    let half = cast::<T>(0.5);
    if !(h > half && h < T::one()) {
        return Err(Error::Parameter {
            field,
            message: format!("rate index must lie in (1/2, 1), got {h}"),
        });
    }
    Ok(())
}

impl<T: Real> CovarianceModel<T> {
    /// Fractional Brownian motion with Hurst index `h ∈ (½, 1)`:
    /// `R(t,s) = ½(t^{2H} + s^{2H} − |t−s|^{2H})`.
    pub fn fbm(h: T) -> Result<Self> {
        check_h_range(h, "h")?;
        Ok(Self { inner: Inner::Fbm { h } })
    }

    /// Independent mixture `X = Σ σ_k B^{H_k}` of fBms. `weights` are the
    /// `σ_k` themselves and must satisfy `Σ σ_k² = 1` (within `1e−9`) so that
    /// `V(1) = 1`. The rate index is `min_k H_k`, and `σ²` aggregates the
    /// squared weights of every component attaining that exact minimum.
    pub fn multi_mixed_fbm(weights: Vec<T>, hs: Vec<T>) -> Result<Self> {
        if weights.is_empty() || weights.len() != hs.len() {
            return Err(Error::Parameter {
                field: "weights",
                message: format!(
                    "need equal, non-zero numbers of weights and indices, got {} and {}",
                    weights.len(),
                    hs.len()
                ),
            });
        }
        let mut norm2 = T::zero();
        for &w in &weights {
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::Parameter {
                    field: "weights",
                    message: format!("weights must be positive and finite, got {w}"),
                });
            }
            norm2 += w * w;
        }
        if (norm2 - T::one()).abs() > cast(1e-9) {
            return Err(Error::Parameter {
                field: "weights",
                message: format!("squared weights must sum to 1 (got {norm2})"),
            });
        }
        let mut h_eff = hs[0];
        for &h in &hs {
            check_h_range(h, "hs")?;
            if h < h_eff {
                h_eff = h;
            }
        }
        let mut sigma2 = T::zero();
        for (&w, &h) in weights.iter().zip(&hs) {
            if h == h_eff {
                sigma2 += w * w;
            }
        }
        Ok(Self {
            inner: Inner::MultiMixed { weights, hs, h_eff, sigma2 },
        })
    }

    /// Sub-fractional Brownian motion, normalized so `V(1) = 1`:
    /// `R(t,s) = σ₀²(s^{2H} + t^{2H} − ½((s+t)^{2H} + |s−t|^{2H}))` with
    /// `σ₀² = 1/(2 − 2^{2H−1})`.
    pub fn sub_fbm(h: T) -> Result<Self> {
        check_h_range(h, "h")?;
        let two = cast::<T>(2.0);
        let norm = T::one() / (two - two.powf(two * h - T::one()));
        Ok(Self { inner: Inner::SubFbm { h, norm } })
    }

    /// Bifractional Brownian motion
    /// `R(t,s) = 2^{−K}((t^{2H} + s^{2H})^K − |t−s|^{2HK})` with rate index
    /// `HK ∈ (½, 1)`; its variogram is enveloped by
    /// `2^{−K}|t−s|^{2HK} ≤ ϑ(t,s) ≤ 2^{1−K}|t−s|^{2HK}`.
    pub fn bifbm(h: T, k: T) -> Result<Self> {
        if !(h > T::zero() && h < T::one()) {
            return Err(Error::Parameter {
                field: "h",
                message: format!("bifractional H must lie in (0, 1), got {h}"),
            });
        }
        if !(k > T::zero() && k <= T::one()) {
            return Err(Error::Parameter {
                field: "k",
                message: format!("bifractional K must lie in (0, 1], got {k}"),
            });
        }
        check_h_range(h * k, "h*k")?;
        Ok(Self { inner: Inner::BiFbm { h, k } })
    }

    /// Stationary process with powered-exponential covariance
    /// `r(t) = e^{−|t|^{2H}}`, so `V ≡ 1` and
    /// `ϑ(t,s) = 2(1 − e^{−|t−s|^{2H}}) = 2|t−s|^{2H} + g(t,s)` with `g`
    /// lower order; hence `σ² = 2` here.
    pub fn stationary_powexp(h: T) -> Result<Self> {
        check_h_range(h, "h")?;
        Ok(Self { inner: Inner::StationaryPowExp { h } })
    }

    /// Custom covariance table on the grid `t_j = j/n` with declared rate
    /// parameters. See [`CustomModel`].
    pub fn custom(rows: Vec<Vec<T>>, h_eff: T, sigma2: T) -> Result<Self> {
        check_h_range(h_eff, "h_eff")?;
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return Err(Error::Parameter {
                field: "sigma2",
                message: format!("sigma2 must be positive and finite, got {sigma2}"),
            });
        }
        if rows.len() < 2 {
            return Err(Error::Parameter {
                field: "rows",
                message: format!(
                    "need at least 2 rows (grid {{0, 1}}), got {}",
                    rows.len()
                ),
            });
        }
        let n = rows.len() - 1;
        for (k, row) in rows.iter().enumerate() {
            if row.len() != k + 1 {
                return Err(Error::Parameter {
                    field: "rows",
                    message: format!("row {k} must have {} entries, got {}", k + 1, row.len()),
                });
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::Parameter {
                        field: "rows",
                        message: format!("covariance entries must be finite, got {v}"),
                    });
                }
            }
        }
        let tol = T::identity_tol();
        for k in 1..=n {
            if rows[k][k] < rows[k - 1][k - 1] - tol {
                return Err(Error::Parameter {
                    field: "rows",
                    message: format!(
                        "variance must be non-decreasing along the grid: V(t_{}) = {} < V(t_{}) = {}",
                        k,
                        rows[k][k],
                        k - 1,
                        rows[k - 1][k - 1]
                    ),
                });
            }
        }
        for k in 0..=n {
            for j in 0..k {
                let theta = rows[k][k] + rows[j][j] - (rows[k][j] + rows[k][j]);
                if theta < -tol {
                    return Err(Error::Parameter {
                        field: "rows",
                        message: format!(
                            "variogram must be non-negative: got {theta} at grid pair ({j}, {k})"
                        ),
                    });
                }
            }
        }
        Ok(Self {
            inner: Inner::Custom(CustomModel { n, rows, h_eff, sigma2 }),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match &self.inner {
            Inner::Fbm { .. } => ModelKind::Fbm,
            Inner::MultiMixed { .. } => ModelKind::MultiMixedFbm,
            Inner::SubFbm { .. } => ModelKind::SubFbm,
            Inner::BiFbm { .. } => ModelKind::BiFbm,
            Inner::StationaryPowExp { .. } => ModelKind::StationaryPowExp,
            Inner::Custom(_) => ModelKind::Custom,
        }
    }

    /// The rate exponent `H`: the Hurst index for fBm/sub-fBm/stationary,
    /// `HK` for bifBm, `min H_k` for mixtures, declared for custom tables.
    pub fn holder_index(&self) -> T {
        match &self.inner {
            Inner::Fbm { h } | Inner::SubFbm { h, .. } | Inner::StationaryPowExp { h } => *h,
            Inner::MultiMixed { h_eff, .. } => *h_eff,
            Inner::BiFbm { h, k } => *h * *k,
            Inner::Custom(c) => c.h_eff,
        }
    }

    /// Leading variogram coefficient `σ²`. For the envelope models (sub-fBm,
    /// bifBm) this is the interior small-scale limit of `ϑ(t,s)/|t−s|^{2H}`
    /// (`1/(2−2^{2H−1})` and `2^{1−K}` respectively), which the exact-rate
    /// constant would carry if the envelope were tight.
    pub fn sigma2(&self) -> T {
        match &self.inner {
            Inner::Fbm { .. } => T::one(),
            Inner::MultiMixed { sigma2, .. } => *sigma2,
            Inner::SubFbm { norm, .. } => *norm,
            Inner::BiFbm { k, .. } => cast::<T>(2.0).powf(T::one() - *k),
            Inner::StationaryPowExp { .. } => cast(2.0),
            Inner::Custom(c) => c.sigma2,
        }
    }

    /// Whether the variogram only envelopes `σ²|t−s|^{2H}` between two
    /// constants rather than matching it to first order on the diagonal.
    /// Custom tables are treated as envelope-only since nothing beyond the
    /// declared parameters is known about them.
    pub fn is_envelope_only(&self) -> bool {
        matches!(
            self.kind(),
            ModelKind::SubFbm | ModelKind::BiFbm | ModelKind::Custom
        )
    }

    /// Hurst index when the model is plain fBm (the only model the circulant
    /// sampler applies to).
    pub fn fbm_hurst(&self) -> Option<T> {
        match &self.inner {
            Inner::Fbm { h } => Some(*h),
            _ => None,
        }
    }

    fn check_domain(t: T, field: &'static str) -> Result<()> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::Parameter {
                field,
                message: format!("time must lie in [0,1], got {t}"),
            });
        }
        Ok(())
    }

    /// Covariance `R(t,s)`, symmetric in its arguments. For custom models
    /// `t` and `s` must coincide with grid times of the stored table.
    pub fn covariance(&self, t: T, s: T) -> Result<T> {
        Self::check_domain(t, "t")?;
        Self::check_domain(s, "s")?;
        let two = cast::<T>(2.0);
        Ok(match &self.inner {
            Inner::Fbm { h } => fbm_cov(t, s, *h),
            Inner::MultiMixed { weights, hs, .. } => {
                let mut acc = T::zero();
                for (&w, &h) in weights.iter().zip(hs) {
                    acc += w * w * fbm_cov(t, s, h);
                }
                acc
            }
            Inner::SubFbm { h, norm } => {
                let p = two * *h;
                *norm
                    * (s.powf(p) + t.powf(p)
                        - cast::<T>(0.5) * ((s + t).powf(p) + (t - s).abs().powf(p)))
            }
            Inner::BiFbm { h, k } => {
                let p = two * *h;
                two.powf(-*k) * ((t.powf(p) + s.powf(p)).powf(*k) - (t - s).abs().powf(p * *k))
            }
            Inner::StationaryPowExp { h } => (-(t - s).abs().powf(two * *h)).exp(),
            Inner::Custom(c) => {
                let (j, k) = (c.grid_index(t, "t")?, c.grid_index(s, "s")?);
                if j <= k {
                    c.rows[k][j]
                } else {
                    c.rows[j][k]
                }
            }
        })
    }

    /// Variance `V(t) = R(t,t)`, computed as exactly that.
    pub fn variance(&self, t: T) -> Result<T> {
        self.covariance(t, t)
    }

    /// Whether `V(0) = 0` (process pinned at the origin). Decides both the
    /// degenerate-grid handling in the sampler and the quadrature splitting
    /// for the leading constant.
    pub fn starts_at_zero(&self) -> bool {
        match &self.inner {
            Inner::StationaryPowExp { .. } => false,
            Inner::Custom(c) => c.rows[0][0] == T::zero(),
            _ => true,
        }
    }

    /// Variogram `ϑ(t,s) = E(X_t − X_s)² = V(t) + V(s) − 2R(t,s)`.
    ///
    /// Evaluated through per-model rearrangements that avoid the raw
    /// `V + V − 2R` cancellation: exact `|t−s|^{2H}` forms for the
    /// stationary-increment models and `expm1` for the stationary covariance.
    /// This keeps near-diagonal ratios `ϑ/|t−s|^{2H}` accurate at fine grids.
    pub fn variogram(&self, t: T, s: T) -> Result<T> {
        Self::check_domain(t, "t")?;
        Self::check_domain(s, "s")?;
        let two = cast::<T>(2.0);
        let d = (t - s).abs();
        Ok(match &self.inner {
            Inner::Fbm { h } => d.powf(two * *h),
            Inner::MultiMixed { weights, hs, .. } => {
                let mut acc = T::zero();
                for (&w, &h) in weights.iter().zip(hs) {
                    acc += w * w * d.powf(two * h);
                }
                acc
            }
            Inner::SubFbm { h, norm } => {
                let p = two * *h;
                *norm
                    * ((s + t).powf(p) + d.powf(p)
                        - two.powf(p - T::one()) * (t.powf(p) + s.powf(p)))
            }
            Inner::BiFbm { h, k } => {
                let p = two * *h;
                two.powf(-*k)
                    * ((two * t.powf(p)).powf(*k) + (two * s.powf(p)).powf(*k)
                        - two * (t.powf(p) + s.powf(p)).powf(*k)
                        + two * d.powf(p * *k))
            }
            Inner::StationaryPowExp { h } => -two * (-d.powf(two * *h)).exp_m1(),
            Inner::Custom(_) => {
                self.variance(t)? + self.variance(s)? - two * self.covariance(t, s)?
            }
        })
    }

    /// Minimum and maximum of `ϑ(t_j, t_k)/|t_j − t_k|^{2H}` over all
    /// distinct pairs of the grid `t_j = j/n` — the two-sided envelope
    /// constants `(σ₋², σ₊²)` observed at resolution `n`.
    pub fn variogram_bounds(&self, n: usize) -> Result<(T, T)> {
        if n < 2 {
            return Err(Error::Parameter {
                field: "n",
                message: format!("variogram bounds need a grid of at least 2 steps, got {n}"),
            });
        }
        let p = cast::<T>(2.0) * self.holder_index();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for k in 1..=n {
            let tk = grid_time::<T>(k, n);
            for j in 0..k {
                let tj = grid_time::<T>(j, n);
                let ratio = self.variogram(tk, tj)? / (tk - tj).powf(p);
                if ratio < lo {
                    lo = ratio;
                }
                if ratio > hi {
                    hi = ratio;
                }
            }
        }
        Ok((lo, hi))
    }

    /// Same ratio restricted to adjacent grid pairs `(t_{k−1}, t_k)` — an
    /// `O(n)` scan usable at much finer grids than the full pair sweep. The
    /// spread of this range around `σ²` is exactly the adjacent-pair
    /// `|g|·n^{2H}` residue, so it shrinks to zero for the models whose `g`
    /// vanishes to first order.
    pub fn adjacent_variogram_range(&self, n: usize) -> Result<(T, T)> {
        if n < 1 {
            return Err(Error::Parameter {
                field: "n",
                message: "adjacent scan needs n >= 1".into(),
            });
        }
        let p = cast::<T>(2.0) * self.holder_index();
        let step = grid_time::<T>(1, n);
        let denom = step.powf(p);
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for k in 1..=n {
            let ratio = self.variogram(grid_time(k, n), grid_time(k - 1, n))? / denom;
            if ratio < lo {
                lo = ratio;
            }
            if ratio > hi {
                hi = ratio;
            }
        }
        Ok((lo, hi))
    }

    /// Variance as a function on the whole of `[0,1]`, for quadrature of the
    /// leading constant. Identical to [`Self::variance`] for the built-ins;
    /// custom tables are interpolated linearly between their grid values
    /// (the only continuous extension available for a table).
    pub fn variance_continuous(&self, t: T) -> Result<T> {
        match &self.inner {
            Inner::Custom(c) => {
                Self::check_domain(t, "t")?;
                let u = t * cast_usize::<T>(c.n);
                let lo = u.floor();
                let j = lo
                    .to_usize()
                    .expect("floor of a value in [0, n] converts to usize")
                    .min(c.n - 1);
                let frac = u - cast_usize::<T>(j);
                let vj = c.rows[j][j];
                let vj1 = c.rows[j + 1][j + 1];
                Ok(vj + frac * (vj1 - vj))
            }
            _ => self.variance(t),
        }
    }

    /// First positive time at which the model's variance is tabulated
    /// (`1/n` for custom tables, `None` for the analytic built-ins).
    pub fn first_grid_time(&self) -> Option<T> {
        match &self.inner {
            Inner::Custom(c) => Some(grid_time(1, c.n)),
            _ => None,
        }
    }

    /// For custom tables: the stride mapping a requested grid of `n` steps
    /// onto the stored one, requiring the stored size to be a multiple.
    /// Built-ins accept any `n` (stride 1 in their own continuous time).
    pub fn grid_stride(&self, n: usize) -> Result<usize> {
        match &self.inner {
            Inner::Custom(c) => {
                if n == 0 || c.n % n != 0 {
                    Err(Error::Parameter {
                        field: "n",
                        message: format!(
                            "custom table is defined on {} steps; requested n = {n} must divide it",
                            c.n
                        ),
                    })
                } else {
                    Ok(c.n / n)
                }
            }
            _ => Ok(1),
        }
    }
}

impl<T: Real> CustomModel<T> {
    fn grid_index(&self, t: T, field: &'static str) -> Result<usize> {
        let u = t * cast_usize::<T>(self.n);
        let idx = u.round();
        if (u - idx).abs() > cast::<T>(1e-9) * cast_usize::<T>(self.n) {
            return Err(Error::Parameter {
                field,
                message: format!(
                    "custom covariance is only defined at grid multiples of 1/{}, got {t}",
                    self.n
                ),
            });
        }
        Ok(idx.to_usize().expect("rounded grid index fits usize"))
    }
}

fn fbm_cov<T: Real>(t: T, s: T, h: T) -> T {
    let p = cast::<T>(2.0) * h;
    cast::<T>(0.5) * (t.powf(p) + s.powf(p) - (t - s).abs().powf(p))
}

impl<T: Real> fmt::Display for CovarianceModel<T> {
    /// Stable fingerprint used as factor-cache key and batch provenance.
    /// Scalar formatting round-trips, so distinct parameters give distinct
    /// fingerprints.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner {
            Inner::Fbm { h } => write!(f, "fbm(h={h})"),
            Inner::MultiMixed { weights, hs, .. } => {
                write!(f, "multi_mixed_fbm(weights=[")?;
                for (i, w) in weights.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{w}")?;
                }
                write!(f, "],hs=[")?;
                for (i, h) in hs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{h}")?;
                }
                write!(f, "])")
            }
            Inner::SubFbm { h, .. } => write!(f, "sub_fbm(h={h})"),
            Inner::BiFbm { h, k } => write!(f, "bifbm(h={h},k={k})"),
            Inner::StationaryPowExp { h } => write!(f, "stationary_powexp(h={h})"),
            Inner::Custom(c) => {
                // FNV-1a over the table bits: cheap, stable content hash.
                let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
                for row in &c.rows {
                    for v in row {
                        let bits = v.to_f64().expect("table entry converts to f64").to_bits();
                        for byte in bits.to_le_bytes() {
                            hash ^= u64::from(byte);
                            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
                        }
                    }
                }
                write!(
                    f,
                    "custom(n={},h_eff={},sigma2={},table={hash:016x})",
                    c.n, c.h_eff, c.sigma2
                )
            }
        }
    }
}
