//! Linear codes as canonical row spaces: duals, shortening and puncturing,
//! subfield subcodes and trace codes for the quadratic extension, Schur
//! products, and conductors.
//!
//! A code is always stored through the rref of a generator matrix, so two
//! codes are equal iff their stored generators are bit-equal. The `level`
//! tag records whether the code lives over `F_q` (base) or `F_{q^2}`
//! (extension); the entries of a base-level code are base-field elements.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::field::{fe_from_hex, Fe, Field};
use crate::mat::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Base,
    Ext,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("entry {0} at row {1} is outside the base field of a base-level code")]
    LevelViolation(Fe, usize),
    #[error("malformed code text at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// How to span a Schur product: `Exact` multiplies every pair of basis rows;
/// `Randomized` samples `n + 16` products of random codeword pairs and falls
/// back to the exact computation if the sampled span does not reach the
/// generic rank, so it never undershoots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurMode {
    Exact,
    Randomized(u64),
}

const RANDOMIZED_MARGIN: usize = 16;

#[derive(Clone, PartialEq, Eq)]
pub struct LinearCode {
    level: Level,
    gen: Mat,
}

impl std::fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "LinearCode({:?}, n={}, dim={})",
            self.level,
            self.len(),
            self.dim()
        )
    }
}

impl LinearCode {
    /// Canonicalize the row space of `rows` into a code at the given level.
    pub fn from_generator(level: Level, rows: Mat) -> Result<Self, CodeError> {
        if level == Level::Base {
            let f = rows.field();
            for (r, row) in rows.row_iter().enumerate() {
                if let Some(&e) = row.iter().find(|e| !f.in_subfield(**e)) {
                    return Err(CodeError::LevelViolation(e, r));
                }
            }
        }
        Ok(LinearCode {
            level,
            gen: rows.rref().0,
        })
    }

    /// The zero code of length `n`.
    pub fn zero(field: Arc<Field>, level: Level, n: usize) -> Self {
        LinearCode {
            level,
            gen: Mat::zeros(field, 0, n),
        }
    }

    /// The full space of length `n`.
    pub fn full(field: Arc<Field>, level: Level, n: usize) -> Self {
        LinearCode {
            level,
            gen: Mat::identity(field, n),
        }
    }

    /// The code spanned by the all-one vector, the unit of the Schur algebra.
    pub fn all_one(field: Arc<Field>, level: Level, n: usize) -> Self {
        let gen = Mat::from_rows(field, n, vec![vec![Fe::ONE; n]]);
        LinearCode { level, gen }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn field(&self) -> &Arc<Field> {
        self.gen.field()
    }

    pub fn len(&self) -> usize {
        self.gen.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.gen.cols() == 0
    }

    pub fn dim(&self) -> usize {
        self.gen.rows()
    }

    /// The canonical (rref) generator matrix.
    pub fn gen(&self) -> &Mat {
        &self.gen
    }

    fn assert_compatible(&self, other: &LinearCode) {
        assert_eq!(self.level, other.level, "codes at different levels");
        assert_eq!(self.len(), other.len(), "codes of different lengths");
        assert_eq!(self.field(), other.field(), "codes over different fields");
    }

    /// Dual with respect to the standard inner product, at the same level.
    pub fn dual(&self) -> LinearCode {
        let kern = self.gen.right_kernel();
        LinearCode {
            level: self.level,
            gen: kern.rref().0,
        }
    }

    /// True iff `other` is a subcode of `self`.
    pub fn contains(&self, other: &LinearCode) -> bool {
        self.assert_compatible(other);
        self.gen.stack(&other.gen).rank() == self.dim()
    }

    pub fn contains_vec(&self, v: &[Fe]) -> bool {
        assert_eq!(v.len(), self.len());
        let row = Mat::from_rows(self.field().clone(), self.len(), vec![v.to_vec()]);
        self.gen.stack(&row).rank() == self.dim()
    }

    /// Codewords vanishing on `positions`, with those positions removed.
    pub fn shorten(&self, positions: &[usize]) -> LinearCode {
        let keep = complement(positions, self.len());
        let order: Vec<usize> = positions
            .iter()
            .copied()
            .chain(keep.iter().copied())
            .collect();
        let (r, pivots) = self.gen.select_cols(&order).rref();
        // Rows whose pivot falls past the shortened block have zeros there.
        let first = pivots
            .iter()
            .position(|&p| p >= positions.len())
            .unwrap_or(pivots.len());
        let kept_cols: Vec<usize> = (positions.len()..order.len()).collect();
        let sub = r.select_cols(&kept_cols);
        let rows: Vec<Vec<Fe>> = (first..sub.rows()).map(|i| sub.row(i).to_vec()).collect();
        let gen = Mat::from_rows(self.field().clone(), keep.len(), rows);
        LinearCode {
            level: self.level,
            gen,
        }
    }

    /// Projection of the code onto the complement of `positions`.
    pub fn puncture(&self, positions: &[usize]) -> LinearCode {
        let keep = complement(positions, self.len());
        let gen = self.gen.select_cols(&keep).rref().0;
        LinearCode {
            level: self.level,
            gen,
        }
    }

    /// Span of all componentwise products of codewords of `a` and `b`.
    pub fn schur_product(a: &LinearCode, b: &LinearCode, mode: SchurMode) -> LinearCode {
        a.assert_compatible(b);
        let f = a.field().clone();
        let n = a.len();
        let pairs = a.dim() * b.dim();
        if pairs == 0 {
            return LinearCode::zero(f, a.level, n);
        }
        if let SchurMode::Randomized(seed) = mode {
            let samples = n + RANDOMIZED_MARGIN;
            if pairs > samples {
                let sampled = schur_randomized(a, b, samples, seed);
                if sampled.dim() == n.min(pairs) {
                    return sampled;
                }
                // Sampled span below the generic ceiling: recompute exactly so
                // a structured (low-rank) product is never reported too small.
            }
        }
        let mut rows = Vec::with_capacity(pairs);
        for ra in a.gen.row_iter() {
            for rb in b.gen.row_iter() {
                rows.push(pointwise(&f, ra, rb));
            }
        }
        let gen = Mat::from_rows(f, n, rows).rref().0;
        LinearCode {
            level: a.level,
            gen,
        }
    }

    /// Largest code `Z` with `d ⋆ Z ⊆ c`, computed as `(d ⋆ c^⊥)^⊥`.
    pub fn conductor(d: &LinearCode, c: &LinearCode, mode: SchurMode) -> LinearCode {
        d.assert_compatible(c);
        LinearCode::schur_product(d, &c.dual(), mode).dual()
    }

    /// The `F_q`-linear code `self ∩ F_q^n` of an extension-level code,
    /// through the `(1, alpha)` coordinate split.
    pub fn subfield_subcode(&self) -> LinearCode {
        assert_eq!(
            self.level,
            Level::Ext,
            "subfield subcode of a base-level code"
        );
        let f = self.field().clone();
        let k = self.dim();
        let n = self.len();
        // F_q-basis of the code: the generator rows and their alpha multiples.
        // A combination lies in F_q^n iff the alpha components cancel.
        let mut ucomp = Mat::zeros(f.clone(), 2 * k, n);
        let mut vcomp = Mat::zeros(f.clone(), 2 * k, n);
        let alpha = f.alpha();
        for i in 0..k {
            for j in 0..n {
                let e = self.gen.get(i, j);
                let (u, v) = f.split(e);
                ucomp.set(i, j, u);
                vcomp.set(i, j, v);
                let (au, av) = f.split(f.mul(alpha, e));
                ucomp.set(k + i, j, au);
                vcomp.set(k + i, j, av);
            }
        }
        let kernel = vcomp.transpose().right_kernel();
        let rows: Vec<Vec<Fe>> = kernel.row_iter().map(|w| ucomp.left_mul_vec(w)).collect();
        let gen = Mat::from_rows(f, n, rows).rref().0;
        LinearCode {
            level: Level::Base,
            gen,
        }
    }

    /// Componentwise trace image `Tr(self)`, an `F_q`-linear code. The image
    /// is spanned by the traces of an `F_q`-basis, i.e. of the generator rows
    /// and their alpha multiples.
    pub fn trace_code(&self) -> LinearCode {
        assert_eq!(self.level, Level::Ext, "trace code of a base-level code");
        let f = self.field().clone();
        let n = self.len();
        let alpha = f.alpha();
        let mut rows = Vec::with_capacity(2 * self.dim());
        for g in self.gen.row_iter() {
            rows.push(g.iter().map(|&e| f.trace(e)).collect());
            rows.push(g.iter().map(|&e| f.trace(f.mul(alpha, e))).collect());
        }
        let gen = Mat::from_rows(f, n, rows).rref().0;
        LinearCode {
            level: Level::Base,
            gen,
        }
    }

    /// Reinterpret a base-level code as the `F_{q^2}`-span of its generator.
    pub fn extend_scalars(&self) -> LinearCode {
        assert_eq!(
            self.level,
            Level::Base,
            "extend_scalars of an extension-level code"
        );
        // F_q-independent rows over F_q stay independent over F_{q^2}, and an
        // rref over F_q is an rref over F_{q^2}.
        LinearCode {
            level: Level::Ext,
            gen: self.gen.clone(),
        }
    }

    pub fn intersect(a: &LinearCode, b: &LinearCode) -> LinearCode {
        a.assert_compatible(b);
        LinearCode {
            level: a.level,
            gen: a.gen.rowspace_intersect(&b.gen),
        }
    }

    /// Serialize as a header line `{level} {n} {dim}` followed by one line of
    /// hex entries per generator row.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let level = match self.level {
            Level::Base => "base",
            Level::Ext => "ext",
        };
        let _ = writeln!(s, "{} {} {}", level, self.len(), self.dim());
        for row in self.gen.row_iter() {
            let words: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            let _ = writeln!(s, "{}", words.join(" "));
        }
        s
    }

    pub fn from_text(field: Arc<Field>, text: &str) -> Result<Self, CodeError> {
        let parse = |line: usize, msg: &str| CodeError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| parse(1, "missing header"))?;
        let mut it = header.split_whitespace();
        let level = match it.next() {
            Some("base") => Level::Base,
            Some("ext") => Level::Ext,
            _ => return Err(parse(1, "expected level 'base' or 'ext'")),
        };
        let n: usize = it
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| parse(1, "bad length"))?;
        let dim: usize = it
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| parse(1, "bad dimension"))?;
        let mut rows = Vec::with_capacity(dim);
        for i in 0..dim {
            let line = lines
                .next()
                .ok_or_else(|| parse(i + 2, "missing generator row"))?;
            let row: Option<Vec<Fe>> = line.split_whitespace().map(fe_from_hex).collect();
            let row = row.ok_or_else(|| parse(i + 2, "bad hex element"))?;
            if row.len() != n {
                return Err(parse(i + 2, "row length does not match header"));
            }
            rows.push(row);
        }
        LinearCode::from_generator(level, Mat::from_rows(field, n, rows))
    }
}

fn complement(positions: &[usize], n: usize) -> Vec<usize> {
    debug_assert!(
        positions.windows(2).all(|w| w[0] < w[1]),
        "positions sorted, no dups"
    );
    let mut drop = vec![false; n];
    for &p in positions {
        assert!(p < n);
        drop[p] = true;
    }
    (0..n).filter(|&i| !drop[i]).collect()
}

fn pointwise(f: &Field, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    a.iter().zip(b).map(|(&x, &y)| f.mul(x, y)).collect()
}

fn schur_randomized(a: &LinearCode, b: &LinearCode, samples: usize, seed: u64) -> LinearCode {
    let f = a.field().clone();
    let n = a.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let bound = match a.level {
        Level::Base => f.q(),
        Level::Ext => f.qsq(),
    };
    let mut rows = Vec::with_capacity(samples);
    for _ in 0..samples {
        let ca = random_codeword(a, bound, &mut rng);
        let cb = random_codeword(b, bound, &mut rng);
        rows.push(pointwise(&f, &ca, &cb));
    }
    let gen = Mat::from_rows(f, n, rows).rref().0;
    LinearCode {
        level: a.level,
        gen,
    }
}

fn random_codeword(c: &LinearCode, bound: u32, rng: &mut impl Rng) -> Vec<Fe> {
    let coeffs: Vec<Fe> = (0..c.dim())
        .map(|_| Fe(rng.gen_range(0..bound) as u16))
        .collect();
    c.gen().left_mul_vec(&coeffs)
}
