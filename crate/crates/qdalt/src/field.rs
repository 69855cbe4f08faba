//! Arithmetic in `GF(q)` with `q = 2^ell` and in its quadratic extension `GF(q^2)`.
//!
//! The extension is built as `F_q[y] / (y^2 + y + delta)` where `delta` has
//! absolute trace 1, so every element is `u + alpha*v` with `u, v` in `F_q`
//! and `alpha` the class of `y`. Elements are stored as integer indices:
//! the low `ell` bits hold `u` (polynomial basis of `base_poly`), the high
//! `ell` bits hold `v`. Multiplication and inversion go through log/exp
//! tables; fields with `ell <= 6` additionally carry a full multiplication
//! table whose rows feed the row-operation kernels in `mat`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("extension degree ell={0} outside supported range 2..=8")]
    EllOutOfRange(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// An element of `GF(q^2)` (or of the subfield `GF(q)`, when the index is `< q`),
/// stored as its integer index in the fixed `(1, alpha)` basis.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.0)
    }
}

/// Parse an element from lowercase hex (the wire format used everywhere).
pub fn fe_from_hex(s: &str) -> Option<Fe> {
    u16::from_str_radix(s, 16).ok().map(Fe)
}

/// `GF(q^2)` with all operation tables precomputed. Immutable after
/// construction; share it behind `Arc` across threads.
pub struct Field {
    ell: u32,
    base_poly: u32,
    delta: Fe,
    q: u32,
    qsq: u32,
    log: Vec<u16>,
    exp: Vec<u16>,
    inv: Vec<u16>,
    norm_tab: Vec<u16>,
    mul_tab: Vec<u16>, // full q^2 x q^2 table, empty when ell > 6
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.ell == other.ell && self.base_poly == other.base_poly && self.delta == other.delta
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("ell", &self.ell)
            .field("base_poly", &self.base_poly)
            .field("delta", &self.delta)
            .finish()
    }
}

// ---- GF(2)[z] helpers used only during construction ----

fn pdeg(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

fn pmod(mut a: u32, b: u32) -> u32 {
    let db = pdeg(b);
    while a != 0 && pdeg(a) >= db {
        a ^= b << (pdeg(a) - db);
    }
    a
}

fn is_irreducible(p: u32, ell: u32) -> bool {
    // No divisor of degree 1..=ell/2 suffices for a degree-ell polynomial.
    for d in 2u32..(2u32 << (ell / 2)) {
        if pdeg(d) >= 1 && pmod(p, d) == 0 {
            return false;
        }
    }
    true
}

fn smallest_irreducible(ell: u32) -> u32 {
    let lo = 1u32 << ell;
    // Constant term must be 1, otherwise z divides.
    for p in ((lo + 1)..(lo << 1)).step_by(2) {
        if is_irreducible(p, ell) {
            return p;
        }
    }
    unreachable!("an irreducible polynomial of degree {ell} exists");
}

/// Schoolbook product in `GF(q) = GF(2)[z]/(poly)`.
fn base_mul(a: u16, b: u16, poly: u32, ell: u32) -> u16 {
    let mut r = 0u32;
    let a = a as u32;
    for i in 0..ell {
        if (b >> i) & 1 == 1 {
            r ^= a << i;
        }
    }
    for bit in (ell..=(2 * ell).saturating_sub(2)).rev() {
        if (r >> bit) & 1 == 1 {
            r ^= poly << (bit - ell);
        }
    }
    r as u16
}

/// Absolute trace `GF(q) -> GF(2)`.
fn abs_trace(d: u16, poly: u32, ell: u32) -> u16 {
    let mut acc = d;
    let mut t = d;
    for _ in 1..ell {
        t = base_mul(t, t, poly, ell);
        acc ^= t;
    }
    debug_assert!(acc <= 1);
    acc
}

fn trial_factor(mut n: u32) -> Vec<u32> {
    let mut primes = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            primes.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    primes
}

impl Field {
    fn ext_mul_slow(&self, a: Fe, b: Fe) -> Fe {
        let (poly, ell) = (self.base_poly, self.ell);
        let mask = (self.q - 1) as u16;
        let (u1, v1) = (a.0 & mask, a.0 >> ell);
        let (u2, v2) = (b.0 & mask, b.0 >> ell);
        let uu = base_mul(u1, u2, poly, ell);
        let vv = base_mul(v1, v2, poly, ell);
        let uv = base_mul(u1, v2, poly, ell) ^ base_mul(u2, v1, poly, ell);
        // (u1 + a v1)(u2 + a v2) with a^2 = a + delta.
        Fe((uu ^ base_mul(self.delta.0, vv, poly, ell)) | ((uv ^ vv) << ell))
    }

    fn ext_pow_slow(&self, mut a: Fe, mut e: u64) -> Fe {
        let mut r = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                r = self.ext_mul_slow(r, a);
            }
            a = self.ext_mul_slow(a, a);
            e >>= 1;
        }
        r
    }

    fn find_generator(&self) -> Fe {
        let ord = (self.qsq - 1) as u64;
        let primes = trial_factor(self.qsq - 1);
        'cand: for g in 2..self.qsq {
            let g = Fe(g as u16);
            for &p in &primes {
                if self.ext_pow_slow(g, ord / p as u64) == Fe::ONE {
                    continue 'cand;
                }
            }
            return g;
        }
        unreachable!("the multiplicative group of GF(q^2) is cyclic");
    }

    fn build_tables(&mut self) {
        let qsq = self.qsq as usize;
        let exp = match table_cache::load(self) {
            Some(exp) => exp,
            None => {
                let g = self.find_generator();
                let mut exp = vec![0u16; qsq - 1];
                let mut cur = Fe::ONE;
                for e in exp.iter_mut() {
                    *e = cur.0;
                    cur = self.ext_mul_slow(cur, g);
                }
                assert_eq!(cur, Fe::ONE);
                table_cache::store(self, &exp);
                exp
            }
        };

        self.log = vec![0u16; qsq];
        for (i, &e) in exp.iter().enumerate() {
            self.log[e as usize] = i as u16;
        }
        self.exp = exp;
        self.exp.extend_from_within(..);

        self.inv = vec![0u16; qsq];
        for a in 1..qsq {
            self.inv[a] = self.exp[qsq - 1 - self.log[a] as usize];
        }

        self.norm_tab = vec![0u16; qsq];
        for a in 1..qsq {
            let e = (self.log[a] as u64 * (self.q + 1) as u64) % (self.qsq - 1) as u64;
            self.norm_tab[a] = self.exp[e as usize];
            debug_assert!((self.norm_tab[a] as u32) < self.q);
        }

        if self.ell <= 6 {
            let mut tab = vec![0u16; qsq * qsq];
            for a in 1..qsq {
                let la = self.log[a] as usize;
                let row = &mut tab[a * qsq..(a + 1) * qsq];
                for (b, slot) in row.iter_mut().enumerate().skip(1) {
                    *slot = self.exp[la + self.log[b] as usize];
                }
            }
            self.mul_tab = tab;
        }
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn base_poly(&self) -> u32 {
        self.base_poly
    }

    pub fn ext_delta(&self) -> Fe {
        self.delta
    }

    /// Size of the base field.
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Size of the extension field.
    pub fn qsq(&self) -> u32 {
        self.qsq
    }

    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        Fe(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if !self.mul_tab.is_empty() {
            return Fe(self.mul_tab[a.0 as usize * self.qsq as usize + b.0 as usize]);
        }
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        Fe(self.exp[self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize])
    }

    /// Row of the full multiplication table for a fixed scalar, when present.
    /// The row-operation kernels use it to keep the inner loop branch-free.
    #[inline]
    pub(crate) fn mul_row(&self, c: Fe) -> Option<&[u16]> {
        if self.mul_tab.is_empty() {
            None
        } else {
            let qsq = self.qsq as usize;
            Some(&self.mul_tab[c.0 as usize * qsq..(c.0 as usize + 1) * qsq])
        }
    }

    #[inline]
    pub(crate) fn log_of(&self, a: Fe) -> usize {
        self.log[a.0 as usize] as usize
    }

    #[inline]
    pub(crate) fn exp_at(&self, i: usize) -> u16 {
        self.exp[i]
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        Ok(Fe(self.inv[a.0 as usize]))
    }

    /// Inverse of a value known to be nonzero (pivots, multiplier entries).
    #[inline]
    pub(crate) fn inv_nz(&self, a: Fe) -> Fe {
        debug_assert!(!a.is_zero());
        Fe(self.inv[a.0 as usize])
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if a.is_zero() {
            return if e == 0 { Fe::ONE } else { Fe::ZERO };
        }
        let idx =
            (self.log[a.0 as usize] as u64 * (e % (self.qsq - 1) as u64)) % (self.qsq - 1) as u64;
        Fe(self.exp[idx as usize])
    }

    /// The `q`-power map, an involution of `GF(q^2)` fixing exactly `GF(q)`.
    pub fn frobenius(&self, a: Fe) -> Fe {
        let (u, v) = self.split(a);
        self.join(Fe(u.0 ^ v.0), v)
    }

    /// `Tr(a) = a + a^q`, landing in `GF(q)`.
    pub fn trace(&self, a: Fe) -> Fe {
        Fe(a.0 >> self.ell)
    }

    /// `N(a) = a^(q+1)`, landing in `GF(q)`.
    #[inline]
    pub fn norm(&self, a: Fe) -> Fe {
        Fe(self.norm_tab[a.0 as usize])
    }

    /// True iff `a^q = a`, i.e. `a` lies in the base field.
    pub fn in_subfield(&self, a: Fe) -> bool {
        (a.0 as u32) < self.q
    }

    /// The distinguished element `alpha` with `Tr(alpha) = 1`; `(1, alpha)` is
    /// an `F_q`-basis of `GF(q^2)`.
    pub fn alpha(&self) -> Fe {
        Fe(1 << self.ell)
    }

    /// Coordinates of `a = u + alpha*v` with `u, v` in `GF(q)`.
    pub fn split(&self, a: Fe) -> (Fe, Fe) {
        (Fe(a.0 & (self.q - 1) as u16), Fe(a.0 >> self.ell))
    }

    pub fn join(&self, u: Fe, v: Fe) -> Fe {
        debug_assert!(self.in_subfield(u) && self.in_subfield(v));
        Fe(u.0 | (v.0 << self.ell))
    }

    /// All valid element indices, zero first.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.qsq as u16).map(Fe)
    }
}

/// Build the field for `q = 2^ell`, picking the lexicographically smallest
/// irreducible `base_poly` and the smallest `delta` with absolute trace 1.
pub fn make_field(ell: u32) -> Result<Arc<Field>, FieldError> {
    if !(2..=8).contains(&ell) {
        return Err(FieldError::EllOutOfRange(ell));
    }
    let base_poly = smallest_irreducible(ell);
    let q = 1u32 << ell;
    let delta = (0..q as u16)
        .map(Fe)
        .find(|d| abs_trace(d.0, base_poly, ell) == 1)
        .expect("half of GF(q) has absolute trace 1");

    let mut f = Field {
        ell,
        base_poly,
        delta,
        q,
        qsq: 1u32 << (2 * ell),
        log: Vec::new(),
        exp: Vec::new(),
        inv: Vec::new(),
        norm_tab: Vec::new(),
        mul_tab: Vec::new(),
    };
    f.build_tables();

    // alpha^2 = alpha + delta and Tr(alpha) = 1 pin the basis down.
    let alpha = f.alpha();
    assert_eq!(f.mul(alpha, alpha), f.add(alpha, f.delta));
    assert_eq!(f.trace(alpha), Fe::ONE);
    Ok(Arc::new(f))
}

/// Optional on-disk cache for the exp table, keyed by `QDALT_TABLE_DIR`.
mod table_cache {
    use super::{Fe, Field};
    use std::fs;
    use std::path::PathBuf;

    const MAGIC: &[u8; 8] = b"QDTABLE1";

    fn path(f: &Field) -> Option<PathBuf> {
        let dir = std::env::var_os("QDALT_TABLE_DIR")?;
        Some(PathBuf::from(dir).join(format!(
            "gf_ell{}_poly{}_delta{}.tab",
            f.ell, f.base_poly, f.delta.0
        )))
    }

    pub(super) fn load(f: &Field) -> Option<Vec<u16>> {
        let bytes = fs::read(path(f)?).ok()?;
        let body = bytes.strip_prefix(MAGIC)?;
        let n = f.qsq as usize - 1;
        if body.len() != 2 * n {
            return None;
        }
        let exp: Vec<u16> = body
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        // The table must be a permutation of the nonzero elements starting at 1,
        // consistent with the field on a few spot products.
        if exp[0] != 1 {
            return None;
        }
        let mut seen = vec![false; f.qsq as usize];
        for &e in &exp {
            if e == 0 || (e as u32) >= f.qsq || seen[e as usize] {
                return None;
            }
            seen[e as usize] = true;
        }
        let g = Fe(exp[1]);
        for i in (0..n - 1).step_by(1.max(n / 16)) {
            if f.ext_mul_slow(Fe(exp[i]), g) != Fe(exp[i + 1]) {
                return None;
            }
        }
        Some(exp)
    }

    pub(super) fn store(f: &Field, exp: &[u16]) {
        let Some(p) = path(f) else { return };
        let mut bytes = Vec::with_capacity(MAGIC.len() + 2 * exp.len());
        bytes.extend_from_slice(MAGIC);
        for &e in exp {
            bytes.extend_from_slice(&e.to_le_bytes());
        }
        // Cache misses are fine; never fail an operation over the cache.
        let _ = fs::create_dir_all(p.parent().unwrap());
        let _ = fs::write(p, bytes);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn smallest_polys_match_expected() {
        // z^2+z+1, z^3+z+1, z^4+z+1, z^5+z^2+1, z^6+z+1
        let expected = [
            (2, 0b111),
            (3, 0b1011),
            (4, 0b10011),
            (5, 0b100101),
            (6, 0b1000011),
        ];
        for (ell, poly) in expected {
            assert_eq!(make_field(ell).unwrap().base_poly(), poly, "ell={ell}");
        }
    }

    #[test]
    fn ell_out_of_range() {
        assert_eq!(make_field(1).unwrap_err(), FieldError::EllOutOfRange(1));
        assert_eq!(make_field(9).unwrap_err(), FieldError::EllOutOfRange(9));
    }

    #[test]
    fn delta_has_unit_absolute_trace() {
        for ell in 2..=8 {
            let f = make_field(ell).unwrap();
            assert_eq!(abs_trace(f.ext_delta().0, f.base_poly(), ell), 1);
            for d in 0..f.ext_delta().0 {
                assert_eq!(abs_trace(d, f.base_poly(), ell), 0, "delta not minimal");
            }
        }
    }

    #[test]
    fn gf4_forced_products() {
        let f = make_field(2).unwrap();
        let w = Fe(2); // the class of z
        let w1 = Fe(3);
        assert_eq!(f.mul(w, w1), Fe::ONE);
        assert_eq!(f.inv(w).unwrap(), w1);
    }

    #[test]
    fn gf8_reduction_oracle() {
        // z^2 * z^2 = z^4 = z^2 + z mod z^3+z+1
        let f = make_field(3).unwrap();
        assert_eq!(f.mul(Fe(4), Fe(4)), Fe(6));
    }

    #[test]
    fn identity_and_inverse() {
        for ell in [2, 3, 4] {
            let f = make_field(ell).unwrap();
            for a in f.elements() {
                assert_eq!(f.mul(Fe::ONE, a), a);
                if !a.is_zero() {
                    let inv = f.inv(a).unwrap();
                    assert_eq!(f.mul(a, inv), Fe::ONE);
                    // a^(q^2-2) is the inverse.
                    assert_eq!(f.pow(a, (f.qsq() - 2) as u64), inv);
                }
            }
            assert_eq!(f.inv(Fe::ZERO).unwrap_err(), FieldError::ZeroInverse);
        }
    }

    #[test]
    fn field_axioms_random_triples() {
        for ell in [2, 3, 4, 5] {
            let f = make_field(ell).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(7 + ell as u64);
            for _ in 0..10_000 {
                let a = Fe(rng.gen_range(0..f.qsq()) as u16);
                let b = Fe(rng.gen_range(0..f.qsq()) as u16);
                let c = Fe(rng.gen_range(0..f.qsq()) as u16);
                assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                assert_eq!(f.mul(a, b), f.mul(b, a));
            }
        }
    }

    #[test]
    fn frobenius_is_automorphism_and_involution() {
        for ell in [2, 3, 4] {
            let f = make_field(ell).unwrap();
            for a in f.elements() {
                assert_eq!(f.frobenius(f.frobenius(a)), a);
                assert_eq!(f.frobenius(a), f.pow(a, f.q() as u64));
                if f.in_subfield(a) {
                    assert_eq!(f.frobenius(a), a);
                }
                for b in f.elements() {
                    assert_eq!(
                        f.frobenius(f.mul(a, b)),
                        f.mul(f.frobenius(a), f.frobenius(b))
                    );
                    assert_eq!(
                        f.frobenius(f.add(a, b)),
                        f.add(f.frobenius(a), f.frobenius(b))
                    );
                }
            }
        }
    }

    #[test]
    fn trace_and_norm_full_scan() {
        let f = make_field(2).unwrap(); // GF(16) over GF(4)
        for a in f.elements() {
            assert_eq!(f.trace(a), f.add(a, f.frobenius(a)));
            assert_eq!(f.norm(a), f.pow(a, (f.q() + 1) as u64));
            assert!(f.in_subfield(f.trace(a)));
            assert!(f.in_subfield(f.norm(a)));
            if f.in_subfield(a) {
                assert_eq!(f.trace(a), Fe::ZERO);
                assert_eq!(f.norm(a), f.mul(a, a));
            }
            for b in f.elements() {
                assert_eq!(f.norm(f.mul(a, b)), f.mul(f.norm(a), f.norm(b)));
            }
        }
        // Surjectivity of Tr onto F_q and of N onto F_q^*.
        for ell in [2, 3, 4] {
            let f = make_field(ell).unwrap();
            let traces: std::collections::HashSet<_> = f.elements().map(|a| f.trace(a)).collect();
            assert_eq!(traces.len() as u32, f.q());
            let norms: std::collections::HashSet<_> = f
                .elements()
                .filter(|a| !a.is_zero())
                .map(|a| f.norm(a))
                .collect();
            assert_eq!(norms.len() as u32, f.q() - 1);
            assert!(!norms.contains(&Fe::ZERO));
        }
    }

    #[test]
    fn subfield_count_and_alpha() {
        for ell in [2, 3, 4, 5] {
            let f = make_field(ell).unwrap();
            let count = f.elements().filter(|&a| f.in_subfield(a)).count() as u32;
            assert_eq!(count, f.q());
            let alpha = f.alpha();
            assert_eq!(f.trace(alpha), Fe::ONE);
            assert!(!f.in_subfield(alpha));
            // alpha^q = alpha + 1 in this basis.
            assert_eq!(f.frobenius(alpha), f.add(alpha, Fe::ONE));
        }
    }

    #[test]
    fn basis_decomposition_round_trips() {
        let f = make_field(3).unwrap();
        for a in f.elements() {
            let (u, v) = f.split(a);
            assert!(f.in_subfield(u) && f.in_subfield(v));
            assert_eq!(f.join(u, v), a);
            assert_eq!(f.add(u, f.mul(f.alpha(), v)), a);
        }
    }

    #[test]
    fn hex_round_trip() {
        let f = make_field(4).unwrap();
        for a in f.elements() {
            assert_eq!(fe_from_hex(&a.to_string()), Some(a));
        }
        assert_eq!(fe_from_hex("zz"), None);
    }

    #[test]
    fn large_fields_build() {
        for ell in [7, 8] {
            let f = make_field(ell).unwrap();
            let a = Fe(259);
            assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
            assert_eq!(f.frobenius(f.frobenius(a)), a);
        }
    }

    #[test]
    fn table_dir_cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("qdalt-tab-test-{}", std::process::id()));
        std::env::set_var("QDALT_TABLE_DIR", &dir);
        let f1 = make_field(3).unwrap();
        let f2 = make_field(3).unwrap(); // second build loads the cache
        std::env::remove_var("QDALT_TABLE_DIR");
        for a in f1.elements() {
            for b in f1.elements() {
                assert_eq!(f1.mul(a, b), f2.mul(a, b));
            }
        }
        let _ = std::fs::remove_dir_all(dir);
    }
}
