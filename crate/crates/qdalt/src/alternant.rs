//! Generalised Reed-Solomon and alternant codes over the quadratic
//! extension, the dual-multiplier construction, the norm-trace code, and
//! full non-degeneracy.

use std::sync::Arc;

use thiserror::Error;

use crate::code::{Level, LinearCode};
use crate::field::{Fe, Field};
use crate::mat::Mat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlternantError {
    #[error("support entries are not pairwise distinct")]
    DuplicateSupport,
    #[error("multiplier has a zero entry at position {0}")]
    ZeroMultiplier(usize),
    #[error("GRS dimension {k} exceeds length {n}")]
    DegreeTooLarge { k: usize, n: usize },
}

/// Evaluation points, pairwise distinct, in the extension field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support(Vec<Fe>);

impl Support {
    pub fn new(entries: Vec<Fe>) -> Result<Self, AlternantError> {
        let mut seen = std::collections::HashSet::with_capacity(entries.len());
        if !entries.iter().all(|e| seen.insert(*e)) {
            return Err(AlternantError::DuplicateSupport);
        }
        Ok(Support(entries))
    }

    pub fn as_slice(&self) -> &[Fe] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Restriction to the complement of `positions`.
    pub fn restrict(&self, positions: &[usize]) -> Support {
        let drop: std::collections::HashSet<usize> = positions.iter().copied().collect();
        Support(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, &e)| e)
                .collect(),
        )
    }
}

/// Per-coordinate scaling, all entries nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiplier(Vec<Fe>);

impl Multiplier {
    pub fn new(entries: Vec<Fe>) -> Result<Self, AlternantError> {
        if let Some(i) = entries.iter().position(|e| e.is_zero()) {
            return Err(AlternantError::ZeroMultiplier(i));
        }
        Ok(Multiplier(entries))
    }

    pub fn ones(n: usize) -> Multiplier {
        Multiplier(vec![Fe::ONE; n])
    }

    pub fn as_slice(&self) -> &[Fe] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn restrict(&self, positions: &[usize]) -> Multiplier {
        let drop: std::collections::HashSet<usize> = positions.iter().copied().collect();
        Multiplier(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, &e)| e)
                .collect(),
        )
    }
}

/// `GRS_k(x, y) = { (y_i f(x_i))_i : deg f < k }` over the extension field.
pub fn grs(
    field: &Arc<Field>,
    k: usize,
    x: &Support,
    y: &Multiplier,
) -> Result<LinearCode, AlternantError> {
    let n = x.len();
    assert_eq!(y.len(), n);
    if k > n {
        return Err(AlternantError::DegreeTooLarge { k, n });
    }
    Ok(grs_clamped(field, k, x, y))
}

/// Same as [`grs`] but clamps `k` at `n`, where the code saturates to the
/// full space; used by alternant degrees beyond the length.
fn grs_clamped(field: &Arc<Field>, k: usize, x: &Support, y: &Multiplier) -> LinearCode {
    let n = x.len();
    let k = k.min(n);
    let mut rows = Vec::with_capacity(k);
    let mut monomial: Vec<Fe> = y.as_slice().to_vec();
    for _ in 0..k {
        rows.push(monomial.clone());
        for (m, &xi) in monomial.iter_mut().zip(x.as_slice()) {
            *m = field.mul(*m, xi);
        }
    }
    LinearCode::from_generator(Level::Ext, Mat::from_rows(field.clone(), n, rows))
        .expect("extension level accepts all entries")
}

/// Reed-Solomon code: GRS with the all-one multiplier.
pub fn rs(field: &Arc<Field>, k: usize, x: &Support) -> Result<LinearCode, AlternantError> {
    grs(field, k, x, &Multiplier::ones(x.len()))
}

/// The multiplier `y^⊥` with `GRS_k(x,y)^⊥ = GRS_{n-k}(x, y^⊥)`:
/// `y^⊥_i = 1 / (pi'_x(x_i) y_i)` with `pi'_x(x_i) = prod_{j≠i} (x_i - x_j)`.
pub fn dual_multiplier(field: &Arc<Field>, x: &Support, y: &Multiplier) -> Multiplier {
    let xs = x.as_slice();
    let entries = xs
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let mut d = Fe::ONE;
            for (j, &xj) in xs.iter().enumerate() {
                if j != i {
                    d = field.mul(d, field.add(xi, xj));
                }
            }
            field.inv_nz(field.mul(d, y.as_slice()[i]))
        })
        .collect();
    Multiplier(entries)
}

/// `Alt_r(x, y) = GRS_r(x, y)^⊥ ∩ F_q^n`, computed through the trace dual
/// `Alt_r(x,y) = Tr(GRS_r(x,y))^⊥`. Degrees `r > n` clamp to the zero code.
pub fn alternant(field: &Arc<Field>, r: usize, x: &Support, y: &Multiplier) -> LinearCode {
    grs_clamped(field, r, x, y).trace_code().dual()
}

/// `NT(x) = <1, Tr(x), Tr(alpha x), N(x)>` over `F_q`, the dimension-4
/// fingerprint of a support.
pub fn norm_trace_code(field: &Arc<Field>, x: &Support) -> LinearCode {
    let n = x.len();
    let alpha = field.alpha();
    let rows = vec![
        vec![Fe::ONE; n],
        x.as_slice().iter().map(|&e| field.trace(e)).collect(),
        x.as_slice()
            .iter()
            .map(|&e| field.trace(field.mul(alpha, e)))
            .collect(),
        x.as_slice().iter().map(|&e| field.norm(e)).collect(),
    ];
    LinearCode::from_generator(Level::Base, Mat::from_rows(field.clone(), n, rows))
        .expect("trace and norm land in the base field")
}

/// Both non-degeneracy conditions: the generator of `Alt_r(x,y)` has no zero
/// column, and `Alt_r(x,y) != Alt_{r+1}(x,y)`.
pub fn is_fully_nondegenerate(field: &Arc<Field>, r: usize, x: &Support, y: &Multiplier) -> bool {
    let cur = alternant(field, r, x, y);
    let next = alternant(field, r + 1, x, y);
    if cur == next {
        return false;
    }
    let gen = cur.gen();
    (0..cur.len()).all(|j| (0..gen.rows()).any(|i| !gen.get(i, j).is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::SchurMode;
    use crate::field::make_field;
    use crate::testutil::{random_multiplier, random_support};
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn support_multiplier_validation() {
        assert_eq!(
            Support::new(vec![Fe(1), Fe(2), Fe(1)]).unwrap_err(),
            AlternantError::DuplicateSupport
        );
        assert_eq!(
            Multiplier::new(vec![Fe(1), Fe(0)]).unwrap_err(),
            AlternantError::ZeroMultiplier(1)
        );
    }

    #[test]
    fn grs_edges() {
        let f = make_field(3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let x = random_support(&f, 6, &mut rng);
        let y = Multiplier::ones(6);
        assert_eq!(
            grs(&f, 1, &x, &y).unwrap(),
            LinearCode::all_one(f.clone(), Level::Ext, 6)
        );
        assert_eq!(
            grs(&f, 6, &x, &y).unwrap(),
            LinearCode::full(f.clone(), Level::Ext, 6)
        );
        assert!(matches!(
            grs(&f, 7, &x, &y),
            Err(AlternantError::DegreeTooLarge { .. })
        ));

        // RS_2(x) = <1, x> and the RS chain is increasing.
        let rows = vec![vec![Fe::ONE; 6], x.as_slice().to_vec()];
        let expected =
            LinearCode::from_generator(Level::Ext, Mat::from_rows(f.clone(), 6, rows)).unwrap();
        assert_eq!(rs(&f, 2, &x).unwrap(), expected);
        for k in 0..6 {
            assert!(rs(&f, k + 1, &x).unwrap().contains(&rs(&f, k, &x).unwrap()));
        }
    }

    #[test]
    fn grs_schur_product_theorem() {
        let f = make_field(2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..30 {
            let n = rng.gen_range(6..=12);
            let x = random_support(&f, n, &mut rng);
            let y = random_multiplier(&f, n, &mut rng);
            let y2 = random_multiplier(&f, n, &mut rng);
            let k = rng.gen_range(1..=3);
            let k2 = rng.gen_range(1..=(n - k));
            let lhs = LinearCode::schur_product(
                &grs(&f, k, &x, &y).unwrap(),
                &grs(&f, k2, &x, &y2).unwrap(),
                SchurMode::Exact,
            );
            let prod = Multiplier::new(
                y.as_slice()
                    .iter()
                    .zip(y2.as_slice())
                    .map(|(&a, &b)| f.mul(a, b))
                    .collect(),
            )
            .unwrap();
            assert_eq!(lhs, grs(&f, k + k2 - 1, &x, &prod).unwrap());
        }
    }

    #[test]
    fn dual_multiplier_lemma() {
        // Forced 2-point case over GF(4): pi' = (1, 1) so y-dual = y-inverses.
        let f = make_field(2).unwrap();
        let x = Support::new(vec![Fe(0), Fe(1)]).unwrap();
        let y = Multiplier::ones(2);
        assert_eq!(dual_multiplier(&f, &x, &y).as_slice(), &[Fe::ONE, Fe::ONE]);

        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.gen_range(4..=12);
            let x = random_support(&f, n, &mut rng);
            let y = random_multiplier(&f, n, &mut rng);
            let k = rng.gen_range(0..=n);
            let yd = dual_multiplier(&f, &x, &y);
            assert_eq!(
                grs(&f, k, &x, &y).unwrap().dual(),
                grs(&f, n - k, &x, &yd).unwrap()
            );
            // y * y-dual is the derivative-inverse vector.
            for i in 0..n {
                let mut d = Fe::ONE;
                for j in 0..n {
                    if j != i {
                        d = f.mul(d, f.add(x.as_slice()[i], x.as_slice()[j]));
                    }
                }
                assert_eq!(f.mul(y.as_slice()[i], yd.as_slice()[i]), f.inv_nz(d));
            }
        }
    }

    #[test]
    fn alternant_matches_definition() {
        let f = make_field(2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..20 {
            let n = rng.gen_range(5..=12);
            let x = random_support(&f, n, &mut rng);
            let y = random_multiplier(&f, n, &mut rng);
            let r = rng.gen_range(0..=n / 2);
            let by_def = grs(&f, r, &x, &y).unwrap().dual().subfield_subcode();
            assert_eq!(alternant(&f, r, &x, &y), by_def);
            assert!(by_def.dim() >= n.saturating_sub(2 * r));
            // Eq-style dual description: dual(Alt_r) = Tr(GRS_r).
            assert_eq!(by_def.dual(), grs(&f, r, &x, &y).unwrap().trace_code());
        }
    }

    #[test]
    fn alternant_edges_and_chain() {
        let f = make_field(3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let n = 10;
        let x = random_support(&f, n, &mut rng);
        let y = random_multiplier(&f, n, &mut rng);
        assert_eq!(
            alternant(&f, 0, &x, &y),
            LinearCode::full(f.clone(), Level::Base, n)
        );
        assert_eq!(alternant(&f, n, &x, &y).dim(), 0);
        for r in 0..4 {
            assert!(alternant(&f, r, &x, &y).contains(&alternant(&f, r + 1, &x, &y)));
        }
    }

    #[test]
    fn shortened_alternant_proposition() {
        let f = make_field(2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        for _ in 0..30 {
            let n = rng.gen_range(6..=12);
            let x = random_support(&f, n, &mut rng);
            let y = random_multiplier(&f, n, &mut rng);
            let r = rng.gen_range(1..=n / 2);
            let count = rng.gen_range(1..=n / 3);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let mut positions: Vec<usize> = idx[..count].to_vec();
            positions.sort_unstable();
            let lhs = alternant(&f, r, &x, &y).shorten(&positions);
            let rhs = alternant(&f, r, &x.restrict(&positions), &y.restrict(&positions));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn conductor_of_grs_proposition() {
        let f = make_field(2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = rng.gen_range(6..=12);
            let x = random_support(&f, n, &mut rng);
            let y = random_multiplier(&f, n, &mut rng);
            let k = rng.gen_range(1..=3);
            let k2 = rng.gen_range(k..=n - 2);
            let cond = LinearCode::conductor(
                &grs(&f, k, &x, &y).unwrap(),
                &grs(&f, k2, &x, &y).unwrap(),
                SchurMode::Exact,
            );
            assert_eq!(cond, rs(&f, k2 - k + 1, &x).unwrap());
        }
    }

    #[test]
    fn norm_trace_code_properties() {
        let f = make_field(3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let mut dim4 = 0;
        for _ in 0..50 {
            let n = rng.gen_range(8..=16);
            let x = random_support(&f, n, &mut rng);
            let nt = norm_trace_code(&f, &x);
            assert!(nt.dim() <= 4);
            if nt.dim() == 4 {
                dim4 += 1;
            }
            // NT(x) ⊆ RS_k(x) ∩ F_q^n for k > q+1.
            let k = f.q() as usize + 2;
            if k <= n {
                let sub = rs(&f, k, &x).unwrap().subfield_subcode();
                assert!(sub.contains(&nt));
            }
        }
        assert!(
            dim4 >= 45,
            "norm-trace code was generically dim 4 only {dim4}/50"
        );

        // Base-field support: traces vanish, so NT = <1, x, x^2> at most.
        let base_x = Support::new((0..6).map(|i| Fe(i as u16)).collect()).unwrap();
        let nt = norm_trace_code(&f, &base_x);
        assert!(nt.dim() <= 3);
        let n = base_x.len();
        let sq: Vec<Fe> = base_x.as_slice().iter().map(|&e| f.mul(e, e)).collect();
        let one_xsq = LinearCode::from_generator(
            Level::Base,
            Mat::from_rows(f.clone(), n, vec![vec![Fe::ONE; n], sq]),
        )
        .unwrap();
        assert!(nt.contains(&one_xsq));
    }

    #[test]
    fn extended_norm_trace_span() {
        // NT(x) ⊗ F_{q^2} = <1, x, x^q, x^(q+1)>
        let f = make_field(2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..30 {
            let n = rng.gen_range(6..=12);
            let x = random_support(&f, n, &mut rng);
            let ext = norm_trace_code(&f, &x).extend_scalars();
            let rows = vec![
                vec![Fe::ONE; n],
                x.as_slice().to_vec(),
                x.as_slice().iter().map(|&e| f.frobenius(e)).collect(),
                x.as_slice()
                    .iter()
                    .map(|&e| f.mul(e, f.frobenius(e)))
                    .collect(),
            ];
            let direct =
                LinearCode::from_generator(Level::Ext, Mat::from_rows(f.clone(), n, rows)).unwrap();
            assert_eq!(ext, direct);
        }
    }

    #[test]
    fn nondegeneracy_edges() {
        let f = make_field(3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let n = 8;
        let x = random_support(&f, n, &mut rng);
        let y = random_multiplier(&f, n, &mut rng);
        assert!(is_fully_nondegenerate(&f, 0, &x, &y));
        // At r = n both codes collapse to zero, so the test fails.
        assert!(!is_fully_nondegenerate(&f, n, &x, &y));
    }
}
