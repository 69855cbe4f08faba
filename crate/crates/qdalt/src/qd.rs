//! Quasi-dyadic structure: additive subgroups of `GF(q^2)` and their
//! additive vanishing polynomials, DAGS-style key generation, and the
//! invariant subcode under the block-translation permutation group.
//!
//! A QD support splits into `n_0` blocks of `2^gamma` entries; block `j`
//! is the orbit `(t_j + g)` of a coset representative, listed in the fixed
//! lexicographic order of the group. The group element with index `u` acts
//! on a block by XOR-ing `u` into the in-block index, so the permutation
//! action depends only on `gamma` and is public.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::alternant::{alternant, is_fully_nondegenerate, Multiplier, Support};
use crate::code::LinearCode;
use crate::field::{Fe, Field};
use crate::mat::Mat;

const KEYGEN_RETRIES: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeygenError {
    #[error("infeasible parameters: {0}")]
    ParameterInfeasible(String),
    #[error("key sampling exhausted after {0} attempts")]
    SamplingExhausted(u32),
    #[error("group generators are GF(2)-dependent")]
    DependentGenerators,
}

/// An additive subgroup of `GF(q^2)` given by `gamma` independent generators,
/// with its `2^gamma` elements in lexicographic coefficient order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditiveGroup {
    gens: Vec<Fe>,
    elements: Vec<Fe>,
}

impl AdditiveGroup {
    pub fn new(gens: Vec<Fe>) -> Result<Self, KeygenError> {
        let gamma = gens.len();
        let mut elements = vec![Fe::ZERO; 1 << gamma];
        for (i, &g) in gens.iter().enumerate() {
            if g.is_zero() {
                return Err(KeygenError::DependentGenerators);
            }
            for u in 0..(1usize << i) {
                elements[u | (1 << i)] = Fe(elements[u].0 ^ g.0);
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(elements.len());
        if !elements.iter().all(|e| seen.insert(*e)) {
            return Err(KeygenError::DependentGenerators);
        }
        Ok(AdditiveGroup { gens, elements })
    }

    pub fn gamma(&self) -> u32 {
        self.gens.len() as u32
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn gens(&self) -> &[Fe] {
        &self.gens
    }

    /// Elements ordered by the lexicographic order of coefficient vectors:
    /// `0, a1, a2, a1+a2, a3, ...`.
    pub fn elements(&self) -> &[Fe] {
        &self.elements
    }
}

/// Coefficients (constant term first) of the monic additive polynomial
/// `psi_G(z) = prod_{a in G} (z - a)`; only the exponents `2^i` survive.
pub fn psi_poly(field: &Field, group: &AdditiveGroup) -> Vec<Fe> {
    let mut coeffs = vec![Fe::ONE];
    for &a in group.elements() {
        // Multiply by (z + a).
        let mut next = vec![Fe::ZERO; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] = field.add(next[i + 1], c);
            next[i] = field.add(next[i], field.mul(a, c));
        }
        coeffs = next;
    }
    coeffs
}

/// `psi_G(t)`, evaluated as the direct product over the group.
pub fn psi_eval(field: &Field, group: &AdditiveGroup, t: Fe) -> Fe {
    group
        .elements()
        .iter()
        .fold(Fe::ONE, |acc, &a| field.mul(acc, field.add(t, a)))
}

/// Secret side of a QD alternant key: the group, one coset representative
/// and one multiplier value per block, and the folded degree `r_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QdSecretKey {
    field: Arc<Field>,
    group: AdditiveGroup,
    coset_reps: Vec<Fe>,
    block_mults: Vec<Fe>,
    r0: usize,
}

impl QdSecretKey {
    pub fn from_parts(
        field: Arc<Field>,
        group: AdditiveGroup,
        coset_reps: Vec<Fe>,
        block_mults: Vec<Fe>,
        r0: usize,
    ) -> Result<Self, KeygenError> {
        let sk = QdSecretKey {
            field,
            group,
            coset_reps,
            block_mults,
            r0,
        };
        if sk.block_mults.len() != sk.coset_reps.len() {
            return Err(KeygenError::ParameterInfeasible(
                "one multiplier value per block required".into(),
            ));
        }
        if sk.block_mults.iter().any(|y| y.is_zero()) {
            return Err(KeygenError::ParameterInfeasible(
                "zero multiplier block".into(),
            ));
        }
        // Orbits must be pairwise disjoint, i.e. the support entries distinct.
        if Support::new(sk.support_entries()).is_err() {
            return Err(KeygenError::ParameterInfeasible(
                "coset orbits overlap".into(),
            ));
        }
        Ok(sk)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn group(&self) -> &AdditiveGroup {
        &self.group
    }

    pub fn coset_reps(&self) -> &[Fe] {
        &self.coset_reps
    }

    pub fn block_mults(&self) -> &[Fe] {
        &self.block_mults
    }

    pub fn gamma(&self) -> u32 {
        self.group.gamma()
    }

    pub fn n0(&self) -> usize {
        self.coset_reps.len()
    }

    pub fn n(&self) -> usize {
        self.n0() * self.group.order()
    }

    pub fn r0(&self) -> usize {
        self.r0
    }

    pub fn r(&self) -> usize {
        self.r0 * self.group.order()
    }

    fn support_entries(&self) -> Vec<Fe> {
        let mut entries = Vec::with_capacity(self.n());
        for &t in &self.coset_reps {
            for &g in self.group.elements() {
                entries.push(self.field.add(t, g));
            }
        }
        entries
    }

    /// The full QD support, blocks in coset order.
    pub fn support(&self) -> Support {
        Support::new(self.support_entries()).expect("orbits validated disjoint")
    }

    /// The full block-constant multiplier.
    pub fn multiplier(&self) -> Multiplier {
        let mut entries = Vec::with_capacity(self.n());
        for &y in &self.block_mults {
            entries.extend(std::iter::repeat_n(y, self.group.order()));
        }
        Multiplier::new(entries).expect("block values validated nonzero")
    }

    /// Support of the invariant code with non-repeated entries: `psi_G` folds
    /// each orbit to the single value `psi_G(t_j)`.
    pub fn folded_support(&self) -> Support {
        let entries = self
            .coset_reps
            .iter()
            .map(|&t| psi_eval(&self.field, &self.group, t))
            .collect();
        Support::new(entries).expect("distinct cosets fold to distinct values")
    }

    pub fn folded_multiplier(&self) -> Multiplier {
        Multiplier::new(self.block_mults.clone()).expect("validated nonzero")
    }

    /// The public code `Alt_r(x, y)` this key generates.
    pub fn public_code(&self) -> LinearCode {
        alternant(&self.field, self.r(), &self.support(), &self.multiplier())
    }
}

/// Public side: the block structure and the canonical generator of the
/// public alternant code over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QdPublicKey {
    field: Arc<Field>,
    gamma: u32,
    n0: usize,
    code: LinearCode,
}

impl QdPublicKey {
    pub fn new(
        field: Arc<Field>,
        gamma: u32,
        n0: usize,
        code: LinearCode,
    ) -> Result<Self, KeygenError> {
        if code.len() != n0 << gamma {
            return Err(KeygenError::ParameterInfeasible(format!(
                "code length {} does not match n0*2^gamma = {}",
                code.len(),
                n0 << gamma
            )));
        }
        Ok(QdPublicKey {
            field,
            gamma,
            n0,
            code,
        })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n(&self) -> usize {
        self.code.len()
    }

    pub fn dim(&self) -> usize {
        self.code.dim()
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }
}

/// Sample a QD alternant key. Resamples until the public code has the
/// generic dimension `n - 2r` and the folded code at degree
/// `r_0 + q/2^gamma` is fully non-degenerate, which the invariant-degree
/// arguments of the attack rely on.
pub fn qd_keygen(
    field: &Arc<Field>,
    gamma: u32,
    n0: usize,
    r0: usize,
    seed: u64,
) -> Result<(QdSecretKey, QdPublicKey), KeygenError> {
    let q = field.q() as usize;
    let qsq = field.qsq() as usize;
    let block = 1usize << gamma;
    let infeasible = |msg: String| Err(KeygenError::ParameterInfeasible(msg));
    if gamma == 0 {
        return infeasible("gamma must be positive".into());
    }
    if block > q {
        return infeasible(format!("group order 2^{gamma} exceeds q = {q}"));
    }
    if n0 * block > qsq {
        return infeasible(format!("length {} exceeds field size {qsq}", n0 * block));
    }
    if r0 == 0 {
        return infeasible("r0 must be positive".into());
    }
    if n0 <= 2 * r0 + 2 * q / block {
        return infeasible(format!(
            "n0 = {n0} too small for r0 = {r0}: the hidden subcode would be trivial"
        ));
    }

    let n = n0 * block;
    let r = r0 * block;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..KEYGEN_RETRIES {
        // gamma GF(2)-independent generators, built by rejection on the span.
        let mut in_span = vec![false; qsq];
        in_span[0] = true;
        let mut gens = Vec::with_capacity(gamma as usize);
        while gens.len() < gamma as usize {
            let g = Fe(rng.gen_range(1..qsq) as u16);
            if in_span[g.0 as usize] {
                continue;
            }
            let snapshot: Vec<usize> = (0..qsq).filter(|&i| in_span[i]).collect();
            for s in snapshot {
                in_span[s ^ g.0 as usize] = true;
            }
            gens.push(g);
        }
        let group = AdditiveGroup::new(gens).expect("independence enforced by rejection");

        // Coset representatives with pairwise disjoint orbits.
        let mut used = vec![false; qsq];
        let mut coset_reps = Vec::with_capacity(n0);
        while coset_reps.len() < n0 {
            let t = Fe(rng.gen_range(0..qsq) as u16);
            if used[t.0 as usize] {
                continue;
            }
            for &g in group.elements() {
                used[(t.0 ^ g.0) as usize] = true;
            }
            coset_reps.push(t);
        }

        let block_mults: Vec<Fe> = (0..n0).map(|_| Fe(rng.gen_range(1..qsq) as u16)).collect();

        let sk = QdSecretKey::from_parts(field.clone(), group, coset_reps, block_mults, r0)?;
        let code = sk.public_code();
        if code.dim() != n - 2 * r {
            continue;
        }
        let folded_degree = r0 + q / block;
        if !is_fully_nondegenerate(
            field,
            folded_degree,
            &sk.folded_support(),
            &sk.folded_multiplier(),
        ) {
            continue;
        }
        let pk = QdPublicKey::new(field.clone(), gamma, n0, code)?;
        return Ok((sk, pk));
    }
    Err(KeygenError::SamplingExhausted(KEYGEN_RETRIES))
}

/// Positions of block `b` for in-block index `u`, under the action of the
/// group element with index `a`: `u` maps to `u ^ a`.
fn permuted_index(pos: usize, block: usize, a: usize) -> usize {
    (pos & !(block - 1)) | ((pos & (block - 1)) ^ a)
}

/// Subcode of words fixed by every block permutation, computed by refining
/// the row space against each group generator in turn.
pub fn invariant_code(c: &LinearCode, gamma: u32) -> LinearCode {
    let block = 1usize << gamma;
    let n = c.len();
    assert_eq!(n % block, 0, "length must be a multiple of the block size");
    let f = c.field().clone();
    let mut basis = c.gen().clone();
    for i in 0..gamma {
        if basis.rows() == 0 {
            break;
        }
        let a = 1usize << i;
        // Rows of (sigma(B) - B); a combination is invariant iff it cancels.
        let mut diff = Mat::zeros(f.clone(), basis.rows(), n);
        for r in 0..basis.rows() {
            for j in 0..n {
                let d = f.add(basis.get(r, permuted_index(j, block, a)), basis.get(r, j));
                diff.set(r, j, d);
            }
        }
        let coeffs = diff.transpose().right_kernel();
        basis = coeffs.matmul(&basis);
    }
    LinearCode::from_generator(c.level(), basis).expect("level preserved by row combinations")
}

/// The invariant code with non-repeated entries: one coordinate kept per
/// block (the first, matching the group's element order).
pub fn punctured_invariant(c: &LinearCode, gamma: u32) -> LinearCode {
    let inv = invariant_code(c, gamma);
    let block = 1usize << gamma;
    let keep: Vec<usize> = (0..c.len() / block).map(|b| b * block).collect();
    LinearCode::from_generator(inv.level(), inv.gen().select_cols(&keep))
        .expect("level preserved by projection")
}
