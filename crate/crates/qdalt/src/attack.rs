//! The conductor-based key recovery. From the public generator matrix
//! alone: compute the invariant code, search for the hidden subcode whose
//! conductor into the public code is the norm-trace code `NT(x)`, read the
//! support off `NT(x)`, solve for the multiplier, undo any shortening, and
//! verify that the rebuilt alternant code equals the public one.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::alternant::{alternant, Multiplier, Support};
use crate::code::{LinearCode, SchurMode};
use crate::field::{Fe, Field};
use crate::mat::Mat;
use crate::qd::{invariant_code, QdPublicKey, QdSecretKey};
use crate::subspace::SubspaceEnum;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("search exhausted after {0} candidates without a verified key")]
    SearchExhausted(u64),
    #[error("candidate conductor is not a norm-trace code")]
    NotNormTrace,
    #[error("no valid multiplier exists for the recovered support")]
    NoMultiplier,
    #[error("failed to extend the key over the shortened positions")]
    ExtensionFailed,
    #[error("infeasible attack parameters: {0}")]
    ParameterInfeasible(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Bruteforce,
    RandomPairs,
    Shortened,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Bruteforce => "bruteforce",
            Variant::RandomPairs => "random",
            Variant::Shortened => "shortened",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bruteforce" => Ok(Variant::Bruteforce),
            "random" => Ok(Variant::RandomPairs),
            "shortened" => Ok(Variant::Shortened),
            other => Err(format!("unknown variant '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CondMode {
    Exact,
    Randomized,
}

#[derive(Debug, Clone)]
pub struct AttackConfig {
    pub variant: Variant,
    pub seed: u64,
    /// Upper bound on tested candidates; enumerated variants also stop when
    /// the search space is exhausted.
    pub max_trials: u64,
    pub jobs: usize,
    pub conductor_mode: CondMode,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            variant: Variant::Bruteforce,
            seed: 0,
            max_trials: u64::MAX,
            jobs: 1,
            conductor_mode: CondMode::Exact,
        }
    }
}

/// A dimension-4 conductor that passed the acceptance test, together with
/// the subcode that produced it and the positions shortened beforehand.
#[derive(Debug, Clone)]
pub struct NormTraceCandidate {
    pub code: LinearCode,
    pub witness: LinearCode,
    pub shortened_at: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredKey {
    pub x: Support,
    pub y: Multiplier,
    pub r: usize,
}

#[derive(Debug, Clone)]
pub struct AttackReport {
    pub variant: Variant,
    pub seed: u64,
    pub jobs: usize,
    pub trials: u64,
    pub wall_ms: u128,
    pub shortened_blocks: usize,
    pub key: RecoveredKey,
    pub verified: bool,
}

impl AttackReport {
    /// Line-oriented `key = value` serialization; everything except
    /// `wall_ms` is deterministic in (pk, seed, variant, jobs).
    pub fn to_text(&self) -> String {
        let hex = |v: &[Fe]| {
            v.iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "variant = {}\nseed = {}\njobs = {}\ntrials = {}\nwall_ms = {}\nshortened_blocks = {}\nr = {}\nx = {}\ny = {}\nverified = {}\n",
            self.variant.name(),
            self.seed,
            self.jobs,
            self.trials,
            self.wall_ms,
            self.shortened_blocks,
            self.key.r,
            hex(self.key.x.as_slice()),
            hex(self.key.y.as_slice()),
            self.verified as u8,
        )
    }
}

/// `log2` of the brute-force work factor `2 n^3 q^(4q / 2^gamma)`.
pub fn estimate_workfactor(ell: u32, gamma: u32, n0: usize) -> f64 {
    let n = (n0 as f64) * f64::from(1u32 << gamma);
    let exponent = 4.0 * f64::from(1u32 << ell) / f64::from(1u32 << gamma);
    1.0 + 3.0 * n.log2() + exponent * ell as f64
}

/// Codimension of the hidden subcode in the invariant code: `2q / 2^gamma`.
/// Zero when `|G| > 2q`, the trivial regime where the invariant itself works.
pub fn hidden_codim(field: &Field, gamma: u32) -> usize {
    let shift = field.ell() + 1;
    if gamma > shift {
        0
    } else {
        1usize << (shift - gamma)
    }
}

/// The hidden subcode `D = Inv(Alt_{r+q}(x,y))`, computable only with the
/// secret key; the searches below look for it blind. Test oracle.
pub fn true_d(sk: &QdSecretKey) -> LinearCode {
    let f = sk.field();
    debug_assert!(sk.group().order() <= f.q() as usize);
    let c = alternant(f, sk.r() + f.q() as usize, &sk.support(), &sk.multiplier());
    invariant_code(&c, sk.gamma())
}

fn conductor_against(witness: &LinearCode, pub_dual: &LinearCode, mode: SchurMode) -> LinearCode {
    LinearCode::schur_product(witness, pub_dual, mode).dual()
}

fn accept(cond: &LinearCode) -> bool {
    cond.dim() == 4 && {
        let ones = vec![Fe::ONE; cond.len()];
        cond.contains_vec(&ones)
    }
}

/// Conductor acceptance test: the conductor of `witness` into `code` is
/// accepted when it has dimension 4 and contains the all-one word.
pub fn normtrace_test(
    witness: &LinearCode,
    code: &LinearCode,
    mode: SchurMode,
) -> Option<NormTraceCandidate> {
    let cond = LinearCode::conductor(witness, code, mode);
    accept(&cond).then(|| NormTraceCandidate {
        code: cond,
        witness: witness.clone(),
        shortened_at: Vec::new(),
    })
}

/// One search instance: the (possibly shortened) target code, its cached
/// dual, and the invariant code the candidates are drawn from.
struct Instance {
    code: LinearCode,
    dual: LinearCode,
    inv: LinearCode,
    gamma: u32,
    shortened_at: Vec<usize>,
}

impl Instance {
    fn build(pk: &QdPublicKey, variant: Variant) -> Instance {
        let gamma = pk.gamma();
        let block = 1usize << gamma;
        let shortened_at: Vec<usize> = match variant {
            Variant::Shortened => {
                let c = hidden_codim(pk.field(), gamma);
                let k0 = invariant_code(pk.code(), gamma).dim();
                let a0 = k0.saturating_sub(c + 2);
                (0..a0 * block).collect()
            }
            _ => Vec::new(),
        };
        let code = if shortened_at.is_empty() {
            pk.code().clone()
        } else {
            pk.code().shorten(&shortened_at)
        };
        let dual = code.dual();
        let inv = invariant_code(&code, gamma);
        Instance {
            code,
            dual,
            inv,
            gamma,
            shortened_at,
        }
    }

    fn candidate(&self, cond: LinearCode, witness: &LinearCode) -> NormTraceCandidate {
        NormTraceCandidate {
            code: cond,
            witness: witness.clone(),
            shortened_at: self.shortened_at.clone(),
        }
    }

    fn test(
        &self,
        witness: &LinearCode,
        mode: SchurMode,
        widen: bool,
    ) -> Option<NormTraceCandidate> {
        let cond = conductor_against(witness, &self.dual, mode);
        if accept(&cond) {
            return Some(self.candidate(cond, witness));
        }
        // On instances with no slack in the heuristic (dim D * dim dual
        // close to n) the product can miss a few dimensions, leaving a
        // conductor slightly above dimension 4 that still contains the
        // norm-trace code. The full pipeline hands those to support
        // recovery as well; its structural filters reject junk cheaply.
        if widen {
            let c = hidden_codim(self.code.field(), self.gamma);
            if cond.dim() > 4 && cond.dim() <= 4 + 2 * c {
                return Some(self.candidate(cond, witness));
            }
        }
        None
    }
}

/// Candidate subspaces, in the deterministic search order of each variant.
enum Candidates {
    Enumerated(SubspaceEnum, LinearCode),
    Random {
        inv: LinearCode,
        seed: u64,
        next_trial: u64,
    },
}

impl Candidates {
    fn next_witness(&mut self) -> Option<LinearCode> {
        match self {
            Candidates::Enumerated(en, basis) => {
                let coeffs = en.next()?;
                let gen = coeffs.matmul(basis.gen());
                Some(LinearCode::from_generator(basis.level(), gen).expect("level preserved"))
            }
            Candidates::Random {
                inv,
                seed,
                next_trial,
            } => {
                if inv.dim() < 2 {
                    return None;
                }
                let t = *next_trial;
                *next_trial += 1;
                let mut rng = trial_rng(*seed, t);
                let f = inv.field().clone();
                let q = f.q();
                // Two independent random invariant codewords.
                for _ in 0..64 {
                    let pick = |rng: &mut ChaCha12Rng| -> Vec<Fe> {
                        let coeffs: Vec<Fe> = (0..inv.dim())
                            .map(|_| Fe(rng.gen_range(0..q) as u16))
                            .collect();
                        inv.gen().left_mul_vec(&coeffs)
                    };
                    let c1 = pick(&mut rng);
                    let c2 = pick(&mut rng);
                    let gen = Mat::from_rows(f.clone(), inv.len(), vec![c1, c2]);
                    let span =
                        LinearCode::from_generator(inv.level(), gen).expect("level preserved");
                    if span.dim() == 2 {
                        return Some(span);
                    }
                }
                // A degenerate draw burns the trial.
                Some(LinearCode::zero(f, inv.level(), inv.len()))
            }
        }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    // Independent stream per trial index, so parallel schedules cannot
    // change what any given trial samples.
    let mut s = seed ^ trial.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    s ^= s >> 30;
    s = s.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    s ^= s >> 27;
    ChaCha12Rng::seed_from_u64(s)
}

/// Brute-force search: enumerate subspaces of the invariant code of
/// codimension `2q/|G|` and return the first accepted conductor.
pub fn search_bruteforce(
    pk: &QdPublicKey,
    cfg: &AttackConfig,
) -> Result<NormTraceCandidate, AttackError> {
    let cfg = AttackConfig {
        variant: Variant::Bruteforce,
        ..cfg.clone()
    };
    first_candidate(pk, &cfg)
}

/// Random-pairs search: test spans of two random invariant codewords.
pub fn search_random_pairs(
    pk: &QdPublicKey,
    cfg: &AttackConfig,
) -> Result<NormTraceCandidate, AttackError> {
    let cfg = AttackConfig {
        variant: Variant::RandomPairs,
        ..cfg.clone()
    };
    first_candidate(pk, &cfg)
}

/// Shortened search: shorten whole blocks until the hidden subcode has
/// dimension 2, then enumerate all dimension-2 subspaces.
pub fn search_shortened(
    pk: &QdPublicKey,
    cfg: &AttackConfig,
) -> Result<NormTraceCandidate, AttackError> {
    let cfg = AttackConfig {
        variant: Variant::Shortened,
        ..cfg.clone()
    };
    first_candidate(pk, &cfg)
}

fn first_candidate(
    pk: &QdPublicKey,
    cfg: &AttackConfig,
) -> Result<NormTraceCandidate, AttackError> {
    let instance = Instance::build(pk, cfg.variant);
    let mut found = None;
    let result = search_candidates(&instance, cfg, false, |_, cand| {
        found = Some(cand);
        true
    });
    match result {
        Ok(()) => Ok(found.expect("candidate recorded on acceptance")),
        Err(tested) => Err(AttackError::SearchExhausted(tested)),
    }
}

/// Drive one search variant over an instance, invoking `on_candidate` for
/// every accepted conductor in deterministic index order; returns `Ok` when
/// the callback reports success and `Err(tested)` on exhaustion. Chunks of
/// candidates are tested in parallel when `jobs > 1`; the reduction by
/// minimal index keeps the outcome independent of the worker count.
fn search_candidates(
    instance: &Instance,
    cfg: &AttackConfig,
    widen: bool,
    mut on_candidate: impl FnMut(u64, NormTraceCandidate) -> bool,
) -> Result<(), u64> {
    let mode = match cfg.conductor_mode {
        CondMode::Exact => SchurMode::Exact,
        CondMode::Randomized => SchurMode::Randomized(cfg.seed),
    };
    let sub_dim = match cfg.variant {
        Variant::Bruteforce => {
            let c = hidden_codim(instance.code.field(), instance.gamma);
            instance.inv.dim().saturating_sub(c)
        }
        _ => 2,
    };
    let mut cands = match cfg.variant {
        Variant::RandomPairs => Candidates::Random {
            inv: instance.inv.clone(),
            seed: cfg.seed,
            next_trial: 0,
        },
        _ => Candidates::Enumerated(
            SubspaceEnum::new(instance.code.field().clone(), instance.inv.dim(), sub_dim),
            instance.inv.clone(),
        ),
    };

    let jobs = cfg.jobs.max(1);
    let chunk_size = (jobs * 8).max(16);
    let mut tested: u64 = 0;
    loop {
        let budget = (cfg.max_trials - tested).min(chunk_size as u64) as usize;
        if budget == 0 {
            return Err(tested);
        }
        let mut chunk = Vec::with_capacity(budget);
        for _ in 0..budget {
            match cands.next_witness() {
                Some(w) => chunk.push(w),
                None => break,
            }
        }
        if chunk.is_empty() {
            return Err(tested);
        }
        let base = tested;
        tested += chunk.len() as u64;

        let hits: Vec<(u64, NormTraceCandidate)> = if jobs <= 1 {
            chunk
                .iter()
                .enumerate()
                .filter_map(|(i, w)| instance.test(w, mode, widen).map(|c| (base + i as u64, c)))
                .collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .expect("thread pool");
            pool.install(|| {
                use rayon::prelude::*;
                chunk
                    .par_iter()
                    .enumerate()
                    .filter_map(|(i, w)| {
                        instance.test(w, mode, widen).map(|c| (base + i as u64, c))
                    })
                    .collect()
            })
        };
        for (idx, cand) in hits {
            if on_candidate(idx, cand) {
                return Ok(());
            }
        }
    }
}

/// Upper bound on the affine-slice size scanned during support recovery.
const SLICE_LIMIT: u64 = 1 << 30;

/// Read a support off an accepted candidate. Normalizes so the first two
/// entries are 0 and 1 (the affine action allows this), isolates `x^(q+1)`
/// as the intersection of the shortened extended code with its Schur
/// square, and scans the affine slice of the extended candidate for the
/// vector whose componentwise norm matches. A candidate of dimension 4 is
/// the norm-trace code itself with a q^4 slice; slightly larger conductors
/// from saturation misses work the same way with a wider slice. Errors
/// signal a false-positive candidate.
pub fn recover_support(cand: &NormTraceCandidate) -> Result<Support, AttackError> {
    let nt = &cand.code;
    if nt.dim() < 4 {
        return Err(AttackError::NotNormTrace);
    }
    let f = nt.field().clone();
    let n = nt.len();
    let ext = nt.extend_scalars();

    // S = Sh(cand ⊗ F_{q^2}, {first}) ⊇ <x, x^q, x^(q+1)> for the
    // normalized x, and S ∩ S^2 isolates x^(q+1).
    let s = ext.shorten(&[0]);
    if s.dim() + 1 != ext.dim() {
        return Err(AttackError::NotNormTrace);
    }
    let s2 = LinearCode::schur_product(&s, &s, SchurMode::Exact);
    let inter = LinearCode::intersect(&s, &s2);
    let target = norm_vector_in(&f, &inter).ok_or(AttackError::NotNormTrace)?;

    // Affine slice of cand ⊗ F_{q^2}: coefficient vectors lambda with
    // (lambda G)[0] = 0 and (lambda G)[1] = 1.
    let g = ext.gen();
    let m = ext.dim();
    let col = |j: usize| (0..m).map(|i| g.get(i, j)).collect::<Vec<Fe>>();
    let cons = Mat::from_rows(f.clone(), m, vec![col(0), col(1)]);
    let particular = cons
        .solve(&[Fe::ZERO, Fe::ONE])
        .ok_or(AttackError::NotNormTrace)?;
    let hom = cons.right_kernel();
    if hom.rows() != m - 2 {
        return Err(AttackError::NotNormTrace);
    }
    let free = hom.rows();
    let qsq = f.qsq() as u64;
    if qsq.saturating_pow(free as u32) > SLICE_LIMIT {
        return Err(AttackError::NotNormTrace);
    }
    let base = g.left_mul_vec(&particular);
    let dirs: Vec<Vec<Fe>> = hom.row_iter().map(|r| g.left_mul_vec(r)).collect();

    // Odometer over the outer free coordinates; the innermost one is
    // enumerated in the hot loop against the norm target.
    let inner = dirs.last().expect("free >= 2 since dim >= 4");
    let mut outer = vec![Fe::ZERO; free - 1];
    let mut line = base.clone();
    loop {
        'slice: for tv in 0..qsq as u32 {
            let tv = Fe(tv as u16);
            debug_assert!(f.add(line[0], f.mul(tv, inner[0])).is_zero());
            // Componentwise norm must reproduce x^(q+1) on positions >= 1.
            for j in 1..n {
                let cj = f.add(line[j], f.mul(tv, inner[j]));
                if f.norm(cj) != target[j - 1] {
                    continue 'slice;
                }
            }
            let entries: Vec<Fe> = (0..n)
                .map(|j| f.add(line[j], f.mul(tv, inner[j])))
                .collect();
            if let Ok(support) = Support::new(entries) {
                return Ok(support);
            }
        }
        // Advance the outer odometer (last outer coordinate fastest) and
        // rebuild the partial line.
        let mut slot = free - 1;
        loop {
            if slot == 0 {
                return Err(AttackError::NotNormTrace);
            }
            slot -= 1;
            let next = outer[slot].0 as u64 + 1;
            if next < qsq {
                outer[slot] = Fe(next as u16);
                break;
            }
            outer[slot] = Fe::ZERO;
        }
        line.copy_from_slice(&base);
        for (d, &o) in dirs[..free - 1].iter().zip(&outer) {
            if !o.is_zero() {
                for (l, &dv) in line.iter_mut().zip(d) {
                    *l = f.add(*l, f.mul(o, dv));
                }
            }
        }
    }
}

/// Find the unique norm vector in a small code: a generator combination
/// with nonzero first entry that, normalized there, has all entries in the
/// base field (componentwise norms land in `F_q`). Junk intersections from
/// false-positive conductors fail this with overwhelming probability.
fn norm_vector_in(f: &Field, inter: &LinearCode) -> Option<Vec<Fe>> {
    let dim = inter.dim();
    if dim == 0 || dim > 2 {
        return None;
    }
    let qsq = f.qsq() as u64;
    let mut combo = vec![Fe::ZERO; dim];
    for idx in 1..qsq.pow(dim as u32) {
        let mut v = idx;
        for c in combo.iter_mut() {
            *c = Fe((v % qsq) as u16);
            v /= qsq;
        }
        // One representative per projective class is enough.
        if combo.iter().find(|c| !c.is_zero()) != Some(&Fe::ONE) {
            continue;
        }
        let w = inter.gen().left_mul_vec(&combo);
        if w[0].is_zero() {
            continue;
        }
        let scale = f.inv_nz(w[0]);
        let normalized: Vec<Fe> = w.iter().map(|&e| f.mul(e, scale)).collect();
        if plausible_norm_vector(f, &normalized) {
            return Some(normalized);
        }
    }
    None
}

/// Entrywise sanity for a candidate `x^(q+1)` vector: all entries are
/// base-field, none is zero (the support is distinct and only its first
/// entry is 0, which was shortened away), and no value repeats more than
/// `q + 1` times (the size of a norm fiber).
fn plausible_norm_vector(f: &Field, w: &[Fe]) -> bool {
    let mut counts = vec![0u32; f.q() as usize];
    for &e in w {
        if e.is_zero() || !f.in_subfield(e) {
            return false;
        }
        counts[e.0 as usize] += 1;
        if counts[e.0 as usize] > f.q() + 1 {
            return false;
        }
    }
    true
}

/// Solve the parity-check relation for the multiplier: stack the equations
/// `sum_i y_i x_i^j g_i = 0` for `j < r` over all generator rows `g`, take
/// the right kernel, and pick a solution without zero coordinates.
pub fn recover_multiplier(
    x: &Support,
    code: &LinearCode,
    r: usize,
) -> Result<Multiplier, AttackError> {
    let f = code.field().clone();
    let n = code.len();
    assert_eq!(x.len(), n);
    let k = code.dim();
    if k == 0 || r == 0 {
        return Err(AttackError::NoMultiplier);
    }
    let mut rows = Vec::with_capacity(r * k);
    let mut xp = vec![Fe::ONE; n];
    for _ in 0..r {
        for g in code.gen().row_iter() {
            rows.push(
                xp.iter()
                    .zip(g)
                    .map(|(&p, &e)| f.mul(p, e))
                    .collect::<Vec<Fe>>(),
            );
        }
        for (p, &xi) in xp.iter_mut().zip(x.as_slice()) {
            *p = f.mul(*p, xi);
        }
    }
    let kern = Mat::from_rows(f.clone(), n, rows).right_kernel();
    if kern.rows() == 0 {
        return Err(AttackError::NoMultiplier);
    }
    for row in kern.row_iter() {
        if row.iter().all(|e| !e.is_zero()) {
            return Ok(Multiplier::new(row.to_vec()).expect("checked nonzero"));
        }
    }
    // Kernel of dimension > 1: look for a combination avoiding zeros.
    let mut rng = ChaCha12Rng::seed_from_u64(0x6d75_6c74);
    for _ in 0..128 {
        let coeffs: Vec<Fe> = (0..kern.rows())
            .map(|_| Fe(rng.gen_range(0..f.qsq()) as u16))
            .collect();
        let y = kern.left_mul_vec(&coeffs);
        if y.iter().all(|e| !e.is_zero()) {
            return Ok(Multiplier::new(y).expect("checked nonzero"));
        }
    }
    Err(AttackError::NoMultiplier)
}

/// Extend a key recovered on the unshortened positions to the full length,
/// one removed position at a time: shortening everywhere else leaves two
/// triangular one-unknown systems, first for `y_s`, then for `x_s`.
pub fn extend_shortened(
    partial: &RecoveredKey,
    pk: &QdPublicKey,
    removed: &[usize],
) -> Result<RecoveredKey, AttackError> {
    let f = pk.field().clone();
    let n = pk.n();
    let mut x_full: Vec<Option<Fe>> = vec![None; n];
    let mut y_full: Vec<Option<Fe>> = vec![None; n];
    let removed_set: std::collections::HashSet<usize> = removed.iter().copied().collect();
    let kept: Vec<usize> = (0..n).filter(|i| !removed_set.contains(i)).collect();
    assert_eq!(kept.len(), partial.x.len());
    for (i, &pos) in kept.iter().enumerate() {
        x_full[pos] = Some(partial.x.as_slice()[i]);
        y_full[pos] = Some(partial.y.as_slice()[i]);
    }

    let mut unknown: Vec<usize> = removed.to_vec();
    unknown.sort_unstable();
    while let Some(s) = unknown.pop() {
        // Shorten at every still-unknown position except s.
        let shortened = pk.code().shorten(&unknown);
        if shortened.dim() == 0 {
            return Err(AttackError::ExtensionFailed);
        }
        let cols: Vec<usize> = (0..n).filter(|i| !unknown.contains(i)).collect();
        let pos_s = cols.binary_search(&s).expect("s kept by construction");

        let mut y_s: Option<Fe> = None;
        for g in shortened.gen().row_iter() {
            let c0 = g[pos_s];
            let mut rhs = Fe::ZERO;
            for (j, &col) in cols.iter().enumerate() {
                if j != pos_s {
                    let yv = y_full[col].expect("known outside the unknown set");
                    rhs = f.add(rhs, f.mul(yv, g[j]));
                }
            }
            if c0.is_zero() {
                if !rhs.is_zero() {
                    return Err(AttackError::ExtensionFailed);
                }
            } else {
                let val = f.mul(rhs, f.inv_nz(c0));
                if *y_s.get_or_insert(val) != val {
                    return Err(AttackError::ExtensionFailed);
                }
            }
        }
        let y_s = y_s.ok_or(AttackError::ExtensionFailed)?;
        if y_s.is_zero() {
            return Err(AttackError::ExtensionFailed);
        }

        let mut x_s: Option<Fe> = None;
        for g in shortened.gen().row_iter() {
            let c0 = f.mul(y_s, g[pos_s]);
            let mut rhs = Fe::ZERO;
            for (j, &col) in cols.iter().enumerate() {
                if j != pos_s {
                    let xv = x_full[col].expect("known");
                    let yv = y_full[col].expect("known");
                    rhs = f.add(rhs, f.mul(f.mul(xv, yv), g[j]));
                }
            }
            if c0.is_zero() {
                if !rhs.is_zero() {
                    return Err(AttackError::ExtensionFailed);
                }
            } else {
                let val = f.mul(rhs, f.inv_nz(c0));
                if *x_s.get_or_insert(val) != val {
                    return Err(AttackError::ExtensionFailed);
                }
            }
        }
        let x_s = x_s.ok_or(AttackError::ExtensionFailed)?;

        x_full[s] = Some(x_s);
        y_full[s] = Some(y_s);
    }

    let x = Support::new(x_full.into_iter().map(|v| v.expect("all filled")).collect())
        .map_err(|_| AttackError::ExtensionFailed)?;
    let y = Multiplier::new(y_full.into_iter().map(|v| v.expect("all filled")).collect())
        .map_err(|_| AttackError::ExtensionFailed)?;
    Ok(RecoveredKey { x, y, r: partial.r })
}

/// Soundness gate: the rebuilt alternant code must equal the public code.
pub fn verify_key(key: &RecoveredKey, pk: &QdPublicKey) -> bool {
    if key.x.len() != pk.n() {
        return false;
    }
    alternant(pk.field(), key.r, &key.x, &key.y) == *pk.code()
}

/// The full pipeline: search, recover, extend, verify; resumes the search
/// when a candidate fails downstream. Never returns an unverified key.
pub fn run_attack(pk: &QdPublicKey, cfg: &AttackConfig) -> Result<AttackReport, AttackError> {
    let start = Instant::now();
    let instance = Instance::build(pk, cfg.variant);
    let r = (pk.n() - pk.dim()) / 2;
    let shortened_blocks = instance.shortened_at.len() >> pk.gamma();

    let mut outcome: Option<(u64, RecoveredKey)> = None;
    let result = search_candidates(&instance, cfg, true, |idx, cand| {
        let Ok(x) = recover_support(&cand) else {
            return false;
        };
        let Ok(y) = recover_multiplier(&x, &instance.code, r) else {
            return false;
        };
        let key = RecoveredKey { x, y, r };
        let key = if cand.shortened_at.is_empty() {
            key
        } else {
            match extend_shortened(&key, pk, &cand.shortened_at) {
                Ok(k) => k,
                Err(_) => return false,
            }
        };
        if verify_key(&key, pk) {
            outcome = Some((idx, key));
            true
        } else {
            false
        }
    });

    match result {
        Ok(()) => {
            let (idx, key) = outcome.expect("recorded on success");
            Ok(AttackReport {
                variant: cfg.variant,
                seed: cfg.seed,
                jobs: cfg.jobs.max(1),
                trials: idx + 1,
                wall_ms: start.elapsed().as_millis(),
                shortened_blocks,
                key,
                verified: true,
            })
        }
        Err(tested) => Err(AttackError::SearchExhausted(tested)),
    }
}
