//! Toolkit for quasi-dyadic alternant codes over quadratic extensions:
//! key generation in the DAGS style and the conductor-based key-recovery
//! attack that reconstructs an equivalent secret support/multiplier pair
//! from the public generator matrix.

pub mod alternant;
pub mod attack;
pub mod code;
pub mod field;
pub mod keyio;
pub mod mat;
pub mod polysys;
pub mod presets;
pub mod qd;
pub mod subspace;

pub use alternant::{
    alternant, dual_multiplier, grs, is_fully_nondegenerate, norm_trace_code, rs, AlternantError,
    Multiplier, Support,
};
pub use attack::{
    estimate_workfactor, extend_shortened, normtrace_test, recover_multiplier, recover_support,
    run_attack, search_bruteforce, search_random_pairs, search_shortened, true_d, verify_key,
    AttackConfig, AttackError, AttackReport, CondMode, NormTraceCandidate, RecoveredKey, Variant,
};
pub use code::{CodeError, Level, LinearCode, SchurMode};
pub use field::{fe_from_hex, make_field, Fe, Field, FieldError};
pub use keyio::{read_public_key, read_secret_key, write_public_key, write_secret_key, ParseError};
pub use mat::Mat;
pub use polysys::{emit_polysys, Equation, PolySystem};
pub use presets::{preset, ParamPreset, PRESETS};
pub use qd::{
    invariant_code, psi_eval, psi_poly, punctured_invariant, qd_keygen, AdditiveGroup, KeygenError,
    QdPublicKey, QdSecretKey,
};
pub use subspace::{subspace_count, SubspaceEnum};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::alternant::{Multiplier, Support};
    use crate::field::{Fe, Field};
    use rand::{seq::SliceRandom, Rng};
    use std::sync::Arc;

    pub fn random_support(f: &Arc<Field>, n: usize, rng: &mut impl Rng) -> Support {
        let mut all: Vec<Fe> = f.elements().collect();
        all.shuffle(rng);
        Support::new(all[..n].to_vec()).unwrap()
    }

    pub fn random_multiplier(f: &Arc<Field>, n: usize, rng: &mut impl Rng) -> Multiplier {
        Multiplier::new(
            (0..n)
                .map(|_| Fe(rng.gen_range(1..f.qsq()) as u16))
                .collect(),
        )
        .unwrap()
    }
}
