//! Emitter for the degree-2 polynomial system whose solutions reveal the
//! hidden subcode and the support at once. The system is built from a
//! shortened instance so the subcode has dimension 2, parametrized as
//! `(I | U) * G_inv`; the support unknowns collapse to one `T` per block
//! and one `A` per group generator through the QD template, with `T_1 = 0`
//! and `A_1 = 1` fixed by the affine action. Equations are written to a
//! `QDPOLY1` text file for external solvers; no solving happens here.

use std::io::{self, Write};

use crate::attack::{hidden_codim, AttackError};
use crate::field::{Fe, Field};
use crate::qd::{invariant_code, QdPublicKey};

/// One equation: an affine part plus a bilinear part in `U x (A | T)`.
/// Coefficient arrays are dense; zero entries are skipped on emission.
#[derive(Debug, Clone)]
pub struct Equation {
    pub constant: Fe,
    pub u: Vec<Fe>,
    pub a: Vec<Fe>,
    pub t: Vec<Fe>,
    pub ua: Vec<Fe>,
    pub ut: Vec<Fe>,
}

impl Equation {
    fn zero(n_u: usize, n_a: usize, n_t: usize) -> Self {
        Equation {
            constant: Fe::ZERO,
            u: vec![Fe::ZERO; n_u],
            a: vec![Fe::ZERO; n_a],
            t: vec![Fe::ZERO; n_t],
            ua: vec![Fe::ZERO; n_u * n_a],
            ut: vec![Fe::ZERO; n_u * n_t],
        }
    }

    fn is_zero(&self) -> bool {
        self.constant.is_zero()
            && self.u.iter().all(|c| c.is_zero())
            && self.a.iter().all(|c| c.is_zero())
            && self.t.iter().all(|c| c.is_zero())
            && self.ua.iter().all(|c| c.is_zero())
            && self.ut.iter().all(|c| c.is_zero())
    }
}

#[derive(Debug, Clone)]
pub struct PolySystem {
    pub q: u32,
    pub qsq: u32,
    /// U-variable layout: `rows x cols`, flattened row-major.
    pub u_rows: usize,
    pub u_cols: usize,
    /// Number of group-generator unknowns `A_2..A_gamma`.
    pub n_a: usize,
    /// Number of coset unknowns `T_2..T_{n0'}`.
    pub n_t: usize,
    pub equations: Vec<Equation>,
}

impl PolySystem {
    pub fn n_u(&self) -> usize {
        self.u_rows * self.u_cols
    }

    fn u_name(&self, flat: usize) -> String {
        format!("U{}_{}", flat / self.u_cols + 1, flat % self.u_cols + 1)
    }

    /// Variable names carry the original 1-based indices, so the fixed
    /// `T1 = 0` and `A1 = 1` never appear: `A2..`, `T2..`.
    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "QDPOLY1")?;
        writeln!(w, "field q={} qsq={}", self.q, self.qsq)?;
        writeln!(w, "vars U={} A={} T={}", self.n_u(), self.n_a, self.n_t)?;
        for eq in &self.equations {
            let mut terms: Vec<String> = Vec::new();
            if !eq.constant.is_zero() {
                terms.push(eq.constant.to_string());
            }
            for (i, c) in eq.u.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                terms.push(format!("{c}*{}", self.u_name(i)));
            }
            for (k, c) in eq.a.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                terms.push(format!("{c}*A{}", k + 2));
            }
            for (k, c) in eq.t.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                terms.push(format!("{c}*T{}", k + 2));
            }
            for (i, c) in eq.ua.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                terms.push(format!(
                    "{c}*{}*A{}",
                    self.u_name(i / self.n_a),
                    i % self.n_a + 2
                ));
            }
            for (i, c) in eq.ut.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                terms.push(format!(
                    "{c}*{}*T{}",
                    self.u_name(i / self.n_t),
                    i % self.n_t + 2
                ));
            }
            writeln!(w, "{}", terms.join(" + "))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Evaluate an equation at a full assignment; used by tests to check
    /// that the planted key is a solution.
    pub fn eval(&self, field: &Field, eq: &Equation, u: &[Fe], a: &[Fe], t: &[Fe]) -> Fe {
        let mut acc = eq.constant;
        for (c, v) in eq.u.iter().zip(u) {
            acc = field.add(acc, field.mul(*c, *v));
        }
        for (c, v) in eq.a.iter().zip(a) {
            acc = field.add(acc, field.mul(*c, *v));
        }
        for (c, v) in eq.t.iter().zip(t) {
            acc = field.add(acc, field.mul(*c, *v));
        }
        for (i, c) in eq.ua.iter().enumerate() {
            let prod = field.mul(u[i / self.n_a], a[i % self.n_a]);
            acc = field.add(acc, field.mul(*c, prod));
        }
        for (i, c) in eq.ut.iter().enumerate() {
            let prod = field.mul(u[i / self.n_t], t[i % self.n_t]);
            acc = field.add(acc, field.mul(*c, prod));
        }
        acc
    }
}

/// Build the system for a public key. Shortens `a0 = k0 - c - 2` whole
/// blocks first, so `U` is `(k0' - c) x c` with `k0' = c + 2`.
pub fn emit_polysys(pk: &QdPublicKey) -> Result<PolySystem, AttackError> {
    let f = pk.field().clone();
    let gamma = pk.gamma();
    let block = 1usize << gamma;
    if block > f.q() as usize {
        return Err(AttackError::ParameterInfeasible(format!(
            "group order {block} exceeds q = {}",
            f.q()
        )));
    }
    let c = hidden_codim(&f, gamma);
    let k0 = invariant_code(pk.code(), gamma).dim();
    if k0 < c + 2 {
        return Err(AttackError::ParameterInfeasible(format!(
            "invariant dimension {k0} below c + 2 = {}",
            c + 2
        )));
    }
    let a0 = k0 - c - 2;
    let positions: Vec<usize> = (0..a0 * block).collect();
    let shortened = if positions.is_empty() {
        pk.code().clone()
    } else {
        pk.code().shorten(&positions)
    };
    let n = shortened.len();
    let n0 = n / block;
    let g_inv = invariant_code(&shortened, gamma);
    let u_rows = g_inv
        .dim()
        .checked_sub(c)
        .filter(|&r| r >= 1)
        .ok_or_else(|| {
            AttackError::ParameterInfeasible(format!(
                "shortened invariant dimension {} leaves no identity block",
                g_inv.dim()
            ))
        })?;
    let parity = shortened.dual();

    let n_u = u_rows * c;
    let n_a = gamma as usize - 1;
    let n_t = n0 - 1;
    let gmat = g_inv.gen();
    let hmat = parity.gen();

    let mut equations = Vec::with_capacity(u_rows * parity.dim());
    for m in 0..u_rows {
        for h in 0..parity.dim() {
            let mut eq = Equation::zero(n_u, n_a, n_t);
            for j in 0..n {
                let hj = hmat.get(h, j);
                if hj.is_zero() {
                    continue;
                }
                let b = j / block;
                let u_in = j % block;
                // X_j = [bit0]*1 + T_{b+1} + sum_{i>=1, bit_i} A_{i+1},
                // with T_1 = 0 and A_1 = 1 substituted away.
                let w = f.mul(gmat.get(m, j), hj);
                if !w.is_zero() {
                    if u_in & 1 == 1 {
                        eq.constant = f.add(eq.constant, w);
                    }
                    if b > 0 {
                        eq.t[b - 1] = f.add(eq.t[b - 1], w);
                    }
                    for i in 1..gamma as usize {
                        if (u_in >> i) & 1 == 1 {
                            eq.a[i - 1] = f.add(eq.a[i - 1], w);
                        }
                    }
                }
                for ui in 0..c {
                    let d = f.mul(gmat.get(u_rows + ui, j), hj);
                    if d.is_zero() {
                        continue;
                    }
                    let uvar = m * c + ui;
                    if u_in & 1 == 1 {
                        eq.u[uvar] = f.add(eq.u[uvar], d);
                    }
                    if b > 0 {
                        let slot = uvar * n_t + (b - 1);
                        eq.ut[slot] = f.add(eq.ut[slot], d);
                    }
                    for i in 1..gamma as usize {
                        if (u_in >> i) & 1 == 1 {
                            let slot = uvar * n_a + (i - 1);
                            eq.ua[slot] = f.add(eq.ua[slot], d);
                        }
                    }
                }
            }
            if !eq.is_zero() {
                equations.push(eq);
            }
        }
    }

    Ok(PolySystem {
        q: f.q(),
        qsq: f.qsq(),
        u_rows,
        u_cols: c,
        n_a,
        n_t,
        equations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::true_d;
    use crate::field::make_field;
    use crate::qd::qd_keygen;

    #[test]
    fn toy_variable_counts() {
        let f = make_field(3).unwrap();
        let (_, pk) = qd_keygen(&f, 3, 8, 2, 1).unwrap();
        let sys = emit_polysys(&pk).unwrap();
        // c = 2, so U is 2x2; A holds gamma-1 = 2; no shortening on TOY.
        assert_eq!(sys.n_u(), 4);
        assert_eq!(sys.n_a, 2);
        assert_eq!(sys.n_t, 7);
        assert!(!sys.equations.is_empty());
    }

    #[test]
    fn emitted_text_is_degree_two_with_bilinear_shape() {
        let f = make_field(3).unwrap();
        let (_, pk) = qd_keygen(&f, 3, 8, 2, 2).unwrap();
        let sys = emit_polysys(&pk).unwrap();
        let text = sys.to_text();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("QDPOLY1"));
        assert_eq!(lines.next(), Some("field q=8 qsq=64"));
        assert_eq!(lines.next(), Some("vars U=4 A=2 T=7"));
        for line in lines {
            for mono in line.split(" + ") {
                let vars: Vec<&str> = mono.split('*').skip(1).collect();
                assert!(vars.len() <= 2, "monomial degree above 2: {mono}");
                if vars.len() == 2 {
                    assert!(vars[0].starts_with('U'), "quadratic without U: {mono}");
                    assert!(
                        vars[1].starts_with('A') || vars[1].starts_with('T'),
                        "quadratic second factor not A/T: {mono}"
                    );
                }
            }
        }
    }

    #[test]
    fn planted_key_solves_the_system() {
        // Express the hidden subcode in the (I | U) * G_inv parametrization
        // and the normalized support in the (T, A) template; every emitted
        // equation must vanish on that assignment.
        let f = make_field(3).unwrap();
        let mut solved = 0;
        for seed in 0..8u64 {
            let (sk, pk) = qd_keygen(&f, 3, 8, 2, seed).unwrap();
            let sys = emit_polysys(&pk).unwrap();
            // TOY shortens nothing, so the instance is the full key.
            let d = true_d(&sk);
            if d.dim() != 2 {
                continue;
            }
            let g_inv = invariant_code(pk.code(), 3);
            // Solve d.gen = M * g_inv.gen row-wise, then require M ~ (I | U).
            let coeffs: Vec<Vec<Fe>> = d
                .gen()
                .row_iter()
                .map(|row| g_inv.gen().transpose().solve(row))
                .collect::<Option<Vec<_>>>()
                .expect("D lies in the invariant code");
            let m = crate::mat::Mat::from_rows(f.clone(), g_inv.dim(), coeffs);
            let (mr, pivots) = m.rref();
            if pivots != vec![0, 1] {
                continue; // no (I | U) basis for this instance
            }
            let u: Vec<Fe> = (0..2)
                .flat_map(|i| (2..g_inv.dim()).map(move |j| (i, j)))
                .map(|(i, j)| mr.get(i, j))
                .collect();

            // Normalized support template: T_b = (t_b - t_1)/a_1, A_i = a_i/a_1.
            let a1 = sk.group().gens()[0];
            let inv_a1 = f.inv(a1).unwrap();
            let t1 = sk.coset_reps()[0];
            let a_vals: Vec<Fe> = sk.group().gens()[1..]
                .iter()
                .map(|&g| f.mul(g, inv_a1))
                .collect();
            let t_vals: Vec<Fe> = sk.coset_reps()[1..]
                .iter()
                .map(|&t| f.mul(f.add(t, t1), inv_a1))
                .collect();

            for eq in &sys.equations {
                assert_eq!(
                    sys.eval(&f, eq, &u, &a_vals, &t_vals),
                    Fe::ZERO,
                    "seed {seed}: planted key violates an equation"
                );
            }
            solved += 1;
        }
        assert!(solved >= 5, "only {solved}/8 instances were testable");
    }

    #[test]
    fn infeasible_when_group_exceeds_q() {
        // gamma = 3 over GF(4): |G| = 8 > q = 4.
        let f = make_field(2).unwrap();
        let code = crate::code::LinearCode::full(f.clone(), crate::code::Level::Base, 16);
        let pk = crate::qd::QdPublicKey::new(f, 3, 2, code).unwrap();
        assert!(matches!(
            emit_polysys(&pk),
            Err(AttackError::ParameterInfeasible(_))
        ));
    }
}
