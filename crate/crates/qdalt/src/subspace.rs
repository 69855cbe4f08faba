//! Enumeration of all `d`-dimensional subspaces of `F_q^k` through their
//! canonical rref representatives: every subspace has exactly one `d x k`
//! reduced-echelon basis matrix, so iterating pivot patterns in
//! lexicographic order and the free entries in odometer order (last free
//! entry fastest) visits each subspace once, in a reproducible order.

use std::sync::Arc;

use crate::field::{Fe, Field};
use crate::mat::Mat;

pub struct SubspaceEnum {
    field: Arc<Field>,
    q: u32,
    k: usize,
    d: usize,
    pivots: Vec<usize>,
    free: Vec<(usize, usize)>,
    vals: Vec<u32>,
    state: State,
}

#[derive(PartialEq)]
enum State {
    Fresh,
    Running,
    Done,
}

impl SubspaceEnum {
    /// Subspaces of dimension `d` in `F_q^k`, where `q` is the base-field
    /// size of `field`. An empty iterator when `d > k`.
    pub fn new(field: Arc<Field>, k: usize, d: usize) -> Self {
        let q = field.q();
        let pivots: Vec<usize> = (0..d).collect();
        let mut e = SubspaceEnum {
            field,
            q,
            k,
            d,
            pivots,
            free: Vec::new(),
            vals: Vec::new(),
            state: if d > k { State::Done } else { State::Fresh },
        };
        if e.state == State::Fresh {
            e.reset_free();
        }
        e
    }

    fn reset_free(&mut self) {
        self.free.clear();
        for i in 0..self.d {
            for j in self.pivots[i] + 1..self.k {
                if !self.pivots.contains(&j) {
                    self.free.push((i, j));
                }
            }
        }
        self.vals = vec![0; self.free.len()];
    }

    fn advance_pivots(&mut self) -> bool {
        // Next d-combination of {0..k} in lexicographic order.
        let d = self.d;
        for i in (0..d).rev() {
            if self.pivots[i] < self.k - (d - i) {
                self.pivots[i] += 1;
                for j in i + 1..d {
                    self.pivots[j] = self.pivots[j - 1] + 1;
                }
                self.reset_free();
                return true;
            }
        }
        false
    }

    fn emit(&self) -> Mat {
        let mut m = Mat::zeros(self.field.clone(), self.d, self.k);
        for (i, &p) in self.pivots.iter().enumerate() {
            m.set(i, p, Fe::ONE);
        }
        for (&(i, j), &v) in self.free.iter().zip(&self.vals) {
            m.set(i, j, Fe(v as u16));
        }
        m
    }
}

impl Iterator for SubspaceEnum {
    type Item = Mat;

    fn next(&mut self) -> Option<Mat> {
        match self.state {
            State::Done => return None,
            State::Fresh => {
                self.state = State::Running;
                return Some(self.emit());
            }
            State::Running => {}
        }
        // Odometer over the free entries, last position fastest.
        for slot in (0..self.vals.len()).rev() {
            if self.vals[slot] + 1 < self.q {
                self.vals[slot] += 1;
                return Some(self.emit());
            }
            self.vals[slot] = 0;
        }
        if self.advance_pivots() {
            Some(self.emit())
        } else {
            self.state = State::Done;
            None
        }
    }
}

/// Number of `d`-dimensional subspaces of `F_q^k` (the Gaussian binomial),
/// as a saturating `u128`; used for search-size accounting.
pub fn subspace_count(q: u32, k: usize, d: usize) -> u128 {
    if d > k {
        return 0;
    }
    let q = q as u128;
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..d {
        let qn = q.checked_pow((k - i) as u32).map(|p| p - 1);
        let qd = q.checked_pow((d - i) as u32).map(|p| p - 1);
        match (qn, qd) {
            (Some(a), Some(b)) => {
                num = match num.checked_mul(a) {
                    Some(v) => v,
                    None => return u128::MAX,
                };
                den *= b;
            }
            _ => return u128::MAX,
        }
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use std::collections::HashSet;

    #[test]
    fn counts_match_gaussian_binomial() {
        let f8 = make_field(3).unwrap();
        // [4 choose 2]_8 = (q^2+1)(q^2+q+1) = 65 * 73 = 4745
        assert_eq!(subspace_count(8, 4, 2), 4745);
        assert_eq!(SubspaceEnum::new(f8.clone(), 4, 2).count(), 4745);

        let f4 = make_field(2).unwrap();
        for (k, d) in [(3, 1), (4, 2), (5, 3), (4, 0), (4, 4)] {
            assert_eq!(
                SubspaceEnum::new(f4.clone(), k, d).count() as u128,
                subspace_count(4, k, d),
                "k={k} d={d}"
            );
        }
        assert_eq!(subspace_count(16, 4, 2), 257 * 273);
    }

    #[test]
    fn representatives_are_distinct_rrefs() {
        let f = make_field(2).unwrap();
        let mut seen = HashSet::new();
        for m in SubspaceEnum::new(f.clone(), 4, 2) {
            let (r, _) = m.rref();
            assert_eq!(r, m, "emitted matrix must already be in rref");
            let key: Vec<u16> = (0..2).flat_map(|i| m.row(i).iter().map(|e| e.0)).collect();
            assert!(seen.insert(key), "duplicate subspace representative");
        }
        assert_eq!(seen.len() as u128, subspace_count(4, 4, 2));
    }

    #[test]
    fn empty_and_degenerate_cases() {
        let f = make_field(2).unwrap();
        assert_eq!(SubspaceEnum::new(f.clone(), 2, 3).count(), 0);
        // The unique 0-dimensional subspace.
        assert_eq!(SubspaceEnum::new(f.clone(), 3, 0).count(), 1);
        assert_eq!(SubspaceEnum::new(f.clone(), 0, 0).count(), 1);
    }

    #[test]
    fn first_and_last_follow_the_documented_order() {
        let f = make_field(2).unwrap();
        let all: Vec<Mat> = SubspaceEnum::new(f.clone(), 3, 2).collect();
        // First: pivots {0,1}, free entries zero.
        let first = &all[0];
        assert_eq!(first.get(0, 0), Fe::ONE);
        assert_eq!(first.get(1, 1), Fe::ONE);
        assert_eq!(first.get(0, 2), Fe::ZERO);
        assert_eq!(first.get(1, 2), Fe::ZERO);
        // Last: pivots {1,2}, no free entries.
        let last = all.last().unwrap();
        assert_eq!(last.get(0, 1), Fe::ONE);
        assert_eq!(last.get(1, 2), Fe::ONE);
        assert_eq!(last.get(0, 0), Fe::ZERO);
    }
}
