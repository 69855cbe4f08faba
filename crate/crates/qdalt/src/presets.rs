//! Named parameter sets: the three DAGS proposals, the small-scale DAGS_0
//! instance, and a TOY set sized so the hidden subcode has dimension 2 and
//! the rate is 1/2, which makes the whole attack run in seconds.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamPreset {
    pub name: &'static str,
    pub ell: u32,
    pub gamma: u32,
    pub n0: usize,
    pub r0: usize,
}

impl ParamPreset {
    pub fn q(&self) -> u32 {
        1 << self.ell
    }

    pub fn block(&self) -> usize {
        1 << self.gamma
    }

    pub fn n(&self) -> usize {
        self.n0 * self.block()
    }

    pub fn r(&self) -> usize {
        self.r0 * self.block()
    }

    pub fn k(&self) -> usize {
        self.n() - 2 * self.r()
    }

    pub fn k0(&self) -> usize {
        self.k() / self.block()
    }
}

pub const TOY: ParamPreset = ParamPreset {
    name: "TOY",
    ell: 3,
    gamma: 3,
    n0: 8,
    r0: 2,
};
pub const DAGS_0: ParamPreset = ParamPreset {
    name: "DAGS_0",
    ell: 4,
    gamma: 4,
    n0: 15,
    r0: 5,
};
pub const DAGS_1: ParamPreset = ParamPreset {
    name: "DAGS_1",
    ell: 5,
    gamma: 4,
    n0: 52,
    r0: 13,
};
pub const DAGS_3: ParamPreset = ParamPreset {
    name: "DAGS_3",
    ell: 6,
    gamma: 5,
    n0: 38,
    r0: 11,
};
pub const DAGS_5: ParamPreset = ParamPreset {
    name: "DAGS_5",
    ell: 6,
    gamma: 6,
    n0: 33,
    r0: 11,
};

pub const PRESETS: [ParamPreset; 5] = [TOY, DAGS_0, DAGS_1, DAGS_3, DAGS_5];

pub fn preset(name: &str) -> Option<&'static ParamPreset> {
    PRESETS.iter().find(|p| p.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_reproduced() {
        // (name, q, n, n0, k, k0, gamma, r0)
        let rows = [
            ("DAGS_0", 16, 240, 15, 80, 5, 4, 5),
            ("DAGS_1", 32, 832, 52, 416, 26, 4, 13),
            ("DAGS_3", 64, 1216, 38, 512, 16, 5, 11),
            ("DAGS_5", 64, 2112, 33, 704, 11, 6, 11),
            ("TOY", 8, 64, 8, 32, 4, 3, 2),
        ];
        for (name, q, n, n0, k, k0, gamma, r0) in rows {
            let p = preset(name).unwrap();
            assert_eq!(p.q(), q);
            assert_eq!(p.n(), n);
            assert_eq!(p.n0, n0);
            assert_eq!(p.k(), k);
            assert_eq!(p.k0(), k0);
            assert_eq!(p.gamma, gamma);
            assert_eq!(p.r0, r0);
        }
        assert!(preset("DAGS_7").is_none());
        assert!(preset("toy").is_some());
    }
}
