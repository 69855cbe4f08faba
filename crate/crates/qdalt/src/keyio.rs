//! Line-oriented `QDALT1` key files. The secret key stores the sampled
//! ingredients (group generators, coset representatives, block multiplier
//! values, folded degree); the public key stores the block structure and
//! the rref generator rows. Round trips are byte-exact.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::code::{Level, LinearCode};
use crate::field::{fe_from_hex, make_field, Fe, Field};
use crate::mat::Mat;
use crate::qd::{AdditiveGroup, QdPublicKey, QdSecretKey};

const MAGIC: &str = "QDALT1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("key file parse error at line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        msg: msg.into(),
    }
}

fn field_line(f: &Field) -> String {
    format!(
        "field ell={} poly={} delta={}",
        f.ell(),
        f.base_poly(),
        f.ext_delta()
    )
}

fn hex_list(v: &[Fe]) -> String {
    v.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_secret_key(sk: &QdSecretKey) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "kind sk");
    let _ = writeln!(s, "{}", field_line(sk.field()));
    let _ = writeln!(s, "gamma {}", sk.gamma());
    let _ = writeln!(s, "gens {}", hex_list(sk.group().gens()));
    let _ = writeln!(s, "reps {}", hex_list(sk.coset_reps()));
    let _ = writeln!(s, "mults {}", hex_list(sk.block_mults()));
    let _ = writeln!(s, "r0 {}", sk.r0());
    s
}

pub fn write_public_key(pk: &QdPublicKey) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "kind pk");
    let _ = writeln!(s, "{}", field_line(pk.field()));
    let _ = writeln!(s, "gamma {}", pk.gamma());
    let _ = writeln!(s, "n0 {}", pk.n0());
    let _ = writeln!(s, "gen {} {}", pk.dim(), pk.n());
    for row in pk.code().gen().row_iter() {
        let _ = writeln!(s, "{}", hex_list(row));
    }
    s
}

struct Lines<'a> {
    iter: std::str::Lines<'a>,
    num: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<&'a str, ParseError> {
        self.num += 1;
        self.iter
            .next()
            .ok_or_else(|| err(self.num, "unexpected end of file"))
    }

    fn expect_tag(&mut self, tag: &str) -> Result<&'a str, ParseError> {
        let line = self.next_line()?;
        line.strip_prefix(tag)
            .map(str::trim)
            .ok_or_else(|| err(self.num, format!("expected '{tag} ...'")))
    }
}

fn parse_hex_list(lines: &Lines<'_>, body: &str) -> Result<Vec<Fe>, ParseError> {
    body.split_whitespace()
        .map(|w| fe_from_hex(w).ok_or_else(|| err(lines.num, format!("bad hex '{w}'"))))
        .collect()
}

fn parse_usize(lines: &Lines<'_>, body: &str) -> Result<usize, ParseError> {
    body.trim()
        .parse()
        .map_err(|_| err(lines.num, format!("bad integer '{body}'")))
}

fn parse_header<'a>(lines: &mut Lines<'a>, kind: &str) -> Result<Arc<Field>, ParseError> {
    if lines.next_line()? != MAGIC {
        return Err(err(lines.num, format!("missing {MAGIC} magic header")));
    }
    let k = lines.expect_tag("kind")?;
    if k != kind {
        return Err(err(
            lines.num,
            format!("expected kind '{kind}', found '{k}'"),
        ));
    }
    let body = lines.expect_tag("field")?;
    let mut ell = None;
    let mut poly = None;
    let mut delta = None;
    for part in body.split_whitespace() {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| err(lines.num, format!("bad field item '{part}'")))?;
        match key {
            "ell" => ell = value.parse::<u32>().ok(),
            "poly" => poly = value.parse::<u32>().ok(),
            "delta" => delta = fe_from_hex(value),
            _ => return Err(err(lines.num, format!("unknown field item '{key}'"))),
        }
    }
    let (Some(ell), Some(poly), Some(delta)) = (ell, poly, delta) else {
        return Err(err(lines.num, "field line needs ell=, poly=, delta="));
    };
    let field = make_field(ell).map_err(|e| err(lines.num, e.to_string()))?;
    // The toolkit always derives poly and delta from ell; reject foreign
    // reduction choices rather than silently reinterpreting indices.
    if field.base_poly() != poly || field.ext_delta() != delta {
        return Err(err(
            lines.num,
            "field polynomial or delta does not match this toolkit",
        ));
    }
    Ok(field)
}

pub fn read_secret_key(text: &str) -> Result<QdSecretKey, ParseError> {
    let mut lines = Lines {
        iter: text.lines(),
        num: 0,
    };
    let field = parse_header(&mut lines, "sk")?;
    let gamma_body = lines.expect_tag("gamma")?.to_string();
    let gamma = parse_usize(&lines, &gamma_body)?;
    let gens_body = lines.expect_tag("gens")?.to_string();
    let gens = parse_hex_list(&lines, &gens_body)?;
    if gens.len() != gamma {
        return Err(err(
            lines.num,
            format!("expected {gamma} generators, found {}", gens.len()),
        ));
    }
    let reps_body = lines.expect_tag("reps")?.to_string();
    let reps = parse_hex_list(&lines, &reps_body)?;
    let mults_body = lines.expect_tag("mults")?.to_string();
    let mults = parse_hex_list(&lines, &mults_body)?;
    let r0_body = lines.expect_tag("r0")?.to_string();
    let r0 = parse_usize(&lines, &r0_body)?;
    let group = AdditiveGroup::new(gens).map_err(|e| err(lines.num, e.to_string()))?;
    QdSecretKey::from_parts(field, group, reps, mults, r0)
        .map_err(|e| err(lines.num, e.to_string()))
}

pub fn read_public_key(text: &str) -> Result<QdPublicKey, ParseError> {
    let mut lines = Lines {
        iter: text.lines(),
        num: 0,
    };
    let field = parse_header(&mut lines, "pk")?;
    let gamma_body = lines.expect_tag("gamma")?.to_string();
    let gamma = parse_usize(&lines, &gamma_body)? as u32;
    let n0_body = lines.expect_tag("n0")?.to_string();
    let n0 = parse_usize(&lines, &n0_body)?;
    let gen_body = lines.expect_tag("gen")?.to_string();
    let mut it = gen_body.split_whitespace();
    let dim_word = it
        .next()
        .ok_or_else(|| err(lines.num, "gen line needs dim and n"))?;
    let n_word = it
        .next()
        .ok_or_else(|| err(lines.num, "gen line needs dim and n"))?;
    let dim = parse_usize(&lines, dim_word)?;
    let n = parse_usize(&lines, n_word)?;
    let mut rows = Vec::with_capacity(dim);
    for _ in 0..dim {
        let body = lines.next_line()?.to_string();
        let row = parse_hex_list(&lines, &body)?;
        if row.len() != n {
            return Err(err(
                lines.num,
                format!("expected {n} entries, found {}", row.len()),
            ));
        }
        rows.push(row);
    }
    let gen = Mat::from_rows(field.clone(), n, rows);
    let code =
        LinearCode::from_generator(Level::Base, gen).map_err(|e| err(lines.num, e.to_string()))?;
    if code.dim() != dim {
        return Err(err(
            lines.num,
            "generator rows are not a canonical rref basis",
        ));
    }
    QdPublicKey::new(field, gamma, n0, code).map_err(|e| err(lines.num, e.to_string()))
}
