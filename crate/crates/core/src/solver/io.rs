//! Plain-text field files and PGM snapshots.
//!
//! ```text
//! TWAC1
//! nx ny spacing ox oy domain bc
//! u1 u2            (one line per node, row-major)
//! ```
//! `domain` is `rect` or `disc:cx:cy:r`, `bc` is `neumann` or `dirichlet`.
//! Numbers use the shortest representation that reads back to the same bits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::potential::{Point, Potential};

use super::grid::{Bc, Domain, Field, GridSpec, NodeKind};

pub const MAGIC: &str = "TWAC1";

pub fn field_to_string(field: &Field) -> String {
    let mut s = String::with_capacity(field.values.len() * 40 + 64);
    s.push_str(MAGIC);
    s.push('\n');
    let domain = match field.domain {
        Domain::Rect => "rect".to_string(),
        Domain::Disc { center, radius } => format!("disc:{}:{}:{}", center.x, center.y, radius),
    };
    let bc = match field.bc {
        Bc::Neumann => "neumann",
        Bc::Dirichlet => "dirichlet",
    };
    writeln!(s, "{} {} {} {} {} {} {}", field.nx, field.ny, field.spacing, field.origin.x, field.origin.y, domain, bc).unwrap();
    for v in &field.values {
        writeln!(s, "{} {}", v.x, v.y).unwrap();
    }
    s
}

pub fn write_field(path: &Path, field: &Field) -> Result<()> {
    fs::write(path, field_to_string(field))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<Field> {
    parse_field(&fs::read_to_string(path)?)
}

/// Whitespace-separated tokens with their byte offsets.
struct Tokens<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let rest = &self.text[self.pos..];
        let skip = rest.len() - rest.trim_start().len();
        let start = self.pos + skip;
        let len = self.text[start..].find(char::is_whitespace).unwrap_or(self.text.len() - start);
        if len == 0 {
            return Err(Error::Parse { offset: start, message: format!("unexpected end of input, expected {what}") });
        }
        self.pos = start + len;
        Ok((start, &self.text[start..start + len]))
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let (off, tok) = self.next(what)?;
        tok.parse().map_err(|_| Error::Parse { offset: off, message: format!("invalid {what}: {tok:?}") })
    }
}

pub fn parse_field(text: &str) -> Result<Field> {
    let first = text.lines().next().unwrap_or("").trim();
    if first != MAGIC {
        if let Some(v) = first.strip_prefix("TWAC") {
            if !v.is_empty() && v.chars().all(|c| c.is_ascii_digit()) {
                return Err(Error::Version { expected: MAGIC.into(), found: first.into() });
            }
        }
        return Err(Error::Parse { offset: 0, message: format!("missing {MAGIC} header") });
    }
    let mut t = Tokens { text, pos: text.find('\n').map_or(text.len(), |p| p + 1) };
    let nx: usize = t.number("nx")?;
    let ny: usize = t.number("ny")?;
    let spacing: f64 = t.number("spacing")?;
    let ox: f64 = t.number("origin x")?;
    let oy: f64 = t.number("origin y")?;
    let (doff, dtok) = t.next("domain")?;
    let domain = if dtok == "rect" {
        Domain::Rect
    } else {
        let parts: Vec<&str> = dtok.split(':').collect();
        let nums: Option<Vec<f64>> = parts.get(1..).map(|p| p.iter().filter_map(|s| s.parse().ok()).collect());
        match (parts.first(), nums) {
            (Some(&"disc"), Some(n)) if n.len() == 3 && parts.len() == 4 => Domain::Disc { center: Point::new(n[0], n[1]), radius: n[2] },
            _ => return Err(Error::Parse { offset: doff, message: format!("invalid domain {dtok:?}") }),
        }
    };
    let (boff, btok) = t.next("boundary condition")?;
    let bc = match btok {
        "neumann" => Bc::Neumann,
        "dirichlet" => Bc::Dirichlet,
        _ => return Err(Error::Parse { offset: boff, message: format!("invalid boundary condition {btok:?}") }),
    };
    let grid = GridSpec::new(nx, ny, spacing, Point::new(ox, oy)).map_err(|e| Error::Parse { offset: 0, message: e.to_string() })?;
    let mut field = Field::new(grid, domain, bc, Point::zeros());
    for v in field.values.iter_mut() {
        v.x = t.number("node value")?;
        v.y = t.number("node value")?;
    }
    let rest = &text[t.pos..];
    if !rest.trim().is_empty() {
        let off = t.pos + (rest.len() - rest.trim_start().len());
        return Err(Error::Parse { offset: off, message: "trailing data after the last node".into() });
    }
    Ok(field)
}

/// Binary greyscale image, one pixel per node, top row first. Each node is
/// shaded by its nearest well and darkened with its distance from it.
pub fn write_pgm(path: &Path, field: &Field, pot: &Potential) -> Result<()> {
    let levels = [70.0, 150.0, 230.0];
    let sep = pot.min_well_separation();
    let mut data = format!("P5\n{} {}\n255\n", field.nx, field.ny).into_bytes();
    for j in (0..field.ny).rev() {
        for i in 0..field.nx {
            let k = field.index(i, j);
            if field.mask[k] == NodeKind::Outside {
                data.push(0);
                continue;
            }
            let v = field.values[k];
            let l = pot.nearest_well(&v);
            let fade = 1.0 - ((v - pot.well(l)).norm() / sep).min(0.5);
            data.push((levels[l] * fade).round() as u8);
        }
    }
    fs::write(path, data)?;
    Ok(())
}
