//! Binary dump of one ToA search for offline inspection.
//!
//! Layout: three arrays in the order received vector, template, objective
//! curve. Each is a little-endian `u64` element count followed by that many
//! little-endian `f64` values.

use std::io::{self, Read, Write};

/// Contents of a trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub objective: Vec<f64>,
}

fn write_array<W: Write>(w: &mut W, v: &[f64]) -> io::Result<()> {
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn read_array<R: Read>(r: &mut R) -> io::Result<Vec<f64>> {
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let n = u64::from_le_bytes(len) as usize;
    let mut buf = [0u8; 8];
    let mut out = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        out.push(f64::from_le_bytes(buf));
    }
    Ok(out)
}

pub fn write_trace<W: Write>(w: &mut W, y: &[f64], s: &[f64], objective: &[f64]) -> io::Result<()> {
    write_array(w, y)?;
    write_array(w, s)?;
    write_array(w, objective)
}

pub fn read_trace<R: Read>(r: &mut R) -> io::Result<Trace> {
    Ok(Trace { y: read_array(r)?, s: read_array(r)?, objective: read_array(r)? })
}
