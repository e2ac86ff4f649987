//! Serialization of lattice functions.
//!
//! Binary layout (`LHF1`, little endian):
//! magic `LHF1` | d: u32 | m: u32 | eps: f64 | per-axis lo: i64, hi: i64 |
//! values: d-dimensional row-major f64 array over the index box, m per site.
//!
//! The binary format covers dense box domains (the bounding index box is the
//! site set); a CSV debug dump is available for any domain.

use super::domain::{LatticeDomain, DEFAULT_SITE_BUDGET};
use super::function::LatticeFunction;
use crate::error::{LathomError, Result};
use crate::geometry::RealBox;
use crate::scalar::Scalar;
use std::io::{Read, Write};
use std::sync::Arc;

const MAGIC: &[u8; 4] = b"LHF1";

pub fn write_binary<S: Scalar>(u: &LatticeFunction<S>, mut w: impl Write) -> Result<()> {
    let domain = u.domain();
    if !domain.is_dense_box() {
        return Err(LathomError::Format(
            "LHF1 requires a dense box domain".into(),
        ));
    }
    let (lo, hi) = domain.bounds();
    w.write_all(MAGIC)?;
    w.write_all(&(domain.dim() as u32).to_le_bytes())?;
    w.write_all(&(u.components() as u32).to_le_bytes())?;
    w.write_all(&domain.spacing().to_f64_lossy().to_le_bytes())?;
    for k in 0..domain.dim() {
        w.write_all(&lo[k].to_le_bytes())?;
        w.write_all(&hi[k].to_le_bytes())?;
    }
    for &v in u.values() {
        w.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<S: Scalar>(mut r: impl Read) -> Result<LatticeFunction<S>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(LathomError::Format("bad magic, expected LHF1".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let d = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let m = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let eps = f64::from_le_bytes(b8);
    if d == 0 || m == 0 || !(eps > 0.0) {
        return Err(LathomError::Format("bad LHF1 header".into()));
    }
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    for k in 0..d {
        r.read_exact(&mut b8)?;
        lo[k] = i64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        hi[k] = i64::from_le_bytes(b8);
        if lo[k] >= hi[k] {
            return Err(LathomError::Format("empty index range".into()));
        }
    }
    // reconstruct the dense box domain from index ranges
    let eps_s = S::from_f64(eps);
    let half = S::from_f64(0.5);
    let blo: Vec<S> = lo.iter().map(|&i| (S::from_f64(i as f64) - half) * eps_s).collect();
    let bhi: Vec<S> = hi.iter().map(|&i| (S::from_f64(i as f64) - half) * eps_s).collect();
    let bx = RealBox::new(blo, bhi)?;
    let domain = Arc::new(LatticeDomain::from_boxes(
        std::slice::from_ref(&bx),
        eps_s,
        DEFAULT_SITE_BUDGET,
    )?);
    {
        let (dlo, dhi) = domain.bounds();
        if dlo != lo.as_slice() || dhi != hi.as_slice() {
            return Err(LathomError::Format(
                "reconstructed index ranges disagree with header".into(),
            ));
        }
    }
    let n = domain.len() * m;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut b8)?;
        values.push(S::from_f64(f64::from_le_bytes(b8)));
    }
    LatticeFunction::from_values(domain, m, values)
}

/// CSV debug dump: index columns, coordinate columns, value columns.
pub fn write_csv<S: Scalar>(u: &LatticeFunction<S>, mut w: impl Write) -> Result<()> {
    let domain = u.domain();
    let d = domain.dim();
    let m = u.components();
    let mut header = Vec::new();
    for k in 0..d {
        header.push(format!("i{}", k + 1));
    }
    for k in 0..d {
        header.push(format!("x{}", k + 1));
    }
    for i in 0..m {
        header.push(format!("v{}", i + 1));
    }
    writeln!(w, "{}", header.join(","))?;
    let mut x = vec![S::zero(); d];
    for p in 0..domain.len() {
        domain.coords_into(p, &mut x);
        let mut row = Vec::new();
        for &i in domain.site(p) {
            row.push(i.to_string());
        }
        for &c in &x {
            row.push(format!("{c}"));
        }
        for &v in u.value(p) {
            row.push(format!("{v}"));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
