//! Text serialization of sampling masks.
//!
//! Format: header `mask <n_t> <n_y> <domain> <M>` followed by M lines
//! `u v`, order significant. Round trips are bit-exact.

use crate::error::{PhsdError, Result};
use crate::sensing::{MaskDomain, SamplingMask};

pub fn write_mask(mask: &SamplingMask) -> Vec<u8> {
    let mut out = format!(
        "mask {} {} {} {}\n",
        mask.n_t,
        mask.n_y,
        mask.domain.as_str(),
        mask.len()
    );
    for &(u, v) in &mask.indices {
        out.push_str(&format!("{u} {v}\n"));
    }
    out.into_bytes()
}

/// Parse a mask file. The completion flag is not stored in the format; it
/// is re-derived from whether the index set is conjugate-closed.
pub fn read_mask(bytes: &[u8]) -> Result<SamplingMask> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| PhsdError::format("mask file is not valid UTF-8"))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| PhsdError::format("empty mask file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "mask" {
        return Err(PhsdError::format(format!(
            "bad mask header {header:?}: expected `mask <n_t> <n_y> <domain> <M>`"
        )));
    }
    let parse = |s: &str, what: &str| -> Result<usize> {
        s.parse().map_err(|_| PhsdError::format(format!("mask header field {what} = {s:?}")))
    };
    let n_t = parse(fields[1], "n_t")?;
    let n_y = parse(fields[2], "n_y")?;
    let domain: MaskDomain = fields[3].parse()?;
    let m = parse(fields[4], "M")?;

    let mut indices = Vec::with_capacity(m);
    for (lineno, line) in lines.enumerate() {
        let mut it = line.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some(u), Some(v), None) => {
                indices.push((parse(u, "u")?, parse(v, "v")?));
            }
            _ => {
                return Err(PhsdError::format(format!(
                    "mask line {}: expected `u v`, got {line:?}",
                    lineno + 2
                )))
            }
        }
    }
    if indices.len() != m {
        return Err(PhsdError::format(format!(
            "mask header promises M={m} indices, file has {}",
            indices.len()
        )));
    }
    let mask = SamplingMask::new(n_t, n_y, domain, indices, false)?;
    let closed = mask.is_hermitian_closed();
    Ok(SamplingMask { hermitian_completed: closed, ..mask })
}
