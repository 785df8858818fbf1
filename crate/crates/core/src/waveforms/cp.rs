use num_complex::Complex64;

use crate::error::{Error, Result};

/// Prepends the last `cp_len` samples of `x`.
pub fn add_cp(x: &[Complex64], cp_len: usize) -> Result<Vec<Complex64>> {
    if cp_len > x.len() {
        return Err(Error::Parameter(format!(
            "CP length {cp_len} exceeds block length {}",
            x.len()
        )));
    }
    let mut out = Vec::with_capacity(x.len() + cp_len);
    out.extend_from_slice(&x[x.len() - cp_len..]);
    out.extend_from_slice(x);
    Ok(out)
}

/// Drops the first `cp_len` samples.
pub fn remove_cp(x: &[Complex64], cp_len: usize) -> Result<Vec<Complex64>> {
    if cp_len > x.len() {
        return Err(Error::Parameter(format!(
            "CP length {cp_len} exceeds signal length {}",
            x.len()
        )));
    }
    Ok(x[cp_len..].to_vec())
}
