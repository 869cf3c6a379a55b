use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaResult<T> {
    pub kappa: T,
    /// Standard error under the null hypothesis of chance agreement.
    pub se0: T,
    pub z: T,
    /// Two-sided normal-tail p-value of `z`.
    pub p_value: T,
}

/// Cohen's Kappa for two binary raters.
pub fn cohen_kappa<T: Scalar>(a: &[u8], b: &[u8]) -> Result<KappaResult<T>> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("rater lengths {} and {}", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter("kappa needs at least 2 ratings".into()));
    }
    let mut table = [[0u64; 2]; 2];
    for (&x, &y) in a.iter().zip(b) {
        if x > 1 || y > 1 {
            return Err(Error::InvalidLabel(x.max(y) as i64));
        }
        table[x as usize][y as usize] += 1;
    }
    cohen_kappa_from_table(table)
}

/// Kappa from a joint count table `table[a][b]`.
///
/// The point estimate is computed from integer counts and divided once, so
/// it is exact up to the final rounding.
pub fn cohen_kappa_from_table<T: Scalar>(table: [[u64; 2]; 2]) -> Result<KappaResult<T>> {
    let n: u64 = table.iter().flatten().sum();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let agree = (table[0][0] + table[1][1]) as i128;
    let chance = (rows[0] * cols[0] + rows[1] * cols[1]) as i128;
    let n2 = (n as i128) * (n as i128);
    if chance == n2 {
        return Err(Error::UndefinedKappa);
    }
    let num = n as i128 * agree - chance;
    let den = n2 - chance;
    let kappa = T::from_i128(num).unwrap() / T::from_i128(den).unwrap();

    // Fleiss, Cohen & Everitt null standard error.
    let nf = n as f64;
    let pa = rows.map(|r| r as f64 / nf);
    let pb = cols.map(|c| c as f64 / nf);
    let pe = chance as f64 / n2 as f64;
    let cross: f64 = (0..2).map(|k| pa[k] * pb[k] * (pa[k] + pb[k])).sum();
    let se0 = (pe + pe * pe - cross).max(0.0).sqrt() / ((1.0 - pe) * nf.sqrt());
    let k = kappa.as_f64();
    let z = if se0 > 0.0 {
        k / se0
    } else if k == 0.0 {
        0.0
    } else {
        k.signum() * f64::INFINITY
    };
    let p_value = (2.0 * Normal::standard().sf(z.abs())).min(1.0);
    Ok(KappaResult { kappa, se0: T::lit(se0), z: T::lit(z), p_value: T::lit(p_value) })
}
