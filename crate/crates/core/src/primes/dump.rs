//! Binary dump of a prime table: the magic `RLPT1`, the limit and the prime
//! count as little-endian `u64`, then every prime as a little-endian `u64`.

use std::io::{Read, Write};

use super::{PrimeTable, MAX_TABLE_LIMIT};
use crate::error::{Error, Result};

pub const PRIME_TABLE_MAGIC: &[u8; 5] = b"RLPT1";

pub fn write_prime_table<W: Write>(table: &PrimeTable, mut out: W) -> Result<()> {
    out.write_all(PRIME_TABLE_MAGIC)?;
    out.write_all(&table.limit.to_le_bytes())?;
    out.write_all(&(table.primes.len() as u64).to_le_bytes())?;
    for &p in &table.primes {
        out.write_all(&p.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Reads a dump and rebuilds the smallest-prime-factor array from the stored
/// primes. Rejects dumps whose prime list is not exactly the primes up to the
/// limit.
pub fn load_prime_table<R: Read>(mut input: R) -> Result<PrimeTable> {
    let mut magic = [0u8; 5];
    input.read_exact(&mut magic)?;
    if &magic != PRIME_TABLE_MAGIC {
        return Err(Error::Malformed(
            "not a prime table dump (bad magic)".into(),
        ));
    }
    let limit = read_u64(&mut input)?;
    let count = read_u64(&mut input)?;
    if !(2..=MAX_TABLE_LIMIT).contains(&limit) || count > limit {
        return Err(Error::Malformed(format!(
            "implausible header: limit {limit}, count {count}"
        )));
    }
    let mut primes = Vec::with_capacity(count as usize);
    let mut prev = 1u64;
    for _ in 0..count {
        let p = read_u64(&mut input)?;
        if p <= prev || p > limit {
            return Err(Error::Malformed(format!(
                "prime list not increasing within limit at {p}"
            )));
        }
        primes.push(p);
        prev = p;
    }
    let mut spf = vec![0u32; limit as usize + 1];
    for &p in &primes {
        if spf[p as usize] != 0 {
            return Err(Error::Malformed(format!(
                "{p} listed as prime but is composite"
            )));
        }
        let mut m = p;
        while m <= limit {
            if spf[m as usize] == 0 {
                spf[m as usize] = p as u32;
            }
            m += p;
        }
    }
    if let Some(n) = (2..=limit).find(|&n| spf[n as usize] == 0) {
        return Err(Error::Malformed(format!("prime {n} missing from dump")));
    }
    Ok(PrimeTable::from_parts(limit, primes, spf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::build_prime_table;

    #[test]
    fn roundtrip() {
        let t = build_prime_table(10_000).unwrap();
        let mut buf = Vec::new();
        write_prime_table(&t, &mut buf).unwrap();
        assert_eq!(&buf[..5], b"RLPT1");
        assert_eq!(buf.len(), 5 + 16 + 8 * t.primes().len());
        let back = load_prime_table(buf.as_slice()).unwrap();
        assert_eq!(back.primes(), t.primes());
        assert!((2..=10_000).all(|n| back.spf(n) == t.spf(n)));
    }

    #[test]
    fn rejects_tampered_dumps() {
        let t = build_prime_table(100).unwrap();
        let mut buf = Vec::new();
        write_prime_table(&t, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            load_prime_table(bad.as_slice()),
            Err(Error::Malformed(_))
        ));

        // drop the last prime (97) and fix up the count
        let mut short = buf[..buf.len() - 8].to_vec();
        short[13..21].copy_from_slice(&(t.primes().len() as u64 - 1).to_le_bytes());
        assert!(matches!(
            load_prime_table(short.as_slice()),
            Err(Error::Malformed(_))
        ));
    }
}
