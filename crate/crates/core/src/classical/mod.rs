//! Concrete classical CDS and PSM protocols.

pub mod gf2n;

use crate::error::{Error, Result};
use crate::protocol::types::{inner_product, CdsProtocol, PromiseFunction, PsmProtocol};

pub use gf2n::Gf2n;

/// Perfect CDS for NEQ on n-bit inputs with a one-bit secret.
pub fn neq_cds(n: u32) -> Result<CdsProtocol> {
    neq_cds_with_secret(n, 1)
}

/// NEQ CDS over GF(2^n) hiding a `secret_bits`-bit secret (1 <= secret_bits <= n).
///
/// Randomness r = (a, b) with a = r >> n, b = r & mask. Alice sends
/// ((a x + b) << secret_bits) | (s ^ low(a)); Bob sends a y + b. When x != y
/// the referee solves a = (m_A1 + m_B) / (x + y) and unmasks s.
pub fn neq_cds_with_secret(n: u32, secret_bits: u32) -> Result<CdsProtocol> {
    let f = Gf2n::new(n)?;
    if secret_bits == 0 || secret_bits > n {
        return Err(Error::InvalidArgument(format!(
            "secret width {secret_bits} must be in 1..={n}"
        )));
    }
    let mask = f.mask();
    let smask = (1u64 << secret_bits) - 1;
    let sb = secret_bits;
    let mut p = CdsProtocol::new(
        if secret_bits == 1 {
            format!("neq_cds({n})")
        } else {
            format!("neq_cds({n},{secret_bits})")
        },
        n as usize,
        (1 << n, 1 << n),
        2 * n,
        1 << secret_bits,
        (n + secret_bits, n),
        move |x, s, r| {
            let (a, b) = (r >> n, r & mask);
            ((f.mul(a, x) ^ b) << sb) | ((s ^ a) & smask)
        },
        move |y, r| {
            let (a, b) = (r >> n, r & mask);
            f.mul(a, y) ^ b
        },
        move |ma, x, mb, y| {
            let (u, c) = (ma >> sb, ma & smask);
            match f.inv(x ^ y) {
                Some(d) => (f.mul(u ^ mb, d) ^ c) & smask,
                // x = y: nothing is disclosed, output a fixed guess.
                None => 0,
            }
        },
    );
    p.params.insert("field_degree".into(), n.into());
    p.params.insert("modulus".into(), f.modulus().into());
    p.params.insert("secret_bits".into(), secret_bits.into());
    Ok(p)
}

/// Perfect PSM for the GF(2) inner product of n-bit strings.
///
/// Randomness (r1, r2, r3) with r1, r2 n-bit and r3 one bit. Alice sends
/// (x ^ r1, <x, r2> ^ r3), Bob sends (y ^ r2, <y, r1> ^ <r1, r2> ^ r3); the
/// referee outputs <u, v> ^ alpha ^ beta.
pub fn ip_psm(n: u32) -> Result<PsmProtocol> {
    if !(1..=16).contains(&n) {
        return Err(Error::InvalidArgument(format!("ip_psm n={n} outside 1..=16")));
    }
    let mask = (1u64 << n) - 1;
    let split = move |r: u64| (r & mask, (r >> n) & mask, (r >> (2 * n)) & 1);
    let mut p = PsmProtocol::new(
        format!("ip_psm({n})"),
        n as usize,
        (1 << n, 1 << n),
        2 * n + 1,
        (n + 1, n + 1),
        move |x, r| {
            let (r1, r2, r3) = split(r);
            ((x ^ r1) << 1) | (inner_product(x, r2) ^ r3)
        },
        move |y, r| {
            let (r1, r2, r3) = split(r);
            ((y ^ r2) << 1) | (inner_product(y, r1) ^ inner_product(r1, r2) ^ r3)
        },
        |ma, mb| inner_product(ma >> 1, mb >> 1) ^ (ma & 1) ^ (mb & 1),
    );
    p.params.insert("n".into(), n.into());
    Ok(p)
}

/// Perfect CDS for 1-bit AND with a `secret_bits`-bit secret.
///
/// Alice sends s ^ r when x = 1 and the placeholder 0 otherwise; Bob sends
/// r when y = 1 and 0 otherwise. The referee knows (x, y), so the
/// placeholder never needs its own symbol.
pub fn and_cds_with_secret(secret_bits: u32) -> Result<CdsProtocol> {
    if !(1..=8).contains(&secret_bits) {
        return Err(Error::InvalidArgument(format!("secret width {secret_bits}")));
    }
    let mut p = CdsProtocol::new(
        if secret_bits == 1 {
            "and_cds".to_string()
        } else {
            format!("and_cds({secret_bits})")
        },
        1,
        (2, 2),
        secret_bits,
        1 << secret_bits,
        (secret_bits, secret_bits),
        |x, s, r| if x == 1 { s ^ r } else { 0 },
        |y, r| if y == 1 { r } else { 0 },
        |ma, x, mb, y| if x == 1 && y == 1 { ma ^ mb } else { 0 },
    );
    p.params.insert("secret_bits".into(), secret_bits.into());
    Ok(p)
}

pub fn and_cds() -> CdsProtocol {
    and_cds_with_secret(1).expect("width 1 is valid")
}

/// Perfect PSM for any boolean h on a small domain, by embedding h into the
/// inner-product PSM over |Y| bits: Alice inputs her truth-table row, Bob the
/// indicator vector of y. Inputs outside the promise contribute 0.
pub fn truth_table_psm(h: &PromiseFunction) -> Option<PsmProtocol> {
    let ys = h.y_size();
    if ys == 0 || ys > 11 {
        return None;
    }
    let inner = ip_psm(ys as u32).ok()?;
    let rows: Vec<u64> = (0..h.x_size())
        .map(|x| {
            (0..ys).fold(0u64, |acc, y| {
                acc | ((h.evaluate(x, y) == Some(true)) as u64) << y
            })
        })
        .collect();
    let (ia, ib, id) = (inner.clone(), inner.clone(), inner.clone());
    let mut p = PsmProtocol::new(
        format!("truth_table_psm({})", h.name()),
        h.n(),
        (h.x_size(), ys),
        inner.randomness_bits,
        (inner.message_a_bits, inner.message_b_bits),
        move |x, r| ia.message_a(rows[x as usize], r),
        move |y, r| ib.message_b(1 << y, r),
        move |ma, mb| id.decode(ma, mb),
    );
    p.params.insert("inner".into(), inner.name.clone().into());
    Some(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::enumerate::{
        cds_decode_successes, enumerate_message_distribution, psm_decode_successes,
    };

    #[test]
    fn neq_worked_example() {
        // F_4 with modulus x^2 + x + 1: a = 3, b = 1, x = 1, y = 2, s = 0.
        let p = neq_cds(2).unwrap();
        let r = (3 << 2) | 1;
        let ma = p.message_a(1, 0, r);
        let mb = p.message_b(2, r);
        assert_eq!((ma >> 1, ma & 1), (2, 1));
        assert_eq!(mb, 0);
        let f = Gf2n::new(2).unwrap();
        let a = f.mul((ma >> 1) ^ mb, f.inv(1 ^ 2).unwrap());
        assert_eq!(a, 3);
        assert_eq!(p.decode(ma, 1, mb, 2), 0);
    }

    #[test]
    fn neq_exhaustive_small() {
        for n in 1..=4 {
            let p = neq_cds(n).unwrap();
            let full = 1u64 << p.randomness_bits;
            for x in 0..1u64 << n {
                for y in 0..1u64 << n {
                    if x == y {
                        let d0 = enumerate_message_distribution(&p, x, y, 0).unwrap();
                        let d1 = enumerate_message_distribution(&p, x, y, 1).unwrap();
                        assert_eq!(d0, d1);
                    } else {
                        for s in 0..2 {
                            assert_eq!(cds_decode_successes(&p, x, y, s).unwrap(), full);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn neq_cost() {
        for n in 1..=16 {
            let c = neq_cds(n).unwrap().cost();
            assert_eq!((c.classical_bits, c.random_bits), (2 * n + 1, 2 * n));
        }
        assert!(neq_cds(0).is_err());
        assert!(neq_cds(17).is_err());
    }

    #[test]
    fn ip_worked_example() {
        // Bit i of the integer is component i: x = (1,0) -> 0b01, y = (1,1) -> 0b11,
        // r1 = (0,1) -> 0b10, r2 = (1,0) -> 0b01, r3 = 0.
        let p = ip_psm(2).unwrap();
        let r = 0b10 | (0b01 << 2);
        let ma = p.message_a(0b01, r);
        let mb = p.message_b(0b11, r);
        assert_eq!((ma >> 1, ma & 1), (0b11, 1));
        assert_eq!((mb >> 1, mb & 1), (0b10, 1));
        assert_eq!(p.decode(ma, mb), 1);
    }

    #[test]
    fn ip_zero_vector() {
        let p = ip_psm(3).unwrap();
        for y in 0..8 {
            assert_eq!(psm_decode_successes(&p, 0, y, 0).unwrap(), 1 << p.randomness_bits);
        }
    }

    #[test]
    fn and_cds_behaviour() {
        let p = and_cds();
        assert_eq!(cds_decode_successes(&p, 1, 1, 1).unwrap(), 2);
        for (x, y) in [(0, 0), (0, 1), (1, 0)] {
            let d0 = enumerate_message_distribution(&p, x, y, 0).unwrap();
            let d1 = enumerate_message_distribution(&p, x, y, 1).unwrap();
            assert_eq!(d0, d1);
        }
        let c = p.cost();
        assert_eq!((c.classical_bits, c.random_bits), (2, 1));
    }

    #[test]
    fn truth_table_psm_computes_h() {
        let h = PromiseFunction::neq(2);
        let p = truth_table_psm(&h).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                let v = (x != y) as u64;
                assert_eq!(psm_decode_successes(&p, x, y, v).unwrap(), 1 << p.randomness_bits);
            }
        }
    }
}
