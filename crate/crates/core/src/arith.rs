//! Small modular-arithmetic helpers shared by the other modules.

use num_integer::Integer;

use crate::error::{Error, Result};

/// Units of `Z/m`, ascending.
pub fn units(m: u32) -> Vec<u32> {
    (1..m.max(2)).filter(|u| u.gcd(&m) == 1).collect()
}

/// Reduces an integer residue into `[0, m)` and checks that it is a unit.
pub fn unit_residue(p: i64, m: u32) -> Result<u32> {
    let r = p.rem_euclid(i64::from(m)) as u32;
    if m == 1 || r.gcd(&m) != 1 {
        return Err(Error::NonUnitResidue { p, m });
    }
    Ok(r)
}

/// Multiplicative order of a unit `u` modulo `m`.
pub fn mult_order(u: u32, m: u32) -> u32 {
    let mut x = u % m;
    let mut k = 1;
    while x != 1 % m {
        x = mul_mod(x, u, m);
        k += 1;
    }
    k
}

/// Additive order of `n` in `Z/m`.
pub fn additive_order(n: u32, m: u32) -> u32 {
    m / n.gcd(&m)
}

pub fn mul_mod(a: u32, b: u32, m: u32) -> u32 {
    ((u64::from(a) * u64::from(b)) % u64::from(m)) as u32
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Quadratic residues modulo an odd prime, ascending.
pub fn quadratic_residues(m: u32) -> Vec<u32> {
    let mut qr: Vec<u32> = (1..m).map(|x| mul_mod(x, x, m)).collect();
    qr.sort_unstable();
    qr.dedup();
    qr
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_and_orders() {
        assert_eq!(units(12), vec![1, 5, 7, 11]);
        assert_eq!(units(2), vec![1]);
        assert_eq!(mult_order(2, 7), 3);
        assert_eq!(mult_order(3, 7), 6);
        assert_eq!(mult_order(1, 2), 1);
        assert_eq!(additive_order(3, 9), 3);
        assert_eq!(additive_order(4, 8), 2);
    }

    #[test]
    fn unit_residue_rejects_shared_factor() {
        assert_eq!(unit_residue(23, 7), Ok(2));
        assert_eq!(unit_residue(-1, 8), Ok(7));
        assert!(matches!(unit_residue(14, 7), Err(Error::NonUnitResidue { .. })));
        assert!(unit_residue(6, 9).is_err());
    }

    #[test]
    fn residues_mod_11() {
        assert_eq!(quadratic_residues(11), vec![1, 3, 4, 5, 9]);
        assert!(is_prime(19) && !is_prime(21) && !is_prime(1));
    }
}
