//! Exact rational scalars and dense rational vectors.
//!
//! Every quantity on the exact path is a `Rat` (arbitrary-precision rational
//! kept in lowest terms with positive denominator by `num`). Floating point
//! never enters any computation.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

pub type Int = BigInt;
pub type Rat = BigRational;

/// Dense rational vector; the dimension is its length.
pub type Vector = Vec<Rat>;

pub fn rat(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn vec_i64(entries: &[i64]) -> Vector {
    entries.iter().map(|&e| int(e)).collect()
}

pub fn zeros(n: usize) -> Vector {
    vec![Rat::zero(); n]
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = zeros(n);
    v[i] = Rat::one();
    v
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}

pub fn add(a: &[Rat], b: &[Rat]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn neg(a: &[Rat]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn scale(c: &Rat, a: &[Rat]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

pub fn is_zero_vec(a: &[Rat]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// Squared Euclidean norm (rational, exact).
pub fn norm_sq(a: &[Rat]) -> Rat {
    dot(a, a)
}

pub fn concat(a: &[Rat], b: &[Rat]) -> Vector {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

/// Scales a nonzero vector to the unique primitive integer representative of
/// its positive ray: integer entries with overall gcd 1, direction preserved.
/// Returns `None` for the zero vector.
pub fn primitive(v: &[Rat]) -> Option<Vector> {
    if is_zero_vec(v) {
        return None;
    }
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut g = BigInt::zero();
    for z in &ints {
        g = g.gcd(z);
    }
    Some(ints.iter().map(|z| Rat::from_integer(z / &g)).collect())
}

/// Primitive representative with canonical sign: first nonzero entry positive.
/// Used for unoriented objects (hyperplanes, lineality generators). The flag
/// is `true` when the sign was flipped.
pub fn primitive_signed(v: &[Rat]) -> Option<(Vector, bool)> {
    let p = primitive(v)?;
    let first = p.iter().find(|x| !x.is_zero()).unwrap();
    if first.is_negative() {
        Some((neg(&p), true))
    } else {
        Some((p, false))
    }
}

/// Lexicographic comparison, used as the canonical generator order.
pub fn lex_cmp(a: &[Rat], b: &[Rat]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.cmp(y) {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Renders a rational as "p" or "p/q".
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn fmt_vec(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_rat).collect();
    format!("({})", parts.join(", "))
}

/// Parses "p", "-p" or "p/q" into a rational. Rejects zero denominators.
pub fn parse_rat(s: &str) -> std::result::Result<Rat, String> {
    let s = s.trim();
    let (num_s, den_s) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num_s
        .parse()
        .map_err(|_| format!("invalid integer {:?}", num_s))?;
    let d: BigInt = den_s
        .parse()
        .map_err(|_| format!("invalid integer {:?}", den_s))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {:?}", s));
    }
    Ok(Rat::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_clears_denominators() {
        let v = vec![rat(1, 2), rat(-3, 4), int(0)];
        assert_eq!(primitive(&v).unwrap(), vec_i64(&[2, -3, 0]));
        assert!(primitive(&zeros(3)).is_none());
    }

    #[test]
    fn primitive_signed_orients_first_nonzero() {
        let (p, flipped) = primitive_signed(&vec_i64(&[0, -2, 4])).unwrap();
        assert_eq!(p, vec_i64(&[0, 1, -2]));
        assert!(flipped);
    }

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3", "-7/2", "0", "22/7"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(fmt_rat(&r), s);
        }
        assert!(parse_rat("1/0").is_err());
        assert_eq!(parse_rat("4/2").unwrap(), int(2));
    }
}
