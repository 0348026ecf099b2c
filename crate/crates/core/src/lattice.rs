//! Integer lattice shells `{k ∈ ℤ³ : |k|² = r}`.

/// All lattice points with `|k|² = r2`, sorted lexicographically.
pub fn shell(r2: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    if r2 < 0 {
        return out;
    }
    let r = (r2 as f64).sqrt().floor() as i64 + 1;
    for a in -r..=r {
        for b in -r..=r {
            let rest = r2 - a * a - b * b;
            if rest < 0 {
                continue;
            }
            let c = (rest as f64).sqrt().round() as i64;
            if c * c == rest {
                out.push([a, b, c]);
                if c != 0 {
                    out.push([a, b, -c]);
                }
            }
        }
    }
    out.sort();
    out
}

/// Whether `k` is lexicographically positive (first nonzero entry positive).
pub fn is_canonical(k: [i64; 3]) -> bool {
    k.iter().find(|c| **c != 0).is_some_and(|c| *c > 0)
}

/// The lexicographically positive member of `{k, −k}`.
pub fn canonical(k: [i64; 3]) -> [i64; 3] {
    if is_canonical(k) {
        k
    } else {
        [-k[0], -k[1], -k[2]]
    }
}

pub fn neg(k: [i64; 3]) -> [i64; 3] {
    [-k[0], -k[1], -k[2]]
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Whether the entries of `k` have no common factor.
pub fn is_primitive(k: [i64; 3]) -> bool {
    gcd(gcd(k[0], k[1]), k[2]) == 1
}

pub fn norm(k: [i64; 3]) -> f64 {
    ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt()
}

pub fn unit(k: [i64; 3]) -> [f64; 3] {
    let n = norm(k);
    [k[0] as f64 / n, k[1] as f64 / n, k[2] as f64 / n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_counts() {
        assert_eq!(shell(1).len(), 6);
        assert_eq!(shell(25).len(), 30);
        assert_eq!(shell(81).len(), 102);
        assert_eq!(shell(121).len(), 78);
    }

    #[test]
    fn canonical_pairs() {
        assert_eq!(canonical([0, -1, 3]), [0, 1, -3]);
        assert!(is_canonical([1, -5, 0]));
        assert!(!is_primitive([2, 0, 0]));
        assert!(is_primitive([3, 4, 0]));
    }
}
