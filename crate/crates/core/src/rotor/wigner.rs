//! Wigner 3j symbols and Racah-normalized spherical tensor matrix elements.

use std::sync::OnceLock;

const FACT_MAX: usize = 170;

fn factorials() -> &'static [f64; FACT_MAX + 1] {
    static TABLE: OnceLock<[f64; FACT_MAX + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; FACT_MAX + 1];
        for i in 1..=FACT_MAX {
            t[i] = t[i - 1] * i as f64;
        }
        t
    })
}

fn fact(n: i32) -> f64 {
    factorials()[n as usize]
}

/// Wigner 3j symbol for integer angular momenta (Racah formula).
pub fn wigner_3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 {
        return 0.0;
    }
    if j1 < 0 || j2 < 0 || j3 < 0 || m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    assert!((j1 + j2 + j3 + 1) as usize <= FACT_MAX, "angular momenta too large for the factorial table");

    let tri = fact(j1 + j2 - j3) * fact(j1 - j2 + j3) * fact(-j1 + j2 + j3) / fact(j1 + j2 + j3 + 1);
    let pre =
        (tri * fact(j1 + m1) * fact(j1 - m1) * fact(j2 + m2) * fact(j2 - m2) * fact(j3 + m3) * fact(j3 - m3)).sqrt();

    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = fact(k)
            * fact(j1 + j2 - j3 - k)
            * fact(j1 - m1 - k)
            * fact(j2 + m2 - k)
            * fact(j3 - j2 + m1 + k)
            * fact(j3 - j1 - m2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / den;
    }
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * pre * sum
}

/// `⟨J' M'| C^k_q |J M⟩` for a linear rotor, with `C^k_q = √(4π/(2k+1)) Y_kq`.
pub fn ck_element(jp: i32, mp: i32, k: i32, q: i32, j: i32, m: i32) -> f64 {
    if mp != m + q {
        return 0.0;
    }
    let phase = if mp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let norm = (((2 * jp + 1) * (2 * j + 1)) as f64).sqrt();
    phase * norm * wigner_3j(jp, k, j, -mp, q, m) * wigner_3j(jp, k, j, 0, 0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // (1 1 0; 0 0 0) = -1/√3
        assert!((wigner_3j(1, 1, 0, 0, 0, 0) + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        // (2 2 0; 1 -1 0) = -1/√5
        assert!((wigner_3j(2, 2, 0, 1, -1, 0) + 1.0 / 5f64.sqrt()).abs() < 1e-15);
        // (1 1 2; 0 0 0) = √(2/15)
        assert!((wigner_3j(1, 1, 2, 0, 0, 0) - (2.0f64 / 15.0).sqrt()).abs() < 1e-15);
        assert_eq!(wigner_3j(1, 1, 3, 0, 0, 0), 0.0);
        assert_eq!(wigner_3j(1, 1, 1, 1, 0, 0), 0.0);
    }

    #[test]
    fn orthogonality() {
        // Σ_{m1 m2} (j1 j2 j3; m1 m2 m3)² = 1/(2j3+1)
        for (j1, j2) in [(2i32, 3i32), (4, 2), (5, 5)] {
            for j3 in (j1 - j2).abs()..=(j1 + j2) {
                for m3 in -j3..=j3 {
                    let mut s = 0.0;
                    for m1 in -j1..=j1 {
                        let m2 = -m1 - m3;
                        s += wigner_3j(j1, j2, j3, m1, m2, m3).powi(2);
                    }
                    assert!((s - 1.0 / (2 * j3 + 1) as f64).abs() < 1e-13);
                }
            }
        }
    }
}
