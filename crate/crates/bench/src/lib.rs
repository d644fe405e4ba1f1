//! Fixtures shared by the criterion benchmarks.

use toric_sde::{HalfSpacePoint, IsotropyData, MultipoleData};

/// Weights of `S⁴`, `ℂP²` and a `b₂ = 2` example, by name.
pub fn weight_fixtures() -> Vec<(&'static str, MultipoleData)> {
    let twice: [(&str, &[(i64, i64)]); 3] = [
        ("s4", &[(1, -1), (1, 1)]),
        ("cp2", &[(1, 0), (2, 1), (1, 1)]),
        ("k4", &[(1, -1), (1, 0), (2, 2), (1, 2)]),
    ];
    twice.iter().map(|(name, w)| (*name, MultipoleData::from_twice(w).expect("fixture weights"))).collect()
}

/// Isotropy data of growing length, from weights with kinks at `0, 1, ..`.
/// The last weight is adjusted so that the vectors are integral.
pub fn isotropy_fixtures() -> Vec<(usize, IsotropyData)> {
    (3..=8)
        .map(|k| {
            let mut twice: Vec<(i64, i64)> = (0..k as i64).map(|j| (1, j)).collect();
            if k % 2 == 1 {
                twice[k - 1] = (2, 2 * (k as i64 - 1));
            }
            if twice.iter().map(|t| t.1).sum::<i64>() % 2 == 1 {
                twice[k - 1].1 += 1;
            }
            let w = MultipoleData::from_twice(&twice).expect("increasing kinks");
            (k, toric_sde::from_multipole(&w).expect("fixture data").0)
        })
        .collect()
}

pub fn probe() -> HalfSpacePoint {
    HalfSpacePoint::new(0.8, 0.3).expect("rho > 0")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropy_fixtures_are_admissible() {
        for (k, d) in isotropy_fixtures() {
            assert!(toric_sde::lattice::validate(&d).is_valid(), "k = {k}");
            assert!(toric_sde::decide_admissible(&d).admissible, "k = {k}");
        }
    }
}
