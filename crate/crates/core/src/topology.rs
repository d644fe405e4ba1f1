//! Rational topology of a toric 4-orbifold from its isotropy data.
//!
//! The exceptional surfaces `S̄_1 .. S̄_k` are oriented by `v_1 .. v_k`. The
//! surface over the wrapped edge is labelled both by `v_k` and by
//! `v_0 = -v_k`, so `[S̄_0] = -[S̄_k]`; the corner between `S̄_k` and `S̄_1`
//! therefore contributes `+1/Δ_{k,k+1} = -1/Δ(v_k, v_1)` to the Gram matrix.
//! This is the only orientation for which `Σ m_j [S̄_j] = 0 = Σ n_j [S̄_j]`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{delta, is_cyclically_ordered, orient_cyclic, validate, IsotropyData, LatticeVector};

pub type Rational = BigRational;
type Small = Ratio<i128>;

fn rat(n: i128, d: i128) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionForm {
    pub gram: Vec<Vec<Rational>>,
    pub rank: usize,
    pub signature: i64,
    /// `(m_1 .. m_k)` and `(n_1 .. n_k)`.
    pub null_relations: [Vec<Rational>; 2],
}

impl IntersectionForm {
    pub fn k(&self) -> usize {
        self.gram.len()
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        self.gram
            .iter()
            .map(|row| row.iter().zip(x).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn gram_strings(&self) -> Vec<Vec<String>> {
        self.gram.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
    }
}

/// Inertia `(positive, negative, zero)` of a symmetric rational matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// Rational arithmetic with overflow detection: `Ratio<i128>` for the fast
/// path, [`BigRational`] (which never overflows) as the fallback.
trait Exact: Clone + Zero + Signed + CheckedAdd + CheckedSub + CheckedMul + CheckedDiv {}
impl<T: Clone + Zero + Signed + CheckedAdd + CheckedSub + CheckedMul + CheckedDiv> Exact for T {}

/// Congruence diagonalization over the rationals. A zero diagonal with a
/// nonzero off-diagonal entry `a_ij` is repaired by adding row/column `j` to
/// row/column `i`, which puts `2 a_ij` on the diagonal. `None` on overflow.
fn inertia_checked<T: Exact>(mut a: Vec<Vec<T>>) -> Option<Inertia> {
    let n = a.len();
    let mut out = Inertia { positive: 0, negative: 0, zero: 0 };
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let pivot = active.iter().copied().find(|&i| !a[i][i].is_zero());
        let p = match pivot {
            Some(p) => p,
            None => {
                let pair = active.iter().find_map(|&i| {
                    active.iter().find(|&&j| j != i && !a[i][j].is_zero()).map(|&j| (i, j))
                });
                let Some((i, j)) = pair else {
                    out.zero += active.len();
                    break;
                };
                for t in 0..n {
                    a[i][t] = a[i][t].checked_add(&a[j][t])?;
                }
                for t in 0..n {
                    a[t][i] = a[t][i].checked_add(&a[t][j])?;
                }
                i
            }
        };
        let d = a[p][p].clone();
        if d.is_positive() {
            out.positive += 1;
        } else {
            out.negative += 1;
        }
        active.retain(|&i| i != p);
        let row = a[p].clone();
        for &i in &active {
            if row[i].is_zero() {
                continue;
            }
            let f = row[i].checked_div(&d)?;
            for &j in &active {
                a[i][j] = a[i][j].checked_sub(&f.checked_mul(&row[j])?)?;
            }
            a[i][p] = T::zero();
            a[p][i] = T::zero();
        }
    }
    Some(out)
}

fn to_small(x: &Rational) -> Option<Small> {
    Some(Small::new(x.numer().to_i128()?, x.denom().to_i128()?))
}

/// Inertia `(positive, negative, zero)` of a symmetric rational matrix.
pub fn inertia(matrix: &[Vec<Rational>]) -> Inertia {
    let small: Option<Vec<Vec<Small>>> = matrix.iter().map(|r| r.iter().map(to_small).collect()).collect();
    if let Some(i) = small.and_then(inertia_checked) {
        return i;
    }
    inertia_checked(matrix.to_vec()).expect("big rationals do not overflow")
}

/// Gram entries as `(numerator, denominator)` pairs, before reduction.
fn gram_entries(data: &IsotropyData) -> Result<Vec<Vec<(i128, i128)>>> {
    let k = data.k();
    let dependent: Vec<usize> = (1..=k).filter(|&j| data.delta(j as isize - 1, j as isize) == 0).collect();
    if !dependent.is_empty() {
        return Err(Error::InvalidInput(format!("consecutive isotropy vectors are dependent at edges {dependent:?}")));
    }
    let mut gram = vec![vec![(0i128, 1i128); k]; k];
    let mut add = |i: usize, j: usize, (p, q): (i128, i128)| -> Result<()> {
        let (a, b) = gram[i][j];
        let overflow = || Error::Overflow("intersection matrix");
        let num = a.checked_mul(q).and_then(|x| p.checked_mul(b).and_then(|y| x.checked_add(y))).ok_or_else(overflow)?;
        let den = b.checked_mul(q).ok_or_else(overflow)?;
        let g = num_integer::gcd(num, den);
        gram[i][j] = (num / g, den / g);
        Ok(())
    };
    for j in 1..=k {
        let jj = j as isize;
        add(j - 1, j - 1, (data.delta(jj - 1, jj + 1), data.delta(jj - 1, jj) * data.delta(jj, jj + 1)))?;
        // corner between edge j and the next one, with the class orientation
        // of the next edge's stored vector
        let next = j % k;
        let d = delta(data.v(jj), data.vectors()[next]);
        add(j - 1, next, (-1, d))?;
        if next != j - 1 {
            add(next, j - 1, (-1, d))?;
        }
    }
    Ok(gram)
}

/// Signature of the Gram matrix computed in `i128` rationals, skipping the
/// construction of an [`IntersectionForm`]; the nullity must be two.
pub fn gram_signature(data: &IsotropyData) -> Result<i64> {
    let gram = gram_entries(data)?;
    let small: Vec<Vec<Small>> = gram.iter().map(|r| r.iter().map(|&(p, q)| Small::new(p, q)).collect()).collect();
    let i = match inertia_checked(small) {
        Some(i) => i,
        None => inertia(&intersection_matrix(data)?.gram),
    };
    if i.zero != 2 {
        return Err(Error::Inconsistent(format!("intersection form has nullity {}, expected 2", i.zero)));
    }
    Ok(i.positive as i64 - i.negative as i64)
}

pub fn intersection_matrix(data: &IsotropyData) -> Result<IntersectionForm> {
    let gram: Vec<Vec<Rational>> =
        gram_entries(data)?.into_iter().map(|r| r.into_iter().map(|(p, q)| rat(p, q)).collect()).collect();
    let inertia = inertia(&gram);
    let form = IntersectionForm {
        rank: inertia.positive + inertia.negative,
        signature: inertia.positive as i64 - inertia.negative as i64,
        null_relations: [
            data.m_values().iter().map(|&x| Rational::from_integer(x.into())).collect(),
            data.n_values().iter().map(|&x| Rational::from_integer(x.into())).collect(),
        ],
        gram,
    };
    for rel in &form.null_relations {
        if form.apply(rel).iter().any(|x| !x.is_zero()) {
            return Err(Error::Inconsistent("Gram matrix does not annihilate a null relation".into()));
        }
    }
    Ok(form)
}

/// Whether the Gram matrix annihilates `(m_1 .. m_k)` and `(n_1 .. n_k)`
/// exactly, in `i128` rationals with a big-rational fallback.
pub fn null_relations_hold(data: &IsotropyData) -> Result<bool> {
    let gram = gram_entries(data)?;
    let fast = || -> Option<bool> {
        for rel in [data.m_values(), data.n_values()] {
            for row in &gram {
                let mut acc = Small::zero();
                for (&(p, q), &x) in row.iter().zip(&rel) {
                    acc = acc.checked_add(&Small::new(p, q).checked_mul(&Small::from_integer(x.into()))?)?;
                }
                if !acc.is_zero() {
                    return Some(false);
                }
            }
        }
        Some(true)
    };
    match fast() {
        Some(holds) => Ok(holds),
        None => match intersection_matrix(data) {
            Ok(_) => Ok(true),
            Err(Error::Inconsistent(_)) => Ok(false),
            Err(e) => Err(e),
        },
    }
}

/// `[S̄_j]·[S̄_j] = Δ_{j-1,j+1} / (Δ_{j-1,j} Δ_{j,j+1})`, independent of signs.
pub fn self_intersection(data: &IsotropyData, j: usize) -> Rational {
    let j = j as isize;
    rat(data.delta(j - 1, j + 1), data.delta(j - 1, j) * data.delta(j, j + 1))
}

/// `χ_orb(S̄_j) = (Δ_{j-1,j} + Δ_{j,j+1}) / (Δ_{j-1,j} Δ_{j,j+1})`; requires
/// the two adjacent determinants to be positive.
pub fn euler_char_orb(data: &IsotropyData, j: usize) -> Result<Rational> {
    let jj = j as isize;
    let (a, b) = (data.delta(jj - 1, jj), data.delta(jj, jj + 1));
    if a <= 0 {
        return Err(Error::NotOriented(j));
    }
    if b <= 0 {
        return Err(Error::NotOriented(j % data.k() + 1));
    }
    Ok(rat(a + b, a * b))
}

/// `σ = Σ_j sign(Δ_{j-1} Δ_{j-1,j} Δ_j)` with `Δ_j = m n_j - n m_j`.
pub fn signature_formula(data: &IsotropyData, probe: LatticeVector) -> Result<i64> {
    let k = data.k() as isize;
    let probe_delta = |j: isize| delta(probe, data.v(j));
    if (1..=k).any(|j| probe_delta(j) == 0) {
        return Err(Error::DegenerateProbe(probe.m, probe.n));
    }
    Ok((1..=k)
        .map(|j| {
            let s = probe_delta(j - 1).signum() * data.delta(j - 1, j).signum() * probe_delta(j).signum();
            s as i64
        })
        .sum())
}

/// A probe not parallel to any `v_j`, found by scanning small vectors.
pub fn default_probe(data: &IsotropyData) -> LatticeVector {
    let bound = data.max_abs_entry().saturating_add(2);
    for n in 1..=bound {
        for m in 0..=n {
            for cand in [(m, n), (n, m), (-m, n), (n, -m)] {
                let p = LatticeVector::raw(cand.0, cand.1);
                if data.vectors().iter().all(|&v| delta(p, v) != 0) {
                    return p;
                }
            }
        }
    }
    // k + 1 distinct directions among (1, t) always contain a good one
    (0..).map(|t| LatticeVector::raw(1, t)).find(|&p| data.vectors().iter().all(|&v| delta(p, v) != 0)).unwrap()
}

/// Signature of the Gram matrix by exact congruence diagonalization; the
/// nullity must be exactly two.
pub fn signature_oracle(form: &IntersectionForm) -> Result<i64> {
    let i = inertia(&form.gram);
    if i.zero != 2 {
        return Err(Error::Inconsistent(format!("intersection form has nullity {}, expected 2", i.zero)));
    }
    Ok(i.positive as i64 - i.negative as i64)
}

/// The three positivity criteria, evaluated separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinitenessCheck {
    pub by_signature_formula: bool,
    pub by_gram_inertia: bool,
    pub by_cyclic_order: bool,
}

impl DefinitenessCheck {
    pub fn agree(&self) -> bool {
        self.by_signature_formula == self.by_gram_inertia && self.by_gram_inertia == self.by_cyclic_order
    }
}

pub fn definiteness_check(data: &IsotropyData) -> Result<DefinitenessCheck> {
    let k = data.k() as i64;
    let form = intersection_matrix(data)?;
    let by_signature_formula = signature_formula(data, default_probe(data))? == k - 2;
    let by_gram_inertia = signature_oracle(&form)? == k - 2;
    let by_cyclic_order = crate::lattice::half_plane_signs(data)
        .map(|s| is_cyclically_ordered(&data.with_signs(&s)))
        .unwrap_or(false);
    Ok(DefinitenessCheck { by_signature_formula, by_gram_inertia, by_cyclic_order })
}

pub fn is_positive_definite(data: &IsotropyData) -> Result<bool> {
    let check = definiteness_check(data)?;
    if !check.agree() {
        return Err(Error::Inconsistent(format!("definiteness criteria disagree: {check:?}")));
    }
    Ok(check.by_gram_inertia)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub b2: usize,
    pub signature: i64,
    pub positive_definite: bool,
    pub self_intersections: Vec<String>,
    /// Present when the data can be cyclically oriented.
    pub euler_orb: Option<Vec<String>>,
    pub orders: Vec<u64>,
    /// Signs applied to `v_j` before evaluating `χ_orb`.
    pub orientation_signs: Option<Vec<i8>>,
}

pub fn topology_report(data: &IsotropyData) -> Result<TopologyReport> {
    let k = data.k();
    let form = intersection_matrix(data)?;
    let signature = signature_oracle(&form)?;
    let formula = signature_formula(data, default_probe(data))?;
    if signature != formula {
        return Err(Error::Inconsistent(format!(
            "signature formula gives {formula}, Gram inertia gives {signature}"
        )));
    }
    let signs = orient_cyclic(data);
    let euler_orb = match &signs {
        Some(s) => {
            let oriented = data.with_signs(s);
            Some((1..=k).map(|j| euler_char_orb(&oriented, j).map(|x| x.to_string())).collect::<Result<_>>()?)
        }
        None => None,
    };
    Ok(TopologyReport {
        b2: k - 2,
        signature,
        positive_definite: is_positive_definite(data)?,
        self_intersections: (1..=k).map(|j| self_intersection(data, j).to_string()).collect(),
        euler_orb,
        orders: validate(data).orders,
        orientation_signs: signs,
    })
}

/// For `k = 3`: coprime positive weights `(λ_1, λ_2, λ_3)` and signs with
/// `Σ λ_j ε_j v_j = 0`, exhibiting the weighted projective plane.
pub fn weighted_projective_weights(data: &IsotropyData) -> Option<([u64; 3], [i8; 3])> {
    if data.k() != 3 {
        return None;
    }
    let v = data.vectors();
    let c = [delta(v[1], v[2]), delta(v[2], v[0]), delta(v[0], v[1])];
    if c.iter().any(|&x| x == 0) {
        return None;
    }
    let g = c.iter().fold(0u128, |g, &x| num_integer::gcd(g, x.unsigned_abs()));
    let weights = c.map(|x| (x.unsigned_abs() / g) as u64);
    let signs = c.map(|x| if x > 0 { 1i8 } else { -1 });
    Some((weights, signs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp2() -> IsotropyData {
        IsotropyData::from_pairs(&[(-1, -1), (1, 0), (2, 1)]).unwrap()
    }

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn cp2_gram_is_rank_one() {
        let f = intersection_matrix(&cp2()).unwrap();
        let expected = [[1, -1, 1], [-1, 1, -1], [1, -1, 1]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f.gram[i][j], r(expected[i][j]), "entry {i},{j}");
            }
        }
        assert_eq!(f.rank, 1);
        assert_eq!(f.signature, 1);
    }

    #[test]
    fn sphere_gram_vanishes() {
        let d = IsotropyData::from_pairs(&[(0, -1), (1, 0)]).unwrap();
        let f = intersection_matrix(&d).unwrap();
        assert_eq!(f.rank, 0);
        assert!(f.gram.iter().flatten().all(Zero::is_zero));
        assert_eq!(signature_oracle(&f).unwrap(), 0);
    }

    #[test]
    fn euler_examples() {
        for j in 1..=3 {
            assert_eq!(euler_char_orb(&cp2(), j).unwrap(), r(2));
        }
        // Δ_{0,1} = 1, Δ_{1,2} = 2
        let d = IsotropyData::from_pairs(&[(0, -1), (2, 1), (1, 1)]).unwrap();
        assert_eq!(d.delta(0, 1), 1);
        assert_eq!(d.delta(1, 2), 2);
        assert_eq!(euler_char_orb(&d, 1).unwrap(), Rational::new(3.into(), 2.into()));
        let unoriented = cp2().with_signs(&[1, -1, 1]);
        assert!(matches!(euler_char_orb(&unoriented, 1), Err(Error::NotOriented(2))));
    }

    #[test]
    fn signature_formula_examples() {
        assert_eq!(signature_formula(&cp2(), LatticeVector::raw(1, 2)).unwrap(), 1);
        assert_eq!(signature_formula(&cp2(), LatticeVector::raw(3, -1)).unwrap(), 1);
        // (1, 1) is parallel to v_1 = (-1, -1)
        assert!(matches!(
            signature_formula(&cp2(), LatticeVector::raw(1, 1)),
            Err(Error::DegenerateProbe(1, 1))
        ));
        let s4 = IsotropyData::from_pairs(&[(0, -1), (1, 0)]).unwrap();
        assert_eq!(signature_formula(&s4, LatticeVector::raw(1, 1)).unwrap(), 0);
    }

    #[test]
    fn inertia_of_diagonal() {
        let m = vec![
            vec![r(1), r(0), r(0), r(0)],
            vec![r(0), r(-1), r(0), r(0)],
            vec![r(0), r(0), r(0), r(0)],
            vec![r(0), r(0), r(0), r(0)],
        ];
        assert_eq!(inertia(&m), Inertia { positive: 1, negative: 1, zero: 2 });
    }

    #[test]
    fn inertia_with_zero_diagonal() {
        let m = vec![vec![r(0), r(1)], vec![r(1), r(0)]];
        assert_eq!(inertia(&m), Inertia { positive: 1, negative: 1, zero: 0 });
    }

    #[test]
    fn definiteness_examples() {
        assert!(is_positive_definite(&cp2()).unwrap());
        assert!(!is_positive_definite(&cp2().reflected()).unwrap());
        let s4 = IsotropyData::from_pairs(&[(0, -1), (1, 0)]).unwrap();
        assert!(is_positive_definite(&s4).unwrap());
        // winds through 3π: every Δ_{j-1,j} > 0 but σ = 0 < k - 2
        let wound = IsotropyData::from_pairs(&[(1, 0), (-1, 1), (0, -1), (1, 1)]).unwrap();
        assert!(orient_cyclic(&wound).is_some());
        let form = intersection_matrix(&wound).unwrap();
        assert!(signature_oracle(&form).unwrap() < 2);
        assert!(!is_positive_definite(&wound).unwrap());
    }

    #[test]
    fn weighted_projective_relation() {
        let (w, s) = weighted_projective_weights(&cp2()).unwrap();
        assert_eq!(w, [1, 1, 1]);
        let v = cp2();
        let sum = (0..3).fold((0i64, 0i64), |acc, i| {
            let x = v.vectors()[i].signed(s[i]);
            (acc.0 + w[i] as i64 * x.m, acc.1 + w[i] as i64 * x.n)
        });
        assert_eq!(sum, (0, 0));
    }

    #[test]
    fn report_for_cp2() {
        let t = topology_report(&cp2()).unwrap();
        assert_eq!(t.b2, 1);
        assert_eq!(t.signature, 1);
        assert!(t.positive_definite);
        assert_eq!(t.self_intersections, vec!["1", "1", "1"]);
        assert_eq!(t.euler_orb.unwrap(), vec!["2", "2", "2"]);
    }
}
