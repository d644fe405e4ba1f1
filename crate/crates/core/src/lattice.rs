//! Exact integer arithmetic on isotropy data.
//!
//! Isotropy data is the cyclic list `v_1 .. v_k` of lattice vectors labelling
//! the edges of the orbit polygon. Only `v_1 .. v_k` are stored; `v_0 = -v_k`
//! and, continuing antiperiodically, `v_{k+1} = -v_1`.
//!
//! Determinants are returned as `i128`: a product of two `i64` entries never
//! overflows it, so every `Δ` is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intmat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector {
    pub m: i64,
    pub n: i64,
}

impl LatticeVector {
    pub fn new(m: i64, n: i64) -> Result<Self> {
        if m == 0 && n == 0 {
            return Err(Error::InvalidInput("zero lattice vector".into()));
        }
        Ok(LatticeVector { m, n })
    }

    /// The caller guarantees `(m, n) != (0, 0)`.
    pub(crate) const fn raw(m: i64, n: i64) -> Self {
        LatticeVector { m, n }
    }

    pub fn neg(self) -> Self {
        LatticeVector { m: -self.m, n: -self.n }
    }

    pub fn signed(self, sign: i8) -> Self {
        if sign < 0 {
            self.neg()
        } else {
            self
        }
    }

    pub fn is_parallel(self, other: LatticeVector) -> bool {
        delta(self, other) == 0
    }
}

/// `Δ(v, w) = m_v n_w - m_w n_v`.
pub fn delta(v: LatticeVector, w: LatticeVector) -> i128 {
    v.m as i128 * w.n as i128 - w.m as i128 * v.n as i128
}

/// Order of the cyclic orbifold structure group along an edge labelled `v`.
pub fn structure_group_order(v: LatticeVector) -> Result<u64> {
    if v.m == 0 && v.n == 0 {
        return Err(Error::InvalidInput("zero lattice vector".into()));
    }
    Ok(v.m.unsigned_abs().gcd(&v.n.unsigned_abs()))
}

/// An element of `SL_2(Z)`, acting on column vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodularMap([[i64; 2]; 2]);

impl UnimodularMap {
    pub fn new(entries: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = entries;
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det != 1 {
            return Err(Error::InvalidMap(entries, det));
        }
        Ok(UnimodularMap(entries))
    }

    pub const IDENTITY: UnimodularMap = UnimodularMap([[1, 0], [0, 1]]);
    pub const ROTATION: UnimodularMap = UnimodularMap([[0, 1], [-1, 0]]);

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.0
    }

    pub fn shear_upper(t: i64) -> Self {
        UnimodularMap([[1, t], [0, 1]])
    }

    pub fn shear_lower(t: i64) -> Self {
        UnimodularMap([[1, 0], [t, 1]])
    }

    /// A map sending the primitive vector `p` to `(0, 1)`.
    pub fn adapting(p: LatticeVector) -> Result<Self> {
        let (g, s, t) = ext_gcd(p.m, p.n);
        if g != 1 {
            return Err(Error::InvalidInput(format!("({}, {}) is not primitive", p.m, p.n)));
        }
        UnimodularMap::new([[p.n, -p.m], [s, t]])
    }

    pub fn apply(&self, v: LatticeVector) -> Result<LatticeVector> {
        let [[a, b], [c, d]] = self.0;
        let mul = |x: i64, y: i64| x.checked_mul(y).ok_or(Error::Overflow("unimodular map"));
        let m = mul(a, v.m)?.checked_add(mul(b, v.n)?).ok_or(Error::Overflow("unimodular map"))?;
        let n = mul(c, v.m)?.checked_add(mul(d, v.n)?).ok_or(Error::Overflow("unimodular map"))?;
        Ok(LatticeVector { m, n })
    }

    pub fn compose(&self, other: &UnimodularMap) -> Result<UnimodularMap> {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = other.0;
        let dot = |x: i64, y: i64, z: i64, w: i64| -> Result<i64> {
            let v = x as i128 * y as i128 + z as i128 * w as i128;
            i64::try_from(v).map_err(|_| Error::Overflow("unimodular product"))
        };
        Ok(UnimodularMap([
            [dot(a, e, b, g)?, dot(a, f, b, h)?],
            [dot(c, e, d, g)?, dot(c, f, d, h)?],
        ]))
    }
}

/// Returns `(g, s, t)` with `s*a + t*b = g = gcd(a, b) >= 0`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IsotropyData {
    vectors: Vec<LatticeVector>,
}

impl IsotropyData {
    /// Accepts any `k >= 2` nonzero vectors; consecutive independence and
    /// spanning are reported by [`validate`], not enforced here.
    pub fn new(vectors: Vec<LatticeVector>) -> Result<Self> {
        if vectors.len() < 2 {
            return Err(Error::InvalidInput(format!("need k >= 2 vectors, got {}", vectors.len())));
        }
        if let Some(i) = vectors.iter().position(|v| v.m == 0 && v.n == 0) {
            return Err(Error::InvalidInput(format!("v_{} is the zero vector", i + 1)));
        }
        Ok(IsotropyData { vectors })
    }

    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Self> {
        let vectors = pairs.iter().map(|&(m, n)| LatticeVector::new(m, n)).collect::<Result<_>>()?;
        IsotropyData::new(vectors)
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    /// `v_1 .. v_k`.
    pub fn vectors(&self) -> &[LatticeVector] {
        &self.vectors
    }

    /// `v_j` for any integer `j`, extended by `v_{j+k} = -v_j`.
    pub fn v(&self, j: isize) -> LatticeVector {
        let k = self.k() as isize;
        let q = (j - 1).div_euclid(k);
        let r = (j - 1).rem_euclid(k) as usize;
        self.vectors[r].signed(if q % 2 == 0 { 1 } else { -1 })
    }

    /// `Δ_{i,j}` with the antiperiodic extension.
    pub fn delta(&self, i: isize, j: isize) -> i128 {
        delta(self.v(i), self.v(j))
    }

    pub fn with_signs(&self, signs: &[i8]) -> IsotropyData {
        IsotropyData {
            vectors: self.vectors.iter().zip(signs).map(|(v, &s)| v.signed(s)).collect(),
        }
    }

    /// Cyclic relabelling `v'_j = v_{j+shift}` (antiperiodic, so signs of
    /// wrapped vectors flip).
    pub fn rotated(&self, shift: usize) -> IsotropyData {
        IsotropyData {
            vectors: (1..=self.k() as isize).map(|j| self.v(j + shift as isize)).collect(),
        }
    }

    /// Reverses the cyclic order: `v'_j = v_{k+1-j}`.
    pub fn reflected(&self) -> IsotropyData {
        let mut vectors = self.vectors.clone();
        vectors.reverse();
        IsotropyData { vectors }
    }

    /// Framing `index` in `0 .. 2k`: rotation by `index % k`, reflected first
    /// when `index >= k`.
    pub fn framing(&self, index: usize) -> IsotropyData {
        let k = self.k();
        if index < k {
            self.rotated(index)
        } else {
            self.reflected().rotated(index - k)
        }
    }

    pub fn negated(&self) -> IsotropyData {
        IsotropyData { vectors: self.vectors.iter().map(|v| v.neg()).collect() }
    }

    pub fn max_abs_entry(&self) -> i64 {
        self.vectors.iter().map(|v| v.m.abs().max(v.n.abs())).max().unwrap_or(0)
    }

    pub fn m_values(&self) -> Vec<i64> {
        self.vectors.iter().map(|v| v.m).collect()
    }

    pub fn n_values(&self) -> Vec<i64> {
        self.vectors.iter().map(|v| v.n).collect()
    }
}

pub fn apply_unimodular(map: &UnimodularMap, data: &IsotropyData) -> Result<IsotropyData> {
    let vectors = data.vectors.iter().map(|&v| map.apply(v)).collect::<Result<_>>()?;
    IsotropyData::new(vectors)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub k: usize,
    /// Edges `j` (1-based) with `Δ_{j-1,j} = 0`.
    pub consecutive_failures: Vec<usize>,
    /// Nonzero elementary divisors of the `2 × k` matrix `[v_1 .. v_k]`.
    pub elementary_divisors: Vec<String>,
    pub spans: bool,
    pub orders: Vec<u64>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.consecutive_failures.is_empty() && self.spans
    }
}

pub fn validate(data: &IsotropyData) -> ValidityReport {
    let k = data.k();
    let consecutive_failures =
        (1..=k).filter(|&j| data.delta(j as isize - 1, j as isize) == 0).collect();
    let matrix = intmat::from_i64(&[data.m_values(), data.n_values()]);
    let divisors = intmat::elementary_divisors(&matrix);
    let spans = divisors.len() == 2 && divisors.iter().all(|d| *d == BigInt::one());
    ValidityReport {
        k,
        consecutive_failures,
        elementary_divisors: divisors.iter().map(ToString::to_string).collect(),
        spans,
        orders: data
            .vectors
            .iter()
            .map(|&v| structure_group_order(v).expect("vectors are nonzero"))
            .collect(),
    }
}

/// Finds signs `ε_j` with `Δ(ε_{j-1} v_{j-1}, ε_j v_j) > 0` for all `j`,
/// where `ε_0 v_0 = -ε_k v_k`.
///
/// Once `ε_1` is fixed every later sign is forced; the other choice of `ε_1`
/// negates every sign and leaves each `Δ` unchanged, so one propagation
/// decides existence.
pub fn orient_cyclic(data: &IsotropyData) -> Option<Vec<i8>> {
    let k = data.k();
    let v = data.vectors();
    let mut signs = vec![1i8; k];
    for j in 1..k {
        let d = delta(v[j - 1].signed(signs[j - 1]), v[j]);
        if d == 0 {
            return None;
        }
        signs[j] = if d > 0 { 1 } else { -1 };
    }
    let closing = delta(v[k - 1].signed(signs[k - 1]).neg(), v[0].signed(signs[0]));
    (closing > 0).then_some(signs)
}

/// Signs normalized by `Δ_{0,j} >= 0` (with `ε_k = +1`), the convention of
/// the admissibility criterion. `None` when an interior `v_j` is parallel to `v_0`, in
/// which case no sign choice can place it strictly between `v_0` and `v_k`.
pub fn half_plane_signs(data: &IsotropyData) -> Option<Vec<i8>> {
    let k = data.k();
    let v0 = data.v(0);
    let mut signs = vec![1i8; k];
    for j in 1..k {
        let d = delta(v0, data.vectors()[j - 1]);
        if d == 0 {
            return None;
        }
        signs[j - 1] = if d > 0 { 1 } else { -1 };
    }
    Some(signs)
}

/// True when every `Δ_{j-1,j}`, `j = 1..k`, is strictly positive.
pub fn is_cyclically_ordered(data: &IsotropyData) -> bool {
    (1..=data.k() as isize).all(|j| data.delta(j - 1, j) > 0)
}
