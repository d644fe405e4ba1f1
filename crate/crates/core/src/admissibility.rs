//! Admissibility of isotropy data and the isotropy/multipole correspondence.
//!
//! Isotropy data admits a toric SDE metric exactly when, for some framing
//! (cyclic rotation, optional reflection, signs normalized by
//! `Δ_{0,j} >= 0`), every `Δ_{j-1,j}` is positive and
//! `Δ_{j-1,j+1} < Δ_{j-1,j} + Δ_{j,j+1}` for `0 < j < k`.
//!
//! Multipole weights `(a_i, b_i)` are rationals with denominator 1 or 2 and
//! are stored doubled as [`HalfInt`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::intmat;
use crate::lattice::{
    apply_unimodular, half_plane_signs, is_cyclically_ordered, validate, IsotropyData, LatticeVector,
    UnimodularMap,
};
use crate::topology::{self, euler_char_orb, self_intersection};

/// A rational with denominator 1 or 2, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidWeights(format!("cannot parse {s:?} as a rational p/q"));
        let (num, den) = match s.trim().split_once('/') {
            Some((p, q)) => (p.trim().parse::<i64>().map_err(|_| bad())?, q.trim().parse::<i64>().map_err(|_| bad())?),
            None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
        };
        if den == 0 {
            return Err(bad());
        }
        let twice = num.checked_mul(2).ok_or(Error::Overflow("weight parse"))?;
        if twice % den != 0 {
            return Err(Error::InvalidWeights(format!("{s} does not have denominator 1 or 2")));
        }
        Ok(HalfInt(twice / den))
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MultipoleData {
    weights: Vec<(HalfInt, HalfInt)>,
}

impl MultipoleData {
    /// Enforces `a_i > 0`, strictly increasing `y_i = b_i / a_i` (which also
    /// makes every pair of weights independent) and `k >= 1`.
    pub fn new(weights: Vec<(HalfInt, HalfInt)>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        if let Some(i) = weights.iter().position(|(a, _)| a.0 <= 0) {
            return Err(Error::InvalidWeights(format!("a_{} = {} is not positive", i + 1, weights[i].0)));
        }
        for i in 1..weights.len() {
            let (a0, b0) = weights[i - 1];
            let (a1, b1) = weights[i];
            // y_{i-1} < y_i  <=>  b0 a1 < b1 a0, with a0, a1 > 0
            if (b0.0 as i128) * (a1.0 as i128) >= (b1.0 as i128) * (a0.0 as i128) {
                return Err(Error::InvalidWeights(format!("y_{} >= y_{}: slopes must strictly increase", i, i + 1)));
            }
        }
        Ok(MultipoleData { weights })
    }

    pub fn from_twice(pairs: &[(i64, i64)]) -> Result<Self> {
        MultipoleData::new(pairs.iter().map(|&(a, b)| (HalfInt(a), HalfInt(b))).collect())
    }

    pub fn weights(&self) -> &[(HalfInt, HalfInt)] {
        &self.weights
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn as_f64(&self) -> Vec<(f64, f64)> {
        self.weights.iter().map(|(a, b)| (a.to_f64(), b.to_f64())).collect()
    }

    pub fn kinks(&self) -> Vec<f64> {
        self.weights.iter().map(|(a, b)| b.0 as f64 / a.0 as f64).collect()
    }

    pub fn scaled(&self, c: i64) -> Result<Self> {
        if c <= 0 {
            return Err(Error::InvalidWeights("scale must be positive".into()));
        }
        let mul = |x: HalfInt| x.0.checked_mul(c).map(HalfInt).ok_or(Error::Overflow("weight scaling"));
        MultipoleData::new(self.weights.iter().map(|&(a, b)| Ok((mul(a)?, mul(b)?))).collect::<Result<_>>()?)
    }
}

impl<'de> Deserialize<'de> for MultipoleData {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            weights: Vec<(HalfInt, HalfInt)>,
        }
        let raw = Raw::deserialize(d)?;
        MultipoleData::new(raw.weights).map_err(serde::de::Error::custom)
    }
}

/// How a given isotropy list was relabelled: framing index in `0 .. 2k`
/// (see [`IsotropyData::framing`]), then per-vector signs, then optionally a
/// unimodular change of basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Framing {
    pub index: usize,
    pub rotation: usize,
    pub reflected: bool,
    pub signs: Vec<i8>,
    pub basis_change: Option<[[i64; 2]; 2]>,
}

impl Framing {
    fn new(k: usize, index: usize, signs: Vec<i8>, basis_change: Option<UnimodularMap>) -> Self {
        Framing {
            index,
            rotation: index % k,
            reflected: index >= k,
            signs,
            basis_change: basis_change.map(|b| b.entries()),
        }
    }

    pub fn apply(&self, data: &IsotropyData) -> Result<IsotropyData> {
        let framed = data.framing(self.index).with_signs(&self.signs);
        match self.basis_change {
            Some(b) => apply_unimodular(&UnimodularMap::new(b)?, &framed),
            None => Ok(framed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum Violation {
    ConsecutiveDependence { edge: usize },
    CyclicOrder,
    Definiteness,
    IsnFormula { edge: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    pub framing: Option<Framing>,
    pub failures: Vec<Violation>,
    pub weights: Option<MultipoleData>,
    /// Verdict when the strict inequality is imposed only on the interior
    /// edges `0 < j < k` of some framing, leaving the closing edge `j = k`
    /// unchecked. Differs from `admissible` exactly when the closing edge
    /// is the only violation.
    pub interior_edges_only: bool,
}

/// The lattice criterion on one already-framed list: signs from
/// `Δ_{0,j} >= 0`, then cyclic order, then
/// `Δ_{j-1,j+1} < Δ_{j-1,j} + Δ_{j,j+1}` for `0 < j < k` and, when
/// `closing` is set, also for `j = k` (with `v_{k+1} = -v_1`). Returns the
/// signs or the violations.
fn check_lattice_criterion(framed: &IsotropyData, closing: bool) -> std::result::Result<Vec<i8>, Vec<Violation>> {
    let k = framed.k();
    let Some(signs) = half_plane_signs(framed) else {
        return Err(vec![Violation::CyclicOrder]);
    };
    let oriented = framed.with_signs(&signs);
    if !is_cyclically_ordered(&oriented) {
        return Err(vec![Violation::CyclicOrder]);
    }
    let last = if closing { k } else { k - 1 };
    let failures: Vec<_> = (1..=last)
        .filter(|&j| !isn_formula_holds(&oriented, j))
        .map(|edge| Violation::IsnFormula { edge })
        .collect();
    if failures.is_empty() {
        Ok(signs)
    } else {
        Err(failures)
    }
}

/// Exhaustive search over the `2k` framings; the lowest passing index wins.
///
/// The strict inequality is required on every edge, the closing one
/// included: each edge carries an exceptional surface subject to the
/// self-intersection bound, and with the closing edge unchecked the verdict
/// would depend on which edge the framing puts last.
pub fn decide_admissible(data: &IsotropyData) -> AdmissibilityVerdict {
    let k = data.k();
    let dependent: Vec<_> = validate(data)
        .consecutive_failures
        .into_iter()
        .map(|edge| Violation::ConsecutiveDependence { edge })
        .collect();
    if !dependent.is_empty() {
        return AdmissibilityVerdict {
            admissible: false,
            framing: None,
            failures: dependent,
            weights: None,
            interior_edges_only: false,
        };
    }
    let interior_edges_only = (0..2 * k).any(|i| check_lattice_criterion(&data.framing(i), false).is_ok());
    for index in 0..2 * k {
        if let Ok(signs) = check_lattice_criterion(&data.framing(index), true) {
            let weights = to_multipole(data).ok().map(|c| c.weights);
            return AdmissibilityVerdict {
                admissible: true,
                framing: Some(Framing::new(k, index, signs, None)),
                failures: Vec::new(),
                weights,
                interior_edges_only,
            };
        }
    }
    // explain the failure in whichever orientation is cyclically ordered
    let mut failures = Vec::new();
    for index in [0, k] {
        match check_lattice_criterion(&data.framing(index), true) {
            Err(v) if v != [Violation::CyclicOrder] => {
                failures = v;
                break;
            }
            _ => {}
        }
    }
    if failures.is_empty() {
        failures.push(Violation::Definiteness);
    }
    AdmissibilityVerdict { admissible: false, framing: None, failures, weights: None, interior_edges_only }
}

/// The intersection-form criterion: for one of the two orientations, the Gram matrix is positive definite on
/// `H_2` and every self-intersection is below the orbifold Euler
/// characteristic.
pub fn intersection_criterion(data: &IsotropyData) -> Result<bool> {
    let k = data.k() as i64;
    // reversing the order negates the Gram matrix up to permutation
    let signature = topology::gram_signature(data)?;
    let oriented = if signature == k - 2 {
        data.clone()
    } else if signature == 2 - k {
        data.reflected()
    } else {
        return Ok(false);
    };
    let signs = crate::lattice::orient_cyclic(&oriented)
        .ok_or_else(|| Error::Inconsistent("positive definite intersection form without cyclic order".into()))?;
    let positive = oriented.with_signs(&signs);
    for j in 1..=data.k() {
        if self_intersection(&positive, j) >= euler_char_orb(&positive, j)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriteriaCheck {
    /// The framing search of [`decide_admissible`].
    pub lattice_condition: bool,
    /// Definiteness plus `e < χ_orb` from the topology formulas.
    pub intersection_condition: bool,
    /// The multipole construction succeeds and round-trips.
    pub multipole_construction: bool,
}

impl CriteriaCheck {
    pub fn agree(&self) -> bool {
        self.lattice_condition == self.intersection_condition
            && self.intersection_condition == self.multipole_construction
    }
}

pub fn criteria_check(data: &IsotropyData) -> Result<CriteriaCheck> {
    let lattice_condition = decide_admissible(data).admissible;
    let intersection_condition = intersection_criterion(data)?;
    let multipole_construction = match to_multipole(data) {
        Ok(conv) => {
            let (back, scale) = from_multipole(&conv.weights)?;
            scale == 1 && back == conv.normalized
        }
        Err(Error::NormalizationNotFound(_)) => false,
        Err(e) => return Err(e),
    };
    Ok(CriteriaCheck { lattice_condition, intersection_condition, multipole_construction })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultipoleConversion {
    pub weights: MultipoleData,
    /// The relabelled isotropy data with increasing `m` and convex chords.
    pub normalized: IsotropyData,
    pub framing: Framing,
    /// Set when no framing in the given basis worked and a shear was needed.
    pub shear_fallback: bool,
}

/// Signs making `m_0 < m_1 < .. < m_k` (with `m_0 = -m_k`) and the
/// difference slopes strictly increasing, by pruned backtracking.
fn signs_for_convex_chain(v: &[LatticeVector], chain: &mut Vec<LatticeVector>, signs: &mut Vec<i8>) -> bool {
    let k = v.len();
    let last = v[k - 1];
    if last.m == 0 {
        return false;
    }
    let top = if last.m > 0 { last } else { last.neg() };
    let start = top.neg();

    // slope of the chord p -> q compared as fractions with positive denominators
    fn slope_lt(p0: LatticeVector, p1: LatticeVector, q0: LatticeVector, q1: LatticeVector) -> bool {
        let (dn0, dm0) = ((p1.n - p0.n) as i128, (p1.m - p0.m) as i128);
        let (dn1, dm1) = ((q1.n - q0.n) as i128, (q1.m - q0.m) as i128);
        dn0 * dm1 < dn1 * dm0
    }

    fn extend(
        v: &[LatticeVector],
        top: LatticeVector,
        chain: &mut Vec<LatticeVector>,
        signs: &mut Vec<i8>,
    ) -> bool {
        let j = chain.len() - 1; // index of the next vector to place, 0-based into v
        if j == v.len() - 1 {
            let prev = chain[chain.len() - 1];
            if top.m <= prev.m {
                return false;
            }
            if chain.len() >= 2 && !slope_lt(chain[chain.len() - 2], prev, prev, top) {
                return false;
            }
            return true;
        }
        for s in [1i8, -1] {
            let cand = v[j].signed(s);
            let prev = chain[chain.len() - 1];
            if cand.m <= prev.m || cand.m >= top.m {
                continue;
            }
            if chain.len() >= 2 && !slope_lt(chain[chain.len() - 2], prev, prev, cand) {
                continue;
            }
            chain.push(cand);
            signs.push(s);
            if extend(v, top, chain, signs) {
                return true;
            }
            chain.pop();
            signs.pop();
        }
        false
    }

    chain.clear();
    chain.push(start);
    signs.clear();
    if !extend(v, top, chain, signs) {
        return false;
    }
    signs.push(if last.m > 0 { 1 } else { -1 });
    true
}

/// Buffers reused across the framings and shears of one search.
#[derive(Default)]
struct Scratch {
    base: Vec<LatticeVector>,
    framed: Vec<LatticeVector>,
    chain: Vec<LatticeVector>,
    signs: Vec<i8>,
}

fn try_framings(data: &IsotropyData, shear: Option<UnimodularMap>, sc: &mut Scratch) -> Result<Option<MultipoleConversion>> {
    let k = data.k();
    sc.base.clear();
    for &v in data.vectors() {
        sc.base.push(match shear {
            Some(b) => b.apply(v)?,
            None => v,
        });
    }
    for index in 0..2 * k {
        // framing `index`: rotation by `index % k`, reflected first when `index >= k`
        let shift = index % k;
        sc.framed.clear();
        for j in 0..k {
            let (pos, wraps) = if index < k {
                let i = j + shift;
                (i % k, i >= k)
            } else {
                let i = j + shift;
                (k - 1 - i % k, i >= k)
            };
            let v = sc.base[pos];
            sc.framed.push(if wraps { v.neg() } else { v });
        }
        if !signs_for_convex_chain(&sc.framed, &mut sc.chain, &mut sc.signs) {
            continue;
        }
        let framed = match shear {
            Some(b) => apply_unimodular(&b, &data.framing(index))?,
            None => data.framing(index),
        };
        debug_assert_eq!(framed.vectors(), &sc.framed[..]);
        let normalized = framed.with_signs(&sc.signs);
        let weights = weights_from_isotropy(&normalized)?;
        // framing indices are defined on the unsheared data; a shear commutes
        // with relabelling, so record it as a trailing basis change
        return Ok(Some(MultipoleConversion {
            weights,
            normalized,
            framing: Framing::new(k, index, sc.signs.clone(), shear),
            shear_fallback: shear.is_some(),
        }));
    }
    Ok(None)
}

/// `(a_i, b_i) = (v_i - v_{i-1}) / 2`.
fn weights_from_isotropy(d: &IsotropyData) -> Result<MultipoleData> {
    let k = d.k() as isize;
    let weights = (1..=k)
        .map(|i| {
            let (p, q) = (d.v(i), d.v(i - 1));
            let dm = p.m.checked_sub(q.m).ok_or(Error::Overflow("weights"))?;
            let dn = p.n.checked_sub(q.n).ok_or(Error::Overflow("weights"))?;
            Ok((HalfInt(dm), HalfInt(dn)))
        })
        .collect::<Result<Vec<_>>>()?;
    MultipoleData::new(weights)
}

/// Finds a framing with `m_0 < .. < m_k` and strictly increasing chord
/// slopes and reads off the weights. When the given basis admits none, shears `[[1,t],[0,1]]` and
/// `[[1,0],[t,1]]` with `|t| <= k·max|entry|` are tried in order of `|t|`.
pub fn to_multipole(data: &IsotropyData) -> Result<MultipoleConversion> {
    let mut sc = Scratch::default();
    if let Some(c) = try_framings(data, None, &mut sc)? {
        return Ok(c);
    }
    let bound = (data.k() as i64).saturating_mul(data.max_abs_entry().max(1));
    for t in 1..=bound {
        for s in [t, -t] {
            for shear in [UnimodularMap::shear_upper(s), UnimodularMap::shear_lower(s)] {
                if let Some(c) = try_framings(data, Some(shear), &mut sc)? {
                    return Ok(c);
                }
            }
        }
    }
    let shown: Vec<_> = data.vectors().iter().map(|v| (v.m, v.n)).collect();
    Err(Error::NormalizationNotFound(format!("{shown:?}")))
}

/// `v_j = Σ_{i<=j} (a_i, b_i) - Σ_{i>j} (a_i, b_i)`, doubled when the
/// half-integral weights would give non-integral vectors. Returns the data
/// and the scale (1 or 2) that was applied.
pub fn from_multipole(weights: &MultipoleData) -> Result<(IsotropyData, i64)> {
    let w = weights.weights();
    let total = w.iter().fold((0i128, 0i128), |acc, (a, b)| (acc.0 + a.0 as i128, acc.1 + b.0 as i128));
    // twice v_j = 2 Σ_{i<=j} w_i - Σ w_i, with w in doubled units
    let mut prefix = (0i128, 0i128);
    let mut twice_v = Vec::with_capacity(w.len());
    for (a, b) in w {
        prefix.0 += 2 * a.0 as i128;
        prefix.1 += 2 * b.0 as i128;
        twice_v.push((prefix.0 - total.0, prefix.1 - total.1));
    }
    // twice_v holds 2 v_j
    let integral = twice_v.iter().all(|&(m, n)| m % 2 == 0 && n % 2 == 0);
    let (div, scale) = if integral { (2, 1) } else { (1, 2) };
    let vectors = twice_v
        .into_iter()
        .map(|(m, n)| {
            let conv = |x: i128| i64::try_from(x / div).map_err(|_| Error::Overflow("from_multipole"));
            LatticeVector::new(conv(m)?, conv(n)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((IsotropyData::new(vectors)?, scale))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelLattice {
    /// `(k-2) × k`, Hermite normal form.
    pub basis: Vec<Vec<String>>,
    #[serde(skip)]
    rows: Vec<Vec<BigInt>>,
}

impl KernelLattice {
    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }
}

/// Saturated integer kernel of `Z^k -> Z^2`, `e_i ↦ 2(a_i, b_i)`.
pub fn subtorus_kernel(weights: &MultipoleData) -> Result<KernelLattice> {
    let w = weights.weights();
    let k = w.len();
    let a: Vec<i64> = w.iter().map(|p| p.0 .0).collect();
    let b: Vec<i64> = w.iter().map(|p| p.1 .0).collect();
    let map = intmat::from_i64(&[a, b]);
    let rows = intmat::kernel_basis(&map);
    let expected = k.saturating_sub(2);
    if rows.len() != expected {
        return Err(Error::Inconsistent(format!("kernel has rank {}, expected {expected}", rows.len())));
    }
    let product = intmat::mat_mul(&map, &intmat::transpose(&rows));
    if product.iter().flatten().any(|x| !x.is_zero()) {
        return Err(Error::Inconsistent("kernel basis does not annihilate the weights".into()));
    }
    if !rows.is_empty() {
        let divisors = intmat::elementary_divisors(&rows);
        if divisors.len() != expected || divisors.iter().any(|d| !d.is_one()) {
            return Err(Error::Inconsistent("kernel basis is not saturated".into()));
        }
    }
    Ok(KernelLattice { basis: rows.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect(), rows })
}

/// Compares `(n_{j+1}-n_j)(m_j-m_{j-1})` with `(m_{j+1}-m_j)(n_j-n_{j-1})`.
pub fn isn_bis_holds(data: &IsotropyData, j: usize) -> bool {
    let j = j as isize;
    let (p, q, r) = (data.v(j - 1), data.v(j), data.v(j + 1));
    let lhs = (r.n as i128 - q.n as i128) * (q.m as i128 - p.m as i128);
    let rhs = (r.m as i128 - q.m as i128) * (q.n as i128 - p.n as i128);
    lhs.cmp(&rhs) == Ordering::Greater
}

pub fn isn_formula_holds(data: &IsotropyData, j: usize) -> bool {
    let j = j as isize;
    data.delta(j - 1, j + 1) < data.delta(j - 1, j) + data.delta(j, j + 1)
}

/// Slope `m_j` of `f_0` on the `j`-th boundary interval, from the weights.
pub fn edge_slopes(weights: &MultipoleData) -> Result<Vec<i64>> {
    let (d, scale) = from_multipole(weights)?;
    if scale != 1 {
        return Err(Error::InvalidWeights("weights give half-integral isotropy vectors".into()));
    }
    Ok((0..=d.k() as isize).map(|j| d.v(j).m).collect())
}
