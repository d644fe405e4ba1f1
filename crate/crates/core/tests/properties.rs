use proptest::prelude::*;

use toric_sde::admissibility::{
    criteria_check, decide_admissible, from_multipole, isn_bis_holds, isn_formula_holds, subtorus_kernel,
    to_multipole, MultipoleData,
};
use toric_sde::eigenfunction::{det_phi_pairs, eval_jet, eval_jet_terms};
use toric_sde::hyperbolic::{act, chart, unchart, HalfSpacePoint, IsometryMap};
use toric_sde::lattice::{apply_unimodular, delta, orient_cyclic, validate, IsotropyData, LatticeVector, UnimodularMap};
use toric_sde::topology::{intersection_matrix, signature_formula, signature_oracle};

fn weights(max_k: usize) -> impl Strategy<Value = MultipoleData> {
    prop::collection::vec((1i64..=6, -8i64..=8), 2..=max_k).prop_filter_map("repeated slope", |mut w| {
        w.sort_by(|x, y| (x.1 * y.0).cmp(&(y.1 * x.0)));
        MultipoleData::from_twice(&w).ok()
    })
}

fn unimodular() -> impl Strategy<Value = UnimodularMap> {
    (-3i64..=3, -3i64..=3, -3i64..=3, any::<bool>()).prop_map(|(a, b, c, rot)| {
        let mut m = UnimodularMap::shear_upper(a)
            .compose(&UnimodularMap::shear_lower(b))
            .and_then(|m| m.compose(&UnimodularMap::shear_upper(c)))
            .unwrap();
        if rot {
            m = m.compose(&UnimodularMap::ROTATION).unwrap();
        }
        m
    })
}

fn raw_data(max_k: usize) -> impl Strategy<Value = IsotropyData> {
    prop::collection::vec((-3i64..=3, -3i64..=3), 2..=max_k)
        .prop_filter_map("zero vector", |v| IsotropyData::from_pairs(&v).ok())
}

fn admissible() -> impl Strategy<Value = IsotropyData> {
    weights(6).prop_filter_map("half-integral", |w| match from_multipole(&w) {
        Ok((d, 1)) => Some(d),
        _ => None,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn delta_is_antisymmetric_and_sl2_invariant(
        a in (-50i64..50, -50i64..50), b in (-50i64..50, -50i64..50), u in unimodular()
    ) {
        prop_assume!(a != (0, 0) && b != (0, 0));
        let (v, w) = (LatticeVector::new(a.0, a.1).unwrap(), LatticeVector::new(b.0, b.1).unwrap());
        prop_assert_eq!(delta(v, w), -delta(w, v));
        prop_assert_eq!(delta(u.apply(v).unwrap(), u.apply(w).unwrap()), delta(v, w));
    }

    #[test]
    fn signature_formula_matches_inertia(d in raw_data(6), probe in (-7i64..7, -7i64..7)) {
        prop_assume!(validate(&d).consecutive_failures.is_empty());
        let Ok(v) = LatticeVector::new(probe.0, probe.1) else { return Ok(()) };
        prop_assume!(d.vectors().iter().all(|w| delta(*w, v) != 0));
        let form = intersection_matrix(&d).unwrap();
        prop_assert_eq!(signature_formula(&d, v).unwrap(), signature_oracle(&form).unwrap());
    }

    #[test]
    fn admissibility_is_invariant(
        d in raw_data(5), u in unimodular(), signs in prop::collection::vec(any::<bool>(), 5), shift in 0usize..5
    ) {
        prop_assume!(validate(&d).consecutive_failures.is_empty());
        let verdict = decide_admissible(&d).admissible;
        let signs: Vec<i8> = signs.iter().take(d.k()).map(|&s| if s { 1 } else { -1 }).collect();
        prop_assert_eq!(decide_admissible(&apply_unimodular(&u, &d).unwrap()).admissible, verdict);
        prop_assert_eq!(decide_admissible(&d.with_signs(&signs)).admissible, verdict);
        prop_assert_eq!(decide_admissible(&d.rotated(shift % d.k())).admissible, verdict);
        prop_assert_eq!(decide_admissible(&d.reflected()).admissible, verdict);
    }

    #[test]
    fn criteria_agree_on_random_data(d in raw_data(5)) {
        prop_assume!(validate(&d).is_valid());
        let c = criteria_check(&d).unwrap();
        prop_assert!(c.agree(), "{:?}: {:?}", d, c);
    }

    #[test]
    fn isn_forms_agree_on_oriented_data(d in raw_data(6)) {
        let Some(signs) = orient_cyclic(&d) else { return Ok(()) };
        let o = d.with_signs(&signs);
        for j in 1..o.k() {
            prop_assert_eq!(isn_formula_holds(&o, j), isn_bis_holds(&o, j));
        }
    }

    #[test]
    fn weights_give_admissible_data(w in weights(6)) {
        let (d, scale) = from_multipole(&w).unwrap();
        let v = decide_admissible(&d);
        prop_assert!(v.admissible);
        prop_assert!(v.weights.is_some());
        if scale == 1 {
            let k = subtorus_kernel(&w).unwrap();
            prop_assert_eq!(k.dimension(), w.k() - 2);
        }
    }

    #[test]
    fn to_multipole_normalizes(d in admissible()) {
        let c = to_multipole(&d).unwrap();
        let m: Vec<i64> = (0..=c.normalized.k() as isize).map(|j| c.normalized.v(j).m).collect();
        prop_assert!(m.windows(2).all(|p| p[0] < p[1]), "{:?}", m);
        let (back, scale) = from_multipole(&c.weights).unwrap();
        prop_assert_eq!(scale, 1);
        prop_assert_eq!(&back, &c.normalized);
        prop_assert_eq!(c.framing.apply(&d).unwrap(), c.normalized);
    }

    #[test]
    fn chart_round_trip(r in 1e-3f64..1e3, e in -1e3f64..1e3) {
        let p = HalfSpacePoint::new(r, e).unwrap();
        let q = unchart(&chart(p)).unwrap();
        prop_assert!((q.rho() - r).abs() <= 1e-12 * r.max(1.0));
        prop_assert!((q.eta() - e).abs() <= 1e-12 * e.abs().max(1.0) * (1.0 + e.abs() / r));
    }

    #[test]
    fn action_is_a_group_action(
        r in 0.1f64..10.0, e in -5f64..5.0, u in unimodular(), v in unimodular()
    ) {
        prop_assume!(u.entries().iter().flatten().chain(v.entries().iter().flatten()).all(|x| x.abs() <= 12));
        let to_map = |m: &UnimodularMap| {
            IsometryMap::from_entries(m.entries().map(|row| row.map(|x| x as f64))).unwrap()
        };
        let (b1, b2) = (to_map(&u), to_map(&v));
        let a = chart(HalfSpacePoint::new(r, e).unwrap());
        let mid = act(&b2, &a);
        let lhs = act(&b1, &mid);
        let rhs = act(&b1.compose(&b2), &a);
        let scale = lhs.matrix().norm().max(mid.matrix().norm());
        prop_assert!((lhs.matrix() - rhs.matrix()).norm() <= 1e-11 * scale);
        // det of a det-1 matrix with entries of size `scale` cancels to ~ε·scale²
        prop_assert!((lhs.matrix().determinant() - 1.0).abs() <= 1e-14 * scale * scale + 1e-14);
        prop_assert!(lhs.matrix()[(0, 0)] > 0.0);
    }

    #[test]
    fn eigen_equation_and_det_identity(w in weights(6), r in 0.01f64..5.0, e in -4f64..4.0) {
        let p = HalfSpacePoint::new(r, e).unwrap();
        let j = eval_jet(&w, p);
        prop_assert!(j.eigen_residual(r).abs() <= 1e-10 * j.f_big);
        let (a, b) = (j.det_phi(r), j.det_phi_f_form(r));
        prop_assert!((a - b).abs() <= 1e-10 * (j.f * j.f_rho).abs().max(a.abs()));
        let c = det_phi_pairs(&w.as_f64(), p);
        prop_assert!((a - c).abs() <= 1e-10 * (j.f * j.f_rho).abs().max(c));
    }

    #[test]
    fn det_phi_positive_for_admissible_weights(w in weights(6), r in 0.01f64..5.0, e in -4f64..4.0) {
        let j = eval_jet_terms(&w.as_f64(), HalfSpacePoint::new(r, e).unwrap());
        prop_assert!(j.det_phi(r) > 0.0);
    }
}
