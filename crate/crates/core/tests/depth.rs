mod common;

use proptest::prelude::*;
use secluded::depth::{depth_decomposition, harmonic_family, multiplicity_identity_check, pigeonhole_witness};
use secluded::{AxisBox, BoxFamily, Interval, Point, Scalar};

fn side() -> impl Strategy<Value = Interval> {
    (0i64..=12, 1i64..=12, any::<(bool, bool)>()).prop_map(|(a, len, (lc, hc))| {
        let lo = a.min(11);
        let hi = (lo + len).min(12);
        Interval::new(Scalar::ratio(lo, 12), Scalar::ratio(hi, 12), lc, hc)
    })
}

fn family() -> impl Strategy<Value = BoxFamily> {
    (1usize..=3).prop_flat_map(|d| {
        proptest::collection::vec(proptest::collection::vec(side(), d), 0..=25).prop_map(move |boxes| {
            let container = AxisBox::from_intervals(vec![Interval::closed(Scalar::zero(), Scalar::one()); d]).unwrap();
            let members = boxes.into_iter().map(|s| AxisBox::from_intervals(s).unwrap()).collect();
            BoxFamily::new(container, members).unwrap()
        })
    })
}

fn depth_at(fam: &BoxFamily, p: &Point) -> usize {
    fam.members
        .iter()
        .filter(|m| m.sides().iter().zip(p.coords()).all(|(s, x)| s.contains(x)))
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn integral_of_depth_is_total_volume(fam in family()) {
        let check = multiplicity_identity_check(&fam).unwrap();
        prop_assert!(check.equal);
        prop_assert_eq!(&check.depth_integral, &fam.sum_of_volumes());
        let cells = depth_decomposition(&fam).unwrap();
        let total: Scalar = cells.iter().map(|c| c.cell.volume() * Scalar::from(c.depth as i64)).sum();
        prop_assert_eq!(total, check.sum_of_volumes);
    }

    #[test]
    fn cells_tile_the_container_with_constant_depth(fam in family()) {
        let cells = depth_decomposition(&fam).unwrap();
        let vol: Scalar = cells.iter().map(|c| c.cell.volume()).sum();
        prop_assert_eq!(vol, fam.container.volume());
        let half = Scalar::ratio(1, 2);
        for c in &cells {
            let mid = Point::new(c.cell.sides().iter().map(|s| (&s.lo + &s.hi) * &half).collect()).unwrap();
            prop_assert_eq!(depth_at(&fam, &mid), c.depth);
        }
    }

    #[test]
    fn witness_attains_the_maximum(fam in family(), probes in proptest::collection::vec(proptest::collection::vec(0i64..=24, 3), 20)) {
        let w = pigeonhole_witness(&fam).unwrap();
        prop_assert_eq!(depth_at(&fam, &w.point), w.depth);
        let ratio = fam.sum_of_volumes() / fam.container.volume();
        prop_assert!(num_bigint::BigInt::from(w.depth) >= ratio.ceil());
        for p in probes {
            let p = Point::new(p[..fam.dim()].iter().map(|&n| Scalar::ratio(n, 24)).collect()).unwrap();
            prop_assert!(depth_at(&fam, &p) <= w.depth);
        }
    }
}

#[test]
fn harmonic_family_peaks_near_zero() {
    for n in 1..=12 {
        let fam = harmonic_family(n);
        let w = pigeonhole_witness(&fam).unwrap();
        assert_eq!(w.depth, n);
        assert!(w.point[0] < Scalar::ratio(1, n as i64));
    }
}

#[test]
fn members_outside_the_container_are_rejected() {
    let unit = AxisBox::from_intervals(vec![Interval::half_open(Scalar::zero(), Scalar::one())]).unwrap();
    let wide = AxisBox::from_intervals(vec![Interval::closed(Scalar::zero(), Scalar::one())]).unwrap();
    assert!(BoxFamily::new(unit, vec![wide]).is_err());
    assert!(BoxFamily::from_json(r#"{"container":{"low":["0"],"high":["0"],"closure":[[true,true]]}}"#).is_err());
}
