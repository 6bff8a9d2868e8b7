use msp_core::constraints::{eval_atom, eval_expr, violation_atom, violation_expr, Atom, ConstraintExpr, Measures};
use msp_core::domain::{AttendanceTensor, HeadcountVector, ProblemInstance, StaffLayout};
use msp_core::moea::{dominates, non_dominated_sort, ParetoArchive};
use msp_core::objectives::{Objective, ObjectiveKind};
use msp_core::reference::shopping_mall;
use msp_core::tablegen::{generate_rotation, RotationSpec};
use proptest::prelude::*;

fn headcount(inst: &ProblemInstance) -> impl Strategy<Value = HeadcountVector> {
    let ranges: Vec<_> = inst.lower_bounds().into_iter().zip(inst.upper_bounds()).map(|(lo, hi)| lo..=hi).collect();
    ranges.prop_map(HeadcountVector)
}

/// A headcount within bounds and a random day-level attendance pattern for it.
fn staffed_tensor() -> impl Strategy<Value = (HeadcountVector, AttendanceTensor)> {
    let inst = shopping_mall();
    let days = inst.horizon_days;
    (headcount(&inst), any::<u64>(), 0.3f64..1.0).prop_map(move |(hc, seed, p)| {
        let layout = StaffLayout::new(&hc);
        let mut state = seed | 1;
        let t = AttendanceTensor::from_days(&layout, days, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1000) as f64 / 1000.0 < p
        });
        (hc, t)
    })
}

fn atom_expr() -> impl Strategy<Value = ConstraintExpr> {
    let leaf = prop::sample::select(vec![Atom::K2, Atom::K3, Atom::K4, Atom::K5, Atom::K6, Atom::Y2]).prop_map(ConstraintExpr::Atom);
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(|c| ConstraintExpr::and(c).unwrap()),
            prop::collection::vec(inner.clone(), 2..4).prop_map(|c| ConstraintExpr::or(c).unwrap()),
            inner.prop_map(ConstraintExpr::not),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn atom_holds_iff_violation_is_zero((hc, t) in staffed_tensor()) {
        let inst = shopping_mall();
        let m = Measures::from_tensor(&t, &hc, &inst).unwrap();
        for atom in Atom::ALL {
            let holds = eval_atom(atom, &m, &inst).unwrap();
            let v = violation_atom(atom, &m, &inst).unwrap();
            prop_assert!(v >= 0.0);
            prop_assert_eq!(holds, v == 0.0, "{} violation {}", atom, v);
        }
    }

    #[test]
    fn expression_holds_iff_violation_is_zero((hc, t) in staffed_tensor(), e in atom_expr()) {
        let inst = shopping_mall();
        let m = Measures::from_tensor(&t, &hc, &inst).unwrap();
        let holds = eval_expr(&e, &m, &inst).unwrap();
        let v = violation_expr(&e, &m, &inst).unwrap();
        prop_assert_eq!(holds, v == 0.0, "{} violation {}", e, v);
    }

    #[test]
    fn objectives_are_nonnegative((hc, t) in staffed_tensor()) {
        let inst = shopping_mall();
        let m = Measures::from_tensor(&t, &hc, &inst).unwrap();
        for kind in [ObjectiveKind::TotalTime, ObjectiveKind::Salary, ObjectiveKind::MultiShiftSalary, ObjectiveKind::Headcount(vec![0, 2])] {
            prop_assert!(Objective::minimize(kind).value(&m) >= 0.0);
        }
    }

    #[test]
    fn maximizing_picks_the_same_point_as_minimizing_the_negation(hcs in prop::collection::vec(headcount(&shopping_mall()), 2..12)) {
        let inst = shopping_mall();
        let ms: Vec<_> = hcs.iter().map(|hc| Measures::full_attendance(hc, &inst).unwrap()).collect();
        let max = Objective::maximize(ObjectiveKind::TotalTime);
        let by_max = (0..ms.len()).max_by(|&a, &b| max.value(&ms[a]).total_cmp(&max.value(&ms[b])).then(b.cmp(&a))).unwrap();
        let by_norm = (0..ms.len()).min_by(|&a, &b| max.normalized(&ms[a]).total_cmp(&max.normalized(&ms[b]))).unwrap();
        prop_assert_eq!(by_max, by_norm);
    }

    #[test]
    fn sorting_partitions_and_is_idempotent(points in prop::collection::vec(prop::collection::vec(0u8..6, 3), 1..30)) {
        let points: Vec<Vec<f64>> = points.into_iter().map(|p| p.into_iter().map(f64::from).collect()).collect();
        let fronts = non_dominated_sort(&points).unwrap();
        let mut seen: Vec<usize> = fronts.concat();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..points.len()).collect::<Vec<_>>());
        for front in &fronts {
            let sub: Vec<Vec<f64>> = front.iter().map(|&i| points[i].clone()).collect();
            prop_assert_eq!(non_dominated_sort(&sub).unwrap().len(), 1);
        }
        for pair in fronts.windows(2) {
            for &later in &pair[1] {
                prop_assert!(pair[0].iter().any(|&i| dominates(&points[i], &points[later]).unwrap()));
            }
        }
    }

    #[test]
    fn archive_never_holds_a_dominated_pair(points in prop::collection::vec(prop::collection::vec(0u8..8, 2), 1..40)) {
        let mut archive = ParetoArchive::default();
        for (i, p) in points.iter().enumerate() {
            let obj: Vec<f64> = p.iter().copied().map(f64::from).collect();
            archive.offer(&[i as i64], &obj).unwrap();
            prop_assert!(archive.is_internally_nondominated());
        }
        let vectors = archive.objective_vectors();
        for p in &points {
            let obj: Vec<f64> = p.iter().copied().map(f64::from).collect();
            prop_assert!(vectors.iter().any(|a| a == &obj || dominates(a, &obj).unwrap()));
        }
    }

    #[test]
    fn rotation_loads_differ_by_at_most_one(people in 1usize..10, extra in 0usize..4, cycles in 1usize..4, tail in 0usize..10) {
        let positions = (people.saturating_sub(extra)).max(1);
        let spec = RotationSpec::new(positions, people);
        let full = generate_rotation(&spec, cycles * people).unwrap();
        let loads = full.loads();
        prop_assert_eq!(loads.len(), people);
        prop_assert!(loads.iter().max().unwrap() - loads.iter().min().unwrap() <= 1);
        let partial = generate_rotation(&spec, tail).unwrap();
        prop_assert_eq!(partial.assignments.len(), positions * tail);
    }

    #[test]
    fn instance_file_round_trips(days in 1usize..40) {
        let inst = shopping_mall().with_horizon(days);
        let again = ProblemInstance::from_toml_str(&inst.to_toml_string()).unwrap();
        prop_assert_eq!(again.to_toml_string(), inst.to_toml_string());
    }
}
