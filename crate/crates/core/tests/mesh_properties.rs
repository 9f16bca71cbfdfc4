use std::collections::HashSet;

use goafem::mesh::{BoundaryMesh, MarkedSet, Mesh2, MAX_PANEL_RATIO};
use proptest::prelude::*;

fn root() -> Mesh2 {
    let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
    Mesh2::new(v, vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]]).unwrap()
}

/// Applies each round of raw picks, reduced modulo the current element count.
fn refine_rounds(mut m: Mesh2, rounds: &[Vec<usize>]) -> Mesh2 {
    for picks in rounds {
        let n = m.num_elements();
        m = m.refine(&MarkedSet::new(picks.iter().map(|p| p % n))).unwrap();
    }
    m
}

fn rounds() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(0usize..10_000, 1..6), 0..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_is_conforming_with_sons(r in rounds(), last in prop::collection::vec(0usize..10_000, 0..8)) {
        let m = refine_rounds(root(), &r);
        let n = m.num_elements();
        let marked = MarkedSet::new(last.iter().map(|p| p % n));
        let next = m.refine(&marked).unwrap();
        prop_assert!(next.check_conformity().is_ok());
        let keys: HashSet<_> = (0..next.num_elements()).map(|t| next.element_key(t)).collect();
        for t in marked.iter() {
            prop_assert!(!keys.contains(&m.element_key(t)));
        }
        let removed = (0..n).filter(|&t| !keys.contains(&m.element_key(t))).count();
        prop_assert!(removed + n <= next.num_elements());
        let total: f64 = (0..next.num_elements()).map(|t| next.area(t)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn children_halve_the_area(r in rounds()) {
        let m = refine_rounds(root(), &r);
        let fine = m.refine_uniform().unwrap();
        let parents: std::collections::HashMap<_, _> =
            (0..m.num_elements()).map(|t| (m.element_key(t), (m.area(t), m.triangles()[t].generation))).collect();
        for t in 0..fine.num_elements() {
            let (root, path) = fine.element_key(t);
            if let Some(&(area, generation)) = parents.get(&(root, path.parent().unwrap())) {
                prop_assert_eq!(fine.triangles()[t].generation, generation + 1);
                prop_assert!((fine.area(t) - area / 2.0).abs() <= 1e-15 * area);
                let h = fine.element_size(t);
                prop_assert!((h * h - area / 2.0).abs() <= 1e-14 * area);
            }
        }
    }

    #[test]
    fn overlay_bound(a in rounds(), b in rounds()) {
        let (ma, mb) = (refine_rounds(root(), &a), refine_rounds(root(), &b));
        let o = ma.overlay(&mb).unwrap();
        prop_assert!(o.num_elements() + 4 <= ma.num_elements() + mb.num_elements());
        prop_assert!(o.check_conformity().is_ok());
        prop_assert!(o.same_partition(&mb.overlay(&ma).unwrap()));
        prop_assert!(o.same_partition(&o.overlay(&ma).unwrap()));
    }

    #[test]
    fn empty_marking_is_identity(r in rounds()) {
        let m = refine_rounds(root(), &r);
        prop_assert!(m.refine(&MarkedSet::empty()).unwrap().same_partition(&m));
    }

    #[test]
    fn boundary_bisection_keeps_ratio(r in prop::collection::vec(prop::collection::vec(0usize..10_000, 1..4), 0..12)) {
        let mut m = BoundaryMesh::polygon(vec![[0.0, 0.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]).unwrap();
        let perimeter = m.perimeter();
        for picks in &r {
            let n = m.num_panels();
            let marked = MarkedSet::new(picks.iter().map(|p| p % n));
            let next = m.bisect(&marked).unwrap();
            prop_assert!(next.max_neighbor_ratio() <= MAX_PANEL_RATIO);
            let keys: HashSet<_> = (0..next.num_panels()).map(|i| next.panel_key(i)).collect();
            for i in marked.iter() {
                prop_assert!(!keys.contains(&m.panel_key(i)));
            }
            prop_assert!(next.num_panels() >= n + marked.len());
            m = next;
        }
        let total: f64 = (0..m.num_panels()).map(|i| m.element_size(i)).sum();
        prop_assert!((total - perimeter).abs() < 1e-12);
        let all = m.bisect_all().unwrap();
        prop_assert_eq!(all.num_panels(), 2 * m.num_panels());
    }
}
