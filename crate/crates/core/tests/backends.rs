mod common;

use common::*;
use proptest::prelude::*;
use radial_helm::netmodel::{build_incidence, Branch, Bus, NetworkCase, Slack};
use radial_helm::solvers::{
    prepare_dlf_backend, prepare_lu_backend, prepare_sweep_backend, Variant, DLF_DENSE_THRESHOLD,
};
use radial_helm::C64;

fn tree(parents: &[usize], z: &[(f64, f64)]) -> NetworkCase {
    let n = parents.len() + 1;
    NetworkCase {
        name: "random-tree".into(),
        base_mva: 1.0,
        base_kv: 1.0,
        slack: Slack {
            id: 0,
            v0: c(1.0, 0.0),
        },
        buses: (0..n).map(Bus::unloaded).collect(),
        branches: parents
            .iter()
            .zip(z)
            .enumerate()
            .map(|(k, (&p, &(r, x)))| {
                // alternate orientation so the sweep must not assume from = parent
                if k % 2 == 0 {
                    Branch::new(p, k + 1, c(r, x))
                } else {
                    Branch::new(k + 1, p, c(r, x))
                }
            })
            .collect(),
    }
}

fn random_tree() -> impl Strategy<Value = (Vec<usize>, Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    (1usize..40).prop_flat_map(|n| {
        let parents: Vec<_> = (0..n).map(|k| 0..=k).collect();
        (
            parents,
            proptest::collection::vec((1e-3f64..0.1, 1e-3f64..0.1), n),
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n),
        )
    })
}

proptest! {
    #[test]
    fn all_backends_solve_the_same_system((parents, z, rhs) in random_tree()) {
        let case = tree(&parents, &z);
        let inc = build_incidence(&case).unwrap();
        let rhs: Vec<C64> = rhs.iter().map(|&(a, b)| c(a, b)).collect();
        let lu = prepare_lu_backend(&inc.reduced_series_matrix()).unwrap().solve_order(&rhs);
        let sweep = prepare_sweep_backend(&inc).unwrap().solve_order(&rhs);
        let dense = prepare_dlf_backend(&inc, DLF_DENSE_THRESHOLD).unwrap().solve_order(&rhs);
        let factored = prepare_dlf_backend(&inc, 0).unwrap().solve_order(&rhs);
        prop_assert!(rel_diff(&lu, &sweep) < 1e-10);
        prop_assert!(rel_diff(&lu, &dense) < 1e-10);
        prop_assert!(rel_diff(&lu, &factored) < 1e-12);
        // the solution satisfies the shunt-free current balance
        let back = inc.reduced_series_matrix().mul_vec(&sweep);
        prop_assert!(rel_diff(&back, &rhs) < 1e-9);
    }
}

#[test]
fn backends_report_their_variant() {
    let inc = build_incidence(&bundled("case18.m")).unwrap();
    assert_eq!(
        prepare_lu_backend(&inc.reduced_series_matrix())
            .unwrap()
            .variant(),
        Variant::Lu
    );
    assert_eq!(prepare_sweep_backend(&inc).unwrap().variant(), Variant::Sweep);
    let d = prepare_dlf_backend(&inc, DLF_DENSE_THRESHOLD).unwrap();
    assert_eq!(d.variant(), Variant::Dlf);
    assert_eq!(d.dim(), 17);
}
