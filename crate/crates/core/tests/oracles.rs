use fermipair::determinant::CouplingPair;
use fermipair::oracle::{build_momentum_operator, build_position_operator};
use fermipair::solver::spectrum;
use fermipair::torus::{GridSpec, Quasimomentum, Side};

fn grid(n: usize) -> GridSpec {
    GridSpec::new(n).unwrap()
}

#[test]
fn free_operator_has_no_levels_outside_the_margin() {
    for n in [32, 64, 128, 256] {
        for k in [Quasimomentum::ZERO, Quasimomentum::new(1.1, -0.4)] {
            let op = build_momentum_operator(CouplingPair::FREE, k, grid(n)).unwrap();
            assert!(
                op.discrete_eigenvalues_default().unwrap().is_empty(),
                "n = {n}"
            );
        }
    }
}

#[test]
fn oracle_levels_converge_with_the_grid() {
    let p = CouplingPair::new(-18.0, -9.0).unwrap();
    let k = Quasimomentum::new(0.6, 0.2);
    let coarse = build_momentum_operator(p, k, grid(48))
        .unwrap()
        .discrete_eigenvalues(0.3)
        .unwrap();
    let fine = build_momentum_operator(p, k, grid(96))
        .unwrap()
        .discrete_eigenvalues(0.3)
        .unwrap();
    assert_eq!(coarse.len(), fine.len());
    assert!(!fine.is_empty());
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a.z - b.z).abs() < 1e-8);
    }
}

#[test]
fn both_oracles_agree_on_a_repulsive_case() {
    let p = CouplingPair::new(25.0, 15.0).unwrap();
    let k = Quasimomentum::new(-0.5, 1.0);
    let m: Vec<f64> = build_momentum_operator(p, k, grid(96))
        .unwrap()
        .discrete_eigenvalues(0.2)
        .unwrap()
        .iter()
        .map(|l| l.z)
        .collect();
    let states = build_position_operator(p, k, 40)
        .unwrap()
        .discrete_states(0.2)
        .unwrap();
    assert_eq!(m.len(), states.len());
    for (a, s) in m.iter().zip(&states) {
        assert_eq!(s.side, Side::Above);
        assert!((a - s.z).abs() < 1e-6);
        assert!(s.boundary_ratio < 1e-4);
    }
}

#[test]
fn gaps_below_widen_along_k1() {
    // the distance from each level to the lower edge grows with |K1|
    let p = CouplingPair::new(-15.0, -6.0).unwrap();
    let mut prev: Option<Vec<f64>> = None;
    for k1 in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5] {
        let rep = spectrum(p, Quasimomentum::new(k1, 0.0), grid(64)).unwrap();
        let mut gaps: Vec<f64> = rep
            .on_side(Side::Below)
            .flat_map(|e| std::iter::repeat_n(rep.band.e_min - e.z, e.multiplicity as usize))
            .collect();
        gaps.sort_by(|a, b| b.total_cmp(a));
        // levels clear of the oracle's edge margin must show up there too
        let op = build_momentum_operator(p, Quasimomentum::new(k1, 0.0), grid(64)).unwrap();
        let margin = op.default_margin();
        let oracle: Vec<f64> = op
            .discrete_eigenvalues(margin)
            .unwrap()
            .iter()
            .filter(|l| l.side == Side::Below)
            .map(|l| rep.band.e_min - l.z)
            .collect();
        let clear: Vec<f64> = gaps
            .iter()
            .copied()
            .filter(|g| *g > margin + 0.05)
            .collect();
        assert!(oracle.len() >= clear.len(), "K1 = {k1}");
        for (g, o) in clear.iter().zip(&oracle) {
            assert!((g - o).abs() < 1e-8);
        }
        if let Some(prev) = &prev {
            assert!(gaps.len() >= prev.len());
            for (g, h) in gaps.iter().zip(prev) {
                assert!(g >= h, "K1 = {k1}: {g} < {h}");
            }
        }
        prev = Some(gaps);
    }
}
