//! Free-fermion results against dense exact diagonalization.
#![allow(clippy::excessive_precision)]

use modent::correlators::{pair_from_q, QMatrix};
use modent::entanglement::{concurrence, report_from_basis, ReportOptions};
use modent::oracle::ed_report_from;
use modent::{build_couplings, ed_report, ed_solve, solve, ChainSpec, CouplingVector, ModularSpec};

const ENERGY_TOL: f64 = 1e-9;
const STATE_TOL: f64 = 1e-8;

fn grid() -> Vec<ModularSpec> {
    let mut specs = Vec::new();
    for n in [2, 3, 4, 6] {
        for n_mod in 1..=3 {
            if n * n_mod > 12 {
                continue;
            }
            for lam in [0.1, 0.5, 1.0] {
                for li in [0.05, 0.5, 1.0, 4.0] {
                    specs.push(ModularSpec::new(n_mod, n, lam, li).unwrap());
                }
            }
        }
    }
    specs
}

fn compare(c: &CouplingVector, label: &str) -> f64 {
    let basis = solve(c).unwrap();
    let dense = ed_solve(c).unwrap();
    assert!(
        (basis.ground_energy() - dense.ground_energy).abs() <= ENERGY_TOL,
        "{label}: E0 {} vs {}",
        basis.ground_energy(),
        dense.ground_energy
    );
    let ed_gap = if dense.degeneracy() > 1 {
        0.0
    } else {
        dense.gap()
    };
    assert!(
        (basis.energy_gap() - ed_gap).abs() <= ENERGY_TOL,
        "{label}: gap {} vs {}",
        basis.energy_gap(),
        ed_gap
    );
    assert_eq!(
        basis.zero_mode_count() > 0,
        dense.degeneracy() > 1,
        "{label}: degeneracy"
    );

    let q = QMatrix::from_basis(&basis);
    let n = c.sites();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let ff = pair_from_q(&q, i, j).unwrap();
            let ed = dense.pair_state(i, j).unwrap();
            let diffs = [
                ff.p_uu - ed.p_uu,
                ff.p_ud - ed.p_ud,
                ff.p_du - ed.p_du,
                ff.p_dd - ed.p_dd,
                ff.z - ed.z,
                ff.w - ed.w,
                ff.sxx - ed.sxx,
                ff.syy - ed.syy,
                ff.szz - ed.szz,
                concurrence(&ff).unwrap() - concurrence(&ed).unwrap(),
            ];
            let d = diffs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(
                d <= STATE_TOL,
                "{label}: pair ({i},{j}) differs by {d:e}\nff {ff:?}\ned {ed:?}"
            );
            worst = worst.max(d);
        }
    }

    let ff_report = report_from_basis(
        ChainSpec::Explicit {
            couplings: c.as_slice().to_vec(),
        },
        &basis,
        ReportOptions::default(),
    )
    .unwrap();
    let ed = ed_report_from(c, &dense).unwrap();
    assert!(
        (ff_report.residual_tangle - ed.residual_tangle).abs() <= STATE_TOL,
        "{label}: tangle"
    );
    for (a, b) in ff_report
        .pairwise_from_first
        .iter()
        .zip(&ed.pairwise_from_first)
    {
        assert!((a - b).abs() <= STATE_TOL, "{label}: pairwise concurrence");
    }
    worst
}

#[test]
fn modular_grid_matches_exact_diagonalization() {
    let mut worst: f64 = 0.0;
    for spec in grid() {
        let c = build_couplings(&spec).unwrap();
        worst = worst.max(compare(&c, &format!("{spec:?}")));
    }
    eprintln!("worst pair-state discrepancy over the grid: {worst:e}");
}

#[test]
fn singlet_energy_convention() {
    let c = CouplingVector::new(vec![1.0]).unwrap();
    let ff = solve(&c).unwrap().ground_energy();
    let ed = ed_solve(&c).unwrap().ground_energy;
    assert!((ff + 0.25).abs() <= 1e-12 && (ed + 0.25).abs() <= 1e-12);
}

#[test]
fn lde_pair_matches_oracle() {
    let c = build_couplings(&ModularSpec::new(2, 2, 0.1, 1.0).unwrap()).unwrap();
    let dense = ed_solve(&c).unwrap();
    let basis = solve(&c).unwrap();
    assert!((basis.energy_gap() - dense.gap()).abs() <= 1e-10);
    let r = ed_report(&c).unwrap();
    let ff = modent::report(&ChainSpec::explicit(c.as_slice().to_vec()).unwrap()).unwrap();
    assert!((r.end_to_end_concurrence - ff.end_to_end_concurrence).abs() <= 1e-10);
    assert!(ff.end_to_end_concurrence > 0.9);
}

#[test]
fn odd_chains_and_broken_bonds_match_oracle() {
    for c in [
        vec![1.0, 1.0],
        vec![0.3, 1.0, 0.7, 0.2],
        vec![0.5, 1.0, 0.0, 1.0, 0.5],
        vec![1.0, 0.0, 0.4, 0.4, 0.0, 2.0],
        vec![0.2, -1.0, 0.6, 1.3, 0.9, 0.1, 0.4],
    ] {
        let label = format!("{c:?}");
        compare(&CouplingVector::new(c).unwrap(), &label);
    }
}

#[test]
fn near_degenerate_chain_against_high_precision_reference() {
    // gap 1.547e-8; values from a 60-digit dense diagonalization
    let c = build_couplings(&ModularSpec::new(3, 4, 0.1, 4.0).unwrap()).unwrap();
    let basis = solve(&c).unwrap();
    let q = QMatrix::from_basis(&basis);
    assert!((basis.ground_energy() + 2.7534948586923503695).abs() <= 1e-12);
    assert!((basis.energy_gap() - 1.54702e-8).abs() <= 1e-13);
    let reference = [
        ((0, 1), -0.099534095636011430265, 0.0),
        ((0, 11), -0.99009270443631827464, 0.98023448612532962308),
        ((3, 8), -0.00045667809529056468996, 0.0),
        ((4, 7), -0.0004566787476649960465, 0.0),
    ];
    for ((i, j), xx, conc) in reference {
        let p = pair_from_q(&q, i, j).unwrap();
        assert!((p.sxx - xx).abs() <= 1e-10, "({i},{j}) xx {}", p.sxx);
        assert!(
            (concurrence(&p).unwrap() - conc).abs() <= 1e-10,
            "({i},{j}) C"
        );
    }
}
