use faer::Mat;
use proptest::prelude::*;

use fkchain::classical::{relax, Boundary, ChainSpec, RelaxMethod, RelaxOptions};
use fkchain::elliptic::{complete_k, jacobi_am, jacobi_sn_cn_dn};
use fkchain::gaussian::{
    entropy, ground_state, log_negativity, reduce, symplectic_eigenvalues, toy_two_oscillator, BlockSelection,
    GaussianState,
};
use fkchain::modes::diagonalize;
use fkchain::squeeze::{
    append_external_mode, squeeze_matrices, symplectic_defect, two_mode_squeeze, ExternalMode, ModeRef, SqueezeSpec,
};
use fkchain::tridiag::SymTridiag;

/// Positive-definite chain Hessian with site curvatures in `[0.05, 1]`.
fn chain_matrix() -> impl Strategy<Value = SymTridiag> {
    (3usize..=12, 0.05f64..50.0, any::<bool>()).prop_flat_map(|(n, g, periodic)| {
        prop::collection::vec(0.05f64..1.0, n).prop_map(move |c| SymTridiag {
            diag: c.iter().map(|x| 2.0 * g + x).collect(),
            off: vec![-g; n - 1],
            corner: if periodic { Some(-g) } else { None },
        })
    })
}

fn state_of(b: &SymTridiag) -> GaussianState {
    ground_state(&diagonalize(b).unwrap()).unwrap()
}

/// Nonempty proper subset of `0..n`, from a bit mask.
fn subset(n: usize, mask: u32) -> BlockSelection {
    let mut idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
    if idx.is_empty() {
        idx.push(0);
    }
    if idx.len() == n {
        idx.pop();
    }
    BlockSelection::new(idx).unwrap()
}

fn brute_force_lambdas(st: &GaussianState) -> Vec<f64> {
    let gh = &st.g * &st.h;
    let ev = gh.eigenvalues().unwrap();
    let mut out: Vec<f64> = ev.iter().map(|z| z.re.sqrt()).collect();
    out.sort_by(f64::total_cmp);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ground_state_is_pure(b in chain_matrix()) {
        let lam = symplectic_eigenvalues(&state_of(&b)).unwrap().lambdas;
        for l in lam {
            prop_assert!((l - 0.5).abs() < 1e-8, "lambda {}", l);
        }
    }

    #[test]
    fn reduced_spectra_obey_uncertainty(b in chain_matrix(), mask in any::<u32>()) {
        let st = state_of(&b);
        let red = reduce(&st, &subset(b.len(), mask)).unwrap();
        for l in symplectic_eigenvalues(&red).unwrap().lambdas {
            prop_assert!(l >= 0.5 - 1e-9, "lambda {}", l);
        }
    }

    #[test]
    fn entropy_is_shared_by_complements(b in chain_matrix(), mask in any::<u32>()) {
        let st = state_of(&b);
        let a = subset(b.len(), mask);
        let ea = entropy(&st, &a).unwrap();
        let ec = entropy(&st, &a.complement(b.len())).unwrap();
        prop_assert!((ea - ec).abs() < 1e-8, "{} vs {}", ea, ec);
    }

    #[test]
    fn spectra_match_non_symmetric_oracle(b in chain_matrix(), mask in any::<u32>()) {
        let st = state_of(&b);
        let red = reduce(&st, &subset(b.len(), mask)).unwrap();
        let fast = symplectic_eigenvalues(&red).unwrap().lambdas;
        let slow = brute_force_lambdas(&red);
        for (x, y) in fast.iter().zip(&slow) {
            prop_assert!((x - y).abs() < 1e-10, "{} vs {}", x, y);
        }
    }

    #[test]
    fn negativity_is_symmetric_and_non_negative(b in chain_matrix()) {
        let st = state_of(&b);
        let n = b.len();
        let a = BlockSelection::contiguous(0, 1);
        let c = BlockSelection::contiguous(n - 1, 1);
        let e1 = log_negativity(&st, &a, &c).unwrap();
        let e2 = log_negativity(&st, &c, &a).unwrap();
        prop_assert!(e1 >= 0.0);
        prop_assert!((e1 - e2).abs() < 1e-10);
    }

    #[test]
    fn two_sites_match_toy_model(c in 0.01f64..5.0, w in 0.05f64..5.0) {
        // B = [[w + c, -c], [-c, w + c]] has frequencies sqrt(w), sqrt(w + 2c)
        let b = SymTridiag { diag: vec![w + c, w + c], off: vec![-c], corner: None };
        let st = state_of(&b);
        let red = reduce(&st, &BlockSelection::contiguous(0, 1)).unwrap();
        let lam = symplectic_eigenvalues(&red).unwrap().lambdas[0];
        let (toy, _) = toy_two_oscillator(w.sqrt(), (w + 2.0 * c).sqrt()).unwrap();
        prop_assert!((lam - toy).abs() < 1e-10, "{} vs {}", lam, toy);
    }

    #[test]
    fn squeezing_is_symplectic_and_pure(
        b in chain_matrix(),
        r in 0.0f64..3.0,
        omega_q in 0.05f64..3.0,
        pick in any::<prop::sample::Index>(),
    ) {
        let basis = diagonalize(&b).unwrap();
        let sys = append_external_mode(&basis, ExternalMode::new(omega_q).unwrap());
        let spec = SqueezeSpec { r, a: ModeRef::Normal(pick.index(b.len())), b: ModeRef::External(0) };
        let (sx, sp) = squeeze_matrices(&sys, &spec).unwrap();
        prop_assert!(symplectic_defect(&sx, &sp) < 1e-12);
        let before = symplectic_eigenvalues(&sys.site_state()).unwrap().lambdas;
        let after = symplectic_eigenvalues(&two_mode_squeeze(&sys, &spec).unwrap().site_state()).unwrap().lambdas;
        for l in before.into_iter().chain(after) {
            prop_assert!((l - 0.5).abs() < 1e-8, "lambda {}", l);
        }
    }

    #[test]
    fn elliptic_identities(u in -20.0f64..20.0, k in 0.0f64..0.999999) {
        let (sn, cn, dn) = jacobi_sn_cn_dn(u, k).unwrap();
        prop_assert!((sn * sn + cn * cn - 1.0).abs() < 1e-12);
        prop_assert!((dn * dn + k * k * sn * sn - 1.0).abs() < 1e-12);
        let am = jacobi_am(u, k).unwrap();
        prop_assert!((am.sin() - sn).abs() < 1e-12 && (am.cos() - cn).abs() < 1e-12);
    }

    #[test]
    fn amplitude_advances_by_pi_per_period(u in -5.0f64..5.0, k in 0.0f64..0.99) {
        let kk = complete_k(k).unwrap();
        let d = jacobi_am(u + 2.0 * kk, k).unwrap() - jacobi_am(u, k).unwrap();
        prop_assert!((d - std::f64::consts::PI).abs() < 1e-12 * (1.0 + kk), "{}", d);
    }

    #[test]
    fn relaxation_descends(
        g in 0.5f64..200.0,
        noise in prop::collection::vec(-0.3f64..0.3, 24),
        newton in any::<bool>(),
    ) {
        let n = noise.len();
        let spec = ChainSpec::new(n, g, Boundary::Free).unwrap();
        let method = if newton { RelaxMethod::Newton } else { RelaxMethod::GradientDescent };
        let opts = RelaxOptions { method, tol: 1e-8, max_iter: 200_000, check_stability: false };
        let (_, log) = relax(&spec, &noise, &opts).unwrap();
        for w in log.energies.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()), "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn oracle_sees_mixed_states() {
    let g = Mat::<f64>::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 0.2 });
    let h = Mat::<f64>::from_fn(2, 2, |i, j| if i == j { 0.7 } else { -0.1 });
    let st = GaussianState::new(g, h, vec![0, 1]).unwrap();
    let fast = symplectic_eigenvalues(&st).unwrap().lambdas;
    let slow = brute_force_lambdas(&st);
    assert!(fast.iter().zip(&slow).all(|(x, y)| (x - y).abs() < 1e-12));
    assert!(fast[1] > 0.5);
}
