//! Larger-scale solver properties that are too slow for unit tests.

use hypca::exec::{ExecMode, ExecPlan};
use hypca::jacobi::{jacobi_eigen, JacobiConfig, PivotStrategy};
use hypca::matrix::SymMatrix;
use hypca::oracle::eigenvalues_sym_desc;
use hypca::rng::Stream;

fn random_sym(dim: usize, seed: u64) -> SymMatrix {
    let mut rng = Stream::new(seed, &[]);
    SymMatrix::from_upper(dim, |_, _| rng.next_range(-1.0, 1.0)).unwrap()
}

#[test]
fn invariants_hold_at_dim_256() {
    let c = random_sym(256, 21);
    let eig = jacobi_eigen(&c, &JacobiConfig::default(), &ExecPlan::serial()).unwrap();
    assert!(eig.orthonormality_error() <= 1e-5);
    assert!(eig.reconstruction_error(&c) <= 1e-6 * c.frobenius_norm());
    for k in 1..256 {
        assert!(eig.eigenvalue(k - 1) >= eig.eigenvalue(k));
    }
    // Spectrum invariants against the input, no solver in the loop.
    let sum: f64 = eig.eigenvalues().iter().sum();
    assert!((sum - c.trace()).abs() <= 1e-9 * c.trace().abs().max(1.0));
}

#[test]
fn parallel_strategy_matches_oracle_with_many_workers() {
    let plan = ExecPlan::new(8, ExecMode::Deterministic).unwrap();
    let c = random_sym(96, 40);
    let cfg = JacobiConfig {
        strategy: PivotStrategy::Parallel,
        ..JacobiConfig::default()
    };
    let eig = jacobi_eigen(&c, &cfg, &plan).unwrap();
    let oracle = eigenvalues_sym_desc(&c);
    let lmax = oracle[0].abs().max(oracle[95].abs());
    for (k, want) in oracle.iter().enumerate() {
        assert!((eig.eigenvalue(k) - want).abs() <= 1e-6 * lmax);
    }
    // Same bits regardless of the worker count.
    let eig_serial = jacobi_eigen(&c, &cfg, &ExecPlan::serial()).unwrap();
    for k in 0..96 {
        assert_eq!(
            eig.eigenvalue(k).to_bits(),
            eig_serial.eigenvalue(k).to_bits()
        );
    }
}

#[test]
fn strategies_agree_across_seeds_at_dim_64() {
    let plan = ExecPlan::serial();
    for seed in 0..5u64 {
        let c = random_sym(64, 600 + seed);
        let mut spectra = Vec::new();
        for strategy in [
            PivotStrategy::Classical,
            PivotStrategy::Cyclic,
            PivotStrategy::Parallel,
        ] {
            let cfg = JacobiConfig {
                strategy,
                ..JacobiConfig::default()
            };
            spectra.push(jacobi_eigen(&c, &cfg, &plan).unwrap());
        }
        let lmax = spectra[0]
            .eigenvalue(0)
            .abs()
            .max(spectra[0].eigenvalue(63).abs());
        for other in &spectra[1..] {
            for k in 0..64 {
                assert!(
                    (spectra[0].eigenvalue(k) - other.eigenvalue(k)).abs() <= 1e-5 * lmax,
                    "seed {seed} λ{k}"
                );
            }
        }
    }
}
