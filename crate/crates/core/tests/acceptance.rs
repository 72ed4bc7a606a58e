//! Acceptance gate: one test per criterion, each printing a single
//! `ACCEPTANCE <k> (<name>): pass` line when it holds. All tolerances are
//! pinned as constants below.

use std::collections::BTreeMap;

use bergman_spectra::bergman::{evaluate_basis, sample_measure, SpaceParams};
use bergman_spectra::combinatorics::{binomial, enumerate_multi_indices, BasisOrder};
use bergman_spectra::quadrature::{integrate_halfline, integrate_orthant, QuadratureSpec};
use bergman_spectra::representation::{
    average_operator, commutant_dimension, haar_sample, isotypic_decomposition, rep_matrix,
    unitarity_defect, GroupElement,
};
use bergman_spectra::symbols::{
    make_symbol, radialize_block, radialize_torus, BlockPartition, Symbol,
};
use bergman_spectra::toeplitz::{block_radial_spectrum, commutator_norm, toeplitz_matrix, Method};
use bergman_spectra::C64;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL_IDENTITY: f64 = 1e-10;
const TOL_BETA_REL: f64 = 1e-10;
const TOL_DIRICHLET_REL: f64 = 1e-8;
const TOL_CLOSED_FORM: f64 = 1e-9;
const TOL_DIAG_QUADRATURE: f64 = 1e-8;
const TOL_COMMUTATOR: f64 = 1e-8;
const TOL_CONSTANCY: f64 = 1e-8;
const TOL_REP_DEFECT: f64 = 1e-10;
const TOL_INTERTWINE: f64 = 1e-8;
const SIGMA: f64 = 4.0;
const MC_COUNT_FULL: usize = 1_000_000;
const MC_COUNT_MATRIX: usize = 400_000;
const MIN_RANK_MARGIN: f64 = 10.0;

fn symbol(family: &str, params: &[(&str, f64)], n: usize) -> Symbol {
    let map: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    make_symbol(family, &map, n, None).unwrap()
}

fn block_symbol(kappa: &BlockPartition, block: usize) -> Symbol {
    let map = BTreeMap::from([("block".to_string(), block as f64)]);
    make_symbol("block_weight", &map, kappa.n(), Some(kappa)).unwrap()
}

/// All ordered compositions of n (every block group U(k_1) x ... x U(k_s)).
fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut tail in compositions(n - first) {
            let mut c = vec![first];
            c.append(&mut tail);
            out.push(c);
        }
    }
    out
}

/// Monte Carlo estimate of the diagonal entries `int a |e_p|^2 dnu_m`,
/// returning (mean, standard error) per basis position. Uses the same nu_0
/// importance-sampling scheme as the library's Monte Carlo matrix path, which
/// keeps the estimator bounded (plain nu_m sampling has infinite variance for
/// high-degree diagonal entries).
fn mc_diagonal(
    params: SpaceParams,
    order: &BasisOrder,
    a: &Symbol,
    count: usize,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let dim = order.len();
    let mut sum = vec![0.0f64; dim];
    let mut sum_sq = vec![0.0f64; dim];
    let base = SpaceParams::new(params.n(), 0).unwrap();
    let weight_scale = binomial(params.n() as u32 + params.m(), params.n() as u32) as f64;
    for z in sample_measure(base, seed, count).unwrap() {
        let norm1 = 1.0 + z.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let w = weight_scale * norm1.powi(-(params.m() as i32));
        let av = a.evaluate(&z).re * w;
        let basis = evaluate_basis(params, order, &z).unwrap();
        for (p, b) in basis.iter().enumerate() {
            let term = av * b.norm_sqr();
            sum[p] += term;
            sum_sq[p] += term * term;
        }
    }
    let fcount = count as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / fcount).collect();
    let se: Vec<f64> = mean
        .iter()
        .zip(sum_sq.iter())
        .map(|(&m, &sq)| ((sq / fcount - m * m).max(0.0) / fcount).sqrt())
        .collect();
    (mean, se)
}

#[test]
fn acceptance_01_identity_normalization() {
    let a1 = |n: usize| symbol("constant", &[("c", 1.0)], n);
    for n in 1..=3usize {
        for m in 0..=5u32 {
            let params = SpaceParams::new(n, m).unwrap();
            let order = enumerate_multi_indices(n, m).unwrap();
            for blocks in compositions(n) {
                let kappa = BlockPartition::new(blocks).unwrap();
                let table = block_radial_spectrum(
                    params,
                    &kappa,
                    &a1(n),
                    &QuadratureSpec::with_order(16).unwrap(),
                    &order,
                )
                .unwrap();
                for (d, ev, _) in &table.entries {
                    assert!(
                        (ev - 1.0).abs() <= TOL_IDENTITY,
                        "n={n} m={m} kappa={:?} d={d:?}: eigenvalue {ev}",
                        kappa.blocks()
                    );
                }
            }
        }
    }
    println!("ACCEPTANCE 1 (identity normalization): pass");
}

#[test]
fn acceptance_02_beta_dirichlet_battery() {
    // Half-line: int t^(n+k-1) (1+t)^-(n+m+1) dt = (n+k-1)!(m-k)!/(n+m)!.
    let spec = QuadratureSpec::with_order(64).unwrap();
    let fact = |k: u32| -> f64 { (1..=k).map(f64::from).product::<f64>().max(1.0) };
    for n in 1..=4u32 {
        for m in 0..=6u32 {
            for k in 0..=m {
                let exact = fact(n + k - 1) * fact(m - k) / fact(n + m);
                let got = integrate_halfline(
                    |t| t.powi((n + k - 1) as i32) / (1.0 + t).powi((n + m + 1) as i32),
                    &spec,
                )
                .unwrap();
                assert!(
                    (got.value - exact).abs() <= TOL_BETA_REL * exact,
                    "n={n} m={m} k={k}: rel err {}",
                    ((got.value - exact) / exact).abs()
                );
            }
        }
    }
    // Dirichlet, s <= 3: int prod t_i^(a_i-1) (1+sum t)^-b dt
    //                  = prod (a_i-1)! * (b-1-sum a)! / (b-1)!.
    let spec = QuadratureSpec::with_order(96).unwrap();
    let cases: Vec<(Vec<u32>, u32)> = vec![
        (vec![1], 4),
        (vec![2], 5),
        (vec![1, 1], 5),
        (vec![2, 1], 6),
        (vec![2, 2], 7),
        (vec![1, 1, 1], 6),
        (vec![2, 1, 1], 8),
    ];
    for (a, b) in cases {
        let suma: u32 = a.iter().sum();
        let exact = a.iter().map(|&ai| fact(ai - 1)).product::<f64>() * fact(b - 1 - suma)
            / fact(b - 1);
        let got = integrate_orthant(
            |t| {
                let mut v = 1.0;
                for (ti, &ai) in t.iter().zip(a.iter()) {
                    v *= ti.powi(ai as i32 - 1);
                }
                v / (1.0 + t.iter().sum::<f64>()).powi(b as i32)
            },
            a.len(),
            &spec,
        )
        .unwrap();
        assert!(
            (got.value - exact).abs() <= TOL_DIRICHLET_REL * exact,
            "a={a:?} b={b}: rel err {}",
            ((got.value - exact) / exact).abs()
        );
    }
    println!("ACCEPTANCE 2 (Beta/Dirichlet battery): pass");
}

#[test]
fn acceptance_03_separately_radial_closed_form() {
    // Quadrature leg: gamma(p) = (p_i + 1)/(n + m + 1) over the full grid.
    for n in 1..=3usize {
        for m in 0..=5u32 {
            let params = SpaceParams::new(n, m).unwrap();
            let order = enumerate_multi_indices(n, m).unwrap();
            let kappa = BlockPartition::torus(n);
            for i in 1..=n {
                let a = symbol("coordinate_weight", &[("index", i as f64)], n);
                let table = block_radial_spectrum(
                    params,
                    &kappa,
                    &a,
                    &QuadratureSpec::with_order(24).unwrap(),
                    &order,
                )
                .unwrap();
                for (d, ev, _) in &table.entries {
                    let expect = (f64::from(d[i - 1]) + 1.0) / (n as f64 + f64::from(m) + 1.0);
                    assert!(
                        (ev - expect).abs() <= TOL_CLOSED_FORM,
                        "n={n} m={m} i={i} d={d:?}: {ev} vs {expect}"
                    );
                }
            }
        }
    }
    // Monte Carlo leg: matrix diagonal within 4 standard errors at the small
    // and large corners.
    for (n, m, seed) in [(2usize, 2u32, 11u64), (3, 5, 12)] {
        let params = SpaceParams::new(n, m).unwrap();
        let order = enumerate_multi_indices(n, m).unwrap();
        let a = symbol("coordinate_weight", &[("index", 1.0)], n);
        let (mean, se) = mc_diagonal(params, &order, &a, MC_COUNT_FULL, seed);
        for (pos, p) in order.iter() {
            let expect = (f64::from(p.entries()[0]) + 1.0) / (n as f64 + f64::from(m) + 1.0);
            let dev = (mean[pos] - expect).abs();
            assert!(
                dev <= SIGMA * se[pos],
                "n={n} m={m} p={p:?}: dev {dev:.3e} > {SIGMA} x se {:.3e}",
                se[pos]
            );
        }
    }
    println!("ACCEPTANCE 3 (separately radial closed form): pass");
}

#[test]
fn acceptance_04_radial_closed_form() {
    for n in 1..=3usize {
        for m in 0..=5u32 {
            let params = SpaceParams::new(n, m).unwrap();
            let order = enumerate_multi_indices(n, m).unwrap();
            let a = symbol("total_weight", &[], n);
            let table = block_radial_spectrum(
                params,
                &BlockPartition::full(n),
                &a,
                &QuadratureSpec::with_order(24).unwrap(),
                &order,
            )
            .unwrap();
            for (d, ev, _) in &table.entries {
                let expect = (n as f64 + f64::from(d[0])) / (n as f64 + f64::from(m) + 1.0);
                assert!(
                    (ev - expect).abs() <= TOL_CLOSED_FORM,
                    "n={n} m={m} k={}: {ev} vs {expect}",
                    d[0]
                );
            }
        }
    }
    // Discontinuous symbol via split quadrature.
    let params = SpaceParams::new(1, 1).unwrap();
    let order = enumerate_multi_indices(1, 1).unwrap();
    let a = symbol("ball_indicator", &[("radius", 1.0)], 1);
    let table = block_radial_spectrum(
        params,
        &BlockPartition::full(1),
        &a,
        &QuadratureSpec::with_order(64).unwrap(),
        &order,
    )
    .unwrap();
    assert!(
        (table.entries[0].1 - 0.75).abs() <= TOL_CLOSED_FORM,
        "gamma(0) = {}",
        table.entries[0].1
    );
    println!("ACCEPTANCE 4 (radial closed form): pass");
}

#[test]
fn acceptance_05_diagonality() {
    let radial_families: [(&str, Vec<(&str, f64)>); 4] = [
        ("constant", vec![("c", 0.7)]),
        ("total_weight", vec![]),
        ("ball_indicator", vec![("radius", 1.0)]),
        ("gaussian", vec![("alpha", 0.5)]),
    ];
    let mut seed = 2000u64;
    for n in 1..=2usize {
        for m in 0..=3u32 {
            let params = SpaceParams::new(n, m).unwrap();
            let order = enumerate_multi_indices(n, m).unwrap();
            for (family, sym_params) in &radial_families {
                let a = symbol(family, sym_params, n);
                seed += 1;

                // Monte Carlo: every off-diagonal entry within 4 standard errors.
                let t = toeplitz_matrix(
                    params,
                    &order,
                    &a,
                    &Method::MonteCarlo {
                        count: MC_COUNT_MATRIX,
                        seed,
                    },
                )
                .unwrap();
                let se = t.standard_errors().unwrap();
                for q in 0..order.len() {
                    for p in 0..order.len() {
                        if q == p {
                            continue;
                        }
                        let mag = t.entries()[(q, p)].norm();
                        assert!(
                            mag <= SIGMA * se[(q, p)] + 1e-12,
                            "{family} n={n} m={m} ({q},{p}): {mag:.3e} > 4 se {:.3e}",
                            se[(q, p)]
                        );
                    }
                }

                // Quadrature: off-diagonal below 1e-8 outright.
                let tq = toeplitz_matrix(
                    params,
                    &order,
                    &a,
                    &Method::Quadrature(QuadratureSpec::with_order(32).unwrap()),
                )
                .unwrap();
                for q in 0..order.len() {
                    for p in 0..order.len() {
                        if q == p {
                            continue;
                        }
                        assert!(
                            tq.entries()[(q, p)].norm() <= TOL_DIAG_QUADRATURE,
                            "{family} n={n} m={m} quadrature off-diagonal"
                        );
                    }
                }
            }
        }
    }
    println!("ACCEPTANCE 5 (diagonality): pass");
}

#[test]
fn acceptance_06_commutativity() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for n in 1..=3usize {
        for m in [2u32, 4] {
            let params = SpaceParams::new(n, m).unwrap();
            let order = enumerate_multi_indices(n, m).unwrap();
            for blocks in compositions(n) {
                let kappa = BlockPartition::new(blocks).unwrap();
                // Pool of catalogue symbols invariant under U(kappa).
                let mut pool: Vec<Symbol> = vec![
                    symbol("constant", &[("c", rng.random_range(0.2..2.0))], n),
                    symbol("total_weight", &[], n),
                    symbol("gaussian", &[("alpha", rng.random_range(0.2..1.5))], n),
                ];
                for b in 1..=kappa.num_blocks() {
                    pool.push(block_symbol(&kappa, b));
                }
                if kappa.is_torus() {
                    for i in 1..=n {
                        pool.push(symbol("coordinate_weight", &[("index", i as f64)], n));
                    }
                }
                let spec = QuadratureSpec::with_order(12).unwrap();
                for _ in 0..5 {
                    let i = rng.random_range(0..pool.len());
                    let j = rng.random_range(0..pool.len());
                    let ti = toeplitz_matrix(params, &order, &pool[i], &Method::Quadrature(spec.clone()))
                        .unwrap();
                    let tj = toeplitz_matrix(params, &order, &pool[j], &Method::Quadrature(spec.clone()))
                        .unwrap();
                    let norm = commutator_norm(&ti, &tj).unwrap();
                    assert!(
                        norm <= TOL_COMMUTATOR,
                        "n={n} m={m} kappa={:?} pair ({},{}): commutator {norm:.3e}",
                        kappa.blocks(),
                        pool[i].family(),
                        pool[j].family()
                    );
                }
            }
        }
    }
    println!("ACCEPTANCE 6 (commutativity): pass");
}

#[test]
fn acceptance_07_isotypic_bookkeeping() {
    for n in 1..=4usize {
        for m in 0..=6u32 {
            let params = SpaceParams::new(n, m).unwrap();
            let order = enumerate_multi_indices(n, m).unwrap();
            let expected_dim = binomial((n as u32) + m, n as u32) as usize;
            for blocks in compositions(n) {
                let kappa = BlockPartition::new(blocks).unwrap();
                let dec = isotypic_decomposition(params, &kappa, &order).unwrap();
                let total: usize = dec.components().iter().map(|c| c.dimension).sum();
                assert_eq!(total, expected_dim, "kappa={:?}", kappa.blocks());

                // Per-component constancy of the quadrature matrix diagonal.
                let a = if kappa.num_blocks() == 1 {
                    symbol("total_weight", &[], n)
                } else {
                    block_symbol(&kappa, 1)
                };
                let t = toeplitz_matrix(
                    params,
                    &order,
                    &a,
                    &Method::Quadrature(QuadratureSpec::with_order(8).unwrap()),
                )
                .unwrap();
                for c in dec.components() {
                    let first = t.entries()[(c.basis_positions[0], c.basis_positions[0])].re;
                    for &pos in &c.basis_positions {
                        let v = t.entries()[(pos, pos)].re;
                        assert!(
                            (v - first).abs() <= TOL_CONSTANCY,
                            "n={n} m={m} kappa={:?} d={:?}: {v} vs {first}",
                            kappa.blocks(),
                            c.degrees
                        );
                    }
                }

                // Commutant dimension equals the component count.
                let est = commutant_dimension(
                    params,
                    &kappa,
                    &order,
                    order.len() + 8,
                    24,
                    700 + n as u64 * 31 + u64::from(m),
                )
                .unwrap();
                assert_eq!(
                    est.dimension,
                    dec.len(),
                    "n={n} m={m} kappa={:?}",
                    kappa.blocks()
                );
                assert!(
                    est.rank_margin >= MIN_RANK_MARGIN,
                    "n={n} m={m} kappa={:?}: margin {:.2}",
                    kappa.blocks(),
                    est.rank_margin
                );
            }
        }
    }
    println!("ACCEPTANCE 7 (isotypic bookkeeping): pass");
}

#[test]
fn acceptance_08_averaging_identity() {
    let params = SpaceParams::new(2, 2).unwrap();
    let order = enumerate_multi_indices(2, 2).unwrap();
    let a = symbol("phase", &[("index", 1.0)], 2);
    let t = toeplitz_matrix(
        params,
        &order,
        &a,
        &Method::MonteCarlo {
            count: MC_COUNT_MATRIX,
            seed: 81,
        },
    )
    .unwrap();
    let se_t: f64 = t.standard_errors().unwrap().iter().map(|s| s * s).sum::<f64>().sqrt();

    // Torus: averaging is exact diagonal extraction.
    let torus = BlockPartition::torus(2);
    let avg = average_operator(params, &torus, &order, &t, 1, 0).unwrap();
    for q in 0..order.len() {
        for p in 0..order.len() {
            let expect = if q == p {
                t.entries()[(q, p)]
            } else {
                C64::new(0.0, 0.0)
            };
            assert_eq!(avg.entries()[(q, p)], expect, "torus extraction not exact");
        }
    }
    let a_tilde = radialize_torus(&a, 128).unwrap();
    let tt = toeplitz_matrix(
        params,
        &order,
        &a_tilde,
        &Method::MonteCarlo {
            count: MC_COUNT_MATRIX,
            seed: 82,
        },
    )
    .unwrap();
    let se_tt: f64 = tt.standard_errors().unwrap().iter().map(|s| s * s).sum::<f64>().sqrt();
    let diff = (avg.entries() - tt.entries()).norm();
    let tol = SIGMA * (se_t + se_tt);
    assert!(diff <= tol, "torus: |avg(T_a) - T_atilde| = {diff:.3e} > {tol:.3e}");

    // Full group U(2): Monte Carlo conjugation average vs the rotation-averaged
    // symbol; both stages contribute statistical error.
    let full = BlockPartition::full(2);
    let avg_samples = 4096usize;
    let sphere_samples = 4096usize;
    let avg = average_operator(params, &full, &order, &t, avg_samples, 83).unwrap();
    let a_tilde = radialize_block(&a, &full, sphere_samples, 84).unwrap();
    let tt = toeplitz_matrix(
        params,
        &order,
        &a_tilde,
        &Method::MonteCarlo {
            count: MC_COUNT_MATRIX,
            seed: 85,
        },
    )
    .unwrap();
    let se_tt: f64 = tt.standard_errors().unwrap().iter().map(|s| s * s).sum::<f64>().sqrt();
    let diff = (avg.entries() - tt.entries()).norm();
    // Combined tolerance: matrix sampling noise (both matrices), conjugation
    // averaging noise, and rotation-averaging noise of the symbol (|a| <= 1).
    let dim = order.len() as f64;
    let tol = SIGMA
        * (se_t + se_tt
            + t.entries().norm() / (avg_samples as f64).sqrt()
            + dim / (sphere_samples as f64).sqrt());
    assert!(diff <= tol, "full: |avg(T_a) - T_atilde| = {diff:.3e} > {tol:.3e}");
    println!("ACCEPTANCE 8 (averaging identity): pass");
}

#[test]
fn acceptance_09_representation_contract() {
    for n in 1..=3usize {
        for m in 0..=4u32 {
            let params = SpaceParams::new(n, m).unwrap();
            let order = enumerate_multi_indices(n, m).unwrap();
            let kappa = BlockPartition::full(n);
            for trial in 0..50u64 {
                let g = haar_sample(&kappa, 900 + trial);
                let h = haar_sample(&kappa, 5000 + trial);
                let rg = rep_matrix(params, &order, &g).unwrap();
                let rh = rep_matrix(params, &order, &h).unwrap();
                let gh = GroupElement::new(g.matrix() * h.matrix()).unwrap();
                let rgh = rep_matrix(params, &order, &gh).unwrap();
                let hom = (&rgh - &rg * &rh).norm();
                assert!(hom <= TOL_REP_DEFECT, "n={n} m={m} hom defect {hom:.3e}");
                let uni = unitarity_defect(&rg);
                assert!(uni <= TOL_REP_DEFECT, "n={n} m={m} unitarity {uni:.3e}");
            }
        }
    }
    // Intertwining: pi(k) T_a = T_a pi(k) for invariant symbols.
    for n in 2..=3usize {
        let m = 4u32;
        let params = SpaceParams::new(n, m).unwrap();
        let order = enumerate_multi_indices(n, m).unwrap();
        for blocks in compositions(n) {
            let kappa = BlockPartition::new(blocks).unwrap();
            let a = if kappa.num_blocks() == 1 {
                symbol("gaussian", &[("alpha", 0.7)], n)
            } else {
                block_symbol(&kappa, 1)
            };
            let t = toeplitz_matrix(
                params,
                &order,
                &a,
                &Method::Quadrature(QuadratureSpec::with_order(16).unwrap()),
            )
            .unwrap();
            for trial in 0..10u64 {
                let g = haar_sample(&kappa, 7000 + trial);
                let rep = rep_matrix(params, &order, &g).unwrap();
                let defect = (&rep * t.entries() - t.entries() * &rep).norm();
                let tol = TOL_INTERTWINE + t.error_estimate() * order.len() as f64;
                assert!(
                    defect <= tol,
                    "n={n} kappa={:?}: intertwining defect {defect:.3e}",
                    kappa.blocks()
                );
            }
        }
    }
    println!("ACCEPTANCE 9 (representation contract): pass");
}

#[test]
fn acceptance_10_reproducibility() {
    let dir = std::env::temp_dir().join(format!("bs-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("job.json");
    std::fs::write(
        &config_path,
        r#"{"n": 2, "m": 2, "group": [1, 1],
            "symbol": {"family": "coordinate_weight", "parameters": {"index": 1}},
            "method": {"monte_carlo": {"count": 50000, "seed": 42}}}"#,
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_bergman-spectra");
    let run = |out: &std::path::Path| {
        let status = std::process::Command::new(bin)
            .args(["matrix", "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let first = run(&dir.join("a.json"));
    let second = run(&dir.join("b.json"));
    assert_eq!(first, second, "Monte Carlo output not byte-identical");

    // Quadrature command, byte-identical as well.
    std::fs::write(
        &config_path,
        r#"{"n": 1, "m": 2, "group": [1],
            "symbol": {"family": "total_weight", "parameters": {}}}"#,
    )
    .unwrap();
    let status = std::process::Command::new(bin)
        .args(["spectrum", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(dir.join("s1.json"))
        .status()
        .unwrap();
    assert!(status.success());
    let status = std::process::Command::new(bin)
        .args(["spectrum", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(dir.join("s2.json"))
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        std::fs::read(dir.join("s1.json")).unwrap(),
        std::fs::read(dir.join("s2.json")).unwrap()
    );
    std::fs::remove_dir_all(&dir).unwrap();
    println!("ACCEPTANCE 10 (reproducibility): pass");
}
