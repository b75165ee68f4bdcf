//! Bifurcation diagrams and the exact density chain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use pca_core::dynamics::{bifurcation, critical_point, fixed_points, Stability, Sweep};
use pca_core::markov::{build_kernel, evolve, mean_density, stationarity_residual, stationary};
use pca_core::{MapSpec, MeanFieldMap, Result};

fn family(spec: MapSpec) -> impl Fn(f64) -> Result<MeanFieldMap> {
    move |p| MeanFieldMap::new(spec, p)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn grid_branches_split_near_seven_thirtieths() {
    let sweep = Sweep {
        start: 0.005,
        stop: 0.5,
        step: 0.005,
    }
    .values();
    let d = bifurcation(family(MapSpec::Grid { gamma: 5 }), &sweep, 1000, 50, 0.1).unwrap();
    let split: Vec<f64> = d
        .columns
        .iter()
        .filter(|c| c.samples.iter().any(|&x| (x - 0.5).abs() > 1e-3))
        .map(|c| c.p)
        .collect();
    let last = split.iter().cloned().fold(0.0, f64::max);
    // convergence slows near the critical point, so allow a few grid steps
    assert!(
        (last - 7.0 / 30.0).abs() <= 0.015,
        "last split column at p = {last}"
    );
    let half = d.columns.last().unwrap();
    assert_eq!(half.p, 0.5);
    assert!(half.samples.iter().all(|&x| x == 0.5));
}

#[test]
fn odd_neighbourhood_diagrams_are_symmetric() {
    let sweep = Sweep {
        start: 0.01,
        stop: 0.5,
        step: 0.01,
    }
    .values();
    let d = bifurcation(family(MapSpec::Grid { gamma: 7 }), &sweep, 1000, 50, 0.2).unwrap();
    for c in &d.columns {
        let a = sorted(c.samples.clone());
        let b = sorted(c.samples.iter().map(|x| 1.0 - x).collect());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8, "p={}", c.p);
        }
        assert!(c.samples.iter().all(|x| (0.0..=1.0).contains(x)));
    }
}

#[test]
fn collapsed_random_graph_diagram_tracks_the_mixture() {
    let sweep = Sweep::default().values();
    let full = bifurcation(
        family(MapSpec::RgFull { n: 100, p_e: 0.4 }),
        &sweep,
        1000,
        50,
        0.1,
    )
    .unwrap();
    let nu = bifurcation(
        family(MapSpec::RgNu { n: 100, p_e: 0.4 }),
        &sweep,
        1000,
        50,
        0.1,
    )
    .unwrap();
    let (mut worst, mut at) = (0f64, 0.0);
    for (a, b) in full.columns.iter().zip(&nu.columns) {
        for (x, y) in sorted(a.samples.clone())
            .iter()
            .zip(sorted(b.samples.clone()))
        {
            if (x - y).abs() > worst {
                (worst, at) = ((x - y).abs(), a.p);
            }
        }
    }
    assert!(worst < 0.01, "sup distance {worst} at p = {at}");
}

#[test]
fn collapsed_random_graph_critical_point_is_closer_to_half() {
    let grid = critical_point(family(MapSpec::Grid { gamma: 5 }), 1e-3, 0.5, 1e-6).unwrap();
    let rg = critical_point(family(MapSpec::RgNu { n: 100, p_e: 0.4 }), 1e-3, 0.5, 1e-6).unwrap();
    assert_eq!(
        MeanFieldMap::new(MapSpec::RgNu { n: 100, p_e: 0.4 }, 0.1)
            .unwrap()
            .nu(),
        Some(39)
    );
    assert!(0.5 - rg < 0.5 - grid, "{rg} vs {grid}");
}

fn grid_kernel(n: usize, gamma: u32, p: f64) -> pca_core::markov::TransitionKernel {
    build_kernel(n, &MeanFieldMap::new(MapSpec::Grid { gamma }, p).unwrap()).unwrap()
}

#[test]
fn evolved_mean_matches_the_attracting_fixed_point() {
    let map = MeanFieldMap::new(MapSpec::Grid { gamma: 5 }, 0.35).unwrap();
    let fps = fixed_points(&map).unwrap();
    assert_eq!(fps.len(), 1);
    let k = build_kernel(16, &map).unwrap();
    let pi = evolve(&k, &[1.0 / 17.0; 17], 5000).unwrap().pop().unwrap();
    assert!((mean_density(&pi) - fps[0].rho_star).abs() < 1e-3);
}

#[test]
fn four_neighbour_chain_mean_sits_near_its_fixed_point() {
    let map = MeanFieldMap::new(MapSpec::Grid { gamma: 4 }, 0.35).unwrap();
    let fps = fixed_points(&map).unwrap();
    assert_eq!(fps.len(), 1);
    assert!(
        (fps[0].rho_star - 0.405).abs() < 0.005,
        "{}",
        fps[0].rho_star
    );
    let pi = evolve(&build_kernel(16, &map).unwrap(), &[1.0 / 17.0; 17], 5000)
        .unwrap()
        .pop()
        .unwrap();
    assert!(
        (mean_density(&pi) - fps[0].rho_star).abs() < 0.02,
        "{} vs {}",
        mean_density(&pi),
        fps[0].rho_star
    );
}

fn local_maxima(pi: &[f64]) -> Vec<usize> {
    (0..pi.len())
        .filter(|&i| (i == 0 || pi[i] > pi[i - 1]) && (i + 1 == pi.len() || pi[i] > pi[i + 1]))
        .collect()
}

#[test]
fn bistable_chain_has_two_modes_at_the_branches() {
    let map = MeanFieldMap::new(MapSpec::Grid { gamma: 5 }, 0.15).unwrap();
    let branches: Vec<f64> = fixed_points(&map)
        .unwrap()
        .into_iter()
        .filter(|f| f.stability == Stability::Attracting)
        .map(|f| f.rho_star)
        .collect();
    let pi = stationary(&build_kernel(16, &map).unwrap(), 1e-12, 1_000_000).unwrap();
    let modes = local_maxima(&pi);
    assert_eq!(modes.len(), 2, "{pi:?}");
    for (m, b) in modes.iter().zip(&branches) {
        assert!(
            (*m as f64 / 16.0 - b).abs() <= 1.5 / 16.0,
            "mode {m} vs branch {b}"
        );
    }
}

#[test]
fn monostable_chain_has_one_mode_at_half() {
    let pi = stationary(&grid_kernel(16, 5, 0.35), 1e-12, 1_000_000).unwrap();
    assert_eq!(local_maxima(&pi), vec![8]);
}

#[test]
fn sampled_chain_occupation_matches_stationary_law() {
    let map = MeanFieldMap::new(MapSpec::Grid { gamma: 4 }, 0.35).unwrap();
    let k = build_kernel(16, &map).unwrap();
    let pi = stationary(&k, 1e-12, 1_000_000).unwrap();
    assert!(stationarity_residual(&k, &pi) < 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut occ = [0f64; 17];
    let mut state = 8u64;
    let steps = 100_000;
    for _ in 0..steps {
        state = Binomial::new(16, map.eval(state as f64 / 16.0))
            .unwrap()
            .sample(&mut rng);
        occ[state as usize] += 1.0;
    }
    let tv: f64 = occ
        .iter()
        .zip(&pi)
        .map(|(o, p)| (o / steps as f64 - p).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.02, "total variation {tv}");
}
