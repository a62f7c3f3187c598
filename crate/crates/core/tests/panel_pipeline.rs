//! End-to-end panel assembly and the pooled models on synthetic worlds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mrio_core::inference::{ols_fit, DesignMatrix, PermutationScheme};
use mrio_core::metrics::MetricsRecord;
use mrio_core::panel::{
    all_country_slopes, build_panel, mean_relative_change, openness_marginal_effects,
    pooled_model_dependency, pooled_model_unevenness, region_means, relative_change,
    AnalysisOptions, InferenceSettings, Panel,
};
use mrio_core::synth::synthetic_world_with;
use mrio_core::table::MrioTable;
use mrio_core::taxonomy::{Region, SectorRegistry, Taxonomy};
use mrio_core::trajectory::{smooth_and_classify, SmoothingConfig};

fn settings(replications: usize, seed: u64) -> InferenceSettings {
    InferenceSettings {
        replications,
        seed,
        scheme: PermutationScheme::ResponseShuffle,
    }
}

fn small_world_tables(taxonomy: &Taxonomy, seed: u64) -> Vec<MrioTable<f64>> {
    let registry = SectorRegistry::custom(&["s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8"]);
    (0..17)
        .map(|i| synthetic_world_with(taxonomy, registry.clone(), 3, 1995 + i as i32, i, seed))
        .collect()
}

#[test]
fn full_default_taxonomy_panel_has_408_records() {
    let taxonomy = Taxonomy::wiod24();
    let tables = small_world_tables(&taxonomy, 17);
    let panel = build_panel(&tables, &taxonomy, (1995, 2011), &AnalysisOptions::default())
        .unwrap();
    assert_eq!(panel.len(), 408);
    assert_eq!(panel.countries().len(), 24);
    assert_eq!(panel.year_index(1995), 1.0);
    assert_eq!(panel.year_index(2011), 17.0);
    let core = panel
        .records()
        .iter()
        .filter(|r| r.region == Region::Core)
        .count();
    assert_eq!(core, 10 * 17);

    // openness should drift upward for every country in the synthetic world
    let rows = relative_change(&panel).unwrap();
    assert!(rows.iter().all(|r| r.openness_change > 0.0));
    let (mean_open, _) = mean_relative_change(&rows);
    assert!(mean_open > 0.0);

    // regional means exist for every (year, region) pair
    let means = region_means(&panel);
    assert_eq!(means.len(), 17 * 3);
}

#[test]
fn two_country_seventeen_year_panel() {
    let taxonomy = Taxonomy::from_pairs(vec![
        ("AAA".into(), Region::Core),
        ("BBB".into(), Region::East),
    ])
    .unwrap();
    let registry = SectorRegistry::custom(&["s1", "s2", "s3"]);
    let tables: Vec<MrioTable<f64>> = (0..17)
        .map(|i| synthetic_world_with(&taxonomy, registry.clone(), 2, 1995 + i as i32, i, 3))
        .collect();
    let panel = build_panel(&tables, &taxonomy, (1995, 2011), &AnalysisOptions::default())
        .unwrap();
    assert_eq!(panel.len(), 34);
    for (i, year) in (1995..=2011).enumerate() {
        assert_eq!(panel.year_index(year), (i + 1) as f64);
    }
}

/// Panel rows generated straight from known coefficients plus seeded noise;
/// the pooled fit must recover them within two standard errors, with the
/// standard errors taken from the closed-form covariance in this test.
#[test]
fn pooled_model_recovers_known_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    let taxonomy = Taxonomy::wiod24();
    // truth, in response points: intercept, openness, year, year*openness,
    // size, gips, east, gips*openness, east*openness
    let truth = [7.0, -4.0, 0.2, -0.15, -0.5, 2.0, -5.5, 3.5, 8.0];
    let sigma = 1.5;

    let mut records = Vec::new();
    for (country, region) in taxonomy.countries() {
        for (t, year) in (1995..=2011).enumerate() {
            let year_idx = (t + 1) as f64;
            let openness = 0.8
                + 0.035 * year_idx
                + rng.gen_range(-0.15..0.15)
                + match region {
                    Region::East => 0.1,
                    Region::Gips => 0.05,
                    _ => 0.0,
                };
            let size = rng.gen_range(0.05..4.0);
            let gips = f64::from(region == Region::Gips);
            let east = f64::from(region == Region::East);
            let noise: f64 = (0..12).map(|_| rng.gen_range(-0.5..0.5)).sum::<f64>() * sigma / 2.0;
            let y100 = truth[0]
                + truth[1] * openness
                + truth[2] * year_idx
                + truth[3] * year_idx * openness
                + truth[4] * size
                + truth[5] * gips
                + truth[6] * east
                + truth[7] * gips * openness
                + truth[8] * east * openness
                + noise;
            records.push(MetricsRecord {
                country: country.to_string(),
                year,
                region,
                openness,
                unevenness: y100 / 100.0,
                dependency: 0.2,
                size,
            });
        }
    }
    let panel = Panel::from_records(records).unwrap();
    let model = pooled_model_unevenness(&panel, &settings(499, 9)).unwrap();
    assert_eq!(model.fit.n, 408);

    // closed-form standard errors from (XᵀX)⁻¹ σ̂²
    let x = model.design.x();
    let n = x.nrows();
    let p = x.ncols();
    let mut xtx = vec![vec![0.0; p]; p];
    for a in 0..p {
        for b in 0..p {
            xtx[a][b] = (0..n).map(|i| x[[i, a]] * x[[i, b]]).sum();
        }
    }
    let inv = invert(&mut xtx);
    let resid_var = {
        let fitted: Vec<f64> = (0..n)
            .map(|i| (0..p).map(|j| x[[i, j]] * model.fit.b[j]).sum())
            .collect();
        let sse: f64 = (0..n)
            .map(|i| (model.design.y()[i] - fitted[i]).powi(2))
            .sum();
        sse / (n - p) as f64
    };
    for j in 0..p {
        let se = (inv[j][j] * resid_var).sqrt();
        let diff = (model.fit.b[j] - truth[j]).abs();
        assert!(
            diff <= 2.0 * se,
            "coefficient {j} ({}): {} vs truth {} (se {se})",
            model.fit.terms[j],
            model.fit.b[j],
            truth[j]
        );
    }

    // the strong interaction must be flagged significant
    let p_east_open = model.fit.p.as_ref().unwrap()[8];
    assert!(p_east_open <= 0.01, "East * Openness p = {p_east_open}");
}

fn invert(m: &mut [Vec<f64>]) -> Vec<Vec<f64>> {
    let p = m.len();
    let mut inv: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| f64::from(i == j)).collect())
        .collect();
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|a, b| m[*a][col].abs().partial_cmp(&m[*b][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let d = m[col][col];
        for j in 0..p {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for row in 0..p {
            if row != col {
                let f = m[row][col];
                for j in 0..p {
                    m[row][j] -= f * m[col][j];
                    inv[row][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

/// Refit with a different omitted region: region-term coefficients change,
/// fitted values must not.
#[test]
fn dummy_coding_choice_leaves_fitted_values_alone() {
    let taxonomy = Taxonomy::wiod24();
    let tables = small_world_tables(&taxonomy, 41);
    let panel = build_panel(&tables, &taxonomy, (1995, 2011), &AnalysisOptions::default())
        .unwrap();
    let model = pooled_model_unevenness(&panel, &settings(99, 2)).unwrap();

    // alternative coding: East omitted, Core indicator added
    let y: Vec<f64> = panel.records().iter().map(|r| r.unevenness * 100.0).collect();
    let openness: Vec<f64> = panel.records().iter().map(|r| r.openness).collect();
    let year: Vec<f64> = panel
        .records()
        .iter()
        .map(|r| panel.year_index(r.year))
        .collect();
    let size: Vec<f64> = panel.records().iter().map(|r| r.size).collect();
    let gips: Vec<f64> = panel
        .records()
        .iter()
        .map(|r| f64::from(r.region == Region::Gips))
        .collect();
    let core: Vec<f64> = panel
        .records()
        .iter()
        .map(|r| f64::from(r.region == Region::Core))
        .collect();
    let alt = DesignMatrix::builder("unevenness_x100", y)
        .variable("Openness", openness)
        .variable("Year", year)
        .variable("Size", size)
        .variable("GIPS", gips)
        .variable("Core", core)
        .intercept()
        .main("Openness")
        .main("Year")
        .interaction("Year", "Openness")
        .main("Size")
        .main("GIPS")
        .main("Core")
        .interaction("GIPS", "Openness")
        .interaction("Core", "Openness")
        .build()
        .unwrap();
    let alt_fit = ols_fit(&alt).unwrap();

    let x1 = model.design.x();
    let x2 = alt.x();
    for i in 0..x1.nrows() {
        let f1: f64 = (0..x1.ncols()).map(|j| x1[[i, j]] * model.fit.b[j]).sum();
        let f2: f64 = (0..x2.ncols()).map(|j| x2[[i, j]] * alt_fit.b[j]).sum();
        assert!(
            (f1 - f2).abs() < 1e-9,
            "fitted value {i} differs: {f1} vs {f2}"
        );
    }
}

#[test]
fn dependency_model_and_marginal_effects_run() {
    let taxonomy = Taxonomy::wiod24();
    let tables = small_world_tables(&taxonomy, 23);
    let panel = build_panel(&tables, &taxonomy, (1995, 2011), &AnalysisOptions::default())
        .unwrap();
    let model = pooled_model_dependency(&panel, &settings(199, 6)).unwrap();
    assert_eq!(model.fit.terms.len(), 9);
    assert_eq!(model.fit.p.as_ref().unwrap().len(), 9);

    let table = openness_marginal_effects(&model, 11).unwrap();
    assert_eq!(table.grid.len(), 11);
    assert_eq!(table.series.len(), 3);
    // grid spans the observed range, so nothing is extrapolated
    assert!(table.extrapolated.iter().all(|e| !e));

    // mechanical check: East-series slope equals the model's implied slope
    let east = &table.series.iter().find(|(l, _)| l == "East").unwrap().1;
    let b = &model.fit.b;
    let year_mean: f64 = panel
        .records()
        .iter()
        .map(|r| panel.year_index(r.year))
        .sum::<f64>()
        / panel.len() as f64;
    let implied = b[1] + b[3] * year_mean + b[8];
    let step = table.grid[1] - table.grid[0];
    let observed = (east[1] - east[0]) / step;
    assert!((implied - observed).abs() < 1e-9);
}

#[test]
fn permutation_outputs_are_reproducible_across_runs() {
    let taxonomy = Taxonomy::wiod24();
    let tables = small_world_tables(&taxonomy, 29);
    let panel = build_panel(&tables, &taxonomy, (1995, 2011), &AnalysisOptions::default())
        .unwrap();
    let a = pooled_model_unevenness(&panel, &settings(299, 12)).unwrap();
    let b = pooled_model_unevenness(&panel, &settings(299, 12)).unwrap();
    assert_eq!(a.fit.p.as_ref().unwrap(), b.fit.p.as_ref().unwrap());
    assert_eq!(a.fit.f_p, b.fit.f_p);

    let s1 = all_country_slopes(&panel, &settings(99, 5)).unwrap();
    let s2 = all_country_slopes(&panel, &settings(99, 5)).unwrap();
    for (x, y) in s1.iter().zip(&s2) {
        assert_eq!(x.b, y.b);
        assert_eq!(x.p, y.p);
    }
    assert_eq!(s1.len(), 24);
}

#[test]
fn trajectories_cover_default_bins_on_synthetic_data() {
    let taxonomy = Taxonomy::from_pairs(vec![
        ("AAA".into(), Region::Core),
        ("BBB".into(), Region::East),
    ])
    .unwrap();
    let registry = SectorRegistry::custom(&["s1", "s2", "s3"]);
    let tables: Vec<MrioTable<f64>> = (0..17)
        .map(|i| synthetic_world_with(&taxonomy, registry.clone(), 2, 1995 + i as i32, i, 61))
        .collect();
    let panel = build_panel(&tables, &taxonomy, (1995, 2011), &AnalysisOptions::default())
        .unwrap();
    let t = smooth_and_classify(
        &panel,
        "BBB",
        &SmoothingConfig::default(),
        &settings(199, 8),
    )
    .unwrap();
    assert_eq!(t.bins.len(), 6);
    assert_eq!(t.bins[5].n_years(), 2);
    // synthetic cross-border growth means openness rises bin over bin
    for pair in t.bins.windows(2) {
        assert!(pair[1].openness > pair[0].openness);
    }
}
