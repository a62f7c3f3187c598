//! Deterministic synthetic tables for tests, demos and pipeline dry runs.

use std::sync::Arc;

use crate::scalar::Scalar;
use crate::table::{Dest, MrioTable, TableBuilder};
use crate::taxonomy::{SectorRegistry, Taxonomy, ROW_COUNTRY};

/// A four-sector single-country economy with a rest-of-world partner whose
/// indices have closed-form values: openness is exactly 1 (200 domestic
/// against 200 outside flows), sector C2 is perfectly balanced, and the sum
/// of squared embedding values is 0.23625.
///
/// Layout (all flows in "million" units):
///
/// * domestic off-diagonal inflows per sector: C1 0, C2 100, C3 25, C4 75
/// * exports per sector: C1 30, C2 50, C3 20, C4 0 (total 100)
/// * intermediate imports per sector: C1 25, C2 15, C3 50, C4 10 (total 100)
/// * no final-use flows in either direction
pub fn four_sector_example<S: Scalar>() -> MrioTable<S> {
    let registry = SectorRegistry::custom(&["C1", "C2", "C3", "C4"]);
    let mut b = TableBuilder::<S>::new(1995, registry, 1);
    let v = |x: f64| S::from_f64_lossy(x);
    let home = "HOME";

    // Domestic off-diagonal flows, chosen to hit the inflow totals above.
    let domestic: [(usize, usize, f64); 9] = [
        (0, 1, 40.0),
        (2, 1, 30.0),
        (3, 1, 30.0),
        (0, 2, 10.0),
        (1, 2, 10.0),
        (3, 2, 5.0),
        (0, 3, 25.0),
        (1, 3, 30.0),
        (2, 3, 20.0),
    ];
    for (i, j, val) in domestic {
        b.add(home, i, home, Dest::Sector(j), v(val)).unwrap();
    }

    // Exports to rest-of-world sectors.
    let exports: [(usize, usize, f64); 4] = [(0, 0, 20.0), (0, 1, 10.0), (1, 2, 50.0), (2, 3, 20.0)];
    for (i, j, val) in exports {
        b.add(home, i, ROW_COUNTRY, Dest::Sector(j), v(val)).unwrap();
    }

    // Intermediate imports from rest-of-world sectors.
    let imports: [(usize, usize, f64); 4] = [(0, 0, 25.0), (1, 1, 15.0), (0, 2, 50.0), (2, 3, 10.0)];
    for (j, i, val) in imports {
        b.add(ROW_COUNTRY, j, home, Dest::Sector(i), v(val)).unwrap();
    }

    b.build().unwrap()
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministic uniform draw in [0, 1) keyed by cell coordinates. Keeping
/// the base value independent of the year makes synthetic series evolve
/// smoothly under the year trend.
fn hash01(seed: u64, parts: &[u64]) -> f64 {
    let mut h = splitmix(seed ^ 0x5851f42d4c957f2d);
    for p in parts {
        h = splitmix(h ^ *p);
    }
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// A dense synthetic world table over the taxonomy countries plus a
/// rest-of-world partner, on the default 34-sector registry with five
/// final-use categories.
///
/// Cross-border flows grow with `year_index` at a region-dependent rate, so
/// a run of consecutive tables yields rising openness. Values are fully
/// determined by (seed, labels, year_index).
pub fn synthetic_world<S: Scalar>(
    taxonomy: &Taxonomy,
    year: i32,
    year_index: usize,
    seed: u64,
) -> MrioTable<S> {
    let registry = SectorRegistry::wiod34();
    synthetic_world_with(taxonomy, registry, 5, year, year_index, seed)
}

/// As [`synthetic_world`], with an explicit registry and final-use count.
pub fn synthetic_world_with<S: Scalar>(
    taxonomy: &Taxonomy,
    registry: Arc<SectorRegistry>,
    final_use_categories: usize,
    year: i32,
    year_index: usize,
    seed: u64,
) -> MrioTable<S> {
    let mut countries: Vec<String> = taxonomy.countries().map(|(c, _)| c.to_string()).collect();
    countries.push(ROW_COUNTRY.to_string());
    let ns = registry.len();
    let t = year_index as f64;

    let growth = |country: &str| -> f64 {
        use crate::taxonomy::Region;
        match taxonomy.region(country) {
            Some(Region::Core) => 0.020,
            Some(Region::Gips) => 0.025,
            Some(Region::East) => 0.032,
            _ => 0.022,
        }
    };

    let mut b = TableBuilder::<S>::new(year, registry, final_use_categories);
    for (oi, oc) in countries.iter().enumerate() {
        for os in 0..ns {
            for (di, dc) in countries.iter().enumerate() {
                let cross = oi != di;
                let trend = if cross {
                    1.0 + 0.5 * (growth(oc) + growth(dc)) * t
                } else {
                    1.0 + 0.004 * t
                };
                for ds in 0..ns {
                    let u = hash01(seed, &[oi as u64, os as u64, di as u64, ds as u64]);
                    // keep roughly a third of cross-border cells empty
                    if cross && u < 0.35 {
                        continue;
                    }
                    let base = if cross { 6.0 * (u - 0.3) } else { 40.0 * (0.2 + u) };
                    if base <= 0.0 {
                        continue;
                    }
                    b.add(oc, os, dc, Dest::Sector(ds), S::from_f64_lossy(base * trend))
                        .unwrap();
                }
                for fk in 0..final_use_categories {
                    let u = hash01(seed, &[99, oi as u64, os as u64, di as u64, fk as u64]);
                    let base = if cross { 3.0 * (u - 0.4) } else { 25.0 * (0.2 + u) };
                    if base <= 0.0 {
                        continue;
                    }
                    b.add(oc, os, dc, Dest::FinalUse(fk), S::from_f64_lossy(base * trend))
                        .unwrap();
                }
            }
        }
    }
    b.build().unwrap()
}
