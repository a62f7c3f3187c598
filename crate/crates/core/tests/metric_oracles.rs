//! Index implementations against an independent cell-level oracle.
//!
//! The oracle never touches the table/accounts slicing path: it loops over
//! labelled raw cells and accumulates the aggregates directly.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mrio_core::accounts::{derive_national_accounts, AccountsOptions};
use mrio_core::metrics::{dependency, openness, ude_vector, unevenness, MetricsOptions};
use mrio_core::table::{Dest, MrioTable, TableBuilder};
use mrio_core::taxonomy::SectorRegistry;

#[derive(Clone)]
struct RawCell {
    oc: usize,
    os: usize,
    dc: usize,
    dest: Dest,
    v: f64,
}

struct OracleOut {
    openness: f64,
    ude: Vec<f64>,
    unevenness: f64,
    dependency: f64,
}

/// Naive aggregation straight off the cell list for country index 0.
fn oracle(cells: &[RawCell], ns: usize) -> OracleOut {
    let me = 0usize;
    let mut exports = vec![0.0; ns];
    let mut imports = vec![0.0; ns];
    let mut inflow = vec![0.0; ns];
    let mut ifu = 0.0;
    let mut dfu = 0.0;
    let mut dom_offdiag = 0.0;
    // (origin sector) -> (foreign country, foreign sector) -> flow
    let mut partners: Vec<BTreeMap<(usize, usize), f64>> = vec![BTreeMap::new(); ns];

    for c in cells {
        match (c.oc == me, c.dc == me, c.dest) {
            (true, true, Dest::Sector(ds)) => {
                if c.os != ds {
                    dom_offdiag += c.v;
                    inflow[ds] += c.v;
                }
            }
            (true, true, Dest::FinalUse(_)) => dfu += c.v,
            (true, false, Dest::Sector(ds)) => {
                exports[c.os] += c.v;
                *partners[c.os].entry((c.dc, ds)).or_insert(0.0) += c.v;
            }
            (true, false, Dest::FinalUse(_)) => exports[c.os] += c.v,
            (false, true, Dest::Sector(ds)) => imports[ds] += c.v,
            (false, true, Dest::FinalUse(_)) => ifu += c.v,
            (false, false, _) => {}
        }
    }

    let e_total: f64 = exports.iter().sum();
    let m_total: f64 = imports.iter().sum();
    let open = (e_total + m_total + ifu) / (dom_offdiag + dfu);
    let ude: Vec<f64> = (0..ns)
        .map(|i| inflow[i] / dom_offdiag - exports[i] / e_total)
        .collect();
    let uneven: f64 = ude.iter().map(|u| u * u).sum();

    let mut gaps = Vec::new();
    for map in &partners {
        let total: f64 = map.values().sum();
        if total <= 0.0 {
            continue;
        }
        let mut shares: Vec<f64> = map.values().map(|v| v / total).collect();
        shares.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let top = shares[0];
        let second = shares.get(1).copied().unwrap_or(0.0);
        gaps.push(top - second);
    }
    let dep = gaps.iter().sum::<f64>() / gaps.len() as f64;

    OracleOut {
        openness: open,
        ude,
        unevenness: uneven,
        dependency: dep,
    }
}

fn random_world(rng: &mut ChaCha8Rng) -> (Vec<RawCell>, MrioTable<f64>, usize) {
    let nc = rng.gen_range(2..=3usize);
    let ns = rng.gen_range(2..=5usize);
    let k = rng.gen_range(1..=2usize);
    let codes: Vec<String> = (0..ns).map(|i| format!("s{i}")).collect();
    let code_refs: Vec<&str> = codes.iter().map(|c| c.as_str()).collect();
    let registry = SectorRegistry::custom(&code_refs);
    let names: Vec<String> = (0..nc).map(|i| format!("C{i}")).collect();

    let mut cells = Vec::new();
    for oc in 0..nc {
        for os in 0..ns {
            for dc in 0..nc {
                for ds in 0..ns {
                    if rng.gen_bool(0.6) {
                        cells.push(RawCell {
                            oc,
                            os,
                            dc,
                            dest: Dest::Sector(ds),
                            v: rng.gen_range(0.0..50.0),
                        });
                    }
                }
                for fk in 0..k {
                    if rng.gen_bool(0.4) {
                        cells.push(RawCell {
                            oc,
                            os,
                            dc,
                            dest: Dest::FinalUse(fk),
                            v: rng.gen_range(0.0..20.0),
                        });
                    }
                }
            }
        }
    }
    // Keep the preconditions of the indices satisfied for country 0:
    // some off-diagonal domestic flow, an export, a foreign intermediate sale.
    cells.push(RawCell {
        oc: 0,
        os: 0,
        dc: 0,
        dest: Dest::Sector(1),
        v: 5.0,
    });
    cells.push(RawCell {
        oc: 0,
        os: 1,
        dc: 1,
        dest: Dest::Sector(0),
        v: 3.0,
    });

    let mut b = TableBuilder::<f64>::new(2000, registry, k);
    for c in &cells {
        b.add(&names[c.oc], c.os, &names[c.dc], c.dest, c.v).unwrap();
    }
    (cells, b.build().unwrap(), ns)
}

#[test]
fn indices_match_the_cell_oracle_on_random_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let (cells, table, ns) = random_world(&mut rng);
        let want = oracle(&cells, ns);
        let acc = derive_national_accounts(&table, "C0", &AccountsOptions::default()).unwrap();

        let open = openness(&acc).unwrap();
        assert!(
            (open - want.openness).abs() <= 1e-9 * want.openness.abs().max(1.0),
            "case {case}: openness {open} vs oracle {}",
            want.openness
        );

        let ude = ude_vector(&acc).unwrap();
        for i in 0..ns {
            assert!(
                (ude[i] - want.ude[i]).abs() <= 1e-9,
                "case {case}: ude[{i}] {} vs oracle {}",
                ude[i],
                want.ude[i]
            );
        }

        let uneven = unevenness(ude.view());
        assert!((uneven - want.unevenness).abs() <= 1e-9);

        let dep = dependency(&acc, &MetricsOptions::default()).unwrap();
        assert!(
            (dep.mean_gap - want.dependency).abs() <= 1e-9,
            "case {case}: dependency {} vs oracle {}",
            dep.mean_gap,
            want.dependency
        );
    }
}

#[test]
fn duplicate_cells_accumulate_like_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (cells, whole, ns) = random_world(&mut rng);
    // Split every cell in two halves; the built table must be unchanged.
    let codes: Vec<String> = (0..ns).map(|i| format!("s{i}")).collect();
    let code_refs: Vec<&str> = codes.iter().map(|c| c.as_str()).collect();
    let registry = SectorRegistry::custom(&code_refs);
    let k = whole.final_use_categories();
    let mut b = TableBuilder::<f64>::new(2000, registry, k);
    for c in &cells {
        for _ in 0..2 {
            b.add(
                &format!("C{}", c.oc),
                c.os,
                &format!("C{}", c.dc),
                c.dest,
                c.v / 2.0,
            )
            .unwrap();
        }
    }
    let halved = b.build().unwrap();
    assert!((whole.grand_total() - halved.grand_total()).abs() < 1e-9);
    assert_eq!(whole.countries(), halved.countries());
}
