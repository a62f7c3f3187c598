//! Property tests for the index invariants and the canonical round-trip.

use proptest::prelude::*;

use mrio_core::accounts::{derive_national_accounts, AccountsOptions, NationalAccounts};
use mrio_core::ingest::{parse_canonical, write_canonical, IngestOptions};
use mrio_core::metrics::{
    dependency, metrics_record, openness, sector_profiles, ude_vector, unevenness, MetricsOptions,
};
use mrio_core::table::{Dest, MrioTable, TableBuilder};
use mrio_core::taxonomy::{Region, SectorRegistry};

/// A random world with enough structure for every index to be defined for
/// country "C0": off-diagonal domestic flows, exports, foreign sales.
#[derive(Debug, Clone)]
struct WorldSpec {
    n_countries: usize,
    n_sectors: usize,
    final_use: usize,
    values: Vec<f64>,
}

impl WorldSpec {
    fn cell_count(nc: usize, ns: usize, k: usize) -> usize {
        (nc * ns) * (nc * ns) + (nc * ns) * (nc * k)
    }

    fn codes(&self) -> Vec<String> {
        (0..self.n_sectors).map(|i| format!("s{i}")).collect()
    }

    fn build(&self, sector_permutation: Option<&[usize]>) -> MrioTable<f64> {
        let codes = self.codes();
        let code_refs: Vec<&str> = codes.iter().map(|c| c.as_str()).collect();
        let registry = SectorRegistry::custom(&code_refs);
        let perm = |s: usize| sector_permutation.map(|p| p[s]).unwrap_or(s);
        let (nc, ns, k) = (self.n_countries, self.n_sectors, self.final_use);
        let mut b = TableBuilder::<f64>::new(2001, registry, k);
        let mut it = self.values.iter();
        for oc in 0..nc {
            for os in 0..ns {
                for dc in 0..nc {
                    for ds in 0..ns {
                        let v = *it.next().unwrap();
                        if v > 0.0 {
                            b.add(
                                &format!("C{oc}"),
                                perm(os),
                                &format!("C{dc}"),
                                Dest::Sector(perm(ds)),
                                v,
                            )
                            .unwrap();
                        }
                    }
                    for fk in 0..k {
                        let v = *it.next().unwrap();
                        if v > 0.0 {
                            b.add(
                                &format!("C{oc}"),
                                perm(os),
                                &format!("C{dc}"),
                                Dest::FinalUse(fk),
                                v,
                            )
                            .unwrap();
                        }
                    }
                }
            }
        }
        // structural guarantees
        b.add("C0", perm(0), "C0", Dest::Sector(perm(1)), 7.5).unwrap();
        if nc > 1 {
            b.add("C0", perm(1), "C1", Dest::Sector(perm(0)), 4.25).unwrap();
        } else {
            b.add("C0", perm(1), "ZZZ", Dest::Sector(perm(0)), 4.25).unwrap();
        }
        b.build().unwrap()
    }
}

fn world_strategy() -> impl Strategy<Value = WorldSpec> {
    (2usize..=3, 2usize..=4, 1usize..=2).prop_flat_map(|(nc, ns, k)| {
        let cells = WorldSpec::cell_count(nc, ns, k);
        proptest::collection::vec(
            prop_oneof![3 => 0.0..40.0f64, 1 => Just(0.0)],
            cells..=cells,
        )
        .prop_map(move |values| WorldSpec {
            n_countries: nc,
            n_sectors: ns,
            final_use: k,
            values,
        })
    })
}

fn accounts(table: &MrioTable<f64>) -> NationalAccounts<f64> {
    derive_national_accounts(table, "C0", &AccountsOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ude_sums_to_zero(spec in world_strategy()) {
        let acc = accounts(&spec.build(None));
        let ude = ude_vector(&acc).unwrap();
        prop_assert!(ude.sum().abs() < 1e-9);
    }

    #[test]
    fn indices_are_scale_invariant(spec in world_strategy(), c in 0.001f64..1000.0) {
        let table = spec.build(None);
        let base = accounts(&table);
        let scaled = derive_national_accounts(&table.scaled(c), "C0", &AccountsOptions::default()).unwrap();
        let opts = MetricsOptions::default();
        let a = metrics_record(&base, Region::Core, &opts).unwrap();
        let b = metrics_record(&scaled, Region::Core, &opts).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(1e-12);
        prop_assert!(rel(a.openness, b.openness) < 1e-9);
        prop_assert!(rel(a.unevenness, b.unevenness) < 1e-9);
        prop_assert!(rel(a.dependency, b.dependency) < 1e-9);
        prop_assert!(rel(a.size * c, b.size) < 1e-9);
    }

    #[test]
    fn relabeling_permutes_ude_and_fixes_aggregates(spec in world_strategy()) {
        let ns = spec.n_sectors;
        // rotate sector labels by one
        let perm: Vec<usize> = (0..ns).map(|i| (i + 1) % ns).collect();
        let base = accounts(&spec.build(None));
        let relabeled = accounts(&spec.build(Some(&perm)));
        let u1 = ude_vector(&base).unwrap();
        let u2 = ude_vector(&relabeled).unwrap();
        for i in 0..ns {
            prop_assert!((u1[i] - u2[perm[i]]).abs() < 1e-12);
        }
        prop_assert!((openness(&base).unwrap() - openness(&relabeled).unwrap()).abs() < 1e-12);
        prop_assert!((unevenness(u1.view()) - unevenness(u2.view())).abs() < 1e-12);
        let opts = MetricsOptions::default();
        let d1 = dependency(&base, &opts).unwrap();
        let d2 = dependency(&relabeled, &opts).unwrap();
        prop_assert!((d1.mean_gap - d2.mean_gap).abs() < 1e-12);
    }

    #[test]
    fn dependency_gaps_stay_in_unit_interval(spec in world_strategy()) {
        let acc = accounts(&spec.build(None));
        let dep = dependency(&acc, &MetricsOptions::default()).unwrap();
        prop_assert!(dep.mean_gap >= 0.0 && dep.mean_gap <= 1.0);
        for (_, gap) in dep.gaps {
            prop_assert!((0.0..=1.0).contains(&gap));
        }
    }

    #[test]
    fn profiles_are_sorted_and_consistent(spec in world_strategy()) {
        let acc = accounts(&spec.build(None));
        let profiles = sector_profiles(&acc).unwrap();
        for pair in profiles.windows(2) {
            prop_assert!(pair[0].ude <= pair[1].ude);
        }
        for p in profiles {
            prop_assert!((p.ude - (p.domestic_input_share - p.export_share)).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_round_trip_is_bit_identical(spec in world_strategy()) {
        let table = spec.build(None);
        let codes = spec.codes();
        let code_refs: Vec<&str> = codes.iter().map(|c| c.as_str()).collect();
        let opts = IngestOptions {
            registry: SectorRegistry::custom(&code_refs),
            final_use_categories: spec.final_use,
        };
        let mut stream = Vec::new();
        write_canonical(&table, &mut stream, &[]).unwrap();
        let (parsed, report) = parse_canonical::<f64, _>(stream.as_slice(), &opts).unwrap();
        prop_assert_eq!(report.clamped_cells, 0);
        // serialize(parse(x)) parsed again is bit-identical, labels included
        let mut serialized = Vec::new();
        write_canonical(&parsed, &mut serialized, &[]).unwrap();
        let (reparsed, _) = parse_canonical::<f64, _>(serialized.as_slice(), &opts).unwrap();
        prop_assert_eq!(&parsed, &reparsed);
        let mut again = Vec::new();
        write_canonical(&reparsed, &mut again, &[]).unwrap();
        prop_assert_eq!(&serialized, &again);
        // and the cell values survive the detour through text exactly
        prop_assert_eq!(table.grand_total(), parsed.grand_total());
    }
}
