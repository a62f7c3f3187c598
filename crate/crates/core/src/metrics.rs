//! Country-level integration indices and per-sector profiles.
//!
//! Three indices are computed from a country's national accounts, all of
//! them masking intra-sectoral (diagonal) flows:
//!
//! * **openness**: all cross-border flows (exports plus imports, whether for
//!   intermediate or final use) over all domestic flows (off-diagonal
//!   inter-sectoral intermediate flows plus domestic final use).
//! * **UDE** (upstream domestic embedding), per sector: the sector's share
//!   of total domestic inter-sectoral inputs minus its share of total
//!   exports. Negative values mark exporters weakly fed by domestic
//!   suppliers. The country-level **unevenness** is the sum of squared
//!   sectoral UDE values.
//! * **dependency**: per exporting sector, the gap between the largest and
//!   second-largest normalized foreign-partner shares; the country value is
//!   the mean gap over sectors with positive foreign intermediate outflows.

use ndarray::{Array1, ArrayView1};

use crate::accounts::NationalAccounts;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::taxonomy::Region;

/// Options for the dependency index.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricsOptions {
    /// Append each partner country's final-use offtake as an extra
    /// pseudo-partner element when ranking export destinations. Off by
    /// default: the partner set is foreign intermediate sectors only.
    pub dependency_final_use: bool,
}

/// Transnational openness of one country-year.
pub fn openness<S: Scalar>(acc: &NationalAccounts<S>) -> Result<S> {
    let denom = acc.domestic_offdiagonal_total() + acc.dfu;
    if denom <= S::zero() {
        return Err(Error::DegenerateDomesticEconomy);
    }
    let numer = acc.total_exports() + acc.total_imports() + acc.ifu;
    Ok(numer / denom)
}

/// Upstream domestic embedding per sector.
///
/// `ude[i] = inflow_share(i) - export_share(i)` where the inflow share masks
/// the diagonal in both numerator and denominator. The vector sums to zero
/// by construction.
pub fn ude_vector<S: Scalar>(acc: &NationalAccounts<S>) -> Result<Array1<S>> {
    let dom_total = acc.domestic_offdiagonal_total();
    if dom_total <= S::zero() {
        return Err(Error::DegenerateDomesticEconomy);
    }
    let e_total = acc.total_exports();
    if e_total <= S::zero() {
        return Err(Error::NoExports);
    }
    let ns = acc.n_sectors();
    let mut ude = Array1::<S>::zeros(ns);
    for i in 0..ns {
        let mut inflow = S::zero();
        for j in 0..ns {
            if j != i {
                inflow += acc.zdom[[j, i]];
            }
        }
        ude[i] = inflow / dom_total - acc.exports[i] / e_total;
    }
    Ok(ude)
}

/// Sum of squared sectoral UDE values.
pub fn unevenness<S: Scalar>(ude: ArrayView1<'_, S>) -> S {
    ude.iter().map(|u| *u * *u).sum()
}

/// Dependency of one sector and the country mean.
#[derive(Debug, Clone)]
pub struct DependencyBreakdown<S> {
    /// Mean gap over included sectors.
    pub mean_gap: S,
    /// (sector index, gap) for sectors with positive foreign intermediate
    /// outflows. A sector shipping to exactly one partner has gap 1; exact
    /// ties between the two largest partners give gap 0.
    pub gaps: Vec<(usize, S)>,
    /// Sectors left out because they have no foreign intermediate outflow.
    pub excluded_sectors: usize,
}

/// Export-partner concentration. Partners are foreign sectors in every
/// foreign economy; see [`MetricsOptions::dependency_final_use`] for the
/// sensitivity switch.
pub fn dependency<S: Scalar>(
    acc: &NationalAccounts<S>,
    opts: &MetricsOptions,
) -> Result<DependencyBreakdown<S>> {
    let ns = acc.n_sectors();
    let mut gaps = Vec::new();
    for i in 0..ns {
        let mut total = S::zero();
        let mut max1 = S::zero();
        let mut max2 = S::zero();
        let mut push = |v: S| {
            total += v;
            if v > max1 {
                max2 = max1;
                max1 = v;
            } else if v > max2 {
                max2 = v;
            }
        };
        for v in acc.e_foreign.row(i) {
            push(*v);
        }
        if opts.dependency_final_use {
            for v in acc.e_final_foreign.row(i) {
                push(*v);
            }
        }
        if total > S::zero() {
            gaps.push((i, (max1 - max2) / total));
        }
    }
    if gaps.is_empty() {
        return Err(Error::DependencyUndefined);
    }
    let mean_gap = gaps.iter().map(|(_, g)| *g).sum::<S>() / S::from_count(gaps.len());
    let excluded_sectors = ns - gaps.len();
    Ok(DependencyBreakdown {
        mean_gap,
        gaps,
        excluded_sectors,
    })
}

/// Per-sector profile: the UDE value next to the shares it is built from.
#[derive(Debug, Clone)]
pub struct SectorProfile<S> {
    pub sector_code: String,
    pub sector_index: usize,
    pub ude: S,
    /// Share of the country's total exports.
    pub export_share: S,
    /// Share of the country's intermediate imports.
    pub import_share: S,
    /// Share of domestic inter-sectoral inputs consumed by this sector.
    pub domestic_input_share: S,
}

/// All sector profiles, ranked ascending by UDE (most dis-embedded export
/// sectors first); ties break by sector index.
pub fn sector_profiles<S: Scalar>(acc: &NationalAccounts<S>) -> Result<Vec<SectorProfile<S>>> {
    let ude = ude_vector(acc)?;
    let dom_total = acc.domestic_offdiagonal_total();
    let e_total = acc.total_exports();
    let m_total = acc.total_imports();
    let ns = acc.n_sectors();
    let mut profiles = Vec::with_capacity(ns);
    for i in 0..ns {
        let mut inflow = S::zero();
        for j in 0..ns {
            if j != i {
                inflow += acc.zdom[[j, i]];
            }
        }
        let domestic_input_share = inflow / dom_total;
        let export_share = acc.exports[i] / e_total;
        let import_share = if m_total > S::zero() {
            acc.imports[i] / m_total
        } else {
            S::zero()
        };
        profiles.push(SectorProfile {
            sector_code: String::new(), // filled by the caller that knows the registry
            sector_index: i,
            ude: ude[i],
            export_share,
            import_share,
            domestic_input_share,
        });
    }
    profiles.sort_by(|a, b| {
        a.ude
            .partial_cmp(&b.ude)
            .unwrap()
            .then(a.sector_index.cmp(&b.sector_index))
    });
    Ok(profiles)
}

/// One row of the pooled panel.
#[derive(Debug, Clone)]
pub struct MetricsRecord<S> {
    pub country: String,
    pub year: i32,
    pub region: Region,
    pub openness: S,
    pub unevenness: S,
    pub dependency: S,
    /// Total sectoral flows in trillion (thousand billion) US dollars,
    /// assuming table units of current million USD.
    pub size: S,
}

const MILLION_PER_TRILLION: f64 = 1e6;

/// Bundle the three indices plus economy size for one country-year.
pub fn metrics_record<S: Scalar>(
    acc: &NationalAccounts<S>,
    region: Region,
    opts: &MetricsOptions,
) -> Result<MetricsRecord<S>> {
    let open = openness(acc)?;
    let ude = ude_vector(acc)?;
    let uneven = unevenness(ude.view());
    let dep = dependency(acc, opts)?.mean_gap;
    let total_flows = acc.domestic_offdiagonal_total()
        + acc.dfu
        + acc.total_exports()
        + acc.total_imports()
        + acc.ifu;
    Ok(MetricsRecord {
        country: acc.country.clone(),
        year: acc.year,
        region,
        openness: open,
        unevenness: uneven,
        dependency: dep,
        size: total_flows / S::from_f64_lossy(MILLION_PER_TRILLION),
    })
}
