//! Per-country national accounts sliced out of the world table.

use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::table::MrioTable;
use crate::taxonomy::ROW_COUNTRY;

/// Options controlling how cross-border aggregates are assembled.
#[derive(Debug, Clone, Copy)]
pub struct AccountsOptions {
    /// Count flows to and from the rest-of-world pseudo-country as
    /// cross-border flows. They are cross-border, so the default is `true`;
    /// turning this off removes the pseudo-country from exports, imports,
    /// final-use imports and the dependency partner set.
    pub include_row_partner: bool,
}

impl Default for AccountsOptions {
    fn default() -> Self {
        Self {
            include_row_partner: true,
        }
    }
}

/// One country-year sliced out of the world table.
///
/// The domestic block keeps its diagonal in storage; every metric masks it.
#[derive(Debug, Clone)]
pub struct NationalAccounts<S: Scalar> {
    pub country: String,
    pub year: i32,
    /// Domestic intermediate flows, sector by sector.
    pub zdom: Array2<S>,
    /// Per-sector exports: intermediate flows to foreign sectors plus
    /// foreign final use.
    pub exports: Array1<S>,
    /// Per-sector intermediate imports: foreign inputs used by each sector.
    pub imports: Array1<S>,
    /// Total imports for final use.
    pub ifu: S,
    /// Total domestic final use of domestic output.
    pub dfu: S,
    /// Intermediate exports by foreign destination sector; columns are
    /// grouped per partner in `partners` order.
    pub e_foreign: Array2<S>,
    /// Exports for final use by destination country, one column per partner.
    pub e_final_foreign: Array2<S>,
    /// Partner countries backing the columns of `e_foreign`.
    pub partners: Vec<String>,
}

impl<S: Scalar> NationalAccounts<S> {
    pub fn n_sectors(&self) -> usize {
        self.zdom.nrows()
    }

    /// Sum of domestic intermediate flows with the diagonal masked.
    pub fn domestic_offdiagonal_total(&self) -> S {
        let mut total = S::zero();
        for i in 0..self.zdom.nrows() {
            for j in 0..self.zdom.ncols() {
                if i != j {
                    total += self.zdom[[i, j]];
                }
            }
        }
        total
    }

    pub fn total_exports(&self) -> S {
        self.exports.sum()
    }

    pub fn total_imports(&self) -> S {
        self.imports.sum()
    }
}

/// Slice one country's accounts out of the world table.
///
/// Pure and side-effect free; deriving accounts for many country-years in
/// parallel is safe.
pub fn derive_national_accounts<S: Scalar>(
    table: &MrioTable<S>,
    country: &str,
    opts: &AccountsOptions,
) -> Result<NationalAccounts<S>> {
    let c = table
        .country_pos(country)
        .ok_or_else(|| Error::CountryNotInTable(country.to_string()))?;
    let ns = table.n_sectors();
    let k = table.final_use_categories();
    let z = table.z();
    let f = table.f();
    if z.nrows() != table.n_countries() * ns || f.ncols() != table.n_countries() * k {
        return Err(Error::MalformedTable("dimension mismatch".into()));
    }

    let partners: Vec<(usize, String)> = table
        .countries()
        .iter()
        .enumerate()
        .filter(|(p, code)| {
            *p != c && (opts.include_row_partner || code.as_str() != ROW_COUNTRY)
        })
        .map(|(p, code)| (p, code.clone()))
        .collect();

    let crows = c * ns..(c + 1) * ns;
    let zdom = z.slice(s![crows.clone(), crows.clone()]).to_owned();
    let dfu = f.slice(s![crows.clone(), c * k..(c + 1) * k]).sum();

    let mut e_foreign = Array2::<S>::zeros((ns, partners.len() * ns));
    let mut e_final_foreign = Array2::<S>::zeros((ns, partners.len()));
    let mut imports = Array1::<S>::zeros(ns);
    let mut ifu = S::zero();
    for (block, (p, _)) in partners.iter().enumerate() {
        let prows = p * ns..(p + 1) * ns;
        let pfu = p * k..(p + 1) * k;
        e_foreign
            .slice_mut(s![.., block * ns..(block + 1) * ns])
            .assign(&z.slice(s![crows.clone(), prows.clone()]));
        for i in 0..ns {
            e_final_foreign[[i, block]] = f.slice(s![c * ns + i, pfu.clone()]).sum();
            imports[i] += z.slice(s![prows.clone(), c * ns + i]).sum();
        }
        ifu += f.slice(s![prows.clone(), c * k..(c + 1) * k]).sum();
    }

    let mut exports = Array1::<S>::zeros(ns);
    for i in 0..ns {
        exports[i] = e_foreign.row(i).sum() + e_final_foreign.row(i).sum();
    }

    Ok(NationalAccounts {
        country: country.to_string(),
        year: table.year(),
        zdom,
        exports,
        imports,
        ifu,
        dfu,
        e_foreign,
        e_final_foreign,
        partners: partners.into_iter().map(|(_, code)| code).collect(),
    })
}
