//! The world flow table: one year of intermediate and final-use flows for
//! every (country, sector) pair, including non-analysis partner countries.

use std::collections::HashMap;
use std::sync::Arc;

use ndarray::{s, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::taxonomy::SectorRegistry;

/// Destination of a single flow cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dest {
    /// Intermediate use by a sector (registry index).
    Sector(usize),
    /// Final use category `0..K` in the destination country.
    FinalUse(usize),
}

/// One year's world table.
///
/// `z` holds intermediate flows with rows and columns labelled
/// (country, sector) in the table's declared country order; `f` holds the
/// final-use block with columns labelled (country, category). Values are
/// non-negative by construction (parsers clamp negative raw cells).
#[derive(Debug, Clone)]
pub struct MrioTable<S: Scalar> {
    year: i32,
    countries: Vec<String>,
    by_country: HashMap<String, usize>,
    registry: Arc<SectorRegistry>,
    final_use_categories: usize,
    z: Array2<S>,
    f: Array2<S>,
}

impl<S: Scalar> PartialEq for MrioTable<S> {
    fn eq(&self, other: &Self) -> bool {
        self.year == other.year
            && self.countries == other.countries
            && *self.registry == *other.registry
            && self.final_use_categories == other.final_use_categories
            && self.z == other.z
            && self.f == other.f
    }
}

impl<S: Scalar> MrioTable<S> {
    pub fn year(&self) -> i32 {
        self.year
    }

    /// All table countries in declared order, partners included.
    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn n_countries(&self) -> usize {
        self.countries.len()
    }

    pub fn country_pos(&self, code: &str) -> Option<usize> {
        self.by_country.get(code).copied()
    }

    pub fn registry(&self) -> &Arc<SectorRegistry> {
        &self.registry
    }

    pub fn n_sectors(&self) -> usize {
        self.registry.len()
    }

    pub fn final_use_categories(&self) -> usize {
        self.final_use_categories
    }

    pub fn z(&self) -> ArrayView2<'_, S> {
        self.z.view()
    }

    pub fn f(&self) -> ArrayView2<'_, S> {
        self.f.view()
    }

    /// Row/column offset of (country position, sector index).
    pub fn offset(&self, country_pos: usize, sector: usize) -> usize {
        country_pos * self.n_sectors() + sector
    }

    /// Intermediate cell by labels; `None` when a label is unknown.
    pub fn intermediate(&self, oc: &str, os: usize, dc: &str, ds: usize) -> Option<S> {
        let o = self.country_pos(oc)?;
        let d = self.country_pos(dc)?;
        Some(self.z[[self.offset(o, os), self.offset(d, ds)]])
    }

    /// Final-use cell by labels; `None` when a label is unknown.
    pub fn final_use(&self, oc: &str, os: usize, dc: &str, category: usize) -> Option<S> {
        let o = self.country_pos(oc)?;
        let d = self.country_pos(dc)?;
        Some(self.f[[self.offset(o, os), d * self.final_use_categories + category]])
    }

    /// Sum of every flow in the table (intermediate plus final use).
    pub fn grand_total(&self) -> S {
        self.z.sum() + self.f.sum()
    }

    /// Total of the rows belonging to one country (its entire supply side).
    pub fn row_total(&self, country_pos: usize) -> S {
        let ns = self.n_sectors();
        let rows = country_pos * ns..(country_pos + 1) * ns;
        self.z.slice(s![rows.clone(), ..]).sum() + self.f.slice(s![rows, ..]).sum()
    }

    /// A copy with every flow multiplied by `c`. Used by the validation
    /// suite to check scale invariance of the indices.
    pub fn scaled(&self, c: S) -> Self {
        let mut out = self.clone();
        out.z.mapv_inplace(|v| v * c);
        out.f.mapv_inplace(|v| v * c);
        out
    }
}

/// Builder accumulating flow cells; duplicate keys are summed.
pub struct TableBuilder<S: Scalar> {
    year: i32,
    registry: Arc<SectorRegistry>,
    final_use_categories: usize,
    countries: Vec<String>,
    by_country: HashMap<String, u32>,
    sort_countries: bool,
    cells: Vec<(u32, u32, u32, Dest, S)>,
}

impl<S: Scalar> TableBuilder<S> {
    pub fn new(year: i32, registry: Arc<SectorRegistry>, final_use_categories: usize) -> Self {
        Self {
            year,
            registry,
            final_use_categories,
            countries: Vec::new(),
            by_country: HashMap::new(),
            sort_countries: false,
            cells: Vec::new(),
        }
    }

    /// Order countries lexicographically at build time instead of by first
    /// appearance. The canonical parser uses this so that re-serialized
    /// tables round-trip to identical values and labels.
    pub fn sort_countries(mut self, yes: bool) -> Self {
        self.sort_countries = yes;
        self
    }

    fn country_id(&mut self, code: &str) -> u32 {
        if let Some(id) = self.by_country.get(code) {
            return *id;
        }
        let id = self.countries.len() as u32;
        self.countries.push(code.to_string());
        self.by_country.insert(code.to_string(), id);
        id
    }

    /// Add one cell by indices.
    pub fn add(
        &mut self,
        origin_country: &str,
        origin_sector: usize,
        dest_country: &str,
        dest: Dest,
        value: S,
    ) -> Result<()> {
        if value < S::zero() || !value.is_finite() {
            return Err(Error::MalformedTable(format!(
                "non-finite or negative flow {value} from {origin_country}"
            )));
        }
        let ns = self.registry.len();
        if origin_sector >= ns {
            return Err(Error::MalformedTable("sector index out of range".into()));
        }
        match dest {
            Dest::Sector(d) if d >= ns => {
                return Err(Error::MalformedTable("sector index out of range".into()))
            }
            Dest::FinalUse(k) if k >= self.final_use_categories => {
                return Err(Error::MalformedTable(
                    "final-use category out of range".into(),
                ))
            }
            _ => {}
        }
        let o = self.country_id(origin_country);
        let d = self.country_id(dest_country);
        self.cells.push((o, origin_sector as u32, d, dest, value));
        Ok(())
    }

    /// Add one cell by sector codes; `dest_code` may be a sector code or a
    /// final-use code `FU1..FUK`. Intended for toy tables and tests.
    pub fn add_codes(
        &mut self,
        origin_country: &str,
        origin_sector: &str,
        dest_country: &str,
        dest_code: &str,
        value: S,
    ) -> Result<()> {
        let os = self
            .registry
            .index_of(origin_sector)
            .ok_or_else(|| Error::UnknownCode {
                line: 0,
                code: origin_sector.to_string(),
            })?;
        let dest = match self.registry.index_of(dest_code) {
            Some(d) => Dest::Sector(d),
            None => match parse_final_use_code(dest_code, self.final_use_categories) {
                Some(k) => Dest::FinalUse(k),
                None => {
                    return Err(Error::UnknownCode {
                        line: 0,
                        code: dest_code.to_string(),
                    })
                }
            },
        };
        self.add(origin_country, os, dest_country, dest, value)
    }

    pub fn build(self) -> Result<MrioTable<S>> {
        if self.countries.is_empty() {
            return Err(Error::MalformedTable("no flows at all".into()));
        }
        let mut order: Vec<u32> = (0..self.countries.len() as u32).collect();
        if self.sort_countries {
            order.sort_by(|a, b| self.countries[*a as usize].cmp(&self.countries[*b as usize]));
        }
        // position of each interned id after reordering
        let mut pos = vec![0usize; self.countries.len()];
        for (p, id) in order.iter().enumerate() {
            pos[*id as usize] = p;
        }
        let countries: Vec<String> = order
            .iter()
            .map(|id| self.countries[*id as usize].clone())
            .collect();
        let by_country = countries
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();

        let nc = countries.len();
        let ns = self.registry.len();
        let k = self.final_use_categories;
        let mut z = Array2::<S>::zeros((nc * ns, nc * ns));
        let mut f = Array2::<S>::zeros((nc * ns, nc * k));
        for (o, os, d, dest, v) in &self.cells {
            let row = pos[*o as usize] * ns + *os as usize;
            match dest {
                Dest::Sector(ds) => z[[row, pos[*d as usize] * ns + ds]] += *v,
                Dest::FinalUse(fk) => f[[row, pos[*d as usize] * k + fk]] += *v,
            }
        }
        Ok(MrioTable {
            year: self.year,
            countries,
            by_country,
            registry: self.registry,
            final_use_categories: k,
            z,
            f,
        })
    }
}

/// Parse `FU<k>` into a zero-based category index, bounds-checked against `k_max`.
pub(crate) fn parse_final_use_code(code: &str, k_max: usize) -> Option<usize> {
    let rest = code.strip_prefix("FU")?;
    let k: usize = rest.parse().ok()?;
    if k >= 1 && k <= k_max {
        Some(k - 1)
    } else {
        None
    }
}
