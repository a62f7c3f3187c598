//! Sector registry and country taxonomy.
//!
//! The default registry carries the 34 analysis sectors (`c1`..`c34`); the
//! household sector `c35` has no intermediate-flow data and is excluded from
//! every analysis, so the registry knows it only as an excluded code. The
//! default taxonomy maps the 24 analysis countries onto the three regions
//! used by the pooled models.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Regional grouping of analysis countries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Core,
    Gips,
    East,
    /// Countries outside the analysis set (foreign partners only).
    NonEu,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::Core => "Core",
            Region::Gips => "GIPS",
            Region::East => "East",
            Region::NonEu => "NonEU",
        };
        f.write_str(s)
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "core" => Ok(Region::Core),
            "gips" => Ok(Region::Gips),
            "east" => Ok(Region::East),
            "noneu" | "non-eu" => Ok(Region::NonEu),
            other => Err(Error::Taxonomy(format!(
                "unknown region `{other}` (expected Core, GIPS, East, or NonEU)"
            ))),
        }
    }
}

/// One sector of the registry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorInfo {
    pub code: String,
    pub name: String,
}

/// Ordered sector registry; sector index is a bijection onto `0..len`.
#[derive(Debug, PartialEq, Eq)]
pub struct SectorRegistry {
    sectors: Vec<SectorInfo>,
    by_code: HashMap<String, usize>,
    /// Codes recognised but barred from analysis, with a display name.
    excluded: Vec<(String, String)>,
}

const WIOD_SECTORS: [(&str, &str); 34] = [
    ("c1", "Agriculture, Hunting, Forestry and Fishing"),
    ("c2", "Mining and Quarrying"),
    ("c3", "Food, Beverages and Tobacco"),
    ("c4", "Textiles and Textile Products"),
    ("c5", "Leather, Leather and Footwear"),
    ("c6", "Wood and Products of Wood and Cork"),
    ("c7", "Pulp, Paper, Paper, Printing and Publishing"),
    ("c8", "Coke, Refined Petroleum and Nuclear Fuel"),
    ("c9", "Chemicals and Chemical Products"),
    ("c10", "Rubber and Plastics"),
    ("c11", "Other Non-Metallic Mineral"),
    ("c12", "Basic Metals and Fabricated Metal"),
    ("c13", "Machinery, Nec"),
    ("c14", "Electrical and Optical Equipment"),
    ("c15", "Transport Equipment"),
    ("c16", "Manufacturing, Nec; Recycling"),
    ("c17", "Electricity, Gas and Water Supply"),
    ("c18", "Construction"),
    (
        "c19",
        "Sale, Maintenance and Repair of Motor Vehicles and Motorcycles; Retail Sale of Fuel",
    ),
    (
        "c20",
        "Wholesale Trade and Commission Trade, Except of Motor Vehicles and Motorcycles",
    ),
    (
        "c21",
        "Retail Trade, Except of Motor Vehicles and Motorcycles; Repair of Household Goods",
    ),
    ("c22", "Hotels and Restaurants"),
    ("c23", "Inland Transport"),
    ("c24", "Water Transport"),
    ("c25", "Air Transport"),
    (
        "c26",
        "Other Supporting and Auxiliary Transport Activities; Activities of Travel Agencies",
    ),
    ("c27", "Post and Telecommunications"),
    ("c28", "Financial Intermediation"),
    ("c29", "Real Estate Activities"),
    ("c30", "Renting of M&Eq and Other Business Activities"),
    ("c31", "Public Admin and Defence; Compulsory Social Security"),
    ("c32", "Education"),
    ("c33", "Health and Social Work"),
    ("c34", "Other Community, Social and Personal Services"),
];

const EXCLUDED_SECTOR: (&str, &str) = ("c35", "Private Households with Employed Persons");

impl SectorRegistry {
    /// The 34-sector WIOD registry with `c35` marked excluded.
    pub fn wiod34() -> Arc<Self> {
        let sectors: Vec<SectorInfo> = WIOD_SECTORS
            .iter()
            .map(|(c, n)| SectorInfo {
                code: (*c).to_string(),
                name: (*n).to_string(),
            })
            .collect();
        Arc::new(Self::from_sectors(
            sectors,
            vec![(EXCLUDED_SECTOR.0.to_string(), EXCLUDED_SECTOR.1.to_string())],
        ))
    }

    /// A registry from bare codes, for toy economies and tests.
    pub fn custom(codes: &[&str]) -> Arc<Self> {
        let sectors = codes
            .iter()
            .map(|c| SectorInfo {
                code: (*c).to_string(),
                name: (*c).to_string(),
            })
            .collect();
        Arc::new(Self::from_sectors(sectors, Vec::new()))
    }

    fn from_sectors(sectors: Vec<SectorInfo>, excluded: Vec<(String, String)>) -> Self {
        let by_code = sectors
            .iter()
            .enumerate()
            .map(|(i, s)| (s.code.clone(), i))
            .collect();
        Self {
            sectors,
            by_code,
            excluded,
        }
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.by_code.get(code).copied()
    }

    pub fn code(&self, index: usize) -> &str {
        &self.sectors[index].code
    }

    pub fn name(&self, index: usize) -> &str {
        &self.sectors[index].name
    }

    pub fn sectors(&self) -> &[SectorInfo] {
        &self.sectors
    }

    /// Display name of an excluded code, if this code is recognised as such.
    pub fn excluded_name(&self, code: &str) -> Option<&str> {
        self.excluded
            .iter()
            .find(|(c, _)| c == code)
            .map(|(_, n)| n.as_str())
    }
}

/// Code of the rest-of-world pseudo-country after normalization.
pub const ROW_COUNTRY: &str = "ROW";

/// Normalize country spellings that vary across table vintages.
///
/// Uppercases, maps the legacy `ROM` spelling to `ROU`, and folds the
/// rest-of-world spellings onto [`ROW_COUNTRY`].
pub fn normalize_country(raw: &str) -> String {
    let up = raw.trim().to_ascii_uppercase();
    match up.as_str() {
        "ROM" => "ROU".to_string(),
        "RESTOFWORLD" | "REST-OF-WORLD" => ROW_COUNTRY.to_string(),
        _ => up,
    }
}

const WIOD_COUNTRIES: [(&str, Region); 24] = [
    ("AUT", Region::Core),
    ("BEL", Region::Core),
    ("DEU", Region::Core),
    ("DNK", Region::Core),
    ("FIN", Region::Core),
    ("FRA", Region::Core),
    ("GBR", Region::Core),
    ("ITA", Region::Core),
    ("NLD", Region::Core),
    ("SWE", Region::Core),
    ("GRC", Region::Gips),
    ("IRL", Region::Gips),
    ("PRT", Region::Gips),
    ("ESP", Region::Gips),
    ("BGR", Region::East),
    ("CZE", Region::East),
    ("EST", Region::East),
    ("HUN", Region::East),
    ("LTU", Region::East),
    ("LVA", Region::East),
    ("POL", Region::East),
    ("ROU", Region::East),
    ("SVK", Region::East),
    ("SVN", Region::East),
];

/// The analysis country set with its regional assignment.
///
/// Countries outside the taxonomy may appear in tables only as foreign
/// partners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    countries: Vec<(String, Region)>,
    by_code: HashMap<String, Region>,
}

impl Taxonomy {
    /// The default 24-country taxonomy (10 Core, 4 GIPS, 10 East).
    pub fn wiod24() -> Self {
        Self::from_pairs(
            WIOD_COUNTRIES
                .iter()
                .map(|(c, r)| ((*c).to_string(), *r))
                .collect(),
        )
        .expect("builtin taxonomy is valid")
    }

    /// Build from explicit (iso3, region) pairs. Codes are normalized.
    pub fn from_pairs(pairs: Vec<(String, Region)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Taxonomy("taxonomy is empty".to_string()));
        }
        let mut countries = Vec::with_capacity(pairs.len());
        let mut by_code = HashMap::new();
        for (code, region) in pairs {
            if region == Region::NonEu {
                return Err(Error::Taxonomy(format!(
                    "analysis country {code} must be assigned Core, GIPS, or East"
                )));
            }
            let code = normalize_country(&code);
            if by_code.insert(code.clone(), region).is_some() {
                return Err(Error::Taxonomy(format!("duplicate country {code}")));
            }
            countries.push((code, region));
        }
        Ok(Self { countries, by_code })
    }

    /// Load a taxonomy from CSV with header `iso3,region`.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "iso3" || &headers[1] != "region" {
            return Err(Error::Taxonomy(format!(
                "expected header `iso3,region`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut pairs = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Taxonomy("short taxonomy row".to_string()));
            }
            pairs.push((rec[0].to_string(), rec[1].parse::<Region>()?));
        }
        Self::from_pairs(pairs)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn len(&self) -> usize {
        self.countries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.countries.is_empty()
    }

    /// Analysis countries in declaration order.
    pub fn countries(&self) -> impl Iterator<Item = (&str, Region)> {
        self.countries.iter().map(|(c, r)| (c.as_str(), *r))
    }

    pub fn region(&self, iso3: &str) -> Option<Region> {
        self.by_code.get(iso3).copied()
    }

    pub fn contains(&self, iso3: &str) -> bool {
        self.by_code.contains_key(iso3)
    }

    /// Countries belonging to one region, in declaration order.
    pub fn in_region(&self, region: Region) -> Vec<&str> {
        self.countries
            .iter()
            .filter(|(_, r)| *r == region)
            .map(|(c, _)| c.as_str())
            .collect()
    }

    /// Regions that actually occur, ordered Core, GIPS, East.
    pub fn regions(&self) -> Vec<Region> {
        let mut out = Vec::new();
        for r in [Region::Core, Region::Gips, Region::East] {
            if self.countries.iter().any(|(_, cr)| *cr == r) {
                out.push(r);
            }
        }
        out
    }
}
