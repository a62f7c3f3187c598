//! Parsers: the canonical long-format CSV and the WIOT spreadsheet export.
//!
//! The canonical format is one cell per line under the exact header
//! `year,origin_country,origin_sector,dest_country,dest_code,value`, with
//! `#`-prefixed comment lines permitted before and after the header. It
//! exists because spreadsheet layouts changed across table vintages; the
//! WIOT converter isolates that instability. Encoding is UTF-8, decimals use
//! `.`, and there are no thousands separators.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::table::{parse_final_use_code, Dest, MrioTable, TableBuilder};
use crate::taxonomy::{normalize_country, SectorRegistry};

/// Exact canonical header.
pub const CANONICAL_HEADER: &str = "year,origin_country,origin_sector,dest_country,dest_code,value";

/// Parser options shared by both input formats.
#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub registry: Arc<SectorRegistry>,
    /// Number of final-use categories per destination country.
    pub final_use_categories: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            registry: SectorRegistry::wiod34(),
            final_use_categories: 5,
        }
    }
}

/// What ingestion had to do to the raw cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    /// Cells with negative raw values clamped to zero.
    pub clamped_cells: usize,
    /// Absolute mass removed by clamping.
    pub clamped_mass: f64,
    /// Supply rows dropped because their sector is excluded.
    pub dropped_excluded_rows: usize,
    /// Use columns dropped because their sector is excluded.
    pub dropped_excluded_cols: usize,
    /// Data columns skipped because their code is not a sector or final-use
    /// code (totals and the like).
    pub ignored_columns: usize,
}

/// Parse a canonical long-format stream into a table.
///
/// All records must share one year. Unmentioned cells are zero; duplicate
/// keys are summed. Countries end up in lexicographic order.
pub fn parse_canonical<S: Scalar, R: Read>(
    reader: R,
    opts: &IngestOptions,
) -> Result<(MrioTable<S>, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let found = headers.iter().collect::<Vec<_>>().join(",");
    if found != CANONICAL_HEADER {
        return Err(Error::CanonicalHeader {
            expected: CANONICAL_HEADER.to_string(),
            found,
        });
    }

    let mut report = IngestReport::default();
    let mut year: Option<i32> = None;
    // (origin country, origin sector, dest country, dest, value)
    let mut cells: Vec<(String, usize, String, Dest, S)> = Vec::new();

    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record)? {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 6 {
            return Err(Error::MalformedTable(format!(
                "line {line}: expected 6 fields, found {}",
                record.len()
            )));
        }
        let y: i32 = record[0].parse().map_err(|_| Error::InvalidValue {
            line,
            value: record[0].to_string(),
        })?;
        match year {
            None => year = Some(y),
            Some(prev) if prev != y => return Err(Error::MixedYears(prev, y)),
            _ => {}
        }

        let origin_sector = resolve_sector(&record[2], &opts.registry, line)?;
        let dest = resolve_dest(&record[4], opts, line)?;
        let raw: f64 = record[5].parse().map_err(|_| Error::InvalidValue {
            line,
            value: record[5].to_string(),
        })?;
        if !raw.is_finite() {
            return Err(Error::InvalidValue {
                line,
                value: record[5].to_string(),
            });
        }
        let value = if raw < 0.0 {
            report.clamped_cells += 1;
            report.clamped_mass += -raw;
            0.0
        } else {
            raw
        };
        cells.push((
            normalize_country(&record[1]),
            origin_sector,
            normalize_country(&record[3]),
            dest,
            S::from_f64_lossy(value),
        ));
    }

    let year = year.ok_or_else(|| Error::MalformedTable("empty canonical stream".into()))?;
    let mut builder =
        TableBuilder::new(year, opts.registry.clone(), opts.final_use_categories).sort_countries(true);
    for (oc, os, dc, dest, v) in cells {
        builder.add(&oc, os, &dc, dest, v)?;
    }
    Ok((builder.build()?, report))
}

fn resolve_sector(code: &str, registry: &SectorRegistry, line: u64) -> Result<usize> {
    if let Some(i) = registry.index_of(code) {
        return Ok(i);
    }
    if let Some(name) = registry.excluded_name(code) {
        return Err(Error::ExcludedSector {
            line,
            code: code.to_string(),
            name: name.to_string(),
        });
    }
    Err(Error::UnknownCode {
        line,
        code: code.to_string(),
    })
}

fn resolve_dest(code: &str, opts: &IngestOptions, line: u64) -> Result<Dest> {
    if let Some(i) = opts.registry.index_of(code) {
        return Ok(Dest::Sector(i));
    }
    if let Some(k) = parse_final_use_code(code, opts.final_use_categories) {
        return Ok(Dest::FinalUse(k));
    }
    if let Some(name) = opts.registry.excluded_name(code) {
        return Err(Error::ExcludedSector {
            line,
            code: code.to_string(),
            name: name.to_string(),
        });
    }
    Err(Error::UnknownCode {
        line,
        code: code.to_string(),
    })
}

/// Serialize a table to canonical CSV. Zero cells are omitted. `meta`
/// key/value pairs are written as `#` comment lines above the header.
pub fn write_canonical<S: Scalar, W: Write>(
    table: &MrioTable<S>,
    mut w: W,
    meta: &[(String, String)],
) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}: {v}")?;
    }
    writeln!(w, "{CANONICAL_HEADER}")?;
    let ns = table.n_sectors();
    let k = table.final_use_categories();
    let year = table.year();
    let z = table.z();
    let f = table.f();
    for (o, oc) in table.countries().iter().enumerate() {
        for os in 0..ns {
            let row = o * ns + os;
            let os_code = table.registry().code(os);
            for (d, dc) in table.countries().iter().enumerate() {
                for ds in 0..ns {
                    let v = z[[row, d * ns + ds]];
                    if v != S::zero() {
                        let ds_code = table.registry().code(ds);
                        writeln!(w, "{year},{oc},{os_code},{dc},{ds_code},{v}")?;
                    }
                }
            }
            for (d, dc) in table.countries().iter().enumerate() {
                for fk in 0..k {
                    let v = f[[row, d * k + fk]];
                    if v != S::zero() {
                        writeln!(w, "{year},{oc},{os_code},{dc},FU{},{v}", fk + 1)?;
                    }
                }
            }
        }
    }
    Ok(())
}

const MAX_HEADER_SCAN: usize = 60;
const MIN_HEADER_CODES: usize = 20;

/// Parse a WIOT sheet exported to CSV.
///
/// Expected shape: a preamble of any rows, then a column-header row whose
/// cells carry sector codes (`c1`..`c35`) and final-use codes (`c37`..`c41`)
/// for every data column, plus a nearby row carrying the destination country
/// code for the same columns. Data rows start with the supplying sector code
/// and carry the supplying country code among their first label cells.
/// Excluded-sector rows and columns are dropped, negative cells are clamped
/// to zero, and both actions are counted in the report.
pub fn parse_wiot<S: Scalar>(
    path: &Path,
    year: i32,
    opts: &IngestOptions,
) -> Result<(MrioTable<S>, IngestReport)> {
    let file = std::fs::File::open(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));

    let mut report = IngestReport::default();
    let mut preamble: Vec<csv::StringRecord> = Vec::new();
    let mut code_row: Option<csv::StringRecord> = None;
    let mut country_row: Option<csv::StringRecord> = None;
    let mut pending: Vec<csv::StringRecord> = Vec::new();

    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record)? {
        if code_row.is_none() {
            let codes = record.iter().filter(|c| wiot_code(c).is_some()).count();
            if codes >= MIN_HEADER_CODES {
                code_row = Some(record.clone());
            } else {
                preamble.push(record.clone());
                if preamble.len() > MAX_HEADER_SCAN {
                    return Err(Error::UnrecognizedLayout(
                        "no column-code header row in the first 60 rows".into(),
                    ));
                }
            }
            continue;
        }
        if country_row.is_none() {
            let offset = first_code_column(code_row.as_ref().unwrap());
            if count_country_tokens(&record, offset) >= MIN_HEADER_CODES {
                country_row = Some(record.clone());
                continue;
            }
            // Not the country row; it may live above the code row.
            if let Some(cand) = best_country_row(&preamble, offset) {
                country_row = Some(cand);
                pending.push(record.clone());
                continue;
            }
            // Neither: tolerate a couple of auxiliary header rows.
            pending.push(record.clone());
            if pending.len() > 4 {
                return Err(Error::UnrecognizedLayout(
                    "no destination-country header row near the column codes".into(),
                ));
            }
            continue;
        }
        pending.push(record.clone());
        break;
    }

    let code_row = code_row
        .ok_or_else(|| Error::UnrecognizedLayout("no column-code header row".into()))?;
    let country_row = country_row
        .ok_or_else(|| Error::UnrecognizedLayout("no destination-country header row".into()))?;

    check_file_year(&preamble, year)?;

    let offset = first_code_column(&code_row);
    let columns = build_column_map(&code_row, &country_row, offset, opts, &mut report)?;

    let mut builder = TableBuilder::<S>::new(year, opts.registry.clone(), opts.final_use_categories);
    let mut data_rows = 0usize;

    let mut handle = |rec: &csv::StringRecord, report: &mut IngestReport| -> Result<()> {
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let first = rec.get(0).unwrap_or("");
        let num = match wiot_code(first) {
            Some(n) => n,
            None => return Ok(()), // value-added block, totals, blanks
        };
        let sector = match classify_code(num, opts) {
            CodeKind::Sector(s) => s,
            CodeKind::Excluded => {
                report.dropped_excluded_rows += 1;
                return Ok(());
            }
            CodeKind::Other | CodeKind::FinalUse(_) => return Ok(()),
        };
        let origin = (1..offset.min(rec.len()))
            .map(|i| rec.get(i).unwrap_or(""))
            .find(|c| is_country_token(c))
            .map(normalize_country)
            .ok_or_else(|| {
                Error::MalformedTable(format!("line {line}: no supplying country label"))
            })?;
        data_rows += 1;
        for (j, dest) in &columns {
            let cell = rec.get(offset + j).unwrap_or("");
            if cell.is_empty() {
                continue;
            }
            let raw: f64 = cell.parse().map_err(|_| Error::InvalidValue {
                line,
                value: cell.to_string(),
            })?;
            if !raw.is_finite() {
                return Err(Error::InvalidValue {
                    line,
                    value: cell.to_string(),
                });
            }
            let v = if raw < 0.0 {
                report.clamped_cells += 1;
                report.clamped_mass += -raw;
                continue;
            } else {
                raw
            };
            if v != 0.0 {
                let (country, d) = dest;
                builder.add(&origin, sector, country, *d, S::from_f64_lossy(v))?;
            }
        }
        Ok(())
    };

    for rec in &pending {
        handle(rec, &mut report)?;
    }
    while rdr.read_record(&mut record)? {
        handle(&record, &mut report)?;
    }

    if data_rows == 0 {
        return Err(Error::UnrecognizedLayout("no data rows".into()));
    }
    Ok((builder.build()?, report))
}

enum CodeKind {
    Sector(usize),
    FinalUse(usize),
    Excluded,
    Other,
}

fn classify_code(num: u32, opts: &IngestOptions) -> CodeKind {
    let code = format!("c{num}");
    if let Some(i) = opts.registry.index_of(&code) {
        return CodeKind::Sector(i);
    }
    if opts.registry.excluded_name(&code).is_some() {
        return CodeKind::Excluded;
    }
    // Final-use categories sit right after the sector block: c37..c41 in
    // the 34+1 sector nomenclature.
    if (37..37 + opts.final_use_categories as u32).contains(&num) {
        return CodeKind::FinalUse((num - 37) as usize);
    }
    CodeKind::Other
}

fn wiot_code(cell: &str) -> Option<u32> {
    let rest = cell.strip_prefix('c').or_else(|| cell.strip_prefix('C'))?;
    if rest.is_empty() || rest.len() > 2 || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

fn is_country_token(cell: &str) -> bool {
    let t = cell.trim();
    (2..=3).contains(&t.len()) && t.bytes().all(|b| b.is_ascii_alphabetic())
}

fn first_code_column(row: &csv::StringRecord) -> usize {
    row.iter()
        .position(|c| wiot_code(c).is_some())
        .unwrap_or(0)
}

fn count_country_tokens(row: &csv::StringRecord, offset: usize) -> usize {
    row.iter().skip(offset).filter(|c| is_country_token(c)).count()
}

fn best_country_row(
    rows: &[csv::StringRecord],
    offset: usize,
) -> Option<csv::StringRecord> {
    rows.iter()
        .map(|r| (count_country_tokens(r, offset), r))
        .filter(|(n, _)| *n >= MIN_HEADER_CODES)
        .max_by_key(|(n, _)| *n)
        .map(|(_, r)| r.clone())
}

/// Standalone four-digit cells in the preamble are treated as the file's
/// year stamp; if any are present, one of them must match.
fn check_file_year(preamble: &[csv::StringRecord], year: i32) -> Result<()> {
    let mut found: Option<i32> = None;
    for row in preamble {
        for cell in row.iter() {
            let t = cell.trim();
            if t.len() == 4 && t.bytes().all(|b| b.is_ascii_digit()) {
                let y: i32 = t.parse().unwrap();
                if (1970..=2030).contains(&y) {
                    if y == year {
                        return Ok(());
                    }
                    found.get_or_insert(y);
                }
            }
        }
    }
    match found {
        Some(other) => Err(Error::YearMismatch {
            expected: year,
            found: other,
        }),
        None => Ok(()),
    }
}

fn build_column_map(
    code_row: &csv::StringRecord,
    country_row: &csv::StringRecord,
    offset: usize,
    opts: &IngestOptions,
    report: &mut IngestReport,
) -> Result<Vec<(usize, (String, Dest))>> {
    let mut columns = Vec::new();
    for (j, cell) in code_row.iter().enumerate().skip(offset) {
        let rel = j - offset;
        let Some(num) = wiot_code(cell) else {
            if !cell.is_empty() {
                report.ignored_columns += 1;
            }
            continue;
        };
        let country = country_row.get(j).unwrap_or("");
        if !is_country_token(country) {
            report.ignored_columns += 1;
            continue;
        }
        let country = normalize_country(country);
        match classify_code(num, opts) {
            CodeKind::Sector(s) => columns.push((rel, (country, Dest::Sector(s)))),
            CodeKind::FinalUse(k) => columns.push((rel, (country, Dest::FinalUse(k)))),
            CodeKind::Excluded => report.dropped_excluded_cols += 1,
            CodeKind::Other => report.ignored_columns += 1,
        }
    }
    if columns.is_empty() {
        return Err(Error::UnrecognizedLayout("no usable data columns".into()));
    }
    Ok(columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_opts() -> IngestOptions {
        IngestOptions {
            registry: SectorRegistry::custom(&["s1", "s2"]),
            final_use_categories: 2,
        }
    }

    #[test]
    fn minimal_closed_economy() {
        let src = "year,origin_country,origin_sector,dest_country,dest_code,value\n\
                   2000,X,s1,X,s1,1.5\n\
                   2000,X,s1,X,s2,2.0\n\
                   2000,X,s2,X,s1,3.0\n\
                   2000,X,s2,X,s2,4.5\n";
        let (t, report) = parse_canonical::<f64, _>(src.as_bytes(), &toy_opts()).unwrap();
        assert_eq!(t.z().shape(), &[2, 2]);
        assert_eq!(t.intermediate("X", 0, "X", 1), Some(2.0));
        assert_eq!(t.f().sum(), 0.0);
        assert_eq!(report, IngestReport::default());
    }

    #[test]
    fn duplicate_keys_are_summed() {
        let src = "year,origin_country,origin_sector,dest_country,dest_code,value\n\
                   2000,X,s1,Y,s2,3\n\
                   2000,X,s1,Y,s2,4\n";
        let (t, _) = parse_canonical::<f64, _>(src.as_bytes(), &toy_opts()).unwrap();
        assert_eq!(t.intermediate("X", 0, "Y", 1), Some(7.0));
    }

    #[test]
    fn excluded_sector_is_named() {
        let src = "year,origin_country,origin_sector,dest_country,dest_code,value\n\
                   1995,DEU,c1,DEU,c35,1.0\n";
        let err = parse_canonical::<f64, _>(src.as_bytes(), &IngestOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("c35"), "{msg}");
        assert!(msg.contains("Private Households"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn mixed_years_rejected() {
        let src = "year,origin_country,origin_sector,dest_country,dest_code,value\n\
                   2000,X,s1,X,s2,1\n\
                   2001,X,s1,X,s2,1\n";
        let err = parse_canonical::<f64, _>(src.as_bytes(), &toy_opts()).unwrap_err();
        assert!(err.to_string().contains("multiple years"));
    }

    #[test]
    fn bad_value_reports_line() {
        let src = "year,origin_country,origin_sector,dest_country,dest_code,value\n\
                   2000,X,s1,X,s2,1\n\
                   2000,X,s2,X,s1,oops\n";
        let err = parse_canonical::<f64, _>(src.as_bytes(), &toy_opts()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let nan = "year,origin_country,origin_sector,dest_country,dest_code,value\n\
                   2000,X,s1,X,s2,NaN\n";
        assert!(parse_canonical::<f64, _>(nan.as_bytes(), &toy_opts()).is_err());
    }

    #[test]
    fn unknown_code_reports_line() {
        let src = "year,origin_country,origin_sector,dest_country,dest_code,value\n\
                   2000,X,s1,X,FU9,1\n";
        let err = parse_canonical::<f64, _>(src.as_bytes(), &toy_opts()).unwrap_err();
        assert!(err.to_string().contains("FU9"));
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn header_must_match_exactly() {
        let src = "year,origin,origin_sector,dest_country,dest_code,value\n";
        let err = parse_canonical::<f64, _>(src.as_bytes(), &toy_opts()).unwrap_err();
        assert!(matches!(err, Error::CanonicalHeader { .. }));
    }

    #[test]
    fn negative_canonical_cells_are_clamped_and_counted() {
        let src = "year,origin_country,origin_sector,dest_country,dest_code,value\n\
                   2000,X,s1,X,FU1,-2.0\n\
                   2000,X,s1,X,s2,1.0\n";
        let (t, report) = parse_canonical::<f64, _>(src.as_bytes(), &toy_opts()).unwrap();
        assert_eq!(report.clamped_cells, 1);
        assert_eq!(report.clamped_mass, 2.0);
        assert_eq!(t.final_use("X", 0, "X", 0), Some(0.0));
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let src = "year,origin_country,origin_sector,dest_country,dest_code,value\n\
                   2000,B,s1,A,s2,0.1\n\
                   2000,A,s1,B,FU2,3.25\n\
                   2000,A,s2,A,s1,7.0\n\
                   2000,B,s2,B,s2,2.5\n";
        let opts = toy_opts();
        let (t1, _) = parse_canonical::<f64, _>(src.as_bytes(), &opts).unwrap();
        let mut buf = Vec::new();
        write_canonical(&t1, &mut buf, &[("note".into(), "test".into())]).unwrap();
        let (t2, _) = parse_canonical::<f64, _>(buf.as_slice(), &opts).unwrap();
        assert_eq!(t1, t2);
    }
}
