//! CSV and JSON file formats.
//!
//! Quarters are written as `2008Q3`. Floats use the shortest representation
//! that round-trips, so writing the same values twice gives identical bytes.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ScenarioFile, Trajectory};
use crate::econometrics::{DecayObservation, InstitutionSeries, PanelSeries};
use crate::error::{Error, Result};
use crate::graph::{ExposureRecord, Institution, NetworkStats, Quarter};
use crate::policy::PolicyConfig;
use crate::spectral::SpectrumResult;

/// Parses `2008Q3` (case-insensitive `q`).
pub fn parse_quarter(s: &str) -> Result<Quarter> {
    s.parse()
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::NotFound(format!("{}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = reader(path)?;
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok(rows)
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::NotFound(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

pub fn read_institutions(path: &Path) -> Result<Vec<Institution>> {
    read_rows(path)
}

pub fn write_institutions(path: &Path, institutions: &[Institution]) -> Result<()> {
    write_rows(path, institutions)
}

#[derive(Serialize, Deserialize)]
struct ExposureRow {
    quarter: String,
    lender: String,
    borrower: String,
    #[serde(serialize_with = "shortest")]
    loans: f64,
    #[serde(serialize_with = "shortest")]
    securities: f64,
    #[serde(serialize_with = "shortest")]
    derivatives: f64,
    #[serde(serialize_with = "shortest")]
    guarantees: f64,
}

// Shortest round-trip form, so `2` stays `2` rather than becoming `2.0`.
fn shortest<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Reads exposure records; every record comes back with `observed = true`.
pub fn read_exposures(path: &Path) -> Result<Vec<ExposureRecord>> {
    read_rows::<ExposureRow>(path)?
        .into_iter()
        .map(|r| {
            Ok(ExposureRecord {
                quarter: parse_quarter(&r.quarter)?,
                lender: r.lender,
                borrower: r.borrower,
                loans: r.loans,
                securities: r.securities,
                derivatives: r.derivatives,
                guarantees: r.guarantees,
                observed: true,
            })
        })
        .collect()
}

pub fn write_exposures(path: &Path, records: &[ExposureRecord]) -> Result<()> {
    write_rows(
        path,
        records.iter().map(|r| ExposureRow {
            quarter: r.quarter.to_string(),
            lender: r.lender.clone(),
            borrower: r.borrower.clone(),
            loans: r.loans,
            securities: r.securities,
            derivatives: r.derivatives,
            guarantees: r.guarantees,
        }),
    )
}

#[derive(Serialize, Deserialize)]
struct MaskRow {
    quarter: String,
    lender: String,
    borrower: String,
}

/// Observed `(quarter, lender, borrower)` pairs.
pub type Mask = BTreeSet<(Quarter, String, String)>;

pub fn read_mask(path: &Path) -> Result<Mask> {
    read_rows::<MaskRow>(path)?
        .into_iter()
        .map(|r| Ok((parse_quarter(&r.quarter)?, r.lender, r.borrower)))
        .collect()
}

pub fn write_mask(path: &Path, mask: &Mask) -> Result<()> {
    write_rows(
        path,
        mask.iter().map(|(q, l, b)| MaskRow { quarter: q.to_string(), lender: l.clone(), borrower: b.clone() }),
    )
}

/// Reads `quarter,lambda2,<control>...`; every column after `lambda2` is a
/// control series.
pub fn read_panel(path: &Path, crisis_quarter: Quarter) -> Result<PanelSeries> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("quarter") || headers.get(1) != Some("lambda2") {
        return Err(Error::InvalidInput(format!("{}: header must start with quarter,lambda2", path.display())));
    }
    let names: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    let mut quarters = Vec::new();
    let mut lambda2 = Vec::new();
    let mut columns = vec![Vec::new(); names.len()];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k).unwrap_or("").parse().map_err(|_| {
                Error::InvalidInput(format!("{}: row {}: column {} is not a number", path.display(), line + 2, k + 1))
            })
        };
        quarters.push(parse_quarter(rec.get(0).unwrap_or(""))?);
        lambda2.push(num(1)?);
        for (k, col) in columns.iter_mut().enumerate() {
            col.push(num(k + 2)?);
        }
    }
    PanelSeries::new(quarters, lambda2, names.into_iter().zip(columns).collect(), crisis_quarter)
}

pub fn write_panel(path: &Path, panel: &PanelSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["quarter".to_string(), "lambda2".to_string()];
    header.extend(panel.controls.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for (t, q) in panel.quarters.iter().enumerate() {
        let mut row = vec![q.to_string(), panel.lambda2[t].to_string()];
        row.extend(panel.controls.iter().map(|(_, v)| v[t].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reported lending and borrowing totals of one institution in one quarter.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub quarter: Quarter,
    pub id: String,
    pub out_total: f64,
    pub in_total: f64,
}

#[derive(Serialize, Deserialize)]
struct MarginalRow {
    quarter: String,
    id: String,
    out_total: f64,
    in_total: f64,
}

/// Reads `quarter,id,out_total,in_total`.
pub fn read_marginals(path: &Path) -> Result<Vec<Marginal>> {
    read_rows::<MarginalRow>(path)?
        .into_iter()
        .map(|r| {
            if !(r.out_total >= 0.0 && r.in_total >= 0.0) {
                return Err(Error::InvalidInput(format!("negative total for {} in {}", r.id, r.quarter)));
            }
            Ok(Marginal { quarter: parse_quarter(&r.quarter)?, id: r.id, out_total: r.out_total, in_total: r.in_total })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct OutcomeRow {
    quarter: String,
    id: String,
    outcome: f64,
}

/// Institution outcomes in long form `quarter,id,outcome`.
pub fn write_outcomes(path: &Path, quarters: &[Quarter], institutions: &[InstitutionSeries]) -> Result<()> {
    let rows = quarters.iter().enumerate().flat_map(|(t, q)| {
        institutions.iter().map(move |s| OutcomeRow { quarter: q.to_string(), id: s.id.clone(), outcome: s.outcomes[t] })
    });
    write_rows(path, rows)
}

/// Reads long-form outcomes back into aligned series. Quarters come back
/// sorted and institutions in order of first appearance; every institution
/// must have exactly one value per quarter.
pub fn read_outcomes(path: &Path) -> Result<(Vec<Quarter>, Vec<InstitutionSeries>)> {
    let rows: Vec<OutcomeRow> = read_rows(path)?;
    let mut parsed = Vec::with_capacity(rows.len());
    for r in rows {
        parsed.push((parse_quarter(&r.quarter)?, r.id, r.outcome));
    }
    let quarters: Vec<Quarter> = parsed.iter().map(|r| r.0).collect::<BTreeSet<_>>().into_iter().collect();
    let mut ids: Vec<String> = Vec::new();
    for (_, id, _) in &parsed {
        if !ids.contains(id) {
            ids.push(id.clone());
        }
    }
    let mut values = vec![vec![None; quarters.len()]; ids.len()];
    for (q, id, v) in parsed {
        let t = quarters.binary_search(&q).expect("collected above");
        let i = ids.iter().position(|x| *x == id).expect("collected above");
        if values[i][t].replace(v).is_some() {
            return Err(Error::InvalidInput(format!("duplicate outcome for {id} in {q}")));
        }
    }
    let series = ids
        .into_iter()
        .zip(values)
        .map(|(id, vals)| {
            let outcomes = vals
                .into_iter()
                .enumerate()
                .map(|(t, v)| v.ok_or_else(|| Error::InvalidInput(format!("no outcome for {id} in {}", quarters[t]))))
                .collect::<Result<Vec<f64>>>()?;
            Ok(InstitutionSeries { id, outcomes })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((quarters, series))
}

pub fn read_decay(path: &Path) -> Result<Vec<DecayObservation>> {
    read_rows(path)
}

pub fn write_decay(path: &Path, obs: &[DecayObservation]) -> Result<()> {
    write_rows(path, obs)
}

/// One entry of the spectrum JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub quarter: String,
    pub lambda2: f64,
    pub residual: f64,
    pub iterations: usize,
    pub fiedler: Vec<f64>,
    pub node_ids: Vec<String>,
}

impl SpectrumRecord {
    pub fn new(quarter: Quarter, s: &SpectrumResult) -> Self {
        Self {
            quarter: quarter.to_string(),
            lambda2: s.lambda2,
            residual: s.residual,
            iterations: s.iterations,
            fiedler: s.fiedler.clone(),
            node_ids: s.node_ids.clone(),
        }
    }
}

/// One row of the per-quarter statistics CSV. Failed quarters keep their row
/// with empty numbers and a note in `flags`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub quarter: String,
    pub lambda2: Option<f64>,
    pub n_banks: Option<usize>,
    pub density: Option<f64>,
    pub clustering: Option<f64>,
    pub herfindahl: Option<f64>,
    pub avg_path_length: Option<f64>,
    pub flags: String,
}

impl StatsRow {
    pub fn from_stats(quarter: Quarter, s: &NetworkStats, flags: String) -> Self {
        Self {
            quarter: quarter.to_string(),
            lambda2: Some(s.lambda2),
            n_banks: Some(s.n_banks),
            density: Some(s.density),
            clustering: Some(s.clustering),
            herfindahl: Some(s.herfindahl),
            avg_path_length: s.avg_path_length,
            flags,
        }
    }

    pub fn failed(quarter: Quarter, flags: String) -> Self {
        Self {
            quarter: quarter.to_string(),
            lambda2: None,
            n_banks: None,
            density: None,
            clustering: None,
            herfindahl: None,
            avg_path_length: None,
            flags,
        }
    }
}

pub fn write_stats(path: &Path, rows: &[StatsRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_stats(path: &Path) -> Result<Vec<StatsRow>> {
    read_rows(path)
}

#[derive(Serialize)]
struct TrajectoryRow<'a> {
    t: f64,
    node_id: &'a str,
    stress: f64,
}

/// Long-form trajectory `t,node_id,stress`.
pub fn write_trajectory(path: &Path, node_ids: &[String], traj: &Trajectory) -> Result<()> {
    let rows = traj.times.iter().zip(&traj.states).flat_map(|(&t, x)| {
        node_ids.iter().enumerate().map(move |(i, id)| TrajectoryRow { t, node_id: id, stress: x[i] })
    });
    write_rows(path, rows)
}

pub fn read_scenario(path: &Path) -> Result<ScenarioFile> {
    read_json(path)
}

/// A single policy object or an array of them.
pub fn read_policies(path: &Path) -> Result<Vec<PolicyConfig>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(PolicyConfig),
        Many(Vec<PolicyConfig>),
    }
    Ok(match read_json::<OneOrMany>(path)? {
        OneOrMany::One(p) => vec![p],
        OneOrMany::Many(v) => v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_parsing() {
        assert_eq!(parse_quarter("2008Q3").unwrap(), Quarter::from_year_quarter(2008, 3));
        assert_eq!(parse_quarter(" 1999q1 ").unwrap().to_string(), "1999Q1");
        for bad in ["2008", "2008Q5", "Q3", "2008Q0", "abcQ1"] {
            assert!(parse_quarter(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn exposure_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        let recs = vec![ExposureRecord {
            quarter: Quarter::from_year_quarter(2007, 2),
            lender: "a".into(),
            borrower: "b".into(),
            loans: 0.1,
            securities: 1e-17,
            derivatives: 12345.678,
            guarantees: 0.0,
            observed: true,
        }];
        write_exposures(&path, &recs).unwrap();
        assert_eq!(read_exposures(&path).unwrap(), recs);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("quarter,lender,borrower,loans,securities,derivatives,guarantees\n2007Q2,a,b,"));
    }

    #[test]
    fn institutions_allow_missing_coordinates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("i.csv");
        std::fs::write(&path, "id,name,country,assets,equity,lat,lon\nx,X Bank,US,100,10,,\ny,Y,GB,50,5,51.5,-0.1\n").unwrap();
        let inst = read_institutions(&path).unwrap();
        assert_eq!(inst[0].lat, None);
        assert_eq!(inst[1].lon, Some(-0.1));
    }

    #[test]
    fn panel_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let q: Vec<Quarter> = (0..3).map(|k| Quarter::from_year_quarter(2008, 1).offset(k)).collect();
        let p = PanelSeries::new(q.clone(), vec![1.0, 2.5, 3.0], vec![("vix".into(), vec![20.0, 30.0, 25.0])], q[1]).unwrap();
        write_panel(&path, &p).unwrap();
        assert_eq!(read_panel(&path, q[1]).unwrap(), p);
    }

    #[test]
    fn outcomes_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("o.csv");
        let q: Vec<Quarter> = (0..2).map(|k| Quarter(8000 + k)).collect();
        let s = vec![
            InstitutionSeries { id: "b".into(), outcomes: vec![1.0, 2.0] },
            InstitutionSeries { id: "a".into(), outcomes: vec![3.0, 4.0] },
        ];
        write_outcomes(&path, &q, &s).unwrap();
        assert_eq!(read_outcomes(&path).unwrap(), (q, s));
    }

    #[test]
    fn policies_accept_object_or_array() {
        let dir = tempfile::tempdir().unwrap();
        let one = dir.path().join("one.json");
        std::fs::write(&one, r#"{"mode": "uniform", "alpha": 0.01}"#).unwrap();
        assert_eq!(read_policies(&one).unwrap().len(), 1);
        let many = dir.path().join("many.json");
        std::fs::write(&many, r#"[{"mode": "uniform", "alpha": 0.01}, {"mode": "size_based", "alpha": 0.1, "top_m": 3}]"#).unwrap();
        assert_eq!(read_policies(&many).unwrap()[1].top_m, Some(3));
    }

    #[test]
    fn missing_file_is_not_found() {
        assert!(matches!(read_mask(Path::new("/nonexistent/mask.csv")), Err(Error::NotFound(_))));
    }
}
