//! Output headers and the on-disk formats: CSV tables with a `#` header
//! block, JSON-lines with a leading header record, and JSON reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use gpvortex::{FieldPair, RadialGrid, VortexProfile};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{io_error, CliError, CliResult};

pub const TOOL: &str = "gpvortex";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Hash of the run configuration together with the command parameters.
    pub config_hash: String,
    pub meta: BTreeMap<String, String>,
}

impl Header {
    pub fn new(command: &str, cfg: &RunConfig, params: &[(&str, String)]) -> Self {
        let mut h = Sha256::new();
        h.update(cfg.to_toml().as_bytes());
        h.update(command.as_bytes());
        for (k, v) in params {
            h.update(format!("\n{k}={v}").as_bytes());
        }
        let meta = params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config_hash: hex::encode(h.finalize()),
            meta,
        }
    }

    /// Attach a result that does not enter the hash.
    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> CliResult<f64> {
        self.get(key)
            .ok_or_else(|| CliError::Usage(format!("header has no `{key}`")))?
            .parse()
            .map_err(|_| CliError::Usage(format!("header entry `{key}` is not a number")))
    }

    fn comment_block(&self) -> String {
        let mut s = format!("# {} {}\n# command = {}\n# config_hash = {}\n", self.tool, self.version, self.command, self.config_hash);
        for (k, v) in &self.meta {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s
    }

    fn parse_comments(lines: &[&str]) -> CliResult<Self> {
        let first = lines.first().and_then(|l| l.strip_prefix("# ")).unwrap_or("");
        let mut parts = first.split_whitespace();
        let (tool, version) = match (parts.next(), parts.next()) {
            (Some(t), Some(v)) if t == TOOL => (t.to_string(), v.to_string()),
            _ => return Err(CliError::Usage("file carries no gpvortex header".into())),
        };
        let mut meta = BTreeMap::new();
        for l in &lines[1..] {
            if let Some((k, v)) = l.trim_start_matches('#').split_once(" = ") {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let command = meta.remove("command").unwrap_or_default();
        let config_hash = meta.remove("config_hash").unwrap_or_default();
        Ok(Self { tool, version, command, config_hash, meta })
    }
}

/// Floats are written in shortest round-trip exponent form.
pub fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Numeric table with named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> CliResult<Vec<f64>> {
        let j = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Usage(format!("table has no column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Write `bytes` to `path`, or to standard output when no path is given.
pub fn save(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| io_error(Path::new("<stdout>"), "writing", e));
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, "creating", e))?;
    }
    fs::write(path, bytes).map_err(|e| io_error(path, "writing", e))
}

pub fn csv_bytes(header: &Header, table: &Table) -> CliResult<Vec<u8>> {
    let mut out = header.comment_block().into_bytes();
    let csv_err = |e: csv::Error| CliError::Failed(format!("csv encoding: {e}"));
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&x| fmt(x))).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Failed(format!("csv encoding: {e}")))?;
    drop(w);
    Ok(out)
}

pub fn write_csv(path: &Path, header: &Header, table: &Table) -> CliResult<()> {
    save(Some(path), &csv_bytes(header, table)?)
}

pub fn read_csv(path: &Path) -> CliResult<(Header, Table)> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, "reading", e))?;
    let comments: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    let header = Header::parse_comments(&comments)?;
    Ok((header, parse_table(path, &text)?))
}

/// Numeric CSV with or without a header block.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, "reading", e))?;
    parse_table(path, &text)
}

fn parse_table(path: &Path, text: &str) -> CliResult<Table> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let bad = |e: String| CliError::Usage(format!("{}: {e}", path.display()));
    let columns = rdr.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = rec.iter().map(|s| s.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>().map_err(|e| bad(e.to_string()))?;
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

fn json_err(e: serde_json::Error) -> CliError {
    CliError::Failed(format!("json encoding: {e}"))
}

pub fn jsonl_bytes<T: Serialize>(header: &Header, records: &[T]) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    serde_json::to_writer(&mut out, &serde_json::json!({ "header": header })).map_err(json_err)?;
    out.push(b'\n');
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(json_err)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, header: &Header, records: &[T]) -> CliResult<()> {
    save(Some(path), &jsonl_bytes(header, records)?)
}

pub fn read_jsonl(path: &Path) -> CliResult<(Header, Vec<serde_json::Value>)> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, "reading", e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let bad = |e: serde_json::Error| CliError::Usage(format!("{}: {e}", path.display()));
    #[derive(Deserialize)]
    struct First {
        header: Header,
    }
    let first: First = serde_json::from_str(lines.next().unwrap_or("")).map_err(bad)?;
    let records = lines.map(serde_json::from_str).collect::<Result<Vec<_>, _>>().map_err(bad)?;
    Ok((first.header, records))
}

pub fn json_bytes<T: Serialize>(header: &Header, body: &T) -> CliResult<Vec<u8>> {
    let doc = serde_json::json!({ "header": header, "body": body });
    let mut out = serde_json::to_vec_pretty(&doc).map_err(json_err)?;
    out.push(b'\n');
    Ok(out)
}

/// Header of any file written by this tool.
pub fn read_header(path: &Path) -> CliResult<Header> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, "reading", e))?;
    if text.starts_with('#') {
        let comments: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
        return Header::parse_comments(&comments);
    }
    #[derive(Deserialize)]
    struct Doc {
        header: Header,
    }
    let first = text.lines().next().unwrap_or("");
    let doc: Doc = serde_json::from_str(first)
        .or_else(|_| serde_json::from_str(&text))
        .map_err(|e| CliError::Usage(format!("{}: no readable header ({e})", path.display())))?;
    Ok(doc.header)
}

pub const FIELD_COLUMNS: [&str; 5] = ["r", "phi_re", "phi_im", "psi_re", "psi_im"];

fn field_row(r: f64, a: Complex64, b: Complex64) -> Vec<f64> {
    vec![r, a.re, a.im, b.re, b.im]
}

pub fn field_table(f: &FieldPair) -> Table {
    let mut t = Table::new(&FIELD_COLUMNS);
    for (i, &r) in f.grid.nodes().iter().enumerate() {
        t.rows.push(field_row(r, f.phi[i], f.psi[i]));
    }
    t
}

/// Field pair from the named columns; other columns are ignored.
pub fn field_from_table(t: &Table) -> CliResult<FieldPair> {
    let col = |n| t.column(n);
    let r = col("r")?;
    let grid = RadialGrid::new(r).map_err(|e| CliError::Usage(format!("field grid: {e}")))?;
    let (pr, pi, sr, si) = (col("phi_re")?, col("phi_im")?, col("psi_re")?, col("psi_im")?);
    let phi = pr.iter().zip(&pi).map(|(&a, &b)| Complex64::new(a, b)).collect();
    let psi = sr.iter().zip(&si).map(|(&a, &b)| Complex64::new(a, b)).collect();
    FieldPair::new(grid, phi, psi).map_err(|e| CliError::Usage(format!("field samples: {e}")))
}

/// Field samples; the header block is optional for hand-made inputs.
pub fn read_field(path: &Path) -> CliResult<FieldPair> {
    field_from_table(&read_table(path)?)
}

pub fn profile_table(p: &VortexProfile) -> Table {
    let mut t = Table::new(&["r", "rho", "rho_prime"]);
    for (i, &r) in p.grid.nodes().iter().enumerate() {
        t.rows.push(vec![r, p.rho[i], p.rho_prime[i]]);
    }
    t
}

/// Header entries needed to rebuild the profile from its CSV.
pub fn profile_params(p: &VortexProfile) -> Vec<(&'static str, String)> {
    vec![
        ("n", p.n.to_string()),
        ("alpha_star", fmt(p.alpha_star)),
        ("r_switch", fmt(p.r_switch)),
        ("k_tail", fmt(p.k_tail)),
    ]
}

pub fn read_profile(path: &Path) -> CliResult<VortexProfile> {
    let (h, t) = read_csv(path)?;
    if h.command != "profile" {
        return Err(CliError::Usage(format!("{} was written by `{}`, not `profile`", path.display(), h.command)));
    }
    let n = h.get_f64("n")? as u32;
    let grid = RadialGrid::new(t.column("r")?).map_err(|e| CliError::Usage(format!("profile grid: {e}")))?;
    Ok(VortexProfile {
        n,
        alpha_star: h.get_f64("alpha_star")?,
        grid,
        rho: t.column("rho")?,
        rho_prime: t.column("rho_prime")?,
        r_switch: h.get_f64("r_switch")?,
        k_tail: h.get_f64("k_tail")?,
    })
}

/// SHA-256 of a file's bytes, for headers of derived outputs.
pub fn file_digest(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| io_error(path, "reading", e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let grid = RadialGrid::uniform(0.1, 3.0, 30).unwrap();
        let f = FieldPair::from_fn(&grid, |r| (Complex64::new(r.sin(), 1e-300), Complex64::new(-r / 3.0, r.exp())));
        let h = Header::new("test", &RunConfig::default(), &[("a", "1".into())]);
        write_csv(&path, &h, &field_table(&f)).unwrap();
        let g = read_field(&path).unwrap();
        assert_eq!(read_csv(&path).unwrap().0, h);
        assert_eq!(g, f);
    }

    #[test]
    fn jsonl_header_comes_first() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.jsonl");
        let h = Header::new("roots", &RunConfig::default(), &[]);
        write_jsonl(&path, &h, &[serde_json::json!({"x": 1}), serde_json::json!({"x": 2})]).unwrap();
        let (h2, recs) = read_jsonl(&path).unwrap();
        assert_eq!(h2, h);
        assert_eq!(recs.len(), 2);
    }

    #[test]
    fn hash_depends_on_parameters() {
        let cfg = RunConfig::default();
        let a = Header::new("x", &cfg, &[("t", "1".into())]);
        let b = Header::new("x", &cfg, &[("t", "2".into())]);
        assert_ne!(a.config_hash, b.config_hash);
        assert_eq!(a.config_hash, Header::new("x", &cfg, &[("t", "1".into())]).config_hash);
    }
}
