//! PLCC / SRCC between image-quality and panoptic-quality series.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest series length for which a coefficient is reported.
pub const MIN_SAMPLES: usize = 3;

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < MIN_SAMPLES {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("series contain non-finite values".into()));
    }
    Ok(())
}

/// Pearson linear correlation coefficient.
pub fn plcc(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant series".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            out[k] = r;
        }
        i = j;
    }
    out
}

/// Spearman rank correlation: Pearson correlation of the tie-averaged ranks.
pub fn srcc(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    plcc(&ranks(x), &ranks(y))
}

/// Key of a metric row: image, factor and severity. Empty strings and
/// severity 0 denote "not applicable" (e.g. clean references).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowKey {
    pub image_id: String,
    pub factor: String,
    pub severity: u8,
}

/// A wide table of numeric columns keyed by [`RowKey`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricTable {
    pub columns: Vec<String>,
    pub rows: BTreeMap<RowKey, Vec<Option<f64>>>,
}

const KEY_COLUMNS: [&str; 3] = ["image_id", "factor", "severity"];

impl MetricTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, key: RowKey, values: Vec<Option<f64>>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(Error::InvalidArgument(format!(
                "row has {} values for {} columns",
                values.len(),
                self.columns.len()
            )));
        }
        if self.rows.insert(key.clone(), values).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate row {key:?}")));
        }
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Reads a CSV with `image_id`, `factor`, `severity` columns (any subset
    /// may be absent) plus numeric columns. Empty cells are missing values;
    /// columns holding any other non-numeric text are dropped.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => Error::Csv(e),
        })?;
        let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut records = Vec::new();
        for r in reader.records() {
            records.push(r?);
        }
        let key_idx: Vec<Option<usize>> = KEY_COLUMNS.iter().map(|k| headers.iter().position(|h| h == k)).collect();
        let numeric: Vec<usize> = (0..headers.len())
            .filter(|i| !KEY_COLUMNS.contains(&headers[*i].as_str()))
            .filter(|&i| {
                records.iter().all(|r| {
                    let v = r.get(i).unwrap_or("").trim();
                    v.is_empty() || v.parse::<f64>().is_ok()
                })
            })
            .collect();
        let mut table = MetricTable::new(numeric.iter().map(|&i| headers[i].clone()).collect());
        for r in &records {
            let field = |i: Option<usize>| i.and_then(|i| r.get(i)).unwrap_or("").trim().to_string();
            let sev = field(key_idx[2]);
            let severity = if sev.is_empty() {
                0
            } else {
                sev.parse::<u8>()
                    .map_err(|_| Error::InvalidArgument(format!("bad severity `{sev}` in {}", path.display())))?
            };
            let key = RowKey {
                image_id: field(key_idx[0]),
                factor: field(key_idx[1]),
                severity,
            };
            let values = numeric
                .iter()
                .map(|&i| {
                    let v = r.get(i).unwrap_or("").trim();
                    if v.is_empty() {
                        None
                    } else {
                        v.parse::<f64>().ok()
                    }
                })
                .collect();
            table.insert(key, values)?;
        }
        Ok(table)
    }

    /// Mean of each column per `(factor, severity)`, ignoring missing values.
    pub fn factor_means(&self) -> MetricTable {
        let mut groups: BTreeMap<(String, u8), Vec<(f64, usize)>> = BTreeMap::new();
        for (k, vals) in &self.rows {
            let acc = groups
                .entry((k.factor.clone(), k.severity))
                .or_insert_with(|| vec![(0.0, 0); self.columns.len()]);
            for (a, v) in acc.iter_mut().zip(vals) {
                if let Some(v) = v {
                    a.0 += v;
                    a.1 += 1;
                }
            }
        }
        let mut out = MetricTable::new(self.columns.clone());
        for ((factor, severity), acc) in groups {
            let key = RowKey {
                image_id: String::new(),
                factor,
                severity,
            };
            let vals = acc.iter().map(|(s, n)| (*n > 0).then(|| s / *n as f64)).collect();
            out.rows.insert(key, vals);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMode {
    /// Correlate per-image rows joined on `(image_id, factor, severity)`.
    Image,
    /// Average rows per `(factor, severity)` first, then correlate.
    #[default]
    Factor,
}

impl std::str::FromStr for CorrelationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "image" => Ok(CorrelationMode::Image),
            "factor" => Ok(CorrelationMode::Factor),
            other => Err(Error::InvalidArgument(format!("unknown correlation mode `{other}`"))),
        }
    }
}

/// One coefficient matrix; `None` marks an undefined cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub plcc: Vec<Vec<Option<f64>>>,
    pub srcc: Vec<Vec<Option<f64>>>,
    /// Samples (or averaged groups) behind each cell.
    pub n: Vec<Vec<usize>>,
}

impl CorrelationMatrix {
    fn empty(rows: usize, cols: usize) -> Self {
        Self {
            plcc: vec![vec![None; cols]; rows],
            srcc: vec![vec![None; cols]; rows],
            n: vec![vec![0; cols]; rows],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub mode: CorrelationMode,
    /// Image-quality metric names.
    pub rows: Vec<String>,
    /// Panoptic-quality series names.
    pub cols: Vec<String>,
    /// Matrices by aggregation: `pooled` always; in factor mode also
    /// `mean_over_factors` (per-factor correlation across severities) and
    /// `mean_over_severities` (per-severity correlation across factors).
    pub matrices: BTreeMap<String, CorrelationMatrix>,
    /// Cells that could not be computed, with the reason.
    pub undefined: Vec<String>,
}

impl CorrelationReport {
    pub fn pooled(&self) -> &CorrelationMatrix {
        &self.matrices["pooled"]
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# Correlation between image quality and panoptic quality\n");
        let _ = writeln!(s, "Mode: `{}`\n", match self.mode {
            CorrelationMode::Image => "image",
            CorrelationMode::Factor => "factor",
        });
        for (name, m) in &self.matrices {
            let _ = writeln!(s, "## {name}\n");
            let mut header = String::from("| metric |");
            let mut rule = String::from("|---|");
            for c in &self.cols {
                let _ = write!(header, " PLCC {c} | SRCC {c} |");
                rule.push_str("---:|---:|");
            }
            let _ = writeln!(s, "{header}\n{rule}");
            for (i, r) in self.rows.iter().enumerate() {
                let mut line = format!("| {r} |");
                for j in 0..self.cols.len() {
                    let _ = write!(line, " {} | {} |", fmt_cell(m.plcc[i][j]), fmt_cell(m.srcc[i][j]));
                }
                let _ = writeln!(s, "{line}");
            }
            s.push('\n');
        }
        if !self.undefined.is_empty() {
            let _ = writeln!(s, "## Undefined cells\n");
            for u in &self.undefined {
                let _ = writeln!(s, "- {u}");
            }
        }
        s
    }
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

type Pairs = Vec<(f64, f64)>;

/// Joined `(iq, pq)` samples per grouping label.
fn joined(
    iq: &MetricTable,
    pq: &MetricTable,
    ic: usize,
    pc: usize,
    group: impl Fn(&RowKey) -> String,
) -> BTreeMap<String, Pairs> {
    let mut out: BTreeMap<String, Pairs> = BTreeMap::new();
    for (k, vals) in &iq.rows {
        let Some(pvals) = pq.rows.get(k) else { continue };
        if let (Some(a), Some(b)) = (vals[ic], pvals[pc]) {
            out.entry(group(k)).or_default().push((a, b));
        }
    }
    out
}

fn coefficients(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    Ok((plcc(&x, &y)?, srcc(&x, &y)?))
}

/// Correlates every `iq_cols` column against every `pq_cols` column.
pub fn correlation_report(
    iq: &MetricTable,
    pq: &MetricTable,
    iq_cols: &[String],
    pq_cols: &[String],
    mode: CorrelationMode,
) -> Result<CorrelationReport> {
    let lookup = |t: &MetricTable, names: &[String], what: &str| -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                t.column_index(n)
                    .ok_or_else(|| Error::InvalidArgument(format!("{what} table has no column `{n}`")))
            })
            .collect()
    };
    let (iq_t, pq_t) = match mode {
        CorrelationMode::Image => (iq.clone(), pq.clone()),
        CorrelationMode::Factor => (iq.factor_means(), pq.factor_means()),
    };
    let ii = lookup(&iq_t, iq_cols, "image-quality")?;
    let pi = lookup(&pq_t, pq_cols, "panoptic-quality")?;
    if !iq_t.rows.keys().any(|k| pq_t.rows.contains_key(k)) {
        return Err(Error::EmptyJoin("no key appears in both tables".into()));
    }

    let (nr, nc) = (iq_cols.len(), pq_cols.len());
    let mut matrices = BTreeMap::new();
    let mut undefined = Vec::new();
    let mut pooled = CorrelationMatrix::empty(nr, nc);
    let groupings: Vec<(&str, fn(&RowKey) -> String)> = match mode {
        CorrelationMode::Image => vec![],
        CorrelationMode::Factor => vec![
            ("mean_over_factors", |k| k.factor.clone()),
            ("mean_over_severities", |k| k.severity.to_string()),
        ],
    };
    let mut grouped: Vec<CorrelationMatrix> = groupings.iter().map(|_| CorrelationMatrix::empty(nr, nc)).collect();

    for (i, &ic) in ii.iter().enumerate() {
        for (j, &pc) in pi.iter().enumerate() {
            let cell = format!("{} x {}", iq_cols[i], pq_cols[j]);
            let all = joined(&iq_t, &pq_t, ic, pc, |_| String::new());
            let samples = all.into_values().next().unwrap_or_default();
            pooled.n[i][j] = samples.len();
            match coefficients(&samples) {
                Ok((p, s)) => {
                    pooled.plcc[i][j] = Some(p);
                    pooled.srcc[i][j] = Some(s);
                }
                Err(e) => undefined.push(format!("pooled {cell}: {e}")),
            }
            for ((name, key), m) in groupings.iter().zip(grouped.iter_mut()) {
                let (mut ps, mut ss) = (Vec::new(), Vec::new());
                for (label, samples) in joined(&iq_t, &pq_t, ic, pc, key) {
                    match coefficients(&samples) {
                        Ok((p, s)) => {
                            ps.push(p);
                            ss.push(s);
                        }
                        Err(e) => undefined.push(format!("{name} {cell} [{label}]: {e}")),
                    }
                }
                m.n[i][j] = ps.len();
                if !ps.is_empty() {
                    m.plcc[i][j] = Some(ps.iter().sum::<f64>() / ps.len() as f64);
                    m.srcc[i][j] = Some(ss.iter().sum::<f64>() / ss.len() as f64);
                }
            }
        }
    }
    matrices.insert("pooled".to_string(), pooled);
    for ((name, _), m) in groupings.iter().zip(grouped) {
        matrices.insert(name.to_string(), m);
    }
    Ok(CorrelationReport {
        mode,
        rows: iq_cols.to_vec(),
        cols: pq_cols.to_vec(),
        matrices,
        undefined,
    })
}
