use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Provenance shared by every artifact of one run.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub budget_points: u128,
    /// Work counted against the budget, summed over the run.
    pub points_used: u128,
}

impl Meta {
    fn comment_lines(&self) -> String {
        format!(
            "# tool: {} {}\n# command: {}\n# config_sha256: {}\n# budget_points: {}\n# points_used: {}\n# timings: timings.json\n",
            self.tool, self.version, self.command, self.config_sha256, self.budget_points, self.points_used
        )
    }
}

/// A CSV table with optional extra `#` comment lines after the header block.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    fn render(&self, meta: &Meta) -> Vec<u8> {
        let mut out = meta.comment_lines().into_bytes();
        for n in &self.notes {
            out.extend_from_slice(format!("# {n}\n").as_bytes());
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.extend(w.into_inner().expect("in-memory flush"));
        out
    }
}

#[derive(Debug)]
enum Pending {
    Raw(Vec<u8>),
    Table(Table),
    Json(serde_json::Value),
}

/// Artifacts of one run, held in memory until the run has finished so a
/// failed run leaves nothing behind. Headers are rendered at the end, once
/// the budget counters are final.
#[derive(Debug)]
pub struct Bundle {
    pub meta: Meta,
    files: Vec<(String, Pending)>,
    started: Instant,
    wall_clock: SystemTime,
    steps: Vec<(String, f64)>,
}

impl Bundle {
    pub fn new(meta: Meta) -> Self {
        Bundle {
            meta,
            files: Vec::new(),
            started: Instant::now(),
            wall_clock: SystemTime::now(),
            steps: Vec::new(),
        }
    }

    pub fn add_raw(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), Pending::Raw(bytes)));
    }

    pub fn add_table(&mut self, name: &str, table: Table) {
        self.files.push((name.to_string(), Pending::Table(table)));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, report: &T) {
        let v = serde_json::to_value(report).expect("report serializes");
        self.files.push((name.to_string(), Pending::Json(v)));
    }

    pub fn count_points(&mut self, n: u128) {
        self.meta.points_used = self.meta.points_used.saturating_add(n);
    }

    /// Records a wall-clock duration for the timings sidecar.
    pub fn time(&mut self, label: impl Into<String>, ms: f64) {
        self.steps.push((label.into(), ms));
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    fn render(&self, p: &Pending) -> Vec<u8> {
        match p {
            Pending::Raw(b) => b.clone(),
            Pending::Table(t) => t.render(&self.meta),
            Pending::Json(v) => {
                let doc = serde_json::json!({ "meta": &self.meta, "report": v });
                let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
                s.push('\n');
                s.into_bytes()
            }
        }
    }

    /// Final bytes of every artifact except the timings sidecar.
    pub fn rendered(&self) -> Vec<(String, Vec<u8>)> {
        self.files.iter().map(|(n, p)| (n.clone(), self.render(p))).collect()
    }

    fn timings(&self) -> Vec<u8> {
        let unix = self
            .wall_clock
            .duration_since(UNIX_EPOCH)
            .map_or(0.0, |d| d.as_secs_f64());
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|(l, ms)| serde_json::json!({ "label": l, "elapsed_ms": ms }))
            .collect();
        let doc = serde_json::json!({
            "config_sha256": self.meta.config_sha256,
            "started_unix": unix,
            "elapsed_ms": self.started.elapsed().as_secs_f64() * 1e3,
            "steps": steps,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("timings serialize");
        s.push('\n');
        s.into_bytes()
    }

    /// Writes every artifact, then the timings sidecar. Each file is written
    /// under a temporary name and renamed into place.
    pub fn commit(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let timings = self.timings();
        let mut all = self.rendered();
        all.push(("timings.json".into(), timings));
        for (name, bytes) in &all {
            let tmp = dir.join(format!(".{name}.partial"));
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
            std::fs::rename(&tmp, dir.join(name))?;
        }
        Ok(())
    }
}
