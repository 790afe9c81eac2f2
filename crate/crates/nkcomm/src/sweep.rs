//! The experiment driver: per (mode, k, replicate) cell, build the
//! landscape, enumerate moments, correlate, detect communities, and record
//! (nc, q, msc). Cells are independent; the per-cell seed is derived from
//! the base seed so any cell reproduces in isolation.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{graph_from_correlation, louvain, WeightMode};
use crate::error::{Error, Result};
use crate::model::{Mode, NkModel, TableMode, MAX_MATERIALIZED_ENTRIES};
use crate::rng::mix64;
use crate::stats::{correlation, enumerate_moments, mean_squared_correlation, push_fixed10};

/// Noise floor for correlation edges under full enumeration: three times the
/// standard error of an empirical correlation of independent traits over
/// 2^n observations (1/sqrt(2^n)).
pub fn auto_epsilon(n: usize) -> f64 {
    let mut eps = 3.0 / (1u64 << (n / 2)) as f64;
    if n % 2 == 1 {
        eps /= std::f64::consts::SQRT_2;
    }
    eps
}

/// mix64(base ^ mix64(tag * 2^48 + k * 2^32 + replicate)); injective over the
/// grid for k < 2^16 and replicate < 2^32.
pub fn derive_seed(base_seed: u64, mode: Mode, k: usize, replicate: usize) -> u64 {
    let key = (mode.tag() << 48)
        .wrapping_add((k as u64) << 32)
        .wrapping_add(replicate as u64);
    mix64(base_seed ^ mix64(key))
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Adjacent, Mode::Random]
}

fn default_replicates() -> usize {
    20
}

fn default_weight_mode() -> WeightMode {
    WeightMode::Abs
}

/// Sweep grid. An empty `k_values` means all of 0..n-1; a missing `epsilon`
/// means the noise-aware default for n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    #[serde(default)]
    pub k_values: Vec<usize>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_weight_mode")]
    pub weight_mode: WeightMode,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

impl SweepConfig {
    pub fn new(n: usize) -> Self {
        SweepConfig {
            n,
            k_values: Vec::new(),
            modes: default_modes(),
            replicates: default_replicates(),
            base_seed: 0,
            weight_mode: default_weight_mode(),
            epsilon: None,
        }
    }

    pub fn effective_k_values(&self) -> Vec<usize> {
        if self.k_values.is_empty() {
            (0..self.n).collect()
        } else {
            self.k_values.clone()
        }
    }

    pub fn effective_epsilon(&self) -> f64 {
        self.epsilon.unwrap_or_else(|| auto_epsilon(self.n))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parameter("n must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::Parameter("modes must be non-empty".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Parameter("replicates must be at least 1".into()));
        }
        if !self.k_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Parameter(
                "k_values must be strictly increasing".into(),
            ));
        }
        if let Some(&k) = self.k_values.last() {
            if k + 1 > self.n {
                return Err(Error::Parameter(format!(
                    "k must be ≤ n-1 (got k={k}, n={})",
                    self.n
                )));
            }
        }
        if let Some(eps) = self.epsilon {
            if !eps.is_finite() || eps < 0.0 {
                return Err(Error::Parameter(format!(
                    "epsilon must be finite and ≥ 0 (got {eps})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub mode: Mode,
    pub k: usize,
    pub replicate: usize,
    pub seed: u64,
    pub nc: usize,
    pub q: f64,
    pub msc: f64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug)]
pub struct CellFailure {
    pub mode: Mode,
    pub k: usize,
    pub replicate: usize,
    pub message: String,
    pub exit_code: i32,
}

/// One pipeline pass: model -> moments -> correlation -> msc -> graph ->
/// louvain. The model seed also seeds the louvain sweep order. `replicate`
/// is echoed into the record as a label only.
pub fn run_cell(
    n: usize,
    k: usize,
    mode: Mode,
    seed: u64,
    weight_mode: WeightMode,
    eps: f64,
) -> Result<SweepRecord> {
    let start = Instant::now();
    let table_entries = (1u64 << (k + 1)).saturating_mul(n as u64);
    let table_mode = if table_entries <= MAX_MATERIALIZED_ENTRIES {
        TableMode::Materialized
    } else {
        TableMode::OnTheFly
    };
    let model = NkModel::new(n, k, mode, seed, table_mode)?;
    let moments = enumerate_moments(&model)?;
    let corr = correlation(&moments)?;
    let msc = mean_squared_correlation(&corr)?;
    let graph = graph_from_correlation(&corr, weight_mode, eps);
    let partition = louvain(&graph, seed);
    Ok(SweepRecord {
        mode,
        k,
        replicate: 0,
        seed,
        nc: partition.nc,
        q: partition.q,
        msc,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

/// Five-number summary of one metric across replicates; quartiles use the
/// linear-interpolation convention (R type 7).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricStats {
    pub median: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub iqr: f64,
}

/// Lower quartile of `values` at fraction p, values ascending.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn metric_stats(mut values: Vec<f64>) -> MetricStats {
    values.sort_by(|a, b| a.partial_cmp(b).expect("metric values are finite"));
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    MetricStats {
        median: quantile(&values, 0.5),
        mean,
        min: values[0],
        max: *values.last().expect("nonempty"),
        iqr: quantile(&values, 0.75) - quantile(&values, 0.25),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub nc: MetricStats,
    pub q: MetricStats,
    pub msc: MetricStats,
}

/// Per (mode, k) statistics over replicates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepSummary {
    cells: BTreeMap<(u64, usize), CellSummary>,
}

impl SweepSummary {
    pub fn from_records(records: &[SweepRecord]) -> Self {
        let mut grouped: BTreeMap<(u64, usize), Vec<&SweepRecord>> = BTreeMap::new();
        for r in records {
            grouped.entry((r.mode.tag(), r.k)).or_default().push(r);
        }
        let cells = grouped
            .into_iter()
            .map(|((tag, k), rs)| {
                let summary = CellSummary {
                    nc: metric_stats(rs.iter().map(|r| r.nc as f64).collect()),
                    q: metric_stats(rs.iter().map(|r| r.q).collect()),
                    msc: metric_stats(rs.iter().map(|r| r.msc).collect()),
                };
                ((tag, k), summary)
            })
            .collect();
        SweepSummary { cells }
    }

    pub fn get(&self, mode: Mode, k: usize) -> Option<&CellSummary> {
        self.cells.get(&(mode.tag(), k))
    }

    pub fn median_nc(&self, mode: Mode, k: usize) -> Option<f64> {
        self.get(mode, k).map(|c| c.nc.median)
    }

    pub fn median_msc(&self, mode: Mode, k: usize) -> Option<f64> {
        self.get(mode, k).map(|c| c.msc.median)
    }

    /// JSON object keyed by mode name, then by k.
    pub fn to_json(&self) -> String {
        let mut root = serde_json::Map::new();
        for (&(tag, k), cell) in &self.cells {
            let mode = if tag == Mode::Adjacent.tag() {
                Mode::Adjacent
            } else {
                Mode::Random
            };
            let entry = root
                .entry(mode.as_str().to_string())
                .or_insert_with(|| serde_json::Value::Object(serde_json::Map::new()));
            entry
                .as_object_mut()
                .expect("mode entry is an object")
                .insert(
                    k.to_string(),
                    serde_json::to_value(cell).expect("summary serializes"),
                );
        }
        serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("summary serializes")
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub summary: SweepSummary,
    pub failures: Vec<CellFailure>,
}

/// Runs the whole grid; output order is (mode, k, replicate) by grid
/// position. A failing cell is recorded and skipped, never aborts the rest.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let k_values = cfg.effective_k_values();
    let eps = cfg.effective_epsilon();
    let mut grid = Vec::new();
    for &mode in &cfg.modes {
        for &k in &k_values {
            for rep in 0..cfg.replicates {
                grid.push((mode, k, rep));
            }
        }
    }
    let results: Vec<(Mode, usize, usize, Result<SweepRecord>)> = grid
        .into_par_iter()
        .map(|(mode, k, rep)| {
            let seed = derive_seed(cfg.base_seed, mode, k, rep);
            let cell = run_cell(cfg.n, k, mode, seed, cfg.weight_mode, eps).map(|mut r| {
                r.replicate = rep;
                r
            });
            (mode, k, rep, cell)
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (mode, k, replicate, res) in results {
        match res {
            Ok(r) => records.push(r),
            Err(e) => failures.push(CellFailure {
                mode,
                k,
                replicate,
                message: e.to_string(),
                exit_code: e.exit_code(),
            }),
        }
    }
    let summary = SweepSummary::from_records(&records);
    Ok(SweepOutcome {
        records,
        summary,
        failures,
    })
}

pub const SWEEP_CSV_HEADER: &str = "mode,k,replicate,seed,nc,q,msc,wall_ms";
const SWEEP_CSV_HEADER_NO_TIMING: &str = "mode,k,replicate,seed,nc,q,msc";

/// Sweep records CSV; `with_timing: false` drops the wall_ms column so
/// reruns are byte-identical.
pub fn records_to_csv(records: &[SweepRecord], with_timing: bool) -> String {
    let mut out = String::new();
    out.push_str(if with_timing {
        SWEEP_CSV_HEADER
    } else {
        SWEEP_CSV_HEADER_NO_TIMING
    });
    out.push('\n');
    for r in records {
        out.push_str(r.mode.as_str());
        out.push_str(&format!(",{},{},{},{},", r.k, r.replicate, r.seed, r.nc));
        push_fixed10(&mut out, r.q);
        out.push(',');
        push_fixed10(&mut out, r.msc);
        if with_timing {
            out.push_str(&format!(",{}", r.wall_ms));
        }
        out.push('\n');
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty sweep CSV".into()))?;
    let with_timing = match header {
        SWEEP_CSV_HEADER => true,
        SWEEP_CSV_HEADER_NO_TIMING => false,
        other => return Err(Error::Parse(format!("line 1: unexpected header '{other}'"))),
    };
    let expected = if with_timing { 8 } else { 7 };
    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            return Err(Error::Parse(format!("line {lineno}: empty row")));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(Error::Parse(format!(
                "line {lineno}: expected {expected} fields, found {}",
                fields.len()
            )));
        }
        fn num<T: std::str::FromStr>(lineno: usize, name: &str, tok: &str) -> Result<T> {
            tok.parse()
                .map_err(|_| Error::Parse(format!("line {lineno}: invalid {name} '{tok}'")))
        }
        let mode: Mode = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("line {lineno}: invalid mode '{}'", fields[0])))?;
        records.push(SweepRecord {
            mode,
            k: num(lineno, "k", fields[1])?,
            replicate: num(lineno, "replicate", fields[2])?,
            seed: num(lineno, "seed", fields[3])?,
            nc: num(lineno, "nc", fields[4])?,
            q: num(lineno, "q", fields[5])?,
            msc: num(lineno, "msc", fields[6])?,
            wall_ms: if with_timing {
                num(lineno, "wall_ms", fields[7])?
            } else {
                0
            },
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_seed_golden() {
        assert_eq!(derive_seed(0, Mode::Random, 2, 0), 15591496406467338102);
        assert_eq!(derive_seed(0, Mode::Random, 2, 1), 17101914314076021984);
        assert_eq!(derive_seed(0, Mode::Adjacent, 2, 0), 1870579760749167442);
    }

    #[test]
    fn derive_seed_distinct_over_grid() {
        let mut seen = std::collections::HashSet::new();
        for mode in [Mode::Adjacent, Mode::Random] {
            for k in 0..10 {
                for rep in 0..20 {
                    assert!(seen.insert(derive_seed(7, mode, k, rep)));
                }
            }
        }
    }

    #[test]
    fn auto_epsilon_values() {
        assert_eq!(auto_epsilon(10), 0.09375);
        assert!((auto_epsilon(9) - 3.0 / 2f64.powf(4.5)).abs() < 1e-15);
        assert!(auto_epsilon(20) < auto_epsilon(10));
    }

    #[test]
    fn quantile_type_seven() {
        let four = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&four, 0.25), 1.75);
        assert_eq!(quantile(&four, 0.5), 2.5);
        assert_eq!(quantile(&four, 0.75), 3.25);
        let five = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&five, 0.25), 2.0);
        assert_eq!(quantile(&five, 0.5), 3.0);
        assert_eq!(quantile(&five, 0.75), 4.0);
        assert_eq!(quantile(&[7.5], 0.5), 7.5);
    }

    #[test]
    fn run_cell_k_zero_has_no_structure() {
        for mode in [Mode::Adjacent, Mode::Random] {
            let r = run_cell(10, 0, mode, 42, WeightMode::Abs, auto_epsilon(10)).unwrap();
            assert_eq!(r.nc, 10);
            assert_eq!(r.q, 0.0);
            assert!(r.msc < 1e-18, "msc = {}", r.msc);
        }
    }

    #[test]
    fn run_cell_small_model_in_range() {
        let r = run_cell(2, 1, Mode::Random, 3, WeightMode::Abs, 1e-12).unwrap();
        assert!(r.nc >= 1 && r.nc <= 2);
        assert!((-1.0..=1.0).contains(&r.q));
        assert!((0.0..=1.0).contains(&r.msc));
    }

    #[test]
    fn run_cell_deterministic_except_timing() {
        let a = run_cell(8, 3, Mode::Random, 9, WeightMode::Abs, auto_epsilon(8)).unwrap();
        let b = run_cell(8, 3, Mode::Random, 9, WeightMode::Abs, auto_epsilon(8)).unwrap();
        assert_eq!((a.nc, a.q, a.msc, a.seed), (b.nc, b.q, b.msc, b.seed));
    }

    #[test]
    fn run_sweep_grid_size_and_order() {
        let mut cfg = SweepConfig::new(6);
        cfg.replicates = 3;
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.records.len(), 2 * 6 * 3);
        assert!(out.failures.is_empty());
        let mut expect = Vec::new();
        for mode in [Mode::Adjacent, Mode::Random] {
            for k in 0..6 {
                for rep in 0..3 {
                    expect.push((mode, k, rep));
                }
            }
        }
        let got: Vec<(Mode, usize, usize)> = out
            .records
            .iter()
            .map(|r| (r.mode, r.k, r.replicate))
            .collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn sweep_cells_are_independent() {
        let mut full = SweepConfig::new(6);
        full.replicates = 2;
        let mut partial = full.clone();
        partial.k_values = vec![2, 4];
        let full_out = run_sweep(&full).unwrap();
        let partial_out = run_sweep(&partial).unwrap();
        for p in &partial_out.records {
            let f = full_out
                .records
                .iter()
                .find(|r| (r.mode, r.k, r.replicate) == (p.mode, p.k, p.replicate))
                .unwrap();
            assert_eq!((f.seed, f.nc, f.q, f.msc), (p.seed, p.nc, p.q, p.msc));
        }
    }

    #[test]
    fn summary_median_nc_at_k_zero() {
        let mut cfg = SweepConfig::new(10);
        cfg.k_values = vec![0];
        cfg.modes = vec![Mode::Random];
        cfg.replicates = 5;
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.summary.median_nc(Mode::Random, 0), Some(10.0));
    }

    #[test]
    fn summary_json_shape() {
        let records = vec![
            SweepRecord {
                mode: Mode::Adjacent,
                k: 0,
                replicate: 0,
                seed: 1,
                nc: 4,
                q: 0.25,
                msc: 0.1,
                wall_ms: 3,
            },
            SweepRecord {
                mode: Mode::Adjacent,
                k: 0,
                replicate: 1,
                seed: 2,
                nc: 6,
                q: 0.35,
                msc: 0.3,
                wall_ms: 4,
            },
        ];
        let summary = SweepSummary::from_records(&records);
        let json: serde_json::Value = serde_json::from_str(&summary.to_json()).unwrap();
        assert_eq!(json["adjacent"]["0"]["nc"]["median"], 5.0);
        assert_eq!(json["adjacent"]["0"]["nc"]["min"], 4.0);
        assert_eq!(json["adjacent"]["0"]["msc"]["max"], 0.3);
        let iqr = json["adjacent"]["0"]["q"]["iqr"].as_f64().unwrap();
        assert!((iqr - 0.05).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip_bytes() {
        let mut cfg = SweepConfig::new(5);
        cfg.replicates = 2;
        let out = run_sweep(&cfg).unwrap();
        for with_timing in [true, false] {
            let csv = records_to_csv(&out.records, with_timing);
            let parsed = records_from_csv(&csv).unwrap();
            assert_eq!(records_to_csv(&parsed, with_timing), csv);
        }
    }

    #[test]
    fn csv_no_timing_is_rerun_stable() {
        let cfg = {
            let mut c = SweepConfig::new(6);
            c.replicates = 2;
            c.k_values = vec![0, 3];
            c
        };
        let a = records_to_csv(&run_sweep(&cfg).unwrap().records, false);
        let b = records_to_csv(&run_sweep(&cfg).unwrap().records, false);
        assert_eq!(a, b);
        assert!(a.starts_with("mode,k,replicate,seed,nc,q,msc\n"));
        assert!(!a.contains("wall_ms"));
    }

    #[test]
    fn csv_parse_errors_name_lines() {
        assert!(records_from_csv("").is_err());
        let err = records_from_csv("bogus\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        let good = format!("{SWEEP_CSV_HEADER}\n");
        let err = records_from_csv(&format!("{good}random,1,0,5,3,0.5,0.1\n")).unwrap_err();
        assert!(err.to_string().contains("line 2"));
        let err = records_from_csv(&format!("{good}random,1,0,5,three,0.5,0.1,9\n")).unwrap_err();
        assert!(err.to_string().contains("invalid nc"));
    }

    #[test]
    fn config_validation() {
        let mut cfg = SweepConfig::new(0);
        assert!(cfg.validate().is_err());
        cfg.n = 5;
        assert!(cfg.validate().is_ok());
        cfg.k_values = vec![2, 1];
        assert!(cfg.validate().is_err());
        cfg.k_values = vec![1, 5];
        assert!(cfg.validate().is_err());
        cfg.k_values = vec![1, 4];
        assert!(cfg.validate().is_ok());
        cfg.replicates = 0;
        assert!(cfg.validate().is_err());
        cfg.replicates = 1;
        cfg.epsilon = Some(-0.5);
        assert!(cfg.validate().is_err());
        cfg.epsilon = Some(0.1);
        assert!(cfg.validate().is_ok());
        cfg.modes.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_round_trip_with_defaults() {
        let cfg: SweepConfig = serde_json::from_str(r#"{"n": 10}"#).unwrap();
        assert_eq!(cfg, SweepConfig::new(10));
        assert_eq!(cfg.effective_k_values(), (0..10).collect::<Vec<_>>());
        assert_eq!(cfg.effective_epsilon(), 0.09375);

        let cfg: SweepConfig = serde_json::from_str(
            r#"{"n": 8, "k_values": [1, 3], "modes": ["random"], "replicates": 4,
                "base_seed": 99, "weight_mode": "squared", "epsilon": 0.01}"#,
        )
        .unwrap();
        assert_eq!(cfg.modes, vec![Mode::Random]);
        assert_eq!(cfg.weight_mode, WeightMode::Squared);
        assert_eq!(cfg.epsilon, Some(0.01));
        let back: SweepConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);

        assert!(serde_json::from_str::<SweepConfig>(r#"{"n": 8, "bogus": 1}"#).is_err());
    }
}
