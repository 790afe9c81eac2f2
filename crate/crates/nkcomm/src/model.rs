//! Binary NK landscapes: epistasis structure, component lookup tables, and
//! trait/fitness evaluation. Genes are 0-indexed throughout the API; the
//! table hash key uses the 1-based index so values are stable against the
//! documented keying scheme.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{mix64, unit_from_bits, SplitMix64};

/// Hard bound so a genotype fits one u64 code.
pub const MAX_GENES: usize = 63;

/// Materialized tables hold at most this many values in total (n * 2^(k+1)).
pub const MAX_MATERIALIZED_ENTRIES: u64 = 1 << 23;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Adjacent,
    Random,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Adjacent => "adjacent",
            Mode::Random => "random",
        }
    }

    /// Tag used in seed derivation; stable across releases.
    pub fn tag(self) -> u64 {
        match self {
            Mode::Adjacent => 1,
            Mode::Random => 2,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjacent" => Ok(Mode::Adjacent),
            "random" => Ok(Mode::Random),
            other => Err(Error::Parameter(format!(
                "unknown mode '{other}' (expected adjacent or random)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableMode {
    Materialized,
    OnTheFly,
}

impl std::str::FromStr for TableMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "materialized" => Ok(TableMode::Materialized),
            "on-the-fly" | "on_the_fly" => Ok(TableMode::OnTheFly),
            other => Err(Error::Parameter(format!(
                "unknown table mode '{other}' (expected materialized or on-the-fly)"
            ))),
        }
    }
}

/// A point of {0,1}^n with its canonical integer code: bit i of `code` is
/// gene i, i.e. code = sum x_i * 2^i.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Genotype {
    n: usize,
    code: u64,
}

impl Genotype {
    pub fn from_code(n: usize, code: u64) -> Result<Self> {
        if n == 0 || n > MAX_GENES {
            return Err(Error::Parameter(format!(
                "genotype length must be in 1..={MAX_GENES} (got {n})"
            )));
        }
        if n < 64 && code >> n != 0 {
            return Err(Error::Parameter(format!(
                "code {code} out of range for {n} genes"
            )));
        }
        Ok(Genotype { n, code })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut code = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => code |= 1 << i,
                other => {
                    return Err(Error::Parameter(format!(
                        "gene {} must be 0 or 1 (got {other})",
                        i + 1
                    )))
                }
            }
        }
        Genotype::from_code(bits.len(), code)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    pub fn bit(&self, gene: usize) -> u64 {
        assert!(gene < self.n, "gene index {gene} out of range");
        (self.code >> gene) & 1
    }

    pub fn flipped(&self, gene: usize) -> Genotype {
        assert!(gene < self.n, "gene index {gene} out of range");
        Genotype {
            n: self.n,
            code: self.code ^ (1 << gene),
        }
    }
}

/// e(i, 1..k): for each gene, the ordered epistatic gene list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpistasisMatrix {
    n: usize,
    k: usize,
    mode: Mode,
    links: Vec<Vec<u32>>,
}

impl EpistasisMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn links(&self, gene: usize) -> &[u32] {
        &self.links[gene]
    }
}

/// Builds the epistasis links. Adjacent collects cyclic neighbors in
/// interleaved increasing radius (i-1, i+1, i-2, i+2, ...); Random takes the
/// first k slots of a partial Fisher-Yates shuffle of {0..n-1}\{i} driven by
/// a per-gene stream, so the k-link list is a prefix of the (k+1)-link list
/// for the same seed.
pub fn build_epistasis(n: usize, k: usize, mode: Mode, seed: u64) -> Result<EpistasisMatrix> {
    if n == 0 || n > MAX_GENES {
        return Err(Error::Parameter(format!(
            "n must be in 1..={MAX_GENES} (got {n})"
        )));
    }
    if k + 1 > n {
        return Err(Error::Parameter(format!(
            "k must be ≤ n-1 (got k={k}, n={n})"
        )));
    }
    let mut links = Vec::with_capacity(n);
    for i in 0..n {
        let list = match mode {
            Mode::Adjacent => {
                let mut seq = Vec::with_capacity(k);
                let mut radius = 1usize;
                while seq.len() < k {
                    seq.push(((i + n - radius) % n) as u32);
                    if seq.len() < k {
                        seq.push(((i + radius) % n) as u32);
                    }
                    radius += 1;
                }
                seq
            }
            Mode::Random => {
                let mut pool: Vec<u32> = (0..n as u32).filter(|&g| g as usize != i).collect();
                let mut rng = SplitMix64::new(mix64(seed ^ mix64(i as u64 + 1)));
                rng.partial_shuffle(&mut pool, k);
                pool.truncate(k);
                pool
            }
        };
        debug_assert!(list.iter().all(|&g| g as usize != i));
        links.push(list);
    }
    Ok(EpistasisMatrix { n, k, mode, links })
}

/// Serializable model identity; enough to rebuild the model bit-exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub n: usize,
    pub k: usize,
    pub mode: Mode,
    pub seed: u64,
    pub table_mode: TableMode,
}

#[derive(Clone, Debug)]
pub struct NkModel {
    epistasis: EpistasisMatrix,
    seed: u64,
    tables: Option<Vec<Vec<f64>>>,
}

impl NkModel {
    pub fn new(n: usize, k: usize, mode: Mode, seed: u64, table_mode: TableMode) -> Result<Self> {
        let epistasis = build_epistasis(n, k, mode, seed)?;
        let tables = match table_mode {
            TableMode::OnTheFly => None,
            TableMode::Materialized => Some(materialize_tables(&epistasis, seed)?),
        };
        Ok(NkModel {
            epistasis,
            seed,
            tables,
        })
    }

    /// Model with explicitly injected tables; values must lie in [0, 1).
    pub fn with_tables(
        epistasis: EpistasisMatrix,
        seed: u64,
        tables: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let rows = 1usize << (epistasis.k() + 1);
        if tables.len() != epistasis.n() {
            return Err(Error::Parameter(format!(
                "expected {} tables, got {}",
                epistasis.n(),
                tables.len()
            )));
        }
        for (i, t) in tables.iter().enumerate() {
            if t.len() != rows {
                return Err(Error::Parameter(format!(
                    "table for gene {} must have {} entries, got {}",
                    i + 1,
                    rows,
                    t.len()
                )));
            }
            if t.iter().any(|v| !(0.0..1.0).contains(v)) {
                return Err(Error::Parameter(format!(
                    "table for gene {} has values outside [0, 1)",
                    i + 1
                )));
            }
        }
        Ok(NkModel {
            epistasis,
            seed,
            tables: Some(tables),
        })
    }

    pub fn n(&self) -> usize {
        self.epistasis.n
    }

    pub fn k(&self) -> usize {
        self.epistasis.k
    }

    pub fn mode(&self) -> Mode {
        self.epistasis.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn epistasis(&self) -> &EpistasisMatrix {
        &self.epistasis
    }

    pub fn table_mode(&self) -> TableMode {
        if self.tables.is_some() {
            TableMode::Materialized
        } else {
            TableMode::OnTheFly
        }
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor {
            n: self.n(),
            k: self.k(),
            mode: self.mode(),
            seed: self.seed,
            table_mode: self.table_mode(),
        }
    }

    /// Hot-path table lookup; bounds are the caller's contract.
    #[inline]
    pub(crate) fn table_value_unchecked(&self, gene: usize, entry: u64) -> f64 {
        debug_assert!(gene < self.n());
        match &self.tables {
            Some(tables) => tables[gene][entry as usize],
            None => raw_table_value(self.seed, gene, entry),
        }
    }

    /// Entry `entry` of gene `gene`'s lookup table (gene 0-based).
    pub fn table_value(&self, gene: usize, entry: u64) -> f64 {
        assert!(gene < self.n(), "gene index {gene} out of range");
        assert!(
            entry < (1 << (self.k() + 1)),
            "table entry {entry} out of range"
        );
        match &self.tables {
            Some(tables) => tables[gene][entry as usize],
            None => raw_table_value(self.seed, gene, entry),
        }
    }

    pub fn trait_value(&self, gene: usize, x: &Genotype) -> f64 {
        assert_eq!(x.len(), self.n(), "genotype length mismatch");
        self.table_value(gene, goedel_index(x, gene, &self.epistasis))
    }

    pub fn fitness(&self, x: &Genotype) -> f64 {
        (0..self.n()).map(|i| self.trait_value(i, x)).sum()
    }

    /// Full tables regardless of storage mode, for audit dumps.
    pub fn dump_tables(&self) -> Result<Vec<Vec<f64>>> {
        match &self.tables {
            Some(tables) => Ok(tables.clone()),
            None => materialize_tables(&self.epistasis, self.seed),
        }
    }
}

/// 2^0 x_i + 2^1 x_{e(i,1)} + ... + 2^k x_{e(i,k)}.
pub fn goedel_index(x: &Genotype, gene: usize, e: &EpistasisMatrix) -> u64 {
    let mut idx = x.bit(gene);
    for (t, &src) in e.links(gene).iter().enumerate() {
        idx |= x.bit(src as usize) << (t + 1);
    }
    idx
}

/// The on-the-fly table formula; gene is 0-based, the key uses 1-based.
pub(crate) fn raw_table_value(seed: u64, gene: usize, entry: u64) -> f64 {
    let key = ((gene as u64 + 1) << 40).wrapping_add(entry);
    unit_from_bits(mix64(seed ^ mix64(key)))
}

fn materialize_tables(e: &EpistasisMatrix, seed: u64) -> Result<Vec<Vec<f64>>> {
    let rows = 1u64 << (e.k() + 1);
    let total = rows.saturating_mul(e.n() as u64);
    if total > MAX_MATERIALIZED_ENTRIES {
        return Err(Error::Capacity(format!(
            "materialized tables need {total} entries, cap is {MAX_MATERIALIZED_ENTRIES}; \
             use on-the-fly tables"
        )));
    }
    Ok((0..e.n())
        .map(|i| (0..rows).map(|j| raw_table_value(seed, i, j)).collect())
        .collect())
}
