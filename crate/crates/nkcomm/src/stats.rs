//! Streaming first and second cross-moments of the N trait functions over
//! enumerated genotypes, and the empirical Pearson correlation matrix
//! derived from them. Trait vectors are never stored; memory is O(N^2).

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::NkModel;
use crate::rng::SplitMix64;

/// Full enumeration is refused above this many genes.
pub const DEFAULT_ENUM_CAP: usize = 28;

/// Enumeration chunk size; chunk boundaries are fixed so the merge tree does
/// not depend on worker count.
pub const CHUNK_BITS: usize = 16;

/// Sampling path caps: at most this many distinct genotypes, and at most
/// half the space so the without-replacement draw terminates quickly.
pub const MAX_SAMPLES: u64 = 1 << 24;

const VAR_EPS_PER_COUNT: f64 = 1e-15;

#[derive(Clone, Debug)]
pub struct TraitMoments {
    n_traits: usize,
    count: u64,
    sum: Vec<f64>,
    co: Vec<f64>,
}

#[inline]
fn tri_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    // row i starts at i*n - i*(i-1)/2; the product below is always even
    i * (2 * n - i + 1) / 2 + (j - i)
}

impl TraitMoments {
    pub fn new(n_traits: usize) -> Self {
        TraitMoments {
            n_traits,
            count: 0,
            sum: vec![0.0; n_traits],
            co: vec![0.0; n_traits * (n_traits + 1) / 2],
        }
    }

    pub fn n_traits(&self) -> usize {
        self.n_traits
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self, i: usize) -> f64 {
        self.sum[i]
    }

    /// Sum of F_i * F_j; symmetric lookup.
    pub fn co(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.co[tri_index(self.n_traits, a, b)]
    }

    #[inline]
    fn push(&mut self, traits: &[f64]) {
        self.count += 1;
        for (s, &v) in self.sum.iter_mut().zip(traits) {
            *s += v;
        }
        let mut t = 0;
        for (i, &vi) in traits.iter().enumerate() {
            for &vj in &traits[i..] {
                self.co[t] += vi * vj;
                t += 1;
            }
        }
    }

    pub fn accumulate(&mut self, traits: &[f64]) -> Result<()> {
        if traits.len() != self.n_traits {
            return Err(Error::Parameter(format!(
                "observation has {} traits, accumulator expects {}",
                traits.len(),
                self.n_traits
            )));
        }
        self.push(traits);
        Ok(())
    }

    /// Fieldwise addition; count additive.
    pub fn merge(&mut self, other: &TraitMoments) -> Result<()> {
        if other.n_traits != self.n_traits {
            return Err(Error::Parameter(format!(
                "cannot merge accumulators of {} and {} traits",
                self.n_traits, other.n_traits
            )));
        }
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.co.iter_mut().zip(&other.co) {
            *a += b;
        }
        Ok(())
    }
}

/// Per-gene source lists ([i, e(i,1..k)]) hoisted out of the genotype loop.
struct Evaluator<'a> {
    model: &'a NkModel,
    srcs: Vec<Vec<u32>>,
}

impl<'a> Evaluator<'a> {
    fn new(model: &'a NkModel) -> Self {
        let srcs = (0..model.n())
            .map(|i| {
                let mut s = Vec::with_capacity(model.k() + 1);
                s.push(i as u32);
                s.extend_from_slice(model.epistasis().links(i));
                s
            })
            .collect();
        Evaluator { model, srcs }
    }

    #[inline]
    fn eval(&self, code: u64, out: &mut [f64]) {
        for (i, srcs) in self.srcs.iter().enumerate() {
            let mut idx = 0u64;
            for (t, &s) in srcs.iter().enumerate() {
                idx |= ((code >> s) & 1) << t;
            }
            out[i] = self.model.table_value_unchecked(i, idx);
        }
    }

    fn range_moments(&self, start: u64, end: u64) -> TraitMoments {
        let n = self.model.n();
        let mut acc = TraitMoments::new(n);
        let mut traits = vec![0.0; n];
        for code in start..end {
            self.eval(code, &mut traits);
            acc.push(&traits);
        }
        acc
    }
}

/// Exhaustive moments over {0,1}^n in canonical code order, chunked and
/// merged ascending: the result is identical for any worker count, and for
/// n ≤ CHUNK_BITS it is literally the sequential loop.
pub fn enumerate_moments(model: &NkModel) -> Result<TraitMoments> {
    enumerate_moments_capped(model, DEFAULT_ENUM_CAP)
}

pub fn enumerate_moments_capped(model: &NkModel, cap: usize) -> Result<TraitMoments> {
    let n = model.n();
    if n > cap {
        return Err(Error::Capacity(format!(
            "full enumeration needs 2^{n} genotypes; cap is n ≤ {cap} \
             (use sampling for larger n)"
        )));
    }
    let total = 1u64 << n;
    let chunk = 1u64 << CHUNK_BITS;
    let n_chunks = total.div_ceil(chunk);
    let ev = Evaluator::new(model);
    let parts: Vec<TraitMoments> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            ev.range_moments(start, (start + chunk).min(total))
        })
        .collect();
    let mut acc = TraitMoments::new(n);
    for part in &parts {
        acc.merge(part)?;
    }
    Ok(acc)
}

/// Naive single-loop reference; the chunked path must match it bit-exactly
/// whenever the space fits one chunk.
pub fn sequential_moments(model: &NkModel) -> Result<TraitMoments> {
    let n = model.n();
    if n > DEFAULT_ENUM_CAP {
        return Err(Error::Capacity(format!(
            "full enumeration needs 2^{n} genotypes; cap is n ≤ {DEFAULT_ENUM_CAP}"
        )));
    }
    Ok(Evaluator::new(model).range_moments(0, 1u64 << n))
}

/// Approximate moments from `samples` distinct genotypes drawn uniformly
/// without replacement. Escape hatch for n above the enumeration cap.
pub fn sample_moments(model: &NkModel, samples: u64, seed: u64) -> Result<TraitMoments> {
    let n = model.n();
    let space: u64 = if n >= 64 { u64::MAX } else { 1u64 << n };
    if samples > MAX_SAMPLES || samples > space / 2 {
        return Err(Error::Capacity(format!(
            "sample count {samples} exceeds cap min(2^24, 2^{n}/2)"
        )));
    }
    if samples < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 samples (got {samples})"
        )));
    }
    let ev = Evaluator::new(model);
    let mut acc = TraitMoments::new(n);
    let mut traits = vec![0.0; n];
    let mut seen = HashSet::with_capacity(samples as usize);
    let mut rng = SplitMix64::new(seed);
    while (seen.len() as u64) < samples {
        let code = rng.below(space);
        if seen.insert(code) {
            ev.eval(code, &mut traits);
            acc.push(&traits);
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    n: usize,
    rho: Vec<f64>,
    degenerate: Vec<bool>,
}

impl CorrelationMatrix {
    /// Builds from explicit rows; enforces shape, range, symmetry, and unit
    /// diagonal. Degenerate flags are all false (the source is unknown).
    pub fn from_rho(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Parse("empty correlation matrix".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields, found {}",
                    i + 1,
                    n,
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v.abs() > 1.0 + 1e-9 {
                    return Err(Error::Parse(format!(
                        "line {}: correlation out of range at column {}: {v}",
                        i + 1,
                        j + 1
                    )));
                }
            }
            if (row[i] - 1.0).abs() > 1e-6 {
                return Err(Error::Parse(format!(
                    "line {}: diagonal entry must be 1, found {}",
                    i + 1,
                    row[i]
                )));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                if (v - rows[j][i]).abs() > 1e-6 {
                    return Err(Error::Parse(format!(
                        "line {}: matrix not symmetric at ({}, {})",
                        j + 1,
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let rho: Vec<f64> = rows
            .iter()
            .flat_map(|row| row.iter().map(|v| v.clamp(-1.0, 1.0)))
            .collect();
        Ok(CorrelationMatrix {
            n,
            rho,
            degenerate: vec![false; n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.n + j]
    }

    pub fn is_degenerate(&self, i: usize) -> bool {
        self.degenerate[i]
    }

    /// Full matrix CSV: one row per line, 10 fractional digits, negative
    /// zero normalized.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    out.push(',');
                }
                push_fixed10(&mut out, self.get(i, j));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.is_empty() {
                return Err(Error::Parse(format!("line {lineno}: empty row")));
            }
            let mut row = Vec::new();
            for (col, tok) in line.split(',').enumerate() {
                let v: f64 = tok.trim().parse().map_err(|_| {
                    Error::Parse(format!(
                        "line {lineno}: invalid number '{tok}' in column {}",
                        col + 1
                    ))
                })?;
                row.push(v);
            }
            rows.push(row);
        }
        CorrelationMatrix::from_rho(rows)
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<f64>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect();
        serde_json::json!({
            "n": self.n,
            "rho": rows,
            "degenerate": self.degenerate,
        })
        .to_string()
    }
}

/// Fixed 10 fractional digits with negative zero normalized away.
pub(crate) fn push_fixed10(out: &mut String, v: f64) {
    let start = out.len();
    let _ = write!(out, "{v:.10}");
    if out[start..].starts_with('-') && out[start + 1..].bytes().all(|b| b == b'0' || b == b'.') {
        out.remove(start);
    }
}

/// Pearson correlations from raw moments. Zero-variance traits (centered
/// second moment at most 1e-15 per observation) are flagged degenerate and
/// get zero off-diagonals.
pub fn correlation(acc: &TraitMoments) -> Result<CorrelationMatrix> {
    if acc.count() < 2 {
        return Err(Error::Parameter(format!(
            "correlation needs at least 2 observations (got {})",
            acc.count()
        )));
    }
    let n = acc.n_traits();
    let cnt = acc.count() as f64;
    let var_eps = VAR_EPS_PER_COUNT * cnt;
    let centered = |i: usize, j: usize| acc.co(i, j) - acc.sum(i) * acc.sum(j) / cnt;
    let var: Vec<f64> = (0..n).map(|i| centered(i, i)).collect();
    let degenerate: Vec<bool> = var.iter().map(|&v| v <= var_eps).collect();
    let mut rho = vec![0.0; n * n];
    for i in 0..n {
        rho[i * n + i] = 1.0;
        for j in i + 1..n {
            let r = if degenerate[i] || degenerate[j] {
                0.0
            } else {
                (centered(i, j) / (var[i] * var[j]).sqrt()).clamp(-1.0, 1.0)
            };
            rho[i * n + j] = r;
            rho[j * n + i] = r;
        }
    }
    Ok(CorrelationMatrix { n, rho, degenerate })
}

/// Mean of rho^2 over unordered off-diagonal pairs.
pub fn mean_squared_correlation(c: &CorrelationMatrix) -> Result<f64> {
    let n = c.n();
    if n < 2 {
        return Err(Error::Parameter(format!(
            "mean squared correlation needs at least 2 traits (got {n})"
        )));
    }
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let r = c.get(i, j);
            s += r * r;
        }
    }
    Ok(s / (n * (n - 1) / 2) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_epistasis, Mode, TableMode};
    use proptest::prelude::*;

    fn model(n: usize, k: usize, mode: Mode, seed: u64) -> NkModel {
        NkModel::new(n, k, mode, seed, TableMode::Materialized).unwrap()
    }

    #[test]
    fn accumulate_hand_oracle() {
        let mut acc = TraitMoments::new(2);
        acc.accumulate(&[1.0, 2.0]).unwrap();
        acc.accumulate(&[3.0, 4.0]).unwrap();
        assert_eq!(acc.count(), 2);
        assert_eq!(acc.sum(0), 4.0);
        assert_eq!(acc.sum(1), 6.0);
        assert_eq!(acc.co(0, 0), 10.0);
        assert_eq!(acc.co(0, 1), 14.0);
        assert_eq!(acc.co(1, 0), 14.0);
        assert_eq!(acc.co(1, 1), 20.0);
    }

    #[test]
    fn accumulate_single_and_double() {
        let mut acc = TraitMoments::new(3);
        let v = [0.25, 0.5, 0.75];
        acc.accumulate(&v).unwrap();
        for i in 0..3 {
            assert_eq!(acc.sum(i), v[i]);
            for j in 0..3 {
                assert_eq!(acc.co(i, j), v[i] * v[j]);
            }
        }
        acc.accumulate(&v).unwrap();
        assert_eq!(acc.count(), 2);
        assert_eq!(acc.sum(1), 2.0 * v[1]);
        assert_eq!(acc.co(0, 2), 2.0 * v[0] * v[2]);
    }

    #[test]
    fn accumulate_length_mismatch() {
        let mut acc = TraitMoments::new(2);
        assert!(acc.accumulate(&[1.0]).is_err());
    }

    #[test]
    fn merge_identity_and_commutative() {
        let mut a = TraitMoments::new(2);
        a.accumulate(&[0.1, 0.9]).unwrap();
        a.accumulate(&[0.4, 0.2]).unwrap();
        let mut b = TraitMoments::new(2);
        b.accumulate(&[0.7, 0.3]).unwrap();

        let mut a_plus_empty = a.clone();
        a_plus_empty.merge(&TraitMoments::new(2)).unwrap();
        assert_eq!(a_plus_empty.sum, a.sum);
        assert_eq!(a_plus_empty.co, a.co);
        assert_eq!(a_plus_empty.count, a.count);

        let mut ab = a.clone();
        ab.merge(&b).unwrap();
        let mut ba = b.clone();
        ba.merge(&a).unwrap();
        assert_eq!(ab.sum, ba.sum);
        assert_eq!(ab.co, ba.co);
        assert_eq!(ab.count, ba.count);

        assert!(a.clone().merge(&TraitMoments::new(3)).is_err());
    }

    #[test]
    fn enumerate_two_genotype_oracle() {
        let e = build_epistasis(1, 0, Mode::Adjacent, 0).unwrap();
        let (a, b) = (0.3, 0.6);
        let m = NkModel::with_tables(e, 0, vec![vec![a, b]]).unwrap();
        let acc = enumerate_moments(&m).unwrap();
        assert_eq!(acc.count(), 2);
        assert_eq!(acc.sum(0), a + b);
        assert_eq!(acc.co(0, 0), a * a + b * b);
    }

    #[test]
    fn enumerate_count_is_full_space() {
        let acc = enumerate_moments(&model(10, 3, Mode::Random, 5)).unwrap();
        assert_eq!(acc.count(), 1 << 10);
    }

    #[test]
    fn enumerate_cap_is_capacity_error() {
        let m = NkModel::new(29, 2, Mode::Random, 0, TableMode::OnTheFly).unwrap();
        let err = enumerate_moments(&m).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("28"));
    }

    #[test]
    fn chunked_equals_naive_bit_exact() {
        let mut rng = SplitMix64::new(2025);
        for _ in 0..6 {
            let n = 2 + (rng.below(11) as usize); // 2..=12
            let k = rng.below(n as u64) as usize;
            let mode = if rng.below(2) == 0 {
                Mode::Adjacent
            } else {
                Mode::Random
            };
            let m = model(n, k, mode, rng.next_u64());
            let chunked = enumerate_moments(&m).unwrap();
            let naive = sequential_moments(&m).unwrap();
            assert_eq!(chunked.count, naive.count);
            assert_eq!(chunked.sum, naive.sum);
            assert_eq!(chunked.co, naive.co);
        }
    }

    #[test]
    fn enumeration_independent_of_worker_count() {
        let m = model(12, 4, Mode::Random, 88);
        let reference = enumerate_moments(&m).unwrap();
        for threads in [1usize, 2, 4] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let acc = pool.install(|| enumerate_moments(&m)).unwrap();
            assert_eq!(acc.sum, reference.sum);
            assert_eq!(acc.co, reference.co);
        }
    }

    #[test]
    fn sample_moments_distinct_and_deterministic() {
        let m = NkModel::new(30, 2, Mode::Random, 3, TableMode::Materialized).unwrap();
        let a = sample_moments(&m, 500, 11).unwrap();
        let b = sample_moments(&m, 500, 11).unwrap();
        assert_eq!(a.count(), 500);
        assert_eq!(a.sum, b.sum);
        let err = sample_moments(&m, MAX_SAMPLES + 1, 0).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn correlation_duplicated_and_anticorrelated_columns() {
        let mut acc = TraitMoments::new(3);
        let mut rng = SplitMix64::new(4);
        for _ in 0..64 {
            let v = rng.next_unit();
            acc.accumulate(&[v, v, 0.5 - v]).unwrap();
        }
        let c = correlation(&acc).unwrap();
        assert!((c.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((c.get(0, 2) + 1.0).abs() < 1e-12);
        assert_eq!(c.get(0, 0), 1.0);
    }

    #[test]
    fn correlation_flags_degenerate_traits() {
        let mut acc = TraitMoments::new(2);
        let mut rng = SplitMix64::new(9);
        for _ in 0..32 {
            acc.accumulate(&[0.25, rng.next_unit()]).unwrap();
        }
        let c = correlation(&acc).unwrap();
        assert!(c.is_degenerate(0));
        assert!(!c.is_degenerate(1));
        assert_eq!(c.get(0, 1), 0.0);
        assert_eq!(c.get(0, 0), 1.0);
    }

    #[test]
    fn correlation_needs_two_observations() {
        let mut acc = TraitMoments::new(2);
        acc.accumulate(&[0.1, 0.2]).unwrap();
        assert!(correlation(&acc).is_err());
    }

    #[test]
    fn k_zero_full_enumeration_is_independent() {
        for seed in [1u64, 2, 3] {
            let c =
                correlation(&enumerate_moments(&model(8, 0, Mode::Random, seed)).unwrap()).unwrap();
            for i in 0..8 {
                for j in 0..8 {
                    if i != j {
                        assert!(c.get(i, j).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn msc_examples() {
        let eye = CorrelationMatrix::from_rho(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(mean_squared_correlation(&eye).unwrap(), 0.0);

        let full = CorrelationMatrix::from_rho(vec![
            vec![1.0, 1.0, -1.0],
            vec![1.0, 1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(mean_squared_correlation(&full).unwrap(), 1.0);

        let mixed = CorrelationMatrix::from_rho(vec![
            vec![1.0, 0.5, -0.5],
            vec![0.5, 1.0, 0.0],
            vec![-0.5, 0.0, 1.0],
        ])
        .unwrap();
        let m = mean_squared_correlation(&mixed).unwrap();
        assert!((m - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn csv_formatting_golden() {
        let c = CorrelationMatrix::from_rho(vec![vec![1.0, -1e-15], vec![-1e-15, 1.0]]).unwrap();
        assert_eq!(
            c.to_csv(),
            "1.0000000000,0.0000000000\n0.0000000000,1.0000000000\n"
        );
    }

    #[test]
    fn csv_round_trip_is_stable() {
        let c = correlation(&enumerate_moments(&model(6, 2, Mode::Random, 12)).unwrap()).unwrap();
        let csv = c.to_csv();
        let back = CorrelationMatrix::from_csv(&csv).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((c.get(i, j) - back.get(i, j)).abs() < 1e-10);
            }
        }
        assert_eq!(back.to_csv(), csv);
    }

    #[test]
    fn csv_parse_errors_name_lines() {
        let err = CorrelationMatrix::from_csv("1.0,0.0\n0.0,oops\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert_eq!(err.exit_code(), 2);

        let err = CorrelationMatrix::from_csv("1.0,0.0\n").unwrap_err();
        assert!(err.to_string().contains("expected"));

        let err = CorrelationMatrix::from_csv("1.0,0.5\n0.4,1.0\n").unwrap_err();
        assert!(err.to_string().contains("not symmetric"));
    }

    #[test]
    fn json_export_contains_matrix() {
        let c = CorrelationMatrix::from_rho(vec![vec![1.0, 0.25], vec![0.25, 1.0]]).unwrap();
        let json: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(json["n"], 2);
        assert_eq!(json["rho"][0][1], 0.25);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn split_stream_merge_matches_sequential(
            obs in proptest::collection::vec(
                proptest::collection::vec(0.0f64..1.0, 3),
                2..40,
            ),
            split_frac in 0.0f64..1.0,
        ) {
            let split = ((obs.len() as f64) * split_frac) as usize;
            let mut whole = TraitMoments::new(3);
            for v in &obs {
                whole.accumulate(v).unwrap();
            }
            let mut left = TraitMoments::new(3);
            for v in &obs[..split] {
                left.accumulate(v).unwrap();
            }
            let mut right = TraitMoments::new(3);
            for v in &obs[split..] {
                right.accumulate(v).unwrap();
            }
            left.merge(&right).unwrap();
            prop_assert_eq!(left.count, whole.count);
            for i in 0..3 {
                let denom = whole.sum(i).abs().max(1.0);
                prop_assert!((left.sum(i) - whole.sum(i)).abs() / denom < 1e-9);
                for j in i..3 {
                    let denom = whole.co(i, j).abs().max(1.0);
                    prop_assert!((left.co(i, j) - whole.co(i, j)).abs() / denom < 1e-9);
                }
            }
        }

        #[test]
        fn affine_rescaling_preserves_correlation(
            obs in proptest::collection::vec(
                proptest::collection::vec(0.0f64..1.0, 2),
                8..64,
            ),
            scale in 0.1f64..10.0,
            shift in -5.0f64..5.0,
        ) {
            let mut plain = TraitMoments::new(2);
            let mut scaled = TraitMoments::new(2);
            for v in &obs {
                plain.accumulate(v).unwrap();
                scaled.accumulate(&[v[0], scale * v[1] + shift]).unwrap();
            }
            let a = correlation(&plain).unwrap();
            let b = correlation(&scaled).unwrap();
            if !a.is_degenerate(0) && !a.is_degenerate(1) && !b.is_degenerate(1) {
                prop_assert!((a.get(0, 1) - b.get(0, 1)).abs() < 1e-12);
            }
        }

        #[test]
        fn correlation_invariants_over_random_models(
            n in 2usize..6,
            seed in 0u64..1000,
        ) {
            let k = (seed % n as u64) as usize;
            let mode = if seed % 2 == 0 { Mode::Adjacent } else { Mode::Random };
            let c = correlation(&enumerate_moments(&model(n, k, mode, seed)).unwrap()).unwrap();
            let m = mean_squared_correlation(&c).unwrap();
            prop_assert!((0.0..=1.0).contains(&m));
            for i in 0..n {
                prop_assert_eq!(c.get(i, i), 1.0);
                for j in 0..n {
                    prop_assert!(c.get(i, j).abs() <= 1.0);
                    prop_assert_eq!(c.get(i, j), c.get(j, i));
                }
            }
        }
    }
}
