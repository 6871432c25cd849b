//! Classification by thresholding `h` measurements, with exact product-form
//! Gibbs computations over the cells of thresholds that agree on the sample.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::CsvTable;
use crate::error::{domain, Error, Result};
use crate::finite_model::{sup_over_beta, FiniteHypothesisClass, BETA_GRID_RATIO};
use crate::kernels::log_sum_exp;
use crate::local::GibbsIntegral;

/// Largest accepted number of measurements.
pub const MAX_MEASUREMENTS: usize = 12;
/// Largest `log |T|` for which cells are enumerated.
pub const ENUMERATION_NATS: f64 = 30.0;
/// Largest `|T|·|𝒴|^{2^h}` accepted by [`ThresholdModel::enumerate`].
pub const MAX_ENUMERATED: f64 = 1e5;
const CACHE_LIMIT: usize = 1 << 24;

/// Patterns in `(0,1)^h` with labels in `1..=label_count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    patterns: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(patterns: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::Ingestion("empty dataset".into()));
        }
        if patterns.len() != labels.len() {
            return Err(Error::Ingestion(format!("{} patterns but {} labels", patterns.len(), labels.len())));
        }
        let h = patterns[0].len();
        if h == 0 {
            return Err(Error::Ingestion("patterns need at least one coordinate".into()));
        }
        for (i, x) in patterns.iter().enumerate() {
            check_pattern(x, h).map_err(|e| Error::Ingestion(format!("row {}: {e}", i + 1)))?;
        }
        if let Some(i) = labels.iter().position(|&y| y == 0) {
            return Err(Error::Ingestion(format!("row {}: labels start at 1", i + 1)));
        }
        Ok(Self { patterns, labels })
    }

    /// Converts parsed CSV rows, reporting file line numbers.
    pub fn from_table(table: &CsvTable) -> Result<Self> {
        let h = table.features[0].len();
        let mut labels = Vec::with_capacity(table.labels.len());
        for ((x, &y), &line) in table.features.iter().zip(&table.labels).zip(&table.lines) {
            check_pattern(x, h).map_err(|e| Error::Ingestion(format!("line {line}: {e}")))?;
            if y < 1 {
                return Err(Error::Ingestion(format!("line {line}: label {y} must be a positive integer")));
            }
            labels.push(y as usize);
        }
        Self::new(table.features.clone(), labels)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn h(&self) -> usize {
        self.patterns[0].len()
    }

    pub fn patterns(&self) -> &[Vec<f64>] {
        &self.patterns
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn max_label(&self) -> usize {
        self.labels.iter().copied().max().unwrap_or(1)
    }
}

fn check_pattern(x: &[f64], h: usize) -> std::result::Result<(), String> {
    if x.len() != h {
        return Err(format!("expected {h} coordinates, found {}", x.len()));
    }
    if let Some(v) = x.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
        return Err(format!("coordinate {v} outside (0,1)"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellWeights {
    Lebesgue,
    Uniform,
}

/// Threshold model built on a sample. Cells are indexed by one interval index per
/// coordinate; index `i` of coordinate `j` covers `(v_{i−1}, v_i)` between the sorted
/// distinct values, with `0` and `1` as outer ends.
#[derive(Debug, Clone)]
pub struct ThresholdModel {
    h: usize,
    n: usize,
    label_count: usize,
    values: Vec<Vec<f64>>,
    ranks: Vec<Vec<usize>>,
    labels: Vec<usize>,
    weights: CellWeights,
    support_size: usize,
    cell_count: usize,
    cache: Option<Vec<u32>>,
}

/// Prediction rule applied to a new pattern.
#[derive(Debug, Clone, Copy)]
pub enum PredictMode<'a> {
    /// ρ_(t,a): uniform over the cell of `t`, with response table `a` (0-based labels).
    CellPosterior { cell: &'a [usize], response: &'a [usize] },
    Gibbs(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsStatistics {
    pub risk: f64,
    pub excess_dimension: f64,
    pub min_kl: f64,
    /// K(ρ_(t,a), π) for the empirical risk minimizer returned by [`ThresholdModel::erm`].
    pub erm_kl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub cell: Vec<usize>,
    pub thresholds: Vec<f64>,
    /// 0-based label per response code.
    pub response: Vec<usize>,
    pub risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub h: usize,
    pub n: usize,
    pub label_count: usize,
    pub weights: CellWeights,
    pub cells: usize,
    pub min_kl: f64,
    pub kl_bound: f64,
    pub counters_digest: String,
}

impl ThresholdModel {
    pub fn build(data: &LabeledDataset, label_count: usize) -> Result<Self> {
        Self::assemble(data, &[], label_count, CellWeights::Lebesgue)
    }

    /// Cells over training and shadow patterns together, uniform prior over cells.
    /// Counters still use the training sample only.
    pub fn transductive_variant(&self, data: &LabeledDataset, shadow: &[Vec<f64>]) -> Result<Self> {
        Self::assemble(data, shadow, self.label_count, CellWeights::Uniform)
    }

    fn assemble(data: &LabeledDataset, shadow: &[Vec<f64>], label_count: usize, weights: CellWeights) -> Result<Self> {
        let (h, n) = (data.h(), data.n());
        if h > MAX_MEASUREMENTS {
            return domain(format!("h = {h} exceeds the cap of {MAX_MEASUREMENTS} measurements"));
        }
        if label_count < data.max_label() {
            return domain(format!("label {} exceeds label count {label_count}", data.max_label()));
        }
        for x in shadow {
            check_pattern(x, h).map_err(|e| Error::Ingestion(format!("shadow pattern: {e}")))?;
        }
        let mut values = Vec::with_capacity(h);
        for j in 0..h {
            let mut col: Vec<f64> = data.patterns.iter().chain(shadow).map(|x| x[j]).collect();
            col.sort_by(f64::total_cmp);
            col.dedup();
            values.push(col);
        }
        let ranks = data
            .patterns
            .iter()
            .map(|x| (0..h).map(|j| values[j].partition_point(|v| *v < x[j])).collect())
            .collect();
        let log_cells: f64 = values.iter().map(|v| ((v.len() + 1) as f64).ln()).sum();
        if log_cells > ENUMERATION_NATS {
            return domain(format!("log of the cell count is {log_cells:.1} nats, above {ENUMERATION_NATS}"));
        }
        let cell_count = values.iter().map(|v| v.len() + 1).product();
        let mut model = Self {
            h,
            n,
            label_count,
            values,
            ranks,
            labels: data.labels.iter().map(|y| y - 1).collect(),
            weights,
            support_size: n + shadow.len(),
            cell_count,
            cache: None,
        };
        let width = model.codes() * label_count;
        if cell_count.saturating_mul(width) <= CACHE_LIMIT {
            let mut cache = vec![0u32; cell_count * width];
            cache.par_chunks_mut(width).enumerate().for_each(|(idx, chunk)| model.fill_counts(idx, chunk));
            model.cache = Some(cache);
        }
        Ok(model)
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn weights(&self) -> CellWeights {
        self.weights
    }

    /// Number of patterns the cells were built on (`N`, or `(k+1)N` for the transductive variant).
    pub fn support_size(&self) -> usize {
        self.support_size
    }

    pub fn codes(&self) -> usize {
        1 << self.h
    }

    pub fn cell(&self, mut idx: usize) -> Vec<usize> {
        self.values
            .iter()
            .map(|v| {
                let r = v.len() + 1;
                let i = idx % r;
                idx /= r;
                i
            })
            .collect()
    }

    pub fn cell_index(&self, cell: &[usize]) -> Result<usize> {
        if cell.len() != self.h {
            return domain("cell must have one index per coordinate");
        }
        let mut idx = 0;
        for j in (0..self.h).rev() {
            let r = self.values[j].len() + 1;
            if cell[j] >= r {
                return domain(format!("cell index {} out of range on coordinate {j}", cell[j]));
            }
            idx = idx * r + cell[j];
        }
        Ok(idx)
    }

    fn interval(&self, j: usize, i: usize) -> (f64, f64) {
        let v = &self.values[j];
        let lo = if i == 0 { 0.0 } else { v[i - 1] };
        let hi = if i == v.len() { 1.0 } else { v[i] };
        (lo, hi)
    }

    /// Middle point of a cell.
    pub fn midpoint(&self, cell: &[usize]) -> Vec<f64> {
        (0..self.h)
            .map(|j| {
                let (lo, hi) = self.interval(j, cell[j]);
                0.5 * (lo + hi)
            })
            .collect()
    }

    /// Per-coordinate interval lengths of a cell.
    pub fn cell_lengths(&self, cell: &[usize]) -> Vec<f64> {
        (0..self.h)
            .map(|j| {
                let (lo, hi) = self.interval(j, cell[j]);
                hi - lo
            })
            .collect()
    }

    /// Log prior mass of a cell.
    pub fn cell_log_weight(&self, cell: &[usize]) -> f64 {
        match self.weights {
            CellWeights::Lebesgue => self.cell_lengths(cell).iter().map(|l| l.ln()).sum(),
            CellWeights::Uniform => -(self.cell_count as f64).ln(),
        }
    }

    fn code_of(&self, i: usize, cell: &[usize]) -> usize {
        self.ranks[i].iter().zip(cell).enumerate().fold(0, |c, (j, (r, t))| c | (usize::from(r >= t) << j))
    }

    fn fill_counts(&self, idx: usize, out: &mut [u32]) {
        let cell = self.cell(idx);
        out.iter_mut().for_each(|c| *c = 0);
        for i in 0..self.n {
            out[self.code_of(i, &cell) * self.label_count + self.labels[i]] += 1;
        }
    }

    /// Counts `N·b_y^t(c)` laid out as `[c·|𝒴| + y]`.
    pub fn counters(&self, idx: usize) -> Vec<u32> {
        let width = self.codes() * self.label_count;
        match &self.cache {
            Some(c) => c[idx * width..(idx + 1) * width].to_vec(),
            None => {
                let mut out = vec![0u32; width];
                self.fill_counts(idx, &mut out);
                out
            }
        }
    }

    fn with_counters<T>(&self, idx: usize, f: impl FnOnce(&[u32]) -> T) -> T {
        let width = self.codes() * self.label_count;
        match &self.cache {
            Some(c) => f(&c[idx * width..(idx + 1) * width]),
            None => {
                let mut out = vec![0u32; width];
                self.fill_counts(idx, &mut out);
                f(&out)
            }
        }
    }

    /// Empirical risk of `(t, a)`.
    pub fn risk(&self, cell: &[usize], response: &[usize]) -> Result<f64> {
        self.check_response(response)?;
        let idx = self.cell_index(cell)?;
        Ok(self.with_counters(idx, |cnt| {
            let l = self.label_count;
            let errors: u32 = (0..self.codes())
                .map(|c| cnt[c * l..(c + 1) * l].iter().sum::<u32>() - cnt[c * l + response[c]])
                .sum();
            errors as f64 / self.n as f64
        }))
    }

    fn check_response(&self, response: &[usize]) -> Result<()> {
        if response.len() != self.codes() || response.iter().any(|&y| y >= self.label_count) {
            return domain(format!("response must map each of the {} codes to a label below {}", self.codes(), self.label_count));
        }
        Ok(())
    }

    /// Σ_c log[(1/|𝒴|) Σ_y exp(−λ(b(c) − b_y(c)) + ξ b̄_y(c))] for one cell.
    fn cell_log_factor(&self, cnt: &[u32], lambda: f64, extra: Option<&[f64]>) -> f64 {
        let (l, nf) = (self.label_count, self.n as f64);
        let mut total = 0.0;
        let mut terms = vec![0.0; l];
        for c in 0..self.codes() {
            let row = &cnt[c * l..(c + 1) * l];
            let b: u32 = row.iter().sum();
            if b == 0 && extra.is_none() {
                continue;
            }
            for y in 0..l {
                terms[y] = -lambda * (b - row[y]) as f64 / nf + extra.map_or(0.0, |e| e[c * l + y]);
            }
            total += log_sum_exp(&terms) - (l as f64).ln();
        }
        total
    }

    fn cell_logs(&self, lambda: f64) -> Vec<f64> {
        (0..self.cell_count)
            .into_par_iter()
            .map(|idx| self.cell_log_weight(&self.cell(idx)) + self.with_counters(idx, |cnt| self.cell_log_factor(cnt, lambda, None)))
            .collect()
    }

    /// log π[exp(−λr)].
    pub fn log_partition(&self, lambda: f64) -> f64 {
        log_sum_exp(&self.cell_logs(lambda))
    }

    /// π_{exp(−λr)}(r), from the per-factor softmax means.
    pub fn gibbs_risk(&self, lambda: f64) -> f64 {
        let logs = self.cell_logs(lambda);
        let z = log_sum_exp(&logs);
        let (l, nf) = (self.label_count, self.n as f64);
        let means: Vec<f64> = (0..self.cell_count)
            .into_par_iter()
            .map(|idx| {
                self.with_counters(idx, |cnt| {
                    let mut mean = 0.0;
                    let mut terms = vec![0.0; l];
                    for c in 0..self.codes() {
                        let row = &cnt[c * l..(c + 1) * l];
                        let b: u32 = row.iter().sum();
                        if b == 0 {
                            continue;
                        }
                        for y in 0..l {
                            terms[y] = -lambda * (b - row[y]) as f64 / nf;
                        }
                        let lz = log_sum_exp(&terms);
                        mean += (0..l).map(|y| (terms[y] - lz).exp() * (b - row[y]) as f64 / nf).sum::<f64>();
                    }
                    mean
                })
            })
            .collect();
        logs.iter().zip(&means).map(|(lw, m)| (lw - z).exp() * m).sum()
    }

    /// Empirical risk minimizer; ties go to the heaviest cell, then the lowest index.
    pub fn erm(&self) -> Classifier {
        let l = self.label_count;
        let mut best: Option<(u32, f64, usize, Vec<usize>)> = None;
        for idx in 0..self.cell_count {
            let (errors, response) = self.with_counters(idx, |cnt| {
                let mut errors = 0;
                let mut response = Vec::with_capacity(self.codes());
                for c in 0..self.codes() {
                    let row = &cnt[c * l..(c + 1) * l];
                    let (arg, top) = row.iter().enumerate().fold((0, 0), |acc, (y, &v)| if v > acc.1 { (y, v) } else { acc });
                    errors += row.iter().sum::<u32>() - top;
                    response.push(arg);
                }
                (errors, response)
            });
            let lw = self.cell_log_weight(&self.cell(idx));
            let better = match &best {
                None => true,
                Some((e, w, _, _)) => errors < *e || (errors == *e && lw > *w),
            };
            if better {
                best = Some((errors, lw, idx, response));
            }
        }
        let (errors, _, idx, response) = best.expect("at least one cell");
        let cell = self.cell(idx);
        Classifier { thresholds: self.midpoint(&cell), cell, response, risk: errors as f64 / self.n as f64 }
    }

    pub fn min_risk(&self) -> f64 {
        self.erm().risk
    }

    /// K(ρ_(t,a), π) = −log π(cell) + 2^h log|𝒴|.
    pub fn kl_of_cell(&self, cell: &[usize]) -> f64 {
        -self.cell_log_weight(cell) + self.codes() as f64 * (self.label_count as f64).ln()
    }

    /// `h log(M+1) + 2^h log|𝒴|` with `M` the number of patterns defining the cells.
    pub fn kl_bound(&self) -> f64 {
        self.h as f64 * ((self.support_size + 1) as f64).ln() + self.codes() as f64 * (self.label_count as f64).ln()
    }

    pub fn min_kl(&self) -> f64 {
        (0..self.cell_count).map(|idx| self.kl_of_cell(&self.cell(idx))).fold(f64::INFINITY, f64::min)
    }

    pub fn excess_dimension(&self) -> f64 {
        let floor = self.min_risk();
        sup_over_beta(|beta| beta * (self.gibbs_risk(beta) - floor), self.n, BETA_GRID_RATIO)
    }

    pub fn gibbs_statistics(&self, lambda: f64) -> GibbsStatistics {
        let erm = self.erm();
        GibbsStatistics {
            risk: self.gibbs_risk(lambda),
            excess_dimension: self.excess_dimension(),
            min_kl: self.min_kl(),
            erm_kl: self.kl_of_cell(&erm.cell),
        }
    }

    /// log π{exp[−λr + ξ m′(·, θ)]} for the reference classifier θ = (t, a).
    pub fn mgf_with_reference(&self, lambda: f64, xi: f64, cell: &[usize], response: &[usize]) -> Result<f64> {
        self.check_response(response)?;
        self.cell_index(cell)?;
        let l = self.label_count;
        let ref_loss: Vec<bool> = (0..self.n).map(|i| response[self.code_of(i, cell)] != self.labels[i]).collect();
        let logs: Vec<f64> = (0..self.cell_count)
            .into_par_iter()
            .map(|idx| {
                let t = self.cell(idx);
                let mut extra = vec![0.0; self.codes() * l];
                for i in 0..self.n {
                    let c = self.code_of(i, &t);
                    for y in 0..l {
                        if ref_loss[i] != (y != self.labels[i]) {
                            extra[c * l + y] += xi / self.n as f64;
                        }
                    }
                }
                self.cell_log_weight(&t) + self.with_counters(idx, |cnt| self.cell_log_factor(cnt, lambda, Some(&extra)))
            })
            .collect();
        Ok(log_sum_exp(&logs))
    }

    /// Fraction of each response code over the cell when the thresholds range over it.
    fn split(&self, cell: &[usize], x: &[f64]) -> Vec<f64> {
        let mut frac = vec![1.0; self.codes()];
        for j in 0..self.h {
            let (lo, hi) = self.interval(j, cell[j]);
            let up = ((x[j] - lo) / (hi - lo)).clamp(0.0, 1.0);
            for (c, f) in frac.iter_mut().enumerate() {
                *f *= if c >> j & 1 == 1 { up } else { 1.0 - up };
            }
        }
        frac
    }

    /// Label distribution (0-based) for a new pattern.
    pub fn predict(&self, mode: PredictMode<'_>, x: &[f64]) -> Result<Vec<f64>> {
        check_pattern(x, self.h).map_err(Error::Domain)?;
        let l = self.label_count;
        match mode {
            PredictMode::CellPosterior { cell, response } => {
                self.check_response(response)?;
                self.cell_index(cell)?;
                let mut p = vec![0.0; l];
                for (c, f) in self.split(cell, x).iter().enumerate() {
                    p[response[c]] += f;
                }
                Ok(p)
            }
            PredictMode::Gibbs(lambda) => {
                let nf = self.n as f64;
                let parts: Vec<(f64, Vec<f64>)> = (0..self.cell_count)
                    .into_par_iter()
                    .map(|idx| {
                        let t = self.cell(idx);
                        let frac = self.split(&t, x);
                        self.with_counters(idx, |cnt| {
                            let mut q = vec![0.0; l];
                            let mut terms = vec![0.0; l];
                            for (c, f) in frac.iter().enumerate() {
                                let row = &cnt[c * l..(c + 1) * l];
                                let b: u32 = row.iter().sum();
                                for y in 0..l {
                                    terms[y] = -lambda * (b - row[y]) as f64 / nf;
                                }
                                let lz = log_sum_exp(&terms);
                                for y in 0..l {
                                    q[y] += f * (terms[y] - lz).exp();
                                }
                            }
                            (self.cell_log_weight(&t) + self.cell_log_factor(cnt, lambda, None), q)
                        })
                    })
                    .collect();
                let z = log_sum_exp(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
                let mut p = vec![0.0; l];
                for (lw, q) in &parts {
                    let w = (lw - z).exp();
                    for y in 0..l {
                        p[y] += w * q[y];
                    }
                }
                let s: f64 = p.iter().sum();
                Ok(p.into_iter().map(|v| v / s).collect())
            }
        }
    }

    /// Responses enumerated with code `c` as the `c`-th base-|𝒴| digit.
    pub fn response_of(&self, mut index: usize) -> Vec<usize> {
        (0..self.codes())
            .map(|_| {
                let y = index % self.label_count;
                index /= self.label_count;
                y
            })
            .collect()
    }

    /// The class of all `(cell, response)` pairs; hypothesis `cell_idx·|𝒴|^{2^h} + response_idx`.
    pub fn enumerate(&self) -> Result<FiniteHypothesisClass> {
        let responses = (self.label_count as f64).powi(self.codes() as i32);
        if self.cell_count as f64 * responses > MAX_ENUMERATED {
            return domain(format!("{} cells × {responses} responses is too many to enumerate", self.cell_count));
        }
        let responses = responses as usize;
        let log_u = -(self.codes() as f64) * (self.label_count as f64).ln();
        let mut prior = Vec::with_capacity(self.cell_count * responses);
        let mut losses = Vec::with_capacity(self.cell_count * responses);
        for idx in 0..self.cell_count {
            let t = self.cell(idx);
            let codes: Vec<usize> = (0..self.n).map(|i| self.code_of(i, &t)).collect();
            let lw = self.cell_log_weight(&t);
            for a in 0..responses {
                let a = self.response_of(a);
                prior.push(lw + log_u);
                losses.push(codes.iter().zip(&self.labels).map(|(c, y)| a[*c] != *y).collect());
            }
        }
        FiniteHypothesisClass::from_log_prior(prior, &losses)
    }

    pub fn summary(&self) -> ThresholdSummary {
        let mut digest: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                digest ^= b as u64;
                digest = digest.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for (r, y) in self.ranks.iter().zip(&self.labels) {
            r.iter().for_each(|v| eat(*v as u64));
            eat(*y as u64);
        }
        ThresholdSummary {
            h: self.h,
            n: self.n,
            label_count: self.label_count,
            weights: self.weights,
            cells: self.cell_count,
            min_kl: self.min_kl(),
            kl_bound: self.kl_bound(),
            counters_digest: format!("{digest:016x}"),
        }
    }
}

impl GibbsIntegral for ThresholdModel {
    fn gibbs_integral(&self, beta: f64, lambda: f64) -> Result<f64> {
        if beta > lambda {
            return domain(format!("integration bounds reversed: {beta} > {lambda}"));
        }
        Ok((self.log_partition(beta) - self.log_partition(lambda)).max(0.0))
    }
}
