//! Two-group synthetic cohorts with known connectivity and a four-part
//! noise mixture.
//!
//! Each subject's clean signal is drawn row by row from a zero-mean
//! multivariate normal with the group covariance. Group 1's covariance is
//! the base covariance with `effect_edges` added. Four additive noise
//! sources are layered on top:
//!
//! * thermal: i.i.d. Gaussian per sample,
//! * drift: `A · (t/T + cos(πt/T + φ_r))` with `φ_r ∈ {0, π}` per region,
//! * motion: at volumes hit with probability `spike_rate`, a ±amplitude
//!   offset added to every region,
//! * physiological: cardiac and respiratory sinusoids at their aliased
//!   frequencies, shared across regions with per-region gain in
//!   `[0.5, 1.5]`.
//!
//! Subject `(group, index)` reads a dedicated ChaCha8 stream of
//! `rng_seed`, so any subset can be regenerated independently.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::ingest::{DatasetManifest, ManifestEntry, RoiTimeSeries};
use crate::kv;

/// Eigenvalue floor used when repairing a covariance that lost PSD.
pub const EIGEN_FLOOR: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum SimulateError {
    #[error("invalid simulation spec: {0}")]
    SpecInvalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

type Result<T> = std::result::Result<T, SimulateError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(SimulateError::SpecInvalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaseCovariance {
    /// Contiguous, near-equal region blocks with a constant within-block
    /// correlation and zero between blocks.
    Block { n_blocks: usize, within_block_corr: f64 },
    /// Explicit R×R correlation matrix.
    Explicit(DMatrix<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectEdge {
    pub i: usize,
    pub j: usize,
    pub delta_corr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub n_per_group: usize,
    pub regions: usize,
    pub timepoints: usize,
    pub tr_seconds: f64,
    pub base_covariance: BaseCovariance,
    pub effect_edges: Vec<EffectEdge>,
    pub thermal_sigma: f64,
    pub drift_amplitude: f64,
    pub spike_rate: f64,
    pub spike_amplitude: f64,
    pub cardiac_hz: f64,
    pub respiratory_hz: f64,
    pub physio_amplitude: f64,
    pub rng_seed: u64,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            n_per_group: 15,
            regions: 20,
            timepoints: 300,
            tr_seconds: 2.0,
            base_covariance: BaseCovariance::Block {
                n_blocks: 4,
                within_block_corr: 0.6,
            },
            effect_edges: Vec::new(),
            thermal_sigma: 0.5,
            drift_amplitude: 2.0,
            spike_rate: 0.02,
            spike_amplitude: 2.0,
            cardiac_hz: 1.2,
            respiratory_hz: 0.3,
            physio_amplitude: 1.0,
            rng_seed: 0,
        }
    }
}

impl SimulationSpec {
    /// Default spec with every noise amplitude set to zero.
    pub fn noise_free() -> Self {
        Self {
            thermal_sigma: 0.0,
            drift_amplitude: 0.0,
            spike_rate: 0.0,
            spike_amplitude: 0.0,
            physio_amplitude: 0.0,
            ..Self::default()
        }
    }
}

/// Block index of each region for `n_blocks` contiguous blocks.
pub fn block_assignment(regions: usize, n_blocks: usize) -> Vec<usize> {
    (0..regions).map(|r| r * n_blocks / regions).collect()
}

/// Frequency observed when sampling a sinusoid of `hz` every `tr_seconds`.
pub fn aliased_frequency(hz: f64, tr_seconds: f64) -> f64 {
    let fs = 1.0 / tr_seconds;
    (hz - fs * (hz / fs).round()).abs()
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_group == 0 {
            return invalid("n_per_group must be positive");
        }
        if self.regions < 2 {
            return invalid("regions must be at least 2");
        }
        if self.timepoints < 2 {
            return invalid("timepoints must be at least 2");
        }
        if !(self.tr_seconds > 0.0 && self.tr_seconds.is_finite()) {
            return invalid("tr_seconds must be positive");
        }
        match &self.base_covariance {
            BaseCovariance::Block {
                n_blocks,
                within_block_corr,
            } => {
                if *n_blocks == 0 || *n_blocks > self.regions {
                    return invalid(format!("n_blocks must be in 1..={}", self.regions));
                }
                if !(*within_block_corr >= 0.0 && *within_block_corr < 1.0) {
                    return invalid("within_block_corr must be in [0, 1)");
                }
            }
            BaseCovariance::Explicit(m) => {
                if m.shape() != (self.regions, self.regions) {
                    return invalid(format!("base covariance must be {0}x{0}", self.regions));
                }
                for i in 0..self.regions {
                    if m[(i, i)] != 1.0 {
                        return invalid("base covariance must have a unit diagonal");
                    }
                    for j in 0..i {
                        if m[(i, j)] != m[(j, i)] || !m[(i, j)].is_finite() {
                            return invalid("base covariance must be symmetric and finite");
                        }
                    }
                }
                if pivoted_cholesky(m, 1e-9).is_none() {
                    return invalid("base covariance is not positive semidefinite");
                }
            }
        }
        for e in &self.effect_edges {
            if e.i == e.j || e.i >= self.regions || e.j >= self.regions {
                return invalid(format!("effect edge ({}, {}) is not an off-diagonal pair", e.i, e.j));
            }
            if !e.delta_corr.is_finite() {
                return invalid("effect delta must be finite");
            }
        }
        let nonneg = [
            ("thermal_sigma", self.thermal_sigma),
            ("drift_amplitude", self.drift_amplitude),
            ("spike_amplitude", self.spike_amplitude),
            ("cardiac_hz", self.cardiac_hz),
            ("respiratory_hz", self.respiratory_hz),
            ("physio_amplitude", self.physio_amplitude),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be finite and >= 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.spike_rate) {
            return invalid("spike_rate must be in [0, 1]");
        }
        Ok(())
    }

    pub fn base_matrix(&self) -> DMatrix<f64> {
        match &self.base_covariance {
            BaseCovariance::Explicit(m) => m.clone(),
            BaseCovariance::Block {
                n_blocks,
                within_block_corr,
            } => {
                let blocks = block_assignment(self.regions, *n_blocks);
                DMatrix::from_fn(self.regions, self.regions, |i, j| {
                    if i == j {
                        1.0
                    } else if blocks[i] == blocks[j] {
                        *within_block_corr
                    } else {
                        0.0
                    }
                })
            }
        }
    }

    /// Within-block region pairs `(i, j)`, `i < j`, taken round-robin over
    /// blocks so that a prefix spreads across all blocks.
    pub fn within_block_pairs(&self) -> Vec<(usize, usize)> {
        let n_blocks = match self.base_covariance {
            BaseCovariance::Block { n_blocks, .. } => n_blocks,
            BaseCovariance::Explicit(_) => 1,
        };
        let blocks = block_assignment(self.regions, n_blocks);
        let mut per_block: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_blocks];
        for i in 0..self.regions {
            for j in (i + 1)..self.regions {
                if blocks[i] == blocks[j] {
                    per_block[blocks[i]].push((i, j));
                }
            }
        }
        let longest = per_block.iter().map(Vec::len).max().unwrap_or(0);
        (0..longest)
            .flat_map(|k| per_block.iter().filter_map(move |b| b.get(k).copied()))
            .collect()
    }

    /// Replaces `effect_edges` with `count` within-block pairs shifted by
    /// `delta_corr`.
    pub fn with_planted_block_effects(mut self, count: usize, delta_corr: f64) -> Result<Self> {
        let pairs = self.within_block_pairs();
        if pairs.len() < count {
            return invalid(format!("only {} within-block pairs available, {count} requested", pairs.len()));
        }
        self.effect_edges = pairs[..count]
            .iter()
            .map(|&(i, j)| EffectEdge { i, j, delta_corr })
            .collect();
        Ok(self)
    }

    /// Reads a key=value spec. Unset keys keep their defaults. Effect edges
    /// are written `i-j:delta` separated by `;`, e.g.
    /// `effect_edges=0-1:-0.3;2-3:-0.3`; alternatively
    /// `planted_block_edges=15` with `planted_delta=-0.3`.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let map = kv::parse(text).map_err(|e| SimulateError::SpecInvalid(e.to_string()))?;
        Self::from_map(&map)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        fn num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
            match map.get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse()
                    .map_err(|_| SimulateError::SpecInvalid(format!("bad value for {key}: {v:?}"))),
            }
        }
        const KNOWN: [&str; 18] = [
            "n_per_group",
            "regions",
            "timepoints",
            "tr_seconds",
            "n_blocks",
            "within_block_corr",
            "effect_edges",
            "planted_block_edges",
            "planted_delta",
            "thermal_sigma",
            "drift_amplitude",
            "spike_rate",
            "spike_amplitude",
            "cardiac_hz",
            "respiratory_hz",
            "physio_amplitude",
            "seed",
            "rng_seed",
        ];
        if let Some(k) = map.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return invalid(format!("unknown key {k:?}"));
        }
        let d = Self::default();
        let (d_blocks, d_within) = match d.base_covariance {
            BaseCovariance::Block {
                n_blocks,
                within_block_corr,
            } => (n_blocks, within_block_corr),
            BaseCovariance::Explicit(_) => unreachable!("default is block"),
        };
        let seed = match (map.get("seed"), map.get("rng_seed")) {
            (Some(_), Some(_)) => return invalid("give either seed or rng_seed"),
            (Some(_), None) => num(map, "seed", 0u64)?,
            _ => num(map, "rng_seed", d.rng_seed)?,
        };
        let mut spec = Self {
            n_per_group: num(map, "n_per_group", d.n_per_group)?,
            regions: num(map, "regions", d.regions)?,
            timepoints: num(map, "timepoints", d.timepoints)?,
            tr_seconds: num(map, "tr_seconds", d.tr_seconds)?,
            base_covariance: BaseCovariance::Block {
                n_blocks: num(map, "n_blocks", d_blocks)?,
                within_block_corr: num(map, "within_block_corr", d_within)?,
            },
            effect_edges: match map.get("effect_edges") {
                Some(v) => parse_effect_edges(v)?,
                None => Vec::new(),
            },
            thermal_sigma: num(map, "thermal_sigma", d.thermal_sigma)?,
            drift_amplitude: num(map, "drift_amplitude", d.drift_amplitude)?,
            spike_rate: num(map, "spike_rate", d.spike_rate)?,
            spike_amplitude: num(map, "spike_amplitude", d.spike_amplitude)?,
            cardiac_hz: num(map, "cardiac_hz", d.cardiac_hz)?,
            respiratory_hz: num(map, "respiratory_hz", d.respiratory_hz)?,
            physio_amplitude: num(map, "physio_amplitude", d.physio_amplitude)?,
            rng_seed: seed,
        };
        if let Some(count) = map.get("planted_block_edges") {
            if map.contains_key("effect_edges") {
                return invalid("give either effect_edges or planted_block_edges");
            }
            let count: usize = count
                .parse()
                .map_err(|_| SimulateError::SpecInvalid(format!("bad planted_block_edges {count:?}")))?;
            let delta = num(map, "planted_delta", -0.3)?;
            spec = spec.with_planted_block_effects(count, delta)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Canonical key=value text (block covariance only).
    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k}={v}\n"));
        line("n_per_group", self.n_per_group.to_string());
        line("regions", self.regions.to_string());
        line("timepoints", self.timepoints.to_string());
        line("tr_seconds", self.tr_seconds.to_string());
        if let BaseCovariance::Block {
            n_blocks,
            within_block_corr,
        } = self.base_covariance
        {
            line("n_blocks", n_blocks.to_string());
            line("within_block_corr", within_block_corr.to_string());
        }
        if !self.effect_edges.is_empty() {
            let edges: Vec<String> = self
                .effect_edges
                .iter()
                .map(|e| format!("{}-{}:{}", e.i, e.j, e.delta_corr))
                .collect();
            line("effect_edges", edges.join(";"));
        }
        line("thermal_sigma", self.thermal_sigma.to_string());
        line("drift_amplitude", self.drift_amplitude.to_string());
        line("spike_rate", self.spike_rate.to_string());
        line("spike_amplitude", self.spike_amplitude.to_string());
        line("cardiac_hz", self.cardiac_hz.to_string());
        line("respiratory_hz", self.respiratory_hz.to_string());
        line("physio_amplitude", self.physio_amplitude.to_string());
        line("rng_seed", self.rng_seed.to_string());
        out
    }

    pub fn region_labels(&self) -> Vec<String> {
        let width = self.regions.to_string().len().max(3);
        (0..self.regions).map(|r| format!("R{:0width$}", r + 1)).collect()
    }
}

fn parse_effect_edges(text: &str) -> Result<Vec<EffectEdge>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let bad = || SimulateError::SpecInvalid(format!("effect edge must be `i-j:delta`, got {item:?}"));
            let (pair, delta) = item.split_once(':').ok_or_else(bad)?;
            let (i, j) = pair.split_once('-').ok_or_else(bad)?;
            Ok(EffectEdge {
                i: i.trim().parse().map_err(|_| bad())?,
                j: j.trim().parse().map_err(|_| bad())?,
                delta_corr: delta.trim().parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// Cholesky factorization with symmetric (diagonal) pivoting.
///
/// Returns `L` (R×rank, rows in the original order) with `m ≈ L Lᵀ`, or
/// `None` when a pivot falls below `-tol` or the residual after stopping
/// has entries larger than `tol`, i.e. `m` is not PSD within `tol`.
pub fn pivoted_cholesky(m: &DMatrix<f64>, tol: f64) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let mut rank = 0;
    for k in 0..n {
        let (piv, &max) = (k..n)
            .map(|i| (i, &a[(i, i)]))
            .max_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty range");
        if max < -tol {
            return None;
        }
        if max <= tol {
            break;
        }
        a.swap_rows(k, piv);
        a.swap_columns(k, piv);
        l.swap_rows(k, piv);
        perm.swap(k, piv);
        let d = a[(k, k)].sqrt();
        l[(k, k)] = d;
        for i in (k + 1)..n {
            l[(i, k)] = a[(i, k)] / d;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..=i {
                let v = a[(i, j)] - l[(i, k)] * l[(j, k)];
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        rank = k + 1;
    }
    for i in rank..n {
        for j in rank..n {
            if a[(i, j)].abs() > tol.max(1e-9) {
                return None;
            }
        }
    }
    let mut out = DMatrix::zeros(n, rank);
    for (row, &orig) in perm.iter().enumerate() {
        for c in 0..rank {
            out[(orig, c)] = l[(row, c)];
        }
    }
    Some(out)
}

/// Floors eigenvalues at [`EIGEN_FLOOR`] and rescales to a unit diagonal.
pub fn repair_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let floored = eig.eigenvalues.map(|v| v.max(EIGEN_FLOOR));
    let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&floored) * eig.eigenvectors.transpose();
    let d: Vec<f64> = (0..m.nrows()).map(|i| rebuilt[(i, i)].sqrt()).collect();
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            let v = rebuilt[(i, j)] / (d[i] * d[j]);
            // symmetrize exactly
            let w = rebuilt[(j, i)] / (d[j] * d[i]);
            0.5 * (v + w)
        }
    })
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

#[derive(Debug, Clone, Serialize)]
pub struct RealizedEffect {
    pub i: usize,
    pub j: usize,
    pub requested_delta: f64,
    pub realized_delta: f64,
}

/// Per-subject noise draws, recorded for ground truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectNoise {
    pub subject_id: String,
    pub group: u8,
    pub drift_signs: Vec<i8>,
    pub spike_volumes: Vec<usize>,
    pub spike_signs: Vec<i8>,
    pub cardiac_phase: f64,
    pub respiratory_phase: f64,
    pub physio_gains: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundTruth {
    pub region_labels: Vec<String>,
    pub group_covariances: [Vec<Vec<f64>>; 2],
    pub effects: Vec<RealizedEffect>,
    pub group1_psd_repaired: bool,
    pub cardiac_hz_applied: f64,
    pub respiratory_hz_applied: f64,
    pub subjects: Vec<SubjectNoise>,
}

/// Spec plus the derived group covariances and their sampling factors.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: SimulationSpec,
    covariances: [DMatrix<f64>; 2],
    factors: [DMatrix<f64>; 2],
    repaired: bool,
}

impl Simulator {
    pub fn new(spec: SimulationSpec) -> Result<Self> {
        spec.validate()?;
        let base = spec.base_matrix();
        let mut shifted = base.clone();
        for e in &spec.effect_edges {
            shifted[(e.i, e.j)] += e.delta_corr;
            shifted[(e.j, e.i)] += e.delta_corr;
        }
        let needs_repair = min_eigenvalue(&shifted) < EIGEN_FLOOR
            || shifted.iter().any(|v| v.abs() > 1.0);
        let group1 = if needs_repair { repair_psd(&shifted) } else { shifted };
        let tol = 1e-9;
        let f0 = pivoted_cholesky(&base, tol)
            .ok_or_else(|| SimulateError::SpecInvalid("group 0 covariance failed the PSD check".into()))?;
        let f1 = pivoted_cholesky(&group1, tol)
            .ok_or_else(|| SimulateError::SpecInvalid("group 1 covariance failed the PSD check".into()))?;
        Ok(Self {
            spec,
            covariances: [base, group1],
            factors: [f0, f1],
            repaired: needs_repair,
        })
    }

    pub fn spec(&self) -> &SimulationSpec {
        &self.spec
    }

    pub fn covariance(&self, group: u8) -> &DMatrix<f64> {
        &self.covariances[group as usize]
    }

    pub fn group1_repaired(&self) -> bool {
        self.repaired
    }

    pub fn subject_id(group: u8, index: usize) -> String {
        format!("g{group}_s{index:03}")
    }

    fn rng_for(&self, group: u8, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.rng_seed);
        rng.set_stream(((group as u64) << 32) | index as u64);
        rng
    }

    /// Generates one subject and the noise draws used for it.
    pub fn subject(&self, group: u8, index: usize) -> Result<(RoiTimeSeries, SubjectNoise)> {
        if group > 1 {
            return invalid(format!("group must be 0 or 1, got {group}"));
        }
        let spec = &self.spec;
        let (t_len, r) = (spec.timepoints, spec.regions);
        let mut rng = self.rng_for(group, index);
        let factor = &self.factors[group as usize];

        let z = DMatrix::<f64>::from_fn(t_len, factor.ncols(), |_, _| rng.sample(StandardNormal));
        let mut data = z * factor.transpose();

        let thermal = DMatrix::<f64>::from_fn(t_len, r, |_, _| rng.sample::<f64, _>(StandardNormal));
        data += thermal * spec.thermal_sigma;

        let drift_signs: Vec<i8> = (0..r).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        let mut spike_volumes = Vec::new();
        let mut spike_signs = Vec::new();
        for t in 0..t_len {
            if rng.random_bool(spec.spike_rate) {
                spike_volumes.push(t);
                spike_signs.push(if rng.random_bool(0.5) { 1 } else { -1 });
            }
        }
        let cardiac_phase = rng.random_range(0.0..2.0 * PI);
        let respiratory_phase = rng.random_range(0.0..2.0 * PI);
        let physio_gains: Vec<f64> = (0..r).map(|_| rng.random_range(0.5..1.5)).collect();

        let f_card = aliased_frequency(spec.cardiac_hz, spec.tr_seconds);
        let f_resp = aliased_frequency(spec.respiratory_hz, spec.tr_seconds);
        let t_total = t_len as f64;
        for t in 0..t_len {
            let tf = t as f64;
            let ramp = tf / t_total;
            let half_cos = (PI * tf / t_total).cos();
            let secs = tf * spec.tr_seconds;
            let physio = (2.0 * PI * f_card * secs + cardiac_phase).sin()
                + (2.0 * PI * f_resp * secs + respiratory_phase).sin();
            for j in 0..r {
                let drift = spec.drift_amplitude * (ramp + f64::from(drift_signs[j]) * half_cos);
                data[(t, j)] += drift + spec.physio_amplitude * physio_gains[j] * physio;
            }
        }
        for (&t, &s) in spike_volumes.iter().zip(&spike_signs) {
            for j in 0..r {
                data[(t, j)] += spec.spike_amplitude * f64::from(s);
            }
        }

        let subject_id = Self::subject_id(group, index);
        let ts = RoiTimeSeries::new(subject_id.clone(), spec.region_labels(), data, spec.tr_seconds)
            .map_err(|e| SimulateError::SpecInvalid(e.to_string()))?;
        let noise = SubjectNoise {
            subject_id,
            group,
            drift_signs,
            spike_volumes,
            spike_signs,
            cardiac_phase,
            respiratory_phase,
            physio_gains,
        };
        Ok((ts, noise))
    }

    /// All `2 · n_per_group` subjects, group 0 first. Generation runs in
    /// parallel; output order and content do not depend on scheduling.
    pub fn cohort(&self) -> Result<Cohort> {
        let n = self.spec.n_per_group;
        let keys: Vec<(u8, usize)> = (0..2u8).flat_map(|g| (0..n).map(move |i| (g, i))).collect();
        let generated: Vec<(RoiTimeSeries, SubjectNoise)> = keys
            .par_iter()
            .map(|&(g, i)| self.subject(g, i))
            .collect::<Result<_>>()?;
        let entries = generated
            .iter()
            .map(|(ts, noise)| ManifestEntry {
                subject_id: ts.subject_id().to_string(),
                label: noise.group,
                path: PathBuf::from(format!("{}.csv", ts.subject_id())),
            })
            .collect();
        let manifest = DatasetManifest::new(entries, ["group0".into(), "group1".into()], self.spec.tr_seconds)
            .map_err(|e| SimulateError::SpecInvalid(e.to_string()))?;
        let (series, noise): (Vec<_>, Vec<_>) = generated.into_iter().unzip();
        let ground_truth = self.ground_truth(noise);
        Ok(Cohort {
            series,
            manifest,
            ground_truth,
        })
    }

    fn ground_truth(&self, subjects: Vec<SubjectNoise>) -> GroundTruth {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            m.row_iter().map(|r| r.iter().copied().collect()).collect()
        };
        let effects = self
            .spec
            .effect_edges
            .iter()
            .map(|e| RealizedEffect {
                i: e.i,
                j: e.j,
                requested_delta: e.delta_corr,
                realized_delta: self.covariances[1][(e.i, e.j)] - self.covariances[0][(e.i, e.j)],
            })
            .collect();
        GroundTruth {
            region_labels: self.spec.region_labels(),
            group_covariances: [rows(&self.covariances[0]), rows(&self.covariances[1])],
            effects,
            group1_psd_repaired: self.repaired,
            cardiac_hz_applied: aliased_frequency(self.spec.cardiac_hz, self.spec.tr_seconds),
            respiratory_hz_applied: aliased_frequency(self.spec.respiratory_hz, self.spec.tr_seconds),
            subjects,
        }
    }
}

/// Generated series, a manifest with relative file names, and ground truth.
#[derive(Debug, Clone)]
pub struct Cohort {
    pub series: Vec<RoiTimeSeries>,
    pub manifest: DatasetManifest,
    pub ground_truth: GroundTruth,
}

impl Cohort {
    /// Writes one CSV per subject, `manifest.txt` and `ground_truth.json`
    /// into `out_dir` (created if missing).
    pub fn write(&self, out_dir: impl AsRef<Path>) -> Result<()> {
        let dir = out_dir.as_ref();
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| SimulateError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        for (ts, entry) in self.series.iter().zip(self.manifest.entries()) {
            let path = dir.join(&entry.path);
            std::fs::write(&path, ts.to_csv_string()).map_err(io(&path))?;
        }
        let path = dir.join("manifest.txt");
        std::fs::write(&path, self.manifest.to_text()).map_err(io(&path))?;
        let path = dir.join("ground_truth.json");
        let json = serde_json::to_string_pretty(&self.ground_truth).expect("ground truth serializes");
        std::fs::write(&path, json + "\n").map_err(io(&path))?;
        Ok(())
    }
}

pub fn generate_subject(spec: &SimulationSpec, group: u8, subject_index: usize) -> Result<RoiTimeSeries> {
    Simulator::new(spec.clone())?.subject(group, subject_index).map(|(ts, _)| ts)
}

pub fn generate_cohort(spec: &SimulationSpec) -> Result<Cohort> {
    Simulator::new(spec.clone())?.cohort()
}
