//! Single-ended short-read alignment: hash-index candidate lookup, argmin
//! over a pluggable distance engine, and backtrack on the winning locus.
//! Also houses the read simulator and the accuracy evaluator used to check
//! the pipeline end to end.
//!
//! The two engines are interchangeable inside the argmin: the exact
//! dynamic-programming scores and the decoded lattice keys induce the same
//! candidate order, so swapping engines cannot change the reported locus.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::fastx::FastqRecord;
use crate::lattice::{build_lattice, LatticeConfig};
use crate::oracle::{self, full_matrix};
use crate::penalty::{encode_penalties, DelayPenalties, EncodingParams, GapPenalties};
use crate::seq::PackedSequence;
use crate::Mode;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignerError {
    ReferenceTooShort { reference_len: usize, seed_len: usize },
    SeedLenOutOfRange(usize),
    ReadTooShort { read_len: usize, seed_len: usize },
    NoCandidates,
    BadConfig(String),
}

impl fmt::Display for AlignerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlignerError::ReferenceTooShort {
                reference_len,
                seed_len,
            } => write!(
                f,
                "reference ({reference_len} bp) shorter than seed length {seed_len}"
            ),
            AlignerError::SeedLenOutOfRange(s) => {
                write!(f, "seed length {s} outside supported range 4..=31")
            }
            AlignerError::ReadTooShort { read_len, seed_len } => {
                write!(f, "read ({read_len} bp) shorter than seed length {seed_len}")
            }
            AlignerError::NoCandidates => write!(f, "no candidate loci found"),
            AlignerError::BadConfig(msg) => write!(f, "bad aligner config: {msg}"),
        }
    }
}

impl std::error::Error for AlignerError {}

fn seed_key(codes: &[u8]) -> u64 {
    let mut key = 0u64;
    for &c in codes {
        key = (key << 2) | c as u64;
    }
    key
}

/// Hash index over every overlapping seed of the reference.
#[derive(Debug)]
pub struct ReferenceIndex {
    seed_len: usize,
    map: HashMap<u64, Vec<u32>>,
    ref_codes: Vec<u8>,
}

impl ReferenceIndex {
    pub fn seed_len(&self) -> usize {
        self.seed_len
    }

    pub fn reference_len(&self) -> usize {
        self.ref_codes.len()
    }

    pub fn lookup(&self, seed: &[u8]) -> &[u32] {
        debug_assert_eq!(seed.len(), self.seed_len);
        self.map.get(&seed_key(seed)).map_or(&[], |v| v.as_slice())
    }

    pub(crate) fn reference_codes(&self) -> &[u8] {
        &self.ref_codes
    }
}

pub fn build_index(
    reference: &PackedSequence,
    seed_len: usize,
) -> Result<ReferenceIndex, AlignerError> {
    if !(4..=31).contains(&seed_len) {
        return Err(AlignerError::SeedLenOutOfRange(seed_len));
    }
    let ref_codes = reference.codes();
    if ref_codes.len() < seed_len {
        return Err(AlignerError::ReferenceTooShort {
            reference_len: ref_codes.len(),
            seed_len,
        });
    }
    let mut map: HashMap<u64, Vec<u32>> = HashMap::new();
    for i in 0..=ref_codes.len() - seed_len {
        map.entry(seed_key(&ref_codes[i..i + seed_len]))
            .or_default()
            .push(i as u32);
    }
    // Scan order is ascending, so every locus list is already sorted.
    Ok(ReferenceIndex {
        seed_len,
        map,
        ref_codes,
    })
}

/// A candidate origin with its scoring window on the reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// Estimated read origin on the reference.
    pub locus: usize,
    pub window_start: usize,
    pub window_len: usize,
    /// Number of seeds that voted for this locus.
    pub seed_hits: usize,
}

#[derive(Debug, Clone)]
pub struct CandidateSet {
    /// Sorted ascending by locus; non-empty.
    pub candidates: Vec<Candidate>,
}

/// Look up candidate loci for a read: sample non-overlapping seeds (every
/// `seed_len`-th offset plus the final one), shift each hit back by its seed
/// offset, dedup, rank by hit count then locus, truncate, and attach
/// reference windows clipped to bounds.
pub fn candidate_locations(
    read_codes: &[u8],
    idx: &ReferenceIndex,
    max_candidates: usize,
    window_slack: usize,
) -> Result<CandidateSet, AlignerError> {
    let s = idx.seed_len;
    let read_len = read_codes.len();
    if read_len < s {
        return Err(AlignerError::ReadTooShort {
            read_len,
            seed_len: s,
        });
    }
    let mut offsets: Vec<usize> = (0..=read_len - s).step_by(s).collect();
    if *offsets.last().unwrap() != read_len - s {
        offsets.push(read_len - s);
    }

    let mut hits: HashMap<usize, usize> = HashMap::new();
    for &o in &offsets {
        for &h in idx.lookup(&read_codes[o..o + s]) {
            let h = h as usize;
            if h >= o {
                *hits.entry(h - o).or_insert(0) += 1;
            }
        }
    }
    if hits.is_empty() {
        return Err(AlignerError::NoCandidates);
    }
    let mut ranked: Vec<(usize, usize)> = hits.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(max_candidates.max(1));
    ranked.sort_by_key(|&(locus, _)| locus);

    let ref_len = idx.reference_len();
    let candidates = ranked
        .into_iter()
        .map(|(locus, seed_hits)| {
            // The engines anchor at the window start, so the window begins
            // at the estimated origin; slack extends only the free end.
            let window_end = (locus + read_len + window_slack).min(ref_len);
            Candidate {
                locus,
                window_start: locus,
                window_len: window_end - locus,
                seed_hits,
            }
        })
        .collect();
    Ok(CandidateSet { candidates })
}

/// Which distance engine scores the candidate windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Oracle,
    Lattice,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Oracle => write!(f, "oracle"),
            Engine::Lattice => write!(f, "lattice"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlignerConfig {
    pub gp: GapPenalties,
    pub encoding: EncodingParams,
    pub engine: Engine,
    /// Sw scores each window semi-globally (default); Lv applies the capped
    /// global variant with `lv_cap`.
    pub mode: Mode,
    /// Maximum permissible distance under the shifted penalties; required
    /// for Lv mode.
    pub lv_cap: Option<u64>,
    /// Band the Lv lattice to this many indels.
    pub band_max_edits: Option<u64>,
    pub tile_len: usize,
    pub seed_len: usize,
    pub max_candidates: usize,
    pub window_slack: usize,
}

impl AlignerConfig {
    pub fn new(gp: GapPenalties, engine: Engine) -> Self {
        AlignerConfig {
            gp,
            encoding: EncodingParams::canonical_for(&gp),
            engine,
            mode: Mode::Sw,
            lv_cap: None,
            band_max_edits: None,
            tile_len: 16,
            seed_len: 20,
            max_candidates: 16,
            window_slack: 8,
        }
    }

    fn validate(&self) -> Result<(), AlignerError> {
        if (self.mode == Mode::Lv) != self.lv_cap.is_some() {
            return Err(AlignerError::BadConfig(
                "lv_cap must be set exactly when mode is lv".into(),
            ));
        }
        if self.band_max_edits.is_some() && self.mode != Mode::Lv {
            return Err(AlignerError::BadConfig(
                "band_max_edits requires lv mode".into(),
            ));
        }
        if self.mode == Mode::Nw {
            return Err(AlignerError::BadConfig(
                "nw mode is not meaningful for window alignment; use sw or lv".into(),
            ));
        }
        Ok(())
    }

    fn effective_slack(&self) -> usize {
        match (self.mode, self.band_max_edits) {
            (Mode::Lv, Some(b)) => b as usize,
            _ => self.window_slack,
        }
    }

    fn delays(&self) -> Result<DelayPenalties, AlignerError> {
        encode_penalties(&self.gp, &self.encoding)
            .map_err(|e| AlignerError::BadConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentStatus {
    Aligned,
    NoCandidates,
    /// The read held bases outside the four-letter alphabet.
    Filtered,
}

impl fmt::Display for AlignmentStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlignmentStatus::Aligned => write!(f, "aligned"),
            AlignmentStatus::NoCandidates => write!(f, "no_candidates"),
            AlignmentStatus::Filtered => write!(f, "filtered"),
        }
    }
}

/// Outcome for one read.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub read_id: String,
    pub status: AlignmentStatus,
    pub locus: Option<usize>,
    /// Engine ordering key of the winning candidate (exact score for the
    /// oracle engine, decoded cycle key for the lattice engine).
    pub key: Option<i64>,
    /// Run-length edit script of the winning window alignment.
    pub cigar: Option<String>,
    /// Lv only: every surviving candidate hit the timeout.
    pub capped: bool,
}

impl Alignment {
    /// Tab-separated record: id, status, locus, key, cigar.
    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.read_id,
            self.status,
            self.locus.map_or("-".into(), |l| l.to_string()),
            self.key.map_or("-".into(), |k| k.to_string()),
            self.cigar.as_deref().unwrap_or("-"),
        )
    }
}

/// Per-stage counters over one `align_all` run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    pub reads_total: usize,
    pub reads_aligned: usize,
    pub reads_no_candidates: usize,
    pub reads_filtered: usize,
    pub candidate_lookups: usize,
    pub distance_evaluations: usize,
    pub configs_computed: usize,
}

impl RunStats {
    fn absorb(&mut self, other: &RunStats) {
        self.reads_total += other.reads_total;
        self.reads_aligned += other.reads_aligned;
        self.reads_no_candidates += other.reads_no_candidates;
        self.reads_filtered += other.reads_filtered;
        self.candidate_lookups += other.candidate_lookups;
        self.distance_evaluations += other.distance_evaluations;
        self.configs_computed += other.configs_computed;
    }
}

/// (rank, key, locus) triple the argmin minimizes: capped candidates rank
/// behind everything that finished, ties break to the smaller key and then
/// the smaller locus.
type CandidateScore = (bool, i64, usize);

fn score_candidate(
    read: &PackedSequence,
    window: &PackedSequence,
    cfg: &AlignerConfig,
    delays: &DelayPenalties,
) -> CandidateScore {
    // Both engines rank under the same shifted penalties; the shift is part
    // of the engine configuration, so the argmin cannot depend on which
    // engine computed it.
    match cfg.engine {
        Engine::Oracle => match cfg.mode {
            Mode::Lv => {
                let cap = cfg.lv_cap.expect("validated") as i64;
                let (value, capped) = oracle::lv_distance_codes(
                    &read.codes(),
                    &window.codes(),
                    &cfg.gp.shifted(cfg.encoding.shift),
                    cap,
                );
                (capped, value, 0)
            }
            _ => {
                let (score, _) = oracle::sw_distance_codes(
                    &read.codes(),
                    &window.codes(),
                    &cfg.gp.shifted(cfg.encoding.shift),
                );
                (false, score, 0)
            }
        },
        Engine::Lattice => {
            let lat_cfg = match cfg.mode {
                Mode::Lv => {
                    let cap = cfg.lv_cap.expect("validated");
                    // Provision the deadline for the flip-flop stages the
                    // signal must cross, so the timeout keys on the decoded
                    // distance exactly like the oracle's cap.
                    let stage = |l: usize| ((l.max(1) - 1) / cfg.tile_len) as u64;
                    let offsets = stage(read.len()) + stage(window.len());
                    LatticeConfig::lv(
                        *delays,
                        cfg.tile_len,
                        cap * cfg.encoding.scale as u64 + offsets,
                        cfg.band_max_edits,
                    )
                }
                _ => LatticeConfig::sw(*delays, cfg.tile_len),
            };
            match build_lattice(read, window, &lat_cfg) {
                Ok(lat) => {
                    let res = lat.simulate(false);
                    (res.timed_out, lat.decode(&res) as i64, 0)
                }
                // Band cannot reach the endpoint: the candidate cannot beat
                // the cap, so rank it with the capped ones.
                Err(_) => (
                    true,
                    (cfg.lv_cap.unwrap_or(0) * cfg.encoding.scale as u64) as i64,
                    0,
                ),
            }
        }
    }
}

/// Score every candidate window and keep the argmin. Backtrack runs once,
/// on the winner, against the exact engine.
pub fn align_read(
    read: &PackedSequence,
    idx: &ReferenceIndex,
    cfg: &AlignerConfig,
) -> Result<(Alignment, RunStats), AlignerError> {
    cfg.validate()?;
    let delays = cfg.delays()?;
    let mut stats = RunStats {
        candidate_lookups: 1,
        ..Default::default()
    };
    let read_codes = read.codes();
    let set = match candidate_locations(&read_codes, idx, cfg.max_candidates, cfg.effective_slack())
    {
        Ok(set) => set,
        Err(AlignerError::NoCandidates) | Err(AlignerError::ReadTooShort { .. }) => {
            return Ok((
                Alignment {
                    read_id: String::new(),
                    status: AlignmentStatus::NoCandidates,
                    locus: None,
                    key: None,
                    cigar: None,
                    capped: false,
                },
                stats,
            ));
        }
        Err(e) => return Err(e),
    };

    let ref_codes = idx.reference_codes();
    let mut best: Option<(CandidateScore, &Candidate)> = None;
    for cand in &set.candidates {
        let window = PackedSequence::from_codes(
            &ref_codes[cand.window_start..cand.window_start + cand.window_len],
        )
        .expect("windows are non-empty");
        let mut score = score_candidate(read, &window, cfg, &delays);
        score.2 = cand.locus;
        stats.distance_evaluations += 1;
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, cand));
        }
    }
    let ((capped, key, _), winner) = best.expect("candidate set is non-empty");

    let window = PackedSequence::from_codes(
        &ref_codes[winner.window_start..winner.window_start + winner.window_len],
    )
    .expect("windows are non-empty");
    let matrix = full_matrix(read, &window, &cfg.gp);
    let backtrack_mode = if cfg.mode == Mode::Lv { Mode::Nw } else { Mode::Sw };
    let path = oracle::backtrack(&matrix, backtrack_mode);
    stats.configs_computed = 1;
    stats.reads_aligned = 1;

    Ok((
        Alignment {
            read_id: String::new(),
            status: AlignmentStatus::Aligned,
            locus: Some(winner.locus),
            key: Some(key),
            cigar: Some(path.cigar()),
            capped,
        },
        stats,
    ))
}

/// Align a batch of raw FASTQ records. Reads containing ambiguous bases are
/// filtered (counted, never scored). Output order always matches input
/// order, whatever the parallelism.
pub fn align_all(
    reads: &[FastqRecord],
    idx: &ReferenceIndex,
    cfg: &AlignerConfig,
    parallelism: usize,
) -> Result<(Vec<Alignment>, RunStats), AlignerError> {
    cfg.validate()?;
    let one = |rec: &FastqRecord| -> Result<(Alignment, RunStats), AlignerError> {
        match PackedSequence::from_text(&rec.sequence) {
            Ok(read) => {
                let (mut alignment, stats) = align_read(&read, idx, cfg)?;
                alignment.read_id = rec.id.clone();
                Ok((alignment, stats))
            }
            Err(_) => Ok((
                Alignment {
                    read_id: rec.id.clone(),
                    status: AlignmentStatus::Filtered,
                    locus: None,
                    key: None,
                    cigar: None,
                    capped: false,
                },
                RunStats {
                    reads_filtered: 1,
                    ..Default::default()
                },
            )),
        }
    };

    let per_read: Vec<Result<(Alignment, RunStats), AlignerError>> = if parallelism == 1 {
        reads.iter().map(one).collect()
    } else {
        use rayon::prelude::*;
        let run = || reads.par_iter().map(one).collect();
        if parallelism == 0 {
            run()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(parallelism)
                .build()
                .map_err(|e| AlignerError::BadConfig(e.to_string()))?;
            pool.install(run)
        }
    };

    let mut alignments = Vec::with_capacity(reads.len());
    let mut stats = RunStats::default();
    for item in per_read {
        let (alignment, s) = item?;
        stats.absorb(&s);
        match alignment.status {
            AlignmentStatus::Aligned => {}
            AlignmentStatus::NoCandidates => stats.reads_no_candidates += 1,
            AlignmentStatus::Filtered => {}
        }
        alignments.push(alignment);
    }
    stats.reads_total = reads.len();
    Ok((alignments, stats))
}

/// One simulated read with its ground truth.
#[derive(Debug, Clone)]
pub struct SimulatedRead {
    pub id: String,
    pub origin: usize,
    pub codes: Vec<u8>,
    pub mutations: usize,
    pub errors: usize,
}

/// Reads drawn uniformly from a reference, with per-base substitution
/// mutations applied first and sequencing errors second. Regenerating with
/// the same seed reproduces the set bit for bit.
#[derive(Debug, Clone)]
pub struct SimulatedReadSet {
    pub reads: Vec<SimulatedRead>,
    pub seed: u64,
    pub read_len: usize,
    pub mutation_rate: f64,
    pub error_rate: f64,
}

impl SimulatedReadSet {
    pub fn to_fastq_records(&self) -> Vec<FastqRecord> {
        self.reads
            .iter()
            .map(|r| FastqRecord {
                id: r.id.clone(),
                sequence: PackedSequence::from_codes(&r.codes).expect("non-empty").to_text(),
                quality: "I".repeat(r.codes.len()),
            })
            .collect()
    }

    /// Tab-separated truth table: id, origin, mutations, errors.
    pub fn truth_tsv(&self) -> String {
        let mut out = String::from("read_id\torigin\tmutations\terrors\n");
        for r in &self.reads {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                r.id, r.origin, r.mutations, r.errors
            ));
        }
        out
    }
}

/// Uniform random four-base reference.
pub fn random_reference(len: usize, seed: u64) -> PackedSequence {
    assert!(len >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let codes: Vec<u8> = (0..len).map(|_| rng.gen_range(0..4u8)).collect();
    PackedSequence::from_codes(&codes).expect("non-empty")
}

fn substitute(code: u8, rng: &mut ChaCha8Rng) -> u8 {
    (code + rng.gen_range(1..4u8)) % 4
}

pub fn simulate_reads(
    reference: &PackedSequence,
    n: usize,
    read_len: usize,
    mutation_rate: f64,
    error_rate: f64,
    seed: u64,
) -> SimulatedReadSet {
    assert!(read_len >= 1 && read_len <= reference.len());
    assert!((0.0..1.0).contains(&mutation_rate) && (0.0..1.0).contains(&error_rate));
    let ref_codes = reference.codes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reads = Vec::with_capacity(n);
    for i in 0..n {
        let origin = rng.gen_range(0..=ref_codes.len() - read_len);
        let mut codes = ref_codes[origin..origin + read_len].to_vec();
        let mut mutations = 0usize;
        for c in codes.iter_mut() {
            if rng.gen::<f64>() < mutation_rate {
                *c = substitute(*c, &mut rng);
                mutations += 1;
            }
        }
        let mut errors = 0usize;
        for c in codes.iter_mut() {
            if rng.gen::<f64>() < error_rate {
                *c = substitute(*c, &mut rng);
                errors += 1;
            }
        }
        reads.push(SimulatedRead {
            id: format!("r{i:06}"),
            origin,
            codes,
            mutations,
            errors,
        });
    }
    SimulatedReadSet {
        reads,
        seed,
        read_len,
        mutation_rate,
        error_rate,
    }
}

/// Fraction of aligned reads whose reported locus lands within `slack` of
/// the true origin. Reads that produced no candidates or were filtered are
/// excluded from the denominator and reported separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub evaluated: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub no_candidates: usize,
    pub filtered: usize,
}

pub fn evaluate(alignments: &[Alignment], truth: &SimulatedReadSet, slack: usize) -> AccuracyReport {
    let origins: HashMap<&str, usize> = truth
        .reads
        .iter()
        .map(|r| (r.id.as_str(), r.origin))
        .collect();
    let mut report = AccuracyReport {
        evaluated: 0,
        correct: 0,
        accuracy: 0.0,
        no_candidates: 0,
        filtered: 0,
    };
    for a in alignments {
        match a.status {
            AlignmentStatus::NoCandidates => report.no_candidates += 1,
            AlignmentStatus::Filtered => report.filtered += 1,
            AlignmentStatus::Aligned => {
                report.evaluated += 1;
                let origin = origins
                    .get(a.read_id.as_str())
                    .expect("alignment id missing from truth set");
                let locus = a.locus.expect("aligned read carries a locus");
                if locus.abs_diff(*origin) <= slack {
                    report.correct += 1;
                }
            }
        }
    }
    if report.evaluated > 0 {
        report.accuracy = report.correct as f64 / report.evaluated as f64;
    }
    report
}
