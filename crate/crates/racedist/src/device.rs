//! Host-to-accelerator batch layout and a deterministic batch runner.
//!
//! Jobs are fixed-geometry sequence pairs packed into 1024-bit cache lines.
//! With 64-base sides a job takes 256 bits (64 bp x 2 bits/bp x 2 sides),
//! so four jobs fill one line; results come back as 32-bit cycle counts,
//! 32 per line. The byte layout is little-endian 64-bit words throughout
//! and is pinned by a golden-file test.
//!
//! Batch file layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "ASAPJOBS"
//! 8       4     format version (1)
//! 12      4     bases_per_side
//! 16      4     job count
//! 20      12    reserved, zero
//! 32      4*n   per-job true lengths (u16 query, u16 reference)
//! ...     pad   zero padding to the next 128-byte line boundary
//! ...     128L  payload lines
//! ...     128R  result lines (present only when results are filled)
//! ```

use std::fmt;
use std::fs;
use std::path::Path;

use crate::lattice::{build_lattice, LatticeConfig};
use crate::seq::PackedSequence;

pub const LINE_BITS: usize = 1024;
pub const LINE_WORDS: usize = LINE_BITS / 64;
pub const LINE_BYTES: usize = LINE_BITS / 8;
pub const RESULT_BITS: usize = 32;
const MAGIC: &[u8; 8] = b"ASAPJOBS";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeviceError {
    /// Geometry cannot fit a job into one cache line.
    GeometryTooLarge { job_bits: usize },
    /// A sequence is longer than the configured side length.
    LengthMismatch {
        job: usize,
        length: usize,
        bases_per_side: usize,
    },
    /// Results were requested before the runner filled them.
    Incomplete,
    /// Batch file malformed.
    BadFile(String),
    Io(String),
}

impl fmt::Display for DeviceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviceError::GeometryTooLarge { job_bits } => {
                write!(f, "job of {job_bits} bits exceeds the {LINE_BITS}-bit line")
            }
            DeviceError::LengthMismatch {
                job,
                length,
                bases_per_side,
            } => write!(
                f,
                "job {job}: sequence of {length} bp exceeds side length {bases_per_side}"
            ),
            DeviceError::Incomplete => write!(f, "result buffer has not been filled"),
            DeviceError::BadFile(msg) => write!(f, "bad batch file: {msg}"),
            DeviceError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for DeviceError {}

impl From<std::io::Error> for DeviceError {
    fn from(e: std::io::Error) -> Self {
        DeviceError::Io(e.to_string())
    }
}

/// Fixed per-batch shape of a job.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobGeometry {
    pub bases_per_side: usize,
    pub bits_per_base: usize,
    /// Both sides packed: `4 * bases_per_side` bits.
    pub job_bits: usize,
    pub jobs_per_line: usize,
    pub result_bits: usize,
}

impl JobGeometry {
    pub fn new(bases_per_side: usize) -> Result<Self, DeviceError> {
        let job_bits = 2 * 2 * bases_per_side;
        if job_bits == 0 || job_bits > LINE_BITS {
            return Err(DeviceError::GeometryTooLarge { job_bits });
        }
        Ok(JobGeometry {
            bases_per_side,
            bits_per_base: 2,
            job_bits,
            jobs_per_line: LINE_BITS / job_bits,
            result_bits: RESULT_BITS,
        })
    }

    pub fn payload_lines(&self, jobs: usize) -> usize {
        jobs.div_ceil(self.jobs_per_line)
    }

    pub fn result_lines(&self, jobs: usize) -> usize {
        jobs.div_ceil(LINE_BITS / self.result_bits)
    }
}

/// A packed batch: payload lines, true-length side header, and the result
/// buffer once a runner has filled it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobBatch {
    pub geometry: JobGeometry,
    pub jobs: usize,
    /// True (pre-padding) lengths per job: (query, reference).
    pub lengths: Vec<(u16, u16)>,
    /// `payload_lines * LINE_WORDS` little-endian words.
    pub payload: Vec<u64>,
    /// Packed 32-bit outputs, filled by `run_batch`.
    pub results: Option<Vec<u64>>,
}

fn set_bits(words: &mut [u64], bit_offset: usize, codes: &[u8]) {
    for (i, &code) in codes.iter().enumerate() {
        let bit = bit_offset + 2 * i;
        words[bit / 64] |= (code as u64) << (bit % 64);
    }
}

fn get_base(words: &[u64], bit_offset: usize, i: usize) -> u8 {
    let bit = bit_offset + 2 * i;
    ((words[bit / 64] >> (bit % 64)) & 0b11) as u8
}

/// Pack pairs into cache lines: query bases occupy bits `[0, 2L)` of the
/// job slot, reference bases `[2L, 4L)`, jobs fill slots in order, unused
/// trailing slots stay zero. Shorter sequences are right-padded with code
/// 00; true lengths ride in the side header.
pub fn pack_jobs(
    pairs: &[(PackedSequence, PackedSequence)],
    geometry: JobGeometry,
) -> Result<JobBatch, DeviceError> {
    let mut lengths = Vec::with_capacity(pairs.len());
    for (job, (q, r)) in pairs.iter().enumerate() {
        for side in [q, r] {
            if side.len() > geometry.bases_per_side {
                return Err(DeviceError::LengthMismatch {
                    job,
                    length: side.len(),
                    bases_per_side: geometry.bases_per_side,
                });
            }
        }
        lengths.push((q.len() as u16, r.len() as u16));
    }
    let mut payload = vec![0u64; geometry.payload_lines(pairs.len()) * LINE_WORDS];
    for (job, (q, r)) in pairs.iter().enumerate() {
        let line = job / geometry.jobs_per_line;
        let slot = job % geometry.jobs_per_line;
        let base_bit = line * LINE_BITS + slot * geometry.job_bits;
        set_bits(&mut payload, base_bit, &q.codes());
        set_bits(
            &mut payload,
            base_bit + 2 * geometry.bases_per_side,
            &r.codes(),
        );
    }
    Ok(JobBatch {
        geometry,
        jobs: pairs.len(),
        lengths,
        payload,
        results: None,
    })
}

/// Recover the original pairs, truncated to their true lengths.
pub fn unpack_jobs(batch: &JobBatch) -> Vec<(PackedSequence, PackedSequence)> {
    let g = &batch.geometry;
    (0..batch.jobs)
        .map(|job| {
            let line = job / g.jobs_per_line;
            let slot = job % g.jobs_per_line;
            let base_bit = line * LINE_BITS + slot * g.job_bits;
            let (q_len, r_len) = batch.lengths[job];
            let q: Vec<u8> = (0..q_len as usize)
                .map(|i| get_base(&batch.payload, base_bit, i))
                .collect();
            let r: Vec<u8> = (0..r_len as usize)
                .map(|i| get_base(&batch.payload, base_bit + 2 * g.bases_per_side, i))
                .collect();
            (
                PackedSequence::from_codes(&q).expect("non-empty"),
                PackedSequence::from_codes(&r).expect("non-empty"),
            )
        })
        .collect()
}

/// Pull the 32-bit outputs back out in job order.
pub fn unpack_results(batch: &JobBatch) -> Result<Vec<u32>, DeviceError> {
    let words = batch.results.as_ref().ok_or(DeviceError::Incomplete)?;
    Ok((0..batch.jobs)
        .map(|job| {
            let word = words[job / 2];
            ((word >> (32 * (job % 2))) & 0xffff_ffff) as u32
        })
        .collect())
}

/// Busy and stall cycle accounting for one simulated lattice instance.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct LatticeUse {
    pub busy_cycles: u64,
    pub stall_cycles: u64,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StallStats {
    pub per_lattice: Vec<LatticeUse>,
    /// Completion time of the last job.
    pub makespan: u64,
    pub stall_fraction: f64,
}

/// Dispatch jobs round-robin across `n_lattices` simulated instances. Each
/// instance is busy for its job's output cycle count; cache line `i` of the
/// payload becomes available at `i * fetch_latency_cycles`. Stall cycles
/// are the time instances spend waiting for their next job's line.
pub fn run_batch(
    batch: &mut JobBatch,
    engine_cfg: &LatticeConfig,
    n_lattices: usize,
    fetch_latency_cycles: u64,
) -> Result<StallStats, DeviceError> {
    assert!(n_lattices >= 1, "need at least one lattice instance");
    let pairs = unpack_jobs(batch);
    let g = &batch.geometry;

    let mut result_words = vec![0u64; g.result_lines(batch.jobs) * LINE_WORDS];
    let mut free_at = vec![0u64; n_lattices];
    let mut per_lattice = vec![LatticeUse::default(); n_lattices];
    let mut makespan = 0u64;
    for (job, (q, r)) in pairs.iter().enumerate() {
        let lat_id = job % n_lattices;
        let line = (job / g.jobs_per_line) as u64;
        let available = line * fetch_latency_cycles;
        let start = free_at[lat_id].max(available);
        let cycles = {
            let lat = build_lattice(q, r, engine_cfg)
                .map_err(|e| DeviceError::BadFile(format!("job {job}: {e}")))?;
            lat.simulate(false).output_cycles
        };
        let use_ = &mut per_lattice[lat_id];
        use_.stall_cycles += start - free_at[lat_id];
        use_.busy_cycles += cycles;
        use_.jobs += 1;
        free_at[lat_id] = start + cycles;
        makespan = makespan.max(free_at[lat_id]);

        assert!(cycles <= u32::MAX as u64, "cycle count exceeds 32-bit output");
        result_words[job / 2] |= cycles << (32 * (job % 2));
    }
    batch.results = Some(result_words);

    let total_stall: u64 = per_lattice.iter().map(|l| l.stall_cycles).sum();
    let total_busy: u64 = per_lattice.iter().map(|l| l.busy_cycles).sum();
    let denom = total_stall + total_busy;
    Ok(StallStats {
        per_lattice,
        makespan,
        stall_fraction: if denom == 0 {
            0.0
        } else {
            total_stall as f64 / denom as f64
        },
    })
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// Serialize to the documented byte layout.
pub fn batch_to_bytes(batch: &JobBatch) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    push_u32(&mut out, FORMAT_VERSION);
    push_u32(&mut out, batch.geometry.bases_per_side as u32);
    push_u32(&mut out, batch.jobs as u32);
    out.resize(32, 0);
    for &(q, r) in &batch.lengths {
        out.extend_from_slice(&q.to_le_bytes());
        out.extend_from_slice(&r.to_le_bytes());
    }
    let pad = out.len().div_ceil(LINE_BYTES) * LINE_BYTES;
    out.resize(pad, 0);
    for &w in &batch.payload {
        out.extend_from_slice(&w.to_le_bytes());
    }
    if let Some(results) = &batch.results {
        for &w in results {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    out
}

pub fn batch_from_bytes(bytes: &[u8]) -> Result<JobBatch, DeviceError> {
    let take_u32 = |off: usize| -> Result<u32, DeviceError> {
        bytes
            .get(off..off + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| DeviceError::BadFile("truncated header".into()))
    };
    if bytes.len() < 32 || &bytes[..8] != MAGIC {
        return Err(DeviceError::BadFile("missing ASAPJOBS magic".into()));
    }
    let version = take_u32(8)?;
    if version != FORMAT_VERSION {
        return Err(DeviceError::BadFile(format!(
            "unsupported version {version}"
        )));
    }
    let geometry = JobGeometry::new(take_u32(12)? as usize)?;
    let jobs = take_u32(16)? as usize;

    let mut off = 32;
    let mut lengths = Vec::with_capacity(jobs);
    for _ in 0..jobs {
        let q = bytes
            .get(off..off + 2)
            .map(|b| u16::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| DeviceError::BadFile("truncated length header".into()))?;
        let r = bytes
            .get(off + 2..off + 4)
            .map(|b| u16::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| DeviceError::BadFile("truncated length header".into()))?;
        lengths.push((q, r));
        off += 4;
    }
    off = off.div_ceil(LINE_BYTES) * LINE_BYTES;

    let payload_words = geometry.payload_lines(jobs) * LINE_WORDS;
    let payload_bytes = payload_words * 8;
    let payload_slice = bytes
        .get(off..off + payload_bytes)
        .ok_or_else(|| DeviceError::BadFile("truncated payload".into()))?;
    let payload: Vec<u64> = payload_slice
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    off += payload_bytes;

    let result_bytes = geometry.result_lines(jobs) * LINE_WORDS * 8;
    let results = if bytes.len() >= off + result_bytes && jobs > 0 {
        Some(
            bytes[off..off + result_bytes]
                .chunks_exact(8)
                .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        )
    } else {
        None
    };

    Ok(JobBatch {
        geometry,
        jobs,
        lengths,
        payload,
        results,
    })
}

pub fn write_batch(batch: &JobBatch, path: &Path) -> Result<(), DeviceError> {
    fs::write(path, batch_to_bytes(batch))?;
    Ok(())
}

pub fn read_batch(path: &Path) -> Result<JobBatch, DeviceError> {
    batch_from_bytes(&fs::read(path)?)
}
