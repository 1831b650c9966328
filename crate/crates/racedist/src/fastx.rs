//! Minimal FASTA and FASTQ readers and writers.
//!
//! FASTA records are concatenated into one reference sequence with a contig
//! offset table; characters outside the four-base alphabet are removed
//! (the engines have no representation for them). FASTQ is read as strict
//! 4-line records with the quality line kept but unused. Both readers
//! tolerate CRLF line endings and a trailing newline.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::seq::{base_to_code, PackedSequence};

#[derive(Debug)]
pub enum FastxError {
    Io(std::io::Error),
    /// Malformed content; carries the 1-based line number and a message.
    Format { line: usize, message: String },
    /// The file held no usable sequence data.
    EmptyInput,
}

impl fmt::Display for FastxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FastxError::Io(e) => write!(f, "io error: {e}"),
            FastxError::Format { line, message } => write!(f, "line {line}: {message}"),
            FastxError::EmptyInput => write!(f, "input holds no sequence data"),
        }
    }
}

impl std::error::Error for FastxError {}

impl From<std::io::Error> for FastxError {
    fn from(e: std::io::Error) -> Self {
        FastxError::Io(e)
    }
}

/// One named span of the concatenated reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContigSpan {
    pub name: String,
    /// Offset of the contig's first kept base in the concatenated sequence.
    pub offset: usize,
    /// Number of kept bases.
    pub len: usize,
}

/// A reference genome: every contig concatenated into a single packed
/// sequence, ambiguous bases removed, plus the contig table.
#[derive(Debug, Clone)]
pub struct ReferenceGenome {
    pub sequence: PackedSequence,
    pub contigs: Vec<ContigSpan>,
    /// Count of characters dropped because they were outside {A,C,G,T}.
    pub dropped_bases: usize,
}

pub fn parse_fasta_str(text: &str) -> Result<ReferenceGenome, FastxError> {
    let mut codes: Vec<u8> = Vec::new();
    let mut contigs: Vec<ContigSpan> = Vec::new();
    let mut dropped = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            if let Some(last) = contigs.last_mut() {
                last.len = codes.len() - last.offset;
            }
            contigs.push(ContigSpan {
                name: header.split_whitespace().next().unwrap_or("").to_string(),
                offset: codes.len(),
                len: 0,
            });
        } else {
            if contigs.is_empty() {
                return Err(FastxError::Format {
                    line: lineno + 1,
                    message: "sequence data before any '>' header".to_string(),
                });
            }
            for b in line.bytes() {
                match base_to_code(b) {
                    Some(code) => codes.push(code),
                    None => dropped += 1,
                }
            }
        }
    }
    if let Some(last) = contigs.last_mut() {
        last.len = codes.len() - last.offset;
    }
    if codes.is_empty() {
        return Err(FastxError::EmptyInput);
    }
    Ok(ReferenceGenome {
        sequence: PackedSequence::from_codes(&codes).expect("non-empty"),
        contigs,
        dropped_bases: dropped,
    })
}

pub fn read_fasta(path: &Path) -> Result<ReferenceGenome, FastxError> {
    parse_fasta_str(&fs::read_to_string(path)?)
}

pub fn write_fasta(path: &Path, name: &str, seq: &PackedSequence) -> Result<(), FastxError> {
    let mut out = fs::File::create(path)?;
    writeln!(out, ">{name}")?;
    let text = seq.to_text();
    for chunk in text.as_bytes().chunks(70) {
        out.write_all(chunk)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Raw FASTQ record; the sequence is kept as text so callers decide how to
/// handle ambiguous bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastqRecord {
    pub id: String,
    pub sequence: String,
    pub quality: String,
}

pub fn parse_fastq_str(text: &str) -> Result<Vec<FastqRecord>, FastxError> {
    let mut records = Vec::new();
    let mut lines = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .enumerate()
        .peekable();
    while let Some((lineno, header)) = lines.next() {
        if header.is_empty() && lines.peek().is_none() {
            break;
        }
        let id = header.strip_prefix('@').ok_or_else(|| FastxError::Format {
            line: lineno + 1,
            message: format!("expected '@' record header, got {header:?}"),
        })?;
        let (_, sequence) = lines.next().ok_or_else(|| FastxError::Format {
            line: lineno + 2,
            message: "truncated record: missing sequence line".to_string(),
        })?;
        let (sep_line, sep) = lines.next().ok_or_else(|| FastxError::Format {
            line: lineno + 3,
            message: "truncated record: missing '+' line".to_string(),
        })?;
        if !sep.starts_with('+') {
            return Err(FastxError::Format {
                line: sep_line + 1,
                message: format!("expected '+' separator, got {sep:?}"),
            });
        }
        let (qual_line, quality) = lines.next().ok_or_else(|| FastxError::Format {
            line: lineno + 4,
            message: "truncated record: missing quality line".to_string(),
        })?;
        if quality.len() != sequence.len() {
            return Err(FastxError::Format {
                line: qual_line + 1,
                message: "quality length differs from sequence length".to_string(),
            });
        }
        records.push(FastqRecord {
            id: id.split_whitespace().next().unwrap_or("").to_string(),
            sequence: sequence.to_string(),
            quality: quality.to_string(),
        });
    }
    Ok(records)
}

pub fn read_fastq(path: &Path) -> Result<Vec<FastqRecord>, FastxError> {
    parse_fastq_str(&fs::read_to_string(path)?)
}

pub fn write_fastq(path: &Path, records: &[FastqRecord]) -> Result<(), FastxError> {
    let mut out = fs::File::create(path)?;
    for rec in records {
        writeln!(out, "@{}\n{}\n+\n{}", rec.id, rec.sequence, rec.quality)?;
    }
    Ok(())
}
