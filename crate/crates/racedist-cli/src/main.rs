//! Command-line front end: score a pair, align a read set, dump a
//! wavefront trace, simulate reads, or report cell-update accounting.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use racedist::aligner::{
    align_all, build_index, candidate_locations, random_reference, simulate_reads, AlignerConfig,
    Engine,
};
use racedist::fastx::{read_fasta, read_fastq, write_fasta, write_fastq};
use racedist::lattice::{build_lattice, emit_trace, LatticeConfig};
use racedist::oracle::{lv_distance, nw_distance, sw_distance};
use racedist::penalty::{encode_penalties, DelayPenalties, EncodingParams, GapPenalties};
use racedist::seq::PackedSequence;
use racedist::Mode;

#[derive(Parser)]
#[command(
    name = "racedist",
    version,
    about = "Edit-distance scoring via an exact engine and a delay-lattice simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one query/reference pair with both engines.
    Distance(DistanceArgs),
    /// Align a FASTQ read set against a FASTA reference.
    Align(AlignArgs),
    /// Simulate a lattice run and dump the wavefront trace.
    Trace(TraceArgs),
    /// Generate simulated reads with ground truth.
    Simreads(SimreadsArgs),
    /// Report effective vs. updated cell accounting.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sw,
    Nw,
    Lv,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Sw => Mode::Sw,
            ModeArg::Nw => Mode::Nw,
            ModeArg::Lv => Mode::Lv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Oracle,
    Lattice,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Json,
    Csv,
}

/// Flags shared by every command that builds a lattice.
#[derive(Args)]
struct EngineFlags {
    /// Penalties as match,mismatch,insert,delete (e.g. 0,2,1,1).
    #[arg(long, default_value = "0,2,1,1", value_parser = parse_penalties)]
    penalties: GapPenalties,
    /// Delay encoding as shift,scale; defaults to shift=-match, scale=1.
    #[arg(long, value_parser = parse_encoding)]
    encoding: Option<EncodingParams>,
    /// Tile edge length in delay elements.
    #[arg(long, default_value_t = 16)]
    tile_len: usize,
    /// Output mode.
    #[arg(long, value_enum, default_value = "sw")]
    mode: ModeArg,
    /// Maximum permissible distance (shifted units); required for lv mode.
    #[arg(long)]
    lv_cap: Option<u64>,
    /// Band the lattice to this many indels (lv mode only).
    #[arg(long)]
    band: Option<u64>,
}

struct EngineSetup {
    gp: GapPenalties,
    encoding: EncodingParams,
    delays: DelayPenalties,
    mode: Mode,
    tile_len: usize,
    lv_cap: Option<u64>,
    band: Option<u64>,
}

impl EngineFlags {
    fn resolve(&self) -> Result<EngineSetup, CliError> {
        let mode = Mode::from(self.mode);
        if mode == Mode::Lv && self.lv_cap.is_none() {
            return Err(CliError::Usage("--mode lv requires --lv-cap".to_string()));
        }
        if mode != Mode::Lv && self.lv_cap.is_some() {
            return Err(CliError::Usage("--lv-cap requires --mode lv".to_string()));
        }
        if self.band.is_some() && mode != Mode::Lv {
            return Err(CliError::Usage(
                "--band requires --mode lv (conflicting flags: --band, --mode)".to_string(),
            ));
        }
        if self.tile_len == 0 {
            return Err(CliError::Usage("--tile-len must be at least 1".to_string()));
        }
        let encoding = self
            .encoding
            .unwrap_or_else(|| EncodingParams::canonical_for(&self.penalties));
        let delays = encode_penalties(&self.penalties, &encoding)
            .map_err(|e| CliError::Usage(format!("invalid penalties/encoding: {e}")))?;
        Ok(EngineSetup {
            gp: self.penalties,
            encoding,
            delays,
            mode,
            tile_len: self.tile_len,
            lv_cap: self.lv_cap,
            band: self.band,
        })
    }

    fn lattice_config(&self, setup: &EngineSetup) -> LatticeConfig {
        match setup.mode {
            Mode::Lv => LatticeConfig::lv(
                setup.delays,
                setup.tile_len,
                setup.lv_cap.unwrap_or(0) * setup.encoding.scale as u64,
                setup.band,
            ),
            Mode::Nw => LatticeConfig::nw(setup.delays, setup.tile_len),
            Mode::Sw => LatticeConfig::sw(setup.delays, setup.tile_len),
        }
    }
}

#[derive(Args)]
struct DistanceArgs {
    #[command(flatten)]
    engine: EngineFlags,
    /// Query sequence (ACGT).
    query: String,
    /// Reference sequence (ACGT).
    reference: String,
}

#[derive(Args)]
struct AlignArgs {
    #[command(flatten)]
    engine: EngineFlags,
    /// Reference FASTA.
    #[arg(long)]
    reference: PathBuf,
    /// Reads FASTQ.
    #[arg(long)]
    reads: PathBuf,
    /// Distance engine scoring the candidates.
    #[arg(long = "engine", value_enum, default_value = "lattice")]
    engine_kind: EngineArg,
    /// Output TSV path.
    #[arg(long)]
    out: PathBuf,
    /// Stats JSON path.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Seed length for the hash index.
    #[arg(long, default_value_t = 20)]
    seed_len: usize,
    /// Candidate list cutoff.
    #[arg(long, default_value_t = 16)]
    max_candidates: usize,
    /// Worker threads (0 = all cores); RACEDIST_THREADS overrides.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    engine: EngineFlags,
    #[arg(long, value_enum, default_value = "json")]
    format: TraceFormat,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    query: String,
    reference: String,
}

#[derive(Args)]
struct SimreadsArgs {
    /// Reference FASTA to draw reads from.
    #[arg(long, conflicts_with = "random_reference")]
    reference: Option<PathBuf>,
    /// Generate a uniform random reference of this length instead.
    #[arg(long)]
    random_reference: Option<usize>,
    /// Where to write the generated reference (with --random-reference).
    #[arg(long, requires = "random_reference")]
    reference_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 128)]
    read_len: usize,
    #[arg(long, default_value_t = 0.005)]
    mutation_rate: f64,
    #[arg(long, default_value_t = 0.001)]
    error_rate: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output FASTQ path.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth TSV path.
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    engine: EngineFlags,
    /// Score a single pair: two positional sequences.
    #[arg(num_args = 2, conflicts_with_all = ["reference", "reads"])]
    pair: Vec<String>,
    /// Reference FASTA (with --reads).
    #[arg(long, requires = "reads")]
    reference: Option<PathBuf>,
    /// Reads FASTQ (with --reference).
    #[arg(long, requires = "reference")]
    reads: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    seed_len: usize,
}

fn parse_penalties(s: &str) -> Result<GapPenalties, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("expected match,mismatch,insert,delete".to_string());
    }
    let mut vals = [0i64; 4];
    for (v, p) in vals.iter_mut().zip(&parts) {
        *v = p.trim().parse::<i64>().map_err(|e| e.to_string())?;
    }
    Ok(GapPenalties::new(vals[0], vals[1], vals[2], vals[3]))
}

fn parse_encoding(s: &str) -> Result<EncodingParams, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected shift,scale".to_string());
    }
    let shift = parts[0].trim().parse::<i64>().map_err(|e| e.to_string())?;
    let scale = parts[1].trim().parse::<i64>().map_err(|e| e.to_string())?;
    Ok(EncodingParams::new(shift, scale))
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

fn data_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn parse_seq(label: &str, text: &str) -> Result<PackedSequence, CliError> {
    PackedSequence::from_text(text).map_err(|e| CliError::Data(format!("{label} sequence: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Distance(args) => cmd_distance(args),
        Command::Align(args) => cmd_align(args),
        Command::Trace(args) => cmd_trace(args),
        Command::Simreads(args) => cmd_simreads(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn cmd_distance(args: DistanceArgs) -> Result<(), CliError> {
    let setup = args.engine.resolve()?;
    let q = parse_seq("query", &args.query)?;
    let r = parse_seq("reference", &args.reference)?;

    let mut report = String::new();
    writeln!(report, "mode: {}", setup.mode).unwrap();
    match setup.mode {
        Mode::Sw => {
            let (score, col) = sw_distance(&q, &r, &setup.gp);
            writeln!(report, "oracle_distance: {score}").unwrap();
            writeln!(report, "oracle_column: {col}").unwrap();
        }
        Mode::Nw => {
            let score = nw_distance(&q, &r, &setup.gp);
            writeln!(report, "oracle_distance: {score}").unwrap();
        }
        Mode::Lv => {
            let score = lv_distance(&q, &r, &setup.gp, setup.lv_cap.unwrap() as i64);
            writeln!(report, "oracle_distance: {score}").unwrap();
        }
    }

    let cfg = args.engine.lattice_config(&setup);
    let lat = build_lattice(&q, &r, &cfg).map_err(data_err)?;
    let res = lat.simulate(false);
    writeln!(report, "lattice_cycles: {}", res.output_cycles).unwrap();
    writeln!(report, "decoded_key: {}", lat.decode(&res)).unwrap();
    if let Some(col) = res.output_column {
        writeln!(report, "output_column: {col}").unwrap();
    }
    if setup.mode == Mode::Lv {
        writeln!(report, "timed_out: {}", res.timed_out).unwrap();
    }
    writeln!(report, "triggered_nodes: {}", res.triggered_count).unwrap();
    writeln!(report, "total_nodes: {}", lat.node_count()).unwrap();
    print!("{report}");
    Ok(())
}

fn threads_from_env(flag: usize) -> usize {
    match std::env::var("RACEDIST_THREADS") {
        Ok(v) => v.parse().unwrap_or(flag),
        Err(_) => flag,
    }
}

fn cmd_align(args: AlignArgs) -> Result<(), CliError> {
    let setup = args.engine.resolve()?;
    // Read and validate every input before any output file is created.
    let genome = read_fasta(&args.reference).map_err(data_err)?;
    let reads = read_fastq(&args.reads).map_err(data_err)?;
    let idx = build_index(&genome.sequence, args.seed_len).map_err(data_err)?;

    let mut cfg = AlignerConfig::new(
        setup.gp,
        match args.engine_kind {
            EngineArg::Oracle => Engine::Oracle,
            EngineArg::Lattice => Engine::Lattice,
        },
    );
    cfg.encoding = setup.encoding;
    cfg.mode = setup.mode;
    cfg.lv_cap = setup.lv_cap;
    cfg.band_max_edits = setup.band;
    cfg.tile_len = setup.tile_len;
    cfg.seed_len = args.seed_len;
    cfg.max_candidates = args.max_candidates;

    let threads = threads_from_env(args.threads);
    let (alignments, stats) = align_all(&reads, &idx, &cfg, threads).map_err(data_err)?;

    let mut tsv = String::from("#read_id\tstatus\tlocus\tkey\tcigar\n");
    for a in &alignments {
        tsv.push_str(&a.to_tsv());
        tsv.push('\n');
    }
    fs::write(&args.out, tsv).map_err(data_err)?;
    if let Some(stats_path) = &args.stats {
        let json = serde_json::to_string_pretty(&stats).map_err(data_err)?;
        fs::write(stats_path, json).map_err(data_err)?;
    }
    eprintln!(
        "aligned {}/{} reads ({} no-candidates, {} filtered)",
        stats.reads_aligned, stats.reads_total, stats.reads_no_candidates, stats.reads_filtered
    );
    Ok(())
}

fn cmd_trace(args: TraceArgs) -> Result<(), CliError> {
    let setup = args.engine.resolve()?;
    let q = parse_seq("query", &args.query)?;
    let r = parse_seq("reference", &args.reference)?;
    let cfg = args.engine.lattice_config(&setup);
    let lat = build_lattice(&q, &r, &cfg).map_err(data_err)?;
    let res = lat.simulate(true);
    let doc = emit_trace(&lat, &res);
    let rendered = match args.format {
        TraceFormat::Json => doc.to_json(),
        TraceFormat::Csv => doc.to_csv(),
    };
    match &args.out {
        Some(path) => fs::write(path, rendered).map_err(data_err)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn cmd_simreads(args: SimreadsArgs) -> Result<(), CliError> {
    let reference = match (&args.reference, args.random_reference) {
        (Some(path), None) => read_fasta(path).map_err(data_err)?.sequence,
        (None, Some(len)) => {
            if len < args.read_len {
                return Err(CliError::Usage(
                    "--random-reference length must cover --read-len".to_string(),
                ));
            }
            random_reference(len, args.seed)
        }
        (None, None) => {
            return Err(CliError::Usage(
                "one of --reference or --random-reference is required".to_string(),
            ));
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    if args.read_len == 0 || args.read_len > reference.len() {
        return Err(CliError::Usage(format!(
            "--read-len {} must be within the reference length {}",
            args.read_len,
            reference.len()
        )));
    }
    if !(0.0..1.0).contains(&args.mutation_rate) || !(0.0..1.0).contains(&args.error_rate) {
        return Err(CliError::Usage("rates must lie in [0, 1)".to_string()));
    }
    if let Some(out) = &args.reference_out {
        write_fasta(out, "simulated", &reference).map_err(data_err)?;
    }
    let set = simulate_reads(
        &reference,
        args.count,
        args.read_len,
        args.mutation_rate,
        args.error_rate,
        args.seed,
    );
    write_fastq(&args.out, &set.to_fastq_records()).map_err(data_err)?;
    fs::write(&args.truth, set.truth_tsv()).map_err(data_err)?;
    eprintln!("wrote {} reads", set.reads.len());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let setup = args.engine.resolve()?;
    let cfg = args.engine.lattice_config(&setup);

    let mut effective_cells = 0u64;
    let mut updated_cells = 0u64;
    let mut total_cycles = 0u64;
    let mut runs = 0u64;

    let mut run_pair = |q: &PackedSequence, r: &PackedSequence| -> Result<(), CliError> {
        let lat = build_lattice(q, r, &cfg).map_err(data_err)?;
        let res = lat.simulate(false);
        effective_cells += lat.active_node_count() as u64;
        updated_cells += res.triggered_count as u64;
        total_cycles += res.output_cycles;
        runs += 1;
        Ok(())
    };

    if !args.pair.is_empty() {
        let q = parse_seq("query", &args.pair[0])?;
        let r = parse_seq("reference", &args.pair[1])?;
        run_pair(&q, &r)?;
    } else {
        let (Some(ref_path), Some(reads_path)) = (&args.reference, &args.reads) else {
            return Err(CliError::Usage(
                "bench needs either two positional sequences or --reference with --reads"
                    .to_string(),
            ));
        };
        let genome = read_fasta(ref_path).map_err(data_err)?;
        let reads = read_fastq(reads_path).map_err(data_err)?;
        let idx = build_index(&genome.sequence, args.seed_len).map_err(data_err)?;
        let ref_codes = genome.sequence.codes();
        for rec in &reads {
            let Ok(read) = PackedSequence::from_text(&rec.sequence) else {
                continue;
            };
            let Ok(set) = candidate_locations(&read.codes(), &idx, 16, 8) else {
                continue;
            };
            for cand in &set.candidates {
                let window = PackedSequence::from_codes(
                    &ref_codes[cand.window_start..cand.window_start + cand.window_len],
                )
                .expect("windows are non-empty");
                run_pair(&read, &window)?;
            }
        }
    }

    println!("lattice_runs: {runs}");
    println!("effective_cells: {effective_cells}");
    println!("updated_cells: {updated_cells}");
    println!("total_cycles: {total_cycles}");
    if effective_cells > 0 {
        println!(
            "updated_fraction: {:.4}",
            updated_cells as f64 / effective_cells as f64
        );
    }
    Ok(())
}
