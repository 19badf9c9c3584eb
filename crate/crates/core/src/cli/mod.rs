//! Command-line front end.
//!
//! Every subcommand builds a [`Report`] holding a JSON value and a text
//! rendering; `--format` picks one. Exit codes: 0 on success, 1 when a
//! flagged expectation (`--expect-*`) is not met, 2 on input errors.

mod spec;

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

pub use spec::{parse_substitution_spec, SubstitutionSpec};

use crate::coincidence::{
    delta_value_set, find_strong_coincidence, find_strong_coincidence_deep, CoincidenceVerdict, DEEP_HORIZON,
};
use crate::error::Error;
use crate::ipcentral::{build_fs_family, search_ip_witness, verify_finite_sums, FsFamily, FsOptions, FsProvenance, FsVerdict, FsVerification};
use crate::numeration::{
    decode_path, encode_integer, enumerate_paths, synchronizing_scan, PathRepresentation, PrefixGraph,
    DEFAULT_MATERIALIZE_CAP,
};
use crate::points::{max_return_gap, occurrences, proximality_scan, OccurrenceSet};
use crate::spectral::{classify, ClassificationReport, DEFAULT_TOLERANCE};
use crate::strand::{
    build_strand, delta_stable_norms, export_csv, export_svg, invariant_splitting, stability_scan, InvariantSplitting,
};
use crate::word::{least_period, list_periodic_seeds, Alphabet, FixedPointStream, Letter, Substitution, Word};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Longest prefix the CLI will expand on its own to check finite sums.
const AUTO_HORIZON_CAP: usize = 10_000_000;
const MAX_SEED_PERIOD: usize = 64;

#[derive(Parser, Debug)]
#[command(name = "subdyn", version, about = "Analyses of primitive substitutions and their fixed points")]
struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result to a file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Abelianization matrix, characteristic polynomial, roots and Pisot verdicts.
    Classify {
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Prefix of a fixed point.
    Expand {
        spec: PathBuf,
        #[arg(long)]
        seed: char,
        #[arg(long)]
        length: usize,
    },
    /// Positions where a factor occurs in a fixed point.
    Occurrences(FactorArgs),
    /// Largest return gap of a factor.
    Gaps(FactorArgs),
    /// Agreement windows between two fixed points.
    Proximal {
        spec: PathBuf,
        #[arg(long, value_parser = parse_seed_pair)]
        seeds: Option<(char, char)>,
        #[arg(long, default_value_t = 4)]
        min_window: usize,
        #[arg(long, env = "SUBDYN_HORIZON", default_value_t = 100_000)]
        horizon: usize,
    },
    /// Strong coincidence search between fixed points.
    Coincide {
        spec: PathBuf,
        /// Pair of seeds `a,b`; all pairs of periodic seeds when omitted.
        #[arg(long, value_parser = parse_seed_pair)]
        seeds: Option<(char, char)>,
        #[arg(long, env = "SUBDYN_HORIZON", default_value_t = 100_000)]
        horizon: usize,
        /// Keep doubling the horizon up to ten million.
        #[arg(long)]
        deep: bool,
        /// Exit with status 1 unless every pair has a witness.
        #[arg(long)]
        expect_witness: bool,
    },
    /// Dumont–Thomas numeration.
    #[command(subcommand)]
    Num(NumCommand),
    /// Finite-sums families in occurrence sets.
    #[command(subcommand)]
    Ipset(IpsetCommand),
    /// Strand inflation and stable projections.
    #[command(subcommand)]
    Strand(StrandCommand),
}

#[derive(Args, Debug)]
struct FactorArgs {
    spec: PathBuf,
    #[arg(long)]
    seed: char,
    #[arg(long)]
    factor: String,
    #[arg(long, env = "SUBDYN_HORIZON", default_value_t = 100_000)]
    horizon: usize,
}

#[derive(Subcommand, Debug)]
enum NumCommand {
    /// The prefix automaton.
    Graph { spec: PathBuf },
    /// Path representing an integer.
    Encode {
        spec: PathBuf,
        #[arg(long)]
        start: char,
        value: BigUint,
    },
    /// Integer represented by a path such as `a: a.e.a`.
    Decode {
        spec: PathBuf,
        path: String,
        /// Also print the prefix the path spells.
        #[arg(long)]
        word: bool,
    },
    /// The first paths in increasing order.
    List {
        spec: PathBuf,
        #[arg(long)]
        start: char,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Integers whose representations from two seeds end at the same vertex.
    Sync {
        spec: PathBuf,
        #[arg(long, value_parser = parse_seed_pair)]
        seeds: (char, char),
        #[arg(long, default_value_t = 0)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// CSV table of |τ^j(u)| over edge labels u.
    Weights {
        spec: PathBuf,
        #[arg(long, default_value_t = 8)]
        levels: usize,
    },
}

#[derive(Args, Debug)]
struct PositionsArgs {
    /// Read occurrence positions from a file (`-` for standard input)
    /// instead of expanding the fixed point.
    #[arg(long)]
    positions: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum IpsetCommand {
    /// Generators built from a strong coincidence witness.
    Build {
        spec: PathBuf,
        #[arg(long, value_parser = parse_seed_pair)]
        seeds: (char, char),
        #[arg(long, default_value_t = 3)]
        count: usize,
        /// Length of the prefix of the second fixed point to target.
        #[arg(long, default_value_t = 1)]
        prefix_len: usize,
        #[arg(long, default_value_t = crate::ipcentral::DEFAULT_POWER_CAP)]
        power_cap: u32,
        #[arg(long, env = "SUBDYN_HORIZON", default_value_t = 100_000)]
        horizon: usize,
        /// Also check subset sums up to this size against an expansion.
        #[arg(long)]
        verify_subsets: Option<usize>,
    },
    /// Checks that subset sums of the generators are occurrences.
    Verify {
        spec: PathBuf,
        #[arg(long)]
        seed: char,
        #[arg(long)]
        factor: String,
        /// Comma-separated generators.
        #[arg(long, conflicts_with = "family")]
        generators: Option<String>,
        /// JSON output of `ipset build`.
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        max_subset: usize,
        /// Defaults to just past the sum of all generators.
        #[arg(long)]
        horizon: Option<usize>,
        #[command(flatten)]
        positions: PositionsArgs,
        /// Exit with status 1 unless the verdict is pass.
        #[arg(long)]
        expect_pass: bool,
    },
    /// Backtracking search for a finite-sums family.
    Search {
        spec: PathBuf,
        #[arg(long)]
        seed: char,
        #[arg(long)]
        factor: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
        #[command(flatten)]
        positions: PositionsArgs,
        /// Exit with status 1 if no family is found.
        #[arg(long)]
        expect_found: bool,
    },
}

#[derive(Subcommand, Debug)]
enum StrandCommand {
    /// Stable-norm envelopes under repeated inflation.
    Scan {
        spec: PathBuf,
        /// Pattern of the seed strand, started at the origin.
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Also bound the stable norms of abelian differences of two fixed points.
        #[arg(long, value_parser = parse_seed_pair)]
        delta_seeds: Option<(char, char)>,
        #[arg(long, default_value_t = 100_000)]
        delta_horizon: usize,
    },
    /// CSV of segments and an SVG scatter of stable projections.
    Export {
        spec: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn parse_seed_pair(s: &str) -> Result<(char, char), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] if a.chars().count() == 1 && b.chars().count() == 1 => {
            Ok((a.chars().next().unwrap(), b.chars().next().unwrap()))
        }
        _ => Err(format!("expected two letters separated by a comma, got {s:?}")),
    }
}

/// Failure of a command; the message is printed to standard error.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Report {
    json: Value,
    text: String,
    default_format: Format,
    exit: i32,
}

impl Report {
    fn json(json: Value, text: String) -> Self {
        Report { json, text, default_format: Format::Json, exit: EXIT_OK }
    }

    fn text(json: Value, text: String) -> Self {
        Report { json, text, default_format: Format::Text, exit: EXIT_OK }
    }

    fn with_exit(mut self, code: i32) -> Self {
        self.exit = code;
        self
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let report = match dispatch(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let format = cli.format.unwrap_or(report.default_format);
    let mut body = match format {
        Format::Json => serde_json::to_string_pretty(&report.json).expect("JSON values always serialize"),
        Format::Text => report.text,
    };
    if !body.ends_with('\n') {
        body.push('\n');
    }
    let written = match &cli.output {
        Some(path) => fs::write(path, body).map_err(|e| CliError::Io(path.display().to_string(), e)),
        None => out.write_all(body.as_bytes()).map_err(|e| CliError::Io("stdout".into(), e)),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return EXIT_INPUT;
    }
    report.exit
}

fn read_source(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io("stdin".into(), e))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))
    }
}

fn load(path: &Path) -> CliResult<Substitution> {
    let text = read_source(path)?;
    let mut spec = parse_substitution_spec(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    spec.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    Ok(spec.substitution)
}

fn letter(sub: &Substitution, c: char) -> CliResult<Letter> {
    Ok(sub.alphabet().index_of(c)?)
}

fn word(sub: &Substitution, text: &str) -> CliResult<Word> {
    Ok(sub.alphabet().parse_word(text)?)
}

fn stream(sub: &Substitution, c: char) -> CliResult<FixedPointStream> {
    Ok(FixedPointStream::from_seed(sub, letter(sub, c)?)?)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Fixed points at two seeds, generated by a common power so both are
/// fixed by the same substitution.
fn stream_pair(sub: &Substitution, a: Letter, b: Letter) -> CliResult<(FixedPointStream, FixedPointStream)> {
    let not_seed = |l: Letter| {
        CliError::Input(format!("letter {:?} is not a periodic seed", sub.alphabet().symbol(l)))
    };
    let pa = least_period(sub, a, MAX_SEED_PERIOD).ok_or_else(|| not_seed(a))?;
    let pb = least_period(sub, b, MAX_SEED_PERIOD).ok_or_else(|| not_seed(b))?;
    let p = pa / gcd(pa, pb) * pb;
    Ok((FixedPointStream::new(sub, a, p)?, FixedPointStream::new(sub, b, p)?))
}

fn seed_pairs(sub: &Substitution, seeds: Option<(char, char)>) -> CliResult<Vec<(Letter, Letter)>> {
    match seeds {
        Some((a, b)) => Ok(vec![(letter(sub, a)?, letter(sub, b)?)]),
        None => {
            let all: Vec<Letter> = list_periodic_seeds(sub, MAX_SEED_PERIOD).into_iter().map(|s| s.0).collect();
            let mut pairs = Vec::new();
            for (i, &a) in all.iter().enumerate() {
                for &b in &all[i + 1..] {
                    pairs.push((a, b));
                }
            }
            if pairs.is_empty() {
                return Err(CliError::Input("fewer than two periodic seeds".into()));
            }
            Ok(pairs)
        }
    }
}

fn sym(a: &Alphabet, l: Letter) -> String {
    a.symbol(l).to_string()
}

fn render_label(a: &Alphabet, w: &[Letter]) -> String {
    if w.is_empty() {
        if a.contains('e') { "ε" } else { "e" }.to_string()
    } else {
        a.render(w)
    }
}

fn big_json(v: &BigUint) -> Value {
    Value::String(v.to_str_radix(10))
}

fn int_json(v: i128) -> Value {
    i64::try_from(v).map(Value::from).unwrap_or_else(|_| Value::String(v.to_string()))
}

fn dispatch(cmd: &Command) -> CliResult<Report> {
    match cmd {
        Command::Classify { spec, tolerance } => {
            let sub = load(spec)?;
            if !(*tolerance > 0.0) {
                return Err(CliError::Input("tolerance must be positive".into()));
            }
            let r = classify(&sub, *tolerance)?;
            Ok(Report::json(classification_json(&r), classification_text(&r)))
        }
        Command::Expand { spec, seed, length } => {
            let sub = load(spec)?;
            let mut x = stream(&sub, *seed)?;
            let w = sub.alphabet().render(x.expand(*length));
            Ok(Report::text(json!({ "seed": seed.to_string(), "period": x.period(), "prefix": w }), w))
        }
        Command::Occurrences(f) => {
            let sub = load(&f.spec)?;
            let mut x = stream(&sub, f.seed)?;
            let occ = occurrences(&mut x, &word(&sub, &f.factor)?, f.horizon)?;
            let text = occ.positions.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("\n");
            Ok(Report::text(
                json!({ "factor": f.factor, "horizon": f.horizon, "count": occ.len(), "positions": occ.positions }),
                text,
            ))
        }
        Command::Gaps(f) => {
            let sub = load(&f.spec)?;
            let mut x = stream(&sub, f.seed)?;
            let occ = occurrences(&mut x, &word(&sub, &f.factor)?, f.horizon)?;
            let gap = max_return_gap(&occ);
            let text = format!(
                "factor {} below {}: {} occurrences, max gap {}",
                f.factor,
                f.horizon,
                occ.len(),
                gap.map_or("undefined".to_string(), |g| g.to_string())
            );
            Ok(Report::json(
                json!({ "factor": f.factor, "horizon": f.horizon, "count": occ.len(), "max_gap": gap }),
                text,
            ))
        }
        Command::Proximal { spec, seeds, min_window, horizon } => {
            let sub = load(spec)?;
            let mut results = Vec::new();
            let mut text = String::new();
            for (a, b) in seed_pairs(&sub, *seeds)? {
                let (mut x, mut y) = stream_pair(&sub, a, b)?;
                let ev = proximality_scan(&mut x, &mut y, *min_window, *horizon)?;
                let longest = ev.windows.iter().max_by_key(|w| w.len);
                text.push_str(&format!(
                    "{},{}: {} windows of length >= {}, longest {}, verdict {}\n",
                    sym(sub.alphabet(), a),
                    sym(sub.alphabet(), b),
                    ev.windows.len(),
                    min_window,
                    longest.map_or("none".into(), |w| format!("[{}, {})", w.start, w.start + w.len)),
                    serde_json::to_value(ev.verdict).unwrap().as_str().unwrap()
                ));
                let mut v = serde_json::to_value(&ev).unwrap();
                v["seeds"] = json!([sym(sub.alphabet(), a), sym(sub.alphabet(), b)]);
                results.push(v);
            }
            Ok(Report::json(unwrap_single(results), text))
        }
        Command::Coincide { spec, seeds, horizon, deep, expect_witness } => {
            let sub = load(spec)?;
            let a = sub.alphabet();
            let mut results = Vec::new();
            let mut text = String::new();
            let mut all_found = true;
            for (s1, s2) in seed_pairs(&sub, *seeds)? {
                let (mut x, mut y) = stream_pair(&sub, s1, s2)?;
                let verdict = if *deep {
                    find_strong_coincidence_deep(&mut x, &mut y, *horizon, DEEP_HORIZON.max(*horizon))?
                } else {
                    find_strong_coincidence(&mut x, &mut y, *horizon)?
                };
                let pair = format!("{},{}", sym(a, s1), sym(a, s2));
                match &verdict {
                    CoincidenceVerdict::Witness(w) => text.push_str(&format!(
                        "{pair}: witness k={} c={} s={} t={}\n",
                        w.k,
                        sym(a, w.c),
                        a.render(&w.s),
                        a.render(&w.t)
                    )),
                    CoincidenceVerdict::NoWitnessUpTo { horizon, delta_values, stabilized } => {
                        all_found = false;
                        let deltas: Vec<String> = delta_values.iter().map(|d| d.to_string()).collect();
                        text.push_str(&format!(
                            "{pair}: no witness up to {horizon}; {} difference values {}; stabilized: {}\n",
                            deltas.len(),
                            deltas.join(" "),
                            if *stabilized { "yes" } else { "no" }
                        ));
                    }
                }
                let v = coincidence_json(a, s1, s2, &verdict);
                results.push(v);
            }
            let exit = if *expect_witness && !all_found { EXIT_NEGATIVE } else { EXIT_OK };
            Ok(Report::json(unwrap_single(results), text).with_exit(exit))
        }
        Command::Num(n) => dispatch_num(n),
        Command::Ipset(c) => dispatch_ipset(c),
        Command::Strand(c) => dispatch_strand(c),
    }
}

fn unwrap_single(mut v: Vec<Value>) -> Value {
    if v.len() == 1 {
        v.pop().unwrap()
    } else {
        Value::Array(v)
    }
}

/// JSON form of a coincidence verdict with letters as symbols.
pub fn coincidence_json(a: &Alphabet, s1: Letter, s2: Letter, verdict: &CoincidenceVerdict) -> Value {
    match verdict {
        CoincidenceVerdict::Witness(w) => json!({
            "seeds": [sym(a, s1), sym(a, s2)],
            "kind": "witness",
            "k": w.k,
            "c": sym(a, w.c),
            "s": a.render(&w.s),
            "t": a.render(&w.t),
        }),
        CoincidenceVerdict::NoWitnessUpTo { horizon, delta_values, stabilized } => json!({
            "seeds": [sym(a, s1), sym(a, s2)],
            "kind": "no_witness_up_to",
            "horizon": horizon,
            "delta_values": delta_values,
            "stabilized": stabilized,
        }),
    }
}

/// JSON form of a classification report with letters as symbols.
pub fn classification_json(r: &ClassificationReport) -> Value {
    let poly = |p: &crate::spectral::poly::IntPolynomial| -> Value {
        Value::Array(p.coeffs().iter().map(|&c| int_json(c)).collect())
    };
    json!({
        "alphabet": r.alphabet.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "matrix": r.matrix,
        "primitive": r.primitive,
        "primitivity_exponent": r.primitivity_exponent,
        "char_poly": poly(&r.char_poly),
        "char_poly_text": r.char_poly.to_string(),
        "factors": r.factors.iter().map(|f| json!({
            "coeffs": poly(&f.poly),
            "text": f.poly.to_string(),
            "multiplicity": f.multiplicity,
        })).collect::<Vec<_>>(),
        "irreducible": r.irreducible,
        "roots": r.roots.as_ref().map(|rs| rs.iter().map(|x| json!({
            "re": x.re,
            "im": x.im,
            "modulus": x.modulus,
            "radius": x.radius,
            "exact": x.exact.map(int_json),
            "certified": x.certified,
            "multiplicity": x.multiplicity,
            "unit_circle": x.position_vs_unit_circle(),
        })).collect::<Vec<_>>()),
        "dilation": r.dilation,
        "perron_vector": r.perron_vector,
        "pisot": r.pisot_type,
        "dilation_pisot_number": r.dilation_pisot_number,
        "irreducible_pisot": r.irreducible_pisot,
    })
}

fn classification_text(r: &ClassificationReport) -> String {
    let yn = |b: bool| if b { "yes" } else { "no" };
    let verdict = |v: &Option<crate::spectral::PisotVerdict>| {
        v.map_or("n/a".to_string(), |v| serde_json::to_value(v).unwrap().as_str().unwrap().to_string())
    };
    let mut s = String::new();
    s.push_str(&format!("alphabet            {}\n", r.alphabet.iter().collect::<String>()));
    s.push_str(&format!("matrix              {:?}\n", r.matrix.rows()));
    s.push_str(&format!(
        "primitive           {}{}\n",
        yn(r.primitive),
        r.primitivity_exponent.map_or(String::new(), |k| format!(" (exponent {k})"))
    ));
    s.push_str(&format!("char poly           {}\n", r.char_poly));
    let factors: Vec<String> = r
        .factors
        .iter()
        .map(|f| if f.multiplicity > 1 { format!("({})^{}", f.poly, f.multiplicity) } else { format!("({})", f.poly) })
        .collect();
    s.push_str(&format!("factors             {}\n", factors.join(" ")));
    s.push_str(&format!("irreducible         {}\n", yn(r.irreducible)));
    if let Some(d) = &r.dilation {
        s.push_str(&format!("dilation            {:.12} ± {:.1e}\n", d.value, d.error));
    }
    if let Some(roots) = &r.roots {
        for x in roots {
            let exact = x.exact.map_or(String::new(), |e| format!(" exact {e}"));
            s.push_str(&format!(
                "root                {:+.10} {:+.10}i  |z|={:.10} ± {:.1e}{}\n",
                x.re, x.im, x.modulus, x.radius, exact
            ));
        }
    }
    s.push_str(&format!("pisot               {}\n", verdict(&r.pisot_type)));
    s.push_str(&format!("dilation is pisot   {}\n", verdict(&r.dilation_pisot_number)));
    s.push_str(&format!("irreducible pisot   {}\n", yn(r.irreducible_pisot)));
    s
}

fn dispatch_num(cmd: &NumCommand) -> CliResult<Report> {
    match cmd {
        NumCommand::Graph { spec } => {
            let sub = load(spec)?;
            let g = PrefixGraph::new(&sub);
            let a = sub.alphabet();
            let edges: Vec<Value> = g
                .edges()
                .map(|e| json!({ "source": sym(a, e.source), "target": sym(a, e.target), "label": a.render(&e.label) }))
                .collect();
            let text = g
                .edges()
                .map(|e| format!("{} -> {} [{}]", sym(a, e.source), sym(a, e.target), render_label(a, &e.label)))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Report::json(
                json!({ "vertices": a.letters().iter().map(|c| c.to_string()).collect::<Vec<_>>(), "edges": edges }),
                text,
            ))
        }
        NumCommand::Encode { spec, start, value } => {
            let sub = load(spec)?;
            let g = PrefixGraph::new(&sub);
            let p = encode_integer(&g, letter(&sub, *start)?, value)?;
            Ok(Report::text(path_json(&g, &p, value), p.render(sub.alphabet())))
        }
        NumCommand::Decode { spec, path, word } => {
            let sub = load(spec)?;
            let g = PrefixGraph::new(&sub);
            let p = PathRepresentation::parse(path, sub.alphabet())?;
            let cap = word.then_some(DEFAULT_MATERIALIZE_CAP);
            let d = decode_path(&g, &p, cap)?;
            let rendered = d.word.as_ref().map(|w| sub.alphabet().render(w));
            let mut j = path_json(&g, &p, &d.value);
            j["terminal"] = json!(sym(sub.alphabet(), d.terminal));
            if *word {
                j["word"] = json!(rendered);
            }
            let mut text = d.value.to_string();
            if *word {
                text.push(' ');
                text.push_str(rendered.as_deref().unwrap_or("(longer than the cap)"));
            }
            Ok(Report::text(j, text))
        }
        NumCommand::List { spec, start, count } => {
            let sub = load(spec)?;
            let g = PrefixGraph::new(&sub);
            let paths = enumerate_paths(&g, letter(&sub, *start)?, *count)?;
            let text = paths
                .iter()
                .enumerate()
                .map(|(k, p)| format!("{k}\t{}", p.render(sub.alphabet())))
                .collect::<Vec<_>>()
                .join("\n");
            let j: Vec<Value> = paths
                .iter()
                .enumerate()
                .map(|(k, p)| path_json(&g, p, &BigUint::from(k)))
                .collect();
            Ok(Report::text(Value::Array(j), text))
        }
        NumCommand::Sync { spec, seeds, from, to } => {
            let sub = load(spec)?;
            let g = PrefixGraph::new(&sub);
            let a = sub.alphabet();
            let r = synchronizing_scan(&g, letter(&sub, seeds.0)?, letter(&sub, seeds.1)?, *from, *to)?;
            let entries: Vec<Value> = r
                .synchronizing
                .iter()
                .map(|e| {
                    json!({
                        "value": big_json(&e.value),
                        "terminal": sym(a, e.terminal),
                        "path_a": e.path_a.render(a),
                        "path_b": e.path_b.render(a),
                    })
                })
                .collect();
            let mut text = String::new();
            for e in &r.synchronizing {
                text.push_str(&format!(
                    "{}\t{}\t{}\t{}\n",
                    e.value,
                    sym(a, e.terminal),
                    e.path_a.render(a),
                    e.path_b.render(a)
                ));
            }
            text.push_str(&format!(
                "{} of {} values synchronizing; longest run {}",
                r.synchronizing.len(),
                to.saturating_sub(*from) + 1,
                r.longest_run
            ));
            if let Some(s) = r.longest_run_start {
                text.push_str(&format!(" starting at {s}"));
            }
            Ok(Report::json(
                json!({
                    "range": [from, to],
                    "synchronizing": entries,
                    "longest_run": r.longest_run,
                    "longest_run_start": r.longest_run_start,
                }),
                text,
            ))
        }
        NumCommand::Weights { spec, levels } => {
            let sub = load(spec)?;
            let g = PrefixGraph::new(&sub);
            let a = sub.alphabet();
            let rows = g.weight_table(*levels);
            let mut csv = String::from("level,vertex,label,weight\n");
            for r in &rows {
                csv.push_str(&format!("{},{},{},{}\n", r.level, sym(a, r.vertex), render_label(a, &r.label), r.weight));
            }
            let j: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({ "level": r.level, "vertex": sym(a, r.vertex), "label": a.render(&r.label), "weight": big_json(&r.weight) })
                })
                .collect();
            Ok(Report::text(Value::Array(j), csv))
        }
    }
}

fn path_json(g: &PrefixGraph, p: &PathRepresentation, value: &BigUint) -> Value {
    let a = g.alphabet();
    json!({
        "start": sym(a, p.start),
        "labels": p.labels.iter().map(|l| a.render(l)).collect::<Vec<_>>(),
        "text": p.render(a),
        "value": big_json(value),
    })
}

fn read_positions(path: &Path) -> CliResult<Vec<usize>> {
    let text = read_source(path)?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| CliError::Input(format!("bad position {t:?}"))))
        .collect()
}

/// Occurrence set from an explicit list of positions or by expansion.
fn occurrence_set(
    sub: &Substitution,
    seed: char,
    factor: &Word,
    horizon: Option<usize>,
    positions: &PositionsArgs,
) -> CliResult<OccurrenceSet> {
    match &positions.positions {
        Some(path) => {
            let pos = read_positions(path)?;
            let h = horizon.unwrap_or_else(|| pos.iter().max().map_or(factor.len(), |m| m + factor.len()));
            Ok(OccurrenceSet::from_positions(factor.clone(), h, pos)?)
        }
        None => {
            let h = horizon.ok_or_else(|| CliError::Input("a horizon is required".into()))?;
            let mut x = stream(sub, seed)?;
            Ok(occurrences(&mut x, factor, h)?)
        }
    }
}

fn family_json(sub: &Substitution, f: &FsFamily) -> Value {
    let a = sub.alphabet();
    let provenance = match &f.provenance {
        FsProvenance::Paths { power, s, t, c, r, target, schedule, paths, twin_paths } => json!({
            "kind": "paths",
            "power": power,
            "s": a.render(s),
            "t": a.render(t),
            "c": sym(a, *c),
            "r": a.render(r),
            "target": a.render(target),
            "schedule": schedule,
            "paths": paths.iter().map(|p| p.render(a)).collect::<Vec<_>>(),
            "twin_paths": twin_paths.iter().map(|p| p.render(a)).collect::<Vec<_>>(),
        }),
        FsProvenance::Searched { horizon, depth } => json!({ "kind": "searched", "horizon": horizon, "depth": depth }),
    };
    json!({
        "generators": f.generators.iter().map(big_json).collect::<Vec<_>>(),
        "provenance": provenance,
    })
}

fn verification_text(v: &FsVerification) -> String {
    let mut s = format!(
        "verdict {}: {} sums checked below {}, {} failures, {} unchecked\n",
        serde_json::to_value(v.verdict).unwrap().as_str().unwrap(),
        v.checked,
        v.horizon,
        v.failures.len(),
        v.unchecked.len()
    );
    for f in &v.failures {
        s.push_str(&format!("failed  {:?} sum {}\n", f.subset, f.sum));
    }
    for f in &v.unchecked {
        s.push_str(&format!("beyond  {:?} sum {}\n", f.subset, f.sum));
    }
    s
}

fn generators_sum(g: &[BigUint]) -> Option<usize> {
    g.iter().sum::<BigUint>().to_usize()
}

fn dispatch_ipset(cmd: &IpsetCommand) -> CliResult<Report> {
    match cmd {
        IpsetCommand::Build { spec, seeds, count, prefix_len, power_cap, horizon, verify_subsets } => {
            let sub = load(spec)?;
            let (a, b) = (letter(&sub, seeds.0)?, letter(&sub, seeds.1)?);
            let (mut x, mut y) = stream_pair(&sub, a, b)?;
            let verdict = find_strong_coincidence(&mut x, &mut y, *horizon)?;
            let Some(w) = verdict.witness() else {
                let text = format!("no strong coincidence up to {horizon}; cannot build a family");
                return Ok(Report::json(json!({ "error": "no_witness", "horizon": horizon }), text)
                    .with_exit(EXIT_NEGATIVE));
            };
            let options = FsOptions { power_cap: *power_cap, prefix_len: *prefix_len, ..FsOptions::default() };
            let fam = build_fs_family(&mut x, &mut y, w, *count, &options)?;
            let mut j = family_json(&sub, &fam);
            let mut text = fam.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>().join("\n");
            let mut exit = EXIT_OK;
            if let Some(k) = verify_subsets {
                let target = y.prefix(*prefix_len);
                let h = generators_sum(&fam.generators)
                    .map(|s| s + target.len())
                    .filter(|&h| h <= AUTO_HORIZON_CAP)
                    .unwrap_or(AUTO_HORIZON_CAP);
                let occ = occurrences(&mut x, &target, h)?;
                let v = verify_finite_sums(&fam, &occ, *k);
                if v.verdict == FsVerdict::Fail {
                    exit = EXIT_NEGATIVE;
                }
                text.push('\n');
                text.push_str(&verification_text(&v));
                j["verification"] = serde_json::to_value(&v).unwrap();
            }
            Ok(Report::json(j, text).with_exit(exit))
        }
        IpsetCommand::Verify { spec, seed, factor, generators, family, max_subset, horizon, positions, expect_pass } => {
            let sub = load(spec)?;
            let u = word(&sub, factor)?;
            let gens: Vec<BigUint> = match (generators, family) {
                (Some(list), None) => list
                    .split(',')
                    .map(|t| t.trim().parse::<BigUint>().map_err(|_| CliError::Input(format!("bad generator {t:?}"))))
                    .collect::<CliResult<_>>()?,
                (None, Some(path)) => {
                    let v: Value = serde_json::from_str(&read_source(path)?)
                        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                    v["generators"]
                        .as_array()
                        .ok_or_else(|| CliError::Input("family file has no generators".into()))?
                        .iter()
                        .map(|g| {
                            g.as_str()
                                .map(str::to_string)
                                .or_else(|| g.as_u64().map(|n| n.to_string()))
                                .and_then(|s| s.parse::<BigUint>().ok())
                                .ok_or_else(|| CliError::Input(format!("bad generator {g}")))
                        })
                        .collect::<CliResult<_>>()?
                }
                _ => return Err(CliError::Input("pass either --generators or --family".into())),
            };
            let h = horizon.or_else(|| {
                positions.positions.is_none().then(|| {
                    generators_sum(&gens).map_or(AUTO_HORIZON_CAP, |s| (s + u.len()).min(AUTO_HORIZON_CAP)).max(u.len())
                })
            });
            let occ = occurrence_set(&sub, *seed, &u, h, positions)?;
            let fam = FsFamily { generators: gens, provenance: FsProvenance::Searched { horizon: occ.horizon, depth: 0 } };
            let v = verify_finite_sums(&fam, &occ, *max_subset);
            let exit = if *expect_pass && v.verdict != FsVerdict::Pass { EXIT_NEGATIVE } else { EXIT_OK };
            Ok(Report::json(serde_json::to_value(&v).unwrap(), verification_text(&v)).with_exit(exit))
        }
        IpsetCommand::Search { spec, seed, factor, depth, horizon, positions, expect_found } => {
            let sub = load(spec)?;
            let u = word(&sub, factor)?;
            let occ = occurrence_set(&sub, *seed, &u, Some(*horizon), positions)?;
            match search_ip_witness(&occ, *depth)? {
                Some(f) => {
                    let text = f.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ");
                    Ok(Report::json(family_json(&sub, &f), text))
                }
                None => {
                    let exit = if *expect_found { EXIT_NEGATIVE } else { EXIT_OK };
                    let text = format!("no family of depth {depth} below {}", occ.horizon);
                    Ok(Report::json(Value::Null, text).with_exit(exit))
                }
            }
        }
    }
}

fn splitting(sub: &Substitution) -> CliResult<InvariantSplitting> {
    let r = classify(sub, DEFAULT_TOLERANCE)?;
    Ok(invariant_splitting(&r)?)
}

fn dispatch_strand(cmd: &StrandCommand) -> CliResult<Report> {
    match cmd {
        StrandCommand::Scan { spec, word: w, iterations, tolerance, delta_seeds, delta_horizon } => {
            let sub = load(spec)?;
            let split = splitting(&sub)?;
            let seed = build_strand(&word(&sub, w)?, &vec![0; sub.size()]);
            let r = stability_scan(&sub, &seed, *iterations, &split, *tolerance)?;
            let mut j = json!({
                "dilation": split.dilation,
                "unstable_direction": split.unstable,
                "stable_basis": split.stable_basis,
                "splitting_defect": split.defect,
                "scan": r,
            });
            let mut text = format!("dilation {:.12}, stable dimension {}\n", split.dilation, split.stable_basis.len());
            for (k, (e, n)) in r.envelopes.iter().zip(&r.segment_counts).enumerate() {
                text.push_str(&format!("iteration {k:>3}  segments {n:>10}  envelope {e:.12}\n"));
            }
            text.push_str(&format!(
                "empirical R0 (after burn-in {}) {:.12}\nnew maximum after burn-in: {}\nconjugation error {:.3e}\n",
                r.burn_in,
                r.empirical_r0,
                if r.new_max_after_burn_in { "yes" } else { "no" },
                r.conjugation_error
            ));
            if let Some((a, b)) = delta_seeds {
                let (la, lb) = (letter(&sub, *a)?, letter(&sub, *b)?);
                let (mut x, mut y) = stream_pair(&sub, la, lb)?;
                let geo = delta_stable_norms(&mut x, &mut y, *delta_horizon, &split)?;
                let set = delta_value_set(&mut x, &mut y, *delta_horizon)?;
                text.push_str(&format!(
                    "difference vectors up to {}: max stable norm {:.12}, {} distinct values\n",
                    delta_horizon, geo.max_stable_norm, set.cardinality
                ));
                j["differences"] = json!({ "geometry": geo, "distinct_values": set.cardinality });
            }
            Ok(Report::json(j, text))
        }
        StrandCommand::Export { spec, word: w, iterations, csv, svg } => {
            let sub = load(spec)?;
            let split = splitting(&sub)?;
            let seed = build_strand(&word(&sub, w)?, &vec![0; sub.size()]);
            let table = export_csv(&sub, &seed, *iterations, &split)?;
            let mut written = Vec::new();
            if let Some(path) = csv {
                fs::write(path, &table).map_err(|e| CliError::Io(path.display().to_string(), e))?;
                written.push(path.display().to_string());
            }
            if let Some(path) = svg {
                let image = export_svg(&sub, &seed, *iterations, &split)?;
                fs::write(path, image).map_err(|e| CliError::Io(path.display().to_string(), e))?;
                written.push(path.display().to_string());
            }
            if written.is_empty() {
                Ok(Report::text(json!({ "csv": table }), table))
            } else {
                Ok(Report::json(json!({ "written": written }), format!("wrote {}", written.join(", "))))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("subdyn").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn seed_pair_parsing() {
        assert_eq!(parse_seed_pair("a,b"), Ok(('a', 'b')));
        assert!(parse_seed_pair("ab").is_err());
    }

    #[test]
    fn missing_file_is_input_error() {
        let (code, _, err) = run_capture(&["classify", "/nonexistent/x.sub"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("error"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("classify"));
    }
}
