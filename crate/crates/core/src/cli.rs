//! Command-line front end. [`main_with_args`] is the whole program; the
//! binary only forwards `std::env::args` and the process streams.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::graph::{circulant_graph, complete_bipartite, complete_graph, make_metric, Graph, MetricGraph};
use crate::logscalar::LogScalar;
use crate::{edgelist, families, perturbation, spectral, trees, verify};

#[derive(Debug, Parser)]
#[command(
    name = "qgdet",
    version,
    about = "Spectral determinants and spanning trees of quantum graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Write the edge-list file of a graph
    Gen(Opts),
    /// det'(L), det'(R) and the spectrum of R
    Specdet(Opts),
    /// First-order against exact determinants under one edge perturbation
    Perturb(Opts),
    /// Spanning-tree count, the spectral estimate and window bounds
    Trees(Opts),
    /// One CSV row per epsilon
    Sweep(Opts),
    /// Run the invariant corpus
    Verify(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Complete,
    Bipartite,
    Circulant,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
struct Opts {
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Edge-list file for `--family file`
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Circulant jumps, comma separated
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// start:stop:count:geom|lin
    #[arg(long)]
    eps_range: Option<String>,
    #[arg(long, default_value_t = 0)]
    edge: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also locate the breakdown perturbation (`trees`)
    #[arg(long)]
    breakdown: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Gen,
    Specdet,
    Perturb,
    Trees,
    Sweep,
    Verify,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Complete(usize),
    Bipartite(usize, usize),
    Circulant(usize, Vec<usize>),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl EpsRange {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("eps range {s:?} is not start:stop:count:geom|lin"));
        let [start, stop, count, spacing] = parts[..] else {
            return Err(bad());
        };
        let start: f64 = start.parse().map_err(|_| bad())?;
        let stop: f64 = stop.parse().map_err(|_| bad())?;
        let count: usize = count.parse().map_err(|_| bad())?;
        let spacing = match spacing {
            "geom" => Spacing::Geometric,
            "lin" => Spacing::Linear,
            _ => return Err(bad()),
        };
        if !(start > 0.0 && stop.is_finite() && start <= stop) || count == 0 || (count > 1 && start == stop) {
            return Err(Error::InvalidParameter(format!(
                "eps range needs 0 < start < stop and count >= 1, got {s:?}"
            )));
        }
        Ok(EpsRange {
            start,
            stop,
            count,
            spacing,
        })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Geometric => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub source: Option<GraphSource>,
    pub ell: f64,
    pub eps: Option<f64>,
    pub eps_range: Option<EpsRange>,
    pub edge: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub breakdown: bool,
}

impl RunConfig {
    fn from_cli(cmd: Cmd) -> Result<Self> {
        let (command, o) = match cmd {
            Cmd::Gen(o) => (Command::Gen, o),
            Cmd::Specdet(o) => (Command::Specdet, o),
            Cmd::Perturb(o) => (Command::Perturb, o),
            Cmd::Trees(o) => (Command::Trees, o),
            Cmd::Sweep(o) => (Command::Sweep, o),
            Cmd::Verify(o) => (Command::Verify, o),
        };
        let need = |v: Option<usize>, flag: &str| {
            v.ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required for this family")))
        };
        let source = match o.family {
            None => None,
            Some(FamilyArg::Complete) => Some(GraphSource::Complete(need(o.n, "n")?)),
            Some(FamilyArg::Bipartite) => Some(GraphSource::Bipartite(need(o.m, "m")?, need(o.n, "n")?)),
            Some(FamilyArg::Circulant) => Some(GraphSource::Circulant(
                need(o.n, "n")?,
                o.a.ok_or_else(|| Error::InvalidParameter("--a is required for circulants".into()))?,
            )),
            Some(FamilyArg::File) => {
                Some(GraphSource::File(o.graph.ok_or_else(|| {
                    Error::InvalidParameter("--graph is required with --family file".into())
                })?))
            }
        };
        if source.is_none() && command != Command::Verify {
            return Err(Error::InvalidParameter("--family is required".into()));
        }
        let eps_range = o.eps_range.as_deref().map(EpsRange::parse).transpose()?;
        let format = o.format.unwrap_or(if command == Command::Sweep {
            Format::Csv
        } else {
            Format::Json
        });
        Ok(RunConfig {
            command,
            source,
            ell: o.ell,
            eps: o.eps,
            eps_range,
            edge: o.edge,
            format,
            out: o.out,
            seed: o.seed,
            breakdown: o.breakdown,
        })
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match RunConfig::from_cli(cli.command).and_then(|cfg| run(&cfg, stdout)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "qgdet: {e}");
            e.exit_code()
        }
    }
}

/// Runs one configured command; the report goes to `--out` or `stdout`.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let text = match cfg.command {
        Command::Gen => edgelist::render(&load(cfg)?),
        Command::Specdet => render(&specdet(&load(cfg)?)?, cfg.format),
        Command::Perturb => render(&perturb(cfg)?, cfg.format),
        Command::Trees => render(&trees_cmd(cfg)?, cfg.format),
        Command::Sweep => {
            let rows = sweep(cfg)?;
            match cfg.format {
                Format::Csv => sweep_csv(&rows),
                Format::Json => render(&Node::Arr(rows.iter().map(SweepRow::node).collect()), Format::Json),
            }
        }
        Command::Verify => {
            let checks = verify::run_all(cfg.seed);
            let ok = checks.iter().all(|c| c.passed);
            let report = Node::obj([
                ("seed", Node::Int(cfg.seed)),
                ("all_passed", Node::Bool(ok)),
                (
                    "checks",
                    Node::Arr(
                        checks
                            .iter()
                            .map(|c| {
                                Node::obj([
                                    ("name", Node::Str(c.name.to_string())),
                                    ("passed", Node::Bool(c.passed)),
                                    ("detail", Node::Str(c.detail.clone())),
                                ])
                            })
                            .collect(),
                    ),
                ),
            ]);
            emit(cfg, stdout, &render(&report, cfg.format))?;
            if !ok {
                let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
                return Err(Error::ConvergenceFailure(format!(
                    "verification failed: {}",
                    failed.join(", ")
                )));
            }
            return Ok(());
        }
    };
    emit(cfg, stdout, &text)
}

fn emit(cfg: &RunConfig, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn base_graph(source: &GraphSource) -> Result<Option<Graph>> {
    Ok(Some(match source {
        GraphSource::Complete(n) => complete_graph(*n)?,
        GraphSource::Bipartite(m, n) => complete_bipartite(*m, *n)?,
        GraphSource::Circulant(n, a) => circulant_graph(*n, a)?,
        GraphSource::File(_) => return Ok(None),
    }))
}

/// The configured metric graph, with `--eps` applied to `--edge`.
fn load(cfg: &RunConfig) -> Result<MetricGraph> {
    let source = cfg.source.as_ref().expect("validated in from_cli");
    match base_graph(source)? {
        Some(g) => make_metric(&g, cfg.ell, cfg.eps.map(|e| (cfg.edge, e))),
        None => {
            let GraphSource::File(path) = source else {
                unreachable!()
            };
            let mg = edgelist::read_file(path)?;
            match cfg.eps {
                None => Ok(mg),
                Some(eps) => {
                    let mut lengths = mg.lengths().to_vec();
                    let l = lengths
                        .get_mut(cfg.edge)
                        .ok_or_else(|| Error::InvalidEdge(format!("edge index {} out of range", cfg.edge)))?;
                    *l += eps;
                    MetricGraph::with_lengths(mg.graph().clone(), lengths)
                }
            }
        }
    }
}

/// Unperturbed graph and its common edge length.
fn load_equilateral(cfg: &RunConfig) -> Result<(Graph, f64)> {
    let source = cfg.source.as_ref().expect("validated in from_cli");
    if let Some(g) = base_graph(source)? {
        return Ok((g, cfg.ell));
    }
    let GraphSource::File(path) = source else {
        unreachable!()
    };
    let mg = edgelist::read_file(path)?;
    let ell = mg
        .equilateral_length()
        .ok_or_else(|| Error::InvalidInput("this command needs an equilateral edge-list file".into()))?;
    Ok((mg.graph().clone(), ell))
}

fn specdet(mg: &MetricGraph) -> Result<Node> {
    let rep = spectral::analyze(mg)?;
    let g = mg.graph();
    let closed = mg
        .equilateral_length()
        .and_then(|ell| families::family_determinant(g, ell, 0).ok())
        .map(|f| Node::Num(f.equilateral_value))
        .unwrap_or(Node::Null);
    Ok(Node::obj([
        ("graph", Node::Str(g.family().name())),
        ("vertices", Node::Int(g.num_vertices() as u64)),
        ("edges", Node::Int(g.num_edges() as u64)),
        ("total_length", Node::Num(mg.total_length())),
        ("det_l", Node::Num(rep.det_l)),
        ("ln_det_l", Node::Num(rep.ln_det_l)),
        ("det_l_closed_form", closed),
        ("det_r", Node::Num(rep.det_r.value)),
        ("ln_det_r", Node::Num(rep.det_r.ln_abs)),
        ("kernel_dim", Node::Int(rep.det_r.kernel_dim as u64)),
        ("residual_bound", Node::Num(rep.spectrum.residual_bound)),
        ("eigenvalues", Node::nums(&rep.spectrum.eigenvalues)),
    ]))
}

/// Relative first-order slope of `det'(L)` in `eps/ell`: the closed form when
/// the family has one, else the prefactor derivative plus the `R` response.
fn det_l_slope(g: &Graph, ell: f64, edge: usize) -> Result<f64> {
    if let Ok(f) = families::family_determinant(g, ell, edge) {
        return Ok(f.first_order_slope);
    }
    let mg = make_metric(g, ell, None)?;
    let e = g.num_edges() as f64;
    Ok(1.0 + 1.0 / e + ell * perturbation::det_r_log_slope(&mg, edge)?)
}

fn perturb(cfg: &RunConfig) -> Result<Node> {
    let (g, ell) = load_equilateral(cfg)?;
    let eps = cfg
        .eps
        .ok_or_else(|| Error::InvalidParameter("perturb needs --eps".into()))?;
    let mg = make_metric(&g, ell, None)?;
    let res =
        perturbation::perturbed_spectrum_first_order(&mg, &perturbation::EdgePerturbation::new(cfg.edge, eps, ell)?)?;
    let det0 = spectral::spectral_determinant(&mg)?;
    let exact_l = spectral::spectral_determinant(&make_metric(&g, ell, Some((cfg.edge, eps)))?)?;
    let slope = det_l_slope(&g, ell, cfg.edge)?;
    Ok(Node::obj([
        ("graph", Node::Str(g.family().name())),
        ("edge", Node::Int(cfg.edge as u64)),
        ("ell", Node::Num(ell)),
        ("epsilon", Node::Num(eps)),
        ("det_r_first_order", Node::Num(res.first_order_det)),
        ("det_r_exact", Node::Num(res.exact_det)),
        ("det_r_error", Node::Num(res.error)),
        ("scaling_ratio", res.scaling_ratio.map_or(Node::Null, Node::Num)),
        ("det_l_equilateral", Node::Num(det0)),
        ("det_l_first_order", Node::Num(det0 * (1.0 + eps / ell * slope))),
        ("det_l_exact", Node::Num(exact_l)),
        ("det_l_relative_slope", Node::Num(slope)),
        ("first_order_eigenvalues", Node::nums(&res.first_order_eigenvalues)),
    ]))
}

fn log_node(x: LogScalar) -> Node {
    Node::obj([
        ("value", Node::Num(x.value())),
        ("log10", Node::Num(x.log10())),
        ("underflow", Node::Bool(x.is_underflow())),
    ])
}

fn trees_cmd(cfg: &RunConfig) -> Result<Node> {
    let mg = load(cfg)?;
    if cfg.breakdown && mg.equilateral_length().is_none() && cfg.eps.is_none() {
        return Err(Error::InvalidInput("--breakdown needs an equilateral graph".into()));
    }
    // scan the unperturbed graph even when --eps stretched an edge
    let rep = trees::tree_report(&mg, None)?;
    let breakdown = if cfg.breakdown {
        let (g, ell) = load_equilateral(cfg)?;
        Some(trees::breakdown_epsilon(&g, cfg.edge, ell)?)
    } else {
        None
    };
    let g = mg.graph();
    let mut fields = vec![
        ("graph", Node::Str(g.family().name())),
        ("vertices", Node::Int(g.num_vertices() as u64)),
        ("edges", Node::Int(g.num_edges() as u64)),
        ("exact_count", Node::big(&rep.exact_count)),
        ("t_estimate", Node::Num(rep.estimate)),
        ("t_rounded", Node::big(&rep.rounded)),
        ("matches", Node::Bool(rep.rounded == rep.exact_count)),
        ("ambiguous_rounding", Node::Bool(rep.ambiguous_rounding)),
        (
            "relative_error",
            Node::Num(trees::relative_error(rep.estimate, &rep.exact_count)),
        ),
        ("reference_length", Node::Num(rep.reference_length)),
        ("theorem2_delta", log_node(rep.theorem2_delta)),
        ("heuristic_delta", rep.heuristic_delta.map_or(Node::Null, log_node)),
        ("dispersion", Node::Num(rep.dispersion.dispersion)),
        ("dispersion_threshold", log_node(rep.dispersion.threshold)),
        ("dispersion_satisfied", Node::Bool(rep.dispersion.satisfied)),
    ];
    if let Some(b) = breakdown {
        fields.push(("breakdown_epsilon", Node::Num(b.epsilon)));
        fields.push(("breakdown_found", Node::Bool(b.found)));
    }
    Ok(Node::Obj(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect()))
}

/// One evaluated point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub det_l_exact: f64,
    pub det_l_first_order: f64,
    pub t_estimate: f64,
    pub t_rounded: BigUint,
    pub exact_count: BigUint,
    pub deviation: bool,
}

impl SweepRow {
    fn node(&self) -> Node {
        Node::obj([
            ("epsilon", Node::Num(self.epsilon)),
            ("det_l_exact", Node::Num(self.det_l_exact)),
            ("det_l_first_order", Node::Num(self.det_l_first_order)),
            ("t_estimate", Node::Num(self.t_estimate)),
            ("t_rounded", Node::big(&self.t_rounded)),
            ("exact_count", Node::big(&self.exact_count)),
            ("deviation_flag", Node::Bool(self.deviation)),
        ])
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let (g, ell) = load_equilateral(cfg)?;
    let points = match (&cfg.eps_range, cfg.eps) {
        (Some(r), _) => r.points(),
        (None, Some(e)) => vec![e],
        (None, None) => return Err(Error::InvalidParameter("sweep needs --eps-range or --eps".into())),
    };
    let exact = trees::kirchhoff_count(&g);
    if !exact.connected {
        return Err(Error::DisconnectedGraph("sweep needs a connected graph".into()));
    }
    let det0 = spectral::spectral_determinant(&make_metric(&g, ell, None)?)?;
    let slope = det_l_slope(&g, ell, cfg.edge)?;
    points
        .par_iter()
        .map(|&eps| {
            let mg = make_metric(&g, ell, Some((cfg.edge, eps)))?;
            let det_l_exact = spectral::spectral_determinant(&mg)?;
            let t = trees::tree_estimate(&mg)?;
            let rounded = trees::round_estimate(t).value;
            Ok(SweepRow {
                epsilon: eps,
                det_l_exact,
                det_l_first_order: det0 * (1.0 + eps / ell * slope),
                t_estimate: t,
                deviation: rounded != exact.count,
                t_rounded: rounded,
                exact_count: exact.count.clone(),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("epsilon,detL_exact,detL_first_order,T_estimate,T_rounded,exact_count,deviation_flag\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            num(r.epsilon),
            num(r.det_l_exact),
            num(r.det_l_first_order),
            num(r.t_estimate),
            r.t_rounded,
            r.exact_count,
            u8::from(r.deviation)
        ));
    }
    s
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ordered report tree with fixed numeric formatting.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Null,
    Bool(bool),
    Int(u64),
    /// Decimal digits of an integer too wide for a JSON double.
    BigInt(String),
    Num(f64),
    Str(String),
    Arr(Vec<Node>),
    Obj(Vec<(String, Node)>),
}

const MAX_SAFE_INT: u64 = 1 << 53;

impl Node {
    fn obj<const N: usize>(fields: [(&str, Node); N]) -> Node {
        Node::Obj(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    fn nums(xs: &[f64]) -> Node {
        Node::Arr(xs.iter().copied().map(Node::Num).collect())
    }

    fn big(x: &BigUint) -> Node {
        match x.to_u64() {
            Some(v) if v <= MAX_SAFE_INT => Node::Int(v),
            _ => Node::BigInt(x.to_string()),
        }
    }

    fn csv_rows(&self, key: &str, out: &mut Vec<(String, String)>) {
        match self {
            Node::Null => out.push((key.into(), String::new())),
            Node::Bool(b) => out.push((key.into(), b.to_string())),
            Node::Int(i) => out.push((key.into(), i.to_string())),
            Node::BigInt(s) | Node::Str(s) => out.push((key.into(), csv_escape(s))),
            Node::Num(x) => out.push((key.into(), num(*x))),
            Node::Arr(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    x.csv_rows(&format!("{key}[{i}]"), out);
                }
            }
            Node::Obj(fields) => {
                for (k, v) in fields {
                    let name = if key.is_empty() {
                        k.clone()
                    } else {
                        format!("{key}.{k}")
                    };
                    v.csv_rows(&name, out);
                }
            }
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Node::Null => s.serialize_unit(),
            Node::Bool(b) => s.serialize_bool(*b),
            Node::Int(i) => s.serialize_u64(*i),
            Node::BigInt(v) | Node::Str(v) => s.serialize_str(v),
            Node::Num(x) if x.is_finite() => RawValue::from_string(num(*x))
                .map_err(serde::ser::Error::custom)?
                .serialize(s),
            Node::Num(_) => s.serialize_unit(),
            Node::Arr(xs) => {
                let mut seq = s.serialize_seq(Some(xs.len()))?;
                for x in xs {
                    seq.serialize_element(x)?;
                }
                seq.end()
            }
            Node::Obj(fields) => {
                let mut map = s.serialize_map(Some(fields.len()))?;
                for (k, v) in fields {
                    map.serialize_entry(k, v)?;
                }
                map.end()
            }
        }
    }
}

/// JSON (one pretty-printed object) or two-column `field,value` CSV.
pub fn render(node: &Node, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(node).expect("report trees always serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut rows = Vec::new();
            node.csv_rows("", &mut rows);
            let mut s = String::from("field,value\n");
            for (k, v) in rows {
                s.push_str(&format!("{k},{v}\n"));
            }
            s
        }
    }
}
