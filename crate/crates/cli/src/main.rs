mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use slicekit::body::{hausdorff, SymBody};
use slicekit::demo::{discontinuity_table, transporter, DemoPoint, DemoSlice, SetDescriptor};
use slicekit::ellipsoid::{john, lowner, DEFAULT_EPS};
use slicekit::error::GeomError;
use slicekit::group::GroupElem;
use slicekit::orbit::{
    bm_distance, distance_matrix, quotient_distance, slice_net, NetOptions, OrbitSearchOptions,
};
use slicekit::random::{random_body, random_corpus, rng_from_seed};
use slicekit::slice::{
    check_slice_axioms, john_position, slicing_map_john, AuditOptions, JohnSlice, LownerSlice,
};

use output::{csv_matrix, emit, fmt_num, json_text};
use svg::Plot;

#[derive(Parser, Debug)]
#[command(
    name = "slicekit",
    version,
    about = "Symmetric convex bodies modulo GL(n)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// MVEE solver tolerance, in (0, 1e-2].
    #[arg(long, global = true, default_value_t = DEFAULT_EPS)]
    eps: f64,

    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Sample count (bodies for gen/net/slice-audit, k_max for demo-remark).
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Worker threads; 1 runs fully serial.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Dimension of generated bodies.
    #[arg(long, global = true, default_value_t = 2)]
    dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SliceKind {
    John,
    Lowner,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// John ellipsoid (maximal inscribed).
    John { body: PathBuf },
    /// Löwner ellipsoid (minimal circumscribed).
    Lowner { body: PathBuf },
    /// Representative of the orbit whose John ellipsoid is the unit ball.
    JohnPosition { body: PathBuf },
    /// PD coset representative P with P^{-1} A in John position.
    SliceMap { body: PathBuf },
    /// Hausdorff distance; a matrix for more than two bodies.
    Hausdorff {
        #[arg(required = true)]
        bodies: Vec<PathBuf>,
    },
    /// Banach–Mazur distance estimate.
    BmDist {
        #[arg(required = true)]
        bodies: Vec<PathBuf>,
    },
    /// Distance between orbits through their John positions.
    QuotientDist {
        #[arg(required = true)]
        bodies: Vec<PathBuf>,
    },
    /// Sampled audit of the slice axioms on random bodies.
    SliceAudit {
        #[arg(long, value_enum, default_value_t = SliceKind::John)]
        slice: SliceKind,
    },
    /// Discontinuity table and transporter envelopes of the planar toy action.
    DemoRemark,
    /// Greedy epsilon-net in the orbit space.
    Net {
        /// Bodies to cover; random bodies are generated when omitted.
        bodies: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.25)]
        radius: f64,
    },
    /// Seeded random symmetric polytopes.
    Gen,
}

enum Failure {
    Input(String),
    Solver(GeomError),
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::NoConvergence(_)
            | GeomError::SingularMatrix { .. }
            | GeomError::NotPositiveDefinite(_)
            | GeomError::NotEquivariantOnSlice { .. } => Failure::Solver(e),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

/// Reads one body, or a JSON array of bodies as written by `gen`.
fn read_bodies(path: &Path) -> Outcome<Vec<SymBody>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let parsed = if text.trim_start().starts_with('[') {
        serde_json::from_str::<Vec<SymBody>>(&text)
    } else {
        serde_json::from_str::<SymBody>(&text).map(|b| vec![b])
    };
    parsed.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_body(path: &Path) -> Outcome<SymBody> {
    let mut bodies = read_bodies(path)?;
    if bodies.len() != 1 {
        return Err(Failure::Input(format!(
            "{}: expected one body, found {}",
            path.display(),
            bodies.len()
        )));
    }
    Ok(bodies.remove(0))
}

fn read_all(paths: &[PathBuf]) -> Outcome<Vec<SymBody>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(read_bodies(p)?);
    }
    Ok(out)
}

fn planar(a: &SymBody) -> Outcome<()> {
    if a.dim() != 2 {
        return Err(Failure::Input(format!(
            "svg output needs n = 2, got n = {}",
            a.dim()
        )));
    }
    Ok(())
}

fn unsupported(cli: &Cli, what: &str) -> Failure {
    Failure::Input(format!("{what} does not support --format {:?}", cli.format).to_lowercase())
}

fn matrix_csv(m: &Value) -> String {
    let rows: Vec<Vec<f64>> = serde_json::from_value(m.clone()).expect("matrix rows");
    csv_matrix(&rows)
}

fn ellipsoid_command(cli: &Cli, path: &Path, inscribed: bool) -> Outcome<String> {
    let a = read_body(path)?;
    let e = if inscribed {
        john(&a, cli.eps)?
    } else {
        lowner(&a, cli.eps)?
    };
    let v = serde_json::to_value(&e).expect("ellipsoid serializes");
    Ok(match cli.format {
        Format::Json => json_text(v),
        Format::Csv => matrix_csv(&v["M"]),
        Format::Svg => {
            planar(&a)?;
            Plot::new().body(&a).ellipse(&e).render()
        }
    })
}

fn distances(cli: &Cli, paths: &[PathBuf], kind: &str) -> Outcome<String> {
    let bodies = read_all(paths)?;
    if bodies.len() < 2 {
        return Err(Failure::Input(format!(
            "{kind} needs at least two bodies, got {}",
            bodies.len()
        )));
    }
    let opts = OrbitSearchOptions {
        eps: cli.eps,
        seed: cli.seed,
        ..OrbitSearchOptions::default()
    };
    let mut matrix = match kind {
        "hausdorff" => distance_matrix(&bodies, |a, b| hausdorff(a, b, 4096))?,
        "bm" => distance_matrix(&bodies, |a, b| bm_distance(a, b, &opts))?,
        _ => distance_matrix(&bodies, |a, b| quotient_distance(a, b, &opts))?,
    };
    if kind == "bm" {
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = 1.0;
        }
    }
    Ok(match cli.format {
        Format::Json if bodies.len() == 2 => json_text(json!({ "distance": matrix[0][1] })),
        Format::Json => json_text(json!({ "matrix": matrix })),
        Format::Csv if bodies.len() == 2 => format!("distance\n{}\n", fmt_num(matrix[0][1])),
        Format::Csv => csv_matrix(&matrix),
        Format::Svg => return Err(unsupported(cli, "distance output")),
    })
}

fn slice_audit(cli: &Cli, kind: SliceKind) -> Outcome<String> {
    let count = cli.samples.unwrap_or(100);
    let mut rng = rng_from_seed(cli.seed);
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let a = random_body(&mut rng, cli.dim);
        samples.push(match kind {
            SliceKind::John => john_position(&a, cli.eps)?,
            SliceKind::Lowner => slicekit::slice::lowner_position(&a, cli.eps)?,
        });
    }
    let group: Vec<GroupElem> = (0..count.div_ceil(2))
        .map(|i| {
            if i % 2 == 0 {
                GroupElem::random_orthogonal(&mut rng, cli.dim)
            } else {
                GroupElem::random_gl(&mut rng, cli.dim, 3.0)
            }
        })
        .collect();
    let opts = AuditOptions {
        seed: cli.seed,
        ..AuditOptions::default()
    };
    let report = match kind {
        SliceKind::John => check_slice_axioms(
            &JohnSlice {
                eps: cli.eps,
                ..JohnSlice::default()
            },
            &samples,
            &group,
            &opts,
        ),
        SliceKind::Lowner => check_slice_axioms(
            &LownerSlice {
                eps: cli.eps,
                ..LownerSlice::default()
            },
            &samples,
            &group,
            &opts,
        ),
    };
    match cli.format {
        Format::Json => Ok(json_text(
            serde_json::to_value(&report).expect("report serializes"),
        )),
        Format::Csv => {
            let mut s = String::from("axiom,checks,failures\n");
            for (name, t) in [
                ("invariance", &report.invariance),
                ("closedness", &report.closedness),
                ("disjointness", &report.disjointness),
                ("saturation", &report.saturation),
            ] {
                s.push_str(&format!("{name},{},{}\n", t.checks, t.failures));
            }
            Ok(s)
        }
        Format::Svg => Err(unsupported(cli, "slice-audit")),
    }
}

fn demo_remark(cli: &Cli) -> Outcome<String> {
    let k_max = cli.samples.unwrap_or(100) as u64;
    let table = discontinuity_table(k_max);
    let near = SetDescriptor::ball(DemoPoint::new(0.0, 1.0).expect("nonzero point"), 0.1);
    let hyperbola = SetDescriptor::Slice {
        slice: DemoSlice::Hyperbola,
    };
    let circle = SetDescriptor::Slice {
        slice: DemoSlice::Circle,
    };
    let annulus = SetDescriptor::Annulus {
        r_min: 0.5,
        r_max: 2.0,
    };
    let cases = [
        ("hyperbola", "ball(0,1;0.1)", &hyperbola, &near),
        ("ball(0,1;0.1)", "hyperbola", &near, &hyperbola),
        ("circle", "ball(0,1;0.1)", &circle, &near),
        ("circle", "annulus(0.5,2)", &circle, &annulus),
    ];
    let envelopes: Vec<_> = cases
        .iter()
        .map(|(un, vn, u, v)| (*un, *vn, transporter(u, v, 512)))
        .collect();
    match cli.format {
        Format::Csv => {
            let mut s = String::from("k,f_s\n");
            for (k, f) in &table {
                s.push_str(&format!("{k},{}\n", fmt_num(*f)));
            }
            s.push_str("\nu,v,lambda_min,lambda_max,unbounded_below,unbounded_above,empty,exact\n");
            for (un, vn, e) in &envelopes {
                s.push_str(&format!(
                    "{un},{vn},{},{},{},{},{},{}\n",
                    fmt_num(e.lambda_min),
                    fmt_num(e.lambda_max),
                    e.unbounded_below,
                    e.unbounded_above,
                    e.empty,
                    e.exact
                ));
            }
            Ok(s)
        }
        Format::Json => Ok(json_text(json!({
            "table": table.iter().map(|(k, f)| json!({"k": k, "f_s": f})).collect::<Vec<_>>(),
            "envelopes": envelopes
                .iter()
                .map(|(un, vn, e)| json!({"u": un, "v": vn, "envelope": e}))
                .collect::<Vec<_>>(),
        }))),
        Format::Svg => Err(unsupported(cli, "demo-remark")),
    }
}

fn net(cli: &Cli, paths: &[PathBuf], radius: f64) -> Outcome<String> {
    let samples = if paths.is_empty() {
        random_corpus(cli.seed, cli.dim, cli.samples.unwrap_or(50))
    } else {
        read_all(paths)?
    };
    let mut opts = NetOptions::default();
    opts.search.eps = cli.eps;
    opts.search.seed = cli.seed;
    let report = slice_net(&samples, radius, &opts)?;
    match cli.format {
        Format::Json => Ok(json_text(json!({
            "eps": report.eps,
            "centers": report.centers,
            "center_indices": report.center_indices,
            "coverage_fraction": report.coverage_fraction,
        }))),
        Format::Csv => {
            let mut s = String::from("center,sample\n");
            for (i, c) in report.center_indices.iter().enumerate() {
                s.push_str(&format!("{i},{c}\n"));
            }
            Ok(s)
        }
        Format::Svg => {
            let mut plot = Plot::new();
            for c in &report.centers {
                planar(&c.rep)?;
                plot = plot.body(&c.rep);
            }
            Ok(plot.render())
        }
    }
}

fn gen(cli: &Cli) -> Outcome<String> {
    let bodies = random_corpus(cli.seed, cli.dim, cli.samples.unwrap_or(10));
    match cli.format {
        Format::Json => Ok(json_text(
            serde_json::to_value(&bodies).expect("bodies serialize"),
        )),
        Format::Csv => {
            let mut s = String::from("body,");
            let cols: Vec<String> = (0..cli.dim).map(|i| format!("x{i}")).collect();
            s.push_str(&cols.join(","));
            s.push('\n');
            for (i, b) in bodies.iter().enumerate() {
                for g in b.gens() {
                    let cells: Vec<String> = g.iter().map(|&x| fmt_num(x)).collect();
                    s.push_str(&format!("{i},{}\n", cells.join(",")));
                }
            }
            Ok(s)
        }
        Format::Svg => {
            let mut plot = Plot::new();
            for b in &bodies {
                planar(b)?;
                plot = plot.body(b);
            }
            Ok(plot.render())
        }
    }
}

fn run(cli: &Cli) -> Outcome<String> {
    if !(cli.eps > 0.0 && cli.eps <= 1e-2) {
        return Err(Failure::Input(format!(
            "--eps must lie in (0, 1e-2], got {}",
            cli.eps
        )));
    }
    if cli.dim < 1 {
        return Err(Failure::Input("--dim must be positive".into()));
    }
    match &cli.command {
        Command::John { body } => ellipsoid_command(cli, body, true),
        Command::Lowner { body } => ellipsoid_command(cli, body, false),
        Command::JohnPosition { body } => {
            let a = read_body(body)?;
            let p = john_position(&a, cli.eps)?;
            match cli.format {
                Format::Json => Ok(json_text(
                    serde_json::to_value(&p).expect("body serializes"),
                )),
                Format::Csv => Ok(csv_matrix(
                    &p.gens()
                        .iter()
                        .map(|g| g.iter().copied().collect())
                        .collect::<Vec<_>>(),
                )),
                Format::Svg => {
                    planar(&p)?;
                    let unit = slicekit::ellipsoid::Ellipsoid::unit_ball(2);
                    Ok(Plot::new().body(&p).ellipse(&unit).render())
                }
            }
        }
        Command::SliceMap { body } => {
            let a = read_body(body)?;
            let p = slicing_map_john(&a, cli.eps)?;
            let v = serde_json::to_value(&p).expect("pd serializes");
            match cli.format {
                Format::Json => Ok(json_text(v)),
                Format::Csv => Ok(matrix_csv(&v["P"])),
                Format::Svg => Err(unsupported(cli, "slice-map")),
            }
        }
        Command::Hausdorff { bodies } => distances(cli, bodies, "hausdorff"),
        Command::BmDist { bodies } => distances(cli, bodies, "bm"),
        Command::QuotientDist { bodies } => distances(cli, bodies, "quotient"),
        Command::SliceAudit { slice } => slice_audit(cli, *slice),
        Command::DemoRemark => demo_remark(cli),
        Command::Net { bodies, radius } => net(cli, bodies, *radius),
        Command::Gen => gen(cli),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = run(&cli).and_then(|text| Ok(emit(&text, cli.out.as_deref())?));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver failure: {e}");
            if let GeomError::NoConvergence(report) = &e {
                let dump = serde_json::to_value(report.as_ref()).expect("report serializes");
                eprint!("{}", json_text(dump));
            }
            ExitCode::from(2)
        }
    }
}
