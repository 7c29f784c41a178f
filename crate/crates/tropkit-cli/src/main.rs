use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tropkit::assign::{distances_potentials, normal_form, optimal_assignment, strong_regularity, AssignMatrix};
use tropkit::determ::{bideterminant, is_pattern_singular, is_trop_singular, permanent, rook_coefficients};
use tropkit::dynamics::{
    exclusion_run, fundamental_diagram, t1h_simulate, tent_trajectory, traffic_light, Network, RingWord,
};
use tropkit::io::{
    ext_to_json, interval_matrix_from_value, interval_to_json, matrix_from_csv, matrix_from_value, rat_to_json,
    vector_from_value,
};
use tropkit::plucker::{
    flow_tp, flow_values, is_dmtp, is_submodular, is_tp, reconstruct_from_intervals, GridFlowNet, IntervalData,
    SubsetFunction,
};
use tropkit::projector::{cyclic_spectral_radius, project, separate, Semimodule};
use tropkit::semiring::{format_rat, parse_rat};
use tropkit::spectral::{collatz_wielandt, spectral};
use tropkit::tropmat::{iv_eigenvalue, iv_kleene_star, kleene_star};
use tropkit::twosided::{solve_system, InequalitySystem};
use tropkit::{Rat, SemiringTag, TropError, TropMatrix, TropVector};

#[derive(Parser)]
#[command(name = "tropkit", version, about = "Exact max-plus algebra and min-plus traffic dynamics")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Semiring used when a matrix is read from CSV.
    #[arg(long, global = true, default_value = "max-plus")]
    semiring: String,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Kleene star A* = I ⊕ A ⊕ A² ⊕ ...
    Star(MatrixArg),
    /// Eigenvalue, critical graph and eigenvectors.
    Eig(MatrixArg),
    /// Projection onto a semimodule, or the cyclic projector radius of several.
    Project {
        /// Generator matrix (columns); repeat for a cyclic family.
        #[arg(long = "modules", required = true)]
        modules: Vec<PathBuf>,
        /// Vector to project through the cycle.
        #[arg(long)]
        vector: Option<PathBuf>,
    },
    /// Separating halfspaces for a family of semimodules.
    Separate {
        #[arg(long = "modules", required = true)]
        modules: Vec<PathBuf>,
    },
    /// Generators of {x : A ⊗ x <= B ⊗ x}.
    Twosided {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "B")]
        b: PathBuf,
    },
    /// Bideterminant, permanent, rook coefficients and singularity.
    Invariants(MatrixArg),
    #[command(subcommand)]
    Plucker(PluckerCmd),
    /// Strong regularity certificate, normal form, distances and potentials.
    Assign(MatrixArg),
    #[command(subcommand)]
    Traffic(TrafficCmd),
    /// Interval matrix star and eigenvalue.
    Interval {
        /// `{"lo": matrix, "hi": matrix}`.
        #[arg(long)]
        matrix: PathBuf,
    },
}

#[derive(Args)]
struct MatrixArg {
    #[arg(long)]
    matrix: PathBuf,
}

#[derive(Subcommand)]
enum PluckerCmd {
    /// TP, DMTP and submodularity of a subset function.
    Check {
        #[arg(long)]
        function: PathBuf,
    },
    /// Subset function of maximal flows in a grid network.
    Build {
        #[arg(long)]
        grid: PathBuf,
        /// Build the TP-function of the full grid instead of the raw flow values.
        #[arg(long)]
        tp: bool,
    },
    /// TP-function determined by its values on intervals.
    Reconstruct {
        #[arg(long)]
        intervals: PathBuf,
    },
}

#[derive(Subcommand)]
enum TrafficCmd {
    /// Flow against density for a ring or a crossing.
    Diagram {
        /// Network JSON, e.g. `{"network":"ring","cells":20}`.
        #[arg(long)]
        config: PathBuf,
        /// `lo:hi:step`, rationals, inclusive.
        #[arg(long)]
        densities: String,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Orbit histogram of the tent map obtained from the reduced system.
    Tent {
        #[arg(long, default_value = "1/3")]
        y0: String,
        #[arg(long, default_value_t = 10000)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        bins: usize,
    },
    /// Exclusion process on a ring, one word per step.
    Exclusion {
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Two roads controlled by a four-phase traffic light.
    Light {
        #[arg(long)]
        road1: String,
        #[arg(long)]
        road2: String,
        /// Phase durations `g1,a1,g2,a2`.
        #[arg(long, default_value = "1,1,1,1")]
        durations: String,
        #[arg(long, default_value_t = 4000)]
        steps: usize,
    },
}

enum Failure {
    /// Unreadable input, bad schema or bad arguments.
    Input(String),
    Domain(TropError),
}

impl From<TropError> for Failure {
    fn from(e: TropError) -> Self {
        match e {
            TropError::Parse(m) => Failure::Input(m),
            e => Failure::Domain(e),
        }
    }
}

type Res<T> = Result<T, Failure>;

enum Output {
    Json(Value),
    Text(String),
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Res<Value> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_matrix(path: &Path, tag: SemiringTag) -> Res<TropMatrix> {
    if path.extension().is_some_and(|e| e == "csv") {
        return Ok(matrix_from_csv(tag, &read(path)?)?);
    }
    Ok(matrix_from_value(&read_json(path)?)?)
}

fn matrix_json(m: &TropMatrix) -> Value {
    serde_json::to_value(m).expect("matrices serialize")
}

fn vector_json(v: &TropVector) -> Value {
    json!({"semiring": v.tag().name(), "data": v})
}

fn bits(s: &str) -> Res<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Failure::Input(format!("road {s:?} must be a word over 0 and 1"))),
        })
        .collect()
}

fn densities(spec: &str) -> Res<Vec<Rat>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(Failure::Input(format!("densities {spec:?} must be lo:hi:step")));
    };
    let (lo, hi, step) = (parse_rat(lo)?, parse_rat(hi)?, parse_rat(step)?);
    if step <= Rat::from_integer(0.into()) {
        return Err(Failure::Input("density step must be positive".into()));
    }
    let mut out = Vec::new();
    let mut x = lo;
    while x <= hi {
        out.push(x.clone());
        x += &step;
    }
    Ok(out)
}

fn modules(paths: &[PathBuf], tag: SemiringTag) -> Res<Vec<Semimodule>> {
    paths.iter().map(|p| Ok(Semimodule::new(read_matrix(p, tag)?)?)).collect()
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn run(cli: &Cli) -> Res<Output> {
    let tag = SemiringTag::parse(&cli.semiring)?;
    let csv = cli.format == Format::Csv;
    let json_only = |name: &str| -> Res<()> {
        if csv {
            return Err(Failure::Input(format!("{name} has no CSV output")));
        }
        Ok(())
    };
    Ok(match &cli.cmd {
        Command::Star(m) => {
            let s = kleene_star(&read_matrix(&m.matrix, tag)?)?;
            if csv {
                Output::Text(tropkit::io::matrix_to_csv(&s))
            } else {
                Output::Json(matrix_json(&s))
            }
        }
        Command::Eig(m) => {
            json_only("eig")?;
            let a = read_matrix(&m.matrix, tag)?;
            let mut v = serde_json::to_value(spectral(&a)?).expect("serializable");
            // only defined when every row has a finite entry
            v["collatz_wielandt"] = match collatz_wielandt(&a) {
                Ok(cw) => serde_json::to_value(cw).expect("serializable"),
                Err(_) => Value::Null,
            };
            Output::Json(v)
        }
        Command::Project { modules: paths, vector } => {
            json_only("project")?;
            let vs = modules(paths, tag)?;
            let mut v = json!({"radius": cyclic_spectral_radius(&vs)?});
            if let Some(p) = vector {
                let mut x = vector_from_value(&read_json(p)?, vs[0].tag())?;
                for m in &vs {
                    x = project(m, &x)?;
                }
                v["image"] = vector_json(&x);
            }
            Output::Json(v)
        }
        Command::Separate { modules: paths } => {
            json_only("separate")?;
            let hs = separate(&modules(paths, tag)?)?;
            let list: Vec<Value> = hs.iter().map(|h| json!({"u": vector_json(&h.u), "v": vector_json(&h.v)})).collect();
            Output::Json(json!({"halfspaces": list}))
        }
        Command::Twosided { a, b } => {
            json_only("twosided")?;
            let s = InequalitySystem::new(read_matrix(a, tag)?, read_matrix(b, tag)?)?;
            Output::Json(serde_json::to_value(solve_system(&s)?).expect("serializable"))
        }
        Command::Invariants(m) => {
            json_only("invariants")?;
            let a = read_matrix(&m.matrix, tag)?;
            let singular = match is_trop_singular(&a) {
                Ok(s) => json!(s),
                Err(TropError::TooLarge(_)) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            Output::Json(json!({
                "bideterminant": bideterminant(&a)?,
                "permanent": permanent(&a)?,
                "rook_coefficients": rook_coefficients(&a)?,
                "tropically_singular": singular,
                "pattern_singular": is_pattern_singular(&a),
            }))
        }
        Command::Plucker(p) => {
            json_only("plucker")?;
            Output::Json(match p {
                PluckerCmd::Check { function } => {
                    let f = SubsetFunction::from_json(&read_json(function)?)?;
                    json!({
                        "tp": is_tp(&f),
                        "dmtp": is_dmtp(&f),
                        "submodular": is_submodular(&f, false),
                        "submodular_on_intervals": is_submodular(&f, true),
                    })
                }
                PluckerCmd::Build { grid, tp } => {
                    let net = GridFlowNet::from_json(&read_json(grid)?)?;
                    if *tp { flow_tp(&net)? } else { flow_values(&net)? }.to_json()
                }
                PluckerCmd::Reconstruct { intervals } => {
                    reconstruct_from_intervals(&IntervalData::from_json(&read_json(intervals)?)?)?.to_json()
                }
            })
        }
        Command::Assign(m) => {
            json_only("assign")?;
            let b = AssignMatrix::new(read_matrix(&m.matrix, tag)?)?;
            let cert = strong_regularity(&b)?;
            let c = normal_form(&b, &cert)?;
            let (perm, value) = optimal_assignment(&b);
            let pot = distances_potentials(&b, &perm)?;
            Output::Json(json!({
                "value": ext_to_json(SemiringTag::MaxPlus, &value),
                "certificate": cert,
                "normal_form": matrix_json(c.matrix()),
                "distances": matrix_json(&pot.distances),
                "phi": pot.phi.iter().map(rat_to_json).collect::<Vec<_>>(),
                "phi_tilde": pot.phi_tilde.iter().map(rat_to_json).collect::<Vec<_>>(),
            }))
        }
        Command::Traffic(t) => traffic(t, csv)?,
        Command::Interval { matrix } => {
            json_only("interval")?;
            let iv = interval_matrix_from_value(&read_json(matrix)?)?;
            let star = match iv_kleene_star(&iv) {
                Ok(s) => json!({"lo": matrix_json(s.lo()), "hi": matrix_json(s.hi())}),
                Err(TropError::Divergent(_)) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            let eig = match iv_eigenvalue(&iv) {
                Ok(l) => interval_to_json(&l),
                Err(TropError::NoCycle) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            Output::Json(json!({"star": star, "eigenvalue": eig}))
        }
    })
}

fn traffic(t: &TrafficCmd, csv: bool) -> Res<Output> {
    Ok(match t {
        TrafficCmd::Diagram { config, densities: spec, steps } => {
            let net: Network = serde_json::from_value(read_json(config)?)
                .map_err(|e| Failure::Input(format!("{}: {e}", config.display())))?;
            let pts = fundamental_diagram(&net, &densities(spec)?, *steps)?;
            if csv {
                let rows = pts
                    .iter()
                    .map(|p| vec![format_rat(&p.target), p.cars.to_string(), format_rat(&p.density), format_rat(&p.flow)])
                    .collect();
                Output::Text(csv_text(&["target", "cars", "density", "flow"], rows))
            } else {
                Output::Json(json!({"network": net, "steps": steps, "points": pts}))
            }
        }
        TrafficCmd::Tent { y0, steps, bins } => {
            let run = tent_trajectory(&parse_rat(y0)?, *steps, *bins)?;
            if csv {
                let rows = run
                    .histogram
                    .iter()
                    .enumerate()
                    .map(|(i, c)| vec![i.to_string(), format_rat(&Rat::new(i.into(), (*bins).into())), c.to_string()])
                    .collect();
                Output::Text(csv_text(&["bin", "lo", "count"], rows))
            } else {
                Output::Json(json!({"y0": rat_to_json(&run.orbit[0]), "steps": steps, "histogram": run.histogram}))
            }
        }
        TrafficCmd::Exclusion { word, steps } => {
            let run = exclusion_run(&RingWord::parse(word)?, *steps);
            if csv {
                let mut rows = vec![vec!["0".into(), run.words[0].to_string(), String::new()]];
                for (k, (w, q)) in run.words.iter().skip(1).zip(&run.flows).enumerate() {
                    rows.push(vec![(k + 1).to_string(), w.to_string(), format_rat(q)]);
                }
                Output::Text(csv_text(&["step", "word", "flow"], rows))
            } else {
                let words: Vec<String> = run.words.iter().map(|w| w.to_string()).collect();
                let flows: Vec<Value> = run.flows.iter().map(rat_to_json).collect();
                Output::Json(json!({"words": words, "flows": flows}))
            }
        }
        TrafficCmd::Light { road1, road2, durations, steps } => {
            if csv {
                return Err(Failure::Input("light has no CSV output".into()));
            }
            let d: Vec<usize> = durations
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| Failure::Input(format!("bad duration {s:?}"))))
                .collect::<Res<_>>()?;
            let d: [usize; 4] =
                d.try_into().map_err(|_| Failure::Input("durations must have four entries".into()))?;
            let tl = traffic_light(&bits(road1)?, &bits(road2)?, d)?;
            let run = t1h_simulate(&tl.system, *steps)?;
            let phases: Vec<Value> =
                tl.phases(&run).iter().take(tl.cycle).map(|(a, b)| json!([rat_to_json(a), rat_to_json(b)])).collect();
            let predicted = match &run.periodicity {
                Some(p) => {
                    let lambda = tl.cycle_eigenvalue(&run, p.start)?;
                    rat_to_json(&(lambda / Rat::from_integer((tl.cycle as i64).into())))
                }
                None => Value::Null,
            };
            Output::Json(json!({
                "phases": phases,
                "periodicity": run.periodicity,
                "flow": rat_to_json(&run.rate(&tl.road1)),
                "predicted_flow": predicted,
            }))
        }
    })
}

fn error_body(e: &Failure) -> Value {
    match e {
        Failure::Input(m) => json!({"error": {"kind": "Input", "message": m}}),
        Failure::Domain(e) => {
            let mut body = json!({"kind": e.kind(), "message": e.to_string()});
            match e {
                TropError::NotSeparable { witness } => body["witness"] = vector_json(witness),
                TropError::NotStronglyRegular { second, .. } => body["second"] = json!(second),
                TropError::ImprovingCycle(c) => body["cycle"] = json!(c),
                TropError::NoFlow { subset } => body["subset"] = json!(subset),
                _ => {}
            }
            json!({"error": body})
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TROPKIT_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("TROPKIT_THREADS={v:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().map_err(Failure::Input).and_then(|_| run(&cli));
    match result {
        Ok(out) => {
            let text = match out {
                Output::Json(v) => serde_json::to_string_pretty(&v).expect("json") + "\n",
                Output::Text(t) => t,
            };
            if let Err(e) = emit(&cli.out, &text) {
                let body = error_body(&Failure::Input(e.to_string()));
                eprintln!("{}", serde_json::to_string_pretty(&body).expect("json"));
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string_pretty(&error_body(&e)).expect("json"));
            ExitCode::from(match e {
                Failure::Input(_) => 2,
                Failure::Domain(_) => 1,
            })
        }
    }
}
