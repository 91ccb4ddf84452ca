use std::io;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbound_core::averaging::{
    compression_norm, convergence_table, cyclicity_rank, m_n_apply, m_n_coeff_route, m_n_coeff_via, CoeffRoute,
    VertexFunction,
};
use fbound_core::boundary::{BoundaryMeasureContext, StepFunction};
use fbound_core::equidistribution::{equidist_report, rational_to_f64};
use fbound_core::error::Error;
use fbound_core::exact::{format_rational, rational_json, QuadExt};
use fbound_core::representation::{xi_closed, RepContext};
use fbound_core::verify::{run_suite, Mode};
use fbound_core::word::{count_avoiding, count_prefix_suffix, sphere_count, Rank};
use serde_json::json;

mod descriptor;
mod output;

use output::{Format, Output};

#[derive(Parser)]
#[command(name = "fbound", version, about = "Exact harmonic analysis on the boundary of a free group")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Rank r of the free group.
    #[arg(long, global = true, default_value_t = 2)]
    rank: i64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Worker threads for sphere reductions; 0 lets rayon decide.
    #[arg(long, global = true, env = "FBOUND_THREADS", default_value_t = 0)]
    threads: usize,
    /// Largest sphere a command may enumerate or tabulate.
    #[arg(long, global = true, default_value_t = 50_000_000)]
    cap: u64,
}

#[derive(Subcommand)]
enum Command {
    /// |S_n|, |S_n^{u,v}| (with --prefix and --suffix) or |S_n(s,t)| (with --avoid).
    Count {
        #[arg(long)]
        n: String,
        #[arg(long, requires = "suffix", allow_hyphen_values = true)]
        prefix: Option<String>,
        #[arg(long, requires = "prefix", allow_hyphen_values = true)]
        suffix: Option<String>,
        /// Two letters `s,t`: count words not starting with s and not ending with t.
        #[arg(long, conflicts_with = "prefix", allow_hyphen_values = true)]
        avoid: Option<String>,
    },
    /// Visual measure of a cylinder (`B` is the whole boundary).
    Measure {
        #[arg(long, allow_hyphen_values = true)]
        cyl: String,
    },
    /// Harish-Chandra function Xi(n).
    Xi {
        #[arg(long)]
        n: String,
    },
    /// <pi(gamma) 1_B, 1_{B_u}>.
    Coeff {
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, allow_hyphen_values = true)]
        cyl: String,
    },
    /// Checks M_n(1) 1_B = 1_B for n = 1..N.
    FnCheck {
        #[arg(long)]
        n: usize,
    },
    /// <M_n(f) g, h> against its limit.
    MnCoeff {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        h: String,
        #[arg(long)]
        n: String,
        #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
        route: RouteArg,
    },
    /// Norm of the depth-d compression of M_n(1).
    Norm {
        #[arg(long)]
        n: String,
        #[arg(long)]
        depth: usize,
    },
    /// Gram rank of the compressed orbit of 1_B.
    Cyclicity {
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        depth: usize,
    },
    /// Pair sums of f(gamma) g(gamma^-1) over spheres, or over balls with --cumulative.
    Equidist {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        n: String,
        #[arg(long)]
        cumulative: bool,
    },
    /// Runs the verification suite; exits 1 if any check fails.
    VerifyAll {
        /// Reduced sizes at --rank. Without it the suite runs at its fixed parameters.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RouteArg {
    Auto,
    Grouped,
    Enumerated,
}

/// Exit codes.
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_COMPUTE: u8 = 4;

enum Failure {
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DimensionCap { .. } => EXIT_CAP,
        Error::Overflow | Error::DivisionByZero => EXIT_COMPUTE,
        _ => EXIT_PARSE,
    }
}

fn guard(rank: Rank, n: usize, cap: u64) -> Result<(), Error> {
    let size = sphere_count(rank, n);
    if size > cap.into() {
        return Err(Error::DimensionCap {
            dim: u128::try_from(size).unwrap_or(u128::MAX),
            cap: cap.into(),
        });
    }
    Ok(())
}

fn quad_cells(x: &QuadExt) -> [String; 3] {
    [format_rational(x.a()), format_rational(x.b()), format!("{:.12e}", x.to_f64())]
}

fn count(rank: Rank, ns: Vec<usize>, prefix: Option<String>, suffix: Option<String>, avoid: Option<String>) -> Result<Output, Error> {
    let mut rows = Vec::new();
    let mut items = Vec::new();
    let pair = match (&prefix, &suffix) {
        (Some(u), Some(v)) => Some((descriptor::word(u, rank)?, descriptor::word(v, rank)?)),
        _ => None,
    };
    let avoid = match &avoid {
        Some(text) => {
            let usage = || Error::Parse("--avoid takes two letters `s,t`".into());
            let (a, b) = text.split_once(',').ok_or_else(usage)?;
            let (a, b) = (descriptor::word(a, rank)?, descriptor::word(b, rank)?);
            match (a.letters(), b.letters()) {
                ([s], [t]) => Some((*s, *t)),
                _ => return Err(usage()),
            }
        }
        None => None,
    };
    for n in ns {
        let value = match (&pair, &avoid) {
            (Some((u, v)), _) => count_prefix_suffix(rank, n, u, v)?,
            (None, Some((s, t))) => count_avoiding(rank, n, *s, *t)?,
            (None, None) => sphere_count(rank, n),
        };
        rows.push(vec![n.to_string(), value.to_string()]);
        items.push(json!({"n": n, "count": value.to_string()}));
    }
    Ok(Output {
        command: "count",
        json: json!({"rank": rank.get(), "prefix": prefix, "suffix": suffix, "avoid": avoid.map(|(s, t)| vec![s.value(), t.value()]), "counts": items}),
        header: vec!["n", "count"],
        rows,
    })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let g = &cli.global;
    let rank = Rank::new(g.rank)?;
    if g.threads > 0 {
        // a second initialization can only happen in-process; ignore it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(g.threads).build_global();
    }
    let mut code = 0;
    let out = match cli.command {
        Command::Count { n, prefix, suffix, avoid } => count(rank, descriptor::n_range(&n)?, prefix, suffix, avoid)?,
        Command::Measure { cyl } => {
            let c = descriptor::cylinder(&cyl, rank)?;
            let m = BoundaryMeasureContext::new(rank).cylinder_measure(&c);
            Output {
                command: "measure",
                json: json!({"rank": rank.get(), "cylinder": c.to_string(), "measure": rational_json(&m), "float": rational_to_f64(&m)}),
                header: vec!["cylinder", "measure", "float"],
                rows: vec![vec![c.to_string(), format_rational(&m), format!("{:.12e}", rational_to_f64(&m))]],
            }
        }
        Command::Xi { n } => {
            let ns = descriptor::n_range(&n)?;
            let values: Vec<(usize, QuadExt)> = ns.into_iter().map(|n| (n, xi_closed(rank, n))).collect();
            Output {
                command: "xi",
                json: json!({"rank": rank.get(), "values": values.iter().map(|(n, x)| json!({"n": n, "exact": x, "display": x.to_string()})).collect::<Vec<_>>()}),
                header: vec!["n", "exact", "float"],
                rows: values.iter().map(|(n, x)| vec![n.to_string(), x.to_string(), format!("{:.12e}", x.to_f64())]).collect(),
            }
        }
        Command::Coeff { gamma, cyl } => {
            let gw = descriptor::word(&gamma, rank)?;
            let c = descriptor::cylinder(&cyl, rank)?;
            let v = RepContext::new(rank).coeff_cylinder(&gw, &c)?;
            Output {
                command: "coeff",
                json: json!({"rank": rank.get(), "gamma": gw, "cylinder": c.to_string(), "exact": v, "display": v.to_string()}),
                header: vec!["gamma", "cylinder", "exact", "float"],
                rows: vec![vec![gw.pretty(), c.to_string(), v.to_string(), format!("{:.12e}", v.to_f64())]],
            }
        }
        Command::FnCheck { n } => {
            guard(rank, n, g.cap)?;
            let one = StepFunction::one(rank);
            let mut rows = Vec::new();
            let mut items = Vec::new();
            for k in 1..=n {
                let ok = m_n_apply(&VertexFunction::constant(1), k, &one)?.same_function(&one);
                if !ok {
                    code = EXIT_CHECK_FAILED;
                }
                rows.push(vec![k.to_string(), if ok { "pass" } else { "fail" }.to_string()]);
                items.push(json!({"n": k, "status": if ok { "pass" } else { "fail" }}));
            }
            Output {
                command: "fn-check",
                json: json!({"rank": rank.get(), "checks": items}),
                header: vec!["n", "status"],
                rows,
            }
        }
        Command::MnCoeff { f, g: gd, h, n, route } => {
            let f = descriptor::vertex_function(&f, rank)?;
            let gs = descriptor::step_function(&gd, rank)?;
            let hs = descriptor::step_function(&h, rank)?;
            let ns = descriptor::n_range(&n)?;
            let table = match route {
                RouteArg::Auto => {
                    for &n in &ns {
                        if m_n_coeff_route(&f, n, &gs, &hs)? == CoeffRoute::Enumerated {
                            guard(rank, n, g.cap)?;
                        }
                    }
                    convergence_table(&f, &gs, &hs, ns)?
                }
                RouteArg::Grouped | RouteArg::Enumerated => {
                    let r = if route == RouteArg::Grouped { CoeffRoute::Grouped } else { CoeffRoute::Enumerated };
                    if r == CoeffRoute::Enumerated {
                        guard(rank, *ns.iter().max().expect("nonempty"), g.cap)?;
                    }
                    // route-pinned runs check each value against the default route
                    for &n in &ns {
                        let a = m_n_coeff_via(&f, n, &gs, &hs, r)?;
                        let b = fbound_core::averaging::m_n_coeff(&f, n, &gs, &hs)?;
                        if a != b {
                            code = EXIT_CHECK_FAILED;
                        }
                    }
                    convergence_table(&f, &gs, &hs, ns)?
                }
            };
            let rows = table
                .entries
                .iter()
                .map(|e| {
                    let [a, b, fl] = quad_cells(&e.exact);
                    vec![e.n.to_string(), a, b, fl, format!("{:.12e}", e.deviation)]
                })
                .collect();
            Output {
                command: "mn-coeff",
                json: json!({"rank": rank.get(), "radicand": rank.q(), "table": table}),
                header: vec!["n", "exact_a", "exact_b", "float", "deviation"],
                rows,
            }
        }
        Command::Norm { n, depth } => {
            let mut rows = Vec::new();
            let mut items = Vec::new();
            for n in descriptor::n_range(&n)? {
                guard(rank, n + depth, g.cap)?;
                let c = compression_norm(rank, n, depth, fbound_core::averaging::DEFAULT_DIMENSION_CAP)?;
                if !(c.within_upper && c.within_lower && c.symmetric) {
                    code = EXIT_CHECK_FAILED;
                }
                rows.push(vec![
                    n.to_string(),
                    depth.to_string(),
                    c.dimension.to_string(),
                    format!("{:.15}", c.norm),
                    c.within_upper.to_string(),
                    c.within_lower.to_string(),
                ]);
                items.push(serde_json::to_value(&c).expect("plain data"));
            }
            Output {
                command: "norm",
                json: json!({"norms": items}),
                header: vec!["n", "depth", "dimension", "norm", "within_upper", "within_lower"],
                rows,
            }
        }
        Command::Cyclicity { nmax, depth } => {
            let c = cyclicity_rank(rank, nmax, depth, fbound_core::averaging::DEFAULT_DIMENSION_CAP)?;
            Output {
                command: "cyclicity",
                json: serde_json::to_value(&c).expect("plain data"),
                header: vec!["n_max", "depth", "vectors", "dimension", "gram_rank", "full"],
                rows: vec![vec![
                    nmax.to_string(),
                    depth.to_string(),
                    c.vectors.to_string(),
                    c.dimension.to_string(),
                    c.gram_rank.to_string(),
                    c.full.to_string(),
                ]],
            }
        }
        Command::Equidist { f, g: gd, n, cumulative } => {
            let f = descriptor::vertex_function(&f, rank)?;
            let gf = descriptor::vertex_function(&gd, rank)?;
            let rep = equidist_report(rank, &f, &gf, descriptor::n_range(&n)?, cumulative)?;
            let rows = rep
                .entries
                .iter()
                .map(|e| {
                    vec![
                        e.n.to_string(),
                        e.value.numer().to_string(),
                        e.value.denom().to_string(),
                        format!("{:.12e}", e.float),
                        format!("{:.12e}", e.deviation),
                        e.class.to_string(),
                    ]
                })
                .collect();
            Output {
                command: "equidist",
                json: serde_json::to_value(&rep).expect("plain data"),
                header: vec!["n", "value_num", "value_den", "float", "deviation", "class"],
                rows,
            }
        }
        Command::VerifyAll { quick } => {
            let mode = if quick { Mode::Quick(rank) } else { Mode::Full };
            let reports = run_suite(mode);
            if reports.iter().any(|r| !r.status.passed()) {
                code = EXIT_CHECK_FAILED;
            }
            let rows = reports
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    vec![
                        (i + 1).to_string(),
                        if r.status.passed() { "PASS" } else { "FAIL" }.to_string(),
                        r.claim.clone(),
                        r.exact.clone(),
                        r.float.map(|x| format!("{x:.6e}")).unwrap_or_default(),
                        r.tolerance.map(|x| format!("{x:e}")).unwrap_or_default(),
                    ]
                })
                .collect();
            Output {
                command: "verify-all",
                json: serde_json::to_value(&reports).expect("plain data"),
                header: vec!["id", "status", "claim", "exact", "float", "tolerance"],
                rows,
            }
        }
    };
    out.write(g.format, &mut io::stdout().lock())?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_COMPUTE)
        }
    }
}
