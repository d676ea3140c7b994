use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use bitmodel::expr::eval_expr;
use bitmodel::fractal::EscapeParams;
use bitmodel::render::{render, RenderJob, SetSpec, GRAPH_MACHINES};
use bitmodel::selfcheck::{self, Level, Options};
use bitmodel::{Dyadic, Point};

#[derive(Parser)]
#[command(name = "bitmodel", version, about = "Bit-model real computation and certified set rendering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an expression to within 2^-n
    Eval {
        expr: String,
        n: u32,
    },
    /// Render a set to <out>.pgm, <out>.csv and <out>.stats
    Render(RenderArgs),
    /// Run the cross-module consistency checks
    Selfcheck {
        #[arg(long)]
        full: bool,
        /// Deliberately break one check's threshold (test hook)
        #[arg(long, hide = true, value_name = "CHECK")]
        break_threshold: Option<String>,
    },
}

#[derive(clap::Args)]
struct RenderArgs {
    /// koch, mandelbrot, julia, disk, circle, segment, step or graph:<machine>
    set: String,
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true, default_values = ["0", "0"])]
    center: Vec<String>,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 0)]
    k: u32,
    #[arg(long, allow_hyphen_values = true)]
    half_width: String,
    /// Iteration cap (Mandelbrot default 64n)
    #[arg(long = "T-max")]
    t_max: Option<u32>,
    /// Julia budget T(n) = A n + B
    #[arg(long = "A", default_value_t = 8)]
    a: u32,
    #[arg(long = "B", default_value_t = 32)]
    b: u32,
    #[arg(long, default_value_t = 256)]
    max_subdivisions: u32,
    #[arg(long, default_value_t = 20)]
    extra_precision: u32,
    /// Render the filled Julia set K_c instead of J_c
    #[arg(long)]
    filled: bool,
    /// Julia parameter c as two expressions
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_hyphen_values = true, default_values = ["0", "0"])]
    c: Vec<String>,
    /// Disk or circle radius
    #[arg(long, default_value = "1")]
    radius: String,
    /// Disk or circle center
    #[arg(long, num_args = 2, value_names = ["X", "Y"], allow_hyphen_values = true, default_values = ["0", "0"])]
    shape_center: Vec<String>,
    /// Segment endpoints
    #[arg(long, num_args = 4, value_names = ["X0", "Y0", "X1", "Y1"], allow_hyphen_values = true,
          default_values = ["-1", "0", "1", "0"])]
    seg: Vec<String>,
    /// Output prefix
    #[arg(long)]
    out: PathBuf,
}

fn dyadic(s: &str) -> Result<Dyadic> {
    s.parse::<Dyadic>().with_context(|| format!("cannot read {s:?} as a dyadic number"))
}

fn point(v: &[String]) -> Result<Point> {
    Ok(Point::new(dyadic(&v[0])?, dyadic(&v[1])?))
}

fn set_spec(args: &RenderArgs) -> Result<SetSpec> {
    Ok(match args.set.as_str() {
        "koch" => SetSpec::Koch,
        "mandelbrot" => SetSpec::Mandelbrot,
        "julia" => SetSpec::Julia { c_re: args.c[0].clone(), c_im: args.c[1].clone(), filled: args.filled },
        "disk" => SetSpec::Disk { center: point(&args.shape_center)?, radius: dyadic(&args.radius)? },
        "circle" => SetSpec::Circle { center: point(&args.shape_center)?, radius: dyadic(&args.radius)? },
        "segment" => SetSpec::Segment { a: point(&args.seg[..2])?, b: point(&args.seg[2..])? },
        "step" => SetSpec::Step,
        other => match other.strip_prefix("graph:") {
            Some(id) => SetSpec::Graph(id.to_string()),
            None => bail!("unknown set {other:?}; expected koch, mandelbrot, julia, disk, circle, segment, step or graph:<{}>", GRAPH_MACHINES.join("|")),
        },
    })
}

fn cmd_render(args: &RenderArgs) -> Result<()> {
    let job = RenderJob {
        set: set_spec(args)?,
        center: point(&args.center)?,
        n: args.n,
        k: args.k,
        half_width: dyadic(&args.half_width)?,
        params: EscapeParams {
            t_max: args.t_max,
            extra_precision: args.extra_precision,
            a: args.a,
            b: args.b,
            max_subdivisions: args.max_subdivisions,
        },
    };
    let out = render(&job)?;
    for path in out.write(&args.out)? {
        println!("wrote {}", path.display());
    }
    print!("{}", out.stats_text());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Eval { expr, n } => {
            let r = eval_expr(&expr, n)?;
            println!("{}", r.value.to_decimal_string());
            println!("dyadic={}", r.value);
            println!("queries={}", r.queries);
            println!("bit_ops={}", r.bit_ops);
        }
        Command::Render(args) => cmd_render(&args)?,
        Command::Selfcheck { full, break_threshold } => {
            if let Some(name) = &break_threshold {
                if !selfcheck::BREAKABLE.contains(&name.as_str()) {
                    bail!("unknown check {name:?}; breakable: {}", selfcheck::BREAKABLE.join(", "));
                }
            }
            let level = if full { Level::Full } else { Level::Quick };
            let results = selfcheck::run(&Options { level, break_check: break_threshold });
            for r in &results {
                println!("{r}");
            }
            let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
            if !failed.is_empty() {
                eprintln!("selfcheck failed: {}", failed.join(", "));
                return Ok(ExitCode::FAILURE);
            }
            println!("selfcheck passed");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
