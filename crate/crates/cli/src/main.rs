use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use entflux::analysis::{
    constrained_optimal_flux, count_allocations, ebr_max, AnalysisError, LinkOptima,
};
use entflux::optimizer::{best_of_runs, brute_force_optimize, BruteForceOptions};
use entflux::scenario::{
    emit_curves, emit_report, load_scenario, render_text, write_curves_csv, ReportFormat,
    ScenarioSpec,
};

#[derive(Parser)]
#[command(
    name = "entflux",
    version,
    about = "Entanglement distribution link analysis and flux allocation"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file or preset name (scenario1..scenario4)
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// GA random seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Independent GA runs per channel count
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
    Both,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Text => ReportFormat::Text,
            Format::Both => ReportFormat::Both,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Per-link optima, entanglement boundary and constrained flux
    Analyze {
        #[arg(long, requires = "y2")]
        y1: Option<f64>,
        #[arg(long, requires = "y1")]
        y2: Option<f64>,
        /// Fidelity threshold for a single link given by --y1/--y2
        #[arg(long, default_value_t = 0.0)]
        f_min: f64,
    },
    /// Fidelity and EBR against dimensionless flux
    Curves {
        #[arg(long, requires = "y2")]
        y1: Option<f64>,
        #[arg(long, requires = "y1")]
        y2: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        x_min: f64,
        /// Defaults to 1.2 times the upper EBR root
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Run the GA sweep of a scenario and write its report
    Optimize {
        /// Channel counts to sweep instead of the scenario's list
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
    },
    /// Compare the GA with exhaustive search at one channel count
    Oracle {
        /// Defaults to the scenario's smallest channel count
        #[arg(long)]
        k: Option<usize>,
    },
    /// Size of the allocation space
    Count {
        #[arg(long, requires = "links")]
        k: Option<u64>,
        #[arg(long, requires = "k")]
        links: Option<u64>,
    },
}

fn scenario(common: &Common) -> Result<ScenarioSpec> {
    let Some(source) = &common.scenario else {
        bail!("--scenario <path|preset> is required");
    };
    let mut spec = load_scenario(source).with_context(|| format!("loading scenario {source}"))?;
    if let Some(seed) = common.seed {
        spec.ga.seed = Some(seed);
    }
    if let Some(runs) = common.runs {
        spec.ga.runs = Some(runs);
    }
    Ok(spec)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn analyze(common: &Common, single: Option<(f64, f64, f64)>) -> Result<()> {
    let (name, tau_note, f_min, links) = match single {
        Some((y1, y2, f_min)) => (
            "link".to_string(),
            None,
            f_min,
            vec![("link".to_string(), y1, y2)],
        ),
        None => {
            let spec = scenario(common)?;
            let links = spec
                .links
                .iter()
                .map(|l| {
                    let (y1, y2) = l.noise_params(spec.tau)?;
                    Ok((l.name.clone(), y1, y2))
                })
                .collect::<Result<Vec<_>>>()?;
            (spec.name.clone(), Some(spec.tau), spec.f_min, links)
        }
    };
    let format = common.format.unwrap_or(Format::Text);
    let mut text = String::new();
    let mut csv = String::from(
        "link,y1,y2,entangleable,x_f,f_max,x_r,r_max,root_lo,root_hi,phi,r_phi,beta\n",
    );
    writeln!(text, "{name}: F_min {f_min}")?;
    if let Some(tau) = tau_note {
        writeln!(text, "tau {tau:e} s")?;
    }
    writeln!(
        text,
        "{:>6} {:>8} {:>8} {:>5} {:>9} {:>7} {:>9} {:>8} {:>9} {:>9} {:>9} {:>7}",
        "link", "y1", "y2", "ent", "x_F", "F_max", "x_R", "R_max", "z-", "z+", "phi", "beta"
    )?;
    let mut total = Some(0.0);
    for (link, y1, y2) in &links {
        let o = LinkOptima::new(*y1, *y2);
        let (phi, r_phi) = match constrained_optimal_flux(*y1, *y2, f_min) {
            Ok((p, r)) => (Some(p), Some(r)),
            Err(AnalysisError::Infeasible { .. } | AnalysisError::NoEntanglement { .. }) => {
                (None, None)
            }
            Err(e) => return Err(e.into()),
        };
        let r_max = ebr_max(*y1, *y2).1;
        let beta = r_phi.filter(|_| r_max > 0.0).map(|r| r / r_max);
        total = match (total, beta) {
            (Some(t), Some(b)) => Some(t + b),
            _ => None,
        };
        let show =
            |v: Option<f64>, p: usize| v.map_or_else(|| "-".to_string(), |x| format!("{x:.p$}"));
        writeln!(
            text,
            "{:>6} {:>8} {:>8} {:>5} {:>9.5} {:>7.4} {:>9} {:>8.5} {:>9} {:>9} {:>9} {:>7}",
            link,
            y1,
            y2,
            if o.roots.is_some() { "yes" } else { "no" },
            o.x_f,
            o.f_max,
            show(o.x_r, 5),
            o.r_max,
            show(o.roots.map(|r| r.0), 5),
            show(o.roots.map(|r| r.1), 5),
            show(phi, 5),
            show(beta, 4)
        )?;
        writeln!(
            csv,
            "{link},{y1:.16e},{y2:.16e},{},{:.16e},{:.16e},{},{:.16e},{},{},{},{},{}",
            o.roots.is_some(),
            o.x_f,
            o.f_max,
            opt(o.x_r),
            o.r_max,
            opt(o.roots.map(|r| r.0)),
            opt(o.roots.map(|r| r.1)),
            opt(phi),
            opt(r_phi),
            opt(beta)
        )?;
    }
    match total {
        Some(t) => writeln!(text, "ideal fitness f_inf = {t:.6}")?,
        None => writeln!(
            text,
            "ideal fitness f_inf undefined: some link cannot reach F_min"
        )?,
    }
    if format != Format::Csv {
        print!("{text}");
    }
    if format != Format::Text {
        let path = write_file(&common.out, &format!("{name}_analysis.csv"), csv.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn curves(
    common: &Common,
    single: Option<(f64, f64)>,
    x_min: f64,
    x_max: Option<f64>,
    samples: usize,
) -> Result<()> {
    let targets = match single {
        Some((y1, y2)) => vec![(format!("curves_y1-{y1}_y2-{y2}"), y1, y2)],
        None => {
            let spec = scenario(common)?;
            spec.links
                .iter()
                .map(|l| {
                    let (y1, y2) = l.noise_params(spec.tau)?;
                    Ok((format!("{}_{}_curves", spec.name, l.name), y1, y2))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    for (name, y1, y2) in targets {
        let hi = match x_max {
            Some(x) => x,
            None => LinkOptima::new(y1, y2).roots.map_or(2.0, |r| 1.2 * r.1),
        };
        let points = emit_curves(y1, y2, x_min, hi, samples)?;
        let mut buf = Vec::new();
        write_curves_csv(&mut buf, &points)?;
        let path = write_file(&common.out, &format!("{name}.csv"), &buf)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn optimize(common: &Common, k: Option<Vec<usize>>) -> Result<()> {
    let mut spec = scenario(common)?;
    if let Some(k) = k {
        spec.k_list = k;
    }
    let result = entflux::scenario::run_scenario(&spec)?;
    let format = common.format.unwrap_or(Format::Both);
    if format != Format::Csv {
        print!("{}", render_text(&result));
    }
    for path in emit_report(&result, &common.out, format.into())? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn oracle(common: &Common, k: Option<usize>) -> Result<()> {
    let spec = scenario(common)?;
    let k = k.unwrap_or(spec.k_list[0]);
    let net = spec.network(k)?;
    let brute = brute_force_optimize(&net, &BruteForceOptions::default())?;
    let cfg = spec.ga_config();
    let ga = best_of_runs(&net, &cfg)?;
    let champ = ga.champion();
    let links = net.link_count();
    let ratio = if brute.fitness() != 0.0 {
        champ.fitness() / brute.fitness()
    } else {
        f64::NAN
    };
    let format = common.format.unwrap_or(Format::Text);
    if format != Format::Csv {
        println!(
            "{} at K = {k}: {} compositions searched",
            spec.name, brute.compositions
        );
        println!(
            "exhaustive  f = {:.9}  counts {:?}  mu_tot {:.6e}",
            brute.fitness(),
            brute.allocation.counts(links),
            brute.allocation.mu_tot
        );
        println!(
            "GA best of {}  f = {:.9}  counts {:?}  mu_tot {:.6e}",
            cfg.independent_runs,
            champ.fitness(),
            champ.allocation.counts(links),
            champ.allocation.mu_tot
        );
        println!("ratio GA / exhaustive = {ratio:.6}");
    }
    if format != Format::Text {
        let mut csv = String::from("method,channels,fitness,mu_tot,counts\n");
        for (method, f, alloc) in [
            ("exhaustive", brute.fitness(), &brute.allocation),
            ("ga", champ.fitness(), &champ.allocation),
        ] {
            let counts: Vec<String> = alloc.counts(links).iter().map(|c| c.to_string()).collect();
            writeln!(
                csv,
                "{method},{k},{f:.16e},{:.16e},{}",
                alloc.mu_tot,
                counts.join(" ")
            )?;
        }
        let name = format!("{}_K{k}_seed{}_oracle.csv", spec.name, cfg.rng_seed);
        let path = write_file(&common.out, &name, csv.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn count(common: &Common, k: Option<u64>, links: Option<u64>) -> Result<()> {
    let cases = match (k, links) {
        (Some(k), Some(l)) => vec![(k, l)],
        _ => {
            let spec = scenario(common)?;
            let l = spec.links.len() as u64;
            spec.k_list.iter().map(|&k| (k as u64, l)).collect()
        }
    };
    let show = |r: Result<u128, AnalysisError>| -> Result<String> {
        match r {
            Ok(n) => Ok(n.to_string()),
            Err(AnalysisError::CountOverflow { .. }) => Ok("overflow".into()),
            Err(e) => Err(e.into()),
        }
    };
    println!(
        "{:>6} {:>6} {:>40} {:>24}",
        "K", "L", "distinct channels", "uniform flux"
    );
    for (k, l) in cases {
        println!(
            "{k:>6} {l:>6} {:>40} {:>24}",
            show(count_allocations(k, l, false))?,
            show(count_allocations(k, l, true))?
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    let common = &cli.common;
    match cli.command {
        Command::Analyze { y1, y2, f_min } => {
            analyze(common, y1.zip(y2).map(|(a, b)| (a, b, f_min)))
        }
        Command::Curves {
            y1,
            y2,
            x_min,
            x_max,
            samples,
        } => curves(common, y1.zip(y2), x_min, x_max, samples),
        Command::Optimize { k } => optimize(common, k),
        Command::Oracle { k } => oracle(common, k),
        Command::Count { k, links } => count(common, k, links),
    }
}
