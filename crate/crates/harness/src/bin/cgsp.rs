use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cgsp_core::datagen::io::{ingest_complex_csv, load_signal_csv, preprocess, save_signal_csv};
use cgsp_core::datagen::{chirp_target, gen_bandlimited_signal, gen_features, gen_graph, gen_signal_seeded};
use cgsp_core::graph::GraphSpectrum;
use cgsp_core::kernels::{kernel_matrix, KernelMatrix};
use cgsp_core::metrics::FeatureVector;
use cgsp_core::reconstruct::{krr, nmse, sample, SamplingPlan};
use cgsp_core::CVector;
use cgsp_harness::config::{parse_sparsify, GeneratorConfig, KernelChoice};
use cgsp_harness::dist_report::{dist_report, DEFAULT_GRID_POINTS};
use cgsp_harness::report::write_file;
use cgsp_harness::{run_experiment, write_report, ExperimentConfig, HarnessError, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cgsp", version, about = "Kernel reconstruction of complex-valued graph signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a TOML configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write features, graph and a signal from a generator such as "swiss-roll:n=200".
    Gen {
        generator: String,
        #[arg(long)]
        out: PathBuf,
        /// Edge-weight kernel.
        #[arg(long, default_value = "egk:sigma=0.5")]
        weighting: String,
        #[arg(long, default_value = "knn:10")]
        sparsify: String,
        /// "bandlimited:<F>", "chirp", or a kernel string (f = Kα with seeded α).
        #[arg(long)]
        signal: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        order: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit Rayleigh and Weibull laws to the magnitudes of an index,re,im CSV.
    FitDist {
        csv: PathBuf,
        /// Reconstructed signal to compare against.
        #[arg(long)]
        reconstructed: Option<PathBuf>,
        /// Shift negative components by 256 and normalize by the maximum magnitude.
        #[arg(long)]
        preprocess: bool,
        /// Normalize each run of this many samples separately (implies --preprocess).
        #[arg(long)]
        bin_len: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Reconstruct one signal from random samples with kernel ridge regression.
    Reconstruct {
        /// Generator providing features and graph, e.g. "two-moons:n=300".
        #[arg(long)]
        generator: String,
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        samples: usize,
        /// Ground truth as index,re,im CSV; a seeded signal from the kernel otherwise.
        #[arg(long)]
        signal: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "egk:sigma=0.5")]
        weighting: String,
        #[arg(long, default_value = "knn:10")]
        sparsify: String,
        #[arg(long, default_value_t = 1.0)]
        order: f64,
        /// Where to write the reconstruction.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, seed, trials, out_dir } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply_overrides(seed, trials, out_dir);
            cfg.validate()?;
            let table = run_experiment(&cfg)?;
            let files = write_report(&table, &cfg, &cfg.output)?;
            let failures = table.total_failures();
            println!("wrote {} and {}", files.csv.display(), files.json.display());
            if failures > 0 {
                eprintln!("warning: {failures} trial(s) failed; see {}", files.json.display());
            }
            Ok(())
        }
        Command::Gen { generator, out, weighting, sparsify, signal, order, seed } => {
            gen(&generator, &out, &weighting, &sparsify, signal.as_deref(), order, seed)
        }
        Command::FitDist { csv, reconstructed, preprocess: pre, bin_len, grid_points, out_dir } => {
            let (original, meta) = if bin_len.is_some() {
                let raw = load_signal_csv(&csv)?;
                let (f, m) = preprocess(&raw, bin_len)?;
                (f, Some(m))
            } else {
                let (f, m) = ingest_complex_csv(&csv, pre)?;
                (f, Some(m))
            };
            let rec = reconstructed.map(load_signal_csv).transpose()?;
            let (fits, files) = dist_report(&original, rec.as_ref(), meta.as_ref(), grid_points, &out_dir)?;
            println!(
                "rayleigh sigma={} weibull k={} lambda={}; wrote {}",
                fits.rayleigh.sigma,
                fits.weibull.k,
                fits.weibull.lambda,
                files.grid.display()
            );
            Ok(())
        }
        Command::Reconstruct { generator, kernel, samples, signal, gamma, noise, seed, weighting, sparsify, order, out } => {
            let gcfg: GeneratorConfig = generator.parse()?;
            let spec = gcfg.to_spec(seed)?;
            let choice: KernelChoice = kernel.parse()?;
            let features = gen_features(&spec)?;
            let k = build_kernel(&choice, &features, || {
                let w = weighting.parse().map_err(|e| HarnessError::config(format!("weighting: {e}")))?;
                let g = gen_graph(&spec, &w, parse_sparsify(&sparsify)?)?;
                Ok(GraphSpectrum::new(&g, order, false)?)
            })?;
            let truth = match signal {
                Some(p) => load_signal_csv(p)?,
                None => gen_signal_seeded(&k, seed),
            };
            if truth.len() != k.n() {
                return Err(HarnessError::config(format!("signal has {} entries, graph has {}", truth.len(), k.n())));
            }
            if samples == 0 || samples > k.n() {
                return Err(HarnessError::config(format!("samples must lie in 1..={}", k.n())));
            }
            let plan = SamplingPlan::random(k.n(), samples, noise, seed)?;
            let y = sample(&plan, &truth)?;
            let f_hat = krr(&k, &plan, &y, gamma)?.f;
            println!("nmse={}", nmse(&f_hat, &truth)?);
            if let Some(path) = out {
                save_signal_csv(&path, &f_hat)?;
            }
            Ok(())
        }
    }
}

fn build_kernel(
    choice: &KernelChoice,
    features: &[FeatureVector],
    spectrum: impl FnOnce() -> Result<GraphSpectrum>,
) -> Result<KernelMatrix> {
    Ok(match choice {
        KernelChoice::Feature(spec) => kernel_matrix(spec, features)?,
        KernelChoice::Spectral(spec) => spec.build(&spectrum()?)?.kernel,
    })
}

fn gen(
    generator: &str,
    out: &Path,
    weighting: &str,
    sparsify: &str,
    signal: Option<&str>,
    order: f64,
    seed: u64,
) -> Result<()> {
    let spec = generator.parse::<GeneratorConfig>()?.to_spec(seed)?;
    let w = weighting.parse().map_err(|e| HarnessError::config(format!("weighting: {e}")))?;
    let sparsify = parse_sparsify(sparsify)?;
    let features = gen_features(&spec)?;
    let graph = gen_graph(&spec, &w, sparsify)?;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;

    let mut fw = csv::Writer::from_writer(Vec::new());
    let dim = features.first().map_or(0, |z| z.dim());
    let mut header = vec!["vertex".to_string()];
    for d in 0..dim {
        header.push(format!("z{d}_re"));
        header.push(format!("z{d}_im"));
    }
    fw.write_record(&header)?;
    for (i, z) in features.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        for c in z.as_slice() {
            rec.push(c.re.to_string());
            rec.push(c.im.to_string());
        }
        fw.write_record(&rec)?;
    }
    let bytes = fw.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))?;
    write_file(&out.join("features.csv"), &bytes)?;
    graph.save_edge_list(out.join("graph.csv"))?;

    if let Some(sig) = signal {
        let f: CVector = if let Some(b) = sig.strip_prefix("bandlimited:") {
            let b: usize = b.parse().map_err(|_| HarnessError::config(format!("bad bandwidth in {sig:?}")))?;
            let s = GraphSpectrum::new(&graph, order, false)?;
            gen_bandlimited_signal(&s, &(0..b.min(s.n())).collect::<Vec<_>>())?
        } else if sig == "chirp" {
            chirp_target(&features)
        } else {
            let choice: KernelChoice = sig.parse()?;
            let k = build_kernel(&choice, &features, || Ok(GraphSpectrum::new(&graph, order, false)?))?;
            gen_signal_seeded(&k, seed)
        };
        save_signal_csv(out.join("signal.csv"), &f)?;
    }
    println!("wrote {} vertices, {} edges to {}", graph.n(), graph.edge_count(), out.display());
    Ok(())
}
