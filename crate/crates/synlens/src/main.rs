use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use synlens::bundle::{build_analysis, AnalysisOptions, Bundle};
use synlens::core::annotate::Lexicon;
use synlens::core::cluster::{Linkage, DEFAULT_KS};
use synlens::core::metrics::{View, DEFAULT_EMBED_DIM};
use synlens::core::neardup::DEFAULT_DUP_THRESHOLD;
use synlens::fixtures::{generate_fixture, write_fixture, TemplateSpec};
use synlens::ingest::{load, CsvConfig, Format};
use synlens::{report, serve, Error, Result};

#[derive(Parser)]
#[command(name = "synlens", version, about = "Syntactic diversity analysis for text corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a CSV or CoNLL-U corpus and write a JSON bundle.
    Analyze(AnalyzeArgs),
    /// Print the text report for a bundle.
    Report { bundle: PathBuf },
    /// Print the metric comparison table for a bundle.
    Compare { bundle: PathBuf },
    /// Serve a bundle (and optional UI assets) over HTTP.
    Serve {
        bundle: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory of static UI files.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
    /// Template corpus generation.
    Fixtures {
        #[command(subcommand)]
        command: FixturesCommand,
    },
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Write <name>.csv, <name>.conllu and <name>.manifest.json.
    Generate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Conllu,
}

#[derive(Clone, Copy, ValueEnum)]
enum LinkageArg {
    Average,
    Complete,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Defaults to the input file extension.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// CSV column holding the text.
    #[arg(long, default_value = "text")]
    text_col: String,
    /// Cluster counts, comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_k, default_values_t = DEFAULT_KS)]
    k: Vec<usize>,
    #[arg(long, value_parser = parse_threshold, default_value_t = DEFAULT_DUP_THRESHOLD)]
    dup_threshold: f64,
    /// Subset of token,pos,dep,embedding.
    #[arg(long, value_delimiter = ',', value_parser = parse_view, default_values_t = View::ALL)]
    metrics: Vec<View>,
    #[arg(long, value_enum, default_value_t = LinkageArg::Average)]
    linkage: LinkageArg,
    /// Hashing fallback dimension for the embedding metric; 0 disables it.
    #[arg(long, default_value_t = DEFAULT_EMBED_DIM)]
    embed_dim: usize,
    /// Extra `word<TAB>UPOS` entries for the fallback tagger.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Embed the full distance matrices in the bundle.
    #[arg(long)]
    include_distances: bool,
    #[arg(long)]
    out: PathBuf,
}

fn parse_k(s: &str) -> std::result::Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k),
        _ => Err(format!("{s:?} is not a positive integer")),
    }
}

fn parse_threshold(s: &str) -> std::result::Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(t) if t > 0.0 && t < 1.0 => Ok(t),
        _ => Err(format!("{s:?} is not in the open interval (0, 1)")),
    }
}

fn parse_view(s: &str) -> std::result::Result<View, String> {
    View::parse(s).ok_or_else(|| format!("unknown metric {s:?}; expected token, pos, dep or embedding"))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_bundle(path: &Path) -> Result<Bundle> {
    Bundle::from_json(&read(path)?)
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let format = match args.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Conllu) => Format::Conllu,
        None => match Format::from_path(&args.input) {
            Some(f) => f,
            None => {
                use clap::CommandFactory;
                Cli::command()
                    .error(
                        clap::error::ErrorKind::ValueValidation,
                        format!("cannot infer the format of {}; pass --format", args.input.display()),
                    )
                    .exit()
            }
        },
    };
    let mut lexicon = Lexicon::english();
    if let Some(path) = &args.lexicon {
        let src = String::from_utf8(read(path)?).map_err(|e| Error::Utf8(e.utf8_error()))?;
        lexicon.extend_from_str(&src).map_err(|source| Error::Analysis {
            module: "annotate",
            source,
        })?;
    }
    let csv = CsvConfig {
        text: args.text_col,
        ..CsvConfig::default()
    };
    let loaded = load(&read(&args.input)?, format, &csv, &lexicon)?;
    for d in &loaded.diagnostics {
        eprintln!("{}: {d}", args.input.display());
    }
    let options = AnalysisOptions {
        ks: args.k,
        dup_threshold: args.dup_threshold,
        linkage: match args.linkage {
            LinkageArg::Average => Linkage::Average,
            LinkageArg::Complete => Linkage::Complete,
        },
        metrics: args.metrics,
        embed_dim: (args.embed_dim > 0).then_some(args.embed_dim),
        include_distances: args.include_distances,
        ..AnalysisOptions::default()
    };
    let bundle = build_analysis(loaded.source_kind, &loaded.examples, loaded.diagnostics, &options)?;
    for a in &bundle.availability {
        match &a.reason {
            None => eprintln!("metric {}: available", a.metric),
            Some(r) => eprintln!("metric {}: unavailable ({r})", a.metric),
        }
    }
    std::fs::write(&args.out, bundle.to_json()?).map_err(|e| Error::io(&args.out, e))?;
    eprintln!("wrote {} ({} examples)", args.out.display(), bundle.examples.len());
    Ok(())
}

fn serve_bundle(bundle: &Path, port: u16, assets: Option<PathBuf>) -> Result<()> {
    let bytes = serve::load_bundle_bytes(bundle)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("tokio runtime", e))?;
    runtime.block_on(async {
        let listener = serve::bind(port).await?;
        if let Ok(addr) = listener.local_addr() {
            eprintln!("serving {} on http://{addr}/api/bundle", bundle.display());
        }
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        serve::run(listener, serve::router(bytes, assets), shutdown).await
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Report { bundle } => {
            print!("{}", report::render_text_report(&read_bundle(&bundle)?));
            Ok(())
        }
        Command::Compare { bundle } => {
            let b = read_bundle(&bundle)?;
            let c = b
                .comparison
                .as_ref()
                .ok_or_else(|| Error::InvalidBundle("bundle has fewer than two metrics to compare".into()))?;
            print!("{}", report::render_comparison(c));
            Ok(())
        }
        Command::Serve { bundle, port, assets } => serve_bundle(&bundle, port, assets),
        Command::Fixtures {
            command: FixturesCommand::Generate { spec, out },
        } => {
            let src = String::from_utf8(read(&spec)?).map_err(|e| Error::Utf8(e.utf8_error()))?;
            let fixture = generate_fixture(&TemplateSpec::parse(&src)?)?;
            for path in write_fixture(&fixture, &out)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
