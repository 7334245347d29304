use std::io::Write;
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use papir_core::analysis::{privacy_oracle, Policy, PrivacyVerdict, RateReport};
use papir_core::net::{self, Client};
use papir_core::simulation::{self, Arithmetic, ExperimentConfig};
use papir_core::{
    Dataset, DemandModel, DemandRealization, Error, PopularityProfile, PrimeField, ProblemParams,
    ProfileDistribution, Result, SideInfo,
};

mod demo;
mod render;
mod sideinfo;

use render::Format;

#[derive(Parser, Debug)]
#[command(
    name = "papir",
    version,
    about = "Popularity-aware private information retrieval with side information"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rate bounds and expected download of one instance.
    Rates(ModelArgs),
    /// Exhaustive privacy audit of a query policy.
    VerifyPrivacy {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "rcs")]
        policy: Policy,
    },
    /// Monte-Carlo sweep of the mean rate ratio; writes CSV.
    Simulate(SimulateArgs),
    /// Selection probability of every (W, S).
    GammaTable(ModelArgs),
    /// Answer queries against a dataset file until killed.
    Serve {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7401")]
        listen: String,
    },
    /// Retrieve one message from a running server.
    Fetch(FetchArgs),
    /// Worked example: K=6, M=1, popularity (2,1,1,1,1,1).
    Demo,
    /// Write a random dataset file and, optionally, a side-information file.
    GenDataset(GenArgs),
}

#[derive(Args, Debug)]
struct ProfileArgs {
    /// Profile file: one popularity value per line.
    #[arg(long, conflicts_with = "distribution")]
    profile: Option<PathBuf>,
    /// Draw the profile instead: uniform, zipf[:N:s], gamma[:shape:scale], weibull[:shape:scale].
    #[arg(long)]
    distribution: Option<ProfileDistribution>,
    /// Number of messages; required with --distribution.
    #[arg(long)]
    k: Option<usize>,
    /// Seed for --distribution.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ProfileArgs {
    fn load(&self) -> Result<PopularityProfile> {
        let profile = match (&self.profile, &self.distribution) {
            (Some(path), _) => PopularityProfile::load(path)?,
            (None, Some(dist)) => {
                let k = self
                    .k
                    .ok_or_else(|| Error::Usage("--distribution needs --k".into()))?;
                dist.sample(k, self.seed)?
            }
            (None, None) => return Err(Error::Usage("give --profile or --distribution".into())),
        };
        if let Some(k) = self.k {
            if k != profile.len() {
                return Err(Error::Usage(format!(
                    "--k {k} does not match the profile length {}",
                    profile.len()
                )));
            }
        }
        Ok(profile)
    }
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// Side-information size.
    #[arg(long)]
    m: usize,
    /// Maximum number of enumerated terms.
    #[arg(long)]
    limit: Option<u64>,
}

impl ModelArgs {
    fn model(&self) -> Result<DemandModel> {
        let model = DemandModel::new(self.profile.load()?, self.m)?;
        Ok(match self.limit {
            Some(limit) => model.with_limit(limit),
            None => model,
        })
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Experiment config; defaults to the three standard distributions.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination, `-` for standard output.
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    profiles: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    arithmetic: Option<Arithmetic>,
}

#[derive(Args, Debug)]
struct FetchArgs {
    #[arg(long, default_value = "127.0.0.1:7401")]
    connect: String,
    /// Demanded message id.
    #[arg(long)]
    demand: usize,
    /// Side-information message ids, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    side: Vec<usize>,
    /// Side-information file holding the values of --side.
    #[arg(long)]
    side_info: PathBuf,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Seed of the query randomness.
    #[arg(long, default_value_t = 0)]
    query_seed: u64,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    k: usize,
    /// Symbols per message.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Field order; defaults to the smallest prime not below K.
    #[arg(long)]
    field: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    /// Ids to export as side information.
    #[arg(long, value_delimiter = ',', requires = "side_info_out")]
    side: Vec<usize>,
    #[arg(long)]
    side_info_out: Option<PathBuf>,
}

/// Exit status of a command that ran to completion.
enum Status {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Status> {
    let format = cli.format;
    let mut out = std::io::stdout().lock();
    let text = match cli.command {
        Command::Rates(args) => render::rates(&RateReport::compute(&args.model()?)?, format),
        Command::VerifyPrivacy { model, policy } => {
            let model = model.model()?;
            let verdict = privacy_oracle(&model, policy)?;
            emit(&mut out, &render::verdict(&verdict, format))?;
            return Ok(verdict_status(&verdict));
        }
        Command::Simulate(args) => simulate(args, format)?,
        Command::GammaTable(args) => render::gamma_table(&args.model()?, format)?,
        Command::Serve { dataset, listen } => return serve(dataset, &listen, &mut out),
        Command::Fetch(args) => fetch(args, format)?,
        Command::Demo => {
            let (text, ok) = demo::run(format)?;
            emit(&mut out, &text)?;
            return Ok(if ok { Status::Ok } else { Status::Failed });
        }
        Command::GenDataset(args) => gen_dataset(args, format)?,
    };
    emit(&mut out, &text)?;
    Ok(Status::Ok)
}

fn emit(out: &mut impl Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        })
}

fn verdict_status(v: &PrivacyVerdict) -> Status {
    if v.passed {
        Status::Ok
    } else {
        Status::Failed
    }
}

fn simulate(args: SimulateArgs, format: Format) -> Result<String> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::standard(),
    };
    if let Some(p) = args.profiles {
        config.profiles_per_point = p;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(a) = args.arithmetic {
        config.arithmetic = a;
    }
    config.validate()?;
    let rows = simulation::run_experiment(&config)?;
    if args.output.as_os_str() == "-" {
        return Ok(simulation::emit_csv(&rows));
    }
    simulation::write_csv(&rows, &args.output)?;
    Ok(render::simulate_summary(rows.len(), &args.output, format))
}

fn serve(dataset: PathBuf, listen: &str, out: &mut impl Write) -> Result<Status> {
    let data = net::load_dataset(&dataset)?;
    let listener = TcpListener::bind(listen).map_err(|e| Error::Network {
        context: format!("binding {listen}"),
        source: e,
    })?;
    let addr = listener.local_addr().map_err(|e| Error::Network {
        context: "reading the bound address".into(),
        source: e,
    })?;
    emit(
        out,
        &format!(
            "serving K={} n={} over GF({}) on {addr}\n",
            data.k(),
            data.n(),
            data.field().order()
        ),
    )?;
    net::serve(listener, Arc::new(data), Arc::new(AtomicBool::new(false)));
    Ok(Status::Ok)
}

fn fetch(args: FetchArgs, format: Format) -> Result<String> {
    let profile = args.profile.load()?;
    let k = profile.len();
    let (field, side_info) = sideinfo::load(&args.side_info)?;
    let realization = DemandRealization::new(k, args.side.len(), args.demand, &args.side)?;
    let n = side_for(&side_info, realization.side())?;
    let params = ProblemParams::new(k, realization.side().len(), field, n)?;
    let client = Client::new(args.connect.as_str(), params, profile)?;
    let outcome = client.fetch(&realization, &side_info, args.query_seed)?;
    Ok(render::fetch(args.demand, &outcome, format))
}

/// Checks that every side-information id is present; returns the message length.
fn side_for(side_info: &SideInfo, ids: &[usize]) -> Result<usize> {
    let mut n = None;
    for id in ids {
        let x = side_info
            .get(id)
            .ok_or_else(|| Error::Usage(format!("side-information file has no message {id}")))?;
        n = Some(x.len());
    }
    n.ok_or_else(|| Error::Usage("empty side information".into()))
}

fn gen_dataset(args: GenArgs, format: Format) -> Result<String> {
    let field = match args.field {
        Some(q) => PrimeField::new(q)?,
        None => PrimeField::smallest_at_least(args.k as u64)?,
    };
    if args.k < 2 || args.n == 0 {
        return Err(Error::Usage("need K >= 2 and n >= 1".into()));
    }
    // M does not affect the data.
    let params = ProblemParams::new(args.k, 1, field, args.n)?;
    let data = Dataset::random(&params, &mut ChaCha8Rng::seed_from_u64(args.seed));
    net::save_dataset(&data, &args.output)?;
    if let Some(path) = &args.side_info_out {
        sideinfo::save(&data.side_info(&args.side)?, field, path)?;
    }
    Ok(render::gen_summary(
        &data,
        &args.output,
        args.side_info_out.as_deref(),
        format,
    ))
}
