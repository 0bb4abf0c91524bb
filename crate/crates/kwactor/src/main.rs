use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kwactor::config::RunConfig;
use kwactor::cooccur::{HitCountTable, HitCounter, UMode};
use kwactor::corpus::load_wordlist;
use kwactor::error::{Error, Result};
use kwactor::eval::{evaluate, load_judgments};
use kwactor::live::LiveHitSource;
use kwactor::pipeline;
use kwactor::selection::{ProximityMode, StableAttribute};

#[derive(Parser)]
#[command(
    name = "kwactor",
    version,
    about = "Finds the keyword that tells a named social actor apart in web search results"
)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Directory holding the offline fixtures (snippets.jsonl, hits.json)
    #[arg(long, global = true, default_value = "fixtures")]
    fixtures: PathBuf,
    /// Maximum snippets kept per actor
    #[arg(long, global = true, default_value_t = 500)]
    snippet_limit: usize,
    /// Maximum tokens kept per snippet
    #[arg(long, global = true, default_value_t = 50)]
    max_snippet_len: usize,
    /// Candidate cutoff as a fraction of the top TF.IDF weight
    #[arg(long, global = true, default_value_t = 0.3)]
    tfidf_frac: f64,
    /// Maximum number of candidate words
    #[arg(long, global = true, default_value_t = 30)]
    word_cap: usize,
    /// Degree bound enforced when separating the spanning forest
    #[arg(long, global = true, default_value_t = 2)]
    cut_degree: usize,
    /// How word commonness u is measured
    #[arg(long, global = true, value_enum, default_value = "singleton")]
    u_mode: UMode,
    /// How cluster proximity to the stable attribute is scored
    #[arg(long, global = true, value_enum, default_value = "overlap-count")]
    proximity_mode: ProximityMode,
    /// Number of ranked keywords to report
    #[arg(long, global = true, default_value_t = 1)]
    top_k: usize,
    /// Fetch snippets and hit counts from a live endpoint instead of fixtures
    #[arg(long, global = true)]
    live: bool,
    /// Base URL of the live endpoint
    #[arg(long, global = true)]
    endpoint: Option<String>,
    /// Keep the actor's own name tokens in the vocabulary
    #[arg(long, global = true)]
    keep_name_tokens: bool,
    /// Word list removed from snippets at ingestion
    #[arg(long, global = true)]
    stopwords: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> RunConfig {
        RunConfig {
            fixtures_dir: self.fixtures,
            snippet_limit: self.snippet_limit,
            max_snippet_len: self.max_snippet_len,
            tfidf_frac: self.tfidf_frac,
            word_cap: self.word_cap,
            cut_degree: self.cut_degree,
            u_mode: self.u_mode,
            proximity_mode: self.proximity_mode,
            top_k: self.top_k,
            live: self.live,
            endpoint: self.endpoint,
            keep_name_tokens: self.keep_name_tokens,
            stopwords_path: self.stopwords,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Extract the discriminating keyword for one actor or a batch
    Extract {
        /// Actor name, used verbatim as the query term
        #[arg(long, conflicts_with = "actors_file")]
        actor: Option<String>,
        /// File with one actor name per line
        #[arg(long)]
        actors_file: Option<PathBuf>,
        /// Stable-attribute word list file
        #[arg(long)]
        sk: PathBuf,
    },
    /// List the candidate words and their weights for an actor
    Candidates {
        #[arg(long)]
        actor: String,
    },
    /// Hit-count cache maintenance
    Hits {
        #[command(subcommand)]
        command: HitsCommand,
    },
    /// Dump the word forest and the cuts that separated it
    Explain {
        #[arg(long)]
        actor: String,
        /// Emit DOT instead of JSON
        #[arg(long)]
        dot: bool,
    },
    /// Score relevance judgments
    Eval {
        /// JSON-lines judgments file
        #[arg(long)]
        judgments: PathBuf,
        /// Emit the report as JSON instead of a text table
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum HitsCommand {
    /// Pre-fetch counts for a word list into the cache file
    Warm {
        /// File with one word per line
        #[arg(long)]
        words: PathBuf,
        /// Also warm the doubleton of each word with this actor term
        #[arg(long)]
        actor: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config = cli.run.into_config();
    config.validate()?;
    match cli.command {
        Command::Extract { actor, actors_file, sk } => {
            cmd_extract(&config, actor, actors_file, &sk)
        }
        Command::Candidates { actor } => cmd_candidates(&config, &actor),
        Command::Hits { command: HitsCommand::Warm { words, actor } } => {
            cmd_warm(&config, &words, actor.as_deref())
        }
        Command::Explain { actor, dot } => cmd_explain(&config, &actor, dot),
        Command::Eval { judgments, json } => cmd_eval(&config, &judgments, json),
    }
}

/// One JSON line on stderr describing exactly what the run consumed,
/// keeping stdout reserved for the command's own output.
fn emit_provenance(config: &RunConfig, extra_inputs: &[&Path]) {
    let p = pipeline::provenance(config, extra_inputs);
    eprintln!("{}", serde_json::to_string(&p).expect("provenance serializes"));
}

fn pretty(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("output serializes")
}

fn cmd_extract(
    config: &RunConfig,
    actor: Option<String>,
    actors_file: Option<PathBuf>,
    sk_path: &Path,
) -> Result<ExitCode> {
    let sk = StableAttribute::from_file(sk_path)?;
    emit_provenance(config, &[sk_path]);
    match (actor, actors_file) {
        (Some(label), None) => {
            let output = pipeline::extract(config, &label, &sk)?;
            println!("{}", pretty(&output));
            Ok(if output.keyword.is_some() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        (None, Some(path)) => {
            let actors = read_actor_lines(&path)?;
            let results = pipeline::extract_many(config, &actors, &sk);
            let mut first_failure: Option<Error> = None;
            for (label, result) in results {
                match result {
                    Ok(output) => {
                        println!("{}", serde_json::to_string(&output).expect("output serializes"));
                    }
                    Err(e) => {
                        eprintln!("error for {label:?}: {e}");
                        if first_failure.is_none() {
                            first_failure = Some(e);
                        }
                    }
                }
            }
            Ok(match first_failure {
                Some(e) => ExitCode::from(e.exit_code() as u8),
                None => ExitCode::SUCCESS,
            })
        }
        (None, None) => Err(Error::Config(
            "one of --actor or --actors-file is required".into(),
        )),
        (Some(_), Some(_)) => Err(Error::Config(
            "use exactly one of --actor and --actors-file".into(),
        )),
    }
}

fn read_actor_lines(path: &Path) -> Result<Vec<String>> {
    let data = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let actors: Vec<String> = data
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    if actors.is_empty() {
        return Err(Error::Config(format!(
            "{} lists no actors",
            path.display()
        )));
    }
    Ok(actors)
}

fn cmd_candidates(config: &RunConfig, actor: &str) -> Result<ExitCode> {
    emit_provenance(config, &[]);
    let corpus = pipeline::load_actor_corpus(config, actor)?;
    let set = pipeline::candidates_for(config, &corpus)?;
    println!("{}", pretty(&set));
    Ok(ExitCode::SUCCESS)
}

fn cmd_explain(config: &RunConfig, actor: &str, dot: bool) -> Result<ExitCode> {
    emit_provenance(config, &[]);
    let (output, forest) = pipeline::explain(config, actor)?;
    if dot {
        print!("{}", forest.to_dot());
    } else {
        println!("{}", pretty(&output));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_warm(config: &RunConfig, words_path: &Path, actor: Option<&str>) -> Result<ExitCode> {
    if !config.live {
        return Err(Error::Config(
            "hits warm fetches from the live endpoint; pass --live and --endpoint".into(),
        ));
    }
    let endpoint = config
        .endpoint
        .as_deref()
        .ok_or_else(|| Error::Config("live mode needs an --endpoint base URL".into()))?;
    emit_provenance(config, &[words_path]);

    let words: Vec<String> = load_wordlist(words_path)?.into_iter().collect();
    if words.is_empty() {
        return Err(Error::Config(format!(
            "{} lists no words",
            words_path.display()
        )));
    }
    let cache_path = pipeline::hits_path(config);
    let table = if cache_path.exists() {
        HitCountTable::from_cache_file(&cache_path)?
    } else {
        HitCountTable::new()
    };
    let counter = HitCounter::with_table(Box::new(LiveHitSource::new(endpoint)?), table);
    for word in &words {
        counter.hit_count(word)?;
    }
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            counter.co_hit_count(a, b)?;
        }
    }
    if let Some(actor) = actor {
        counter.hit_count(actor)?;
        for word in &words {
            counter.co_hit_count(actor, word)?;
        }
    }
    if let Some(parent) = cache_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    counter.write_cache(&cache_path)?;
    println!(
        "warmed {} words into {} ({} queries issued)",
        words.len(),
        cache_path.display(),
        counter.queries_issued()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(config: &RunConfig, judgments_path: &Path, json: bool) -> Result<ExitCode> {
    emit_provenance(config, &[judgments_path]);
    let judgments = load_judgments(judgments_path)?;
    let report = evaluate(&judgments)?;
    if json {
        println!("{}", pretty(&report));
    } else {
        print!("{}", report.to_text_table());
    }
    Ok(ExitCode::SUCCESS)
}
