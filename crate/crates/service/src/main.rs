use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use glens::{AppState, Dataset, ServiceConfig};
use glens_core::community::{community_stats, detect_communities, DEFAULT_WALK_STEPS};
use glens_core::contagion::{enumerate_paths, PathCaps};
use glens_core::graph::Date;
use glens_core::ingest::{
    generate_synthetic, join_to_network, load_tables, overall_stats, write_tables, SyntheticConfig,
};
use glens_core::metrics::{compute_centralities, write_metrics_csv};
use glens_core::patterns::{detect_circles, CircleKind, match_motif, motif_census_with, CensusOptions, Motif};
use glens_core::risk::{build_windows, rolling_predict, BoostParams, RollingParams};
use glens_core::{EnterpriseId, ViewMode};

#[derive(Parser)]
#[command(name = "glens", version, about = "Loan-guarantee network analytics")]
struct Cli {
    /// Dataset root (manifest file or directory holding manifest.json).
    #[arg(long, env = "GLENS_DATA", global = true)]
    data: Option<PathBuf>,
    /// Write results here instead of stdout (a directory for `generate`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and join a table set; report row counts and the fingerprint.
    Ingest { manifest: PathBuf },
    /// Write a synthetic table set and its ground truth from a JSON config ("-" for defaults).
    Generate { config: String },
    /// Corpus counts and both default rates.
    Stats,
    /// Seven centralities per enterprise.
    Centrality {
        #[arg(long)]
        date: Option<Date>,
    },
    /// Detected communities and their statistics.
    Communities {
        #[arg(long)]
        date: Option<Date>,
        #[arg(long, default_value_t = DEFAULT_WALK_STEPS)]
        steps: usize,
    },
    /// Motif class counts for k in 3..=5.
    Census {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        date: Option<Date>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Network-wide embeddings of one motif given as JSON `{"k":..,"edges":[[u,v],..]}`.
    Match {
        #[arg(long)]
        motif: String,
        #[arg(long)]
        date: Option<Date>,
    },
    /// Mutual, revolving, star and joint-liability circles.
    Circles {
        #[arg(long, default_value_t = 8)]
        maxlen: usize,
        #[arg(long)]
        date: Option<Date>,
    },
    /// Rolling-window default probabilities.
    Predict {
        #[arg(long, default_value_t = 3)]
        width: u32,
        #[arg(long, default_value_t = 3)]
        stride: u32,
        #[arg(long, default_value_t = 100)]
        trees: usize,
    },
    /// Propagation paths from one enterprise towards its guarantors.
    Paths {
        node: String,
        #[arg(long, default_value_t = 8)]
        maxlen: usize,
        #[arg(long, default_value_t = 10_000)]
        max_paths: usize,
        #[arg(long)]
        date: Option<Date>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let out = Output { path: cli.output.clone(), format: cli.format };
    match cli.command {
        Command::Ingest { manifest } => {
            let tables = load_tables(&manifest).with_context(|| format!("loading {}", manifest.display()))?;
            let net = join_to_network(&tables)?;
            #[derive(Serialize)]
            struct Row {
                table: &'static str,
                rows: usize,
            }
            let rows: Vec<Row> = tables.row_counts().into_iter().map(|(table, rows)| Row { table, rows }).collect();
            let json = serde_json::json!({
                "fingerprint": net.fingerprint(),
                "enterprises": net.enterprises.len(),
                "guarantees": net.edges.len(),
                "span": net.date_span(),
                "row_counts": tables.row_counts(),
            });
            out.emit(&json, &rows)
        }
        Command::Generate { config } => {
            let cfg: SyntheticConfig = if config == "-" {
                SyntheticConfig::default()
            } else {
                serde_json::from_str(&fs::read_to_string(&config).with_context(|| format!("reading {config}"))?)?
            };
            let dir = cli.output.unwrap_or_else(|| PathBuf::from("data"));
            let (tables, truth) = generate_synthetic(&cfg)?;
            write_tables(&dir, &tables)?;
            fs::write(dir.join("ground_truth.json"), serde_json::to_vec_pretty(&truth)?)?;
            eprintln!("wrote {} tables to {}", tables.row_counts().len(), dir.display());
            Ok(())
        }
        Command::Stats => {
            let tables = load_tables(&data_root(&cli.data)?)?;
            let s = overall_stats(&tables);
            out.emit(&s, std::slice::from_ref(&s))
        }
        Command::Centrality { date } => {
            let d = dataset(&cli.data)?;
            let m = compute_centralities(&d.snapshot(date))?;
            match out.format {
                Format::Json => out.write(&serde_json::to_vec_pretty(&m)?),
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_metrics_csv(&m, &mut buf)?;
                    out.write(&buf)
                }
            }
        }
        Command::Communities { date, steps } => {
            let d = dataset(&cli.data)?;
            let snap = d.snapshot(date);
            let p = detect_communities(&snap, steps.max(1));
            let stats = community_stats(&p, &snap.simple_view(ViewMode::Undirected), &d.ledger);
            let json = serde_json::json!({ "date": snap.as_of, "labels": p.labels(), "stats": stats });
            out.emit(&json, &stats)
        }
        Command::Census { k, date, budget } => {
            let d = dataset(&cli.data)?;
            let g = d.snapshot(date).simple_view(ViewMode::Directed);
            let mut opts = CensusOptions::default();
            if let Some(b) = budget {
                opts.budget = b;
            }
            let r = motif_census_with(&g, k, &opts, None)?;
            #[derive(Serialize)]
            struct Row {
                code: String,
                edges: String,
                count: u64,
            }
            let rows: Vec<Row> = r
                .classes
                .iter()
                .map(|c| Row { code: c.motif.code().to_string(), edges: edge_list(&c.motif), count: c.count })
                .collect();
            out.emit(&r, &rows)
        }
        Command::Match { motif, date } => {
            let m: Motif = serde_json::from_str(&motif).context("parsing --motif")?;
            let d = dataset(&cli.data)?;
            let r = match_motif(&d.snapshot(date).simple_view(ViewMode::Directed), &m);
            #[derive(Serialize)]
            struct Row {
                members: String,
            }
            let rows: Vec<Row> = r.embeddings.iter().map(|e| Row { members: join(e, ";") }).collect();
            out.emit(&r, &rows)
        }
        Command::Circles { maxlen, date } => {
            if maxlen < 2 {
                bail!("--maxlen must be at least 2");
            }
            let d = dataset(&cli.data)?;
            let r = detect_circles(&d.snapshot(date).simple_view(ViewMode::Directed), maxlen);
            #[derive(Serialize)]
            struct Row {
                kind: CircleKind,
                members: String,
            }
            let rows: Vec<Row> = [&r.mutual, &r.revolving, &r.stars, &r.joint_liability]
                .into_iter()
                .flatten()
                .map(|c| Row { kind: c.kind, members: join(&c.members, ";") })
                .collect();
            out.emit(&r, &rows)
        }
        Command::Predict { width, stride, trees } => {
            let d = dataset(&cli.data)?;
            let plan = build_windows(d.span, width, stride)?;
            let params = RollingParams {
                boost: BoostParams { n_trees: trees, ..Default::default() },
                grace_days: glens::dataset::GRACE_DAYS,
                ..Default::default()
            };
            let r = rolling_predict(&d.network, &plan, &params);
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            out.emit(&r, &r.scores)
        }
        Command::Paths { node, maxlen, max_paths, date } => {
            let d = dataset(&cli.data)?;
            let r = enumerate_paths(&d.snapshot(date), &EnterpriseId::new(node), PathCaps { max_len: maxlen, max_paths })?;
            #[derive(Serialize)]
            struct Row<'a> {
                path: usize,
                step: usize,
                borrower: &'a EnterpriseId,
                guarantor: &'a EnterpriseId,
            }
            let rows: Vec<Row> = r
                .paths
                .iter()
                .enumerate()
                .flat_map(|(i, p)| {
                    p.windows(2).enumerate().map(move |(s, w)| Row { path: i, step: s, borrower: &w[0], guarantor: &w[1] })
                })
                .collect();
            out.emit(&r, &rows)
        }
        Command::Serve { port, host, workers } => {
            let d = dataset(&cli.data)?;
            let mut config = ServiceConfig::default();
            if let Some(w) = workers {
                config.workers = w;
            }
            let addr = SocketAddr::new(host, port);
            eprintln!("serving dataset {} on http://{addr}/api/v1", d.fingerprint);
            let state = AppState::new(d, &config);
            tokio::runtime::Runtime::new()?.block_on(glens::serve(state, addr))?;
            Ok(())
        }
    }
}

fn data_root(data: &Option<PathBuf>) -> Result<PathBuf> {
    data.clone().ok_or_else(|| glens::DatasetError::DatasetMissing.into())
}

fn dataset(data: &Option<PathBuf>) -> Result<Dataset> {
    let root = data_root(data)?;
    Dataset::load(&root).with_context(|| format!("loading dataset {}", root.display()))
}

fn join(ids: &[EnterpriseId], sep: &str) -> String {
    ids.iter().map(EnterpriseId::as_str).collect::<Vec<_>>().join(sep)
}

fn edge_list(m: &Motif) -> String {
    m.edges().iter().map(|(u, v)| format!("{u}>{v}")).collect::<Vec<_>>().join(" ")
}

struct Output {
    path: Option<PathBuf>,
    format: Format,
}

impl Output {
    /// JSON writes `json`; CSV writes one record per row.
    fn emit<J: Serialize, R: Serialize>(&self, json: &J, rows: &[R]) -> Result<()> {
        match self.format {
            Format::Json => {
                let mut buf = serde_json::to_vec_pretty(json)?;
                buf.push(b'\n');
                self.write(&buf)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    w.serialize(r)?;
                }
                self.write(&w.into_inner()?)
            }
        }
    }

    fn write(&self, bytes: &[u8]) -> Result<()> {
        match &self.path {
            Some(p) => write_file(p, bytes),
            None => {
                match std::io::stdout().lock().write_all(bytes) {
                    // Reader went away (`| head`); nothing left to do.
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                    r => Ok(r?),
                }
            }
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

