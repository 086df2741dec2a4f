use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use lava_server::files::{read_events, write_lines, FileFormat};
use lava_server::state::{AppState, Settings};
use lava_server::synth::{generate, SynthConfig};
use lava_server::api;

#[derive(Parser)]
#[command(name = "lava", version, about = "Learning analytics indicator engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
        /// Public URL used in embed snippets (defaults to the request Host).
        #[arg(long)]
        base_url: Option<String>,
        #[arg(long, env = "LAVA_ADMIN_TOKEN", hide_env_values = true)]
        admin_token: Option<String>,
        /// Directory with the built editor, served under /app.
        #[arg(long)]
        app_dir: Option<PathBuf>,
    },
    /// Load events from a file into a data directory (the service must not be running on it).
    Ingest {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value = "lines")]
        format: FileFormat,
        #[arg(long, default_value = "data")]
        data_dir: PathBuf,
    },
    /// Write a synthetic course as JSON lines.
    Synth {
        #[arg(long, default_value_t = 50)]
        students: u32,
        #[arg(long, default_value_t = 20)]
        materials: u32,
        #[arg(long, default_value_t = 5)]
        assignments: u32,
        #[arg(long, default_value_t = 12)]
        weeks: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the planted groups as JSON.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("lava: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<(), String> {
    match command {
        Command::Serve { port, bind, data_dir, base_url, admin_token, app_dir } => {
            let mut settings = Settings::new(data_dir);
            settings.base_url = base_url.map(|u| u.trim_end_matches('/').to_string());
            settings.admin_token = admin_token.filter(|t| !t.is_empty());
            settings.app_dir = app_dir;
            if settings.admin_token.is_none() {
                tracing::warn!("no admin token set; event ingest over HTTP is disabled");
            }
            let state = AppState::open(settings).map_err(|e| e.to_string())?;
            let addr: SocketAddr = format!("{bind}:{port}").parse().map_err(|e| format!("bad address: {e}"))?;
            serve(Arc::new(state), addr)
        }
        Command::Ingest { file, format, data_dir } => {
            let items = read_events(&file, format).map_err(|e| e.to_string())?;
            let state = AppState::open(Settings::new(data_dir)).map_err(|e| e.to_string())?;
            let report = state.ingest(items).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
            Ok(())
        }
        Command::Synth { students, materials, assignments, weeks, seed, out, truth } => {
            let (events, planted) = generate(&SynthConfig { students, materials, assignments, weeks, seed });
            write_lines(&out, &events).map_err(|e| format!("{}: {e}", out.display()))?;
            if let Some(path) = truth {
                let json = serde_json::to_vec_pretty(&planted).expect("truth serializes");
                std::fs::write(&path, json).map_err(|e| format!("{}: {e}", path.display()))?;
            }
            eprintln!("wrote {} events to {}", events.len(), out.display());
            Ok(())
        }
    }
}

fn serve(state: Arc<AppState>, addr: SocketAddr) -> Result<(), String> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| format!("{addr}: {e}"))?;
        let local = listener.local_addr().map_err(|e| e.to_string())?;
        tracing::info!(%local, "listening");
        // Scripts that start us on port 0 read the address from stdout.
        println!("listening on http://{local}");
        axum::serve(listener, api::router(state))
            .with_graceful_shutdown(shutdown())
            .await
            .map_err(|e| e.to_string())
    })
}

async fn shutdown() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        if let Ok(mut s) = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            s.recv().await;
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    tracing::info!("shutting down");
}
