use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::http::HeaderValue;
use clap::Parser;
use tension_core::io::load_model;
use tension_core::SimulationConfig;
use tension_server::{app, AppState};

#[derive(Parser)]
#[command(
    name = "tension-server",
    version,
    about = "HTTP API for the narrative authoring workbench"
)]
struct Args {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Model to open as a session at startup; its id is printed.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Origin allowed by CORS. Any origin when omitted.
    #[arg(long)]
    ui_origin: Option<String>,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args = Args::parse();
    let state = Arc::new(AppState::default());
    if let Some(path) = &args.model {
        let system = load_model(&std::fs::read_to_string(path)?)?;
        let id = state.create_session(system, SimulationConfig::default());
        println!("session {id}");
    }

    let origin = args.ui_origin.as_deref().map(HeaderValue::from_str).transpose()?;

    let addr = SocketAddr::new(args.host, args.port);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    println!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app(state, origin)).await?;
    Ok(())
}
