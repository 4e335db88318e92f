use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;
use sens_service::{app, Store};

/// Local session service for the operator console.
#[derive(Parser)]
#[command(name = "sens-service", version)]
struct Args {
    #[arg(long, default_value_t = 8645)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Directory holding the session logs.
    #[arg(long, default_value = "sessions")]
    data_dir: PathBuf,
    /// Built UI assets to serve at /.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() {
    let args = Args::parse();
    let store = match Store::open(&args.data_dir) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("sens-service: cannot open {}: {e}", args.data_dir.display());
            std::process::exit(1);
        }
    };
    let addr = format!("{}:{}", args.host, args.port);
    let listener = match tokio::net::TcpListener::bind(&addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("sens-service: cannot bind {addr}: {e}");
            std::process::exit(1);
        }
    };
    eprintln!("listening on http://{addr}");
    if let Err(e) = axum::serve(listener, app(store, args.ui_dir)).await {
        eprintln!("sens-service: {e}");
        std::process::exit(1);
    }
}
