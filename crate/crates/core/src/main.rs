use clap::Parser;

use tailmix::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("TAILMIX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if threads > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
                log::warn!("could not size the worker pool: {e}");
            }
        }
    }
    std::process::exit(run(&cli));
}
