use clap::Parser;
use rough_heat::cli::{run, RunManifest};

fn main() {
    let manifest = RunManifest::parse();
    let level = if manifest.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    std::process::exit(run(&manifest));
}
