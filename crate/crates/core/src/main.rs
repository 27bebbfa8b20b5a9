use std::io::ErrorKind;

use clap::Parser;

use eri_rbm::cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        // output piped into something like `head` that stopped reading
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == ErrorKind::BrokenPipe) => Ok(()),
        other => other,
    }
}
