use clap::Parser;
use hazmap_cli::{run, Cli, Io};

fn main() {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let status = run(
        cli,
        &mut Io {
            out: &mut out,
            err: &mut err,
        },
    );
    std::process::exit(status.code());
}
