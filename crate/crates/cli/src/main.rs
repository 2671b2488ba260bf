use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use iscg_cli::{exit, run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} threads: {e}");
            return ExitCode::from(exit::INPUT as u8);
        }
    }
    let result = run(&cli.command).and_then(|output| {
        let printed = output.emit(cli.command.out_path())?.map(str::to_owned);
        Ok((output, printed))
    });
    match result {
        Ok((output, printed)) => {
            for line in &output.summary {
                eprintln!("{line}");
            }
            if let Some(json) = printed {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(json.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                    return ExitCode::from(exit::INPUT as u8);
                }
            }
            ExitCode::from(output.code as u8)
        }
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    if let Some(hint) = e.guidance() {
        eprintln!("hint: {hint}");
    }
    ExitCode::from(e.exit_code() as u8)
}
