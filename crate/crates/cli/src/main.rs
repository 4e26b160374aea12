use clap::Parser;

fn main() {
    let cli = match kanewave::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { kanewave::exit::USAGE } else { kanewave::exit::OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(kanewave::execute(&cli.command));
}
