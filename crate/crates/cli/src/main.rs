use clap::Parser;

fn main() {
    let cli = hamdiet_cli::Cli::parse();
    match hamdiet_cli::execute(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
