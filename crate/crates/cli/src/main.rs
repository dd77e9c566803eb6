use clap::Parser;

fn main() {
    let cli = calr3d::Cli::parse();
    match calr3d::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("calr3d: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
