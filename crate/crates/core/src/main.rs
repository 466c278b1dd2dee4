use clap::Parser;

fn main() {
    let cli = qobj_emu::cli::Cli::parse();
    let code = qobj_emu::cli::execute(cli, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
