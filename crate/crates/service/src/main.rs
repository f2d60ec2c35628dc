fn main() {
    let stdin = std::io::stdin();
    let code = witness_resolve_service::cli::run(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    std::process::exit(code);
}
