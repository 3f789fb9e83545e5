use std::io::{self, BufReader};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut input = BufReader::new(io::stdin());
    let code = xforge_cli::main_with(&args, &mut stdout.lock(), &mut stderr.lock(), &mut input);
    std::process::exit(code);
}
