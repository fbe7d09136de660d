use std::io;

fn main() {
    let code = priority_tree::cli::main_with(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
