//! `phasecart` command-line front end.

mod run;

fn main() {
    let code = run::run(std::env::args_os());
    std::process::exit(code);
}
