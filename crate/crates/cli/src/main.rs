use std::io::Write;

fn main() {
    // panics are reported through the exit code, not the default hook
    std::panic::set_hook(Box::new(|_| {}));
    let out = ramond_cli::run(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}
