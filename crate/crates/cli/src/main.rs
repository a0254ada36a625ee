use std::io::{IsTerminal, Write};

fn main() {
    let stdout = std::io::stdout();
    let style = viewcheck::Style {
        color: std::env::var_os("NO_COLOR").is_none() && stdout.is_terminal(),
        timings: true,
    };
    let (code, out) = viewcheck::run_styled(std::env::args_os().skip(1), style);
    let _ = stdout.lock().write_all(out.as_bytes());
    std::process::exit(code);
}
