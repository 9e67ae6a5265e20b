use std::io::Write;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (code, output) = jring_cli::run_command(std::env::args_os().skip(1));
    let mut sink: Box<dyn Write> = if code >= jring_cli::EXIT_PRECONDITION {
        Box::new(std::io::stderr().lock())
    } else {
        Box::new(std::io::stdout().lock())
    };
    let _ = sink.write_all(output.as_bytes());
    if !output.ends_with('\n') {
        let _ = sink.write_all(b"\n");
    }
    let _ = sink.flush();
    std::process::exit(code);
}
