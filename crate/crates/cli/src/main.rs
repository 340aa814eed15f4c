use std::io::Write;

fn main() {
    let out = slimc::run(std::env::args_os());
    let text = out.render();
    // a closed pipe downstream is not our failure; keep the exit code
    if !text.is_empty() {
        let _ = writeln!(std::io::stdout(), "{text}");
    }
    if let Some(m) = &out.message {
        let _ = writeln!(std::io::stderr(), "{m}");
    }
    std::process::exit(out.code);
}
