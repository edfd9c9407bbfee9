use ramsey::cli::execute;

fn main() {
    let outcome = execute(std::env::args_os());
    if let Some(m) = outcome.message {
        if outcome.code == 0 {
            println!("{m}");
        } else {
            eprintln!("{m}");
        }
    }
    std::process::exit(outcome.code);
}
