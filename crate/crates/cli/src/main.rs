use clap::Parser;

fn main() {
    let args = match swipt_sim::Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(swipt_sim::main_with_args(args));
}
