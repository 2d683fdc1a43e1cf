//! JSON-in/JSON-out command line for the fcrystal library.
//!
//! Every subcommand reads exact data (rationals as "a/b" strings, Laurent
//! polynomials and matrices per the library schema), prints one JSON object
//! on stdout and exits 0 on success/true, 1 on a verified negative, 2 on
//! invalid input, 3 on budget exhaustion.

mod args;
mod cmds;

use clap::Parser;

fn main() {
    let cli = args::Cli::parse();
    let code = match cmds::run(cli) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.payload).unwrap());
            outcome.code
        }
        Err(e) => {
            let obj = serde_json::json!({ "error": e.to_string() });
            println!("{}", serde_json::to_string_pretty(&obj).unwrap());
            e.exit_code()
        }
    };
    std::process::exit(code);
}
