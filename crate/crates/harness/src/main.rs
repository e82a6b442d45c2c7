use clap::Parser;
use wpbc_harness::cli::{run, Cli, Finished, EXIT_NUMERICAL};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(done) => {
            match &done {
                Finished::Ran { dir, output } => {
                    for t in &output.tables {
                        println!("wrote {}/{}.csv ({} rows)", dir.display(), t.name, t.rows.len());
                    }
                    if !output.any_feasible {
                        eprintln!("no feasible point in the sweep");
                    }
                }
                Finished::Replayed { dir, files } => {
                    println!("replay into {} matched {} file(s): {}", dir.display(), files.len(), files.join(", "));
                }
            }
            std::process::exit(done.exit_code());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(if e.is_numerical() { EXIT_NUMERICAL } else { 1 });
        }
    }
}
