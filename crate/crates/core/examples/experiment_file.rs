//! Loading an experiment file and printing the head of its trace.

use fosgd::cli::Experiment;

fn main() -> fosgd::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/experiments/nonconvex64.toml");
    let exp = Experiment::load(path)?;
    let trace = exp.run(0)?;
    for line in trace.to_csv_string().lines().take(4) {
        println!("{line}");
    }
    println!("...");
    print!("{}", trace.summary.to_key_values());
    Ok(())
}
