//! Runs a JSON config the same way the `rydmol` binary does, printing the primary output.
//!
//! `cargo run --example run_config -- crates/rydmol/examples/configs/budget_caf.json`

fn main() -> rydmol::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/budget_caf.json").to_string());
    let text = std::fs::read_to_string(&path)?;
    print!("{}", rydmol::run::run_text(&text, None)?);
    Ok(())
}
