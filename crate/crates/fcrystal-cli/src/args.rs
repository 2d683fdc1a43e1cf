//! Argument surface: subcommands, global flags, and input conventions.
//! Matrix/lattice arguments accept inline JSON or `@path` to a JSON file.

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "fcrystal", version, about = "Exact invariants of Frobenius-twisted lattices")]
pub struct Cli {
    /// Field parameters p,e,m for L = F_{q^m}((t)) with q = p^e
    #[arg(long, global = true, default_value = "2,1,1")]
    pub field: String,

    /// Emit the verification trail alongside the result
    #[arg(long, global = true)]
    pub transcript: bool,

    /// Search budget (node expansions); FCRYSTAL_BUDGET sets the default
    #[arg(long, global = true)]
    pub budget: Option<u64>,

    /// Seed for randomized searches
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Hodge vector: relative position of a lattice and its image under v ↦ b·σ^s(v)
    Hodge {
        /// Operator matrix b (inline JSON or @file)
        #[arg(long)]
        b: String,
        /// Frobenius power s in the twist
        #[arg(long, default_value_t = 1)]
        twist: i64,
        /// Lattice basis matrix (inline JSON or @file); defaults to O^n
        #[arg(long)]
        lattice: Option<String>,
    },
}
