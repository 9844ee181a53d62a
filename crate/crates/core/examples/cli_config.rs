//! Drives the experiment runner from a TOML config, the same way the
//! `carleman-lab` binary does. Pass a config path, or run without arguments
//! to use a small built-in one.

use carleman_lab::harness::{parse_config, run, RunOptions};

const BUILT_IN: &str = r#"
command = "verify-identities"

[grid]
n = [8, 32, 128]

[ensemble]
samples = 20
master_seed = 1
"#;

fn main() {
    let text = match std::env::args().nth(1) {
        Some(p) => std::fs::read_to_string(p).expect("readable config"),
        None => BUILT_IN.to_string(),
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    println!("resolved config:\n{}", cfg.to_toml());
    let out = std::env::temp_dir().join("carleman-lab-example");
    match run(&cfg, &RunOptions { out_dir: Some(out), threads: None }) {
        Ok(o) => {
            println!("wrote {} rows to {}", o.table.rows.len(), o.csv.display());
            println!("summary: {}", serde_json::Value::Object(o.summary));
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
