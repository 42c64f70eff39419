// Drive the command-line interface from code: solve a configuration, verify
// the written table, then tamper with it and watch verification fail.

use std::fs;
use std::path::PathBuf;

use plap_frac::cli;

const CONFIG: &str = r#"{
  "alpha": 1.5, "beta": 0.5, "lambda": 0.1, "p_lap": 2,
  "p_coef": "sin(t)", "q_coef": "0.3",
  "impulses": [{"t": 1, "I": "0.1*y+0.05", "I_star": "0"}],
  "mesh": {"nodes_per_subinterval": 64}
}"#;

#[derive(Debug)]
pub struct PipelineSummary {
    pub solve_exit: i32,
    pub verify_exit: i32,
    pub tampered_exit: i32,
    pub files: Vec<String>,
}

pub fn run_example() -> plap_frac::Result<PipelineSummary> {
    let dir = std::env::temp_dir().join(format!("plap-frac-pipeline-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    let config = dir.join("config.json");
    fs::write(&config, CONFIG)?;
    let arg = |p: &PathBuf| p.to_string_lossy().into_owned();
    let base = ["plap-frac".to_string(), "--config".into(), arg(&config), "--out".into(), arg(&dir)];

    let solve_exit = cli::run(base.iter().cloned().chain(["solve".into(), "--emit-svg".into()]));
    let verify_exit = cli::run(base.iter().cloned().chain(["verify".into()]));

    // shift every right-limit sample of the second piece by 1e-2
    let csv_path = dir.join("solution.csv");
    let text = fs::read_to_string(&csv_path)?;
    let tampered: Vec<String> = text
        .lines()
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.get(1) == Some(&"R") {
                let y: f64 = cols[2].parse().unwrap_or(0.0);
                format!("{},{},{:.16e},{}", cols[0], cols[1], y + 1e-2, cols[3])
            } else {
                line.to_string()
            }
        })
        .collect();
    let bad = dir.join("tampered.csv");
    fs::write(&bad, tampered.join("\n") + "\n")?;
    let tampered_exit =
        cli::run(base.iter().cloned().chain(["verify".into(), "--solution".into(), arg(&bad)]));

    let mut files: Vec<String> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    fs::remove_dir_all(&dir)?;
    Ok(PipelineSummary { solve_exit, verify_exit, tampered_exit, files })
}

#[allow(dead_code)]
fn main() -> plap_frac::Result<()> {
    println!("{:#?}", run_example()?);
    Ok(())
}
