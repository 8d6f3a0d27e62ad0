//! Builds an experiment from a flat dotted-key config with command-line style overrides,
//! and runs the Lagrangian evaluation it describes into a temporary directory.

use om_diffusion::cli::{cmd_om_eval, ExperimentConfig};

const CONFIG: &str = r#"
horizon = 0.2
family.name = "sphere"
family.dim = 2
family.alpha = -2.0
curve.kind = "constant"
curve.point = [0.0, 0.0]
"#;

fn main() -> om_diffusion::Result<()> {
    let overrides = vec!["curve.point=[0.5, 0.5]".to_string(), "om.steps=200".to_string()];
    let cfg = ExperimentConfig::parse(CONFIG, &overrides, None)?;
    print!("{}", cfg.emit()?);
    let dir = std::env::temp_dir().join("om-diffusion-example");
    std::fs::create_dir_all(&dir)?;
    let report = cmd_om_eval(&cfg, &dir)?;
    println!("action {} (files in {})", report["action"], dir.display());
    Ok(())
}
