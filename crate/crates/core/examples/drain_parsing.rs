//! Mines templates from a synthetic BGL-style log with Drain.

use qlogad::logpipe::{
    generate_bgl, parse_lines, parse_raw_text, DrainConfig, LogFormat, SyntheticConfig,
};

fn main() -> qlogad::Result<()> {
    let log = generate_bgl(&SyntheticConfig {
        windows: 40,
        ..SyntheticConfig::default()
    })?;
    let text = log.to_text();
    println!("first raw line: {}", text.lines().next().unwrap_or(""));
    let lines = parse_raw_text(&text, LogFormat::Bgl)?;
    let parsed = parse_lines(&lines, DrainConfig::default())?;
    println!(
        "{} lines -> {} templates",
        parsed.records.len(),
        parsed.templates.len()
    );
    for t in &parsed.templates {
        println!("  {:>3}  {}", t.id, t.pattern());
    }
    let alerts = parsed.alerts().iter().filter(|&&a| a).count();
    println!("{alerts} alert lines");
    Ok(())
}
