use std::io::Write;
use std::path::Path;

use crate::error::{io_error, CliError};

/// Renders a CSV table as a GitHub-style Markdown table.
pub fn csv_to_markdown(csv_text: &str) -> Result<String, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(csv_text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Config(format!("table rendering: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut out = format!("| {} |\n|{}\n", header.join(" | "), " --- |".repeat(header.len()));
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Config(format!("table rendering: {e}")))?;
        out.push_str(&format!("| {} |\n", rec.iter().collect::<Vec<_>>().join(" | ")));
    }
    Ok(out)
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_error(path.display(), e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| io_error("stdout", e))?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n").map_err(|e| io_error("stdout", e))?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markdown_has_header_rule_and_rows() {
        let md = csv_to_markdown("a,b\n1,2\n3,4\n").unwrap();
        assert_eq!(md, "| a | b |\n| --- | --- |\n| 1 | 2 |\n| 3 | 4 |\n");
    }
}
