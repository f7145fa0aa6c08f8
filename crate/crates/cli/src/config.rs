//! `--config FILE` support.
//!
//! The file holds `key = value` lines (`#` starts a comment). Each pair is
//! turned into `--key value` and placed before the flags given on the command
//! line, so explicit flags win. `key = true` becomes a bare `--key` and
//! `key = false` is dropped.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use micrograin::Error;

pub fn inject(argv: Vec<OsString>) -> Result<Vec<OsString>, Error> {
    // argv[0] is the program, argv[1] the subcommand
    if argv.len() < 3 {
        return Ok(argv);
    }
    let mut rest: Vec<OsString> = Vec::new();
    let mut config: Option<PathBuf> = None;
    let mut iter = argv[2..].iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--" {
            rest.push(arg.clone());
            rest.extend(iter.by_ref().cloned());
            break;
        }
        if text == "--config" {
            let path = iter
                .next()
                .ok_or_else(|| Error::InvalidInput("--config needs a file path".into()))?;
            config = Some(PathBuf::from(path));
        } else if let Some(path) = text.strip_prefix("--config=") {
            config = Some(PathBuf::from(path));
        } else {
            rest.push(arg.clone());
        }
    }
    let Some(path) = config else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let mut out = argv[..2].to_vec();
    out.extend(parse(&text).map_err(|m| Error::InvalidInput(format!("{}: {m}", path.display())))?);
    out.extend(rest);
    Ok(out)
}

fn parse(text: &str) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(format!("line {}: invalid key", i + 1));
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_become_flags() {
        let flags = parse(
            "# c\nseed = 7\nno_refine = true\nrotations = false\n\nmethod=nearest_voronoi # x\n",
        )
        .unwrap();
        let flags: Vec<String> = flags
            .into_iter()
            .map(|f| f.into_string().unwrap())
            .collect();
        assert_eq!(
            flags,
            ["--seed", "7", "--no-refine", "--method", "nearest_voronoi"]
        );
        assert!(parse("seed 7").is_err());
        assert!(parse("config = x").is_err());
    }
}
