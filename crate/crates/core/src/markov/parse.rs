//! Plain-text rule programs.
//!
//! ```text
//! # comment
//! [one limit=3]
//! _=>0
//! [all]
//! 0_=>.0 rot
//! ```
//!
//! Labels 0-61 are written `0`-`9`, `A`-`Z`, `a`-`z`, and `_` is the blank
//! label. Inputs may use `?` to match anything and outputs may use `.` to
//! keep the matched cell. Rows are separated by `/`. The flags `rot` and
//! `ref` add rotated and mirrored variants.

use super::{InCell, NodeKind, OutCell, RewriteRule, RuleNode, RuleProgram};
use crate::error::{Error, Result};
use crate::raster::Label;

const DIGITS: &[u8] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

pub fn symbol_label(c: char, blank: Label) -> Option<Label> {
    if c == '_' {
        return Some(blank);
    }
    DIGITS
        .iter()
        .position(|&d| d as char == c)
        .map(|p| p as Label)
}

pub fn label_symbol(label: Label, blank: Label) -> Option<char> {
    if label == blank {
        return Some('_');
    }
    DIGITS.get(label as usize).map(|&d| d as char)
}

fn parse_grid(text: &str, line: usize) -> Result<(usize, usize, Vec<char>)> {
    let rows: Vec<&str> = text.split('/').collect();
    let width = rows[0].chars().count();
    if width == 0 || rows.iter().any(|r| r.chars().count() != width) {
        return Err(Error::invalid(format!(
            "line {line}: rule rows must be non-empty and equally long"
        )));
    }
    Ok((
        width,
        rows.len(),
        rows.iter().flat_map(|r| r.chars()).collect(),
    ))
}

fn parse_rule(text: &str, line: usize, blank: Label) -> Result<RewriteRule> {
    let mut words = text.split_whitespace();
    let body = words.next().unwrap_or_default();
    let (mut rot, mut refl) = (false, false);
    for flag in words {
        match flag {
            "rot" => rot = true,
            "ref" => refl = true,
            _ => {
                return Err(Error::invalid(format!(
                    "line {line}: unknown rule flag {flag:?}"
                )))
            }
        }
    }
    let (lhs, rhs) = body
        .split_once("=>")
        .ok_or_else(|| Error::invalid(format!("line {line}: expected IN=>OUT")))?;
    let (w, h, ins) = parse_grid(lhs, line)?;
    let (ow, oh, outs) = parse_grid(rhs, line)?;
    if (w, h) != (ow, oh) {
        return Err(Error::invalid(format!(
            "line {line}: input is {w}x{h} but output is {ow}x{oh}"
        )));
    }
    let bad = |c: char| Error::invalid(format!("line {line}: unexpected symbol {c:?}"));
    let input = ins
        .into_iter()
        .map(|c| match c {
            '?' => Ok(InCell::Any),
            _ => symbol_label(c, blank).map(InCell::Is).ok_or_else(|| bad(c)),
        })
        .collect::<Result<Vec<_>>>()?;
    let output = outs
        .into_iter()
        .map(|c| match c {
            '.' => Ok(OutCell::Keep),
            _ => symbol_label(c, blank)
                .map(OutCell::Set)
                .ok_or_else(|| bad(c)),
        })
        .collect::<Result<Vec<_>>>()?;
    RewriteRule::new(w, h, input, output, rot, refl)
        .map_err(|e| Error::invalid(format!("line {line}: {e}")))
}

fn parse_header(text: &str, line: usize) -> Result<(NodeKind, Option<usize>)> {
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::invalid(format!("line {line}: malformed node header")))?;
    let mut words = inner.split_whitespace();
    let kind = match words.next() {
        Some("one") => NodeKind::One,
        Some("all") => NodeKind::All,
        other => {
            return Err(Error::invalid(format!(
                "line {line}: unknown node kind {other:?}"
            )))
        }
    };
    let mut limit = None;
    for w in words {
        let value = w
            .strip_prefix("limit=")
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::invalid(format!("line {line}: bad node option {w:?}")))?;
        limit = Some(value);
    }
    Ok((kind, limit))
}

pub fn parse_program(text: &str, blank: Label) -> Result<RuleProgram> {
    let mut nodes: Vec<(NodeKind, Option<usize>, Vec<RewriteRule>, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or_default().trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            let (kind, limit) = parse_header(content, line)?;
            nodes.push((kind, limit, Vec::new(), line));
        } else {
            let rule = parse_rule(content, line, blank)?;
            let node = nodes.last_mut().ok_or_else(|| {
                Error::invalid(format!("line {line}: rule appears before any node header"))
            })?;
            node.2.push(rule);
        }
    }
    let nodes = nodes
        .into_iter()
        .map(|(kind, limit, rules, line)| {
            RuleNode::new(kind, rules, limit)
                .map_err(|e| Error::invalid(format!("line {line}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    RuleProgram::new(nodes)
}

pub fn format_program(program: &RuleProgram, blank: Label) -> Result<String> {
    let sym = |l: Label| {
        label_symbol(l, blank)
            .ok_or_else(|| Error::invalid(format!("label {l} has no text symbol")))
    };
    let mut out = String::new();
    for node in program.nodes() {
        out.push_str(match node.kind {
            NodeKind::One => "[one",
            NodeKind::All => "[all",
        });
        if let Some(lim) = node.step_limit {
            out.push_str(&format!(" limit={lim}"));
        }
        out.push_str("]\n");
        for rule in &node.rules {
            let b = rule.base();
            for (y, row) in b.input.chunks(b.width).enumerate() {
                if y > 0 {
                    out.push('/');
                }
                for c in row {
                    out.push(match c {
                        InCell::Is(l) => sym(*l)?,
                        InCell::Any => '?',
                    });
                }
            }
            out.push_str("=>");
            for (y, row) in b.output.chunks(b.width).enumerate() {
                if y > 0 {
                    out.push('/');
                }
                for c in row {
                    out.push(match c {
                        OutCell::Set(l) => sym(*l)?,
                        OutCell::Keep => '.',
                    });
                }
            }
            if rule.rotations() {
                out.push_str(" rot");
            }
            if rule.reflections() {
                out.push_str(" ref");
            }
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str =
        "# seeds first\n[one limit=2]\n_=>0\n\n[all]\n0_=>.0 rot  # grow\n0?/?_=>../.0 rot ref\n";

    #[test]
    fn parses_nodes_and_rules() {
        let p = parse_program(TEXT, 5).unwrap();
        assert_eq!(p.nodes().len(), 2);
        assert_eq!(p.nodes()[0].kind, NodeKind::One);
        assert_eq!(p.nodes()[0].step_limit, Some(2));
        assert_eq!(p.nodes()[0].rules[0].base().input, vec![InCell::Is(5)]);
        let diag = p.nodes()[1].rules[1].base();
        assert_eq!((diag.width, diag.height), (2, 2));
        assert_eq!(diag.input[1], InCell::Any);
        assert_eq!(diag.output[3], OutCell::Set(0));
    }

    #[test]
    fn round_trip() {
        let p = parse_program(TEXT, 5).unwrap();
        let text = format_program(&p, 5).unwrap();
        assert_eq!(
            text,
            "[one limit=2]\n_=>0\n[all]\n0_=>.0 rot\n0?/?_=>../.0 rot ref\n"
        );
        assert_eq!(parse_program(&text, 5).unwrap(), p);
    }

    #[test]
    fn symbols() {
        assert_eq!(symbol_label('Z', 99), Some(35));
        assert_eq!(symbol_label('z', 99), Some(61));
        assert_eq!(label_symbol(36, 99), Some('a'));
        assert_eq!(label_symbol(62, 99), None);
        assert_eq!(label_symbol(62, 62), Some('_'));
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, needle) in [
            ("0=>1", "before any node"),
            ("[some]\n0=>1", "line 1"),
            ("[all]\n0=>1 spin", "line 2"),
            ("[all]\n01=>1", "line 2"),
            ("[all]\n0.=>1?", "line 2"),
            ("[all]\n0=>0", "line 2"),
            ("[all limit=0]\n0=>1", "line 1"),
            ("[all]\n", "line 1"),
        ] {
            let msg = parse_program(text, 9).unwrap_err().to_string();
            assert!(msg.contains(needle), "{text:?}: {msg}");
        }
        assert!(parse_program("# nothing\n", 9).is_err());
    }
}
