//! Parsers for ranges, rule sources and initial configurations.

use std::fs;
use std::path::Path;

use qca::{encode_config, ConfigIndex, LatticeSpec, RuleTable, State};

use crate::Failure;

/// Inclusive range written as `a..b`, `a..=b` or a single value `a`.
pub fn parse_range<T>(s: &str) -> Result<(T, T), String>
where
    T: std::str::FromStr + PartialOrd + Copy,
{
    let one = |t: &str| {
        t.trim()
            .parse::<T>()
            .map_err(|_| format!("invalid range bound `{t}`"))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (one(a)?, one(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let v = one(s)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty range `{s}`"));
    }
    Ok((lo, hi))
}

/// A rule table file: the alphabet size followed by `s^3` outputs in
/// neighbourhood order `(a*s + b)*s + c`. `#` starts a comment.
pub fn read_rule_file(path: &Path) -> Result<RuleTable, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_rule_text(&text)
}

pub fn parse_rule_text(text: &str) -> Result<RuleTable, Failure> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let s: u32 = tokens
        .next()
        .ok_or_else(|| Failure::usage("empty rule file"))?
        .parse()
        .map_err(|_| Failure::usage("rule file must start with the alphabet size"))?;
    let outputs = tokens
        .map(|t| t.parse::<State>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::usage("rule file outputs must be integers"))?;
    RuleTable::new(s, outputs).map_err(|e| Failure::usage(e.to_string()))
}

/// Resolves `--init` against an optional `--size`, returning the lattice
/// and the initial configuration.
///
/// * `1`: a single non-zero cell at position 1
/// * `0b1011`: binary cells, cell 1 first; fixes `n` when no size is given
/// * `cells:0,2,1,...`: explicit digits; fixes `n` likewise
/// * `idx:k` or a plain decimal: configuration index
pub fn parse_init(
    init: &str,
    size: Option<usize>,
    alphabet: u32,
) -> Result<(LatticeSpec, ConfigIndex), Failure> {
    let spec_for = |n: usize| LatticeSpec::new(alphabet, n).map_err(Failure::usage_from);
    let digits: Option<Vec<State>> = if let Some(bits) = init.strip_prefix("0b") {
        Some(
            bits.chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Failure::usage(format!("bad binary digit `{c}`"))),
                })
                .collect::<Result<_, _>>()?,
        )
    } else if let Some(list) = init.strip_prefix("cells:") {
        Some(
            list.split(',')
                .map(|d| {
                    d.trim()
                        .parse::<State>()
                        .map_err(|_| Failure::usage(format!("bad cell `{d}`")))
                })
                .collect::<Result<_, _>>()?,
        )
    } else {
        None
    };
    if let Some(cells) = digits {
        let n = size.unwrap_or(cells.len());
        if n != cells.len() {
            return Err(Failure::usage(format!(
                "--init has {} cells but --size is {n}",
                cells.len()
            )));
        }
        let spec = spec_for(n)?;
        let idx = encode_config(&cells, &spec).map_err(Failure::usage_from)?;
        return Ok((spec, idx));
    }
    let n = size.ok_or_else(|| Failure::usage("--size is required for this --init form"))?;
    let spec = spec_for(n)?;
    let idx = if init == "1" {
        let mut cells = vec![0; n];
        cells[0] = 1;
        encode_config(&cells, &spec).map_err(Failure::usage_from)?
    } else {
        let k: u64 = init
            .strip_prefix("idx:")
            .unwrap_or(init)
            .parse()
            .map_err(|_| Failure::usage(format!("cannot parse --init `{init}`")))?;
        if k >= spec.config_count() {
            return Err(Failure::usage(format!(
                "--init index {k} out of range for {spec}"
            )));
        }
        ConfigIndex(k)
    };
    Ok((spec, idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range::<usize>("3..22"), Ok((3, 22)));
        assert_eq!(parse_range::<usize>("3..=22"), Ok((3, 22)));
        assert_eq!(parse_range::<usize>("40"), Ok((40, 40)));
        assert_eq!(parse_range::<u8>("0..255"), Ok((0, 255)));
        assert!(parse_range::<u8>("0..256").is_err());
        assert!(parse_range::<usize>("9..4").is_err());
        assert!(parse_range::<usize>("x").is_err());
    }

    #[test]
    fn init_forms() {
        let (spec, idx) = parse_init("0b1011", None, 2).unwrap();
        assert_eq!((spec.len(), idx), (4, ConfigIndex(11)));
        let (spec, idx) = parse_init("1", Some(5), 2).unwrap();
        assert_eq!((spec.len(), idx), (5, ConfigIndex(16)));
        let (_, idx) = parse_init("idx:1", Some(5), 2).unwrap();
        assert_eq!(idx, ConfigIndex(1));
        let (_, idx) = parse_init("7", Some(5), 2).unwrap();
        assert_eq!(idx, ConfigIndex(7));
        let (spec, idx) = parse_init("cells:0,2,1", None, 3).unwrap();
        assert_eq!((spec.len(), idx), (3, ConfigIndex(7)));
        assert!(parse_init("0b101", Some(4), 2).is_err());
        assert!(parse_init("0b12", None, 2).is_err());
        assert!(parse_init("64", Some(6), 2).is_err());
        assert!(parse_init("5", None, 2).is_err());
        assert!(parse_init("0b11", None, 2).is_err());
    }

    #[test]
    fn rule_text() {
        let r = parse_rule_text("2 # binary\n0 1 1 0 1 0 0 1\n").unwrap();
        assert_eq!(r.number().unwrap().value(), 150);
        assert!(parse_rule_text("2 0 1").is_err());
        assert!(parse_rule_text("").is_err());
        assert!(parse_rule_text("3 x").is_err());
    }
}
