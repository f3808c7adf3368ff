//! Parsers for list-valued flags: `64,128,256`, `1..6` (inclusive) or a mix.

use std::str::FromStr;

/// Aliases keep clap from reading the flag as repeatable.
pub type UsizeList = Vec<usize>;
pub type U32List = Vec<u32>;

pub fn parse_list<T>(text: &str) -> Result<Vec<T>, String>
where
    T: FromStr + Copy + PartialOrd + TryFrom<u64> + Into<u64>,
{
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo: T = lo.trim().parse().map_err(|_| format!("bad range start in {part:?}"))?;
            let hi: T = hi.trim().parse().map_err(|_| format!("bad range end in {part:?}"))?;
            if lo > hi {
                return Err(format!("empty range {part:?}"));
            }
            for v in lo.into()..=hi.into() {
                out.push(T::try_from(v).map_err(|_| format!("{v} out of range"))?);
            }
        } else {
            out.push(part.parse().map_err(|_| format!("bad value {part:?}"))?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

pub fn usize_list(text: &str) -> Result<Vec<usize>, String> {
    parse_list::<u64>(text)?.into_iter().map(|v| usize::try_from(v).map_err(|e| e.to_string())).collect()
}

pub fn u32_list(text: &str) -> Result<Vec<u32>, String> {
    parse_list::<u32>(text)
}
