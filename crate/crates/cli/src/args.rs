use std::str::FromStr;

use qdfsim::pipeline::PostselectMode;
use qdfsim::qsve::{Backend, DEFAULT_CIRCUIT_CAP};

use crate::Failure;

pub const CAP_ENV: &str = "QDFSIM_CIRCUIT_CAP";

pub fn parse_backend(s: &str) -> Result<Backend, String> {
    Backend::from_str(s).map_err(|e| e.to_string())
}

pub fn parse_postselect(s: &str) -> Result<PostselectMode, String> {
    PostselectMode::from_str(s).map_err(|e| e.to_string())
}

/// Circuit cap from the environment, or the default.
pub fn circuit_cap() -> Result<usize, Failure> {
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| Failure::validation(format!("{CAP_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(DEFAULT_CIRCUIT_CAP),
    }
}

/// Parses `a,b,c` where items may also be half-open ranges `lo..hi`.
pub fn parse_u64_list(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| format!("bad range start in '{item}'"))?;
            let hi: u64 = hi.trim().parse().map_err(|_| format!("bad range end in '{item}'"))?;
            out.extend(lo..hi);
        } else {
            out.push(item.parse().map_err(|_| format!("not an integer: '{item}'"))?);
        }
    }
    Ok(out)
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| format!("'{t}': {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_u64_list("1,3..6, 9").unwrap(), vec![1, 3, 4, 5, 9]);
        assert!(parse_u64_list("1,x").is_err());
        assert_eq!(parse_list::<f64>("0.1, 0.5").unwrap(), vec![0.1, 0.5]);
        assert!(parse_list::<usize>("").unwrap().is_empty());
    }
}
