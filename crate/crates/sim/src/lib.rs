//! File formats, experiment presets and the sweep runner around
//! [`cv2x_aoi_core`]. The `cv2x-aoi` binary is a thin layer over this crate.

pub mod configfile;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;

pub use error::{Error, Result};
pub use output::{EmitOptions, Format, SummaryRecord};
pub use runner::{run_cells, CellResult, CellStats};

use std::ops::RangeInclusive;

/// Parses `N`, `N..M` or `N..=M`; both bounds are inclusive.
pub fn parse_seed_range(s: &str) -> Result<RangeInclusive<u64>> {
    let bad = || Error::Usage(format!("bad seed range `{s}`, expected N..M"));
    let int = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    let range = match s.split_once("..") {
        None => int(s)?..=int(s)?,
        Some((a, b)) => int(a)?..=int(b.strip_prefix('=').unwrap_or(b))?,
    };
    if range.is_empty() {
        return Err(bad());
    }
    Ok(range)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seed_range("1..10").unwrap(), 1..=10);
        assert_eq!(parse_seed_range("3..=4").unwrap(), 3..=4);
        assert_eq!(parse_seed_range("7").unwrap(), 7..=7);
        assert!(parse_seed_range("5..2").is_err());
        assert!(parse_seed_range("a..b").is_err());
    }
}
