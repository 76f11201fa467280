//! Resource guards for enumeration, lattice counting and coefficient growth.
//!
//! `PARTLAB_WORK_LIMIT` accepts either a bare integer, which sets the lattice
//! work and coefficient-bit budgets together, or comma-separated `key=value`
//! pairs with keys `enum_n`, `set_n`, `lattice`, `bits`, `sim_n`,
//! `stationary_n`.

use crate::error::{Error, Result};

pub const WORK_LIMIT_ENV: &str = "PARTLAB_WORK_LIMIT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkLimits {
    /// Largest n for full enumeration of Ω_n.
    pub enumeration_n: usize,
    /// Largest n for set-partition enumeration of [n].
    pub set_partition_n: usize,
    /// Cap on the lattice box size (2⌊√j⌋+1)^d for r_d(j).
    pub lattice_work: u64,
    /// Cap on the total bit size of a series' coefficients.
    pub coefficient_bits: u64,
    pub simulation_n: usize,
    pub stationary_n: usize,
}

impl Default for WorkLimits {
    fn default() -> Self {
        Self {
            enumeration_n: 40,
            set_partition_n: 10,
            lattice_work: 100_000_000,
            coefficient_bits: 2_000_000_000,
            simulation_n: 60,
            stationary_n: 12,
        }
    }
}

impl WorkLimits {
    pub fn from_env() -> Result<Self> {
        match std::env::var(WORK_LIMIT_ENV) {
            Ok(v) => Self::parse(&v),
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut limits = Self::default();
        let text = text.trim();
        if text.is_empty() {
            return Ok(limits);
        }
        let bad = |what: &str| Error::Domain(format!("{WORK_LIMIT_ENV}: cannot parse {what:?}"));
        if let Ok(units) = text.parse::<u64>() {
            limits.lattice_work = units;
            limits.coefficient_bits = units;
            return Ok(limits);
        }
        for item in text.split(',') {
            let (key, value) = item.split_once('=').ok_or_else(|| bad(item))?;
            let value: u64 = value.trim().parse().map_err(|_| bad(item))?;
            match key.trim() {
                "enum_n" => limits.enumeration_n = value as usize,
                "set_n" => limits.set_partition_n = value as usize,
                "lattice" => limits.lattice_work = value,
                "bits" => limits.coefficient_bits = value,
                "sim_n" => limits.simulation_n = value as usize,
                "stationary_n" => limits.stationary_n = value as usize,
                _ => return Err(bad(item)),
            }
        }
        Ok(limits)
    }

    pub fn check_enumeration(&self, n: usize) -> Result<()> {
        if n > self.enumeration_n {
            return Err(Error::WorkLimit(format!(
                "enumeration of Ω_{n} refused (limit n ≤ {})",
                self.enumeration_n
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        let l = WorkLimits::parse("5000").unwrap();
        assert_eq!(l.lattice_work, 5000);
        assert_eq!(l.coefficient_bits, 5000);
        let l = WorkLimits::parse("enum_n=12, sim_n=8").unwrap();
        assert_eq!(l.enumeration_n, 12);
        assert_eq!(l.simulation_n, 8);
        assert!(WorkLimits::parse("nope=3").is_err());
        assert!(l.check_enumeration(13).is_err());
    }
}
