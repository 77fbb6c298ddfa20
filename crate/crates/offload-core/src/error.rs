//! Error types shared across the core modules.

use alloc::string::String;
use core::fmt;

/// A configuration field failed validation. Carries the offending field name
/// so callers can point at the exact entry in a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.message)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConfigError {}

/// A caller violated an operation precondition. These indicate bugs in the
/// calling layer (e.g. routing bits to the cloud for a device that never
/// offloaded), not bad user input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractError {
    /// Cloud-forwarding bit set for a device whose offload bit is clear.
    CloudWithoutOffload,
    /// A device was marked offloading but its uplink rate is zero; the
    /// allocation layer must assign positive bandwidth to every offloader.
    InfeasibleOffload,
    /// An allocation instance contained a non-positive beta coefficient.
    NonpositiveBeta,
    /// Objective evaluation hit an offloader with zero allocated bandwidth.
    ZeroAllocation,
    /// A relaxation budget fell outside `[0, S]`.
    BudgetOutOfRange,
}

impl fmt::Display for ContractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            ContractError::CloudWithoutOffload => {
                "cloud-forwarding decision set without the matching offload decision"
            }
            ContractError::InfeasibleOffload => "offloading device has zero uplink rate",
            ContractError::NonpositiveBeta => "allocation requires strictly positive betas",
            ContractError::ZeroAllocation => "offloader holds zero bandwidth fraction",
            ContractError::BudgetOutOfRange => "relaxation budget outside [0, S]",
        };
        f.write_str(msg)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ContractError {}
