//! Parallel bit extract on 64-bit words.
//!
//! `pext(word, mask)` gathers the bits of `word` selected by `mask` into the
//! low bits of the result, keeping their order. On x86-64 with BMI2 this is a
//! single instruction; elsewhere a loop over the set bits of the mask produces
//! the same result.
//!
//! Backend choice is made once, by [`detect_backend`], and carried around as a
//! [`PextBackend`] value. A `Hardware` backend can only be obtained on a CPU
//! that reports BMI2, which is what makes the hardware paths sound to call.

use std::fmt;
use std::str::FromStr;

use crate::error::BackendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackendKind {
    Hardware,
    Portable,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Hardware => "hw",
            BackendKind::Portable => "sw",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A resolved PEXT backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PextBackend {
    kind: BackendKind,
    forced: bool,
}

impl PextBackend {
    /// The portable backend is always available.
    pub const PORTABLE: PextBackend = PextBackend {
        kind: BackendKind::Portable,
        forced: true,
    };

    pub fn kind(self) -> BackendKind {
        self.kind
    }

    /// True when the backend came from configuration rather than detection.
    pub fn forced(self) -> bool {
        self.forced
    }

    #[inline]
    pub fn pext64(self, word: u64, mask: u64) -> u64 {
        match self.kind {
            #[cfg(target_arch = "x86_64")]
            // SAFETY: a Hardware backend is only constructed when BMI2 is present.
            BackendKind::Hardware => unsafe { pext64_bmi2(word, mask) },
            _ => pext64_portable(word, mask),
        }
    }
}

/// `--pext {auto|hw|sw}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PextPreference {
    #[default]
    Auto,
    Hardware,
    Portable,
}

impl PextPreference {
    pub fn force(self) -> Option<BackendKind> {
        match self {
            PextPreference::Auto => None,
            PextPreference::Hardware => Some(BackendKind::Hardware),
            PextPreference::Portable => Some(BackendKind::Portable),
        }
    }

    pub fn resolve(self) -> Result<PextBackend, BackendError> {
        detect_backend(self.force())
    }
}

impl FromStr for PextPreference {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(PextPreference::Auto),
            "hw" => Ok(PextPreference::Hardware),
            "sw" => Ok(PextPreference::Portable),
            other => Err(format!("unknown pext mode {other:?}, expected auto, hw or sw")),
        }
    }
}

impl fmt::Display for PextPreference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PextPreference::Auto => "auto",
            PextPreference::Hardware => "hw",
            PextPreference::Portable => "sw",
        })
    }
}

/// Whether this CPU reports BMI2.
pub fn bmi2_available() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        std::arch::is_x86_feature_detected!("bmi2")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

pub fn detect_backend(force: Option<BackendKind>) -> Result<PextBackend, BackendError> {
    let hw = bmi2_available();
    match force {
        None if hw => Ok(PextBackend {
            kind: BackendKind::Hardware,
            forced: false,
        }),
        None => Ok(PextBackend {
            kind: BackendKind::Portable,
            forced: false,
        }),
        Some(BackendKind::Hardware) if hw => Ok(PextBackend {
            kind: BackendKind::Hardware,
            forced: true,
        }),
        Some(BackendKind::Hardware) => Err(BackendError::ForcedUnavailable),
        Some(BackendKind::Portable) => Ok(PextBackend::PORTABLE),
    }
}

/// Software PEXT: walk the set bits of `mask` from the bottom.
#[inline]
pub fn pext64_portable(word: u64, mut mask: u64) -> u64 {
    let mut result = 0;
    let mut out_bit = 1u64;
    while mask != 0 {
        let lowest = mask & mask.wrapping_neg();
        if word & lowest != 0 {
            result |= out_bit;
        }
        out_bit <<= 1;
        mask &= mask - 1;
    }
    result
}

/// # Safety
///
/// The CPU must support BMI2.
#[cfg(target_arch = "x86_64")]
#[inline]
#[target_feature(enable = "bmi2")]
pub unsafe fn pext64_bmi2(word: u64, mask: u64) -> u64 {
    std::arch::x86_64::_pext_u64(word, mask)
}

/// Extraction strategy the bulk decoder is monomorphised over.
pub(crate) trait Extract {
    fn pext(word: u64, mask: u64) -> u64;
}

pub(crate) struct Portable;

impl Extract for Portable {
    #[inline(always)]
    fn pext(word: u64, mask: u64) -> u64 {
        pext64_portable(word, mask)
    }
}

/// Only used inside functions compiled with `target_feature(enable = "bmi2")`.
#[cfg(target_arch = "x86_64")]
pub(crate) struct Bmi2;

#[cfg(target_arch = "x86_64")]
impl Extract for Bmi2 {
    #[inline(always)]
    fn pext(word: u64, mask: u64) -> u64 {
        // SAFETY: callers are bmi2-enabled functions reached through a Hardware backend.
        unsafe { std::arch::x86_64::_pext_u64(word, mask) }
    }
}
