//! Hardware cost model for the protocol's tag-side footprint.
//!
//! An L-bit tag needs the LFSR (4 gates/bit + 3 XOR gates), the arbiter PUF
//! (8 gates/bit + 4 gates), and a fixed 9-gate control block. Persistent
//! storage is the three L-bit secrets; a mutual authentication costs four
//! messages. Passive tags budget roughly 2000 gate equivalents for security,
//! which every supported key length fits under.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lfsr::{self, is_supported_width, SUPPORTED_WIDTHS};
use crate::puf;
use crate::Error;

/// Fixed control-logic overhead in gate equivalents.
pub const CONTROL_GATES: u32 = 9;

/// Gate budget available for security on a passive tag.
pub const GATE_BUDGET: u32 = 2000;

/// Messages in one mutual authentication.
pub const MESSAGES_PER_AUTH: u32 = 4;

/// Per-key-length cost summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub key_length: u16,
    pub lfsr_gates: u32,
    pub puf_gates: u32,
    pub alu_gates: u32,
    pub control_gates: u32,
    pub total_gates: u32,
    pub storage_bits: u32,
    pub messages_per_auth: u32,
    pub under_budget: bool,
}

/// Cost report for one supported key length.
pub fn estimate(key_length: u16) -> Result<ResourceReport, Error> {
    if !is_supported_width(key_length) {
        return Err(Error::UnsupportedWidth(key_length));
    }
    let lfsr_gates = lfsr::gate_cost(key_length);
    let puf_gates = puf::gate_cost(key_length);
    let alu_gates = lfsr_gates + puf_gates;
    let total_gates = alu_gates + CONTROL_GATES;
    Ok(ResourceReport {
        key_length,
        lfsr_gates,
        puf_gates,
        alu_gates,
        control_gates: CONTROL_GATES,
        total_gates,
        storage_bits: 3 * u32::from(key_length),
        messages_per_auth: MESSAGES_PER_AUTH,
        under_budget: total_gates <= GATE_BUDGET,
    })
}

/// Reports for every supported key length, ascending.
pub fn report_table() -> Vec<ResourceReport> {
    SUPPORTED_WIDTHS
        .iter()
        .map(|&w| estimate(w).expect("supported width"))
        .collect()
}

impl fmt::Display for ResourceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:>10} {:>6} {:>6} {:>6} {:>8} {:>6} {:>8} {:>9} {:>7}",
            self.key_length,
            self.lfsr_gates,
            self.puf_gates,
            self.alu_gates,
            self.control_gates,
            self.total_gates,
            self.storage_bits,
            self.messages_per_auth,
            if self.under_budget { "yes" } else { "NO" },
        )
    }
}

/// Aligned text table over any set of reports.
pub fn render_table(reports: &[ResourceReport]) -> String {
    let mut out = String::from(
        "key_length   lfsr    puf    alu  control  total  storage  messages  budget\n",
    );
    for report in reports {
        out.push_str(&report.to_string());
        out.push('\n');
    }
    out
}
