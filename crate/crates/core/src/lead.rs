use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The 12 standard ECG leads, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LeadId {
    I,
    II,
    III,
    #[serde(rename = "aVR")]
    AVR,
    #[serde(rename = "aVL")]
    AVL,
    #[serde(rename = "aVF")]
    AVF,
    V1,
    V2,
    V3,
    V4,
    V5,
    V6,
}

impl LeadId {
    pub const ALL: [LeadId; 12] = [
        LeadId::I,
        LeadId::II,
        LeadId::III,
        LeadId::AVR,
        LeadId::AVL,
        LeadId::AVF,
        LeadId::V1,
        LeadId::V2,
        LeadId::V3,
        LeadId::V4,
        LeadId::V5,
        LeadId::V6,
    ];

    /// Chest leads whose distances enter the BSW decision.
    pub const DECISION: [LeadId; 3] = [LeadId::V1, LeadId::V5, LeadId::V6];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            LeadId::I => "I",
            LeadId::II => "II",
            LeadId::III => "III",
            LeadId::AVR => "aVR",
            LeadId::AVL => "aVL",
            LeadId::AVF => "aVF",
            LeadId::V1 => "V1",
            LeadId::V2 => "V2",
            LeadId::V3 => "V3",
            LeadId::V4 => "V4",
            LeadId::V5 => "V5",
            LeadId::V6 => "V6",
        }
    }
}

impl fmt::Display for LeadId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LeadId {
    type Err = Error;

    /// Accepts the canonical names case-insensitively ("AVR", "avr", "aVR").
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        LeadId::ALL
            .iter()
            .copied()
            .find(|l| l.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownLead(s.to_string()))
    }
}

/// Diagnostic class of a record, if known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Normal,
    #[serde(rename = "LVH")]
    Lvh,
    Unknown,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Normal => "Normal",
            Label::Lvh => "LVH",
            Label::Unknown => "Unknown",
        }
    }

    pub fn class(self) -> Option<ClassLabel> {
        match self {
            Label::Normal => Some(ClassLabel::Normal),
            Label::Lvh => Some(ClassLabel::Lvh),
            Label::Unknown => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "norm" => Ok(Label::Normal),
            "lvh" => Ok(Label::Lvh),
            "unknown" | "" => Ok(Label::Unknown),
            other => Err(Error::InvalidRecord(format!("unknown label {other:?}"))),
        }
    }
}

/// The two classes a prototype library can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    Normal,
    #[serde(rename = "LVH")]
    Lvh,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 2] = [ClassLabel::Normal, ClassLabel::Lvh];

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Normal => "Normal",
            ClassLabel::Lvh => "LVH",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<ClassLabel> for Label {
    fn from(c: ClassLabel) -> Self {
        match c {
            ClassLabel::Normal => Label::Normal,
            ClassLabel::Lvh => Label::Lvh,
        }
    }
}
