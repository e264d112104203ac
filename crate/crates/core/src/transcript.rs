//! Append-only log of every matrix a party transmits.
//!
//! Protocol drivers and the distributed estimators write here; the adversary
//! reads only from here. Serialized as one JSON object per line.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    /// Data owner, zero-based.
    Owner(usize),
    Central,
    Commodity,
    Server,
    /// Message delivered identically to every data owner.
    Broadcast,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Owner(i) => write!(f, "owner{}", i + 1),
            Party::Central => f.write_str("central"),
            Party::Commodity => f.write_str("commodity"),
            Party::Server => f.write_str("server"),
            Party::Broadcast => f.write_str("broadcast"),
        }
    }
}

impl Party {
    /// Whether `observer` sees a message addressed to `self`.
    pub fn delivers_to(self, observer: Party) -> bool {
        self == observer || (self == Party::Broadcast && matches!(observer, Party::Owner(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranscriptMode {
    /// Shapes and values.
    #[default]
    Full,
    /// Shapes only; for long runs where the values are not needed.
    ShapesOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub seq: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iteration: Option<usize>,
    pub sender: Party,
    pub receiver: Party,
    pub label: String,
    pub rows: usize,
    pub cols: usize,
    /// Row-major values, absent in [`TranscriptMode::ShapesOnly`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl TranscriptEntry {
    pub fn value_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn matrix(&self) -> Option<Matrix> {
        self.values
            .as_ref()
            .map(|v| Matrix::from_row_slice(self.rows, self.cols, v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub protocol: String,
    pub mode: TranscriptMode,
    entries: Vec<TranscriptEntry>,
}

impl ProtocolTranscript {
    pub fn new(protocol: impl Into<String>, mode: TranscriptMode) -> Self {
        Self {
            protocol: protocol.into(),
            mode,
            entries: Vec::new(),
        }
    }

    pub fn record(
        &mut self,
        iteration: Option<usize>,
        sender: Party,
        receiver: Party,
        label: &str,
        m: &Matrix,
    ) {
        let values = match self.mode {
            TranscriptMode::Full => {
                let mut v = Vec::with_capacity(m.len());
                for r in 0..m.nrows() {
                    v.extend(m.row(r).iter().copied());
                }
                Some(v)
            }
            TranscriptMode::ShapesOnly => None,
        };
        self.entries.push(TranscriptEntry {
            seq: self.entries.len(),
            iteration,
            sender,
            receiver,
            label: label.to_owned(),
            rows: m.nrows(),
            cols: m.ncols(),
            values,
        });
    }

    /// Appends another transcript, renumbering its entries.
    pub fn extend(&mut self, other: ProtocolTranscript) {
        for mut e in other.entries {
            e.seq = self.entries.len();
            self.entries.push(e);
        }
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn find(&self, sender: Party, label: &str) -> Option<&TranscriptEntry> {
        self.entries
            .iter()
            .find(|e| e.sender == sender && e.label == label)
    }

    pub fn require(&self, sender: Party, label: &str) -> Result<&TranscriptEntry> {
        self.find(sender, label)
            .ok_or_else(|| Error::MissingMessage(format!("{sender}:{label}")))
    }

    /// Entries `observer` sent or received.
    pub fn view_of(&self, observer: Party) -> impl Iterator<Item = &TranscriptEntry> {
        self.entries
            .iter()
            .filter(move |e| e.sender == observer || e.receiver.delivers_to(observer))
    }

    pub fn values_sent_by(&self, sender: Party) -> usize {
        self.entries
            .iter()
            .filter(|e| e.sender == sender)
            .map(TranscriptEntry::value_count)
            .sum()
    }

    pub fn iteration_entries(&self, iteration: usize) -> impl Iterator<Item = &TranscriptEntry> {
        self.entries
            .iter()
            .filter(move |e| e.iteration == Some(iteration))
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.entries {
            serde_json::to_writer(
                &mut w,
                &LogLine {
                    protocol: &self.protocol,
                    entry: e,
                },
            )?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut protocol = String::new();
        let mut entries = Vec::new();
        let mut mode = TranscriptMode::Full;
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let owned: OwnedLogLine = serde_json::from_str(&line)?;
            protocol = owned.protocol;
            if owned.entry.values.is_none() {
                mode = TranscriptMode::ShapesOnly;
            }
            entries.push(owned.entry);
        }
        Ok(Self {
            protocol,
            mode,
            entries,
        })
    }
}

#[derive(Serialize)]
struct LogLine<'a> {
    protocol: &'a str,
    #[serde(flatten)]
    entry: &'a TranscriptEntry,
}

#[derive(Deserialize)]
struct OwnedLogLine {
    protocol: String,
    #[serde(flatten)]
    entry: TranscriptEntry,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let mut t = ProtocolTranscript::new("demo", TranscriptMode::Full);
        let m = Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.5]);
        t.record(Some(1), Party::Owner(0), Party::Central, "ZB", &m);
        t.record(None, Party::Central, Party::Broadcast, "M", &m.transpose());
        let mut buf = Vec::new();
        t.write_jsonl(&mut buf).unwrap();
        let back = ProtocolTranscript::read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.entries()[0].matrix().unwrap(), m);
    }

    #[test]
    fn broadcast_reaches_owners_only() {
        assert!(Party::Broadcast.delivers_to(Party::Owner(3)));
        assert!(!Party::Broadcast.delivers_to(Party::Central));
        assert!(Party::Owner(1).delivers_to(Party::Owner(1)));
    }

    #[test]
    fn shapes_only_drops_values() {
        let mut t = ProtocolTranscript::new("demo", TranscriptMode::ShapesOnly);
        t.record(
            None,
            Party::Owner(0),
            Party::Owner(1),
            "x",
            &Matrix::zeros(4, 2),
        );
        assert!(t.entries()[0].values.is_none());
        assert_eq!(t.values_sent_by(Party::Owner(0)), 8);
    }
}
