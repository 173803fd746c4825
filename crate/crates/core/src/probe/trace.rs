use std::fmt;

use serde::Serialize;

use crate::gf::Elem;

/// Identifier of one share-level wire: the enclosing gadget scopes, the
/// assignment tag, and its indices (share index last).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ProbePoint {
    pub scope: String,
    pub tag: &'static str,
    pub index: Vec<u32>,
}

impl fmt::Display for ProbePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.scope.is_empty() {
            write!(f, "{}/", self.scope)?;
        }
        write!(f, "{}", self.tag)?;
        if !self.index.is_empty() {
            let idx: Vec<String> = self.index.iter().map(u32::to_string).collect();
            write!(f, "[{}]", idx.join(","))?;
        }
        Ok(())
    }
}

/// One execution's ordered probe values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProbeTrace {
    pub points: Vec<ProbePoint>,
    pub values: Vec<Elem>,
}

impl ProbeTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ProbePoint, Elem)> {
        self.points.iter().zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordMode {
    /// Identifiers and values.
    Full,
    /// Values only; used for bulk runs once the point sequence is known.
    ValuesOnly,
}

/// Collects probe values while a gadget runs. Attached to a
/// [`MaskingContext`](crate::masking::MaskingContext).
#[derive(Debug, Clone)]
pub struct Recorder {
    mode: RecordMode,
    scopes: Vec<(&'static str, u32)>,
    points: Vec<ProbePoint>,
    values: Vec<Elem>,
}

impl Recorder {
    pub fn new(mode: RecordMode) -> Self {
        Recorder {
            mode,
            scopes: Vec::new(),
            points: Vec::new(),
            values: Vec::new(),
        }
    }

    pub(crate) fn enter(&mut self, name: &'static str, idx: u32) {
        self.scopes.push((name, idx));
    }

    pub(crate) fn leave(&mut self) {
        self.scopes.pop();
    }

    pub(crate) fn record(&mut self, tag: &'static str, index: &[usize], value: Elem) {
        if self.mode == RecordMode::Full {
            let scope = self
                .scopes
                .iter()
                .map(|(name, i)| format!("{name}{i}"))
                .collect::<Vec<_>>()
                .join("/");
            self.points.push(ProbePoint {
                scope,
                tag,
                index: index.iter().map(|&i| i as u32).collect(),
            });
        }
        self.values.push(value);
    }

    pub fn values(&self) -> &[Elem] {
        &self.values
    }

    pub fn clear(&mut self) {
        self.scopes.clear();
        self.points.clear();
        self.values.clear();
    }

    pub fn into_trace(self) -> ProbeTrace {
        ProbeTrace {
            points: self.points,
            values: self.values,
        }
    }
}
