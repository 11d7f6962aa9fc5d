//! JSON-lines envelope shared by every trace writer.
//!
//! Line 1 is a header echoing the format version, the producing command and
//! its resolved configuration. Every further line is one event
//! `{seq, type, ...fields}` with absent fields omitted.

use serde::Serialize;
use serde_json::{Map, Value};

pub const FORMAT_VERSION: u32 = 1;

/// An event that can be written into the envelope.
pub trait TraceRecord {
    fn kind(&self) -> &'static str;
    fn fields(&self) -> Map<String, Value>;
}

#[derive(Serialize)]
struct Header<'a, C: Serialize> {
    format: &'static str,
    version: u32,
    command: &'a str,
    config: &'a C,
}

#[derive(Serialize)]
struct Line<'a> {
    seq: u64,
    #[serde(rename = "type")]
    kind: &'a str,
    #[serde(flatten)]
    fields: Map<String, Value>,
}

pub fn header_line<C: Serialize>(command: &str, config: &C) -> String {
    let h = Header { format: "nocup-trace", version: FORMAT_VERSION, command, config };
    serde_json::to_string(&h).expect("header serializes")
}

pub fn event_line(seq: u64, event: &impl TraceRecord) -> String {
    let line = Line { seq, kind: event.kind(), fields: event.fields() };
    serde_json::to_string(&line).expect("event serializes")
}

/// Header plus one line per event, newline-terminated.
pub fn render<C: Serialize, E: TraceRecord>(command: &str, config: &C, events: &[E]) -> String {
    let mut out = header_line(command, config);
    out.push('\n');
    for (i, e) in events.iter().enumerate() {
        out.push_str(&event_line(i as u64, e));
        out.push('\n');
    }
    out
}

/// Small builder for field maps; `None` values are skipped.
#[derive(Default)]
pub struct Fields(Map<String, Value>);

impl Fields {
    pub fn new() -> Self {
        Fields(Map::new())
    }

    pub fn put(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("field serializes");
        if !v.is_null() {
            self.0.insert(key.to_string(), v);
        }
        self
    }

    pub fn done(self) -> Map<String, Value> {
        self.0
    }
}
