//! Line-delimited JSON trace records for system runs.
//!
//! Each completed system step becomes one JSON object per line. Completed
//! communications carry `op`/`sender`/`receiver`/`value` (and `var` for
//! value communications); update decisions carry the update name; `tick`
//! closes a terminated run. Records for auxiliary communications are tagged
//! `aux: true` so a strong trace can be filtered down to the weak one.
//! Role-local send/receive labels describe incomplete interactions and are
//! never recorded.

use std::io::{self, Write};

use serde::Serialize;

use crate::ast::{Label, PayloadDigest, Value};

#[derive(Serialize)]
struct Record<'a> {
    kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    op: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sender: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    receiver: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<JsonValue<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    var: Option<&'a str>,
    #[serde(rename = "updateName", skip_serializing_if = "Option::is_none")]
    update_name: Option<&'a str>,
    #[serde(rename = "bodyHash", skip_serializing_if = "Option::is_none")]
    body_hash: Option<String>,
    #[serde(rename = "repoId", skip_serializing_if = "Option::is_none")]
    repo_id: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tick: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aux: Option<bool>,
}

/// Runtime values in records: ints and bools as JSON numbers and booleans,
/// strings as strings, the error value as a distinguishable object.
#[derive(Serialize)]
#[serde(untagged)]
enum JsonValue<'a> {
    Int(i64),
    Bool(bool),
    Str(&'a str),
    Err { err: bool },
}

impl<'a> JsonValue<'a> {
    fn of(v: &'a Value) -> JsonValue<'a> {
        match v {
            Value::Int(i) => JsonValue::Int(*i),
            Value::Bool(b) => JsonValue::Bool(*b),
            Value::Str(s) => JsonValue::Str(s),
            Value::Err => JsonValue::Err { err: true },
        }
    }
}

impl<'a> Record<'a> {
    fn bare(kind: &'a str) -> Record<'a> {
        Record {
            kind,
            op: None,
            sender: None,
            receiver: None,
            value: None,
            var: None,
            update_name: None,
            body_hash: None,
            repo_id: None,
            tick: None,
            aux: None,
        }
    }
}

fn payload_value(payload: &PayloadDigest) -> JsonValue<'static> {
    match payload {
        PayloadDigest::No => JsonValue::Str("no"),
        PayloadDigest::Code(h) => JsonValue::Int(*h as i64),
    }
}

/// Render one system label as a JSON line (without the trailing newline).
/// Returns `None` for role-local labels, which never appear in system
/// traces.
pub fn render_record(label: &Label) -> Option<String> {
    let record = match label {
        Label::Tau => Record::bare("tau"),
        Label::Interaction { op, sender, value, receiver, var } => {
            let mut r = Record::bare("comm");
            r.op = Some(op.bare());
            r.sender = Some(sender.as_str());
            r.receiver = Some(receiver.as_str());
            r.value = Some(JsonValue::of(value));
            r.var = Some(var.trim_start_matches("aux$"));
            r.aux = op.is_aux().then_some(true);
            r
        }
        Label::UpdateInteraction { op, sender, payload, receiver } => {
            let mut r = Record::bare("comm");
            r.op = Some(op.bare());
            r.sender = Some(sender.as_str());
            r.receiver = Some(receiver.as_str());
            r.value = Some(payload_value(payload));
            r.aux = Some(true);
            r
        }
        Label::Tick => {
            let mut r = Record::bare("tick");
            r.tick = Some(true);
            r
        }
        Label::Update { name, body_hash } => {
            let mut r = Record::bare("update");
            r.update_name = Some(name);
            r.body_hash = Some(format!("{body_hash:x}"));
            r
        }
        Label::NoUp => Record::bare("noup"),
        Label::ChangeUpdates { repo_id } => {
            let mut r = Record::bare("change-updates");
            r.repo_id = Some(*repo_id);
            r
        }
        Label::DeltaSend { .. }
        | Label::DeltaRecv { .. }
        | Label::DeltaSendUp { .. }
        | Label::DeltaRecvUp { .. } => return None,
    };
    Some(serde_json::to_string(&record).expect("record serialization cannot fail"))
}

/// Write the strong trace of a run, one record per line.
pub fn write_trace<W: Write>(mut out: W, labels: &[Label]) -> io::Result<()> {
    for label in labels {
        if let Some(line) = render_record(label) {
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// The weak rendering of a label sequence: records for the labels that
/// survive the weak-trace filter at the given layer.
pub fn weak_records(labels: &[Label], dpoc: bool) -> Vec<String> {
    labels
        .iter()
        .filter(|l| !l.is_weak_hidden(dpoc))
        .filter_map(render_record)
        .collect()
}
