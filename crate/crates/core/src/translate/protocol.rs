//! Line protocol shared by the TCP and child-process backends.
//!
//! Requests and responses are `ID<TAB>TEXT<LF>` frames, where `ID` is a
//! 64-bit unsigned decimal. A server reports failures with
//! `ERR<TAB>ID<TAB>MESSAGE<LF>`; `ID` is left empty when the offending frame
//! could not be parsed.

use std::fmt;

pub const ERROR_TAG: &str = "ERR";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Text { id: u64, text: String },
    Error { id: Option<u64>, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameError(pub String);

impl fmt::Display for FrameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for FrameError {}

pub fn encode_text_frame(id: u64, text: &str) -> String {
    format!("{id}\t{text}\n")
}

pub fn encode_error_frame(id: Option<u64>, message: &str) -> String {
    let id = id.map(|i| i.to_string()).unwrap_or_default();
    // keep the frame on one line whatever the message says
    let message = message.replace(['\n', '\r'], " ");
    format!("{ERROR_TAG}\t{id}\t{message}\n")
}

fn parse_id(raw: &str) -> Result<u64, FrameError> {
    if raw.is_empty() || !raw.bytes().all(|b| b.is_ascii_digit()) {
        return Err(FrameError(format!("invalid id {raw:?}")));
    }
    raw.parse::<u64>()
        .map_err(|_| FrameError(format!("id out of range {raw:?}")))
}

/// Parses one frame; `line` may still carry its trailing `\n` / `\r\n`.
pub fn parse_frame(line: &str) -> Result<Frame, FrameError> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    let line = line.strip_suffix('\r').unwrap_or(line);
    let (head, rest) = line
        .split_once('\t')
        .ok_or_else(|| FrameError("missing TAB after id".to_string()))?;
    if head == ERROR_TAG {
        let (id, message) = rest.split_once('\t').unwrap_or((rest, ""));
        let id = if id.is_empty() {
            None
        } else {
            Some(parse_id(id)?)
        };
        return Ok(Frame::Error {
            id,
            message: message.to_string(),
        });
    }
    Ok(Frame::Text {
        id: parse_id(head)?,
        text: rest.to_string(),
    })
}
