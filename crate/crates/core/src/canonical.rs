//! Byte-stable JSON rendering.
//!
//! Every JSON document this crate writes goes through [`to_string`]: object
//! keys are sorted, the output is a single line, and separators are `", "` and
//! `": "`. Two runs over the same inputs therefore produce identical bytes.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

struct SpacedFormatter;

impl Formatter for SpacedFormatter {
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            writer.write_all(b", ")
        }
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            writer.write_all(b", ")
        }
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b": ")
    }
}

/// Renders `value` with sorted keys on one line, without a trailing newline.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    // Going through `Value` sorts keys: its map is a BTreeMap.
    let value = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SpacedFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// [`to_string`] plus a trailing newline, for whole-file documents.
pub fn to_document<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut s = to_string(value)?;
    s.push('\n');
    Ok(s)
}

/// One canonical line per item.
pub fn to_jsonl<'a, T: Serialize + 'a>(items: impl IntoIterator<Item = &'a T>) -> serde_json::Result<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&to_string(item)?);
        out.push('\n');
    }
    Ok(out)
}
