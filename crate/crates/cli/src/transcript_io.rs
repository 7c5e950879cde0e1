//! JSONL transcript files: a header line describing the run, then one
//! entry per line.

use std::io::{BufRead, Write};

use anyhow::{bail, Context, Result};
use eprcommit::protocol::{Entry, Transcript};
use eprcommit::replay::RunSpec;
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "eprcommit-transcript";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    /// Parameters and inputs that regenerate the entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSpec>,
}

impl Header {
    pub fn new(run: Option<RunSpec>) -> Self {
        Header { format: FORMAT.into(), version: VERSION, run }
    }
}

pub fn write<W: Write>(mut w: W, header: &Header, transcript: &Transcript) -> Result<()> {
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    for e in transcript.entries() {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_string(header: &Header, transcript: &Transcript) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf, header, transcript)?;
    Ok(String::from_utf8(buf)?)
}

pub fn read<R: BufRead>(r: R) -> Result<(Header, Transcript)> {
    let mut lines = r.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let (_, first) = lines.next().context("empty transcript file")?;
    let header: Header = serde_json::from_str(&first?).context("line 1: bad header")?;
    if header.format != FORMAT {
        bail!("line 1: format {:?}, expected {FORMAT:?}", header.format);
    }
    if header.version != VERSION {
        bail!("line 1: unsupported version {}", header.version);
    }
    let mut entries = Vec::new();
    for (i, line) in lines {
        let e: Entry = serde_json::from_str(&line?).with_context(|| format!("line {}: bad entry", i + 1))?;
        entries.push(e);
    }
    Ok((header, Transcript::from_entries(entries)))
}
