//! OSC 1.0 message encoding. Bundles are not supported.

use thiserror::Error;

#[derive(Debug, Clone)]
pub enum OscArg {
    Int(i32),
    Float(f32),
    String(String),
    Blob(Vec<u8>),
}

impl OscArg {
    pub fn tag(&self) -> u8 {
        match self {
            OscArg::Int(_) => b'i',
            OscArg::Float(_) => b'f',
            OscArg::String(_) => b's',
            OscArg::Blob(_) => b'b',
        }
    }
}

// Floats compare by bit pattern so that NaN payloads survive round trips.
impl PartialEq for OscArg {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (OscArg::Int(a), OscArg::Int(b)) => a == b,
            (OscArg::Float(a), OscArg::Float(b)) => a.to_bits() == b.to_bits(),
            (OscArg::String(a), OscArg::String(b)) => a == b,
            (OscArg::Blob(a), OscArg::Blob(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for OscArg {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OscMessage {
    pub address: String,
    pub args: Vec<OscArg>,
}

impl OscMessage {
    pub fn new(address: impl Into<String>, args: Vec<OscArg>) -> Self {
        Self {
            address: address.into(),
            args,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("address must be non-empty ASCII starting with '/': {0:?}")]
    InvalidAddress(String),
    #[error("string argument {index} contains a NUL byte")]
    NulInString { index: usize },
    #[error("blob argument {index} exceeds i32::MAX bytes")]
    BlobTooLarge { index: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("OSC decode error at byte {offset}: {kind}")]
pub struct DecodeError {
    pub offset: usize,
    pub kind: DecodeErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeErrorKind {
    #[error("packet truncated")]
    Truncated,
    #[error("non-zero padding")]
    BadPadding,
    #[error("unterminated string")]
    Unterminated,
    #[error("invalid address")]
    InvalidAddress,
    #[error("type tag string must start with ','")]
    MissingTypeTags,
    #[error("unknown type tag {0:?}")]
    UnknownTag(char),
    #[error("invalid UTF-8 in string")]
    InvalidUtf8,
    #[error("negative blob length")]
    NegativeBlobLength,
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("bundles are not supported")]
    Bundle,
}

fn pad4(n: usize) -> usize {
    (n + 3) & !3
}

fn push_padded_str(out: &mut Vec<u8>, s: &[u8]) {
    out.extend_from_slice(s);
    let len = pad4(s.len() + 1);
    out.resize(out.len() + (len - s.len()), 0);
}

fn valid_address(a: &str) -> bool {
    a.starts_with('/') && a.is_ascii() && !a.bytes().any(|b| b == 0)
}

/// Encodes one message. The result length is always a multiple of 4.
pub fn encode(msg: &OscMessage) -> Result<Vec<u8>, EncodeError> {
    if !valid_address(&msg.address) {
        return Err(EncodeError::InvalidAddress(msg.address.clone()));
    }
    let mut out = Vec::with_capacity(64);
    push_padded_str(&mut out, msg.address.as_bytes());
    let mut tags = Vec::with_capacity(msg.args.len() + 1);
    tags.push(b',');
    tags.extend(msg.args.iter().map(OscArg::tag));
    push_padded_str(&mut out, &tags);
    for (index, arg) in msg.args.iter().enumerate() {
        match arg {
            OscArg::Int(v) => out.extend_from_slice(&v.to_be_bytes()),
            OscArg::Float(v) => out.extend_from_slice(&v.to_be_bytes()),
            OscArg::String(s) => {
                if s.bytes().any(|b| b == 0) {
                    return Err(EncodeError::NulInString { index });
                }
                push_padded_str(&mut out, s.as_bytes());
            }
            OscArg::Blob(b) => {
                let len =
                    i32::try_from(b.len()).map_err(|_| EncodeError::BlobTooLarge { index })?;
                out.extend_from_slice(&len.to_be_bytes());
                out.extend_from_slice(b);
                out.resize(out.len() + (pad4(b.len()) - b.len()), 0);
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, kind: DecodeErrorKind) -> DecodeError {
        DecodeError {
            offset: self.pos,
            kind,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.buf.len() - self.pos < n {
            return Err(self.err(DecodeErrorKind::Truncated));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn padded_bytes(&mut self) -> Result<&'a [u8], DecodeError> {
        let start = self.pos;
        let rest = &self.buf[start..];
        let nul = rest.iter().position(|&b| b == 0).ok_or(DecodeError {
            offset: self.buf.len(),
            kind: if rest.is_empty() {
                DecodeErrorKind::Truncated
            } else {
                DecodeErrorKind::Unterminated
            },
        })?;
        let total = pad4(nul + 1);
        if rest.len() < total {
            self.pos = self.buf.len();
            return Err(self.err(DecodeErrorKind::Truncated));
        }
        if let Some(i) = rest[nul..total].iter().position(|&b| b != 0) {
            return Err(DecodeError {
                offset: start + nul + i,
                kind: DecodeErrorKind::BadPadding,
            });
        }
        self.pos = start + total;
        Ok(&rest[..nul])
    }

    fn word(&mut self) -> Result<[u8; 4], DecodeError> {
        let s = self.take(4)?;
        Ok([s[0], s[1], s[2], s[3]])
    }
}

pub fn decode(bytes: &[u8]) -> Result<OscMessage, DecodeError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if bytes.is_empty() {
        return Err(r.err(DecodeErrorKind::Truncated));
    }
    if bytes.starts_with(b"#bundle") {
        return Err(r.err(DecodeErrorKind::Bundle));
    }
    if !bytes.len().is_multiple_of(4) {
        return Err(DecodeError {
            offset: bytes.len(),
            kind: DecodeErrorKind::Truncated,
        });
    }
    let addr_bytes = r.padded_bytes()?;
    let address = std::str::from_utf8(addr_bytes)
        .ok()
        .filter(|a| valid_address(a))
        .ok_or(DecodeError {
            offset: 0,
            kind: DecodeErrorKind::InvalidAddress,
        })?
        .to_string();

    let tag_offset = r.pos;
    let tags = r.padded_bytes()?;
    if tags.first() != Some(&b',') {
        return Err(DecodeError {
            offset: tag_offset,
            kind: DecodeErrorKind::MissingTypeTags,
        });
    }
    if let Some(i) = tags[1..]
        .iter()
        .position(|t| !matches!(t, b'i' | b'f' | b's' | b'b'))
    {
        return Err(DecodeError {
            offset: tag_offset + 1 + i,
            kind: DecodeErrorKind::UnknownTag(tags[1 + i] as char),
        });
    }

    let mut args = Vec::with_capacity(tags.len() - 1);
    for &tag in &tags[1..] {
        let arg = match tag {
            b'i' => OscArg::Int(i32::from_be_bytes(r.word()?)),
            b'f' => OscArg::Float(f32::from_be_bytes(r.word()?)),
            b's' => {
                let start = r.pos;
                let s = r.padded_bytes()?;
                OscArg::String(
                    std::str::from_utf8(s)
                        .map_err(|_| DecodeError {
                            offset: start,
                            kind: DecodeErrorKind::InvalidUtf8,
                        })?
                        .to_string(),
                )
            }
            _ => {
                let len_at = r.pos;
                let len = i32::from_be_bytes(r.word()?);
                if len < 0 {
                    return Err(DecodeError {
                        offset: len_at,
                        kind: DecodeErrorKind::NegativeBlobLength,
                    });
                }
                let len = len as usize;
                let data = r.take(len)?.to_vec();
                let pad_at = r.pos;
                let pad = r.take(pad4(len) - len)?;
                if let Some(i) = pad.iter().position(|&b| b != 0) {
                    return Err(DecodeError {
                        offset: pad_at + i,
                        kind: DecodeErrorKind::BadPadding,
                    });
                }
                OscArg::Blob(data)
            }
        };
        args.push(arg);
    }
    if r.pos != bytes.len() {
        return Err(r.err(DecodeErrorKind::TrailingBytes(bytes.len() - r.pos)));
    }
    Ok(OscMessage { address, args })
}

/// Lower-case hex with a space between bytes.
pub fn hex_dump(bytes: &[u8]) -> String {
    bytes
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<Vec<_>>()
        .join(" ")
}
