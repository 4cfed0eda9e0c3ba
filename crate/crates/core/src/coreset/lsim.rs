//! Binary similarity-matrix file: `LSIM`, a version byte, a little-endian
//! u32 vertex count, the condensed weights as little-endian f64, then each
//! label as a u32 byte length followed by UTF-8 bytes.

use std::path::Path;

use super::SimilarityGraph;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LSIM";
const VERSION: u8 = 1;

pub fn lsim_bytes(g: &SimilarityGraph) -> Vec<u8> {
    let mut out = Vec::with_capacity(9 + g.weights().len() * 8);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(g.len() as u32).to_le_bytes());
    for w in g.weights() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    for label in g.labels() {
        out.extend_from_slice(&(label.len() as u32).to_le_bytes());
        out.extend_from_slice(label.as_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    origin: &'a str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Parse {
                path: self.origin.to_string(),
                line: 0,
                msg: format!("truncated at byte {} while reading {what}", self.pos),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn parse_lsim(buf: &[u8], origin: &str) -> Result<SimilarityGraph> {
    let bad = |msg: String| Error::Parse {
        path: origin.to_string(),
        line: 0,
        msg,
    };
    let mut r = Reader { buf, pos: 0, origin };
    if r.take(4, "magic")? != MAGIC {
        return Err(bad("missing LSIM magic".into()));
    }
    let version = r.take(1, "version")?[0];
    if version != VERSION {
        return Err(bad(format!("unsupported LSIM version {version}")));
    }
    let n = r.u32("vertex count")? as usize;
    let m = n * n.saturating_sub(1) / 2;
    let mut weights = Vec::with_capacity(m);
    for _ in 0..m {
        weights.push(f64::from_le_bytes(r.take(8, "weights")?.try_into().unwrap()));
    }
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let len = r.u32("label length")? as usize;
        let bytes = r.take(len, "label")?;
        let s = std::str::from_utf8(bytes).map_err(|_| bad(format!("label {i} is not UTF-8")))?;
        labels.push(s.to_string());
    }
    if r.pos != buf.len() {
        return Err(bad(format!("{} trailing bytes", buf.len() - r.pos)));
    }
    SimilarityGraph::new(n, weights, labels)
}

pub fn write_lsim(path: &Path, g: &SimilarityGraph) -> Result<()> {
    std::fs::write(path, lsim_bytes(g)).map_err(|e| Error::io(path, e))
}

pub fn read_lsim(path: &Path) -> Result<SimilarityGraph> {
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_lsim(&buf, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_round_trip() {
        let g = SimilarityGraph::new(3, vec![0.5, 1.0, 2.0], vec!["a".into(), "bé".into(), "".into()]).unwrap();
        let bytes = lsim_bytes(&g);
        assert_eq!(&bytes[..4], b"LSIM");
        assert_eq!(bytes[4], 1);
        assert_eq!(&bytes[5..9], &3u32.to_le_bytes());
        assert_eq!(&bytes[9..17], &0.5f64.to_le_bytes());
        assert_eq!(bytes.len(), 9 + 24 + (4 + 1) + (4 + 3) + 4);
        assert_eq!(parse_lsim(&bytes, "mem").unwrap(), g);
    }

    #[test]
    fn rejects_corruption() {
        let g = SimilarityGraph::new(2, vec![1.0], vec!["a".into(), "b".into()]).unwrap();
        let bytes = lsim_bytes(&g);
        assert!(parse_lsim(&bytes[..bytes.len() - 1], "m").is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(parse_lsim(&bad, "m").is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(parse_lsim(&extra, "m").is_err());
    }
}
