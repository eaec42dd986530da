//! IQ capture file: a short text header followed by interleaved
//! little-endian `f32` samples.
//!
//! ```text
//! LEOLOC-IQ 1
//! sample_rate=2000000
//! fc=11325000000
//! t0=-7.5
//! channels=3
//! samples=4000000
//! <empty line>
//! re0 im0 re1 im1 re2 im2  (sample 0, channels 0..3)
//! re0 im0 ...              (sample 1)
//! ```

use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex32;

use super::IqCapture;
use crate::error::{Error, Result};

const MAGIC: &str = "LEOLOC-IQ 1";

pub fn write_iq<W: Write>(mut w: W, cap: &IqCapture) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "sample_rate={}", cap.sample_rate)?;
    writeln!(w, "fc={}", cap.fc)?;
    writeln!(w, "t0={}", cap.t0)?;
    writeln!(w, "channels={}", cap.channels.len())?;
    writeln!(w, "samples={}", cap.len())?;
    writeln!(w)?;
    let mut buf = Vec::with_capacity(cap.len().min(1 << 16) * 24);
    for i in 0..cap.len() {
        for ch in &cap.channels {
            buf.extend_from_slice(&ch[i].re.to_le_bytes());
            buf.extend_from_slice(&ch[i].im.to_le_bytes());
        }
        if buf.len() >= 1 << 20 {
            w.write_all(&buf)?;
            buf.clear();
        }
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_iq<R: Read>(r: R) -> Result<IqCapture> {
    let mut reader = BufReader::new(r);
    let mut line = String::new();
    let mut lineno = 0;
    let mut next_line = |reader: &mut BufReader<R>, line: &mut String| -> Result<usize> {
        line.clear();
        lineno += 1;
        let n = reader.read_line(line)?;
        if n == 0 {
            return Err(Error::Parse { line: lineno, message: "unexpected end of header".into() });
        }
        Ok(lineno)
    };
    let l = next_line(&mut reader, &mut line)?;
    if line.trim_end() != MAGIC {
        return Err(Error::Parse { line: l, message: format!("expected `{MAGIC}`") });
    }
    let (mut fs, mut fc, mut t0, mut channels, mut samples) = (None, None, None, None, None);
    loop {
        let l = next_line(&mut reader, &mut line)?;
        let text = line.trim_end();
        if text.is_empty() {
            break;
        }
        let (key, value) =
            text.split_once('=').ok_or_else(|| Error::Parse { line: l, message: format!("expected key=value, got `{text}`") })?;
        let bad = |e: String| Error::Parse { line: l, message: format!("{key}: {e}") };
        match key {
            "sample_rate" => fs = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "fc" => fc = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "t0" => t0 = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "channels" => channels = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "samples" => samples = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            _ => return Err(bad("unknown header key".into())),
        }
    }
    let missing = |k: &str| Error::Parse { line: lineno, message: format!("header is missing `{k}`") };
    let fs = fs.ok_or_else(|| missing("sample_rate"))?;
    let fc = fc.ok_or_else(|| missing("fc"))?;
    let t0 = t0.ok_or_else(|| missing("t0"))?;
    let samples = samples.ok_or_else(|| missing("samples"))?;
    if channels.ok_or_else(|| missing("channels"))? != 3 {
        return Err(Error::Parse { line: lineno, message: "only 3-channel captures are supported".into() });
    }
    let mut raw = vec![0u8; samples * 24];
    reader.read_exact(&mut raw).map_err(|e| Error::Parse { line: lineno, message: format!("sample payload: {e}") })?;
    let mut chans: [Vec<Complex32>; 3] = [Vec::with_capacity(samples), Vec::with_capacity(samples), Vec::with_capacity(samples)];
    for rec in raw.chunks_exact(24) {
        for (c, ch) in chans.iter_mut().enumerate() {
            let o = c * 8;
            let re = f32::from_le_bytes(rec[o..o + 4].try_into().unwrap());
            let im = f32::from_le_bytes(rec[o + 4..o + 8].try_into().unwrap());
            ch.push(Complex32::new(re, im));
        }
    }
    IqCapture::new(fs, fc, t0, chans)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let ch = |s: f32| (0..5).map(|i| Complex32::new(i as f32 * s, -(i as f32) / 3.0)).collect::<Vec<_>>();
        let cap = IqCapture::new(2e6, 11.325e9, -7.5, [ch(1.0), ch(2.0), ch(0.1)]).unwrap();
        let mut buf = Vec::new();
        write_iq(&mut buf, &cap).unwrap();
        assert_eq!(read_iq(buf.as_slice()).unwrap(), cap);
    }

    #[test]
    fn truncated_payload() {
        let cap = IqCapture::new(1.0, 1.0, 0.0, [vec![Complex32::new(1.0, 1.0); 4], vec![Complex32::default(); 4], vec![Complex32::default(); 4]]).unwrap();
        let mut buf = Vec::new();
        write_iq(&mut buf, &cap).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_iq(buf.as_slice()), Err(Error::Parse { .. })));
        assert!(matches!(read_iq("NOPE\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }
}
