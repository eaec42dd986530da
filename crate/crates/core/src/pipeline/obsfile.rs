//! Pass-observation file: `key=value` header lines, then a CSV table.
//!
//! ```text
//! # leoloc pass observations v1
//! lat_rad=0.6998...
//! lon_rad=-1.5393...
//! alt_m=220
//! yaw_rad=0
//! spacing_m=0.1323...
//! wavelength_m=0.0264...
//! fc_hz=11325000000
//! dt_s=0.007
//! t,dphi01,dphi12,doppler,snr,valid
//! -7.5,0.31,-2.2,123456.7,25,1
//! -7.493,NaN,NaN,NaN,NaN,0
//! ```
//!
//! Floats use the shortest representation that parses back to the same
//! bits, so write-then-read is exact.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use super::GroundStation;
use crate::aoa::ArrayGeometry;
use crate::error::{Error, Result};
use crate::geodesy::GeodeticPosition;
use crate::signalproc::PassObservables;

pub const OBS_MAGIC: &str = "# leoloc pass observations v1";
const OBS_COLUMNS: &str = "t,dphi01,dphi12,doppler,snr,valid";

#[derive(Debug, Clone, PartialEq)]
pub struct PassFile {
    pub station: GroundStation,
    pub fc: f64,
    /// Nominal sample interval, s.
    pub dt: f64,
    pub obs: PassObservables,
}

pub fn write_station_header<W: Write>(w: &mut W, gs: &GroundStation) -> Result<()> {
    writeln!(w, "lat_rad={}", gs.position.lat())?;
    writeln!(w, "lon_rad={}", gs.position.lon())?;
    writeln!(w, "alt_m={}", gs.position.alt())?;
    writeln!(w, "yaw_rad={}", gs.array.yaw())?;
    writeln!(w, "spacing_m={}", gs.array.spacing())?;
    writeln!(w, "wavelength_m={}", gs.array.wavelength())?;
    Ok(())
}

pub fn write_pass<W: Write>(mut w: W, pf: &PassFile) -> Result<()> {
    writeln!(w, "{OBS_MAGIC}")?;
    write_station_header(&mut w, &pf.station)?;
    writeln!(w, "fc_hz={}", pf.fc)?;
    writeln!(w, "dt_s={}", pf.dt)?;
    writeln!(w, "{OBS_COLUMNS}")?;
    let o = &pf.obs;
    for i in 0..o.len() {
        writeln!(w, "{},{},{},{},{},{}", o.times[i], o.dphi01[i], o.dphi12[i], o.doppler[i], o.snr[i], u8::from(o.valid[i]))?;
    }
    w.flush()?;
    Ok(())
}

/// Header lines up to (and including) the column line, keyed by name.
pub(crate) struct Header {
    pub values: BTreeMap<String, (usize, String)>,
    /// Line number of the column line.
    pub columns_line: usize,
}

impl Header {
    pub fn f64(&self, key: &str) -> Result<f64> {
        let (line, v) = self
            .values
            .get(key)
            .ok_or_else(|| Error::Parse { line: self.columns_line, message: format!("header is missing `{key}`") })?;
        v.parse().map_err(|e| Error::Parse { line: *line, message: format!("{key}: {e}") })
    }

    pub fn station(&self) -> Result<GroundStation> {
        let bad = |e: Error| Error::Parse { line: self.columns_line, message: format!("station: {e}") };
        let pos = GeodeticPosition::new(self.f64("lat_rad")?, self.f64("lon_rad")?, self.f64("alt_m")?).map_err(bad)?;
        let array = ArrayGeometry::new(self.f64("spacing_m")?, self.f64("wavelength_m")?, self.f64("yaw_rad")?).map_err(bad)?;
        Ok(GroundStation::new(pos, array))
    }
}

/// Reads the magic line, `key=value` lines and the expected column line.
pub(crate) fn read_header<R: BufRead>(r: &mut R, magic: &str, columns: &str) -> Result<Header> {
    let mut line = String::new();
    let mut no = 0;
    let mut values = BTreeMap::new();
    loop {
        line.clear();
        no += 1;
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Parse { line: no, message: "unexpected end of file in header".into() });
        }
        let text = line.trim_end_matches(['\n', '\r']);
        if no == 1 {
            if text != magic {
                return Err(Error::Parse { line: 1, message: format!("expected `{magic}`") });
            }
            continue;
        }
        if text == columns {
            return Ok(Header { values, columns_line: no });
        }
        let (k, v) = text
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: no, message: format!("expected key=value or `{columns}`, got `{text}`") })?;
        if values.insert(k.to_string(), (no, v.to_string())).is_some() {
            return Err(Error::Parse { line: no, message: format!("duplicate key `{k}`") });
        }
    }
}

/// Splits the remaining lines into rows of exactly `width` fields.
pub(crate) fn read_rows<R: BufRead>(r: R, first_line: usize, width: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rows = Vec::new();
    for (i, l) in r.lines().enumerate() {
        let no = first_line + i;
        let l = l?;
        if l.is_empty() {
            continue;
        }
        let f: Vec<String> = l.split(',').map(str::to_string).collect();
        if f.len() != width {
            return Err(Error::Parse { line: no, message: format!("expected {width} fields, got {}", f.len()) });
        }
        rows.push((no, f));
    }
    Ok(rows)
}

pub(crate) fn field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| Error::Parse { line, message: format!("{name}: {e}") })
}

pub fn read_pass<R: Read>(r: R) -> Result<PassFile> {
    let mut r = BufReader::new(r);
    let h = read_header(&mut r, OBS_MAGIC, OBS_COLUMNS)?;
    let station = h.station()?;
    let (fc, dt) = (h.f64("fc_hz")?, h.f64("dt_s")?);
    let rows = read_rows(r, h.columns_line + 1, 6)?;
    let mut obs = PassObservables::with_capacity(rows.len());
    for (no, f) in rows {
        obs.times.push(field(no, "t", &f[0])?);
        obs.dphi01.push(field(no, "dphi01", &f[1])?);
        obs.dphi12.push(field(no, "dphi12", &f[2])?);
        obs.doppler.push(field(no, "doppler", &f[3])?);
        obs.snr.push(field(no, "snr", &f[4])?);
        obs.valid.push(match f[5].as_str() {
            "1" => true,
            "0" => false,
            other => return Err(Error::Parse { line: no, message: format!("valid: expected 0 or 1, got `{other}`") }),
        });
    }
    obs.validate().map_err(|e| Error::Parse { line: h.columns_line, message: e.to_string() })?;
    Ok(PassFile { station, fc, dt, obs })
}
