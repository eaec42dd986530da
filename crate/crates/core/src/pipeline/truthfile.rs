//! Ground-truth file for a simulated pass, same layout conventions as the
//! observation file.

use std::io::{BufReader, Read, Write};

use super::obsfile::{field, read_header, read_rows};
use crate::error::{Error, Result};
use crate::geodesy::{EcefVector, EciVector};
use crate::orbitsim::PassTruth;

pub const TRUTH_MAGIC: &str = "# leoloc pass truth v1";
const TRUTH_COLUMNS: &str = "t,az,el,range,range_rate,eci_x,eci_y,eci_z,ecef_x,ecef_y,ecef_z";

pub fn write_truth<W: Write>(mut w: W, truth: &PassTruth) -> Result<()> {
    writeln!(w, "{TRUTH_MAGIC}")?;
    writeln!(w, "t_peak={}", truth.t_peak)?;
    writeln!(w, "peak_elevation_rad={}", truth.peak_elevation)?;
    writeln!(w, "{TRUTH_COLUMNS}")?;
    for i in 0..truth.len() {
        let (a, b) = (truth.sat_eci[i], truth.sat_ecef[i]);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            truth.times[i], truth.az[i], truth.el[i], truth.range[i], truth.range_rate[i], a.x, a.y, a.z, b.x, b.y, b.z
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth<R: Read>(r: R) -> Result<PassTruth> {
    let mut r = BufReader::new(r);
    let h = read_header(&mut r, TRUTH_MAGIC, TRUTH_COLUMNS)?;
    let rows = read_rows(r, h.columns_line + 1, 11)?;
    let mut t = PassTruth {
        times: Vec::new(),
        sat_eci: Vec::new(),
        sat_ecef: Vec::new(),
        az: Vec::new(),
        el: Vec::new(),
        range: Vec::new(),
        range_rate: Vec::new(),
        t_peak: h.f64("t_peak")?,
        peak_elevation: h.f64("peak_elevation_rad")?,
    };
    for (no, f) in rows {
        let v: Vec<f64> = f.iter().enumerate().map(|(i, s)| field(no, &format!("column {}", i + 1), s)).collect::<Result<_>>()?;
        if t.times.last().is_some_and(|&p| v[0] <= p) {
            return Err(Error::Parse { line: no, message: "times must increase".into() });
        }
        t.times.push(v[0]);
        t.az.push(v[1]);
        t.el.push(v[2]);
        t.range.push(v[3]);
        t.range_rate.push(v[4]);
        t.sat_eci.push(EciVector::new(v[5], v[6], v[7]));
        t.sat_ecef.push(EcefVector::new(v[8], v[9], v[10]));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::{EarthModel, GeodeticPosition};
    use crate::orbitsim::{observe_pass_between, orbit_for_pass, PassConfig};

    #[test]
    fn round_trip() {
        let e = EarthModel::default();
        let gs = GeodeticPosition::from_degrees(-33.0, 151.0, 40.0).unwrap();
        let spec = orbit_for_pass(&gs, 0.0, 600e3, 1.2, false, 1.0, true, &e).unwrap();
        let cfg = PassConfig { dt: 0.5, ..Default::default() };
        let truth = observe_pass_between(&spec, &gs, &cfg, -300.0, 300.0, &e).unwrap();
        let mut buf = Vec::new();
        write_truth(&mut buf, &truth).unwrap();
        assert_eq!(read_truth(buf.as_slice()).unwrap(), truth);
    }
}
