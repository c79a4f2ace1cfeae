use std::fmt::Write;

use super::{OutputError, TraceRecord};

pub const CSV_HEADER: &str =
    "tick,x0,y0,h0,x1,y1,h1,adc1,adc2,adc3,adc4,adc5,x1bit,x2bit,x3bit,x4bit,x5bit,decision,fallback,halt";

/// One header line plus one row per record. Positions in inches with 6
/// decimals, headings in degrees with 6 decimals.
pub fn trace_csv(trace: &[TraceRecord]) -> Result<String, OutputError> {
    if trace.is_empty() {
        return Err(OutputError::EmptyTrace);
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in trace {
        let adc = r.scan.adc().map(|a| a.to_string()).join(",");
        let bits = r.scan.bits().0.map(|b| u8::from(b).to_string()).join(",");
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{}",
            r.tick,
            r.before.x(),
            r.before.y(),
            r.before.heading().to_degrees(),
            r.after.x(),
            r.after.y(),
            r.after.heading().to_degrees(),
            adc,
            bits,
            r.decision,
            u8::from(r.fallback_used),
            r.halted.map_or("none", |h| h.name()),
        )
        .unwrap();
    }
    Ok(out)
}
