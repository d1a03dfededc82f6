use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::solver::IterationTrace;
use crate::tensor::Tensor3;

/// `iter,error1,error2,error3` plus `mpsnr,mssim` when the trace has them.
pub fn trace_csv(trace: &IterationTrace) -> String {
    let with_quality = trace.rows.iter().any(|r| r.mpsnr.is_some());
    let mut out = String::from("iter,error1,error2,error3");
    if with_quality {
        out.push_str(",mpsnr,mssim");
    }
    out.push('\n');
    for row in &trace.rows {
        let [e1, e2, e3] = row.errors;
        let _ = write!(out, "{},{e1},{e2},{e3}", row.iteration);
        if with_quality {
            let show = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
            let _ = write!(out, ",{},{}", show(row.mpsnr), show(row.mssim));
        }
        out.push('\n');
    }
    out
}

/// Per-band rows (1-based band index) followed by a summary block.
pub fn metrics_csv(report: &MetricsReport) -> String {
    let mut out = String::from("band,psnr,ssim\n");
    for (q, (p, s)) in report.psnr.iter().zip(&report.ssim).enumerate() {
        let _ = writeln!(out, "{},{p},{s}", q + 1);
    }
    out.push_str("mpsnr,mssim,ergas,msad\n");
    let _ = writeln!(
        out,
        "{},{},{},{}",
        report.mpsnr, report.mssim, report.ergas, report.msad
    );
    out
}

/// Binary PGM (P5) of 0-based band `q`, min-max scaled to 0..=255.
pub fn band_pgm(t: &Tensor3, q: usize) -> Result<Vec<u8>> {
    let (m, n, p) = t.dims();
    if q >= p {
        return Err(Error::IndexOutOfRange { index: q, count: p });
    }
    let band = t.band(q);
    let (lo, hi) = band
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    let mut out = format!("P5\n{n} {m}\n255\n").into_bytes();
    out.extend(band.iter().map(|&v| {
        if span > 0.0 {
            ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::TraceRow;

    #[test]
    fn pgm_layout() {
        let t = Tensor3::from_vec((2, 3, 1), vec![0.0, 0.5, 1.0, 1.0, 0.5, 0.0]).unwrap();
        let pgm = band_pgm(&t, 0).unwrap();
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(&pgm[header.len()..], &[0, 128, 255, 255, 128, 0]);
        assert!(band_pgm(&t, 1).is_err());
    }

    #[test]
    fn trace_columns() {
        let mut trace = IterationTrace::default();
        trace.rows.push(TraceRow {
            iteration: 1,
            errors: [0.5, 0.25, 0.125],
            mpsnr: None,
            mssim: None,
        });
        assert_eq!(trace_csv(&trace), "iter,error1,error2,error3\n1,0.5,0.25,0.125\n");
        trace.rows[0].mpsnr = Some(30.0);
        trace.rows[0].mssim = Some(0.9);
        assert_eq!(
            trace_csv(&trace),
            "iter,error1,error2,error3,mpsnr,mssim\n1,0.5,0.25,0.125,30,0.9\n"
        );
    }
}
