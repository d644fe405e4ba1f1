use toric_sde::eigenfunction::boundary_value;
use toric_sde::{to_multipole, HalfInt, MultipoleData};

use crate::classify::strip_leading_v0;
use crate::{CliError, CliResult, Document, Outcome, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub eta: f64,
    pub f0: f64,
    /// Slope of the piece starting at `eta` (the last piece for the final row).
    pub slope: HalfInt,
}

/// Rows of `f_0`: every kink exactly, `samples` interior points on each piece,
/// and one unit of each unbounded piece.
pub fn plot_rows(w: &MultipoleData, samples: usize) -> Vec<PlotRow> {
    let b = boundary_value(w);
    let weights = w.weights();
    let kinks = w.kinks();
    let k = weights.len();
    // slope on piece p (between kinks p-1 and p) in twice-units
    let slope = |p: usize| -> HalfInt {
        let twice: i64 = weights.iter().enumerate().map(|(i, (a, _))| if i < p { a.twice() } else { -a.twice() }).sum();
        HalfInt::from_twice(twice)
    };
    let mut ends = Vec::with_capacity(k + 2);
    ends.push(kinks[0] - 1.0);
    ends.extend(kinks.iter().copied());
    ends.push(kinks[k - 1] + 1.0);
    let mut rows = Vec::new();
    for p in 0..=k {
        let (l, r) = (ends[p], ends[p + 1]);
        for i in 0..=samples {
            let eta = l + (r - l) * i as f64 / (samples + 1) as f64;
            rows.push(PlotRow { eta, f0: b.eval(eta), slope: slope(p) });
        }
    }
    let last = ends[k + 1];
    rows.push(PlotRow { eta: last, f0: b.eval(last), slope: slope(k) });
    rows
}

pub fn rows_to_csv(rows: &[PlotRow]) -> CliResult<String> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e.to_string()));
    wr.write_record(["eta", "f0", "slope"]).map_err(io)?;
    for r in rows {
        wr.write_record([r.eta.to_string(), r.f0.to_string(), r.slope.to_string()]).map_err(io)?;
    }
    let bytes = wr.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn boundary_plot(doc: &Document, samples: usize) -> CliResult<Outcome> {
    let w = match doc {
        Document::Multipole { weights } => Document::multipole(weights)?,
        Document::Isotropy { vectors } => {
            let d = Document::isotropy(strip_leading_v0(vectors).unwrap_or(vectors))?;
            to_multipole(&d).map_err(|e| CliError::Inadmissible(e.to_string()))?.weights
        }
    };
    Ok(Outcome { status: Status::Pass, body: rows_to_csv(&plot_rows(&w, samples))?, notes: Vec::new() })
}
