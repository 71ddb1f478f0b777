//! One module per experiment family. Each exposes a `run_*` function
//! returning a typed outcome and an `artifacts` method that renders it.

pub mod bounds_report;
pub mod clt;
pub mod decay;
pub mod mle;

use mflin_core::DensityGrid;

use crate::artifacts::Csv;

pub(crate) fn density_csv(f: &DensityGrid) -> Csv {
    let mut csv = Csv::new(&["x", "value"]);
    let g = f.grid();
    for (i, v) in f.values().iter().enumerate() {
        csv.row(&[&g.x(i), v]);
    }
    csv
}
