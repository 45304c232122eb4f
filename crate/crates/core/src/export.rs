//! Flat CSV dumps of trained models.
//!
//! Each dump is a sequence of sections introduced by a bracketed tag line:
//!
//! ```text
//! [weights]
//! w_1,...,w_L
//! [table]
//! p_1,...,p_L,e
//! ...
//! ```
//!
//! Table rows hold the stored key (after the metric transform) followed by its
//! payload. Kernel models use a `[kernel]` section of `c_1,...,c_L,a` rows.

use std::io::{self, Write};

use crate::augmented::{AslmModel, AugmentedModel, ErrorTable, KnnModel};
use crate::kernel::KlmsModel;
use crate::linear::WeightVector;
use crate::quantizer::Codebook;
use crate::scalar::Scalar;

pub trait CsvDump {
    fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()>;

    fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ASCII")
    }
}

fn write_row<T: Scalar, W: Write>(w: &mut W, values: &[T], last: Option<T>) -> io::Result<()> {
    let mut first = true;
    for v in values.iter().chain(last.as_ref()) {
        if !first {
            w.write_all(b",")?;
        }
        write!(w, "{v}")?;
        first = false;
    }
    w.write_all(b"\n")
}

impl<T: Scalar> CsvDump for WeightVector<T> {
    fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "[weights]")?;
        write_row(w, self.as_slice(), None)
    }
}

impl<T: Scalar> CsvDump for ErrorTable<T> {
    fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "[table]")?;
        for (p, &e) in self.index().stored_points().into_iter().zip(self.errors()) {
            write_row(w, p, Some(e))?;
        }
        Ok(())
    }
}

impl<T: Scalar> CsvDump for AslmModel<T> {
    fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        self.weights().write_csv(w)?;
        self.table().write_csv(w)
    }
}

impl<T: Scalar, B: CsvDump> CsvDump for AugmentedModel<T, B> {
    fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        self.base().write_csv(w)?;
        self.table().write_csv(w)
    }
}

impl<T: Scalar> CsvDump for KnnModel<T> {
    fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "[table]")?;
        for (p, &d) in self.index().stored_points().into_iter().zip(self.index().payloads()) {
            write_row(w, p, Some(d))?;
        }
        Ok(())
    }
}

impl<T: Scalar> CsvDump for KlmsModel<T> {
    fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "[kernel]")?;
        for (j, &a) in self.coefficients().iter().enumerate() {
            write_row(w, self.center(j), Some(a))?;
        }
        Ok(())
    }
}

/// Codebook centers (raw space) with the number of samples assigned to each.
impl<T: Scalar> CsvDump for Codebook<T> {
    fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "[codebook]")?;
        let mut counts = vec![0usize; self.len()];
        for &c in self.assignments() {
            counts[c] += 1;
        }
        for (c, k) in counts.into_iter().enumerate() {
            write_row(w, self.center(c), Some(T::from_usize_lossy(k)))?;
        }
        Ok(())
    }
}
