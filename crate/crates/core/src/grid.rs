//! Sampled scalar fields on uniform tensor grids, with CSV serialization.
//!
//! Two-dimensional fields are stored as an `nx1 × nx2` array indexed
//! `[i, j]`, where `i` runs along `x1` and `j` along `x2`. Nodes include the
//! boundary: node `i` sits at `i / (nx1 - 1)`.
//!
//! CSV layout for a [`GridField`]: the first record is
//! `nx1,nx2,reference` or `nx1,nx2,physical,<eps>`, followed by `nx1`
//! records of `nx2` samples each (row-major). A [`GridField1D`] is written
//! as a single `nx` record followed by one sample per record.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::domain::{DomainTag, Epsilon};
use crate::error::{Error, Result};
use crate::io::{self, fmt_f64};

/// Coordinate of node `i` on a uniform grid with `n` nodes over `[0, 1]`.
#[inline]
pub fn node(i: usize, n: usize) -> f64 {
    i as f64 / (n - 1) as f64
}

/// Node coordinates of a uniform grid with `n` nodes over `[0, 1]`.
pub fn nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| node(i, n)).collect()
}

pub(crate) fn check_count(field: &str, n: usize) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::invalid(
            field,
            format!("node count must be odd and at least 3, got {n}"),
        ));
    }
    Ok(())
}

/// Samples of a scalar field on the closed unit square (reference domain) or
/// on the closed thin plate (physical domain).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    values: Array2<f64>,
    tag: DomainTag,
}

impl GridField {
    pub fn new(values: Array2<f64>, tag: DomainTag) -> Result<Self> {
        let (nx1, nx2) = values.dim();
        check_count("nx1", nx1)?;
        check_count("nx2", nx2)?;
        if let Some(((i, j), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("node ({i}, {j})"),
                value: *v,
            });
        }
        Ok(GridField { values, tag })
    }

    pub fn zeros(nx1: usize, nx2: usize, tag: DomainTag) -> Result<Self> {
        GridField::new(Array2::zeros((nx1, nx2)), tag)
    }

    pub fn nx1(&self) -> usize {
        self.values.nrows()
    }

    pub fn nx2(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn tag(&self) -> DomainTag {
        self.tag
    }

    /// Same samples under a different domain tag. Uniform grids on the square
    /// and on the plate correspond node-for-node, so no resampling happens.
    pub fn retagged(self, tag: DomainTag) -> Self {
        GridField { tag, ..self }
    }

    /// Checks that `other` lives on the same grid and domain.
    pub fn check_compatible(&self, other: &GridField) -> Result<()> {
        if self.values.dim() != other.values.dim() {
            return Err(Error::GridMismatch(format!(
                "{}x{} vs {}x{}",
                self.nx1(),
                self.nx2(),
                other.nx1(),
                other.nx2()
            )));
        }
        if self.tag != other.tag {
            return Err(Error::GridMismatch(format!(
                "domain {} vs {}",
                self.tag, other.tag
            )));
        }
        Ok(())
    }

    /// Largest absolute nodewise difference.
    pub fn max_abs_diff(&self, other: &GridField) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs())))
    }

    /// Nodewise difference `self - other`.
    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        self.check_compatible(other)?;
        GridField::new(&self.values - &other.values, self.tag)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::WriterBuilder::new().flexible(true).from_writer(w);
        let (nx1, nx2) = (self.nx1().to_string(), self.nx2().to_string());
        match self.tag {
            DomainTag::Reference => wr.write_record([nx1.as_str(), nx2.as_str(), "reference"])?,
            DomainTag::Physical(eps) => wr.write_record([
                nx1.as_str(),
                nx2.as_str(),
                "physical",
                fmt_f64(eps.value()).as_str(),
            ])?,
        }
        for row in self.values.rows() {
            wr.write_record(row.iter().map(|v| fmt_f64(*v)))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut w = io::create(path)?;
        self.write_csv(&mut w)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        io::finish(w, path)
    }

    /// Parses the CSV layout described in the module docs. `path` is used
    /// only for diagnostics.
    pub fn read_csv<R: Read>(r: R, path: &Path) -> Result<Self> {
        let mut records = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(r)
            .into_records();
        let mut next = |what: &str| -> Result<csv::StringRecord> {
            records
                .next()
                .ok_or_else(|| Error::format(path, format!("missing {what}")))?
                .map_err(|e| Error::format(path, e.to_string()))
        };

        let header = next("header record")?;
        if header.len() < 3 {
            return Err(Error::format(path, "header needs nx1,nx2,domain_tag"));
        }
        let nx1 = io::parse_usize(&header[0], path, "nx1")?;
        let nx2 = io::parse_usize(&header[1], path, "nx2")?;
        let tag = match (&header[2], header.get(3)) {
            ("reference", None) => DomainTag::Reference,
            ("physical", Some(eps)) => {
                let eps = io::parse_f64(eps, path, "eps")?;
                DomainTag::Physical(Epsilon::new(eps).map_err(|e| Error::format(path, e.to_string()))?)
            }
            (other, _) => {
                return Err(Error::format(
                    path,
                    format!("unknown domain tag {other:?} (expected reference or physical,<eps>)"),
                ))
            }
        };
        check_count("nx1", nx1).map_err(|e| Error::format(path, e.to_string()))?;
        check_count("nx2", nx2).map_err(|e| Error::format(path, e.to_string()))?;

        let mut values = Array2::zeros((nx1, nx2));
        for i in 0..nx1 {
            let rec = next(&format!("row {i}"))?;
            if rec.len() != nx2 {
                return Err(Error::format(
                    path,
                    format!("row {i} has {} samples, expected {nx2}", rec.len()),
                ));
            }
            for (j, s) in rec.iter().enumerate() {
                values[[i, j]] = io::parse_f64(s, path, &format!("sample ({i}, {j})"))?;
            }
        }
        if next("trailing data").is_ok() {
            return Err(Error::format(path, format!("more than {nx1} sample rows")));
        }
        GridField::new(values, tag)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        GridField::read_csv(io::open(path)?, path)
    }
}

/// Samples `f(x1, x2)` at the nodes of an `nx1 × nx2` grid on the unit square.
pub fn sample<F>(f: F, nx1: usize, nx2: usize) -> Result<GridField>
where
    F: Fn(f64, f64) -> f64,
{
    check_count("nx1", nx1)?;
    check_count("nx2", nx2)?;
    let values = Array2::from_shape_fn((nx1, nx2), |(i, j)| f(node(i, nx1), node(j, nx2)));
    GridField::new(values, DomainTag::Reference)
}

/// Samples `f(x, y)` on the closed plate `[0,1] × [0,eps]`.
pub fn sample_physical<F>(f: F, eps: Epsilon, nx1: usize, nx2: usize) -> Result<GridField>
where
    F: Fn(f64, f64) -> f64,
{
    check_count("nx1", nx1)?;
    check_count("nx2", nx2)?;
    let e = eps.value();
    let values = Array2::from_shape_fn((nx1, nx2), |(i, j)| f(node(i, nx1), e * node(j, nx2)));
    GridField::new(values, DomainTag::Physical(eps))
}

/// Samples of a function on the closed interval `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField1D {
    values: Array1<f64>,
}

impl GridField1D {
    pub fn new(values: Array1<f64>) -> Result<Self> {
        check_count("nx", values.len())?;
        if let Some((i, v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("node {i}"),
                value: *v,
            });
        }
        Ok(GridField1D { values })
    }

    pub fn nx(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn max_abs_diff(&self, other: &GridField1D) -> Result<f64> {
        if self.nx() != other.nx() {
            return Err(Error::GridMismatch(format!("{} vs {}", self.nx(), other.nx())));
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs())))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::WriterBuilder::new().from_writer(w);
        wr.write_record([self.nx().to_string()])?;
        for v in &self.values {
            wr.write_record([fmt_f64(*v)])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut w = io::create(path)?;
        self.write_csv(&mut w)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        io::finish(w, path)
    }

    pub fn read_csv<R: Read>(r: R, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(r);
        let mut fields = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
            if rec.len() != 1 {
                return Err(Error::format(path, "expected one value per record"));
            }
            fields.push(rec[0].to_string());
        }
        let (head, samples) = fields
            .split_first()
            .ok_or_else(|| Error::format(path, "empty file"))?;
        let nx = io::parse_usize(head, path, "nx")?;
        if samples.len() != nx {
            return Err(Error::format(
                path,
                format!("header says {nx} samples, found {}", samples.len()),
            ));
        }
        let values = samples
            .iter()
            .enumerate()
            .map(|(i, s)| io::parse_f64(s, path, &format!("sample {i}")))
            .collect::<Result<Vec<_>>>()?;
        GridField1D::new(Array1::from(values)).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        GridField1D::read_csv(io::open(path)?, path)
    }
}

/// Samples `f(x)` at the nodes of a uniform grid on `[0, 1]`.
pub fn sample1d<F: Fn(f64) -> f64>(f: F, nx: usize) -> Result<GridField1D> {
    check_count("nx", nx)?;
    GridField1D::new(Array1::from_shape_fn(nx, |i| f(node(i, nx))))
}
