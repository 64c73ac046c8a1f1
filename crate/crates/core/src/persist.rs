//! Dataset container file: a self-describing, versioned, line-oriented text
//! format. Floats are serialized with Rust's shortest round-trip formatting,
//! so save followed by load is bit-exact on coordinates and values.

use crate::error::{Error, Result};
use crate::field::{Points, Snapshot, SortedPointCloud, TrainingDataset};
use crate::mesh::{Grid, GridSpec};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

const MAGIC: &str = "cdi-dataset";
const VERSION: &str = "v1";

/// Serialize a dataset to its container text.
pub fn dataset_to_string(dataset: &TrainingDataset) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "param_dim {}", dataset.parameters().dim());
    if let Some(first) = dataset.snapshots().first() {
        for name in &first.component_names {
            if name.chars().any(char::is_whitespace) || name.is_empty() {
                return Err(Error::schema(format!("component name {name:?} contains whitespace")));
            }
        }
        let _ = write!(out, "components {}", first.n_components());
        for name in &first.component_names {
            let _ = write!(out, " {name}");
        }
        out.push('\n');
    } else {
        let _ = writeln!(out, "components 0");
    }
    match dataset.grid().spec() {
        GridSpec::IntervalUniform { a, b, n_nodes } => {
            let _ = writeln!(out, "grid interval_uniform {a} {b} {n_nodes}");
        }
        GridSpec::RectangleUniform { lo, hi, nx, ny } => {
            let _ = writeln!(out, "grid rectangle_uniform {} {} {} {} {nx} {ny}", lo[0], lo[1], hi[0], hi[1]);
        }
        GridSpec::DiskPolar { center, radius, n_r, n_theta } => {
            let _ = writeln!(out, "grid disk_polar {} {} {radius} {n_r} {n_theta}", center[0], center[1]);
        }
    }
    let _ = writeln!(out, "snapshots {}", dataset.len());
    for (k, snap) in dataset.snapshots().iter().enumerate() {
        let _ = writeln!(out, "snapshot {k}");
        let _ = write!(out, "param");
        for v in &snap.parameter {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
        let _ = writeln!(out, "values {} {}", snap.n_rows(), snap.n_components());
        for i in 0..snap.n_rows() {
            let row = snap.row(i);
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
    }
    match &dataset.sorted_clouds {
        None => {
            let _ = writeln!(out, "sorted_clouds none");
        }
        Some(clouds) => {
            let n_pts = clouds.first().map_or(0, SortedPointCloud::len);
            let _ = writeln!(out, "sorted_clouds {} {}", clouds.len(), n_pts);
            for (k, cloud) in clouds.iter().enumerate() {
                let _ = writeln!(out, "cloud {k} {}", cloud.template_id);
                for p in cloud.points.iter() {
                    for (c, v) in p.iter().enumerate() {
                        if c > 0 {
                            out.push(' ');
                        }
                        let _ = write!(out, "{v}");
                    }
                    out.push('\n');
                }
            }
        }
    }
    out.push_str("end\n");
    Ok(out)
}

/// Save a dataset; round-trips bit-exactly through [`load_dataset`].
pub fn save_dataset(dataset: &TrainingDataset, path: &Path) -> Result<()> {
    let text = dataset_to_string(dataset)?;
    fs::write(path, text)?;
    Ok(())
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader { lines: text.lines().enumerate() }
    }

    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        match self.lines.next() {
            Some((i, line)) => Ok((i + 1, line.split_whitespace().collect())),
            None => Err(Error::Parse { line: 0, msg: "unexpected end of file".into() }),
        }
    }

    fn expect(&mut self, keyword: &str) -> Result<(usize, Vec<&'a str>)> {
        let (ln, tokens) = self.next()?;
        if tokens.first() != Some(&keyword) {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected '{keyword}', found {:?}", tokens.first().unwrap_or(&"")),
            });
        }
        Ok((ln, tokens))
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("bad float {tok:?}") })?;
    if !v.is_finite() {
        return Err(Error::schema(format!("non-finite value {tok:?} at line {line}")));
    }
    Ok(v)
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad integer {tok:?}") })
}

/// Parse a dataset from its container text.
pub fn dataset_from_string(text: &str) -> Result<TrainingDataset> {
    let mut r = Reader::new(text);
    let (ln, header) = r.next()?;
    if header.len() != 2 || header[0] != MAGIC {
        return Err(Error::schema(format!("not a {MAGIC} file (line {ln})")));
    }
    if header[1] != VERSION {
        return Err(Error::schema(format!(
            "schema version mismatch: file is {}, reader supports {VERSION}",
            header[1]
        )));
    }
    let (ln, toks) = r.expect("param_dim")?;
    let param_dim = parse_usize(toks.get(1).copied().unwrap_or(""), ln)?;
    let (ln, toks) = r.expect("components")?;
    let n_comp = parse_usize(toks.get(1).copied().unwrap_or(""), ln)?;
    if toks.len() != 2 + n_comp {
        return Err(Error::Parse { line: ln, msg: "component name count mismatch".into() });
    }
    let names: Vec<String> = toks[2..].iter().map(|s| s.to_string()).collect();
    let (ln, toks) = r.expect("grid")?;
    let spec = match toks.get(1).copied() {
        Some("interval_uniform") if toks.len() == 5 => GridSpec::IntervalUniform {
            a: parse_f64(toks[2], ln)?,
            b: parse_f64(toks[3], ln)?,
            n_nodes: parse_usize(toks[4], ln)?,
        },
        Some("rectangle_uniform") if toks.len() == 8 => GridSpec::RectangleUniform {
            lo: [parse_f64(toks[2], ln)?, parse_f64(toks[3], ln)?],
            hi: [parse_f64(toks[4], ln)?, parse_f64(toks[5], ln)?],
            nx: parse_usize(toks[6], ln)?,
            ny: parse_usize(toks[7], ln)?,
        },
        Some("disk_polar") if toks.len() == 7 => GridSpec::DiskPolar {
            center: [parse_f64(toks[2], ln)?, parse_f64(toks[3], ln)?],
            radius: parse_f64(toks[4], ln)?,
            n_r: parse_usize(toks[5], ln)?,
            n_theta: parse_usize(toks[6], ln)?,
        },
        other => {
            return Err(Error::Parse { line: ln, msg: format!("unknown grid kind {other:?}") });
        }
    };
    let grid = Grid::from_spec(&spec)?;
    let (ln, toks) = r.expect("snapshots")?;
    let n_snaps = parse_usize(toks.get(1).copied().unwrap_or(""), ln)?;
    let mut snapshots = Vec::with_capacity(n_snaps);
    for k in 0..n_snaps {
        let (ln, toks) = r.expect("snapshot")?;
        if parse_usize(toks.get(1).copied().unwrap_or(""), ln)? != k {
            return Err(Error::Parse { line: ln, msg: format!("expected snapshot {k}") });
        }
        let (ln, toks) = r.expect("param")?;
        if toks.len() != 1 + param_dim {
            return Err(Error::Parse { line: ln, msg: "parameter dimension mismatch".into() });
        }
        let mut param = Vec::with_capacity(param_dim);
        for t in &toks[1..] {
            param.push(parse_f64(t, ln)?);
        }
        let (ln, toks) = r.expect("values")?;
        let rows = parse_usize(toks.get(1).copied().unwrap_or(""), ln)?;
        let cols = parse_usize(toks.get(2).copied().unwrap_or(""), ln)?;
        if cols != n_comp {
            return Err(Error::schema(format!("snapshot {k} has {cols} components, header says {n_comp}")));
        }
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (ln, toks) = r.next()?;
            if toks.len() != cols {
                return Err(Error::Parse { line: ln, msg: format!("expected {cols} values") });
            }
            for t in toks {
                values.push(parse_f64(t, ln)?);
            }
        }
        snapshots.push(Snapshot::new(param, values, cols, names.clone())?);
    }
    let (ln, toks) = r.expect("sorted_clouds")?;
    let sorted_clouds = if toks.get(1) == Some(&"none") {
        None
    } else {
        let n_clouds = parse_usize(toks.get(1).copied().unwrap_or(""), ln)?;
        let n_pts = parse_usize(toks.get(2).copied().unwrap_or(""), ln)?;
        let dim = grid.dim();
        let mut clouds = Vec::with_capacity(n_clouds);
        for k in 0..n_clouds {
            let (ln, toks) = r.expect("cloud")?;
            if parse_usize(toks.get(1).copied().unwrap_or(""), ln)? != k {
                return Err(Error::Parse { line: ln, msg: format!("expected cloud {k}") });
            }
            let template_id = parse_usize(toks.get(2).copied().unwrap_or(""), ln)?;
            let mut pts = Points::zeros(0, dim);
            let mut buf = vec![0.0; dim];
            for _ in 0..n_pts {
                let (ln, toks) = r.next()?;
                if toks.len() != dim {
                    return Err(Error::Parse { line: ln, msg: format!("expected {dim} coordinates") });
                }
                for (slot, t) in buf.iter_mut().zip(&toks) {
                    *slot = parse_f64(t, ln)?;
                }
                pts.push(&buf);
            }
            clouds.push(SortedPointCloud::new(pts, template_id)?);
        }
        Some(clouds)
    };
    r.expect("end")?;
    let mut dataset = TrainingDataset::new(grid, snapshots)?;
    dataset.sorted_clouds = sorted_clouds;
    Ok(dataset)
}

/// Load a dataset saved by [`save_dataset`]. A truncated or malformed file is
/// rejected as a whole; no partial dataset is returned.
pub fn load_dataset(path: &Path) -> Result<TrainingDataset> {
    let text = fs::read_to_string(path)?;
    dataset_from_string(&text)
}
