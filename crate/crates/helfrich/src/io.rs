//! Curve files and report serialization.
//!
//! Curves travel as CSV with header `t,x,z`, one row per sample, UTF-8 with
//! LF line endings; an optional JSON sidecar next to the file (same stem,
//! `.json` extension) carries `{"closed": bool, "name": string}` — absent
//! means an open curve.  All floating-point output is printed with 17
//! significant digits so a written value parses back to the identical bits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::curve::GeneratingCurve;
use crate::error::{Error, Result};
use crate::geometry::{AreaMeasure, CurvatureField};
use crate::numeric::Vec2;

/// Sidecar contents for a curve file.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CurveSidecar {
    #[serde(default)]
    pub closed: bool,
    #[serde(default)]
    pub name: String,
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes the curve as CSV (and a sidecar when it is closed or named).
pub fn write_curve(path: &Path, curve: &GeneratingCurve, name: Option<&str>) -> Result<()> {
    let mut out = String::with_capacity(64 * curve.n());
    out.push_str("t,x,z\n");
    for s in curve.samples() {
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", s.t, s.x, s.z));
    }
    fs::write(path, out)?;
    if curve.closed() || name.is_some() {
        let sidecar = CurveSidecar {
            closed: curve.closed(),
            name: name.unwrap_or_default().to_string(),
        };
        fs::write(sidecar_path(path), to_json_line(&sidecar)?)?;
    }
    Ok(())
}

/// Reads a curve file, honoring a sidecar if one sits next to it.
pub fn read_curve(path: &Path) -> Result<GeneratingCurve> {
    let text = fs::read_to_string(path)?;
    let points = parse_curve_text(&text)?;
    let sidecar = sidecar_path(path);
    let closed = if sidecar.exists() {
        let meta: CurveSidecar = serde_json::from_str(&fs::read_to_string(sidecar)?)?;
        meta.closed
    } else {
        false
    };
    GeneratingCurve::from_points(&points, closed)
}

/// Parses the CSV body; errors carry the 1-based line and field index.
pub fn parse_curve_text(text: &str) -> Result<Vec<Vec2>> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, field: 0, message: "empty curve file".into() })?
        .1;
    if header.trim() != "t,x,z" {
        return Err(Error::Parse {
            line: 1,
            field: 0,
            message: format!("expected header 't,x,z', found '{}'", header.trim()),
        });
    }
    let mut points = Vec::new();
    let mut prev_t = f64::NEG_INFINITY;
    for (idx, raw) in lines {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line,
                field: fields.len().min(4),
                message: format!("expected 3 comma-separated values, found {}", fields.len()),
            });
        }
        let mut parsed = [0.0f64; 3];
        for (k, text) in fields.iter().enumerate() {
            parsed[k] = text.trim().parse::<f64>().map_err(|e| Error::Parse {
                line,
                field: k + 1,
                message: format!("'{}': {e}", text.trim()),
            })?;
            if !parsed[k].is_finite() {
                return Err(Error::Parse {
                    line,
                    field: k + 1,
                    message: "non-finite value".into(),
                });
            }
        }
        if parsed[0] <= prev_t {
            return Err(Error::Parse {
                line,
                field: 1,
                message: format!("parameter must increase strictly, {} after {prev_t}", parsed[0]),
            });
        }
        prev_t = parsed[0];
        points.push(Vec2::new(parsed[1], parsed[2]));
    }
    Ok(points)
}

/// Writes the per-node geometry dump `t,x,z,k1,k2,weight`.
pub fn write_geometry_csv(
    path: &Path,
    curve: &GeneratingCurve,
    field: &CurvatureField,
    measure: &AreaMeasure,
) -> Result<()> {
    let mut out = String::with_capacity(96 * curve.n());
    out.push_str("t,x,z,k1,k2,weight\n");
    for (i, s) in curve.samples().iter().enumerate() {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            s.t, s.x, s.z, field.meridian[i], field.parallel[i], measure.node_weights[i]
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// JSON with every float printed to 17 significant digits, pretty-printed.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    serialize_with(value, LosslessFloats { inner: PrettyFormatter::new() })
}

/// Same, compact on a single line (for JSON-lines streams and sidecars).
pub fn to_json_line<T: Serialize>(value: &T) -> Result<String> {
    serialize_with(value, LosslessFloats { inner: CompactInner })
}

/// Serializes and writes in one step.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_json_string(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn serialize_with<T: Serialize, F: Formatter>(value: &T, formatter: F) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serializer emits UTF-8"))
}

/// Formatter wrapper: floats at full precision, structure delegated.
struct LosslessFloats<F> {
    inner: F,
}

/// Stand-in with the trait's compact defaults for everything.
struct CompactInner;
impl Formatter for CompactInner {}

impl<F: Formatter> Formatter for LosslessFloats<F> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        self.inner.end_object_value(writer)
    }
}
