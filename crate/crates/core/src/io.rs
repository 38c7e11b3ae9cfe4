//! CSV and curve-file formats.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! written file reads back bit-identical and repeated runs produce
//! byte-identical output.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::force_curve::{ForceCurve, PowerLawCurve, SampledCurve};
use crate::magnetic_spring::BalanceProfile;
use crate::spring_synthesis::{SpringCatalog, SpringDesign};
use crate::unit_sim::PullTestProfile;

pub const SAMPLES_HEADER: [&str; 2] = ["x_mm", "force_N"];
pub const CATALOG_HEADER: [&str; 1] = ["k_N_per_mm"];
pub const DESIGN_HEADER: [&str; 4] = [
    "spring_index",
    "k_N_per_mm",
    "engagement_end_mm",
    "cam_depth_mm",
];
pub const BALANCE_HEADER: [&str; 2] = ["x_mm", "internal_force_N"];
pub const FIT_RESIDUALS_HEADER: [&str; 3] = ["x_mm", "force_N", "residual_N"];
pub const PULL_HEADER: [&str; 2] = ["displacement_mm", "force_N"];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn write_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<output>", io),
        other => Error::Config(format!("csv write failed: {other:?}")),
    }
}

/// Reads every row of a headed CSV as numbers, checking the header.
fn read_table<R: Read>(reader: R, label: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found = rdr.headers().map_err(|e| Error::parse(label, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            label,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(label, e))?;
        let line = i + 2;
        let row = rec
            .iter()
            .map(|field| {
                let v: f64 = field.parse().map_err(|_| {
                    Error::parse(label, format!("line {line}: `{field}` is not a number"))
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::parse(
                        label,
                        format!("line {line}: `{field}` is not finite"),
                    ))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Parses `x_mm,force_N` samples.
pub fn parse_samples<R: Read>(reader: R, label: &Path) -> Result<Vec<(f64, f64)>> {
    let rows = read_table(reader, label, &SAMPLES_HEADER)?;
    if rows.is_empty() {
        return Err(Error::parse(label, "no samples"));
    }
    Ok(rows.into_iter().map(|r| (r[0], r[1])).collect())
}

pub fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>> {
    parse_samples(open(path)?, path)
}

pub fn write_samples<W: Write>(w: W, samples: &[(f64, f64)]) -> Result<()> {
    let rows = samples
        .iter()
        .map(|&(x, f)| vec![x.to_string(), f.to_string()]);
    write_table(w, &SAMPLES_HEADER, rows, &[])
}

/// Samples with the fitted model's residual (model minus measurement).
pub fn write_fit_residuals<W: Write>(
    w: W,
    samples: &[(f64, f64)],
    residuals: &[f64],
) -> Result<()> {
    let rows = samples
        .iter()
        .zip(residuals)
        .map(|(&(x, f), r)| vec![x.to_string(), f.to_string(), r.to_string()]);
    write_table(w, &FIT_RESIDUALS_HEADER, rows, &[])
}

/// Parses a one-column `k_N_per_mm` catalog.
pub fn parse_catalog<R: Read>(reader: R, label: &Path) -> Result<SpringCatalog> {
    let rows = read_table(reader, label, &CATALOG_HEADER)?;
    SpringCatalog::new(rows.into_iter().map(|r| r[0]).collect())
}

pub fn read_catalog(path: &Path) -> Result<SpringCatalog> {
    parse_catalog(open(path)?, path)
}

fn write_table<W, I>(w: W, header: &[&str], rows: I, trailer: &[[String; 2]]) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<String>>,
{
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(w);
    wtr.write_record(header).map_err(write_err)?;
    for row in rows {
        wtr.write_record(&row).map_err(write_err)?;
    }
    for line in trailer {
        wtr.write_record(line).map_err(write_err)?;
    }
    wtr.flush().map_err(|e| Error::io("<output>", e))
}

/// Spring table followed by the `delta_e_Nmm,<value>` summary line.
/// Springs are numbered from 1, softest-engaging first.
pub fn write_design<W: Write>(w: W, design: &SpringDesign<f64>) -> Result<()> {
    let rows = design.springs.iter().enumerate().map(|(i, s)| {
        vec![
            (i + 1).to_string(),
            s.stiffness.to_string(),
            s.engagement_end.to_string(),
            s.cam_depth.to_string(),
        ]
    });
    write_table(
        w,
        &DESIGN_HEADER,
        rows,
        &[["delta_e_Nmm".into(), design.delta_e.to_string()]],
    )
}

pub fn write_balance<W: Write>(w: W, profile: &BalanceProfile<f64>) -> Result<()> {
    let rows = profile
        .samples
        .iter()
        .map(|s| vec![s.x.to_string(), s.internal_force.to_string()]);
    write_table(w, &BALANCE_HEADER, rows, &[])
}

/// Load-cell readings, weights included.
pub fn write_pull_profile<W: Write>(w: W, profile: &PullTestProfile<f64>) -> Result<()> {
    let rows = profile
        .samples
        .iter()
        .map(|s| vec![s.displacement.to_string(), s.force().to_string()]);
    write_table(w, &PULL_HEADER, rows, &[])
}

/// Two-column `key,value` summary.
pub fn write_summary<W: Write>(w: W, entries: &[(&str, String)]) -> Result<()> {
    let rows = entries.iter().map(|(k, v)| vec![k.to_string(), v.clone()]);
    write_table(w, &["key", "value"], rows, &[])
}

/// Curve description shared by curve files and unit fixtures.
///
/// `mirror` and `scaled_attraction` refer to the attraction curve and are
/// only meaningful for a repulsion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    PowerLaw {
        amplitude: f64,
        offset_mm: f64,
        exponent: f64,
    },
    /// Power law of the given exponent through two `[x_mm, force_N]` points.
    TwoPoint {
        points: [[f64; 2]; 2],
        exponent: f64,
    },
    /// Monotone cubic through inline points or a samples CSV, resolved
    /// relative to the file that names it.
    Samples {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<[f64; 2]>>,
    },
    Mirror,
    /// Attraction scaled so that the imbalance at contact equals the value.
    ScaledAttraction {
        #[serde(rename = "peak_imbalance_N")]
        peak_imbalance: f64,
    },
}

impl CurveSpec {
    pub fn from_curve(curve: &ForceCurve<f64>) -> Self {
        match curve {
            ForceCurve::PowerLaw(p) => CurveSpec::PowerLaw {
                amplitude: p.amplitude(),
                offset_mm: p.offset(),
                exponent: p.exponent(),
            },
            ForceCurve::Sampled(s) => CurveSpec::Samples {
                file: None,
                points: Some(s.points().map(|(x, f)| [x, f]).collect()),
            },
        }
    }

    /// Builds the curve; `base` resolves relative sample files and
    /// `attraction` backs the repulsion-only kinds.
    pub fn resolve(
        &self,
        label: &Path,
        base: Option<&Path>,
        attraction: Option<&ForceCurve<f64>>,
    ) -> Result<ForceCurve<f64>> {
        let needs_attraction = || {
            attraction.ok_or_else(|| {
                Error::parse(
                    label,
                    "`mirror` and `scaled_attraction` only apply to a repulsion curve",
                )
            })
        };
        match self {
            CurveSpec::PowerLaw {
                amplitude,
                offset_mm,
                exponent,
            } => Ok(PowerLawCurve::new(*amplitude, *offset_mm, *exponent)?.into()),
            CurveSpec::TwoPoint { points, exponent } => {
                let [p0, p1] = points;
                Ok(
                    PowerLawCurve::through_points((p0[0], p0[1]), (p1[0], p1[1]), *exponent)?
                        .into(),
                )
            }
            CurveSpec::Samples { file, points } => {
                let pts = match (file, points) {
                    (Some(f), None) => {
                        let path = match base {
                            Some(b) if f.is_relative() => b.join(f),
                            _ => f.clone(),
                        };
                        read_samples(&path)?
                    }
                    (None, Some(p)) => p.iter().map(|q| (q[0], q[1])).collect(),
                    _ => {
                        return Err(Error::parse(
                            label,
                            "samples need exactly one of `file` or `points`",
                        ));
                    }
                };
                Ok(SampledCurve::new(&pts)?.into())
            }
            CurveSpec::Mirror => Ok(needs_attraction()?.clone()),
            CurveSpec::ScaledAttraction { peak_imbalance } => {
                let a = needs_attraction()?;
                let contact = a.eval_force(0.0)?;
                if !(contact > 0.0) {
                    return Err(Error::parse(label, "attraction at contact must be > 0"));
                }
                a.scaled(1.0 + peak_imbalance / contact)
            }
        }
    }
}

pub fn parse_curve_file(text: &str, label: &Path) -> Result<ForceCurve<f64>> {
    let spec: CurveSpec = toml::from_str(text).map_err(|e| Error::parse(label, e.message()))?;
    spec.resolve(label, label.parent(), None)
}

pub fn read_curve_file(path: &Path) -> Result<ForceCurve<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_curve_file(&text, path)
}

pub fn curve_file_string(curve: &ForceCurve<f64>) -> Result<String> {
    toml::to_string(&CurveSpec::from_curve(curve))
        .map_err(|e| Error::Config(format!("cannot serialize curve: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnetic_spring::MagneticSpringPair;
    use crate::spring_synthesis::build_design;

    fn label() -> &'static Path {
        Path::new("test.csv")
    }

    #[test]
    fn samples_round_trip() {
        let pts = vec![(0.0, 8.4), (0.1, 1.0 / 3.0), (7.5, 0.5)];
        let mut buf = Vec::new();
        write_samples(&mut buf, &pts).unwrap();
        assert_eq!(parse_samples(buf.as_slice(), label()).unwrap(), pts);
    }

    #[test]
    fn samples_header_and_values_are_checked() {
        assert!(matches!(
            parse_samples("x,f\n0,1\n".as_bytes(), label()),
            Err(Error::Parse { .. })
        ));
        let err = parse_samples("x_mm,force_N\n0,abc\n".as_bytes(), label()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(parse_samples("x_mm,force_N\n0,inf\n".as_bytes(), label()).is_err());
        assert!(parse_samples("x_mm,force_N\n".as_bytes(), label()).is_err());
        assert!(parse_samples("x_mm,force_N\n1,2,3\n".as_bytes(), label()).is_err());
    }

    #[test]
    fn catalog_parsing() {
        let cat = parse_catalog("k_N_per_mm\n2.0\n0.4\n".as_bytes(), label()).unwrap();
        assert_eq!(cat.stiffnesses(), &[2.0, 0.4]);
        assert!(matches!(
            parse_catalog("k_N_per_mm\n".as_bytes(), label()),
            Err(Error::Catalog(_))
        ));
    }

    #[test]
    fn design_csv_layout() {
        let c: ForceCurve = PowerLawCurve::through_points((0.0, 8.4), (7.5, 0.5), 2.0)
            .unwrap()
            .into();
        let d = build_design(&c, &[1.0, 4.0], 7.5).unwrap();
        let mut buf = Vec::new();
        write_design(&mut buf, &d).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "spring_index,k_N_per_mm,engagement_end_mm,cam_depth_mm"
        );
        assert!(lines[1].starts_with("1,"));
        assert!(lines[2].starts_with("2,"));
        assert_eq!(lines[3], format!("delta_e_Nmm,{}", d.delta_e));
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn balance_and_pull_headers() {
        let a: ForceCurve = PowerLawCurve::new(10.0, 1.0, 2.0).unwrap().into();
        let p = MagneticSpringPair::ideal(a, 5.0, 0.0, 0.0).unwrap();
        let mut buf = Vec::new();
        write_balance(&mut buf, &p.deviation_profile(3).unwrap()).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x_mm,internal_force_N\n0,0\n2.5,0\n5,0\n"
        );
    }

    #[test]
    fn curve_file_round_trip() {
        let c: ForceCurve = PowerLawCurve::new(49.2, 2.42, 2.0).unwrap().into();
        let text = curve_file_string(&c).unwrap();
        assert!(text.contains("kind = \"power_law\""));
        assert_eq!(parse_curve_file(&text, label()).unwrap(), c);
        let s: ForceCurve = SampledCurve::new(&[(0.0, 3.0), (1.0, 2.0), (2.0, 1.5)])
            .unwrap()
            .into();
        let text = curve_file_string(&s).unwrap();
        assert_eq!(parse_curve_file(&text, label()).unwrap(), s);
    }

    #[test]
    fn repulsion_kinds_need_an_attraction() {
        assert!(parse_curve_file("kind = \"mirror\"", label()).is_err());
        assert!(parse_curve_file("kind = \"power_law\"\namplitude = 1.0", label()).is_err());
        assert!(parse_curve_file(
            "kind = \"samples\"\npoints = [[0.0, 1.0], [1.0, 0.5], [2.0, 0.2]]\nfile = \"x.csv\"",
            label()
        )
        .is_err());
    }
}
