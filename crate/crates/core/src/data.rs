//! Stress-stretch datasets: CSV ingestion, unit conversion and the embedded
//! rubber benchmark tables.
//!
//! CSV files carry one sample per row under the header
//! `mode,lambda,stress_mpa`; lines starting with `#` are ignored.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CannError, Result};
use crate::kinematics::DeformationMode;

pub const CSV_HEADER: [&str; 3] = ["mode", "lambda", "stress_mpa"];

/// One labeled measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub mode: DeformationMode,
    pub lambda: f64,
    /// Nominal stress, MPa.
    pub stress: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub source: String,
}

impl Dataset {
    /// Builds a dataset, rejecting empty sample lists and non-positive or
    /// non-finite values.
    pub fn new(samples: Vec<Sample>, source: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(CannError::Domain("dataset has no samples".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.lambda.is_finite() && s.lambda > 0.0) || !s.stress.is_finite() {
                return Err(CannError::Domain(format!(
                    "sample {i}: stretch must be finite and positive and stress finite, got ({}, {})",
                    s.lambda, s.stress
                )));
            }
        }
        Ok(Self { samples, source: source.into() })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Modes present, in `UT, ET, PS` order.
    pub fn modes(&self) -> Vec<DeformationMode> {
        let set: BTreeSet<_> = self.samples.iter().map(|s| s.mode).collect();
        set.into_iter().collect()
    }

    pub fn samples_for(&self, mode: DeformationMode) -> impl Iterator<Item = &Sample> + '_ {
        self.samples.iter().filter(move |s| s.mode == mode)
    }

    pub fn max_lambda(&self) -> f64 {
        self.samples.iter().map(|s| s.lambda).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn read_csv<R: Read>(reader: R, source: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);

        let header = rdr.headers()?.clone();
        let header_line = header.position().map_or(1, |p| p.line());
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(CannError::Parse {
                line: header_line,
                message: format!("expected header `{}`", CSV_HEADER.join(",")),
            });
        }

        let mut samples = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let parse_err = |message: String| CannError::Parse { line, message };
            if record.len() != 3 {
                return Err(parse_err(format!("expected 3 fields, found {}", record.len())));
            }
            let mode: DeformationMode = record[0].parse().map_err(|e: CannError| parse_err(e.to_string()))?;
            let number = |field: &str, name: &str| -> Result<f64> {
                let v: f64 = field
                    .parse()
                    .map_err(|_| parse_err(format!("{name} `{field}` is not a number")))?;
                if !v.is_finite() {
                    return Err(parse_err(format!("{name} `{field}` is not finite")));
                }
                Ok(v)
            };
            let lambda = number(&record[1], "lambda")?;
            let stress = number(&record[2], "stress")?;
            if lambda <= 0.0 {
                return Err(parse_err(format!("lambda must be positive, got {lambda}")));
            }
            samples.push(Sample { mode, lambda, stress });
        }
        if samples.is_empty() {
            return Err(CannError::Domain("dataset has no samples".into()));
        }
        Dataset::new(samples, source)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for s in &self.samples {
            w.write_record([s.mode.tag().to_string(), s.lambda.to_string(), s.stress.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    Dataset::read_csv(file, path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StressUnit {
    KgfPerCm2,
    Psi,
    /// Kilogram-force per 2.5 mm x 3.2 mm (= 8 mm²) cross section.
    KgfPer8Mm2,
    MPa,
}

const STANDARD_GRAVITY: f64 = 9.80665;

pub fn convert_unit(value: f64, from: StressUnit) -> f64 {
    let factor = match from {
        StressUnit::KgfPerCm2 => STANDARD_GRAVITY / 100.0,
        StressUnit::Psi => 0.006_894_76,
        StressUnit::KgfPer8Mm2 => STANDARD_GRAVITY / 8.0,
        StressUnit::MPa => 1.0,
    };
    value * factor
}

pub const BUILTIN_NAMES: [&str; 8] = [
    "treloar20_ut",
    "treloar50_ut",
    "mooney_gum_ut",
    "mooney_tread_ut",
    "blatzko_foam_ut",
    "blatzko_rubber_ut",
    "treloar20_multi",
    "treloar50_multi",
];

fn table(mode: DeformationMode, rows: &[(f64, f64)]) -> impl Iterator<Item = Sample> + '_ {
    rows.iter().map(move |&(lambda, stress)| Sample { mode, lambda, stress })
}

/// Embedded benchmark tables, stresses in MPa.
pub fn builtin_dataset(name: &str) -> Result<Dataset> {
    use DeformationMode::*;
    let (samples, source): (Vec<Sample>, &str) = match name {
        "treloar20_ut" => (table(UniaxialTension, TRELOAR20_UT).collect(), "Treloar 1944, rubber at 20 C, uniaxial tension"),
        "treloar50_ut" => (table(UniaxialTension, TRELOAR50_UT).collect(), "Treloar 1944, rubber at 50 C, uniaxial tension"),
        "mooney_gum_ut" => (table(UniaxialTension, MOONEY_GUM_UT).collect(), "Mooney 1940, gum stock, uniaxial tension"),
        "mooney_tread_ut" => (table(UniaxialTension, MOONEY_TREAD_UT).collect(), "Mooney 1940, tread stock, uniaxial tension"),
        "blatzko_foam_ut" => (table(UniaxialTension, BLATZKO_FOAM_UT).collect(), "Blatz and Ko 1962, polymeric foam, uniaxial tension"),
        "blatzko_rubber_ut" => (table(UniaxialTension, BLATZKO_RUBBER_UT).collect(), "Blatz and Ko 1962, rubber, uniaxial tension"),
        "treloar20_multi" => (
            table(UniaxialTension, TRELOAR20_UT)
                .chain(table(EquibiaxialTension, TRELOAR20_ET))
                .chain(table(PureShear, TRELOAR20_PS))
                .collect(),
            "Treloar 1944, rubber at 20 C, uniaxial/equibiaxial tension and pure shear",
        ),
        "treloar50_multi" => (
            table(UniaxialTension, TRELOAR50_UT)
                .chain(table(EquibiaxialTension, TRELOAR50_ET))
                .chain(table(PureShear, TRELOAR50_PS))
                .collect(),
            "Treloar 1944, rubber at 50 C, uniaxial/equibiaxial tension and pure shear",
        ),
        other => {
            return Err(CannError::UnknownDataset {
                name: other.to_string(),
                valid: BUILTIN_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Dataset::new(samples, source)
}

// Stress columns are already in MPa; equibiaxial values include the
// stretch factor applied when the tables were compiled.

const TRELOAR20_UT: &[(f64, f64)] = &[
    (1.00, 0.00), (1.01, 0.00), (1.13, 0.14), (1.23, 0.24), (1.41, 0.33),
    (1.61, 0.43), (1.89, 0.52), (2.17, 0.59), (2.45, 0.68), (3.06, 0.87),
    (3.62, 1.06), (4.06, 1.24), (4.82, 1.60), (5.41, 1.95), (5.79, 2.30),
    (6.23, 2.68), (6.46, 3.03), (6.67, 3.40), (6.96, 3.78), (7.14, 4.16),
    (7.25, 4.49), (7.36, 4.86), (7.49, 5.24), (7.60, 5.60), (7.69, 6.33),
];

const TRELOAR50_UT: &[(f64, f64)] = &[
    (1.00, 0.00), (1.11, 0.17), (1.23, 0.29), (1.57, 0.54), (2.12, 0.80),
    (2.73, 1.03), (3.36, 1.30), (3.95, 1.57), (4.39, 1.79), (5.29, 2.29),
    (6.11, 2.80), (6.54, 3.75), (6.95, 5.27), (7.43, 7.73), (7.76, 10.21),
];

const MOONEY_GUM_UT: &[(f64, f64)] = &[
    (1.00, 0.00), (1.46, 0.31), (2.30, 0.61), (4.66, 1.23), (6.45, 1.84),
    (6.77, 2.45), (6.96, 3.06),
];

const MOONEY_TREAD_UT: &[(f64, f64)] = &[
    (1.00, 0.00), (1.16, 0.31), (1.50, 0.61), (2.56, 1.23), (3.30, 1.84),
    (3.53, 2.45), (3.63, 3.06), (3.71, 3.68),
];

const BLATZKO_FOAM_UT: &[(f64, f64)] = &[
    (1.00, 0.00), (1.05, 0.04), (1.10, 0.06), (1.15, 0.07), (1.20, 0.09),
    (1.30, 0.12), (1.40, 0.14), (1.50, 0.16), (1.60, 0.16), (1.70, 0.17),
    (1.80, 0.18), (1.90, 0.19), (2.00, 0.20), (2.10, 0.20), (2.20, 0.21),
    (2.30, 0.21), (2.34, 0.21),
];

const BLATZKO_RUBBER_UT: &[(f64, f64)] = &[
    (1.00, 0.00), (1.05, 0.03), (1.10, 0.07), (1.16, 0.10), (1.22, 0.13),
    (1.27, 0.16), (1.31, 0.18), (1.37, 0.20), (1.41, 0.22), (1.47, 0.24),
    (1.52, 0.26), (1.57, 0.27), (1.62, 0.29),
];

const TRELOAR20_ET: &[(f64, f64)] = &[
    (1.00, 0.00), (1.04, 0.09), (1.08, 0.16), (1.12, 0.24), (1.15, 0.26),
    (1.21, 0.33), (1.32, 0.44), (1.43, 0.51), (1.70, 0.66), (1.95, 0.77),
    (2.50, 0.97), (3.04, 1.26), (3.44, 1.47), (3.76, 1.73), (4.03, 1.97),
    (4.26, 2.23), (4.45, 2.45),
];

const TRELOAR20_PS: &[(f64, f64)] = &[
    (1.00, 0.00), (1.05, 0.06), (1.13, 0.16), (1.20, 0.24), (1.33, 0.33),
    (1.45, 0.42), (1.86, 0.59), (2.40, 0.77), (2.99, 0.95), (3.50, 1.13),
    (3.98, 1.29), (4.39, 1.48), (4.72, 1.65), (4.99, 1.82),
];

#[allow(clippy::approx_constant)]
const TRELOAR50_ET: &[(f64, f64)] = &[
    (1.00, 0.00), (1.02, 0.15), (1.08, 0.30), (1.16, 0.48), (1.37, 0.74),
    (1.57, 0.92), (1.96, 1.17), (2.46, 1.49), (2.79, 1.78), (3.14, 2.04),
    (3.45, 2.33), (3.60, 2.53), (3.86, 2.96), (4.11, 3.24), (4.60, 4.24),
    (5.06, 6.15), (5.28, 6.99), (5.42, 8.18), (5.59, 9.87), (5.67, 11.59),
];

const TRELOAR50_PS: &[(f64, f64)] = &[
    (1.00, 0.00), (1.04, 0.17), (1.23, 0.40), (1.48, 0.63), (2.52, 1.03),
    (3.51, 1.49), (4.33, 1.90), (5.07, 2.36), (5.74, 2.74), (6.24, 3.22),
    (6.36, 3.63), (6.65, 4.49), (6.91, 5.34), (7.06, 6.23), (7.26, 7.00),
    (7.42, 7.89), (7.56, 9.18), (7.83, 10.90),
];
#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use DeformationMode::*;

    #[test]
    fn builtin_shapes() {
        let d = builtin_dataset("treloar20_ut").unwrap();
        assert_eq!(d.len(), 25);
        assert_eq!((d.samples[0].lambda, d.samples[0].stress), (1.0, 0.0));
        assert_eq!((d.samples[24].lambda, d.samples[24].stress), (7.69, 6.33));
        assert_eq!(builtin_dataset("mooney_gum_ut").unwrap().len(), 7);

        let m = builtin_dataset("treloar20_multi").unwrap();
        assert_eq!(m.samples_for(UniaxialTension).count(), 25);
        assert_eq!(m.samples_for(EquibiaxialTension).count(), 17);
        assert_eq!(m.samples_for(PureShear).count(), 14);
        assert_eq!(m.modes(), vec![UniaxialTension, EquibiaxialTension, PureShear]);
    }

    #[test]
    fn every_builtin_is_valid() {
        for name in BUILTIN_NAMES {
            let d = builtin_dataset(name).unwrap();
            for mode in d.modes() {
                let first = d.samples_for(mode).next().unwrap();
                assert_eq!((first.lambda, first.stress), (1.0, 0.0), "{name} {mode}");
            }
            assert!(d.samples.iter().all(|s| s.lambda >= 1.0 && s.stress >= 0.0), "{name}");
        }
    }

    #[test]
    fn unknown_builtin_lists_names() {
        let err = builtin_dataset("nope").unwrap_err();
        let msg = err.to_string();
        assert!(BUILTIN_NAMES.iter().all(|n| msg.contains(n)), "{msg}");
    }

    #[test]
    fn parses_rows() {
        let d = Dataset::read_csv("mode,lambda,stress_mpa\n# comment\nUT,1.13,0.14\nET,1.04,0.09\n".as_bytes(), "t").unwrap();
        assert_eq!(d.samples[0], Sample { mode: UniaxialTension, lambda: 1.13, stress: 0.14 });
        assert_eq!(d.samples[1].mode, EquibiaxialTension);
    }

    #[test]
    fn csv_errors() {
        let header_only = Dataset::read_csv("mode,lambda,stress_mpa\n".as_bytes(), "t");
        assert!(matches!(header_only, Err(CannError::Domain(_))));

        let bad_mode = Dataset::read_csv("mode,lambda,stress_mpa\nUT,1,0\nXX,1.0,0.1\n".as_bytes(), "t");
        assert!(matches!(bad_mode, Err(CannError::Parse { line: 3, .. })), "{bad_mode:?}");

        let nan = Dataset::read_csv("mode,lambda,stress_mpa\nUT,NaN,0.1\n".as_bytes(), "t");
        assert!(matches!(nan, Err(CannError::Parse { line: 2, .. })));

        let garbage = Dataset::read_csv("mode,lambda,stress_mpa\nUT,abc,0.1\n".as_bytes(), "t");
        assert!(matches!(garbage, Err(CannError::Parse { line: 2, .. })));

        let short = Dataset::read_csv("mode,lambda,stress_mpa\nUT,1.0\n".as_bytes(), "t");
        assert!(matches!(short, Err(CannError::Parse { line: 2, .. })));

        let header = Dataset::read_csv("a,b,c\nUT,1.0,0.0\n".as_bytes(), "t");
        assert!(matches!(header, Err(CannError::Parse { line: 1, .. })));
    }

    #[test]
    fn unit_conversion() {
        for u in [StressUnit::KgfPerCm2, StressUnit::Psi, StressUnit::KgfPer8Mm2, StressUnit::MPa] {
            assert_eq!(convert_unit(0.0, u), 0.0);
        }
        assert_relative_eq!(convert_unit(1.0, StressUnit::KgfPerCm2), 0.0980665, max_relative = 1e-15);
        assert_relative_eq!(convert_unit(10.0, StressUnit::Psi), 0.0689476, max_relative = 1e-15);
        assert_relative_eq!(convert_unit(1.0, StressUnit::KgfPer8Mm2), 1.225_831_25, max_relative = 1e-15);
    }

    #[test]
    fn builtin_csv_round_trip() {
        for name in BUILTIN_NAMES {
            let d = builtin_dataset(name).unwrap();
            let mut buf = Vec::new();
            d.write_csv(&mut buf).unwrap();
            let back = Dataset::read_csv(buf.as_slice(), d.source.clone()).unwrap();
            assert_eq!(back, d);
        }
    }
}
