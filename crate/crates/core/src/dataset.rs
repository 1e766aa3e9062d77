//! Dataset CSV interchange.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::labeling::DecouplingClass;
use crate::numfmt::format_f64;
use crate::sample::{BandReport, MeasurementSample, Point, NUM_APS};

/// Column names in file order.
pub fn header() -> Vec<String> {
    let mut cols: Vec<String> = ["sample_id", "track_id", "x_m", "y_m"]
        .map(String::from)
        .to_vec();
    for prefix in ["k26", "p26", "k28", "p28"] {
        cols.extend((1..=NUM_APS).map(|a| format!("{prefix}_{a}")));
    }
    cols.push("label".into());
    cols
}

pub fn write_csv<W: Write>(samples: &[MeasurementSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header())?;
    for s in samples {
        let mut rec = vec![
            s.sample_id.to_string(),
            s.track_id.to_string(),
            format_f64(s.position.x),
            format_f64(s.position.y),
        ];
        for values in [
            &s.sub6.k_factor_db,
            &s.sub6.rsrp_dbm,
            &s.mmwave.k_factor_db,
            &s.mmwave.rsrp_dbm,
        ] {
            rec.extend(values.iter().map(|&v| format_f64(v)));
        }
        rec.push(s.label.map(|c| c.to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<MeasurementSample>> {
    let mut r = csv::Reader::from_reader(input);
    let names = r.headers()?.clone();
    let expected = header();
    let mut index = Vec::with_capacity(expected.len());
    for col in &expected {
        let pos = names
            .iter()
            .position(|h| h.trim() == col)
            .ok_or_else(|| Error::data(format!("missing column {col:?}")))?;
        index.push(pos);
    }
    let mut samples = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let field = |k: usize| -> &str { rec.get(index[k]).unwrap_or("").trim() };
        let num = |k: usize| -> Result<f64> {
            let v: f64 = field(k).parse().map_err(|_| {
                Error::data(format!(
                    "line {line}, column {}: bad number {:?}",
                    expected[k],
                    field(k)
                ))
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::data(format!(
                    "line {line}, column {}: value is not finite",
                    expected[k]
                )))
            }
        };
        let int = |k: usize| -> Result<u64> {
            field(k).parse().map_err(|_| {
                Error::data(format!(
                    "line {line}, column {}: bad integer {:?}",
                    expected[k],
                    field(k)
                ))
            })
        };
        let block = |start: usize| -> Result<[f64; NUM_APS]> {
            let mut out = [0.0; NUM_APS];
            for (a, slot) in out.iter_mut().enumerate() {
                *slot = num(start + a)?;
            }
            Ok(out)
        };
        let track_id = u32::try_from(int(1)?)
            .map_err(|_| Error::data(format!("line {line}, column track_id: out of range")))?;
        let label_text = field(4 + 4 * NUM_APS);
        let label = if label_text.is_empty() {
            None
        } else {
            Some(
                label_text
                    .parse::<DecouplingClass>()
                    .map_err(|e| Error::data(format!("line {line}, column label: {e}")))?,
            )
        };
        samples.push(MeasurementSample {
            sample_id: int(0)?,
            track_id,
            position: Point::new(num(2)?, num(3)?),
            sub6: BandReport {
                k_factor_db: block(4)?,
                rsrp_dbm: block(4 + NUM_APS)?,
            },
            mmwave: BandReport {
                k_factor_db: block(4 + 2 * NUM_APS)?,
                rsrp_dbm: block(4 + 3 * NUM_APS)?,
            },
            los: None,
            label,
        });
    }
    Ok(samples)
}

pub fn write_csv_file(samples: &[MeasurementSample], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(samples, std::io::BufWriter::new(file))
}

pub fn read_csv_file(path: &Path) -> Result<Vec<MeasurementSample>> {
    let file = std::fs::File::open(path)?;
    read_csv(std::io::BufReader::new(file)).map_err(|e| match e {
        Error::Data(msg) => Error::data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{synth_dataset, SynthConfig, TrackSpec};
    use crate::labeling::{label_dataset, Thresholds};

    fn small() -> Vec<MeasurementSample> {
        let cfg = SynthConfig {
            tracks: vec![TrackSpec::linear(Point::new(-30.0, 10.0), (1.0, 0.2), 25)],
            n_total: 25,
            ..SynthConfig::default()
        };
        synth_dataset(&cfg, 4).unwrap()
    }

    fn strip_los(mut v: Vec<MeasurementSample>) -> Vec<MeasurementSample> {
        for s in &mut v {
            s.los = None;
        }
        v
    }

    #[test]
    fn header_layout() {
        let h = header();
        assert_eq!(h.len(), 25);
        assert_eq!(h.join(","), "sample_id,track_id,x_m,y_m,k26_1,k26_2,k26_3,k26_4,k26_5,p26_1,p26_2,p26_3,p26_4,p26_5,k28_1,k28_2,k28_3,k28_4,k28_5,p28_1,p28_2,p28_3,p28_4,p28_5,label");
    }

    #[test]
    fn round_trip_unlabeled_and_labeled() {
        let data = small();
        for set in [data.clone(), label_dataset(data, &Thresholds::default())] {
            let mut buf = Vec::new();
            write_csv(&set, &mut buf).unwrap();
            let back = read_csv(buf.as_slice()).unwrap();
            assert_eq!(back, strip_los(set));
        }
    }

    #[test]
    fn missing_column_is_named() {
        let mut buf = Vec::new();
        write_csv(&small(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replacen("k26_3,", "", 1);
        match read_csv(text.as_bytes()) {
            Err(Error::Data(msg)) => assert!(msg.contains("k26_3"), "{msg}"),
            other => panic!("expected data error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_values_are_data_errors() {
        let mut buf = Vec::new();
        write_csv(&small()[..1], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (head, row) = text.split_once('\n').unwrap();
        let mut fields: Vec<&str> = row.trim_end().split(',').collect();
        fields[5] = "abc";
        let bad = format!("{head}\n{}\n", fields.join(","));
        assert!(matches!(read_csv(bad.as_bytes()), Err(Error::Data(_))));
        fields[5] = "1.0";
        fields[24] = "7";
        let bad = format!("{head}\n{}\n", fields.join(","));
        assert!(matches!(read_csv(bad.as_bytes()), Err(Error::Data(_))));
    }
}
