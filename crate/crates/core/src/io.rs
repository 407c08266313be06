//! On-disk formats: CSV readers and writers for measurements, rosters,
//! schedules, exemptions, active windows and absences.
//!
//! All files are UTF-8 CSV with a header row. Parse errors are hard errors
//! that name the offending line; validation errors come from the model
//! constructors. Distances are written with `f64`'s shortest round-trip
//! representation so serialize → parse is the identity.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{
    ActivityBlock, DeviceId, DevicePair, Location, Participant, RawMeasurement, Role, Roster,
    Schedule,
};
use crate::preprocess::{Absences, ActiveWindows};

pub const MEASUREMENT_HEADER: &[&str] = &["device_a", "device_b", "timestamp", "distance_m"];
pub const ROSTER_HEADER: &[&str] = &["device_id", "role", "group_id", "camp_id"];
pub const EXEMPTION_HEADER: &[&str] = &["device_a", "device_b"];
pub const SCHEDULE_HEADER: &[&str] = &[
    "camp_id", "group_id", "activity", "location", "start", "end", "excluded",
];
pub const ACTIVE_WINDOW_HEADER: &[&str] = &["camp_id", "start", "end"];
pub const ABSENCE_HEADER: &[&str] = &["device_id", "start", "end"];
pub const GROUND_TRUTH_HEADER: &[&str] = &["device_a", "device_b", "timestamp", "true_distance_m"];

/// Result of loading a measurement file: the surviving samples plus the count
/// of rows discarded for exceeding the range cutoff.
#[derive(Debug, Clone)]
pub struct MeasurementLoad {
    /// Sorted by (pair, timestamp); pairs canonicalized.
    pub measurements: Vec<RawMeasurement>,
    /// Rows dropped because distance > max_range.
    pub dropped_over_range: usize,
}

struct CsvRows<'p, R: Read> {
    reader: csv::Reader<R>,
    path: &'p Path,
}

impl<'p, R: Read> CsvRows<'p, R> {
    fn open(input: R, path: &'p Path, expected_header: &[&str]) -> Result<Option<Self>> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers = match reader.headers() {
            Ok(h) => h.clone(),
            // A zero-byte file has no header; treat it as an empty data set.
            Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => {
                return Err(Error::parse(path, 1, e.to_string()))
            }
            Err(e) => return Err(Error::parse(path, 1, e.to_string())),
        };
        if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
            return Ok(None);
        }
        let got: Vec<&str> = headers.iter().collect();
        if got != expected_header {
            return Err(Error::parse(
                path,
                1,
                format!(
                    "unexpected header {:?}, expected {:?}",
                    got.join(","),
                    expected_header.join(",")
                ),
            ));
        }
        Ok(Some(CsvRows { reader, path }))
    }

    /// Calls `f` on every record with its 1-based line number.
    fn for_each(mut self, mut f: impl FnMut(u64, &csv::StringRecord) -> Result<()>) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            let line = self.reader.position().line();
            match self.reader.read_record(&mut record) {
                Ok(false) => return Ok(()),
                Ok(true) => f(line, &record)?,
                Err(e) => return Err(Error::parse(self.path, line, e.to_string())),
            }
        }
    }
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    field: &str,
    value: &str,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| {
        Error::parse(path, line, format!("field {field}: cannot parse {value:?}: {e}"))
    })
}

fn expect_len(path: &Path, line: u64, record: &csv::StringRecord, n: usize) -> Result<()> {
    if record.len() != n {
        return Err(Error::parse(
            path,
            line,
            format!("expected {n} fields, found {}", record.len()),
        ));
    }
    Ok(())
}

fn parse_bool(path: &Path, line: u64, field: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(Error::parse(
            path,
            line,
            format!("field {field}: cannot parse {other:?} as boolean"),
        )),
    }
}

/// Reads a measurement file. Rows with distance > `max_range` are dropped and
/// counted; malformed rows are hard errors naming the line; an empty file
/// yields an empty list.
pub fn read_measurements<R: Read>(
    input: R,
    path: &Path,
    max_range: f64,
) -> Result<MeasurementLoad> {
    let mut measurements = Vec::new();
    let mut dropped_over_range = 0usize;
    let Some(rows) = CsvRows::open(input, path, MEASUREMENT_HEADER)? else {
        return Ok(MeasurementLoad {
            measurements,
            dropped_over_range,
        });
    };
    rows.for_each(|line, record| {
        expect_len(path, line, record, 4)?;
        let a = DeviceId::new(&record[0]);
        let b = DeviceId::new(&record[1]);
        let timestamp: i64 = parse_field(path, line, "timestamp", &record[2])?;
        let distance: f64 = parse_field(path, line, "distance_m", &record[3])?;
        if !distance.is_finite() || distance < 0.0 {
            return Err(Error::parse(
                path,
                line,
                format!("field distance_m: must be a non-negative finite number, got {distance}"),
            ));
        }
        if timestamp < 0 {
            return Err(Error::parse(
                path,
                line,
                format!("field timestamp: must be non-negative, got {timestamp}"),
            ));
        }
        let pair = DevicePair::new(a, b)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        if distance > max_range {
            dropped_over_range += 1;
            return Ok(());
        }
        measurements.push(RawMeasurement {
            pair,
            timestamp,
            distance,
        });
        Ok(())
    })?;
    crate::model::sort_measurements(&mut measurements);
    Ok(MeasurementLoad {
        measurements,
        dropped_over_range,
    })
}

pub fn load_measurements(path: impl AsRef<Path>, max_range: f64) -> Result<MeasurementLoad> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_measurements(BufReader::new(file), path, max_range)
}

/// Writes measurements in the canonical format.
pub fn write_measurements<W: Write>(out: W, measurements: &[RawMeasurement]) -> Result<()> {
    let mut w = BufWriter::new(out);
    (|| -> std::io::Result<()> {
        writeln!(w, "{}", MEASUREMENT_HEADER.join(","))?;
        for m in measurements {
            writeln!(
                w,
                "{},{},{},{}",
                m.pair.a(),
                m.pair.b(),
                m.timestamp,
                m.distance
            )?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io("<writer>", e))
}

pub fn save_measurements(path: impl AsRef<Path>, measurements: &[RawMeasurement]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_measurements(file, measurements)
}

pub fn read_roster<R: Read>(input: R, path: &Path) -> Result<Roster> {
    let mut participants = Vec::new();
    let Some(rows) = CsvRows::open(input, path, ROSTER_HEADER)? else {
        return Roster::new(participants);
    };
    rows.for_each(|line, record| {
        expect_len(path, line, record, 4)?;
        let role: Role = parse_field(path, line, "role", &record[1])?;
        participants.push(Participant {
            device_id: DeviceId::new(&record[0]),
            role,
            group_id: record[2].to_owned(),
            camp_id: record[3].to_owned(),
        });
        Ok(())
    })?;
    Roster::new(participants)
}

pub fn load_roster(path: impl AsRef<Path>) -> Result<Roster> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_roster(BufReader::new(file), path)
}

pub fn write_roster<W: Write>(out: W, roster: &Roster) -> Result<()> {
    let mut w = BufWriter::new(out);
    (|| -> std::io::Result<()> {
        writeln!(w, "{}", ROSTER_HEADER.join(","))?;
        for p in roster.participants() {
            writeln!(w, "{},{},{},{}", p.device_id, p.role, p.group_id, p.camp_id)?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io("<writer>", e))
}

pub fn read_schedule<R: Read>(input: R, path: &Path, roster: &Roster) -> Result<Schedule> {
    let mut blocks = Vec::new();
    let Some(rows) = CsvRows::open(input, path, SCHEDULE_HEADER)? else {
        return Schedule::new(blocks, roster);
    };
    rows.for_each(|line, record| {
        expect_len(path, line, record, 7)?;
        let location: Location = parse_field(path, line, "location", &record[3])?;
        let start: i64 = parse_field(path, line, "start", &record[4])?;
        let end: i64 = parse_field(path, line, "end", &record[5])?;
        let excluded = parse_bool(path, line, "excluded", &record[6])?;
        blocks.push(ActivityBlock {
            camp_id: record[0].to_owned(),
            group_id: record[1].to_owned(),
            activity: record[2].to_owned(),
            location,
            start,
            end,
            excluded,
        });
        Ok(())
    })?;
    Schedule::new(blocks, roster)
}

pub fn load_schedule(path: impl AsRef<Path>, roster: &Roster) -> Result<Schedule> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_schedule(BufReader::new(file), path, roster)
}

pub fn write_schedule<W: Write>(out: W, schedule: &Schedule) -> Result<()> {
    let mut w = BufWriter::new(out);
    (|| -> std::io::Result<()> {
        writeln!(w, "{}", SCHEDULE_HEADER.join(","))?;
        for b in schedule.blocks() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                b.camp_id, b.group_id, b.activity, b.location, b.start, b.end, b.excluded
            )?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io("<writer>", e))
}

pub fn read_exemptions<R: Read>(
    input: R,
    path: &Path,
    roster: &Roster,
) -> Result<crate::model::ExemptionSet> {
    let mut pairs = Vec::new();
    let Some(rows) = CsvRows::open(input, path, EXEMPTION_HEADER)? else {
        return crate::model::ExemptionSet::new(pairs, roster);
    };
    rows.for_each(|line, record| {
        expect_len(path, line, record, 2)?;
        let pair = DevicePair::new(DeviceId::new(&record[0]), DeviceId::new(&record[1]))
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        pairs.push(pair);
        Ok(())
    })?;
    crate::model::ExemptionSet::new(pairs, roster)
}

pub fn load_exemptions(path: impl AsRef<Path>, roster: &Roster) -> Result<crate::model::ExemptionSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_exemptions(BufReader::new(file), path, roster)
}

pub fn read_active_windows<R: Read>(input: R, path: &Path) -> Result<ActiveWindows> {
    let mut windows = Vec::new();
    let Some(rows) = CsvRows::open(input, path, ACTIVE_WINDOW_HEADER)? else {
        return ActiveWindows::new(windows);
    };
    rows.for_each(|line, record| {
        expect_len(path, line, record, 3)?;
        let start: i64 = parse_field(path, line, "start", &record[1])?;
        let end: i64 = parse_field(path, line, "end", &record[2])?;
        windows.push((record[0].to_owned(), start, end));
        Ok(())
    })?;
    ActiveWindows::new(windows)
}

pub fn load_active_windows(path: impl AsRef<Path>) -> Result<ActiveWindows> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_active_windows(BufReader::new(file), path)
}

pub fn read_absences<R: Read>(input: R, path: &Path, roster: &Roster) -> Result<Absences> {
    let mut records = Vec::new();
    let Some(rows) = CsvRows::open(input, path, ABSENCE_HEADER)? else {
        return Absences::new(records, roster);
    };
    rows.for_each(|line, record| {
        expect_len(path, line, record, 3)?;
        let start: i64 = parse_field(path, line, "start", &record[1])?;
        let end: i64 = parse_field(path, line, "end", &record[2])?;
        records.push((DeviceId::new(&record[0]), start, end));
        Ok(())
    })?;
    Absences::new(records, roster)
}

pub fn load_absences(path: impl AsRef<Path>, roster: &Roster) -> Result<Absences> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_absences(BufReader::new(file), path, roster)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_MAX_RANGE_M;
    use proptest::prelude::*;

    fn path() -> &'static Path {
        Path::new("test.csv")
    }

    #[test]
    fn measurements_canonicalized_and_sorted() {
        let data = "device_a,device_b,timestamp,distance_m\n\
                    2,6,1000,0.9\n\
                    6,2,1030,1.1\n";
        let load = read_measurements(data.as_bytes(), path(), DEFAULT_MAX_RANGE_M).unwrap();
        assert_eq!(load.measurements.len(), 2);
        assert_eq!(load.dropped_over_range, 0);
        for m in &load.measurements {
            assert_eq!(m.pair.a().as_str(), "2");
            assert_eq!(m.pair.b().as_str(), "6");
        }
        assert_eq!(load.measurements[0].timestamp, 1000);
        assert_eq!(load.measurements[1].timestamp, 1030);
    }

    #[test]
    fn over_range_rows_dropped_and_counted() {
        let data = "device_a,device_b,timestamp,distance_m\n\
                    a,b,1000,12.0\n\
                    a,b,1030,9.9\n";
        let load = read_measurements(data.as_bytes(), path(), DEFAULT_MAX_RANGE_M).unwrap();
        assert_eq!(load.measurements.len(), 1);
        assert_eq!(load.dropped_over_range, 1);
        // Exactly at the cutoff is kept.
        let data = "device_a,device_b,timestamp,distance_m\na,b,0,10.0\n";
        let load = read_measurements(data.as_bytes(), path(), DEFAULT_MAX_RANGE_M).unwrap();
        assert_eq!(load.measurements.len(), 1);
    }

    #[test]
    fn malformed_row_names_line() {
        let data = "device_a,device_b,timestamp,distance_m\n\
                    a,b,1000,1.0\n\
                    a,b,notatime,1.0\n";
        let err = read_measurements(data.as_bytes(), path(), DEFAULT_MAX_RANGE_M).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn nan_and_negative_distances_are_errors_not_clamped() {
        for bad in ["NaN", "-1.0", "inf"] {
            let data = format!("device_a,device_b,timestamp,distance_m\na,b,0,{bad}\n");
            assert!(
                read_measurements(data.as_bytes(), path(), DEFAULT_MAX_RANGE_M).is_err(),
                "distance {bad} should be rejected"
            );
        }
    }

    #[test]
    fn empty_file_is_empty_list() {
        let load = read_measurements(&b""[..], path(), DEFAULT_MAX_RANGE_M).unwrap();
        assert!(load.measurements.is_empty());
        // Header-only file too.
        let load = read_measurements(
            &b"device_a,device_b,timestamp,distance_m\n"[..],
            path(),
            DEFAULT_MAX_RANGE_M,
        )
        .unwrap();
        assert!(load.measurements.is_empty());
    }

    #[test]
    fn wrong_header_rejected() {
        let data = "device_a,device_b,time,distance\na,b,0,1.0\n";
        let err = read_measurements(data.as_bytes(), path(), DEFAULT_MAX_RANGE_M).unwrap_err();
        assert!(err.to_string().contains("unexpected header"));
    }

    #[test]
    fn roster_and_schedule_round_trip() {
        let roster_csv = "device_id,role,group_id,camp_id\n\
                          c01,child,G1,camp-a\n\
                          e01,educator,G1,camp-a\n";
        let roster = read_roster(roster_csv.as_bytes(), path()).unwrap();
        assert_eq!(roster.len(), 2);

        let mut out = Vec::new();
        write_roster(&mut out, &roster).unwrap();
        let again = read_roster(&out[..], path()).unwrap();
        assert_eq!(roster.participants(), again.participants());

        let schedule_csv = "camp_id,group_id,activity,location,start,end,excluded\n\
                            camp-a,G1,soccer,outdoor,100,200,false\n\
                            camp-a,G1,swimming pool,outdoor,200,300,true\n";
        let schedule = read_schedule(schedule_csv.as_bytes(), path(), &roster).unwrap();
        assert_eq!(schedule.blocks().len(), 2);
        assert!(schedule.blocks()[1].excluded);

        let mut out = Vec::new();
        write_schedule(&mut out, &schedule).unwrap();
        let again = read_schedule(&out[..], path(), &roster).unwrap();
        assert_eq!(schedule.blocks(), again.blocks());
    }

    #[test]
    fn exemption_with_unknown_device_rejected() {
        let roster_csv = "device_id,role,group_id,camp_id\nc01,child,G1,camp-a\nc02,child,G1,camp-a\n";
        let roster = read_roster(roster_csv.as_bytes(), path()).unwrap();
        let bad = "device_a,device_b\nc01,zz\n";
        assert!(read_exemptions(bad.as_bytes(), path(), &roster).is_err());
        let ok = "device_a,device_b\nc02,c01\n";
        let set = read_exemptions(ok.as_bytes(), path(), &roster).unwrap();
        assert_eq!(set.len(), 1);
    }

    proptest! {
        // Serialize → parse is the identity on valid measurement lists.
        #[test]
        fn measurement_round_trip(
            rows in proptest::collection::vec(
                (0u16..50, 0u16..50, 0i64..10_000_000, 0.0f64..10.0),
                0..200,
            )
        ) {
            let mut measurements = Vec::new();
            for (a, b, ts, d) in rows {
                if a == b {
                    continue;
                }
                let pair = DevicePair::new(
                    DeviceId::new(format!("d{a:03}")),
                    DeviceId::new(format!("d{b:03}")),
                ).unwrap();
                measurements.push(RawMeasurement { pair, timestamp: ts, distance: d });
            }
            crate::model::sort_measurements(&mut measurements);

            let mut buf = Vec::new();
            write_measurements(&mut buf, &measurements).unwrap();
            let load = read_measurements(&buf[..], Path::new("prop.csv"), DEFAULT_MAX_RANGE_M).unwrap();
            prop_assert_eq!(load.measurements, measurements);
            prop_assert_eq!(load.dropped_over_range, 0);
        }
    }
}
