//! Tabular data: training sets, observed choices and traveler profiles.
//!
//! Training CSV: one column per profile feature plus `label`. Empty cells
//! are missing values. Labels are mode symbols or names (`d`, `drive`) or,
//! for category targets, category names (`motorized`).
//!
//! Choice CSV, one row per offered alternative:
//!
//! ```text
//! record_id,alternative,chosen,x_<attribute>...,f_<feature>...
//! ```
//!
//! `chosen` is 1 on exactly one row of each record. Person features must
//! agree across a record's rows.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use copter_core::choice::{ChoiceRecord, ChoiceSchema};
use copter_core::likelihood::{Dataset, Target, TravelerProfile, FEATURE_NAMES};
use copter_core::mode::{ModeCategory, ModeLabel};
use csv::{ReaderBuilder, Trim};

use crate::FileError;

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct DataError {
    pub line: usize,
    pub reason: String,
}

fn err(line: usize, reason: impl Into<String>) -> DataError {
    DataError { line, reason: reason.into() }
}

fn csv_err(e: csv::Error) -> DataError {
    err(e.position().map_or(0, |p| p.line() as usize), e.to_string())
}

pub(crate) fn at(path: &Path) -> impl Fn(DataError) -> FileError + '_ {
    move |e| FileError::Parse { path: path.to_path_buf(), line: e.line, reason: e.reason }
}

fn label_index(target: Target, text: &str) -> Option<usize> {
    match target {
        Target::Mode => text.parse::<ModeLabel>().ok().map(ModeLabel::index),
        Target::Category => ModeCategory::from_name(text)
            .or_else(|| text.parse::<ModeLabel>().ok().map(ModeLabel::category))
            .map(ModeCategory::index),
    }
}

pub fn read_training<R: Read>(src: R, target: Target) -> Result<Dataset, DataError> {
    let mut rdr = ReaderBuilder::new().trim(Trim::All).comment(Some(b'#')).from_reader(src);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    if let Some(h) = headers.iter().find(|h| *h != "label" && !FEATURE_NAMES.contains(h)) {
        return Err(err(1, format!("unknown column `{h}`")));
    }
    let columns = FEATURE_NAMES
        .iter()
        .map(|f| find(f).ok_or_else(|| err(1, format!("missing column `{f}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let label_col = find("label").ok_or_else(|| err(1, "missing column `label`"))?;
    let mut data = Dataset {
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        label_names: target.label_names(),
        rows: Vec::new(),
        labels: Vec::new(),
    };
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = columns
            .iter()
            .zip(FEATURE_NAMES)
            .map(|(&c, name)| match &rec[c] {
                "" => Ok(f64::NAN),
                "true" => Ok(1.0),
                "false" => Ok(0.0),
                s => s.parse::<f64>().map_err(|_| err(line, format!("`{name}` is not a number: `{s}`"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let label = label_index(target, &rec[label_col])
            .ok_or_else(|| err(line, format!("unknown label `{}`", &rec[label_col])))?;
        data.rows.push(row);
        data.labels.push(label);
    }
    Ok(data)
}

pub fn load_training(path: &Path, target: Target) -> Result<Dataset, FileError> {
    read_training(crate::open(path)?, target).map_err(at(path))
}

/// Writes profiles with their observed modes as a training CSV.
pub fn write_training<W: Write>(profiles: &[TravelerProfile], modes: &[ModeLabel], dst: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(dst);
    w.write_record(FEATURE_NAMES.iter().copied().chain(["label"]))?;
    for (p, m) in profiles.iter().zip(modes) {
        let mut row: Vec<String> = p.features().iter().map(|v| v.to_string()).collect();
        row.push(m.symbol().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_choices<R: Read>(src: R) -> Result<(Vec<ChoiceRecord>, ChoiceSchema), DataError> {
    let mut rdr = ReaderBuilder::new().trim(Trim::All).comment(Some(b'#')).from_reader(src);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let mut attr_cols = Vec::new();
    let mut feat_cols = Vec::new();
    let mut schema = ChoiceSchema { attributes: Vec::new(), features: Vec::new() };
    let (mut rid, mut alt, mut chosen) = (None, None, None);
    for (i, h) in headers.iter().enumerate() {
        match h {
            "record_id" => rid = Some(i),
            "alternative" => alt = Some(i),
            "chosen" => chosen = Some(i),
            _ if h.starts_with("x_") => {
                attr_cols.push(i);
                schema.attributes.push(h[2..].to_string());
            }
            _ if h.starts_with("f_") => {
                feat_cols.push(i);
                schema.features.push(h[2..].to_string());
            }
            _ => return Err(err(1, format!("unknown column `{h}`"))),
        }
    }
    let missing = |c: &str| err(1, format!("missing column `{c}`"));
    let rid = rid.ok_or_else(|| missing("record_id"))?;
    let alt = alt.ok_or_else(|| missing("alternative"))?;
    let chosen = chosen.ok_or_else(|| missing("chosen"))?;

    struct Partial {
        first_line: usize,
        chosen: Vec<ModeLabel>,
        alternatives: Vec<(ModeLabel, Vec<f64>)>,
        features: Vec<f64>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut records: HashMap<String, Partial> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let num = |c: usize| {
            rec[c].parse::<f64>().map_err(|_| err(line, format!("`{}` is not a number: `{}`", &headers[c], &rec[c])))
        };
        let mode: ModeLabel = rec[alt].parse().map_err(|e| err(line, format!("{e}")))?;
        let is_chosen = match &rec[chosen] {
            "1" | "true" => true,
            "0" | "false" => false,
            s => return Err(err(line, format!("`chosen` must be 0 or 1, got `{s}`"))),
        };
        let x = attr_cols.iter().map(|&c| num(c)).collect::<Result<Vec<_>, _>>()?;
        let f = feat_cols.iter().map(|&c| num(c)).collect::<Result<Vec<_>, _>>()?;
        let id = rec[rid].to_string();
        let p = records.entry(id.clone()).or_insert_with(|| {
            order.push(id);
            Partial { first_line: line, chosen: Vec::new(), alternatives: Vec::new(), features: f.clone() }
        });
        if p.features != f {
            return Err(err(line, "person features differ within a record"));
        }
        if p.alternatives.iter().any(|(m, _)| *m == mode) {
            return Err(err(line, format!("alternative `{mode}` repeated within a record")));
        }
        if is_chosen {
            p.chosen.push(mode);
        }
        p.alternatives.push((mode, x));
    }
    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let p = records.remove(&id).expect("recorded id");
        let [c] = p.chosen[..] else {
            return Err(err(p.first_line, format!("record `{id}` must have exactly one chosen alternative")));
        };
        out.push(ChoiceRecord { chosen: c, alternatives: p.alternatives, features: p.features });
    }
    Ok((out, schema))
}

pub fn load_choices(path: &Path) -> Result<(Vec<ChoiceRecord>, ChoiceSchema), FileError> {
    read_choices(crate::open(path)?).map_err(at(path))
}

/// Writes choice records in the long format read by [`read_choices`].
pub fn write_choices<W: Write>(records: &[ChoiceRecord], schema: &ChoiceSchema, dst: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(dst);
    let header: Vec<String> = ["record_id", "alternative", "chosen"]
        .iter()
        .map(|s| s.to_string())
        .chain(schema.attributes.iter().map(|a| format!("x_{a}")))
        .chain(schema.features.iter().map(|f| format!("f_{f}")))
        .collect();
    w.write_record(&header)?;
    for (i, r) in records.iter().enumerate() {
        for (m, x) in &r.alternatives {
            let mut row = vec![i.to_string(), m.symbol().to_string(), u8::from(*m == r.chosen).to_string()];
            row.extend(x.iter().map(|v| v.to_string()));
            row.extend(r.features.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_profile(path: &Path) -> Result<TravelerProfile, FileError> {
    let p: TravelerProfile = crate::read_json(path)?;
    p.validate().map_err(|e| FileError::invalid(path, e))?;
    Ok(p)
}

/// Profiles CSV: one column per [`TravelerProfile`] field.
pub fn read_profiles<R: Read>(src: R) -> Result<Vec<TravelerProfile>, DataError> {
    let mut rdr = ReaderBuilder::new().trim(Trim::All).comment(Some(b'#')).from_reader(src);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let p: TravelerProfile = rec.deserialize(Some(&headers)).map_err(|e| err(line, e.to_string()))?;
        p.validate().map_err(|e| err(line, e.to_string()))?;
        out.push(p);
    }
    Ok(out)
}

pub fn load_profiles(path: &Path) -> Result<Vec<TravelerProfile>, FileError> {
    read_profiles(crate::open(path)?).map_err(at(path))
}

pub fn write_profiles<W: Write>(profiles: &[TravelerProfile], dst: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(dst);
    for p in profiles {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use copter_core::likelihood::synthetic::{labelled_profiles, ProfileMarginals};
    use rand::SeedableRng;

    fn profiles(n: usize) -> (Vec<TravelerProfile>, Vec<ModeLabel>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        labelled_profiles(n, 0.1, &ProfileMarginals::default(), &mut rng)
    }

    #[test]
    fn training_round_trip() {
        let (ps, ms) = profiles(50);
        let mut buf = Vec::new();
        write_training(&ps, &ms, &mut buf).unwrap();
        let d = read_training(buf.as_slice(), Target::Mode).unwrap();
        assert_eq!(d, Dataset::from_profiles(&ps, &ms, Target::Mode));
        let d = read_training(buf.as_slice(), Target::Category).unwrap();
        assert_eq!(d, Dataset::from_profiles(&ps, &ms, Target::Category));
    }

    #[test]
    fn empty_cells_are_missing_and_categories_parse() {
        let header = FEATURE_NAMES.join(",") + ",label\n";
        let mut row: Vec<&str> = vec!["1"; FEATURE_NAMES.len()];
        row[3] = "";
        let text = format!("{header}{},motorized\n", row.join(","));
        let d = read_training(text.as_bytes(), Target::Category).unwrap();
        assert!(d.rows[0][3].is_nan());
        assert_eq!(d.labels, vec![ModeCategory::Motorized.index()]);
        let err = read_training(text.as_bytes(), Target::Mode).unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn profiles_round_trip() {
        let (ps, _) = profiles(20);
        let mut buf = Vec::new();
        write_profiles(&ps, &mut buf).unwrap();
        assert_eq!(read_profiles(buf.as_slice()).unwrap(), ps);
    }

    #[test]
    fn choices_round_trip_and_reject_bad_records() {
        let schema = ChoiceSchema { attributes: vec!["time".into()], features: vec!["autos".into()] };
        let records = vec![
            ChoiceRecord {
                chosen: ModeLabel::Bus,
                alternatives: vec![(ModeLabel::Drive, vec![600.0]), (ModeLabel::Bus, vec![900.5])],
                features: vec![2.0],
            },
            ChoiceRecord {
                chosen: ModeLabel::Drive,
                alternatives: vec![(ModeLabel::Drive, vec![300.0]), (ModeLabel::Walk, vec![1200.0])],
                features: vec![0.0],
            },
        ];
        let mut buf = Vec::new();
        write_choices(&records, &schema, &mut buf).unwrap();
        assert_eq!(read_choices(buf.as_slice()).unwrap(), (records, schema));

        let two_chosen = "record_id,alternative,chosen,x_time\n1,d,1,3\n1,b,1,4\n";
        assert_eq!(read_choices(two_chosen.as_bytes()).unwrap_err().line, 2);
        let bad_feature = "record_id,alternative,chosen,f_a\n1,d,1,3\n1,b,0,4\n";
        assert_eq!(read_choices(bad_feature.as_bytes()).unwrap_err().line, 3);
    }
}
