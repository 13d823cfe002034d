//! CSV persistence for pattern sets.
//!
//! Layout: a header row naming the metadata fields, one row with their
//! values, then one row of ±1 entries per pattern (N columns, flat synapse
//! order).

use std::path::Path;

use super::{BitVec, ModelError, NetworkKind, PatternSet, Topology};

pub fn save_patterns(patterns: &PatternSet, path: &Path) -> Result<(), ModelError> {
    let mut wtr = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(csv_err)?;
    let t = patterns.topology;
    wtr.write_record(["n", "k", "kind", "alpha", "seed"])
        .map_err(csv_err)?;
    wtr.write_record([
        t.n().to_string(),
        t.units().to_string(),
        t.kind().as_str().to_string(),
        patterns.alpha.to_string(),
        patterns.seed.to_string(),
    ])
    .map_err(csv_err)?;
    for p in &patterns.patterns {
        let row: Vec<String> = p.to_signs().iter().map(|s| s.to_string()).collect();
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn load_patterns(path: &Path) -> Result<PatternSet, ModelError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| ModelError::BadPatternFile("empty file".into()))?
        .map_err(csv_err)?;
    let expected = ["n", "k", "kind", "alpha", "seed"];
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(ModelError::BadPatternFile(format!(
            "unexpected header: {:?}",
            header
        )));
    }
    let meta = records
        .next()
        .ok_or_else(|| ModelError::BadPatternFile("missing metadata row".into()))?
        .map_err(csv_err)?;
    if meta.len() != 5 {
        return Err(ModelError::BadPatternFile("metadata row needs 5 fields".into()));
    }
    let n: usize = parse_field(&meta[0], "n")?;
    let k: usize = parse_field(&meta[1], "k")?;
    let kind = NetworkKind::parse(&meta[2])
        .ok_or_else(|| ModelError::BadPatternFile(format!("unknown kind {:?}", &meta[2])))?;
    let alpha: f64 = parse_field(&meta[3], "alpha")?;
    let seed: u64 = parse_field(&meta[4], "seed")?;
    let topology = Topology::new_relaxed(n, k, kind)?;
    let mut patterns = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != n {
            return Err(ModelError::BadPatternFile(format!(
                "pattern row has {} entries, expected {}",
                rec.len(),
                n
            )));
        }
        let mut signs = Vec::with_capacity(n);
        for field in rec.iter() {
            let v: i8 = parse_field(field, "entry")?;
            if v != 1 && v != -1 {
                return Err(ModelError::BadPatternFile(format!("entry {} not ±1", v)));
            }
            signs.push(v);
        }
        patterns.push(BitVec::from_signs(topology, &signs)?);
    }
    Ok(PatternSet {
        topology,
        alpha,
        seed,
        patterns,
    })
}

fn parse_field<T: std::str::FromStr>(s: &str, name: &str) -> Result<T, ModelError> {
    s.trim()
        .parse()
        .map_err(|_| ModelError::BadPatternFile(format!("bad {} field: {:?}", name, s)))
}

fn csv_err(e: csv::Error) -> ModelError {
    ModelError::BadPatternFile(e.to_string())
}
