//! Constituencies and their populations, read from `name,population` CSV.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constituency {
    pub name: String,
    pub population: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FederationSpec {
    constituencies: Vec<Constituency>,
    total: u128,
}

impl FederationSpec {
    pub fn new(constituencies: Vec<Constituency>) -> Result<Self> {
        if constituencies.is_empty() {
            return Err(Error::InvalidArgument("no constituencies".into()));
        }
        let mut seen = HashSet::new();
        for c in &constituencies {
            if c.population == 0 {
                return Err(Error::InvalidArgument(format!("constituency {:?} has zero population", c.name)));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate constituency {:?}", c.name)));
            }
        }
        let total = constituencies.iter().map(|c| c.population as u128).sum();
        Ok(FederationSpec { constituencies, total })
    }

    /// Constituencies named `C1`, `C2`, ... with the given sizes.
    pub fn from_sizes(sizes: &[u64]) -> Result<Self> {
        Self::new(
            sizes
                .iter()
                .enumerate()
                .map(|(i, &population)| Constituency { name: format!("C{}", i + 1), population })
                .collect(),
        )
    }

    pub fn constituencies(&self) -> &[Constituency] {
        &self.constituencies
    }

    pub fn len(&self) -> usize {
        self.constituencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constituencies.is_empty()
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.constituencies.iter().map(|c| c.population).collect()
    }

    pub fn total_population(&self) -> u128 {
        self.total
    }

    /// `n_i / n`.
    pub fn relative_sizes(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.constituencies.iter().map(|c| c.population as f64 / n).collect()
    }

    pub fn read_csv<R: Read>(reader: R, origin: &Path) -> Result<Self> {
        let fail = |reason: String| Error::Federation { path: origin.to_path_buf(), reason };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "name" || &headers[1] != "population" {
            if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
                return Err(fail("no constituencies".into()));
            }
            return Err(fail(format!("expected header `name,population`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut constituencies = Vec::new();
        let mut seen = HashSet::new();
        for (i, record) in rdr.records().enumerate() {
            // header is line 1
            let line = i + 2;
            let record = record.map_err(|e| fail(format!("line {line}: {e}")))?;
            let row = record.iter().collect::<Vec<_>>().join(",");
            if record.len() != 2 {
                return Err(fail(format!("line {line}: malformed row `{row}`")));
            }
            let name = record[0].to_string();
            if name.is_empty() {
                return Err(fail(format!("line {line}: empty name in row `{row}`")));
            }
            let population: u64 = match record[1].parse::<i128>() {
                Ok(p) if p > 0 && p <= u64::MAX as i128 => p as u64,
                Ok(_) => return Err(fail(format!("line {line}: population must be positive in row `{row}`"))),
                Err(_) => return Err(fail(format!("line {line}: population is not an integer in row `{row}`"))),
            };
            if !seen.insert(name.clone()) {
                return Err(fail(format!("line {line}: duplicate name in row `{row}`")));
            }
            constituencies.push(Constituency { name, population });
        }
        if constituencies.is_empty() {
            return Err(fail("no constituencies".into()));
        }
        Self::new(constituencies)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["name", "population"])?;
        for c in &self.constituencies {
            wtr.write_record([c.name.as_str(), &c.population.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn load_federation(path: impl AsRef<Path>) -> Result<FederationSpec> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Federation { path: path.to_path_buf(), reason: e.to_string() })?;
    FederationSpec::read_csv(file, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FederationSpec> {
        FederationSpec::read_csv(text.as_bytes(), Path::new("test.csv"))
    }

    #[test]
    fn loads_rows_in_order() {
        let fed = parse("name,population\nA,100\nB,300\n").unwrap();
        assert_eq!(fed.len(), 2);
        assert_eq!(fed.total_population(), 400);
        assert_eq!(fed.constituencies()[1].name, "B");
        assert_eq!(fed.relative_sizes(), vec![0.25, 0.75]);
    }

    #[test]
    fn rejects_bad_input() {
        let msg = |t: &str| parse(t).unwrap_err().to_string();
        assert!(msg("").contains("no constituencies"));
        assert!(msg("name,population\n").contains("no constituencies"));
        let neg = msg("name,population\nA,1\nC,-5\n");
        assert!(neg.contains("line 3") && neg.contains("C,-5"), "{neg}");
        assert!(msg("name,population\nA,0\n").contains("positive"));
        assert!(msg("name,population\nA,x\n").contains("not an integer"));
        assert!(msg("name,population\nA,1\nA,2\n").contains("duplicate"));
        assert!(msg("name,pop\nA,1\n").contains("header"));
        assert!(msg("name,population\nA,1,2\n").contains("line 2"));
    }

    #[test]
    fn csv_round_trip() {
        let fed = FederationSpec::new(vec![
            Constituency { name: "North, upper".into(), population: 7 },
            Constituency { name: "South".into(), population: 1_000_000_007 },
        ])
        .unwrap();
        let mut buf = Vec::new();
        fed.write_csv(&mut buf).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), fed);
    }
}
