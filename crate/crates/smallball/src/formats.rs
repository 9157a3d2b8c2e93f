//! On-disk formats: chain and weight JSON, distribution and bound-report CSV,
//! expander graph JSON, fitted-constant JSON and the claim report.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use smallball_core::bounds::BoundReport;
use smallball_core::prg::ExpanderGraph;
use smallball_core::transfer::SumDistribution;
use smallball_core::{MarkovChain, SignSystem, WeightSystem, WeightVariant};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: at `{at}`: {message}")]
    Json { path: PathBuf, at: String, message: String },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: smallball_core::Error },
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.into(), source })
}

/// Parse JSON, reporting the path of the offending field on failure.
pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| FormatError::Json {
        path: path.into(),
        at: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    parse_json(path, &read_text(path)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    fs::write(path, text).map_err(|source| FormatError::Io { path: path.into(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub n_states: usize,
    pub transition: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<Vec<i8>>>,
}

impl ChainFile {
    pub fn from_chain(chain: &MarkovChain, signs: Option<&SignSystem>) -> Self {
        let a = chain.transition();
        Self {
            n_states: chain.n_states(),
            transition: (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect(),
            stationary: Some(chain.stationary().to_vec()),
            signs: signs.map(|s| s.functions().to_vec()),
        }
    }
}

/// A validated chain plus the sign functions the file carried, if any.
#[derive(Debug, Clone)]
pub struct LoadedChain {
    pub chain: MarkovChain,
    pub signs: Option<Vec<Vec<i8>>>,
}

pub fn parse_chain(path: &Path, text: &str) -> Result<LoadedChain, FormatError> {
    let file: ChainFile = parse_json(path, text)?;
    if file.transition.len() != file.n_states {
        return Err(FormatError::Schema {
            path: path.into(),
            message: format!("n_states is {} but transition has {} rows", file.n_states, file.transition.len()),
        });
    }
    let invalid = |source| FormatError::Invalid { path: path.into(), source };
    let chain = MarkovChain::new(&file.transition, file.stationary.as_deref()).map_err(invalid)?;
    if let Some(signs) = &file.signs {
        SignSystem::new(&chain, signs.clone()).map_err(invalid)?;
    }
    Ok(LoadedChain { chain, signs: file.signs })
}

pub fn read_chain(path: &Path) -> Result<LoadedChain, FormatError> {
    parse_chain(path, &read_text(path)?)
}

/// `[v_1, ..., v_n]` for scalars or `[[..d..], ...]` for vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsFile {
    Scalars(Vec<f64>),
    Vectors(Vec<Vec<f64>>),
}

impl WeightsFile {
    pub fn into_system(self, variant: WeightVariant) -> Result<WeightSystem, smallball_core::Error> {
        match self {
            WeightsFile::Scalars(v) => WeightSystem::scalars(&v, variant),
            WeightsFile::Vectors(v) => {
                let d = v.first().map_or(1, Vec::len);
                WeightSystem::new(d, v, variant)
            }
        }
    }
}

pub fn read_weights(path: &Path, variant: WeightVariant) -> Result<WeightSystem, FormatError> {
    let file: WeightsFile = read_json(path)?;
    file.into_system(variant).map_err(|source| FormatError::Invalid { path: path.into(), source })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct DistributionRow {
    sum: i64,
    probability: f64,
}

/// CSV with columns `sum,probability`, one row per support point.
pub fn write_distribution<W: Write>(out: W, dist: &SumDistribution) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (sum, probability) in dist.support() {
        w.serialize(DistributionRow { sum, probability })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_distribution<R: Read>(input: R) -> csv::Result<Vec<(i64, f64)>> {
    csv::Reader::from_reader(input)
        .deserialize::<DistributionRow>()
        .map(|r| r.map(|row| (row.sum, row.probability)))
        .collect()
}

/// CSV row `instance_id,n,d,lambda,R,prob,bound,ratio,pass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub instance_id: String,
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub prob: f64,
    pub bound: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl From<&BoundReport> for BoundRow {
    fn from(r: &BoundReport) -> Self {
        Self {
            instance_id: r.instance_id.clone(),
            n: r.n,
            d: r.d,
            lambda: r.lambda,
            radius: r.radius,
            prob: r.prob,
            bound: r.bound,
            ratio: r.ratio,
            pass: r.pass,
        }
    }
}

pub fn write_bound_reports<W: Write>(out: W, rows: &[BoundReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(BoundRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_bound_reports<R: Read>(input: R) -> csv::Result<Vec<BoundRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub k: u32,
    pub degree: usize,
    pub neighbors: Vec<Vec<u32>>,
}

impl From<&ExpanderGraph> for GraphFile {
    fn from(g: &ExpanderGraph) -> Self {
        Self { k: g.k(), degree: g.degree(), neighbors: g.neighbor_lists() }
    }
}

pub fn read_graph(path: &Path) -> Result<ExpanderGraph, FormatError> {
    let file: GraphFile = read_json(path)?;
    let g = ExpanderGraph::from_neighbor_lists(file.k, &file.neighbors)
        .map_err(|source| FormatError::Invalid { path: path.into(), source })?;
    if g.degree() != file.degree {
        return Err(FormatError::Schema {
            path: path.into(),
            message: format!("degree is {} but neighbor lists have {} entries", file.degree, g.degree()),
        });
    }
    Ok(g)
}

/// One entry of the claim report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub instances: u64,
    pub max_violation: f64,
    pub pass: bool,
}

pub type ClaimReport = BTreeMap<String, ClaimResult>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_errors_cite_the_field() {
        let text = r#"{"n_states": 2, "transition": [[0.5, 0.5], [0.5, "x"]]}"#;
        let err = parse_chain(Path::new("c.json"), text).unwrap_err().to_string();
        assert!(err.contains("transition[1][1]"), "{err}");
        let text = r#"{"n_states": 3, "transition": [[0.5, 0.5], [0.5, 0.5]]}"#;
        assert!(matches!(parse_chain(Path::new("c.json"), text), Err(FormatError::Schema { .. })));
        let text = r#"{"n_states": 2, "transition": [[0.9, 0.1], [0.5, 0.5]], "stationary": [0.5, 0.5]}"#;
        assert!(matches!(
            parse_chain(Path::new("c.json"), text),
            Err(FormatError::Invalid { source: smallball_core::Error::NotReversible { .. }, .. })
        ));
    }

    #[test]
    fn chain_round_trip() {
        let text = r#"{"n_states": 2, "transition": [[0.35, 0.65], [0.65, 0.35]], "signs": [[1, -1], [1, -1]]}"#;
        let loaded = parse_chain(Path::new("c.json"), text).unwrap();
        let back = serde_json::to_string(&ChainFile::from_chain(&loaded.chain, None)).unwrap();
        let again = parse_chain(Path::new("c.json"), &back).unwrap();
        assert_eq!(again.chain, loaded.chain);
        assert_eq!(loaded.signs.unwrap().len(), 2);
    }

    #[test]
    fn weights_accept_scalars_and_vectors() {
        let s: WeightsFile = serde_json::from_str("[1, 2, 3.5]").unwrap();
        assert_eq!(s.into_system(WeightVariant::General).unwrap().dim(), 1);
        let v: WeightsFile = serde_json::from_str("[[1, 0], [0, 1]]").unwrap();
        assert_eq!(v.into_system(WeightVariant::General).unwrap().dim(), 2);
    }

    #[test]
    fn distribution_csv_round_trip() {
        let d = SumDistribution::from_masses(-2, vec![0.25, 0.0, 0.5, 0.0, 0.25]);
        let mut buf = Vec::new();
        write_distribution(&mut buf, &d).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("sum,probability\n-2,0.25\n"));
        assert_eq!(read_distribution(buf.as_slice()).unwrap(), vec![(-2, 0.25), (0, 0.5), (2, 0.25)]);
    }

    #[test]
    fn bound_csv_header() {
        let p = smallball_core::bounds::TheoremParams { n: 4, d: 1, lambda: 0.5, radius: 1.0 };
        let r = BoundReport::new("x".into(), &p, 0.1, 0.2);
        let mut buf = Vec::new();
        write_bound_reports(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("instance_id,n,d,lambda,R,prob,bound,ratio,pass\n"));
        assert!(read_bound_reports(buf.as_slice()).unwrap()[0].pass);
    }
}
