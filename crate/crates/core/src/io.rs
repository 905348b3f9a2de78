//! File formats.
//!
//! Space files are JSON, either explicit
//! `{"kind":"explicit","points":[...],"base":"...","dist":[["a/b",...],...]}`
//! or generator-backed `{"kind":"<generator>","params":{...},"truncate":N}`.
//! Family files are `{"space": <space file or path>, "functions": [...]}`
//! with sparse value maps; unlisted points default to 0 and the base value
//! serializes as "0/1". All rationals are canonical `numerator/denominator`
//! strings and emission is deterministic, so emit -> parse -> emit is
//! byte-identical.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{EpsProfile, SatelliteParams, SpaceGenerator};
use crate::lip::{FunctionFamily, LipschitzFunction};
use crate::metric::{FiniteMetricSpace, RawSpace};
use crate::rat::{format_rat, parse_rat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmptyParams {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsParam {
    Named(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProperParams {
    pub eps: EpsParam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkingParams {
    pub first: String,
    pub ratio: String,
    pub radius_ratio: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumParams {
    pub part: Box<GeneratorRepr>,
    pub part_n: usize,
    pub gap: String,
}

/// Generator description as it appears in files (no truncation size).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GeneratorRepr {
    #[serde(rename = "ud_counterexample")]
    Ud { params: EmptyParams },
    #[serde(rename = "proper_counterexample")]
    Proper { params: ProperParams },
    #[serde(rename = "harmonic_sequence")]
    Harmonic { params: EmptyParams },
    #[serde(rename = "triple_cluster")]
    TripleCluster { params: EmptyParams },
    #[serde(rename = "shrinking_satellites")]
    Shrinking { params: ShrinkingParams },
    #[serde(rename = "disjoint_sum")]
    DisjointSum { params: SumParams },
}

impl GeneratorRepr {
    pub fn from_generator(gen: &SpaceGenerator) -> Self {
        match gen {
            SpaceGenerator::UdCounterexample => GeneratorRepr::Ud { params: EmptyParams {} },
            SpaceGenerator::ProperCounterexample { eps } => GeneratorRepr::Proper {
                params: ProperParams {
                    eps: match eps {
                        EpsProfile::Default => EpsParam::Named("default".into()),
                        EpsProfile::Explicit(list) => {
                            EpsParam::List(list.iter().map(format_rat).collect())
                        }
                    },
                },
            },
            SpaceGenerator::HarmonicSequence => {
                GeneratorRepr::Harmonic { params: EmptyParams {} }
            }
            SpaceGenerator::TripleCluster => {
                GeneratorRepr::TripleCluster { params: EmptyParams {} }
            }
            SpaceGenerator::ShrinkingSatellites(p) => GeneratorRepr::Shrinking {
                params: ShrinkingParams {
                    first: format_rat(&p.first),
                    ratio: format_rat(&p.ratio),
                    radius_ratio: format_rat(&p.radius_ratio),
                },
            },
            SpaceGenerator::DisjointSum { part, part_n, gap } => GeneratorRepr::DisjointSum {
                params: SumParams {
                    part: Box::new(GeneratorRepr::from_generator(part)),
                    part_n: *part_n,
                    gap: format_rat(gap),
                },
            },
        }
    }

    pub fn to_generator(&self) -> Result<SpaceGenerator> {
        match self {
            GeneratorRepr::Ud { .. } => Ok(SpaceGenerator::ud_counterexample()),
            GeneratorRepr::Proper { params } => {
                let eps = match &params.eps {
                    EpsParam::Named(s) if s == "default" => EpsProfile::Default,
                    EpsParam::Named(s) => {
                        return Err(Error::Input(format!("unknown eps profile `{s}`")))
                    }
                    EpsParam::List(list) => EpsProfile::Explicit(
                        list.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?,
                    ),
                };
                SpaceGenerator::proper_counterexample(eps)
            }
            GeneratorRepr::Harmonic { .. } => Ok(SpaceGenerator::harmonic_sequence()),
            GeneratorRepr::TripleCluster { .. } => Ok(SpaceGenerator::triple_cluster()),
            GeneratorRepr::Shrinking { params } => {
                SpaceGenerator::shrinking_satellites(SatelliteParams {
                    first: parse_rat(&params.first)?,
                    ratio: parse_rat(&params.ratio)?,
                    radius_ratio: parse_rat(&params.radius_ratio)?,
                })
            }
            GeneratorRepr::DisjointSum { params } => {
                let part = params.part.to_generator()?;
                SpaceGenerator::disjoint_sum(part, params.part_n, parse_rat(&params.gap)?)
            }
        }
    }
}

/// A space file: explicit matrix or generator plus truncation size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceFile {
    Generated {
        #[serde(flatten)]
        generator: GeneratorRepr,
        truncate: usize,
    },
    Explicit {
        kind: String,
        points: Vec<String>,
        base: String,
        dist: Vec<Vec<String>>,
    },
}

impl SpaceFile {
    pub fn explicit(space: &FiniteMetricSpace) -> Self {
        SpaceFile::Explicit {
            kind: "explicit".into(),
            points: space.points().to_vec(),
            base: space.base_label().to_string(),
            dist: space
                .full_matrix()
                .iter()
                .map(|row| row.iter().map(format_rat).collect())
                .collect(),
        }
    }

    pub fn generated(gen: &SpaceGenerator, truncate: usize) -> Self {
        SpaceFile::Generated {
            generator: GeneratorRepr::from_generator(gen),
            truncate,
        }
    }

    /// Materializes the file: validates an explicit matrix or truncates
    /// the generator (stamping provenance).
    pub fn realize(&self) -> Result<FiniteMetricSpace> {
        match self {
            SpaceFile::Explicit { kind, points, base, dist } => {
                if kind != "explicit" {
                    return Err(Error::Input(format!("unknown space kind `{kind}`")));
                }
                let raw = RawSpace {
                    points: points.clone(),
                    base: base.clone(),
                    dist: dist
                        .iter()
                        .map(|row| row.iter().map(|s| parse_rat(s)).collect())
                        .collect::<Result<_>>()?,
                };
                FiniteMetricSpace::from_raw(&raw)
            }
            SpaceFile::Generated { generator, truncate } => {
                generator.to_generator()?.truncate(*truncate)
            }
        }
    }

    pub fn generator(&self) -> Result<Option<(SpaceGenerator, usize)>> {
        match self {
            SpaceFile::Explicit { .. } => Ok(None),
            SpaceFile::Generated { generator, truncate } => {
                Ok(Some((generator.to_generator()?, *truncate)))
            }
        }
    }
}

/// Canonical emission: pretty JSON with a trailing newline.
pub fn emit_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialization is infallible");
    s.push('\n');
    s
}

pub fn parse_space_file(text: &str) -> Result<SpaceFile> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("space file: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Path(String),
    Inline(SpaceFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionEntry {
    pub name: String,
    pub values: IndexMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    /// Free-form record of the construction that produced the family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
    pub space: SpaceRef,
    pub functions: Vec<FunctionEntry>,
}

pub fn parse_family_file(text: &str) -> Result<FamilyFile> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("family file: {e}")))
}

/// Family file with the space inlined; each function lists its base value
/// ("0/1") plus every nonzero value, in canonical point order.
pub fn family_to_file(family: &FunctionFamily) -> FamilyFile {
    let space = family.space();
    let functions = (0..family.len())
        .map(|i| {
            let f = family.member(i);
            let mut values = IndexMap::new();
            for (p, v) in f.values().iter().enumerate() {
                if p == space.base_index() || !num_traits::Zero::is_zero(v) {
                    values.insert(space.label(p).to_string(), format_rat(v));
                }
            }
            FunctionEntry {
                name: f.name().to_string(),
                values,
                witness: family
                    .witness(i)
                    .map(|(p, q)| [space.label(p).to_string(), space.label(q).to_string()]),
            }
        })
        .collect();
    FamilyFile {
        provenance: None,
        space: SpaceRef::Inline(SpaceFile::explicit(space)),
        functions,
    }
}

/// Materializes a family file. `resolve` loads the JSON text behind a
/// path reference; pass a closure that errors for inline-only contexts.
pub fn realize_family(
    file: &FamilyFile,
    resolve: impl Fn(&str) -> Result<String>,
) -> Result<FunctionFamily> {
    let space_file = match &file.space {
        SpaceRef::Inline(s) => s.clone(),
        SpaceRef::Path(p) => parse_space_file(&resolve(p)?)?,
    };
    let space = space_file.realize()?.arc();
    if file.functions.is_empty() {
        return Err(Error::Input("family file lists no functions".into()));
    }
    let mut members = Vec::new();
    let mut witnesses = Vec::new();
    for entry in &file.functions {
        let pairs = entry
            .values
            .iter()
            .map(|(k, v)| Ok((k.as_str(), parse_rat(v)?)))
            .collect::<Result<Vec<_>>>()?;
        members.push(LipschitzFunction::from_pairs(
            std::sync::Arc::clone(&space),
            &entry.name,
            pairs,
        )?);
        witnesses.push(match &entry.witness {
            None => None,
            Some([p, q]) => Some((space.index_of(p)?, space.index_of(q)?)),
        });
    }
    FunctionFamily::new(space, members, witnesses)
}
