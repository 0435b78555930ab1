//! JSON documents for runs, verdicts, oracle tables and the counterexample
//! report. Node ids are 1-based; rationals are strings "n" or "p/q".

use std::collections::BTreeSet;
use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::certificates::{transform_duals, verify_claims, CardinalityCertificate, Claim, ConstraintId, SetValue, Verdict, Witness};
use crate::engine::{BlossomDual, DualState, Mode, RunResult, Status};
use crate::graph::{normalize_weights, Instance, Matching, NodeId, NormalizationRecord};
use crate::oracle::OracleTable;
use crate::rational::{format_rational, parse_rational, serde_str, ParseRationalError, Rational};
use crate::scenario::ScenarioReport;

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("node {id} out of range 1..={node_count}")]
    NodeOutOfRange { id: usize, node_count: usize },
    #[error("snapshot {index}: {detail}")]
    Snapshot { index: usize, detail: String },
    #[error("document shift {document} differs from instance shift {instance}")]
    ShiftMismatch { document: String, instance: String },
    #[error("bad amount {text:?}: {source}")]
    Amount {
        text: String,
        #[source]
        source: ParseRationalError,
    },
    #[error("no amounts given")]
    NoAmounts,
}

/// Per-node values keyed by 1-based id: {"1": "1/2", "2": "0", ...}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeValues(pub Vec<Rational>);

impl Serialize for NodeValues {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (v, value) in self.0.iter().enumerate() {
            map.serialize_entry(&(v + 1).to_string(), &format_rational(value))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for NodeValues {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct NodeValuesVisitor;

        impl<'de> Visitor<'de> for NodeValuesVisitor {
            type Value = NodeValues;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from node ids 1..n to rational strings")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<NodeValues, A::Error> {
                let mut entries: Vec<(usize, Rational)> = Vec::new();
                while let Some((key, value)) = access.next_entry::<String, String>()? {
                    let id: usize = key
                        .parse()
                        .map_err(|_| de::Error::custom(format!("bad node id {key:?}")))?;
                    let value = parse_rational(&value).map_err(de::Error::custom)?;
                    entries.push((id, value));
                }
                entries.sort_by_key(|(id, _)| *id);
                for (i, (id, _)) in entries.iter().enumerate() {
                    if *id != i + 1 {
                        return Err(de::Error::custom(format!("node ids must be 1..n, found {id}")));
                    }
                }
                Ok(NodeValues(entries.into_iter().map(|(_, v)| v).collect()))
            }
        }

        deserializer.deserialize_map(NodeValuesVisitor)
    }
}

fn one_based(nodes: &BTreeSet<NodeId>) -> Vec<usize> {
    nodes.iter().map(|v| v + 1).collect()
}

pub fn pairs_one_based(m: &Matching) -> Vec<[usize; 2]> {
    m.pairs().map(|&(u, v)| [u + 1, v + 1]).collect()
}

fn zero_based(ids: &[usize], node_count: usize) -> Result<Vec<NodeId>, SchemaError> {
    ids.iter()
        .map(|&id| {
            if id == 0 || id > node_count {
                Err(SchemaError::NodeOutOfRange { id, node_count })
            } else {
                Ok(id - 1)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlossomDoc {
    pub nodes: Vec<usize>,
    #[serde(with = "serde_str")]
    pub pi: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualsDoc {
    pub singletons: NodeValues,
    pub blossoms: Vec<BlossomDoc>,
}

impl From<&DualState> for DualsDoc {
    fn from(d: &DualState) -> Self {
        DualsDoc {
            singletons: NodeValues(d.singletons.clone()),
            blossoms: d
                .blossoms
                .iter()
                .map(|b| BlossomDoc { nodes: one_based(&b.nodes), pi: b.pi.clone() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetValueDoc {
    pub nodes: Vec<usize>,
    #[serde(with = "serde_str")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDoc {
    #[serde(with = "serde_str")]
    pub gamma: Rational,
    pub y: NodeValues,
    pub z: Vec<SetValueDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotDoc {
    pub k: usize,
    /// On the input's weight scale.
    #[serde(with = "serde_str")]
    pub weight: Rational,
    pub matching: Vec<[usize; 2]>,
    pub duals: DualsDoc,
    pub certificate: CertificateDoc,
}

/// A solver run. Duals and certificates refer to the weights after adding
/// `shift` to every edge; `weight` is on the input's scale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunDoc {
    pub status: Status,
    pub mode: Mode,
    #[serde(with = "serde_str")]
    pub beta: Rational,
    #[serde(with = "serde_str")]
    pub shift: Rational,
    pub snapshots: Vec<SnapshotDoc>,
}

impl RunDoc {
    pub fn new(run: &RunResult, record: &NormalizationRecord) -> Self {
        let beta = run.snapshots[0].duals.beta.clone();
        let snapshots = run
            .snapshots
            .iter()
            .map(|s| {
                let cert = transform_duals(&s.duals, s.cardinality);
                SnapshotDoc {
                    k: s.cardinality,
                    weight: record.original_weight(&s.weight, s.cardinality),
                    matching: pairs_one_based(&s.matching),
                    duals: (&s.duals).into(),
                    certificate: CertificateDoc {
                        gamma: cert.gamma,
                        y: NodeValues(cert.y),
                        z: cert
                            .z
                            .iter()
                            .map(|z| SetValueDoc { nodes: one_based(&z.nodes), value: z.value.clone() })
                            .collect(),
                    },
                }
            })
            .collect();
        RunDoc {
            status: run.status,
            mode: run.mode,
            beta,
            shift: record.shift.clone(),
            snapshots,
        }
    }

    /// Reads snapshot `index` back: matching, normalized weight, duals and
    /// the stored certificate.
    pub fn decode_snapshot(
        &self,
        index: usize,
        node_count: usize,
    ) -> Result<(Claim, DualState), SchemaError> {
        let doc = self.snapshots.get(index).ok_or_else(|| SchemaError::Snapshot {
            index,
            detail: format!("document has {} snapshots", self.snapshots.len()),
        })?;
        let bad = |detail: String| SchemaError::Snapshot { index, detail };
        for (what, len) in [("singletons", doc.duals.singletons.0.len()), ("y", doc.certificate.y.0.len())] {
            if len != node_count {
                return Err(bad(format!("{what} cover {len} nodes, instance has {node_count}")));
            }
        }
        let mut matching = Matching::empty();
        for pair in &doc.matching {
            let ends = zero_based(pair, node_count)?;
            matching.insert(ends[0], ends[1]).map_err(|e| bad(e.to_string()))?;
        }
        let set = |ids: &[usize]| zero_based(ids, node_count).map(|v| v.into_iter().collect::<BTreeSet<_>>());
        let duals = DualState {
            singletons: doc.duals.singletons.0.clone(),
            blossoms: doc
                .duals
                .blossoms
                .iter()
                .map(|b| Ok(BlossomDual { nodes: set(&b.nodes)?, pi: b.pi.clone() }))
                .collect::<Result<_, SchemaError>>()?,
            beta: self.beta.clone(),
        };
        duals.validate().map_err(|e| bad(e.to_string()))?;
        let certificate = CardinalityCertificate {
            k: doc.k,
            gamma: doc.certificate.gamma.clone(),
            y: doc.certificate.y.0.clone(),
            z: doc
                .certificate
                .z
                .iter()
                .map(|z| Ok(SetValue { nodes: set(&z.nodes)?, value: z.value.clone() }))
                .collect::<Result<_, SchemaError>>()?,
        };
        let weight = &doc.weight + &self.shift * Rational::from_integer(doc.k.into());
        Ok((Claim { matching, weight, certificate }, duals))
    }
}

/// Checks a stored run against the instance it claims to solve: every
/// stored certificate, the single-path property, and that each certificate
/// is the transform of the stored duals.
pub fn verify_document(inst: &Instance, doc: &RunDoc) -> Result<Verdict, SchemaError> {
    let (shifted, record) = normalize_weights(inst);
    if record.shift != doc.shift {
        return Err(SchemaError::ShiftMismatch {
            document: format_rational(&doc.shift),
            instance: format_rational(&record.shift),
        });
    }
    let mut claims = Vec::new();
    let mut mismatched = Vec::new();
    for i in 0..doc.snapshots.len() {
        let (claim, duals) = doc.decode_snapshot(i, inst.node_count())?;
        if transform_duals(&duals, claim.certificate.k) != claim.certificate {
            mismatched.push(i);
        }
        claims.push(claim);
    }
    let mut verdict = verify_claims(&shifted, &claims);
    for i in mismatched {
        verdict.violations.push(crate::certificates::Violation {
            constraint: ConstraintId::Structure,
            witness: Witness::Snapshot(i),
            lhs: Rational::from_integer(0.into()),
            rhs: Rational::from_integer(0.into()),
            k: Some(claims[i].certificate.k),
        });
    }
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessDoc {
    Edge([usize; 2]),
    Node(usize),
    Set(Vec<usize>),
    Snapshot(usize),
    Snapshots([usize; 2]),
    None,
}

impl From<&Witness> for WitnessDoc {
    fn from(w: &Witness) -> Self {
        match w {
            Witness::Edge(u, v) => WitnessDoc::Edge([u + 1, v + 1]),
            Witness::Node(v) => WitnessDoc::Node(v + 1),
            Witness::Set(s) => WitnessDoc::Set(one_based(s)),
            Witness::Snapshot(i) => WitnessDoc::Snapshot(*i),
            Witness::Snapshots(i, j) => WitnessDoc::Snapshots([*i, *j]),
            Witness::None => WitnessDoc::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationDoc {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    pub constraint: ConstraintId,
    pub witness: WitnessDoc,
    #[serde(with = "serde_str")]
    pub lhs: Rational,
    #[serde(with = "serde_str")]
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub pass: bool,
    pub violations: Vec<ViolationDoc>,
}

impl From<&Verdict> for VerdictDoc {
    fn from(v: &Verdict) -> Self {
        VerdictDoc {
            pass: v.pass(),
            violations: v
                .violations
                .iter()
                .map(|x| ViolationDoc {
                    k: x.k,
                    constraint: x.constraint,
                    witness: (&x.witness).into(),
                    lhs: x.lhs.clone(),
                    rhs: x.rhs.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimumDoc {
    pub k: usize,
    #[serde(with = "serde_str")]
    pub min_weight: Rational,
    pub witness: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleDoc {
    pub nu: usize,
    pub by_cardinality: Vec<OptimumDoc>,
}

impl From<&OracleTable> for OracleDoc {
    fn from(t: &OracleTable) -> Self {
        OracleDoc {
            nu: t.nu,
            by_cardinality: t
                .by_cardinality
                .iter()
                .map(|c| OptimumDoc {
                    k: c.k,
                    min_weight: c.min_weight.clone(),
                    witness: pairs_one_based(&c.witness),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightDoc {
    pub k: usize,
    #[serde(with = "serde_str")]
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptedDoc {
    Snapshots(Vec<WeightDoc>),
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceDoc {
    pub k: usize,
    #[serde(with = "serde_str")]
    pub scripted: Rational,
    #[serde(with = "serde_str")]
    pub oracle: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub amounts: Vec<String>,
    pub uniform: Vec<WeightDoc>,
    pub scripted: ScriptedDoc,
    pub oracle: Vec<WeightDoc>,
    pub divergence: Option<DivergenceDoc>,
    pub uniform_verdict: VerdictDoc,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scripted_verdict: Option<VerdictDoc>,
}

impl ScenarioDoc {
    pub fn new(
        report: &ScenarioReport,
        amounts: &[Rational],
        uniform_verdict: &Verdict,
        scripted_verdict: Option<&Verdict>,
    ) -> Self {
        let weights = |list: &[(usize, Rational)]| {
            list.iter().map(|(k, w)| WeightDoc { k: *k, weight: w.clone() }).collect::<Vec<_>>()
        };
        ScenarioDoc {
            amounts: amounts.iter().map(format_rational).collect(),
            uniform: weights(&report.uniform),
            scripted: match &report.scripted {
                Ok(list) => ScriptedDoc::Snapshots(weights(list)),
                Err(e) => ScriptedDoc::Error(e.to_string()),
            },
            oracle: report
                .oracle
                .by_cardinality
                .iter()
                .map(|c| WeightDoc { k: c.k, weight: c.min_weight.clone() })
                .collect(),
            divergence: report.divergence.as_ref().map(|d| DivergenceDoc {
                k: d.k,
                scripted: d.scripted.clone(),
                oracle: d.oracle.clone(),
            }),
            uniform_verdict: uniform_verdict.into(),
            scripted_verdict: scripted_verdict.map(Into::into),
        }
    }
}

/// One line of amounts, separated by commas and/or whitespace.
pub fn parse_amount_line(line: &str) -> Result<Vec<Rational>, SchemaError> {
    let amounts = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            parse_rational(t).map_err(|source| SchemaError::Amount { text: t.to_string(), source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if amounts.is_empty() {
        return Err(SchemaError::NoAmounts);
    }
    Ok(amounts)
}

/// A dual-update script: one line per phase, `#` starts a comment.
pub fn parse_script(text: &str) -> Result<Vec<Vec<Rational>>, SchemaError> {
    let phases = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(parse_amount_line)
        .collect::<Result<Vec<_>, _>>()?;
    if phases.is_empty() {
        return Err(SchemaError::NoAmounts);
    }
    Ok(phases)
}
