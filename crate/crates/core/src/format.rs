//! On-disk formats: a single self-describing JSON document family for
//! instances and results, with a canonical serialization so outputs are byte
//! reproducible.
//!
//! Canonical form is pretty-printed JSON with keys sorted, id sets sorted
//! ascending, agents listed in ascending order, and a trailing newline.
//! Ids in files are 0-based integers; an optional `labels` table maps them
//! to display names. Prices are decimal strings so values never lose
//! precision to number parsing.

use crate::core_verify::{BlockingCertificate, CapBlockingCertificate};
use crate::model::{Allocation, CapInstance, DirectedNetwork, NetworkInstance};
use crate::prices::PriceTable;
use crate::ttc_network::{StageTrace, Transfer};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Json(serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Instance(#[from] crate::model::InvalidInstance),
    #[error("invalid network or allocation: {0}")]
    Model(crate::model::ModelError),
}

impl From<serde_json::Error> for FormatError {
    fn from(err: serde_json::Error) -> Self {
        FormatError::Json(err)
    }
}

impl From<crate::model::ModelError> for FormatError {
    fn from(err: crate::model::ModelError) -> Self {
        FormatError::Model(err)
    }
}

/// An instance document. `kind` discriminates the two families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum InstanceFile {
    #[serde(rename = "network")]
    Network {
        agents: usize,
        quotas: Vec<usize>,
        preferences: Vec<Vec<usize>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    #[serde(rename = "cap")]
    Cap {
        agents: usize,
        items: usize,
        endowments: Vec<Vec<usize>>,
        preferences: Vec<Vec<usize>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        labels: Option<CapLabels>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapLabels {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agents: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub items: Option<Vec<String>>,
}

/// A parsed, validated instance of either family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedInstance {
    Network(NetworkInstance),
    Cap(CapInstance),
}

impl ParsedInstance {
    pub fn kind(&self) -> &'static str {
        match self {
            ParsedInstance::Network(_) => "network",
            ParsedInstance::Cap(_) => "cap",
        }
    }
}

/// Parses and validates an instance document. Diagnostics carry the JSON
/// line/column for syntax problems and name the offending agent for
/// semantic ones.
pub fn parse_instance(text: &str) -> Result<ParsedInstance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    instance_from_file(file)
}

pub fn instance_from_file(file: InstanceFile) -> Result<ParsedInstance, FormatError> {
    match file {
        InstanceFile::Network { agents, quotas, preferences, labels } => {
            if quotas.len() != agents {
                return Err(FormatError::Invalid(format!(
                    "agents field says {agents} but quotas lists {} entries",
                    quotas.len()
                )));
            }
            if let Some(labels) = &labels {
                if labels.len() != agents {
                    return Err(FormatError::Invalid(format!(
                        "labels table has {} entries for {agents} agents",
                        labels.len()
                    )));
                }
            }
            Ok(ParsedInstance::Network(NetworkInstance::new(quotas, preferences)?))
        }
        InstanceFile::Cap { agents, items, endowments, preferences, labels } => {
            if endowments.len() != agents {
                return Err(FormatError::Invalid(format!(
                    "agents field says {agents} but endowments lists {} entries",
                    endowments.len()
                )));
            }
            let total: usize = endowments.iter().map(|s| s.len()).sum();
            if total != items {
                return Err(FormatError::Invalid(format!(
                    "items field says {items} but endowments cover {total} items"
                )));
            }
            if let Some(labels) = &labels {
                if let Some(agent_labels) = &labels.agents {
                    if agent_labels.len() != agents {
                        return Err(FormatError::Invalid(format!(
                            "agent labels table has {} entries for {agents} agents",
                            agent_labels.len()
                        )));
                    }
                }
                if let Some(item_labels) = &labels.items {
                    if item_labels.len() != items {
                        return Err(FormatError::Invalid(format!(
                            "item labels table has {} entries for {items} items",
                            item_labels.len()
                        )));
                    }
                }
            }
            Ok(ParsedInstance::Cap(CapInstance::new(endowments, preferences)?))
        }
    }
}

pub fn network_instance_file(inst: &NetworkInstance) -> InstanceFile {
    InstanceFile::Network {
        agents: inst.agent_count(),
        quotas: inst.quotas().to_vec(),
        preferences: inst.preferences().iter().map(|p| p.order().to_vec()).collect(),
        labels: None,
    }
}

pub fn cap_instance_file(inst: &CapInstance) -> InstanceFile {
    InstanceFile::Cap {
        agents: inst.agent_count(),
        items: inst.item_count(),
        endowments: inst.endowments().iter().map(|s| s.iter().copied().collect()).collect(),
        preferences: inst.preferences().iter().map(|p| p.order().to_vec()).collect(),
        labels: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub receiver: usize,
    pub item: usize,
    pub stage: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonalizedPriceRecord {
    pub agent: usize,
    pub item: usize,
    pub price: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketPriceRecord {
    pub item: usize,
    pub price: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricesSection {
    pub stage_prices: Vec<String>,
    pub personalized: Vec<PersonalizedPriceRecord>,
    pub market: Vec<MarketPriceRecord>,
}

/// A blocking certificate as written to disk. `receives` pairs each
/// coalition member with the agent whose item (network) or whose endowed
/// item (cap) she takes; witnesses and contributed items are present where
/// defined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSection {
    pub coalition: Vec<usize>,
    pub receives: Vec<ReceiveRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub witnesses: Vec<WitnessRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub items: Option<Vec<ReceiveItemRecord>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiveRecord {
    pub agent: usize,
    pub from: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiveItemRecord {
    pub agent: usize,
    pub item: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub agent: usize,
    pub held_item: usize,
}

/// A result document: assignments plus optional trace, prices, and
/// certificate sections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub kind: String,
    pub assignments: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stages: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfers: Option<Vec<TransferRecord>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prices: Option<PricesSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateSection>,
}

impl ResultFile {
    pub fn for_network(net: &DirectedNetwork) -> Self {
        Self {
            kind: "network".to_string(),
            assignments: net
                .assignments()
                .iter()
                .map(|s| s.iter().copied().collect())
                .collect(),
            stages: None,
            transfers: None,
            prices: None,
            certificate: None,
        }
    }

    pub fn for_allocation(alloc: &Allocation) -> Self {
        Self {
            kind: "cap".to_string(),
            assignments: alloc.bundles().iter().map(|s| s.iter().copied().collect()).collect(),
            stages: None,
            transfers: None,
            prices: None,
            certificate: None,
        }
    }

    pub fn with_trace(mut self, trace: &StageTrace) -> Self {
        self.stages = Some(trace.stages);
        self.transfers = Some(
            trace
                .transfers
                .iter()
                .map(|t| TransferRecord { receiver: t.receiver, item: t.item, stage: t.stage })
                .collect(),
        );
        self
    }

    pub fn with_stages(mut self, stages: usize) -> Self {
        self.stages = Some(stages);
        self
    }

    pub fn with_prices(mut self, table: &PriceTable) -> Self {
        self.prices = Some(prices_section(table));
        self
    }

    /// Reads the assignments back as a network.
    pub fn to_network(&self) -> Result<DirectedNetwork, FormatError> {
        Ok(DirectedNetwork::new(self.assignments.clone())?)
    }

    /// Reads the assignments back as an allocation.
    pub fn to_allocation(&self) -> Result<Allocation, FormatError> {
        Ok(Allocation::new(self.assignments.clone())?)
    }

    /// Reconstructs the stage trace, when the file carries one.
    pub fn to_trace(&self) -> Option<StageTrace> {
        let transfers = self.transfers.as_ref()?;
        Some(StageTrace {
            transfers: transfers
                .iter()
                .map(|t| Transfer { receiver: t.receiver, item: t.item, stage: t.stage })
                .collect(),
            stages: self.stages.unwrap_or_else(|| {
                transfers.iter().map(|t| t.stage).max().unwrap_or(0)
            }),
        })
    }
}

pub fn prices_section(table: &PriceTable) -> PricesSection {
    PricesSection {
        stage_prices: table.stage_prices.iter().map(BigUint::to_string).collect(),
        personalized: table
            .personalized
            .iter()
            .map(|(&(agent, item), price)| PersonalizedPriceRecord {
                agent,
                item,
                price: price.to_string(),
            })
            .collect(),
        market: table
            .market
            .iter()
            .map(|(&item, price)| MarketPriceRecord { item, price: price.to_string() })
            .collect(),
    }
}

pub fn network_certificate_section(cert: &BlockingCertificate) -> CertificateSection {
    CertificateSection {
        coalition: cert.coalition.clone(),
        receives: cert
            .coalition
            .iter()
            .zip(&cert.receives_from)
            .map(|(&agent, &from)| ReceiveRecord { agent, from })
            .collect(),
        witnesses: cert
            .coalition
            .iter()
            .zip(&cert.witnesses)
            .filter_map(|(&agent, w)| w.map(|held_item| WitnessRecord { agent, held_item }))
            .collect(),
        items: None,
    }
}

pub fn cap_certificate_section(cert: &CapBlockingCertificate) -> CertificateSection {
    CertificateSection {
        coalition: cert.coalition.clone(),
        receives: cert
            .coalition
            .iter()
            .zip(&cert.receives_from)
            .map(|(&agent, &from)| ReceiveRecord { agent, from })
            .collect(),
        witnesses: cert
            .coalition
            .iter()
            .zip(&cert.gives_item)
            .map(|(&agent, &held_item)| WitnessRecord { agent, held_item })
            .collect(),
        items: Some(
            cert.coalition
                .iter()
                .zip(&cert.receives_item)
                .map(|(&agent, &item)| ReceiveItemRecord { agent, item })
                .collect(),
        ),
    }
}

/// Core listing written by `enumerate-core` and the C API.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreEnumerationFile {
    pub kind: String,
    pub mode: String,
    pub count: usize,
    pub networks: Vec<Vec<Vec<usize>>>,
}

pub fn core_enumeration_file(mode: &str, core: &[DirectedNetwork]) -> CoreEnumerationFile {
    CoreEnumerationFile {
        kind: "core-enumeration".to_string(),
        mode: mode.to_string(),
        count: core.len(),
        networks: core
            .iter()
            .map(|net| net.assignments().iter().map(|s| s.iter().copied().collect()).collect())
            .collect(),
    }
}

/// Canonical serialization: sorted keys (via the ordered JSON value tree),
/// two-space indentation, newline-terminated.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, FormatError> {
    let tree = serde_json::to_value(value)?;
    let mut text = serde_json::to_string_pretty(&tree)?;
    text.push('\n');
    Ok(text)
}

pub fn parse_result(text: &str) -> Result<ResultFile, FormatError> {
    Ok(serde_json::from_str(text)?)
}
