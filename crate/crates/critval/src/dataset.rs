//! Domain data model: scored conversations, transcripts, trust stages, and the
//! built-in Phase-1 fixture, plus CSV/JSONL loading and validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::validation::ValidationReport;

// ---------------------------------------------------------------------------
// Dimensions
// ---------------------------------------------------------------------------

/// The seven rubric dimensions, in their fixed order D1 < ... < D7.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum DimensionId {
    D1,
    D2,
    D3,
    D4,
    D5,
    D6,
    D7,
}

impl DimensionId {
    pub const ALL: [DimensionId; 7] = [
        DimensionId::D1,
        DimensionId::D2,
        DimensionId::D3,
        DimensionId::D4,
        DimensionId::D5,
        DimensionId::D6,
        DimensionId::D7,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            DimensionId::D1 => "Need Elicitation",
            DimensionId::D2 => "Emotional Empathy",
            DimensionId::D3 => "Pacing Strategy",
            DimensionId::D4 => "Objection Handling",
            DimensionId::D5 => "Contextual Memory",
            DimensionId::D6 => "Product Accuracy",
            DimensionId::D7 => "Brand Consistency",
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            DimensionId::D1 => "D1",
            DimensionId::D2 => "D2",
            DimensionId::D3 => "D3",
            DimensionId::D4 => "D4",
            DimensionId::D5 => "D5",
            DimensionId::D6 => "D6",
            DimensionId::D7 => "D7",
        }
    }

    /// Position 0..=6 within [`DimensionId::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for DimensionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for DimensionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "D1" => Ok(DimensionId::D1),
            "D2" => Ok(DimensionId::D2),
            "D3" => Ok(DimensionId::D3),
            "D4" => Ok(DimensionId::D4),
            "D5" => Ok(DimensionId::D5),
            "D6" => Ok(DimensionId::D6),
            "D7" => Ok(DimensionId::D7),
            other => Err(Error::Data(format!("unknown dimension {other:?}"))),
        }
    }
}

/// A single dimension score: an integer in 1..=5, or explicitly not applicable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionScore {
    Value(u8),
    NotApplicable,
}

impl DimensionScore {
    pub fn new(value: u8) -> Result<Self> {
        if (1..=5).contains(&value) {
            Ok(DimensionScore::Value(value))
        } else {
            Err(Error::Data(format!("score {value} outside 1..=5")))
        }
    }

    pub fn value(self) -> Option<u8> {
        match self {
            DimensionScore::Value(v) => Some(v),
            DimensionScore::NotApplicable => None,
        }
    }

    pub fn is_na(self) -> bool {
        matches!(self, DimensionScore::NotApplicable)
    }

    /// Parses a CSV cell: "1".."5", or one of "NA" / "N/A" / "" for not-applicable.
    pub fn parse_cell(cell: &str) -> Result<Self> {
        let t = cell.trim();
        if t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("n/a") {
            return Ok(DimensionScore::NotApplicable);
        }
        let v: u8 = t
            .parse()
            .map_err(|_| Error::Data(format!("score cell {cell:?} is not 1..=5 or NA")))?;
        DimensionScore::new(v)
    }
}

impl Serialize for DimensionScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DimensionScore::Value(v) => serializer.serialize_u8(*v),
            DimensionScore::NotApplicable => serializer.serialize_str("NA"),
        }
    }
}

impl<'de> Deserialize<'de> for DimensionScore {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
            Null(()),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(v) if (1..=5).contains(&v) => Ok(DimensionScore::Value(v as u8)),
            Raw::Int(v) => Err(D::Error::custom(format!("score {v} outside 1..=5"))),
            Raw::Str(s) => DimensionScore::parse_cell(&s).map_err(D::Error::custom),
            Raw::Null(_) => Ok(DimensionScore::NotApplicable),
        }
    }
}

/// All seven dimension scores of one conversation. Loading may leave
/// dimensions absent; [`validate`] reports absence as an invariant violation
/// distinct from an explicit `NotApplicable`.
pub type ScoreMap = BTreeMap<DimensionId, DimensionScore>;

/// Convenience constructor from seven present values.
pub fn scores_from_values(values: [u8; 7]) -> Result<ScoreMap> {
    let mut m = ScoreMap::new();
    for (dim, v) in DimensionId::ALL.iter().zip(values) {
        m.insert(*dim, DimensionScore::new(v)?);
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Trust ladder
// ---------------------------------------------------------------------------

/// Trust Ladder stages. T0..=T5 carry ordinals 0..=5; T6 marks post-purchase
/// trust collapse and has no ordinal (analyses must exclude it explicitly).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum TrustStage {
    T0,
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
}

impl TrustStage {
    pub const ALL: [TrustStage; 7] = [
        TrustStage::T0,
        TrustStage::T1,
        TrustStage::T2,
        TrustStage::T3,
        TrustStage::T4,
        TrustStage::T5,
        TrustStage::T6,
    ];

    /// Ordinal used as the outcome encoding; T6 is an error by construction.
    pub fn ordinal(self) -> Result<u8> {
        match self {
            TrustStage::T0 => Ok(0),
            TrustStage::T1 => Ok(1),
            TrustStage::T2 => Ok(2),
            TrustStage::T3 => Ok(3),
            TrustStage::T4 => Ok(4),
            TrustStage::T5 => Ok(5),
            TrustStage::T6 => Err(Error::Data(
                "trust stage T6 (collapse) has no ordinal".into(),
            )),
        }
    }

    pub fn descriptor(self) -> &'static str {
        match self {
            TrustStage::T0 => "No Trust",
            TrustStage::T1 => "Platform Credible",
            TrustStage::T2 => "Agent Helpful",
            TrustStage::T3 => "Success Evidence",
            TrustStage::T4 => "My Child Can Match",
            TrustStage::T5 => "Price Reasonable",
            TrustStage::T6 => "Trust Collapse",
        }
    }

    /// Reference metadata: average message count observed per stage in the
    /// annotated corpus. Descriptive only; never used in computations.
    pub fn avg_messages(self) -> Option<f64> {
        match self {
            TrustStage::T1 => Some(4.9),
            TrustStage::T2 => Some(12.6),
            TrustStage::T3 => Some(10.8),
            TrustStage::T4 => Some(23.3),
            TrustStage::T5 => Some(36.4),
            TrustStage::T0 | TrustStage::T6 => None,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            TrustStage::T0 => "T0",
            TrustStage::T1 => "T1",
            TrustStage::T2 => "T2",
            TrustStage::T3 => "T3",
            TrustStage::T4 => "T4",
            TrustStage::T5 => "T5",
            TrustStage::T6 => "T6",
        }
    }
}

impl fmt::Display for TrustStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for TrustStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "T0" => Ok(TrustStage::T0),
            "T1" => Ok(TrustStage::T1),
            "T2" => Ok(TrustStage::T2),
            "T3" => Ok(TrustStage::T3),
            "T4" => Ok(TrustStage::T4),
            "T5" => Ok(TrustStage::T5),
            "T6" => Ok(TrustStage::T6),
            other => Err(Error::Data(format!("unknown trust stage {other:?}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Outcomes and records
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentType {
    Human,
    Ai,
}

impl fmt::Display for AgentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentType::Human => f.write_str("human"),
            AgentType::Ai => f.write_str("ai"),
        }
    }
}

impl FromStr for AgentType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "human" | "h" => Ok(AgentType::Human),
            "ai" | "a" => Ok(AgentType::Ai),
            other => Err(Error::Data(format!("unknown agent type {other:?}"))),
        }
    }
}

/// Outcome label for one conversation: a Trust Ladder stage used as a
/// conversion proxy, or a verified binary conversion flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeLabel {
    TrustProxy(TrustStage),
    Converted(bool),
}

impl OutcomeLabel {
    pub fn is_trust_proxy(self) -> bool {
        matches!(self, OutcomeLabel::TrustProxy(_))
    }

    /// Parses a CSV outcome cell: `T0`..`T6`, or `0`/`1`.
    pub fn parse_cell(cell: &str) -> Result<Self> {
        let t = cell.trim();
        match t {
            "0" => Ok(OutcomeLabel::Converted(false)),
            "1" => Ok(OutcomeLabel::Converted(true)),
            _ => t.parse::<TrustStage>().map(OutcomeLabel::TrustProxy),
        }
    }

    fn as_cell(self) -> String {
        match self {
            OutcomeLabel::TrustProxy(s) => s.code().to_string(),
            OutcomeLabel::Converted(true) => "1".into(),
            OutcomeLabel::Converted(false) => "0".into(),
        }
    }
}

impl Serialize for OutcomeLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OutcomeLabel::TrustProxy(s) => serializer.serialize_str(s.code()),
            OutcomeLabel::Converted(b) => serializer.serialize_bool(*b),
        }
    }
}

impl<'de> Deserialize<'de> for OutcomeLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bool(bool),
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Bool(b) => Ok(OutcomeLabel::Converted(b)),
            Raw::Int(0) => Ok(OutcomeLabel::Converted(false)),
            Raw::Int(1) => Ok(OutcomeLabel::Converted(true)),
            Raw::Int(v) => Err(D::Error::custom(format!("outcome {v} is not 0/1"))),
            Raw::Str(s) => OutcomeLabel::parse_cell(&s).map_err(D::Error::custom),
        }
    }
}

/// One scored conversation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationRecord {
    pub id: String,
    pub agent_type: AgentType,
    pub scores: ScoreMap,
    pub outcome: OutcomeLabel,
    pub message_count: u32,
    /// Position in time order; assigned from an explicit column when present,
    /// else from file row order.
    pub chrono_index: u32,
    #[serde(default)]
    pub phase_tag: String,
}

impl ConversationRecord {
    pub fn score(&self, dim: DimensionId) -> Option<DimensionScore> {
        self.scores.get(&dim).copied()
    }
}

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Agent,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
    /// Optional override for purchase-link detection; when set it wins over
    /// pattern matching.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contains_purchase_link: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub id: String,
    pub agent_type: AgentType,
    pub messages: Vec<Message>,
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

/// Immutable after load; safe for concurrent reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<ConversationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcripts: Option<BTreeMap<String, Transcript>>,
    pub provenance: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Jsonl,
}

const CSV_HEADER: [&str; 12] = [
    "id",
    "agent_type",
    "d1",
    "d2",
    "d3",
    "d4",
    "d5",
    "d6",
    "d7",
    "outcome",
    "message_count",
    "chrono_index",
];

/// Loads scored-conversation records from a CSV or JSONL file.
pub fn load_records(path: impl AsRef<Path>, format: FileFormat) -> Result<Dataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let records = match format {
        FileFormat::Csv => load_csv(path, &display)?,
        FileFormat::Jsonl => load_jsonl(path, &display)?,
    };
    check_load_invariants(&records, &display)?;
    Ok(Dataset {
        records,
        transcripts: None,
        provenance: display,
    })
}

fn check_load_invariants(records: &[ConversationRecord], path: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert(r.id.clone()) {
            return Err(Error::DuplicateId(r.id.clone()));
        }
    }
    let mut kinds = records.iter().map(|r| r.outcome.is_trust_proxy());
    if let Some(first) = kinds.next() {
        if kinds.any(|k| k != first) {
            return Err(Error::MixedOutcomeKinds);
        }
    }
    let _ = path;
    Ok(())
}

fn load_csv(path: &Path, display: &str) -> Result<Vec<ConversationRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                Error::io(display, std::io::Error::other(e.to_string()))
            }
            _ => Error::parse(display, 1, "-", e.to_string()),
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(display, 1, "-", e.to_string()))?
        .iter()
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();
    // chrono_index may be omitted; everything before it is required in order
    let required = &CSV_HEADER[..11];
    if headers.len() < required.len() || headers[..required.len()] != *required {
        return Err(Error::parse(
            display,
            1,
            "-",
            format!("expected header {:?}", CSV_HEADER.join(",")),
        ));
    }
    let has_chrono = headers.len() >= 12 && headers[11] == "chrono_index";

    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let rownum = i + 2; // 1-based, after header
        let row = row.map_err(|e| Error::parse(display, rownum, "-", e.to_string()))?;
        let field = |idx: usize| row.get(idx).unwrap_or("");

        let id = field(0).to_string();
        if id.is_empty() {
            return Err(Error::parse(display, rownum, "id", "empty id"));
        }
        let agent_type: AgentType = field(1)
            .parse()
            .map_err(|e: Error| Error::parse(display, rownum, "agent_type", e.to_string()))?;
        let mut scores = ScoreMap::new();
        for (j, dim) in DimensionId::ALL.iter().enumerate() {
            let sc = DimensionScore::parse_cell(field(2 + j)).map_err(|e| {
                Error::parse(display, rownum, CSV_HEADER[2 + j], e.to_string())
            })?;
            scores.insert(*dim, sc);
        }
        let outcome = OutcomeLabel::parse_cell(field(9))
            .map_err(|e| Error::parse(display, rownum, "outcome", e.to_string()))?;
        let message_count: u32 = {
            let t = field(10);
            if t.is_empty() {
                0
            } else {
                t.parse().map_err(|_| {
                    Error::parse(display, rownum, "message_count", "not a non-negative integer")
                })?
            }
        };
        let chrono_index: u32 = if has_chrono && !field(11).is_empty() {
            field(11).parse().map_err(|_| {
                Error::parse(display, rownum, "chrono_index", "not a non-negative integer")
            })?
        } else {
            i as u32
        };
        out.push(ConversationRecord {
            id,
            agent_type,
            scores,
            outcome,
            message_count,
            chrono_index,
            phase_tag: String::new(),
        });
    }
    Ok(out)
}

fn load_jsonl(path: &Path, display: &str) -> Result<Vec<ConversationRecord>> {
    // Mirrors ConversationRecord, but chrono_index may be omitted: row order
    // then defines it, same as the CSV path.
    #[derive(Deserialize)]
    struct RawRecord {
        id: String,
        agent_type: AgentType,
        scores: ScoreMap,
        outcome: OutcomeLabel,
        #[serde(default)]
        message_count: u32,
        #[serde(default)]
        chrono_index: Option<u32>,
        #[serde(default)]
        phase_tag: String,
    }

    let file = std::fs::File::open(path).map_err(|e| Error::io(display, e))?;
    let reader = std::io::BufReader::new(file);
    let mut out = Vec::new();
    let mut row = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let rownum = i + 1;
        let line = line.map_err(|e| Error::io(display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(display, rownum, "-", e.to_string()))?;
        if raw.id.is_empty() {
            return Err(Error::parse(display, rownum, "id", "empty id"));
        }
        out.push(ConversationRecord {
            id: raw.id,
            agent_type: raw.agent_type,
            scores: raw.scores,
            outcome: raw.outcome,
            message_count: raw.message_count,
            chrono_index: raw.chrono_index.unwrap_or(row as u32),
            phase_tag: raw.phase_tag,
        });
        row += 1;
    }
    Ok(out)
}

/// Writes records back out; the inverse of [`load_records`] for both formats.
pub fn write_records(d: &Dataset, path: impl AsRef<Path>, format: FileFormat) -> Result<()> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(&display, e))?;
    match format {
        FileFormat::Csv => {
            writeln!(file, "{}", CSV_HEADER.join(",")).map_err(|e| Error::io(&display, e))?;
            for r in &d.records {
                let cells: Vec<String> = CSV_HEADER
                    .iter()
                    .map(|col| match *col {
                        "id" => r.id.clone(),
                        "agent_type" => r.agent_type.to_string(),
                        "outcome" => r.outcome.as_cell(),
                        "message_count" => r.message_count.to_string(),
                        "chrono_index" => r.chrono_index.to_string(),
                        dim => {
                            let d: DimensionId = dim.parse().expect("dimension column");
                            match r.scores.get(&d) {
                                Some(DimensionScore::Value(v)) => v.to_string(),
                                Some(DimensionScore::NotApplicable) | None => "NA".into(),
                            }
                        }
                    })
                    .collect();
                writeln!(file, "{}", cells.join(",")).map_err(|e| Error::io(&display, e))?;
            }
        }
        FileFormat::Jsonl => {
            for r in &d.records {
                let line = serde_json::to_string(r)
                    .map_err(|e| Error::Data(format!("serialize record {}: {e}", r.id)))?;
                writeln!(file, "{line}").map_err(|e| Error::io(&display, e))?;
            }
        }
    }
    Ok(())
}

/// Loads transcripts from a JSONL file (one transcript object per line).
pub fn load_transcripts(path: impl AsRef<Path>) -> Result<Vec<Transcript>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(&display, e))?;
    let reader = std::io::BufReader::new(file);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Transcript = serde_json::from_str(&line)
            .map_err(|e| Error::parse(&display, i + 1, "-", e.to_string()))?;
        for (mi, m) in t.messages.iter().enumerate() {
            if m.text.trim().is_empty() {
                return Err(Error::parse(
                    &display,
                    i + 1,
                    format!("messages[{mi}].text"),
                    "empty message text",
                ));
            }
        }
        out.push(t);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Views and flags
// ---------------------------------------------------------------------------

/// Filtered copy excluding trust-collapse (T6) records; the entry point for
/// every ordinal analysis on trust-proxy data. Idempotent and order-preserving.
pub fn phase1_analysis_view(d: &Dataset) -> Dataset {
    Dataset {
        records: d
            .records
            .iter()
            .filter(|r| !matches!(r.outcome, OutcomeLabel::TrustProxy(TrustStage::T6)))
            .cloned()
            .collect(),
        transcripts: d.transcripts.clone(),
        provenance: d.provenance.clone(),
    }
}

/// Deal flag: T5 proxies a completed deal; verified labels pass through.
/// T6 must be excluded upstream.
pub fn deal_flag(r: &ConversationRecord) -> Result<bool> {
    match r.outcome {
        OutcomeLabel::TrustProxy(TrustStage::T6) => Err(Error::TrustCollapse(r.id.clone())),
        OutcomeLabel::TrustProxy(TrustStage::T5) => Ok(true),
        OutcomeLabel::TrustProxy(_) => Ok(false),
        OutcomeLabel::Converted(f) => Ok(f),
    }
}

/// Encodes outcomes for correlation: TL ordinal 0..=5 or converted 0/1.
/// Fails fast on any unexcluded T6 record.
pub fn encode_outcomes(d: &Dataset) -> Result<Vec<f64>> {
    d.records
        .iter()
        .map(|r| match r.outcome {
            OutcomeLabel::TrustProxy(TrustStage::T6) => {
                Err(Error::TrustCollapse(r.id.clone()))
            }
            OutcomeLabel::TrustProxy(s) => Ok(f64::from(s.ordinal()?)),
            OutcomeLabel::Converted(f) => Ok(if f { 1.0 } else { 0.0 }),
        })
        .collect()
}

/// Checks dataset invariants; the report is empty iff the dataset is
/// analyzable as-is.
pub fn validate(d: &Dataset) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut ids = BTreeSet::new();
    for r in &d.records {
        if !ids.insert(r.id.as_str()) {
            report.error(format!("duplicate id {:?}", r.id));
        }
    }

    let mut chrono_seen: BTreeMap<u32, &str> = BTreeMap::new();
    for r in &d.records {
        if let Some(other) = chrono_seen.insert(r.chrono_index, &r.id) {
            report.error(format!(
                "duplicate chrono_index {} (records {:?} and {:?})",
                r.chrono_index, other, r.id
            ));
        }
    }

    for r in &d.records {
        for dim in DimensionId::ALL {
            if !r.scores.contains_key(&dim) {
                report.error(format!(
                    "dimension absent: {} missing from record {:?} (distinct from NA)",
                    dim, r.id
                ));
            }
        }
    }

    let mut kinds = d.records.iter().map(|r| r.outcome.is_trust_proxy());
    if let Some(first) = kinds.next() {
        if kinds.any(|k| k != first) {
            report.error("dataset mixes trust-proxy and converted outcome labels");
        }
    }

    if let Some(transcripts) = &d.transcripts {
        let record_ids: BTreeSet<&str> = d.records.iter().map(|r| r.id.as_str()).collect();
        for id in transcripts.keys() {
            if !record_ids.contains(id.as_str()) {
                report.warning(format!("transcript {id:?} has no matching record"));
            }
        }
        for (id, t) in transcripts {
            for (mi, m) in t.messages.iter().enumerate() {
                if m.text.trim().is_empty() {
                    report.error(format!("transcript {id:?} message {mi} has empty text"));
                }
            }
        }
    }

    report
}

// ---------------------------------------------------------------------------
// Built-in Phase-1 fixture
// ---------------------------------------------------------------------------

pub mod fixture {
    //! The built-in Phase-1 scored fixture: 15 conversations with published
    //! v2.0 composite totals. The v2.1 column is carried as reference metadata
    //! only (the behavioral signals behind it are not part of this dataset).

    use super::*;

    pub struct FixtureRow {
        pub id: &'static str,
        pub agent: AgentType,
        pub scores: [u8; 7],
        pub trust: TrustStage,
        /// Published v2.0 composite total (2-decimal).
        pub v2_0: f64,
        /// Published v2.1 composite total; reference only, not reproducible
        /// from this table alone.
        pub v2_1: f64,
    }

    pub const ROWS: [FixtureRow; 15] = [
        FixtureRow { id: "H1", agent: AgentType::Human, scores: [3, 3, 3, 4, 4, 5, 3], trust: TrustStage::T3, v2_0: 3.45, v2_1: 3.35 },
        FixtureRow { id: "H2", agent: AgentType::Human, scores: [1, 1, 2, 1, 2, 2, 2], trust: TrustStage::T6, v2_0: 1.45, v2_1: 1.75 },
        FixtureRow { id: "H3", agent: AgentType::Human, scores: [3, 2, 2, 2, 3, 3, 2], trust: TrustStage::T5, v2_0: 2.40, v2_1: 2.25 },
        FixtureRow { id: "H4", agent: AgentType::Human, scores: [2, 2, 2, 2, 2, 3, 3], trust: TrustStage::T5, v2_0: 2.15, v2_1: 2.25 },
        FixtureRow { id: "H5", agent: AgentType::Human, scores: [3, 3, 3, 3, 2, 3, 3], trust: TrustStage::T5, v2_0: 2.90, v2_1: 3.00 },
        FixtureRow { id: "A1", agent: AgentType::Ai, scores: [1, 1, 1, 1, 2, 2, 2], trust: TrustStage::T1, v2_0: 1.25, v2_1: 1.15 },
        FixtureRow { id: "A2", agent: AgentType::Ai, scores: [3, 3, 2, 3, 2, 3, 3], trust: TrustStage::T3, v2_0: 2.70, v2_1: 2.55 },
        FixtureRow { id: "A3", agent: AgentType::Ai, scores: [4, 4, 3, 4, 4, 4, 4], trust: TrustStage::T3, v2_0: 3.80, v2_1: 3.50 },
        FixtureRow { id: "A4", agent: AgentType::Ai, scores: [3, 3, 1, 2, 5, 2, 2], trust: TrustStage::T1, v2_0: 2.50, v2_1: 1.60 },
        FixtureRow { id: "A5", agent: AgentType::Ai, scores: [3, 3, 2, 3, 5, 3, 4], trust: TrustStage::T3, v2_0: 3.05, v2_1: 2.65 },
        FixtureRow { id: "A6", agent: AgentType::Ai, scores: [3, 3, 1, 3, 5, 3, 3], trust: TrustStage::T2, v2_0: 2.80, v2_1: 1.95 },
        FixtureRow { id: "A7", agent: AgentType::Ai, scores: [3, 2, 1, 1, 3, 4, 2], trust: TrustStage::T0, v2_0: 2.15, v2_1: 1.85 },
        FixtureRow { id: "A8", agent: AgentType::Ai, scores: [3, 2, 2, 2, 4, 3, 3], trust: TrustStage::T1, v2_0: 2.55, v2_1: 2.40 },
        FixtureRow { id: "A9", agent: AgentType::Ai, scores: [3, 2, 1, 2, 3, 4, 2], trust: TrustStage::T2, v2_0: 2.30, v2_1: 1.90 },
        FixtureRow { id: "A10", agent: AgentType::Ai, scores: [4, 3, 2, 3, 4, 3, 3], trust: TrustStage::T4, v2_0: 3.10, v2_1: 2.55 },
    ];

    /// SHA-256 of the fixture's canonical CSV serialization; guards against
    /// accidental edits to the embedded table.
    pub const CHECKSUM: &str =
        "a2d617bc431b15de445531c565b15d6d4d1a5094e02a5ce9c9487871afa57478";

    /// Canonical CSV serialization used for the checksum.
    pub fn canonical_csv() -> String {
        let mut s = String::from("id,agent,d1,d2,d3,d4,d5,d6,d7,trust,v2_0,v2_1\n");
        for r in &ROWS {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{:.2},{:.2}\n",
                r.id,
                r.agent,
                r.scores[0],
                r.scores[1],
                r.scores[2],
                r.scores[3],
                r.scores[4],
                r.scores[5],
                r.scores[6],
                r.trust,
                r.v2_0,
                r.v2_1
            ));
        }
        s
    }
}

/// The built-in Phase-1 scored dataset (15 records, trust-proxy outcomes),
/// in table order.
pub fn builtin_phase1() -> Dataset {
    let records = fixture::ROWS
        .iter()
        .enumerate()
        .map(|(i, row)| ConversationRecord {
            id: row.id.to_string(),
            agent_type: row.agent,
            scores: scores_from_values(row.scores).expect("fixture scores in range"),
            outcome: OutcomeLabel::TrustProxy(row.trust),
            message_count: 0,
            chrono_index: i as u32,
            phase_tag: "phase1".into(),
        })
        .collect();
    Dataset {
        records,
        transcripts: None,
        provenance: "builtin:phase1".into(),
    }
}
