//! Rule-based funnel-stage detection over transcripts, rejection-tier
//! classification, behavioral signal extraction, Trust-Gate enforcement, and
//! behavior-trust desynchronization metrics.
//!
//! The default stage/rejection lexicon is authored for this toolkit
//! (bilingual Chinese/English); rule sets are fully file-configurable, so the
//! detector can be re-validated on any corpus.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use chrono::Datelike;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::composite::BehaviorSignals;
use crate::dataset::{AgentType, Message, Role, Transcript, TrustStage};
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Funnel stages
// ---------------------------------------------------------------------------

/// The six sales-behavior stages, totally ordered F1 < ... < F6.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum FunnelStage {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
}

impl FunnelStage {
    pub const ALL: [FunnelStage; 6] = [
        FunnelStage::F1,
        FunnelStage::F2,
        FunnelStage::F3,
        FunnelStage::F4,
        FunnelStage::F5,
        FunnelStage::F6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunnelStage::F1 => "Rapport",
            FunnelStage::F2 => "Need Elicitation",
            FunnelStage::F3 => "Pain Point Activation",
            FunnelStage::F4 => "Product Introduction",
            FunnelStage::F5 => "Objection Handling",
            FunnelStage::F6 => "Closing",
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            FunnelStage::F1 => "F1",
            FunnelStage::F2 => "F2",
            FunnelStage::F3 => "F3",
            FunnelStage::F4 => "F4",
            FunnelStage::F5 => "F5",
            FunnelStage::F6 => "F6",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FunnelStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for FunnelStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F1" => Ok(FunnelStage::F1),
            "F2" => Ok(FunnelStage::F2),
            "F3" => Ok(FunnelStage::F3),
            "F4" => Ok(FunnelStage::F4),
            "F5" => Ok(FunnelStage::F5),
            "F6" => Ok(FunnelStage::F6),
            other => Err(Error::Data(format!("unknown funnel stage {other:?}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Match rules
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    /// Literal substring match (after case folding).
    Keyword,
    /// Regular-expression match.
    Regex,
}

/// One compiled match rule. `id` names the rule in error messages and
/// audit output.
#[derive(Debug, Clone)]
pub struct MatchRule {
    pub id: String,
    pub kind: RuleKind,
    pub pattern: String,
    regex: Regex,
}

impl MatchRule {
    pub fn new(
        id: impl Into<String>,
        kind: RuleKind,
        pattern: &str,
        case_fold: bool,
    ) -> Result<Self> {
        let id = id.into();
        let body = match kind {
            RuleKind::Keyword => regex::escape(pattern),
            RuleKind::Regex => pattern.to_string(),
        };
        let full = if case_fold {
            format!("(?i){body}")
        } else {
            body
        };
        let regex = Regex::new(&full).map_err(|e| Error::Rule {
            id: id.clone(),
            message: e.to_string(),
        })?;
        Ok(MatchRule {
            id,
            kind,
            pattern: pattern.to_string(),
            regex,
        })
    }

    pub fn matches(&self, text: &str) -> bool {
        self.regex.is_match(text)
    }
}

/// Raw rule as written in a rule file: either a bare keyword string or a
/// `{"kind": ..., "pattern": ...}` object.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RuleSpec {
    Keyword(String),
    Full { kind: RuleKind, pattern: String },
}

impl RuleSpec {
    fn compile(&self, id: String, case_fold: bool) -> Result<MatchRule> {
        match self {
            RuleSpec::Keyword(p) => MatchRule::new(id, RuleKind::Keyword, p, case_fold),
            RuleSpec::Full { kind, pattern } => MatchRule::new(id, *kind, pattern, case_fold),
        }
    }
}

/// Per-stage rule lists. Stages are evaluated F6 → F1, first match wins;
/// agent messages with no match default to F1. User messages carry no stage.
#[derive(Debug, Clone)]
pub struct StageRuleSet {
    stages: BTreeMap<FunnelStage, Vec<MatchRule>>,
    pub case_fold: bool,
}

impl StageRuleSet {
    pub fn new(stages: BTreeMap<FunnelStage, Vec<MatchRule>>, case_fold: bool) -> Result<Self> {
        for stage in FunnelStage::ALL {
            if stages.get(&stage).is_none_or(|r| r.is_empty()) {
                return Err(Error::Rule {
                    id: stage.code().into(),
                    message: "every stage needs at least one rule".into(),
                });
            }
        }
        Ok(StageRuleSet { stages, case_fold })
    }

    pub fn rules(&self, stage: FunnelStage) -> &[MatchRule] {
        &self.stages[&stage]
    }

    /// First-match classification in F6 → F1 order; default F1.
    pub fn classify(&self, text: &str) -> FunnelStage {
        for stage in FunnelStage::ALL.iter().rev() {
            if self.stages[stage].iter().any(|r| r.matches(text)) {
                return *stage;
            }
        }
        FunnelStage::F1
    }
}

/// Rejection-tier phrase lists; severity precedence Terminal > Hard > Soft.
#[derive(Debug, Clone)]
pub struct RejectionRules {
    pub terminal: Vec<MatchRule>,
    pub hard: Vec<MatchRule>,
    pub soft: Vec<MatchRule>,
}

/// The full configurable rule file: stage rules, rejection tiers, and
/// purchase/price/link patterns.
#[derive(Debug, Clone)]
pub struct RuleSet {
    pub stages: StageRuleSet,
    pub rejections: RejectionRules,
    pub links: Vec<MatchRule>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RuleFile {
    stages: BTreeMap<String, Vec<RuleSpec>>,
    rejections: RejectionTiersFile,
    #[serde(default)]
    links: Vec<RuleSpec>,
    #[serde(default = "default_case_fold")]
    case_fold: bool,
}

fn default_case_fold() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
struct RejectionTiersFile {
    #[serde(default)]
    terminal: Vec<RuleSpec>,
    #[serde(default)]
    hard: Vec<RuleSpec>,
    #[serde(default)]
    soft: Vec<RuleSpec>,
}

/// Loads a rule set from JSON; invalid patterns are reported with rule ids
/// like `F6/2` or `terminal/0`.
pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleSet> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    let file: RuleFile = serde_json::from_str(&text)
        .map_err(|e| Error::parse(&display, 1, "-", e.to_string()))?;
    rule_set_from_file(file)
}

fn rule_set_from_file(file: RuleFile) -> Result<RuleSet> {
    let case_fold = file.case_fold;
    let mut stages = BTreeMap::new();
    for (name, specs) in &file.stages {
        let stage: FunnelStage = name.parse()?;
        let mut rules = Vec::with_capacity(specs.len());
        for (i, spec) in specs.iter().enumerate() {
            rules.push(spec.compile(format!("{name}/{i}"), case_fold)?);
        }
        stages.insert(stage, rules);
    }
    let compile_tier = |name: &str, specs: &[RuleSpec]| -> Result<Vec<MatchRule>> {
        specs
            .iter()
            .enumerate()
            .map(|(i, s)| s.compile(format!("{name}/{i}"), case_fold))
            .collect()
    };
    Ok(RuleSet {
        stages: StageRuleSet::new(stages, case_fold)?,
        rejections: RejectionRules {
            terminal: compile_tier("terminal", &file.rejections.terminal)?,
            hard: compile_tier("hard", &file.rejections.hard)?,
            soft: compile_tier("soft", &file.rejections.soft)?,
        },
        links: compile_tier("links", &file.links)?,
    })
}

/// The authored default lexicon (Chinese/English keywords per stage plus
/// rejection tiers and purchase/price/link patterns).
pub fn default_rules() -> RuleSet {
    let kw = |words: &[&str]| -> Vec<RuleSpec> {
        words
            .iter()
            .map(|w| RuleSpec::Keyword((*w).into()))
            .collect()
    };
    let mut stages = BTreeMap::new();
    stages.insert(
        "F1".to_string(),
        kw(&[
            "您好", "你好", "早上好", "晚上好", "最近怎么样", "天气", "hello", "hi there",
            "good morning", "good evening", "nice to meet", "how are you",
        ]),
    );
    stages.insert(
        "F2".to_string(),
        kw(&[
            "请问您", "孩子多大", "什么条件", "有什么要求", "期望", "介意吗", "想找什么样",
            "学历", "工作情况", "what are you looking for", "tell me about your",
            "requirements", "preferences", "how old is", "what kind of partner",
        ]),
    );
    stages.insert(
        "F3".to_string(),
        kw(&[
            "年龄不等人", "再拖下去", "着急", "耽误", "越来越难", "错过", "别人家的孩子",
            "一个人过年", "time is running out", "getting older", "harder every year",
            "miss the chance", "still single while",
        ]),
    );
    stages.insert(
        "F4".to_string(),
        kw(&[
            "我们的服务", "会员服务", "套餐", "红娘", "一对一", "资料库", "服务包括",
            "匹配成功率", "our service", "membership package", "matchmaker will",
            "our database", "success rate", "premium plan",
        ]),
    );
    stages.insert(
        "F5".to_string(),
        kw(&[
            "理解您的顾虑", "您放心", "保障", "可以退", "不满意", "担心是正常的",
            "很多家长一开始", "效果保证", "understand your concern", "rest assured",
            "guarantee", "refund policy", "no pressure", "many parents worried",
        ]),
    );
    stages.insert(
        "F6".to_string(),
        kw(&[
            "下单", "付款", "支付", "购买", "优惠", "限时", "活动价", "链接", "扫码",
            "立减", "今天办理", "buy now", "purchase", "checkout", "payment link",
            "special offer", "limited time", "sign up today", "place your order",
        ]),
    );

    let file = RuleFile {
        stages,
        rejections: RejectionTiersFile {
            terminal: kw(&[
                "别再联系我", "不要再发了", "拉黑", "投诉", "举报", "再发就报警",
                "do not contact me again", "stop messaging me", "leave me alone",
                "i will report you", "unsubscribe me",
            ]),
            hard: kw(&[
                "不需要", "不买", "没兴趣", "不考虑", "太贵了不要", "别推销",
                "not interested", "don't need", "won't buy", "no thanks", "stop selling",
            ]),
            soft: kw(&[
                "再想想", "考虑一下", "以后再说", "不着急", "过段时间", "商量一下",
                "maybe later", "let me think", "not right now", "need to discuss",
                "i'll think about it",
            ]),
        },
        links: kw(&[
            "http://", "https://", "付款链接", "购买链接", "支付", "下单", "¥", "元/月",
            "元/年", "价格", "优惠价", "payment link", "buy now", "checkout", "price",
            "/month", "/year",
        ]),
        case_fold: true,
    };
    rule_set_from_file(file).expect("default lexicon compiles")
}

// ---------------------------------------------------------------------------
// Stage detection
// ---------------------------------------------------------------------------

/// Per-conversation funnel annotation: stage per agent message plus derived
/// statistics.
#[derive(Debug, Clone, Serialize)]
pub struct FunnelAnnotation {
    pub id: String,
    pub agent_type: AgentType,
    /// Total message count (user messages included), for checkpoint bounds.
    pub message_count: usize,
    /// (message index, stage) per agent message, in transcript order.
    pub stages: Vec<(usize, FunnelStage)>,
    /// Adjacent unequal stage pairs among agent messages.
    pub transitions: usize,
    pub max_stage: Option<FunnelStage>,
    /// Agent messages classified F6.
    pub f6_messages: usize,
}

/// Classifies every agent message by first match in F6 → F1 rule order
/// (default F1); user messages are skipped.
pub fn detect_stages(t: &Transcript, rules: &StageRuleSet) -> Result<FunnelAnnotation> {
    if t.messages.is_empty() {
        return Err(Error::Data(format!("transcript {:?} is empty", t.id)));
    }
    let mut stages = Vec::new();
    for (i, m) in t.messages.iter().enumerate() {
        if m.role == Role::Agent {
            stages.push((i, rules.classify(&m.text)));
        }
    }
    let transitions = stages.windows(2).filter(|w| w[0].1 != w[1].1).count();
    let max_stage = stages.iter().map(|(_, s)| *s).max();
    let f6_messages = stages
        .iter()
        .filter(|(_, s)| *s == FunnelStage::F6)
        .count();
    Ok(FunnelAnnotation {
        id: t.id.clone(),
        agent_type: t.agent_type,
        message_count: t.messages.len(),
        stages,
        transitions,
        max_stage,
        f6_messages,
    })
}

// ---------------------------------------------------------------------------
// Rejection tiers and behavior signals
// ---------------------------------------------------------------------------

/// Rejection severity; a message gets the highest tier that matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RejectionTier {
    Soft,
    Hard,
    Terminal,
}

/// Classifies a user message against the rejection tiers; `None` for no
/// match or for agent messages.
pub fn classify_rejection(message: &Message, rules: &RejectionRules) -> Option<RejectionTier> {
    if message.role != Role::User {
        return None;
    }
    let text = &message.text;
    if rules.terminal.iter().any(|r| r.matches(text)) {
        return Some(RejectionTier::Terminal);
    }
    if rules.hard.iter().any(|r| r.matches(text)) {
        return Some(RejectionTier::Hard);
    }
    if rules.soft.iter().any(|r| r.matches(text)) {
        return Some(RejectionTier::Soft);
    }
    None
}

/// Normalization used for the same-message streak: lowercase, trim, collapse
/// whitespace, strip URLs.
fn normalize_message(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for token in text.split_whitespace() {
        if token.starts_with("http://") || token.starts_with("https://") {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&token.to_lowercase());
    }
    out
}

fn message_is_link(m: &Message, links: &[MatchRule]) -> bool {
    if let Some(flag) = m.contains_purchase_link {
        return flag;
    }
    links.iter().any(|r| r.matches(&m.text))
}

/// Extracts the cap-rule inputs from one transcript: rejection count,
/// continuation after rejection, the longest same-message consecutive-day
/// streak (0 without timestamps), and whether every agent message carries a
/// purchase link.
pub fn behavior_signals(
    t: &Transcript,
    rejections: &RejectionRules,
    links: &[MatchRule],
) -> BehaviorSignals {
    let mut rejection_count = 0u32;
    let mut first_rejection: Option<usize> = None;
    for (i, m) in t.messages.iter().enumerate() {
        if classify_rejection(m, rejections).is_some() {
            rejection_count += 1;
            first_rejection.get_or_insert(i);
        }
    }

    let continued_after_rejection = match first_rejection {
        None => false,
        Some(at) => t
            .messages
            .iter()
            .skip(at + 1)
            .any(|m| m.role == Role::Agent && message_is_link(m, links)),
    };

    // longest run of consecutive calendar days each containing the same
    // normalized agent message
    let mut per_text_days: BTreeMap<String, Vec<i32>> = BTreeMap::new();
    for m in &t.messages {
        if m.role != Role::Agent {
            continue;
        }
        if let Some(ts) = m.timestamp {
            let day = ts.date_naive().num_days_from_ce();
            per_text_days
                .entry(normalize_message(&m.text))
                .or_default()
                .push(day);
        }
    }
    let mut streak = 0u32;
    for days in per_text_days.values_mut() {
        days.sort_unstable();
        days.dedup();
        let mut run = 1u32;
        streak = streak.max(1);
        for w in days.windows(2) {
            if w[1] == w[0] + 1 {
                run += 1;
            } else {
                run = 1;
            }
            streak = streak.max(run);
        }
    }
    if per_text_days.is_empty() {
        streak = 0;
    }

    let agent_messages: Vec<&Message> = t
        .messages
        .iter()
        .filter(|m| m.role == Role::Agent)
        .collect();
    let purchase_link_on_every_message = !agent_messages.is_empty()
        && agent_messages.iter().all(|m| message_is_link(m, links));

    BehaviorSignals {
        rejection_count,
        continued_after_rejection,
        same_message_streak_days: streak,
        purchase_link_on_every_message,
    }
}

// ---------------------------------------------------------------------------
// Trust trajectories and the Trust Gate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustCheckpoint {
    pub msg_index: usize,
    pub stage: TrustStage,
}

/// Ingested trust-state checkpoints over a transcript; indices strictly
/// increase, stages need not be monotone (collapse is representable).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrustTrajectory {
    pub id: String,
    pub checkpoints: Vec<TrustCheckpoint>,
}

impl TrustTrajectory {
    pub fn validate(&self) -> Result<()> {
        for w in self.checkpoints.windows(2) {
            if w[1].msg_index <= w[0].msg_index {
                return Err(Error::Data(format!(
                    "trajectory {:?}: checkpoint indices must strictly increase",
                    self.id
                )));
            }
        }
        Ok(())
    }

    /// Trust in effect at a message: the latest checkpoint at or before it,
    /// `None` before the first checkpoint (treated as below T1).
    pub fn effective_at(&self, msg_index: usize) -> Option<TrustStage> {
        self.checkpoints
            .iter()
            .take_while(|c| c.msg_index <= msg_index)
            .last()
            .map(|c| c.stage)
    }
}

/// Loads trust trajectories from JSONL
/// (`{"id": ..., "checkpoints": [{"msg_index": 3, "stage": "T2"}, ...]}`).
pub fn load_trajectories(path: impl AsRef<Path>) -> Result<Vec<TrustTrajectory>> {
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
        let t: TrustTrajectory = serde_json::from_str(&line)
            .map_err(|e| Error::parse(&display, i + 1, "-", e.to_string()))?;
        t.validate()?;
        out.push(t);
    }
    Ok(out)
}

/// Maximum permitted funnel stage per verified trust state. The default is
/// the published gate: below-T1 and T0 allow F1 only; T1 → F2; T2 → F4;
/// T3 → F5; T4 and T5 → F6.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrustGatePolicy {
    max_stage: BTreeMap<TrustStage, FunnelStage>,
}

impl Default for TrustGatePolicy {
    fn default() -> Self {
        let mut max_stage = BTreeMap::new();
        max_stage.insert(TrustStage::T0, FunnelStage::F1);
        max_stage.insert(TrustStage::T1, FunnelStage::F2);
        max_stage.insert(TrustStage::T2, FunnelStage::F4);
        max_stage.insert(TrustStage::T3, FunnelStage::F5);
        max_stage.insert(TrustStage::T4, FunnelStage::F6);
        max_stage.insert(TrustStage::T5, FunnelStage::F6);
        TrustGatePolicy { max_stage }
    }
}

impl TrustGatePolicy {
    /// Builds a policy from explicit (trust, max stage) pairs; the permitted
    /// maximum must be non-decreasing in trust and cover T0..=T5.
    pub fn new(pairs: &[(TrustStage, FunnelStage)]) -> Result<Self> {
        let max_stage: BTreeMap<_, _> = pairs.iter().copied().collect();
        for stage in &TrustStage::ALL[..6] {
            if !max_stage.contains_key(stage) {
                return Err(Error::Data(format!("gate policy missing {stage}")));
            }
        }
        if max_stage.contains_key(&TrustStage::T6) {
            return Err(Error::Data("gate policy must not cover T6".into()));
        }
        let values: Vec<FunnelStage> = TrustStage::ALL[..6]
            .iter()
            .map(|s| max_stage[s])
            .collect();
        for w in values.windows(2) {
            if w[1] < w[0] {
                return Err(Error::Data(
                    "permitted maximum must be non-decreasing in trust".into(),
                ));
            }
        }
        Ok(TrustGatePolicy { max_stage })
    }

    /// Maximum stage for verified trust; `None` trust (before the first
    /// checkpoint) is below T1 and allows F1 only.
    pub fn max_for(&self, trust: Option<TrustStage>) -> Result<FunnelStage> {
        match trust {
            None => Ok(FunnelStage::F1),
            Some(TrustStage::T6) => Err(Error::Data(
                "trust collapse (T6) is handled upstream, not by the gate".into(),
            )),
            Some(s) => Ok(self.max_stage[&s]),
        }
    }
}

/// Whether the attempted funnel stage is permitted at the verified trust
/// state. T6 is an error; collapse handling happens upstream.
pub fn gate_permitted(
    trust: TrustStage,
    attempted: FunnelStage,
    policy: &TrustGatePolicy,
) -> Result<bool> {
    Ok(attempted <= policy.max_for(Some(trust))?)
}

/// One gate violation: an agent message executed a funnel stage above what
/// the effective trust permitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateViolation {
    pub msg_index: usize,
    pub stage: FunnelStage,
    /// Effective trust at the message; `None` = before the first checkpoint.
    pub trust: Option<TrustStage>,
    pub permitted_max: FunnelStage,
}

/// Walks the annotation against the trajectory and reports every message
/// whose stage exceeds the gate.
pub fn gate_audit(
    annotation: &FunnelAnnotation,
    trajectory: &TrustTrajectory,
    policy: &TrustGatePolicy,
) -> Result<Vec<GateViolation>> {
    trajectory.validate()?;
    if let Some(last) = trajectory.checkpoints.last() {
        if last.msg_index >= annotation.message_count {
            return Err(Error::Data(format!(
                "trajectory {:?}: checkpoint at {} outside transcript of {} messages",
                trajectory.id, last.msg_index, annotation.message_count
            )));
        }
    }
    let mut violations = Vec::new();
    for (msg_index, stage) in &annotation.stages {
        let trust = trajectory.effective_at(*msg_index);
        let permitted_max = policy.max_for(trust)?;
        if *stage > permitted_max {
            violations.push(GateViolation {
                msg_index: *msg_index,
                stage: *stage,
                trust,
                permitted_max,
            });
        }
    }
    Ok(violations)
}

// ---------------------------------------------------------------------------
// Desynchronization metrics
// ---------------------------------------------------------------------------

/// Aggregates for one agent-type group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupDesync {
    pub n: usize,
    pub mean_transitions: f64,
    /// Share of conversations whose maximum stage is F6.
    pub f6_reach_rate: f64,
    pub mean_f6_messages: f64,
}

/// Behavior-trust desynchronization report: per-group funnel statistics plus
/// the (max funnel stage × final trust stage) count matrix.
#[derive(Debug, Clone, Serialize)]
pub struct DesyncReport {
    pub groups: BTreeMap<AgentType, GroupDesync>,
    /// `matrix[f][t]` counts conversations with max stage F(f+1) and final
    /// trust T(t); conversations with no agent messages are omitted.
    pub matrix: [[usize; 7]; 6],
}

/// Builds the desynchronization aggregate from id-aligned annotations and
/// final trust stages.
pub fn desync_matrix(
    annotations: &[FunnelAnnotation],
    trust_finals: &BTreeMap<String, TrustStage>,
) -> Result<DesyncReport> {
    for a in annotations {
        if !trust_finals.contains_key(&a.id) {
            return Err(Error::Data(format!(
                "no final trust stage for conversation {:?}",
                a.id
            )));
        }
    }
    if annotations.len() != trust_finals.len() {
        return Err(Error::Data(format!(
            "{} annotations vs {} trust entries; inputs must align by id",
            annotations.len(),
            trust_finals.len()
        )));
    }

    let mut matrix = [[0usize; 7]; 6];
    let mut acc: BTreeMap<AgentType, (usize, usize, usize, usize)> = BTreeMap::new();
    for a in annotations {
        let entry = acc.entry(a.agent_type).or_insert((0, 0, 0, 0));
        entry.0 += 1;
        entry.1 += a.transitions;
        if a.max_stage == Some(FunnelStage::F6) {
            entry.2 += 1;
        }
        entry.3 += a.f6_messages;
        if let Some(max) = a.max_stage {
            let t = trust_finals[&a.id];
            matrix[max.index()][t as usize] += 1;
        }
    }

    let groups = acc
        .into_iter()
        .map(|(agent, (n, transitions, f6_reached, f6_msgs))| {
            (
                agent,
                GroupDesync {
                    n,
                    mean_transitions: transitions as f64 / n as f64,
                    f6_reach_rate: f6_reached as f64 / n as f64,
                    mean_f6_messages: f6_msgs as f64 / n as f64,
                },
            )
        })
        .collect();

    Ok(DesyncReport { groups, matrix })
}
