//! The goal / question / indicator catalog.
//!
//! All changes go through [`Catalog::apply`] with a [`CatalogCommand`]. The
//! function is deterministic (timestamps come from the command), so replaying
//! a journal of accepted commands rebuilds an identical catalog.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::indicator::{BasicIndicatorSpec, IndicatorKind, IndicatorSpec, PartResolver};
use crate::model::Timestamp;

/// Who issues a command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub user_id: String,
    #[serde(default)]
    pub admin: bool,
}

impl Actor {
    pub fn user(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            admin: false,
        }
    }

    pub fn admin(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            admin: true,
        }
    }

    fn may_edit(&self, owner: &str) -> bool {
        self.admin || self.user_id == owner
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalStatus {
    Active,
    Requested,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub goal_id: String,
    pub name: String,
    pub description: String,
    pub status: GoalStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested_by: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub question_id: String,
    pub goal_id: String,
    pub text: String,
    pub owner: String,
    pub indicators: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRecord {
    pub indicator_id: String,
    pub kind: IndicatorKind,
    pub spec: IndicatorSpec,
    pub owner: String,
    pub created_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copied_from: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum CatalogOp {
    RequestGoal { name: String, description: String },
    ReviewGoal { goal_id: String, approve: bool },
    SaveQuestion { goal_id: String, text: String },
    DeleteQuestion { question_id: String },
    AssociateIndicator { question_id: String, indicator_id: String },
    DisassociateIndicator { question_id: String, indicator_id: String },
    SaveIndicator { spec: IndicatorSpec },
    UpdateIndicator { indicator_id: String, spec: IndicatorSpec },
    DeleteIndicator { indicator_id: String },
    CopyIndicator { indicator_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogCommand {
    pub actor: Actor,
    pub at: Timestamp,
    pub op: CatalogOp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", content = "value", rename_all = "snake_case")]
pub enum CatalogOutcome {
    Goal(Goal),
    /// A rejected goal request is dropped.
    GoalRejected(String),
    Question(Question),
    Indicator(IndicatorRecord),
    Deleted(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "error", content = "detail", rename_all = "snake_case")]
pub enum CatalogError {
    #[error("a goal named {0:?} already exists")]
    DuplicateGoal(String),
    #[error("only administrators may do this")]
    NotAdmin,
    #[error("goal {0:?} is not awaiting review")]
    GoalNotPending(String),
    #[error("unknown goal {0:?}")]
    UnknownGoal(String),
    #[error("goal {0:?} is not active")]
    GoalNotActive(String),
    #[error("unknown question {0:?}")]
    UnknownQuestion(String),
    #[error("unknown indicator {0:?}")]
    UnknownIndicator(String),
    #[error("{0:?} belongs to another user")]
    NotOwner(String),
    #[error("indicator {indicator_id:?} is already part of question {question_id:?}")]
    AlreadyAssociated { question_id: String, indicator_id: String },
    #[error("indicator {indicator_id:?} is not part of question {question_id:?}")]
    NotAssociated { question_id: String, indicator_id: String },
    #[error("part {0:?} is not a basic indicator")]
    PartNotBasic(String),
    #[error("indicator {indicator_id:?} is a part of {used_by:?}")]
    RestrictDelete { indicator_id: String, used_by: Vec<String> },
    #[error("cannot change indicator kind from {from} to {to}")]
    KindChange { from: IndicatorKind, to: IndicatorKind },
    #[error("changing the method would break composite {0:?}")]
    BreaksComposite(String),
    #[error("{0} must not be empty")]
    Empty(&'static str),
}

fn parse_id(prefix: &str, id: &str) -> Option<u64> {
    id.strip_prefix(prefix)?.strip_prefix('-')?.parse().ok()
}

const SEEDED_GOALS: [(&str, &str); 5] = [
    ("Assessment", "Judge learners' performance and progress."),
    ("Intervention", "Spot learners who need support and act on it."),
    ("Monitoring", "Follow learner activity over time."),
    ("Prediction", "Anticipate learner outcomes from activity."),
    ("Recommendation", "Suggest learning resources or activities."),
];

/// The catalog state. Maps are keyed by the numeric part of the ids, so
/// listings come out in creation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    goals: BTreeMap<u64, Goal>,
    questions: BTreeMap<u64, Question>,
    indicators: BTreeMap<u64, IndicatorRecord>,
    next_goal: u64,
    next_question: u64,
    next_indicator: u64,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::new()
    }
}

impl Catalog {
    /// A catalog holding only the seeded active goals.
    pub fn new() -> Self {
        let mut catalog = Self {
            goals: BTreeMap::new(),
            questions: BTreeMap::new(),
            indicators: BTreeMap::new(),
            next_goal: 1,
            next_question: 1,
            next_indicator: 1,
        };
        for (name, description) in SEEDED_GOALS {
            let id = catalog.next_goal;
            catalog.next_goal += 1;
            catalog.goals.insert(
                id,
                Goal {
                    goal_id: format!("g-{id}"),
                    name: name.into(),
                    description: description.into(),
                    status: GoalStatus::Active,
                    requested_by: None,
                },
            );
        }
        catalog
    }

    pub fn goals(&self) -> impl Iterator<Item = &Goal> {
        self.goals.values()
    }

    pub fn active_goals(&self) -> impl Iterator<Item = &Goal> {
        self.goals.values().filter(|g| g.status == GoalStatus::Active)
    }

    pub fn goal(&self, goal_id: &str) -> Option<&Goal> {
        self.goals.get(&parse_id("g", goal_id)?)
    }

    pub fn questions(&self) -> impl Iterator<Item = &Question> {
        self.questions.values()
    }

    pub fn question(&self, question_id: &str) -> Option<&Question> {
        self.questions.get(&parse_id("q", question_id)?)
    }

    pub fn indicators(&self) -> impl Iterator<Item = &IndicatorRecord> {
        self.indicators.values()
    }

    pub fn indicator(&self, indicator_id: &str) -> Option<&IndicatorRecord> {
        self.indicators.get(&parse_id("ind", indicator_id)?)
    }

    /// Saved composite and multi-level indicators that use `indicator_id` as a part.
    pub fn dependents(&self, indicator_id: &str) -> Vec<&IndicatorRecord> {
        self.indicators
            .values()
            .filter(|r| r.spec.part_ids().any(|p| p == indicator_id))
            .collect()
    }

    /// Applies one command; on error the catalog is unchanged.
    pub fn apply(&mut self, command: CatalogCommand) -> Result<CatalogOutcome, CatalogError> {
        let CatalogCommand { actor, at, op } = command;
        match op {
            CatalogOp::RequestGoal { name, description } => self.request_goal(&actor, name, description),
            CatalogOp::ReviewGoal { goal_id, approve } => self.review_goal(&actor, &goal_id, approve),
            CatalogOp::SaveQuestion { goal_id, text } => self.save_question(&actor, &goal_id, text),
            CatalogOp::DeleteQuestion { question_id } => {
                let key = self.question_key(&question_id)?;
                if !actor.may_edit(&self.questions[&key].owner) {
                    return Err(CatalogError::NotOwner(question_id));
                }
                self.questions.remove(&key);
                Ok(CatalogOutcome::Deleted(question_id))
            }
            CatalogOp::AssociateIndicator { question_id, indicator_id } => {
                self.indicator_key(&indicator_id)?;
                let question = self.editable_question(&actor, &question_id)?;
                if question.indicators.contains(&indicator_id) {
                    return Err(CatalogError::AlreadyAssociated { question_id, indicator_id });
                }
                question.indicators.push(indicator_id);
                Ok(CatalogOutcome::Question(question.clone()))
            }
            CatalogOp::DisassociateIndicator { question_id, indicator_id } => {
                let question = self.editable_question(&actor, &question_id)?;
                let Some(pos) = question.indicators.iter().position(|i| *i == indicator_id) else {
                    return Err(CatalogError::NotAssociated { question_id, indicator_id });
                };
                question.indicators.remove(pos);
                Ok(CatalogOutcome::Question(question.clone()))
            }
            CatalogOp::SaveIndicator { spec } => {
                self.check_parts(&spec)?;
                Ok(CatalogOutcome::Indicator(self.insert_indicator(&actor, at, spec, None)))
            }
            CatalogOp::UpdateIndicator { indicator_id, spec } => self.update_indicator(&actor, indicator_id, spec),
            CatalogOp::DeleteIndicator { indicator_id } => self.delete_indicator(&actor, indicator_id),
            CatalogOp::CopyIndicator { indicator_id } => {
                let key = self.indicator_key(&indicator_id)?;
                let spec = self.indicators[&key].spec.clone();
                Ok(CatalogOutcome::Indicator(self.insert_indicator(&actor, at, spec, Some(indicator_id))))
            }
        }
    }

    fn request_goal(&mut self, actor: &Actor, name: String, description: String) -> Result<CatalogOutcome, CatalogError> {
        let name = name.trim().to_string();
        if name.is_empty() {
            return Err(CatalogError::Empty("goal name"));
        }
        if self.goals.values().any(|g| g.name.to_lowercase() == name.to_lowercase()) {
            return Err(CatalogError::DuplicateGoal(name));
        }
        let id = self.next_goal;
        self.next_goal += 1;
        let goal = Goal {
            goal_id: format!("g-{id}"),
            name,
            description,
            status: GoalStatus::Requested,
            requested_by: Some(actor.user_id.clone()),
        };
        self.goals.insert(id, goal.clone());
        Ok(CatalogOutcome::Goal(goal))
    }

    fn review_goal(&mut self, actor: &Actor, goal_id: &str, approve: bool) -> Result<CatalogOutcome, CatalogError> {
        if !actor.admin {
            return Err(CatalogError::NotAdmin);
        }
        let key = parse_id("g", goal_id)
            .filter(|k| self.goals.contains_key(k))
            .ok_or_else(|| CatalogError::UnknownGoal(goal_id.into()))?;
        if self.goals[&key].status != GoalStatus::Requested {
            return Err(CatalogError::GoalNotPending(goal_id.into()));
        }
        if approve {
            let goal = self.goals.get_mut(&key).expect("checked");
            goal.status = GoalStatus::Active;
            Ok(CatalogOutcome::Goal(goal.clone()))
        } else {
            self.goals.remove(&key);
            Ok(CatalogOutcome::GoalRejected(goal_id.into()))
        }
    }

    fn save_question(&mut self, actor: &Actor, goal_id: &str, text: String) -> Result<CatalogOutcome, CatalogError> {
        let goal = self.goal(goal_id).ok_or_else(|| CatalogError::UnknownGoal(goal_id.into()))?;
        if goal.status != GoalStatus::Active {
            return Err(CatalogError::GoalNotActive(goal_id.into()));
        }
        if text.trim().is_empty() {
            return Err(CatalogError::Empty("question text"));
        }
        let id = self.next_question;
        self.next_question += 1;
        let question = Question {
            question_id: format!("q-{id}"),
            goal_id: goal_id.into(),
            text,
            owner: actor.user_id.clone(),
            indicators: Vec::new(),
        };
        self.questions.insert(id, question.clone());
        Ok(CatalogOutcome::Question(question))
    }

    fn question_key(&self, question_id: &str) -> Result<u64, CatalogError> {
        parse_id("q", question_id)
            .filter(|k| self.questions.contains_key(k))
            .ok_or_else(|| CatalogError::UnknownQuestion(question_id.into()))
    }

    fn indicator_key(&self, indicator_id: &str) -> Result<u64, CatalogError> {
        parse_id("ind", indicator_id)
            .filter(|k| self.indicators.contains_key(k))
            .ok_or_else(|| CatalogError::UnknownIndicator(indicator_id.into()))
    }

    fn editable_question(&mut self, actor: &Actor, question_id: &str) -> Result<&mut Question, CatalogError> {
        let key = self.question_key(question_id)?;
        let question = self.questions.get_mut(&key).expect("checked");
        if !actor.may_edit(&question.owner) {
            return Err(CatalogError::NotOwner(question_id.into()));
        }
        Ok(question)
    }

    /// Saved parts must exist and be basic indicators.
    fn check_parts(&self, spec: &IndicatorSpec) -> Result<(), CatalogError> {
        for id in spec.part_ids() {
            let record = self.indicator(id).ok_or_else(|| CatalogError::UnknownIndicator(id.into()))?;
            if record.kind != IndicatorKind::Basic {
                return Err(CatalogError::PartNotBasic(id.into()));
            }
        }
        Ok(())
    }

    fn insert_indicator(
        &mut self,
        actor: &Actor,
        at: Timestamp,
        spec: IndicatorSpec,
        copied_from: Option<String>,
    ) -> IndicatorRecord {
        let id = self.next_indicator;
        self.next_indicator += 1;
        let record = IndicatorRecord {
            indicator_id: format!("ind-{id}"),
            kind: spec.kind(),
            spec,
            owner: actor.user_id.clone(),
            created_at: at,
            copied_from,
        };
        self.indicators.insert(id, record.clone());
        record
    }

    fn update_indicator(&mut self, actor: &Actor, indicator_id: String, spec: IndicatorSpec) -> Result<CatalogOutcome, CatalogError> {
        let key = self.indicator_key(&indicator_id)?;
        let current = &self.indicators[&key];
        if !actor.may_edit(&current.owner) {
            return Err(CatalogError::NotOwner(indicator_id));
        }
        if current.kind != spec.kind() {
            return Err(CatalogError::KindChange {
                from: current.kind,
                to: spec.kind(),
            });
        }
        self.check_parts(&spec)?;
        if spec.part_ids().any(|p| p == indicator_id) {
            return Err(CatalogError::PartNotBasic(indicator_id));
        }
        if let IndicatorSpec::Basic(basic) = &spec {
            for dependent in self.dependents(&indicator_id) {
                if dependent.kind == IndicatorKind::Composite
                    && self.composite_methods(&dependent.spec, &indicator_id, &basic.method_id)
                {
                    return Err(CatalogError::BreaksComposite(dependent.indicator_id.clone()));
                }
            }
        }
        let record = self.indicators.get_mut(&key).expect("checked");
        record.spec = spec;
        Ok(CatalogOutcome::Indicator(record.clone()))
    }

    /// Whether the composite would mix methods if `changed` used `method_id`.
    fn composite_methods(&self, composite: &IndicatorSpec, changed: &str, method_id: &str) -> bool {
        let methods: Vec<String> = composite
            .parts()
            .iter()
            .filter_map(|part| match part {
                crate::indicator::PartRef::Saved(id) if id == changed => Some(method_id.to_string()),
                crate::indicator::PartRef::Saved(id) => self.resolve(id).map(|s| s.method_id),
                crate::indicator::PartRef::Inline(spec) => Some(spec.method_id.clone()),
            })
            .collect();
        methods.windows(2).any(|w| w[0] != w[1])
    }

    fn delete_indicator(&mut self, actor: &Actor, indicator_id: String) -> Result<CatalogOutcome, CatalogError> {
        let key = self.indicator_key(&indicator_id)?;
        if !actor.may_edit(&self.indicators[&key].owner) {
            return Err(CatalogError::NotOwner(indicator_id));
        }
        let used_by: Vec<String> = self
            .dependents(&indicator_id)
            .iter()
            .map(|r| r.indicator_id.clone())
            .collect();
        if !used_by.is_empty() {
            return Err(CatalogError::RestrictDelete { indicator_id, used_by });
        }
        self.indicators.remove(&key);
        for question in self.questions.values_mut() {
            question.indicators.retain(|i| *i != indicator_id);
        }
        Ok(CatalogOutcome::Deleted(indicator_id))
    }
}

impl PartResolver for Catalog {
    fn resolve(&self, indicator_id: &str) -> Option<BasicIndicatorSpec> {
        match &self.indicator(indicator_id)?.spec {
            IndicatorSpec::Basic(spec) => Some(spec.clone()),
            _ => None,
        }
    }
}
