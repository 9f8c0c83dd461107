//! JSON form of a domain with its two preference profiles.
//!
//! Issues and constraints keep creation order; object keys are written in
//! lexicographic order so files diff cleanly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Clause, Constraint, Domain, DomainError, Issue, IssueKind, PreferenceProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    domain: Domain,
    profiles: [PreferenceProfile; 2],
}

impl DomainSpec {
    pub fn new(domain: Domain, profiles: [PreferenceProfile; 2]) -> Result<Self, DomainError> {
        for p in &profiles {
            if p.issue_count() != domain.issue_count() {
                return Err(DomainError::InvalidProfile(
                    "profile was built for a different domain".into(),
                ));
            }
        }
        Ok(Self { domain, profiles })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn profiles(&self) -> &[PreferenceProfile; 2] {
        &self.profiles
    }

    pub fn into_parts(self) -> (Domain, [PreferenceProfile; 2]) {
        (self.domain, self.profiles)
    }

    pub fn to_json_string(&self) -> String {
        let file = self.to_file();
        // Round-tripping through `Value` sorts object keys.
        let value = serde_json::to_value(&file).expect("domain file serializes");
        let mut out = serde_json::to_string_pretty(&value).expect("json value serializes");
        out.push('\n');
        out
    }

    pub fn from_json_str(s: &str) -> Result<Self, DomainError> {
        let file: DomainFile =
            serde_json::from_str(s).map_err(|e| DomainError::Format(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, DomainError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| DomainError::Format(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        fs::write(path, self.to_json_string())
    }

    fn to_file(&self) -> DomainFile {
        let issues = self
            .domain
            .issues()
            .iter()
            .map(|issue| match issue.kind() {
                IssueKind::NumericDiscrete { lo, hi, step } => IssueEntry {
                    key: issue.key().to_string(),
                    kind: "numeric-discrete".into(),
                    lo: Some(*lo),
                    hi: Some(*hi),
                    step: Some(*step),
                    values: None,
                },
                IssueKind::NumericContinuous { lo, hi } => IssueEntry {
                    key: issue.key().to_string(),
                    kind: "numeric-continuous".into(),
                    lo: Some(*lo),
                    hi: Some(*hi),
                    step: None,
                    values: None,
                },
                IssueKind::Categorical { values } => IssueEntry {
                    key: issue.key().to_string(),
                    kind: "categorical".into(),
                    lo: None,
                    hi: None,
                    step: None,
                    values: Some(values.clone()),
                },
            })
            .collect();
        let profiles = self
            .profiles
            .iter()
            .map(|p| ProfileEntry {
                reserve: p.reserve(),
                normalizer: p.normalizer(),
                constraints: p
                    .constraints()
                    .iter()
                    .map(|c| ConstraintEntry {
                        weight: c.weight,
                        clauses: c.clauses.iter().map(|cl| self.clause_entry(cl)).collect(),
                    })
                    .collect(),
            })
            .collect();
        DomainFile { issues, profiles }
    }

    fn clause_entry(&self, clause: &Clause) -> ClauseEntry {
        let issue = &self.domain.issues()[clause.issue()];
        match clause {
            Clause::Range { min, max, .. } => ClauseEntry {
                key: issue.key().to_string(),
                min: Some(*min),
                max: Some(*max),
                allowed: None,
            },
            Clause::Allowed { values, .. } => {
                let names = match issue.kind() {
                    IssueKind::Categorical { values: names } => {
                        values.iter().map(|v| names[*v].clone()).collect()
                    }
                    _ => Vec::new(),
                };
                ClauseEntry {
                    key: issue.key().to_string(),
                    min: None,
                    max: None,
                    allowed: Some(names),
                }
            }
        }
    }

    fn from_file(file: DomainFile) -> Result<Self, DomainError> {
        let issues = file
            .issues
            .into_iter()
            .map(|e| {
                let missing = |field: &str| {
                    DomainError::Format(format!("issue `{}` is missing `{field}`", e.key))
                };
                let kind = match e.kind.as_str() {
                    "numeric-discrete" => IssueKind::NumericDiscrete {
                        lo: e.lo.ok_or_else(|| missing("lo"))?,
                        hi: e.hi.ok_or_else(|| missing("hi"))?,
                        step: e.step.ok_or_else(|| missing("step"))?,
                    },
                    "numeric-continuous" => IssueKind::NumericContinuous {
                        lo: e.lo.ok_or_else(|| missing("lo"))?,
                        hi: e.hi.ok_or_else(|| missing("hi"))?,
                    },
                    "categorical" => IssueKind::Categorical {
                        values: e.values.clone().ok_or_else(|| missing("values"))?,
                    },
                    other => {
                        return Err(DomainError::Format(format!("unknown issue kind `{other}`")))
                    }
                };
                Issue::new(e.key, kind)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let domain = Domain::new(issues)?;
        if file.profiles.len() != 2 {
            return Err(DomainError::Format(format!(
                "expected 2 profiles, found {}",
                file.profiles.len()
            )));
        }
        let mut profiles = Vec::with_capacity(2);
        for p in file.profiles {
            let constraints = p
                .constraints
                .into_iter()
                .map(|c| {
                    let clauses = c
                        .clauses
                        .into_iter()
                        .map(|cl| clause_from_entry(&domain, cl))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Constraint {
                        clauses,
                        weight: c.weight,
                    })
                })
                .collect::<Result<Vec<_>, DomainError>>()?;
            profiles.push(PreferenceProfile::new(&domain, constraints, p.normalizer, p.reserve)?);
        }
        let profiles: [PreferenceProfile; 2] = profiles.try_into().expect("length checked");
        Self::new(domain, profiles)
    }
}

fn clause_from_entry(domain: &Domain, entry: ClauseEntry) -> Result<Clause, DomainError> {
    let issue = domain
        .issue_index(&entry.key)
        .ok_or_else(|| DomainError::UnknownIssue(entry.key.clone()))?;
    match (entry.min, entry.max, entry.allowed) {
        (Some(min), Some(max), None) => Ok(Clause::Range { issue, min, max }),
        (None, None, Some(allowed)) => {
            let IssueKind::Categorical { values } = domain.issues()[issue].kind() else {
                return Err(DomainError::Format(format!(
                    "`allowed` clause on numeric issue `{}`",
                    entry.key
                )));
            };
            let values = allowed
                .iter()
                .map(|name| {
                    values.iter().position(|v| v == name).ok_or_else(|| {
                        DomainError::Format(format!("unknown value `{name}` for `{}`", entry.key))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Clause::Allowed { issue, values })
        }
        _ => Err(DomainError::Format(format!(
            "clause on `{}` needs either min/max or allowed",
            entry.key
        ))),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    issues: Vec<IssueEntry>,
    profiles: Vec<ProfileEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IssueEntry {
    key: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileEntry {
    reserve: f64,
    constraints: Vec<ConstraintEntry>,
    normalizer: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintEntry {
    clauses: Vec<ClauseEntry>,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClauseEntry {
    key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    allowed: Option<Vec<String>>,
}
