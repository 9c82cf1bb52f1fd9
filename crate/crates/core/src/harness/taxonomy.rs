//! Test classification along level, fidelity and complexity, plus the
//! operational challenges each test exercises.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TestLevel {
    Unit,
    Integration,
    System,
    Acceptance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Fidelity {
    /// Software in the loop; the only fidelity executed here.
    Sil,
    /// Hardware in the loop.
    Hil,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Complexity {
    Simple,
    Moderate,
    Edge,
}

impl TestLevel {
    pub const ALL: [TestLevel; 4] = [
        TestLevel::Unit,
        TestLevel::Integration,
        TestLevel::System,
        TestLevel::Acceptance,
    ];
}

impl Fidelity {
    pub const ALL: [Fidelity; 3] = [Fidelity::Sil, Fidelity::Hil, Fidelity::Real];
}

impl Complexity {
    pub const ALL: [Complexity; 3] = [Complexity::Simple, Complexity::Moderate, Complexity::Edge];
}

/// Operational challenge classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Challenge {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
}

impl Challenge {
    pub const ALL: [Challenge; 8] = [
        Challenge::C1,
        Challenge::C2,
        Challenge::C3,
        Challenge::C4,
        Challenge::C5,
        Challenge::C6,
        Challenge::C7,
        Challenge::C8,
    ];

    pub fn description(self) -> &'static str {
        match self {
            Challenge::C1 => "terrain obstacles",
            Challenge::C2 => "ground-distance inconsistency",
            Challenge::C3 => "geolocation error",
            Challenge::C4 => "GPS error",
            Challenge::C5 => "gimbal sensing",
            Challenge::C6 => "visual detection",
            Challenge::C7 => "resources and timing",
            Challenge::C8 => "situational awareness",
        }
    }
}

impl fmt::Display for Challenge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestTag {
    pub level: TestLevel,
    pub fidelity: Fidelity,
    pub complexity: Complexity,
    pub challenges: BTreeSet<Challenge>,
}

impl TestTag {
    pub fn new(level: TestLevel, complexity: Complexity, challenges: &[Challenge]) -> Self {
        Self {
            level,
            fidelity: Fidelity::Sil,
            complexity,
            challenges: challenges.iter().copied().collect(),
        }
    }

    pub fn with_fidelity(mut self, fidelity: Fidelity) -> Self {
        self.fidelity = fidelity;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub name: String,
    pub tag: TestTag,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub level: TestLevel,
    pub fidelity: Fidelity,
    pub complexity: Complexity,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyReport {
    /// Every level x fidelity x complexity combination, in enum order.
    pub matrix: Vec<MatrixCell>,
    /// Challenges with at least one passing test.
    pub covered: Vec<Challenge>,
    pub uncovered: Vec<Challenge>,
    pub total_passed: usize,
    pub total_failed: usize,
}

impl TaxonomyReport {
    pub fn cell(&self, level: TestLevel, fidelity: Fidelity, complexity: Complexity) -> &MatrixCell {
        self.matrix
            .iter()
            .find(|c| c.level == level && c.fidelity == fidelity && c.complexity == complexity)
            .expect("matrix holds every combination")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:<5} {:<9} {:>6} {:>6}",
            "level", "fid", "cplx", "pass", "fail"
        );
        for c in self.matrix.iter().filter(|c| c.passed + c.failed > 0) {
            let _ = writeln!(
                out,
                "{:<12} {:<5} {:<9} {:>6} {:>6}",
                format!("{:?}", c.level).to_uppercase(),
                format!("{:?}", c.fidelity).to_uppercase(),
                format!("{:?}", c.complexity).to_uppercase(),
                c.passed,
                c.failed
            );
        }
        let _ = writeln!(out, "total: {} passed, {} failed", self.total_passed, self.total_failed);
        for ch in Challenge::ALL {
            let mark = if self.covered.contains(&ch) {
                "covered"
            } else {
                "UNCOVERED"
            };
            let _ = writeln!(out, "{ch} {:<30} {mark}", ch.description());
        }
        out
    }
}

pub fn taxonomy_report(results: &[TestOutcome]) -> TaxonomyReport {
    let mut matrix = Vec::new();
    for level in TestLevel::ALL {
        for fidelity in Fidelity::ALL {
            for complexity in Complexity::ALL {
                matrix.push(MatrixCell {
                    level,
                    fidelity,
                    complexity,
                    passed: 0,
                    failed: 0,
                });
            }
        }
    }
    let mut covered = BTreeSet::new();
    for r in results {
        let cell = matrix
            .iter_mut()
            .find(|c| c.level == r.tag.level && c.fidelity == r.tag.fidelity && c.complexity == r.tag.complexity)
            .expect("matrix holds every combination");
        if r.passed {
            cell.passed += 1;
            covered.extend(r.tag.challenges.iter().copied());
        } else {
            cell.failed += 1;
        }
    }
    let total_passed = results.iter().filter(|r| r.passed).count();
    TaxonomyReport {
        matrix,
        uncovered: Challenge::ALL.into_iter().filter(|c| !covered.contains(c)).collect(),
        covered: covered.into_iter().collect(),
        total_passed,
        total_failed: results.len() - total_passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_zero_matrix() {
        let r = taxonomy_report(&[]);
        assert_eq!(r.matrix.len(), 36);
        assert!(r.matrix.iter().all(|c| c.passed == 0 && c.failed == 0));
        assert!(r.covered.is_empty());
        assert_eq!(r.uncovered.len(), 8);
    }

    #[test]
    fn single_pass_lands_in_its_cell() {
        let t = TestOutcome {
            name: "x".into(),
            tag: TestTag::new(TestLevel::Unit, Complexity::Simple, &[Challenge::C3]),
            passed: true,
            detail: None,
        };
        let r = taxonomy_report(&[t]);
        assert_eq!(r.cell(TestLevel::Unit, Fidelity::Sil, Complexity::Simple).passed, 1);
        assert_eq!(r.covered, vec![Challenge::C3]);
        assert!(r.to_table().contains("C3 geolocation error"));
    }

    #[test]
    fn failures_do_not_cover() {
        let t = TestOutcome {
            name: "x".into(),
            tag: TestTag::new(TestLevel::System, Complexity::Edge, &[Challenge::C7]).with_fidelity(Fidelity::Hil),
            passed: false,
            detail: None,
        };
        let r = taxonomy_report(&[t]);
        assert_eq!(r.cell(TestLevel::System, Fidelity::Hil, Complexity::Edge).failed, 1);
        assert!(r.covered.is_empty());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"HIL\""));
    }
}
