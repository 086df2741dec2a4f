//! Synthetic course data with planted student behaviour groups.
//!
//! Students fall into three groups (low, medium, high activity). A group fixes
//! how many learning materials a student views per week and the points they
//! score on assignments, up to a small jitter. The gaps between groups are
//! more than ten times the spread inside a group on both axes, so clustering
//! views against average points recovers the groups exactly.

use std::collections::BTreeMap;

use lava_core::model::{LearningEvent, Scalar, Timestamp};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// 2019-04-01T00:00:00Z, a Monday.
pub const TERM_START: i64 = 1_554_076_800;
const WEEK: i64 = 7 * 86_400;

pub const GROUPS: [GroupProfile; 3] = [
    GroupProfile { name: "low", views_per_week: 1, points: 35 },
    GroupProfile { name: "medium", views_per_week: 4, points: 60 },
    GroupProfile { name: "high", views_per_week: 7, points: 85 },
];

/// Extra views per student are drawn from `0..=VIEW_JITTER`.
pub const VIEW_JITTER: u32 = 1;
/// Points per submission are drawn from `points..=points + POINT_JITTER`.
pub const POINT_JITTER: u32 = 2;

#[derive(Debug, Clone, Copy)]
pub struct GroupProfile {
    pub name: &'static str,
    pub views_per_week: u32,
    pub points: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub students: u32,
    pub materials: u32,
    pub assignments: u32,
    pub weeks: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { students: 50, materials: 20, assignments: 5, weeks: 12, seed: 7 }
    }
}

/// Planted group of every student, by user id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Truth {
    pub groups: BTreeMap<String, usize>,
}

const EXTENSIONS: [&str; 5] = ["pdf", "pptx", "mp4", "pdf", "docx"];

pub fn student_id(i: u32) -> String {
    format!("s{:04}", i + 1)
}

pub fn material_name(i: u32) -> String {
    format!("Lecture {:02}.{}", i + 1, EXTENSIONS[i as usize % EXTENSIONS.len()])
}

pub fn assignment_title(i: u32) -> String {
    format!("Assignment {}", i + 1)
}

struct Draft {
    user: String,
    at: i64,
    platform: &'static str,
    action: &'static str,
    category: &'static str,
    attributes: BTreeMap<String, Scalar>,
}

/// Generates the events (sorted by time, ids in that order) and the planted
/// groups. The same config always yields the same output.
pub fn generate(config: &SynthConfig) -> (Vec<LearningEvent>, Truth) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let weeks = i64::from(config.weeks.max(1));
    let mut groups: Vec<usize> = (0..config.students as usize).map(|i| i % GROUPS.len()).collect();
    groups.shuffle(&mut rng);

    let sizes: Vec<u32> = (0..config.materials).map(|_| rng.gen_range(20_000..5_000_000)).collect();
    // Popularity falls off with the material index, so top-N lists are not ties.
    let weights: Vec<f64> = (0..config.materials).map(|i| 1.0 / f64::from(i + 1).sqrt()).collect();
    let total_weight: f64 = weights.iter().sum();

    let mut drafts = Vec::new();
    let mut truth = Truth::default();
    for (i, &group) in groups.iter().enumerate() {
        let user = student_id(i as u32);
        truth.groups.insert(user.clone(), group);
        let profile = GROUPS[group];
        let views = profile.views_per_week * config.weeks.max(1) + rng.gen_range(0..=VIEW_JITTER);
        if config.materials > 0 {
            for _ in 0..views {
                let mut pick = rng.gen_range(0.0..total_weight);
                let mut material = 0;
                while material + 1 < weights.len() && pick >= weights[material] {
                    pick -= weights[material];
                    material += 1;
                }
                let m = material as u32;
                let at = TERM_START + rng.gen_range(0..weeks) * WEEK + rng.gen_range(0..WEEK);
                let name = material_name(m);
                let ext = EXTENSIONS[m as usize % EXTENSIONS.len()];
                drafts.push(Draft {
                    user: user.clone(),
                    at,
                    platform: if rng.gen_bool(0.2) { "mobile" } else { "web" },
                    action: "view",
                    category: "Learning Materials",
                    attributes: BTreeMap::from([
                        ("Name".into(), Scalar::text(name)),
                        ("File Extension".into(), Scalar::text(ext)),
                        ("Size (in Bytes)".into(), Scalar::Numeric(f64::from(sizes[m as usize]))),
                    ]),
                });
            }
        }
        for a in 0..config.assignments {
            let due_week = (i64::from(a) + 1) * weeks / (i64::from(config.assignments) + 1);
            let due = TERM_START + due_week.max(1) * WEEK;
            let points = profile.points + rng.gen_range(0..=POINT_JITTER);
            drafts.push(Draft {
                user: user.clone(),
                at: due - rng.gen_range(3_600..WEEK),
                platform: "web",
                action: "submit",
                category: "Assignments",
                attributes: BTreeMap::from([
                    ("Title".into(), Scalar::text(assignment_title(a))),
                    ("Total Marks".into(), Scalar::Numeric(100.0)),
                    ("Due Date".into(), Scalar::text(Timestamp::from_epoch_seconds(due).unwrap().to_iso())),
                    ("Points".into(), Scalar::Numeric(f64::from(points))),
                ]),
            });
        }
        // Some forum chatter that none of the reference indicators look at.
        for _ in 0..rng.gen_range(0..3) {
            drafts.push(Draft {
                user: user.clone(),
                at: TERM_START + rng.gen_range(0..weeks * WEEK),
                platform: "web",
                action: "post",
                category: "Discussion Forum",
                attributes: BTreeMap::from([
                    ("Title".into(), Scalar::text(format!("Thread {}", rng.gen_range(1..=10)))),
                    ("Replies".into(), Scalar::Numeric(f64::from(rng.gen_range(0..6u32)))),
                ]),
            });
        }
    }

    drafts.sort_by(|a, b| (a.at, &a.user).cmp(&(b.at, &b.user)));
    let events = drafts
        .into_iter()
        .enumerate()
        .map(|(n, d)| LearningEvent {
            event_id: format!("ev-{:07}", n + 1),
            user_id: d.user,
            timestamp: Timestamp::from_epoch_seconds(d.at).expect("term dates are in range"),
            source: "Moodle".into(),
            platform: d.platform.into(),
            action: d.action.into(),
            category: d.category.into(),
            attributes: d.attributes,
        })
        .collect();
    (events, truth)
}
