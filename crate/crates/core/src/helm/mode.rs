//! Mode trees: a hierarchy of condition-gated nodes whose leaves carry the
//! behavior sets. Selection walks depth-first and takes the first leaf whose
//! whole ancestor chain is satisfied, so sibling order encodes priority.
//!
//! Conditions are a small closed predicate language over the observable game
//! state (flag possession, positions, headings, tag status, flag locations),
//! which keeps trees serializable and replays exact.

use super::behavior::{BehaviorKind, BehaviorSpec};
use super::HelmError;
use crate::field::FieldSpec;
use crate::state::{AgentState, GameState};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "if", deny_unknown_fields)]
pub enum Condition {
    Always,
    /// Self carries the opposing flag.
    HasFlag,
    /// Self is tagged.
    Tagged,
    /// Any untagged opponent stands in this agent's team zone.
    IntruderInOwnZone,
    /// Nearest untagged opponent within the given range.
    OpponentWithin { range: f64 },
    /// Self is inside its own team zone.
    InOwnZone,
    /// The opposing team's flag sits at its home point.
    OpponentFlagAtHome,
    Not { c: Box<Condition> },
    All { of: Vec<Condition> },
    Any { of: Vec<Condition> },
}

impl Condition {
    pub fn eval(&self, agent: &AgentState, world: &GameState, field: &FieldSpec) -> bool {
        match self {
            Condition::Always => true,
            Condition::HasFlag => agent.has_flag,
            Condition::Tagged => agent.tagged,
            Condition::IntruderInOwnZone => !world.intruders(agent.team, field).is_empty(),
            Condition::OpponentWithin { range } => world
                .nearest_untagged_opponent(agent.id)
                .map(|o| agent.position.dist(world.agents[o].position) <= *range)
                .unwrap_or(false),
            Condition::InOwnZone => field.in_zone(agent.team, agent.position),
            Condition::OpponentFlagAtHome => world.flag(agent.team.opponent()).at_home,
            Condition::Not { c } => !c.eval(agent, world, field),
            Condition::All { of } => of.iter().all(|c| c.eval(agent, world, field)),
            Condition::Any { of } => of.iter().any(|c| c.eval(agent, world, field)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeNode {
    pub name: String,
    pub condition: Condition,
    #[serde(default)]
    pub children: Vec<ModeNode>,
    #[serde(default)]
    pub behaviors: Vec<BehaviorSpec>,
}

impl ModeNode {
    pub fn leaf(name: &str, condition: Condition, behaviors: Vec<BehaviorSpec>) -> Self {
        ModeNode {
            name: name.to_string(),
            condition,
            children: Vec::new(),
            behaviors,
        }
    }

    pub fn branch(name: &str, condition: Condition, children: Vec<ModeNode>) -> Self {
        ModeNode {
            name: name.to_string(),
            condition,
            children,
            behaviors: Vec::new(),
        }
    }

    fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// True when this node's condition chain can never all be false at every
    /// leaf, i.e. some leaf is reachable under all-Always conditions.
    fn has_default_path(&self) -> bool {
        if self.condition != Condition::Always {
            return false;
        }
        if self.is_leaf() {
            return true;
        }
        self.children.iter().any(ModeNode::has_default_path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeTree {
    pub root: ModeNode,
}

impl ModeTree {
    pub fn new(root: ModeNode) -> Self {
        ModeTree { root }
    }

    /// Structural checks done once at load time: a leaf must be reachable
    /// regardless of game state, every leaf carries the two mandatory safety
    /// behaviors, and every behavior parameterization is valid.
    pub fn validate(&self) -> Result<(), String> {
        if !self.root.has_default_path() {
            return Err("mode tree has no unconditional default leaf".into());
        }
        let mut stack = vec![&self.root];
        while let Some(node) = stack.pop() {
            if node.is_leaf() {
                let mut has_op_region = false;
                let mut has_avoid = false;
                for b in &node.behaviors {
                    b.validate()
                        .map_err(|e| format!("leaf '{}': {e}", node.name))?;
                    match b.kind {
                        BehaviorKind::OpRegion { .. } => has_op_region = true,
                        BehaviorKind::AvoidCollision { .. } => has_avoid = true,
                        _ => {}
                    }
                }
                if !has_op_region || !has_avoid {
                    return Err(format!(
                        "leaf '{}' lacks the mandatory OpRegion/AvoidCollision pair",
                        node.name
                    ));
                }
            } else {
                stack.extend(node.children.iter());
            }
        }
        Ok(())
    }
}

/// First satisfied leaf in depth-first sibling order. Returns the slash-joined
/// mode path and a copy of the leaf's behavior set.
pub fn select_mode(
    tree: &ModeTree,
    agent: &AgentState,
    world: &GameState,
    field: &FieldSpec,
) -> Result<(String, Vec<BehaviorSpec>), HelmError> {
    fn walk(
        node: &ModeNode,
        prefix: &str,
        agent: &AgentState,
        world: &GameState,
        field: &FieldSpec,
    ) -> Option<(String, Vec<BehaviorSpec>)> {
        if !node.condition.eval(agent, world, field) {
            return None;
        }
        let path = if prefix.is_empty() {
            node.name.clone()
        } else {
            format!("{prefix}/{}", node.name)
        };
        if node.is_leaf() {
            return Some((path, node.behaviors.clone()));
        }
        node.children
            .iter()
            .find_map(|c| walk(c, &path, agent, world, field))
    }
    walk(&tree.root, "", agent, world, field).ok_or(HelmError::EmptyActiveSet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Team;
    use crate::geom::Vec2;
    use crate::state::{FlagState, Scores};

    fn safety(field: &FieldSpec) -> Vec<BehaviorSpec> {
        vec![
            BehaviorSpec::new(BehaviorKind::OpRegion { region: field.bounds() }, 300.0),
            BehaviorSpec::new(BehaviorKind::AvoidCollision { standoff: 5.0 }, 200.0),
        ]
    }

    fn with_task(field: &FieldSpec, task: BehaviorSpec) -> Vec<BehaviorSpec> {
        let mut set = safety(field);
        set.insert(0, task);
        set
    }

    fn sample_world(field: &FieldSpec) -> GameState {
        GameState {
            time: 0.0,
            step_index: 0,
            agents: vec![
                AgentState {
                    id: 0,
                    team: Team::Blue,
                    position: Vec2::new(20.0, 40.0),
                    heading: 90.0,
                    speed: 0.0,
                    has_flag: false,
                    tagged: false,
                    oob: false,
                },
                AgentState {
                    id: 1,
                    team: Team::Red,
                    position: Vec2::new(140.0, 40.0),
                    heading: 270.0,
                    speed: 0.0,
                    has_flag: false,
                    tagged: false,
                    oob: false,
                },
            ],
            flags: [
                FlagState {
                    team: Team::Blue,
                    position: field.blue_flag_home,
                    carrier: None,
                    at_home: true,
                },
                FlagState {
                    team: Team::Red,
                    position: field.red_flag_home,
                    carrier: None,
                    at_home: true,
                },
            ],
            scores: Scores::default(),
            event_history: Vec::new(),
        }
    }

    fn two_leaf_tree(field: &FieldSpec) -> ModeTree {
        ModeTree::new(ModeNode::branch(
            "root",
            Condition::Always,
            vec![
                ModeNode::leaf(
                    "defend",
                    Condition::IntruderInOwnZone,
                    with_task(
                        field,
                        BehaviorSpec::new(BehaviorKind::CutRange { target: 1 }, 100.0),
                    ),
                ),
                ModeNode::leaf(
                    "hold",
                    Condition::Always,
                    with_task(
                        field,
                        BehaviorSpec::new(
                            BehaviorKind::StationKeep { hold: Vec2::new(40.0, 40.0) },
                            50.0,
                        ),
                    ),
                ),
            ],
        ))
    }

    #[test]
    fn selects_first_satisfied_leaf() {
        let field = FieldSpec::default();
        let tree = two_leaf_tree(&field);
        tree.validate().unwrap();
        let mut world = sample_world(&field);

        let (path, set) = select_mode(&tree, &world.agents[0], &world, &field).unwrap();
        assert_eq!(path, "root/hold");
        assert!(set.iter().any(|b| matches!(b.kind, BehaviorKind::StationKeep { .. })));

        world.agents[1].position = Vec2::new(60.0, 40.0); // red intrudes into blue zone
        let (path, set) = select_mode(&tree, &world.agents[0], &world, &field).unwrap();
        assert_eq!(path, "root/defend");
        assert!(set.iter().any(|b| matches!(b.kind, BehaviorKind::CutRange { .. })));
    }

    #[test]
    fn tagged_intruder_does_not_trigger_defense() {
        let field = FieldSpec::default();
        let tree = two_leaf_tree(&field);
        let mut world = sample_world(&field);
        world.agents[1].position = Vec2::new(60.0, 40.0);
        world.agents[1].tagged = true;
        let (path, _) = select_mode(&tree, &world.agents[0], &world, &field).unwrap();
        assert_eq!(path, "root/hold");
    }

    #[test]
    fn validation_requires_default_leaf() {
        let field = FieldSpec::default();
        let tree = ModeTree::new(ModeNode::branch(
            "root",
            Condition::Always,
            vec![ModeNode::leaf(
                "defend",
                Condition::IntruderInOwnZone,
                with_task(
                    &field,
                    BehaviorSpec::new(BehaviorKind::CutRange { target: 1 }, 100.0),
                ),
            )],
        ));
        assert!(tree.validate().unwrap_err().contains("default"));
    }

    #[test]
    fn validation_requires_safety_pair() {
        let tree = ModeTree::new(ModeNode::leaf(
            "root",
            Condition::Always,
            vec![BehaviorSpec::new(
                BehaviorKind::Waypoint { target: Vec2::new(1.0, 1.0) },
                100.0,
            )],
        ));
        assert!(tree.validate().unwrap_err().contains("mandatory"));
    }

    #[test]
    fn condition_combinators() {
        let field = FieldSpec::default();
        let mut world = sample_world(&field);
        world.agents[0].has_flag = true;
        let a = &world.agents[0];
        assert!(Condition::HasFlag.eval(a, &world, &field));
        assert!(!Condition::Tagged.eval(a, &world, &field));
        assert!(Condition::Any {
            of: vec![Condition::HasFlag, Condition::Tagged]
        }
        .eval(a, &world, &field));
        assert!(!Condition::All {
            of: vec![Condition::HasFlag, Condition::Tagged]
        }
        .eval(a, &world, &field));
        assert!(Condition::Not { c: Box::new(Condition::Tagged) }.eval(a, &world, &field));
        assert!(Condition::InOwnZone.eval(a, &world, &field));
        assert!(Condition::OpponentFlagAtHome.eval(a, &world, &field));
        assert!(Condition::OpponentWithin { range: 130.0 }.eval(a, &world, &field));
        assert!(!Condition::OpponentWithin { range: 100.0 }.eval(a, &world, &field));
    }
}
