//! Canonical JSON codec for floor plans.
//!
//! Field names follow the structured output schema: `rooms` (`idx`, `type`,
//! `area`, `width`, `height`, `position`), `edges` (`room1`, `room2`,
//! `relation`, `text`) and `description`. Emission is strict compact JSON
//! with numbers rounded to three decimals. Parsing also accepts the
//! single-quoted dictionary style some model outputs use.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::graph::RelationType;
use crate::model::{Edge, FloorPlan, Position, Room, RoomCategory, Violation};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanJsonError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("unknown room category {0:?}")]
    UnknownCategory(String),
}

fn schema(msg: impl Into<String>) -> PlanJsonError {
    PlanJsonError::SchemaViolation(msg.into())
}

/// Parses a canonical plan. Masks are absent in the result.
pub fn parse_canonical_json(text: &str) -> Result<FloorPlan, PlanJsonError> {
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(strict) => serde_json::from_str(&normalize_quotes(text))
            .map_err(|_| PlanJsonError::MalformedJson(strict.to_string()))?,
    };
    let obj = value.as_object().ok_or_else(|| schema("top level must be an object"))?;

    let rooms = field(obj, "rooms", "plan")?
        .as_array()
        .ok_or_else(|| schema("rooms must be an array"))?
        .iter()
        .enumerate()
        .map(|(i, v)| parse_room(i, v))
        .collect::<Result<Vec<_>, _>>()?;
    let edges = field(obj, "edges", "plan")?
        .as_array()
        .ok_or_else(|| schema("edges must be an array"))?
        .iter()
        .enumerate()
        .map(|(i, v)| parse_edge(i, v))
        .collect::<Result<Vec<_>, _>>()?;
    let description =
        field(obj, "description", "plan")?.as_str().ok_or_else(|| schema("description must be a string"))?.to_string();

    let plan = FloorPlan { outline: None, rooms, edges, description };
    for v in plan.validate() {
        match v {
            Violation::DuplicateIdx { .. } | Violation::DanglingEdge { .. } | Violation::SelfLoop { .. } => {
                return Err(schema(v.to_string()))
            }
            _ => {}
        }
    }
    Ok(plan)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a Value, PlanJsonError> {
    obj.get(key).ok_or_else(|| schema(format!("{ctx} is missing field {key:?}")))
}

fn as_number(v: &Value, ctx: &str, key: &str) -> Result<f64, PlanJsonError> {
    v.as_f64().ok_or_else(|| schema(format!("{ctx} field {key:?} must be a number")))
}

fn as_index(v: &Value, ctx: &str, key: &str) -> Result<u32, PlanJsonError> {
    v.as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| schema(format!("{ctx} field {key:?} must be a non-negative integer")))
}

fn parse_room(i: usize, v: &Value) -> Result<Room, PlanJsonError> {
    let ctx = format!("room {i}");
    let obj = v.as_object().ok_or_else(|| schema(format!("{ctx} must be an object")))?;
    let idx = as_index(field(obj, "idx", &ctx)?, &ctx, "idx")?;
    let type_name =
        field(obj, "type", &ctx)?.as_str().ok_or_else(|| schema(format!("{ctx} field \"type\" must be a string")))?;
    let category: RoomCategory =
        type_name.parse().map_err(|_| PlanJsonError::UnknownCategory(type_name.to_string()))?;
    let area_m2 = as_number(field(obj, "area", &ctx)?, &ctx, "area")?;
    let width_m = as_number(field(obj, "width", &ctx)?, &ctx, "width")?;
    let height_m = as_number(field(obj, "height", &ctx)?, &ctx, "height")?;
    let position: Position = field(obj, "position", &ctx)?
        .as_str()
        .ok_or_else(|| schema(format!("{ctx} field \"position\" must be a string")))?
        .parse()
        .map_err(|e: String| schema(format!("{ctx}: {e}")))?;
    Ok(Room { idx, category, mask: None, area_m2, width_m, height_m, position, centroid_px: None })
}

fn parse_edge(i: usize, v: &Value) -> Result<Edge, PlanJsonError> {
    let ctx = format!("edge {i}");
    let obj = v.as_object().ok_or_else(|| schema(format!("{ctx} must be an object")))?;
    let room1 = as_index(field(obj, "room1", &ctx)?, &ctx, "room1")?;
    let room2 = as_index(field(obj, "room2", &ctx)?, &ctx, "room2")?;
    let rel = field(obj, "relation", &ctx)?
        .as_str()
        .ok_or_else(|| schema(format!("{ctx} field \"relation\" must be a string")))?;
    let relation: RelationType = rel.parse().map_err(|_| schema(format!("{ctx} has unknown relation {rel:?}")))?;
    let text = match obj.get("text") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(schema(format!("{ctx} field \"text\" must be a string"))),
    };
    Ok(Edge { room1, room2, relation, text })
}

/// Rewrites single-quoted string literals as double-quoted ones.
fn normalize_quotes(text: &str) -> String {
    #[derive(PartialEq)]
    enum State {
        Normal,
        Double,
        Single,
    }
    let mut out = String::with_capacity(text.len());
    let mut state = State::Normal;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match state {
            State::Normal => match c {
                '"' => {
                    out.push('"');
                    state = State::Double;
                }
                '\'' => {
                    out.push('"');
                    state = State::Single;
                }
                _ => out.push(c),
            },
            State::Double => {
                out.push(c);
                if c == '\\' {
                    if let Some(n) = chars.next() {
                        out.push(n);
                    }
                } else if c == '"' {
                    state = State::Normal;
                }
            }
            State::Single => match c {
                '\\' => match chars.next() {
                    Some('\'') => out.push('\''),
                    Some(n) => {
                        out.push('\\');
                        out.push(n);
                    }
                    None => out.push('\\'),
                },
                '"' => out.push_str("\\\""),
                '\'' => {
                    out.push('"');
                    state = State::Normal;
                }
                _ => out.push(c),
            },
        }
    }
    out
}

#[derive(Serialize)]
struct PlanOut<'a> {
    rooms: Vec<RoomOut<'a>>,
    edges: Vec<EdgeOut<'a>>,
    description: &'a str,
}

#[derive(Serialize)]
struct RoomOut<'a> {
    idx: u32,
    #[serde(rename = "type")]
    kind: &'a str,
    area: f64,
    width: f64,
    height: f64,
    position: &'a str,
}

#[derive(Serialize)]
struct EdgeOut<'a> {
    room1: u32,
    room2: u32,
    relation: &'a str,
    text: &'a str,
}

pub(crate) fn round3(x: f64) -> f64 {
    let r = (x * 1000.0).round() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Serializes a plan as compact strict JSON.
pub fn emit_canonical_json(plan: &FloorPlan) -> String {
    let out = PlanOut {
        rooms: plan
            .rooms
            .iter()
            .map(|r| RoomOut {
                idx: r.idx,
                kind: r.category.name(),
                area: round3(r.area_m2),
                width: round3(r.width_m),
                height: round3(r.height_m),
                position: r.position.name(),
            })
            .collect(),
        edges: plan
            .edges
            .iter()
            .map(|e| EdgeOut { room1: e.room1, room2: e.room2, relation: e.relation.as_str(), text: &e.text })
            .collect(),
        description: &plan.description,
    };
    serde_json::to_string(&out).expect("plan serializes")
}

#[cfg(test)]
pub(crate) use tests::EXAMPLE;

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE: &str = r#"{
  'rooms': [
    {'idx': 0, 'type': 'LivingRoom', 'area': 33, 'width': 6, 'height': 9, 'position': 'east'},
    {'idx': 1, 'type': 'SecondRoom', 'area': 12, 'width': 3, 'height': 4, 'position': 'northwest'},
    {'idx': 2, 'type': 'MasterRoom', 'area': 12, 'width': 3, 'height': 5, 'position': 'southwest'},
    {'idx': 3, 'type': 'StudyRoom', 'area': 11, 'width': 3, 'height': 4, 'position': 'north'},
    {'idx': 4, 'type': 'Bathroom', 'area': 4, 'width': 2, 'height': 2, 'position': 'west'},
    {'idx': 5, 'type': 'Kitchen', 'area': 4, 'width': 2, 'height': 2, 'position': 'northeast'}
  ],
  'edges': [
    {'room1': 5, 'room2': 3, 'relation': 'right-of', 'text': 'Kitchen is right-of StudyRoom'},
    {'room1': 5, 'room2': 0, 'relation': 'above', 'text': 'Kitchen is above LivingRoom'},
    {'room1': 1, 'room2': 3, 'relation': 'left-of', 'text': 'SecondRoom is left-of StudyRoom'},
    {'room1': 1, 'room2': 4, 'relation': 'above', 'text': 'SecondRoom is above Bathroom'},
    {'room1': 4, 'room2': 2, 'relation': 'above', 'text': 'Bathroom is above MasterRoom'}
  ],
  'description': 'The floor plan centers around the spacious Living Room, with surrounding rooms arranged by clear spatial logic.'
}"#;

    #[test]
    fn example_plan_parses() {
        let plan = parse_canonical_json(EXAMPLE).unwrap();
        assert_eq!(plan.rooms.len(), 6);
        assert_eq!(plan.edges.len(), 5);
        assert_eq!(plan.rooms[0].category, RoomCategory::LivingRoom);
        assert_eq!(plan.rooms[0].area_m2, 33.0);
        assert_eq!(plan.rooms[5].position, Position::NorthEast);
        assert_eq!(plan.edges[0].relation, RelationType::RightOf);
    }

    #[test]
    fn example_round_trips() {
        let plan = parse_canonical_json(EXAMPLE).unwrap();
        let text = emit_canonical_json(&plan);
        assert!(text.starts_with(r#"{"rooms":[{"idx":0,"type":"LivingRoom","area":33.0"#));
        assert_eq!(parse_canonical_json(&text).unwrap(), plan);
    }

    #[test]
    fn empty_plan() {
        let plan = parse_canonical_json(r#"{"rooms":[],"edges":[],"description":""}"#).unwrap();
        assert_eq!(plan, FloorPlan::default());
        assert_eq!(emit_canonical_json(&plan), r#"{"rooms":[],"edges":[],"description":""}"#);
    }

    #[test]
    fn dangling_edge_is_schema_violation() {
        let text = r#"{"rooms":[
            {"idx":0,"type":"Kitchen","area":4,"width":2,"height":2,"position":"north"},
            {"idx":1,"type":"Bathroom","area":4,"width":2,"height":2,"position":"south"}],
            "edges":[{"room1":0,"room2":7,"relation":"above","text":""}],"description":""}"#;
        assert!(matches!(parse_canonical_json(text), Err(PlanJsonError::SchemaViolation(_))));
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(parse_canonical_json("{rooms"), Err(PlanJsonError::MalformedJson(_))));
        assert!(matches!(parse_canonical_json(r#"{"rooms":[],"edges":[]}"#), Err(PlanJsonError::SchemaViolation(_))));
        let bad_type = r#"{"rooms":[{"idx":0,"type":"Garage","area":4,"width":2,"height":2,"position":"north"}],"edges":[],"description":""}"#;
        assert_eq!(parse_canonical_json(bad_type), Err(PlanJsonError::UnknownCategory("Garage".into())));
        let bad_rel = r#"{"rooms":[
            {"idx":0,"type":"Kitchen","area":4,"width":2,"height":2,"position":"north"},
            {"idx":1,"type":"Bathroom","area":4,"width":2,"height":2,"position":"south"}],
            "edges":[{"room1":0,"room2":1,"relation":"next-to","text":""}],"description":""}"#;
        assert!(matches!(parse_canonical_json(bad_rel), Err(PlanJsonError::SchemaViolation(_))));
    }

    #[test]
    fn areas_rounded_to_three_decimals() {
        let mut plan = parse_canonical_json(EXAMPLE).unwrap();
        plan.rooms[0].area_m2 = 33.3333;
        let text = emit_canonical_json(&plan);
        assert!(text.contains(r#""area":33.333,"#), "{text}");
    }

    #[test]
    fn apostrophes_inside_single_quoted_strings() {
        let text = r#"{'rooms': [], 'edges': [], 'description': 'it\'s a "flat"'}"#;
        let plan = parse_canonical_json(text).unwrap();
        assert_eq!(plan.description, r#"it's a "flat""#);
    }
}
