//! Canonical floor-plan data model.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{derive_geometry, M2_PER_PIXEL, RASTER_SIDE};
use crate::graph::RelationType;
use crate::mask::Mask;

/// Legend color classes. Room categories map many-to-one onto these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColorClass {
    LightKhaki,
    Orange,
    LightSalmon,
    LightCyan,
    OliveGreen,
    Violet,
    Plum,
    BrightYellow,
    Black,
    White,
}

impl ColorClass {
    /// Legend table order, which is also the classification tie-break order.
    pub const ALL: [ColorClass; 10] = [
        ColorClass::LightKhaki,
        ColorClass::Orange,
        ColorClass::LightSalmon,
        ColorClass::LightCyan,
        ColorClass::OliveGreen,
        ColorClass::Violet,
        ColorClass::Plum,
        ColorClass::BrightYellow,
        ColorClass::Black,
        ColorClass::White,
    ];

    /// The eight classes that denote rooms (black and white are structure).
    pub const ROOMS: [ColorClass; 8] = [
        ColorClass::LightKhaki,
        ColorClass::Orange,
        ColorClass::LightSalmon,
        ColorClass::LightCyan,
        ColorClass::OliveGreen,
        ColorClass::Violet,
        ColorClass::Plum,
        ColorClass::BrightYellow,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ColorClass> {
        Self::ALL.get(i).copied()
    }

    pub fn is_room(self) -> bool {
        !matches!(self, ColorClass::Black | ColorClass::White)
    }

    /// Category used when a room is recovered from a raster and only its
    /// color is known.
    pub fn canonical_category(self) -> Option<RoomCategory> {
        use ColorClass::*;
        Some(match self {
            LightKhaki => RoomCategory::LivingRoom,
            Orange => RoomCategory::MasterRoom,
            LightSalmon => RoomCategory::Kitchen,
            LightCyan => RoomCategory::Bathroom,
            OliveGreen => RoomCategory::Balcony,
            Violet => RoomCategory::DiningRoom,
            Plum => RoomCategory::Storage,
            BrightYellow => RoomCategory::CommonRoom,
            Black | White => return None,
        })
    }
}

/// Functional room categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RoomCategory {
    LivingRoom,
    MasterRoom,
    Kitchen,
    Bathroom,
    Balcony,
    DiningRoom,
    Storage,
    CommonRoom,
    SecondRoom,
    StudyRoom,
    ChildRoom,
    GuestRoom,
    Entrance,
    WallIn,
}

impl RoomCategory {
    pub const ALL: [RoomCategory; 14] = [
        RoomCategory::LivingRoom,
        RoomCategory::MasterRoom,
        RoomCategory::Kitchen,
        RoomCategory::Bathroom,
        RoomCategory::Balcony,
        RoomCategory::DiningRoom,
        RoomCategory::Storage,
        RoomCategory::CommonRoom,
        RoomCategory::SecondRoom,
        RoomCategory::StudyRoom,
        RoomCategory::ChildRoom,
        RoomCategory::GuestRoom,
        RoomCategory::Entrance,
        RoomCategory::WallIn,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<RoomCategory> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        use RoomCategory::*;
        match self {
            LivingRoom => "LivingRoom",
            MasterRoom => "MasterRoom",
            Kitchen => "Kitchen",
            Bathroom => "Bathroom",
            Balcony => "Balcony",
            DiningRoom => "DiningRoom",
            Storage => "Storage",
            CommonRoom => "CommonRoom",
            SecondRoom => "SecondRoom",
            StudyRoom => "StudyRoom",
            ChildRoom => "ChildRoom",
            GuestRoom => "GuestRoom",
            Entrance => "Entrance",
            WallIn => "WallIn",
        }
    }

    pub fn color_class(self) -> ColorClass {
        use RoomCategory::*;
        match self {
            LivingRoom | Entrance | WallIn => ColorClass::LightKhaki,
            MasterRoom => ColorClass::Orange,
            Kitchen => ColorClass::LightSalmon,
            Bathroom => ColorClass::LightCyan,
            Balcony => ColorClass::OliveGreen,
            DiningRoom => ColorClass::Violet,
            Storage => ColorClass::Plum,
            CommonRoom | SecondRoom | StudyRoom | ChildRoom | GuestRoom => ColorClass::BrightYellow,
        }
    }
}

impl fmt::Display for RoomCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown room category {0:?}")]
pub struct UnknownCategory(pub String);

impl FromStr for RoomCategory {
    type Err = UnknownCategory;

    /// Case-, hyphen-, underscore- and space-insensitive lookup.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| !matches!(c, '-' | '_' | ' ')).flat_map(char::to_lowercase).collect();
        RoomCategory::ALL
            .iter()
            .copied()
            .find(|c| c.name().to_lowercase() == key)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

/// Coarse location on the 3×3 compass grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Position {
    NorthWest,
    North,
    NorthEast,
    West,
    Center,
    East,
    SouthWest,
    South,
    SouthEast,
}

impl Position {
    /// Row-major over the grid, north row first.
    pub const GRID: [Position; 9] = [
        Position::NorthWest,
        Position::North,
        Position::NorthEast,
        Position::West,
        Position::Center,
        Position::East,
        Position::SouthWest,
        Position::South,
        Position::SouthEast,
    ];

    pub fn from_cell(row: usize, col: usize) -> Position {
        Self::GRID[row * 3 + col]
    }

    pub fn cell(self) -> (usize, usize) {
        let i = Self::GRID.iter().position(|&p| p == self).expect("in grid");
        (i / 3, i % 3)
    }

    /// Pixel center of this position's grid cell.
    pub fn cell_center_px(self) -> (f64, f64) {
        let (row, col) = self.cell();
        let side = RASTER_SIDE as f64 / 3.0;
        ((col as f64 + 0.5) * side, (row as f64 + 0.5) * side)
    }

    pub fn name(self) -> &'static str {
        use Position::*;
        match self {
            NorthWest => "northwest",
            North => "north",
            NorthEast => "northeast",
            West => "west",
            Center => "center",
            East => "east",
            SouthWest => "southwest",
            South => "south",
            SouthEast => "southeast",
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| !matches!(c, '-' | '_' | ' ')).flat_map(char::to_lowercase).collect();
        Position::GRID.iter().copied().find(|p| p.name() == key).ok_or_else(|| format!("unknown position {s:?}"))
    }
}

/// One room instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    pub idx: u32,
    pub category: RoomCategory,
    pub mask: Option<Mask>,
    pub area_m2: f64,
    pub width_m: f64,
    pub height_m: f64,
    pub position: Position,
    pub centroid_px: Option<(f64, f64)>,
}

impl Room {
    /// Room with geometry derived from its mask.
    pub fn from_mask(idx: u32, category: RoomCategory, mask: Mask) -> Result<Room, crate::geometry::EmptyMask> {
        let g = derive_geometry(&mask)?;
        Ok(Room {
            idx,
            category,
            area_m2: g.area_m2,
            width_m: g.width_m,
            height_m: g.height_m,
            position: crate::graph::position_of_centroid(g.centroid_px),
            centroid_px: Some(g.centroid_px),
            mask: Some(mask),
        })
    }

    /// Centroid when known, otherwise the center of the position cell.
    pub fn anchor_px(&self) -> (f64, f64) {
        self.centroid_px.unwrap_or_else(|| self.position.cell_center_px())
    }

    pub fn color_class(&self) -> ColorClass {
        self.category.color_class()
    }
}

/// A labeled relation between two rooms, expressed from `room1`'s side.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub room1: u32,
    pub room2: u32,
    pub relation: RelationType,
    pub text: String,
}

/// The canonical structured layout.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FloorPlan {
    pub outline: Option<Mask>,
    pub rooms: Vec<Room>,
    pub edges: Vec<Edge>,
    pub description: String,
}

/// A broken [`FloorPlan`] invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateIdx { idx: u32 },
    DanglingEdge { edge: usize, idx: u32 },
    SelfLoop { edge: usize },
    DuplicateEdge { edge: usize },
    NegativeArea { idx: u32 },
    EmptyRoomMask { idx: u32 },
    BadMaskSize { idx: Option<u32>, width: usize, height: usize },
    AreaMismatch { idx: u32, stored_m2: f64, derived_m2: f64 },
    RoomOutsideOutline { idx: u32, outside_fraction: f64 },
    RoomOverlap { a: u32, b: u32, ratio: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateIdx { idx } => write!(f, "room idx {idx} appears more than once"),
            DanglingEdge { edge, idx } => write!(f, "edge {edge} references missing room {idx}"),
            SelfLoop { edge } => write!(f, "edge {edge} connects a room to itself"),
            DuplicateEdge { edge } => write!(f, "edge {edge} duplicates an earlier room pair"),
            NegativeArea { idx } => write!(f, "room {idx} has negative area"),
            EmptyRoomMask { idx } => write!(f, "room {idx} has an empty mask"),
            BadMaskSize { idx: Some(i), width, height } => {
                write!(f, "room {i} mask is {width}x{height}, expected {RASTER_SIDE}x{RASTER_SIDE}")
            }
            BadMaskSize { idx: None, width, height } => {
                write!(f, "outline mask is {width}x{height}, expected {RASTER_SIDE}x{RASTER_SIDE}")
            }
            AreaMismatch { idx, stored_m2, derived_m2 } => {
                write!(f, "room {idx} area {stored_m2} differs from mask area {derived_m2}")
            }
            RoomOutsideOutline { idx, outside_fraction } => {
                write!(f, "room {idx} has {:.1}% of its pixels outside the outline", outside_fraction * 100.0)
            }
            RoomOverlap { a, b, ratio } => {
                write!(f, "rooms {a} and {b} overlap ({:.1}% of the smaller)", ratio * 100.0)
            }
        }
    }
}

pub const AREA_TOLERANCE_M2: f64 = 0.5;
pub const MAX_OUTSIDE_FRACTION: f64 = 0.01;
pub const MAX_OVERLAP_FRACTION: f64 = 0.01;

impl FloorPlan {
    pub fn room(&self, idx: u32) -> Option<&Room> {
        self.rooms.iter().find(|r| r.idx == idx)
    }

    /// Checks every structural invariant; an empty list means the plan is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for r in &self.rooms {
            if !seen.insert(r.idx) {
                out.push(Violation::DuplicateIdx { idx: r.idx });
            }
            if r.area_m2 < 0.0 {
                out.push(Violation::NegativeArea { idx: r.idx });
            }
        }

        let mut pairs = HashSet::new();
        for (e, edge) in self.edges.iter().enumerate() {
            for idx in [edge.room1, edge.room2] {
                if !seen.contains(&idx) {
                    out.push(Violation::DanglingEdge { edge: e, idx });
                }
            }
            if edge.room1 == edge.room2 {
                out.push(Violation::SelfLoop { edge: e });
            } else if !pairs.insert((edge.room1.min(edge.room2), edge.room1.max(edge.room2))) {
                out.push(Violation::DuplicateEdge { edge: e });
            }
        }

        if let Some(o) = &self.outline {
            if o.width() != RASTER_SIDE || o.height() != RASTER_SIDE {
                out.push(Violation::BadMaskSize { idx: None, width: o.width(), height: o.height() });
            }
        }

        let mut masked: Vec<(u32, &Mask, usize)> = Vec::new();
        for r in &self.rooms {
            let Some(m) = &r.mask else { continue };
            if m.width() != RASTER_SIDE || m.height() != RASTER_SIDE {
                out.push(Violation::BadMaskSize { idx: Some(r.idx), width: m.width(), height: m.height() });
                continue;
            }
            let n = m.count();
            if n == 0 {
                out.push(Violation::EmptyRoomMask { idx: r.idx });
                continue;
            }
            let derived = n as f64 * M2_PER_PIXEL;
            if (derived - r.area_m2).abs() > AREA_TOLERANCE_M2 {
                out.push(Violation::AreaMismatch { idx: r.idx, stored_m2: r.area_m2, derived_m2: derived });
            }
            if let Some(o) = self.outline.as_ref().filter(|o| o.same_shape(m)) {
                let outside = n - m.intersection_count(o);
                let frac = outside as f64 / n as f64;
                if frac > MAX_OUTSIDE_FRACTION {
                    out.push(Violation::RoomOutsideOutline { idx: r.idx, outside_fraction: frac });
                }
            }
            masked.push((r.idx, m, n));
        }
        for (i, &(a, ma, na)) in masked.iter().enumerate() {
            for &(b, mb, nb) in &masked[i + 1..] {
                let inter = ma.intersection_count(mb);
                let ratio = inter as f64 / na.min(nb) as f64;
                if ratio > MAX_OVERLAP_FRACTION {
                    out.push(Violation::RoomOverlap { a, b, ratio });
                }
            }
        }
        out
    }

    /// Map from room idx to its position in `rooms`.
    pub fn index_map(&self) -> HashMap<u32, usize> {
        self.rooms.iter().enumerate().map(|(i, r)| (r.idx, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_aliases() {
        assert_eq!("Secondroom".parse::<RoomCategory>().unwrap(), RoomCategory::SecondRoom);
        assert_eq!("second-room".parse::<RoomCategory>().unwrap(), RoomCategory::SecondRoom);
        assert_eq!("WALL_IN".parse::<RoomCategory>().unwrap(), RoomCategory::WallIn);
        assert!("Garage".parse::<RoomCategory>().is_err());
    }

    #[test]
    fn legend_many_to_one() {
        use RoomCategory::*;
        for c in [CommonRoom, SecondRoom, StudyRoom, ChildRoom, GuestRoom] {
            assert_eq!(c.color_class(), ColorClass::BrightYellow);
        }
        for c in [LivingRoom, Entrance, WallIn] {
            assert_eq!(c.color_class(), ColorClass::LightKhaki);
        }
        for class in ColorClass::ROOMS {
            assert_eq!(class.canonical_category().unwrap().color_class(), class);
        }
    }

    #[test]
    fn position_cells() {
        assert_eq!(Position::from_cell(0, 0), Position::NorthWest);
        assert_eq!(Position::from_cell(1, 1), Position::Center);
        assert_eq!(Position::SouthEast.cell(), (2, 2));
        assert_eq!("Center".parse::<Position>().unwrap(), Position::Center);
    }

    fn masked_room(idx: u32, mask: Mask) -> Room {
        Room::from_mask(idx, RoomCategory::Kitchen, mask).unwrap()
    }

    #[test]
    fn valid_plan_has_no_violations() {
        let plan = FloorPlan {
            outline: Some(Mask::rect(256, 256, 10, 10, 200, 200)),
            rooms: vec![
                masked_room(0, Mask::rect(256, 256, 10, 10, 100, 200)),
                masked_room(1, Mask::rect(256, 256, 110, 10, 100, 200)),
            ],
            edges: vec![Edge { room1: 0, room2: 1, relation: RelationType::LeftOf, text: String::new() }],
            description: String::new(),
        };
        assert!(plan.validate().is_empty());
    }

    #[test]
    fn identical_masks_overlap() {
        let m = Mask::rect(256, 256, 20, 20, 50, 50);
        let plan = FloorPlan { rooms: vec![masked_room(0, m.clone()), masked_room(1, m)], ..Default::default() };
        let v = plan.validate();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::RoomOverlap { a: 0, b: 1, ratio } if ratio == 1.0));
    }

    #[test]
    fn room_partly_outside_outline() {
        // 100 px wide room, 40 columns hang past the outline's right edge.
        let plan = FloorPlan {
            outline: Some(Mask::rect(256, 256, 0, 0, 60, 256)),
            rooms: vec![masked_room(0, Mask::rect(256, 256, 0, 0, 100, 10))],
            ..Default::default()
        };
        let v = plan.validate();
        assert_eq!(v.len(), 1);
        match v[0] {
            Violation::RoomOutsideOutline { idx: 0, outside_fraction } => {
                assert!((outside_fraction - 0.4).abs() < 1e-12)
            }
            ref other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_and_duplicate_indices() {
        let room = |idx| Room {
            idx,
            category: RoomCategory::Bathroom,
            mask: None,
            area_m2: 4.0,
            width_m: 2.0,
            height_m: 2.0,
            position: Position::West,
            centroid_px: None,
        };
        let plan = FloorPlan {
            rooms: vec![room(0), room(0)],
            edges: vec![Edge { room1: 0, room2: 7, relation: RelationType::Above, text: String::new() }],
            ..Default::default()
        };
        let v = plan.validate();
        assert!(v.contains(&Violation::DuplicateIdx { idx: 0 }));
        assert!(v.contains(&Violation::DanglingEdge { edge: 0, idx: 7 }));
    }

    #[test]
    fn area_mismatch_flagged() {
        let mut r = masked_room(0, Mask::rect(256, 256, 0, 0, 64, 128));
        r.area_m2 = 41.5;
        let plan = FloorPlan { rooms: vec![r], ..Default::default() };
        assert!(matches!(plan.validate()[0], Violation::AreaMismatch { idx: 0, .. }));
    }
}
