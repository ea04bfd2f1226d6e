//! The ten-way spatial relation vocabulary and its mask-based classifier.

use std::fmt;
use std::str::FromStr;

use crate::geometry::{derive_geometry, EmptyMask, RASTER_SIDE};
use crate::mask::Mask;
use crate::model::Position;

/// Spatial relation of one room with respect to another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationType {
    LeftAbove,
    LeftBelow,
    LeftOf,
    Above,
    Inside,
    Surrounding,
    Below,
    RightOf,
    RightAbove,
    RightBelow,
}

impl RelationType {
    /// Vocabulary order of the structured output schema.
    pub const ALL: [RelationType; 10] = [
        RelationType::LeftAbove,
        RelationType::LeftBelow,
        RelationType::LeftOf,
        RelationType::Above,
        RelationType::Inside,
        RelationType::Surrounding,
        RelationType::Below,
        RelationType::RightOf,
        RelationType::RightAbove,
        RelationType::RightBelow,
    ];

    pub fn as_str(self) -> &'static str {
        use RelationType::*;
        match self {
            LeftAbove => "left-above",
            LeftBelow => "left-below",
            LeftOf => "left-of",
            Above => "above",
            Inside => "inside",
            Surrounding => "surrounding",
            Below => "below",
            RightOf => "right-of",
            RightAbove => "right-above",
            RightBelow => "right-below",
        }
    }

    /// The same relation seen from the other room.
    pub fn inverse(self) -> RelationType {
        use RelationType::*;
        match self {
            LeftOf => RightOf,
            RightOf => LeftOf,
            Above => Below,
            Below => Above,
            LeftAbove => RightBelow,
            RightBelow => LeftAbove,
            LeftBelow => RightAbove,
            RightAbove => LeftBelow,
            Inside => Surrounding,
            Surrounding => Inside,
        }
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown relation {0:?}")]
pub struct UnknownRelation(pub String);

impl FromStr for RelationType {
    type Err = UnknownRelation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_lowercase().replace('_', "-");
        RelationType::ALL.iter().copied().find(|r| r.as_str() == key).ok_or_else(|| UnknownRelation(s.to_string()))
    }
}

/// Share of a mask that must lie in the other's filled region to count as
/// containment.
pub const CONTAINMENT_FRACTION: f64 = 0.95;

/// tan(22.5°): half-width of each 45° sector.
const SECTOR_TAN: f64 = std::f64::consts::SQRT_2 - 1.0;

/// Relation of room `a` with respect to room `b`.
///
/// Containment is tested first against the hole-filled other mask. Otherwise
/// the displacement from `a`'s centroid to `b`'s centroid picks one of eight
/// 45° sectors, in screen coordinates (y grows downward).
pub fn classify_relation(a: &Mask, b: &Mask) -> Result<RelationType, EmptyMask> {
    let ga = derive_geometry(a)?;
    let gb = derive_geometry(b)?;
    let (na, nb) = (a.count() as f64, b.count() as f64);
    if a.intersection_count(&b.fill_holes()) as f64 >= CONTAINMENT_FRACTION * na {
        return Ok(RelationType::Inside);
    }
    if b.intersection_count(&a.fill_holes()) as f64 >= CONTAINMENT_FRACTION * nb {
        return Ok(RelationType::Surrounding);
    }
    let dx = gb.centroid_px.0 - ga.centroid_px.0;
    let dy = gb.centroid_px.1 - ga.centroid_px.1;
    if dx == 0.0 && dy == 0.0 {
        return Ok(coincident(a, b, na, nb));
    }
    Ok(sector_relation(dx, dy))
}

/// Sector lookup for a nonzero displacement toward the other room.
/// Comparisons use absolute values so negating the displacement always
/// yields the inverse relation.
pub(crate) fn sector_relation(dx: f64, dy: f64) -> RelationType {
    use RelationType::*;
    let (ax, ay) = (dx.abs(), dy.abs());
    if ay <= SECTOR_TAN * ax {
        if dx > 0.0 {
            LeftOf
        } else {
            RightOf
        }
    } else if ax <= SECTOR_TAN * ay {
        if dy > 0.0 {
            Above
        } else {
            Below
        }
    } else {
        match (dx > 0.0, dy > 0.0) {
            (true, true) => LeftAbove,
            (true, false) => LeftBelow,
            (false, true) => RightAbove,
            (false, false) => RightBelow,
        }
    }
}

/// Neither contains the other but the centroids coincide: the larger room
/// surrounds, equal areas fall back to which mask starts first.
fn coincident(a: &Mask, b: &Mask, na: f64, nb: f64) -> RelationType {
    if na > nb {
        return RelationType::Surrounding;
    }
    if na < nb {
        return RelationType::Inside;
    }
    let first = |m: &Mask| m.bits().iter().position(|&v| v).unwrap_or(usize::MAX);
    if first(a) <= first(b) {
        RelationType::LeftOf
    } else {
        RelationType::RightOf
    }
}

/// Compass position of a centroid on the 3×3 grid.
pub fn position_of_centroid((x, y): (f64, f64)) -> Position {
    let side = RASTER_SIDE as f64;
    let band = |v: f64| {
        if v < side / 3.0 {
            0
        } else if v < 2.0 * side / 3.0 {
            1
        } else {
            2
        }
    };
    Position::from_cell(band(y), band(x))
}

/// Compass position of a nonempty mask.
pub fn classify_position(mask: &Mask) -> Result<Position, EmptyMask> {
    Ok(position_of_centroid(derive_geometry(mask)?.centroid_px))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square_at(cx: usize, cy: usize, half: usize) -> Mask {
        Mask::rect(256, 256, cx - half, cy - half, 2 * half, 2 * half)
    }

    #[test]
    fn parse_all_names() {
        for r in RelationType::ALL {
            assert_eq!(r.as_str().parse::<RelationType>().unwrap(), r);
            assert_eq!(r.inverse().inverse(), r);
        }
        assert!("next-to".parse::<RelationType>().is_err());
    }

    #[test]
    fn horizontal_displacement_is_left_of() {
        let a = square_at(50, 100, 10);
        let b = square_at(150, 100, 10);
        assert_eq!(classify_relation(&a, &b).unwrap(), RelationType::LeftOf);
        assert_eq!(classify_relation(&b, &a).unwrap(), RelationType::RightOf);
    }

    #[test]
    fn diagonal_is_left_above() {
        let a = square_at(50, 50, 10);
        let b = square_at(150, 150, 10);
        assert_eq!(classify_relation(&a, &b).unwrap(), RelationType::LeftAbove);
        assert_eq!(classify_relation(&b, &a).unwrap(), RelationType::RightBelow);
    }

    #[test]
    fn block_inside_region() {
        let outer = Mask::rect(256, 256, 50, 50, 100, 100);
        let inner = Mask::rect(256, 256, 95, 95, 10, 10);
        let ring = outer.and_not(&inner);
        assert_eq!(classify_relation(&inner, &ring).unwrap(), RelationType::Inside);
        assert_eq!(classify_relation(&ring, &inner).unwrap(), RelationType::Surrounding);
    }

    #[test]
    fn empty_mask_errors() {
        assert!(classify_relation(&Mask::new(256, 256), &square_at(50, 50, 5)).is_err());
        assert!(classify_position(&Mask::new(256, 256)).is_err());
    }

    #[test]
    fn positions() {
        assert_eq!(position_of_centroid((128.0, 128.0)), Position::Center);
        assert_eq!(position_of_centroid((30.0, 30.0)), Position::NorthWest);
        assert_eq!(position_of_centroid((128.0, 20.0)), Position::North);
        assert_eq!(position_of_centroid((250.0, 250.0)), Position::SouthEast);
        assert_eq!(classify_position(&square_at(128, 128, 4)).unwrap(), Position::Center);
    }

    proptest! {
        #[test]
        fn sectors_are_antisymmetric(dx in -300.0f64..300.0, dy in -300.0f64..300.0) {
            prop_assume!(dx != 0.0 || dy != 0.0);
            prop_assert_eq!(sector_relation(-dx, -dy), sector_relation(dx, dy).inverse());
        }

        #[test]
        fn relation_antisymmetric_on_rectangles(
            ax in 0usize..200, ay in 0usize..200, aw in 1usize..50, ah in 1usize..50,
            bx in 0usize..200, by in 0usize..200, bw in 1usize..50, bh in 1usize..50,
        ) {
            let a = Mask::rect(256, 256, ax, ay, aw, ah);
            let b = Mask::rect(256, 256, bx, by, bw, bh).and_not(&a);
            prop_assume!(!b.is_empty());
            let ab = classify_relation(&a, &b).unwrap();
            let ba = classify_relation(&b, &a).unwrap();
            prop_assert_eq!(ab, ba.inverse());
        }
    }
}
