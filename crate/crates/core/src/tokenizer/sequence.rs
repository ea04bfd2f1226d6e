//! Flat token streams and their text form.
//!
//! Stream grammar: `BEGIN outline{n²} (LABEL room{n²})* END`.

use std::fmt::Write;

use super::TokenizerError;
use crate::model::RoomCategory;

pub const LABEL_COUNT: usize = RoomCategory::ALL.len();
const BEGIN: u32 = 0;
const END: u32 = 1;
const FIRST_LABEL: u32 = 2;
const FIRST_CODE: u32 = FIRST_LABEL + LABEL_COUNT as u32;

const BEGIN_TEXT: &str = "<|plan|>";
const END_TEXT: &str = "<|/plan|>";

/// One decoded vocabulary entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VocabToken {
    Begin,
    End,
    Label(RoomCategory),
    Outline(u32),
    Room(u32),
}

/// Id layout: begin, end, the 14 labels, outline codes, then room codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vocabulary {
    k_outline: usize,
    k_room: usize,
}

impl Vocabulary {
    pub fn new(k_outline: usize, k_room: usize) -> Self {
        Self { k_outline, k_room }
    }

    pub fn len(&self) -> usize {
        FIRST_CODE as usize + self.k_outline + self.k_room
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, t: VocabToken) -> Result<u32, TokenizerError> {
        Ok(match t {
            VocabToken::Begin => BEGIN,
            VocabToken::End => END,
            VocabToken::Label(c) => FIRST_LABEL + c.index() as u32,
            VocabToken::Outline(k) if (k as usize) < self.k_outline => FIRST_CODE + k,
            VocabToken::Room(k) if (k as usize) < self.k_room => FIRST_CODE + self.k_outline as u32 + k,
            VocabToken::Outline(k) | VocabToken::Room(k) => return Err(TokenizerError::BadToken(k)),
        })
    }

    pub fn token(&self, id: u32) -> Result<VocabToken, TokenizerError> {
        let ko = self.k_outline as u32;
        Ok(match id {
            BEGIN => VocabToken::Begin,
            END => VocabToken::End,
            i if i < FIRST_CODE => VocabToken::Label(RoomCategory::ALL[(i - FIRST_LABEL) as usize]),
            i if i < FIRST_CODE + ko => VocabToken::Outline(i - FIRST_CODE),
            i if ((i - FIRST_CODE - ko) as usize) < self.k_room => VocabToken::Room(i - FIRST_CODE - ko),
            i => return Err(TokenizerError::BadToken(i)),
        })
    }

    pub fn text(t: VocabToken) -> String {
        match t {
            VocabToken::Begin => BEGIN_TEXT.into(),
            VocabToken::End => END_TEXT.into(),
            VocabToken::Label(c) => format!("<|lbl_{}|>", c.name()),
            VocabToken::Outline(k) => format!("<|o_{k}|>"),
            VocabToken::Room(k) => format!("<|r_{k}|>"),
        }
    }

    pub fn parse_text(s: &str) -> Result<VocabToken, TokenizerError> {
        let bad = || TokenizerError::UnparsableToken(s.to_string());
        match s {
            BEGIN_TEXT => return Ok(VocabToken::Begin),
            END_TEXT => return Ok(VocabToken::End),
            _ => {}
        }
        let body = s.strip_prefix("<|").and_then(|r| r.strip_suffix("|>")).ok_or_else(bad)?;
        let code = |digits: &str| {
            if digits.is_empty()
                || !digits.bytes().all(|b| b.is_ascii_digit())
                || (digits.len() > 1 && digits.starts_with('0'))
            {
                return Err(bad());
            }
            digits.parse::<u32>().map_err(|_| bad())
        };
        if let Some(name) = body.strip_prefix("lbl_") {
            RoomCategory::ALL.iter().find(|c| c.name() == name).map(|&c| VocabToken::Label(c)).ok_or_else(bad)
        } else if let Some(d) = body.strip_prefix("o_") {
            code(d).map(VocabToken::Outline)
        } else if let Some(d) = body.strip_prefix("r_") {
            code(d).map(VocabToken::Room)
        } else {
            Err(bad())
        }
    }
}

/// Outline ids followed by labeled room groups, all of length `n²`.
/// Ids here are codebook indices, not vocabulary ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    n: usize,
    outline: Vec<u32>,
    rooms: Vec<(RoomCategory, Vec<u32>)>,
}

impl TokenSequence {
    pub fn new(n: usize, outline: Vec<u32>, rooms: Vec<(RoomCategory, Vec<u32>)>) -> Result<Self, TokenizerError> {
        let m = n * n;
        if n == 0 || outline.len() != m {
            return Err(TokenizerError::LengthMismatch { expected: m, got: outline.len() });
        }
        if let Some((_, ids)) = rooms.iter().find(|(_, ids)| ids.len() != m) {
            return Err(TokenizerError::LengthMismatch { expected: m, got: ids.len() });
        }
        Ok(Self { n, outline, rooms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn outline(&self) -> &[u32] {
        &self.outline
    }

    pub fn rooms(&self) -> &[(RoomCategory, Vec<u32>)] {
        &self.rooms
    }

    /// `2 + n² + N·(1 + n²)`.
    pub fn stream_len(&self) -> usize {
        let m = self.n * self.n;
        2 + m + self.rooms.len() * (1 + m)
    }

    /// Flat vocabulary-id stream.
    pub fn to_stream(&self, vocab: &Vocabulary) -> Result<Vec<u32>, TokenizerError> {
        let mut out = Vec::with_capacity(self.stream_len());
        out.push(vocab.id(VocabToken::Begin)?);
        for &k in &self.outline {
            out.push(vocab.id(VocabToken::Outline(k))?);
        }
        for (label, ids) in &self.rooms {
            out.push(vocab.id(VocabToken::Label(*label))?);
            for &k in ids {
                out.push(vocab.id(VocabToken::Room(k))?);
            }
        }
        out.push(vocab.id(VocabToken::End)?);
        Ok(out)
    }

    /// Tokens concatenated without separators.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.stream_len() * 8);
        s.push_str(BEGIN_TEXT);
        for &k in &self.outline {
            write!(s, "<|o_{k}|>").expect("string write");
        }
        for (label, ids) in &self.rooms {
            s.push_str(&Vocabulary::text(VocabToken::Label(*label)));
            for &k in ids {
                write!(s, "<|r_{k}|>").expect("string write");
            }
        }
        s.push_str(END_TEXT);
        s
    }

    /// Inverse of [`to_text`](Self::to_text); the grid side is inferred from
    /// the number of outline tokens.
    pub fn from_text(text: &str) -> Result<Self, TokenizerError> {
        let mut tokens = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let end = rest.find("|>").ok_or_else(|| TokenizerError::UnparsableToken(rest.to_string()))?;
            tokens.push(Vocabulary::parse_text(&rest[..end + 2])?);
            rest = &rest[end + 2..];
        }
        if tokens.first() != Some(&VocabToken::Begin) || tokens.last() != Some(&VocabToken::End) || tokens.len() < 2 {
            return Err(TokenizerError::MissingMarker);
        }
        let body = &tokens[1..tokens.len() - 1];
        let m = body.iter().take_while(|t| matches!(t, VocabToken::Outline(_))).count();
        let n = (m as f64).sqrt().round() as usize;
        if n == 0 || n * n != m {
            return Err(TokenizerError::TruncatedSequence);
        }
        let outline =
            body[..m].iter().map(|t| if let VocabToken::Outline(k) = t { *k } else { unreachable!() }).collect();
        let mut rooms = Vec::new();
        let mut groups = &body[m..];
        while let Some((head, tail)) = groups.split_first() {
            let VocabToken::Label(label) = *head else {
                return Err(TokenizerError::UnparsableToken(Vocabulary::text(*head)));
            };
            if tail.len() < m {
                return Err(TokenizerError::TruncatedSequence);
            }
            let ids = tail[..m]
                .iter()
                .map(|t| match t {
                    VocabToken::Room(k) => Ok(*k),
                    other => Err(TokenizerError::UnparsableToken(Vocabulary::text(*other))),
                })
                .collect::<Result<_, _>>()?;
            rooms.push((label, ids));
            groups = &tail[m..];
        }
        Self::new(n, outline, rooms)
    }
}

/// Splits a flat id stream produced with grid side `n`.
pub fn parse_sequence(stream: &[u32], vocab: &Vocabulary, n: usize) -> Result<TokenSequence, TokenizerError> {
    let m = n * n;
    let (Some(&first), Some(&last)) = (stream.first(), stream.last()) else {
        return Err(TokenizerError::MissingMarker);
    };
    if stream.len() < 2 || vocab.token(first)? != VocabToken::Begin || vocab.token(last)? != VocabToken::End {
        return Err(TokenizerError::MissingMarker);
    }
    let body = &stream[1..stream.len() - 1];
    if body.len() < m {
        return Err(TokenizerError::TruncatedSequence);
    }
    let code = |id: u32, room: bool| match (vocab.token(id)?, room) {
        (VocabToken::Outline(k), false) | (VocabToken::Room(k), true) => Ok(k),
        _ => Err(TokenizerError::BadToken(id)),
    };
    let outline = body[..m].iter().map(|&id| code(id, false)).collect::<Result<_, _>>()?;
    let mut rooms = Vec::new();
    let mut rest = &body[m..];
    while let Some((&head, tail)) = rest.split_first() {
        let VocabToken::Label(label) = vocab.token(head)? else {
            return Err(TokenizerError::UnknownLabel(head));
        };
        if tail.len() < m {
            return Err(TokenizerError::TruncatedSequence);
        }
        let ids = tail[..m].iter().map(|&id| code(id, true)).collect::<Result<_, _>>()?;
        rooms.push((label, ids));
        rest = &tail[m..];
    }
    TokenSequence::new(n, outline, rooms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(n: usize, labels: &[RoomCategory]) -> TokenSequence {
        let m = n * n;
        TokenSequence::new(
            n,
            (0..m as u32).map(|i| i % 7).collect(),
            labels
                .iter()
                .enumerate()
                .map(|(r, &l)| (l, (0..m as u32).map(|i| (i + r as u32) % 11).collect()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_plan_stream() {
        let v = Vocabulary::new(256, 256);
        let s = seq(8, &[]);
        let stream = s.to_stream(&v).unwrap();
        assert_eq!(stream.len(), 66);
        assert_eq!((stream[0], stream[65]), (0, 1));
        let text = s.to_text();
        assert!(text.starts_with("<|plan|><|o_0|>") && text.ends_with("<|/plan|>"));
        assert_eq!(text.matches("<|o_").count(), 64);
    }

    #[test]
    fn two_rooms_length_196() {
        let v = Vocabulary::new(256, 256);
        let s = seq(8, &[RoomCategory::Kitchen, RoomCategory::Bathroom]);
        assert_eq!(s.to_stream(&v).unwrap().len(), 196);
        assert_eq!(parse_sequence(&s.to_stream(&v).unwrap(), &v, 8).unwrap(), s);
    }

    #[test]
    fn label_text_lookup() {
        let v = Vocabulary::new(4, 4);
        assert_eq!(Vocabulary::parse_text("<|lbl_Kitchen|>").unwrap(), VocabToken::Label(RoomCategory::Kitchen));
        let id = v.id(VocabToken::Label(RoomCategory::Kitchen)).unwrap();
        assert_eq!(v.token(id).unwrap(), VocabToken::Label(RoomCategory::Kitchen));
        assert_eq!(Vocabulary::text(v.token(id).unwrap()), "<|lbl_Kitchen|>");
    }

    #[test]
    fn vocabulary_is_injective() {
        let v = Vocabulary::new(5, 3);
        let mut texts = std::collections::HashSet::new();
        for id in 0..v.len() as u32 {
            let t = v.token(id).unwrap();
            assert_eq!(v.id(t).unwrap(), id);
            assert!(texts.insert(Vocabulary::text(t)));
        }
        assert!(v.token(v.len() as u32).is_err());
        assert!(v.id(VocabToken::Room(3)).is_err());
    }

    #[test]
    fn grammar_errors() {
        let v = Vocabulary::new(16, 16);
        let s = seq(8, &[RoomCategory::Kitchen]);
        let mut stream = s.to_stream(&v).unwrap();
        // label followed by only 63 ids
        let mut cut = stream.clone();
        cut.remove(cut.len() - 2);
        assert_eq!(parse_sequence(&cut, &v, 8), Err(TokenizerError::TruncatedSequence));
        stream.pop();
        assert_eq!(parse_sequence(&stream, &v, 8), Err(TokenizerError::MissingMarker));
        let mut wrong = s.to_stream(&v).unwrap();
        wrong[65] = v.id(VocabToken::Room(0)).unwrap();
        assert_eq!(parse_sequence(&wrong, &v, 8), Err(TokenizerError::UnknownLabel(wrong[65])));
        assert_eq!(parse_sequence(&[], &v, 8), Err(TokenizerError::MissingMarker));
    }

    #[test]
    fn text_errors() {
        assert_eq!(TokenSequence::from_text("<|o_1|>"), Err(TokenizerError::MissingMarker));
        assert!(matches!(
            TokenSequence::from_text("<|plan|><|x_1|><|/plan|>"),
            Err(TokenizerError::UnparsableToken(_))
        ));
        assert!(matches!(
            TokenSequence::from_text("<|plan|><|o_01|><|/plan|>"),
            Err(TokenizerError::UnparsableToken(_))
        ));
        let three = "<|plan|><|o_1|><|o_1|><|o_1|><|/plan|>";
        assert_eq!(TokenSequence::from_text(three), Err(TokenizerError::TruncatedSequence));
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(
            TokenSequence::new(2, vec![0; 4], vec![(RoomCategory::Storage, vec![0; 3])]),
            Err(TokenizerError::LengthMismatch { expected: 4, got: 3 })
        );
    }

    fn arb_seq() -> impl Strategy<Value = TokenSequence> {
        (prop::sample::select(vec![1usize, 2, 4, 8]), 0usize..6).prop_flat_map(|(n, rooms)| {
            let m = n * n;
            (
                prop::collection::vec(0u32..256, m),
                prop::collection::vec((0usize..LABEL_COUNT, prop::collection::vec(0u32..256, m)), rooms),
            )
                .prop_map(move |(o, r)| {
                    TokenSequence::new(n, o, r.into_iter().map(|(l, ids)| (RoomCategory::ALL[l], ids)).collect())
                        .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn stream_and_text_round_trip(s in arb_seq()) {
            let v = Vocabulary::new(256, 256);
            let stream = s.to_stream(&v).unwrap();
            prop_assert_eq!(stream.len(), s.stream_len());
            prop_assert_eq!(&parse_sequence(&stream, &v, s.n()).unwrap(), &s);
            prop_assert_eq!(&TokenSequence::from_text(&s.to_text()).unwrap(), &s);
        }
    }
}
