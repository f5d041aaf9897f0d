//! The seven moves, their inverses, invariance metadata and replayable traces.

mod apply;
mod enumerate;
mod paths;
mod script;
mod transport;

use std::fmt;

use crate::graph::{strip_comment, Graph, Multiplicity};

pub use apply::{apply_move, check_preconditions, invert, redistribute_via_in_split};
pub use enumerate::{enumerate_applicable, EnumCaps};
pub use paths::return_path_count;
pub use transport::{invert_trace, transport_trace};

/// Three-bit relation word `xyz`, ordered bitwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation(u8);

impl Relation {
    pub const fn new(x: bool, y: bool, z: bool) -> Relation {
        Relation(((x as u8) << 2) | ((y as u8) << 1) | z as u8)
    }

    pub const fn from_bits(bits: u8) -> Relation {
        Relation(bits & 7)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn x(self) -> bool {
        self.0 & 4 != 0
    }

    pub fn y(self) -> bool {
        self.0 & 2 != 0
    }

    pub fn z(self) -> bool {
        self.0 & 1 != 0
    }

    /// Bitwise order: `self ≤ other` iff every bit set in `self` is set in `other`.
    pub fn le(self, other: Relation) -> bool {
        self.0 & !other.0 == 0
    }

    /// The six words for which the move registry is expected to generate the relation.
    pub fn is_registered(self) -> bool {
        !matches!(self.0, 0b010 | 0b110)
    }

    pub fn all() -> impl Iterator<Item = Relation> {
        (0..8).map(Relation)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.x() as u8, self.y() as u8, self.z() as u8)
    }
}

impl std::str::FromStr for Relation {
    type Err = String;
    fn from_str(s: &str) -> Result<Relation, String> {
        let b = s.as_bytes();
        if b.len() != 3 || b.iter().any(|c| *c != b'0' && *c != b'1') {
            return Err(format!("relation must be three binary digits, got `{s}`"));
        }
        Ok(Relation::new(b[0] == b'1', b[1] == b'1', b[2] == b'1'))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    O,
    IMinus,
    IPlus,
    RPlus,
    S,
    CPlus,
    PPlus,
}

impl MoveKind {
    pub const ALL: [MoveKind; 7] = [
        MoveKind::O,
        MoveKind::IMinus,
        MoveKind::IPlus,
        MoveKind::RPlus,
        MoveKind::S,
        MoveKind::CPlus,
        MoveKind::PPlus,
    ];

    /// Strongest relation the move is known to preserve.
    pub fn invariance_class(self) -> Relation {
        let bits = match self {
            MoveKind::O | MoveKind::IPlus => 0b111,
            MoveKind::IMinus => 0b011,
            MoveKind::RPlus => 0b101,
            MoveKind::S => 0b001,
            MoveKind::CPlus | MoveKind::PPlus => 0b100,
        };
        Relation(bits)
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveKind::O => "O",
            MoveKind::IMinus => "I-",
            MoveKind::IPlus => "I+",
            MoveKind::RPlus => "R+",
            MoveKind::S => "S",
            MoveKind::CPlus => "C+",
            MoveKind::PPlus => "P+",
        })
    }
}

pub fn invariance_class(kind: MoveKind) -> Relation {
    kind.invariance_class()
}

/// Moves whose class dominates `r`; the flag is set for the two words outside the registry.
pub fn allowed_moves(r: Relation) -> (Vec<MoveKind>, bool) {
    let kinds = MoveKind::ALL.into_iter().filter(|k| r.le(k.invariance_class())).collect();
    (kinds, !r.is_registered())
}

/// Edge profile: `(vertex, multiplicity)` pairs in written order.
pub type Profile = Vec<(String, Multiplicity)>;

/// One move instance. Forward and inverse directions of each kind are separate variants.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MovePlan {
    /// Out-split `w` into `w#1..w#n`, part `j` giving the out-edges of `w#j`.
    OutSplit {
        w: String,
        parts: Vec<Profile>,
    },
    /// Out-amalgamate `group` into a single vertex `w`.
    OutMerge {
        w: String,
        group: Vec<String>,
    },
    /// In-split `w` into `w#1..w#n`, part `j` giving the in-edges of `w#j`.
    InSplit {
        w: String,
        parts: Vec<Profile>,
    },
    /// In-amalgamate `group` (identical rows) into `w`.
    InMerge {
        w: String,
        group: Vec<String>,
    },
    /// Redistribute the pasts of a group with identical rows: each listed outside
    /// vertex splits its total across the group, and the group's common internal
    /// row becomes `within`.
    Redistribute {
        group: Vec<String>,
        splits: Vec<(String, Vec<Multiplicity>)>,
        within: Vec<Multiplicity>,
        inverse: bool,
    },
    /// Remove loop-free regular `w`, composing edges through it; a source `w~` keeps its row.
    Reduce {
        w: String,
    },
    /// Restore vertex `w` from regular source `source`: each listed predecessor gives back
    /// `k` copies of the source row and gains `k` edges to `w`.
    Unreduce {
        w: String,
        source: String,
        coeffs: Vec<(String, Multiplicity)>,
    },
    RemoveSource {
        w: String,
    },
    AddSource {
        w: String,
        row: Profile,
    },
    Splice {
        u: String,
    },
    Unsplice {
        u: String,
    },
    Enclose {
        u: String,
    },
    Unenclose {
        u: String,
    },
}

impl MovePlan {
    pub fn kind(&self) -> MoveKind {
        match self {
            MovePlan::OutSplit { .. } | MovePlan::OutMerge { .. } => MoveKind::O,
            MovePlan::InSplit { .. } | MovePlan::InMerge { .. } => MoveKind::IMinus,
            MovePlan::Redistribute { .. } => MoveKind::IPlus,
            MovePlan::Reduce { .. } | MovePlan::Unreduce { .. } => MoveKind::RPlus,
            MovePlan::RemoveSource { .. } | MovePlan::AddSource { .. } => MoveKind::S,
            MovePlan::Splice { .. } | MovePlan::Unsplice { .. } => MoveKind::CPlus,
            MovePlan::Enclose { .. } | MovePlan::Unenclose { .. } => MoveKind::PPlus,
        }
    }

    pub fn is_inverse(&self) -> bool {
        match self {
            MovePlan::Redistribute { inverse, .. } => *inverse,
            MovePlan::OutMerge { .. }
            | MovePlan::InMerge { .. }
            | MovePlan::Unreduce { .. }
            | MovePlan::AddSource { .. }
            | MovePlan::Unsplice { .. }
            | MovePlan::Unenclose { .. } => true,
            _ => false,
        }
    }

    pub fn parse(line: &str) -> Result<MovePlan, MoveError> {
        script::parse_plan(line)
    }
}

impl fmt::Display for MovePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&script::format_plan(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MoveError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("inverse pattern not found: {0}")]
    PatternNotFound(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex name `{0}` already in use")]
    NameCollision(String),
    #[error("script error: {0}")]
    Script(String),
}

impl MoveError {
    pub fn diagnostic(&self) -> String {
        self.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("step {step} (`{plan}`): {error}")]
pub struct TraceError {
    /// 1-based index of the failing step.
    pub step: usize,
    pub plan: String,
    pub error: MoveError,
}

/// Ordered sequence of moves; serialises to one script line per move.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MoveTrace {
    pub steps: Vec<MovePlan>,
}

impl MoveTrace {
    pub fn new(steps: Vec<MovePlan>) -> MoveTrace {
        MoveTrace { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, p: MovePlan) {
        self.steps.push(p);
    }

    pub fn extend(&mut self, other: MoveTrace) {
        self.steps.extend(other.steps);
    }

    /// Weakest invariance class among the steps (`111` for the empty trace).
    pub fn class(&self) -> Relation {
        self.steps.iter().fold(Relation(0b111), |acc, p| Relation(acc.0 & p.kind().invariance_class().0))
    }

    pub fn to_script(&self) -> String {
        self.steps.iter().map(|p| format!("{p}\n")).collect()
    }

    /// One move per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<MoveTrace, TraceError> {
        let mut steps = Vec::new();
        for raw in text.lines() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let plan = script::parse_plan(line).map_err(|error| TraceError {
                step: steps.len() + 1,
                plan: line.to_string(),
                error,
            })?;
            steps.push(plan);
        }
        Ok(MoveTrace { steps })
    }
}

impl fmt::Display for MoveTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_script())
    }
}

/// Applies every step in order.
pub fn apply_trace(g: &Graph, t: &MoveTrace) -> Result<Graph, TraceError> {
    let mut cur = g.clone();
    for (i, p) in t.steps.iter().enumerate() {
        cur = apply_move(&cur, p).map_err(|error| TraceError { step: i + 1, plan: p.to_string(), error })?;
    }
    Ok(cur)
}

/// Like [`apply_trace`] but returns every intermediate graph, starting with `g`.
pub fn replay(g: &Graph, t: &MoveTrace) -> Result<Vec<Graph>, TraceError> {
    let mut out = vec![g.clone()];
    for (i, p) in t.steps.iter().enumerate() {
        let next = apply_move(out.last().unwrap(), p).map_err(|error| TraceError {
            step: i + 1,
            plan: p.to_string(),
            error,
        })?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_order() {
        let r: Relation = "101".parse().unwrap();
        assert!(r.le("111".parse().unwrap()));
        assert!(!r.le("011".parse().unwrap()));
        assert_eq!(r.to_string(), "101");
        assert!("12x".parse::<Relation>().is_err());
    }

    #[test]
    fn registry() {
        let (k, warn) = allowed_moves("101".parse().unwrap());
        assert_eq!(k, vec![MoveKind::O, MoveKind::IPlus, MoveKind::RPlus]);
        assert!(!warn);
        let (k, _) = allowed_moves("001".parse().unwrap());
        assert_eq!(k, vec![MoveKind::O, MoveKind::IMinus, MoveKind::IPlus, MoveKind::RPlus, MoveKind::S]);
        assert_eq!(allowed_moves("000".parse().unwrap()).0.len(), 7);
        assert!(allowed_moves("010".parse().unwrap()).1);
    }

    #[test]
    fn comment_stripping_keeps_derived_names() {
        assert_eq!(strip_comment("R+ w#1 # note"), "R+ w#1 ");
        assert_eq!(strip_comment("# whole line"), "");
    }
}
