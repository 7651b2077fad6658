//! Social range matrices: construction, row scaling, normalization,
//! classification, and entry flips.
//!
//! Entry `(i, j)` is the weight `f_ij` with which player `i` counts player
//! `j`'s actual cost in its own perceived cost. Entries are exact dual numbers
//! so that the "arbitrarily small `ε`" self-weights are represented exactly.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{Dual, Scalar, SocialWeight};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SocialRangeMatrix {
    n: usize,
    entries: Vec<SocialWeight>,
}

impl SocialRangeMatrix {
    /// Builds a matrix from row-major entries. Entries must be exact.
    pub fn new(n: usize, entries: Vec<SocialWeight>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("matrix must have at least one player".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, actual: entries.len() });
        }
        if let Some(bad) = entries.iter().find(|w| !w.is_exact()) {
            return Err(Error::InvalidParameter(format!("matrix entry {bad} is not exact")));
        }
        Ok(SocialRangeMatrix { n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<SocialWeight>>) -> Result<Self> {
        let n = rows.len();
        if let Some(row) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
        }
        Self::new(n, rows.into_iter().flatten().collect())
    }

    /// Convenience constructor from integer entries.
    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| Dual::int(v)).collect()).collect())
    }

    pub fn filled(n: usize, value: SocialWeight) -> Result<Self> {
        Self::new(n, vec![value; n * n])
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::filled(n, Dual::ZERO)
    }

    pub fn identity(n: usize) -> Result<Self> {
        build_archetype(ArchetypeKind::Selfish, n, None, Dual::ONE)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> SocialWeight {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: SocialWeight) {
        self.entries[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[SocialWeight] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = SocialWeight> + '_ {
        (0..self.n).map(move |i| self.get(i, j))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[SocialWeight]> {
        self.entries.chunks(self.n)
    }

    pub fn entries(&self) -> &[SocialWeight] {
        &self.entries
    }

    pub fn check_player(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::PlayerOutOfRange { index: i, n: self.n });
        }
        Ok(())
    }

    /// Parses the CSV form: one row per line, comma-separated weight tokens.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.split(',').map(Dual::parse).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let tokens: Vec<String> = row.iter().map(ToString::to_string).collect();
            out.push_str(&tokens.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses either the JSON form (`{"n": .., "entries": [[..]]}`) or CSV.
    pub fn parse_any(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Ok(serde_json::from_str(text)?)
        } else {
            Self::from_csv_str(text)
        }
    }
}

impl fmt::Display for SocialRangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let tokens: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", tokens.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    n: usize,
    entries: Vec<Vec<String>>,
}

impl Serialize for SocialRangeMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile { n: self.n, entries: self.rows().map(|r| r.iter().map(ToString::to_string).collect()).collect() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SocialRangeMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = MatrixFile::deserialize(deserializer)?;
        let rows = file
            .entries
            .iter()
            .map(|r| r.iter().map(|t| Dual::parse(t)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        if rows.len() != file.n {
            return Err(D::Error::custom(format!("declared n={} but found {} rows", file.n, rows.len())));
        }
        SocialRangeMatrix::from_rows(rows).map_err(D::Error::custom)
    }
}

/// The named matrix archetypes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArchetypeKind {
    Selfish,
    Altruistic,
    Malicious,
    Monarchy,
    Benevolent,
    OneMalicious,
}

impl ArchetypeKind {
    pub fn needs_special_player(self) -> bool {
        matches!(self, ArchetypeKind::Monarchy | ArchetypeKind::Benevolent | ArchetypeKind::OneMalicious)
    }
}

impl FromStr for ArchetypeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "selfish" | "identity" | "anarchy" => ArchetypeKind::Selfish,
            "altruistic" => ArchetypeKind::Altruistic,
            "malicious" => ArchetypeKind::Malicious,
            "monarchy" => ArchetypeKind::Monarchy,
            "benevolent" => ArchetypeKind::Benevolent,
            "one-malicious" | "one_malicious" => ArchetypeKind::OneMalicious,
            _ => return Err(Error::Unknown { what: "archetype", name: s.to_string() }),
        })
    }
}

/// An archetype together with its distinguished player, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Archetype {
    Selfish,
    Altruistic,
    Malicious,
    Monarchy { center: usize },
    Benevolent { player: usize },
    OneMalicious { player: usize },
}

impl Archetype {
    pub fn kind(self) -> ArchetypeKind {
        match self {
            Archetype::Selfish => ArchetypeKind::Selfish,
            Archetype::Altruistic => ArchetypeKind::Altruistic,
            Archetype::Malicious => ArchetypeKind::Malicious,
            Archetype::Monarchy { .. } => ArchetypeKind::Monarchy,
            Archetype::Benevolent { .. } => ArchetypeKind::Benevolent,
            Archetype::OneMalicious { .. } => ArchetypeKind::OneMalicious,
        }
    }
}

/// Builds an archetype matrix.
///
/// `self_weight` fills the diagonal (use `Dual::ONE` for the plain forms and
/// `Dual::EPS` for the "cares a little about herself" variants). For the
/// benevolent archetype only the benevolent player's row is non-zero, so only
/// `f_kk` receives `self_weight`.
pub fn build_archetype(
    kind: ArchetypeKind,
    n: usize,
    special: Option<usize>,
    self_weight: SocialWeight,
) -> Result<SocialRangeMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix must have at least one player".into()));
    }
    let k = if kind.needs_special_player() {
        let k = special
            .ok_or_else(|| Error::InvalidParameter(format!("archetype {kind:?} needs a distinguished player")))?;
        if k >= n {
            return Err(Error::PlayerOutOfRange { index: k, n });
        }
        k
    } else {
        0
    };
    let mut m = SocialRangeMatrix::zeros(n)?;
    for i in 0..n {
        for j in 0..n {
            let value = if i == j {
                match kind {
                    ArchetypeKind::Benevolent if i != k => Dual::ZERO,
                    _ => self_weight,
                }
            } else {
                match kind {
                    ArchetypeKind::Selfish => Dual::ZERO,
                    ArchetypeKind::Altruistic => Dual::ONE,
                    ArchetypeKind::Malicious => Dual::int(-1),
                    ArchetypeKind::Monarchy if j == k => Dual::ONE,
                    ArchetypeKind::Benevolent if i == k => Dual::ONE,
                    ArchetypeKind::OneMalicious if i == k => Dual::int(-1),
                    _ => Dual::ZERO,
                }
            };
            m.set(i, j, value);
        }
    }
    Ok(m)
}

/// Multiplies row `i` by a positive rational. Perceived equilibria are
/// invariant under this transformation.
pub fn scale_row(matrix: &SocialRangeMatrix, i: usize, lambda: Rational64) -> Result<SocialRangeMatrix> {
    matrix.check_player(i)?;
    if lambda <= Rational64::zero() {
        return Err(Error::NonPositiveScale(lambda.to_string()));
    }
    let mut out = matrix.clone();
    for j in 0..matrix.n {
        out.set(i, j, matrix.get(i, j).scale(lambda));
    }
    Ok(out)
}

/// Divides every entry by the largest absolute standard part, so that all
/// standard parts land in `[-1, 1]`.
///
/// A matrix whose standard parts all vanish but which has `ε` entries is
/// `ε·G` for the matrix `G` of coefficients; it is normalized as `G`, which
/// has the same perceived equilibria. The all-zero matrix yields
/// [`Error::DegenerateMatrix`].
pub fn normalize(matrix: &SocialRangeMatrix) -> Result<SocialRangeMatrix> {
    let max_abs =
        |part: fn(&Dual) -> Scalar| matrix.entries.iter().map(|w| part(w).abs()).max().unwrap_or(Scalar::ZERO);
    let max_std = max_abs(|w| w.standard);
    let (source, divisor) = if !max_std.is_zero() {
        (matrix.clone(), max_std)
    } else {
        let max_eps = max_abs(|w| w.eps_coeff);
        if max_eps.is_zero() {
            return Err(Error::DegenerateMatrix);
        }
        let promoted = matrix.entries.iter().map(|w| Dual::real(w.eps_coeff)).collect();
        (SocialRangeMatrix::new(matrix.n, promoted)?, max_eps)
    };
    let divisor = divisor.as_exact().expect("matrix entries are exact");
    let inverse = Rational64::from_integer(1) / divisor;
    let entries = source.entries.iter().map(|w| w.scale(inverse)).collect();
    SocialRangeMatrix::new(matrix.n, entries)
}

/// Rows `j` and `k` with `row_j = lambda · row_k`, `lambda > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collusion {
    pub j: usize,
    pub k: usize,
    #[serde(with = "crate::report::rational_string")]
    pub lambda: Rational64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocietyProfile {
    pub archetypes: Vec<Archetype>,
    pub ignorant: Vec<usize>,
    pub ignored: Vec<usize>,
    pub colluding: Vec<Collusion>,
}

impl SocietyProfile {
    pub fn is(&self, kind: ArchetypeKind) -> bool {
        self.archetypes.iter().any(|a| a.kind() == kind)
    }
}

/// Computes archetype flags, ignorant/ignored players, and colluding pairs.
///
/// Archetypes are recognized up to the common diagonal value, which must be
/// positive. The monarch's, the benevolent player's, and the malicious
/// player's own diagonal entries are unconstrained.
pub fn classify(matrix: &SocialRangeMatrix) -> SocietyProfile {
    let n = matrix.n;
    let ignorant = (0..n).filter(|&i| matrix.row(i).iter().all(|w| w.is_zero())).collect();
    let ignored = (0..n).filter(|&j| matrix.column(j).all(|w| w.is_zero())).collect();

    let mut archetypes = Vec::new();
    let uniform_off = |value: Dual| (0..n).all(|i| (0..n).all(|j| i == j || matrix.get(i, j) == value));
    let diag_ok = |skip: Option<usize>| {
        let mut diag = (0..n).filter(|&i| Some(i) != skip).map(|i| matrix.get(i, i));
        match diag.next() {
            None => true,
            Some(first) => first.is_positive() && diag.all(|d| d == first),
        }
    };
    if diag_ok(None) {
        if uniform_off(Dual::ZERO) {
            archetypes.push(Archetype::Selfish);
        }
        if uniform_off(Dual::ONE) {
            archetypes.push(Archetype::Altruistic);
        }
        if uniform_off(Dual::int(-1)) {
            archetypes.push(Archetype::Malicious);
        }
    }
    for k in 0..n {
        // Every off-diagonal entry equals `expected(i, j)`.
        let pattern = |expected: &dyn Fn(usize, usize) -> Dual| {
            (0..n).all(|i| (0..n).all(|j| i == j || matrix.get(i, j) == expected(i, j)))
        };
        if n >= 2 && diag_ok(Some(k)) && pattern(&|_, j| if j == k { Dual::ONE } else { Dual::ZERO }) {
            archetypes.push(Archetype::Monarchy { center: k });
        }
        let others_zero = (0..n).filter(|&i| i != k).all(|i| matrix.get(i, i).is_zero());
        if n >= 2 && others_zero && pattern(&|i, _| if i == k { Dual::ONE } else { Dual::ZERO }) {
            archetypes.push(Archetype::Benevolent { player: k });
        }
        if n >= 2 && diag_ok(Some(k)) && pattern(&|i, _| if i == k { Dual::int(-1) } else { Dual::ZERO }) {
            archetypes.push(Archetype::OneMalicious { player: k });
        }
    }

    let mut colluding = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            if let Some(lambda) = positive_ratio(matrix.row(j), matrix.row(k)) {
                colluding.push(Collusion { j, k, lambda });
            }
        }
    }

    SocietyProfile { archetypes, ignorant, ignored, colluding }
}

/// `Some(lambda)` when `a = lambda · b` with `lambda > 0`, comparing standard
/// and `ε` components alike.
fn positive_ratio(a: &[Dual], b: &[Dual]) -> Option<Rational64> {
    let components = |row: &[Dual]| -> Vec<Rational64> {
        row.iter()
            .flat_map(|w| [w.standard, w.eps_coeff])
            .map(|s| s.as_exact().expect("matrix entries are exact"))
            .collect()
    };
    let (a, b) = (components(a), components(b));
    let pivot = b.iter().position(|v| !v.is_zero());
    let lambda = match pivot {
        None => return a.iter().all(Zero::is_zero).then(|| Rational64::from_integer(1)),
        Some(p) => a[p] / b[p],
    };
    if lambda <= Rational64::zero() {
        return None;
    }
    // Cross-product test: a_x · b_p == a_p · b_x for every component.
    a.iter().zip(&b).all(|(&ax, &bx)| ax == lambda * bx).then_some(lambda)
}

/// One entry replacement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Flip {
    pub i: usize,
    pub j: usize,
    pub value: SocialWeight,
}

impl Flip {
    pub fn new(i: usize, j: usize, value: SocialWeight) -> Self {
        Flip { i, j, value }
    }
}

/// Replaces the listed entries. In strict mode every flipped entry must be 0.
pub fn flip_entries(matrix: &SocialRangeMatrix, flips: &[Flip], strict: bool) -> Result<SocialRangeMatrix> {
    let mut out = matrix.clone();
    for flip in flips {
        matrix.check_player(flip.i)?;
        matrix.check_player(flip.j)?;
        let current = matrix.get(flip.i, flip.j);
        if strict && !current.is_zero() {
            return Err(Error::StrictFlip { i: flip.i, j: flip.j, found: current.to_string() });
        }
        if !flip.value.is_exact() {
            return Err(Error::InvalidParameter(format!("flip value {} is not exact", flip.value)));
        }
        out.set(flip.i, flip.j, flip.value);
    }
    Ok(out)
}
