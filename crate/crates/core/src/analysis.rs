//! Scenario studies on the linear radius-1 network creation game and an
//! executable check of every equilibrium result over a parameter grid.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    adjacency_equilibrium, brute_force_social_optimum, circulant_profile, edge_rule_profile, enumerate_pne,
    isolated_is_ne, linear_config, lower_endpoint_pays, regular_ne_condition, tree_ne_condition, EdgeDecomposition,
    Method, PneEntry, EXHAUSTIVE_LIMIT,
};
use crate::error::{Error, Result};
use crate::game_core::{is_pne, pne_set, social_extrema, Game, PneCheck};
use crate::netgame::{
    make_profile, InducedGraph, NetGame, NetGameConfig, PurchaseProfile, Shape, TargetSet, UtilitySpec,
};
use crate::report::{opt_rational_string, rational_string, rational_vec};
use crate::scalar::{Cost, Dual};
use crate::social_matrix::{build_archetype, flip_entries, scale_row, ArchetypeKind, Flip, SocialRangeMatrix};

fn check_profile(game: &NetGame, matrix: &SocialRangeMatrix, profile: &PurchaseProfile) -> Result<PneCheck<TargetSet>> {
    is_pne(game, matrix, profile.strategies())
}

fn social_cost(game: &NetGame, profile: &PurchaseProfile) -> Cost {
    game.actual_costs(profile.strategies()).into_iter().sum()
}

fn exact(cost: Cost) -> Rational64 {
    cost.standard.as_exact().expect("linear costs are exact")
}

/// Anarchy: every player weighs only herself.
pub fn anarchy_matrix(n: usize) -> Result<SocialRangeMatrix> {
    build_archetype(ArchetypeKind::Selfish, n, None, Dual::ONE)
}

/// Monarchy with player 0 as monarch: everyone weighs the monarch at 1 and
/// herself at `ε`; the monarch weighs only herself, at `ε`.
pub fn monarchy_matrix(n: usize) -> Result<SocialRangeMatrix> {
    build_archetype(ArchetypeKind::Monarchy, n, Some(0), Dual::EPS)
}

pub fn anarchy_closed_form(n: usize, alpha: Rational64) -> Rational64 {
    if alpha <= Rational64::one() {
        clique_cost(n, alpha)
    } else {
        Rational64::zero()
    }
}

pub fn monarchy_closed_form(n: usize, alpha: Rational64) -> Rational64 {
    (alpha - 2) * (n as i64 - 1)
}

pub fn optimum_closed_form(n: usize, alpha: Rational64) -> Rational64 {
    if alpha < Rational64::from_integer(2) {
        clique_cost(n, alpha)
    } else {
        Rational64::zero()
    }
}

fn clique_cost(n: usize, alpha: Rational64) -> Rational64 {
    (alpha / 2 - 1) * (n as i64 * (n as i64 - 1))
}

/// One society's equilibrium in a comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub scenario: String,
    pub matrix: SocialRangeMatrix,
    /// An equilibrium with the closed-form cost when one exists, otherwise
    /// the per-link rule equilibrium.
    pub equilibrium: PurchaseProfile,
    /// Social cost recomputed from `equilibrium`.
    #[serde(with = "crate::report::cost_json")]
    pub cost: Cost,
    #[serde(with = "rational_string")]
    pub closed_form: Rational64,
    pub matches_closed_form: bool,
    pub pne_count: u64,
    /// Every social cost some equilibrium attains.
    #[serde(with = "rational_vec")]
    pub achievable_costs: Vec<Rational64>,
}

/// Equilibria of the monarchy that share the closed-form cost with the
/// reported one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditionalEquilibria {
    /// Equilibria at that cost other than the reported one.
    pub count: u64,
    pub example: Option<PurchaseProfile>,
    /// Whether the example induces a different graph than the reported one.
    pub different_topology: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Winner {
    Anarchy,
    Monarchy,
    Tie,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioComparison {
    pub n: usize,
    #[serde(with = "rational_string")]
    pub alpha: Rational64,
    pub anarchy: ScenarioOutcome,
    pub monarchy: ScenarioOutcome,
    #[serde(with = "crate::report::cost_json")]
    pub optimum_cost: Cost,
    #[serde(with = "rational_string")]
    pub optimum_closed_form: Rational64,
    pub optimum_matches: bool,
    /// The society whose reported equilibrium has the lower social cost.
    pub winner: Winner,
    /// Present for `α ≤ 1`.
    pub additional_monarchy: Option<AdditionalEquilibria>,
    /// Why the monarchy missed its closed form, when it did.
    pub note: Option<String>,
}

impl ScenarioComparison {
    pub fn matches_closed_forms(&self) -> bool {
        self.anarchy.matches_closed_form && self.monarchy.matches_closed_form && self.optimum_matches
    }
}

fn scenario(
    name: &str,
    matrix: SocialRangeMatrix,
    alpha: Rational64,
    closed_form: Rational64,
) -> Result<ScenarioOutcome> {
    let n = matrix.n();
    let config = linear_config(n, alpha, 1);
    let game = NetGame::new(config.clone())?;
    let decomposition = EdgeDecomposition::new(&matrix, alpha);
    let witness = decomposition.profile_with_cost(closed_form);
    let equilibrium = match witness {
        Some(p) => p,
        None => edge_rule_profile(&config, &matrix)?,
    };
    debug_assert!(check_profile(&game, &matrix, &equilibrium)?.is_equilibrium());
    let cost = social_cost(&game, &equilibrium);
    Ok(ScenarioOutcome {
        scenario: name.to_string(),
        matches_closed_form: cost == Dual::real(closed_form),
        pne_count: decomposition.count().map_or(u64::MAX, |c| u64::try_from(c).unwrap_or(u64::MAX)),
        achievable_costs: decomposition.achievable_costs(),
        matrix,
        equilibrium,
        cost,
        closed_form,
    })
}

/// Explains why the monarchy star is not an equilibrium, if it is not.
fn star_failure(n: usize, alpha: Rational64, matrix: &SocialRangeMatrix) -> Result<Option<(PurchaseProfile, String)>> {
    let game = NetGame::new(linear_config(n, alpha, 1))?;
    let star = make_profile(Shape::Star { center: 0 }, n)?;
    Ok(match check_profile(&game, matrix, &star)? {
        PneCheck::Equilibrium => None,
        PneCheck::Improvable(dev) => {
            let targets: Vec<String> = dev.strategy.iter().map(|j| j.to_string()).collect();
            let note = format!(
                "the star with leaves paying is not an equilibrium: player {} lowers its perceived cost by {} by switching to {{{}}}",
                dev.player,
                -dev.delta,
                targets.join(",")
            );
            Some((star, note))
        }
    })
}

/// Compares the selfish society with a monarchy (player 0) in the linear
/// radius-1 game. Costs are recomputed from equilibrium profiles and
/// cross-checked against the closed forms.
pub fn anarchy_vs_monarchy(n: usize, alpha: Rational64) -> Result<ScenarioComparison> {
    if n < 2 {
        return Err(Error::InvalidParameter("a monarchy needs at least 2 players".into()));
    }
    if alpha < Rational64::zero() {
        return Err(Error::InvalidParameter(format!("alpha must be non-negative, got {alpha}")));
    }
    let anarchy = scenario("anarchy", anarchy_matrix(n)?, alpha, anarchy_closed_form(n, alpha))?;
    let monarchy_f = monarchy_matrix(n)?;
    let monarchy = scenario("monarchy", monarchy_f.clone(), alpha, monarchy_closed_form(n, alpha))?;

    let optimum = brute_force_social_optimum(&linear_config(n, alpha, 1))?;
    let optimum_closed_form = optimum_closed_form(n, alpha);

    let winner = match anarchy.cost.cmp(&monarchy.cost) {
        std::cmp::Ordering::Less => Winner::Anarchy,
        std::cmp::Ordering::Greater => Winner::Monarchy,
        std::cmp::Ordering::Equal => Winner::Tie,
    };

    let additional_monarchy = if alpha <= Rational64::one() {
        let decomposition = EdgeDecomposition::new(&monarchy_f, alpha);
        let target = exact(monarchy.cost);
        let total = decomposition.cost_counts().get(&target).copied().unwrap_or(0);
        let example = decomposition.other_profile_with_cost(target, &monarchy.equilibrium);
        let different_topology = example
            .as_ref()
            .map(|p| crate::netgame::induce_graph(p) != crate::netgame::induce_graph(&monarchy.equilibrium));
        Some(AdditionalEquilibria {
            count: u64::try_from(total.saturating_sub(1)).unwrap_or(u64::MAX),
            example,
            different_topology,
        })
    } else {
        None
    };

    let note =
        if monarchy.matches_closed_form { None } else { star_failure(n, alpha, &monarchy_f)?.map(|(_, note)| note) };

    Ok(ScenarioComparison {
        n,
        alpha,
        optimum_matches: optimum.cost == Dual::real(optimum_closed_form),
        optimum_cost: optimum.cost,
        optimum_closed_form,
        winner,
        additional_monarchy,
        note,
        anarchy,
        monarchy,
    })
}

/// Which way 0-entries are flipped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlipDirection {
    /// 0 → 1 in a matrix with off-diagonal entries in {0, 1}.
    Friendship,
    /// 0 → −1 in a matrix with off-diagonal entries in {−1, 0}.
    IllWill,
}

impl FlipDirection {
    pub fn value(self) -> Dual {
        match self {
            FlipDirection::Friendship => Dual::ONE,
            FlipDirection::IllWill => Dual::int(-1),
        }
    }

    fn allowed(self, w: Dual) -> bool {
        w == Dual::ZERO || w == self.value()
    }
}

impl FromStr for FlipDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "friendship" | "windfall" => Ok(FlipDirection::Friendship),
            "ill-will" | "ill_will" => Ok(FlipDirection::IllWill),
            _ => Err(Error::Unknown { what: "flip direction", name: s.to_string() }),
        }
    }
}

/// Equilibria of one matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    pub matrix: SocialRangeMatrix,
    /// The per-link rule equilibrium.
    pub constructed: PurchaseProfile,
    #[serde(with = "crate::report::cost_json")]
    pub constructed_cost: Cost,
    pub pne_count: u64,
    #[serde(with = "crate::report::cost_json")]
    pub worst_cost: Cost,
    #[serde(with = "crate::report::cost_json")]
    pub best_cost: Cost,
    /// Every equilibrium, listed for small games.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pne: Option<Vec<PneEntry>>,
}

fn summarize(config: &NetGameConfig, matrix: &SocialRangeMatrix, list: bool) -> Result<EquilibriumSummary> {
    let game = NetGame::new(config.clone())?;
    let decomposition = EdgeDecomposition::new(matrix, config.alpha);
    let constructed = edge_rule_profile(config, matrix)?;
    let pne = if list && config.n <= EXHAUSTIVE_LIMIT {
        Some(enumerate_pne(config, matrix, EXHAUSTIVE_LIMIT, Method::Auto)?.pne)
    } else {
        None
    };
    Ok(EquilibriumSummary {
        matrix: matrix.clone(),
        constructed_cost: social_cost(&game, &constructed),
        constructed,
        pne_count: decomposition.count().map_or(u64::MAX, |c| u64::try_from(c).unwrap_or(u64::MAX)),
        worst_cost: Dual::real(decomposition.worst_cost().expect("non-negative self-weights admit an equilibrium")),
        best_cost: Dual::real(decomposition.best_cost().expect("non-negative self-weights admit an equilibrium")),
        pne,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindfallReport {
    pub config: NetGameConfig,
    pub direction: FlipDirection,
    pub flips: Vec<(usize, usize)>,
    pub before: EquilibriumSummary,
    pub after: EquilibriumSummary,
    /// `after − before`.
    #[serde(with = "crate::report::cost_json")]
    pub worst_delta: Cost,
    #[serde(with = "crate::report::cost_json")]
    pub best_delta: Cost,
    #[serde(with = "crate::report::cost_json")]
    pub constructed_delta: Cost,
    pub worst_holds: bool,
    pub best_holds: bool,
    pub constructed_holds: bool,
}

impl WindfallReport {
    pub fn holds(&self) -> bool {
        self.worst_holds && self.best_holds && self.constructed_holds
    }
}

fn check_flip_preconditions(
    config: &NetGameConfig,
    matrix: &SocialRangeMatrix,
    flips: &[(usize, usize)],
    direction: FlipDirection,
) -> Result<()> {
    if !config.is_r1_linear() {
        return Err(Error::Precondition("flip experiments need linear g and R = 1".into()));
    }
    if matrix.n() != config.n {
        return Err(Error::DimensionMismatch { expected: config.n, actual: matrix.n() });
    }
    if flips.is_empty() {
        return Err(Error::Precondition("the set of flipped entries must be non-empty".into()));
    }
    let n = matrix.n();
    for i in 0..n {
        if matrix.get(i, i) != Dual::ONE {
            return Err(Error::Precondition(format!("self-weight of player {i} must be 1, got {}", matrix.get(i, i))));
        }
        for j in (0..n).filter(|&j| j != i) {
            if !direction.allowed(matrix.get(i, j)) {
                return Err(Error::Precondition(format!(
                    "entry ({i}, {j}) = {} is outside {{0, {}}}",
                    matrix.get(i, j),
                    direction.value()
                )));
            }
        }
    }
    for (k, &(i, j)) in flips.iter().enumerate() {
        matrix.check_player(i)?;
        matrix.check_player(j)?;
        if i == j {
            return Err(Error::Precondition(format!("cannot flip the self-weight of player {i}")));
        }
        if !matrix.get(i, j).is_zero() {
            return Err(Error::Precondition(format!("entry ({i}, {j}) is not 0")));
        }
        if flips[..k].contains(&(i, j)) {
            return Err(Error::Precondition(format!("entry ({i}, {j}) is flipped twice")));
        }
    }
    Ok(())
}

fn moves_as_claimed(direction: FlipDirection, before: Cost, after: Cost) -> bool {
    match direction {
        FlipDirection::Friendship => after <= before,
        FlipDirection::IllWill => after >= before,
    }
}

/// Flips the given 0-entries and compares equilibrium social costs before and
/// after. Friendship may only lower them, ill-will may only raise them, for
/// the worst, the best, and the constructed equilibrium alike.
pub fn windfall_experiment(
    config: &NetGameConfig,
    matrix: &SocialRangeMatrix,
    flips: &[(usize, usize)],
    direction: FlipDirection,
) -> Result<WindfallReport> {
    config.validate()?;
    check_flip_preconditions(config, matrix, flips, direction)?;
    let flipped = flip_entries(
        matrix,
        &flips.iter().map(|&(i, j)| Flip::new(i, j, direction.value())).collect::<Vec<_>>(),
        true,
    )?;
    let before = summarize(config, matrix, true)?;
    let after = summarize(config, &flipped, true)?;
    Ok(WindfallReport {
        config: config.clone(),
        direction,
        flips: flips.to_vec(),
        worst_delta: after.worst_cost - before.worst_cost,
        best_delta: after.best_cost - before.best_cost,
        constructed_delta: after.constructed_cost - before.constructed_cost,
        worst_holds: moves_as_claimed(direction, before.worst_cost, after.worst_cost),
        best_holds: moves_as_claimed(direction, before.best_cost, after.best_cost),
        constructed_holds: moves_as_claimed(direction, before.constructed_cost, after.constructed_cost),
        before,
        after,
    })
}

/// The equilibrium results checked by [`verify_lemma`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
    /// Scaling a row by λ > 0 leaves the equilibria unchanged.
    RowScaling,
    /// All-ones: social optima are equilibria. All-minus-ones: social maxima are.
    AltruisticOptimum,
    /// Steep utility: the clique (R = 1) or bounded-diameter trees (R > 1) are optimal.
    OptimumTopology,
    /// The empty graph is a selfish equilibrium iff g(x) ≤ xα.
    IsolatedEquilibrium,
    /// Regular graphs are selfish equilibria under the per-degree condition.
    RegularEquilibrium,
    /// Trees of bounded diameter are selfish equilibria for increasing g.
    TreeEquilibrium,
    /// Linear radius-1 games always have an equilibrium, built link by link.
    PerLinkExistence,
    /// Binary matrices with 1 < α < 2 reproduce themselves as topologies.
    AdjacencyTopology,
    /// Closed-form costs of anarchy, monarchy, and the optimum.
    AnarchyMonarchy,
    /// Neither anarchy nor monarchy is always better.
    WelfareComparison,
    /// Turning neutral relations into friendships never raises equilibrium cost.
    FriendshipWindfall,
    /// Turning neutral relations into ill-will never lowers equilibrium cost.
    IllWillPrice,
}

impl LemmaId {
    pub const ALL: [LemmaId; 12] = [
        LemmaId::RowScaling,
        LemmaId::AltruisticOptimum,
        LemmaId::OptimumTopology,
        LemmaId::IsolatedEquilibrium,
        LemmaId::RegularEquilibrium,
        LemmaId::TreeEquilibrium,
        LemmaId::PerLinkExistence,
        LemmaId::AdjacencyTopology,
        LemmaId::AnarchyMonarchy,
        LemmaId::WelfareComparison,
        LemmaId::FriendshipWindfall,
        LemmaId::IllWillPrice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::RowScaling => "row-scaling",
            LemmaId::AltruisticOptimum => "altruistic-optimum",
            LemmaId::OptimumTopology => "optimum-topology",
            LemmaId::IsolatedEquilibrium => "isolated-equilibrium",
            LemmaId::RegularEquilibrium => "regular-equilibrium",
            LemmaId::TreeEquilibrium => "tree-equilibrium",
            LemmaId::PerLinkExistence => "per-link-existence",
            LemmaId::AdjacencyTopology => "adjacency-topology",
            LemmaId::AnarchyMonarchy => "anarchy-monarchy",
            LemmaId::WelfareComparison => "welfare-comparison",
            LemmaId::FriendshipWindfall => "friendship-windfall",
            LemmaId::IllWillPrice => "ill-will-price",
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::Unknown { what: "lemma", name: s.to_string() })
    }
}

/// Utility functions swept by the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilityFamily {
    Linear,
    /// `g(x) = x²`.
    Square,
    /// `g(x) = 4 − 4/2^x`: marginals 2, 1, 1/2, ...
    Concave,
    /// `g(0) = 0`, `g(x) = 1` otherwise.
    Plateau,
}

impl UtilityFamily {
    pub fn spec(self, n: usize) -> UtilitySpec {
        match self {
            UtilityFamily::Linear => UtilitySpec::Linear,
            UtilityFamily::Square => UtilitySpec::Power(Rational64::from_integer(2)),
            UtilityFamily::Concave => {
                UtilitySpec::Table((0..n).map(|x| Rational64::from_integer(4) - Rational64::new(4, 1 << x)).collect())
            }
            UtilityFamily::Plateau => {
                UtilitySpec::Table((0..n).map(|x| Rational64::from_integer(i64::from(x > 0))).collect())
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UtilityFamily::Linear => "linear",
            UtilityFamily::Square => "square",
            UtilityFamily::Concave => "concave",
            UtilityFamily::Plateau => "plateau",
        }
    }
}

impl FromStr for UtilityFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [UtilityFamily::Linear, UtilityFamily::Square, UtilityFamily::Concave, UtilityFamily::Plateau]
            .into_iter()
            .find(|u| u.name() == s)
            .ok_or_else(|| Error::Unknown { what: "utility family", name: s.to_string() })
    }
}

/// Parameter sweep for [`verify_lemma`]. Each check uses the part of the
/// grid its setting allows and clamps `n` to its brute-force limit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaGrid {
    pub players: Vec<usize>,
    #[serde(with = "rational_vec")]
    pub alphas: Vec<Rational64>,
    pub radii: Vec<usize>,
    pub utilities: Vec<UtilityFamily>,
    /// Matrices drawn per point where a check samples matrices.
    pub samples: usize,
    pub seed: u64,
}

impl Default for LemmaGrid {
    fn default() -> Self {
        LemmaGrid {
            players: vec![2, 3, 4, 5, 6],
            alphas: [(1, 4), (1, 2), (1, 1), (3, 2), (2, 1), (3, 1)]
                .iter()
                .map(|&(p, q)| Rational64::new(p, q))
                .collect(),
            radii: vec![1, 2, 3],
            utilities: vec![UtilityFamily::Linear, UtilityFamily::Square, UtilityFamily::Concave],
            samples: 8,
            seed: 0x5eed,
        }
    }
}

/// Where a verdict was evaluated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    #[serde(with = "opt_rational_string")]
    pub alpha: Option<Rational64>,
    pub radius: Option<usize>,
    pub utility: Option<UtilityFamily>,
    pub detail: Option<String>,
}

impl GridPoint {
    fn new(n: usize, alpha: Rational64, radius: usize, utility: UtilityFamily) -> Self {
        GridPoint { n, alpha: Some(alpha), radius: Some(radius), utility: Some(utility), detail: None }
    }

    fn detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    fn config(&self) -> NetGameConfig {
        let utility = self.utility.unwrap_or(UtilityFamily::Linear);
        NetGameConfig::new(self.n, self.alpha.unwrap_or_default(), self.radius.unwrap_or(1), utility.spec(self.n))
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}", self.n)?;
        if let Some(a) = self.alpha {
            write!(f, " alpha={a}")?;
        }
        if let Some(r) = self.radius {
            write!(f, " R={r}")?;
        }
        if let Some(u) = self.utility {
            write!(f, " g={}", u.name())?;
        }
        if let Some(d) = &self.detail {
            write!(f, " {d}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub lemma: LemmaId,
    pub point: GridPoint,
    pub precondition: bool,
    pub conclusion: bool,
    pub counterexample: Option<PurchaseProfile>,
    pub note: Option<String>,
}

impl LemmaVerdict {
    /// False exactly when the precondition holds and the conclusion fails.
    pub fn passed(&self) -> bool {
        !self.precondition || self.conclusion
    }
}

struct Check {
    precondition: bool,
    conclusion: bool,
    counterexample: Option<PurchaseProfile>,
    note: Option<String>,
}

impl Check {
    fn new(precondition: bool, conclusion: bool) -> Self {
        Check { precondition, conclusion, counterexample: None, note: None }
    }

    fn with_counterexample(mut self, p: Option<PurchaseProfile>) -> Self {
        self.counterexample = p;
        self
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Runs one check over the grid.
pub fn verify_lemma(lemma: LemmaId, grid: &LemmaGrid) -> Result<Vec<LemmaVerdict>> {
    let points = lemma_points(lemma, grid);
    let checks: Vec<Result<Check>> = points.par_iter().map(|p| evaluate(lemma, p, grid)).collect();
    points
        .into_iter()
        .zip(checks)
        .map(|(point, check)| {
            let check = check?;
            Ok(LemmaVerdict {
                lemma,
                point,
                precondition: check.precondition,
                conclusion: check.conclusion,
                counterexample: check.counterexample,
                note: check.note,
            })
        })
        .collect()
}

/// Every check, in [`LemmaId::ALL`] order.
pub fn verify_all(grid: &LemmaGrid) -> Result<Vec<LemmaVerdict>> {
    let mut out = Vec::new();
    for lemma in LemmaId::ALL {
        out.extend(verify_lemma(lemma, grid)?);
    }
    Ok(out)
}

fn points_where(
    grid: &LemmaGrid,
    max_n: usize,
    radius: impl Fn(usize) -> bool,
    utility: impl Fn(UtilityFamily) -> bool,
) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for &n in grid.players.iter().filter(|&&n| (1..=max_n).contains(&n)) {
        for &alpha in &grid.alphas {
            for &r in grid.radii.iter().filter(|&&r| radius(r)) {
                for &u in grid.utilities.iter().filter(|&&u| utility(u)) {
                    out.push(GridPoint::new(n, alpha, r, u));
                }
            }
        }
    }
    out
}

fn linear_points(grid: &LemmaGrid, min_n: usize, max_n: usize) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for &n in grid.players.iter().filter(|&&n| (min_n..=max_n).contains(&n)) {
        for &alpha in &grid.alphas {
            out.push(GridPoint::new(n, alpha, 1, UtilityFamily::Linear));
        }
    }
    out
}

fn lemma_points(lemma: LemmaId, grid: &LemmaGrid) -> Vec<GridPoint> {
    match lemma {
        LemmaId::RowScaling => points_where(grid, 3, |_| true, |_| true),
        LemmaId::AltruisticOptimum => points_where(grid, 3, |_| true, |_| true),
        LemmaId::OptimumTopology => points_where(grid, 6, |_| true, |_| true),
        LemmaId::IsolatedEquilibrium => points_where(grid, 6, |_| true, |_| true),
        LemmaId::RegularEquilibrium => {
            let mut out = Vec::new();
            for p in points_where(grid, 6, |r| r == 1, |_| true) {
                for x in 0..=p.n / 2 {
                    out.push(p.clone().detail(format!("x={x}")));
                }
            }
            out
        }
        LemmaId::TreeEquilibrium => points_where(grid, 6, |r| r > 1, |_| true),
        LemmaId::PerLinkExistence => linear_points(grid, 2, EXHAUSTIVE_LIMIT),
        LemmaId::AdjacencyTopology => linear_points(grid, 2, 6),
        LemmaId::AnarchyMonarchy => linear_points(grid, 2, 6),
        LemmaId::WelfareComparison => grid
            .players
            .iter()
            .filter(|&&n| (2..=6).contains(&n))
            .map(|&n| GridPoint { n, alpha: None, radius: Some(1), utility: Some(UtilityFamily::Linear), detail: None })
            .collect(),
        LemmaId::FriendshipWindfall | LemmaId::IllWillPrice => linear_points(grid, 2, EXHAUSTIVE_LIMIT),
    }
}

fn point_seed(grid: &LemmaGrid, point: &GridPoint) -> u64 {
    // Stable across runs: FNV-1a over the point's text.
    point
        .to_string()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325 ^ grid.seed, |h, b| (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3))
}

/// Off-diagonal masks of `n`-player matrices: all of them when there are at
/// most 64, otherwise `samples` drawn from the point's seed.
fn off_diagonal_masks(n: usize, samples: usize, seed: u64) -> Vec<u64> {
    let slots = n * (n - 1);
    if slots <= 6 {
        return (0..1u64 << slots).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).map(|_| rng.random_range(0..1u64 << slots)).collect()
}

fn masked_matrix(n: usize, mask: u64, diagonal: Dual, off: Dual) -> SocialRangeMatrix {
    let mut m = SocialRangeMatrix::zeros(n).expect("n ≥ 1");
    let mut bit = 0;
    for i in 0..n {
        m.set(i, i, diagonal);
        for j in (0..n).filter(|&j| j != i) {
            if mask & (1 << bit) != 0 {
                m.set(i, j, off);
            }
            bit += 1;
        }
    }
    m
}

fn profile_set(game: &NetGame, matrix: &SocialRangeMatrix) -> Result<Vec<PurchaseProfile>> {
    Ok(pne_set(game, matrix)?.into_iter().map(|s| PurchaseProfile::new(s).expect("valid strategies")).collect())
}

fn evaluate(lemma: LemmaId, point: &GridPoint, grid: &LemmaGrid) -> Result<Check> {
    let seed = point_seed(grid, point);
    match lemma {
        LemmaId::RowScaling => check_row_scaling(point, seed, grid.samples),
        LemmaId::AltruisticOptimum => check_altruistic(point),
        LemmaId::OptimumTopology => check_optimum_topology(point),
        LemmaId::IsolatedEquilibrium => check_isolated(point),
        LemmaId::RegularEquilibrium => check_regular(point),
        LemmaId::TreeEquilibrium => check_trees(point),
        LemmaId::PerLinkExistence => check_per_link(point, seed, grid.samples),
        LemmaId::AdjacencyTopology => check_adjacency(point, seed, grid.samples),
        LemmaId::AnarchyMonarchy => check_anarchy_monarchy(point),
        LemmaId::WelfareComparison => {
            // Needs prices on both sides of the crossover whatever the grid holds.
            let mut alphas: Vec<Rational64> =
                LemmaGrid::default().alphas.into_iter().chain(grid.alphas.iter().copied()).collect();
            alphas.sort();
            alphas.dedup();
            check_welfare(point, &alphas)
        }
        LemmaId::FriendshipWindfall => check_flips(point, FlipDirection::Friendship, seed, grid.samples),
        LemmaId::IllWillPrice => check_flips(point, FlipDirection::IllWill, seed, grid.samples),
    }
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> SocialRangeMatrix {
    let weights = [Dual::ZERO, Dual::ONE, Dual::int(-1), Dual::ratio(1, 2), Dual::EPS, Dual::int(2)];
    let entries = (0..n * n).map(|_| weights[rng.random_range(0..weights.len())]).collect();
    SocialRangeMatrix::new(n, entries).expect("exact weights")
}

fn check_row_scaling(point: &GridPoint, seed: u64, samples: usize) -> Result<Check> {
    let game = NetGame::new(point.config())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambdas = [Rational64::from_integer(7), Rational64::new(1, 3), Rational64::new(5, 2)];
    for _ in 0..samples.max(1) {
        let f = random_matrix(point.n, &mut rng);
        let row = rng.random_range(0..point.n);
        let lambda = lambdas[rng.random_range(0..lambdas.len())];
        let before = profile_set(&game, &f)?;
        let after = profile_set(&game, &scale_row(&f, row, lambda)?)?;
        if before != after {
            let diff =
                before.iter().find(|p| !after.contains(p)).or_else(|| after.iter().find(|p| !before.contains(p)));
            return Ok(Check::new(true, false)
                .with_counterexample(diff.cloned())
                .note(format!("scaling row {row} of {f} by {lambda} changed the equilibria")));
        }
    }
    Ok(Check::new(true, true))
}

fn check_altruistic(point: &GridPoint) -> Result<Check> {
    let game = NetGame::new(point.config())?;
    let n = point.n;
    let extrema = social_extrema(&game);
    let ones = SocialRangeMatrix::filled(n, Dual::ONE)?;
    let minus = SocialRangeMatrix::filled(n, Dual::int(-1))?;
    for (matrix, profiles, what) in
        [(&ones, &extrema.minimizers, "optimum"), (&minus, &extrema.maximizers, "maximizer")]
    {
        for s in profiles.iter() {
            if !is_pne(&game, matrix, s)?.is_equilibrium() {
                return Ok(Check::new(true, false)
                    .with_counterexample(Some(PurchaseProfile::new(s.clone())?))
                    .note(format!("a social {what} is not an equilibrium")));
            }
        }
    }
    Ok(Check::new(true, true).note(format!(
        "{} optima and {} maximizers checked",
        extrema.minimizers.len(),
        extrema.maximizers.len()
    )))
}

fn check_optimum_topology(point: &GridPoint) -> Result<Check> {
    let config = point.config();
    let game = NetGame::new(config.clone())?;
    let n = point.n;
    let half_alpha = game.alpha() * crate::scalar::Scalar::Exact(Rational64::new(1, 2));
    let precondition = (0..n.saturating_sub(1)).all(|x| game.g(x + 1) - game.g(x) > half_alpha);
    let optimum = brute_force_social_optimum(&config)?;
    let bad: Option<&InducedGraph> = if config.radius == 1 {
        optimum.graphs.iter().find(|g| g.edge_count() != n * (n - 1) / 2)
    } else {
        let bound = config.radius.min(n - 1);
        optimum.graphs.iter().find(|g| !(g.is_tree() && g.diameter().is_some_and(|d| d <= bound)))
    };
    let mut conclusion = bad.is_none();
    let mut note = format!("{} optimal graphs", optimum.count);
    if config.radius == 1 && optimum.count != 1 {
        conclusion = false;
        note = format!("{} optimal graphs, expected only the clique", optimum.count);
    }
    if optimum.count > optimum.graphs.len() {
        note.push_str(&format!(", first {} inspected", optimum.graphs.len()));
    }
    let counterexample = bad.map(lower_endpoint_pays).or_else(|| (!conclusion).then(|| optimum.profile()));
    Ok(Check::new(precondition, conclusion).with_counterexample(counterexample).note(note))
}

fn check_isolated(point: &GridPoint) -> Result<Check> {
    let config = point.config();
    let game = NetGame::new(config.clone())?;
    let condition = isolated_is_ne(&config)?;
    let empty = PurchaseProfile::empty(point.n);
    let actual = check_profile(&game, &SocialRangeMatrix::identity(point.n)?, &empty)?.is_equilibrium();
    Ok(Check::new(true, condition == actual)
        .with_counterexample((condition != actual).then_some(empty))
        .note(format!("condition {condition}, empty profile is an equilibrium: {actual}")))
}

fn check_regular(point: &GridPoint) -> Result<Check> {
    let x: usize =
        point.detail.as_deref().and_then(|d| d.strip_prefix("x=")).and_then(|v| v.parse().ok()).expect("x recorded");
    let config = point.config();
    let game = NetGame::new(config.clone())?;
    let condition = regular_ne_condition(&config, x)?;
    if 2 * x >= point.n && x > 0 {
        return Ok(Check::new(false, false).note("no 2x-regular graph on n vertices"));
    }
    let profile = circulant_profile(point.n, x)?;
    let holds = check_profile(&game, &SocialRangeMatrix::identity(point.n)?, &profile)?.is_equilibrium();
    Ok(Check::new(condition, holds).with_counterexample((condition && !holds).then_some(profile)))
}

/// Every spanning tree of diameter at most `bound`, as edge lists.
fn bounded_trees(n: usize, bound: usize) -> Vec<InducedGraph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for mask in 0u64..1 << pairs.len() {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let edges: Vec<(usize, usize)> =
            pairs.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &e)| e).collect();
        let g = InducedGraph::from_edges(n, &edges).expect("pairs in range");
        if g.is_tree() && g.diameter().is_some_and(|d| d <= bound) {
            out.push(g);
        }
    }
    out
}

/// Orients a tree towards `root`: every other node pays for the link to its parent.
fn rooted_profile(tree: &InducedGraph, root: usize) -> PurchaseProfile {
    let dist = tree.distances(root);
    let mut buys = vec![TargetSet::EMPTY; tree.n()];
    for (v, set) in buys.iter_mut().enumerate() {
        if v == root {
            continue;
        }
        let d = dist[v].expect("tree is connected");
        let parent = (0..tree.n()).find(|&u| tree.has_edge(u, v) && dist[u] == Some(d - 1)).expect("parent exists");
        set.insert(parent);
    }
    PurchaseProfile::new(buys).expect("tree edges are valid")
}

/// Every way to assign one payer per edge.
fn orientations(tree: &InducedGraph) -> impl Iterator<Item = PurchaseProfile> + '_ {
    let edges = tree.edges();
    (0u64..1 << edges.len()).map(move |mask| {
        let mut buys = vec![TargetSet::EMPTY; tree.n()];
        for (k, &(a, b)) in edges.iter().enumerate() {
            let (payer, target) = if mask & (1 << k) == 0 { (a, b) } else { (b, a) };
            buys[payer].insert(target);
        }
        PurchaseProfile::new(buys).expect("tree edges are valid")
    })
}

/// A tree counts as an equilibrium topology when some single-payer
/// orientation of it is an equilibrium.
fn check_trees(point: &GridPoint) -> Result<Check> {
    let config = point.config();
    let game = NetGame::new(config.clone())?;
    let condition = tree_ne_condition(&config)?;
    let n = point.n;
    let identity = SocialRangeMatrix::identity(n)?;
    let trees = bounded_trees(n, config.radius.min(n - 1));
    let note = "boundary-adjusted: drop-link delta taken as g(n-1) - g(remaining reach)";
    for tree in &trees {
        let mut found = false;
        for profile in orientations(tree) {
            if check_profile(&game, &identity, &profile)?.is_equilibrium() {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(Check::new(condition, false)
                .with_counterexample(Some(rooted_profile(tree, 0)))
                .note(format!("{note}; no orientation of this tree is an equilibrium")));
        }
    }
    Ok(Check::new(condition, true).note(format!("{note}; {} trees", trees.len())))
}

fn check_per_link(point: &GridPoint, seed: u64, samples: usize) -> Result<Check> {
    let config = point.config();
    let game = NetGame::new(config.clone())?;
    let alpha = config.alpha;
    let masks = off_diagonal_masks(point.n, samples, seed);
    let mut strict_instances = 0;
    for &mask in &masks {
        let f = masked_matrix(point.n, mask, Dual::EPS, Dual::ONE);
        let exhaustive = profile_set(&game, &f)?;
        let decomposition = EdgeDecomposition::new(&f, alpha);
        let rule = edge_rule_profile(&config, &f)?;
        let strict = (0..point.n).all(|i| {
            (0..point.n).filter(|&j| j != i).all(|j| {
                let d = f.get(i, i).scale(alpha - 1) - f.get(i, j);
                !d.is_zero()
            })
        });
        strict_instances += usize::from(strict);
        let fail = |why: &str| {
            Ok(Check::new(true, false).with_counterexample(Some(rule.clone())).note(format!("{why} for {f}")))
        };
        if exhaustive.is_empty() {
            return fail("no equilibrium");
        }
        if !exhaustive.contains(&rule) {
            return fail("per-link profile missing from the equilibria");
        }
        if decomposition.profiles() != exhaustive {
            return fail("per-pair enumeration disagrees with exhaustive search");
        }
        // Payers may differ when both endpoints are willing; the topology may not.
        let topology = crate::netgame::induce_graph(&rule);
        if strict && exhaustive.iter().any(|p| crate::netgame::induce_graph(p) != topology) {
            return fail("strict instance with several equilibrium topologies");
        }
    }
    Ok(Check::new(true, true).note(format!("{} matrices, {strict_instances} strict", masks.len())))
}

fn check_adjacency(point: &GridPoint, seed: u64, samples: usize) -> Result<Check> {
    let config = point.config();
    let game = NetGame::new(config.clone())?;
    let alpha = config.alpha;
    let precondition = alpha > Rational64::one() && alpha < Rational64::from_integer(2);
    if !precondition {
        return Ok(Check::new(false, false).note("alpha outside (1, 2)"));
    }
    let masks = off_diagonal_masks(point.n, samples, seed);
    for diagonal in [Dual::EPS, Dual::ONE] {
        for &mask in &masks {
            let f = masked_matrix(point.n, mask, diagonal, Dual::ONE);
            let adjacency = adjacency_equilibrium(&f, alpha)?;
            if !check_profile(&game, &f, &adjacency.profile)?.is_equilibrium() {
                return Ok(Check::new(true, false)
                    .with_counterexample(Some(adjacency.profile))
                    .note(format!("adjacency profile of {f} is not an equilibrium")));
            }
        }
    }
    Ok(Check::new(true, true).note(format!("{} matrices", 2 * masks.len())))
}

fn check_anarchy_monarchy(point: &GridPoint) -> Result<Check> {
    let alpha = point.alpha.expect("alpha recorded");
    let c = anarchy_vs_monarchy(point.n, alpha)?;
    let mut missed = Vec::new();
    if !c.anarchy.matches_closed_form {
        missed.push(format!("anarchy {} vs {}", c.anarchy.cost, c.anarchy.closed_form));
    }
    if !c.monarchy.matches_closed_form {
        missed.push(format!("monarchy {} vs {}", c.monarchy.cost, c.monarchy.closed_form));
    }
    if !c.optimum_matches {
        missed.push(format!("optimum {} vs {}", c.optimum_cost, c.optimum_closed_form));
    }
    if missed.is_empty() {
        return Ok(Check::new(true, true));
    }
    let star = star_failure(point.n, alpha, &c.monarchy.matrix)?;
    let mut note = missed.join("; ");
    if let Some(n) = &c.note {
        note.push_str("; ");
        note.push_str(n);
    }
    let counterexample = star.map(|(p, _)| p).or(Some(c.monarchy.equilibrium));
    Ok(Check::new(true, false).with_counterexample(counterexample).note(note))
}

fn check_welfare(point: &GridPoint, alphas: &[Rational64]) -> Result<Check> {
    let mut anarchy_better = None;
    let mut monarchy_better = None;
    for &alpha in alphas {
        match anarchy_vs_monarchy(point.n, alpha)?.winner {
            Winner::Anarchy => anarchy_better = anarchy_better.or(Some(alpha)),
            Winner::Monarchy => monarchy_better = monarchy_better.or(Some(alpha)),
            Winner::Tie => {}
        }
    }
    let show = |a: Option<Rational64>| a.map_or("none".to_string(), |a| a.to_string());
    let note =
        format!("anarchy better at alpha={}, monarchy better at alpha={}", show(anarchy_better), show(monarchy_better));
    let holds = anarchy_better.is_some() && monarchy_better.is_some();
    let counterexample = (!holds).then(|| PurchaseProfile::empty(point.n));
    Ok(Check::new(true, holds).with_counterexample(counterexample).note(note))
}

/// Zero off-diagonal slots of a matrix.
fn zero_slots(f: &SocialRangeMatrix) -> Vec<(usize, usize)> {
    let n = f.n();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| i != j && f.get(i, j).is_zero()).collect()
}

/// All single and double flips of a matrix's zero entries.
pub fn single_and_double_flips(f: &SocialRangeMatrix) -> Vec<Vec<(usize, usize)>> {
    let zeros = zero_slots(f);
    let mut out: Vec<Vec<(usize, usize)>> = zeros.iter().map(|&z| vec![z]).collect();
    for a in 0..zeros.len() {
        for b in (a + 1)..zeros.len() {
            out.push(vec![zeros[a], zeros[b]]);
        }
    }
    out
}

fn check_flips(point: &GridPoint, direction: FlipDirection, seed: u64, samples: usize) -> Result<Check> {
    let config = point.config();
    let masks = off_diagonal_masks(point.n, samples, seed);
    let mut comparisons = 0;
    for &mask in &masks {
        let f = masked_matrix(point.n, mask, Dual::ONE, direction.value());
        for flips in single_and_double_flips(&f) {
            let report = windfall_experiment(&config, &f, &flips, direction)?;
            comparisons += 1;
            if !report.holds() {
                return Ok(Check::new(true, false).with_counterexample(Some(report.after.constructed)).note(format!(
                    "flipping {flips:?} in {f}: worst {}, best {}",
                    report.worst_delta, report.best_delta
                )));
            }
        }
    }
    Ok(Check::new(true, true).note(format!("{} matrices, {comparisons} flip sets", masks.len())))
}
