//! Equilibrium solvers for the network creation game: exhaustive and
//! per-pair enumeration of perceived equilibria, brute-force social optima,
//! best-response dynamics, and the closed-form equilibrium conditions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;

use num_rational::Rational64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_core::{best_deviation, pne_set, socialization_from_costs, Game, SocializationReport};
use crate::netgame::{
    induce_graph, make_profile, InducedGraph, NetGame, NetGameConfig, PurchaseProfile, Shape, TargetSet, UtilitySpec,
};
use crate::scalar::{Cost, Dual, Scalar};
use crate::social_matrix::SocialRangeMatrix;

/// Largest player count for exhaustive profile enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 4;
/// Largest player count for the per-pair enumeration.
pub const DECOMPOSITION_LIMIT: usize = 5;
/// Largest player count for the edge-subset social optimum search.
pub const OPTIMUM_LIMIT: usize = 7;
/// Default `n_cap` of [`enumerate_pne`].
pub const DEFAULT_CAP: usize = EXHAUSTIVE_LIMIT;
/// Optimal graphs kept in a [`SocialOptimum`]; the total count is always exact.
pub const MAX_RECORDED_OPTIMA: usize = 4096;

/// Which enumerator to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Per-pair decomposition when the game is linear with radius 1,
    /// exhaustive search otherwise.
    #[default]
    Auto,
    Exhaustive,
    EdgeDecomposition,
}

/// The ways a single pair `{i, j}` can be bought, `(i pays, j pays)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairChoices {
    pub i: usize,
    pub j: usize,
    pub combos: Vec<(bool, bool)>,
}

/// PNE structure of a linear, radius-1 game.
///
/// With `g(x) = x` and `R = 1` a player's perceived cost change from its own
/// links splits into independent per-link terms, so a profile is a perceived
/// equilibrium iff every pair's purchase choice is stable on its own:
///
/// ```text
/// player i, link to j already paid by j:  Δ = f_ii · α
/// player i, link to j not paid by j:      Δ = f_ii · (α − 1) − f_ij
/// ```
///
/// Buying is stable iff `Δ ≤ 0`, not buying iff `Δ ≥ 0`.
#[derive(Clone, Debug)]
pub struct EdgeDecomposition {
    n: usize,
    alpha: Rational64,
    pairs: Vec<PairChoices>,
}

fn pair_cost(alpha: Rational64, (a, b): (bool, bool)) -> Rational64 {
    let payments = i64::from(a) + i64::from(b);
    let edge = if a || b { 2 } else { 0 };
    alpha * payments - edge
}

impl EdgeDecomposition {
    pub fn new(matrix: &SocialRangeMatrix, alpha: Rational64) -> Self {
        let n = matrix.n();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let stable = |me: usize, other: usize, buy: bool, other_buys: bool| {
                    let delta = marginal(matrix, alpha, me, other, other_buys);
                    if buy {
                        !delta.is_positive()
                    } else {
                        !delta.is_negative()
                    }
                };
                let combos = [(false, false), (false, true), (true, false), (true, true)]
                    .into_iter()
                    .filter(|&(a, b)| stable(i, j, a, b) && stable(j, i, b, a))
                    .collect();
                pairs.push(PairChoices { i, j, combos });
            }
        }
        EdgeDecomposition { n, alpha, pairs }
    }

    pub fn pairs(&self) -> &[PairChoices] {
        &self.pairs
    }

    /// Number of perceived equilibria; `None` on overflow.
    pub fn count(&self) -> Option<u128> {
        self.pairs.iter().try_fold(1u128, |acc, p| acc.checked_mul(p.combos.len() as u128))
    }

    pub fn has_equilibrium(&self) -> bool {
        self.pairs.iter().all(|p| !p.combos.is_empty())
    }

    /// Every perceived equilibrium, in profile-index order.
    pub fn profiles(&self) -> Vec<PurchaseProfile> {
        let mut out = vec![vec![TargetSet::EMPTY; self.n]];
        for pair in &self.pairs {
            let mut next = Vec::with_capacity(out.len() * pair.combos.len());
            for partial in &out {
                for &(a, b) in &pair.combos {
                    let mut buys = partial.clone();
                    if a {
                        buys[pair.i].insert(pair.j);
                    }
                    if b {
                        buys[pair.j].insert(pair.i);
                    }
                    next.push(buys);
                }
            }
            out = next;
        }
        let mut profiles: Vec<PurchaseProfile> =
            out.into_iter().map(|b| PurchaseProfile::new(b).expect("pairs are in range")).collect();
        profiles.sort_by_key(profile_index);
        profiles
    }

    /// Minimum social cost over the equilibria (`None` if there are none).
    pub fn best_cost(&self) -> Option<Rational64> {
        self.extreme_cost(|a, b| a.min(b))
    }

    pub fn worst_cost(&self) -> Option<Rational64> {
        self.extreme_cost(|a, b| a.max(b))
    }

    fn extreme_cost(&self, pick: fn(Rational64, Rational64) -> Rational64) -> Option<Rational64> {
        let mut total = Rational64::zero();
        for pair in &self.pairs {
            let costs = pair.combos.iter().map(|&c| pair_cost(self.alpha, c));
            total += costs.reduce(pick)?;
        }
        Some(total)
    }

    /// Every social cost attained by some equilibrium, ascending.
    pub fn achievable_costs(&self) -> Vec<Rational64> {
        if !self.has_equilibrium() {
            return Vec::new();
        }
        let mut costs = vec![Rational64::zero()];
        for pair in &self.pairs {
            let mut next: Vec<Rational64> = costs
                .iter()
                .flat_map(|&c| pair.combos.iter().map(move |&combo| (c, combo)))
                .map(|(c, combo)| c + pair_cost(self.alpha, combo))
                .collect();
            next.sort();
            next.dedup();
            costs = next;
        }
        costs
    }

    /// Number of equilibria at each social cost, ascending by cost.
    pub fn cost_counts(&self) -> BTreeMap<Rational64, u128> {
        let mut counts = BTreeMap::from([(Rational64::zero(), 1u128)]);
        for pair in &self.pairs {
            let mut next = BTreeMap::new();
            for (&c, &k) in &counts {
                for &combo in &pair.combos {
                    *next.entry(c + pair_cost(self.alpha, combo)).or_insert(0) += k;
                }
            }
            counts = next;
        }
        counts
    }

    /// An equilibrium with the given social cost, if one exists. Pairs take
    /// the first feasible choice in the order no link, `j` pays, `i` pays,
    /// both pay, scanning from the last pair backwards.
    pub fn profile_with_cost(&self, target: Rational64) -> Option<PurchaseProfile> {
        let mut reachable = vec![BTreeSet::from([Rational64::zero()])];
        for pair in &self.pairs {
            let last = reachable.last().expect("non-empty");
            let next =
                last.iter().flat_map(|&c| pair.combos.iter().map(move |&k| c + pair_cost(self.alpha, k))).collect();
            reachable.push(next);
        }
        if !reachable.last().expect("non-empty").contains(&target) {
            return None;
        }
        let mut buys = vec![TargetSet::EMPTY; self.n];
        let mut remaining = target;
        for (k, pair) in self.pairs.iter().enumerate().rev() {
            let &(a, b) = pair
                .combos
                .iter()
                .find(|&&combo| reachable[k].contains(&(remaining - pair_cost(self.alpha, combo))))
                .expect("backtracking follows reachable costs");
            remaining -= pair_cost(self.alpha, (a, b));
            if a {
                buys[pair.i].insert(pair.j);
            }
            if b {
                buys[pair.j].insert(pair.i);
            }
        }
        Some(PurchaseProfile::new(buys).expect("pairs are in range"))
    }

    /// An equilibrium with the given social cost that differs from `avoid`
    /// in at least one purchase.
    pub fn other_profile_with_cost(&self, target: Rational64, avoid: &PurchaseProfile) -> Option<PurchaseProfile> {
        let fixed: Vec<(bool, bool)> =
            self.pairs.iter().map(|p| (avoid.buys(p.i).contains(p.j), avoid.buys(p.j).contains(p.i))).collect();
        // any[k]: prefix costs over the first k pairs; differ[k]: those whose
        // prefix deviates from `avoid`; same[k]: the cost of `avoid`'s prefix.
        let mut any = vec![BTreeSet::from([Rational64::zero()])];
        let mut differ = vec![BTreeSet::new()];
        let mut same = vec![Some(Rational64::zero())];
        for (k, pair) in self.pairs.iter().enumerate() {
            let cost = |c| pair_cost(self.alpha, c);
            any.push(any[k].iter().flat_map(|&c| pair.combos.iter().map(move |&x| c + cost(x))).collect());
            let mut d: BTreeSet<Rational64> =
                differ[k].iter().flat_map(|&c| pair.combos.iter().map(move |&x| c + cost(x))).collect();
            if let Some(s) = same[k] {
                d.extend(pair.combos.iter().filter(|&&x| x != fixed[k]).map(|&x| s + cost(x)));
            }
            differ.push(d);
            same.push(same[k].filter(|_| pair.combos.contains(&fixed[k])).map(|s| s + cost(fixed[k])));
        }
        if !differ[self.pairs.len()].contains(&target) {
            return None;
        }
        let mut buys = vec![TargetSet::EMPTY; self.n];
        let mut remaining = target;
        let mut need_diff = true;
        for (k, pair) in self.pairs.iter().enumerate().rev() {
            let feasible = |combo: (bool, bool)| {
                let rest = remaining - pair_cost(self.alpha, combo);
                if need_diff && combo == fixed[k] {
                    differ[k].contains(&rest)
                } else {
                    any[k].contains(&rest)
                }
            };
            let &(a, b) = pair.combos.iter().find(|&&c| feasible(c)).expect("backtracking follows reachable costs");
            need_diff &= (a, b) == fixed[k];
            remaining -= pair_cost(self.alpha, (a, b));
            if a {
                buys[pair.i].insert(pair.j);
            }
            if b {
                buys[pair.j].insert(pair.i);
            }
        }
        Some(PurchaseProfile::new(buys).expect("pairs are in range"))
    }
}

/// Change of `me`'s perceived cost from buying the link to `other`.
fn marginal(matrix: &SocialRangeMatrix, alpha: Rational64, me: usize, other: usize, other_buys: bool) -> Dual {
    let own = matrix.get(me, me);
    if other_buys {
        own.scale(alpha)
    } else {
        own.scale(alpha - 1) - matrix.get(me, other)
    }
}

/// Position of a profile in the canonical profile order (player 0 most significant).
pub fn profile_index(profile: &PurchaseProfile) -> u128 {
    let n = profile.n();
    let radix = 1u128 << (n - 1);
    (0..n).fold(0u128, |acc, i| acc * radix + u128::from(profile.buys(i).to_compact(i)))
}

/// A perceived equilibrium and its actual social cost.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PneEntry {
    pub profile: PurchaseProfile,
    #[serde(with = "crate::report::cost_json")]
    pub cost: Cost,
}

/// An induced topology and how many listed profiles induce it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyClass {
    pub edges: Vec<(usize, usize)>,
    pub multiplicity: usize,
    #[serde(with = "crate::report::cost_json")]
    pub min_cost: Cost,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimumEntry {
    /// One optimal profile; every link is paid by its lower endpoint.
    pub profile: PurchaseProfile,
    #[serde(with = "crate::report::cost_json")]
    pub cost: Cost,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub config: NetGameConfig,
    pub method: Method,
    /// The matrix is all zeros, so every profile is an equilibrium.
    pub degenerate: bool,
    pub pne: Vec<PneEntry>,
    pub optimum: OptimumEntry,
    #[serde(with = "crate::report::opt_cost_json")]
    pub worst_pne_cost: Option<Cost>,
    #[serde(with = "crate::report::opt_cost_json")]
    pub best_pne_cost: Option<Cost>,
    pub topologies: Vec<TopologyClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub socialization: Option<SocializationReport>,
}

impl EquilibriumReport {
    pub fn profiles(&self) -> impl Iterator<Item = &PurchaseProfile> {
        self.pne.iter().map(|e| &e.profile)
    }
}

fn social(game: &NetGame, profile: &PurchaseProfile) -> Cost {
    game.actual_costs(profile.strategies()).into_iter().sum()
}

fn check_matrix(config: &NetGameConfig, matrix: &SocialRangeMatrix) -> Result<()> {
    if matrix.n() != config.n {
        return Err(Error::DimensionMismatch { expected: config.n, actual: matrix.n() });
    }
    Ok(())
}

/// Perceived equilibria of a network creation game.
///
/// Full enumeration covers `(2^(n-1))^n` profiles and is limited to
/// `n ≤ 4`; linear radius-1 games use the per-pair decomposition, which
/// lists the same set and is allowed up to `n = 5`. `n_cap` lowers these
/// limits further.
pub fn enumerate_pne(
    config: &NetGameConfig,
    matrix: &SocialRangeMatrix,
    n_cap: usize,
    method: Method,
) -> Result<EquilibriumReport> {
    config.validate()?;
    check_matrix(config, matrix)?;
    let n = config.n;
    let resolved = match method {
        Method::Auto if config.is_r1_linear() => Method::EdgeDecomposition,
        Method::Auto => Method::Exhaustive,
        Method::EdgeDecomposition if !config.is_r1_linear() => {
            return Err(Error::Precondition("the per-pair decomposition needs linear g and R = 1".into()))
        }
        m => m,
    };
    let limit = if resolved == Method::EdgeDecomposition { DECOMPOSITION_LIMIT } else { EXHAUSTIVE_LIMIT };
    let cap = n_cap.min(limit);
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let game = NetGame::new(config.clone())?;
    let profiles: Vec<PurchaseProfile> = match resolved {
        Method::EdgeDecomposition => EdgeDecomposition::new(matrix, config.alpha).profiles(),
        _ => pne_set(&game, matrix)?
            .into_iter()
            .map(|s| PurchaseProfile::new(s).expect("strategy spaces avoid self-loops"))
            .collect(),
    };
    let pne: Vec<PneEntry> = profiles.into_iter().map(|p| PneEntry { cost: social(&game, &p), profile: p }).collect();
    let worst = pne.iter().map(|e| e.cost).max();
    let best = pne.iter().map(|e| e.cost).min();

    let optimum = brute_force_social_optimum(config)?;
    let optimum_profile = optimum.profile();
    let topologies = topology_classes(&pne);
    let socialization = worst.zip(best).map(|(w, b)| socialization_from_costs(w, b, optimum.cost));
    Ok(EquilibriumReport {
        config: config.clone(),
        method: resolved,
        degenerate: matrix.entries().iter().all(|w| w.is_zero()),
        pne,
        optimum: OptimumEntry { profile: optimum_profile, cost: optimum.cost },
        worst_pne_cost: worst,
        best_pne_cost: best,
        topologies,
        socialization,
    })
}

fn topology_classes(pne: &[PneEntry]) -> Vec<TopologyClass> {
    let mut index: HashMap<InducedGraph, usize> = HashMap::new();
    let mut classes: Vec<TopologyClass> = Vec::new();
    for entry in pne {
        let graph = induce_graph(&entry.profile);
        match index.get(&graph) {
            Some(&k) => {
                classes[k].multiplicity += 1;
                classes[k].min_cost = classes[k].min_cost.min(entry.cost);
            }
            None => {
                index.insert(graph.clone(), classes.len());
                classes.push(TopologyClass { edges: graph.edges(), multiplicity: 1, min_cost: entry.cost });
            }
        }
    }
    classes
}

/// Minimum social cost over all graphs, with the optimal graphs found.
#[derive(Clone, Debug, PartialEq)]
pub struct SocialOptimum {
    pub n: usize,
    pub cost: Cost,
    /// Optimal graphs in edge-subset order, at most [`MAX_RECORDED_OPTIMA`].
    pub graphs: Vec<InducedGraph>,
    /// Total number of optimal graphs.
    pub count: usize,
}

impl SocialOptimum {
    pub fn graph(&self) -> &InducedGraph {
        &self.graphs[0]
    }

    /// The first optimal graph with every link paid by its lower endpoint.
    pub fn profile(&self) -> PurchaseProfile {
        lower_endpoint_pays(self.graph())
    }
}

pub fn lower_endpoint_pays(graph: &InducedGraph) -> PurchaseProfile {
    let mut buys = vec![TargetSet::EMPTY; graph.n()];
    for (i, j) in graph.edges() {
        buys[i].insert(j);
    }
    PurchaseProfile::new(buys).expect("graph edges are in range")
}

fn pair_list(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

fn graph_from_mask(n: usize, pairs: &[(usize, usize)], mask: u64) -> InducedGraph {
    let mut g = InducedGraph::empty(n);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        if mask & (1 << k) != 0 {
            g.add_edge(i, j);
        }
    }
    g
}

/// Social cost of a graph when every link is paid once.
pub fn graph_social_cost(game: &NetGame, graph: &InducedGraph) -> Cost {
    let radius = game.config().radius;
    let mut total = game.alpha() * Scalar::int(graph.edge_count() as i64);
    for i in 0..graph.n() {
        total = total - game.g(crate::netgame::reach(graph, i, radius));
    }
    Dual::real(total)
}

/// Searches every edge subset. A double payment only adds `alpha`, so an
/// optimum never contains one and the search over simple graphs is complete.
pub fn brute_force_social_optimum(config: &NetGameConfig) -> Result<SocialOptimum> {
    config.validate()?;
    if config.n > OPTIMUM_LIMIT {
        return Err(Error::CapExceeded { n: config.n, cap: OPTIMUM_LIMIT });
    }
    let game = NetGame::new(config.clone())?;
    let n = config.n;
    let pairs = pair_list(n);
    let total: u64 = 1 << pairs.len();
    let chunk = total.min(1 << 12);
    let partials: Vec<(Cost, Vec<u64>, usize)> = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut best: Option<(Cost, Vec<u64>, usize)> = None;
            for mask in c * chunk..(c + 1) * chunk {
                let cost = graph_social_cost(&game, &graph_from_mask(n, &pairs, mask));
                merge_optimum(&mut best, (cost, vec![mask], 1));
            }
            best.expect("chunks are non-empty")
        })
        .collect();
    let mut best = None;
    for part in partials {
        merge_optimum(&mut best, part);
    }
    let (cost, masks, count) = best.expect("at least one graph");
    Ok(SocialOptimum { n, cost, graphs: masks.iter().map(|&m| graph_from_mask(n, &pairs, m)).collect(), count })
}

fn merge_optimum(best: &mut Option<(Cost, Vec<u64>, usize)>, (cost, masks, count): (Cost, Vec<u64>, usize)) {
    match best {
        None => *best = Some((cost, masks, count)),
        Some((c, m, k)) => {
            if cost < *c {
                *best = Some((cost, masks, count));
            } else if cost == *c {
                *k += count;
                let room = MAX_RECORDED_OPTIMA.saturating_sub(m.len());
                m.extend(masks.into_iter().take(room));
            }
        }
    }
}

/// Order in which players get to move.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// Players `0, 1, ..., n-1`, repeated.
    #[default]
    RoundRobin,
    /// The given sequence, repeated. Must name every player.
    Order(Vec<usize>),
}

impl Schedule {
    fn sequence(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            Schedule::RoundRobin => Ok((0..n).collect()),
            Schedule::Order(order) => {
                if let Some(&p) = order.iter().find(|&&p| p >= n) {
                    return Err(Error::PlayerOutOfRange { index: p, n });
                }
                if let Some(missing) = (0..n).find(|p| !order.contains(p)) {
                    return Err(Error::InvalidParameter(format!("schedule never lets player {missing} move")));
                }
                Ok(order.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsStep<S> {
    pub player: usize,
    pub from: S,
    pub to: S,
    #[serde(with = "crate::report::cost_json")]
    pub delta: Cost,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DynamicsOutcome<S> {
    /// A full pass without improvement; the profile is a perceived equilibrium.
    Converged { profile: Vec<S> },
    /// The profile after step `repeat_at` equals the one after step `first_seen`
    /// (step 0 being the initial profile).
    Cycle { first_seen: usize, repeat_at: usize, profile: Vec<S> },
    /// `max_steps` improving moves were made and another one is available.
    Cutoff { profile: Vec<S> },
}

impl<S> DynamicsOutcome<S> {
    pub fn profile(&self) -> &[S] {
        match self {
            DynamicsOutcome::Converged { profile }
            | DynamicsOutcome::Cycle { profile, .. }
            | DynamicsOutcome::Cutoff { profile } => profile,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, DynamicsOutcome::Converged { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsTrace<S> {
    pub initial: Vec<S>,
    pub steps: Vec<DynamicsStep<S>>,
    pub outcome: DynamicsOutcome<S>,
}

/// Best-response dynamics in any game.
///
/// Players move in schedule order, each switching to [`best_deviation`]
/// when it strictly lowers its perceived cost. Only improving moves count as
/// steps.
pub fn run_dynamics<G: Game>(
    game: &G,
    matrix: &SocialRangeMatrix,
    initial: Vec<G::Strategy>,
    schedule: &Schedule,
    max_steps: usize,
) -> Result<DynamicsTrace<G::Strategy>>
where
    G::Strategy: Hash,
{
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
    }
    let n = game.num_players();
    if initial.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: initial.len() });
    }
    let order = schedule.sequence(n)?;
    let mut profile = initial.clone();
    let mut seen: HashMap<Vec<G::Strategy>, usize> = HashMap::from([(profile.clone(), 0)]);
    let mut steps = Vec::new();
    let mut quiet = 0;
    for &player in order.iter().cycle() {
        if quiet >= order.len() {
            return Ok(DynamicsTrace { initial, steps, outcome: DynamicsOutcome::Converged { profile } });
        }
        let response = best_deviation(game, matrix, player, &profile)?;
        if !response.improves() {
            quiet += 1;
            continue;
        }
        if steps.len() == max_steps {
            return Ok(DynamicsTrace { initial, steps, outcome: DynamicsOutcome::Cutoff { profile } });
        }
        quiet = 0;
        let from = std::mem::replace(&mut profile[player], response.strategy.clone());
        steps.push(DynamicsStep { player, from, to: response.strategy, delta: response.delta });
        if let Some(&first_seen) = seen.get(&profile) {
            let repeat_at = steps.len();
            return Ok(DynamicsTrace {
                initial,
                steps,
                outcome: DynamicsOutcome::Cycle { first_seen, repeat_at, profile },
            });
        }
        seen.insert(profile.clone(), steps.len());
    }
    unreachable!("the schedule is non-empty")
}

pub fn best_response_dynamics(
    config: &NetGameConfig,
    matrix: &SocialRangeMatrix,
    initial: &PurchaseProfile,
    schedule: &Schedule,
    max_steps: usize,
) -> Result<DynamicsTrace<TargetSet>> {
    check_matrix(config, matrix)?;
    if initial.n() != config.n {
        return Err(Error::DimensionMismatch { expected: config.n, actual: initial.n() });
    }
    let game = NetGame::new(config.clone())?;
    run_dynamics(&game, matrix, initial.strategies().to_vec(), schedule, max_steps)
}

/// Whether nobody wants to leave the empty graph under selfish costs:
/// `g(x) ≤ x·α` for every `x` in `0..n`.
pub fn isolated_is_ne(config: &NetGameConfig) -> Result<bool> {
    let game = NetGame::new(config.clone())?;
    let alpha = game.alpha();
    Ok((0..config.n).all(|x| game.g(x) <= alpha * Scalar::int(x as i64)))
}

/// Whether every `2x`-regular graph is an equilibrium of the selfish radius-1
/// game: `g(2x) − g(x+y) ≥ α(x−y)` for every `y` in `0..n−x`.
///
/// `2x`-regular graphs exist only for `2x < n`; the condition is still
/// evaluated for `x = n/2`.
pub fn regular_ne_condition(config: &NetGameConfig, x: usize) -> Result<bool> {
    if config.radius != 1 {
        return Err(Error::Precondition(format!("the regular-graph condition needs R = 1, got R = {}", config.radius)));
    }
    if x > config.n / 2 {
        return Err(Error::InvalidParameter(format!("half-degree must be in 0..={}, got {x}", config.n / 2)));
    }
    let game = NetGame::new(config.clone())?;
    if 2 * x >= config.n {
        // g is tabulated on 0..n only; no 2x-regular graph exists here.
        return Ok(false);
    }
    let alpha = game.alpha();
    Ok((0..config.n - x).all(|y| game.g(2 * x) - game.g(x + y) >= alpha * Scalar::int(x as i64 - y as i64)))
}

/// Whether every tree of diameter at most `min(R, n−1)` is an equilibrium of
/// the selfish game: `g` strictly increasing on `0..n` and `α < g(n−1)`.
pub fn tree_ne_condition(config: &NetGameConfig) -> Result<bool> {
    if config.radius <= 1 {
        return Err(Error::Precondition(format!("the tree condition needs R > 1, got R = {}", config.radius)));
    }
    let game = NetGame::new(config.clone())?;
    let n = config.n;
    let increasing = (1..n).all(|x| game.g(x) > game.g(x - 1));
    Ok(increasing && n >= 2 && game.alpha() < game.g(n - 1))
}

/// Per-pair willingness in a linear radius-1 game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeDecision {
    IPays,
    JPays,
    BothWilling,
    Neither,
}

fn check_r1_linear(config: &NetGameConfig) -> Result<()> {
    if !config.is_r1_linear() {
        return Err(Error::Precondition("the per-link rule needs linear g and R = 1".into()));
    }
    Ok(())
}

/// Who would buy the link `{i, j}` if nobody else does. A player is willing
/// when `f_ii·(α−1) − f_ij ≤ 0`.
pub fn r1_linear_edge_rule(
    config: &NetGameConfig,
    matrix: &SocialRangeMatrix,
    i: usize,
    j: usize,
) -> Result<EdgeDecision> {
    check_r1_linear(config)?;
    check_matrix(config, matrix)?;
    matrix.check_player(i)?;
    matrix.check_player(j)?;
    if i == j {
        return Err(Error::InvalidParameter(format!("no link from player {i} to herself")));
    }
    let willing = |a: usize, b: usize| !marginal(matrix, config.alpha, a, b, false).is_positive();
    Ok(match (willing(i, j), willing(j, i)) {
        (true, true) => EdgeDecision::BothWilling,
        (true, false) => EdgeDecision::IPays,
        (false, true) => EdgeDecision::JPays,
        (false, false) => EdgeDecision::Neither,
    })
}

/// The profile built from [`r1_linear_edge_rule`]: each link is bought by its
/// willing endpoint, the lower index when both are willing.
///
/// This is a perceived equilibrium whenever every `f_ii ≥ 0`. With a
/// negative self-weight a player can want to buy a link exactly when the
/// other side does, and some matrices then have no equilibrium at all, so
/// such matrices are rejected.
pub fn edge_rule_profile(config: &NetGameConfig, matrix: &SocialRangeMatrix) -> Result<PurchaseProfile> {
    check_r1_linear(config)?;
    check_matrix(config, matrix)?;
    if let Some(i) = (0..matrix.n()).find(|&i| matrix.get(i, i).is_negative()) {
        return Err(Error::Precondition(format!("player {i} has a negative self-weight")));
    }
    let n = config.n;
    let mut buys = vec![TargetSet::EMPTY; n];
    for i in 0..n {
        for j in (i + 1)..n {
            match r1_linear_edge_rule(config, matrix, i, j)? {
                EdgeDecision::IPays | EdgeDecision::BothWilling => buys[i].insert(j),
                EdgeDecision::JPays => buys[j].insert(i),
                EdgeDecision::Neither => {}
            }
        }
    }
    PurchaseProfile::new(buys)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyEquilibrium {
    /// Symmetric 0/1 adjacency with a zero diagonal.
    pub adjacency: Vec<Vec<u8>>,
    pub profile: PurchaseProfile,
}

/// For a binary matrix with positive self-weights and `1 < α < 2`, the
/// graph linking `i` and `j` whenever `f_ij = 1` or `f_ji = 1` is an
/// equilibrium topology. Player `i` pays when `f_ij = 1`, the lower index
/// when both are 1.
///
/// Self-weights must also have standard part at most 1: a player that
/// weighs herself above `1/(α−1)` refuses even a friend's link.
pub fn adjacency_equilibrium(matrix: &SocialRangeMatrix, alpha: Rational64) -> Result<AdjacencyEquilibrium> {
    let n = matrix.n();
    if !(alpha > Rational64::one() && alpha < Rational64::from_integer(2)) {
        return Err(Error::Precondition(format!("alpha must lie strictly between 1 and 2, got {alpha}")));
    }
    for i in 0..n {
        let d = matrix.get(i, i);
        if !d.is_positive() || d.standard > Scalar::ONE {
            return Err(Error::Precondition(format!("self-weight of player {i} must lie in (0, 1], got {d}")));
        }
        for j in (0..n).filter(|&j| j != i) {
            let w = matrix.get(i, j);
            if w != Dual::ZERO && w != Dual::ONE {
                return Err(Error::Precondition(format!("entry ({i}, {j}) must be 0 or 1, got {w}")));
            }
        }
    }
    let mut adjacency = vec![vec![0u8; n]; n];
    let mut buys = vec![TargetSet::EMPTY; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (ij, ji) = (matrix.get(i, j) == Dual::ONE, matrix.get(j, i) == Dual::ONE);
            if ij || ji {
                adjacency[i][j] = 1;
                adjacency[j][i] = 1;
                if ij {
                    buys[i].insert(j);
                } else {
                    buys[j].insert(i);
                }
            }
        }
    }
    Ok(AdjacencyEquilibrium { adjacency, profile: PurchaseProfile::new(buys)? })
}

/// The `2x`-regular circulant profile checked by [`regular_ne_condition`].
pub fn circulant_profile(n: usize, x: usize) -> Result<PurchaseProfile> {
    if x == 0 {
        return make_profile(Shape::Isolated, n);
    }
    make_profile(Shape::Circulant { half_degree: x }, n)
}

/// Selfish-game configuration used by the closed-form conditions.
pub fn linear_config(n: usize, alpha: Rational64, radius: usize) -> NetGameConfig {
    NetGameConfig::new(n, alpha, radius, UtilitySpec::Linear)
}
