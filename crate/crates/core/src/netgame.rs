//! The network creation game.
//!
//! Each player buys a set of undirected links to other players at price
//! `alpha` per link and benefits from the number of players within `radius`
//! hops:
//!
//! ```text
//! c_a(i, s) = alpha · s_i − g(Σ_{j=1..R} |Γ^j(i, s)|)
//! ```
//!
//! A link exists when at least one endpoint pays for it; both endpoints may
//! pay, in which case both payments are charged.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game_core::Game;
use crate::report::{rational_from_json, rational_string};
use crate::scalar::{Cost, Dual, Scalar};

/// Largest supported player count (link sets are bitmasks).
pub const MAX_PLAYERS: usize = 32;

/// The utility `g` of reaching a given number of players. `g(0) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UtilitySpec {
    Linear,
    Power(Rational64),
    Sqrt,
    /// `values[x] = g(x)` for `x = 0..n`.
    Table(Vec<Rational64>),
}

impl UtilitySpec {
    /// Whether the utility can only be evaluated in floating point.
    pub fn needs_float(&self) -> bool {
        match self {
            UtilitySpec::Sqrt => true,
            UtilitySpec::Power(p) => !p.is_integer(),
            _ => false,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct UtilityFile {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<serde_json::Value>>,
}

impl Serialize for UtilitySpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let str_value = |r: &Rational64| serde_json::Value::String(r.to_string());
        let file = match self {
            UtilitySpec::Linear => UtilityFile { kind: "linear".into(), p: None, values: None },
            UtilitySpec::Sqrt => UtilityFile { kind: "sqrt".into(), p: None, values: None },
            UtilitySpec::Power(p) => UtilityFile { kind: "power".into(), p: Some(str_value(p)), values: None },
            UtilitySpec::Table(v) => {
                UtilityFile { kind: "table".into(), p: None, values: Some(v.iter().map(str_value).collect()) }
            }
        };
        file.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UtilitySpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = UtilityFile::deserialize(d)?;
        match file.kind.as_str() {
            "linear" => Ok(UtilitySpec::Linear),
            "sqrt" => Ok(UtilitySpec::Sqrt),
            "power" => {
                let p = file.p.ok_or_else(|| D::Error::custom("power utility needs `p`"))?;
                Ok(UtilitySpec::Power(rational_from_json(&p).map_err(D::Error::custom)?))
            }
            "table" => {
                let values = file.values.ok_or_else(|| D::Error::custom("table utility needs `values`"))?;
                let values = values.iter().map(rational_from_json).collect::<Result<Vec<_>>>();
                Ok(UtilitySpec::Table(values.map_err(D::Error::custom)?))
            }
            other => Err(D::Error::custom(format!("unknown utility kind `{other}`"))),
        }
    }
}

/// Parameters of one network creation game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetGameConfig {
    pub n: usize,
    #[serde(with = "rational_string")]
    pub alpha: Rational64,
    #[serde(rename = "R")]
    pub radius: usize,
    pub g: UtilitySpec,
}

impl NetGameConfig {
    pub fn new(n: usize, alpha: Rational64, radius: usize, g: UtilitySpec) -> Self {
        NetGameConfig { n, alpha, radius, g }
    }

    /// Linear utility, radius 1.
    pub fn linear(n: usize, alpha: Rational64) -> Self {
        Self::new(n, alpha, 1, UtilitySpec::Linear)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_PLAYERS {
            return Err(Error::InvalidParameter(format!("player count must be in 1..={MAX_PLAYERS}, got {}", self.n)));
        }
        if self.alpha < Rational64::zero() {
            return Err(Error::InvalidParameter(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        match &self.g {
            UtilitySpec::Power(p) if *p <= Rational64::zero() => {
                Err(Error::InvalidParameter(format!("power exponent must be positive, got {p}")))
            }
            UtilitySpec::Table(values) if values.len() != self.n => Err(Error::InvalidParameter(format!(
                "utility table needs exactly {} values, got {}",
                self.n,
                values.len()
            ))),
            UtilitySpec::Table(values) if !values[0].is_zero() => {
                Err(Error::InvalidParameter("utility table must start with g(0) = 0".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn is_r1_linear(&self) -> bool {
        self.radius == 1 && self.g == UtilitySpec::Linear
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: NetGameConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}

/// Whether costs are kept as exact rationals or as floats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostMode {
    Exact,
    Float,
}

/// A validated game with the utility tabulated for `x = 0..n`.
#[derive(Clone, Debug)]
pub struct NetGame {
    config: NetGameConfig,
    utility: Vec<Scalar>,
    mode: CostMode,
}

impl NetGame {
    /// Uses exact arithmetic unless the utility requires floats.
    pub fn new(config: NetGameConfig) -> Result<Self> {
        let mode = if config.g.needs_float() { CostMode::Float } else { CostMode::Exact };
        Self::with_mode(config, mode)
    }

    pub fn with_mode(config: NetGameConfig, mode: CostMode) -> Result<Self> {
        config.validate()?;
        if mode == CostMode::Exact && config.g.needs_float() {
            return Err(Error::FloatModeOnly);
        }
        let utility = (0..config.n).map(|x| utility_value(&config.g, x, mode)).collect::<Result<Vec<_>>>()?;
        Ok(NetGame { config, utility, mode })
    }

    pub fn config(&self) -> &NetGameConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn mode(&self) -> CostMode {
        self.mode
    }

    /// `g(x)` for `x < n`.
    pub fn g(&self, x: usize) -> Scalar {
        self.utility[x]
    }

    pub fn alpha(&self) -> Scalar {
        match self.mode {
            CostMode::Exact => Scalar::Exact(self.config.alpha),
            CostMode::Float => Scalar::Float(self.config.alpha.to_f64().unwrap_or(f64::NAN)),
        }
    }

    fn check_profile(&self, profile: &PurchaseProfile) -> Result<()> {
        if profile.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), actual: profile.n() });
        }
        Ok(())
    }

    fn cost_from_graph(&self, graph: &InducedGraph, payments: usize, player: usize) -> Cost {
        let reach = reach(graph, player, self.config.radius);
        Dual::real(self.alpha() * Scalar::int(payments as i64) - self.g(reach))
    }
}

fn utility_value(g: &UtilitySpec, x: usize, mode: CostMode) -> Result<Scalar> {
    let xi = x as i64;
    let exact = match g {
        UtilitySpec::Linear => Some(Rational64::from_integer(xi)),
        UtilitySpec::Table(values) => Some(values[x]),
        UtilitySpec::Power(p) if p.is_integer() => {
            let e = p.to_integer();
            let e = u32::try_from(e).map_err(|_| Error::InvalidParameter(format!("exponent {p} too large")))?;
            let v = xi.checked_pow(e).ok_or_else(|| Error::InvalidParameter(format!("{x}^{e} overflows")))?;
            Some(Rational64::from_integer(v))
        }
        UtilitySpec::Power(_) | UtilitySpec::Sqrt => None,
    };
    Ok(match (exact, mode) {
        (Some(r), CostMode::Exact) => Scalar::Exact(r),
        (Some(r), CostMode::Float) => Scalar::Float(r.to_f64().unwrap_or(f64::NAN)),
        (None, _) => {
            let xf = x as f64;
            Scalar::Float(match g {
                UtilitySpec::Sqrt => xf.sqrt(),
                UtilitySpec::Power(p) => xf.powf(p.to_f64().unwrap_or(f64::NAN)),
                _ => unreachable!(),
            })
        }
    })
}

/// A set of link targets, stored as a bitmask over player indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TargetSet(pub u32);

impl TargetSet {
    pub const EMPTY: TargetSet = TargetSet(0);

    pub fn from_targets(targets: impl IntoIterator<Item = usize>) -> Self {
        TargetSet(targets.into_iter().fold(0, |m, j| m | (1 << j)))
    }

    pub fn contains(self, j: usize) -> bool {
        self.0 & (1 << j) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn insert(&mut self, j: usize) {
        self.0 |= 1 << j;
    }

    pub fn remove(&mut self, j: usize) {
        self.0 &= !(1 << j);
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&j| self.contains(j))
    }

    /// Expands a compact index over the other `n - 1` players into a set
    /// that skips `player`.
    pub fn from_compact(player: usize, compact: u32) -> Self {
        let low = compact & ((1u32 << player) - 1);
        let high = (compact >> player) << (player + 1);
        TargetSet(low | high)
    }

    /// Inverse of [`TargetSet::from_compact`]: the strategy index of this set
    /// in `player`'s strategy space.
    pub fn to_compact(self, player: usize) -> u32 {
        let low = self.0 & ((1u32 << player) - 1);
        let high = (self.0 >> (player + 1)) << player;
        low | high
    }
}

impl Serialize for TargetSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for TargetSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let targets = Vec::<usize>::deserialize(d)?;
        if let Some(bad) = targets.iter().find(|&&j| j >= MAX_PLAYERS) {
            return Err(D::Error::custom(format!("target {bad} out of range")));
        }
        Ok(TargetSet::from_targets(targets))
    }
}

/// Per-player purchased links. Invariants: no self-loops, targets `< n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PurchaseProfile {
    buys: Vec<TargetSet>,
}

impl PurchaseProfile {
    pub fn new(buys: Vec<TargetSet>) -> Result<Self> {
        let n = buys.len();
        if n == 0 || n > MAX_PLAYERS {
            return Err(Error::InvalidParameter(format!("player count must be in 1..={MAX_PLAYERS}, got {n}")));
        }
        for (i, set) in buys.iter().enumerate() {
            if set.contains(i) {
                return Err(Error::InvalidParameter(format!("player {i} buys a link to herself")));
            }
            if let Some(j) = set.iter().find(|&j| j >= n) {
                return Err(Error::PlayerOutOfRange { index: j, n });
            }
        }
        Ok(PurchaseProfile { buys })
    }

    pub fn from_lists(lists: &[&[usize]]) -> Result<Self> {
        Self::new(lists.iter().map(|l| TargetSet::from_targets(l.iter().copied())).collect())
    }

    pub fn empty(n: usize) -> Self {
        PurchaseProfile { buys: vec![TargetSet::EMPTY; n] }
    }

    pub fn n(&self) -> usize {
        self.buys.len()
    }

    pub fn buys(&self, i: usize) -> TargetSet {
        self.buys[i]
    }

    pub fn strategies(&self) -> &[TargetSet] {
        &self.buys
    }

    pub fn into_strategies(self) -> Vec<TargetSet> {
        self.buys
    }

    /// Number of links player `i` pays for.
    pub fn payments(&self, i: usize) -> usize {
        self.buys[i].len()
    }

    pub fn total_payments(&self) -> usize {
        self.buys.iter().map(|b| b.len()).sum()
    }

    /// Links `{i, j}` paid by both endpoints, as `(i, j)` with `i < j`.
    pub fn double_payments(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.buys[i].contains(j) && self.buys[j].contains(i))
            .collect()
    }

    /// Who pays for `{i, j}`.
    pub fn payers(&self, i: usize, j: usize) -> Vec<usize> {
        let mut payers = Vec::new();
        if self.buys[i].contains(j) {
            payers.push(i);
        }
        if self.buys[j].contains(i) {
            payers.push(j);
        }
        payers.sort_unstable();
        payers
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl From<PurchaseProfile> for Vec<TargetSet> {
    fn from(p: PurchaseProfile) -> Self {
        p.buys
    }
}

impl TryFrom<Vec<TargetSet>> for PurchaseProfile {
    type Error = Error;
    fn try_from(buys: Vec<TargetSet>) -> Result<Self> {
        PurchaseProfile::new(buys)
    }
}

#[derive(Serialize, Deserialize)]
struct ProfileFile {
    n: usize,
    strategies: Vec<TargetSet>,
}

impl Serialize for PurchaseProfile {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProfileFile { n: self.n(), strategies: self.buys.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PurchaseProfile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = ProfileFile::deserialize(d)?;
        if file.strategies.len() != file.n {
            return Err(D::Error::custom(format!(
                "declared n={} but found {} strategies",
                file.n,
                file.strategies.len()
            )));
        }
        PurchaseProfile::new(file.strategies).map_err(D::Error::custom)
    }
}

impl fmt::Display for PurchaseProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .buys
            .iter()
            .enumerate()
            .map(|(i, b)| format!("{i}:{{{}}}", b.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// The simple undirected graph a profile induces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InducedGraph {
    adj: Vec<u32>,
}

impl InducedGraph {
    pub fn empty(n: usize) -> Self {
        InducedGraph { adj: vec![0; n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::PlayerOutOfRange { index: i.max(j), n });
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop at {i}")));
            }
            g.add_edge(i, j);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        self.adj[i] |= 1 << j;
        self.adj[j] |= 1 << i;
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) {
        self.adj[i] &= !(1 << j);
        self.adj[j] &= !(1 << i);
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i] & (1 << j) != 0
    }

    pub fn neighbors(&self, i: usize) -> u32 {
        self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].count_ones() as usize
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).filter(|&(i, j)| self.has_edge(i, j)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[source] = Some(0);
        let mut visited = 1u32 << source;
        let mut frontier = visited;
        let mut depth = 0;
        while frontier != 0 {
            depth += 1;
            let mut next = 0u32;
            for v in (0..self.n()).filter(|&v| frontier & (1 << v) != 0) {
                next |= self.adj[v];
            }
            next &= !visited;
            for v in (0..self.n()).filter(|&v| next & (1 << v) != 0) {
                dist[v] = Some(depth);
            }
            visited |= next;
            frontier = next;
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.distances(0).iter().all(Option::is_some)
    }

    /// Largest finite hop distance, `None` when disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.n() {
            for d in self.distances(s) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.edge_count() + 1 == self.n()
    }

    pub fn is_regular(&self, degree: usize) -> bool {
        (0..self.n()).all(|i| self.degree(i) == degree)
    }
}

/// Link `{i, j}` exists iff at least one endpoint bought it.
pub fn induce_graph(profile: &PurchaseProfile) -> InducedGraph {
    let mut g = InducedGraph::empty(profile.n());
    for (i, set) in profile.buys.iter().enumerate() {
        for j in set.iter() {
            g.add_edge(i, j);
        }
    }
    g
}

/// BFS layer sizes around one player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodProfile {
    /// `counts[d - 1]` = number of players at hop distance exactly `d`, for
    /// `d = 1..=min(R, n - 1)`. Layers beyond `n - 1` are always empty and
    /// are not stored.
    pub counts: Vec<usize>,
}

impl NeighborhoodProfile {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Size of layer `d` (1-based); 0 beyond the stored layers.
    pub fn layer(&self, d: usize) -> usize {
        if d == 0 {
            return 0;
        }
        self.counts.get(d - 1).copied().unwrap_or(0)
    }
}

pub fn neighborhood_counts(graph: &InducedGraph, player: usize, radius: usize) -> NeighborhoodProfile {
    let layers = radius.min(graph.n().saturating_sub(1));
    let mut counts = vec![0; layers];
    let mut visited = 1u32 << player;
    let mut frontier = visited;
    for count in counts.iter_mut() {
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= graph.adj[v];
        }
        next &= !visited;
        *count = next.count_ones() as usize;
        if next == 0 {
            break;
        }
        visited |= next;
        frontier = next;
    }
    NeighborhoodProfile { counts }
}

/// `Σ_{d=1..R} |Γ^d(player)|`: players within `radius` hops, excluding `player`.
pub fn reach(graph: &InducedGraph, player: usize, radius: usize) -> usize {
    if radius == 0 {
        return 0;
    }
    if radius == 1 {
        return graph.degree(player);
    }
    let mut visited = 1u32 << player;
    let mut frontier = visited;
    for _ in 0..radius {
        let mut next = 0u32;
        let mut f = frontier;
        while f != 0 {
            let v = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= graph.adj[v];
        }
        next &= !visited;
        if next == 0 {
            break;
        }
        visited |= next;
        frontier = next;
    }
    visited.count_ones() as usize - 1
}

/// `c_a(i, s) = alpha · s_i − g(reach_R(i))`.
pub fn actual_cost(game: &NetGame, profile: &PurchaseProfile, player: usize) -> Result<Cost> {
    game.check_profile(profile)?;
    if player >= game.n() {
        return Err(Error::PlayerOutOfRange { index: player, n: game.n() });
    }
    Ok(game.cost_from_graph(&induce_graph(profile), profile.payments(player), player))
}

impl Game for NetGame {
    type Strategy = TargetSet;

    fn num_players(&self) -> usize {
        self.config.n
    }

    /// All subsets of the other players, ordered by their compact index.
    fn strategies(&self, player: usize) -> Vec<TargetSet> {
        (0..1u32 << (self.config.n - 1)).map(|c| TargetSet::from_compact(player, c)).collect()
    }

    fn actual_cost(&self, player: usize, profile: &[TargetSet]) -> Cost {
        self.actual_costs(profile)[player]
    }

    fn actual_costs(&self, profile: &[TargetSet]) -> Vec<Cost> {
        let mut graph = InducedGraph::empty(profile.len());
        for (i, set) in profile.iter().enumerate() {
            for j in set.iter() {
                graph.add_edge(i, j);
            }
        }
        (0..profile.len()).map(|i| self.cost_from_graph(&graph, profile[i].len(), i)).collect()
    }

    fn purchase_count(&self, strategy: &TargetSet) -> usize {
        strategy.len()
    }
}

/// A payment of `payer` for the link to `target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payment {
    pub payer: usize,
    pub target: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedundancyReport {
    /// Links whose removal, alone, leaves every player's reach unchanged.
    pub edges: Vec<(usize, usize)>,
    /// The second payment of every doubly-paid link (the higher-indexed payer's).
    pub duplicate_payments: Vec<Payment>,
}

pub fn redundant_edges(game: &NetGame, profile: &PurchaseProfile) -> Result<RedundancyReport> {
    game.check_profile(profile)?;
    let radius = game.config.radius;
    let graph = induce_graph(profile);
    let reaches: Vec<usize> = (0..graph.n()).map(|i| reach(&graph, i, radius)).collect();
    let mut edges = Vec::new();
    for (i, j) in graph.edges() {
        let mut without = graph.clone();
        without.remove_edge(i, j);
        if (0..graph.n()).all(|v| reach(&without, v, radius) == reaches[v]) {
            edges.push((i, j));
        }
    }
    let duplicate_payments =
        profile.double_payments().into_iter().map(|(i, j)| Payment { payer: j, target: i }).collect();
    Ok(RedundancyReport { edges, duplicate_payments })
}

/// Canonical profile shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Isolated,
    /// Player `i` buys the links to every `j > i`.
    Clique,
    /// Every other player buys the link to `center`.
    Star {
        center: usize,
    },
    /// Player `i` buys links to `i+1, ..., i+x (mod n)`.
    Circulant {
        half_degree: usize,
    },
    /// A star at player 0, each leaf paying its own link: the minimum-diameter tree.
    BoundedTree,
}

pub fn make_profile(shape: Shape, n: usize) -> Result<PurchaseProfile> {
    if n == 0 || n > MAX_PLAYERS {
        return Err(Error::InvalidParameter(format!("player count must be in 1..={MAX_PLAYERS}, got {n}")));
    }
    let mut buys = vec![TargetSet::EMPTY; n];
    match shape {
        Shape::Isolated => {}
        Shape::Clique => {
            for (i, set) in buys.iter_mut().enumerate() {
                *set = TargetSet::from_targets((i + 1)..n);
            }
        }
        Shape::Star { center } => {
            if center >= n {
                return Err(Error::PlayerOutOfRange { index: center, n });
            }
            for (i, set) in buys.iter_mut().enumerate() {
                if i != center {
                    set.insert(center);
                }
            }
        }
        Shape::Circulant { half_degree: x } => {
            if x == 0 || x > n / 2 {
                return Err(Error::InvalidParameter(format!(
                    "circulant half-degree must be in 1..={}, got {x}",
                    n / 2
                )));
            }
            for (i, set) in buys.iter_mut().enumerate() {
                *set = TargetSet::from_targets((1..=x).map(|d| (i + d) % n));
            }
        }
        Shape::BoundedTree => {
            if n < 2 {
                return Err(Error::InvalidParameter("a bounded tree needs at least 2 players".into()));
            }
            return make_profile(Shape::Star { center: 0 }, n);
        }
    }
    PurchaseProfile::new(buys)
}

/// Undirected DOT rendering; each link records its payer(s).
pub fn to_dot(profile: &PurchaseProfile) -> String {
    let graph = induce_graph(profile);
    let mut out = String::from("graph topology {\n");
    for i in 0..profile.n() {
        out.push_str(&format!("  {i};\n"));
    }
    for (i, j) in graph.edges() {
        let payers: Vec<String> = profile.payers(i, j).iter().map(ToString::to_string).collect();
        out.push_str(&format!("  {i} -- {j} [payer=\"{}\"];\n", payers.join(",")));
    }
    out.push_str("}\n");
    out
}

/// A link read back from DOT.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DotEdge {
    pub a: usize,
    pub b: usize,
    pub payers: Vec<usize>,
}

/// Reads the edge list of a graph written by [`to_dot`].
pub fn parse_dot_edges(text: &str) -> Result<Vec<DotEdge>> {
    let mut edges = Vec::new();
    for line in text.lines().map(str::trim) {
        let Some((lhs, rhs)) = line.split_once("--") else { continue };
        let a: usize = lhs.trim().parse().map_err(|_| Error::Parse(format!("bad DOT edge `{line}`")))?;
        let rhs = rhs.trim().trim_end_matches(';');
        let (b_text, attrs) = match rhs.split_once('[') {
            Some((b, attrs)) => (b.trim(), attrs.trim_end_matches(']')),
            None => (rhs.trim(), ""),
        };
        let b: usize = b_text.parse().map_err(|_| Error::Parse(format!("bad DOT edge `{line}`")))?;
        let payers = attrs
            .split_once("payer=\"")
            .and_then(|(_, rest)| rest.split_once('"'))
            .map(|(list, _)| {
                list.split(',')
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<std::result::Result<Vec<usize>, _>>()
            })
            .transpose()
            .map_err(|_| Error::Parse(format!("bad payer attribute in `{line}`")))?
            .unwrap_or_default();
        edges.push(DotEdge { a, b, payers });
    }
    Ok(edges)
}

/// Distinct induced topologies of a profile list with their multiplicities,
/// in order of first appearance.
pub fn topology_classes<'a>(profiles: impl IntoIterator<Item = &'a PurchaseProfile>) -> Vec<(InducedGraph, usize)> {
    let mut classes: Vec<(InducedGraph, usize)> = Vec::new();
    let mut seen = BTreeSet::new();
    for p in profiles {
        let g = induce_graph(p);
        if seen.insert(g.clone()) {
            classes.push((g, 1));
        } else if let Some(c) = classes.iter_mut().find(|(h, _)| *h == g) {
            c.1 += 1;
        }
    }
    classes
}
