//! Game-agnostic machinery: strategy profiles, perceived costs, the perceived
//! Nash equilibrium test, best deviations, and social cost summaries.

use std::fmt::Debug;
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Cost, Dual, Scalar};
use crate::social_matrix::SocialRangeMatrix;

/// One strategy per player.
pub type StrategyProfile<S> = Vec<S>;

/// A finite game in cost form.
///
/// `strategies(i)` lists the strategy space of player `i` in its canonical
/// encoding order; this order drives every deterministic scan and tie-break.
pub trait Game: Sync {
    type Strategy: Clone + Eq + Hash + Debug + Send + Sync;

    fn num_players(&self) -> usize;

    fn strategies(&self, player: usize) -> Vec<Self::Strategy>;

    fn actual_cost(&self, player: usize, profile: &[Self::Strategy]) -> Cost;

    /// Actual costs of every player. Override when the costs share work.
    fn actual_costs(&self, profile: &[Self::Strategy]) -> Vec<Cost> {
        (0..self.num_players()).map(|i| self.actual_cost(i, profile)).collect()
    }

    /// Number of purchased items in a strategy, for games whose strategy
    /// spaces are set families. Used to prefer cheaper strategies on ties.
    fn purchase_count(&self, _strategy: &Self::Strategy) -> usize {
        0
    }
}

fn check_dimensions<G: Game>(game: &G, matrix: &SocialRangeMatrix, profile: &[G::Strategy]) -> Result<()> {
    let n = game.num_players();
    if matrix.n() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: matrix.n() });
    }
    if profile.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: profile.len() });
    }
    Ok(())
}

/// `Σ_j f_ij · costs[j]`, skipping zero weights.
pub fn perceived_from_costs(matrix: &SocialRangeMatrix, player: usize, costs: &[Cost]) -> Result<Cost> {
    let mut total = Dual::ZERO;
    for (weight, cost) in matrix.row(player).iter().zip(costs) {
        if !weight.is_zero() {
            total += weight.checked_mul(*cost)?;
        }
    }
    Ok(total)
}

pub fn perceived_cost<G: Game>(
    game: &G,
    matrix: &SocialRangeMatrix,
    player: usize,
    profile: &[G::Strategy],
) -> Result<Cost> {
    check_dimensions(game, matrix, profile)?;
    if player >= game.num_players() {
        return Err(Error::PlayerOutOfRange { index: player, n: game.num_players() });
    }
    perceived_from_costs(matrix, player, &game.actual_costs(profile))
}

/// Sum of actual costs.
pub fn social_cost<G: Game>(game: &G, profile: &[G::Strategy]) -> Cost {
    game.actual_costs(profile).into_iter().sum()
}

/// An improving unilateral deviation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deviation<S> {
    pub player: usize,
    pub strategy: S,
    /// Change of the deviating player's perceived cost (negative).
    pub delta: Cost,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PneCheck<S> {
    Equilibrium,
    Improvable(Deviation<S>),
}

impl<S> PneCheck<S> {
    pub fn is_equilibrium(&self) -> bool {
        matches!(self, PneCheck::Equilibrium)
    }

    pub fn witness(&self) -> Option<&Deviation<S>> {
        match self {
            PneCheck::Equilibrium => None,
            PneCheck::Improvable(d) => Some(d),
        }
    }
}

/// Tests whether `profile` is a perceived Nash equilibrium: no player can
/// strictly lower its perceived cost by replacing its strategy. On failure
/// the first improving deviation in scan order (players ascending, strategies
/// in encoding order) is returned.
pub fn is_pne<G: Game>(game: &G, matrix: &SocialRangeMatrix, profile: &[G::Strategy]) -> Result<PneCheck<G::Strategy>> {
    check_dimensions(game, matrix, profile)?;
    let base = game.actual_costs(profile);
    let mut scratch = profile.to_vec();
    for player in 0..game.num_players() {
        if matrix.row(player).iter().all(|w| w.is_zero()) {
            continue;
        }
        let current = perceived_from_costs(matrix, player, &base)?;
        for strategy in game.strategies(player) {
            if strategy == profile[player] {
                continue;
            }
            scratch[player] = strategy.clone();
            let candidate = perceived_from_costs(matrix, player, &game.actual_costs(&scratch))?;
            if candidate < current {
                return Ok(PneCheck::Improvable(Deviation { player, strategy, delta: candidate - current }));
            }
        }
        scratch[player] = profile[player].clone();
    }
    Ok(PneCheck::Equilibrium)
}

/// Result of a best-response computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BestResponse<S> {
    pub strategy: S,
    /// Perceived cost change relative to the current strategy (`<= 0`).
    pub delta: Cost,
}

impl<S> BestResponse<S> {
    pub fn improves(&self) -> bool {
        self.delta.is_negative()
    }
}

/// A perceived-cost minimizing strategy for `player`, others fixed.
///
/// The current strategy is kept whenever it is a minimizer. Otherwise ties
/// among minimizers go to the fewest purchases, then to the earliest
/// strategy in encoding order.
pub fn best_deviation<G: Game>(
    game: &G,
    matrix: &SocialRangeMatrix,
    player: usize,
    profile: &[G::Strategy],
) -> Result<BestResponse<G::Strategy>> {
    check_dimensions(game, matrix, profile)?;
    if player >= game.num_players() {
        return Err(Error::PlayerOutOfRange { index: player, n: game.num_players() });
    }
    let current = perceived_from_costs(matrix, player, &game.actual_costs(profile))?;
    let mut scratch = profile.to_vec();
    let mut best: Option<(Cost, usize, G::Strategy)> = None;
    for strategy in game.strategies(player) {
        scratch[player] = strategy.clone();
        let cost = perceived_from_costs(matrix, player, &game.actual_costs(&scratch))?;
        let purchases = game.purchase_count(&strategy);
        let better = match &best {
            None => true,
            Some((c, p, _)) => cost < *c || (cost == *c && purchases < *p),
        };
        if better {
            best = Some((cost, purchases, strategy));
        }
    }
    let (cost, _, strategy) = best.expect("strategy spaces are non-empty");
    if cost >= current {
        return Ok(BestResponse { strategy: profile[player].clone(), delta: Dual::ZERO });
    }
    Ok(BestResponse { strategy, delta: cost - current })
}

/// Mixed-radix enumeration of the full profile space; player 0 is the most
/// significant digit.
pub struct ProfileSpace<S> {
    spaces: Vec<Vec<S>>,
}

impl<S: Clone> ProfileSpace<S> {
    pub fn new<G: Game<Strategy = S>>(game: &G) -> Self {
        ProfileSpace { spaces: (0..game.num_players()).map(|i| game.strategies(i)).collect() }
    }

    /// Total number of profiles, `None` on overflow.
    pub fn len(&self) -> Option<usize> {
        self.spaces.iter().try_fold(1usize, |acc, s| acc.checked_mul(s.len()))
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn strategies(&self, player: usize) -> &[S] {
        &self.spaces[player]
    }

    pub fn profile(&self, mut index: usize) -> Vec<S> {
        let mut digits = vec![0; self.spaces.len()];
        for (player, space) in self.spaces.iter().enumerate().rev() {
            digits[player] = index % space.len();
            index /= space.len();
        }
        digits.iter().zip(&self.spaces).map(|(&d, s)| s[d].clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<S>> + '_ {
        (0..self.len().expect("profile space too large")).map(move |i| self.profile(i))
    }
}

/// Every perceived Nash equilibrium, in profile-index order.
///
/// The space is split by the first player's strategy across worker threads;
/// results are merged in index order.
pub fn pne_set<G: Game>(game: &G, matrix: &SocialRangeMatrix) -> Result<Vec<StrategyProfile<G::Strategy>>> {
    if matrix.n() != game.num_players() {
        return Err(Error::DimensionMismatch { expected: game.num_players(), actual: matrix.n() });
    }
    let space = ProfileSpace::new(game);
    let total = space.len().ok_or(Error::CapExceeded { n: game.num_players(), cap: 0 })?;
    let first = space.strategies(0).len();
    let block = total / first;
    let chunks: Vec<Result<Vec<Vec<G::Strategy>>>> = (0..first)
        .into_par_iter()
        .map(|lead| {
            let mut found = Vec::new();
            for index in lead * block..(lead + 1) * block {
                let profile = space.profile(index);
                if is_pne(game, matrix, &profile)?.is_equilibrium() {
                    found.push(profile);
                }
            }
            Ok(found)
        })
        .collect();
    let mut out = Vec::new();
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

/// Minimum and maximum social cost over the whole profile space, with every
/// profile attaining them.
#[derive(Clone, Debug)]
pub struct SocialExtrema<S> {
    pub min_cost: Cost,
    pub minimizers: Vec<StrategyProfile<S>>,
    pub max_cost: Cost,
    pub maximizers: Vec<StrategyProfile<S>>,
}

pub fn social_extrema<G: Game>(game: &G) -> SocialExtrema<G::Strategy> {
    let space = ProfileSpace::new(game);
    let mut ext: Option<SocialExtrema<G::Strategy>> = None;
    for profile in space.iter() {
        let cost = social_cost(game, &profile);
        match &mut ext {
            None => {
                ext = Some(SocialExtrema {
                    min_cost: cost,
                    minimizers: vec![profile.clone()],
                    max_cost: cost,
                    maximizers: vec![profile],
                })
            }
            Some(e) => {
                if cost < e.min_cost {
                    e.min_cost = cost;
                    e.minimizers = vec![profile.clone()];
                } else if cost == e.min_cost {
                    e.minimizers.push(profile.clone());
                }
                if cost > e.max_cost {
                    e.max_cost = cost;
                    e.maximizers = vec![profile];
                } else if cost == e.max_cost {
                    e.maximizers.push(profile);
                }
            }
        }
    }
    ext.expect("profile spaces are non-empty")
}

/// Worst and best equilibrium social cost against the optimum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocializationReport {
    #[serde(with = "crate::report::cost_json")]
    pub worst_pne_cost: Cost,
    #[serde(with = "crate::report::cost_json")]
    pub best_pne_cost: Cost,
    #[serde(with = "crate::report::cost_json")]
    pub optimum_cost: Cost,
    /// `worst / optimum` on standard parts; `None` when undefined.
    #[serde(with = "crate::report::opt_scalar_json")]
    pub ratio: Option<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_note: Option<String>,
}

/// Summarizes the socialization effect for a set of equilibria.
///
/// The ratio is reported only when both costs have non-zero standard parts of
/// the same sign; otherwise it is left undefined and the raw costs carry the
/// information.
pub fn effect_of_socialization<G: Game>(
    game: &G,
    pne_set: &[StrategyProfile<G::Strategy>],
    optimum_cost: Cost,
) -> Result<SocializationReport> {
    let costs: Vec<Cost> = pne_set.iter().map(|p| social_cost(game, p)).collect();
    let worst = *costs.iter().max().ok_or_else(|| Error::Precondition("empty equilibrium set".into()))?;
    let best = *costs.iter().min().expect("non-empty");
    Ok(socialization_from_costs(worst, best, optimum_cost))
}

pub fn socialization_from_costs(worst: Cost, best: Cost, optimum: Cost) -> SocializationReport {
    let (w, o) = (worst.standard, optimum.standard);
    let (ratio, ratio_note) = if o.is_zero() {
        (None, Some("optimum cost is zero".to_string()))
    } else if w.is_zero() || w.signum() != o.signum() {
        (None, Some("worst equilibrium and optimum costs differ in sign".to_string()))
    } else {
        (w.checked_div(o), None)
    };
    SocializationReport { worst_pne_cost: worst, best_pne_cost: best, optimum_cost: optimum, ratio, ratio_note }
}

/// A normal-form game given by an explicit cost table.
#[derive(Clone, Debug)]
pub struct TableGame {
    counts: Vec<usize>,
    /// `costs[profile_index][player]`, profile index as in [`ProfileSpace`].
    costs: Vec<Vec<Cost>>,
}

impl TableGame {
    pub fn new(counts: Vec<usize>, costs: Vec<Vec<Cost>>) -> Result<Self> {
        if counts.is_empty() || counts.contains(&0) {
            return Err(Error::InvalidParameter("every player needs at least one strategy".into()));
        }
        let total: usize = counts.iter().product();
        if costs.len() != total {
            return Err(Error::DimensionMismatch { expected: total, actual: costs.len() });
        }
        if let Some(row) = costs.iter().find(|r| r.len() != counts.len()) {
            return Err(Error::DimensionMismatch { expected: counts.len(), actual: row.len() });
        }
        Ok(TableGame { counts, costs })
    }

    fn index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.counts).fold(0, |acc, (&s, &c)| acc * c + s)
    }
}

impl Game for TableGame {
    type Strategy = usize;

    fn num_players(&self) -> usize {
        self.counts.len()
    }

    fn strategies(&self, player: usize) -> Vec<usize> {
        (0..self.counts[player]).collect()
    }

    fn actual_cost(&self, player: usize, profile: &[usize]) -> Cost {
        self.costs[self.index(profile)][player]
    }

    fn actual_costs(&self, profile: &[usize]) -> Vec<Cost> {
        self.costs[self.index(profile)].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    /// Prisoner's dilemma in cost form: 0 = cooperate, 1 = defect.
    fn dilemma() -> TableGame {
        let c = |a: i64, b: i64| vec![Dual::int(a), Dual::int(b)];
        TableGame::new(vec![2, 2], vec![c(1, 1), c(3, 0), c(0, 3), c(2, 2)]).unwrap()
    }

    #[test]
    fn identity_gives_classic_nash() {
        let g = dilemma();
        let id = SocialRangeMatrix::identity(2).unwrap();
        assert_eq!(pne_set(&g, &id).unwrap(), vec![vec![1, 1]]);
        for p in ProfileSpace::new(&g).iter() {
            for i in 0..2 {
                assert_eq!(perceived_cost(&g, &id, i, &p).unwrap(), g.actual_cost(i, &p));
            }
        }
    }

    #[test]
    fn altruism_fixes_the_dilemma() {
        let g = dilemma();
        let ones = SocialRangeMatrix::filled(2, Dual::ONE).unwrap();
        for p in ProfileSpace::new(&g).iter() {
            assert_eq!(perceived_cost(&g, &ones, 0, &p).unwrap(), social_cost(&g, &p));
        }
        assert_eq!(pne_set(&g, &ones).unwrap(), vec![vec![0, 0]]);
    }

    #[test]
    fn zero_matrix_makes_everything_an_equilibrium() {
        let g = dilemma();
        let zero = SocialRangeMatrix::zeros(2).unwrap();
        assert_eq!(pne_set(&g, &zero).unwrap().len(), 4);
    }

    #[test]
    fn witness_is_first_improving_deviation() {
        let g = dilemma();
        let id = SocialRangeMatrix::identity(2).unwrap();
        let check = is_pne(&g, &id, &[0, 0]).unwrap();
        assert_eq!(check.witness(), Some(&Deviation { player: 0, strategy: 1, delta: Dual::int(-1) }));
    }

    #[test]
    fn best_deviation_keeps_current_minimizer() {
        let g = dilemma();
        let id = SocialRangeMatrix::identity(2).unwrap();
        let br = best_deviation(&g, &id, 0, &[1, 1]).unwrap();
        assert_eq!(br, BestResponse { strategy: 1, delta: Dual::ZERO });
        let br = best_deviation(&g, &id, 1, &[0, 0]).unwrap();
        assert_eq!(br, BestResponse { strategy: 1, delta: Dual::int(-1) });
    }

    #[test]
    fn dimension_and_epsilon_errors() {
        let g = dilemma();
        let id3 = SocialRangeMatrix::identity(3).unwrap();
        assert!(matches!(perceived_cost(&g, &id3, 0, &[0, 0]), Err(Error::DimensionMismatch { .. })));

        let eps_game = TableGame::new(vec![1], vec![vec![Dual::new(1, 1)]]).unwrap();
        let eps_matrix = SocialRangeMatrix::filled(1, Dual::EPS).unwrap();
        assert!(matches!(perceived_cost(&eps_game, &eps_matrix, 0, &[0]), Err(Error::EpsilonSquared)));
    }

    #[test]
    fn socialization_ratio_rules() {
        let r = socialization_from_costs(Dual::ratio(-3, 2), Dual::ratio(-3, 2), Dual::int(-3));
        assert_eq!(r.ratio, Some(Scalar::Exact(rat(1, 2))));
        let r = socialization_from_costs(Dual::ZERO, Dual::ZERO, Dual::int(-3));
        assert_eq!(r.ratio, None);
        assert!(r.ratio_note.is_some());
        let r = socialization_from_costs(Dual::int(1), Dual::int(1), Dual::ZERO);
        assert_eq!(r.ratio, None);
    }

    #[test]
    fn empty_equilibrium_set_is_rejected() {
        assert!(matches!(effect_of_socialization(&dilemma(), &[], Dual::ZERO), Err(Error::Precondition(_))));
    }

    #[test]
    fn extrema_of_dilemma() {
        let e = social_extrema(&dilemma());
        assert_eq!(e.min_cost, Dual::int(2));
        assert_eq!(e.minimizers, vec![vec![0, 0]]);
        assert_eq!(e.max_cost, Dual::int(4));
        assert_eq!(e.maximizers, vec![vec![1, 1]]);
    }
}
