//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any fails.

use std::collections::VecDeque;
use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use socialnet_core::analysis::{
    anarchy_closed_form, anarchy_vs_monarchy, monarchy_closed_form, optimum_closed_form, single_and_double_flips,
    windfall_experiment, FlipDirection,
};
use socialnet_core::equilibrium::{
    adjacency_equilibrium, brute_force_social_optimum, circulant_profile, edge_rule_profile, isolated_is_ne,
    linear_config, regular_ne_condition, tree_ne_condition, EdgeDecomposition,
};
use socialnet_core::game_core::{is_pne, pne_set, social_extrema};
use socialnet_core::netgame::{make_profile, neighborhood_counts, InducedGraph, Shape};
use socialnet_core::social_matrix::scale_row;
use socialnet_core::{rat, Dual, NetGame, NetGameConfig, PurchaseProfile, SocialRangeMatrix, UtilitySpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const ALPHAS: [(i64, i64); 6] = [(1, 4), (1, 2), (1, 1), (3, 2), (2, 1), (3, 1)];

fn alphas() -> impl Iterator<Item = Rational64> {
    ALPHAS.iter().map(|&(p, q)| rat(p, q))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn binary_matrix(n: usize, mask: u64, diagonal: Dual) -> SocialRangeMatrix {
    let mut f = SocialRangeMatrix::zeros(n).unwrap();
    let mut bit = 0;
    for i in 0..n {
        f.set(i, i, diagonal);
        for j in (0..n).filter(|&j| j != i) {
            if mask & (1 << bit) != 0 {
                f.set(i, j, Dual::ONE);
            }
            bit += 1;
        }
    }
    f
}

fn profiles(game: &NetGame, f: &SocialRangeMatrix) -> Vec<PurchaseProfile> {
    pne_set(game, f).unwrap().into_iter().map(|s| PurchaseProfile::new(s).unwrap()).collect()
}

fn selfish_equilibrium(config: &NetGameConfig, profile: &PurchaseProfile) -> bool {
    let game = NetGame::new(config.clone()).unwrap();
    let id = SocialRangeMatrix::identity(config.n).unwrap();
    is_pne(&game, &id, profile.strategies()).unwrap().is_equilibrium()
}

fn welfare_closed_forms() -> Outcome {
    let start = Instant::now();
    let mut misses = Vec::new();
    let mut points = 0;
    for n in 2..=6 {
        for alpha in alphas() {
            points += 1;
            let c = anarchy_vs_monarchy(n, alpha).map_err(|e| e.to_string())?;
            let checks = [
                ("anarchy", c.anarchy.cost, anarchy_closed_form(n, alpha)),
                ("monarchy", c.monarchy.cost, monarchy_closed_form(n, alpha)),
                ("optimum", c.optimum_cost, optimum_closed_form(n, alpha)),
            ];
            for (what, cost, closed) in checks {
                if cost != Dual::real(closed) {
                    misses.push(format!("n={n} alpha={alpha} {what} {cost} != {closed}"));
                }
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    ensure(misses.is_empty(), || format!("{} of {} points missed: {}", misses.len(), points, misses.join("; ")))?;
    Ok(format!("{points} points exact"))
}

fn worked_examples() -> Outcome {
    let utility = |c: Dual| -c;
    let c = anarchy_vs_monarchy(4, rat(3, 2)).map_err(|e| e.to_string())?;
    ensure(utility(c.monarchy.cost) == Dual::ratio(3, 2), || {
        format!("monarchy utility {} at alpha=3/2", utility(c.monarchy.cost))
    })?;
    ensure(utility(c.anarchy.cost) == Dual::ZERO, || {
        format!("anarchy utility {} at alpha=3/2", utility(c.anarchy.cost))
    })?;
    let c = anarchy_vs_monarchy(4, rat(3, 1)).map_err(|e| e.to_string())?;
    ensure(utility(c.monarchy.cost) == Dual::int(-3), || {
        format!("monarchy utility {} at alpha=3", utility(c.monarchy.cost))
    })?;
    ensure(utility(c.anarchy.cost) == Dual::ZERO, || {
        format!("anarchy utility {} at alpha=3", utility(c.anarchy.cost))
    })?;
    Ok("monarchy 3/2 and -3, anarchy 0".into())
}

fn per_link_existence() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for alpha in [rat(1, 2), rat(3, 2)] {
        let config = linear_config(3, alpha, 1);
        let game = NetGame::new(config.clone()).unwrap();
        for mask in 0..64 {
            let f = binary_matrix(3, mask, Dual::EPS);
            let set = profiles(&game, &f);
            let rule = edge_rule_profile(&config, &f).map_err(|e| e.to_string())?;
            ensure(!set.is_empty(), || format!("no equilibrium for {f}"))?;
            ensure(set.contains(&rule), || format!("rule profile {rule} missing for {f}"))?;
            checked += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{checked} matrices, each with an equilibrium containing the per-link profile"))
}

fn adjacency_topology() -> Outcome {
    let mut matrices: Vec<SocialRangeMatrix> = (0..64).map(|m| binary_matrix(3, m, Dual::EPS)).collect();
    // Selected n = 4 masks: empty, full, a directed cycle, and a spread of others.
    let selected = [0u64, 0xfff, 0b1000_0010_0001, 0b0101_0101_0101, 0b1010_1010_1010, 0b1100_0011_0000];
    matrices.extend(selected.iter().map(|&m| binary_matrix(4, m, Dual::EPS)));
    matrices.extend((0..14u64).map(|k| binary_matrix(4, (k * 293 + 17) % 4096, Dual::EPS)));
    let mut checked = 0;
    for f in &matrices {
        for alpha in [rat(5, 4), rat(3, 2), rat(7, 4)] {
            let a = adjacency_equilibrium(f, alpha).map_err(|e| e.to_string())?;
            let game = NetGame::new(linear_config(f.n(), alpha, 1)).unwrap();
            let pne = is_pne(&game, f, a.profile.strategies()).unwrap().is_equilibrium();
            ensure(pne, || format!("adjacency profile {} of {f} fails at alpha={alpha}", a.profile))?;
            checked += 1;
        }
    }
    Ok(format!("{} matrices ({} at n=4), {checked} checks", matrices.len(), matrices.len() - 64))
}

fn row_scaling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let weights = [Dual::ZERO, Dual::ONE, Dual::int(-1), Dual::EPS, Dual::ratio(1, 2), Dual::int(2)];
    let lambdas = [rat(7, 1), rat(1, 3), rat(5, 2), rat(2, 1)];
    let utilities =
        [UtilitySpec::Linear, UtilitySpec::Power(rat(2, 1)), UtilitySpec::Table(vec![rat(0, 1), rat(2, 1), rat(3, 1)])];
    for k in 0..50 {
        let f =
            SocialRangeMatrix::new(3, (0..9).map(|_| weights[rng.random_range(0..weights.len())]).collect()).unwrap();
        let lambda = lambdas[rng.random_range(0..lambdas.len())];
        let row = rng.random_range(0..3);
        let alpha = rat(rng.random_range(1..=12), 4);
        let radius = rng.random_range(1..=2);
        let g = utilities[rng.random_range(0..utilities.len())].clone();
        let game = NetGame::new(NetGameConfig::new(3, alpha, radius, g)).unwrap();
        let scaled = scale_row(&f, row, lambda).unwrap();
        ensure(pne_set(&game, &f).unwrap() == pne_set(&game, &scaled).unwrap(), || {
            format!("triple {k}: scaling row {row} of {f} by {lambda} changed the equilibria")
        })?;
    }
    Ok("50 triples, identical equilibrium sets".into())
}

fn altruistic_optimum() -> Outcome {
    let mut checked = 0;
    for alpha in [rat(1, 2), rat(3, 2)] {
        for radius in [1, 2] {
            let game = NetGame::new(linear_config(3, alpha, radius)).unwrap();
            let extrema = social_extrema(&game);
            let ones = SocialRangeMatrix::filled(3, Dual::ONE).unwrap();
            let minus = SocialRangeMatrix::filled(3, Dual::int(-1)).unwrap();
            for s in &extrema.minimizers {
                ensure(is_pne(&game, &ones, s).unwrap().is_equilibrium(), || {
                    format!("optimum {s:?} not stable at alpha={alpha} R={radius}")
                })?;
                checked += 1;
            }
            for s in &extrema.maximizers {
                ensure(is_pne(&game, &minus, s).unwrap().is_equilibrium(), || {
                    format!("maximizer {s:?} not stable at alpha={alpha} R={radius}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} optima and maximizers are equilibria"))
}

fn constructive_checks() -> Outcome {
    let mut counts = [0usize; 5];
    for n in 2..=6 {
        for alpha in alphas().filter(|a| *a < rat(2, 1)) {
            let opt = brute_force_social_optimum(&linear_config(n, alpha, 1)).unwrap();
            let clique = n * (n - 1) / 2;
            ensure(opt.count == 1 && opt.graph().edge_count() == clique, || {
                format!("clique not the unique optimum at n={n} alpha={alpha}")
            })?;
            counts[0] += 1;
            let opt = brute_force_social_optimum(&linear_config(n, alpha, 2)).unwrap();
            for g in &opt.graphs {
                let bound = 2.min(n - 1);
                ensure(g.is_tree() && g.diameter().is_some_and(|d| d <= bound), || {
                    format!("optimum {:?} at n={n} alpha={alpha} R=2", g.edges())
                })?;
            }
            counts[1] += 1;
        }
        let tables = [
            UtilitySpec::Linear,
            UtilitySpec::Power(rat(2, 1)),
            UtilitySpec::Table((0..n as i64).map(|x| rat(4, 1) - rat(4, 1 << x)).collect()),
        ];
        for alpha in alphas() {
            for g in &tables {
                for radius in 1..=3 {
                    let config = NetGameConfig::new(n, alpha, radius, g.clone());
                    let condition = isolated_is_ne(&config).unwrap();
                    let actual = selfish_equilibrium(&config, &PurchaseProfile::empty(n));
                    ensure(condition == actual, || {
                        format!("isolated condition {condition} vs {actual} for {config:?}")
                    })?;
                    counts[2] += 1;
                    if radius == 1 {
                        for x in 0..=n / 2 {
                            if regular_ne_condition(&config, x).unwrap() {
                                let p = circulant_profile(n, x).unwrap();
                                ensure(selfish_equilibrium(&config, &p), || {
                                    format!("circulant x={x} fails for {config:?}")
                                })?;
                                counts[3] += 1;
                            }
                        }
                    } else if tree_ne_condition(&config).unwrap() {
                        let star = make_profile(Shape::Star { center: 0 }, n).unwrap();
                        ensure(selfish_equilibrium(&config, &star), || format!("star fails for {config:?}"))?;
                        counts[4] += 1;
                    }
                }
            }
        }
    }
    Ok(format!(
        "clique {} / tree {} optima, isolated {}, circulant {}, star {} checks",
        counts[0], counts[1], counts[2], counts[3], counts[4]
    ))
}

fn flip_matrices(n: usize, direction: FlipDirection) -> impl Iterator<Item = SocialRangeMatrix> {
    (0u64..1 << (n * (n - 1))).map(move |mask| {
        let mut f = binary_matrix(n, mask, Dual::ONE);
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                if !f.get(i, j).is_zero() {
                    f.set(i, j, direction.value());
                }
            }
        }
        f
    })
}

fn monotonicity() -> Outcome {
    let mut comparisons = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for direction in [FlipDirection::Friendship, FlipDirection::IllWill] {
        for alpha in alphas() {
            let sets: [(usize, Vec<SocialRangeMatrix>); 2] = [
                (3, flip_matrices(3, direction).collect()),
                (4, flip_matrices(4, direction).filter(|_| rng.random_range(0..64) == 0).collect()),
            ];
            for (n, matrices) in sets {
                let config = linear_config(n, alpha, 1);
                for f in &matrices {
                    for flips in single_and_double_flips(f) {
                        let r = windfall_experiment(&config, f, &flips, direction).map_err(|e| e.to_string())?;
                        let ok = r.worst_holds && r.best_holds;
                        ensure(ok, || {
                            format!(
                                "{direction:?} flips {flips:?} in {f} alpha={alpha}: worst {} best {}",
                                r.worst_delta, r.best_delta
                            )
                        })?;
                        comparisons += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{comparisons} flip sets, zero violations"))
}

fn bfs_counts(graph: &InducedGraph, source: usize, radius: usize) -> Vec<usize> {
    let n = graph.n();
    let mut dist = vec![usize::MAX; n];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for u in 0..n {
            if graph.has_edge(v, u) && dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    (1..=radius.min(n - 1)).map(|d| dist.iter().filter(|&&x| x == d).count()).collect()
}

fn oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..100 {
        let n = rng.random_range(1..=8);
        let density = rng.random_range(0..=100);
        let mut graph = InducedGraph::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_range(0..100) < density {
                    graph.add_edge(i, j);
                }
            }
        }
        for radius in 0..=n {
            for v in 0..n {
                let counts = neighborhood_counts(&graph, v, radius);
                let expected = bfs_counts(&graph, v, radius);
                ensure(counts.counts == expected, || {
                    format!("graph {k} {:?} node {v} R={radius}: {:?} vs {expected:?}", graph.edges(), counts.counts)
                })?;
            }
        }
    }
    let mut configs = 0;
    for alpha in [rat(1, 2), rat(3, 2)] {
        let game = NetGame::new(linear_config(3, alpha, 1)).unwrap();
        for mask in 0..64 {
            let f = binary_matrix(3, mask, Dual::EPS);
            let fast = EdgeDecomposition::new(&f, alpha).profiles();
            ensure(fast == profiles(&game, &f), || format!("per-pair set differs for {f} at alpha={alpha}"))?;
            configs += 1;
        }
    }
    Ok(format!("100 graphs agree with BFS; {configs} configs agree with enumeration"))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("socialnet-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    fs::write(dir.join("game.json"), r#"{"n": 4, "alpha": "3/2", "R": 1, "g": {"kind": "linear"}}"#).unwrap();
    fs::write(dir.join("game2.json"), r#"{"n": 4, "alpha": "3/2", "R": 2, "g": {"kind": "linear"}}"#).unwrap();
    fs::write(dir.join("m.csv"), "eps,0,0,0\n1,eps,0,0\n1,0,eps,0\n1,0,0,eps\n").unwrap();
    let runs = |tag: &str| -> Vec<Vec<String>> {
        let (game, game2, m) = (path("game.json"), path("game2.json"), path("m.csv"));
        vec![
            vec![
                "enumerate".into(),
                "--game".into(),
                game.clone(),
                "--matrix".into(),
                m.clone(),
                "--out".into(),
                path(&format!("e{tag}.json")),
            ],
            vec![
                "optimum".into(),
                "--game".into(),
                game2,
                "--out".into(),
                path(&format!("o{tag}.json")),
                "--dot".into(),
                path(&format!("o{tag}.dot")),
            ],
            vec![
                "dynamics".into(),
                "--game".into(),
                game,
                "--matrix".into(),
                m,
                "--trace".into(),
                path(&format!("d{tag}.json")),
                "--dot".into(),
                path(&format!("d{tag}.dot")),
            ],
            vec![
                "experiment".into(),
                "anarchy-monarchy".into(),
                "--n".into(),
                "3,4".into(),
                "--alpha".into(),
                "3/2,3".into(),
                "--csv".into(),
                path(&format!("a{tag}.csv")),
                "--out".into(),
                path(&format!("a{tag}.json")),
            ],
            vec![
                "experiment".into(),
                "verify-lemmas".into(),
                "--n".into(),
                "3".into(),
                "--alpha".into(),
                "3/2".into(),
                "--csv".into(),
                path(&format!("v{tag}.csv")),
                "--out".into(),
                path(&format!("v{tag}.json")),
            ],
        ]
    };
    for tag in ["1", "2"] {
        for args in runs(tag) {
            let out = Command::new(env!("CARGO_BIN_EXE_socialnet")).args(&args).output().map_err(|e| e.to_string())?;
            ensure(out.status.success(), || format!("`socialnet {}` exited with {}", args.join(" "), out.status))?;
        }
    }
    let outputs =
        ["e{}.json", "o{}.json", "o{}.dot", "d{}.json", "d{}.dot", "a{}.csv", "a{}.json", "v{}.csv", "v{}.json"];
    for pattern in outputs {
        let a = fs::read(dir.join(pattern.replace("{}", "1"))).map_err(|e| e.to_string())?;
        let b = fs::read(dir.join(pattern.replace("{}", "2"))).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{} differs between runs", pattern.replace("{}", "")))?;
    }
    let _ = fs::remove_dir_all(&dir);
    Ok(format!("{} outputs byte-identical across two runs", outputs.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("welfare closed forms for anarchy, monarchy and optimum", welfare_closed_forms),
        ("worked monarchy/anarchy examples", worked_examples),
        ("per-link equilibrium existence", per_link_existence),
        ("adjacency matrix topology", adjacency_topology),
        ("row scaling invariance", row_scaling),
        ("altruistic optima and malicious maxima", altruistic_optimum),
        ("optimum topologies and selfish constructions", constructive_checks),
        ("friendship and ill-will monotonicity", monotonicity),
        ("neighborhood and per-pair oracles", oracle_agreement),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{elapsed:.2?}]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{elapsed:.2?}]", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
