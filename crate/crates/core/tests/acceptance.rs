//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! straight to stdout (bypassing the test harness capture) and the test
//! fails if any criterion does.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use cyclelab::embedder::{self, Copy, LargeOptions, RootedTree, TreeEmbedding, TreeSpec};
use cyclelab::experiments::{self, ExperimentConfig};
use cyclelab::expander;
use cyclelab::extremal::{self, ExtremalQuery};
use cyclelab::generators::sample_gnp;
use cyclelab::graph::{self, Side};
use cyclelab::oracle;
use cyclelab::ramsey::{self, ColoringPattern, DisjointOutcome, Disjointness};
use cyclelab::regularity::ClusterPartition;
use cyclelab::stitcher::{self, Branch, ExecOptions, Link, PlanParams, StitchPlan, DEFAULT_C1};
use cyclelab::{Graph, Rational, RngStream, Vertex};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c2(x: u128) -> u128 {
    x * x.saturating_sub(1) / 2
}

fn gnp(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    sample_gnp(n, p, rng).unwrap()
}

// Threshold edge counts written out case by case.

fn two_clique(n: u128, t: u128) -> u128 {
    c2(t - 1) + c2(n - t + 2)
}

fn long_regime(n: u128, t: u128) -> bool {
    2 * t >= n + 3
}

fn expected_g_edges(n: u128, t: u128, gamma: Rational) -> u128 {
    if long_regime(n, t) {
        two_clique(n, t) + 1
    } else if t % 2 == 1 {
        n * n / 4 + 1
    } else if Rational::from_integer(t as i128) >= gamma * Rational::from_integer(n as i128) {
        n * (t - 1) / 2 + 1
    } else {
        0
    }
}

fn expected_w_edges(n: u128, t: u128) -> u128 {
    if long_regime(n, t) {
        two_clique(n, t) + 1
    } else {
        n * n / 4 + 1
    }
}

fn construction_edges(n: u128, t: u128) -> u128 {
    if long_regime(n, t) {
        two_clique(n, t)
    } else {
        n * n / 4
    }
}

fn g_val(n: usize, t: usize, gamma: Rational) -> Rational {
    extremal::g_function(&ExtremalQuery::new(n, t, gamma).unwrap()).as_rational()
}

fn criterion_1() -> Outcome {
    let gammas = [Rational::new(1, 20), Rational::new(1, 5)];
    let mut checked = 0usize;
    for n in 3..=200usize {
        let (nn, den) = (n as u128, c2(n as u128) as i128);
        for t in 3..=n {
            let tt = t as u128;
            for &gamma in &gammas {
                let got = g_val(n, t, gamma);
                let want = Rational::new(expected_g_edges(nn, tt, gamma) as i128, den);
                ensure(got == want, || format!("g({t},{n}) with gamma {gamma}: {got} != {want}"))?;
                checked += 1;
            }
            let w = extremal::woodall_threshold(t, n).unwrap().as_rational();
            ensure(w == Rational::new(expected_w_edges(nn, tt) as i128, den), || format!("w({t},{n}) = {w}"))?;
            ensure(extremal::eg_path_bound(t, n) == nn * (tt - 1) / 2, || format!("path bound at {t},{n}"))?;
            ensure(extremal::eg_cycle_bound(t, n) == (nn - 1) * (tt - 1) / 2, || format!("cycle bound at {t},{n}"))?;
            if t % 2 == 1 {
                ensure(w == g_val(n, t, gammas[0]), || format!("w != g_o at {t},{n}"))?;
                if t >= 5 {
                    let prev = extremal::woodall_threshold(t - 2, n).unwrap().as_rational();
                    ensure(w >= prev, || format!("w decreases from {} to {t} at n = {n}", t - 2))?;
                }
            }
        }
        for &gamma in &gammas {
            let g = |t: usize| g_val(n, t, gamma);
            // 0 < s < (n+3)/4
            for s in 1..=n {
                if 4 * s >= n + 3 {
                    break;
                }
                let (e, o) = (2 * s, 2 * s + 1);
                if o <= n && e >= 3 {
                    ensure(g(o) >= g(e), || format!("g({o}) < g({e}) at n = {n}"))?;
                }
                if o <= n && e >= 4 {
                    ensure(g(o) >= g(e - 1), || format!("g({o}) < g({}) at n = {n}", e - 1))?;
                }
                if e + 2 <= n && e >= 4 {
                    ensure(g(e + 2) >= g(e), || format!("g({}) < g({e}) at n = {n}", e + 2))?;
                }
            }
            for t in 3..n {
                if long_regime(n as u128, t as u128) {
                    ensure(g(t + 1) >= g(t), || format!("g({}) < g({t}) at n = {n}", t + 1))?;
                }
            }
        }
    }
    Ok(format!("{checked} values of g for n <= 200, two gammas, monotonicity"))
}

fn criterion_2() -> Outcome {
    let mut graphs = 0;
    for n in 5..=14usize {
        for t in 3..=n {
            if !long_regime(n as u128, t as u128) {
                continue;
            }
            let g = extremal::build_woodall_graph(n, t).map_err(|e| e.to_string())?;
            ensure(g.edge_count() as u128 == two_clique(n as u128, t as u128), || format!("woodall edges at {n},{t}"))?;
            let sp = oracle::cycle_spectrum_exact(&g).map_err(|e| e.to_string())?;
            ensure(sp.circumference() == Some(t - 1), || format!("woodall({n},{t}) circumference {:?}", sp.circumference()))?;
            graphs += 1;
        }
        let b = extremal::build_bipartite_extremal(n).map_err(|e| e.to_string())?;
        ensure(b.edge_count() == n * n / 4, || format!("bipartite edges at {n}"))?;
        let sp = oracle::cycle_spectrum_exact(&b).map_err(|e| e.to_string())?;
        ensure(sp.shortest_odd().is_none(), || format!("bipartite construction on {n} has an odd cycle"))?;
        graphs += 1;
    }
    Ok(format!("{graphs} constructions certified by the oracle"))
}

fn criterion_3() -> Outcome {
    let n = 12usize;
    let ts = [3usize, 5, 7, 8, 9, 10, 11, 12];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut met = 0;
    for i in 0..100u64 {
        let g = gnp(n, 0.5, &mut rng);
        let t = ts[i as usize % ts.len()];
        let res = extremal::overlay_lower_bound(&g, t, 200, RngStream::new(30, i)).map_err(|e| e.to_string())?;
        ensure(!oracle::has_cycle_of_length(&res.subgraph, t).unwrap(), || format!("instance {i}: overlay has C_{t}"))?;
        ensure(res.subgraph.edges().all(|(u, v)| g.has_edge(u, v)), || format!("instance {i}: not a subgraph"))?;
        let ex = construction_edges(n as u128, t as u128);
        let bound = (ex * g.edge_count() as u128).div_ceil(c2(n as u128));
        ensure(res.bound == bound, || format!("instance {i}: bound {} != {bound}", res.bound))?;
        ensure(res.kept == res.subgraph.edge_count(), || format!("instance {i}: kept count"))?;
        met += usize::from(res.kept as u128 >= bound);
    }
    ensure(met >= 95, || format!("bound met on {met}/100"))?;
    Ok(format!("bound met on {met}/100, all subgraphs C_t-free"))
}

fn check_dfs(g: &Graph, p: &expander::DfsPartition) -> Result<(), String> {
    let n = g.n();
    let mut seen = vec![0u8; n];
    for (tag, set) in [(1u8, &p.s), (2, &p.t), (3, &p.u)] {
        for &v in set.iter() {
            if v >= n || seen[v] != 0 {
                return Err(format!("vertex {v} repeated or out of range"));
            }
            seen[v] = tag;
        }
    }
    if seen.contains(&0) {
        return Err("sets do not cover V".into());
    }
    if p.s.len() != p.t.len() {
        return Err(format!("|S| = {} but |T| = {}", p.s.len(), p.t.len()));
    }
    for (u, v) in g.edges() {
        if seen[u] * seen[v] == 2 {
            return Err(format!("edge {u}-{v} joins S and T"));
        }
    }
    let on_path: BTreeSet<_> = p.path.iter().copied().collect();
    if on_path != p.u.iter().copied().collect::<BTreeSet<_>>() {
        return Err("U is not the vertex set of the path".into());
    }
    for w in p.path.windows(2) {
        if !g.has_edge(w[0], w[1]) {
            return Err(format!("path step {}-{} is not an edge", w[0], w[1]));
        }
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ps = [0.05, 0.2, 0.8];
    for i in 0..1000u64 {
        let n = rng.random_range(1..=50usize);
        let g = gnp(n, ps[i as usize % 3], &mut rng);
        let order = (i % 2 == 0).then(|| RngStream::new(40, i));
        let part = expander::dfs_path_partition(&g, order);
        check_dfs(&g, &part).map_err(|e| format!("graph {i} (n = {n}): {e}"))?;
        ensure(part.verify(&g), || format!("graph {i}: library verifier disagrees"))?;
    }
    Ok("1000 partitions satisfy every invariant".into())
}

fn tree_diameter(t: &RootedTree) -> usize {
    let n = t.len();
    let mut adj = vec![Vec::new(); n];
    for (p, c) in t.edges() {
        adj[p].push(c);
        adj[c].push(p);
    }
    let far = |s: usize| {
        let mut d = vec![usize::MAX; n];
        d[s] = 0;
        let mut q = std::collections::VecDeque::from([s]);
        let mut last = s;
        while let Some(x) = q.pop_front() {
            last = x;
            for &y in &adj[x] {
                if d[y] == usize::MAX {
                    d[y] = d[x] + 1;
                    q.push_back(y);
                }
            }
        }
        (last, d[last])
    };
    far(far(0).0).1
}

fn check_embedding(g: &Graph, e: &TreeEmbedding, v1: &[Vertex], v2: &[Vertex]) -> Result<(), String> {
    let map = &e.map;
    if map.len() != e.tree.len() || map.iter().collect::<BTreeSet<_>>().len() != map.len() {
        return Err("map is not injective on the tree".into());
    }
    let (m1, m2) = (graph::mask(g.n(), v1), graph::mask(g.n(), v2));
    let side = |v: Vertex| match (m1[v], m2[v]) {
        (true, false) => Some(Side::Left),
        (false, true) => Some(Side::Right),
        _ => None,
    };
    for (p, c) in e.tree.tree.edges() {
        if !g.has_edge(map[p], map[c]) {
            return Err(format!("tree edge {p}-{c} not mapped to an edge"));
        }
        match (side(map[p]), side(map[c])) {
            (Some(a), Some(b)) if a != b => {}
            _ => return Err(format!("tree edge {p}-{c} does not cross the pair")),
        }
    }
    for copy in [Copy::A, Copy::B] {
        for &l in e.tree.leaves(copy) {
            let d = e.tree.to_root(l, copy).len() - 1;
            if d != e.tree.spec.h {
                return Err(format!("leaf {l} at depth {d} from its root"));
            }
        }
    }
    Ok(())
}

/// Two K_{50,50} blocks plus a random middle of density 1/2.
fn planted_pair(seed: u64) -> (Graph, Vec<Vertex>, Vec<Vertex>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..200usize {
        for v in 0..200usize {
            let keep = match (u / 50, v / 50) {
                (0, 0) | (1, 1) => true,
                (x, y) if x >= 2 && y >= 2 => rng.random_bool(0.5),
                _ => false,
            };
            if keep {
                edges.push((u, 200 + v));
            }
        }
    }
    (Graph::from_edges(400, edges).unwrap(), (0..200).collect(), (200..400).collect())
}

fn random_pair(a: usize, p: f64, seed: u64) -> (Graph, Vec<Vertex>, Vec<Vertex>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..a {
        for v in 0..a {
            if rng.random_bool(p) {
                edges.push((u, a + v));
            }
        }
    }
    (Graph::from_edges(2 * a, edges).unwrap(), (0..a).collect(), (a..2 * a).collect())
}

fn criterion_5() -> Outcome {
    for r in 2..=6usize {
        for h in 0..=6usize {
            for ell in 1..=20usize {
                let t = embedder::make_trhl(TreeSpec::new(r, h, ell).unwrap()).map_err(|e| e.to_string())?;
                let want = ell - 1 + 2 * (r.pow(h as u32 + 1) - 1) / (r - 1);
                ensure(t.len() == want, || format!("T({r},{h},{ell}) has {} vertices, not {want}", t.len()))?;
                ensure(t.tree.edges().count() + 1 == t.len(), || "not a tree".into())?;
                if t.len() <= 40_000 {
                    let d = tree_diameter(&t.tree);
                    ensure(d == ell + 2 * h, || format!("T({r},{h},{ell}) longest path {d}"))?;
                }
            }
        }
    }
    let eps = Rational::new(1, 50);
    let mut runs = 0;
    let mut ok = 0;
    let mut fails = Vec::new();
    for seed in 0..20u64 {
        let (g, a, b) = planted_pair(100 + seed);
        for (ell, side) in [(151, Side::Left), (150, Side::Right)] {
            runs += 1;
            match embedder::embed_large_trhl(&g, &a, &b, &eps, 200, ell, side, LargeOptions::new(RngStream::new(50, seed))) {
                Ok(e) => {
                    check_embedding(&g, &e, &a, &b).map_err(|m| format!("large seed {seed}: {m}"))?;
                    ensure(tree_diameter(&e.tree.tree) == ell + 2 * e.tree.spec.h, || "large diameter".into())?;
                    ok += 1;
                }
                Err(err) => fails.push(format!("large {seed}/{ell}: {err}")),
            }
        }
    }
    let small_eps = Rational::new(1, 100);
    for seed in 0..10u64 {
        let (g, a, b) = random_pair(300, 0.3, 200 + seed);
        for ell in [1, 6, 9] {
            runs += 1;
            match embedder::embed_small_trhl(&g, &a, &b, &small_eps, 300, ell) {
                Ok(e) => {
                    check_embedding(&g, &e, &a, &b).map_err(|m| format!("small seed {seed}: {m}"))?;
                    ok += 1;
                }
                Err(err) => fails.push(format!("small {seed}/{ell}: {err}")),
            }
        }
    }
    let tree = RootedTree::complete(2, 5).unwrap();
    for seed in 0..20u64 {
        let (g, _, _) = random_pair(200, 0.1, 300 + seed);
        runs += 1;
        if let Ok(map) = embedder::fp_embed_tree(&g, &tree, seed as usize * 7 % 400, 3) {
            ensure(map.iter().collect::<BTreeSet<_>>().len() == map.len(), || "fp map not injective".into())?;
            ensure(tree.edges().all(|(p, c)| g.has_edge(map[p], map[c])), || "fp map loses an edge".into())?;
            ok += 1;
        }
    }
    ensure(ok * 10 >= runs * 9, || format!("{ok}/{runs} embeddings; {fails:?}"))?;
    Ok(format!("tree counts for 700 shapes; {ok}/{runs} embeddings verified"))
}

fn plan_params(eps: Rational, m: usize, k: usize) -> PlanParams {
    PlanParams {
        eps,
        m,
        n: m * k,
        k,
        c1: DEFAULT_C1,
        max_depth: None,
    }
}

/// Length of the cycle a plan describes, recomputed from its trees and links.
fn plan_length(plan: &StitchPlan) -> usize {
    let seg: usize = plan
        .segments
        .iter()
        .map(|s| {
            let spec = plan.trees[s.tree].spec;
            spec.ell + 2 * spec.h
        })
        .sum();
    let links: usize = plan
        .links
        .iter()
        .map(|l| match l {
            Link::Edge => 1,
            Link::Vertex { .. } => 2,
        })
        .sum();
    seg + links
}

fn criterion_6() -> Outcome {
    const PER_BRANCH: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let branches = [
        Branch::EvenSmall,
        Branch::EvenSingle,
        Branch::EvenDouble,
        Branch::EvenChain,
        Branch::OddSmall,
        Branch::OddLarge,
    ];
    let mut counts = [0usize; 6];
    let mut tries = 0usize;
    while counts.iter().any(|&c| c < PER_BRANCH) {
        tries += 1;
        ensure(tries < 2_000_000, || format!("too few plans generated: {counts:?}"))?;
        let want = counts.iter().position(|&c| c < PER_BRANCH).unwrap();
        let eps = Rational::new(1, rng.random_range(64..=400));
        let m = rng.random_range(50..=3000usize);
        let two_em = (Rational::from_integer(2 * m as i128) * eps).to_integer() as usize;
        let (b, odd) = match branches[want] {
            Branch::EvenSmall | Branch::EvenSingle => (1, false),
            Branch::EvenDouble => (3, false),
            Branch::EvenChain => (2 * rng.random_range(2..=6usize) + 1, false),
            Branch::OddSmall | Branch::OddLarge => (2 * rng.random_range(1..=6usize) + 1, true),
        };
        let small = matches!(branches[want], Branch::EvenSmall | Branch::OddSmall);
        let k = b + 1 + rng.random_range(0..4usize);
        let hi = if small { two_em } else { (b + 1) * m };
        let lo = if small { 3 } else { two_em + 1 };
        if lo > hi {
            continue;
        }
        let mut t = rng.random_range(lo..=hi);
        if (t % 2 == 1) != odd {
            t += 1;
        }
        let p = plan_params(eps, m, k);
        let plan = if odd {
            stitcher::plan_odd_cycle(&(0..b).collect::<Vec<_>>(), t, &p)
        } else {
            stitcher::plan_even_cycle(&(0..=b).collect::<Vec<_>>(), t, &p)
        };
        let Ok(plan) = plan else { continue };
        let i = branches.iter().position(|&x| x == plan.branch).unwrap();
        ensure(plan_length(&plan) == t && plan.total() == t, || format!("plan for t = {t} adds up to {}", plan_length(&plan)))?;
        ensure(plan.links.len() == plan.segments.len(), || "links and segments differ in number".into())?;
        ensure((plan.t % 2 == 1) == odd, || "plan parity".into())?;
        counts[i] += 1;
    }
    // Parity contract.
    let p = plan_params(Rational::new(1, 100), 300, 6);
    ensure(stitcher::plan_even_cycle(&[0, 1, 2, 3], 401, &p).is_err(), || "odd t on a path".into())?;
    ensure(stitcher::plan_even_cycle(&[0, 1, 2], 400, &p).is_err(), || "even path length".into())?;
    ensure(stitcher::plan_odd_cycle(&[0, 1, 2, 3, 4], 400, &p).is_err(), || "even t on an odd cycle".into())?;
    ensure(stitcher::plan_odd_cycle(&[0, 1, 2, 3], 401, &p).is_err(), || "even cluster cycle".into())?;
    Ok(format!("{counts:?} plans per branch sum to t; parity contract holds"))
}

fn planted(k: usize, m: usize, closed: bool) -> (Graph, ClusterPartition) {
    let mut edges = Vec::new();
    let pairs = if closed { k } else { k - 1 };
    for i in 0..pairs {
        let j = (i + 1) % k;
        for a in 0..m {
            for b in 0..m {
                let (u, v) = (i * m + a, j * m + b);
                edges.push((u.min(v), u.max(v)));
            }
        }
    }
    let g = Graph::from_edges(k * m, edges).unwrap();
    let part = ClusterPartition::from_assignment((0..k * m).map(|v| v / m).collect(), k).unwrap();
    (g, part)
}

/// Window bounds for a path of `b` pairs (even) or an odd cluster cycle of
/// length `b`, with delta = 48 eps.
fn window(odd: bool, b: usize, n: usize, k: usize, eps: f64) -> (f64, f64) {
    let scale = if odd { (b - 1) as f64 / 2.0 } else { 1.0 };
    let a = if odd { b as f64 / k as f64 } else { (b + 1) as f64 / k as f64 };
    let lower = scale * DEFAULT_C1 / (1.0 / eps).ln() * (n as f64).ln();
    (lower, (1.0 - 48.0 * eps) * a * n as f64)
}

fn criterion_7(certs: &mut usize) -> Outcome {
    let eps = Rational::new(1, 100);
    let (g, part) = planted(4, 300, false);
    let p = plan_params(eps, 300, 4);
    let (lo, hi) = window(false, 3, 1200, 4, 0.01);
    let mut even = 0;
    let mut t = (lo.ceil() as usize).max(4);
    t += t % 2;
    while t as f64 <= hi {
        // Below the two-tree minimum the search moves on to the single pair.
        let plan = match stitcher::plan_even_cycle(&[0, 1, 2, 3], t, &p) {
            Ok(plan) => {
                ensure(plan.window.inside, || format!("t = {t} outside the recorded window"))?;
                plan
            }
            Err(_) => stitcher::plan_even_cycle(&[1, 2], t, &p).map_err(|e| format!("plan t = {t}: {e}"))?,
        };
        let cert = stitcher::execute_plan(&g, &part, &plan, ExecOptions::new(RngStream::new(70, t as u64)))
            .map_err(|e| format!("chain t = {t}: {e}"))?;
        graph::verify_cycle(&g, &cert.cycle, t).map_err(|e| format!("chain t = {t}: {e}"))?;
        even += 1;
        *certs += 1;
        t += if t < 40 { 2 } else { 10 };
    }
    let (g, part) = planted(5, 200, true);
    let p = plan_params(eps, 200, 5);
    let (lo, hi) = window(true, 5, 1000, 5, 0.01);
    let cycle = [0, 1, 2, 3, 4];
    let top = {
        let mut x = hi.floor() as usize;
        if x.is_multiple_of(2) {
            x -= 1;
        }
        x
    };
    let mut odd = 0;
    let mut t = lo.ceil() as usize;
    t += 1 - t % 2;
    while t <= top {
        let plan = stitcher::plan_odd_cycle(&cycle, t, &p).map_err(|e| format!("plan t = {t}: {e}"))?;
        let cert = stitcher::execute_plan(&g, &part, &plan, ExecOptions::new(RngStream::new(71, t as u64)))
            .map_err(|e| format!("odd t = {t}: {e}"))?;
        graph::verify_cycle(&g, &cert.cycle, t).map_err(|e| format!("odd t = {t}: {e}"))?;
        odd += 1;
        *certs += 1;
        t += 2;
    }
    // Through the full search with the partition supplied.
    let mut cfg = stitcher::FindConfig::new(Rational::new(1, 10), eps, 5);
    cfg.retries = 1;
    for t in [101, 451] {
        let cert = stitcher::find_cycle_of_length(&g, t, &cfg, Some(&part), RngStream::new(72, t as u64))
            .map_err(|e| format!("search t = {t}: {e}"))?;
        ensure(cert.verify(&g) && cert.cycle.len() == t, || format!("search t = {t} certificate"))?;
        *certs += 1;
    }
    Ok(format!("{even} even lengths on the chain, every odd length {}..={top} ({odd}) on the 5-cycle", lo.ceil()))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..200 {
        let g = gnp(12, 0.4, &mut rng);
        let a = oracle::cycle_spectrum_exact(&g).map_err(|e| e.to_string())?;
        let b = oracle::cycle_spectrum_dfs(&g).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("instance {i}: {a:?} vs {b:?}"))?;
    }
    for i in 0..500 {
        let n = rng.random_range(4..=12usize);
        let p = rng.random_range(0.1..0.6);
        let g = gnp(n, p, &mut rng);
        let non: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| !g.has_edge(u, v)).collect();
        let Some(&e) = non.choose(&mut rng) else { continue };
        let h = g.with_edges([e]).unwrap();
        let a = oracle::cycle_spectrum_exact(&g).map_err(|e| e.to_string())?;
        let b = oracle::cycle_spectrum_exact(&h).map_err(|e| e.to_string())?;
        ensure(a.present.is_subset(&b.present), || format!("pair {i}: adding {e:?} lost a cycle length"))?;
        ensure(a.longest_path <= b.longest_path, || format!("pair {i}: longest path shrank"))?;
    }
    Ok("200 dual-oracle agreements, 500 monotone pairs".into())
}

fn reachable_avoiding(g: &Graph, a: &[Vertex], b: &[Vertex], cut_v: &[Vertex], cut_e: &[(Vertex, Vertex)]) -> bool {
    let n = g.n();
    let gone = graph::mask(n, cut_v);
    let bm = graph::mask(n, b);
    let blocked: BTreeSet<(Vertex, Vertex)> = cut_e.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let mut seen = vec![false; n];
    let mut stack: Vec<Vertex> = a.iter().copied().filter(|&v| !gone[v]).collect();
    for &v in &stack {
        seen[v] = true;
    }
    while let Some(x) = stack.pop() {
        if bm[x] {
            return true;
        }
        for &y in g.neighbors(x) {
            if !seen[y] && !gone[y] && !blocked.contains(&(x.min(y), x.max(y))) {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    false
}

fn check_disjoint(g: &Graph, a: &[Vertex], b: &[Vertex], count: usize, mode: Disjointness, out: &DisjointOutcome) -> Result<(), String> {
    let (am, bm) = (graph::mask(g.n(), a), graph::mask(g.n(), b));
    match out {
        DisjointOutcome::Paths { paths } => {
            if paths.len() != count {
                return Err(format!("{} paths instead of {count}", paths.len()));
            }
            let mut used = BTreeSet::new();
            let mut edges = BTreeSet::new();
            for p in paths {
                graph::verify_path(g, p).map_err(|e| e.to_string())?;
                let (s, e) = (p[0], *p.last().unwrap());
                if !am[s] || !bm[e] {
                    return Err(format!("path {p:?} does not run from A to B"));
                }
                if p[1..p.len() - 1].iter().any(|&v| am[v] || bm[v]) {
                    return Err(format!("path {p:?} revisits A or B"));
                }
                let shared: Vec<Vertex> = match mode {
                    Disjointness::Full => p.clone(),
                    Disjointness::Internal => p[1..p.len() - 1].to_vec(),
                };
                for v in shared {
                    if !used.insert(v) {
                        return Err(format!("vertex {v} on two paths"));
                    }
                }
                if p.len() == 2 && !edges.insert((s.min(e), s.max(e))) {
                    return Err("A-B edge used twice".into());
                }
            }
            Ok(())
        }
        DisjointOutcome::Cut { vertices, edges } => {
            if vertices.len() + edges.len() >= count {
                return Err(format!("cut of size {} is not below {count}", vertices.len() + edges.len()));
            }
            if mode == Disjointness::Full && !edges.is_empty() {
                return Err("edge cut in full mode".into());
            }
            if reachable_avoiding(g, a, b, vertices, edges) {
                return Err("cut does not separate A from B".into());
            }
            Ok(())
        }
    }
}

fn articulation_points_brute(g: &Graph) -> BTreeSet<Vertex> {
    let base = g.components().len();
    (0..g.n())
        .filter(|&v| {
            let h = g.filter_edges(|x, y| x != v && y != v);
            // v becomes isolated, adding one component by itself.
            h.components().len() > base + 1
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut graphs = 0;
    let mut check_odd = |g: &Graph| -> Result<(), String> {
        let sp = oracle::cycle_spectrum_exact(g).map_err(|e| e.to_string())?;
        let bip = ramsey::is_bipartite(g).is_bipartite();
        ensure(bip == sp.shortest_odd().is_none(), || format!("bipartite verdict wrong on {g:?}"))?;
        let c = ramsey::shortest_odd_cycle(g);
        ensure(c.as_ref().map(Vec::len) == sp.shortest_odd(), || format!("shortest odd cycle wrong on {g:?}"))?;
        if let Some(c) = c {
            graph::verify_cycle(g, &c, c.len()).map_err(|e| e.to_string())?;
        }
        graphs += 1;
        Ok(())
    };
    for n in 1..=6usize {
        let pairs: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        for bits in 0u32..(1 << pairs.len()) {
            let g = Graph::from_edges(n, pairs.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &e)| e)).unwrap();
            check_odd(&g)?;
        }
    }
    for _ in 0..2000 {
        let n = rng.random_range(7..=12usize);
        let g = gnp(n, rng.random_range(0.1..0.5), &mut rng);
        check_odd(&g)?;
    }
    for i in 0..500 {
        let n = rng.random_range(4..=20usize);
        let g = gnp(n, rng.random_range(0.1..0.5), &mut rng);
        let mut verts: Vec<Vertex> = (0..n).collect();
        verts.shuffle(&mut rng);
        let sa = rng.random_range(1..=n / 2);
        let sb = rng.random_range(1..=n - sa).min(n / 2);
        let (a, b) = (verts[..sa].to_vec(), verts[sa..sa + sb].to_vec());
        let count = rng.random_range(1..=4usize);
        let mode = if i % 2 == 0 { Disjointness::Full } else { Disjointness::Internal };
        let out = ramsey::disjoint_paths(&g, &a, &b, count, mode).map_err(|e| e.to_string())?;
        check_disjoint(&g, &a, &b, count, mode, &out).map_err(|e| format!("instance {i}: {e}"))?;
    }
    for i in 0..1000 {
        let n = rng.random_range(1..=30usize);
        let g = gnp(n, rng.random_range(0.02..0.4), &mut rng);
        let bc = ramsey::block_cut_tree(&g);
        ensure(bc.check(), || format!("graph {i}: block-cut tree check fails"))?;
        let total: usize = bc.blocks.iter().map(Vec::len).sum();
        ensure(total <= 2 * n.max(1), || format!("graph {i}: block sizes sum to {total}"))?;
        for (u, v) in g.edges() {
            let c = bc.blocks.iter().filter(|b| b.contains(&u) && b.contains(&v)).count();
            ensure(c == 1, || format!("graph {i}: edge {u}-{v} in {c} blocks"))?;
        }
        let cuts: BTreeSet<_> = bc.cut_vertices.iter().copied().collect();
        ensure(cuts == articulation_points_brute(&g), || format!("graph {i}: cut vertices differ"))?;
        for v in 0..n {
            let c = bc.blocks.iter().filter(|b| b.contains(&v)).count();
            ensure((c >= 2) == cuts.contains(&v), || format!("graph {i}: vertex {v} in {c} blocks"))?;
        }
    }
    let k12 = Graph::complete(12);
    let col = ramsey::pattern_coloring(&k12, ColoringPattern::BalancedCut, 2, &mut ChaCha8Rng::seed_from_u64(9)).map_err(|e| e.to_string())?;
    let mut longest = 0;
    for c in 0..2 {
        let class = ramsey::color_class(&k12, &col, c).map_err(|e| e.to_string())?;
        longest = longest.max(oracle::cycle_spectrum_exact(&class).map_err(|e| e.to_string())?.longest_odd().unwrap_or(0));
    }
    ensure(longest <= 7, || format!("balanced cut has a monochromatic odd cycle of length {longest}"))?;
    let rep = ramsey::monochromatic_odd_cycle(&k12, &col, ramsey::default_eps(2), RngStream::new(90, 0)).map_err(|e| e.to_string())?;
    let cyc = rep.cycle.ok_or("no monochromatic odd cycle found")?;
    let class = ramsey::color_class(&k12, &col, rep.color.unwrap()).map_err(|e| e.to_string())?;
    ensure(cyc.verify(&class) && cyc.len() % 2 == 1 && cyc.len() <= longest, || "monochromatic cycle".into())?;
    Ok(format!("{graphs} graphs for bipartiteness, 500 path systems, 1000 block-cut trees, K12 longest mono odd cycle {longest}"))
}

fn run_with(kind: experiments::Kind, json: &str) -> Result<experiments::Report, String> {
    let cfg = ExperimentConfig::from_json(json).map_err(|e| e.to_string())?;
    experiments::run(kind, &cfg).map_err(|e| e.to_string())
}

fn criterion_10(certs: &mut usize) -> Outcome {
    let started = Instant::now();
    let turan = run_with(
        experiments::Kind::Turan,
        r#"{"n":5000,"c":[40],"eps":0.05,"k":12,"trials":20,"t":[300,301],"deletions":["none"],"seed":10}"#,
    )?;
    let t_rate = turan.success_rate();
    let t_secs = started.elapsed().as_secs_f64();
    *certs += turan.verify_in_memory().map_err(|e| e.to_string())?;
    let started = Instant::now();
    let robust = run_with(
        experiments::Kind::Robustness,
        r#"{"n":3000,"c":[30],"beta":0.1,"eps":0.05,"k":4,"max_depth":4,"trials":20,
            "t_fractions":[{"frac":0.3,"parity":"odd"}],"scenarios":["a"],"seed":11}"#,
    )?;
    let r_rate = robust.success_rate();
    let r_secs = started.elapsed().as_secs_f64();
    *certs += robust.verify_in_memory().map_err(|e| e.to_string())?;
    let detail = format!(
        "turan {:.0}% over {} runs in {t_secs:.1}s, robustness (a) {:.0}% over {} runs in {r_secs:.1}s",
        100.0 * t_rate,
        turan.rows.len(),
        100.0 * r_rate,
        robust.rows.len()
    );
    ensure(t_rate >= 0.8 && r_rate >= 0.7, || detail.clone())?;
    Ok(detail)
}

fn criterion_11() -> Outcome {
    let configs = [
        (experiments::Kind::Turan, r#"{"n":400,"p":0.08,"k":8,"trials":3,"t":[40,41],"deletions":["none","random"],"seed":5}"#),
        (
            experiments::Kind::Robustness,
            r#"{"n":400,"c":[30],"k":6,"trials":3,"t_fractions":[{"frac":0.2,"parity":"odd"}],"scenarios":["a","b","c"],"seed":6}"#,
        ),
        (experiments::Kind::Ramsey, r#"{"n":60,"p":0.5,"r":2,"trials":3,"t":[10,11],"seed":7}"#),
    ];
    let root = std::env::temp_dir().join(format!("cyclelab-accept-{}", std::process::id()));
    let mut files = 0;
    for (i, (kind, json)) in configs.iter().enumerate() {
        let a = run_with(*kind, json)?;
        let b = run_with(*kind, json)?;
        ensure(a.csv() == b.csv(), || format!("config {i}: CSV differs"))?;
        ensure(a.files == b.files, || format!("config {i}: certificates differ"))?;
        let (da, db) = (root.join(format!("{i}a")), root.join(format!("{i}b")));
        a.write(&da).map_err(|e| e.to_string())?;
        b.write(&db).map_err(|e| e.to_string())?;
        let csv = |d: &std::path::Path| std::fs::read(d.join("results.csv")).unwrap();
        ensure(csv(&da) == csv(&db), || format!("config {i}: results.csv bytes differ"))?;
        for rel in a.files.keys() {
            let (x, y) = (std::fs::read(da.join(rel)), std::fs::read(db.join(rel)));
            ensure(x.is_ok() && x.ok() == y.ok(), || format!("config {i}: {rel} differs"))?;
            files += 1;
        }
        let check = experiments::verify_report_dir(&da).map_err(|e| e.to_string())?;
        ensure(check.failed.is_empty(), || format!("config {i}: {:?}", check.failed))?;
    }
    let _ = std::fs::remove_dir_all(&root);
    Ok(format!("3 experiment kinds rerun byte-identically ({files} files)"))
}

#[test]
fn acceptance() {
    let mut certs = 0usize;
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut run = |i: usize, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let started = Instant::now();
        let out = f();
        let secs = started.elapsed().as_secs_f64();
        let (tag, detail) = match &out {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        say(&format!("criterion {i:>2} {tag} [{name}] {detail} ({secs:.1}s)"));
        results.push((i, name, out, secs));
    };
    run(1, "exact thresholds", &mut criterion_1);
    run(2, "constructions", &mut criterion_2);
    run(3, "overlay lower bound", &mut criterion_3);
    run(4, "dfs partition", &mut criterion_4);
    run(5, "tree machinery", &mut criterion_5);
    run(6, "plan arithmetic", &mut criterion_6);
    run(7, "planted stitching", &mut || criterion_7(&mut certs));
    run(8, "oracles", &mut criterion_8);
    run(9, "ramsey machinery", &mut criterion_9);
    run(10, "empirical baselines", &mut || criterion_10(&mut certs));
    run(11, "determinism", &mut criterion_11);
    say(&format!("certificates verified: {certs}"));
    let failed: Vec<usize> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
