//! The synchronous step loop.
//!
//! Each step reads only time-`t` state: every agent's slate, feed partition,
//! opinion update, rewire decision and new post are computed from the same
//! snapshot, then rewires are applied and the new post buffer is installed.

use rand::Rng;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::graph::FollowGraph;
use crate::metrics::{baseline_rho, IndexCalculator, Indices, DEFAULT_BINS};
use crate::post::{Post, PostHistory};
use crate::recommend::{Recommend, RecommenderKind, StateView};
use crate::record::{
    snapshot_stride, Event, IndexPoint, InterventionEvent, InterventionKind, Param, RewireEvent, RunRecord,
    Snapshots, StopReason, MAX_SWITCH_WINDOW,
};
use crate::rng::{self, SimRng, Stream};
use crate::AgentId;

/// Split `posts` by strict `|tau - x| < epsilon`, preserving order.
pub fn partition_concordant(x: f64, posts: &[Post], epsilon: f64) -> (Vec<Post>, Vec<Post>) {
    posts.iter().partition(|p| (p.opinion - x).abs() < epsilon)
}

/// `x + alpha * mean(tau - x)`, or `x` when there is nothing to average.
pub fn update_opinion(x: f64, concordant: &[f64], alpha: f64) -> f64 {
    if concordant.is_empty() {
        return x;
    }
    let shift: f64 = concordant.iter().map(|t| t - x).sum::<f64>() / concordant.len() as f64;
    (x + alpha * shift).clamp(-1.0, 1.0)
}

/// With probability `q`, swap a uniformly chosen discordant carrier for a
/// uniformly chosen concordant recommended author that `agent` does not yet
/// follow. Skips silently if either candidate set is empty.
pub fn rewire(
    agent: AgentId,
    step: u32,
    discordant_carriers: &[AgentId],
    concordant_authors: &[AgentId],
    q: f64,
    graph: &FollowGraph,
    rng: &mut SimRng,
) -> Option<RewireEvent> {
    if q <= 0.0 || rng.random::<f64>() >= q {
        return None;
    }
    let mut targets: Vec<AgentId> = concordant_authors
        .iter()
        .copied()
        .filter(|&a| a != agent && !graph.follows(agent as usize, a))
        .collect();
    targets.sort_unstable();
    targets.dedup();
    let mut sources: Vec<AgentId> = discordant_carriers.to_vec();
    sources.sort_unstable();
    sources.dedup();
    if sources.is_empty() || targets.is_empty() {
        return None;
    }
    let unfollowed = sources[rng.random_range(0..sources.len())];
    let followed = targets[rng.random_range(0..targets.len())];
    Some(RewireEvent {
        step,
        agent,
        unfollowed,
        followed,
    })
}

/// With probability `p` repost a uniformly chosen element of `pool`;
/// otherwise, or when the pool is empty, post `x_next` as an original.
pub fn generate_post(agent: AgentId, x_next: f64, pool: &[Post], p: f64, step: u32, rng: &mut SimRng) -> Post {
    if p > 0.0 && rng.random::<f64>() < p && !pool.is_empty() {
        let source = &pool[rng.random_range(0..pool.len())];
        Post::repost_of(source, agent, step)
    } else {
        Post::original(agent, step, x_next)
    }
}

/// Per-step summary returned by [`Simulation::advance`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// Index of the step that was executed.
    pub step: u32,
    pub max_shift: f64,
    pub rewires: Vec<RewireEvent>,
    pub indices: Indices,
}

/// What to keep beyond the index series and event log.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep opinion snapshots and force samples.
    pub capture_snapshots: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            capture_snapshots: true,
        }
    }
}

impl RunOptions {
    pub fn lean() -> Self {
        RunOptions {
            capture_snapshots: false,
        }
    }
}

/// A run in progress.
pub struct Simulation {
    initial: ScenarioConfig,
    config: ScenarioConfig,
    step: u32,
    opinions: Vec<f64>,
    graph: FollowGraph,
    history: PostHistory,
    recommender: Box<dyn Recommend>,
    calc: IndexCalculator,
    indices: Indices,
    quiet: u32,
    stop: Option<StopReason>,
    options: RunOptions,
    index_series: Vec<IndexPoint>,
    events: Vec<Event>,
    snapshots: Vec<f32>,
    fod: Vec<f32>,
    scratch: Scratch,
}

#[derive(Default)]
struct Scratch {
    slate: Vec<Post>,
    feed_concordant: Vec<Post>,
    pool: Vec<Post>,
    taus: Vec<f64>,
    discordant_carriers: Vec<AgentId>,
    concordant_authors: Vec<AgentId>,
    next_opinions: Vec<f64>,
    next_posts: Vec<Post>,
    fod: Vec<f32>,
    rewires: Vec<RewireEvent>,
}

fn history_depth(kind: RecommenderKind) -> usize {
    kind.history_depth().max(MAX_SWITCH_WINDOW)
}

impl Simulation {
    pub fn new(config: ScenarioConfig, options: RunOptions) -> Result<Self> {
        config.validate()?;
        let n = config.n;
        let mut init = rng::stream(config.seed, Stream::Init);
        let opinions: Vec<f64> = (0..n).map(|_| init.random_range(-1.0..=1.0)).collect();
        let graph = FollowGraph::erdos_renyi(n, config.k_o, &mut init)?;
        let initial_posts = opinions
            .iter()
            .enumerate()
            .map(|(i, &x)| Post {
                delivered_at: 0,
                ..Post::original(i as AgentId, 0, x)
            })
            .collect();
        let kind = RecommenderKind::new(config.strategy, config.k_h);
        let history = PostHistory::new(initial_posts, history_depth(kind));
        let baseline = baseline_rho(
            config.epsilon,
            config.baseline_formula,
            &mut rng::stream(config.seed, Stream::Baseline),
        )
        .value;
        let mut calc = IndexCalculator::new(config.epsilon, baseline, DEFAULT_BINS)?;
        let indices = calc.compute(&graph, &opinions)?;
        let mut sim = Simulation {
            initial: config.clone(),
            recommender: kind.build(),
            config,
            step: 0,
            opinions,
            graph,
            history,
            calc,
            indices,
            quiet: 0,
            stop: None,
            options,
            index_series: Vec::new(),
            events: Vec::new(),
            snapshots: Vec::new(),
            fod: Vec::new(),
            scratch: Scratch::default(),
        };
        sim.record_point();
        if options.capture_snapshots {
            sim.snapshots.extend(sim.opinions.iter().map(|&x| x as f32));
        }
        Ok(sim)
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn initial_config(&self) -> &ScenarioConfig {
        &self.initial
    }

    pub fn opinions(&self) -> &[f64] {
        &self.opinions
    }

    pub fn graph(&self) -> &FollowGraph {
        &self.graph
    }

    pub fn history(&self) -> &PostHistory {
        &self.history
    }

    pub fn indices(&self) -> Indices {
        self.indices
    }

    pub fn index_series(&self) -> &[IndexPoint] {
        &self.index_series
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Interventions applied so far, in order.
    pub fn record_interventions(&self) -> Vec<InterventionEvent> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Intervention(i) => Some(*i),
                Event::Rewire(_) => None,
            })
            .collect()
    }

    pub fn recommender(&self) -> RecommenderKind {
        self.recommender.kind()
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stop
    }

    pub fn is_finished(&self) -> bool {
        self.stop.is_some()
    }

    /// Apply an operator action at the current step boundary.
    pub fn apply_intervention(&mut self, kind: InterventionKind) -> Result<InterventionEvent> {
        if self.is_finished() {
            return Err(Error::Invalid("run has already finished".into()));
        }
        kind.validate()?;
        match kind {
            InterventionKind::SetStrategy { strategy, k_h } => {
                let rk = RecommenderKind::new(strategy, k_h);
                self.recommender = rk.build();
                self.config.strategy = strategy;
                self.config.k_h = k_h;
            }
            InterventionKind::SetParam { param, value } => match param {
                Param::P => self.config.p = value,
                Param::Q => self.config.q = value,
                Param::Alpha => self.config.alpha = value,
            },
        }
        let event = InterventionEvent { step: self.step, kind };
        self.events.push(Event::Intervention(event));
        Ok(event)
    }

    /// Execute one step. Errors if the run has already stopped.
    pub fn advance(&mut self) -> Result<StepRecord> {
        if self.is_finished() {
            return Err(Error::Invalid("run has already finished".into()));
        }
        let n = self.config.n;
        let t = self.step;
        let (epsilon, alpha, q, p, k_r) = (self.config.epsilon, self.config.alpha, self.config.q, self.config.p, self.config.k_r);
        let seed = self.config.seed;
        let s = &mut self.scratch;
        s.next_opinions.clear();
        s.next_posts.clear();
        s.fod.clear();
        s.rewires.clear();

        let view = StateView {
            step: t,
            opinions: &self.opinions,
            graph: &self.graph,
            history: &self.history,
        };
        self.recommender.prepare(&view);
        let current = self.history.current();

        for i in 0..n {
            let x = self.opinions[i];
            s.slate.clear();
            let mut rec_rng = rng::substream(seed, Stream::Recommend, t, i);
            self.recommender.slate(&view, i, k_r, &mut rec_rng, &mut s.slate);

            s.feed_concordant.clear();
            s.discordant_carriers.clear();
            for &j in self.graph.followees(i) {
                let post = current[j as usize];
                if (post.opinion - x).abs() < epsilon {
                    s.feed_concordant.push(post);
                } else {
                    s.discordant_carriers.push(post.carrier);
                }
            }
            s.pool.clear();
            s.pool.extend_from_slice(&s.feed_concordant);
            s.concordant_authors.clear();
            for post in &s.slate {
                if (post.opinion - x).abs() < epsilon {
                    s.pool.push(*post);
                    s.concordant_authors.push(post.origin_author);
                }
            }

            s.taus.clear();
            s.taus.extend(s.pool.iter().map(|p| p.opinion));
            let x_next = update_opinion(x, &s.taus, alpha);
            s.next_opinions.push(x_next);

            if self.options.capture_snapshots {
                let nf = s.feed_concordant.len();
                s.fod.push(if nf == 0 {
                    f32::NAN
                } else {
                    (s.feed_concordant.iter().map(|p| p.opinion - x).sum::<f64>() / nf as f64) as f32
                });
            }

            if q > 0.0 {
                let mut rw_rng = rng::substream(seed, Stream::Rewire, t, i);
                if let Some(ev) = rewire(
                    i as AgentId,
                    t,
                    &s.discordant_carriers,
                    &s.concordant_authors,
                    q,
                    &self.graph,
                    &mut rw_rng,
                ) {
                    s.rewires.push(ev);
                }
            }

            let mut gen_rng = rng::substream(seed, Stream::Generate, t, i);
            s.next_posts.push(generate_post(i as AgentId, x_next, &s.pool, p, t, &mut gen_rng));
        }

        for ev in &s.rewires {
            self.graph.swap_followee(ev.agent, ev.unfollowed, ev.followed);
        }
        let max_shift = self
            .opinions
            .iter()
            .zip(&s.next_opinions)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut self.opinions, &mut s.next_opinions);
        self.history.push(std::mem::take(&mut s.next_posts));
        if self.options.capture_snapshots {
            self.fod.extend_from_slice(&s.fod);
            self.snapshots.extend(self.opinions.iter().map(|&x| x as f32));
        }
        self.events.extend(s.rewires.iter().copied().map(Event::Rewire));
        let rewires = s.rewires.clone();
        self.step += 1;

        self.indices = self.calc.compute(&self.graph, &self.opinions)?;
        self.record_point();

        if max_shift < self.config.opinion_tol && rewires.is_empty() {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        if self.quiet >= self.config.quiet_steps {
            self.stop = Some(StopReason::Converged);
        } else if self.step >= self.config.max_steps {
            self.stop = Some(StopReason::MaxSteps);
        }

        Ok(StepRecord {
            step: t,
            max_shift,
            rewires,
            indices: self.indices,
        })
    }

    fn record_point(&mut self) {
        let ix = self.indices;
        self.index_series.push(IndexPoint {
            step: self.step,
            rho: ix.rho,
            i_h: ix.i_h,
            i_p: ix.i_p,
            i_s: ix.i_s,
        });
    }

    /// The record so far. A run that has not stopped is reported as
    /// `MaxSteps` with `T` equal to the current step.
    pub fn record(&self) -> RunRecord {
        let n = self.config.n;
        let t = self.step;
        let snapshots = self.options.capture_snapshots.then(|| {
            let stride = snapshot_stride(t);
            let s = stride as usize;
            let mut data = Vec::with_capacity((t as usize / s + 1) * n);
            for k in (0..=t as usize).step_by(s) {
                data.extend_from_slice(&self.snapshots[k * n..(k + 1) * n]);
            }
            let mut fod = Vec::new();
            for k in (0..t as usize).step_by(s) {
                fod.extend_from_slice(&self.fod[k * n..(k + 1) * n]);
            }
            Snapshots { n, stride, data, fod }
        });
        RunRecord {
            config: self.initial.clone(),
            index_series: self.index_series.clone(),
            events: self.events.clone(),
            snapshots,
            stop_step: t,
            stop_reason: self.stop.unwrap_or(StopReason::MaxSteps),
            final_opinions: self.opinions.clone(),
            final_graph: self.graph.clone(),
        }
    }

    pub fn finish(self) -> RunRecord {
        self.record()
    }
}

/// Run to convergence or the step cap, keeping snapshots.
pub fn run(config: &ScenarioConfig) -> Result<RunRecord> {
    run_with(config, RunOptions::default(), &[])
}

/// Run with scheduled interventions, each applied before the step whose
/// index equals its `step`. The schedule must be sorted by step.
pub fn run_with(config: &ScenarioConfig, options: RunOptions, schedule: &[InterventionEvent]) -> Result<RunRecord> {
    if schedule.windows(2).any(|w| w[0].step > w[1].step) {
        return Err(Error::Invalid("intervention schedule is not sorted by step".into()));
    }
    let mut sim = Simulation::new(config.clone(), options)?;
    let mut pending = schedule.iter().peekable();
    while !sim.is_finished() {
        while let Some(ev) = pending.next_if(|e| e.step == sim.step()) {
            sim.apply_intervention(ev.kind)?;
        }
        sim.advance()?;
    }
    Ok(sim.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Strategy;
    use rand::SeedableRng;

    fn post(author: AgentId, opinion: f64) -> Post {
        Post::original(author, 0, opinion)
    }

    #[test]
    fn partition_strict_boundary() {
        let posts = [post(1, 0.4), post(2, -0.46), post(3, 0.45)];
        let (c, d) = partition_concordant(0.0, &posts, 0.45);
        assert_eq!(c.iter().map(|p| p.opinion).collect::<Vec<_>>(), vec![0.4]);
        assert_eq!(d.iter().map(|p| p.opinion).collect::<Vec<_>>(), vec![-0.46, 0.45]);
        let (c, d) = partition_concordant(0.5, &[], 0.45);
        assert!(c.is_empty() && d.is_empty());
        let (c, _) = partition_concordant(0.0, &[post(1, 0.1), post(2, -0.1)], 0.45);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn update_examples() {
        assert_eq!(update_opinion(0.3, &[], 0.5), 0.3);
        assert!((update_opinion(0.0, &[0.2, -0.1, 0.2], 0.5) - 0.05).abs() < 1e-15);
        assert_eq!(update_opinion(0.7, &[0.7, 0.7], 0.9), 0.7);
    }

    #[test]
    fn rewire_examples() {
        let g = FollowGraph::from_edges(4, [(0, 1), (0, 2)]).unwrap();
        let mut rng = SimRng::seed_from_u64(0);
        assert_eq!(rewire(0, 0, &[1], &[3], 0.0, &g, &mut rng), None);
        let ev = rewire(0, 5, &[1], &[3], 1.0, &g, &mut rng).unwrap();
        assert_eq!((ev.step, ev.agent, ev.unfollowed, ev.followed), (5, 0, 1, 3));
        assert_eq!(rewire(0, 0, &[], &[3], 1.0, &g, &mut rng), None);
        // Every candidate already followed or self.
        assert_eq!(rewire(0, 0, &[1], &[2, 0], 1.0, &g, &mut rng), None);
    }

    #[test]
    fn generate_examples() {
        let mut rng = SimRng::seed_from_u64(0);
        let p0 = generate_post(4, 0.25, &[post(1, 0.3)], 0.0, 7, &mut rng);
        assert_eq!(p0, Post::original(4, 7, 0.25));
        let src = Post { created_at: 3, ..post(1, 0.3) };
        let p1 = generate_post(4, 0.25, &[src], 1.0, 7, &mut rng);
        assert!(p1.is_repost);
        assert_eq!((p1.origin_author, p1.carrier, p1.opinion, p1.created_at, p1.delivered_at), (1, 4, 0.3, 3, 8));
        let p2 = generate_post(4, 0.25, &[], 1.0, 7, &mut rng);
        assert_eq!(p2, Post::original(4, 7, 0.25));
    }

    fn small(strategy: Strategy) -> ScenarioConfig {
        ScenarioConfig {
            n: 60,
            k_o: 6.0,
            max_steps: 300,
            ..ScenarioConfig::new(0.45, 0.1, 0.3, 0.3, strategy)
        }
        .with_seed(11)
    }

    #[test]
    fn static_run_converges_at_quiet_steps() {
        let cfg = ScenarioConfig {
            n: 50,
            k_o: 5.0,
            ..ScenarioConfig::new(0.45, 0.0, 0.0, 0.0, Strategy::Random)
        };
        let rec = run(&cfg).unwrap();
        assert_eq!(rec.stop_reason, StopReason::Converged);
        assert_eq!(rec.stop_step, cfg.quiet_steps);
        assert_eq!(rec.index_series.len(), cfg.quiet_steps as usize + 1);
        let first = rec.index_series[0];
        assert!(rec.index_series.iter().all(|p| (p.rho, p.i_p, p.i_s) == (first.rho, first.i_p, first.i_s)));
    }

    #[test]
    fn frozen_dynamics_keep_state() {
        let cfg = ScenarioConfig {
            n: 40,
            k_o: 5.0,
            ..ScenarioConfig::new(0.45, 0.0, 0.0, 0.0, Strategy::Opinion)
        };
        let mut sim = Simulation::new(cfg, RunOptions::default()).unwrap();
        let (x0, g0) = (sim.opinions().to_vec(), sim.graph().clone());
        sim.advance().unwrap();
        assert_eq!(sim.opinions(), x0.as_slice());
        assert_eq!(sim.graph(), &g0);
        let fresh = sim.history().current();
        assert_eq!(fresh.len(), 40);
        assert!(fresh.iter().enumerate().all(|(i, p)| p.carrier as usize == i && !p.is_repost && p.created_at == 0));
    }

    #[test]
    fn deterministic_for_every_strategy() {
        for strategy in [Strategy::Random, Strategy::Structure, Strategy::Opinion] {
            let a = run(&small(strategy)).unwrap();
            let b = run(&small(strategy)).unwrap();
            assert_eq!(a, b, "{strategy}");
        }
    }

    #[test]
    fn degree_conserved_and_bounded() {
        for strategy in [Strategy::Random, Strategy::Structure, Strategy::Opinion] {
            let cfg = small(strategy);
            let mut sim = Simulation::new(cfg, RunOptions::lean()).unwrap();
            let degrees: Vec<usize> = (0..60).map(|i| sim.graph().out_degree(i)).collect();
            let mut rewired = 0;
            for _ in 0..100 {
                if sim.is_finished() {
                    break;
                }
                rewired += sim.advance().unwrap().rewires.len();
                assert!(sim.opinions().iter().all(|x| (-1.0..=1.0).contains(x)));
                assert_eq!(sim.history().current().len(), 60);
            }
            assert!(rewired > 0, "{strategy}");
            let after: Vec<usize> = (0..60).map(|i| sim.graph().out_degree(i)).collect();
            assert_eq!(degrees, after);
        }
    }

    #[test]
    fn scheduled_interventions_are_logged_first() {
        let cfg = small(Strategy::Opinion);
        let schedule = [
            InterventionEvent { step: 2, kind: InterventionKind::SetStrategy { strategy: Strategy::Structure, k_h: 1 } },
            InterventionEvent { step: 2, kind: InterventionKind::SetParam { param: Param::Q, value: 0.0 } },
        ];
        let rec = run_with(&cfg, RunOptions::lean(), &schedule).unwrap();
        let at2: Vec<&Event> = rec.events.iter().filter(|e| e.step() == 2).collect();
        assert!(matches!(at2[0], Event::Intervention(_)));
        assert!(matches!(at2[1], Event::Intervention(_)));
        assert!(rec.rewire_events().all(|e| e.step < 2));
        assert!(rec.events.windows(2).all(|w| w[0].step() <= w[1].step()));
    }
}
