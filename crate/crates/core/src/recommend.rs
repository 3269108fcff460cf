//! Recommendation strategies.
//!
//! Every strategy draws from the same eligibility rule: a post may be shown to
//! `agent` only if its `origin_author` is neither the agent nor one of its
//! current followees. Slates hold at most `k_r` distinct posts.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Strategy;
use crate::graph::FollowGraph;
use crate::post::{Post, PostHistory};
use crate::rng::SimRng;
use crate::AgentId;

/// Read-only view of the simulation state at the start of a step.
#[derive(Clone, Copy)]
pub struct StateView<'a> {
    pub step: u32,
    pub opinions: &'a [f64],
    pub graph: &'a FollowGraph,
    pub history: &'a PostHistory,
}

impl StateView<'_> {
    #[inline]
    pub fn is_eligible(&self, agent: usize, post: &Post) -> bool {
        post.origin_author as usize != agent && !self.graph.follows(agent, post.origin_author)
    }
}

/// Strategy tag plus its memory window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommenderKind {
    pub strategy: Strategy,
    /// Window length; only the opinion strategy reads it directly, the
    /// structure strategy scans back `max(k_h, 1)` steps.
    pub k_h: usize,
}

impl RecommenderKind {
    pub fn new(strategy: Strategy, k_h: usize) -> Self {
        RecommenderKind { strategy, k_h }
    }

    /// Number of past step buffers this strategy needs.
    pub fn history_depth(&self) -> usize {
        match self.strategy {
            Strategy::Random => 0,
            Strategy::Structure => self.k_h.max(1),
            Strategy::Opinion => self.k_h,
        }
    }

    pub fn build(&self) -> Box<dyn Recommend> {
        match self.strategy {
            Strategy::Random => Box::new(RandomRecommender::default()),
            Strategy::Structure => Box::new(StructureRecommender::new(self.k_h.max(1))),
            Strategy::Opinion => Box::new(OpinionRecommender::new(self.k_h)),
        }
    }
}

/// The slate shown to one agent in one step.
#[derive(Clone, Debug, PartialEq)]
pub struct Slate {
    pub agent: AgentId,
    pub posts: Vec<Post>,
}

/// A curation strategy. `prepare` runs once per step before any slate is
/// requested; `slate` appends at most `k_r` posts to `out`.
pub trait Recommend: Send {
    fn kind(&self) -> RecommenderKind;

    fn prepare(&mut self, view: &StateView<'_>);

    fn slate(
        &mut self,
        view: &StateView<'_>,
        agent: usize,
        k_r: usize,
        rng: &mut SimRng,
        out: &mut Vec<Post>,
    );
}

/// All posts delivered within `[t - window, t]` that `agent` may be shown.
pub fn recommendable_pool(view: &StateView<'_>, agent: usize, window: usize) -> Vec<Post> {
    view.history
        .window(window)
        .flatten()
        .filter(|p| view.is_eligible(agent, p))
        .copied()
        .collect()
}

fn one_slate(
    rec: &mut dyn Recommend,
    view: &StateView<'_>,
    agent: usize,
    k_r: usize,
    rng: &mut SimRng,
) -> Slate {
    rec.prepare(view);
    let mut posts = Vec::with_capacity(k_r);
    rec.slate(view, agent, k_r, rng, &mut posts);
    Slate {
        agent: agent as AgentId,
        posts,
    }
}

pub fn recommend_random(view: &StateView<'_>, agent: usize, k_r: usize, rng: &mut SimRng) -> Slate {
    one_slate(&mut RandomRecommender::default(), view, agent, k_r, rng)
}

pub fn recommend_structure(
    view: &StateView<'_>,
    agent: usize,
    k_r: usize,
    k_h: usize,
    rng: &mut SimRng,
) -> Slate {
    one_slate(&mut StructureRecommender::new(k_h.max(1)), view, agent, k_r, rng)
}

pub fn recommend_opinion(
    view: &StateView<'_>,
    agent: usize,
    k_r: usize,
    k_h: usize,
    rng: &mut SimRng,
) -> Slate {
    one_slate(&mut OpinionRecommender::new(k_h), view, agent, k_r, rng)
}

/// Uniform sample without replacement from the current step's eligible posts.
#[derive(Default)]
pub struct RandomRecommender {
    /// Posts in the current buffer per origin author.
    origin_count: Vec<u32>,
    chosen: Vec<usize>,
    pool: Vec<usize>,
}

impl Recommend for RandomRecommender {
    fn kind(&self) -> RecommenderKind {
        RecommenderKind::new(Strategy::Random, 0)
    }

    fn prepare(&mut self, view: &StateView<'_>) {
        self.origin_count.clear();
        self.origin_count.resize(view.graph.n(), 0);
        for p in view.history.current() {
            self.origin_count[p.origin_author as usize] += 1;
        }
    }

    fn slate(
        &mut self,
        view: &StateView<'_>,
        agent: usize,
        k_r: usize,
        rng: &mut SimRng,
        out: &mut Vec<Post>,
    ) {
        let posts = view.history.current();
        let blocked = self.origin_count[agent] as usize
            + view
                .graph
                .followees(agent)
                .iter()
                .map(|&j| self.origin_count[j as usize] as usize)
                .sum::<usize>();
        let eligible = posts.len() - blocked;
        if eligible == 0 {
            return;
        }
        if eligible <= k_r {
            out.extend(posts.iter().filter(|p| view.is_eligible(agent, p)));
            return;
        }
        if 2 * eligible >= posts.len() {
            // Rejection sampling over the full buffer is uniform over the
            // eligible set and avoids materializing it.
            self.chosen.clear();
            while self.chosen.len() < k_r {
                let idx = rng.random_range(0..posts.len());
                if view.is_eligible(agent, &posts[idx]) && !self.chosen.contains(&idx) {
                    self.chosen.push(idx);
                }
            }
            out.extend(self.chosen.iter().map(|&i| posts[i]));
        } else {
            self.pool.clear();
            self.pool.extend(
                posts
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| view.is_eligible(agent, p))
                    .map(|(i, _)| i),
            );
            for i in index::sample(rng, self.pool.len(), k_r) {
                out.push(posts[self.pool[i]]);
            }
        }
    }
}

/// Ranks non-followed agents by the number of followees they share with the
/// target (ties shuffled), then takes each top candidate's newest post in
/// rank order. Older posts are used only once every ranked candidate has
/// contributed.
pub struct StructureRecommender {
    window: usize,
    by_origin: Vec<Vec<Post>>,
    followers: Vec<Vec<AgentId>>,
    score: Vec<u32>,
    touched: Vec<AgentId>,
    buckets: Vec<Vec<AgentId>>,
    ranked: Vec<AgentId>,
}

impl StructureRecommender {
    pub fn new(window: usize) -> Self {
        StructureRecommender {
            window,
            by_origin: Vec::new(),
            followers: Vec::new(),
            score: Vec::new(),
            touched: Vec::new(),
            buckets: Vec::new(),
            ranked: Vec::new(),
        }
    }

    /// Common-followee count of `agent` with every candidate it touches.
    /// Scores of untouched candidates are zero.
    fn score_candidates(&mut self, view: &StateView<'_>, agent: usize) {
        for &j in view.graph.followees(agent) {
            for &c in &self.followers[j as usize] {
                if c as usize == agent {
                    continue;
                }
                let s = &mut self.score[c as usize];
                if *s == 0 {
                    self.touched.push(c);
                }
                *s += 1;
            }
        }
    }
}

impl Recommend for StructureRecommender {
    fn kind(&self) -> RecommenderKind {
        RecommenderKind::new(Strategy::Structure, self.window)
    }

    fn prepare(&mut self, view: &StateView<'_>) {
        let n = view.graph.n();
        self.by_origin.resize_with(n, Vec::new);
        for v in &mut self.by_origin {
            v.clear();
        }
        for buffer in view.history.window(self.window) {
            for p in buffer {
                self.by_origin[p.origin_author as usize].push(*p);
            }
        }
        self.followers = view.graph.in_edges();
        self.score.clear();
        self.score.resize(n, 0);
    }

    fn slate(
        &mut self,
        view: &StateView<'_>,
        agent: usize,
        k_r: usize,
        rng: &mut SimRng,
        out: &mut Vec<Post>,
    ) {
        let start = out.len();
        self.touched.clear();
        self.score_candidates(view, agent);

        let max_score = self.touched.iter().map(|&c| self.score[c as usize]).max().unwrap_or(0) as usize;
        self.buckets.resize_with(max_score + 1, Vec::new);
        for b in &mut self.buckets {
            b.clear();
        }
        for &c in &self.touched {
            if !view.graph.follows(agent, c) {
                self.buckets[self.score[c as usize] as usize].push(c);
            }
        }
        for &c in &self.touched {
            self.score[c as usize] = 0;
        }

        // Walk candidates best-first. Within a bucket, an incremental
        // Fisher-Yates gives a uniform order without shuffling the whole
        // bucket up front.
        self.ranked.clear();
        let mut filled = 0;
        'buckets: for s in (0..=max_score).rev() {
            if s == 0 {
                let graph = view.graph;
                let touched = &self.touched;
                let zero = &mut self.buckets[0];
                zero.clear();
                zero.extend((0..graph.n() as AgentId).filter(|&c| {
                    c as usize != agent && !graph.follows(agent, c) && !touched.contains(&c)
                }));
            }
            let bucket = &mut self.buckets[s];
            for k in 0..bucket.len() {
                let pick = rng.random_range(k..bucket.len());
                bucket.swap(k, pick);
                let c = bucket[k];
                self.ranked.push(c);
                if let Some(p) = self.by_origin[c as usize].first() {
                    out.push(*p);
                    filled += 1;
                    if filled == k_r {
                        break 'buckets;
                    }
                }
            }
        }
        // Every candidate contributed its newest post and the slate is still
        // short: take progressively older posts in rank order.
        let mut depth = 1;
        while out.len() - start < k_r {
            let mut any = false;
            for &c in &self.ranked {
                if let Some(p) = self.by_origin[c as usize].get(depth) {
                    out.push(*p);
                    any = true;
                    if out.len() - start == k_r {
                        break;
                    }
                }
            }
            if !any {
                break;
            }
            depth += 1;
        }
    }
}

/// Picks the eligible posts in the memory window closest in opinion to the
/// agent; ties at the cut are broken uniformly at random.
pub struct OpinionRecommender {
    k_h: usize,
    sorted: Vec<Post>,
    cands: Vec<(f64, usize)>,
}

impl OpinionRecommender {
    pub fn new(k_h: usize) -> Self {
        OpinionRecommender {
            k_h,
            sorted: Vec::new(),
            cands: Vec::new(),
        }
    }
}

impl Recommend for OpinionRecommender {
    fn kind(&self) -> RecommenderKind {
        RecommenderKind::new(Strategy::Opinion, self.k_h)
    }

    fn prepare(&mut self, view: &StateView<'_>) {
        self.sorted.clear();
        for buffer in view.history.window(self.k_h) {
            self.sorted.extend_from_slice(buffer);
        }
        self.sorted.sort_by(|a, b| a.opinion.total_cmp(&b.opinion));
    }

    fn slate(
        &mut self,
        view: &StateView<'_>,
        agent: usize,
        k_r: usize,
        rng: &mut SimRng,
        out: &mut Vec<Post>,
    ) {
        let x = view.opinions[agent];
        let posts = &self.sorted;
        let split = posts.partition_point(|p| p.opinion < x);
        // `left` counts down from split-1, `right` up from split.
        let mut left = split;
        let mut right = split;
        let next_left = |mut i: usize| -> Option<usize> {
            while i > 0 {
                i -= 1;
                if view.is_eligible(agent, &posts[i]) {
                    return Some(i);
                }
            }
            None
        };
        let next_right = |mut i: usize| -> Option<usize> {
            while i < posts.len() {
                if view.is_eligible(agent, &posts[i]) {
                    return Some(i);
                }
                i += 1;
            }
            None
        };
        let mut l = next_left(left);
        let mut r = next_right(right);
        self.cands.clear();
        loop {
            let dl = l.map(|i| x - posts[i].opinion);
            let dr = r.map(|i| posts[i].opinion - x);
            let (dist, idx, from_left) = match (dl, dr) {
                (None, None) => break,
                (Some(d), None) => (d, l.unwrap(), true),
                (None, Some(d)) => (d, r.unwrap(), false),
                (Some(a), Some(b)) if a <= b => (a, l.unwrap(), true),
                (Some(_), Some(b)) => (b, r.unwrap(), false),
            };
            if self.cands.len() >= k_r && dist > self.cands[k_r - 1].0 {
                break;
            }
            self.cands.push((dist, idx));
            if from_left {
                left = idx;
                l = next_left(left);
            } else {
                right = idx + 1;
                r = next_right(right);
            }
        }
        if self.cands.len() > k_r {
            // Boundary tie group straddles the cut.
            let cut = self.cands[k_r - 1].0;
            let first = self.cands.partition_point(|c| c.0 < cut);
            let group = &mut self.cands[first..];
            for k in 0..(k_r - first) {
                let pick = rng.random_range(k..group.len());
                group.swap(k, pick);
            }
            self.cands.truncate(k_r);
        }
        out.extend(self.cands.iter().map(|&(_, i)| posts[i]));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn history_for(opinions: &[f64]) -> PostHistory {
        let posts = opinions
            .iter()
            .enumerate()
            .map(|(i, &x)| Post {
                origin_author: i as AgentId,
                carrier: i as AgentId,
                created_at: 0,
                delivered_at: 0,
                opinion: x,
                is_repost: false,
            })
            .collect();
        PostHistory::new(posts, 1)
    }

    fn rng(seed: u64) -> SimRng {
        SimRng::seed_from_u64(seed)
    }

    #[test]
    fn pool_excludes_self_and_followees() {
        // agent 1 follows 2 only (0-based: agent 0 follows 1)
        let g = FollowGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let h = history_for(&[0.0, 0.1, 0.2]);
        let view = StateView { step: 0, opinions: &[0.0, 0.1, 0.2], graph: &g, history: &h };
        let pool = recommendable_pool(&view, 0, 0);
        assert_eq!(pool.len(), 1);
        assert_eq!(pool[0].origin_author, 2);
    }

    #[test]
    fn pool_empty_when_following_everyone() {
        let g = FollowGraph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let h = history_for(&[0.0, 0.1, 0.2]);
        let view = StateView { step: 0, opinions: &[0.0, 0.1, 0.2], graph: &g, history: &h };
        assert!(recommendable_pool(&view, 0, 0).is_empty());
        assert!(recommend_random(&view, 0, 3, &mut rng(1)).posts.is_empty());
        assert!(recommend_opinion(&view, 0, 3, 0, &mut rng(1)).posts.is_empty());
        assert!(recommend_structure(&view, 0, 3, 0, &mut rng(1)).posts.is_empty());
    }

    #[test]
    fn window_zero_is_current_step_only() {
        let g = FollowGraph::empty(3);
        let mut h = history_for(&[0.0, 0.1, 0.2]);
        let mut next: Vec<Post> = h.current().to_vec();
        for p in &mut next {
            p.delivered_at = 1;
        }
        h.push(next);
        let view = StateView { step: 1, opinions: &[0.0; 3], graph: &g, history: &h };
        let pool = recommendable_pool(&view, 0, 0);
        assert_eq!(pool.len(), 2);
        assert!(pool.iter().all(|p| p.delivered_at == 1));
        assert_eq!(recommendable_pool(&view, 0, 1).len(), 4);
    }

    #[test]
    fn random_small_pool_is_whole_pool() {
        let g = FollowGraph::from_edges(4, [(0, 1)]).unwrap();
        let h = history_for(&[0.0, 0.1, 0.2, 0.3]);
        let view = StateView { step: 0, opinions: &[0.0; 4], graph: &g, history: &h };
        let s = recommend_random(&view, 0, 5, &mut rng(3));
        let mut authors: Vec<_> = s.posts.iter().map(|p| p.origin_author).collect();
        authors.sort();
        assert_eq!(authors, vec![2, 3]);
    }

    #[test]
    fn random_is_uniform() {
        // 21 agents, agent 0 follows nobody: pool of 20 posts.
        let g = FollowGraph::empty(21);
        let ops: Vec<f64> = (0..21).map(|i| i as f64 / 21.0).collect();
        let h = history_for(&ops);
        let view = StateView { step: 0, opinions: &ops, graph: &g, history: &h };
        let mut counts = [0usize; 21];
        let mut rec = RandomRecommender::default();
        rec.prepare(&view);
        let draws = 10_000;
        for s in 0..draws {
            let mut out = Vec::new();
            rec.slate(&view, 0, 1, &mut rng(s), &mut out);
            counts[out[0].origin_author as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        for &c in &counts[1..] {
            let f = c as f64 / draws as f64;
            assert!((f - 0.05).abs() < 0.01, "frequency {f}");
        }
    }

    #[test]
    fn opinion_picks_closest() {
        let g = FollowGraph::empty(5);
        // agent 0 at 0.0; pool opinions {0.9, 0.1, -0.2, 0.5}
        let ops = [0.0, 0.9, 0.1, -0.2, 0.5];
        let h = history_for(&ops);
        let view = StateView { step: 0, opinions: &ops, graph: &g, history: &h };
        let s = recommend_opinion(&view, 0, 2, 0, &mut rng(0));
        let mut got: Vec<f64> = s.posts.iter().map(|p| p.opinion).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![-0.2, 0.1]);
    }

    #[test]
    fn opinion_tie_is_seeded() {
        let g = FollowGraph::empty(3);
        let ops = [0.0, 0.25, -0.25];
        let h = history_for(&ops);
        let view = StateView { step: 0, opinions: &ops, graph: &g, history: &h };
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..64 {
            let a = recommend_opinion(&view, 0, 1, 0, &mut rng(seed));
            let b = recommend_opinion(&view, 0, 1, 0, &mut rng(seed));
            assert_eq!(a, b);
            seen.insert(a.posts[0].origin_author);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn structure_ranks_by_common_followees() {
        // 1-based agents 1..=5 mapped to 0..=4: out(1)={2,3}; out(4)={2,3,5}; out(5)={3}
        let g = FollowGraph::from_edges(5, [(0, 1), (0, 2), (3, 1), (3, 2), (3, 4), (4, 2)]).unwrap();
        let ops = [0.0; 5];
        let h = history_for(&ops);
        let view = StateView { step: 0, opinions: &ops, graph: &g, history: &h };
        for seed in 0..16 {
            let s = recommend_structure(&view, 0, 2, 0, &mut rng(seed));
            let authors: Vec<_> = s.posts.iter().map(|p| p.origin_author).collect();
            assert_eq!(authors, vec![3, 4]);
        }
    }

    #[test]
    fn structure_skips_candidates_without_posts() {
        let g = FollowGraph::from_edges(5, [(0, 1), (0, 2), (3, 1), (3, 2), (4, 2)]).unwrap();
        let ops = [0.0; 5];
        // agent 3 (best candidate) has no post in the buffer
        let posts: Vec<Post> = [0u32, 1, 2, 4]
            .iter()
            .map(|&i| Post { origin_author: i, carrier: i, created_at: 0, delivered_at: 0, opinion: 0.0, is_repost: false })
            .collect();
        let h = PostHistory::new(posts, 1);
        let view = StateView { step: 0, opinions: &ops, graph: &g, history: &h };
        let s = recommend_structure(&view, 0, 1, 0, &mut rng(0));
        assert_eq!(s.posts[0].origin_author, 4);
    }

    #[test]
    fn structure_all_zero_scores_uses_shuffle() {
        let g = FollowGraph::empty(6);
        let ops = [0.0; 6];
        let h = history_for(&ops);
        let view = StateView { step: 0, opinions: &ops, graph: &g, history: &h };
        let mut firsts = std::collections::BTreeSet::new();
        for seed in 0..64 {
            let s = recommend_structure(&view, 0, 2, 0, &mut rng(seed));
            assert_eq!(s.posts.len(), 2);
            assert!(s.posts.iter().all(|p| p.origin_author != 0));
            firsts.insert(s.posts[0].origin_author);
        }
        assert_eq!(firsts.len(), 5);
    }
}
