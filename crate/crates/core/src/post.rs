use serde::{Deserialize, Serialize};

use crate::AgentId;

/// A unit of content. `origin_author` is who wrote it; `carrier` is the agent
/// whose feed slot delivered it (differs from the author for reposts).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub origin_author: AgentId,
    pub carrier: AgentId,
    pub created_at: u32,
    pub delivered_at: u32,
    pub opinion: f64,
    pub is_repost: bool,
}

impl Post {
    pub fn original(author: AgentId, created_at: u32, opinion: f64) -> Self {
        Post {
            origin_author: author,
            carrier: author,
            created_at,
            delivered_at: created_at + 1,
            opinion,
            is_repost: false,
        }
    }

    /// Re-emit `source` through `carrier`, keeping payload and authorship.
    pub fn repost_of(source: &Post, carrier: AgentId, step: u32) -> Self {
        Post {
            origin_author: source.origin_author,
            carrier,
            created_at: source.created_at,
            delivered_at: step + 1,
            opinion: source.opinion,
            is_repost: true,
        }
    }
}

/// Per-step post buffers, newest last. The buffer delivered at step `t` holds
/// exactly one post per agent, indexed by carrier.
#[derive(Clone, Debug)]
pub struct PostHistory {
    buffers: std::collections::VecDeque<Vec<Post>>,
    /// Number of past steps retained beyond the current one.
    depth: usize,
}

impl PostHistory {
    pub fn new(initial: Vec<Post>, depth: usize) -> Self {
        let mut buffers = std::collections::VecDeque::with_capacity(depth + 1);
        buffers.push_back(initial);
        PostHistory { buffers, depth }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Posts delivered at the current step.
    #[inline]
    pub fn current(&self) -> &[Post] {
        self.buffers.back().expect("history is never empty")
    }

    /// Buffers delivered within the last `window` steps (inclusive of the
    /// current one), newest first.
    pub fn window(&self, window: usize) -> impl Iterator<Item = &[Post]> + '_ {
        self.buffers.iter().rev().take(window + 1).map(Vec::as_slice)
    }

    pub(crate) fn push(&mut self, posts: Vec<Post>) {
        self.buffers.push_back(posts);
        self.trim();
    }

    fn trim(&mut self) {
        while self.buffers.len() > self.depth + 1 {
            self.buffers.pop_front();
        }
    }
}
