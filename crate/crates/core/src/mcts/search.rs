use rand::rngs::StdRng;
use rand::SeedableRng;

use super::tree::{Move, NodeId, Side, Tree};
use super::{pruned_expand, selection_score, should_expand, SearchConfig, SearchError, SearchResult};
use crate::domains::{Bid, Domain, PreferenceProfile};
use crate::opponent::{modeled_accepts, OpponentModel};

/// The agent's side of the state a search starts from.
#[derive(Debug, Clone, Copy)]
pub struct SearchState<'a> {
    pub domain: &'a Domain,
    pub own_profile: &'a PreferenceProfile,
    /// Best opponent offer received so far, by own utility.
    pub best_received: Option<&'a Bid>,
}

enum Expansion {
    New(NodeId),
    Existing(NodeId),
    Failed,
}

/// One search tree built incrementally. [`search`] is the usual entry
/// point; this type exposes the tree for inspection.
pub struct Search<'a, M: ?Sized> {
    state: SearchState<'a>,
    opponent: &'a M,
    cfg: SearchConfig,
    tree: Tree,
    rng: StdRng,
    prune_bound: f64,
}

impl<'a, M: OpponentModel + ?Sized> Search<'a, M> {
    pub fn new(state: SearchState<'a>, opponent: &'a M, cfg: SearchConfig) -> Result<Self, SearchError> {
        cfg.validate()?;
        let prune_bound = state
            .best_received
            .map(|b| state.own_profile.eval(b))
            .unwrap_or(f64::NEG_INFINITY);
        Ok(Self {
            rng: StdRng::seed_from_u64(cfg.rollout_seed),
            state,
            opponent,
            cfg,
            tree: Tree::new(),
            prune_bound,
        })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn run(&mut self, iterations: usize) {
        for _ in 0..iterations {
            self.iterate();
        }
    }

    /// Root child with the highest mean own utility.
    pub fn result(&self) -> Result<SearchResult, SearchError> {
        let root = self.tree.root();
        let best = root
            .children
            .iter()
            .map(|&id| self.tree.node(id))
            .filter(|n| n.visits > 0)
            .max_by(|a, b| a.mean(Side::Own).total_cmp(&b.mean(Side::Own)))
            .ok_or(SearchError::AllPruned)?;
        Ok(SearchResult {
            best_bid: best.bid().expect("root children are proposals").clone(),
            root_visits: root.visits,
            tree_size: self.tree.len(),
            value_estimate: best.mean(Side::Own),
        })
    }

    fn iterate(&mut self) {
        let mut id = Tree::ROOT;
        loop {
            let node = self.tree.node(id);
            if node.mv == Move::Accept {
                let value = self.accept_value(id);
                self.tree.backpropagate(id, value);
                return;
            }
            if should_expand(node.visits as u64 + 1, node.children.len(), self.cfg.alpha) {
                match self.expand(id) {
                    Expansion::New(child) => {
                        let value = self.rollout(child);
                        self.tree.backpropagate(child, value);
                        return;
                    }
                    Expansion::Existing(child) => {
                        id = child;
                        continue;
                    }
                    Expansion::Failed => {}
                }
            }
            if self.tree.node(id).children.is_empty() {
                if id != Tree::ROOT {
                    let value = self.rollout(id);
                    self.tree.backpropagate(id, value);
                }
                return;
            }
            id = self.select(id);
        }
    }

    fn expand(&mut self, id: NodeId) -> Expansion {
        let node = self.tree.node(id);
        match node.mover.other() {
            Side::Own => {
                for _ in 0..self.cfg.prune_retries.max(1) {
                    let bid = self.state.domain.sample_bid(&mut self.rng);
                    if pruned_expand(&bid, self.state.own_profile, self.prune_bound) {
                        return Expansion::New(self.tree.add_child(id, Move::Propose(bid)));
                    }
                }
                Expansion::Failed
            }
            Side::Opponent => {
                let offset = node.opponent_bids;
                let incoming = node.bid().expect("own nodes hold proposals").clone();
                let planned = self.opponent.sample_bid(offset, &mut self.rng);
                if modeled_accepts(self.opponent, &incoming, &planned) {
                    let node = self.tree.node(id);
                    match node.children.iter().find(|&&c| self.tree.node(c).mv == Move::Accept) {
                        Some(&existing) => Expansion::Existing(existing),
                        None => Expansion::New(self.tree.add_child(id, Move::Accept)),
                    }
                } else {
                    Expansion::New(self.tree.add_child(id, Move::Propose(planned)))
                }
            }
        }
    }

    fn select(&self, id: NodeId) -> NodeId {
        let total = self.tree.root().visits.max(1);
        let node = self.tree.node(id);
        let side = node.mover.other().index();
        let mut best = node.children[0];
        let mut best_score = f64::NEG_INFINITY;
        for &c in &node.children {
            let child = self.tree.node(c);
            let w = selection_score(child.score[side], child.visits, total, self.cfg.alpha, self.cfg.c);
            if w > best_score {
                best_score = w;
                best = c;
            }
        }
        best
    }

    fn value_of(&self, agreed: &Bid) -> (f64, f64) {
        (self.state.own_profile.eval(agreed), self.opponent.estimated_utility(agreed))
    }

    fn accept_value(&self, id: NodeId) -> (f64, f64) {
        let parent = self.tree.node(id).parent.expect("accept nodes have a parent");
        let agreed = self.tree.node(parent).bid().expect("accept follows a proposal");
        self.value_of(agreed)
    }

    fn rollout(&mut self, id: NodeId) -> (f64, f64) {
        let node = self.tree.node(id);
        match &node.mv {
            Move::Accept => self.accept_value(id),
            Move::Propose(bid) => {
                let (mover, bid, offset) = (node.mover, bid.clone(), node.opponent_bids);
                self.simulate(mover, bid, offset)
            }
            Move::Root => unreachable!("rollouts never start at the root"),
        }
    }

    /// Plays random continuations from a proposal by `mover`.
    fn simulate(&mut self, mut mover: Side, mut last: Bid, mut offset: usize) -> (f64, f64) {
        for _ in 0..self.cfg.max_depth {
            match mover {
                Side::Own => {
                    let planned = self.opponent.sample_bid(offset, &mut self.rng);
                    if modeled_accepts(self.opponent, &last, &planned) {
                        return self.value_of(&last);
                    }
                    offset += 1;
                    last = planned;
                }
                Side::Opponent => {
                    let planned = self.state.domain.sample_bid(&mut self.rng);
                    let own = self.state.own_profile;
                    if own.eval(&last) >= own.eval(&planned) {
                        return self.value_of(&last);
                    }
                    last = planned;
                }
            }
            mover = mover.other();
        }
        (self.state.own_profile.reserve(), 0.0)
    }
}

/// Runs `cfg.simulations` iterations from a fresh tree and returns the best
/// root bid.
pub fn search<M: OpponentModel + ?Sized>(
    state: SearchState<'_>,
    opponent: &M,
    cfg: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    let mut s = Search::new(state, opponent, cfg.clone())?;
    s.run(cfg.simulations);
    s.result()
}
