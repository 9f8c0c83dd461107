use crate::domains::Bid;

pub type NodeId = usize;

/// Who makes the move stored in a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Own,
    Opponent,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Own => Side::Opponent,
            Side::Opponent => Side::Own,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Own => 0,
            Side::Opponent => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Move {
    /// The current state; its move is whatever the opponent did last.
    Root,
    Propose(Bid),
    Accept,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub mv: Move,
    pub mover: Side,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub visits: u32,
    /// Cumulative utilities, indexed by [`Side::index`].
    pub score: [f64; 2],
    /// Opponent proposals between the root and this node, inclusive.
    pub opponent_bids: usize,
}

impl Node {
    pub fn mean(&self, side: Side) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.score[side.index()] / self.visits as f64
        }
    }

    pub fn bid(&self) -> Option<&Bid> {
        match &self.mv {
            Move::Propose(b) => Some(b),
            _ => None,
        }
    }
}

/// Arena-allocated search tree; node 0 is the root.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Default for Tree {
    fn default() -> Self {
        Self::new()
    }
}

impl Tree {
    pub fn new() -> Self {
        Self {
            nodes: vec![Node {
                mv: Move::Root,
                mover: Side::Opponent,
                parent: None,
                children: Vec::new(),
                visits: 0,
                score: [0.0; 2],
                opponent_bids: 0,
            }],
        }
    }

    pub const ROOT: NodeId = 0;

    pub fn root(&self) -> &Node {
        &self.nodes[Self::ROOT]
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn add_child(&mut self, parent: NodeId, mv: Move) -> NodeId {
        let mover = self.nodes[parent].mover.other();
        let opponent_bids = self.nodes[parent].opponent_bids
            + usize::from(mover == Side::Opponent && matches!(mv, Move::Propose(_)));
        let id = self.nodes.len();
        self.nodes.push(Node {
            mv,
            mover,
            parent: Some(parent),
            children: Vec::new(),
            visits: 0,
            score: [0.0; 2],
            opponent_bids,
        });
        self.nodes[parent].children.push(id);
        id
    }

    /// Adds one visit with utilities `(own, opponent)` to `leaf` and every
    /// ancestor.
    pub fn backpropagate(&mut self, leaf: NodeId, utilities: (f64, f64)) {
        let mut cursor = Some(leaf);
        while let Some(id) = cursor {
            let node = &mut self.nodes[id];
            node.visits += 1;
            node.score[0] += utilities.0;
            node.score[1] += utilities.1;
            cursor = node.parent;
        }
    }

    /// Nodes whose child count exceeds `ceil(visits^alpha)`.
    pub fn widening_violations(&self, alpha: f64) -> Vec<NodeId> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.children.len() as f64 > (n.visits as f64).powf(alpha).ceil())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            depth[i] = depth[n.parent.expect("non-root has a parent")] + 1;
        }
        depth.into_iter().max().unwrap_or(0)
    }
}
