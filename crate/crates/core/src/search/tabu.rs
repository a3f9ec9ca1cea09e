use std::collections::VecDeque;

/// Recently rejected `(vehicle id, position)` reinsertion pairs.
///
/// A pair is forbidden while it is among the last `tenure` rejections.
#[derive(Debug, Clone)]
pub struct TabuList {
    tenure: usize,
    recent: VecDeque<(usize, usize)>,
}

impl TabuList {
    pub fn new(tenure: usize) -> Self {
        TabuList {
            tenure,
            recent: VecDeque::with_capacity(tenure + 1),
        }
    }

    /// Default tenure `2 * lambda`.
    pub fn for_lambda(lambda: usize) -> Self {
        TabuList::new(2 * lambda)
    }

    pub fn tenure(&self) -> usize {
        self.tenure
    }

    pub fn reject(&mut self, vehicle_id: usize, position: usize) {
        if self.tenure == 0 {
            return;
        }
        self.recent.push_back((vehicle_id, position));
        while self.recent.len() > self.tenure {
            self.recent.pop_front();
        }
    }

    pub fn allows(&self, vehicle_id: usize, position: usize) -> bool {
        tabu_allows(self.recent.iter().copied(), (vehicle_id, position))
    }

    pub fn history(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.recent.iter().copied()
    }
}

/// False iff `candidate` is in `history` (the most recent rejections, already
/// trimmed to the tenure).
pub fn tabu_allows(history: impl IntoIterator<Item = (usize, usize)>, candidate: (usize, usize)) -> bool {
    !history.into_iter().any(|h| h == candidate)
}
