use rand::Rng;

use crate::error::{contract, Result};

/// Permutation neighborhood moves. Positions are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Swap,
    /// Move the entry at `i` to `j > i`, shifting the block between left.
    InsertForward,
    /// Move the entry at `i` to `j < i`, shifting the block between right.
    InsertBackward,
    /// Reverse the block between `i` and `j`.
    Inversion,
}

impl Operator {
    pub const ALL: [Operator; 4] = [
        Operator::Swap,
        Operator::InsertForward,
        Operator::InsertBackward,
        Operator::Inversion,
    ];
}

/// Selection weights of the four operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorWeights {
    pub swap: f64,
    pub insert_forward: f64,
    pub insert_backward: f64,
    pub inversion: f64,
}

impl Default for OperatorWeights {
    fn default() -> Self {
        OperatorWeights {
            swap: 0.35,
            insert_forward: 0.25,
            insert_backward: 0.25,
            inversion: 0.15,
        }
    }
}

impl OperatorWeights {
    pub fn validate(&self) -> Result<()> {
        let w = [self.swap, self.insert_forward, self.insert_backward, self.inversion];
        if w.iter().any(|&x| !(x >= 0.0)) {
            return Err(crate::Error::Config("operator weights must be non-negative".into()));
        }
        if (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(crate::Error::Config("operator weights must sum to 1".into()));
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Operator {
        let x: f64 = rng.random();
        let mut acc = self.swap;
        if x < acc {
            return Operator::Swap;
        }
        acc += self.insert_forward;
        if x < acc {
            return Operator::InsertForward;
        }
        acc += self.insert_backward;
        if x < acc {
            return Operator::InsertBackward;
        }
        Operator::Inversion
    }

    /// Draws an operator together with valid positions for a sequence of
    /// length `n >= 2`.
    pub fn draw_move<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (Operator, usize, usize) {
        let op = self.draw(rng);
        let a = rng.random_range(1..=n);
        let mut b = rng.random_range(1..n);
        if b >= a {
            b += 1;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        match op {
            Operator::InsertForward => (op, lo, hi),
            Operator::InsertBackward => (op, hi, lo),
            _ => (op, a, b),
        }
    }
}

/// Applies `op` to `seq` in place. Positions must already be valid.
pub(crate) fn apply_operator_in_place<T>(seq: &mut [T], op: Operator, i: usize, j: usize) {
    let (a, b) = (i - 1, j - 1);
    match op {
        Operator::Swap => seq.swap(a, b),
        Operator::InsertForward => seq[a..=b].rotate_left(1),
        Operator::InsertBackward => seq[b..=a].rotate_right(1),
        Operator::Inversion => {
            let (lo, hi) = (a.min(b), a.max(b));
            seq[lo..=hi].reverse();
        }
    }
}

pub fn apply_operator<T: Clone>(seq: &[T], op: Operator, i: usize, j: usize) -> Result<Vec<T>> {
    let n = seq.len();
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) || i == j {
        return Err(contract(format!(
            "positions ({i}, {j}) invalid for a sequence of length {n}"
        )));
    }
    match op {
        Operator::InsertForward if i > j => return Err(contract("forward insertion requires i < j")),
        Operator::InsertBackward if i < j => return Err(contract("backward insertion requires i > j")),
        _ => {}
    }
    let mut out = seq.to_vec();
    apply_operator_in_place(&mut out, op, i, j);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_examples() {
        assert_eq!(
            apply_operator(&[1, 2, 3, 4], Operator::Swap, 1, 4).unwrap(),
            vec![4, 2, 3, 1]
        );
        assert_eq!(
            apply_operator(&[1, 2, 3, 4, 5], Operator::InsertForward, 2, 4).unwrap(),
            vec![1, 3, 4, 2, 5]
        );
        assert_eq!(
            apply_operator(&[1, 2, 3, 4, 5], Operator::InsertBackward, 4, 2).unwrap(),
            vec![1, 4, 2, 3, 5]
        );
        assert_eq!(
            apply_operator(&[1, 2, 3, 4, 5], Operator::Inversion, 2, 5).unwrap(),
            vec![1, 5, 4, 3, 2]
        );
    }

    #[test]
    fn invalid_positions() {
        assert!(apply_operator(&[1, 2, 3], Operator::Swap, 0, 2).is_err());
        assert!(apply_operator(&[1, 2, 3], Operator::Swap, 2, 2).is_err());
        assert!(apply_operator(&[1, 2, 3], Operator::Swap, 1, 4).is_err());
        assert!(apply_operator(&[1, 2, 3], Operator::InsertForward, 3, 1).is_err());
        assert!(apply_operator(&[1, 2, 3], Operator::InsertBackward, 1, 3).is_err());
    }

    #[test]
    fn default_weights_are_valid() {
        OperatorWeights::default().validate().unwrap();
        let bad = OperatorWeights {
            swap: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn moves_preserve_permutations(n in 2usize..40, seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let seq: Vec<usize> = (0..n).collect();
            let (op, i, j) = OperatorWeights::default().draw_move(n, &mut rng);
            let mut out = apply_operator(&seq, op, i, j).unwrap();
            out.sort_unstable();
            prop_assert_eq!(out, seq);
        }
    }
}
