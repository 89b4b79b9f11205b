//! Symbolic itineraries of billiard trajectories and the dyadic agreement
//! metric on them.

use super::event::EventKind;
use super::trace::Trajectory;

/// Obstacle labels of successive reflections; tangencies are excluded.
/// `truncated_at` records how many reflections were observed before the
/// trajectory ended or was cut off.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Itinerary {
    pub symbols: Vec<usize>,
    pub truncated_at: usize,
}

/// Reads the itinerary off a traced trajectory.
pub fn itinerary(traj: &Trajectory) -> Itinerary {
    let symbols: Vec<usize> = traj
        .events
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::Reflection { obstacle } => Some(obstacle),
            _ => None,
        })
        .collect();
    let truncated_at = symbols.len();
    Itinerary { symbols, truncated_at }
}

impl Itinerary {
    pub fn from_symbols(symbols: Vec<usize>) -> Self {
        let truncated_at = symbols.len();
        Itinerary { symbols, truncated_at }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Number of leading symbols shared with `other`.
    pub fn agreement(&self, other: &Itinerary) -> usize {
        self.symbols
            .iter()
            .zip(other.symbols.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }
}

/// Dyadic distance `sum_i 2^-i (1 - delta_{a_i b_i})` between itineraries.
///
/// Finite truncations use the convention that positions beyond one
/// sequence's truncation but not the other's always disagree, and the sum
/// is cut beyond both truncations. With this convention the distance is a
/// metric on finite sequences and is monotone in disagreement.
pub fn itinerary_distance(a: &Itinerary, b: &Itinerary) -> f64 {
    let la = a.symbols.len();
    let lb = b.symbols.len();
    let lo = la.min(lb);
    let hi = la.max(lb);
    let mut sum = 0.0;
    let mut w = 0.5;
    for i in 0..hi {
        let differ = if i < lo { a.symbols[i] != b.symbols[i] } else { true };
        if differ {
            sum += w;
        }
        w *= 0.5;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn it(symbols: &[usize]) -> Itinerary {
        Itinerary::from_symbols(symbols.to_vec())
    }

    #[test]
    fn identical_sequences_are_at_distance_zero() {
        let a = it(&[1, 2, 1, 2]);
        assert_eq!(itinerary_distance(&a, &a), 0.0);
    }

    #[test]
    fn single_leading_difference_is_one_half() {
        let a = it(&[1, 2, 2, 1]);
        let b = it(&[2, 2, 2, 1]);
        assert_eq!(itinerary_distance(&a, &b), 0.5);
    }

    #[test]
    fn geometric_tail_after_agreement() {
        // agree on the first n, disagree afterwards: 2^-n - 2^-l for equal
        // truncations at l, approaching 2^-n as l grows
        let n = 3;
        for l in [6, 20, 40] {
            let mut a = vec![1usize; l];
            let mut b = vec![1usize; l];
            for i in n..l {
                a[i] = 1;
                b[i] = 2;
            }
            let d = itinerary_distance(&it(&a), &it(&b));
            let exact = (2.0f64).powi(-(n as i32)) - (2.0f64).powi(-(l as i32));
            assert!((d - exact).abs() < 1e-15);
            assert!((d - (2.0f64).powi(-(n as i32))).abs() <= (2.0f64).powi(-(l as i32)));
        }
    }

    #[test]
    fn shorter_sequence_pads_as_disagreement() {
        let a = it(&[1, 2]);
        let b = it(&[1, 2, 1]);
        assert_eq!(itinerary_distance(&a, &b), 0.125);
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(
            a in prop::collection::vec(1usize..4, 0..12),
            b in prop::collection::vec(1usize..4, 0..12),
            c in prop::collection::vec(1usize..4, 0..12),
        ) {
            let (a, b, c) = (it(&a), it(&b), it(&c));
            let dab = itinerary_distance(&a, &b);
            let dba = itinerary_distance(&b, &a);
            let dac = itinerary_distance(&a, &c);
            let dbc = itinerary_distance(&b, &c);
            // symmetry
            prop_assert!((dab - dba).abs() < 1e-15);
            // identity of indiscernibles
            prop_assert_eq!(dab == 0.0, a == b);
            // triangle inequality
            prop_assert!(dac <= dab + dbc + 1e-15);
            // range
            prop_assert!((0.0..=1.0).contains(&dab));
        }
    }
}
