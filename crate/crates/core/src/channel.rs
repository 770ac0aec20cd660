//! Time-varying wireless channel: gain generation, noisy superposition, and
//! the CSI products the communication phase needs.
//!
//! Gains are i.i.d. standard normal per slot. For square channels each slot
//! passes the singularity guard; failing draws are replaced slot-wise and
//! counted, so the block structure survives the (measure-zero) event.
//!
//! CSI exists only in the communication phase: computation-phase code never
//! receives a [`ChannelRealization`] or [`CsiView`], which is how the
//! universality property is enforced at the type level.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::directions::DirectionIndex;
use crate::error::{Error, Result};
use crate::numerics::{self, RealMatrix};
use crate::seeds::Stream;

/// One channel draw: a K x M gain matrix per time slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    users: usize,
    nodes: usize,
    /// Row-major K x M gains, one matrix per slot.
    slots: Vec<RealMatrix>,
    /// Slots that had to be replaced by the singularity guard.
    redrawn: u64,
}

impl ChannelRealization {
    /// Draws `slots` i.i.d. gain matrices. Square draws failing the
    /// singularity guard are redrawn in place and counted.
    pub fn draw(users: usize, nodes: usize, slots: usize, rng: &mut Stream) -> Self {
        assert!(slots >= 1, "need at least one slot");
        let mut redrawn = 0u64;
        let mut out = Vec::with_capacity(slots);
        for _ in 0..slots {
            loop {
                let entries: Vec<f64> =
                    (0..users * nodes).map(|_| rng.sample(StandardNormal)).collect();
                let h = RealMatrix::new(users, nodes, entries);
                if users == nodes && numerics::invert(&h).is_err() {
                    redrawn += 1;
                    continue;
                }
                out.push(h);
                break;
            }
        }
        Self { users, nodes, slots: out, redrawn }
    }

    /// Validates an externally supplied realization (e.g. loaded from JSON)
    /// against the same guard the generator applies.
    pub fn from_slots(users: usize, nodes: usize, slots: Vec<RealMatrix>) -> Result<Self> {
        for h in &slots {
            if h.rows() != users || h.cols() != nodes {
                return Err(Error::DimensionMismatch { expected: users * nodes, found: h.rows() * h.cols() });
            }
            if users == nodes {
                numerics::invert(h)?;
            }
        }
        Ok(Self { users, nodes, slots, redrawn: 0 })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn matrix(&self, slot: usize) -> &RealMatrix {
        &self.slots[slot]
    }

    /// Gain from node `m` to user `k` in a slot.
    pub fn gain(&self, slot: usize, user: usize, node: usize) -> f64 {
        self.slots[slot].get(user, node)
    }

    pub fn redrawn_slots(&self) -> u64 {
        self.redrawn
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("channel serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ChannelRealization = serde_json::from_str(text)
            .map_err(|_| Error::DimensionMismatch { expected: 0, found: 0 })?;
        Self::from_slots(raw.users, raw.nodes, raw.slots)
    }
}

/// Sends one M-vector of symbols per slot through the channel, adding unit
/// AWGN at each user unless `noiseless` is set.
pub fn transmit(
    ch: &ChannelRealization,
    symbols: &[Vec<f64>],
    noise_rng: &mut Stream,
    noiseless: bool,
) -> Result<Vec<Vec<f64>>> {
    if symbols.len() != ch.len() {
        return Err(Error::DimensionMismatch { expected: ch.len(), found: symbols.len() });
    }
    let mut received = Vec::with_capacity(ch.len());
    for (t, x) in symbols.iter().enumerate() {
        if x.len() != ch.nodes() {
            return Err(Error::DimensionMismatch { expected: ch.nodes(), found: x.len() });
        }
        let mut y = ch.matrix(t).mul_vec(x);
        if !noiseless {
            for v in &mut y {
                let z: f64 = noise_rng.sample(StandardNormal);
                *v += z;
            }
        }
        received.push(y);
    }
    Ok(received)
}

/// Per-slot inverse channel matrices, available to encoders and decoders in
/// the communication phase only.
///
/// The inverse gain for the (user k, node m) pair is the (m, k) entry of
/// `H(t)^-1`: summing `h(k', m) * inverse_gain(k, m)` over nodes m yields
/// the Kronecker delta of k and k', which is exactly the cancellation the
/// monomial-weighted transmission relies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsiView {
    inverses: Vec<RealMatrix>,
}

impl CsiView {
    pub fn from_channel(ch: &ChannelRealization) -> Result<Self> {
        if ch.users() != ch.nodes() {
            return Err(Error::DimensionMismatch { expected: ch.users(), found: ch.nodes() });
        }
        let inverses = ch
            .slots
            .iter()
            .map(numerics::invert)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { inverses })
    }

    pub fn slots(&self) -> usize {
        self.inverses.len()
    }

    pub fn users(&self) -> usize {
        self.inverses.first().map_or(0, |m| m.rows())
    }

    /// Inverse matrix of slot `t`.
    pub fn inverse(&self, slot: usize) -> &RealMatrix {
        &self.inverses[slot]
    }

    /// Inverse gain b(k, m) for a slot: entry (m, k) of the slot's inverse.
    pub fn inverse_gain(&self, slot: usize, user: usize, node: usize) -> f64 {
        self.inverses[slot].get(node, user)
    }

    /// Monomial weight of a direction: the product over all (k, m) of
    /// `inverse_gain(k, m)` raised to the direction's exponent, with the
    /// 0^0 = 1 convention for the all-zero direction.
    pub fn monomial(&self, slot: usize, p: &DirectionIndex) -> f64 {
        let k = p.users();
        debug_assert_eq!(k, self.users(), "direction and channel sizes must agree");
        let mut product = 1.0;
        for user in 0..k {
            for node in 0..k {
                let exp = p.coord(user, node);
                if exp > 0 {
                    product *= self.inverse_gain(slot, user, node).powi(exp as i32);
                }
            }
        }
        product
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::enumerate_lattice;
    use crate::seeds::stream;

    #[test]
    fn draws_are_deterministic() {
        let a = ChannelRealization::draw(2, 2, 16, &mut stream(3));
        let b = ChannelRealization::draw(2, 2, 16, &mut stream(3));
        assert_eq!(a, b);
        assert_eq!(a.len(), 16);
        assert_eq!(a.matrix(0).rows(), 2);
        assert_eq!(a.matrix(0).cols(), 2);
    }

    #[test]
    fn gains_have_unit_second_moment() {
        let ch = ChannelRealization::draw(10, 10, 1000, &mut stream(5));
        let mut sum = 0.0;
        for t in 0..ch.len() {
            for e in ch.matrix(t).entries() {
                sum += e * e;
            }
        }
        let second_moment = sum / 100_000.0;
        assert!((second_moment - 1.0).abs() < 0.03, "second moment {second_moment}");
    }

    #[test]
    fn transmit_identity_channel_passes_symbols_through() {
        let slots = vec![RealMatrix::identity(2)];
        let ch = ChannelRealization::from_slots(2, 2, slots).unwrap();
        let y = transmit(&ch, &[vec![4.0, -2.0]], &mut stream(0), true).unwrap();
        assert_eq!(y, vec![vec![4.0, -2.0]]);
        let zero = transmit(&ch, &[vec![0.0, 0.0]], &mut stream(0), true).unwrap();
        assert_eq!(zero, vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn noiseless_transmit_matches_matrix_product() {
        let ch = ChannelRealization::draw(3, 3, 4, &mut stream(7));
        let symbols: Vec<Vec<f64>> = (0..4).map(|t| vec![t as f64, 1.0, -0.5]).collect();
        let y = transmit(&ch, &symbols, &mut stream(1), true).unwrap();
        for t in 0..4 {
            let direct = ch.matrix(t).mul_vec(&symbols[t]);
            for (a, b) in y[t].iter().zip(&direct) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn transmit_rejects_wrong_shapes() {
        let ch = ChannelRealization::draw(2, 2, 2, &mut stream(9));
        assert!(transmit(&ch, &[vec![1.0, 2.0]], &mut stream(0), true).is_err());
        assert!(transmit(&ch, &[vec![1.0], vec![2.0]], &mut stream(0), true).is_err());
    }

    #[test]
    fn inverses_multiply_back_to_identity() {
        let ch = ChannelRealization::draw(2, 2, 32, &mut stream(11));
        let csi = CsiView::from_channel(&ch).unwrap();
        for t in 0..ch.len() {
            let product = ch.matrix(t).mul(csi.inverse(t));
            for i in 0..2 {
                for j in 0..2 {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((product.get(i, j) - target).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn inverse_gain_sums_to_kronecker_delta() {
        // sum_m h(k', m) b(k, m) = delta(k, k'): the identity behind
        // over-the-air cancellation.
        let ch = ChannelRealization::draw(2, 2, 8, &mut stream(13));
        let csi = CsiView::from_channel(&ch).unwrap();
        for t in 0..ch.len() {
            for k in 0..2 {
                for kp in 0..2 {
                    let sum: f64 =
                        (0..2).map(|m| ch.gain(t, kp, m) * csi.inverse_gain(t, k, m)).sum();
                    let target = if k == kp { 1.0 } else { 0.0 };
                    assert!((sum - target).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn monomial_of_zero_direction_is_one() {
        let ch = ChannelRealization::draw(2, 2, 4, &mut stream(15));
        let csi = CsiView::from_channel(&ch).unwrap();
        let zero = &enumerate_lattice(2, 2).unwrap()[0];
        for t in 0..4 {
            assert_eq!(csi.monomial(t, zero), 1.0);
        }
    }

    #[test]
    fn monomial_single_user_is_a_plain_power() {
        let ch = ChannelRealization::draw(1, 1, 4, &mut stream(17));
        let csi = CsiView::from_channel(&ch).unwrap();
        let lattice = enumerate_lattice(1, 3).unwrap();
        for t in 0..4 {
            let b = csi.inverse_gain(t, 0, 0);
            for (exp, p) in lattice.iter().enumerate() {
                assert!((csi.monomial(t, p) - b.powi(exp as i32)).abs() <= 1e-12 * b.abs().powi(exp as i32).max(1.0));
            }
        }
    }

    #[test]
    fn monomial_matches_direct_power_product() {
        use crate::directions::DirectionIndex;
        let ch = ChannelRealization::draw(2, 2, 4, &mut stream(19));
        let csi = CsiView::from_channel(&ch).unwrap();
        let p = DirectionIndex::new(vec![1, 0, 0, 2], 3);
        for t in 0..4 {
            let expected = csi.inverse_gain(t, 0, 0) * csi.inverse_gain(t, 1, 1).powi(2);
            let got = csi.monomial(t, &p);
            assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn monomial_obeys_the_exponent_law() {
        use rand::Rng;
        let ch = ChannelRealization::draw(2, 2, 8, &mut stream(21));
        let csi = CsiView::from_channel(&ch).unwrap();
        let mut rng = stream(23);
        for _ in 0..50 {
            let a: Vec<u32> = (0..4).map(|_| rng.random_range(0..3u32)).collect();
            let b: Vec<u32> = (0..4).map(|_| rng.random_range(0..3u32)).collect();
            let sum: Vec<u32> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let pa = DirectionIndex::new(a, 3);
            let pb = DirectionIndex::new(b, 3);
            let ps = DirectionIndex::new(sum, 5);
            for t in 0..ch.len() {
                let lhs = csi.monomial(t, &ps);
                let rhs = csi.monomial(t, &pa) * csi.monomial(t, &pb);
                let scale = lhs.abs().max(rhs.abs()).max(1e-30);
                assert!((lhs - rhs).abs() / scale <= 1e-9);
            }
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let ch = ChannelRealization::draw(2, 2, 6, &mut stream(25));
        let reloaded = ChannelRealization::from_json(&ch.to_json()).unwrap();
        for t in 0..ch.len() {
            assert_eq!(ch.matrix(t).entries(), reloaded.matrix(t).entries());
        }
    }
}
