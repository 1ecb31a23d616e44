//! Disjointness with an untrusted prover, via low-degree extensions.
//!
//! `x` and `y` are split into `n^α` blocks of `n^(1-α)` bits. Merlin claims
//! the polynomial `s(i) = sum_j ã(i,j) b̃(i,j)`; the players each send the
//! extension blocks at random points of `S`, and wherever their points
//! collide the referee checks Merlin's claim before testing
//! `sum_i s'(i) = 0`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversaries::{disj_message, MerlinStrategy};
use crate::error::{Error, Result};
use crate::field::{agreement_count, find_prime, poly_eval, smallest_prime_above, EvalTable, PrimeField, UniPoly};
use crate::model::{BitString, Decision, Message, ProtocolType, Transcript};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisjParams {
    pub n: usize,
    pub alpha_num: u32,
    pub alpha_den: u32,
    pub field: PrimeField,
    /// Whether `q` had to be raised above the smallest prime in `(n, 2n]`
    /// to fit `S`.
    pub field_enlarged: bool,
    pub rows: usize,
    pub cols: usize,
    pub points: Vec<u64>,
    pub samples_per_player: usize,
    pub sample_scale: f64,
}

impl DisjParams {
    /// `alpha = (num, den)`; `sample_scale` multiplies the nominal
    /// `100 * ceil(sqrt(|S|))` draws per player.
    pub fn new(n: usize, alpha: (u32, u32), sample_scale: f64) -> Result<Self> {
        let (num, den) = alpha;
        if den == 0 || num == 0 || num >= den {
            return Err(Error::InvalidParameter(format!("alpha = {num}/{den} must lie in (0, 1)")));
        }
        if !(sample_scale > 0.0 && sample_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("sample scale {sample_scale} must be positive")));
        }
        let rows = (n as f64).powf(num as f64 / den as f64).round() as usize;
        if rows < 2 || n % rows != 0 || ((rows as f64).powi(den as i32) - (n as f64).powi(num as i32)).abs() > 0.5 {
            return Err(Error::InvalidParameter(format!("n = {n} has no integral n^({num}/{den}) split")));
        }
        let cols = n / rows;
        let degree = 2 * (rows - 1);
        let s_size = 10 * degree;
        let mut field = find_prime(n as u64)?;
        let mut field_enlarged = false;
        if field.modulus() <= s_size as u64 {
            field = PrimeField::new(smallest_prime_above(s_size as u64))?;
            field_enlarged = true;
        }
        let nominal = 100 * (s_size as f64).sqrt().ceil() as usize;
        let samples_per_player = ((nominal as f64 * sample_scale).ceil() as usize).max(1);
        Ok(DisjParams {
            n,
            alpha_num: num,
            alpha_den: den,
            field,
            field_enlarged,
            rows,
            cols,
            points: (1..=s_size as u64).collect(),
            samples_per_player,
            sample_scale,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Degree bound `2 (n^α - 1)` on `s`.
    pub fn degree_bound(&self) -> usize {
        2 * (self.rows - 1)
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    fn tables(&self, x: &BitString, y: &BitString) -> Result<(EvalTable, EvalTable)> {
        Ok((
            EvalTable::from_bits(self.field, x, self.rows, self.cols)?,
            EvalTable::from_bits(self.field, y, self.rows, self.cols)?,
        ))
    }

    fn node_sum(&self, p: &UniPoly) -> u64 {
        let f = self.field;
        (1..=self.rows as u64).fold(0, |acc, i| f.add(acc, poly_eval(p, i, &f)))
    }

    fn draws<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let mut r: Vec<u64> = (0..self.samples_per_player)
            .map(|_| self.points[rng.random_range(0..self.points.len())])
            .collect();
        r.sort_unstable();
        r
    }
}

fn encode_blocks(draws: &[u64], table: &EvalTable, bits_per: usize) -> Result<(BitString, Vec<Vec<u64>>)> {
    let mut bits = BitString::zeros(0);
    let mut blocks = Vec::with_capacity(draws.len());
    let mut last: Option<(u64, Vec<u64>)> = None;
    for &r in draws {
        let block = match &last {
            Some((lr, b)) if *lr == r => b.clone(),
            _ => table.block_at(r)?,
        };
        bits.push_uint(r, bits_per);
        for &v in &block {
            bits.push_uint(v, bits_per);
        }
        last = Some((r, block.clone()));
        blocks.push(block);
    }
    Ok((bits, blocks))
}

pub fn disj_rrr_run<R: Rng + ?Sized>(
    x: &BitString,
    y: &BitString,
    merlin: &MerlinStrategy,
    p: &DisjParams,
    rng: &mut R,
) -> Result<(Decision, Transcript)> {
    let (a, b) = p.tables(x, y)?;
    let f = p.field;
    let w = f.element_bits();
    let s_prime = disj_message(merlin, x, y, p)?;

    let ra = p.draws(rng);
    let rb = p.draws(rng);
    let (abits, ablocks) = encode_blocks(&ra, &a, w)?;
    let (bbits, bblocks) = encode_blocks(&rb, &b, w)?;
    let mut mbits = BitString::zeros(0);
    for k in 0..=p.degree_bound() {
        mbits.push_uint(s_prime.coeffs().get(k).copied().unwrap_or(0), w);
    }

    let decision = referee(&s_prime, &ra, &ablocks, &rb, &bblocks, p);
    Ok((
        decision,
        Transcript {
            protocol: ProtocolType::new("RRR")?,
            alice: Message::classical(abits),
            bob: Message::classical(bbits),
            merlin: Some(Message::classical(mbits)),
        },
    ))
}

fn referee(s_prime: &UniPoly, ra: &[u64], ablocks: &[Vec<u64>], rb: &[u64], bblocks: &[Vec<u64>], p: &DisjParams) -> Decision {
    if s_prime.degree().is_some_and(|d| d > p.degree_bound()) {
        return Decision::Reject;
    }
    let f = p.field;
    let (mut i, mut j) = (0, 0);
    let mut collided = false;
    while i < ra.len() && j < rb.len() {
        match ra[i].cmp(&rb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let r = ra[i];
                let s = ablocks[i].iter().zip(&bblocks[j]).fold(0, |acc, (&u, &v)| f.add(acc, f.mul(u, v)));
                if s != poly_eval(s_prime, r, &f) {
                    return Decision::Reject;
                }
                collided = true;
                while i < ra.len() && ra[i] == r {
                    i += 1;
                }
                while j < rb.len() && rb[j] == r {
                    j += 1;
                }
            }
        }
    }
    if collided && p.node_sum(s_prime) == 0 {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

/// Exact acceptance of the disjointness referee for a fixed `s'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisjExact {
    /// Size of the agreement set `A = { r in S : s'(r) = s(r) }`.
    pub agreement: usize,
    pub sum_zero: bool,
    /// Probability every common draw lies in `A` (including no common draw).
    pub consistent: f64,
    pub no_collision: f64,
    /// Overall acceptance: `[sum_zero] * (consistent - no_collision)`.
    pub acceptance: f64,
}

pub fn disj_rrr_soundness_exact(x: &BitString, y: &BitString, s_prime: &UniPoly, p: &DisjParams) -> Result<DisjExact> {
    let (a, b) = p.tables(x, y)?;
    let s = crate::field::s_polynomial(&a, &b)?;
    let f = p.field;
    let universe = p.points.len();
    let degree_ok = s_prime.degree().is_none_or(|d| d <= p.degree_bound());
    let agreement = agreement_count(&s, s_prime, &p.points, &f);
    let c = p.samples_per_player;
    let consistent = avoid_probability(universe, universe - agreement, c);
    let no_collision = avoid_probability(universe, universe, c);
    let sum_zero = p.node_sum(s_prime) == 0;
    let acceptance = if sum_zero && degree_ok { (consistent - no_collision).max(0.0) } else { 0.0 };
    Ok(DisjExact { agreement, sum_zero, consistent, no_collision, acceptance })
}

/// Distribution of the number of distinct values Alice's `c` uniform draws
/// from a universe of `universe` points hit inside a fixed subset of size
/// `subset`.
pub fn distinct_hits(universe: usize, subset: usize, c: usize) -> Vec<f64> {
    let mut dist = vec![0.0; subset + 1];
    dist[0] = 1.0;
    let u = universe as f64;
    for _ in 0..c {
        let mut next = vec![0.0; subset + 1];
        for (k, &pk) in dist.iter().enumerate() {
            if pk == 0.0 {
                continue;
            }
            let fresh = (subset - k) as f64 / u;
            next[k] += pk * (1.0 - fresh);
            if k < subset {
                next[k + 1] += pk * fresh;
            }
        }
        dist = next;
    }
    dist
}

/// Probability that Bob's `c` draws avoid every point Alice hit inside a
/// bad subset of size `bad`.
fn avoid_probability(universe: usize, bad: usize, c: usize) -> f64 {
    let u = universe as f64;
    distinct_hits(universe, bad, c)
        .iter()
        .enumerate()
        .map(|(k, pk)| pk * ((u - k as f64) / u).powi(c as i32))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::disj_wrong_poly;
    use crate::field::s_polynomial;
    use crate::model::{sample_instance, InstanceKind, RandomSource};

    #[test]
    fn parameters_at_n64() {
        let p = DisjParams::new(64, (2, 3), 1.0).unwrap();
        assert_eq!((p.rows, p.cols), (16, 4));
        assert_eq!(p.degree_bound(), 30);
        assert_eq!(p.points.len(), 300);
        assert_eq!(p.field.modulus(), 307);
        assert!(p.field_enlarged);
        assert_eq!(p.samples_per_player, 1800);
        assert_eq!(DisjParams::new(64, (2, 3), 0.1).unwrap().samples_per_player, 180);
        assert!(DisjParams::new(60, (2, 3), 1.0).is_err());
        assert!(DisjParams::new(64, (3, 3), 1.0).is_err());
    }

    /// Brute force over every pair of draw sequences for a tiny universe.
    fn brute(universe: usize, agree: usize, c: usize) -> (f64, f64) {
        let total = universe.pow(c as u32);
        let seq = |mut code: usize| {
            (0..c)
                .map(|_| {
                    let v = code % universe;
                    code /= universe;
                    v
                })
                .collect::<Vec<_>>()
        };
        let (mut consistent, mut none) = (0usize, 0usize);
        for ca in 0..total {
            let da = seq(ca);
            for cb in 0..total {
                let db = seq(cb);
                let common: Vec<usize> = da.iter().copied().filter(|v| db.contains(v)).collect();
                consistent += usize::from(common.iter().all(|&v| v < agree));
                none += usize::from(common.is_empty());
            }
        }
        let t = (total * total) as f64;
        (consistent as f64 / t, none as f64 / t)
    }

    #[test]
    fn collision_formula_matches_enumeration() {
        for universe in 2..=5 {
            for agree in 0..=universe {
                for c in 1..=3 {
                    let (consistent, none) = brute(universe, agree, c);
                    assert!((avoid_probability(universe, universe - agree, c) - consistent).abs() < 1e-12);
                    assert!((avoid_probability(universe, universe, c) - none).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn honest_polynomial_on_disjoint_inputs() {
        let p = DisjParams::new(64, (2, 3), 0.05).unwrap();
        let mut rng = RandomSource::new(1, 0).rng();
        let (x, y) = sample_instance(InstanceKind::DisjPair, 64, &mut rng).unwrap().pair().unwrap();
        let s = s_polynomial(&p.tables(&x, &y).unwrap().0, &p.tables(&x, &y).unwrap().1).unwrap();
        let e = disj_rrr_soundness_exact(&x, &y, &s, &p).unwrap();
        assert_eq!(e.agreement, 300);
        assert_eq!(e.consistent, 1.0);
        assert!((e.acceptance - (1.0 - e.no_collision)).abs() < 1e-15);
    }

    #[test]
    fn honest_polynomial_on_intersecting_inputs_always_rejects() {
        let p = DisjParams::new(64, (2, 3), 0.05).unwrap();
        let mut rng = RandomSource::new(2, 0).rng();
        for _ in 0..20 {
            let (x, y) = sample_instance(InstanceKind::IntersectPair, 64, &mut rng).unwrap().pair().unwrap();
            let (d, _) = disj_rrr_run(&x, &y, &MerlinStrategy::DisjHonest, &p, &mut rng).unwrap();
            assert_eq!(d, Decision::Reject);
        }
    }

    #[test]
    fn agreement_set_is_empty_means_consistent_equals_no_collision() {
        let p = DisjParams::new(64, (2, 3), 0.05).unwrap();
        let mut rng = RandomSource::new(3, 0).rng();
        let (x, y) = sample_instance(InstanceKind::IntersectPair, 64, &mut rng).unwrap().pair().unwrap();
        // Find a cheating polynomial that agrees with s nowhere on S.
        for _ in 0..1000 {
            let sp = disj_wrong_poly(&x, &y, &p, &mut rng).unwrap();
            let e = disj_rrr_soundness_exact(&x, &y, &sp, &p).unwrap();
            if e.agreement == 0 {
                assert!((e.consistent - e.no_collision).abs() < 1e-15);
                assert_eq!(e.acceptance, 0.0);
                return;
            }
        }
        panic!("no polynomial with empty agreement set");
    }

    #[test]
    fn over_degree_polynomial_rejects() {
        let p = DisjParams::new(64, (2, 3), 0.05).unwrap();
        let x = BitString::zeros(64);
        let mut coeffs = vec![0; p.degree_bound() + 2];
        coeffs[p.degree_bound() + 1] = 1;
        let sp = UniPoly::new(coeffs);
        let (a, b) = p.tables(&x, &x).unwrap();
        let ra: Vec<u64> = vec![1];
        let blocks = vec![a.block_at(1).unwrap()];
        let bblocks = vec![b.block_at(1).unwrap()];
        assert_eq!(referee(&sp, &ra, &blocks, &ra, &bblocks, &p), Decision::Reject);
        assert_eq!(disj_rrr_soundness_exact(&x, &x, &sp, &p).unwrap().acceptance, 0.0);
    }

    #[test]
    fn message_lengths() {
        let p = DisjParams::new(64, (2, 3), 0.05).unwrap();
        let mut rng = RandomSource::new(4, 0).rng();
        let (x, y) = sample_instance(InstanceKind::DisjPair, 64, &mut rng).unwrap().pair().unwrap();
        let (_, t) = disj_rrr_run(&x, &y, &MerlinStrategy::DisjHonest, &p, &mut rng).unwrap();
        let w = p.field.element_bits();
        let c = p.samples_per_player;
        assert_eq!(t.lengths(), (c * (1 + p.cols) * w, c * (1 + p.cols) * w, (p.degree_bound() + 1) * w));
        t.validate(None).unwrap();
    }
}
