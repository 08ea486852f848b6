use rand::Rng;

use super::beams::{beam_gains, complex_normal, generate_beams, BeamMatrix};
use crate::config::FeedbackScheme;
use num::complex::Complex64;

/// SINRs of one drop, indexed by `(user, resource block, beam)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SinrTable {
    k: usize,
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl SinrTable {
    pub fn from_values(k: usize, n: usize, m: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), k * n * m, "table size mismatch");
        SinrTable { k, n, m, values }
    }

    /// Draws beams for every resource block, then each user's channel on
    /// each block, in that order.
    pub fn draw<R: Rng + ?Sized>(rho: &[f64], n: usize, m: usize, rng: &mut R) -> Self {
        let k = rho.len();
        let beams: Vec<BeamMatrix> = (0..n).map(|_| generate_beams(m, rng)).collect();
        let mut values = vec![0.0; k * n * m];
        let mut h = vec![Complex64::new(0.0, 0.0); m];
        let mut gains = vec![0.0; m];
        let fm = m as f64;
        for (user, &r) in rho.iter().enumerate() {
            let noise = fm / r;
            for (rb, b) in beams.iter().enumerate() {
                for z in h.iter_mut() {
                    *z = complex_normal(rng);
                }
                beam_gains(&h, b, &mut gains);
                let total: f64 = gains.iter().sum();
                let base = (user * n + rb) * m;
                for (v, &g) in values[base..base + m].iter_mut().zip(&gains) {
                    *v = g / (noise + (total - g).max(0.0));
                }
            }
        }
        SinrTable { k, n, m, values }
    }

    pub fn users(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> usize {
        self.n
    }

    pub fn beams(&self) -> usize {
        self.m
    }

    pub fn get(&self, user: usize, rb: usize, beam: usize) -> f64 {
        self.values[(user * self.n + rb) * self.m + beam]
    }

    fn row(&self, user: usize, rb: usize) -> &[f64] {
        let base = (user * self.n + rb) * self.m;
        &self.values[base..base + self.m]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackReport {
    pub user: u32,
    pub rb: u32,
    pub beam: u32,
    pub sinr: f64,
}

/// Index and value of the largest entry; the lowest index wins ties.
fn argmax(xs: &[f64]) -> (usize, f64) {
    let mut best = (0, xs[0]);
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > best.1 {
            best = (i, x);
        }
    }
    best
}

/// The reports each user sends under `scheme`; `l` only matters for best-L.
pub fn apply_feedback(table: &SinrTable, scheme: FeedbackScheme, l: usize) -> Vec<FeedbackReport> {
    let mut out = Vec::new();
    apply_feedback_into(table, scheme, l, &mut out);
    out
}

pub(crate) fn apply_feedback_into(
    table: &SinrTable,
    scheme: FeedbackScheme,
    l: usize,
    out: &mut Vec<FeedbackReport>,
) {
    out.clear();
    let (k, n) = (table.k, table.n);
    let mut best: Vec<(usize, usize, f64)> = Vec::with_capacity(n);
    for user in 0..k {
        match scheme {
            FeedbackScheme::FullFeedback => {
                for rb in 0..n {
                    for (beam, &s) in table.row(user, rb).iter().enumerate() {
                        out.push(report(user, rb, beam, s));
                    }
                }
            }
            FeedbackScheme::SpatialSelective => {
                for rb in 0..n {
                    let (beam, s) = argmax(table.row(user, rb));
                    out.push(report(user, rb, beam, s));
                }
            }
            FeedbackScheme::BestL => {
                best.clear();
                for rb in 0..n {
                    let (beam, s) = argmax(table.row(user, rb));
                    best.push((rb, beam, s));
                }
                // Stable sort keeps the lower block first on ties.
                best.sort_by(|a, b| b.2.total_cmp(&a.2));
                best.truncate(l.min(n));
                best.sort_by_key(|c| c.0);
                for &(rb, beam, s) in &best {
                    out.push(report(user, rb, beam, s));
                }
            }
        }
    }
}

fn report(user: usize, rb: usize, beam: usize, sinr: f64) -> FeedbackReport {
    FeedbackReport {
        user: user as u32,
        rb: rb as u32,
        beam: beam as u32,
        sinr,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn report_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = SinrTable::draw(&[1.0, 2.0, 3.0], 1, 2, &mut rng);
        assert_eq!(apply_feedback(&t, FeedbackScheme::FullFeedback, 1).len(), 6);
        assert_eq!(apply_feedback(&t, FeedbackScheme::SpatialSelective, 1).len(), 3);
        let t = SinrTable::draw(&[10.0; 9], 5, 4, &mut rng);
        assert_eq!(apply_feedback(&t, FeedbackScheme::BestL, 2).len(), 18);
    }

    #[test]
    fn full_depth_best_l_is_spatial() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = SinrTable::draw(&[10.0; 5], 6, 3, &mut rng);
        assert_eq!(
            apply_feedback(&t, FeedbackScheme::BestL, 6),
            apply_feedback(&t, FeedbackScheme::SpatialSelective, 1)
        );
    }

    #[test]
    fn best_l_picks_top_blocks() {
        // One user, three blocks, one beam.
        let t = SinrTable::from_values(1, 3, 1, vec![0.5, 2.0, 1.0]);
        let r = apply_feedback(&t, FeedbackScheme::BestL, 2);
        let rbs: Vec<u32> = r.iter().map(|x| x.rb).collect();
        assert_eq!(rbs, vec![1, 2]);
    }
}
