use num::complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// `M` orthonormal beams stored column by column.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamMatrix {
    m: usize,
    data: Vec<Complex64>,
}

impl BeamMatrix {
    pub fn size(&self) -> usize {
        self.m
    }

    pub fn beam(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.m..(j + 1) * self.m]
    }

    /// `Φ†Φ`, which should be the identity.
    pub fn gram(&self) -> Vec<Complex64> {
        let m = self.m;
        let mut g = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            for j in 0..m {
                g[i * m + j] = inner(self.beam(i), self.beam(j));
            }
        }
        g
    }
}

/// One `CN(0, 1)` draw.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `⟨a, b⟩ = a† b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Haar-distributed orthonormal beams: Gram–Schmidt on a complex Gaussian
/// matrix. Normalizing each column makes the implied `R` factor positive on
/// the diagonal, which is the phase convention that yields the Haar measure.
/// The projection is applied twice so the columns are orthonormal to
/// roundoff.
pub fn generate_beams<R: Rng + ?Sized>(m: usize, rng: &mut R) -> BeamMatrix {
    assert!(m >= 1, "need at least one beam");
    let mut data: Vec<Complex64> = (0..m * m).map(|_| complex_normal(rng)).collect();
    for j in 0..m {
        for _pass in 0..2 {
            for i in 0..j {
                let (done, rest) = data.split_at_mut(j * m);
                let q = &done[i * m..(i + 1) * m];
                let v = &mut rest[..m];
                let c = inner(q, v);
                for (vk, qk) in v.iter_mut().zip(q) {
                    *vk -= c * qk;
                }
            }
        }
        let col = &mut data[j * m..(j + 1) * m];
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in col.iter_mut() {
            *z /= norm;
        }
    }
    BeamMatrix { m, data }
}

/// Received power `|h†φ_j|²` on every beam.
pub fn beam_gains(h: &[Complex64], beams: &BeamMatrix, out: &mut [f64]) {
    let m = beams.m;
    for (j, g) in out.iter_mut().enumerate().take(m) {
        let col = &beams.data[j * m..(j + 1) * m];
        let (mut re, mut im) = (0.0, 0.0);
        for (a, b) in h.iter().zip(col) {
            // conj(a)·b
            re += a.re * b.re + a.im * b.im;
            im += a.re * b.im - a.im * b.re;
        }
        *g = re * re + im * im;
    }
}

/// `|h†φ_m|² / (M/ρ + Σ_{i≠m} |h†φ_i|²)`.
pub fn compute_sinr(h: &[Complex64], beams: &BeamMatrix, m: usize, rho: f64) -> f64 {
    let mut gains = vec![0.0; beams.size()];
    beam_gains(h, beams, &mut gains);
    sinr_from_gains(&gains, m, rho)
}

pub(crate) fn sinr_from_gains(gains: &[f64], m: usize, rho: f64) -> f64 {
    let total: f64 = gains.iter().sum();
    let interference = total - gains[m];
    gains[m] / (gains.len() as f64 / rho + interference.max(0.0))
}
