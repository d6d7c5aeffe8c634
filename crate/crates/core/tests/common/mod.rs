//! Independent reference computations used by the integration tests.
//!
//! Nothing here calls into the library's numerical paths.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type Mat = [[C; 2]; 2];

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for col in 0..2 {
            out[r][col] = a[r][0] * b[0][col] + a[r][1] * b[1][col];
        }
    }
    out
}

pub fn dagger(a: &Mat) -> Mat {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    let mut m: f64 = 0.0;
    for r in 0..2 {
        for col in 0..2 {
            m = m.max((a[r][col] - b[r][col]).norm());
        }
    }
    m
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &Mat) -> Mat {
    let norm: f64 = a.iter().flatten().map(|z| z.norm()).sum();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let s = [
        [a[0][0] * scale, a[0][1] * scale],
        [a[1][0] * scale, a[1][1] * scale],
    ];
    let mut result = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    let mut term = result;
    for k in 1..30 {
        term = matmul(&term, &s);
        let inv = 1.0 / k as f64;
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z *= inv;
            }
        }
        for r in 0..2 {
            for col in 0..2 {
                result[r][col] += term[r][col];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// `-i (omega/2) sigma_x tau`
pub fn rabi_generator(omega: f64, tau: f64) -> Mat {
    let x = c(0.0, -0.5 * omega * tau);
    [[c(0.0, 0.0), x], [x, c(0.0, 0.0)]]
}

/// SplitMix64 + xoshiro256++ written out from the published reference code.
pub struct RefXoshiro {
    s: [u64; 4],
}

impl RefXoshiro {
    pub fn seed_from_u64(mut seed: u64) -> Self {
        let mut s = [0u64; 4];
        for w in s.iter_mut() {
            seed = seed.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = seed;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            *w = z ^ (z >> 31);
        }
        Self { s }
    }

    pub fn for_trajectory(master: u64, index: u64) -> Self {
        let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E3779B97F4A7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        Self::seed_from_u64(z ^ (z >> 31))
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / 9007199254740992.0
    }
}

#[allow(clippy::too_many_arguments)]
/// Straight-line trajectory: real/imaginary parts in plain arrays, explicit
/// cos/sin rotation and diagonal Kraus scaling.
pub fn straight_line_trajectory(
    omega: f64,
    omega_e: f64,
    dp: f64,
    tau: f64,
    actual: [C; 2],
    estimate: [C; 2],
    steps: usize,
    rng: &mut RefXoshiro,
) -> Vec<f64> {
    let rot = |v: [C; 2], w: f64| {
        let (sn, cs) = (0.5 * w * tau).sin_cos();
        let mi = c(0.0, -sn);
        let out = [v[0] * cs + v[1] * mi, v[0] * mi + v[1] * cs];
        let n = (out[0].norm_sqr() + out[1].norm_sqr()).sqrt();
        [out[0] / n, out[1] / n]
    };
    let fid = |a: [C; 2], e: [C; 2]| {
        (a[0].conj() * e[0] + a[1].conj() * e[1])
            .norm_sqr()
            .min(1.0)
    };
    let (mut a, mut e) = (actual, estimate);
    let mut out = vec![fid(a, e)];
    let hi = (0.5 * (1.0 + dp)).sqrt();
    let lo = (0.5 * (1.0 - dp)).sqrt();
    for _ in 0..steps {
        a = rot(a, omega);
        e = rot(e, omega_e);
        let p0 = (0.5 * (1.0 + dp) * a[0].norm_sqr() + 0.5 * (1.0 - dp) * a[1].norm_sqr())
            .clamp(0.0, 1.0);
        let (k0, k1) = if rng.next_f64() < p0 {
            (hi, lo)
        } else {
            (lo, hi)
        };
        let upd = |v: [C; 2]| {
            let w = [v[0] * k0, v[1] * k1];
            let n = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
            [w[0] / n, w[1] / n]
        };
        a = upd(a);
        e = upd(e);
        out.push(fid(a, e));
    }
    out
}

/// Exact mean over a uniform mean angle of the mean-angle form, divided by
/// `tau`, from the elementary averages
/// `<1/(1 - k cos^2)> = 1/s` and `<sin^2/(1 - k cos^2)> = (1 - s)/k`, `s = sqrt(1 - k)`.
///
/// `sqrt_sign` is the sign in front of `sqrt(F(1-F)) sin(delta tau)`.
pub fn averaged_rate_exact(f: f64, dp: f64, tau: f64, delta: f64, sqrt_sign: f64) -> f64 {
    let k = dp * dp;
    let s = (1.0 - k).sqrt();
    let dt = delta * tau;
    let gain = (1.0 - f) * (1.0 - s);
    let loss = s * (sqrt_sign * (f * (1.0 - f)).sqrt() * dt.sin() + (f - 0.5) * (1.0 - dt.cos()));
    (gain - loss) / tau
}
