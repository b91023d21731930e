//! Cell averages of the weight `|x|^{-b}` on a cell-centred grid.
//!
//! Sampling `|x|^{-b}` at cell centres turns `∫|x|^{-b} f` into a rule whose
//! error decays only like `h^{N-b}`, dominated by the cells around the
//! origin. Replacing the point values by the exact averages over each cell
//! restores second-order accuracy for smooth `f`.
//!
//! With an even number of points per axis the origin is a grid vertex, so
//! in units of `h` every cell is `∏ [m_i, m_i + 1]` up to reflections, with
//! integer `m_i >= 0`. Averages depend only on the sorted tuple `(m_i)`:
//!
//! * in one dimension they are available in closed form;
//! * cells touching the origin use the self-similarity of `|x|^{-b}`:
//!   the sub-cube `[0, 1/2]^N` carries `2^{b-N}` of the whole integral;
//! * other cells within [`NEAR`] use adaptive tensor Gauss-Legendre;
//! * the rest use the centre value plus the `h²/24 Δ` correction.

use std::collections::HashMap;

use crate::grid::GridSpec;
use crate::scalar::Real;

/// Cells with every `m_i <= NEAR` are integrated by quadrature.
const NEAR: usize = 16;

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Average of `|x|^{-b}` over every cell of `grid`, in the grid's flat
/// (row-major) order.
pub fn singular_weights<T: Real>(grid: &GridSpec<T>, b: T) -> Vec<T> {
    if b == T::zero() {
        return vec![T::one(); grid.len()];
    }
    let bf = b.to_f64_lossy();
    let n = grid.n;
    let m = grid.points;
    let half = m / 2;
    let scale = grid.spacing().powf(-b);
    // distance index of each axis position from the origin vertex
    let dist: Vec<usize> = (0..m).map(|k| if k < half { half - 1 - k } else { k - half }).collect();
    let mut cache: HashMap<Vec<usize>, T> = HashMap::new();
    let mut out = Vec::with_capacity(grid.len());
    let mut idx = vec![0usize; n];
    let mut key = vec![0usize; n];
    for flat in 0..grid.len() {
        grid.unravel(flat, &mut idx);
        for (k, &i) in key.iter_mut().zip(&idx) {
            *k = dist[i];
        }
        key.sort_unstable();
        let v = match cache.get(&key) {
            Some(&v) => v,
            None => {
                let v = T::lit(unit_cell_average(&key, bf)) * scale;
                cache.insert(key.clone(), v);
                v
            }
        };
        out.push(v);
    }
    out
}

/// Average of `|x|^{-b}` over the unit cell `∏ [m_i, m_i + 1]`.
pub fn unit_cell_average(m: &[usize], b: f64) -> f64 {
    let n = m.len();
    if n == 1 {
        let a = m[0] as f64;
        let ob = 1.0 - b;
        return ((a + 1.0).powf(ob) - a.powf(ob)) / ob;
    }
    if m.iter().all(|&k| k <= NEAR) {
        let lo: Vec<f64> = m.iter().map(|&k| k as f64).collect();
        return cube_integral(&lo, 1.0, b, 0);
    }
    let c2: f64 = m.iter().map(|&k| (k as f64 + 0.5).powi(2)).sum();
    let nf = n as f64;
    c2.powf(-b / 2.0) * (1.0 + b * (b + 2.0 - nf) / (24.0 * c2))
}

/// `∫ |x|^{-b}` over the cube `∏ [lo_i, lo_i + size]` (all `lo_i >= 0`).
fn cube_integral(lo: &[f64], size: f64, b: f64, depth: usize) -> f64 {
    let n = lo.len();
    let half = size / 2.0;
    if lo.iter().all(|&x| x == 0.0) {
        // whole = 2^{b-N} whole + the 2^N - 1 children away from the origin
        let mut rest = 0.0;
        for child in 1..(1usize << n) {
            let clo: Vec<f64> = (0..n).map(|i| if child >> i & 1 == 1 { half } else { 0.0 }).collect();
            rest += cube_integral(&clo, half, b, depth + 1);
        }
        return rest / (1.0 - 2f64.powf(b - n as f64));
    }
    let dist = lo.iter().map(|&x| x * x).sum::<f64>().sqrt();
    if dist < 1.5 * size && depth < 12 {
        let mut total = 0.0;
        for child in 0..(1usize << n) {
            let clo: Vec<f64> = (0..n)
                .map(|i| lo[i] + if child >> i & 1 == 1 { half } else { 0.0 })
                .collect();
            total += cube_integral(&clo, half, b, depth + 1);
        }
        return total;
    }
    gauss_cube(lo, size, b)
}

fn gauss_cube(lo: &[f64], size: f64, b: f64) -> f64 {
    let n = lo.len();
    let q = GL_NODES.len();
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        let mut r2 = 0.0;
        for (d, &k) in idx.iter().enumerate() {
            let x = lo[d] + size * (GL_NODES[k] + 1.0) / 2.0;
            r2 += x * x;
            w *= GL_WEIGHTS[k] / 2.0;
        }
        total += w * r2.powf(-b / 2.0);
        let mut d = 0;
        while d < n {
            idx[d] += 1;
            if idx[d] < q {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            break;
        }
    }
    total * size.powi(n as i32)
}
