//! Dense complex products through real BLAS-style kernels.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

type C64 = Complex64;

/// `a * b`, split into real products and parallel over column blocks.
pub fn cmatmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    assert_eq!(a.ncols(), b.nrows());
    let (m, n) = (a.nrows(), b.ncols());
    let ar = a.map(|z| z.re);
    let ai = a.map(|z| z.im);
    let block = n.div_ceil(rayon::current_num_threads().max(1)).max(16);
    let starts: Vec<usize> = (0..n).step_by(block).collect();
    let parts: Vec<(usize, DMatrix<f64>, DMatrix<f64>)> = starts
        .par_iter()
        .map(|&s| {
            let w = block.min(n - s);
            let bs = b.columns(s, w);
            let br = bs.map(|z| z.re);
            let bi = bs.map(|z| z.im);
            // 3-multiplication form
            let t1 = &ar * &br;
            let t2 = &ai * &bi;
            let t3 = (&ar + &ai) * (&br + &bi);
            let re = &t1 - &t2;
            let im = t3 - t1 - t2;
            (s, re, im)
        })
        .collect();
    let mut out = DMatrix::zeros(m, n);
    for (s, re, im) in parts {
        for j in 0..re.ncols() {
            for i in 0..m {
                out[(i, s + j)] = C64::new(re[(i, j)], im[(i, j)]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_product() {
        let a = DMatrix::from_fn(37, 23, |i, j| C64::new((i as f64 * 0.3).sin(), (j as f64 + 0.5 * i as f64).cos()));
        let b = DMatrix::from_fn(23, 51, |i, j| C64::new((i * j) as f64 * 0.01, 1.0 / (1.0 + i as f64 + j as f64)));
        let d = cmatmul(&a, &b) - &a * &b;
        assert!(d.iter().all(|z| z.norm() < 1e-12));
    }
}
