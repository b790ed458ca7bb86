//! Eigendecomposition of small Hermitian complex matrices by cyclic Jacobi
//! rotations. Sized for the 4×4 pair matrices and 64×64 density matrices used
//! here; no external backend required.

use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Eigenvalues (ascending) and eigenvectors of an n×n Hermitian matrix given
/// in row-major order. Eigenvector j is stored in column j of the returned
/// row-major matrix: element i of vector j sits at `vecs[i*n + j]`.
///
/// Panics if the input is not Hermitian to within 1e-9 of its scale.
pub fn hermitian_eigen(n: usize, a: &[C64]) -> (Vec<f64>, Vec<C64>) {
    assert_eq!(a.len(), n * n);
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    for r in 0..n {
        for c in 0..n {
            assert!(
                (a[r * n + c] - a[c * n + r].conj()).norm() <= 1e-9 * scale,
                "hermitian_eigen: input is not Hermitian"
            );
        }
    }

    let mut m: Vec<C64> = a.to_vec();
    // Symmetrize exactly so rotations see a clean Hermitian matrix.
    for r in 0..n {
        for c in r..n {
            let v = (m[r * n + c] + m[c * n + r].conj()) * 0.5;
            m[r * n + c] = v;
            m[c * n + r] = v.conj();
        }
    }
    let mut vecs: Vec<C64> = vec![ZERO; n * n];
    for k in 0..n {
        vecs[k * n + k] = C64::new(1.0, 0.0);
    }

    let tol = 1e-30 * scale * scale;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q].norm_sqr();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = m[p * n + q];
                if b.norm_sqr() <= tol / (n * n) as f64 {
                    continue;
                }
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let delta = 0.5 * (app - aqq);
                let r = (delta * delta + b.norm_sqr()).sqrt();
                // Eigenvalue of the 2×2 block farthest from app, for stability.
                let lambda = 0.5 * (app + aqq) - delta.signum() * r;
                // Eigenvector (b, λ − app), its orthogonal complement (−(λ−app), b̄).
                let y = lambda - app;
                let nrm = (b.norm_sqr() + y * y).sqrt();
                let (c1, c2) = (b / nrm, C64::new(y / nrm, 0.0));
                // Unitary J with columns [v, w]; apply A ← J† A J, V ← V J.
                rotate(&mut m, n, p, q, c1, c2);
                rotate_right(&mut vecs, n, p, q, c1, c2);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|k| m[k * n + k].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&k| diag[k]).collect();
    let mut sorted = vec![ZERO; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            sorted[i * n + new_col] = vecs[i * n + old_col];
        }
    }
    (vals, sorted)
}

/// Eigenvalues only (ascending).
pub fn hermitian_eigenvalues(n: usize, a: &[C64]) -> Vec<f64> {
    hermitian_eigen(n, a).0
}

// A ← J† A J with J acting on columns (p, q): J[:, p] = (c1, c2), J[:, q] = (−c2*, c1*)
// in the (p, q) subspace (columns of J are the 2×2 block eigenvectors).
fn rotate(m: &mut [C64], n: usize, p: usize, q: usize, c1: C64, c2: C64) {
    // Column update: A ← A J.
    for i in 0..n {
        let aip = m[i * n + p];
        let aiq = m[i * n + q];
        m[i * n + p] = aip * c1 + aiq * c2;
        m[i * n + q] = aip * (-c2.conj()) + aiq * c1.conj();
    }
    // Row update: A ← J† A.
    for j in 0..n {
        let apj = m[p * n + j];
        let aqj = m[q * n + j];
        m[p * n + j] = c1.conj() * apj + c2.conj() * aqj;
        m[q * n + j] = -c2 * apj + c1 * aqj;
    }
}

// V ← V J.
fn rotate_right(v: &mut [C64], n: usize, p: usize, q: usize, c1: C64, c2: C64) {
    for i in 0..n {
        let vip = v[i * n + p];
        let viq = v[i * n + q];
        v[i * n + p] = vip * c1 + viq * c2;
        v[i * n + q] = vip * (-c2.conj()) + viq * c1.conj();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_by_two_known_values() {
        // [[1, i], [-i, 1]] has eigenvalues {0, 2}.
        let a = vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)];
        let vals = hermitian_eigenvalues(2, &a);
        assert!((vals[0] - 0.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bell_projector_spectrum() {
        // |Ψ⟩ = (|01⟩ + |10⟩)/√2 projector: eigenvalues {0,0,0,1}.
        let mut a = vec![ZERO; 16];
        for (r, cidx) in [(1usize, 1usize), (1, 2), (2, 1), (2, 2)] {
            a[r * 4 + cidx] = c(0.5, 0.0);
        }
        let vals = hermitian_eigenvalues(4, &a);
        assert!(vals[..3].iter().all(|v| v.abs() < 1e-12));
        assert!((vals[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for &n in &[3usize, 4, 8, 16] {
            let mut a = vec![ZERO; n * n];
            for r in 0..n {
                for col in r..n {
                    let v = if r == col {
                        c(rng.gen::<f64>() - 0.5, 0.0)
                    } else {
                        c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                    };
                    a[r * n + col] = v;
                    a[col * n + r] = v.conj();
                }
            }
            let (vals, vecs) = hermitian_eigen(n, &a);
            // A V = V Λ
            for j in 0..n {
                for i in 0..n {
                    let mut av = ZERO;
                    for k in 0..n {
                        av += a[i * n + k] * vecs[k * n + j];
                    }
                    let lv = vecs[i * n + j] * vals[j];
                    assert!((av - lv).norm() < 1e-10, "n={n} residual too large");
                }
            }
            // Columns orthonormal.
            for j1 in 0..n {
                for j2 in 0..n {
                    let mut dot = ZERO;
                    for i in 0..n {
                        dot += vecs[i * n + j1].conj() * vecs[i * n + j2];
                    }
                    let expect = if j1 == j2 { 1.0 } else { 0.0 };
                    assert!((dot - c(expect, 0.0)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    #[should_panic(expected = "not Hermitian")]
    fn rejects_non_hermitian_input() {
        let a = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)];
        hermitian_eigen(2, &a);
    }
}
