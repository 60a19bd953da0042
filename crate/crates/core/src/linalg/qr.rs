use num_complex::Complex64;

use super::matrix::ComplexMatrix;

/// Thin Householder QR of a `rows x cols` matrix with `rows >= cols`.
///
/// Returns `(Q, R)` with `Q` of shape `rows x cols` having orthonormal
/// columns and `R` upper triangular `cols x cols`.
pub fn householder_qr(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let rows = m.rows();
    let cols = m.cols();
    assert!(rows >= cols, "QR needs rows >= cols");
    let mut a = m.clone();
    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(cols);

    for k in 0..cols {
        let norm_x = (k..rows).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let x0 = a[(k, k)];
        let mut v = vec![Complex64::new(0.0, 0.0); rows];
        if norm_x == 0.0 {
            reflectors.push(v);
            continue;
        }
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        // alpha = -phase * ||x|| avoids cancellation in v_0
        let alpha = -phase * norm_x;
        for i in k..rows {
            v[i] = a[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            reflectors.push(vec![Complex64::new(0.0, 0.0); rows]);
            continue;
        }
        // A <- (I - 2 v v* / v*v) A
        for j in k..cols {
            let dot: Complex64 = (k..rows).map(|i| v[i].conj() * a[(i, j)]).sum();
            let f = dot * (2.0 / vnorm2);
            for i in k..rows {
                a[(i, j)] -= v[i] * f;
            }
        }
        let scale = 1.0 / vnorm2.sqrt();
        reflectors.push(v.into_iter().map(|z| z * scale).collect());
    }

    // Q = H_0 H_1 ... H_{cols-1} applied to the first `cols` columns of I
    let mut q = ComplexMatrix::zeros_rect(rows, cols);
    for j in 0..cols {
        q[(j, j)] = Complex64::new(1.0, 0.0);
    }
    for (k, v) in reflectors.iter().enumerate().rev() {
        for j in 0..cols {
            let dot: Complex64 = (k..rows).map(|i| v[i].conj() * q[(i, j)]).sum();
            if dot == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in k..rows {
                q[(i, j)] -= v[i] * (dot * 2.0);
            }
        }
    }
    let r = ComplexMatrix::from_fn(cols, cols, |i, j| if i <= j { a[(i, j)] } else { Complex64::new(0.0, 0.0) });
    (q, r)
}

/// `Q · diag(r_kk / |r_kk|)`: the orthonormal factor whose companion `R`
/// has a real positive diagonal. Applied to a Gaussian matrix this is
/// Haar distributed.
pub fn phase_normalized_q(m: &ComplexMatrix) -> ComplexMatrix {
    let (mut q, r) = householder_qr(m);
    for k in 0..r.rows() {
        let d = r[(k, k)];
        let ph = if d.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { d / d.norm() };
        for i in 0..q.rows() {
            q[(i, k)] *= ph;
        }
    }
    q
}
