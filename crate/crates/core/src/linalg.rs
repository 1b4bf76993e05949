//! Small dense helpers on top of `ndarray`.

use nalgebra::DMatrix;
use ndarray::{ArrayBase, Data, DataMut, Ix2};
#[cfg(test)]
use ndarray::Array2;

use crate::C64;

/// Eigenvalues of a Hermitian matrix, ascending. Only the Hermitian part
/// `(A + A†)/2` is used.
pub(crate) fn hermitian_eigenvalues<S: Data<Elem = C64>>(a: &ArrayBase<S, Ix2>) -> Vec<f64> {
    let n = a.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[[i, j]] + a[[j, i]].conj()));
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `max |A − A†|` over all entries.
pub(crate) fn hermiticity_error<S: Data<Elem = C64>>(a: &ArrayBase<S, Ix2>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub(crate) fn trace<S: Data<Elem = C64>>(a: &ArrayBase<S, Ix2>) -> C64 {
    a.diag().iter().sum()
}

/// `A ← (A + A†)/2`.
pub(crate) fn symmetrize<S: DataMut<Elem = C64>>(a: &mut ArrayBase<S, Ix2>) {
    let n = a.nrows();
    for i in 0..n {
        a[[i, i]].im = 0.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (a[[i, j]] + a[[j, i]].conj());
            a[[i, j]] = avg;
            a[[j, i]] = avg.conj();
        }
    }
}
