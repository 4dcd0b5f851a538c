use crate::scalar::Scalar;

/// Solve `a·x = b` in place by Gaussian elimination with partial pivoting.
/// `a` is row-major `n × n`; on success `b` holds `x`. Returns `false` for a
/// numerically singular matrix.
pub(crate) fn solve_dense<T: Scalar>(a: &mut [T], b: &mut [T]) -> bool {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if !(scale > T::zero()) || !scale.is_finite() {
        return false;
    }
    let tiny = scale * T::epsilon() * T::c(1e-3);
    for col in 0..n {
        let (piv, pval) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pval > tiny) {
            return false;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[r * n + k] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    b.iter().all(|v| v.is_finite())
}
