//! Small dense-vector helpers used by the similarity rankers.

use crate::scalar::Scalar;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let denom = norm(a) * norm(b);
    if denom == T::zero() || !denom.is_finite() {
        return T::zero();
    }
    dot(a, b) / denom
}

/// Element-wise mean of equally sized vectors. Returns an empty vector for
/// empty input.
pub fn mean<'a, T: Scalar, I>(vectors: I) -> Vec<T>
where
    I: IntoIterator<Item = &'a [T]>,
{
    let mut acc: Vec<T> = Vec::new();
    let mut count = 0usize;
    for v in vectors {
        if acc.is_empty() {
            acc = vec![T::zero(); v.len()];
        }
        for (a, &x) in acc.iter_mut().zip(v) {
            *a = *a + x;
        }
        count += 1;
    }
    if count > 0 {
        let c = T::from_usize_lossy(count);
        acc.iter_mut().for_each(|a| *a = *a / c);
    }
    acc
}

/// Scales `v` to unit length in place; zero vectors are left unchanged.
pub fn normalize<T: Scalar>(v: &mut [T]) {
    let n = norm(v);
    if n > T::zero() {
        v.iter_mut().for_each(|x| *x = *x / n);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_basics() {
        assert!((cosine(&[1.0f64, 2.0, 3.0], &[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0f32, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[0.0f64, 0.0], &[1.0, 1.0]), 0.0);
        // (1,1,0).(1,0,1) = 1, norms sqrt2*sqrt2
        assert!((cosine(&[1.0f64, 1.0, 0.0], &[1.0, 0.0, 1.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mean_of_vectors() {
        let a = [1.0f64, 3.0];
        let b = [3.0f64, 5.0];
        assert_eq!(mean([&a[..], &b[..]]), vec![2.0, 4.0]);
        assert!(mean::<f64, _>(std::iter::empty::<&[f64]>()).is_empty());
    }
}
