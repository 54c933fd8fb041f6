use crate::math::{sigmoid, softplus};

/// Binary cross-entropy on a logit, returning `(loss, ∂loss/∂logit)`.
///
/// Written as `softplus(z) − y·z`, which never overflows.
#[inline]
pub fn bce_with_logits(logit: f64, label: u8) -> (f64, f64) {
    let y = f64::from(label);
    (softplus(logit) - y * logit, sigmoid(logit) - y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let (loss, grad) = bce_with_logits(0.0, 1);
        assert_eq!(loss, core::f64::consts::LN_2);
        assert_eq!(grad, -0.5);
        let (loss, grad) = bce_with_logits(40.0, 1);
        assert!(loss < 1e-15 && loss >= 0.0);
        assert!(grad.abs() < 1e-15);
        let (loss, _) = bce_with_logits(-800.0, 1);
        assert!(loss.is_finite() && (loss - 800.0).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let h = 1e-6;
        let fd = (bce_with_logits(0.7 + h, 0).0 - bce_with_logits(0.7 - h, 0).0) / (2.0 * h);
        assert!((fd - bce_with_logits(0.7, 0).1).abs() < 1e-8);
    }
}
