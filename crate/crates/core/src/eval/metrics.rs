use crate::error::{Error, Result};
use crate::grid::Mask;

/// Tanimoto coefficient `|A ∩ B| / |A ∪ B|`; two empty masks score 1.
pub fn tanimoto(mask: &Mask, gt: &Mask) -> Result<f64> {
    if !mask.same_shape(gt) {
        return Err(Error::ShapeMismatch(
            (mask.width(), mask.height()),
            (gt.width(), gt.height()),
        ));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&a, &b) in mask.values().iter().zip(gt.values()) {
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}
