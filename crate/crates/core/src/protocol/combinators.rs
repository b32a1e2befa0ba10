use super::types::{CdsProtocol, PromiseFunction, PsmProtocol};
use crate::error::{Error, Result};

/// One-bit-secret CDS from a PSM for h((x, s), y) = s AND f(x, y).
///
/// Alice's PSM input is x' = 2x + s. `psm_family` is asked for a protocol
/// computing h and may decline with `None`.
pub fn psm_to_cds(
    psm_family: impl Fn(&PromiseFunction) -> Option<PsmProtocol>,
    f: &PromiseFunction,
) -> Result<CdsProtocol> {
    let g = f.clone();
    let h = PromiseFunction::new(
        format!("s&{}", f.name()),
        f.n() + 1,
        2 * f.x_size(),
        f.y_size(),
        move |xs, y| g.evaluate(xs >> 1, y).map(|v| v && (xs & 1) == 1),
    );
    let psm = psm_family(&h)
        .ok_or_else(|| Error::Unsupported(format!("no PSM available for {}", h.name())))?;
    if psm.x_size < h.x_size() || psm.y_size < h.y_size() {
        return Err(Error::DimensionMismatch("PSM input domain too small".into()));
    }
    let (pa, pb, pd) = (psm.clone(), psm.clone(), psm.clone());
    let mut cds = CdsProtocol::new(
        format!("psm_to_cds({})", psm.name),
        f.n(),
        (f.x_size(), f.y_size()),
        psm.randomness_bits,
        2,
        (psm.message_a_bits, psm.message_b_bits),
        move |x, s, r| pa.message_a(2 * x + s, r),
        move |y, r| pb.message_b(y, r),
        move |ma, _, mb, _| pd.decode(ma, mb) & 1,
    );
    cds.params = psm.params.clone();
    cds.params.insert("psm".into(), psm.name.clone().into());
    Ok(cds)
}
