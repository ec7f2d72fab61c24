use crate::sut_lang::RelOp;

/// Saturation value for distances that do not fit in `u64`.
pub const MAX_DISTANCE: u64 = u64::MAX;

/// Branch distance of `left rel right` from the desired outcome.
///
/// Zero iff the desired outcome holds; otherwise the usual relational
/// distances with a step of 1 (`a>=b` costs `b-a`, `a>b` costs `b-a+1`,
/// `a==b` costs `|a-b|`, `a!=b` costs 1, and symmetrically). A desired
/// `false` is scored as the negated relation being `true`.
pub fn branch_distance(rel: RelOp, left: i64, right: i64, desired: bool) -> u64 {
    let rel = if desired { rel } else { rel.negate() };
    let (a, b) = (left as i128, right as i128);
    let d: i128 = match rel {
        RelOp::Ge if a >= b => 0,
        RelOp::Ge => b - a,
        RelOp::Gt if a > b => 0,
        RelOp::Gt => b - a + 1,
        RelOp::Le if a <= b => 0,
        RelOp::Le => a - b,
        RelOp::Lt if a < b => 0,
        RelOp::Lt => a - b + 1,
        RelOp::Eq => (a - b).abs(),
        RelOp::Ne if a != b => 0,
        RelOp::Ne => 1,
    };
    u64::try_from(d).unwrap_or(MAX_DISTANCE)
}
