//! Bit-operation accounting.
//!
//! Every arithmetic primitive on [`Dyadic`](crate::Dyadic) charges an estimate
//! of its bit cost to a thread-local counter: additions cost the length of the
//! longer operand, multiplications the product of the operand lengths
//! (schoolbook model). Callers measure a computation by reading the counter
//! before and after, which is what [`measure`] does.

use std::cell::Cell;

thread_local! {
    static BIT_OPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub(crate) fn charge(bits: u64) {
    BIT_OPS.with(|c| c.set(c.get().wrapping_add(bits.max(1))));
}

/// Total bit operations charged on the current thread so far.
pub fn bit_ops() -> u64 {
    BIT_OPS.with(Cell::get)
}

/// Runs `f` and returns its result together with the bit operations it charged
/// on this thread.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let start = bit_ops();
    let out = f();
    (out, bit_ops().wrapping_sub(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Dyadic;

    #[test]
    fn multiplication_costs_more_than_addition() {
        let a = Dyadic::from_i64(0x7fff_ffff_ffff);
        let b = Dyadic::from_i64(0x1234_5678_9abc);
        let (_, add) = measure(|| &a + &b);
        let (_, mul) = measure(|| &a * &b);
        assert!(add > 0);
        assert!(mul > add);
    }
}
