//! Stack headroom for recursion over guest-built structures.
//!
//! Terms can be as deep as the heap is large: a reified object count is a
//! chain of `suc` applications.  Recursive walks therefore call [`deep`],
//! which continues on a fresh heap-allocated stack segment whenever the
//! current one runs low.

const RED_ZONE: usize = 128 * 1024;
const SEGMENT: usize = 4 * 1024 * 1024;

#[inline]
pub(crate) fn deep<R>(f: impl FnOnce() -> R) -> R {
    stacker::maybe_grow(RED_ZONE, SEGMENT, f)
}
