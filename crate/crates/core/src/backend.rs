//! Thread-count control for the OpenBLAS backend.
//!
//! Large singular value decompositions gain little from OpenBLAS's own
//! threading here, while concurrent decompositions of different time
//! steps scale cleanly. The scenario runner therefore pins the backend
//! to one thread for the duration of a run and restores the previous
//! setting afterwards.

use std::os::raw::c_int;

extern "C" {
    fn openblas_get_num_threads() -> c_int;
    fn openblas_set_num_threads(n: c_int);
}

pub fn get_threads() -> usize {
    unsafe { openblas_get_num_threads() as usize }
}

pub fn set_threads(n: usize) {
    unsafe { openblas_set_num_threads(n.max(1) as c_int) }
}

/// RAII holder that pins the backend thread count and restores the
/// previous value on drop.
pub struct BlasThreadGuard {
    previous: usize,
}

impl BlasThreadGuard {
    pub fn single() -> Self {
        let previous = get_threads();
        set_threads(1);
        Self { previous }
    }
}

impl Drop for BlasThreadGuard {
    fn drop(&mut self) {
        set_threads(self.previous);
    }
}
