//! Allocation accounting for the computational benchmark.
//!
//! Binaries that want allocation-based memory numbers install
//! [`CountingAllocator`] as their global allocator; the benchmark then
//! reports both the cumulative bytes allocated during a run and the
//! high-water mark of live bytes. When the counting allocator is not
//! installed, the peak resident-set size from the OS is used instead and the
//! record says so.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);
static TOTAL: AtomicU64 = AtomicU64::new(0);

/// System allocator wrapper that tracks live, peak and cumulative bytes.
pub struct CountingAllocator;

unsafe impl GlobalAlloc for CountingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let ptr = System.alloc(layout);
        if !ptr.is_null() {
            TOTAL.fetch_add(layout.size() as u64, Ordering::Relaxed);
            let live = LIVE.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(live, Ordering::Relaxed);
        }
        ptr
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        LIVE.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

fn counting_active() -> bool {
    TOTAL.load(Ordering::Relaxed) > 0
}

fn vm_hwm_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            let kb: u64 = rest.trim().trim_end_matches("kB").trim().parse().ok()?;
            return Some(kb * 1024);
        }
    }
    None
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemUsage {
    /// Cumulative bytes allocated while the closure ran.
    pub allocated_total_bytes: u64,
    /// High-water mark of bytes live above the starting level.
    pub peak_bytes: u64,
    /// "alloc_counter" or "rss_hwm", depending on what was available.
    pub method: String,
}

use serde::{Deserialize, Serialize};

/// Runs `f` and reports its memory footprint.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, MemUsage) {
    if counting_active() {
        let live0 = LIVE.load(Ordering::Relaxed);
        PEAK.store(live0, Ordering::Relaxed);
        let total0 = TOTAL.load(Ordering::Relaxed);
        let out = f();
        let peak = PEAK.load(Ordering::Relaxed).saturating_sub(live0) as u64;
        let total = TOTAL.load(Ordering::Relaxed) - total0;
        (
            out,
            MemUsage {
                allocated_total_bytes: total,
                peak_bytes: peak,
                method: "alloc_counter".to_string(),
            },
        )
    } else {
        let before = vm_hwm_bytes().unwrap_or(0);
        let out = f();
        let after = vm_hwm_bytes().unwrap_or(before);
        (
            out,
            MemUsage {
                allocated_total_bytes: after.saturating_sub(before),
                peak_bytes: after.saturating_sub(before),
                method: "rss_hwm".to_string(),
            },
        )
    }
}
