//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use choquard::calculus::PotentialSpec;
use choquard::variational::{Mode, ProblemSpec};
use choquard::{KernelKind, KernelMethod, KernelTable, LatticeWindow, QuadratureSpec};

pub fn window(radius: i64) -> Arc<LatticeWindow> {
    Arc::new(LatticeWindow::boxed(2, radius).expect("valid window"))
}

pub fn green_table(radius: i64, method: KernelMethod) -> KernelTable {
    KernelTable::build(KernelKind::Green, 1.0, &window(radius), &QuadratureSpec::default(), method)
        .expect("table builds")
}

/// The reference problem: N = 2, α = 1, p = 2, well B_2(0).
pub fn problem(radius: i64, mode: Mode) -> ProblemSpec {
    let kernel = Arc::new(green_table(radius, KernelMethod::BesselProduct));
    ProblemSpec::new(mode, window(radius), PotentialSpec::ball_well(2, 2).expect("valid well"), kernel, 2.0)
        .expect("valid problem")
}
