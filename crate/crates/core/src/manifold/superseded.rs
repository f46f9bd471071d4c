//! Intermediate values at `c1` published under the abandoned `w21(0) = 0`
//! convention. They are reported next to the recomputed numbers and never
//! used as a pass/fail gate.

/// Name and published value `(re, im)`.
pub const STALE_AT_C1: &[(&str, (f64, f64))] = &[
    ("w30(0)", (0.327626, -5.115802)),
    ("w30(-r)", (-14.190120, -5.277852)),
    ("g40", (-70.452908, 32.020324)),
    ("g04", (0.804019, 77.383894)),
    ("g31", (-13.491939, -6.450063)),
    ("g13", (11.553771, 9.494531)),
    ("g22", (4.485812, -7.046298)),
    ("w22(-r)", (4.864870928, 0.0)),
    ("w22(0)", (-43.85187247, 0.0)),
    ("w31(-r)", (-6.41714235, -18.89415271)),
    ("w31(0)", (17.94690049, 2.001612024)),
    ("g32", (28.68605342, 128.6141166)),
];

/// Second Lyapunov coefficient at `c1` under the same stale convention.
pub const STALE_L2_AT_C1: f64 = 13.08553919;
