//! Numerical tools for nonhomogeneous discrete Markov processes and discrete
//! quadratic stochastic processes on finite state spaces.
//!
//! Everything is generic over the floating point type through [`Scalar`]; the
//! `*64` and `*32` aliases below fix it.
//!
//! ```
//! use nhdmp::{gen_block_example, l1_weak_gap};
//!
//! let p = gen_block_example::<f64>(0.7).unwrap();
//! let gap = l1_weak_gap(&p, 0, 3).unwrap();
//! assert!((gap - 2.0 * 0.4f64.powi(3)).abs() < 1e-12);
//! ```

pub mod ergodicity;
pub mod error;
pub mod kernels;
pub mod matrix;
pub mod minorization;
pub mod qsp;
pub mod scalar;
pub mod state_space;

pub use ergodicity::{
    decay_table, dobrushin, l1_strong_gap, l1_weak_gap, l1_weak_gap_of, max_pairwise_row_distance,
    max_row_distance_to, pairing, strong_gap, weak_gap, weak_gap_of, GapReport, Notion,
};
pub use error::{Error, ErrorKind, Result};
pub use kernels::{
    gen_block_example, gen_ladder_step, ladder_process, load_process, parse_process,
    process_to_json, save_process, validate_kernel, KernelStep, LadderCoefficients, Process,
    ProcessKind, LADDER_INDEX_BASE,
};
pub use matrix::{Kernel, DENSE_LIMIT};
pub use minorization::{
    certificate_chain, certificate_from_kernel, check_c0, check_c2, check_column_minorization,
    check_doeblin, construct_certificate_from_decay, coupling_chain, coupling_step,
    divergence_verdict, domination_deficit, extract_certificate_windowed,
    extract_one_step_certificate, product_bound, set_minorization, verify_certificate, BoundReport,
    BoundRow, ColumnMinorizationReport, ConstructedCertificate, CouplingStep, DivergenceReport,
    DoeblinReport, MinorizationCertificate, ResidualSetReport, SetFamily, SetMinorization, Verdict,
    MAX_ENUMERATION_STATES,
};
pub use qsp::{
    check_we_pq, constant_fiber_qsp, load_qsp, parse_qsp, qsp_mixing_example, qsp_to_json,
    save_qsp, PairMeasure, QspGap, QspProcess, QspStep, SplitOrder, Tensor3, WePqReport,
};
pub use scalar::{
    approx_eq, ordered_sum, policy_tolerance, set_policy_tolerance, tolerance, tolerance_from_env,
    Scalar, DEFAULT_TOLERANCE, TOLERANCE_ENV,
};
pub use state_space::{
    is_abs_continuous, l1_distance, l1_norm_diff, restrict, Measure, ReferenceSpace, StateSet,
};

pub type Measure64 = Measure<f64>;
pub type ReferenceSpace64 = ReferenceSpace<f64>;
pub type Kernel64 = Kernel<f64>;
pub type Process64 = Process<f64>;
pub type Certificate64 = MinorizationCertificate<f64>;
pub type QspProcess64 = QspProcess<f64>;

pub type Measure32 = Measure<f32>;
pub type ReferenceSpace32 = ReferenceSpace<f32>;
pub type Kernel32 = Kernel<f32>;
pub type Process32 = Process<f32>;
pub type Certificate32 = MinorizationCertificate<f32>;
pub type QspProcess32 = QspProcess<f32>;
