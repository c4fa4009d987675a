//! Laboratory reference dataset for Coils A and B.
//!
//! Model coefficients of the published `P = k·I²` curves and the measured
//! matched-load power at each current step. Single-conductor loop, near side
//! at 0.25 to 1.00 m, far side 3 m further out.

use super::tables::{CoefficientRow, CoefficientTable};

pub const LAB_DISTANCES_M: [f64; 4] = [0.25, 0.50, 0.75, 1.00];
pub const LAB_CURRENTS_A: [f64; 8] = [25.0, 50.0, 75.0, 100.0, 125.0, 150.0, 175.0, 200.0];
pub const LAB_FREQUENCIES_HZ: [f64; 2] = [50.0 / 3.0, 50.0];
/// Separation between the near and far side of the laboratory loop, m.
pub const LAB_LOOP_B_M: f64 = 3.0;

/// One published model curve and the points measured along it.
#[derive(Debug, Clone, Copy)]
pub struct LabSeries {
    pub coil: &'static str,
    pub f_hz: f64,
    pub r_m: f64,
    /// µW/A².
    pub model_k: f64,
    /// µW, at [`LAB_CURRENTS_A`].
    pub measured_uw: [f64; 8],
}

const F16: f64 = 50.0 / 3.0;

pub const LAB_SERIES: [LabSeries; 16] = [
    LabSeries {
        coil: "coil-a",
        f_hz: F16,
        r_m: 0.25,
        model_k: 0.10338819156701182,
        measured_uw: [58.7, 237.2, 533.8, 974.9, 1512.2, 2234.9, 3098.3, 4151.3],
    },
    LabSeries {
        coil: "coil-a",
        f_hz: F16,
        r_m: 0.50,
        model_k: 0.017314895626866153,
        measured_uw: [11.2, 41.5, 91.6, 163.1, 250.3, 373.6, 509.4, 680.0],
    },
    LabSeries {
        coil: "coil-a",
        f_hz: F16,
        r_m: 0.75,
        model_k: 0.00488928419540072,
        measured_uw: [4.3, 12.3, 25.3, 44.5, 67.8, 99.8, 134.3, 179.1],
    },
    LabSeries {
        coil: "coil-a",
        f_hz: F16,
        r_m: 1.00,
        model_k: 0.0017819709626767121,
        measured_uw: [2.9, 6.1, 10.5, 17.3, 25.3, 36.3, 47.6, 64.7],
    },
    LabSeries {
        coil: "coil-b",
        f_hz: F16,
        r_m: 0.25,
        model_k: 0.0663763526819306,
        measured_uw: [48.1, 180.9, 402.8, 743.3, 1162.3, 1743.5, 2406.2, 3228.5],
    },
    LabSeries {
        coil: "coil-b",
        f_hz: F16,
        r_m: 0.50,
        model_k: 0.011116352857712564,
        measured_uw: [9.8, 28.8, 62.0, 108.7, 168.5, 244.6, 334.8, 450.1],
    },
    LabSeries {
        coil: "coil-b",
        f_hz: F16,
        r_m: 0.75,
        model_k: 0.0031389740665476204,
        measured_uw: [5.0, 9.3, 18.0, 31.1, 45.9, 64.4, 89.0, 115.3],
    },
    LabSeries {
        coil: "coil-b",
        f_hz: F16,
        r_m: 1.00,
        model_k: 0.001144044898115123,
        measured_uw: [4.0, 5.6, 8.9, 13.9, 18.7, 25.4, 32.9, 43.1],
    },
    LabSeries {
        coil: "coil-a",
        f_hz: 50.0,
        r_m: 0.25,
        model_k: 0.9301216382429436,
        measured_uw: [
            569.6, 2271.1, 5137.2, 9157.1, 14330.8, 21099.0, 28653.5, 40520.9,
        ],
    },
    LabSeries {
        coil: "coil-a",
        f_hz: 50.0,
        r_m: 0.50,
        model_k: 0.1557717457126405,
        measured_uw: [101.3, 400.6, 918.6, 1633.1, 2571.1, 3767.6, 5192.0, 6907.6],
    },
    LabSeries {
        coil: "coil-a",
        f_hz: 50.0,
        r_m: 0.75,
        model_k: 0.04398596161452219,
        measured_uw: [29.3, 114.0, 256.4, 457.4, 712.2, 1040.3, 1427.4, 1889.0],
    },
    LabSeries {
        coil: "coil-a",
        f_hz: 50.0,
        r_m: 1.00,
        model_k: 0.016031325492640327,
        measured_uw: [11.9, 42.0, 87.2, 161.2, 252.7, 369.2, 502.5, 672.1],
    },
    LabSeries {
        coil: "coil-b",
        f_hz: 50.0,
        r_m: 0.25,
        model_k: 0.5971482909350695,
        measured_uw: [
            384.2, 1590.3, 3593.8, 6698.1, 10653.3, 15782.9, 21917.4, 29592.4,
        ],
    },
    LabSeries {
        coil: "coil-b",
        f_hz: 50.0,
        r_m: 0.50,
        model_k: 0.10000716885158564,
        measured_uw: [61.1, 246.2, 562.6, 1034.5, 1615.3, 2390.9, 3228.5, 4314.1],
    },
    LabSeries {
        coil: "coil-b",
        f_hz: 50.0,
        r_m: 0.75,
        model_k: 0.028239469681477194,
        measured_uw: [19.3, 67.0, 155.2, 269.6, 434.8, 644.5, 879.8, 1148.1],
    },
    LabSeries {
        coil: "coil-b",
        f_hz: 50.0,
        r_m: 1.00,
        model_k: 0.010292286756641976,
        measured_uw: [11.4, 28.8, 58.7, 100.2, 155.2, 220.7, 305.0, 411.2],
    },
];

/// The sixteen published model coefficients as a table.
pub fn lab_model_coefficients() -> CoefficientTable {
    CoefficientTable {
        rows: LAB_SERIES
            .iter()
            .map(|s| CoefficientRow {
                coil: s.coil.to_string(),
                f_hz: s.f_hz,
                r_m: s.r_m,
                k: s.model_k,
            })
            .collect(),
    }
}

/// Measured point: (coil, f, r, current A, power µW).
pub fn lab_measurements() -> impl Iterator<Item = (&'static str, f64, f64, f64, f64)> {
    LAB_SERIES.iter().flat_map(|s| {
        LAB_CURRENTS_A
            .iter()
            .zip(s.measured_uw)
            .map(move |(&i, p)| (s.coil, s.f_hz, s.r_m, i, p))
    })
}
