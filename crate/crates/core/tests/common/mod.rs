//! Reference data shared by the integration tests.
#![allow(dead_code)]

pub mod checks;

use sens_core::phase1::{Phase1Config, Procedure};
use sens_core::session::{run_batch, BatchInputs, SessionConfig, TestSession};

/// Legacy 3pod example (0, 22, 3): responses, and the stimuli actually used
/// in phases I and II.
pub const Y_WT: [i64; 30] = [
    0, 1, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
];
pub const X_WT: [f64; 15] = [
    5.5, 16.5, 11.0, 13.8, 10.1, 14.7, 10.4, 11.7, 9.7, 7.3, 7.8, 8.1, 12.2, 8.5, 11.8,
];
/// Exact recommendations (6 decimals) for all 30 runs.
pub const WT_EX: [f64; 30] = [
    5.5, 16.5, 11.0, 13.75, 10.1, 14.7, 10.4, 11.7, 9.7, 7.265078, 7.754301, 8.084262, 12.164304,
    8.516679, 11.825443, 11.712057, 11.408272, 11.155754, 12.463306, 12.276079, 12.110741,
    11.962789, 11.829108, 11.707202, 11.595231, 11.491698, 11.395498, 11.305654, 11.221436,
    11.142075,
];
pub const WT_IDS: [&str; 30] = [
    "I1(iii)", "I1(iii)", "I2(ib)", "I2(ib)", "I2(id)", "I2(id)", "rI2(id)", "I3", "I3", "II1",
    "II2", "II2", "II2", "II2", "II2", "III1", "III2", "III2", "III2", "III2", "III2", "III2",
    "III2", "III2", "III2", "III2", "III2", "III2", "III2", "III2",
];
pub const WT_NEXT: f64 = 11.06718;
pub const WT_MU: f64 = 10.1707909;
pub const WT_SIG: f64 = 0.9344091;

/// Phase-III recursion table: j, k, v, u, a, tau2, b, x.
pub const WT_JVEC: [[f64; 8]; 16] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 3.1630046, 0.0, 11.71206],
    [1.281552, 1.259256, 0.8455910, 0.25691424, 1.9676839, 2.6574786, 0.8455910, 11.40827],
    [1.281552, 1.221520, 0.8529442, 0.21540766, 1.7173487, 2.2875485, 0.8529442, 11.15575],
    [1.281552, 1.193150, 0.8586089, 0.18486973, 1.5228195, 2.0060253, 0.8586089, 12.46331],
    [1.281552, 1.171100, 0.8630914, 0.16158850, 1.3674862, 1.7850553, 0.8630914, 12.27608],
    [1.281552, 1.153497, 0.8667188, 0.14331974, 1.2406774, 1.6072417, 0.8667188, 12.11074],
    [1.281552, 1.139135, 0.8697100, 0.12863984, 1.1352462, 1.4612038, 0.8697100, 11.96279],
    [1.281552, 1.127203, 0.8722164, 0.11660810, 1.0462355, 1.3392043, 0.8722164, 11.82911],
    [1.281552, 1.117136, 0.8743455, 0.10658089, 0.9701036, 1.2358098, 0.8743455, 11.70720],
    [1.281552, 1.108534, 0.8761754, 0.09810449, 0.9042548, 1.1470983, 0.8761754, 11.59523],
    [1.281552, 1.101099, 0.8777644, 0.09085065, 0.8467447, 1.0701710, 0.8777644, 11.49170],
    [1.281552, 1.094611, 0.8791568, 0.08457652, 0.7960885, 1.0028406, 0.8791568, 11.39550],
    [1.281552, 1.088901, 0.8803866, 0.07909884, 0.7511331, 0.9434269, 0.8803866, 11.30565],
    [1.281552, 1.083838, 0.8814805, 0.07427688, 0.7109699, 0.8906183, 0.8814805, 11.22144],
    [1.281552, 1.079317, 0.8824597, 0.07000091, 0.6748731, 0.8433765, 0.8824597, 11.14208],
    [1.281552, 1.075256, 0.8833413, 0.06618415, 0.6422561, 0.8008694, 0.8833413, 11.06718],
];

pub fn wt_config() -> SessionConfig {
    SessionConfig::new(Phase1Config::new(Procedure::ThreePod, 0.0, 22.0, 3.0)).with_reso(0.0001)
}

pub fn wt_inputs() -> BatchInputs {
    BatchInputs {
        n2: Some(6),
        n3: Some(15),
        p_lam: Some((0.9, 1.0)),
    }
}

pub fn wt_session() -> TestSession {
    run_batch(wt_config(), &Y_WT, Some(&X_WT), wt_inputs()).unwrap().session
}

/// Log-scale rerun of the same example: X (log), RX, TX per row.
pub const WTL_ROWS: [[f64; 3]; 30] = [
    [1.70475, 5.5, 5.5],
    [2.80336, 16.5, 16.5],
    [2.3979, 9.5263, 11.0],
    [2.62467, 18.1293, 13.8],
    [2.31254, 10.0115, 10.1],
    [2.68785, 14.6941, 14.7],
    [2.34181, 10.3307, 10.4],
    [2.45959, 11.8756, 11.7],
    [2.27213, 9.6333, 9.7],
    [1.98787, 7.6627, 7.3],
    [2.05412, 8.0148, 7.8],
    [2.09186, 8.2731, 8.1],
    [2.50144, 8.4705, 12.2],
    [2.14007, 8.594, 8.5],
    [2.4681, 8.7617, 11.8],
    [2.46604, 11.7757, 11.7757],
    [2.45339, 11.6277, 11.6277],
    [2.44262, 11.5031, 11.5031],
    [2.50151, 12.2009, 12.2009],
    [2.49326, 12.1006, 12.1006],
    [2.48587, 12.0116, 12.0116],
    [2.4792, 11.9317, 11.9317],
    [2.47312, 11.8594, 11.8594],
    [2.46754, 11.7934, 11.7934],
    [2.46238, 11.7327, 11.7327],
    [2.45759, 11.6766, 11.6766],
    [2.45311, 11.6245, 11.6245],
    [2.44892, 11.5758, 11.5758],
    [2.44497, 11.5302, 11.5302],
    [2.44124, 11.4873, 11.4873],
];
pub const WTL_IDS: [&str; 9] = [
    "I1(iii)", "I1(iii)", "I2(ib)", "I2(ic)", "I2(ic)", "rI2(ic)", "rI2(ic)", "I3", "I3",
];
pub const WTL_NEXT: f64 = 2.43771;

/// Neyer example (0.6, 1.4, 0.1), reso 0.01: responses, RX and EX.
pub const Y_NY: [i64; 20] = [0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 1, 1, 1, 1];
pub const NY_RX: [f64; 20] = [
    1.0, 1.2, 1.4, 1.8, 2.6, 4.2, 3.4, 3.8, 4.0, 4.1, 4.28, 4.52, 5.55, 5.24, 6.37, 6.08, 7.38,
    7.09, 6.89, 6.74,
];
pub const NY_EX: [f64; 20] = [
    1.0, 1.2, 1.4, 1.8, 2.6, 4.2, 3.4, 3.8, 4.0, 4.1, 4.280593, 4.522707, 5.546771, 5.243292,
    6.371975, 6.080515, 7.384476, 7.094232, 6.893254, 6.736082,
];
pub const NY_IDS: [&str; 20] = [
    "B0", "B1", "B1", "B1", "B1", "B1", "B3", "B3", "B3", "B3", "B4", "II1", "II2", "II2", "II2",
    "II2", "II2", "II2", "II2", "II2",
];

pub fn ny_config() -> SessionConfig {
    SessionConfig::new(Phase1Config::new(Procedure::Neyer, 0.6, 1.4, 0.1)).with_reso(0.01)
}

pub fn ny_inputs() -> BatchInputs {
    BatchInputs {
        n2: Some(9),
        n3: Some(0),
        p_lam: None,
    }
}

/// Langlie example, limits (0, 5), BL = (7, 0, 5).
pub const Y_LG: [i64; 25] = [
    1, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0,
];
/// Stimuli used when the first one is overridden to 2.5.
pub const LG2_RX: [f64; 25] = [
    2.5, 1.25, 0.625, 0.3125, 0.3125, 0.3125, 0.46875, 0.46875, 0.46875, 0.39062, 0.39062,
    0.39062, 0.42968, 0.42968, 0.42968, 0.83984, 0.83984, 0.83984, 0.63476, 0.63476, 0.63476,
    0.7373, 0.68603, 0.68603, 0.68603,
];
/// Distinct levels without the override.
pub const LG3_LEVELS: [f64; 11] = [
    1.03150, 0.51575, 0.25788, 0.12894, 0.19341, 0.16118, 0.17729, 0.34652, 0.26190, 0.30421,
    0.28306,
];
/// Run counts at each level (same grouping in both variants).
pub const LG_GROUPS: [usize; 11] = [1, 1, 1, 3, 3, 3, 3, 3, 3, 1, 3];
pub const LG_IDS: [&str; 25] = [
    "D", "D", "D", "", "", "U", "", "", "D", "", "", "U", "", "", "U", "", "", "D", "", "", "U",
    "D", "", "", "U",
];

pub fn lg_config() -> SessionConfig {
    SessionConfig::new(Phase1Config::new(Procedure::Langlie, 0.0, 5.0, 0.0).with_bl(7, 0, 5))
}

pub fn lg_inputs() -> BatchInputs {
    BatchInputs {
        n2: Some(0),
        n3: Some(0),
        p_lam: None,
    }
}

/// Simulated Neyer test (0.6, 1.4, 0.1), reso 0.01, n2 = 6, n3 = 15,
/// p = 0.9, lambda = 1: stimuli and responses.
pub const X_UN: [f64; 29] = [
    1.0, 1.2, 1.1, 0.92, 1.05, 0.92, 1.1, 0.97, 1.04, 0.94, 0.89, 1.03, 0.88, 1.08, 1.07, 1.02,
    1.17, 1.14, 1.12, 1.1, 1.09, 1.16, 1.23, 1.22, 1.21, 1.2, 1.19, 1.18, 1.17,
];
pub const Y_UN: [i64; 29] = [
    0, 1, 1, 0, 1, 0, 1, 1, 1, 1, 0, 0, 0, 1, 1, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1, 1, 1, 1, 1,
];
/// Per-run (mu, sigma) from run 8 to run 29.
pub const UN_TRAJ: [(f64, f64); 22] = [
    (0.9873797, 0.04399377),
    (0.9838174, 0.03959259),
    (0.9609069, 0.05798142),
    (0.9642461, 0.05275399),
    (0.9832098, 0.07475745),
    (0.9854295, 0.07038439),
    (0.9834347, 0.06686423),
    (0.9816069, 0.06393483),
    (0.9932668, 0.06935069),
    (0.9931582, 0.06885981),
    (0.9928694, 0.06786451),
    (0.9923936, 0.06653730),
    (0.9916517, 0.06492514),
    (1.0032469, 0.08383680),
    (1.0124456, 0.12460515),
    (1.0122534, 0.12158827),
    (1.0120305, 0.11883798),
    (1.0117695, 0.11629103),
    (1.0114630, 0.11390552),
    (1.0111026, 0.11165430),
    (1.0106785, 0.10952007),
    (1.0101797, 0.10749281),
];
pub const UN_LP_FIRST: f64 = 1.043760;
pub const UN_LP_LAST: f64 = 1.147937;

pub fn un_config() -> SessionConfig {
    ny_config()
}

pub fn un_inputs() -> BatchInputs {
    BatchInputs {
        n2: Some(6),
        n3: Some(15),
        p_lam: Some((0.9, 1.0)),
    }
}

/// FM limits at conf 0.95 for the legacy 3pod example: P grid rows then the
/// q = 8.5 row. Columns q_l, q, q_u, p_l, p, p_u.
pub const FM_TABLE: [[f64; 6]; 16] = [
    [1.713070, 5.729148, 9.745225, 0.000000, 0.000001, 0.000022],
    [2.509827, 6.185638, 9.861449, 0.000000, 0.000010, 0.000186],
    [3.398713, 6.695708, 9.992703, 0.000000, 0.000100, 0.001497],
    [4.420058, 7.283250, 10.146441, 0.000000, 0.001000, 0.011317],
    [5.655082, 7.997030, 10.338979, 0.000000, 0.010000, 0.076799],
    [7.323686, 8.973297, 10.622909, 0.000000, 0.100000, 0.409826],
    [8.268435, 9.540542, 10.812648, 0.000000, 0.250000, 0.682622],
    [9.261870, 10.170791, 11.079711, 0.111940, 0.500000, 0.888060],
    [10.100920, 10.801040, 11.501160, 0.511901, 0.750000, 0.988099],
    [10.608143, 11.368284, 12.128426, 0.757232, 0.900000, 1.000000],
    [11.082057, 12.344552, 13.607046, 0.953990, 0.990000, 1.000000],
    [11.317805, 13.058332, 14.798859, 0.992728, 0.999000, 1.000000],
    [11.489465, 13.645874, 15.802283, 0.998986, 0.999900, 1.000000],
    [11.630368, 14.155944, 16.681520, 0.999869, 0.999990, 1.000000],
    [11.752583, 14.612434, 17.472285, 0.999984, 0.999999, 1.000000],
    [6.519019, 8.500000, 10.480981, 0.000000, 0.036882, 0.207880],
];
