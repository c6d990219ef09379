//! Published rejection proportions and bias-study results for the built-in
//! scenarios, shown next to computed values by table reproduction.

// Table entries such as 0.318 are data, not approximations of constants.
#![allow(clippy::approx_constant)]

/// Size triple and the five rejection proportions at that size.
pub(crate) type PowerCell = ([usize; 3], [f64; 5]);

/// Per scenario id: size triple and proportions in the column order
/// OVL parametric, VUS parametric, OVL_K, VUS_K, VUS_E.
pub(crate) const POWER_TABLES: &[(&str, &[PowerCell])] = &[
    (
        "normal-null",
        &[
            ([20, 20, 20], [0.058, 0.055, 0.045, 0.055, 0.044]),
            ([20, 20, 30], [0.056, 0.046, 0.042, 0.052, 0.055]),
            ([20, 30, 50], [0.037, 0.049, 0.028, 0.053, 0.049]),
            ([30, 50, 50], [0.049, 0.043, 0.045, 0.047, 0.049]),
            ([50, 50, 50], [0.052, 0.036, 0.045, 0.037, 0.036]),
            ([50, 50, 100], [0.045, 0.057, 0.032, 0.053, 0.057]),
            ([50, 100, 100], [0.058, 0.054, 0.049, 0.052, 0.053]),
            ([100, 100, 100], [0.049, 0.046, 0.037, 0.050, 0.050]),
        ],
    ),
    (
        "normal-location",
        &[
            ([20, 20, 20], [0.724, 0.890, 0.472, 0.874, 0.861]),
            ([20, 20, 30], [0.779, 0.922, 0.504, 0.901, 0.895]),
            ([20, 30, 50], [0.872, 0.973, 0.644, 0.960, 0.953]),
            ([30, 50, 50], [0.965, 0.991, 0.840, 0.988, 0.986]),
            ([50, 50, 50], [0.995, 0.999, 0.937, 0.997, 0.996]),
            ([50, 50, 100], [0.997, 1.000, 0.978, 1.000, 1.000]),
            ([50, 100, 100], [0.998, 1.000, 0.987, 1.000, 0.999]),
            ([100, 100, 100], [1.000, 1.000, 1.000, 1.000, 1.000]),
        ],
    ),
    (
        "normal-scale",
        &[
            ([20, 20, 20], [0.469, 0.058, 0.315, 0.053, 0.057]),
            ([20, 20, 30], [0.547, 0.040, 0.375, 0.051, 0.050]),
            ([20, 30, 50], [0.727, 0.040, 0.512, 0.039, 0.045]),
            ([30, 50, 50], [0.902, 0.031, 0.727, 0.035, 0.036]),
            ([50, 50, 50], [0.959, 0.034, 0.844, 0.034, 0.039]),
            ([50, 50, 100], [0.994, 0.042, 0.939, 0.048, 0.047]),
            ([50, 100, 100], [0.996, 0.047, 0.969, 0.045, 0.046]),
            ([100, 100, 100], [0.999, 0.041, 0.996, 0.045, 0.048]),
        ],
    ),
    (
        "lognormal-null",
        &[
            ([20, 20, 20], [0.070, 0.054, 0.032, 0.058, 0.044]),
            ([20, 20, 30], [0.053, 0.045, 0.039, 0.050, 0.055]),
            ([20, 30, 50], [0.040, 0.049, 0.028, 0.052, 0.049]),
            ([30, 50, 50], [0.052, 0.040, 0.045, 0.043, 0.049]),
            ([50, 50, 50], [0.047, 0.035, 0.035, 0.043, 0.036]),
            ([50, 50, 100], [0.044, 0.054, 0.036, 0.054, 0.057]),
            ([50, 100, 100], [0.061, 0.053, 0.047, 0.051, 0.053]),
            ([100, 100, 100], [0.052, 0.044, 0.045, 0.054, 0.050]),
        ],
    ),
    (
        "lognormal-location",
        &[
            ([20, 20, 20], [0.837, 0.836, 0.612, 0.846, 0.795]),
            ([20, 20, 30], [0.901, 0.856, 0.650, 0.886, 0.811]),
            ([20, 30, 50], [0.975, 0.922, 0.766, 0.956, 0.893]),
            ([30, 50, 50], [0.994, 0.964, 0.944, 0.985, 0.958]),
            ([50, 50, 50], [1.000, 0.995, 0.981, 0.996, 0.987]),
            ([50, 50, 100], [1.000, 0.998, 0.996, 1.000, 0.994]),
            ([50, 100, 100], [1.000, 0.997, 0.999, 0.999, 0.997]),
            ([100, 100, 100], [1.000, 1.000, 1.000, 1.000, 1.000]),
        ],
    ),
    (
        "lognormal-scale",
        &[
            ([20, 20, 20], [0.938, 0.057, 0.401, 0.188, 0.069]),
            ([20, 20, 30], [0.978, 0.043, 0.334, 0.198, 0.051]),
            ([20, 30, 50], [0.992, 0.037, 0.332, 0.200, 0.043]),
            ([30, 50, 50], [1.000, 0.035, 0.728, 0.225, 0.036]),
            ([50, 50, 50], [1.000, 0.035, 0.928, 0.226, 0.053]),
            ([50, 50, 100], [1.000, 0.042, 0.932, 0.275, 0.050]),
            ([50, 100, 100], [1.000, 0.040, 0.979, 0.275, 0.046]),
            ([100, 100, 100], [1.000, 0.048, 1.000, 0.276, 0.054]),
        ],
    ),
    (
        "gamma-null",
        &[
            ([20, 20, 20], [0.055, 0.059, 0.033, 0.055, 0.046]),
            ([20, 20, 30], [0.063, 0.069, 0.039, 0.063, 0.064]),
            ([20, 30, 50], [0.054, 0.047, 0.045, 0.048, 0.048]),
            ([30, 50, 50], [0.064, 0.049, 0.041, 0.047, 0.050]),
            ([50, 50, 50], [0.045, 0.047, 0.027, 0.048, 0.046]),
            ([50, 50, 100], [0.055, 0.054, 0.042, 0.055, 0.057]),
            ([50, 100, 100], [0.064, 0.049, 0.055, 0.052, 0.051]),
            ([100, 100, 100], [0.058, 0.071, 0.048, 0.063, 0.069]),
        ],
    ),
    (
        "gamma-shape",
        &[
            ([20, 20, 20], [0.910, 0.980, 0.672, 0.959, 0.967]),
            ([20, 20, 30], [0.946, 0.990, 0.749, 0.978, 0.978]),
            ([20, 30, 50], [0.978, 0.996, 0.871, 0.993, 0.992]),
            ([30, 50, 50], [0.999, 1.000, 0.963, 1.000, 1.000]),
            ([50, 50, 50], [1.000, 1.000, 0.996, 1.000, 1.000]),
            ([50, 50, 100], [1.000, 1.000, 1.000, 1.000, 1.000]),
            ([50, 100, 100], [1.000, 1.000, 0.999, 1.000, 1.000]),
            ([100, 100, 100], [1.000, 1.000, 1.000, 1.000, 1.000]),
        ],
    ),
    (
        "gamma-shape-scale",
        &[
            ([20, 20, 20], [0.741, 0.646, 0.244, 0.457, 0.550]),
            ([20, 20, 30], [0.821, 0.741, 0.388, 0.512, 0.635]),
            ([20, 30, 50], [0.896, 0.786, 0.527, 0.597, 0.685]),
            ([30, 50, 50], [0.980, 0.873, 0.590, 0.732, 0.809]),
            ([50, 50, 50], [0.995, 0.948, 0.643, 0.816, 0.885]),
            ([50, 50, 100], [1.000, 0.964, 0.839, 0.905, 0.922]),
            ([50, 100, 100], [1.000, 0.982, 0.901, 0.941, 0.967]),
            ([100, 100, 100], [1.000, 1.000, 0.944, 0.986, 0.996]),
        ],
    ),
    (
        "cross-family",
        &[
            ([20, 20, 20], [0.998, 0.745, 0.874, 0.698, 0.674]),
            ([20, 20, 30], [0.999, 0.779, 0.892, 0.751, 0.714]),
            ([20, 30, 50], [1.000, 0.865, 0.948, 0.859, 0.831]),
            ([30, 50, 50], [1.000, 0.935, 0.999, 0.920, 0.903]),
            ([50, 50, 50], [1.000, 0.973, 1.000, 0.958, 0.947]),
            ([50, 50, 100], [1.000, 0.992, 1.000, 0.989, 0.982]),
            ([50, 100, 100], [1.000, 0.994, 1.000, 0.989, 0.989]),
            ([100, 100, 100], [1.000, 1.000, 1.000, 0.998, 0.997]),
        ],
    ),
    (
        "mix-normal-null",
        &[
            ([20, 20, 20], [0.051, 0.045, 0.036, 0.053, 0.053]),
            ([20, 20, 30], [0.043, 0.052, 0.034, 0.052, 0.049]),
            ([20, 30, 50], [0.051, 0.048, 0.035, 0.050, 0.044]),
            ([30, 50, 50], [0.038, 0.054, 0.030, 0.052, 0.046]),
            ([50, 50, 50], [0.060, 0.057, 0.033, 0.054, 0.050]),
            ([50, 50, 100], [0.050, 0.051, 0.043, 0.049, 0.048]),
            ([50, 100, 100], [0.057, 0.054, 0.055, 0.051, 0.045]),
            ([100, 100, 100], [0.038, 0.037, 0.042, 0.035, 0.036]),
        ],
    ),
    (
        "mix-normal-location",
        &[
            ([20, 20, 20], [0.750, 0.918, 0.262, 0.836, 0.833]),
            ([20, 20, 30], [0.778, 0.943, 0.305, 0.857, 0.863]),
            ([20, 30, 50], [0.888, 0.971, 0.475, 0.920, 0.912]),
            ([30, 50, 50], [0.971, 0.998, 0.747, 0.976, 0.975]),
            ([50, 50, 50], [0.995, 1.000, 0.890, 0.994, 0.993]),
            ([50, 50, 100], [1.000, 1.000, 0.962, 1.000, 1.000]),
            ([50, 100, 100], [1.000, 1.000, 0.993, 1.000, 0.999]),
            ([100, 100, 100], [1.000, 1.000, 1.000, 1.000, 1.000]),
        ],
    ),
    (
        "mix-normal-scale",
        &[
            ([20, 20, 20], [0.433, 0.068, 0.318, 0.056, 0.061]),
            ([20, 20, 30], [0.524, 0.070, 0.356, 0.052, 0.068]),
            ([20, 30, 50], [0.656, 0.053, 0.494, 0.045, 0.047]),
            ([30, 50, 50], [0.885, 0.075, 0.734, 0.061, 0.063]),
            ([50, 50, 50], [0.940, 0.105, 0.834, 0.070, 0.074]),
            ([50, 50, 100], [0.986, 0.071, 0.911, 0.054, 0.056]),
            ([50, 100, 100], [0.994, 0.083, 0.958, 0.061, 0.061]),
            ([100, 100, 100], [1.000, 0.117, 0.999, 0.079, 0.078]),
        ],
    ),
    (
        "mix-gamma-null",
        &[
            ([20, 20, 20], [0.059, 0.050, 0.033, 0.043, 0.053]),
            ([20, 20, 30], [0.045, 0.050, 0.034, 0.055, 0.059]),
            ([20, 30, 50], [0.047, 0.055, 0.037, 0.054, 0.058]),
            ([30, 50, 50], [0.042, 0.045, 0.037, 0.046, 0.048]),
            ([50, 50, 50], [0.059, 0.061, 0.038, 0.052, 0.052]),
            ([50, 50, 100], [0.044, 0.040, 0.032, 0.045, 0.044]),
            ([50, 100, 100], [0.058, 0.056, 0.059, 0.054, 0.053]),
            ([100, 100, 100], [0.056, 0.064, 0.047, 0.060, 0.063]),
        ],
    ),
    (
        "mix-gamma",
        &[
            ([20, 20, 20], [0.619, 0.583, 0.238, 0.407, 0.491]),
            ([20, 20, 30], [0.640, 0.614, 0.313, 0.439, 0.531]),
            ([20, 30, 50], [0.771, 0.704, 0.464, 0.533, 0.621]),
            ([30, 50, 50], [0.915, 0.780, 0.652, 0.609, 0.725]),
            ([50, 50, 50], [0.973, 0.864, 0.784, 0.712, 0.799]),
            ([50, 50, 100], [0.988, 0.904, 0.879, 0.778, 0.868]),
            ([50, 100, 100], [0.999, 0.940, 0.959, 0.833, 0.892]),
            ([100, 100, 100], [1.000, 0.986, 0.994, 0.947, 0.969]),
        ],
    ),
    (
        "mix-normal-gamma-null",
        &[
            ([20, 20, 20], [0.059, 0.058, 0.039, 0.057, 0.053]),
            ([20, 20, 30], [0.039, 0.053, 0.035, 0.049, 0.048]),
            ([20, 30, 50], [0.045, 0.047, 0.036, 0.050, 0.049]),
            ([30, 50, 50], [0.049, 0.058, 0.042, 0.061, 0.065]),
            ([50, 50, 50], [0.048, 0.054, 0.032, 0.058, 0.053]),
            ([50, 50, 100], [0.051, 0.048, 0.035, 0.047, 0.048]),
            ([50, 100, 100], [0.050, 0.053, 0.038, 0.056, 0.057]),
            ([100, 100, 100], [0.047, 0.052, 0.035, 0.053, 0.054]),
        ],
    ),
    (
        "mix-normal-gamma",
        &[
            ([20, 20, 20], [0.786, 0.463, 0.647, 0.398, 0.457]),
            ([20, 20, 30], [0.862, 0.519, 0.757, 0.449, 0.524]),
            ([20, 30, 50], [0.943, 0.598, 0.892, 0.541, 0.616]),
            ([30, 50, 50], [0.993, 0.680, 0.987, 0.613, 0.692]),
            ([50, 50, 50], [1.000, 0.755, 0.993, 0.724, 0.783]),
            ([50, 50, 100], [1.000, 0.811, 0.999, 0.775, 0.847]),
            ([50, 100, 100], [1.000, 0.879, 1.000, 0.859, 0.895]),
            ([100, 100, 100], [1.000, 0.946, 1.000, 0.938, 0.960]),
        ],
    ),
];

/// Per bias scenario and estimator: bias, RMSE and coverage at n = 20, 50, 100.
pub(crate) const BIAS_TABLE: &[(usize, &str, [f64; 9])] = &[
    (
        1,
        "OVL_N",
        [
            -0.029, -0.005, -0.002, 0.107, 0.072, 0.053, 0.871, 0.930, 0.939,
        ],
    ),
    (
        1,
        "OVL_K",
        [
            -0.031, 0.008, 0.015, 0.099, 0.068, 0.055, 0.842, 0.944, 0.955,
        ],
    ),
    (
        2,
        "OVL_N",
        [
            -0.076, -0.039, -0.027, 0.129, 0.076, 0.054, 0.738, 0.808, 0.857,
        ],
    ),
    (
        2,
        "OVL_K",
        [
            -0.065, -0.025, -0.015, 0.116, 0.070, 0.051, 0.737, 0.848, 0.883,
        ],
    ),
    (
        3,
        "OVL_N",
        [
            -0.026, -0.016, -0.008, 0.111, 0.074, 0.049, 0.883, 0.915, 0.931,
        ],
    ),
    (
        3,
        "OVL_K",
        [
            -0.003, 0.016, 0.022, 0.100, 0.074, 0.054, 0.919, 0.965, 0.950,
        ],
    ),
    (
        4,
        "OVL_N",
        [
            -0.037, -0.021, -0.014, 0.083, 0.051, 0.037, 0.857, 0.864, 0.878,
        ],
    ),
    (
        4,
        "OVL_K",
        [
            0.018, 0.029, 0.028, 0.088, 0.062, 0.050, 0.883, 0.944, 0.920,
        ],
    ),
    (
        5,
        "OVL_N",
        [
            0.007, 0.022, 0.028, 0.102, 0.070, 0.055, 0.935, 0.945, 0.899,
        ],
    ),
    (
        5,
        "OVL_K",
        [
            0.039, 0.072, 0.078, 0.094, 0.091, 0.088, 0.966, 0.934, 0.688,
        ],
    ),
    (
        6,
        "OVL_N",
        [
            -0.043, -0.010, -0.000, 0.110, 0.067, 0.048, 0.820, 0.901, 0.918,
        ],
    ),
    (
        6,
        "OVL_K",
        [
            -0.072, -0.028, -0.017, 0.118, 0.070, 0.053, 0.665, 0.801, 0.883,
        ],
    ),
    (
        7,
        "OVL_N",
        [
            0.009, 0.037, 0.049, 0.093, 0.072, 0.066, 0.908, 0.913, 0.813,
        ],
    ),
    (
        7,
        "OVL_K",
        [
            -0.033, -0.001, 0.008, 0.095, 0.060, 0.044, 0.828, 0.916, 0.938,
        ],
    ),
];
