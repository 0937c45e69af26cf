//! Bivariate Gaussian density head.
//!
//! Five raw outputs `r` map to `(mux, muy, sx, sy, rho)` as
//! `mu = scale * r[0..2]`, `sigma = scale * exp(r[2..4])`, `rho = RHO_MAX * tanh(r[4])`.
//! The `RHO_MAX` factor keeps `|rho| < 1` in floating point where
//! `tanh` itself rounds to one.

/// Largest correlation magnitude the head can emit.
pub const RHO_MAX: f64 = 1.0 - 1e-6;

/// `ln(2π)`.
pub const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Maps raw head outputs to `[mux, muy, sx, sy, rho]`.
pub fn head(raw: &[f64; 5], scale: f64) -> [f64; 5] {
    [
        scale * raw[0],
        scale * raw[1],
        scale * libm::exp(raw[2]),
        scale * libm::exp(raw[3]),
        RHO_MAX * libm::tanh(raw[4]),
    ]
}

/// Negative log density of `truth` under `[mux, muy, sx, sy, rho]`.
pub fn nll(params: &[f64; 5], truth: [f64; 2]) -> f64 {
    let [mux, muy, sx, sy, rho] = *params;
    let dx = (truth[0] - mux) / sx;
    let dy = (truth[1] - muy) / sy;
    let q = 1.0 - rho * rho;
    let z = dx * dx + dy * dy - 2.0 * rho * dx * dy;
    LN_2PI + libm::log(sx) + libm::log(sy) + 0.5 * libm::log(q) + z / (2.0 * q)
}

/// NLL as a function of the raw head outputs, with its gradient.
pub fn nll_and_grad(raw: &[f64; 5], truth: [f64; 2], scale: f64) -> (f64, [f64; 5]) {
    let p = head(raw, scale);
    let [mux, muy, sx, sy, rho] = p;
    let dx = (truth[0] - mux) / sx;
    let dy = (truth[1] - muy) / sy;
    let q = 1.0 - rho * rho;
    let z = dx * dx + dy * dy - 2.0 * rho * dx * dy;
    let value = LN_2PI + 2.0 * libm::log(scale) + raw[2] + raw[3] + 0.5 * libm::log(q) + z / (2.0 * q);

    let ex = (dx - rho * dy) / q;
    let ey = (dy - rho * dx) / q;
    let d_rho = -rho / q - dx * dy / q + rho * z / (q * q);
    let t = libm::tanh(raw[4]);
    let grad = [
        -ex / sx * scale,
        -ey / sy * scale,
        1.0 - dx * ex,
        1.0 - dy * ey,
        d_rho * RHO_MAX * (1.0 - t * t),
    ];
    (value, grad)
}
