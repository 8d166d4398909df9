#![allow(dead_code)]

use std::f64::consts::PI;

use molekom_core::ChannelParams;

/// Hitting density written out in `u = √t`, `g(u) = 2u·f(u²)`, so it is
/// finite at `u = 0` and a plain trapezoid rule converges. `s` is the
/// accumulated transmitter-receiver spread `T_release · D_tot`.
pub fn density_in_u(u: f64, s: f64, d: f64, de: f64) -> f64 {
    let t = u * u;
    if s == 0.0 {
        if u == 0.0 {
            return 0.0;
        }
        return 2.0 * u * d / (4.0 * PI * de * t.powi(3)).sqrt() * (-d * d / (4.0 * de * t)).exp();
    }
    // 2u · √(s·de) / (π u (s + t de)) with the u cancelled
    let direct = 2.0 * (s * de).sqrt() / (PI * (s + t * de)) * (-d * d / (4.0 * s)).exp();
    let w = t + s / de;
    let arg = d * (t * de).sqrt() / (2.0 * (s * (s + t * de)).sqrt());
    let drift = 2.0 * u * d / (4.0 * PI * de * w.powi(3)).sqrt() * (-d * d / (4.0 * de * w)).exp() * libm::erf(arg);
    direct + drift
}

pub fn density_in_t(t: f64, s: f64, d: f64, de: f64) -> f64 {
    let u = t.sqrt();
    density_in_u(u, s, d, de) / (2.0 * u)
}

pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..panels {
        sum += f(a + i as f64 * h);
    }
    sum * h
}

/// Brute-force `q(offset, slot)` on a fixed grid of `panels` panels.
pub fn trapezoid_q(offset: usize, slot: usize, p: &ChannelParams, panels: usize) -> f64 {
    let s = p.release_time(slot) * p.d_tot();
    let (d, de, tau) = (p.distance(), p.d_p_eff(), p.tau());
    if offset == 0 {
        trapezoid(|u| density_in_u(u, s, d, de), 0.0, tau.sqrt(), panels)
    } else {
        let lo = offset as f64 * tau;
        trapezoid(|t| density_in_t(t, s, d, de), lo, lo + tau, panels)
    }
}

/// The reference link parameters: d = 1 µm, D_p = 5e-10 m²/s, τ = 10 ms.
pub fn reference_channel(d_mobile: f64) -> ChannelParams {
    ChannelParams::new(1e-6, 5e-10, d_mobile, d_mobile, 1e-2).unwrap()
}
