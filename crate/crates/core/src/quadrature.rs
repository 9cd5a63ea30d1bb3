//! Adaptive Simpson quadrature for complex-valued integrands on an interval.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_PANELS: usize = 1 << 20;

/// Number of equal panels the interval is cut into before adaptation starts.
const INITIAL_PANELS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimpsonConfig {
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for SimpsonConfig {
    fn default() -> Self {
        Self {
            abs_tol: DEFAULT_QUAD_TOL,
            max_panels: DEFAULT_MAX_PANELS,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
}

fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

/// `∫_a^b f(τ) dτ` to absolute tolerance `cfg.abs_tol`.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, cfg: SimpsonConfig) -> Result<Complex64>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut stack = Vec::with_capacity(64);
    let mut left = f(a)?;
    for k in 0..INITIAL_PANELS {
        let pa = a + width * k as f64;
        let pb = if k + 1 == INITIAL_PANELS { b } else { pa + width };
        let fm = f(0.5 * (pa + pb))?;
        let fb = f(pb)?;
        stack.push(Panel {
            a: pa,
            b: pb,
            fa: left,
            fm,
            fb,
            whole: simpson(pa, pb, left, fm, fb),
            tol: cfg.abs_tol / INITIAL_PANELS as f64,
        });
        left = fb;
    }

    let mut panels = INITIAL_PANELS;
    let mut total = Complex64::new(0.0, 0.0);
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let flm = f(0.5 * (p.a + m))?;
        let frm = f(0.5 * (m + p.b))?;
        let l = simpson(p.a, m, p.fa, flm, p.fm);
        let r = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = l + r - p.whole;
        if delta.norm() <= 15.0 * p.tol || m <= p.a || m >= p.b {
            total += l + r + delta / 15.0;
            continue;
        }
        panels += 1;
        if panels > cfg.max_panels {
            return Err(Error::QuadratureFailed { panels: cfg.max_panels });
        }
        let tol = 0.5 * p.tol;
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: l,
            tol,
        });
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: r,
            tol,
        });
    }
    Ok(total)
}
