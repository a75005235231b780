use num_complex::Complex64;
use std::f64::consts::PI;

const PROBES: usize = 64;

/// max over a ring of probe angles of ln|f(r e^{iθ})|.
fn log_max_modulus<F: Fn(Complex64) -> Complex64>(f: &F, r: f64) -> f64 {
    (0..PROBES)
        .map(|j| {
            // offset keeps probes off symmetric zeros of the integrand
            let th = 2.0 * PI * (j as f64 + 0.37) / PROBES as f64;
            let v = f(Complex64::from_polar(r, th)).norm();
            if v.is_nan() {
                f64::INFINITY
            } else {
                v.ln()
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Circle radius in [lo, hi] minimizing the maximum modulus of an
/// integrand analytic in the annulus.
///
/// By Hadamard's three-circle theorem ln max|f| is convex in ln r, so a
/// golden-section search finds the minimum. Smaller maxima mean less
/// cancellation in the trapezoid sum.
pub fn adapted_radius<F: Fn(Complex64) -> Complex64>(f: &F, lo: f64, hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = log_max_modulus(f, c.exp());
    let mut fd = log_max_modulus(f, d.exp());
    for _ in 0..48 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = log_max_modulus(f, c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = log_max_modulus(f, d.exp());
        }
        if b - a < 1e-3 {
            break;
        }
    }
    (0.5 * (a + b)).exp()
}
