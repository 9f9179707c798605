//! Explicit Runge–Kutta machinery: an embedded Dormand–Prince 5(4) pair with
//! Hairer's fourth-order continuous extension, and classical fixed-step RK4.

pub type State<const N: usize> = [f64; N];

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Dense-output polynomial for one accepted step on `[t0, t0 + h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    coeffs: [State<N>; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Evaluates the continuous extension at `t` (any `t`, but only
    /// accurate inside the step).
    pub fn eval(&self, t: f64) -> State<N> {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        std::array::from_fn(|i| r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i]))))
    }
}

/// Outcome of one attempted step.
#[derive(Debug, Clone, Copy)]
pub struct Attempt<const N: usize> {
    pub y_new: State<N>,
    /// Derivative at the new point (FSAL stage).
    pub f_new: State<N>,
    /// Scaled RMS error estimate; the step is acceptable when `<= 1`.
    pub error: f64,
    pub dense: DenseStep<N>,
}

fn axpy<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Attempts one Dormand–Prince step from `(t, y)` with derivative `f0`.
///
/// The error is measured against `atol + rtol * max(|y|, |y_new|)`
/// componentwise. A non-finite stage makes the error infinite, so the
/// caller rejects the step.
pub fn dopri5_attempt<const N: usize, F>(
    rhs: &F,
    t: f64,
    y: &State<N>,
    f0: &State<N>,
    h: f64,
    atol: f64,
    rtol: f64,
) -> Attempt<N>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let k1 = *f0;
    let k2 = rhs(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
    let k3 = rhs(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = rhs(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = rhs(t + C5 * h, &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = rhs(t + h, &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = axpy(y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = rhs(t + h, &y_new);

    let mut sum = 0.0;
    for i in 0..N {
        let est = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
        sum += (est / scale).powi(2);
    }
    let mut error = (sum / N as f64).sqrt();
    if !error.is_finite() || y_new.iter().chain(k7.iter()).any(|v| !v.is_finite()) {
        error = f64::INFINITY;
    }

    let r2: State<N> = std::array::from_fn(|i| y_new[i] - y[i]);
    let r3: State<N> = std::array::from_fn(|i| h * k1[i] - r2[i]);
    let r4: State<N> = std::array::from_fn(|i| r2[i] - h * k7[i] - r3[i]);
    let r5: State<N> =
        std::array::from_fn(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]));
    Attempt { y_new, f_new: k7, error, dense: DenseStep { t0: t, h, coeffs: [*y, r2, r3, r4, r5] } }
}

/// Step-size factor for the next attempt after an error estimate `err`.
pub fn dopri5_factor(err: f64) -> f64 {
    if !err.is_finite() {
        return 0.2;
    }
    if err == 0.0 {
        return 5.0;
    }
    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<const N: usize, F>(rhs: &F, t: f64, y: &State<N>, h: f64) -> State<N>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &[(1.0, &k1)]));
    let k3 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &[(1.0, &k2)]));
    let k4 = rhs(t + h, &axpy(y, h, &[(1.0, &k3)]));
    axpy(y, h / 6.0, &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &State<2>) -> State<2> {
        [y[1], -y[0]]
    }

    #[test]
    fn dopri5_step_is_fifth_order_accurate() {
        let y0 = [1.0, 0.0];
        let f0 = oscillator(0.0, &y0);
        let err_at = |h: f64| {
            let att = dopri5_attempt(&oscillator, 0.0, &y0, &f0, h, 1e-8, 1e-8);
            (att.y_new[0] - h.cos()).abs()
        };
        // local error O(h^6)
        let ratio = err_at(0.2) / err_at(0.1);
        assert!(ratio > 40.0, "ratio {ratio}");
    }

    #[test]
    fn dense_output_matches_endpoints_and_interior() {
        let y0 = [1.0, 0.0];
        let f0 = oscillator(0.0, &y0);
        let att = dopri5_attempt(&oscillator, 0.0, &y0, &f0, 0.1, 1e-8, 1e-8);
        assert_eq!(att.dense.eval(0.0), y0);
        let end = att.dense.eval(0.1);
        assert!((end[0] - att.y_new[0]).abs() < 1e-15);
        // fourth-order interpolant: O(h^5) error inside the step
        let mid = att.dense.eval(0.05);
        assert!((mid[0] - 0.05f64.cos()).abs() < 1e-7);
        assert!((mid[1] + 0.05f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn rk4_fourth_order_global() {
        let run = |n: usize| {
            let h = 1.0 / n as f64;
            let mut y = [1.0, 0.0];
            for i in 0..n {
                y = rk4_step(&oscillator, i as f64 * h, &y, h);
            }
            (y[0] - 1f64.cos()).abs()
        };
        let ratio = run(20) / run(40);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn factor_bounds() {
        assert_eq!(dopri5_factor(f64::NAN), 0.2);
        assert_eq!(dopri5_factor(0.0), 5.0);
        assert!(dopri5_factor(1.0) < 1.0);
    }
}
