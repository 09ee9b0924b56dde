//! Fundamental solution of `v″ = (R(t) − λ)v` in phase space, with λ-sensitivities.
//!
//! The state stacks `Y₀ … Y_K`, the Taylor coefficients of `Φ_λ(t)` in `λ`:
//! `Y₀′ = A Y₀`, `Y_k′ = A Y_k + E Y_{k−1}` with `A = [[0, I], [R − λ, 0]]`, `E = [[0, 0], [−I, 0]]`.

use super::problem::MorseSturmProblem;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use nalgebra::DMatrix;
use std::sync::Arc;

pub const MAX_SENS_ORDER: usize = 8;
pub const DEFAULT_RTOL: f64 = 1e-10;
const CHECKPOINTS: usize = 64;

fn phase_generator(r: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let n = r.nrows();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        a[(i, n + i)] = 1.0;
        for j in 0..n {
            a[(n + i, j)] = r[(i, j)] - if i == j { lambda } else { 0.0 };
        }
    }
    a
}

/// Block lower-bidiagonal generator of the augmented system.
fn augmented(r: &DMatrix<f64>, lambda: f64, order: usize) -> DMatrix<f64> {
    let n = r.nrows();
    let d = 2 * n;
    let a = phase_generator(r, lambda);
    let mut m = DMatrix::zeros(d * (order + 1), d * (order + 1));
    for k in 0..=order {
        m.view_mut((k * d, k * d), (d, d)).copy_from(&a);
        if k > 0 {
            for i in 0..n {
                m[(k * d + n + i, (k - 1) * d + i)] = -1.0;
            }
        }
    }
    m
}

fn initial_state(n: usize, order: usize) -> DMatrix<f64> {
    let d = 2 * n;
    let mut y = DMatrix::zeros(d * (order + 1), d);
    for i in 0..d {
        y[(i, i)] = 1.0;
    }
    y
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Dormand–Prince 5(4) with standard step-size control.
pub(crate) fn dopri5(
    f: &dyn Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
    t0: f64,
    y0: &DMatrix<f64>,
    t1: f64,
    rtol: f64,
) -> Result<DMatrix<f64>> {
    let atol = rtol * 1e-2;
    let mut t = t0;
    let mut y = y0.clone();
    if t1 <= t0 {
        return Ok(y);
    }
    let mut h = (t1 - t0).min(1e-2);
    let mut steps = 0usize;
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        let mut k: Vec<DMatrix<f64>> = Vec::with_capacity(7);
        k.push(f(t, &y));
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[s][j] != 0.0 {
                    ys += kj * (h * A[s][j]);
                }
            }
            k.push(f(t + C[s] * h, &ys));
        }
        let mut y5 = y.clone();
        let mut err = DMatrix::zeros(y.nrows(), y.ncols());
        for j in 0..7 {
            let b5 = if j < 6 { A[6][j] } else { 0.0 };
            if b5 != 0.0 {
                y5 += &k[j] * (h * b5);
            }
            err += &k[j] * (h * (b5 - B4[j]));
        }
        let mut acc = 0.0;
        for ((e, a), b) in err.iter().zip(y.iter()).zip(y5.iter()) {
            let sc = atol + rtol * a.abs().max(b.abs());
            acc += (e / sc).powi(2);
        }
        let en = (acc / err.len() as f64).sqrt();
        if en <= 1.0 {
            t += h;
            y = y5;
        }
        let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        steps += 1;
        if h < 1e-14 * t1.abs().max(1.0) || steps > 2_000_000 {
            return Err(Error::IntegrationTolerance(t));
        }
    }
    Ok(y)
}

#[derive(Clone)]
enum Mode {
    Exact(DMatrix<f64>),
    Numeric(Arc<Vec<(f64, DMatrix<f64>)>>),
}

/// Evaluator of `Φ_λ(t)` and its λ-Taylor coefficients on `[0, 1]`.
#[derive(Clone)]
pub struct JacobiFlow {
    prob: Arc<MorseSturmProblem>,
    lambda: f64,
    order: usize,
    rtol: f64,
    mode: Mode,
}

impl std::fmt::Debug for JacobiFlow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JacobiFlow")
            .field("label", &self.prob.label)
            .field("lambda", &self.lambda)
            .field("order", &self.order)
            .field("exact", &matches!(self.mode, Mode::Exact(_)))
            .finish()
    }
}

pub fn integrate_flow(prob: &MorseSturmProblem, lambda: f64, sens_order: usize) -> Result<JacobiFlow> {
    integrate_flow_with(prob, lambda, sens_order, DEFAULT_RTOL)
}

pub fn integrate_flow_with(prob: &MorseSturmProblem, lambda: f64, sens_order: usize, rtol: f64) -> Result<JacobiFlow> {
    if sens_order > MAX_SENS_ORDER {
        return Err(Error::OrderExceeded { needed: sens_order, available: MAX_SENS_ORDER });
    }
    let mode = if prob.r.is_constant() {
        Mode::Exact(augmented(&prob.r.at(0.0).to_dmatrix(), lambda, sens_order))
    } else {
        let rhs = rhs_for(prob, lambda, sens_order);
        let mut cps = vec![(0.0, initial_state(prob.n, sens_order))];
        for i in 1..=CHECKPOINTS {
            let t = i as f64 / CHECKPOINTS as f64;
            let (tp, yp) = cps.last().expect("checkpoint");
            let y = dopri5(&rhs, *tp, yp, t, rtol)?;
            cps.push((t, y));
        }
        Mode::Numeric(Arc::new(cps))
    };
    Ok(JacobiFlow { prob: Arc::new(prob.clone()), lambda, order: sens_order, rtol, mode })
}

fn rhs_for(prob: &MorseSturmProblem, lambda: f64, order: usize) -> impl Fn(f64, &DMatrix<f64>) -> DMatrix<f64> {
    let r = prob.r.clone();
    move |t, y| augmented(&r.at(t).to_dmatrix(), lambda, order) * y
}

impl JacobiFlow {
    pub fn problem(&self) -> &MorseSturmProblem {
        &self.prob
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn state(&self, t: f64) -> Result<DMatrix<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::DimensionMismatch(format!("flow evaluated outside [0, 1] at {t}")));
        }
        match &self.mode {
            Mode::Exact(m) => Ok((m * t).exp().columns(0, 2 * self.prob.n).into_owned()),
            Mode::Numeric(cps) => {
                let i = ((t * CHECKPOINTS as f64).floor() as usize).min(CHECKPOINTS);
                let (tp, yp) = &cps[i];
                let rhs = rhs_for(&self.prob, self.lambda, self.order);
                dopri5(&rhs, *tp, yp, t, self.rtol)
            }
        }
    }

    /// `[Φ, ∂_λΦ, ∂_λ²Φ/2!, …]` at `t`.
    pub fn taylor_at(&self, t: f64) -> Result<Vec<Mat<f64>>> {
        let y = self.state(t)?;
        let d = 2 * self.prob.n;
        Ok((0..=self.order).map(|k| Mat::from_dmatrix(&y.rows(k * d, d).into_owned())).collect())
    }

    pub fn phi(&self, t: f64) -> Result<Mat<f64>> {
        Ok(self.taylor_at(t)?.swap_remove(0))
    }

    /// `∂_λᵏ Φ` at `t`.
    pub fn derivative(&self, t: f64, k: usize) -> Result<Mat<f64>> {
        if k > self.order {
            return Err(Error::OrderExceeded { needed: k, available: self.order });
        }
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        Ok(self.taylor_at(t)?[k].scale(&fact))
    }

    /// `‖ΦᵀΩ_gΦ − Ω_g‖_max`.
    pub fn symplectic_defect(&self, t: f64) -> Result<f64> {
        let p = self.phi(t)?;
        let o = omega_g(&self.prob.g);
        Ok(p.transpose().mul(&o).mul(&p).sub(&o).max_abs())
    }

    /// Taylor coefficients of `Φ_λ(t₀ + h)` in `h`, from the recursion `(k+1)Y_{k+1} = Σ_j A_j Y_{k−j}`.
    pub fn t_jet(&self, t0: f64, order: usize) -> Result<Vec<Mat<f64>>> {
        let n = self.prob.n;
        let r = self.prob.r.taylor(t0, order);
        let gens: Vec<Mat<f64>> = (0..order)
            .map(|j| {
                let mut a = Mat::zeros(2 * n, 2 * n);
                if j == 0 {
                    a.set_block(0, n, &Mat::identity(n));
                    a.set_block(n, 0, &r[0].sub(&Mat::identity(n).scale(&self.lambda)));
                } else {
                    a.set_block(n, 0, &r[j]);
                }
                a
            })
            .collect();
        let mut ys = vec![self.phi(t0)?];
        for k in 0..order {
            let mut acc = Mat::zeros(2 * n, 2 * n);
            for j in 0..=k {
                acc = acc.add(&gens[j].mul(&ys[k - j]));
            }
            ys.push(acc.scale(&(1.0 / (k + 1) as f64)));
        }
        Ok(ys)
    }
}

pub fn omega_g(g: &Mat<f64>) -> Mat<f64> {
    let n = g.rows();
    let mut o = Mat::zeros(2 * n, 2 * n);
    o.set_block(0, n, g);
    o.set_block(n, 0, &g.neg());
    o
}

/// Richardson-extrapolated central difference of `Φ_λ(t)` in `λ`.
pub fn richardson_sensitivity(prob: &MorseSturmProblem, lambda: f64, t: f64, h: f64) -> Result<Mat<f64>> {
    let at = |l: f64| -> Result<Mat<f64>> { integrate_flow(prob, l, 0)?.phi(t) };
    let central = |h: f64| -> Result<Mat<f64>> { Ok(at(lambda + h)?.sub(&at(lambda - h)?).scale(&(0.5 / h))) };
    let d1 = central(h)?;
    let d2 = central(0.5 * h)?;
    Ok(d2.scale(&(4.0 / 3.0)).sub(&d1.scale(&(1.0 / 3.0))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morse_sturm::problem::{Curvature, MatSpline};
    use std::f64::consts::PI;

    fn close(a: &Mat<f64>, b: &Mat<f64>, tol: f64) -> bool {
        a.sub(b).max_abs() <= tol
    }

    fn blocks(c: f64, s: f64, cp: f64, sp: f64, n: usize) -> Mat<f64> {
        let i = Mat::<f64>::identity(n);
        let mut m = Mat::zeros(2 * n, 2 * n);
        m.set_block(0, 0, &i.scale(&c));
        m.set_block(0, n, &i.scale(&s));
        m.set_block(n, 0, &i.scale(&cp));
        m.set_block(n, n, &i.scale(&sp));
        m
    }

    #[test]
    fn free_flow_is_a_shear() {
        let p = MorseSturmProblem::constant(Mat::identity(2), Mat::zeros(2, 2), "flat").unwrap();
        let f = integrate_flow(&p, 0.0, 0).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert!(close(&f.phi(t).unwrap(), &blocks(1.0, t, 0.0, 1.0, 2), 1e-14));
        }
    }

    #[test]
    fn round_sphere_blocks() {
        let p = MorseSturmProblem::constant(Mat::identity(2), Mat::identity(2).scale(&(-PI * PI)), "s").unwrap();
        let f = integrate_flow(&p, 0.0, 0).unwrap();
        for t in [0.1, 0.5, 0.77, 1.0] {
            let (c, s) = ((PI * t).cos(), (PI * t).sin());
            assert!(close(&f.phi(t).unwrap(), &blocks(c, s / PI, -PI * s, c, 2), 1e-12));
        }
    }

    #[test]
    fn numeric_flow_matches_exact_flow() {
        let r = Mat::from_rows(vec![vec![-20.0, 3.0], vec![3.0, 5.0]]).unwrap();
        let g = Mat::identity(2);
        let exact = integrate_flow(&MorseSturmProblem::constant(g.clone(), r.clone(), "c").unwrap(), -1.5, 3).unwrap();
        let knots: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
        let spline = MatSpline::new(knots, vec![r; 5]).unwrap();
        let numeric = MorseSturmProblem::new(g, Curvature::Samples(spline), "s").unwrap();
        let nf = integrate_flow(&numeric, -1.5, 3).unwrap();
        for t in [0.2, 0.61, 1.0] {
            let a = exact.taylor_at(t).unwrap();
            let b = nf.taylor_at(t).unwrap();
            for k in 0..=3 {
                assert!(close(&a[k], &b[k], 1e-8 * a[k].max_abs().max(1.0)), "order {k} at {t}");
            }
        }
    }

    #[test]
    fn time_varying_flow_is_symplectic_for_indefinite_metric() {
        let g = Mat::diag(&[1.0, -1.0]);
        // gR symmetric: R = [[a, b], [−b, d]]
        let r0 = Mat::from_rows(vec![vec![-9.0, 2.0], vec![-2.0, 4.0]]).unwrap();
        let r1 = Mat::from_rows(vec![vec![5.0, -1.0], vec![1.0, -3.0]]).unwrap();
        let p = MorseSturmProblem::new(g, Curvature::Poly(vec![r0, r1]), "tv").unwrap();
        let f = integrate_flow(&p, 0.7, 2).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert!(f.symplectic_defect(t).unwrap() <= 1e-9, "defect at {t}");
        }
    }

    #[test]
    fn sensitivities_match_richardson_differences() {
        let g = Mat::diag(&[1.0, -1.0]);
        let r0 = Mat::from_rows(vec![vec![-9.0, 2.0], vec![-2.0, 4.0]]).unwrap();
        let r1 = Mat::from_rows(vec![vec![5.0, -1.0], vec![1.0, -3.0]]).unwrap();
        let p = MorseSturmProblem::new(g, Curvature::Poly(vec![r0, r1]), "tv").unwrap();
        let f = integrate_flow(&p, 0.3, 1).unwrap();
        let d = f.derivative(1.0, 1).unwrap();
        let rich = richardson_sensitivity(&p, 0.3, 1.0, 1e-2).unwrap();
        assert!(close(&d, &rich, 1e-6 * d.max_abs().max(1.0)));
    }

    #[test]
    fn t_jet_matches_flow() {
        let g = Mat::identity(2);
        let r0 = Mat::from_rows(vec![vec![-9.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let r1 = Mat::from_rows(vec![vec![5.0, -1.0], vec![-1.0, -3.0]]).unwrap();
        let p = MorseSturmProblem::new(g, Curvature::Poly(vec![r0, r1]), "tv").unwrap();
        let f = integrate_flow(&p, 0.0, 0).unwrap();
        let jet = f.t_jet(0.4, 8).unwrap();
        let h: f64 = 0.05;
        let mut approx = Mat::zeros(4, 4);
        for (k, y) in jet.iter().enumerate() {
            approx = approx.add(&y.scale(&h.powi(k as i32)));
        }
        assert!(close(&approx, &f.phi(0.45).unwrap(), 1e-9));
    }

    #[test]
    fn sensitivity_order_is_bounded() {
        let p = MorseSturmProblem::constant(Mat::identity(1), Mat::zeros(1, 1), "f").unwrap();
        assert!(matches!(integrate_flow(&p, 0.0, 9), Err(Error::OrderExceeded { .. })));
    }
}
