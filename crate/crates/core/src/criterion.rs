//! Projection criteria for the fundamental frequency and their exact first
//! and second derivatives.
//!
//! Two criteria are provided:
//!
//! * [`Criterion::Separable`]: `g(λ) = Σ_j R_j(λ)` with
//!   `R_j = Yᵀ X_j (X_jᵀ X_j)⁻¹ X_jᵀ Y`, one 2x2 block per harmonic.
//! * [`Criterion::Joint`]: `Yᵀ X (XᵀX)⁻¹ XᵀY` with the full `n x 2p` design
//!   `X = (X_1, ..., X_p)`. This is the exact profile of the least squares
//!   criterion; the separable form drops the cross blocks `X_jᵀ X_k`, which
//!   shifts its maximum by `O(n⁻²)` even without noise.
//!
//! Both are assembled from moment blocks built by one `O(n)` pass in `f64`, so no
//! `n x n` matrix is formed. With `D_j = diag(j, 2j, ..., nj)` and
//! `E = [[0, 1], [-1, 0]]`, the design derivatives are `Ẋ_j = D_j X_j E`
//! and `Ẍ_j = -D_j² X_j`.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::check_harmonic_range;

/// Which projection the frequency criterion uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Sum of per-harmonic projections `Σ_j R_j`.
    Separable,
    /// Projection onto all `2p` regressors at once.
    #[default]
    Joint,
}

/// Per-harmonic moment blocks at a fixed `(j, λ, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicDesignMoments {
    pub j: usize,
    pub lambda: f64,
    pub n: usize,
    /// `X_jᵀ X_j`
    pub m_xx: Matrix2<f64>,
    /// `X_jᵀ D_j X_j`
    pub m_xdx: Matrix2<f64>,
    /// `X_jᵀ D_j² X_j`
    pub m_xd2x: Matrix2<f64>,
    /// `X_jᵀ Y`
    pub v_xy: Vector2<f64>,
    /// `X_jᵀ D_j Y`
    pub v_dxy: Vector2<f64>,
    /// `X_jᵀ D_j² Y`
    pub v_d2xy: Vector2<f64>,
}

/// Builds all six blocks by direct summation over `t = 1..n`.
pub fn compute_moments(y: &[f64], j: usize, lambda: f64) -> Result<HarmonicDesignMoments> {
    if j == 0 {
        return Err(Error::Domain("harmonic index starts at 1".into()));
    }
    check_harmonic_range(j as f64 * lambda, 1)?;
    let omega = j as f64 * lambda;
    // cc, cs, ss for each power of d, then yc, ys for each power of d
    let mut s = [0.0f64; 15];
    for (i, &v) in y.iter().enumerate() {
        let t = (i + 1) as f64;
        let d = j as f64 * t;
        let d2 = d * d;
        let (sn, c) = (omega * t).sin_cos();
        let (cc, cs, ss) = (c * c, c * sn, sn * sn);
        let (yc, ys) = (v * c, v * sn);
        #[rustfmt::skip]
        let terms = [
            cc, cs, ss,
            d * cc, d * cs, d * ss,
            d2 * cc, d2 * cs, d2 * ss,
            yc, ys,
            d * yc, d * ys,
            d2 * yc, d2 * ys,
        ];
        for (a, x) in s.iter_mut().zip(terms) {
            *a += x;
        }
    }
    let sym = |a: f64, b: f64, c: f64| Matrix2::new(a, b, b, c);
    Ok(HarmonicDesignMoments {
        j,
        lambda,
        n: y.len(),
        m_xx: sym(s[0], s[1], s[2]),
        m_xdx: sym(s[3], s[4], s[5]),
        m_xd2x: sym(s[6], s[7], s[8]),
        v_xy: Vector2::new(s[9], s[10]),
        v_dxy: Vector2::new(s[11], s[12]),
        v_d2xy: Vector2::new(s[13], s[14]),
    })
}

fn exchange() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

fn dyn2(m: &Matrix2<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(2, 2, m.as_slice())
}

fn dynv2(v: &Vector2<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

impl HarmonicDesignMoments {
    /// `(X_jᵀ X_j)⁻¹`, refusing near-singular designs.
    pub fn m_xx_inverse(&self) -> Result<Matrix2<f64>> {
        let n = self.n as f64;
        let degenerate = Error::DegenerateFrequency {
            j: self.j,
            lambda: self.lambda,
        };
        if self.m_xx.determinant().abs() < 1e-10 * n * n {
            return Err(degenerate);
        }
        self.m_xx.try_inverse().ok_or(degenerate)
    }

    /// `R_j = Yᵀ X_j (X_jᵀ X_j)⁻¹ X_jᵀ Y`.
    pub fn r(&self) -> Result<f64> {
        let inv = self.m_xx_inverse()?;
        Ok(self.v_xy.dot(&(inv * self.v_xy)).max(0.0))
    }

    /// Products of the design, its derivatives and `Y` for this harmonic.
    pub fn projection_blocks(&self) -> Result<ProjectionBlocks> {
        let m_inv = self.m_xx_inverse()?;
        let e = exchange();
        let e_t = e.transpose();
        Ok(ProjectionBlocks {
            m_inv: dyn2(&m_inv),
            xty: dynv2(&self.v_xy),
            xdot_ty: dynv2(&(e_t * self.v_dxy)),
            xddot_ty: dynv2(&(-self.v_d2xy)),
            xdot_tx: dyn2(&(e_t * self.m_xdx)),
            xdot_txdot: dyn2(&(e_t * self.m_xd2x * e)),
            xddot_tx: dyn2(&(-self.m_xd2x)),
        })
    }

    /// `(R_j, R'_j, R''_j)`.
    pub fn r_with_derivatives(&self) -> Result<(f64, f64, f64)> {
        Ok(self.projection_blocks()?.value_and_derivatives())
    }
}

/// Inputs to the projection norm `YᵀX M⁻¹ XᵀY` and its derivatives, for any
/// design `X` with `M = XᵀX`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBlocks {
    pub m_inv: DMatrix<f64>,
    /// `XᵀY`
    pub xty: DVector<f64>,
    /// `ẊᵀY`
    pub xdot_ty: DVector<f64>,
    /// `ẌᵀY`
    pub xddot_ty: DVector<f64>,
    /// `ẊᵀX`
    pub xdot_tx: DMatrix<f64>,
    /// `ẊᵀẊ`
    pub xdot_txdot: DMatrix<f64>,
    /// `ẌᵀX`
    pub xddot_tx: DMatrix<f64>,
}

impl ProjectionBlocks {
    /// `(R, R', R'')` where `R'/2 = YᵀẊ M⁻¹ XᵀY - YᵀX M⁻¹ ẊᵀX M⁻¹ XᵀY`
    /// and `R''/2` is its nine-term derivative.
    pub fn value_and_derivatives(&self) -> (f64, f64, f64) {
        let m_inv = &self.m_inv;
        let p = &self.xdot_tx;
        let p_t = p.transpose();
        let sum_dot = p + &p_t; // ẊᵀX + XᵀẊ

        let w = m_inv * &self.xty; // M⁻¹XᵀY
        let u = m_inv * &self.xdot_ty; // M⁻¹ẊᵀY
        let bilinear = |a: &DVector<f64>, m: &DMatrix<f64>, b: &DVector<f64>| a.dot(&(m * b));

        let r = self.xty.dot(&w).max(0.0);
        let half_r1 = self.xdot_ty.dot(&w) - bilinear(&w, p, &w);

        let m_inv_sum = m_inv * &sum_dot;
        let m_inv_p = m_inv * p;
        let terms = [
            self.xddot_ty.dot(&w),
            -bilinear(&u, &sum_dot, &w),
            self.xdot_ty.dot(&u),
            -bilinear(&u, p, &w),
            bilinear(&w, &(&sum_dot * &m_inv_p), &w),
            -bilinear(&w, &self.xddot_tx, &w),
            -bilinear(&w, &self.xdot_txdot, &w),
            bilinear(&w, &(p * &m_inv_sum), &w),
            -bilinear(&w, p, &u),
        ];
        let half_r2: f64 = terms.iter().sum();
        (r, 2.0 * half_r1, 2.0 * half_r2)
    }
}

/// Moments of the full `n x 2p` design with `T = diag(1, ..., n)`.
///
/// Columns are ordered `(cos λt, sin λt, cos 2λt, sin 2λt, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDesignMoments {
    pub p: usize,
    pub lambda: f64,
    pub n: usize,
    /// `XᵀX`
    pub m_xx: DMatrix<f64>,
    /// `XᵀTX`
    pub m_xtx: DMatrix<f64>,
    /// `XᵀT²X`
    pub m_xt2x: DMatrix<f64>,
    /// `XᵀY`
    pub v_xy: DVector<f64>,
    /// `XᵀTY`
    pub v_txy: DVector<f64>,
    /// `XᵀT²Y`
    pub v_t2xy: DVector<f64>,
}

pub fn compute_joint_moments(y: &[f64], p: usize, lambda: f64) -> Result<JointDesignMoments> {
    check_harmonic_range(lambda, p)?;
    let k = 2 * p;
    // upper triangles, row-major
    let mut xx = vec![0.0; k * k];
    let mut xtx = vec![0.0; k * k];
    let mut xt2x = vec![0.0; k * k];
    let mut xy = vec![0.0; k];
    let mut txy = vec![0.0; k];
    let mut t2xy = vec![0.0; k];
    let mut row = vec![0.0; k];
    for (i, &v) in y.iter().enumerate() {
        let t = (i + 1) as f64;
        let t2 = t * t;
        harmonic_row(lambda * t, &mut row);
        for a in 0..k {
            let ra = row[a];
            let rv = ra * v;
            xy[a] += rv;
            txy[a] += t * rv;
            t2xy[a] += t2 * rv;
            for b in a..k {
                let prod = ra * row[b];
                xx[a * k + b] += prod;
                xtx[a * k + b] += t * prod;
                xt2x[a * k + b] += t2 * prod;
            }
        }
    }
    Ok(JointDesignMoments {
        p,
        lambda,
        n: y.len(),
        m_xx: symmetric_from_upper(&xx, k),
        m_xtx: symmetric_from_upper(&xtx, k),
        m_xt2x: symmetric_from_upper(&xt2x, k),
        v_xy: DVector::from_vec(xy),
        v_txy: DVector::from_vec(txy),
        v_t2xy: DVector::from_vec(t2xy),
    })
}

/// Fills `row` with `(cos θ, sin θ, cos 2θ, sin 2θ, ...)` using the
/// angle-addition recurrence from a single `sin_cos`.
fn harmonic_row(theta: f64, row: &mut [f64]) {
    let (s1, c1) = theta.sin_cos();
    let (mut c, mut s) = (c1, s1);
    for pair in row.chunks_exact_mut(2) {
        pair[0] = c;
        pair[1] = s;
        (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
    }
}

fn symmetric_from_upper(upper: &[f64], k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |a, b| {
        if a <= b {
            upper[a * k + b]
        } else {
            upper[b * k + a]
        }
    })
}

/// `XᵀX` and `XᵀY` for the joint `n × 2p` design, columns ordered
/// `cos λt, sin λt, cos 2λt, ...`.
pub(crate) fn joint_gram(y: &[f64], p: usize, lambda: f64) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_harmonic_range(lambda, p)?;
    let k = 2 * p;
    let mut xx = vec![0.0; k * k];
    let mut xy = vec![0.0; k];
    let mut row = vec![0.0; k];
    for (i, &v) in y.iter().enumerate() {
        harmonic_row(lambda * (i + 1) as f64, &mut row);
        for a in 0..k {
            xy[a] += row[a] * v;
            for b in a..k {
                xx[a * k + b] += row[a] * row[b];
            }
        }
    }
    Ok((symmetric_from_upper(&xx, k), DVector::from_vec(xy)))
}

/// `Yᵀ X (XᵀX)⁻¹ XᵀY` for the joint design without the derivative moments.
pub fn joint_value(y: &[f64], p: usize, lambda: f64) -> Result<f64> {
    let (m_xx, v_xy) = joint_gram(y, p, lambda)?;
    let inv = invert_gram(&m_xx, y.len(), lambda)?;
    Ok(v_xy.dot(&(&inv * &v_xy)).max(0.0))
}

pub(crate) fn invert_gram(m_xx: &DMatrix<f64>, n: usize, lambda: f64) -> Result<DMatrix<f64>> {
    let degenerate = || Error::DegenerateFrequency { j: 0, lambda };
    let chol = m_xx.clone().cholesky().ok_or_else(degenerate)?;
    let n = n as f64;
    if chol.l_dirty().diagonal().iter().any(|d| d * d < 1e-10 * n) {
        return Err(degenerate());
    }
    Ok(chol.inverse())
}

impl JointDesignMoments {
    /// `(XᵀX)⁻¹` via Cholesky, refusing near-singular designs.
    pub fn m_xx_inverse(&self) -> Result<DMatrix<f64>> {
        invert_gram(&self.m_xx, self.n, self.lambda)
    }

    pub fn value(&self) -> Result<f64> {
        let inv = self.m_xx_inverse()?;
        Ok(self.v_xy.dot(&(&inv * &self.v_xy)).max(0.0))
    }

    pub fn projection_blocks(&self) -> Result<ProjectionBlocks> {
        let m_inv = self.m_xx_inverse()?;
        let k = 2 * self.p;
        // Ẋ = T X K with K = blockdiag(j E); Ẍ = -T² X J² with J² = blockdiag(j² I)
        let mut kmat = DMatrix::zeros(k, k);
        let mut j2 = DMatrix::zeros(k, k);
        for j in 0..self.p {
            let jf = (j + 1) as f64;
            kmat[(2 * j, 2 * j + 1)] = jf;
            kmat[(2 * j + 1, 2 * j)] = -jf;
            j2[(2 * j, 2 * j)] = jf * jf;
            j2[(2 * j + 1, 2 * j + 1)] = jf * jf;
        }
        let k_t = kmat.transpose();
        Ok(ProjectionBlocks {
            m_inv,
            xty: self.v_xy.clone(),
            xdot_ty: &k_t * &self.v_txy,
            xddot_ty: -(&j2 * &self.v_t2xy),
            xdot_tx: &k_t * &self.m_xtx,
            xdot_txdot: &k_t * &self.m_xt2x * &kmat,
            xddot_tx: -(&j2 * &self.m_xt2x),
        })
    }
}

/// `R_j(λ)`.
pub fn r_j(y: &[f64], j: usize, lambda: f64) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("harmonic index starts at 1".into()));
    }
    check_harmonic_range(j as f64 * lambda, 1)?;
    let omega = j as f64 * lambda;
    let mut s = [0.0f64; 5];
    for (i, &v) in y.iter().enumerate() {
        let (sn, c) = (omega * (i + 1) as f64).sin_cos();
        s[0] += c * c;
        s[1] += c * sn;
        s[2] += sn * sn;
        s[3] += v * c;
        s[4] += v * sn;
    }
    let m = HarmonicDesignMoments {
        j,
        lambda,
        n: y.len(),
        m_xx: Matrix2::new(s[0], s[1], s[1], s[2]),
        m_xdx: Matrix2::zeros(),
        m_xd2x: Matrix2::zeros(),
        v_xy: Vector2::new(s[3], s[4]),
        v_dxy: Vector2::zeros(),
        v_d2xy: Vector2::zeros(),
    };
    m.r()
}

/// `g(λ) = Σ_{j=1..p} R_j(λ)`.
pub fn g(y: &[f64], p: usize, lambda: f64) -> Result<f64> {
    check_harmonic_range(lambda, p)?;
    (1..=p).map(|j| r_j(y, j, lambda)).sum()
}

/// `(g'(λ), g''(λ))` of the separable criterion.
pub fn g_derivatives(y: &[f64], p: usize, lambda: f64) -> Result<(f64, f64)> {
    let pt = evaluate(y, p, lambda, Criterion::Separable)?;
    Ok((pt.g_prime, pt.g_double_prime))
}

/// Value of the selected criterion.
pub fn criterion_value(y: &[f64], p: usize, lambda: f64, kind: Criterion) -> Result<f64> {
    match kind {
        Criterion::Separable => g(y, p, lambda),
        Criterion::Joint => joint_value(y, p, lambda),
    }
}

/// Value and derivatives of a criterion at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionPoint {
    pub lambda: f64,
    pub g: f64,
    pub g_prime: f64,
    pub g_double_prime: f64,
}

/// Value, first and second derivative from one pass over the data.
pub fn evaluate(y: &[f64], p: usize, lambda: f64, kind: Criterion) -> Result<CriterionPoint> {
    check_harmonic_range(lambda, p)?;
    let mut out = CriterionPoint {
        lambda,
        g: 0.0,
        g_prime: 0.0,
        g_double_prime: 0.0,
    };
    match kind {
        Criterion::Separable => {
            // summed in index order so the result does not depend on scheduling
            for j in 1..=p {
                let (r, r1, r2) = compute_moments(y, j, lambda)?.r_with_derivatives()?;
                out.g += r;
                out.g_prime += r1;
                out.g_double_prime += r2;
            }
        }
        Criterion::Joint => {
            let (r, r1, r2) = compute_joint_moments(y, p, lambda)?
                .projection_blocks()?
                .value_and_derivatives();
            out.g = r;
            out.g_prime = r1;
            out.g_double_prime = r2;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synthesize, HarmonicModel, LinearProcessSpec};
    use approx::assert_relative_eq;

    /// `R'' = 2 v''ᵀw + 2 (u - Sw)ᵀ M⁻¹ (u - Sw) - wᵀ M'' w`, with every
    /// block written out from sines and cosines instead of `E`.
    fn compact_second_derivative(m: &HarmonicDesignMoments) -> f64 {
        let inv = m.m_xx.try_inverse().unwrap();
        let w = inv * m.v_xy;
        let u = Vector2::new(-m.v_dxy[1], m.v_dxy[0]);
        let a = &m.m_xdx;
        let s = Matrix2::new(
            -2.0 * a[(0, 1)],
            a[(0, 0)] - a[(1, 1)],
            a[(0, 0)] - a[(1, 1)],
            2.0 * a[(0, 1)],
        );
        let b = &m.m_xd2x;
        let m2 = Matrix2::new(
            -2.0 * b[(0, 0)] + 2.0 * b[(1, 1)],
            -4.0 * b[(0, 1)],
            -4.0 * b[(0, 1)],
            -2.0 * b[(1, 1)] + 2.0 * b[(0, 0)],
        );
        let r = u - s * w;
        -2.0 * m.v_d2xy.dot(&w) + 2.0 * r.dot(&(inv * r)) - w.dot(&(m2 * w))
    }

    fn noisy_model1(n: usize, sigma2: f64, seed: u64) -> Vec<f64> {
        let noise = LinearProcessSpec::new(vec![1.0, 0.5], sigma2).unwrap();
        synthesize(&HarmonicModel::model1(), n, Some(&noise), seed)
            .unwrap()
            .into_samples()
    }

    #[test]
    fn nine_term_form_matches_compact_form() {
        let y = noisy_model1(300, 0.5, 9);
        for j in 1..=4 {
            for &lam in &[0.2, 0.25, 0.3, 0.61] {
                if j as f64 * lam >= std::f64::consts::PI {
                    continue;
                }
                let m = compute_moments(&y, j, lam).unwrap();
                let (_, _, r2) = m.r_with_derivatives().unwrap();
                assert_relative_eq!(r2, compact_second_derivative(&m), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn joint_with_one_harmonic_equals_separable() {
        let y = noisy_model1(257, 1.0, 2);
        let a = evaluate(&y, 1, 0.31, Criterion::Separable).unwrap();
        let b = evaluate(&y, 1, 0.31, Criterion::Joint).unwrap();
        assert_relative_eq!(a.g, b.g, max_relative = 1e-10);
        assert_relative_eq!(a.g_prime, b.g_prime, max_relative = 1e-8);
        assert_relative_eq!(a.g_double_prime, b.g_double_prime, max_relative = 1e-8);
    }

    #[test]
    fn zero_signal() {
        let y = vec![0.0; 100];
        let m = compute_moments(&y, 1, 0.5).unwrap();
        assert_eq!(m.v_xy, Vector2::zeros());
        assert_eq!(m.v_dxy, Vector2::zeros());
        assert_eq!(m.v_d2xy, Vector2::zeros());
        assert!(m.m_xx[(0, 0)] > 40.0);
        assert_eq!(r_j(&y, 1, 0.5).unwrap(), 0.0);
        assert_eq!(g(&y, 3, 0.5).unwrap(), 0.0);
        assert_eq!(criterion_value(&y, 3, 0.5, Criterion::Joint).unwrap(), 0.0);
    }

    #[test]
    fn moment_limits() {
        let n = 4000;
        let y = vec![0.0; n];
        let m = compute_moments(&y, 1, 0.25).unwrap();
        let nf = n as f64;
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let want = if a == b { 0.5 } else { 0.0 };
            assert!((m.m_xx[(a, b)] / nf - want).abs() < 5.0 / nf);
            assert!((m.m_xdx[(a, b)] / (nf * nf) - want / 2.0).abs() < 5.0 / nf);
            assert!((m.m_xd2x[(a, b)] / (nf * nf * nf) - want / 3.0).abs() < 5.0 / nf);
        }
        assert_eq!(m.m_xx, m.m_xx.transpose());
        assert_eq!(m.m_xd2x, m.m_xd2x.transpose());
    }

    #[test]
    fn pure_tone_projection() {
        let n = 2000;
        let (a, b) = (1.3, -0.4);
        let y: Vec<f64> = (1..=n)
            .map(|t| a * (0.4 * t as f64).cos() + b * (0.4 * t as f64).sin())
            .collect();
        let r = r_j(&y, 1, 0.4).unwrap();
        // a pure tone lies in the column space, so R = |Y|²
        let energy: f64 = y.iter().map(|v| v * v).sum();
        assert_relative_eq!(r, energy, max_relative = 1e-10);
        assert!((r - n as f64 / 2.0 * (a * a + b * b)).abs() < 5.0);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert_relative_eq!(r_j(&neg, 1, 0.4).unwrap(), r, max_relative = 1e-14);
    }

    #[test]
    fn degenerate_frequency_reported() {
        let y = vec![1.0; 50];
        assert!(matches!(
            r_j(&y, 1, 1e-9),
            Err(Error::DegenerateFrequency { .. })
        ));
        assert!(matches!(
            criterion_value(&y, 2, 1e-9, Criterion::Joint),
            Err(Error::DegenerateFrequency { .. })
        ));
        assert!(matches!(compute_moments(&y, 1, 3.2), Err(Error::Domain(_))));
    }

    #[test]
    fn model1_g_at_truth() {
        let n = 2000;
        let y = synthesize(&HarmonicModel::model1(), n, None, 0)
            .unwrap()
            .into_samples();
        let value = g(&y, 4, 0.25).unwrap();
        let want = n as f64 / 2.0 * 78.3125;
        assert!((value - want).abs() / want < 0.01);
        let scaled: Vec<f64> = y.iter().map(|v| 3.0 * v).collect();
        assert_relative_eq!(
            g(&scaled, 4, 0.25).unwrap(),
            9.0 * value,
            max_relative = 1e-13
        );
        // noiseless data lies in the joint column space
        let energy: f64 = y.iter().map(|v| v * v).sum();
        let joint = criterion_value(&y, 4, 0.25, Criterion::Joint).unwrap();
        assert_relative_eq!(joint, energy, max_relative = 1e-11);
    }

    #[test]
    fn finite_difference_check() {
        let y = noisy_model1(500, 0.25, 1);
        let lam = 0.24;
        let h = 1e-6;
        for kind in [Criterion::Separable, Criterion::Joint] {
            let pt = evaluate(&y, 4, lam, kind).unwrap();
            let v = |l: f64| criterion_value(&y, 4, l, kind).unwrap();
            let fd1 = (v(lam + h) - v(lam - h)) / (2.0 * h);
            assert_relative_eq!(pt.g_prime, fd1, max_relative = 1e-4);
            let d1 = |l: f64| evaluate(&y, 4, l, kind).unwrap().g_prime;
            let fd2 = (d1(lam + h) - d1(lam - h)) / (2.0 * h);
            assert_relative_eq!(pt.g_double_prime, fd2, max_relative = 1e-3);
        }
    }

    #[test]
    fn stationary_at_truth_and_curvature_limit() {
        let n = 1000;
        let y = synthesize(&HarmonicModel::model1(), n, None, 0)
            .unwrap()
            .into_samples();
        let limit = -377.5625 / 24.0;
        let joint = evaluate(&y, 4, 0.25, Criterion::Joint).unwrap();
        assert!((joint.g_prime / joint.g_double_prime).abs() < 1e-6);
        for kind in [Criterion::Separable, Criterion::Joint] {
            let pt = evaluate(&y, 4, 0.25, kind).unwrap();
            let scaled = pt.g_double_prime / (2.0 * (n as f64).powi(3));
            assert!(
                (scaled - limit).abs() / limit.abs() < 0.05,
                "{kind:?} {scaled}"
            );
        }
    }

    #[test]
    fn separable_peak_is_offset_without_noise() {
        // cross-harmonic leakage moves the separable maximum by O(n⁻²)
        let y = synthesize(&HarmonicModel::model1(), 1000, None, 0)
            .unwrap()
            .into_samples();
        let (g1, g2) = g_derivatives(&y, 4, 0.25).unwrap();
        let offset = -g1 / g2;
        assert!(offset > 5e-6 && offset < 5e-5, "{offset}");
    }
}
