//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13 (Higham, 2005).

use num_complex::Complex64;

use super::operator::DenseOperator;
use crate::error::{LabError, Result};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which each degree reaches double-precision backward error.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068;
const THETA13: f64 = 5.371920351148152;

/// e^{tA}. `t = 0` returns the identity exactly and diagonal inputs are
/// exponentiated entrywise.
pub fn matrix_exponential(a: &DenseOperator, t: Complex64) -> Result<DenseOperator> {
    if !a.is_finite() || !(t.re.is_finite() && t.im.is_finite()) {
        return Err(LabError::Numerical(
            "matrix exponential of non-finite input".into(),
        ));
    }
    let n = a.dim();
    if t == Complex64::new(0.0, 0.0) {
        return Ok(DenseOperator::identity(n));
    }
    let m = a.scale(t);
    if m.is_diagonal() {
        let diag: Vec<Complex64> = m.diagonal_entries().iter().map(|z| z.exp()).collect();
        return finite_or_err(DenseOperator::diagonal(&diag));
    }

    let norm = m.norm_one();
    let result = if norm <= THETA3 {
        pade_low(&m, &PADE3)?
    } else if norm <= THETA5 {
        pade_low(&m, &PADE5)?
    } else if norm <= THETA7 {
        pade_low(&m, &PADE7)?
    } else if norm <= THETA9 {
        pade_low(&m, &PADE9)?
    } else {
        let squarings = if norm > THETA13 {
            (norm / THETA13).log2().ceil() as i32
        } else {
            0
        };
        let scaled = m.scale(Complex64::new(2f64.powi(-squarings), 0.0));
        let mut r = pade13(&scaled)?;
        for _ in 0..squarings {
            r = &r * &r;
        }
        r
    };
    finite_or_err(result)
}

fn finite_or_err(op: DenseOperator) -> Result<DenseOperator> {
    if op.is_finite() {
        Ok(op)
    } else {
        Err(LabError::Numerical("matrix exponential overflowed".into()))
    }
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

// r(A) = (V − U)⁻¹(V + U) with U odd, V even part of the numerator.
fn pade_low(a: &DenseOperator, b: &[f64]) -> Result<DenseOperator> {
    let n = a.dim();
    let ident = DenseOperator::identity(n);
    let a2 = a * a;
    let mut power = ident.clone();
    let mut u_inner = DenseOperator::zeros(n);
    let mut v = DenseOperator::zeros(n);
    let degree = b.len() - 1;
    let mut k = 0;
    while k <= degree {
        v = &v + &power.scale(real(b[k]));
        if k + 1 <= degree {
            u_inner = &u_inner + &power.scale(real(b[k + 1]));
        }
        power = &power * &a2;
        k += 2;
    }
    let u = a * &u_inner;
    combine(&u, &v)
}

fn pade13(a: &DenseOperator) -> Result<DenseOperator> {
    let b = &PADE13;
    let ident = DenseOperator::identity(a.dim());
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |terms: &[(f64, &DenseOperator)]| {
        terms
            .iter()
            .fold(DenseOperator::zeros(a.dim()), |acc, (c, m)| {
                &acc + &m.scale(real(*c))
            })
    };
    let u_hi = lin(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)]);
    let u_lo = lin(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &ident)]);
    let u = a * &(&(&a6 * &u_hi) + &u_lo);
    let v_hi = lin(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)]);
    let v_lo = lin(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &ident)]);
    let v = &(&a6 * &v_hi) + &v_lo;
    combine(&u, &v)
}

fn combine(u: &DenseOperator, v: &DenseOperator) -> Result<DenseOperator> {
    let p = v + u;
    let q = v - u;
    q.solve(&p)
}
