//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (degrees 3, 5, 7, 9, 13 selected from the 1-norm).

use nalgebra::DMatrix;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::C64;

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
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
const B13: [f64; 14] = [
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

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled_identity(n: usize, b: f64) -> DMatrix<C64> {
    DMatrix::from_diagonal_element(n, n, C64::new(b, 0.0))
}

/// `(U, V)` for the low-degree approximants.
fn pade_low(a: &DMatrix<C64>, b: &[f64]) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut u = scaled_identity(n, b[1]);
    let mut v = scaled_identity(n, b[0]);
    let mut power = DMatrix::<C64>::identity(n, n);
    for k in (2..b.len()).step_by(2) {
        power = &power * &a2;
        v += &power * C64::new(b[k], 0.0);
        if k + 1 < b.len() {
            u += &power * C64::new(b[k + 1], 0.0);
        }
    }
    (a * u, v)
}

fn pade13(a: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = a.nrows();
    let c = |x: f64| C64::new(x, 0.0);
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]);
    let u_tail = &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + scaled_identity(n, b[1]);
    let u = a * (&a6 * u_inner + u_tail);
    let v_inner = &a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]);
    let v =
        &a6 * v_inner + &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + scaled_identity(n, b[0]);
    (u, v)
}

fn all_finite(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `e^A` for square `A`.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_square("expm")?;
    let n = a.rows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let a = a.as_dmatrix();
    let norm = one_norm(a);

    let mut squarings = 0u32;
    let (u, v) = if let Some(&(m, _)) = THETA.iter().find(|(_, theta)| norm <= *theta) {
        match m {
            3 => pade_low(a, &B3),
            5 => pade_low(a, &B5),
            7 => pade_low(a, &B7),
            _ => pade_low(a, &B9),
        }
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0);
        if s > 1023.0 {
            return Err(Error::NumericRange(format!(
                "1-norm {norm:e} too large to scale"
            )));
        }
        squarings = s as u32;
        let scaled = a * C64::new(0.5f64.powi(squarings as i32), 0.0);
        pade13(&scaled)
    };

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::NumericRange("Padé denominator is singular".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
        if !all_finite(&r) {
            return Err(Error::NumericRange(format!(
                "overflow while squaring (1-norm of input {norm:e})"
            )));
        }
    }
    if !all_finite(&r) {
        return Err(Error::NumericRange("non-finite result".into()));
    }
    Ok(ComplexMatrix::from_dmatrix_unchecked(r))
}

/// `e^{-iHt}`
pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    expm(&h.scale(C64::new(0.0, -t)))
}
