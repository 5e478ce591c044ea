use num_traits::{One, Zero};

use crate::matrix::{IntMat, Mat, Rat};
use crate::{Result, TransformKind, WinogradError};

/// Constant transformation matrices of an F(m×m, 3×3) Winograd algorithm.
///
/// `bt` (t×t) maps input tiles, `g` (t×3) maps weights, `at` (m×t) maps the
/// tapwise products back to the spatial domain:
///
///   Y = AT · [ (G f Gᵀ) ⊙ (BT x B) ] · A,  B = BTᵀ, A = ATᵀ
///
/// Entries are exact rationals. F2 entries are all dyadic; the exact F4 set
/// necessarily carries a factor 3 in the G denominators (any five distinct
/// rational points have a pairwise difference with an odd factor), so the
/// integer-scaled accessors expose the shift-and-add-friendly form where the
/// common denominator is factored out.
#[derive(Debug, Clone)]
pub struct TransformSet {
    m: usize,
    r: usize,
    bt: Mat<Rat>,
    g: Mat<Rat>,
    at: Mat<Rat>,
    bt_f64: Mat<f64>,
    g_f64: Mat<f64>,
    at_f64: Mat<f64>,
    bt_int: (IntMat, i64),
    g_int: (IntMat, i64),
    at_int: (IntMat, i64),
}

impl TransformSet {
    /// Assemble a set from explicit matrices. No exactness check is applied;
    /// callers gate with [`validate_transform_set`].
    pub fn from_parts(m: usize, r: usize, bt: Mat<Rat>, g: Mat<Rat>, at: Mat<Rat>) -> Self {
        Self::assemble(m, r, bt, g, at)
    }

    fn assemble(m: usize, r: usize, bt: Mat<Rat>, g: Mat<Rat>, at: Mat<Rat>) -> Self {
        let t = m + r - 1;
        assert_eq!((bt.rows(), bt.cols()), (t, t));
        assert_eq!((g.rows(), g.cols()), (t, r));
        assert_eq!((at.rows(), at.cols()), (m, t));
        let bt_f64 = bt.to_f64();
        let g_f64 = g.to_f64();
        let at_f64 = at.to_f64();
        let bt_int = bt.integer_scaled();
        let g_int = g.integer_scaled();
        let at_int = at.integer_scaled();
        TransformSet {
            m,
            r,
            bt,
            g,
            at,
            bt_f64,
            g_f64,
            at_f64,
            bt_int,
            g_int,
            at_int,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Tile side in the Winograd domain, t = m + r − 1.
    pub fn t(&self) -> usize {
        self.m + self.r - 1
    }

    pub fn bt(&self) -> &Mat<Rat> {
        &self.bt
    }

    pub fn g(&self) -> &Mat<Rat> {
        &self.g
    }

    pub fn at(&self) -> &Mat<Rat> {
        &self.at
    }

    pub fn bt_f64(&self) -> &Mat<f64> {
        &self.bt_f64
    }

    pub fn g_f64(&self) -> &Mat<f64> {
        &self.g_f64
    }

    pub fn at_f64(&self) -> &Mat<f64> {
        &self.at_f64
    }

    /// Integer-scaled matrix and its denominator: mat == int / den.
    pub fn integer_scaled(&self, kind: TransformKind) -> (&IntMat, i64) {
        let (m, d) = match kind {
            TransformKind::Input => &self.bt_int,
            TransformKind::Weight => &self.g_int,
            TransformKind::Output => &self.at_int,
        };
        (m, *d)
    }
}

fn rat_rows(rows: &[&[i64]]) -> Mat<Rat> {
    Mat::from_rows(
        &rows
            .iter()
            .map(|r| r.iter().map(|&v| Rat::from_integer(v)).collect())
            .collect::<Vec<_>>(),
    )
}

fn f2_set() -> TransformSet {
    let bt = rat_rows(&[
        &[1, 0, -1, 0],
        &[0, 1, 1, 0],
        &[0, -1, 1, 0],
        &[0, 1, 0, -1],
    ]);
    let half = Rat::new(1, 2);
    let g = Mat::from_rows(&[
        vec![Rat::one(), Rat::zero(), Rat::zero()],
        vec![half, half, half],
        vec![half, -half, half],
        vec![Rat::zero(), Rat::zero(), Rat::one()],
    ]);
    let at = rat_rows(&[&[1, 1, 1, 0], &[0, 1, -1, -1]]);
    TransformSet::assemble(2, 3, bt, g, at)
}

fn f4_printed_candidate() -> TransformSet {
    let bt = rat_rows(&[
        &[4, 0, -5, 0, 1, 0],
        &[0, -4, -4, 1, 1, 0],
        &[0, 4, -4, -1, 1, 0],
        &[0, -2, -1, 2, 1, 0],
        &[0, 2, -1, -2, 1, 0],
        &[0, 4, 0, -5, 0, 1],
    ]);
    let g = Mat::from_rows(&[
        vec![Rat::new(1, 4), Rat::zero(), Rat::zero()],
        vec![Rat::new(-1, 6), Rat::new(-1, 6), Rat::new(-1, 6)],
        vec![Rat::new(-1, 6), Rat::new(1, 6), Rat::new(-1, 6)],
        vec![Rat::new(1, 24), Rat::new(1, 12), Rat::new(1, 6)],
        vec![Rat::new(1, 24), Rat::new(-1, 12), Rat::new(1, 6)],
        vec![Rat::zero(), Rat::zero(), Rat::one()],
    ]);
    let at = rat_rows(&[
        &[1, 1, 1, 1, 1, 0],
        &[0, 1, -1, 2, -2, 0],
        &[0, 1, 1, 4, 4, 0],
        &[0, 1, -1, 8, -8, 1],
    ]);
    TransformSet::assemble(4, 3, bt, g, at)
}

/// Build the transform set for F(m×m, 3×3), m ∈ {2, 4}.
///
/// F2 is the published set verbatim. For F4 the published matrices are taken
/// as a candidate and gated by [`validate_transform_set`]; if they ever fail
/// (a transcription hazard), the set is regenerated from the root points
/// {0, 1, −1, ½, −½} plus the point at infinity.
pub fn make_transform_set(m: usize) -> Result<TransformSet> {
    match m {
        2 => Ok(f2_set()),
        4 => {
            let candidate = f4_printed_candidate();
            if validate_transform_set(&candidate) {
                Ok(candidate)
            } else {
                let points = [
                    Rat::zero(),
                    Rat::one(),
                    -Rat::one(),
                    Rat::new(1, 2),
                    Rat::new(-1, 2),
                ];
                let regenerated = toom_cook_transform(4, 3, &points)?;
                debug_assert!(validate_transform_set(&regenerated));
                Ok(regenerated)
            }
        }
        other => Err(WinogradError::UnsupportedParameter(format!(
            "tile size m must be 2 or 4, got {other}"
        ))),
    }
}

/// Toom-Cook construction of an F(m×m, r×r) transform set from m + r − 2
/// distinct finite root points plus the implicit point at infinity.
///
/// BT rows are the coefficients of M(s)/(s − aᵢ) where M is the nodal
/// polynomial (the M(s) coefficients themselves for the infinity tap), scaled
/// to primitive integers with positive leading sign; G rows compensate with
/// 1/(N'(aᵢ) · scale); AT is the evaluation matrix aᵢᵏ with the infinity
/// column selecting the top coefficient.
pub fn toom_cook_transform(m: usize, r: usize, points: &[Rat]) -> Result<TransformSet> {
    let t = m + r - 1;
    if points.len() != t - 1 {
        return Err(WinogradError::UnsupportedParameter(format!(
            "need {} finite points for F({m},{r}), got {}",
            t - 1,
            points.len()
        )));
    }
    for (i, a) in points.iter().enumerate() {
        for b in &points[..i] {
            if a == b {
                return Err(WinogradError::UnsupportedParameter(
                    "root points must be distinct".into(),
                ));
            }
        }
    }

    // nodal polynomial M(s) = Π (s − aᵢ), ascending coefficients
    let mut nodal = vec![Rat::one()];
    for a in points {
        nodal = poly_mul(&nodal, &[-*a, Rat::one()]);
    }

    let mut bt_rows: Vec<Vec<Rat>> = Vec::with_capacity(t);
    let mut scales: Vec<Rat> = Vec::with_capacity(t);
    for a in points {
        let mut q = poly_div_linear(&nodal, *a);
        q.resize(t, Rat::zero());
        let s = primitive_scale(&q);
        bt_rows.push(q.iter().map(|&c| c * s).collect());
        scales.push(s);
    }
    // infinity tap: the nodal polynomial itself
    {
        let mut q = nodal.clone();
        q.resize(t, Rat::zero());
        let s = primitive_scale(&q);
        bt_rows.push(q.iter().map(|&c| c * s).collect());
        scales.push(s);
    }

    let mut g_rows: Vec<Vec<Rat>> = Vec::with_capacity(t);
    for (i, a) in points.iter().enumerate() {
        let mut nprime = Rat::one();
        for (j, b) in points.iter().enumerate() {
            if i != j {
                nprime *= *a - *b;
            }
        }
        let denom = nprime * scales[i];
        let mut row = Vec::with_capacity(r);
        let mut p = Rat::one();
        for _ in 0..r {
            row.push(p / denom);
            p *= *a;
        }
        g_rows.push(row);
    }
    {
        let mut row = vec![Rat::zero(); r];
        row[r - 1] = Rat::one() / scales[t - 1];
        g_rows.push(row);
    }

    let mut at_rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for k in 0..m {
        let mut row = Vec::with_capacity(t);
        for a in points {
            row.push(pow_rat(*a, k));
        }
        row.push(if k == m - 1 { Rat::one() } else { Rat::zero() });
        at_rows.push(row);
    }

    Ok(TransformSet::assemble(
        m,
        r,
        Mat::from_rows(&bt_rows),
        Mat::from_rows(&g_rows),
        Mat::from_rows(&at_rows),
    ))
}

fn pow_rat(a: Rat, k: usize) -> Rat {
    let mut p = Rat::one();
    for _ in 0..k {
        p *= a;
    }
    p
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact synthetic division of p by (s − a); the remainder is zero by
/// construction when a is a root of p.
fn poly_div_linear(p: &[Rat], a: Rat) -> Vec<Rat> {
    let n = p.len();
    let mut q = vec![Rat::zero(); n - 1];
    let mut carry = Rat::zero();
    for k in (0..n - 1).rev() {
        q[k] = p[k + 1] + carry;
        carry = q[k] * a;
    }
    debug_assert!((p[0] + carry).is_zero(), "nonzero remainder");
    q
}

/// Scale turning a rational row into primitive integers with the first
/// nonzero entry positive.
fn primitive_scale(row: &[Rat]) -> Rat {
    let mut den: i64 = 1;
    for c in row {
        den = num_integer::lcm(den, *c.denom());
    }
    let mut gcd: i64 = 0;
    for c in row {
        gcd = num_integer::gcd(gcd, c.numer() * (den / c.denom()));
    }
    if gcd == 0 {
        return Rat::one();
    }
    let mut s = Rat::new(den, gcd);
    if let Some(first) = row.iter().find(|c| !c.is_zero()) {
        if (*first * s) < Rat::zero() {
            s = -s;
        }
    }
    s
}

/// True iff the set computes exact valid convolution on every basis pair
/// (x = e_ij, f = e_kl); linearity makes basis coverage sufficient.
pub fn validate_transform_set(ts: &TransformSet) -> bool {
    let t = ts.t();
    let r = ts.r();
    for xi in 0..t {
        for xj in 0..t {
            for fk in 0..r {
                for fl in 0..r {
                    let mut x = Mat::<Rat>::zeros(t, t);
                    x[(xi, xj)] = Rat::one();
                    let mut f = Mat::<Rat>::zeros(r, r);
                    f[(fk, fl)] = Rat::one();
                    let wino = winograd_tile_rat(ts, &x, &f);
                    let direct = direct_valid_rat(&x, &f, ts.m());
                    if wino != direct {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Full tile pipeline in exact rationals: AT [(G f Gᵀ) ⊙ (BT x B)] A.
pub fn winograd_tile_rat(ts: &TransformSet, x: &Mat<Rat>, f: &Mat<Rat>) -> Mat<Rat> {
    let xw = ts.bt.sandwich(x);
    let fw = ts.g.matmul(f).matmul(&ts.g.transpose());
    let t = ts.t();
    let mut prod = Mat::<Rat>::zeros(t, t);
    for i in 0..t {
        for j in 0..t {
            prod[(i, j)] = xw[(i, j)] * fw[(i, j)];
        }
    }
    ts.at.matmul(&prod).matmul(&ts.at.transpose())
}

fn direct_valid_rat(x: &Mat<Rat>, f: &Mat<Rat>, m: usize) -> Mat<Rat> {
    let r = f.rows();
    let mut out = Mat::<Rat>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut acc = Rat::zero();
            for u in 0..r {
                for v in 0..r {
                    acc += f[(u, v)] * x[(i + u, j + v)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Input transform BT · x · B on an f64 tile.
pub fn input_transform_f64(ts: &TransformSet, tile: &Mat<f64>) -> Result<Mat<f64>> {
    check_dims(tile, ts.t(), ts.t(), "input tile")?;
    Ok(ts.bt_f64.sandwich(tile))
}

/// Weight transform G · f · Gᵀ on an f64 kernel.
pub fn weight_transform_f64(ts: &TransformSet, f: &Mat<f64>) -> Result<Mat<f64>> {
    check_dims(f, ts.r(), ts.r(), "weight tile")?;
    Ok(ts.g_f64.matmul(f).matmul(&ts.g_f64.transpose()))
}

/// Output transform AT · yw · A on an f64 Winograd-domain tile.
pub fn output_transform_f64(ts: &TransformSet, yw: &Mat<f64>) -> Result<Mat<f64>> {
    check_dims(yw, ts.t(), ts.t(), "winograd tile")?;
    Ok(ts.at_f64.matmul(yw).matmul(&ts.at_f64.transpose()))
}

/// Exact-rational variants of the three tile transforms.
pub fn input_transform_rat(ts: &TransformSet, tile: &Mat<Rat>) -> Result<Mat<Rat>> {
    check_dims(tile, ts.t(), ts.t(), "input tile")?;
    Ok(ts.bt.sandwich(tile))
}

pub fn weight_transform_rat(ts: &TransformSet, f: &Mat<Rat>) -> Result<Mat<Rat>> {
    check_dims(f, ts.r(), ts.r(), "weight tile")?;
    Ok(ts.g.matmul(f).matmul(&ts.g.transpose()))
}

pub fn output_transform_rat(ts: &TransformSet, yw: &Mat<Rat>) -> Result<Mat<Rat>> {
    check_dims(yw, ts.t(), ts.t(), "winograd tile")?;
    Ok(ts.at.matmul(yw).matmul(&ts.at.transpose()))
}

fn check_dims<T>(m: &Mat<T>, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.rows() != rows || m.cols() != cols {
        return Err(WinogradError::DimMismatch(format!(
            "{what} must be {rows}×{cols}, got {}×{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Multiplications per m×m output tile and channel pair:
/// (m+2)² in the Winograd domain vs 9·m² direct.
pub fn tile_macs(m: usize) -> (u64, u64) {
    let t = (m + 2) as u64;
    (t * t, 9 * (m as u64) * (m as u64))
}

/// Direct-to-Winograd MAC ratio: 2.25 for F2, 4.0 for F4.
pub fn mac_reduction(m: usize) -> f64 {
    let (wino, direct) = tile_macs(m);
    direct as f64 / wino as f64
}
