use crate::matrix::IntMat;
use crate::transform::TransformSet;
use crate::TransformKind;

/// Worst-case extra bits needed to compute the 2-D transform T · s · Tᵀ
/// bit-true when every element of s is a signed n-bit integer.
///
/// `t_int` is the integer-scaled transform (dyadic/common denominators
/// factored out, see [`TransformSet::integer_scaled`]). For each output tap
/// (i, j) the coefficient row of the Kronecker square is outer(rowᵢ, rowⱼ);
/// the achievable output range follows from splitting each row into its
/// positive and negative parts, and the result is the two's-complement width
/// of the worst range over all taps, minus n.
///
/// This is an exact range analysis: it coincides with exhaustive search over
/// all input tiles (the extrema of a linear map over a box sit at vertices).
pub fn bit_growth(t_int: &IntMat, n: u32) -> u32 {
    let split: Vec<(i64, i64)> = (0..t_int.rows())
        .map(|i| {
            let row = t_int.row(i);
            let pos: i64 = row.iter().filter(|&&c| c > 0).sum();
            let neg: i64 = -row.iter().filter(|&&c| c < 0).sum::<i64>();
            (pos, neg)
        })
        .collect();

    let hi_in: i128 = (1i128 << (n - 1)) - 1;
    let lo_in: i128 = 1i128 << (n - 1); // magnitude of the most negative input

    let mut worst = n;
    for &(pi, ni) in &split {
        for &(pj, nj) in &split {
            // outer(rowᵢ, rowⱼ) splits into P = pᵢpⱼ + nᵢnⱼ, N = pᵢnⱼ + nᵢpⱼ
            let p = pi as i128 * pj as i128 + ni as i128 * nj as i128;
            let nn = pi as i128 * nj as i128 + ni as i128 * pj as i128;
            let max = p * hi_in + nn * lo_in;
            let min = -(p * lo_in + nn * hi_in);
            worst = worst.max(twos_complement_bits(min, max));
        }
    }
    worst - n
}

fn twos_complement_bits(min: i128, max: i128) -> u32 {
    let mut p = 1u32;
    while -(1i128 << (p - 1)) > min || max > (1i128 << (p - 1)) - 1 {
        p += 1;
    }
    p
}

/// Fixed-point budget of a bit-true Winograd pipeline on n-bit inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitBudget {
    pub base_bits: u32,
    pub input_xform_extra: u32,
    pub weight_xform_extra: u32,
    /// Width of one tapwise product of the two transformed operands.
    pub product_bits: u32,
    /// Extra bits for accumulating the products over input channels.
    pub accum_extra: u32,
    pub output_xform_extra: u32,
}

impl BitBudget {
    pub fn for_transform_set(ts: &TransformSet, n: u32, c_in: usize) -> Self {
        let (bt, _) = ts.integer_scaled(TransformKind::Input);
        let (g, _) = ts.integer_scaled(TransformKind::Weight);
        let (at, _) = ts.integer_scaled(TransformKind::Output);
        let input_xform_extra = bit_growth(bt, n);
        let weight_xform_extra = bit_growth(g, n);
        let output_xform_extra = bit_growth(at, n);
        let product_bits = (n + input_xform_extra) + (n + weight_xform_extra);
        let accum_extra = (c_in.max(1) as f64).log2().ceil() as u32;
        BitBudget {
            base_bits: n,
            input_xform_extra,
            weight_xform_extra,
            product_bits,
            accum_extra,
            output_xform_extra,
        }
    }

    /// Whether the bit-true accumulator fits a 32-bit register.
    pub fn fits_i32(&self) -> bool {
        self.product_bits + self.accum_extra <= 32
    }
}

/// Accumulator width of the quantized pipeline: tapwise products of two
/// b-bit integers summed over c_in channels.
pub fn quantized_accumulator_bits(b: u32, c_in: usize) -> u32 {
    2 * b + (c_in.max(1) as f64).log2().ceil() as u32
}
