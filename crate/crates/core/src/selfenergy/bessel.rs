//! Integer-order Bessel functions of the first kind.

/// Values above this are rescaled during the downward recurrence.
const RESCALE_ABOVE: f64 = 1e250;

/// `J_n(x)` for integer `n` and finite `x >= 0`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let value = bessel_j_sequence(order, x)[order];
    if n < 0 && order % 2 == 1 {
        -value
    } else {
        value
    }
}

/// `J_0(x), ..., J_max(x)` by Miller's downward recurrence, normalized with
/// `J_0 + 2 sum_k J_2k = 1`.
pub fn bessel_j_sequence(max_order: usize, x: f64) -> Vec<f64> {
    assert!(x.is_finite() && x >= 0.0, "bessel argument must be finite and non-negative");
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let reach = (max_order as f64).max(x);
    let mut start = (reach + 30.0 + (50.0 * reach).sqrt()).ceil() as usize;
    start += start % 2;

    let two_over_x = 2.0 / x;
    let mut above = 0.0; // J_{k+1}
    let mut current = 1e-30; // J_k, arbitrary scale
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let below = f64::from(k as u32) * two_over_x * current - above;
        above = current;
        current = below;
        // `current` now holds J_{k-1}, `above` holds J_k.
        let order = k - 1;
        if order <= max_order {
            out[order] = current;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            above *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    norm += current;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Cached `J_m(chi)` for `|m| <= max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselTable {
    chi: f64,
    values: Vec<f64>,
}

impl BesselTable {
    pub fn new(chi: f64, max_order: usize) -> Self {
        BesselTable { chi, values: bessel_j_sequence(max_order, chi) }
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    /// `J_m(chi)`; orders beyond the table are treated as zero.
    pub fn get(&self, m: i32) -> f64 {
        let order = m.unsigned_abs() as usize;
        match self.values.get(order) {
            Some(&v) if m < 0 && order % 2 == 1 => -v,
            Some(&v) => v,
            None => 0.0,
        }
    }

    pub fn squared(&self, m: i32) -> f64 {
        let v = self.get(m);
        v * v
    }

    /// `sum_{|m| <= cutoff} J_m^2`.
    pub fn closure(&self, cutoff: usize) -> f64 {
        let c = cutoff.min(self.max_order());
        self.values[0] * self.values[0] + 2.0 * self.values[1..=c].iter().map(|v| v * v).sum::<f64>()
    }

    /// `sum_{|m| > cutoff} J_m^2`, summed from the table tail.
    pub fn tail_weight(&self, cutoff: usize) -> f64 {
        if cutoff >= self.max_order() {
            return 0.0;
        }
        2.0 * self.values[cutoff + 1..].iter().rev().map(|v| v * v).sum::<f64>()
    }
}

/// Smallest `K` with `sum_{|m| > K} J_m(chi)^2 < tail`.
pub fn closure_cutoff(chi: f64, tail: f64) -> usize {
    let table = BesselTable::new(chi, (chi.ceil() as usize) * 2 + 60);
    (0..=table.max_order()).find(|&k| table.tail_weight(k) < tail).unwrap_or(table.max_order())
}
