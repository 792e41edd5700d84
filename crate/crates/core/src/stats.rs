//! Order-independent reductions and small statistical helpers shared by the
//! diagnostics modules.

/// Number of standard errors used for every CLT half-width in the crate.
pub const CLT_Z: f64 = 3.0;

const PAIRWISE_BLOCK: usize = 64;

/// Pairwise (cascade) summation. The split points depend only on the length,
/// so the result is independent of how the input was produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f` applied to each element, without allocating.
pub fn pairwise_sum_by<T>(xs: &[T], f: &impl Fn(&T) -> f64) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().map(f).sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_by(&xs[..mid], f) + pairwise_sum_by(&xs[mid..], f)
}

/// Sample mean together with a CLT half-width (`CLT_Z` standard errors).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub half_width: f64,
}

impl MeanEstimate {
    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }
}

/// Mean and CLT half-width of `f(x_i)` over the slice. Uses the unbiased
/// variance; a single observation gets half-width 0.
pub fn mean_estimate_by<T>(xs: &[T], f: impl Fn(&T) -> f64) -> MeanEstimate {
    let m = xs.len();
    if m == 0 {
        return MeanEstimate {
            mean: f64::NAN,
            half_width: f64::NAN,
        };
    }
    let mean = pairwise_sum_by(xs, &f) / m as f64;
    if m == 1 {
        return MeanEstimate {
            mean,
            half_width: 0.0,
        };
    }
    let ss = pairwise_sum_by(xs, &|x| {
        let d = f(x) - mean;
        d * d
    });
    let var = ss / (m - 1) as f64;
    MeanEstimate {
        mean,
        half_width: CLT_Z * (var / m as f64).sqrt(),
    }
}

pub fn mean_estimate(xs: &[f64]) -> MeanEstimate {
    mean_estimate_by(xs, |&x| x)
}

/// Sorts a copy of the input in ascending order. NaNs sort last.
pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_t |F_a(t) - F_b(t)|`.
///
/// Ties are handled by advancing both empirical CDFs past every copy of the
/// current value before comparing.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let a = sorted(a);
    let b = sorted(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at significance `alpha`:
/// `sqrt(-ln(alpha / 2) / 2) * sqrt((n + m) / (n m))`.
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

/// `true` when the slice is strictly increasing.
pub fn strictly_increasing<T: PartialOrd>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}
