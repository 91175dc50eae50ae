//! Compensated summation and trial statistics.

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = Neumaier::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Sample mean and standard error of the mean, in input order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

pub fn mean_se(xs: &[f64]) -> MeanSe {
    let count = xs.len();
    if count == 0 {
        return MeanSe {
            mean: f64::NAN,
            stderr: f64::NAN,
            count,
        };
    }
    let mean = compensated_sum(xs.iter().copied()) / count as f64;
    let stderr = if count > 1 {
        let ss = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
        (ss / (count - 1) as f64 / count as f64).sqrt()
    } else {
        0.0
    };
    MeanSe {
        mean,
        stderr,
        count,
    }
}
