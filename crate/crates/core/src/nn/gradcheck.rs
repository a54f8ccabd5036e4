//! Central-difference gradient verification.

use rand::Rng;

use super::{Network, NnError};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Largest `|a − n| / (|a| + |n| + 1e-12)` over checked coordinates.
    pub max_rel_error: f64,
    /// Parameter name and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
    pub checked: usize,
}

/// Compares analytic gradients of one example's loss against central
/// differences `(L(w+ε) − L(w−ε)) / 2ε`.
///
/// For each trainable parameter at most `per_param` coordinates are
/// checked: half with the largest analytic magnitude, the rest drawn at
/// random from `seed`. With `dropout_seed` set, every loss evaluation uses
/// the same dropout mask.
pub fn finite_difference_check<N: Network + ?Sized>(
    net: &mut N,
    input: &[usize],
    label: usize,
    dropout_seed: Option<u64>,
    eps: f64,
    per_param: usize,
    seed: u64,
) -> Result<GradCheckReport, NnError> {
    let mask = || dropout_seed.map(|s| rng::stream(s, Domain::Dropout, 0, 0));
    let mut grads = net.zero_grads();
    net.accumulate_gradients(input, label, mask(), &mut grads)?;

    let mut picker = rng::stream(seed, Domain::GradCheck, 0, 0);
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
    };
    for (p, grad) in grads.iter().enumerate() {
        if net.params()[p].frozen {
            continue;
        }
        let analytic = grad.data();
        let n = analytic.len();
        let coords: Vec<usize> = if n <= per_param {
            (0..n).collect()
        } else {
            let mut by_mag: Vec<usize> = (0..n).collect();
            by_mag.sort_by(|&a, &b| analytic[b].abs().total_cmp(&analytic[a].abs()).then(a.cmp(&b)));
            let mut picked: Vec<usize> = by_mag[..per_param / 2].to_vec();
            while picked.len() < per_param {
                let i = picker.gen_range(0..n);
                if !picked.contains(&i) {
                    picked.push(i);
                }
            }
            picked
        };
        for i in coords {
            let orig = net.params()[p].value.data()[i];
            net.params_mut()[p].value.data_mut()[i] = orig + eps;
            let plus = net.loss(input, label, mask());
            net.params_mut()[p].value.data_mut()[i] = orig - eps;
            let minus = net.loss(input, label, mask());
            net.params_mut()[p].value.data_mut()[i] = orig;
            let numeric = (plus? - minus?) / (2.0 * eps);
            let a = grad.data()[i];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs() + 1e-12);
            report.checked += 1;
            if rel > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = report.max_rel_error.max(rel);
                report.worst = Some((net.params()[p].name.clone(), i));
            }
        }
    }
    Ok(report)
}
