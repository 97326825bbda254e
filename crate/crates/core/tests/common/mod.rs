//! Helpers shared by the integration and acceptance tests.
#![allow(dead_code)]

use agejam::nn::NetworkModel;
use agejam::synth::{generate_pooled_dataset, Label};

#[derive(Debug, Clone, Copy)]
pub struct GradCheck {
    pub checked: usize,
    pub failures: usize,
    /// Parameters where a ReLU changed state within the difference step.
    pub skipped: usize,
    pub max_rel: f64,
}

/// `|a - n| / max(|a|, |n|, floor)`; the floor keeps round-off in near-zero
/// gradients from counting as relative error.
pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

/// Compares backprop gradients with central differences on every parameter.
pub fn gradient_check(model: &NetworkModel, n_examples: usize, dropout_seed: Option<u64>, tol: f64) -> GradCheck {
    let data = generate_pooled_dataset(n_examples.div_ceil(2), model.packet_len, &[0.0], 5).unwrap();
    let inputs: Vec<Vec<f64>> = data.packets.iter().map(|p| p.features()).take(n_examples).collect();
    let classes: Vec<usize> = data.packets.iter().map(|p| p.label.index()).take(n_examples).collect();
    assert!(classes.contains(&Label::Signal.index()));

    let (_, grads) = model.loss_and_gradients(&inputs, &classes, dropout_seed);
    let mut m = model.clone();
    let mut out = GradCheck { checked: 0, failures: 0, skipped: 0, max_rel: 0.0 };
    let central = |m: &mut NetworkModel, l: usize, i: usize, h: f64| {
        let orig = m.layers[l].params()[i];
        m.layers[l].params_mut()[i] = orig + h;
        let up = m.loss(&inputs, &classes, dropout_seed);
        m.layers[l].params_mut()[i] = orig - h;
        let down = m.loss(&inputs, &classes, dropout_seed);
        m.layers[l].params_mut()[i] = orig;
        (up - down) / (2.0 * h)
    };
    for l in 0..m.layers.len() {
        for i in 0..m.layers[l].params().len() {
            let a = grads[l][i];
            let n = central(&mut m, l, i, 1e-5);
            let r = rel_err(a, n);
            if r > tol {
                // A kink inside the step makes the two step sizes disagree.
                let n_small = central(&mut m, l, i, 1e-7);
                if rel_err(n, n_small) > tol && rel_err(a, n_small) <= 1e-2 {
                    out.skipped += 1;
                    continue;
                }
                out.failures += 1;
            }
            out.checked += 1;
            out.max_rel = out.max_rel.max(r);
        }
    }
    out
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Pearson chi-square of observed counts against expected probabilities,
/// pooling adjacent cells until each expects at least `min_expected`.
/// Returns (statistic, degrees of freedom).
pub fn chi_square(observed: &[u64], probs: &[f64], min_expected: f64) -> (f64, usize) {
    let total: u64 = observed.iter().sum();
    let n = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (obs, p) in observed.iter().zip(probs) {
        o += *obs as f64;
        e += p * n;
        if e >= min_expected {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    // Remainder (tail) joins the last cell.
    if let Some(last) = cells.last_mut() {
        last.0 += o;
        last.1 += e;
    }
    let stat = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    (stat, cells.len().saturating_sub(1))
}
