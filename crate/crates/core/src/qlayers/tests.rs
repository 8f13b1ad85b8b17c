use super::*;
use crate::error::Error;
use crate::gradients::{finite_diff_grad, max_relative_error, DEFAULT_FD_STEP};
use crate::param::ParamBuilder;
use crate::vqc::LowQubitSpec;
use crate::vqc::LowQubitVqc;
use alloc::vec;
use alloc::vec::Vec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn randv(rng: &mut ChaCha8Rng, n: usize, b: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-b..b)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn classical_examples() {
    assert_eq!(softmax(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
    assert_eq!(
        maxpool1d(&[1.0, 3.0, 2.0, 5.0], 2).unwrap(),
        (vec![3.0, 5.0], vec![1, 3])
    );
    assert_eq!(sigmoid(0.0), 0.5);
    assert!(matches!(softmax(&[]), Err(Error::Shape(_))));
    assert!(matches!(global_avg(&[]), Err(Error::Shape(_))));
    assert!(matches!(maxpool1d(&[], 2), Err(Error::Shape(_))));
    assert_eq!(relu(&[-1.0, 2.0]), vec![0.0, 2.0]);
    assert_eq!(global_avg(&[1.0, 2.0, 6.0]).unwrap(), 3.0);
    assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
}

proptest! {
    #[test]
    fn softmax_is_shift_invariant(x in proptest::collection::vec(-50.0f64..50.0, 1..10), c in -100.0f64..100.0) {
        let a = softmax(&x).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let b = softmax(&shifted).unwrap();
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (p, q) in a.iter().zip(&b) {
            prop_assert!(*p >= 0.0);
            prop_assert!((p - q).abs() < 1e-12);
        }
    }
}

#[test]
fn linear_and_conv_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut b = ParamBuilder::new(1);
    let lin = Linear::new(&mut b, "lin", 5, 3).unwrap();
    let conv = Conv1d::new(&mut b, "conv", 2, 3, 3, 2).unwrap();
    let (_, params) = b.finish();

    let x = randv(&mut rng, 5, 1.0);
    let c = randv(&mut rng, 3, 1.0);
    let mut g = vec![0.0; params.len()];
    let dx = lin.backward(&params, &x, &c, &mut g).unwrap();
    let f = |p: &[f64]| Ok(dot(&lin.forward(p, &x)?, &c));
    assert!(max_relative_error(&g, &finite_diff_grad(f, &params, DEFAULT_FD_STEP).unwrap()) < 1e-6);
    let fx = |xp: &[f64]| Ok(dot(&lin.forward(&params, xp)?, &c));
    assert!(max_relative_error(&dx, &finite_diff_grad(fx, &x, DEFAULT_FD_STEP).unwrap()) < 1e-6);

    let x = randv(&mut rng, 2 * 9, 1.0);
    assert_eq!(conv.out_len(9).unwrap(), 4);
    let c = randv(&mut rng, 3 * 4, 1.0);
    let mut g = vec![0.0; params.len()];
    let dx = conv.backward(&params, &x, &c, &mut g).unwrap();
    let f = |p: &[f64]| Ok(dot(&conv.forward(p, &x)?, &c));
    assert!(max_relative_error(&g, &finite_diff_grad(f, &params, DEFAULT_FD_STEP).unwrap()) < 1e-6);
    let fx = |xp: &[f64]| Ok(dot(&conv.forward(&params, xp)?, &c));
    assert!(max_relative_error(&dx, &finite_diff_grad(fx, &x, DEFAULT_FD_STEP).unwrap()) < 1e-6);
}

fn qconv(spec: QConvSpec, seed: u64) -> (QConv1d, Vec<f64>) {
    let mut b = ParamBuilder::new(seed);
    let layer = QConv1d::new(&mut b, "qconv", spec).unwrap();
    (layer, b.finish().1)
}

#[test]
fn qconv_window_arithmetic() {
    let (layer, params) = qconv(QConvSpec::new(1, 3, 4, 2), 0);
    assert_eq!(layer.out_len(16).unwrap(), 7);
    let (y, _) = layer.forward(&params, &[0.25; 16]).unwrap();
    assert_eq!(y.len(), 3 * 7);
    for o in 0..3 {
        let row = &y[o * 7..(o + 1) * 7];
        assert!(row.iter().all(|v| *v == row[0]));
    }
    assert!(matches!(layer.forward(&params, &[0.0; 3]), Err(Error::Shape(_))));
    let mut b = ParamBuilder::new(0);
    assert!(matches!(
        QConv1d::new(&mut b, "p", QConvSpec::new(2, 4, 4, 1).variant(QConvVariant::Plain)),
        Err(Error::Config(_))
    ));
}

#[test]
fn qconv_columns_match_standalone_vqc() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spec = QConvSpec::new(2, 3, 4, 3).variant(QConvVariant::LowQubit(4));
    let mut b = ParamBuilder::new(9);
    let layer = QConv1d::new(&mut b, "qconv", spec).unwrap();
    let (_, params) = b.finish();
    let mut b = ParamBuilder::new(9);
    let vqc = LowQubitVqc::new(&mut b, "qconv", LowQubitSpec::new(8, 4, 3)).unwrap();
    assert_eq!(b.finish().1, params);

    let len = 19;
    let x = randv(&mut rng, 2 * len, 1.0);
    let (y, _) = layer.forward(&params, &x).unwrap();
    let l_out = layer.out_len(len).unwrap();
    for t in 0..l_out {
        let mut win = x[t * 3..t * 3 + 4].to_vec();
        win.extend_from_slice(&x[len + t * 3..len + t * 3 + 4]);
        let (col, _) = vqc.forward(&params, &win).unwrap();
        for o in 0..3 {
            assert!((y[o * l_out + t] - col[o]).abs() < 1e-12);
        }
    }
}

#[test]
fn qconv_translation_shifts_interior_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (layer, params) = qconv(QConvSpec::new(1, 2, 4, 2), 3);
    let x = randv(&mut rng, 22, 1.0);
    let (y0, _) = layer.forward(&params, &x[..20]).unwrap();
    let (y1, _) = layer.forward(&params, &x[2..22]).unwrap();
    let l = layer.out_len(20).unwrap();
    for o in 0..2 {
        for t in 0..l - 1 {
            assert_eq!(y1[o * l + t], y0[o * l + t + 1]);
        }
    }
}

#[test]
fn qconv_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (seed, spec) in [
        QConvSpec::new(1, 3, 4, 2).variant(QConvVariant::LowQubit(2)),
        QConvSpec::new(2, 2, 3, 1).variant(QConvVariant::LowQubit(4)),
        QConvSpec::new(1, 4, 4, 2).variant(QConvVariant::Plain),
    ]
    .into_iter()
    .enumerate()
    {
        let (layer, params) = qconv(spec, seed as u64);
        let len = 10;
        let x = randv(&mut rng, spec.in_channels * len, 1.0);
        let (y, tr) = layer.forward(&params, &x).unwrap();
        let c = randv(&mut rng, y.len(), 1.0);
        let mut g = vec![0.0; params.len()];
        let dx = layer.backward(&params, &tr, &c, &mut g, true).unwrap().unwrap();
        let f = |p: &[f64]| Ok(dot(&layer.forward(p, &x)?.0, &c));
        assert!(max_relative_error(&g, &finite_diff_grad(f, &params, DEFAULT_FD_STEP).unwrap()) < 1e-4);
        let fx = |xp: &[f64]| Ok(dot(&layer.forward(&params, xp)?.0, &c));
        assert!(max_relative_error(&dx, &finite_diff_grad(fx, &x, DEFAULT_FD_STEP).unwrap()) < 1e-4);
    }
}

fn gru(spec: QGruSpec, seed: u64) -> (QGruCell, Vec<f64>) {
    let mut b = ParamBuilder::new(seed);
    let cell = QGruCell::new(&mut b, "gru", spec).unwrap();
    (cell, b.finish().1)
}

#[test]
fn qgru_shapes_and_gate_ranges() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (cell, params) = gru(QGruSpec::new(8, 8, 4), 1);
    assert_eq!(cell.units().len(), 5);
    let x = randv(&mut rng, 8, 1.0);
    let h = randv(&mut rng, 8, 1.0);
    let (y, h1) = cell.step(&params, &x, &h).unwrap();
    assert_eq!((y.len(), h1.len()), (8, 8));
    let (_, _, tr) = cell.forward_sequence(&params, core::slice::from_ref(&x), &h).unwrap();
    for s in &tr.steps {
        assert!(s.r.iter().chain(&s.z).all(|v| *v > 0.0 && *v < 1.0));
    }
    assert!(matches!(cell.step(&params, &x[..7], &h), Err(Error::Usage(_))));
}

#[test]
fn qgru_stays_bounded_over_long_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (cell, params) = gru(QGruSpec::new(3, 4, 2), 2);
    let mut h = vec![0.0; 4];
    for _ in 0..100 {
        let x = randv(&mut rng, 3, 5.0);
        let (y, h1) = cell.step(&params, &x, &h).unwrap();
        assert!(y.iter().chain(&h1).all(|v| v.is_finite() && v.abs() < 1e3));
        h = h1;
    }
}

#[test]
fn qgru_bptt_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (seed, nq) in [2usize, 4].into_iter().enumerate() {
        let (cell, params) = gru(QGruSpec::new(2, 3, nq), seed as u64);
        let xs: Vec<Vec<f64>> = (0..3).map(|_| randv(&mut rng, 2, 1.0)).collect();
        let h0 = randv(&mut rng, 3, 0.5);
        let cy: Vec<Vec<f64>> = (0..3).map(|_| randv(&mut rng, 3, 1.0)).collect();
        let ch = randv(&mut rng, 3, 1.0);
        let loss = |p: &[f64], xs: &[Vec<f64>], h0: &[f64]| -> crate::Result<f64> {
            let (ys, h, _) = cell.forward_sequence(p, xs, h0)?;
            Ok(ys.iter().zip(&cy).map(|(y, c)| dot(y, c)).sum::<f64>() + dot(&h, &ch))
        };
        let (_, _, tr) = cell.forward_sequence(&params, &xs, &h0).unwrap();
        let mut g = vec![0.0; params.len()];
        let (dxs, dh0) = cell.backward_sequence(&params, &tr, &cy, &ch, &mut g).unwrap();
        let fd = finite_diff_grad(|p| loss(p, &xs, &h0), &params, DEFAULT_FD_STEP).unwrap();
        assert!(max_relative_error(&g, &fd) < 1e-4);
        let fd_h0 = finite_diff_grad(|h| loss(&params, &xs, h), &h0, DEFAULT_FD_STEP).unwrap();
        assert!(max_relative_error(&dh0, &fd_h0) < 1e-4);
        let fd_x1 = finite_diff_grad(
            |x| {
                let mut xs = xs.clone();
                xs[1] = x.to_vec();
                loss(&params, &xs, &h0)
            },
            &xs[1],
            DEFAULT_FD_STEP,
        )
        .unwrap();
        assert!(max_relative_error(&dxs[1], &fd_x1) < 1e-4);
    }
}

fn attention(spec: QAttentionSpec, seed: u64) -> (QAttention, Vec<f64>) {
    let mut b = ParamBuilder::new(seed);
    let layer = QAttention::new(&mut b, "attn", spec).unwrap();
    (layer, b.finish().1)
}

#[test]
fn single_head_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let spec = QAttentionSpec::new(3, 1, 2);
    let mut b = ParamBuilder::new(0);
    let head = QAttentionHead::new(&mut b, "h", 3, &spec).unwrap();
    let (_, params) = b.finish();

    let (_, tr) = head
        .forward(&params, &[0.1, 0.2, 0.3], &[1.0, 0.0, 0.0], &[0.5, 0.5, 0.5])
        .unwrap();
    assert_eq!(tr.weights, vec![1.0]);

    let q = randv(&mut rng, 4 * 3, 1.0);
    let k: Vec<f64> = [0.3, -0.2, 0.7].repeat(4);
    let v = randv(&mut rng, 4 * 3, 1.0);
    let (_, tr) = head.forward(&params, &q, &k, &v).unwrap();
    for i in 0..4 {
        for c in 0..3 {
            let mean = (0..4).map(|j| v[j * 3 + c]).sum::<f64>() / 4.0;
            assert!((tr.attended[i * 3 + c] - mean).abs() < 1e-12);
        }
    }

    let k = randv(&mut rng, 4 * 3, 3.0);
    let (_, tr) = head.forward(&params, &q, &k, &v).unwrap();
    for row in tr.weights.chunks(4) {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(row.iter().all(|a| *a >= 0.0));
    }
    assert!(matches!(head.forward(&params, &q, &k[..9], &v), Err(Error::Usage(_))));
}

#[test]
fn multihead_shapes_and_config() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (layer, params) = attention(QAttentionSpec::new(16, 4, 2), 1);
    let x = randv(&mut rng, 5 * 16, 1.0);
    let (y, tr) = layer.forward(&params, &x).unwrap();
    assert_eq!(y.len(), 5 * 16);
    assert_eq!(tr.heads.len(), 4);
    let mut b = ParamBuilder::new(0);
    assert!(matches!(
        QAttention::new(&mut b, "bad", QAttentionSpec::new(10, 4, 2)),
        Err(Error::Config(_))
    ));
}

#[test]
fn one_head_equals_manual_single_head_wiring() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (layer, params) = attention(QAttentionSpec::new(4, 1, 2), 5);
    let x = randv(&mut rng, 3 * 4, 1.0);
    let (y, _) = layer.forward(&params, &x).unwrap();

    let [vq, vk, vv, vf] = layer.projections();
    let rows = |u: &LowQubitVqc, m: &[f64]| -> Vec<f64> {
        m.chunks(4).flat_map(|r| u.forward(&params, r).unwrap().0).collect()
    };
    let (attended, _) = layer.heads()[0]
        .forward(&params, &rows(vq, &x), &rows(vk, &x), &rows(vv, &x))
        .unwrap();
    assert_eq!(y, rows(vf, &attended));
}

#[test]
fn attention_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for seed in 0..3 {
        let (layer, params) = attention(QAttentionSpec::new(4, 2, 2), seed);
        let x = randv(&mut rng, 2 * 4, 1.0);
        let c = randv(&mut rng, 2 * 4, 1.0);
        let (_, tr) = layer.forward(&params, &x).unwrap();
        let mut g = vec![0.0; params.len()];
        let dx = layer.backward(&params, &tr, &c, &mut g).unwrap();
        let f = |p: &[f64]| Ok(dot(&layer.forward(p, &x)?.0, &c));
        assert!(max_relative_error(&g, &finite_diff_grad(f, &params, DEFAULT_FD_STEP).unwrap()) < 1e-4);
        let fx = |xp: &[f64]| Ok(dot(&layer.forward(&params, xp)?.0, &c));
        assert!(max_relative_error(&dx, &finite_diff_grad(fx, &x, DEFAULT_FD_STEP).unwrap()) < 1e-4);
    }
}

#[test]
fn layers_are_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let x = randv(&mut rng, 12, 1.0);
    let a = attention(QAttentionSpec::new(4, 2, 2), 3);
    let b = attention(QAttentionSpec::new(4, 2, 2), 3);
    assert_eq!(a.1, b.1);
    assert_eq!(a.0.forward(&a.1, &x).unwrap().0, b.0.forward(&b.1, &x).unwrap().0);
    let (c, p) = qconv(QConvSpec::new(1, 2, 4, 2), 3);
    assert_eq!(c.forward(&p, &x).unwrap().0, c.forward(&p, &x).unwrap().0);
}

#[test]
fn stale_traces_are_rejected() {
    let (layer, mut params) = attention(QAttentionSpec::new(4, 2, 2), 3);
    let (_, tr) = layer.forward(&params, &[0.1; 8]).unwrap();
    params[5] += 0.5;
    let mut g = vec![0.0; params.len()];
    assert!(matches!(
        layer.backward(&params, &tr, &[1.0; 8], &mut g),
        Err(Error::Usage(_))
    ));
}
