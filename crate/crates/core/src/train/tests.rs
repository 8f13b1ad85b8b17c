use super::*;
use crate::data::gen_synthetic;
use crate::gradients::{finite_diff_grad, max_relative_error};
use crate::models::{build_model, ModelSpec};
use crate::param::ParamBuilder;
use rand::Rng;

#[test]
fn zero_gradient_leaves_parameters() {
    let mut adam = AdamState::new(3, DEFAULT_LR);
    let mut p = vec![0.5, -1.0, 2.0];
    adam.step(&mut p, &[0.0; 3], None).unwrap();
    assert_eq!(p, vec![0.5, -1.0, 2.0]);
    assert_eq!(adam.t(), 1);
}

#[test]
fn first_step_is_bias_corrected_unit_step() {
    let mut adam = AdamState::new(1, 1e-3);
    let mut p = vec![0.0];
    adam.step(&mut p, &[0.5], None).unwrap();
    let want = -1e-3 * 0.5 / (0.5 + 1e-8);
    assert!((p[0] - want).abs() < 1e-18);
    assert!((p[0] + 1e-3).abs() < 1e-10);
}

#[test]
fn joint_update_equals_split_updates() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut joint = AdamState::new(5, 0.01);
    let mut a = AdamState::new(2, 0.01);
    let mut b = AdamState::new(3, 0.01);
    let mut p: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (mut pa, mut pb) = (p[..2].to_vec(), p[2..].to_vec());
    for _ in 0..10 {
        let g: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        joint.step(&mut p, &g, None).unwrap();
        a.step(&mut pa, &g[..2], None).unwrap();
        b.step(&mut pb, &g[2..], None).unwrap();
    }
    assert_eq!(&p[..2], &pa[..]);
    assert_eq!(&p[2..], &pb[..]);
}

#[test]
fn permuted_parameters_update_identically() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let perm = [3usize, 0, 4, 1, 2];
    let mut p: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut q: Vec<f64> = perm.iter().map(|i| p[*i]).collect();
    let mut s1 = AdamState::new(5, 0.05);
    let mut s2 = AdamState::new(5, 0.05);
    for _ in 0..5 {
        let g: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let gq: Vec<f64> = perm.iter().map(|i| g[*i]).collect();
        s1.step(&mut p, &g, None).unwrap();
        s2.step(&mut q, &gq, None).unwrap();
    }
    for (k, i) in perm.iter().enumerate() {
        assert_eq!(q[k], p[*i]);
    }
}

#[test]
fn non_finite_gradient_names_its_block() {
    let mut b = ParamBuilder::new(0);
    b.uniform("encoder.w_in", 3, 1.0);
    b.uniform("encoder.theta", 2, 1.0);
    let (layout, mut p) = b.finish();
    let before = p.clone();
    let mut adam = AdamState::new(5, 0.1);
    let err = adam
        .step(&mut p, &[0.0, 0.0, 0.0, f64::NAN, 0.0], Some(&layout))
        .unwrap_err();
    assert!(matches!(&err, Error::NonFinite(m) if m.contains("encoder.theta")));
    assert_eq!(p, before);
    assert_eq!(adam.t(), 0);
    assert!(adam.step(&mut p, &[0.0; 4], None).is_err());
}

#[test]
fn cross_entropy_examples() {
    let (l, _) = cross_entropy(&Tensor::zeros(&[1, 4]).unwrap(), &[2]).unwrap();
    assert!((l - 4f64.ln()).abs() < 1e-12);
    assert!((l - 1.386294).abs() < 1e-6);

    let (l, _) = cross_entropy(&Tensor::new(&[1, 3], vec![30.0, 0.0, 0.0]).unwrap(), &[0]).unwrap();
    assert!(l < 1e-9);
    let (l, _) = cross_entropy(&Tensor::new(&[1, 2], vec![1000.0, -1000.0]).unwrap(), &[1]).unwrap();
    assert!((l - 2000.0).abs() < 1e-9);

    assert!(matches!(
        cross_entropy(&Tensor::zeros(&[2, 3]).unwrap(), &[0, 3]),
        Err(Error::Usage(_))
    ));
}

#[test]
fn cross_entropy_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let logits: Vec<f64> = (0..15).map(|_| rng.random_range(-3.0..3.0)).collect();
    let labels = [4, 0, 2];
    let (_, g) = cross_entropy(&Tensor::new(&[3, 5], logits.clone()).unwrap(), &labels).unwrap();
    let f = |z: &[f64]| Ok(cross_entropy(&Tensor::new(&[3, 5], z.to_vec())?, &labels)?.0);
    let fd = finite_diff_grad(f, &logits, 1e-5).unwrap();
    assert!(max_relative_error(g.data(), &fd) < 1e-6);
}

#[test]
fn trailing_statistics() {
    let losses: Vec<f64> = (0..100)
        .map(|i| {
            if i < 50 {
                10.0
            } else if i % 2 == 0 {
                1.0
            } else {
                3.0
            }
        })
        .collect();
    assert_eq!(final_loss(&losses), 2.0);
    assert_eq!(stability(&losses), 1.0);
    assert_eq!(stability(&[4.0, 4.0]), 0.0);
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
}

fn toy_seeded(seed: u64) -> (Model, WaveDataset) {
    let spec = ModelSpec {
        input_length: 256,
        n_classes: 2,
        ..ModelSpec::qm5_mini(2)
    };
    (
        build_model(spec, seed).unwrap(),
        gen_synthetic(2, 16, 256, 0.05, seed).unwrap(),
    )
}

fn toy() -> (Model, WaveDataset) {
    toy_seeded(5)
}

#[test]
fn zero_epochs_is_a_no_op() {
    let (mut model, ds) = toy();
    let before = model.params().to_vec();
    let trace = train_loop(&mut model, &ds, &TrainConfig::new(0, 8, 1), &mut NoHooks).unwrap();
    assert!(trace.records.is_empty());
    assert_eq!(model.params(), &before[..]);
}

#[test]
fn same_seed_same_trace() {
    let run = || {
        let (mut model, ds) = toy();
        let cfg = TrainConfig::new(1, 8, 7).lr(0.01);
        (train_loop(&mut model, &ds, &cfg, &mut NoHooks).unwrap(), model)
    };
    let (a, ma) = run();
    let (b, mb) = run();
    assert_eq!(a, b);
    assert_eq!(ma.params(), mb.params());
    assert_eq!(a.records.len(), 4);
    assert_eq!(a.records.iter().map(|r| r.step).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    assert!(a.records[..3].iter().all(|r| r.accuracy.is_none()));
    assert!(a.records[3].accuracy.is_some());
}

#[test]
fn partial_batches_and_step_budget() {
    let (mut model, _) = toy();
    let ds = gen_synthetic(2, 5, 256, 0.05, 1).unwrap();
    let cfg = TrainConfig::new(1, 3, 1).steps(5, ds.len());
    assert_eq!(cfg.epochs, 2);
    let trace = train_loop(&mut model, &ds, &cfg, &mut NoHooks).unwrap();
    assert_eq!(trace.records.len(), 5);
    assert_eq!(trace.epoch_accuracy().len(), 2);
    assert_eq!(trace.records[3].epoch, 1);
    assert_eq!(trace.records[4].epoch, 2);
    assert!(trace.summary().final_accuracy.is_some());
}

#[test]
fn separable_toy_set_is_learned() {
    for seed in 0..3 {
        let (mut model, ds) = toy_seeded(seed);
        let cfg = TrainConfig::new(1, 8, seed).lr(0.01).steps(300, ds.len());
        let trace = train_loop(&mut model, &ds, &cfg, &mut NoHooks).unwrap();
        let acc = trace.summary().final_accuracy.unwrap();
        assert!(acc >= 0.95, "seed {seed}: accuracy {acc}");
    }
}
