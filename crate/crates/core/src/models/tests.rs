use super::*;
use crate::gradients::{finite_diff_grad, max_relative_error, DEFAULT_FD_STEP};
use crate::qlayers::{global_avg, relu};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn randv(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn same_seed_same_parameters() {
    let a = build_model(ModelSpec::qm5_mini(4), 11).unwrap();
    let b = build_model(ModelSpec::qm5_mini(4), 11).unwrap();
    assert_eq!(a.params(), b.params());
    let c = build_model(ModelSpec::qm5_mini(4), 12).unwrap();
    assert_ne!(a.params(), c.params());
}

#[test]
fn plain_variant_needs_kernel_sized_register() {
    for n in [2, 4] {
        let spec = ModelSpec {
            n_qubits: n,
            ..ModelSpec::qm5_mini_plain()
        };
        assert!(matches!(build_model(spec, 0), Err(Error::Config(_))));
    }
    let spec = ModelSpec {
        vqc_variant: VqcVariant::Plain,
        ..ModelSpec::qtransformer_mini(8)
    };
    assert!(matches!(build_model(spec, 0), Err(Error::Config(_))));
    assert!(build_model(ModelSpec::qm5_mini_plain(), 0).is_ok());
}

#[test]
fn parameter_counts_match_hand_sums() {
    // conv1: w_in 8·4 + b_in 4 + θ 3·4 + w_out 4·8 + b_out 8 = 88
    // conv2: 32·4 + 4 + 12 + 32 + 8 = 184; head: 8·4 + 4 = 36
    let m = build_model(ModelSpec::qm5_mini(4), 0).unwrap();
    assert_eq!(
        m.layer_param_counts(),
        vec![("conv1", 88), ("conv2", 184), ("head", 36)]
    );
    assert_eq!(m.n_params(), 308);
    assert_eq!(m.layout().total(), 308);

    let m = build_model(ModelSpec::m5_mini(), 0).unwrap();
    assert_eq!(m.n_params(), (8 * 8 + 8) + (32 * 8 + 8) + 36);

    let bil = ModelSpec {
        lt_variant: LtVariant::Bilinear,
        ..ModelSpec::qm5_mini(4)
    };
    assert_eq!(build_model(bil, 0).unwrap().n_params(), 308 - (32 + 4) - (128 + 4));

    // Plain first stage keeps only its 8·3 rotation angles.
    assert_eq!(
        build_model(ModelSpec::qm5_mini_plain(), 0).unwrap().n_params(),
        24 + 184 + 36
    );

    let noclip = ModelSpec {
        clip_enabled: false,
        ..ModelSpec::qm5_mini(4)
    };
    assert_eq!(build_model(noclip, 0).unwrap().n_params(), 308);
}

#[test]
fn batch_rows_are_independent_and_finite() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for spec in [
        ModelSpec::qm5_mini(4),
        ModelSpec::qm5_mini_plain(),
        ModelSpec::qtransformer_mini(2),
    ] {
        let m = build_model(spec, 3).unwrap();
        let len = spec.input_length;
        let data = randv(&mut rng, 4 * len);
        let batch = Tensor::new(&[4, len], data.clone()).unwrap();
        let all = m.forward(&batch).unwrap();
        assert_eq!(all.shape(), &[4, spec.n_classes]);
        let one = m
            .forward(&Tensor::new(&[1, len], data[2 * len..3 * len].to_vec()).unwrap())
            .unwrap();
        for (a, b) in one.row(0).iter().zip(all.row(2)) {
            assert!((a - b).abs() < 1e-12);
        }
        let zeros = m.forward(&Tensor::zeros(&[2, len]).unwrap()).unwrap();
        assert!(zeros.data().iter().all(|v| v.is_finite()));
        assert_eq!(m.forward(&batch).unwrap(), all);
        assert!(matches!(
            m.forward(&Tensor::zeros(&[2, len + 1]).unwrap()),
            Err(Error::Usage(_))
        ));
    }
}

#[test]
fn qm5_logits_match_layer_by_layer_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let spec = ModelSpec::qm5_mini(4);
    let m = build_model(spec, 21).unwrap();

    let mut b = ParamBuilder::new(21);
    let conv1 = QConv1d::new(&mut b, "c1", QConvSpec::new(1, 8, 8, 4)).unwrap();
    let conv2 = QConv1d::new(&mut b, "c2", QConvSpec::new(8, 8, 4, 2)).unwrap();
    let head = Linear::new(&mut b, "h", 8, 4).unwrap();
    let (_, params) = b.finish();
    assert_eq!(params, m.params());

    let x = randv(&mut rng, 1024);
    let (a1, _) = conv1.forward(&params, &x).unwrap();
    assert_eq!(a1.len(), 8 * 255);
    let mut pooled = Vec::new();
    for row in a1.chunks(255) {
        pooled.extend(maxpool1d(&relu(row), 4).unwrap().0);
    }
    assert_eq!(pooled.len(), 8 * 63);
    let (a2, _) = conv2.forward(&params, &pooled).unwrap();
    assert_eq!(a2.len(), 8 * 30);
    let feat: Vec<f64> = a2.chunks(30).map(|r| global_avg(&relu(r)).unwrap()).collect();
    let want = head.forward(&params, &feat).unwrap();
    let got = m.logits(&x).unwrap();
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10);
    }
}

fn check_model_gradient(spec: ModelSpec, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = build_model(spec, seed).unwrap();
    let x = randv(&mut rng, spec.input_length);
    let c = randv(&mut rng, spec.n_classes);
    let (_, tr) = m.trace(&x).unwrap();
    let mut g = vec![0.0; m.n_params()];
    m.backward(&tr, &c, &mut g).unwrap();
    let f = |p: &[f64]| Ok(m.logits_with(p, &x)?.iter().zip(&c).map(|(a, b)| a * b).sum());
    let fd = finite_diff_grad(f, m.params(), DEFAULT_FD_STEP).unwrap();
    let err = max_relative_error(&g, &fd);
    assert!(err < 1e-4, "{:?}: {err}", spec.kind);
}

#[test]
fn model_gradients_match_finite_differences() {
    let small = |s: ModelSpec| ModelSpec {
        input_length: 128,
        widths: [3, 2],
        n_classes: 3,
        ..s
    };
    check_model_gradient(small(ModelSpec::m5_mini()), 1);
    check_model_gradient(small(ModelSpec::qm5_mini(2)), 2);
    check_model_gradient(
        ModelSpec {
            lt_variant: LtVariant::Bilinear,
            ..small(ModelSpec::qm5_mini(2))
        },
        3,
    );
    check_model_gradient(
        ModelSpec {
            widths: [8, 2],
            ..small(ModelSpec::qm5_mini_plain())
        },
        4,
    );
    check_model_gradient(
        ModelSpec {
            input_length: 6,
            seq_len: 3,
            widths: [4, 3],
            n_heads: 2,
            ..ModelSpec::qtransformer_mini(2)
        },
        5,
    );
}

#[test]
fn spec_round_trips_through_kv() {
    for spec in [
        ModelSpec::qm5_mini(2),
        ModelSpec::qm5_mini_plain(),
        ModelSpec::m5_mini(),
        ModelSpec {
            clip_enabled: false,
            lt_variant: LtVariant::Bilinear,
            ..ModelSpec::qtransformer_mini(8)
        },
    ] {
        let text = spec.to_kv();
        assert_eq!(ModelSpec::from_kv(&text).unwrap(), spec);
    }
    let text = ModelSpec::qm5_mini(4).to_kv();
    assert!(ModelSpec::from_kv(&text.replace("kind = qm5_mini", "kind = m7")).is_err());
    assert!(ModelSpec::from_kv(&(text.clone() + "extra = 1\n")).is_err());
    assert!(ModelSpec::from_kv(&text.replace("clip = on\n", "")).is_err());
    assert!(parse_kv("a = 1\na = 2").is_err());
    assert_eq!(
        parse_kv("# note\n\n x = 1 \ny=two").unwrap(),
        vec![("x".into(), "1".into()), ("y".into(), "two".into())]
    );
}

#[test]
fn invalid_specs_are_config_errors() {
    let bad = [
        ModelSpec {
            n_qubits: 3,
            ..ModelSpec::qm5_mini(4)
        },
        ModelSpec {
            input_length: 40,
            ..ModelSpec::qm5_mini(4)
        },
        ModelSpec {
            n_heads: 3,
            ..ModelSpec::qtransformer_mini(4)
        },
        ModelSpec {
            n_classes: 1,
            ..ModelSpec::m5_mini()
        },
    ];
    for spec in bad {
        assert!(matches!(build_model(spec, 0), Err(Error::Config(_))), "{spec:?}");
    }
}
