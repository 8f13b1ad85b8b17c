use std::path::Path;

use lowq::error::AppError;
use lowq::{cache, checkpoint};
use lowq_core::data::gen_synthetic;
use lowq_core::models::{build_model, ModelSpec};
use lowq_core::Tensor;

#[test]
fn cache_round_trip_is_f32_exact() {
    let ds = gen_synthetic(4, 3, 128, 0.05, 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.qspd");
    cache::save(&ds, &path).unwrap();
    let back = cache::load(&path).unwrap();
    assert_eq!(back.labels(), ds.labels());
    assert_eq!(back.n_classes(), 4);
    for i in 0..ds.len() {
        for (a, b) in ds.waveform(i).iter().zip(back.waveform(i)) {
            assert_eq!(*b, f64::from(*a as f32));
        }
    }
    let bytes = cache::encode(&ds);
    assert_eq!(&bytes[..4], b"QSPD");
    assert_eq!(bytes.len(), 14 + 12 * 128 * 4 + 12 * 2);
}

#[test]
fn cache_rejects_corruption() {
    let ds = gen_synthetic(2, 2, 64, 0.0, 0).unwrap();
    let bytes = cache::encode(&ds);
    let p = Path::new("x.qspd");
    assert!(matches!(
        cache::decode(&bytes[..bytes.len() - 1], p),
        Err(AppError::Format { .. })
    ));
    let mut wrong = bytes.clone();
    wrong[0] = b'X';
    assert!(cache::decode(&wrong, p).is_err());
    let mut version = bytes;
    version[4] = 9;
    assert!(cache::decode(&version, p).is_err());
}

#[test]
fn checkpoint_restores_identical_predictions() {
    let mut spec = ModelSpec::qm5_mini(2);
    spec.input_length = 256;
    spec.n_classes = 3;
    let model = build_model(spec, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.qspc");
    checkpoint::save(&model, &path).unwrap();
    let back = checkpoint::load(&path).unwrap();
    assert_eq!(back.spec(), model.spec());
    assert_eq!(back.params(), model.params());
    let x = Tensor::new(&[2, 256], (0..512).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
    assert_eq!(back.forward(&x).unwrap(), model.forward(&x).unwrap());
    assert_eq!(&checkpoint::encode(&model)[..4], b"QSPC");
}

#[test]
fn checkpoint_rejects_corruption() {
    let model = build_model(ModelSpec::m5_mini(), 0).unwrap();
    let bytes = checkpoint::encode(&model);
    let p = Path::new("m.qspc");
    assert!(checkpoint::decode(&bytes[..bytes.len() - 8], p).is_err());
    let mut magic = bytes.clone();
    magic[3] = b'D';
    assert!(checkpoint::decode(&magic, p).is_err());
    assert!(checkpoint::decode(&[], p).is_err());
}
