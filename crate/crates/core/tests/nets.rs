use headvote_core::corpus::{DatasetSpec, Vocabulary};
use headvote_core::math::Matrix;
use headvote_core::nets::{
    forward, init_model, loss_and_grad, train, Arch, ClassifierModel, Example, NetConfig,
};
use headvote_core::synthetic::keyword_task;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_model(arch: Arch) -> ClassifierModel {
    let spec = DatasetSpec::new(["a", "b", "c"]).unwrap();
    let vocab = Vocabulary::from_entries((0..12).map(|i| (format!("t{i}"), 1)), 1);
    let config = NetConfig {
        dim: 8,
        num_filters: 4,
        hidden: 6,
        max_len: 10,
        ..NetConfig::new(arch, 3)
    };
    init_model(&config, &spec, &vocab, None).unwrap()
}

fn zeroed(mut model: ClassifierModel) -> ClassifierModel {
    for (_, m) in model.params.tensors_mut() {
        m.fill(0.0);
    }
    model
}

fn examples(model: &ClassifierModel, data: &[headvote_core::Headline]) -> Vec<Example> {
    data.iter()
        .map(|h| Example::from_headline(model, h))
        .collect()
}

#[test]
fn zero_parameters_give_uniform_output() {
    for arch in Arch::ALL {
        let model = zeroed(small_model(arch));
        let (logits, _) = forward(&model, &[1, 2, 3]).unwrap();
        assert!(logits.iter().all(|&l| l == 0.0), "{arch}");
        let (label, probs) = model.predict_ids(&[4]).unwrap();
        assert_eq!(label, 0);
        for p in probs {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
        let batch = [Example {
            ids: vec![0, 1],
            label: 2,
        }];
        let (loss, _) = loss_and_grad(&model, &batch).unwrap();
        assert!((loss - 3f64.ln()).abs() < 1e-12);
    }
}

#[test]
fn nbow_of_one_token_is_its_row() {
    let model = small_model(Arch::Nbow);
    let (_, cache) = forward(&model, &[5]).unwrap();
    assert_eq!(cache.encoded(), model.params.embedding.row(5));
}

#[test]
fn lstm_with_zero_weights_ends_at_zero() {
    let mut model = small_model(Arch::Lstm);
    model.params.lstm_w.fill(0.0);
    model.params.lstm_b.fill(0.0);
    let (_, cache) = forward(&model, &[1, 2, 3, 4]).unwrap();
    assert!(cache.encoded().iter().all(|&h| h == 0.0));
}

#[test]
fn empty_input_is_rejected() {
    for arch in Arch::ALL {
        assert!(forward(&small_model(arch), &[]).is_err());
    }
}

#[test]
fn width_one_max_pooling_ignores_order() {
    let mut model = small_model(Arch::Cnn);
    model.config.filter_width = 1;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    model.params.conv_w =
        Matrix::from_vec(4, 8, (0..32).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let (a, _) = forward(&model, &[1, 7, 3, 9]).unwrap();
    let (b, _) = forward(&model, &[9, 3, 1, 7]).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn inputs_are_truncated_to_max_len() {
    for arch in Arch::ALL {
        let model = small_model(arch);
        let long: Vec<usize> = (0..25).map(|i| i % 12).collect();
        let (a, _) = forward(&model, &long).unwrap();
        let (b, _) = forward(&model, &long[..10]).unwrap();
        assert_eq!(a, b, "{arch}");
    }
}

#[test]
fn softmax_output_is_a_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for arch in Arch::ALL {
        let model = small_model(arch);
        for _ in 0..50 {
            let len = rng.gen_range(1..15);
            let ids: Vec<usize> = (0..len).map(|_| rng.gen_range(0..13)).collect();
            let (_, probs) = model.predict_ids(&ids).unwrap();
            assert!(probs.iter().all(|&p| p >= 0.0));
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn frozen_embeddings_get_no_gradient() {
    for arch in Arch::ALL {
        let mut model = small_model(arch);
        model.config.fine_tune_embeddings = false;
        let batch = [Example {
            ids: vec![0, 3, 5],
            label: 1,
        }];
        let (_, grads) = loss_and_grad(&model, &batch).unwrap();
        assert!(grads.params.embedding.as_slice().iter().all(|&g| g == 0.0));
    }
}

#[test]
fn separable_three_class_task_is_learned() {
    let task = keyword_task(3, 300, 60, 2);
    let vocab = Vocabulary::build(task.train.iter().map(|h| &h.tokens), 1).unwrap();
    for arch in Arch::ALL {
        // 300 examples at the default batch size give only 50 updates
        let config = NetConfig {
            batch_size: 16,
            ..NetConfig::new(arch, 3)
        };
        let model = init_model(&config, &task.spec, &vocab, None).unwrap();
        let (tr, dev) = (examples(&model, &task.train), examples(&model, &task.dev));
        let (_, report) = train(model, &tr, &dev).unwrap();
        assert!(
            report.best_dev_accuracy >= 0.95,
            "{arch}: {}",
            report.best_dev_accuracy
        );
        assert!(
            report.epochs[2].train_loss < report.epochs[0].train_loss,
            "{arch}"
        );
        let best = report
            .epochs
            .iter()
            .map(|e| e.dev_accuracy)
            .fold(0.0, f64::max);
        assert_eq!(report.best_dev_accuracy, best);
    }
}

#[test]
fn zero_epochs_returns_the_initial_model() {
    let task = keyword_task(3, 30, 9, 4);
    let vocab = Vocabulary::build(task.train.iter().map(|h| &h.tokens), 1).unwrap();
    let config = NetConfig {
        dim: 8,
        epochs: 0,
        ..NetConfig::new(Arch::Nbow, 3)
    };
    let model = init_model(&config, &task.spec, &vocab, None).unwrap();
    let (tr, dev) = (examples(&model, &task.train), examples(&model, &task.dev));
    let (trained, report) = train(model.clone(), &tr, &dev).unwrap();
    assert_eq!(trained, model);
    assert!(report.epochs.is_empty());
}

#[test]
fn training_is_deterministic() {
    let task = keyword_task(3, 60, 15, 5);
    let vocab = Vocabulary::build(task.train.iter().map(|h| &h.tokens), 1).unwrap();
    for arch in Arch::ALL {
        let config = NetConfig {
            dim: 8,
            num_filters: 4,
            hidden: 4,
            epochs: 2,
            ..NetConfig::new(arch, 3)
        };
        let run = || {
            let model = init_model(&config, &task.spec, &vocab, None).unwrap();
            let (tr, dev) = (examples(&model, &task.train), examples(&model, &task.dev));
            train(model, &tr, &dev).unwrap()
        };
        let (m1, r1) = run();
        let (m2, r2) = run();
        assert_eq!(r1, r2);
        assert_eq!(m1.to_text(), m2.to_text());
    }
}

#[test]
fn model_text_rejects_a_corrupt_header() {
    let text = small_model(Arch::Cnn)
        .to_text()
        .replacen("filter_width 3", "filter_width x", 1);
    let err = ClassifierModel::from_text(&text).unwrap_err().to_string();
    assert!(err.contains("filter_width"), "{err}");
}
