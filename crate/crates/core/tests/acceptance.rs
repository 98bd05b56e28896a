//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line; run
//! with `cargo test -p permlab --test acceptance -- --nocapture` to see them.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use permlab::codes::CodeFamily;
use permlab::harness::{
    evaluate_bler, proposition_audit, run_sweep, records_to_csv, train, Channel, Decoder,
    SweepConfig, TrainConfig,
};
use permlab::md::ulam_nearest;
use permlab::neural::{init_weights, save_model, InputKind, MlpSpec, ModelWeights};
use permlab::perm::{BitMatrix, Permutation};
use permlab::plc::{apply_error_pattern, PlcErrorPattern, PlcParams};
use permlab::rm::{encode_charges, read_ranking, RmParams};

fn report(id: &str, name: &str, ok: bool, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id}: {name} ({detail})");
    assert!(ok, "criterion {id} failed: {detail}");
}

fn perm(s: &[u8]) -> Permutation {
    Permutation::new(s.to_vec()).unwrap()
}

#[test]
fn c1_code_sizes() {
    let start = Instant::now();
    let cases = [
        (CodeFamily::tenengolts_even(6), 56),
        (CodeFamily::tenengolts_even(7), 360),
        (CodeFamily::tenengolts_even(8), 2544),
        (CodeFamily::interleaved(9), 27),
        (CodeFamily::interleaved(12), 1728),
    ];
    let mut sizes = Vec::new();
    let mut ok = true;
    for (family, expected) in cases {
        let family = family.unwrap();
        let size = family.enumerate().unwrap().len();
        ok &= size == expected;
        sizes.push(format!("{}={size}", family.label()));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 10.0;
    report("1", "code sizes", ok, format!("{}; {secs:.2}s", sizes.join(" ")));
}

/// Tally of weights by walking the architecture layer by layer.
fn walk_count(spec: &MlpSpec) -> usize {
    let n = spec.n();
    let h = spec.hidden;
    let (mut count, mut width) = match spec.input {
        InputKind::BinaryMatrix { n, c_max } => (0, n * c_max),
        InputKind::SymbolSequence { n, embed_dim } => (n * embed_dim, n * embed_dim),
    };
    for _ in 0..3 {
        count += width * h + h;
        width = h;
    }
    count + n * (width * n + n)
}

#[test]
fn c2_parameter_counts() {
    let cases = [
        (MlpSpec::binary_matrix(6, 9, 128), 44_708),
        (MlpSpec::binary_matrix(6, 6, 128), 42_404),
        (MlpSpec::binary_matrix(7, 10, 128), 48_433),
        (MlpSpec::binary_matrix(7, 7, 128), 45_745),
        (MlpSpec::binary_matrix(8, 11, 128), 52_672),
        (MlpSpec::binary_matrix(8, 8, 128), 49_600),
        (MlpSpec::binary_matrix(8, 11, 256), 170_816),
        (MlpSpec::binary_matrix(8, 8, 256), 164_672),
        (MlpSpec::symbol_sequence(9, 64), 18_914),
        (MlpSpec::symbol_sequence(12, 64), 27_104),
    ];
    let mut ok = true;
    for (spec, expected) in &cases {
        let w = ModelWeights::zeros(*spec).unwrap();
        let tensors: usize = w.tensors().iter().map(|t| t.rows * t.cols).sum();
        ok &= spec.param_count() == *expected
            && walk_count(spec) == *expected
            && w.params().len() == *expected
            && tensors == *expected;
    }
    report("2", "parameter counts", ok, format!("{} configurations", cases.len()));
}

#[test]
fn c3_proposition_audit() {
    let start = Instant::now();
    let cb = CodeFamily::tenengolts_even(6).unwrap().enumerate().unwrap();
    let mut d = usize::MAX;
    for (i, a) in cb.codewords().iter().enumerate() {
        for b in &cb.codewords()[i + 1..] {
            let diff = a.symbols().iter().zip(b.symbols()).filter(|(x, y)| x != y).count();
            d = d.min(diff);
        }
    }
    let r = proposition_audit(&cb, Some(2)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = d == 3 && r.min_distance == Some(3) && r.failures == 0 && r.codewords == 56 && secs < 60.0;
    report(
        "3",
        "erasure MD corrects e1+e2+e3 <= 2 on C6e",
        ok,
        format!(
            "d={d}, {} patterns x {} codewords, {} failures; {secs:.2}s",
            r.patterns_per_codeword, r.codewords, r.failures
        ),
    );
}

#[test]
fn c4_single_translocations() {
    let start = Instant::now();
    let cb = CodeFamily::interleaved(9).unwrap().enumerate().unwrap();
    let mut checked = 0;
    let mut bad = 0;
    for (k, c) in cb.codewords().iter().enumerate() {
        for i in 1..=9 {
            for j in 1..=9 {
                if i == j {
                    continue;
                }
                // move the symbol at position i to position j
                let mut s = c.symbols().to_vec();
                let x = s.remove(i - 1);
                s.insert(j - 1, x);
                let corrupted = perm(&s);
                assert_eq!(corrupted, c.translocate(i, j).unwrap());
                let r = ulam_nearest(&corrupted, &cb).unwrap();
                checked += 1;
                if r.index != k || r.tie {
                    bad += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = checked == 27 * 72 && bad == 0 && secs < 60.0;
    report(
        "4",
        "single translocations on C9IL",
        ok,
        format!("{checked} corruptions, {bad} misdecoded; {secs:.2}s"),
    );
}

/// Straightforward forward pass from named tensors, for finite differences.
fn naive_loss(w: &ModelWeights, input: &[u8], target: &[u8], mask: &[f64]) -> f64 {
    let spec = w.spec();
    let n = spec.n();
    let t = |name: &str| w.tensor(name).unwrap();
    let mut x: Vec<f64> = match spec.input {
        InputKind::BinaryMatrix { .. } => input.iter().map(|&b| b as f64).collect(),
        InputKind::SymbolSequence { embed_dim, .. } => input
            .iter()
            .flat_map(|&s| {
                let row = (s as usize - 1) * embed_dim;
                t("embedding")[row..row + embed_dim].to_vec()
            })
            .collect(),
    };
    let dense = |x: &[f64], wname: &str, bname: &str, out: usize| -> Vec<f64> {
        let (wm, b) = (t(wname), t(bname));
        (0..out)
            .map(|o| b[o] + (0..x.len()).map(|i| wm[o * x.len() + i] * x[i]).sum::<f64>())
            .collect()
    };
    for layer in 1..=3 {
        x = dense(&x, &format!("dense{layer}.w"), &format!("dense{layer}.b"), spec.hidden)
            .into_iter()
            .map(|z| z.max(0.0))
            .collect();
    }
    let x: Vec<f64> = x.iter().zip(mask).map(|(a, m)| a * m).collect();
    let mut loss = 0.0;
    for k in 1..=n {
        let z = dense(&x, &format!("head{k}.w"), &format!("head{k}.b"), n);
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss -= z[target[k - 1] as usize - 1] - lse;
    }
    loss
}

#[test]
fn c5_gradient_check() {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(0xC5);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut params = 0;
    let mut configs = 0;
    while configs < 24 {
        let n = r.random_range(3..=5usize);
        let hidden = r.random_range(3..=6usize);
        let dropout = [0.0, 0.25][configs % 2];
        let spec = if configs % 3 == 0 {
            MlpSpec::symbol_sequence(n, hidden)
        } else {
            MlpSpec::binary_matrix(n, n + configs % 4, hidden)
        }
        .with_dropout(dropout);
        let mut w = init_weights(&spec, r.random()).unwrap();
        for v in w.params_mut() {
            *v += r.random_range(-0.1..0.1);
        }
        let input: Vec<u8> = match spec.input {
            InputKind::BinaryMatrix { .. } => (0..spec.input_len()).map(|_| r.random_range(0..2)).collect(),
            InputKind::SymbolSequence { .. } => {
                let mut s: Vec<u8> = (1..=n as u8).collect();
                s.shuffle(&mut r);
                s
            }
        };
        let mut target: Vec<u8> = (1..=n as u8).collect();
        target.shuffle(&mut r);
        let target = perm(&target);
        let mask: Vec<f64> = (0..hidden)
            .map(|_| if r.random::<f64>() < dropout { 0.0 } else { 1.0 / (1.0 - dropout) })
            .collect();
        let (loss, grad) = w.backward_with_mask(&input, &target, &mask).unwrap();
        assert!((loss - naive_loss(&w, &input, target.symbols(), &mask)).abs() < 1e-9);
        let mut rel = Vec::with_capacity(w.params().len());
        for i in 0..w.params().len() {
            let orig = w.params()[i];
            w.params_mut()[i] = orig + h;
            let up = naive_loss(&w, &input, target.symbols(), &mask);
            w.params_mut()[i] = orig - h;
            let down = naive_loss(&w, &input, target.symbols(), &mask);
            w.params_mut()[i] = orig;
            let fd = (up - down) / (2.0 * h);
            let a = grad.values[i];
            rel.push((a - fd).abs() / a.abs().max(fd.abs()).max(1e-5));
        }
        let max = rel.iter().cloned().fold(0.0, f64::max);
        if max >= 1e-4 {
            // a ReLU input within h of zero makes the difference quotient
            // straddle the kink; such draws are skipped, not counted
            let near_kink = {
                let mut ws = permlab::neural::Workspace::new(&spec);
                w.forward_with_mask(&input, &mask, &mut ws).unwrap();
                let close = ws.pre_activations().any(|z| z.abs() < 1e-3);
                close
            };
            if near_kink {
                continue;
            }
        }
        worst = worst.max(max);
        params += rel.len();
        configs += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        "5",
        "analytic vs central-difference gradients",
        worst < 1e-4 && secs < 60.0,
        format!("{configs} configs, {params} parameters, max rel err {worst:.2e}; {secs:.2}s"),
    );
}

#[test]
fn c6_paper_examples() {
    let p = perm(&[1, 2, 4, 3]);
    let ex1 = BitMatrix::from_rows(&[[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]).unwrap();
    let ok1 = p.to_matrix() == ex1 && ex1.to_permutation().unwrap() == p;

    let pattern = PlcErrorPattern {
        deletions: [2].into(),
        insertions: [(5, vec![1])].into(),
        pfd_rows: [2].into(),
        ..Default::default()
    };
    let params = PlcParams {
        l_max: 1,
        c_max: 7,
        ..PlcParams::clean(4)
    };
    let ex2 = BitMatrix::from_rows(&[
        [1, 0, 0, 1, 0, 0, 0],
        [1, 1, 1, 1, 0, 0, 0],
        [0, 0, 1, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0, 0],
    ])
    .unwrap();
    let ok2 = apply_error_pattern(&p, &pattern, &params).unwrap().bits == ex2;

    let sent = perm(&[1, 2, 5, 3, 4, 9, 6, 8, 7]);
    let levels = RmParams::with_default_levels(9, 0.0, 1.0, 0.0).unwrap().levels;
    let charges = encode_charges(&sent, &levels).unwrap();
    let ok3a = charges == [1.5, 2.0, 3.0, 3.5, 2.5, 4.5, 5.5, 5.0, 4.0];
    let ok3b = read_ranking(&charges).unwrap() == sent;
    let noisy = [1.68, 1.76, 3.08, 3.68, 2.14, 4.72, 4.40, 5.12, 3.90];
    let read = read_ranking(&noisy).unwrap();
    let ok3c = read == perm(&[1, 2, 5, 3, 4, 9, 7, 6, 8]) && sent.translocate(9, 7).unwrap() == read;
    report(
        "6",
        "examples 1-3",
        ok1 && ok2 && ok3a && ok3b && ok3c,
        format!("ex1={ok1} ex2={ok2} ex3 charges={ok3a} clean={ok3b} noisy={ok3c}"),
    );
}

fn fig3_grid() -> Vec<Channel> {
    (1..=10)
        .map(|i| Channel::Plc(PlcParams::sync(6, 0.005 * i as f64, 0.001, 0.001)))
        .collect()
}

#[test]
fn c7_training_smoke_and_md_monotonicity() {
    let start = Instant::now();
    let cb = CodeFamily::tenengolts_even(6).unwrap().enumerate().unwrap();
    let spec = MlpSpec::binary_matrix(6, 6, 128);
    let config = TrainConfig::new(1790, 10, 2024, fig3_grid());
    let out = train(&spec, &cb, &config).unwrap();
    let pairs = out.train_samples + out.validation_samples;
    let trained = start.elapsed().as_secs_f64();

    let clean = Channel::Plc(PlcParams::clean(6));
    let noiseless = evaluate_bler(Decoder::Mlp(&out.weights), &cb, &clean, 100_000, 1).unwrap();
    let exhaustive_clean = cb
        .codewords()
        .iter()
        .all(|c| permlab::neural::predict(&out.weights, c.to_matrix().as_slice()).unwrap() == c.symbols());
    let low = Channel::Plc(PlcParams::sync(6, 0.005, 0.001, 0.001));
    let noisy = evaluate_bler(Decoder::Mlp(&out.weights), &cb, &low, 100_000, 2).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = pairs >= 100_000
        && out.trace.len() <= 10
        && noiseless.bler == 0.0
        && exhaustive_clean
        && noisy.bler <= 0.05
        && secs < 900.0;
    let detail = format!(
        "{pairs} pairs, best epoch {}/{}, clean BLER {}, BLER at p_bg=0.005 {:.4}; train {trained:.0}s total {secs:.0}s",
        out.best_epoch,
        out.trace.len(),
        noiseless.bler,
        noisy.bler
    );

    let mut violations = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let mut blers = Vec::new();
    for (i, ch) in fig3_grid().iter().enumerate() {
        let r = evaluate_bler(Decoder::MdErasure, &cb, ch, 100_000, 500 + i as u64).unwrap();
        let sd = r.std_error();
        if let Some((b, s)) = prev {
            if r.bler < b && b - r.bler > 3.0 * (s * s + sd * sd).sqrt() {
                violations.push(i);
            }
        }
        blers.push(format!("{:.4}", r.bler));
        prev = Some((r.bler, sd));
    }
    report("7a", "training smoke", ok, detail);
    report(
        "7b",
        "MD BLER non-decreasing over the Fig. 3 grid",
        violations.is_empty(),
        format!("BLER {}", blers.join(" ")),
    );
}

#[test]
fn c8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cb = CodeFamily::tenengolts_even(6).unwrap().enumerate().unwrap();
    let spec = MlpSpec::binary_matrix(6, 6, 32);
    let config = TrainConfig::new(40, 3, 8, fig3_grid());
    let mut files = Vec::new();
    for run in 0..2 {
        let out = train(&spec, &cb, &config).unwrap();
        let path = dir.path().join(format!("m{run}.pmnd"));
        save_model(&out.weights, &path).unwrap();
        files.push(std::fs::read(path).unwrap());
    }
    let models_equal = files[0] == files[1];

    let sweep = SweepConfig::parse(
        r#"
seed = 5
trials = 20000
decoders = ["md_erasure", "md_plain"]
[code]
family = "tenengolts_even"
n = 6
[channel]
kind = "plc"
p_im = 0.001
p_pfd = 0.001
[sweep]
parameter = "p_bg"
values = [0.01, 0.03, 0.05]
"#,
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    sweep.run_to_csv(&a).unwrap();
    sweep.run_to_csv(&b).unwrap();
    let csv_equal = std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();
    let rerun = records_to_csv(&run_sweep(&sweep).unwrap()).into_bytes() == std::fs::read(&a).unwrap();

    let rm = CodeFamily::interleaved(9).unwrap().enumerate().unwrap();
    let rm_spec = MlpSpec::symbol_sequence(9, 16);
    let rm_grid: Vec<_> = (1..=3)
        .map(|i| Channel::Rm(RmParams::with_default_levels(9, 0.05 * i as f64, 1.0, 0.001).unwrap()))
        .collect();
    let rm_cfg = TrainConfig::new(30, 2, 9, rm_grid);
    let x = train(&rm_spec, &rm, &rm_cfg).unwrap();
    let y = train(&rm_spec, &rm, &rm_cfg).unwrap();
    let rm_equal = x.weights == y.weights && x.trace == y.trace;
    report(
        "8",
        "byte-identical reruns",
        models_equal && csv_equal && rerun && rm_equal,
        format!("plc model={models_equal} rm model={rm_equal} csv={csv_equal} in-memory={rerun}"),
    );
}
