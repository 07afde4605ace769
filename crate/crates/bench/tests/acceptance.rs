//! Acceptance checks, one PASS/FAIL line each. Runs without the libtest
//! harness so the criteria execute serially (the timing criterion must not
//! share the CPU) and every line is printed even when all pass.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wl2gnn::encoding::Wl2Encoding;
use wl2gnn::graphs::{
    complete_graph, cycle_graph, disjoint_union, edge_neighborhood_graph, generate_triangle_dataset, gnp_graph,
    graph_power, load_tu_dataset, path_graph, random_regular_graph, Graph, TriangleConfig,
};
use wl2gnn::layers::{
    build_simulation_stack, dense, forward_model, gin_layer, gnn2_layer, init_params, pool, separating_encoding,
    separating_model, simulation_input, simulation_readout, wl2_conv, wl2_conv_eval, wl2_conv_naive, DenseLayer,
    DenseVars, ModelInput, ModelSpec, Pooling, SparseBatch, SumWeights, WeightedSumNet, Wl2LayerParams,
    Wl2LayerVars,
};
use wl2gnn::tensor::{grad_check, Activation, Tape, Tensor, Var};
use wl2gnn::wl::{distinguishable, run_wl, Palette};
use wl2gnn_bench::cv::{mean_test_accuracy, stratified_subsample};
use wl2gnn_bench::timing::{epoch_timing, loglog_slope, top_decade_slope, TimingConfig};
use wl2gnn_bench::{run_cv, TrainConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn random_tensor(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn constant(g: Graph) -> Graph {
    let n = g.num_vertices();
    g.with_vertex_features(1, vec![1.0; n]).unwrap()
}

fn copies(g: &Graph, k: usize) -> Graph {
    disjoint_union(&vec![g.clone(); k]).unwrap()
}

fn logits(spec: &ModelSpec, params: &[Tensor], gs: &[Graph]) -> Result<Vec<f64>, String> {
    let input = ok(ModelInput::build(spec, gs))?;
    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|t| tape.leaf(t.clone())).collect();
    let out = ok(forward_model(&mut tape, spec, &vars, &input))?;
    Ok(tape.value(out).data().to_vec())
}

fn c1_counterexample() -> Outcome {
    let start = Instant::now();
    let g = cycle_graph(6).unwrap();
    let h = copies(&cycle_graph(3).unwrap(), 2);
    let (k1, k2) = (ok(distinguishable(&g, &h, 1))?, ok(distinguishable(&g, &h, 2))?);
    let secs = start.elapsed().as_secs_f64();
    ensure(!k1 && k2 && secs < 1.0, format!("k=1 {k1}, k=2 {k2}, {secs:.3}s"))?;
    Ok(format!("1-WL equal, 2-WL separates, {secs:.4}s"))
}

fn c2_edge_neighborhoods() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for pair in 0..20 {
        let d = 2 + pair % 2;
        let n = loop {
            let n = rng.gen_range(d + 2..=20);
            if n * d % 2 == 0 {
                break n;
            }
        };
        let g = ok(random_regular_graph(n, d, &mut rng))?;
        let h = ok(random_regular_graph(n, d, &mut rng))?;
        let mut palette = Palette::new();
        let a = ok(run_wl(&edge_neighborhood_graph(&g), 1, &mut palette))?;
        let b = ok(run_wl(&edge_neighborhood_graph(&h), 1, &mut palette))?;
        let (ha, hb) = (a.coloring.histogram(), b.coloring.histogram());
        let mut shape = vec![n, n * d / 2];
        shape.sort_unstable();
        ensure(
            a.iterations == 1 && b.iterations == 1 && ha == hb && ha.shape() == shape,
            format!("pair {pair} (n={n}, d={d}): iterations {}/{}, shape {:?}", a.iterations, b.iterations, ha.shape()),
        )?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 5.0, format!("{secs:.2}s"))?;
    Ok(format!("20 pairs, 1 iteration each, {secs:.3}s"))
}

fn randomized(spec: &ModelSpec, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Tensor> {
    init_params(spec, dim, rng).into_iter().map(|(_, t)| random_tensor(t.rows(), t.cols(), rng)).collect()
}

fn c3_regular_blindness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (c3, c4) = (cycle_graph(3).unwrap(), cycle_graph(4).unwrap());
    let first = (constant(cycle_graph(6).unwrap()), constant(copies(&c3, 2)));
    let second = (constant(copies(&c3, 4)), constant(copies(&c4, 3)));
    let gnn2 = ModelSpec::parse("layer=gnn2 T=3 d=16 act=logistic pool=mean").unwrap();
    let gin = ModelSpec::parse("layer=gin T=3 d=16 act=relu pool=sum").unwrap();
    let mut worst: f64 = 0.0;
    for (spec, pairs) in [(&gnn2, vec![&first, &second]), (&gin, vec![&first])] {
        let dim = ok(ModelInput::build(spec, std::slice::from_ref(&first.0)))?.feature_dim();
        for _ in 0..10 {
            let params = randomized(spec, dim, &mut rng);
            for (g, h) in &pairs {
                let out = logits(spec, &params, &[g.clone(), h.clone()])?;
                worst = worst.max((out[0] - out[1]).abs());
            }
        }
    }
    ensure(worst <= 1e-10, format!("max logit gap {worst:e}"))?;
    Ok(format!("max logit gap {worst:.1e} over 10 draws per model"))
}

fn c4_separating_model() -> Outcome {
    let (spec, params) = separating_model();
    let params: Vec<Tensor> = params.into_iter().map(|(_, t)| t).collect();
    let mut out = Vec::new();
    for g in [cycle_graph(6).unwrap(), copies(&cycle_graph(3).unwrap(), 2)] {
        let input = ModelInput::Wl2(ok(separating_encoding(&g))?);
        let mut tape = Tape::new();
        let vars: Vec<Var> = params.iter().map(|t| tape.leaf(t.clone())).collect();
        let v = ok(forward_model(&mut tape, &spec, &vars, &input))?;
        out.push(tape.value(v).get(0, 0));
    }
    ensure(out == [4.0, 6.0], format!("pooled outputs {out:?}"))?;
    Ok("C6 -> 4, 2xC3 -> 6".into())
}

fn c5_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = rng.gen_range(1..=12);
        let r = 1 + case % 3;
        let g = gnp_graph(n, rng.gen_range(0.1..0.7), &mut rng);
        let e = g.num_edges();
        let (dv, de) = (rng.gen_range(1..=4), rng.gen_range(0..=2));
        let g = ok(g.with_vertex_features(dv, random_tensor(n, dv, &mut rng).into_data()))?;
        let g = ok(g.with_edge_features(de, random_tensor(e, de, &mut rng).into_data()))?;
        let enc = ok(Wl2Encoding::encode(&g, r))?;
        let d_in = enc.feature_dim();
        let d_out = rng.gen_range(1..=8);
        let p = ok(Wl2LayerParams::new(
            random_tensor(d_in, d_out, &mut rng),
            random_tensor(d_in, d_out, &mut rng),
            random_tensor(d_in, d_out, &mut rng),
            Activation::Logistic,
            Activation::Relu,
        ))?;
        let fast = ok(wl2_conv_eval(&enc, enc.z0(), &p))?;
        let slow = ok(wl2_conv_naive(&ok(graph_power(&g, r))?, enc.z0(), &p))?;
        worst = worst.max(fast.max_abs_diff(&slow));
    }
    ensure(worst <= 1e-12, format!("max abs diff {worst:e}"))?;
    Ok(format!("max abs diff {worst:.1e} over 50 graphs"))
}

fn c6_golden() -> Outcome {
    let unit = |g: Graph| {
        let (n, e) = (g.num_vertices(), g.num_edges());
        g.with_vertex_features(1, vec![1.0; n]).unwrap().with_edge_features(1, vec![1.0; e]).unwrap()
    };
    let enc = ok(Wl2Encoding::encode_batch(&[unit(complete_graph(3).unwrap()), unit(path_graph(2).unwrap())], 1))?;
    ensure((enc.m(), enc.gamma()) == (9, 24), format!("m={} gamma={}", enc.m(), enc.gamma()))?;
    let (lp, ed) = ([1.0, 0.0], [0.0, 1.0]);
    for (k, want) in [lp, lp, lp, ed, ed, ed, lp, lp, ed].iter().enumerate() {
        ensure(enc.z0().row(k) == want, format!("feature row {k}: {:?}", enc.z0().row(k)))?;
    }
    // 1-indexed triples
    let expected = [
        (1, 1, 1), (1, 4, 4), (1, 5, 5), (2, 2, 2), (2, 4, 4), (2, 6, 6), (3, 3, 3), (3, 5, 5),
        (3, 6, 6), (4, 1, 4), (4, 4, 2), (4, 5, 6), (5, 1, 5), (5, 5, 3), (5, 4, 6), (6, 2, 6),
        (6, 6, 3), (6, 4, 5), (7, 7, 7), (7, 9, 9), (8, 8, 8), (8, 9, 9), (9, 7, 9), (9, 9, 8),
    ];
    for (t, &(l, a, b)) in expected.iter().enumerate() {
        let got = (enc.r_l()[t] + 1, enc.r_g1()[t] + 1, enc.r_g2()[t] + 1);
        ensure(got == (l, a, b), format!("triple {t}: {got:?}, expected {:?}", (l, a, b)))?;
    }
    Ok("m=9, gamma=24, rows and triples exact".into())
}

fn c7_simulation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut blocks = 0;
    for case in 0..10 {
        let (act, weights) = match case % 3 {
            0 => (Activation::Relu, SumWeights::Gin { eps: 0.1 }),
            1 => (Activation::Identity, SumWeights::Gin { eps: -0.3 }),
            _ => (Activation::Relu, SumWeights::Gcn),
        };
        let input_dim = rng.gen_range(1..=3);
        let mut d = input_dim;
        let layers: Vec<Vec<DenseLayer>> = (0..rng.gen_range(1..=3))
            .map(|_| {
                (0..rng.gen_range(1..=2))
                    .map(|_| {
                        let out = rng.gen_range(1..=4);
                        let l = DenseLayer::new(random_tensor(d, out, &mut rng), random_tensor(1, out, &mut rng)).unwrap();
                        d = out;
                        l
                    })
                    .collect()
            })
            .collect();
        let net = WeightedSumNet { input_dim, weights, layers, act };
        let n = rng.gen_range(1..=8);
        let g = gnp_graph(n, 0.45, &mut rng);
        let g = ok(g.with_vertex_features(input_dim, random_tensor(n, input_dim, &mut rng).into_data()))?;
        let direct = ok(net.evaluate(&g))?;
        let enc = ok(simulation_input(&net, &g))?;
        let stack = ok(build_simulation_stack(&net))?;
        let (own, edge) = weights.of(&g);
        let mut z = enc.z0().clone();
        let mut next = stack.iter();
        for (t, mlp) in net.layers.iter().enumerate() {
            for p in next.by_ref().take(2 + mlp.len()) {
                z = ok(wl2_conv_eval(&enc, &z, p))?;
            }
            let last = z.cols() - 1;
            for (row, &(i, j)) in enc.pairs().iter().enumerate() {
                let indicator = if i == j { 1.0 } else { 0.0 };
                ensure(z.get(row, 0) == indicator, format!("case {case}, block {t}: loop indicator broken at row {row}"))?;
                let w = if i == j { own[i] } else { edge[g.edge_id(i, j).expect("edge row")] };
                ensure((z.get(row, last) - w).abs() <= 1e-12, format!("case {case}, block {t}: weight channel broken at row {row}"))?;
            }
            let read = ok(simulation_readout(&enc, &z))?;
            worst = worst.max(read.max_abs_diff(&direct[t]));
            blocks += 1;
        }
    }
    ensure(worst <= 1e-8, format!("max deviation from the direct network {worst:e}"))?;
    Ok(format!("indicator and weight channels intact at {blocks} blocks, max deviation {worst:.1e}"))
}

type Check<'c> = (&'static str, Box<dyn Fn(&mut Tape<'c>, &[Var]) -> wl2gnn::Result<Var> + 'c>, Vec<Tensor>);

/// Reduces `v` to a scalar through a fixed random weighting so that every
/// entry of `v` gets a distinct gradient.
fn weighted_sum(tape: &mut Tape<'_>, v: Var, seed: u64) -> wl2gnn::Result<Var> {
    let (rows, cols) = tape.value(v).shape();
    let w = tape.leaf(random_tensor(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed)));
    let p = tape.hadamard(v, w)?;
    Ok(tape.sum(p))
}

fn c8_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut r = |rows, cols| random_tensor(rows, cols, &mut rng);
    let (a, b, bias, small, scores, logit_col) = (r(6, 3), r(6, 3), r(1, 3), r(3, 2), r(6, 1), r(4, 1));
    let gather_idx = [0usize, 2, 2, 5, 1, 3, 4, 0];
    let second_idx = [1usize, 1, 4, 0, 5, 3, 2, 2];
    let scatter_idx = [1usize, 0, 1, 3, 3, 2];
    let triple_target = [0usize, 3, 3, 1, 2, 0, 1, 1];
    let bounds = vec![0, 2, 5, 6];
    let targets = [1.0, 0.0, 0.0, 1.0];
    let checks: Vec<Check<'_>> = vec![
        ("matmul", Box::new(|t, v| { let y = t.matmul(v[0], v[1])?; weighted_sum(t, y, 1) }), vec![a.clone(), small.clone()]),
        ("add", Box::new(|t, v| { let y = t.add(v[0], v[1])?; let y = t.hadamard(y, y)?; weighted_sum(t, y, 2) }), vec![a.clone(), b.clone()]),
        ("sub", Box::new(|t, v| { let y = t.sub(v[0], v[1])?; let y = t.hadamard(y, y)?; weighted_sum(t, y, 3) }), vec![a.clone(), b.clone()]),
        ("hadamard", Box::new(|t, v| { let y = t.hadamard(v[0], v[1])?; weighted_sum(t, y, 4) }), vec![a.clone(), b.clone()]),
        ("scale", Box::new(|t, v| { let y = t.scale(v[0], -1.7); let y = t.hadamard(y, v[0])?; weighted_sum(t, y, 5) }), vec![a.clone()]),
        ("add_bias", Box::new(|t, v| { let y = t.add_bias(v[0], v[1])?; let y = t.logistic(y); weighted_sum(t, y, 6) }), vec![a.clone(), bias.clone()]),
        ("gather", Box::new(|t, v| { let y = t.gather(v[0], &gather_idx)?; let y = t.hadamard(y, y)?; weighted_sum(t, y, 7) }), vec![a.clone()]),
        ("scatter_sum", Box::new(|t, v| { let y = t.scatter_sum(v[0], &scatter_idx, 4)?; let y = t.hadamard(y, y)?; weighted_sum(t, y, 8) }), vec![a.clone()]),
        ("triple_sum", Box::new(|t, v| { let y = t.triple_sum(v[0], &gather_idx, &second_idx, &triple_target, 4, Activation::Logistic)?; let y = t.hadamard(y, y)?; weighted_sum(t, y, 9) }), vec![a.clone()]),
        ("logistic", Box::new(|t, v| { let y = t.logistic(v[0]); weighted_sum(t, y, 10) }), vec![a.clone()]),
        ("relu", Box::new(|t, v| { let y = t.relu(v[0]); weighted_sum(t, y, 11) }), vec![a.clone()]),
        ("sum", Box::new(|t, v| { let y = t.hadamard(v[0], v[0])?; Ok(t.sum(y)) }), vec![a.clone()]),
        ("segment_sum", Box::new(|t, v| { let y = t.segment_sum(v[0], bounds.clone())?; let y = t.hadamard(y, y)?; weighted_sum(t, y, 12) }), vec![a.clone()]),
        ("segment_mean", Box::new(|t, v| { let y = t.segment_mean(v[0], bounds.clone())?; let y = t.hadamard(y, y)?; weighted_sum(t, y, 13) }), vec![a.clone()]),
        ("segment_min", Box::new(|t, v| { let y = t.segment_min(v[0], bounds.clone())?; let y = t.hadamard(y, y)?; weighted_sum(t, y, 14) }), vec![a.clone()]),
        ("segment_softmax_mean", Box::new(|t, v| { let y = t.segment_softmax_mean(v[0], v[1], bounds.clone())?; let y = t.hadamard(y, y)?; weighted_sum(t, y, 15) }), vec![a.clone(), scores.clone()]),
        ("bce_with_logits", Box::new(|t, v| t.bce_with_logits(v[0], &targets)), vec![logit_col.clone()]),
    ];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut run = |name: &str, report: wl2gnn::Result<wl2gnn::tensor::GradCheckReport>| -> Result<(), String> {
        let report = ok(report)?;
        ensure(report.passed && report.checked > 0, format!("{name}: relative error {:e}", report.max_rel_error))?;
        worst = worst.max(report.max_rel_error);
        count += 1;
        Ok(())
    };
    for (name, f, params) in &checks {
        run(name, grad_check(f, params, 1e-6, 1e-4))?;
    }

    // layers on a small batch
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let gs: Vec<Graph> = (0..3)
        .map(|_| {
            let n = rng.gen_range(3..7);
            let g = gnp_graph(n, 0.5, &mut rng);
            let e = g.num_edges();
            g.with_vertex_features(2, random_tensor(n, 2, &mut rng).into_data())
                .unwrap()
                .with_edge_features(1, random_tensor(e, 1, &mut rng).into_data())
                .unwrap()
        })
        .collect();
    let enc = ok(Wl2Encoding::encode_batch(&gs, 2))?;
    let vertices = ok(SparseBatch::vertices(&gs))?;
    let edges = ok(SparseBatch::edge_neighborhoods(&gs))?;
    let row_bounds = enc.row_bounds();
    let (k, ke) = (enc.feature_dim(), edges.features.cols());
    let layer_checks: Vec<Check<'_>> = vec![
        (
            "wl2_conv",
            Box::new(|t, v| {
                let z = t.leaf(enc.z0().clone());
                let w = Wl2LayerVars { w_l: v[0], w_f: v[1], w_g: v[2] };
                let y = wl2_conv(t, &enc, z, w, Activation::Logistic, Activation::Logistic)?;
                let p = pool(t, y, &row_bounds, Pooling::Mean, None)?;
                weighted_sum(t, p, 16)
            }),
            vec![random_tensor(k, 4, &mut rng), random_tensor(k, 4, &mut rng), random_tensor(k, 4, &mut rng)],
        ),
        (
            "gin_layer",
            Box::new(|t, v| {
                let z = t.leaf(vertices.features.clone());
                let y = gin_layer(t, &vertices, z, 0.1, &[DenseVars { w: v[0], b: v[1] }], Activation::Logistic)?;
                let p = pool(t, y, &vertices.bounds, Pooling::Sum, None)?;
                weighted_sum(t, p, 17)
            }),
            vec![random_tensor(2, 3, &mut rng), random_tensor(1, 3, &mut rng)],
        ),
        (
            "gnn2_layer",
            Box::new(|t, v| {
                let z = t.leaf(edges.features.clone());
                let y = gnn2_layer(t, &edges, z, v[0], v[1], Activation::Logistic)?;
                let s = t.matmul(y, v[2])?;
                let p = pool(t, y, &edges.bounds, Pooling::WeightedMean, Some(s))?;
                weighted_sum(t, p, 18)
            }),
            vec![random_tensor(ke, 3, &mut rng), random_tensor(ke, 3, &mut rng), random_tensor(3, 1, &mut rng)],
        ),
        (
            "dense",
            Box::new(|t, v| {
                let x = t.leaf(vertices.features.clone());
                let y = dense(t, x, DenseVars { w: v[0], b: v[1] }, Activation::Logistic)?;
                let p = pool(t, y, &vertices.bounds, Pooling::Min, None)?;
                weighted_sum(t, p, 19)
            }),
            vec![random_tensor(2, 3, &mut rng), random_tensor(1, 3, &mut rng)],
        ),
    ];
    for (name, f, params) in &layer_checks {
        run(name, grad_check(f, params, 1e-6, 1e-4))?;
    }

    let labels = [1.0, 0.0, 1.0];
    for text in [
        "layer=wl2 T=2 d=4 r=2 act=relu pool=weighted_mean",
        "layer=wl2 T=3 d=4 r=1 act=logistic pool=sum",
        "layer=gin T=2 d=4 act=relu pool=mean",
        "layer=gnn2 T=2 d=4 act=logistic pool=weighted_mean",
        "layer=baseline T=2 d=4 act=relu pool=sum",
    ] {
        let spec = ModelSpec::parse(text).unwrap();
        let input = ok(ModelInput::build(&spec, &gs))?;
        // nonzero biases: with the zero-bias init a dead relu row feeds an
        // exact 0 into the next relu, where the derivative is one-sided
        let params = randomized(&spec, input.feature_dim(), &mut rng);
        let report = grad_check(
            |t, v| {
                let z = forward_model(t, &spec, v, &input)?;
                t.bce_with_logits(z, &labels)
            },
            &params,
            1e-6,
            1e-4,
        );
        run(text, report)?;
    }
    Ok(format!("{count} checks (ops, layers, model losses), max relative error {worst:.1e}"))
}

/// Desk-scale TRIANGLE protocol: two graphs per generator cell, one
/// held-out fold of a 5-fold split per seed, a fixed spec per model and no
/// inner holdout, so early stopping watches the training loss.
fn c9_triangle() -> Outcome {
    let start = Instant::now();
    let config = TriangleConfig { samples_per_cell: 2, ..TriangleConfig::default() };
    let ds = ok(generate_triangle_dataset(&config, 7))?.dataset;
    let run = |spec: &str| -> Result<(f64, f64), String> {
        let config = TrainConfig {
            epochs: TRIANGLE_EPOCHS,
            patience: TRIANGLE_EPOCHS,
            seed: 9,
            grid: vec![ModelSpec::parse(spec).unwrap()],
            folds: 5,
            fold_limit: Some(1),
            repeats: 3,
            holdout: 0.0,
            ..TrainConfig::default()
        };
        let results = ok(run_cv(&ds, &config))?;
        let train = results.iter().map(|r| r.train_acc).sum::<f64>() / results.len() as f64;
        Ok((train, mean_test_accuracy(&results)))
    };
    let wl2 = run("layer=wl2 r=2 T=3 d=32 act=relu pool=sum lr=0.003")?;
    let gin = run("layer=gin T=3 d=32 act=relu pool=sum lr=0.003")?;
    let base = run("layer=baseline T=3 d=32 act=relu pool=sum lr=0.003")?;
    let secs = start.elapsed().as_secs_f64();
    let summary = format!(
        "{} graphs; wl2 train {:.3} test {:.3}; gin train {:.3} test {:.3}; baseline test {:.3}; {secs:.0}s",
        ds.len(),
        wl2.0,
        wl2.1,
        gin.0,
        gin.1,
        base.1
    );
    ensure(wl2.0 >= 0.95 && wl2.1 - gin.1 >= 0.05 && base.1 <= 0.65 && secs <= 900.0, summary.clone())?;
    Ok(summary)
}

const TRIANGLE_EPOCHS: usize = 400;

fn c10_scaling() -> Outcome {
    let start = Instant::now();
    let spec = ModelSpec::parse("layer=wl2 T=3 d=32 act=relu").unwrap();
    let timing = TimingConfig { graphs: 16, epochs: 3, ..TimingConfig::default() };
    let ns = [64, 128, 256, 512, 1024, 2048, 4096];
    let rows = ok(epoch_timing(&ns, &[2], &[1], &spec, &timing))?;
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ts: Vec<f64> = rows.iter().map(|r| r.epoch_seconds).collect();
    let time_slope = top_decade_slope(&xs, &ts).ok_or("too few timing points")?;
    let mut gamma_slopes = Vec::new();
    let sizes = TimingConfig { graphs: 2, epochs: 1, ..TimingConfig::default() };
    for r in [1, 2] {
        let rows = ok(epoch_timing(&[96], &[2, 4, 8, 16], &[r], &spec, &sizes))?;
        let ds: Vec<f64> = rows.iter().map(|row| row.d as f64).collect();
        let gs: Vec<f64> = rows.iter().map(|row| row.gamma).collect();
        gamma_slopes.push((r, loglog_slope(&ds, &gs).ok_or("too few gamma points")?));
    }
    let secs = start.elapsed().as_secs_f64();
    let summary = format!(
        "time slope in n {time_slope:.3}; gamma slopes in d {}; {secs:.0}s",
        gamma_slopes.iter().map(|(r, s)| format!("r={r}: {s:.3}")).collect::<Vec<_>>().join(", ")
    );
    ensure(
        (time_slope - 1.0).abs() <= 0.25
            && gamma_slopes.iter().all(|&(r, s)| s <= 2.0 * r as f64 + 0.5)
            && secs <= 600.0,
        summary.clone(),
    )?;
    Ok(summary)
}

fn tu_root() -> Option<PathBuf> {
    std::env::var_os("TU_DATA_DIR").map(PathBuf::from)
}

fn smoke_cv(dir: &Path, count: usize) -> Result<(usize, f64), String> {
    let ds = ok(load_tu_dataset(dir))?;
    let total = ds.len();
    let idx = stratified_subsample(&ds.labels, count, &mut ChaCha8Rng::seed_from_u64(11));
    let sub = ds.subset(&idx);
    let config = TrainConfig {
        epochs: 100,
        patience: 20,
        seed: 11,
        grid: vec![ModelSpec::parse("layer=wl2 r=2 T=3 d=32 act=logistic lr=0.01").unwrap()],
        folds: 10,
        repeats: 1,
        ..TrainConfig::default()
    };
    let results = ok(run_cv(&sub, &config))?;
    Ok((total, mean_test_accuracy(&results)))
}

fn c11_nci1() -> Outcome {
    let Some(root) = tu_root().map(|r| r.join("NCI1")).filter(|p| p.join("NCI1_A.txt").exists()) else {
        let mutag = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/MUTAG");
        let note = match smoke_cv(&mutag, 188) {
            Ok((n, acc)) => format!("pipeline check on bundled MUTAG ({n} graphs): test accuracy {acc:.3}"),
            Err(e) => format!("pipeline check on MUTAG failed: {e}"),
        };
        return Err(format!("NCI1 not found (set TU_DATA_DIR to a directory containing NCI1/); {note}"));
    };
    let (total, acc) = smoke_cv(&root, 200)?;
    let summary = format!("NCI1 has {total} graphs; 200-graph smoke CV test accuracy {acc:.3}");
    ensure(total == 4110 && acc > 0.55, summary.clone())?;
    Ok(summary)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1-WL/2-WL counterexample", c1_counterexample),
        ("edge neighborhood graph refinement", c2_edge_neighborhoods),
        ("2-GNN and GIN regular-graph blindness", c3_regular_blindness),
        ("fixed-weight separating 2-WL-GNN", c4_separating_model),
        ("gather/scatter layer against naive oracle", c5_oracle),
        ("golden batch encoding", c6_golden),
        ("GIN simulation stack", c7_simulation),
        ("gradient suite", c8_gradients),
        ("TRIANGLE desk-scale learning", c9_triangle),
        ("complexity scaling", c10_scaling),
        ("TU ingestion and NCI1 smoke run", c11_nci1),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != k + 1) {
            continue;
        }
        match check() {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
