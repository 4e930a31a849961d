//! Browser bindings: train on 2-d point clouds, rasterize the decision
//! boundary, and expose the learning curves. All drawing happens on the
//! JavaScript side; this crate only moves flat arrays across the boundary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

use hamboost::{
    adaboost_mh, BaseKind, BoostConfig, DataSet, StrongClassifier, WeightInit, WeightScheme,
};

/// A trained classifier plus its per-iteration trace.
#[wasm_bindgen]
pub struct DemoModel {
    model: StrongClassifier,
    train_error: Vec<f64>,
    z_product: Vec<f64>,
    edges: Vec<f64>,
}

#[wasm_bindgen]
impl DemoModel {
    /// Predicted class (0-based) for every cell of a `width x height` grid
    /// spanning `[x0, x1] x [y0, y1]`, row-major with row 0 at `y0`.
    #[wasm_bindgen(js_name = decisionMap)]
    pub fn decision_map(&self, x0: f64, y0: f64, x1: f64, y1: f64, width: u32, height: u32) -> Vec<u8> {
        let mut out = Vec::with_capacity((width * height) as usize);
        for row in 0..height {
            let y = y0 + (y1 - y0) * (row as f64 + 0.5) / height as f64;
            for col in 0..width {
                let x = x0 + (x1 - x0) * (col as f64 + 0.5) / width as f64;
                let (_, label) = self.model.evaluate(&[x, y]).expect("2-d input");
                out.push(label as u8);
            }
        }
        out
    }

    /// Margin between the winning and runner-up score per grid cell,
    /// normalized to `[0, 1]` over the grid. Pairs with `decisionMap` for
    /// confidence shading.
    #[wasm_bindgen(js_name = confidenceMap)]
    pub fn confidence_map(&self, x0: f64, y0: f64, x1: f64, y1: f64, width: u32, height: u32) -> Vec<f64> {
        let mut margins = Vec::with_capacity((width * height) as usize);
        let mut max_margin = 0.0f64;
        for row in 0..height {
            let y = y0 + (y1 - y0) * (row as f64 + 0.5) / height as f64;
            for col in 0..width {
                let x = x0 + (x1 - x0) * (col as f64 + 0.5) / width as f64;
                let (scores, label) = self.model.evaluate(&[x, y]).expect("2-d input");
                let runner_up = scores
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != label)
                    .map(|(_, &s)| s)
                    .fold(f64::NEG_INFINITY, f64::max);
                let margin = scores[label] - runner_up;
                max_margin = max_margin.max(margin);
                margins.push(margin);
            }
        }
        if max_margin > 0.0 {
            for m in &mut margins {
                *m /= max_margin;
            }
        }
        margins
    }

    /// Training one-error after each iteration.
    #[wasm_bindgen(js_name = trainErrorCurve)]
    pub fn train_error_curve(&self) -> Vec<f64> {
        self.train_error.clone()
    }

    /// Running product of the per-iteration normalizers (the bound on the
    /// training one-error).
    #[wasm_bindgen(js_name = boundCurve)]
    pub fn bound_curve(&self) -> Vec<f64> {
        self.z_product.clone()
    }

    /// Edge of the base classifier picked at each iteration.
    #[wasm_bindgen(js_name = edgeCurve)]
    pub fn edge_curve(&self) -> Vec<f64> {
        self.edges.clone()
    }

    pub fn stages(&self) -> u32 {
        self.model.stages.len() as u32
    }
}

/// Trains AdaBoost.MH on interleaved `(x, y)` points with 0-based labels.
/// `base` is `"stump"` or `"tree"`; `tree_nodes` applies to trees only.
#[wasm_bindgen]
pub fn train(
    points: &[f64],
    labels: &[u32],
    classes: u32,
    base: &str,
    tree_nodes: u32,
    iterations: u32,
) -> Result<DemoModel, JsError> {
    train_impl(points, labels, classes, base, tree_nodes, iterations)
        .map_err(|e| JsError::new(&e))
}

fn train_impl(
    points: &[f64],
    labels: &[u32],
    classes: u32,
    base: &str,
    tree_nodes: u32,
    iterations: u32,
) -> Result<DemoModel, String> {
    if points.len() != 2 * labels.len() {
        return Err("need one (x, y) pair per label".into());
    }
    let k = classes as usize;
    let labels_1based: Vec<usize> = labels.iter().map(|&l| l as usize + 1).collect();
    let data = DataSet::from_labels(points.to_vec(), labels.len(), 2, &labels_1based, k)
        .map_err(|e| e.to_string())?;
    let base = match base {
        "stump" => BaseKind::Stump,
        "tree" => BaseKind::Tree { nodes: tree_nodes.max(1) as usize },
        other => return Err(format!("unknown base '{other}'")),
    };
    let scheme = WeightScheme::Balanced;
    let config = BoostConfig::new(iterations.max(1) as usize, base, scheme, 0);
    let (model, trace) = adaboost_mh(&data, WeightInit::Scheme(scheme), &config, None)
        .map_err(|e| e.to_string())?;
    let mut z_product = Vec::with_capacity(trace.records.len());
    let mut running = 1.0;
    for r in &trace.records {
        running *= r.z;
        z_product.push(running);
    }
    Ok(DemoModel {
        model,
        train_error: trace.records.iter().map(|r| r.train_one_error.unwrap_or(f64::NAN)).collect(),
        z_product,
        edges: trace.records.iter().map(|r| r.edge).collect(),
    })
}

/// Synthetic 2-d point clouds as `(x, y, class)` triples in `[-1, 1]^2`.
/// Kinds: `blobs`, `spiral`, `stripes`.
#[wasm_bindgen(js_name = generatePoints)]
pub fn generate_points(kind: &str, n: u32, classes: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    generate_points_impl(kind, n, classes, seed).map_err(|e| JsError::new(&e))
}

fn generate_points_impl(kind: &str, n: u32, classes: u32, seed: u32) -> Result<Vec<f64>, String> {
    let k = classes.clamp(2, 8) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let mut out = Vec::with_capacity(3 * n as usize);
    for i in 0..n as usize {
        let round_robin = i % k;
        let (x, y, class) = match kind {
            "blobs" => {
                let angle = std::f64::consts::TAU * round_robin as f64 / k as f64;
                let (cx, cy) = (0.55 * angle.cos(), 0.55 * angle.sin());
                (
                    cx + gauss(&mut rng) * 0.16,
                    cy + gauss(&mut rng) * 0.16,
                    round_robin,
                )
            }
            "spiral" => {
                let t = rng.gen_range(0.15..1.0);
                let angle = std::f64::consts::TAU * (round_robin as f64 / k as f64 + t * 0.9);
                let r = 0.9 * t;
                (
                    r * angle.cos() + gauss(&mut rng) * 0.025,
                    r * angle.sin() + gauss(&mut rng) * 0.025,
                    round_robin,
                )
            }
            "stripes" => {
                // vertical bands; the x coordinate decides the class
                let x: f64 = rng.gen_range(-0.95..0.95);
                let band = (((x + 0.95) / 1.9 * k as f64) as usize).min(k - 1);
                (x, rng.gen_range(-0.95..0.95), band)
            }
            other => return Err(format!("unknown dataset kind '{other}'")),
        };
        out.push(x.clamp(-1.0, 1.0));
        out.push(y.clamp(-1.0, 1.0));
        out.push(class as f64);
    }
    Ok(out)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
