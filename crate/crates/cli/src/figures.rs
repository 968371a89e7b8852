//! Named artifact presets: each builds the data files behind one figure of
//! the demo suite (fields, series, networks).

use regionlab_core::activation::sigma;
use regionlab_core::error::Result;
use regionlab_core::field::{eval_field, eval_fn_field, FieldMap, FieldQuantity, GridSpec, Labeling};
use regionlab_core::region::amplification_for_range;
use regionlab_core::trainer::{run_experiment, PresetConfig, Series};
use regionlab_core::{presets, Activation, Matrix, Network, Vector};

/// One output artifact of a preset run.
pub enum Artifact {
    Field(FieldMap),
    Series(Series),
    Network { name: String, net: Network },
}

fn single_unit_net(a: [f64; 2], beta: f64, act: Activation) -> Network {
    Network::from_parts(
        2,
        vec![(Matrix::from_rows(&[a]), Vector::from_slice(&[beta]), act)],
    )
    .expect("single unit net")
}

fn renamed(mut map: FieldMap, name: &str) -> FieldMap {
    map.name = name.into();
    map
}

fn abs_field(mut map: FieldMap, name: &str) -> FieldMap {
    for v in &mut map.values {
        *v = v.abs();
    }
    map.name = name.into();
    map
}

/// Linear map, its soft halfspace, and the sharpened shifted variant.
pub fn fig2() -> Result<Vec<Artifact>> {
    let grid = GridSpec::square(3.0, 201);
    let soft = single_unit_net([1.5, 0.5], 0.0, Activation::sigmoid(1.0));
    let sharp = single_unit_net([6.0, 2.0], 12.0, Activation::sigmoid(1.0));
    Ok(vec![
        Artifact::Field(renamed(
            eval_field(&soft, &grid, FieldQuantity::PreActivation { layer: 1, unit: 0 }, None)?,
            "linear_map",
        )),
        Artifact::Field(renamed(
            eval_field(&soft, &grid, FieldQuantity::LayerOutput { layer: 1, unit: 0 }, None)?,
            "soft_halfspace",
        )),
        Artifact::Field(renamed(
            eval_field(&sharp, &grid, FieldQuantity::LayerOutput { layer: 1, unit: 0 }, None)?,
            "sharp_halfspace",
        )),
    ])
}

/// Combined-region transition analytics: slice fields at three offsets plus
/// gain, shift, and width curves over the offset range.
pub fn fig5() -> Result<Vec<Artifact>> {
    use regionlab_core::region::{transition_shift, transition_width};

    let grid = GridSpec::square(6.0, 201);
    let mut artifacts = Vec::new();
    for (tag, beta) in [("beta10", 1.0), ("beta18", 1.8), ("beta06", 0.6)] {
        let gamma = amplification_for_range(beta, 0.995)?;
        let net = Network::from_parts(
            2,
            vec![
                (
                    Matrix::identity(2),
                    Vector::from_slice(&[0.0, 0.0]),
                    Activation::sigmoid(1.0),
                ),
                (
                    Matrix::from_rows(&[[1.0, 1.0]]),
                    Vector::from_slice(&[beta]),
                    Activation::sigmoid(gamma),
                ),
            ],
        )?;
        artifacts.push(Artifact::Field(renamed(
            eval_field(&net, &grid, FieldQuantity::LayerOutput { layer: 2, unit: 0 }, None)?,
            &format!("combined_{tag}"),
        )));
    }

    let betas: Vec<f64> = (1..200).map(|i| i as f64 * 0.01).collect();
    let gamma_series = Series {
        name: "gamma".into(),
        index_label: "beta".into(),
        index: betas.clone(),
        values: betas
            .iter()
            .map(|&b| amplification_for_range(b, 0.995).unwrap())
            .collect(),
    };
    let shift_series = Series {
        name: "shift".into(),
        index_label: "beta".into(),
        index: betas.clone(),
        values: betas.iter().map(|&b| transition_shift(b).unwrap()).collect(),
    };
    artifacts.push(Artifact::Series(gamma_series));
    artifacts.push(Artifact::Series(shift_series));
    for mult in [1.0, 2.0, 4.0] {
        let values: Vec<f64> = betas
            .iter()
            .map(|&b| {
                let g = amplification_for_range(b, 0.995).unwrap();
                transition_width(b, mult * g, 0.95).unwrap()
            })
            .collect();
        artifacts.push(Artifact::Series(Series {
            name: format!("width_gamma_x{}", mult as i64),
            index_label: "beta".into(),
            index: betas.clone(),
            values,
        }));
    }
    Ok(artifacts)
}

/// Level-set surface of the two-unit sum `sigma(x) + sigma(y)`.
pub fn fig6() -> Result<Vec<Artifact>> {
    let grid = GridSpec::square(6.0, 201);
    let map = eval_fn_field(&grid, "sigma_sum", |x, y| sigma(1.0, x) + sigma(1.0, y));
    Ok(vec![Artifact::Field(map)])
}

/// One-dimensional posterior/loss/gradient profiles.
pub fn fig7() -> Result<Vec<Artifact>> {
    let report = run_experiment(&PresetConfig::named("motivational-1d"))?;
    let mut artifacts: Vec<Artifact> = report.series.into_iter().map(Artifact::Series).collect();
    for (name, net) in report.networks {
        artifacts.push(Artifact::Network { name, net });
    }
    Ok(artifacts)
}

/// Maximum gradient-component maps per layer for three weight scalings.
pub fn fig8() -> Result<Vec<Artifact>> {
    let grid = GridSpec::square(3.0, 201);
    let labels = Labeling::XorQuadrant;
    let mut artifacts = Vec::new();
    for scale in [1, 2, 3] {
        let net = presets::xor_demo_network(scale as f64);
        for layer in 1..=3 {
            artifacts.push(Artifact::Field(renamed(
                eval_field(&net, &grid, FieldQuantity::MaxGradWeight { layer }, Some(&labels))?,
                &format!("max_grad_weight_{layer}_scale{scale}"),
            )));
        }
    }
    Ok(artifacts)
}

/// Ground truth, layer outputs, and posteriors of the demo network.
pub fn fig10() -> Result<Vec<Artifact>> {
    let grid = GridSpec::square(3.0, 201);
    let net = presets::xor_demo_network(1.0);
    let mut artifacts = vec![Artifact::Field(eval_fn_field(&grid, "class_truth", |x, y| {
        presets::xor_quadrant_class(x, y) as f64
    }))];
    for unit in 0..2 {
        artifacts.push(Artifact::Field(eval_field(
            &net,
            &grid,
            FieldQuantity::LayerOutput { layer: 1, unit },
            None,
        )?));
    }
    for unit in 0..4 {
        artifacts.push(Artifact::Field(eval_field(
            &net,
            &grid,
            FieldQuantity::LayerOutput { layer: 2, unit },
            None,
        )?));
    }
    for class in 0..2 {
        artifacts.push(Artifact::Field(eval_field(
            &net,
            &grid,
            FieldQuantity::Posterior { class },
            None,
        )?));
    }
    Ok(artifacts)
}

/// The twelve error-backpropagation panels: adjoints, masks, outputs and
/// gradient components walking from the output layer to the first.
pub fn fig11() -> Result<Vec<Artifact>> {
    let grid = GridSpec::square(3.0, 201);
    let net = presets::xor_demo_network(1.0);
    let labels = Labeling::XorQuadrant;
    let l = Some(&labels);
    let f = |q: FieldQuantity| eval_field(&net, &grid, q, l);
    Ok(vec![
        Artifact::Field(f(FieldQuantity::AdjointY { layer: 3, unit: 0 })?),
        Artifact::Field(abs_field(
            f(FieldQuantity::LayerOutput { layer: 2, unit: 1 })?,
            "abs_layer_output_2_1",
        )),
        Artifact::Field(f(FieldQuantity::GradWeight { layer: 3, row: 0, col: 1 })?),
        Artifact::Field(f(FieldQuantity::AdjointZ { layer: 3, unit: 1 })?),
        Artifact::Field(f(FieldQuantity::Mask { layer: 2, unit: 1 })?),
        Artifact::Field(f(FieldQuantity::AdjointY { layer: 2, unit: 1 })?),
        Artifact::Field(abs_field(
            f(FieldQuantity::LayerOutput { layer: 1, unit: 0 })?,
            "abs_layer_output_1_0",
        )),
        Artifact::Field(f(FieldQuantity::GradWeight { layer: 2, row: 1, col: 0 })?),
        Artifact::Field(f(FieldQuantity::AdjointZ { layer: 2, unit: 0 })?),
        Artifact::Field(f(FieldQuantity::Mask { layer: 1, unit: 0 })?),
        Artifact::Field(f(FieldQuantity::AdjointY { layer: 1, unit: 0 })?),
        Artifact::Field(f(FieldQuantity::GradWeight { layer: 1, row: 0, col: 1 })?),
    ])
}

fn two_layer(first: (Matrix, Vector, Activation), second: (Matrix, Vector, Activation)) -> Result<Network> {
    Network::from_parts(2, vec![first, second])
}

/// Two sharp halfspaces and their Boolean combinations.
pub fn fig3() -> Result<Vec<Artifact>> {
    let grid = GridSpec::square(1.0, 201);
    let (w, b, gamma) = presets::boolean_demo_first_layer();
    let first = || {
        (
            Matrix::from_rows(&w),
            Vector::from_slice(&b),
            Activation::sigmoid(gamma),
        )
    };
    let base = Network::from_parts(2, vec![first()])?;
    let g3 = Activation::sigmoid(3.0);

    let complement = two_layer(
        first(),
        (
            Matrix::from_rows(&[[-1.0, 0.0]]),
            Vector::from_slice(&[0.0]),
            g3,
        ),
    )?;
    let intersection = two_layer(
        first(),
        (
            Matrix::from_rows(&[[1.0, 1.0]]),
            Vector::from_slice(&[1.5]),
            g3,
        ),
    )?;
    let union = two_layer(
        first(),
        (
            Matrix::from_rows(&[[1.0, 1.0]]),
            Vector::from_slice(&[-1.5]),
            g3,
        ),
    )?;
    // (R1^c ∩ R2) ∪ (R1 ∩ R2^c): mixed-sign intersections, then a union.
    let xor = Network::from_parts(
        2,
        vec![
            first(),
            (
                Matrix::from_rows(&[[-1.0, 1.0], [1.0, -1.0]]),
                Vector::from_slice(&[1.5, 1.5]),
                g3,
            ),
            (
                Matrix::from_rows(&[[1.0, 1.0]]),
                Vector::from_slice(&[-1.5]),
                g3,
            ),
        ],
    )?;

    let out = |net: &Network, name: &str| -> Result<Artifact> {
        let layer = net.n_layers();
        Ok(Artifact::Field(renamed(
            eval_field(net, &grid, FieldQuantity::LayerOutput { layer, unit: 0 }, None)?,
            name,
        )))
    };
    Ok(vec![
        Artifact::Field(renamed(
            eval_field(&base, &grid, FieldQuantity::LayerOutput { layer: 1, unit: 0 }, None)?,
            "region_r1",
        )),
        Artifact::Field(renamed(
            eval_field(&base, &grid, FieldQuantity::LayerOutput { layer: 1, unit: 1 }, None)?,
            "region_r2",
        )),
        out(&complement, "complement_r1")?,
        out(&intersection, "intersection")?,
        out(&union, "union")?,
        out(&xor, "xor")?,
        Artifact::Network {
            name: "xor_network".into(),
            net: xor,
        },
    ])
}

/// Eight weighted halfspaces combined by one thresholded unit.
///
/// Outer axis-aligned halfspaces (offset 2, weight 2) and inner diagonal
/// ones (offset 2.5, weight 1); logistic first layer so unit contributions
/// add from 0 to 12.
pub fn fig4() -> Result<Vec<Artifact>> {
    let grid = GridSpec::square(3.0, 201);
    let outer: [[f64; 2]; 4] = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
    let inner: [[f64; 2]; 4] = [[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]];
    let mut rows: Vec<[f64; 2]> = Vec::new();
    rows.extend_from_slice(&outer);
    rows.extend_from_slice(&inner);
    let bias: Vec<f64> = vec![-2.0, -2.0, -2.0, -2.0, -2.5, -2.5, -2.5, -2.5];
    let weights_mixed = [2.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0];

    let mut artifacts = Vec::new();
    // Total step weight per cell.
    artifacts.push(Artifact::Field(eval_fn_field(&grid, "cell_weights", |x, y| {
        rows.iter()
            .zip(&bias)
            .zip(&weights_mixed)
            .map(|((a, &b), &w)| {
                if a[0] * x + a[1] * y - b >= 0.0 {
                    w
                } else {
                    0.0
                }
            })
            .sum()
    })));

    let build = |row_set: &[[f64; 2]], b: &[f64], g1: f64, w2: &[f64], beta: f64, g2: f64| -> Result<Network> {
        Network::from_parts(
            2,
            vec![
                (
                    Matrix::from_rows(row_set),
                    Vector::from_slice(b),
                    Activation::logistic(g1),
                ),
                (
                    Matrix::from_rows(&[w2]),
                    Vector::from_slice(&[beta]),
                    Activation::sigmoid(g2),
                ),
            ],
        )
    };

    let cases: Vec<(&str, Network)> = vec![
        (
            "mixed_beta95",
            build(&rows, &bias, 10.0, &weights_mixed, 9.5, 50.0)?,
        ),
        (
            "mixed_beta85",
            build(&rows, &bias, 10.0, &weights_mixed, 8.5, 50.0)?,
        ),
        (
            "unit_beta45",
            build(&rows, &bias, 10.0, &[1.0; 8], 4.5, 50.0)?,
        ),
        (
            "mixed_beta65_soft",
            build(&rows, &bias, 10.0, &weights_mixed, 6.5, 1.0)?,
        ),
        (
            "outer_circle",
            build(&rows[..4], &bias[..4], 1.0, &[2.0; 4], 6.5, 50.0)?,
        ),
    ];
    for (name, net) in cases {
        artifacts.push(Artifact::Field(renamed(
            eval_field(&net, &grid, FieldQuantity::LayerOutput { layer: 2, unit: 0 }, None)?,
            name,
        )));
    }
    Ok(artifacts)
}

/// A halfspace and a ball-like primitive combined into a set difference.
pub fn fig9() -> Result<Vec<Artifact>> {
    use regionlab_core::region::{primitive_eval, Primitive};

    let grid = GridSpec::square(3.0, 201);
    let halfspace = Primitive::Hyperplane {
        a: Vector::from_slice(&[1.0, 0.3]),
        beta: 0.5,
    };
    let ball = Primitive::Ellipsoid {
        a: Matrix::identity(2),
        b: Vector::from_slice(&[0.8, 0.0]),
        alpha: -1.0,
        beta: 1.5,
    };
    let r1 = eval_fn_field(&grid, "halfspace_region", |x, y| {
        sigma(3.0, primitive_eval(&halfspace, &Vector::from_slice(&[x, y])).unwrap())
    });
    let r2 = eval_fn_field(&grid, "ball_region", |x, y| {
        sigma(3.0, primitive_eval(&ball, &Vector::from_slice(&[x, y])).unwrap())
    });
    // R1 ∩ R2^c on the soft memberships.
    let mut diff_values = Vec::with_capacity(grid.n_nodes());
    for (a, b) in r1.values.iter().zip(&r2.values) {
        diff_values.push(sigma(3.0, a - b - 1.5));
    }
    let diff = FieldMap {
        spec: grid,
        values: diff_values,
        name: "difference".into(),
    };
    Ok(vec![Artifact::Field(r1), Artifact::Field(r2), Artifact::Field(diff)])
}
