//! Built-in annotated walkthroughs: the qubit Mach-Zehnder experiment and
//! the two-qutrit partial trace.

use num_complex::Complex64 as C64;

use erps::composite::{partial_trace_restricted, ParticleDecomposition, SlopeClass};
use erps::engine::{quantum_predict, ExperimentSpec, PredictOptions};
use erps::field::FiniteField;
use erps::linalg::CMat;
use erps::ops::{Channel, PhaseOps};
use erps::phase::{all_striations, legal_symplectics, point_from_index, Slope};
use erps::quasi::{quasi_of_channel, quasi_of_measurement, wigner_of_state};
use erps::restricted::{restrict_channel, restrict_measurement, restrict_state};

use crate::render::{point_grid, point_matrix, sig12, value_with_exact};

pub fn mach_zehnder_spec() -> ExperimentSpec {
    let field = FiniteField::prime(2).unwrap();
    let s3 = 3.0_f64.sqrt();
    let state = CMat::from_rows(&[
        vec![C64::new(0.75, 0.0), C64::new(0.0, -s3 / 4.0)],
        vec![C64::new(0.0, s3 / 4.0), C64::new(0.25, 0.0)],
    ]);
    let u = CMat::from_rows(&[
        vec![C64::new(s3 / 2.0, 0.0), C64::new(0.0, 0.5)],
        vec![C64::new(0.0, 0.5), C64::new(s3 / 2.0, 0.0)],
    ]);
    let mut effect = CMat::zeros(2);
    effect[(0, 0)] = C64::new(1.0, 0.0);
    ExperimentSpec {
        field,
        state,
        channels: vec![Channel::unitary(&u)],
        effect,
    }
}

/// The qubit interferometer walkthrough: every intermediate grid, the
/// per-framework classical predictions, and the final probability 1/4.
pub fn mach_zehnder() -> String {
    let spec = mach_zehnder_spec();
    let field = &spec.field;
    let ops = PhaseOps::new(field);
    let mut out = String::new();

    out.push_str("Mach-Zehnder interferometer on a single qubit\n");
    out.push_str("=============================================\n\n");
    out.push_str("state      w = (√3/2)|0> + (i/2)|1>\n");
    out.push_str("channel    U = (√3/2) I + (i/2) X   (unbalanced beamsplitter)\n");
    out.push_str("effect     E = |0><0|\n\n");
    out.push_str("Striations of the 2x2 phase space: X (slope 0), Y (slope 1),\n");
    out.push_str("Z (vertical). Grids show q rightward, p upward, origin bottom left.\n\n");

    let q = wigner_of_state(&ops, &spec.state).unwrap();
    out.push_str("Wigner function Q(a|w):\n");
    out.push_str(&point_grid(field, q.values()));
    out.push('\n');

    let striations = all_striations(field);
    let names = ["X", "Y", "Z"];
    out.push_str("Marginals and restricted states:\n");
    let mut restricted_states = Vec::new();
    for (b, name) in striations.iter().zip(names) {
        let r = restrict_state(&q, b).unwrap();
        let lines = r.line_probabilities(field);
        out.push_str(&format!(
            "  P^{name} = ({}, {})\n",
            value_with_exact(lines[0]),
            value_with_exact(lines[1])
        ));
        restricted_states.push(r);
    }
    out.push('\n');
    for (r, name) in restricted_states.iter().zip(names) {
        out.push_str(&format!("R^{name}(a|w):\n"));
        out.push_str(&point_grid(field, r.values()));
    }
    out.push('\n');

    let qu = quasi_of_channel(&ops, &spec.channels[0]).unwrap();
    out.push_str("Transition quasiprobabilities Q_U(b|a), rows b, columns a,\n");
    out.push_str("points ordered 00, 01, 10, 11:\n");
    out.push_str(&point_matrix(field, qu.values()));
    out.push('\n');

    let legal = legal_symplectics(field);
    let frame_names = ["I", "R", "L"];
    let mut restricted_channels = Vec::new();
    for (s, name) in legal.iter().zip(frame_names) {
        let rc = restrict_channel(&qu, s).unwrap();
        out.push_str(&format!(
            "Displacement-class distribution P^{name} over (00, 01, 10, 11): ({})\n",
            rc.class_dist()
                .iter()
                .map(|&v| value_with_exact(v))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        let d2 = 4;
        let cond: Vec<f64> = (0..d2 * d2)
            .map(|i| {
                rc.conditional(
                    field,
                    point_from_index(field, i / d2),
                    point_from_index(field, i % d2),
                )
            })
            .collect();
        out.push_str(&format!("R^{name}_U(b|a):\n"));
        out.push_str(&point_matrix(field, &cond));
        out.push('\n');
        restricted_channels.push(rc);
    }

    out.push_str("Nonuniform premeasurement classical states (channel applied to a\n");
    out.push_str("restricted state), with their left-line (q = 0) marginals:\n");
    for (si, s_name) in frame_names.iter().enumerate() {
        for (bi, b_name) in names.iter().enumerate() {
            let rc = &restricted_channels[si];
            let rb = &restricted_states[bi];
            let v: Vec<f64> = (0..4)
                .map(|b| {
                    (0..4)
                        .map(|a| {
                            rc.conditional(
                                field,
                                point_from_index(field, b),
                                point_from_index(field, a),
                            ) * rb.values()[a]
                        })
                        .sum()
                })
                .collect();
            let uniform = v.iter().all(|&x| (x - 0.25).abs() < 1e-12);
            if uniform {
                continue;
            }
            out.push_str(&format!("R^{s_name}_U R^{b_name}:\n"));
            out.push_str(&point_grid(field, &v));
            out.push_str(&format!(
                "  left-line marginal: {}\n\n",
                value_with_exact(v[0] + v[1])
            ));
        }
    }

    let qm = quasi_of_measurement(&ops, &spec.effect).unwrap();
    out.push_str("Measurement function Q(E|b):\n");
    out.push_str(&point_grid(field, qm.values()));
    out.push('\n');
    for (b, name) in striations.iter().zip(names) {
        let rm = restrict_measurement(&qm, b).unwrap();
        out.push_str(&format!("R^{name}(E|b):\n"));
        out.push_str(&point_grid(field, rm.values()));
    }
    out.push('\n');

    let outq = quantum_predict(
        &spec,
        &PredictOptions {
            report_rows: 64,
            ..PredictOptions::default()
        },
    )
    .unwrap();
    let slope_name = |slope: Slope| match slope.order_index(field) {
        0 => "X",
        1 => "Y",
        _ => "Z",
    };
    let symplectic_name = |s: &erps::phase::SymplecticMatrix| {
        frame_names[legal.iter().position(|t| t == s).unwrap()]
    };
    out.push_str("Coherent frameworks (B' = SB) and their classical predictions:\n");
    out.push_str("  framework       R^F               dR^F\n");
    for row in &outq.rows {
        let label = format!(
            "(B'={}, {}, B={})",
            slope_name(row.framework.meas),
            symplectic_name(&row.framework.chain[0]),
            slope_name(row.framework.prep)
        );
        out.push_str(&format!(
            "  {:14}  {:<16}  {:<16}\n",
            label,
            value_with_exact(row.classical),
            value_with_exact(row.delta)
        ));
    }
    out.push('\n');
    out.push_str(&format!(
        "sum of nonrandom parts  {}\n",
        value_with_exact(outq.delta_sum)
    ));
    out.push_str(&format!(
        "random part (1/d) tr E  {}\n",
        value_with_exact(outq.random_part)
    ));
    out.push_str(&format!(
        "probability             {}\n",
        value_with_exact(outq.probability)
    ));
    out
}

/// The two-qutrit walkthrough: the 9×9 Wigner function, a restricted
/// distribution, slope classification, and the single-particle family
/// after the partial trace.
pub fn two_qutrit() -> String {
    let field = FiniteField::new(3, 2, None).unwrap();
    let dec = ParticleDecomposition::new(&field, 1, None).unwrap();
    let base = dec.base().clone();
    let ops = PhaseOps::new(&field);
    let mut out = String::new();

    out.push_str("Two qutrits over F_9\n");
    out.push_str("====================\n\n");
    out.push_str("field      F_9 = F_3[x]/(x^2+1), x^2 = 2\n");
    out.push_str(&format!(
        "q basis    ({}, {})   p basis (dual)   ({}, {})\n",
        field.fmt_element(dec.q_basis()[0]),
        field.fmt_element(dec.q_basis()[1]),
        field.fmt_element(dec.p_basis()[0]),
        field.fmt_element(dec.p_basis()[1]),
    ));
    out.push_str("state      |psi> = (|00>+|01>+|10>+|11>)/(2√2) + |22>/√2\n\n");

    let coeff = 1.0 / (2.0 * 2.0_f64.sqrt());
    let mut amps = vec![C64::new(0.0, 0.0); 9];
    for (m1, m2, c) in [
        (0, 0, coeff),
        (0, 1, coeff),
        (1, 0, coeff),
        (1, 1, coeff),
        (2, 2, 1.0 / 2.0_f64.sqrt()),
    ] {
        let idx = dec
            .q_from_coords(&[base.element(m1), base.element(m2)])
            .index();
        amps[idx] = C64::new(c, 0.0);
    }
    let w = CMat::projector(&amps);
    let q = wigner_of_state(&ops, &w).unwrap();

    // display layout: columns by (q1, q2), rows top-down by (p1, p2)
    let display = |values: &[f64]| -> String {
        let mut grid = [[0.0f64; 9]; 9];
        for (idx, &v) in values.iter().enumerate() {
            let pt = point_from_index(&field, idx);
            let coords = dec.particle_coords(pt);
            let col = coords[0].q.index() * 3 + coords[1].q.index();
            let row = 8 - (coords[0].p.index() * 3 + coords[1].p.index());
            grid[row][col] = v;
        }
        let flat: Vec<f64> = grid.iter().flatten().copied().collect();
        if let Some((nums, denom)) = crate::render::common_denominator(&flat) {
            let mut s = String::new();
            for r in 0..9 {
                s.push_str("  ");
                for c in 0..9 {
                    s.push_str(&format!("{:>3}", nums[r * 9 + c]));
                }
                s.push('\n');
            }
            s.push_str(&format!("  x 1/{denom}\n"));
            s
        } else {
            let mut s = String::new();
            for row in &grid {
                s.push_str("  ");
                for v in row {
                    s.push_str(&format!("{:>16}", sig12(*v)));
                }
                s.push('\n');
            }
            s
        }
    };

    out.push_str("Wigner function on the 9x9 phase space, columns (q1,q2) from 00\n");
    out.push_str("to 22, rows (p1,p2) from 22 down to 00:\n");
    out.push_str(&display(q.values()));
    out.push('\n');

    let m2 = field.from_int(2);
    let b2 = all_striations(&field)
        .into_iter()
        .find(|b| b.slope() == Slope::Finite(m2))
        .unwrap();
    let rb = restrict_state(&q, &b2).unwrap();
    out.push_str("Restricted distribution for the slope-2 striation:\n");
    out.push_str(&display(rb.values()));
    out.push('\n');

    out.push_str("Slope classification for the partial trace onto particle 1:\n");
    for b in all_striations(&field) {
        let label = b.slope().label(&field);
        match dec.classify_slope(b.slope()) {
            SlopeClass::MapsTo(slope) => out.push_str(&format!(
                "  slope {:4} -> single-particle slope {}\n",
                label,
                slope.label(&base)
            )),
            SlopeClass::UniformCovering => out.push_str(&format!(
                "  slope {label:4} -> covers the small phase space uniformly\n"
            )),
        }
    }
    out.push('\n');

    let family: Vec<_> = all_striations(&field)
        .iter()
        .map(|b| restrict_state(&q, b).unwrap())
        .collect();
    let small = partial_trace_restricted(&dec, &family).unwrap();
    out.push_str("Single-particle family after tracing out particle 2\n");
    out.push_str("(the slope-2 striation lands on slope 1):\n");
    for r in &small {
        out.push_str(&format!("  slope {}:\n", r.slope().label(&base)));
        out.push_str(&point_grid(&base, r.values()));
    }
    out
}
