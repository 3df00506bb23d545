//! Text rendering: phase-space grids, exact value recognition, aligned
//! tables.

use erps::field::FiniteField;
use erps::phase::{point_index, PhasePoint};

/// Formats with 12 significant digits, trimming trailing zeros.
pub fn sig12(v: f64) -> String {
    if v.abs() < 1e-13 {
        return "0".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let scale = 10f64.powi(11 - exp);
    let rounded = (v * scale).round() / scale;
    format!("{rounded}")
}

/// Recognizes `v` as `(a + b√3)/c` with small integers; returns an exact
/// string such as `(3-√3)/8`.
pub fn sqrt3_exact(v: f64) -> Option<String> {
    let s3 = 3.0_f64.sqrt();
    for c in [1i64, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 72, 96, 128] {
        let target = v * c as f64;
        for b in -24i64..=24 {
            let a = (target - b as f64 * s3).round();
            if a.abs() > 64.0 {
                continue;
            }
            if (target - a - b as f64 * s3).abs() < 1e-9 {
                return Some(render_sqrt3(a as i64, b, c));
            }
        }
    }
    None
}

fn render_sqrt3(a: i64, b: i64, c: i64) -> String {
    let num = match (a, b) {
        (0, 0) => "0".to_string(),
        (a, 0) => format!("{a}"),
        (0, 1) => "√3".to_string(),
        (0, -1) => "-√3".to_string(),
        (0, b) => format!("{b}√3"),
        (a, 1) => format!("{a}+√3"),
        (a, -1) => format!("{a}-√3"),
        (a, b) if b > 0 => format!("{a}+{b}√3"),
        (a, b) => format!("{a}-{}√3", -b),
    };
    if c == 1 {
        num
    } else if a != 0 && b != 0 {
        format!("({num})/{c}")
    } else {
        format!("{num}/{c}")
    }
}

/// Both representations: `0.158493649054 = (3-√3)/8`.
pub fn value_with_exact(v: f64) -> String {
    match sqrt3_exact(v) {
        Some(exact) => format!("{} = {exact}", sig12(v)),
        None => sig12(v),
    }
}

/// Tries to express all values over one small common denominator; returns
/// the numerators and the denominator.
pub fn common_denominator(values: &[f64]) -> Option<(Vec<i64>, i64)> {
    'outer: for c in 1..=144i64 {
        let mut nums = Vec::with_capacity(values.len());
        for &v in values {
            let scaled = v * c as f64;
            let n = scaled.round();
            if (scaled - n).abs() > 1e-9 {
                continue 'outer;
            }
            nums.push(n as i64);
        }
        return Some((nums, c));
    }
    None
}

/// Renders a `d × d` phase-space grid with `q` increasing along columns
/// and `p` decreasing down rows, exactly as pictured with the origin at
/// the bottom left. Cells are chosen exact when recognizable.
pub fn point_grid(field: &FiniteField, values: &[f64]) -> String {
    let d = field.order();
    let cell = |q: usize, p: usize| values[point_index(field, point(field, q, p))];
    let exact_all = (0..d * d).all(|i| sqrt3_exact(values[i]).is_some());
    let mut cells = vec![vec![String::new(); d]; d];
    if let Some((nums, denom)) = common_denominator(values) {
        let mut grid = String::new();
        for (row, p) in (0..d).rev().enumerate() {
            for q in 0..d {
                let n = nums[point_index(field, point(field, q, p))];
                cells[row][q] = format!("{n}");
            }
        }
        grid.push_str(&render_cells(&cells));
        if denom > 1 {
            grid.push_str(&format!("  x 1/{denom}\n"));
        }
        return grid;
    }
    for (row, p) in (0..d).rev().enumerate() {
        for q in 0..d {
            let v = cell(q, p);
            cells[row][q] = if exact_all {
                sqrt3_exact(v).unwrap()
            } else {
                sig12(v)
            };
        }
    }
    render_cells(&cells)
}

fn point(field: &FiniteField, q: usize, p: usize) -> PhasePoint {
    PhasePoint::new(field.element(q), field.element(p))
}

fn render_cells(cells: &[Vec<String>]) -> String {
    let width = cells
        .iter()
        .flatten()
        .map(|s| s.chars().count())
        .max()
        .unwrap_or(1);
    let mut out = String::new();
    for row in cells {
        out.push_str("  ");
        for cell in row {
            let pad = width - cell.chars().count();
            out.push_str(&" ".repeat(pad));
            out.push_str(cell);
            out.push(' ');
        }
        out.push('\n');
    }
    out
}

/// A square matrix indexed by phase points (rows β, columns α), rendered
/// with exact cells when recognizable.
pub fn point_matrix(field: &FiniteField, values: &[f64]) -> String {
    let d2 = field.order() * field.order();
    assert_eq!(values.len(), d2 * d2);
    let mut cells = vec![vec![String::new(); d2]; d2];
    if let Some((nums, denom)) = common_denominator(values) {
        for b in 0..d2 {
            for a in 0..d2 {
                cells[b][a] = format!("{}", nums[b * d2 + a]);
            }
        }
        let rendered = render_cells(&cells);
        return if denom > 1 {
            format!("{rendered}  x 1/{denom}\n")
        } else {
            rendered
        };
    }
    for b in 0..d2 {
        for a in 0..d2 {
            let v = values[b * d2 + a];
            cells[b][a] = sqrt3_exact(v).unwrap_or_else(|| sig12(v));
        }
    }
    render_cells(&cells)
}
