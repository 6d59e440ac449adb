//! Finite filtered probability space and the conditional-calculus primitives:
//! conditional expectation, conditional sup/inf, sigma-stable gluing, and the
//! locality check. Everything is per-atom: almost-sure equality on a finite
//! space with strictly positive atom weights is plain equality.

use crate::error::{Error, Result};
use crate::ext::{ExtReal, Finite, NegInf, PosInf};
use rand::Rng;

/// Atoms with strictly positive probabilities plus a refining sequence of
/// partitions indexed `t = 0..=T`. Zero-probability atoms are rejected so no
/// quotienting is ever needed.
#[derive(Clone, Debug)]
pub struct FilteredSpace {
    probs: Vec<f64>,
    partitions: Vec<Vec<Vec<usize>>>,
    /// `cell_index[t][atom]` = index of the cell of `partitions[t]` holding `atom`.
    cell_index: Vec<Vec<usize>>,
}

impl FilteredSpace {
    pub fn new(probs: Vec<f64>, partitions: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let n = probs.len();
        let sum: f64 = probs.iter().sum();
        if n == 0 || probs.iter().any(|&p| p <= 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::BadProbabilities { sum });
        }
        if partitions.is_empty() {
            return Err(Error::NotAPartition { level: 0 });
        }
        let mut cell_index = Vec::with_capacity(partitions.len());
        for (t, cells) in partitions.iter().enumerate() {
            let mut idx = vec![usize::MAX; n];
            for (c, cell) in cells.iter().enumerate() {
                if cell.is_empty() {
                    return Err(Error::NotAPartition { level: t });
                }
                for &a in cell {
                    if a >= n || idx[a] != usize::MAX {
                        return Err(Error::NotAPartition { level: t });
                    }
                    idx[a] = c;
                }
            }
            if idx.iter().any(|&c| c == usize::MAX) {
                return Err(Error::NotAPartition { level: t });
            }
            cell_index.push(idx);
        }
        // refinement: two atoms sharing a cell at t+1 must share a cell at t
        for t in 0..partitions.len() - 1 {
            for cell in &partitions[t + 1] {
                let c0 = cell_index[t][cell[0]];
                if cell.iter().any(|&a| cell_index[t][a] != c0) {
                    return Err(Error::NotRefining { level: t + 1 });
                }
            }
        }
        Ok(FilteredSpace {
            probs,
            partitions,
            cell_index,
        })
    }

    /// Uniform atoms with the given partition sequence.
    pub fn uniform(n: usize, partitions: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n], partitions)
    }

    pub fn n_atoms(&self) -> usize {
        self.probs.len()
    }

    /// Largest time index `T`.
    pub fn horizon(&self) -> usize {
        self.partitions.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cells(&self, level: usize) -> &[Vec<usize>] {
        &self.partitions[level]
    }

    pub fn cell_of(&self, level: usize, atom: usize) -> usize {
        self.cell_index[level][atom]
    }

    /// Index of the finest level stored (its cells need not be singletons).
    pub fn finest_level(&self) -> usize {
        self.partitions.len() - 1
    }

    /// True when `values` is constant on every cell of `partitions[level]`.
    pub fn is_measurable(&self, level: usize, values: &[ExtReal]) -> bool {
        self.partitions[level]
            .iter()
            .all(|cell| cell.iter().all(|&a| values[a] == values[cell[0]]))
    }

    fn check_measurable(&self, level: usize, values: &[ExtReal]) -> Result<()> {
        for (c, cell) in self.partitions[level].iter().enumerate() {
            for &a in cell {
                if values[a] != values[cell[0]] {
                    return Err(Error::MeasurabilityViolation {
                        level,
                        cell: c,
                        a: cell[0],
                        b: a,
                    });
                }
            }
        }
        Ok(())
    }

    /// P(cell) for each cell at `level`.
    pub fn cell_probs(&self, level: usize) -> Vec<f64> {
        self.partitions[level]
            .iter()
            .map(|cell| cell.iter().map(|&a| self.probs[a]).sum())
            .collect()
    }
}

/// An extended-real random variable constant on every cell of its level.
#[derive(Clone, Debug, PartialEq)]
pub struct CondValue {
    pub level: usize,
    pub values: Vec<ExtReal>,
}

impl CondValue {
    pub fn new(space: &FilteredSpace, level: usize, values: Vec<ExtReal>) -> Result<Self> {
        if values.len() != space.n_atoms() {
            return Err(Error::Invalid(format!(
                "expected {} atom values, got {}",
                space.n_atoms(),
                values.len()
            )));
        }
        space.check_measurable(level, &values)?;
        Ok(CondValue { level, values })
    }

    pub fn from_f64(space: &FilteredSpace, level: usize, values: &[f64]) -> Result<Self> {
        Self::new(space, level, values.iter().map(|&v| ExtReal::from(v)).collect())
    }

    /// Constant everywhere, measurable at any level.
    pub fn constant(space: &FilteredSpace, level: usize, v: ExtReal) -> Self {
        CondValue {
            level,
            values: vec![v; space.n_atoms()],
        }
    }

    /// One value per cell of `partitions[level]`, broadcast to atoms.
    pub fn from_cell_values(
        space: &FilteredSpace,
        level: usize,
        per_cell: &[ExtReal],
    ) -> Result<Self> {
        if per_cell.len() != space.cells(level).len() {
            return Err(Error::Invalid("cell-value count mismatch".into()));
        }
        let mut values = vec![Finite(0.0); space.n_atoms()];
        for (cell, &v) in space.cells(level).iter().zip(per_cell) {
            for &a in cell {
                values[a] = v;
            }
        }
        Ok(CondValue { level, values })
    }

    /// The constant this variable takes on `cell` of its level.
    pub fn on_cell(&self, space: &FilteredSpace, cell: usize) -> ExtReal {
        self.values[space.cells(self.level)[cell][0]]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(ExtReal) -> ExtReal) -> CondValue {
        CondValue {
            level: self.level,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip(&self, other: &CondValue, f: impl Fn(ExtReal, ExtReal) -> ExtReal) -> CondValue {
        CondValue {
            level: self.level.max(other.level),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Atomwise `>=` up to a slack (negative slack tightens).
    pub fn ge_atomwise(&self, other: &CondValue, slack: f64) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| {
            a.gap(*b) >= -slack
        })
    }

    pub fn approx_eq(&self, other: &CondValue, tol: f64) -> bool {
        self.values
            .iter()
            .zip(&other.values)
            .all(|(a, b)| a.approx_eq(*b, tol))
    }

    /// Largest |gap| to another variable; infinite when variants disagree.
    pub fn max_abs_gap(&self, other: &CondValue) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.gap(*b).abs())
            .fold(0.0, f64::max)
    }
}

/// A real-valued process with row `s` measurable at `partitions[s]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedProcess {
    pub rows: Vec<Vec<f64>>,
}

impl AdaptedProcess {
    pub fn new(space: &FilteredSpace, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != space.horizon() + 1 {
            return Err(Error::Invalid(format!(
                "expected {} rows, got {}",
                space.horizon() + 1,
                rows.len()
            )));
        }
        for (s, row) in rows.iter().enumerate() {
            if row.len() != space.n_atoms() {
                return Err(Error::Invalid(format!("row {s} has wrong width")));
            }
            for (c, cell) in space.cells(s).iter().enumerate() {
                if cell.iter().any(|&a| row[a] != row[cell[0]]) {
                    return Err(Error::AdaptednessError { row: s, cell: c });
                }
            }
        }
        Ok(AdaptedProcess { rows })
    }

    pub fn horizon(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.rows[s]
    }

    /// Row `s` as a CondValue at level `s`.
    pub fn row_value(&self, s: usize) -> CondValue {
        CondValue {
            level: s,
            values: self.rows[s].iter().map(|&v| Finite(v)).collect(),
        }
    }

    /// Atomwise sum of rows `from..=to`.
    pub fn window_sum(&self, from: usize, to: usize) -> Vec<f64> {
        let n = self.rows[0].len();
        let mut out = vec![0.0; n];
        for s in from..=to {
            for (o, &v) in out.iter_mut().zip(&self.rows[s]) {
                *o += v;
            }
        }
        out
    }
}

/// Conditional expectation `E[w X | F_level] / E[w | F_level]` per cell.
///
/// `weights`, when given, must be nonnegative; a cell of zero weighted mass is
/// only accepted when `x` is constant there (the constant is returned).
pub fn cond_expectation(
    space: &FilteredSpace,
    x: &[ExtReal],
    level: usize,
    weights: Option<&[f64]>,
) -> Result<CondValue> {
    let mut values = vec![Finite(0.0); space.n_atoms()];
    for (c, cell) in space.cells(level).iter().enumerate() {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut all_same = true;
        for &a in cell {
            let w = space.probs[a] * weights.map_or(1.0, |w| w[a]);
            if x[a] != x[cell[0]] {
                all_same = false;
            }
            if w > 0.0 {
                match x[a] {
                    Finite(v) => {
                        num += w * v;
                        den += w;
                    }
                    _ => return Err(Error::NonFiniteInput { cell: c }),
                }
            }
        }
        let v = if den > 0.0 {
            Finite(num / den)
        } else if all_same {
            x[cell[0]]
        } else {
            return Err(Error::ZeroCellMass { level, cell: c });
        };
        for &a in cell {
            values[a] = v;
        }
    }
    Ok(CondValue { level, values })
}

/// Plain-f64 cellwise weighted mean, used by the index evaluators.
pub fn cond_mean(
    space: &FilteredSpace,
    x: &[f64],
    level: usize,
    weights: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let ext: Vec<ExtReal> = x.iter().map(|&v| Finite(v)).collect();
    let cv = cond_expectation(space, &ext, level, weights)?;
    Ok(cv.values.iter().map(|v| v.finite().unwrap()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Sup,
    Inf,
}

/// Cellwise max/min (the finite-space essential sup/inf); infinities propagate.
pub fn cond_extremum(space: &FilteredSpace, x: &[ExtReal], level: usize, mode: Extremum) -> CondValue {
    let mut values = vec![Finite(0.0); space.n_atoms()];
    for cell in space.cells(level) {
        let mut v = x[cell[0]];
        for &a in &cell[1..] {
            v = match mode {
                Extremum::Sup => v.max(x[a]),
                Extremum::Inf => v.min(x[a]),
            };
        }
        for &a in cell {
            values[a] = v;
        }
    }
    CondValue { level, values }
}

/// Sigma-stable gluing `sum_i 1_{A_i} X_i`. Each `A_i` is an atom set that must
/// be a union of cells at `level`; the `A_i` must partition the atoms.
pub fn glue(
    space: &FilteredSpace,
    level: usize,
    parts: &[(Vec<usize>, CondValue)],
) -> Result<CondValue> {
    let n = space.n_atoms();
    let mut seen = vec![false; n];
    let mut values = vec![Finite(0.0); n];
    for (atoms, x) in parts {
        for &a in atoms {
            if a >= n || seen[a] {
                return Err(Error::NotAPartition { level });
            }
            seen[a] = true;
            values[a] = x.values[a];
        }
        // A_i must be a union of cells at `level`
        for &a in atoms {
            let cell = &space.cells(level)[space.cell_of(level, a)];
            if !cell.iter().all(|b| atoms.contains(b)) {
                return Err(Error::MeasurabilityViolation {
                    level,
                    cell: space.cell_of(level, a),
                    a,
                    b: a,
                });
            }
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::NotAPartition { level });
    }
    CondValue::new(space, level, values)
}

/// Outcome of a locality check `1_A F(X) = 1_A F(1_A X)`.
#[derive(Clone, Debug)]
pub struct LocalityReport {
    pub checks: usize,
    pub max_err: f64,
    /// `(sample index, offending cell-union mask)` of the first violation.
    pub violation: Option<(usize, Vec<usize>)>,
}

impl LocalityReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Verify locality of a black-box map at `level` over the given samples.
/// All `2^#cells` cell-unions are enumerated when `#cells <= 12`; otherwise 64
/// random unions are drawn from `rng`.
pub fn check_local<F>(
    space: &FilteredSpace,
    level: usize,
    f: F,
    samples: &[CondValue],
    rng: &mut impl Rng,
    tol: f64,
) -> Result<LocalityReport>
where
    F: Fn(&CondValue) -> Result<CondValue>,
{
    let n_cells = space.cells(level).len();
    let masks: Vec<u64> = if n_cells <= 12 {
        (0..(1u64 << n_cells)).collect()
    } else {
        (0..64).map(|_| rng.gen::<u64>() & ((1u64 << n_cells.min(63)) - 1)).collect()
    };
    let mut checks = 0;
    let mut max_err: f64 = 0.0;
    for (si, x) in samples.iter().enumerate() {
        let fx = f(x)?;
        for &mask in &masks {
            // 1_A X, with 0 * (+-inf) = 0 on the complement
            let masked = CondValue {
                level: x.level,
                values: x
                    .values
                    .iter()
                    .enumerate()
                    .map(|(a, &v)| {
                        if mask >> space.cell_of(level, a) & 1 == 1 {
                            v
                        } else {
                            Finite(0.0)
                        }
                    })
                    .collect(),
            };
            let fmx = f(&masked)?;
            checks += 1;
            for a in 0..space.n_atoms() {
                if mask >> space.cell_of(level, a) & 1 == 1 {
                    let err = fx.values[a].gap(fmx.values[a]).abs();
                    max_err = max_err.max(err);
                    if err > tol {
                        let cells = (0..n_cells).filter(|c| mask >> c & 1 == 1).collect();
                        return Ok(LocalityReport {
                            checks,
                            max_err,
                            violation: Some((si, cells)),
                        });
                    }
                }
            }
        }
    }
    Ok(LocalityReport {
        checks,
        max_err,
        violation: None,
    })
}

/// Handy 4-atom uniform fixture: trivial F_0, F_1 = {{0,1},{2,3}}, atomic F_2.
pub fn example_space_e1() -> FilteredSpace {
    FilteredSpace::uniform(
        4,
        vec![
            vec![vec![0, 1, 2, 3]],
            vec![vec![0, 1], vec![2, 3]],
            vec![vec![0], vec![1], vec![2], vec![3]],
        ],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x4(vals: [f64; 4]) -> Vec<ExtReal> {
        vals.iter().map(|&v| Finite(v)).collect()
    }

    #[test]
    fn rejects_zero_probability_atoms() {
        let r = FilteredSpace::new(vec![0.5, 0.5, 0.0], vec![vec![vec![0, 1, 2]]]);
        assert!(matches!(r, Err(Error::BadProbabilities { .. })));
    }

    #[test]
    fn rejects_non_refining_partitions() {
        let r = FilteredSpace::uniform(
            4,
            vec![
                vec![vec![0, 1], vec![2, 3]],
                vec![vec![0, 2], vec![1, 3]],
            ],
        );
        assert!(matches!(r, Err(Error::NotRefining { .. })));
    }

    #[test]
    fn cond_expectation_cell_averages() {
        let sp = example_space_e1();
        let x = x4([4.0, 2.0, 6.0, 0.0]);
        let e1 = cond_expectation(&sp, &x, 1, None).unwrap();
        assert_eq!(e1.values, x4([3.0, 3.0, 3.0, 3.0]));
        let e2 = cond_expectation(&sp, &x, 2, None).unwrap();
        assert_eq!(e2.values, x);
        let c = cond_expectation(&sp, &x4([5.0; 4]), 0, None).unwrap();
        assert_eq!(c.values, x4([5.0; 4]));
    }

    #[test]
    fn cond_expectation_zero_mass_cell() {
        let sp = example_space_e1();
        let w = [0.0, 0.0, 1.0, 1.0];
        // non-constant on the dead cell -> error
        let r = cond_expectation(&sp, &x4([1.0, 2.0, 3.0, 3.0]), 1, Some(&w));
        assert!(matches!(r, Err(Error::ZeroCellMass { .. })));
        // constant on the dead cell -> that constant
        let v = cond_expectation(&sp, &x4([7.0, 7.0, 3.0, 5.0]), 1, Some(&w)).unwrap();
        assert_eq!(v.on_cell(&sp, 0), Finite(7.0));
    }

    #[test]
    fn cond_extremum_examples() {
        let sp = example_space_e1();
        let sup = cond_extremum(&sp, &x4([4.0, 2.0, 6.0, 0.0]), 1, Extremum::Sup);
        assert_eq!(sup.values, x4([4.0, 4.0, 6.0, 6.0]));
        let mut x = x4([0.0, 2.0, 6.0, 0.0]);
        x[0] = NegInf;
        let inf = cond_extremum(&sp, &x, 1, Extremum::Inf);
        assert_eq!(inf.values[0], NegInf);
        assert_eq!(inf.values[1], NegInf);
        assert_eq!(inf.values[2], Finite(0.0));
    }

    #[test]
    fn glue_basics() {
        let sp = example_space_e1();
        let x1 = CondValue::constant(&sp, 1, Finite(7.0));
        let x2 = CondValue::constant(&sp, 1, Finite(9.0));
        let g = glue(&sp, 1, &[(vec![0, 1], x1), (vec![2, 3], x2)]).unwrap();
        assert_eq!(g.values, x4([7.0, 7.0, 9.0, 9.0]));
        // non-measurable part set
        let x = CondValue::constant(&sp, 1, Finite(1.0));
        let y = CondValue::constant(&sp, 1, Finite(2.0));
        assert!(glue(&sp, 1, &[(vec![0], x), (vec![1, 2, 3], y)]).is_err());
    }

    #[test]
    fn tower_property() {
        let sp = example_space_e1();
        let x = x4([4.0, 2.0, 6.0, 0.0]);
        let inner = cond_expectation(&sp, &x, 2, None).unwrap();
        let towered = cond_expectation(&sp, &inner.values, 1, None).unwrap();
        let direct = cond_expectation(&sp, &x, 1, None).unwrap();
        assert!(towered.approx_eq(&direct, 1e-12));
    }

    #[test]
    fn locality_of_conditional_expectation_and_of_global_mean() {
        let sp = example_space_e1();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = vec![CondValue::from_f64(&sp, 2, &[4.0, 2.0, 6.0, 0.0]).unwrap()];
        let ok = check_local(
            &sp,
            1,
            |x| cond_expectation(&sp, &x.values, 1, None),
            &samples,
            &mut rng,
            1e-9,
        )
        .unwrap();
        assert!(ok.passed());

        // broadcasting the global mean is not local across a nontrivial partition
        let bad = check_local(
            &sp,
            1,
            |x| cond_expectation(&sp, &x.values, 0, None),
            &samples,
            &mut rng,
            1e-9,
        )
        .unwrap();
        assert!(!bad.passed());
    }
}
