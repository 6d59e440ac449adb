//! Dual-side machinery: dual functionals (densities), penalty and risk
//! functions linked by conditional right-inversion, the robust evaluation
//! essinf over a dual grid, and the scale-invariant specialization. The
//! ordering cone is fixed to {X >= 0}, so dual functionals are nonnegative
//! densities and the normalized dual set carries `E[z | F_t] = 1`.

use crate::error::{Error, Result};
use crate::exec;
use crate::ext::{ExtReal, Finite, NegInf, PosInf};
use crate::monotone::{MonotoneFn, Side};
use crate::space::{CondValue, FilteredSpace};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A nonnegative density `z` representing the functional `X -> E[zX | F_t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualFunctional {
    pub level: usize,
    pub z: Vec<f64>,
}

impl DualFunctional {
    pub fn new(space: &FilteredSpace, level: usize, z: Vec<f64>) -> Result<Self> {
        if z.len() != space.n_atoms() || z.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::Invalid("dual weights must be nonnegative, one per atom".into()));
        }
        Ok(DualFunctional { level, z })
    }

    /// The density of P itself.
    pub fn unit(space: &FilteredSpace, level: usize) -> Self {
        DualFunctional {
            level,
            z: vec![1.0; space.n_atoms()],
        }
    }

    /// Whether `E[z | F_level] = 1` on every cell, within `tol`.
    pub fn is_normalized(&self, space: &FilteredSpace, tol: f64) -> bool {
        space.cells(self.level).iter().all(|cell| {
            let mass: f64 = cell.iter().map(|&a| space.probs()[a] * self.z[a]).sum();
            let pc: f64 = cell.iter().map(|&a| space.probs()[a]).sum();
            (mass - pc).abs() <= tol
        })
    }
}

/// `<Z, X> = E[zX | F_t]` for finite-valued `x` given per atom.
pub fn pairing_density(
    space: &FilteredSpace,
    z: &DualFunctional,
    x: &[f64],
    t: usize,
) -> CondValue {
    let mut values = vec![Finite(0.0); space.n_atoms()];
    for cell in space.cells(t) {
        let mut num = 0.0;
        let mut pc = 0.0;
        for &a in cell {
            num += space.probs()[a] * z.z[a] * x[a];
            pc += space.probs()[a];
        }
        let v = Finite(num / pc);
        for &a in cell {
            values[a] = v;
        }
    }
    CondValue { level: t, values }
}

/// Maximal penalty of a set sampled on a finite member grid:
/// cellwise min of `<Z, X>` over the members, `+inf` when the set is empty.
/// This is an upper bound on the true essinf that tightens under refinement.
pub fn penalty_from_set(
    space: &FilteredSpace,
    t: usize,
    members: &[Vec<f64>],
    z: &DualFunctional,
) -> CondValue {
    if members.is_empty() {
        return CondValue::constant(space, t, PosInf);
    }
    let init = CondValue::constant(space, t, PosInf);
    members.iter().fold(init, |acc, x| {
        acc.zip(&pairing_density(space, z, x, t), ExtReal::min)
    })
}

/// Conditional characteristic function of a set: `0` on cells where the
/// membership oracle holds, `-inf` elsewhere.
pub fn chi(space: &FilteredSpace, t: usize, member_per_cell: &[bool]) -> Result<CondValue> {
    if member_per_cell.len() != space.cells(t).len() {
        return Err(Error::Invalid("one membership flag per cell required".into()));
    }
    let per_cell: Vec<ExtReal> = member_per_cell
        .iter()
        .map(|&m| if m { Finite(0.0) } else { NegInf })
        .collect();
    CondValue::from_cell_values(space, t, &per_cell)
}

/// Risk function from a penalty: conditional right-inverse in the level
/// argument (for fixed Z).
pub fn risk_from_penalty(pi_in_m: &MonotoneFn) -> MonotoneFn {
    pi_in_m.inverse(Side::Right)
}

/// Penalty from a risk function: right-inverse in the `s` argument; mutually
/// inverse with [`risk_from_penalty`] on right-continuous representations.
pub fn penalty_from_risk(r_in_s: &MonotoneFn) -> MonotoneFn {
    r_in_s.inverse(Side::Right)
}

/// A conditional risk function `(Z, s) -> R(Z, s)`.
pub trait RiskFunction: Sync {
    fn eval(&self, space: &FilteredSpace, z: &DualFunctional, s: &CondValue) -> CondValue;
}

impl<F> RiskFunction for F
where
    F: Fn(&FilteredSpace, &DualFunctional, &CondValue) -> CondValue + Sync,
{
    fn eval(&self, space: &FilteredSpace, z: &DualFunctional, s: &CondValue) -> CondValue {
        self(space, z, s)
    }
}

fn robust_term(
    space: &FilteredSpace,
    r: &dyn RiskFunction,
    x: &[f64],
    t: usize,
    z: &DualFunctional,
) -> Vec<ExtReal> {
    let s = pairing_density(space, z, x, t);
    r.eval(space, z, &s).values
}

fn min_fold(a: Vec<ExtReal>, b: Vec<ExtReal>) -> Vec<ExtReal> {
    if a.is_empty() {
        return b;
    }
    if b.is_empty() {
        return a;
    }
    a.into_iter().zip(b).map(|(x, y)| x.min(y)).collect()
}

/// Robust evaluation `essinf_Z R(Z, <Z,X>)` over a finite dual grid, computed
/// cellwise. An upper bound on the essinf over the full dual set; it can only
/// decrease when the grid is enlarged. Parallel over the grid when the
/// `parallel` feature is enabled.
pub fn robust_evaluate(
    space: &FilteredSpace,
    r: &dyn RiskFunction,
    dual_grid: &[DualFunctional],
    x: &[f64],
    t: usize,
) -> Result<CondValue> {
    if dual_grid.is_empty() {
        return Err(Error::EmptyDualGrid);
    }
    let values = exec::map_reduce(
        dual_grid,
        |z| robust_term(space, r, x, t, z),
        Vec::new,
        min_fold,
    );
    Ok(CondValue { level: t, values })
}

/// Sequential twin of [`robust_evaluate`], kept for benchmarking both paths.
pub fn robust_evaluate_seq(
    space: &FilteredSpace,
    r: &dyn RiskFunction,
    dual_grid: &[DualFunctional],
    x: &[f64],
    t: usize,
) -> Result<CondValue> {
    if dual_grid.is_empty() {
        return Err(Error::EmptyDualGrid);
    }
    let values = exec::map_reduce_seq(
        dual_grid,
        |z| robust_term(space, r, x, t, z),
        Vec::new,
        min_fold,
    );
    Ok(CondValue { level: t, values })
}

/// Risk function of a scale-invariant index: `-inf` on {s = -inf}, `+inf` on
/// {s >= 0}, and on {-inf < s < 0} the smallest grid level `m` whose polar
/// acceptance set contains `Z` (per atom); `+inf` when none does.
pub fn scale_invariant_risk(
    polar_oracle: &dyn Fn(&CondValue, &DualFunctional) -> Vec<bool>,
    m_grid: &[CondValue],
    z: &DualFunctional,
    s: &CondValue,
) -> CondValue {
    let n = s.values.len();
    let mut values = vec![PosInf; n];
    let memberships: Vec<(usize, Vec<bool>)> = {
        let mut idx: Vec<usize> = (0..m_grid.len()).collect();
        // evaluate in ascending per-atom order lazily below; precompute all
        idx.sort_by(|&a, &b| {
            m_grid[a].values[0].total_cmp(&m_grid[b].values[0])
        });
        idx.into_iter()
            .map(|i| (i, polar_oracle(&m_grid[i], z)))
            .collect()
    };
    for a in 0..n {
        values[a] = match s.values[a] {
            NegInf => NegInf,
            v if v >= Finite(0.0) => PosInf,
            _ => {
                // smallest admissible level at this atom
                let mut best = PosInf;
                for (i, member) in &memberships {
                    if member[a] {
                        best = best.min(m_grid[*i].values[a]);
                    }
                }
                best
            }
        };
    }
    CondValue {
        level: s.level,
        values,
    }
}

/// Configuration for dual-grid generation.
#[derive(Clone, Debug)]
pub struct DualGridConfig {
    /// Lattice step `h` for the deterministic part; `z` entries are multiples
    /// of `h` with `E[z 1_C] = P(C)` per cell.
    pub lattice_step: f64,
    /// Number of random density samples appended to the lattice.
    pub samples: usize,
    pub seed: u64,
}

impl Default for DualGridConfig {
    fn default() -> Self {
        DualGridConfig {
            lattice_step: 0.1,
            samples: 0,
            seed: 0,
        }
    }
}

const LATTICE_CAP_PER_CELL: usize = 500_000;

fn cell_lattice(probs: &[f64], cell: &[usize], h: f64) -> Vec<Vec<f64>> {
    // Enumerate z >= 0 with entries in h*Z and sum_{cell} p_a z_a = P(cell).
    let pc: f64 = cell.iter().map(|&a| probs[a]).sum();
    let mut out = Vec::new();
    let mut current = vec![0.0; cell.len()];
    fn dfs(
        probs: &[f64],
        cell: &[usize],
        h: f64,
        i: usize,
        remaining: f64,
        current: &mut Vec<f64>,
        out: &mut Vec<Vec<f64>>,
    ) {
        if out.len() >= LATTICE_CAP_PER_CELL {
            return;
        }
        if i == cell.len() - 1 {
            // last coordinate must absorb the remaining mass exactly
            let z = remaining / probs[cell[i]];
            let steps = (z / h).round();
            if steps >= -1e-9 && (steps * h - z).abs() <= 1e-9 {
                current[i] = steps.max(0.0) * h;
                out.push(current.clone());
            }
            return;
        }
        let p = probs[cell[i]];
        let max_steps = (remaining / (p * h) + 1e-9).floor() as i64;
        for n in 0..=max_steps.max(0) {
            current[i] = n as f64 * h;
            dfs(probs, cell, h, i + 1, remaining - current[i] * p, current, out);
        }
    }
    dfs(probs, cell, h, 0, pc, &mut current, &mut out);
    if out.is_empty() {
        // irregular probabilities may admit no exact lattice point; keep P
        out.push(vec![1.0; cell.len()]);
    }
    out
}

/// Deterministic lattice of normalized densities (plus optional random
/// samples) at level `t`. Per-cell choices are aligned by index: because the
/// robust essinf is computed cellwise, covering all per-cell options without
/// forming the cross product loses nothing.
pub fn normalized_density_grid(
    space: &FilteredSpace,
    t: usize,
    cfg: &DualGridConfig,
) -> Vec<DualFunctional> {
    let cells = space.cells(t);
    let per_cell: Vec<Vec<Vec<f64>>> = cells
        .iter()
        .map(|cell| cell_lattice(space.probs(), cell, cfg.lattice_step))
        .collect();
    let rows = per_cell.iter().map(Vec::len).max().unwrap_or(0);
    let mut grid = Vec::with_capacity(rows + cfg.samples);
    for j in 0..rows {
        let mut z = vec![0.0; space.n_atoms()];
        for (cell, options) in cells.iter().zip(&per_cell) {
            let pick = &options[j % options.len()];
            for (slot, &a) in pick.iter().zip(cell.iter()) {
                z[a] = *slot;
            }
        }
        grid.push(DualFunctional { level: t, z });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        let mut z = vec![0.0; space.n_atoms()];
        for cell in cells {
            let pc: f64 = cell.iter().map(|&a| space.probs()[a]).sum();
            let g: Vec<f64> = cell.iter().map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
            let mass: f64 = cell.iter().zip(&g).map(|(&a, &gv)| space.probs()[a] * gv).sum();
            for (&a, &gv) in cell.iter().zip(&g) {
                z[a] = gv * pc / mass;
            }
        }
        grid.push(DualFunctional { level: t, z });
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::example_space_e1;

    fn two_uniform() -> FilteredSpace {
        FilteredSpace::uniform(2, vec![vec![vec![0, 1]]]).unwrap()
    }

    #[test]
    fn pairing_is_conditional_expectation_of_zx() {
        let sp = example_space_e1();
        let z = DualFunctional::unit(&sp, 1);
        let s = pairing_density(&sp, &z, &[4.0, 2.0, 6.0, 0.0], 1);
        assert_eq!(s.values[0], Finite(3.0));
        assert_eq!(s.values[2], Finite(3.0));
    }

    #[test]
    fn penalty_from_set_examples() {
        let sp = two_uniform();
        let z = DualFunctional::unit(&sp, 0);
        // the cone itself contains 0, so the penalty is 0
        let members = vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![3.0, 0.5]];
        let pi = penalty_from_set(&sp, 0, &members, &z);
        assert_eq!(pi.values[0], Finite(0.0));
        // {X : E[X] >= 1} sampled at its boundary
        let members = vec![vec![1.0, 1.0], vec![0.0, 2.0], vec![2.0, 0.0], vec![1.5, 0.5]];
        let pi = penalty_from_set(&sp, 0, &members, &z);
        assert_eq!(pi.values[0], Finite(1.0));
        // empty set
        let pi = penalty_from_set(&sp, 0, &[], &z);
        assert_eq!(pi.values[0], PosInf);
    }

    #[test]
    fn chi_is_zero_or_neg_inf() {
        let sp = example_space_e1();
        let c = chi(&sp, 1, &[true, false]).unwrap();
        assert_eq!(c.values, vec![Finite(0.0), Finite(0.0), NegInf, NegInf]);
    }

    #[test]
    fn robust_evaluate_worst_case_expectation() {
        let sp = FilteredSpace::uniform(3, vec![vec![vec![0, 1, 2]]]).unwrap();
        let r = |_: &FilteredSpace, _: &DualFunctional, s: &CondValue| s.clone();
        // Dirac-style vertices of the normalized simplex
        let grid: Vec<DualFunctional> = (0..3)
            .map(|i| {
                let mut z = vec![0.0; 3];
                z[i] = 3.0;
                DualFunctional { level: 0, z }
            })
            .collect();
        let x = [0.3, -1.2, 2.0];
        let v = robust_evaluate(&sp, &r, &grid, &x, 0).unwrap();
        assert!(v.values[0].approx_eq(Finite(-1.2), 1e-12));
        // single Z = 1 recovers E[X]
        let v = robust_evaluate(&sp, &r, &[DualFunctional::unit(&sp, 0)], &x, 0).unwrap();
        assert!(v.values[0].approx_eq(Finite((0.3 - 1.2 + 2.0) / 3.0), 1e-12));
        // parallel and sequential paths agree
        let vs = robust_evaluate_seq(&sp, &r, &grid, &x, 0).unwrap();
        assert_eq!(v.level, vs.level);
    }

    #[test]
    fn lattice_grid_is_normalized_and_contains_unit() {
        let sp = two_uniform();
        let cfg = DualGridConfig {
            lattice_step: 0.5,
            samples: 8,
            seed: 3,
        };
        let grid = normalized_density_grid(&sp, 0, &cfg);
        assert!(!grid.is_empty());
        for z in &grid {
            assert!(z.is_normalized(&sp, 1e-9));
        }
        // h = 0.5 on two uniform atoms: z1 in {0, 0.5, 1, 1.5, 2}
        let lattice_rows = grid.len() - cfg.samples;
        assert_eq!(lattice_rows, 5);
    }

    #[test]
    fn lattice_h1_gives_extreme_points() {
        let sp = two_uniform();
        let cfg = DualGridConfig {
            lattice_step: 1.0,
            samples: 0,
            seed: 0,
        };
        let grid = normalized_density_grid(&sp, 0, &cfg);
        let zs: Vec<&Vec<f64>> = grid.iter().map(|g| &g.z).collect();
        assert!(zs.contains(&&vec![0.0, 2.0]));
        assert!(zs.contains(&&vec![2.0, 0.0]));
        assert!(zs.contains(&&vec![1.0, 1.0]));
    }

    #[test]
    fn refinement_only_decreases_robust_value() {
        let sp = two_uniform();
        let r = |_: &FilteredSpace, _: &DualFunctional, s: &CondValue| s.clone();
        let x = [2.0, -1.0];
        let coarse = normalized_density_grid(&sp, 0, &DualGridConfig { lattice_step: 0.5, samples: 0, seed: 0 });
        let fine = normalized_density_grid(&sp, 0, &DualGridConfig { lattice_step: 0.1, samples: 0, seed: 0 });
        let vc = robust_evaluate(&sp, &r, &coarse, &x, 0).unwrap();
        let vf = robust_evaluate(&sp, &r, &fine, &x, 0).unwrap();
        assert!(vf.values[0] <= vc.values[0]);
    }
}
