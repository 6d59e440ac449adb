//! Increasing extended-real functions represented symbolically by finite
//! breakpoint lists, together with their left/right-continuous versions and
//! conditional left/right inverses. Inverses are computed on the
//! representation itself (jumps become flats and flats become jumps), so the
//! Galois relations and double-inverse identities can be tested exactly.

use crate::error::{Error, Result};
use crate::ext::{ExtReal, Finite, NegInf, PosInf};
use crate::space::{CondValue, FilteredSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One breakpoint: the left limit, the attained value, and the right limit.
/// `left <= value <= right`; a strict gap is a jump, and the stored `value`
/// records which point of the jump the function takes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Knot {
    pub x: f64,
    pub left: ExtReal,
    pub value: ExtReal,
    pub right: ExtReal,
}

#[derive(Clone, Debug, PartialEq)]
enum Body {
    /// The same value on all of (-inf, inf).
    Constant(ExtReal),
    /// Piecewise linear between knots; constant or sloped tails.
    Piecewise {
        knots: Vec<Knot>,
        left_slope: f64,
        right_slope: f64,
    },
}

/// An increasing scalar map on the extended reals. Values at +-infinity are
/// stored explicitly since the inverse definitions pivot on `F(-inf)`, `F(inf)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneScalarFn {
    at_neg_inf: ExtReal,
    at_pos_inf: ExtReal,
    body: Body,
}

impl MonotoneScalarFn {
    fn validated(self) -> Result<Self> {
        let bad = |m: &str| Err(Error::BadMonotoneFn(m.into()));
        match &self.body {
            Body::Constant(c) => {
                if self.at_neg_inf > *c || *c > self.at_pos_inf {
                    return bad("constant body outside the [F(-inf), F(inf)] bracket");
                }
            }
            Body::Piecewise {
                knots,
                left_slope,
                right_slope,
            } => {
                if knots.is_empty() {
                    return bad("piecewise body needs at least one knot");
                }
                if !left_slope.is_finite() || *left_slope < 0.0 || !right_slope.is_finite() || *right_slope < 0.0 {
                    return bad("tail slopes must be finite and nonnegative");
                }
                for w in knots.windows(2) {
                    if !(w[0].x < w[1].x) {
                        return bad("knot abscissae must be strictly increasing");
                    }
                    if w[0].right > w[1].left {
                        return bad("limits must be increasing across knots");
                    }
                    if w[0].right != w[1].left && !(w[0].right.is_finite() && w[1].left.is_finite()) {
                        return bad("an interior segment with unequal endpoints must be finite");
                    }
                }
                for k in knots {
                    if !k.x.is_finite() {
                        return bad("knot abscissae must be finite");
                    }
                    if k.left > k.value || k.value > k.right {
                        return bad("need left <= value <= right at each knot");
                    }
                }
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if *left_slope > 0.0 {
                    if !first.left.is_finite() {
                        return bad("a sloped left tail needs a finite left limit at the first knot");
                    }
                    if self.at_neg_inf != NegInf {
                        return bad("a sloped left tail forces F(-inf) = -inf");
                    }
                } else if self.at_neg_inf > first.left {
                    return bad("F(-inf) must not exceed the left-tail value");
                }
                if *right_slope > 0.0 {
                    if !last.right.is_finite() {
                        return bad("a sloped right tail needs a finite right limit at the last knot");
                    }
                    if self.at_pos_inf != PosInf {
                        return bad("a sloped right tail forces F(inf) = +inf");
                    }
                } else if self.at_pos_inf < last.right {
                    return bad("F(inf) must not fall below the right-tail value");
                }
            }
        }
        Ok(self)
    }

    /// General constructor from explicit breakpoints and tail slopes.
    pub fn from_breakpoints(
        at_neg_inf: ExtReal,
        knots: Vec<Knot>,
        at_pos_inf: ExtReal,
        left_slope: f64,
        right_slope: f64,
    ) -> Result<Self> {
        MonotoneScalarFn {
            at_neg_inf,
            at_pos_inf,
            body: Body::Piecewise {
                knots,
                left_slope,
                right_slope,
            },
        }
        .validated()
    }

    /// F == c on the open real line; values at +-inf default to c as well.
    pub fn constant(c: ExtReal) -> Self {
        MonotoneScalarFn {
            at_neg_inf: c,
            at_pos_inf: c,
            body: Body::Constant(c),
        }
    }

    /// Constant on the reals with explicit endpoint values.
    pub fn constant_with_endpoints(at_neg_inf: ExtReal, c: ExtReal, at_pos_inf: ExtReal) -> Result<Self> {
        MonotoneScalarFn {
            at_neg_inf,
            at_pos_inf,
            body: Body::Constant(c),
        }
        .validated()
    }

    /// F(x) = a x + b with a >= 0.
    pub fn linear(a: f64, b: f64) -> Result<Self> {
        if a == 0.0 {
            return Ok(Self::constant(Finite(b)));
        }
        Self::from_breakpoints(
            NegInf,
            vec![Knot {
                x: 0.0,
                left: Finite(b),
                value: Finite(b),
                right: Finite(b),
            }],
            PosInf,
            a,
            a,
        )
    }

    /// Step from `lo` to `hi` at `x0`; `at_x0` picks the attained side.
    pub fn step(x0: f64, lo: ExtReal, hi: ExtReal, at_x0: Side) -> Result<Self> {
        let value = match at_x0 {
            Side::Left => lo,
            Side::Right => hi,
        };
        Self::from_breakpoints(
            lo,
            vec![Knot {
                x: x0,
                left: lo,
                value,
                right: hi,
            }],
            hi,
            0.0,
            0.0,
        )
    }

    /// Continuous piecewise-linear interpolation through `points` (x strictly
    /// increasing), flat beyond the ends, with explicit endpoint values.
    pub fn piecewise_linear(points: &[(f64, f64)], at_neg_inf: ExtReal, at_pos_inf: ExtReal) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::BadMonotoneFn("need at least one interpolation point".into()));
        }
        let mut knots = Vec::with_capacity(points.len());
        for &(x, y) in points {
            knots.push(Knot {
                x,
                left: Finite(y),
                value: Finite(y),
                right: Finite(y),
            });
        }
        Self::from_breakpoints(at_neg_inf, knots, at_pos_inf, 0.0, 0.0)
    }

    pub fn at_neg_inf(&self) -> ExtReal {
        self.at_neg_inf
    }

    pub fn at_pos_inf(&self) -> ExtReal {
        self.at_pos_inf
    }

    pub fn eval(&self, m: ExtReal) -> ExtReal {
        let x = match m {
            NegInf => return self.at_neg_inf,
            PosInf => return self.at_pos_inf,
            Finite(x) => x,
        };
        match &self.body {
            Body::Constant(c) => *c,
            Body::Piecewise {
                knots,
                left_slope,
                right_slope,
            } => {
                let idx = knots.partition_point(|k| k.x < x);
                if idx < knots.len() && knots[idx].x == x {
                    return knots[idx].value;
                }
                if idx == 0 {
                    let k = knots[0];
                    return if *left_slope == 0.0 {
                        k.left
                    } else {
                        Finite(k.left.finite().unwrap() - left_slope * (k.x - x))
                    };
                }
                if idx == knots.len() {
                    let k = knots[knots.len() - 1];
                    return if *right_slope == 0.0 {
                        k.right
                    } else {
                        Finite(k.right.finite().unwrap() + right_slope * (x - k.x))
                    };
                }
                let (a, b) = (knots[idx - 1], knots[idx]);
                if a.right == b.left {
                    a.right
                } else {
                    let (ya, yb) = (a.right.finite().unwrap(), b.left.finite().unwrap());
                    Finite(ya + (yb - ya) * (x - a.x) / (b.x - a.x))
                }
            }
        }
    }

    /// Limit of F as x -> -inf over the reals (not the stored value at -inf).
    fn lim_neg(&self) -> ExtReal {
        match &self.body {
            Body::Constant(c) => *c,
            Body::Piecewise { knots, left_slope, .. } => {
                if *left_slope > 0.0 {
                    NegInf
                } else {
                    knots[0].left
                }
            }
        }
    }

    fn lim_pos(&self) -> ExtReal {
        match &self.body {
            Body::Constant(c) => *c,
            Body::Piecewise { knots, right_slope, .. } => {
                if *right_slope > 0.0 {
                    PosInf
                } else {
                    knots[knots.len() - 1].right
                }
            }
        }
    }

    /// Left-continuous version: value at every point replaced by its left
    /// limit; F^-( -inf ) = -inf is forced and F^-(inf) is the left limit.
    pub fn continuous_version(&self, side: Side) -> MonotoneScalarFn {
        let body = match (&self.body, side) {
            (Body::Constant(c), _) => Body::Constant(*c),
            (
                Body::Piecewise {
                    knots,
                    left_slope,
                    right_slope,
                },
                s,
            ) => Body::Piecewise {
                knots: knots
                    .iter()
                    .map(|k| Knot {
                        x: k.x,
                        left: k.left,
                        value: if s == Side::Left { k.left } else { k.right },
                        right: k.right,
                    })
                    .collect(),
                left_slope: *left_slope,
                right_slope: *right_slope,
            },
        };
        match side {
            Side::Left => MonotoneScalarFn {
                at_neg_inf: NegInf,
                at_pos_inf: self.lim_pos(),
                body,
            },
            Side::Right => MonotoneScalarFn {
                at_neg_inf: self.lim_neg(),
                at_pos_inf: PosInf,
                body,
            },
        }
        .validated()
        .expect("continuous version preserves validity")
    }

    /// inf { m : F(m) >= s }, with m ranging over the extended reals and
    /// inf of the empty set = +inf.
    pub fn inf_geq(&self, s: ExtReal) -> ExtReal {
        if s == NegInf {
            return NegInf;
        }
        if self.at_neg_inf >= s {
            return NegInf;
        }
        match &self.body {
            Body::Constant(c) => {
                if *c >= s {
                    NegInf
                } else {
                    PosInf
                }
            }
            Body::Piecewise {
                knots,
                left_slope,
                right_slope,
            } => {
                let first = knots[0];
                if *left_slope == 0.0 {
                    if first.left >= s {
                        return NegInf;
                    }
                } else if let (Finite(l0), Finite(sv)) = (first.left, s) {
                    if l0 > sv {
                        return Finite(first.x - (l0 - sv) / left_slope);
                    }
                }
                for (i, k) in knots.iter().enumerate() {
                    if k.right >= s {
                        return Finite(k.x);
                    }
                    // open segment to the next knot
                    if i + 1 < knots.len() {
                        let nl = knots[i + 1].left;
                        if nl > s {
                            let (ya, yb) = (k.right.finite().unwrap(), nl.finite().unwrap());
                            let sv = s.finite().unwrap();
                            return Finite(k.x + (sv - ya) * (knots[i + 1].x - k.x) / (yb - ya));
                        }
                    }
                }
                let last = knots[knots.len() - 1];
                if *right_slope > 0.0 {
                    if let (Finite(r), Finite(sv)) = (last.right, s) {
                        return Finite(last.x + (sv - r) / right_slope);
                    }
                }
                PosInf
            }
        }
    }

    /// inf { m : F(m) > s }, inf of the empty set = +inf.
    pub fn inf_gt(&self, s: ExtReal) -> ExtReal {
        if s == PosInf {
            return PosInf;
        }
        if self.at_neg_inf > s {
            return NegInf;
        }
        match &self.body {
            Body::Constant(c) => {
                if *c > s {
                    NegInf
                } else {
                    PosInf
                }
            }
            Body::Piecewise {
                knots,
                left_slope,
                right_slope,
            } => {
                let first = knots[0];
                if *left_slope == 0.0 {
                    if first.left > s {
                        return NegInf;
                    }
                } else if let (Finite(l0), Finite(sv)) = (first.left, s) {
                    if l0 > sv {
                        return Finite(first.x - (l0 - sv) / left_slope);
                    }
                }
                for (i, k) in knots.iter().enumerate() {
                    if k.right > s {
                        return Finite(k.x);
                    }
                    if i + 1 < knots.len() {
                        let nl = knots[i + 1].left;
                        if nl > s {
                            let (ya, yb) = (k.right.finite().unwrap(), nl.finite().unwrap());
                            let sv = s.finite().unwrap();
                            return Finite(k.x + (sv - ya) * (knots[i + 1].x - k.x) / (yb - ya));
                        }
                    }
                }
                let last = knots[knots.len() - 1];
                if *right_slope > 0.0 {
                    if let (Finite(r), Finite(sv)) = (last.right, s) {
                        return Finite(last.x + (sv - r) / right_slope);
                    }
                }
                PosInf
            }
        }
    }

    /// sup { m : F(m) <= s }, sup of the empty set = -inf.
    pub fn sup_leq(&self, s: ExtReal) -> ExtReal {
        if s == PosInf {
            return PosInf;
        }
        if self.at_pos_inf <= s {
            return PosInf;
        }
        match &self.body {
            Body::Constant(c) => {
                if *c <= s {
                    PosInf
                } else {
                    NegInf
                }
            }
            Body::Piecewise {
                knots,
                left_slope,
                right_slope,
            } => {
                let last = knots[knots.len() - 1];
                if *right_slope == 0.0 {
                    if last.right <= s {
                        return PosInf;
                    }
                } else if let (Finite(r), Finite(sv)) = (last.right, s) {
                    if sv > r {
                        return Finite(last.x + (sv - r) / right_slope);
                    }
                }
                for i in (0..knots.len()).rev() {
                    let k = knots[i];
                    if k.left <= s {
                        return Finite(k.x);
                    }
                    if i > 0 {
                        let pr = knots[i - 1].right;
                        if pr < s {
                            let (ya, yb) = (pr.finite().unwrap(), k.left.finite().unwrap());
                            let sv = s.finite().unwrap();
                            return Finite(knots[i - 1].x + (sv - ya) * (k.x - knots[i - 1].x) / (yb - ya));
                        }
                    }
                }
                let first = knots[0];
                if *left_slope > 0.0 {
                    if let (Finite(l0), Finite(sv)) = (first.left, s) {
                        return Finite(first.x - (l0 - sv) / left_slope);
                    }
                }
                NegInf
            }
        }
    }

    /// sup { m : F(m) < s }, sup of the empty set = -inf.
    pub fn sup_lt(&self, s: ExtReal) -> ExtReal {
        if s == NegInf {
            return NegInf;
        }
        if self.at_pos_inf < s {
            return PosInf;
        }
        match &self.body {
            Body::Constant(c) => {
                if *c < s {
                    PosInf
                } else {
                    NegInf
                }
            }
            Body::Piecewise {
                knots,
                left_slope,
                right_slope,
            } => {
                let last = knots[knots.len() - 1];
                if *right_slope == 0.0 {
                    if last.right < s {
                        return PosInf;
                    }
                } else if let (Finite(r), Finite(sv)) = (last.right, s) {
                    if sv > r {
                        return Finite(last.x + (sv - r) / right_slope);
                    }
                }
                for i in (0..knots.len()).rev() {
                    let k = knots[i];
                    if k.left < s {
                        return Finite(k.x);
                    }
                    if i > 0 {
                        let pr = knots[i - 1].right;
                        if pr < s {
                            let (ya, yb) = (pr.finite().unwrap(), k.left.finite().unwrap());
                            let sv = s.finite().unwrap();
                            return Finite(knots[i - 1].x + (sv - ya) * (k.x - knots[i - 1].x) / (yb - ya));
                        }
                    }
                }
                let first = knots[0];
                if *left_slope > 0.0 {
                    if let (Finite(l0), Finite(sv)) = (first.left, s) {
                        if sv < l0 {
                            return Finite(first.x - (l0 - sv) / left_slope);
                        }
                    }
                }
                NegInf
            }
        }
    }

    /// Pointwise inverse value per the conditional-inverse definitions:
    /// left inverse = inf { m : F(m) >= s } (+inf when F(inf) < s),
    /// right inverse = sup { m : F(m) <= s } (-inf when F(-inf) > s).
    /// Both conventions agree with the empty-set inf/sup above.
    pub fn inverse_value(&self, side: Side, s: ExtReal) -> ExtReal {
        match side {
            Side::Left => self.inf_geq(s),
            Side::Right => self.sup_leq(s),
        }
    }

    /// The inverse as a symbolic breakpoint function: jumps of F become flats
    /// and flats of F become jumps. Left inverses are left-continuous (a flat
    /// segment maps to its left endpoint), right inverses right-continuous.
    pub fn inverse(&self, side: Side) -> MonotoneScalarFn {
        let mut criticals: Vec<f64> = Vec::new();
        let mut push = |v: ExtReal, c: &mut Vec<f64>| {
            if let Finite(x) = v {
                c.push(x);
            }
        };
        push(self.at_neg_inf, &mut criticals);
        push(self.at_pos_inf, &mut criticals);
        if let Body::Piecewise { knots, .. } = &self.body {
            for k in knots {
                push(k.left, &mut criticals);
                push(k.value, &mut criticals);
                push(k.right, &mut criticals);
            }
        } else if let Body::Constant(c) = &self.body {
            push(*c, &mut criticals);
        }
        criticals.sort_by(f64::total_cmp);
        criticals.dedup();

        let (at_neg_inf, at_pos_inf) = match side {
            Side::Left => (NegInf, self.inf_geq(PosInf)),
            Side::Right => (self.sup_leq(NegInf), PosInf),
        };

        if criticals.is_empty() {
            // F takes no finite values anywhere: the inverse is constant in s.
            let v = match side {
                Side::Left => self.inf_geq(Finite(0.0)),
                Side::Right => self.sup_leq(Finite(0.0)),
            };
            return MonotoneScalarFn {
                at_neg_inf: at_neg_inf.min(v),
                at_pos_inf: at_pos_inf.max(v),
                body: Body::Constant(v),
            }
            .validated()
            .expect("constant inverse is valid");
        }

        let knots: Vec<Knot> = criticals
            .iter()
            .map(|&s0| {
                let s = Finite(s0);
                match side {
                    Side::Left => {
                        let v = self.inf_geq(s);
                        Knot {
                            x: s0,
                            left: v,
                            value: v,
                            right: self.inf_gt(s),
                        }
                    }
                    Side::Right => {
                        let v = self.sup_leq(s);
                        Knot {
                            x: s0,
                            left: self.sup_lt(s),
                            value: v,
                            right: v,
                        }
                    }
                }
            })
            .collect();

        // Below the lowest critical value the inverse is either constant
        // (+-inf) or tracks F's sloped tail; same above the highest one.
        let (f_left_slope, f_right_slope) = match &self.body {
            Body::Constant(_) => (0.0, 0.0),
            Body::Piecewise {
                left_slope,
                right_slope,
                ..
            } => (*left_slope, *right_slope),
        };
        let left_slope = if f_left_slope > 0.0 { 1.0 / f_left_slope } else { 0.0 };
        let right_slope = if f_right_slope > 0.0 { 1.0 / f_right_slope } else { 0.0 };

        MonotoneScalarFn {
            at_neg_inf,
            at_pos_inf,
            body: Body::Piecewise {
                knots,
                left_slope,
                right_slope,
            },
        }
        .validated()
        .expect("symbolic inverse of a valid representation is valid")
    }

    /// Exact pointwise equality probed at both functions' knots, segment
    /// midpoints, tail points, and +-infinity.
    pub fn eval_eq(&self, other: &MonotoneScalarFn) -> bool {
        let mut probes: Vec<ExtReal> = vec![NegInf, PosInf];
        let mut xs: Vec<f64> = Vec::new();
        for f in [self, other] {
            if let Body::Piecewise { knots, .. } = &f.body {
                xs.extend(knots.iter().map(|k| k.x));
            }
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.is_empty() {
            xs.push(0.0);
        }
        probes.push(Finite(xs[0] - 1.0));
        probes.push(Finite(xs[xs.len() - 1] + 1.0));
        for w in xs.windows(2) {
            probes.push(Finite(0.5 * (w[0] + w[1])));
        }
        probes.extend(xs.iter().map(|&x| Finite(x)));
        probes.iter().all(|&p| self.eval(p) == other.eval(p))
    }
}

/// A local increasing map on conditional values: one scalar function per atom,
/// constant on every cell of the conditioning level.
#[derive(Clone, Debug)]
pub struct MonotoneFn {
    pub level: usize,
    pub fns: Vec<MonotoneScalarFn>,
}

impl MonotoneFn {
    pub fn new(space: &FilteredSpace, level: usize, fns: Vec<MonotoneScalarFn>) -> Result<Self> {
        if fns.len() != space.n_atoms() {
            return Err(Error::Invalid("one scalar function per atom required".into()));
        }
        for cell in space.cells(level) {
            if cell.iter().any(|&a| fns[a] != fns[cell[0]]) {
                return Err(Error::Invalid(
                    "scalar functions must agree on every cell of the conditioning level".into(),
                ));
            }
        }
        Ok(MonotoneFn { level, fns })
    }

    /// The same scalar function on every atom.
    pub fn broadcast(space: &FilteredSpace, level: usize, f: MonotoneScalarFn) -> Self {
        MonotoneFn {
            level,
            fns: vec![f; space.n_atoms()],
        }
    }

    pub fn eval(&self, m: &CondValue) -> CondValue {
        CondValue {
            level: self.level.max(m.level),
            values: self
                .fns
                .iter()
                .zip(&m.values)
                .map(|(f, &v)| f.eval(v))
                .collect(),
        }
    }

    pub fn continuous_version(&self, side: Side) -> MonotoneFn {
        MonotoneFn {
            level: self.level,
            fns: self.fns.iter().map(|f| f.continuous_version(side)).collect(),
        }
    }

    pub fn inverse(&self, side: Side) -> MonotoneFn {
        MonotoneFn {
            level: self.level,
            fns: self.fns.iter().map(|f| f.inverse(side)).collect(),
        }
    }
}

/// Outcome of an exhaustive Galois-adjunction test on a grid cross-product.
#[derive(Clone, Debug)]
pub struct GaloisReport {
    pub checks: usize,
    /// Pairs skipped because a comparison sat within 1e-9 of a tie.
    pub boundary_skips: usize,
    pub violations: usize,
    pub first_violation: Option<String>,
}

impl GaloisReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn decisive(a: ExtReal, b: ExtReal) -> bool {
    a.gap(b).abs() > 1e-9
}

/// Tests, per atom and over the grid cross-product:
/// (C3)  F^-(m) <= s  <=>  m <= right-inverse(s)
/// (C4)  F^+(m) >= s  <=>  m >= left-inverse(s)
/// plus the sandwich F^-(G(s)) <= s <= F^+(G(s)) on {F(-inf) < s < F(inf)}
/// for G either inverse. Ties within 1e-9 are skipped, not scored.
pub fn galois_check(f: &MonotoneFn, grid_m: &[ExtReal], grid_s: &[ExtReal]) -> GaloisReport {
    let mut rep = GaloisReport {
        checks: 0,
        boundary_skips: 0,
        violations: 0,
        first_violation: None,
    };
    for (atom, sf) in f.fns.iter().enumerate() {
        let f_minus = sf.continuous_version(Side::Left);
        let f_plus = sf.continuous_version(Side::Right);
        let inv_l = sf.inverse(Side::Left);
        let inv_r = sf.inverse(Side::Right);
        let mut record = |ok: bool, skip: bool, what: &str, rep: &mut GaloisReport| {
            rep.checks += 1;
            if skip {
                rep.boundary_skips += 1;
            } else if !ok {
                rep.violations += 1;
                if rep.first_violation.is_none() {
                    rep.first_violation = Some(format!("atom {atom}: {what}"));
                }
            }
        };
        for &s in grid_s {
            for &m in grid_m {
                // (C3)
                let lhs = f_minus.eval(m) <= s;
                let rhs = m <= inv_r.eval(s);
                let skip = !decisive(f_minus.eval(m), s) || !decisive(m, inv_r.eval(s));
                record(lhs == rhs, skip, &format!("(C3) at m={m:?}, s={s:?}"), &mut rep);
                // (C4)
                let lhs = f_plus.eval(m) >= s;
                let rhs = m >= inv_l.eval(s);
                let skip = !decisive(f_plus.eval(m), s) || !decisive(m, inv_l.eval(s));
                record(lhs == rhs, skip, &format!("(C4) at m={m:?}, s={s:?}"), &mut rep);
            }
            // sandwich on the interior of F's range
            if sf.at_neg_inf() < s && s < sf.at_pos_inf() {
                for g in [&inv_l, &inv_r] {
                    let gs = g.eval(s);
                    let lo = f_minus.eval(gs);
                    let hi = f_plus.eval(gs);
                    let skip = !decisive(lo, s) || !decisive(hi, s);
                    record(lo <= s && s <= hi, skip, &format!("sandwich at s={s:?}"), &mut rep);
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dbl(f: &MonotoneScalarFn, side: Side) -> MonotoneScalarFn {
        f.inverse(side).inverse(side)
    }

    #[test]
    fn linear_inverts_to_linear() {
        let f = MonotoneScalarFn::linear(2.0, 0.0).unwrap();
        let inv_l = f.inverse(Side::Left);
        let inv_r = f.inverse(Side::Right);
        for s in [-4.0, 0.0, 6.0] {
            assert_eq!(inv_l.eval(Finite(s)), Finite(s / 2.0));
            assert_eq!(inv_r.eval(Finite(s)), Finite(s / 2.0));
        }
        assert_eq!(inv_l.eval(NegInf), NegInf);
        assert_eq!(inv_r.eval(PosInf), PosInf);
    }

    #[test]
    fn step_function_inverses() {
        // F = 1_{m >= 1}
        let f = MonotoneScalarFn::step(1.0, Finite(0.0), Finite(1.0), Side::Right).unwrap();
        let inv_l = f.inverse(Side::Left);
        assert_eq!(inv_l.eval(Finite(0.5)), Finite(1.0));
        // F(inf) = 1 < 2, so the left inverse is +inf there
        assert_eq!(inv_l.eval(Finite(2.0)), PosInf);
        // continuous versions: F is right-continuous so F^+ = F at finite points
        let fm = f.continuous_version(Side::Left);
        let fp = f.continuous_version(Side::Right);
        assert_eq!(fm.eval(Finite(1.0)), Finite(0.0));
        assert_eq!(fp.eval(Finite(1.0)), Finite(1.0));
        assert_eq!(fm.eval(NegInf), NegInf);
        assert_eq!(fp.eval(PosInf), PosInf);
    }

    #[test]
    fn constant_zero_right_inverse() {
        let f = MonotoneScalarFn::constant(Finite(0.0));
        let inv_r = f.inverse(Side::Right);
        assert_eq!(inv_r.eval(Finite(1.0)), PosInf);
        assert_eq!(inv_r.eval(Finite(0.0)), PosInf);
        assert_eq!(inv_r.eval(Finite(-0.5)), NegInf);
        let inv_l = f.inverse(Side::Left);
        assert_eq!(inv_l.eval(Finite(0.0)), NegInf);
        assert_eq!(inv_l.eval(Finite(0.5)), PosInf);
    }

    #[test]
    fn identically_infinite_function() {
        let f = MonotoneScalarFn::constant(PosInf);
        let fm = f.continuous_version(Side::Left);
        assert_eq!(fm.eval(Finite(3.0)), PosInf);
        assert_eq!(fm.eval(NegInf), NegInf);
        assert_eq!(fm.eval(PosInf), PosInf);
    }

    #[test]
    fn flat_segment_left_right_endpoints() {
        // continuous, flat at level 1 on [0, 2], slope 1 outside
        let f = MonotoneScalarFn::from_breakpoints(
            NegInf,
            vec![
                Knot { x: 0.0, left: Finite(1.0), value: Finite(1.0), right: Finite(1.0) },
                Knot { x: 2.0, left: Finite(1.0), value: Finite(1.0), right: Finite(1.0) },
            ],
            PosInf,
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(f.inverse(Side::Left).eval(Finite(1.0)), Finite(0.0));
        assert_eq!(f.inverse(Side::Right).eval(Finite(1.0)), Finite(2.0));
    }

    #[test]
    fn double_inverse_identities() {
        let fns = vec![
            MonotoneScalarFn::linear(2.0, -1.0).unwrap(),
            MonotoneScalarFn::step(1.0, Finite(0.0), Finite(1.0), Side::Right).unwrap(),
            MonotoneScalarFn::step(-0.5, Finite(-2.0), Finite(3.0), Side::Left).unwrap(),
            MonotoneScalarFn::constant(Finite(0.0)),
            MonotoneScalarFn::from_breakpoints(
                Finite(-5.0),
                vec![
                    Knot { x: -1.0, left: Finite(-5.0), value: Finite(-4.0), right: Finite(-3.0) },
                    Knot { x: 2.0, left: Finite(0.0), value: Finite(0.0), right: Finite(0.0) },
                    Knot { x: 4.0, left: Finite(0.0), value: Finite(7.0), right: PosInf },
                ],
                PosInf,
                0.0,
                0.0,
            )
            .unwrap(),
        ];
        for f in &fns {
            assert!(
                dbl(f, Side::Left).eval_eq(&f.continuous_version(Side::Left)),
                "left double-inverse failed for {f:?}"
            );
            assert!(
                dbl(f, Side::Right).eval_eq(&f.continuous_version(Side::Right)),
                "right double-inverse failed for {f:?}"
            );
        }
    }

    #[test]
    fn left_inverse_below_right_inverse() {
        let f = MonotoneScalarFn::from_breakpoints(
            NegInf,
            vec![
                Knot { x: 0.0, left: Finite(0.0), value: Finite(0.0), right: Finite(0.0) },
                Knot { x: 1.0, left: Finite(0.0), value: Finite(0.0), right: Finite(2.0) },
            ],
            PosInf,
            1.0,
            1.0,
        )
        .unwrap();
        let inv_l = f.inverse(Side::Left);
        let inv_r = f.inverse(Side::Right);
        for s in [-3.0, -0.5, 0.0, 0.3, 1.0, 2.0, 5.0] {
            assert!(inv_l.eval(Finite(s)) <= inv_r.eval(Finite(s)), "at s={s}");
        }
    }

    #[test]
    fn conditional_remark_counterexample() {
        // F(m) = 2m on atom A, constant 1 on atom A^c; evaluated at s = 2 * 1_A
        let sp = crate::space::FilteredSpace::uniform(2, vec![vec![vec![0], vec![1]]]).unwrap();
        let f = MonotoneFn::new(
            &sp,
            0,
            vec![
                MonotoneScalarFn::linear(2.0, 0.0).unwrap(),
                MonotoneScalarFn::constant(Finite(1.0)),
            ],
        )
        .unwrap();
        let inv_l = f.inverse(Side::Left);
        let s = CondValue {
            level: 0,
            values: vec![Finite(2.0), Finite(0.0)],
        };
        let out = inv_l.eval(&s);
        assert_eq!(out.values, vec![Finite(1.0), NegInf]);
    }

    #[test]
    fn galois_on_linear_and_step() {
        let sp = crate::space::FilteredSpace::uniform(1, vec![vec![vec![0]]]).unwrap();
        let lin = MonotoneFn::broadcast(&sp, 0, MonotoneScalarFn::linear(2.0, 0.0).unwrap());
        let gm: Vec<ExtReal> = [-2.0, 0.0, 3.0].iter().map(|&v| Finite(v)).collect();
        let gs: Vec<ExtReal> = [-4.0, 0.1, 6.0].iter().map(|&v| Finite(v)).collect();
        let rep = galois_check(&lin, &gm, &gs);
        assert!(rep.passed(), "{:?}", rep.first_violation);

        let st = MonotoneFn::broadcast(
            &sp,
            0,
            MonotoneScalarFn::step(1.0, Finite(0.0), Finite(1.0), Side::Right).unwrap(),
        );
        let gm: Vec<ExtReal> = [0.0, 1.0, 2.0].iter().map(|&v| Finite(v)).collect();
        let gs = vec![Finite(0.5)];
        let rep = galois_check(&st, &gm, &gs);
        assert!(rep.passed(), "{:?}", rep.first_violation);
    }
}
