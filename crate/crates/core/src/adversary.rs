//! A deterministic adversary for two-dimensional Tarski search. It answers
//! queries online as a herringbone whose main path is left undetermined for
//! as long as possible, steering by the exact number of monotone paths that
//! remain consistent with its answers.
//!
//! Off-path answers are `NW = (x-1, y+1)` or `SE = (x+1, y-1)`. An `NW`
//! answer at `q` rules out the block `{x' >= q.x, y' <= q.y}` for the main
//! path, an `SE` answer the block `{x' <= q.x, y' >= q.y}`. When both would
//! disconnect every remaining path, the query lies on the path and the
//! adversary answers with a principal direction, shrinking the domain.

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::instances::herringbone::HerringboneInstance;
use crate::lattice::{GridPoint, GridShape};
use crate::oracle::{GridFn, Oracle};
use crate::solvers::{Outcome, SolveOutcome, SolverKind};

type P = [i64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    NW,
    SE,
    N,
    S,
    E,
    W,
    FixedHere,
}

impl Direction {
    fn apply(self, q: P) -> P {
        let [x, y] = q;
        match self {
            Direction::NW => [x - 1, y + 1],
            Direction::SE => [x + 1, y - 1],
            Direction::N => [x, y + 1],
            Direction::S => [x, y - 1],
            Direction::E => [x + 1, y],
            Direction::W => [x - 1, y],
            Direction::FixedHere => q,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NonDecisive,
    Short,
    Decisive,
    /// The query lies outside the live region, so the answer is implied by
    /// earlier answers and the path count is unchanged.
    Forced,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerRecord {
    pub query: GridPoint,
    pub answer: GridPoint,
    pub direction: Direction,
    pub classification: Classification,
    pub paths_before: BigUint,
    pub paths_after: BigUint,
}

fn log2(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    let shift = bits.saturating_sub(60);
    let top = (v >> shift).to_f64().expect("fits");
    top.log2() + shift as f64
}

impl Serialize for AnswerRecord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("AnswerRecord", 6)?;
        st.serialize_field("query", &self.query)?;
        st.serialize_field("answer", &self.answer)?;
        st.serialize_field("direction", &self.direction)?;
        st.serialize_field("classification", &self.classification)?;
        st.serialize_field("log2_paths_before", &log2(&self.paths_before))?;
        st.serialize_field("log2_paths_after", &log2(&self.paths_after))?;
        st.end()
    }
}

impl AnswerRecord {
    /// The per-answer loss bound on the log path count `L`: decisive answers
    /// keep `L/2 - 1`, non-decisive ones `L - 2`, short ones `L - w log2 N`.
    /// Checked exactly in integers.
    pub fn potential_holds(&self, n: i64, w: i64) -> bool {
        let (b, a) = (&self.paths_before, &self.paths_after);
        match self.classification {
            Classification::Decisive => BigUint::from(4u8) * a * a >= *b,
            Classification::NonDecisive => BigUint::from(4u8) * a >= *b,
            Classification::Short => a * BigUint::from(n as u64).pow(w as u32) >= *b,
            Classification::Forced => a == b,
        }
    }
}

/// Path counts on one anti-diagonal `x + y = k`, indexed by `x - x0`.
struct Diag {
    x0: i64,
    vals: Vec<BigUint>,
}

impl Diag {
    fn get(&self, x: i64) -> Option<&BigUint> {
        if x < self.x0 {
            return None;
        }
        self.vals.get((x - self.x0) as usize)
    }

    fn at(&self, x: i64) -> BigUint {
        self.get(x).cloned().unwrap_or_default()
    }
}

#[derive(Clone, Debug)]
pub struct Adversary {
    shape: GridShape,
    n: i64,
    w: i64,
    /// `lo[x]`: highest forbidden `y` of the lower-right region in column `x`.
    lo: Vec<i64>,
    /// `hi[x]`: lowest forbidden `y` of the upper-left region in column `x`.
    hi: Vec<i64>,
    s: P,
    u: P,
    /// Committed path from `(1,1)` up to, excluding, `s`.
    lower_tail: Vec<P>,
    /// Committed path after `u` up to `(n,n)`.
    upper_tail: Vec<P>,
    total: BigUint,
    history: Vec<AnswerRecord>,
}

impl Adversary {
    pub fn new(n: i64) -> Result<Self> {
        let shape = GridShape::uniform(2, n)?;
        let len = (n + 2) as usize;
        let mut adv = Self {
            shape,
            n,
            w: n.sqrt(),
            lo: vec![0; len],
            hi: vec![n + 1; len],
            s: [1, 1],
            u: [n, n],
            lower_tail: Vec::new(),
            upper_tail: Vec::new(),
            total: BigUint::zero(),
            history: Vec::new(),
        };
        adv.total = adv.path_count();
        Ok(adv)
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn width(&self) -> i64 {
        self.w
    }

    pub fn domain(&self) -> (GridPoint, GridPoint) {
        (GridPoint::from(self.s), GridPoint::from(self.u))
    }

    pub fn history(&self) -> &[AnswerRecord] {
        &self.history
    }

    pub fn paths_remaining(&self) -> &BigUint {
        &self.total
    }

    pub fn is_finished(&self) -> bool {
        self.s == self.u && self.history.iter().any(|r| r.direction == Direction::FixedHere)
    }

    /// Rules out `{x' >= q.x, y' <= q.y}`.
    pub fn forbid_lower_right(&mut self, q: &GridPoint) {
        for x in q[0]..=self.n {
            let v = &mut self.lo[x as usize];
            *v = (*v).max(q[1]);
        }
        self.total = self.path_count();
    }

    /// Rules out `{x' <= q.x, y' >= q.y}`.
    pub fn forbid_upper_left(&mut self, q: &GridPoint) {
        for x in 1..=q[0] {
            let v = &mut self.hi[x as usize];
            *v = (*v).min(q[1]);
        }
        self.total = self.path_count();
    }

    fn in_rect(&self, [x, y]: P) -> bool {
        self.s[0] <= x && x <= self.u[0] && self.s[1] <= y && y <= self.u[1]
    }

    fn live(&self, p: P) -> bool {
        self.in_rect(p) && self.lo[p[0] as usize] < p[1] && p[1] < self.hi[p[0] as usize]
    }

    fn diag_range(&self, k: i64) -> (i64, i64) {
        ((self.s[0]).max(k - self.u[1]), (self.u[0]).min(k - self.s[1]))
    }

    /// Forward counts (paths from `s`) on diagonals `k - 1` and `k`.
    fn forward(&self, k: i64) -> (Diag, Diag) {
        let ks = self.s[0] + self.s[1];
        let mut prev = Diag { x0: self.s[0], vals: Vec::new() };
        let mut cur = Diag {
            x0: self.s[0],
            vals: vec![if self.live(self.s) { BigUint::one() } else { BigUint::zero() }],
        };
        for kk in ks + 1..=k {
            let (a, b) = self.diag_range(kk);
            let vals = (a..=b)
                .map(|x| if self.live([x, kk - x]) { cur.at(x - 1) + cur.at(x) } else { BigUint::zero() })
                .collect();
            prev = std::mem::replace(&mut cur, Diag { x0: a, vals });
        }
        (prev, cur)
    }

    /// Backward counts (paths to `u`) on diagonals `k + 1` and `k`.
    fn backward(&self, k: i64) -> (Diag, Diag) {
        let ku = self.u[0] + self.u[1];
        let (a0, _) = self.diag_range(ku);
        let mut next = Diag { x0: a0, vals: Vec::new() };
        let mut cur = Diag {
            x0: a0,
            vals: vec![if self.live(self.u) { BigUint::one() } else { BigUint::zero() }],
        };
        for kk in (k..ku).rev() {
            let (a, b) = self.diag_range(kk);
            let vals = (a..=b)
                .map(|x| if self.live([x, kk - x]) { cur.at(x + 1) + cur.at(x) } else { BigUint::zero() })
                .collect();
            next = std::mem::replace(&mut cur, Diag { x0: a, vals });
        }
        (next, cur)
    }

    /// Exact number of monotone paths from `s` to `u` through live points.
    pub fn path_count(&self) -> BigUint {
        let (_, last) = self.forward(self.u[0] + self.u[1]);
        last.at(self.u[0])
    }

    /// A live monotone path from `from` to `to`, preferring E steps.
    fn live_path(&self, from: P, to: P) -> Result<Vec<P>> {
        let (w, h) = ((to[0] - from[0] + 1) as usize, (to[1] - from[1] + 1) as usize);
        let idx = |p: P| (p[0] - from[0]) as usize * h + (p[1] - from[1]) as usize;
        let mut ok = vec![false; w * h];
        for x in (from[0]..=to[0]).rev() {
            for y in (from[1]..=to[1]).rev() {
                let p = [x, y];
                ok[idx(p)] = self.live(p)
                    && (p == to || (x < to[0] && ok[idx([x + 1, y])]) || (y < to[1] && ok[idx([x, y + 1])]));
            }
        }
        if !ok[idx(from)] {
            return Err(Error::Internal(format!("no live path from {from:?} to {to:?}")));
        }
        let mut p = from;
        let mut path = vec![p];
        while p != to {
            p = if p[0] < to[0] && ok[idx([p[0] + 1, p[1]])] { [p[0] + 1, p[1]] } else { [p[0], p[1] + 1] };
            path.push(p);
        }
        Ok(path)
    }

    /// Answer implied by the committed parts of the path for a query
    /// outside the live region.
    fn forced(&self, q: P) -> Direction {
        let k = q[0] + q[1];
        let (ks, ku) = (self.s[0] + self.s[1], self.u[0] + self.u[1]);
        let geometric = |p: P| if q[0] > p[0] { Direction::NW } else { Direction::SE };
        let step = |from: P, to: P| match (to[0] - from[0], to[1] - from[1]) {
            (1, 0) => Direction::E,
            (0, 1) => Direction::N,
            (-1, 0) => Direction::W,
            _ => Direction::S,
        };
        if k < ks {
            let i = (k - 2) as usize;
            let p = self.lower_tail[i];
            if p != q {
                return geometric(p);
            }
            return step(q, self.lower_tail.get(i + 1).copied().unwrap_or(self.s));
        }
        if k > ku {
            let i = (k - ku - 1) as usize;
            let p = self.upper_tail[i];
            if p != q {
                return geometric(p);
            }
            return step(q, if i == 0 { self.u } else { self.upper_tail[i - 1] });
        }
        if self.in_rect(q) {
            if q[1] <= self.lo[q[0] as usize] {
                Direction::NW
            } else {
                Direction::SE
            }
        } else if q[0] < self.s[0] || q[1] > self.u[1] {
            Direction::SE
        } else {
            Direction::NW
        }
    }

    pub fn answer(&mut self, q: &GridPoint) -> Result<GridPoint> {
        if !self.shape.contains(q) {
            return Err(Error::Protocol(format!("query {q} lies outside the grid")));
        }
        let qp: P = [q[0], q[1]];
        let before = self.total.clone();
        let (direction, classification, after) = if !self.live(qp) {
            (self.forced(qp), Classification::Forced, before.clone())
        } else if self.s == self.u {
            (Direction::FixedHere, Classification::Decisive, before.clone())
        } else {
            self.answer_live(qp)?
        };
        if after.is_zero() {
            return Err(Error::Internal(format!("answer at {q} leaves no feasible path")));
        }
        self.total = after.clone();
        let answer = GridPoint::from(direction.apply(qp));
        self.history.push(AnswerRecord {
            query: q.clone(),
            answer: answer.clone(),
            direction,
            classification,
            paths_before: before,
            paths_after: after,
        });
        Ok(answer)
    }

    fn answer_live(&mut self, q: P) -> Result<(Direction, Classification, BigUint)> {
        let k = q[0] + q[1];
        let (f_prev, f_cur) = self.forward(k);
        let (g_next, g_cur) = self.backward(k);
        let (a, b) = self.diag_range(k);
        let mut nw = BigUint::zero();
        let mut se = BigUint::zero();
        for x in a..=b {
            let through = f_cur.at(x) * g_cur.at(x);
            if x < q[0] {
                nw += through;
            } else if x > q[0] {
                se += through;
            }
        }

        if nw.is_zero() && se.is_zero() {
            let (fq, gq) = (f_cur.at(q[0]), g_cur.at(q[0]));
            let lower = q != self.s && (q == self.u || fq >= gq);
            if lower {
                let (cw, cs) = (f_prev.at(q[0] - 1), f_prev.at(q[0]));
                let (dir, count) = if cw >= cs { (Direction::W, cw) } else { (Direction::S, cs) };
                let mut tail = self.live_path(q, self.u)?;
                tail.append(&mut self.upper_tail);
                self.upper_tail = tail;
                self.u = dir.apply(q);
                return Ok((dir, Classification::Decisive, count));
            }
            let (ce, cn) = (g_next.at(q[0] + 1), g_next.at(q[0]));
            let (dir, count) = if ce >= cn { (Direction::E, ce) } else { (Direction::N, cn) };
            let mut head = self.live_path(self.s, q)?;
            self.lower_tail.append(&mut head);
            self.s = dir.apply(q);
            return Ok((dir, Classification::Decisive, count));
        }

        let run = |dx: i64, dy: i64| {
            let mut j = 1;
            while self.live([q[0] + j * dx, q[1] + j * dy]) {
                j += 1;
            }
            j
        };
        let (qa, qb) = (run(-1, 1), run(1, -1));
        let short = 2 * qa.min(qb) <= self.w;
        let mut dir = if short {
            if qa >= qb { Direction::NW } else { Direction::SE }
        } else if nw >= se {
            Direction::NW
        } else {
            Direction::SE
        };
        if dir == Direction::NW && nw.is_zero() {
            dir = Direction::SE;
        } else if dir == Direction::SE && se.is_zero() {
            dir = Direction::NW;
        }
        let count = if dir == Direction::NW {
            for x in q[0]..=self.n {
                let v = &mut self.lo[x as usize];
                *v = (*v).max(q[1]);
            }
            nw
        } else {
            for x in 1..=q[0] {
                let v = &mut self.hi[x as usize];
                *v = (*v).min(q[1]);
            }
            se
        };
        let class = if short { Classification::Short } else { Classification::NonDecisive };
        Ok((dir, class, count))
    }

    /// A herringbone consistent with every answer given so far: committed
    /// path pieces joined by a live path through the current domain, with
    /// the fixed point at the domain's lower corner.
    pub fn extract_consistent_instance(&self) -> Result<HerringboneInstance> {
        let mut path = self.lower_tail.clone();
        path.extend(self.live_path(self.s, self.u)?);
        path.extend(self.upper_tail.iter().copied());
        HerringboneInstance::new(self.n, path, self.s)
            .map_err(|e| Error::Internal(format!("extracted instance is invalid: {e}")))
    }
}

impl GridFn for Adversary {
    fn shape(&self) -> &GridShape {
        &self.shape
    }

    fn eval(&mut self, x: &GridPoint) -> Result<GridPoint> {
        self.answer(x)
    }
}

/// Number of transcript entries the instance answers differently.
pub fn replay_mismatches(inst: &HerringboneInstance, history: &[AnswerRecord]) -> Result<usize> {
    let f = inst.oracle()?;
    Ok(history.iter().filter(|r| GridPoint::from(f.apply(r.query[0], r.query[1])) != r.answer).count())
}

#[derive(Clone, Debug, Serialize)]
pub struct DuelReport {
    pub solver: SolverKind,
    #[serde(rename = "N")]
    pub n: i64,
    pub queries: u64,
    pub outcome: SolveOutcome,
    pub transcript: Vec<AnswerRecord>,
    pub extracted_instance: HerringboneInstance,
    pub replay_mismatches: usize,
    pub potential_violations: usize,
    pub fixed_point_consistent: bool,
    pub consistency: String,
}

impl DuelReport {
    pub fn is_ok(&self) -> bool {
        self.consistency == "ok"
    }
}

/// Runs `solver` against a fresh adversary on `[n]^2`.
pub fn duel(solver: SolverKind, n: i64) -> Result<DuelReport> {
    let mut oracle = Oracle::new(Adversary::new(n)?);
    let bx = oracle.full_box().clone();
    let outcome = solver.run(&mut oracle, &bx, false)?;
    let queries = oracle.queries();
    let adv = oracle.into_inner();
    let instance = adv.extract_consistent_instance()?;
    let mismatches = replay_mismatches(&instance, adv.history())?;
    let violations = adv.history().iter().filter(|r| !r.potential_holds(n, adv.w)).count();
    let fixed_point_consistent = match &outcome.outcome {
        Outcome::FixedPoint(p) => *p == GridPoint::from(instance.fixed_point),
        Outcome::Witness(_) => false,
    };
    let consistency = if mismatches > 0 {
        format!("adversary defect: {mismatches} transcript answers do not replay")
    } else if !fixed_point_consistent {
        format!("solver defect: claimed {:?} but the instance's fixed point is {:?}", outcome.outcome, instance.fixed_point)
    } else {
        "ok".to_string()
    };
    Ok(DuelReport {
        solver,
        n,
        queries,
        outcome,
        transcript: adv.history().to_vec(),
        extracted_instance: instance,
        replay_mismatches: mismatches,
        potential_violations: violations,
        fixed_point_consistent,
        consistency,
    })
}
