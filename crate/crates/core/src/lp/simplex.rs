//! Dense two-phase simplex over exact rationals with Bland's rule.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::{LinearProgram, LpConstraint, LpResult, Refutation, Witness};
use crate::ext::{ExtValue, Rational};
use crate::model::Rel;

/// Decides feasibility over nonnegative rationals.
///
/// With `lp.maximize` set, the returned witness maximizes that variable when
/// the maximum is finite.
pub fn q_feasible(lp: &LinearProgram) -> LpResult {
    let pre = presolve(lp);
    let kept: Vec<usize> = pre.kept.clone();
    let sub: Vec<LpConstraint> = kept.iter().map(|&i| pre.substituted(&lp.constraints[i])).collect();
    let vars: Vec<String> = {
        let mut s: BTreeSet<String> = sub.iter().flat_map(|c| c.vars().cloned()).collect();
        if let Some(m) = &lp.maximize {
            if !pre.zero.contains(m) && !pre.eliminated_set.contains(m) {
                s.insert(m.clone());
            }
        }
        s.into_iter().collect()
    };
    match solve_dense(&vars, &sub, lp.maximize.as_deref()) {
        Err(y) => {
            let mut multipliers = vec![Rational::zero(); lp.constraints.len()];
            for (k, &i) in kept.iter().enumerate() {
                multipliers[i] = y[k].clone();
            }
            let r = Refutation { multipliers, must_fin: None };
            debug_assert!(r.verify(lp).is_ok(), "{:?}", r.verify(lp));
            LpResult::Infeasible(r)
        }
        Ok(values) => {
            let mut w: BTreeMap<String, Rational> = values;
            for v in &pre.zero {
                w.insert(v.clone(), Rational::zero());
            }
            pre.reconstruct(lp, &mut w);
            let witness: Witness = lp
                .variables
                .iter()
                .map(|v| (v.clone(), ExtValue::Fin(w.get(v).cloned().unwrap_or_else(Rational::zero))))
                .collect();
            debug_assert!(lp.check(&witness).is_ok());
            LpResult::Feasible(witness)
        }
    }
}

/// Result of removing variables whose value can be chosen locally.
struct Presolve {
    kept: Vec<usize>,
    /// Variables that only occur on lesser sides; set to zero.
    zero: BTreeSet<String>,
    /// Variables that only occur on greater sides, in elimination order, with
    /// the constraints dropped along with them.
    eliminated: Vec<(String, Vec<usize>)>,
    eliminated_set: BTreeSet<String>,
}

impl Presolve {
    fn substituted(&self, c: &LpConstraint) -> LpConstraint {
        let mut c = c.clone();
        c.lhs.terms.retain(|v, _| !self.zero.contains(v));
        c.rhs.terms.retain(|v, _| !self.zero.contains(v));
        c
    }

    /// Chooses each eliminated variable just large enough, latest first.
    fn reconstruct(&self, lp: &LinearProgram, w: &mut BTreeMap<String, Rational>) {
        for (v, dropped) in self.eliminated.iter().rev() {
            let mut best = Rational::zero();
            for &i in dropped {
                let c = self.substituted(&lp.constraints[i]);
                let (g, l) = c.oriented().expect("eliminated variables avoid equalities");
                let a = g.terms[v].clone();
                let eval = |f: &super::LpForm, skip: Option<&String>| -> Rational {
                    let mut acc = f.constant.clone();
                    for (x, c) in &f.terms {
                        if Some(x) != skip {
                            acc += c * w.get(x).cloned().unwrap_or_else(Rational::zero);
                        }
                    }
                    acc
                };
                let need = (eval(l, None) - eval(g, Some(v))) / a;
                if need > best {
                    best = need;
                }
            }
            w.insert(v.clone(), best);
        }
    }
}

fn presolve(lp: &LinearProgram) -> Presolve {
    let mut alive: Vec<bool> = vec![true; lp.constraints.len()];
    let mut zero = BTreeSet::new();
    let mut eliminated = Vec::new();
    let mut eliminated_set = BTreeSet::new();
    loop {
        // (greater, lesser, equality) occurrence counts per variable
        let mut occ: BTreeMap<&String, (usize, usize, usize)> = BTreeMap::new();
        for (i, c) in lp.constraints.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            match c.oriented() {
                Some((g, l)) => {
                    for v in g.vars().filter(|v| !zero.contains(*v)) {
                        occ.entry(v).or_default().0 += 1;
                    }
                    for v in l.vars().filter(|v| !zero.contains(*v)) {
                        occ.entry(v).or_default().1 += 1;
                    }
                }
                None => {
                    for v in c.vars().filter(|v| !zero.contains(*v)) {
                        occ.entry(v).or_default().2 += 1;
                    }
                }
            }
        }
        let protected = lp.maximize.as_ref();
        let mut changed = false;
        for (v, (g, l, e)) in occ {
            if Some(v) == protected || e > 0 {
                continue;
            }
            if g == 0 && l > 0 {
                zero.insert(v.clone());
                changed = true;
            } else if l == 0 && g > 0 && !eliminated_set.contains(v) {
                let dropped: Vec<usize> = (0..lp.constraints.len())
                    .filter(|&i| alive[i] && lp.constraints[i].vars().any(|x| x == v))
                    .collect();
                for &i in &dropped {
                    alive[i] = false;
                }
                eliminated_set.insert(v.clone());
                eliminated.push((v.clone(), dropped));
                changed = true;
                // occurrence counts are stale now
                break;
            }
        }
        if !changed {
            break;
        }
    }
    let kept = (0..lp.constraints.len()).filter(|&i| alive[i]).collect();
    Presolve { kept, zero, eliminated, eliminated_set }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs of the current objective.
    cost: Vec<Rational>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x /= &p;
        }
        self.rhs[r] /= &p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (x, y) in self.rows[i].iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for (x, y) in self.cost.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes the current objective over columns `< ncols`. Returns false
    /// when unbounded.
    fn run(&mut self, ncols: usize) -> bool {
        loop {
            let Some(enter) = (0..ncols).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

/// Solves the system densely. On infeasibility returns one multiplier per
/// constraint for the combination `Σ y_i (greater_i − lesser_i) ≥ 0`.
fn solve_dense(
    vars: &[String],
    cons: &[LpConstraint],
    maximize: Option<&str>,
) -> Result<BTreeMap<String, Rational>, Vec<Rational>> {
    let nx = vars.len();
    let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let slack_rows: Vec<usize> = (0..cons.len()).filter(|&i| cons[i].rel != Rel::Eq).collect();
    let ns = slack_rows.len();
    let m = cons.len();
    let ncols = nx + ns + m;
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut sign = Vec::with_capacity(m);
    let mut slack_of = vec![None; m];
    for (k, &i) in slack_rows.iter().enumerate() {
        slack_of[i] = Some(nx + k);
    }
    for (i, c) in cons.iter().enumerate() {
        // greater − lesser ≥ 0 becomes a·x − s = b
        let (coeffs, constant) = c.difference();
        let mut row = vec![Rational::zero(); ncols];
        for (v, a) in coeffs {
            row[index[v.as_str()]] += a;
        }
        if let Some(s) = slack_of[i] {
            row[s] = -Rational::one();
        }
        let mut b = -constant;
        let s = if b.is_negative() { -Rational::one() } else { Rational::one() };
        if s.is_negative() {
            for x in row.iter_mut() {
                *x = -x.clone();
            }
            b = -b;
        }
        row[nx + ns + i] = Rational::one();
        rows.push(row);
        rhs.push(b);
        sign.push(s);
    }
    let mut cost = vec![Rational::zero(); ncols];
    for j in 0..nx + ns {
        for row in &rows {
            cost[j] -= &row[j];
        }
    }
    let basis = (nx + ns..ncols).collect();
    let mut t = Tableau { rows, rhs, basis, cost };
    t.run(ncols);
    let infeasible = t
        .basis
        .iter()
        .zip(&t.rhs)
        .any(|(&b, v)| b >= nx + ns && v.is_positive());
    if infeasible {
        // the phase-one dual is y_i = 1 − reduced cost of artificial i
        let y = (0..m)
            .map(|i| (Rational::one() - &t.cost[nx + ns + i]) * &sign[i])
            .collect();
        return Err(y);
    }
    // drive remaining artificials out, dropping redundant rows
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= nx + ns {
            match (0..nx + ns).find(|&j| !t.rows[r][j].is_zero()) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    let width = nx + ns;
    for row in t.rows.iter_mut() {
        row.truncate(width);
    }
    if let Some(obj) = maximize.and_then(|m| index.get(m).copied()) {
        let mut c = vec![Rational::zero(); width];
        c[obj] = -Rational::one();
        let mut red = c.clone();
        for (i, &b) in t.basis.iter().enumerate() {
            if !c[b].is_zero() {
                for (x, a) in red.iter_mut().zip(&t.rows[i]) {
                    *x -= &c[b] * a;
                }
            }
        }
        t.cost = red;
        t.run(width);
    }
    let mut values = BTreeMap::new();
    for v in vars {
        values.insert(v.clone(), Rational::zero());
    }
    for (i, &b) in t.basis.iter().enumerate() {
        if b < nx {
            values.insert(vars[b].clone(), t.rhs[i].clone());
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext::rat;

    fn lp(text: &str) -> LinearProgram {
        LinearProgram::from_text(text).unwrap()
    }

    #[test]
    fn simple_contradiction() {
        let p = lp("x >= 1\n0 >= x\n");
        let r = q_feasible(&p).refutation().cloned().expect("infeasible");
        r.verify(&p).unwrap();
        assert_eq!(r.conclusion(&p), "0 >= 1");
    }

    #[test]
    fn trivially_feasible() {
        let p = lp("1 >= x + y\n");
        let w = q_feasible(&p).witness().cloned().unwrap();
        assert!(p.check(&w).is_ok());
    }

    #[test]
    fn maximization_reaches_the_bound() {
        let p = lp("# maximize e\n1 >= e\nx >= e\n3 >= 2 * x\ny = x + e\n");
        let w = q_feasible(&p).witness().cloned().unwrap();
        assert_eq!(w["e"], ExtValue::Fin(rat(1, 1)));
        assert!(p.check(&w).is_ok());
    }

    #[test]
    fn equalities_and_degeneracy() {
        let p = lp("x + y = 2\nx = y\nx >= 1\n1 >= y\nz = x + y\n");
        let w = q_feasible(&p).witness().cloned().unwrap();
        assert_eq!(w["z"], ExtValue::from_int(2));
        let q = lp("x + y = 2\nx = y\nx >= 2\n");
        let r = q_feasible(&q).refutation().cloned().unwrap();
        r.verify(&q).unwrap();
    }

    #[test]
    fn presolve_reconstructs_free_greater_variables() {
        let p = lp("a >= b + 3\nb >= 2\n2 * a >= c + 1\n");
        let w = q_feasible(&p).witness().cloned().unwrap();
        assert!(p.check(&w).is_ok(), "{w:?}");
    }
}
