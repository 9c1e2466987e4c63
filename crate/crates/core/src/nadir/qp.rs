//! Small dense inequality-constrained least squares, solved by a primal
//! active-set method under an outer cutting loop. The fit has 3 to 11
//! unknowns and up to millions of candidate constraints; the outer loop
//! streams in the single most violated constraint per round, and the inner
//! solver works on the accumulated subset. Every constraint row has a 1 in
//! the intercept slot, so a feasible start is one intercept shift away.

/// Solves `A x = b` for a dense row-major `n x n` matrix by LU with partial
/// pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve_dense(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[perm[col] * n + col].abs();
        for (r, &pr) in perm.iter().enumerate().skip(col + 1) {
            let v = m[pr * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-300 {
            return None;
        }
        perm.swap(col, piv);
        let prow = perm[col];
        let diag = m[prow * n + col];
        for &r in &perm[col + 1..] {
            let factor = m[r * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                m[r * n + c] -= factor * m[prow * n + c];
            }
            x[r] -= factor * x[prow];
        }
    }
    let mut out = vec![0.0; n];
    for col in (0..n).rev() {
        let prow = perm[col];
        let mut v = x[prow];
        for c in col + 1..n {
            v -= m[prow * n + c] * out[c];
        }
        out[col] = v / m[prow * n + col];
    }
    Some(out)
}

/// One linear inequality `row . theta >= rhs`. The last slot of `row` is
/// the intercept coefficient and must be 1.
#[derive(Debug, Clone)]
pub struct Cut {
    pub row: Vec<f64>,
    pub rhs: f64,
    /// Stable identifier used for deterministic tie-breaking.
    pub tag: u64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimises `0.5 theta' H theta - g' theta` over `cuts[i] . theta >= rhs[i]`
/// for the accumulated cut set, starting from a feasible `x`.
fn primal_active_set(
    h: &[f64],
    g: &[f64],
    dim: usize,
    cuts: &[Cut],
    x: &mut Vec<f64>,
    tol: f64,
) -> bool {
    let mut working: Vec<usize> = Vec::new();
    for (i, c) in cuts.iter().enumerate() {
        if (dot(&c.row, x) - c.rhs).abs() <= tol {
            working.push(i);
        }
    }
    for _ in 0..500 {
        // direction to the optimum of the equality-constrained subproblem
        let k = working.len();
        let n = dim + k;
        let mut kkt = vec![0.0; n * n];
        let mut rhs = vec![0.0; n];
        for r in 0..dim {
            for c in 0..dim {
                kkt[r * n + c] = h[r * dim + c];
            }
            rhs[r] = g[r] - dot(&h[r * dim..(r + 1) * dim], x);
        }
        for (j, &ci) in working.iter().enumerate() {
            for c in 0..dim {
                kkt[(dim + j) * n + c] = cuts[ci].row[c];
                kkt[c * n + dim + j] = cuts[ci].row[c];
            }
            rhs[dim + j] = 0.0;
        }
        let Some(sol) = solve_dense(n, &kkt, &rhs) else {
            return false;
        };
        let p = &sol[..dim];
        let p_norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if p_norm <= tol {
            // multipliers: A' lambda = H x - g  =>  lambda = -tail
            let lambdas: Vec<f64> = sol[dim..].iter().map(|v| -v).collect();
            match lambdas
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            {
                Some((j, &worst)) if worst < -tol => {
                    working.remove(j);
                }
                _ => return true,
            }
            continue;
        }
        // longest step keeping the non-working cuts satisfied
        let mut alpha = 1.0_f64;
        let mut blocker: Option<usize> = None;
        for (i, c) in cuts.iter().enumerate() {
            if working.contains(&i) {
                continue;
            }
            let dir = dot(&c.row, p);
            if dir < -1e-14 {
                let slack = dot(&c.row, x) - c.rhs;
                let ratio = (-slack / dir).max(0.0);
                if ratio < alpha {
                    alpha = ratio;
                    blocker = Some(i);
                }
            }
        }
        for (xi, pi) in x.iter_mut().zip(p) {
            *xi += alpha * pi;
        }
        if let Some(b) = blocker {
            if !working.contains(&b) {
                working.push(b);
            }
        }
    }
    false
}

/// Outer cutting loop: stream the most violated constraint, restore
/// feasibility through the intercept, re-solve on the accumulated subset.
/// `find_worst` must return the most violated constraint for the given
/// theta (ties broken by tag), or `None` when all hold within tolerance.
pub fn active_set_min(
    h: &[f64],
    g: &[f64],
    dim: usize,
    mut find_worst: impl FnMut(&[f64]) -> Option<Cut>,
    max_outer: usize,
) -> Option<Vec<f64>> {
    // a ridge keeps H positive definite when the band is marginally
    // spanned; applied only when the plain system is singular
    let trace: f64 = (0..dim).map(|i| h[i * dim + i]).sum();
    let tol = 1e-9 * trace.max(1.0).sqrt();
    let (mut theta, hr) = match solve_dense(dim, h, g) {
        Some(t) => (t, h.to_vec()),
        None => {
            let ridge = 1e-9 * trace.max(1.0) / dim as f64;
            let mut hr = h.to_vec();
            for i in 0..dim {
                hr[i * dim + i] += ridge;
            }
            let t = solve_dense(dim, &hr, g)?;
            (t, hr)
        }
    };
    let mut cuts: Vec<Cut> = Vec::new();
    for _ in 0..max_outer {
        match find_worst(&theta) {
            None => return Some(theta),
            Some(cut) => {
                if cuts.iter().any(|c| c.tag == cut.tag) {
                    // the same point keeps violating: accept only if the
                    // residual is within the solver tolerance
                    let viol = cut.rhs - dot(&cut.row, &theta);
                    if viol <= tol.max(1e-9) {
                        return Some(theta);
                    }
                    return None;
                }
                cuts.push(cut);
            }
        }
        // feasibility restoration via the intercept slot
        let mut worst = 0.0_f64;
        for c in &cuts {
            worst = worst.max(c.rhs - dot(&c.row, &theta));
        }
        if worst > 0.0 {
            theta[dim - 1] += worst + 1e-12;
        }
        if !primal_active_set(&hr, g, dim, &cuts, &mut theta, 1e-10) {
            return None;
        }
    }
    None
}
