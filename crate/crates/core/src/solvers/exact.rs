//! Exhaustive QUBO minimization.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::SolverError;
use crate::qubo::{Qubo, VarLabel};
use crate::scalar::Scalar;

pub const BRUTE_FORCE_LIMIT: usize = 25;

/// Largest residual component [`exact_with_separator`] enumerates.
const COMPONENT_LIMIT: usize = 20;

fn lex_cmp(a: &[u8], b: &[u8]) -> Ordering {
    a.cmp(b)
}

fn mask_bits(mask: u32, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((mask >> i) & 1) as u8).collect()
}

/// Global minimum over all `2^n` assignments; ties go to the
/// lexicographically smallest assignment (variable 0 most significant).
///
/// States are visited in Gray-code order with an `f64` running energy.
/// Every state within rounding distance of the incumbent is re-evaluated
/// exactly in `T` before it can replace it.
pub fn exact_bruteforce<T: Scalar>(q: &Qubo<T>) -> Result<(Vec<u8>, T), SolverError> {
    let n = q.num_vars();
    if n > BRUTE_FORCE_LIMIT {
        return Err(SolverError::SizeLimit {
            num_vars: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut linear = vec![0.0f64; n];
    for (&i, &u) in q.linear() {
        linear[i] = u.to_f64_lossy();
    }
    let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut scale = q.offset().to_f64_lossy().abs() + linear.iter().map(|u| u.abs()).sum::<f64>();
    for (&(i, j), &w) in q.quadratic() {
        let w = w.to_f64_lossy();
        neighbors[i].push((j, w));
        neighbors[j].push((i, w));
        scale += w.abs();
    }
    let tol = 1e-9 * (1.0 + scale);

    let exact = |mask: u32| {
        let x = mask_bits(mask, n);
        let e = q.energy_unchecked(&x);
        (x, e)
    };

    let mut x = vec![0u8; n];
    let mut field = linear.clone();
    let mut e = q.offset().to_f64_lossy();
    let mut mask = 0u32;
    let (mut best_x, mut best_e) = exact(0);
    let mut best_f = best_e.to_f64_lossy();

    for step in 1u64..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        let delta = if x[i] == 0 { 1.0 } else { -1.0 };
        e += delta * field[i];
        x[i] ^= 1;
        mask ^= 1 << i;
        for &(j, w) in &neighbors[i] {
            field[j] += w * delta;
        }
        if e <= best_f + tol {
            let (cx, ce) = exact(mask);
            let better = match ce.total_cmp_value(&best_e) {
                Ordering::Less => true,
                Ordering::Equal => lex_cmp(&cx, &best_x) == Ordering::Less,
                Ordering::Greater => false,
            };
            if better {
                best_f = ce.to_f64_lossy();
                best_x = cx;
                best_e = ce;
            }
        }
    }
    Ok((best_x, best_e))
}

/// Exact minimum by enumerating every assignment of `separator` and, for
/// each, exhaustively minimizing the connected components the remaining
/// variables form once the separator is fixed.
///
/// Ties go to the lexicographically smallest full assignment.
pub fn exact_with_separator<T: Scalar>(
    q: &Qubo<T>,
    separator: &[usize],
) -> Result<(Vec<u8>, T), SolverError> {
    let n = q.num_vars();
    let mut in_sep = vec![false; n];
    for &s in separator {
        in_sep[s] = true;
    }
    let sep: Vec<usize> = (0..n).filter(|&i| in_sep[i]).collect();
    if sep.len() > BRUTE_FORCE_LIMIT {
        return Err(SolverError::SizeLimit {
            num_vars: sep.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    // components of the residual interaction graph
    let mut comp = vec![usize::MAX; n];
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in q.quadratic().keys() {
        if !in_sep[i] && !in_sep[j] {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if in_sep[start] || comp[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut k = 0;
        while k < members.len() {
            let u = members[k];
            k += 1;
            for &w in &adj[u] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        if members.len() > COMPONENT_LIMIT {
            return Err(SolverError::SizeLimit {
                num_vars: members.len(),
                limit: COMPONENT_LIMIT,
            });
        }
        components.push(members);
    }

    // per-component sub-terms; couplings to the separator are kept aside
    let mut comp_linear: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); components.len()];
    let mut comp_quad: Vec<Vec<(usize, usize, T)>> = vec![Vec::new(); components.len()];
    let mut cross: Vec<Vec<(usize, usize, T)>> = vec![Vec::new(); components.len()];
    let mut sep_linear = BTreeMap::new();
    let mut sep_quad = Vec::new();
    for (&i, &u) in q.linear() {
        if in_sep[i] {
            sep_linear.insert(i, u);
        } else {
            comp_linear[comp[i]].insert(i, u);
        }
    }
    for (&(i, j), &w) in q.quadratic() {
        match (in_sep[i], in_sep[j]) {
            (true, true) => sep_quad.push((i, j, w)),
            (false, false) => comp_quad[comp[i]].push((i, j, w)),
            (true, false) => cross[comp[j]].push((j, i, w)),
            (false, true) => cross[comp[i]].push((i, j, w)),
        }
    }

    let mut best: Option<(Vec<u8>, T)> = None;
    let mut x = vec![0u8; n];
    for smask in 0u64..(1u64 << sep.len()) {
        for (b, &s) in sep.iter().enumerate() {
            x[s] = ((smask >> b) & 1) as u8;
        }
        let mut e = q.offset();
        for (&i, &u) in &sep_linear {
            if x[i] == 1 {
                e = e + u;
            }
        }
        for &(i, j, w) in &sep_quad {
            if x[i] == 1 && x[j] == 1 {
                e = e + w;
            }
        }
        for (c, members) in components.iter().enumerate() {
            // effective linear terms given the separator values
            let mut lin: BTreeMap<usize, T> = comp_linear[c].clone();
            for &(r, s, w) in &cross[c] {
                if x[s] == 1 {
                    let entry = lin.entry(r).or_insert_with(T::zero);
                    *entry = *entry + w;
                }
            }
            let mut best_c: Option<(Vec<u8>, T)> = None;
            for cmask in 0u32..(1u32 << members.len()) {
                let bits = mask_bits(cmask, members.len());
                for (k, &m) in members.iter().enumerate() {
                    x[m] = bits[k];
                }
                let mut ce = T::zero();
                for (&i, &u) in &lin {
                    if x[i] == 1 {
                        ce = ce + u;
                    }
                }
                for &(i, j, w) in &comp_quad[c] {
                    if x[i] == 1 && x[j] == 1 {
                        ce = ce + w;
                    }
                }
                let vals: Vec<u8> = members.iter().map(|&m| x[m]).collect();
                let better = match &best_c {
                    None => true,
                    Some((bv, be)) => match ce.total_cmp_value(be) {
                        Ordering::Less => true,
                        Ordering::Equal => vals < *bv,
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best_c = Some((vals, ce));
                }
            }
            let (vals, ce) = best_c.expect("component is non-empty");
            for (k, &m) in members.iter().enumerate() {
                x[m] = vals[k];
            }
            e = e + ce;
        }
        let better = match &best {
            None => true,
            Some((bx, be)) => match e.total_cmp_value(be) {
                Ordering::Less => true,
                Ordering::Equal => lex_cmp(&x, bx) == Ordering::Less,
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some((x.clone(), e));
        }
    }
    Ok(best.unwrap_or_else(|| (Vec::new(), q.offset())))
}

/// Exact ground state of a multicut QUBO: plain enumeration when it fits,
/// otherwise enumeration over the vertex variables with slack bits solved per
/// path.
pub fn exact_ground_state<T: Scalar>(q: &Qubo<T>) -> Result<(Vec<u8>, T), SolverError> {
    if q.num_vars() <= BRUTE_FORCE_LIMIT {
        return exact_bruteforce(q);
    }
    let separator: Vec<usize> = q
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| matches!(l, VarLabel::Vertex(_)))
        .map(|(i, _)| i)
        .collect();
    exact_with_separator(q, &separator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn empty_model_returns_offset() {
        let q = Qubo::<f64>::unlabeled(0, BTreeMap::new(), BTreeMap::new(), 2.5).unwrap();
        assert_eq!(exact_bruteforce(&q).unwrap(), (vec![], 2.5));
    }

    #[test]
    fn size_limit() {
        let q = Qubo::<f64>::unlabeled(26, BTreeMap::new(), BTreeMap::new(), 0.0).unwrap();
        assert_eq!(
            exact_bruteforce(&q).unwrap_err(),
            SolverError::SizeLimit { num_vars: 26, limit: 25 }
        );
    }

    #[test]
    fn ties_resolve_lexicographically() {
        // E = -x0 - x1 + 2 x0 x1: minima (0,1) and (1,0)
        let q = Qubo::unlabeled(
            2,
            BTreeMap::from([(0, Rational64::from_integer(-1)), (1, Rational64::from_integer(-1))]),
            BTreeMap::from([((0, 1), Rational64::from_integer(2))]),
            Rational64::from_integer(0),
        )
        .unwrap();
        assert_eq!(exact_bruteforce(&q).unwrap().0, vec![0, 1]);
        assert_eq!(exact_with_separator(&q, &[0]).unwrap().0, vec![0, 1]);
        let zero = Qubo::<f64>::unlabeled(3, BTreeMap::new(), BTreeMap::new(), 0.0).unwrap();
        assert_eq!(exact_bruteforce(&zero).unwrap().0, vec![0, 0, 0]);
    }

    #[test]
    fn separator_matches_plain_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.gen_range(1..=9);
            let mut lin = BTreeMap::new();
            let mut quad = BTreeMap::new();
            for i in 0..n {
                lin.insert(i, rng.gen_range(-3i64..=3) as f64);
                for j in i + 1..n {
                    if rng.gen_bool(0.4) {
                        quad.insert((i, j), rng.gen_range(-3i64..=3) as f64);
                    }
                }
            }
            let q = Qubo::unlabeled(n, lin, quad, 1.0).unwrap();
            let sep: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let a = exact_bruteforce(&q).unwrap();
            let b = exact_with_separator(&q, &sep).unwrap();
            assert_eq!(a, b, "separator {sep:?}");
        }
    }
}
