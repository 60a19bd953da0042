use crate::engine::{Instance, Term};
use crate::linalg::{ComplexMatrix, HermitianMatrix};

/// Greedily reduces a failing instance while `still_fails` keeps returning
/// true: principal compressions to the smallest failing index set, then
/// rounding every entry to the fewest decimal digits that still fail, then
/// dropping terms. Repeats until no step applies. Deterministic given the
/// instance and the predicate; returns the input unchanged if nothing
/// smaller fails.
pub fn shrink(inst: &Instance, still_fails: impl Fn(&Instance) -> bool) -> Instance {
    let mut cur = inst.clone();
    loop {
        let before = cur.clone();
        if let Some(next) = compress(&cur, &still_fails) {
            cur = next;
        }
        if let Some(next) = round(&cur, &still_fails) {
            cur = next;
        }
        if let Some(next) = drop_term(&cur, &still_fails) {
            cur = next;
        }
        if cur == before {
            return cur;
        }
    }
}

fn restrict(inst: &Instance, idx: &[usize]) -> Instance {
    let terms =
        inst.terms.iter().map(|t| Term::new(t.a.principal_submatrix(idx), t.z.principal_submatrix(idx))).collect();
    Instance { claim: inst.claim, f: inst.f.clone(), terms, k: inst.k.map(|k| k.min(idx.len())) }
}

/// Index subsets of `0..n` of size `k` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn compress(inst: &Instance, still_fails: &impl Fn(&Instance) -> bool) -> Option<Instance> {
    let n = inst.n();
    for size in 1..n {
        for idx in subsets(n, size) {
            let cand = restrict(inst, &idx);
            if still_fails(&cand) {
                return Some(cand);
            }
        }
    }
    None
}

fn round_matrix(m: &ComplexMatrix, digits: i32) -> ComplexMatrix {
    let s = 10f64.powi(digits);
    m.map(|c| num_complex::Complex64::new((c.re * s).round() / s, (c.im * s).round() / s))
}

fn round(inst: &Instance, still_fails: &impl Fn(&Instance) -> bool) -> Option<Instance> {
    for digits in 1..=15 {
        let terms = inst
            .terms
            .iter()
            .map(|t| Term::new(HermitianMatrix::from_matrix(&round_matrix(&t.a, digits)), round_matrix(&t.z, digits)))
            .collect();
        let cand = Instance { terms, ..inst.clone() };
        if cand == *inst {
            return None;
        }
        if still_fails(&cand) {
            return Some(cand);
        }
    }
    None
}

fn drop_term(inst: &Instance, still_fails: &impl Fn(&Instance) -> bool) -> Option<Instance> {
    if inst.m() < 2 {
        return None;
    }
    (0..inst.m()).find_map(|i| {
        let mut cand = inst.clone();
        cand.terms.remove(i);
        still_fails(&cand).then_some(cand)
    })
}
