//! Independent reference computations for tests. Nothing here calls the
//! library routine it is used to check.
#![allow(dead_code, clippy::needless_range_loop)]

use eprcommit::qsim::Mat4;

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    e.sort_by(|x, y| x.partial_cmp(y).unwrap());
    e
}

/// Eigenvalues of a 4×4 Hermitian matrix via its 8×8 real embedding
/// `[[A, −B], [B, A]]`, whose spectrum is that of `A + iB` doubled.
pub fn hermitian_eigenvalues(m: &Mat4) -> Vec<f64> {
    let mut big = vec![vec![0.0; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            let z = m[(i, j)];
            big[i][j] = z.re;
            big[i + 4][j + 4] = z.re;
            big[i][j + 4] = -z.im;
            big[i + 4][j] = z.im;
        }
    }
    jacobi_eigenvalues(big).into_iter().step_by(2).collect()
}

pub fn negativity(rho: &Mat4) -> f64 {
    let mut pt = *rho;
    // transpose the B index: (a b, a' b') -> (a b', a' b)
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    pt[(2 * a + b, 2 * a2 + b2)] = rho[(2 * a + b2, 2 * a2 + b)];
                }
            }
        }
    }
    hermitian_eigenvalues(&pt).iter().filter(|&&e| e < 0.0).map(|e| -e).sum()
}

pub fn trace_distance(a: &Mat4, b: &Mat4) -> f64 {
    hermitian_eigenvalues(&(a - b)).iter().map(|e| e.abs()).sum::<f64>() / 2.0
}

/// Binomial pmf table for `Bin(n, p)`.
pub fn binomial(n: usize, p: f64) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; row.len() + 1];
        for (k, &w) in row.iter().enumerate() {
            next[k] += w * (1.0 - p);
            next[k + 1] += w * p;
        }
        row = next;
    }
    row
}

/// Largest count allowed by a mismatch-fraction threshold.
pub fn allowed(threshold: f64, n: usize) -> usize {
    (threshold * n as f64 + 1e-9).floor() as usize
}

/// Probability that a binary match on `n` positions with independent
/// z errors of rate `e` yields the committed value uniquely.
///
/// Positions k and n−1−k share the sign product d = a_k·a_{n−1−k}; the
/// direct alignment errs where a flip occurred, the reversed one where the
/// flip disagrees with d.
pub fn match_success(n: usize, e: f64, threshold: f64) -> f64 {
    let t = allowed(threshold, n);
    // dist[direct][wrong]
    let mut dist = vec![vec![0.0; n + 1]; n + 1];
    dist[0][0] = 1.0;
    let step = |dist: &Vec<Vec<f64>>, outcomes: &[(usize, usize, f64)]| {
        let mut next = vec![vec![0.0; n + 1]; n + 1];
        for d in 0..=n {
            for w in 0..=n {
                if dist[d][w] == 0.0 {
                    continue;
                }
                for &(dd, dw, p) in outcomes {
                    next[d + dd][w + dw] += dist[d][w] * p;
                }
            }
        }
        next
    };
    let mut pair = Vec::new();
    for sign_differs in [false, true] {
        for f1 in [false, true] {
            for f2 in [false, true] {
                let p = 0.5 * if f1 { e } else { 1.0 - e } * if f2 { e } else { 1.0 - e };
                let direct = usize::from(f1) + usize::from(f2);
                let wrong = usize::from(f1 != sign_differs) + usize::from(f2 != sign_differs);
                pair.push((direct, wrong, p));
            }
        }
    }
    for _ in 0..n / 2 {
        dist = step(&dist, &pair);
    }
    if n % 2 == 1 {
        dist = step(&dist, &[(0, 0, 1.0 - e), (1, 1, e)]);
    }
    let mut ok = 0.0;
    for d in 0..=t.min(n) {
        for w in t + 1..=n {
            ok += dist[d][w];
        }
    }
    ok
}

/// Completeness of an honest noisy binary session: each party depolarizes
/// its own qubits with `p`, Bob checks `checks` pairs, keeps `n`.
pub fn noisy_completeness(p: f64, checks: usize, check_threshold: f64, n: usize, match_threshold: f64) -> f64 {
    let e = (1.0 - (1.0 - p) * (1.0 - p)) / 2.0;
    let pass: f64 = binomial(checks, e)[..=allowed(check_threshold, checks).min(checks)].iter().sum();
    pass * match_success(n, e, match_threshold)
}

/// Fraction of n-bit lists left unchanged by some nonzero multiple of a
/// cyclic shift.
pub fn rotation_symmetric_fraction(n: u32, shift: u32, modulus: u32) -> f64 {
    let mask = (1u32 << n) - 1;
    let rot = |x: u32, k: u32| ((x << k) | (x >> (n - k))) & mask;
    let hits = (0..1u32 << n)
        .filter(|&x| {
            (1..modulus).any(|d| {
                let k = (d * shift) % n;
                k != 0 && rot(x, k) == x
            })
        })
        .count();
    hits as f64 / f64::from(1u32 << n)
}

/// Exact success probability of the best Unveil-only flip by brute force:
/// Alice's outcomes `a`, every claimed list, Bob's outcomes derived from the
/// pure post-measurement state, Bob's rule re-implemented here.
pub fn brute_force_flip(n: usize) -> f64 {
    use eprcommit::qsim::{PairState, PauliOp};
    let codes = [PauliOp::I, PauliOp::X, PauliOp::Z, PauliOp::Y];
    // z-correlation of (P ⊗ I)|ψ−⟩ from its amplitudes: same-value weight minus opposite
    let corr: Vec<i32> = codes
        .iter()
        .map(|&p| {
            let st = eprcommit::qsim::apply_pauli(&PairState::singlet(), eprcommit::qsim::Side::A, p);
            let r = st.rho();
            let same = r[(0, 0)].re + r[(3, 3)].re;
            if same > 0.5 { 1 } else { -1 }
        })
        .collect();
    let rev = |k: usize, v: usize| if v == 0 { k } else { n - 1 - k };
    let mut wins = 0u64;
    for v in 0..2 {
        for bits in 0..1u32 << n {
            let a: Vec<i32> = (0..n).map(|j| if bits >> j & 1 == 1 { -1 } else { 1 }).collect();
            // honest singlets, no layers: Bob holds −a
            let b: Vec<i32> = a.iter().map(|x| -x).collect();
            let revealed: Vec<i32> = (0..n).map(|k| a[rev(k, v)]).collect();
            let target = 1 - v;
            let mut found = false;
            for list in 0..1u64 << (2 * n) {
                let zc: Vec<i32> = (0..n).map(|j| corr[((list >> (2 * j)) & 3) as usize]).collect();
                let zero = |u: usize| (0..n).all(|k| revealed[k] * b[rev(k, u)] == zc[rev(k, u)]);
                if zero(target) && !zero(v) {
                    found = true;
                    break;
                }
            }
            wins += u64::from(found);
        }
    }
    wins as f64 / (2u64 << n) as f64
}

/// Two-sample chi-square homogeneity statistic and degrees of freedom over
/// cells where at least one sample is nonzero.
pub fn two_sample_chisq(x: &[u64], y: &[u64]) -> (f64, usize) {
    let nx: u64 = x.iter().sum();
    let ny: u64 = y.iter().sum();
    let (nx, ny) = (nx as f64, ny as f64);
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&a, &b) in x.iter().zip(y) {
        let tot = (a + b) as f64;
        if tot == 0.0 {
            continue;
        }
        cells += 1;
        let ea = tot * nx / (nx + ny);
        let eb = tot * ny / (nx + ny);
        stat += (a as f64 - ea).powi(2) / ea + (b as f64 - eb).powi(2) / eb;
    }
    (stat, cells.saturating_sub(1))
}
