//! Brute-force reference computations, written without the library's
//! kernel or solver code paths.

#![allow(dead_code)]

/// Symbols of `bits` as a vector, symbol i = bit i.
pub fn symbols(len: usize, bits: u32) -> Vec<u8> {
    (0..len).map(|i| ((bits >> i) & 1) as u8).collect()
}

/// Counts index sets by enumerating every subset of positions of size |y|.
pub fn brute_count(x: &[u8], y: &[u8]) -> u64 {
    let n = x.len();
    let mut count = 0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != y.len() {
            continue;
        }
        let kept: Vec<u8> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| x[i]).collect();
        if kept == y {
            count += 1;
        }
    }
    count
}

pub fn choose(n: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// All words of length <= n, as (len, bits), in (len, bits) order.
pub fn all_outputs(n: usize) -> Vec<(usize, u32)> {
    (0..=n).flat_map(|l| (0..1u32 << l).map(move |b| (l, b))).collect()
}

/// Dense `P(y|x)` for the i.i.d. deletion channel via index-set counts.
pub fn dense_iid(n: usize, d: f64) -> Vec<Vec<f64>> {
    let outs = all_outputs(n);
    (0..1u32 << n)
        .map(|x| {
            let xs = symbols(n, x);
            outs.iter()
                .map(|&(l, b)| brute_count(&xs, &symbols(l, b)) as f64 * (1.0 - d).powi(l as i32) * d.powi((n - l) as i32))
                .collect()
        })
        .collect()
}

/// Dense `P(y|x)` for the exact deletion channel via index-set counts.
pub fn dense_exact(n: usize, k: usize) -> Vec<Vec<f64>> {
    let outs = all_outputs(n);
    (0..1u32 << n)
        .map(|x| {
            let xs = symbols(n, x);
            outs.iter()
                .map(|&(l, b)| if l == k { brute_count(&xs, &symbols(l, b)) as f64 / choose(n, k) } else { 0.0 })
                .collect()
        })
        .collect()
}

/// `I(X;Y)` in bits.
pub fn mutual_information(w: &[Vec<f64>], p: &[f64]) -> f64 {
    let m = w[0].len();
    let q: Vec<f64> = (0..m).map(|y| (0..w.len()).map(|x| p[x] * w[x][y]).sum()).collect();
    let mut i = 0.0;
    for x in 0..w.len() {
        if p[x] == 0.0 {
            continue;
        }
        for y in 0..m {
            if w[x][y] > 0.0 {
                i += p[x] * w[x][y] * (w[x][y] / q[y]).log2();
            }
        }
    }
    i
}

/// Reverse/complement orbits of n-bit inputs, from the string definitions.
pub fn orbits(n: usize) -> Vec<Vec<usize>> {
    let rev = |x: u32| (0..n).fold(0, |acc, i| acc | (((x >> i) & 1) << (n - 1 - i)));
    let comp = |x: u32| !x & ((1 << n) - 1);
    let mut seen = vec![false; 1 << n];
    let mut out = Vec::new();
    for x in 0..1u32 << n {
        if seen[x as usize] {
            continue;
        }
        let mut orbit = vec![x, rev(x), comp(x), rev(comp(x))];
        orbit.sort();
        orbit.dedup();
        for &o in &orbit {
            seen[o as usize] = true;
        }
        out.push(orbit.into_iter().map(|o| o as usize).collect());
    }
    out
}

/// Spreads per-group mass uniformly over group members.
pub fn expand(groups: &[Vec<usize>], mass: &[f64], inputs: usize) -> Vec<f64> {
    let mut p = vec![0.0; inputs];
    for (g, &m) in groups.iter().zip(mass) {
        for &x in g {
            p[x] = m / g.len() as f64;
        }
    }
    p
}

fn simplex_grid(dim: usize, steps: usize, prefix: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if prefix.len() + 1 == dim {
        let used: usize = prefix.iter().sum();
        prefix.push(steps - used);
        out(prefix);
        prefix.pop();
        return;
    }
    let used: usize = prefix.iter().sum();
    for i in 0..=steps - used {
        prefix.push(i);
        simplex_grid(dim, steps, prefix, out);
        prefix.pop();
    }
}

/// Maximizes `I` over laws constant on `groups`: exhaustive grid at spacing
/// `1/steps`, then pairwise mass transfers with a shrinking step.
pub fn grid_maximize(w: &[Vec<f64>], groups: &[Vec<usize>], steps: usize) -> f64 {
    let inputs = w.len();
    let dim = groups.len();
    let eval = |mass: &[f64]| mutual_information(w, &expand(groups, mass, inputs));
    let mut best = f64::NEG_INFINITY;
    let mut best_mass = vec![0.0; dim];
    simplex_grid(dim, steps, &mut Vec::new(), &mut |c| {
        let mass: Vec<f64> = c.iter().map(|&i| i as f64 / steps as f64).collect();
        let v = eval(&mass);
        if v > best {
            best = v;
            best_mass = mass;
        }
    });
    let mut step = 1.0 / steps as f64;
    while step > 1e-10 {
        let mut improved = false;
        for a in 0..dim {
            for b in 0..dim {
                if a == b || best_mass[b] < step {
                    continue;
                }
                let mut m = best_mass.clone();
                m[a] += step;
                m[b] -= step;
                let v = eval(&m);
                if v > best {
                    best = v;
                    best_mass = m;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Singleton groups: the unrestricted simplex.
pub fn singletons(inputs: usize) -> Vec<Vec<usize>> {
    (0..inputs).map(|x| vec![x]).collect()
}
