//! Reference implementations written straight from the textbook definitions.

pub fn dp_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

pub fn oracle_lev_sim(a: &str, b: &str) -> f64 {
    let n = a.chars().count().max(b.chars().count());
    if n == 0 {
        1.0
    } else {
        1.0 - dp_distance(a, b) as f64 / n as f64
    }
}

pub fn oracle_jaro(s1: &str, s2: &str) -> f64 {
    let s1: Vec<char> = s1.chars().collect();
    let s2: Vec<char> = s2.chars().collect();
    if s1.is_empty() && s2.is_empty() {
        return 1.0;
    }
    let range = (s1.len().max(s2.len()) / 2).max(1) - 1;
    let mut f1 = vec![false; s1.len()];
    let mut f2 = vec![false; s2.len()];
    let mut m = 0.0;
    for i in 0..s1.len() {
        let start = i.saturating_sub(range);
        let end = (i + range).min(s2.len().saturating_sub(1));
        if s2.is_empty() {
            break;
        }
        let mut j = start;
        while j <= end {
            if !f2[j] && s1[i] == s2[j] {
                f1[i] = true;
                f2[j] = true;
                m += 1.0;
                break;
            }
            j += 1;
        }
    }
    if m == 0.0 {
        return 0.0;
    }
    let mut k = 0;
    let mut t = 0.0;
    for i in 0..s1.len() {
        if f1[i] {
            while !f2[k] {
                k += 1;
            }
            if s1[i] != s2[k] {
                t += 0.5;
            }
            k += 1;
        }
    }
    (m / s1.len() as f64 + m / s2.len() as f64 + (m - t) / m) / 3.0
}

pub fn oracle_jw(a: &str, b: &str) -> f64 {
    let j = oracle_jaro(a, b);
    let mut l = 0;
    for (x, y) in a.chars().zip(b.chars()) {
        if x != y || l == 4 {
            break;
        }
        l += 1;
    }
    j + l as f64 * 0.1 * (1.0 - j)
}
