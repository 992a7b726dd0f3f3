//! Octile geodesics and Euclidean distance transforms on the cell grid.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use std::f64::consts::SQRT_2;

const STEPS: [(i64, i64, f64); 8] = [
    (-1, -1, SQRT_2),
    (0, -1, 1.0),
    (1, -1, SQRT_2),
    (-1, 0, 1.0),
    (1, 0, 1.0),
    (-1, 1, SQRT_2),
    (0, 1, 1.0),
    (1, 1, SQRT_2),
];

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Octile distance from the seeds to every cell reachable through
/// `passable` cells, moving in 8 directions (unit cardinal, √2 diagonal
/// steps). Seeds carry their starting cost; unreachable cells read
/// `f64::INFINITY`.
pub fn geodesic_distances(
    width: usize,
    height: usize,
    passable: &[bool],
    seeds: impl IntoIterator<Item = (usize, f64)>,
) -> Vec<f64> {
    assert_eq!(passable.len(), width * height);
    let mut dist = vec![f64::INFINITY; passable.len()];
    let mut heap = BinaryHeap::new();
    for (i, d0) in seeds {
        if passable[i] && d0 < dist[i] {
            dist[i] = d0;
            heap.push(Entry(d0, i));
        }
    }
    while let Some(Entry(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let (x, y) = ((i % width) as i64, (i / width) as i64);
        for &(dx, dy, cost) in &STEPS {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                continue;
            }
            let n = ny as usize * width + nx as usize;
            let nd = d + cost;
            if passable[n] && nd < dist[n] {
                dist[n] = nd;
                heap.push(Entry(nd, n));
            }
        }
    }
    dist
}

/// Exact Euclidean distance from each cell centre to the nearest `target`
/// cell centre; `f64::INFINITY` everywhere when there are no targets.
pub fn distance_transform(width: usize, height: usize, target: &[bool]) -> Vec<f64> {
    assert_eq!(target.len(), width * height);
    const FAR: f64 = 1e20;
    let mut sq: Vec<f64> = target.iter().map(|&t| if t { 0.0 } else { FAR }).collect();
    let mut line = Vec::new();
    let mut out = Vec::new();
    for x in 0..width {
        line.clear();
        line.extend((0..height).map(|y| sq[y * width + x]));
        squared_1d(&line, &mut out);
        for y in 0..height {
            sq[y * width + x] = out[y];
        }
    }
    for y in 0..height {
        line.clear();
        line.extend_from_slice(&sq[y * width..(y + 1) * width]);
        squared_1d(&line, &mut out);
        sq[y * width..(y + 1) * width].copy_from_slice(&out);
    }
    sq.into_iter()
        .map(|d| if d >= FAR { f64::INFINITY } else { d.sqrt() })
        .collect()
}

/// Lower envelope of parabolas: `out[q] = min_p (q - p)^2 + f[p]`.
fn squared_1d(f: &[f64], out: &mut Vec<f64>) {
    let n = f.len();
    out.clear();
    out.resize(n, 0.0);
    if n == 0 {
        return;
    }
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut k = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            // z[0] is -inf, so this never steps below the first parabola.
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}
