//! Connected components and holes of a cell mask.

use std::collections::VecDeque;

const N4: [(i64, i64); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
const N8: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Component labels for a mask: `labels[i]` is `0` outside the mask and
/// `1..=count` inside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub labels: Vec<u32>,
    pub count: usize,
}

impl Components {
    /// Cell count of each component, indexed by `label - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            if l > 0 {
                sizes[l as usize - 1] += 1;
            }
        }
        sizes
    }
}

fn label(width: usize, height: usize, mask: &[bool], neighbours: &[(i64, i64)]) -> Components {
    assert_eq!(mask.len(), width * height, "mask does not match {width}x{height}");
    let mut labels = vec![0u32; mask.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count as u32;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % width) as i64, (i / width) as i64);
            for &(dx, dy) in neighbours {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                    continue;
                }
                let n = ny as usize * width + nx as usize;
                if mask[n] && labels[n] == 0 {
                    labels[n] = count as u32;
                    queue.push_back(n);
                }
            }
        }
    }
    Components { labels, count }
}

/// 8-connected components of the set cells.
pub fn connected_components(width: usize, height: usize, mask: &[bool]) -> Components {
    label(width, height, mask, &N8)
}

/// Bounded 4-connected regions of unset cells: those that cannot reach the
/// lattice border through unset cells. Each region is a list of indices.
pub fn holes(width: usize, height: usize, mask: &[bool]) -> Vec<Vec<usize>> {
    let background: Vec<bool> = mask.iter().map(|&m| !m).collect();
    let comps = label(width, height, &background, &N4);
    let mut touches_border = vec![false; comps.count + 1];
    for x in 0..width {
        touches_border[comps.labels[x] as usize] = true;
        touches_border[comps.labels[(height - 1) * width + x] as usize] = true;
    }
    for y in 0..height {
        touches_border[comps.labels[y * width] as usize] = true;
        touches_border[comps.labels[y * width + width - 1] as usize] = true;
    }
    let mut regions = vec![Vec::new(); comps.count + 1];
    for (i, &l) in comps.labels.iter().enumerate() {
        if l > 0 && !touches_border[l as usize] {
            regions[l as usize].push(i);
        }
    }
    regions.into_iter().filter(|r| !r.is_empty()).collect()
}

/// Number of holes in the set (8-connected foreground, 4-connected
/// background).
pub fn hole_count(width: usize, height: usize, mask: &[bool]) -> usize {
    holes(width, height, mask).len()
}

/// Morphological closing with a `(2r+1)` square: dilate then erode, with
/// everything outside the lattice unset.
pub fn close(width: usize, height: usize, mask: &[bool], r: usize) -> Vec<bool> {
    let (pw, ph) = (width + 2 * r, height + 2 * r);
    let mut padded = vec![false; pw * ph];
    for y in 0..height {
        padded[(y + r) * pw + r..(y + r) * pw + r + width].copy_from_slice(&mask[y * width..(y + 1) * width]);
    }
    let dilated = square_filter(pw, ph, &padded, r, true);
    let closed = square_filter(pw, ph, &dilated, r, false);
    (0..height)
        .flat_map(|y| closed[(y + r) * pw + r..(y + r) * pw + r + width].iter().copied())
        .collect()
}

/// Square max (`any = true`) or min filter, separable. Cells beyond the
/// edge are skipped.
fn square_filter(width: usize, height: usize, mask: &[bool], r: usize, any: bool) -> Vec<bool> {
    let pass = |src: &[bool], stride: usize, len: usize, lines: usize, step: usize| {
        let mut out = vec![false; src.len()];
        for line in 0..lines {
            let base = line * step;
            for k in 0..len {
                let lo = k.saturating_sub(r);
                let hi = k + r;
                let mut v = !any;
                for j in lo..=hi.min(len - 1) {
                    let s = src[base + j * stride];
                    if any && s {
                        v = true;
                        break;
                    }
                    if !any && !s {
                        v = false;
                        break;
                    }
                }
                out[base + k * stride] = v;
            }
        }
        out
    };
    let rows = pass(mask, 1, width, height, width);
    pass(&rows, width, height, width, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(rows: &[&str]) -> (usize, usize, Vec<bool>) {
        let h = rows.len();
        let w = rows[0].len();
        let mask = rows.iter().flat_map(|r| r.bytes().map(|b| b == b'#')).collect();
        (w, h, mask)
    }

    #[test]
    fn component_examples() {
        let (w, h, m) = grid(&["....", "....", "...."]);
        assert_eq!(connected_components(w, h, &m).count, 0);
        let (w, h, m) = grid(&["#...", ".#..", "...."]);
        assert_eq!(connected_components(w, h, &m).count, 1);
        let (w, h, m) = grid(&["#.#.", "....", "...."]);
        let c = connected_components(w, h, &m);
        assert_eq!(c.count, 2);
        assert_eq!(c.sizes(), vec![1, 1]);
    }

    #[test]
    fn hole_examples() {
        let (w, h, m) = grid(&["......", ".####.", ".####.", "......"]);
        assert_eq!(hole_count(w, h, &m), 0);
        let (w, h, m) = grid(&[".....", ".###.", ".#.#.", ".###.", "....."]);
        assert_eq!(hole_count(w, h, &m), 1);
        let (w, h, m) = grid(&[
            "...........",
            ".###..####.",
            ".#.#..#..#.",
            ".###..####.",
            "...........",
        ]);
        assert_eq!(hole_count(w, h, &m), 2);
        assert_eq!(holes(w, h, &m).iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn diagonal_gap_is_not_a_hole_leak() {
        // The background pocket touches the outside only diagonally, which
        // 4-connectivity does not follow.
        let (w, h, m) = grid(&[".....", ".##..", ".#.#.", "..##.", "....."]);
        assert_eq!(hole_count(w, h, &m), 1);
    }

    #[test]
    fn hole_on_border_is_open() {
        let (w, h, m) = grid(&["#.#", "###"]);
        assert_eq!(hole_count(w, h, &m), 0);
    }

    #[test]
    fn closing_fills_pinholes_only() {
        let (w, h, m) = grid(&[".......", ".#####.", ".##.##.", ".#####.", "......."]);
        let c = close(w, h, &m, 1);
        assert_eq!(c, grid(&[".......", ".#####.", ".#####.", ".#####.", "......."]).2);
        let (w, h, m) = grid(&["#......#", "........"]);
        assert_eq!(close(w, h, &m, 1), m);
    }

    /// Euler number by bit-quad counting on the zero-padded image, for
    /// 8-connected foreground.
    fn euler_8(width: usize, height: usize, mask: &[bool]) -> i64 {
        let at = |x: i64, y: i64| {
            x >= 0 && y >= 0 && x < width as i64 && y < height as i64 && mask[y as usize * width + x as usize]
        };
        let (mut q1, mut q3, mut qd) = (0i64, 0i64, 0i64);
        for y in -1..height as i64 {
            for x in -1..width as i64 {
                let q = [at(x, y), at(x + 1, y), at(x, y + 1), at(x + 1, y + 1)];
                match q.iter().filter(|&&b| b).count() {
                    1 => q1 += 1,
                    3 => q3 += 1,
                    2 if q[0] == q[3] => qd += 1,
                    _ => {}
                }
            }
        }
        (q1 - q3 - 2 * qd) / 4
    }

    proptest! {
        #[test]
        fn holes_match_euler_characteristic(
            w in 1usize..32,
            h in 1usize..32,
            seed in proptest::collection::vec(any::<bool>(), 32 * 32),
        ) {
            let mask: Vec<bool> = seed[..w * h].to_vec();
            let comps = connected_components(w, h, &mask).count as i64;
            prop_assert_eq!(hole_count(w, h, &mask) as i64, comps - euler_8(w, h, &mask));
        }

        #[test]
        fn closing_is_extensive(
            mask in proptest::collection::vec(any::<bool>(), 16 * 16),
        ) {
            let closed = close(16, 16, &mask, 1);
            for i in 0..mask.len() {
                prop_assert!(!mask[i] || closed[i]);
            }
        }
    }
}
