use crate::classes::IGNORE;
use crate::mask::SegmentationMask;

/// Per-class edge pixels of a segmentation mask, stored as `[x, y]`
/// (column, row) in row-major scan order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEdgeSets {
    width: usize,
    height: usize,
    sets: Vec<Vec<[u32; 2]>>,
}

impl ClassEdgeSets {
    pub fn from_sets(width: usize, height: usize, sets: Vec<Vec<[u32; 2]>>) -> Self {
        Self {
            width,
            height,
            sets,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_classes(&self) -> usize {
        self.sets.len()
    }

    pub fn class(&self, k: usize) -> &[[u32; 2]] {
        &self.sets[k]
    }

    pub fn sets(&self) -> &[Vec<[u32; 2]>] {
        &self.sets
    }

    /// Σ_k |E_k|
    pub fn total(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    /// All edge pixels with their labels, class-major.
    pub fn iter(&self) -> impl Iterator<Item = ([u32; 2], u8)> + '_ {
        self.sets
            .iter()
            .enumerate()
            .flat_map(|(k, s)| s.iter().map(move |&p| (p, k as u8)))
    }
}

/// A pixel with label `k` is an edge of class `k` iff one of its
/// 4-neighbours carries a different non-ignore label. Ignore pixels are
/// never edges.
pub fn extract_edges(mask: &SegmentationMask) -> ClassEdgeSets {
    let (w, h) = (mask.width(), mask.height());
    let labels = mask.labels();
    let mut sets = vec![Vec::new(); mask.num_classes()];
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let l = labels[row + x];
            if l == IGNORE {
                continue;
            }
            let differs = |n: u8| n != IGNORE && n != l;
            let edge = (x > 0 && differs(labels[row + x - 1]))
                || (x + 1 < w && differs(labels[row + x + 1]))
                || (y > 0 && differs(labels[row - w + x]))
                || (y + 1 < h && differs(labels[row + w + x]));
            if edge {
                sets[l as usize].push([x as u32, y as u32]);
            }
        }
    }
    ClassEdgeSets {
        width: w,
        height: h,
        sets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_mask_has_no_edges() {
        let m = SegmentationMask::filled(7, 5, 8, 3).unwrap();
        assert_eq!(extract_edges(&m).total(), 0);
    }

    #[test]
    fn two_by_two_example() {
        // [[A, A], [A, B]] with A = 0, B = 1, (row, col) indexing.
        let m = SegmentationMask::from_rows(&[vec![0, 0], vec![0, 1]], 2).unwrap();
        let e = extract_edges(&m);
        // Stored as [x, y] = [col, row]: (0,1) -> [1,0], (1,0) -> [0,1].
        assert_eq!(e.class(0), &[[1, 0], [0, 1]]);
        assert_eq!(e.class(1), &[[1, 1]]);
        assert_eq!(e.total(), 3);
    }

    #[test]
    fn ignore_neither_edges_nor_separates() {
        let m = SegmentationMask::from_rows(&[vec![0, IGNORE, 1]], 2).unwrap();
        assert_eq!(extract_edges(&m).total(), 0);
    }

    #[test]
    fn matches_brute_force_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let (w, h) = (rng.random_range(1..40), rng.random_range(1..40));
            let labels: Vec<u8> = (0..w * h)
                .map(|_| {
                    if rng.random_bool(0.1) {
                        IGNORE
                    } else {
                        rng.random_range(0..4)
                    }
                })
                .collect();
            let m = SegmentationMask::new(w, h, 4, labels).unwrap();
            let e = extract_edges(&m);
            let mut expected = vec![Vec::new(); 4];
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    let l = m.get_checked(x, y).unwrap();
                    if l == IGNORE {
                        continue;
                    }
                    let is_edge = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| {
                        matches!(m.get_checked(x + dx, y + dy), Some(n) if n != IGNORE && n != l)
                    });
                    if is_edge {
                        expected[l as usize].push([x as u32, y as u32]);
                    }
                }
            }
            assert_eq!(e.sets(), &expected[..]);
        }
    }
}
