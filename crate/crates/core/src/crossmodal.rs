//! Cross-modal supervision transfer: a global homography between paired
//! image modalities, nearest-neighbour label warping and empirical
//! confusion-matrix estimation.

use crate::classes::IGNORE;
use crate::mask::SegmentationMask;
use nalgebra::{DMatrix, Matrix3, Vector3};
use thiserror::Error;

/// Collinearity threshold on twice the triangle area in normalized
/// coordinates (mean distance √2 from the centroid).
const COLLINEAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CrossmodalError {
    #[error("need at least 4 correspondences, got {0}")]
    TooFewCorrespondences(usize),
    #[error("source points {0}, {1} and {2} are collinear")]
    Collinear(usize, usize, usize),
    #[error("non-finite coordinate in correspondence {0}")]
    NonFinite(usize),
    #[error("degenerate configuration: rank-deficient system (singular value ratio {0:.3e})")]
    RankDeficient(f64),
    #[error("homography is singular (|det| = {0:.3e})")]
    Singular(f64),
    #[error("mask pair {index} differs in size: {pred:?} vs {truth:?}")]
    SizeMismatch {
        index: usize,
        pred: (usize, usize),
        truth: (usize, usize),
    },
    #[error("{pred} prediction masks but {truth} truth masks")]
    CountMismatch { pred: usize, truth: usize },
    #[error("no valid (non-ignore) pixel pairs")]
    NoValidPixels,
    #[error("class count mismatch: {0} vs {1}")]
    ClassCount(usize, usize),
    #[error("invalid confusion matrix: {0}")]
    InvalidConfusion(String),
}

/// Projective map between image planes, normalized so `H[2][2] = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(Matrix3<f64>);

impl Homography {
    pub fn new(m: Matrix3<f64>) -> Result<Self, CrossmodalError> {
        let s = m[(2, 2)];
        if !m.iter().all(|v| v.is_finite()) || s.abs() < 1e-15 {
            return Err(CrossmodalError::Singular(0.0));
        }
        let n = m / s;
        let det = n.determinant();
        if det.abs() <= 1e-12 {
            return Err(CrossmodalError::Singular(det.abs()));
        }
        Ok(Self(n))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Maps `[x, y]`; `None` when the point goes to infinity.
    #[inline]
    pub fn apply(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let q = self.0 * Vector3::new(p[0], p[1], 1.0);
        (q.z.abs() > 1e-15).then(|| [q.x / q.z, q.y / q.z])
    }

    pub fn inverse(&self) -> Self {
        let inv = self.0.try_inverse().expect("validated invertible");
        Self(inv / inv[(2, 2)])
    }

    /// Largest absolute entry difference to `other`.
    pub fn max_abs_diff(&self, other: &Homography) -> f64 {
        (self.0 - other.0).abs().max()
    }
}

/// Source→target pixel pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    pairs: Vec<([f64; 2], [f64; 2])>,
}

impl CorrespondenceSet {
    /// Requires ≥ 4 finite pairs with no three source points collinear.
    pub fn new(pairs: Vec<([f64; 2], [f64; 2])>) -> Result<Self, CrossmodalError> {
        if pairs.len() < 4 {
            return Err(CrossmodalError::TooFewCorrespondences(pairs.len()));
        }
        if let Some(i) = pairs
            .iter()
            .position(|(s, d)| !(s.iter().chain(d).all(|v| v.is_finite())))
        {
            return Err(CrossmodalError::NonFinite(i));
        }
        let src: Vec<[f64; 2]> = pairs.iter().map(|p| p.0).collect();
        let (_, norm) = normalize(&src);
        let n = norm.len();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (norm[i], norm[j], norm[k]);
                    let cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
                    if cross.abs() < COLLINEAR_TOL {
                        return Err(CrossmodalError::Collinear(i, j, k));
                    }
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[([f64; 2], [f64; 2])] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Fitted homography and its reprojection RMS (px, in the target image).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomographyFit {
    pub homography: Homography,
    pub rms: f64,
}

/// Similarity that moves the centroid to the origin and scales the mean
/// distance to √2.
fn normalize(pts: &[[f64; 2]]) -> (Matrix3<f64>, Vec<[f64; 2]>) {
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    let mean = pts
        .iter()
        .map(|p| (p[0] - cx).hypot(p[1] - cy))
        .sum::<f64>()
        / n;
    let s = if mean > 0.0 {
        std::f64::consts::SQRT_2 / mean
    } else {
        1.0
    };
    let t = Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0);
    (t, pts.iter().map(|p| [s * (p[0] - cx), s * (p[1] - cy)]).collect())
}

/// Least-squares normalized direct linear transform.
pub fn fit_homography(corr: &CorrespondenceSet) -> Result<HomographyFit, CrossmodalError> {
    let src: Vec<[f64; 2]> = corr.pairs.iter().map(|p| p.0).collect();
    let dst: Vec<[f64; 2]> = corr.pairs.iter().map(|p| p.1).collect();
    let (t_src, src_n) = normalize(&src);
    let (t_dst, dst_n) = normalize(&dst);

    let n = src.len();
    // At least 9 rows so the SVD exposes the full right null space.
    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for i in 0..n {
        let [x, y] = src_n[i];
        let [u, v] = dst_n[i];
        let r = 2 * i;
        a[(r, 0)] = -x;
        a[(r, 1)] = -y;
        a[(r, 2)] = -1.0;
        a[(r, 6)] = u * x;
        a[(r, 7)] = u * y;
        a[(r, 8)] = u;
        a[(r + 1, 3)] = -x;
        a[(r + 1, 4)] = -y;
        a[(r + 1, 5)] = -1.0;
        a[(r + 1, 6)] = v * x;
        a[(r + 1, 7)] = v * y;
        a[(r + 1, 8)] = v;
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let (smallest, second) = (order[0], order[1]);
    let ratio = sv[second] / sv.max().max(f64::MIN_POSITIVE);
    if ratio < 1e-10 {
        return Err(CrossmodalError::RankDeficient(ratio));
    }
    let h = v_t.row(smallest);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let t_dst_inv = t_dst.try_inverse().expect("similarity is invertible");
    let homography = Homography::new(t_dst_inv * hn * t_src)?;

    let sq: f64 = corr
        .pairs
        .iter()
        .map(|(s, d)| match homography.apply(*s) {
            Some(p) => (p[0] - d[0]).powi(2) + (p[1] - d[1]).powi(2),
            None => f64::INFINITY,
        })
        .sum();
    Ok(HomographyFit {
        homography,
        rms: (sq / n as f64).sqrt(),
    })
}

/// Inverse warp with nearest-neighbour sampling: each output pixel takes
/// the source label at `round(H⁻¹ · p)`; pixels mapping outside the source
/// get the ignore label.
pub fn warp_mask(
    mask: &SegmentationMask,
    h: &Homography,
    out_size: (usize, usize),
) -> SegmentationMask {
    let (w, ht) = out_size;
    let inv = h.inverse();
    let mut labels = vec![IGNORE; w * ht];
    for y in 0..ht {
        for x in 0..w {
            if let Some([sx, sy]) = inv.apply([x as f64, y as f64]) {
                let (rx, ry) = (sx.round(), sy.round());
                if rx.is_finite() && ry.is_finite() {
                    if let Some(l) = mask.get_checked(rx as i64, ry as i64) {
                        labels[y * w + x] = l;
                    }
                }
            }
        }
    }
    SegmentationMask::new(w, ht, mask.num_classes(), labels).expect("labels copied from a valid mask")
}

/// Row-stochastic `K x K` matrix, entry `(y, k) = Pr(predicted k | true y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    k: usize,
    data: Vec<f64>,
}

impl ConfusionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, CrossmodalError> {
        let k = rows.len();
        if k == 0 {
            return Err(CrossmodalError::InvalidConfusion("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(k * k);
        for (y, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(CrossmodalError::InvalidConfusion(format!(
                    "row {y} has {} entries, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(CrossmodalError::InvalidConfusion(format!(
                    "row {y} has a negative or non-finite entry"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(CrossmodalError::InvalidConfusion(format!(
                    "row {y} sums to {s}, expected 1"
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { k, data })
    }

    pub fn identity(k: usize) -> Self {
        let mut data = vec![0.0; k * k];
        for i in 0..k {
            data[i * k + i] = 1.0;
        }
        Self { k, data }
    }

    pub fn num_classes(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, truth: usize, predicted: usize) -> f64 {
        self.data[truth * self.k + predicted]
    }

    pub fn row(&self, truth: usize) -> &[f64] {
        &self.data[truth * self.k..(truth + 1) * self.k]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|y| self.row(y).to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.k)
    }

    /// Relabel both axes: new entry `(perm[y], perm[k])` = old `(y, k)`.
    pub fn permuted(&self, perm: &[u8]) -> Self {
        let mut data = vec![0.0; self.k * self.k];
        for y in 0..self.k {
            for k in 0..self.k {
                data[perm[y] as usize * self.k + perm[k] as usize] = self.get(y, k);
            }
        }
        Self { k: self.k, data }
    }

    pub fn max_abs_diff(&self, other: &ConfusionMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Tally `(true, predicted)` co-occurrences over paired masks, skipping any
/// pixel that is ignore in either mask, then normalize rows. Classes never
/// seen in the truth get an identity row.
pub fn estimate_confusion(
    pred: &[SegmentationMask],
    truth: &[SegmentationMask],
) -> Result<ConfusionMatrix, CrossmodalError> {
    if pred.len() != truth.len() {
        return Err(CrossmodalError::CountMismatch {
            pred: pred.len(),
            truth: truth.len(),
        });
    }
    let Some(first) = truth.first() else {
        return Err(CrossmodalError::NoValidPixels);
    };
    let k = first.num_classes();
    let mut counts = vec![0u64; k * k];
    for (i, (p, t)) in pred.iter().zip(truth).enumerate() {
        if (p.width(), p.height()) != (t.width(), t.height()) {
            return Err(CrossmodalError::SizeMismatch {
                index: i,
                pred: (p.width(), p.height()),
                truth: (t.width(), t.height()),
            });
        }
        if p.num_classes() != k || t.num_classes() != k {
            return Err(CrossmodalError::ClassCount(p.num_classes(), t.num_classes()));
        }
        for (&pl, &tl) in p.labels().iter().zip(t.labels()) {
            if pl != IGNORE && tl != IGNORE {
                counts[tl as usize * k + pl as usize] += 1;
            }
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(CrossmodalError::NoValidPixels);
    }
    let mut data = vec![0.0; k * k];
    for y in 0..k {
        let row = &counts[y * k..(y + 1) * k];
        let total: u64 = row.iter().sum();
        if total == 0 {
            data[y * k + y] = 1.0;
        } else {
            for j in 0..k {
                data[y * k + j] = row[j] as f64 / total as f64;
            }
        }
    }
    Ok(ConfusionMatrix { k, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_points(rng: &mut impl Rng, n: usize) -> Vec<[f64; 2]> {
        (0..n)
            .map(|_| [rng.random_range(0.0..640.0), rng.random_range(0.0..512.0)])
            .collect()
    }

    fn known_h() -> Homography {
        Homography::new(Matrix3::new(
            1.05, 0.04, 12.0, -0.03, 0.98, -7.5, 2e-5, -1e-5, 1.0,
        ))
        .unwrap()
    }

    #[test]
    fn identity_correspondences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pairs = grid_points(&mut rng, 12).into_iter().map(|p| (p, p)).collect();
        let fit = fit_homography(&CorrespondenceSet::new(pairs).unwrap()).unwrap();
        assert!(fit.homography.max_abs_diff(&Homography::identity()) < 1e-9);
        assert!(fit.rms < 1e-9);
    }

    #[test]
    fn recovers_known_homography() {
        let h = known_h();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pairs = grid_points(&mut rng, 120)
            .into_iter()
            .map(|p| (p, h.apply(p).unwrap()))
            .collect();
        let fit = fit_homography(&CorrespondenceSet::new(pairs).unwrap()).unwrap();
        assert!(fit.homography.max_abs_diff(&h) < 1e-6);
        assert!(fit.rms < 1e-6);
    }

    #[test]
    fn minimal_four_points() {
        let h = known_h();
        let src = [[0.0, 0.0], [100.0, 0.0], [100.0, 80.0], [0.0, 80.0]];
        let pairs = src.iter().map(|&p| (p, h.apply(p).unwrap())).collect();
        let fit = fit_homography(&CorrespondenceSet::new(pairs).unwrap()).unwrap();
        assert!(fit.homography.max_abs_diff(&h) < 1e-6);
    }

    #[test]
    fn ninety_degree_rotation() {
        // (x, y) -> (-y, x)
        let src = [[1.0, 0.0], [0.0, 1.0], [2.0, 3.0], [-1.0, -2.0], [3.0, -5.0]];
        let pairs = src.iter().map(|&[x, y]| ([x, y], [-y, x])).collect();
        let fit = fit_homography(&CorrespondenceSet::new(pairs).unwrap()).unwrap();
        let expected = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!((fit.homography.matrix() - expected).abs().max() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        let p = |x: f64, y: f64| ([x, y], [x, y]);
        assert_eq!(
            CorrespondenceSet::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)]),
            Err(CrossmodalError::TooFewCorrespondences(3))
        );
        assert!(matches!(
            CorrespondenceSet::new(vec![p(0.0, 0.0), p(1.0, 1.0), p(2.0, 2.0), p(0.0, 5.0)]),
            Err(CrossmodalError::Collinear(0, 1, 2))
        ));
        // Every target collapsed to one point: the DLT system loses rank.
        let pairs = vec![
            ([0.0, 0.0], [1.0, 1.0]),
            ([4.0, 0.0], [1.0, 1.0]),
            ([0.0, 3.0], [1.0, 1.0]),
            ([5.0, 7.0], [1.0, 1.0]),
            ([9.0, 2.0], [1.0, 1.0]),
        ];
        assert!(fit_homography(&CorrespondenceSet::new(pairs).unwrap()).is_err());
    }

    #[test]
    fn similarity_invariance() {
        let h = known_h();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs: Vec<_> = grid_points(&mut rng, 40)
            .into_iter()
            .map(|p| {
                let q = h.apply(p).unwrap();
                (p, [q[0] + rng.random_range(-0.5..0.5), q[1] + rng.random_range(-0.5..0.5)])
            })
            .collect();
        let base = fit_homography(&CorrespondenceSet::new(pairs.clone()).unwrap()).unwrap();
        let sim = |s: f64, th: f64, tx: f64, ty: f64| {
            let (sn, cs) = th.sin_cos();
            Matrix3::new(s * cs, -s * sn, tx, s * sn, s * cs, ty, 0.0, 0.0, 1.0)
        };
        let s1 = sim(3.0, 0.4, -50.0, 20.0);
        let s2 = sim(0.2, -1.1, 7.0, 300.0);
        let ap = |m: &Matrix3<f64>, p: [f64; 2]| {
            let q = m * Vector3::new(p[0], p[1], 1.0);
            [q.x / q.z, q.y / q.z]
        };
        let moved = pairs.iter().map(|&(a, b)| (ap(&s1, a), ap(&s2, b))).collect();
        let fit = fit_homography(&CorrespondenceSet::new(moved).unwrap()).unwrap();
        let back = s2.try_inverse().unwrap() * fit.homography.matrix() * s1;
        let back = Homography::new(back).unwrap();
        assert!(back.max_abs_diff(&base.homography) < 1e-9);
    }

    fn blocky_mask(rng: &mut impl Rng, w: usize, h: usize, k: u8, block: usize) -> SegmentationMask {
        let bw = w / block + 1;
        let blocks: Vec<u8> = (0..bw * (h / block + 1)).map(|_| rng.random_range(0..k)).collect();
        let labels = (0..w * h)
            .map(|i| blocks[(i / w / block) * bw + (i % w) / block])
            .collect();
        SegmentationMask::new(w, h, k as usize, labels).unwrap()
    }

    #[test]
    fn warp_identity_and_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = blocky_mask(&mut rng, 30, 20, 4, 3);
        assert_eq!(warp_mask(&m, &Homography::identity(), (30, 20)), m);
        let crop = warp_mask(&m, &Homography::identity(), (10, 5));
        assert_eq!(crop.get(9, 4), m.get(9, 4));

        let shift = Homography::new(Matrix3::new(1.0, 0.0, 3.0, 0.0, 1.0, -2.0, 0.0, 0.0, 1.0)).unwrap();
        let w = warp_mask(&m, &shift, (30, 20));
        for y in 0..20 {
            for x in 0..30 {
                let (sx, sy) = (x as i64 - 3, y as i64 + 2);
                let expected = m.get_checked(sx, sy).unwrap_or(IGNORE);
                assert_eq!(w.get(x, y), expected);
            }
        }
    }

    #[test]
    fn warp_round_trip_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..10 {
            let m = blocky_mask(&mut rng, 64, 48, 5, 6);
            // Mildly expanding projective map.
            let h = Homography::new(Matrix3::new(
                1.1 + 0.02 * trial as f64,
                0.05,
                -4.0,
                -0.03,
                1.15,
                3.0,
                1e-4,
                -2e-4,
                1.0,
            ))
            .unwrap();
            let fwd = warp_mask(&m, &h, (90, 70));
            let back = warp_mask(&fwd, &h.inverse(), (64, 48));
            for y in 1..47 {
                for x in 1..63 {
                    let l = m.get(x, y);
                    let uniform = (-1..=1).all(|dy| {
                        (-1..=1).all(|dx| m.get((x as i64 + dx) as usize, (y as i64 + dy) as usize) == l)
                    });
                    let Some([tx, ty]) = h.apply([x as f64, y as f64]) else { continue };
                    let inside = tx.round() >= 1.0 && tx.round() < 89.0 && ty.round() >= 1.0 && ty.round() < 69.0;
                    if uniform && inside {
                        assert_eq!(back.get(x, y), l, "pixel ({x}, {y}) trial {trial}");
                    }
                }
            }
            // Never invents labels.
            let allowed: Vec<u8> = m.label_set().into_iter().chain([IGNORE]).collect();
            assert!(fwd.label_set().iter().all(|l| allowed.contains(l)));
        }
    }

    #[test]
    fn confusion_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = blocky_mask(&mut rng, 40, 30, 8, 4);
        let c = estimate_confusion(&[m.clone()], &[m.clone()]).unwrap();
        assert!(c.is_identity());

        let truth = SegmentationMask::filled(4, 2, 8, 0).unwrap();
        let pred = SegmentationMask::new(4, 2, 8, vec![0, 0, 1, 1, 0, 0, 1, 1]).unwrap();
        let c = estimate_confusion(&[pred], &[truth]).unwrap();
        assert_eq!(c.row(0), &[0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(c.row(3)[3], 1.0);
    }

    #[test]
    fn confusion_matches_tally_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let n = rng.random_range(1..4);
            let mut preds = Vec::new();
            let mut truths = Vec::new();
            for _ in 0..n {
                let labels = |rng: &mut ChaCha8Rng| -> Vec<u8> {
                    (0..200)
                        .map(|_| if rng.random_bool(0.1) { IGNORE } else { rng.random_range(0..3) })
                        .collect()
                };
                preds.push(SegmentationMask::new(20, 10, 4, labels(&mut rng)).unwrap());
                truths.push(SegmentationMask::new(20, 10, 4, labels(&mut rng)).unwrap());
            }
            let c = estimate_confusion(&preds, &truths).unwrap();
            let mut tally = [[0u32; 4]; 4];
            for (p, t) in preds.iter().zip(&truths) {
                for y in 0..10 {
                    for x in 0..20 {
                        let (a, b) = (t.get(x, y), p.get(x, y));
                        if a != IGNORE && b != IGNORE {
                            tally[a as usize][b as usize] += 1;
                        }
                    }
                }
            }
            for y in 0..4 {
                let total: u32 = tally[y].iter().sum();
                for k in 0..4 {
                    let expected = if total == 0 {
                        if y == k { 1.0 } else { 0.0 }
                    } else {
                        tally[y][k] as f64 / total as f64
                    };
                    assert_eq!(c.get(y, k), expected);
                }
            }
        }
    }

    #[test]
    fn confusion_errors() {
        let a = SegmentationMask::filled(2, 2, 3, IGNORE).unwrap();
        assert_eq!(
            estimate_confusion(&[a.clone()], &[a.clone()]),
            Err(CrossmodalError::NoValidPixels)
        );
        let b = SegmentationMask::filled(3, 2, 3, 0).unwrap();
        assert!(matches!(
            estimate_confusion(&[a], &[b]),
            Err(CrossmodalError::SizeMismatch { .. })
        ));
        assert!(ConfusionMatrix::new(vec![vec![0.5, 0.4], vec![0.0, 1.0]]).is_err());
    }
}
