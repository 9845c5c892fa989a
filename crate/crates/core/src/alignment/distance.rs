use super::edges::ClassEdgeSets;

/// Per-class clamped Euclidean distance fields on the pixel grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceFieldStack {
    width: usize,
    height: usize,
    d_max: f64,
    fields: Vec<Vec<f64>>,
}

impl DistanceFieldStack {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn num_classes(&self) -> usize {
        self.fields.len()
    }

    pub fn field(&self, k: usize) -> &[f64] {
        &self.fields[k]
    }

    #[inline]
    pub fn at(&self, k: usize, x: usize, y: usize) -> f64 {
        self.fields[k][y * self.width + x]
    }

    /// Bilinear sample of field `k` at subpixel `(u, v)`; pixel centres sit
    /// on integer coordinates. `(u, v)` must lie in
    /// `[0, width-1] x [0, height-1]`.
    #[inline]
    pub fn sample(&self, k: usize, u: f64, v: f64) -> f64 {
        let f = &self.fields[k];
        let x0 = (u.floor() as usize).min(self.width - 1);
        let y0 = (v.floor() as usize).min(self.height - 1);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let ax = u - x0 as f64;
        let ay = v - y0 as f64;
        let r0 = y0 * self.width;
        let r1 = y1 * self.width;
        let top = f[r0 + x0] + ax * (f[r0 + x1] - f[r0 + x0]);
        let bottom = f[r1 + x0] + ax * (f[r1 + x1] - f[r1 + x0]);
        top + ay * (bottom - top)
    }
}

/// Exact Euclidean distance transform per class, clamped at `d_max`.
/// Classes with no edge pixels get a field of `d_max` everywhere.
pub fn build_distance_fields(edges: &ClassEdgeSets, d_max: f64) -> DistanceFieldStack {
    assert!(d_max > 0.0, "d_max must be positive");
    let (w, h) = (edges.width(), edges.height());
    let fields = edges
        .sets()
        .iter()
        .map(|set| {
            if set.is_empty() {
                return vec![d_max; w * h];
            }
            let mut grid = vec![f64::INFINITY; w * h];
            for &[x, y] in set {
                grid[y as usize * w + x as usize] = 0.0;
            }
            squared_edt(&mut grid, w, h);
            grid.iter().map(|&d2| d2.sqrt().min(d_max)).collect()
        })
        .collect();
    DistanceFieldStack {
        width: w,
        height: h,
        d_max,
        fields,
    }
}

/// In-place two-pass squared distance transform (columns, then rows) using
/// the lower envelope of parabolas. Input: 0 on sites, +inf elsewhere.
pub fn squared_edt(grid: &mut [f64], width: usize, height: usize) {
    let n = width.max(height);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    for x in 0..width {
        for y in 0..height {
            f[y] = grid[y * width + x];
        }
        dt_1d(&f[..height], &mut d[..height], &mut v, &mut z);
        for y in 0..height {
            grid[y * width + x] = d[y];
        }
    }
    for y in 0..height {
        let row = &mut grid[y * width..(y + 1) * width];
        f[..width].copy_from_slice(row);
        dt_1d(&f[..width], &mut d[..width], &mut v, &mut z);
        row.copy_from_slice(&d[..width]);
    }
}

/// 1-D squared distance transform of sampled function `f`.
fn dt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    // Skip leading infinite samples; an all-infinite line stays infinite.
    let Some(first) = f.iter().position(|x| x.is_finite()) else {
        d.iter_mut().for_each(|x| *x = f64::INFINITY);
        return;
    };
    let mut k = 0;
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        let mut s;
        loop {
            let p = v[k] as f64;
            s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * qf - 2.0 * p);
            if s <= z[k] && k > 0 {
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
    for (q, out) in d.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let dq = qf - v[k] as f64;
        *out = dq * dq + f[v[k]];
    }
}
