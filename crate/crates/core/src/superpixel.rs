//! SLIC over-segmentation and per-region features.

use std::collections::{BTreeSet, VecDeque};

use crate::pixel::{LabImage, MIN_SIDE};
use crate::{Error, Result};

pub const DEFAULT_COMPACTNESS: f64 = 10.0;
pub const DEFAULT_MAX_ITERS: usize = 10;
pub const DEFAULT_CORNER_FRACTION: f64 = 0.15;

/// The four image corners, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Corner {
    LeftUp,
    RightUp,
    LeftDown,
    RightDown,
}

impl Corner {
    pub const ALL: [Corner; 4] = [
        Corner::LeftUp,
        Corner::RightUp,
        Corner::LeftDown,
        Corner::RightDown,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Corner::LeftUp => "LU",
            Corner::RightUp => "RU",
            Corner::LeftDown => "LD",
            Corner::RightDown => "RD",
        }
    }

    /// Whether `(x, y)` lies in this corner's square of side `side`.
    pub fn contains(self, x: usize, y: usize, width: usize, height: usize, side: usize) -> bool {
        let left = x < side;
        let right = x + side >= width;
        let up = y < side;
        let down = y + side >= height;
        match self {
            Corner::LeftUp => left && up,
            Corner::RightUp => right && up,
            Corner::LeftDown => left && down,
            Corner::RightDown => right && down,
        }
    }
}

/// Pixel-to-region assignment. Labels are dense in `[0, region_count)` and
/// every region is 4-connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpixelLabeling {
    width: usize,
    height: usize,
    labels: Vec<usize>,
    region_count: usize,
}

impl SuperpixelLabeling {
    /// Wraps an existing labeling after checking density. Connectivity is not
    /// enforced here; see [`SuperpixelLabeling::is_connected`].
    pub fn new(width: usize, height: usize, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != width * height || labels.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "expected {} labels for {width}x{height}, got {}",
                width * height,
                labels.len()
            )));
        }
        let region_count = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; region_count];
        labels.iter().for_each(|&l| seen[l] = true);
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParameter(format!(
                "label {missing} is unused"
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
            region_count,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn region_count(&self) -> usize {
        self.region_count
    }

    pub fn label(&self, x: usize, y: usize) -> usize {
        self.labels[y * self.width + x]
    }

    /// Pixel counts per region.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.region_count];
        self.labels.iter().for_each(|&l| sizes[l] += 1);
        sizes
    }

    /// True when every region forms a single 4-connected component.
    pub fn is_connected(&self) -> bool {
        let comps = components(self.width, self.height, &self.labels);
        comps.count == self.region_count
    }
}

struct Components {
    id: Vec<usize>,
    label: Vec<usize>,
    size: Vec<usize>,
    count: usize,
}

fn components(width: usize, height: usize, labels: &[usize]) -> Components {
    let mut id = vec![usize::MAX; labels.len()];
    let mut label = Vec::new();
    let mut size = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..labels.len() {
        if id[start] != usize::MAX {
            continue;
        }
        let comp = label.len();
        let l = labels[start];
        id[start] = comp;
        queue.push_back(start);
        let mut n = 0;
        while let Some(p) = queue.pop_front() {
            n += 1;
            let (x, y) = (p % width, p / width);
            let mut visit = |q: usize| {
                if id[q] == usize::MAX && labels[q] == l {
                    id[q] = comp;
                    queue.push_back(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < width {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - width);
            }
            if y + 1 < height {
                visit(p + width);
            }
        }
        label.push(l);
        size.push(n);
    }
    let count = label.len();
    Components {
        id,
        label,
        size,
        count,
    }
}

/// Visits each unordered pair of 4-adjacent pixels with different values once.
fn for_each_boundary(
    width: usize,
    height: usize,
    values: &[usize],
    mut f: impl FnMut(usize, usize),
) {
    for y in 0..height {
        for x in 0..width {
            let p = y * width + x;
            if x + 1 < width && values[p] != values[p + 1] {
                f(values[p], values[p + 1]);
            }
            if y + 1 < height && values[p] != values[p + width] {
                f(values[p], values[p + width]);
            }
        }
    }
}

/// Segments `img` into roughly `n_target` compact regions with SLIC.
///
/// Cluster centres start on a regular grid with step `S = sqrt(w*h/n_target)`,
/// nudged to the lowest-gradient pixel of their 3x3 neighbourhood. Each
/// iteration assigns pixels within `2S x 2S` of a centre by
/// `d_lab^2 + (d_xy / S)^2 * compactness^2`. A final pass makes every region
/// 4-connected by merging stray components (and fragments smaller than
/// `S^2 / 4`) into the largest adjacent region.
pub fn slic_segment(
    img: &LabImage,
    n_target: usize,
    compactness: f64,
    max_iters: usize,
) -> Result<SuperpixelLabeling> {
    let (w, h) = img.dims();
    if w < MIN_SIDE || h < MIN_SIDE {
        return Err(Error::ImageTooSmall(format!(
            "{w}x{h} is below {MIN_SIDE}x{MIN_SIDE}"
        )));
    }
    let max_regions = w * h / 16;
    if n_target < 16 || n_target > max_regions {
        return Err(Error::InvalidParameter(format!(
            "superpixel count {n_target} outside [16, {max_regions}] for a {w}x{h} image"
        )));
    }
    if !(compactness > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "compactness must be > 0, got {compactness}"
        )));
    }

    let step = ((w * h) as f64 / n_target as f64).sqrt();
    let mut centers = seed_centers(img, step);
    let window = step.ceil() as isize;
    let spatial_weight = (compactness / step).powi(2);

    let lab = img.data();
    let mut labels = vec![usize::MAX; w * h];
    let mut dist = vec![f64::INFINITY; w * h];

    for _ in 0..max_iters.max(1) {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        for (k, c) in centers.iter().enumerate() {
            let cx = c[3].round() as isize;
            let cy = c[4].round() as isize;
            let x0 = (cx - window).max(0) as usize;
            let x1 = ((cx + window + 1) as usize).min(w);
            let y0 = (cy - window).max(0) as usize;
            let y1 = ((cy + window + 1) as usize).min(h);
            for y in y0..y1 {
                for x in x0..x1 {
                    let p = y * w + x;
                    let px = lab[p];
                    let dl = px[0] - c[0];
                    let da = px[1] - c[1];
                    let db = px[2] - c[2];
                    let dx = x as f64 - c[3];
                    let dy = y as f64 - c[4];
                    let d = dl * dl + da * da + db * db + (dx * dx + dy * dy) * spatial_weight;
                    if d < dist[p] {
                        dist[p] = d;
                        labels[p] = k;
                    }
                }
            }
        }

        let mut sums = vec![[0.0f64; 6]; centers.len()];
        for (p, &k) in labels.iter().enumerate() {
            if k == usize::MAX {
                continue;
            }
            let px = lab[p];
            let s = &mut sums[k];
            s[0] += px[0];
            s[1] += px[1];
            s[2] += px[2];
            s[3] += (p % w) as f64;
            s[4] += (p / w) as f64;
            s[5] += 1.0;
        }
        for (c, s) in centers.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                for i in 0..5 {
                    c[i] = s[i] / s[5];
                }
            }
        }
    }

    // Pixels outside every search window fall back to the spatially nearest centre.
    for (p, l) in labels.iter_mut().enumerate() {
        if *l == usize::MAX {
            let (x, y) = ((p % w) as f64, (p / w) as f64);
            *l = centers
                .iter()
                .enumerate()
                .map(|(k, c)| (k, (c[3] - x).powi(2) + (c[4] - y).powi(2)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(k, _)| k)
                .expect("at least one centre");
        }
    }

    let min_size = ((step * step) / 4.0).floor().max(1.0) as usize;
    let labels = enforce_connectivity(w, h, &labels, min_size);
    SuperpixelLabeling::new(w, h, labels)
}

fn seed_centers(img: &LabImage, step: f64) -> Vec<[f64; 5]> {
    let (w, h) = img.dims();
    let nx = ((w as f64 / step).round() as usize).max(1);
    let ny = ((h as f64 / step).round() as usize).max(1);
    let sx = w as f64 / nx as f64;
    let sy = h as f64 / ny as f64;
    let gradient = |x: usize, y: usize| -> f64 {
        let l = img.pixel(x - 1, y);
        let r = img.pixel(x + 1, y);
        let u = img.pixel(x, y - 1);
        let d = img.pixel(x, y + 1);
        (0..3)
            .map(|c| (r[c] - l[c]).powi(2) + (d[c] - u[c]).powi(2))
            .sum()
    };
    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let gx = (((i as f64 + 0.5) * sx) as usize).min(w - 1);
            let gy = (((j as f64 + 0.5) * sy) as usize).min(h - 1);
            let (mut bx, mut by) = (gx, gy);
            if gx >= 2 && gy >= 2 && gx + 2 < w && gy + 2 < h {
                let mut best = gradient(gx, gy);
                for y in gy - 1..=gy + 1 {
                    for x in gx - 1..=gx + 1 {
                        let g = gradient(x, y);
                        if g < best {
                            best = g;
                            bx = x;
                            by = y;
                        }
                    }
                }
            }
            let c = img.pixel(bx, by);
            centers.push([c[0], c[1], c[2], bx as f64, by as f64]);
        }
    }
    centers
}

/// Keeps the largest component of each label; every other component, and any
/// component below `min_size`, is merged into its largest adjacent region.
/// Output labels are renumbered in raster order of first appearance.
fn enforce_connectivity(
    width: usize,
    height: usize,
    labels: &[usize],
    min_size: usize,
) -> Vec<usize> {
    let comps = components(width, height, labels);
    let n = comps.count;

    let mut anchor: Vec<Option<usize>> = vec![None; labels.iter().max().map_or(0, |m| m + 1)];
    for c in 0..n {
        let slot = &mut anchor[comps.label[c]];
        match *slot {
            Some(a) if comps.size[a] >= comps.size[c] => {}
            _ => *slot = Some(c),
        }
    }
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for a in anchor.iter().flatten() {
        if comps.size[*a] >= min_size {
            owner[*a] = Some(*a);
        }
    }
    if owner.iter().all(Option::is_none) {
        let largest = (0..n)
            .max_by_key(|&c| (comps.size[c], std::cmp::Reverse(c)))
            .expect("nonempty");
        owner[largest] = Some(largest);
    }

    let mut adjacent = vec![BTreeSet::new(); n];
    for_each_boundary(width, height, &comps.id, |a, b| {
        adjacent[a].insert(b);
        adjacent[b].insert(a);
    });

    let mut region_size: Vec<usize> = (0..n)
        .map(|c| {
            if owner[c] == Some(c) {
                comps.size[c]
            } else {
                0
            }
        })
        .collect();
    let mut pending: Vec<usize> = (0..n).filter(|&c| owner[c].is_none()).collect();
    // Larger fragments first so small slivers follow their bigger neighbours.
    pending.sort_by_key(|&c| (std::cmp::Reverse(comps.size[c]), c));
    while !pending.is_empty() {
        let mut next = Vec::new();
        for &c in &pending {
            let target = adjacent[c]
                .iter()
                .filter_map(|&d| owner[d])
                .max_by_key(|&r| (region_size[r], std::cmp::Reverse(r)));
            match target {
                Some(r) => {
                    owner[c] = Some(r);
                    region_size[r] += comps.size[c];
                }
                None => next.push(c),
            }
        }
        assert!(
            next.len() < pending.len(),
            "connectivity pass made no progress"
        );
        pending = next;
    }

    let mut remap = vec![usize::MAX; n];
    let mut next_label = 0;
    comps
        .id
        .iter()
        .map(|&c| {
            let root = owner[c].expect("all components resolved");
            if remap[root] == usize::MAX {
                remap[root] = next_label;
                next_label += 1;
            }
            remap[root]
        })
        .collect()
}

/// Per-region quantities consumed by the affinity and prior stages.
#[derive(Debug, Clone)]
pub struct SuperpixelFeatures {
    pub width: usize,
    pub height: usize,
    /// Mean CIELAB colour per region.
    pub mean_lab: Vec<[f64; 3]>,
    /// Mean pixel coordinate divided by `(width - 1, height - 1)`.
    pub centroid: Vec<[f64; 2]>,
    pub size: Vec<usize>,
    /// Regions sharing a 4-connected boundary (sorted).
    pub adjacency: Vec<Vec<usize>>,
    /// Direct neighbours plus neighbours of neighbours, excluding the region itself (sorted).
    pub neighbors: Vec<Vec<usize>>,
    pub corner: Vec<Option<Corner>>,
    /// Side length of the corner squares, in pixels.
    pub corner_side: usize,
}

impl SuperpixelFeatures {
    pub fn region_count(&self) -> usize {
        self.size.len()
    }

    /// Regions assigned to `corner`, ascending.
    pub fn corner_set(&self, corner: Corner) -> Vec<usize> {
        (0..self.region_count())
            .filter(|&i| self.corner[i] == Some(corner))
            .collect()
    }
}

pub fn extract_features(
    labeling: &SuperpixelLabeling,
    img: &LabImage,
    corner_fraction: f64,
) -> Result<SuperpixelFeatures> {
    if labeling.dims() != img.dims() {
        return Err(Error::dims(labeling.dims(), img.dims()));
    }
    if !(corner_fraction > 0.0 && corner_fraction < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "corner fraction must lie in (0, 0.5), got {corner_fraction}"
        )));
    }
    let (w, h) = labeling.dims();
    let n = labeling.region_count();
    let side = (corner_fraction * w.min(h) as f64).ceil() as usize;

    let mut lab_sum = vec![[0.0f64; 3]; n];
    let mut pos_sum = vec![[0.0f64; 2]; n];
    let mut size = vec![0usize; n];
    let mut corner_hits = vec![[0usize; 4]; n];
    for y in 0..h {
        for x in 0..w {
            let l = labeling.label(x, y);
            let px = img.pixel(x, y);
            for c in 0..3 {
                lab_sum[l][c] += px[c];
            }
            pos_sum[l][0] += x as f64;
            pos_sum[l][1] += y as f64;
            size[l] += 1;
            for corner in Corner::ALL {
                if corner.contains(x, y, w, h, side) {
                    corner_hits[l][corner.index()] += 1;
                }
            }
        }
    }

    let mean_lab = lab_sum
        .iter()
        .zip(&size)
        .map(|(s, &k)| s.map(|v| v / k as f64))
        .collect();
    let sx = (w - 1).max(1) as f64;
    let sy = (h - 1).max(1) as f64;
    let centroid = pos_sum
        .iter()
        .zip(&size)
        .map(|(s, &k)| [s[0] / k as f64 / sx, s[1] / k as f64 / sy])
        .collect();

    let corner = corner_hits
        .iter()
        .map(|hits| {
            let mut best: Option<Corner> = None;
            for c in Corner::ALL {
                if hits[c.index()] > 0 && best.is_none_or(|b| hits[c.index()] > hits[b.index()]) {
                    best = Some(c);
                }
            }
            best
        })
        .collect();

    let mut adjacent = vec![BTreeSet::new(); n];
    for_each_boundary(w, h, labeling.labels(), |a, b| {
        adjacent[a].insert(b);
        adjacent[b].insert(a);
    });
    let neighbors = (0..n)
        .map(|i| {
            let mut set: BTreeSet<usize> = adjacent[i].clone();
            for &j in &adjacent[i] {
                set.extend(adjacent[j].iter().copied());
            }
            set.remove(&i);
            set.into_iter().collect()
        })
        .collect();

    Ok(SuperpixelFeatures {
        width: w,
        height: h,
        mean_lab,
        centroid,
        size,
        adjacency: adjacent
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
        neighbors,
        corner,
        corner_side: side,
    })
}
