//! Union areas of rectangle families.
//!
//! Axis-parallel rectangles with integer corners use an exact sweep with a
//! segment tree over compressed `y` coordinates. Oriented rectangles (convex
//! quadrilaterals) use vertical slabs cut at every vertex and edge crossing;
//! inside a slab the union length is affine in `x`, so the midpoint rule is
//! exact up to rounding.

/// Axis-parallel rectangle `[x0, x1) × [y0, y1)` with integer corners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntRect {
    pub x0: i128,
    pub x1: i128,
    pub y0: i128,
    pub y1: i128,
}

impl IntRect {
    pub fn area(&self) -> i128 {
        (self.x1 - self.x0).max(0) * (self.y1 - self.y0).max(0)
    }

    pub fn contains(&self, other: &IntRect) -> bool {
        self.x0 <= other.x0 && other.x1 <= self.x1 && self.y0 <= other.y0 && other.y1 <= self.y1
    }

    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }
}

struct CoverTree {
    ys: Vec<i128>,
    count: Vec<u32>,
    covered: Vec<i128>,
}

impl CoverTree {
    fn new(ys: Vec<i128>) -> Self {
        let m = ys.len().max(2) - 1;
        Self {
            ys,
            count: vec![0; 4 * m],
            covered: vec![0; 4 * m],
        }
    }

    fn update(&mut self, node: usize, lo: usize, hi: usize, a: usize, b: usize, delta: i32) {
        if b <= lo || hi <= a {
            return;
        }
        if a <= lo && hi <= b {
            self.count[node] = (self.count[node] as i32 + delta) as u32;
        } else {
            let mid = (lo + hi) / 2;
            self.update(2 * node, lo, mid, a, b, delta);
            self.update(2 * node + 1, mid, hi, a, b, delta);
        }
        self.covered[node] = if self.count[node] > 0 {
            self.ys[hi] - self.ys[lo]
        } else if hi - lo == 1 {
            0
        } else {
            self.covered[2 * node] + self.covered[2 * node + 1]
        };
    }
}

/// Exact area of the union of axis-parallel integer rectangles.
pub fn union_area_int(rects: &[IntRect]) -> i128 {
    let rects: Vec<&IntRect> = rects.iter().filter(|r| !r.is_empty()).collect();
    if rects.is_empty() {
        return 0;
    }
    let mut ys: Vec<i128> = rects.iter().flat_map(|r| [r.y0, r.y1]).collect();
    ys.sort_unstable();
    ys.dedup();
    let mut events: Vec<(i128, i32, usize, usize)> = Vec::with_capacity(2 * rects.len());
    for r in &rects {
        let a = ys.binary_search(&r.y0).unwrap();
        let b = ys.binary_search(&r.y1).unwrap();
        events.push((r.x0, 1, a, b));
        events.push((r.x1, -1, a, b));
    }
    events.sort_unstable();
    let segs = ys.len() - 1;
    let mut tree = CoverTree::new(ys);
    let mut area = 0i128;
    let mut last_x = events[0].0;
    for (x, delta, a, b) in events {
        area += tree.covered[1] * (x - last_x);
        last_x = x;
        tree.update(1, 0, segs, a, b, delta);
    }
    area
}

/// A convex quadrilateral given by its corners in order.
pub type Quad = [[f64; 2]; 4];

/// Corners of the rectangle with the given centre, unit axis `e`, and full
/// side lengths `len_e` (along `e`) and `len_perp` (along `e⊥`).
pub fn oriented_rect(center: [f64; 2], e: [f64; 2], len_e: f64, len_perp: f64) -> Quad {
    let p = [-e[1], e[0]];
    let (a, b) = (len_e / 2.0, len_perp / 2.0);
    let corner = |s: f64, t: f64| {
        [
            center[0] + s * a * e[0] + t * b * p[0],
            center[1] + s * a * e[1] + t * b * p[1],
        ]
    };
    [corner(-1.0, -1.0), corner(1.0, -1.0), corner(1.0, 1.0), corner(-1.0, 1.0)]
}

fn quad_area(q: &Quad) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        let a = q[i];
        let b = q[(i + 1) % 4];
        s += a[0] * b[1] - a[1] * b[0];
    }
    s.abs() / 2.0
}

/// `y`-extent of the vertical line `x = x` inside a convex quad.
fn vertical_section(q: &Quad, x: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..4 {
        let a = q[i];
        let b = q[(i + 1) % 4];
        let (xa, xb) = (a[0].min(b[0]), a[0].max(b[0]));
        if x < xa || x > xb || xa == xb {
            continue;
        }
        let t = (x - a[0]) / (b[0] - a[0]);
        let y = a[1] + t * (b[1] - a[1]);
        lo = lo.min(y);
        hi = hi.max(y);
    }
    (lo < hi).then_some((lo, hi))
}

fn segment_crossing(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Option<f64> {
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let den = r[0] * s[1] - r[1] * s[0];
    if den == 0.0 {
        return None;
    }
    let w = [c[0] - a[0], c[1] - a[1]];
    let t = (w[0] * s[1] - w[1] * s[0]) / den;
    let u = (w[0] * r[1] - w[1] * r[0]) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| a[0] + t * r[0])
}

/// Area of the union of convex quadrilaterals.
pub fn union_area_quads(quads: &[Quad]) -> f64 {
    let quads: Vec<&Quad> = quads.iter().filter(|q| quad_area(q) > 0.0).collect();
    match quads.len() {
        0 => return 0.0,
        1 => return quad_area(quads[0]),
        _ => {}
    }
    let mut xs: Vec<f64> = quads.iter().flat_map(|q| q.iter().map(|p| p[0])).collect();
    let edges: Vec<([f64; 2], [f64; 2], usize)> = quads
        .iter()
        .enumerate()
        .flat_map(|(k, q)| (0..4).map(move |i| (q[i], q[(i + 1) % 4], k)))
        .collect();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            if edges[i].2 == edges[j].2 {
                continue;
            }
            if let Some(x) = segment_crossing(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                xs.push(x);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut area = 0.0;
    let mut sections: Vec<(f64, f64)> = Vec::with_capacity(quads.len());
    for w in xs.windows(2) {
        let width = w[1] - w[0];
        if width <= 0.0 {
            continue;
        }
        let xm = 0.5 * (w[0] + w[1]);
        sections.clear();
        sections.extend(quads.iter().filter_map(|q| vertical_section(q, xm)));
        sections.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut len = 0.0;
        let mut cur: Option<(f64, f64)> = None;
        for &(a, b) in &sections {
            match cur {
                Some((c0, c1)) if a <= c1 => cur = Some((c0, c1.max(b))),
                Some((c0, c1)) => {
                    len += c1 - c0;
                    cur = Some((a, b));
                }
                None => cur = Some((a, b)),
            }
        }
        if let Some((c0, c1)) = cur {
            len += c1 - c0;
        }
        area += len * width;
    }
    area
}
