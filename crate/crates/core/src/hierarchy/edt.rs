//! Exact squared Euclidean distance transform (lower envelope of parabolas,
//! separable over columns then rows) in integer arithmetic.

use crate::mask_io::Bitmap;

/// Squared distance from every pixel centre to the nearest set pixel of
/// `sites`; `u64::MAX` everywhere when `sites` is empty.
pub fn squared_distance_transform(sites: &Bitmap) -> Vec<u64> {
    let (w, h) = (sites.width() as usize, sites.height() as usize);
    let mut out = vec![u64::MAX; w * h];
    if sites.count_ones() == 0 {
        return out;
    }

    // Column pass: 1-D squared distance to the nearest site in the column.
    let mut column = vec![None; h];
    for c in 0..w {
        let mut last: Option<usize> = None;
        for r in 0..h {
            if sites.get(r * w + c) {
                last = Some(r);
            }
            column[r] = last.map(|s| r - s);
        }
        let mut next: Option<usize> = None;
        for r in (0..h).rev() {
            if sites.get(r * w + c) {
                next = Some(r);
            }
            let below = next.map(|s| s - r);
            let d = match (column[r], below) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            out[r * w + c] = d.map_or(u64::MAX, |d| (d * d) as u64);
        }
    }

    let mut row = vec![0u64; w];
    let mut envelope: Vec<usize> = Vec::with_capacity(w);
    let mut bounds: Vec<Option<(i128, i128)>> = Vec::with_capacity(w);
    for r in 0..h {
        row.copy_from_slice(&out[r * w..(r + 1) * w]);
        envelope.clear();
        bounds.clear();
        for q in (0..w).filter(|&q| row[q] != u64::MAX) {
            loop {
                let Some(&p) = envelope.last() else {
                    envelope.push(q);
                    bounds.push(None);
                    break;
                };
                let s = intersection(&row, p, q);
                match bounds.last().copied().flatten() {
                    Some(z) if frac_le(s, z) => {
                        envelope.pop();
                        bounds.pop();
                    }
                    _ => {
                        envelope.push(q);
                        bounds.push(Some(s));
                        break;
                    }
                }
            }
        }
        if envelope.is_empty() {
            continue;
        }
        let mut k = 0;
        for x in 0..w {
            while k + 1 < envelope.len() {
                let (num, den) = bounds[k + 1].expect("interior bounds are finite");
                if num < x as i128 * den {
                    k += 1;
                } else {
                    break;
                }
            }
            let q = envelope[k];
            let dx = x.abs_diff(q) as u64;
            out[r * w + x] = dx * dx + row[q];
        }
    }
    out
}

/// Abscissa where the parabolas rooted at `p < q` meet, as `(num, den)`.
fn intersection(f: &[u64], p: usize, q: usize) -> (i128, i128) {
    let (pi, qi) = (p as i128, q as i128);
    let num = (f[q] as i128 + qi * qi) - (f[p] as i128 + pi * pi);
    (num, 2 * (qi - pi))
}

fn frac_le(a: (i128, i128), b: (i128, i128)) -> bool {
    a.0 * b.1 <= b.0 * a.1
}
